//! Fox H-function
//!
//! ```text
//! H^{m,l}_{p,q}[z | (a_i, alpha_i); (b_j, beta_j)]
//!   = 1/(2 pi i) int_L  prod_{j<=m} G(b_j - beta_j s) prod_{i<=l} G(1 - a_i + alpha_i s)
//!                     / (prod_{i>l} G(a_i - alpha_i s) prod_{j>m} G(1 - b_j + beta_j s))  z^s ds
//! ```
//!
//! Evaluated for z > 0 and real parameters by trapezoid quadrature along a
//! vertical line that separates the poles of the two numerator groups. The
//! line is moved towards the real saddle of the integrand when that lies
//! inside the admissible strip; for large arguments this is what keeps the
//! quadrature from cancelling catastrophically.
//!
//! The module also carries the parameter transformations that map one
//! H-function onto another (argument inversion, power scaling, power shift,
//! Gauss multiplication) and the large-argument decay envelope.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::{ln_gamma_unchecked, ln_rgamma};

/// Default relative tolerance between successive quadrature refinements.
pub const QUADRATURE_TOLERANCE: f64 = 1e-9;
/// Distance kept between the contour and the nearest pole, at most.
const POLE_MARGIN: f64 = 0.5;
/// Log-magnitude drop (relative to the peak) at which the integrand tail is cut.
const TAIL_DROP: f64 = 42.0;
const MIN_HALF_WIDTH: f64 = 8.0;
const MAX_HALF_WIDTH: f64 = 1e4;
const MAX_LEVELS: usize = 14;

/// Parameter set of a Fox H-function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHSpec")]
pub struct HFunctionSpec {
    m: usize,
    l: usize,
    upper: Vec<(f64, f64)>,
    lower: Vec<(f64, f64)>,
}

#[derive(Deserialize)]
struct RawHSpec {
    m: usize,
    l: usize,
    #[serde(default)]
    upper: Vec<(f64, f64)>,
    #[serde(default)]
    lower: Vec<(f64, f64)>,
}

impl TryFrom<RawHSpec> for HFunctionSpec {
    type Error = Error;

    fn try_from(raw: RawHSpec) -> Result<Self> {
        HFunctionSpec::new(raw.m, raw.l, raw.upper, raw.lower)
    }
}

/// Convergence and asymptotic quantities of an H-function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HConvergence {
    pub omega: f64,
    pub mu: f64,
    pub delta: f64,
    pub nu: f64,
    /// `pi * omega / 2`, the admissible bound on `|arg z|`.
    pub arg_bound: f64,
}

impl HConvergence {
    pub fn integrable(&self) -> bool {
        self.omega > 0.0
    }
}

/// Constants produced by the Gauss multiplication reduction:
/// `H_full(z) = scale * H_reduced(arg_multiplier * z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussReduction {
    pub scale: f64,
    pub arg_multiplier: f64,
}

impl GaussReduction {
    fn for_order(r: u32) -> Self {
        let rf = r as f64;
        Self {
            scale: (2.0 * PI).powf((rf - 1.0) / 2.0) / rf.sqrt(),
            arg_multiplier: rf.powf(rf),
        }
    }
}

impl HFunctionSpec {
    pub fn new(m: usize, l: usize, upper: Vec<(f64, f64)>, lower: Vec<(f64, f64)>) -> Result<Self> {
        if m > lower.len() || l > upper.len() {
            return Err(Error::invalid("fox_h", "need 0 <= m <= q and 0 <= l <= p"));
        }
        if m == 0 && l == 0 {
            return Err(Error::invalid("fox_h", "(m, l) = (0, 0) is not allowed"));
        }
        for &(a, s) in upper.iter().chain(lower.iter()) {
            if !a.is_finite() || !(s > 0.0) || !s.is_finite() {
                return Err(Error::invalid("fox_h", "shifts must be finite and scales positive"));
            }
        }
        Ok(Self { m, l, upper, lower })
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn l(&self) -> usize {
        self.l
    }
    pub fn p(&self) -> usize {
        self.upper.len()
    }
    pub fn q(&self) -> usize {
        self.lower.len()
    }
    pub fn upper(&self) -> &[(f64, f64)] {
        &self.upper
    }
    pub fn lower(&self) -> &[(f64, f64)] {
        &self.lower
    }

    pub fn convergence_params(&self) -> HConvergence {
        convergence_params(self)
    }

    /// log of the Mellin-Barnes integrand without the `z^s` factor; `None`
    /// where a denominator gamma has a pole.
    fn log_kernel(&self, s: Complex64) -> Option<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &(b, beta)) in self.lower.iter().enumerate() {
            if j < self.m {
                acc += ln_gamma_unchecked(b - beta * s);
            } else {
                acc += ln_rgamma(1.0 - b + beta * s)?;
            }
        }
        for (i, &(a, alpha)) in self.upper.iter().enumerate() {
            if i < self.l {
                acc += ln_gamma_unchecked(1.0 - a + alpha * s);
            } else {
                acc += ln_rgamma(a - alpha * s)?;
            }
        }
        Some(acc)
    }

    /// Smoothed real log-magnitude of the integrand on the real axis. The
    /// oscillating `sin` factor of denominator gammas left of 1/2 is replaced
    /// by its envelope so the function has no spurious `-inf` dips.
    fn log_envelope(&self, gamma: f64, ln_z: f64) -> f64 {
        fn ln_abs_gamma(x: f64) -> f64 {
            ln_gamma_unchecked(Complex64::new(x, 0.0)).re
        }
        fn smooth_ln_rgamma(x: f64) -> f64 {
            if x >= 0.5 {
                -ln_abs_gamma(x)
            } else {
                ln_abs_gamma(1.0 - x) - PI.ln()
            }
        }
        let mut acc = gamma * ln_z;
        for (j, &(b, beta)) in self.lower.iter().enumerate() {
            if j < self.m {
                acc += ln_abs_gamma(b - beta * gamma);
            } else {
                acc += smooth_ln_rgamma(1.0 - b + beta * gamma);
            }
        }
        for (i, &(a, alpha)) in self.upper.iter().enumerate() {
            if i < self.l {
                acc += ln_abs_gamma(1.0 - a + alpha * gamma);
            } else {
                acc += smooth_ln_rgamma(a - alpha * gamma);
            }
        }
        acc
    }

    /// Leftmost pole of the `G(b_j - beta_j s)` group and rightmost pole of
    /// the `G(1 - a_i + alpha_i s)` group.
    fn pole_bounds(&self) -> (f64, f64) {
        let right = self.lower[..self.m]
            .iter()
            .map(|&(b, beta)| b / beta)
            .fold(f64::INFINITY, f64::min);
        let left = self.upper[..self.l]
            .iter()
            .map(|&(a, alpha)| (a - 1.0) / alpha)
            .fold(f64::NEG_INFINITY, f64::max);
        (left, right)
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        eval_mellin_barnes(self, z)
    }
}

/// omega, mu, delta and nu computed from their defining sums and products.
pub fn convergence_params(spec: &HFunctionSpec) -> HConvergence {
    let (l, m) = (spec.l, spec.m);
    let omega = spec.upper[..l].iter().map(|u| u.1).sum::<f64>() - spec.upper[l..].iter().map(|u| u.1).sum::<f64>()
        + spec.lower[..m].iter().map(|v| v.1).sum::<f64>()
        - spec.lower[m..].iter().map(|v| v.1).sum::<f64>();
    let mu = spec.upper.iter().map(|&(_, a)| a.powf(a)).product::<f64>()
        * spec.lower.iter().map(|&(_, b)| b.powf(-b)).product::<f64>();
    let delta = spec.lower.iter().map(|v| v.0).sum::<f64>() - spec.upper.iter().map(|u| u.0).sum::<f64>()
        + (spec.p() as f64 - spec.q() as f64) / 2.0;
    let nu = spec.lower.iter().map(|v| v.1).sum::<f64>() - spec.upper.iter().map(|u| u.1).sum::<f64>();
    HConvergence {
        omega,
        mu,
        delta,
        nu,
        arg_bound: PI * omega / 2.0,
    }
}

/// Chooses the abscissa of the integration line.
fn contour_abscissa(spec: &HFunctionSpec, ln_z: f64) -> Result<f64> {
    let (left, right) = spec.pole_bounds();
    if !(left < right) {
        return Err(Error::UnsupportedClass(format!(
            "numerator poles overlap (rightmost left pole {left}, leftmost right pole {right})"
        )));
    }
    let margin = if left.is_finite() && right.is_finite() {
        POLE_MARGIN.min((right - left) / 4.0)
    } else {
        POLE_MARGIN
    };
    let hi = right - margin;
    let lo = left + margin;
    let f = |g: f64| spec.log_envelope(g, ln_z);

    // Bracket the minimum of the envelope, expanding into unbounded sides.
    let (mut a, mut b) = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (lo, hi),
        (false, true) => {
            let mut step = 1.0;
            let mut prev = f(hi);
            let mut x = hi;
            loop {
                let nx = x - step;
                let v = f(nx);
                if v > prev || step > 4096.0 {
                    break (nx, hi.min(x + step));
                }
                prev = v;
                x = nx;
                step *= 2.0;
            }
        }
        (true, false) => {
            let mut step = 1.0;
            let mut prev = f(lo);
            let mut x = lo;
            loop {
                let nx = x + step;
                let v = f(nx);
                if v > prev || step > 4096.0 {
                    break (lo.max(x - step), nx);
                }
                prev = v;
                x = nx;
                step *= 2.0;
            }
        }
        (false, false) => unreachable!("(m, l) = (0, 0) rejected at construction"),
    };
    if lo.is_finite() {
        a = a.max(lo);
    }
    if hi.is_finite() {
        b = b.min(hi);
    }
    // Golden-section search.
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if (b - a).abs() < 1e-3 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let g = 0.5 * (a + b);
    Ok(g.clamp(lo.max(f64::MIN), hi.min(f64::MAX)))
}

/// Mellin-Barnes evaluation with the default refinement tolerance.
pub fn eval_mellin_barnes(spec: &HFunctionSpec, z: f64) -> Result<f64> {
    eval_mellin_barnes_tol(spec, z, QUADRATURE_TOLERANCE)
}

/// Evaluates the H-function at `z > 0` by trapezoid quadrature on a vertical
/// line. The step is halved (reusing earlier nodes) until two successive
/// estimates differ by less than `tol` relative.
pub fn eval_mellin_barnes_tol(spec: &HFunctionSpec, z: f64, tol: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::invalid("fox_h", format!("argument z = {z} must be positive")));
    }
    let conv = convergence_params(spec);
    if !conv.integrable() {
        return Err(Error::NonConvergent { omega: conv.omega });
    }
    let ln_z = z.ln();
    let gamma = contour_abscissa(spec, ln_z)?;

    let integrand = |y: f64| -> Complex64 {
        let s = Complex64::new(gamma, y);
        match spec.log_kernel(s) {
            Some(lk) => (lk + s * ln_z).exp(),
            None => Complex64::new(0.0, 0.0),
        }
    };
    let log_mag = |y: f64| -> f64 {
        let s = Complex64::new(gamma, y);
        spec.log_kernel(s).map_or(f64::NEG_INFINITY, |lk| (lk + s * ln_z).re)
    };

    // Half-width: walk outwards until the integrand is TAIL_DROP below its
    // running peak and still falling.
    let mut peak = log_mag(0.0).max(log_mag(0.5));
    let mut prev = peak;
    let mut y = 0.0;
    let half_width = loop {
        y += 1.0;
        let v = log_mag(y);
        peak = peak.max(v);
        if y >= MIN_HALF_WIDTH && v < peak - TAIL_DROP && v <= prev {
            break y;
        }
        if y >= MAX_HALF_WIDTH {
            return Err(Error::QuadratureFailure { last_change: f64::NAN });
        }
        prev = v;
    };
    // |H| <= (1/pi) int_0^T |f| <= T e^peak / pi
    if peak + half_width.ln() < -745.0 {
        return Ok(0.0);
    }

    let mut n = (half_width / 0.5).ceil() as usize;
    let mut h = half_width / n as f64;
    let mut total = 0.5 * (integrand(0.0).re + integrand(half_width).re);
    for i in 1..n {
        total += integrand(i as f64 * h).re;
    }
    let mut estimate = total * h / PI;
    let mut last_change = f64::INFINITY;
    for _ in 0..MAX_LEVELS {
        let mut mid = 0.0;
        for i in 0..n {
            mid += integrand((i as f64 + 0.5) * h).re;
        }
        total += mid;
        n *= 2;
        h /= 2.0;
        let refined = total * h / PI;
        last_change = (refined - estimate).abs();
        estimate = refined;
        let scale = estimate.abs().max(peak.exp() * 1e-6);
        if h <= 0.25 && last_change <= tol * scale {
            return Ok(estimate);
        }
    }
    Err(Error::QuadratureFailure {
        last_change: last_change / estimate.abs(),
    })
}

/// Evaluates at many points in parallel, preserving order.
pub fn eval_many(spec: &HFunctionSpec, zs: &[f64]) -> Vec<Result<f64>> {
    zs.par_iter().map(|&z| eval_mellin_barnes(spec, z)).collect()
}

/// `H^{m,l}_{p,q}[z] = H^{l,m}_{q,p}[1/z]` with parameters `(1 - b_j, beta_j)`
/// on top and `(1 - a_i, alpha_i)` below.
pub fn invert_argument(spec: &HFunctionSpec) -> HFunctionSpec {
    HFunctionSpec {
        m: spec.l,
        l: spec.m,
        upper: spec.lower.iter().map(|&(b, beta)| (1.0 - b, beta)).collect(),
        lower: spec.upper.iter().map(|&(a, alpha)| (1.0 - a, alpha)).collect(),
    }
}

/// Multiplies every scale by `k`; `H(z) = k * H_scaled(z^k)`.
pub fn power_scale(spec: &HFunctionSpec, k: f64) -> Result<HFunctionSpec> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::invalid("fox_h", "power scale k must be positive"));
    }
    Ok(HFunctionSpec {
        m: spec.m,
        l: spec.l,
        upper: spec.upper.iter().map(|&(a, s)| (a, k * s)).collect(),
        lower: spec.lower.iter().map(|&(b, s)| (b, k * s)).collect(),
    })
}

/// Shifts every `a_i` by `sigma alpha_i` and `b_j` by `sigma beta_j`;
/// `z^sigma H(z) = H_shifted(z)`.
pub fn shift_by_power(spec: &HFunctionSpec, sigma: f64) -> HFunctionSpec {
    HFunctionSpec {
        m: spec.m,
        l: spec.l,
        upper: spec.upper.iter().map(|&(a, s)| (a + sigma * s, s)).collect(),
        lower: spec.lower.iter().map(|&(b, s)| (b + sigma * s, s)).collect(),
    }
}

const SHAPE_TOL: f64 = 1e-12;

/// Strips a denominator upper entry `(1, r)` and numerator lower entries
/// `(j/r, 1)`, `j = 1..r`, using
/// `H_full(z) = (2 pi)^((r-1)/2) / sqrt(r) * H_reduced(r^r z)`.
pub fn gauss_multiplication_reduce(spec: &HFunctionSpec, r: u32) -> Result<(HFunctionSpec, GaussReduction)> {
    if r == 0 {
        return Err(Error::ShapeMismatch { r });
    }
    let rf = r as f64;
    let upper_idx = (spec.l..spec.p())
        .find(|&i| {
            let (a, s) = spec.upper[i];
            (a - 1.0).abs() < SHAPE_TOL && (s - rf).abs() < SHAPE_TOL
        })
        .ok_or(Error::ShapeMismatch { r })?;
    let mut taken = vec![false; spec.q()];
    for j in 1..=r {
        let target = j as f64 / rf;
        let idx = (0..spec.m)
            .find(|&i| {
                !taken[i] && (spec.lower[i].0 - target).abs() < SHAPE_TOL && (spec.lower[i].1 - 1.0).abs() < SHAPE_TOL
            })
            .ok_or(Error::ShapeMismatch { r })?;
        taken[idx] = true;
    }
    let upper: Vec<_> = spec
        .upper
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != upper_idx)
        .map(|(_, &u)| u)
        .collect();
    let lower: Vec<_> = spec
        .lower
        .iter()
        .zip(&taken)
        .filter(|(_, &t)| !t)
        .map(|(&v, _)| v)
        .collect();
    let reduced =
        HFunctionSpec::new(spec.m - r as usize, spec.l, upper, lower).map_err(|_| Error::ShapeMismatch { r })?;
    Ok((reduced, GaussReduction::for_order(r)))
}

/// Inverse of [`gauss_multiplication_reduce`]: prepends `(j/r, 1)` to the
/// numerator lower parameters and appends `(1, r)` to the upper ones.
pub fn gauss_multiplication_expand(spec: &HFunctionSpec, r: u32) -> Result<(HFunctionSpec, GaussReduction)> {
    if r == 0 {
        return Err(Error::ShapeMismatch { r });
    }
    let rf = r as f64;
    let mut lower: Vec<(f64, f64)> = (1..=r).map(|j| (j as f64 / rf, 1.0)).collect();
    lower.extend_from_slice(&spec.lower);
    let mut upper = spec.upper.clone();
    upper.push((1.0, rf));
    let full = HFunctionSpec::new(spec.m + r as usize, spec.l, upper, lower)?;
    Ok((full, GaussReduction::for_order(r)))
}

/// Large-argument envelope `exp(-nu mu^(1/nu) z^(1/nu)) z^((2 delta + 1)/(2 nu))`
/// of `H^{m,0}_{p,q}`, without the unknown constant factor.
pub fn asymptotic_estimate(spec: &HFunctionSpec, z: f64) -> Result<f64> {
    if spec.l != 0 {
        return Err(Error::UnsupportedClass(
            "the decay envelope applies to l = 0 only".into(),
        ));
    }
    let c = convergence_params(spec);
    if !(c.nu > 0.0) {
        return Err(Error::NonDecaying { nu: c.nu });
    }
    let inv = 1.0 / c.nu;
    Ok((-c.nu * c.mu.powf(inv) * z.powf(inv)).exp() * z.powf((2.0 * c.delta + 1.0) / (2.0 * c.nu)))
}

/// Residue sum over the right poles `s = (b_j + k)/beta_j`; valid for l = 0
/// when all those poles are simple. Declines (returns `None`) on collisions.
/// Cross-check oracle for the quadrature, independent of the contour code.
#[doc(hidden)]
pub fn residue_series_oracle(spec: &HFunctionSpec, z: f64, terms: usize) -> Option<f64> {
    if spec.l != 0 || !(z > 0.0) {
        return None;
    }
    let m = spec.m;
    let poles = |j: usize, k: usize| (spec.lower[j].0 + k as f64) / spec.lower[j].1;
    for j1 in 0..m {
        for j2 in (j1 + 1)..m {
            for k1 in 0..terms {
                for k2 in 0..terms {
                    if (poles(j1, k1) - poles(j2, k2)).abs() < 1e-9 {
                        return None;
                    }
                }
            }
        }
    }
    let ln_z = z.ln();
    let mut total = crate::sum::CompensatedSum::new();
    for j in 0..m {
        let (_, beta_j) = spec.lower[j];
        let mut small = 0;
        for k in 0..terms {
            let s = poles(j, k);
            let sc = Complex64::new(s, 0.0);
            // -Res of G(b_j - beta_j s) at the pole: (-1)^k / (k! beta_j)
            let mut acc = -ln_gamma_unchecked(Complex64::new(k as f64 + 1.0, 0.0)) - beta_j.ln();
            if k % 2 == 1 {
                acc += Complex64::new(0.0, PI);
            }
            let mut zero = false;
            for (i, &(b, beta)) in spec.lower.iter().enumerate() {
                if i == j {
                    continue;
                }
                if i < m {
                    acc += ln_gamma_unchecked(b - beta * sc);
                } else {
                    match ln_rgamma(1.0 - b + beta * sc) {
                        Some(v) => acc += v,
                        None => zero = true,
                    }
                }
            }
            for &(a, alpha) in &spec.upper {
                match ln_rgamma(a - alpha * sc) {
                    Some(v) => acc += v,
                    None => zero = true,
                }
            }
            if zero {
                continue;
            }
            let t = (acc + s * ln_z).exp();
            total.add(t);
            if t.norm() < 1e-17 * total.value().norm() {
                small += 1;
                if small > 3 {
                    break;
                }
            } else {
                small = 0;
            }
        }
    }
    Some(total.value().re)
}
