//! Independent checks that solutions satisfy their equations.
//!
//! Two routes are available. The termwise route applies the Riemann-Liouville
//! derivative and Euler operators exactly to power series. The numeric route
//! uses a Grunwald-Letnikov sum in `t` and central differences in `x`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fox_h::{self, HFunctionSpec};
use crate::frac_series::{self, EulerPolynomialOperator, FracPowerSeries, EXPONENT_TOLERANCE};
use crate::solver_ode::{self, OdeBranch, OdeSolution};
use crate::solver_pde::{self, DiffusionProblem, PdeRepr, PdeSolution};
use crate::sum::CompensatedSum;
use crate::wright::{WrightParam, WrightSpec};

/// Points where both sides are below this fraction of the largest value are
/// reported but left out of `max_rel_err`.
pub const EXCLUSION_FRACTION: f64 = 1e-12;
/// Floor on the denominator of the relative error.
pub const REL_ERR_FLOOR: f64 = 1e-300;
/// Relative step of the central differences in `x`.
pub const FD_REL_STEP: f64 = 1e-2;
/// Quadrature tolerance used when H-function values feed a difference quotient.
pub const FD_QUADRATURE_TOLERANCE: f64 = 1e-12;
/// Quadrature tolerance for the samples of a Grunwald-Letnikov sum.
pub const GL_QUADRATURE_TOLERANCE: f64 = 1e-10;
/// Coefficients summed when a series solution is evaluated pointwise.
pub const SERIES_ORDER: usize = frac_series::EVAL_ORDER;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Exact operator calculus on power series.
    TermwiseExact,
    /// Grunwald-Letnikov sum for the fractional derivative.
    GrunwaldLetnikov,
    /// Central differences only.
    FiniteDifference,
    /// Closed-form derivatives of an explicit formula.
    AnalyticDerivative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualPoint {
    /// Space point, argument `z`, or exponent for coefficient checks.
    pub x: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub abs_err: f64,
    pub rel_err: f64,
    /// Both sides negligible; not counted in `max_rel_err`.
    #[serde(default)]
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub method: Method,
    pub points: Vec<ResidualPoint>,
    pub max_rel_err: f64,
}

impl ResidualReport {
    /// Builds a report from `(x, t, lhs, rhs)` samples.
    pub fn from_samples(method: Method, samples: Vec<(f64, Option<f64>, Complex64, Complex64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::precondition(
                "verify",
                "a residual report needs at least one point",
            ));
        }
        let scale = samples
            .iter()
            .map(|(_, _, l, r)| l.norm().max(r.norm()))
            .fold(0.0, f64::max);
        let cutoff = EXCLUSION_FRACTION * scale;
        let points: Vec<ResidualPoint> = samples
            .into_iter()
            .map(|(x, t, lhs, rhs)| {
                let abs_err = (lhs - rhs).norm();
                let rel_err = abs_err / lhs.norm().max(rhs.norm()).max(REL_ERR_FLOOR);
                ResidualPoint {
                    x,
                    t,
                    lhs,
                    rhs,
                    abs_err,
                    rel_err,
                    excluded: lhs.norm() < cutoff && rhs.norm() < cutoff || scale == 0.0,
                }
            })
            .collect();
        let max_rel_err = points
            .iter()
            .filter(|p| !p.excluded)
            .map(|p| p.rel_err)
            .fold(0.0, f64::max);
        Ok(Self {
            method,
            points,
            max_rel_err,
        })
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_err <= tol
    }
}

/// Grunwald-Letnikov weights `(-1)^j binom(alpha, j)` for `j = 0..=n`.
pub fn gl_weights(alpha: f64, n: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(n + 1);
    w.push(1.0);
    for j in 1..=n {
        let prev = w[j - 1];
        w.push(prev * (1.0 - (alpha + 1.0) / j as f64));
    }
    w
}

/// `h^-alpha sum_j w_j samples[n - j]`, where `samples[k] = f(theta + k h)`.
fn gl_sum(weights: &[f64], samples: &[f64], n: usize, alpha: f64, h: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for j in 0..=n {
        let w = weights[j];
        // integer orders have finitely many non-zero weights
        if w != 0.0 {
            acc.add_real(w * samples[n - j]);
        }
    }
    acc.value().re * h.powf(-alpha)
}

fn check_step(t: f64, h: f64) -> Result<()> {
    if !(t > 0.0) || !(h > 0.0) {
        return Err(Error::invalid("verify", "need t > 0 and h > 0"));
    }
    if h > t / 50.0 {
        return Err(Error::StepTooLarge { h, t });
    }
    Ok(())
}

fn lattice_count(t: f64, h: f64) -> usize {
    (t / h + 1e-9).floor() as usize
}

/// First-order Grunwald-Letnikov approximation of the Riemann-Liouville
/// derivative of order `alpha` at `t`, with nodes `t - j h`, `j = 0..=floor(t/h)`.
pub fn gl_fractional_derivative(f: impl Fn(f64) -> f64, alpha: f64, t: f64, h: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("verify", "derivative order must be positive"));
    }
    check_step(t, h)?;
    let n = lattice_count(t, h);
    let theta = (t - n as f64 * h).max(0.0);
    let samples: Vec<f64> = (0..=n).map(|k| f(theta + k as f64 * h)).collect();
    Ok(gl_sum(&gl_weights(alpha, n), &samples, n, alpha, h))
}

/// Grunwald-Letnikov with steps `h` and `h/2` combined by one Richardson step,
/// second-order accurate for functions vanishing smoothly at the origin.
pub fn gl_richardson(f: impl Fn(f64) -> f64 + Sync, alpha: f64, t: f64, h: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("verify", "derivative order must be positive"));
    }
    check_step(t, h)?;
    let half = h / 2.0;
    let n = lattice_count(t, half);
    let theta = (t - n as f64 * half).max(0.0);
    let samples: Vec<f64> = (0..=n).into_par_iter().map(|k| f(theta + k as f64 * half)).collect();
    let fine = gl_sum(&gl_weights(alpha, n), &samples, n, alpha, half);
    // coarse nodes t - j h are the fine nodes with the parity of n
    let coarse_samples: Vec<f64> = samples[n % 2..].iter().step_by(2).copied().collect();
    let coarse = gl_sum(&gl_weights(alpha, n / 2), &coarse_samples, n / 2, alpha, h);
    Ok(2.0 * fine - coarse)
}

/// Value, first and second derivative by central differences with one
/// Richardson step.
fn central_derivatives(f: impl Fn(f64) -> Result<Complex64>, x: f64) -> Result<[Complex64; 3]> {
    let d = FD_REL_STEP * x;
    let f0 = f(x)?;
    let (fp, fm) = (f(x + d)?, f(x - d)?);
    let (gp, gm) = (f(x + d / 2.0)?, f(x - d / 2.0)?);
    let d1 = |p: Complex64, m: Complex64, s: f64| (p - m) / (2.0 * s);
    let d2 = |p: Complex64, m: Complex64, s: f64| (p - 2.0 * f0 + m) / (s * s);
    let first = (4.0 * d1(gp, gm, d / 2.0) - d1(fp, fm, d)) / 3.0;
    let second = (4.0 * d2(gp, gm, d / 2.0) - d2(fp, fm, d)) / 3.0;
    Ok([f0, first, second])
}

/// `t^m (A x^d u_xx + B x^(d-1) u_x + C x^(d-2) u)` from the three x-derivatives.
fn spatial_operator(sol: &PdeSolution, x: f64, t: f64, [u, ux, uxx]: [Complex64; 3]) -> Complex64 {
    let p = &sol.problem;
    let inner = p.diffusion * x.powf(p.d) * uxx + p.drift * x.powf(p.d - 1.0) * ux + p.reaction * x.powf(p.d - 2.0) * u;
    inner * t.powi(p.m as i32)
}

/// Residual of the diffusion equation on `grid`. Closed-form and series
/// solutions are differentiated exactly in both variables; the H-function
/// form uses Grunwald-Letnikov with step `h` in `t` and central differences
/// in `x`.
pub fn residual_pde(sol: &PdeSolution, grid: &[(f64, f64)], h: f64) -> Result<ResidualReport> {
    if grid.is_empty() {
        return Err(Error::precondition("verify", "empty grid"));
    }
    if let Some(&(x, t)) = grid.iter().find(|(x, t)| !(*x > 0.0 && *t > 0.0)) {
        return Err(Error::OutOfDomain { module: "verify", x, t });
    }
    match &sol.repr {
        PdeRepr::ClosedFormExp {
            x_power,
            t_power,
            exp_scale,
            ..
        } => residual_closed_form(sol, grid, *x_power, *t_power, *exp_scale),
        PdeRepr::WrightSeriesForm { .. } | PdeRepr::D2Form { .. } => residual_series_form(sol, grid),
        PdeRepr::FoxHForm { .. } => residual_gl(sol, grid, h),
    }
}

fn residual_closed_form(
    sol: &PdeSolution,
    grid: &[(f64, f64)],
    xp: f64,
    tp: f64,
    kappa: f64,
) -> Result<ResidualReport> {
    let p = &sol.problem;
    if p.alpha != 1.0 {
        return Err(Error::precondition(
            "verify",
            "the closed form solves the alpha = 1 equation",
        ));
    }
    let r = 2.0 - p.d;
    let s = 1.0 + p.m as f64;
    let samples = grid
        .iter()
        .map(|&(x, t)| {
            let u = sol.evaluate(x, t)?;
            let e = kappa * x.powf(r) / t.powf(s);
            let u_t = u * (tp + s * e) / t;
            let g = (xp - r * e) / x;
            let u_x = u * g;
            let u_xx = u * (g * g + (-r * r * e - xp + r * e) / (x * x));
            Ok((x, Some(t), u_t, spatial_operator(sol, x, t, [u, u_x, u_xx])))
        })
        .collect::<Result<Vec<_>>>()?;
    ResidualReport::from_samples(Method::AnalyticDerivative, samples)
}

fn residual_series_form(sol: &PdeSolution, grid: &[(f64, f64)]) -> Result<ResidualReport> {
    let alpha = sol.problem.alpha;
    let samples = grid
        .par_iter()
        .map(|&(x, t)| {
            let members = sol
                .t_series(x, SERIES_ORDER)?
                .ok_or_else(|| Error::precondition("verify", "solution is not a series in t"))?;
            let lhs = members.iter().try_fold(Complex64::new(0.0, 0.0), |acc, s| {
                Ok::<_, Error>(acc + frac_series::eval_series(&s.rl_derivative(alpha)?, t)?)
            })?;
            let spatial = sol
                .t_series_x_derivatives(x, SERIES_ORDER)?
                .ok_or_else(|| Error::precondition("verify", "solution is not a series in t"))?;
            let mut derivs = [sol.evaluate(x, t)?, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
            for [_, ux, uxx] in &spatial {
                derivs[1] += frac_series::eval_series(ux, t)?;
                derivs[2] += frac_series::eval_series(uxx, t)?;
            }
            Ok((x, Some(t), lhs, spatial_operator(sol, x, t, derivs)))
        })
        .collect::<Result<Vec<_>>>()?;
    ResidualReport::from_samples(Method::TermwiseExact, samples)
}

fn residual_gl(sol: &PdeSolution, grid: &[(f64, f64)], h: f64) -> Result<ResidualReport> {
    let alpha = sol.problem.alpha;
    for &(_, t) in grid {
        check_step(t, h)?;
    }
    // Points sharing x and the offset t mod h share one lattice of samples.
    struct Lattice {
        x: f64,
        theta: f64,
        len: usize,
    }
    let mut lattices: Vec<Lattice> = Vec::new();
    let mut slot = Vec::with_capacity(grid.len());
    for &(x, t) in grid {
        let n = lattice_count(t, h);
        let theta = (t - n as f64 * h).max(0.0);
        let found = lattices
            .iter()
            .position(|l| l.x == x && (l.theta - theta).abs() <= 1e-9 * h);
        let idx = match found {
            Some(i) => i,
            None => {
                lattices.push(Lattice { x, theta, len: 0 });
                lattices.len() - 1
            }
        };
        lattices[idx].len = lattices[idx].len.max(n + 1);
        slot.push((idx, n));
    }
    let samples = lattices
        .iter()
        .map(|l| {
            (0..l.len)
                .into_par_iter()
                .map(|k| {
                    let t = l.theta + k as f64 * h;
                    // the H argument diverges as t -> 0+, where the solution vanishes
                    if t <= 1e-12 * h {
                        return Ok(0.0);
                    }
                    Ok(sol.evaluate_tol(l.x, t, GL_QUADRATURE_TOLERANCE)?.re)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let max_n = slot.iter().map(|s| s.1).max().unwrap_or(0);
    let weights = gl_weights(alpha, max_n);
    let points = grid
        .par_iter()
        .zip(&slot)
        .map(|(&(x, t), &(idx, n))| {
            let lhs = gl_sum(&weights, &samples[idx], n, alpha, h);
            let derivs = central_derivatives(|y| sol.evaluate_tol(y, t, FD_QUADRATURE_TOLERANCE), x)?;
            Ok((
                x,
                Some(t),
                Complex64::new(lhs, 0.0),
                spatial_operator(sol, x, t, derivs),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    ResidualReport::from_samples(Method::GrunwaldLetnikov, points)
}

/// `(z d/dz)^j y` for `j = 0..=n` by central differences in `u = ln z`, each
/// with one Richardson step.
fn euler_powers(f: impl Fn(f64) -> Result<Complex64>, z: f64, n: usize) -> Result<Vec<Complex64>> {
    let mut cache: Vec<(f64, Complex64)> = Vec::new();
    let mut g = |u: f64| -> Result<Complex64> {
        if let Some(&(_, v)) = cache.iter().find(|(w, _)| *w == u) {
            return Ok(v);
        }
        let v = f(z * u.exp())?;
        cache.push((u, v));
        Ok(v)
    };
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        if j == 0 {
            out.push(g(0.0)?);
            continue;
        }
        let mut diff = |step: f64| -> Result<Complex64> {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut binom = 1.0;
            for i in 0..=j {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * binom * g((j as f64 / 2.0 - i as f64) * step)?;
                binom = binom * (j - i) as f64 / (i + 1) as f64;
            }
            Ok(acc / step.powi(j as i32))
        };
        let coarse = diff(FD_REL_STEP)?;
        let fine = diff(FD_REL_STEP / 2.0)?;
        out.push((4.0 * fine - coarse) / 3.0);
    }
    Ok(out)
}

/// Residual of `D^alpha y = z^m P(z d/dz) y` at the points `zs`. Series
/// solutions are differentiated termwise; the H-function form uses
/// Grunwald-Letnikov with step `h` and finite differences for the Euler side.
pub fn residual_ode(sol: &OdeSolution, zs: &[f64], h: f64) -> Result<ResidualReport> {
    if zs.is_empty() {
        return Err(Error::precondition("verify", "empty grid"));
    }
    if let Some(&z) = zs.iter().find(|z| !(**z > 0.0)) {
        return Err(Error::OutOfDomain {
            module: "verify",
            x: z,
            t: 0.0,
        });
    }
    let p = &sol.problem;
    let op = p.operator()?;
    match &sol.branch {
        OdeBranch::LargeAlpha { members } => {
            let series = members
                .iter()
                .zip(&sol.constants)
                .map(|(mem, c)| {
                    let s = mem.series_scaled(mem.arg_scale, *c, SERIES_ORDER)?;
                    Ok((
                        frac_series::rl_derivative(&s, p.alpha)?,
                        frac_series::euler_apply(&op, &s),
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            let samples = zs
                .iter()
                .map(|&z| {
                    let mut lhs = Complex64::new(0.0, 0.0);
                    let mut rhs = Complex64::new(0.0, 0.0);
                    for (l, r) in &series {
                        lhs += frac_series::eval_series(l, z)?;
                        rhs += frac_series::eval_series(r, z)?;
                    }
                    Ok((z, None, lhs, rhs))
                })
                .collect::<Result<Vec<_>>>()?;
            ResidualReport::from_samples(Method::TermwiseExact, samples)
        }
        OdeBranch::SmallAlpha { .. } => {
            for &z in zs {
                check_step(z, h)?;
            }
            let samples = zs
                .par_iter()
                .map(|&z| {
                    let n = lattice_count(z, h);
                    let theta = (z - n as f64 * h).max(0.0);
                    let values = (0..=n)
                        .into_par_iter()
                        .map(|k| {
                            let y = theta + k as f64 * h;
                            if y <= 1e-12 * h {
                                return Ok(0.0);
                            }
                            Ok(sol.evaluate_tol(y, GL_QUADRATURE_TOLERANCE)?.re)
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    let lhs = gl_sum(&gl_weights(p.alpha, n), &values, n, p.alpha, h);
                    let powers = euler_powers(|y| sol.evaluate_tol(y, FD_QUADRATURE_TOLERANCE), z, p.order())?;
                    let rhs =
                        powers.iter().zip(&p.a_coeffs).map(|(v, a)| v * *a).sum::<Complex64>() * z.powi(p.m as i32);
                    Ok((z, None, Complex64::new(lhs, 0.0), rhs))
                })
                .collect::<Result<Vec<_>>>()?;
            ResidualReport::from_samples(Method::GrunwaldLetnikov, samples)
        }
    }
}

/// Coefficient residual of the diffusion equation for one member of a series
/// solution at fixed `x`: the termwise `D^alpha_t` image against
/// `t^m (A x^d u_xx + B x^(d-1) u_x + C x^(d-2) u)`, over `n_coeffs` exponents.
pub fn residual_pde_coefficients(sol: &PdeSolution, member: usize, x: f64, n_coeffs: usize) -> Result<ResidualReport> {
    if !(x > 0.0) {
        return Err(Error::OutOfDomain {
            module: "verify",
            x,
            t: 0.0,
        });
    }
    let series = sol
        .t_series_x_derivatives(x, n_coeffs + 2)?
        .ok_or_else(|| Error::precondition("verify", "solution is not a series in t"))?;
    let [u, ux, uxx] = series
        .get(member)
        .ok_or_else(|| Error::precondition("verify", format!("no member {member}")))?;
    let p = &sol.problem;
    let c = |v: f64| Complex64::new(v, 0.0);
    let spatial = uxx
        .scale(c(p.diffusion * x.powf(p.d)))
        .add(&ux.scale(c(p.drift * x.powf(p.d - 1.0))))?
        .add(&u.scale(c(p.reaction * x.powf(p.d - 2.0))))?;
    let rhs = FracPowerSeries::new(spatial.gamma0() + p.m as f64, spatial.rho(), spatial.coeffs().to_vec())?;
    let lhs = frac_series::rl_derivative(&u.clone().trim_leading_zeros(), p.alpha)?;
    compare_series(&lhs, &rhs, n_coeffs)
}

/// Compares two series coefficient by coefficient on their common exponent
/// lattice, reporting up to `n_coeffs` exponents.
pub fn compare_series(lhs: &FracPowerSeries, rhs: &FracPowerSeries, n_coeffs: usize) -> Result<ResidualReport> {
    let rho = lhs.rho();
    if (rho - rhs.rho()).abs() > EXPONENT_TOLERANCE * rho.max(1.0) {
        return Err(Error::ExponentMisalignment(format!(
            "exponent steps {} and {} differ",
            rho,
            rhs.rho()
        )));
    }
    let shift = (rhs.gamma0() - lhs.gamma0()) / rho;
    if (shift - shift.round()).abs() > 1e-9 {
        return Err(Error::ExponentMisalignment(format!(
            "leading exponents {} and {} are not on one lattice",
            lhs.gamma0(),
            rhs.gamma0()
        )));
    }
    let shift = shift.round() as i64;
    // positions on the union lattice, starting at the lower leading exponent
    let (off_l, off_r) = if shift >= 0 { (0, shift) } else { (-shift, 0) };
    let start = lhs.gamma0().min(rhs.gamma0());
    let zero = Complex64::new(0.0, 0.0);
    let pick = |s: &FracPowerSeries, q: i64| -> Option<Complex64> {
        if q < 0 {
            Some(zero)
        } else {
            s.coeffs().get(q as usize).copied()
        }
    };
    let mut samples = Vec::with_capacity(n_coeffs);
    for q in 0..n_coeffs as i64 {
        match (pick(lhs, q - off_l), pick(rhs, q - off_r)) {
            (Some(l), Some(r)) => samples.push((start + rho * q as f64, None, l, r)),
            _ => break,
        }
    }
    ResidualReport::from_samples(Method::TermwiseExact, samples)
}

/// Coefficient residual of `D^alpha u = op(u)` for a series solution member.
pub fn residual_ode_coefficients(
    member: &FracPowerSeries,
    op: &EulerPolynomialOperator,
    alpha: f64,
    n_coeffs: usize,
) -> Result<ResidualReport> {
    if member.len() < n_coeffs {
        return Err(Error::precondition(
            "verify",
            format!("series has {} coefficients, {} requested", member.len(), n_coeffs),
        ));
    }
    let lhs = frac_series::rl_derivative(member, alpha)?;
    let rhs = frac_series::euler_apply(op, member);
    compare_series(&lhs, &rhs, n_coeffs)
}

/// Operator identities for `H^{m,0}_{p,q}[a z^(-alpha_p)]` with last upper
/// parameter `(1, alpha_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HIdentity {
    /// `D^alpha` lowers the last upper shift to `1 - alpha` and multiplies by `z^-alpha`.
    RlDerivative { alpha: f64 },
    /// `(beta_j/alpha_p z d/dz + B_j)` raises lower shift `j` by one.
    EulerShift { index: usize },
}

fn h_value(spec: &HFunctionSpec, a: f64, z: f64, tol: f64) -> Result<f64> {
    let alpha_p = spec.upper().last().unwrap().1;
    fox_h::eval_mellin_barnes_tol(spec, a * z.powf(-alpha_p), tol)
}

/// Checks an H-function operator identity at the points `zs`. The fractional
/// derivative uses Grunwald-Letnikov with step `h` and one Richardson step.
pub fn h_operator_identity_check(
    spec: &HFunctionSpec,
    kind: HIdentity,
    a: f64,
    zs: &[f64],
    h: f64,
) -> Result<ResidualReport> {
    if spec.l() != 0 {
        return Err(Error::UnsupportedClass("operator identities need l = 0".into()));
    }
    let Some(&(last_a, alpha_p)) = spec.upper().last() else {
        return Err(Error::precondition(
            "verify",
            "spec needs an upper parameter (1, alpha_p)",
        ));
    };
    if last_a != 1.0 {
        return Err(Error::precondition("verify", "last upper parameter must have shift 1"));
    }
    if !(a > 0.0) {
        return Err(Error::precondition("verify", "argument scale a must be positive"));
    }
    let conv = spec.convergence_params();
    if !(conv.nu > 0.0) {
        return Err(Error::NonDecaying { nu: conv.nu });
    }
    if zs.is_empty() {
        return Err(Error::precondition("verify", "no evaluation points"));
    }
    match kind {
        HIdentity::RlDerivative { alpha } => {
            let mut upper = spec.upper().to_vec();
            upper.last_mut().unwrap().0 = 1.0 - alpha;
            let shifted = HFunctionSpec::new(spec.m(), 0, upper, spec.lower().to_vec())?;
            let samples = zs
                .iter()
                .map(|&z| {
                    // nu > 0 and a > 0: the argument diverges and H vanishes as z -> 0+
                    let f = |s: f64| {
                        if s <= 0.0 {
                            0.0
                        } else {
                            h_value(spec, a, s, GL_QUADRATURE_TOLERANCE).unwrap_or(f64::NAN)
                        }
                    };
                    let lhs = gl_richardson(f, alpha, z, h)?;
                    if lhs.is_nan() {
                        return Err(Error::QuadratureFailure { last_change: f64::NAN });
                    }
                    let rhs = z.powf(-alpha) * h_value(&shifted, a, z, fox_h::QUADRATURE_TOLERANCE)?;
                    Ok((z, None, Complex64::new(lhs, 0.0), Complex64::new(rhs, 0.0)))
                })
                .collect::<Result<Vec<_>>>()?;
            ResidualReport::from_samples(Method::GrunwaldLetnikov, samples)
        }
        HIdentity::EulerShift { index } => {
            if index >= spec.m() {
                return Err(Error::precondition(
                    "verify",
                    "the shifted lower parameter must be among the first m",
                ));
            }
            let (b, beta) = spec.lower()[index];
            let mut lower = spec.lower().to_vec();
            lower[index].0 = b + 1.0;
            let shifted = HFunctionSpec::new(spec.m(), 0, spec.upper().to_vec(), lower)?;
            let samples = zs
                .iter()
                .map(|&z| {
                    let f = |s: f64| Ok(Complex64::new(h_value(spec, a, s, FD_QUADRATURE_TOLERANCE)?, 0.0));
                    let [v, dv, _] = central_derivatives(f, z)?;
                    let lhs = beta / alpha_p * z * dv + b * v;
                    let rhs = h_value(&shifted, a, z, fox_h::QUADRATURE_TOLERANCE)?;
                    Ok((z, None, lhs, Complex64::new(rhs, 0.0)))
                })
                .collect::<Result<Vec<_>>>()?;
            ResidualReport::from_samples(Method::FiniteDifference, samples)
        }
    }
}

/// Operator identities for generalized Wright functions, checked on coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WrightIdentity {
    /// `D^alpha (z^(B_1-1) Psi(a z^beta_1))` for upper `(1, 1)` first.
    RlDerivative { alpha: f64 },
    /// `(z d/dz / alpha + R)(z^(A_1 sigma/alpha_1 - alpha R) Psi(a z^sigma))`.
    EulerPlusR { alpha: f64, r: f64, sigma: f64 },
}

fn wright_series(
    spec: &WrightSpec,
    a: f64,
    gamma0: f64,
    rho: f64,
    factor: Complex64,
    n: usize,
) -> Result<FracPowerSeries> {
    let arg = Complex64::new(a, 0.0);
    let coeffs = (0..n)
        .map(|k| Ok(spec.term(k, arg)? * factor))
        .collect::<Result<Vec<_>>>()?;
    FracPowerSeries::new(gamma0, rho, coeffs)
}

fn real_shift(p: &WrightParam, what: &str) -> Result<f64> {
    if p.shift.im != 0.0 {
        return Err(Error::precondition("verify", format!("{what} must have a real shift")));
    }
    Ok(p.shift.re)
}

/// Checks a Wright-function operator identity on the first `n_coeffs`
/// coefficients of both sides.
pub fn wright_operator_identity_check(
    spec: &WrightSpec,
    kind: WrightIdentity,
    a: f64,
    n_coeffs: usize,
) -> Result<ResidualReport> {
    if spec.p() == 0 || spec.q() == 0 {
        return Err(Error::precondition(
            "verify",
            "need at least one upper and one lower parameter",
        ));
    }
    if !spec.convergence().is_entire() && spec.delta() <= -1.0 {
        return Err(Error::precondition("verify", "Delta must exceed -1"));
    }
    let one = Complex64::new(1.0, 0.0);
    match kind {
        WrightIdentity::RlDerivative { alpha } => {
            let first = spec.upper()[0];
            if first.shift != one || first.scale != 1.0 {
                return Err(Error::precondition("verify", "first upper parameter must be (1, 1)"));
            }
            let b1 = real_shift(&spec.lower()[0], "first lower parameter")?;
            let beta1 = spec.lower()[0].scale;
            if !(beta1 > 0.0 && b1 > 0.0) {
                return Err(Error::precondition("verify", "need beta_1 > 0 and B_1 > 0"));
            }
            let u = wright_series(spec, a, b1 - 1.0, beta1, one, n_coeffs)?;
            let lhs = frac_series::rl_derivative(&u, alpha)?;
            // skip leading powers in the kernel of D^alpha
            let mut m = 0u32;
            loop {
                let v = b1 + m as f64 * beta1 - alpha - 1.0;
                let neg_int = v < -0.5 && (v - v.round()).abs() <= EXPONENT_TOLERANCE * (1.0 + alpha);
                if !neg_int {
                    break;
                }
                m += 1;
            }
            let mf = m as f64;
            let mut upper = vec![first];
            upper.extend(
                spec.upper()[1..]
                    .iter()
                    .map(|p| WrightParam::new(p.shift + mf * p.scale, p.scale)),
            );
            let mut lower = vec![WrightParam::real(b1 + mf * beta1 - alpha, beta1)];
            lower.extend(
                spec.lower()[1..]
                    .iter()
                    .map(|p| WrightParam::new(p.shift + mf * p.scale, p.scale)),
            );
            let shifted = WrightSpec::new(upper, lower)?;
            let factor = Complex64::new(a.powi(m as i32), 0.0);
            let rhs = wright_series(&shifted, a, b1 + mf * beta1 - 1.0 - alpha, beta1, factor, n_coeffs)?;
            compare_series(&lhs, &rhs, n_coeffs)
        }
        WrightIdentity::EulerPlusR { alpha, r, sigma } => {
            if !(sigma > 0.0) {
                return Err(Error::precondition(
                    "verify",
                    "sigma must be positive for a power series in z",
                ));
            }
            if !(alpha > 0.0) {
                return Err(Error::precondition("verify", "alpha must be positive"));
            }
            let first = spec.upper()[0];
            let a1 = real_shift(&first, "first upper parameter")?;
            let gamma0 = a1 * sigma / first.scale - alpha * r;
            let u = wright_series(spec, a, gamma0, sigma, one, n_coeffs)?;
            let op = EulerPolynomialOperator::from_coefficients(vec![r, 1.0 / alpha], 0)?;
            let lhs = frac_series::euler_apply(&op, &u);
            let mut upper = spec.upper().to_vec();
            upper[0] = WrightParam::real(a1 + 1.0, first.scale);
            let shifted = WrightSpec::new(upper, spec.lower().to_vec())?;
            let factor = Complex64::new(sigma / (first.scale * alpha), 0.0);
            let rhs = wright_series(&shifted, a, gamma0, sigma, factor, n_coeffs)?;
            compare_series(&lhs, &rhs, n_coeffs)
        }
    }
}

/// Seeded draws of the gamma product identity with `a` in `(0, 5]`,
/// `m` in `1..=5` and `b` in `[-3, 3]`, skipping draws within `1e-6` of a
/// gamma pole. Both sides are reported divided by `|lhs|` so that huge gamma
/// values stay representable; `x` is the draw index.
pub fn lemma1_suite(n: usize, seed: u64) -> Result<ResidualReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let near_pole = |x: f64| x <= 0.5 && (x - x.round()).abs() < 1e-6;
    let mut samples = Vec::with_capacity(n);
    while samples.len() < n {
        let a = 5.0 * (1.0 - rng.random::<f64>());
        let m = rng.random_range(1..=5u32);
        let b = rng.random_range(-3.0..=3.0);
        let mut args = vec![1.0 + a * b, 1.0 + a * b + m as f64];
        for i in 1..=m {
            args.push(i as f64 / a + b);
            args.push(i as f64 / a + b + 1.0);
        }
        if args.into_iter().any(near_pole) {
            continue;
        }
        let (ll, lr) = frac_series::gamma_product_identity_log(a, m, Complex64::new(b, 0.0))?;
        let norm = ll.re;
        samples.push((samples.len() as f64, None, (ll - norm).exp(), (lr - norm).exp()));
    }
    ResidualReport::from_samples(Method::TermwiseExact, samples)
}

/// Parameters of the case-1 test family: `A = 1`, `B = C = d = a = 0`.
pub fn case1_family_spec(alpha: f64, m: u32) -> Result<HFunctionSpec> {
    let w = alpha + m as f64;
    let mut lower = vec![(0.0, 1.0), (0.5, 1.0)];
    lower.extend((1..=m).map(|j| (j as f64 / w, 1.0)));
    HFunctionSpec::new(lower.len(), 0, vec![(1.0, w)], lower)
}

/// Argument inversion, power scaling, power shifting and Gauss multiplication
/// contracts on the case-1 family, `alpha in {0.5, 0.8, 1.5}`, `m in {0, 1, 2}`,
/// at `z in {0.5, 1, 2, 5}`. Each contract compares two quadratures.
pub fn h_transform_suite() -> Result<ResidualReport> {
    let mut jobs: Vec<(HFunctionSpec, f64)> = Vec::new();
    for alpha in [0.5, 0.8, 1.5] {
        for m in 0..=2 {
            let spec = case1_family_spec(alpha, m)?;
            for z in [0.5, 1.0, 2.0, 5.0] {
                jobs.push((spec.clone(), z));
            }
        }
    }
    let rows = jobs
        .par_iter()
        .map(|(spec, z)| {
            let z = *z;
            let base = spec.eval(z)?;
            let mut out = Vec::new();
            let inv = fox_h::invert_argument(spec);
            out.push((base, inv.eval(1.0 / z)?));
            for k in [0.5, 2.0, 3.0] {
                out.push((base, k * fox_h::power_scale(spec, k)?.eval(z.powf(k))?));
            }
            for sigma in [-1.0, 0.5, 2.0] {
                out.push((z.powf(sigma) * base, fox_h::shift_by_power(spec, sigma).eval(z)?));
            }
            for r in [1, 2] {
                let (full, g) = fox_h::gauss_multiplication_expand(spec, r)?;
                out.push((full.eval(z)?, g.scale * spec.eval(g.arg_multiplier * z)?));
            }
            Ok(out
                .into_iter()
                .map(|(l, r)| (z, None, Complex64::new(l, 0.0), Complex64::new(r, 0.0)))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    ResidualReport::from_samples(Method::TermwiseExact, rows.into_iter().flatten().collect())
}

/// `E_{1,1}(x) = e^x` on 101 points of `[-5, 5]` and `E_{2,1}(x^2) = cosh x`
/// on 101 points of `[0, 3]`.
pub fn wright_reduction_suite() -> Result<ResidualReport> {
    let mut samples = Vec::with_capacity(202);
    for i in 0..=100 {
        let x = -5.0 + 0.1 * i as f64;
        let v = crate::wright::mittag_leffler(1.0, 1.0, Complex64::new(x, 0.0))?;
        samples.push((x, None, v, Complex64::new(x.exp(), 0.0)));
    }
    for i in 0..=100 {
        let x = 0.03 * i as f64;
        let v = crate::wright::mittag_leffler(2.0, 1.0, Complex64::new(x * x, 0.0))?;
        samples.push((x, None, v, Complex64::new(x.cosh(), 0.0)));
    }
    ResidualReport::from_samples(Method::TermwiseExact, samples)
}

/// Seeded random diffusion problems: the characteristic roots of the reduced
/// equation against the closed-form `s_1, s_2`. The error is relative to
/// `max(|s|, 1)`; `x` is the draw index.
pub fn reduction_suite(n: usize, seed: u64) -> Result<ResidualReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(2 * n);
    let mut drawn = 0;
    while drawn < n {
        let alpha = rng.random_range(0.1..=5.0);
        let m = rng.random_range(0..=3u32);
        let d = rng.random_range(-3.0..=5.0);
        if (d - 2.0f64).abs() < 0.05 {
            continue;
        }
        let p = DiffusionProblem::new(
            alpha,
            m,
            d,
            rng.random_range(0.1..=5.0),
            rng.random_range(-3.0..=3.0),
            rng.random_range(-3.0..=3.0),
            rng.random_range(-2.0..=2.0),
        )?;
        let (s1, s2) = solver_pde::s_roots(&p)?;
        let ode = solver_pde::similarity_reduce(&p)?;
        let roots = solver_ode::characteristic_poly(&ode)?.roots;
        // pair the two root sets the cheaper way round
        let (r1, r2) =
            if (roots[0] - s1).norm() + (roots[1] - s2).norm() <= (roots[0] - s2).norm() + (roots[1] - s1).norm() {
                (roots[0], roots[1])
            } else {
                (roots[1], roots[0])
            };
        for (s, r) in [(s1, r1), (s2, r2)] {
            // relative to max(|s|, 1)
            let scale = s.norm().max(1.0);
            samples.push((drawn as f64, None, s / scale, r / scale));
        }
        drawn += 1;
    }
    ResidualReport::from_samples(Method::TermwiseExact, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver_pde::{corollary_alpha1, Branch};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn gl_examples() {
        let d = gl_fractional_derivative(|z| z * z, 1.0, 1.0, 1e-4).unwrap();
        assert!((d - 2.0).abs() <= 2e-4);
        let d = gl_fractional_derivative(f64::sqrt, 0.5, 1.0, 1e-4).unwrap();
        assert!((d - PI.sqrt() / 2.0).abs() <= 1e-3);
        let d = gl_fractional_derivative(|_| 1.0, 0.5, 1.0, 1e-4).unwrap();
        assert!((d - 1.0 / PI.sqrt()).abs() <= 1e-3);
    }

    #[test]
    fn gl_rejects_coarse_steps() {
        assert_eq!(
            gl_fractional_derivative(|z| z, 0.5, 1.0, 0.1),
            Err(Error::StepTooLarge { h: 0.1, t: 1.0 })
        );
    }

    #[test]
    fn gl_is_first_order() {
        let err = |h: f64| (gl_fractional_derivative(|z| z * z, 1.0, 1.0, h).unwrap() - 2.0).abs();
        let ratio = err(1e-3) / err(5e-4);
        assert!((ratio - 2.0).abs() <= 0.4, "ratio {ratio}");
    }

    #[test]
    fn gl_richardson_gains_an_order() {
        // D^0.5 z^3 = Gamma(4)/Gamma(3.5) z^2.5
        let exact = 6.0 / crate::gamma::gamma(Complex64::new(3.5, 0.0)).unwrap().re;
        let plain = gl_fractional_derivative(|z| z.powi(3), 0.5, 1.0, 1e-3).unwrap();
        let rich = gl_richardson(|z| z.powi(3), 0.5, 1.0, 1e-3).unwrap();
        assert!((rich - exact).abs() < 0.05 * (plain - exact).abs());
        // t off the h/2 lattice and an odd fine count
        let t = 1.00033f64;
        let rich = gl_richardson(|z| z.powi(3), 0.5, t, 1e-3).unwrap();
        assert!((rich - exact * t.powf(2.5)).abs() < 1e-5);
    }

    #[test]
    fn report_excludes_negligible_points() {
        let c = |v: f64| Complex64::new(v, 0.0);
        let r = ResidualReport::from_samples(
            Method::TermwiseExact,
            vec![(1.0, None, c(1.0), c(1.0 + 1e-9)), (2.0, None, c(1e-20), c(2e-20))],
        )
        .unwrap();
        assert!(r.points[1].excluded);
        assert!(r.max_rel_err < 2e-9);
        assert!(ResidualReport::from_samples(Method::TermwiseExact, vec![]).is_err());
    }

    #[test]
    fn zero_report_has_zero_error() {
        let z = Complex64::new(0.0, 0.0);
        let r = ResidualReport::from_samples(Method::TermwiseExact, vec![(1.0, None, z, z)]).unwrap();
        assert_eq!(r.max_rel_err, 0.0);
    }

    #[test]
    fn heat_kernel_exact_residual_is_h_independent() {
        let p = DiffusionProblem::new(1.0, 0, 0.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        let sol = corollary_alpha1(&p, Branch::Plus).unwrap();
        let grid: Vec<(f64, f64)> = (0..5)
            .flat_map(|i| (0..5).map(move |j| (0.5 + 0.375 * i as f64, 0.5 + 0.375 * j as f64)))
            .collect();
        let a = residual_pde(&sol, &grid, 1e-4).unwrap();
        let b = residual_pde(&sol, &grid, 1e-3).unwrap();
        assert_eq!(a, b);
        assert!(a.max_rel_err < 1e-8);
        assert_eq!(a.method, Method::AnalyticDerivative);
    }

    #[test]
    fn zero_solution_has_zero_residual() {
        let p = DiffusionProblem::new(1.0, 0, 0.0, 1.0, 0.0, 0.0, 0.0)
            .unwrap()
            .with_constants(vec![Complex64::new(0.0, 0.0)]);
        let sol = corollary_alpha1(&p, Branch::Plus).unwrap();
        let r = residual_pde(&sol, &[(1.0, 1.0), (1.5, 0.7)], 1e-4).unwrap();
        assert_eq!(r.max_rel_err, 0.0);
        assert!(r.points.iter().all(|p| p.abs_err == 0.0));
    }

    #[test]
    fn misaligned_series_are_rejected() {
        let c = Complex64::new(1.0, 0.0);
        let a = FracPowerSeries::new(0.0, 1.0, vec![c; 3]).unwrap();
        let b = FracPowerSeries::new(0.5, 1.0, vec![c; 3]).unwrap();
        assert!(matches!(compare_series(&a, &b, 3), Err(Error::ExponentMisalignment(_))));
    }

    #[test]
    fn wright_euler_identity_on_exponential() {
        // 1Psi1[(1,1);(1,1)] is exp; sigma = alpha = alpha_1 = 1, R = 0
        let spec = WrightSpec::real(&[(1.0, 1.0)], &[(1.0, 1.0)]).unwrap();
        let kind = WrightIdentity::EulerPlusR {
            alpha: 1.0,
            r: 0.0,
            sigma: 1.0,
        };
        let r = wright_operator_identity_check(&spec, kind, 1.0, 20).unwrap();
        assert!(r.max_rel_err < 1e-13);
        // z e^z has coefficient 1/(k-1)! at z^k; z d/dz gives k/(k-1)!
        assert_eq!(r.points[3].x, 4.0);
        assert_relative_eq!(r.points[3].lhs.re, 4.0 / 6.0, max_relative = 1e-14);
    }

    #[test]
    fn wright_rl_identity_half_order() {
        let spec = WrightSpec::real(&[(1.0, 1.0), (0.3, 0.7)], &[(1.4, 0.9), (0.6, 1.2)]).unwrap();
        let r = wright_operator_identity_check(&spec, WrightIdentity::RlDerivative { alpha: 0.5 }, 0.8, 20).unwrap();
        assert!(r.max_rel_err < 1e-10, "{}", r.max_rel_err);
        let r = wright_operator_identity_check(&spec, WrightIdentity::RlDerivative { alpha: 1.0 }, 0.8, 20).unwrap();
        assert!(r.max_rel_err < 1e-12);
    }

    #[test]
    fn wright_rl_identity_with_kernel_shift() {
        // B_1 - 1 - alpha = -1: the leading power is in the kernel, m = 1
        let spec = WrightSpec::real(&[(1.0, 1.0)], &[(0.5, 1.5)]).unwrap();
        let r = wright_operator_identity_check(&spec, WrightIdentity::RlDerivative { alpha: 0.5 }, 1.3, 20).unwrap();
        assert_eq!(r.points[0].lhs, Complex64::new(0.0, 0.0));
        assert!(r.max_rel_err < 1e-10);
    }

    #[test]
    fn wright_rl_identity_preconditions() {
        let spec = WrightSpec::real(&[(0.5, 1.0)], &[(1.0, 1.0)]).unwrap();
        let e = wright_operator_identity_check(&spec, WrightIdentity::RlDerivative { alpha: 0.5 }, 1.0, 5);
        assert!(matches!(e, Err(Error::PreconditionViolation { .. })));
    }

    #[test]
    fn ode_small_alpha_gl_residual() {
        let p = solver_ode::OdeProblem::new(0.5, 0, vec![0.0, 1.0]).unwrap();
        let sol = solver_ode::solve(&p).unwrap();
        let r = residual_ode(&sol, &[0.5, 1.0, 1.5], 1e-4).unwrap();
        assert!(r.max_rel_err <= 1e-3, "{}", r.max_rel_err);
        assert_eq!(r.method, Method::GrunwaldLetnikov);
    }

    #[test]
    fn ode_large_alpha_termwise_residual() {
        let p = solver_ode::OdeProblem::new(2.5, 1, vec![0.1, 0.5, 1.0]).unwrap();
        let sol = solver_ode::solve(&p).unwrap();
        let r = residual_ode(&sol, &[0.3, 1.0, 2.0], 1e-4).unwrap();
        assert!(r.max_rel_err < 1e-10, "{}", r.max_rel_err);
    }

    #[test]
    fn euler_powers_on_a_monomial() {
        let v = euler_powers(|z| Ok(Complex64::new(z.powf(1.5), 0.0)), 2.0, 3).unwrap();
        for (j, x) in v.iter().enumerate() {
            assert_relative_eq!(x.re, 1.5f64.powi(j as i32) * 2f64.powf(1.5), max_relative = 1e-7);
        }
    }

    #[test]
    fn wright_series_pde_residual_is_exact() {
        let p = DiffusionProblem::new(2.5, 1, 1.0, 1.0, 0.5, 0.1, 0.0).unwrap();
        let sol = solver_pde::solve(&p).unwrap();
        let grid: Vec<(f64, f64)> = [0.5, 1.0, 2.0]
            .iter()
            .flat_map(|&x| [0.5, 1.0, 2.0].map(|t| (x, t)))
            .collect();
        let r = residual_pde(&sol, &grid, 1e-4).unwrap();
        assert_eq!(r.method, Method::TermwiseExact);
        assert!(r.max_rel_err < 1e-11, "{}", r.max_rel_err);
    }

    #[test]
    fn pde_member_coefficients_match() {
        let p = DiffusionProblem::new(2.5, 1, 1.0, 1.0, 0.5, 0.1, 0.0).unwrap();
        let sol = solver_pde::solve(&p).unwrap();
        for k in 0..3 {
            let r = residual_pde_coefficients(&sol, k, 1.3, 20).unwrap();
            assert_eq!(r.points.len(), 20);
            assert!(r.max_rel_err < 1e-10, "member {k}: {}", r.max_rel_err);
        }
        assert!(residual_pde_coefficients(&sol, 3, 1.3, 20).is_err());
    }
}
