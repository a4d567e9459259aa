//! Generalized Wright function
//!
//! ```text
//! pPsi_q[z | (a_i, alpha_i)_{1..p}; (b_j, beta_j)_{1..q}]
//!     = sum_k  prod Gamma(a_i + alpha_i k) / prod Gamma(b_j + beta_j k) * z^k / k!
//! ```
//!
//! evaluated by direct summation of the series. Coefficients are formed in
//! log space; lower-parameter poles make the corresponding term vanish.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::{ln_gamma_unchecked, ln_rgamma, ComplexPoint, POLE_TOLERANCE};
use crate::sum::CompensatedSum;

/// Relative size below which a term counts as negligible.
pub const TERM_TOLERANCE: f64 = 1e-15;
/// Hard cap on the number of series terms.
pub const MAX_TERMS: usize = 500;

/// One `(shift, scale)` parameter pair. The shift may be complex, the scale
/// is real and non-zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "ParamRepr", from = "ParamRepr")]
pub struct WrightParam {
    pub shift: Complex64,
    pub scale: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ParamRepr {
    Real(f64, f64),
    Complex([f64; 2], f64),
}

impl From<WrightParam> for ParamRepr {
    fn from(p: WrightParam) -> Self {
        if p.shift.im == 0.0 {
            ParamRepr::Real(p.shift.re, p.scale)
        } else {
            ParamRepr::Complex([p.shift.re, p.shift.im], p.scale)
        }
    }
}

impl From<ParamRepr> for WrightParam {
    fn from(r: ParamRepr) -> Self {
        match r {
            ParamRepr::Real(a, s) => WrightParam::real(a, s),
            ParamRepr::Complex([re, im], s) => WrightParam::new(Complex64::new(re, im), s),
        }
    }
}

impl WrightParam {
    pub fn new(shift: Complex64, scale: f64) -> Self {
        Self { shift, scale }
    }

    pub fn real(shift: f64, scale: f64) -> Self {
        Self::new(Complex64::new(shift, 0.0), scale)
    }

    #[inline]
    fn at(&self, k: f64) -> Complex64 {
        self.shift + self.scale * k
    }
}

/// Parameter set of a `pPsi_q` function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWrightSpec")]
pub struct WrightSpec {
    upper: Vec<WrightParam>,
    lower: Vec<WrightParam>,
}

#[derive(Deserialize)]
struct RawWrightSpec {
    #[serde(default)]
    upper: Vec<WrightParam>,
    #[serde(default)]
    lower: Vec<WrightParam>,
}

impl TryFrom<RawWrightSpec> for WrightSpec {
    type Error = Error;

    fn try_from(raw: RawWrightSpec) -> Result<Self> {
        WrightSpec::new(raw.upper, raw.lower)
    }
}

/// Outcome of the convergence test for a Wright series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceVerdict {
    /// `sum beta_j - sum alpha_i`
    pub delta: f64,
    /// Radius of absolute convergence: infinite for `delta > -1`, zero for
    /// `delta < -1`.
    pub radius: f64,
}

impl ConvergenceVerdict {
    pub fn is_entire(&self) -> bool {
        self.radius == f64::INFINITY
    }

    pub fn convergent_at(&self, z: ComplexPoint) -> bool {
        z == Complex64::new(0.0, 0.0) || z.norm() < self.radius
    }
}

impl WrightSpec {
    /// Builds a spec, rejecting zero or non-finite scales and non-finite shifts.
    pub fn new(upper: Vec<WrightParam>, lower: Vec<WrightParam>) -> Result<Self> {
        for p in upper.iter().chain(lower.iter()) {
            if p.scale == 0.0 || !p.scale.is_finite() {
                return Err(Error::invalid("wright", "scale parameters must be finite and non-zero"));
            }
            if !(p.shift.re.is_finite() && p.shift.im.is_finite()) {
                return Err(Error::invalid("wright", "shift parameters must be finite"));
            }
        }
        Ok(Self { upper, lower })
    }

    /// Convenience constructor for real parameters.
    pub fn real(upper: &[(f64, f64)], lower: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            upper.iter().map(|&(a, s)| WrightParam::real(a, s)).collect(),
            lower.iter().map(|&(b, s)| WrightParam::real(b, s)).collect(),
        )
    }

    /// Skips the non-zero scale check. Used for the classical Wright function
    /// with `alpha = 0`, whose series is still well defined.
    pub(crate) fn new_unchecked(upper: Vec<WrightParam>, lower: Vec<WrightParam>) -> Self {
        Self { upper, lower }
    }

    pub fn upper(&self) -> &[WrightParam] {
        &self.upper
    }

    pub fn lower(&self) -> &[WrightParam] {
        &self.lower
    }

    pub fn p(&self) -> usize {
        self.upper.len()
    }

    pub fn q(&self) -> usize {
        self.lower.len()
    }

    pub fn delta(&self) -> f64 {
        self.lower.iter().map(|b| b.scale).sum::<f64>() - self.upper.iter().map(|a| a.scale).sum::<f64>()
    }

    pub fn convergence(&self) -> ConvergenceVerdict {
        convergence(self)
    }

    /// Log of the k-th coefficient `prod Gamma(a_i + alpha_i k) / prod Gamma(b_j + beta_j k) / k!`.
    /// Returns `Ok(None)` when a lower gamma sits on a pole (coefficient zero).
    pub fn log_coefficient(&self, k: usize) -> Result<Option<Complex64>> {
        let kf = k as f64;
        let mut acc = -ln_gamma_unchecked(Complex64::new(kf + 1.0, 0.0));
        for a in &self.upper {
            let arg = a.at(kf);
            if arg.im.abs() < POLE_TOLERANCE && arg.re <= 0.5 {
                let n = arg.re.round();
                if n <= 0.0 && (arg.re - n).abs() < POLE_TOLERANCE {
                    return Err(Error::Pole { re: arg.re, im: arg.im });
                }
            }
            acc += ln_gamma_unchecked(arg);
        }
        for b in &self.lower {
            match ln_rgamma(b.at(kf)) {
                Some(v) => acc += v,
                None => return Ok(None),
            }
        }
        Ok(Some(acc))
    }

    /// k-th series coefficient (the factor multiplying `z^k`).
    pub fn coefficient(&self, k: usize) -> Result<Complex64> {
        Ok(self.log_coefficient(k)?.map_or(Complex64::new(0.0, 0.0), |l| l.exp()))
    }

    /// k-th term of the series at `z`.
    pub fn term(&self, k: usize, z: ComplexPoint) -> Result<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        let Some(lc) = self.log_coefficient(k)? else {
            return Ok(zero);
        };
        if k == 0 {
            return Ok(lc.exp());
        }
        if z == zero {
            return Ok(zero);
        }
        Ok((lc + (k as f64) * z.ln()).exp())
    }

    pub fn eval(&self, z: ComplexPoint) -> Result<ComplexPoint> {
        eval(self, z)
    }
}

/// Delta and radius of convergence of the series.
///
/// `delta` is compared against -1 with an absolute slack of 1e-12 so that
/// parameter sets built from decimal inputs land on the boundary case.
pub fn convergence(spec: &WrightSpec) -> ConvergenceVerdict {
    let delta = spec.delta();
    let radius = if (delta + 1.0).abs() <= 1e-12 {
        let up: f64 = spec.upper.iter().map(|a| a.scale.abs().powf(-a.scale)).product();
        let lo: f64 = spec.lower.iter().map(|b| b.scale.abs().powf(b.scale)).product();
        up * lo
    } else if delta > -1.0 {
        f64::INFINITY
    } else {
        0.0
    };
    ConvergenceVerdict { delta, radius }
}

/// Sums the series with compensated summation until three consecutive terms
/// fall below `1e-15` of the partial sum.
pub fn eval(spec: &WrightSpec, z: ComplexPoint) -> Result<ComplexPoint> {
    let v = eval_sum(spec, z)?;
    // terms at negative real z go through ln z = ln|z| + i pi and pick up rounding in im
    let real = z.im == 0.0 && spec.upper.iter().chain(&spec.lower).all(|p| p.shift.im == 0.0);
    Ok(if real { Complex64::new(v.re, 0.0) } else { v })
}

fn eval_sum(spec: &WrightSpec, z: ComplexPoint) -> Result<ComplexPoint> {
    let verdict = convergence(spec);
    if !verdict.convergent_at(z) {
        return Err(Error::DivergentInput {
            modulus: z.norm(),
            radius: verdict.radius,
        });
    }
    if z == Complex64::new(0.0, 0.0) {
        return spec.term(0, z);
    }
    let mut sum = CompensatedSum::new();
    let mut small_run = 0;
    let mut last = Complex64::new(0.0, 0.0);
    for k in 0..MAX_TERMS {
        let t = spec.term(k, z)?;
        if !(t.re.is_finite() && t.im.is_finite()) {
            return Err(Error::NoConvergence {
                module: "wright",
                terms: k,
            });
        }
        sum.add(t);
        last = t;
        if t.norm() < TERM_TOLERANCE * sum.value().norm() {
            small_run += 1;
            if small_run == 3 {
                return Ok(sum.value());
            }
        } else {
            small_run = 0;
        }
    }
    let partial = sum.value();
    if last.norm() <= 1e-12 * partial.norm() {
        Ok(partial)
    } else {
        Err(Error::NoConvergence {
            module: "wright",
            terms: MAX_TERMS,
        })
    }
}

/// Mittag-Leffler function `E_{alpha,beta}(z) = 1Psi1[z | (1,1); (beta, alpha)]`.
pub fn mittag_leffler(alpha: f64, beta: f64, z: ComplexPoint) -> Result<ComplexPoint> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("wright", "Mittag-Leffler order alpha must be positive"));
    }
    let spec = WrightSpec::real(&[(1.0, 1.0)], &[(beta, alpha)])?;
    eval(&spec, z)
}

/// Classical Wright function with the sum starting at k = 1:
/// `Psi(z; alpha, beta) = sum_{k>=1} z^k / (k! Gamma(alpha k + beta))`,
/// i.e. `0Psi1[z | -; (beta, alpha)] - 1/Gamma(beta)`.
pub fn classical_wright(z: ComplexPoint, alpha: f64, beta: f64) -> Result<ComplexPoint> {
    if !(alpha > -1.0) {
        return Err(Error::invalid("wright", "classical Wright function needs alpha > -1"));
    }
    let spec = WrightSpec::new_unchecked(vec![], vec![WrightParam::real(beta, alpha)]);
    let full = eval(&spec, z)?;
    Ok(full - spec.term(0, z)?)
}
