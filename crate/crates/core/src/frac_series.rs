//! Generalized power series `sum_j c_j z^(gamma0 + rho j)` and exact operator
//! calculus on them.
//!
//! Riemann-Liouville differentiation and Euler-type operators both act
//! diagonally on powers of `z`, so applying them to a series only rescales
//! coefficients and shifts the exponent lattice. This is how the solution
//! formulas are checked against their differential equations without any
//! discretisation error.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::{gamma_ratio_complex, ln_gamma, ComplexPoint};
use crate::poly;
use crate::sum::CompensatedSum;

/// Truncation order used when series are built for coefficient checks.
pub const VERIFY_ORDER: usize = 50;
/// Truncation order used when series are built for point evaluation.
pub const EVAL_ORDER: usize = 200;
/// Two exponents closer than this are treated as the same power.
pub const EXPONENT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FracPowerSeries {
    gamma0: f64,
    rho: f64,
    coeffs: Vec<Complex64>,
}

impl FracPowerSeries {
    pub fn new(gamma0: f64, rho: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() || !gamma0.is_finite() {
            return Err(Error::invalid(
                "frac_series",
                "exponent step must be positive and exponents finite",
            ));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::invalid("frac_series", "coefficients must be finite"));
        }
        Ok(Self { gamma0, rho, coeffs })
    }

    /// Single power `c z^p`.
    pub fn monomial(c: Complex64, p: f64) -> Result<Self> {
        Self::new(p, 1.0, vec![c])
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn exponent(&self, j: usize) -> f64 {
        self.gamma0 + self.rho * j as f64
    }

    /// Drops exactly-zero leading coefficients, advancing `gamma0`.
    pub fn trim_leading_zeros(mut self) -> Self {
        let lead = self
            .coeffs
            .iter()
            .position(|c| c.re != 0.0 || c.im != 0.0)
            .unwrap_or(self.coeffs.len());
        if lead > 0 && lead < self.coeffs.len() {
            self.gamma0 += self.rho * lead as f64;
            self.coeffs.drain(..lead);
        }
        self
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self {
            gamma0: self.gamma0,
            rho: self.rho,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// Termwise sum of two series on the same lattice.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.rho - other.rho).abs() > EXPONENT_TOLERANCE || (self.gamma0 - other.gamma0).abs() > EXPONENT_TOLERANCE
        {
            return Err(Error::ExponentMisalignment(
                "series live on different exponent lattices".into(),
            ));
        }
        let n = self.len().max(other.len());
        let zero = Complex64::new(0.0, 0.0);
        let coeffs = (0..n)
            .map(|j| self.coeffs.get(j).copied().unwrap_or(zero) + other.coeffs.get(j).copied().unwrap_or(zero))
            .collect();
        Ok(Self {
            gamma0: self.gamma0,
            rho: self.rho,
            coeffs,
        })
    }

    /// Coefficient of `z^p`, if `p` lies on the lattice within the stored range.
    pub fn coefficient_at(&self, p: f64) -> Option<Complex64> {
        let j = ((p - self.gamma0) / self.rho).round();
        if j < 0.0 || (self.gamma0 + self.rho * j - p).abs() > EXPONENT_TOLERANCE * p.abs().max(1.0) {
            return None;
        }
        self.coeffs.get(j as usize).copied()
    }

    pub fn rl_derivative(&self, alpha: f64) -> Result<Self> {
        rl_derivative(self, alpha)
    }

    pub fn eval(&self, z: f64) -> Result<ComplexPoint> {
        eval_series(self, z)
    }
}

/// Riemann-Liouville derivative (lower terminal 0) applied termwise:
/// `z^p -> Gamma(p+1)/Gamma(p+1-alpha) z^(p-alpha)`. Powers in the kernel of
/// the operator get exactly zero coefficients.
pub fn rl_derivative(series: &FracPowerSeries, alpha: f64) -> Result<FracPowerSeries> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("frac_series", "derivative order must be positive"));
    }
    if series.gamma0 <= -1.0 {
        return Err(Error::ExponentOutOfRange { gamma0: series.gamma0 });
    }
    let coeffs = series
        .coeffs
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let p = series.exponent(j);
            if c == Complex64::new(0.0, 0.0) {
                return Ok(c);
            }
            // p + 1 - alpha at a non-positive integer up to rounding: kernel power
            let lower = p + 1.0 - alpha;
            if lower <= 0.5 && (lower - lower.round()).abs() <= EXPONENT_TOLERANCE * (1.0 + alpha) {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let ratio = gamma_ratio_complex(Complex64::new(p + 1.0, 0.0), Complex64::new(lower, 0.0))?;
            Ok(c * ratio)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FracPowerSeries {
        gamma0: series.gamma0 - alpha,
        rho: series.rho,
        coeffs,
    })
}

/// `z^m (a_n z^n d^n/dz^n + ... + a_1 z d/dz + a_0)`.
///
/// Stored both as the coefficients `a_0..a_n` and as the roots of its
/// characteristic polynomial `P(s) = sum_i a_i s(s-1)...(s-i+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerPolynomialOperator {
    coeffs: Vec<f64>,
    roots: Vec<Complex64>,
    time_weight: u32,
}

impl EulerPolynomialOperator {
    /// From the coefficients `a_0..a_n` (trailing zero leading coefficients
    /// are not allowed unless the operator is the zero-order `a_0`).
    pub fn from_coefficients(coeffs: Vec<f64>, time_weight: u32) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("frac_series", "operator coefficients must be finite"));
        }
        let n = coeffs.len() - 1;
        if n > 0 && coeffs[n] == 0.0 {
            return Err(Error::DegenerateLeading);
        }
        let mono = poly::falling_to_monomial(&coeffs);
        let roots = if n == 0 { vec![] } else { poly::roots(&mono) };
        Ok(Self {
            coeffs,
            roots,
            time_weight,
        })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.order()]
    }

    pub fn time_weight(&self) -> u32 {
        self.time_weight
    }

    /// Characteristic polynomial from the coefficient form.
    pub fn characteristic(&self, s: Complex64) -> Complex64 {
        let mut falling = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &a) in self.coeffs.iter().enumerate() {
            acc += a * falling;
            falling *= s - i as f64;
        }
        acc
    }

    /// Characteristic polynomial from the root form `a_n prod (s - s_j)`.
    pub fn characteristic_from_roots(&self, s: Complex64) -> Complex64 {
        self.roots
            .iter()
            .fold(Complex64::new(self.leading(), 0.0), |acc, r| acc * (s - r))
    }
}

/// Applies the operator: coefficient `c_j` is multiplied by `P(gamma0 + rho j)`
/// and all exponents are raised by the time weight `m`.
pub fn euler_apply(op: &EulerPolynomialOperator, series: &FracPowerSeries) -> FracPowerSeries {
    let coeffs = series
        .coeffs
        .iter()
        .enumerate()
        .map(|(j, &c)| c * op.characteristic(Complex64::new(series.exponent(j), 0.0)))
        .collect();
    FracPowerSeries {
        gamma0: series.gamma0 + op.time_weight as f64,
        rho: series.rho,
        coeffs,
    }
}

/// Sums the series at `z > 0`. Fails when the last terms are not negligible
/// compared with the sum.
pub fn eval_series(series: &FracPowerSeries, z: f64) -> Result<ComplexPoint> {
    if !(z > 0.0) {
        return Err(Error::invalid("frac_series", "series are evaluated at z > 0 only"));
    }
    let ln_z = z.ln();
    let mut sum = CompensatedSum::new();
    let mut tail = 0.0f64;
    let n = series.coeffs.len();
    for (j, &c) in series.coeffs.iter().enumerate() {
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let t = c * (series.exponent(j) * ln_z).exp();
        sum.add(t);
        if j + 3 >= n {
            tail = tail.max(t.norm());
        }
    }
    let v = sum.value();
    if !(v.re.is_finite() && v.im.is_finite()) || (n > 3 && tail > 1e-12 * v.norm().max(f64::MIN_POSITIVE)) {
        return Err(Error::NoConvergence {
            module: "frac_series",
            terms: n,
        });
    }
    Ok(v)
}

/// Both sides of the gamma product identity
/// `prod_{i=1}^m Gamma(i/a + b + 1) / Gamma(1 + ab + m) = prod_{i=1}^m Gamma(i/a + b) / (a^m Gamma(1 + ab))`.
pub fn gamma_product_identity_check(a: f64, m: u32, b: Complex64) -> Result<(Complex64, Complex64)> {
    let (l, r) = gamma_product_identity_log(a, m, b)?;
    Ok((l.exp(), r.exp()))
}

/// Logarithms of both sides of the gamma product identity.
pub fn gamma_product_identity_log(a: f64, m: u32, b: Complex64) -> Result<(Complex64, Complex64)> {
    if !(a > 0.0) || m == 0 {
        return Err(Error::invalid("frac_series", "need a > 0 and m >= 1"));
    }
    let mut lhs = -ln_gamma(1.0 + a * b + m as f64)?;
    let mut rhs = -ln_gamma(1.0 + a * b)? - (m as f64) * a.ln();
    for i in 1..=m {
        let x = i as f64 / a + b;
        lhs += ln_gamma(x + 1.0)?;
        rhs += ln_gamma(x)?;
    }
    Ok((lhs, rhs))
}
