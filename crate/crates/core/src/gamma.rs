//! Complex gamma kernel.
//!
//! `ln_gamma` uses the Lanczos approximation (g = 7, nine coefficients) on
//! `Re z >= 1/2` and the reflection formula elsewhere. Everything downstream
//! (Wright series terms, Mellin-Barnes integrands) works in log space through
//! these functions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A point of the complex plane. Both components must be finite.
pub type ComplexPoint = Complex64;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Absolute distance below which an argument counts as sitting on a pole.
pub const POLE_TOLERANCE: f64 = 1e-14;

/// Returns the non-positive integer `n` when `z` lies within
/// [`POLE_TOLERANCE`] of it.
fn nearby_pole(z: Complex64) -> Option<f64> {
    if z.re > 0.5 || z.im.abs() >= POLE_TOLERANCE {
        return None;
    }
    let n = z.re.round();
    if n <= 0.0 && (z - Complex64::new(n, 0.0)).norm() < POLE_TOLERANCE {
        Some(n)
    } else {
        None
    }
}

fn is_exact_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// sin(pi x) with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    // r in [-1, 1]
    if r.abs() <= 0.25 {
        (PI * r).sin()
    } else if r > 0.75 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.75 {
        -(PI * (1.0 + r)).sin()
    } else if r > 0.0 {
        (PI * (0.5 - r)).cos()
    } else {
        -(PI * (0.5 + r)).cos()
    }
}

/// cos(pi x) with exact zeros at the half-integers.
pub fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}

/// log sin(pi z), stable for large |Im z|. The imaginary part is only
/// determined modulo 2 pi.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    if z.im.abs() <= 1.0 {
        let s = Complex64::new(sin_pi(z.re) * (PI * z.im).cosh(), cos_pi(z.re) * (PI * z.im).sinh());
        return s.ln();
    }
    let w = if z.im > 0.0 { z } else { z.conj() };
    // sin(pi w) = (i/2) e^{-i pi w} (1 - e^{2 i pi w}), Im w > 1
    let e2 = (Complex64::new(0.0, 2.0 * PI) * w).exp();
    let v = Complex64::new(PI * w.im, -PI * w.re)
        + (Complex64::new(1.0, 0.0) - e2).ln()
        + Complex64::new(-std::f64::consts::LN_2, PI / 2.0);
    if z.im > 0.0 {
        v
    } else {
        v.conj()
    }
}

fn lanczos_ln_gamma(z: Complex64) -> Complex64 {
    let zm1 = z - 1.0;
    let mut acc = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (zm1 + i as f64);
    }
    let t = zm1 + LANCZOS_G + 0.5;
    (zm1 + 0.5) * t.ln() - t + acc.ln() + HALF_LN_TWO_PI
}

/// log Gamma(z) without pole checks; the imaginary part is a continuous
/// branch, not reduced to (-pi, pi]. Intended for sums of log-gammas that
/// are exponentiated afterwards.
pub(crate) fn ln_gamma_unchecked(z: Complex64) -> Complex64 {
    // small positive integers: exact factorials, so Gamma(1) = Gamma(2) = 1 exactly
    if z.im == 0.0 && z.re >= 1.0 && z.re <= 20.0 && z.re.fract() == 0.0 {
        let f: f64 = (2..z.re as u32).map(f64::from).product();
        return Complex64::new(f.ln(), 0.0);
    }
    if z.re >= 0.5 {
        lanczos_ln_gamma(z)
    } else {
        Complex64::new(LN_PI, 0.0) - ln_sin_pi(z) - lanczos_ln_gamma(1.0 - z)
    }
}

/// log(1/Gamma(z)), or `None` where 1/Gamma vanishes (non-positive integers).
pub(crate) fn ln_rgamma(z: Complex64) -> Option<Complex64> {
    if is_exact_pole(z) {
        return None;
    }
    Some(-ln_gamma_unchecked(z))
}

fn wrap_phase(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut t = theta - two_pi * (theta / two_pi).round();
    if t <= -PI {
        t += two_pi;
    }
    t
}

/// Principal value of log Gamma(z) (imaginary part in (-pi, pi]).
pub fn ln_gamma(z: ComplexPoint) -> Result<ComplexPoint> {
    if let Some(n) = nearby_pole(z) {
        return Err(Error::Pole { re: n, im: 0.0 });
    }
    let v = ln_gamma_unchecked(z);
    Ok(Complex64::new(v.re, wrap_phase(v.im)))
}

/// 1/Gamma(z), an entire function; exactly zero at the non-positive integers.
pub fn gamma_reciprocal(z: ComplexPoint) -> ComplexPoint {
    if is_exact_pole(z) {
        return Complex64::new(0.0, 0.0);
    }
    if z.re >= 0.5 {
        return (-lanczos_ln_gamma(z)).exp();
    }
    // 1/Gamma(z) = sin(pi z) Gamma(1 - z) / pi
    if z.im.abs() <= 1.0 {
        let s = Complex64::new(sin_pi(z.re) * (PI * z.im).cosh(), cos_pi(z.re) * (PI * z.im).sinh());
        let lg = lanczos_ln_gamma(1.0 - z);
        if lg.re < 700.0 {
            return s * lg.exp() / PI;
        }
    }
    (ln_sin_pi(z) + lanczos_ln_gamma(1.0 - z) - LN_PI).exp()
}

/// Gamma(z) as a complex number.
pub fn gamma(z: ComplexPoint) -> Result<ComplexPoint> {
    Ok(ln_gamma(z)?.exp())
}

/// Gamma(p)/Gamma(q) for complex arguments; zero when q is a pole.
pub fn gamma_ratio_complex(p: Complex64, q: Complex64) -> Result<Complex64> {
    if let Some(n) = nearby_pole(p) {
        return Err(Error::Pole { re: n, im: 0.0 });
    }
    match ln_rgamma(q) {
        None => Ok(Complex64::new(0.0, 0.0)),
        Some(lr) => Ok((ln_gamma_unchecked(p) + lr).exp()),
    }
}

/// Gamma(p)/Gamma(q) for real arguments; zero when q is a pole of Gamma.
pub fn gamma_ratio(p: f64, q: f64) -> Result<f64> {
    gamma_ratio_complex(Complex64::new(p, 0.0), Complex64::new(q, 0.0)).map(|v| v.re)
}
