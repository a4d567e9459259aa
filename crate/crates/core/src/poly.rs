//! Real polynomials in the monomial basis: expansion of the falling-factorial
//! form used by Euler-type operators, evaluation and root finding.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Expands `sum_i a_i s(s-1)...(s-i+1)` into monomial coefficients
/// (index = power).
pub fn falling_to_monomial(a: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(1)];
    // basis holds the monomial coefficients of s(s-1)...(s-i+1)
    let mut basis = vec![1.0];
    for (i, &ai) in a.iter().enumerate() {
        for (k, &b) in basis.iter().enumerate() {
            out[k] += ai * b;
        }
        // multiply basis by (s - i)
        let mut next = vec![0.0; basis.len() + 1];
        for (k, &b) in basis.iter().enumerate() {
            next[k + 1] += b;
            next[k] -= i as f64 * b;
        }
        basis = next;
    }
    out
}

/// Horner evaluation at a complex point.
pub fn eval(coeffs: &[f64], s: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

fn eval_derivative(coeffs: &[f64], s: Complex64) -> Complex64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, (k, &c)| acc * s + c * k as f64)
}

/// Euclidean norm of the coefficient vector.
pub fn norm(coeffs: &[f64]) -> f64 {
    coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Roots of a polynomial with non-zero leading coefficient. Closed forms for
/// degree one and two, companion-matrix eigenvalues plus one Newton step
/// otherwise.
pub fn roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    match n {
        0 => vec![],
        1 => vec![Complex64::new(-coeffs[0] / coeffs[1], 0.0)],
        2 => quadratic_roots(coeffs[2], coeffs[1], coeffs[0]).to_vec(),
        _ => {
            let lead = coeffs[n];
            let companion = DMatrix::from_fn(n, n, |i, j| {
                if i == 0 {
                    -coeffs[n - 1 - j] / lead
                } else if i == j + 1 {
                    1.0
                } else {
                    0.0
                }
            });
            companion
                .complex_eigenvalues()
                .iter()
                .map(|&r| {
                    let d = eval_derivative(coeffs, r);
                    if d.norm() > 1e-8 * norm(coeffs) {
                        r - eval(coeffs, r) / d
                    } else {
                        r
                    }
                })
                .collect()
        }
    }
}

/// Roots of `a s^2 + b s + c` using the cancellation-free form.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * a * c;
    if disc >= 0.0 {
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        if q == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        [Complex64::new(q / a, 0.0), Complex64::new(c / q, 0.0)]
    } else {
        let re = -b / (2.0 * a);
        let im = (-disc).sqrt() / (2.0 * a);
        [Complex64::new(re, im), Complex64::new(re, -im)]
    }
}
