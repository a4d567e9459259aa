//! Explicit solutions of the fractional Euler-type equation
//!
//! ```text
//! D^alpha y = z^m (a_n z^n y^(n) + ... + a_1 z y' + a_0 y),   z > 0,
//! ```
//!
//! written through the roots `s_1..s_n` of the characteristic polynomial:
//! a Fox H-function for `alpha < n` and `[alpha] + 1` generalized Wright
//! series for `alpha > n`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fox_h::{self, HFunctionSpec};
use crate::frac_series::{EulerPolynomialOperator, FracPowerSeries};
use crate::poly;
use crate::wright::{WrightParam, WrightSpec};

/// Imaginary parts below this (relative to the modulus) count as real roots.
pub const REAL_ROOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeProblem {
    pub alpha: f64,
    pub m: u32,
    /// `a_0..a_n`.
    pub a_coeffs: Vec<f64>,
}

impl OdeProblem {
    pub fn new(alpha: f64, m: u32, a_coeffs: Vec<f64>) -> Result<Self> {
        let p = Self { alpha, m, a_coeffs };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::invalid("solver_ode", "alpha must be a positive number"));
        }
        if self.a_coeffs.is_empty() || self.a_coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid(
                "solver_ode",
                "a_coeffs must be a non-empty list of numbers",
            ));
        }
        let lead = *self.a_coeffs.last().unwrap();
        if self.order() > 0 && lead == 0.0 {
            return Err(Error::DegenerateLeading);
        }
        if self.order() > 0 && lead < 0.0 {
            return Err(Error::invalid("solver_ode", "leading coefficient a_n must be positive"));
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.a_coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.a_coeffs.last().unwrap()
    }

    /// The right-hand side as an operator on power series.
    pub fn operator(&self) -> Result<EulerPolynomialOperator> {
        EulerPolynomialOperator::from_coefficients(self.a_coeffs.clone(), self.m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicPoly {
    /// Monomial coefficients, index = power.
    pub coeffs: Vec<f64>,
    pub roots: Vec<Complex64>,
}

impl CharacteristicPoly {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        poly::eval(&self.coeffs, s)
    }

    pub fn roots_are_real(&self) -> bool {
        self.roots.iter().all(|r| is_real(*r))
    }
}

pub(crate) fn is_real(z: Complex64) -> bool {
    z.im.abs() <= REAL_ROOT_TOLERANCE * z.norm().max(1.0)
}

pub fn characteristic_poly(problem: &OdeProblem) -> Result<CharacteristicPoly> {
    problem.validate()?;
    let coeffs = poly::falling_to_monomial(&problem.a_coeffs);
    let roots = poly::roots(&coeffs);
    let scale = poly::norm(&coeffs);
    for r in &roots {
        let res = poly::eval(&coeffs, *r).norm();
        // residual bound relative to the size of the terms at the root
        let size = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * r.norm().powi(k as i32))
            .fold(scale, f64::max);
        if res > 1e-10 * size {
            return Err(Error::invalid(
                "solver_ode",
                format!("characteristic root {r} has residual {res:e}"),
            ));
        }
    }
    Ok(CharacteristicPoly { coeffs, roots })
}

/// One member `z^power * pPsiq(arg_scale * z^arg_power)` of a Wright-series solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WrightMember {
    pub k: u32,
    pub power: f64,
    pub spec: WrightSpec,
    pub arg_scale: f64,
    pub arg_power: f64,
}

impl WrightMember {
    pub fn eval(&self, z: f64) -> Result<Complex64> {
        if !(z > 0.0) {
            return Err(Error::invalid("solver_ode", "solutions are evaluated at z > 0"));
        }
        let arg = Complex64::new(self.arg_scale * z.powf(self.arg_power), 0.0);
        Ok(self.spec.eval(arg)? * z.powf(self.power))
    }

    /// Power-series image with `order` coefficients, argument scale replaced by
    /// `scale` and every coefficient multiplied by `factor`. Exactly vanishing
    /// leading coefficients are dropped.
    pub fn series_scaled(&self, scale: f64, factor: Complex64, order: usize) -> Result<FracPowerSeries> {
        // coefficient times scale^j, formed in log space
        let arg = Complex64::new(scale, 0.0);
        let coeffs = (0..order)
            .map(|j| Ok(self.spec.term(j, arg)? * factor))
            .collect::<Result<Vec<_>>>()?;
        Ok(FracPowerSeries::new(self.power, self.arg_power, coeffs)?.trim_leading_zeros())
    }

    pub fn series(&self, order: usize) -> Result<FracPowerSeries> {
        self.series_scaled(self.arg_scale, Complex64::new(1.0, 0.0), order)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OdeBranch {
    /// `H(arg_scale * z^arg_power)`.
    SmallAlpha {
        spec: HFunctionSpec,
        arg_scale: f64,
        arg_power: f64,
    },
    LargeAlpha {
        members: Vec<WrightMember>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeSolution {
    pub problem: OdeProblem,
    pub branch: OdeBranch,
    pub roots: Vec<Complex64>,
    pub constants: Vec<Complex64>,
}

impl OdeSolution {
    pub fn evaluate(&self, z: f64) -> Result<Complex64> {
        self.evaluate_tol(z, fox_h::QUADRATURE_TOLERANCE)
    }

    pub(crate) fn evaluate_tol(&self, z: f64, tol: f64) -> Result<Complex64> {
        if !(z > 0.0) {
            return Err(Error::invalid("solver_ode", "solutions are evaluated at z > 0"));
        }
        match &self.branch {
            OdeBranch::SmallAlpha {
                spec,
                arg_scale,
                arg_power,
            } => {
                let h = fox_h::eval_mellin_barnes_tol(spec, arg_scale * z.powf(*arg_power), tol)?;
                Ok(self.constants[0] * h)
            }
            OdeBranch::LargeAlpha { members } => members
                .iter()
                .zip(&self.constants)
                .try_fold(Complex64::new(0.0, 0.0), |acc, (mem, c)| Ok(acc + c * mem.eval(z)?)),
        }
    }

    /// Number of free constants the solution carries.
    pub fn member_count(&self) -> usize {
        match &self.branch {
            OdeBranch::SmallAlpha { .. } => 1,
            OdeBranch::LargeAlpha { members } => members.len(),
        }
    }

    pub fn with_constants(mut self, constants: &[Complex64]) -> Self {
        let n = self.member_count();
        self.constants = (0..n)
            .map(|i| constants.get(i).copied().unwrap_or(Complex64::new(1.0, 0.0)))
            .collect();
        self
    }
}

/// Dispatches on `alpha` against the order `n`.
pub fn solve(problem: &OdeProblem) -> Result<OdeSolution> {
    problem.validate()?;
    let n = problem.order() as f64;
    if problem.alpha < n {
        solve_small_alpha(problem)
    } else if problem.alpha > n {
        solve_large_alpha(problem)
    } else {
        Err(Error::BranchMismatch {
            module: "solver_ode",
            alpha: problem.alpha,
            reason: "alpha = n is covered by neither branch",
        })
    }
}

pub fn solve_small_alpha(problem: &OdeProblem) -> Result<OdeSolution> {
    let n = problem.order();
    if !(problem.alpha < n as f64) {
        return Err(Error::BranchMismatch {
            module: "solver_ode",
            alpha: problem.alpha,
            reason: "the H-function form needs alpha < n",
        });
    }
    let cp = characteristic_poly(problem)?;
    if !cp.roots_are_real() {
        return Err(Error::ComplexRoots { module: "solver_ode" });
    }
    let w = problem.alpha + problem.m as f64;
    let mut lower: Vec<(f64, f64)> = cp.roots.iter().map(|s| (-s.re / w, 1.0)).collect();
    lower.extend((1..=problem.m).map(|j| (j as f64 / w, 1.0)));
    let q = lower.len();
    let spec = HFunctionSpec::new(q, 0, vec![(1.0, w)], lower)?;
    let divisor = problem.leading() * w.powi((problem.m as usize + n) as i32);
    Ok(OdeSolution {
        problem: problem.clone(),
        branch: OdeBranch::SmallAlpha {
            spec,
            arg_scale: 1.0 / divisor,
            arg_power: -w,
        },
        roots: cp.roots,
        constants: vec![Complex64::new(1.0, 0.0)],
    })
}

/// Wright member `k` of the large-alpha family for given roots.
pub(crate) fn wright_member(alpha: f64, m: u32, roots: &[Complex64], k: u32) -> Result<WrightSpec> {
    let w = alpha + m as f64;
    let ak = alpha - k as f64;
    let mut upper: Vec<WrightParam> = roots.iter().map(|s| WrightParam::new((ak - s) / w, 1.0)).collect();
    upper.extend((1..=m).map(|i| WrightParam::real((ak + i as f64) / w, 1.0)));
    upper.push(WrightParam::real(1.0, 1.0));
    WrightSpec::new(upper, vec![WrightParam::real(1.0 + ak, w)])
}

pub fn solve_large_alpha(problem: &OdeProblem) -> Result<OdeSolution> {
    let n = problem.order();
    if !(problem.alpha > n as f64) {
        return Err(Error::BranchMismatch {
            module: "solver_ode",
            alpha: problem.alpha,
            reason: "the Wright-series form needs alpha > n",
        });
    }
    let cp = characteristic_poly(problem)?;
    let w = problem.alpha + problem.m as f64;
    let scale = problem.leading() * w.powi((problem.m as usize + n) as i32);
    let count = problem.alpha.floor() as u32 + 1;
    let members = (1..=count)
        .map(|k| {
            Ok(WrightMember {
                k,
                power: problem.alpha - k as f64,
                spec: wright_member(problem.alpha, problem.m, &cp.roots, k)?,
                arg_scale: scale,
                arg_power: w,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OdeSolution {
        problem: problem.clone(),
        constants: vec![Complex64::new(1.0, 0.0); members.len()],
        branch: OdeBranch::LargeAlpha { members },
        roots: cp.roots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sorted_re(v: &[Complex64]) -> Vec<f64> {
        let mut r: Vec<f64> = v.iter().map(|z| z.re).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        r
    }

    #[test]
    fn characteristic_examples() {
        let p = OdeProblem::new(0.5, 0, vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(sorted_re(&characteristic_poly(&p).unwrap().roots), vec![0.0, 1.0]);
        let p = OdeProblem::new(0.5, 0, vec![-2.0, 1.0]).unwrap();
        assert_eq!(sorted_re(&characteristic_poly(&p).unwrap().roots), vec![2.0]);
        let p = OdeProblem::new(0.5, 0, vec![0.0, 1.0, 1.0]).unwrap();
        assert_eq!(sorted_re(&characteristic_poly(&p).unwrap().roots), vec![0.0, 0.0]);
    }

    #[test]
    fn degenerate_leading_is_rejected() {
        assert_eq!(OdeProblem::new(0.5, 0, vec![1.0, 0.0]), Err(Error::DegenerateLeading));
    }

    #[test]
    fn alpha_equal_to_order_is_rejected() {
        let p = OdeProblem::new(2.0, 0, vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(solve(&p), Err(Error::BranchMismatch { .. })));
    }

    #[test]
    fn small_alpha_structure() {
        // roots {0, -0.5}: s(s-1) + 1.5 s = s^2 + 0.5 s
        let p = OdeProblem::new(0.8, 1, vec![0.0, 1.5, 1.0]).unwrap();
        let sol = solve(&p).unwrap();
        let OdeBranch::SmallAlpha {
            spec,
            arg_scale,
            arg_power,
        } = &sol.branch
        else {
            panic!("expected H form")
        };
        assert_eq!(spec.q(), 3);
        assert_eq!(spec.upper(), &[(1.0, 1.8)]);
        assert_relative_eq!(1.0 / arg_scale, 5.832, max_relative = 1e-14);
        assert_relative_eq!(*arg_power, -1.8);
        let mut b: Vec<f64> = spec.lower().iter().map(|l| l.0).collect();
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (got, want) in b.iter().zip([0.0, 0.5 / 1.8, 1.0 / 1.8]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn small_alpha_decays_towards_the_origin() {
        // the H argument grows as z -> 0, so the solution vanishes there
        let p = OdeProblem::new(0.8, 1, vec![0.0, 1.5, 1.0]).unwrap();
        let sol = solve(&p).unwrap();
        let near = sol.evaluate(0.1).unwrap().re;
        let far = sol.evaluate(0.2).unwrap().re;
        assert!(near.abs() < far.abs());
    }

    #[test]
    fn complex_roots_are_refused_by_h_form() {
        // s^2 + 1 = s(s-1) + s + 1
        let p = OdeProblem::new(0.5, 0, vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(solve(&p).unwrap_err(), Error::ComplexRoots { module: "solver_ode" });
    }

    #[test]
    fn large_alpha_structure() {
        let p = OdeProblem::new(2.5, 0, vec![0.0, 0.0, 1.0]).unwrap();
        let sol = solve(&p).unwrap();
        let OdeBranch::LargeAlpha { members } = &sol.branch else {
            panic!("expected series form")
        };
        assert_eq!(members.len(), 3);
        assert_eq!(members[0].power, 1.5);
        assert_eq!(members[0].arg_power, 2.5);
        for mem in members {
            let v = mem.spec.convergence();
            assert_relative_eq!(v.delta, 2.5 - 2.0 - 1.0, epsilon = 1e-14);
            assert!(v.is_entire());
        }
    }

    #[test]
    fn large_alpha_member_coefficients_satisfy_the_equation() {
        let p = OdeProblem::new(2.5, 1, vec![0.3, -0.2, 1.0]).unwrap();
        let sol = solve(&p).unwrap();
        let op = p.operator().unwrap();
        let OdeBranch::LargeAlpha { members } = &sol.branch else {
            unreachable!()
        };
        for mem in members {
            let u = mem.series(25).unwrap();
            let lhs = u.rl_derivative(p.alpha).unwrap();
            let rhs = crate::frac_series::euler_apply(&op, &u);
            // lhs exponent gamma0 - alpha + rho (j + 1) = rhs exponent gamma0 + m + rho j
            assert_eq!(lhs.coeffs()[0], Complex64::new(0.0, 0.0));
            for j in 0..20 {
                let (l, r) = (lhs.coeffs()[j + 1], rhs.coeffs()[j]);
                assert!((l - r).norm() <= 1e-10 * l.norm().max(r.norm()), "j={j}: {l} vs {r}");
            }
        }
    }

    #[test]
    fn integer_alpha_drops_the_vanishing_leading_term() {
        let p = OdeProblem::new(3.0, 0, vec![0.5, 1.0]).unwrap();
        let sol = solve(&p).unwrap();
        let OdeBranch::LargeAlpha { members } = &sol.branch else {
            unreachable!()
        };
        let last = members.last().unwrap();
        assert_eq!(last.power, -1.0);
        let s = last.series(10).unwrap();
        assert!(s.gamma0() > -1.0);
        assert!(s.rl_derivative(3.0).is_ok());
    }

    #[test]
    fn constants_scale_the_solution() {
        let p = OdeProblem::new(2.5, 0, vec![0.0, 0.0, 1.0]).unwrap();
        let base = solve(&p).unwrap();
        let v1 = base.evaluate(0.7).unwrap();
        let two = Complex64::new(2.0, 0.0);
        let v2 = base.with_constants(&[two, two, two]).evaluate(0.7).unwrap();
        assert_relative_eq!(v2.re, 2.0 * v1.re, max_relative = 1e-14);
    }

    #[test]
    fn problem_json_round_trip() {
        let p: OdeProblem = serde_json::from_str(r#"{"alpha":0.8,"m":1,"a_coeffs":[0,1.5,1]}"#).unwrap();
        assert_eq!(p.order(), 2);
        let back: OdeProblem = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
