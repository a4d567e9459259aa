//! Similarity solutions of the time-fractional diffusion equation
//!
//! ```text
//! D_t^alpha u = t^m (A x^d u_xx + B x^(d-1) u_x + C x^(d-2) u),   x, t > 0.
//! ```
//!
//! The ansatz `u = x^a phi(z)`, `z = x^((d-2)/(alpha+m)) t`, turns the
//! equation into a second-order instance of the fractional Euler equation
//! solved in [`crate::solver_ode`]. The solutions here are assembled directly
//! in `(x, t)` so they can be checked against the reduced route.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fox_h::{self, HFunctionSpec};
use crate::frac_series::FracPowerSeries;
use crate::solver_ode::{self, is_real, OdeProblem};
use crate::wright::{WrightParam, WrightSpec};

/// `|d - 2|` below this selects the `d = 2` branch.
pub const D2_TOLERANCE: f64 = 1e-12;

/// A free constant, given in JSON either as a number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum ConstantRepr {
    Real(f64),
    Complex([f64; 2]),
}

mod constants_serde {
    use super::ConstantRepr;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|c| {
                if c.im == 0.0 {
                    ConstantRepr::Real(c.re)
                } else {
                    ConstantRepr::Complex([c.re, c.im])
                }
            })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let raw = Vec::<ConstantRepr>::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|r| match r {
                ConstantRepr::Real(x) => Complex64::new(x, 0.0),
                ConstantRepr::Complex([re, im]) => Complex64::new(re, im),
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionProblem {
    pub alpha: f64,
    pub m: u32,
    pub d: f64,
    /// Coefficient of `x^d u_xx`.
    #[serde(rename = "A")]
    pub diffusion: f64,
    /// Coefficient of `x^(d-1) u_x`.
    #[serde(rename = "B")]
    pub drift: f64,
    /// Coefficient of `x^(d-2) u`.
    #[serde(rename = "C")]
    pub reaction: f64,
    /// Similarity prefactor exponent.
    pub a: f64,
    /// Free constants `c_k`; missing entries default to 1.
    #[serde(default, with = "constants_serde", skip_serializing_if = "Vec::is_empty")]
    pub constants: Vec<Complex64>,
}

impl DiffusionProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(alpha: f64, m: u32, d: f64, diffusion: f64, drift: f64, reaction: f64, a: f64) -> Result<Self> {
        let p = Self {
            alpha,
            m,
            d,
            diffusion,
            drift,
            reaction,
            a,
            constants: vec![],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_constants(mut self, constants: Vec<Complex64>) -> Self {
        self.constants = constants;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.alpha, self.d, self.diffusion, self.drift, self.reaction, self.a]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("solver_pde", "parameters must be finite"));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::invalid("solver_pde", "alpha must be positive"));
        }
        if !(self.diffusion > 0.0) {
            return Err(Error::invalid("solver_pde", "A must be positive"));
        }
        Ok(())
    }

    pub fn is_d2(&self) -> bool {
        (self.d - 2.0).abs() <= D2_TOLERANCE
    }

    /// `K = A a^2 - A a + B a + C`.
    pub fn k_constant(&self) -> f64 {
        let (aa, a) = (self.diffusion, self.a);
        aa * a * a - aa * a + self.drift * a + self.reaction
    }

    /// `(1 - B/A)^2 - 4 C / A`.
    pub fn discriminant(&self) -> f64 {
        let r = self.drift / self.diffusion;
        (1.0 - r) * (1.0 - r) - 4.0 * self.reaction / self.diffusion
    }

    /// Similarity variable `x^((d-2)/(alpha+m)) t`.
    pub fn similarity_variable(&self, x: f64, t: f64) -> f64 {
        x.powf((self.d - 2.0) / self.weight()) * t
    }

    fn weight(&self) -> f64 {
        self.alpha + self.m as f64
    }

    fn constant(&self, i: usize) -> Complex64 {
        self.constants.get(i).copied().unwrap_or(Complex64::new(1.0, 0.0))
    }
}

/// Characteristic exponents `s_1` (upper sign) and `s_2` of the reduced equation.
pub fn s_roots(problem: &DiffusionProblem) -> Result<(Complex64, Complex64)> {
    problem.validate()?;
    if problem.is_d2() {
        return Err(Error::DegenerateD);
    }
    let w = problem.weight();
    let factor = w / (2.0 * (2.0 - problem.d));
    let centre = problem.drift / problem.diffusion + 2.0 * problem.a - 1.0;
    let root = Complex64::new(problem.discriminant(), 0.0).sqrt();
    Ok((factor * (centre + root), factor * (centre - root)))
}

/// The reduced second-order problem in the similarity variable.
pub fn similarity_reduce(problem: &DiffusionProblem) -> Result<OdeProblem> {
    problem.validate()?;
    if problem.is_d2() {
        return Err(Error::DegenerateD);
    }
    let w = problem.weight();
    let (aa, dm2) = (problem.diffusion, problem.d - 2.0);
    let a2 = aa * dm2 * dm2 / (w * w);
    let a1 = dm2 / w * (aa * dm2 / w + problem.drift + aa * (2.0 * problem.a - 1.0));
    OdeProblem::new(problem.alpha, problem.m, vec![problem.k_constant(), a1, a2])
}

/// Which lower parameter and argument the `d = 2` branch uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum D2Variant {
    /// Lower `(1 + alpha - k, alpha + m)`, argument `K (alpha+m)^m t^(alpha+m)`.
    #[default]
    Derivation,
    /// Lower `(alpha - 1, alpha + m)`, argument `K t^(alpha+m)`; kept for comparison.
    Statement,
}

/// Sign choice in the closed-form exponential solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    #[default]
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// `c_k x^(a + x_power) t^t_power pPsiq(arg_scale x^arg_x_power t^arg_t_power)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeWrightMember {
    pub k: u32,
    pub x_power: f64,
    pub t_power: f64,
    pub spec: WrightSpec,
    pub arg_scale: f64,
    pub arg_x_power: f64,
    pub arg_t_power: f64,
}

impl PdeWrightMember {
    fn eval(&self, a: f64, x: f64, t: f64) -> Result<Complex64> {
        let arg = self.arg_scale * x.powf(self.arg_x_power) * t.powf(self.arg_t_power);
        let psi = self.spec.eval(Complex64::new(arg, 0.0))?;
        Ok(psi * x.powf(a + self.x_power) * t.powf(self.t_power))
    }

    /// Power series in `t` at fixed `x`.
    fn t_series(&self, a: f64, x: f64, c: Complex64, order: usize) -> Result<FracPowerSeries> {
        let scale = self.arg_scale * x.powf(self.arg_x_power);
        let factor = c * x.powf(a + self.x_power);
        // coefficient times scale^j, formed in log space
        let arg = Complex64::new(scale, 0.0);
        let coeffs = (0..order)
            .map(|j| Ok(self.spec.term(j, arg)? * factor))
            .collect::<Result<Vec<_>>>()?;
        Ok(FracPowerSeries::new(self.t_power, self.arg_t_power, coeffs)?.trim_leading_zeros())
    }

    /// Series in `t` of `u`, `u_x` and `u_xx` at fixed `x`, leading zeros kept.
    /// Each `t` coefficient is a single power of `x`, so all three are exact.
    fn t_series_x_derivatives(&self, a: f64, x: f64, c: Complex64, order: usize) -> Result<[FracPowerSeries; 3]> {
        let scale = self.arg_scale * x.powf(self.arg_x_power);
        let factor = c * x.powf(a + self.x_power);
        let arg = Complex64::new(scale, 0.0);
        let mut value = Vec::with_capacity(order);
        let mut first = Vec::with_capacity(order);
        let mut second = Vec::with_capacity(order);
        for j in 0..order {
            let cj = self.spec.term(j, arg)? * factor;
            let e = a + self.x_power + self.arg_x_power * j as f64;
            value.push(cj);
            first.push(cj * e / x);
            second.push(cj * e * (e - 1.0) / (x * x));
        }
        Ok([
            FracPowerSeries::new(self.t_power, self.arg_t_power, value)?,
            FracPowerSeries::new(self.t_power, self.arg_t_power, first)?,
            FracPowerSeries::new(self.t_power, self.arg_t_power, second)?,
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PdeRepr {
    /// `c_1 x^a H(arg_scale x^(2-d) t^-(alpha+m))`, for `0 < alpha < 2`.
    FoxHForm { spec: HFunctionSpec, arg_scale: f64 },
    /// `[alpha] + 1` Wright members, for `alpha > 2`.
    WrightSeriesForm { members: Vec<PdeWrightMember> },
    /// Wright members in `t` alone, for `d = 2`.
    D2Form {
        members: Vec<PdeWrightMember>,
        variant: D2Variant,
    },
    /// `c x^x_power t^t_power exp(-exp_scale x^(2-d) / t^(1+m))`, for `alpha = 1`.
    ClosedFormExp {
        branch: Branch,
        x_power: f64,
        t_power: f64,
        exp_scale: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeSolution {
    pub problem: DiffusionProblem,
    pub repr: PdeRepr,
    /// `s_1, s_2`; absent on the `d = 2` branch.
    pub s_roots: Option<[Complex64; 2]>,
    #[serde(rename = "K")]
    pub k: f64,
}

impl PdeSolution {
    pub fn evaluate(&self, x: f64, t: f64) -> Result<Complex64> {
        self.evaluate_tol(x, t, fox_h::QUADRATURE_TOLERANCE)
    }

    pub(crate) fn evaluate_tol(&self, x: f64, t: f64, tol: f64) -> Result<Complex64> {
        if !(x > 0.0 && t > 0.0) {
            return Err(Error::OutOfDomain {
                module: "solver_pde",
                x,
                t,
            });
        }
        let p = &self.problem;
        match &self.repr {
            PdeRepr::FoxHForm { spec, arg_scale } => {
                let z = arg_scale * x.powf(2.0 - p.d) * t.powf(-(p.alpha + p.m as f64));
                let h = fox_h::eval_mellin_barnes_tol(spec, z, tol)?;
                Ok(p.constant(0) * h * x.powf(p.a))
            }
            PdeRepr::WrightSeriesForm { members } | PdeRepr::D2Form { members, .. } => members
                .iter()
                .enumerate()
                .try_fold(Complex64::new(0.0, 0.0), |acc, (i, mem)| {
                    Ok(acc + p.constant(i) * mem.eval(p.a, x, t)?)
                }),
            PdeRepr::ClosedFormExp {
                x_power,
                t_power,
                exp_scale,
                ..
            } => {
                let e = exp_scale * x.powf(2.0 - p.d) / t.powi(1 + p.m as i32);
                Ok(p.constant(0) * x.powf(*x_power) * t.powf(*t_power) * (-e).exp())
            }
        }
    }

    /// The solution at fixed `x` as power series in `t`, one per Wright member.
    /// `None` for representations that are not series in `t`.
    pub fn t_series(&self, x: f64, order: usize) -> Result<Option<Vec<FracPowerSeries>>> {
        let p = &self.problem;
        match &self.repr {
            PdeRepr::WrightSeriesForm { members } | PdeRepr::D2Form { members, .. } => members
                .iter()
                .enumerate()
                .map(|(i, mem)| mem.t_series(p.a, x, p.constant(i), order))
                .collect::<Result<Vec<_>>>()
                .map(Some),
            _ => Ok(None),
        }
    }

    /// `u`, `u_x` and `u_xx` at fixed `x` as series in `t`, one triple per
    /// member. `None` for representations that are not series in `t`.
    pub fn t_series_x_derivatives(&self, x: f64, order: usize) -> Result<Option<Vec<[FracPowerSeries; 3]>>> {
        let p = &self.problem;
        match &self.repr {
            PdeRepr::WrightSeriesForm { members } | PdeRepr::D2Form { members, .. } => members
                .iter()
                .enumerate()
                .map(|(i, mem)| mem.t_series_x_derivatives(p.a, x, p.constant(i), order))
                .collect::<Result<Vec<_>>>()
                .map(Some),
            _ => Ok(None),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.repr {
            PdeRepr::FoxHForm { .. } => "fox_h_form",
            PdeRepr::WrightSeriesForm { .. } => "wright_series_form",
            PdeRepr::D2Form { .. } => "d2_form",
            PdeRepr::ClosedFormExp { .. } => "closed_form_exp",
        }
    }
}

/// Solution for the parameter case the problem falls into.
pub fn solve(problem: &DiffusionProblem) -> Result<PdeSolution> {
    problem.validate()?;
    if problem.is_d2() {
        return solve_d2(problem, D2Variant::Derivation);
    }
    let (s1, s2) = s_roots(problem)?;
    let w = problem.weight();
    let dm2 = problem.d - 2.0;
    let y = problem.diffusion * dm2 * dm2 * w.powi(problem.m as i32);
    let repr = if problem.alpha < 2.0 {
        if !(is_real(s1) && is_real(s2)) {
            return Err(Error::ComplexRoots { module: "solver_pde" });
        }
        let mut lower = vec![(-s1.re / w, 1.0), (-s2.re / w, 1.0)];
        lower.extend((1..=problem.m).map(|j| (j as f64 / w, 1.0)));
        let spec = HFunctionSpec::new(lower.len(), 0, vec![(1.0, w)], lower)?;
        PdeRepr::FoxHForm {
            spec,
            arg_scale: 1.0 / y,
        }
    } else if problem.alpha > 2.0 {
        let count = problem.alpha.floor() as u32 + 1;
        let members = (1..=count)
            .map(|k| {
                let ak = problem.alpha - k as f64;
                Ok(PdeWrightMember {
                    k,
                    x_power: dm2 * ak / w,
                    t_power: ak,
                    spec: solver_ode::wright_member(problem.alpha, problem.m, &[s1, s2], k)?,
                    arg_scale: y,
                    arg_x_power: dm2,
                    arg_t_power: w,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PdeRepr::WrightSeriesForm { members }
    } else {
        return Err(Error::UnsupportedAlpha { alpha: problem.alpha });
    };
    Ok(PdeSolution {
        problem: problem.clone(),
        repr,
        s_roots: Some([s1, s2]),
        k: problem.k_constant(),
    })
}

/// The `d = 2` branch, where the reduced equation is `D^alpha phi = K z^m phi`.
pub fn solve_d2(problem: &DiffusionProblem, variant: D2Variant) -> Result<PdeSolution> {
    problem.validate()?;
    if !problem.is_d2() {
        return Err(Error::invalid("solver_pde", "the d = 2 branch needs d = 2"));
    }
    let w = problem.weight();
    let k_const = problem.k_constant();
    let count = problem.alpha.floor() as u32 + 1;
    let members = (1..=count)
        .map(|k| {
            let ak = problem.alpha - k as f64;
            let mut upper: Vec<WrightParam> = (1..=problem.m)
                .map(|i| WrightParam::real((ak + i as f64) / w, 1.0))
                .collect();
            upper.push(WrightParam::real(1.0, 1.0));
            let (lower_shift, arg_scale) = match variant {
                D2Variant::Derivation => (1.0 + ak, k_const * w.powi(problem.m as i32)),
                D2Variant::Statement => (problem.alpha - 1.0, k_const),
            };
            Ok(PdeWrightMember {
                k,
                x_power: 0.0,
                t_power: ak,
                spec: WrightSpec::new(upper, vec![WrightParam::real(lower_shift, w)])?,
                arg_scale,
                arg_x_power: 0.0,
                arg_t_power: w,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PdeSolution {
        problem: problem.clone(),
        repr: PdeRepr::D2Form { members, variant },
        s_roots: None,
        k: k_const,
    })
}

/// Closed-form exponential solution for `alpha = 1`, `d != 2`.
pub fn corollary_alpha1(problem: &DiffusionProblem, branch: Branch) -> Result<PdeSolution> {
    problem.validate()?;
    if problem.alpha != 1.0 {
        return Err(Error::BranchMismatch {
            module: "solver_pde",
            alpha: problem.alpha,
            reason: "the exponential closed form needs alpha = 1",
        });
    }
    if problem.is_d2() {
        return Err(Error::DegenerateD);
    }
    let disc = problem.discriminant();
    if disc < 0.0 {
        return Err(Error::ComplexDiscriminant { disc });
    }
    let root = branch.sign() * disc.sqrt();
    let r = problem.drift / problem.diffusion;
    let mp1 = 1.0 + problem.m as f64;
    let dm2 = problem.d - 2.0;
    let repr = PdeRepr::ClosedFormExp {
        branch,
        x_power: -0.5 * (r - 1.0 + root),
        t_power: -(mp1 / dm2) * (dm2 + root),
        exp_scale: mp1 / (problem.diffusion * dm2 * dm2),
    };
    let (s1, s2) = s_roots(problem)?;
    Ok(PdeSolution {
        problem: problem.clone(),
        repr,
        s_roots: Some([s1, s2]),
        k: problem.k_constant(),
    })
}

/// Values of `a` for which the `alpha = 1` H-function solution collapses to
/// the exponential closed form, upper sign first.
pub fn corollary_prefactor_exponents(problem: &DiffusionProblem) -> Result<(f64, f64)> {
    let disc = problem.discriminant();
    if disc < 0.0 {
        return Err(Error::ComplexDiscriminant { disc });
    }
    let base = 2.0 * problem.d - problem.drift / problem.diffusion - 3.0;
    Ok((0.5 * (base + disc.sqrt()), 0.5 * (base - disc.sqrt())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn heat(a: f64) -> DiffusionProblem {
        DiffusionProblem::new(1.0, 0, 0.0, 1.0, 0.0, 0.0, a).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn s_roots_examples() {
        let (s1, s2) = s_roots(&heat(0.0)).unwrap();
        assert_eq!((s1, s2), (c(0.0), c(-0.5)));
        let (s1, s2) = s_roots(&heat(1.0)).unwrap();
        assert_eq!((s1, s2), (c(0.5), c(0.0)));
        let p = DiffusionProblem::new(1.0, 0, 0.0, 2.0, 2.0, 0.0, 0.3).unwrap();
        let (s1, s2) = s_roots(&p).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn d2_has_no_s_roots() {
        let p = DiffusionProblem::new(1.0, 0, 2.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(s_roots(&p), Err(Error::DegenerateD));
        assert_eq!(similarity_reduce(&p), Err(Error::DegenerateD));
    }

    #[test]
    fn reduction_example() {
        let ode = similarity_reduce(&heat(0.0)).unwrap();
        // 4 s(s-1) + 6 s = 4 s^2 + 2 s, roots {0, -1/2}
        assert_eq!(ode.a_coeffs, vec![0.0, 6.0, 4.0]);
        let mut r: Vec<f64> = solver_ode::characteristic_poly(&ode)
            .unwrap()
            .roots
            .iter()
            .map(|z| z.re)
            .collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(r, vec![-0.5, 0.0]);
    }

    #[test]
    fn k_is_the_reduced_a0() {
        let p = DiffusionProblem::new(0.7, 2, 1.3, 1.7, -0.4, 0.9, 0.25).unwrap();
        assert_eq!(similarity_reduce(&p).unwrap().a_coeffs[0], p.k_constant());
    }

    #[test]
    fn heat_kernel_closed_form() {
        let sol = corollary_alpha1(&heat(0.0), Branch::Plus).unwrap();
        let PdeRepr::ClosedFormExp {
            x_power,
            t_power,
            exp_scale,
            ..
        } = sol.repr
        else {
            unreachable!()
        };
        assert_eq!((x_power, t_power, exp_scale), (0.0, -0.5, 0.25));
        assert_relative_eq!(
            sol.evaluate(1.0, 1.0).unwrap().re,
            (-0.25f64).exp(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn m1_closed_form() {
        let p = DiffusionProblem::new(1.0, 1, 0.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        let sol = corollary_alpha1(&p, Branch::Plus).unwrap();
        for (x, t) in [(0.5f64, 0.7f64), (1.3, 2.0)] {
            let want = (-x * x / (2.0 * t * t)).exp() / t;
            assert_relative_eq!(sol.evaluate(x, t).unwrap().re, want, max_relative = 1e-14);
        }
    }

    #[test]
    fn corollary_rejects_complex_discriminant() {
        let p = DiffusionProblem::new(1.0, 0, 0.0, 1.0, 0.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            corollary_alpha1(&p, Branch::Plus),
            Err(Error::ComplexDiscriminant { .. })
        ));
    }

    #[test]
    fn case1_structure() {
        let p = DiffusionProblem::new(0.8, 1, 0.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        let sol = solve(&p).unwrap();
        let PdeRepr::FoxHForm { spec, arg_scale } = &sol.repr else {
            panic!("expected H form")
        };
        assert_eq!(spec.upper(), &[(1.0, 1.8)]);
        assert_eq!(spec.lower().len(), 3);
        assert_relative_eq!(*arg_scale, 1.0 / (4.0 * 1.8), max_relative = 1e-15);
    }

    #[test]
    fn case1_vanishes_as_t_goes_to_zero() {
        let p = DiffusionProblem::new(0.8, 1, 0.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        let sol = solve(&p).unwrap();
        let vals: Vec<f64> = [0.1, 0.05, 0.02, 0.01]
            .iter()
            .map(|&t| sol.evaluate(1.0, t).unwrap().re.abs())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
    }

    #[test]
    fn case2_members_are_entire_and_real() {
        let p = DiffusionProblem::new(2.5, 0, 1.0, 1.0, 0.5, 0.1, 0.0).unwrap();
        let sol = solve(&p).unwrap();
        let PdeRepr::WrightSeriesForm { members } = &sol.repr else {
            unreachable!()
        };
        assert_eq!(members.len(), 3);
        for mem in members {
            let v = mem.spec.convergence();
            assert!(v.delta > -1.0 && v.is_entire());
        }
        let u = sol.evaluate(0.8, 0.6).unwrap();
        assert!(u.im.abs() <= 1e-12 * u.norm());
    }

    #[test]
    fn case2_small_t_is_dominated_by_the_leading_member() {
        let p = DiffusionProblem::new(2.5, 0, 1.0, 1.0, 0.5, 0.1, 0.0).unwrap();
        let sol = solve(&p).unwrap();
        let PdeRepr::WrightSeriesForm { members } = &sol.repr else {
            unreachable!()
        };
        let t = 1e-3f64;
        let last = members.last().unwrap();
        let lead = last.spec.coefficient(0).unwrap() * t.powf(last.t_power);
        let total = sol.evaluate(1.0, t).unwrap();
        assert!((total - lead).norm() <= 0.01 * lead.norm());
    }

    #[test]
    fn alpha_two_is_unsupported_off_d2() {
        let p = DiffusionProblem::new(2.0, 0, 0.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(solve(&p), Err(Error::UnsupportedAlpha { alpha: 2.0 }));
    }

    #[test]
    fn d2_variants_differ_in_lower_parameter() {
        let p = DiffusionProblem::new(2.5, 1, 2.0, 1.0, 0.0, 0.0, 0.5).unwrap();
        assert_relative_eq!(p.k_constant(), -0.25);
        let a = solve(&p).unwrap();
        let b = solve_d2(&p, D2Variant::Statement).unwrap();
        let (PdeRepr::D2Form { members: ma, .. }, PdeRepr::D2Form { members: mb, .. }) = (&a.repr, &b.repr) else {
            unreachable!()
        };
        assert_eq!(ma.len(), 3);
        assert_eq!(ma[0].spec.lower()[0].shift.re, 2.5);
        assert_eq!(mb[0].spec.lower()[0].shift.re, 1.5);
        assert_relative_eq!(ma[0].arg_scale, -0.25 * 3.5);
    }

    #[test]
    fn evaluate_rejects_boundary() {
        let sol = corollary_alpha1(&heat(0.0), Branch::Plus).unwrap();
        assert!(matches!(sol.evaluate(0.0, 1.0), Err(Error::OutOfDomain { .. })));
        assert!(matches!(sol.evaluate(1.0, 0.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn problem_json_accepts_complex_constants() {
        let p: DiffusionProblem =
            serde_json::from_str(r#"{"alpha":2.5,"m":1,"d":1,"A":1,"B":0.5,"C":0.1,"a":0,"constants":[1,[0.5,-2]]}"#)
                .unwrap();
        assert_eq!(p.constants, vec![c(1.0), Complex64::new(0.5, -2.0)]);
        let back: DiffusionProblem = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        assert!(
            serde_json::from_str::<DiffusionProblem>(r#"{"alpha":1,"m":0,"d":0,"A":1,"B":0,"C":0,"a":0,"zz":1}"#)
                .is_err()
        );
    }
}
