//! Semi-derivative and semi-integral operators on energy functions, and the
//! inversion of a period law into the turning-point width.
//!
//! With base point `V_R` (the effective minimum), the two operators are
//!
//! ```text
//! D^{ 1/2} g(E) = (1/sqrt(pi)) ∫_{V_R}^{E} g'(w) / sqrt(E - w) dw
//! D^{-1/2} g(E) = (1/sqrt(pi)) ∫_{V_R}^{E} g(w)  / sqrt(E - w) dw
//! ```
//!
//! The semi-derivative requires `g(V_R) = 0`; the semi-integral acts on
//! functions bounded near `V_R`. They are mutual inverses on those sets,
//! which is what turns the apsidal-angle law `Phi(E, L)` back into the
//! width `Delta x(E) = x_>(E) - x_<(E)` of the Clairaut oscillation:
//!
//! ```text
//! Phi(E, L) = sqrt(m pi / 2) D^{1/2} Delta x(E)
//! Delta x(E) = sqrt(2 / (m pi)) D^{-1/2} Phi(E, L)
//! ```
//!
//! Note that `D^{-1/2}` applied to the constant 1 gives
//! `(2/sqrt(pi)) sqrt(E - V_R)`, the value forced by the definition above;
//! a constant apsidal law `Phi_C` therefore inverts to
//! `Delta x = alpha_L sqrt(E - V_R)` with
//! `alpha_L = sqrt(2/m) * 2 Phi_C / pi`.
//!
//! Both operators remove the kernel singularity with the shared
//! `w = V_R + (E - V_R) sin^2(theta)` substitution, so integrands that
//! diverge like `(w - V_R)^{-1/2}` at the base (every generic `Delta x'`)
//! stay bounded. Quadrature nodes are handed to the function as offsets
//! `delta = w - V_R`, which the substitution produces exactly; recomputing
//! `w - V_R` from the absolute energy would lose every significant digit
//! once `delta` drops below the float spacing of `V_R`.

use crate::error::{Error, Result};
use crate::potentials::RadialProblem;
use crate::quadrature;
use crate::turning::{self, TurningPair};

/// Behavior of an energy function at its base point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularity {
    /// `g(base) = 0`; admissible for the semi-derivative.
    VanishesAtBase,
    /// `g` bounded near `base`; admissible for the semi-integral.
    BoundedAtBase,
}

type DynFn<'a> = Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>;

/// A function of energy on `[base, ∞)` with a declared base regularity and
/// an optional analytic derivative.
///
/// Internally the function maps the offset `delta = w - base`; the
/// `vanishing` / `bounded` constructors wrap closures over absolute energy,
/// while the `*_offset` variants accept the offset form directly (preferred
/// for laws that are singular or rapidly varying at the base).
pub struct EnergyFunction<'a> {
    eval_offset: DynFn<'a>,
    deriv_offset: Option<DynFn<'a>>,
    base: f64,
    regularity: Regularity,
}

impl<'a> EnergyFunction<'a> {
    pub fn vanishing(base: f64, eval: impl Fn(f64) -> f64 + Send + Sync + 'a) -> Self {
        Self::vanishing_offset(base, move |delta| eval(base + delta))
    }

    pub fn bounded(base: f64, eval: impl Fn(f64) -> f64 + Send + Sync + 'a) -> Self {
        Self::bounded_offset(base, move |delta| eval(base + delta))
    }

    /// `eval(delta) = g(base + delta)` with `g(base) = 0`.
    pub fn vanishing_offset(base: f64, eval: impl Fn(f64) -> f64 + Send + Sync + 'a) -> Self {
        Self {
            eval_offset: Box::new(eval),
            deriv_offset: None,
            base,
            regularity: Regularity::VanishesAtBase,
        }
    }

    /// `eval(delta) = g(base + delta)` with `g` bounded near the base.
    pub fn bounded_offset(base: f64, eval: impl Fn(f64) -> f64 + Send + Sync + 'a) -> Self {
        Self {
            eval_offset: Box::new(eval),
            deriv_offset: None,
            base,
            regularity: Regularity::BoundedAtBase,
        }
    }

    /// Attaches an analytic derivative `g'(w)` over absolute energy.
    pub fn with_derivative(self, deriv: impl Fn(f64) -> f64 + Send + Sync + 'a) -> Self {
        let base = self.base;
        self.with_derivative_offset(move |delta| deriv(base + delta))
    }

    /// Attaches an analytic derivative in offset form,
    /// `deriv(delta) = g'(base + delta)`.
    pub fn with_derivative_offset(
        mut self,
        deriv: impl Fn(f64) -> f64 + Send + Sync + 'a,
    ) -> Self {
        self.deriv_offset = Some(Box::new(deriv));
        self
    }

    pub fn eval(&self, w: f64) -> f64 {
        (self.eval_offset)(w - self.base)
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn regularity(&self) -> Regularity {
        self.regularity
    }

    fn eval_at_offset(&self, delta: f64) -> f64 {
        (self.eval_offset)(delta)
    }

    /// `g'(base + delta)`: analytic when supplied, otherwise 4th-order
    /// central differences with step `h = 1e-6 * max(1, span)`, the stencil
    /// clamped away from the base point.
    fn derivative_at_offset(&self, delta: f64, span: f64) -> f64 {
        if let Some(d) = &self.deriv_offset {
            return d(delta);
        }
        let h = 1e-6 * span.abs().max(1.0);
        let delta = delta.max(2.0 * h);
        let f = &self.eval_offset;
        (f(delta - 2.0 * h) - 8.0 * f(delta - h) + 8.0 * f(delta + h) - f(delta + 2.0 * h))
            / (12.0 * h)
    }
}

const INV_SQRT_PI: f64 = 0.564_189_583_547_756_3;

fn check_span(g: &EnergyFunction, e: f64) -> Result<f64> {
    let span = e - g.base();
    if span < 0.0 {
        return Err(Error::DomainError(format!(
            "energy {e} below the operator base {}",
            g.base()
        )));
    }
    Ok(span)
}

/// `D^{1/2} g(E)`.
pub fn semi_derivative(g: &EnergyFunction, e: f64, tol: f64) -> Result<f64> {
    if g.regularity() != Regularity::VanishesAtBase {
        return Err(Error::RegularityViolation(
            "semi-derivative requires a function vanishing at the base point",
        ));
    }
    let span = check_span(g, e)?;
    if span == 0.0 {
        return Ok(0.0);
    }
    // After w = base + span sin^2(theta):
    //   (1/sqrt(pi)) ∫ g'(w) dw / sqrt(E - w)
    //     = (sqrt(span)/sqrt(pi)) ∫_0^{pi/2} 2 sin(theta) g'(w(theta)) dtheta
    let integrand = |theta: f64| {
        let s = theta.sin();
        2.0 * s * g.derivative_at_offset(span * s * s, span)
    };
    let prefactor = INV_SQRT_PI * span.sqrt();
    let q =
        quadrature::integrate(integrand, 0.0, std::f64::consts::FRAC_PI_2, tol / prefactor)?;
    Ok(prefactor * q.value)
}

/// `D^{-1/2} g(E)`.
pub fn semi_integral(g: &EnergyFunction, e: f64, tol: f64) -> Result<f64> {
    if g.regularity() != Regularity::BoundedAtBase {
        return Err(Error::RegularityViolation(
            "semi-integral requires a function bounded at the base point",
        ));
    }
    let span = check_span(g, e)?;
    if span == 0.0 {
        return Ok(0.0);
    }
    let integrand = |theta: f64| {
        let s = theta.sin();
        2.0 * s * g.eval_at_offset(span * s * s)
    };
    let prefactor = INV_SQRT_PI * span.sqrt();
    let q =
        quadrature::integrate(integrand, 0.0, std::f64::consts::FRAC_PI_2, tol / prefactor)?;
    Ok(prefactor * q.value)
}

/// Width of the Clairaut oscillation recovered from a period law:
/// `Delta x(E) = sqrt(2/(m pi)) D^{-1/2} Phi(E, L)`.
///
/// The law's base point must be the problem's effective minimum.
pub fn invert_period(
    phi: &EnergyFunction,
    problem: &RadialProblem,
    e: f64,
    tol: f64,
) -> Result<f64> {
    let v_min = problem.v_min();
    if (phi.base() - v_min).abs() > 1e-9 * v_min.abs().max(1.0) {
        return Err(Error::DomainError(format!(
            "period law base {} does not match the effective minimum {v_min}",
            phi.base()
        )));
    }
    let prefactor = (2.0 / (problem.mass() * std::f64::consts::PI)).sqrt();
    let d = semi_integral(phi, e, tol / prefactor)?;
    Ok(prefactor * d)
}

/// Branch reconstruction under the symmetry assumption `W_L` even about
/// `x0`: `x_> = x0 + Delta x / 2`, `x_< = x0 - Delta x / 2`.
///
/// The result matches `turning::turning_points` only when the assumption
/// actually holds (the Clairaut parabola of the Newton potential); for any
/// other potential it is one member of the infinite family of widths
/// compatible with the same period law.
pub fn symmetric_branches(
    phi: &EnergyFunction,
    problem: &RadialProblem,
    e: f64,
    tol: f64,
) -> Result<TurningPair> {
    let delta = invert_period(phi, problem, e, tol)?;
    let x0 = problem.x0();
    Ok(TurningPair {
        x_lt: x0 - 0.5 * delta,
        x_gt: x0 + 0.5 * delta,
        energy: e,
        iterations: (0, 0),
    })
}

/// Convenience: the width `x_>(E) - x_<(E)` computed from the dynamics, for
/// round trips against [`invert_period`].
pub fn turning_width(problem: &RadialProblem, e: f64) -> Result<f64> {
    Ok(turning::turning_points(problem, e)?.delta_x())
}
