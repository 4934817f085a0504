//! Central potential families and the two effective views of the radial
//! problem: the effective potential `V_L(r) = U(r) + L^2/(2 m r^2)` and the
//! Clairaut (Binet) potential `W_L(x) = m x^2 / 2 + U(L/(m x))` obtained by
//! the inverse-radius substitution `x = L/(m r)`.
//!
//! Analytic families carry closed-form derivatives up to fourth order;
//! tabulated potentials are differentiated through a natural cubic spline and
//! support orders 0..=2 only.

use crate::error::{Error, Result};
use crate::turning;

/// A central potential `U(r)`.
///
/// The admissible families are those with a unique stable circular orbit:
/// `k r^nu` with `nu > 0`, `-k r^{-nu}` with `0 < nu < 2`, `k ln r`, and
/// well-behaved single-well tabulated data.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// `U(r) = k r^nu + offset`, `k > 0`, `nu > 0`.
    PowerLawPositive { k: f64, nu: f64, offset: f64 },
    /// `U(r) = -k r^{-nu} + offset`, `k > 0`, `0 < nu < 2`.
    PowerLawAttractive { k: f64, nu: f64, offset: f64 },
    /// `U(r) = k ln r + offset`, `k > 0`.
    Logarithmic { k: f64, offset: f64 },
    /// Sampled `U(r_i)` on a strictly increasing positive radius grid,
    /// interpolated by a natural cubic spline (`d2` holds the spline's
    /// second derivatives at the knots).
    Tabulated { r: Vec<f64>, u: Vec<f64>, d2: Vec<f64> },
}

impl PotentialSpec {
    pub fn power_law_positive(k: f64, nu: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidPotential(format!("k must be positive, got {k}")));
        }
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidPotential(format!(
                "positive power law requires nu > 0, got {nu}"
            )));
        }
        Ok(Self::PowerLawPositive { k, nu, offset: 0.0 })
    }

    pub fn power_law_attractive(k: f64, nu: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidPotential(format!("k must be positive, got {k}")));
        }
        if !(nu > 0.0 && nu < 2.0) {
            return Err(Error::InvalidPotential(format!(
                "attractive power law requires 0 < nu < 2, got {nu}"
            )));
        }
        Ok(Self::PowerLawAttractive { k, nu, offset: 0.0 })
    }

    pub fn logarithmic(k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidPotential(format!("k must be positive, got {k}")));
        }
        Ok(Self::Logarithmic { k, offset: 0.0 })
    }

    pub fn tabulated(r: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if r.len() != u.len() {
            return Err(Error::InvalidPotential(format!(
                "radius and value samples differ in length ({} vs {})",
                r.len(),
                u.len()
            )));
        }
        if r.len() < 4 {
            return Err(Error::InvalidPotential(
                "tabulated potential needs at least 4 samples".into(),
            ));
        }
        if !r.iter().all(|v| v.is_finite() && *v > 0.0) || !u.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidPotential(
                "tabulated samples must be finite with r > 0".into(),
            ));
        }
        if r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPotential(
                "tabulated radii must be strictly increasing".into(),
            ));
        }
        let d2 = natural_spline_second_derivatives(&r, &u);
        Ok(Self::Tabulated { r, u, d2 })
    }

    /// Replaces the additive constant. The offset is carried through order-0
    /// evaluations and ignored by every derivative, hence by all dynamics.
    pub fn with_offset(self, offset: f64) -> Self {
        match self {
            Self::PowerLawPositive { k, nu, .. } => Self::PowerLawPositive { k, nu, offset },
            Self::PowerLawAttractive { k, nu, .. } => Self::PowerLawAttractive { k, nu, offset },
            Self::Logarithmic { k, .. } => Self::Logarithmic { k, offset },
            tab @ Self::Tabulated { .. } => tab,
        }
    }

    /// Rebuilds the spec with a new coupling strength, keeping the family.
    pub fn with_coupling(self, k_new: f64) -> Result<Self> {
        match self {
            Self::PowerLawPositive { nu, offset, .. } => {
                Ok(Self::power_law_positive(k_new, nu)?.with_offset(offset))
            }
            Self::PowerLawAttractive { nu, offset, .. } => {
                Ok(Self::power_law_attractive(k_new, nu)?.with_offset(offset))
            }
            Self::Logarithmic { offset, .. } => Ok(Self::logarithmic(k_new)?.with_offset(offset)),
            Self::Tabulated { .. } => Err(Error::InvalidPotential(
                "tabulated potentials have no coupling parameter".into(),
            )),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::PowerLawPositive { .. } => "power-law-positive",
            Self::PowerLawAttractive { .. } => "power-law-attractive",
            Self::Logarithmic { .. } => "logarithmic",
            Self::Tabulated { .. } => "tabulated",
        }
    }

    /// `d^order U / dr^order` at `r`.
    ///
    /// Analytic families support orders 0..=4 in closed form; tabulated
    /// potentials support orders 0..=2 through the cubic spline.
    pub fn eval(&self, r: f64, order: usize) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::NonPositiveRadius(r));
        }
        if order > 4 {
            return Err(Error::UnsupportedDerivativeOrder { order, family: self.family_name() });
        }
        match self {
            Self::PowerLawPositive { k, nu, offset } => Ok(if order == 0 {
                k * r.powf(*nu) + offset
            } else {
                k * falling(*nu, order) * r.powf(nu - order as f64)
            }),
            Self::PowerLawAttractive { k, nu, offset } => Ok(if order == 0 {
                -k * r.powf(-nu) + offset
            } else {
                -k * falling(-nu, order) * r.powf(-nu - order as f64)
            }),
            Self::Logarithmic { k, offset } => Ok(match order {
                0 => k * r.ln() + offset,
                // d^n ln r / dr^n = (-1)^{n-1} (n-1)! r^{-n}
                n => k * neg_pow(n - 1) * factorial(n - 1) * r.powi(-(n as i32)),
            }),
            Self::Tabulated { r: rs, u, d2 } => {
                if order > 2 {
                    return Err(Error::UnsupportedDerivativeOrder {
                        order,
                        family: self.family_name(),
                    });
                }
                if r < rs[0] || r > rs[rs.len() - 1] {
                    return Err(Error::DomainError(format!(
                        "radius {r} outside tabulated range [{}, {}]",
                        rs[0],
                        rs[rs.len() - 1]
                    )));
                }
                Ok(spline_eval(rs, u, d2, r)[order])
            }
        }
    }
}

impl std::str::FromStr for PotentialSpec {
    type Err = Error;

    /// Parses the CLI potential grammar, case-insensitively:
    ///
    /// ```text
    /// powerlaw:+,nu=<float>,k=<float>
    /// powerlaw:-,nu=<float>,k=<float>
    /// log:k=<float>
    /// ```
    ///
    /// Keys may come in any order; unknown or repeated keys are rejected.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (head, rest) = lower
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("missing ':' in potential spec '{s}'")))?;
        match head {
            "powerlaw" => {
                let mut parts = rest.split(',');
                let sign = parts.next().unwrap_or("");
                if sign != "+" && sign != "-" {
                    return Err(Error::Parse(format!(
                        "power law sign must be '+' or '-', got '{sign}'"
                    )));
                }
                let kv = parse_keys(parts, &["nu", "k"])?;
                let nu = kv[0];
                let k = kv[1];
                if sign == "+" {
                    Self::power_law_positive(k, nu)
                } else {
                    Self::power_law_attractive(k, nu)
                }
            }
            "log" => {
                let kv = parse_keys(rest.split(','), &["k"])?;
                Self::logarithmic(kv[0])
            }
            other => Err(Error::Parse(format!("unknown potential family '{other}'"))),
        }
    }
}

/// Collects `key=value` pairs, requiring exactly the expected keys.
fn parse_keys<'a>(
    parts: impl Iterator<Item = &'a str>,
    expected: &[&str],
) -> Result<Vec<f64>> {
    let mut values: Vec<Option<f64>> = vec![None; expected.len()];
    for part in parts {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got '{part}'")))?;
        let key = key.trim();
        let idx = expected
            .iter()
            .position(|e| *e == key)
            .ok_or_else(|| Error::Parse(format!("unknown key '{key}'")))?;
        if values[idx].is_some() {
            return Err(Error::Parse(format!("repeated key '{key}'")));
        }
        let parsed: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("invalid number '{value}' for key '{key}'")))?;
        if !parsed.is_finite() {
            return Err(Error::Parse(format!("non-finite value for key '{key}'")));
        }
        values[idx] = Some(parsed);
    }
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::Parse(format!("missing key '{}'", expected[i]))))
        .collect()
}

/// `t - ((1+t)^p - 1) / p`, the O(t^2) gap between a power term and its
/// tangent at `t = 0`. Summed by the binomial series for small `t`, where
/// the direct form loses the leading digits.
fn power_gap(p: f64, t: f64) -> f64 {
    if t.abs() <= 0.25 {
        // -(sum_{k>=2} binom(p,k)/p t^k), coefficients by recurrence.
        let mut coeff = 0.5 * (p - 1.0);
        let mut power = t * t;
        let mut acc = 0.0;
        for k in 2..80 {
            let term = coeff * power;
            acc += term;
            if term.abs() <= 1e-18 * acc.abs() {
                break;
            }
            coeff *= (p - k as f64) / (k as f64 + 1.0);
            power *= t;
        }
        -acc
    } else {
        t - f64::exp_m1(p * t.ln_1p()) / p
    }
}

/// `t - ln(1+t)`, by series for small `t`.
fn log_gap(t: f64) -> f64 {
    if t.abs() <= 0.25 {
        let mut power = t * t;
        let mut acc = 0.0;
        let mut sign = 1.0;
        for k in 2..80 {
            let term = sign * power / k as f64;
            acc += term;
            if term.abs() <= 1e-18 * acc.abs() {
                break;
            }
            sign = -sign;
            power *= t;
        }
        acc
    } else {
        t - t.ln_1p()
    }
}

/// Product nu (nu-1) ... (nu-n+1).
fn falling(nu: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, j| acc * (nu - j as f64))
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, j| acc * j as f64)
}

fn neg_pow(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Second derivatives of the natural cubic spline through `(xs, ys)`,
/// by the standard tridiagonal sweep.
fn natural_spline_second_derivatives(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut d2 = vec![0.0; n];
    let mut gamma = vec![0.0; n];
    for i in 1..n - 1 {
        let sig = (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1]);
        let p = sig * d2[i - 1] + 2.0;
        d2[i] = (sig - 1.0) / p;
        let rhs = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
            - (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
        gamma[i] = (6.0 * rhs / (xs[i + 1] - xs[i - 1]) - sig * gamma[i - 1]) / p;
    }
    d2[n - 1] = 0.0;
    for i in (0..n - 1).rev() {
        d2[i] = d2[i] * d2[i + 1] + gamma[i];
    }
    d2
}

/// Value, first and second derivative of the natural cubic spline at `x`.
/// The spline is C2, so root solves against these values see no stencil
/// switching.
fn spline_eval(xs: &[f64], ys: &[f64], d2: &[f64], x: f64) -> [f64; 3] {
    let n = xs.len();
    let hi = xs.partition_point(|v| *v < x).clamp(1, n - 1);
    let lo = hi - 1;
    let h = xs[hi] - xs[lo];
    let a = (xs[hi] - x) / h;
    let b = (x - xs[lo]) / h;
    let value = a * ys[lo]
        + b * ys[hi]
        + ((a * a * a - a) * d2[lo] + (b * b * b - b) * d2[hi]) * h * h / 6.0;
    let first = (ys[hi] - ys[lo]) / h - (3.0 * a * a - 1.0) / 6.0 * h * d2[lo]
        + (3.0 * b * b - 1.0) / 6.0 * h * d2[hi];
    let second = a * d2[lo] + b * d2[hi];
    [value, first, second]
}

/// A potential bound to a mass and an angular momentum, with the circular
/// orbit already located.
///
/// `R` solves `L^2/m = R^3 U'(R)`; `x0 = L/(m R)` is the equilibrium of the
/// Clairaut potential and `V_R = V_L(R)` the minimum effective energy.
#[derive(Debug, Clone)]
pub struct RadialProblem {
    potential: PotentialSpec,
    m: f64,
    l: f64,
    r_circ: f64,
    x0: f64,
    v_min: f64,
}

impl RadialProblem {
    pub fn new(potential: PotentialSpec, m: f64, l: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::DomainError(format!("mass must be positive, got {m}")));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::DomainError(format!(
                "angular momentum must be positive, got {l}"
            )));
        }
        let r_circ = turning::circular_radius(&potential, m, l)?;
        let x0 = l / (m * r_circ);
        let v_min = potential.eval(r_circ, 0)? + l * l / (2.0 * m * r_circ * r_circ);
        let problem = Self { potential, m, l, r_circ, x0, v_min };
        // Stability of the located circular orbit.
        let v2 = problem.effective_potential(r_circ, 2)?;
        if v2 < 0.0 {
            return Err(Error::UnstableCircularOrbit(v2));
        }
        Ok(problem)
    }

    /// Natural units: m = 1, L = 1.
    pub fn natural(potential: PotentialSpec) -> Result<Self> {
        Self::new(potential, 1.0, 1.0)
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn mass(&self) -> f64 {
        self.m
    }

    pub fn angular_momentum(&self) -> f64 {
        self.l
    }

    pub fn circular_radius(&self) -> f64 {
        self.r_circ
    }

    /// Clairaut equilibrium `x0 = L / (m R)`.
    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// Minimum of the effective potential, `V_R = U(R) + L^2/(2 m R^2)`.
    pub fn v_min(&self) -> f64 {
        self.v_min
    }

    /// Radius corresponding to a Clairaut variable, `r = L / (m x)`.
    pub fn radius_of(&self, x: f64) -> f64 {
        self.l / (self.m * x)
    }

    /// Clairaut variable corresponding to a radius, `x = L / (m r)`.
    pub fn clairaut_of(&self, r: f64) -> f64 {
        self.l / (self.m * r)
    }

    /// `d^order V_L / dr^order` with `V_L(r) = U(r) + L^2/(2 m r^2)`, order 0..=2.
    pub fn effective_potential(&self, r: f64, order: usize) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::NonPositiveRadius(r));
        }
        if order > 2 {
            return Err(Error::UnsupportedDerivativeOrder {
                order,
                family: "effective potential",
            });
        }
        let u = self.potential.eval(r, order)?;
        let l2m = self.l * self.l / self.m;
        let barrier = match order {
            0 => 0.5 * l2m / (r * r),
            1 => -l2m / (r * r * r),
            _ => 3.0 * l2m / (r * r * r * r),
        };
        Ok(u + barrier)
    }

    /// `d^order W_L / dx^order` with `W_L(x) = m x^2 / 2 + U(L/(m x))`,
    /// order 0..=4 (0..=2 for tabulated input).
    pub fn clairaut_potential(&self, x: f64, order: usize) -> Result<f64> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::NonPositiveClairautVariable(x));
        }
        if order > 4 {
            return Err(Error::UnsupportedDerivativeOrder { order, family: "clairaut" });
        }
        let s = self.l / self.m;
        let r = s / x;
        // r(x) = s/x and its derivatives.
        let r1 = -s / (x * x);
        let r2 = 2.0 * s / (x * x * x);
        let r3 = -6.0 * s / (x * x * x * x);
        let r4 = 24.0 * s / (x * x * x * x * x);
        let max_u = order.min(4);
        let mut u = [0.0; 5];
        for (n, slot) in u.iter_mut().enumerate().take(max_u + 1) {
            *slot = self.potential.eval(r, n)?;
        }
        Ok(match order {
            0 => 0.5 * self.m * x * x + u[0],
            1 => self.m * x + u[1] * r1,
            2 => self.m + u[2] * r1 * r1 + u[1] * r2,
            3 => u[3] * r1.powi(3) + 3.0 * u[2] * r1 * r2 + u[1] * r3,
            _ => {
                u[4] * r1.powi(4)
                    + 6.0 * u[3] * r1 * r1 * r2
                    + 3.0 * u[2] * r2 * r2
                    + 4.0 * u[2] * r1 * r3
                    + u[1] * r4
            }
        })
    }

    /// Closed-form Clairaut derivative of arbitrary order for families whose
    /// `W_L` is elementary; `None` for tabulated input.
    ///
    /// Power laws: `W(x) = m x^2/2 + c x^p` with `c = k (L/m)^{\pm nu}` and
    /// `p = -nu` (positive family) or `+nu` (attractive family, `c < 0`).
    pub(crate) fn clairaut_derivative_exact(&self, x: f64, order: usize) -> Option<f64> {
        let s = self.l / self.m;
        let quad = match order {
            0 => 0.5 * self.m * x * x,
            1 => self.m * x,
            2 => self.m,
            _ => 0.0,
        };
        match &self.potential {
            PotentialSpec::PowerLawPositive { k, nu, offset } => {
                let c = k * s.powf(*nu);
                let tail = c * falling(-nu, order) * x.powf(-nu - order as f64);
                Some(quad + tail + if order == 0 { *offset } else { 0.0 })
            }
            PotentialSpec::PowerLawAttractive { k, nu, offset } => {
                let c = -k * s.powf(-nu);
                let tail = c * falling(*nu, order) * x.powf(nu - order as f64);
                Some(quad + tail + if order == 0 { *offset } else { 0.0 })
            }
            PotentialSpec::Logarithmic { k, offset } => Some(match order {
                0 => quad + k * (s / x).ln() + offset,
                // d^n (-k ln x) / dx^n = -k (-1)^{n-1} (n-1)! x^{-n}
                n => quad - k * neg_pow(n - 1) * factorial(n - 1) * x.powi(-(n as i32)),
            }),
            PotentialSpec::Tabulated { .. } => None,
        }
    }

    /// `W_L(x) - V_R`, evaluated without the catastrophic cancellation of
    /// subtracting two O(V_R) quantities.
    ///
    /// Turning-point solves and period integrands live entirely in this
    /// difference; near-circular energies make it many orders of magnitude
    /// smaller than `V_R`. With `u = x - x0`, `t = u/x0` and the power term
    /// written `C x^p`, the stationarity relation `C = -m x0^2 / p` reduces
    /// the analytic families to
    ///
    /// ```text
    /// W(x) - V_R = m u^2 / 2 + m x0^2 (t - ((1+t)^p - 1)/p)
    /// ```
    ///
    /// whose second factor starts at O(t^2) and is summed by series near
    /// `x0`, so the result keeps full relative accuracy arbitrarily close
    /// to the minimum.
    pub fn clairaut_above_min(&self, x: f64) -> f64 {
        self.clairaut_above_min_offset(x - self.x0)
    }

    /// [`Self::clairaut_above_min`] parametrized by the displacement
    /// `u = x - x0` directly.
    ///
    /// Quadratures build `u` from turning-point offsets without ever forming
    /// the absolute `x`, whose float spacing would otherwise quantize the
    /// approach to the turning points.
    pub fn clairaut_above_min_offset(&self, u: f64) -> f64 {
        let x0 = self.x0;
        let t = u / x0;
        let well = self.m * x0 * x0;
        let half_quad = 0.5 * self.m * u * u;
        match &self.potential {
            PotentialSpec::PowerLawPositive { nu, .. } => half_quad + well * power_gap(-nu, t),
            PotentialSpec::PowerLawAttractive { nu, .. } => half_quad + well * power_gap(*nu, t),
            PotentialSpec::Logarithmic { .. } => half_quad + well * log_gap(t),
            PotentialSpec::Tabulated { .. } => self
                .clairaut_potential(x0 + u, 0)
                .map(|w| w - self.v_min)
                .unwrap_or(f64::NAN),
        }
    }

    /// `E - V_L(r)` through the Clairaut substitution, sharing the
    /// cancellation-safe path of [`Self::clairaut_above_min`]:
    /// `V_L(r) = W_L(L/(m r))`.
    pub fn effective_below_energy(&self, r: f64, span: f64) -> f64 {
        span - self.clairaut_above_min(self.clairaut_of(r))
    }

    /// Coefficient `A` of the power-law Clairaut form
    /// `W(x) = m (x^2 ± A x^{∓nu}) / 2`, i.e. `A = 2 (k/m) (L/m)^{±nu}`.
    pub fn power_law_clairaut_coefficient(&self) -> Option<f64> {
        let s = self.l / self.m;
        match &self.potential {
            PotentialSpec::PowerLawPositive { k, nu, .. } => Some(2.0 * (k / self.m) * s.powf(*nu)),
            PotentialSpec::PowerLawAttractive { k, nu, .. } => {
                Some(2.0 * (k / self.m) * s.powf(-nu))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kepler() -> RadialProblem {
        RadialProblem::natural(PotentialSpec::power_law_attractive(1.0, 1.0).unwrap()).unwrap()
    }

    fn hooke() -> RadialProblem {
        RadialProblem::natural(PotentialSpec::power_law_positive(1.0, 2.0).unwrap()).unwrap()
    }

    #[test]
    fn family_invariants_rejected() {
        assert!(PotentialSpec::power_law_positive(1.0, 0.0).is_err());
        assert!(PotentialSpec::power_law_positive(-1.0, 1.0).is_err());
        assert!(PotentialSpec::power_law_attractive(1.0, 2.0).is_err());
        assert!(PotentialSpec::power_law_attractive(1.0, 0.0).is_err());
        assert!(PotentialSpec::logarithmic(0.0).is_err());
        // Non-increasing radii.
        assert!(PotentialSpec::tabulated(vec![1.0, 2.0, 2.0, 3.0], vec![0.0; 4]).is_err());
        assert!(PotentialSpec::tabulated(vec![-1.0, 1.0, 2.0, 3.0], vec![0.0; 4]).is_err());
    }

    #[test]
    fn eval_closed_forms() {
        let att = PotentialSpec::power_law_attractive(1.0, 1.0).unwrap();
        assert_eq!(att.eval(2.0, 0).unwrap(), -0.5);

        let pos = PotentialSpec::power_law_positive(1.0, 2.0).unwrap();
        assert_eq!(pos.eval(3.0, 1).unwrap(), 6.0);

        let log = PotentialSpec::logarithmic(1.0).unwrap();
        assert_eq!(log.eval(1.0, 2).unwrap(), -1.0);
        assert_eq!(log.eval(1.0, 3).unwrap(), 2.0);
        assert_eq!(log.eval(1.0, 4).unwrap(), -6.0);

        assert!(matches!(att.eval(-1.0, 0), Err(Error::NonPositiveRadius(_))));
        assert!(matches!(att.eval(1.0, 5), Err(Error::UnsupportedDerivativeOrder { .. })));
    }

    #[test]
    fn effective_potential_examples() {
        let kep = kepler();
        assert!((kep.effective_potential(1.0, 0).unwrap() + 0.5).abs() < 1e-15);
        assert!(kep.effective_potential(kep.circular_radius(), 1).unwrap().abs() < 1e-13);

        let hk = hooke();
        assert!((hk.effective_potential(1.0, 0).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn clairaut_examples() {
        let kep = kepler();
        // W(x) = (x^2 - 2x)/2, a parabola with unit curvature.
        assert!((kep.clairaut_potential(1.0, 0).unwrap() + 0.5).abs() < 1e-15);
        for x in [0.3, 0.7, 1.0, 1.9, 4.2] {
            assert!((kep.clairaut_potential(x, 2).unwrap() - 1.0).abs() < 1e-12);
        }

        let hk = hooke();
        // W(x) = (x^2 + 2 x^{-2})/2.
        assert!((hk.clairaut_potential(1.0, 0).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn power_law_clairaut_coefficient_closed_form() {
        for (spec, expected) in [
            (PotentialSpec::power_law_attractive(1.0, 1.0).unwrap(), 2.0),
            (PotentialSpec::power_law_positive(1.0, 2.0).unwrap(), 2.0),
            (PotentialSpec::power_law_positive(0.5, 2.0).unwrap(), 1.0),
        ] {
            let p = RadialProblem::natural(spec).unwrap();
            assert!((p.power_law_clairaut_coefficient().unwrap() - expected).abs() < 1e-15);
        }
        // Non-default units: A = 2 (k/m) (L/m)^{nu}.
        let p = RadialProblem::new(PotentialSpec::power_law_positive(0.7, 1.5).unwrap(), 2.0, 3.0)
            .unwrap();
        let a = 2.0 * (0.7 / 2.0) * (3.0f64 / 2.0).powf(1.5);
        assert!((p.power_law_clairaut_coefficient().unwrap() - a).abs() < 1e-15 * a);
    }

    #[test]
    fn clairaut_matches_effective_under_substitution() {
        let problems = [
            kepler(),
            hooke(),
            RadialProblem::new(PotentialSpec::power_law_attractive(2.0, 0.5).unwrap(), 1.5, 0.8)
                .unwrap(),
            RadialProblem::new(PotentialSpec::logarithmic(1.3).unwrap(), 0.9, 1.7).unwrap(),
        ];
        for p in &problems {
            for x in [0.2, 0.5, 1.0, 2.0, 5.0] {
                let w = p.clairaut_potential(x, 0).unwrap();
                let v = p.effective_potential(p.radius_of(x), 0).unwrap();
                let scale = w.abs().max(1.0);
                assert!((w - v).abs() <= 1e-12 * scale, "x={x}: {w} vs {v}");
            }
        }
    }

    #[test]
    fn clairaut_matches_power_law_closed_form() {
        let problems = [kepler(), hooke()];
        for p in &problems {
            let a = p.power_law_clairaut_coefficient().unwrap();
            let sign = match p.potential() {
                PotentialSpec::PowerLawPositive { .. } => 1.0,
                _ => -1.0,
            };
            let nu = match p.potential() {
                PotentialSpec::PowerLawPositive { nu, .. }
                | PotentialSpec::PowerLawAttractive { nu, .. } => *nu,
                _ => unreachable!(),
            };
            for x in [0.25f64, 0.8, 1.0, 1.6, 3.0] {
                let closed = 0.5 * p.mass() * (x * x + sign * a * x.powf(-sign * nu));
                let chain = p.clairaut_potential(x, 0).unwrap();
                assert!((closed - chain).abs() <= 1e-13 * closed.abs().max(1.0));
            }
        }
    }

    #[test]
    fn derivative_orders_consistent_with_finite_differences() {
        let specs = [
            PotentialSpec::power_law_attractive(1.0, 1.3).unwrap(),
            PotentialSpec::power_law_positive(0.8, 2.5).unwrap(),
            PotentialSpec::logarithmic(1.1).unwrap(),
        ];
        for spec in &specs {
            for order in 1..=4usize {
                for r in [0.6, 1.0, 1.9] {
                    let h = 1e-4 * r;
                    let f = |t: f64| spec.eval(t, order - 1).unwrap();
                    let fd = (f(r - 2.0 * h) - 8.0 * f(r - h) + 8.0 * f(r + h)
                        - f(r + 2.0 * h))
                        / (12.0 * h);
                    let exact = spec.eval(r, order).unwrap();
                    let scale = exact.abs().max(1e-6);
                    assert!(
                        ((fd - exact) / scale).abs() < 1e-6,
                        "{} order {order} at r={r}: fd={fd}, exact={exact}",
                        spec.family_name()
                    );
                }
            }
        }
    }

    #[test]
    fn clairaut_derivative_exact_agrees_with_chain_rule() {
        let problems = [
            kepler(),
            hooke(),
            RadialProblem::new(PotentialSpec::power_law_attractive(2.0, 1.5).unwrap(), 1.2, 0.7)
                .unwrap(),
            RadialProblem::natural(PotentialSpec::logarithmic(2.0).unwrap()).unwrap(),
        ];
        for p in &problems {
            for order in 0..=4usize {
                for x in [0.4, 1.0, 2.3] {
                    let exact = p.clairaut_derivative_exact(x, order).unwrap();
                    let chain = p.clairaut_potential(x, order).unwrap();
                    let scale = exact.abs().max(1.0);
                    assert!(
                        (exact - chain).abs() <= 1e-11 * scale,
                        "order {order} x {x}: {exact} vs {chain}"
                    );
                }
            }
        }
    }

    #[test]
    fn tabulated_cubic_reproduces_smooth_potential() {
        let rs: Vec<f64> = (0..200).map(|i| 0.2 + i as f64 * 0.02).collect();
        let us: Vec<f64> = rs.iter().map(|r| -1.0 / r).collect();
        let tab = PotentialSpec::tabulated(rs, us).unwrap();
        for r in [0.5, 1.0, 2.0, 3.5] {
            assert!((tab.eval(r, 0).unwrap() + 1.0 / r).abs() < 1e-5);
            assert!((tab.eval(r, 1).unwrap() - 1.0 / (r * r)).abs() < 1e-3);
        }
        assert!(matches!(
            tab.eval(1.0, 3),
            Err(Error::UnsupportedDerivativeOrder { .. })
        ));
        assert!(tab.eval(0.05, 0).is_err());
    }

    #[test]
    fn offset_ignored_by_dynamics() {
        let base = RadialProblem::natural(PotentialSpec::power_law_attractive(1.0, 1.0).unwrap())
            .unwrap();
        let shifted = RadialProblem::natural(
            PotentialSpec::power_law_attractive(1.0, 1.0).unwrap().with_offset(7.5),
        )
        .unwrap();
        assert_eq!(base.circular_radius(), shifted.circular_radius());
        assert!((shifted.v_min() - base.v_min() - 7.5).abs() < 1e-14);
        for order in 1..=4usize {
            assert_eq!(
                base.clairaut_potential(0.8, order).unwrap(),
                shifted.clairaut_potential(0.8, order).unwrap()
            );
        }
    }

    #[test]
    fn potential_spec_grammar() {
        let p: PotentialSpec = "powerlaw:-,nu=1,k=1".parse().unwrap();
        assert_eq!(p, PotentialSpec::power_law_attractive(1.0, 1.0).unwrap());
        // Case-insensitive, keys in any order, surrounding space tolerated.
        let p: PotentialSpec = " PowerLaw:+,K=0.5,NU=2 ".parse().unwrap();
        assert_eq!(p, PotentialSpec::power_law_positive(0.5, 2.0).unwrap());
        let p: PotentialSpec = "log:k=2.5".parse().unwrap();
        assert_eq!(p, PotentialSpec::logarithmic(2.5).unwrap());

        for bad in [
            "",
            "powerlaw",
            "powerlaw:*,nu=1,k=1",
            "powerlaw:-,nu=1",
            "powerlaw:-,nu=1,k=1,b=0",
            "powerlaw:-,nu=1,k=1,k=2",
            "powerlaw:-,nu=abc,k=1",
            "powerlaw:-,nu=inf,k=1",
            "log:k=-1",
            "hooke:k=1",
            "powerlaw:-,nu=2,k=1",
        ] {
            assert!(bad.parse::<PotentialSpec>().is_err(), "accepted '{bad}'");
        }
    }

    #[test]
    fn above_min_matches_naive_subtraction_away_from_x0() {
        let problems = [
            kepler(),
            hooke(),
            RadialProblem::new(PotentialSpec::power_law_attractive(1.7, 0.6).unwrap(), 1.3, 0.9)
                .unwrap(),
            RadialProblem::natural(PotentialSpec::logarithmic(2.2).unwrap()).unwrap(),
        ];
        for p in &problems {
            for x in [0.3, 0.8, 1.1, 2.5] {
                let safe = p.clairaut_above_min(x);
                let naive = p.clairaut_potential(x, 0).unwrap() - p.v_min();
                assert!(
                    (safe - naive).abs() <= 1e-12 * naive.abs().max(1.0),
                    "x={x}: {safe} vs {naive}"
                );
            }
        }
    }

    #[test]
    fn above_min_is_quadratic_near_x0() {
        // W(x) - V_R = W''(x0) (x - x0)^2 / 2 + O((x - x0)^3); the safe form
        // must keep relative accuracy where the naive subtraction loses all
        // digits.
        for p in [kepler(), hooke()] {
            let w2 = p.clairaut_potential(p.x0(), 2).unwrap();
            for eps in [1e-5, 1e-7, 1e-9] {
                let x = p.x0() + eps;
                let safe = p.clairaut_above_min(x);
                let quad = 0.5 * w2 * eps * eps;
                assert!(
                    ((safe - quad) / quad).abs() < 1e-3,
                    "eps={eps}: {safe} vs {quad}"
                );
            }
        }
    }

    #[test]
    fn problem_invariants_hold() {
        for p in [kepler(), hooke()] {
            // V_L'(R) = 0, W'(x0) = 0, x0 = L/(m R).
            assert!(p.effective_potential(p.circular_radius(), 1).unwrap().abs() < 1e-12);
            assert!(p.clairaut_potential(p.x0(), 1).unwrap().abs() < 1e-12);
            assert!((p.x0() - p.angular_momentum() / (p.mass() * p.circular_radius())).abs() < 1e-15);
        }
    }
}
