//! Circular orbits and turning points of the Clairaut motion.
//!
//! The Clairaut potential of every in-scope family is a single well around
//! `x0`, so turning points at energy `E > V_R` are bracketed by geometric
//! expansion away from `x0` and refined by bisection plus one Newton polish.

use crate::error::{Error, Result};
use crate::potentials::{PotentialSpec, RadialProblem};

/// Relative width of the degenerate-energy window around `V_R`.
pub const DEGENERATE_WINDOW: f64 = 1e-12;

/// Turning pair of the Clairaut oscillation at energy `E`:
/// `x_lt = L/(m r_max) <= x0 <= x_gt = L/(m r_min)` with
/// `W_L(x_lt) = W_L(x_gt) = E` to solver tolerance.
#[derive(Debug, Clone, Copy)]
pub struct TurningPair {
    pub x_lt: f64,
    pub x_gt: f64,
    pub energy: f64,
    /// Solver iterations spent on the (left, right) branch.
    pub iterations: (usize, usize),
}

impl TurningPair {
    pub fn delta_x(&self) -> f64 {
        self.x_gt - self.x_lt
    }

    pub fn is_degenerate(&self) -> bool {
        self.x_gt == self.x_lt
    }

    /// Pericentral radius `r_min = L/(m x_gt)`.
    pub fn r_min(&self, problem: &RadialProblem) -> f64 {
        problem.radius_of(self.x_gt)
    }

    /// Apocentral radius `r_max = L/(m x_lt)`.
    pub fn r_max(&self, problem: &RadialProblem) -> f64 {
        problem.radius_of(self.x_lt)
    }
}

/// Radius of the circular orbit: the solution of `L^2/m = R^3 U'(R)`.
///
/// Power laws use the closed form `R = (L^2/(nu k m))^{1/(±nu+2)}`; the
/// logarithmic family gives `R = L/sqrt(k m)`; tabulated input is solved by
/// bracketing the unique sign change of `V_L'`.
pub fn circular_radius(spec: &PotentialSpec, m: f64, l: f64) -> Result<f64> {
    let l2m = l * l / m;
    match spec {
        PotentialSpec::PowerLawPositive { k, nu, .. } => {
            Ok((l2m / (nu * k)).powf(1.0 / (nu + 2.0)))
        }
        PotentialSpec::PowerLawAttractive { k, nu, .. } => {
            Ok((l2m / (nu * k)).powf(1.0 / (2.0 - nu)))
        }
        PotentialSpec::Logarithmic { k, .. } => Ok(l / (k * m).sqrt()),
        PotentialSpec::Tabulated { r, .. } => {
            // V_L'(r) = U'(r) - L^2/(m r^3); find its unique sign change.
            let g = |rr: f64| -> Result<f64> { Ok(spec.eval(rr, 1)? - l2m / (rr * rr * rr)) };
            let interior = &r[1..r.len() - 1];
            let mut bracket = None;
            let mut crossings = 0usize;
            let mut prev = g(interior[0])?;
            for pair in interior.windows(2) {
                let cur = g(pair[1])?;
                if prev < 0.0 && cur >= 0.0 {
                    crossings += 1;
                    if bracket.is_none() {
                        bracket = Some((pair[0], pair[1]));
                    }
                }
                prev = cur;
            }
            if crossings > 1 {
                return Err(Error::NoCircularOrbit(
                    "tabulated effective potential has several minima".into(),
                ));
            }
            let (mut lo, mut hi) =
                bracket.ok_or_else(|| Error::NoCircularOrbit("no bracket for V_L' = 0".into()))?;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(mid)? < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-14 * hi.max(1.0) {
                    break;
                }
            }
            let root = 0.5 * (lo + hi);
            let residual = (l2m - root.powi(3) * spec.eval(root, 1)?).abs();
            if residual > 1e-10 * l2m.abs().max(1.0) {
                return Err(Error::NoCircularOrbit(format!(
                    "stationarity residual {residual:e} too large"
                )));
            }
            Ok(root)
        }
    }
}

/// Turning points of `W_L(x) = E`.
///
/// Energies inside the degenerate window collapse to the exact pair
/// `(x0, x0)`; attractive power laws reject `E >= 0` as unbounded.
pub fn turning_points(problem: &RadialProblem, energy: f64) -> Result<TurningPair> {
    let v_min = problem.v_min();
    if energy < v_min {
        return Err(Error::EnergyBelowMinimum { energy, v_min });
    }
    if let PotentialSpec::PowerLawAttractive { offset, .. } = problem.potential() {
        // W_{-nu}(x) -> offset as x -> 0+, the escape threshold.
        if energy >= *offset {
            return Err(Error::UnboundedOrbit(energy));
        }
    }
    let window = DEGENERATE_WINDOW * v_min.abs().max(1.0);
    let x0 = problem.x0();
    let span = energy - v_min;
    if span <= window {
        return Ok(TurningPair { x_lt: x0, x_gt: x0, energy, iterations: (0, 0) });
    }

    // Solve (W - V_R)(x) = span in the cancellation-safe difference, so the
    // residual stays relative to the oscillation scale rather than to V_R.
    let w = |x: f64| problem.clairaut_above_min(x);
    let dw = |x: f64| problem.clairaut_potential(x, 1).expect("positive probe");

    let (x_lt, it_left) = solve_branch(&w, &dw, x0, span, Side::Left)?;
    let (x_gt, it_right) = solve_branch(&w, &dw, x0, span, Side::Right)?;

    let scale = energy.abs().max(1.0);
    for x in [x_lt, x_gt] {
        let res = (w(x) - span).abs();
        if res > 1e-12 * scale {
            return Err(Error::ToleranceNotMet { requested: 1e-12 * scale, achieved: res });
        }
    }
    Ok(TurningPair { x_lt, x_gt, energy, iterations: (it_left, it_right) })
}

enum Side {
    Left,
    Right,
}

/// Bracket `W(x) = e` on one side of `x0` by geometric expansion, bisect to
/// a 1e-14-wide interval, then apply one guarded Newton step.
///
/// `W` is monotone on each side of `x0` for every in-scope family, so the
/// first probe with `W >= e` closes the bracket.
fn solve_branch(
    w: &impl Fn(f64) -> f64,
    dw: &impl Fn(f64) -> f64,
    x0: f64,
    e: f64,
    side: Side,
) -> Result<(f64, usize)> {
    let mut iterations = 0usize;
    // `near` keeps W(near) - e < 0; expand `far` away from x0.
    let mut near = x0;
    let far = loop {
        iterations += 1;
        if iterations > 600 {
            return Err(Error::UnboundedOrbit(e));
        }
        let probe = match side {
            Side::Left => 0.5 * near,
            Side::Right => 2.0 * near,
        };
        if w(probe) - e >= 0.0 {
            break probe;
        }
        near = probe;
    };
    // Bisect with a: W - e <= 0, b: W - e >= 0.
    let (mut a, mut b) = (near, far);
    while (b - a).abs() > 1e-14 {
        iterations += 1;
        let mid = 0.5 * (a + b);
        if mid == a || mid == b || iterations > 400 {
            break;
        }
        if w(mid) - e <= 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mut root = 0.5 * (a + b);
    let width = (b - a).abs();
    let slope = dw(root);
    if slope != 0.0 {
        let newton = root - (w(root) - e) / slope;
        if newton.is_finite() && newton > 0.0 && (newton - root).abs() <= 10.0 * width.max(1e-13) {
            root = newton;
        }
    }
    Ok((root, iterations))
}

/// Limit apsidal angle near the circular orbit of radius `R`:
/// `Phi_C = pi sqrt(U'(R) / (R U''(R) + 3 U'(R)))`.
///
/// Power laws give the radius-independent value `pi / sqrt(2 ± nu)`.
pub fn circular_apsidal(spec: &PotentialSpec, r: f64) -> Result<f64> {
    let u1 = spec.eval(r, 1)?;
    let u2 = spec.eval(r, 2)?;
    let denom = r * u2 + 3.0 * u1;
    if denom <= 0.0 {
        return Err(Error::UnstableCircularOrbit(denom));
    }
    if u1 <= 0.0 {
        return Err(Error::NoCircularOrbit(format!("U'({r}) = {u1} is not positive")));
    }
    Ok(std::f64::consts::PI * (u1 / denom).sqrt())
}

/// Curvature data of the Clairaut well at its minimum.
#[derive(Debug, Clone, Copy)]
pub struct Curvature {
    /// Squared angular frequency of small Clairaut oscillations,
    /// `omega^2 = W''(x0)/m`.
    pub omega_sq: f64,
    /// `W''(x0) = m (R U''(R) + 3 U'(R)) / U'(R)`.
    pub w_second: f64,
}

pub fn curvature(problem: &RadialProblem) -> Result<Curvature> {
    let r = problem.circular_radius();
    let u1 = problem.potential().eval(r, 1)?;
    let u2 = problem.potential().eval(r, 2)?;
    if u1 <= 0.0 {
        return Err(Error::NoCircularOrbit(format!("U'({r}) = {u1} is not positive")));
    }
    let w_second = problem.mass() * (r * u2 + 3.0 * u1) / u1;
    if w_second <= 0.0 {
        return Err(Error::UnstableCircularOrbit(w_second));
    }
    Ok(Curvature { omega_sq: w_second / problem.mass(), w_second })
}
