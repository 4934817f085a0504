//! Trajectory integration in both formulations and orbit classification.
//!
//! The same motion can be integrated as a radial problem in time,
//!
//! ```text
//! r''(t) = -V_L'(r)/m,   phi'(t) = L/(m r^2)
//! ```
//!
//! or as Clairaut motion in the angle,
//!
//! ```text
//! x''(phi) = -W_L'(x)/m
//! ```
//!
//! Both use an adaptive Dormand-Prince 5(4) pair with an energy monitor:
//! the run fails if the conserved quantity drifts beyond `100 * tol`, and
//! the recorded drift is expected to stay within `tol * max(1, |E|)`.
//! Traces start at an apocenter (`x(0) = x_<`, `r(0) = r_max`) with zero
//! radial velocity.
//!
//! Closure classification works on the quadrature apsidal angle, not on the
//! integrated trace: a bounded orbit closes iff `Phi/pi` is rational with a
//! small denominator, found through continued-fraction convergents.

use crate::apsidal;
use crate::error::{Error, Result};
use crate::potentials::{PotentialSpec, RadialProblem};
use crate::turning;

/// Which dynamical formulation produced a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    /// `x(phi)` Clairaut motion; the parameter is the polar angle.
    Binet,
    /// `(r, phi)(t)` radial motion; the parameter is time.
    Radial,
}

impl Formulation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Binet => "binet",
            Self::Radial => "radial",
        }
    }
}

/// One accepted integration step.
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    /// `phi` (Binet) or `t` (radial).
    pub param: f64,
    /// `x` (Binet) or `r` (radial).
    pub pos: f64,
    /// `dx/dphi` or `dr/dt`.
    pub deriv: f64,
    /// Polar angle; equals `param` for Binet traces.
    pub angle: f64,
    /// Conserved energy evaluated at this state.
    pub energy: f64,
}

/// Closure classification of a bounded orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitClass {
    Circular,
    /// Closed after `p` revolutions and `q` radial oscillations.
    Closed { p: u64, q: u64 },
    Rosette,
    Unbounded,
}

impl OrbitClass {
    pub fn label(&self) -> String {
        match self {
            Self::Circular => "circular".into(),
            Self::Closed { p, q } => format!("closed({p},{q})"),
            Self::Rosette => "rosette".into(),
            Self::Unbounded => "unbounded".into(),
        }
    }
}

/// Integrated trajectory with conservation diagnostics.
#[derive(Debug, Clone)]
pub struct OrbitTrace {
    pub formulation: Formulation,
    pub samples: Vec<Sample>,
    pub e0: f64,
    pub angular_momentum: f64,
    /// `max_i |E(sample_i) - E0|`.
    pub energy_drift: f64,
    pub closure: OrbitClass,
}

impl OrbitTrace {
    /// Cubic Hermite interpolation of `(pos, deriv)` at a parameter value
    /// inside the trace.
    pub fn sample_at(&self, param: f64) -> Option<(f64, f64)> {
        let samples = &self.samples;
        if samples.len() < 2 {
            return None;
        }
        let last = samples.len() - 1;
        if param < samples[0].param || param > samples[last].param {
            return None;
        }
        let idx = samples.partition_point(|s| s.param < param).clamp(1, last);
        let (a, b) = (&samples[idx - 1], &samples[idx]);
        Some(hermite(a.param, a.pos, a.deriv, b.param, b.pos, b.deriv, param))
    }

    /// Position as a function of polar angle. Binet traces interpolate
    /// directly; radial traces invert the monotone `phi(t)` first.
    pub fn position_at_angle(&self, problem: &RadialProblem, phi: f64) -> Option<f64> {
        match self.formulation {
            Formulation::Binet => self.sample_at(phi).map(|(x, _)| x),
            Formulation::Radial => {
                let samples = &self.samples;
                let last = samples.len().checked_sub(1)?;
                if samples.len() < 2 || phi < samples[0].angle || phi > samples[last].angle {
                    return None;
                }
                let idx = samples.partition_point(|s| s.angle < phi).clamp(1, last);
                let (a, b) = (&samples[idx - 1], &samples[idx]);
                // phi(t) has the known derivative L/(m r^2); bisect the
                // Hermite model of phi(t) for the crossing time.
                let lm = problem.angular_momentum() / problem.mass();
                let dphi = |s: &Sample| lm / (s.pos * s.pos);
                let (mut lo, mut hi) = (a.param, b.param);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let (val, _) =
                        hermite(a.param, a.angle, dphi(a), b.param, b.angle, dphi(b), mid);
                    if val < phi {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-15 * hi.abs().max(1.0) {
                        break;
                    }
                }
                let t = 0.5 * (lo + hi);
                Some(hermite(a.param, a.pos, a.deriv, b.param, b.pos, b.deriv, t).0)
            }
        }
    }

    /// Interior extrema of the position, `(param, pos)` pairs refined on
    /// the Hermite model wherever the stored derivative changes sign.
    pub fn position_extrema(&self) -> Vec<(f64, f64)> {
        let mut found = Vec::new();
        for pair in self.samples.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.deriv == 0.0 && a.param != self.samples[0].param {
                found.push((a.param, a.pos));
                continue;
            }
            if a.deriv * b.deriv < 0.0 {
                let (mut lo, mut hi) = (a.param, b.param);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let (_, slope) =
                        hermite(a.param, a.pos, a.deriv, b.param, b.pos, b.deriv, mid);
                    if slope * a.deriv > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-14 * hi.abs().max(1.0) {
                        break;
                    }
                }
                let at = 0.5 * (lo + hi);
                let (pos, _) = hermite(a.param, a.pos, a.deriv, b.param, b.pos, b.deriv, at);
                found.push((at, pos));
            }
        }
        found
    }
}

/// Hermite cubic through `(t0, y0, d0)` and `(t1, y1, d1)`, returning
/// `(value, derivative)` at `t`.
#[allow(clippy::too_many_arguments)]
fn hermite(t0: f64, y0: f64, d0: f64, t1: f64, y1: f64, d1: f64, t: f64) -> (f64, f64) {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let dh00 = (6.0 * s2 - 6.0 * s) / h;
    let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
    let dh01 = (-6.0 * s2 + 6.0 * s) / h;
    let dh11 = 3.0 * s2 - 2.0 * s;
    let deriv = dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1;
    (value, deriv)
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Difference between the 5th- and embedded 4th-order weights.
const ERR: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Internal step tolerance is this much tighter than the caller's drift
/// tolerance; local truncation errors accumulate over many steps.
const STEP_TOL_FACTOR: f64 = 1e-2;

/// Adaptive Dormand-Prince 5(4) driver with a per-step callback.
fn integrate_adaptive<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    t_end: f64,
    y0: [f64; N],
    tol: f64,
    on_step: &mut impl FnMut(f64, &[f64; N]) -> Result<()>,
) -> Result<()> {
    let span = t_end - t0;
    if span <= 0.0 || !span.is_finite() {
        return Err(Error::DomainError(format!("integration span must be positive, got {span}")));
    }
    let step_tol = (tol * STEP_TOL_FACTOR).max(1e-15);
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = (span * 1e-3).min(0.1);
    let h_min = span * 1e-15;
    let mut rejected_in_a_row = 0usize;
    loop {
        if t >= t_end {
            return Ok(());
        }
        h = h.min(t_end - t);
        let mut k = [[0.0; N]; 7];
        k[0] = k1;
        for stage in 0..6 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                let a = A[stage][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[stage + 1] = f(t + C[stage] * h, &ys);
        }
        let mut y5 = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let b = A[5][j];
            if b != 0.0 {
                for i in 0..N {
                    y5[i] += h * b * kj[i];
                }
            }
        }
        // k[6] is f at (t + h, y5): the FSAL stage, reused as the error term
        // and as k1 of the next step.
        k[6] = f(t + h, &y5);
        let mut err_norm = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += ERR[j] * kj[i];
            }
            e *= h;
            let scale = step_tol * (1.0f64).max(y[i].abs().max(y5[i].abs()));
            err_norm += (e / scale) * (e / scale);
        }
        err_norm = (err_norm / N as f64).sqrt();
        if err_norm <= 1.0 {
            t += h;
            y = y5;
            k1 = k[6];
            on_step(t, &y)?;
            rejected_in_a_row = 0;
        } else {
            rejected_in_a_row += 1;
            if rejected_in_a_row > 60 {
                return Err(Error::IntegrationFailure(format!(
                    "step control stalled at t = {t}"
                )));
            }
        }
        let factor = if err_norm > 0.0 {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
        if h < h_min {
            return Err(Error::IntegrationFailure(format!("step underflow at t = {t}")));
        }
    }
}

fn admissibility(problem: &RadialProblem, energy: f64) -> Result<()> {
    let v_min = problem.v_min();
    if energy < v_min {
        return Err(Error::EnergyBelowMinimum { energy, v_min });
    }
    if let PotentialSpec::PowerLawAttractive { offset, .. } = problem.potential() {
        if energy >= *offset {
            return Err(Error::UnboundedOrbit(energy));
        }
    }
    Ok(())
}

fn degenerate_trace(
    problem: &RadialProblem,
    energy: f64,
    span: f64,
    formulation: Formulation,
) -> OrbitTrace {
    let pos = match formulation {
        Formulation::Binet => problem.x0(),
        Formulation::Radial => problem.circular_radius(),
    };
    let omega = problem.angular_momentum()
        / (problem.mass() * problem.circular_radius() * problem.circular_radius());
    let n = 64;
    let samples = (0..=n)
        .map(|i| {
            let param = span * i as f64 / n as f64;
            let angle = match formulation {
                Formulation::Binet => param,
                Formulation::Radial => omega * param,
            };
            Sample { param, pos, deriv: 0.0, angle, energy }
        })
        .collect();
    OrbitTrace {
        formulation,
        samples,
        e0: energy,
        angular_momentum: problem.angular_momentum(),
        energy_drift: 0.0,
        closure: OrbitClass::Circular,
    }
}

fn is_degenerate(problem: &RadialProblem, energy: f64) -> bool {
    energy - problem.v_min()
        <= turning::DEGENERATE_WINDOW * problem.v_min().abs().max(1.0)
}

/// Integrates the Clairaut motion `x(phi)` over `phi in [0, phi_span]`
/// starting from the apocenter `x(0) = x_<`, `x'(0) = 0`.
pub fn integrate_binet(
    problem: &RadialProblem,
    energy: f64,
    phi_span: f64,
    tol: f64,
) -> Result<OrbitTrace> {
    admissibility(problem, energy)?;
    if is_degenerate(problem, energy) {
        return Ok(degenerate_trace(problem, energy, phi_span, Formulation::Binet));
    }
    let pair = turning::turning_points(problem, energy)?;
    let m = problem.mass();
    let rhs = |_phi: f64, y: &[f64; 2]| {
        let force = problem.clairaut_potential(y[0], 1).unwrap_or(f64::NAN);
        [y[1], -force / m]
    };
    let energy_of =
        |y: &[f64; 2]| 0.5 * m * y[1] * y[1] + problem.clairaut_potential(y[0], 0).unwrap_or(f64::NAN);
    let drift_cap = 100.0 * tol * energy.abs().max(1.0);
    let mut samples = vec![Sample { param: 0.0, pos: pair.x_lt, deriv: 0.0, angle: 0.0, energy }];
    let mut drift: f64 = 0.0;
    integrate_adaptive(
        &rhs,
        0.0,
        phi_span,
        [pair.x_lt, 0.0],
        tol,
        &mut |phi, y| {
            if y[0] <= 0.0 || !y[0].is_finite() {
                return Err(Error::IntegrationFailure(format!(
                    "Clairaut variable left the domain at phi = {phi}"
                )));
            }
            let e = energy_of(y);
            drift = drift.max((e - energy).abs());
            if drift > drift_cap {
                return Err(Error::IntegrationFailure(format!(
                    "energy drift {drift:e} exceeds {drift_cap:e}"
                )));
            }
            samples.push(Sample { param: phi, pos: y[0], deriv: y[1], angle: phi, energy: e });
            Ok(())
        },
    )?;
    Ok(OrbitTrace {
        formulation: Formulation::Binet,
        samples,
        e0: energy,
        angular_momentum: problem.angular_momentum(),
        energy_drift: drift,
        closure: classify_orbit(problem, energy, DEFAULT_Q_MAX, DEFAULT_CLOSURE_TOL)?,
    })
}

/// Default escape radius multiplier for unbounded-orbit detection.
pub const ESCAPE_RADIUS_FACTOR: f64 = 1e6;

/// Integrates the radial motion `(r, phi)(t)` over `t in [0, t_span]`
/// starting from the apocenter `r(0) = r_max`, `r'(0) = 0`, `phi(0) = 0`.
pub fn integrate_radial(
    problem: &RadialProblem,
    energy: f64,
    t_span: f64,
    tol: f64,
) -> Result<OrbitTrace> {
    integrate_radial_with_escape(
        problem,
        energy,
        t_span,
        tol,
        ESCAPE_RADIUS_FACTOR * problem.circular_radius(),
    )
}

/// [`integrate_radial`] with an explicit escape radius.
pub fn integrate_radial_with_escape(
    problem: &RadialProblem,
    energy: f64,
    t_span: f64,
    tol: f64,
    escape_radius: f64,
) -> Result<OrbitTrace> {
    admissibility(problem, energy)?;
    if is_degenerate(problem, energy) {
        return Ok(degenerate_trace(problem, energy, t_span, Formulation::Radial));
    }
    let pair = turning::turning_points(problem, energy)?;
    let r0 = pair.r_max(problem);
    let m = problem.mass();
    let l = problem.angular_momentum();
    let rhs = |_t: f64, y: &[f64; 3]| {
        let force = problem.effective_potential(y[0], 1).unwrap_or(f64::NAN);
        [y[1], -force / m, l / (m * y[0] * y[0])]
    };
    let energy_of = |y: &[f64; 3]| {
        0.5 * m * y[1] * y[1] + problem.effective_potential(y[0], 0).unwrap_or(f64::NAN)
    };
    let drift_cap = 100.0 * tol * energy.abs().max(1.0);
    let mut samples = vec![Sample { param: 0.0, pos: r0, deriv: 0.0, angle: 0.0, energy }];
    let mut drift: f64 = 0.0;
    integrate_adaptive(&rhs, 0.0, t_span, [r0, 0.0, 0.0], tol, &mut |t, y| {
        if y[0] <= 0.0 || !y[0].is_finite() {
            return Err(Error::IntegrationFailure(format!(
                "radius left the domain at t = {t}"
            )));
        }
        if y[0] > escape_radius {
            return Err(Error::UnboundedOrbit(energy));
        }
        let e = energy_of(y);
        drift = drift.max((e - energy).abs());
        if drift > drift_cap {
            return Err(Error::IntegrationFailure(format!(
                "energy drift {drift:e} exceeds {drift_cap:e}"
            )));
        }
        samples.push(Sample { param: t, pos: y[0], deriv: y[1], angle: y[2], energy: e });
        Ok(())
    })?;
    Ok(OrbitTrace {
        formulation: Formulation::Radial,
        samples,
        e0: energy,
        angular_momentum: l,
        energy_drift: drift,
        closure: classify_orbit(problem, energy, DEFAULT_Q_MAX, DEFAULT_CLOSURE_TOL)?,
    })
}

pub const DEFAULT_Q_MAX: u64 = 64;
pub const DEFAULT_CLOSURE_TOL: f64 = 1e-6;

/// Smallest-denominator rational `p/q` with `|phi/pi - p/q| <= tol` and
/// `q <= q_max`, via continued-fraction convergents; `None` when the orbit
/// does not close within the bound.
pub fn closure_check(phi: f64, q_max: u64, tol: f64) -> Option<(u64, u64)> {
    if !(phi > 0.0) || !phi.is_finite() {
        return None;
    }
    let ratio = phi / std::f64::consts::PI;
    let mut rest = ratio;
    // Seed convergents h_{-2}/k_{-2} = 0/1, h_{-1}/k_{-1} = 1/0.
    let (mut p_prev, mut q_prev) = (0u64, 1u64);
    let (mut p_cur, mut q_cur) = (1u64, 0u64);
    for _ in 0..64 {
        let a = rest.floor();
        if !(0.0..=1e18).contains(&a) {
            break;
        }
        let ai = a as u64;
        let p_next = ai.checked_mul(p_cur).and_then(|v| v.checked_add(p_prev))?;
        let q_next = ai.checked_mul(q_cur).and_then(|v| v.checked_add(q_prev))?;
        if q_next > q_max {
            return None;
        }
        if q_next > 0 {
            let approx = p_next as f64 / q_next as f64;
            if (ratio - approx).abs() <= tol && p_next > 0 {
                return Some((p_next, q_next));
            }
        }
        let frac = rest - a;
        if frac <= f64::EPSILON * ratio.abs().max(1.0) {
            break;
        }
        (p_prev, q_prev) = (p_cur, q_cur);
        (p_cur, q_cur) = (p_next, q_next);
        rest = 1.0 / frac;
    }
    None
}

/// Classifies the orbit at energy `E`: circular within the degenerate
/// window, unbounded past the family's escape threshold, otherwise closed
/// or rosette according to the quadrature apsidal angle.
pub fn classify_orbit(
    problem: &RadialProblem,
    energy: f64,
    q_max: u64,
    tol: f64,
) -> Result<OrbitClass> {
    let v_min = problem.v_min();
    if energy < v_min {
        return Err(Error::EnergyBelowMinimum { energy, v_min });
    }
    if let PotentialSpec::PowerLawAttractive { offset, .. } = problem.potential() {
        if energy >= *offset {
            return Ok(OrbitClass::Unbounded);
        }
    }
    if is_degenerate(problem, energy) {
        return Ok(OrbitClass::Circular);
    }
    let quad_tol = (tol * 1e-2).max(1e-12);
    let phi = apsidal::apsidal_angle(problem, energy, quad_tol)?.phi;
    Ok(match closure_check(phi, q_max, tol) {
        Some((p, q)) => OrbitClass::Closed { p, q },
        None => OrbitClass::Rosette,
    })
}
