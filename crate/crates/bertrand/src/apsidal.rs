//! Apsidal angle and radial half-period by singular quadrature.
//!
//! The apsidal angle is the angle swept between consecutive apsides, equal
//! to the half-period of the Clairaut oscillation:
//!
//! ```text
//! Phi(E, L) = sqrt(m/2) ∫_{x_<}^{x_>} dx / sqrt(E - W_L(x))
//! ```
//!
//! and the radial half-period is the same construction in the radial view,
//!
//! ```text
//! T/2 = sqrt(m/2) ∫_{r_min}^{r_max} dr / sqrt(E - V_L(r)).
//! ```
//!
//! Both integrands have inverse-square-root zeros at the turning points and
//! go through the shared `sin^2` substitution kernel. Energies within
//! `1e-9 * max(1, |V_R|)` of the minimum short-circuit to the near-circular
//! limit `Phi_C`, where the turning-point solve has no accurate digits left.

use crate::error::{Error, Result};
use crate::fractional::{self, EnergyFunction};
use crate::potentials::{PotentialSpec, RadialProblem};
use crate::quadrature;
use crate::turning;

/// Relative width of the near-circular shortcut window.
pub const SHORTCUT_WINDOW: f64 = 1e-9;

/// An apsidal angle with quadrature diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct ApsidalResult {
    /// Apsidal angle in radians.
    pub phi: f64,
    pub energy: f64,
    pub angular_momentum: f64,
    /// Node count of the accepted quadrature rule (0 for the near-circular
    /// shortcut).
    pub quad_order: usize,
    /// A posteriori error estimate.
    pub err_est: f64,
}

fn shortcut_window(problem: &RadialProblem) -> f64 {
    SHORTCUT_WINDOW * problem.v_min().abs().max(1.0)
}

/// `Phi(E, L)` to absolute tolerance `tol`.
pub fn apsidal_angle(problem: &RadialProblem, energy: f64, tol: f64) -> Result<ApsidalResult> {
    let v_min = problem.v_min();
    if energy < v_min {
        return Err(Error::EnergyBelowMinimum { energy, v_min });
    }
    let window = shortcut_window(problem);
    if energy - v_min < window {
        let phi_c = turning::circular_apsidal(problem.potential(), problem.circular_radius())?;
        // Bound the shortcut error by the deviation at the window edge.
        let edge = quadrature_angle(problem, v_min + window, tol)?;
        return Ok(ApsidalResult {
            phi: phi_c,
            energy,
            angular_momentum: problem.angular_momentum(),
            quad_order: 0,
            err_est: (edge.phi - phi_c).abs(),
        });
    }
    quadrature_angle(problem, energy, tol)
}

fn quadrature_angle(problem: &RadialProblem, energy: f64, tol: f64) -> Result<ApsidalResult> {
    let pair = turning::turning_points(problem, energy)?;
    let span = energy - problem.v_min();
    let width = pair.delta_x();
    // Work in displacements u = x - x0: the substitution then produces the
    // distance to each turning point exactly, instead of quantizing it at
    // the float spacing of the absolute x.
    let u_lt = pair.x_lt - problem.x0();
    let u_gt = pair.x_gt - problem.x0();
    // Residuals of the root solve. E - W vanishes quadratically at the
    // endpoints, so even an O(1e-20) residual would eventually dominate the
    // deepest quadrature nodes; subtracting its linear interpolant makes
    // the integrand vanish at the solved endpoints exactly.
    let res_lt = problem.clairaut_above_min_offset(u_lt) - span;
    let res_gt = problem.clairaut_above_min_offset(u_gt) - span;
    let slope = (res_gt - res_lt) / width;
    let integrand = |theta: f64| {
        let s = theta.sin();
        let from_lt = width * s * s;
        let u = u_lt + from_lt;
        let d = (span - problem.clairaut_above_min_offset(u)) + (res_lt + slope * from_lt);
        if d > 0.0 {
            width * (2.0 * theta).sin() / d.sqrt()
        } else {
            0.0
        }
    };
    let prefactor = (0.5 * problem.mass()).sqrt();
    // The kernel tolerance is on the raw integral; tol is on Phi.
    let q = quadrature::integrate(
        integrand,
        0.0,
        std::f64::consts::FRAC_PI_2,
        tol / prefactor,
    )?;
    Ok(ApsidalResult {
        phi: prefactor * q.value,
        energy,
        angular_momentum: problem.angular_momentum(),
        quad_order: q.nodes,
        err_est: prefactor * q.err_est,
    })
}

/// `Phi(E, L)` through the semi-derivative of the turning-point width:
/// `Phi = sqrt(m pi / 2) D^{1/2} Delta x (E)`.
///
/// The width's derivative is supplied analytically from the turning points,
/// `Delta x'(w) = 1/W'(x_>) - 1/W'(x_<)`, switching to the harmonic-well
/// limit `sqrt(2 / W''(x0)) / sqrt(w - V_R)` where the root solve has no
/// digits left.
pub fn apsidal_semiderivative(problem: &RadialProblem, energy: f64, tol: f64) -> Result<f64> {
    let v_min = problem.v_min();
    if energy < v_min {
        return Err(Error::EnergyBelowMinimum { energy, v_min });
    }
    let guard = 1e-8 * v_min.abs().max(1.0);
    let w2 = turning::curvature(problem)?.w_second;
    let width = EnergyFunction::vanishing_offset(v_min, |delta| {
        turning::turning_points(problem, v_min + delta).map(|p| p.delta_x()).unwrap_or(f64::NAN)
    })
    .with_derivative_offset(move |delta| {
        if delta < guard {
            return (2.0 / w2).sqrt() / delta.sqrt();
        }
        match turning::turning_points(problem, v_min + delta) {
            Ok(p) => {
                let d_gt = problem.clairaut_potential(p.x_gt, 1).unwrap_or(f64::NAN);
                let d_lt = problem.clairaut_potential(p.x_lt, 1).unwrap_or(f64::NAN);
                1.0 / d_gt - 1.0 / d_lt
            }
            Err(_) => f64::NAN,
        }
    });
    let d = fractional::semi_derivative(&width, energy, tol)?;
    Ok((0.5 * problem.mass() * std::f64::consts::PI).sqrt() * d)
}

/// Half-period of the radial oscillation at energy `E`.
///
/// Degenerate energies return the small-oscillation limit
/// `pi / sqrt(V_L''(R) / m)`.
pub fn radial_half_period(problem: &RadialProblem, energy: f64, tol: f64) -> Result<f64> {
    let v_min = problem.v_min();
    if energy < v_min {
        return Err(Error::EnergyBelowMinimum { energy, v_min });
    }
    if energy - v_min < shortcut_window(problem) {
        let v2 = problem.effective_potential(problem.circular_radius(), 2)?;
        if v2 <= 0.0 {
            return Err(Error::UnstableCircularOrbit(v2));
        }
        return Ok(std::f64::consts::PI / (v2 / problem.mass()).sqrt());
    }
    let pair = turning::turning_points(problem, energy)?;
    let span = energy - v_min;
    let (r_min, r_max) = (pair.r_min(problem), pair.r_max(problem));
    let r_width = r_max - r_min;
    // Same endpoint-residual correction as the angular integral.
    let res_lo = -problem.effective_below_energy(r_min, span);
    let res_hi = -problem.effective_below_energy(r_max, span);
    let slope = (res_hi - res_lo) / r_width;
    let integrand = |theta: f64| {
        let s = theta.sin();
        let from_lo = r_width * s * s;
        let d = problem.effective_below_energy(r_min + from_lo, span) + (res_lo + slope * from_lo);
        if d > 0.0 {
            r_width * (2.0 * theta).sin() / d.sqrt()
        } else {
            0.0
        }
    };
    let prefactor = (0.5 * problem.mass()).sqrt();
    let q = quadrature::integrate(
        integrand,
        0.0,
        std::f64::consts::FRAC_PI_2,
        tol / prefactor,
    )?;
    Ok(prefactor * q.value)
}

/// Cell status of a sweep table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepStatus {
    Ok,
    BelowMin,
    Unbounded,
    TolFail,
}

impl SweepStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::BelowMin => "below_min",
            Self::Unbounded => "unbounded",
            Self::TolFail => "tol_fail",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ok" => Some(Self::Ok),
            "below_min" => Some(Self::BelowMin),
            "unbounded" => Some(Self::Unbounded),
            "tol_fail" => Some(Self::TolFail),
            _ => None,
        }
    }
}

/// One `(L, E)` cell of an apsidal sweep; `phi` and `err_est` are NaN on
/// error rows.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub angular_momentum: f64,
    pub energy: f64,
    pub phi: f64,
    pub err_est: f64,
    pub status: SweepStatus,
}

/// Energy grid of a sweep: explicit values, or `Auto(n)` resolved per
/// problem once `V_R` is known.
#[derive(Debug, Clone, PartialEq)]
pub enum EnergyGrid {
    Values(Vec<f64>),
    Auto(usize),
}

impl EnergyGrid {
    /// Concrete energies for one problem.
    ///
    /// `Auto(n)` samples `n` energies with offsets from `V_R` spaced
    /// geometrically inside `(V_R + w, E_max)`, where `w` is the
    /// near-circular shortcut window and `E_max` is the escape threshold 0
    /// for attractive power laws and `V_R + 10 |V_R|` otherwise.
    pub fn resolve(&self, problem: &RadialProblem) -> Result<Vec<f64>> {
        match self {
            Self::Values(v) => Ok(v.clone()),
            Self::Auto(n) => {
                let n = *n;
                if n == 0 {
                    return Err(Error::InvalidGrid("auto energy grid needs n >= 1".into()));
                }
                let v_min = problem.v_min();
                let e_max = match problem.potential() {
                    PotentialSpec::PowerLawAttractive { offset, .. } => *offset,
                    _ => {
                        let spread = 10.0 * v_min.abs();
                        if spread > 0.0 {
                            v_min + spread
                        } else {
                            v_min + 1.0
                        }
                    }
                };
                let total = e_max - v_min;
                if total <= 0.0 {
                    return Err(Error::InvalidGrid(format!(
                        "empty admissible energy range above V_R = {v_min}"
                    )));
                }
                let w = shortcut_window(problem);
                let ratio = (total / w).powf(1.0 / (n as f64 + 1.0));
                Ok((0..n).map(|i| v_min + w * ratio.powi(i as i32 + 1)).collect())
            }
        }
    }
}

/// Apsidal angles over the `L x E` product grid, row order following the
/// grid order. Cell failures are recorded in the row status, never fatal.
pub fn apsidal_sweep(
    potential: &PotentialSpec,
    mass: f64,
    l_values: &[f64],
    energies: &EnergyGrid,
    tol: f64,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &l in l_values {
        let problem = RadialProblem::new(potential.clone(), mass, l)?;
        for e in energies.resolve(&problem)? {
            let row = match apsidal_angle(&problem, e, tol) {
                Ok(res) => SweepRow {
                    angular_momentum: l,
                    energy: e,
                    phi: res.phi,
                    err_est: res.err_est,
                    status: SweepStatus::Ok,
                },
                Err(err) => {
                    let status = match err {
                        Error::EnergyBelowMinimum { .. } => SweepStatus::BelowMin,
                        Error::UnboundedOrbit(_) => SweepStatus::Unbounded,
                        Error::ToleranceNotMet { .. } => SweepStatus::TolFail,
                        other => return Err(other),
                    };
                    SweepRow {
                        angular_momentum: l,
                        energy: e,
                        phi: f64::NAN,
                        err_est: f64::NAN,
                        status,
                    }
                }
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn kepler() -> RadialProblem {
        RadialProblem::natural(PotentialSpec::power_law_attractive(1.0, 1.0).unwrap()).unwrap()
    }

    fn hooke() -> RadialProblem {
        RadialProblem::natural(PotentialSpec::power_law_positive(1.0, 2.0).unwrap()).unwrap()
    }

    #[test]
    fn kepler_angle_is_pi() {
        let p = kepler();
        let res = apsidal_angle(&p, -0.375, 1e-10).unwrap();
        assert!((res.phi - PI).abs() < 1e-10, "{}", res.phi);
        assert!(res.err_est <= 1e-10);
    }

    #[test]
    fn hooke_angle_is_half_pi() {
        let p = hooke();
        let res = apsidal_angle(&p, 3.0, 1e-10).unwrap();
        assert!((res.phi - PI / 2.0).abs() < 1e-10, "{}", res.phi);
    }

    #[test]
    fn near_circular_limit_attractive() {
        let spec = PotentialSpec::power_law_attractive(1.0, 0.5).unwrap();
        let p = RadialProblem::natural(spec).unwrap();
        let res = apsidal_angle(&p, p.v_min() + 1e-8, 1e-10).unwrap();
        let phi_c = PI / 1.5f64.sqrt();
        assert!((res.phi - phi_c).abs() < 1e-4, "{} vs {phi_c}", res.phi);
        assert!((phi_c - 2.565_099_7).abs() < 1e-7);
    }

    #[test]
    fn limit_approached_monotonically() {
        let spec = PotentialSpec::power_law_attractive(1.0, 1.3).unwrap();
        let p = RadialProblem::natural(spec).unwrap();
        let phi_c =
            turning::circular_apsidal(p.potential(), p.circular_radius()).unwrap();
        let mut prev = f64::INFINITY;
        for k in 2..=8 {
            let e = p.v_min() + 10f64.powi(-k);
            let res = apsidal_angle(&p, e, 1e-11).unwrap();
            let dev = (res.phi - phi_c).abs();
            assert!(dev <= prev * (1.0 + 1e-9), "k={k}: {dev} vs {prev}");
            prev = dev;
        }
        assert!(prev <= 1e-4);
    }

    #[test]
    fn shortcut_returns_circular_limit() {
        let p = kepler();
        let res = apsidal_angle(&p, p.v_min() + 1e-12, 1e-10).unwrap();
        assert_eq!(res.quad_order, 0);
        assert!((res.phi - PI).abs() < 1e-12);
        assert!(res.err_est < 1e-6);
    }

    #[test]
    fn energy_domain_errors() {
        let p = kepler();
        assert!(matches!(
            apsidal_angle(&p, -0.7, 1e-8),
            Err(Error::EnergyBelowMinimum { .. })
        ));
        assert!(matches!(apsidal_angle(&p, 0.1, 1e-8), Err(Error::UnboundedOrbit(_))));
    }

    #[test]
    fn x_and_r_integrals_agree() {
        // Phi in the radial view: sqrt(m/2) (L/m) ∫ dr / (r^2 sqrt(E - V_L)).
        let cases = [
            (kepler(), -0.375),
            (hooke(), 3.0),
            (
                RadialProblem::natural(PotentialSpec::power_law_attractive(1.0, 1.5).unwrap())
                    .unwrap(),
                -0.2,
            ),
        ];
        for (p, e) in cases {
            let pair = turning::turning_points(&p, e).unwrap();
            let span = e - p.v_min();
            let lm = p.angular_momentum() / p.mass();
            let integrand = |r: f64| {
                let d = p.effective_below_energy(r, span);
                if d > 0.0 {
                    lm / (r * r * d.sqrt())
                } else {
                    0.0
                }
            };
            let q = quadrature::integrate_endpoint_singular(
                integrand,
                pair.r_min(&p),
                pair.r_max(&p),
                1e-11,
            )
            .unwrap();
            let via_r = (0.5 * p.mass()).sqrt() * q.value;
            let via_x = apsidal_angle(&p, e, 1e-11).unwrap().phi;
            assert!((via_r - via_x).abs() < 1e-8, "{via_r} vs {via_x}");
        }
    }

    #[test]
    fn semiderivative_formulation_agrees() {
        let problems = [
            kepler(),
            hooke(),
            RadialProblem::natural(PotentialSpec::power_law_attractive(1.0, 0.5).unwrap())
                .unwrap(),
            RadialProblem::natural(PotentialSpec::power_law_attractive(1.0, 1.5).unwrap())
                .unwrap(),
        ];
        for p in &problems {
            // Five energies per family, fractions of the well depth above V_R
            // (bounded for the attractive families, which escape at E = 0).
            for frac in [0.05, 0.15, 0.3, 0.5, 0.75] {
                let e = p.v_min() + frac * p.v_min().abs();
                assert!(e > p.v_min(), "probe below minimum");
                let direct = apsidal_angle(p, e, 1e-10).unwrap().phi;
                let semi = apsidal_semiderivative(p, e, 1e-9).unwrap();
                assert!(
                    (direct - semi).abs() <= 1e-6,
                    "E={e}: direct {direct} vs semi {semi}"
                );
            }
        }
    }

    #[test]
    fn semiderivative_near_circular_limit() {
        let p = hooke();
        let phi_c = PI / 2.0;
        let semi = apsidal_semiderivative(&p, p.v_min() + 1e-6, 1e-9).unwrap();
        assert!((semi - phi_c).abs() < 1e-3, "{semi}");
    }

    #[test]
    fn kepler_half_period_matches_third_law() {
        // T = 2 pi sqrt(a^3), a = -1/(2E) = 4/3 at E = -3/8.
        let p = kepler();
        let expected = PI * (4.0f64 / 3.0).powf(1.5);
        let half = radial_half_period(&p, -0.375, 1e-10).unwrap();
        assert!((half - expected).abs() < 1e-4, "{half} vs {expected}");
        assert!((half - 4.836_86).abs() < 1e-4);
    }

    #[test]
    fn hooke_half_period_is_frequency_limit() {
        // U = r^2: radial frequency 2 sqrt(2), half-period pi/(2 sqrt(2)).
        let p = hooke();
        let expected = PI / (2.0 * 2.0f64.sqrt());
        for e in [1.6, 2.0, 4.0] {
            let half = radial_half_period(&p, e, 1e-10).unwrap();
            assert!((half - expected).abs() < 1e-6, "E={e}: {half} vs {expected}");
        }
        // Degenerate limit returns the same value for the isochronous well.
        let degenerate = radial_half_period(&p, p.v_min(), 1e-10).unwrap();
        assert!((degenerate - expected).abs() < 1e-12);
    }

    #[test]
    fn sweep_kepler_constant_phi() {
        let spec = PotentialSpec::power_law_attractive(1.0, 1.0).unwrap();
        let rows =
            apsidal_sweep(&spec, 1.0, &[0.5, 1.0, 2.0], &EnergyGrid::Auto(20), 1e-10).unwrap();
        assert_eq!(rows.len(), 60);
        for row in &rows {
            assert_eq!(row.status, SweepStatus::Ok);
            assert!((row.phi - PI).abs() <= 1e-8, "L={} E={}: {}", row.angular_momentum, row.energy, row.phi);
        }
    }

    #[test]
    fn sweep_records_cell_errors() {
        let spec = PotentialSpec::power_law_attractive(1.0, 1.0).unwrap();
        let grid = EnergyGrid::Values(vec![-0.7, -0.375, 0.5]);
        let rows = apsidal_sweep(&spec, 1.0, &[1.0], &grid, 1e-10).unwrap();
        assert_eq!(rows[0].status, SweepStatus::BelowMin);
        assert!(rows[0].phi.is_nan());
        assert_eq!(rows[1].status, SweepStatus::Ok);
        assert_eq!(rows[2].status, SweepStatus::Unbounded);
    }

    #[test]
    fn sweep_empty_grid_is_empty() {
        let spec = PotentialSpec::power_law_attractive(1.0, 1.0).unwrap();
        let rows =
            apsidal_sweep(&spec, 1.0, &[1.0], &EnergyGrid::Values(vec![]), 1e-10).unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn nonisochronous_family_varies_with_energy() {
        let spec = PotentialSpec::power_law_attractive(1.0, 0.5).unwrap();
        let p = RadialProblem::natural(spec.clone()).unwrap();
        let grid = EnergyGrid::Values(vec![p.v_min() + 0.05, p.v_min() + 0.3, -0.05]);
        let rows = apsidal_sweep(&spec, 1.0, &[1.0], &grid, 1e-10).unwrap();
        let phis: Vec<f64> = rows.iter().map(|r| r.phi).collect();
        assert!((phis[0] - phis[1]).abs() > 1e-4, "{phis:?}");
        assert!((phis[1] - phis[2]).abs() > 1e-4, "{phis:?}");
    }

    #[test]
    fn auto_grid_stays_admissible() {
        for p in [kepler(), hooke()] {
            let grid = EnergyGrid::Auto(20).resolve(&p).unwrap();
            assert_eq!(grid.len(), 20);
            for pair in grid.windows(2) {
                assert!(pair[0] < pair[1]);
            }
            assert!(grid[0] > p.v_min());
            if matches!(p.potential(), PotentialSpec::PowerLawAttractive { .. }) {
                assert!(grid[grid.len() - 1] < 0.0);
            }
        }
    }
}
