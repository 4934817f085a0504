//! Selection of isochronous Clairaut potentials: residual certificates,
//! the closed-form conditions picking out the Newton and Hooke exponents,
//! the perturbative constraint hierarchy, and reconstruction of a potential
//! from its near-circular apsidal law.
//!
//! A potential whose apsidal angle is the constant `Phi_C` for every bound
//! energy must satisfy the functional equation
//!
//! ```text
//! W_L(x) = W_L(x + alpha sqrt(W_L(x) - V_R)),   alpha = sqrt(2/m) 2 Phi_C / pi
//! ```
//!
//! at every `x` in `(0, x0]`: the displaced point is the partner turning
//! point at the same energy. For the power-law families the `x -> 0+` probe
//! collapses to one numerical equation per family,
//!
//! ```text
//! attractive  -k r^{-nu}:  (nu/4)^{-nu/2} = 2      roots nu = 1, 2
//! positive     k r^{nu}:   4/(2 + nu)   = 1      root  nu = 2
//! ```
//!
//! and since the attractive family requires `nu < 2`, only the Newton
//! exponent survives there, while the positive family keeps exactly the
//! Hooke exponent.

use crate::error::{Error, Result};
use crate::potentials::{PotentialSpec, RadialProblem};
use crate::quadrature;
use crate::turning;

/// Power-law family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `U(r) = -k r^{-nu}`, `0 < nu < 2`.
    Attractive,
    /// `U(r) = k r^{nu}`, `nu > 0`.
    Positive,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Attractive => "attractive",
            Self::Positive => "positive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "attractive" => Some(Self::Attractive),
            "positive" => Some(Self::Positive),
            _ => None,
        }
    }

    pub fn spec(&self, nu: f64) -> Result<PotentialSpec> {
        match self {
            Self::Attractive => PotentialSpec::power_law_attractive(1.0, nu),
            Self::Positive => PotentialSpec::power_law_positive(1.0, nu),
        }
    }

    /// Limit apsidal angle `pi / sqrt(2 ± nu)`.
    pub fn circular_angle(&self, nu: f64) -> f64 {
        match self {
            Self::Attractive => std::f64::consts::PI / (2.0 - nu).sqrt(),
            Self::Positive => std::f64::consts::PI / (2.0 + nu).sqrt(),
        }
    }

    /// The family's closed-form selection condition, vanishing exactly at
    /// the isochronous exponent.
    pub fn selection_condition(&self, nu: f64) -> Result<f64> {
        match self {
            Self::Attractive => bertrand_transcendental(nu),
            Self::Positive => asymptotic_condition(nu),
        }
    }
}

/// Verdict of a residual certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Isochronous,
    NotIsochronous,
    /// Residual fell between the accept and reject thresholds.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Isochronous => "isochronous",
            Self::NotIsochronous => "not_isochronous",
            Self::Inconclusive => "inconclusive",
        }
    }
}

/// Residual thresholds relative to `|V_R|`: accept below, reject above.
#[derive(Debug, Clone, Copy)]
pub struct ScanThresholds {
    pub accept: f64,
    pub reject: f64,
}

impl Default for ScanThresholds {
    fn default() -> Self {
        Self { accept: 1e-10, reject: 1e-3 }
    }
}

/// Default residual probes, as fractions of `x0`.
pub const DEFAULT_PROBES: [f64; 5] = [0.125, 0.25, 0.5, 0.75, 0.9375];

/// Per-exponent diagnostics of a family scan.
#[derive(Debug, Clone, Copy)]
pub struct IsochronyReport {
    pub nu: f64,
    pub family: Family,
    /// Sup of the functional-equation residual over the probe set.
    pub residual_sup: f64,
    /// Value of the family's closed-form selection condition.
    pub transcendental_value: f64,
    /// `|W''''(x0) - (5/3) W'''(x0)^2 / (m omega^2)|`.
    pub constraint_violation: f64,
    pub verdict: Verdict,
}

/// Scan result: per-exponent reports plus the refined roots of the
/// selection condition.
#[derive(Debug, Clone)]
pub struct ScanOutcome {
    pub reports: Vec<IsochronyReport>,
    pub roots: Vec<f64>,
}

/// Functional-equation residual
/// `W(x + alpha sqrt(W(x) - V_R)) - W(x)` at one probe `x in (0, x0]`,
/// with `alpha = sqrt(2/m) 2 phi_c / pi`. Zero for isochronous motion.
pub fn isochrony_residual(problem: &RadialProblem, phi_c: f64, x: f64) -> Result<f64> {
    let x0 = problem.x0();
    if !(x > 0.0 && x <= x0) {
        return Err(Error::ProbeOutOfDomain { x, x0 });
    }
    let above = problem.clairaut_above_min(x);
    if above < 0.0 {
        return Err(Error::ProbeOutOfDomain { x, x0 });
    }
    let alpha = (2.0 / problem.mass()).sqrt() * 2.0 * phi_c / std::f64::consts::PI;
    let displaced = x + alpha * above.sqrt();
    // x > 0 and the displacement is non-negative, so the displaced point
    // stays in the domain for every in-scope family.
    if displaced <= 0.0 {
        return Err(Error::DisplacedPointNonPositive(displaced));
    }
    Ok(problem.clairaut_above_min(displaced) - above)
}

/// Attractive-family selection condition `(nu/4)^{-nu/2} - 2`, the `x -> 0+`
/// probe of the functional equation for `W_{-nu}`; roots at `nu = 1` and
/// the excluded boundary `nu = 2`.
pub fn bertrand_transcendental(nu: f64) -> Result<f64> {
    if !(nu > 0.0 && nu <= 2.0) {
        return Err(Error::DomainError(format!(
            "attractive exponent must lie in (0, 2], got {nu}"
        )));
    }
    Ok((nu / 4.0).powf(-0.5 * nu) - 2.0)
}

/// Positive-family selection condition `4/(2 + nu) - 1`, from matching the
/// large-x growth of `W_nu`; root at `nu = 2`.
pub fn asymptotic_condition(nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::DomainError(format!("positive exponent must be > 0, got {nu}")));
    }
    Ok(4.0 / (2.0 + nu) - 1.0)
}

/// Scans a family over an exponent grid: residual certificates per grid
/// point plus bisection-refined roots of the selection condition.
pub fn bertrand_scan(
    family: Family,
    nu_grid: &[f64],
    probes: &[f64],
    thresholds: ScanThresholds,
) -> Result<ScanOutcome> {
    let mut reports = Vec::with_capacity(nu_grid.len());
    for &nu in nu_grid {
        reports.push(report_at(family, nu, probes, thresholds)?);
    }
    let mut roots = Vec::new();
    for pair in reports.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.transcendental_value == 0.0 {
            roots.push(a.nu);
        } else if a.transcendental_value * b.transcendental_value < 0.0 {
            roots.push(refine_root(family, a.nu, b.nu)?);
        }
    }
    if let Some(last) = reports.last() {
        if last.transcendental_value == 0.0 {
            roots.push(last.nu);
        }
    }
    Ok(ScanOutcome { reports, roots })
}

/// Diagnostics for a single exponent, natural units `m = k = L = 1`.
pub fn report_at(
    family: Family,
    nu: f64,
    probes: &[f64],
    thresholds: ScanThresholds,
) -> Result<IsochronyReport> {
    let problem = RadialProblem::natural(family.spec(nu)?)?;
    let phi_c = family.circular_angle(nu);
    let x0 = problem.x0();
    let mut residual_sup = 0.0f64;
    for &frac in probes {
        let r = isochrony_residual(&problem, phi_c, frac * x0)?;
        residual_sup = residual_sup.max(r.abs());
    }
    let scale = problem.v_min().abs();
    let verdict = if residual_sup <= thresholds.accept * scale {
        Verdict::Isochronous
    } else if residual_sup >= thresholds.reject * scale {
        Verdict::NotIsochronous
    } else {
        Verdict::Inconclusive
    };
    let constraints = isochrony_constraints(&problem)?;
    Ok(IsochronyReport {
        nu,
        family,
        residual_sup,
        transcendental_value: family.selection_condition(nu)?,
        constraint_violation: constraints.fourth_order_violation.abs(),
        verdict,
    })
}

/// Bisection of the selection condition to 1e-13, then one secant polish.
fn refine_root(family: Family, mut lo: f64, mut hi: f64) -> Result<f64> {
    let f_lo = family.selection_condition(lo)?;
    if f_lo > 0.0 {
        std::mem::swap(&mut lo, &mut hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if family.selection_condition(mid)? <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= 1e-13 {
            break;
        }
    }
    let (a, b) = (lo, hi);
    let (fa, fb) = (family.selection_condition(a)?, family.selection_condition(b)?);
    if fa != fb {
        let secant = a - fa * (b - a) / (fb - fa);
        if secant.is_finite() && secant > 0.0 {
            return Ok(secant);
        }
    }
    Ok(0.5 * (a + b))
}

/// Expansion coefficients of the well around its minimum:
/// `a_n = 2 W^{(n+2)}(x0) / ((n+2)! m omega^2)`, with `m omega^2 = W''(x0)`.
pub fn perturbative_coefficients(problem: &RadialProblem, max_n: usize) -> Result<Vec<f64>> {
    let x0 = problem.x0();
    let m_omega_sq = turning::curvature(problem)?.w_second;
    let mut out = Vec::with_capacity(max_n);
    for n in 1..=max_n {
        let order = n + 2;
        let w_n = match problem.clairaut_derivative_exact(x0, order) {
            Some(v) => v,
            None if order <= 4 => problem.clairaut_potential(x0, order)?,
            None => {
                return Err(Error::UnsupportedDerivativeOrder {
                    order,
                    family: problem.potential().family_name(),
                })
            }
        };
        out.push(2.0 * w_n / (factorial(order) * m_omega_sq));
    }
    Ok(out)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Exact and series lateral displacements.
#[derive(Debug, Clone, Copy)]
pub struct LateralMap {
    /// Root-solved `eps_+`: the right-branch displacement at the energy of
    /// the left probe `x0 - eps_-`.
    pub exact: f64,
    /// Series value through `eps_-^series_order`.
    pub series: f64,
    /// Highest power retained in the series (4 when `a_3` is available).
    pub series_order: usize,
}

/// Right lateral displacement produced by a left displacement `eps_-`:
/// exact via the turning-point solve at `E = W(x0 - eps_-)`, and the
/// series
///
/// ```text
/// eps_+ = eps (2 gamma - 1) - eps^2 gamma a1 + eps^3 gamma (a2 - a1^2/4)
///       + eps^4 gamma (-a3 + a1 a2 / 2 - a1^3 / 8)
/// ```
///
/// with `gamma = omega Phi_C / pi`.
pub fn lateral_map(problem: &RadialProblem, phi_c: f64, eps_minus: f64) -> Result<LateralMap> {
    let x0 = problem.x0();
    if eps_minus == 0.0 {
        return Ok(LateralMap { exact: 0.0, series: 0.0, series_order: 4 });
    }
    if !(eps_minus > 0.0 && eps_minus < x0) {
        return Err(Error::ProbeOutOfDomain { x: x0 - eps_minus, x0 });
    }
    let energy = problem.v_min() + problem.clairaut_above_min(x0 - eps_minus);
    let pair = turning::turning_points(problem, energy)?;
    let exact = pair.x_gt - x0;

    let omega = turning::curvature(problem)?.omega_sq.sqrt();
    let gamma = omega * phi_c / std::f64::consts::PI;
    let coeffs = perturbative_coefficients(problem, 3).or_else(|e| match e {
        Error::UnsupportedDerivativeOrder { .. } => perturbative_coefficients(problem, 2),
        other => Err(other),
    })?;
    let a1 = coeffs[0];
    let a2 = coeffs[1];
    let eps = eps_minus;
    let mut series = eps * (2.0 * gamma - 1.0) - eps * eps * gamma * a1
        + eps.powi(3) * gamma * (a2 - 0.25 * a1 * a1);
    let mut series_order = 3;
    if let Some(&a3) = coeffs.get(2) {
        series += eps.powi(4) * gamma * (-a3 + 0.5 * a1 * a2 - 0.125 * a1 * a1 * a1);
        series_order = 4;
    }
    Ok(LateralMap { exact, series, series_order })
}

/// The constraint hierarchy forced by isochronism.
#[derive(Debug, Clone, Copy)]
pub struct ConstraintReport {
    /// `omega Phi_C / pi - 1`; vanishes by construction of `Phi_C`.
    pub gamma_check: f64,
    /// The order-epsilon constraint is `0 * a1 = 0`: no information.
    pub a1_unconstrained: bool,
    /// `W''''(x0) - (5/3) W'''(x0)^2 / (m omega^2)`, the order-epsilon^2
    /// constraint connecting third and fourth derivatives (equivalently
    /// `a2 = (5/4) a1^2`).
    pub fourth_order_violation: f64,
}

pub fn isochrony_constraints(problem: &RadialProblem) -> Result<ConstraintReport> {
    let x0 = problem.x0();
    let curv = turning::curvature(problem)?;
    let phi_c = turning::circular_apsidal(problem.potential(), problem.circular_radius())?;
    let gamma_check = curv.omega_sq.sqrt() * phi_c / std::f64::consts::PI - 1.0;
    let w3 = match problem.clairaut_derivative_exact(x0, 3) {
        Some(v) => v,
        None => problem.clairaut_potential(x0, 3)?,
    };
    let w4 = match problem.clairaut_derivative_exact(x0, 4) {
        Some(v) => v,
        None => problem.clairaut_potential(x0, 4)?,
    };
    let fourth_order_violation = w4 - (5.0 / 3.0) * w3 * w3 / curv.w_second;
    Ok(ConstraintReport { gamma_check, a1_unconstrained: true, fourth_order_violation })
}

/// One reconstructed sample: radius, potential value, potential slope.
#[derive(Debug, Clone, Copy)]
pub struct ReconstructedSample {
    pub r: f64,
    pub u: f64,
    pub du: f64,
}

/// Rebuilds a central potential from its near-circular apsidal law:
///
/// ```text
/// U(r) = ∫^r dr' exp(-∫^{r'} (3 - (pi/Phi_C(rho))^2) drho / rho)
/// ```
///
/// Both integration constants are gauged to `U = 0`, `U' = 1` at the grid
/// midpoint. The inner exponent integral accumulates over grid cells with
/// nested Gauss-Legendre rules.
pub fn reconstruct_potential(
    phi_c: &(dyn Fn(f64) -> f64 + Sync),
    r_grid: &[f64],
    tol: f64,
) -> Result<Vec<ReconstructedSample>> {
    if r_grid.len() < 3 {
        return Err(Error::InvalidGrid("reconstruction needs at least 3 radii".into()));
    }
    if r_grid[0] <= 0.0 || r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(
            "reconstruction grid must be positive and strictly increasing".into(),
        ));
    }
    let n = r_grid.len();
    let mid = n / 2;
    // h(rho) = (3 - (pi/Phi_C(rho))^2) / rho; U'(r) = exp(-I(r)) with
    // I(r) = ∫_{r_mid}^r h.
    let exponent_term = |rho: f64| -> Result<f64> {
        let phi = phi_c(rho);
        if !(phi > 0.0) || !phi.is_finite() {
            return Err(Error::DomainError(format!(
                "apsidal law must be positive, got {phi} at rho = {rho}"
            )));
        }
        let ratio = std::f64::consts::PI / phi;
        Ok((3.0 - ratio * ratio) / rho)
    };
    let cell_tol = tol / n as f64;

    // Exponent integral at the grid points, accumulated away from the
    // midpoint in both directions.
    let mut i_grid = vec![0.0; n];
    for idx in mid..n - 1 {
        let q = integrate_checked(&exponent_term, r_grid[idx], r_grid[idx + 1], cell_tol)?;
        i_grid[idx + 1] = i_grid[idx] + q;
    }
    for idx in (0..mid).rev() {
        let q = integrate_checked(&exponent_term, r_grid[idx], r_grid[idx + 1], cell_tol)?;
        i_grid[idx] = i_grid[idx + 1] - q;
    }

    // U by cellwise quadrature of exp(-I); I at interior nodes through a
    // nested rule from the cell's left edge.
    let mut samples: Vec<ReconstructedSample> = r_grid
        .iter()
        .zip(&i_grid)
        .map(|(&r, &i)| ReconstructedSample { r, u: 0.0, du: (-i).exp() })
        .collect();
    let mut u_cells = vec![0.0; n - 1];
    for idx in 0..n - 1 {
        let (a, b) = (r_grid[idx], r_grid[idx + 1]);
        let i_a = i_grid[idx];
        let du_of = |r: f64| -> Result<f64> {
            let inner = integrate_checked(&exponent_term, a, r, cell_tol)?;
            Ok((-(i_a + inner)).exp())
        };
        u_cells[idx] = integrate_checked(&du_of, a, b, cell_tol)?;
    }
    for idx in mid..n - 1 {
        samples[idx + 1].u = samples[idx].u + u_cells[idx];
    }
    for idx in (0..mid).rev() {
        samples[idx].u = samples[idx + 1].u - u_cells[idx];
    }
    Ok(samples)
}

/// Doubling quadrature over a fallible integrand.
fn integrate_checked(
    f: &dyn Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64> {
    let mut failure = None;
    let wrapped = |x: f64| match f(x) {
        Ok(v) => v,
        Err(e) => {
            failure = Some(e);
            f64::NAN
        }
    };
    // The closure mutates captured state; route through a cell.
    let cell = std::cell::RefCell::new(wrapped);
    let q = quadrature::integrate(|x| (cell.borrow_mut())(x), a, b, tol);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(q?.value)
}
