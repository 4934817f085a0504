//! The shared singular-quadrature kernel.
//!
//! All period-style integrals in this crate have the form
//! `∫_a^b f(x) dx` where `f` carries inverse-square-root singularities at one
//! or both endpoints (simple turning points). The substitution
//! `x = a + (b - a) sin^2(theta)` maps the interval to `[0, pi/2]` and makes
//! the integrand bounded: `dx = (b - a) sin(2 theta) dtheta` supplies a zero
//! at each endpoint that cancels the inverse-square-root blowup.
//!
//! The transformed integrand is then handled by fixed-order Gauss-Legendre
//! with order doubling (8, 16, ..., 1024): the run stops when two successive
//! estimates agree within the requested tolerance, which also serves as the
//! a posteriori error estimate.

use crate::error::{Error, Result};
use std::sync::OnceLock;

/// Orders tried by the doubling driver, in sequence.
pub const DOUBLING_ORDERS: [usize; 8] = [8, 16, 32, 64, 128, 256, 512, 1024];

/// Converged value of an adaptive-order quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    pub value: f64,
    /// Difference between the two final estimates.
    pub err_est: f64,
    /// Node count of the accepted rule.
    pub nodes: usize,
}

/// Gauss-Legendre nodes and weights on [-1, 1], cached for the doubling
/// sequence.
pub fn gauss_legendre(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: [OnceLock<(Vec<f64>, Vec<f64>)>; DOUBLING_ORDERS.len()] =
        [const { OnceLock::new() }; DOUBLING_ORDERS.len()];
    let slot = DOUBLING_ORDERS
        .iter()
        .position(|&m| m == n)
        .unwrap_or_else(|| panic!("order {n} not in the doubling sequence"));
    CACHE[slot].get_or_init(|| legendre_rule(n))
}

/// Newton iteration on the Legendre polynomial `P_n`, seeded with the
/// Chebyshev-like estimate `cos(pi (i - 1/4) / (n + 1/2))`.
fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_eval(n, x);
            let step = p / d;
            x -= step;
            if step.abs() <= 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_eval(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Symmetric pair; the Chebyshev seed enumerates the positive half.
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // (1 - x^2) P_n'(x) = n (P_{n-1}(x) - x P_n(x))
    let d = n as f64 * (p0 - x * p1) / (1.0 - x * x);
    (p1, d)
}

fn rule_sum(f: &impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    nodes
        .iter()
        .zip(weights)
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// `∫_a^b f(x) dx` for a smooth integrand, by Gauss-Legendre order doubling.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    if a == b {
        return Ok(QuadratureResult { value: 0.0, err_est: 0.0, nodes: 0 });
    }
    let mut prev = rule_sum(&f, a, b, DOUBLING_ORDERS[0]);
    let mut diff = f64::INFINITY;
    for &n in &DOUBLING_ORDERS[1..] {
        let cur = rule_sum(&f, a, b, n);
        diff = (cur - prev).abs();
        if diff <= tol {
            return Ok(QuadratureResult { value: cur, err_est: diff, nodes: n });
        }
        prev = cur;
    }
    Err(Error::ToleranceNotMet { requested: tol, achieved: diff })
}

/// `∫_a^b f(x) dx` where `f` has inverse-square-root integrable
/// singularities at the endpoints, via `x = a + (b - a) sin^2(theta)`.
pub fn integrate_endpoint_singular(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<QuadratureResult> {
    let width = b - a;
    if width == 0.0 {
        return Ok(QuadratureResult { value: 0.0, err_est: 0.0, nodes: 0 });
    }
    let g = move |theta: f64| {
        let s = theta.sin();
        let x = a + width * s * s;
        f(x) * width * (2.0 * theta).sin()
    };
    integrate(g, 0.0, std::f64::consts::FRAC_PI_2, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    #[allow(clippy::excessive_precision)]
    fn nodes_match_reference_order_8() {
        // Abramowitz & Stegun, table 25.4.
        let expected_nodes = [
            0.183_434_642_495_649_8,
            0.525_532_409_916_329_0,
            0.796_666_477_413_626_7,
            0.960_289_856_497_536_3,
        ];
        let expected_weights = [
            0.362_683_783_378_362_0,
            0.313_706_645_877_887_3,
            0.222_381_034_453_374_5,
            0.101_228_536_290_376_3,
        ];
        let (nodes, weights) = gauss_legendre(8);
        for (i, (&xn, &wn)) in expected_nodes.iter().zip(&expected_weights).enumerate() {
            assert!((nodes[4 + i] - xn).abs() < 1e-15, "node {i}");
            assert!((weights[4 + i] - wn).abs() < 1e-15, "weight {i}");
            assert!((nodes[3 - i] + xn).abs() < 1e-15, "mirror node {i}");
        }
    }

    #[test]
    fn weights_sum_to_two() {
        for &n in &DOUBLING_ORDERS {
            let (_, weights) = gauss_legendre(n);
            let sum: f64 = weights.iter().sum();
            assert!((sum - 2.0).abs() < 1e-13, "order {n}: {sum}");
        }
    }

    #[test]
    fn polynomial_exactness() {
        // Order n integrates degree 2n-1 exactly: x^15 on [0, 1] with n = 8.
        let r = integrate(|x: f64| x.powi(15), 0.0, 1.0, 1e-14).unwrap();
        assert!((r.value - 1.0 / 16.0).abs() < 1e-15);
        assert_eq!(r.nodes, 16);
    }

    #[test]
    fn smooth_integral_converges() {
        let r = integrate(f64::sin, 0.0, PI, 1e-12).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
        assert!(r.err_est <= 1e-12);
    }

    #[test]
    fn endpoint_singular_half_circle() {
        // ∫_{-1}^{1} dx / sqrt(1 - x^2) = pi.
        let r = integrate_endpoint_singular(
            |x: f64| 1.0 / (1.0 - x * x).sqrt(),
            -1.0,
            1.0,
            1e-12,
        )
        .unwrap();
        assert!((r.value - PI).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn endpoint_singular_beta_integral() {
        // ∫_0^1 dx / sqrt(x (1 - x)) = pi.
        let r = integrate_endpoint_singular(
            |x: f64| 1.0 / (x * (1.0 - x)).sqrt(),
            0.0,
            1.0,
            1e-12,
        )
        .unwrap();
        assert!((r.value - PI).abs() < 1e-12);
    }

    #[test]
    fn singular_only_at_one_end() {
        // ∫_0^1 dx / sqrt(x) = 2.
        let r = integrate_endpoint_singular(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tolerance_failure_reported() {
        // A step discontinuity defeats polynomial convergence.
        let r = integrate(|x: f64| if x > 0.123_456 { 1.0 } else { 0.0 }, 0.0, 1.0, 1e-14);
        assert!(matches!(r, Err(Error::ToleranceNotMet { .. })));
    }

    #[test]
    fn degenerate_interval_is_zero() {
        let r = integrate(|_| 1.0, 2.0, 2.0, 1e-12).unwrap();
        assert_eq!(r.value, 0.0);
        let r = integrate_endpoint_singular(|_| 1.0, 2.0, 2.0, 1e-12).unwrap();
        assert_eq!(r.value, 0.0);
    }
}
