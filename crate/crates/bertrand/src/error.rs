use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("Clairaut variable must be positive, got {0}")]
    NonPositiveClairautVariable(f64),

    #[error("derivative order {order} not supported for {family} potentials")]
    UnsupportedDerivativeOrder { order: usize, family: &'static str },

    #[error("no circular orbit: {0}")]
    NoCircularOrbit(String),

    #[error("energy {energy} lies below the effective minimum {v_min}")]
    EnergyBelowMinimum { energy: f64, v_min: f64 },

    #[error("orbit is unbounded at energy {0}")]
    UnboundedOrbit(f64),

    #[error("unstable circular orbit: curvature denominator {0} is not positive")]
    UnstableCircularOrbit(f64),

    #[error("quadrature tolerance not met: requested {requested:e}, achieved {achieved:e}")]
    ToleranceNotMet { requested: f64, achieved: f64 },

    #[error("regularity violation: {0}")]
    RegularityViolation(&'static str),

    #[error("probe {x} outside the domain (0, {x0}]")]
    ProbeOutOfDomain { x: f64, x0: f64 },

    #[error("displaced point {0} is not positive")]
    DisplacedPointNonPositive(f64),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
