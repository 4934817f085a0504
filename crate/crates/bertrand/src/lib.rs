//! Numerical toolkit for central-force orbits built around Clairaut's
//! inverse-radius variable.
//!
//! The crate computes apsidal angles of bounded orbits by singular
//! quadrature, inverts period laws into turning-point widths through
//! semi-derivative / semi-integral (Abel) operators, and verifies, both
//! globally and perturbatively, that among power-law central potentials
//! only the Newton (`-k/r`) and Hooke (`k r^2`) cases make every bounded
//! orbit close.
//!
//! Module map:
//! - [`potentials`]: potential families, effective and Clairaut potentials.
//! - [`turning`]: circular orbits, turning points, near-circular apsidal
//!   angle.
//! - [`quadrature`]: the shared endpoint-singular quadrature kernel.
//! - [`apsidal`]: apsidal angle and radial half-period integrals.
//! - [`fractional`]: semi-derivative and semi-integral operators; period
//!   inversion.
//! - [`isochrony`]: functional-equation residuals, the selection conditions
//!   for closed orbits, perturbative constraints, and potential
//!   reconstruction from an apsidal law.
//! - [`orbit`]: trajectory integration in both formulations and closure
//!   classification.
//! - [`cli`]: the `bertrand` command-line interface.

// Comparisons are written `!(x > 0.0)` on purpose: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apsidal;
pub mod cli;
pub mod error;
pub mod fractional;
pub mod isochrony;
pub mod orbit;
pub mod potentials;
pub mod quadrature;
pub mod turning;

pub use error::{Error, Result};
pub use potentials::{PotentialSpec, RadialProblem};
pub use turning::TurningPair;
