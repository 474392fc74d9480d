//! Planar two-fixed-centers (Euler–Jacobi) problem for arbitrary nonzero
//! strengths.
//!
//! The library is organised around the separated form of the problem:
//!
//! * [`coords`] — coordinate charts (Cartesian ↔ elliptic ↔ separated),
//!   canonical momentum lifts, the Jacobian factor `F`, and the two-sheeted
//!   cover with its involution.
//! * [`separation`] — Hamiltonians and effective potentials of the separated
//!   problem, the energy-momentum map `(E, K)`, and the degree-4 motion
//!   polynomials whose roots drive everything else.
//! * [`bifurcation`] — the explicit bifurcation set for `E ≥ 0`, Hill-region
//!   bounds, movable roots, discriminants, and the region classifier.
//! * [`dynamics`] — trajectory integration in the fictitious time `s`
//!   (`dt/ds = F`), event detection (turning points, axis crossings,
//!   collisions), Poincaré sections, and boundedness checks.
//!
//! All types are plain immutable values and every operation is a pure
//! function of its inputs, so concurrent use needs no synchronisation.

pub mod bifurcation;
pub mod coords;
pub mod dynamics;
pub mod error;
pub mod separation;

mod dopri;

pub use coords::{CartesianState, ChargeConfig, EllipticState, SeparatedState, Sheet};
pub use error::Error;
pub use separation::EnergyMomentum;

/// Chart-degeneracy and focus-collision guard. Well above double-precision
/// noise, far below any physically meaningful scale of the problem.
pub const EPS_CHART: f64 = 1e-10;

/// Distance from a focus at which integration stops with a collision
/// diagnostic (collision regularisation is out of scope).
pub const EPS_COLLISION: f64 = 1e-8;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
