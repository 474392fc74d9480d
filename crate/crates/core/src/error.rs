//! Error types shared by all modules.

use crate::bifurcation::CurveId;

/// Errors raised by chart conversions, classification and integration.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Both strengths must be nonzero; the problem degenerates to a Kepler
    /// problem otherwise.
    #[error("charge strengths must be nonzero, got z1 = {z1}, z2 = {z2}")]
    ZeroCharge { z1: f64, z2: f64 },

    /// A Cartesian position is too close to one of the centers at (±1, 0).
    #[error("position ({q1}, {q2}) is within {eps:e} of a focus")]
    FocusCollision { q1: f64, q2: f64, eps: f64 },

    /// The elliptic chart is degenerate (momentum lift not invertible, or a
    /// separated-chart denominator vanishes).
    #[error("degenerate chart at (xi, eta) = ({xi}, {eta}): factor {factor:e} below guard")]
    DegenerateChart { xi: f64, eta: f64, factor: f64 },

    /// Separated-chart coordinate outside its domain (x ≥ 1, |y| ≤ 1).
    #[error("separated coordinate {name} = {value} outside its domain")]
    OutsideChartDomain { name: &'static str, value: f64 },

    /// Negative energies are out of scope for the classifier and the
    /// scattering integrator.
    #[error("energy E = {e} is negative; only E >= 0 is covered")]
    NegativeEnergy { e: f64 },

    /// A Poincaré section was requested at energy parameters lying on the
    /// bifurcation set, where the regular-region construction fails.
    #[error("(E, K) = ({e}, {k}) lies on bifurcation curve(s) {curves:?}")]
    OnBifurcationCurve {
        e: f64,
        k: f64,
        curves: Vec<CurveId>,
    },

    /// No section rule applies to this interval pattern (reported, not
    /// guessed).
    #[error("no Poincaré section rule for interval pattern `{pattern}`")]
    NoSectionRule { pattern: String },

    /// The requested level set is empty or the given point lies outside it.
    #[error("point ({x}, {y}) is classically forbidden at (E, K) = ({e}, {k})")]
    ForbiddenPoint { x: f64, y: f64, e: f64, k: f64 },

    /// The interval handed to `detect_boundedness` is not one of the
    /// classifier's x-intervals.
    #[error("interval [{lo}, {hi}] is not an x-interval of the classification")]
    UnknownComponent { lo: f64, hi: f64 },

    /// Classifier and integrator disagree on boundedness. This is a hard
    /// diagnostic: it indicates an integrator defect, not a data problem.
    #[error(
        "boundedness mismatch on [{lo}, {hi}]: classifier says bounded={classifier_bounded}, \
         integration observed x_max = {observed_x_max}"
    )]
    BoundednessMismatch {
        lo: f64,
        hi: f64,
        classifier_bounded: bool,
        observed_x_max: f64,
    },
}
