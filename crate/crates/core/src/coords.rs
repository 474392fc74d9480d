//! Coordinate charts and canonical momentum lifts.
//!
//! The two centers sit at `(±1, 0)`. Elliptic coordinates `(ξ, η)` are
//! defined by
//!
//! ```text
//! q1 = cosh(ξ) cos(η),    q2 = sinh(ξ) sin(η),
//! ```
//!
//! with Jacobian determinant `F(ξ, η) = sinh²ξ + sin²η = cosh²ξ − cos²η`.
//! Level curves of `ξ` are confocal ellipses, level curves of `η` confocal
//! half-hyperbolas. The separated chart is `x = cosh ξ ∈ [1, ∞)`,
//! `y = cos η ∈ [−1, 1]`; it covers each half-plane once, so a sheet flag
//! distinguishes the sign of `q2`. On the extended strip `ℝ × [−π, π]` the
//! deck transformation of the two-sheeted cover is the involution
//! `Î: (p_ξ, p_η, ξ, η) ↦ (−p_ξ, −p_η, −ξ, −η)`.

use crate::error::Error;
use crate::{Result, EPS_CHART};

/// Which half-plane a point belongs to: `Upper` means `q2 ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sheet {
    Upper,
    Lower,
}

/// The pair of strengths `(Z₁, Z₂)` with the derived combinations
/// `Z₊ = Z₂ + Z₁` and `Z₋ = Z₂ − Z₁`.
///
/// Construction normalises to the convention `Z₋ ≥ 0`: if `Z₂ − Z₁ < 0` the
/// two centers are relabelled (swap `Z₁ ↔ Z₂`, reflect `q₁ ↦ −q₁`), which
/// halves the case analysis downstream. The reflection is recorded in
/// [`ChargeConfig::reflected`] and Cartesian states passed to or returned
/// from the library are mapped across it transparently, so callers always
/// work in their original frame. Elliptic and separated states refer to the
/// canonical (internal) frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeConfig {
    z1: f64,
    z2: f64,
    reflected: bool,
}

impl ChargeConfig {
    /// Builds a configuration from the caller's `(z1, z2)`. Errors if either
    /// strength is zero.
    pub fn new(z1: f64, z2: f64) -> Result<Self> {
        if z1 == 0.0 || z2 == 0.0 || !z1.is_finite() || !z2.is_finite() {
            return Err(Error::ZeroCharge { z1, z2 });
        }
        if z2 - z1 < 0.0 {
            Ok(Self {
                z1: z2,
                z2: z1,
                reflected: true,
            })
        } else {
            Ok(Self {
                z1,
                z2,
                reflected: false,
            })
        }
    }

    /// Strength of the center at `(+1, 0)` in the canonical frame.
    pub fn z1(&self) -> f64 {
        self.z1
    }

    /// Strength of the center at `(−1, 0)` in the canonical frame.
    pub fn z2(&self) -> f64 {
        self.z2
    }

    /// `Z₊ = Z₂ + Z₁` (recomputed, never stored).
    pub fn z_plus(&self) -> f64 {
        self.z2 + self.z1
    }

    /// `Z₋ = Z₂ − Z₁ ≥ 0` in the canonical frame.
    pub fn z_minus(&self) -> f64 {
        self.z2 - self.z1
    }

    /// True if construction relabelled the centers (`q₁ ↦ −q₁`).
    pub fn reflected(&self) -> bool {
        self.reflected
    }

    /// The caller's original pair, undoing the relabelling.
    pub fn user_charges(&self) -> (f64, f64) {
        if self.reflected {
            (self.z2, self.z1)
        } else {
            (self.z1, self.z2)
        }
    }

    /// Maps a caller-frame Cartesian state into the canonical frame.
    /// Involutive, so it is its own inverse.
    pub fn to_internal(&self, s: CartesianState) -> CartesianState {
        if self.reflected {
            CartesianState {
                q1: -s.q1,
                q2: s.q2,
                p1: -s.p1,
                p2: s.p2,
            }
        } else {
            s
        }
    }

    /// Maps a canonical-frame Cartesian state back to the caller's frame.
    pub fn to_user(&self, s: CartesianState) -> CartesianState {
        self.to_internal(s)
    }
}

/// Phase-space point in Cartesian coordinates; the centers are at `(±1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianState {
    pub q1: f64,
    pub q2: f64,
    pub p1: f64,
    pub p2: f64,
}

impl CartesianState {
    pub fn new(q1: f64, q2: f64, p1: f64, p2: f64) -> Self {
        Self { q1, q2, p1, p2 }
    }

    /// Distances to the centers at `(+1, 0)` and `(−1, 0)`.
    pub fn focal_distances(&self) -> (f64, f64) {
        let r1 = ((self.q1 - 1.0).powi(2) + self.q2 * self.q2).sqrt();
        let r2 = ((self.q1 + 1.0).powi(2) + self.q2 * self.q2).sqrt();
        (r1, r2)
    }
}

/// Phase-space point in elliptic coordinates on the extended strip
/// `ξ ∈ ℝ`, `η ∈ [−π, π]`. The sheet flag records the half-plane of the
/// projected point (`sign q2`) and is invariant under the involution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticState {
    pub xi: f64,
    pub eta: f64,
    pub p_xi: f64,
    pub p_eta: f64,
    pub sheet: Sheet,
}

impl EllipticState {
    pub fn new(p_xi: f64, p_eta: f64, xi: f64, eta: f64) -> Self {
        let q2 = xi.sinh() * eta.sin();
        let sheet = if q2 >= 0.0 { Sheet::Upper } else { Sheet::Lower };
        Self {
            xi,
            eta,
            p_xi,
            p_eta,
            sheet,
        }
    }
}

/// Phase-space point in the separated chart `x = cosh ξ`, `y = cos η`,
/// `p_x = p_ξ / sinh ξ`, `p_y = p_η / sin η`.
///
/// The tuple `(x, y, p_x, p_y)` is invariant under the involution, so it is
/// the same for both covering representatives; the sheet flag carries the
/// sign of `q2` needed to reconstruct the Cartesian point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparatedState {
    pub x: f64,
    pub y: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub sheet: Sheet,
}

/// Forward chart map: `(ξ, η) ↦ (q1, q2)`. Defined on all of ℝ².
pub fn elliptic_to_cartesian(xi: f64, eta: f64) -> (f64, f64) {
    (xi.cosh() * eta.cos(), xi.sinh() * eta.sin())
}

/// Jacobian determinant of the chart map, `sinh²ξ + sin²η`.
///
/// Vanishes exactly at the foci `(ξ, η) ∈ {0} × {0, ±π}`; the alternative
/// closed form `cosh²ξ − cos²η` agrees to machine precision.
pub fn jacobian_f(xi: f64, eta: f64) -> f64 {
    let sh = xi.sinh();
    let sn = eta.sin();
    sh * sh + sn * sn
}

/// Jacobian factor in the separated chart, `F̂(x, y) = x² − y²`.
pub fn jacobian_f_xy(x: f64, y: f64) -> f64 {
    x * x - y * y
}

/// Inverse chart map on positions.
///
/// Uses the confocal-distance identities `x = (r₁ + r₂)/2`,
/// `y = (r₂ − r₁)/2` rearranged into cancellation-free forms:
///
/// ```text
/// y        = 2 q₁ / (r₁ + r₂)
/// sinh²ξ   = (u + √(u² + 4 q₂²)) / 2,   u := q₁² + q₂² − 1
/// sin η    = q₂ / sinh ξ
/// ```
///
/// so the round trip stays below 1e−12 even arbitrarily close to the
/// inter-focal segment. Axis points map to the chart boundary: `η ∈ {0, π}`
/// on the outer axis, `ξ = 0` on the segment between the centers (the
/// degenerate boundary of the chart). By convention the negative outer axis
/// gets `η = +π`, the upper half-plane `η ∈ (0, π)` and the lower
/// `η ∈ (−π, 0)`, i.e. the `ξ ≥ 0` representative.
pub fn cartesian_to_elliptic(q1: f64, q2: f64) -> Result<(f64, f64)> {
    let r1 = ((q1 - 1.0).powi(2) + q2 * q2).sqrt();
    let r2 = ((q1 + 1.0).powi(2) + q2 * q2).sqrt();
    if r1 < EPS_CHART || r2 < EPS_CHART {
        return Err(Error::FocusCollision {
            q1,
            q2,
            eps: EPS_CHART,
        });
    }

    let u = q1 * q1 + q2 * q2 - 1.0;
    let disc = (u * u + 4.0 * q2 * q2).sqrt();
    // sinh²ξ = (u + disc)/2, rewritten for u < 0 to avoid cancellation.
    let sinh2 = if u >= 0.0 {
        0.5 * (u + disc)
    } else {
        2.0 * q2 * q2 / (disc - u)
    };
    let sinh_xi = sinh2.max(0.0).sqrt();
    let xi = sinh_xi.asinh();

    let y = (2.0 * q1 / (r1 + r2)).clamp(-1.0, 1.0);
    let eta = if sinh_xi > 0.0 {
        let sin_eta = (q2 / sinh_xi).clamp(-1.0, 1.0);
        sin_eta.atan2(y)
    } else {
        // On the inter-focal segment both signs of η represent the point;
        // pick the non-negative branch.
        y.acos()
    };
    // Convention: represent the negative outer axis by η = +π.
    let eta = if eta == -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        eta
    };
    Ok((xi, eta))
}

/// Jacobian matrix `DG(ξ, η)` of the chart map, rows = (∂q₁, ∂q₂).
fn chart_jacobian(xi: f64, eta: f64) -> [[f64; 2]; 2] {
    let (sh, ch) = (xi.sinh(), xi.cosh());
    let (sn, cs) = (eta.sin(), eta.cos());
    [[sh * cs, -ch * sn], [ch * sn, sh * cs]]
}

/// Canonical momentum lift `(p_ξ, p_η) = DGᵀ (p₁, p₂)`.
///
/// The lift itself is defined everywhere; it is only its inverse that
/// requires `F ≠ 0`.
pub fn lift_momenta_to_elliptic(xi: f64, eta: f64, p1: f64, p2: f64) -> (f64, f64) {
    let dg = chart_jacobian(xi, eta);
    (
        dg[0][0] * p1 + dg[1][0] * p2,
        dg[0][1] * p1 + dg[1][1] * p2,
    )
}

/// Inverse momentum lift `(p₁, p₂) = (DG⁻¹)ᵀ (p_ξ, p_η) = DG (p_ξ, p_η)/F`.
///
/// Errors where the chart is degenerate (`F < ε`), i.e. at the foci.
pub fn momenta_to_cartesian(xi: f64, eta: f64, p_xi: f64, p_eta: f64) -> Result<(f64, f64)> {
    let f = jacobian_f(xi, eta);
    if f < EPS_CHART {
        return Err(Error::DegenerateChart { xi, eta, factor: f });
    }
    let dg = chart_jacobian(xi, eta);
    Ok((
        (dg[0][0] * p_xi + dg[0][1] * p_eta) / f,
        (dg[1][0] * p_xi + dg[1][1] * p_eta) / f,
    ))
}

/// Full state conversion Cartesian → elliptic (canonical `ξ ≥ 0`
/// representative).
pub fn cartesian_state_to_elliptic(s: &CartesianState) -> Result<EllipticState> {
    let (xi, eta) = cartesian_to_elliptic(s.q1, s.q2)?;
    let (p_xi, p_eta) = lift_momenta_to_elliptic(xi, eta, s.p1, s.p2);
    Ok(EllipticState::new(p_xi, p_eta, xi, eta))
}

/// Full state conversion elliptic → Cartesian.
pub fn elliptic_state_to_cartesian(s: &EllipticState) -> Result<CartesianState> {
    let (q1, q2) = elliptic_to_cartesian(s.xi, s.eta);
    let (p1, p2) = momenta_to_cartesian(s.xi, s.eta, s.p_xi, s.p_eta)?;
    Ok(CartesianState { q1, q2, p1, p2 })
}

/// Chart change elliptic → separated, induced by the generating function
/// `S₂ = cosh(ξ) p_x + cos(η) p_y`:
///
/// ```text
/// x = cosh ξ,   y = cos η,   p_ξ = sinh(ξ) p_x,   p_η = sin(η) p_y.
/// ```
///
/// All four output quantities are invariant under the involution, so both
/// covering representatives give the same separated tuple; the half-plane
/// survives in the sheet flag. Errors where a denominator degenerates
/// (`|sinh ξ|` or `|sin η|` below the chart guard).
pub fn elliptic_to_separated(s: &EllipticState) -> Result<SeparatedState> {
    let sh = s.xi.sinh();
    let sn = s.eta.sin();
    if sh.abs() < EPS_CHART || sn.abs() < EPS_CHART {
        return Err(Error::DegenerateChart {
            xi: s.xi,
            eta: s.eta,
            factor: sh.abs().min(sn.abs()),
        });
    }
    Ok(SeparatedState {
        x: s.xi.cosh(),
        y: s.eta.cos(),
        p_x: s.p_xi / sh,
        p_y: s.p_eta / sn,
        sheet: s.sheet,
    })
}

/// Inverse chart change separated → elliptic, returning the `ξ ≥ 0`
/// representative with `η ∈ (0, π)` on the upper sheet and `η ∈ (−π, 0)` on
/// the lower one.
pub fn separated_to_elliptic(s: &SeparatedState) -> Result<EllipticState> {
    if !(s.x >= 1.0) {
        return Err(Error::OutsideChartDomain {
            name: "x",
            value: s.x,
        });
    }
    if s.y.abs() > 1.0 {
        return Err(Error::OutsideChartDomain {
            name: "y",
            value: s.y,
        });
    }
    let xi = s.x.acosh();
    let eta_mag = s.y.acos();
    let eta = match s.sheet {
        Sheet::Upper => eta_mag,
        Sheet::Lower => -eta_mag,
    };
    Ok(EllipticState {
        xi,
        eta,
        p_xi: xi.sinh() * s.p_x,
        p_eta: eta.sin() * s.p_y,
        sheet: s.sheet,
    })
}

/// The involution `Î: (p_ξ, p_η, ξ, η) ↦ (−p_ξ, −p_η, −ξ, −η)` relating the
/// two sheets of the covering strip. Applying it twice is the identity and
/// the Cartesian projection is unchanged.
pub fn involution(s: &EllipticState) -> EllipticState {
    EllipticState {
        xi: -s.xi,
        eta: -s.eta,
        p_xi: -s.p_xi,
        p_eta: -s.p_eta,
        sheet: s.sheet,
    }
}
