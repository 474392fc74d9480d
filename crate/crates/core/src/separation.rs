//! Hamiltonians and potentials of the separated problem, the
//! energy-momentum map, and the motion polynomials.
//!
//! After the time reparametrisation `dt/ds = F(ξ, η)` the flow on an energy
//! level `H = E` splits into two decoupled one-degree-of-freedom systems
//!
//! ```text
//! H_ξ = p_ξ²/2 + V_ξ(ξ),   V_ξ(ξ) = −Z₊ cosh ξ − E cosh²ξ,
//! H_η = p_η²/2 + V_η(η),   V_η(η) =  Z₋ cos η  + E cos²η,
//! ```
//!
//! with `H_ξ = K = −H_η` along the motion. In the separated chart these
//! become `H_x = (x²−1)p_x²/2 + V_x(x)` and `H_y = (1−y²)p_y²/2 + V_y(y)`
//! with `V_x = −Z₊x − Ex²`, `V_y = Z₋y + Ey²`. Squared momenta at fixed
//! `(E, K)` are governed by the degree-4 polynomials
//! `P_±(s) = 2(s²−1)(Es² + Z_± s + K)`, which have fixed roots at `±1` and
//! two movable roots.

use crate::coords::{
    cartesian_state_to_elliptic, CartesianState, ChargeConfig, EllipticState, SeparatedState,
};
use crate::error::Error;
use crate::{Result, EPS_CHART};

/// Relative tolerance of the internal dual evaluation of `K`. A violation
/// is logged as a diagnostic, not raised as an error: it catches chart bugs
/// early while tolerating boundary roundoff.
pub const DUAL_K_REL_TOL: f64 = 1e-10;

/// Values `(E, K)` of the two constants of motion `H` and `H_ξ`.
///
/// The second constant appears in the source material both as `L` and as
/// `K`; they name the same value and live here as `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyMomentum {
    pub e: f64,
    pub k: f64,
}

impl EnergyMomentum {
    pub fn new(e: f64, k: f64) -> Self {
        Self { e, k }
    }
}

/// Which separated degree of freedom a polynomial or momentum refers to:
/// `Plus` is the x-branch (`P₊`, coefficient `Z₊`), `Minus` the y-branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    /// The strength coefficient `Z_±` entering this branch.
    pub fn z(self, charges: &ChargeConfig) -> f64 {
        match self {
            Branch::Plus => charges.z_plus(),
            Branch::Minus => charges.z_minus(),
        }
    }
}

/// Full Hamiltonian `|p|²/2 − Z₁/|q−a| − Z₂/|q+a|` in the caller's frame.
pub fn hamiltonian(state: &CartesianState, charges: &ChargeConfig) -> Result<f64> {
    let s = charges.to_internal(*state);
    let (r1, r2) = s.focal_distances();
    if r1 < EPS_CHART || r2 < EPS_CHART {
        return Err(Error::FocusCollision {
            q1: state.q1,
            q2: state.q2,
            eps: EPS_CHART,
        });
    }
    Ok(0.5 * (s.p1 * s.p1 + s.p2 * s.p2) - charges.z1() / r1 - charges.z2() / r2)
}

/// Effective potential of the ξ-motion, `V_ξ(ξ) = −Z₊ cosh ξ − E cosh²ξ`.
pub fn potential_v_xi(xi: f64, e: f64, charges: &ChargeConfig) -> f64 {
    let c = xi.cosh();
    -charges.z_plus() * c - e * c * c
}

/// Effective potential of the η-motion, `V_η(η) = Z₋ cos η + E cos²η`.
pub fn potential_v_eta(eta: f64, e: f64, charges: &ChargeConfig) -> f64 {
    let c = eta.cos();
    charges.z_minus() * c + e * c * c
}

/// `V_x(x) = −Z₊x − Ex²` on `x ≥ 1`.
pub fn potential_v_x(x: f64, e: f64, charges: &ChargeConfig) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(Error::OutsideChartDomain {
            name: "x",
            value: x,
        });
    }
    Ok(-charges.z_plus() * x - e * x * x)
}

/// `V_y(y) = Z₋y + Ey²` on `|y| ≤ 1`.
pub fn potential_v_y(y: f64, e: f64, charges: &ChargeConfig) -> Result<f64> {
    if y.abs() > 1.0 {
        return Err(Error::OutsideChartDomain {
            name: "y",
            value: y,
        });
    }
    Ok(charges.z_minus() * y + e * y * y)
}

/// `H_ξ(p_ξ, ξ) = p_ξ²/2 + V_ξ(ξ)`; its value along the motion is `K`.
pub fn h_xi(p_xi: f64, xi: f64, e: f64, charges: &ChargeConfig) -> f64 {
    0.5 * p_xi * p_xi + potential_v_xi(xi, e, charges)
}

/// `H_η(p_η, η) = p_η²/2 + V_η(η)`; its value along the motion is `−K`.
pub fn h_eta(p_eta: f64, eta: f64, e: f64, charges: &ChargeConfig) -> f64 {
    0.5 * p_eta * p_eta + potential_v_eta(eta, e, charges)
}

/// `H_x(p_x, x) = (x²−1)p_x²/2 + V_x(x)`, the ξ-Hamiltonian transported to
/// the separated chart.
pub fn h_x(p_x: f64, x: f64, e: f64, charges: &ChargeConfig) -> Result<f64> {
    Ok(0.5 * (x * x - 1.0) * p_x * p_x + potential_v_x(x, e, charges)?)
}

/// `H_y(p_y, y) = (1−y²)p_y²/2 + V_y(y)`.
pub fn h_y(p_y: f64, y: f64, e: f64, charges: &ChargeConfig) -> Result<f64> {
    Ok(0.5 * (1.0 - y * y) * p_y * p_y + potential_v_y(y, e, charges)?)
}

/// Both evaluations of the second constant at an elliptic state:
/// `K = H₁ − cosh²(ξ) E` and `K = −(H₂ + cos²(η) E)` with
/// `H₁ = p_ξ²/2 − Z₊ cosh ξ` and `H₂ = p_η²/2 + Z₋ cos η`.
///
/// The two agree exactly on the level set `H = E`; their numerical
/// discrepancy is a direct probe of chart consistency.
pub fn dual_k_values(state: &EllipticState, e: f64, charges: &ChargeConfig) -> (f64, f64) {
    let k_from_xi = h_xi(state.p_xi, state.xi, e, charges);
    let k_from_eta = -h_eta(state.p_eta, state.eta, e, charges);
    (k_from_xi, k_from_eta)
}

/// The energy-momentum map `ℱ = (H, H_ξ)`.
///
/// `E` is always computed first from the Cartesian Hamiltonian; `K` is then
/// evaluated from the ξ-branch and cross-checked against the η-branch to
/// [`DUAL_K_REL_TOL`] (a violation logs a warning, it does not fail).
pub fn energy_momentum_map(state: &CartesianState, charges: &ChargeConfig) -> Result<EnergyMomentum> {
    let e = hamiltonian(state, charges)?;
    let internal = charges.to_internal(*state);
    let elliptic = cartesian_state_to_elliptic(&internal)?;
    let (k1, k2) = dual_k_values(&elliptic, e, charges);
    let scale = k1.abs().max(k2.abs()).max(1.0);
    if (k1 - k2).abs() > DUAL_K_REL_TOL * scale {
        log::warn!(
            "dual K evaluation disagrees at q=({}, {}): {} vs {} (rel {:.3e})",
            state.q1,
            state.q2,
            k1,
            k2,
            (k1 - k2).abs() / scale
        );
    }
    Ok(EnergyMomentum::new(e, k1))
}

/// Squared separated momentum at coordinate `s` on the given branch:
///
/// ```text
/// p_x² = 2(Ex² + Z₊x + K)/(x² − 1),   p_y² = 2(Ey² + Z₋y + K)/(y² − 1).
/// ```
///
/// A negative value signals a classically forbidden point. At the fixed
/// roots `s = ±1` the raw expression is 0/0; when the quadratic factor
/// vanishes there too the finite limit `2E ± Z_±` is returned (the genuine
/// boundary-crossing case), otherwise a signed-infinity sentinel matching
/// the one-sided limit.
pub fn momentum_squared(s: f64, branch: Branch, em: &EnergyMomentum, charges: &ChargeConfig) -> f64 {
    let z = branch.z(charges);
    let quad = em.e * s * s + z * s + em.k;
    let denom = s * s - 1.0;
    if denom.abs() < 1e-14 {
        let scale = em.e.abs() + z.abs() + em.k.abs() + 1.0;
        if quad.abs() <= 1e-12 * scale {
            // Both factors vanish: limit of 2·quad/denom by one cancellation.
            let sign = if s >= 0.0 { 1.0 } else { -1.0 };
            return 2.0 * em.e + sign * z;
        }
        return if quad >= 0.0 {
            f64::INFINITY * denom.signum()
        } else {
            f64::NEG_INFINITY * denom.signum()
        };
    }
    2.0 * quad / denom
}

/// The degree-4 motion polynomial `P_±(s) = 2(s² − 1)(Es² + Z_± s + K)`.
///
/// Evaluation uses the factored form, so the fixed roots at `±1` are exact
/// zeros in floating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionPolynomial {
    pub branch: Branch,
    pub e: f64,
    pub z: f64,
    pub k: f64,
}

impl MotionPolynomial {
    pub fn evaluate(&self, s: f64) -> f64 {
        2.0 * (s * s - 1.0) * (self.e * s * s + self.z * s + self.k)
    }

    /// Coefficients `[c₀, …, c₄]` of the expanded polynomial
    /// `2E s⁴ + 2Z s³ + 2(K−E) s² − 2Z s − 2K`.
    pub fn coefficients(&self) -> [f64; 5] {
        [
            -2.0 * self.k,
            -2.0 * self.z,
            2.0 * (self.k - self.e),
            2.0 * self.z,
            2.0 * self.e,
        ]
    }

    /// The quadratic factor `Es² + Z_± s + K`.
    pub fn quadratic(&self, s: f64) -> f64 {
        self.e * s * s + self.z * s + self.k
    }
}

/// Builds the motion polynomial for a branch at fixed `(E, K)`.
pub fn motion_polynomial(
    branch: Branch,
    em: &EnergyMomentum,
    charges: &ChargeConfig,
) -> MotionPolynomial {
    MotionPolynomial {
        branch,
        e: em.e,
        z: branch.z(charges),
        k: em.k,
    }
}

/// Convenience: recomputes `(E, K)` from a separated state without going
/// through the Cartesian chart (used for drift monitoring).
pub fn em_from_separated(
    state: &SeparatedState,
    e: f64,
    charges: &ChargeConfig,
) -> Result<EnergyMomentum> {
    Ok(EnergyMomentum::new(e, h_x(state.p_x, state.x, e, charges)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coords::{cartesian_state_to_elliptic, jacobian_f};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn charges(z1: f64, z2: f64) -> ChargeConfig {
        ChargeConfig::new(z1, z2).unwrap()
    }

    fn random_safe_state(rng: &mut ChaCha8Rng) -> CartesianState {
        loop {
            let s = CartesianState::new(
                rng.gen_range(-4.0..4.0),
                rng.gen_range(-4.0..4.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            );
            let (r1, r2) = s.focal_distances();
            if r1 > 0.05 && r2 > 0.05 {
                return s;
            }
        }
    }

    #[test]
    fn hamiltonian_examples() {
        let c = charges(1.0, 1.0);
        let s = CartesianState::new(0.0, 1.0, 2.0, 0.0);
        let h = hamiltonian(&s, &c).unwrap();
        assert!((h - (2.0 - 2.0f64.sqrt())).abs() < 1e-15);

        // Antisymmetric charges on the symmetry axis: potential cancels.
        let c = charges(1.0, -1.0);
        let s = CartesianState::new(0.0, 1.0, 0.0, 0.0);
        assert!(hamiltonian(&s, &c).unwrap().abs() < 1e-15);

        let c = charges(1.0, 1.0);
        let s = CartesianState::new(10.0, 0.0, 0.0, 0.0);
        let h = hamiltonian(&s, &c).unwrap();
        assert!((h - (-1.0 / 9.0 - 1.0 / 11.0)).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_rejects_focus() {
        let c = charges(1.0, 1.0);
        let s = CartesianState::new(1.0, 0.0, 0.0, 0.0);
        assert!(matches!(
            hamiltonian(&s, &c),
            Err(Error::FocusCollision { .. })
        ));
    }

    #[test]
    fn potential_examples() {
        let c = charges(1.0, 1.0); // Z+ = 2, Z- = 0
        assert!((potential_v_xi(0.0, 1.0, &c) + 3.0).abs() < 1e-15);
        assert!(potential_v_eta(FRAC_PI_2, 7.0, &c).abs() < 1e-30);

        let c2 = charges(0.5, 2.5); // Z- = 2
        assert!((potential_v_eta(0.0, 3.0, &c2) - 5.0).abs() < 1e-15);
        assert_eq!(
            potential_v_x(1.0, 2.0, &c).unwrap(),
            potential_v_xi(0.0, 2.0, &c)
        );
        assert_eq!(potential_v_y(0.0, 5.0, &c2).unwrap(), 0.0);

        let c3 = charges(-1.0, -1.0); // Z+ = -2
        assert!(potential_v_x(2.0, 1.0, &c3).unwrap().abs() < 1e-15);
        assert!(potential_v_x(0.5, 1.0, &c3).is_err());
        assert!(potential_v_y(1.5, 1.0, &c3).is_err());
    }

    #[test]
    fn energy_momentum_example() {
        let c = charges(1.0, 1.0);
        let s = CartesianState::new(0.0, 1.0, 2.0, 0.0);
        let em = energy_momentum_map(&s, &c).unwrap();
        assert!((em.e - (2.0 - 2.0f64.sqrt())).abs() < 1e-14);
        assert!((em.k + 4.0).abs() < 1e-13);
    }

    #[test]
    fn energy_momentum_antisymmetric_example() {
        // Z+ = 0, Z- = -2 (canonicalised to +2 with a reflection): the state
        // q = (0,1), p = 0 has E = 0 and K = 0 from both branches.
        let c = charges(1.0, -1.0);
        assert!(c.reflected());
        assert_eq!(c.z_plus(), 0.0);
        assert_eq!(c.z_minus(), 2.0);
        let s = CartesianState::new(0.0, 1.0, 0.0, 0.0);
        let em = energy_momentum_map(&s, &c).unwrap();
        assert!(em.e.abs() < 1e-14);
        assert!(em.k.abs() < 1e-14);
    }

    #[test]
    fn dual_k_agreement_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let presets = [
            charges(1.0, 1.0),
            charges(-1.0, 1.0),
            charges(1.0, 3.0),
            charges(-1.0, 0.5),
        ];
        for c in &presets {
            for _ in 0..10_000 {
                let s = random_safe_state(&mut rng);
                let e = hamiltonian(&s, c).unwrap();
                let internal = c.to_internal(s);
                let ell = cartesian_state_to_elliptic(&internal).unwrap();
                let (k1, k2) = dual_k_values(&ell, e, c);
                let scale = k1.abs().max(k2.abs()).max(1.0);
                assert!(
                    (k1 - k2).abs() <= DUAL_K_REL_TOL * scale,
                    "state {s:?}: {k1} vs {k2}"
                );
            }
        }
    }

    #[test]
    fn separation_identity() {
        // F·(H − E) = H_ξ + H_η must vanish when E is the state's energy.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let c = charges(0.7, 2.1);
        for _ in 0..10_000 {
            let s = random_safe_state(&mut rng);
            let e = hamiltonian(&s, &c).unwrap();
            let internal = c.to_internal(s);
            let ell = cartesian_state_to_elliptic(&internal).unwrap();
            let f = jacobian_f(ell.xi, ell.eta);
            let lhs = h_xi(ell.p_xi, ell.xi, e, &c) + h_eta(ell.p_eta, ell.eta, e, &c);
            // lhs = F (H - E) with E = H exactly, so it is pure roundoff.
            assert!(lhs.abs() < 1e-9, "residual {lhs} at F={f}");
        }
    }

    #[test]
    fn chart_consistency_h_xi_equals_h_x() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let c = charges(1.0, 2.0);
        for _ in 0..5_000 {
            let xi: f64 = rng.gen_range(0.1..3.0);
            let eta: f64 = rng.gen_range(0.1..PI - 0.1);
            let ell = EllipticState::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), xi, eta);
            let sep = crate::coords::elliptic_to_separated(&ell).unwrap();
            let e = 1.3;
            let a = h_xi(ell.p_xi, ell.xi, e, &c);
            let b = h_x(sep.p_x, sep.x, e, &c).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            let a = h_eta(ell.p_eta, ell.eta, e, &c);
            let b = h_y(sep.p_y, sep.y, e, &c).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn momentum_squared_examples() {
        // Turning point: x = 2 is a movable root for E=1, Z+=-2, K=0.
        let c = charges(-1.0, -1.0);
        let em = EnergyMomentum::new(1.0, 0.0);
        assert!(momentum_squared(2.0, Branch::Plus, &em, &c).abs() < 1e-15);

        // p_y² at y = 0 is −2K on any configuration.
        let c2 = charges(1.0, 2.0);
        let em2 = EnergyMomentum::new(0.7, -1.25);
        assert!((momentum_squared(0.0, Branch::Minus, &em2, &c2) - 2.5).abs() < 1e-15);
        let em3 = EnergyMomentum::new(0.7, 0.5);
        assert!(momentum_squared(0.0, Branch::Minus, &em3, &c2) < 0.0); // forbidden

        // Strictly positive where the quadratic is positive and x > 1.
        let em4 = EnergyMomentum::new(1.0, 1.0);
        assert!(momentum_squared(3.0, Branch::Plus, &em4, &c2) > 0.0);
    }

    #[test]
    fn momentum_squared_fixed_root_limits() {
        // On L+2 (K = -Z+ - E) the quadratic vanishes at x = 1 and the limit
        // 2E + Z+ is finite.
        let c = charges(1.0, 1.0); // Z+ = 2
        let em = EnergyMomentum::new(3.0, -5.0);
        let lim = momentum_squared(1.0, Branch::Plus, &em, &c);
        assert!((lim - (2.0 * 3.0 + 2.0)).abs() < 1e-12);

        // Generic point: quadratic nonzero at s = 1 -> infinite sentinel.
        let em2 = EnergyMomentum::new(3.0, -4.0);
        assert!(momentum_squared(1.0, Branch::Plus, &em2, &c).is_infinite());
    }

    #[test]
    fn motion_polynomial_fixed_roots_exact() {
        let c = charges(0.3, 1.9);
        let em = EnergyMomentum::new(2.0, -1.0);
        for branch in [Branch::Plus, Branch::Minus] {
            let p = motion_polynomial(branch, &em, &c);
            assert_eq!(p.evaluate(1.0), 0.0);
            assert_eq!(p.evaluate(-1.0), 0.0);
        }
    }

    #[test]
    fn motion_polynomial_known_roots() {
        // E=1, Z+=-2, K=0: P+(s) = 2(s²−1)(s² − 2s), roots {−1, 0, 1, 2}.
        let c = charges(-1.0, -1.0);
        let em = EnergyMomentum::new(1.0, 0.0);
        let p = motion_polynomial(Branch::Plus, &em, &c);
        // Brute-force scan for sign changes over [-3, 3].
        let n = 600_000;
        let mut roots = Vec::new();
        let mut prev = p.evaluate(-3.0);
        for i in 1..=n {
            let s = -3.0 + 6.0 * (i as f64) / (n as f64);
            let v = p.evaluate(s);
            if prev == 0.0 {
                roots.push(-3.0 + 6.0 * ((i - 1) as f64) / (n as f64));
            } else if v != 0.0 && prev.signum() != v.signum() {
                roots.push(s - 3.0 / (n as f64)); // bracket midpoint
            }
            prev = v;
        }
        let expected = [-1.0, 0.0, 1.0, 2.0];
        assert_eq!(roots.len(), expected.len(), "roots found: {roots:?}");
        for (r, e) in roots.iter().zip(expected) {
            assert!((r - e).abs() < 1e-4, "root {r} vs {e}");
        }
    }

    #[test]
    fn motion_polynomial_nonnegative_when_roots_outside() {
        // P- with E=3, Z-=0, K=-4: movable roots y² = 4/3 > 1, so P- >= 0 on
        // the whole interval [-1, 1].
        let c = charges(1.0, 1.0);
        let em = EnergyMomentum::new(3.0, -4.0);
        let p = motion_polynomial(Branch::Minus, &em, &c);
        for i in 0..=1000 {
            let y = -1.0 + 2.0 * (i as f64) / 1000.0;
            assert!(p.evaluate(y) >= 0.0, "P-({y}) = {}", p.evaluate(y));
        }
    }

    #[test]
    fn momentum_squared_consistent_with_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let c = charges(-0.8, 1.7);
        for _ in 0..5_000 {
            let em = EnergyMomentum::new(rng.gen_range(0.0..4.0), rng.gen_range(-5.0..2.0));
            let x: f64 = rng.gen_range(1.001..6.0);
            let p2 = momentum_squared(x, Branch::Plus, &em, &c);
            let poly = motion_polynomial(Branch::Plus, &em, &c).evaluate(x);
            let denom = (x * x - 1.0).powi(2);
            assert!((p2 * denom - poly).abs() <= 1e-12 * poly.abs().max(1.0));

            let y: f64 = rng.gen_range(-0.999..0.999);
            let p2 = momentum_squared(y, Branch::Minus, &em, &c);
            let poly = motion_polynomial(Branch::Minus, &em, &c).evaluate(y);
            let denom = (1.0 - y * y).powi(2);
            assert!((p2 * denom - poly).abs() <= 1e-12 * poly.abs().max(1.0));
        }
    }
}
