//! Trajectory integration in the fictitious time `s`, events, Poincaré
//! sections and boundedness checks.
//!
//! The separated flows generated by `H_x` and `H_y` are integrated in their
//! canonical lift to the two-sheeted covering strip, i.e. in the variables
//! `(ξ, p_ξ, η, p_η)` with
//!
//! ```text
//! ξ' = p_ξ      p_ξ' = sinh(ξ) (Z₊ + 2E cosh ξ)
//! η' = p_η      p_η' = sin(η)  (Z₋ + 2E cos η)
//! ```
//!
//! On the cover these equations are smooth everywhere, so movable turning
//! points (`p = 0`) and fixed-root boundary passes (`x = 1`, `y = ±1`,
//! where the separated chart momenta blow up) are regular points of the
//! flow. Sheet changes reduce to bookkeeping: crossing `ξ = 0` or
//! `η ≡ 0 (mod π)` is an axis crossing in configuration space and flips the
//! half-plane. The only true singularities are the centers themselves;
//! integration stops with a collision diagnostic inside the
//! [`EPS_COLLISION`] ball around either focus.

use crate::bifurcation::{classify, in_bifurcation_set, Interval, YPattern, CURVE_TOL};
use crate::coords::{
    cartesian_state_to_elliptic, separated_to_elliptic, CartesianState, ChargeConfig,
    EllipticState, SeparatedState, Sheet,
};
use crate::dopri::{bisect_on, Dopri5};
use crate::error::Error;
use crate::separation::{
    energy_momentum_map, h_xi, momentum_squared, Branch, EnergyMomentum,
};
use crate::{Result, EPS_CHART, EPS_COLLISION};

/// Escape radius in the separated coordinate: once `x > x_escape` the
/// trajectory is classified as escaping and integration stops.
pub const X_ESCAPE: f64 = 1e3;

/// Default cap on the fictitious-time step.
pub const DEFAULT_MAX_STEP: f64 = 0.2;

/// What an event record marks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// `p_ξ = 0`: the x-motion reverses at a movable root.
    XTurning,
    /// `p_η = 0`: the y-motion reverses at a movable root.
    YTurning,
    /// The configuration-space path crosses the `q₁`-axis (either through
    /// the segment between the centers or through the outer axis); the
    /// trajectory passes to the other sheet of the cover.
    AxisCrossing,
    /// A recorded crossing of a Poincaré section.
    SectionHit,
    /// Entered the collision guard ball around a focus.
    CollisionStop,
}

/// A localized event along a trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryEvent {
    pub s: f64,
    pub kind: EventKind,
    /// Full state at the event, caller frame.
    pub cartesian: CartesianState,
}

/// Why integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ReachedSMax,
    Escaped,
    CollisionStop,
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone)]
pub struct TrajectorySample {
    /// Fictitious time.
    pub s: f64,
    /// Physical time recovered by quadrature of `F` (`t(0) = 0`).
    pub t: f64,
    /// Raw state on the covering strip (η unwrapped).
    pub elliptic: EllipticState,
    pub separated: SeparatedState,
    /// Caller-frame Cartesian state.
    pub cartesian: CartesianState,
    /// Constants of motion recomputed at this sample.
    pub e: f64,
    pub k: f64,
}

/// Time series of one integration together with its events.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub charges: ChargeConfig,
    /// Initial constants of motion.
    pub em: EnergyMomentum,
    pub samples: Vec<TrajectorySample>,
    pub events: Vec<TrajectoryEvent>,
    pub termination: Termination,
}

impl Trajectory {
    /// Largest drift of `E` and `K` over the samples, relative to the
    /// problem scale `max(1, |value|)` (a pure relative measure is
    /// meaningless when a constant happens to vanish).
    pub fn max_drift(&self) -> (f64, f64) {
        let de = self
            .samples
            .iter()
            .map(|p| (p.e - self.em.e).abs())
            .fold(0.0, f64::max);
        let dk = self
            .samples
            .iter()
            .map(|p| (p.k - self.em.k).abs())
            .fold(0.0, f64::max);
        (de / self.em.e.abs().max(1.0), dk / self.em.k.abs().max(1.0))
    }
}

/// Poincaré section kinds used by the regular-region construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionKind {
    /// Transversal cut of the open segment joining the two centers
    /// (`q₂ = 0`, `|q₁| < 1`).
    InterFocalSegment,
    /// Segment of the outer axis with `q₁ < −1`.
    OuterAxisSegment,
}

/// A section together with the `q₁`-interval it is clipped to (canonical
/// frame). The clip is strictly inside the classically allowed region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionSpec {
    pub kind: SectionKind,
    pub clip: (f64, f64),
}

/// One transversal crossing of a section.
#[derive(Debug, Clone, Copy)]
pub struct SectionHit {
    pub s: f64,
    /// Crossing point, canonical frame.
    pub q: (f64, f64),
    /// Momentum at the crossing, canonical frame.
    pub p: (f64, f64),
    /// Momentum component normal to the section (`p₂`).
    pub normal_momentum: f64,
}

/// Verdict of the boundedness check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundedness {
    Bounded,
    Scattering,
}

/// Which outer-axis ray a special axis orbit lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisSide {
    /// `q₁ > 1` (η ≡ 0); requires `K = −Z₋ − E`.
    Positive,
    /// `q₁ < −1` (η ≡ π); requires `K = Z₋ − E`.
    Negative,
}

fn rhs(charges: &ChargeConfig, e: f64) -> impl Fn(&[f64; 4]) -> [f64; 4] {
    let zp = charges.z_plus();
    let zm = charges.z_minus();
    move |u: &[f64; 4]| {
        let (xi, p_xi, eta, p_eta) = (u[0], u[1], u[2], u[3]);
        [
            p_xi,
            xi.sinh() * (zp + 2.0 * e * xi.cosh()),
            p_eta,
            eta.sin() * (zm + 2.0 * e * eta.cos()),
        ]
    }
}

/// Distance from the nearer focus: `min(r₁, r₂) = cosh ξ − |cos η|`.
fn focus_distance(u: &[f64; 4]) -> f64 {
    u[0].cosh() - u[2].cos().abs()
}

fn elliptic_view(u: &[f64; 4]) -> EllipticState {
    EllipticState::new(u[1], u[3], u[0], u[2])
}

fn separated_view(u: &[f64; 4]) -> SeparatedState {
    let (sh, ch) = (u[0].sinh(), u[0].cosh());
    let (sn, cs) = (u[2].sin(), u[2].cos());
    let p_x = if u[1] == 0.0 { 0.0 } else { u[1] / sh };
    let p_y = if u[3] == 0.0 { 0.0 } else { u[3] / sn };
    let sheet = if sh * sn >= 0.0 {
        Sheet::Upper
    } else {
        Sheet::Lower
    };
    SeparatedState {
        x: ch,
        y: cs,
        p_x,
        p_y,
        sheet,
    }
}

fn cartesian_view(u: &[f64; 4], charges: &ChargeConfig) -> CartesianState {
    let (sh, ch) = (u[0].sinh(), u[0].cosh());
    let (sn, cs) = (u[2].sin(), u[2].cos());
    let f = sh * sh + sn * sn;
    let (p1, p2) = if f > 0.0 {
        (
            (sh * cs * u[1] - ch * sn * u[3]) / f,
            (ch * sn * u[1] + sh * cs * u[3]) / f,
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    charges.to_user(CartesianState {
        q1: ch * cs,
        q2: sh * sn,
        p1,
        p2,
    })
}

fn sample_at(s: f64, u: &[f64; 4], charges: &ChargeConfig, e0: f64) -> TrajectorySample {
    let elliptic = elliptic_view(u);
    let f = crate::coords::jacobian_f(u[0], u[2]);
    let h1 = 0.5 * u[1] * u[1] - charges.z_plus() * u[0].cosh();
    let h2 = 0.5 * u[3] * u[3] + charges.z_minus() * u[2].cos();
    let e = if f > 0.0 { (h1 + h2) / f } else { e0 };
    let k = h_xi(u[1], u[0], e0, charges);
    TrajectorySample {
        s,
        t: 0.0,
        elliptic,
        separated: separated_view(u),
        cartesian: cartesian_view(u, charges),
        e,
        k,
    }
}

struct Monitor {
    kind: EventKind,
    g: fn(&[f64; 4]) -> f64,
}

const MONITORS: [Monitor; 4] = [
    Monitor {
        kind: EventKind::XTurning,
        g: |u| u[1],
    },
    Monitor {
        kind: EventKind::YTurning,
        g: |u| u[3],
    },
    Monitor {
        kind: EventKind::AxisCrossing,
        g: |u| u[0],
    },
    Monitor {
        kind: EventKind::AxisCrossing,
        g: |u| u[2].sin(),
    },
];

/// Per-unit-`s` fraction of `step_tol` allowed as conservation residual.
/// The constants of motion are a free global error monitor: a step of size
/// `h` may change the separated Hamiltonians by at most
/// `CONSERVATION_BUDGET · step_tol · scale · h`, so even fully systematic
/// accumulation stays below `step_tol · scale` per 100 units of `s`. Steps
/// exceeding the budget (and the f64 roundoff floor of the Hamiltonian
/// evaluation) are redone with a smaller size; this is what keeps the
/// exponentially expanding escape legs honest.
const CONSERVATION_BUDGET: f64 = 0.01;

fn run(
    u0: [f64; 4],
    charges: &ChargeConfig,
    em: EnergyMomentum,
    s_max: f64,
    step_tol: f64,
    max_step: f64,
) -> Trajectory {
    let f = rhs(charges, em.e);
    let mut solver = Dopri5::new(f, step_tol.max(1e-14));
    solver.h_max = max_step;
    let (zp, zm, e) = (charges.z_plus(), charges.z_minus(), em.e);
    let h_xi_of = move |u: &[f64; 4]| {
        let c = u[0].cosh();
        0.5 * u[1] * u[1] - zp * c - e * c * c
    };
    let h_eta_of = move |u: &[f64; 4]| {
        let c = u[2].cos();
        0.5 * u[3] * u[3] + zm * c + e * c * c
    };
    // Roundoff floor of the conservation residual: the Hamiltonians are
    // differences of terms this large.
    let noise_of = move |u: &[f64; 4]| {
        let c = u[0].cosh();
        4e-16 * (0.5 * u[1] * u[1] + zp.abs() * c + e.abs() * c * c + 0.5 * u[3] * u[3] + zm.abs() + e.abs())
    };
    let scale_k = em.k.abs().max(em.e.abs()).max(1.0);
    let budget_rate = CONSERVATION_BUDGET * step_tol * scale_k;

    // Projection of the momenta back onto {H_ξ = K} ∩ {H_η = −K} after each
    // accepted step. This keeps the drift at the single-evaluation roundoff
    // level instead of letting it accumulate; without it the escape legs
    // (where H_ξ is a difference of terms of size E·x²) random-walk away
    // from K. Skipped near turning points, where the square root is
    // ill-conditioned and the error it would fight is small anyway.
    let k0 = em.k;
    let project = move |u: &mut [f64; 4]| -> bool {
        let mut changed = false;
        let c = u[0].cosh();
        let v_xi = -zp * c - e * c * c;
        let arg = 2.0 * (k0 - v_xi);
        let guard = 1e4 * f64::EPSILON * (v_xi.abs() + k0.abs());
        if arg > guard && u[1] * u[1] > guard {
            let p_new = arg.sqrt().copysign(u[1]);
            if p_new != u[1] {
                u[1] = p_new;
                changed = true;
            }
        }
        let cc = u[2].cos();
        let v_eta = zm * cc + e * cc * cc;
        let arg = 2.0 * (-k0 - v_eta);
        let guard = 1e4 * f64::EPSILON * (v_eta.abs() + k0.abs());
        if arg > guard && u[3] * u[3] > guard {
            let p_new = arg.sqrt().copysign(u[3]);
            if p_new != u[3] {
                u[3] = p_new;
                changed = true;
            }
        }
        changed
    };

    let mut samples = vec![sample_at(0.0, &u0, charges, em.e)];
    let mut events: Vec<TrajectoryEvent> = Vec::new();
    let mut termination = Termination::ReachedSMax;

    if focus_distance(&u0) < EPS_COLLISION {
        events.push(TrajectoryEvent {
            s: 0.0,
            kind: EventKind::CollisionStop,
            cartesian: cartesian_view(&u0, charges),
        });
        let mut t = Trajectory {
            charges: *charges,
            em,
            samples,
            events,
            termination: Termination::CollisionStop,
        };
        physical_time(&mut t);
        return t;
    }

    let mut s = 0.0;
    let mut u = u0;
    let mut h = 1e-3f64.min(max_step);
    let tol_s = 1e-12;

    'outer: while s < s_max - 1e-12 {
        let (acc, h_next) = loop {
            let (acc, h_next) = solver.step(s, &u, h, s_max);
            let residual = (h_xi_of(&acc.y) - h_xi_of(&u)).abs()
                + (h_eta_of(&acc.y) - h_eta_of(&u)).abs();
            let floor = noise_of(&u).max(noise_of(&acc.y));
            if residual > budget_rate * acc.dense.h
                && residual > floor
                && acc.dense.h > 4.0 * solver.h_min
            {
                h = 0.5 * acc.dense.h;
                solver.reset();
                continue;
            }
            break (acc, h_next);
        };
        let s1 = acc.dense.s1();

        // Localize the step's events, earliest first.
        let mut step_events: Vec<(f64, EventKind)> = Vec::new();
        for m in &MONITORS {
            let g0 = (m.g)(&u);
            let g1 = (m.g)(&acc.y);
            if g0 != 0.0 && (g1 == 0.0 || (g0 < 0.0) != (g1 < 0.0)) {
                let se = if g1 == 0.0 {
                    s1
                } else {
                    bisect_on(&acc.dense, s, s1, m.g, tol_s)
                };
                step_events.push((se, m.kind));
            }
        }
        step_events.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (se, kind) in step_events {
            let mut ue = acc.dense.eval(se);
            project(&mut ue);
            // An axis crossing that passes through the collision ball is a
            // focus transit: the distance minimum sits exactly on the
            // crossing, so probing the event state cannot miss it.
            if kind == EventKind::AxisCrossing && focus_distance(&ue) < EPS_COLLISION {
                samples.push(sample_at(se, &ue, charges, em.e));
                events.push(TrajectoryEvent {
                    s: se,
                    kind: EventKind::CollisionStop,
                    cartesian: cartesian_view(&ue, charges),
                });
                termination = Termination::CollisionStop;
                break 'outer;
            }
            events.push(TrajectoryEvent {
                s: se,
                kind,
                cartesian: cartesian_view(&ue, charges),
            });
        }

        // Collision guard between events: probe the step end and midpoint.
        let mid = acc.dense.eval(s + 0.5 * acc.dense.h);
        let g_coll = |v: &[f64; 4]| focus_distance(v) - EPS_COLLISION;
        let hit_end = g_coll(&acc.y) < 0.0;
        let hit_mid = g_coll(&mid) < 0.0;
        if hit_end || hit_mid {
            let b = if hit_mid { s + 0.5 * acc.dense.h } else { s1 };
            let sc = bisect_on(&acc.dense, s, b, g_coll, tol_s);
            let mut uc = acc.dense.eval(sc);
            project(&mut uc);
            samples.push(sample_at(sc, &uc, charges, em.e));
            events.push(TrajectoryEvent {
                s: sc,
                kind: EventKind::CollisionStop,
                cartesian: cartesian_view(&uc, charges),
            });
            termination = Termination::CollisionStop;
            break;
        }

        // Escape.
        if acc.y[0].cosh() > X_ESCAPE {
            let g_esc = |v: &[f64; 4]| v[0].cosh() - X_ESCAPE;
            let se = if g_esc(&u) < 0.0 {
                bisect_on(&acc.dense, s, s1, g_esc, tol_s)
            } else {
                s1
            };
            let mut ue = acc.dense.eval(se);
            project(&mut ue);
            samples.push(sample_at(se, &ue, charges, em.e));
            termination = Termination::Escaped;
            break;
        }

        s = s1;
        u = acc.y;
        if project(&mut u) {
            solver.reset();
        }
        h = h_next;
        samples.push(sample_at(s, &u, charges, em.e));
    }

    events.sort_by(|a, b| a.s.total_cmp(&b.s));
    let mut t = Trajectory {
        charges: *charges,
        em,
        samples,
        events,
        termination,
    };
    physical_time(&mut t);
    t
}

/// Integrates the separated flows from a Cartesian initial state (caller
/// frame) up to fictitious time `s_max` with local tolerance `step_tol`.
///
/// Stops early on escape (`x > `[`X_ESCAPE`]) or on entering the collision
/// guard ball; both outcomes yield a valid trajectory with the termination
/// reason recorded. Errors for states at a focus or with negative energy.
pub fn integrate(
    initial: &CartesianState,
    charges: &ChargeConfig,
    s_max: f64,
    step_tol: f64,
) -> Result<Trajectory> {
    integrate_with_max_step(initial, charges, s_max, step_tol, DEFAULT_MAX_STEP)
}

/// [`integrate`] with an explicit cap on the step size (useful when the
/// sample density matters, e.g. for quadrature cross-checks).
pub fn integrate_with_max_step(
    initial: &CartesianState,
    charges: &ChargeConfig,
    s_max: f64,
    step_tol: f64,
    max_step: f64,
) -> Result<Trajectory> {
    let em = energy_momentum_map(initial, charges)?;
    if em.e < 0.0 {
        return Err(Error::NegativeEnergy { e: em.e });
    }
    let internal = charges.to_internal(*initial);
    let ell = cartesian_state_to_elliptic(&internal)?;
    let u0 = [ell.xi, ell.p_xi, ell.eta, ell.p_eta];
    Ok(run(u0, charges, em, s_max, step_tol, max_step))
}

/// Integrates from a covering-strip state directly (canonical frame).
pub fn integrate_from_elliptic(
    initial: &EllipticState,
    charges: &ChargeConfig,
    s_max: f64,
    step_tol: f64,
) -> Result<Trajectory> {
    let f = crate::coords::jacobian_f(initial.xi, initial.eta);
    if f < EPS_CHART {
        return Err(Error::DegenerateChart {
            xi: initial.xi,
            eta: initial.eta,
            factor: f,
        });
    }
    let h1 = 0.5 * initial.p_xi * initial.p_xi - charges.z_plus() * initial.xi.cosh();
    let h2 = 0.5 * initial.p_eta * initial.p_eta + charges.z_minus() * initial.eta.cos();
    let e = (h1 + h2) / f;
    if e < 0.0 {
        return Err(Error::NegativeEnergy { e });
    }
    let k = h_xi(initial.p_xi, initial.xi, e, charges);
    let u0 = [initial.xi, initial.p_xi, initial.eta, initial.p_eta];
    Ok(run(
        u0,
        charges,
        EnergyMomentum::new(e, k),
        s_max,
        step_tol,
        DEFAULT_MAX_STEP,
    ))
}

/// Fills the physical time column by trapezoid quadrature of
/// `dt/ds = F(ξ, η)` along the samples; `t(0) = 0` and `t` is nondecreasing
/// because `F ≥ 0`.
pub fn physical_time(trajectory: &mut Trajectory) {
    let times = quadrature_times(trajectory, Quadrature::Trapezoid);
    for (sample, t) in trajectory.samples.iter_mut().zip(times) {
        sample.t = t;
    }
}

/// Quadrature rule for the time reparametrisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    Trapezoid,
    /// Midpoint rule with `F` evaluated at the averaged separated state;
    /// used as an independent consistency oracle on smooth segments.
    Midpoint,
}

/// Cumulative physical times along the samples under the chosen rule.
pub fn quadrature_times(trajectory: &Trajectory, rule: Quadrature) -> Vec<f64> {
    let f_of = |p: &TrajectorySample| crate::coords::jacobian_f(p.elliptic.xi, p.elliptic.eta);
    let samples = &trajectory.samples;
    let mut t = Vec::with_capacity(samples.len());
    t.push(0.0);
    for w in samples.windows(2) {
        let ds = w[1].s - w[0].s;
        let dt = match rule {
            Quadrature::Trapezoid => 0.5 * (f_of(&w[0]) + f_of(&w[1])) * ds,
            Quadrature::Midpoint => {
                let xi = 0.5 * (w[0].elliptic.xi + w[1].elliptic.xi);
                let eta = 0.5 * (w[0].elliptic.eta + w[1].elliptic.eta);
                crate::coords::jacobian_f(xi, eta) * ds
            }
        };
        t.push(t.last().unwrap() + dt);
    }
    t
}

/// Builds a caller-frame Cartesian state on the level set `(E, K)` at the
/// separated position `(x₀, y₀)` (canonical frame, upper sheet, momenta
/// taken with positive signs). Errors if the point is classically
/// forbidden or sits on the chart boundary.
pub fn cartesian_state_on_level(
    em: &EnergyMomentum,
    charges: &ChargeConfig,
    x0: f64,
    y0: f64,
) -> Result<CartesianState> {
    let px2 = momentum_squared(x0, Branch::Plus, em, charges);
    let py2 = momentum_squared(y0, Branch::Minus, em, charges);
    if px2 < 0.0 || py2 < 0.0 {
        return Err(Error::ForbiddenPoint {
            x: x0,
            y: y0,
            e: em.e,
            k: em.k,
        });
    }
    let sep = SeparatedState {
        x: x0,
        y: y0,
        p_x: px2.sqrt(),
        p_y: py2.sqrt(),
        sheet: Sheet::Upper,
    };
    let ell = separated_to_elliptic(&sep)?;
    let internal = crate::coords::elliptic_state_to_cartesian(&ell)?;
    Ok(charges.to_user(internal))
}

/// Chooses a Poincaré section for a regular point of the `(E, K)` plane.
///
/// * the inter-focal segment when the allowed y-interval is interior and
///   the x-interval reaches down to 1 (every such trajectory crosses the
///   segment between the centers transversally);
/// * an outer-axis segment `q₁ < −1` when the allowed y-interval contains
///   `−1` (the η-motion then sweeps through π with `p_η` bounded away from
///   zero below ℒ₋¹); for split x-patterns the clip targets the unbounded
///   scattering component.
///
/// Patterns crossing neither axis (e.g. region II_< where the motion stays
/// in one half-plane) are reported via `NoSectionRule` rather than guessed.
pub fn choose_section(em: &EnergyMomentum, charges: &ChargeConfig) -> Result<SectionSpec> {
    if let Some(curves) = in_bifurcation_set(em, charges, CURVE_TOL)? {
        return Err(Error::OnBifurcationCurve {
            e: em.e,
            k: em.k,
            curves: curves.into_iter().collect(),
        });
    }
    let r = classify(em, charges)?;
    if r.is_forbidden() {
        return Err(Error::NoSectionRule {
            pattern: r.pattern(),
        });
    }
    let reaches_one = r
        .x_intervals
        .first()
        .map(|iv| iv.lo <= 1.0)
        .unwrap_or(false);
    if r.y_pattern == YPattern::Interior && reaches_one {
        let iv = r.y_intervals[0];
        let margin = 0.05 * (iv.hi - iv.lo);
        return Ok(SectionSpec {
            kind: SectionKind::InterFocalSegment,
            clip: (iv.lo + margin, iv.hi - margin),
        });
    }
    if matches!(r.y_pattern, YPattern::Full | YPattern::Lower) {
        // The outermost x-component bounds the reachable axis points.
        let outer = r.x_intervals.last().unwrap();
        let clip = if outer.hi.is_finite() {
            let margin = 0.05 * (outer.hi - outer.lo).max(1e-6);
            (-outer.hi + margin, -outer.lo - margin)
        } else {
            (-X_ESCAPE, -outer.lo - 1e-3 * outer.lo.max(1.0))
        };
        return Ok(SectionSpec {
            kind: SectionKind::OuterAxisSegment,
            clip,
        });
    }
    Err(Error::NoSectionRule {
        pattern: r.pattern(),
    })
}

/// Extracts the transversal crossings of a section from a trajectory.
///
/// Crossings were already localized during integration (axis-crossing
/// events are bisected to better than 1e−10 in `s`); this filters them by
/// section kind and clip interval. Returned points and momenta are in the
/// canonical frame.
pub fn poincare_hits(trajectory: &Trajectory, section: &SectionSpec) -> Vec<SectionHit> {
    let charges = trajectory.charges;
    trajectory
        .events
        .iter()
        .filter(|ev| ev.kind == EventKind::AxisCrossing)
        .filter_map(|ev| {
            let c = charges.to_internal(ev.cartesian);
            let matches = match section.kind {
                SectionKind::InterFocalSegment => c.q1.abs() < 1.0,
                SectionKind::OuterAxisSegment => c.q1 < -1.0,
            } && c.q1 >= section.clip.0
                && c.q1 <= section.clip.1;
            matches.then_some(SectionHit {
                s: ev.s,
                q: (c.q1, c.q2),
                p: (c.p1, c.p2),
                normal_momentum: c.p2,
            })
        })
        .collect()
}

/// Decides whether motion on one x-component of the classification is
/// bounded, then cross-validates by integrating a representative orbit for
/// `s ∈ [0, 10³]` and checking containment. A disagreement is reported as
/// a hard error (it would indicate an integrator defect).
pub fn detect_boundedness(
    em: &EnergyMomentum,
    charges: &ChargeConfig,
    component: Interval,
) -> Result<Boundedness> {
    let r = classify(em, charges)?;
    let comp = r
        .x_intervals
        .iter()
        .find(|iv| {
            (iv.lo - component.lo).abs() < 1e-9
                && (iv.hi == component.hi || (iv.hi - component.hi).abs() < 1e-9)
        })
        .copied()
        .ok_or(Error::UnknownComponent {
            lo: component.lo,
            hi: component.hi,
        })?;
    let bounded = comp.is_bounded();

    // Representative initial point strictly inside the component and the
    // allowed y-interval.
    let x0 = if bounded {
        0.5 * (comp.lo.max(1.0) + comp.hi)
    } else {
        comp.lo.max(1.0) + 0.5
    }
    .max(1.0 + 1e-6);
    let yiv = r.y_intervals[0];
    let y0 = (0.5 * (yiv.lo + yiv.hi))
        .clamp(yiv.lo + 0.1 * (yiv.hi - yiv.lo), yiv.hi - 0.1 * (yiv.hi - yiv.lo))
        .clamp(-1.0 + 1e-6, 1.0 - 1e-6);
    let state = cartesian_state_on_level(em, charges, x0, y0)?;
    let trajectory = integrate(&state, charges, 1e3, 1e-10)?;

    let observed_max = trajectory
        .samples
        .iter()
        .map(|p| p.separated.x)
        .fold(0.0, f64::max);
    let contained = if bounded {
        observed_max <= comp.hi + 1e-6
    } else {
        trajectory
            .samples
            .iter()
            .all(|p| p.separated.x >= comp.lo - 1e-8)
    };
    if !contained {
        return Err(Error::BoundednessMismatch {
            lo: comp.lo,
            hi: comp.hi,
            classifier_bounded: bounded,
            observed_x_max: observed_max,
        });
    }
    Ok(if bounded {
        Boundedness::Bounded
    } else {
        Boundedness::Scattering
    })
}

/// Special singular trajectory on the outer `q₁`-axis (motion with
/// `η` frozen at 0 or π). These live on the chart boundary where the
/// generic separated chart degenerates, so they get a dedicated
/// constructor: the 1-DOF ξ-motion is integrated with the angle pinned
/// exactly.
///
/// The corresponding constants are `K = −Z₋ − E` on the positive ray and
/// `K = Z₋ − E` (the ℒ₋¹ line) on the negative one; for `Z₋ = 0` the two
/// coincide on ℒ₋¹ = ℒ₋². A particle heading inward bounces against the
/// singularity only in the regularised problem; here integration stops at
/// the collision guard.
pub fn axis_orbit(
    charges: &ChargeConfig,
    e: f64,
    side: AxisSide,
    xi0: f64,
    inward: bool,
    s_max: f64,
    step_tol: f64,
) -> Result<Trajectory> {
    if e < 0.0 {
        return Err(Error::NegativeEnergy { e });
    }
    let (eta, k) = match side {
        AxisSide::Positive => (0.0, -charges.z_minus() - e),
        AxisSide::Negative => (std::f64::consts::PI, charges.z_minus() - e),
    };
    let v = crate::separation::potential_v_xi(xi0, e, charges);
    let p2 = 2.0 * (k - v);
    if p2 < 0.0 {
        return Err(Error::ForbiddenPoint {
            x: xi0.cosh(),
            y: eta.cos(),
            e,
            k,
        });
    }
    let p_xi = if inward { -p2.sqrt() } else { p2.sqrt() };
    let u0 = [xi0.abs(), p_xi, eta, 0.0];
    Ok(run_frozen_eta(
        u0,
        charges,
        EnergyMomentum::new(e, k),
        s_max,
        step_tol,
    ))
}

/// The special orbit on the segment between the centers (`x = 1`, i.e.
/// `ξ` frozen at 0), defined for `K = −Z₊ − E` (the ℒ₊² line).
///
/// When the η-motion turns before reaching the centers this is the closed
/// orbit bouncing between them; otherwise it runs into a focus and stops
/// at the collision guard (the regularised continuation is out of scope).
pub fn interfocal_orbit(
    charges: &ChargeConfig,
    e: f64,
    eta0: f64,
    s_max: f64,
    step_tol: f64,
) -> Result<Trajectory> {
    if e < 0.0 {
        return Err(Error::NegativeEnergy { e });
    }
    let k = -charges.z_plus() - e;
    let v = crate::separation::potential_v_eta(eta0, e, charges);
    let p2 = 2.0 * (-k - v);
    if p2 < 0.0 {
        return Err(Error::ForbiddenPoint {
            x: 1.0,
            y: eta0.cos(),
            e,
            k,
        });
    }
    let u0 = [0.0, 0.0, eta0, p2.sqrt()];
    Ok(run_frozen_xi(
        u0,
        charges,
        EnergyMomentum::new(e, k),
        s_max,
        step_tol,
    ))
}

/// Integrates the ξ subsystem with η pinned exactly (axis orbits).
fn run_frozen_eta(
    u0: [f64; 4],
    charges: &ChargeConfig,
    em: EnergyMomentum,
    s_max: f64,
    step_tol: f64,
) -> Trajectory {
    let zp = charges.z_plus();
    let e = em.e;
    let eta = u0[2];
    let f2 = move |v: &[f64; 2]| [v[1], v[0].sinh() * (zp + 2.0 * e * v[0].cosh())];
    let embed = move |v: &[f64; 2]| [v[0], v[1], eta, 0.0];
    let potential = move |q: f64| {
        let c = q.cosh();
        -zp * c - e * c * c
    };
    // Crossing ξ = 0 on the axis is a transit through a focus.
    let boundary = |v: &[f64; 2]| v[0];
    run_2d(
        [u0[0], u0[1]],
        f2,
        embed,
        potential,
        boundary,
        EventKind::XTurning,
        charges,
        em,
        s_max,
        step_tol,
    )
}

/// Integrates the η subsystem with ξ pinned at 0 (inter-focal orbit).
fn run_frozen_xi(
    u0: [f64; 4],
    charges: &ChargeConfig,
    em: EnergyMomentum,
    s_max: f64,
    step_tol: f64,
) -> Trajectory {
    let zm = charges.z_minus();
    let e = em.e;
    let f2 = move |v: &[f64; 2]| [v[1], v[0].sin() * (zm + 2.0 * e * v[0].cos())];
    let embed = move |v: &[f64; 2]| [0.0, 0.0, v[0], v[1]];
    let potential = move |q: f64| {
        let c = q.cos();
        zm * c + e * c * c
    };
    // On the segment, η ≡ 0 (mod π) is a focus.
    let boundary = |v: &[f64; 2]| v[0].sin();
    run_2d(
        [u0[2], u0[3]],
        f2,
        embed,
        potential,
        boundary,
        EventKind::YTurning,
        charges,
        em,
        s_max,
        step_tol,
    )
}

#[allow(clippy::too_many_arguments)]
fn run_2d(
    v0: [f64; 2],
    f2: impl Fn(&[f64; 2]) -> [f64; 2],
    embed: impl Fn(&[f64; 2]) -> [f64; 4],
    potential: impl Fn(f64) -> f64,
    boundary: impl Fn(&[f64; 2]) -> f64,
    turning_kind: EventKind,
    charges: &ChargeConfig,
    em: EnergyMomentum,
    s_max: f64,
    step_tol: f64,
) -> Trajectory {
    let mut solver = Dopri5::new(f2, step_tol.max(1e-14));
    solver.h_max = DEFAULT_MAX_STEP;
    let h_of = |v: &[f64; 2]| 0.5 * v[1] * v[1] + potential(v[0]);
    let budget_rate = CONSERVATION_BUDGET * step_tol * em.k.abs().max(em.e.abs()).max(1.0);
    let target = h_of(&v0);
    let project = |v: &mut [f64; 2]| -> bool {
        let vq = potential(v[0]);
        let arg = 2.0 * (target - vq);
        let guard = 1e4 * f64::EPSILON * (vq.abs() + target.abs());
        if arg > guard && v[1] * v[1] > guard {
            let p_new = arg.sqrt().copysign(v[1]);
            if p_new != v[1] {
                v[1] = p_new;
                return true;
            }
        }
        false
    };
    let mut v = v0;
    let mut s = 0.0;
    let mut h = 1e-3;
    let mut samples = vec![sample_at(0.0, &embed(&v), charges, em.e)];
    let mut events = Vec::new();
    let mut termination = Termination::ReachedSMax;

    while s < s_max - 1e-12 {
        let (acc, h_next) = loop {
            let (acc, h_next) = solver.step(s, &v, h, s_max);
            let residual = (h_of(&acc.y) - h_of(&v)).abs();
            let floor = 4e-16 * (0.5 * v[1] * v[1] + potential(v[0]).abs() + 1.0);
            if residual > budget_rate * acc.dense.h
                && residual > floor
                && acc.dense.h > 4.0 * solver.h_min
            {
                h = 0.5 * acc.dense.h;
                solver.reset();
                continue;
            }
            break (acc, h_next);
        };
        let s1 = acc.dense.s1();
        if v[1] != 0.0 && acc.y[1] != 0.0 && (v[1] < 0.0) != (acc.y[1] < 0.0) {
            let se = bisect_on(&acc.dense, s, s1, |w| w[1], 1e-12);
            events.push(TrajectoryEvent {
                s: se,
                kind: turning_kind,
                cartesian: cartesian_view(&embed(&acc.dense.eval(se)), charges),
            });
        }
        // A boundary crossing runs straight into a focus.
        let b0 = boundary(&v);
        let b1 = boundary(&acc.y);
        let g_coll = |w: &[f64; 2]| focus_distance(&embed(w)) - EPS_COLLISION;
        let mid = acc.dense.eval(s + 0.5 * acc.dense.h);
        let boundary_hit = b0 != 0.0 && (b1 == 0.0 || (b0 < 0.0) != (b1 < 0.0));
        if boundary_hit || g_coll(&acc.y) < 0.0 || g_coll(&mid) < 0.0 {
            let sc = if boundary_hit {
                // Stop where the guard ball is entered, just before the
                // boundary crossing itself.
                bisect_on(&acc.dense, s, bisect_on(&acc.dense, s, s1, &boundary, 1e-13), g_coll, 1e-12)
            } else if g_coll(&mid) < 0.0 {
                bisect_on(&acc.dense, s, s + 0.5 * acc.dense.h, g_coll, 1e-12)
            } else {
                bisect_on(&acc.dense, s, s1, g_coll, 1e-12)
            };
            let uc = embed(&acc.dense.eval(sc));
            samples.push(sample_at(sc, &uc, charges, em.e));
            events.push(TrajectoryEvent {
                s: sc,
                kind: EventKind::CollisionStop,
                cartesian: cartesian_view(&uc, charges),
            });
            termination = Termination::CollisionStop;
            break;
        }
        if embed(&acc.y)[0].cosh() > X_ESCAPE {
            let mut ve = acc.y;
            project(&mut ve);
            samples.push(sample_at(s1, &embed(&ve), charges, em.e));
            termination = Termination::Escaped;
            break;
        }
        s = s1;
        v = acc.y;
        if project(&mut v) {
            solver.reset();
        }
        h = h_next;
        samples.push(sample_at(s, &embed(&v), charges, em.e));
    }

    let mut t = Trajectory {
        charges: *charges,
        em,
        samples,
        events,
        termination,
    };
    physical_time(&mut t);
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bifurcation::classify;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn charges(z1: f64, z2: f64) -> ChargeConfig {
        ChargeConfig::new(z1, z2).unwrap()
    }

    fn from_zpm(zp: f64, zm: f64) -> ChargeConfig {
        charges((zp - zm) / 2.0, (zp + zm) / 2.0)
    }

    /// Random scattering state with E in a comfortable range.
    fn random_scattering_state(rng: &mut ChaCha8Rng, c: &ChargeConfig) -> CartesianState {
        loop {
            let s = CartesianState::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-2.5..2.5),
                rng.gen_range(-2.5..2.5),
            );
            let (r1, r2) = s.focal_distances();
            if r1 < 0.3 || r2 < 0.3 {
                continue;
            }
            let e = crate::separation::hamiltonian(&s, c).unwrap();
            if (0.2..=5.0).contains(&e) {
                return s;
            }
        }
    }

    #[test]
    fn vertical_orbit_stays_on_axis() {
        // Z- = 0, K = 0: initial data on the q2-axis with aligned momentum
        // stays on the axis for all time.
        let c = charges(1.0, 1.0);
        let e_target = 1.5;
        let q2 = 1.0;
        let p2 = (2.0 * (e_target + c.z_plus() / 2.0f64.sqrt())).sqrt();
        let initial = CartesianState::new(0.0, q2, 0.0, p2);
        let em = energy_momentum_map(&initial, &c).unwrap();
        assert!((em.e - e_target).abs() < 1e-12);
        assert!(em.k.abs() < 1e-12);
        let trajectory = integrate(&initial, &c, 100.0, 1e-10).unwrap();
        for p in &trajectory.samples {
            assert!(p.separated.y.abs() < 1e-9, "y = {} at s = {}", p.separated.y, p.s);
            assert!(p.cartesian.q1.abs() < 1e-9);
        }
    }

    #[test]
    fn conservation_over_scattering_runs() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let presets = [
            charges(1.0, 1.0),
            charges(-1.0, 1.0),
            charges(1.0, 3.0),
            charges(-1.0, 0.5),
        ];
        for c in &presets {
            for _ in 0..10 {
                let s0 = random_scattering_state(&mut rng, c);
                let tr = integrate(&s0, c, 100.0, 1e-10).unwrap();
                let (de, dk) = tr.max_drift();
                assert!(de < 1e-8, "E drift {de} for {s0:?}");
                assert!(dk < 1e-8, "K drift {dk} for {s0:?}");
            }
        }
    }

    #[test]
    fn confinement_within_classified_intervals() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let c = charges(-1.0, 1.0);
        for _ in 0..10 {
            let s0 = random_scattering_state(&mut rng, &c);
            let tr = integrate(&s0, &c, 50.0, 1e-10).unwrap();
            let r = classify(&tr.em, &c).unwrap();
            for p in &tr.samples {
                let x = p.separated.x;
                let y = p.separated.y;
                assert!(
                    r.x_intervals
                        .iter()
                        .any(|iv| x >= iv.lo - 1e-8 && x <= iv.hi + 1e-8),
                    "x = {x} outside {:?}",
                    r.x_intervals
                );
                assert!(
                    r.y_intervals
                        .iter()
                        .any(|iv| y >= iv.lo - 1e-8 && y <= iv.hi + 1e-8),
                    "y = {y} outside {:?}",
                    r.y_intervals
                );
            }
        }
    }

    #[test]
    fn time_reversal_returns_to_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let c = charges(1.0, 1.0);
        for _ in 0..5 {
            let s0 = random_scattering_state(&mut rng, &c);
            let fwd = integrate(&s0, &c, 10.0, 1e-11).unwrap();
            let end = fwd.samples.last().unwrap();
            let s_span = end.s;
            let flipped = CartesianState::new(
                end.cartesian.q1,
                end.cartesian.q2,
                -end.cartesian.p1,
                -end.cartesian.p2,
            );
            let back = integrate(&flipped, &c, s_span, 1e-11).unwrap();
            let ret = back.samples.last().unwrap();
            assert!((ret.s - s_span).abs() < 1e-9);
            assert!((ret.cartesian.q1 - s0.q1).abs() < 1e-6, "q1 return error");
            assert!((ret.cartesian.q2 - s0.q2).abs() < 1e-6);
            assert!((ret.cartesian.p1 + s0.p1).abs() < 1e-6);
            assert!((ret.cartesian.p2 + s0.p2).abs() < 1e-6);
        }
    }

    #[test]
    fn involution_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let c = charges(-1.0, 1.0);
        for _ in 0..5 {
            let s0 = random_scattering_state(&mut rng, &c);
            let internal = c.to_internal(s0);
            let ell = cartesian_state_to_elliptic(&internal).unwrap();
            let inv = crate::coords::involution(&ell);
            let t1 = integrate_from_elliptic(&ell, &c, 8.0, 1e-10).unwrap();
            let t2 = integrate_from_elliptic(&inv, &c, 8.0, 1e-10).unwrap();
            assert_eq!(t1.samples.len(), t2.samples.len());
            for (a, b) in t1.samples.iter().zip(&t2.samples) {
                assert!((a.s - b.s).abs() < 1e-9);
                assert!((a.elliptic.xi + b.elliptic.xi).abs() < 1e-9);
                assert!((a.elliptic.eta + b.elliptic.eta).abs() < 1e-9);
                assert!((a.elliptic.p_xi + b.elliptic.p_xi).abs() < 1e-9);
                assert!((a.elliptic.p_eta + b.elliptic.p_eta).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn bounded_orbit_containment() {
        // Region I_<^a witness: inner component [1, 2.5 - sqrt(1.25)].
        let c = charges(-1.0, 0.5);
        let em = EnergyMomentum::new(0.1, 0.5);
        let x3 = 2.5 - 1.25f64.sqrt();
        let state = cartesian_state_on_level(&em, &c, 1.15, -0.6).unwrap();
        let check = energy_momentum_map(&state, &c).unwrap();
        assert!((check.e - 0.1).abs() < 1e-12);
        assert!((check.k - 0.5).abs() < 1e-12);
        let tr = integrate(&state, &c, 100.0, 1e-10).unwrap();
        for p in &tr.samples {
            assert!(p.separated.x <= x3 + 1e-6, "x = {} at s = {}", p.separated.x, p.s);
            assert!(p.separated.x >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn escape_detection() {
        let c = charges(1.0, 1.0);
        // Fast outgoing state escapes well before s_max.
        let s0 = CartesianState::new(3.0, 1.0, 2.0, 0.5);
        let tr = integrate(&s0, &c, 500.0, 1e-9).unwrap();
        assert_eq!(tr.termination, Termination::Escaped);
        let last = tr.samples.last().unwrap();
        assert!((last.separated.x - X_ESCAPE).abs() < 1.0);
    }

    #[test]
    fn collision_stop_on_axis_run() {
        // Head straight at the center at (-1, 0) along the outer axis.
        let c = charges(1.0, 1.0);
        let s0 = CartesianState::new(-3.0, 0.0, 1.5, 0.0);
        let tr = integrate(&s0, &c, 100.0, 1e-10).unwrap();
        assert_eq!(tr.termination, Termination::CollisionStop);
        assert!(tr
            .events
            .iter()
            .any(|e| e.kind == EventKind::CollisionStop));
        let last = tr.samples.last().unwrap();
        let (r1, r2) = last.cartesian.focal_distances();
        assert!(r1.min(r2) < 2.0 * EPS_COLLISION);
    }

    #[test]
    fn events_record_turnings_and_crossings() {
        // A region-III_> state started inbound crosses the inter-focal
        // segment; starting y near the movable root makes the y-motion turn
        // before the escape leg.
        let c = charges(1.0, 1.0); // Z+=2, Z-=0
        let em = EnergyMomentum::new(1.2, -0.8);
        let out = cartesian_state_on_level(&em, &c, 1.6, 0.75).unwrap();
        let inbound = CartesianState::new(out.q1, out.q2, -out.p1, -out.p2);
        let tr = integrate(&inbound, &c, 30.0, 1e-10).unwrap();
        assert!(tr.events.iter().any(|e| e.kind == EventKind::YTurning));
        assert!(tr.events.iter().any(|e| e.kind == EventKind::AxisCrossing));
        // Events are sorted by s.
        for w in tr.events.windows(2) {
            assert!(w[0].s <= w[1].s);
        }
    }

    #[test]
    fn physical_time_monotone_and_quadratures_agree() {
        // A bounded orbit keeps F and its derivatives moderate, which is
        // the smooth-segment regime of the quadrature oracle.
        let c = charges(-1.0, 0.5);
        let em = EnergyMomentum::new(0.1, 0.5);
        let state = cartesian_state_on_level(&em, &c, 1.15, -0.6).unwrap();
        let tr = integrate_with_max_step(&state, &c, 10.0, 1e-10, 0.001).unwrap();
        for w in tr.samples.windows(2) {
            assert!(w[1].t >= w[0].t);
        }
        let trap = quadrature_times(&tr, Quadrature::Trapezoid);
        let mid = quadrature_times(&tr, Quadrature::Midpoint);
        let t_end = trap.last().unwrap();
        for (a, b) in trap.iter().zip(&mid) {
            assert!((a - b).abs() <= 1e-6 * t_end.max(1.0), "{a} vs {b}");
        }

        // Single-sample trajectory keeps t = 0.
        let mut single = tr.clone();
        single.samples.truncate(1);
        physical_time(&mut single);
        assert_eq!(single.samples[0].t, 0.0);

        // Constant-F sanity: one synthetic segment.
        let mut two = tr.clone();
        two.samples.truncate(2);
        let f0 = crate::coords::jacobian_f(two.samples[0].elliptic.xi, two.samples[0].elliptic.eta);
        two.samples[1].elliptic = two.samples[0].elliptic;
        physical_time(&mut two);
        let ds = two.samples[1].s - two.samples[0].s;
        assert!((two.samples[1].t - f0 * ds).abs() < 1e-12 * (f0 * ds).abs().max(1.0));
    }

    #[test]
    fn choose_section_examples() {
        // Z+ = 0, Z- = 2, region IV (interior y): inter-focal segment.
        let c = from_zpm(0.0, 2.0);
        let sec = choose_section(&EnergyMomentum::new(2.0, 0.25), &c).unwrap();
        assert_eq!(sec.kind, SectionKind::InterFocalSegment);
        assert!(sec.clip.0 > -1.0 && sec.clip.1 < 1.0 && sec.clip.0 < sec.clip.1);

        // Region bounded by L+2 and L-1: outer axis segment.
        let sec = choose_section(&EnergyMomentum::new(0.5, 0.5), &c).unwrap();
        assert_eq!(sec.kind, SectionKind::OuterAxisSegment);
        assert!(sec.clip.1 < -1.0);

        // Point on L+2 is rejected.
        let k_on = crate::bifurcation::curve_k(crate::bifurcation::CurveId::Lp2, 0.5, &c).unwrap();
        assert!(matches!(
            choose_section(&EnergyMomentum::new(0.5, k_on), &c),
            Err(Error::OnBifurcationCurve { .. })
        ));

        // Region II_< (interior y, outer x) crosses neither axis.
        let cm = from_zpm(-2.0, 0.0);
        assert!(matches!(
            choose_section(&EnergyMomentum::new(3.0, -2.0), &cm),
            Err(Error::NoSectionRule { .. })
        ));
    }

    #[test]
    fn poincare_hits_accumulate_for_bounded_orbit() {
        let c = charges(-1.0, 0.5);
        let em = EnergyMomentum::new(0.1, 0.5);
        let state = cartesian_state_on_level(&em, &c, 1.15, -0.6).unwrap();
        let section = SectionSpec {
            kind: SectionKind::InterFocalSegment,
            clip: (-0.95, -0.4),
        };
        let short = integrate(&state, &c, 50.0, 1e-10).unwrap();
        let long = integrate(&state, &c, 200.0, 1e-10).unwrap();
        let h_short = poincare_hits(&short, &section).len();
        let h_long = poincare_hits(&long, &section).len();
        assert!(h_short > 0);
        assert!(h_long > 2 * h_short, "{h_long} vs {h_short}");
        // Transversality at every hit.
        for hit in poincare_hits(&long, &section) {
            assert!(hit.normal_momentum.abs() > 1e-8);
        }
    }

    #[test]
    fn poincare_hits_finite_for_scattering_and_empty_off_region() {
        let c = from_zpm(0.0, 2.0);
        let em = EnergyMomentum::new(0.5, 0.5);
        let sec = choose_section(&em, &c).unwrap();
        let state = cartesian_state_on_level(&em, &c, 1.4, -0.8).unwrap();
        let tr = integrate(&state, &c, 300.0, 1e-10).unwrap();
        let hits = poincare_hits(&tr, &sec);
        assert!(!hits.is_empty());
        for h in &hits {
            assert!(h.q.0 >= sec.clip.0 && h.q.0 <= sec.clip.1);
            assert!(h.normal_momentum.abs() > 1e-8);
        }

        // A trajectory confined to one half-plane never hits either section.
        let cm = from_zpm(-2.0, 0.0);
        let em2 = EnergyMomentum::new(3.0, -2.0);
        let state2 = cartesian_state_on_level(&em2, &cm, 2.5, 0.0).unwrap();
        let tr2 = integrate(&state2, &cm, 50.0, 1e-10).unwrap();
        let far_section = SectionSpec {
            kind: SectionKind::InterFocalSegment,
            clip: (-0.9, 0.9),
        };
        assert!(poincare_hits(&tr2, &far_section).is_empty());
    }

    #[test]
    fn boundedness_detection() {
        let c = charges(-1.0, 0.5);
        let em = EnergyMomentum::new(0.1, 0.5);
        let r = classify(&em, &c).unwrap();
        assert_eq!(r.x_intervals.len(), 2);
        assert_eq!(
            detect_boundedness(&em, &c, r.x_intervals[0]).unwrap(),
            Boundedness::Bounded
        );
        assert_eq!(
            detect_boundedness(&em, &c, r.x_intervals[1]).unwrap(),
            Boundedness::Scattering
        );

        // Region II_> has a single unbounded component.
        let c2 = charges(1.0, 1.0);
        let em2 = EnergyMomentum::new(3.0, -4.0);
        let r2 = classify(&em2, &c2).unwrap();
        assert_eq!(
            detect_boundedness(&em2, &c2, r2.x_intervals[0]).unwrap(),
            Boundedness::Scattering
        );

        // Unknown component is rejected.
        assert!(matches!(
            detect_boundedness(&em, &c, Interval::new(5.0, 6.0)),
            Err(Error::UnknownComponent { .. })
        ));
    }

    #[test]
    fn axis_orbit_negative_ray_bounces_or_collides() {
        // Z- = 0: L-1 carries axis motion on either outer ray.
        let c = charges(1.0, 1.0);
        let tr = axis_orbit(&c, 2.0, AxisSide::Negative, 1.5, true, 50.0, 1e-10).unwrap();
        assert_eq!(tr.termination, Termination::CollisionStop);
        for p in &tr.samples {
            assert!(p.cartesian.q2.abs() < 1e-12);
            assert!(p.cartesian.q1 < -1.0 + 1e-6);
        }
        // K matches the L-1 line.
        assert!((tr.em.k - (c.z_minus() - 2.0)).abs() < 1e-14);
    }

    #[test]
    fn axis_orbit_repelling_turns_back() {
        // Z+ < 0 repels: an inward axis run turns around at the barrier.
        let c = charges(-1.0, -1.0); // Z+ = -2, Z- = 0
        let tr = axis_orbit(&c, 1.0, AxisSide::Positive, 2.0, true, 6.0, 1e-10).unwrap();
        assert!(tr.events.iter().any(|e| e.kind == EventKind::XTurning));
        assert_eq!(tr.termination, Termination::Escaped);
        let x_min = tr
            .samples
            .iter()
            .map(|p| p.separated.x)
            .fold(f64::INFINITY, f64::min);
        assert!(x_min > 1.0 + 1e-6, "barrier kept x at {x_min}");
    }

    #[test]
    fn interfocal_orbit_periodic_when_turning_inside() {
        // Fully repelling case: the η-motion turns strictly inside the
        // segment (cos²η = -K/E), so the x = 1 orbit is genuinely periodic
        // with no focus transit.
        let c = charges(-1.0, -1.0); // Z+ = -2, Z- = 0
        let tr = interfocal_orbit(&c, 3.0, std::f64::consts::FRAC_PI_2, 40.0, 1e-10).unwrap();
        assert_eq!(tr.termination, Termination::ReachedSMax);
        assert!(tr.events.iter().filter(|e| e.kind == EventKind::YTurning).count() >= 4);
        for p in &tr.samples {
            assert!((p.separated.x - 1.0).abs() < 1e-12);
            assert!(p.cartesian.q2.abs() < 1e-12);
            assert!(p.cartesian.q1.abs() < 1.0 + 1e-12);
        }
        // K matches the L+2 line and lies in the Hill region.
        assert!((tr.em.k - (-c.z_plus() - 3.0)).abs() < 1e-14);
        assert!(tr.em.k <= crate::bifurcation::k_minus(3.0, &c));
    }

    #[test]
    fn interfocal_orbit_collides_when_unshielded() {
        // Z- = 0, Z+ > 0: nothing turns the η-motion before the centers.
        let c = charges(1.0, 1.0);
        let tr = interfocal_orbit(&c, 1.0, std::f64::consts::FRAC_PI_2, 50.0, 1e-10).unwrap();
        assert_eq!(tr.termination, Termination::CollisionStop);
    }

    #[test]
    fn integrate_rejects_negative_energy() {
        let c = charges(1.0, 1.0);
        let s0 = CartesianState::new(0.3, 0.0, 0.0, 0.0); // deep in the well
        assert!(matches!(
            integrate(&s0, &c, 10.0, 1e-9),
            Err(Error::NegativeEnergy { .. })
        ));
    }
}
