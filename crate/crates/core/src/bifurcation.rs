//! The bifurcation set for `E ≥ 0`, Hill-region bounds and the region
//! classifier.
//!
//! For `E ≥ 0` the bifurcation set of the energy-momentum map is carved out
//! of six curves in the `(E, K)` plane,
//!
//! ```text
//! ℒ₀ = {E = 0}          ℒ₋¹ = {K =  Z₋ − E}     ℒ₋² = {K = −Z₋ − E}
//! ℒ₋³ = {4EK = Z₋²}     ℒ₊² = {K = −Z₊ − E}     ℒ₊³ = {4EK = Z₊²}
//! ```
//!
//! intersected with the Hill bounds `K₊(E) ≤ K ≤ K₋(E)`. Which curves are
//! actually present depends only on the charge case; the classifier turns a
//! point `(E, K)` into the allowed coordinate intervals (from the roots of
//! the motion polynomials) and a best-effort region label.

use crate::coords::ChargeConfig;
use crate::error::Error;
use crate::separation::{Branch, EnergyMomentum};
use crate::Result;
use rayon::prelude::*;
use std::collections::BTreeSet;

/// Default tolerance for curve membership: curves are measure-zero, exact
/// float hits are unreliable.
pub const CURVE_TOL: f64 = 1e-9;

/// Identifiers of the candidate bifurcation curves.
///
/// `Lp1` exists only as a discriminant factor (an artefact of allowing
/// `x ∈ ℝ`); it never belongs to the bifurcation set itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CurveId {
    /// ℒ₀ = {E = 0}, the threshold between compact and non-compact levels.
    L0,
    /// ℒ₋¹ = {K = Z₋ − E}.
    Lm1,
    /// ℒ₋² = {K = −Z₋ − E}.
    Lm2,
    /// ℒ₋³ = {4EK = Z₋²}.
    Lm3,
    /// ℒ₊¹ = {K = Z₊ − E}; discriminant factor only.
    Lp1,
    /// ℒ₊² = {K = −Z₊ − E}.
    Lp2,
    /// ℒ₊³ = {4EK = Z₊²}.
    Lp3,
}

impl CurveId {
    pub fn label(self) -> &'static str {
        match self {
            CurveId::L0 => "L0",
            CurveId::Lm1 => "Lm1",
            CurveId::Lm2 => "Lm2",
            CurveId::Lm3 => "Lm3",
            CurveId::Lp1 => "Lp1",
            CurveId::Lp2 => "Lp2",
            CurveId::Lp3 => "Lp3",
        }
    }
}

/// The disjoint charge cases driving the corollary dispatch. Exactly one
/// holds per valid configuration; `|Z₊| = Z₋` with both nonzero would force
/// `Z₁Z₂ = 0`, which construction excludes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChargeCase {
    /// `Z₋ = 0`: equal strengths.
    ZminusZero,
    /// `Z₊ = 0`: opposite strengths of equal magnitude.
    ZplusZero,
    /// Same signs, `|Z₊| > Z₋`.
    SameSign,
    /// Opposite signs with `|Z₊| < Z₋` and `Z₊ > 0`.
    OppositeSignPlusPositive,
    /// Opposite signs with `|Z₊| < Z₋` and `Z₊ < 0`; the only case whose
    /// diagram contains ℒ₊³ and a bounded-orbit region at positive energy.
    OppositeSignPlusNegative,
}

/// Lower Hill bound `K₊(E)` (possibly `−∞`):
///
/// ```text
/// K₊(E) = −∞                      E > 0
///       = −(Z₊ + E)               E ≤ min(−Z₊/2, 0)
///       = Z₊²/(4E)                min(−Z₊/2, 0) < E ≤ 0
/// ```
///
/// At `E = 0` with `Z₊ > 0` the third branch degenerates; the infimum of
/// `V_ξ` is `−∞` there and that limit is returned.
pub fn k_plus(e: f64, charges: &ChargeConfig) -> f64 {
    let zp = charges.z_plus();
    if e > 0.0 {
        f64::NEG_INFINITY
    } else if e <= (-zp / 2.0).min(0.0) {
        -(zp + e)
    } else if e == 0.0 {
        f64::NEG_INFINITY
    } else {
        zp * zp / (4.0 * e)
    }
}

/// Upper Hill bound `K₋(E) = Z₋ − E` for `E ≤ Z₋/2`, else `Z₋²/(4E)`.
pub fn k_minus(e: f64, charges: &ChargeConfig) -> f64 {
    let zm = charges.z_minus();
    if e <= zm / 2.0 {
        zm - e
    } else {
        zm * zm / (4.0 * e)
    }
}

/// `K` on the given curve at energy `e`, when the curve has a graph form:
/// `None` for the vertical line ℒ₀ and for the hyperbolas at `e = 0`.
pub fn curve_k(curve: CurveId, e: f64, charges: &ChargeConfig) -> Option<f64> {
    let (zp, zm) = (charges.z_plus(), charges.z_minus());
    match curve {
        CurveId::L0 => None,
        CurveId::Lm1 => Some(zm - e),
        CurveId::Lm2 => Some(-zm - e),
        CurveId::Lp1 => Some(zp - e),
        CurveId::Lp2 => Some(-zp - e),
        CurveId::Lp3 => (e != 0.0).then(|| zp * zp / (4.0 * e)),
        CurveId::Lm3 => (e != 0.0).then(|| zm * zm / (4.0 * e)),
    }
}

/// Discriminant of the motion polynomial `P_±`, proportional to
/// `(Z_±² − 4EK)(E + K − Z_±)²(E + K + Z_±)²`. Vanishes exactly on the
/// curves where roots of `P_±` collide.
pub fn discriminant(em: &EnergyMomentum, branch: Branch, charges: &ChargeConfig) -> f64 {
    let z = branch.z(charges);
    let s = em.e + em.k;
    (z * z - 4.0 * em.e * em.k) * (s - z).powi(2) * (s + z).powi(2)
}

/// The movable roots of the quadratic factor `Es² + Z_± s + K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MovableRoots {
    /// No real movable root.
    None,
    /// Single root of the degenerate linear factor (`E = 0`, `Z_± ≠ 0`).
    Single(f64),
    /// Double root (vanishing quadratic discriminant), returned once.
    Double(f64),
    /// Two simple roots in ascending order.
    Pair(f64, f64),
}

impl MovableRoots {
    /// Roots as a list (a double root appears once).
    pub fn values(&self) -> Vec<f64> {
        match *self {
            MovableRoots::None => vec![],
            MovableRoots::Single(r) | MovableRoots::Double(r) => vec![r],
            MovableRoots::Pair(a, b) => vec![a, b],
        }
    }

    pub fn is_double(&self) -> bool {
        matches!(self, MovableRoots::Double(_))
    }
}

/// Computes the movable roots at `(E, K)` for a branch.
///
/// For `E ≠ 0` these are `−Z_±/(2E) ± √(Z_±²/(4E²) − K/E)`, evaluated with
/// the cancellation-free quadratic formula and returned ascending; for
/// `E = 0` the quadratic degenerates to a line with the single root
/// `−K/Z_±` (empty when `Z_± = 0` too).
pub fn movable_roots(em: &EnergyMomentum, branch: Branch, charges: &ChargeConfig) -> MovableRoots {
    let z = branch.z(charges);
    let (e, k) = (em.e, em.k);
    if e == 0.0 {
        return if z == 0.0 {
            MovableRoots::None
        } else {
            MovableRoots::Single(-k / z)
        };
    }
    let disc = z * z - 4.0 * e * k;
    if disc < 0.0 {
        return MovableRoots::None;
    }
    if disc == 0.0 {
        return MovableRoots::Double(-z / (2.0 * e));
    }
    let sq = disc.sqrt();
    let q = if z >= 0.0 {
        -0.5 * (z + sq)
    } else {
        -0.5 * (z - sq)
    };
    let (r1, r2) = if q == 0.0 {
        (0.0, 0.0)
    } else {
        (q / e, k / q)
    };
    if r1 <= r2 {
        MovableRoots::Pair(r1, r2)
    } else {
        MovableRoots::Pair(r2, r1)
    }
}

/// Dispatches the charge case of a configuration (which is always in the
/// canonical frame `Z₋ ≥ 0`).
pub fn charge_case(charges: &ChargeConfig) -> ChargeCase {
    let (z1, z2) = (charges.z1(), charges.z2());
    if charges.z_minus() == 0.0 {
        ChargeCase::ZminusZero
    } else if charges.z_plus() == 0.0 {
        ChargeCase::ZplusZero
    } else if z1 * z2 > 0.0 {
        ChargeCase::SameSign
    } else if charges.z_plus() > 0.0 {
        ChargeCase::OppositeSignPlusPositive
    } else {
        ChargeCase::OppositeSignPlusNegative
    }
}

/// The curves making up the bifurcation set for the configuration's case.
pub fn bifurcation_curve_set(charges: &ChargeConfig) -> BTreeSet<CurveId> {
    use CurveId::*;
    let curves: &[CurveId] = match charge_case(charges) {
        ChargeCase::ZminusZero => &[L0, Lm1, Lp2],
        ChargeCase::ZplusZero
        | ChargeCase::SameSign
        | ChargeCase::OppositeSignPlusPositive => &[L0, Lm1, Lm2, Lm3, Lp2],
        ChargeCase::OppositeSignPlusNegative => &[L0, Lm1, Lm2, Lm3, Lp2, Lp3],
    };
    curves.iter().copied().collect()
}

/// Which curves of the bifurcation set pass within `tol` of `(E, K)`
/// (distance in `K` at fixed `E`; in `E` for the vertical line ℒ₀), among
/// points satisfying the Hill bounds. `None` when the point is regular.
pub fn in_bifurcation_set(
    em: &EnergyMomentum,
    charges: &ChargeConfig,
    tol: f64,
) -> Result<Option<BTreeSet<CurveId>>> {
    if em.e < 0.0 {
        return Err(Error::NegativeEnergy { e: em.e });
    }
    if em.k < k_plus(em.e, charges) - tol || em.k > k_minus(em.e, charges) + tol {
        return Ok(None);
    }
    let mut hits = BTreeSet::new();
    for curve in bifurcation_curve_set(charges) {
        let on = match curve {
            CurveId::L0 => em.e.abs() <= tol,
            _ => curve_k(curve, em.e, charges)
                .map(|kc| (em.k - kc).abs() <= tol)
                .unwrap_or(false),
        };
        if on {
            hits.insert(curve);
        }
    }
    Ok(if hits.is_empty() { None } else { Some(hits) })
}

/// A closed coordinate interval; `hi = +∞` encodes an unbounded component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn is_bounded(&self) -> bool {
        self.hi.is_finite()
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

/// Qualitative shape of the allowed x-set within `[1, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XPattern {
    Empty,
    /// `[1, ∞)`: the inter-focal segment is reachable.
    Full,
    /// `[x₄, ∞)` with `x₄ > 1`: the segment between the centers is shielded.
    Outer,
    /// `[1, x₃] ∪ [x₄, ∞)`: a bounded component coexists with scattering.
    Split,
    /// `[1, x₀]` only (degenerate `E = 0`, `Z₊ < 0` case).
    BoundedOnly,
}

impl XPattern {
    pub fn as_str(self) -> &'static str {
        match self {
            XPattern::Empty => "empty",
            XPattern::Full => "full",
            XPattern::Outer => "outer",
            XPattern::Split => "split",
            XPattern::BoundedOnly => "bounded",
        }
    }
}

/// Qualitative shape of the allowed y-set within `[−1, 1]`. With the
/// canonical convention `Z₋ ≥ 0` an "upper" pattern `[y₃, 1]` cannot occur.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YPattern {
    Empty,
    /// `[−1, 1]`: free to travel all around the centers.
    Full,
    /// `[−1, y₄]`: bounded away from the center at `(+1, 0)`.
    Lower,
    /// `[y₃, y₄] ⊂ (−1, 1)`: the axis is reachable only between the centers.
    Interior,
}

impl YPattern {
    pub fn as_str(self) -> &'static str {
        match self {
            YPattern::Empty => "empty",
            YPattern::Full => "full",
            YPattern::Lower => "lower",
            YPattern::Interior => "interior",
        }
    }
}

/// Result of classifying a point of the `(E, K)` plane.
///
/// The interval pattern is the ground truth; the label is a best-effort
/// annotation following the usual region names (`I_>`, `II_<`, `I_<^a`, …).
#[derive(Debug, Clone, PartialEq)]
pub struct RegionClassification {
    pub label: String,
    pub x_intervals: Vec<Interval>,
    pub y_intervals: Vec<Interval>,
    pub x_pattern: XPattern,
    pub y_pattern: YPattern,
    pub bounded_component: bool,
    pub on_curves: BTreeSet<CurveId>,
}

impl RegionClassification {
    pub fn is_forbidden(&self) -> bool {
        self.x_intervals.is_empty() || self.y_intervals.is_empty()
    }

    /// Compact machine-readable pattern string, e.g. `x=outer;y=full`.
    pub fn pattern(&self) -> String {
        format!("x={};y={}", self.x_pattern.as_str(), self.y_pattern.as_str())
    }
}

fn x_side(em: &EnergyMomentum, charges: &ChargeConfig) -> (XPattern, Vec<Interval>) {
    let roots = movable_roots(em, Branch::Plus, charges);
    let e = em.e;
    if e == 0.0 {
        let zp = charges.z_plus();
        return match roots {
            MovableRoots::Single(x0) => {
                if zp > 0.0 {
                    // Linear factor positive for x >= x0.
                    if x0 <= 1.0 {
                        (XPattern::Full, vec![Interval::new(1.0, f64::INFINITY)])
                    } else {
                        (XPattern::Outer, vec![Interval::new(x0, f64::INFINITY)])
                    }
                } else if x0 >= 1.0 {
                    (XPattern::BoundedOnly, vec![Interval::new(1.0, x0)])
                } else {
                    (XPattern::Empty, vec![])
                }
            }
            _ => {
                // Z+ = 0: the factor is the constant K.
                if em.k >= 0.0 {
                    (XPattern::Full, vec![Interval::new(1.0, f64::INFINITY)])
                } else {
                    (XPattern::Empty, vec![])
                }
            }
        };
    }
    // E > 0: upward parabola, nonnegative outside the movable roots.
    match roots {
        MovableRoots::Pair(x3, x4) if x4 > 1.0 => {
            if x3 > 1.0 {
                (
                    XPattern::Split,
                    vec![Interval::new(1.0, x3), Interval::new(x4, f64::INFINITY)],
                )
            } else {
                (XPattern::Outer, vec![Interval::new(x4, f64::INFINITY)])
            }
        }
        _ => (XPattern::Full, vec![Interval::new(1.0, f64::INFINITY)]),
    }
}

fn y_side(em: &EnergyMomentum, charges: &ChargeConfig) -> (YPattern, Vec<Interval>) {
    let roots = movable_roots(em, Branch::Minus, charges);
    let e = em.e;
    let full = (YPattern::Full, vec![Interval::new(-1.0, 1.0)]);
    let clip = |y3: f64, y4: f64| -> (YPattern, Vec<Interval>) {
        let lo = y3.max(-1.0);
        let hi = y4.min(1.0);
        if lo > hi {
            (YPattern::Empty, vec![])
        } else if lo <= -1.0 && hi >= 1.0 {
            full.clone()
        } else if lo <= -1.0 {
            (YPattern::Lower, vec![Interval::new(-1.0, hi)])
        } else {
            (YPattern::Interior, vec![Interval::new(lo, hi)])
        }
    };
    if e == 0.0 {
        return match roots {
            // Z- > 0: allowed where Z- y + K <= 0, i.e. y <= -K/Z-.
            MovableRoots::Single(y0) => clip(f64::NEG_INFINITY, y0),
            _ => {
                // Z- = 0: allowed iff K <= 0.
                if em.k <= 0.0 {
                    full
                } else {
                    (YPattern::Empty, vec![])
                }
            }
        };
    }
    // E > 0: allowed between the movable roots.
    match roots {
        MovableRoots::Pair(y3, y4) => clip(y3, y4),
        MovableRoots::Double(y0) => clip(y0, y0),
        _ => (YPattern::Empty, vec![]),
    }
}

fn region_label(
    case: ChargeCase,
    x: XPattern,
    y: YPattern,
    k: f64,
    zp: f64,
) -> String {
    if x == XPattern::Empty || y == YPattern::Empty {
        return "forbidden".to_string();
    }
    let sub = if zp > 0.0 {
        ">"
    } else if zp < 0.0 {
        "<"
    } else {
        "0"
    };
    if matches!(x, XPattern::Split | XPattern::BoundedOnly) {
        return format!("I_{sub}^a");
    }
    let zero_like = matches!(
        case,
        ChargeCase::ZplusZero
            | ChargeCase::OppositeSignPlusPositive
            | ChargeCase::OppositeSignPlusNegative
    );
    let star = if zero_like && k > 0.0 && y != YPattern::Full {
        "*"
    } else {
        ""
    };
    let roman = match (x, y) {
        (XPattern::Outer, YPattern::Full) => "I",
        (XPattern::Outer, _) | (XPattern::Full, YPattern::Full) => "II",
        (XPattern::Full, YPattern::Lower) => "III",
        (XPattern::Full, YPattern::Interior) => {
            if zero_like {
                "IV"
            } else {
                "III"
            }
        }
        _ => "?",
    };
    format!("{roman}_{sub}{star}")
}

/// Classifies a point `(E, K)` with `E ≥ 0`: allowed coordinate intervals,
/// pattern, bounded-component flag, best-effort label, and the bifurcation
/// curves it lies on (within [`CURVE_TOL`]).
///
/// At `E = 0` exactly the point is on ℒ₀ and the intervals come from the
/// degenerate linear movable-root rule. Points outside the Hill region get
/// empty intervals and the label `forbidden`.
pub fn classify(em: &EnergyMomentum, charges: &ChargeConfig) -> Result<RegionClassification> {
    if em.e < 0.0 {
        return Err(Error::NegativeEnergy { e: em.e });
    }
    let on_curves = in_bifurcation_set(em, charges, CURVE_TOL)?.unwrap_or_default();
    let (x_pattern, x_intervals) = x_side(em, charges);
    let (y_pattern, y_intervals) = y_side(em, charges);
    let label = region_label(
        charge_case(charges),
        x_pattern,
        y_pattern,
        em.k,
        charges.z_plus(),
    );
    Ok(RegionClassification {
        label,
        bounded_component: matches!(x_pattern, XPattern::Split | XPattern::BoundedOnly),
        x_intervals,
        y_intervals,
        x_pattern,
        y_pattern,
        on_curves,
    })
}

/// One rasterised diagram cell.
#[derive(Debug, Clone)]
pub struct DiagramCell {
    pub e: f64,
    pub k: f64,
    pub classification: RegionClassification,
}

/// A bifurcation curve clipped to the Hill region, as a polyline in the
/// `(E, K)` plane. Gaps (clipping) split a curve into several polylines.
#[derive(Debug, Clone)]
pub struct CurvePolyline {
    pub curve: CurveId,
    pub points: Vec<(f64, f64)>,
}

/// Rasterised bifurcation diagram: an `nx × ny` grid of classifications
/// (row-major, `E` fastest) plus the curve polylines.
#[derive(Debug, Clone)]
pub struct Diagram {
    pub e_range: (f64, f64),
    pub k_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    pub cells: Vec<DiagramCell>,
    pub curves: Vec<CurvePolyline>,
}

/// Samples the classifier over a grid and emits the bifurcation curves
/// clipped to the Hill region and the requested window.
///
/// Cells are evaluated concurrently; the output ordering is deterministic.
pub fn sample_diagram(
    e_range: (f64, f64),
    k_range: (f64, f64),
    nx: usize,
    ny: usize,
    charges: &ChargeConfig,
) -> Result<Diagram> {
    if e_range.0 < 0.0 {
        return Err(Error::NegativeEnergy { e: e_range.0 });
    }
    assert!(nx >= 2 && ny >= 2, "diagram resolution must be at least 2x2");
    let e_at = |i: usize| e_range.0 + (e_range.1 - e_range.0) * (i as f64) / ((nx - 1) as f64);
    let k_at = |j: usize| k_range.0 + (k_range.1 - k_range.0) * (j as f64) / ((ny - 1) as f64);

    let forbidden = || RegionClassification {
        label: "forbidden".to_string(),
        x_intervals: vec![],
        y_intervals: vec![],
        x_pattern: XPattern::Empty,
        y_pattern: YPattern::Empty,
        bounded_component: false,
        on_curves: BTreeSet::new(),
    };

    let cells: Vec<DiagramCell> = (0..ny)
        .into_par_iter()
        .flat_map_iter(|j| {
            let charges = *charges;
            (0..nx).map(move |i| {
                let (e, k) = (e_at(i), k_at(j));
                let em = EnergyMomentum::new(e, k);
                let classification = classify(&em, &charges).unwrap_or_else(|_| forbidden());
                DiagramCell {
                    e,
                    k,
                    classification,
                }
            })
        })
        .collect();

    let mut curves = Vec::new();
    let samples = nx.max(256);
    for curve in bifurcation_curve_set(charges) {
        if curve == CurveId::L0 {
            if e_range.0 <= 0.0 && e_range.1 >= 0.0 {
                let lo = k_range.0.max(k_plus(0.0, charges));
                let hi = k_range.1.min(k_minus(0.0, charges));
                if lo <= hi {
                    curves.push(CurvePolyline {
                        curve,
                        points: vec![(0.0, lo), (0.0, hi)],
                    });
                }
            }
            continue;
        }
        let mut run: Vec<(f64, f64)> = Vec::new();
        for i in 0..=samples {
            let e = e_range.0 + (e_range.1 - e_range.0) * (i as f64) / (samples as f64);
            let keep = curve_k(curve, e, charges).filter(|&k| {
                k >= k_plus(e, charges) - CURVE_TOL
                    && k <= k_minus(e, charges) + CURVE_TOL
                    && k >= k_range.0
                    && k <= k_range.1
            });
            match keep {
                Some(k) => run.push((e, k)),
                None => {
                    if run.len() >= 2 {
                        curves.push(CurvePolyline {
                            curve,
                            points: std::mem::take(&mut run),
                        });
                    } else {
                        run.clear();
                    }
                }
            }
        }
        if run.len() >= 2 {
            curves.push(CurvePolyline { curve, points: run });
        }
    }

    Ok(Diagram {
        e_range,
        k_range,
        nx,
        ny,
        cells,
        curves,
    })
}
