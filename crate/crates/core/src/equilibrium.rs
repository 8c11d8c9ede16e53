//! Equilibrium thresholds of an election.
//!
//! In equilibrium every voter with effective cost below a threshold `c`
//! votes, and `c` equals the pivot probability the voters perceive at the
//! turnout and margin that threshold induces:
//! `c = f(c) := p(n(c), m(c))`. The solver scans `f(c) - c` on a uniform
//! grid (plus the pivot points, where `f` peaks) and bisects every sign
//! change.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, parameter, Error, Result};
use crate::numeric::linear_fit;
use crate::pivotality::PivotalityModel;
use crate::support::{Election, Issue};

pub const MIN_GRID: usize = 256;
pub const DEFAULT_GRID: usize = 4096;
pub const DEFAULT_TOL: f64 = 1e-10;
/// Upper bound on the default stability probe half-width.
pub const MAX_DELTA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EquilibriumKind {
    /// Only (near) core supporters vote.
    Trivial,
    LeftOfPivot(f64),
    RightOfPivot(f64),
    Boundary,
}

impl EquilibriumKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Trivial => "trivial",
            Self::LeftOfPivot(_) => "left",
            Self::RightOfPivot(_) => "right",
            Self::Boundary => "boundary",
        }
    }

    pub fn pivot(&self) -> Option<f64> {
        match *self {
            Self::LeftOfPivot(p) | Self::RightOfPivot(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Stable => "stable",
            Self::Unstable => "unstable",
            Self::Marginal => "marginal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub c: f64,
    /// Expected active voters `n(c)`.
    pub turnout: f64,
    /// Expected margin `m(c)`.
    pub margin: f64,
    /// `|f(c) - c|`.
    pub residual: f64,
    pub kind: EquilibriumKind,
    pub stability: Stability,
    /// Set when the point could not be placed relative to any pivot point.
    pub unclassified: bool,
}

/// One equilibrium family tracked across population sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Trivial,
    Left,
    Right,
}

impl Family {
    fn matches(&self, kind: &EquilibriumKind, pivot: f64) -> bool {
        match (self, kind) {
            (Family::Trivial, EquilibriumKind::Trivial) => true,
            (Family::Left, EquilibriumKind::LeftOfPivot(p))
            | (Family::Right, EquilibriumKind::RightOfPivot(p)) => (p - pivot).abs() < 1e-9,
            _ => false,
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trivial" => Ok(Self::Trivial),
            "left" => Ok(Self::Left),
            "right" => Ok(Self::Right),
            other => Err(Error::Parameter(format!(
                "unknown equilibrium family {other:?} (expected trivial, left or right)"
            ))),
        }
    }
}

/// Best-response threshold `f(c) = p(n(c), m(c))` for a (possibly
/// fractional) population size.
pub fn best_response(issue: &Issue, population: f64, c: f64) -> f64 {
    let (active, margin) = issue.fraction_and_margin(c);
    issue.ppm().prob(active * population, margin)
}

/// Equilibria below this threshold are trivial: half the smallest pivot
/// point, or one half when the supports never tie.
pub fn trivial_band(issue: &Issue) -> f64 {
    issue.pivot_points().first().map_or(0.5, |&p| 0.5 * p)
}

/// Classifies a threshold against the issue's pivot points. The flag is set
/// when no pivot point exists to anchor a non-trivial point.
pub fn classify(c: f64, issue: &Issue, tol: f64) -> (EquilibriumKind, bool) {
    let pivots = issue.pivot_points();
    let band = pivots.first().map_or(0.5, |&p| 0.5 * p);
    if c < band {
        return (EquilibriumKind::Trivial, false);
    }
    if (1.0 - c).abs() <= tol {
        return (EquilibriumKind::Boundary, false);
    }
    let nearest = pivots
        .iter()
        .copied()
        .min_by(|a, b| (a - c).abs().total_cmp(&(b - c).abs()));
    match nearest {
        Some(p) if c < p => (EquilibriumKind::LeftOfPivot(p), false),
        Some(p) => (EquilibriumKind::RightOfPivot(p), false),
        None => (EquilibriumKind::Boundary, true),
    }
}

/// Half the distance to the nearest other equilibrium, capped at
/// [`MAX_DELTA`] and kept inside `[0, 1]`.
pub fn default_delta(c: f64, others: &[f64]) -> f64 {
    let mut delta = MAX_DELTA;
    for &o in others {
        let d = (o - c).abs();
        if d > 0.0 {
            delta = delta.min(0.5 * d);
        }
    }
    if c > 0.0 {
        delta = delta.min(c);
    }
    if c < 1.0 {
        delta = delta.min(1.0 - c);
    }
    delta
}

/// Sign test of the best response on either side of `c`: stable when
/// thresholds slightly off `c` are pushed back towards it.
///
/// At `c = 0` or `c = 1` only the interior side is probed. `others` are the
/// remaining equilibria; none may fall inside `[c - delta, c + delta]`.
pub fn stability(e: &Election, c: f64, delta: f64, others: &[f64]) -> Result<Stability> {
    stability_at(&e.issue, e.population as f64, c, delta, others)
}

fn stability_at(
    issue: &Issue,
    population: f64,
    c: f64,
    delta: f64,
    others: &[f64],
) -> Result<Stability> {
    if !(delta > 0.0) {
        return parameter(format!("delta must be positive, got {delta}"));
    }
    let (lo, hi) = (c - delta, c + delta);
    if (c > 0.0 && lo < 0.0) || (c < 1.0 && hi > 1.0) {
        return parameter(format!("[{lo}, {hi}] leaves [0, 1]"));
    }
    if let Some(o) = others.iter().find(|&&o| o != c && o >= lo && o <= hi) {
        return parameter(format!(
            "probe interval [{lo}, {hi}] contains another equilibrium at {o}"
        ));
    }
    let g = |x: f64| best_response(issue, population, x) - x;
    let left = (c > 0.0).then(|| g(lo));
    let right = (c < 1.0).then(|| g(hi));
    let pushes_back = left.is_none_or(|v| v > 0.0) && right.is_none_or(|v| v < 0.0);
    let pushes_away = left.is_none_or(|v| v < 0.0) && right.is_none_or(|v| v > 0.0);
    Ok(match (pushes_back, pushes_away) {
        (true, false) => Stability::Stable,
        (false, true) => Stability::Unstable,
        _ => Stability::Marginal,
    })
}

/// All equilibrium thresholds of `e`, ascending.
pub fn find_equilibria(e: &Election, grid_size: usize, tol: f64) -> Result<Vec<EquilibriumPoint>> {
    find_equilibria_at(&e.issue, e.population as f64, grid_size, tol)
}

/// As [`find_equilibria`] for a real-valued population size, which the
/// cost-to-population inversion produces.
pub fn find_equilibria_at(
    issue: &Issue,
    population: f64,
    grid_size: usize,
    tol: f64,
) -> Result<Vec<EquilibriumPoint>> {
    if grid_size < MIN_GRID {
        return parameter(format!(
            "grid size {grid_size} is below {MIN_GRID}; crossings may be missed"
        ));
    }
    if !(tol > 0.0 && tol <= 1e-3) {
        return parameter(format!("tolerance must lie in (0, 1e-3], got {tol}"));
    }
    if !(population >= 1.0) {
        return parameter(format!("population must be at least 1, got {population}"));
    }
    let g = |x: f64| best_response(issue, population, x) - x;

    let pivots = issue.pivot_points();
    let mut nodes: Vec<f64> = (0..=grid_size)
        .map(|i| i as f64 / grid_size as f64)
        .chain(pivots.iter().copied())
        .collect();
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let values: Vec<f64> = nodes.iter().map(|&x| g(x)).collect();

    // (c, tangential)
    let mut roots: Vec<(f64, bool)> = Vec::new();
    let last = nodes.len() - 1;
    if values[0].abs() <= tol {
        roots.push((0.0, false));
    }
    if values[last].abs() <= tol {
        roots.push((1.0, false));
    }
    for i in 0..last {
        let (a, b) = (nodes[i], nodes[i + 1]);
        let (ga, gb) = (values[i], values[i + 1]);
        if i > 0 && ga == 0.0 {
            roots.push((a, false));
        }
        if ga != 0.0 && gb != 0.0 && (ga < 0.0) != (gb < 0.0) {
            roots.push((bisect(&g, a, b, ga, tol), false));
        } else if ga != 0.0 && gb != 0.0 {
            // same sign: look for a touch-down inside the cell
            let width = b - a;
            if ga.abs().min(gb.abs()) < width {
                let (x, v) = golden_min(|x| g(x).abs(), a, b);
                if v <= tol {
                    roots.push((x, true));
                }
            }
        }
    }
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, bool)> = Vec::with_capacity(roots.len());
    for r in roots {
        match merged.last_mut() {
            Some(prev) if r.0 - prev.0 <= 2.0 * tol => {
                if g(r.0).abs() < g(prev.0).abs() {
                    *prev = r;
                }
            }
            _ => merged.push(r),
        }
    }
    debug_assert!(
        !merged.is_empty(),
        "f(0) >= 0 and f(1) <= 1 force a fixed point"
    );

    let cs: Vec<f64> = merged.iter().map(|r| r.0).collect();
    merged
        .iter()
        .map(|&(c, tangential)| {
            let (active, margin) = issue.fraction_and_margin(c);
            let (kind, unclassified) = classify(c, issue, tol);
            let stability = if tangential {
                Stability::Marginal
            } else {
                stability_at(issue, population, c, default_delta(c, &cs), &cs)?
            };
            Ok(EquilibriumPoint {
                c,
                turnout: active * population,
                margin,
                residual: g(c).abs(),
                kind,
                stability,
                unclassified,
            })
        })
        .collect()
}

/// Bisection on a bracketing cell until the residual meets `tol` or the
/// bracket collapses to adjacent floats.
fn bisect(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, g_lo: f64, tol: f64) -> f64 {
    let lo_negative = g_lo < 0.0;
    let mut best = (lo, g_lo.abs());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = g(mid);
        if v.abs() < best.1 {
            best = (mid, v.abs());
        }
        if v.abs() <= tol {
            return mid;
        }
        if (v < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    best.0
}

fn golden_min(h: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut h1, mut h2) = (h(x1), h(x2));
    for _ in 0..80 {
        if h1 < h2 {
            b = x2;
            x2 = x1;
            h2 = h1;
            x1 = b - inv_phi * (b - a);
            h1 = h(x1);
        } else {
            a = x1;
            x1 = x2;
            h1 = h2;
            x2 = a + inv_phi * (b - a);
            h2 = h(x2);
        }
    }
    if h1 < h2 {
        (x1, h1)
    } else {
        (x2, h2)
    }
}

/// A family's equilibrium at each population size where it exists.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSeries {
    pub family: Family,
    /// Limit of the family: the tracked pivot point, or 0 when trivial.
    pub limit: f64,
    pub points: Vec<(u64, EquilibriumPoint)>,
    /// Population sizes where the family had no equilibrium.
    pub missing: Vec<u64>,
}

/// Solves each population size (in parallel) and keeps the member of
/// `family`. `pivot` defaults to the smallest pivot point.
pub fn equilibrium_series(
    issue: &Issue,
    family: Family,
    pivot: Option<f64>,
    populations: &[u64],
    grid_size: usize,
    tol: f64,
) -> Result<EquilibriumSeries> {
    let pivot = match (family, pivot) {
        (Family::Trivial, _) => 0.0,
        (_, Some(p)) => p,
        (_, None) => *issue.pivot_points().first().ok_or_else(|| {
            Error::Domain("issue has no pivot point to anchor a non-trivial family".into())
        })?,
    };
    let solved: Vec<(u64, Vec<EquilibriumPoint>)> = populations
        .par_iter()
        .map(|&n| {
            let e = Election::new(issue.clone(), n)?;
            Ok((n, find_equilibria(&e, grid_size, tol)?))
        })
        .collect::<Result<_>>()?;

    let mut points = Vec::new();
    let mut missing = Vec::new();
    for (n, eqs) in solved {
        let chosen = eqs
            .into_iter()
            .filter(|p| family.matches(&p.kind, pivot))
            .min_by(|a, b| (a.c - pivot).abs().total_cmp(&(b.c - pivot).abs()));
        match chosen {
            Some(p) => points.push((n, p)),
            None => missing.push(n),
        }
    }
    Ok(EquilibriumSeries {
        family,
        limit: pivot,
        points,
        missing,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    /// Slope of `log |c_N - c*|` against `log N`.
    pub slope: f64,
    pub intercept: f64,
    pub limit: f64,
    pub used: Vec<u64>,
    /// Number of leading population sizes discarded because the family
    /// did not exist there yet.
    pub dropped: usize,
}

/// Rate at which a family approaches its limit, by a log-log fit.
pub fn convergence_rate(
    issue: &Issue,
    family: Family,
    pivot: Option<f64>,
    populations: &[u64],
    grid_size: usize,
    tol: f64,
) -> Result<RateFit> {
    if !matches!(issue.ppm(), PivotalityModel::Polynomial { .. }) {
        return parameter("convergence rates are defined for the polynomial model only");
    }
    let mut sorted = populations.to_vec();
    sorted.sort_unstable();
    let series = equilibrium_series(issue, family, pivot, &sorted, grid_size, tol)?;
    // keep the tail after the last population where the family was absent
    let start = series
        .missing
        .iter()
        .filter_map(|m| sorted.iter().position(|n| n == m))
        .max()
        .map_or(0, |i| i + 1);
    let tail: Vec<&(u64, EquilibriumPoint)> = series
        .points
        .iter()
        .filter(|(n, p)| {
            *n >= sorted.get(start).copied().unwrap_or(u64::MAX) && p.c != series.limit
        })
        .collect();
    if tail.len() < 4 {
        return parameter(format!(
            "only {} usable population sizes for the {family:?} family; need 4",
            tail.len()
        ));
    }
    let x: Vec<f64> = tail.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let y: Vec<f64> = tail
        .iter()
        .map(|(_, p)| (p.c - series.limit).abs().ln())
        .collect();
    let (slope, intercept) = linear_fit(&x, &y);
    Ok(RateFit {
        slope,
        intercept,
        limit: series.limit,
        used: tail.iter().map(|(n, _)| *n).collect(),
        dropped: start,
    })
}

/// Population size at which `c` is an equilibrium of the given family under
/// the polynomial model, from `c = 1 / (m(c)^alpha n^beta)`.
pub fn population_for_cost(issue: &Issue, c: f64, family: Family) -> Result<f64> {
    let PivotalityModel::Polynomial { q, alpha, beta } = *issue.ppm() else {
        return parameter("population inversion needs the polynomial model");
    };
    if !(c > 0.0 && c <= 1.0) {
        return domain(format!("cost must lie in (0, 1], got {c}"));
    }
    if c > q {
        return domain(format!("cost {c} exceeds the pivotality cap q = {q}"));
    }
    let pivots = issue.pivot_points();
    let nearest = pivots
        .iter()
        .copied()
        .min_by(|a, b| (a - c).abs().total_cmp(&(b - c).abs()));
    match (family, nearest) {
        (Family::Trivial, _) => {
            return parameter("inversion applies to the left and right families")
        }
        (_, None) => return domain("issue has no pivot point"),
        (Family::Right, Some(p)) if c <= p => {
            return domain(format!("cost {c} is not right of the pivot point {p}"))
        }
        (Family::Left, Some(p)) if c >= p => {
            return domain(format!("cost {c} is not left of the pivot point {p}"))
        }
        _ => {}
    }
    let m = issue.margin(c)?;
    if m == 0.0 {
        return domain(format!(
            "margin vanishes at c = {c}; no finite population makes a pivot point an equilibrium"
        ));
    }
    let turnout = (c * m.powf(alpha)).powf(-1.0 / beta);
    let population = turnout / issue.active_fraction(c)?;
    if population < 1.0 {
        return domain(format!(
            "cost {c} would need a population of {population} < 1"
        ));
    }
    Ok(population)
}

/// Expected fraction of the population that votes at threshold `c`.
pub fn active_fraction(issue: &Issue, point: &EquilibriumPoint) -> f64 {
    issue.fraction_and_margin(point.c).0
}
