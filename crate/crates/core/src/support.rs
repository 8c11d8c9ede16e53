//! Support functions, issues and elections.
//!
//! A support function `s_T(c)` gives the fraction of the whole population
//! that prefers candidate `T` and has an effective voting cost of at most
//! `c`. It is stored as a piecewise-linear interpolation of breakpoints on
//! `[0, 1]`. A positive value at `c = 0` is an atom of core supporters; a
//! repeated final breakpoint at `c = 1` encodes an atom at cost 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::pivotality::PivotalityModel;

/// Tolerance for the `s_A(1) + s_B(1) = 1` normalisation.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Differences of support below this are treated as exact ties.
const TIE_EPS: f64 = 1e-12;

/// Effective cost of voting `max{0, (G - D) / V}` for a voter with gross
/// cost `G`, duty benefit `D` and valuation `V` of the outcome.
pub fn effective_cost(gross: f64, duty: f64, value: f64) -> Result<f64> {
    if !(value > 0.0) || !value.is_finite() {
        return domain(format!("valuation must be positive, got {value}"));
    }
    if !(gross >= 0.0) || !(duty >= 0.0) {
        return domain(format!(
            "costs and benefits must be non-negative, got G={gross}, D={duty}"
        ));
    }
    Ok(((gross - duty) / value).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Candidate {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoterDraw {
    pub candidate: Candidate,
    pub cost: f64,
}

/// Piecewise-linear, non-decreasing support function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportFunction {
    points: Vec<(f64, f64)>,
}

impl SupportFunction {
    /// Validates and builds a support function from `(cost, mass)` breakpoints.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        Self::named("support function", points)
    }

    /// As [`SupportFunction::new`], naming the function in diagnostics.
    pub fn named(name: &str, points: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |index: usize, reason: String| Error::Breakpoint {
            function: name.to_string(),
            index,
            reason,
        };
        if points.len() < 2 {
            return Err(bad(
                points.len(),
                "at least two breakpoints (c=0 and c=1) are required".into(),
            ));
        }
        let last = points.len() - 1;
        for (i, &(c, s)) in points.iter().enumerate() {
            if !c.is_finite() || !(0.0..=1.0).contains(&c) {
                return Err(bad(i, format!("cost {c} outside [0, 1]")));
            }
            if !s.is_finite() || !(0.0..=1.0).contains(&s) {
                return Err(bad(i, format!("mass {s} outside [0, 1]")));
            }
            if i == 0 {
                if c != 0.0 {
                    return Err(bad(0, format!("first cost must be 0, got {c}")));
                }
                continue;
            }
            let (pc, ps) = points[i - 1];
            let jump_at_one = i == last && c == 1.0 && pc == 1.0 && i >= 2;
            if c <= pc && !jump_at_one {
                return Err(bad(i, format!("cost {c} does not increase past {pc}")));
            }
            if s < ps {
                return Err(bad(i, format!("mass {s} decreases from {ps}")));
            }
        }
        if points[last].0 != 1.0 {
            return Err(bad(
                last,
                format!("last cost must be 1, got {}", points[last].0),
            ));
        }
        Ok(Self { points })
    }

    /// Constant function: every supporter is a core supporter.
    pub fn constant(mass: f64) -> Result<Self> {
        Self::new(vec![(0.0, mass), (1.0, mass)])
    }

    /// Straight line from `s(0) = at_zero` to `s(1) = at_one`.
    pub fn linear(at_zero: f64, at_one: f64) -> Result<Self> {
        Self::new(vec![(0.0, at_zero), (1.0, at_one)])
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Total support `s(1)`.
    pub fn total(&self) -> f64 {
        self.points[self.points.len() - 1].1
    }

    /// Core support `s(0)`.
    pub fn core(&self) -> f64 {
        self.points[0].1
    }

    /// `s(c)`; errors when `c` is outside `[0, 1]`.
    pub fn eval(&self, c: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&c) {
            return domain(format!("cost {c} outside [0, 1]"));
        }
        Ok(self.at(c))
    }

    /// `s(c)` for `c` already known to lie in `[0, 1]`; clamps otherwise.
    pub(crate) fn at(&self, c: f64) -> f64 {
        let pts = &self.points;
        if c >= 1.0 {
            return self.total();
        }
        if c <= 0.0 {
            return pts[0].1;
        }
        // first breakpoint with cost > c; c < 1 so it exists
        let j = pts.partition_point(|&(x, _)| x <= c);
        let (c0, s0) = pts[j - 1];
        if c == c0 {
            return s0;
        }
        let (c1, s1) = pts[j];
        s0 + (s1 - s0) * (c - c0) / (c1 - c0)
    }

    /// Left limit of `s` at 1, which differs from `s(1)` only with an atom at 1.
    fn before_one(&self) -> f64 {
        let n = self.points.len();
        if self.points[n - 2].0 == 1.0 {
            self.points[n - 2].1
        } else {
            self.total()
        }
    }

    /// Cost with cumulative mass `u`: the inverse of `s` restricted to the
    /// supporters, for `u` in `[0, s(1))`.
    pub(crate) fn quantile(&self, u: f64) -> f64 {
        let pts = &self.points;
        let j = pts.partition_point(|&(_, s)| s <= u);
        if j == 0 {
            return 0.0;
        }
        if j >= pts.len() {
            return 1.0;
        }
        let (c0, s0) = pts[j - 1];
        let (c1, s1) = pts[j];
        if c1 == c0 {
            return c1;
        }
        (c0 + (u - s0) / (s1 - s0) * (c1 - c0)).clamp(c0, c1)
    }
}

/// An electorate: support functions for the popular candidate `A` and the
/// unpopular `B`, together with the perceived-pivotality model voters use.
#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    s_a: SupportFunction,
    s_b: SupportFunction,
    ppm: PivotalityModel,
}

#[derive(Serialize, Deserialize)]
struct IssueFile {
    #[serde(rename = "s_A")]
    s_a: Vec<(f64, f64)>,
    #[serde(rename = "s_B")]
    s_b: Vec<(f64, f64)>,
    ppm: PivotalityModel,
}

impl Issue {
    pub fn new(s_a: SupportFunction, s_b: SupportFunction, ppm: PivotalityModel) -> Result<Self> {
        ppm.validate()?;
        let (ta, tb) = (s_a.total(), s_b.total());
        if (ta + tb - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Config(format!(
                "s_A(1) + s_B(1) must equal 1, got {ta} + {tb} = {}",
                ta + tb
            )));
        }
        if ta < tb {
            return Err(Error::Config(format!(
                "candidate A must be weakly more popular: s_A(1) = {ta} < s_B(1) = {tb}"
            )));
        }
        Ok(Self { s_a, s_b, ppm })
    }

    /// The two-candidate instance with `s_A(c) = 0.1 + c/2` and `s_B(c) = 0.4`.
    pub fn example_one(ppm: PivotalityModel) -> Self {
        Self::new(
            SupportFunction::linear(0.1, 0.6).expect("valid"),
            SupportFunction::constant(0.4).expect("valid"),
            ppm,
        )
        .expect("example issue is valid")
    }

    /// Parses the JSON issue schema `{"s_A": [[c,s],..], "s_B": [[c,s],..], "ppm": {..}}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: IssueFile =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("issue JSON: {e}")))?;
        Self::new(
            SupportFunction::named("s_A", raw.s_a)?,
            SupportFunction::named("s_B", raw.s_b)?,
            raw.ppm,
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&IssueFile {
            s_a: self.s_a.points.clone(),
            s_b: self.s_b.points.clone(),
            ppm: self.ppm,
        })
        .expect("issue serialises")
    }

    pub fn s_a(&self) -> &SupportFunction {
        &self.s_a
    }

    pub fn s_b(&self) -> &SupportFunction {
        &self.s_b
    }

    pub fn ppm(&self) -> &PivotalityModel {
        &self.ppm
    }

    /// Same electorate under a different pivotality model.
    pub fn with_ppm(&self, ppm: PivotalityModel) -> Result<Self> {
        Self::new(self.s_a.clone(), self.s_b.clone(), ppm)
    }

    /// Full-participation margin `s_A(1) - s_B(1)`.
    pub fn full_margin(&self) -> f64 {
        self.s_a.total() - self.s_b.total()
    }

    /// Active fraction `s_A(c) + s_B(c)`.
    pub fn active_fraction(&self, c: f64) -> Result<f64> {
        Ok(self.s_a.eval(c)? + self.s_b.eval(c)?)
    }

    /// Expected margin `|s_A(c) - s_B(c)| / (s_A(c) + s_B(c))`.
    pub fn margin(&self, c: f64) -> Result<f64> {
        Ok(self.signed_margin(c)?.abs())
    }

    /// Margin signed in favour of `A`.
    pub fn signed_margin(&self, c: f64) -> Result<f64> {
        let (a, b) = (self.s_a.eval(c)?, self.s_b.eval(c)?);
        if a + b <= 0.0 {
            return domain(format!("no active support at c = {c}; margin undefined"));
        }
        Ok(((a - b) / (a + b)).clamp(-1.0, 1.0))
    }

    /// `(s_A(c) + s_B(c), |margin|)` with margin 0 where nobody is active.
    pub(crate) fn fraction_and_margin(&self, c: f64) -> (f64, f64) {
        let (a, b) = (self.s_a.at(c), self.s_b.at(c));
        let total = a + b;
        if total <= 0.0 {
            (0.0, 0.0)
        } else {
            (total, ((a - b).abs() / total).min(1.0))
        }
    }

    /// Costs in `(0, 1)` where the supports tie with positive total and
    /// separate immediately to the right, in increasing order.
    pub fn pivot_points(&self) -> Vec<f64> {
        let mut knots: Vec<f64> = self
            .s_a
            .points
            .iter()
            .chain(&self.s_b.points)
            .map(|&(c, _)| c)
            .collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();

        // values of the difference just inside each segment's ends, ignoring
        // any jump at c = 1
        let diff = |c: f64| {
            if c >= 1.0 {
                self.s_a.before_one() - self.s_b.before_one()
            } else {
                self.s_a.at(c) - self.s_b.at(c)
            }
        };
        let positive = |c: f64| self.s_a.at(c) + self.s_b.at(c) > 0.0;
        let is_zero = |d: f64| d.abs() <= TIE_EPS;

        let mut pivots = Vec::new();
        for w in knots.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            let (d0, d1) = (diff(x0), diff(x1));
            // tie at the left knot that opens up across this segment
            if x0 > 0.0 && is_zero(d0) && !is_zero(d1) && positive(x0) {
                pivots.push(x0);
            }
            // strict crossing in the segment's interior
            if !is_zero(d0) && !is_zero(d1) && (d0 < 0.0) != (d1 < 0.0) {
                let r = x0 + d0 / (d0 - d1) * (x1 - x0);
                if r > 0.0 && r < 1.0 && positive(r) {
                    pivots.push(r);
                }
            }
        }
        pivots
    }
}

/// An issue with a population size.
#[derive(Debug, Clone, PartialEq)]
pub struct Election {
    pub issue: Issue,
    pub population: u64,
}

impl Election {
    pub fn new(issue: Issue, population: u64) -> Result<Self> {
        if population == 0 {
            return Err(Error::Parameter(
                "population size must be at least 1".into(),
            ));
        }
        Ok(Self { issue, population })
    }

    /// Expected number of active voters `n(c) = (s_A(c) + s_B(c)) N`.
    pub fn turnout(&self, c: f64) -> Result<f64> {
        Ok(self.issue.active_fraction(c)? * self.population as f64)
    }

    pub fn margin(&self, c: f64) -> Result<f64> {
        self.issue.margin(c)
    }

    /// Draws the population's `(candidate, cost)` types, i.i.d. from the
    /// distribution the support functions describe.
    pub fn sample_voters(&self, seed: u64) -> Vec<VoterDraw> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (sa, sb) = (&self.issue.s_a, &self.issue.s_b);
        let share_a = sa.total();
        (0..self.population)
            .map(|_| {
                let pick: f64 = rng.gen();
                let u: f64 = rng.gen();
                let (candidate, s) = if pick < share_a {
                    (Candidate::A, sa)
                } else {
                    (Candidate::B, sb)
                };
                VoterDraw {
                    candidate,
                    cost: s.quantile(u * s.total()),
                }
            })
            .collect()
    }
}
