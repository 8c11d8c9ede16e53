//! Winning probability of the popular candidate at a threshold `c`.
//!
//! At threshold `c` each of the `N` voters independently votes `A` with
//! probability `s_A(c)`, `B` with probability `s_B(c)` and abstains
//! otherwise. `A` wins on a strict majority of cast votes; ties are
//! reported separately.

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, parameter, Error, Result};
use crate::numeric::{normal_cdf, replicate_rng};
use crate::support::Election;

/// Largest population the exact convolution accepts.
pub const EXACT_MAX_POPULATION: u64 = 5000;
/// Below this expected turnout the Normal approximation is flagged.
pub const NORMAL_MIN_TURNOUT: f64 = 30.0;
pub const MIN_REPLICATES: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    ExactTrinomial,
    NormalApprox,
    MonteCarlo,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Self::ExactTrinomial => "exact",
            Self::NormalApprox => "normal",
            Self::MonteCarlo => "mc",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::ExactTrinomial),
            "normal" => Ok(Self::NormalApprox),
            "mc" => Ok(Self::MonteCarlo),
            other => Err(Error::Parameter(format!(
                "unknown method {other:?} (expected exact, normal or mc)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WinProbEstimate {
    /// `Pr(V_A > V_B)`.
    pub value: f64,
    pub method: Method,
    /// Zero for the deterministic methods.
    pub stderr: f64,
    /// `Pr(V_A = V_B)`.
    pub tie_prob: f64,
    /// Normal approximation used below its accuracy range.
    pub low_accuracy: bool,
}

impl WinProbEstimate {
    /// `Pr(V_B > V_A)`.
    pub fn value_b(&self) -> f64 {
        (1.0 - self.value - self.tie_prob).max(0.0)
    }
}

fn vote_shares(e: &Election, c: f64) -> Result<(f64, f64)> {
    Ok((e.issue.s_a().eval(c)?, e.issue.s_b().eval(c)?))
}

/// Exact `Pr(V_A > V_B)` by convolving the per-voter vote difference
/// (+1, -1 or 0) over all voters. Cost is `O(N^2)`.
pub fn winprob_exact(e: &Election, c: f64) -> Result<WinProbEstimate> {
    if e.population > EXACT_MAX_POPULATION {
        return Err(Error::Capacity(format!(
            "exact enumeration supports N <= {EXACT_MAX_POPULATION}, got {}; use the normal or mc method",
            e.population
        )));
    }
    let (pa, pb) = vote_shares(e, c)?;
    let p0 = (1.0 - pa - pb).max(0.0);
    let n = e.population as usize;
    // dist[d + n] = Pr(difference = d) after the voters seen so far
    let mut dist = vec![0.0; 2 * n + 1];
    let mut next = vec![0.0; 2 * n + 1];
    dist[n] = 1.0;
    for step in 0..n {
        let (lo, hi) = (n - step, n + step);
        next[lo - 1..=hi + 1].iter_mut().for_each(|v| *v = 0.0);
        for i in lo..=hi {
            let w = dist[i];
            if w == 0.0 {
                continue;
            }
            next[i + 1] += w * pa;
            next[i - 1] += w * pb;
            next[i] += w * p0;
        }
        std::mem::swap(&mut dist, &mut next);
    }
    let value: f64 = dist[n + 1..].iter().sum();
    Ok(WinProbEstimate {
        value: value.min(1.0),
        method: Method::ExactTrinomial,
        stderr: 0.0,
        tie_prob: dist[n],
        low_accuracy: false,
    })
}

/// `Phi(mu / sigma)` with `mu = m n / 2` and `sigma^2 = (1 - m^2) n / 4`,
/// `m` the margin signed towards `A` and `n` the expected turnout.
pub fn winprob_normal(e: &Election, c: f64) -> Result<WinProbEstimate> {
    let turnout = e.turnout(c)?;
    if turnout <= 0.0 {
        return domain(format!("nobody votes at c = {c}"));
    }
    let m = e.issue.signed_margin(c)?;
    let value = if m.abs() >= 1.0 {
        if m > 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        let mu = 0.5 * m * turnout;
        let sigma = (0.25 * (1.0 - m * m) * turnout).sqrt();
        normal_cdf(mu / sigma)
    };
    Ok(WinProbEstimate {
        value,
        method: Method::NormalApprox,
        stderr: 0.0,
        tie_prob: 0.0,
        low_accuracy: turnout < NORMAL_MIN_TURNOUT,
    })
}

/// Simulates `replicates` elections. Replicate `r` draws from its own
/// stream keyed by `(seed, r)`, so the estimate does not depend on how the
/// replicates are spread over threads.
pub fn winprob_montecarlo(
    e: &Election,
    c: f64,
    replicates: u64,
    seed: u64,
) -> Result<WinProbEstimate> {
    if replicates < MIN_REPLICATES {
        return parameter(format!(
            "at least {MIN_REPLICATES} replicates are required, got {replicates}"
        ));
    }
    let (pa, pb) = vote_shares(e, c)?;
    let n = e.population;
    let votes_a = Binomial::new(n, pa).map_err(|err| Error::Domain(err.to_string()))?;
    // B among the voters that did not pick A
    let pb_rest = if pa < 1.0 {
        (pb / (1.0 - pa)).min(1.0)
    } else {
        0.0
    };

    let (wins, ties) = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            let a = votes_a.sample(&mut rng);
            let b = Binomial::new(n - a, pb_rest)
                .expect("valid probability")
                .sample(&mut rng);
            ((a > b) as u64, (a == b) as u64)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));

    let reps = replicates as f64;
    let value = wins as f64 / reps;
    // an all-win or all-loss run has no spread; shift half a count inward
    let spread = if wins == 0 || wins == replicates {
        (wins as f64 + 0.5) / (reps + 1.0)
    } else {
        value
    };
    Ok(WinProbEstimate {
        value,
        method: Method::MonteCarlo,
        stderr: (spread * (1.0 - spread) / reps).sqrt(),
        tie_prob: ties as f64 / reps,
        low_accuracy: false,
    })
}

/// Limit behaviour of the popular candidate's winning probability along a
/// right equilibrium of the polynomial model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// Winning probability tends to 1.
    Jury,
    /// Winning probability tends to 1/2.
    StrongNonJury,
    /// Winning probability tends to a constant strictly between 1/2 and 1.
    NonJuryThreshold,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Jury => "jury",
            Self::StrongNonJury => "strong-non-jury",
            Self::NonJuryThreshold => "non-jury-threshold",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitClassification {
    pub regime: Regime,
    pub limit_value: f64,
}

/// Compares the margin exponent `alpha` with twice the turnout exponent
/// `beta`. At `alpha = 2 beta` the limit is `Phi(c*^(-1/alpha))`.
pub fn classify_limit(alpha: f64, beta: f64, c_star: f64) -> Result<LimitClassification> {
    if !(c_star > 0.0 && c_star < 1.0) {
        return domain(format!("pivot point must lie in (0, 1), got {c_star}"));
    }
    if !(alpha > 0.0) || !(beta > 0.0) {
        return domain(format!(
            "alpha and beta must be positive, got {alpha}, {beta}"
        ));
    }
    let gap = alpha - 2.0 * beta;
    Ok(if gap.abs() <= 1e-12 {
        LimitClassification {
            regime: Regime::NonJuryThreshold,
            limit_value: normal_cdf(c_star.powf(-1.0 / alpha)),
        }
    } else if gap > 0.0 {
        LimitClassification {
            regime: Regime::Jury,
            limit_value: 1.0,
        }
    } else {
        LimitClassification {
            regime: Regime::StrongNonJury,
            limit_value: 0.5,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pivotality::PivotalityModel;
    use crate::support::{Issue, SupportFunction};

    fn ex1(n: u64) -> Election {
        Election::new(
            Issue::example_one(PivotalityModel::polynomial(1.0, 1.0, 0.5).unwrap()),
            n,
        )
        .unwrap()
    }

    fn symmetric(n: u64) -> Election {
        // s_A = s_B everywhere; at c = 1 both are 1/2
        let s = SupportFunction::linear(0.0, 0.5).unwrap();
        Election::new(
            Issue::new(s.clone(), s, PivotalityModel::Binomial).unwrap(),
            n,
        )
        .unwrap()
    }

    #[test]
    fn exact_small_cases() {
        let w = winprob_exact(&ex1(1), 1.0).unwrap();
        assert!((w.value - 0.6).abs() < 1e-15 && w.tie_prob.abs() < 1e-15);
        let w = winprob_exact(&symmetric(2), 1.0).unwrap();
        assert!((w.value - 0.25).abs() < 1e-15);
        assert!((w.tie_prob - 0.5).abs() < 1e-15);
        assert_eq!(w.stderr, 0.0);
    }

    #[test]
    fn exact_capacity() {
        assert!(matches!(
            winprob_exact(&ex1(5001), 0.6),
            Err(Error::Capacity(_))
        ));
        assert!(winprob_exact(&ex1(5000), 0.6).is_ok());
    }

    #[test]
    fn normal_examples() {
        let w = winprob_normal(&symmetric(1000), 0.7).unwrap();
        assert_eq!(w.value, 0.5);
        assert!(!w.low_accuracy);
        assert!(winprob_normal(&ex1(20), 1.0).unwrap().low_accuracy);
        // B leads below the pivot point
        assert!(winprob_normal(&ex1(10_000), 0.3).unwrap().value < 0.01);
    }

    #[test]
    fn montecarlo_deterministic_and_symmetric() {
        let e = symmetric(101);
        let a = winprob_montecarlo(&e, 0.8, 2000, 9).unwrap();
        assert_eq!(a, winprob_montecarlo(&e, 0.8, 2000, 9).unwrap());
        assert!(a.stderr > 0.0);
        let big = winprob_montecarlo(&e, 0.8, 100_000, 3).unwrap();
        // strict wins of either side are equally likely
        assert!((big.value - big.value_b()).abs() <= 4.0 * big.stderr * 2f64.sqrt());
        assert!(matches!(
            winprob_montecarlo(&e, 0.8, 99, 1),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn montecarlo_thread_count_invariant() {
        let e = ex1(500);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| winprob_montecarlo(&e, 0.65, 5000, 11).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn limit_examples() {
        let t = classify_limit(1.0, 0.5, 0.6).unwrap();
        assert_eq!(t.regime, Regime::NonJuryThreshold);
        assert!((t.limit_value - 0.9522).abs() < 1e-4);
        assert_eq!(
            classify_limit(1.25, 0.5, 0.3).unwrap(),
            LimitClassification {
                regime: Regime::Jury,
                limit_value: 1.0
            }
        );
        assert_eq!(
            classify_limit(0.75, 0.5, 0.3).unwrap(),
            LimitClassification {
                regime: Regime::StrongNonJury,
                limit_value: 0.5
            }
        );
        assert!(classify_limit(1.0, 0.5, 1.0).is_err());
        assert!(classify_limit(1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn method_parse() {
        assert_eq!("mc".parse::<Method>().unwrap(), Method::MonteCarlo);
        assert!("bogus".parse::<Method>().is_err());
    }
}
