//! Sortition: elect by a random sample small enough that every sampled voter
//! has perceived pivotality 1 and therefore votes.
//!
//! Under the polynomial model with `q = 1, alpha = 1, beta = 1/2`, a sample
//! of `n <= 1/eps^2` voters facing expected margin `eps` has
//! `p(n, eps) = 1 / (eps sqrt(n)) >= 1`, so participation is complete and
//! the vote is an unbiased draw from the population's preferences.
//!
//! The two-round protocol first samples `n(eps)` voters and requires a
//! supermajority margin `eps' = gamma eps`; if neither side reaches it, a
//! second round with `n(eps')` voters is decided by simple majority.

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, parameter, Error, Result};
use crate::numeric::{binomial_ln_pmf, binomial_pmf_vec, replicate_rng};
use crate::support::Issue;
use crate::winprob::MIN_REPLICATES;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismConfig {
    /// Expected full-participation margin `s_A(1) - s_B(1)`.
    pub epsilon: f64,
    /// Supermajority threshold as a fraction of `epsilon`.
    pub gamma: f64,
    /// Round sample sizes down to odd numbers.
    pub force_odd: bool,
}

impl MechanismConfig {
    pub fn new(epsilon: f64, gamma: f64) -> Result<Self> {
        let cfg = Self {
            epsilon,
            gamma,
            force_odd: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return domain(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if !(self.gamma > 0.0) {
            return parameter(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if self.gamma >= 1.0 {
            return parameter(format!(
                "supermajority margin gamma*epsilon must be below epsilon (gamma = {}); \
                 the second round would not be larger than the first",
                self.gamma
            ));
        }
        Ok(())
    }

    /// Supermajority margin `eps' = gamma eps`.
    pub fn supermajority(&self) -> f64 {
        self.gamma * self.epsilon
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Winner {
    A,
    B,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub round_index: u8,
    pub sample_size: u64,
    pub votes_a: u64,
    pub winner: Winner,
}

/// Largest sample `floor(1/eps^2)` (made odd on request) in which everyone
/// perceives full pivotality.
pub fn sample_size(epsilon: f64, force_odd: bool) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return domain(format!("epsilon must lie in (0, 1), got {epsilon}"));
    }
    // 1/eps^2 can land a rounding error below an integer (eps = 0.2)
    let mut n = (1.0 / (epsilon * epsilon) * (1.0 + 1e-12)).floor() as u64;
    if force_odd && n.is_multiple_of(2) {
        n = n.saturating_sub(1);
    }
    if n < 1 {
        return domain(format!("epsilon {epsilon} leaves an empty sample"));
    }
    Ok(n)
}

/// Exact `Pr(X > n/2)` for `X ~ Bin(n, (1+eps)/2)`.
pub fn single_round_winprob(epsilon: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return parameter("sample size must be at least 1");
    }
    if !(-1.0..=1.0).contains(&epsilon) {
        return domain(format!("epsilon must lie in [-1, 1], got {epsilon}"));
    }
    let ln_p = epsilon.ln_1p() - std::f64::consts::LN_2;
    let ln_q = (-epsilon).ln_1p() - std::f64::consts::LN_2;
    let total: f64 = (n / 2 + 1..=n)
        .map(|k| binomial_ln_pmf(n, k, ln_p, ln_q).exp())
        .sum();
    Ok(total.min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoRoundAnalytics {
    pub n_round1: u64,
    pub n_round2: u64,
    pub p_a_round1: f64,
    pub p_b_round1: f64,
    /// Probability that round 1 is inconclusive.
    pub p_undecided: f64,
    pub p_a_total: f64,
    pub p_b_total: f64,
    /// Probability that round 2 also ties; only possible for an even second sample.
    pub p_undecided_final: f64,
}

/// Round-1 decision on `votes_a` out of `n`.
fn round_one(votes_a: u64, n: u64, threshold: f64) -> Winner {
    let diff = 2.0 * votes_a as f64 - n as f64;
    if diff >= threshold * n as f64 {
        Winner::A
    } else if -diff >= threshold * n as f64 {
        Winner::B
    } else {
        Winner::Undecided
    }
}

fn round_two(votes_a: u64, n: u64) -> Winner {
    match (2 * votes_a).cmp(&n) {
        std::cmp::Ordering::Greater => Winner::A,
        std::cmp::Ordering::Less => Winner::B,
        std::cmp::Ordering::Equal => Winner::Undecided,
    }
}

/// Exact outcome probabilities of the two-round protocol when every
/// sampled voter votes `A` with probability `(1 + eps)/2`.
pub fn two_round_analytics(cfg: &MechanismConfig) -> Result<TwoRoundAnalytics> {
    cfg.validate()?;
    let p = 0.5 * (1.0 + cfg.epsilon);
    let n1 = sample_size(cfg.epsilon, cfg.force_odd)?;
    let n2 = sample_size(cfg.supermajority(), cfg.force_odd)?;

    let (mut a1, mut b1, mut u1) = (0.0, 0.0, 0.0);
    for (k, w) in binomial_pmf_vec(n1, p).into_iter().enumerate() {
        match round_one(k as u64, n1, cfg.supermajority()) {
            Winner::A => a1 += w,
            Winner::B => b1 += w,
            Winner::Undecided => u1 += w,
        }
    }
    let (mut a2, mut b2, mut t2) = (0.0, 0.0, 0.0);
    for (k, w) in binomial_pmf_vec(n2, p).into_iter().enumerate() {
        match round_two(k as u64, n2) {
            Winner::A => a2 += w,
            Winner::B => b2 += w,
            Winner::Undecided => t2 += w,
        }
    }
    // renormalise away the rounding left by the pmf sums
    let s1 = a1 + b1 + u1;
    let s2 = a2 + b2 + t2;
    let (a1, b1, u1) = (a1 / s1, b1 / s1, u1 / s1);
    let (a2, b2, t2) = (a2 / s2, b2 / s2, t2 / s2);
    Ok(TwoRoundAnalytics {
        n_round1: n1,
        n_round2: n2,
        p_a_round1: a1,
        p_b_round1: b1,
        p_undecided: u1,
        p_a_total: a1 + u1 * a2,
        p_b_total: b1 + u1 * b2,
        p_undecided_final: u1 * t2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismSimulation {
    pub replicates: u64,
    pub freq_a: f64,
    pub freq_b: f64,
    pub freq_two_rounds: f64,
    pub freq_undecided: f64,
    pub mean_rounds: f64,
}

impl MechanismSimulation {
    /// Binomial standard error of a frequency `p` over the replicates.
    pub fn stderr(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.replicates as f64).sqrt()
    }
}

/// Plays one election of the protocol with the given random source.
pub fn play_once<R: rand::Rng + ?Sized>(
    cfg: &MechanismConfig,
    share_a: f64,
    rng: &mut R,
) -> Result<[RoundOutcome; 2]> {
    let n1 = sample_size(cfg.epsilon, cfg.force_odd)?;
    let n2 = sample_size(cfg.supermajority(), cfg.force_odd)?;
    let draw = |n: u64, rng: &mut R| -> Result<u64> {
        Ok(Binomial::new(n, share_a)
            .map_err(|e| Error::Domain(e.to_string()))?
            .sample(rng))
    };
    let v1 = draw(n1, rng)?;
    let first = RoundOutcome {
        round_index: 1,
        sample_size: n1,
        votes_a: v1,
        winner: round_one(v1, n1, cfg.supermajority()),
    };
    let second = if first.winner == Winner::Undecided {
        let v2 = draw(n2, rng)?;
        RoundOutcome {
            round_index: 2,
            sample_size: n2,
            votes_a: v2,
            winner: round_two(v2, n2),
        }
    } else {
        RoundOutcome {
            round_index: 2,
            sample_size: 0,
            votes_a: 0,
            winner: first.winner,
        }
    };
    Ok([first, second])
}

/// Monte Carlo run of the two-round protocol on an electorate. Sample sizes
/// come from `cfg`; every sampled voter votes for `A` with probability
/// `s_A(1)`.
pub fn simulate_mechanism(
    cfg: &MechanismConfig,
    issue: &Issue,
    replicates: u64,
    seed: u64,
) -> Result<MechanismSimulation> {
    cfg.validate()?;
    if issue.full_margin() <= 0.0 {
        return domain("the electorate has no full-participation margin to size the sample");
    }
    if replicates < MIN_REPLICATES {
        return parameter(format!(
            "at least {MIN_REPLICATES} replicates are required, got {replicates}"
        ));
    }
    let share_a = issue.s_a().total();
    // [A wins, B wins, went to round two, undecided after round two]
    let counts = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            let [first, second] = play_once(cfg, share_a, &mut rng)?;
            let mut c = [0u64; 4];
            match second.winner {
                Winner::A => c[0] = 1,
                Winner::B => c[1] = 1,
                Winner::Undecided => c[3] = 1,
            }
            if first.winner == Winner::Undecided {
                c[2] = 1;
            }
            Ok(c)
        })
        .try_reduce(
            || [0u64; 4],
            |x, y| Ok([x[0] + y[0], x[1] + y[1], x[2] + y[2], x[3] + y[3]]),
        )?;
    let reps = replicates as f64;
    let two = counts[2] as f64 / reps;
    Ok(MechanismSimulation {
        replicates,
        freq_a: counts[0] as f64 / reps,
        freq_b: counts[1] as f64 / reps,
        freq_two_rounds: two,
        freq_undecided: counts[3] as f64 / reps,
        mean_rounds: 1.0 + two,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::normal_cdf;
    use crate::pivotality::PivotalityModel;
    use crate::support::SupportFunction;

    #[test]
    fn sample_size_examples() {
        assert_eq!(sample_size(0.2, false).unwrap(), 25);
        assert_eq!(sample_size(0.2, true).unwrap(), 25);
        assert_eq!(sample_size(0.1, true).unwrap(), 99);
        assert_eq!(sample_size(0.1, false).unwrap(), 100);
        assert!(sample_size(0.0, true).is_err());
        assert!(sample_size(1.0, true).is_err());
    }

    #[test]
    fn sampled_voters_all_feel_pivotal() {
        let ppm = PivotalityModel::polynomial(1.0, 1.0, 0.5).unwrap();
        for eps in [0.2, 0.1, 0.05] {
            let n = sample_size(eps, true).unwrap();
            assert_eq!(ppm.pivot_prob(n as f64, eps).unwrap(), 1.0);
        }
    }

    #[test]
    fn single_round_against_direct_sum() {
        // direct pmf sum over the 26 outcomes with plain products
        let (eps, n) = (0.2f64, 25u64);
        let p = 0.5 * (1.0 + eps);
        let mut choose = 1.0f64;
        let mut oracle = 0.0;
        for k in 0..=n {
            if k > 0 {
                choose *= (n - k + 1) as f64 / k as f64;
            }
            if 2 * k > n {
                oracle += choose * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
            }
        }
        let got = single_round_winprob(eps, n).unwrap();
        assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
        assert!((single_round_winprob(0.3, 1).unwrap() - 0.65).abs() < 1e-15);
    }

    #[test]
    fn single_round_small_margin_limit() {
        let v = single_round_winprob(0.01, 9999).unwrap();
        assert!((v - 0.8413).abs() < 5e-3, "{v}");
    }

    #[test]
    fn two_round_composition() {
        let cfg = MechanismConfig::new(0.01, 0.3).unwrap();
        let t = two_round_analytics(&cfg).unwrap();
        assert_eq!((t.n_round1, t.n_round2), (9999, 111_111));
        assert!((t.p_a_round1 - normal_cdf(0.7)).abs() < 5e-3);
        let total = t.p_a_total + t.p_b_total + t.p_undecided_final;
        assert!((total - 1.0).abs() < 1e-12);
        assert!(t.p_a_total > single_round_winprob(0.01, t.n_round1).unwrap());
    }

    #[test]
    fn undecided_band_near_full_supermajority() {
        // gamma just below 1: undecided iff |2X - n| < eps' n, by direct pmf sum
        let cfg = MechanismConfig::new(0.2, 0.999_999).unwrap();
        let t = two_round_analytics(&cfg).unwrap();
        let n = t.n_round1;
        let pmf = binomial_pmf_vec(n, 0.6);
        let oracle: f64 = (0..=n)
            .filter(|&k| ((2 * k) as f64 - n as f64).abs() < cfg.supermajority() * n as f64)
            .map(|k| pmf[k as usize])
            .sum();
        assert!((t.p_undecided - oracle).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(matches!(
            MechanismConfig::new(0.1, 1.0),
            Err(Error::Parameter(_))
        ));
        assert!(MechanismConfig::new(0.0, 0.5).is_err());
        assert!(MechanismConfig::new(0.1, 0.0).is_err());
    }

    #[test]
    fn unanimous_electorate() {
        let issue = Issue::new(
            SupportFunction::linear(0.2, 1.0).unwrap(),
            SupportFunction::constant(0.0).unwrap(),
            PivotalityModel::polynomial(1.0, 1.0, 0.5).unwrap(),
        )
        .unwrap();
        let cfg = MechanismConfig::new(0.2, 0.5).unwrap();
        let sim = simulate_mechanism(&cfg, &issue, 1000, 5).unwrap();
        assert_eq!(sim.freq_a, 1.0);
        assert_eq!(sim.mean_rounds, 1.0);
    }

    #[test]
    fn simulation_deterministic() {
        let issue = Issue::example_one(PivotalityModel::polynomial(1.0, 1.0, 0.5).unwrap());
        let cfg = MechanismConfig::new(0.2, 0.5).unwrap();
        let a = simulate_mechanism(&cfg, &issue, 1000, 42).unwrap();
        assert_eq!(a, simulate_mechanism(&cfg, &issue, 1000, 42).unwrap());
        assert!(simulate_mechanism(&cfg, &issue, 10, 42).is_err());
    }

    #[test]
    fn simulation_rejects_tied_electorate() {
        let s = SupportFunction::linear(0.1, 0.5).unwrap();
        let issue = Issue::new(s.clone(), s, PivotalityModel::Binomial).unwrap();
        let cfg = MechanismConfig::new(0.2, 0.5).unwrap();
        assert!(matches!(
            simulate_mechanism(&cfg, &issue, 1000, 1),
            Err(Error::Domain(_))
        ));
    }
}
