//! Perceived-pivotality models `p(n, m)`: a voter's subjective probability of
//! casting the deciding vote, given the expected number of active voters `n`
//! and the expected margin `m`.

use libm::lgamma as ln_gamma;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numeric::{binomial_ln_pmf, PROB_FLOOR};

/// Relative size below which a Poisson series term ends the summation.
const POISSON_TRUNCATION: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PivotalityModel {
    /// Probability of an exact tie among `n` Binomial voters.
    Binomial,
    /// Probability of a tie between two independent Poisson vote counts.
    Poisson,
    /// Tie probability in a fixed-size sample of `k` voters.
    Sampling { k: u64 },
    /// `min{q, 1 / (m^alpha n^beta)}`.
    Polynomial {
        #[serde(default = "one")]
        q: f64,
        #[serde(default = "one")]
        alpha: f64,
        #[serde(default = "half")]
        beta: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

/// How `p(n, m)` behaves as `n` grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Vanishing {
    /// `p(n, m) -> 0` for every `m >= 0`.
    Strong,
    /// `p(n, m) -> 0` for every `m > 0` only.
    Weak,
    None,
}

impl PivotalityModel {
    pub fn polynomial(q: f64, alpha: f64, beta: f64) -> Result<Self> {
        let m = Self::Polynomial { q, alpha, beta };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Sampling { k: 0 } => Err(Error::Config("sampling model needs k >= 1".into())),
            Self::Polynomial { q, alpha, beta } => {
                if !(q > 0.0 && q <= 1.0) {
                    return Err(Error::Config(format!("q must lie in (0, 1], got {q}")));
                }
                if !(alpha > 0.0 && alpha.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::Config(format!(
                        "alpha and beta must be positive, got alpha={alpha}, beta={beta}"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Binomial => "binomial",
            Self::Poisson => "poisson",
            Self::Sampling { .. } => "sampling",
            Self::Polynomial { .. } => "polynomial",
        }
    }

    /// `p(n, m)` with argument checking.
    pub fn pivot_prob(&self, n: f64, m: f64) -> Result<f64> {
        if !(n >= 0.0) || !n.is_finite() {
            return domain(format!("expected turnout must be non-negative, got {n}"));
        }
        if !(0.0..=1.0).contains(&m) {
            return domain(format!("margin must lie in [0, 1], got {m}"));
        }
        Ok(self.prob(n, m))
    }

    /// `p(n, m)` for arguments already known to be in range.
    pub(crate) fn prob(&self, n: f64, m: f64) -> f64 {
        let p = match *self {
            Self::Binomial => binomial_tie(n.round().max(1.0) as u64, m),
            Self::Poisson => poisson_tie(n, m),
            Self::Sampling { k } => binomial_tie(k, m),
            Self::Polynomial { q, alpha, beta } => {
                if m == 0.0 || n == 0.0 {
                    q
                } else {
                    q.min(1.0 / (m.powf(alpha) * n.powf(beta)))
                }
            }
        };
        if p < PROB_FLOOR {
            0.0
        } else {
            p.min(1.0)
        }
    }

    pub fn vanishing(&self) -> Vanishing {
        match self {
            Self::Binomial | Self::Poisson => Vanishing::Strong,
            Self::Polynomial { .. } => Vanishing::Weak,
            Self::Sampling { .. } => Vanishing::None,
        }
    }

    /// Largest `q` with `p(n, 0) >= q` for all `n >= 1`.
    pub fn tie_sensitivity(&self) -> f64 {
        match *self {
            Self::Binomial | Self::Poisson => 0.0,
            Self::Sampling { k } => binomial_tie(k, 0.0),
            Self::Polynomial { q, .. } => q,
        }
    }
}

/// `Pr(X = floor(n/2))` for `X ~ Bin(n, (1+m)/2)`.
fn binomial_tie(n: u64, m: f64) -> f64 {
    let k = n / 2;
    let ln_p = m.ln_1p() - std::f64::consts::LN_2;
    let ln_q = (-m).ln_1p() - std::f64::consts::LN_2;
    binomial_ln_pmf(n, k, ln_p, ln_q).exp()
}

/// `Pr(X_A = X_B)` for independent Poissons with rates `(1+m)n/2` and
/// `(1-m)n/2`, i.e. `e^{-n} sum_j (l_A l_B)^j / (j!)^2`.
///
/// Terms are unimodal in `j`, so the series is summed outward from its
/// mode and each tail stops once a term drops below the truncation ratio.
fn poisson_tie(n: f64, m: f64) -> f64 {
    let product = 0.25 * n * n * (1.0 - m) * (1.0 + m);
    if product <= 0.0 {
        return (-n).exp();
    }
    let ln_product = product.ln();
    let mode = product.sqrt().floor();
    let ln_peak = mode * ln_product - 2.0 * ln_gamma(mode + 1.0) - n;

    // sum of t_j / t_mode
    let mut rel = 1.0;
    let mut term = 1.0;
    let mut j = mode;
    loop {
        term *= product / ((j + 1.0) * (j + 1.0));
        j += 1.0;
        rel += term;
        if term < POISSON_TRUNCATION * rel {
            break;
        }
    }
    let mut term = 1.0;
    let mut j = mode;
    while j > 0.0 {
        term *= j * j / product;
        j -= 1.0;
        rel += term;
        if term < POISSON_TRUNCATION * rel {
            break;
        }
    }
    (ln_peak + rel.ln()).exp()
}
