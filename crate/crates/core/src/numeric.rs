//! Small numerical helpers shared by the pivotality models and the estimators.

use libm::erfc;
use libm::lgamma as ln_gamma;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Probabilities below this are reported as exactly zero.
pub const PROB_FLOOR: f64 = 1e-300;

/// Standard normal CDF, via the complementary error function so the
/// upper tail keeps full relative precision.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `ln(n choose k)` for `k <= n`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `ln Pr(X = k)` for `X ~ Bin(n, p)`, taking `ln p` and `ln(1-p)` directly
/// so callers can form them without cancellation.
pub fn binomial_ln_pmf(n: u64, k: u64, ln_p: f64, ln_q: f64) -> f64 {
    let mut acc = ln_choose(n, k);
    if k > 0 {
        acc += k as f64 * ln_p;
    }
    if n > k {
        acc += (n - k) as f64 * ln_q;
    }
    acc
}

/// Full pmf of `Bin(n, p)` as a vector of length `n + 1`.
///
/// Built outward from the mode with the ratio recurrence, so the cost is
/// `O(n)` and no term underflows before it is genuinely negligible.
pub fn binomial_pmf_vec(n: u64, p: f64) -> Vec<f64> {
    let len = n as usize + 1;
    let mut pmf = vec![0.0; len];
    if p <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if p >= 1.0 {
        pmf[len - 1] = 1.0;
        return pmf;
    }
    let q = 1.0 - p;
    let (ln_p, ln_q) = (p.ln(), q.ln());
    let mode = (((n + 1) as f64) * p).floor().min(n as f64) as u64;
    let ln_mode = binomial_ln_pmf(n, mode, ln_p, ln_q);
    pmf[mode as usize] = ln_mode.exp();
    let ratio = p / q;
    // upward: P(k+1) = P(k) * (n-k)/(k+1) * p/q
    for k in mode..n {
        let next = pmf[k as usize] * ((n - k) as f64 / (k + 1) as f64) * ratio;
        if next < PROB_FLOOR {
            break;
        }
        pmf[k as usize + 1] = next;
    }
    // downward: P(k-1) = P(k) * k/(n-k+1) * q/p
    for k in (1..=mode).rev() {
        let prev = pmf[k as usize] * (k as f64 / (n - k + 1) as f64) / ratio;
        if prev < PROB_FLOOR {
            break;
        }
        pmf[k as usize - 1] = prev;
    }
    pmf
}

/// Per-replicate generator: stream `replicate` of the ChaCha keystream
/// keyed by `seed`. Replicates never share state, so any partition of the
/// replicates across workers draws the same numbers.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
