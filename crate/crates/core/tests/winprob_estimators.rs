//! Agreement between the three win-probability estimators and their trends.

use jurylab_core::equilibrium::{find_equilibria, DEFAULT_GRID, DEFAULT_TOL};
use jurylab_core::winprob::{
    classify_limit, winprob_exact, winprob_montecarlo, winprob_normal, Regime,
};
use jurylab_core::{Election, EquilibriumKind, Issue, Method, PivotalityModel};

fn linear_example() -> Issue {
    Issue::example_one(PivotalityModel::polynomial(1.0, 1.0, 0.5).unwrap())
}

fn c_grid() -> impl Iterator<Item = f64> {
    (0..=20).map(|i| i as f64 / 20.0)
}

#[test]
fn monte_carlo_brackets_exact() {
    let issue = linear_example();
    for n in [1u64, 2, 3, 7, 20, 51, 100, 199, 200] {
        let e = Election::new(issue.clone(), n).unwrap();
        for c in c_grid() {
            let exact = winprob_exact(&e, c).unwrap().value;
            let mc = winprob_montecarlo(&e, c, 100_000, n * 100 + (c * 20.0) as u64).unwrap();
            let band = 4.0 * mc.stderr;
            assert!(
                (mc.value - exact).abs() <= band,
                "N={n} c={c}: mc {} exact {exact}",
                mc.value
            );
        }
    }
}

#[test]
fn normal_tracks_exact_for_moderate_margins() {
    let issue = linear_example();
    for n in [500u64, 1_000, 2_500, 5_000] {
        let e = Election::new(issue.clone(), n).unwrap();
        for c in (0..=100).map(|i| i as f64 / 100.0) {
            let turnout = e.turnout(c).unwrap();
            if e.margin(c).unwrap() * turnout.sqrt() > 5.0 {
                continue;
            }
            let exact = winprob_exact(&e, c).unwrap().value;
            let normal = winprob_normal(&e, c).unwrap().value;
            assert!(
                (exact - normal).abs() <= 0.01,
                "N={n} c={c}: {exact} vs {normal}"
            );
        }
    }
}

#[test]
fn leader_normal_winprob_is_non_decreasing_in_population() {
    let issue = linear_example();
    for c in [0.0, 0.3, 0.59, 0.61, 0.8, 1.0] {
        let mut prev = 0.0;
        for k in 0..=24 {
            let n = 10f64.powf(1.0 + k as f64 * 0.25).round() as u64;
            let est = winprob_normal(&Election::new(issue.clone(), n).unwrap(), c).unwrap();
            // the trend belongs to whichever candidate leads at c
            let v = if issue.signed_margin(c).unwrap() > 0.0 {
                est.value
            } else {
                est.value_b()
            };
            assert!(v >= prev, "c={c} N={n}: {v} < {prev}");
            prev = v;
        }
    }
}

#[test]
fn equilibrium_win_probabilities_trend_and_converge() {
    let issue = linear_example();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for k in 3..=8 {
        let e = Election::new(issue.clone(), 10u64.pow(k)).unwrap();
        let eqs = find_equilibria(&e, DEFAULT_GRID, DEFAULT_TOL).unwrap();
        for p in eqs {
            match p.kind {
                EquilibriumKind::RightOfPivot(_) => a.push(winprob_normal(&e, p.c).unwrap().value),
                EquilibriumKind::LeftOfPivot(_) => {
                    b.push(winprob_normal(&e, p.c).unwrap().value_b())
                }
                _ => {}
            }
        }
    }
    assert!(a.windows(2).all(|w| w[1] > w[0]), "{a:?}");
    assert!(b.windows(2).all(|w| w[1] < w[0]), "{b:?}");
    assert!(a.iter().zip(&b).all(|(x, y)| y > x));
    let limit = classify_limit(1.0, 0.5, 0.6).unwrap().limit_value;
    assert!((a[a.len() - 1] - limit).abs() <= 0.01);
}

#[test]
fn estimate_invariants() {
    let issue = linear_example();
    let e = Election::new(issue, 150).unwrap();
    for c in c_grid() {
        for est in [
            winprob_exact(&e, c).unwrap(),
            winprob_normal(&e, c).unwrap(),
            winprob_montecarlo(&e, c, 1_000, 1).unwrap(),
        ] {
            assert!(est.value + est.tie_prob <= 1.0 + 1e-12);
            assert_eq!(
                est.stderr > 0.0,
                est.method == Method::MonteCarlo,
                "{est:?}"
            );
        }
    }
}

#[test]
fn limit_regimes_match_their_values() {
    for alpha in [0.25, 0.5, 0.75, 0.99, 1.0, 1.01, 1.5, 3.0] {
        let l = classify_limit(alpha, 0.5, 0.6).unwrap();
        assert_eq!(l.regime == Regime::Jury, l.limit_value == 1.0);
        assert_eq!(l.regime == Regime::StrongNonJury, l.limit_value == 0.5);
    }
}
