//! Equilibrium families of the linear example across population sizes.

use jurylab_core::equilibrium::{
    equilibrium_series, find_equilibria, trivial_band, DEFAULT_GRID, DEFAULT_TOL,
};
use jurylab_core::{Election, EquilibriumKind, EquilibriumPoint, Family, Issue, PivotalityModel};

const POWERS: [u64; 6] = [1_000, 10_000, 100_000, 1_000_000, 10_000_000, 100_000_000];

fn linear_example() -> Issue {
    Issue::example_one(PivotalityModel::polynomial(1.0, 1.0, 0.5).unwrap())
}

fn solve(issue: &Issue, n: u64) -> Vec<EquilibriumPoint> {
    find_equilibria(
        &Election::new(issue.clone(), n).unwrap(),
        DEFAULT_GRID,
        DEFAULT_TOL,
    )
    .unwrap()
}

#[test]
fn both_families_approach_the_pivot() {
    let issue = linear_example();
    let right = equilibrium_series(
        &issue,
        Family::Right,
        None,
        &POWERS,
        DEFAULT_GRID,
        DEFAULT_TOL,
    )
    .unwrap();
    let left = equilibrium_series(
        &issue,
        Family::Left,
        None,
        &POWERS,
        DEFAULT_GRID,
        DEFAULT_TOL,
    )
    .unwrap();
    assert!(right.missing.is_empty() && left.missing.is_empty());
    assert!((right.limit - 0.6).abs() < 1e-12);
    for (n, p) in &right.points {
        assert!(p.c - 0.6 <= 3.2 / (*n as f64).sqrt(), "N={n} c+={}", p.c);
    }
    let gaps: Vec<f64> = left.points.iter().map(|(_, p)| 0.6 - p.c).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[gaps.len() - 1] < 1e-3);
    // one kind per family, converging monotonically
    for series in [&right, &left] {
        let first = series.points[0].1.kind;
        assert!(series.points.iter().all(|(_, p)| p.kind == first));
        let dist: Vec<f64> = series
            .points
            .iter()
            .map(|(_, p)| (p.c - 0.6).abs())
            .collect();
        assert!(dist.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn left_margin_exceeds_right_margin() {
    let issue = linear_example();
    for n in POWERS {
        let eqs = solve(&issue, n);
        let m = |want: fn(&EquilibriumKind) -> bool| {
            eqs.iter()
                .find(|p| want(&p.kind))
                .map(|p| p.margin)
                .unwrap()
        };
        let minus = m(|k| matches!(k, EquilibriumKind::LeftOfPivot(_)));
        let plus = m(|k| matches!(k, EquilibriumKind::RightOfPivot(_)));
        assert!(minus > plus, "N={n}: {minus} <= {plus}");
    }
}

#[test]
fn weak_vanishing_keeps_a_trivial_equilibrium() {
    let issue = linear_example();
    let band = trivial_band(&issue);
    for n in POWERS {
        let eqs = solve(&issue, n);
        assert!(eqs.iter().any(|p| p.c < band), "N={n}");
        assert_eq!(eqs[0].kind, EquilibriumKind::Trivial);
    }
}

#[test]
fn strong_vanishing_keeps_only_trivial_equilibria() {
    for ppm in [PivotalityModel::Binomial, PivotalityModel::Poisson] {
        let issue = Issue::example_one(ppm);
        let band = trivial_band(&issue);
        for n in [100u64, 1_000, 100_000, 10_000_000] {
            let eqs = solve(&issue, n);
            assert!(!eqs.is_empty());
            assert!(
                eqs.iter().all(|p| p.c < band),
                "{} N={n}: {eqs:?}",
                ppm.name()
            );
        }
    }
}

#[test]
fn residuals_are_within_tolerance() {
    for ppm in [
        PivotalityModel::Binomial,
        PivotalityModel::Poisson,
        PivotalityModel::Sampling { k: 25 },
        PivotalityModel::polynomial(0.5, 1.5, 0.5).unwrap(),
    ] {
        let issue = Issue::example_one(ppm);
        for n in [10u64, 1_000, 1_000_000] {
            for p in solve(&issue, n) {
                let f = ppm.pivot_prob(p.turnout, p.margin).unwrap();
                assert!(
                    (p.c - f).abs() <= DEFAULT_TOL,
                    "{} N={n}: {p:?}",
                    ppm.name()
                );
            }
        }
    }
}
