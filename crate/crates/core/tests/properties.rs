//! Randomised invariants over support functions, issues and models.

use jurylab_core::equilibrium::{find_equilibria, DEFAULT_TOL};
use jurylab_core::{Election, Issue, PivotalityModel, SupportFunction};
use proptest::prelude::*;

/// Non-decreasing breakpoints `(0, a), ..., (1, a + sum)` scaled by `scale`.
fn support_points(knots: Vec<f64>, steps: Vec<f64>, atom: f64, scale: f64) -> Vec<(f64, f64)> {
    let mut cs: Vec<f64> = knots;
    cs.sort_by(f64::total_cmp);
    cs.dedup();
    cs.insert(0, 0.0);
    cs.push(1.0);
    let mut s = atom;
    let mut pts = vec![(0.0, s * scale)];
    for (i, &c) in cs.iter().enumerate().skip(1) {
        s += steps[i % steps.len()];
        pts.push((c, s * scale));
    }
    pts
}

prop_compose! {
    fn raw_support()(
        knots in prop::collection::vec(0.01..0.99f64, 0..5),
        steps in prop::collection::vec(0.0..1.0f64, 1..6),
        atom in 0.0..1.0f64,
    ) -> (Vec<f64>, Vec<f64>, f64) {
        (knots, steps, atom)
    }
}

fn total(raw: &(Vec<f64>, Vec<f64>, f64)) -> f64 {
    support_points(raw.0.clone(), raw.1.clone(), raw.2, 1.0)
        .last()
        .unwrap()
        .1
}

prop_compose! {
    /// Issue whose totals sum to one with `A` the majority.
    fn issue(ppm: PivotalityModel)(a in raw_support(), b in raw_support()) -> Issue {
        let (ta, tb) = (total(&a), total(&b));
        let (a, b, ta, scale) = if ta >= tb {
            (a, b, ta, 1.0 / (ta + tb))
        } else {
            (b, a, tb, 1.0 / (ta + tb))
        };
        let mut sa = support_points(a.0, a.1, a.2, scale);
        let mut sb = support_points(b.0, b.1, b.2, scale);
        // absorb rounding so the totals sum to one exactly
        sa.last_mut().unwrap().1 = ta * scale;
        sb.last_mut().unwrap().1 = 1.0 - ta * scale;
        let sb_last = sb.len() - 1;
        if sb[sb_last].1 < sb[sb_last - 1].1 {
            sb[sb_last - 1].1 = sb[sb_last].1;
        }
        Issue::new(
            SupportFunction::new(sa).unwrap(),
            SupportFunction::new(sb).unwrap(),
            ppm,
        )
        .unwrap()
    }
}

fn model() -> impl Strategy<Value = PivotalityModel> {
    prop_oneof![
        Just(PivotalityModel::Binomial),
        Just(PivotalityModel::Poisson),
        (1u64..60).prop_map(|k| PivotalityModel::Sampling { k }),
        (0.05..=1.0f64, 0.25..2.0f64, 0.25..1.0f64)
            .prop_map(|(q, alpha, beta)| PivotalityModel::Polynomial { q, alpha, beta }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eval_is_monotone(iss in issue(PivotalityModel::Binomial)) {
        for s in [iss.s_a(), iss.s_b()] {
            let mut prev = s.eval(0.0).unwrap();
            for i in 1..=1000 {
                let v = s.eval(i as f64 / 1000.0).unwrap();
                prop_assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn turnout_is_monotone(iss in issue(PivotalityModel::Binomial), n in 1u64..1_000_000) {
        let e = Election::new(iss, n).unwrap();
        let mut prev = e.turnout(0.0).unwrap();
        for i in 1..=500 {
            let t = e.turnout(i as f64 / 500.0).unwrap();
            prop_assert!(t >= prev);
            prev = t;
        }
    }

    #[test]
    fn margin_vanishes_at_pivot_points(iss in issue(PivotalityModel::Binomial)) {
        for p in iss.pivot_points() {
            prop_assert!(iss.margin(p).unwrap() <= 1e-9, "pivot {p}");
        }
    }

    #[test]
    fn pivot_prob_is_a_probability(ppm in model(), n in 0.0..1e7f64, m in 0.0..=1.0f64) {
        let p = ppm.pivot_prob(n, m).unwrap();
        prop_assert!((0.0..=1.0).contains(&p), "{p}");
    }

    #[test]
    fn pivot_prob_decreases_in_margin(ppm in model(), n in 1u64..100_000) {
        let mut prev = ppm.pivot_prob(n as f64, 0.0).unwrap();
        for i in 1..=100 {
            let p = ppm.pivot_prob(n as f64, i as f64 / 100.0).unwrap();
            prop_assert!(p <= prev * (1.0 + 1e-12), "m={} {p} > {prev}", i as f64 / 100.0);
            prev = p;
        }
    }

    #[test]
    fn pivot_prob_decreases_in_same_parity_n(ppm in model(), m in 0.0..=1.0f64, n in 1u64..5_000) {
        let a = ppm.pivot_prob(n as f64, m).unwrap();
        let b = ppm.pivot_prob((n + 2) as f64, m).unwrap();
        prop_assert!(b <= a * (1.0 + 1e-12), "{b} > {a}");
    }

    #[test]
    fn sampling_ignores_population(k in 1u64..200, m in 0.0..=1.0f64, n1 in 0.0..1e9f64, n2 in 0.0..1e9f64) {
        let ppm = PivotalityModel::Sampling { k };
        prop_assert_eq!(ppm.pivot_prob(n1, m).unwrap(), ppm.pivot_prob(n2, m).unwrap());
    }

    #[test]
    fn polynomial_saturates_at_cap(
        q in 0.05..=1.0f64,
        alpha in 0.25..2.0f64,
        beta in 0.25..1.0f64,
        n in 0.0..1e6f64,
        m in 0.0..=1.0f64,
    ) {
        let ppm = PivotalityModel::Polynomial { q, alpha, beta };
        if m.powf(alpha) * n.powf(beta) <= 1.0 / q {
            prop_assert_eq!(ppm.pivot_prob(n, m).unwrap(), q);
        }
    }

    #[test]
    fn equilibria_exist_with_small_residual(
        iss in issue(PivotalityModel::Polynomial { q: 1.0, alpha: 1.0, beta: 0.5 }),
        n in 1u64..10_000_000,
    ) {
        let e = Election::new(iss, n).unwrap();
        let eqs = find_equilibria(&e, 1024, DEFAULT_TOL).unwrap();
        prop_assert!(!eqs.is_empty());
        for p in eqs {
            prop_assert!(p.residual <= DEFAULT_TOL, "{p:?}");
        }
    }
}

#[test]
fn binomial_is_monotone_within_parity_on_a_dense_grid() {
    let ppm = PivotalityModel::Binomial;
    for m in (0..=100).map(|i| i as f64 / 100.0) {
        for parity in 0..2u64 {
            let mut prev = f64::INFINITY;
            for n in (1..=1000u64).filter(|n| n % 2 == parity) {
                let p = ppm.pivot_prob(n as f64, m).unwrap();
                assert!(p <= prev * (1.0 + 1e-12), "n={n} m={m}");
                prev = p;
            }
        }
    }
}

#[test]
fn poisson_and_polynomial_are_monotone_over_all_integers() {
    for ppm in [
        PivotalityModel::Poisson,
        PivotalityModel::polynomial(1.0, 1.0, 0.5).unwrap(),
    ] {
        for m in (0..=100).map(|i| i as f64 / 100.0) {
            let mut prev = f64::INFINITY;
            for n in 1..=1000u64 {
                let p = ppm.pivot_prob(n as f64, m).unwrap();
                assert!(p <= prev * (1.0 + 1e-12), "{} n={n} m={m}", ppm.name());
                prev = p;
            }
        }
    }
}
