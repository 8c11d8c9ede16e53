//! Bundled experiment configs that regenerate the reference data series
//! for the linear example issue.

use jurylab_core::PivotalityModel;

use crate::config::{Command, ExperimentConfig};

/// The linear example issue: `s_A(c) = 0.1 + c/2`, `s_B(c) = 0.4`, polynomial model.
pub const EXAMPLE1_ISSUE: &str = include_str!("../data/example1.json");

const POWERS: [u64; 6] = [1_000, 10_000, 100_000, 1_000_000, 10_000_000, 100_000_000];

fn with_issue(command: Command) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(command);
    cfg.issue = Some(serde_json::from_str(EXAMPLE1_ISSUE).expect("bundled issue is JSON"));
    cfg
}

pub fn bundled_examples() -> Vec<(&'static str, ExperimentConfig)> {
    let mut out = Vec::new();

    let mut c = with_issue(Command::Equilibria);
    c.n_list = vec![10_000, 1_000_000];
    out.push(("example1-equilibria", c));

    let mut c = with_issue(Command::SweepN);
    c.n_list = POWERS.to_vec();
    out.push(("example1-winprob-vs-N", c));

    let mut c = with_issue(Command::SweepAlpha);
    c.n_list = vec![1_000_000];
    c.alpha_list = vec![0.5, 0.625, 0.75, 0.875, 1.0, 1.25];
    out.push(("example1-alpha-sweep", c));

    let mut c = with_issue(Command::Equilibria);
    c.n_list = POWERS.to_vec();
    out.push(("example1-active-voters", c));

    let mut c = with_issue(Command::Invert);
    c.alpha_list = vec![0.5, 1.0, 1.5];
    c.costs = vec![
        0.60001, 0.6001, 0.601, 0.603, 0.605, 0.61, 0.62, 0.63, 0.64, 0.65, 0.7, 0.75, 0.8, 0.85,
        0.9, 0.95, 1.0,
    ];
    out.push(("example1-population-for-cost", c));

    let mut c = with_issue(Command::Rate);
    c.n_list = POWERS.to_vec();
    c.alpha_list = vec![1.0, 2.0];
    out.push(("example1-rate", c));

    let mut c = with_issue(Command::Limit);
    c.alpha_list = vec![0.75, 1.0, 1.25];
    out.push(("example1-limit", c));

    let mut c = ExperimentConfig::new(Command::Mechanism);
    c.epsilon_list = vec![0.01];
    c.gamma_list = (1..=9).map(|i| i as f64 / 10.0).collect();
    out.push(("mechanism-supermajority", c));

    for (name, ppm) in [
        ("preset-binomial", PivotalityModel::Binomial),
        ("preset-poisson", PivotalityModel::Poisson),
        (
            "preset-polynomial",
            PivotalityModel::Polynomial {
                q: 1.0,
                alpha: 1.0,
                beta: 0.5,
            },
        ),
    ] {
        let mut c = with_issue(Command::Equilibria);
        c.ppm = Some(ppm);
        c.n_list = vec![10_000, 1_000_000];
        out.push((name, c));
    }
    out
}

pub fn bundled_example(name: &str) -> Option<ExperimentConfig> {
    bundled_examples()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, c)| c)
}
