use jurylab_core::equilibrium::{
    convergence_rate, find_equilibria, population_for_cost, EquilibriumPoint,
};
use jurylab_core::mechanism::{two_round_analytics, MechanismConfig};
use jurylab_core::winprob::{classify_limit, winprob_exact, winprob_montecarlo, winprob_normal};
use jurylab_core::{
    Election, EquilibriumKind, Family, Issue, Method, PivotalityModel, WinProbEstimate,
};
use rayon::prelude::*;

use crate::config::{Command, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::table::{Cell, RowKey, Table};

/// Runs a validated config and returns its result table.
pub fn run(cfg: &ExperimentConfig) -> Result<Table> {
    cfg.validate()?;
    match cfg.command {
        Command::Equilibria => equilibria(cfg),
        Command::Winprob => winprob(cfg),
        Command::SweepAlpha => sweep_alpha(cfg),
        Command::SweepN => sweep_n(cfg),
        Command::Rate => rate(cfg),
        Command::Invert => invert(cfg),
        Command::Mechanism => mechanism(cfg),
        Command::Limit => limit(cfg),
    }
}

fn estimate(
    e: &Election,
    c: f64,
    method: Method,
    cfg: &ExperimentConfig,
) -> Result<WinProbEstimate> {
    Ok(match method {
        Method::ExactTrinomial => winprob_exact(e, c)?,
        Method::NormalApprox => winprob_normal(e, c)?,
        Method::MonteCarlo => winprob_montecarlo(e, c, cfg.reps, cfg.seed)?,
    })
}

/// Equilibria at every configured population size, solved in parallel.
fn solve_all(
    issue: &Issue,
    cfg: &ExperimentConfig,
) -> Result<Vec<(u64, Election, Vec<EquilibriumPoint>)>> {
    cfg.n_list
        .par_iter()
        .map(|&n| {
            let e = Election::new(issue.clone(), n)?;
            let eqs = find_equilibria(&e, cfg.grid_size, cfg.tol)?;
            Ok((n, e, eqs))
        })
        .collect()
}

fn beta_for(cfg: &ExperimentConfig, issue: Option<&Issue>) -> f64 {
    cfg.beta.unwrap_or(match issue.map(|i| *i.ppm()) {
        Some(PivotalityModel::Polynomial { beta, .. }) => beta,
        _ => 0.5,
    })
}

fn q_for(issue: &Issue) -> f64 {
    match *issue.ppm() {
        PivotalityModel::Polynomial { q, .. } => q,
        _ => 1.0,
    }
}

fn equilibria(cfg: &ExperimentConfig) -> Result<Table> {
    let issue = cfg.load_issue()?;
    let mut t = Table::new(
        &[
            "N",
            "c",
            "turnout",
            "active_fraction",
            "margin",
            "residual",
            "kind",
            "pivot",
            "stability",
            "unclassified",
        ],
        cfg.seed,
    );
    for (n, _, eqs) in solve_all(&issue, cfg)? {
        for p in eqs {
            t.push(
                RowKey::new(n as f64, p.c, ""),
                vec![
                    n.into(),
                    p.c.into(),
                    p.turnout.into(),
                    issue.active_fraction(p.c)?.into(),
                    p.margin.into(),
                    p.residual.into(),
                    p.kind.label().into(),
                    p.kind.pivot().into(),
                    p.stability.label().into(),
                    p.unclassified.into(),
                ],
            );
        }
    }
    Ok(t)
}

fn winprob_cells(n: u64, c: f64, est: &WinProbEstimate) -> Vec<Cell> {
    vec![
        n.into(),
        c.into(),
        est.method.label().into(),
        est.value.into(),
        est.value_b().into(),
        est.tie_prob.into(),
        est.stderr.into(),
        est.low_accuracy.into(),
    ]
}

/// Win probabilities at every equilibrium, or at the given costs.
fn winprob(cfg: &ExperimentConfig) -> Result<Table> {
    let issue = cfg.load_issue()?;
    let methods = cfg.methods()?;
    let mut t = Table::new(
        &[
            "kind",
            "N",
            "c",
            "method",
            "wp_A",
            "wp_B",
            "tie_prob",
            "stderr",
            "low_accuracy",
        ],
        cfg.seed,
    );
    let points: Vec<(Election, f64, &'static str)> = if cfg.costs.is_empty() {
        solve_all(&issue, cfg)?
            .into_iter()
            .flat_map(|(_, e, eqs)| {
                eqs.into_iter()
                    .map(move |p| (e.clone(), p.c, p.kind.label()))
                    .collect::<Vec<_>>()
            })
            .collect()
    } else {
        let mut pts = Vec::new();
        for &n in &cfg.n_list {
            let e = Election::new(issue.clone(), n)?;
            for &c in &cfg.costs {
                pts.push((e.clone(), c, "given"));
            }
        }
        pts
    };
    let jobs: Vec<(&Election, f64, &str, Method)> = points
        .iter()
        .flat_map(|(e, c, k)| methods.iter().map(move |&m| (e, *c, *k, m)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(e, c, kind, m)| {
            let est = estimate(e, c, m, cfg)?;
            let mut cells = vec![Cell::from(kind)];
            cells.extend(winprob_cells(e.population, c, &est));
            Ok((RowKey::new(e.population as f64, c, m.label()), cells))
        })
        .collect::<Result<Vec<_>>>()?;
    for (k, cells) in rows {
        t.push(k, cells);
    }
    Ok(t)
}

/// Win probability at the right equilibrium as the margin exponent varies.
fn sweep_alpha(cfg: &ExperimentConfig) -> Result<Table> {
    let base = cfg.load_issue()?;
    let beta = beta_for(cfg, Some(&base));
    let q = q_for(&base);
    let methods = cfg.methods()?;
    let mut t = Table::new(
        &[
            "alpha", "beta", "N", "c", "margin", "method", "wp_A", "wp_B", "tie_prob", "stderr",
        ],
        cfg.seed,
    );
    let jobs: Vec<(f64, u64)> = cfg
        .alpha_list
        .iter()
        .flat_map(|&a| cfg.n_list.iter().map(move |&n| (a, n)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(alpha, n)| {
            let issue = base.with_ppm(PivotalityModel::polynomial(q, alpha, beta)?)?;
            let e = Election::new(issue, n)?;
            let eqs = find_equilibria(&e, cfg.grid_size, cfg.tol)?;
            let plus = eqs
                .iter()
                .find(|p| matches!(p.kind, EquilibriumKind::RightOfPivot(_)));
            let mut rows = Vec::new();
            for &m in &methods {
                let (key_c, cells) = match plus {
                    Some(p) => {
                        let est = estimate(&e, p.c, m, cfg)?;
                        (
                            p.c,
                            vec![
                                p.c.into(),
                                p.margin.into(),
                                m.label().into(),
                                est.value.into(),
                                est.value_b().into(),
                                est.tie_prob.into(),
                                est.stderr.into(),
                            ],
                        )
                    }
                    // no right equilibrium at this alpha
                    None => (
                        f64::INFINITY,
                        vec![
                            Cell::Empty,
                            Cell::Empty,
                            m.label().into(),
                            Cell::Empty,
                            Cell::Empty,
                            Cell::Empty,
                            Cell::Empty,
                        ],
                    ),
                };
                let mut all = vec![alpha.into(), beta.into(), n.into()];
                all.extend(cells);
                rows.push((RowKey::new(n as f64, key_c, m.label()), all));
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    for (k, cells) in rows.into_iter().flatten() {
        t.push(k, cells);
    }
    Ok(t)
}

/// Left and right equilibria across population sizes, with active-voter
/// fractions and each side's favoured candidate's win probability.
fn sweep_n(cfg: &ExperimentConfig) -> Result<Table> {
    let issue = cfg.load_issue()?;
    let methods = cfg.methods()?;
    let mut t = Table::new(
        &[
            "family",
            "N",
            "c",
            "turnout",
            "active_fraction",
            "margin",
            "method",
            "wp_A",
            "wp_B",
            "tie_prob",
            "stderr",
        ],
        cfg.seed,
    );
    let solved = solve_all(&issue, cfg)?;
    let mut jobs = Vec::new();
    for (n, e, eqs) in &solved {
        for p in eqs {
            let family = match p.kind {
                EquilibriumKind::LeftOfPivot(_) => "left",
                EquilibriumKind::RightOfPivot(_) => "right",
                _ => continue,
            };
            for &m in &methods {
                jobs.push((*n, e, p, family, m));
            }
        }
    }
    let rows = jobs
        .par_iter()
        .map(|&(n, e, p, family, m)| {
            let est = estimate(e, p.c, m, cfg)?;
            Ok((
                RowKey::new(n as f64, p.c, m.label()),
                vec![
                    family.into(),
                    n.into(),
                    p.c.into(),
                    p.turnout.into(),
                    issue.active_fraction(p.c)?.into(),
                    p.margin.into(),
                    m.label().into(),
                    est.value.into(),
                    est.value_b().into(),
                    est.tie_prob.into(),
                    est.stderr.into(),
                ],
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    for (k, cells) in rows {
        t.push(k, cells);
    }
    Ok(t)
}

/// Log-log convergence slopes of both non-trivial families, optionally for
/// several margin exponents.
fn rate(cfg: &ExperimentConfig) -> Result<Table> {
    let base = cfg.load_issue()?;
    let mut t = Table::new(
        &[
            "family",
            "alpha",
            "beta",
            "pivot",
            "slope",
            "expected_slope",
            "intercept",
            "points",
            "dropped",
        ],
        cfg.seed,
    );
    let issues: Vec<Issue> = if cfg.alpha_list.is_empty() {
        vec![base.clone()]
    } else {
        let beta = beta_for(cfg, Some(&base));
        let q = q_for(&base);
        cfg.alpha_list
            .iter()
            .map(|&a| Ok(base.with_ppm(PivotalityModel::polynomial(q, a, beta)?)?))
            .collect::<Result<_>>()?
    };
    for issue in &issues {
        let PivotalityModel::Polynomial { alpha, beta, .. } = *issue.ppm() else {
            return Err(CliError::Config(
                "rate needs the polynomial model; set ppm or --alpha".into(),
            ));
        };
        for (family, label) in [(Family::Left, "left"), (Family::Right, "right")] {
            let fit = convergence_rate(issue, family, None, &cfg.n_list, cfg.grid_size, cfg.tol)?;
            t.push(
                RowKey::new(0.0, alpha, label),
                vec![
                    label.into(),
                    alpha.into(),
                    beta.into(),
                    fit.limit.into(),
                    fit.slope.into(),
                    (-beta / alpha).into(),
                    fit.intercept.into(),
                    (fit.used.len() as u64).into(),
                    (fit.dropped as u64).into(),
                ],
            );
        }
    }
    Ok(t)
}

/// Population size that makes each cost an equilibrium.
fn invert(cfg: &ExperimentConfig) -> Result<Table> {
    let base = cfg.load_issue()?;
    let mut t = Table::new(
        &[
            "alpha",
            "beta",
            "c",
            "family",
            "N",
            "turnout",
            "active_fraction",
        ],
        cfg.seed,
    );
    let issues: Vec<Issue> = if cfg.alpha_list.is_empty() {
        vec![base.clone()]
    } else {
        let beta = beta_for(cfg, Some(&base));
        let q = q_for(&base);
        cfg.alpha_list
            .iter()
            .map(|&a| Ok(base.with_ppm(PivotalityModel::polynomial(q, a, beta)?)?))
            .collect::<Result<_>>()?
    };
    let pivots = base.pivot_points();
    for issue in &issues {
        let PivotalityModel::Polynomial { alpha, beta, .. } = *issue.ppm() else {
            return Err(CliError::Config(
                "invert needs the polynomial model; set ppm or --alpha".into(),
            ));
        };
        for &c in &cfg.costs {
            let nearest = pivots
                .iter()
                .copied()
                .min_by(|a, b| (a - c).abs().total_cmp(&(b - c).abs()));
            let (family, label) = match nearest {
                Some(p) if c < p => (Family::Left, "left"),
                _ => (Family::Right, "right"),
            };
            let n = population_for_cost(issue, c, family)?;
            let active = issue.active_fraction(c)?;
            t.push(
                RowKey::new(n, c, ""),
                vec![
                    alpha.into(),
                    beta.into(),
                    c.into(),
                    label.into(),
                    n.into(),
                    (n * active).into(),
                    active.into(),
                ],
            );
        }
    }
    Ok(t)
}

fn mechanism(cfg: &ExperimentConfig) -> Result<Table> {
    let mut t = Table::new(
        &[
            "epsilon",
            "gamma",
            "n",
            "n_round2",
            "p_A_round1",
            "p_B_round1",
            "p_undecided",
            "p_A_total",
            "p_B_total",
            "p_undecided_final",
        ],
        cfg.seed,
    );
    let jobs: Vec<(f64, f64)> = cfg
        .epsilon_list
        .iter()
        .flat_map(|&e| cfg.gamma_list.iter().map(move |&g| (e, g)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(eps, gamma)| {
            let an = two_round_analytics(&MechanismConfig::new(eps, gamma)?)?;
            Ok((
                RowKey::new(an.n_round1 as f64, gamma, ""),
                vec![
                    eps.into(),
                    gamma.into(),
                    an.n_round1.into(),
                    an.n_round2.into(),
                    an.p_a_round1.into(),
                    an.p_b_round1.into(),
                    an.p_undecided.into(),
                    an.p_a_total.into(),
                    an.p_b_total.into(),
                    an.p_undecided_final.into(),
                ],
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    for (k, cells) in rows {
        t.push(k, cells);
    }
    Ok(t)
}

fn limit(cfg: &ExperimentConfig) -> Result<Table> {
    let issue = cfg.maybe_issue()?;
    let beta = beta_for(cfg, issue.as_ref());
    let c_star = match (cfg.c_star, &issue) {
        (Some(c), _) => c,
        (None, Some(i)) => *i.pivot_points().first().ok_or_else(|| {
            CliError::Config("the issue has no pivot point; pass --c-star".into())
        })?,
        (None, None) => return Err(CliError::Config("limit needs --c-star or --issue".into())),
    };
    let mut t = Table::new(&["alpha", "beta", "c_star", "regime", "limit"], cfg.seed);
    for &alpha in &cfg.alpha_list {
        let l = classify_limit(alpha, beta, c_star)?;
        t.push(
            RowKey::new(0.0, c_star, ""),
            vec![
                alpha.into(),
                beta.into(),
                c_star.into(),
                l.regime.label().into(),
                l.limit_value.into(),
            ],
        );
    }
    Ok(t)
}
