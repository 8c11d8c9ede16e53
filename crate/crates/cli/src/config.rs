use std::path::PathBuf;

use jurylab_core::equilibrium::{DEFAULT_GRID, DEFAULT_TOL, MIN_GRID};
use jurylab_core::winprob::MIN_REPLICATES;
use jurylab_core::{Issue, Method, PivotalityModel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Equilibria,
    Winprob,
    SweepAlpha,
    SweepN,
    Rate,
    Invert,
    Mechanism,
    Limit,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Equilibria => "equilibria",
            Self::Winprob => "winprob",
            Self::SweepAlpha => "sweep-alpha",
            Self::SweepN => "sweep-n",
            Self::Rate => "rate",
            Self::Invert => "invert",
            Self::Mechanism => "mechanism",
            Self::Limit => "limit",
        }
    }

    fn needs_populations(&self) -> bool {
        matches!(
            self,
            Self::Equilibria | Self::Winprob | Self::SweepAlpha | Self::SweepN | Self::Rate
        )
    }

    fn needs_issue(&self) -> bool {
        !matches!(self, Self::Mechanism | Self::Limit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Everything one run needs. Loaded from JSON (`jurylab run --config`) or
/// assembled from command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    /// Path to an issue JSON file; relative paths resolve against the
    /// working directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub issue_file: Option<PathBuf>,
    /// Inline issue in the same schema as an issue file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub issue: Option<serde_json::Value>,
    /// Replaces the issue's pivotality model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ppm: Option<PivotalityModel>,
    #[serde(rename = "N_list", default)]
    pub n_list: Vec<u64>,
    #[serde(default)]
    pub alpha_list: Vec<f64>,
    /// Turnout exponent for `sweep-alpha`, `invert` and `limit`; defaults to
    /// the issue's polynomial beta, else 1/2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Pivot point for `limit`; defaults to the issue's smallest one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_star: Option<f64>,
    /// Costs for `invert`, or evaluation points for `winprob`.
    #[serde(default)]
    pub costs: Vec<f64>,
    #[serde(default)]
    pub epsilon_list: Vec<f64>,
    #[serde(default)]
    pub gamma_list: Vec<f64>,
    #[serde(default = "default_methods")]
    pub methods: Vec<String>,
    #[serde(default = "default_reps")]
    pub reps: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_grid")]
    pub grid_size: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

fn default_methods() -> Vec<String> {
    vec!["normal".into()]
}

fn default_reps() -> u64 {
    100_000
}

fn default_seed() -> u64 {
    42
}

fn default_grid() -> usize {
    DEFAULT_GRID
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl ExperimentConfig {
    /// A config with defaults for everything but the command.
    pub fn new(command: Command) -> Self {
        Self {
            command,
            issue_file: None,
            issue: None,
            ppm: None,
            n_list: Vec::new(),
            alpha_list: Vec::new(),
            beta: None,
            c_star: None,
            costs: Vec::new(),
            epsilon_list: Vec::new(),
            gamma_list: Vec::new(),
            methods: default_methods(),
            reps: default_reps(),
            seed: default_seed(),
            grid_size: default_grid(),
            tol: default_tol(),
            output: None,
            format: Format::Csv,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("config JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn methods(&self) -> Result<Vec<Method>> {
        let mut out = Vec::new();
        for m in &self.methods {
            let parsed: Method = m.parse()?;
            if !out.contains(&parsed) {
                out.push(parsed);
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let cmd = self.command.name();
        if !(self.tol > 0.0 && self.tol <= 1e-3) {
            return bad(format!("tol must lie in (0, 1e-3], got {}", self.tol));
        }
        if self.grid_size < MIN_GRID {
            return bad(format!(
                "grid size must be at least {MIN_GRID}, got {}",
                self.grid_size
            ));
        }
        if self.command.needs_populations() && self.n_list.is_empty() {
            return bad(format!("{cmd} needs at least one population size (--N)"));
        }
        if self.n_list.contains(&0) {
            return bad("population sizes must be at least 1".into());
        }
        if self.command.needs_issue() && self.issue_file.is_none() && self.issue.is_none() {
            return bad(format!("{cmd} needs an issue (--issue <file>)"));
        }
        if self.issue_file.is_some() && self.issue.is_some() {
            return bad("give either issue_file or an inline issue, not both".into());
        }
        match self.command {
            Command::SweepAlpha if self.alpha_list.is_empty() => {
                return bad("sweep-alpha needs at least one alpha (--alpha)".into())
            }
            Command::Invert if self.costs.is_empty() => {
                return bad("invert needs at least one cost (--costs)".into())
            }
            Command::Mechanism if self.epsilon_list.is_empty() || self.gamma_list.is_empty() => {
                return bad("mechanism needs --epsilon and --gamma".into())
            }
            Command::Limit if self.alpha_list.is_empty() => {
                return bad("limit needs at least one alpha (--alpha)".into())
            }
            _ => {}
        }
        let methods = self.methods()?;
        if methods.is_empty() {
            return bad("at least one method is required".into());
        }
        if methods.contains(&Method::MonteCarlo) && self.reps < MIN_REPLICATES {
            return bad(format!(
                "mc needs at least {MIN_REPLICATES} replicates, got {}",
                self.reps
            ));
        }
        Ok(())
    }

    /// Loads the issue and applies the model override, if any.
    pub fn load_issue(&self) -> Result<Issue> {
        let issue = match (&self.issue_file, &self.issue) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
                    path: path.clone(),
                    source: e,
                })?;
                Issue::from_json(&text)?
            }
            (None, Some(value)) => Issue::from_json(&value.to_string())?,
            (None, None) => return Err(CliError::Config("no issue given".into())),
        };
        match self.ppm {
            Some(ppm) => Ok(issue.with_ppm(ppm)?),
            None => Ok(issue),
        }
    }

    /// The issue when one is configured, `None` otherwise.
    pub fn maybe_issue(&self) -> Result<Option<Issue>> {
        if self.issue_file.is_none() && self.issue.is_none() {
            Ok(None)
        } else {
            self.load_issue().map(Some)
        }
    }
}
