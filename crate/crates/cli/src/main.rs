use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jurylab::{
    bundled_example, bundled_examples, execute, init_threads, CliError, Command, ExperimentConfig,
    Format,
};
use jurylab_core::PivotalityModel;

#[derive(Parser)]
#[command(
    name = "jurylab",
    version,
    about = "Turnout equilibria, win probabilities and sortition"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Equilibrium thresholds with kind and stability
    Equilibria(Flags),
    /// Win probabilities at every equilibrium (or at --costs)
    Winprob(Flags),
    /// Right-equilibrium win probability for each margin exponent
    SweepAlpha(Flags),
    /// Left and right equilibria with active fractions and win probabilities
    SweepN(Flags),
    /// Convergence slope of each non-trivial family
    Rate(Flags),
    /// Population size at which each cost is an equilibrium
    Invert(Flags),
    /// Exact two-round sortition probabilities
    Mechanism(Flags),
    /// Limit regime of the right equilibrium's win probability
    Limit(Flags),
    /// Run a JSON experiment config
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<Format>,
    },
    /// List bundled examples, or run the named one
    Examples {
        name: Option<String>,
        /// Print the config instead of running it
        #[arg(long)]
        show: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<Format>,
    },
}

#[derive(Args)]
struct Flags {
    /// Issue JSON file
    #[arg(long)]
    issue: Option<PathBuf>,
    /// Pivotality model JSON replacing the issue's, e.g. '{"kind":"poisson"}'
    #[arg(long)]
    ppm: Option<String>,
    /// Population sizes; accepts 1e6 notation
    #[arg(long = "N", value_delimiter = ',', value_parser = parse_count)]
    n: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    c_star: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    costs: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    epsilon: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    gamma: Vec<f64>,
    /// Any of exact, normal, mc
    #[arg(long, value_delimiter = ',', default_value = "normal")]
    methods: Vec<String>,
    #[arg(long, default_value_t = 100_000, value_parser = parse_count)]
    reps: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = jurylab_core::equilibrium::DEFAULT_GRID)]
    grid: usize,
    #[arg(long, default_value_t = jurylab_core::equilibrium::DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

/// Non-negative integer, also in float notation such as `1e6`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let x: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(format!("{s:?} is not a non-negative integer"))
    }
}

impl Flags {
    fn into_config(self, command: Command) -> Result<ExperimentConfig, CliError> {
        let ppm = match self.ppm {
            Some(text) => Some(
                serde_json::from_str::<PivotalityModel>(&text)
                    .map_err(|e| CliError::Config(format!("--ppm: {e}")))?,
            ),
            None => None,
        };
        let mut cfg = ExperimentConfig::new(command);
        cfg.issue_file = self.issue;
        cfg.ppm = ppm;
        cfg.n_list = self.n;
        cfg.alpha_list = self.alpha;
        cfg.beta = self.beta;
        cfg.c_star = self.c_star;
        cfg.costs = self.costs;
        cfg.epsilon_list = self.epsilon;
        cfg.gamma_list = self.gamma;
        cfg.methods = self.methods;
        cfg.reps = self.reps;
        cfg.seed = self.seed;
        cfg.grid_size = self.grid;
        cfg.tol = self.tol;
        cfg.output = self.out;
        cfg.format = self.format;
        Ok(cfg)
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (command, flags) = match cli.command {
        Sub::Equilibria(f) => (Command::Equilibria, f),
        Sub::Winprob(f) => (Command::Winprob, f),
        Sub::SweepAlpha(f) => (Command::SweepAlpha, f),
        Sub::SweepN(f) => (Command::SweepN, f),
        Sub::Rate(f) => (Command::Rate, f),
        Sub::Invert(f) => (Command::Invert, f),
        Sub::Mechanism(f) => (Command::Mechanism, f),
        Sub::Limit(f) => (Command::Limit, f),
        Sub::Run {
            config,
            out,
            format,
        } => {
            let text = std::fs::read_to_string(&config).map_err(|e| CliError::Io {
                path: config.clone(),
                source: e,
            })?;
            let mut cfg = ExperimentConfig::from_json(&text)?;
            cfg.output = out.or(cfg.output);
            cfg.format = format.unwrap_or(cfg.format);
            execute(&cfg)?;
            return Ok(());
        }
        Sub::Examples { name: None, .. } => {
            for (name, cfg) in bundled_examples() {
                println!("{name}\t{}", cfg.command.name());
            }
            return Ok(());
        }
        Sub::Examples {
            name: Some(name),
            show,
            out,
            format,
        } => {
            let mut cfg = bundled_example(&name).ok_or_else(|| {
                CliError::Config(format!(
                    "no bundled example {name:?}; run `jurylab examples` to list them"
                ))
            })?;
            if show {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&cfg).expect("config serialises")
                );
                return Ok(());
            }
            cfg.output = out;
            cfg.format = format.unwrap_or_default();
            execute(&cfg)?;
            return Ok(());
        }
    };
    execute(&flags.into_config(command)?)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|()| dispatch(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jurylab: error: {e}");
            ExitCode::from(2)
        }
    }
}
