//! Experiment runner over `jurylab-core`: loads an issue, sweeps population
//! sizes or model parameters, and writes sorted, reproducible CSV or JSON.

pub mod commands;
pub mod config;
pub mod error;
pub mod examples;
pub mod table;

use std::fs::File;
use std::io::{BufWriter, Write};

pub use commands::run;
pub use config::{Command, ExperimentConfig, Format};
pub use error::{CliError, Result};
pub use examples::{bundled_example, bundled_examples};
pub use table::Table;

/// Runs `cfg` and writes the table to `cfg.output`, or to stdout.
pub fn execute(cfg: &ExperimentConfig) -> Result<Table> {
    let table = run(cfg)?;
    match &cfg.output {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Io {
                path: path.clone(),
                source: e,
            })?;
            let mut w = BufWriter::new(file);
            table.write(cfg.format, &mut w)?;
            w.flush()?;
        }
        None => table.write(cfg.format, std::io::stdout().lock())?,
    }
    Ok(table)
}

/// Caps the global worker pool at `JURYLAB_THREADS` when it is set.
pub fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("JURYLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "JURYLAB_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}
