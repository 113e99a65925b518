use std::path::PathBuf;

use serde::Serialize;

use crate::error::CliError;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct GridPolicy {
    pub base: usize,
    /// Number of levels `base·2ʲ`, `j = 0..levels`.
    pub levels: usize,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Tolerances {
    pub tol_solve: f64,
    /// Relative tolerance of the vertex compatibility check.
    pub tau_comp: f64,
    /// Largest admissible mismatch between traces of adjacent faces.
    pub tau_match: f64,
}

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct Outputs {
    pub report: Option<PathBuf>,
    pub dump: Option<PathBuf>,
    pub dump_bin: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

/// Fully resolved configuration, embedded in every report.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RunConfig {
    pub problem: Option<PathBuf>,
    pub subcommand: String,
    pub grid: GridPolicy,
    pub tolerances: Tolerances,
    pub max_iter: usize,
    pub outputs: Outputs,
    pub deterministic: bool,
    pub seed: u64,
    pub threads: usize,
    pub strict: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let t = &self.tolerances;
        for (name, v) in [("tol", t.tol_solve), ("tau-comp", t.tau_comp), ("tau-match", t.tau_match)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!("--{name} must be a positive number, got {v}")));
            }
        }
        if self.grid.levels < 1 {
            return Err(CliError::Usage("--levels must be at least 1".into()));
        }
        if self.grid.base < 2 {
            return Err(CliError::Usage(format!("--grid must be at least 2, got {}", self.grid.base)));
        }
        if self.threads < 1 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        if self.max_iter < 1 {
            return Err(CliError::Usage("--max-iter must be at least 1".into()));
        }
        Ok(())
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        (0..self.grid.levels).map(|j| self.grid.base << j).collect()
    }
}

/// `--threads` wins over `GMA_THREADS`, which wins over the machine's parallelism.
pub fn resolve_threads(flag: Option<usize>, env: Option<&str>) -> Result<usize, CliError> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match env.map(str::trim).filter(|s| !s.is_empty()) {
        Some(s) => s.parse::<usize>().ok().filter(|&t| t >= 1).ok_or_else(|| CliError::Usage(format!("GMA_THREADS={s} is not a positive integer"))),
        None => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}
