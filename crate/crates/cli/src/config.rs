//! Experiment parameters: command-line flags over a JSON config file over
//! per-command defaults.

use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use serde::{Deserialize, Serialize};

/// Everything a run may be parameterized by. Commands fill in the defaults
/// they use, so the report echoes the exact values of the run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub input: Vec<PathBuf>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let file = File::open(path).with_context(|| format!("opening config {}", path.display()))?;
        serde_json::from_reader(file).with_context(|| format!("parsing config {}", path.display()))
    }

    /// `self` with every field set in `flags` replaced.
    pub fn overridden_by(self, flags: ExperimentConfig) -> Self {
        Self {
            input: if flags.input.is_empty() { self.input } else { flags.input },
            k: flags.k.or(self.k),
            n: flags.n.or(self.n),
            nu: flags.nu.or(self.nu),
            lambda: flags.lambda.or(self.lambda),
            kappa: flags.kappa.or(self.kappa),
            grid: flags.grid.or(self.grid),
            count: flags.count.or(self.count),
            eps: flags.eps.or(self.eps),
            tol: flags.tol.or(self.tol),
            seed: flags.seed.or(self.seed),
            pairs: flags.pairs.or(self.pairs),
            times: flags.times.or(self.times),
            variant: flags.variant.or(self.variant),
            out: flags.out.or(self.out),
            plot: flags.plot.or(self.plot),
        }
    }
}

/// Reads `slot`, storing `default` first when it is unset.
pub fn resolve<T: Clone>(slot: &mut Option<T>, default: T) -> T {
    slot.get_or_insert(default).clone()
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON file with any of the parameters below; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Input file(s): a space, a graph, or density files, depending on the command
    #[arg(long, global = true)]
    pub input: Vec<PathBuf>,
    /// Curvature of the model space or cone
    #[arg(long = "K", global = true, allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// Dimension bound under test
    #[arg(long = "N", global = true, allow_negative_numbers = true)]
    pub n: Option<f64>,
    /// Warping exponent ν of the model
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub nu: Option<f64>,
    /// Fiber eigenvalue λ
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Curvature bound under test, when it differs from the model's
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// Number of grid cells
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Number of eigenvalues to compute
    #[arg(long, global = true)]
    pub count: Option<usize>,
    /// Midpoint tolerance
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    /// Pass/fail tolerance
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of sampled test functions or density pairs
    #[arg(long, global = true)]
    pub pairs: Option<usize>,
    /// Heat-flow times, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    /// Command-specific variant (cd-check: star|full; be-check on graphs: sampled|exhaustive)
    #[arg(long, global = true)]
    pub variant: Option<String>,
    /// Report path (the space itself for `cone`); stdout when omitted
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Optional SVG plot path
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,
}

impl Flags {
    /// Flags over the config file, if any.
    pub fn into_config(self) -> anyhow::Result<ExperimentConfig> {
        let base = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let flags = ExperimentConfig {
            input: self.input,
            k: self.k,
            n: self.n,
            nu: self.nu,
            lambda: self.lambda,
            kappa: self.kappa,
            grid: self.grid,
            count: self.count,
            eps: self.eps,
            tol: self.tol,
            seed: self.seed,
            pairs: self.pairs,
            times: self.times,
            variant: self.variant,
            out: self.out,
            plot: self.plot,
        };
        Ok(base.overridden_by(flags))
    }
}
