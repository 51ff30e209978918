use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "ghostlink", version, about = "Preferential attachment with vertex death: theory, simulation and analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Malthusian parameter, mean offspring, tail class and the limiting fitness law.
    Theory(WithConfig<TheoryArgs>),
    /// Simulate to a target number of alive vertices.
    Simulate(WithConfig<SimulateArgs>),
    /// Compare empirical data with the theory or with another distribution.
    Compare(WithConfig<CompareArgs>),
    /// Regenerate the data behind one of the three preset figures.
    Figure(WithConfig<FigureArgs>),
}

#[derive(Debug, Args)]
pub struct WithConfig<A: Args> {
    /// JSON file with the same keys as the long flags; explicit flags win.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub args: A,
}

/// Field-by-field `Option::or`.
pub trait Overlay: Sized {
    fn overlay(self, base: Self) -> Self;
}

macro_rules! overlay {
    ($ty:ident { $($field:ident),* $(,)? }) => {
        impl Overlay for $ty {
            fn overlay(self, base: Self) -> Self {
                Self { $($field: self.$field.or(base.$field)),* }
            }
        }
    };
}

impl<A: Args + Overlay + DeserializeOwned + Default> WithConfig<A> {
    /// Flags overlaid on the config file, if any.
    pub fn resolve(self) -> anyhow::Result<A> {
        match self.config {
            Some(path) => Ok(self.args.overlay(read_config(&path)?)),
            None => Ok(self.args),
        }
    }
}

fn read_config<A: DeserializeOwned>(path: &Path) -> anyhow::Result<A> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoryArgs {
    /// Birth rate b(i), e.g. "affine(1,1)".
    #[arg(long)]
    pub b: Option<String>,
    /// Death rate d(i), e.g. "const(0.5)".
    #[arg(long)]
    pub d: Option<String>,
    /// Largest k tabulated [default: 1000].
    #[arg(long)]
    pub k_max: Option<u64>,
    /// Root-finding tolerance [default: 1e-10].
    #[arg(long)]
    pub tol: Option<f64>,
    /// CSV with columns k,p,ccdf.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report.
    #[arg(long)]
    pub json: Option<PathBuf>,
}
overlay!(TheoryArgs { b, d, k_max, tol, out, json });

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateArgs {
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long)]
    pub d: Option<String>,
    /// fitness or in_degree [default: fitness].
    #[arg(long)]
    pub mode: Option<String>,
    /// Stop when this many vertices are alive [default: 100000].
    #[arg(long)]
    pub target_alive: Option<u64>,
    /// Event budget per replicate [default: unlimited].
    #[arg(long)]
    pub max_events: Option<u64>,
    /// Number of replicates [default: 1].
    #[arg(long)]
    pub replicates: Option<u64>,
    /// Seed of a single run [default: 1].
    #[arg(long, conflicts_with = "master_seed")]
    pub seed: Option<u64>,
    /// Master seed; replicate r uses mix(master_seed, r).
    #[arg(long)]
    pub master_seed: Option<u64>,
    /// Rerun an extinct replicate on the next seed up to this many times [default: 0].
    #[arg(long)]
    pub retry_extinct: Option<u64>,
    /// Record model time.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub track_time: Option<bool>,
    /// Summary JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fitness histogram CSV (k,count,frequency,ccdf), pooled over completed replicates.
    #[arg(long)]
    pub fitness_csv: Option<PathBuf>,
    /// In-degree histogram CSV, pooled over completed replicates.
    #[arg(long)]
    pub indegree_csv: Option<PathBuf>,
}
overlay!(SimulateArgs {
    b,
    d,
    mode,
    target_alive,
    max_events,
    replicates,
    seed,
    master_seed,
    retry_extinct,
    track_time,
    out,
    fitness_csv,
    indegree_csv,
});

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareArgs {
    /// Summary JSON from `simulate`, or a CSV with k,count or k,p columns.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Histogram to use from a summary: fitness or in_degree [default: fitness].
    #[arg(long)]
    pub which: Option<String>,
    /// Theory from rates.
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long)]
    pub d: Option<String>,
    /// Theory from a CSV with k,p columns instead of rates.
    #[arg(long, conflicts_with_all = ["b", "d"])]
    pub theory_csv: Option<PathBuf>,
    /// Tail law to fit: power_law, exponential or stretched [default: predicted class, else power_law].
    #[arg(long)]
    pub law: Option<String>,
    /// Fit window [default: from the data counts].
    #[arg(long)]
    pub fit_k_min: Option<u64>,
    #[arg(long)]
    pub fit_k_max: Option<u64>,
    /// Allow truncated or extinct runs.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub allow_incomplete: Option<bool>,
    /// CSV with columns k,ccdf_empirical,ccdf_theory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report.
    #[arg(long)]
    pub json: Option<PathBuf>,
}
overlay!(CompareArgs {
    data,
    which,
    b,
    d,
    theory_csv,
    law,
    fit_k_min,
    fit_k_max,
    allow_incomplete,
    out,
    json,
});

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FigureArgs {
    /// Figure number: 1, 2 or 3.
    pub n: Option<u8>,
    /// Output directory [default: current directory].
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// [default: 100000]
    #[arg(long)]
    pub target_alive: Option<u64>,
    /// [default: 1]
    #[arg(long)]
    pub replicates: Option<u64>,
    /// [default: 1]
    #[arg(long)]
    pub master_seed: Option<u64>,
    /// [default: 100]
    #[arg(long)]
    pub retry_extinct: Option<u64>,
}
overlay!(FigureArgs {
    n,
    out_dir,
    target_alive,
    replicates,
    master_seed,
    retry_extinct,
});
