//! Validation of flags into typed experiment settings.

use anyhow::{anyhow, bail, Context};
use ghostlink::rates::{RateFunction, RateRole};
use ghostlink::simulator::{Mode, SimulationConfig};
use ghostlink::Rate;
use serde::Serialize;

use crate::args::SimulateArgs;

pub const DEFAULT_TARGET_ALIVE: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;

pub fn parse_rates(b: Option<&str>, d: Option<&str>) -> anyhow::Result<(Rate, Rate)> {
    let b = b.ok_or_else(|| anyhow!("--b is required"))?;
    let d = d.ok_or_else(|| anyhow!("--d is required"))?;
    let b = RateFunction::parse(b, RateRole::Birth).with_context(|| format!("birth rate `{b}`"))?;
    let d = RateFunction::parse(d, RateRole::Death).with_context(|| format!("death rate `{d}`"))?;
    Ok((b, d))
}

/// How replicate seeds are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Seeding {
    Single { seed: u64 },
    Ensemble { master_seed: u64, replicates: u64 },
}

/// A fully validated simulation request; serialized into the summary document.
#[derive(Debug, Clone, Serialize)]
pub struct Experiment {
    pub b: String,
    pub d: String,
    pub mode: Mode,
    pub target_alive: u64,
    pub max_events: Option<u64>,
    pub seeding: Seeding,
    pub retry_extinct: u64,
    pub track_time: bool,
    #[serde(skip)]
    pub config: SimulationConfig<f64>,
}

impl Experiment {
    pub fn from_args(a: &SimulateArgs) -> anyhow::Result<Self> {
        let (b, d) = parse_rates(a.b.as_deref(), a.d.as_deref())?;
        let mode: Mode = match a.mode.as_deref() {
            Some(m) => m.parse().map_err(|e: String| anyhow!(e))?,
            None => Mode::Fitness,
        };
        let target_alive = a.target_alive.unwrap_or(DEFAULT_TARGET_ALIVE);
        if target_alive == 0 {
            bail!("--target-alive must be at least 1");
        }
        if a.max_events == Some(0) {
            bail!("--max-events must be at least 1");
        }
        let replicates = a.replicates.unwrap_or(1);
        if replicates == 0 {
            bail!("--replicates must be at least 1");
        }
        let seeding = match (a.seed, a.master_seed) {
            (Some(_), Some(_)) => bail!("--seed and --master-seed are mutually exclusive"),
            (Some(_), None) if replicates > 1 => bail!("--seed selects a single run; use --master-seed with --replicates"),
            (_, Some(master_seed)) => Seeding::Ensemble { master_seed, replicates },
            (seed, None) if replicates == 1 => Seeding::Single {
                seed: seed.unwrap_or(DEFAULT_SEED),
            },
            (_, None) => Seeding::Ensemble {
                master_seed: DEFAULT_SEED,
                replicates,
            },
        };
        let track_time = a.track_time.unwrap_or(false);
        let mut config = SimulationConfig::new(b, d, mode, target_alive);
        config.max_events = a.max_events.unwrap_or(u64::MAX);
        config.track_time = track_time;
        Ok(Self {
            b: b.to_string(),
            d: d.to_string(),
            mode,
            target_alive,
            max_events: a.max_events,
            seeding,
            retry_extinct: a.retry_extinct.unwrap_or(0),
            track_time,
            config,
        })
    }
}
