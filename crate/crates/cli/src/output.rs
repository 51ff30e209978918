//! CSV and JSON files written and read by the commands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context};
use ghostlink::analysis::{ccdf, EmpiricalDistribution, HistogramKind, PointMasses};
use ghostlink::simulator::SimulationSummary;
use ghostlink::FitnessDist;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Document written by `simulate` and read back by `compare`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryDocument {
    pub schema_version: u32,
    pub experiment: serde_json::Value,
    /// False when any replicate stopped short of its target.
    pub complete: bool,
    pub extinct_replicates: u64,
    pub runs: Vec<SimulationSummary>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_summary(path: &Path) -> anyhow::Result<SummaryDocument> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: SummaryDocument = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if doc.schema_version != SCHEMA_VERSION {
        bail!("{}: unsupported schema_version {}", path.display(), doc.schema_version);
    }
    Ok(doc)
}

fn csv_writer(path: &Path) -> anyhow::Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

pub fn write_histogram_csv(path: &Path, dist: &EmpiricalDistribution) -> anyhow::Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["k", "count", "frequency", "ccdf"])?;
    for (k, f) in ccdf(dist) {
        w.write_record([k.to_string(), dist.count(k).to_string(), dist.pmf(k).to_string(), f.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_theory_csv(path: &Path, dist: &FitnessDist) -> anyhow::Result<()> {
    let tail = ccdf(dist);
    let mut w = csv_writer(path)?;
    w.write_record(["k", "p", "ccdf"])?;
    for (k, p) in dist.p.iter().enumerate() {
        let f = tail.get(k).map_or(0.0, |&(_, f)| f);
        w.write_record([k.to_string(), p.to_string(), f.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_comparison_csv(path: &Path, empirical: &[(u64, f64)], theory: &[(u64, f64)]) -> anyhow::Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["k", "ccdf_empirical", "ccdf_theory"])?;
    let len = empirical.len().max(theory.len());
    for k in 0..len {
        let e = empirical.get(k).map_or(0.0, |&(_, f)| f);
        let t = theory.get(k).map_or(0.0, |&(_, f)| f);
        w.write_record([k.to_string(), e.to_string(), t.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Data read from a CSV: raw counts, or probabilities.
pub enum CsvDistribution {
    Counts(EmpiricalDistribution),
    Masses(PointMasses<f64>),
}

/// Reads a `k,count,...` histogram or a `k,p,...` table.
///
/// For a table with a `ccdf` column, the mass beyond the last row is recovered
/// as `ccdf(K) - p(K)`.
pub fn read_distribution_csv(path: &Path) -> anyhow::Result<CsvDistribution> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = r.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let k_col = col("k").with_context(|| format!("{}: no `k` column", path.display()))?;
    let parse_k = |rec: &csv::StringRecord| -> anyhow::Result<u64> { Ok(rec[k_col].trim().parse()?) };

    if let Some(c) = col("count") {
        let mut counts = std::collections::BTreeMap::new();
        for rec in r.records() {
            let rec = rec?;
            counts.insert(parse_k(&rec)?, rec[c].trim().parse::<u64>()?);
        }
        let kind = HistogramKind::Fitness;
        return Ok(CsvDistribution::Counts(EmpiricalDistribution::from_counts(counts, kind)?));
    }
    let p_col = col("p").with_context(|| format!("{}: needs a `count` or `p` column", path.display()))?;
    let f_col = col("ccdf");
    let mut masses = Vec::new();
    let mut last_ccdf = None;
    for rec in r.records() {
        let rec = rec?;
        let k = parse_k(&rec)? as usize;
        if k != masses.len() {
            bail!("{}: rows must list k = 0, 1, 2, ... in order", path.display());
        }
        masses.push(rec[p_col].trim().parse::<f64>()?);
        if let Some(c) = f_col {
            last_ccdf = Some(rec[c].trim().parse::<f64>()?);
        }
    }
    let beyond = match (last_ccdf, masses.last()) {
        (Some(f), Some(&p)) => (f - p).max(0.0),
        _ => 0.0,
    };
    Ok(CsvDistribution::Masses(PointMasses { masses, beyond }))
}
