use anyhow::anyhow;
use ghostlink::analysis::{Completeness, EmpiricalDistribution, HistogramKind};
use ghostlink::simulator::{run_ensemble_retrying, run_retrying, SimulationSummary, Termination};

use crate::args::SimulateArgs;
use crate::experiment::{Experiment, Seeding};
use crate::output::{write_histogram_csv, write_json, SummaryDocument, SCHEMA_VERSION};
use crate::{CmdResult, Failure, EXIT_EXTINCT};

pub fn execute(exp: &Experiment) -> Vec<SimulationSummary> {
    match exp.seeding {
        Seeding::Single { seed } => vec![run_retrying(&exp.config, seed, exp.retry_extinct)],
        Seeding::Ensemble {
            master_seed,
            replicates,
        } => run_ensemble_retrying(&exp.config, replicates, master_seed, exp.retry_extinct),
    }
}

pub fn document(exp: &Experiment, runs: Vec<SimulationSummary>) -> anyhow::Result<SummaryDocument> {
    let extinct = runs.iter().filter(|s| s.termination == Termination::Extinct).count() as u64;
    Ok(SummaryDocument {
        schema_version: SCHEMA_VERSION,
        experiment: serde_json::to_value(exp)?,
        complete: runs.iter().all(|s| s.termination == Termination::TargetReached),
        extinct_replicates: extinct,
        runs,
    })
}

/// Histogram pooled over the replicates that reached their target.
pub fn pooled(runs: &[SimulationSummary], which: HistogramKind) -> Option<EmpiricalDistribution> {
    let parts: Vec<EmpiricalDistribution> = runs
        .iter()
        .filter_map(|s| EmpiricalDistribution::from_summary(s, which, Completeness::RequireTarget).ok())
        .collect();
    EmpiricalDistribution::pooled(&parts).ok()
}

pub fn all_extinct(doc: &SummaryDocument) -> Option<Failure> {
    (doc.extinct_replicates == doc.runs.len() as u64).then(|| {
        Failure::new(
            EXIT_EXTINCT,
            anyhow!("all {} replicate(s) went extinct", doc.runs.len()),
        )
    })
}

pub fn run(a: SimulateArgs) -> CmdResult {
    let exp = Experiment::from_args(&a)?;
    let runs = execute(&exp);
    let doc = document(&exp, runs)?;

    for s in &doc.runs {
        println!(
            "seed {}: {:?}, alive {}, births {}, deaths {}, birth fraction {}",
            s.seed,
            s.termination,
            s.alive(),
            s.births_total,
            s.deaths_total,
            s.birth_fraction().map_or("n/a".to_string(), |f| f.to_string()),
        );
    }
    if !doc.complete {
        eprintln!("warning: {} of {} replicate(s) did not reach the target", doc.runs.iter().filter(|s| s.termination != Termination::TargetReached).count(), doc.runs.len());
    }

    if let Some(path) = &a.out {
        write_json(path, &doc)?;
    }
    for (path, which) in [(&a.fitness_csv, HistogramKind::Fitness), (&a.indegree_csv, HistogramKind::InDegree)] {
        if let Some(path) = path {
            match pooled(&doc.runs, which) {
                Some(dist) => write_histogram_csv(path, &dist)?,
                None => eprintln!("warning: no completed replicate; {} not written", path.display()),
            }
        }
    }
    all_extinct(&doc).map_or(Ok(()), Err)
}
