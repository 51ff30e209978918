use std::path::PathBuf;

use ghostlink::analysis::{ccdf, default_window, fit_tail, ks_distance, Completeness, EmpiricalDistribution, HistogramKind, TailFit, TailLaw};
use ghostlink::simulator::{run_ensemble_retrying, Mode, SimulationConfig, Termination};
use ghostlink::theory::{classify_tail, find_malthusian, fitness_distribution};
use ghostlink::{Rate, Tail};
use serde::Serialize;

use crate::args::FigureArgs;
use crate::experiment::DEFAULT_TARGET_ALIVE;
use crate::output::{write_comparison_csv, write_histogram_csv, write_json, write_theory_csv, SCHEMA_VERSION};
use crate::simulate::pooled;
use crate::theory::{DEFAULT_K_MAX, DEFAULT_TOL};
use crate::{CmdResult, Failure, EXIT_EXTINCT, EXIT_UNDETERMINED};

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub b: &'static str,
    pub d: &'static str,
    pub law: TailLaw,
    pub axes: (Scale, Scale),
}

pub fn preset(n: u8) -> Option<Preset> {
    let p = match n {
        1 => Preset {
            b: "affine(1,1)",
            d: "const(0.5)",
            law: TailLaw::PowerLaw,
            axes: (Scale::Log, Scale::Log),
        },
        2 => Preset {
            b: "affine(1,1)",
            d: "power(0.5,1)",
            law: TailLaw::Exponential,
            axes: (Scale::Linear, Scale::Log),
        },
        3 => Preset {
            b: "affine(1,1)",
            d: "power(0.5,0.5)",
            law: TailLaw::Stretched,
            axes: (Scale::Log, Scale::Log),
        },
        _ => return None,
    };
    Some(p)
}

#[derive(Debug, Serialize)]
struct Axes {
    x: Scale,
    y: Scale,
}

#[derive(Debug, Serialize)]
struct Fits {
    fitness: Option<TailFit<f64>>,
    in_degree: Option<TailFit<f64>>,
    theory: Option<TailFit<f64>>,
}

#[derive(Debug, Serialize)]
struct Metadata {
    schema_version: u32,
    figure: u8,
    b: String,
    d: String,
    target_alive: u64,
    replicates: u64,
    master_seed: u64,
    axes: Axes,
    lambda_star: f64,
    predicted_tail: Tail,
    law: TailLaw,
    fit_window: Option<(u64, u64)>,
    fits: Fits,
    ks_fitness_per_replicate: Vec<f64>,
    seeds: Vec<u64>,
    retries: Vec<u64>,
    files: Vec<String>,
}

pub fn run(a: FigureArgs) -> CmdResult {
    let Some(n) = a.n else { return Err(anyhow::anyhow!("figure number required (1, 2 or 3)").into()) };
    let Some(p) = preset(n) else { return Err(anyhow::anyhow!("no figure {n}; choose 1, 2 or 3").into()) };
    let dir = a.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    let target = a.target_alive.unwrap_or(DEFAULT_TARGET_ALIVE);
    if target == 0 {
        return Err(anyhow::anyhow!("--target-alive must be at least 1").into());
    }
    let replicates = a.replicates.unwrap_or(1);
    if replicates == 0 {
        return Err(anyhow::anyhow!("--replicates must be at least 1").into());
    }
    let master_seed = a.master_seed.unwrap_or(1);
    let retry = a.retry_extinct.unwrap_or(100);

    let b: Rate = p.b.parse()?;
    let d: Rate = p.d.parse()?;
    let m = find_malthusian(&b, &d, DEFAULT_TOL);
    let theory = fitness_distribution(&b, &d, m.lambda_star, DEFAULT_K_MAX).map_err(|e| Failure::new(EXIT_UNDETERMINED, e))?;

    let fitness_runs = run_ensemble_retrying(&SimulationConfig::new(b, d, Mode::Fitness, target), replicates, master_seed, retry);
    let indegree_runs = run_ensemble_retrying(&SimulationConfig::new(b, d, Mode::InDegree, target), replicates, master_seed, retry);
    let (Some(fitness), Some(indegree)) = (pooled(&fitness_runs, HistogramKind::Fitness), pooled(&indegree_runs, HistogramKind::InDegree)) else {
        return Err(Failure::new(EXIT_EXTINCT, anyhow::anyhow!("every replicate went extinct")));
    };
    let incomplete = fitness_runs.iter().chain(&indegree_runs).filter(|s| s.termination != Termination::TargetReached).count();
    if incomplete > 0 {
        eprintln!("warning: {incomplete} replicate(s) did not reach the target and were left out");
    }

    let name = |what: &str| format!("fig{n}_{what}");
    let mut files = Vec::new();
    let mut path = |what: &str, ext: &str| {
        let f = format!("{}.{ext}", name(what));
        files.push(f.clone());
        dir.join(f)
    };
    write_histogram_csv(&path("fitness", "csv"), &fitness)?;
    write_histogram_csv(&path("indegree", "csv"), &indegree)?;
    write_theory_csv(&path("theory", "csv"), &theory)?;
    let fitness_ccdf = ccdf(&fitness);
    let theory_ccdf = ccdf(&theory);
    write_comparison_csv(&path("compare", "csv"), &fitness_ccdf, &theory_ccdf)?;
    let meta_path = path("meta", "json");

    let window = default_window(&fitness.counts);
    let fit = |c: &[(u64, f64)], w: Option<(u64, u64)>| w.and_then(|(lo, hi)| fit_tail(c, p.law, lo, Some(hi)).ok());
    let fits = Fits {
        fitness: fit(&fitness_ccdf, window),
        in_degree: fit(&ccdf(&indegree), default_window(&indegree.counts)),
        theory: fit(&theory_ccdf, window),
    };
    let ks: Vec<f64> = fitness_runs
        .iter()
        .filter_map(|s| EmpiricalDistribution::from_summary(s, HistogramKind::Fitness, Completeness::RequireTarget).ok())
        .map(|e| ks_distance(&e, &theory))
        .collect();

    match &fits.fitness {
        Some(f) => println!("figure {n}: {:?} fit on fitness data, parameter {} (r2 {})", p.law, f.law.parameter(), f.r_squared),
        None => println!("figure {n}: not enough data for a {:?} fit", p.law),
    }
    println!("lambda_star = {}", m.lambda_star);
    for k in &ks {
        println!("ks_distance = {k}");
    }

    let meta = Metadata {
        schema_version: SCHEMA_VERSION,
        figure: n,
        b: b.to_string(),
        d: d.to_string(),
        target_alive: target,
        replicates,
        master_seed,
        axes: Axes { x: p.axes.0, y: p.axes.1 },
        lambda_star: m.lambda_star,
        predicted_tail: classify_tail(&b, &d),
        law: p.law,
        fit_window: window,
        fits,
        ks_fitness_per_replicate: ks,
        seeds: fitness_runs.iter().map(|s| s.seed).collect(),
        retries: fitness_runs.iter().map(|s| s.retries).collect(),
        files,
    };
    write_json(&meta_path, &meta)?;
    Ok(())
}
