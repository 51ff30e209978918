use std::path::Path;

use anyhow::{anyhow, bail};
use ghostlink::analysis::{
    ccdf, default_window, fit_tail, ks_distance, Completeness, DiscreteDistribution, EmpiricalDistribution,
    HistogramKind, PointMasses, TailFit, TailLaw, DEFAULT_K_MIN,
};
use ghostlink::simulator::Mode;
use ghostlink::theory::{classify_tail, fitness_distribution, TailClass};
use ghostlink::{FitnessDist, Rate};
use serde::Serialize;

use crate::args::CompareArgs;
use crate::experiment::parse_rates;
use crate::output::{read_distribution_csv, read_summary, write_comparison_csv, write_json, CsvDistribution, SCHEMA_VERSION};
use crate::theory::{supercritical_root, DEFAULT_K_MAX, DEFAULT_TOL};
use crate::CmdResult;

/// Any of the distributions `compare` can read or build.
pub enum Dist {
    Empirical(EmpiricalDistribution),
    Masses(PointMasses<f64>),
    Theory(FitnessDist),
}

impl DiscreteDistribution for Dist {
    type Prob = f64;

    fn support_max(&self) -> u64 {
        match self {
            Dist::Empirical(d) => d.support_max(),
            Dist::Masses(d) => d.support_max(),
            Dist::Theory(d) => d.support_max(),
        }
    }

    fn mass(&self, k: u64) -> f64 {
        match self {
            Dist::Empirical(d) => d.mass(k),
            Dist::Masses(d) => d.mass(k),
            Dist::Theory(d) => d.mass(k),
        }
    }

    fn mass_beyond(&self) -> f64 {
        match self {
            Dist::Empirical(d) => d.mass_beyond(),
            Dist::Masses(d) => d.mass_beyond(),
            Dist::Theory(d) => d.mass_beyond(),
        }
    }
}

pub fn parse_law(s: &str) -> anyhow::Result<TailLaw> {
    match s {
        "power_law" | "power" => Ok(TailLaw::PowerLaw),
        "exponential" => Ok(TailLaw::Exponential),
        "stretched" | "stretched_exponential" => Ok(TailLaw::Stretched),
        other => bail!("unknown tail law `{other}` (expected power_law, exponential or stretched)"),
    }
}

pub fn predicted_law(b: &Rate, d: &Rate) -> Option<TailLaw> {
    match classify_tail(b, d) {
        TailClass::PowerLaw { .. } => Some(TailLaw::PowerLaw),
        TailClass::Exponential { .. } => Some(TailLaw::Exponential),
        TailClass::StretchedExponential { .. } => Some(TailLaw::Stretched),
        TailClass::Unknown => None,
    }
}

fn parse_which(s: Option<&str>) -> anyhow::Result<HistogramKind> {
    match s {
        None | Some("fitness") => Ok(HistogramKind::Fitness),
        Some("in_degree" | "indegree" | "in-degree") => Ok(HistogramKind::InDegree),
        Some(other) => bail!("unknown histogram `{other}` (expected fitness or in_degree)"),
    }
}

/// The theoretical fitness law, tabulated at least up to `k_needed`.
pub fn theory_from_rates(b: &Rate, d: &Rate, k_needed: u64) -> Result<FitnessDist, crate::Failure> {
    let m = supercritical_root(b, d, DEFAULT_TOL).map_err(|(_, f)| f)?;
    let k_max = DEFAULT_K_MAX.max(k_needed);
    fitness_distribution(b, d, m.lambda_star, k_max).map_err(|e| crate::Failure::new(crate::EXIT_UNDETERMINED, e))
}

#[derive(Debug, Serialize)]
struct FitReport {
    empirical: Option<TailFit<f64>>,
    empirical_error: Option<String>,
    theory: Option<TailFit<f64>>,
    theory_error: Option<String>,
}

#[derive(Debug, Serialize)]
struct CompareReport {
    schema_version: u32,
    which: HistogramKind,
    lambda_star: Option<f64>,
    ks_distance: f64,
    ks_per_replicate: Vec<f64>,
    law: TailLaw,
    fit_window: (u64, u64),
    fits: FitReport,
    warnings: Vec<String>,
}

struct Data {
    pooled: Dist,
    replicates: Vec<EmpiricalDistribution>,
    rates: Option<(String, String)>,
    mode: Option<Mode>,
}

fn load_data(path: &Path, which: HistogramKind, completeness: Completeness) -> anyhow::Result<Data> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if !is_json {
        let pooled = match read_distribution_csv(path)? {
            CsvDistribution::Counts(e) => Dist::Empirical(e),
            CsvDistribution::Masses(m) => Dist::Masses(m),
        };
        return Ok(Data {
            pooled,
            replicates: Vec::new(),
            rates: None,
            mode: None,
        });
    }
    let doc = read_summary(path)?;
    let mut replicates = Vec::new();
    for s in &doc.runs {
        match EmpiricalDistribution::from_summary(s, which, completeness) {
            Ok(e) => replicates.push(e),
            Err(e) => eprintln!("warning: skipping replicate with seed {}: {e}", s.seed),
        }
    }
    let pooled = EmpiricalDistribution::pooled(&replicates).map_err(|_| anyhow!("{}: no usable replicate", path.display()))?;
    let first = doc.runs.first();
    Ok(Data {
        pooled: Dist::Empirical(pooled),
        replicates,
        rates: first.map(|s| (s.config.b.clone(), s.config.d.clone())),
        mode: first.map(|s| s.config.mode),
    })
}

fn fit_both(law: TailLaw, window: (u64, u64), data: &[(u64, f64)], theory: &[(u64, f64)]) -> FitReport {
    let (lo, hi) = window;
    let e = fit_tail(data, law, lo, Some(hi));
    let t = fit_tail(theory, law, lo, Some(hi));
    FitReport {
        empirical_error: e.as_ref().err().map(|e| e.to_string()),
        empirical: e.ok(),
        theory_error: t.as_ref().err().map(|e| e.to_string()),
        theory: t.ok(),
    }
}

pub fn run(a: CompareArgs) -> CmdResult {
    let data_path = a.data.as_deref().ok_or_else(|| anyhow!("--data is required"))?;
    let which = parse_which(a.which.as_deref())?;
    let completeness = if a.allow_incomplete.unwrap_or(false) {
        Completeness::AllowIncomplete
    } else {
        Completeness::RequireTarget
    };
    let data = load_data(data_path, which, completeness)?;
    let mut warnings = Vec::new();

    let (theory, lambda_star, rates) = match (&a.theory_csv, a.b.is_some() || a.d.is_some()) {
        (Some(p), _) => match read_distribution_csv(p)? {
            CsvDistribution::Masses(m) => (Dist::Masses(m), None, None),
            CsvDistribution::Counts(e) => (Dist::Empirical(e), None, None),
        },
        (None, true) => {
            let (b, d) = parse_rates(a.b.as_deref(), a.d.as_deref())?;
            let dist = theory_from_rates(&b, &d, data.pooled.support_max() + 1)?;
            let ls = dist.lambda_star;
            (Dist::Theory(dist), Some(ls), Some((b, d)))
        }
        (None, false) => return Err(anyhow!("give --b and --d, or --theory-csv").into()),
    };

    if let (Some((b, d)), Some((rb, rd))) = (&rates, &data.rates) {
        if b.to_string() != *rb || d.to_string() != *rd {
            warnings.push(format!("data were simulated with b = {rb}, d = {rd}, theory uses b = {b}, d = {d}"));
        }
    }
    if which == HistogramKind::InDegree {
        warnings.push("comparing in-degree data with the fitness law".to_string());
    }
    if data.mode == Some(Mode::InDegree) {
        warnings.push("data come from in-degree mode, where the fitness law does not apply".to_string());
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }

    let ks = ks_distance(&data.pooled, &theory);
    let ks_per_replicate: Vec<f64> = data.replicates.iter().map(|e| ks_distance(e, &theory)).collect();

    let law = match (&a.law, &rates) {
        (Some(l), _) => parse_law(l)?,
        (None, Some((b, d))) => predicted_law(b, d).unwrap_or(TailLaw::PowerLaw),
        (None, None) => TailLaw::PowerLaw,
    };
    let data_ccdf = ccdf(&data.pooled);
    let theory_ccdf = ccdf(&theory);
    let auto = match &data.pooled {
        Dist::Empirical(e) => default_window(&e.counts),
        _ => Some((DEFAULT_K_MIN, data.pooled.support_max())),
    };
    let window = match (a.fit_k_min, a.fit_k_max, auto) {
        (lo, hi, Some((alo, ahi))) => (lo.unwrap_or(alo), hi.unwrap_or(ahi)),
        (Some(lo), Some(hi), None) => (lo, hi),
        _ => (DEFAULT_K_MIN, DEFAULT_K_MIN),
    };
    let fits = fit_both(law, window, &data_ccdf, &theory_ccdf);

    println!("ks_distance = {ks}");
    for (r, k) in ks_per_replicate.iter().enumerate() {
        println!("ks_distance[{r}] = {k}");
    }
    for (label, fit, err) in [
        ("empirical", &fits.empirical, &fits.empirical_error),
        ("theory", &fits.theory, &fits.theory_error),
    ] {
        match (fit, err) {
            (Some(f), _) => println!(
                "fit {label}: {law:?} parameter {} r2 {} over k in [{}, {}]",
                f.law.parameter(),
                f.r_squared,
                f.fit_range.0,
                f.fit_range.1
            ),
            (None, Some(e)) => println!("fit {label}: {e}"),
            _ => {}
        }
    }

    if let Some(path) = &a.out {
        write_comparison_csv(path, &data_ccdf, &theory_ccdf)?;
    }
    if let Some(path) = &a.json {
        let report = CompareReport {
            schema_version: SCHEMA_VERSION,
            which,
            lambda_star,
            ks_distance: ks,
            ks_per_replicate,
            law,
            fit_window: window,
            fits,
            warnings,
        };
        write_json(path, &report)?;
    }
    Ok(())
}
