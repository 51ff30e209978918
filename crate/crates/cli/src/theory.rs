use anyhow::anyhow;
use ghostlink::theory::{
    classify_tail, find_malthusian, fitness_distribution, Criticality, Extended, TailClass,
};
use ghostlink::{Malthusian, Rate, Tail};
use serde::Serialize;

use crate::args::TheoryArgs;
use crate::experiment::parse_rates;
use crate::output::{write_json, write_theory_csv, SCHEMA_VERSION};
use crate::{CmdResult, Failure, EXIT_NOT_SUPERCRITICAL, EXIT_UNDETERMINED};

pub const DEFAULT_K_MAX: u64 = 1000;
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Serialize)]
struct TheoryReport {
    schema_version: u32,
    b: String,
    d: String,
    classification: Criticality,
    lambda_star: Option<f64>,
    residual: Option<f64>,
    bracket: (f64, f64),
    /// `"inf"` when the series diverges, `null` when undetermined.
    mean_offspring: serde_json::Value,
    tail: Tail,
    k_max: u64,
    normalization_c: Option<f64>,
    tail_mass_bound: Option<f64>,
}

pub fn extended_json(x: Extended<f64>) -> serde_json::Value {
    match x {
        Extended::Finite(v) => serde_json::json!(v),
        Extended::Infinite => serde_json::json!("inf"),
        Extended::Undetermined => serde_json::Value::Null,
    }
}

pub fn describe_tail(t: &Tail) -> String {
    match t {
        TailClass::PowerLaw { exponent } => format!("power_law(tau={exponent})"),
        TailClass::Exponential { rate } => format!("exponential(rate={rate})"),
        TailClass::StretchedExponential { exponent } => format!("stretched_exponential(gamma={exponent})"),
        TailClass::Unknown => "unknown".to_string(),
    }
}

/// Root finding with the verdict mapped onto exit codes.
pub fn supercritical_root(b: &Rate, d: &Rate, tol: f64) -> Result<Malthusian, (Malthusian, Failure)> {
    let m = find_malthusian(b, d, tol);
    match m.classification {
        Criticality::Supercritical => Ok(m),
        Criticality::NotSupercritical => {
            let err = Failure::new(EXIT_NOT_SUPERCRITICAL, anyhow!("b = {b}, d = {d} is not supercritical"));
            Err((m, err))
        }
        Criticality::Undetermined => {
            let err = Failure::new(
                EXIT_UNDETERMINED,
                anyhow!("could not decide criticality of b = {b}, d = {d} (bracket {:?})", m.bracket),
            );
            Err((m, err))
        }
    }
}

pub fn run(a: TheoryArgs) -> CmdResult {
    let (b, d) = parse_rates(a.b.as_deref(), a.d.as_deref())?;
    let k_max = a.k_max.unwrap_or(DEFAULT_K_MAX);
    let tol = a.tol.unwrap_or(DEFAULT_TOL);
    if !(tol > 0.0) {
        return Err(anyhow!("--tol must be positive").into());
    }
    let tail = classify_tail(&b, &d);
    let (m, failure) = match supercritical_root(&b, &d, tol) {
        Ok(m) => (m, None),
        Err((m, f)) => (m, Some(f)),
    };

    println!("b = {b}");
    println!("d = {d}");
    let mean = match m.mean_offspring {
        Extended::Finite(v) => v.to_string(),
        Extended::Infinite => "inf".to_string(),
        Extended::Undetermined => "undetermined".to_string(),
    };
    println!("mean_offspring = {mean}");
    let verdict = match m.classification {
        Criticality::Supercritical => "supercritical",
        Criticality::NotSupercritical => "not_supercritical",
        Criticality::Undetermined => "undetermined",
    };
    println!("verdict = {verdict}");
    println!("tail = {}", describe_tail(&tail));

    let mut report = TheoryReport {
        schema_version: SCHEMA_VERSION,
        b: b.to_string(),
        d: d.to_string(),
        classification: m.classification,
        lambda_star: None,
        residual: None,
        bracket: m.bracket,
        mean_offspring: extended_json(m.mean_offspring),
        tail,
        k_max,
        normalization_c: None,
        tail_mass_bound: None,
    };

    if failure.is_none() {
        println!("lambda_star = {} (residual {:e})", m.lambda_star, m.residual);
        let dist = fitness_distribution(&b, &d, m.lambda_star, k_max).map_err(|e| Failure::new(EXIT_UNDETERMINED, e))?;
        println!("normalization_c = {}", dist.normalization_c);
        println!("tail_mass_beyond_k_max = {:e}", dist.tail_mass_bound);
        report.lambda_star = Some(m.lambda_star);
        report.residual = Some(m.residual);
        report.normalization_c = Some(dist.normalization_c);
        report.tail_mass_bound = Some(dist.tail_mass_bound);
        if let Some(path) = &a.out {
            write_theory_csv(path, &dist)?;
        }
    }
    if let Some(path) = &a.json {
        write_json(path, &report)?;
    }
    failure.map_or(Ok(()), Err)
}
