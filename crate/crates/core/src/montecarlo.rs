//! Logical error rate estimation.
//!
//! Trial `t` of a run with seed `s` always draws its noise from
//! [`trial_rng`]`(s, t)`, and trials are processed in fixed-size batches,
//! so results do not depend on the number of worker threads.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_depolarizing_with, trial_rng, ChannelParam};
use crate::code::{CodeFile, QuantumCode};
use crate::decoder::{is_logical_success, measure_syndrome, QuantumDecoder};
use crate::error::{Error, Result};

/// Trials per scheduling batch. Early stopping is checked between batches.
pub const BATCH: u64 = 1024;
/// Default failure count for early stopping in sweeps.
pub const DEFAULT_MIN_FAILURES: u64 = 100;
/// Two-sided 95% standard normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

pub const CSV_HEADER: &str = "p,L,N,trials,failures,ler,ci95_low,ci95_high,seconds";

/// One simulated operating point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimPoint {
    pub p: f64,
    #[serde(rename = "L")]
    pub list_size: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub trials: u64,
    pub failures: u64,
    pub ler: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub seconds: f64,
}

impl SimPoint {
    fn new(p: f64, list_size: usize, n: usize, trials: u64, failures: u64, seconds: f64) -> Self {
        let (ci95_low, ci95_high) = wilson_interval(failures, trials);
        Self {
            p,
            list_size,
            n,
            trials,
            failures,
            ler: if trials == 0 { 0.0 } else { failures as f64 / trials as f64 },
            ci95_low,
            ci95_high,
            seconds,
        }
    }

    /// Wilson half-width.
    pub fn ci95_half_width(&self) -> f64 {
        (self.ci95_high - self.ci95_low) / 2.0
    }

    /// Equality ignoring the timing column.
    pub fn same_result(&self, other: &SimPoint) -> bool {
        SimPoint { seconds: 0.0, ..self.clone() } == SimPoint { seconds: 0.0, ..other.clone() }
    }
}

/// 95% Wilson score interval for `failures` out of `trials`.
pub fn wilson_interval(failures: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = failures as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if failures == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if failures >= trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Runs one trial; decode failures count as logical errors.
fn trial_fails(decoder: &QuantumDecoder, param: ChannelParam, seed: u64, trial: u64) -> bool {
    let code = decoder.code();
    let noise = sample_depolarizing_with(param, code.n(), &mut trial_rng(seed, trial));
    let syndrome = measure_syndrome(&noise, code).expect("noise length matches code");
    match decoder.decode(&syndrome) {
        Ok(d) => !is_logical_success(&d.s_hat, &noise, code).expect("lengths match"),
        Err(_) => true,
    }
}

/// Failures among trials `start..end`, evaluated in parallel.
pub fn count_failures(decoder: &QuantumDecoder, param: ChannelParam, seed: u64, start: u64, end: u64) -> u64 {
    (start..end)
        .into_par_iter()
        .map(|t| u64::from(trial_fails(decoder, param, seed, t)))
        .sum()
}

/// Simulates `trials` trials (or fewer with early stopping once
/// `min_failures > 0` failures are seen, checked per batch).
pub fn run_point_with(
    code: &QuantumCode,
    param: ChannelParam,
    list_size: usize,
    trials: u64,
    seed: u64,
    min_failures: u64,
) -> Result<SimPoint> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let decoder = QuantumDecoder::new(code, param, list_size)?;
    let start = Instant::now();
    let mut done = 0;
    let mut failures = 0;
    while done < trials {
        let end = (done + BATCH).min(trials);
        failures += count_failures(&decoder, param, seed, done, end);
        done = end;
        if min_failures > 0 && failures >= min_failures {
            break;
        }
    }
    Ok(SimPoint::new(
        param.p(),
        list_size,
        code.n(),
        done,
        failures,
        start.elapsed().as_secs_f64(),
    ))
}

/// Simulates exactly `trials` trials.
pub fn run_point(code: &QuantumCode, param: ChannelParam, list_size: usize, trials: u64, seed: u64) -> Result<SimPoint> {
    run_point_with(code, param, list_size, trials, seed, 0)
}

/// One point per entry of `p_list`, in order, all sharing `seed`.
pub fn run_sweep(
    code: &QuantumCode,
    p_list: &[f64],
    list_size: usize,
    trials_per_point: u64,
    seed: u64,
    min_failures: u64,
) -> Result<Vec<SimPoint>> {
    if p_list.is_empty() {
        return Err(Error::invalid("p list must not be empty"));
    }
    p_list
        .iter()
        .map(|&p| {
            let param = ChannelParam::new(p)?;
            run_point_with(code, param, list_size, trials_per_point, seed, min_failures)
        })
        .collect()
}

pub fn to_csv(points: &[SimPoint]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            s.p, s.list_size, s.n, s.trials, s.failures, s.ler, s.ci95_low, s.ci95_high, s.seconds
        ));
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<SimPoint>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::parse("header", format!("expected `{CSV_HEADER}`"))),
    }
    let names: Vec<&str> = CSV_HEADER.split(',').collect();
    let mut out = Vec::new();
    for (row, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != names.len() {
            return Err(Error::parse(format!("row {}", row + 1), "wrong number of columns"));
        }
        let float = |k: usize| -> Result<f64> {
            cells[k]
                .parse()
                .map_err(|_| Error::parse(names[k], format!("not a number: {}", cells[k])))
        };
        let int = |k: usize| -> Result<u64> {
            cells[k]
                .parse()
                .map_err(|_| Error::parse(names[k], format!("not an integer: {}", cells[k])))
        };
        out.push(SimPoint {
            p: float(0)?,
            list_size: int(1)? as usize,
            n: int(2)? as usize,
            trials: int(3)?,
            failures: int(4)?,
            ler: float(5)?,
            ci95_low: float(6)?,
            ci95_high: float(7)?,
            seconds: float(8)?,
        });
    }
    Ok(out)
}

/// JSON form of a sweep, carrying the simulated code for provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationReport {
    pub code: CodeFile,
    pub seed: u64,
    pub min_failures: u64,
    pub points: Vec<SimPoint>,
}
