//! Parameter sweeps over a bounded worker pool, and the results CSV.
//!
//! Every (value, run) job is seeded from `(seed, run)` alone and results are
//! collected in job order, so the CSV does not depend on the number of
//! workers.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use bandit_lab_core::model::{FeedbackModel, ModelConfig};
use bandit_lab_core::oracle::{self, OracleSolution};
use bandit_lab_core::pipeline::{run_pipeline, Algo, RunReport};
use bandit_lab_core::rng::derive_seed;
use bandit_lab_core::FeedbackMode;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

/// Environment variable capping the number of workers.
pub const THREADS_ENV: &str = "BANDIT_LAB_THREADS";

pub fn threads_from_env() -> LabResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(LabError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// A pool with `threads` workers, or rayon's default when `None`.
pub fn worker_pool(threads: Option<usize>) -> LabResult<ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    Ok(b.build()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    N,
    B,
    P1,
    P2,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::N => "n",
            Axis::B => "b",
            Axis::P1 => "p1",
            Axis::P2 => "p2",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axis {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        match s.to_ascii_lowercase().as_str() {
            "n" => Ok(Axis::N),
            "b" => Ok(Axis::B),
            "p1" => Ok(Axis::P1),
            "p2" => Ok(Axis::P2),
            _ => Err(LabError::Usage(format!(
                "axis must be one of n, b, p1, p2; got {s:?}"
            ))),
        }
    }
}

/// One line of the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub algo: String,
    pub axis: String,
    pub value: f64,
    pub run: u64,
    pub seed: u64,
    pub total_reward: f64,
    pub delta_regret: f64,
    pub waiting_time: u64,
    pub n_users: usize,
    #[serde(rename = "size_L")]
    pub size_l: usize,
    #[serde(rename = "K")]
    pub k: usize,
}

impl CsvRow {
    pub fn from_report(axis: Axis, value: f64, run: u64, rep: &RunReport) -> Self {
        Self {
            algo: rep.algo.to_string(),
            axis: axis.to_string(),
            value,
            run,
            seed: rep.seed,
            total_reward: rep.total_reward,
            delta_regret: rep.delta_regret,
            waiting_time: rep.waiting_time,
            n_users: rep.n,
            size_l: rep.size_l,
            k: rep.k,
        }
    }
}

pub const CSV_HEADER: &str =
    "algo,axis,value,run,seed,total_reward,delta_regret,waiting_time,n_users,size_L,K";

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub cfg: ModelConfig,
    pub algos: Vec<Algo>,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub runs: u64,
    /// Population size when the axis is not `n`.
    pub n: usize,
    pub seed: u64,
}

/// Configuration and population size at one point of the axis.
pub fn apply_axis(
    cfg: &ModelConfig,
    n: usize,
    axis: Axis,
    value: f64,
) -> LabResult<(ModelConfig, usize)> {
    let mut cfg = cfg.clone();
    let mut n = n;
    let whole = |what: &str| -> LabResult<u64> {
        if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
            Ok(value as u64)
        } else {
            Err(LabError::Usage(format!(
                "{what} values must be nonnegative integers, got {value}"
            )))
        }
    };
    match axis {
        Axis::N => n = whole("n")? as usize,
        Axis::B => cfg.budget = whole("b")? as u32,
        Axis::P1 | Axis::P2 => {
            if cfg.feedback.mode != FeedbackMode::Soft {
                return Err(LabError::Usage(
                    "p1/p2 sweeps need a soft-feedback configuration".into(),
                ));
            }
            let (p1, p2) = match axis {
                Axis::P1 => (value, cfg.feedback.p2),
                _ => (cfg.feedback.p1, value),
            };
            cfg.feedback = FeedbackModel::soft(p1, p2);
        }
    }
    Ok((cfg, n))
}

/// Runs every `(algo, value, run)` job. Rows come back ordered by value,
/// then algorithm, then run.
pub fn sweep(plan: &SweepPlan, pool: &ThreadPool) -> LabResult<Vec<CsvRow>> {
    if plan.values.is_empty() {
        return Err(LabError::Usage("sweep needs at least one value".into()));
    }
    if plan.algos.is_empty() {
        return Err(LabError::Usage("sweep needs at least one algorithm".into()));
    }
    let points: Vec<(ModelConfig, usize)> = plan
        .values
        .iter()
        .map(|&v| apply_axis(&plan.cfg, plan.n, plan.axis, v))
        .collect::<LabResult<_>>()?;
    pool.install(|| {
        let tables: Vec<OracleSolution> = points
            .par_iter()
            .map(|(cfg, _)| oracle::solve(cfg))
            .collect::<Result<_, _>>()?;
        let jobs: Vec<(usize, Algo, u64)> = (0..points.len())
            .flat_map(|i| {
                plan.algos
                    .iter()
                    .flat_map(move |&a| (0..plan.runs).map(move |r| (i, a, r)))
            })
            .collect();
        jobs.par_iter()
            .map(|&(i, algo, run)| {
                let (cfg, n) = &points[i];
                let rep = run_pipeline(cfg, algo, *n, derive_seed(plan.seed, run), &tables[i])?;
                Ok(CsvRow::from_report(plan.axis, plan.values[i], run, &rep))
            })
            .collect()
    })
}

pub fn write_csv(w: impl Write, rows: &[CsvRow]) -> LabResult<()> {
    let mut wtr = csv::Writer::from_writer(w);
    if rows.is_empty() {
        wtr.write_record(CSV_HEADER.split(','))?;
    }
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush().map_err(|e| LabError::Csv(e.into()))?;
    Ok(())
}

pub fn read_csv(r: impl Read) -> LabResult<Vec<CsvRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(LabError::Usage(format!(
            "unexpected CSV header {:?}",
            header.join(",")
        )));
    }
    rdr.deserialize()
        .map(|r| r.map_err(LabError::from))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupStats {
    pub value: f64,
    pub runs: usize,
    pub mean: f64,
    pub stdev: f64,
}

/// Mean and sample stdev of `metric` per axis value for one algorithm,
/// in increasing value order.
pub fn group_by_value(
    rows: &[CsvRow],
    algo: &str,
    metric: impl Fn(&CsvRow) -> f64,
) -> Vec<GroupStats> {
    let mut groups: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
    for row in rows.iter().filter(|r| r.algo == algo) {
        groups
            .entry(row.value.to_bits())
            .or_insert_with(|| (row.value, Vec::new()))
            .1
            .push(metric(row));
    }
    let mut out: Vec<GroupStats> = groups
        .into_values()
        .map(|(value, xs)| {
            let (mean, stdev) = bandit_lab_core::metrics::mean_std(&xs);
            GroupStats {
                value,
                runs: xs.len(),
                mean,
                stdev,
            }
        })
        .collect();
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    out
}

/// Fitted exponent of mean δ-regret against `N` for `algo`, from rows of
/// an `n`-axis sweep.
pub fn slope_from_rows(rows: &[CsvRow], algo: &str) -> LabResult<f64> {
    let points: Vec<(f64, f64)> = group_by_value(rows, algo, |r| r.delta_regret)
        .iter()
        .map(|g| (g.value, g.mean))
        .collect();
    if rows
        .iter()
        .any(|r| r.algo == algo && r.axis != Axis::N.as_str())
    {
        return Err(LabError::Usage(
            "slope needs rows from an n-axis sweep".into(),
        ));
    }
    Ok(bandit_lab_core::metrics::regret_slope(&points)?)
}
