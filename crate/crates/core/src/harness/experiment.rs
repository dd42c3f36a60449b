//! Approximation-ratio experiments over channel realizations.
//!
//! Realization `r` always uses instance seed `sub_seed(seed, INSTANCE, r)` and
//! optimizer seed `sub_seed(seed, OPTIMIZER, r)`, independent of `p` and SNR,
//! so every depth sees the same channel draws. Results are reduced in
//! realization order, which keeps the output byte-stable.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constellation::{generate_instance, ChannelKind, JointConstellation};
use crate::objective::clause_weights;
use crate::optimizer::{DEFAULT_EVALS_PER_RUN, DEFAULT_TOL};
use crate::rng::{stream, sub_seed};
use crate::{Error, Result};

use super::detect::{cml_from_weights, ParameterMode, QmlOptions, QmlProblem};
use super::{approximation_ratio, fmt_f64, parse_joint};

/// Run-count checkpoints reported by the ratio-versus-runs table.
pub const RUN_CHECKPOINTS: [usize; 11] = [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000];

fn default_one() -> usize {
    1
}
fn default_evals() -> usize {
    DEFAULT_EVALS_PER_RUN
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_shots() -> u64 {
    1024
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Constellation spec as accepted by [`parse_joint`].
    pub constellation: String,
    #[serde(default = "default_one")]
    pub n_tx: usize,
    #[serde(default = "default_one")]
    pub n_rx: usize,
    pub channel: ChannelKind,
    pub snr_db: Vec<f64>,
    pub p: Vec<usize>,
    pub runs: usize,
    pub realizations: usize,
    pub seed: u64,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default = "default_evals")]
    pub evals_per_run: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub mode: ParameterMode,
    /// Overrides [`RUN_CHECKPOINTS`] when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<usize>>,
}

impl ExperimentConfig {
    /// Full-budget protocol: QPSK, 15 dB, 100 realizations, 2000 runs.
    pub fn full_preset(channel: ChannelKind) -> Self {
        Self {
            constellation: "qpsk".into(),
            n_tx: 1,
            n_rx: 1,
            channel,
            snr_db: vec![15.0],
            p: vec![1, 2, 3, 4],
            runs: 2000,
            realizations: 100,
            seed: 2024,
            shots: default_shots(),
            evals_per_run: DEFAULT_EVALS_PER_RUN,
            tol: DEFAULT_TOL,
            mode: ParameterMode::Shared,
            checkpoints: None,
        }
    }

    /// Reduced protocol for continuous integration: 20 realizations, 200 runs.
    pub fn ci_preset(channel: ChannelKind) -> Self {
        Self {
            runs: 200,
            realizations: 20,
            ..Self::full_preset(channel)
        }
    }

    pub fn validate(&self) -> Result<JointConstellation> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        if self.runs == 0 || self.realizations == 0 || self.shots == 0 || self.n_rx == 0 || self.n_tx == 0 {
            return bad("runs, realizations, shots, n_tx and n_rx must all be at least 1");
        }
        if self.p.is_empty() || self.p.contains(&0) {
            return bad("p list must be non-empty with every depth >= 1");
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| s.is_nan()) {
            return bad("snr list must be non-empty and numeric");
        }
        if self.evals_per_run == 0 || self.tol.is_nan() || self.tol < 0.0 {
            return bad("evals_per_run must be positive and tol non-negative");
        }
        parse_joint(&self.constellation, self.n_tx).map_err(|e| match e {
            Error::SizeCap { .. } => e,
            other => Error::Config(other.to_string()),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    fn checkpoints(&self) -> Vec<usize> {
        let mut c: Vec<usize> = self
            .checkpoints
            .clone()
            .unwrap_or_else(|| RUN_CHECKPOINTS.to_vec())
            .into_iter()
            .filter(|&r| r >= 1 && r <= self.runs)
            .collect();
        if !c.contains(&self.runs) {
            c.push(self.runs);
        }
        c.sort_unstable();
        c.dedup();
        c
    }
}

/// Best-so-far ratio after each run for one realization.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizationTrace {
    pub realization: usize,
    pub f_cml: f64,
    pub rho_by_runs: Vec<f64>,
}

/// Runs every realization at depth `p` and SNR `snr_db`.
pub fn realization_traces(config: &ExperimentConfig, p: usize, snr_db: f64) -> Result<Vec<RealizationTrace>> {
    let joint = config.validate()?;
    (0..config.realizations)
        .into_par_iter()
        .map(|r| {
            let instance = generate_instance(
                &joint,
                config.n_rx,
                config.channel,
                snr_db,
                sub_seed(config.seed, stream::INSTANCE, r as u64),
            )?;
            let weights = clause_weights(&instance, &joint)?;
            let cml = cml_from_weights(&weights);
            let problem = QmlProblem::new(&weights, &joint)?;
            let opts = QmlOptions {
                p,
                runs: config.runs,
                evals_per_run: config.evals_per_run,
                tol: config.tol,
                shots: config.shots,
                seed: sub_seed(config.seed, stream::OPTIMIZER, r as u64),
                mode: config.mode,
            };
            let optimum = problem.optimize(&opts)?;
            Ok(RealizationTrace {
                realization: r,
                f_cml: cml.value,
                rho_by_runs: optimum
                    .trace
                    .iter()
                    .map(|&f| approximation_ratio(cml.value, f))
                    .collect(),
            })
        })
        .collect()
}

/// Mean, sample standard deviation and median.
pub fn summarize(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };
    (mean, var.sqrt(), median)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunsRow {
    pub p: usize,
    pub runs: usize,
    pub mean_rho: f64,
    pub std_rho: f64,
    pub median_rho: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunsTable {
    pub rows: Vec<RunsRow>,
}

impl RunsTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,runs,mean_rho,std_rho,median_rho\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.p,
                r.runs,
                fmt_f64(r.mean_rho),
                fmt_f64(r.std_rho),
                fmt_f64(r.median_rho)
            );
        }
        out
    }

    /// Row at depth `p` with the largest run count.
    pub fn final_row(&self, p: usize) -> Option<&RunsRow> {
        self.rows.iter().filter(|r| r.p == p).max_by_key(|r| r.runs)
    }
}

/// Mean ratio versus run count for each depth at the first configured SNR.
pub fn experiment_ratio_vs_runs(config: &ExperimentConfig) -> Result<RunsTable> {
    config.validate()?;
    let snr = config.snr_db[0];
    let checkpoints = config.checkpoints();
    let mut rows = Vec::new();
    for &p in &config.p {
        let traces = realization_traces(config, p, snr)?;
        for &c in &checkpoints {
            let values: Vec<f64> = traces.iter().map(|t| t.rho_by_runs[c - 1]).collect();
            let (mean_rho, std_rho, median_rho) = summarize(&values);
            rows.push(RunsRow {
                p,
                runs: c,
                mean_rho,
                std_rho,
                median_rho,
            });
        }
    }
    Ok(RunsTable { rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrRow {
    pub p: usize,
    pub snr_db: f64,
    pub mean_rho: f64,
    pub std_rho: f64,
    pub median_rho: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrTable {
    pub rows: Vec<SnrRow>,
}

impl SnrTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,snr_db,mean_rho,std_rho,median_rho\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.p,
                fmt_f64(r.snr_db),
                fmt_f64(r.mean_rho),
                fmt_f64(r.std_rho),
                fmt_f64(r.median_rho)
            );
        }
        out
    }

    /// `max − min` of the mean ratio over SNR at depth `p`.
    pub fn spread(&self, p: usize) -> f64 {
        let v: Vec<f64> = self.rows.iter().filter(|r| r.p == p).map(|r| r.mean_rho).collect();
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }
}

/// Mean ratio at the full run budget for every `(p, SNR)` pair.
pub fn experiment_ratio_vs_snr(config: &ExperimentConfig) -> Result<SnrTable> {
    config.validate()?;
    let mut rows = Vec::new();
    for &p in &config.p {
        for &snr in &config.snr_db {
            let traces = realization_traces(config, p, snr)?;
            let values: Vec<f64> = traces
                .iter()
                .map(|t| *t.rho_by_runs.last().expect("runs >= 1"))
                .collect();
            let (mean_rho, std_rho, median_rho) = summarize(&values);
            rows.push(SnrRow {
                p,
                snr_db: snr,
                mean_rho,
                std_rho,
                median_rho,
            });
        }
    }
    Ok(SnrTable { rows })
}
