//! Derivative-free minimisation of QAOA expectations: a Nelder–Mead simplex
//! with seeded multi-start restarts.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{rng_from_seed, stream, sub_seed};
use crate::{Error, Result};

pub const DEFAULT_EVALS_PER_RUN: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-6;
/// Edge length of the initial simplex.
pub const INITIAL_STEP: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalResult {
    pub params: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder–Mead from `start`. Stops when every vertex lies within `tol` of the
/// best vertex or after `max_evals` evaluations. The returned point only
/// changes when a strictly smaller value is seen.
pub fn minimize_local<F>(objective: F, start: &[f64], max_evals: usize, tol: f64) -> Result<LocalResult>
where
    F: Fn(&[f64]) -> f64,
{
    let n = start.len();
    if n == 0 {
        return Err(Error::InvalidArgument("nothing to optimise".into()));
    }
    if max_evals < n + 2 {
        return Err(Error::InvalidArgument(format!(
            "evaluation budget {max_evals} is below {} for {n} parameters",
            n + 2
        )));
    }
    let mut tracker = Tracker {
        evals: 0,
        best: (start.to_vec(), f64::INFINITY),
    };
    let eval = |x: &[f64], t: &mut Tracker| {
        t.evals += 1;
        let v = objective(x);
        if v < t.best.1 || t.evals == 1 {
            t.best = (x.to_vec(), v);
        }
        v
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(start, &mut tracker);
    simplex.push((start.to_vec(), v0));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += INITIAL_STEP;
        let v = eval(&x, &mut tracker);
        simplex.push((x, v));
    }

    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if diameter < tol {
            converged = true;
            break;
        }
        if tracker.evals >= max_evals {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|(x, _)| x[d]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let toward = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (w - c)).collect() };

        let xr = toward(-1.0);
        let fr = eval(&xr, &mut tracker);
        if fr < simplex[0].1 {
            if tracker.evals >= max_evals {
                simplex[n] = (xr, fr);
                continue;
            }
            let xe = toward(-2.0);
            let fe = eval(&xe, &mut tracker);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            if tracker.evals >= max_evals {
                continue;
            }
            let (xc, fc) = if fr < worst.1 {
                let xc = toward(-0.5);
                let fc = eval(&xc, &mut tracker);
                (xc, fc)
            } else {
                let xc = toward(0.5);
                let fc = eval(&xc, &mut tracker);
                (xc, fc)
            };
            if fc < fr.min(worst.1) {
                simplex[n] = (xc, fc);
            } else {
                let anchor = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    if tracker.evals >= max_evals {
                        break;
                    }
                    let x: Vec<f64> = anchor.iter().zip(&vertex.0).map(|(a, v)| a + 0.5 * (v - a)).collect();
                    let v = eval(&x, &mut tracker);
                    *vertex = (x, v);
                }
            }
        }
    }
    Ok(LocalResult {
        params: tracker.best.0,
        value: tracker.best.1,
        evaluations: tracker.evals,
        converged,
    })
}

struct Tracker {
    evals: usize,
    best: (Vec<f64>, f64),
}

/// Best result over several independent restarts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationRun {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    pub evaluations: usize,
    /// `(run index, best value over runs 0..=run)`.
    pub trace: Vec<(usize, f64)>,
    /// Per-run local minima in run order.
    pub run_values: Vec<f64>,
}

impl OptimizationRun {
    /// Best value after the first `runs` restarts.
    pub fn best_after(&self, runs: usize) -> f64 {
        self.trace[runs.clamp(1, self.trace.len()) - 1].1
    }
}

/// Uniform start point in `[0, π]^{2p}`, ordered `[γ_1..γ_p, β_1..β_p]`.
pub fn random_start(p: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..2 * p).map(|_| rng.random_range(0.0..PI)).collect()
}

/// `runs` Nelder–Mead searches from independent uniform starts. Run `r`
/// depends only on `(seed, r)`, so the result is identical for any thread
/// count.
pub fn multi_start<F>(objective: F, p: usize, runs: usize, evals_per_run: usize, seed: u64) -> Result<OptimizationRun>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    multi_start_with_tol(objective, p, runs, evals_per_run, DEFAULT_TOL, seed)
}

pub fn multi_start_with_tol<F>(
    objective: F,
    p: usize,
    runs: usize,
    evals_per_run: usize,
    tol: f64,
    seed: u64,
) -> Result<OptimizationRun>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if runs == 0 || p == 0 {
        return Err(Error::InvalidArgument("need p >= 1 and at least one run".into()));
    }
    let results = (0..runs)
        .into_par_iter()
        .map(|r| {
            minimize_local(
                &objective,
                &random_start(p, sub_seed(seed, stream::START, r as u64)),
                evals_per_run,
                tol,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_runs(results))
}

fn merge_runs(results: Vec<LocalResult>) -> OptimizationRun {
    let mut best: Option<&LocalResult> = None;
    let mut trace = Vec::with_capacity(results.len());
    for (r, res) in results.iter().enumerate() {
        if best.is_none_or(|b| res.value < b.value) {
            best = Some(res);
        }
        trace.push((r, best.map_or(f64::INFINITY, |b| b.value)));
    }
    let best = best.expect("at least one run");
    OptimizationRun {
        best_params: best.params.clone(),
        best_value: best.value,
        evaluations: results.iter().map(|r| r.evaluations).sum(),
        trace,
        run_values: results.iter().map(|r| r.value).collect(),
    }
}
