//! Numerical check of the coefficient-cancellation rules and degree bounds.
//!
//! Each trial draws a Rayleigh instance, expands it with the reference
//! expansion (no pruning) and compares every predicted-zero coefficient and
//! the polynomial degree against the prediction.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constellation::{generate_instance, ChannelKind, JointConstellation};
use crate::objective::{brute_coefficients, clause_weights, predict_zero_monomials, ZeroRule, PRUNE_TOL};
use crate::rng::{stream, sub_seed};
use crate::Result;

/// SNR of the verification draws; the rules hold for any value.
const VERIFY_SNR_DB: f64 = 10.0;
/// Fraction of trials that must reach the degree bound exactly.
pub const DEGREE_HIT_FRACTION: f64 = 0.99;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleCheck {
    pub rule: ZeroRule,
    pub subsets: usize,
    /// Largest `|coefficient| / max clause weight` seen over all trials.
    pub max_rel_coeff: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecReport {
    pub constellation: String,
    pub trials: usize,
    pub rules: Vec<RuleCheck>,
    pub degree_bound: usize,
    pub degree_min: usize,
    pub degree_max: usize,
    /// Fraction of trials whose degree equals the bound.
    pub degree_hit_fraction: f64,
    pub degree_pass: bool,
}

impl SpecReport {
    pub fn pass(&self) -> bool {
        self.degree_pass && self.rules.iter().all(|r| r.pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub specs: Vec<SpecReport>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.specs.iter().all(SpecReport::pass)
    }

    /// One line per rule and one per degree check.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
        for s in &self.specs {
            for r in &s.rules {
                let _ = writeln!(
                    out,
                    "{} {} {}: {} subsets over {} trials, max |coeff|/max weight = {:.3e}",
                    verdict(r.pass),
                    s.constellation,
                    r.rule.name(),
                    r.subsets,
                    s.trials,
                    r.max_rel_coeff
                );
            }
            let _ = writeln!(
                out,
                "{} {} degree: bound {}, observed {}..={}, at bound in {:.1}% of trials",
                verdict(s.degree_pass),
                s.constellation,
                s.degree_bound,
                s.degree_min,
                s.degree_max,
                100.0 * s.degree_hit_fraction
            );
        }
        out
    }
}

/// Runs `trials` random instances per joint constellation.
pub fn verify_theorems(specs: &[JointConstellation], trials: usize, seed: u64) -> Result<VerifyReport> {
    let specs = specs
        .iter()
        .enumerate()
        .map(|(k, joint)| verify_one(joint, trials, sub_seed(seed, stream::INSTANCE, k as u64)))
        .collect::<Result<_>>()?;
    Ok(VerifyReport { seed, specs })
}

fn verify_one(joint: &JointConstellation, trials: usize, seed: u64) -> Result<SpecReport> {
    let prediction = predict_zero_monomials(joint)?;
    let n_rx = joint.n_tx();
    // Per trial: (max relative coefficient per predicted subset, degree).
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| {
            let inst = generate_instance(
                joint,
                n_rx,
                ChannelKind::Rayleigh,
                VERIFY_SNR_DB,
                sub_seed(seed, 0, t as u64),
            )?;
            let weights = clause_weights(&inst, joint)?;
            let scale = weights.max_weight();
            let coeffs = brute_coefficients(&weights);
            let rel: Vec<f64> = prediction
                .predicted_zero
                .iter()
                .map(|&(m, _)| coeffs[m as usize].abs() / scale)
                .collect();
            let degree = coeffs
                .iter()
                .enumerate()
                .skip(1)
                .filter(|(_, c)| c.abs() > PRUNE_TOL * scale)
                .map(|(m, _)| (m as u32).count_ones() as usize)
                .max()
                .unwrap_or(0);
            Ok((rel, degree))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut by_rule: BTreeMap<ZeroRule, (usize, f64)> = BTreeMap::new();
    for &(_, rule) in &prediction.predicted_zero {
        by_rule.entry(rule).or_insert((0, 0.0)).0 += 1;
    }
    for (rel, _) in &per_trial {
        for (&(_, rule), &r) in prediction.predicted_zero.iter().zip(rel) {
            let e = by_rule.get_mut(&rule).expect("rule registered");
            e.1 = e.1.max(r);
        }
    }
    let degrees: Vec<usize> = per_trial.iter().map(|(_, d)| *d).collect();
    let hits = degrees.iter().filter(|&&d| d == prediction.degree_bound).count();
    let degree_max = degrees.iter().copied().max().unwrap_or(0);
    let hit_fraction = if trials == 0 { 1.0 } else { hits as f64 / trials as f64 };
    Ok(SpecReport {
        constellation: joint.label(),
        trials,
        rules: by_rule
            .into_iter()
            .map(|(rule, (subsets, max_rel_coeff))| RuleCheck {
                rule,
                subsets,
                max_rel_coeff,
                pass: max_rel_coeff < PRUNE_TOL,
            })
            .collect(),
        degree_bound: prediction.degree_bound,
        degree_min: degrees.iter().copied().min().unwrap_or(0),
        degree_max,
        degree_hit_fraction: hit_fraction,
        degree_pass: degree_max <= prediction.degree_bound && hit_fraction >= DEGREE_HIT_FRACTION,
    })
}

/// Constellations checked when none are given on the command line.
pub fn default_specs() -> Vec<&'static str> {
    vec![
        "qpsk",
        "8qam",
        "16qam",
        "64qam",
        "2xqpsk",
        "qpsk,8qam",
        "3xqpsk",
        "8psk",
    ]
}
