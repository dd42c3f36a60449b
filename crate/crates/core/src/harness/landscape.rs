//! Depth-1 QPSK landscapes: the closed form next to the simulated value.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::constellation::{ChannelInstance, Geometry, JointConstellation};
use crate::hamiltonian::to_ising;
use crate::objective::{clause_weights, fast_coefficients};
use crate::simulator::{align_to_analytic, f1_qpsk_analytic, run_qaoa_diagonal, QaoaSchedule};
use crate::{Error, Result};

use super::fmt_f64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeRow {
    pub gamma: f64,
    pub beta: f64,
    /// Closed-form value on the literature's scale.
    pub f1_analytic: f64,
    /// Simulated value mapped onto the same scale.
    pub f1_simulated: f64,
    /// Raw simulated `F_1(2γ, β)` with every constant retained.
    pub expectation: f64,
}

/// `grid_n × grid_n` samples over `[0, π]²`, endpoints included, `γ` outer.
pub fn landscape_f1(
    instance: &ChannelInstance,
    joint: &JointConstellation,
    grid_n: usize,
) -> Result<Vec<LandscapeRow>> {
    let c = &joint.components()[0];
    if joint.n_tx() != 1 || c.bits_per_symbol() != 2 || c.geometry() != Geometry::Rectangular {
        return Err(Error::InvalidArgument(
            "landscapes need a single-antenna QPSK instance".into(),
        ));
    }
    if grid_n < 2 {
        return Err(Error::InvalidArgument("grid needs at least 2 points per axis".into()));
    }
    let weights = clause_weights(instance, joint)?;
    let dense = fast_coefficients(&weights);
    let (d0, d1, d01) = (dense[0b10], dense[0b01], dense[0b11]);
    let poly = crate::objective::fast_expand(&weights, joint)?;
    let ising = to_ising(&poly);
    let diag = ising.diagonal();
    let step = PI / (grid_n - 1) as f64;
    let mut rows = Vec::with_capacity(grid_n * grid_n);
    for i in 0..grid_n {
        let gamma = i as f64 * step;
        for j in 0..grid_n {
            let beta = j as f64 * step;
            let schedule = QaoaSchedule::new(vec![2.0 * gamma], vec![beta])?;
            let expectation = run_qaoa_diagonal(&diag, &schedule)?.expectation_diagonal(&diag);
            rows.push(LandscapeRow {
                gamma,
                beta,
                f1_analytic: f1_qpsk_analytic(d0, d1, d01, gamma, beta),
                f1_simulated: align_to_analytic(expectation, ising.constant()),
                expectation,
            });
        }
    }
    Ok(rows)
}

pub fn landscape_csv(rows: &[LandscapeRow]) -> String {
    let mut out = String::from("gamma,beta,f1_analytic,f1_simulated,expectation\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(r.gamma),
            fmt_f64(r.beta),
            fmt_f64(r.f1_analytic),
            fmt_f64(r.f1_simulated),
            fmt_f64(r.expectation)
        );
    }
    out
}

/// Grid cell with the smallest closed-form value.
pub fn global_minimum(rows: &[LandscapeRow]) -> Option<&LandscapeRow> {
    rows.iter().min_by(|a, b| a.f1_analytic.total_cmp(&b.f1_analytic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{generate_instance, ChannelKind, Constellation};

    #[test]
    fn analytic_and_simulated_agree() {
        let j = JointConstellation::single(Constellation::build_qpsk());
        let inst = generate_instance(&j, 1, ChannelKind::Rayleigh, 10.0, 100).unwrap();
        let rows = landscape_f1(&inst, &j, 21).unwrap();
        assert_eq!(rows.len(), 441);
        for r in &rows {
            assert!((r.f1_analytic - r.f1_simulated).abs() < 1e-8);
        }
        for r in rows.iter().filter(|r| r.beta == 0.0 || (r.beta - PI).abs() < 1e-12) {
            assert!(r.f1_analytic.abs() < 1e-12);
        }
        assert!(landscape_csv(&rows).starts_with("gamma,beta,f1_analytic,f1_simulated,expectation\n"));
    }

    #[test]
    fn rejects_non_qpsk() {
        let j = JointConstellation::single(Constellation::build_rect_qam(2, 2).unwrap());
        let inst = generate_instance(&j, 1, ChannelKind::Awgn, 10.0, 1).unwrap();
        assert!(landscape_f1(&inst, &j, 5).is_err());
    }
}
