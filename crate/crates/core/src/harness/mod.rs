//! End-to-end detectors, experiments and verification on top of the library.

pub mod detect;
pub mod experiment;
pub mod landscape;
pub mod verify;

pub use detect::{cml_detect, qml_detect, CmlResult, DetectionReport, ParameterMode, QmlOptions, QmlProblem};
pub use experiment::{experiment_ratio_vs_runs, experiment_ratio_vs_snr, ExperimentConfig, RunsTable, SnrTable};
pub use landscape::{landscape_f1, LandscapeRow};
pub use verify::{verify_theorems, VerifyReport};

use crate::constellation::{Constellation, JointConstellation};
use crate::{Error, Result};

/// Builds a joint constellation from a CLI-style spec.
///
/// Accepted forms: a single name (`qpsk`, `16qam`, `rect:2x1`, ...), an
/// `<n>x<name>` replication such as `2xqpsk`, or a comma list for
/// heterogeneous antennas (`qpsk,8qam`). `n_tx > 1` replicates a single name.
pub fn parse_joint(spec: &str, n_tx: usize) -> Result<JointConstellation> {
    if n_tx == 0 {
        return Err(Error::InvalidArgument("need at least one transmit antenna".into()));
    }
    let spec = spec.trim();
    if spec.contains([',', '+']) {
        let joint: JointConstellation = spec.parse()?;
        if n_tx != 1 && n_tx != joint.n_tx() {
            return Err(Error::InvalidArgument(format!(
                "`{spec}` lists {} antennas but {n_tx} were requested",
                joint.n_tx()
            )));
        }
        return Ok(joint);
    }
    if let Some((count, rest)) = spec.split_once(['x', 'X']) {
        if let Ok(k) = count.parse::<usize>() {
            if n_tx != 1 {
                return Err(Error::InvalidArgument(format!(
                    "`{spec}` already fixes the antenna count"
                )));
            }
            return JointConstellation::replicate(&rest.parse::<Constellation>()?, k);
        }
    }
    JointConstellation::replicate(&spec.parse::<Constellation>()?, n_tx)
}

/// `f_cml / F`, with `0/0` read as 1.
pub fn approximation_ratio(f_cml: f64, expectation: f64) -> f64 {
    if expectation == 0.0 && f_cml == 0.0 {
        1.0
    } else {
        f_cml / expectation
    }
}

/// Ratio on the literature's scale: both sides drop their constants and the
/// Hamiltonian is doubled, i.e. `(f_cml − c) / (2 (F − K))` with `c` the
/// polynomial constant and `K` the spin constant.
pub fn constant_free_ratio(f_cml: f64, poly_constant: f64, expectation: f64, ising_constant: f64) -> f64 {
    approximation_ratio(f_cml - poly_constant, 2.0 * (expectation - ising_constant))
}

/// Floats in output tables: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
