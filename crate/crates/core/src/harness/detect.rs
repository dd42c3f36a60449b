//! Classical exhaustive ML detection and the QAOA-based detector.

use serde::{Deserialize, Serialize};

use crate::bits::{bits_to_string, index_to_bits};
use crate::constellation::{ChannelInstance, JointConstellation};
use crate::error::check_qubits;
use crate::hamiltonian::{argmin, split_independent, to_ising, IsingHamiltonian, SubsystemSplit};
use crate::objective::{clause_weights, fast_expand, ClauseWeights, MultilinearPolynomial};
use crate::optimizer::{multi_start_with_tol, OptimizationRun, DEFAULT_EVALS_PER_RUN, DEFAULT_TOL};
use crate::rng::{stream, sub_seed};
use crate::simulator::{run_qaoa_diagonal, sample, tensor_embed, QaoaSchedule, StateVector};
use crate::Result;

use super::{approximation_ratio, constant_free_ratio};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmlResult {
    pub index: usize,
    pub bits: Vec<u8>,
    /// Raw summed squared distance of the ML point.
    pub value: f64,
}

/// Exhaustive ML over all joint labels; ties go to the smallest index.
pub fn cml_detect(instance: &ChannelInstance, joint: &JointConstellation) -> Result<CmlResult> {
    check_qubits(joint.total_bits())?;
    Ok(cml_from_weights(&clause_weights(instance, joint)?))
}

pub fn cml_from_weights(weights: &ClauseWeights) -> CmlResult {
    let (index, value) = argmin(&weights.totals());
    CmlResult {
        index,
        bits: index_to_bits(index, weights.n_bits()),
        value,
    }
}

/// How QAOA angles are shared between independent subsystems.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParameterMode {
    /// One schedule drives every subsystem, as in a single circuit acting on
    /// all qubits at once.
    #[default]
    Shared,
    /// Each subsystem gets its own optimised schedule.
    PerPart,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QmlOptions {
    pub p: usize,
    pub runs: usize,
    pub evals_per_run: usize,
    pub tol: f64,
    pub shots: u64,
    pub seed: u64,
    pub mode: ParameterMode,
}

impl Default for QmlOptions {
    fn default() -> Self {
        Self {
            p: 1,
            runs: 100,
            evals_per_run: DEFAULT_EVALS_PER_RUN,
            tol: DEFAULT_TOL,
            shots: 1024,
            seed: 0,
            mode: ParameterMode::Shared,
        }
    }
}

/// Objective, Hamiltonian and independent blocks of one instance, ready for
/// repeated expectation evaluations.
#[derive(Clone, Debug)]
pub struct QmlProblem {
    pub poly: MultilinearPolynomial,
    pub ising: IsingHamiltonian,
    pub split: SubsystemSplit,
    part_diagonals: Vec<Vec<f64>>,
}

/// Outcome of optimising a [`QmlProblem`].
#[derive(Clone, Debug, PartialEq)]
pub struct QmlOptimum {
    /// Best expectation after each run, constants included.
    pub trace: Vec<f64>,
    pub best_value: f64,
    /// One schedule per part (a single shared one in shared mode).
    pub schedules: Vec<QaoaSchedule>,
    pub evaluations: usize,
}

impl QmlProblem {
    pub fn new(weights: &ClauseWeights, joint: &JointConstellation) -> Result<Self> {
        let poly = fast_expand(weights, joint)?;
        let ising = to_ising(&poly);
        let split = split_independent(&ising);
        let part_diagonals = split.parts.iter().map(|p| p.hamiltonian.diagonal()).collect();
        Ok(Self {
            poly,
            ising,
            split,
            part_diagonals,
        })
    }

    pub fn n_parts(&self) -> usize {
        self.split.parts.len()
    }

    fn part_expectation(&self, k: usize, schedule: &QaoaSchedule) -> f64 {
        let state = run_qaoa_diagonal(&self.part_diagonals[k], schedule).expect("part diagonal is a valid register");
        state.expectation_diagonal(&self.part_diagonals[k])
    }

    /// `F_p` with one schedule applied to every part.
    pub fn expectation(&self, schedule: &QaoaSchedule) -> f64 {
        self.split.constant
            + (0..self.n_parts())
                .map(|k| self.part_expectation(k, schedule))
                .sum::<f64>()
    }

    /// `F_p` with a schedule per part.
    pub fn expectation_per_part(&self, schedules: &[QaoaSchedule]) -> f64 {
        self.split.constant
            + schedules
                .iter()
                .enumerate()
                .map(|(k, s)| self.part_expectation(k, s))
                .sum::<f64>()
    }

    pub fn optimize(&self, opts: &QmlOptions) -> Result<QmlOptimum> {
        let seed = sub_seed(opts.seed, stream::OPTIMIZER, 0);
        let params = |x: &[f64]| QaoaSchedule::from_params(x).expect("even-length parameter vector");
        match opts.mode {
            ParameterMode::Shared => {
                let run = multi_start_with_tol(
                    |x: &[f64]| self.expectation(&params(x)),
                    opts.p,
                    opts.runs,
                    opts.evals_per_run,
                    opts.tol,
                    seed,
                )?;
                Ok(QmlOptimum {
                    trace: run.trace.iter().map(|&(_, v)| v).collect(),
                    best_value: run.best_value,
                    schedules: vec![params(&run.best_params)],
                    evaluations: run.evaluations,
                })
            }
            ParameterMode::PerPart => {
                let runs: Vec<OptimizationRun> = (0..self.n_parts())
                    .map(|k| {
                        multi_start_with_tol(
                            |x: &[f64]| self.part_expectation(k, &params(x)),
                            opts.p,
                            opts.runs,
                            opts.evals_per_run,
                            opts.tol,
                            sub_seed(seed, stream::OPTIMIZER, k as u64 + 1),
                        )
                    })
                    .collect::<Result<_>>()?;
                let trace = (0..opts.runs)
                    .map(|r| self.split.constant + runs.iter().map(|run| run.trace[r].1).sum::<f64>())
                    .collect::<Vec<_>>();
                Ok(QmlOptimum {
                    best_value: *trace.last().unwrap_or(&self.split.constant),
                    trace,
                    schedules: runs.iter().map(|r| params(&r.best_params)).collect(),
                    evaluations: runs.iter().map(|r| r.evaluations).sum(),
                })
            }
        }
    }

    /// Joint output state of the optimised circuit(s). Qubits outside every
    /// part stay in `|+⟩`.
    pub fn joint_state(&self, optimum: &QmlOptimum) -> Result<StateVector> {
        let states = (0..self.n_parts())
            .map(|k| {
                let schedule = optimum.schedules.get(k).unwrap_or(&optimum.schedules[0]);
                run_qaoa_diagonal(&self.part_diagonals[k], schedule)
            })
            .collect::<Result<Vec<_>>>()?;
        let parts: Vec<(&[usize], &StateVector)> = self
            .split
            .parts
            .iter()
            .zip(&states)
            .map(|(p, s)| (p.qubits.as_slice(), s))
            .collect();
        tensor_embed(self.split.n_qubits, &parts)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub constellation: String,
    pub n_tx: usize,
    pub n_rx: usize,
    pub channel: String,
    /// `null` for a noiseless instance.
    pub snr_db: Option<f64>,
    pub instance_seed: u64,
    pub tx_bits: String,
    pub cml_bits: String,
    pub f_cml: f64,
    pub qml_bits: String,
    /// Objective at the sampled bit string.
    pub f_qml_bits: f64,
    /// `F_p` at the optimised angles, constants included.
    pub f_qml_expectation: f64,
    pub rho: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant_free_rho: Option<f64>,
    pub p: usize,
    pub runs_used: usize,
    pub evaluations: usize,
    pub shots: u64,
    pub mode: ParameterMode,
    pub n_parts: usize,
    pub gammas: Vec<Vec<f64>>,
    pub betas: Vec<Vec<f64>>,
}

/// Optimises the QAOA angles, samples the optimised state and compares with
/// exhaustive ML.
pub fn qml_detect(
    instance: &ChannelInstance,
    joint: &JointConstellation,
    opts: &QmlOptions,
) -> Result<DetectionReport> {
    check_qubits(joint.total_bits())?;
    let weights = clause_weights(instance, joint)?;
    let cml = cml_from_weights(&weights);
    let problem = QmlProblem::new(&weights, joint)?;
    let optimum = problem.optimize(opts)?;
    let state = problem.joint_state(&optimum)?;
    let hist = sample(&state, opts.shots, sub_seed(opts.seed, stream::SHOTS, 0))?;
    let qml_index = hist.mode().unwrap_or(0);
    let n = joint.total_bits();
    Ok(DetectionReport {
        constellation: joint.label(),
        n_tx: joint.n_tx(),
        n_rx: instance.n_rx(),
        channel: instance.channel_kind.to_string(),
        snr_db: instance.snr_db.is_finite().then_some(instance.snr_db),
        instance_seed: instance.seed,
        tx_bits: bits_to_string(&instance.tx_bits),
        cml_bits: bits_to_string(&cml.bits),
        f_cml: cml.value,
        qml_bits: bits_to_string(&index_to_bits(qml_index, n)),
        f_qml_bits: weights.totals()[qml_index],
        f_qml_expectation: optimum.best_value,
        rho: approximation_ratio(cml.value, optimum.best_value),
        constant_free_rho: Some(constant_free_ratio(
            cml.value,
            problem.poly.constant(),
            optimum.best_value,
            problem.ising.constant(),
        )),
        p: opts.p,
        runs_used: opts.runs,
        evaluations: optimum.evaluations,
        shots: opts.shots,
        mode: opts.mode,
        n_parts: problem.n_parts(),
        gammas: optimum.schedules.iter().map(|s| s.gammas.clone()).collect(),
        betas: optimum.schedules.iter().map(|s| s.betas.clone()).collect(),
    })
}
