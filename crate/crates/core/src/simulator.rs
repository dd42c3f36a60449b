//! Dense statevector QAOA.
//!
//! Amplitude `k` belongs to basis state `|b_0 … b_{N-1}⟩` with `b_0` the most
//! significant bit of `k`, the same order as constellation labels. A depth-`p`
//! circuit applies `e^{−iγ_k H}` then `e^{−iβ_k Σ σ_x}` for `k = 1..p`,
//! starting from the uniform superposition.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::bits::{index_to_string, mask_to_vars, var_mask};
use crate::constellation::Complex;
use crate::error::check_qubits;
use crate::hamiltonian::IsingHamiltonian;
use crate::objective::MultilinearPolynomial;
use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Allowed drift of `Σ|amp|²` from 1.
pub const NORM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex>,
}

impl StateVector {
    /// `2^{−n/2}` on every basis state.
    pub fn uniform(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("need at least one qubit".into()));
        }
        check_qubits(n_qubits)?;
        let a = (1usize << n_qubits) as f64;
        Ok(Self {
            n_qubits,
            amps: vec![Complex::new(a.sqrt().recip(), 0.0); 1 << n_qubits],
        })
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        if index >= 1 << n_qubits {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range")));
        }
        let mut amps = vec![Complex::new(0.0, 0.0); 1 << n_qubits];
        amps[index] = Complex::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two and the norm 1.
    pub fn from_amplitudes(amps: Vec<Complex>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes is not a power of two",
                amps.len()
            )));
        }
        let n_qubits = amps.len().trailing_zeros() as usize;
        check_qubits(n_qubits)?;
        let s = Self { n_qubits, amps };
        if (s.norm_sqr() - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!("state norm² {} is not 1", s.norm_sqr())));
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `amp[b] ← amp[b] · e^{−iγ·diag[b]}`.
    pub fn apply_diagonal_phase(&mut self, diagonal: &[f64], gamma: f64) -> Result<()> {
        if diagonal.len() != self.amps.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amps.len(),
                found: diagonal.len(),
            });
        }
        for (a, &e) in self.amps.iter_mut().zip(diagonal) {
            *a *= Complex::from_polar(1.0, -gamma * e);
        }
        Ok(())
    }

    /// Phase separation `e^{−iγ H_f}` with eigenvalues `f(b)`.
    pub fn apply_phase_layer(&mut self, poly: &MultilinearPolynomial, gamma: f64) -> Result<()> {
        if poly.n_vars() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: poly.n_vars(),
            });
        }
        self.apply_diagonal_phase(&poly.values(), gamma)
    }

    /// `e^{−iβσ_x}` on every qubit.
    pub fn apply_mixer_layer(&mut self, beta: f64) {
        let (s, c) = beta.sin_cos();
        let mis = Complex::new(0.0, -s);
        for q in 0..self.n_qubits {
            let bit = 1usize << q;
            for x in 0..self.amps.len() {
                if x & bit == 0 {
                    let (a, b) = (self.amps[x], self.amps[x | bit]);
                    self.amps[x] = a * c + b * mis;
                    self.amps[x | bit] = a * mis + b * c;
                }
            }
        }
    }

    /// `R_z(θ) = diag(e^{−iθ/2}, e^{iθ/2})` on qubit `q`.
    pub fn apply_rz(&mut self, q: usize, theta: f64) {
        let bit = var_mask(q, self.n_qubits) as usize;
        let (lo, hi) = (
            Complex::from_polar(1.0, -theta / 2.0),
            Complex::from_polar(1.0, theta / 2.0),
        );
        for (x, a) in self.amps.iter_mut().enumerate() {
            *a *= if x & bit == 0 { lo } else { hi };
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let cb = var_mask(control, self.n_qubits) as usize;
        let tb = var_mask(target, self.n_qubits) as usize;
        for x in 0..self.amps.len() {
            if x & cb != 0 && x & tb == 0 {
                self.amps.swap(x, x | tb);
            }
        }
    }

    /// `Σ_b |amp[b]|² · diag[b]`.
    pub fn expectation_diagonal(&self, diagonal: &[f64]) -> f64 {
        self.amps.iter().zip(diagonal).map(|(a, e)| a.norm_sqr() * e).sum()
    }

    /// Largest amplitude gap after removing the best global phase.
    pub fn distance_up_to_phase(&self, other: &Self) -> f64 {
        let overlap: Complex = self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum();
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            Complex::new(1.0, 0.0)
        };
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a * phase - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub fn uniform_state(n: usize) -> Result<StateVector> {
    StateVector::uniform(n)
}

/// Angles of a depth-`p` circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QaoaSchedule {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaSchedule {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != betas.len() {
            return Err(Error::InvalidArgument(format!(
                "schedule needs p >= 1 matching angles, got {} gammas and {} betas",
                gammas.len(),
                betas.len()
            )));
        }
        Ok(Self { gammas, betas })
    }

    /// Reads `[γ_1..γ_p, β_1..β_p]`.
    pub fn from_params(params: &[f64]) -> Result<Self> {
        if !params.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument("parameter vector must have even length".into()));
        }
        let p = params.len() / 2;
        Self::new(params[..p].to_vec(), params[p..].to_vec())
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    pub fn to_params(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }
}

/// Depth-`p` QAOA over a precomputed diagonal.
pub fn run_qaoa_diagonal(diagonal: &[f64], schedule: &QaoaSchedule) -> Result<StateVector> {
    if !diagonal.len().is_power_of_two() {
        return Err(Error::InvalidArgument("diagonal length is not a power of two".into()));
    }
    let mut state = StateVector::uniform(diagonal.len().trailing_zeros() as usize)?;
    for (&g, &b) in schedule.gammas.iter().zip(&schedule.betas) {
        state.apply_diagonal_phase(diagonal, g)?;
        state.apply_mixer_layer(b);
    }
    Ok(state)
}

pub fn run_qaoa(poly: &MultilinearPolynomial, schedule: &QaoaSchedule) -> Result<StateVector> {
    check_qubits(poly.n_vars())?;
    run_qaoa_diagonal(&poly.values(), schedule)
}

/// Exact `⟨ψ|H_f|ψ⟩`.
pub fn expectation(state: &StateVector, poly: &MultilinearPolynomial) -> Result<f64> {
    if poly.n_vars() != state.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: state.n_qubits(),
            found: poly.n_vars(),
        });
    }
    Ok(state.expectation_diagonal(&poly.values()))
}

/// Measurement counts keyed by basis index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub n_qubits: usize,
    pub counts: BTreeMap<usize, u64>,
}

impl Histogram {
    pub fn shots(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts.get(&index).copied().unwrap_or(0)
    }

    /// Most frequent outcome, ties to the smallest index.
    pub fn mode(&self) -> Option<usize> {
        self.counts
            .iter()
            .fold(None, |best: Option<(usize, u64)>, (&i, &c)| match best {
                Some((_, bc)) if bc >= c => best,
                _ => Some((i, c)),
            })
            .map(|(i, _)| i)
    }

    /// `bitstring,count` rows in ascending index order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bitstring,count\n");
        for (&i, &c) in &self.counts {
            let _ = writeln!(out, "{},{}", index_to_string(i, self.n_qubits), c);
        }
        out
    }
}

/// `shots` independent computational-basis measurements.
pub fn sample(state: &StateVector, shots: u64, seed: u64) -> Result<Histogram> {
    let dist = WeightedIndex::new(state.probabilities())
        .map_err(|e| Error::InvalidArgument(format!("cannot sample state: {e}")))?;
    let mut rng = rng_from_seed(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        *counts.entry(dist.sample(&mut rng)).or_insert(0) += 1;
    }
    Ok(Histogram {
        n_qubits: state.n_qubits(),
        counts,
    })
}

/// Phase layer built from gates: `R_z(2γ g_l)` per linear term and
/// `CNOT · R_z(2γ g_{l,m}) · CNOT` per coupling. The constant only adds a
/// global phase and is skipped.
pub fn gate_level_phase_layer(state: &mut StateVector, ising: &IsingHamiltonian, gamma: f64) -> Result<()> {
    if ising.n_qubits() != state.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: state.n_qubits(),
            found: ising.n_qubits(),
        });
    }
    if ising.degree() > 2 {
        return Err(Error::InvalidArgument(format!(
            "gate decomposition supports degree <= 2, Hamiltonian has degree {}",
            ising.degree()
        )));
    }
    for (mask, g) in ising.couplings() {
        match *mask_to_vars(mask, ising.n_qubits()).as_slice() {
            [l] => state.apply_rz(l, 2.0 * gamma * g),
            [l, m] => {
                state.apply_cnot(l, m);
                state.apply_rz(m, 2.0 * gamma * g);
                state.apply_cnot(l, m);
            }
            _ => unreachable!("degree checked above"),
        }
    }
    Ok(())
}

/// Closed-form depth-1 expectation for QPSK as stated in the literature,
/// with the objective's constant dropped and `H_f` scaled by 2:
/// `F = Σ_n d̄_n sin(2β) sin(2 d̄_n γ) cos(2 d̄_{01} γ)`.
///
/// Exact when `d̄_{01} = 0`, which Gray labelling guarantees. Relation to the
/// simulated value `F_sim` of `f = c + d̄_0 z_0 + d̄_1 z_1` with Ising
/// constant `K`: `F(γ, β) = 2 · (F_sim(2γ, β) − K)`.
pub fn f1_qpsk_analytic(dbar0: f64, dbar1: f64, dbar01: f64, gamma: f64, beta: f64) -> f64 {
    let common = (2.0 * beta).sin() * (2.0 * dbar01 * gamma).cos();
    dbar0 * common * (2.0 * dbar0 * gamma).sin() + dbar1 * common * (2.0 * dbar1 * gamma).sin()
}

/// Maps a simulated expectation onto the closed-form scale above.
pub fn align_to_analytic(simulated: f64, ising_constant: f64) -> f64 {
    2.0 * (simulated - ising_constant)
}

/// Joint state from independent part states. `parts[k]` lists the global
/// qubits (ascending) of a state over those qubits; every other qubit is `|+⟩`.
pub fn tensor_embed(n_qubits: usize, parts: &[(&[usize], &StateVector)]) -> Result<StateVector> {
    check_qubits(n_qubits)?;
    let mut covered = vec![false; n_qubits];
    for (qubits, state) in parts {
        if qubits.len() != state.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: state.n_qubits(),
                found: qubits.len(),
            });
        }
        for &q in qubits.iter() {
            if q >= n_qubits || covered[q] {
                return Err(Error::InvalidArgument(format!("qubit {q} is out of range or repeated")));
            }
            covered[q] = true;
        }
    }
    let free = covered.iter().filter(|c| !**c).count();
    let free_amp = (0.5f64).powf(free as f64 / 2.0);
    let amps = (0..1usize << n_qubits)
        .map(|x| {
            parts.iter().fold(Complex::new(free_amp, 0.0), |acc, (qubits, state)| {
                let local = qubits
                    .iter()
                    .fold(0, |l, &q| (l << 1) | ((x >> (n_qubits - 1 - q)) & 1));
                acc * state.amplitudes()[local]
            })
        })
        .collect();
    Ok(StateVector { n_qubits, amps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::to_ising;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

    fn qpsk_poly() -> MultilinearPolynomial {
        MultilinearPolynomial::from_terms(2, [(0b10, 1.2), (0b01, 2.0)], 0.74).unwrap()
    }

    #[test]
    fn uniform_amplitudes() {
        let s = uniform_state(1).unwrap();
        for a in s.amplitudes() {
            assert!((a.re - FRAC_1_SQRT_2).abs() < 1e-15);
        }
        let s = uniform_state(3).unwrap();
        assert!(s.probabilities().iter().all(|p| (p - 0.125).abs() < 1e-15));
        assert!(uniform_state(0).is_err());
        assert!(matches!(uniform_state(25), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn zero_angles_are_identity() {
        let mut s = uniform_state(2).unwrap();
        s.apply_phase_layer(&qpsk_poly(), 0.0).unwrap();
        s.apply_mixer_layer(0.0);
        assert!(s.max_abs_diff(&uniform_state(2).unwrap()) < 1e-15);
        let sched = QaoaSchedule::new(vec![0.0], vec![0.0]).unwrap();
        assert!(
            run_qaoa(&qpsk_poly(), &sched)
                .unwrap()
                .max_abs_diff(&uniform_state(2).unwrap())
                < 1e-15
        );
    }

    #[test]
    fn mixer_flips_at_half_pi() {
        let mut s = StateVector::basis(1, 0).unwrap();
        s.apply_mixer_layer(FRAC_PI_2);
        assert!(s.distance_up_to_phase(&StateVector::basis(1, 1).unwrap()) < 1e-12);
        let mut u = uniform_state(2).unwrap();
        u.apply_mixer_layer(FRAC_PI_4);
        assert!(u.probabilities().iter().all(|p| (p - 0.25).abs() < 1e-12));
    }

    #[test]
    fn constant_phase_is_global() {
        let f = MultilinearPolynomial::from_terms(2, [], 3.0).unwrap();
        let mut s = uniform_state(2).unwrap();
        s.apply_phase_layer(&f, 0.7).unwrap();
        assert!(s.distance_up_to_phase(&uniform_state(2).unwrap()) < 1e-12);
    }

    #[test]
    fn expectation_basics() {
        let f = qpsk_poly();
        let u = uniform_state(2).unwrap();
        let mean = f.values().iter().sum::<f64>() / 4.0;
        assert!((expectation(&u, &f).unwrap() - mean).abs() < 1e-12);
        let b = StateVector::basis(2, 2).unwrap();
        assert!((expectation(&b, &f).unwrap() - f.evaluate_index(2)).abs() < 1e-12);
    }

    #[test]
    fn sampling_basis_state_is_deterministic() {
        let h = sample(&StateVector::basis(3, 5).unwrap(), 100, 1).unwrap();
        assert_eq!(h.count(5), 100);
        assert_eq!(h.mode(), Some(5));
        assert_eq!(h.to_csv(), "bitstring,count\n101,100\n");
    }

    #[test]
    fn gate_level_matches_diagonal() {
        let f = MultilinearPolynomial::from_terms(3, [(0b110, 0.8), (0b001, -1.3), (0b100, 0.4)], 0.2).unwrap();
        let ising = to_ising(&f);
        let mut a = uniform_state(3).unwrap();
        a.apply_mixer_layer(0.3);
        let mut b = a.clone();
        a.apply_phase_layer(&f, 0.9).unwrap();
        gate_level_phase_layer(&mut b, &ising, 0.9).unwrap();
        assert!(a.distance_up_to_phase(&b) < 1e-12);
    }

    #[test]
    fn gate_level_rejects_cubic() {
        let f = MultilinearPolynomial::from_terms(3, [(0b111, 1.0)], 0.0).unwrap();
        let mut s = uniform_state(3).unwrap();
        assert!(gate_level_phase_layer(&mut s, &to_ising(&f), 0.1).is_err());
    }

    #[test]
    fn analytic_zero_rows() {
        for g in [0.0, 0.5, 2.0] {
            for b in [0.0, FRAC_PI_2, PI] {
                assert!(f1_qpsk_analytic(1.2, 2.0, 0.0, g, b).abs() < 1e-12);
            }
        }
        assert_eq!(f1_qpsk_analytic(1.2, 2.0, 0.0, 0.0, 0.4), 0.0);
    }

    #[test]
    fn analytic_matches_simulation() {
        let f = qpsk_poly();
        let k = to_ising(&f).constant();
        for (g, b) in [(0.3, 0.2), (1.1, 2.5), (2.9, 0.7)] {
            let sched = QaoaSchedule::new(vec![2.0 * g], vec![b]).unwrap();
            let sim = expectation(&run_qaoa(&f, &sched).unwrap(), &f).unwrap();
            let analytic = f1_qpsk_analytic(1.2, 2.0, 0.0, g, b);
            assert!((align_to_analytic(sim, k) - analytic).abs() < 1e-10);
        }
    }

    #[test]
    fn embed_free_qubits_as_plus() {
        let one = StateVector::basis(1, 1).unwrap();
        let joint = tensor_embed(2, &[(&[1], &one)]).unwrap();
        let p = joint.probabilities();
        assert!((p[0b01] - 0.5).abs() < 1e-15 && (p[0b11] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn schedule_params_round_trip() {
        let s = QaoaSchedule::from_params(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(s.gammas, vec![0.1, 0.2]);
        assert_eq!(s.betas, vec![0.3, 0.4]);
        assert_eq!(s.to_params(), vec![0.1, 0.2, 0.3, 0.4]);
        assert!(QaoaSchedule::from_params(&[0.1]).is_err());
        assert!(QaoaSchedule::new(vec![], vec![]).is_err());
    }
}
