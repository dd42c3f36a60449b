//! Weighted minimum-N-SAT objective for ML detection.
//!
//! Every joint constellation index `i` becomes a clause
//! `C_i = Π_n B_i(z_n)` with `B_i(z_n) = z_n` when label bit `b_n = 1` and
//! `1 − z_n` otherwise, weighted by the squared distance `d_i`. Exactly one
//! clause is satisfied by any assignment, so `f(b) = Σ_l d_{l,index(b)}`.
//! Expanding the clauses gives a multilinear polynomial whose coefficients
//! cancel in patterns dictated by the Gray labelling.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bits::{bits_to_index, mask_to_vars, submasks, vars_to_mask};
use crate::constellation::{ChannelInstance, Complex, Geometry, JointConstellation};
use crate::error::check_qubits;
use crate::{Error, Result};

/// Coefficients with `|c| <= PRUNE_TOL · max_weight` are treated as zero.
pub const PRUNE_TOL: f64 = 1e-9;

/// Squared distances `d[l][i]` for receive antenna `l` and joint index `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClauseWeights {
    n_bits: usize,
    rows: Vec<Vec<f64>>,
}

impl ClauseWeights {
    pub fn from_rows(n_bits: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        check_qubits(n_bits)?;
        if rows.is_empty() {
            return Err(Error::InvalidArgument("clause weights need at least one row".into()));
        }
        for row in &rows {
            if row.len() != 1 << n_bits {
                return Err(Error::DimensionMismatch {
                    expected: 1 << n_bits,
                    found: row.len(),
                });
            }
            if let Some(bad) = row.iter().find(|d| !d.is_finite() || **d < 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "clause weight {bad} is not a finite non-negative value"
                )));
            }
        }
        Ok(Self { n_bits, rows })
    }

    /// Single-antenna convenience constructor.
    pub fn from_vec(n_bits: usize, d: Vec<f64>) -> Result<Self> {
        Self::from_rows(n_bits, vec![d])
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn n_rx(&self) -> usize {
        self.rows.len()
    }

    pub fn size(&self) -> usize {
        1 << self.n_bits
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `Σ_l d[l][i]` for every `i`.
    pub fn totals(&self) -> Vec<f64> {
        let mut t = vec![0.0; self.size()];
        for row in &self.rows {
            for (acc, d) in t.iter_mut().zip(row) {
                *acc += d;
            }
        }
        t
    }

    /// Largest summed clause weight; the scale for every relative tolerance.
    pub fn max_weight(&self) -> f64 {
        self.totals().into_iter().fold(0.0, f64::max)
    }
}

/// Clause weights of a generated instance.
pub fn clause_weights(instance: &ChannelInstance, joint: &JointConstellation) -> Result<ClauseWeights> {
    clause_weights_for(&instance.h, &instance.y, &instance.tx_scale, joint)
}

/// `d[l][i] = |y_l − Σ_k h_{l,k} · a_k · s_k(i)|²` with per-antenna amplitude `a_k`.
pub fn clause_weights_for(
    h: &[Vec<Complex>],
    y: &[Complex],
    tx_scale: &[f64],
    joint: &JointConstellation,
) -> Result<ClauseWeights> {
    if h.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: h.len(),
        });
    }
    if tx_scale.len() != joint.n_tx() {
        return Err(Error::DimensionMismatch {
            expected: joint.n_tx(),
            found: tx_scale.len(),
        });
    }
    if let Some(row) = h.iter().find(|row| row.len() != joint.n_tx()) {
        return Err(Error::DimensionMismatch {
            expected: joint.n_tx(),
            found: row.len(),
        });
    }
    let symbols: Vec<Vec<Complex>> = (0..joint.size())
        .map(|i| joint.symbols(i).into_iter().zip(tx_scale).map(|(s, a)| s * a).collect())
        .collect();
    let rows = h
        .iter()
        .zip(y)
        .map(|(row, &yl)| {
            symbols
                .iter()
                .map(|s| (yl - row.iter().zip(s).map(|(hk, sk)| hk * sk).sum::<Complex>()).norm_sqr())
                .collect()
        })
        .collect();
    ClauseWeights::from_rows(joint.total_bits(), rows)
}

/// `Σ_S c_S Π_{n∈S} z_n + constant` over `n_vars` binary variables, keyed by
/// subset mask.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "PolynomialDoc", try_from = "PolynomialDoc")]
pub struct MultilinearPolynomial {
    n_vars: usize,
    terms: BTreeMap<u32, f64>,
    constant: f64,
}

impl MultilinearPolynomial {
    pub fn zero(n_vars: usize) -> Self {
        Self {
            n_vars,
            terms: BTreeMap::new(),
            constant: 0.0,
        }
    }

    /// Builds from `(mask, coeff)` pairs; repeated masks accumulate and the
    /// empty mask feeds the constant.
    pub fn from_terms(n_vars: usize, terms: impl IntoIterator<Item = (u32, f64)>, constant: f64) -> Result<Self> {
        let mut p = Self::zero(n_vars);
        p.constant = constant;
        for (mask, c) in terms {
            if n_vars < 32 && mask >> n_vars != 0 {
                return Err(Error::InvalidArgument(format!(
                    "subset mask {mask:#b} exceeds {n_vars} variables"
                )));
            }
            p.add_term(mask, c);
        }
        Ok(p)
    }

    /// Dense coefficient table indexed by mask, entry 0 being the constant.
    pub fn from_dense(n_vars: usize, coeffs: &[f64], abs_tol: f64) -> Self {
        let mut p = Self::zero(n_vars);
        p.constant = coeffs[0];
        for (mask, &c) in coeffs.iter().enumerate().skip(1) {
            if c.abs() > abs_tol {
                p.terms.insert(mask as u32, c);
            }
        }
        p
    }

    pub fn add_term(&mut self, mask: u32, coeff: f64) {
        if mask == 0 {
            self.constant += coeff;
        } else {
            *self.terms.entry(mask).or_insert(0.0) += coeff;
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Non-constant terms in ascending mask order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// Stored coefficient of `mask`, zero when absent.
    pub fn coefficient(&self, mask: u32) -> f64 {
        if mask == 0 {
            self.constant
        } else {
            self.terms.get(&mask).copied().unwrap_or(0.0)
        }
    }

    pub fn coefficient_of(&self, vars: &[usize]) -> Result<f64> {
        Ok(self.coefficient(vars_to_mask(vars, self.n_vars)?))
    }

    /// Largest number of variables in any stored term; 0 for a constant.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.count_ones() as usize).max().unwrap_or(0)
    }

    /// Drops terms with `|c| <= abs_tol`.
    pub fn prune(&mut self, abs_tol: f64) {
        self.terms.retain(|_, c| c.abs() > abs_tol);
    }

    pub fn evaluate(&self, bits: &[u8]) -> Result<f64> {
        if bits.len() != self.n_vars {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars,
                found: bits.len(),
            });
        }
        Ok(self.evaluate_index(bits_to_index(bits)?))
    }

    /// Value at the assignment whose mask is `index`.
    pub fn evaluate_index(&self, index: usize) -> f64 {
        let x = index as u32;
        self.constant
            + self
                .terms
                .iter()
                .filter(|(&m, _)| m & !x == 0)
                .map(|(_, c)| c)
                .sum::<f64>()
    }

    /// Values at all `2^n_vars` assignments via a subset-sum transform.
    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![0.0; 1 << self.n_vars];
        v[0] = self.constant;
        for (&m, &c) in &self.terms {
            v[m as usize] += c;
        }
        for bit in 0..self.n_vars {
            let step = 1 << bit;
            for x in 0..v.len() {
                if x & step != 0 {
                    v[x] += v[x ^ step];
                }
            }
        }
        v
    }

    /// Largest coefficient gap, constant included, over the union of both supports.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let masks = self.terms.keys().chain(other.terms.keys());
        masks
            .map(|&m| (self.coefficient(m) - other.coefficient(m)).abs())
            .fold((self.constant - other.constant).abs(), f64::max)
    }

    /// Largest magnitude among non-constant coefficients.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermDoc {
    pub subset: Vec<usize>,
    pub coeff: f64,
}

/// JSON form of a [`MultilinearPolynomial`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolynomialDoc {
    pub n_vars: usize,
    pub terms: Vec<TermDoc>,
    pub constant: f64,
}

impl From<MultilinearPolynomial> for PolynomialDoc {
    fn from(p: MultilinearPolynomial) -> Self {
        let n = p.n_vars;
        Self {
            n_vars: n,
            terms: p
                .terms
                .iter()
                .map(|(&m, &c)| TermDoc {
                    subset: mask_to_vars(m, n),
                    coeff: c,
                })
                .collect(),
            constant: p.constant,
        }
    }
}

impl TryFrom<PolynomialDoc> for MultilinearPolynomial {
    type Error = Error;

    fn try_from(doc: PolynomialDoc) -> Result<Self> {
        let terms = doc
            .terms
            .iter()
            .map(|t| Ok((vars_to_mask(&t.subset, doc.n_vars)?, t.coeff)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(doc.n_vars, terms, doc.constant)
    }
}

fn check_weights(weights: &ClauseWeights, joint: &JointConstellation) -> Result<()> {
    if weights.n_bits() != joint.total_bits() {
        return Err(Error::DimensionMismatch {
            expected: joint.total_bits(),
            found: weights.n_bits(),
        });
    }
    Ok(())
}

/// Dense unpruned coefficients from a literal clause-by-clause product
/// expansion. Cost `O(M · 2^N)`; kept as the reference implementation.
pub fn brute_coefficients(weights: &ClauseWeights) -> Vec<f64> {
    let n = weights.n_bits();
    let mut acc = vec![0.0; 1 << n];
    // Sparse product buffer reused across clauses: (mask, coeff).
    let mut product: Vec<(u32, f64)> = Vec::with_capacity(1 << n);
    for row in weights.rows() {
        for (i, &d) in row.iter().enumerate() {
            product.clear();
            product.push((0, d));
            for var in 0..n {
                let bit = 1u32 << (n - 1 - var);
                let len = product.len();
                if i as u32 & bit != 0 {
                    // Literal z_n.
                    for term in &mut product[..len] {
                        term.0 |= bit;
                    }
                } else {
                    // Literal (1 − z_n).
                    for k in 0..len {
                        let (m, c) = product[k];
                        product.push((m | bit, -c));
                    }
                }
            }
            for &(m, c) in &product {
                acc[m as usize] += c;
            }
        }
    }
    acc
}

/// Dense unpruned coefficients via signed subset sums of the summed weights,
/// evaluated with an in-place Möbius butterfly.
pub fn fast_coefficients(weights: &ClauseWeights) -> Vec<f64> {
    let mut a = weights.totals();
    for bit in 0..weights.n_bits() {
        let step = 1 << bit;
        for x in 0..a.len() {
            if x & step != 0 {
                a[x] -= a[x ^ step];
            }
        }
    }
    a
}

/// One coefficient straight from its defining sum: over the `2^{|S|}` labels
/// whose bits outside `S` are all zero, add `d_i` with sign `(−1)` raised to
/// the number of zero bits inside `S`.
pub fn coefficient(weights: &ClauseWeights, mask: u32) -> f64 {
    let totals = weights.totals();
    submasks(mask)
        .map(|t| {
            let zeros = (mask & !t).count_ones();
            let sign = if zeros.is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * totals[t as usize]
        })
        .sum()
}

/// Reference expansion, pruned at `PRUNE_TOL · max_weight`.
pub fn brute_expand(weights: &ClauseWeights, joint: &JointConstellation) -> Result<MultilinearPolynomial> {
    check_weights(weights, joint)?;
    let tol = PRUNE_TOL * weights.max_weight();
    Ok(MultilinearPolynomial::from_dense(
        weights.n_bits(),
        &brute_coefficients(weights),
        tol,
    ))
}

/// Fast expansion, pruned at `PRUNE_TOL · max_weight`.
pub fn fast_expand(weights: &ClauseWeights, joint: &JointConstellation) -> Result<MultilinearPolynomial> {
    check_weights(weights, joint)?;
    let tol = PRUNE_TOL * weights.max_weight();
    Ok(MultilinearPolynomial::from_dense(
        weights.n_bits(),
        &fast_coefficients(weights),
        tol,
    ))
}

pub fn degree(poly: &MultilinearPolynomial) -> usize {
    poly.degree()
}

pub fn evaluate(poly: &MultilinearPolynomial, bits: &[u8]) -> Result<f64> {
    poly.evaluate(bits)
}

/// Why a coefficient is known to vanish.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroRule {
    /// Single PSK antenna, monomial over every label bit.
    TopDegree,
    /// Single QAM antenna, monomial mixing in-phase and quadrature bits.
    IqMix,
    /// Several antennas, some antenna contributes a vanishing pattern.
    MimoIqMix,
    /// Monomial spans three or more antennas. The squared distance is a
    /// quadratic form in the transmit vector, so such products never appear.
    CrossAntenna,
}

impl ZeroRule {
    pub fn name(self) -> &'static str {
        match self {
            Self::TopDegree => "top-degree",
            Self::IqMix => "iq-mix",
            Self::MimoIqMix => "mimo-iq-mix",
            Self::CrossAntenna => "cross-antenna",
        }
    }
}

/// Subsets whose coefficient vanishes for every channel and received vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroPrediction {
    pub n_vars: usize,
    /// `(mask, rule)` in ascending mask order.
    pub predicted_zero: Vec<(u32, ZeroRule)>,
    /// Largest subset size not predicted zero.
    pub degree_bound: usize,
}

impl ZeroPrediction {
    pub fn rule_for(&self, mask: u32) -> Option<ZeroRule> {
        self.predicted_zero
            .binary_search_by_key(&mask, |&(m, _)| m)
            .ok()
            .map(|k| self.predicted_zero[k].1)
    }

    pub fn is_predicted(&self, mask: u32) -> bool {
        self.rule_for(mask).is_some()
    }
}

/// Applies the Gray cancellation rules to every subset of the joint variables.
pub fn predict_zero_monomials(joint: &JointConstellation) -> Result<ZeroPrediction> {
    let n = joint.total_bits();
    let mut component_masks = Vec::new();
    // Per component: full mask, in-phase mask, quadrature mask.
    for (k, c) in joint.components().iter().enumerate() {
        if !c.is_gray() {
            return Err(Error::NotGray(format!(
                "component {k} ({c}) is not Gray-labelled; cancellation rules do not apply"
            )));
        }
        let i_mask = vars_to_mask(&joint.inphase_vars(k), n)?;
        let q_mask = vars_to_mask(&joint.quadrature_vars(k), n)?;
        component_masks.push((c.geometry(), i_mask | q_mask, i_mask, q_mask));
    }
    let multi = joint.n_tx() > 1;
    let mut predicted = Vec::new();
    let mut degree_bound = 0;
    for s in 1u32..(1u32 << n) {
        let mut vanishing = false;
        let mut touched = 0;
        for &(geometry, full, i_mask, q_mask) in &component_masks {
            let t = s & full;
            if t == 0 {
                continue;
            }
            touched += 1;
            vanishing |= match geometry {
                Geometry::Rectangular => t & i_mask != 0 && t & q_mask != 0,
                Geometry::Psk => t == full,
                Geometry::Irregular => false,
            };
        }
        let rule = if vanishing {
            Some(match (multi, component_masks[0].0) {
                (true, _) => ZeroRule::MimoIqMix,
                (false, Geometry::Psk) => ZeroRule::TopDegree,
                (false, _) => ZeroRule::IqMix,
            })
        } else if touched >= 3 {
            Some(ZeroRule::CrossAntenna)
        } else {
            None
        };
        match rule {
            Some(r) => predicted.push((s, r)),
            None => degree_bound = degree_bound.max(s.count_ones() as usize),
        }
    }
    Ok(ZeroPrediction {
        n_vars: n,
        predicted_zero: predicted,
        degree_bound,
    })
}
