//! Diagonal spin Hamiltonians built from the objective polynomial.
//!
//! Substituting `z_n = (1 − σ_z^{(n)})/2` turns `f` into
//! `H = Σ_S g_S Π_{n∈S} σ_z^{(n)} + constant`, whose eigenvalue at `|b⟩`
//! equals `f(b)`. Constants and the `½` factors are kept.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::bits::{index_to_bits, mask_to_vars, submasks, var_mask, vars_to_mask};
use crate::error::check_qubits;
use crate::objective::{MultilinearPolynomial, TermDoc};
use crate::{Error, Result};

/// Couplings with `|g| <= ISING_PRUNE_TOL · max|coefficient|` are dropped.
pub const ISING_PRUNE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "IsingDoc", try_from = "IsingDoc")]
pub struct IsingHamiltonian {
    n_qubits: usize,
    couplings: BTreeMap<u32, f64>,
    constant: f64,
}

impl IsingHamiltonian {
    pub fn from_couplings(
        n_qubits: usize,
        couplings: impl IntoIterator<Item = (u32, f64)>,
        constant: f64,
    ) -> Result<Self> {
        let mut h = Self {
            n_qubits,
            couplings: BTreeMap::new(),
            constant,
        };
        for (mask, g) in couplings {
            if n_qubits < 32 && mask >> n_qubits != 0 {
                return Err(Error::InvalidArgument(format!(
                    "coupling mask {mask:#b} exceeds {n_qubits} qubits"
                )));
            }
            if mask == 0 {
                h.constant += g;
            } else {
                *h.couplings.entry(mask).or_insert(0.0) += g;
            }
        }
        Ok(h)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn couplings(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.couplings.iter().map(|(&m, &g)| (m, g))
    }

    pub fn coupling(&self, mask: u32) -> f64 {
        if mask == 0 {
            self.constant
        } else {
            self.couplings.get(&mask).copied().unwrap_or(0.0)
        }
    }

    pub fn coupling_of(&self, qubits: &[usize]) -> Result<f64> {
        Ok(self.coupling(vars_to_mask(qubits, self.n_qubits)?))
    }

    pub fn degree(&self) -> usize {
        self.couplings
            .keys()
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    /// `Σ_S g_S (−1)^{|S ∩ b|} + constant` at basis state `index`.
    pub fn eigenvalue(&self, index: usize) -> f64 {
        let x = index as u32;
        self.constant
            + self
                .couplings
                .iter()
                .map(|(&m, &g)| if (m & x).count_ones().is_multiple_of(2) { g } else { -g })
                .sum::<f64>()
    }

    /// All `2^n` eigenvalues via a Walsh–Hadamard transform.
    pub fn diagonal(&self) -> Vec<f64> {
        let mut v = vec![0.0; 1 << self.n_qubits];
        for (&m, &g) in &self.couplings {
            v[m as usize] = g;
        }
        let mut half = 1;
        while half < v.len() {
            for start in (0..v.len()).step_by(2 * half) {
                for x in start..start + half {
                    let (a, b) = (v[x], v[x + half]);
                    v[x] = a + b;
                    v[x + half] = a - b;
                }
            }
            half *= 2;
        }
        for e in &mut v {
            *e += self.constant;
        }
        v
    }
}

/// JSON form of an [`IsingHamiltonian`]; the term layout matches polynomials.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsingDoc {
    pub basis: String,
    pub n_vars: usize,
    pub terms: Vec<TermDoc>,
    pub constant: f64,
}

impl From<IsingHamiltonian> for IsingDoc {
    fn from(h: IsingHamiltonian) -> Self {
        Self {
            basis: "spin".into(),
            n_vars: h.n_qubits,
            terms: h
                .couplings
                .iter()
                .map(|(&m, &g)| TermDoc {
                    subset: mask_to_vars(m, h.n_qubits),
                    coeff: g,
                })
                .collect(),
            constant: h.constant,
        }
    }
}

impl TryFrom<IsingDoc> for IsingHamiltonian {
    type Error = Error;

    fn try_from(doc: IsingDoc) -> Result<Self> {
        if doc.basis != "spin" {
            return Err(Error::InvalidArgument(format!(
                "expected spin basis, found `{}`",
                doc.basis
            )));
        }
        let terms = doc
            .terms
            .iter()
            .map(|t| Ok((vars_to_mask(&t.subset, doc.n_vars)?, t.coeff)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_couplings(doc.n_vars, terms, doc.constant)
    }
}

/// Exact substitution `z_n ↦ (1 − σ_z^{(n)})/2`.
pub fn to_ising(poly: &MultilinearPolynomial) -> IsingHamiltonian {
    let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
    let mut constant = poly.constant();
    for (s, c) in poly.terms() {
        let scale = c / f64::from(1u32 << s.count_ones());
        for t in submasks(s) {
            let g = if t.count_ones() % 2 == 0 { scale } else { -scale };
            if t == 0 {
                constant += g;
            } else {
                *acc.entry(t).or_insert(0.0) += g;
            }
        }
    }
    let scale = poly.max_abs_coeff().max(poly.constant().abs());
    acc.retain(|_, g| g.abs() > ISING_PRUNE_TOL * scale);
    IsingHamiltonian {
        n_qubits: poly.n_vars(),
        couplings: acc,
        constant,
    }
}

/// One independent block of a [`SubsystemSplit`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsystemPart {
    /// Global qubit indices, ascending. Local qubit `j` is `qubits[j]`.
    pub qubits: Vec<usize>,
    /// Couplings re-indexed to the local qubits, zero constant.
    pub hamiltonian: IsingHamiltonian,
}

/// Connected components of the interaction graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsystemSplit {
    pub n_qubits: usize,
    pub parts: Vec<SubsystemPart>,
    pub constant: f64,
}

impl SubsystemSplit {
    /// Joint basis index from per-part local indices; qubits outside every
    /// part are set to 0.
    pub fn join_indices(&self, local: &[usize]) -> usize {
        let mut x = 0usize;
        for (part, &li) in self.parts.iter().zip(local) {
            let k = part.qubits.len();
            for (j, &q) in part.qubits.iter().enumerate() {
                if (li >> (k - 1 - j)) & 1 == 1 {
                    x |= var_mask(q, self.n_qubits) as usize;
                }
            }
        }
        x
    }

    /// Local index of `part` read off joint basis index `x`.
    pub fn local_index(&self, part: usize, x: usize) -> usize {
        self.parts[part]
            .qubits
            .iter()
            .fold(0, |acc, &q| (acc << 1) | ((x >> (self.n_qubits - 1 - q)) & 1))
    }

    /// Sum of part eigenvalues plus the constant at joint basis index `x`.
    pub fn eigenvalue(&self, x: usize) -> f64 {
        self.constant
            + (0..self.parts.len())
                .map(|k| self.parts[k].hamiltonian.eigenvalue(self.local_index(k, x)))
                .sum::<f64>()
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Splits `h` into independent blocks. Qubits that occur only in linear terms
/// become singleton parts; qubits with no term at all are left out.
pub fn split_independent(h: &IsingHamiltonian) -> SubsystemSplit {
    let n = h.n_qubits;
    let mut parent: Vec<usize> = (0..n).collect();
    let mut used = vec![false; n];
    for (m, _) in h.couplings() {
        let vars = mask_to_vars(m, n);
        for &v in &vars {
            used[v] = true;
        }
        for w in vars.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for q in (0..n).filter(|&q| used[q]) {
        let root = find(&mut parent, q);
        groups.entry(root).or_default().push(q);
    }
    let mut parts = Vec::new();
    let mut part_of = vec![usize::MAX; n];
    for (k, qubits) in groups.values().enumerate() {
        for &q in qubits {
            part_of[q] = k;
        }
        parts.push((qubits.clone(), Vec::new()));
    }
    for (m, g) in h.couplings() {
        let vars = mask_to_vars(m, n);
        let k = part_of[vars[0]];
        let (qubits, terms): &mut (Vec<usize>, Vec<(u32, f64)>) = &mut parts[k];
        let local = vars.iter().fold(0u32, |acc, v| {
            let j = qubits.binary_search(v).expect("qubit belongs to its part");
            acc | var_mask(j, qubits.len())
        });
        terms.push((local, g));
    }
    SubsystemSplit {
        n_qubits: n,
        parts: parts
            .into_iter()
            .map(|(qubits, terms)| SubsystemPart {
                hamiltonian: IsingHamiltonian::from_couplings(qubits.len(), terms, 0.0).expect("local masks in range"),
                qubits,
            })
            .collect(),
        constant: h.constant,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub index: usize,
    pub bits: Vec<u8>,
    pub energy: f64,
}

/// Exhaustive minimum over all basis states; ties go to the smallest index.
pub fn ground_state(h: &IsingHamiltonian) -> Result<GroundState> {
    check_qubits(h.n_qubits)?;
    let (index, energy) = argmin(&h.diagonal());
    Ok(GroundState {
        index,
        bits: index_to_bits(index, h.n_qubits),
        energy,
    })
}

/// First index of the smallest value.
pub(crate) fn argmin(values: &[f64]) -> (usize, f64) {
    values.iter().enumerate().fold(
        (0, f64::INFINITY),
        |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) },
    )
}

/// Result of reduction by substitution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadratization {
    /// Quadratic polynomial over the original variables followed by the auxiliaries.
    pub poly: MultilinearPolynomial,
    pub n_original: usize,
    /// Variable pair replaced by each auxiliary, in creation order.
    pub aux_pairs: Vec<(usize, usize)>,
}

impl Quadratization {
    pub fn n_aux(&self) -> usize {
        self.aux_pairs.len()
    }

    /// Minimum over auxiliary assignments with the original variables fixed
    /// to the assignment mask `original`.
    pub fn min_over_aux(&self, original: usize) -> f64 {
        let k = self.n_aux();
        (0..1usize << k)
            .map(|aux| self.poly.evaluate_index((original << k) | aux))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Default substitution penalty `4 · Σ|c| + 1` over non-constant coefficients.
pub fn default_penalty(poly: &MultilinearPolynomial) -> f64 {
    4.0 * poly.terms().map(|(_, c)| c.abs()).sum::<f64>() + 1.0
}

/// Rosenberg reduction: while some term has degree ≥ 3, replace the most
/// frequent variable pair `(a, b)` among such terms by a fresh `w` and add
/// `penalty · (z_a z_b − 2 z_a w − 2 z_b w + 3w)`. Ties go to the smallest pair.
pub fn quadratize_by_substitution(poly: &MultilinearPolynomial, penalty: f64) -> Result<Quadratization> {
    let required = 2.0 * poly.terms().map(|(_, c)| c.abs()).sum::<f64>();
    if penalty.is_nan() || penalty <= required {
        return Err(Error::InsufficientPenalty { penalty, required });
    }
    let n0 = poly.n_vars();
    // Terms keyed by sorted variable lists while the variable count grows.
    let mut terms: BTreeMap<Vec<usize>, f64> = poly.terms().map(|(m, c)| (mask_to_vars(m, n0), c)).collect();
    let mut n = n0;
    let mut aux_pairs = Vec::new();
    loop {
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for vars in terms.keys().filter(|v| v.len() >= 3) {
            for (i, &a) in vars.iter().enumerate() {
                for &b in &vars[i + 1..] {
                    *counts.entry((a, b)).or_insert(0) += 1;
                }
            }
        }
        let Some((&(a, b), _)) = counts.iter().max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(x.0))) else {
            break;
        };
        let w = n;
        n += 1;
        check_qubits(n)?;
        aux_pairs.push((a, b));
        let mut next: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (vars, c) in terms {
            let key = if vars.len() >= 3 && vars.contains(&a) && vars.contains(&b) {
                let mut v: Vec<usize> = vars.into_iter().filter(|&x| x != a && x != b).collect();
                v.push(w);
                v
            } else {
                vars
            };
            *next.entry(key).or_insert(0.0) += c;
        }
        for (key, c) in [
            (vec![a, b], 1.0),
            (vec![a, w], -2.0),
            (vec![b, w], -2.0),
            (vec![w], 3.0),
        ] {
            *next.entry(key).or_insert(0.0) += penalty * c;
        }
        terms = next;
    }
    let masks = terms
        .into_iter()
        .filter(|(_, c)| *c != 0.0)
        .map(|(vars, c)| Ok((vars_to_mask(&vars, n)?, c)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Quadratization {
        poly: MultilinearPolynomial::from_terms(n, masks, poly.constant())?,
        n_original: n0,
        aux_pairs,
    })
}
