//! Gray-labelled constellations, joint MIMO constellations and the channel
//! model that generates detection instances.
//!
//! Point `i` of a constellation carries the label `[i]_2 = b_0 … b_{N-1}`
//! (see [`crate::bits`]). For rectangular QAM the first `⌈N/2⌉` label bits are
//! the in-phase group and select the real coordinate; the remaining bits
//! select the imaginary coordinate. Each group is Gray-decoded to an ascending
//! level index, and level `k` of `L` sits at the odd integer `2k - (L - 1)`.

use std::collections::HashSet;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bits::{bits_to_index, bits_to_string, index_to_bits, parse_bits};
use crate::error::check_qubits;
use crate::rng::rng_from_seed;
use crate::{Error, Result};

pub type Complex = Complex64;

/// Relative tolerance used when comparing coordinates.
const COORD_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    /// Axis-aligned grid; in-phase bits select the column, quadrature bits the row.
    Rectangular,
    /// Points on a circle at uniform angular spacing.
    Psk,
    /// Anything else. Accepted by the expansions, never by the zero predictor.
    Irregular,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "ConstellationDoc", try_from = "ConstellationDoc")]
pub struct Constellation {
    label: String,
    points: Vec<Complex>,
    bits_per_symbol: usize,
    inphase_bits: Vec<usize>,
    quadrature_bits: Vec<usize>,
    geometry: Geometry,
}

fn gray_decode(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

fn gray_encode(b: usize) -> usize {
    b ^ (b >> 1)
}

fn level_coordinate(level: usize, levels: usize) -> f64 {
    2.0 * level as f64 - (levels as f64 - 1.0)
}

impl Constellation {
    /// Validates and assembles a constellation.
    pub fn new(
        label: impl Into<String>,
        points: Vec<Complex>,
        inphase_bits: Vec<usize>,
        quadrature_bits: Vec<usize>,
        geometry: Geometry,
    ) -> Result<Self> {
        let label = label.into();
        let m = points.len();
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "constellation `{label}` has {m} points, expected a power of two >= 2"
            )));
        }
        let n = m.trailing_zeros() as usize;
        check_qubits(n)?;
        if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "constellation `{label}` has a non-finite point"
            )));
        }
        let mut seen = HashSet::new();
        for p in &points {
            if !seen.insert((p.re.to_bits(), p.im.to_bits())) {
                return Err(Error::InvalidArgument(format!(
                    "constellation `{label}` repeats point {p}"
                )));
            }
        }
        let mut all: Vec<usize> = inphase_bits.iter().chain(&quadrature_bits).copied().collect();
        all.sort_unstable();
        if all != (0..n).collect::<Vec<_>>() {
            return Err(Error::InvalidArgument(format!(
                "in-phase {inphase_bits:?} and quadrature {quadrature_bits:?} bits must partition 0..{n}"
            )));
        }
        Ok(Self {
            label,
            points,
            bits_per_symbol: n,
            inphase_bits,
            quadrature_bits,
            geometry,
        })
    }

    /// QPSK in the order `0 ↔ 1+j, 1 ↔ −1+j, 2 ↔ 1−j, 3 ↔ −1−j`.
    ///
    /// Here `b_1` selects the sign of the real part and `b_0` the sign of the
    /// imaginary part, so the in-phase group is `{1}`.
    pub fn build_qpsk() -> Self {
        let points = vec![
            Complex::new(1.0, 1.0),
            Complex::new(-1.0, 1.0),
            Complex::new(1.0, -1.0),
            Complex::new(-1.0, -1.0),
        ];
        Self::new("QPSK", points, vec![1], vec![0], Geometry::Rectangular).expect("valid QPSK table")
    }

    /// Rectangular QAM with `2^n_inphase × 2^n_quadrature` points, Gray-labelled
    /// along each axis.
    pub fn build_rect_qam(n_inphase_bits: usize, n_quadrature_bits: usize) -> Result<Self> {
        Self::rect_qam(n_inphase_bits, n_quadrature_bits, true)
    }

    /// Same grid as [`Constellation::build_rect_qam`] but with natural binary
    /// labels along each axis. Not Gray for any axis with more than two levels.
    pub fn build_binary_rect_qam(n_inphase_bits: usize, n_quadrature_bits: usize) -> Result<Self> {
        Self::rect_qam(n_inphase_bits, n_quadrature_bits, false)
    }

    fn rect_qam(n_i: usize, n_q: usize, gray: bool) -> Result<Self> {
        if n_i == 0 || n_q == 0 {
            return Err(Error::InvalidArgument("QAM needs at least one bit per axis".into()));
        }
        if n_i < n_q {
            return Err(Error::InvalidArgument(format!(
                "in-phase bits ({n_i}) must be at least the quadrature bits ({n_q})"
            )));
        }
        check_qubits(n_i + n_q)?;
        let (levels_i, levels_q) = (1usize << n_i, 1usize << n_q);
        let decode = |v: usize| if gray { gray_decode(v) } else { v };
        let points = (0..levels_i * levels_q)
            .map(|index| {
                let iv = index >> n_q;
                let qv = index & (levels_q - 1);
                Complex::new(
                    level_coordinate(decode(iv), levels_i),
                    level_coordinate(decode(qv), levels_q),
                )
            })
            .collect();
        let m = levels_i * levels_q;
        let mut label = if n_i - n_q <= 1 {
            format!("{m}QAM")
        } else {
            format!("{m}QAM({n_i}x{n_q})")
        };
        if !gray {
            label.push_str("-binary");
        }
        Self::new(
            label,
            points,
            (0..n_i).collect(),
            (n_i..n_i + n_q).collect(),
            Geometry::Rectangular,
        )
    }

    /// Gray-labelled M-PSK on the unit circle, `M = 2^n_bits`, point `gray(k)`
    /// at angle `2πk/M + π/M`.
    pub fn build_gray_psk(n_bits: usize) -> Result<Self> {
        if n_bits == 0 {
            return Err(Error::InvalidArgument("PSK needs at least one bit".into()));
        }
        check_qubits(n_bits)?;
        let m = 1usize << n_bits;
        let mut points = vec![Complex::new(0.0, 0.0); m];
        for k in 0..m {
            let angle = 2.0 * PI * k as f64 / m as f64 + PI / m as f64;
            points[gray_encode(k)] = Complex::from_polar(1.0, angle);
        }
        Self::new(
            format!("{m}PSK"),
            points,
            (0..n_bits).collect(),
            Vec::new(),
            Geometry::Psk,
        )
    }

    /// Arbitrary point set in label order.
    pub fn from_points(label: impl Into<String>, points: Vec<Complex>) -> Result<Self> {
        let n = points.len().max(1).trailing_zeros() as usize;
        Self::new(label, points, (0..n).collect(), Vec::new(), Geometry::Irregular)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex {
        self.points[index]
    }

    pub fn inphase_bits(&self) -> &[usize] {
        &self.inphase_bits
    }

    pub fn quadrature_bits(&self) -> &[usize] {
        &self.quadrature_bits
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn bits_of_index(&self, index: usize) -> Vec<u8> {
        index_to_bits(index, self.bits_per_symbol)
    }

    pub fn index_of_bits(&self, bits: &[u8]) -> Result<usize> {
        if bits.len() != self.bits_per_symbol {
            return Err(Error::DimensionMismatch {
                expected: self.bits_per_symbol,
                found: bits.len(),
            });
        }
        bits_to_index(bits)
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.size() as f64
    }

    /// Copy scaled to unit average energy.
    pub fn normalized(&self) -> Self {
        let scale = self.average_energy().sqrt().recip();
        Self {
            points: self.points.iter().map(|p| p * scale).collect(),
            ..self.clone()
        }
    }

    /// Whether geometric neighbours differ in exactly one label bit and, for
    /// rectangular grids, whether the in-phase/quadrature groups select the
    /// columns/rows.
    pub fn is_gray(&self) -> bool {
        match self.geometry {
            Geometry::Rectangular => self.grid_positions().is_some_and(|pos| self.rect_gray(&pos)),
            Geometry::Psk => self.psk_gray(),
            Geometry::Irregular => false,
        }
    }

    /// (column, row) of every point if the points fill a full rectangular grid.
    fn grid_positions(&self) -> Option<Vec<(usize, usize)>> {
        let scale = self.points.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let axis = |values: Vec<f64>| {
            let mut v = values;
            v.sort_by(f64::total_cmp);
            v.dedup_by(|a, b| (*a - *b).abs() <= COORD_TOL * scale);
            v
        };
        let cols = axis(self.points.iter().map(|p| p.re).collect());
        let rows = axis(self.points.iter().map(|p| p.im).collect());
        if cols.len() * rows.len() != self.size() {
            return None;
        }
        let find = |levels: &[f64], x: f64| levels.iter().position(|&l| (l - x).abs() <= COORD_TOL * scale);
        self.points
            .iter()
            .map(|p| Some((find(&cols, p.re)?, find(&rows, p.im)?)))
            .collect()
    }

    fn group_value(&self, index: usize, group: &[usize]) -> usize {
        let bits = self.bits_of_index(index);
        group.iter().fold(0, |acc, &b| (acc << 1) | bits[b] as usize)
    }

    fn rect_gray(&self, pos: &[(usize, usize)]) -> bool {
        let m = self.size();
        let mut at = std::collections::HashMap::new();
        for (i, &p) in pos.iter().enumerate() {
            at.insert(p, i);
        }
        for (i, &(c, r)) in pos.iter().enumerate() {
            for neighbour in [(c + 1, r), (c, r + 1)] {
                if let Some(&j) = at.get(&neighbour) {
                    if (i ^ j).count_ones() != 1 {
                        return false;
                    }
                }
            }
        }
        // Columns must be a function of the in-phase bits alone, rows of the
        // quadrature bits alone.
        for i in 0..m {
            for j in (i + 1)..m {
                let same_i = self.group_value(i, &self.inphase_bits) == self.group_value(j, &self.inphase_bits);
                let same_q = self.group_value(i, &self.quadrature_bits) == self.group_value(j, &self.quadrature_bits);
                if same_i != (pos[i].0 == pos[j].0) || same_q != (pos[i].1 == pos[j].1) {
                    return false;
                }
            }
        }
        true
    }

    fn psk_gray(&self) -> bool {
        let radius = self.points[0].norm();
        if self
            .points
            .iter()
            .any(|p| (p.norm() - radius).abs() > COORD_TOL * radius)
        {
            return false;
        }
        let mut order: Vec<usize> = (0..self.size()).collect();
        order.sort_by(|&a, &b| self.points[a].arg().total_cmp(&self.points[b].arg()));
        order
            .iter()
            .zip(order.iter().cycle().skip(1))
            .all(|(&a, &b)| (a ^ b).count_ones() == 1)
    }
}

impl fmt::Display for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Parses `qpsk`, `8qam`, `16qam`, `64qam`, `256qam`, `1024qam`, `8psk`,
/// `rect:<nI>x<nQ>`, `binary:<nI>x<nQ>` and `psk:<bits>`.
impl FromStr for Constellation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let pair = |rest: &str| -> Result<(usize, usize)> {
            let (a, b) = rest
                .split_once('x')
                .ok_or_else(|| Error::InvalidArgument(format!("expected <nI>x<nQ> in `{s}`")))?;
            let parse = |t: &str| {
                t.parse::<usize>()
                    .map_err(|_| Error::InvalidArgument(format!("bad bit count `{t}` in `{s}`")))
            };
            Ok((parse(a)?, parse(b)?))
        };
        match lower.as_str() {
            "qpsk" | "4qam" => Ok(Self::build_qpsk()),
            "8qam" => Self::build_rect_qam(2, 1),
            "16qam" => Self::build_rect_qam(2, 2),
            "32qam" => Self::build_rect_qam(3, 2),
            "64qam" => Self::build_rect_qam(3, 3),
            "128qam" => Self::build_rect_qam(4, 3),
            "256qam" => Self::build_rect_qam(4, 4),
            "1024qam" => Self::build_rect_qam(5, 5),
            "8psk" => Self::build_gray_psk(3),
            "16psk" => Self::build_gray_psk(4),
            other => {
                if let Some(rest) = other.strip_prefix("rect:") {
                    let (i, q) = pair(rest)?;
                    Self::build_rect_qam(i, q)
                } else if let Some(rest) = other.strip_prefix("binary:") {
                    let (i, q) = pair(rest)?;
                    Self::build_binary_rect_qam(i, q)
                } else if let Some(rest) = other.strip_prefix("psk:") {
                    let n = rest
                        .parse()
                        .map_err(|_| Error::InvalidArgument(format!("bad bit count in `{s}`")))?;
                    Self::build_gray_psk(n)
                } else {
                    Err(Error::InvalidArgument(format!("unknown constellation `{s}`")))
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointDoc {
    pub index: usize,
    pub bits: String,
    pub point: [f64; 2],
}

/// JSON form of a [`Constellation`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstellationDoc {
    pub label: String,
    pub bits_per_symbol: usize,
    pub geometry: Geometry,
    pub inphase_bits: Vec<usize>,
    pub quadrature_bits: Vec<usize>,
    pub points: Vec<PointDoc>,
}

impl From<Constellation> for ConstellationDoc {
    fn from(c: Constellation) -> Self {
        let points = c
            .points
            .iter()
            .enumerate()
            .map(|(index, p)| PointDoc {
                index,
                bits: bits_to_string(&c.bits_of_index(index)),
                point: [p.re, p.im],
            })
            .collect();
        Self {
            label: c.label,
            bits_per_symbol: c.bits_per_symbol,
            geometry: c.geometry,
            inphase_bits: c.inphase_bits,
            quadrature_bits: c.quadrature_bits,
            points,
        }
    }
}

impl TryFrom<ConstellationDoc> for Constellation {
    type Error = Error;

    fn try_from(doc: ConstellationDoc) -> Result<Self> {
        let mut points = vec![None; doc.points.len()];
        for p in &doc.points {
            let slot = points
                .get_mut(p.index)
                .ok_or_else(|| Error::InvalidArgument(format!("point index {} out of range", p.index)))?;
            let expected = index_to_bits(p.index, doc.bits_per_symbol);
            if parse_bits(&p.bits)? != expected {
                return Err(Error::InvalidArgument(format!(
                    "label `{}` does not match index {}",
                    p.bits, p.index
                )));
            }
            *slot = Some(Complex::new(p.point[0], p.point[1]));
        }
        let points = points
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidArgument("missing constellation point".into()))?;
        let c = Self::new(doc.label, points, doc.inphase_bits, doc.quadrature_bits, doc.geometry)?;
        if c.bits_per_symbol != doc.bits_per_symbol {
            return Err(Error::DimensionMismatch {
                expected: doc.bits_per_symbol,
                found: c.bits_per_symbol,
            });
        }
        Ok(c)
    }
}

/// Cartesian product of per-antenna constellations. The joint label is the
/// concatenation `[i]_2 = [i_0]_2 [i_1]_2 … [i_{Nt-1}]_2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointConstellation {
    components: Vec<Constellation>,
    offsets: Vec<usize>,
    total_bits: usize,
}

impl JointConstellation {
    pub fn new(parts: Vec<Constellation>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument("joint constellation needs a component".into()));
        }
        let mut offsets = Vec::with_capacity(parts.len());
        let mut total = 0;
        for p in &parts {
            offsets.push(total);
            total += p.bits_per_symbol();
        }
        check_qubits(total)?;
        Ok(Self {
            components: parts,
            offsets,
            total_bits: total,
        })
    }

    pub fn single(c: Constellation) -> Self {
        Self::new(vec![c]).expect("one component")
    }

    /// `n_tx` copies of the same constellation.
    pub fn replicate(c: &Constellation, n_tx: usize) -> Result<Self> {
        Self::new(vec![c.clone(); n_tx])
    }

    pub fn components(&self) -> &[Constellation] {
        &self.components
    }

    pub fn n_tx(&self) -> usize {
        self.components.len()
    }

    pub fn total_bits(&self) -> usize {
        self.total_bits
    }

    pub fn size(&self) -> usize {
        1 << self.total_bits
    }

    /// Global index of the first label bit of component `k`.
    pub fn offset(&self, k: usize) -> usize {
        self.offsets[k]
    }

    pub fn label(&self) -> String {
        let first = self.components[0].label();
        if self.components.iter().all(|c| c.label() == first) {
            if self.n_tx() == 1 {
                first.to_string()
            } else {
                format!("{}x{}", self.n_tx(), first)
            }
        } else {
            self.components.iter().map(|c| c.label()).collect::<Vec<_>>().join("+")
        }
    }

    /// Per-component indices `(i_0, …, i_{Nt-1})` of joint index `i`.
    pub fn split_index(&self, index: usize) -> Vec<usize> {
        self.components
            .iter()
            .zip(&self.offsets)
            .map(|(c, &off)| {
                let shift = self.total_bits - off - c.bits_per_symbol();
                (index >> shift) & (c.size() - 1)
            })
            .collect()
    }

    pub fn join_index(&self, parts: &[usize]) -> Result<usize> {
        if parts.len() != self.n_tx() {
            return Err(Error::DimensionMismatch {
                expected: self.n_tx(),
                found: parts.len(),
            });
        }
        parts.iter().zip(&self.components).try_fold(0usize, |acc, (&i, c)| {
            if i >= c.size() {
                Err(Error::InvalidArgument(format!(
                    "component index {i} out of range for {c}"
                )))
            } else {
                Ok((acc << c.bits_per_symbol()) | i)
            }
        })
    }

    /// Unscaled transmit vector of joint index `i`.
    pub fn symbols(&self, index: usize) -> Vec<Complex> {
        self.split_index(index)
            .into_iter()
            .zip(&self.components)
            .map(|(i, c)| c.point(i))
            .collect()
    }

    /// Global variable indices of component `k`'s in-phase bits.
    pub fn inphase_vars(&self, k: usize) -> Vec<usize> {
        self.components[k]
            .inphase_bits()
            .iter()
            .map(|b| b + self.offsets[k])
            .collect()
    }

    pub fn quadrature_vars(&self, k: usize) -> Vec<usize> {
        self.components[k]
            .quadrature_bits()
            .iter()
            .map(|b| b + self.offsets[k])
            .collect()
    }
}

impl FromStr for JointConstellation {
    type Err = Error;

    /// Comma- or plus-separated list of component constellations.
    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split([',', '+'])
            .map(str::parse)
            .collect::<Result<Vec<Constellation>>>()?;
        Self::new(parts)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Awgn,
    Rayleigh,
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "awgn" => Ok(Self::Awgn),
            "rayleigh" => Ok(Self::Rayleigh),
            other => Err(Error::InvalidArgument(format!("unknown channel `{other}`"))),
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Awgn => "awgn",
            Self::Rayleigh => "rayleigh",
        })
    }
}

/// One draw of `y = H·s + η`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelInstance {
    /// `n_rx × n_tx`, row-major.
    pub h: Vec<Vec<Complex>>,
    pub tx_index: usize,
    #[serde(with = "bitstring")]
    pub tx_bits: Vec<u8>,
    /// Amplitude applied to each antenna's unscaled constellation point.
    pub tx_scale: Vec<f64>,
    /// Scaled transmit vector.
    pub s: Vec<Complex>,
    pub eta: Vec<Complex>,
    pub y: Vec<Complex>,
    /// `null` in JSON for a noiseless instance.
    #[serde(with = "snr")]
    pub snr_db: f64,
    pub channel_kind: ChannelKind,
    pub seed: u64,
}

impl ChannelInstance {
    pub fn n_rx(&self) -> usize {
        self.h.len()
    }

    pub fn n_tx(&self) -> usize {
        self.s.len()
    }

    pub fn is_noiseless(&self) -> bool {
        self.snr_db.is_infinite()
    }
}

fn complex_normal<R: Rng>(rng: &mut R) -> Complex {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(re, im) * FRAC_1_SQRT_2
}

/// Draws an instance with a uniformly random transmitted label.
///
/// Noise is `CN(0, 1)` per receive antenna. Each antenna's constellation is
/// scaled so its average symbol energy equals `10^{snr_db/10}`. An infinite
/// `snr_db` gives a noiseless instance with unscaled points.
pub fn generate_instance(
    joint: &JointConstellation,
    n_rx: usize,
    channel_kind: ChannelKind,
    snr_db: f64,
    seed: u64,
) -> Result<ChannelInstance> {
    generate_instance_with_symbol(joint, n_rx, channel_kind, snr_db, seed, None)
}

/// As [`generate_instance`] but optionally pins the transmitted joint index.
/// The random stream is consumed identically either way.
pub fn generate_instance_with_symbol(
    joint: &JointConstellation,
    n_rx: usize,
    channel_kind: ChannelKind,
    snr_db: f64,
    seed: u64,
    tx_index: Option<usize>,
) -> Result<ChannelInstance> {
    if n_rx == 0 {
        return Err(Error::InvalidArgument("need at least one receive antenna".into()));
    }
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::InvalidArgument(format!("invalid SNR {snr_db} dB")));
    }
    if let Some(t) = tx_index {
        if t >= joint.size() {
            return Err(Error::InvalidArgument(format!("transmit index {t} out of range")));
        }
    }
    let n_tx = joint.n_tx();
    let mut rng = rng_from_seed(seed);
    let drawn = rng.random_range(0..joint.size());
    let tx_index = tx_index.unwrap_or(drawn);

    let h: Vec<Vec<Complex>> = (0..n_rx)
        .map(|_| {
            (0..n_tx)
                .map(|_| match channel_kind {
                    ChannelKind::Awgn => Complex::new(1.0, 0.0),
                    ChannelKind::Rayleigh => complex_normal(&mut rng),
                })
                .collect()
        })
        .collect();
    let noise: Vec<Complex> = (0..n_rx).map(|_| complex_normal(&mut rng)).collect();

    let noiseless = snr_db.is_infinite();
    let tx_scale: Vec<f64> = joint
        .components()
        .iter()
        .map(|c| {
            if noiseless {
                1.0
            } else {
                (10f64.powf(snr_db / 10.0) / c.average_energy()).sqrt()
            }
        })
        .collect();
    let s: Vec<Complex> = joint
        .symbols(tx_index)
        .into_iter()
        .zip(&tx_scale)
        .map(|(p, &a)| p * a)
        .collect();
    let eta = if noiseless {
        vec![Complex::new(0.0, 0.0); n_rx]
    } else {
        noise
    };
    let y = h
        .iter()
        .zip(&eta)
        .map(|(row, &e)| row.iter().zip(&s).map(|(hk, sk)| hk * sk).sum::<Complex>() + e)
        .collect();

    Ok(ChannelInstance {
        h,
        tx_index,
        tx_bits: index_to_bits(tx_index, joint.total_bits()),
        tx_scale,
        s,
        eta,
        y,
        snr_db,
        channel_kind,
        seed,
    })
}

mod bitstring {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &[u8], ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&crate::bits::bits_to_string(bits))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(de)?;
        crate::bits::parse_bits(&text).map_err(serde::de::Error::custom)
    }
}

mod snr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, ser: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            ser.serialize_f64(*v)
        } else {
            ser.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(de)?.unwrap_or(f64::INFINITY))
    }
}
