//! Pauli stochastic channels `ρ ↦ Σ_P p(P) PρP†` and their diagonal
//! (fidelity) representation.
//!
//! The fidelity of a string `Q` is `f(Q) = Σ_P p(P)·(−1)^{⟨P,Q⟩}` with the
//! symplectic product `⟨P,Q⟩`. In that basis composition is pointwise
//! multiplication, which is how channel powers are taken.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

/// Registers up to this size keep a dense `4^n` probability table.
pub const DENSE_MAX_QUBITS: usize = 4;
/// Largest register for which the fidelity transform is materialized.
pub const TRANSFORM_MAX_QUBITS: usize = 8;

const INPUT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
enum Table {
    Dense(Vec<f64>),
    Sparse(BTreeMap<(u64, u64), f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PauliChannel {
    n: usize,
    table: Table,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PauliFidelities {
    n: usize,
    f: Vec<f64>,
}

impl PauliChannel {
    pub fn identity(n: usize) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert((0, 0), 1.0);
        Self::from_map(n, entries)
    }

    /// Builds a channel from `(string, probability)` pairs. Phases are ignored
    /// and repeated strings are summed. The total must be 1 within 1e-9; the
    /// stored table is renormalized exactly.
    pub fn new(n: usize, entries: impl IntoIterator<Item = (PauliString, f64)>) -> Result<Self> {
        let mut map: BTreeMap<(u64, u64), f64> = BTreeMap::new();
        for (p, prob) in entries {
            if p.num_qubits() != n {
                return Err(Error::SizeMismatch { left: n, right: p.num_qubits() });
            }
            if !prob.is_finite() || !(0.0..=1.0 + INPUT_TOL).contains(&prob) {
                return Err(Error::InvalidChannel(format!("probability {prob} for {p}")));
            }
            *map.entry((p.x_mask(), p.z_mask())).or_insert(0.0) += prob;
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > INPUT_TOL {
            return Err(Error::InvalidChannel(format!("probabilities sum to {total}")));
        }
        map.retain(|_, v| *v > 0.0);
        for v in map.values_mut() {
            *v /= total;
        }
        Ok(Self::from_map(n, map))
    }

    fn from_map(n: usize, map: BTreeMap<(u64, u64), f64>) -> Self {
        if n <= DENSE_MAX_QUBITS {
            let mut dense = vec![0.0; 1 << (2 * n)];
            for ((x, z), p) in map {
                dense[(x as usize) | ((z as usize) << n)] = p;
            }
            Self { n, table: Table::Dense(dense) }
        } else {
            Self { n, table: Table::Sparse(map) }
        }
    }

    /// From a dense probability vector indexed by `PauliString::index`.
    /// Tiny negative values from floating-point round-off are clipped.
    fn from_dense_probs(n: usize, probs: Vec<f64>) -> Result<Self> {
        if let Some((i, &p)) = probs
            .iter()
            .enumerate()
            .find(|(_, &p)| !(-INPUT_TOL..=1.0 + INPUT_TOL).contains(&p))
        {
            return Err(Error::InvalidChannel(format!(
                "probability {p:e} for {} outside [0, 1]",
                PauliString::from_index(n, i)
            )));
        }
        let clipped: Vec<f64> = probs.into_iter().map(|p| p.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if (total - 1.0).abs() > INPUT_TOL {
            return Err(Error::InvalidChannel(format!("probabilities sum to {total}")));
        }
        let map = clipped
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 1e-300)
            .map(|(i, &p)| {
                let s = PauliString::from_index(n, i);
                ((s.x_mask(), s.z_mask()), p / total)
            })
            .collect();
        Ok(Self::from_map(n, map))
    }

    /// Single-qubit depolarizing `ρ ↦ (1−p)ρ + p·I/2` on each listed qubit.
    pub fn local_depolarizing(n: usize, qubits: &[usize], p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidChannel(format!("depolarizing strength {p}")));
        }
        let single = [1.0 - 0.75 * p, 0.25 * p, 0.25 * p, 0.25 * p];
        let factors = qubits
            .iter()
            .map(|&q| {
                let entries = Pauli::ALL
                    .iter()
                    .zip(single)
                    .map(|(&pl, pr)| PauliString::single(n, q, pl).map(|s| (s, pr)))
                    .collect::<Result<Vec<_>>>()?;
                PauliChannel::new(n, entries)
            })
            .collect::<Result<Vec<_>>>()?;
        factors
            .iter()
            .try_fold(PauliChannel::identity(n), |acc, f| acc.compose(f))
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn prob(&self, p: &PauliString) -> f64 {
        if p.num_qubits() != self.n {
            return 0.0;
        }
        match &self.table {
            Table::Dense(v) => v[p.index()],
            Table::Sparse(m) => m.get(&(p.x_mask(), p.z_mask())).copied().unwrap_or(0.0),
        }
    }

    /// Nonzero entries in canonical order.
    pub fn support(&self) -> Vec<(PauliString, f64)> {
        match &self.table {
            Table::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(i, &p)| (PauliString::from_index(self.n, i), p))
                .collect(),
            Table::Sparse(m) => m
                .iter()
                .map(|(&(x, z), &p)| {
                    (PauliString::from_masks(self.n, x, z, 0).expect("stored masks fit"), p)
                })
                .collect(),
        }
    }

    pub fn total_probability(&self) -> f64 {
        match &self.table {
            Table::Dense(v) => v.iter().sum(),
            Table::Sparse(m) => m.values().sum(),
        }
    }

    pub fn error_probability(&self) -> f64 {
        1.0 - self.prob(&PauliString::identity(self.n))
    }

    pub fn is_identity(&self) -> bool {
        self.error_probability() <= 0.0
    }

    /// Dense probability vector; only for registers the transform supports.
    pub fn dense_probs(&self) -> Result<Vec<f64>> {
        if self.n > TRANSFORM_MAX_QUBITS {
            return Err(Error::TooManyQubits { n: self.n, limit: TRANSFORM_MAX_QUBITS });
        }
        Ok(match &self.table {
            Table::Dense(v) => v.clone(),
            Table::Sparse(m) => {
                let mut v = vec![0.0; 1 << (2 * self.n)];
                for (&(x, z), &p) in m {
                    v[(x as usize) | ((z as usize) << self.n)] = p;
                }
                v
            }
        })
    }

    /// Sequential application: first `self`, then `other`. Pauli channels
    /// commute, so the order only matters for bookkeeping.
    pub fn compose(&self, other: &PauliChannel) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::SizeMismatch { left: self.n, right: other.n });
        }
        let mut map: BTreeMap<(u64, u64), f64> = BTreeMap::new();
        let a = self.support();
        let b = other.support();
        for (pa, qa) in &a {
            for (pb, qb) in &b {
                let key = (pa.x_mask() ^ pb.x_mask(), pa.z_mask() ^ pb.z_mask());
                *map.entry(key).or_insert(0.0) += qa * qb;
            }
        }
        Ok(Self::from_map(self.n, map))
    }

    pub fn fidelities(&self) -> Result<PauliFidelities> {
        let probs = self.dense_probs()?;
        Ok(PauliFidelities { n: self.n, f: probs_to_fidelities(self.n, &probs) })
    }

    pub fn from_fidelities(f: &PauliFidelities) -> Result<Self> {
        Self::from_dense_probs(f.n, fidelities_to_probs(f.n, &f.f))
    }

    /// `E^k` through the fidelity representation.
    pub fn power(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("channel power must be >= 1".into()));
        }
        let f = self.fidelities()?;
        Self::from_fidelities(&f.map(|x| x.powi(k as i32)))
    }

    /// `E^s` for real `s > 0`. Non-integer powers need every fidelity to be
    /// strictly positive.
    pub fn power_real(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidArgument(format!("channel exponent {s}")));
        }
        let f = self.fidelities()?;
        if s.fract() != 0.0 {
            if let Some(bad) = f.f.iter().find(|&&x| x <= 0.0) {
                return Err(Error::InvalidChannel(format!(
                    "fractional power of a channel with fidelity {bad}"
                )));
            }
        }
        Self::from_fidelities(&f.map(|x| x.powf(s)))
    }

    /// Multiplies every error probability by `factor`, moving the difference
    /// onto the identity. Used for per-batch drift.
    pub fn scale_errors(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(Error::InvalidArgument(format!("drift factor {factor}")));
        }
        let id = PauliString::identity(self.n);
        let errors: Vec<(PauliString, f64)> = self
            .support()
            .into_iter()
            .filter(|(p, _)| !p.is_identity())
            .map(|(p, q)| (p, q * factor))
            .collect();
        let err_total: f64 = errors.iter().map(|(_, q)| q).sum();
        if err_total > 1.0 + INPUT_TOL {
            return Err(Error::InvalidChannel(format!(
                "drift factor {factor} pushes error probability to {err_total}"
            )));
        }
        let mut entries = errors;
        entries.push((id, (1.0 - err_total).max(0.0)));
        Self::new(self.n, entries)
    }

    /// `C·E·C†` for `C` a product of CX gates: each error string is mapped
    /// through the CX conjugation.
    pub fn conjugate_by_cx(&self, gates: &[(usize, usize)]) -> Result<Self> {
        let mut map: BTreeMap<(u64, u64), f64> = BTreeMap::new();
        for (p, q) in self.support() {
            let img = gates.iter().try_fold(p, |acc, &(c, t)| acc.conjugate_through_cx(c, t))?;
            *map.entry((img.x_mask(), img.z_mask())).or_insert(0.0) += q;
        }
        Ok(Self::from_map(self.n, map))
    }

    /// `½ Σ |p(P) − q(P)|`.
    pub fn total_variation(&self, other: &PauliChannel) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::SizeMismatch { left: self.n, right: other.n });
        }
        let mut diff: BTreeMap<(u64, u64), f64> = BTreeMap::new();
        for (p, q) in self.support() {
            *diff.entry((p.x_mask(), p.z_mask())).or_insert(0.0) += q;
        }
        for (p, q) in other.support() {
            *diff.entry((p.x_mask(), p.z_mask())).or_insert(0.0) -= q;
        }
        Ok(0.5 * diff.values().map(|d| d.abs()).sum::<f64>())
    }

    pub fn sampler(&self) -> ChannelSampler {
        let support = self.support();
        let mut acc = 0.0;
        let mut cdf = Vec::with_capacity(support.len());
        let mut paulis = Vec::with_capacity(support.len());
        for (p, q) in support {
            acc += q;
            cdf.push(acc);
            paulis.push(p);
        }
        ChannelSampler { cdf, paulis }
    }

    /// Draws one Pauli; for repeated draws build a [`ChannelSampler`] once.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PauliString {
        self.sampler().sample(rng)
    }
}

/// Inverse-CDF sampler over a channel's support.
#[derive(Clone, Debug)]
pub struct ChannelSampler {
    cdf: Vec<f64>,
    paulis: Vec<PauliString>,
}

impl ChannelSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PauliString {
        let u: f64 = rng.random::<f64>() * self.cdf.last().copied().unwrap_or(1.0);
        let i = self.cdf.partition_point(|&c| c <= u).min(self.paulis.len() - 1);
        self.paulis[i]
    }
}

impl PauliFidelities {
    pub fn new(n: usize, f: Vec<f64>) -> Result<Self> {
        if n > TRANSFORM_MAX_QUBITS {
            return Err(Error::TooManyQubits { n, limit: TRANSFORM_MAX_QUBITS });
        }
        if f.len() != 1 << (2 * n) {
            return Err(Error::InvalidArgument(format!(
                "expected {} fidelities, got {}",
                1usize << (2 * n),
                f.len()
            )));
        }
        if (f[0] - 1.0).abs() > INPUT_TOL {
            return Err(Error::InvalidArgument(format!("identity fidelity {}", f[0])));
        }
        if f.iter().any(|x| !x.is_finite() || x.abs() > 1.0 + INPUT_TOL) {
            return Err(Error::InvalidArgument("fidelities must lie in [-1, 1]".into()));
        }
        Ok(Self { n, f })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn get(&self, p: &PauliString) -> f64 {
        self.f[p.index()]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.f
    }

    pub fn map(&self, g: impl Fn(f64) -> f64) -> Self {
        Self { n: self.n, f: self.f.iter().map(|&x| g(x)).collect() }
    }
}

/// In-place Walsh–Hadamard transform (unnormalized).
pub fn walsh_hadamard(v: &mut [f64]) {
    let len = v.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

// The symplectic character (−1)^{x_P·z_Q + z_P·x_Q} is the Walsh character of
// P's index against Q's index with its x and z halves exchanged.
fn swap_halves(n: usize, idx: usize) -> usize {
    let m = (1usize << n) - 1;
    (idx >> n) | ((idx & m) << n)
}

pub(crate) fn probs_to_fidelities(n: usize, probs: &[f64]) -> Vec<f64> {
    let mut w = probs.to_vec();
    walsh_hadamard(&mut w);
    (0..w.len()).map(|q| w[swap_halves(n, q)]).collect()
}

pub(crate) fn fidelities_to_probs(n: usize, f: &[f64]) -> Vec<f64> {
    let mut w: Vec<f64> = (0..f.len()).map(|k| f[swap_halves(n, k)]).collect();
    walsh_hadamard(&mut w);
    let scale = 1.0 / w.len() as f64;
    w.iter().map(|x| x * scale).collect()
}
