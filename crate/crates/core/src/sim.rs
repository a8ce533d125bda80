//! Exact density-matrix and Monte-Carlo trajectory simulation.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::channel::{ChannelSampler, PauliChannel};
use crate::circuit::{Circuit, Cycle, Gate};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, Mat2};
use crate::noise::{NoiseContext, NoiseModel};
use crate::outcome::OutcomeDistribution;
use crate::pauli::PauliString;
use crate::readout::apply_readout_noise;
use crate::rng::rng_for;

pub const DENSITY_MAX_QUBITS: usize = 8;
pub const STATE_MAX_QUBITS: usize = 20;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    dim: usize,
    // Row-major.
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn zero_state(n: usize) -> Result<Self> {
        if n == 0 || n > DENSITY_MAX_QUBITS {
            return Err(Error::TooManyQubits { n, limit: DENSITY_MAX_QUBITS });
        }
        let dim = 1 << n;
        let mut data = vec![ZERO; dim * dim];
        data[0] = c(1.0, 0.0);
        Ok(Self { n, dim, data })
    }

    pub fn from_matrix(m: &CMatrix) -> Result<Self> {
        let dim = m.nrows();
        if !dim.is_power_of_two() || m.ncols() != dim || dim < 2 {
            return Err(Error::InvalidArgument("density matrix must be 2^n square".into()));
        }
        let n = dim.trailing_zeros() as usize;
        if n > DENSITY_MAX_QUBITS {
            return Err(Error::TooManyQubits { n, limit: DENSITY_MAX_QUBITS });
        }
        let data = (0..dim * dim).map(|k| m[(k / dim, k % dim)]).collect();
        Ok(Self { n, dim, data })
    }

    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.dim, self.dim, |r, k| self.data[r * self.dim + k])
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for k in r..d {
                worst = worst.max((self.data[r * d + k] - self.data[k * d + r].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.to_matrix().symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    fn debug_check(&self) {
        debug_assert!((self.trace() - c(1.0, 0.0)).norm() < 1e-10, "trace drifted");
        debug_assert!(self.hermiticity_defect() < 1e-10, "hermiticity lost");
    }

    fn shift(&self, q: usize) -> usize {
        self.n - 1 - q
    }

    /// `ρ ↦ UρU†` for a single-qubit `U`.
    pub fn apply_1q(&mut self, q: usize, u: &Mat2) {
        let s = 1usize << self.shift(q);
        let d = self.dim;
        // Rows: ρ ↦ Uρ.
        for r in 0..d {
            if r & s != 0 {
                continue;
            }
            for k in 0..d {
                let (a, b) = (self.data[r * d + k], self.data[(r | s) * d + k]);
                self.data[r * d + k] = u[0][0] * a + u[0][1] * b;
                self.data[(r | s) * d + k] = u[1][0] * a + u[1][1] * b;
            }
        }
        // Columns: ρ ↦ ρU†.
        for r in 0..d {
            for k in 0..d {
                if k & s != 0 {
                    continue;
                }
                let (a, b) = (self.data[r * d + k], self.data[r * d + (k | s)]);
                self.data[r * d + k] = a * u[0][0].conj() + b * u[0][1].conj();
                self.data[r * d + (k | s)] = a * u[1][0].conj() + b * u[1][1].conj();
            }
        }
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) {
        let (cs, ts) = (1usize << self.shift(control), 1usize << self.shift(target));
        let d = self.dim;
        let perm = |i: usize| if i & cs != 0 { i ^ ts } else { i };
        for r in 0..d {
            for k in 0..d {
                let (a, b) = (r * d + k, perm(r) * d + perm(k));
                if a < b {
                    self.data.swap(a, b);
                }
            }
        }
    }

    pub fn apply_cycle(&mut self, cycle: &Cycle) {
        for g in cycle.gates() {
            match *g {
                Gate::Cx { control, target } => self.apply_cx(control, target),
                Gate::Rot { qubit, .. } => self.apply_1q(qubit, &g.matrix2().expect("rotation")),
            }
        }
    }

    /// `Σ_P p(P)·PρP` through the Pauli basis: every Pauli component of ρ is
    /// scaled by its fidelity.
    pub fn apply_pauli_channel(&mut self, ch: &PauliChannel) -> Result<()> {
        if ch.num_qubits() != self.n {
            return Err(Error::SizeMismatch { left: self.n, right: ch.num_qubits() });
        }
        let f = ch.fidelities()?;
        let f = f.as_slice();
        let (n, d) = (self.n, self.dim);
        self.to_pauli_basis();
        // Entry (r, k) now holds the component of the Pauli with, per qubit,
        // x = r_q ⊕ k_q and z = r_q.
        let rev: Vec<usize> = (0..d).map(|i| reverse_bits(i, n)).collect();
        for r in 0..d {
            for k in 0..d {
                let x = rev[r ^ k];
                let z = rev[r];
                self.data[r * d + k] *= f[x | (z << n)];
            }
        }
        self.from_pauli_basis();
        self.debug_check();
        Ok(())
    }

    // Per qubit: (ρ00, ρ01, ρ10, ρ11) ↦ (c_I, c_X, c_Y, c_Z) stored at
    // positions (00, 01, 10, 11).
    fn to_pauli_basis(&mut self) {
        let d = self.dim;
        for q in 0..self.n {
            let s = 1usize << self.shift(q);
            for r in (0..d).filter(|r| r & s == 0) {
                for k in (0..d).filter(|k| k & s == 0) {
                    let (i00, i01, i10, i11) = (r * d + k, r * d + (k | s), (r | s) * d + k, (r | s) * d + (k | s));
                    let (a, b, cc, dd) = (self.data[i00], self.data[i01], self.data[i10], self.data[i11]);
                    self.data[i00] = (a + dd) * 0.5;
                    self.data[i01] = (b + cc) * 0.5;
                    self.data[i10] = (b - cc) * c(0.0, 0.5);
                    self.data[i11] = (a - dd) * 0.5;
                }
            }
        }
    }

    fn from_pauli_basis(&mut self) {
        let d = self.dim;
        for q in 0..self.n {
            let s = 1usize << self.shift(q);
            for r in (0..d).filter(|r| r & s == 0) {
                for k in (0..d).filter(|k| k & s == 0) {
                    let (i00, i01, i10, i11) = (r * d + k, r * d + (k | s), (r | s) * d + k, (r | s) * d + (k | s));
                    let (ci, cx, cy, cz) = (self.data[i00], self.data[i01], self.data[i10], self.data[i11]);
                    self.data[i00] = ci + cz;
                    self.data[i11] = ci - cz;
                    self.data[i01] = cx - cy * c(0.0, 1.0);
                    self.data[i10] = cx + cy * c(0.0, 1.0);
                }
            }
        }
    }

    /// The convex sum `Σ_P p(P)·PρP†` with dense Pauli matrices.
    pub fn apply_pauli_channel_convex(&mut self, ch: &PauliChannel) -> Result<()> {
        if ch.num_qubits() != self.n {
            return Err(Error::SizeMismatch { left: self.n, right: ch.num_qubits() });
        }
        let rho = self.to_matrix();
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (p, prob) in ch.support() {
            let m = p.to_matrix();
            out += &m * &rho * m.adjoint() * c(prob, 0.0);
        }
        *self = Self::from_matrix(&out)?;
        Ok(())
    }

    /// Diagonal of ρ marginalized onto `measured`, in that order.
    pub fn outcome(&self, measured: &[usize]) -> Result<OutcomeDistribution> {
        let diag: Vec<f64> = (0..self.dim).map(|i| self.data[i * self.dim + i].re.max(0.0)).collect();
        marginal(self.n, &diag, measured)
    }
}

fn reverse_bits(i: usize, n: usize) -> usize {
    (0..n).fold(0, |acc, b| acc | (((i >> (n - 1 - b)) & 1) << b))
}

fn marginal(n: usize, full: &[f64], measured: &[usize]) -> Result<OutcomeDistribution> {
    let m = measured.len();
    let mut probs = vec![0.0; 1 << m];
    for (i, &p) in full.iter().enumerate() {
        probs[outcome_index(n, i, measured)] += p;
    }
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    OutcomeDistribution::exact(m, probs)
}

fn outcome_index(n: usize, basis: usize, measured: &[usize]) -> usize {
    measured
        .iter()
        .fold(0, |acc, &q| (acc << 1) | ((basis >> (n - 1 - q)) & 1))
}

/// A pure state for trajectory sampling.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero_state(n: usize) -> Result<Self> {
        if n == 0 || n > STATE_MAX_QUBITS {
            return Err(Error::TooManyQubits { n, limit: STATE_MAX_QUBITS });
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = c(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn apply_1q(&mut self, q: usize, u: &Mat2) {
        let s = 1usize << (self.n - 1 - q);
        for i in 0..self.amps.len() {
            if i & s == 0 {
                let (a, b) = (self.amps[i], self.amps[i | s]);
                self.amps[i] = u[0][0] * a + u[0][1] * b;
                self.amps[i | s] = u[1][0] * a + u[1][1] * b;
            }
        }
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) {
        let (cs, ts) = (1usize << (self.n - 1 - control), 1usize << (self.n - 1 - target));
        for i in 0..self.amps.len() {
            if i & cs != 0 && i & ts == 0 {
                self.amps.swap(i, i | ts);
            }
        }
    }

    pub fn apply_cycle(&mut self, cycle: &Cycle) {
        for g in cycle.gates() {
            match *g {
                Gate::Cx { control, target } => self.apply_cx(control, target),
                Gate::Rot { qubit, .. } => self.apply_1q(qubit, &g.matrix2().expect("rotation")),
            }
        }
    }

    /// Applies a Pauli up to global phase.
    pub fn apply_pauli(&mut self, p: &PauliString) {
        let n = self.n;
        let (x, z) = (reverse_bits(p.x_mask() as usize, n), reverse_bits(p.z_mask() as usize, n));
        if x == 0 && z == 0 {
            return;
        }
        let old = self.amps.clone();
        let y_count = (p.x_mask() & p.z_mask()).count_ones();
        // Y = iXZ per qubit.
        let phase = match y_count % 4 {
            0 => c(1.0, 0.0),
            1 => c(0.0, 1.0),
            2 => c(-1.0, 0.0),
            _ => c(0.0, -1.0),
        };
        for (i, a) in old.iter().enumerate() {
            let sign = if (i & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            self.amps[i ^ x] = *a * phase * sign;
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Exact output distribution of `c` under `nm`.
pub fn simulate_exact(c: &Circuit, nm: &NoiseModel) -> Result<OutcomeDistribution> {
    simulate_exact_with(c, nm, &NoiseContext::default())
}

pub fn simulate_exact_with(c: &Circuit, nm: &NoiseModel, ctx: &NoiseContext) -> Result<OutcomeDistribution> {
    if c.num_qubits() > DENSITY_MAX_QUBITS {
        return Err(Error::TooManyQubits { n: c.num_qubits(), limit: DENSITY_MAX_QUBITS });
    }
    let schedule = nm.schedule(c, ctx)?;
    if schedule.iter().all(Option::is_none) {
        let d = ideal_distribution(c)?;
        return match nm.readout_for(c)? {
            Some(cm) => apply_readout_noise(&d, &cm),
            None => Ok(d),
        };
    }
    let mut rho = DensityMatrix::zero_state(c.num_qubits())?;
    for (cy, noise) in c.cycles().iter().zip(&schedule) {
        rho.apply_cycle(cy);
        rho.debug_check();
        if let Some(ch) = noise {
            rho.apply_pauli_channel(ch)?;
        }
    }
    let d = rho.outcome(c.measured_qubits())?;
    match nm.readout_for(c)? {
        Some(cm) => apply_readout_noise(&d, &cm),
        None => Ok(d),
    }
}

/// Noiseless output of `c` from a pure-state simulation.
pub fn ideal_distribution(c: &Circuit) -> Result<OutcomeDistribution> {
    let mut psi = StateVector::zero_state(c.num_qubits())?;
    for cy in c.cycles() {
        psi.apply_cycle(cy);
    }
    marginal(c.num_qubits(), &psi.probabilities(), c.measured_qubits())
}

/// Shot-by-shot sampling: one Pauli per noisy cycle, then one measurement and
/// per-bit readout flips. Shot `s` draws from the substream `(seed, s)`, so the
/// counts do not depend on thread scheduling.
pub fn simulate_trajectories(
    c: &Circuit,
    nm: &NoiseModel,
    ctx: &NoiseContext,
    shots: u64,
    seed: u64,
) -> Result<OutcomeDistribution> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be >= 1".into()));
    }
    let n = c.num_qubits();
    let samplers: Vec<Option<ChannelSampler>> = nm
        .schedule(c, ctx)?
        .iter()
        .map(|ch| ch.as_ref().map(|ch| ch.sampler()))
        .collect();
    let readout = nm.readout_for(c)?;
    let measured = c.measured_qubits().to_vec();
    let m = measured.len();
    // Trajectories share everything up to the first noisy cycle.
    let split = samplers.iter().position(|s| s.is_some()).unwrap_or(samplers.len());
    let mut prefix = StateVector::zero_state(n)?;
    for cy in &c.cycles()[..split] {
        prefix.apply_cycle(cy);
    }
    let counts = (0..shots)
        .into_par_iter()
        .map(|shot| {
            let mut rng = rng_for(seed, &[shot]);
            let mut psi = prefix.clone();
            for (cy, s) in c.cycles()[split..].iter().zip(&samplers[split..]) {
                psi.apply_cycle(cy);
                if let Some(s) = s {
                    psi.apply_pauli(&s.sample(&mut rng));
                }
            }
            let probs = psi.probabilities();
            let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
            let mut acc = 0.0;
            let mut basis = probs.len() - 1;
            for (i, p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    basis = i;
                    break;
                }
            }
            let mut out = outcome_index(n, basis, &measured);
            if let Some(cm) = &readout {
                for j in 0..m {
                    let bit = (out >> (m - 1 - j)) & 1;
                    // m[obs][true]: flip with probability of the off-diagonal entry.
                    let flip = cm.bit(j)[1 - bit][bit];
                    if rng.random::<f64>() < flip {
                        out ^= 1 << (m - 1 - j);
                    }
                }
            }
            out
        })
        .fold(
            || vec![0u64; 1 << m],
            |mut acc, o| {
                acc[o] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; 1 << m],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    OutcomeDistribution::from_counts(m, counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build_scattering_circuit, ScatteringParams};
    use crate::circuit::{Angle, Gate};
    use crate::readout::ConfusionMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_circuit(n: usize, depth: usize, seed: u64) -> Circuit {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cycles = Vec::new();
        for k in 0..depth {
            if k % 2 == 0 {
                let gates = (0..n)
                    .map(|q| {
                        let a = Angle::Radians(rng.random_range(-3.0..3.0));
                        if rng.random::<bool>() { Gate::rx(q, a) } else { Gate::rz(q, a) }
                    })
                    .collect();
                cycles.push(Cycle::new(gates).unwrap());
            } else {
                let c = rng.random_range(0..n);
                let t = (c + rng.random_range(1..n)) % n;
                cycles.push(Cycle::new(vec![Gate::cx(c, t)]).unwrap());
            }
        }
        Circuit::from_cycles(n, cycles).unwrap()
    }

    fn random_channel(n: usize, seed: u64, scale: f64) -> PauliChannel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries: Vec<(PauliString, f64)> =
            PauliString::all(n).skip(1).map(|p| (p, rng.random::<f64>() * scale)).collect();
        let err: f64 = entries.iter().map(|e| e.1).sum();
        entries.push((PauliString::identity(n), 1.0 - err));
        PauliChannel::new(n, entries).unwrap()
    }

    #[test]
    fn noiseless_matches_unitary_oracle() {
        for seed in 0..5 {
            let c = random_circuit(3, 9, seed).with_measured(vec![2, 0, 1]).unwrap();
            let d = simulate_exact(&c, &NoiseModel::noiseless(3)).unwrap();
            let u = c.unitary().unwrap();
            let col: Vec<f64> = (0..8).map(|i| u[(i, 0)].norm_sqr()).collect();
            let oracle = marginal(3, &col, &[2, 0, 1]).unwrap();
            assert!(d.total_variation(&oracle).unwrap() < 1e-12);
            assert!(ideal_distribution(&c).unwrap().total_variation(&oracle).unwrap() < 1e-12);
        }
    }

    #[test]
    fn identity_channels_change_nothing() {
        let c = random_circuit(3, 9, 7);
        let sigs: Vec<_> = c.cycles().iter().filter(|c| c.is_hard()).map(|c| c.signature()).collect();
        let nm = sigs
            .into_iter()
            .fold(NoiseModel::noiseless(3), |m, s| m.with_channel(s, PauliChannel::identity(3)).unwrap());
        let a = simulate_exact(&c, &nm).unwrap();
        let b = simulate_exact(&c, &NoiseModel::noiseless(3)).unwrap();
        assert!(a.total_variation(&b).unwrap() < 1e-14);
    }

    #[test]
    fn bit_flip_after_x_gate() {
        let p = 0.07;
        let c = Circuit::from_cycles(1, vec![Cycle::new(vec![Gate::rx(0, Angle::Pi { num: 1, den: 1 })]).unwrap()])
            .unwrap();
        let flip = PauliChannel::new(1, [("I".parse().unwrap(), 1.0 - p), ("X".parse().unwrap(), p)]).unwrap();
        let nm = NoiseModel::noiseless(1).with_easy_noise(flip).unwrap();
        let d = simulate_exact(&c, &nm).unwrap();
        assert!((d.prob_of("1").unwrap() - (1.0 - p)).abs() < 1e-14);
    }

    #[test]
    fn fast_channel_matches_convex_sum() {
        for seed in 0..4 {
            let c = random_circuit(3, 6, seed);
            let mut a = DensityMatrix::zero_state(3).unwrap();
            for cy in c.cycles() {
                a.apply_cycle(cy);
            }
            let mut b = a.clone();
            let ch = random_channel(3, seed, 0.01);
            a.apply_pauli_channel(&ch).unwrap();
            b.apply_pauli_channel_convex(&ch).unwrap();
            assert!(crate::linalg::max_abs_diff(&a.to_matrix(), &b.to_matrix()) < 1e-14);
        }
    }

    #[test]
    fn permuting_gates_inside_cycles_is_invisible() {
        let c = random_circuit(4, 8, 3);
        let flipped = Circuit::from_cycles(
            4,
            c.cycles().iter().map(|cy| Cycle::new(cy.gates().iter().rev().copied().collect()).unwrap()).collect(),
        )
        .unwrap();
        let nm = NoiseModel::depolarizing(4, 0.03).unwrap();
        let a = simulate_exact(&c, &nm).unwrap();
        let b = simulate_exact(&flipped, &nm).unwrap();
        assert!(a.total_variation(&b).unwrap() < 1e-14);
    }

    #[test]
    fn trajectories_converge_to_exact() {
        for seed in 0..3 {
            let c = random_circuit(3, 9, 100 + seed);
            let nm = NoiseModel::depolarizing(3, 0.05)
                .unwrap()
                .with_readout(ConfusionMatrix::uniform(3, 0.02, 0.05).unwrap())
                .unwrap();
            let exact = simulate_exact(&c, &nm).unwrap();
            let shots = 100_000;
            let sampled = simulate_trajectories(&c, &nm, &NoiseContext::default(), shots, seed).unwrap();
            assert_eq!(sampled.shots(), Some(shots));
            let tv = sampled.total_variation(&exact).unwrap();
            assert!(tv <= 5.0 * (8.0 / shots as f64).sqrt(), "tv {tv}");
            // Per-outcome 5σ binomial check.
            let f = sampled.probabilities().unwrap();
            for (q, p) in f.iter().zip(exact.probabilities().unwrap()) {
                let sigma = (p * (1.0 - p) / shots as f64).sqrt().max(1e-9);
                assert!((q - p).abs() <= 5.0 * sigma + 1e-12);
            }
        }
    }

    #[test]
    fn trajectories_are_deterministic() {
        let c = random_circuit(3, 7, 9);
        let nm = NoiseModel::depolarizing(3, 0.05).unwrap();
        let a = simulate_trajectories(&c, &nm, &NoiseContext::default(), 5000, 42).unwrap();
        let b = simulate_trajectories(&c, &nm, &NoiseContext::default(), 5000, 42).unwrap();
        assert_eq!(a, b);
        assert!(simulate_trajectories(&c, &nm, &NoiseContext::default(), 0, 42).is_err());
    }

    #[test]
    fn pauli_on_state_matches_matrix() {
        let c = random_circuit(3, 5, 1);
        let mut psi = StateVector::zero_state(3).unwrap();
        for cy in c.cycles() {
            psi.apply_cycle(cy);
        }
        for p in PauliString::all(3) {
            let mut a = psi.clone();
            a.apply_pauli(&p);
            let v = nalgebra::DVector::from_vec(psi.amplitudes().to_vec());
            let w = p.to_matrix() * v;
            let overlap: Complex64 = w.iter().zip(a.amplitudes()).map(|(x, y)| x.conj() * y).sum();
            assert!((overlap.norm() - 1.0).abs() < 1e-12, "{p}");
        }
    }

    #[test]
    fn too_many_qubits() {
        assert!(DensityMatrix::zero_state(9).is_err());
        let c = Circuit::new(9).unwrap();
        assert!(simulate_exact(&c, &NoiseModel::noiseless(9)).is_err());
    }

    #[test]
    fn scattering_circuit_at_default_is_well_defined() {
        let c = build_scattering_circuit(&ScatteringParams::default(), 2).unwrap();
        let d = simulate_exact(&c, &NoiseModel::depolarizing(4, 0.01).unwrap()).unwrap();
        assert!((d.probabilities().unwrap().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn density_matrix_stays_physical(seed in 0u64..1000) {
            let circ = random_circuit(3, 8, seed);
            let mut rho = DensityMatrix::zero_state(3).unwrap();
            for (k, cy) in circ.cycles().iter().enumerate() {
                rho.apply_cycle(cy);
                rho.apply_pauli_channel(&random_channel(3, seed + k as u64, 0.02)).unwrap();
                prop_assert!((rho.trace() - c(1.0, 0.0)).norm() < 1e-12);
                prop_assert!(rho.hermiticity_defect() < 1e-12);
                prop_assert!(rho.min_eigenvalue() > -1e-10);
            }
        }
    }
}
