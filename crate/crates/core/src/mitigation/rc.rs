//! Randomized compiling: a uniformly random Pauli frame before every hard
//! cycle, its CX-propagated correction after, and all frames merged into the
//! surrounding easy layers.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::circuit::{Angle, Circuit, Cycle, Gate};
use crate::error::{Error, Result};
use crate::linalg::{c, mat2_mul, Mat2};
use crate::pauli::{Pauli, PauliString};
use crate::rng::rng_for;

const ANGLE_EPS: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct RcEnsemble {
    pub base: Circuit,
    pub randomizations: Vec<Circuit>,
}

impl RcEnsemble {
    pub fn n_rand(&self) -> usize {
        self.randomizations.len()
    }
}

/// `total` shots over `n_rand` randomizations; the remainder goes to the
/// first ones.
pub fn split_shots(total: u64, n_rand: usize) -> Vec<u64> {
    let n = n_rand as u64;
    (0..n).map(|i| total / n + u64::from(i < total % n)).collect()
}

/// A circuit reduced to alternating single-qubit layers and CX-only cycles.
#[derive(Clone, Debug)]
struct Skeleton {
    n: usize,
    layers: Vec<Vec<Mat2>>,
    hards: Vec<Vec<(usize, usize)>>,
    measured: Vec<usize>,
}

fn eye2() -> Mat2 {
    [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]
}

impl Skeleton {
    // Rotations sharing a hard cycle act on other qubits than its CX gates,
    // so they move into the preceding layer.
    fn of(circuit: &Circuit) -> Self {
        let n = circuit.num_qubits();
        let mut layers = Vec::new();
        let mut hards = Vec::new();
        let mut cur = vec![eye2(); n];
        for cy in circuit.cycles() {
            for g in cy.rotations() {
                if let Gate::Rot { qubit, .. } = *g {
                    cur[qubit] = mat2_mul(&g.matrix2().expect("rotation"), &cur[qubit]);
                }
            }
            if cy.is_hard() {
                layers.push(std::mem::replace(&mut cur, vec![eye2(); n]));
                hards.push(cy.cx_gates().collect());
            }
        }
        layers.push(cur);
        Self { n, layers, hards, measured: circuit.measured_qubits().to_vec() }
    }

    fn dress(&self, frames: &[PauliString]) -> Result<Circuit> {
        debug_assert_eq!(frames.len(), self.hards.len());
        let corrections = frames
            .iter()
            .zip(&self.hards)
            .map(|(t, cxs)| cxs.iter().try_fold(*t, |acc, &(ctl, tgt)| acc.conjugate_through_cx(ctl, tgt)))
            .collect::<Result<Vec<_>>>()?;
        let mut cycles = Vec::new();
        for (k, layer) in self.layers.iter().enumerate() {
            let dressed: Vec<Mat2> = (0..self.n)
                .map(|q| {
                    let mut u = layer[q];
                    if k > 0 {
                        u = mat2_mul(&u, &corrections[k - 1].get(q).matrix());
                    }
                    if k < frames.len() {
                        u = mat2_mul(&frames[k].get(q).matrix(), &u);
                    }
                    u
                })
                .collect();
            emit_layer(&dressed, &mut cycles)?;
            if let Some(cxs) = self.hards.get(k) {
                cycles.push(Cycle::new(cxs.iter().map(|&(a, b)| Gate::cx(a, b)).collect())?);
            }
        }
        Circuit::from_cycles(self.n, cycles)?.with_measured(self.measured.clone())
    }
}

/// Each qubit's `Rz(a)Rx(b)Rz(c)` as up to three easy cycles in time order.
fn emit_layer(per_qubit: &[Mat2], out: &mut Vec<Cycle>) -> Result<()> {
    let angles: Vec<(f64, f64, f64)> = per_qubit.iter().map(zxz_angles).collect();
    let pick = [|t: &(f64, f64, f64)| t.2, |t: &(f64, f64, f64)| t.1, |t: &(f64, f64, f64)| t.0];
    for (slot, get) in pick.iter().enumerate() {
        let gates: Vec<Gate> = angles
            .iter()
            .enumerate()
            .filter(|(_, t)| get(t).abs() > ANGLE_EPS)
            .map(|(q, t)| {
                let a = Angle::Radians(get(t));
                if slot == 1 { Gate::rx(q, a) } else { Gate::rz(q, a) }
            })
            .collect();
        if !gates.is_empty() {
            out.push(Cycle::new(gates)?);
        }
    }
    Ok(())
}

/// `(a, b, c)` with `u = e^{iφ}·Rz(a)·Rx(b)·Rz(c)`.
pub fn zxz_angles(u: &Mat2) -> (f64, f64, f64) {
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let s = det.sqrt();
    let v: Vec<Complex64> = [u[0][0], u[0][1], u[1][0], u[1][1]].iter().map(|x| x / s).collect();
    let (v00, v10, v11) = (v[0], v[2], v[3]);
    let b = 2.0 * v10.norm().atan2(v00.norm());
    // v11 = ±cos(b/2)·e^{i(a+c)/2}, i·v10 = ±sin(b/2)·e^{i(a−c)/2}.
    let half_sum = if v11.norm() < 1e-12 { 0.0 } else { v11.arg() };
    let half_diff = if v10.norm() < 1e-12 { 0.0 } else { (v10 * c(0.0, 1.0)).arg() };
    let wrap = |x: f64| (x + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI;
    (wrap(half_sum + half_diff), b, wrap(half_sum - half_diff))
}

pub fn random_pauli<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PauliString {
    let paulis: Vec<Pauli> = (0..n).map(|_| Pauli::ALL[rng.random_range(0..4)]).collect();
    PauliString::from_paulis(&paulis)
}

/// The circuit recompiled with the given frame before each hard cycle.
pub fn rc_dress(circuit: &Circuit, frames: &[PauliString]) -> Result<Circuit> {
    let sk = Skeleton::of(circuit);
    if frames.len() != sk.hards.len() {
        return Err(Error::InvalidArgument(format!(
            "{} frames for {} hard cycles",
            frames.len(),
            sk.hards.len()
        )));
    }
    if let Some(f) = frames.iter().find(|f| f.num_qubits() != sk.n) {
        return Err(Error::SizeMismatch { left: sk.n, right: f.num_qubits() });
    }
    sk.dress(frames)
}

/// `n_rand` independent randomizations; randomization `r` draws from the
/// substream `(seed, r)`.
pub fn rc_compile(circuit: &Circuit, n_rand: usize, seed: u64) -> Result<RcEnsemble> {
    if n_rand == 0 {
        return Err(Error::InvalidArgument("n_rand must be >= 1".into()));
    }
    let sk = Skeleton::of(circuit);
    let randomizations = (0..n_rand)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_for(seed, &[r as u64]);
            let frames: Vec<PauliString> = sk.hards.iter().map(|_| random_pauli(sk.n, &mut rng)).collect();
            sk.dress(&frames)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RcEnsemble { base: circuit.clone(), randomizations })
}
