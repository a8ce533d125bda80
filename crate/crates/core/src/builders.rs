//! Builders for the scattering circuits: wave-packet preparation, Trotter
//! steps of the Ising chain with a step potential, and the inverse QFTr
//! measurement stage that maps the ±k momentum states onto basis states.

use serde::{Deserialize, Serialize};

use crate::circuit::{Angle, Circuit, Cycle, Gate};
use crate::error::{Error, Result};

/// Euler angles of the six U blocks in units of π/4, as `(α, β, γ)`.
const U_TABLE: [(i64, i64, i64); 6] = [
    (-1, 2, 4),
    (4, 3, -2),
    (2, 2, -3),
    (-3, 2, 4),
    (-3, 2, 4),
    (0, 0, -2),
];

fn quarter_pi(k: i64) -> Angle {
    Angle::pi_frac(k, 4).expect("nonzero denominator")
}

/// The gates of `U_i` on `qubit` in matrix-product order: `Rz(α), Rx(β), Rz(γ)`
/// (so `Rz(γ)` acts first). `U_2` is the XZX exception `Rx(α), Rz(β), Rx(γ)`.
pub fn u_gate(i: usize, qubit: usize) -> Result<Vec<Gate>> {
    if !(1..=6).contains(&i) {
        return Err(Error::UGateIndex(i));
    }
    let (a, b, g) = U_TABLE[i - 1];
    let (a, b, g) = (quarter_pi(a), quarter_pi(b), quarter_pi(g));
    Ok(if i == 2 {
        vec![Gate::rx(qubit, a), Gate::rz(qubit, b), Gate::rx(qubit, g)]
    } else {
        vec![Gate::rz(qubit, a), Gate::rx(qubit, b), Gate::rz(qubit, g)]
    })
}

/// `U_i` as easy cycles in time order, zero rotations dropped.
pub fn u_gate_cycles(i: usize, qubit: usize) -> Result<Vec<Cycle>> {
    let gates = u_gate(i, qubit)?;
    gates
        .into_iter()
        .rev()
        .filter(|g| !matches!(g, Gate::Rot { angle, .. } if angle.is_zero()))
        .map(|g| Cycle::new(vec![g]))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrepSpec {
    /// XX rotation angle; its sign sets the direction of the packet.
    pub theta: Angle,
    pub site_a: usize,
    pub site_b: usize,
}

impl Default for PrepSpec {
    fn default() -> Self {
        Self { theta: Angle::Pi { num: -1, den: 2 }, site_a: 0, site_b: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatteringParams {
    pub n_sites: usize,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "h_T")]
    pub h_t: f64,
    #[serde(rename = "U")]
    pub u: f64,
    /// 1-based site carrying the step potential.
    #[serde(rename = "N_S")]
    pub n_s: usize,
    pub dt: f64,
    pub prep: PrepSpec,
}

impl Default for ScatteringParams {
    fn default() -> Self {
        Self { n_sites: 4, j: 1.0, h_t: 1.0, u: 1.0, n_s: 4, dt: 0.5, prep: PrepSpec::default() }
    }
}

impl ScatteringParams {
    pub fn free(&self) -> Self {
        Self { u: 0.0, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n_sites < 2 {
            return bad(format!("n_sites = {} (need >= 2)", self.n_sites));
        }
        if !(1..=self.n_sites).contains(&self.n_s) {
            return bad(format!("N_S = {} outside 1..={}", self.n_s, self.n_sites));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt = {}", self.dt));
        }
        if ![self.j, self.h_t, self.u].iter().all(|x| x.is_finite()) {
            return bad("non-finite coupling".into());
        }
        let p = &self.prep;
        if p.site_a == p.site_b || p.site_a >= self.n_sites || p.site_b >= self.n_sites {
            return bad(format!("prep sites ({}, {}) invalid", p.site_a, p.site_b));
        }
        Ok(())
    }

    /// `t_j = j·dt`.
    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }
}

fn rad(x: f64) -> Angle {
    Angle::Radians(x)
}

/// One-excitation packet `cos(θ/2)|a⟩ − i·sin(θ/2)|b⟩` from `|0…0⟩`, using a
/// single CX cycle.
pub fn build_state_prep(params: &ScatteringParams) -> Result<Circuit> {
    params.validate()?;
    let PrepSpec { theta, site_a: a, site_b: b } = params.prep;
    Circuit::from_cycles(
        params.n_sites,
        vec![
            Cycle::new(vec![Gate::rx(a, theta)])?,
            Cycle::new(vec![Gate::cx(a, b)])?,
            Cycle::new(vec![Gate::rx(a, Angle::Pi { num: 1, den: 1 })])?,
        ],
    )
}

/// First-order step `exp(−i·H_int·dt)·exp(−i·H_XX·dt)·exp(−i·H_Z·dt)`. Each XX
/// coupler is `CX(a,b)·Rx_a(−2J·dt)·CX(a,b)`; even bonds share their two CX
/// cycles, odd bonds share the next two.
pub fn build_trotter_step(params: &ScatteringParams) -> Result<Circuit> {
    params.validate()?;
    let n = params.n_sites;
    let dt = params.dt;
    let mut c = Circuit::new(n)?;
    c.push(Cycle::new((0..n).map(|q| Gate::rz(q, rad(-2.0 * params.h_t * dt))).collect())?)?;
    for parity in [0, 1] {
        let bonds: Vec<usize> = (parity..n - 1).step_by(2).collect();
        if bonds.is_empty() {
            continue;
        }
        let cx = Cycle::new(bonds.iter().map(|&a| Gate::cx(a, a + 1)).collect())?;
        c.push(cx.clone())?;
        c.push(Cycle::new(bonds.iter().map(|&a| Gate::rx(a, rad(-2.0 * params.j * dt))).collect())?)?;
        c.push(cx)?;
    }
    c.push(Cycle::new(vec![Gate::rz(params.n_s - 1, rad(-params.u * dt))])?)?;
    Ok(c)
}

/// Two-qubit block: layers of `Rz(A)Rx(B)Rz(C)` on `a` then `b` (angles in
/// π/4 units, six per layer) alternating with `CX(a→b)`. Blocks on disjoint
/// pairs with the same CX count run in parallel.
fn two_qubit_blocks(pairs: &[(usize, usize)], angles: &[i64], out: &mut Vec<Cycle>) -> Result<()> {
    let layers = angles.len() / 6;
    for layer in 0..layers {
        let six = &angles[6 * layer..6 * layer + 6];
        // Time order inside a layer: Rz(C), Rx(B), Rz(A).
        for slot in [2usize, 1, 0] {
            let mut gates = Vec::new();
            for &(a, b) in pairs {
                for (q, triple) in [(a, &six[0..3]), (b, &six[3..6])] {
                    let k = triple[slot];
                    if k != 0 {
                        let ang = quarter_pi(k);
                        gates.push(if slot == 1 { Gate::rx(q, ang) } else { Gate::rz(q, ang) });
                    }
                }
            }
            if !gates.is_empty() {
                out.push(Cycle::new(gates)?);
            }
        }
        if layer + 1 < layers {
            out.push(Cycle::new(pairs.iter().map(|&(a, b)| Gate::cx(a, b)).collect())?);
        }
    }
    Ok(())
}

// Fourier beam splitter [[1,0,0,0],[0,s,s,0],[0,s,-s,0],[0,0,0,-1]] with 2 CX.
const F_BLOCK: [i64; 18] = [-4, -2, 2, 4, 2, 0, -2, -3, 0, 0, 1, -1, -2, 2, 2, 4, -3, 0];
// SWAP·F with 3 CX; preceded by the U6 twiddle on the second qubit.
const FF_CORE: [i64; 24] = [2, 0, -1, 0, -2, -1, 2, 1, -4, 2, 4, 0, -3, -1, -2, 1, 0, 1, -2, 0, 0, 1, -2, 4];

/// Order in which qubits are read out by the scattering circuits.
pub const QFTR_MEASURED: [usize; 4] = [1, 2, 0, 3];

/// Inverse QFTr on 4 qubits with 8 CX cycles: SWAP(1,2), a Fourier layer on
/// (1,0) and (2,3), then the FF block on (1,2). Measured in `QFTR_MEASURED`
/// order, `|+k⟩` reads `0100` and `|−k⟩` reads `1000`.
pub fn build_qftr_measurement() -> Result<Circuit> {
    let mut cycles = Vec::new();
    for (c, t) in [(1, 2), (2, 1), (1, 2)] {
        cycles.push(Cycle::new(vec![Gate::cx(c, t)])?);
    }
    two_qubit_blocks(&[(1, 0), (2, 3)], &F_BLOCK, &mut cycles)?;
    cycles.extend(u_gate_cycles(6, 2)?);
    two_qubit_blocks(&[(1, 2)], &FF_CORE, &mut cycles)?;
    Circuit::from_cycles(4, cycles)?.with_measured(QFTR_MEASURED.to_vec())
}

/// Preparation, `n_steps` Trotter steps and the QFTr stage:
/// `9 + 4·n_steps` hard cycles.
pub fn build_scattering_circuit(params: &ScatteringParams, n_steps: usize) -> Result<Circuit> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be >= 1".into()));
    }
    if params.n_sites != 4 {
        return Err(Error::InvalidArgument(format!(
            "the QFTr stage needs 4 sites, got {}",
            params.n_sites
        )));
    }
    let mut c = build_state_prep(params)?;
    let step = build_trotter_step(params)?;
    for _ in 0..n_steps {
        c.append(&step)?;
    }
    c.append(&build_qftr_measurement()?)?;
    c.set_measured(QFTR_MEASURED.to_vec())?;
    Ok(c)
}
