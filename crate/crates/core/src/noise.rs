//! Cycle-attached noise: a Pauli channel per hard-cycle signature, optional
//! easy-cycle noise, readout confusion, per-batch drift and the
//! perturbed-amplification variant used to probe imperfect amplification.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::channel::PauliChannel;
use crate::circuit::{signature_label, Circuit, Cycle};
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::readout::ConfusionMatrix;

pub type Signature = Vec<(usize, usize)>;

/// What a hard cycle without an explicit table entry receives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardDefault {
    Noiseless,
    /// `ρ ↦ (1−p)ρ + p·I/2` on every qubit touched by the cycle's CX gates.
    Depolarizing(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    n: usize,
    hard_default: HardDefault,
    per_signature: BTreeMap<Signature, PauliChannel>,
    easy: Option<PauliChannel>,
    readout: Option<ConfusionMatrix>,
    strict: bool,
    drift: Vec<f64>,
    deltas: BTreeMap<usize, f64>,
}

/// A run of `reps` consecutive hard cycles (starting at hard index `first`)
/// that realizes the amplification of base hard cycle `target`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AmplifiedSpan {
    pub first: usize,
    pub reps: usize,
    pub target: usize,
}

/// Where a circuit sits in an experiment: its batch (for drift) and the
/// amplified span if it is a NOX family member.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NoiseContext {
    pub batch: Option<usize>,
    pub amplified: Option<AmplifiedSpan>,
}

impl NoiseModel {
    pub fn noiseless(n: usize) -> Self {
        Self {
            n,
            hard_default: HardDefault::Noiseless,
            per_signature: BTreeMap::new(),
            easy: None,
            readout: None,
            strict: false,
            drift: Vec::new(),
            deltas: BTreeMap::new(),
        }
    }

    pub fn depolarizing(n: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidChannel(format!("depolarizing strength {p}")));
        }
        Ok(Self { hard_default: HardDefault::Depolarizing(p), ..Self::noiseless(n) })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn with_channel(mut self, sig: Signature, ch: PauliChannel) -> Result<Self> {
        if ch.num_qubits() != self.n {
            return Err(Error::SizeMismatch { left: self.n, right: ch.num_qubits() });
        }
        let mut sig = sig;
        sig.sort_unstable();
        self.per_signature.insert(sig, ch);
        Ok(self)
    }

    pub fn with_easy_noise(mut self, ch: PauliChannel) -> Result<Self> {
        if ch.num_qubits() != self.n {
            return Err(Error::SizeMismatch { left: self.n, right: ch.num_qubits() });
        }
        self.easy = Some(ch);
        Ok(self)
    }

    /// Confusion per qubit (not per measured bit).
    pub fn with_readout(mut self, cm: ConfusionMatrix) -> Result<Self> {
        if cm.n_bits() != self.n {
            return Err(Error::SizeMismatch { left: self.n, right: cm.n_bits() });
        }
        self.readout = Some(cm);
        Ok(self)
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    /// Batch `b` scales error probabilities by `factors[b % len]`.
    pub fn with_drift(mut self, factors: Vec<f64>) -> Result<Self> {
        if factors.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(Error::InvalidArgument("drift factors must be finite and >= 0".into()));
        }
        self.drift = factors;
        Ok(self)
    }

    /// Amplifying base hard cycle `i` yields `E^{1+α+δ_i}` instead of `E^{1+α}`.
    pub fn with_amplification_deltas(mut self, deltas: BTreeMap<usize, f64>) -> Self {
        self.deltas = deltas;
        self
    }

    pub fn readout(&self) -> Option<&ConfusionMatrix> {
        self.readout.as_ref()
    }

    pub fn without_readout(&self) -> Self {
        Self { readout: None, ..self.clone() }
    }

    /// Readout confusion for `c`'s measured qubits, in measurement order.
    pub fn readout_for(&self, c: &Circuit) -> Result<Option<ConfusionMatrix>> {
        self.readout.as_ref().map(|cm| cm.select(c.measured_qubits())).transpose()
    }

    fn base_channel(&self, cycle: &Cycle) -> Result<Option<PauliChannel>> {
        let sig = cycle.signature();
        if let Some(ch) = self.per_signature.get(&sig) {
            return Ok(Some(ch.clone()));
        }
        if self.strict {
            return Err(Error::UnmappedCycle(signature_label(&sig)));
        }
        match self.hard_default {
            HardDefault::Noiseless => Ok(None),
            HardDefault::Depolarizing(p) if p == 0.0 => Ok(None),
            HardDefault::Depolarizing(p) => {
                let qs: Vec<usize> = sig.iter().flat_map(|&(c, t)| [c, t]).collect();
                Ok(Some(PauliChannel::local_depolarizing(self.n, &qs, p)?))
            }
        }
    }

    /// The channel following hard cycle number `hard_index` of a circuit.
    pub fn hard_channel(&self, cycle: &Cycle, hard_index: usize, ctx: &NoiseContext) -> Result<Option<PauliChannel>> {
        let Some(mut ch) = self.base_channel(cycle)? else {
            return Ok(None);
        };
        if let (Some(b), false) = (ctx.batch, self.drift.is_empty()) {
            ch = ch.scale_errors(self.drift[b % self.drift.len()])?;
        }
        if let Some(span) = ctx.amplified {
            if (span.first..span.first + span.reps).contains(&hard_index) {
                if let Some(&d) = self.deltas.get(&span.target) {
                    if d != 0.0 {
                        ch = ch.power_real((span.reps as f64 + d) / span.reps as f64)?;
                    }
                }
                // Odd repetitions undo the cycle, so they carry C·E·C†; the
                // whole span then acts as E^reps followed by the cycle.
                if (hard_index - span.first) % 2 == 1 {
                    ch = ch.conjugate_by_cx(&cycle.signature())?;
                }
            }
        }
        Ok(if ch.is_identity() { None } else { Some(ch) })
    }

    pub fn easy_channel(&self, ctx: &NoiseContext) -> Result<Option<PauliChannel>> {
        match (&self.easy, ctx.batch, self.drift.is_empty()) {
            (None, _, _) => Ok(None),
            (Some(ch), Some(b), false) => Ok(Some(ch.scale_errors(self.drift[b % self.drift.len()])?)),
            (Some(ch), _, _) => Ok(Some(ch.clone())),
        }
    }

    /// Noise after every cycle of `c` (`None` = noiseless), with identical
    /// channels shared between identical hard cycles.
    pub fn schedule(&self, c: &Circuit, ctx: &NoiseContext) -> Result<Vec<Option<PauliChannel>>> {
        if c.num_qubits() != self.n {
            return Err(Error::SizeMismatch { left: self.n, right: c.num_qubits() });
        }
        let easy = self.easy_channel(ctx)?;
        let mut cache: HashMap<(Signature, Option<usize>), Option<PauliChannel>> = HashMap::new();
        let mut hard_index = 0;
        let mut out = Vec::with_capacity(c.cycles().len());
        for cy in c.cycles() {
            if cy.is_hard() {
                let span_slot = ctx
                    .amplified
                    .filter(|s| (s.first..s.first + s.reps).contains(&hard_index))
                    .map(|s| (hard_index - s.first) % 2);
                let key = (cy.signature(), span_slot);
                let ch = match cache.get(&key) {
                    Some(ch) => ch.clone(),
                    None => {
                        let ch = self.hard_channel(cy, hard_index, ctx)?;
                        cache.insert(key, ch.clone());
                        ch
                    }
                };
                out.push(ch);
                hard_index += 1;
            } else {
                out.push(easy.clone());
            }
        }
        Ok(out)
    }

    pub fn from_config(n: usize, cfg: &NoiseConfig) -> Result<Self> {
        let mut m = match cfg.depolarizing {
            Some(p) => Self::depolarizing(n, p)?,
            None => Self::noiseless(n),
        };
        m = m.strict(cfg.strict);
        if let Some(p) = cfg.easy_depolarizing {
            let all: Vec<usize> = (0..n).collect();
            m = m.with_easy_noise(PauliChannel::local_depolarizing(n, &all, p)?)?;
        }
        for table in &cfg.channels {
            let sig = parse_signature(&table.signature)?;
            let mut entries: Vec<(PauliString, f64)> = Vec::new();
            for (label, &p) in &table.probs {
                let ps: PauliString = label.parse()?;
                if ps.num_qubits() != n {
                    return Err(Error::Config(format!("label {label} is not on {n} qubits")));
                }
                entries.push((ps, p));
            }
            let err: f64 = entries.iter().filter(|(p, _)| !p.is_identity()).map(|(_, q)| q).sum();
            if !entries.iter().any(|(p, _)| p.is_identity()) {
                entries.push((PauliString::identity(n), 1.0 - err));
            }
            let ch = PauliChannel::new(n, entries)
                .map_err(|e| Error::Config(format!("channel for {}: {e}", table.signature)))?;
            m = m.with_channel(sig, ch)?;
        }
        if let Some(r) = &cfg.readout {
            let flips: Vec<(f64, f64)> = match &r.per_qubit {
                Some(list) if list.len() != n => {
                    return Err(Error::Config(format!("readout.per_qubit needs {n} entries")));
                }
                Some(list) => list.iter().map(|v| (v[0], v[1])).collect(),
                None => vec![(r.flip0, r.flip1); n],
            };
            m = m.with_readout(ConfusionMatrix::from_flips(&flips)?)?;
        }
        if !cfg.drift.is_empty() {
            m = m.with_drift(cfg.drift.clone())?;
        }
        if !cfg.amplification_deltas.is_empty() {
            m = m.with_amplification_deltas(cfg.amplification_deltas.iter().copied().enumerate().collect());
        }
        Ok(m)
    }
}

/// Parses `"cx(0,1) cx(2,3)"`.
pub fn parse_signature(s: &str) -> Result<Signature> {
    let bad = || Error::Config(format!("bad signature {s:?}"));
    let mut sig = Vec::new();
    for tok in s.split_whitespace() {
        let inner = tok.strip_prefix("cx(").and_then(|t| t.strip_suffix(')')).ok_or_else(bad)?;
        let (c, t) = inner.split_once(',').ok_or_else(bad)?;
        sig.push((c.trim().parse().map_err(|_| bad())?, t.trim().parse().map_err(|_| bad())?));
    }
    if sig.is_empty() {
        return Err(bad());
    }
    sig.sort_unstable();
    Ok(sig)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Local depolarizing strength on qubits touched by hard cycles.
    #[serde(default)]
    pub depolarizing: Option<f64>,
    #[serde(default)]
    pub easy_depolarizing: Option<f64>,
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub channels: Vec<ChannelTable>,
    #[serde(default)]
    pub readout: Option<ReadoutConfig>,
    /// Per-batch multipliers on error probabilities (cycled).
    #[serde(default)]
    pub drift: Vec<f64>,
    /// δ_i for each base hard cycle, indexed from 0.
    #[serde(default)]
    pub amplification_deltas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelTable {
    pub signature: String,
    /// Pauli label → probability; identity takes the remainder if absent.
    pub probs: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutConfig {
    /// P(read 1 | prepared 0).
    #[serde(default)]
    pub flip0: f64,
    /// P(read 0 | prepared 1).
    #[serde(default)]
    pub flip1: f64,
    #[serde(default)]
    pub per_qubit: Option<Vec<[f64; 2]>>,
}
