//! Cycle-structured circuits over `rz`, `rx` and `cx`.
//!
//! Text format, one cycle per line:
//!
//! ```text
//! qubits 4
//! measure 1 2 0 3
//! E rx(0,-pi/2)
//! H cx(0,1)
//! E rz(0,-1.0) rz(3,0.25)
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, Mat2};

pub const UNITARY_MAX_QUBITS: usize = 6;

/// A rotation angle, either an exact rational multiple of π or raw radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    Pi { num: i64, den: i64 },
    Radians(f64),
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Angle {
    pub const ZERO: Angle = Angle::Pi { num: 0, den: 1 };

    /// `num/den · π`, reduced.
    pub fn pi_frac(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidArgument("zero denominator in angle".into()));
        }
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Ok(Angle::Pi { num: s * num / g, den: s * den / g })
    }

    pub fn radians(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite angle {x}")));
        }
        Ok(Angle::Radians(x))
    }

    pub fn value(&self) -> f64 {
        match *self {
            Angle::Pi { num, den } => num as f64 * std::f64::consts::PI / den as f64,
            Angle::Radians(x) => x,
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Angle::Pi { num, .. } => num == 0,
            Angle::Radians(x) => x == 0.0,
        }
    }
}

impl std::ops::Neg for Angle {
    type Output = Angle;
    fn neg(self) -> Angle {
        match self {
            Angle::Pi { num, den } => Angle::Pi { num: -num, den },
            Angle::Radians(x) => Angle::Radians(-x),
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Angle::Pi { num: 0, .. } => write!(f, "0"),
            Angle::Pi { num, den } => {
                let sign = if num < 0 { "-" } else { "" };
                let mag = num.abs();
                if mag != 1 {
                    write!(f, "{sign}{mag}pi")?;
                } else {
                    write!(f, "{sign}pi")?;
                }
                if den != 1 {
                    write!(f, "/{den}")?;
                }
                Ok(())
            }
            // Debug formatting is the shortest string that parses back bit-exactly.
            Angle::Radians(x) => write!(f, "{x:?}"),
        }
    }
}

impl FromStr for Angle {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad angle {s:?}"));
        let s = s.trim();
        if s == "0" {
            return Ok(Angle::ZERO);
        }
        if let Some(pos) = s.find("pi") {
            let (head, tail) = (&s[..pos], &s[pos + 2..]);
            let num: i64 = match head {
                "" => 1,
                "-" => -1,
                h => h.parse().map_err(|_| bad())?,
            };
            let den: i64 = match tail {
                "" => 1,
                t => t.strip_prefix('/').ok_or_else(bad)?.parse().map_err(|_| bad())?,
            };
            if den <= 0 {
                return Err(bad());
            }
            return Angle::pi_frac(num, den);
        }
        Angle::radians(s.parse().map_err(|_| bad())?)
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Angle::radians(x).map_err(serde::de::Error::custom),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    Rot { axis: Axis, qubit: usize, angle: Angle },
    Cx { control: usize, target: usize },
}

pub fn rz_matrix(theta: f64) -> Mat2 {
    let h = theta / 2.0;
    [
        [Complex64::from_polar(1.0, -h), c(0.0, 0.0)],
        [c(0.0, 0.0), Complex64::from_polar(1.0, h)],
    ]
}

pub fn rx_matrix(theta: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
}

impl Gate {
    pub fn rz(qubit: usize, angle: Angle) -> Self {
        Gate::Rot { axis: Axis::Z, qubit, angle }
    }

    pub fn rx(qubit: usize, angle: Angle) -> Self {
        Gate::Rot { axis: Axis::X, qubit, angle }
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Gate::Cx { control, target }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Rot { qubit, .. } => vec![qubit],
            Gate::Cx { control, target } => vec![control, target],
        }
    }

    /// The 2×2 matrix of a rotation; `None` for `cx`.
    pub fn matrix2(&self) -> Option<Mat2> {
        match *self {
            Gate::Rot { axis: Axis::Z, angle, .. } => Some(rz_matrix(angle.value())),
            Gate::Rot { axis: Axis::X, angle, .. } => Some(rx_matrix(angle.value())),
            Gate::Cx { .. } => None,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Rot { axis: Axis::Z, qubit, angle } => write!(f, "rz({qubit},{angle})"),
            Gate::Rot { axis: Axis::X, qubit, angle } => write!(f, "rx({qubit},{angle})"),
            Gate::Cx { control, target } => write!(f, "cx({control},{target})"),
        }
    }
}

impl FromStr for Gate {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad gate {s:?}"));
        let s = s.trim();
        let open = s.find('(').ok_or_else(bad)?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        let q: usize = a.trim().parse().map_err(|_| bad())?;
        match &s[..open] {
            "rz" => Ok(Gate::rz(q, b.parse()?)),
            "rx" => Ok(Gate::rx(q, b.parse()?)),
            "cx" => Ok(Gate::cx(q, b.trim().parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleKind {
    Easy,
    Hard,
}

/// Gates on pairwise disjoint qubits, applied simultaneously.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Cycle {
    gates: Vec<Gate>,
}

impl Cycle {
    pub fn new(gates: Vec<Gate>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for g in &gates {
            if let Gate::Cx { control, target } = *g {
                if control == target {
                    return Err(Error::SameQubit(control));
                }
            }
            for q in g.qubits() {
                if !seen.insert(q) {
                    return Err(Error::QubitReused(q));
                }
            }
        }
        Ok(Self { gates })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn kind(&self) -> CycleKind {
        if self.gates.iter().any(|g| matches!(g, Gate::Cx { .. })) {
            CycleKind::Hard
        } else {
            CycleKind::Easy
        }
    }

    pub fn is_hard(&self) -> bool {
        self.kind() == CycleKind::Hard
    }

    /// Sorted `(control, target)` pairs; the key a noise model attaches to.
    pub fn signature(&self) -> Vec<(usize, usize)> {
        let mut sig: Vec<(usize, usize)> = self
            .gates
            .iter()
            .filter_map(|g| match *g {
                Gate::Cx { control, target } => Some((control, target)),
                _ => None,
            })
            .collect();
        sig.sort_unstable();
        sig
    }

    pub fn qubits(&self) -> BTreeSet<usize> {
        self.gates.iter().flat_map(|g| g.qubits()).collect()
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.gates.iter().flat_map(|g| g.qubits()).max()
    }

    pub fn cx_gates(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.gates.iter().filter_map(|g| match *g {
            Gate::Cx { control, target } => Some((control, target)),
            _ => None,
        })
    }

    pub fn rotations(&self) -> impl Iterator<Item = &Gate> + '_ {
        self.gates.iter().filter(|g| matches!(g, Gate::Rot { .. }))
    }

    pub fn unitary(&self, n: usize) -> CMatrix {
        self.gates.iter().fold(linalg::identity(1 << n), |acc, g| {
            let m = match g {
                Gate::Cx { control, target } => linalg::cx_matrix(n, *control, *target),
                Gate::Rot { qubit, .. } => {
                    linalg::embed_single(n, *qubit, &g.matrix2().expect("rotation"))
                }
            };
            m * acc
        })
    }
}

pub fn signature_label(sig: &[(usize, usize)]) -> String {
    sig.iter()
        .map(|(c, t)| format!("cx({c},{t})"))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n: usize,
    cycles: Vec<Cycle>,
    measured: Vec<usize>,
}

impl Circuit {
    /// An empty circuit measuring every qubit in order.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::TooManyQubits { n, limit: 64 });
        }
        Ok(Self { n, cycles: Vec::new(), measured: (0..n).collect() })
    }

    pub fn from_cycles(n: usize, cycles: Vec<Cycle>) -> Result<Self> {
        let mut c = Self::new(n)?;
        for cy in cycles {
            c.push(cy)?;
        }
        Ok(c)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn cycles(&self) -> &[Cycle] {
        &self.cycles
    }

    pub fn measured_qubits(&self) -> &[usize] {
        &self.measured
    }

    pub fn set_measured(&mut self, measured: Vec<usize>) -> Result<()> {
        let mut seen = BTreeSet::new();
        for &q in &measured {
            if q >= self.n {
                return Err(Error::QubitOutOfRange { index: q, n: self.n });
            }
            if !seen.insert(q) {
                return Err(Error::QubitReused(q));
            }
        }
        self.measured = measured;
        Ok(())
    }

    pub fn with_measured(mut self, measured: Vec<usize>) -> Result<Self> {
        self.set_measured(measured)?;
        Ok(self)
    }

    pub fn push(&mut self, cycle: Cycle) -> Result<()> {
        if let Some(q) = cycle.max_qubit() {
            if q >= self.n {
                return Err(Error::QubitOutOfRange { index: q, n: self.n });
            }
        }
        self.cycles.push(cycle);
        Ok(())
    }

    /// Appends another fragment's cycles; measurement order is kept.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n != self.n {
            return Err(Error::SizeMismatch { left: self.n, right: other.n });
        }
        self.cycles.extend(other.cycles.iter().cloned());
        Ok(())
    }

    pub fn hard_cycle_count(&self) -> usize {
        self.cycles.iter().filter(|c| c.is_hard()).count()
    }

    /// Positions of hard cycles in `cycles()`.
    pub fn hard_cycle_positions(&self) -> Vec<usize> {
        self.cycles
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_hard())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn unitary(&self) -> Result<CMatrix> {
        if self.n > UNITARY_MAX_QUBITS {
            return Err(Error::TooManyQubits { n: self.n, limit: UNITARY_MAX_QUBITS });
        }
        Ok(self
            .cycles
            .iter()
            .fold(linalg::identity(1 << self.n), |acc, cy| cy.unitary(self.n) * acc))
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        text.parse()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.n)?;
        let m: Vec<String> = self.measured.iter().map(|q| q.to_string()).collect();
        writeln!(f, "measure {}", m.join(" "))?;
        for cy in &self.cycles {
            write!(f, "{}", if cy.is_hard() { 'H' } else { 'E' })?;
            for g in cy.gates() {
                write!(f, " {g}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for Circuit {
    type Err = Error;
    fn from_str(text: &str) -> Result<Self> {
        let mut circuit: Option<Circuit> = None;
        let mut measured: Option<Vec<usize>> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = i + 1;
            let perr = |msg: String| Error::Parse { line: lineno, msg };
            let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            match head {
                "qubits" => {
                    if circuit.is_some() {
                        return Err(perr("duplicate qubits line".into()));
                    }
                    let n = rest.trim().parse().map_err(|_| perr(format!("bad qubit count {rest:?}")))?;
                    circuit = Some(Circuit::new(n).map_err(|e| perr(e.to_string()))?);
                }
                "measure" => {
                    let qs = rest
                        .split_whitespace()
                        .map(|t| t.parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| perr(format!("bad measure list {rest:?}")))?;
                    measured = Some(qs);
                }
                "E" | "H" => {
                    let c = circuit.as_mut().ok_or_else(|| perr("cycle before qubits line".into()))?;
                    let gates = split_gates(rest)
                        .into_iter()
                        .map(|g| g.parse::<Gate>())
                        .collect::<Result<Vec<_>>>()
                        .map_err(|e| perr(e.to_string()))?;
                    let cy = Cycle::new(gates).map_err(|e| perr(e.to_string()))?;
                    if cy.is_hard() != (head == "H") {
                        return Err(perr(format!("cycle flagged {head} but kind is {:?}", cy.kind())));
                    }
                    c.push(cy).map_err(|e| perr(e.to_string()))?;
                }
                other => return Err(perr(format!("unknown directive {other:?}"))),
            }
        }
        let mut c = circuit.ok_or(Error::Parse { line: 0, msg: "missing qubits line".into() })?;
        if let Some(m) = measured {
            c.set_measured(m).map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
        }
        Ok(c)
    }
}

// Gates are separated by whitespace outside parentheses.
fn split_gates(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if ch.is_whitespace() && depth == 0 {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else if !ch.is_whitespace() {
            cur.push(ch);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}
