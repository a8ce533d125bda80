//! n-qubit Pauli strings in symplectic form.
//!
//! A string is `i^phase * P_0 ⊗ P_1 ⊗ ... ⊗ P_{n-1}` where qubit `q` is
//! described by bit `q` of the X and Z masks: (1,0) = X, (0,1) = Z,
//! (1,1) = Y. Multiplication is O(1) in word operations.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Largest register a `PauliString` can describe.
pub const MAX_QUBITS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

fn width_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits");
        Self { n, x: 0, z: 0, phase: 0 }
    }

    /// Builds a string from raw masks; bits above `n` are rejected.
    pub fn from_masks(n: usize, x: u64, z: u64, phase: u8) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits { n, limit: MAX_QUBITS });
        }
        let m = width_mask(n);
        if x & !m != 0 || z & !m != 0 {
            return Err(Error::InvalidArgument(format!(
                "mask bits set above qubit count {n}"
            )));
        }
        Ok(Self { n, x, z, phase: phase & 3 })
    }

    /// Single-qubit Pauli `p` acting on `qubit` of an `n`-qubit register.
    pub fn single(n: usize, qubit: usize, p: Pauli) -> Result<Self> {
        if qubit >= n {
            return Err(Error::QubitOutOfRange { index: qubit, n });
        }
        let mut s = Self::identity(n);
        s.set(qubit, p);
        Ok(s)
    }

    pub fn from_paulis(paulis: &[Pauli]) -> Self {
        let mut s = Self::identity(paulis.len());
        for (q, &p) in paulis.iter().enumerate() {
            s.set(q, p);
        }
        s
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Power of `i` multiplying the tensor product.
    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        Pauli::from_bits((self.x >> qubit) & 1 == 1, (self.z >> qubit) & 1 == 1)
    }

    fn set(&mut self, qubit: usize, p: Pauli) {
        let (xb, zb) = p.bits();
        let bit = 1u64 << qubit;
        self.x = if xb { self.x | bit } else { self.x & !bit };
        self.z = if zb { self.z | bit } else { self.z & !bit };
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of non-identity tensor factors.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Copy with the phase dropped; this is the key used by stochastic channels.
    pub fn unsigned(&self) -> Self {
        Self { phase: 0, ..*self }
    }

    pub fn with_phase(&self, phase: u8) -> Self {
        Self { phase: phase & 3, ..*self }
    }

    /// True when the two strings commute.
    pub fn commutes_with(&self, other: &Self) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones().is_multiple_of(2)
    }

    /// Group product `self · other`, phase included.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::SizeMismatch { left: self.n, right: other.n });
        }
        let (x1, z1, x2, z2) = (self.x, self.z, other.x, other.z);
        let y1 = x1 & z1;
        let xo = x1 & !z1;
        let zo = !x1 & z1;
        // i-exponent contributed per qubit: XY=iZ, YZ=iX, ZX=iY and reverses give -i.
        let plus = (y1 & z2 & !x2) | (xo & x2 & z2) | (zo & x2 & !z2);
        let minus = (y1 & x2 & !z2) | (xo & z2 & !x2) | (zo & x2 & z2);
        let g = plus.count_ones() as i64 - minus.count_ones() as i64;
        let phase = (self.phase as i64 + other.phase as i64 + g).rem_euclid(4) as u8;
        Ok(Self { n: self.n, x: x1 ^ x2, z: z1 ^ z2, phase })
    }

    /// `CX · self · CX` for a CX with the given control and target.
    pub fn conjugate_through_cx(&self, control: usize, target: usize) -> Result<Self> {
        for q in [control, target] {
            if q >= self.n {
                return Err(Error::QubitOutOfRange { index: q, n: self.n });
            }
        }
        if control == target {
            return Err(Error::SameQubit(control));
        }
        let bit = |m: u64, q: usize| (m >> q) & 1;
        let (xc, zc) = (bit(self.x, control), bit(self.z, control));
        let (xt, zt) = (bit(self.x, target), bit(self.z, target));
        // Sign rule for the CNOT update with Y kept as a single symbol.
        let flip = xc & zt & (xt ^ zc ^ 1);
        let mut out = *self;
        out.x ^= xc << target;
        out.z ^= zt << control;
        out.phase = (out.phase + 2 * flip as u8) & 3;
        Ok(out)
    }

    /// Dense `2^n × 2^n` matrix with qubit 0 as the most significant index bit.
    pub fn to_matrix(&self) -> CMatrix {
        let dim = 1usize << self.n;
        let mut m = CMatrix::zeros(dim, dim);
        let coeff = Complex64::i().powu(self.phase as u32);
        for col in 0..dim {
            let mut amp = coeff;
            let mut row = col;
            for q in 0..self.n {
                let shift = self.n - 1 - q;
                let b = (col >> shift) & 1;
                let mat = self.get(q).matrix();
                let out = match self.get(q) {
                    Pauli::I | Pauli::Z => b,
                    Pauli::X | Pauli::Y => b ^ 1,
                };
                amp *= mat[out][b];
                row = (row & !(1 << shift)) | (out << shift);
            }
            m[(row, col)] = amp;
        }
        m
    }

    /// Dense index `x | (z << n)` used by channel tables.
    pub fn index(&self) -> usize {
        (self.x as usize) | ((self.z as usize) << self.n)
    }

    pub fn from_index(n: usize, idx: usize) -> Self {
        let m = width_mask(n) as usize;
        Self { n, x: (idx & m) as u64, z: ((idx >> n) & m) as u64, phase: 0 }
    }

    /// All `4^n` phase-free strings in dense-index order.
    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        (0..1usize << (2 * n)).map(move |i| PauliString::from_index(n, i))
    }
}

impl fmt::Display for PauliString {
    /// Label such as `-iXZY`; character `j` is qubit `j`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["", "i", "-", "-i"][self.phase as usize];
        f.write_str(prefix)?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q).symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidPauliLabel(s.to_string());
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else {
            (0, s)
        };
        if body.is_empty() || body.len() > MAX_QUBITS {
            return Err(bad());
        }
        let paulis = body
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(bad()),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_paulis(&paulis).with_phase(phase))
    }
}
