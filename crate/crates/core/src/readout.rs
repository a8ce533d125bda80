//! Tensor-product readout confusion model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outcome::OutcomeDistribution;

/// `m[obs][true]`, columns sum to 1.
pub type Confusion2 = [[f64; 2]; 2];

const TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    per_bit: Vec<Confusion2>,
}

impl ConfusionMatrix {
    pub fn new(per_bit: Vec<Confusion2>) -> Result<Self> {
        if per_bit.is_empty() {
            return Err(Error::InvalidArgument("empty confusion model".into()));
        }
        for (q, m) in per_bit.iter().enumerate() {
            let entries_ok = m.iter().flatten().all(|x| x.is_finite() && (0.0..=1.0).contains(x));
            let cols_ok = (0..2).all(|t| (m[0][t] + m[1][t] - 1.0).abs() < TOL);
            if !entries_ok || !cols_ok {
                return Err(Error::InvalidArgument(format!("confusion matrix for bit {q} is not column-stochastic")));
            }
        }
        Ok(Self { per_bit })
    }

    pub fn identity(n_bits: usize) -> Self {
        Self { per_bit: vec![[[1.0, 0.0], [0.0, 1.0]]; n_bits] }
    }

    /// `flip0 = P(read 1 | 0)`, `flip1 = P(read 0 | 1)` on every bit.
    pub fn uniform(n_bits: usize, flip0: f64, flip1: f64) -> Result<Self> {
        Self::new(vec![[[1.0 - flip0, flip1], [flip0, 1.0 - flip1]]; n_bits])
    }

    pub fn from_flips(flips: &[(f64, f64)]) -> Result<Self> {
        Self::new(flips.iter().map(|&(f0, f1)| [[1.0 - f0, f1], [f0, 1.0 - f1]]).collect())
    }

    pub fn n_bits(&self) -> usize {
        self.per_bit.len()
    }

    pub fn bit(&self, j: usize) -> &Confusion2 {
        &self.per_bit[j]
    }

    /// Restricts to the listed bits, in the given order.
    pub fn select(&self, bits: &[usize]) -> Result<Self> {
        let per_bit = bits
            .iter()
            .map(|&b| {
                self.per_bit
                    .get(b)
                    .copied()
                    .ok_or(Error::QubitOutOfRange { index: b, n: self.n_bits() })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(per_bit)
    }

    pub fn is_invertible(&self) -> bool {
        self.per_bit.iter().all(|m| m[0][0] + m[1][1] > 1.0 + TOL)
    }

    /// Per-bit inverses. Each 2×2 determinant equals `p00 + p11 − 1`.
    pub fn inverse_factors(&self) -> Result<Vec<[[f64; 2]; 2]>> {
        self.per_bit
            .iter()
            .enumerate()
            .map(|(q, m)| {
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                let sum = m[0][0] + m[1][1];
                if sum <= 1.0 + TOL {
                    return Err(Error::SingularConfusion { qubit: q, sum });
                }
                Ok([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
            })
            .collect()
    }

    /// The full `2^n × 2^n` matrix, for tests on small registers.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let n = self.n_bits();
        let dim = 1 << n;
        (0..dim)
            .map(|o| {
                (0..dim)
                    .map(|t| {
                        (0..n)
                            .map(|j| {
                                let s = n - 1 - j;
                                self.per_bit[j][(o >> s) & 1][(t >> s) & 1]
                            })
                            .product()
                    })
                    .collect()
            })
            .collect()
    }
}

/// Applies `⊗_j m_j` to a dense vector indexed with bit 0 as the MSB.
pub(crate) fn apply_tensor(factors: &[[[f64; 2]; 2]], v: &mut [f64]) {
    let n = factors.len();
    for (j, m) in factors.iter().enumerate() {
        let s = 1usize << (n - 1 - j);
        for i in 0..v.len() {
            if i & s == 0 {
                let (a, b) = (v[i], v[i | s]);
                v[i] = m[0][0] * a + m[0][1] * b;
                v[i | s] = m[1][0] * a + m[1][1] * b;
            }
        }
    }
}

/// Left-multiplies an exact distribution by the confusion matrix.
pub fn apply_readout_noise(d: &OutcomeDistribution, cm: &ConfusionMatrix) -> Result<OutcomeDistribution> {
    let OutcomeDistribution::Exact { n_bits, probs } = d else {
        return Err(Error::InvalidArgument(
            "readout noise on sampled data is applied per shot during simulation".into(),
        ));
    };
    if *n_bits != cm.n_bits() {
        return Err(Error::DimensionMismatch { expected: cm.n_bits(), got: *n_bits });
    }
    let mut v = probs.clone();
    apply_tensor(&cm.per_bit, &mut v);
    let total: f64 = v.iter().sum();
    for x in &mut v {
        *x = x.max(0.0) / total;
    }
    OutcomeDistribution::exact(*n_bits, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bit_action() {
        let cm = ConfusionMatrix::new(vec![[[0.98, 0.05], [0.02, 0.95]]]).unwrap();
        let d = OutcomeDistribution::exact(1, vec![1.0, 0.0]).unwrap();
        let out = apply_readout_noise(&d, &cm).unwrap().probabilities().unwrap();
        assert!((out[0] - 0.98).abs() < 1e-15 && (out[1] - 0.02).abs() < 1e-15);
    }

    #[test]
    fn identity_and_uniform_fixed_points() {
        let d = OutcomeDistribution::exact(2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(apply_readout_noise(&d, &ConfusionMatrix::identity(2)).unwrap(), d);
        let sym = ConfusionMatrix::uniform(3, 0.07, 0.07).unwrap();
        let u = OutcomeDistribution::uniform(3).unwrap();
        assert!(apply_readout_noise(&u, &sym).unwrap().total_variation(&u).unwrap() < 1e-15);
    }

    #[test]
    fn tensor_action_matches_dense_matrix() {
        let cm = ConfusionMatrix::from_flips(&[(0.01, 0.04), (0.03, 0.02), (0.05, 0.1)]).unwrap();
        let p = vec![0.05, 0.1, 0.15, 0.2, 0.1, 0.1, 0.25, 0.05];
        let dense = cm.dense();
        let expect: Vec<f64> = dense.iter().map(|row| row.iter().zip(&p).map(|(a, b)| a * b).sum()).collect();
        let got = apply_readout_noise(&OutcomeDistribution::exact(3, p).unwrap(), &cm)
            .unwrap()
            .probabilities()
            .unwrap();
        for (a, b) in got.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ConfusionMatrix::new(vec![[[0.9, 0.1], [0.2, 0.9]]]).is_err());
        let singular = ConfusionMatrix::uniform(1, 0.5, 0.5).unwrap();
        assert!(matches!(singular.inverse_factors(), Err(Error::SingularConfusion { qubit: 0, .. })));
        let d = OutcomeDistribution::from_counts(1, vec![1, 1]).unwrap();
        assert!(apply_readout_noise(&d, &ConfusionMatrix::identity(1)).is_err());
        let d2 = OutcomeDistribution::uniform(2).unwrap();
        assert!(apply_readout_noise(&d2, &ConfusionMatrix::identity(1)).is_err());
    }
}
