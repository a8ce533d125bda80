//! Measurement outcome distributions over bitstrings.
//!
//! Bit `j` of an outcome is the `j`-th measured qubit and the `j`-th character
//! of its string; the dense index is `Σ b_j·2^{n−1−j}`.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_OUTCOME_BITS: usize = 24;
const SUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum OutcomeDistribution {
    Exact { n_bits: usize, probs: Vec<f64> },
    Counts { n_bits: usize, counts: Vec<u64> },
}

fn check_bits(n_bits: usize, len: usize) -> Result<()> {
    if n_bits == 0 || n_bits > MAX_OUTCOME_BITS {
        return Err(Error::TooManyQubits { n: n_bits, limit: MAX_OUTCOME_BITS });
    }
    if len != 1 << n_bits {
        return Err(Error::DimensionMismatch { expected: n_bits, got: len.trailing_zeros() as usize });
    }
    Ok(())
}

impl OutcomeDistribution {
    /// Exact probabilities; they must be nonnegative and sum to 1 within 1e-12.
    pub fn exact(n_bits: usize, probs: Vec<f64>) -> Result<Self> {
        check_bits(n_bits, probs.len())?;
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidArgument("negative or non-finite probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
        }
        Ok(Self::Exact { n_bits, probs })
    }

    pub fn from_counts(n_bits: usize, counts: Vec<u64>) -> Result<Self> {
        check_bits(n_bits, counts.len())?;
        Ok(Self::Counts { n_bits, counts })
    }

    /// From a `bitstring → count` map.
    pub fn from_count_map(n_bits: usize, map: &BTreeMap<String, u64>) -> Result<Self> {
        let mut counts = vec![0u64; 1 << n_bits];
        for (k, &v) in map {
            counts[index_of(n_bits, k)?] += v;
        }
        Self::from_counts(n_bits, counts)
    }

    pub fn delta(n_bits: usize, index: usize) -> Result<Self> {
        let mut probs = vec![0.0; 1 << n_bits];
        *probs
            .get_mut(index)
            .ok_or_else(|| Error::InvalidArgument(format!("outcome {index} out of range")))? = 1.0;
        Self::exact(n_bits, probs)
    }

    pub fn uniform(n_bits: usize) -> Result<Self> {
        let dim = 1usize << n_bits;
        Self::exact(n_bits, vec![1.0 / dim as f64; dim])
    }

    pub fn n_bits(&self) -> usize {
        match self {
            Self::Exact { n_bits, .. } | Self::Counts { n_bits, .. } => *n_bits,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Self::Exact { .. })
    }

    pub fn shots(&self) -> Option<u64> {
        match self {
            Self::Exact { .. } => None,
            Self::Counts { counts, .. } => Some(counts.iter().sum()),
        }
    }

    pub fn counts(&self) -> Option<&[u64]> {
        match self {
            Self::Exact { .. } => None,
            Self::Counts { counts, .. } => Some(counts),
        }
    }

    /// Normalized probabilities (frequencies for count data).
    pub fn probabilities(&self) -> Result<Vec<f64>> {
        match self {
            Self::Exact { probs, .. } => Ok(probs.clone()),
            Self::Counts { counts, .. } => {
                let total: u64 = counts.iter().sum();
                if total == 0 {
                    return Err(Error::Undefined("zero total shots".into()));
                }
                Ok(counts.iter().map(|&c| c as f64 / total as f64).collect())
            }
        }
    }

    pub fn prob_of(&self, bits: &str) -> Result<f64> {
        let i = index_of(self.n_bits(), bits)?;
        Ok(self.probabilities()?[i])
    }

    pub fn to_count_map(&self) -> Option<BTreeMap<String, u64>> {
        let n = self.n_bits();
        self.counts().map(|c| {
            c.iter()
                .enumerate()
                .filter(|(_, &v)| v > 0)
                .map(|(i, &v)| (bitstring(n, i), v))
                .collect()
        })
    }

    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        if self.n_bits() != other.n_bits() {
            return Err(Error::DimensionMismatch { expected: self.n_bits(), got: other.n_bits() });
        }
        let (a, b) = (self.probabilities()?, other.probabilities()?);
        Ok(0.5 * a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>())
    }

    /// Multinomial sample of `shots` outcomes from the normalized probabilities.
    pub fn sample_counts<R: Rng + ?Sized>(&self, shots: u64, rng: &mut R) -> Result<Self> {
        let probs = self.probabilities()?;
        Self::from_counts(self.n_bits(), multinomial(&probs, shots, rng))
    }
}

/// Conditional-binomial multinomial draw.
pub fn multinomial<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let mut out = vec![0u64; probs.len()];
    let mut left = shots;
    let mut mass: f64 = probs.iter().sum();
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == probs.len() || mass <= 0.0 {
            out[i] = left;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(left, q).expect("valid binomial").sample(rng);
        out[i] = k;
        left -= k;
        mass -= p;
    }
    out
}

pub fn bitstring(n_bits: usize, index: usize) -> String {
    (0..n_bits)
        .map(|j| if (index >> (n_bits - 1 - j)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub fn index_of(n_bits: usize, bits: &str) -> Result<usize> {
    if bits.len() != n_bits {
        return Err(Error::DimensionMismatch { expected: n_bits, got: bits.len() });
    }
    bits.chars().try_fold(0usize, |acc, ch| match ch {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::InvalidArgument(format!("bad bitstring {bits:?}"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bit_order() {
        assert_eq!(bitstring(4, 4), "0100");
        assert_eq!(index_of(4, "1000").unwrap(), 8);
        assert!(index_of(4, "10").is_err());
        assert!(index_of(2, "12").is_err());
    }

    #[test]
    fn validation() {
        assert!(OutcomeDistribution::exact(1, vec![0.5, 0.4]).is_err());
        assert!(OutcomeDistribution::exact(1, vec![1.1, -0.1]).is_err());
        assert!(OutcomeDistribution::exact(2, vec![1.0, 0.0]).is_err());
        let z = OutcomeDistribution::from_counts(1, vec![0, 0]).unwrap();
        assert!(z.probabilities().is_err());
    }

    #[test]
    fn multinomial_totals_and_determinism() {
        let d = OutcomeDistribution::exact(2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let a = d.sample_counts(10_000, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = d.sample_counts(10_000, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.shots(), Some(10_000));
        assert!(a.total_variation(&d).unwrap() < 0.03);
    }

    #[test]
    fn count_map_round_trip() {
        let d = OutcomeDistribution::from_counts(2, vec![3, 0, 5, 1]).unwrap();
        let m = d.to_count_map().unwrap();
        assert_eq!(m.get("10"), Some(&5));
        assert_eq!(OutcomeDistribution::from_count_map(2, &m).unwrap(), d);
    }
}
