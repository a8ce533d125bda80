//! Readout calibration: estimate a tensor-product confusion matrix from the
//! all-zeros and all-ones preparations and invert it on later data.

use serde::{Deserialize, Serialize};

use crate::circuit::{Angle, Circuit, Cycle, Gate};
use crate::error::{Error, Result};
use crate::outcome::OutcomeDistribution;
use crate::readout::{apply_tensor, ConfusionMatrix};

/// Circuits preparing `|0…0⟩` and `|1…1⟩`, measuring every qubit.
pub fn rcal_circuits(n: usize) -> Result<Vec<Circuit>> {
    let zeros = Circuit::new(n)?;
    let flip = Cycle::new((0..n).map(|q| Gate::rx(q, Angle::Pi { num: 1, den: 1 })).collect())?;
    let ones = Circuit::from_cycles(n, vec![flip])?;
    Ok(vec![zeros, ones])
}

/// Per-bit marginal error rates from the two calibration runs.
pub fn rcal_estimate(counts0: &OutcomeDistribution, counts1: &OutcomeDistribution) -> Result<ConfusionMatrix> {
    let n = counts0.n_bits();
    if counts1.n_bits() != n {
        return Err(Error::DimensionMismatch { expected: n, got: counts1.n_bits() });
    }
    let (p0, p1) = (counts0.probabilities()?, counts1.probabilities()?);
    let marginal_one = |p: &[f64], j: usize| -> f64 {
        p.iter()
            .enumerate()
            .filter(|(i, _)| (i >> (n - 1 - j)) & 1 == 1)
            .map(|(_, v)| v)
            .sum()
    };
    let flips: Vec<(f64, f64)> = (0..n)
        .map(|j| (marginal_one(&p0, j), 1.0 - marginal_one(&p1, j)))
        .collect();
    let cm = ConfusionMatrix::from_flips(&flips)?;
    cm.inverse_factors()?;
    Ok(cm)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RcalOutput {
    pub distribution: OutcomeDistribution,
    /// Total negative mass removed by clipping before renormalization.
    pub clipped_mass: f64,
}

/// Applies the inverse confusion matrix; negative entries are clipped to 0
/// and the result renormalized.
pub fn rcal_invert(d: &OutcomeDistribution, cm: &ConfusionMatrix) -> Result<RcalOutput> {
    if d.n_bits() != cm.n_bits() {
        return Err(Error::DimensionMismatch { expected: cm.n_bits(), got: d.n_bits() });
    }
    let inv = cm.inverse_factors()?;
    let mut v = d.probabilities()?;
    apply_tensor(&inv, &mut v);
    let clipped_mass = v.iter().filter(|x| **x < 0.0).fold(0.0, |acc, x| acc - x);
    for x in &mut v {
        *x = x.max(0.0);
    }
    let total: f64 = v.iter().sum();
    if total <= 0.0 {
        return Err(Error::Undefined("RCAL inversion left no probability mass".into()));
    }
    for x in &mut v {
        *x /= total;
    }
    Ok(RcalOutput { distribution: OutcomeDistribution::exact(d.n_bits(), v)?, clipped_mass })
}
