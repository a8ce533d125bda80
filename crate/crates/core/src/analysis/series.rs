use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outcome::OutcomeDistribution;

pub const PLUS_STATE: &str = "0100";
pub const MINUS_STATE: &str = "1000";

/// `(P₊, P₋)` read off a 4-bit distribution.
pub fn momentum_probs(d: &OutcomeDistribution) -> Result<(f64, f64)> {
    if d.n_bits() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: d.n_bits() });
    }
    Ok((d.prob_of(PLUS_STATE)?, d.prob_of(MINUS_STATE)?))
}

/// `(R₊, R₋)`.
pub fn normalize_r(p_plus: f64, p_minus: f64) -> Result<(f64, f64)> {
    let s = p_plus + p_minus;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Undefined(format!("P+ + P- = {s}")));
    }
    let r_minus = p_minus / s;
    Ok((1.0 - r_minus, r_minus))
}

/// First-order error of `R₋` for independent errors on `P₊` and `P₋`.
pub fn normalize_r_err(p_plus: f64, p_minus: f64, err_plus: f64, err_minus: f64) -> Result<f64> {
    let s = p_plus + p_minus;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Undefined(format!("P+ + P- = {s}")));
    }
    Ok((p_plus * err_minus).hypot(p_minus * err_plus) / (s * s))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionPoint {
    pub step: usize,
    pub t: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    pub r_minus: f64,
    pub err: f64,
}

impl ReflectionPoint {
    pub fn new(step: usize, t: f64, p_plus: f64, p_minus: f64, err: f64) -> Result<Self> {
        let (_, r_minus) = normalize_r(p_plus, p_minus)?;
        if !(err.is_finite() && err >= 0.0) {
            return Err(Error::InvalidArgument(format!("error {err} at step {step}")));
        }
        Ok(Self { step, t, p_plus, p_minus, r_minus, err })
    }

    pub fn r_plus(&self) -> f64 {
        1.0 - self.r_minus
    }

    pub fn inverse_prob(&self) -> f64 {
        1.0 / (self.p_plus + self.p_minus)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReflectionSeries {
    pub points: Vec<ReflectionPoint>,
}

impl ReflectionSeries {
    pub fn new(points: Vec<ReflectionPoint>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn r_minus(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.r_minus).collect()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.err).collect()
    }

    /// Largest `|R₊ + R₋ − 1|` over the series.
    pub fn sum_rule_defect(&self) -> f64 {
        self.points.iter().map(|p| (p.r_plus() + p.r_minus - 1.0).abs()).fold(0.0, f64::max)
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        let same = self.len() == other.len()
            && self.points.iter().zip(&other.points).all(|(a, b)| a.step == b.step && a.t == b.t);
        if same {
            Ok(())
        } else {
            Err(Error::InvalidArgument("series are on different time grids".into()))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaPoint {
    pub step: usize,
    pub t: f64,
    pub delta: f64,
    pub err: f64,
}

/// Pointwise `R₋(measured) − R₋(ideal)` with errors in quadrature.
pub fn delta_r_series(measured: &ReflectionSeries, ideal: &ReflectionSeries) -> Result<Vec<DeltaPoint>> {
    measured.check_grid(ideal)?;
    Ok(measured
        .points
        .iter()
        .zip(&ideal.points)
        .map(|(m, i)| DeltaPoint { step: m.step, t: m.t, delta: m.r_minus - i.r_minus, err: m.err.hypot(i.err) })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseProbPoint {
    pub step: usize,
    pub t: f64,
    pub value: f64,
    pub flagged: bool,
}

/// `1/(P₊+P₋)` per step, flagged where it exceeds `threshold`.
pub fn inverse_prob_series(ideal: &ReflectionSeries, threshold: f64) -> Result<Vec<InverseProbPoint>> {
    ideal
        .points
        .iter()
        .map(|p| {
            let s = p.p_plus + p.p_minus;
            if s <= 0.0 {
                return Err(Error::Undefined(format!("P+ + P- = 0 at step {}", p.step)));
            }
            Ok(InverseProbPoint { step: p.step, t: p.t, value: 1.0 / s, flagged: 1.0 / s > threshold })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Closeness {
    pub m1: f64,
    pub m2: f64,
}

/// Mean absolute and root-mean-square deviation of each row of `q` from `ideal`.
pub fn closeness_metrics(q: &[Vec<f64>], ideal: &[f64]) -> Result<Closeness> {
    if q.is_empty() || ideal.is_empty() {
        return Err(Error::InvalidArgument("empty metric input".into()));
    }
    if let Some(row) = q.iter().find(|r| r.len() != ideal.len()) {
        return Err(Error::DimensionMismatch { expected: ideal.len(), got: row.len() });
    }
    let count = (q.len() * ideal.len()) as f64;
    let diffs = q.iter().flat_map(|row| row.iter().zip(ideal).map(|(a, b)| a - b));
    let (abs, sq) = diffs.fold((0.0, 0.0), |(a, s), d: f64| (a + d.abs(), s + d * d));
    Ok(Closeness { m1: abs / count, m2: (sq / count).sqrt() })
}
