//! Pooled point estimates with bootstrap errors over randomizations.

use std::cmp::Ordering;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outcome::OutcomeDistribution;
use crate::rng::rng_for;

pub const DEFAULT_BOOTSTRAP: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stat_err: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, stat_err: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Observable {
    /// Projector onto one outcome index.
    Projector(usize),
    /// A value per outcome index.
    Diagonal(Vec<f64>),
}

impl Observable {
    pub fn projector(bits: &str) -> Result<Self> {
        Ok(Self::Projector(crate::outcome::index_of(bits.len(), bits)?))
    }

    pub fn expectation(&self, probs: &[f64]) -> Result<f64> {
        match self {
            Self::Projector(i) => probs
                .get(*i)
                .copied()
                .ok_or(Error::DimensionMismatch { expected: probs.len(), got: *i }),
            Self::Diagonal(v) if v.len() != probs.len() => {
                Err(Error::DimensionMismatch { expected: probs.len(), got: v.len() })
            }
            Self::Diagonal(v) => Ok(v.iter().zip(probs).map(|(a, b)| a * b).sum()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "unmitigated")]
    Unmitigated,
    #[serde(rename = "RC+RCAL")]
    RcRcal,
    #[serde(rename = "NOX")]
    Nox,
    #[serde(rename = "NOX+RC+RCAL")]
    NoxRcRcal,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Unmitigated, Method::RcRcal, Method::Nox, Method::NoxRcRcal];

    pub fn label(&self) -> &'static str {
        match self {
            Method::Unmitigated => "unmitigated",
            Method::RcRcal => "RC+RCAL",
            Method::Nox => "NOX",
            Method::NoxRcRcal => "NOX+RC+RCAL",
        }
    }

    pub fn is_nox(&self) -> bool {
        matches!(self, Method::Nox | Method::NoxRcRcal)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MitigatedEstimate {
    pub value: f64,
    pub stat_err: f64,
    pub sys_bound: f64,
    pub method: Method,
}

impl MitigatedEstimate {
    pub fn plain(e: Estimate, method: Method) -> Self {
        Self { value: e.value, stat_err: e.stat_err, sys_bound: 0.0, method }
    }

    pub fn total_err(&self) -> f64 {
        self.stat_err + self.sys_bound
    }
}

/// Pools randomizations: summed counts, or the mean of exact distributions.
pub fn pool(results: &[&OutcomeDistribution]) -> Result<Vec<f64>> {
    let first = results.first().ok_or_else(|| Error::InvalidArgument("no results to pool".into()))?;
    let n = first.n_bits();
    if let Some(bad) = results.iter().find(|d| d.n_bits() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: bad.n_bits() });
    }
    if results.iter().any(|d| d.is_exact() != first.is_exact()) {
        return Err(Error::InvalidArgument("cannot pool exact and sampled results".into()));
    }
    let mut acc = vec![0.0; 1 << n];
    if first.is_exact() {
        for d in results {
            for (a, p) in acc.iter_mut().zip(d.probabilities()?) {
                *a += p;
            }
        }
    } else {
        for d in results {
            for (a, &c) in acc.iter_mut().zip(d.counts().expect("sampled")) {
                *a += c as f64;
            }
        }
    }
    let total: f64 = acc.iter().sum();
    if total <= 0.0 {
        return Err(Error::Undefined("zero total shots".into()));
    }
    Ok(acc.into_iter().map(|a| a / total).collect())
}

fn canonical_cmp(a: &OutcomeDistribution, b: &OutcomeDistribution) -> Ordering {
    match (a, b) {
        (OutcomeDistribution::Counts { counts: x, .. }, OutcomeDistribution::Counts { counts: y, .. }) => x.cmp(y),
        _ => {
            let (x, y) = (a.probabilities().unwrap_or_default(), b.probabilities().unwrap_or_default());
            x.iter()
                .zip(&y)
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        }
    }
}

/// Point value of `stat` on the pooled data, with the standard deviation of
/// `stat` over `n_boot` resamples (with replacement) of the randomizations.
/// Randomizations are put in a canonical order first, so relabeling them
/// does not change the result.
pub fn bootstrap<F>(results: &[OutcomeDistribution], n_boot: usize, seed: u64, stat: F) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let mut sorted: Vec<&OutcomeDistribution> = results.iter().collect();
    sorted.sort_by(|a, b| canonical_cmp(a, b));
    let value = stat(&pool(&sorted)?)?;
    let k = sorted.len();
    if k < 2 || n_boot < 2 {
        return Ok(Estimate::exact(value));
    }
    let samples = (0..n_boot)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_for(seed, &[b as u64]);
            let pick: Vec<&OutcomeDistribution> = (0..k).map(|_| sorted[rng.random_range(0..k)]).collect();
            stat(&pool(&pick)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = samples.iter().sum::<f64>() / n_boot as f64;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n_boot - 1) as f64;
    Ok(Estimate { value, stat_err: var.sqrt() })
}

pub fn estimate_observable(
    results: &[OutcomeDistribution],
    obs: &Observable,
    n_boot: usize,
    seed: u64,
) -> Result<Estimate> {
    bootstrap(results, n_boot, seed, |p| obs.expectation(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_randomizations_have_no_spread() {
        let d = OutcomeDistribution::from_counts(1, vec![70, 30]).unwrap();
        let e = estimate_observable(&vec![d; 30], &Observable::Projector(1), 1000, 1).unwrap();
        assert!((e.value - 0.3).abs() < 1e-15);
        assert!(e.stat_err < 1e-12);
    }

    #[test]
    fn projector_on_exact_distribution() {
        let mut probs = vec![0.7 / 15.0; 16];
        probs[4] = 0.3;
        let d = OutcomeDistribution::exact(4, probs).unwrap();
        let e = estimate_observable(&[d], &Observable::projector("0100").unwrap(), 1000, 0).unwrap();
        assert!((e.value - 0.3).abs() < 1e-15);
        assert_eq!(e.stat_err, 0.0);
    }

    #[test]
    fn bootstrap_matches_binomial_error() {
        let p = 0.3;
        let (n_rand, shots) = (30usize, 333u64);
        let truth = OutcomeDistribution::exact(1, vec![1.0 - p, p]).unwrap();
        let mut ratios = Vec::new();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data: Vec<_> = (0..n_rand).map(|_| truth.sample_counts(shots, &mut rng).unwrap()).collect();
            let e = estimate_observable(&data, &Observable::Projector(1), 2000, seed).unwrap();
            let analytic = (e.value * (1.0 - e.value) / (n_rand as f64 * shots as f64)).sqrt();
            ratios.push(e.stat_err / analytic);
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!((0.8..=1.25).contains(&mean), "mean ratio {mean}");
        assert!(ratios.iter().all(|r| (0.6..=1.5).contains(r)));
    }

    #[test]
    fn relabeling_randomizations_changes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let truth = OutcomeDistribution::exact(2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let data: Vec<_> = (0..12).map(|_| truth.sample_counts(100, &mut rng).unwrap()).collect();
        let mut rev = data.clone();
        rev.reverse();
        rev.swap(0, 5);
        let obs = Observable::Diagonal(vec![1.0, -1.0, -1.0, 1.0]);
        assert_eq!(estimate_observable(&data, &obs, 500, 4).unwrap(), estimate_observable(&rev, &obs, 500, 4).unwrap());
    }

    #[test]
    fn errors() {
        assert!(estimate_observable(&[], &Observable::Projector(0), 10, 0).is_err());
        let z = OutcomeDistribution::from_counts(1, vec![0, 0]).unwrap();
        assert!(estimate_observable(&[z], &Observable::Projector(0), 10, 0).is_err());
        let a = OutcomeDistribution::from_counts(1, vec![1, 0]).unwrap();
        let b = OutcomeDistribution::uniform(1).unwrap();
        assert!(estimate_observable(&[a, b], &Observable::Projector(0), 10, 0).is_err());
    }
}
