//! Line-delimited JSON counts records, one per executed circuit, and the
//! post-processing that turns a complete set into RC and NOX estimates.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::estimate::{bootstrap, Estimate, MitigatedEstimate, Method};
use super::nox::{nox_combine, systematic_bound};
use super::rcal::{rcal_estimate, rcal_invert};
use crate::error::{Error, Result};
use crate::outcome::OutcomeDistribution;
use crate::readout::ConfusionMatrix;
use crate::rng::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Role {
    Base,
    Amplified { target: usize },
    /// Calibration run with every qubit prepared in `prepared` (0 or 1).
    Rcal { prepared: u8 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsRecord {
    pub circuit_id: String,
    pub role: Role,
    #[serde(default)]
    pub randomization: usize,
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

impl CountsRecord {
    pub fn n_bits(&self) -> Result<usize> {
        let mut lens = self.counts.keys().map(|k| k.len());
        let n = lens.next().ok_or_else(|| Error::InvalidArgument(format!("{}: empty counts", self.circuit_id)))?;
        if lens.any(|l| l != n) {
            return Err(Error::InvalidArgument(format!("{}: bitstrings of unequal length", self.circuit_id)));
        }
        Ok(n)
    }

    pub fn validate(&self) -> Result<()> {
        let total: u64 = self.counts.values().sum();
        if total != self.shots {
            return Err(Error::InvalidArgument(format!(
                "{}: counts sum to {total}, shots = {}",
                self.circuit_id, self.shots
            )));
        }
        if let Role::Rcal { prepared } = self.role {
            if prepared > 1 {
                return Err(Error::InvalidArgument(format!("{}: prepared must be 0 or 1", self.circuit_id)));
            }
        }
        self.n_bits().map(|_| ())
    }

    pub fn distribution(&self) -> Result<OutcomeDistribution> {
        OutcomeDistribution::from_count_map(self.n_bits()?, &self.counts)
    }
}

pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<CountsRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CountsRecord =
            serde_json::from_str(&line).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        rec.validate().map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_records<W: Write>(mut w: W, records: &[CountsRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MitigationReport {
    pub unmitigated: MitigatedEstimate,
    pub rc: MitigatedEstimate,
    pub nox: MitigatedEstimate,
    pub m: usize,
    pub n_rand: usize,
    pub confusion: Option<ConfusionMatrix>,
}

/// Groups records by role, estimates the confusion matrix from the
/// calibration records (if any), and evaluates `stat` on the base ensemble
/// and on each amplified ensemble. The NOX estimate carries the RC
/// difference as its systematic bound.
pub fn mitigate_records<F>(records: &[CountsRecord], alpha: f64, n_boot: usize, seed: u64, stat: F) -> Result<MitigationReport>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let mut groups: BTreeMap<Role, Vec<OutcomeDistribution>> = BTreeMap::new();
    for r in records {
        r.validate()?;
        groups.entry(r.role).or_default().push(r.distribution()?);
    }
    let base = groups
        .get(&Role::Base)
        .ok_or_else(|| Error::InvalidArgument("no base records".into()))?;
    let cal0 = groups.get(&Role::Rcal { prepared: 0 });
    let cal1 = groups.get(&Role::Rcal { prepared: 1 });
    let confusion = match (cal0, cal1) {
        (Some(a), Some(b)) => Some(rcal_estimate(&merge(a)?, &merge(b)?)?),
        (None, None) => None,
        _ => return Err(Error::InvalidArgument("calibration needs both preparations".into())),
    };
    let corrected = |p: &[f64]| -> Result<f64> {
        match &confusion {
            None => stat(p),
            Some(cm) => {
                let d = OutcomeDistribution::Exact { n_bits: cm.n_bits(), probs: p.to_vec() };
                stat(&rcal_invert(&d, cm)?.distribution.probabilities()?)
            }
        }
    };
    let targets: Vec<usize> = groups
        .keys()
        .filter_map(|r| match r {
            Role::Amplified { target } => Some(*target),
            _ => None,
        })
        .collect();
    let m = targets.len();
    if targets.iter().enumerate().any(|(i, t)| i != *t) {
        return Err(Error::InvalidArgument(format!("amplified targets must be 0..{m} without gaps")));
    }

    let raw = bootstrap(base, n_boot, derive_seed(seed, &[0]), &stat)?;
    let rc = bootstrap(base, n_boot, derive_seed(seed, &[0]), corrected)?;
    let amplified = targets
        .iter()
        .map(|&t| bootstrap(&groups[&Role::Amplified { target: t }], n_boot, derive_seed(seed, &[1 + t as u64]), corrected))
        .collect::<Result<Vec<Estimate>>>()?;
    let rc = MitigatedEstimate::plain(rc, Method::RcRcal);
    let mut nox = nox_combine(Estimate { value: rc.value, stat_err: rc.stat_err }, &amplified, alpha, m)?;
    nox.sys_bound = systematic_bound(&nox, &rc);
    Ok(MitigationReport {
        unmitigated: MitigatedEstimate::plain(raw, Method::Unmitigated),
        rc,
        nox,
        m,
        n_rand: base.len(),
        confusion,
    })
}

fn merge(ds: &[OutcomeDistribution]) -> Result<OutcomeDistribution> {
    let n = ds[0].n_bits();
    let mut counts = vec![0u64; 1 << n];
    for d in ds {
        let c = d.counts().ok_or_else(|| Error::InvalidArgument("calibration data must be counts".into()))?;
        if c.len() != counts.len() {
            return Err(Error::DimensionMismatch { expected: n, got: d.n_bits() });
        }
        for (a, b) in counts.iter_mut().zip(c) {
            *a += b;
        }
    }
    OutcomeDistribution::from_counts(n, counts)
}
