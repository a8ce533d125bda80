//! Build → simulate → mitigate → analyze, per Trotter step and case.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Mode};
use super::report::{compare_methods, MetricsTable};
use crate::analysis::{
    fit_sigmoid_data, normalize_r, normalize_r_err, t_star, time_delay, ReflectionPoint, SigmoidFit, TimeDelayResult,
    MINUS_STATE, PLUS_STATE,
};
use crate::builders::{build_scattering_circuit, ScatteringParams};
use crate::error::{Error, Result};
use crate::mitigation::{
    bootstrap, gamma_diagnostic, nox_combine, nox_family, rcal_circuits, rcal_estimate, rcal_invert, split_shots,
    Estimate, MitigatedEstimate, Method,
};
use crate::noise::{NoiseContext, NoiseModel};
use crate::outcome::{index_of, OutcomeDistribution};
use crate::readout::ConfusionMatrix;
use crate::rng::{derive_seed, rng_for};
use crate::sim::{ideal_distribution, simulate_exact_with};

pub const N_QUBITS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Free,
    Interacting,
}

impl Case {
    pub const ALL: [Case; 2] = [Case::Free, Case::Interacting];

    pub fn label(&self) -> &'static str {
        match self {
            Case::Free => "free",
            Case::Interacting => "interacting",
        }
    }

    fn id(&self) -> u64 {
        *self as u64
    }

    pub fn params(&self, interacting: &ScatteringParams) -> ScatteringParams {
        match self {
            Case::Free => interacting.free(),
            Case::Interacting => interacting.clone(),
        }
    }
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(Case::Free),
            "interacting" => Ok(Case::Interacting),
            _ => Err(Error::InvalidArgument(format!("unknown case {s:?}"))),
        }
    }
}

pub const IDEAL: &str = "ideal";

/// Series labels in output order.
pub fn tracks() -> [&'static str; 5] {
    [IDEAL, Method::Unmitigated.label(), Method::RcRcal.label(), Method::Nox.label(), Method::NoxRcRcal.label()]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub step: usize,
    pub t: f64,
    pub hard_cycles: usize,
    pub family_size: usize,
    pub ideal: ReflectionPoint,
    /// One per randomization, without RCAL.
    pub unmitigated: Vec<ReflectionPoint>,
    pub rc: ReflectionPoint,
    pub rc_estimate: MitigatedEstimate,
    /// One per batch of randomization `r` across the family, without RCAL.
    pub nox_no_rc: Vec<ReflectionPoint>,
    pub nox: ReflectionPoint,
    pub nox_estimate: MitigatedEstimate,
    pub gamma: f64,
    pub rcal_clipped_mass: f64,
}

impl StepResult {
    /// Points of one track: several runs for the per-randomization tracks.
    pub fn track(&self, name: &str) -> Vec<&ReflectionPoint> {
        match name {
            IDEAL => vec![&self.ideal],
            "unmitigated" => self.unmitigated.iter().collect(),
            "RC+RCAL" => vec![&self.rc],
            "NOX" => self.nox_no_rc.iter().collect(),
            "NOX+RC+RCAL" => vec![&self.nox],
            _ => vec![],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum FitOutcome {
    Ok { fit: SigmoidFit, t_star: Option<f64>, t_star_err: Option<f64> },
    Failed { reason: String },
}

impl FitOutcome {
    pub fn fit(&self) -> Option<&SigmoidFit> {
        match self {
            FitOutcome::Ok { fit, .. } => Some(fit),
            FitOutcome::Failed { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum DelayOutcome {
    Ok(TimeDelayResult),
    Failed { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub case: Case,
    pub params: ScatteringParams,
    pub steps: Vec<StepResult>,
    pub fits: BTreeMap<String, FitOutcome>,
}

impl CaseResult {
    /// Per-step mean of a track's `R₋` and its error.
    pub fn mean_series(&self, name: &str) -> (Vec<f64>, Vec<f64>) {
        self.steps
            .iter()
            .map(|s| step_summary(&s.track(name).iter().map(|p| (p.r_minus, p.err)).collect::<Vec<_>>()))
            .unzip()
    }
}

/// Mean of several runs' `(R₋, err)` with the standard error of the mean; a
/// single run keeps its own error.
pub fn step_summary(runs: &[(f64, f64)]) -> (f64, f64) {
    match runs {
        [] => (f64::NAN, f64::NAN),
        [(r, e)] => (*r, *e),
        _ => {
            let k = runs.len() as f64;
            let mean = runs.iter().map(|x| x.0).sum::<f64>() / k;
            let var = runs.iter().map(|x| (x.0 - mean).powi(2)).sum::<f64>() / (k - 1.0);
            (mean, (var / k).sqrt())
        }
    }
}

/// Sigmoid fit of a series plus its `t*`, failures recorded rather than raised.
pub fn fit_series(t: &[f64], y: &[f64], err: &[f64]) -> FitOutcome {
    match fit_sigmoid_data(t, y, err) {
        Ok(fit) => {
            let (ts, te) = t_star(&fit).map(|(a, b)| (Some(a), Some(b))).unwrap_or((None, None));
            FitOutcome::Ok { fit, t_star: ts, t_star_err: te }
        }
        Err(e) => FitOutcome::Failed { reason: e.to_string() },
    }
}

pub fn delay_between(free: &FitOutcome, int: &FitOutcome) -> DelayOutcome {
    match (free.fit(), int.fit()) {
        (Some(a), Some(b)) => match time_delay(a, b) {
            Ok(d) => DelayOutcome::Ok(d),
            Err(e) => DelayOutcome::Failed { reason: e.to_string() },
        },
        _ => DelayOutcome::Failed { reason: "missing fit".into() },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunArtifacts {
    pub version: String,
    pub config: ExperimentConfig,
    pub config_sha256: String,
    /// Estimated from the calibration circuits, per qubit.
    pub calibration: Option<ConfusionMatrix>,
    pub cases: Vec<CaseResult>,
    pub time_delays: BTreeMap<String, DelayOutcome>,
    pub metrics: MetricsTable,
}

impl RunArtifacts {
    pub fn case(&self, case: Case) -> Option<&CaseResult> {
        self.cases.iter().find(|c| c.case == case)
    }
}

fn p_plus_minus(probs: &[f64]) -> (f64, f64) {
    let (ip, im) = (index_of(4, PLUS_STATE).expect("4 bits"), index_of(4, MINUS_STATE).expect("4 bits"));
    (probs[ip], probs[im])
}

fn binomial_err(p: f64, shots: Option<u64>) -> f64 {
    match shots {
        Some(n) if n > 0 => (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / n as f64).sqrt(),
        _ => 0.0,
    }
}

fn raw_point(step: usize, t: f64, d: &OutcomeDistribution) -> Result<ReflectionPoint> {
    let (pp, pm) = p_plus_minus(&d.probabilities()?);
    let err = normalize_r_err(pp, pm, binomial_err(pp, d.shots()), binomial_err(pm, d.shots()))?;
    ReflectionPoint::new(step, t, pp, pm, err)
}

struct Shared<'a> {
    cfg: &'a ExperimentConfig,
    nm: &'a NoiseModel,
    confusion: Option<ConfusionMatrix>,
}

impl Shared<'_> {
    fn sample(&self, d: OutcomeDistribution, shots: u64, ids: &[u64]) -> Result<OutcomeDistribution> {
        match self.cfg.mode {
            Mode::Exact => Ok(d),
            Mode::Shots => d.sample_counts(shots, &mut rng_for(self.cfg.seed, ids)),
        }
    }
}

fn calibrate(cfg: &ExperimentConfig, nm: &NoiseModel) -> Result<Option<ConfusionMatrix>> {
    if nm.readout().is_none() {
        return Ok(None);
    }
    let shared = Shared { cfg, nm, confusion: None };
    let runs = rcal_circuits(N_QUBITS)?
        .iter()
        .enumerate()
        .map(|(k, c)| shared.sample(simulate_exact_with(c, nm, &NoiseContext::default())?, cfg.shots, &[2, k as u64]))
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(rcal_estimate(&runs[0], &runs[1])?))
}

fn run_step(sh: &Shared, case: Case, params: &ScatteringParams, step: usize) -> Result<StepResult> {
    let cfg = sh.cfg;
    let tag = |stage: &str| format!("{case} step {step}: {stage}");
    let circuit = build_scattering_circuit(params, step).map_err(|e| e.in_stage(tag("build")))?;
    let t = params.time(step);
    let m = circuit.hard_cycle_count();
    let fam = nox_family(&circuit, cfg.alpha, cfg.n_rand, derive_seed(cfg.seed, &[case.id(), step as u64, 0]))
        .map_err(|e| e.in_stage(tag("compile")))?;
    let shots = split_shots(cfg.shots, cfg.n_rand);
    let mut ensembles = vec![(&fam.base, NoiseContext { batch: Some(0), amplified: None })];
    for (i, mem) in fam.amplified.iter().enumerate() {
        ensembles.push((&mem.ensemble, mem.context(Some(1 + i))));
    }

    let data: Vec<Vec<OutcomeDistribution>> = ensembles
        .par_iter()
        .enumerate()
        .map(|(k, (ens, ctx))| {
            ens.randomizations
                .par_iter()
                .enumerate()
                .map(|(r, c)| {
                    let d = simulate_exact_with(c, sh.nm, ctx)?;
                    sh.sample(d, shots[r], &[case.id(), step as u64, 1, k as u64, r as u64])
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage(tag("simulate")))?;

    let ideal_d = ideal_distribution(&circuit)?;
    let (ipp, ipm) = p_plus_minus(&ideal_d.probabilities()?);
    let ideal = ReflectionPoint::new(step, t, ipp, ipm, 0.0).map_err(|e| e.in_stage(tag("ideal")))?;

    let unmitigated = data[0]
        .iter()
        .map(|d| raw_point(step, t, d))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage(tag("unmitigated")))?;

    // RCAL is applied to pooled data inside every bootstrap statistic.
    let correct = |probs: &[f64]| -> Result<Vec<f64>> {
        match &sh.confusion {
            None => Ok(probs.to_vec()),
            Some(cm) => {
                let d = OutcomeDistribution::Exact { n_bits: N_QUBITS, probs: probs.to_vec() };
                rcal_invert(&d, cm)?.distribution.probabilities()
            }
        }
    };
    let r_stat = |p: &[f64]| -> Result<f64> {
        let (pp, pm) = p_plus_minus(&correct(p)?);
        Ok(normalize_r(pp, pm)?.1)
    };
    let bseed = |k: usize, which: u64| derive_seed(cfg.seed, &[case.id(), step as u64, 3, k as u64, which]);
    let rc_stage = |e: Error| e.in_stage(tag("RC+RCAL"));
    let rc_r = bootstrap(&data[0], cfg.n_boot, bseed(0, 0), r_stat).map_err(rc_stage)?;
    let pooled: Vec<&OutcomeDistribution> = data[0].iter().collect();
    let pooled = crate::mitigation::pool(&pooled)?;
    let rcal_clipped_mass = match &sh.confusion {
        None => 0.0,
        Some(cm) => {
            rcal_invert(&OutcomeDistribution::Exact { n_bits: N_QUBITS, probs: pooled.clone() }, cm)
                .map_err(rc_stage)?
                .clipped_mass
        }
    };
    let (rpp, rpm) = p_plus_minus(&correct(&pooled).map_err(rc_stage)?);
    let rc = ReflectionPoint::new(step, t, rpp, rpm, rc_r.stat_err).map_err(rc_stage)?;
    let rc_estimate = MitigatedEstimate::plain(rc_r, Method::RcRcal);

    let nox_stage = |e: Error| e.in_stage(tag("NOX+RC+RCAL"));
    let per_ensemble = data
        .par_iter()
        .enumerate()
        .map(|(k, ds)| {
            let pp = bootstrap(ds, cfg.n_boot, bseed(k, 1), |p| Ok(p_plus_minus(&correct(p)?).0))?;
            let pm = bootstrap(ds, cfg.n_boot, bseed(k, 2), |p| Ok(p_plus_minus(&correct(p)?).1))?;
            Ok((pp, pm))
        })
        .collect::<Result<Vec<(Estimate, Estimate)>>>()
        .map_err(nox_stage)?;
    let alpha = cfg.alpha as f64;
    let (amp_p, amp_m): (Vec<Estimate>, Vec<Estimate>) = per_ensemble[1..].iter().cloned().unzip();
    let np = nox_combine(per_ensemble[0].0, &amp_p, alpha, m).map_err(nox_stage)?;
    let nm_ = nox_combine(per_ensemble[0].1, &amp_m, alpha, m).map_err(nox_stage)?;
    let (_, nox_r) = normalize_r(np.value, nm_.value).map_err(nox_stage)?;
    let stat_err = normalize_r_err(np.value, nm_.value, np.stat_err, nm_.stat_err)?;
    let sys_bound = (nox_r - rc.r_minus).abs();
    let nox_estimate = MitigatedEstimate { value: nox_r, stat_err, sys_bound, method: Method::NoxRcRcal };
    let nox = ReflectionPoint::new(step, t, np.value, nm_.value, nox_estimate.total_err()).map_err(nox_stage)?;

    let nox_no_rc = (0..cfg.n_rand)
        .map(|r| {
            let est = |k: usize| -> Result<(Estimate, Estimate)> {
                let d = &data[k][r];
                let (pp, pm) = p_plus_minus(&d.probabilities()?);
                Ok((
                    Estimate { value: pp, stat_err: binomial_err(pp, d.shots()) },
                    Estimate { value: pm, stat_err: binomial_err(pm, d.shots()) },
                ))
            };
            let all = (0..data.len()).map(est).collect::<Result<Vec<_>>>()?;
            let (ap, am): (Vec<Estimate>, Vec<Estimate>) = all[1..].iter().cloned().unzip();
            let p = nox_combine(all[0].0, &ap, alpha, m)?;
            let q = nox_combine(all[0].1, &am, alpha, m)?;
            let err = normalize_r_err(p.value, q.value, p.stat_err, q.stat_err)?;
            ReflectionPoint::new(step, t, p.value, q.value, err)
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage(tag("NOX")))?;

    Ok(StepResult {
        step,
        t,
        hard_cycles: m,
        family_size: fam.size(),
        gamma: gamma_diagnostic(ideal.r_minus, rc.r_minus, nox.r_minus),
        ideal,
        unmitigated,
        rc,
        rc_estimate,
        nox_no_rc,
        nox,
        nox_estimate,
        rcal_clipped_mass,
    })
}

fn fit_track(case: &CaseResult, name: &str) -> FitOutcome {
    let t: Vec<f64> = case.steps.iter().map(|s| s.t).collect();
    let (y, err) = case.mean_series(name);
    fit_series(&t, &y, &err)
}

pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    let nm = NoiseModel::from_config(N_QUBITS, &cfg.noise).map_err(|e| e.in_stage("noise model"))?;
    let calibration = calibrate(cfg, &nm).map_err(|e| e.in_stage("calibration"))?;
    let tasks: Vec<(Case, usize)> =
        Case::ALL.iter().flat_map(|&c| (1..=cfg.n_trotter_max).map(move |s| (c, s))).collect();
    let per_task = tasks
        .par_iter()
        .map(|&(case, step)| {
            let params = case.params(&cfg.scattering);
            // Calibration is per qubit; the circuits read qubits in measurement order.
            let confusion = match &calibration {
                Some(cm) => Some(cm.select(build_scattering_circuit(&params, step)?.measured_qubits())?),
                None => None,
            };
            run_step(&Shared { cfg, nm: &nm, confusion }, case, &params, step)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cases = Vec::new();
    let mut it = per_task.into_iter();
    for case in Case::ALL {
        let steps: Vec<StepResult> = it.by_ref().take(cfg.n_trotter_max).collect();
        let mut cr = CaseResult { case, params: case.params(&cfg.scattering), steps, fits: BTreeMap::new() };
        for name in tracks() {
            let f = fit_track(&cr, name);
            cr.fits.insert(name.to_string(), f);
        }
        cases.push(cr);
    }

    let time_delays = tracks()
        .iter()
        .map(|name| (name.to_string(), delay_between(&cases[0].fits[*name], &cases[1].fits[*name])))
        .collect();

    let mut art = RunArtifacts {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        config_sha256: cfg.hash(),
        calibration,
        cases,
        time_delays,
        metrics: MetricsTable::default(),
    };
    art.metrics = compare_methods(&super::report::series_rows(&art)).map_err(|e| e.in_stage("metrics"))?;
    Ok(art)
}
