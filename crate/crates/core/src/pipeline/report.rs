//! Output files, the manifest, and the method comparison table.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::run::{delay_between, fit_series, step_summary, Case, DelayOutcome, FitOutcome, RunArtifacts, IDEAL};
use crate::analysis::closeness_metrics;
use crate::error::{Error, Result};
use crate::mitigation::Method;

/// One line of `series.csv`: a single run of one track at one step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub case: Case,
    pub track: String,
    pub run: usize,
    pub step: usize,
    pub t: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    pub r_minus: f64,
    pub r_plus: f64,
    pub err: f64,
}

pub fn series_rows(art: &RunArtifacts) -> Vec<SeriesRow> {
    let mut rows = Vec::new();
    for c in &art.cases {
        for name in super::run::tracks() {
            for s in &c.steps {
                for (run, p) in s.track(name).into_iter().enumerate() {
                    rows.push(SeriesRow {
                        case: c.case,
                        track: name.to_string(),
                        run,
                        step: p.step,
                        t: p.t,
                        p_plus: p.p_plus,
                        p_minus: p.p_minus,
                        r_minus: p.r_minus,
                        r_plus: p.r_plus(),
                        err: p.err,
                    });
                }
            }
        }
    }
    rows
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub case: Case,
    pub metric: String,
    #[serde(rename = "NOX+RC+RCAL")]
    pub nox_rc_rcal: f64,
    #[serde(rename = "RC+RCAL")]
    pub rc_rcal: f64,
    #[serde(rename = "unmitigated")]
    pub unmitigated: f64,
    #[serde(rename = "NOX")]
    pub nox: f64,
    /// `NOX+RC+RCAL / unmitigated`.
    pub ratio: f64,
    /// `(1 − ratio)·100`.
    pub reduction_pct: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub rows: Vec<MetricRow>,
}

impl MetricsTable {
    pub fn get(&self, case: Case, metric: &str) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.case == case && r.metric == metric)
    }
}

pub fn reduction(mitigated: f64, unmitigated: f64) -> (f64, f64) {
    let ratio = if unmitigated == 0.0 { if mitigated == 0.0 { 1.0 } else { f64::INFINITY } } else { mitigated / unmitigated };
    (ratio, (1.0 - ratio) * 100.0)
}

/// M₁ and M₂ of every method against the ideal track, per case.
pub fn compare_methods(rows: &[SeriesRow]) -> Result<MetricsTable> {
    let mut table = MetricsTable::default();
    for case in Case::ALL {
        let of = |track: &str| -> BTreeMap<usize, BTreeMap<usize, f64>> {
            let mut runs: BTreeMap<usize, BTreeMap<usize, f64>> = BTreeMap::new();
            for r in rows.iter().filter(|r| r.case == case && r.track == track) {
                runs.entry(r.run).or_default().insert(r.step, r.r_minus);
            }
            runs
        };
        let ideal = of(IDEAL);
        if ideal.is_empty() {
            continue;
        }
        let ideal: Vec<f64> = ideal[&0].values().cloned().collect();
        let mut m = BTreeMap::new();
        for method in Method::ALL {
            let runs = of(method.label());
            if runs.is_empty() {
                return Err(Error::InvalidArgument(format!("{case}: no {method} data")));
            }
            let q: Vec<Vec<f64>> = runs.values().map(|r| r.values().cloned().collect()).collect();
            m.insert(method, closeness_metrics(&q, &ideal)?);
        }
        for (metric, pick) in [("M1", 0), ("M2", 1)] {
            let v = |meth: Method| if pick == 0 { m[&meth].m1 } else { m[&meth].m2 };
            let (ratio, reduction_pct) = reduction(v(Method::NoxRcRcal), v(Method::Unmitigated));
            table.rows.push(MetricRow {
                case,
                metric: metric.into(),
                nox_rc_rcal: v(Method::NoxRcRcal),
                rc_rcal: v(Method::RcRcal),
                unmitigated: v(Method::Unmitigated),
                nox: v(Method::Nox),
                ratio,
                reduction_pct,
            });
        }
    }
    if table.rows.is_empty() {
        return Err(Error::InvalidArgument("no ideal series to compare against".into()));
    }
    Ok(table)
}

/// Fits of every `(case, track)` present in the rows, and the time delay of
/// every track present in both cases.
pub fn fits_from_rows(rows: &[SeriesRow]) -> (BTreeMap<(Case, String), FitOutcome>, BTreeMap<String, DelayOutcome>) {
    let mut grouped: BTreeMap<(Case, String), BTreeMap<usize, (f64, Vec<(f64, f64)>)>> = BTreeMap::new();
    for r in rows {
        let e = grouped.entry((r.case, r.track.clone())).or_default().entry(r.step).or_insert((r.t, Vec::new()));
        e.1.push((r.r_minus, r.err));
    }
    let fits: BTreeMap<(Case, String), FitOutcome> = grouped
        .into_iter()
        .map(|(key, steps)| {
            let t: Vec<f64> = steps.values().map(|v| v.0).collect();
            let (y, err): (Vec<f64>, Vec<f64>) = steps.values().map(|v| step_summary(&v.1)).unzip();
            (key, fit_series(&t, &y, &err))
        })
        .collect();
    let mut delays = BTreeMap::new();
    for ((case, track), f) in &fits {
        if *case == Case::Free {
            if let Some(g) = fits.get(&(Case::Interacting, track.clone())) {
                delays.insert(track.clone(), delay_between(f, g));
            }
        }
    }
    (fits, delays)
}

fn csv_bytes<T: Serialize>(hash: &str, rows: &[T]) -> Result<Vec<u8>> {
    let mut out = format!("# config_sha256={hash}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        for r in rows {
            w.serialize(r).map_err(csv_err)?;
        }
        w.flush()?;
    }
    Ok(out)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse { line: e.position().map_or(0, |p| p.line() as usize), msg: e.to_string() }
}

pub fn read_series_csv(text: &str) -> Result<Vec<SeriesRow>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(csv_err))
        .collect()
}

#[derive(Serialize)]
struct PlotRow {
    step: usize,
    t: f64,
    ideal: f64,
    unmitigated: f64,
    unmitigated_err: f64,
    rc_rcal: f64,
    rc_rcal_err: f64,
    nox: f64,
    nox_err: f64,
    nox_rc_rcal: f64,
    nox_rc_rcal_stat_err: f64,
    nox_rc_rcal_sys: f64,
    delta_unmitigated: f64,
    delta_rc_rcal: f64,
    delta_nox_rc_rcal: f64,
    inverse_prob: f64,
    inverse_prob_flagged: bool,
    gamma: f64,
}

#[derive(Serialize)]
struct FitRow<'a> {
    case: Case,
    track: &'a str,
    status: &'a str,
    a: Option<f64>,
    a_err: Option<f64>,
    t_tilde: Option<f64>,
    t_tilde_err: Option<f64>,
    w: Option<f64>,
    w_err: Option<f64>,
    chi2: Option<f64>,
    t_star: Option<f64>,
    t_star_err: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub seed: u64,
    pub config_sha256: String,
    pub files: Vec<ManifestEntry>,
}

fn plot_rows(art: &RunArtifacts, case: Case) -> Result<Vec<PlotRow>> {
    let c = art.case(case).ok_or_else(|| Error::InvalidArgument(format!("no {case} results")))?;
    let (um, ue) = c.mean_series(Method::Unmitigated.label());
    let (nm, ne) = c.mean_series(Method::Nox.label());
    let thr = art.config.inverse_prob_threshold;
    Ok(c.steps
        .iter()
        .enumerate()
        .map(|(k, s)| PlotRow {
            step: s.step,
            t: s.t,
            ideal: s.ideal.r_minus,
            unmitigated: um[k],
            unmitigated_err: ue[k],
            rc_rcal: s.rc.r_minus,
            rc_rcal_err: s.rc.err,
            nox: nm[k],
            nox_err: ne[k],
            nox_rc_rcal: s.nox.r_minus,
            nox_rc_rcal_stat_err: s.nox_estimate.stat_err,
            nox_rc_rcal_sys: s.nox_estimate.sys_bound,
            delta_unmitigated: um[k] - s.ideal.r_minus,
            delta_rc_rcal: s.rc.r_minus - s.ideal.r_minus,
            delta_nox_rc_rcal: s.nox.r_minus - s.ideal.r_minus,
            inverse_prob: s.ideal.inverse_prob(),
            inverse_prob_flagged: s.ideal.inverse_prob() > thr,
            gamma: s.gamma,
        })
        .collect())
}

fn fit_rows(art: &RunArtifacts) -> Vec<FitRow<'_>> {
    let mut rows = Vec::new();
    for c in &art.cases {
        for (name, f) in &c.fits {
            let mut row = FitRow {
                case: c.case,
                track: name,
                status: "failed",
                a: None,
                a_err: None,
                t_tilde: None,
                t_tilde_err: None,
                w: None,
                w_err: None,
                chi2: None,
                t_star: None,
                t_star_err: None,
            };
            if let super::run::FitOutcome::Ok { fit, t_star, t_star_err } = f {
                let e = fit.std_errors();
                row = FitRow {
                    status: "ok",
                    a: Some(fit.a),
                    a_err: Some(e[0]),
                    t_tilde: Some(fit.t_tilde),
                    t_tilde_err: Some(e[1]),
                    w: Some(fit.w),
                    w_err: Some(e[2]),
                    chi2: Some(fit.chi2),
                    t_star: *t_star,
                    t_star_err: *t_star_err,
                    ..row
                };
            }
            rows.push(row);
        }
    }
    rows
}

/// Renders every output file in memory, in a fixed order.
pub fn render_files(art: &RunArtifacts) -> Result<Vec<(String, Vec<u8>)>> {
    let h = &art.config_sha256;
    let mut files = vec![
        ("config.toml".to_string(), art.config.to_toml()?.into_bytes()),
        ("results.json".to_string(), serde_json::to_vec_pretty(art)?),
        ("series.csv".to_string(), csv_bytes(h, &series_rows(art))?),
    ];
    for case in Case::ALL {
        files.push((format!("plot_{case}.csv"), csv_bytes(h, &plot_rows(art, case)?)?));
    }
    files.push(("fits.csv".to_string(), csv_bytes(h, &fit_rows(art))?));
    files.push(("metrics.csv".to_string(), csv_bytes(h, &art.metrics.rows)?));
    Ok(files)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes all files plus `manifest.json` listing each with its hash.
pub fn write_artifacts(art: &RunArtifacts, dir: &Path) -> Result<Manifest> {
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for (name, bytes) in render_files(art)? {
        std::fs::write(dir.join(&name), &bytes)?;
        entries.push(ManifestEntry { sha256: sha256_hex(&bytes), bytes: bytes.len(), file: name });
    }
    let manifest = Manifest {
        version: art.version.clone(),
        seed: art.config.seed,
        config_sha256: art.config_sha256.clone(),
        files: entries,
    };
    let mut f = std::fs::File::create(dir.join("manifest.json"))?;
    serde_json::to_writer_pretty(&mut f, &manifest)?;
    f.write_all(b"\n")?;
    Ok(manifest)
}

/// The metrics table as aligned text.
pub fn format_table(t: &MetricsTable) -> String {
    let mut s = format!(
        "{:<12} {:<6} {:>12} {:>12} {:>12} {:>12} {:>8} {:>10}\n",
        "case", "metric", "NOX+RC+RCAL", "RC+RCAL", "unmitigated", "NOX", "ratio", "reduction"
    );
    for r in &t.rows {
        s += &format!(
            "{:<12} {:<6} {:>12.5} {:>12.5} {:>12.5} {:>12.5} {:>8.3} {:>9.1}%\n",
            r.case.label(),
            r.metric,
            r.nox_rc_rcal,
            r.rc_rcal,
            r.unmitigated,
            r.nox,
            r.ratio,
            r.reduction_pct
        );
    }
    s
}
