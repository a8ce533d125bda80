//! End-to-end acceptance checks. Each check prints one PASS/FAIL line; the
//! test fails if any of them does.

use std::io::Write;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use noxsim_core::analysis::{chi2, chi2_gradient, fit_sigmoid_data, normalize_r, sigmoid, MINUS_STATE, PLUS_STATE};
use noxsim_core::circuit::rx_matrix;
use noxsim_core::linalg::{c, embed_single, CMatrix};
use noxsim_core::mitigation::{pool, rc_dress, Estimate, NoxFamily, RcEnsemble};
use noxsim_core::outcome::index_of;
use noxsim_core::pipeline::{render_files, run_pipeline, series_rows, Case, ExperimentConfig, Mode, RunArtifacts};
use noxsim_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

const ALPHA: u32 = 10;

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check { pass, detail: detail.into() }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn pooled(ens: &RcEnsemble, nm: &NoiseModel, ctx: NoiseContext) -> Vec<f64> {
    let ds: Vec<OutcomeDistribution> =
        ens.randomizations.par_iter().map(|r| simulate_exact_with(r, nm, &ctx).unwrap()).collect();
    pool(&ds.iter().collect::<Vec<_>>()).unwrap()
}

/// Pooled exact distributions of the base ensemble and of every amplified one.
fn family_probs(fam: &NoxFamily, nm: &NoiseModel) -> (Vec<f64>, Vec<Vec<f64>>) {
    let base = pooled(&fam.base, nm, NoiseContext::default());
    let amps = fam.amplified.par_iter().map(|m| pooled(&m.ensemble, nm, m.context(None))).collect();
    (base, amps)
}

fn nox_of(base: &[f64], amps: &[Vec<f64>], idx: usize) -> f64 {
    let a: Vec<Estimate> = amps.iter().map(|p| Estimate::exact(p[idx])).collect();
    nox_combine(Estimate::exact(base[idx]), &a, ALPHA as f64, a.len()).unwrap().value
}

/// `(RC, NOX)` values of R₋, with NOX applied to P₊ and P₋ before normalizing.
fn r_minus_pair(base: &[f64], amps: &[Vec<f64>]) -> (f64, f64) {
    let (ip, im) = (index_of(4, PLUS_STATE).unwrap(), index_of(4, MINUS_STATE).unwrap());
    let rc = normalize_r(base[ip], base[im]).unwrap().1;
    let nox = normalize_r(nox_of(base, amps, ip), nox_of(base, amps, im)).unwrap().1;
    (rc, nox)
}

fn ideal_probs(circ: &Circuit) -> Vec<f64> {
    ideal_distribution(circ).unwrap().probabilities().unwrap()
}

fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn zero_noise_fixed_point() -> Check {
    let t0 = Instant::now();
    let p = ScatteringParams::default();
    let nm = NoiseModel::noiseless(4);
    let mut worst = 0.0f64;
    for params in [p.free(), p.clone()] {
        for step in 1..=7 {
            let circ = build_scattering_circuit(&params, step).unwrap();
            let fam = nox_family(&circ, ALPHA, 3, step as u64).unwrap();
            let (base, amps) = family_probs(&fam, &nm);
            let ideal = ideal_probs(&circ);
            for idx in 0..16 {
                worst = worst.max((nox_of(&base, &amps, idx) - ideal[idx]).abs());
            }
            let ideal_r = normalize_r(ideal[index_of(4, PLUS_STATE).unwrap()], ideal[index_of(4, MINUS_STATE).unwrap()]);
            worst = worst.max((r_minus_pair(&base, &amps).1 - ideal_r.unwrap().1).abs());
        }
    }
    let el = t0.elapsed();
    check(worst <= 1e-12 && within(el, 1.0), format!("max |NOX - ideal| = {worst:.2e} over all outcomes and R-, {el:.2?}"))
}

fn first_order_cancellation() -> Check {
    let t0 = Instant::now();
    let circ = build_scattering_circuit(&ScatteringParams::default(), 2).unwrap();
    let m = circ.hard_cycle_count();
    let fam = nox_family(&circ, ALPHA, 4, 11).unwrap();
    let im = index_of(4, MINUS_STATE).unwrap();
    let ideal = ideal_probs(&circ)[im];
    let ps = [1e-3, 2e-3, 5e-3, 1e-2];
    let (mut rc_err, mut nox_err) = (Vec::new(), Vec::new());
    for &p in &ps {
        let (base, amps) = family_probs(&fam, &NoiseModel::depolarizing(4, p).unwrap());
        rc_err.push((base[im] - ideal).abs());
        nox_err.push((nox_of(&base, &amps, im) - ideal).abs());
    }
    let (s_rc, s_nox) = (loglog_slope(&ps, &rc_err), loglog_slope(&ps, &nox_err));
    let el = t0.elapsed();
    check(
        m == 17 && (0.9..=1.1).contains(&s_rc) && s_nox >= 1.7 && within(el, 120.0),
        format!("{m} hard cycles, P- bias slopes RC {s_rc:.3}, NOX {s_nox:.3}, {el:.2?}"),
    )
}

fn pauli_basis(n: usize) -> Vec<CMatrix> {
    PauliString::all(n).map(|p| p.to_matrix()).collect()
}

fn ptm(n: usize, ops: &[(f64, CMatrix)]) -> CMatrix {
    let basis = pauli_basis(n);
    let d = (1 << n) as f64;
    CMatrix::from_fn(basis.len(), basis.len(), |r, k| {
        let img = ops.iter().fold(CMatrix::zeros(1 << n, 1 << n), |acc, (w, u)| acc + u * &basis[k] * u.adjoint() * c(*w, 0.0));
        c((&basis[r] * img).trace().re / d, 0.0)
    })
}

fn twirl_diagonalization() -> Check {
    let t0 = Instant::now();
    let n = 2;
    let cx = Circuit::from_cycles(n, vec![Cycle::new(vec![Gate::cx(0, 1)]).unwrap()]).unwrap();
    let err = embed_single(n, 0, &rx_matrix(0.1));
    let frames: Vec<PauliString> = PauliString::all(n).collect();
    let w = 1.0 / frames.len() as f64;
    let ops: Vec<(f64, CMatrix)> = frames
        .iter()
        .map(|f| {
            let r = rc_dress(&cx, &[*f]).unwrap();
            let pos = r.cycles().iter().position(|c| c.is_hard()).unwrap();
            let before = Circuit::from_cycles(n, r.cycles()[..=pos].to_vec()).unwrap().unitary().unwrap();
            let after = Circuit::from_cycles(n, r.cycles()[pos + 1..].to_vec()).unwrap().unitary().unwrap();
            (w, after * &err * before)
        })
        .collect();
    let eff = ptm(n, &ops) * ptm(n, &[(1.0, cx.unitary().unwrap().adjoint())]);
    let off = (0..16)
        .flat_map(|r| (0..16).map(move |k| (r, k)))
        .filter(|(r, k)| r != k)
        .map(|rk| eff[rk].norm())
        .fold(0.0, f64::max);
    let el = t0.elapsed();
    check(off < 1e-10 && within(el, 1.0), format!("max off-diagonal PTM entry {off:.2e}, {el:.2?}"))
}

fn channel_power_oracle() -> Check {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let errs: Vec<f64> = (0..15).map(|_| rng.random::<f64>() * 0.02).collect();
        let id = 1.0 - errs.iter().sum::<f64>();
        let entries = PauliString::all(2).zip(std::iter::once(id).chain(errs));
        let ch = PauliChannel::new(2, entries).unwrap();
        let conv = (1..11).fold(ch.clone(), |acc, _| acc.compose(&ch).unwrap());
        worst = worst.max(ch.power(11).unwrap().total_variation(&conv).unwrap());
    }
    let mut bitflip = 0.0f64;
    for p in [0.001, 0.01, 0.1, 0.3] {
        let x = PauliString::single(1, 0, Pauli::X).unwrap();
        let ch = PauliChannel::new(1, [(PauliString::identity(1), 1.0 - p), (x, p)]).unwrap();
        let expect = (1.0 - (1.0 - 2.0 * p).powi(11)) / 2.0;
        bitflip = bitflip.max((ch.power(11).unwrap().prob(&x) - expect).abs());
    }
    let el = t0.elapsed();
    check(
        worst <= 1e-12 && bitflip <= 1e-12 && within(el, 10.0),
        format!("max TV {worst:.2e} over 100 channels, bit-flip closed form {bitflip:.2e}, {el:.2?}"),
    )
}

fn hard_cycle_schedule() -> Check {
    let p = ScatteringParams::default();
    let mut got = Vec::new();
    for params in [p.free(), p.clone()] {
        for step in [1, 7] {
            let circ = build_scattering_circuit(&params, step).unwrap();
            got.push((circ.hard_cycle_count(), nox_family(&circ, ALPHA, 1, 0).unwrap().size()));
        }
    }
    let pass = got.iter().step_by(2).all(|g| *g == (13, 14)) && got.iter().skip(1).step_by(2).all(|g| *g == (37, 38));
    check(pass, format!("(hard cycles, family size) at steps 1 and 7, free then interacting: {got:?}"))
}

fn rcal_exactness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let raw: Vec<f64> = (0..8).map(|_| 0.2 + rng.random::<f64>()).collect();
        let s: f64 = raw.iter().sum();
        let truth = OutcomeDistribution::exact(3, raw.iter().map(|v| v / s).collect()).unwrap();
        let flips: Vec<(f64, f64)> = (0..3).map(|_| (rng.random::<f64>() * 0.1, rng.random::<f64>() * 0.1)).collect();
        let cm = ConfusionMatrix::from_flips(&flips).unwrap();
        let back = rcal_invert(&apply_readout_noise(&truth, &cm).unwrap(), &cm).unwrap().distribution;
        let (a, b) = (truth.probabilities().unwrap(), back.probabilities().unwrap());
        worst = worst.max(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
    }

    let shots = 1_000_000u64;
    let truth = OutcomeDistribution::exact(3, vec![0.05, 0.1, 0.2, 0.05, 0.15, 0.25, 0.12, 0.08]).unwrap();
    let cm = ConfusionMatrix::from_flips(&[(0.02, 0.05), (0.03, 0.06), (0.01, 0.04)]).unwrap();
    let noisy = apply_readout_noise(&truth, &cm).unwrap();
    let q = noisy.probabilities().unwrap();
    let a = DMatrix::from_fn(8, 8, |i, j| cm.dense()[i][j]);
    let a_inv = a.try_inverse().unwrap();
    let sigma_q = DMatrix::from_fn(8, 8, |i, j| (if i == j { q[i] } else { 0.0 } - q[i] * q[j]) / shots as f64);
    let cov = &a_inv * sigma_q * a_inv.transpose();
    let p = truth.probabilities().unwrap();
    let mut max_z = 0.0f64;
    for seed in 0..5 {
        let sampled = noisy.sample_counts(shots, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let est = rcal_invert(&sampled, &cm).unwrap().distribution.probabilities().unwrap();
        for j in 0..8 {
            max_z = max_z.max((est[j] - p[j]).abs() / cov[(j, j)].sqrt());
        }
    }
    check(
        worst <= 1e-12 && max_z <= 5.0,
        format!("exact round trip {worst:.2e}, sampled max |z| {max_z:.2} over 5 runs of 1e6 shots"),
    )
}

fn sum_rule(arts: &[&RunArtifacts]) -> Check {
    let mut worst = 0.0f64;
    let mut n = 0;
    for art in arts {
        for r in series_rows(art) {
            worst = worst.max((r.r_plus + r.r_minus - 1.0).abs());
            n += 1;
        }
    }
    check(worst <= f64::EPSILON, format!("max |R+ + R- - 1| = {worst:.2e} over {n} rows"))
}

fn sigmoid_fit_recovery() -> Check {
    let t0 = Instant::now();
    let truth = [0.9, 60.0, 10.0];
    let t: Vec<f64> = (0..30).map(|i| 120.0 * i as f64 / 29.0).collect();
    let err = vec![0.02; 30];
    let noise = Normal::new(0.0, 0.02).unwrap();
    let covered = (0..500u64)
        .into_par_iter()
        .filter(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let y: Vec<f64> = t.iter().map(|&ti| sigmoid(ti, truth[0], truth[1], truth[2]) + noise.sample(&mut rng)).collect();
            match fit_sigmoid_data(&t, &y, &err) {
                Ok(fit) => {
                    let (p, se) = (fit.params(), fit.std_errors());
                    (0..3).all(|k| (p[k] - truth[k]).abs() <= 3.0 * se[k])
                }
                Err(_) => false,
            }
        })
        .count();
    let frac = covered as f64 / 500.0;

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let y: Vec<f64> = t.iter().map(|&ti| sigmoid(ti, 0.9, 60.0, 10.0) + noise.sample(&mut rng)).collect();
    let mut grad_rel = 0.0f64;
    for _ in 0..20 {
        let p = [rng.random_range(0.5..1.2), rng.random_range(40.0..80.0), rng.random_range(5.0..20.0)];
        let g = chi2_gradient(&p, &t, &y, &err);
        for k in 0..3 {
            let h = 1e-6 * p[k].abs().max(1.0);
            let (mut hi, mut lo) = (p, p);
            hi[k] += h;
            lo[k] -= h;
            let fd = (chi2(&hi, &t, &y, &err) - chi2(&lo, &t, &y, &err)) / (2.0 * h);
            grad_rel = grad_rel.max((g[k] - fd).abs() / fd.abs().max(g[k].abs()).max(1e-8));
        }
    }
    let el = t0.elapsed();
    check(
        frac >= 0.95 && grad_rel < 1e-5 && within(el, 60.0),
        format!("truth within 3 SE in {:.1}% of 500 fits, gradient rel. error {grad_rel:.2e}, {el:.2?}", 100.0 * frac),
    )
}

fn ordered(art: &RunArtifacts) -> bool {
    Case::ALL.iter().all(|&case| {
        ["M1", "M2"].iter().all(|m| {
            let r = art.metrics.get(case, m).unwrap();
            r.nox_rc_rcal < r.rc_rcal && r.rc_rcal < r.unmitigated
        })
    })
}

fn metric_ordering() -> (Check, Vec<RunArtifacts>) {
    let t0 = Instant::now();
    let arts: Vec<RunArtifacts> = (0..10u64)
        .map(|seed| run_pipeline(&ExperimentConfig { seed, mode: Mode::Shots, ..Default::default() }).unwrap())
        .collect();
    let good: Vec<u64> = (0..10u64).filter(|&s| ordered(&arts[s as usize])).collect();
    let el = t0.elapsed();
    let c = check(
        good.len() >= 9 && within(el, 1800.0),
        format!("ordering NOX+RC+RCAL < RC+RCAL < unmitigated holds in {}/10 runs (seeds {good:?}), {el:.2?}", good.len()),
    );
    (c, arts)
}

fn bound_validity() -> Check {
    let t0 = Instant::now();
    let circ = build_scattering_circuit(&ScatteringParams::default(), 2).unwrap();
    let m = circ.hard_cycle_count();
    let ideal = ideal_probs(&circ);
    let ideal_r = normalize_r(ideal[index_of(4, PLUS_STATE).unwrap()], ideal[index_of(4, MINUS_STATE).unwrap()]).unwrap().1;
    let trials: Vec<(bool, f64)> = (0..100u64)
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
            let p = rng.random_range(1e-3..5e-3);
            let deltas = (0..m).map(|i| (i, rng.random_range(-0.5..0.5))).collect();
            let nm = NoiseModel::depolarizing(4, p).unwrap().with_amplification_deltas(deltas);
            let fam = nox_family(&circ, ALPHA, 2, trial).unwrap();
            let (base, amps) = family_probs(&fam, &nm);
            let (rc, nox) = r_minus_pair(&base, &amps);
            ((nox - ideal_r).abs() <= (nox - rc).abs(), gamma_diagnostic(ideal_r, rc, nox))
        })
        .collect();
    let held = trials.iter().filter(|t| t.0).count();
    let mut gammas: Vec<f64> = trials.iter().map(|t| t.1).collect();
    gammas.sort_by(f64::total_cmp);
    let median = (gammas[49] + gammas[50]) / 2.0;
    let el = t0.elapsed();
    check(
        held >= 90 && median >= 2.0 && within(el, 600.0),
        format!("R- bound holds in {held}/100 trials, median gamma {median:.2} (min {:.2}), {el:.2?}", gammas[0]),
    )
}

fn small_config() -> ExperimentConfig {
    ExperimentConfig { n_rand: 4, n_boot: 40, shots: 2000, n_trotter_max: 4, seed: 3, mode: Mode::Shots, ..Default::default() }
}

fn determinism() -> (Check, RunArtifacts) {
    let cfg = small_config();
    let a = run_pipeline(&cfg).unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = single.install(|| run_pipeline(&cfg).unwrap());
    let (fa, fb) = (render_files(&a).unwrap(), render_files(&b).unwrap());
    let same = fa == fb;
    let other = render_files(&run_pipeline(&ExperimentConfig { seed: 4, ..cfg }).unwrap()).unwrap();
    let seed_matters = other != fa;
    let bytes: usize = fa.iter().map(|(_, b)| b.len()).sum();
    let c = check(
        same && seed_matters,
        format!("{} files ({bytes} bytes) identical across thread counts: {same}; another seed differs: {seed_matters}", fa.len()),
    );
    (c, a)
}

#[test]
fn acceptance() {
    let mut results: Vec<(usize, &str, Check)> = Vec::new();
    let mut record = |id, name, c: Check| {
        // Straight to the handle so the lines show without --nocapture.
        let mut out = std::io::stdout().lock();
        writeln!(out, "{} {id:>2} {name}: {}", if c.pass { "PASS" } else { "FAIL" }, c.detail).unwrap();
        out.flush().unwrap();
        results.push((id, name, c));
    };
    record(1, "zero-noise fixed point", zero_noise_fixed_point());
    record(2, "first-order cancellation", first_order_cancellation());
    record(3, "twirl diagonalization", twirl_diagonalization());
    record(4, "channel power oracle", channel_power_oracle());
    record(5, "hard-cycle schedule", hard_cycle_schedule());
    record(6, "readout calibration round trip", rcal_exactness());
    let (c11, small) = determinism();
    let (c9, arts) = metric_ordering();
    let mut all: Vec<&RunArtifacts> = arts.iter().collect();
    all.push(&small);
    record(7, "sum rule", sum_rule(&all));
    record(8, "sigmoid fit recovery", sigmoid_fit_recovery());
    record(9, "metric ordering", c9);
    record(10, "systematic bound validity", bound_validity());
    record(11, "determinism", c11);
    let failed: Vec<String> = results.iter().filter(|r| !r.2.pass).map(|r| format!("{} {}", r.0, r.1)).collect();
    assert!(failed.is_empty(), "failed: {failed:?}");
}
