//! Noiseless output extrapolation: one amplified circuit per hard cycle and
//! the affine combination `((α+m)/α)·Ê_base − (1/α)·Σ Ê_i`.

use rayon::prelude::*;

use super::estimate::{Estimate, MitigatedEstimate, Method};
use super::rc::{rc_compile, RcEnsemble};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::noise::{AmplifiedSpan, NoiseContext};
use crate::rng::derive_seed;

pub const DEFAULT_ALPHA: u32 = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct NoxMember {
    pub span: AmplifiedSpan,
    pub ensemble: RcEnsemble,
}

impl NoxMember {
    pub fn context(&self, batch: Option<usize>) -> NoiseContext {
        NoiseContext { batch, amplified: Some(self.span) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoxFamily {
    pub alpha: u32,
    pub base: RcEnsemble,
    pub amplified: Vec<NoxMember>,
}

impl NoxFamily {
    pub fn m(&self) -> usize {
        self.amplified.len()
    }

    /// Base plus amplified ensembles.
    pub fn size(&self) -> usize {
        self.amplified.len() + 1
    }
}

fn check_alpha(alpha: u32) -> Result<()> {
    if alpha == 0 || alpha % 2 == 1 {
        return Err(Error::InvalidArgument(format!("alpha = {alpha}: 1+alpha must be odd and alpha > 0")));
    }
    Ok(())
}

/// `c` with hard cycle `target` repeated `reps` times back to back.
pub fn amplify(c: &Circuit, target: usize, reps: usize) -> Result<(Circuit, AmplifiedSpan)> {
    let positions = c.hard_cycle_positions();
    let &pos = positions
        .get(target)
        .ok_or_else(|| Error::InvalidArgument(format!("no hard cycle {target}")))?;
    let cycle = &c.cycles()[pos];
    if cycle.rotations().next().is_some() {
        return Err(Error::NotAmplifiable(target, "hard cycle contains rotations".into()));
    }
    let mut cycles = c.cycles()[..pos].to_vec();
    cycles.extend(std::iter::repeat_n(cycle.clone(), reps));
    cycles.extend_from_slice(&c.cycles()[pos + 1..]);
    let out = Circuit::from_cycles(c.num_qubits(), cycles)?.with_measured(c.measured_qubits().to_vec())?;
    Ok((out, AmplifiedSpan { first: target, reps, target }))
}

/// Base ensemble plus one ensemble per hard cycle with that cycle repeated
/// `1+α` times; every repetition gets its own random frame.
pub fn nox_family(c: &Circuit, alpha: u32, n_rand: usize, seed: u64) -> Result<NoxFamily> {
    check_alpha(alpha)?;
    let m = c.hard_cycle_count();
    let base = rc_compile(c, n_rand, derive_seed(seed, &[0]))?;
    let amplified = (0..m)
        .into_par_iter()
        .map(|i| {
            let (circ, span) = amplify(c, i, 1 + alpha as usize)?;
            let ensemble = rc_compile(&circ, n_rand, derive_seed(seed, &[1 + i as u64]))?;
            Ok(NoxMember { span, ensemble })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NoxFamily { alpha, base, amplified })
}

/// `((α+m)/α)·base − (1/α)·Σ amplified`, errors added in quadrature with the
/// same coefficients.
pub fn nox_combine(base: Estimate, amplified: &[Estimate], alpha: f64, m: usize) -> Result<MitigatedEstimate> {
    if amplified.len() != m {
        return Err(Error::InvalidArgument(format!("expected {m} amplified estimates, got {}", amplified.len())));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha}")));
    }
    let cb = (alpha + m as f64) / alpha;
    let value = cb * base.value - amplified.iter().map(|e| e.value).sum::<f64>() / alpha;
    let var = (cb * base.stat_err).powi(2) + amplified.iter().map(|e| (e.stat_err / alpha).powi(2)).sum::<f64>();
    Ok(MitigatedEstimate { value, stat_err: var.sqrt(), sys_bound: 0.0, method: Method::NoxRcRcal })
}

/// `|Ô_NOX − Ô_RC|`.
pub fn systematic_bound(nox: &MitigatedEstimate, rc: &MitigatedEstimate) -> f64 {
    (nox.value - rc.value).abs()
}

/// `|rc − ideal| / |nox − ideal|`; `+∞` when NOX is exact to 1e-14.
pub fn gamma_diagnostic(ideal: f64, rc: f64, nox: f64) -> f64 {
    let den = (nox - ideal).abs();
    if den < 1e-14 {
        f64::INFINITY
    } else {
        (rc - ideal).abs() / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build_scattering_circuit, ScatteringParams};
    use crate::linalg::phase_invariant_distance;
    use crate::noise::NoiseModel;
    use crate::sim::simulate_exact_with;
    use proptest::prelude::*;

    #[test]
    fn combine_examples() {
        let e = |v| Estimate::exact(v);
        let out = nox_combine(e(0.8), &[e(0.5), e(0.6)], 10.0, 2).unwrap();
        assert!((out.value - 0.85).abs() < 1e-15);
        let same = nox_combine(e(0.42), &[e(0.42); 5], 10.0, 5).unwrap();
        assert!((same.value - 0.42).abs() < 1e-15);
        assert!(nox_combine(e(0.8), &[e(0.5)], 10.0, 2).is_err());
        assert!(nox_combine(e(0.8), &[e(0.5)], 0.0, 1).is_err());
    }

    #[test]
    fn combine_error_propagation() {
        let base = Estimate { value: 0.5, stat_err: 0.01 };
        let amp = vec![Estimate { value: 0.4, stat_err: 0.02 }; 3];
        let out = nox_combine(base, &amp, 10.0, 3).unwrap();
        let expect = ((1.3f64 * 0.01).powi(2) + 3.0 * 0.002f64.powi(2)).sqrt();
        assert!((out.stat_err - expect).abs() < 1e-15);
    }

    #[test]
    fn bound_and_gamma() {
        let mk = |v| MitigatedEstimate { value: v, stat_err: 0.0, sys_bound: 0.0, method: Method::NoxRcRcal };
        assert!((systematic_bound(&mk(0.85), &mk(0.80)) - 0.05).abs() < 1e-15);
        assert_eq!(gamma_diagnostic(0.5, 0.6, 0.5), f64::INFINITY);
        assert!((gamma_diagnostic(0.5, 0.6, 0.52) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn family_shape() {
        let p = ScatteringParams::default();
        let c = build_scattering_circuit(&p, 1).unwrap();
        let fam = nox_family(&c, 10, 2, 3).unwrap();
        assert_eq!(fam.m(), 13);
        assert_eq!(fam.size(), 14);
        for (i, mem) in fam.amplified.iter().enumerate() {
            assert_eq!(mem.ensemble.base.hard_cycle_count(), 13 + 10);
            assert_eq!(mem.span, AmplifiedSpan { first: i, reps: 11, target: i });
            let hards: Vec<_> = mem.ensemble.base.cycles().iter().filter(|c| c.is_hard()).collect();
            assert!(hards[i..i + 11].iter().all(|h| *h == hards[i]));
        }
        assert!(nox_family(&c, 9, 2, 3).is_err());
        assert!(nox_family(&c, 0, 2, 3).is_err());
    }

    #[test]
    fn family_members_are_equivalent() {
        let c = build_scattering_circuit(&ScatteringParams::default(), 1).unwrap();
        let fam = nox_family(&c, 10, 2, 8).unwrap();
        let u = c.unitary().unwrap();
        for mem in &fam.amplified {
            assert!(phase_invariant_distance(&mem.ensemble.base.unitary().unwrap(), &u) < 1e-10);
            for r in &mem.ensemble.randomizations {
                assert!(phase_invariant_distance(&r.unitary().unwrap(), &u) < 1e-10);
            }
        }
        let nm = NoiseModel::noiseless(4);
        let d0 = simulate_exact_with(&c, &nm, &Default::default()).unwrap();
        for mem in &fam.amplified {
            let d = simulate_exact_with(&mem.ensemble.randomizations[0], &nm, &mem.context(None)).unwrap();
            assert!(d.total_variation(&d0).unwrap() < 1e-12);
        }
    }

    #[test]
    fn rotations_in_hard_cycles_are_not_amplifiable() {
        use crate::circuit::{Angle, Cycle, Gate};
        let c = Circuit::from_cycles(3, vec![Cycle::new(vec![Gate::cx(0, 1), Gate::rz(2, Angle::Radians(0.1))]).unwrap()])
            .unwrap();
        assert!(matches!(amplify(&c, 0, 11), Err(Error::NotAmplifiable(0, _))));
        assert!(amplify(&c, 1, 11).is_err());
    }

    proptest! {
        #[test]
        fn linear_model_cancels_exactly(
            truth in -1.0f64..1.0,
            deltas in proptest::collection::vec(-0.01f64..0.01, 1..40),
            alpha in 1u32..20,
        ) {
            let a = alpha as f64;
            let total: f64 = deltas.iter().sum();
            let base = Estimate::exact(truth + total);
            let amp: Vec<Estimate> = deltas.iter().map(|d| Estimate::exact(truth + total + a * d)).collect();
            let out = nox_combine(base, &amp, a, deltas.len()).unwrap();
            prop_assert!((out.value - truth).abs() < 1e-12);
        }

        #[test]
        fn coefficients_sum_to_one(v in -5.0f64..5.0, m in 1usize..50, alpha in 1u32..30) {
            let out = nox_combine(Estimate::exact(v), &vec![Estimate::exact(v); m], alpha as f64, m).unwrap();
            prop_assert!((out.value - v).abs() < 1e-12 * (1.0 + v.abs() * m as f64));
        }
    }
}
