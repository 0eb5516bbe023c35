//! Transference between weighted forms on `Z` and on measure systems: the conjugation
//! identity, the `Δ` square function and the two-sided bound experiment.

use rand::Rng;

use crate::averages::{weighted_biform_seq, weighted_biform_space_many};
use crate::functions::{SampleFunction, Sequence};
use crate::norms::{check_breakpoints, lp_norm, oscillation, square_function, weak_l1_norm, IndexedFamily, OscillationReport, OscillationVariant};
use crate::random::{random_breakpoints, random_complex_sequence, random_sign_sequence};
use crate::systems::{isometry_power, FactoredIsometry};
use crate::weights::{WeightFamily, Weights};
use crate::{Error, Result, C64};

/// `max_x |Φ_k((U^{n₁}F)(U^{n₂}G)) − h_k^{−2}(U^{k+n₁}F)(U^{k+n₂}G)|`.
pub fn conjugation_identity_check(u: &FactoredIsometry, f: &SampleFunction, g: &SampleFunction, n1: i64, n2: i64, k: i64) -> Result<f64> {
    let fv = f.space_values(u.space().weights())?;
    let gv = g.space_values(u.space().weights())?;
    let pk = isometry_power(u, k);
    let lhs_inner: Vec<C64> = isometry_power(u, n1)
        .apply_values(fv)
        .iter()
        .zip(isometry_power(u, n2).apply_values(gv))
        .map(|(a, b)| a * b)
        .collect();
    let lhs = pk.automorphism(&lhs_inner);
    let a = isometry_power(u, k + n1).apply_values(fv);
    let b = isometry_power(u, k + n2).apply_values(gv);
    Ok(lhs
        .iter()
        .zip(a.iter().zip(&b))
        .zip(&pk.multiplier)
        .map(|((l, (a, b)), h)| {
            let hinv = h.conj();
            (l - hinv * hinv * a * b).norm()
        })
        .fold(0.0, f64::max))
}

/// `𝔗_j(f, g)` for `j = lo..=hi`, sharing one orbit walk.
pub fn transferred_forms(u: &FactoredIsometry, f: &SampleFunction, g: &SampleFunction, family: &dyn WeightFamily, lo: i64, hi: i64) -> Result<IndexedFamily> {
    let members = (lo..=hi).map(|j| family.member(j)).collect::<Result<Vec<_>>>()?;
    let refs: Vec<&dyn Weights> = members.iter().map(|w| w.as_ref()).collect();
    Ok(IndexedFamily { first: lo, members: weighted_biform_space_many(u, f, g, &refs)? })
}

/// `Δ = (Σ_r sup_{u_r ≤ j < u_{r+1}} |𝔗_j(f,g) − 𝔗_{u_{r+1}}(f,g)|²)^{1/2}` pointwise.
pub fn delta_statistic(u: &FactoredIsometry, f: &SampleFunction, g: &SampleFunction, family: &dyn WeightFamily, breakpoints: &[i64]) -> Result<SampleFunction> {
    check_breakpoints(breakpoints)?;
    let forms = transferred_forms(u, f, g, family, breakpoints[0], breakpoints[breakpoints.len() - 1])?;
    square_function(&forms, breakpoints, OscillationVariant::LeftClosed)
}

/// `T_j(a, b)` for `j = lo..=hi`; a member whose weight agrees with its predecessor on every
/// lag that can meet the data reuses the predecessor's output.
pub fn sequence_forms(a: &Sequence, b: &Sequence, family: &dyn WeightFamily, lo: i64, hi: i64) -> Result<IndexedFamily> {
    let (Some((alo, ahi)), Some((blo, bhi))) = (a.window(), b.window()) else {
        let members = (lo..=hi).map(|_| SampleFunction::Sequence(Sequence::zero())).collect();
        return Ok(IndexedFamily { first: lo, members });
    };
    let reach = (ahi - alo).max(bhi - blo) + (ahi - blo).abs().max((bhi - alo).abs()) + 1;
    let mut members: Vec<SampleFunction> = Vec::with_capacity((hi - lo + 1) as usize);
    let mut previous: Option<Vec<C64>> = None;
    for j in lo..=hi {
        let w = family.member(j)?;
        let window = w.window(-reach, reach);
        if previous.as_ref() == Some(&window) {
            let last = members.last().expect("a previous member exists").clone();
            members.push(last);
            continue;
        }
        members.push(SampleFunction::Sequence(weighted_biform_seq(a, b, w.as_ref())));
        previous = Some(window);
    }
    Ok(IndexedFamily { first: lo, members })
}

/// Left side of the `Z` bound for one pair of sequences, with `‖a‖₂‖b‖₂` as norm product.
pub fn sequence_oscillation(a: &Sequence, b: &Sequence, family: &dyn WeightFamily, breakpoints: &[i64]) -> Result<OscillationReport> {
    check_breakpoints(breakpoints)?;
    let forms = sequence_forms(a, b, family, breakpoints[0], breakpoints[breakpoints.len() - 1])?;
    let na = lp_norm(&SampleFunction::Sequence(a.clone()), 2.0)?;
    let nb = lp_norm(&SampleFunction::Sequence(b.clone()), 2.0)?;
    oscillation(&forms, breakpoints, OscillationVariant::LeftClosed, na * nb)
}

/// The fitted `Z`-side constant and the per-trial values it was taken from.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceConstantFit {
    pub zeta: f64,
    pub trial_constants: Vec<f64>,
}

/// Max fitted constant over `trials` random sequence pairs of length `1..=max_len`.
///
/// Even trials use `breakpoints`; odd trials draw their own breakpoints from `1..=u_R`.
/// Sign and complex-valued pairs alternate every two trials.
pub fn fit_sequence_constant<R: Rng + ?Sized>(
    family: &dyn WeightFamily,
    breakpoints: &[i64],
    trials: usize,
    max_len: usize,
    rng: &mut R,
) -> Result<SequenceConstantFit> {
    check_breakpoints(breakpoints)?;
    let top = breakpoints[breakpoints.len() - 1];
    let mut trial_constants = Vec::with_capacity(trials);
    for t in 0..trials {
        let la = rng.gen_range(1..=max_len);
        let lb = rng.gen_range(1..=max_len);
        let oa = rng.gen_range(-(max_len as i64)..=max_len as i64);
        let ob = rng.gen_range(-(max_len as i64)..=max_len as i64);
        let (a, b) = if (t / 2) % 2 == 0 {
            (random_sign_sequence(oa, la, rng), random_sign_sequence(ob, lb, rng))
        } else {
            (random_complex_sequence(oa, la, rng), random_complex_sequence(ob, lb, rng))
        };
        let bps = if t % 2 == 0 || top < 2 {
            breakpoints.to_vec()
        } else {
            let count = rng.gen_range(2..=breakpoints.len().max(2).min(top as usize));
            random_breakpoints(count, top, rng)?
        };
        trial_constants.push(sequence_oscillation(&a, &b, family, &bps)?.fitted_constant);
    }
    let zeta = trial_constants.iter().copied().fold(0.0, f64::max);
    Ok(SequenceConstantFit { zeta, trial_constants })
}

/// One transferred-bound experiment on a measure system.
pub struct TransferExperiment<'a> {
    pub system: FactoredIsometry,
    pub family: &'a dyn WeightFamily,
    pub breakpoints: Vec<i64>,
    pub f: SampleFunction,
    pub g: SampleFunction,
    /// `ζ_emp` from the `Z`-side trials of the same family.
    pub seq_constant: f64,
    /// Relative slack on the bound.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferReport {
    /// `‖Δ‖_{L^{1,∞}}`.
    pub transferred: f64,
    /// `ζ_emp R^{1/4} ‖f‖₂‖g‖₂`.
    pub bound: f64,
    pub space_report: OscillationReport,
    pub slack: f64,
}

impl TransferReport {
    pub fn holds(&self) -> bool {
        self.transferred <= self.bound * (1.0 + self.slack)
    }
}

/// Evaluates both sides; a transferred value above the slackened bound is `BoundViolated`.
pub fn transference_report(te: &TransferExperiment<'_>) -> Result<TransferReport> {
    if !(te.slack >= 0.0 && te.seq_constant >= 0.0) {
        return Err(Error::BadParameter("slack and sequence constant must be nonnegative".into()));
    }
    let delta = delta_statistic(&te.system, &te.f, &te.g, te.family, &te.breakpoints)?;
    let transferred = weak_l1_norm(&delta);
    let norm = lp_norm(&te.f, 2.0)? * lp_norm(&te.g, 2.0)?;
    let space_report = OscillationReport::new(te.breakpoints.clone(), transferred, norm, OscillationVariant::LeftClosed);
    let bound = te.seq_constant * (te.breakpoints.len() as f64).powf(0.25) * norm;
    Ok(TransferReport { transferred, bound, space_report, slack: te.slack })
}

pub fn transference_experiment(te: &TransferExperiment<'_>) -> Result<TransferReport> {
    let report = transference_report(te)?;
    if !report.holds() {
        return Err(Error::BoundViolated {
            what: format!("transferred oscillation ({})", te.family.describe()),
            lhs: report.transferred,
            rhs: report.bound * (1.0 + report.slack),
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::distribution;
    use crate::random::{random_isometry, random_sign_function, random_unit_function};
    use crate::systems::WeightedSpace;
    use crate::weights::{ConstantFamily, ExplicitFamily, HilbertDifferenceFamily, WeightSequence};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn conjugation_identity_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let u = random_isometry(8, &mut rng);
            let f = random_unit_function(u.space(), &mut rng);
            let g = random_unit_function(u.space(), &mut rng);
            let (n1, n2, k) = (rng.gen_range(-4..=4), rng.gen_range(-4..=4), rng.gen_range(-4..=4));
            assert!(conjugation_identity_check(&u, &f, &g, n1, n2, k).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn conjugation_identity_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_isometry(8, &mut rng);
        let f = random_unit_function(u.space(), &mut rng);
        assert_eq!(conjugation_identity_check(&u, &f, &f, 2, -3, 0).unwrap(), 0.0);
        let r = FactoredIsometry::rotation(8, 3);
        let h = random_unit_function(r.space(), &mut rng);
        assert_eq!(conjugation_identity_check(&r, &h, &h, 2, -3, 5).unwrap(), 0.0);
    }

    #[test]
    fn constant_family_delta_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_isometry(12, &mut rng);
        let f = random_sign_function(u.space(), &mut rng);
        let fam = ConstantFamily(WeightSequence::real(-1, &[0.3, 1.0, -2.0]));
        let d = delta_statistic(&u, &f, &f, &fam, &[1, 3, 7]).unwrap();
        assert!(d.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn identity_system_reduces_to_scalar_oscillation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = FactoredIsometry::identity(WeightedSpace::uniform(6));
        let f = random_unit_function(u.space(), &mut rng);
        let g = random_unit_function(u.space(), &mut rng);
        let members: Vec<WeightSequence> =
            (0..6).map(|_| WeightSequence::new(-2, (0..5).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.0)).collect())).collect();
        let sums: Vec<C64> = members.iter().map(|w| w.0.values.iter().sum()).collect();
        let fam = ExplicitFamily { first: 1, members };
        let bps = [1, 3, 6];
        let d = delta_statistic(&u, &f, &g, &fam, &bps).unwrap();
        let fv = f.values();
        let gv = g.values();
        for x in 0..6 {
            let mut acc = 0.0;
            for w in bps.windows(2) {
                let anchor = sums[(w[1] - 1) as usize];
                let sup = (w[0]..w[1]).map(|j| ((sums[(j - 1) as usize] - anchor) * fv[x] * gv[x]).norm()).fold(0.0, f64::max);
                acc += sup * sup;
            }
            assert!((d.values()[x].re - acc.sqrt()).abs() < 1e-13);
        }
    }

    #[test]
    fn single_block_delta_is_block_sup() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let u = random_isometry(10, &mut rng);
        let f = random_unit_function(u.space(), &mut rng);
        let fam = HilbertDifferenceFamily { big_m: 4, m: 2 };
        let d = delta_statistic(&u, &f, &f, &fam, &[2, 5]).unwrap();
        let forms = transferred_forms(&u, &f, &f, &fam, 2, 5).unwrap();
        let anchor = forms.get(5).unwrap().values().to_vec();
        for x in 0..10 {
            let sup = (2..5).map(|j| (forms.get(j).unwrap().values()[x] - anchor[x]).norm()).fold(0.0, f64::max);
            assert!((d.values()[x].re - sup).abs() < 1e-15);
        }
    }

    #[test]
    fn delta_distribution_invariant_under_automorphisms() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_isometry(30, &mut rng);
        let f = random_unit_function(u.space(), &mut rng);
        let g = random_unit_function(u.space(), &mut rng);
        let d = delta_statistic(&u, &f, &g, &HilbertDifferenceFamily { big_m: 4, m: 1 }, &[1, 2, 4]).unwrap();
        for k in -3..=3 {
            let p = isometry_power(&u, k);
            let moved = d.with_values(p.automorphism(d.values()));
            assert_eq!(distribution(&moved), distribution(&d));
        }
    }

    #[test]
    fn zero_input_transfers_to_zero() {
        let u = FactoredIsometry::rotation(11, 1);
        let zero = u.space().constant(C64::new(0.0, 0.0));
        let fam = HilbertDifferenceFamily { big_m: 4, m: 2 };
        let te = TransferExperiment { system: u, family: &fam, breakpoints: vec![1, 2, 4], f: zero.clone(), g: zero, seq_constant: 1.0, slack: 0.1 };
        assert_eq!(transference_experiment(&te).unwrap().transferred, 0.0);
    }

    #[test]
    fn sequence_form_reuse_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_sign_sequence(-3, 9, &mut rng);
        let b = random_sign_sequence(2, 7, &mut rng);
        let fam = HilbertDifferenceFamily { big_m: 4, m: 2 };
        let forms = sequence_forms(&a, &b, &fam, 1, 30).unwrap();
        for j in 1..=30 {
            let direct = weighted_biform_seq(&a, &b, fam.member(j).unwrap().as_ref());
            let got = forms.get(j).unwrap().as_sequence().unwrap();
            let (lo, hi) = direct.window().unwrap();
            for n in lo..=hi {
                assert!((got.get(n) - direct.get(n)).norm() == 0.0);
            }
        }
    }
}
