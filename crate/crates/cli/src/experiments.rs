//! The named experiments. Each trial draws from its own ChaCha stream of the run seed, so
//! trials may run in parallel while rows stay in trial order.

use ergodic_osc_core::averages::{bilinear_hilbert, maximal_ergodic, maximal_hilbert, weighted_biform_space_many};
use ergodic_osc_core::diagnostics::{bridge_report, cesaro_closed_form, flow_limit_probe, FlowSide};
use ergodic_osc_core::discretize::{block_differences, lambda_sequence, lemma3_check, probe_grid};
use ergodic_osc_core::kernels::{lacunary, sample_discrete_family};
use ergodic_osc_core::norms::{distribution, exponent_fit, lp_norm, square_function, weak_l1_norm, OscillationVariant};
use ergodic_osc_core::quadrature::Quadrature;
use ergodic_osc_core::random::{random_complex_function, random_isometry, random_sign_function, random_sign_sequence, random_unit_sup_function};
use ergodic_osc_core::systems::{isometry_power, FlowDomain};
use ergodic_osc_core::transfer::{conjugation_identity_check, fit_sequence_constant, transference_report, transferred_forms, TransferExperiment};
use ergodic_osc_core::weights::{HilbertDifferenceFamily, WeightFamily, Weights};
use ergodic_osc_core::{averages::hilbert_flow, DilationFamily, FactoredIsometry, FlowFunction, Grid, SampleFunction, TranslationFlow, TrigPoly, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, EXPERIMENTS};
use crate::error::{CliError, CliResult};
use crate::output::{fingerprint, ResultRow};

/// Rows in emission order plus the number of bound or tolerance violations among them.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub rows: Vec<ResultRow>,
    pub violations: usize,
}

/// Independent stream `stream` of the run seed.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

struct Sink {
    experiment: String,
    fingerprint: String,
    rows: Vec<ResultRow>,
    violations: usize,
}

impl Sink {
    fn push(&mut self, param: impl Into<String>, metric: &str, value: f64) {
        self.rows.push(ResultRow {
            experiment: self.experiment.clone(),
            param: param.into(),
            metric: metric.into(),
            value,
            fingerprint: self.fingerprint.clone(),
        });
    }

    /// Pushes the value and counts a violation when `ok` is false.
    fn check(&mut self, param: impl Into<String>, metric: &str, value: f64, ok: bool) {
        self.push(param, metric, value);
        if !ok {
            self.violations += 1;
        }
    }
}

pub fn run(cfg: &ExperimentConfig) -> CliResult<RunOutcome> {
    if !EXPERIMENTS.contains(&cfg.experiment.as_str()) {
        return Err(CliError::UnknownExperiment(cfg.experiment.clone()));
    }
    let mut sink = Sink { experiment: cfg.experiment.clone(), fingerprint: fingerprint(&cfg.raw.canonical()), rows: Vec::new(), violations: 0 };
    match cfg.experiment.as_str() {
        "identity-suite" => identity_suite(cfg, &mut sink)?,
        "lemma3-suite" => lemma3_suite(cfg, &mut sink)?,
        "oscillation-scaling" => oscillation_scaling(cfg, &mut sink)?,
        "transference" => transference(cfg, &mut sink)?,
        "maximal-ratio" => maximal_ratio(cfg, &mut sink)?,
        "bridge" => bridge(cfg, &mut sink)?,
        "flow-limits" => flow_limits(cfg, &mut sink)?,
        "hilbert-decomposition" => hilbert_decomposition(cfg, &mut sink)?,
        _ => unreachable!("checked against EXPERIMENTS"),
    }
    Ok(RunOutcome { rows: sink.rows, violations: sink.violations })
}

fn ladder_or(cfg: &ExperimentConfig, default: &[f64]) -> Vec<f64> {
    if cfg.ladder.is_empty() {
        default.to_vec()
    } else {
        cfg.ladder.clone()
    }
}

fn family_for(cfg: &ExperimentConfig) -> Box<dyn WeightFamily> {
    match cfg.kernel.hilbert_order() {
        Some(big_m) => Box::new(HilbertDifferenceFamily { big_m, m: cfg.m }),
        None => Box::new(DilationFamily { base: cfg.kernel.clone(), m: cfg.m }),
    }
}

fn sup_dev(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Member 0 is the configured system; the rest are random isometries of the same size.
fn corpus_system(cfg: &ExperimentConfig, i: usize, rng: &mut ChaCha8Rng) -> CliResult<FactoredIsometry> {
    if i == 0 {
        cfg.system.build(rng)
    } else {
        Ok(random_isometry(cfg.system.size(), rng))
    }
}

#[derive(Default)]
struct IdentityDeviations {
    group_law: f64,
    cocycle: f64,
    norm: f64,
    distribution: f64,
    conjugation: f64,
    decomposition: f64,
}

fn identity_trial(cfg: &ExperimentConfig, i: usize) -> CliResult<IdentityDeviations> {
    let mut rng = trial_rng(cfg.seed, i as u64);
    let u = corpus_system(cfg, i, &mut rng)?;
    let f = random_complex_function(u.space(), &mut rng);
    let g = random_complex_function(u.space(), &mut rng);
    let mut d = IdentityDeviations::default();
    let powers: Vec<_> = (-16..=16).map(|j| isometry_power(&u, j)).collect();
    let power = |j: i64| &powers[(j + 16) as usize];
    for j in -8..=8i64 {
        for k in -8..=8i64 {
            let c = power(j).compose(power(k));
            d.group_law = d.group_law.max(if c.permutation == power(j + k).permutation { 0.0 } else { f64::INFINITY });
            d.cocycle = d.cocycle.max(sup_dev(&c.multiplier, &power(j + k).multiplier));
        }
        let moved = power(j).apply_values(f.values());
        for p in [1.0, 2.0, f64::INFINITY] {
            let (a, b) = (lp_norm(&f, p)?, lp_norm(&f.with_values(moved.clone()), p)?);
            d.norm = d.norm.max((a - b).abs());
        }
        let auto = f.with_values(power(j).automorphism(f.values()));
        if distribution(&auto) != distribution(&f) {
            d.distribution = f64::INFINITY;
        }
    }
    for _ in 0..20 {
        let (n1, n2, k) = (rng.gen_range(-4..=4), rng.gen_range(-4..=4), rng.gen_range(-4..=4));
        d.conjugation = d.conjugation.max(conjugation_identity_check(&u, &f, &g, n1, n2, k)?);
    }
    for big_m in [2u32, 4] {
        for m in [1u32, 2] {
            let n = rng.gen_range(1..=8);
            d.decomposition = d.decomposition.max(decomposition_deviation(&u, &f, &g, big_m, m, n)?.0);
        }
    }
    Ok(d)
}

/// `(sup|𝔇-form − (𝔸-form − H_d)|, sup|𝔸-form|)`.
fn decomposition_deviation(u: &FactoredIsometry, f: &SampleFunction, g: &SampleFunction, big_m: u32, m: u32, n: i64) -> CliResult<(f64, f64)> {
    let (a, _, d) = sample_discrete_family(big_m, m, n)?;
    let forms = weighted_biform_space_many(u, f, g, &[&a as &dyn Weights, &d])?;
    let h = bilinear_hilbert(u, f, g, lacunary(m, n))?;
    let rhs: Vec<C64> = forms[0].values().iter().zip(h.values()).map(|(x, y)| x - y).collect();
    let flank = forms[0].values().iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok((sup_dev(forms[1].values(), &rhs), flank))
}

fn identity_suite(cfg: &ExperimentConfig, sink: &mut Sink) -> CliResult<()> {
    let tol = cfg.tolerances.deviation;
    let results = (0..cfg.trials.count).into_par_iter().map(|i| identity_trial(cfg, i)).collect::<CliResult<Vec<_>>>()?;
    sink.push("", "tolerance", tol);
    for (i, d) in results.iter().enumerate() {
        let param = format!("system={i};size={}", cfg.system.size());
        sink.check(param.clone(), "group_law_max_dev", d.group_law, d.group_law <= tol);
        sink.check(param.clone(), "cocycle_max_dev", d.cocycle, d.cocycle <= tol);
        sink.check(param.clone(), "norm_preservation_max_dev", d.norm, d.norm <= tol * 1e3);
        sink.check(param.clone(), "distribution_mismatch", d.distribution, d.distribution == 0.0);
        sink.check(param.clone(), "conjugation_max_dev", d.conjugation, d.conjugation <= tol);
        sink.check(param, "decomposition_max_dev", d.decomposition, d.decomposition <= tol);
    }
    Ok(())
}

/// Λ and β come from different scan resolutions of the same derivative sup.
pub const TAIL_REL_TOL: f64 = 1e-6;

struct Lemma3Trial {
    violation: f64,
    lhs: f64,
    support_excess: f64,
    tail_excess: f64,
}

fn lemma3_trial(cfg: &ExperimentConfig, t: usize, quad: &Quadrature) -> CliResult<Lemma3Trial> {
    let mut rng = trial_rng(cfg.seed, t as u64);
    let lo = rng.gen_range(0..=4i64);
    let hi = lo + rng.gen_range(1..=3i64);
    let bps = [lo, hi];
    let family = block_differences(&cfg.kernel, cfg.m, &bps, 1)?;
    let a = random_sign_sequence(rng.gen_range(-8..=8), rng.gen_range(1..=32), &mut rng);
    let b = random_sign_sequence(rng.gen_range(-8..=8), rng.gen_range(1..=32), &mut rng);
    let (alo, ahi) = a.window().expect("nonempty");
    let (blo, bhi) = b.window().expect("nonempty");
    let probes = probe_grid((alo + blo).div_euclid(2) - 1, (ahi + bhi).div_euclid(2) + 1);
    let report = lemma3_check(&family, &a, &b, &probes, quad)?;
    // Λ support and tail bounds.
    let lambda = lambda_sequence(&cfg.kernel, cfg.m, &bps, 1)?;
    let alpha = cfg.kernel.support_radius().unwrap_or(f64::INFINITY);
    let beta = cfg.kernel.derivative_sup();
    let d_top = lacunary(cfg.m, hi);
    let mut support_excess = 0.0f64;
    let mut tail_excess = 0.0f64;
    if let Some((l0, l1)) = lambda.values.window() {
        for n in l0..=l1 {
            let v = lambda.values.get(n).re;
            if v != 0.0 && (n.abs() as f64) > alpha * d_top + 0.25 {
                support_excess = support_excess.max(v);
            }
            for s in lo..hi {
                let ds = lacunary(cfg.m, s);
                if (n.abs() as f64) >= alpha * ds + 0.25 {
                    let bound = beta * (ds.powi(-2) + d_top.powi(-2)) * (1.0 + TAIL_REL_TOL);
                    tail_excess = tail_excess.max(v - bound);
                }
            }
        }
    }
    Ok(Lemma3Trial { violation: report.max_violation, lhs: report.max_lhs, support_excess, tail_excess })
}

fn lemma3_suite(cfg: &ExperimentConfig, sink: &mut Sink) -> CliResult<()> {
    if cfg.kernel.support_radius().is_none() {
        return Err(CliError::ConfigInvalid("lemma3-suite needs a compactly supported kernel".into()));
    }
    let quad = Quadrature::with_tolerance(cfg.tolerances.quadrature);
    let results = (0..cfg.trials.count).into_par_iter().map(|t| lemma3_trial(cfg, t, &quad)).collect::<CliResult<Vec<_>>>()?;
    let kernel = format!("kernel={};m={}", cfg.kernel, cfg.m);
    sink.push(kernel.clone(), "tolerance", cfg.tolerances.lemma3);
    for (t, r) in results.iter().enumerate() {
        let param = format!("{kernel};trial={t}");
        sink.check(param.clone(), "max_violation", r.violation, r.violation <= cfg.tolerances.lemma3);
        sink.push(param.clone(), "max_lhs", r.lhs);
        sink.check(param.clone(), "lambda_support_excess", r.support_excess, r.support_excess == 0.0);
        sink.check(param, "lambda_tail_excess", r.tail_excess, r.tail_excess <= 0.0);
    }
    Ok(())
}

fn oscillation_scaling(cfg: &ExperimentConfig, sink: &mut Sink) -> CliResult<()> {
    let mut rng = trial_rng(cfg.seed, 0);
    let u = cfg.system.build(&mut rng)?;
    let f = random_sign_function(u.space(), &mut rng);
    let g = random_sign_function(u.space(), &mut rng);
    let family = family_for(cfg);
    let rs: Vec<usize> = ladder_or(cfg, &[4.0, 8.0, 16.0, 32.0, 64.0]).iter().map(|&r| r as usize).collect();
    let sets = rs.iter().map(|&r| cfg.scheme.generate(r)).collect::<CliResult<Vec<_>>>()?;
    let lo = sets.iter().map(|s| s[0]).min().expect("nonempty ladder");
    let hi = sets.iter().map(|s| s[s.len() - 1]).max().expect("nonempty ladder");
    let forms = transferred_forms(&u, &f, &g, family.as_ref(), lo, hi)?;
    let norm = lp_norm(&f, 2.0)? * lp_norm(&g, 2.0)?;
    let base = format!("family={};size={}", family.describe(), u.space().len());
    let mut pts = Vec::new();
    for (r, bps) in rs.iter().zip(&sets) {
        let osc = weak_l1_norm(&square_function(&forms, bps, OscillationVariant::LeftClosed)?);
        let param = format!("{base};R={r}");
        sink.push(param.clone(), "osc_value", osc);
        sink.push(param, "fitted_constant", osc / (norm * (*r as f64).powf(0.25)));
        pts.push((*r as f64, osc));
    }
    let slope = exponent_fit(&pts, norm)?;
    sink.push(base.clone(), "tolerance", cfg.tolerances.slope);
    sink.check(base, "fitted_slope", slope, slope <= cfg.tolerances.slope);
    Ok(())
}

fn transference(cfg: &ExperimentConfig, sink: &mut Sink) -> CliResult<()> {
    let family = family_for(cfg);
    let bps = cfg.breakpoints()?;
    let mut rng = trial_rng(cfg.seed, 0);
    let fit = fit_sequence_constant(family.as_ref(), &bps, cfg.trials.seq_trials, cfg.trials.max_len, &mut rng)?;
    let base = format!("family={};R={}", family.describe(), bps.len());
    sink.push(base.clone(), "tolerance", cfg.tolerances.slack);
    sink.push(format!("{base};trials={}", cfg.trials.seq_trials), "zeta_emp", fit.zeta);
    let reports = (0..cfg.trials.count)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, 1 + t as u64);
            let u = cfg.system.build(&mut rng)?;
            let f = random_sign_function(u.space(), &mut rng);
            let g = random_sign_function(u.space(), &mut rng);
            let te = TransferExperiment { system: u, family: family.as_ref(), breakpoints: bps.clone(), f, g, seq_constant: fit.zeta, slack: cfg.tolerances.slack };
            Ok(transference_report(&te)?)
        })
        .collect::<CliResult<Vec<_>>>()?;
    for (t, r) in reports.iter().enumerate() {
        let param = format!("{base};trial={t}");
        sink.push(param.clone(), "transferred", r.transferred);
        sink.push(param.clone(), "bound", r.bound);
        sink.check(param, "ratio", r.transferred / r.bound, r.holds());
    }
    Ok(())
}

fn maximal_ratio(cfg: &ExperimentConfig, sink: &mut Sink) -> CliResult<()> {
    let sizes: Vec<usize> = ladder_or(cfg, &[64.0, 128.0, 256.0]).iter().map(|&s| s as usize).collect();
    let mut maxima = Vec::new();
    for (si, &n) in sizes.iter().enumerate() {
        let ratios = (0..cfg.trials.count)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(cfg.seed, (si * cfg.trials.count + t) as u64);
                let u = random_isometry(n, &mut rng);
                let f = random_complex_function(u.space(), &mut rng);
                let g = random_complex_function(u.space(), &mut rng);
                let norm = lp_norm(&f, cfg.p1)? * lp_norm(&g, cfg.p2)?;
                let me = lp_norm(&maximal_ergodic(&u, &f, &g, n)?.values, cfg.p3)? / norm;
                let mh = lp_norm(&maximal_hilbert(&u, &f, &g, n)?.values, cfg.p3)? / norm;
                Ok((me, mh))
            })
            .collect::<CliResult<Vec<_>>>()?;
        let me = ratios.iter().map(|r| r.0).fold(0.0, f64::max);
        let mh = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
        let param = format!("size={n};J={n};p1={};p2={};p3={}", cfg.p1, cfg.p2, cfg.p3);
        sink.check(param.clone(), "max_ratio_ergodic", me, me.is_finite());
        sink.check(param, "max_ratio_hilbert", mh, mh.is_finite());
        maxima.push((me, mh));
    }
    let spread = |sel: fn(&(f64, f64)) -> f64| {
        let hi = maxima.iter().map(sel).fold(0.0, f64::max);
        let lo = maxima.iter().map(sel).fold(f64::INFINITY, f64::min);
        hi / lo
    };
    let (se, sh) = (spread(|r| r.0), spread(|r| r.1));
    sink.push("", "tolerance", cfg.tolerances.spread);
    sink.check("operator=ergodic", "size_spread", se, se < cfg.tolerances.spread);
    sink.check("operator=hilbert", "size_spread", sh, sh < cfg.tolerances.spread);
    Ok(())
}

fn bridge(cfg: &ExperimentConfig, sink: &mut Sink) -> CliResult<()> {
    let ms: Vec<u32> = ladder_or(cfg, &[1.0, 2.0, 4.0]).iter().map(|&m| m as u32).collect();
    let k_max = cfg.raw.get("trials", "k_max").and_then(|v| v.parse().ok()).unwrap_or(64u64);
    sink.push(format!("k_max={k_max}"), "tolerance", ergodic_osc_core::diagnostics::BRIDGE_SLACK);
    for (mi, &m) in ms.iter().enumerate() {
        let excess = (0..cfg.trials.count)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(cfg.seed, (mi * cfg.trials.count + t) as u64);
                let u = cfg.system.build(&mut rng)?;
                let f = random_unit_sup_function(u.space(), &mut rng);
                let g = random_unit_sup_function(u.space(), &mut rng);
                let r = bridge_report(&u, &f, &g, m, k_max)?;
                Ok((r.max_excess, r.holds()))
            })
            .collect::<CliResult<Vec<_>>>()?;
        let worst = excess.iter().map(|e| e.0).fold(0.0, f64::max);
        let failures = excess.iter().filter(|e| !e.1).count();
        let param = format!("m={m};k_max={k_max};trials={}", cfg.trials.count);
        sink.push(param.clone(), "max_excess", worst);
        sink.check(param, "violating_trials", failures as f64, failures == 0);
    }
    Ok(())
}

fn flow_limits(cfg: &ExperimentConfig, sink: &mut Sink) -> CliResult<()> {
    let nodes = cfg.raw.get("flow", "nodes").and_then(|v| v.parse().ok()).unwrap_or(8usize);
    let rate = cfg.raw.get("flow", "rate").and_then(|v| v.parse().ok()).unwrap_or(1.0f64);
    let parse_ladder = |key: &str, default: &[f64]| -> Vec<f64> {
        cfg.raw.get("flow", key).map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect()).unwrap_or_else(|| default.to_vec())
    };
    let to_inf = parse_ladder("infinity_ladder", &[10.5, 100.5, 1000.5, 20000.5]);
    let to_zero = parse_ladder("zero_ladder", &[1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]);
    let eps = cfg.raw.get("flow", "eps").and_then(|v| v.parse().ok()).unwrap_or(1e-6f64);
    let upper = cfg.raw.get("flow", "upper").and_then(|v| v.parse().ok()).unwrap_or(1e4f64);
    let tol = cfg.tolerances.flow;
    let quad = Quadrature::with_tolerance(cfg.tolerances.quadrature);
    let flow = TranslationFlow::new(FlowDomain::Circle, Grid::midpoint(0.0, 1.0, nodes)?, rate)?;
    let one = TrigPoly::constant(C64::new(1.0, 0.0));
    let (e1, em1) = (TrigPoly::character(1), TrigPoly::character(-1));
    let mut rng = trial_rng(cfg.seed, 0);
    let mut random_poly = || TrigPoly::new((-2..=2).map(|k| (k, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).collect());
    let pairs = [("one,one", one.clone(), one), ("e1,e-1", e1.clone(), em1), ("e1,e1", e1.clone(), e1.clone()), ("random,random", random_poly(), random_poly())];
    sink.push(format!("nodes={nodes};rate={rate}"), "tolerance", tol);
    for (name, f, g) in &pairs {
        for (side, ladder) in [(FlowSide::ToInfinity, &to_inf), (FlowSide::ToZero, &to_zero)] {
            let report = flow_limit_probe(&flow, f, g, side, ladder, &quad)?;
            let side_name = if side == FlowSide::ToInfinity { "infinity" } else { "zero" };
            for ((r, dev), v) in ladder.iter().zip(&report.deviations).zip(&report.values) {
                let closed = flow.grid.nodes().iter().zip(v.values()).map(|(x, z)| (z - cesaro_closed_form(f, g, rate, *r, *x)).norm()).fold(0.0, f64::max);
                let param = format!("pair={name};side={side_name};r={r:e}");
                sink.push(param.clone(), "limit_deviation", *dev);
                sink.check(param, "closed_form_deviation", closed, closed <= tol);
            }
            let last = *report.deviations.last().expect("nonempty ladder");
            sink.check(format!("pair={name};side={side_name}"), "final_limit_deviation", last, last <= tol);
            sink.push(format!("pair={name};side={side_name}"), "holder_ratio", report.holder_ratio);
        }
    }
    let h = hilbert_flow(&flow, &FlowFunction::Trig(e1.clone()), &FlowFunction::Trig(TrigPoly::character(-1)), eps, upper, &quad)?;
    let target = C64::new(0.0, std::f64::consts::PI * rate.signum());
    let dev = h.values().iter().map(|z| (z - target).norm()).fold(0.0, f64::max);
    sink.check(format!("pair=e1,e-1;eps={eps:e};upper={upper:e}"), "hilbert_pv_deviation", dev, dev <= tol);
    Ok(())
}

fn hilbert_decomposition(cfg: &ExperimentConfig, sink: &mut Sink) -> CliResult<()> {
    let tol = cfg.tolerances.deviation;
    let rows = (0..cfg.trials.count)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, t as u64);
            let u = corpus_system(cfg, t, &mut rng)?;
            let f = random_unit_sup_function(u.space(), &mut rng);
            let g = random_unit_sup_function(u.space(), &mut rng);
            let mut out = Vec::new();
            for big_m in [2u32, 4] {
                for m in [1u32, 2] {
                    let mut dev = 0.0f64;
                    let mut flank = 0.0f64;
                    for n in 1..=8i64 {
                        let (d, a) = decomposition_deviation(&u, &f, &g, big_m, m, n)?;
                        dev = dev.max(d);
                        flank = flank.max(a / (4.0 * (1.0 / big_m as f64 + lacunary(m, -n))));
                    }
                    out.push((big_m, m, dev, flank));
                }
            }
            Ok(out)
        })
        .collect::<CliResult<Vec<_>>>()?;
    sink.push("", "tolerance", tol);
    for (t, trial) in rows.iter().enumerate() {
        for &(big_m, m, dev, flank) in trial {
            let param = format!("system={t};M={big_m};m={m};n=1..8");
            sink.check(param.clone(), "identity_max_dev", dev, dev <= tol);
            sink.check(param, "flank_ratio", flank, flank <= 1.0);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ergodic_osc_core::random::random_breakpoints;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    #[test]
    fn unknown_experiment() {
        let c = cfg("experiment = nope\n[system]\nkind = identity\nsize = 3\n");
        assert!(matches!(run(&c), Err(CliError::UnknownExperiment(_))));
    }

    #[test]
    fn identity_suite_small_corpus() {
        let c = cfg("experiment = identity-suite\nseed = 1\n[system]\nkind = random\nsize = 24\n[trials]\ncount = 3\n");
        let out = run(&c).unwrap();
        assert_eq!(out.violations, 0, "{:?}", out.rows);
        assert!(out.rows.iter().any(|r| r.metric == "tolerance"));
    }

    #[test]
    fn decomposition_rows() {
        let c = cfg("experiment = hilbert-decomposition\nseed = 2\n[system]\nkind = random\nsize = 16\n[trials]\ncount = 2\n");
        let out = run(&c).unwrap();
        assert_eq!(out.violations, 0);
        assert_eq!(out.rows.len(), 1 + 2 * 4 * 2);
    }

    #[test]
    fn identical_runs_match() {
        let c = cfg("experiment = bridge\nseed = 5\n[system]\nkind = random\nsize = 12\n[trials]\ncount = 2\nk_max = 10\n");
        assert_eq!(run(&c).unwrap(), run(&c).unwrap());
    }

    #[test]
    fn lemma3_suite_needs_compact_kernel() {
        let c = cfg("experiment = lemma3-suite\n[system]\nkind = identity\nsize = 1\n[kernel]\nspec = hilbert(4)\n");
        assert!(matches!(run(&c), Err(CliError::ConfigInvalid(_))));
    }

    #[test]
    fn random_breakpoints_are_sorted() {
        let mut r = trial_rng(1, 2);
        let b = random_breakpoints(5, 50, &mut r).unwrap();
        assert!(b.windows(2).all(|w| w[0] < w[1]));
    }
}
