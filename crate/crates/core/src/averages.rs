//! Bilinear averages: ergodic, Hilbert, weighted forms on `Z` and on systems, real-line
//! convolutions, maximal operators and flow averages.

use crate::functions::{FlowFunction, PiecewiseConstant, SampleFunction, Sequence};
use crate::kernels::{lacunary, DiscreteKernel, KernelSpec};
use crate::quadrature::Quadrature;
use crate::systems::{isometry_power, FactoredIsometry, FlowDomain, TranslationFlow};
use crate::weights::{UniformWeights, Weights};
use crate::{Error, Result, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Largest permutation order probed when deciding whether to fold a sum by the period.
pub const PERIOD_CAP: u64 = 1 << 16;

/// Longest direct orbit walk accepted when no period folds the sum.
pub const WALK_CAP: u64 = 1 << 32;

/// `Σ_n (Uⁿf)(U⁻ⁿg) w(n)` for several weights sharing one orbit walk.
///
/// When `U` has a period `P` not exceeding the common support span, every weight is folded
/// modulo `P` and only `P` orbit products are formed.
pub fn weighted_biform_space_many(
    u: &FactoredIsometry,
    f: &SampleFunction,
    g: &SampleFunction,
    weights: &[&dyn Weights],
) -> Result<Vec<SampleFunction>> {
    let fv = f.space_values(u.space().weights())?;
    let gv = g.space_values(u.space().weights())?;
    let n = fv.len();
    let supports: Vec<_> = weights.iter().filter_map(|w| w.support()).collect();
    let mut out = vec![vec![ZERO; n]; weights.len()];
    if supports.is_empty() || n == 0 {
        return Ok(out.into_iter().map(|v| f.with_values(v)).collect());
    }
    let lo = supports.iter().map(|s| s.0).min().unwrap_or(0);
    let hi = supports.iter().map(|s| s.1).max().unwrap_or(0);
    let span = (hi as i128 - lo as i128 + 1).min(u64::MAX as i128) as u64;
    let period = if span >= 2 { u.period(span.min(PERIOD_CAP)) } else { None };
    if period.is_none() && span > WALK_CAP {
        return Err(Error::BadParameter(format!("weight support of {span} terms is too long for an aperiodic orbit walk")));
    }
    if let Some(p) = period {
        let folds: Vec<Vec<C64>> = weights.iter().map(|w| w.fold(p)).collect();
        let mut fr = fv.to_vec();
        let mut gr = gv.to_vec();
        for r in 0..p {
            for (acc, fold) in out.iter_mut().zip(&folds) {
                let w = fold[r];
                if w != ZERO {
                    for x in 0..n {
                        acc[x] += fr[x] * gr[x] * w;
                    }
                }
            }
            fr = u.apply(&fr);
            gr = u.apply_inverse(&gr);
        }
    } else {
        let mut fr = isometry_power(u, lo).apply_values(fv);
        let mut gr = isometry_power(u, -lo).apply_values(gv);
        for k in lo..=hi {
            for ((acc, w), s) in out.iter_mut().zip(weights).zip(&supports) {
                if k < s.0 || k > s.1 {
                    continue;
                }
                let wk = w.weight(k);
                if wk != ZERO {
                    for x in 0..n {
                        acc[x] += fr[x] * gr[x] * wk;
                    }
                }
            }
            if k < hi {
                fr = u.apply(&fr);
                gr = u.apply_inverse(&gr);
            }
        }
    }
    Ok(out.into_iter().map(|v| f.with_values(v)).collect())
}

/// `Σ_n (Uⁿf)(U⁻ⁿg) w(n)` pointwise.
pub fn weighted_biform_space(u: &FactoredIsometry, f: &SampleFunction, g: &SampleFunction, w: &dyn Weights) -> Result<SampleFunction> {
    Ok(weighted_biform_space_many(u, f, g, &[w])?.remove(0))
}

fn check_r(r: f64) -> Result<i64> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::BadParameter(format!("average length {r} must be a finite real ≥ 1")));
    }
    Ok(r.floor() as i64)
}

/// `A_r = (1/⌊r⌋) Σ_{n=0}^{⌊r⌋-1} (Uⁿf)(U⁻ⁿg)`.
pub fn bilinear_ergodic(u: &FactoredIsometry, f: &SampleFunction, g: &SampleFunction, r: f64) -> Result<SampleFunction> {
    let k = check_r(r)?;
    weighted_biform_space(u, f, g, &UniformWeights { lo: 0, hi: k - 1, denominator: k as f64 })
}

/// `H_r = Σ_{0<|n|≤⌊r⌋} (Uⁿf)(U⁻ⁿg)/n`.
pub fn bilinear_hilbert(u: &FactoredIsometry, f: &SampleFunction, g: &SampleFunction, r: f64) -> Result<SampleFunction> {
    check_r(r)?;
    weighted_biform_space(u, f, g, &DiscreteKernel::truncated_hilbert(r))
}

/// `Ã = 2^{-j/m} Σ_{n=0}^{⌊2^{j/m}⌋-1} (Uⁿf)(U⁻ⁿg)`.
pub fn dyadic_ergodic(u: &FactoredIsometry, f: &SampleFunction, g: &SampleFunction, j: i64, m: u32) -> Result<SampleFunction> {
    if j < 0 || m < 1 {
        return Err(Error::BadParameter("dyadic average needs j ≥ 0 and m ≥ 1".into()));
    }
    let d = lacunary(m, j);
    weighted_biform_space(u, f, g, &UniformWeights { lo: 0, hi: d.floor() as i64 - 1, denominator: d })
}

/// `(𝔖_w(a,b))(n) = Σ_k a_{n+k} b_{n-k} w_k`.
pub fn weighted_biform_seq(a: &Sequence, b: &Sequence, w: &dyn Weights) -> Sequence {
    let (Some((alo, ahi)), Some((blo, bhi)), Some((wlo, whi))) = (a.window(), b.window(), w.support()) else {
        return Sequence::zero();
    };
    // Both a_{n+k} and b_{n-k} are stored only when n lies in the half-sum window.
    let nlo = (alo + blo).div_euclid(2);
    let nhi = (ahi + bhi + 1).div_euclid(2);
    let klo = wlo.max(alo - nhi).max(blo.min(nlo) - bhi);
    let khi = whi.min(ahi - nlo).min(nhi - blo);
    if klo > khi {
        return Sequence::new(nlo, vec![ZERO; (nhi - nlo + 1) as usize]).trimmed();
    }
    let wv = w.window(klo, khi);
    let mut out = Vec::with_capacity((nhi - nlo + 1) as usize);
    for n in nlo..=nhi {
        let lo = klo.max(alo - n).max(n - bhi);
        let hi = khi.min(ahi - n).min(n - blo);
        let mut acc = ZERO;
        for k in lo..=hi {
            let wk = wv[(k - klo) as usize];
            acc += a.values[(n + k - alo) as usize] * b.values[(n - k - blo) as usize] * wk;
        }
        out.push(acc);
    }
    Sequence::new(nlo, out)
}

/// Values of a real-line form with the accumulated quadrature error.
#[derive(Debug, Clone, PartialEq)]
pub struct RealLineValues {
    pub values: Vec<C64>,
    pub error: f64,
}

/// `S_K(F,G)(x) = ∫ F(x+y) G(x-y) K(y) dy` at each `x`, for zero-extended line functions.
pub fn biform_realline(
    f: &PiecewiseConstant,
    g: &PiecewiseConstant,
    kernel: &KernelSpec,
    xs: &[f64],
    quad: &Quadrature,
) -> Result<RealLineValues> {
    biform_realline_with(f, g, |y| kernel.eval(y), kernel.support_radius(), &kernel.knots(), xs, quad)
}

/// [`biform_realline`] for an arbitrary kernel closure with optional support radius and knots.
pub fn biform_realline_with(
    f: &PiecewiseConstant,
    g: &PiecewiseConstant,
    kernel: impl Fn(f64) -> f64,
    radius: Option<f64>,
    knots: &[f64],
    xs: &[f64],
    quad: &Quadrature,
) -> Result<RealLineValues> {
    if f.is_periodic() || g.is_periodic() || !f.is_zero_extended() || !g.is_zero_extended() {
        return Err(Error::DomainMismatch("real-line forms need zero-extended line functions".into()));
    }
    let (fa, fb) = f.window();
    let (ga, gb) = g.window();
    let mut values = Vec::with_capacity(xs.len());
    let mut error = 0.0;
    for &x in xs {
        let mut lo = (fa - x).max(x - gb);
        let mut hi = (fb - x).min(x - ga);
        if let Some(r) = radius {
            lo = lo.max(-r);
            hi = hi.min(r);
        }
        if lo >= hi {
            values.push(ZERO);
            continue;
        }
        let mut breaks: Vec<f64> = f.breaks().iter().map(|b| b - x).collect();
        breaks.extend(g.breaks().iter().map(|b| x - b));
        breaks.extend_from_slice(knots);
        let integrand = |y: f64| {
            let k = kernel(y);
            if k == 0.0 {
                return ZERO;
            }
            f.eval(x + y).unwrap_or(ZERO) * g.eval(x - y).unwrap_or(ZERO) * k
        };
        let q = quad.integrate(integrand, lo, hi, &breaks)?;
        values.push(q.value);
        error += q.error;
    }
    Ok(RealLineValues { values, error })
}

/// Truncated maximal operator with the largest index at which the sup still grew.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalResult {
    pub values: SampleFunction,
    pub last_increase: usize,
}

/// `sup_{1≤j≤J} (2j+1)⁻¹ Σ_{|n|≤j} |Uⁿf||U⁻ⁿg|`.
pub fn maximal_ergodic(u: &FactoredIsometry, f: &SampleFunction, g: &SampleFunction, big_j: usize) -> Result<MaximalResult> {
    maximal_walk(u, f, g, big_j, |acc, fp, gm, fm, gp, j| {
        for x in 0..acc.len() {
            acc[x] += fp[x].norm() * gm[x].norm() + fm[x].norm() * gp[x].norm();
        }
        let _ = j;
    }, |s, j| s.re / (2 * j + 1) as f64, true)
}

/// `sup_{1≤j≤J} |H_j|`.
pub fn maximal_hilbert(u: &FactoredIsometry, f: &SampleFunction, g: &SampleFunction, big_j: usize) -> Result<MaximalResult> {
    maximal_walk(u, f, g, big_j, |acc, fp, gm, fm, gp, j| {
        let inv = 1.0 / j as f64;
        for x in 0..acc.len() {
            acc[x] += (fp[x] * gm[x] - fm[x] * gp[x]) * inv;
        }
    }, |s, _| s.norm(), false)
}

#[allow(clippy::type_complexity)]
fn maximal_walk(
    u: &FactoredIsometry,
    f: &SampleFunction,
    g: &SampleFunction,
    big_j: usize,
    step: impl Fn(&mut [C64], &[C64], &[C64], &[C64], &[C64], usize),
    score: impl Fn(C64, usize) -> f64,
    include_center: bool,
) -> Result<MaximalResult> {
    if big_j < 1 {
        return Err(Error::BadParameter("maximal truncation J must be ≥ 1".into()));
    }
    let fv = f.space_values(u.space().weights())?;
    let gv = g.space_values(u.space().weights())?;
    let n = fv.len();
    let mut acc: Vec<C64> = if include_center {
        fv.iter().zip(gv).map(|(a, b)| C64::new(a.norm() * b.norm(), 0.0)).collect()
    } else {
        vec![ZERO; n]
    };
    let (mut fp, mut fm, mut gp, mut gm) = (fv.to_vec(), fv.to_vec(), gv.to_vec(), gv.to_vec());
    let mut best = vec![f64::NEG_INFINITY; n];
    let mut last = 0;
    for j in 1..=big_j {
        fp = u.apply(&fp);
        fm = u.apply_inverse(&fm);
        gp = u.apply(&gp);
        gm = u.apply_inverse(&gm);
        step(&mut acc, &fp, &gm, &fm, &gp, j);
        for x in 0..n {
            let v = score(acc[x], j);
            if v > best[x] {
                if j > 1 {
                    last = j;
                }
                best[x] = v;
            }
        }
    }
    let values = best.into_iter().map(|v| C64::new(v.max(0.0), 0.0)).collect();
    Ok(MaximalResult { values: f.with_values(values), last_increase: last.max(1) })
}

fn flow_products(flow: &TranslationFlow, f: &FlowFunction, g: &FlowFunction) -> Result<()> {
    flow.admits(f)?;
    flow.admits(g)?;
    Ok(())
}

/// Largest useful panel width for `t ↦ f(x+ρt) g(x-ρt)`.
fn flow_panel(f: &FlowFunction, g: &FlowFunction, rate: f64, quad: &Quadrature) -> f64 {
    let freq = |h: &FlowFunction| match h {
        FlowFunction::Trig(p) => p.max_frequency() as f64,
        FlowFunction::Piecewise(_) => 0.0,
    };
    let total = (freq(f) + freq(g)) * rate.abs();
    if total > 0.0 {
        quad.max_panel.min(1.0 / total)
    } else {
        quad.max_panel
    }
}

/// Jump locations in `t ∈ [a, b]` of `t ↦ f(x+ρt) g(x-ρt)`.
fn flow_breaks(f: &FlowFunction, g: &FlowFunction, x: f64, rate: f64, a: f64, b: f64) -> Vec<f64> {
    if rate == 0.0 {
        return Vec::new();
    }
    let (s0, s1) = (x + rate * a, x + rate * b);
    let mut out: Vec<f64> = f.jumps_in(s0.min(s1), s0.max(s1)).into_iter().map(|s| (s - x) / rate).collect();
    let (v0, v1) = (x - rate * a, x - rate * b);
    out.extend(g.jumps_in(v0.min(v1), v0.max(v1)).into_iter().map(|v| (x - v) / rate));
    out
}

fn flow_eval(h: &FlowFunction, s: f64) -> Result<C64> {
    h.eval(s).ok_or(Error::OutOfDomain)
}

/// `(1/r)∫₀^r f(x+ρt) g(x-ρt) dt` on the flow grid. The quadrature tolerance bounds the error
/// of the mean, not of the integral.
pub fn cesaro_flow(flow: &TranslationFlow, f: &FlowFunction, g: &FlowFunction, r: f64, quad: &Quadrature) -> Result<SampleFunction> {
    flow_products(flow, f, g)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::BadParameter(format!("flow average length {r} must be positive")));
    }
    let q = Quadrature { max_panel: flow_panel(f, g, flow.rate, quad), tolerance: quad.tolerance * r, ..*quad };
    let mut values = Vec::with_capacity(flow.grid.len());
    for &x in flow.grid.nodes() {
        check_line_range(flow, f, g, x, r)?;
        let breaks = flow_breaks(f, g, x, flow.rate, 0.0, r);
        let rho = flow.rate;
        let v = q.integrate(
            |t| f.eval(x + rho * t).unwrap_or(ZERO) * g.eval(x - rho * t).unwrap_or(ZERO),
            0.0,
            r,
            &breaks,
        )?;
        values.push(v.value / r);
    }
    Ok(SampleFunction::Grid { grid: flow.grid.clone(), values })
}

/// `∫_{ε≤|t|≤ς} f(x+ρt) g(x-ρt)/t dt`, pairing `±t` before integrating.
pub fn hilbert_flow(
    flow: &TranslationFlow,
    f: &FlowFunction,
    g: &FlowFunction,
    eps: f64,
    upper: f64,
    quad: &Quadrature,
) -> Result<SampleFunction> {
    flow_products(flow, f, g)?;
    if !(eps > 0.0 && upper > eps && upper.is_finite()) {
        return Err(Error::BadParameter(format!("need 0 < ε < ς, got ({eps}, {upper})")));
    }
    let q = Quadrature { max_panel: flow_panel(f, g, flow.rate, quad), ..*quad };
    let rho = flow.rate;
    let mut values = Vec::with_capacity(flow.grid.len());
    for &x in flow.grid.nodes() {
        check_line_range(flow, f, g, x, upper)?;
        let mut breaks = flow_breaks(f, g, x, rho, eps, upper);
        breaks.extend(flow_breaks(f, g, x, -rho, eps, upper));
        let v = q.integrate(
            |t| {
                let plus = f.eval(x + rho * t).unwrap_or(ZERO) * g.eval(x - rho * t).unwrap_or(ZERO);
                let minus = f.eval(x - rho * t).unwrap_or(ZERO) * g.eval(x + rho * t).unwrap_or(ZERO);
                (plus - minus) / t
            },
            eps,
            upper,
            &breaks,
        )?;
        values.push(v.value);
    }
    Ok(SampleFunction::Grid { grid: flow.grid.clone(), values })
}

/// Line functions without zero extension must stay defined along the whole shift range.
fn check_line_range(flow: &TranslationFlow, f: &FlowFunction, g: &FlowFunction, x: f64, t: f64) -> Result<()> {
    if flow.domain == FlowDomain::Circle {
        return Ok(());
    }
    let s = flow.rate * t;
    for h in [f, g] {
        for p in [x - s, x + s] {
            flow_eval(h, p)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::WeightedSpace;
    use crate::weights::WeightSequence;

    fn c(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    /// Direct evaluation by explicit power application.
    fn oracle(u: &FactoredIsometry, f: &SampleFunction, g: &SampleFunction, terms: &[(i64, C64)]) -> Vec<C64> {
        let fv = f.values();
        let gv = g.values();
        let mut out = vec![ZERO; fv.len()];
        for &(n, w) in terms {
            let a = isometry_power(u, n).apply_values(fv);
            let b = isometry_power(u, -n).apply_values(gv);
            for x in 0..out.len() {
                out[x] += a[x] * b[x] * w;
            }
        }
        out
    }

    #[test]
    fn ergodic_examples() {
        let u = FactoredIsometry::rotation(4, 1);
        let s = u.space();
        let f = s.indicator(0);
        let g = s.real_function(&[1.0, 1.0, 0.0, 0.0]).unwrap();
        let a = bilinear_ergodic(&u, &f, &g, 2.0).unwrap();
        assert_eq!(a.values()[0], c(0.5));
        let fg = f.mul(&g).unwrap();
        assert_eq!(bilinear_ergodic(&u, &f, &g, 1.7).unwrap(), fg);
        let id = FactoredIsometry::identity(WeightedSpace::uniform(4));
        assert!(bilinear_ergodic(&id, &f, &g, 7.9).unwrap().max_deviation(&fg).unwrap() < 1e-15);
    }

    #[test]
    fn hilbert_matches_oracle_on_z4() {
        let u = FactoredIsometry::rotation(4, 1);
        let f = u.space().indicator(0);
        let h = bilinear_hilbert(&u, &f, &f, 3.0).unwrap();
        let terms: Vec<(i64, C64)> = [-3i64, -2, -1, 1, 2, 3].iter().map(|&n| (n, c(1.0 / n as f64))).collect();
        let want = oracle(&u, &f, &f, &terms);
        for (a, b) in h.values().iter().zip(&want) {
            assert!((a - b).norm() < 1e-15);
        }
        let id = FactoredIsometry::identity(WeightedSpace::uniform(3));
        let one = id.space().constant(c(1.0));
        assert!(bilinear_hilbert(&id, &one, &one, 9.0).unwrap().values().iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn dyadic_normaliser() {
        let u = FactoredIsometry::identity(WeightedSpace::uniform(2));
        let f = u.space().real_function(&[1.0, 2.0]).unwrap();
        let a = dyadic_ergodic(&u, &f, &f, 1, 2).unwrap();
        assert!((a.values()[1].re - 4.0 / 2f64.sqrt()).abs() < 1e-15);
        let b = dyadic_ergodic(&u, &f, &f, 3, 2).unwrap();
        let d = 2f64.powf(1.5);
        assert!((b.values()[0].re - 2.0 / d).abs() < 1e-15);
    }

    #[test]
    fn seq_form_examples() {
        let a = Sequence::real(0, &[1.0, 1.0]);
        let w = WeightSequence::real(-1, &[1.0, 1.0, 1.0]);
        let out = weighted_biform_seq(&a, &a, &w);
        assert_eq!(out.get(0), c(1.0));
        let d = weighted_biform_seq(&Sequence::real(-1, &[2.0, 3.0, 4.0]), &Sequence::real(-1, &[1.0, 5.0, 7.0]), &WeightSequence::delta(0));
        assert_eq!(d.get(-1), c(2.0));
        assert_eq!(d.get(0), c(15.0));
        assert_eq!(d.get(1), c(28.0));
    }

    #[test]
    fn seq_form_matches_brute_force() {
        let a = Sequence::real(-3, &[1.0, -2.0, 0.5, 3.0, 1.5]);
        let b = Sequence::real(2, &[0.3, -1.0, 2.0]);
        let w = WeightSequence::real(-4, &[1.0, 0.5, -0.25, 2.0, 0.0, 1.0, -3.0, 0.7, 0.1]);
        let out = weighted_biform_seq(&a, &b, &w);
        for n in -12..12 {
            let mut want = ZERO;
            for k in -20..20 {
                want += a.get(n + k) * b.get(n - k) * w.weight(k);
            }
            assert!((out.get(n) - want).norm() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn fold_and_direct_paths_agree() {
        let u = FactoredIsometry::rotation(5, 2);
        let f = u.space().real_function(&[1.0, -0.5, 2.0, 0.25, 1.5]).unwrap();
        let g = u.space().real_function(&[0.3, 1.0, -1.0, 2.0, 0.5]).unwrap();
        let vals: Vec<f64> = (0..23).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let w = WeightSequence::real(-11, &vals);
        let folded = weighted_biform_space(&u, &f, &g, &w).unwrap();
        let terms: Vec<(i64, C64)> = (-11..=11).map(|n| (n, w.weight(n))).collect();
        let want = oracle(&u, &f, &g, &terms);
        for (a, b) in folded.values().iter().zip(&want) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn maximal_examples() {
        let id = FactoredIsometry::identity(WeightedSpace::uniform(3));
        let f = id.space().real_function(&[1.0, -2.0, 0.5]).unwrap();
        let g = id.space().real_function(&[3.0, 1.0, -4.0]).unwrap();
        let m = maximal_ergodic(&id, &f, &g, 5).unwrap();
        for (v, want) in m.values.values().iter().zip([3.0, 2.0, 2.0]) {
            assert!((v.re - want).abs() < 1e-15);
        }
        assert!(maximal_hilbert(&id, &f, &g, 5).unwrap().values.values().iter().all(|v| v.re < 1e-15));
        let u = FactoredIsometry::rotation(7, 1);
        let f = u.space().real_function(&[1.0, -2.0, 0.5, 0.0, 1.0, 2.0, -1.0]).unwrap();
        let h1 = maximal_hilbert(&u, &f, &f, 1).unwrap();
        let direct = bilinear_hilbert(&u, &f, &f, 1.0).unwrap();
        for (a, b) in h1.values.values().iter().zip(direct.values()) {
            assert!((a.re - b.norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn realline_interval_overlap() {
        // f = g = 1 on [0,1] at x = 0.5 leaves y ∈ [-0.5, 0.5]; the kernel is 1 on [0, 0.5]
        // and its left flank integrates to 1/(2M) since S(t) + S(1-t) = 1.
        let one = PiecewiseConstant::indicator(0.0, 1.0).unwrap();
        let k = crate::kernels::plateau_kernel(1000).unwrap();
        let v = biform_realline(&one, &one, &k, &[0.5], &Quadrature::default()).unwrap();
        assert!((v.values[0].re - (0.5 + 0.5 / 1000.0)).abs() < 1e-10);
        let h = crate::kernels::hilbert_kernel(3).unwrap();
        let even = PiecewiseConstant::indicator(-1.0, 3.0).unwrap();
        let odd = biform_realline(&even, &even, &h, &[1.0], &Quadrature::default()).unwrap();
        assert!(odd.values[0].norm() < 1e-12);
    }
}
