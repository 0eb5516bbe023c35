//! Convergence probes: Cauchy ladders, high-index oracles, the subsequence bridge bound and
//! closed-form flow limits.

use std::f64::consts::{PI, TAU};

use crate::averages::{bilinear_ergodic, bilinear_hilbert, cesaro_flow, dyadic_ergodic, hilbert_flow};
use crate::functions::{FlowFunction, SampleFunction, TrigPoly};
use crate::kernels::{lacunary, sine_integral};
use crate::norms::lp_norm;
use crate::quadrature::Quadrature;
use crate::systems::{isometry_power, FactoredIsometry, FlowDomain, TranslationFlow};
use crate::{Error, Result, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Largest period searched by the Hilbert oracle before falling back to a direct walk.
pub const ORACLE_PERIOD_CAP: u64 = 1 << 20;
/// Reference index for the Hilbert oracle.
pub const HILBERT_REFERENCE: u64 = 1_000_000;
/// Sup-norm slack allowed when checking `‖f‖_∞ = 1`.
pub const UNIT_SUP_TOL: f64 = 1e-12;
/// Absolute floating-point slack on the bridge bound.
pub const BRIDGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AverageKind {
    /// `A_r`, ladder values are `r`.
    Ergodic,
    /// `H_r`, ladder values are `r`.
    Hilbert,
    /// `Ã_{2^{j/m}}`, ladder values are `j`.
    Dyadic { m: u32 },
    /// `(1/r)∫₀^r`, ladder values are `r`.
    FlowCesaro,
    /// `∫_{1/ς ≤ |t| ≤ ς}`, ladder values are `ς`.
    FlowHilbert,
}

/// What a probe evaluates on.
pub enum ProbeTarget<'a> {
    System { u: &'a FactoredIsometry, f: &'a SampleFunction, g: &'a SampleFunction },
    Flow { flow: &'a TranslationFlow, f: &'a FlowFunction, g: &'a FlowFunction, quad: Quadrature },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceProbe {
    pub kind: AverageKind,
    pub ladder: Vec<f64>,
    /// `‖v(k_{i+1}) − v(k_i)‖_∞` for consecutive ladder points.
    pub sup_deviations: Vec<f64>,
    /// The same differences in `L^{p₃}`.
    pub lp_deviations: Vec<f64>,
    pub p3: f64,
    /// `‖v(k_i) − oracle‖_∞` per ladder point when an oracle was supplied.
    pub oracle_deviations: Option<Vec<f64>>,
}

fn evaluate(kind: AverageKind, target: &ProbeTarget<'_>, k: f64) -> Result<SampleFunction> {
    match (kind, target) {
        (AverageKind::Ergodic, ProbeTarget::System { u, f, g }) => bilinear_ergodic(u, f, g, k),
        (AverageKind::Hilbert, ProbeTarget::System { u, f, g }) => bilinear_hilbert(u, f, g, k),
        (AverageKind::Dyadic { m }, ProbeTarget::System { u, f, g }) => {
            if k.fract() != 0.0 {
                return Err(Error::BadParameter(format!("dyadic ladder index {k} is not an integer")));
            }
            dyadic_ergodic(u, f, g, k as i64, m)
        }
        (AverageKind::FlowCesaro, ProbeTarget::Flow { flow, f, g, quad }) => cesaro_flow(flow, f, g, k, quad),
        (AverageKind::FlowHilbert, ProbeTarget::Flow { flow, f, g, quad }) => hilbert_flow(flow, f, g, 1.0 / k, k, quad),
        _ => Err(Error::DomainMismatch(format!("{kind:?} does not apply to this target"))),
    }
}

/// Evaluates the average along `ladder` and records successive and oracle deviations.
pub fn cauchy_probe(kind: AverageKind, target: &ProbeTarget<'_>, ladder: &[f64], p3: f64, oracle: Option<&SampleFunction>) -> Result<ConvergenceProbe> {
    if ladder.len() < 3 {
        return Err(Error::BadParameter("a convergence ladder needs at least three points".into()));
    }
    if ladder.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::BadParameter("ladder must be strictly increasing".into()));
    }
    let values = ladder.iter().map(|&k| evaluate(kind, target, k)).collect::<Result<Vec<_>>>()?;
    let mut sup_deviations = Vec::with_capacity(ladder.len() - 1);
    let mut lp_deviations = Vec::with_capacity(ladder.len() - 1);
    for w in values.windows(2) {
        let d = w[1].sub(&w[0])?;
        sup_deviations.push(lp_norm(&d, f64::INFINITY)?);
        lp_deviations.push(lp_norm(&d, p3)?);
    }
    let oracle_deviations = match oracle {
        Some(o) => Some(values.iter().map(|v| v.max_deviation(o)).collect::<Result<Vec<_>>>()?),
        None => None,
    };
    Ok(ConvergenceProbe { kind, ladder: ladder.to_vec(), sup_deviations, lp_deviations, p3, oracle_deviations })
}

/// `H_k` summed pairwise as `Σ_{n=1}^{k} ((Uⁿf)(U⁻ⁿg) − (U⁻ⁿf)(Uⁿg))/n`.
///
/// On a periodic system the reciprocals are collected per residue class, smallest terms first,
/// and each class is paired once.
pub fn hilbert_oracle(u: &FactoredIsometry, f: &SampleFunction, g: &SampleFunction, k: u64) -> Result<SampleFunction> {
    let fv = f.space_values(u.space().weights())?;
    let gv = g.space_values(u.space().weights())?;
    let len = fv.len();
    let mut out = vec![ZERO; len];
    let pair = |out: &mut [C64], r: i64, c: f64| {
        let fp = isometry_power(u, r).apply_values(fv);
        let fm = isometry_power(u, -r).apply_values(fv);
        let gp = isometry_power(u, r).apply_values(gv);
        let gm = isometry_power(u, -r).apply_values(gv);
        for x in 0..out.len() {
            out[x] += (fp[x] * gm[x] - fm[x] * gp[x]) * c;
        }
    };
    match u.period(ORACLE_PERIOD_CAP) {
        Some(p) if (p as u64) < k => {
            let mut coeff = vec![0.0f64; p];
            for n in (1..=k).rev() {
                coeff[(n % p as u64) as usize] += 1.0 / n as f64;
            }
            for (r, &c) in coeff.iter().enumerate() {
                if r != 0 {
                    pair(&mut out, r as i64, c);
                }
            }
        }
        _ => {
            let (mut fp, mut fm, mut gp, mut gm) = (fv.to_vec(), fv.to_vec(), gv.to_vec(), gv.to_vec());
            for n in 1..=k {
                fp = u.apply(&fp);
                fm = u.apply_inverse(&fm);
                gp = u.apply(&gp);
                gm = u.apply_inverse(&gm);
                let c = 1.0 / n as f64;
                for x in 0..len {
                    out[x] += (fp[x] * gm[x] - fm[x] * gp[x]) * c;
                }
            }
        }
    }
    Ok(f.with_values(out))
}

/// Largest `j ≥ 0` with `2^{j/m} ≤ k`.
pub fn lacunary_floor(k: u64, m: u32) -> i64 {
    let mut j = ((m as f64) * (k as f64).log2()).floor() as i64;
    while j > 0 && lacunary(m, j) > k as f64 {
        j -= 1;
    }
    while lacunary(m, j + 1) <= k as f64 {
        j += 1;
    }
    j
}

/// `2(k − d)/k + (d − ⌊d⌋)/k` with `d = 2^{j/m}`.
pub fn bridge_bound(k: u64, j: i64, m: u32) -> f64 {
    let d = lacunary(m, j);
    let kf = k as f64;
    2.0 * (kf - d) / kf + (d - d.floor()) / kf
}

#[derive(Debug, Clone, PartialEq)]
pub struct BridgeRow {
    pub k: u64,
    pub j: i64,
    pub deviation: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BridgeReport {
    pub m: u32,
    pub rows: Vec<BridgeRow>,
    /// `max(deviation − bound, 0)`.
    pub max_excess: f64,
}

impl BridgeReport {
    pub fn holds(&self) -> bool {
        self.max_excess <= BRIDGE_SLACK
    }
}

fn check_unit_sup(h: &SampleFunction) -> Result<()> {
    let s = lp_norm(h, f64::INFINITY)?;
    if (s - 1.0).abs() > UNIT_SUP_TOL {
        return Err(Error::BadParameter(format!("input sup norm {s} is not 1")));
    }
    Ok(())
}

/// `sup_x |A_k − Ã_{2^{j/m}}|` against its bound for `k = 1..=k_max`.
pub fn bridge_report(u: &FactoredIsometry, f: &SampleFunction, g: &SampleFunction, m: u32, k_max: u64) -> Result<BridgeReport> {
    check_unit_sup(f)?;
    check_unit_sup(g)?;
    let mut rows = Vec::with_capacity(k_max as usize);
    let mut max_excess = 0.0f64;
    for k in 1..=k_max {
        let j = lacunary_floor(k, m);
        let a = bilinear_ergodic(u, f, g, k as f64)?;
        let b = dyadic_ergodic(u, f, g, j, m)?;
        let deviation = a.max_deviation(&b)?;
        let bound = bridge_bound(k, j, m);
        max_excess = max_excess.max(deviation - bound);
        rows.push(BridgeRow { k, j, deviation, bound });
    }
    Ok(BridgeReport { m, rows, max_excess })
}

pub fn bridge_check(u: &FactoredIsometry, f: &SampleFunction, g: &SampleFunction, m: u32, k_max: u64) -> Result<BridgeReport> {
    let report = bridge_report(u, f, g, m, k_max)?;
    if !report.holds() {
        let worst = report.rows.iter().max_by(|a, b| (a.deviation - a.bound).total_cmp(&(b.deviation - b.bound))).expect("rows exist");
        return Err(Error::BoundViolated { what: format!("bridge at k={} j={} m={m}", worst.k, worst.j), lhs: worst.deviation, rhs: worst.bound });
    }
    Ok(report)
}

/// Direction of a flow limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowSide {
    /// `r → ∞`, ladder increasing.
    ToInfinity,
    /// `r → 0`, ladder decreasing.
    ToZero,
}

fn e(x: f64) -> C64 {
    C64::from_polar(1.0, TAU * x)
}

/// `𝔼₀ = f·g`.
pub fn limit_at_zero(f: &TrigPoly, g: &TrigPoly, x: f64) -> C64 {
    f.eval(x) * g.eval(x)
}

/// `𝔼_∞(x) = ∫₀¹ f(x+t) g(x−t) dt = Σ_k f̂(k) ĝ(k) e(2kx)` for a nonzero rate.
pub fn limit_at_infinity(f: &TrigPoly, g: &TrigPoly, rate: f64, x: f64) -> C64 {
    if rate == 0.0 {
        return limit_at_zero(f, g, x);
    }
    let mut acc = ZERO;
    for &(k, a) in f.terms() {
        for &(l, b) in g.terms() {
            if k == l {
                acc += a * b * e(2.0 * k as f64 * x);
            }
        }
    }
    acc
}

/// `(1/r)∫₀^r f(x+ρt) g(x−ρt) dt` in coefficient form.
pub fn cesaro_closed_form(f: &TrigPoly, g: &TrigPoly, rate: f64, r: f64, x: f64) -> C64 {
    let mut acc = ZERO;
    for &(k, a) in f.terms() {
        for &(l, b) in g.terms() {
            let c = (k - l) as f64 * rate;
            let mean = if c == 0.0 {
                C64::new(1.0, 0.0)
            } else {
                let z = C64::new(0.0, TAU * c * r);
                (z.exp() - 1.0) / z
            };
            acc += a * b * e((k + l) as f64 * x) * mean;
        }
    }
    acc
}

/// `∫_{ε≤|t|≤ς} f(x+ρt) g(x−ρt)/t dt = Σ f̂(k)ĝ(l) e((k+l)x)·2i·sgn(c)(Si(2π|c|ς) − Si(2π|c|ε))`,
/// `c = (k−l)ρ`.
pub fn hilbert_flow_closed_form(f: &TrigPoly, g: &TrigPoly, rate: f64, eps: f64, upper: f64, x: f64) -> C64 {
    let mut acc = ZERO;
    for &(k, a) in f.terms() {
        for &(l, b) in g.terms() {
            let c = (k - l) as f64 * rate;
            if c == 0.0 {
                continue;
            }
            let s = sine_integral(TAU * c.abs() * upper) - sine_integral(TAU * c.abs() * eps);
            acc += a * b * e((k + l) as f64 * x) * C64::new(0.0, 2.0 * c.signum() * s);
        }
    }
    acc
}

/// Principal value `Σ f̂(k)ĝ(l) e((k+l)x)·iπ·sgn((k−l)ρ)`.
pub fn hilbert_flow_limit(f: &TrigPoly, g: &TrigPoly, rate: f64, x: f64) -> C64 {
    let mut acc = ZERO;
    for &(k, a) in f.terms() {
        for &(l, b) in g.terms() {
            let c = (k - l) as f64 * rate;
            if c != 0.0 {
                acc += a * b * e((k + l) as f64 * x) * C64::new(0.0, PI * c.signum());
            }
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowLimitReport {
    pub side: FlowSide,
    pub ladder: Vec<f64>,
    /// `‖cesaro_flow(r) − limit‖_∞` per ladder point.
    pub deviations: Vec<f64>,
    /// `cesaro_flow(r)` per ladder point.
    pub values: Vec<SampleFunction>,
    pub limit: SampleFunction,
    /// `max(‖𝔼₀‖₁, ‖𝔼_∞‖₁)/(‖f‖₂‖g‖₂)` on the flow grid.
    pub holder_ratio: f64,
}

/// Compares `cesaro_flow` along `ladder` with the closed-form limit on the circle.
pub fn flow_limit_probe(flow: &TranslationFlow, f: &TrigPoly, g: &TrigPoly, side: FlowSide, ladder: &[f64], quad: &Quadrature) -> Result<FlowLimitReport> {
    if flow.domain != FlowDomain::Circle {
        return Err(Error::BadParameter("closed-form flow limits need the circle".into()));
    }
    let ordered = match side {
        FlowSide::ToInfinity => ladder.windows(2).all(|w| w[0] < w[1]),
        FlowSide::ToZero => ladder.windows(2).all(|w| w[0] > w[1]),
    };
    if ladder.is_empty() || !ordered {
        return Err(Error::BadParameter(format!("ladder must be nonempty and monotone toward {side:?}")));
    }
    let nodes = flow.grid.nodes();
    let sample = |h: &dyn Fn(f64) -> C64| SampleFunction::Grid { grid: flow.grid.clone(), values: nodes.iter().map(|&x| h(x)).collect() };
    let zero = sample(&|x| limit_at_zero(f, g, x));
    let infinity = sample(&|x| limit_at_infinity(f, g, flow.rate, x));
    let limit = match side {
        FlowSide::ToInfinity => infinity.clone(),
        FlowSide::ToZero => zero.clone(),
    };
    let (ff, gf) = (FlowFunction::Trig(f.clone()), FlowFunction::Trig(g.clone()));
    let values = ladder.iter().map(|&r| cesaro_flow(flow, &ff, &gf, r, quad)).collect::<Result<Vec<_>>>()?;
    let deviations = values.iter().map(|v| v.max_deviation(&limit)).collect::<Result<Vec<_>>>()?;
    let norm = f.l2_norm() * g.l2_norm();
    let top = lp_norm(&zero, 1.0)?.max(lp_norm(&infinity, 1.0)?);
    let holder_ratio = if norm == 0.0 { 0.0 } else { top / norm };
    Ok(FlowLimitReport { side, ladder: ladder.to_vec(), deviations, values, limit, holder_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::Grid;
    use crate::random::{random_isometry, random_unit_sup_function};
    use crate::systems::WeightedSpace;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn circle(n: usize) -> TranslationFlow {
        TranslationFlow::new(FlowDomain::Circle, Grid::midpoint(0.0, 1.0, n).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn identity_ergodic_probe_is_flat() {
        let u = FactoredIsometry::identity(WeightedSpace::uniform(5));
        let f = u.space().real_function(&[1.0, -2.0, 0.5, 3.0, 1.0]).unwrap();
        let p = cauchy_probe(AverageKind::Ergodic, &ProbeTarget::System { u: &u, f: &f, g: &f }, &[1.0, 2.0, 7.0, 20.0], 1.0, None).unwrap();
        assert!(p.sup_deviations.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn cyclic_ergodic_hits_zero_at_period_multiples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = FactoredIsometry::rotation(13, 5);
        let f = random_unit_sup_function(u.space(), &mut rng);
        let g = random_unit_sup_function(u.space(), &mut rng);
        let ladder: Vec<f64> = (1..=5).map(|q| 13.0 * q as f64).collect();
        let p = cauchy_probe(AverageKind::Ergodic, &ProbeTarget::System { u: &u, f: &f, g: &g }, &ladder, 1.0, None).unwrap();
        assert!(p.sup_deviations.iter().all(|&d| d == 0.0), "{:?}", p.sup_deviations);
    }

    #[test]
    fn hilbert_oracle_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_isometry(9, &mut rng);
        let f = random_unit_sup_function(u.space(), &mut rng);
        let g = random_unit_sup_function(u.space(), &mut rng);
        for k in [1u64, 5, 40, 300] {
            let o = hilbert_oracle(&u, &f, &g, k).unwrap();
            let h = bilinear_hilbert(&u, &f, &g, k as f64).unwrap();
            assert!(o.max_deviation(&h).unwrap() < 1e-12);
        }
    }

    #[test]
    fn bridge_arithmetic() {
        assert_eq!(lacunary_floor(3, 1), 1);
        assert!((bridge_bound(3, 1, 1) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(lacunary_floor(8, 1), 3);
        assert_eq!(bridge_bound(8, 3, 1), 0.0);
        assert_eq!(lacunary_floor(2, 2), 2);
        assert_eq!(lacunary_floor(1, 4), 0);
    }

    #[test]
    fn bridge_holds_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in [1, 2, 4] {
            let u = random_isometry(20, &mut rng);
            let f = random_unit_sup_function(u.space(), &mut rng);
            let g = random_unit_sup_function(u.space(), &mut rng);
            let r = bridge_check(&u, &f, &g, m, 64).unwrap();
            for row in r.rows.iter().filter(|row| lacunary(m, row.j) == row.k as f64) {
                assert!(row.deviation <= 1e-15);
            }
        }
    }

    #[test]
    fn bridge_rejects_non_unit_inputs() {
        let u = FactoredIsometry::rotation(4, 1);
        let f = u.space().real_function(&[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(bridge_check(&u, &f, &f, 1, 4).is_err());
    }

    #[test]
    fn closed_forms_for_characters() {
        let (p, q) = (TrigPoly::character(1), TrigPoly::character(-1));
        assert!(limit_at_infinity(&p, &q, 1.0, 0.3).norm() == 0.0);
        let v = limit_at_infinity(&p, &p, 1.0, 0.3);
        assert!((v - e(0.6)).norm() < 1e-15);
        let one = TrigPoly::constant(C64::new(1.0, 0.0));
        assert_eq!(limit_at_infinity(&one, &one, 1.0, 0.1), C64::new(1.0, 0.0));
        assert!((hilbert_flow_limit(&p, &q, 1.0, 0.2) - C64::new(0.0, PI)).norm() < 1e-15);
    }

    #[test]
    fn flow_cesaro_matches_closed_form() {
        let flow = circle(6);
        let f = TrigPoly::new(vec![(1, C64::new(0.5, 0.2)), (-2, C64::new(0.0, 1.0))]);
        let g = TrigPoly::new(vec![(1, C64::new(1.0, 0.0)), (3, C64::new(-0.3, 0.0))]);
        let v = cesaro_flow(&flow, &FlowFunction::Trig(f.clone()), &FlowFunction::Trig(g.clone()), 2.37, &Quadrature::with_tolerance(1e-11)).unwrap();
        for (x, z) in flow.grid.nodes().iter().zip(v.values()) {
            assert!((z - cesaro_closed_form(&f, &g, 1.0, 2.37, *x)).norm() < 1e-9);
        }
    }

    #[test]
    fn flow_limits_converge() {
        let flow = circle(4);
        let (p, q) = (TrigPoly::character(1), TrigPoly::character(-1));
        let quad = Quadrature::default();
        let inf = flow_limit_probe(&flow, &p, &q, FlowSide::ToInfinity, &[10.3, 100.7, 1000.1], &quad).unwrap();
        assert!(inf.deviations.windows(2).all(|w| w[1] < w[0]));
        let zero = flow_limit_probe(&flow, &p, &q, FlowSide::ToZero, &[1e-1, 1e-2, 1e-3], &quad).unwrap();
        assert!(zero.deviations[2] < 1e-2);
        assert!((zero.holder_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flow_hilbert_matches_sine_integral_form() {
        let flow = circle(3);
        let f = TrigPoly::new(vec![(1, C64::new(1.0, 0.0)), (2, C64::new(0.0, 0.5))]);
        let g = TrigPoly::character(-1);
        let v = hilbert_flow(&flow, &FlowFunction::Trig(f.clone()), &FlowFunction::Trig(g.clone()), 0.01, 7.3, &Quadrature::with_tolerance(1e-10)).unwrap();
        for (x, z) in flow.grid.nodes().iter().zip(v.values()) {
            assert!((z - hilbert_flow_closed_form(&f, &g, 1.0, 0.01, 7.3, *x)).norm() < 1e-8);
        }
    }
}
