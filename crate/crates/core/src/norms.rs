//! Distribution functions, weak-L¹ and Lᵖ norms, and oscillation functionals.

use crate::averages::biform_realline_with;
use crate::functions::{Grid, PiecewiseConstant, SampleFunction, Sequence};
use crate::kernels::{lacunary, KernelSpec};
use crate::quadrature::Quadrature;
use crate::{Error, Result, C64};

/// `λ(y) = μ{|f| > y}` as a right-continuous step function.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionFunction {
    /// Distinct positive values of `|f|`, ascending.
    pub levels: Vec<f64>,
    /// `masses[i] = μ{|f| ≥ levels[i]}`.
    pub masses: Vec<f64>,
}

impl DistributionFunction {
    pub fn eval(&self, y: f64) -> f64 {
        let i = self.levels.partition_point(|v| *v <= y);
        self.masses.get(i).copied().unwrap_or(0.0)
    }
}

/// Exact distribution on discrete domains. Sums run in a canonical order, so any
/// rearrangement of the (value, mass) pairs gives identical bits.
pub fn distribution(f: &SampleFunction) -> DistributionFunction {
    let mut pairs: Vec<(f64, f64)> = f.magnitudes().into_iter().filter(|p| p.0 > 0.0).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
    let mut levels = Vec::new();
    let mut masses = Vec::new();
    let mut acc = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let v = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == v {
            acc += pairs[i].1;
            i += 1;
        }
        levels.push(v);
        masses.push(acc);
    }
    levels.reverse();
    masses.reverse();
    DistributionFunction { levels, masses }
}

/// `sup_y y·λ(y)`, attained at a jump: `max_v v·μ{|f| ≥ v}`.
pub fn weak_l1_norm(f: &SampleFunction) -> f64 {
    let d = distribution(f);
    d.levels.iter().zip(&d.masses).map(|(v, m)| v * m).fold(0.0, f64::max)
}

/// `(Σ μ(x)|f(x)|ᵖ)^{1/p}`, or the sup over positive-mass points when `p = ∞`.
pub fn lp_norm(f: &SampleFunction, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::BadExponent(format!("p = {p} must be positive")));
    }
    let pairs = f.magnitudes();
    if p.is_infinite() {
        return Ok(pairs.iter().filter(|q| q.1 > 0.0).map(|q| q.0).fold(0.0, f64::max));
    }
    let s: f64 = pairs.iter().map(|(v, w)| w * v.powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

/// `p₃` from `1/p₃ = 1/p₁ + 1/p₂`, gated by `1 < p₁, p₂ < ∞` and `1/p₃ < 3/2`.
pub fn holder_exponent(p1: f64, p2: f64) -> Result<f64> {
    for (name, p) in [("p1", p1), ("p2", p2)] {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::BadExponent(format!("{name} = {p} must satisfy 1 < {name} < ∞")));
        }
    }
    let inv = 1.0 / p1 + 1.0 / p2;
    if !(inv < 1.5) {
        return Err(Error::BadExponent(format!("1/p1 + 1/p2 = {inv} must be < 3/2")));
    }
    Ok(1.0 / inv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OscillationVariant {
    /// `sup_{u_r ≤ n < u_{r+1}} |f_n − f_{u_{r+1}}|`.
    LeftClosed,
    /// `sup_{u_r < n ≤ u_{r+1}} |f_n − f_{u_r}|`.
    RightClosed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillationReport {
    pub breakpoints: Vec<i64>,
    pub osc_value: f64,
    pub norm_product: f64,
    pub r: usize,
    /// `osc_value / (norm_product · R^{1/4})`; 0 when both vanish.
    pub fitted_constant: f64,
    pub variant: OscillationVariant,
}

impl OscillationReport {
    pub fn new(breakpoints: Vec<i64>, osc_value: f64, norm_product: f64, variant: OscillationVariant) -> Self {
        let r = breakpoints.len();
        let denom = norm_product * (r as f64).powf(0.25);
        let fitted_constant = if osc_value == 0.0 { 0.0 } else { osc_value / denom };
        Self { breakpoints, osc_value, norm_product, r, fitted_constant, variant }
    }
}

/// `f_n` for `n = first, first+1, …` on one domain.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedFamily {
    pub first: i64,
    pub members: Vec<SampleFunction>,
}

impl IndexedFamily {
    pub fn get(&self, n: i64) -> Result<&SampleFunction> {
        let last = self.first + self.members.len() as i64 - 1;
        if n < self.first || n > last {
            return Err(Error::IndexOutOfRange { index: n, first: self.first, last });
        }
        Ok(&self.members[(n - self.first) as usize])
    }
}

pub(crate) fn check_breakpoints(u: &[i64]) -> Result<()> {
    if u.len() < 2 {
        return Err(Error::BadParameter("oscillation needs at least two breakpoints".into()));
    }
    if u.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadParameter("breakpoints must be strictly increasing".into()));
    }
    Ok(())
}

/// Brings members onto one value layout (sequences onto their union window).
fn aligned(members: &[&SampleFunction]) -> Result<(SampleFunction, Vec<Vec<C64>>)> {
    if let Some(SampleFunction::Sequence(_)) = members.first() {
        let seqs = members.iter().map(|m| m.as_sequence()).collect::<Result<Vec<&Sequence>>>()?;
        let windows: Vec<_> = seqs.iter().filter_map(|s| s.window()).collect();
        let (lo, hi) = match (windows.iter().map(|w| w.0).min(), windows.iter().map(|w| w.1).max()) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => (0, -1),
        };
        let rows = seqs.iter().map(|s| (lo..=hi).map(|n| s.get(n)).collect()).collect();
        let template = SampleFunction::Sequence(Sequence::new(lo, vec![C64::new(0.0, 0.0); (hi - lo + 1).max(0) as usize]));
        return Ok((template, rows));
    }
    let first = members[0];
    let mut rows = Vec::with_capacity(members.len());
    for m in members {
        // zip_with checks the domain.
        rows.push(first.zip_with(m, |_, b| b)?.values().to_vec());
    }
    Ok((first.clone(), rows))
}

/// Pointwise `(Σ_r sup_block |f_n − f_anchor|²)^{1/2}`.
pub fn square_function(family: &IndexedFamily, breakpoints: &[i64], variant: OscillationVariant) -> Result<SampleFunction> {
    check_breakpoints(breakpoints)?;
    let lo = breakpoints[0];
    let hi = breakpoints[breakpoints.len() - 1];
    let refs = (lo..=hi).map(|n| family.get(n)).collect::<Result<Vec<_>>>()?;
    let (template, rows) = aligned(&refs)?;
    let row = |n: i64| &rows[(n - lo) as usize];
    let len = template.values().len();
    let mut acc = vec![0.0; len];
    for w in breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (range, anchor) = match variant {
            OscillationVariant::LeftClosed => (a..b, b),
            OscillationVariant::RightClosed => (a + 1..b + 1, a),
        };
        let fa = row(anchor);
        let mut sup = vec![0.0f64; len];
        for n in range {
            let fnv = row(n);
            for x in 0..len {
                sup[x] = sup[x].max((fnv[x] - fa[x]).norm());
            }
        }
        for x in 0..len {
            acc[x] += sup[x] * sup[x];
        }
    }
    Ok(template.with_values(acc.into_iter().map(|s| C64::new(s.sqrt(), 0.0)).collect()))
}

/// Weak-L¹ norm of the square function, with the fitted constant.
pub fn oscillation(
    family: &IndexedFamily,
    breakpoints: &[i64],
    variant: OscillationVariant,
    norm_product: f64,
) -> Result<OscillationReport> {
    let s = square_function(family, breakpoints, variant)?;
    Ok(OscillationReport::new(breakpoints.to_vec(), weak_l1_norm(&s), norm_product, variant))
}

/// Least-squares slope of `log(osc/norm)` against `log R`.
pub fn exponent_fit(values: &[(f64, f64)], norm_product: f64) -> Result<f64> {
    let mut rs: Vec<f64> = values.iter().map(|v| v.0).collect();
    rs.sort_by(f64::total_cmp);
    rs.dedup();
    if rs.len() < 3 {
        return Err(Error::DegenerateFit("need at least three distinct R".into()));
    }
    if !(norm_product > 0.0) || values.iter().any(|v| !(v.0 > 0.0 && v.1 > 0.0)) {
        return Err(Error::DegenerateFit("R, values and norm product must be positive".into()));
    }
    let pts: Vec<(f64, f64)> = values.iter().map(|(r, v)| (r.ln(), (v / norm_product).ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Oscillation of `k ↦ ∫ F(x+y) G(x−y) (δ_{d^k}K)(y) dy` on the line, left-closed blocks,
/// sampled on the nodes of `grid` with the grid weights as measure.
pub fn oscillation_realline(
    f: &PiecewiseConstant,
    g: &PiecewiseConstant,
    kernel: &KernelSpec,
    m: u32,
    breakpoints: &[i64],
    grid: &Grid,
    quad: &Quadrature,
) -> Result<OscillationReport> {
    check_breakpoints(breakpoints)?;
    let xs = grid.nodes();
    let mut acc = vec![0.0; xs.len()];
    for w in breakpoints.windows(2) {
        let anchor = crate::kernels::dilate(kernel, lacunary(m, w[1]))?;
        let mut sup = vec![0.0f64; xs.len()];
        for k in w[0]..w[1] {
            let member = crate::kernels::dilate(kernel, lacunary(m, k))?;
            let diff = KernelSpec::difference(&member, &anchor);
            let v = biform_realline_with(f, g, |y| diff.eval(y), diff.support_radius(), &diff.knots(), xs, quad)?;
            for (s, val) in sup.iter_mut().zip(&v.values) {
                *s = s.max(val.norm());
            }
        }
        for (a, s) in acc.iter_mut().zip(&sup) {
            *a += s * s;
        }
    }
    let sq = SampleFunction::Grid { grid: grid.clone(), values: acc.into_iter().map(|s| C64::new(s.sqrt(), 0.0)).collect() };
    let norm = f.integral_abs_pow(2.0).sqrt() * g.integral_abs_pow(2.0).sqrt();
    Ok(OscillationReport::new(breakpoints.to_vec(), weak_l1_norm(&sq), norm, OscillationVariant::LeftClosed))
}
