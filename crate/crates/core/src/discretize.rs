//! Embedding of integer sequences into the line, derivative-sup sequences of kernel differences,
//! and a pointwise verifier for the discrete-to-continuous domination inequality.

use crate::averages::{biform_realline_with, weighted_biform_seq};
use crate::functions::{PiecewiseConstant, Sequence};
use crate::kernels::{dilate, lacunary, KernelSpec, SAFETY};
use crate::quadrature::{gauss_legendre, Quadrature};
use crate::weights::WeightSequence;
use crate::{Error, Result, C64};

/// Half-width of the cell `ℐ = [-¼, ¼]`.
pub const CELL: f64 = 0.25;
/// Scan points per cell for derivative sups (step 1/512 over a length-½ cell).
pub const CELL_SCAN: usize = 256;

/// Profile placed on each cell `ℐ_n = [n-¼, n+¼]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingShape {
    /// `χ_ℐ`.
    Box,
    /// `φ₀(u) = 2(¼ − |u|)` on `ℐ`.
    Triangle,
    /// `φ₁(u) = (¼ − |u|)²` on `ℐ`.
    Parabola,
}

impl EmbeddingShape {
    pub fn eval(self, u: f64) -> f64 {
        let a = u.abs();
        if a > CELL {
            return 0.0;
        }
        match self {
            Self::Box => 1.0,
            Self::Triangle => 2.0 * (CELL - a),
            Self::Parabola => (CELL - a) * (CELL - a),
        }
    }

    /// Closed-form `‖φ‖_p`.
    pub fn lp_norm(self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.eval(0.0);
        }
        // ∫_ℐ φ^p = 2∫₀^{1/4} φ(s)^p ds with the profile written in s = ¼ − |u|.
        let integral = match self {
            Self::Box => 2.0 * CELL,
            Self::Triangle => 2.0 * 2f64.powf(p) * CELL.powf(p + 1.0) / (p + 1.0),
            Self::Parabola => 2.0 * CELL.powf(2.0 * p + 1.0) / (2.0 * p + 1.0),
        };
        integral.powf(1.0 / p)
    }
}

/// `P_φ(a)(x) = Σ a_n φ(x − n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedSequence {
    pub seq: Sequence,
    pub shape: EmbeddingShape,
}

pub fn embed(a: &Sequence, shape: EmbeddingShape) -> EmbeddedSequence {
    EmbeddedSequence { seq: a.clone(), shape }
}

impl EmbeddedSequence {
    /// Only the cell around the nearest integer can contribute.
    pub fn eval(&self, x: f64) -> C64 {
        let n = x.round();
        self.seq.get(n as i64) * self.shape.eval(x - n)
    }

    /// Exact piecewise-constant form of a box embedding, zero-extended.
    pub fn to_piecewise(&self) -> Result<PiecewiseConstant> {
        if self.shape != EmbeddingShape::Box {
            return Err(Error::BadParameter("only box embeddings are piecewise constant".into()));
        }
        let Some((lo, hi)) = self.seq.window() else {
            return PiecewiseConstant::new(vec![0.0, 1.0], vec![C64::new(0.0, 0.0)], false, true);
        };
        let mut breaks = Vec::new();
        let mut values = Vec::new();
        for n in lo..=hi {
            let c = n as f64;
            breaks.push(c - CELL);
            values.push(self.seq.get(n));
            breaks.push(c + CELL);
            if n < hi {
                values.push(C64::new(0.0, 0.0));
            }
        }
        PiecewiseConstant::new(breaks, values, false, true)
    }

    /// `‖P_φ a‖_p` by integrating cell by cell (Gauss-Legendre on each half-cell).
    pub fn lp_norm(&self, p: f64) -> f64 {
        let Some((lo, hi)) = self.seq.window() else { return 0.0 };
        if p.is_infinite() {
            return (lo..=hi).map(|n| self.seq.get(n).norm() * self.shape.eval(0.0)).fold(0.0, f64::max);
        }
        if self.shape == EmbeddingShape::Box {
            return self.to_piecewise().map(|f| f.integral_abs_pow(p).powf(1.0 / p)).unwrap_or(f64::NAN);
        }
        let (xs, ws) = gauss_legendre(16);
        let mut total = 0.0;
        for n in lo..=hi {
            let c = n as f64;
            for (a, b) in [(c - CELL, c), (c, c + CELL)] {
                let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                for (x, w) in xs.iter().zip(&ws) {
                    total += w * half * self.eval(mid + half * x).norm().powf(p);
                }
            }
        }
        total.powf(1.0 / p)
    }
}

/// `Λ_n` for one block of a breakpoint sequence, with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSequence {
    pub r: usize,
    pub values: Sequence,
    pub kernel: String,
    pub m: u32,
    pub breakpoints: Vec<i64>,
}

/// Grid-scanned `SAFETY · sup_j sup_{x∈ℐ_n} |F_j'(x)|` over `|n| ≤ radius + ¼`.
fn scan_lambda(family: &[KernelSpec]) -> Result<Sequence> {
    let mut radius: f64 = 0.0;
    for f in family {
        let r = f.support_radius().ok_or_else(|| Error::BadParameter(format!("{f} is not compactly supported")))?;
        radius = radius.max(r);
    }
    let big_n = (radius + CELL).floor() as i64;
    let step = 2.0 * CELL / CELL_SCAN as f64;
    let mut values = Vec::with_capacity((2 * big_n + 1) as usize);
    for n in -big_n..=big_n {
        let mut sup = 0.0f64;
        for i in 0..=CELL_SCAN {
            let x = n as f64 - CELL + step * i as f64;
            for f in family {
                sup = sup.max(f.derivative(x).abs());
            }
        }
        values.push(C64::new(SAFETY * sup, 0.0));
    }
    Ok(Sequence::new(-big_n, values))
}

/// `F_{j,r} = K_{j,m} − K_{u_{r+1},m}` for `u_r ≤ j < u_{r+1}` (block `r` is 1-based).
pub fn block_differences(k: &KernelSpec, m: u32, breakpoints: &[i64], r: usize) -> Result<Vec<KernelSpec>> {
    crate::norms::check_breakpoints(breakpoints)?;
    if r < 1 || r >= breakpoints.len() {
        return Err(Error::BadParameter(format!("block {r} outside 1..{}", breakpoints.len() - 1)));
    }
    let (lo, hi) = (breakpoints[r - 1], breakpoints[r]);
    let anchor = dilate(k, lacunary(m, hi))?;
    (lo..hi).map(|j| Ok(KernelSpec::difference(&dilate(k, lacunary(m, j))?, &anchor))).collect()
}

/// `Λ^{(r)}` for the block differences of `K`.
pub fn lambda_sequence(k: &KernelSpec, m: u32, breakpoints: &[i64], r: usize) -> Result<LambdaSequence> {
    let family = block_differences(k, m, breakpoints, r)?;
    let values = if k.is_zero() { Sequence::zero() } else { scan_lambda(&family)? };
    Ok(LambdaSequence { r, values, kernel: k.to_string(), m, breakpoints: breakpoints.to_vec() })
}

/// Outcome of a domination check over a probe set.
#[derive(Debug, Clone, PartialEq)]
pub struct DominationReport {
    /// `max(LHS − RHS, 0)` over the probes.
    pub max_violation: f64,
    pub worst_probe: f64,
    pub max_lhs: f64,
    pub probes: usize,
    /// Accumulated quadrature error of the continuous side.
    pub quadrature_error: f64,
}

/// 8 probes per unit interval (cell-offset) plus `n ± 1/8` for every integer in `[lo, hi]`.
pub fn probe_grid(lo: i64, hi: i64) -> Vec<f64> {
    let mut out = Vec::new();
    for n in lo..=hi {
        let c = n as f64;
        for i in 0..8 {
            out.push(c + (i as f64 + 0.5) / 8.0);
        }
        out.push(c - 0.125);
        out.push(c + 0.125);
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Checks `P_{φ₀}(𝔖^{(N)}(a,b)) ≤ S^{(N)}(Pa,Pb) + P_{φ₁}(𝔖_Λ(|a|,|b|))` at each probe.
pub fn lemma3_check(family: &[KernelSpec], a: &Sequence, b: &Sequence, probes: &[f64], quad: &Quadrature) -> Result<DominationReport> {
    let mut report = DominationReport { max_violation: 0.0, worst_probe: f64::NAN, max_lhs: 0.0, probes: probes.len(), quadrature_error: 0.0 };
    if family.is_empty() {
        return Ok(report);
    }
    let lambda = WeightSequence(scan_lambda(family)?);
    let discrete: Vec<Sequence> = family
        .iter()
        .map(|f| {
            let r = f.support_radius().unwrap_or(0.0).floor() as i64;
            let w = WeightSequence::new(-r, (-r..=r).map(|n| C64::new(f.eval(n as f64), 0.0)).collect());
            weighted_biform_seq(a, b, &w)
        })
        .collect();
    let lambda_form = weighted_biform_seq(&a.abs(), &b.abs(), &lambda);
    let pa = embed(a, EmbeddingShape::Box).to_piecewise()?;
    let pb = embed(b, EmbeddingShape::Box).to_piecewise()?;
    let mut continuous = vec![0.0f64; probes.len()];
    for f in family {
        let v = biform_realline_with(&pa, &pb, |y| f.eval(y), f.support_radius(), &f.knots(), probes, quad)?;
        report.quadrature_error += v.error;
        for (c, z) in continuous.iter_mut().zip(&v.values) {
            *c = c.max(z.norm());
        }
    }
    for (i, &x) in probes.iter().enumerate() {
        let n = x.round();
        let ni = n as i64;
        let sup_discrete = discrete.iter().map(|s| s.get(ni).norm()).fold(0.0, f64::max);
        let lhs = sup_discrete * EmbeddingShape::Triangle.eval(x - n);
        let rhs = continuous[i] + lambda_form.get(ni).re * EmbeddingShape::Parabola.eval(x - n);
        report.max_lhs = report.max_lhs.max(lhs);
        let v = lhs - rhs;
        if v > report.max_violation {
            report.max_violation = v;
            report.worst_probe = x;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{bump_kernel, plateau_kernel, zero_kernel};

    #[test]
    fn shape_centres_and_norms() {
        assert_eq!(EmbeddingShape::Triangle.eval(0.0), 0.5);
        assert_eq!(EmbeddingShape::Parabola.eval(0.0), 1.0 / 16.0);
        assert_eq!(EmbeddingShape::Box.lp_norm(1.0), 0.5);
        assert!((EmbeddingShape::Triangle.lp_norm(1.0) - 1.0 / 8.0).abs() < 1e-15);
        assert!((EmbeddingShape::Parabola.lp_norm(1.0) - 1.0 / 96.0).abs() < 1e-15);
        assert!((EmbeddingShape::Triangle.lp_norm(2.0) - (1.0f64 / 24.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn delta_box_embedding_has_half_mass() {
        let e = embed(&Sequence::delta(0), EmbeddingShape::Box);
        assert!((e.lp_norm(1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn polynomial_shapes_match_norm_identity() {
        let a = Sequence::real(-2, &[1.0, -3.0, 0.5, 2.0]);
        let l2: f64 = a.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for shape in [EmbeddingShape::Triangle, EmbeddingShape::Parabola] {
            let e = embed(&a, shape);
            assert!((e.lp_norm(2.0) - shape.lp_norm(2.0) * l2).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_kernel_lambda_vanishes() {
        let l = lambda_sequence(&zero_kernel(), 1, &[1, 3], 1).unwrap();
        assert!(l.values.values.iter().all(|v| *v == C64::new(0.0, 0.0)));
    }

    #[test]
    fn lambda_support_bound() {
        let k = bump_kernel(1.0).unwrap();
        let l = lambda_sequence(&k, 1, &[0, 2, 3], 1).unwrap();
        let (lo, hi) = l.values.window().unwrap();
        let bound = (k.support_radius().unwrap() * 4.0 + 0.25).floor() as i64;
        assert!(-lo <= bound && hi <= bound);
    }

    #[test]
    fn zero_sequences_give_no_violation() {
        let fam = block_differences(&plateau_kernel(3).unwrap(), 1, &[0, 2], 1).unwrap();
        let z = Sequence::real(0, &[0.0, 0.0]);
        let r = lemma3_check(&fam, &z, &z, &probe_grid(-2, 2), &Quadrature::default()).unwrap();
        assert_eq!(r.max_violation, 0.0);
        assert_eq!(r.max_lhs, 0.0);
    }

    #[test]
    fn single_kernel_delta_inputs() {
        let fam = vec![bump_kernel(1.5).unwrap()];
        let d = Sequence::delta(0);
        let r = lemma3_check(&fam, &d, &d, &probe_grid(-2, 2), &Quadrature::with_tolerance(1e-10)).unwrap();
        assert!(r.max_violation <= 1e-9, "{r:?}");
    }
}
