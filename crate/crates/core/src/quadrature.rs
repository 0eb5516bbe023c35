//! Composite Gauss-Legendre quadrature with bisection refinement.

use std::sync::OnceLock;

use crate::{Error, Result, C64};

const ORDER: usize = 16;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

fn panel<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> C64 {
    let (x, w) = rule();
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = C64::new(0.0, 0.0);
    for (xi, wi) in x.iter().zip(w) {
        acc += f(c + h * xi) * *wi;
    }
    acc * h
}

/// An integral value with its accumulated error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadValue {
    pub value: C64,
    pub error: f64,
}

/// Adaptive composite rule. Panels wider than `max_panel` are split before refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub tolerance: f64,
    pub max_panel: f64,
    pub max_depth: u32,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_panel: 0.5, max_depth: 40 }
    }
}

impl Quadrature {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self { tolerance, ..Self::default() }
    }

    /// Integrates `f` over `[a, b]`, honouring interior `breaks` as panel edges.
    pub fn integrate<F: Fn(f64) -> C64>(&self, f: F, a: f64, b: f64, breaks: &[f64]) -> Result<QuadValue> {
        if b <= a {
            return Ok(QuadValue { value: C64::new(0.0, 0.0), error: 0.0 });
        }
        let mut edges: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
        edges.push(a);
        edges.push(b);
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        let total = b - a;
        let mut value = C64::new(0.0, 0.0);
        let mut error = 0.0;
        for pair in edges.windows(2) {
            let (l, r) = (pair[0], pair[1]);
            let pieces = ((r - l) / self.max_panel).ceil().max(1.0) as usize;
            let h = (r - l) / pieces as f64;
            for i in 0..pieces {
                let pl = l + h * i as f64;
                let pr = if i + 1 == pieces { r } else { pl + h };
                let local = self.tolerance * (pr - pl) / total;
                let coarse = panel(&f, pl, pr);
                let (v, e) = self.refine(&f, pl, pr, coarse, local, 0);
                value += v;
                error += e;
            }
        }
        if !(error <= self.tolerance) {
            return Err(Error::QuadratureFailure { estimate: error, tolerance: self.tolerance });
        }
        Ok(QuadValue { value, error })
    }

    fn refine<F: Fn(f64) -> C64>(&self, f: &F, a: f64, b: f64, whole: C64, tol: f64, depth: u32) -> (C64, f64) {
        let m = 0.5 * (a + b);
        let left = panel(f, a, m);
        let right = panel(f, m, b);
        let fine = left + right;
        let diff = (fine - whole).norm();
        let floor = 1e-15 * fine.norm().max(whole.norm());
        if diff <= tol.max(floor) || depth >= self.max_depth || m <= a || m >= b {
            let e = if diff <= floor { 0.0 } else { diff };
            return (fine, e);
        }
        let (lv, le) = self.refine(f, a, m, left, 0.5 * tol, depth + 1);
        let (rv, re) = self.refine(f, m, b, right, 0.5 * tol, depth + 1);
        (lv + rv, le + re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(ORDER);
        let sum: f64 = w.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        // degree 30 is within the 2n-1 exactness range.
        let i: f64 = x.iter().zip(&w).map(|(a, b)| a.powi(30) * b).sum();
        assert!((i - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn odd_rules_have_zero_center() {
        let (x, w) = gauss_legendre(5);
        assert_eq!(x[2], 0.0);
        assert!((w[2] - 128.0 / 225.0).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_integral_matches_closed_form() {
        let q = Quadrature::default();
        let v = q
            .integrate(|t| C64::new(0.0, 4.0 * std::f64::consts::PI * t).exp(), 0.0, 10.3, &[])
            .unwrap();
        let w = 4.0 * std::f64::consts::PI;
        let exact = (C64::new(0.0, w * 10.3).exp() - 1.0) / C64::new(0.0, w);
        assert!((v.value - exact).norm() < 1e-12);
    }

    #[test]
    fn jump_at_break_is_exact() {
        let q = Quadrature::default();
        let v = q
            .integrate(|t| C64::new(if t < 0.3 { 1.0 } else { 2.0 }, 0.0), 0.0, 1.0, &[0.3])
            .unwrap();
        assert!((v.value.re - 1.7).abs() < 1e-14);
    }

    #[test]
    fn unresolvable_integrand_fails() {
        let q = Quadrature { tolerance: 1e-12, max_panel: 1.0, max_depth: 2 };
        let r = q.integrate(|t| C64::new(if t < 0.3137 { 0.0 } else { 1.0 }, 0.0), 0.0, 1.0, &[]);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }
}
