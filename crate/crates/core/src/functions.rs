//! Complex-valued functions on weighted point sets, on the integers and on quadrature grids,
//! plus the two exact function classes carried by translation flows.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::{Error, Result, C64};

/// Finitely supported sequence: `values[i]` sits at index `offset + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub offset: i64,
    pub values: Vec<C64>,
}

impl Sequence {
    pub fn new(offset: i64, values: Vec<C64>) -> Self {
        Self { offset, values }
    }

    pub fn real(offset: i64, values: &[f64]) -> Self {
        Self::new(offset, values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self::new(0, Vec::new())
    }

    pub fn delta(at: i64) -> Self {
        Self::real(at, &[1.0])
    }

    pub fn get(&self, n: i64) -> C64 {
        let i = n - self.offset;
        if i < 0 || i as usize >= self.values.len() {
            C64::new(0.0, 0.0)
        } else {
            self.values[i as usize]
        }
    }

    /// Inclusive index window, `None` when empty.
    pub fn window(&self) -> Option<(i64, i64)> {
        if self.values.is_empty() {
            None
        } else {
            Some((self.offset, self.offset + self.values.len() as i64 - 1))
        }
    }

    /// Drops zero entries at both ends.
    pub fn trimmed(mut self) -> Self {
        let zero = C64::new(0.0, 0.0);
        while self.values.last() == Some(&zero) {
            self.values.pop();
        }
        let lead = self.values.iter().take_while(|v| **v == zero).count();
        self.values.drain(..lead);
        self.offset += lead as i64;
        if self.values.is_empty() {
            self.offset = 0;
        }
        self
    }

    pub fn abs(&self) -> Self {
        Self::new(self.offset, self.values.iter().map(|v| C64::new(v.norm(), 0.0)).collect())
    }
}

/// Quadrature grid: strictly increasing nodes with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Arc<[f64]>,
    weights: Arc<[f64]>,
}

impl Grid {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::BadParameter("grid nodes and weights differ in length".into()));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::BadParameter("grid nodes must be strictly increasing".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::BadParameter("grid weights must be positive".into()));
        }
        Ok(Self { nodes: nodes.into(), weights: weights.into() })
    }

    /// Midpoint grid of `count` cells on `[a, b)`.
    pub fn midpoint(a: f64, b: f64, count: usize) -> Result<Self> {
        if !(b > a) || count == 0 {
            return Err(Error::BadParameter("midpoint grid needs a < b and count > 0".into()));
        }
        let h = (b - a) / count as f64;
        let nodes = (0..count).map(|i| a + h * (i as f64 + 0.5)).collect();
        Self::new(nodes, vec![h; count])
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// A function on one of the three model domains.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleFunction {
    /// Values on the points of a weighted space; `weights` is that space's measure.
    Space { weights: Arc<[f64]>, values: Vec<C64> },
    Sequence(Sequence),
    Grid { grid: Grid, values: Vec<C64> },
}

impl SampleFunction {
    pub fn values(&self) -> &[C64] {
        match self {
            Self::Space { values, .. } | Self::Grid { values, .. } => values,
            Self::Sequence(s) => &s.values,
        }
    }

    /// Pairs `(|value|, mass)` over the stored entries.
    pub fn magnitudes(&self) -> Vec<(f64, f64)> {
        match self {
            Self::Space { weights, values } => values.iter().zip(weights.iter()).map(|(v, w)| (v.norm(), *w)).collect(),
            Self::Grid { grid, values } => values.iter().zip(grid.weights()).map(|(v, w)| (v.norm(), *w)).collect(),
            Self::Sequence(s) => s.values.iter().map(|v| (v.norm(), 1.0)).collect(),
        }
    }

    /// Space values, checked against the expected measure.
    pub fn space_values(&self, weights: &Arc<[f64]>) -> Result<&[C64]> {
        match self {
            Self::Space { weights: w, values } if Arc::ptr_eq(w, weights) || **w == **weights => Ok(values),
            Self::Space { .. } => Err(Error::DomainMismatch("function lives on a different weighted space".into())),
            _ => Err(Error::DomainMismatch("expected a function on a weighted space".into())),
        }
    }

    pub fn as_sequence(&self) -> Result<&Sequence> {
        match self {
            Self::Sequence(s) => Ok(s),
            _ => Err(Error::DomainMismatch("expected an integer sequence".into())),
        }
    }

    /// Same domain, new values (same length).
    pub fn with_values(&self, values: Vec<C64>) -> Self {
        match self {
            Self::Space { weights, .. } => Self::Space { weights: weights.clone(), values },
            Self::Grid { grid, .. } => Self::Grid { grid: grid.clone(), values },
            Self::Sequence(s) => Self::Sequence(Sequence::new(s.offset, values)),
        }
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        self.with_values(self.values().iter().map(|v| f(*v)).collect())
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|v| v * c)
    }

    /// Pointwise combination on a shared domain; sequences are aligned by index.
    pub fn zip_with(&self, other: &Self, op: impl Fn(C64, C64) -> C64) -> Result<Self> {
        match (self, other) {
            (Self::Sequence(a), Self::Sequence(b)) => {
                let (lo, hi) = match (a.window(), b.window()) {
                    (None, None) => return Ok(Self::Sequence(Sequence::zero())),
                    (Some(w), None) | (None, Some(w)) => w,
                    (Some(x), Some(y)) => (x.0.min(y.0), x.1.max(y.1)),
                };
                Ok(Self::Sequence(Sequence::new(lo, (lo..=hi).map(|n| op(a.get(n), b.get(n))).collect())))
            }
            (Self::Space { weights, values }, other) => {
                let w = other.space_values(weights)?;
                Ok(self.with_values(values.iter().zip(w).map(|(x, y)| op(*x, *y)).collect()))
            }
            (Self::Grid { grid, values }, Self::Grid { grid: g2, values: v2 }) if grid == g2 => {
                Ok(self.with_values(values.iter().zip(v2).map(|(x, y)| op(*x, *y)).collect()))
            }
            _ => Err(Error::DomainMismatch("functions live on different domains".into())),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Largest pointwise modulus of the difference.
    pub fn max_deviation(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.values().iter().map(|v| v.norm()).fold(0.0, f64::max))
    }
}

/// Trigonometric polynomial `x ↦ Σ c_k e^{2πikx}` on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    terms: Vec<(i64, C64)>,
}

impl TrigPoly {
    pub fn new(mut terms: Vec<(i64, C64)>) -> Self {
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(i64, C64)> = Vec::with_capacity(terms.len());
        for (k, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == k => last.1 += c,
                _ => merged.push((k, c)),
            }
        }
        Self { terms: merged }
    }

    pub fn character(k: i64) -> Self {
        Self::new(vec![(k, C64::new(1.0, 0.0))])
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![(0, c)])
    }

    pub fn terms(&self) -> &[(i64, C64)] {
        &self.terms
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.terms.iter().map(|(k, c)| c * C64::from_polar(1.0, 2.0 * PI * (*k as f64) * x.rem_euclid(1.0))).sum()
    }

    /// `x ↦ f(x + s)`, exact in coefficient space.
    pub fn shifted(&self, s: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(k, c)| (*k, c * C64::from_polar(1.0, 2.0 * PI * ((*k as f64) * s).rem_euclid(1.0))))
            .collect();
        Self { terms }
    }

    pub fn max_frequency(&self) -> i64 {
        self.terms.iter().map(|t| t.0.abs()).max().unwrap_or(0)
    }

    /// `‖f‖_{L²(circle)}` by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.1.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Piecewise-constant function with `values[i]` on `[breaks[i], breaks[i+1])`.
///
/// `periodic` wraps arguments into one period of length 1 starting at `breaks[0]`.
/// Otherwise the function is zero off the stored window when `zero_extended`, and undefined there if not.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    breaks: Vec<f64>,
    values: Vec<C64>,
    periodic: bool,
    zero_extended: bool,
}

impl PiecewiseConstant {
    pub fn new(breaks: Vec<f64>, values: Vec<C64>, periodic: bool, zero_extended: bool) -> Result<Self> {
        if breaks.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::BadParameter("need one more break than values".into()));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::BadParameter("breaks must be strictly increasing".into()));
        }
        if periodic && (breaks[breaks.len() - 1] - breaks[0] - 1.0).abs() > 1e-12 {
            return Err(Error::BadParameter("periodic breaks must span exactly one period".into()));
        }
        Ok(Self { breaks, values, periodic, zero_extended })
    }

    /// Indicator of `[a, b)` on the line, zero-extended.
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![C64::new(1.0, 0.0)], false, true)
    }

    /// Indicator of the arc `[a, b)` on the unit circle, `0 ≤ a < b ≤ 1`.
    pub fn arc(a: f64, b: f64) -> Result<Self> {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let mut breaks = vec![0.0];
        let mut values = Vec::new();
        if a > 0.0 {
            breaks.push(a);
            values.push(zero);
        }
        breaks.push(b);
        values.push(one);
        if b < 1.0 {
            breaks.push(1.0);
            values.push(zero);
        }
        Self::new(breaks, values, true, false)
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[C64] {
        &self.values
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn is_zero_extended(&self) -> bool {
        self.zero_extended
    }

    /// Stored window `[breaks[0], breaks[last]]`.
    pub fn window(&self) -> (f64, f64) {
        (self.breaks[0], self.breaks[self.breaks.len() - 1])
    }

    pub fn eval(&self, x: f64) -> Option<C64> {
        let (lo, hi) = self.window();
        let x = if self.periodic { lo + (x - lo).rem_euclid(1.0) } else { x };
        if x < lo || x >= hi {
            if self.periodic {
                // rem_euclid may round up to exactly one period.
                return Some(self.values[0]);
            }
            return if self.zero_extended { Some(C64::new(0.0, 0.0)) } else { None };
        }
        let i = self.breaks.partition_point(|b| *b <= x) - 1;
        Some(self.values[i])
    }

    /// `x ↦ f(x + s)` by translating breaks.
    pub fn shifted(&self, s: f64) -> Self {
        Self { breaks: self.breaks.iter().map(|b| b - s).collect(), ..self.clone() }
    }

    /// `∫|f|^p` over the stored window (one period when periodic).
    pub fn integral_abs_pow(&self, p: f64) -> f64 {
        self.breaks.windows(2).zip(&self.values).map(|(w, v)| (w[1] - w[0]) * v.norm().powf(p)).sum()
    }
}

/// The function classes a translation flow moves exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum FlowFunction {
    Trig(TrigPoly),
    Piecewise(PiecewiseConstant),
}

impl FlowFunction {
    pub fn eval(&self, x: f64) -> Option<C64> {
        match self {
            Self::Trig(p) => Some(p.eval(x)),
            Self::Piecewise(p) => p.eval(x),
        }
    }

    pub fn shifted(&self, s: f64) -> Self {
        match self {
            Self::Trig(p) => Self::Trig(p.shifted(s)),
            Self::Piecewise(p) => Self::Piecewise(p.shifted(s)),
        }
    }

    /// Discontinuities of `x ↦ f(x)` inside `[a, b]`.
    pub fn jumps_in(&self, a: f64, b: f64) -> Vec<f64> {
        match self {
            Self::Trig(_) => Vec::new(),
            Self::Piecewise(p) if p.is_periodic() => {
                let mut out = Vec::new();
                let base = p.breaks()[0];
                let first = ((a - base).floor()) as i64;
                let last = ((b - base).ceil()) as i64;
                for q in first..=last {
                    for br in &p.breaks()[..p.breaks().len() - 1] {
                        let t = br + q as f64;
                        if t >= a && t <= b {
                            out.push(t);
                        }
                    }
                }
                out
            }
            Self::Piecewise(p) => p.breaks().iter().copied().filter(|t| *t >= a && *t <= b).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_trim_and_get() {
        let s = Sequence::real(-2, &[0.0, 1.0, 2.0, 0.0]).trimmed();
        assert_eq!(s.window(), Some((-1, 0)));
        assert_eq!(s.get(0).re, 2.0);
        assert_eq!(s.get(5).re, 0.0);
    }

    #[test]
    fn arc_shift_wraps() {
        let f = FlowFunction::Piecewise(PiecewiseConstant::arc(0.0, 0.5).unwrap());
        let g = f.shifted(0.25);
        assert_eq!(g.eval(-0.1).unwrap().re, 1.0);
        assert_eq!(g.eval(0.9).unwrap().re, 1.0);
        assert_eq!(g.eval(0.2).unwrap().re, 1.0);
        assert_eq!(g.eval(0.3).unwrap().re, 0.0);
    }

    #[test]
    fn truncated_line_function_is_undefined_off_window() {
        let f = PiecewiseConstant::new(vec![0.0, 1.0], vec![C64::new(1.0, 0.0)], false, false).unwrap();
        assert!(f.eval(1.5).is_none());
        assert!(PiecewiseConstant::indicator(0.0, 1.0).unwrap().eval(1.5).is_some());
    }

    #[test]
    fn zip_rejects_foreign_space() {
        let a = SampleFunction::Space { weights: vec![1.0, 1.0].into(), values: vec![C64::new(1.0, 0.0); 2] };
        let b = SampleFunction::Space { weights: vec![1.0, 2.0].into(), values: vec![C64::new(1.0, 0.0); 2] };
        assert!(matches!(a.sub(&b), Err(Error::DomainMismatch(_))));
    }
}
