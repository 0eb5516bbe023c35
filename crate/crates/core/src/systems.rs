//! Finite weighted spaces, factored isometries `Uf = h·(f∘π)`, their integer powers, and translation flows.

use std::collections::HashMap;
use std::sync::Arc;

use crate::functions::{FlowFunction, Grid, SampleFunction};
use crate::{Error, Result, C64};

/// Unimodularity tolerance for multipliers.
pub const UNIT_TOL: f64 = 1e-12;

/// Finite point set with strictly positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSpace {
    ids: Vec<u64>,
    weights: Arc<[f64]>,
}

impl WeightedSpace {
    pub fn new(ids: Vec<u64>, weights: Vec<f64>) -> Result<Self> {
        if ids.len() != weights.len() {
            return Err(Error::BadParameter("ids and weights differ in length".into()));
        }
        if let Some(i) = weights.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::BadParameter(format!("weight at index {i} is not positive and finite")));
        }
        let mut seen = ids.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::BadParameter("point identifiers repeat".into()));
        }
        Ok(Self { ids, weights: weights.into() })
    }

    /// Points `0..weights.len()`.
    pub fn with_weights(weights: Vec<f64>) -> Result<Self> {
        Self::new((0..weights.len() as u64).collect(), weights)
    }

    /// Counting measure on `n` points.
    pub fn uniform(n: usize) -> Self {
        Self { ids: (0..n as u64).collect(), weights: vec![1.0; n].into() }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn weights(&self) -> &Arc<[f64]> {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn function(&self, values: Vec<C64>) -> Result<SampleFunction> {
        if values.len() != self.len() {
            return Err(Error::DomainMismatch(format!("{} values for {} points", values.len(), self.len())));
        }
        Ok(SampleFunction::Space { weights: self.weights.clone(), values })
    }

    pub fn real_function(&self, values: &[f64]) -> Result<SampleFunction> {
        self.function(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn constant(&self, c: C64) -> SampleFunction {
        SampleFunction::Space { weights: self.weights.clone(), values: vec![c; self.len()] }
    }

    /// Indicator of the point at index `i`.
    pub fn indicator(&self, i: usize) -> SampleFunction {
        let mut v = vec![C64::new(0.0, 0.0); self.len()];
        v[i] = C64::new(1.0, 0.0);
        SampleFunction::Space { weights: self.weights.clone(), values: v }
    }
}

/// Bijection of `0..n`, `x ↦ map[x]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut hit = vec![false; map.len()];
        for &y in &map {
            if y >= map.len() || hit[y] {
                return Err(Error::NonBijective);
            }
            hit[y] = true;
        }
        Ok(Self(map))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// `x ↦ x + step mod n`.
    pub fn rotation(n: usize, step: i64) -> Self {
        let s = step.rem_euclid(n.max(1) as i64) as usize;
        Self((0..n).map(|x| (x + s) % n).collect())
    }

    /// Builds from disjoint cycles; unlisted points are fixed.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut map: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        for c in cycles {
            for (i, &x) in c.iter().enumerate() {
                if x >= n || used[x] {
                    return Err(Error::NonBijective);
                }
                used[x] = true;
                map[x] = c[(i + 1) % c.len()];
            }
        }
        Ok(Self(map))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (x, &y) in self.0.iter().enumerate() {
            inv[y] = x;
        }
        Self(inv)
    }

    /// `x ↦ other(self(x))`.
    pub fn then(&self, other: &Self) -> Self {
        Self(self.0.iter().map(|&y| other.0[y]).collect())
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.0.len()];
        let mut out = Vec::new();
        for start in 0..self.0.len() {
            if seen[start] {
                continue;
            }
            let mut c = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                c.push(x);
                x = self.0[x];
            }
            out.push(c);
        }
        out
    }

    /// Least common multiple of the cycle lengths, `None` beyond `cap`.
    pub fn order(&self, cap: u64) -> Option<u64> {
        let mut l: u64 = 1;
        for c in self.cycles() {
            let n = c.len() as u64;
            l = l / gcd(l, n) * n;
            if l > cap {
                return None;
            }
        }
        Some(l)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(Uf)(x) = h(x)·f(π(x))` with `|h| = 1` and `π` weight-preserving.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredIsometry {
    space: WeightedSpace,
    forward: IsometryPower,
    backward: IsometryPower,
}

/// Validates and assembles a factored isometry.
pub fn make_isometry(space: WeightedSpace, multiplier: Vec<C64>, permutation: Permutation) -> Result<FactoredIsometry> {
    let n = space.len();
    if permutation.len() != n || multiplier.len() != n {
        return Err(Error::DomainMismatch("multiplier or permutation size differs from the space".into()));
    }
    Permutation::new(permutation.0.clone())?;
    if let Some((index, h)) = multiplier.iter().enumerate().find(|(_, h)| (h.norm() - 1.0).abs() > UNIT_TOL) {
        return Err(Error::NotUnimodular { index, modulus: h.norm() });
    }
    let w = space.weights();
    if let Some(index) = (0..n).find(|&x| w[permutation.apply(x)] != w[x]) {
        return Err(Error::NotMeasurePreserving { index });
    }
    let inverse = permutation.inverse();
    let back_mult = (0..n).map(|y| multiplier[inverse.apply(y)].conj()).collect();
    Ok(FactoredIsometry {
        space,
        forward: IsometryPower { exponent: 1, multiplier, permutation },
        backward: IsometryPower { exponent: -1, multiplier: back_mult, permutation: inverse },
    })
}

impl FactoredIsometry {
    /// Rotation `x ↦ x + step` on `Z_n` with counting measure and multiplier 1.
    pub fn rotation(n: usize, step: i64) -> Self {
        make_isometry(WeightedSpace::uniform(n), vec![C64::new(1.0, 0.0); n], Permutation::rotation(n, step))
            .expect("rotation is a valid isometry")
    }

    pub fn identity(space: WeightedSpace) -> Self {
        let n = space.len();
        make_isometry(space, vec![C64::new(1.0, 0.0); n], Permutation::identity(n)).expect("identity is valid")
    }

    pub fn space(&self) -> &WeightedSpace {
        &self.space
    }

    pub fn multiplier(&self) -> &[C64] {
        &self.forward.multiplier
    }

    pub fn permutation(&self) -> &Permutation {
        &self.forward.permutation
    }

    pub fn forward(&self) -> &IsometryPower {
        &self.forward
    }

    pub fn backward(&self) -> &IsometryPower {
        &self.backward
    }

    /// `U f`.
    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        self.forward.apply_values(f)
    }

    /// `U⁻¹ f`.
    pub fn apply_inverse(&self, f: &[C64]) -> Vec<C64> {
        self.backward.apply_values(f)
    }

    /// Smallest `P ≤ cap` with `U^P = I` (multiplier within 1e-13 of 1).
    pub fn period(&self, cap: u64) -> Option<usize> {
        let p = self.forward.permutation.order(cap)?;
        let power = isometry_power(self, p as i64);
        power.multiplier.iter().all(|h| (h - 1.0).norm() <= 1e-13).then_some(p as usize)
    }

    /// Restriction to an invariant sub-space given by point ids.
    pub fn restrict(&self, sub: &WeightedSpace) -> Result<Self> {
        let index: HashMap<u64, usize> = self.space.ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let local: HashMap<u64, usize> = sub.ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let mut mult = Vec::with_capacity(sub.len());
        let mut map = Vec::with_capacity(sub.len());
        for id in &sub.ids {
            let x = *index.get(id).ok_or_else(|| Error::DomainMismatch(format!("point {id} not in the space")))?;
            let y = self.forward.permutation.apply(x);
            let target = *local.get(&self.space.ids[y]).ok_or_else(|| Error::DomainMismatch("sub-space is not invariant".into()))?;
            map.push(target);
            mult.push(self.forward.multiplier[x]);
        }
        make_isometry(sub.clone(), mult, Permutation::new(map)?)
    }
}

/// `U^j` in factored form: `(U^j f)(x) = h_j(x)·f(π_j(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryPower {
    pub exponent: i64,
    pub multiplier: Vec<C64>,
    pub permutation: Permutation,
}

impl IsometryPower {
    pub fn identity(n: usize) -> Self {
        Self { exponent: 0, multiplier: vec![C64::new(1.0, 0.0); n], permutation: Permutation::identity(n) }
    }

    /// `U^j ∘ U^k = U^{j+k}`: `π_{j+k} = π_k∘π_j`, `h_{j+k} = h_j·(h_k∘π_j)`.
    pub fn compose(&self, other: &Self) -> Self {
        let permutation = self.permutation.then(&other.permutation);
        let multiplier = self
            .multiplier
            .iter()
            .zip(self.permutation.as_slice())
            .map(|(h, &y)| h * other.multiplier[y])
            .collect();
        Self { exponent: self.exponent + other.exponent, multiplier, permutation }
    }

    /// Automorphism part `Φ_j f = f∘π_j`.
    pub fn automorphism(&self, f: &[C64]) -> Vec<C64> {
        self.permutation.as_slice().iter().map(|&y| f[y]).collect()
    }

    pub fn apply_values(&self, f: &[C64]) -> Vec<C64> {
        self.multiplier.iter().zip(self.permutation.as_slice()).map(|(h, &y)| h * f[y]).collect()
    }
}

/// `U^j` for any integer `j`, by binary powering.
pub fn isometry_power(u: &FactoredIsometry, j: i64) -> IsometryPower {
    let mut base = if j >= 0 { u.forward.clone() } else { u.backward.clone() };
    let mut e = j.unsigned_abs();
    let mut acc = IsometryPower::identity(u.space.len());
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.compose(&base);
        }
        e >>= 1;
        if e > 0 {
            base = base.compose(&base);
        }
    }
    acc
}

/// `U^j f` on the space.
pub fn apply_power(p: &IsometryPower, f: &SampleFunction) -> Result<SampleFunction> {
    let v = match f {
        SampleFunction::Space { values, .. } if values.len() == p.multiplier.len() => values,
        _ => return Err(Error::DomainMismatch("power and function live on different spaces".into())),
    };
    Ok(f.with_values(p.apply_values(v)))
}

/// Union of all permutation orbits meeting `supp f`.
pub fn orbit_support_restriction(space: &WeightedSpace, u: &FactoredIsometry, f: &SampleFunction) -> Result<WeightedSpace> {
    let v = f.space_values(space.weights())?;
    let mut keep = vec![false; space.len()];
    for cycle in u.permutation().cycles() {
        if cycle.iter().any(|&x| v[x] != C64::new(0.0, 0.0)) {
            for x in cycle {
                keep[x] = true;
            }
        }
    }
    let idx: Vec<usize> = (0..space.len()).filter(|&x| keep[x]).collect();
    WeightedSpace::new(idx.iter().map(|&x| space.ids[x]).collect(), idx.iter().map(|&x| space.weights[x]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowDomain {
    /// Unit circumference.
    Circle,
    Line,
}

/// `(U_t f)(x) = f(x + rate·t)` sampled on a quadrature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationFlow {
    pub domain: FlowDomain,
    pub grid: Grid,
    pub rate: f64,
}

impl TranslationFlow {
    pub fn new(domain: FlowDomain, grid: Grid, rate: f64) -> Result<Self> {
        if !rate.is_finite() {
            return Err(Error::BadParameter("flow rate must be finite".into()));
        }
        Ok(Self { domain, grid, rate })
    }

    /// Checks that `f` belongs to this flow's function class.
    pub fn admits(&self, f: &FlowFunction) -> Result<()> {
        match (self.domain, f) {
            (FlowDomain::Circle, FlowFunction::Trig(_)) => Ok(()),
            (FlowDomain::Circle, FlowFunction::Piecewise(p)) if p.is_periodic() => Ok(()),
            (FlowDomain::Line, FlowFunction::Piecewise(p)) if !p.is_periodic() => Ok(()),
            _ => Err(Error::DomainMismatch("function class does not match the flow domain".into())),
        }
    }

    /// Values of `f` on the grid nodes.
    pub fn sample(&self, f: &FlowFunction) -> Result<SampleFunction> {
        let values = self.grid.nodes().iter().map(|&x| f.eval(x).ok_or(Error::OutOfDomain)).collect::<Result<Vec<_>>>()?;
        Ok(SampleFunction::Grid { grid: self.grid.clone(), values })
    }
}

/// `x ↦ f(x + rate·t)`, exact for both function classes.
pub fn flow_sample(flow: &TranslationFlow, f: &FlowFunction, t: f64) -> Result<FlowFunction> {
    flow.admits(f)?;
    let g = f.shifted(flow.rate * t);
    if let FlowFunction::Piecewise(p) = &g {
        if !p.is_periodic() && !p.is_zero_extended() && flow.grid.nodes().iter().any(|&x| p.eval(x).is_none()) {
            return Err(Error::OutOfDomain);
        }
    }
    Ok(g)
}
