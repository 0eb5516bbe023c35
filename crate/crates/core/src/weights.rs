//! Finitely supported weights `n ↦ w(n)` and indexed weight families.

use crate::functions::Sequence;
use crate::kernels::{sample_discrete_family, DilationFamily, DiscreteKernel};
use crate::{Error, Result, C64};

/// A finitely supported weight on the integers.
pub trait Weights: Send + Sync {
    /// Inclusive support window, `None` for the zero weight.
    fn support(&self) -> Option<(i64, i64)>;

    fn weight(&self, n: i64) -> C64;

    /// `W(r) = Σ_{n ≡ r mod period} w(n)` for `r ∈ 0..period`.
    fn fold(&self, period: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); period];
        if let Some((lo, hi)) = self.support() {
            for n in lo..=hi {
                out[n.rem_euclid(period as i64) as usize] += self.weight(n);
            }
        }
        out
    }

    /// Values on `[lo, hi]` (zero outside the support).
    fn window(&self, lo: i64, hi: i64) -> Vec<C64> {
        (lo..=hi).map(|n| self.weight(n)).collect()
    }
}

/// Explicit complex weights on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence(pub Sequence);

impl WeightSequence {
    pub fn new(offset: i64, values: Vec<C64>) -> Self {
        Self(Sequence::new(offset, values))
    }

    pub fn real(offset: i64, values: &[f64]) -> Self {
        Self(Sequence::real(offset, values))
    }

    pub fn delta(at: i64) -> Self {
        Self(Sequence::delta(at))
    }

    /// Materialises any weight over its support.
    pub fn from_weights(w: &dyn Weights) -> Self {
        match w.support() {
            Some((lo, hi)) => Self::new(lo, w.window(lo, hi)),
            None => Self::new(0, Vec::new()),
        }
    }
}

impl Weights for WeightSequence {
    fn support(&self) -> Option<(i64, i64)> {
        self.0.window()
    }

    fn weight(&self, n: i64) -> C64 {
        self.0.get(n)
    }
}

/// `value/denominator` on `[lo, hi]`. Folds as `count/denominator`, so equal ratios fold to equal bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformWeights {
    pub lo: i64,
    pub hi: i64,
    pub denominator: f64,
}

impl Weights for UniformWeights {
    fn support(&self) -> Option<(i64, i64)> {
        (self.lo <= self.hi).then_some((self.lo, self.hi))
    }

    fn weight(&self, n: i64) -> C64 {
        if n < self.lo || n > self.hi {
            C64::new(0.0, 0.0)
        } else {
            C64::new(1.0 / self.denominator, 0.0)
        }
    }

    fn fold(&self, period: usize) -> Vec<C64> {
        let p = period as i64;
        let mut counts = vec![0i64; period];
        if self.lo <= self.hi {
            let full = (self.hi - self.lo + 1) / p;
            for c in counts.iter_mut() {
                *c = full;
            }
            for n in (self.lo + full * p)..=self.hi {
                counts[n.rem_euclid(p) as usize] += 1;
            }
        }
        counts.into_iter().map(|c| C64::new(c as f64 / self.denominator, 0.0)).collect()
    }
}

impl Weights for DiscreteKernel {
    fn support(&self) -> Option<(i64, i64)> {
        let (lo, hi) = DiscreteKernel::support(self);
        (lo <= hi).then_some((lo, hi))
    }

    fn weight(&self, n: i64) -> C64 {
        C64::new(self.value(n), 0.0)
    }

    fn fold(&self, period: usize) -> Vec<C64> {
        DiscreteKernel::fold(self, period).into_iter().map(|v| C64::new(v, 0.0)).collect()
    }
}

/// Weights indexed by an integer `j`.
pub trait WeightFamily: Send + Sync {
    fn member(&self, j: i64) -> Result<Box<dyn Weights>>;

    /// Construction fingerprint for reports.
    fn describe(&self) -> String;
}

/// `j ↦ 𝔇_{j,M,m}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertDifferenceFamily {
    pub big_m: u32,
    pub m: u32,
}

impl WeightFamily for HilbertDifferenceFamily {
    fn member(&self, j: i64) -> Result<Box<dyn Weights>> {
        Ok(Box::new(sample_discrete_family(self.big_m, self.m, j)?.2))
    }

    fn describe(&self) -> String {
        format!("hilbert-difference(M={},m={})", self.big_m, self.m)
    }
}

/// `j ↦ K_{j,m}` sampled on the integers.
impl WeightFamily for DilationFamily {
    fn member(&self, j: i64) -> Result<Box<dyn Weights>> {
        Ok(Box::new(self.sampled(j)?))
    }

    fn describe(&self) -> String {
        format!("sampled({},m={})", self.base, self.m)
    }
}

/// Explicit members `first, first+1, …`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitFamily {
    pub first: i64,
    pub members: Vec<WeightSequence>,
}

impl WeightFamily for ExplicitFamily {
    fn member(&self, j: i64) -> Result<Box<dyn Weights>> {
        let last = self.first + self.members.len() as i64 - 1;
        if j < self.first || j > last {
            return Err(Error::IndexOutOfRange { index: j, first: self.first, last });
        }
        Ok(Box::new(self.members[(j - self.first) as usize].clone()))
    }

    fn describe(&self) -> String {
        format!("explicit({} members from {})", self.members.len(), self.first)
    }
}

/// The same weight for every `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantFamily(pub WeightSequence);

impl WeightFamily for ConstantFamily {
    fn member(&self, _j: i64) -> Result<Box<dyn Weights>> {
        Ok(Box::new(self.0.clone()))
    }

    fn describe(&self) -> String {
        "constant".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::EM_THRESHOLD;

    #[test]
    fn uniform_fold_counts() {
        let w = UniformWeights { lo: 0, hi: 9, denominator: 10.0 };
        let f = w.fold(4);
        let direct = WeightSequence::from_weights(&w).fold(4);
        for (a, b) in f.iter().zip(&direct) {
            assert!((a - b).norm() < 1e-15);
        }
        assert_eq!(f[0].re, 3.0 / 10.0);
    }

    #[test]
    fn difference_fold_tail_matches_direct_sum() {
        // Just above the switch-over so the direct fold is still affordable.
        let (big_m, m, period) = (4u32, 2u32, 101usize);
        let j = (2.0 * (EM_THRESHOLD * (big_m as f64) * period as f64).log2()).ceil() as i64;
        let (_, _, diff) = sample_discrete_family(big_m, m, j).unwrap();
        let em = Weights::fold(&diff, period);
        let mut direct = vec![0.0; period];
        let (lo, hi) = diff.support();
        for n in lo..=hi {
            direct[n.rem_euclid(period as i64) as usize] += diff.value(n);
        }
        let err = em.iter().zip(&direct).map(|(a, b)| (a.re - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "fold mismatch {err}");
    }

    #[test]
    fn explicit_family_bounds() {
        let fam = ExplicitFamily { first: 1, members: vec![WeightSequence::delta(0)] };
        assert!(fam.member(1).is_ok());
        assert!(matches!(fam.member(2), Err(Error::IndexOutOfRange { index: 2, .. })));
    }
}
