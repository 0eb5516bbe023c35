//! Seeded generators for systems, functions, sequences and breakpoints.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::functions::{SampleFunction, Sequence};
use crate::systems::{make_isometry, FactoredIsometry, Permutation, WeightedSpace};
use crate::{Result, C64};

fn phase<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, std::f64::consts::TAU * rng.gen::<f64>())
}

pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    let mut map: Vec<usize> = (0..n).collect();
    map.shuffle(rng);
    Permutation::new(map).expect("a shuffle is a bijection")
}

/// Random permutation, weights in `[½, 2)` constant on its cycles, and random unimodular phases.
pub fn random_isometry<R: Rng + ?Sized>(n: usize, rng: &mut R) -> FactoredIsometry {
    let perm = random_permutation(n, rng);
    let mut weights = vec![0.0; n];
    for cycle in perm.cycles() {
        let w = rng.gen_range(0.5..2.0);
        for x in cycle {
            weights[x] = w;
        }
    }
    let space = WeightedSpace::with_weights(weights).expect("positive weights");
    let multiplier = (0..n).map(|_| phase(rng)).collect();
    make_isometry(space, multiplier, perm).expect("cycle-constant weights are preserved")
}

/// Rotation `x ↦ x + step` on `Z_n` with counting weights and random phases.
pub fn random_phased_rotation<R: Rng + ?Sized>(n: usize, step: i64, rng: &mut R) -> FactoredIsometry {
    let multiplier = (0..n).map(|_| phase(rng)).collect();
    make_isometry(WeightedSpace::uniform(n), multiplier, Permutation::rotation(n, step)).expect("rotation is measure preserving")
}

/// `|f| ≡ 1` with random phases.
pub fn random_unit_function<R: Rng + ?Sized>(space: &WeightedSpace, rng: &mut R) -> SampleFunction {
    space.function((0..space.len()).map(|_| phase(rng)).collect()).expect("length matches")
}

/// Values in `{−1, 1}`.
pub fn random_sign_function<R: Rng + ?Sized>(space: &WeightedSpace, rng: &mut R) -> SampleFunction {
    let v: Vec<f64> = (0..space.len()).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
    space.real_function(&v).expect("length matches")
}

/// Values in the closed unit disk with `‖f‖_∞ = 1` (one point pinned to modulus 1).
pub fn random_unit_sup_function<R: Rng + ?Sized>(space: &WeightedSpace, rng: &mut R) -> SampleFunction {
    let n = space.len();
    let mut v: Vec<C64> = (0..n).map(|_| phase(rng) * rng.gen::<f64>()).collect();
    if n > 0 {
        let at = rng.gen_range(0..n);
        v[at] = phase(rng);
    }
    space.function(v).expect("length matches")
}

/// Real and imaginary parts uniform on `[−1, 1)`.
pub fn random_complex_function<R: Rng + ?Sized>(space: &WeightedSpace, rng: &mut R) -> SampleFunction {
    let v = (0..space.len()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    space.function(v).expect("length matches")
}

pub fn random_sign_sequence<R: Rng + ?Sized>(offset: i64, len: usize, rng: &mut R) -> Sequence {
    let v: Vec<f64> = (0..len).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
    Sequence::real(offset, &v)
}

pub fn random_complex_sequence<R: Rng + ?Sized>(offset: i64, len: usize, rng: &mut R) -> Sequence {
    Sequence::new(offset, (0..len).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
}

/// `count` strictly increasing integers drawn from `1..=max`.
pub fn random_breakpoints<R: Rng + ?Sized>(count: usize, max: i64, rng: &mut R) -> Result<Vec<i64>> {
    if count < 2 || (max as usize) < count {
        return Err(crate::Error::BadParameter(format!("cannot draw {count} breakpoints from 1..={max}")));
    }
    let mut v = rand::seq::index::sample(rng, max as usize, count).into_iter().map(|i| i as i64 + 1).collect::<Vec<_>>();
    v.sort_unstable();
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_isometry_is_valid_and_reproducible() {
        let a = random_isometry(40, &mut ChaCha8Rng::seed_from_u64(3));
        let b = random_isometry(40, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a.permutation(), b.permutation());
        assert_eq!(a.multiplier(), b.multiplier());
    }

    #[test]
    fn breakpoints_strict() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let b = random_breakpoints(6, 20, &mut rng).unwrap();
            assert!(b.windows(2).all(|w| w[0] < w[1]) && b[0] >= 1 && b[5] <= 20);
        }
    }

    #[test]
    fn unit_sup_has_sup_one() {
        let s = WeightedSpace::uniform(17);
        let f = random_unit_sup_function(&s, &mut ChaCha8Rng::seed_from_u64(1));
        let m = f.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!((m - 1.0).abs() < 1e-15);
    }
}
