//! Seeded inputs shared by the benchmarks.

use ergodic_osc_core::random::{random_complex_function, random_isometry, random_phased_rotation};
use ergodic_osc_core::{FactoredIsometry, SampleFunction};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct Fixture {
    pub system: FactoredIsometry,
    pub f: SampleFunction,
    pub g: SampleFunction,
}

fn with_functions(system: FactoredIsometry, rng: &mut ChaCha8Rng) -> Fixture {
    let f = random_complex_function(system.space(), rng);
    let g = random_complex_function(system.space(), rng);
    Fixture { system, f, g }
}

/// Random permutation system; generally aperiodic at useful sizes.
pub fn random_fixture(n: usize, seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let system = random_isometry(n, &mut rng);
    with_functions(system, &mut rng)
}

/// Phased rotation of `Z_n`; periodic only when the phases happen to close up.
pub fn rotation_fixture(n: usize, seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let system = random_phased_rotation(n, 1, &mut rng);
    with_functions(system, &mut rng)
}

/// Unphased rotation of `Z_n`, period exactly `n`.
pub fn cyclic_fixture(n: usize, seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    with_functions(FactoredIsometry::rotation(n, 1), &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_reproducible() {
        assert_eq!(random_fixture(32, 4).f, random_fixture(32, 4).f);
        assert_eq!(cyclic_fixture(9, 1).system.period(100), Some(9));
    }
}
