//! Seeded benchmark inputs.

use coalition_core::{iter_groups, Game, SizeBounds, SurplusTable, TypeSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense random game: `types` types with masses in [0.1, 2) and a surplus
/// in [0, 10) on every group of size `min..=max`.
pub fn dense_game(seed: u64, types: usize, min: usize, max: usize) -> Game {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let masses: Vec<f64> = (0..types).map(|_| rng.gen_range(0.1..2.0)).collect();
    let bounds = SizeBounds::new(min, max).expect("valid bounds");
    let surplus: SurplusTable = iter_groups(types, bounds)
        .map(|g| (g, rng.gen_range(0.0..10.0)))
        .collect();
    Game::new(TypeSpace::from_masses(&masses).expect("positive masses"), bounds, surplus)
}
