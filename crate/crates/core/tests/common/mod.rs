#![allow(dead_code)]

pub mod vertex;

use coalition_core::{iter_groups, Game, SizeBounds, SurplusTable, TypeSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random game with `1..=max_types` types of mass U[0.1, 2], sizes
/// `lo..=hi` inside `1..=max_size`, and surplus U[0, 10] on each permitted
/// group (about a third of the groups are left at 0).
pub fn random_game(rng: &mut impl Rng, max_types: usize, max_size: usize) -> Game {
    let k = rng.gen_range(1..=max_types);
    let hi = rng.gen_range(1..=max_size);
    let lo = rng.gen_range(1..=hi);
    random_game_with(rng, k, lo, hi)
}

pub fn random_game_with(rng: &mut impl Rng, k: usize, lo: usize, hi: usize) -> Game {
    let masses: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..2.0)).collect();
    let bounds = SizeBounds::new(lo, hi).unwrap();
    let surplus: SurplusTable = iter_groups(k, bounds)
        .filter_map(|g| rng.gen_bool(0.7).then(|| (g, rng.gen_range(0.0..10.0))))
        .collect();
    Game::new(TypeSpace::from_masses(&masses).unwrap(), bounds, surplus)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
