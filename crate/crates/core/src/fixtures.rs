//! Small reference games with known solutions.

use crate::game::Game;
use crate::model::{Group, SizeBounds, TypeSpace};
use crate::surplus::{build_envy_surplus, envy_fixture, SurplusTable};

/// Two types, pairs only, surplus 1 for a mixed pair and 0 otherwise.
/// `Pi(mu) = min(mu_1, mu_2)`, not differentiable on the diagonal.
pub fn nondiff(mu1: f64, mu2: f64) -> Game {
    Game::new(
        TypeSpace::from_masses(&[mu1, mu2]).expect("positive masses"),
        SizeBounds::exactly(2).expect("valid bounds"),
        SurplusTable::new().with(&[0, 1], 1.0).expect("finite"),
    )
}

/// Three unit-mass types with groups of size 2 or 3. Welfare 6.
pub fn unify() -> Game {
    let surplus = SurplusTable::new()
        .with(&[0, 1, 1], 9.0)
        .and_then(|t| t.with(&[2, 2, 2], 4.0))
        .and_then(|t| t.with(&[0, 1], 2.0))
        .and_then(|t| t.with(&[2, 2], 3.0))
        .expect("finite");
    Game::new(
        TypeSpace::from_masses(&[1.0, 1.0, 1.0]).expect("positive masses"),
        SizeBounds::new(2, 3).expect("valid bounds"),
        surplus,
    )
}

/// The thirteen size-6 multisets listed for [`unify`]: exactly those that
/// replicate some pair or triple.
pub fn unify_listed_fractional() -> Vec<Group> {
    let lists: [&[usize]; 13] = [
        &[0, 0, 0, 0, 0, 0],
        &[1, 1, 1, 1, 1, 1],
        &[2, 2, 2, 2, 2, 2],
        &[0, 0, 0, 1, 1, 1],
        &[0, 0, 0, 2, 2, 2],
        &[1, 1, 1, 2, 2, 2],
        &[0, 0, 0, 0, 1, 1],
        &[0, 0, 0, 0, 2, 2],
        &[1, 1, 1, 1, 0, 0],
        &[1, 1, 1, 1, 2, 2],
        &[2, 2, 2, 2, 0, 0],
        &[2, 2, 2, 2, 1, 1],
        &[0, 0, 1, 1, 2, 2],
    ];
    lists.iter().map(|l| Group::new(l.to_vec())).collect()
}

/// One unit-mass type with `s_n = n - 1` for every size up to `max_size`.
pub fn unbounded(max_size: usize) -> Game {
    let surplus = (1..=max_size)
        .map(|n| (Group::uniform(0, n), n as f64 - 1.0))
        .collect();
    Game::new(
        TypeSpace::from_masses(&[1.0]).expect("positive masses"),
        SizeBounds::new(1, max_size).expect("valid bounds"),
        surplus,
    )
}

/// The envy economy as a game on unit masses with singletons and pairs.
pub fn envy(opt_tol: f64) -> Game {
    let spec = envy_fixture();
    let surplus = build_envy_surplus(&spec, 2, opt_tol).expect("valid economy");
    let labels = spec.agents.iter().map(|a| a.label.clone()).collect();
    Game::new(
        TypeSpace::new(labels, vec![1.0; spec.agents.len()]).expect("valid space"),
        SizeBounds::new(1, 2).expect("valid bounds"),
        surplus,
    )
}
