mod common;

use coalition_core::stability::{certify_pair, check_no_blocking, conjugate_tighten, tighten_dual};
use coalition_core::{
    certify, iter_groups, max_welfare, min_imputation, DualStrategy, Imputation, SolverOptions, StabilityOptions,
    Verdict,
};
use rand::Rng;

use common::{random_game, rng};

const CAP: u64 = 1_000_000;

#[test]
fn tightening_stays_unblocked_and_never_costs_more() {
    let mut r = rng(2024);
    let opts = SolverOptions::default();
    for case in 0..50 {
        let game = random_game(&mut r, 4, 3);
        let k = game.space.len();
        // start from a generous payoff, then from the optimum
        let loose = Imputation((0..k).map(|_| game.surplus.max_value() + r.gen_range(0.0..3.0)).collect());
        let opt = min_imputation(&game, DualStrategy::Full, &opts).unwrap().imputation;
        for u in [loose, opt] {
            let v = tighten_dual(&u, &game, 1e-9, CAP).unwrap();
            assert!(v.value(&game.space) <= u.value(&game.space) + 1e-9, "case {case}");
            assert!(v.0.iter().zip(&u.0).all(|(a, b)| a <= b), "case {case}");
            let blocks = check_no_blocking(&v, &game.surplus, &game.space, game.bounds, 1e-7, CAP).unwrap();
            assert!(blocks.is_empty(), "case {case}: {blocks:?}");
            for n in game.bounds.sizes() {
                let sys = conjugate_tighten(&u, &game.surplus, &game.space, n, 1e-9, CAP).unwrap();
                assert!(sys.max_shortfall(&game.surplus, k) <= 1e-9, "case {case} size {n}");
            }
        }
    }
}

#[test]
fn certificates_are_sound() {
    let mut r = rng(99);
    let opts = SolverOptions::default();
    let stab = StabilityOptions::default();
    for case in 0..100 {
        let game = random_game(&mut r, 5, 4);
        let c = certify(&game, &stab, &opts).unwrap();
        assert_eq!(c.verdict, Verdict::Stable, "case {case}");

        // independent recheck of both conditions
        for g in iter_groups(game.space.len(), game.bounds) {
            assert!(c.imputation.group_payoff(&g) >= game.surplus.get(&g) - 1e-7, "case {case} {g}");
        }
        for (g, _) in c.assignment.support(1e-12) {
            assert!(c.imputation.group_payoff(g) <= game.surplus.get(g) + 1e-7, "case {case} {g}");
        }
        assert!(coalition_core::is_consistent(&c.assignment, &game.space, 1e-8).unwrap());

        // shifting one payoff by a visible amount must break the certificate
        let i = r.gen_range(0..game.space.len());
        for delta in [-0.05, 0.05] {
            let mut u = c.imputation.clone();
            u.0[i] += delta;
            let p = max_welfare(&game, &opts).unwrap();
            let bad = certify_pair(&game, p.assignment, u, p.value.0, &stab, CAP).unwrap();
            assert_eq!(bad.verdict, Verdict::Unstable, "case {case} delta {delta}");
        }
    }
}
