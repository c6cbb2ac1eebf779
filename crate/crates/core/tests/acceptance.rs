//! Acceptance run: one PASS/FAIL line per criterion, each with a fixed
//! tolerance and wall-clock limit. Exits non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use coalition_core::continuum::{
    continuum_dual, continuum_max_welfare, grid_groups, trivial_assignment, ContinuumGame, ContinuumSurplus,
};
use coalition_core::stability::check_no_blocking;
use coalition_core::surplus::{envy_fixture, envy_group_optimum};
use coalition_core::transport::{
    assignment_to_plan, change_of_variable_coeff, fractional_surplus, orbit, plan_to_assignment, symmetrize_plan,
    transport_value, unified_size, unknown_counts, ChangeOfVariable, FractionalGroup, LMode, RationalMeasure,
    TuplePlan,
};
use coalition_core::stability::tighten_dual;
use coalition_core::{
    build_envy_surplus, certify, count_groups, fixtures, max_welfare, min_imputation, DualStrategy, Game, Group,
    SizeBounds, SolverOptions, StabilityOptions, TypeSpace, Verdict,
};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rand::Rng;

use common::{random_game, rng};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn welfare(game: &Game) -> Result<f64, String> {
    Ok(max_welfare(game, &opts()).map_err(err)?.value.0)
}

fn two_type_kink() -> Check {
    let tol = 1e-9;
    for ((a, b), want) in [((1.0, 1.0), 1.0), ((1.1, 1.0), 1.0), ((0.9, 1.0), 0.9)] {
        let got = welfare(&fixtures::nondiff(a, b))?;
        ensure((got - want).abs() <= tol, format!("welfare at ({a}, {b}) is {got}, want {want}"))?;
    }
    let u = min_imputation(&fixtures::nondiff(2.0, 1.0), DualStrategy::Full, &opts()).map_err(err)?.imputation;
    ensure(u.0 == vec![0.0, 1.0], format!("payoff at (2, 1) is {:?}, want [0, 1]", u.0))?;
    let u = min_imputation(&fixtures::nondiff(1.0, 1.0), DualStrategy::Full, &opts()).map_err(err)?.imputation;
    ensure(
        (u.0[0] + u.0[1] - 1.0).abs() <= tol && u.0.iter().all(|&x| x >= 0.0),
        format!("payoff at (1, 1) is {:?}", u.0),
    )?;
    Ok(format!("welfare 1, 1, 0.9; payoffs (0, 1) and {:?}", u.0))
}

fn three_type_reformulation() -> Check {
    let game = fixtures::unify();
    let (vertex, bases) = common::vertex::best_vertex(&game);
    ensure(
        vertex == BigRational::from_integer(BigInt::from(6)),
        format!("vertex oracle gives {vertex}"),
    )?;
    let direct = welfare(&game)?;
    let l = unified_size(game.bounds, LMode::Lcm);
    ensure(l == 6, format!("unified size {l}"))?;
    let t = transport_value(&game.space, game.bounds, &game.surplus, l, &opts()).map_err(err)?;
    ensure((direct - 6.0).abs() <= 1e-7, format!("direct value {direct}"))?;
    ensure((t.value - 6.0).abs() <= 1e-7, format!("transport value {}", t.value))?;
    let g = |m: &[usize]| Group::new(m.to_vec());
    for (fg, want) in [(g(&[0, 0, 0, 1, 1, 1]), 3.0), (g(&[0, 0, 1, 1, 1, 1]), 9.0), (g(&[2; 6]), 4.5)] {
        let got = fractional_surplus(&fg, &game.surplus, game.bounds, 6);
        ensure(got == want, format!("surplus of {fg} is {got}, want {want}"))?;
    }
    let label = FractionalGroup::new(g(&[2; 6]), &game.surplus, game.bounds, 6).r_label;
    ensure(label == 2, format!("the all-type-3 multiset has label {label}"))?;
    Ok(format!("direct {direct:.9}, transport {:.9}, best of {bases} bases = {vertex}", t.value))
}

fn envy_surplus() -> Check {
    let spec = envy_fixture();
    let table = build_envy_surplus(&spec, 2, 1e-10).map_err(err)?;
    let s2 = table.get(&Group::new(vec![1]));
    let s22 = table.get(&Group::new(vec![1, 1]));
    ensure(s2 == 1000.0, format!("s([2]) = {s2}"))?;
    ensure(s22 == 2000.0, format!("s([2,2]) = {s22}"))?;
    let mixed = envy_group_optimum(&spec, &Group::new(vec![0, 1]), 1e-10).map_err(err)?;
    ensure((mixed.value - 900.083).abs() <= 0.01, format!("s([1,2]) = {}", mixed.value))?;
    let x1 = mixed.consumption[0];
    ensure((x1 - 0.03).abs() <= 0.01, format!("type-1 consumption {x1}"))?;
    Ok(format!("s([2]) = {s2}, s([2,2]) = {s22}, s([1,2]) = {:.4} at x1 = {x1:.4}", mixed.value))
}

fn unknown_count_arithmetic() -> Check {
    let bounds = SizeBounds::new(1, 4).map_err(err)?;
    let direct = count_groups(1000, bounds);
    ensure(direct == BigUint::from(42_084_793_750u64), format!("direct count {direct}"))?;
    let counts = unknown_counts(1000, bounds);
    let reduced = &counts.factorial.reduced_bound;
    ensure(*reduced == BigUint::from(25_000u32), format!("reduced bound {reduced}"))?;
    Ok(format!("direct {direct}, reduced {reduced} (lcm mode {})", counts.lcm.reduced_bound))
}

fn strong_duality_suite() -> Check {
    let mut r = rng(5);
    let stab = StabilityOptions::default();
    let mut worst = 0.0f64;
    for case in 0..200 {
        let game = random_game(&mut r, 5, 4);
        let c = certify(&game, &stab, &opts()).map_err(err)?;
        let rel = c.gap.abs() / c.welfare.abs().max(1.0);
        worst = worst.max(rel);
        ensure(rel <= 1e-7, format!("instance {case}: relative gap {rel}"))?;
        ensure(c.verdict == Verdict::Stable, format!("instance {case}: verdict {:?}", c.verdict))?;
    }
    Ok(format!("200 instances stable, worst relative gap {worst:.2e}"))
}

fn change_of_variable_suite() -> Check {
    let two = BigRational::from_integer(BigInt::from(2));
    let c = change_of_variable_coeff(&Group::new(vec![0, 0]));
    ensure(c == two, format!("c_2(i,i) = {c}"))?;
    let mut r = rng(6);
    let mut checked = 0;
    for k in 1..=3 {
        for n in 1..=3 {
            for _ in 0..5 {
                let tau: RationalMeasure<Group> = coalition_core::model::Multisets::new(k, n)
                    .filter_map(|g| {
                        r.gen_bool(0.7).then(|| {
                            (g, BigRational::new(BigInt::from(r.gen_range(1..40)), BigInt::from(r.gen_range(1..9))))
                        })
                    })
                    .collect();
                let cv = ChangeOfVariable::new(n);
                let gamma = cv.pull_back(&tau);
                let pushed = cv.push_forward(&gamma);
                let scale = BigRational::from_integer(BigInt::from(n));
                for (g, w) in &tau {
                    ensure(pushed.get(g) == Some(&(w * &scale)), format!("orbit sum of {g} is wrong"))?;
                }
                ensure(pushed.len() == tau.len(), "push-forward created new groups")?;
                let marginal = cv.group_marginal(&tau, k);
                ensure(ChangeOfVariable::marginal(&gamma, 0, k) == marginal, "marginal mismatch")?;
                checked += 1;
            }
        }
    }
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let k = r.gen_range(2..=3);
        let l = r.gen_range(2..=3);
        let values: Vec<f64> = (0..k * k * k).map(|_| r.gen_range(0.0..10.0)).collect();
        let s = |t: &[usize]| {
            let g = Group::new(t.to_vec());
            g.members().iter().fold(0usize, |acc, &i| acc * k + i) as f64 + values[g.members()[0]]
        };
        let mut tp = TuplePlan::new();
        for fg in coalition_core::model::Multisets::new(k, l) {
            for t in orbit(&fg) {
                tp.add(t, r.gen_range(0.0..1.0));
            }
        }
        let sym = symmetrize_plan(&tp, k, None, 0.0).map_err(err)?;
        let (a, b) = (tp.objective(s), sym.tuples.objective(s));
        worst = worst.max((a - b).abs() / a.abs().max(1.0));
    }
    ensure(worst <= 1e-12, format!("symmetrization changed an objective by {worst:.2e}"))?;
    Ok(format!("{checked} exact pull-back checks, c_2(i,i) = 2, symmetrization drift {worst:.1e}"))
}

fn unbounded_sizes() -> Check {
    let mut last = f64::NEG_INFINITY;
    let mut values = Vec::new();
    for n in 2..=8 {
        let v = min_imputation(&fixtures::unbounded(n), DualStrategy::Full, &opts()).map_err(err)?.value;
        let want = (n as f64 - 1.0) / n as f64;
        ensure((v - want).abs() <= 1e-9, format!("N = {n}: value {v}, want {want}"))?;
        ensure(v > last, format!("N = {n}: value {v} does not increase"))?;
        last = v;
        values.push(format!("{v:.4}"));
    }
    Ok(format!("values {}", values.join(", ")))
}

fn continuum_suite() -> Check {
    let space = TypeSpace::from_masses(&[0.25, 0.75]).map_err(err)?;
    let game = ContinuumGame::new(space, 0.25, 0.75).map_err(err)?;
    let trivial = trivial_assignment(&game);
    ensure(
        trivial.residual(game.space()).iter().all(|&r| r == 0.0),
        format!("trivial residual {:?}", trivial.residual(game.space())),
    )?;
    let coef = vec![1.0, 3.0];
    let linear = ContinuumSurplus::Linear { coef: coef.clone() };
    let total: f64 = coef.iter().zip(game.space().masses()).map(|(a, m)| a * m).sum();
    let mut previous = [f64::NEG_INFINITY; 2];
    for m in [1, 2, 4] {
        let cat = grid_groups(&game, m, 100_000).map_err(err)?;
        let vals = linear.evaluate(&cat);
        let p = continuum_max_welfare(&game, &vals, &cat, &opts()).map_err(err)?;
        ensure((p.value - total).abs() <= 1e-9, format!("m = {m}: linear welfare {}", p.value))?;
        ensure(p.assignment.is_consistent(game.space(), 1e-9), format!("m = {m}: inconsistent assignment"))?;
        for (nu, v) in cat.iter().zip(&vals) {
            let paid: f64 = coef.iter().zip(&nu.0).map(|(a, x)| a * x).sum();
            ensure(paid >= v - 1e-12, format!("m = {m}: u = a is blocked"))?;
        }
        let d = continuum_dual(&game, &vals, &cat, &opts()).map_err(err)?;
        ensure((d.value - p.value).abs() <= 1e-7, format!("m = {m}: linear gap {}", d.value - p.value))?;

        let concave: Vec<f64> = cat.iter().map(|nu| nu.0.iter().map(|x| x.sqrt()).sum()).collect();
        for (slot, vals) in [ContinuumSurplus::MassSquared.evaluate(&cat), concave].into_iter().enumerate() {
            let p = continuum_max_welfare(&game, &vals, &cat, &opts()).map_err(err)?;
            let d = continuum_dual(&game, &vals, &cat, &opts()).map_err(err)?;
            ensure((d.value - p.value).abs() <= 1e-7, format!("m = {m}: gap {}", d.value - p.value))?;
            ensure(p.value >= previous[slot] - 1e-9, format!("m = {m}: welfare fell to {}", p.value))?;
            previous[slot] = p.value;
        }
    }
    Ok(format!("linear welfare {total} at m = 1, 2, 4; refined values {previous:?}"))
}

fn round_trips() -> Check {
    for game in [fixtures::nondiff(1.0, 1.0), fixtures::unify()] {
        let p = max_welfare(&game, &opts()).map_err(err)?;
        let l = unified_size(game.bounds, LMode::Lcm) as usize;
        let plan = assignment_to_plan(&p.assignment, game.bounds, l).map_err(err)?;
        let back = plan_to_assignment(&plan, &game.surplus, game.bounds, 1e-12).map_err(err)?;
        let w = game.surplus.welfare(&back);
        ensure((w - p.value.0).abs() <= 1e-9, format!("round trip welfare {w} vs {}", p.value.0))?;
    }
    let mut r = rng(9);
    for case in 0..50 {
        let game = random_game(&mut r, 4, 3);
        let k = game.space.len();
        let u = coalition_core::Imputation((0..k).map(|_| game.surplus.max_value() + r.gen_range(0.0..2.0)).collect());
        let v = tighten_dual(&u, &game, 1e-9, 1_000_000).map_err(err)?;
        ensure(
            v.value(&game.space) <= u.value(&game.space) + 1e-12,
            format!("instance {case}: tightening raised the value"),
        )?;
        let blocks = check_no_blocking(&v, &game.surplus, &game.space, game.bounds, 1e-7, 1_000_000).map_err(err)?;
        ensure(blocks.is_empty(), format!("instance {case}: tightened payoff is blocked"))?;
    }
    Ok("welfare kept on both optima; 50 tightenings stay unblocked".into())
}

type Criterion = (&'static str, Duration, fn() -> Check);

fn main() {
    let criteria: [Criterion; 9] = [
        ("two-type kink and payoffs", Duration::from_secs(1), two_type_kink),
        ("three-type direct and transport optimum", Duration::from_secs(1), three_type_reformulation),
        ("envy economy surplus", Duration::from_secs(1), envy_surplus),
        ("unknown-count arithmetic", Duration::from_secs(1), unknown_count_arithmetic),
        ("strong duality on random games", Duration::from_secs(60), strong_duality_suite),
        ("change of variable and symmetrization", Duration::from_secs(10), change_of_variable_suite),
        ("growing group sizes", Duration::from_secs(10), unbounded_sizes),
        ("continuum catalog", Duration::from_secs(10), continuum_suite),
        ("round trips and tightening", Duration::from_secs(30), round_trips),
    ];
    let mut failed = 0;
    for (idx, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let outcome = match result {
            Ok(detail) if elapsed <= *limit => Ok(detail),
            Ok(detail) => Err(format!("{detail}; too slow")),
            Err(e) => Err(e),
        };
        match outcome {
            Ok(detail) => println!(
                "PASS criterion {}: {name} ({:.3}s, limit {}s): {detail}",
                idx + 1,
                elapsed.as_secs_f64(),
                limit.as_secs()
            ),
            Err(detail) => {
                failed += 1;
                println!(
                    "FAIL criterion {}: {name} ({:.3}s, limit {}s): {detail}",
                    idx + 1,
                    elapsed.as_secs_f64(),
                    limit.as_secs()
                );
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
