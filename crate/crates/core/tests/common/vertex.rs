//! Exact vertex enumeration for small assignment LPs: every basis of the
//! consistency system is solved in rational arithmetic.

#![allow(clippy::needless_range_loop)]

use coalition_core::{enumerate_groups, Game, Group};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// Solves the square system `a x = b` exactly; `None` when singular.
fn solve(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for c in col..n {
                    let sub = &f * &a[col][c];
                    a[r][c] -= sub;
                }
                let sub = &f * &b[col];
                b[r] -= sub;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// Best objective over all basic feasible solutions of a three-type game,
/// and the number of bases tried.
pub fn best_vertex(game: &Game) -> (BigRational, usize) {
    let groups = enumerate_groups(&game.space, game.bounds, 1000).unwrap();
    let k = game.space.len();
    let mu: Vec<BigRational> = game.space.masses().iter().map(|&m| rational(m)).collect();
    let column = |g: &Group| -> Vec<BigRational> {
        (0..k).map(|i| BigRational::from_integer(BigInt::from(g.multiplicity(i)))).collect()
    };
    let m = groups.len();
    let mut best: Option<BigRational> = None;
    let mut bases = 0;
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                bases += 1;
                let cols = [column(&groups[a]), column(&groups[b]), column(&groups[c])];
                let matrix = (0..k).map(|i| cols.iter().map(|col| col[i].clone()).collect()).collect();
                let Some(x) = solve(matrix, mu.clone()) else { continue };
                if x.iter().any(|v| v.is_negative()) {
                    continue;
                }
                let value: BigRational = [a, b, c]
                    .iter()
                    .zip(&x)
                    .map(|(&j, v)| rational(game.surplus.get(&groups[j])) * v)
                    .sum();
                if best.as_ref().is_none_or(|cur| value > *cur) {
                    best = Some(value);
                }
            }
        }
    }
    (best.expect("a feasible basis exists"), bases)
}

