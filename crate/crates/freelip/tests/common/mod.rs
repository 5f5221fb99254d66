//! Shared fixtures, seeded corpora, and an independent brute-force LP check
//! used by the integration suites.

#![allow(dead_code)]

use freelip::freespace::{FreeElement, LipFunction};
use freelip::metric::{gen_random, FiniteMetricSpace, PointId};
use freelip::rational::{rat, rat_int, Rational};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

/// Three colinear points 0 - a - b at unit steps; d(0,b) = 2, so the middle
/// point sits on the segment [0, b].
pub fn c3() -> FiniteMetricSpace {
    FiniteMetricSpace::validate(
        vec!["0".into(), "a".into(), "b".into()],
        0,
        vec![
            vec![rat_int(0), rat_int(1), rat_int(2)],
            vec![rat_int(1), rat_int(0), rat_int(1)],
            vec![rat_int(2), rat_int(1), rat_int(0)],
        ],
    )
    .expect("colinear fixture is a metric space")
}

/// Equilateral triangle with unit sides.
pub fn e3() -> FiniteMetricSpace {
    FiniteMetricSpace::validate(
        vec!["0".into(), "a".into(), "b".into()],
        0,
        vec![
            vec![rat_int(0), rat_int(1), rat_int(1)],
            vec![rat_int(1), rat_int(0), rat_int(1)],
            vec![rat_int(1), rat_int(1), rat_int(0)],
        ],
    )
    .expect("equilateral fixture is a metric space")
}

/// The fixed acceptance corpus: 200 seeded random spaces with point counts
/// cycling through 3..=7 at scale 10, followed by the two fixtures.
pub fn corpus() -> Vec<FiniteMetricSpace> {
    let mut spaces: Vec<FiniteMetricSpace> = (0..200u64)
        .map(|seed| {
            let n = 3 + (seed as usize % 5);
            gen_random(n, seed, 10).expect("corpus parameters are valid")
        })
        .collect();
    spaces.push(c3());
    spaces.push(e3());
    spaces
}

/// A small random rational: numerator in [-6, 6], denominator in [1, 4].
pub fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.random_range(-6..=6), rng.random_range(1..=4))
}

/// A random element over the non-base points (possibly zero).
pub fn random_element<'a>(
    space: &'a FiniteMetricSpace,
    rng: &mut ChaCha8Rng,
) -> FreeElement<'a> {
    let coeffs: Vec<(PointId, Rational)> = space
        .points()
        .filter(|&x| x != space.base())
        .map(|x| (x, random_rational(rng)))
        .collect();
    FreeElement::new(space, coeffs)
}

/// A random base-vanishing function (any function on a finite space is
/// Lipschitz, so no constraint beyond the base value is needed).
pub fn random_function<'a>(
    space: &'a FiniteMetricSpace,
    rng: &mut ChaCha8Rng,
) -> LipFunction<'a> {
    let values: Vec<Rational> = space
        .points()
        .map(|x| {
            if x == space.base() {
                Rational::zero()
            } else {
                random_rational(rng)
            }
        })
        .collect();
    LipFunction::new(space, values).expect("base value is zero")
}

/// A random point set containing the base.
pub fn random_subspace(space: &FiniteMetricSpace, rng: &mut ChaCha8Rng) -> BTreeSet<PointId> {
    let mut set = BTreeSet::from([space.base()]);
    for x in space.points() {
        if rng.random_range(0..2u8) == 1 {
            set.insert(x);
        }
    }
    set
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Brute-force optimum of `maximize objective . x` over an inequality system
/// whose feasible region is bounded (callers must box it): enumerates every
/// choice of `num_vars` constraint rows, solves the square system exactly,
/// keeps the feasible intersection points, and takes the best objective
/// value. Returns None when no feasible vertex exists (infeasible system,
/// given boundedness). Exponential and only for cross-checking the simplex.
pub fn enumerated_optimum(
    num_vars: usize,
    ineq: &[(Vec<Rational>, Rational)],
    objective: &[Rational],
) -> Option<Rational> {
    if num_vars == 0 {
        let feasible = ineq.iter().all(|(_, rhs)| !rhs.is_negative());
        return feasible.then(Rational::zero);
    }
    let m = ineq.len();
    if m < num_vars {
        return None;
    }
    let mut best: Option<Rational> = None;
    let mut choice: Vec<usize> = (0..num_vars).collect();
    loop {
        let a: Vec<Vec<Rational>> = choice.iter().map(|&i| ineq[i].0.clone()).collect();
        let b: Vec<Rational> = choice.iter().map(|&i| ineq[i].1.clone()).collect();
        if let Some(x) = solve_square(a, b) {
            let feasible = ineq.iter().all(|(row, rhs)| dot(row, &x) <= *rhs);
            if feasible {
                let value = dot(objective, &x);
                if best.as_ref().map_or(true, |cur| value > *cur) {
                    best = Some(value);
                }
            }
        }
        // Advance the combination lexicographically.
        let mut i = num_vars;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if choice[i] < m - num_vars + i {
                choice[i] += 1;
                for j in (i + 1)..num_vars {
                    choice[j] = choice[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exact Gaussian elimination; None when the system is singular.
fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v = &*v / &p;
        }
        b[col] = &b[col] / &p;
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                let delta = &f * &a[col][c];
                a[r][c] -= delta;
            }
            let delta = &f * &b[col];
            b[r] -= delta;
        }
    }
    Some(b)
}
