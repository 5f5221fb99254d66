//! Exact linear programming over the rationals.
//!
//! This is the decision kernel for the whole crate: norm computations,
//! extremality predicates, and face descriptions all reduce to small linear
//! programs whose answers must be exact, because the properties being decided
//! are equalities and strict inequalities that a tolerance would corrupt.
//!
//! The solver is a dense two-phase simplex (phase one finds a basic feasible
//! solution with artificial variables, phase two optimizes) with Bland's
//! anti-cycling rule, so it terminates on every input, including degenerate
//! ones. All entries are [`Rational`]; there is no rounding anywhere.
//!
//! Variables are free by default. A constraint row of the form `-c x_j <= 0`
//! with `c > 0` is recognized during standard-form conversion and handled as
//! plain nonnegativity of `x_j`; every other free variable is split as
//! `x = x+ - x-`.

use crate::rational::Rational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// A linear program: maximize `objective . x` subject to
/// `row . x <= rhs` for every `ineq` entry and `row . x = rhs` for every
/// `eq` entry. Variables are free unless a constraint bounds them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub ineq: Vec<(Vec<Rational>, Rational)>,
    pub eq: Vec<(Vec<Rational>, Rational)>,
}

/// Outcome of [`solve`]. `Optimal` carries the exact optimum and one basic
/// optimal solution (a vertex of the standard-form feasible region).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpSolution {
    Optimal { value: Rational, point: Vec<Rational> },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("{context} has {found} coefficients, expected {expected}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("convex hull test needs at least one generator")]
    NoGenerators,
    #[error("feasible region is empty")]
    Infeasible,
    #[error("objective unbounded over the feasible region")]
    Unbounded,
}

impl LinearProgram {
    /// Empty program on `num_vars` free variables with a zero objective.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![Rational::zero(); num_vars],
            ineq: Vec::new(),
            eq: Vec::new(),
        }
    }

    /// Adds `row . x <= rhs`.
    pub fn add_le(&mut self, row: Vec<Rational>, rhs: Rational) {
        self.ineq.push((row, rhs));
    }

    /// Adds `row . x = rhs`.
    pub fn add_eq(&mut self, row: Vec<Rational>, rhs: Rational) {
        self.eq.push((row, rhs));
    }

    fn check(&self) -> Result<(), LpError> {
        if self.objective.len() != self.num_vars {
            return Err(LpError::Dimension {
                context: "objective",
                expected: self.num_vars,
                found: self.objective.len(),
            });
        }
        for (row, _) in self.ineq.iter().chain(self.eq.iter()) {
            if row.len() != self.num_vars {
                return Err(LpError::Dimension {
                    context: "constraint row",
                    expected: self.num_vars,
                    found: row.len(),
                });
            }
        }
        Ok(())
    }

    /// True iff `point` satisfies every constraint exactly.
    pub fn satisfied_exactly(&self, point: &[Rational]) -> bool {
        self.ineq.iter().all(|(row, rhs)| dot(row, point) <= *rhs)
            && self.eq.iter().all(|(row, rhs)| dot(row, point) == *rhs)
    }
}

/// Exact dot product of two equal-length rational vectors.
pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

/// Solves `lp` by two-phase simplex with Bland's rule.
///
/// Deterministic: identical inputs produce identical outputs. The `Optimal`
/// point re-substitutes into every constraint exactly (checked in debug
/// builds).
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.check()?;
    let mut t = Tableau::from_program(lp);
    if !t.phase_one() {
        return Ok(LpSolution::Infeasible);
    }
    if !t.phase_two(lp) {
        return Ok(LpSolution::Unbounded);
    }
    let point = t.extract_point();
    let value = dot(&lp.objective, &point);
    debug_assert!(
        lp.satisfied_exactly(&point),
        "simplex returned an infeasible point"
    );
    Ok(LpSolution::Optimal { value, point })
}

/// Phase-one feasibility check for the system `ineq` / `eq` (same row
/// conventions as [`LinearProgram`]). The variable count is taken from the
/// rows; with no rows at all the system is trivially feasible.
pub fn feasible(
    ineq: &[(Vec<Rational>, Rational)],
    eq: &[(Vec<Rational>, Rational)],
) -> Result<bool, LpError> {
    let num_vars = ineq
        .first()
        .or_else(|| eq.first())
        .map_or(0, |(row, _)| row.len());
    let lp = LinearProgram {
        num_vars,
        objective: vec![Rational::zero(); num_vars],
        ineq: ineq.to_vec(),
        eq: eq.to_vec(),
    };
    lp.check()?;
    let mut t = Tableau::from_program(&lp);
    Ok(t.phase_one())
}

/// True iff `target = sum lambda_i generators[i]` for some `lambda_i >= 0`
/// with `sum lambda_i = 1`, decided by phase-one feasibility.
pub fn in_convex_hull(
    target: &[Rational],
    generators: &[Vec<Rational>],
) -> Result<bool, LpError> {
    if generators.is_empty() {
        return Err(LpError::NoGenerators);
    }
    let dim = target.len();
    for g in generators {
        if g.len() != dim {
            return Err(LpError::Dimension {
                context: "generator",
                expected: dim,
                found: g.len(),
            });
        }
    }
    let k = generators.len();
    let mut ineq = Vec::with_capacity(k);
    for i in 0..k {
        let mut row = vec![Rational::zero(); k];
        row[i] = -Rational::one();
        ineq.push((row, Rational::zero()));
    }
    let mut eq = Vec::with_capacity(dim + 1);
    eq.push((vec![Rational::one(); k], Rational::one()));
    for d in 0..dim {
        let row: Vec<Rational> = generators.iter().map(|g| g[d].clone()).collect();
        eq.push((row, target[d].clone()));
    }
    feasible(&ineq, &eq)
}

/// Exact minimum and maximum of `objective . x` over the system `ineq` / `eq`
/// (two [`solve`] calls). An empty region or an unbounded direction is
/// reported as an error, since callers use this only on compact polytopes.
pub fn functional_range(
    objective: &[Rational],
    ineq: &[(Vec<Rational>, Rational)],
    eq: &[(Vec<Rational>, Rational)],
) -> Result<(Rational, Rational), LpError> {
    let mut lp = LinearProgram {
        num_vars: objective.len(),
        objective: objective.to_vec(),
        ineq: ineq.to_vec(),
        eq: eq.to_vec(),
    };
    let max = match solve(&lp)? {
        LpSolution::Optimal { value, .. } => value,
        LpSolution::Infeasible => return Err(LpError::Infeasible),
        LpSolution::Unbounded => return Err(LpError::Unbounded),
    };
    for c in lp.objective.iter_mut() {
        *c = -&*c;
    }
    let min = match solve(&lp)? {
        LpSolution::Optimal { value, .. } => -value,
        LpSolution::Infeasible => return Err(LpError::Infeasible),
        LpSolution::Unbounded => return Err(LpError::Unbounded),
    };
    Ok((min, max))
}

/// Dense simplex tableau. Each row is `[columns..., rhs]`; `basis[i]` names
/// the column whose unit vector sits in row `i`. The cost row holds reduced
/// costs for the current minimization objective.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    cost: Vec<Rational>,
    basis: Vec<usize>,
    /// Per original variable: (column of the positive part, column of the
    /// negative part if the variable was split).
    var_cols: Vec<(usize, Option<usize>)>,
    /// Column count excluding the rhs.
    width: usize,
    /// First artificial column during phase one (== width afterwards).
    art_base: usize,
}

impl Tableau {
    fn from_program(lp: &LinearProgram) -> Tableau {
        let n = lp.num_vars;

        // Recognize explicit nonnegativity rows so those variables skip the
        // x = x+ - x- split; everything else stays a real constraint.
        let mut nonneg = vec![false; n];
        let mut kept: Vec<(&[Rational], &Rational)> = Vec::new();
        for (row, rhs) in &lp.ineq {
            if rhs.is_zero() {
                let mut nonzero = row.iter().enumerate().filter(|(_, c)| !c.is_zero());
                if let Some((j, c)) = nonzero.next() {
                    if nonzero.next().is_none() && c.is_negative() {
                        nonneg[j] = true;
                        continue;
                    }
                }
            }
            kept.push((row, rhs));
        }

        let mut var_cols = Vec::with_capacity(n);
        let mut w = 0;
        for &nn in &nonneg {
            if nn {
                var_cols.push((w, None));
                w += 1;
            } else {
                var_cols.push((w, Some(w + 1)));
                w += 2;
            }
        }
        let n_struct = w;
        let n_slack = kept.len();

        // Body rows over structural + slack columns, rhs kept separate until
        // the artificial block is sized.
        let m = n_slack + lp.eq.len();
        let mut body = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut is_ineq = Vec::with_capacity(m);
        let expand = |row: &[Rational]| {
            let mut out = vec![Rational::zero(); n_struct + n_slack];
            for (j, c) in row.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let (p, neg) = var_cols[j];
                out[p] = c.clone();
                if let Some(q) = neg {
                    out[q] = -c;
                }
            }
            out
        };
        for (i, (row, b)) in kept.iter().enumerate() {
            let mut r = expand(row);
            r[n_struct + i] = Rational::one();
            body.push(r);
            rhs.push((*b).clone());
            is_ineq.push(true);
        }
        for (row, b) in &lp.eq {
            body.push(expand(row));
            rhs.push(b.clone());
            is_ineq.push(false);
        }

        // Standard form wants rhs >= 0; flipped inequality rows lose their
        // slack as a basis candidate and get an artificial instead.
        let mut needs_art = Vec::with_capacity(m);
        for i in 0..m {
            if rhs[i].is_negative() {
                for v in body[i].iter_mut() {
                    *v = -&*v;
                }
                rhs[i] = -&rhs[i];
                needs_art.push(true);
            } else {
                needs_art.push(!is_ineq[i]);
            }
        }

        let art_base = n_struct + n_slack;
        let n_art = needs_art.iter().filter(|&&a| a).count();
        let width = art_base + n_art;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next_art = art_base;
        for i in 0..m {
            let mut row = std::mem::take(&mut body[i]);
            row.resize(width, Rational::zero());
            if needs_art[i] {
                row[next_art] = Rational::one();
                basis.push(next_art);
                next_art += 1;
            } else {
                // Unflipped inequality: its slack column is already a unit
                // column and serves as the initial basic variable.
                basis.push(n_struct + i);
            }
            row.push(std::mem::take(&mut rhs[i]));
            rows.push(row);
        }

        Tableau {
            rows,
            cost: Vec::new(),
            basis,
            var_cols,
            width,
            art_base,
        }
    }

    /// Replaces the cost row by reduced costs: subtracts `cost[basis[r]]`
    /// times row `r` for every basic column with a nonzero cost entry.
    fn canonicalize_cost(&mut self) {
        for r in 0..self.rows.len() {
            let b = self.basis[r];
            if self.cost[b].is_zero() {
                continue;
            }
            let f = std::mem::replace(&mut self.cost[b], Rational::zero());
            for k in 0..=self.width {
                if k == b || self.rows[r][k].is_zero() {
                    continue;
                }
                let delta = &f * &self.rows[r][k];
                self.cost[k] -= delta;
            }
        }
    }

    /// Bland's rule: entering column is the smallest index with a negative
    /// reduced cost; leaving row minimizes the ratio, ties broken by the
    /// smallest basic variable index. Returns false on an unbounded ray.
    fn run_simplex(&mut self) -> bool {
        loop {
            let Some(c) = (0..self.width).find(|&j| self.cost[j].is_negative()) else {
                return true;
            };
            let mut choice: Option<(Rational, usize, usize)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rows[i].last().unwrap() / a;
                let better = match &choice {
                    None => true,
                    Some((best, bvar, _)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < *bvar)
                    }
                };
                if better {
                    choice = Some((ratio, self.basis[i], i));
                }
            }
            let Some((_, _, r)) = choice else {
                return false;
            };
            self.pivot(r, c);
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c].clone();
        if !piv.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v = &*v / &piv;
                }
            }
        }
        let prow = self.rows[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = std::mem::replace(&mut self.rows[i][c], Rational::zero());
            if f.is_zero() {
                continue;
            }
            for k in 0..=self.width {
                if k == c || prow[k].is_zero() {
                    continue;
                }
                let delta = &f * &prow[k];
                self.rows[i][k] -= delta;
            }
        }
        let f = std::mem::replace(&mut self.cost[c], Rational::zero());
        if !f.is_zero() {
            for k in 0..=self.width {
                if k == c || prow[k].is_zero() {
                    continue;
                }
                let delta = &f * &prow[k];
                self.cost[k] -= delta;
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes the sum of artificial variables. Returns false when that
    /// minimum is positive (the original system is infeasible); otherwise
    /// drives artificial variables out of the basis, drops rows that turned
    /// out redundant, and truncates the artificial block.
    fn phase_one(&mut self) -> bool {
        if self.art_base == self.width {
            // Slack basis is already feasible; nothing to minimize.
            return true;
        }
        let mut cost = vec![Rational::zero(); self.width + 1];
        for c in cost.iter_mut().take(self.width).skip(self.art_base) {
            *c = Rational::one();
        }
        self.cost = cost;
        self.canonicalize_cost();
        let bounded = self.run_simplex();
        debug_assert!(bounded, "phase one is bounded below by zero");
        if self.cost[self.width].is_negative() {
            // Residual infeasibility: sum of artificials = -cost rhs > 0.
            return false;
        }

        // Degenerate pivots move any remaining artificial basics onto real
        // columns; a row with no real entries left is redundant.
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] >= self.art_base {
                match (0..self.art_base).find(|&c| !self.rows[r][c].is_zero()) {
                    Some(c) => {
                        self.pivot(r, c);
                        r += 1;
                    }
                    None => {
                        self.rows.remove(r);
                        self.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }

        for row in &mut self.rows {
            let b = row.pop().unwrap();
            row.truncate(self.art_base);
            row.push(b);
        }
        self.width = self.art_base;
        true
    }

    /// Optimizes `maximize objective . x` as `minimize -objective` over the
    /// split columns. Returns false when the objective is unbounded.
    fn phase_two(&mut self, lp: &LinearProgram) -> bool {
        let mut cost = vec![Rational::zero(); self.width + 1];
        for (j, &(p, neg)) in self.var_cols.iter().enumerate() {
            let c = &lp.objective[j];
            if c.is_zero() {
                continue;
            }
            cost[p] = -c;
            if let Some(q) = neg {
                cost[q] = c.clone();
            }
        }
        self.cost = cost;
        self.canonicalize_cost();
        self.run_simplex()
    }

    /// Reads the basic solution back into original variables.
    fn extract_point(&self) -> Vec<Rational> {
        let mut y = vec![Rational::zero(); self.width];
        for (r, &b) in self.basis.iter().enumerate() {
            y[b] = self.rows[r].last().unwrap().clone();
        }
        self.var_cols
            .iter()
            .map(|&(p, neg)| match neg {
                Some(q) => &y[p] - &y[q],
                None => y[p].clone(),
            })
            .collect()
    }
}
