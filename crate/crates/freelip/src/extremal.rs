//! Extremal structure of the free-space unit ball.
//!
//! For a molecule u_pq = (delta(p) - delta(q)) / d(p,q) this module decides,
//! with exact arithmetic, whether u_pq is an extreme point of the unit ball,
//! whether it is preserved extreme / denting / strongly exposed / exposed,
//! and computes the witnesses behind those answers: the least strong-
//! exposure constant, an exposing functional, and the structure of the face
//! of the ball cut out by the functions norming the pair.
//!
//! Two independent routes to extremality are kept side by side on purpose:
//! the segment criterion (no third point at zero gap) and a brute-force
//! polytope oracle (the unit ball of the free space over a finite metric
//! space is the convex hull of its molecules, so a molecule is extreme iff
//! it is not a convex combination of the others). The test suite insists the
//! routes agree; the code never substitutes one for the other.

use crate::exactlp::{self, LinearProgram, LpSolution};
use crate::freespace::{molecule_element, LipFunction, Molecule};
use crate::metric::{FiniteMetricSpace, PointId};
use crate::rational::Rational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ExtremalError {
    #[error("pair must consist of two distinct points")]
    SamePoint,
}

/// The polytope of functions norming the pair (p, q): all base-vanishing f
/// with every difference quotient at most 1 and (f(p) - f(q)) / d(p,q)
/// exactly 1. Every member has Lipschitz constant exactly 1, and the set is
/// never empty: x -> d(x,q) - d(base,q) always belongs to it.
#[derive(Debug, Clone)]
pub struct NormingPolytope<'a> {
    space: &'a FiniteMetricSpace,
    p: PointId,
    q: PointId,
    /// Column of each non-base point in the constraint system.
    col_of: Vec<Option<usize>>,
    num_vars: usize,
    ineq: Vec<(Vec<Rational>, Rational)>,
    eq: Vec<(Vec<Rational>, Rational)>,
}

impl<'a> NormingPolytope<'a> {
    pub fn new(
        space: &'a FiniteMetricSpace,
        p: PointId,
        q: PointId,
    ) -> Result<NormingPolytope<'a>, ExtremalError> {
        if p == q {
            return Err(ExtremalError::SamePoint);
        }
        let n = space.point_count();
        let base = space.base();
        let mut col_of = vec![None; n];
        let mut num_vars = 0;
        for x in space.points() {
            if x != base {
                col_of[x.0] = Some(num_vars);
                num_vars += 1;
            }
        }
        let mut poly = NormingPolytope {
            space,
            p,
            q,
            col_of,
            num_vars,
            ineq: Vec::with_capacity(n * (n - 1)),
            eq: Vec::with_capacity(1),
        };
        for (x, y) in space.ordered_pairs() {
            let row = poly.difference_row(x, y);
            poly.ineq.push((row, space.d(x, y).clone()));
        }
        let row = poly.difference_row(p, q);
        poly.eq.push((row, space.d(p, q).clone()));
        Ok(poly)
    }

    pub fn space(&self) -> &'a FiniteMetricSpace {
        self.space
    }

    pub fn pair(&self) -> (PointId, PointId) {
        (self.p, self.q)
    }

    /// Row of f(x) - f(y) over the variable columns (base entries vanish).
    fn difference_row(&self, x: PointId, y: PointId) -> Vec<Rational> {
        let mut row = vec![Rational::zero(); self.num_vars];
        if let Some(c) = self.col_of[x.0] {
            row[c] += Rational::one();
        }
        if let Some(c) = self.col_of[y.0] {
            row[c] -= Rational::one();
        }
        row
    }

    /// Objective vector for the quotient (f(x) - f(y)) / d(x,y).
    fn quotient_objective(&self, x: PointId, y: PointId) -> Vec<Rational> {
        let d = self.space.d(x, y);
        self.difference_row(x, y)
            .into_iter()
            .map(|c| if c.is_zero() { c } else { c / d })
            .collect()
    }

    /// The always-feasible member x -> d(x, q) - d(base, q).
    pub fn canonical_witness(&self) -> LipFunction<'a> {
        LipFunction::distance_from(self.space, self.q)
    }

    /// Exact feasibility of a concrete function.
    pub fn contains(&self, f: &LipFunction<'_>) -> bool {
        let point: Vec<Rational> = self
            .space
            .points()
            .filter(|x| self.col_of[x.0].is_some())
            .map(|x| f.value(x).clone())
            .collect();
        self.ineq
            .iter()
            .all(|(row, rhs)| exactlp::dot(row, &point) <= *rhs)
            && self
                .eq
                .iter()
                .all(|(row, rhs)| exactlp::dot(row, &point) == *rhs)
    }

    /// Exact (min, max) of the quotient (f(x) - f(y)) / d(x,y) over the
    /// polytope.
    pub fn quotient_range(
        &self,
        x: PointId,
        y: PointId,
    ) -> Result<(Rational, Rational), ExtremalError> {
        if x == y {
            return Err(ExtremalError::SamePoint);
        }
        let objective = self.quotient_objective(x, y);
        Ok(exactlp::functional_range(&objective, &self.ineq, &self.eq)
            .expect("norming polytope is nonempty and bounded"))
    }

    /// One-sided optimum of the quotient, plus the optimal vertex as a
    /// function (used to grow the witness pool during scans).
    fn quotient_extremum(
        &self,
        x: PointId,
        y: PointId,
        maximize: bool,
    ) -> (Rational, LipFunction<'a>) {
        let mut objective = self.quotient_objective(x, y);
        if !maximize {
            for c in objective.iter_mut() {
                *c = -&*c;
            }
        }
        let lp = LinearProgram {
            num_vars: self.num_vars,
            objective,
            ineq: self.ineq.clone(),
            eq: self.eq.clone(),
        };
        let solution = exactlp::solve(&lp).expect("norming program is well-formed");
        let LpSolution::Optimal { value, point } = solution else {
            unreachable!("norming polytope is nonempty and bounded");
        };
        let mut values = vec![Rational::zero(); self.space.point_count()];
        for v in self.space.points() {
            if let Some(c) = self.col_of[v.0] {
                values[v.0] = point[c].clone();
            }
        }
        let f = LipFunction::new(self.space, values).expect("vertex vanishes at base");
        debug_assert!(self.contains(&f), "solver vertex escaped the polytope");
        let value = if maximize { value } else { -value };
        (value, f)
    }
}

/// The normalized difference quotient (f(x) - f(y)) / d(x, y).
pub fn difference_quotient(
    f: &LipFunction<'_>,
    x: PointId,
    y: PointId,
) -> Result<Rational, ExtremalError> {
    if x == y {
        return Err(ExtremalError::SamePoint);
    }
    Ok((f.value(x) - f.value(y)) / f.space().d(x, y))
}

/// A difference quotient together with the pair it was taken at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairQuotient {
    pub x: PointId,
    pub y: PointId,
    pub value: Rational,
}

/// All difference quotients of f, ordered-pair by ordered-pair. The largest
/// value equals the Lipschitz constant of f.
pub fn quotient_table(f: &LipFunction<'_>) -> Vec<PairQuotient> {
    f.space()
        .ordered_pairs()
        .map(|(x, y)| PairQuotient {
            x,
            y,
            value: difference_quotient(f, x, y).expect("ordered pairs are distinct"),
        })
        .collect()
}

/// Both norming-polytope scans at once; see [`rigid_pairs`] and
/// [`molecule_face`] for what each set means.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormingScan {
    pub rigid: Vec<Molecule>,
    pub face: Vec<Molecule>,
}

/// Scans every unordered pair of points and classifies its quotient range
/// over the norming polytope of (p, q).
///
/// A pair lands in `rigid` when its quotient is the constant +1 or -1 across
/// the whole polytope (both orientations are then recorded), and the +1
/// orientation lands in `face`: those are exactly the molecules lying on the
/// face of the unit ball cut out by the norming functions, because the
/// quotient can never exceed 1, so "minimum equals 1" and "constant 1"
/// coincide.
///
/// The scan keeps a pool of polytope members (seeded with the two canonical
/// ones, x -> d(x,q) - d(base,q) and x -> d(base,p) - d(x,p), and grown with
/// every solver vertex). Pool members certify exclusions outright: a pair
/// whose quotient takes two values on the pool, or a single value other than
/// +-1, cannot be constant +-1. Only the surviving candidates are confirmed
/// by an exact one-sided optimization, so every inclusion is decided by the
/// solver, never by the pool.
pub fn norming_scan(
    space: &FiniteMetricSpace,
    p: PointId,
    q: PointId,
) -> Result<NormingScan, ExtremalError> {
    let poly = NormingPolytope::new(space, p, q)?;
    let mut pool: Vec<LipFunction<'_>> = Vec::new();
    for seed in [
        poly.canonical_witness(),
        LipFunction::new(
            space,
            space
                .points()
                .map(|y| space.d(space.base(), p) - space.d(y, p))
                .collect(),
        )
        .expect("second canonical member vanishes at base"),
    ] {
        debug_assert!(poly.contains(&seed), "canonical member must be feasible");
        if !pool.contains(&seed) {
            pool.push(seed);
        }
    }

    let one = Rational::one();
    let mut rigid = Vec::new();
    let mut face = Vec::new();
    let n = space.point_count();
    for xi in 0..n {
        for yi in (xi + 1)..n {
            let (x, y) = (PointId(xi), PointId(yi));
            if (x == p && y == q) || (x == q && y == p) {
                // The defining equality pins this quotient at 1 already.
                face.push(Molecule::new(p, q).expect("p != q"));
                rigid.push(Molecule::new(p, q).expect("p != q"));
                rigid.push(Molecule::new(q, p).expect("p != q"));
                continue;
            }
            let mut values = pool
                .iter()
                .map(|f| difference_quotient(f, x, y).expect("x != y"));
            let candidate = values.next().expect("pool is seeded");
            if values.any(|v| v != candidate) || candidate.abs() != one {
                continue;
            }
            // The candidate value is attained; one exact optimization in the
            // opposing direction decides whether the range is a singleton.
            let constant = if candidate == one {
                let (min, vertex) = poly.quotient_extremum(x, y, false);
                if !pool.contains(&vertex) {
                    pool.push(vertex);
                }
                min == one
            } else {
                let (max, vertex) = poly.quotient_extremum(x, y, true);
                if !pool.contains(&vertex) {
                    pool.push(vertex);
                }
                max == -&one
            };
            if constant {
                let (fx, fy) = if candidate == one { (x, y) } else { (y, x) };
                face.push(Molecule::new(fx, fy).expect("x != y"));
                rigid.push(Molecule::new(x, y).expect("x != y"));
                rigid.push(Molecule::new(y, x).expect("x != y"));
            }
        }
    }
    rigid.sort();
    face.sort();
    Ok(NormingScan { rigid, face })
}

/// Ordered pairs whose difference quotient is forced to a common value of
/// absolute value 1 by every function norming (p, q). Always contains (p, q)
/// and (q, p), and is closed under orientation swap.
pub fn rigid_pairs(
    space: &FiniteMetricSpace,
    p: PointId,
    q: PointId,
) -> Result<Vec<Molecule>, ExtremalError> {
    Ok(norming_scan(space, p, q)?.rigid)
}

/// Ordered pairs (x, y) whose molecule lies on the face of the unit ball cut
/// out by the functions norming (p, q): the quotient of (x, y) is constantly
/// 1 over the norming polytope. Always contains (p, q).
pub fn molecule_face(
    space: &FiniteMetricSpace,
    p: PointId,
    q: PointId,
) -> Result<Vec<Molecule>, ExtremalError> {
    Ok(norming_scan(space, p, q)?.face)
}

/// Checks that every rigid pair of (p, q) has both endpoints at zero gap,
/// i.e. on the metric segment [p, q].
pub fn verify_rigid_pairs_on_segment(
    space: &FiniteMetricSpace,
    p: PointId,
    q: PointId,
) -> Result<bool, ExtremalError> {
    let pairs = rigid_pairs(space, p, q)?;
    Ok(pairs.iter().all(|m| {
        space.gap(m.p(), p, q).expect("p != q").is_zero()
            && space.gap(m.q(), p, q).expect("p != q").is_zero()
    }))
}

/// Checks that every molecule on the norming face of (p, q) has both
/// endpoints inside the segment [p, q]; since the face is the convex hull of
/// the molecules it contains, this places the whole face inside the subspace
/// spanned by the segment.
pub fn verify_face_within_segment(
    space: &FiniteMetricSpace,
    p: PointId,
    q: PointId,
) -> Result<bool, ExtremalError> {
    let face = molecule_face(space, p, q)?;
    let segment = space.segment(p, q).map_err(|_| ExtremalError::SamePoint)?;
    Ok(face
        .iter()
        .all(|m| segment.contains(&m.p()) && segment.contains(&m.q())))
}

/// The least constant C with min(d(x,p), d(x,q)) <= C * gap(x; p, q) for
/// every third point x, or None when some third point has zero gap (the
/// molecule is then not strongly exposed). A two-point space has no third
/// point; the bound holds vacuously and 0 is returned by convention.
pub fn strongly_exposed_constant(
    space: &FiniteMetricSpace,
    p: PointId,
    q: PointId,
) -> Result<Option<Rational>, ExtremalError> {
    if p == q {
        return Err(ExtremalError::SamePoint);
    }
    let mut best = Rational::zero();
    for x in space.points() {
        if x == p || x == q {
            continue;
        }
        let gap = space.gap(x, p, q).expect("p != q");
        if gap.is_zero() {
            return Ok(None);
        }
        let closer = std::cmp::min(space.d(x, p), space.d(x, q));
        let ratio = closer / gap;
        if ratio > best {
            best = ratio;
        }
    }
    Ok(Some(best))
}

/// Brute-force extremality test on the molecule polytope: the unit ball is
/// the convex hull of all molecules (every element has an optimal transport
/// representation, so the ball is exactly that hull, with 0 covered by
/// opposite molecule pairs), and distinct ordered pairs always give distinct
/// coefficient vectors, so u_pq is extreme iff it is not a convex
/// combination of the other molecules. Cost grows as one hull test over
/// n(n-1) - 1 generators; meant for small point counts.
pub fn oracle_extreme(
    space: &FiniteMetricSpace,
    p: PointId,
    q: PointId,
) -> Result<bool, ExtremalError> {
    if p == q {
        return Err(ExtremalError::SamePoint);
    }
    let target = molecule_element(space, p, q)
        .expect("p != q")
        .coefficient_vector();
    let generators: Vec<Vec<Rational>> = space
        .ordered_pairs()
        .filter(|&(x, y)| (x, y) != (p, q))
        .map(|(x, y)| {
            molecule_element(space, x, y)
                .expect("ordered pairs are distinct")
                .coefficient_vector()
        })
        .collect();
    let inside = exactlp::in_convex_hull(&target, &generators)
        .expect("molecule vectors share one dimension");
    Ok(!inside)
}

/// A functional exposing u_pq, when one exists: f with Lipschitz constant at
/// most 1, quotient exactly 1 at (p, q), and quotient strictly below 1 at
/// every other ordered pair. Found by maximizing the margin s subject to
/// quotient(x,y) <= 1 - s for all other pairs over the norming constraints;
/// any positive-margin vertex is returned as the witness, and witnesses are
/// not canonical, so callers must check properties rather than compare
/// functions.
pub fn exposing_functional<'a>(
    space: &'a FiniteMetricSpace,
    p: PointId,
    q: PointId,
) -> Result<Option<LipFunction<'a>>, ExtremalError> {
    let poly = NormingPolytope::new(space, p, q)?;
    let k = poly.num_vars;
    let mut lp = LinearProgram::new(k + 1);
    lp.objective[k] = Rational::one();
    for (row, rhs) in &poly.ineq {
        let mut wide = row.clone();
        wide.push(Rational::zero());
        lp.add_le(wide, rhs.clone());
    }
    for (row, rhs) in &poly.eq {
        let mut wide = row.clone();
        wide.push(Rational::zero());
        lp.add_eq(wide, rhs.clone());
    }
    for (x, y) in space.ordered_pairs() {
        if (x, y) == (p, q) {
            continue;
        }
        let d = space.d(x, y).clone();
        let mut wide = poly.difference_row(x, y);
        wide.push(d.clone());
        lp.add_le(wide, d);
    }
    let solution = exactlp::solve(&lp).expect("margin program is well-formed");
    let LpSolution::Optimal { value, point } = solution else {
        unreachable!("margin is feasible at 0 and bounded by 2");
    };
    if !value.is_positive() {
        return Ok(None);
    }
    let mut values = vec![Rational::zero(); space.point_count()];
    for v in space.points() {
        if let Some(c) = poly.col_of[v.0] {
            values[v.0] = point[c].clone();
        }
    }
    Ok(Some(
        LipFunction::new(space, values).expect("witness vanishes at base"),
    ))
}

/// Everything this module can say about one molecule.
///
/// On a finite space the space coincides with its own compactification, so
/// preserved extremality and dentability collapse to plain extremality; the
/// fields are still kept separate because the collapse is a checked fact of
/// the test suite, not an assumption the rest of the code relies on.
#[derive(Debug, Clone)]
pub struct MoleculeClassification<'a> {
    pub pair: Molecule,
    pub segment: Vec<PointId>,
    pub is_extreme: bool,
    pub is_preserved_extreme: bool,
    pub is_denting: bool,
    pub strongly_exposed_constant: Option<Rational>,
    pub exposing_functional: Option<LipFunction<'a>>,
    pub oracle_extreme: Option<bool>,
}

/// Classifies the molecule u_pq: segment and the segment criterion for
/// extremality, the strong-exposure constant, an exposing functional, and
/// (on request) the independent convex-hull oracle.
pub fn classify<'a>(
    space: &'a FiniteMetricSpace,
    p: PointId,
    q: PointId,
    run_oracle: bool,
) -> Result<MoleculeClassification<'a>, ExtremalError> {
    let pair = Molecule::new(p, q).map_err(|_| ExtremalError::SamePoint)?;
    let segment = space.segment(p, q).map_err(|_| ExtremalError::SamePoint)?;
    let is_extreme = segment.len() == 2;
    let oracle = if run_oracle {
        Some(oracle_extreme(space, p, q)?)
    } else {
        None
    };
    Ok(MoleculeClassification {
        pair,
        segment,
        is_extreme,
        is_preserved_extreme: is_extreme,
        is_denting: is_extreme,
        strongly_exposed_constant: strongly_exposed_constant(space, p, q)?,
        exposing_functional: exposing_functional(space, p, q)?,
        oracle_extreme: oracle,
    })
}
