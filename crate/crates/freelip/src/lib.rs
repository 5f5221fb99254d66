//! Exact-arithmetic toolkit for the extremal structure of free spaces over
//! finite pointed metric spaces.
//!
//! The layers, bottom up:
//!
//! - [`rational`]: arbitrary-precision rationals and their canonical text
//!   form. Nothing in this crate ever rounds.
//! - [`exactlp`]: a two-phase simplex over the rationals (Bland's rule, so
//!   it terminates on degenerate inputs). Every decision in the crate is an
//!   exact linear program in the end.
//! - [`metric`]: validated finite pointed metric spaces, the gap functional
//!   and metric segments, structural predicates, seeded generators, and the
//!   JSON space/graph file formats.
//! - [`freespace`]: elements of the free space and base-vanishing Lipschitz
//!   functions; the norm both as a dual pairing maximum and as an optimal
//!   transport minimum, with witnesses for each.
//! - [`extremal`]: classification of molecules (extreme, preserved extreme,
//!   denting, strongly exposed, exposed), the convex-hull oracle, norming
//!   polytopes and the face scans built on them.

pub mod exactlp;
pub mod extremal;
pub mod freespace;
pub mod metric;
pub mod rational;

#[cfg(test)]
pub(crate) mod testutil {
    use crate::metric::FiniteMetricSpace;
    use crate::rational::rat_int;

    /// Three colinear points 0 - a - b at unit steps: d(0,b) = 2 makes the
    /// middle point degenerate, the smallest space with a nontrivial segment.
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

    /// Equilateral triangle with unit sides: every segment is trivial.
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
}
