//! Finite pointed metric spaces.
//!
//! A [`FiniteMetricSpace`] is an ordered list of labelled points, a
//! designated base point, and an exact rational distance matrix that has
//! passed full axiom validation (symmetry, positivity, triangle inequality).
//! Degenerate triangles, where d(p,q) = d(p,x) + d(x,q) holds with equality,
//! are deliberately allowed: those are exactly the inputs with nontrivial
//! metric segments, which is what the rest of the crate is about.
//!
//! The module also houses the seeded generators used to build reproducible
//! test corpora (general metrics, ultrametrics, weighted trees), the
//! shortest-path ingestion of weighted graphs, and the JSON file formats.

use crate::rational::{format_rational, parse_rational, ParseRationalError, Rational};
use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a point inside a particular [`FiniteMetricSpace`].
///
/// Only meaningful together with the space it came from; indexing a
/// different space with it is a caller bug and panics like any slice index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("space needs at least {need} point(s), got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("distance matrix must be {points}x{points}, found a row of length {found}")]
    BadShape { points: usize, found: usize },
    #[error("duplicate label {label:?}")]
    DuplicateLabel { label: String },
    #[error("base index {base} out of range for {points} points")]
    BadBase { base: usize, points: usize },
    #[error("d({x},{x}) must be 0")]
    NonzeroDiagonal { x: String },
    #[error("asymmetric distances: d({x},{y}) != d({y},{x})")]
    Asymmetric { x: String, y: String },
    #[error("negative distance d({x},{y}) = {value}")]
    NegativeDistance { x: String, y: String, value: Rational },
    #[error("zero distance between distinct points {x} and {y}")]
    ZeroDistance { x: String, y: String },
    #[error("triangle violation: d({x},{z}) = {lhs} exceeds d({x},{y}) + d({y},{z}) = {rhs}")]
    TriangleViolation {
        x: String,
        y: String,
        z: String,
        lhs: Rational,
        rhs: Rational,
    },
    #[error("need two distinct points, got {label:?} twice")]
    SamePoint { label: String },
    #[error("graph is not connected: no path from {base:?} to {label:?}")]
    Disconnected { base: String, label: String },
    #[error("edge {x:?} - {y:?} has non-positive weight {value}")]
    BadWeight { x: String, y: String, value: Rational },
    #[error("self-loop edge at {label:?}")]
    SelfLoop { label: String },
    #[error("unknown base label {label:?}")]
    UnknownBase { label: String },
    #[error("random metric scale must be at least 1")]
    BadScale,
}

/// A finite pointed metric space with validated axioms.
///
/// Immutable after construction; everything downstream (free-space elements,
/// Lipschitz functions, extremality classification) borrows it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    base: usize,
    dist: Vec<Vec<Rational>>,
}

impl FiniteMetricSpace {
    /// Checks every metric axiom and returns the space iff all hold.
    ///
    /// The first violated axiom is reported with the witnessing points, in a
    /// fixed check order: shape, duplicate labels, base range, diagonal,
    /// symmetry, off-diagonal sign, then triangles in lexicographic order.
    pub fn validate(
        labels: Vec<String>,
        base_index: usize,
        dist: Vec<Vec<Rational>>,
    ) -> Result<Self, MetricError> {
        let n = labels.len();
        if n == 0 {
            return Err(MetricError::TooFewPoints { need: 1, got: 0 });
        }
        if dist.len() != n {
            return Err(MetricError::BadShape {
                points: n,
                found: dist.len(),
            });
        }
        for row in &dist {
            if row.len() != n {
                return Err(MetricError::BadShape {
                    points: n,
                    found: row.len(),
                });
            }
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(MetricError::DuplicateLabel {
                    label: label.clone(),
                });
            }
        }
        if base_index >= n {
            return Err(MetricError::BadBase {
                base: base_index,
                points: n,
            });
        }
        for i in 0..n {
            if !dist[i][i].is_zero() {
                return Err(MetricError::NonzeroDiagonal {
                    x: labels[i].clone(),
                });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if dist[i][j] != dist[j][i] {
                    return Err(MetricError::Asymmetric {
                        x: labels[i].clone(),
                        y: labels[j].clone(),
                    });
                }
                if dist[i][j] < Rational::zero() {
                    return Err(MetricError::NegativeDistance {
                        x: labels[i].clone(),
                        y: labels[j].clone(),
                        value: dist[i][j].clone(),
                    });
                }
                if dist[i][j].is_zero() {
                    return Err(MetricError::ZeroDistance {
                        x: labels[i].clone(),
                        y: labels[j].clone(),
                    });
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if x == y || y == z || x == z {
                        continue;
                    }
                    let rhs = &dist[x][y] + &dist[y][z];
                    if dist[x][z] > rhs {
                        return Err(MetricError::TriangleViolation {
                            x: labels[x].clone(),
                            y: labels[y].clone(),
                            z: labels[z].clone(),
                            lhs: dist[x][z].clone(),
                            rhs,
                        });
                    }
                }
            }
        }
        Ok(FiniteMetricSpace {
            labels,
            base: base_index,
            dist,
        })
    }

    pub fn point_count(&self) -> usize {
        self.labels.len()
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> + '_ {
        (0..self.labels.len()).map(PointId)
    }

    /// All ordered pairs (p, q) with p != q, in lexicographic index order.
    pub fn ordered_pairs(&self) -> impl Iterator<Item = (PointId, PointId)> + '_ {
        let n = self.labels.len();
        (0..n).flat_map(move |p| {
            (0..n)
                .filter(move |&q| q != p)
                .map(move |q| (PointId(p), PointId(q)))
        })
    }

    pub fn base(&self) -> PointId {
        PointId(self.base)
    }

    pub fn label(&self, p: PointId) -> &str {
        &self.labels[p.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn point_by_label(&self, label: &str) -> Option<PointId> {
        self.labels.iter().position(|l| l == label).map(PointId)
    }

    pub fn d(&self, x: PointId, y: PointId) -> &Rational {
        &self.dist[x.0][y.0]
    }

    /// The same space with a different designated base point. Distances and
    /// labels are untouched; this is the isometry that lets any pair study
    /// be carried out with a convenient base.
    pub fn rebase(&self, new_base: PointId) -> FiniteMetricSpace {
        assert!(new_base.0 < self.labels.len(), "rebase point out of range");
        FiniteMetricSpace {
            labels: self.labels.clone(),
            base: new_base.0,
            dist: self.dist.clone(),
        }
    }

    /// The gap d(p,x) + d(q,x) - d(p,q) of x against the pair (p, q).
    /// Always nonnegative; zero exactly when x lies on the segment [p, q].
    pub fn gap(&self, x: PointId, p: PointId, q: PointId) -> Result<Rational, MetricError> {
        if p == q {
            return Err(MetricError::SamePoint {
                label: self.labels[p.0].clone(),
            });
        }
        Ok(&(&self.dist[p.0][x.0] + &self.dist[q.0][x.0]) - &self.dist[p.0][q.0])
    }

    /// The metric segment [p, q]: every x with d(p,q) = d(p,x) + d(x,q),
    /// as ascending point ids. Always contains p and q.
    pub fn segment(&self, p: PointId, q: PointId) -> Result<Vec<PointId>, MetricError> {
        if p == q {
            return Err(MetricError::SamePoint {
                label: self.labels[p.0].clone(),
            });
        }
        Ok(self
            .points()
            .filter(|&x| self.gap(x, p, q).expect("p != q checked").is_zero())
            .collect())
    }

    /// True iff [p, q] = {p, q}, i.e. no third point has a zero gap.
    pub fn segment_is_trivial(&self, p: PointId, q: PointId) -> Result<bool, MetricError> {
        if p == q {
            return Err(MetricError::SamePoint {
                label: self.labels[p.0].clone(),
            });
        }
        Ok(self
            .points()
            .filter(|&x| x != p && x != q)
            .all(|x| !self.gap(x, p, q).expect("p != q checked").is_zero()))
    }

    /// Largest pairwise distance; 0 for a singleton.
    pub fn diameter(&self) -> Rational {
        let mut best = Rational::zero();
        for i in 0..self.labels.len() {
            for j in (i + 1)..self.labels.len() {
                if self.dist[i][j] > best {
                    best = self.dist[i][j].clone();
                }
            }
        }
        best
    }

    /// True iff the strong triangle inequality
    /// d(x,y) <= max(d(x,z), d(y,z)) holds for every triple.
    pub fn is_ultrametric(&self) -> bool {
        let n = self.labels.len();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let m = std::cmp::max(&self.dist[x][z], &self.dist[y][z]);
                    if &self.dist[x][y] > m {
                        return false;
                    }
                }
            }
        }
        true
    }
}

fn int_rat(v: u64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

fn gen_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

/// In-place Floyd-Warshall closure of a symmetric positive matrix.
fn shortest_path_closure(dist: &mut [Vec<Rational>]) {
    let n = dist.len();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = &dist[i][k] + &dist[k][j];
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }
}

/// Deterministic random metric on n points: symmetric integer entries drawn
/// uniformly from [1, scale] (row by row, upper triangle), then closed under
/// shortest paths so the triangle inequality holds. Labels are p0..p{n-1}
/// with base p0.
pub fn gen_random(n: usize, seed: u64, scale: u64) -> Result<FiniteMetricSpace, MetricError> {
    if n < 1 {
        return Err(MetricError::TooFewPoints { need: 1, got: n });
    }
    if scale < 1 {
        return Err(MetricError::BadScale);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dist = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = int_rat(rng.random_range(1..=scale));
            dist[i][j] = w.clone();
            dist[j][i] = w;
        }
    }
    shortest_path_closure(&mut dist);
    FiniteMetricSpace::validate(gen_labels(n), 0, dist)
}

/// Deterministic random ultrametric on n points, built as a random binary
/// merge tree: clusters start as singletons and merge one pair at a time at
/// strictly increasing integer levels, so every ancestor in the merge tree
/// sits strictly above its children. d(x,y) is the level at which x and y
/// first share a cluster. Labels are p0..p{n-1} with base p0.
pub fn gen_ultrametric(n: usize, seed: u64) -> Result<FiniteMetricSpace, MetricError> {
    if n < 1 {
        return Err(MetricError::TooFewPoints { need: 1, got: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut dist = vec![vec![Rational::zero(); n]; n];
    let mut level = 0u64;
    while clusters.len() > 1 {
        // Draw order per merge step: level increment first, then the pair.
        level += rng.random_range(1..=3u64);
        let k = clusters.len();
        let a = rng.random_range(0..k);
        let b0 = rng.random_range(0..k - 1);
        let b = if b0 >= a { b0 + 1 } else { b0 };
        let (i, j) = (a.min(b), a.max(b));
        let d = int_rat(level);
        for &x in &clusters[i] {
            for &y in &clusters[j] {
                dist[x][y] = d.clone();
                dist[y][x] = d.clone();
            }
        }
        let absorbed = clusters.remove(j);
        clusters[i].extend(absorbed);
    }
    FiniteMetricSpace::validate(gen_labels(n), 0, dist)
}

/// Deterministic random weighted tree on n vertices plus its edge list:
/// vertex v attaches to a uniformly drawn earlier vertex with an integer
/// weight in [1, 5] (weight drawn after the parent). The space is the
/// path-length metric on all vertices, so every branch point of the tree is
/// itself a point of the space. Labels are p0..p{n-1} with base p0.
pub fn gen_tree_with_edges(
    n: usize,
    seed: u64,
) -> Result<(FiniteMetricSpace, Vec<(String, String, Rational)>), MetricError> {
    if n < 2 {
        return Err(MetricError::TooFewPoints { need: 2, got: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = gen_labels(n);
    let mut edges = Vec::with_capacity(n - 1);
    let infinity_free = |n: usize| -> Vec<Vec<Option<Rational>>> { vec![vec![None; n]; n] };
    let mut adj = infinity_free(n);
    for (v, row) in adj.iter_mut().enumerate() {
        row[v] = Some(Rational::zero());
    }
    for v in 1..n {
        let parent = rng.random_range(0..v);
        let w = int_rat(rng.random_range(1..=5u64));
        adj[v][parent] = Some(w.clone());
        adj[parent][v] = Some(w.clone());
        edges.push((labels[parent].clone(), labels[v].clone(), w));
    }
    let dist = close_optional(adj).expect("attachment trees are connected");
    let space = FiniteMetricSpace::validate(labels, 0, dist)?;
    Ok((space, edges))
}

/// [`gen_tree_with_edges`] without the edge list.
pub fn gen_tree(n: usize, seed: u64) -> Result<FiniteMetricSpace, MetricError> {
    gen_tree_with_edges(n, seed).map(|(space, _)| space)
}

/// Floyd-Warshall over an optional-distance matrix; None means unreachable.
/// Returns None when some pair stays unreachable.
fn close_optional(mut adj: Vec<Vec<Option<Rational>>>) -> Option<Vec<Vec<Rational>>> {
    let n = adj.len();
    for k in 0..n {
        for i in 0..n {
            let Some(dik) = adj[i][k].clone() else {
                continue;
            };
            for j in 0..n {
                let Some(dkj) = &adj[k][j] else {
                    continue;
                };
                let via = &dik + dkj;
                match &adj[i][j] {
                    Some(cur) if *cur <= via => {}
                    _ => adj[i][j] = Some(via),
                }
            }
        }
    }
    adj.into_iter()
        .map(|row| row.into_iter().collect::<Option<Vec<_>>>())
        .collect()
}

/// Shortest-path metric of a connected weighted graph. Vertices are the base
/// label followed by edge endpoints in order of first appearance; multiple
/// edges between the same endpoints keep the lightest weight.
pub fn from_graph(
    edges: &[(String, String, Rational)],
    base: &str,
) -> Result<FiniteMetricSpace, MetricError> {
    let mut labels: Vec<String> = vec![base.to_string()];
    let index_of = |labels: &mut Vec<String>, l: &str| -> usize {
        match labels.iter().position(|x| x == l) {
            Some(i) => i,
            None => {
                labels.push(l.to_string());
                labels.len() - 1
            }
        }
    };
    let mut resolved = Vec::with_capacity(edges.len());
    for (x, y, w) in edges {
        if x == y {
            return Err(MetricError::SelfLoop { label: x.clone() });
        }
        if *w <= Rational::zero() {
            return Err(MetricError::BadWeight {
                x: x.clone(),
                y: y.clone(),
                value: w.clone(),
            });
        }
        let i = index_of(&mut labels, x);
        let j = index_of(&mut labels, y);
        resolved.push((i, j, w.clone()));
    }
    let n = labels.len();
    let mut adj: Vec<Vec<Option<Rational>>> = vec![vec![None; n]; n];
    for (v, row) in adj.iter_mut().enumerate() {
        row[v] = Some(Rational::zero());
    }
    for (i, j, w) in resolved {
        match &adj[i][j] {
            Some(cur) if *cur <= w => {}
            _ => {
                adj[i][j] = Some(w.clone());
                adj[j][i] = Some(w);
            }
        }
    }
    match close_optional(adj) {
        Some(dist) => FiniteMetricSpace::validate(labels, 0, dist),
        None => {
            // Reachability from the base determines connectivity; rebuild the
            // reachable set to name the first stranded vertex.
            let mut seen = vec![false; n];
            seen[0] = true;
            let mut frontier = vec![0usize];
            let mut touches: Vec<Vec<usize>> = vec![Vec::new(); n];
            for (x, y, _) in edges {
                let i = labels.iter().position(|l| l == x).unwrap();
                let j = labels.iter().position(|l| l == y).unwrap();
                touches[i].push(j);
                touches[j].push(i);
            }
            while let Some(v) = frontier.pop() {
                for &u in &touches[v] {
                    if !seen[u] {
                        seen[u] = true;
                        frontier.push(u);
                    }
                }
            }
            let stranded = (0..n).find(|&v| !seen[v]).expect("some pair unreachable");
            Err(MetricError::Disconnected {
                base: labels[0].clone(),
                label: labels[stranded].clone(),
            })
        }
    }
}

#[derive(Debug, Error)]
pub enum SpaceFileError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Rational(#[from] ParseRationalError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("file has neither a \"d\" matrix nor an \"edges\" list")]
    UnknownFormat,
}

#[derive(Serialize, Deserialize)]
struct SpaceFile {
    points: Vec<String>,
    base: String,
    d: Vec<Vec<String>>,
}

#[derive(Deserialize)]
struct GraphFile {
    base: String,
    edges: Vec<(String, String, String)>,
}

/// Parses a space file: `{"points": [...], "base": "0", "d": [[...]]}` with
/// every distance a rational string ("num" or "num/den").
pub fn space_from_json(text: &str) -> Result<FiniteMetricSpace, SpaceFileError> {
    let file: SpaceFile = serde_json::from_str(text)?;
    let base = file
        .points
        .iter()
        .position(|l| *l == file.base)
        .ok_or(MetricError::UnknownBase {
            label: file.base.clone(),
        })?;
    let mut dist = Vec::with_capacity(file.d.len());
    for row in &file.d {
        let parsed: Result<Vec<Rational>, ParseRationalError> =
            row.iter().map(|s| parse_rational(s)).collect();
        dist.push(parsed?);
    }
    Ok(FiniteMetricSpace::validate(file.points, base, dist)?)
}

/// Serializes a space in the file format, distances as canonical
/// lowest-terms strings, two-space indentation, trailing newline.
pub fn space_to_json(space: &FiniteMetricSpace) -> String {
    let file = SpaceFile {
        points: space.labels.to_vec(),
        base: space.label(space.base()).to_string(),
        d: space
            .dist
            .iter()
            .map(|row| row.iter().map(format_rational).collect())
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("space file serializes");
    out.push('\n');
    out
}

/// Parses a graph file `{"base": "0", "edges": [["x","y","w"], ...]}` and
/// returns its shortest-path metric.
pub fn graph_from_json(text: &str) -> Result<FiniteMetricSpace, SpaceFileError> {
    let file: GraphFile = serde_json::from_str(text)?;
    let mut edges = Vec::with_capacity(file.edges.len());
    for (x, y, w) in file.edges {
        let w = parse_rational(&w)?;
        edges.push((x, y, w));
    }
    Ok(from_graph(&edges, &file.base)?)
}

/// Accepts either file format, keyed on which field is present.
pub fn space_or_graph_from_json(text: &str) -> Result<FiniteMetricSpace, SpaceFileError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let Some(obj) = value.as_object() else {
        return Err(SpaceFileError::UnknownFormat);
    };
    if obj.contains_key("d") {
        space_from_json(text)
    } else if obj.contains_key("edges") {
        graph_from_json(text)
    } else {
        Err(SpaceFileError::UnknownFormat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};
    use crate::testutil::{c3, e3};

    fn ids(space: &FiniteMetricSpace, labels: &[&str]) -> Vec<PointId> {
        labels
            .iter()
            .map(|l| space.point_by_label(l).unwrap())
            .collect()
    }

    #[test]
    fn colinear_space_is_valid() {
        let space = c3();
        assert_eq!(space.point_count(), 3);
        assert_eq!(space.label(space.base()), "0");
        assert_eq!(space.diameter(), rat_int(2));
    }

    #[test]
    fn single_point_is_valid() {
        let space =
            FiniteMetricSpace::validate(vec!["0".into()], 0, vec![vec![rat_int(0)]]).unwrap();
        assert_eq!(space.diameter(), rat_int(0));
    }

    #[test]
    fn triangle_violation_reports_witness() {
        let err = FiniteMetricSpace::validate(
            vec!["0".into(), "a".into(), "b".into()],
            0,
            vec![
                vec![rat_int(0), rat_int(1), rat_int(3)],
                vec![rat_int(1), rat_int(0), rat_int(1)],
                vec![rat_int(3), rat_int(1), rat_int(0)],
            ],
        )
        .unwrap_err();
        assert_eq!(
            err,
            MetricError::TriangleViolation {
                x: "0".into(),
                y: "a".into(),
                z: "b".into(),
                lhs: rat_int(3),
                rhs: rat_int(2),
            }
        );
    }

    #[test]
    fn axiom_violations_are_detected() {
        let two = |d01: Rational, d10: Rational| {
            FiniteMetricSpace::validate(
                vec!["x".into(), "y".into()],
                0,
                vec![vec![rat_int(0), d01], vec![d10, rat_int(0)]],
            )
        };
        assert!(matches!(
            two(rat_int(1), rat_int(2)),
            Err(MetricError::Asymmetric { .. })
        ));
        assert!(matches!(
            two(rat_int(0), rat_int(0)),
            Err(MetricError::ZeroDistance { .. })
        ));
        assert!(matches!(
            two(rat_int(-1), rat_int(-1)),
            Err(MetricError::NegativeDistance { .. })
        ));
        assert!(matches!(
            FiniteMetricSpace::validate(
                vec!["x".into(), "x".into()],
                0,
                vec![
                    vec![rat_int(0), rat_int(1)],
                    vec![rat_int(1), rat_int(0)]
                ],
            ),
            Err(MetricError::DuplicateLabel { .. })
        ));
        assert!(matches!(
            FiniteMetricSpace::validate(vec!["x".into()], 3, vec![vec![rat_int(0)]]),
            Err(MetricError::BadBase { .. })
        ));
        assert!(matches!(
            FiniteMetricSpace::validate(vec![], 0, vec![]),
            Err(MetricError::TooFewPoints { .. })
        ));
    }

    #[test]
    fn gap_values_on_fixtures() {
        let c = c3();
        let [z, a, b] = ids(&c, &["0", "a", "b"])[..] else {
            unreachable!()
        };
        assert_eq!(c.gap(a, z, b).unwrap(), rat_int(0));
        assert_eq!(c.gap(b, z, a).unwrap(), rat_int(2));
        assert_eq!(c.gap(z, z, a).unwrap(), rat_int(0));
        let e = e3();
        let [p, q, x] = ids(&e, &["0", "a", "b"])[..] else {
            unreachable!()
        };
        assert_eq!(e.gap(x, p, q).unwrap(), rat_int(1));
        assert!(matches!(
            c.gap(a, z, z),
            Err(MetricError::SamePoint { .. })
        ));
    }

    #[test]
    fn segments_on_fixtures() {
        let c = c3();
        let [z, a, b] = ids(&c, &["0", "a", "b"])[..] else {
            unreachable!()
        };
        assert_eq!(c.segment(z, b).unwrap(), vec![z, a, b]);
        assert_eq!(c.segment(z, a).unwrap(), vec![z, a]);
        assert!(!c.segment_is_trivial(z, b).unwrap());
        assert!(c.segment_is_trivial(z, a).unwrap());
        let e = e3();
        for (p, q) in e.ordered_pairs() {
            assert_eq!(e.segment(p, q).unwrap(), {
                let mut v = vec![p, q];
                v.sort();
                v
            });
        }
    }

    #[test]
    fn ultrametric_predicate() {
        assert!(e3().is_ultrametric());
        assert!(!c3().is_ultrametric());
        let two = FiniteMetricSpace::validate(
            vec!["x".into(), "y".into()],
            0,
            vec![
                vec![rat_int(0), rat(7, 3)],
                vec![rat(7, 3), rat_int(0)],
            ],
        )
        .unwrap();
        assert!(two.is_ultrametric());
    }

    #[test]
    fn gen_random_is_deterministic_and_valid() {
        let a = gen_random(6, 42, 10).unwrap();
        let b = gen_random(6, 42, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, gen_random(6, 43, 10).unwrap());
        assert_eq!(gen_random(1, 5, 10).unwrap().point_count(), 1);
        assert!(matches!(
            gen_random(0, 1, 10),
            Err(MetricError::TooFewPoints { .. })
        ));
        assert!(matches!(gen_random(3, 1, 0), Err(MetricError::BadScale)));
    }

    #[test]
    fn gen_ultrametric_output_is_ultrametric_with_trivial_segments() {
        let space = gen_ultrametric(8, 7).unwrap();
        assert!(space.is_ultrametric());
        for (p, q) in space.ordered_pairs() {
            assert!(space.segment_is_trivial(p, q).unwrap());
        }
        assert_eq!(gen_ultrametric(2, 1).unwrap().point_count(), 2);
    }

    #[test]
    fn gen_tree_matches_its_own_edge_list() {
        let (space, edges) = gen_tree_with_edges(9, 3).unwrap();
        let rebuilt = from_graph(&edges, "p0").unwrap();
        assert_eq!(space, rebuilt);
        assert!(matches!(
            gen_tree(1, 0),
            Err(MetricError::TooFewPoints { .. })
        ));
    }

    #[test]
    fn from_graph_builds_fixtures() {
        let chain = vec![
            ("0".to_string(), "a".to_string(), rat_int(1)),
            ("a".to_string(), "b".to_string(), rat_int(1)),
        ];
        assert_eq!(from_graph(&chain, "0").unwrap(), c3());
        let triangle = vec![
            ("0".to_string(), "a".to_string(), rat_int(1)),
            ("a".to_string(), "b".to_string(), rat_int(1)),
            ("b".to_string(), "0".to_string(), rat_int(1)),
        ];
        assert_eq!(from_graph(&triangle, "0").unwrap(), e3());
    }

    #[test]
    fn from_graph_rejects_bad_input() {
        let split = vec![
            ("0".to_string(), "a".to_string(), rat_int(1)),
            ("b".to_string(), "c".to_string(), rat_int(1)),
        ];
        assert_eq!(
            from_graph(&split, "0").unwrap_err(),
            MetricError::Disconnected {
                base: "0".into(),
                label: "b".into(),
            }
        );
        let zero = vec![("0".to_string(), "a".to_string(), rat_int(0))];
        assert!(matches!(
            from_graph(&zero, "0").unwrap_err(),
            MetricError::BadWeight { .. }
        ));
        let loopy = vec![("0".to_string(), "0".to_string(), rat_int(1))];
        assert!(matches!(
            from_graph(&loopy, "0").unwrap_err(),
            MetricError::SelfLoop { .. }
        ));
    }

    #[test]
    fn rebase_keeps_distances() {
        let c = c3();
        let b = c.point_by_label("b").unwrap();
        let moved = c.rebase(b);
        assert_eq!(moved.label(moved.base()), "b");
        for (p, q) in c.ordered_pairs() {
            assert_eq!(c.d(p, q), moved.d(p, q));
        }
    }

    #[test]
    fn space_json_round_trip() {
        let text = r#"{"points": ["0","a","b"], "base": "0",
                       "d": [["0","1","2"],["1","0","1"],["2","1","0"]]}"#;
        let space = space_from_json(text).unwrap();
        assert_eq!(space, c3());
        let canonical = space_to_json(&space);
        assert_eq!(space_from_json(&canonical).unwrap(), space);
        assert_eq!(space_to_json(&space_from_json(&canonical).unwrap()), canonical);
    }

    #[test]
    fn graph_json_and_auto_detection() {
        let graph = r#"{"base": "0", "edges": [["0","a","1"],["a","b","1"]]}"#;
        assert_eq!(graph_from_json(graph).unwrap(), c3());
        assert_eq!(space_or_graph_from_json(graph).unwrap(), c3());
        let space = space_to_json(&c3());
        assert_eq!(space_or_graph_from_json(&space).unwrap(), c3());
        assert!(matches!(
            space_or_graph_from_json(r#"{"foo": 1}"#),
            Err(SpaceFileError::UnknownFormat)
        ));
        assert!(matches!(
            space_from_json(r#"{"points": ["0"], "base": "X", "d": [["0"]]}"#),
            Err(SpaceFileError::Metric(MetricError::UnknownBase { .. }))
        ));
        assert!(matches!(
            space_from_json(r#"{"points": ["0"], "base": "0", "d": [["1/0"]]}"#),
            Err(SpaceFileError::Rational(_))
        ));
    }
}
