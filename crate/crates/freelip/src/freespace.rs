//! Elements of the free space over a finite pointed metric space, and the
//! Lipschitz functions they pair with.
//!
//! A [`FreeElement`] is a finite linear combination of point evaluations
//! delta(x), stored sparsely over non-base points (delta(base) = 0, so base
//! coefficients are dropped on construction and zero coefficients are never
//! stored). Its norm is computed two independent ways: [`norm_dual`]
//! maximizes the pairing against the unit ball of base-vanishing Lipschitz
//! functions, and [`norm_primal`] solves the optimal-transport form, a
//! min-cost flow whose base point absorbs any unbalanced mass. The two agree
//! exactly by duality, and the test suite insists on that; the code never
//! substitutes one for the other.

use crate::exactlp::{self, LinearProgram, LpSolution};
use crate::metric::{FiniteMetricSpace, PointId};
use crate::rational::{format_rational, parse_rational, ParseRationalError, Rational};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FreeSpaceError {
    #[error("operands live on different spaces")]
    SpaceMismatch,
    #[error("molecule endpoints must be distinct")]
    DegenerateMolecule,
    #[error("function must vanish at the base point {label:?}, got {value}")]
    NonzeroAtBase { label: String, value: Rational },
    #[error("unknown point label {label:?}")]
    UnknownLabel { label: String },
    #[error("no value given for point {label:?}")]
    MissingValue { label: String },
    #[error("expected {expected} values, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("subspace family is empty")]
    EmptyFamily,
    #[error("subspace must contain the base point {label:?}")]
    BaseNotInSubspace { label: String },
}

fn same_space(a: &FiniteMetricSpace, b: &FiniteMetricSpace) -> bool {
    std::ptr::eq(a, b) || a == b
}

/// An ordered pair of distinct points naming the molecule
/// (delta(p) - delta(q)) / d(p,q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Molecule {
    p: PointId,
    q: PointId,
}

impl Molecule {
    pub fn new(p: PointId, q: PointId) -> Result<Molecule, FreeSpaceError> {
        if p == q {
            return Err(FreeSpaceError::DegenerateMolecule);
        }
        Ok(Molecule { p, q })
    }

    pub fn p(&self) -> PointId {
        self.p
    }

    pub fn q(&self) -> PointId {
        self.q
    }

    /// The reversed pair (q, p), naming the negated molecule.
    pub fn reversed(&self) -> Molecule {
        Molecule {
            p: self.q,
            q: self.p,
        }
    }

    pub fn element<'a>(&self, space: &'a FiniteMetricSpace) -> FreeElement<'a> {
        molecule_element(space, self.p, self.q).expect("molecule endpoints are distinct")
    }
}

/// A finitely supported element of the free space, in canonical form:
/// no base-point key, no zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeElement<'a> {
    space: &'a FiniteMetricSpace,
    coeffs: BTreeMap<PointId, Rational>,
}

impl<'a> FreeElement<'a> {
    /// Builds an element from (point, coefficient) pairs. Duplicate points
    /// are summed; base-point and zero contributions are dropped.
    pub fn new(
        space: &'a FiniteMetricSpace,
        coeffs: impl IntoIterator<Item = (PointId, Rational)>,
    ) -> FreeElement<'a> {
        let base = space.base();
        let mut map: BTreeMap<PointId, Rational> = BTreeMap::new();
        for (x, c) in coeffs {
            assert!(x.0 < space.point_count(), "point id out of range");
            if x == base || c.is_zero() {
                continue;
            }
            let entry = map.entry(x).or_insert_with(Rational::zero);
            *entry += c;
            if entry.is_zero() {
                map.remove(&x);
            }
        }
        FreeElement { space, coeffs: map }
    }

    pub fn zero(space: &'a FiniteMetricSpace) -> FreeElement<'a> {
        FreeElement {
            space,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn space(&self) -> &'a FiniteMetricSpace {
        self.space
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of delta(x); zero for the base point and off-support
    /// points.
    pub fn coeff(&self, x: PointId) -> Rational {
        self.coeffs.get(&x).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (PointId, &Rational)> + '_ {
        self.coeffs.iter().map(|(k, v)| (*k, v))
    }

    /// The support: points with a nonzero coefficient, ascending. The base
    /// point is never reported, matching the convention that mass at the
    /// base is invisible to the pairing.
    pub fn support(&self) -> Vec<PointId> {
        self.coeffs.keys().copied().collect()
    }

    /// Dense coefficient vector over non-base points in ascending id order
    /// (the coordinate system shared by hull tests and file output).
    pub fn coefficient_vector(&self) -> Vec<Rational> {
        self.space
            .points()
            .filter(|&x| x != self.space.base())
            .map(|x| self.coeff(x))
            .collect()
    }

    pub fn add(&self, other: &FreeElement<'a>) -> Result<FreeElement<'a>, FreeSpaceError> {
        if !same_space(self.space, other.space) {
            return Err(FreeSpaceError::SpaceMismatch);
        }
        Ok(FreeElement::new(
            self.space,
            self.coeffs
                .iter()
                .chain(other.coeffs.iter())
                .map(|(k, v)| (*k, v.clone())),
        ))
    }

    pub fn scale(&self, c: &Rational) -> FreeElement<'a> {
        FreeElement::new(
            self.space,
            self.coeffs.iter().map(|(k, v)| (*k, v * c)),
        )
    }

    pub fn neg(&self) -> FreeElement<'a> {
        FreeElement::new(
            self.space,
            self.coeffs.iter().map(|(k, v)| (*k, -v)),
        )
    }

    /// The canonical pairing with a base-vanishing Lipschitz function:
    /// sum of coeff(x) * f(x).
    pub fn pairing(&self, f: &LipFunction<'a>) -> Result<Rational, FreeSpaceError> {
        if !same_space(self.space, f.space) {
            return Err(FreeSpaceError::SpaceMismatch);
        }
        let mut acc = Rational::zero();
        for (x, c) in &self.coeffs {
            acc += c * f.value(*x);
        }
        Ok(acc)
    }

    /// True iff the element lies in the subspace spanned by deltas of `k`
    /// (which must contain the base point).
    ///
    /// Decided twice: by pairing against the indicator function of every
    /// point outside `k` (each such indicator vanishes on `k`, is Lipschitz
    /// because the space is finite, and together they span everything that
    /// vanishes on `k`), and by the direct inclusion support ⊆ k. The two
    /// answers are asserted equal before one is returned.
    pub fn in_subspace(&self, k: &BTreeSet<PointId>) -> Result<bool, FreeSpaceError> {
        let base = self.space.base();
        if !k.contains(&base) {
            return Err(FreeSpaceError::BaseNotInSubspace {
                label: self.space.label(base).to_string(),
            });
        }
        let mut via_annihilator = true;
        for x in self.space.points() {
            if k.contains(&x) {
                continue;
            }
            let mut values = vec![Rational::zero(); self.space.point_count()];
            values[x.0] = Rational::one();
            let indicator =
                LipFunction::new(self.space, values).expect("indicator vanishes at base");
            if !self.pairing(&indicator)?.is_zero() {
                via_annihilator = false;
                break;
            }
        }
        let via_support = self.support().iter().all(|x| k.contains(x));
        assert_eq!(
            via_annihilator, via_support,
            "annihilator and support membership disagree"
        );
        Ok(via_support)
    }
}

/// The molecule (delta(p) - delta(q)) / d(p,q) as a free element.
pub fn molecule_element<'a>(
    space: &'a FiniteMetricSpace,
    p: PointId,
    q: PointId,
) -> Result<FreeElement<'a>, FreeSpaceError> {
    if p == q {
        return Err(FreeSpaceError::DegenerateMolecule);
    }
    let d = space.d(p, q);
    let inv = Rational::one() / d;
    Ok(FreeElement::new(
        space,
        [(p, inv.clone()), (q, -inv)],
    ))
}

/// The point evaluation delta(x); the zero element when x is the base.
pub fn delta<'a>(space: &'a FiniteMetricSpace, x: PointId) -> FreeElement<'a> {
    FreeElement::new(space, [(x, Rational::one())])
}

/// A real function on the space vanishing at the base point, stored as a
/// full value vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LipFunction<'a> {
    space: &'a FiniteMetricSpace,
    values: Vec<Rational>,
}

impl<'a> LipFunction<'a> {
    pub fn new(
        space: &'a FiniteMetricSpace,
        values: Vec<Rational>,
    ) -> Result<LipFunction<'a>, FreeSpaceError> {
        if values.len() != space.point_count() {
            return Err(FreeSpaceError::WrongLength {
                expected: space.point_count(),
                got: values.len(),
            });
        }
        let base = space.base();
        if !values[base.0].is_zero() {
            return Err(FreeSpaceError::NonzeroAtBase {
                label: space.label(base).to_string(),
                value: values[base.0].clone(),
            });
        }
        Ok(LipFunction { space, values })
    }

    /// The 1-Lipschitz function d(., x) - d(base, x).
    pub fn distance_from(space: &'a FiniteMetricSpace, x: PointId) -> LipFunction<'a> {
        let shift = space.d(space.base(), x).clone();
        let values = space.points().map(|y| space.d(y, x) - &shift).collect();
        LipFunction { space, values }
    }

    pub fn space(&self) -> &'a FiniteMetricSpace {
        self.space
    }

    pub fn value(&self, x: PointId) -> &Rational {
        &self.values[x.0]
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// The Lipschitz constant: the largest difference quotient
    /// (f(p) - f(q)) / d(p,q) over ordered pairs; 0 on a singleton.
    pub fn lip_norm(&self) -> Rational {
        let mut best = Rational::zero();
        for (p, q) in self.space.ordered_pairs() {
            let quotient = (self.value(p) - self.value(q)) / self.space.d(p, q);
            if quotient > best {
                best = quotient;
            }
        }
        best
    }

    /// Largest absolute value.
    pub fn sup_norm(&self) -> Rational {
        self.values
            .iter()
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// Pointwise product of two functions on the same space. The result
/// vanishes at the base because both factors do; before returning, both
/// product-norm bounds are checked on the actual values:
/// lip(fg) <= lip(f) sup(g) + lip(g) sup(f) <= 2 diam lip(f) lip(g).
pub fn product_function<'a>(
    f: &LipFunction<'a>,
    g: &LipFunction<'a>,
) -> Result<LipFunction<'a>, FreeSpaceError> {
    if !same_space(f.space, g.space) {
        return Err(FreeSpaceError::SpaceMismatch);
    }
    let values: Vec<Rational> = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| a * b)
        .collect();
    let product = LipFunction {
        space: f.space,
        values,
    };
    let mixed = &(&f.lip_norm() * &g.sup_norm()) + &(&g.lip_norm() * &f.sup_norm());
    assert!(
        product.lip_norm() <= mixed,
        "product norm exceeded the mixed bound"
    );
    let two_diam = Rational::from_integer(2.into()) * f.space.diameter();
    assert!(
        mixed <= &two_diam * &(&f.lip_norm() * &g.lip_norm()),
        "mixed bound exceeded the diameter bound"
    );
    Ok(product)
}

/// The weighted element with coefficients coeff(x) * g(x): the unique
/// element pairing as <mu . g, f> = <mu, f g> on a finite space.
pub fn weight_element<'a>(
    mu: &FreeElement<'a>,
    g: &LipFunction<'a>,
) -> Result<FreeElement<'a>, FreeSpaceError> {
    if !same_space(mu.space, g.space) {
        return Err(FreeSpaceError::SpaceMismatch);
    }
    Ok(FreeElement::new(
        mu.space,
        mu.coeffs.iter().map(|(x, c)| (*x, c * g.value(*x))),
    ))
}

/// Intersection of delta-spanned subspaces: each set must contain the base
/// point and the family must be nonempty.
///
/// Before returning the plain set intersection, the membership equivalence
/// "in every F(K_i) iff in F(of the intersection)" is asserted over the
/// delta(x) family, which decides it for the whole span.
pub fn subspace_intersection(
    space: &FiniteMetricSpace,
    families: &[BTreeSet<PointId>],
) -> Result<BTreeSet<PointId>, FreeSpaceError> {
    if families.is_empty() {
        return Err(FreeSpaceError::EmptyFamily);
    }
    let base = space.base();
    for k in families {
        if !k.contains(&base) {
            return Err(FreeSpaceError::BaseNotInSubspace {
                label: space.label(base).to_string(),
            });
        }
    }
    let mut meet = families[0].clone();
    for k in &families[1..] {
        meet = meet.intersection(k).copied().collect();
    }
    for x in space.points() {
        let mu = delta(space, x);
        let in_all = families
            .iter()
            .map(|k| mu.in_subspace(k))
            .collect::<Result<Vec<bool>, _>>()?
            .into_iter()
            .all(|b| b);
        let in_meet = mu.in_subspace(&meet)?;
        assert_eq!(
            in_all, in_meet,
            "membership in every factor must match membership in the intersection"
        );
    }
    Ok(meet)
}

/// Exact norm and a norming function: maximizes the pairing over all
/// base-vanishing functions with every difference quotient at most 1.
/// The witness attains the value and has Lipschitz constant at most 1.
pub fn norm_dual<'a>(mu: &FreeElement<'a>) -> (Rational, LipFunction<'a>) {
    let space = mu.space;
    let n = space.point_count();
    let base = space.base();
    let mut col_of = vec![None; n];
    let mut k = 0;
    for x in space.points() {
        if x != base {
            col_of[x.0] = Some(k);
            k += 1;
        }
    }
    let mut lp = LinearProgram::new(k);
    for (x, c) in &mu.coeffs {
        lp.objective[col_of[x.0].expect("support excludes base")] = c.clone();
    }
    for (p, q) in space.ordered_pairs() {
        let mut row = vec![Rational::zero(); k];
        if let Some(cp) = col_of[p.0] {
            row[cp] += Rational::one();
        }
        if let Some(cq) = col_of[q.0] {
            row[cq] -= Rational::one();
        }
        lp.add_le(row, space.d(p, q).clone());
    }
    let solution = exactlp::solve(&lp).expect("norming program is well-formed");
    let LpSolution::Optimal { value, point } = solution else {
        unreachable!("the Lipschitz unit ball is a nonempty compact polytope");
    };
    let mut values = vec![Rational::zero(); n];
    for x in space.points() {
        if let Some(c) = col_of[x.0] {
            values[x.0] = point[c].clone();
        }
    }
    let witness = LipFunction { space, values };
    (value, witness)
}

/// Exact norm and an optimal transport plan: minimizes the total cost
/// sum t(x,y) d(x,y) over nonnegative arc flows whose net divergence at
/// every non-base point equals the coefficient there; the base point has no
/// balance row, so it absorbs whatever mass is left over. Arcs with zero
/// flow are omitted from the returned plan.
pub fn norm_primal(
    mu: &FreeElement<'_>,
) -> (Rational, BTreeMap<(PointId, PointId), Rational>) {
    let space = mu.space;
    let arcs: Vec<(PointId, PointId)> = space.ordered_pairs().collect();
    let k = arcs.len();
    let mut lp = LinearProgram::new(k);
    for (a, &(x, y)) in arcs.iter().enumerate() {
        lp.objective[a] = -space.d(x, y);
        let mut row = vec![Rational::zero(); k];
        row[a] = -Rational::one();
        lp.add_le(row, Rational::zero());
    }
    for v in space.points() {
        if v == space.base() {
            continue;
        }
        let mut row = vec![Rational::zero(); k];
        for (a, &(x, y)) in arcs.iter().enumerate() {
            if x == v {
                row[a] += Rational::one();
            }
            if y == v {
                row[a] -= Rational::one();
            }
        }
        lp.add_eq(row, mu.coeff(v));
    }
    let solution = exactlp::solve(&lp).expect("transport program is well-formed");
    let LpSolution::Optimal { value, point } = solution else {
        unreachable!("direct arcs to the base give a feasible plan; cost is bounded below");
    };
    let mut flow = BTreeMap::new();
    for (a, &(x, y)) in arcs.iter().enumerate() {
        if !point[a].is_zero() {
            flow.insert((x, y), point[a].clone());
        }
    }
    (-value, flow)
}

#[derive(Debug, Error)]
pub enum FreeFileError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Rational(#[from] ParseRationalError),
    #[error(transparent)]
    Free(#[from] FreeSpaceError),
}

#[derive(Serialize, Deserialize)]
struct ElementFile {
    coeffs: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct FunctionFile {
    values: BTreeMap<String, String>,
}

/// Parses `{"coeffs": {"a": "1", "b": "-1/2"}}` against a space. Unknown
/// labels are rejected; base-point and zero entries are dropped as usual.
pub fn element_from_json<'a>(
    space: &'a FiniteMetricSpace,
    text: &str,
) -> Result<FreeElement<'a>, FreeFileError> {
    let file: ElementFile = serde_json::from_str(text)?;
    let mut pairs = Vec::with_capacity(file.coeffs.len());
    for (label, raw) in &file.coeffs {
        let x = space
            .point_by_label(label)
            .ok_or_else(|| FreeSpaceError::UnknownLabel {
                label: label.clone(),
            })?;
        pairs.push((x, parse_rational(raw)?));
    }
    Ok(FreeElement::new(space, pairs))
}

/// Serializes an element's canonical coefficients, labels as keys.
pub fn element_to_json(mu: &FreeElement<'_>) -> String {
    let file = ElementFile {
        coeffs: mu
            .iter()
            .map(|(x, c)| (mu.space().label(x).to_string(), format_rational(c)))
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("element file serializes");
    out.push('\n');
    out
}

/// Parses `{"values": {"0": "0", "a": "1", ...}}`; every point must receive
/// exactly one value and the base value must be 0.
pub fn function_from_json<'a>(
    space: &'a FiniteMetricSpace,
    text: &str,
) -> Result<LipFunction<'a>, FreeFileError> {
    let file: FunctionFile = serde_json::from_str(text)?;
    for label in file.values.keys() {
        if space.point_by_label(label).is_none() {
            return Err(FreeSpaceError::UnknownLabel {
                label: label.clone(),
            }
            .into());
        }
    }
    let mut values = Vec::with_capacity(space.point_count());
    for x in space.points() {
        let label = space.label(x);
        let raw = file
            .values
            .get(label)
            .ok_or_else(|| FreeSpaceError::MissingValue {
                label: label.to_string(),
            })?;
        values.push(parse_rational(raw)?);
    }
    Ok(LipFunction::new(space, values)?)
}

/// Serializes a function's full value vector, labels as keys.
pub fn function_to_json(f: &LipFunction<'_>) -> String {
    let file = FunctionFile {
        values: f
            .space()
            .points()
            .map(|x| (f.space().label(x).to_string(), format_rational(f.value(x))))
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("function file serializes");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};
    use crate::testutil::{c3, e3};

    fn pid(space: &FiniteMetricSpace, label: &str) -> PointId {
        space.point_by_label(label).unwrap()
    }

    #[test]
    fn molecule_coefficients_on_the_colinear_space() {
        let c = c3();
        let (z, a, b) = (pid(&c, "0"), pid(&c, "a"), pid(&c, "b"));
        let m = molecule_element(&c, a, b).unwrap();
        assert_eq!(m.coeff(a), rat_int(1));
        assert_eq!(m.coeff(b), rat_int(-1));
        let m = molecule_element(&c, z, b).unwrap();
        assert_eq!(m.support(), vec![b]);
        assert_eq!(m.coeff(b), rat(-1, 2));
        for (p, q) in c.ordered_pairs() {
            let forward = molecule_element(&c, p, q).unwrap();
            let backward = molecule_element(&c, q, p).unwrap();
            assert_eq!(forward.neg(), backward);
        }
        assert!(matches!(
            molecule_element(&c, a, a),
            Err(FreeSpaceError::DegenerateMolecule)
        ));
    }

    #[test]
    fn lip_norm_examples() {
        let c = c3();
        let base_distance = LipFunction::distance_from(&c, c.base());
        assert_eq!(base_distance.lip_norm(), rat_int(1));
        let f = LipFunction::new(&c, vec![rat_int(0), rat_int(1), rat_int(2)]).unwrap();
        assert_eq!(f.lip_norm(), rat_int(1));
        let zero = LipFunction::new(&c, vec![rat_int(0); 3]).unwrap();
        assert_eq!(zero.lip_norm(), rat_int(0));
        let e = e3();
        assert_eq!(LipFunction::distance_from(&e, e.base()).lip_norm(), rat_int(1));
    }

    #[test]
    fn function_constructor_rejects_bad_input() {
        let c = c3();
        assert!(matches!(
            LipFunction::new(&c, vec![rat_int(1), rat_int(0), rat_int(0)]),
            Err(FreeSpaceError::NonzeroAtBase { .. })
        ));
        assert!(matches!(
            LipFunction::new(&c, vec![rat_int(0)]),
            Err(FreeSpaceError::WrongLength { .. })
        ));
    }

    #[test]
    fn dual_norm_embeds_points_isometrically() {
        let c = c3();
        for x in c.points() {
            let (value, witness) = norm_dual(&delta(&c, x));
            assert_eq!(value, *c.d(x, c.base()));
            assert!(witness.lip_norm() <= rat_int(1));
        }
    }

    #[test]
    fn dual_norm_on_a_two_point_sum() {
        let c = c3();
        let (a, b) = (pid(&c, "a"), pid(&c, "b"));
        let mu = delta(&c, a).add(&delta(&c, b)).unwrap();
        let (value, witness) = norm_dual(&mu);
        assert_eq!(value, rat_int(3));
        assert_eq!(
            witness.values(),
            &[rat_int(0), rat_int(1), rat_int(2)]
        );
        assert_eq!(mu.pairing(&witness).unwrap(), value);
    }

    #[test]
    fn molecules_have_norm_one() {
        for space in [c3(), e3()] {
            for (p, q) in space.ordered_pairs() {
                let m = molecule_element(&space, p, q).unwrap();
                let (dual, _) = norm_dual(&m);
                assert_eq!(dual, rat_int(1));
                let (primal, _) = norm_primal(&m);
                assert_eq!(primal, rat_int(1));
            }
        }
    }

    #[test]
    fn primal_norm_and_flows() {
        let c = c3();
        let (z, a, b) = (pid(&c, "0"), pid(&c, "a"), pid(&c, "b"));
        let (value, flow) = norm_primal(&delta(&c, a));
        assert_eq!(value, rat_int(1));
        assert_eq!(flow, BTreeMap::from([((a, z), rat_int(1))]));
        let mu = delta(&c, a).add(&delta(&c, b)).unwrap();
        let (value, flow) = norm_primal(&mu);
        assert_eq!(value, rat_int(3));
        // Whatever the arcs, the plan must be nonnegative, balanced, and
        // cost exactly the value.
        let mut cost = Rational::zero();
        for ((x, y), t) in &flow {
            assert!(*t > Rational::zero());
            cost += t * c.d(*x, *y);
        }
        assert_eq!(cost, value);
        for v in [a, b] {
            let mut net = Rational::zero();
            for ((x, y), t) in &flow {
                if *x == v {
                    net += t;
                }
                if *y == v {
                    net -= t;
                }
            }
            assert_eq!(net, mu.coeff(v));
        }
        let (value, flow) = norm_primal(&FreeElement::zero(&c));
        assert_eq!(value, rat_int(0));
        assert!(flow.is_empty());
    }

    #[test]
    fn support_is_canonical() {
        let c = c3();
        let (z, a, b) = (pid(&c, "0"), pid(&c, "a"), pid(&c, "b"));
        let mu = FreeElement::new(&c, [(a, rat_int(3)), (b, rat_int(-1))]);
        assert_eq!(mu.support(), vec![a, b]);
        let cancel = delta(&c, a).add(&delta(&c, a).neg()).unwrap();
        assert!(cancel.is_zero());
        assert_eq!(cancel.support(), vec![]);
        let m = molecule_element(&c, z, b).unwrap();
        assert_eq!(m.support(), vec![b]);
    }

    #[test]
    fn subspace_membership_both_paths() {
        let c = c3();
        let (z, a, b) = (pid(&c, "0"), pid(&c, "a"), pid(&c, "b"));
        let mu = delta(&c, a);
        assert!(mu.in_subspace(&BTreeSet::from([z, a])).unwrap());
        assert!(!mu.in_subspace(&BTreeSet::from([z, b])).unwrap());
        assert!(FreeElement::zero(&c)
            .in_subspace(&BTreeSet::from([z]))
            .unwrap());
        assert!(matches!(
            mu.in_subspace(&BTreeSet::from([a])),
            Err(FreeSpaceError::BaseNotInSubspace { .. })
        ));
    }

    #[test]
    fn subspace_intersection_examples() {
        let c = c3();
        let (z, a, b) = (pid(&c, "0"), pid(&c, "a"), pid(&c, "b"));
        let meet = subspace_intersection(
            &c,
            &[BTreeSet::from([z, a]), BTreeSet::from([z, b])],
        )
        .unwrap();
        assert_eq!(meet, BTreeSet::from([z]));
        let full = BTreeSet::from([z, a, b]);
        assert_eq!(
            subspace_intersection(&c, &[full.clone(), full.clone()]).unwrap(),
            full
        );
        assert!(matches!(
            subspace_intersection(&c, &[]),
            Err(FreeSpaceError::EmptyFamily)
        ));
    }

    #[test]
    fn weighting_by_a_function() {
        let c = c3();
        let (a, b) = (pid(&c, "a"), pid(&c, "b"));
        let g2 = LipFunction::new(&c, vec![rat_int(0), rat_int(2), rat_int(0)]).unwrap();
        let weighted = weight_element(&delta(&c, a), &g2).unwrap();
        assert_eq!(weighted, delta(&c, a).scale(&rat_int(2)));
        let zero_fn = LipFunction::new(&c, vec![rat_int(0); 3]).unwrap();
        let mu = delta(&c, a).add(&delta(&c, b)).unwrap();
        assert!(weight_element(&mu, &zero_fn).unwrap().is_zero());

        let g = LipFunction::distance_from(&c, c.base());
        let weighted = weight_element(&mu, &g).unwrap();
        assert_eq!(weighted.coeff(a), rat_int(1));
        assert_eq!(weighted.coeff(b), rat_int(2));
        // <mu.g, f> = <mu, fg> for a probe function.
        let f = LipFunction::new(&c, vec![rat_int(0), rat(1, 3), rat_int(-1)]).unwrap();
        let fg = product_function(&f, &g).unwrap();
        assert_eq!(
            weighted.pairing(&f).unwrap(),
            mu.pairing(&fg).unwrap()
        );
        // Norm bound with explicit constants: 2 * diam * |mu| * lip(g).
        let (weighted_norm, _) = norm_dual(&weighted);
        let (mu_norm, _) = norm_dual(&mu);
        assert_eq!(mu_norm, rat_int(3));
        assert_eq!(weighted_norm, rat_int(5));
        let bound = rat_int(2) * c.diameter() * mu_norm * g.lip_norm();
        assert!(weighted_norm <= bound);
        assert!(matches!(
            weight_element(&delta(&e3(), PointId(1)), &g),
            Err(FreeSpaceError::SpaceMismatch)
        ));
    }

    #[test]
    fn products_of_functions() {
        let c = c3();
        let f = LipFunction::distance_from(&c, c.base());
        let zero_fn = LipFunction::new(&c, vec![rat_int(0); 3]).unwrap();
        let z = product_function(&f, &zero_fn).unwrap();
        assert_eq!(z.values(), &[rat_int(0), rat_int(0), rat_int(0)]);
        let fg = product_function(&f, &f).unwrap();
        assert_eq!(fg.values(), &[rat_int(0), rat_int(1), rat_int(4)]);
        assert_eq!(fg.lip_norm(), rat_int(3));
        // Mixed bound evaluates to 1*2 + 1*2 = 4 here.
        let mixed = f.lip_norm() * f.sup_norm() + f.lip_norm() * f.sup_norm();
        assert_eq!(mixed, rat_int(4));
        assert!(fg.lip_norm() <= mixed);
    }

    #[test]
    fn element_json_round_trip() {
        let c = c3();
        let (a, b) = (pid(&c, "a"), pid(&c, "b"));
        let mu = element_from_json(&c, r#"{"coeffs": {"a": "1", "b": "-1/2"}}"#).unwrap();
        assert_eq!(mu.coeff(a), rat_int(1));
        assert_eq!(mu.coeff(b), rat(-1, 2));
        let text = element_to_json(&mu);
        assert_eq!(element_from_json(&c, &text).unwrap(), mu);
        // Base and zero entries are dropped quietly.
        let trimmed =
            element_from_json(&c, r#"{"coeffs": {"0": "7", "a": "0", "b": "1"}}"#).unwrap();
        assert_eq!(trimmed.support(), vec![b]);
        assert!(matches!(
            element_from_json(&c, r#"{"coeffs": {"nope": "1"}}"#),
            Err(FreeFileError::Free(FreeSpaceError::UnknownLabel { .. }))
        ));
    }

    #[test]
    fn function_json_round_trip() {
        let c = c3();
        let f =
            function_from_json(&c, r#"{"values": {"0": "0", "a": "1", "b": "2"}}"#).unwrap();
        assert_eq!(f.values(), &[rat_int(0), rat_int(1), rat_int(2)]);
        let text = function_to_json(&f);
        assert_eq!(function_from_json(&c, &text).unwrap(), f);
        assert!(matches!(
            function_from_json(&c, r#"{"values": {"0": "0", "a": "1"}}"#),
            Err(FreeFileError::Free(FreeSpaceError::MissingValue { .. }))
        ));
        assert!(matches!(
            function_from_json(&c, r#"{"values": {"0": "1", "a": "1", "b": "2"}}"#),
            Err(FreeFileError::Free(FreeSpaceError::NonzeroAtBase { .. }))
        ));
    }
}
