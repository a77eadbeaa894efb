//! Fans dual to reflexive polytopes, regular subdivisions from height
//! vectors, the MPCP/MPCS decisions, support functions and moment
//! polytopes.
//!
//! A height vector kappa on the codimension >= 2 points P induces the
//! largest convex positively-homogeneous function psi with
//! psi(t p) <= t kappa_p; its domains of linearity are found as the lower
//! facets of the lifted cone over {(p, kappa_p)} and carry exact rational
//! linear certificates.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::field::{Mat, Rationals};
use crate::linalg::{primitive_part, smith_normal_form, IntMatrix};
use crate::lp::{feasible_point, in_cone, simplex_min, LpOutcome};
use crate::polytope::{subsets_of_size, LatticePolytope, PolytopeError};
use crate::{dot_qi, dot_qq, IVec, QVec};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FanError {
    NotReflexive,
    PointsDoNotSpan,
    HeightsNotPositive,
    HeightDomainMismatch,
    OutsideSupport,
    InconsistentSupportValues,
    Unbounded,
    MissingCertificates,
    NotSimplicial,
    Polytope(PolytopeError),
}

impl core::fmt::Display for FanError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let msg = match self {
            FanError::NotReflexive => "input polytope is not reflexive",
            FanError::PointsDoNotSpan => "points do not span the ambient space",
            FanError::HeightsNotPositive => "heights must be strictly positive",
            FanError::HeightDomainMismatch => "height vector domain differs from P",
            FanError::OutsideSupport => "point outside the support of the fan",
            FanError::InconsistentSupportValues => "ray values are not cone-wise linear",
            FanError::Unbounded => "region is unbounded",
            FanError::MissingCertificates => "fan carries no linear-form certificates",
            FanError::NotSimplicial => "fan is not simplicial",
            FanError::Polytope(e) => return write!(f, "{e}"),
        };
        f.write_str(msg)
    }
}

impl From<PolytopeError> for FanError {
    fn from(e: PolytopeError) -> Self {
        FanError::Polytope(e)
    }
}

/// A pointed rational polyhedral cone, stored by its primitive ray
/// generators, sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cone {
    gens: Vec<IVec>,
}

impl Cone {
    pub fn new(mut gens: Vec<IVec>) -> Self {
        for g in gens.iter_mut() {
            *g = primitive_part(g).expect("cone generators are nonzero");
        }
        gens.sort();
        gens.dedup();
        Cone { gens }
    }

    pub fn zero(_rank: usize) -> Self {
        Cone { gens: Vec::new() }
    }

    pub fn gens(&self) -> &[IVec] {
        &self.gens
    }

    pub fn dim(&self) -> usize {
        if self.gens.is_empty() {
            0
        } else {
            IntMatrix::from_rows(&self.gens).rank()
        }
    }

    pub fn contains(&self, x: &[BigRational]) -> bool {
        in_cone(&self.gens, x).is_some()
    }

    pub fn contains_int(&self, x: &[BigInt]) -> bool {
        let q: QVec = x
            .iter()
            .map(|v| BigRational::from_integer(v.clone()))
            .collect();
        self.contains(&q)
    }

    /// True when the generators are part of a lattice basis.
    pub fn is_unimodular(&self) -> bool {
        if self.gens.is_empty() {
            return true;
        }
        let snf = smith_normal_form(&IntMatrix::from_rows(&self.gens));
        let ones = snf.diag.iter().filter(|d| **d == BigInt::one()).count();
        ones == self.gens.len()
    }

    /// Facet-defining functionals of the cone (tight on a facet,
    /// nonnegative... nonpositive on the cone): w with <w, g> <= 0 on all
    /// generators and equality exactly on the facet.
    pub fn facet_normals(&self, rank: usize) -> Vec<IVec> {
        let d = self.dim();
        if d == 0 {
            return Vec::new();
        }
        let mut seen: BTreeSet<IVec> = BTreeSet::new();
        let mut out = Vec::new();
        // A facet of a d-dimensional cone is spanned by >= d-1 generators
        // together with the origin; enumerate (d-1)-subsets.
        for subset in subsets_of_size(self.gens.len(), d - 1) {
            let pts: Vec<IVec> = subset.iter().map(|&i| self.gens[i].clone()).collect();
            for w in linear_span_normals(&pts, &self.gens, rank) {
                if seen.insert(w.clone()) {
                    out.push(w);
                }
            }
        }
        out
    }

    /// Generators lying on all of the given (tight) functionals.
    fn face_gens(&self, normals: &[IVec]) -> Vec<IVec> {
        self.gens
            .iter()
            .filter(|g| normals.iter().all(|w| crate::dot(w, g).is_zero()))
            .cloned()
            .collect()
    }

    /// All faces as generator subsets (including the zero cone and the
    /// cone itself), each canonicalized.
    pub fn faces(&self, rank: usize) -> Vec<Cone> {
        let normals = self.facet_normals(rank);
        let mut sets: BTreeSet<Vec<IVec>> = BTreeSet::new();
        sets.insert(self.gens.clone());
        sets.insert(Vec::new());
        // Close under intersections of facet sets.
        let facet_sets: Vec<Vec<IVec>> = normals.iter().map(|w| self.face_gens(&[w.clone()])).collect();
        let mut frontier: Vec<Vec<IVec>> = facet_sets.clone();
        while let Some(fs) = frontier.pop() {
            if !sets.insert(fs.clone()) {
                continue;
            }
            for other in &facet_sets {
                let inter: Vec<IVec> = fs
                    .iter()
                    .filter(|g| other.contains(g))
                    .cloned()
                    .collect();
                if !sets.contains(&inter) {
                    frontier.push(inter);
                }
            }
        }
        sets.into_iter().map(|gens| Cone { gens }).collect()
    }

    /// The minimal face containing an interior point of the subcone
    /// spanned by `sub` (which must lie inside this cone).
    pub fn minimal_face_containing(&self, sub: &[IVec], rank: usize) -> Cone {
        if sub.is_empty() {
            return Cone::zero(rank);
        }
        let mut s = alloc::vec![BigInt::zero(); rank];
        for g in sub {
            for (t, x) in s.iter_mut().zip(g) {
                *t += x;
            }
        }
        let active: Vec<IVec> = self
            .facet_normals(rank)
            .into_iter()
            .filter(|w| crate::dot(w, &s).is_zero())
            .collect();
        if active.is_empty() {
            return self.clone();
        }
        Cone {
            gens: self.face_gens(&active),
        }
    }
}

/// Primitive normals w of hyperplanes containing the given points with
/// <w, g> <= 0 for every generator and at least one strict; both
/// orientations are tried.
fn linear_span_normals(pts: &[IVec], all_gens: &[IVec], rank: usize) -> Vec<IVec> {
    // Kernel of the matrix whose rows are pts, intersected with the
    // requirement of vanishing on them; facets need kernel dimension
    // rank - (d-1) >= 1; we only use rank-1 kernels of the span.
    let q = Rationals;
    let rows = pts.len();
    let mut m = Mat::<Rationals>::zero(&q, rows.max(1), rank);
    for (r, p) in pts.iter().enumerate() {
        for (c, x) in p.iter().enumerate() {
            m.set(r, c, BigRational::from_integer(x.clone()));
        }
    }
    let kernel = m.kernel(&q);
    let mut out = Vec::new();
    // Among kernel directions, facet normals are those with a sign
    // condition over all generators. For cones of full dimension the
    // kernel is 1-dimensional per facet candidate; lower-dimensional
    // cones also carry their span's normals, handled by scanning each
    // kernel basis vector individually.
    for v in kernel {
        let mut denom = BigInt::one();
        for x in &v {
            denom = num_integer::lcm(denom, x.denom().clone());
        }
        let ints: IVec = v
            .iter()
            .map(|x| (x * BigRational::from_integer(denom.clone())).to_integer())
            .collect();
        let Ok(w) = primitive_part(&ints) else {
            continue;
        };
        for cand in [w.clone(), w.iter().map(|x| -x.clone()).collect::<IVec>()] {
            let mut any_strict = false;
            let mut ok = true;
            for g in all_gens {
                let d = crate::dot(&cand, g);
                if d.is_positive() {
                    ok = false;
                    break;
                }
                if d.is_negative() {
                    any_strict = true;
                }
            }
            if ok && any_strict {
                out.push(cand);
            }
        }
    }
    out
}

/// A fan, stored by its maximal cones. When produced from a height
/// vector, each maximal cone carries the linear form certifying the
/// piecewise structure, and `cells` records the tight lifted points.
#[derive(Clone, Debug)]
pub struct Fan {
    pub rank: usize,
    pub max_cones: Vec<Cone>,
    /// Per-maximal-cone linear form m with <m, p> = kappa_p on the cell.
    pub forms: Option<Vec<QVec>>,
    /// Per-maximal-cone tight subset of P (for induced fans).
    pub cells: Option<Vec<Vec<IVec>>>,
}

impl Fan {
    pub fn rays(&self) -> Vec<IVec> {
        let mut out: Vec<IVec> = self
            .max_cones
            .iter()
            .flat_map(|c| c.gens().iter().cloned())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// All cones of the fan (faces of maximal cones), canonicalized.
    pub fn all_cones(&self) -> Vec<Cone> {
        let mut set: BTreeSet<Cone> = BTreeSet::new();
        for c in &self.max_cones {
            if c.gens().len() == c.dim() {
                // Simplicial: faces are exactly the generator subsets.
                for subset in all_subsets(c.gens()) {
                    set.insert(Cone { gens: subset });
                }
            } else {
                for f in c.faces(self.rank) {
                    set.insert(f);
                }
            }
        }
        set.into_iter().collect()
    }

    /// The maximal cone containing x, if any.
    pub fn locate(&self, x: &[BigRational]) -> Option<usize> {
        self.max_cones.iter().position(|c| c.contains(x))
    }

    /// Fan axiom check: distinct cones have disjoint relative interiors.
    pub fn relint_disjoint(&self) -> bool {
        let cones = self.all_cones();
        for i in 0..cones.len() {
            for j in i + 1..cones.len() {
                if crate::lp::relint_intersect(cones[i].gens(), cones[j].gens()) {
                    return false;
                }
            }
        }
        true
    }
}

fn all_subsets(gens: &[IVec]) -> Vec<Vec<IVec>> {
    let n = gens.len();
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0..(1u32 << n) {
        let mut s: Vec<IVec> = Vec::new();
        for (i, g) in gens.iter().enumerate() {
            if mask & (1 << i) != 0 {
                s.push(g.clone());
            }
        }
        s.sort();
        out.push(s);
    }
    out
}

/// The fan dual to a reflexive polytope: maximal cones over the facets of
/// the polar dual, rays along its vertices.
pub fn dual_fan(delta: &LatticePolytope) -> Result<Fan, FanError> {
    if !delta.is_reflexive() {
        return Err(FanError::NotReflexive);
    }
    let dual = delta.polar_dual()?;
    let mut max_cones = Vec::new();
    // Facets of the dual correspond to vertices of delta.
    for x in delta.vertices() {
        let gens: Vec<IVec> = dual
            .vertices()
            .iter()
            .filter(|y| crate::dot(x, y) == -BigInt::one())
            .cloned()
            .collect();
        max_cones.push(Cone::new(gens));
    }
    max_cones.sort();
    max_cones.dedup();
    Ok(Fan {
        rank: delta.rank(),
        max_cones,
        forms: None,
        cells: None,
    })
}

/// simplicial: every maximal cone has exactly rank generators;
/// smooth: additionally every generator matrix has |det| = 1.
pub fn regularity_flags(fan: &Fan) -> (bool, bool) {
    let simplicial = fan
        .max_cones
        .iter()
        .all(|c| c.gens().len() == fan.rank);
    let smooth = simplicial
        && fan.max_cones.iter().all(|c| {
            IntMatrix::from_rows(c.gens()).det().abs() == BigInt::one()
        });
    (simplicial, smooth)
}

/// Strictly positive rational heights on a point set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightVector {
    entries: Vec<(IVec, BigRational)>,
}

impl HeightVector {
    /// Strictly positive heights, the usual case.
    pub fn new(entries: Vec<(IVec, BigRational)>) -> Result<Self, FanError> {
        if entries.iter().any(|(_, v)| !v.is_positive()) {
            return Err(FanError::HeightsNotPositive);
        }
        Ok(Self::new_unchecked(entries))
    }

    /// Nonnegative variant used by the kappa shift, where one entry is 0.
    pub fn new_nonnegative(entries: Vec<(IVec, BigRational)>) -> Result<Self, FanError> {
        if entries.iter().any(|(_, v)| v.is_negative()) {
            return Err(FanError::HeightsNotPositive);
        }
        Ok(Self::new_unchecked(entries))
    }

    fn new_unchecked(mut entries: Vec<(IVec, BigRational)>) -> Self {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        entries.dedup_by(|a, b| a.0 == b.0);
        HeightVector { entries }
    }

    pub fn constant(points: &[IVec], value: BigRational) -> Result<Self, FanError> {
        Self::new(points.iter().map(|p| (p.clone(), value.clone())).collect())
    }

    pub fn get(&self, p: &[BigInt]) -> Option<&BigRational> {
        self.entries
            .binary_search_by(|(q, _)| q.as_slice().cmp(p))
            .ok()
            .map(|i| &self.entries[i].1)
    }

    pub fn points(&self) -> Vec<IVec> {
        self.entries.iter().map(|(p, _)| p.clone()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(IVec, BigRational)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Scales all heights by a positive rational.
    pub fn scale(&self, c: &BigRational) -> HeightVector {
        HeightVector {
            entries: self
                .entries
                .iter()
                .map(|(p, v)| (p.clone(), v * c))
                .collect(),
        }
    }
}

/// The fan of domains of linearity of psi_kappa: lower facets of the
/// lifted cone over {(p, kappa_p)}, each with its certificate form.
pub fn induced_fan(points: &[IVec], kappa: &HeightVector) -> Result<Fan, FanError> {
    if points.is_empty() {
        return Err(FanError::PointsDoNotSpan);
    }
    let rank = points[0].len();
    if IntMatrix::from_rows(points).rank() != rank {
        return Err(FanError::PointsDoNotSpan);
    }
    let mut kset: Vec<IVec> = kappa.points();
    kset.sort();
    let mut pset: Vec<IVec> = points.to_vec();
    pset.sort();
    pset.dedup();
    if kset != pset {
        return Err(FanError::HeightDomainMismatch);
    }

    // Lifted generators: (p, kappa_p) cleared to integers, plus the
    // vertical ray that closes off the epigraph.
    let mut denom = BigInt::one();
    for (_, v) in kappa.iter() {
        denom = num_integer::lcm(denom, v.denom().clone());
    }
    let mut lifted: Vec<IVec> = Vec::with_capacity(pset.len() + 1);
    for p in &pset {
        let k = kappa.get(p).unwrap();
        let scaled = (k * BigRational::from_integer(denom.clone())).to_integer();
        let mut v = p.clone();
        v.push(scaled);
        lifted.push(v);
    }
    let mut vertical = alloc::vec![BigInt::zero(); rank];
    vertical.push(BigInt::one());
    lifted.push(vertical);

    // Facets of the lifted cone by brute force over rank-size subsets.
    let mut seen: BTreeSet<IVec> = BTreeSet::new();
    let mut cones = Vec::new();
    let mut forms = Vec::new();
    let mut cells = Vec::new();
    for subset in subsets_of_size(lifted.len(), rank) {
        let pts: Vec<IVec> = subset.iter().map(|&i| lifted[i].clone()).collect();
        for w in linear_span_normals(&pts, &lifted, rank + 1) {
            // Lower facets: negative on the vertical direction.
            if !w[rank].is_negative() {
                continue;
            }
            if !seen.insert(w.clone()) {
                continue;
            }
            // Certificate m = w_head / (-w_last): <m, p> <= kappa_p with
            // equality on the cell.
            let neg_last = -w[rank].clone();
            let m: QVec = (0..rank)
                .map(|i| {
                    BigRational::new(w[i].clone(), BigInt::one())
                        / BigRational::from_integer(neg_last.clone())
                        * BigRational::from_integer(denom.clone())
                })
                .collect();
            let tight: Vec<IVec> = pset
                .iter()
                .filter(|p| {
                    let lhs = dot_qi(&m, p);
                    lhs == *kappa.get(p).unwrap()
                })
                .cloned()
                .collect();
            debug_assert!(!tight.is_empty());
            cones.push(Cone::new(tight.clone()));
            forms.push(m);
            cells.push(tight);
        }
    }

    // Canonical order by cone generators.
    let mut order: Vec<usize> = (0..cones.len()).collect();
    order.sort_by(|&a, &b| cones[a].cmp(&cones[b]));
    let max_cones = order.iter().map(|&i| cones[i].clone()).collect();
    let forms = order.iter().map(|&i| forms[i].clone()).collect();
    let cells = order.iter().map(|&i| cells[i].clone()).collect();
    Ok(Fan {
        rank,
        max_cones,
        forms: Some(forms),
        cells: Some(cells),
    })
}

/// Exact evaluation of psi_kappa by linear programming:
/// min sum t_p kappa_p subject to sum t_p p = x, t >= 0.
pub fn eval_psi(points: &[IVec], kappa: &HeightVector, x: &[BigRational]) -> Option<BigRational> {
    let rank = x.len();
    let mut rows: Vec<QVec> = Vec::with_capacity(rank);
    for d in 0..rank {
        rows.push(
            points
                .iter()
                .map(|p| BigRational::from_integer(p[d].clone()))
                .collect(),
        );
    }
    let c: QVec = points
        .iter()
        .map(|p| kappa.get(p).expect("height present").clone())
        .collect();
    match simplex_min(&rows, x, &c) {
        LpOutcome::Optimal { value, .. } => Some(value),
        _ => None,
    }
}

/// Outcome of a hypothesis check with a first-failure diagnostic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub pass: bool,
    pub diagnostics: Vec<String>,
}

impl CheckReport {
    fn pass() -> Self {
        CheckReport {
            pass: true,
            diagnostics: Vec::new(),
        }
    }

    fn fail(msg: String) -> Self {
        CheckReport {
            pass: false,
            diagnostics: alloc::vec![msg],
        }
    }
}

/// The MPCP condition: sigma_kappa is a projective simplicial refinement
/// of sigma whose rays are generated exactly by the elements of P.
pub fn mpcp_check(sigma: &Fan, sigma_kappa: &Fan, points: &[IVec]) -> CheckReport {
    // Refinement.
    for c in &sigma_kappa.max_cones {
        let inside_some = sigma.max_cones.iter().any(|s| {
            c.gens().iter().all(|g| s.contains_int(g))
        });
        if !inside_some {
            return CheckReport::fail(format!(
                "refinement fails: cone {:?} not contained in any cone of the base fan",
                c.gens()
            ));
        }
    }
    // Simpliciality.
    for c in &sigma_kappa.max_cones {
        if c.gens().len() != sigma_kappa.rank {
            return CheckReport::fail(format!(
                "simpliciality fails: maximal cone with {} generators in rank {}",
                c.gens().len(),
                sigma_kappa.rank
            ));
        }
    }
    // Rays exactly P (up to primitivization).
    let mut expected: Vec<IVec> = points
        .iter()
        .map(|p| primitive_part(p).expect("nonzero points"))
        .collect();
    expected.sort();
    expected.dedup();
    let rays = sigma_kappa.rays();
    if rays != expected {
        return CheckReport::fail(format!(
            "ray set differs from P: {} rays vs {} points",
            rays.len(),
            expected.len()
        ));
    }
    // Strict convexity across walls: adjacent maximal cones carry
    // distinct certificates.
    let Some(forms) = &sigma_kappa.forms else {
        return CheckReport::fail(String::from(
            "projectivity undecidable: fan carries no certificates",
        ));
    };
    let n = sigma_kappa.rank;
    for i in 0..sigma_kappa.max_cones.len() {
        for j in i + 1..sigma_kappa.max_cones.len() {
            let a = sigma_kappa.max_cones[i].gens();
            let b = sigma_kappa.max_cones[j].gens();
            let common = a.iter().filter(|g| b.contains(g)).count();
            if common == n - 1 && forms[i] == forms[j] {
                return CheckReport::fail(format!(
                    "strict convexity fails across the wall between cones {i} and {j}"
                ));
            }
        }
    }
    CheckReport::pass()
}

/// The MPCS condition given MPCP: every cone of sigma_kappa whose minimal
/// containing cone of sigma is not maximal must be unimodular.
pub fn mpcs_check(sigma: &Fan, sigma_kappa: &Fan) -> CheckReport {
    for tau in sigma_kappa.all_cones() {
        if tau.gens().is_empty() {
            continue;
        }
        // Locate a maximal cone of sigma containing tau.
        let Some(host) = sigma
            .max_cones
            .iter()
            .find(|s| tau.gens().iter().all(|g| s.contains_int(g)))
        else {
            return CheckReport::fail(format!(
                "cone {:?} escapes the base fan",
                tau.gens()
            ));
        };
        let minimal = host.minimal_face_containing(tau.gens(), sigma.rank);
        let maximal = minimal.dim() == sigma.rank;
        if !maximal && !tau.is_unimodular() {
            return CheckReport::fail(format!(
                "non-unimodular cone {:?} sits over a non-maximal base cone",
                tau.gens()
            ));
        }
    }
    CheckReport::pass()
}

/// Values of a piecewise-linear support function on the primitive rays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportFunction {
    values: Vec<(IVec, BigRational)>,
}

impl SupportFunction {
    pub fn new(mut values: Vec<(IVec, BigRational)>) -> Self {
        values.sort_by(|a, b| a.0.cmp(&b.0));
        SupportFunction { values }
    }

    /// The anticanonical support function: -1 on every ray.
    pub fn anticanonical(fan: &Fan) -> Self {
        Self::new(
            fan.rays()
                .into_iter()
                .map(|r| (r, -BigRational::one()))
                .collect(),
        )
    }

    /// The canonical support function: +1 on every ray.
    pub fn canonical(fan: &Fan) -> Self {
        Self::new(
            fan.rays()
                .into_iter()
                .map(|r| (r, BigRational::one()))
                .collect(),
        )
    }

    pub fn value_on_ray(&self, ray: &[BigInt]) -> Option<&BigRational> {
        self.values
            .binary_search_by(|(r, _)| r.as_slice().cmp(ray))
            .ok()
            .map(|i| &self.values[i].1)
    }

    pub fn scale(&self, c: &BigRational) -> SupportFunction {
        SupportFunction {
            values: self
                .values
                .iter()
                .map(|(r, v)| (r.clone(), v * c))
                .collect(),
        }
    }

    /// The linear form of the function on one cone, or an error when the
    /// prescribed ray values are not cone-wise linear.
    pub fn cone_form(&self, cone: &Cone, rank: usize) -> Result<QVec, FanError> {
        let q = Rationals;
        let gens = cone.gens();
        let mut m = Mat::<Rationals>::zero(&q, gens.len(), rank);
        for (r, g) in gens.iter().enumerate() {
            for (c, x) in g.iter().enumerate() {
                m.set(r, c, BigRational::from_integer(x.clone()));
            }
        }
        let rhs: Vec<BigRational> = gens
            .iter()
            .map(|g| {
                self.value_on_ray(g)
                    .cloned()
                    .ok_or(FanError::InconsistentSupportValues)
            })
            .collect::<Result<_, _>>()?;
        m.solve(&q, &rhs).ok_or(FanError::InconsistentSupportValues)
    }
}

/// Evaluates the cone-wise linear extension of a support function.
pub fn eval_support(f: &SupportFunction, fan: &Fan, x: &[BigRational]) -> Result<BigRational, FanError> {
    let Some(idx) = fan.locate(x) else {
        return Err(FanError::OutsideSupport);
    };
    let form = f.cone_form(&fan.max_cones[idx], fan.rank)?;
    Ok(dot_qq(&form, x))
}

/// A polytope with rational vertices, as produced by moment polytopes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPolytope {
    pub rank: usize,
    pub vertices: Vec<QVec>,
}

impl RationalPolytope {
    /// Converts to a lattice polytope when all vertices are integral.
    pub fn to_lattice(&self) -> Option<LatticePolytope> {
        let mut verts = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            let mut iv = Vec::with_capacity(self.rank);
            for c in v {
                if !c.is_integer() {
                    return None;
                }
                iv.push(c.to_integer());
            }
            verts.push(iv);
        }
        LatticePolytope::new(self.rank, verts).ok()
    }

    /// Scales all vertices by a rational factor.
    pub fn scale(&self, c: &BigRational) -> RationalPolytope {
        RationalPolytope {
            rank: self.rank,
            vertices: self
                .vertices
                .iter()
                .map(|v| v.iter().map(|x| x * c).collect())
                .collect(),
        }
    }
}

/// The moment polytope {m : <v_i, m> >= -kappa_i over all rays v_i}.
pub fn moment_polytope(fan: &Fan, kappa: &HeightVector) -> Result<RationalPolytope, FanError> {
    let rays = fan.rays();
    for r in &rays {
        if kappa.get(r).map_or(true, |v| !v.is_positive()) {
            return Err(FanError::HeightsNotPositive);
        }
    }
    let rank = fan.rank;
    // Boundedness: the recession cone {<v_i, w> >= 0} must be trivial.
    if nontrivial_recession(&rays, rank) {
        return Err(FanError::Unbounded);
    }
    // Vertex enumeration over rank-size subsets of tight inequalities.
    let q = Rationals;
    let mut vertices: Vec<QVec> = Vec::new();
    for subset in subsets_of_size(rays.len(), rank) {
        let mut m = Mat::<Rationals>::zero(&q, rank, rank);
        for (r, &i) in subset.iter().enumerate() {
            for c in 0..rank {
                m.set(r, c, BigRational::from_integer(rays[i][c].clone()));
            }
        }
        let rhs: Vec<BigRational> = subset
            .iter()
            .map(|&i| -kappa.get(&rays[i]).unwrap().clone())
            .collect();
        let Some(v) = m.solve(&q, &rhs) else {
            continue;
        };
        // Solutions of singular systems may be non-vertices; feasibility
        // over all inequalities filters them.
        let feasible = rays.iter().all(|ray| {
            dot_qi(&v, ray) >= -kappa.get(ray).unwrap().clone()
        });
        if feasible && !vertices.contains(&v) {
            vertices.push(v);
        }
    }
    // Reduce to extreme points: a vertex must make rank many linearly
    // independent inequalities tight; the subset construction guarantees
    // tightness but singular subsets can yield interior points of faces.
    let extreme: Vec<QVec> = vertices
        .iter()
        .filter(|v| {
            let tight: Vec<IVec> = rays
                .iter()
                .filter(|ray| dot_qi(v, ray) == -kappa.get(ray).unwrap().clone())
                .cloned()
                .collect();
            !tight.is_empty() && IntMatrix::from_rows(&tight).rank() == rank
        })
        .cloned()
        .collect();
    let mut vertices = extreme;
    vertices.sort();
    vertices.dedup();
    Ok(RationalPolytope { rank, vertices })
}

fn nontrivial_recession(rays: &[IVec], rank: usize) -> bool {
    // exists w != 0 with <v_i, w> >= 0 for all i: split w = w+ - w-,
    // slack per inequality, and normalize sum(w+ + w-) = 1.
    let m = rays.len();
    let ncols = 2 * rank + m;
    let mut rows: Vec<QVec> = Vec::new();
    let mut rhs: Vec<BigRational> = Vec::new();
    for ray in rays {
        let mut row = alloc::vec![BigRational::zero(); ncols];
        for d in 0..rank {
            row[d] = BigRational::from_integer(ray[d].clone());
            row[rank + d] = BigRational::from_integer(-ray[d].clone());
        }
        rows.push(row);
        rhs.push(BigRational::zero());
    }
    for (i, row) in rows.iter_mut().enumerate() {
        row[2 * rank + i] = -BigRational::one();
    }
    let mut norm = alloc::vec![BigRational::zero(); ncols];
    for d in 0..2 * rank {
        norm[d] = BigRational::one();
    }
    rows.push(norm);
    rhs.push(BigRational::one());
    feasible_point(&rows, &rhs).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ivec_from;

    fn poly(rank: usize, vs: &[&[i64]]) -> LatticePolytope {
        LatticePolytope::new(
            rank,
            vs.iter()
                .map(|v| v.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn qv(v: &[i64]) -> QVec {
        v.iter().map(|&x| q(x)).collect()
    }

    fn octahedron() -> LatticePolytope {
        poly(
            3,
            &[
                &[1, 0, 0],
                &[-1, 0, 0],
                &[0, 1, 0],
                &[0, -1, 0],
                &[0, 0, 1],
                &[0, 0, -1],
            ],
        )
    }

    fn square() -> LatticePolytope {
        poly(2, &[&[1, 1], &[1, -1], &[-1, 1], &[-1, -1]])
    }

    #[test]
    fn dual_fan_of_octahedron() {
        // Dual of the octahedron is the fan over cube facets: 6 square
        // cones with rays at the 8 cube vertices.
        let f = dual_fan(&octahedron()).unwrap();
        assert_eq!(f.max_cones.len(), 6);
        assert_eq!(f.rays().len(), 8);
        let (simplicial, smooth) = regularity_flags(&f);
        assert!(!simplicial);
        assert!(!smooth);
        // Its mirror: the fan dual to the cube is the octant fan.
        let cube = octahedron().polar_dual().unwrap();
        let g = dual_fan(&cube).unwrap();
        assert_eq!(g.max_cones.len(), 8);
        assert_eq!(g.rays().len(), 6);
        let (simplicial, smooth) = regularity_flags(&g);
        assert!(simplicial);
        assert!(smooth);
    }

    #[test]
    fn dual_fan_of_segment() {
        let seg = poly(1, &[&[1], &[-1]]);
        let f = dual_fan(&seg).unwrap();
        assert_eq!(f.max_cones.len(), 2);
    }

    #[test]
    fn regularity_of_skew_cone() {
        let f = Fan {
            rank: 2,
            max_cones: alloc::vec![Cone::new(alloc::vec![
                ivec_from([1, 0]),
                ivec_from([1, 2])
            ])],
            forms: None,
            cells: None,
        };
        let (simplicial, smooth) = regularity_flags(&f);
        assert!(simplicial);
        assert!(!smooth);
    }

    #[test]
    fn induced_fan_on_square_vertices() {
        let p = square().vertices().to_vec();
        let kappa = HeightVector::constant(&p, q(1)).unwrap();
        let f = induced_fan(&p, &kappa).unwrap();
        assert_eq!(f.max_cones.len(), 4);
        // Certificates are the facet normals of the square.
        let forms = f.forms.as_ref().unwrap();
        for form in forms {
            let abs: Vec<BigRational> = form.iter().map(|x| x.abs()).collect();
            assert!(abs.contains(&q(1)));
        }
        // psi equals max(|x|, |y|) here: check by LP at a point.
        let v = eval_psi(&p, &kappa, &qv(&[3, 1])).unwrap();
        assert_eq!(v, q(3));
        let report = mpcp_check(&dual_fan(&square().polar_dual().unwrap()).unwrap(), &f, &p);
        assert!(report.pass, "{:?}", report.diagnostics);
    }

    #[test]
    fn induced_fan_on_axis_points() {
        let p = alloc::vec![
            ivec_from([1, 0]),
            ivec_from([-1, 0]),
            ivec_from([0, 1]),
            ivec_from([0, -1])
        ];
        let kappa = HeightVector::constant(&p, q(1)).unwrap();
        let f = induced_fan(&p, &kappa).unwrap();
        assert_eq!(f.max_cones.len(), 4);
        let quadrant = Cone::new(alloc::vec![ivec_from([1, 0]), ivec_from([0, 1])]);
        assert!(f.max_cones.contains(&quadrant));
    }

    #[test]
    fn induced_fan_scale_invariance() {
        let p = square().vertices().to_vec();
        let kappa = HeightVector::constant(&p, q(1)).unwrap();
        let scaled = kappa.scale(&BigRational::new(BigInt::from(7), BigInt::from(3)));
        let f = induced_fan(&p, &kappa).unwrap();
        let g = induced_fan(&p, &scaled).unwrap();
        assert_eq!(f.max_cones, g.max_cones);
        // Certificates scale by the same factor.
        let ff = f.forms.unwrap();
        let gf = g.forms.unwrap();
        for (a, b) in ff.iter().zip(&gf) {
            let scaled_a: QVec = a
                .iter()
                .map(|x| x * BigRational::new(BigInt::from(7), BigInt::from(3)))
                .collect();
            assert_eq!(&scaled_a, b);
        }
    }

    #[test]
    fn mpcp_fails_when_rays_incomplete() {
        // Cube-vertex heights alone (rank 3): P consists of 20 points but
        // heights only on the 8 vertices is a domain mismatch; with the
        // 8 vertices as the point set, the rays differ from the full P.
        let cube = octahedron().polar_dual().unwrap();
        let verts = cube.vertices().to_vec();
        let kappa = HeightVector::constant(&verts, q(1)).unwrap();
        let f = induced_fan(&verts, &kappa).unwrap();
        let sigma = dual_fan(&octahedron()).unwrap();
        let p_full = cube.codim_ge2_points();
        let report = mpcp_check(&sigma, &f, &p_full.points);
        assert!(!report.pass);
    }

    #[test]
    fn mpcs_rank2_always_holds_under_mpcp() {
        let p = square().vertices().to_vec();
        let kappa = HeightVector::constant(&p, q(1)).unwrap();
        let f = induced_fan(&p, &kappa).unwrap();
        let sigma = dual_fan(&square().polar_dual().unwrap()).unwrap();
        assert!(mpcp_check(&sigma, &f, &p).pass);
        assert!(mpcs_check(&sigma, &f).pass);
    }

    #[test]
    fn support_function_evaluation() {
        let octant_fan = dual_fan(&octahedron().polar_dual().unwrap()).unwrap();
        let f = SupportFunction::anticanonical(&octant_fan);
        let v = eval_support(&f, &octant_fan, &qv(&[2, 3, 0])).unwrap();
        assert_eq!(v, q(-5));
        let zero = eval_support(&f, &octant_fan, &qv(&[0, 0, 0])).unwrap();
        assert_eq!(zero, q(0));
        // k * F at a ray generator is -k.
        let f3 = f.scale(&q(3));
        let at_ray = eval_support(&f3, &octant_fan, &qv(&[1, 0, 0])).unwrap();
        assert_eq!(at_ray, q(-3));
    }

    #[test]
    fn moment_polytope_of_octant_fan() {
        let octant_fan = dual_fan(&octahedron().polar_dual().unwrap()).unwrap();
        let kappa = HeightVector::constant(&octant_fan.rays(), q(1)).unwrap();
        let m = moment_polytope(&octant_fan, &kappa).unwrap();
        let cube = m.to_lattice().unwrap();
        assert_eq!(cube, octahedron().polar_dual().unwrap());
        // Doubling kappa doubles the polytope.
        let m2 = moment_polytope(&octant_fan, &kappa.scale(&q(2))).unwrap();
        assert_eq!(m2, m.scale(&q(2)));
    }

    #[test]
    fn moment_polytope_at_unit_heights_recovers_delta() {
        // kappa = 1 on the rays of the fan dual to a reflexive polytope
        // gives the polytope back.
        let delta = square();
        let sigma = dual_fan(&delta).unwrap();
        let kappa = HeightVector::constant(&sigma.rays(), q(1)).unwrap();
        let m = moment_polytope(&sigma, &kappa).unwrap();
        assert_eq!(m.to_lattice().unwrap(), delta);
    }

    #[test]
    fn moment_polytope_unbounded_detection() {
        let f = Fan {
            rank: 2,
            max_cones: alloc::vec![Cone::new(alloc::vec![
                ivec_from([1, 0]),
                ivec_from([0, 1])
            ])],
            forms: None,
            cells: None,
        };
        let kappa = HeightVector::constant(&f.rays(), q(1)).unwrap();
        assert_eq!(moment_polytope(&f, &kappa), Err(FanError::Unbounded));
    }

    #[test]
    fn fan_axioms_for_induced_fans() {
        let p = square().vertices().to_vec();
        let kappa = HeightVector::constant(&p, q(1)).unwrap();
        let f = induced_fan(&p, &kappa).unwrap();
        assert!(f.relint_disjoint());
    }

    #[test]
    fn psi_matches_certificates_at_samples() {
        let p = square().vertices().to_vec();
        let kappa = HeightVector::constant(&p, q(1)).unwrap();
        let f = induced_fan(&p, &kappa).unwrap();
        let forms = f.forms.as_ref().unwrap();
        // Deterministic rational sample points.
        for i in -6i64..=6 {
            for j in -6i64..=6 {
                let x = alloc::vec![
                    BigRational::new(BigInt::from(i), BigInt::from(2)),
                    BigRational::new(BigInt::from(j), BigInt::from(3))
                ];
                let psi = eval_psi(&p, &kappa, &x).unwrap();
                let idx = f.locate(&x).unwrap();
                assert_eq!(psi, dot_qq(&forms[idx], &x));
            }
        }
    }
}
