//! Blocking sets with respect to lines: predicates, line profiles, linear and
//! Rédei-type constructions, the companion construction on the spread, and the
//! numeric bounds that go with them. Bounds are exact rationals.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num_rational::Ratio;
use serde::Serialize;

use crate::codes::{Codeword, Provenance};
use crate::error::{Error, Result};
use crate::fplinalg::{parse_header, Fp, FpVector};
use crate::gfq::{prime_power, FieldElement};
use crate::projgeom::{theta, ProjSpace, Spread, SpreadElement, Subspace};

pub type Rational = Ratio<i128>;

fn int(x: u64) -> Rational {
    Rational::from_integer(x as i128)
}

/// A sorted, deduplicated set of point indices of a projective space.
#[derive(Debug, Clone)]
pub struct PointSet {
    space: Arc<ProjSpace>,
    members: Vec<usize>,
    mask: Vec<bool>,
}

impl PartialEq for PointSet {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members && self.space.num_points() == other.space.num_points()
    }
}

impl Eq for PointSet {}

impl PointSet {
    pub fn new(space: Arc<ProjSpace>, mut members: Vec<usize>) -> Result<PointSet> {
        members.sort_unstable();
        members.dedup();
        let np = space.num_points();
        if let Some(&bad) = members.iter().find(|&&i| i >= np) {
            return Err(Error::DimensionMismatch(format!("point {bad} outside {np} points")));
        }
        let mut mask = vec![false; np];
        for &i in &members {
            mask[i] = true;
        }
        Ok(PointSet { space, members, mask })
    }

    pub fn space(&self) -> &ProjSpace {
        &self.space
    }

    pub fn space_arc(&self) -> Arc<ProjSpace> {
        self.space.clone()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, point: usize) -> bool {
        self.mask.get(point).copied().unwrap_or(false)
    }

    pub fn intersection_size(&self, other: &PointSet) -> usize {
        self.members.iter().filter(|&&i| other.contains(i)).count()
    }

    pub fn indicator(&self, p: u8, value: u8) -> FpVector {
        FpVector::indicator(p, self.space.num_points(), &self.members, value)
    }

    /// `|B ∩ l|` for every line, in line order.
    pub fn line_intersections(&self) -> Vec<usize> {
        self.space.lines().iter().map(|l| l.iter().filter(|&&i| self.mask[i]).count()).collect()
    }

    pub fn is_blocking(&self) -> bool {
        self.line_intersections().iter().all(|&s| s > 0)
    }

    /// Number of lines through `point` meeting the set in exactly one point.
    pub fn tangent_count(&self, point: usize) -> usize {
        let sizes = self.line_intersections();
        self.tangent_count_with(&sizes, point)
    }

    fn tangent_count_with(&self, sizes: &[usize], point: usize) -> usize {
        self.space.point_lines()[point].iter().filter(|&&l| sizes[l] == 1).count()
    }

    /// Members lying on at least one tangent line.
    pub fn essential_points(&self) -> PointSet {
        let sizes = self.line_intersections();
        let ess = self.members.iter().copied().filter(|&pt| self.tangent_count_with(&sizes, pt) > 0).collect();
        PointSet::new(self.space.clone(), ess).expect("subset of a valid set")
    }

    /// Blocking and every point essential.
    pub fn is_minimal(&self) -> bool {
        self.is_blocking() && self.essential_points().len() == self.len()
    }

    /// Removes, in the given order, every point whose removal keeps the set blocking.
    pub fn greedy_reduce(&self, order: &[usize]) -> PointSet {
        let lines = self.space.lines();
        let mut sizes = self.line_intersections();
        let mut mask = self.mask.clone();
        for &pt in order {
            if !mask[pt] {
                continue;
            }
            let through = &self.space.point_lines()[pt];
            if through.iter().all(|&l| sizes[l] >= 2) {
                mask[pt] = false;
                for &l in through {
                    sizes[l] -= 1;
                }
            }
        }
        debug_assert!(lines.len() == sizes.len());
        let kept = self.members.iter().copied().filter(|&i| mask[i]).collect();
        PointSet::new(self.space.clone(), kept).expect("subset of a valid set")
    }

    /// Whether the set is exactly the point set of a hyperplane.
    pub fn is_hyperplane(&self) -> bool {
        let th = self.space.theta(self.space.n() as i64 - 1) as usize;
        self.len() == th && self.space.hyperplane_points().iter().any(|h| h == &self.members)
    }

    /// Points of the set through which every line is a tangent or lies in the set.
    pub fn full_line_points(&self) -> PointSet {
        let sizes = self.line_intersections();
        let full = self.space.q() as usize + 1;
        let pts = self
            .members
            .iter()
            .copied()
            .filter(|&pt| self.space.point_lines()[pt].iter().all(|&l| sizes[l] == 1 || sizes[l] == full))
            .collect();
        PointSet::new(self.space.clone(), pts).expect("subset of a valid set")
    }

    /// Every point outside the set lying on a secant lies on no tangent.
    pub fn secant_tangent_condition(&self) -> bool {
        let sizes = self.line_intersections();
        (0..self.space.num_points()).filter(|&r| !self.mask[r]).all(|r| {
            let through = &self.space.point_lines()[r];
            let secant = through.iter().any(|&l| sizes[l] >= 2);
            let tangent = through.iter().any(|&l| sizes[l] == 1);
            !(secant && tangent)
        })
    }

    /// PointSet file: header `"p h n count"`, then the sorted indices on one line.
    pub fn to_file_string(&self) -> String {
        let f = self.space.field();
        let mut s = format!("{} {} {} {}\n", f.p(), f.h(), self.space.n(), self.len());
        let idx: Vec<String> = self.members.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "{}", idx.join(" "));
        s
    }

    /// Parses a PointSet file against the given space.
    pub fn from_file_string(space: Arc<ProjSpace>, s: &str) -> Result<PointSet> {
        let mut lines = s.lines();
        let header = parse_header(lines.next().unwrap_or(""), 4)?;
        let f = space.field();
        if header[..3] != [f.p() as usize, f.h() as usize, space.n()] {
            return Err(Error::Parse(format!("header {header:?} does not match the space")));
        }
        let members: Vec<usize> = lines
            .flat_map(|l| l.split_whitespace())
            .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(e.to_string())))
            .collect::<Result<_>>()?;
        if members.len() != header[3] || members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse("indices must be strictly increasing and match count".into()));
        }
        PointSet::new(space, members)
    }
}

/// Outcome of reducing a blocking set to its essential points.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub set: PointSet,
    /// True when `|B| < q^(n-1) + θ_(n-1)`, where the minimal subset is unique.
    pub uniqueness_guaranteed: bool,
}

pub fn reduce_to_minimal(b: &PointSet) -> Result<Reduction> {
    if b.is_empty() || !b.is_blocking() {
        return Err(Error::NotBlocking);
    }
    let s = b.space();
    let q = s.q() as u64;
    let n = s.n() as i64;
    let bound = q.pow(n as u32 - 1) + s.theta(n - 1);
    let uniqueness_guaranteed = (b.len() as u64) < bound;
    let set = b.essential_points();
    if uniqueness_guaranteed && !set.is_minimal() {
        return Err(Error::AssertionFailed(format!(
            "essential points of {:?} do not form a minimal blocking set",
            b.members()
        )));
    }
    Ok(Reduction { set, uniqueness_guaranteed })
}

/// Checks of the three counting identities for lines, incidences and pairs.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub lhs: Rational,
    pub rhs: Rational,
    pub holds: bool,
}

impl IdentityCheck {
    fn new(lhs: Rational, rhs: Rational) -> IdentityCheck {
        IdentityCheck { lhs, rhs, holds: lhs == rhs }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LineProfile {
    pub modulus: u64,
    pub set_size: usize,
    /// `|B ∩ l|` per line.
    pub sizes: Vec<usize>,
    /// Intersection size -> number of lines.
    pub histogram: BTreeMap<usize, u64>,
    /// Every line meets B in 1 (mod E) points.
    pub one_mod_e: bool,
    /// `i -> τ_(1+iE)`; empty unless `one_mod_e`.
    pub tau: BTreeMap<u64, u64>,
    /// Tangent lines through each member, in member order.
    pub tangents: Vec<(usize, usize)>,
    pub line_count: IdentityCheck,
    pub incidences: IdentityCheck,
    pub pairs: IdentityCheck,
    /// `Σ i(i-1) E^2 τ_(1+iE) >= 0` rewritten in |B|; `None` unless `one_mod_e`.
    pub quadratic_nonnegative: Option<bool>,
}

impl LineProfile {
    pub fn identities_hold(&self) -> bool {
        self.line_count.holds && self.incidences.holds && self.pairs.holds
    }
}

pub fn line_profile(b: &PointSet, e_modulus: u64) -> Result<LineProfile> {
    if e_modulus == 0 {
        return Err(Error::PreconditionFailed("E must be >= 1".into()));
    }
    let s = b.space();
    let q = s.q() as i128;
    let n = s.n() as u32;
    let sizes = b.line_intersections();
    let mut histogram = BTreeMap::new();
    for &k in &sizes {
        *histogram.entry(k).or_insert(0u64) += 1;
    }
    let big_e = e_modulus as usize;
    let one_mod_e = sizes.iter().all(|&k| k >= 1 && (k - 1) % big_e == 0);
    let mut tau = BTreeMap::new();
    if one_mod_e {
        for (&k, &c) in &histogram {
            *tau.entry(((k - 1) / big_e) as u64).or_insert(0) += c;
        }
    }
    let bsize = b.len() as i128;
    let e = e_modulus as i128;
    let (sum0, sum1, sum2) = if one_mod_e {
        tau.iter().fold((0i128, 0i128, 0i128), |(a, b1, c), (&i, &t)| {
            let k = 1 + i as i128 * e;
            let t = t as i128;
            (a + t, b1 + k * t, c + k * (i as i128 * e) * t)
        })
    } else {
        histogram.iter().fold((0i128, 0i128, 0i128), |(a, b1, c), (&k, &t)| {
            let (k, t) = (k as i128, t as i128);
            (a + t, b1 + k * t, c + k * (k - 1) * t)
        })
    };
    let lines_rhs = Rational::new((q.pow(n + 1) - 1) * (q.pow(n) - 1), (q * q - 1) * (q - 1));
    let point_rhs = Rational::new(bsize * (q.pow(n) - 1), q - 1);
    let pair_rhs = Rational::from_integer(bsize * (bsize - 1));
    let quadratic_nonnegative = one_mod_e.then(|| {
        let val = Rational::from_integer(bsize * (bsize - 1)) - Rational::from_integer(1 + e) * point_rhs
            + Rational::from_integer(1 + e) * lines_rhs;
        val >= Rational::from_integer(0)
    });
    let tangents = b.members().iter().map(|&pt| (pt, b.tangent_count_with(&sizes, pt))).collect();
    Ok(LineProfile {
        modulus: e_modulus,
        set_size: b.len(),
        line_count: IdentityCheck::new(Rational::from_integer(sum0), lines_rhs),
        incidences: IdentityCheck::new(Rational::from_integer(sum1), point_rhs),
        pairs: IdentityCheck::new(Rational::from_integer(sum2), pair_rhs),
        sizes,
        histogram,
        one_mod_e,
        tau,
        tangents,
        quadratic_nonnegative,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExponentReport {
    /// Largest e with every line meeting B in 1 (mod p^e) points.
    pub e: u32,
    pub h: u32,
    pub divides_h: bool,
}

pub fn max_exponent(b: &PointSet) -> Result<ExponentReport> {
    let s = b.space();
    let (p, h) = (s.p() as usize, s.field().h());
    let sizes = b.line_intersections();
    if sizes.iter().any(|&k| k == 0 || (k - 1) % p != 0) {
        return Err(Error::NotOneModP);
    }
    let mut e = 1;
    while e < h && sizes.iter().all(|&k| (k - 1) % p.pow(e + 1) == 0) {
        e += 1;
    }
    Ok(ExponentReport { e, h, divides_h: h % e == 0 })
}

/// Size bounds for a minimal blocking set meeting every line in 1 (mod p^e)
/// points with size in `]θ_(n-1), 2q^(n-1)[`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub q: u64,
    pub n: u32,
    pub e: u32,
    pub p: u64,
    pub big_e: u64,
    /// `q^(n-1) + q^(n-1)/(p^e+1) - 1`
    pub lower: Rational,
    /// `q^(n-1) + 2q^(n-1)/p^e`
    pub upper: Rational,
    /// The upper bound is only proven for `p^e > 3`.
    pub upper_applicable: bool,
    /// `[3q^(n-1)/2, 2q^(n-1)[`, reported when `p > 3` and `h >= 3`.
    pub excluded_interval: Option<(Rational, Rational)>,
}

impl BoundReport {
    pub fn brackets(&self, size: u64) -> bool {
        self.lower <= int(size) && int(size) <= self.upper
    }
}

pub fn bounds(q: u64, n: u32, e: u32) -> Result<BoundReport> {
    let (p, h) = prime_power(q as u32).ok_or_else(|| Error::PreconditionFailed(format!("{q} is not a prime power")))?;
    if e == 0 || n < 1 {
        return Err(Error::PreconditionFailed("need e >= 1 and n >= 1".into()));
    }
    let p = p as u64;
    let big_e = p.pow(e);
    let base = int(q.pow(n - 1));
    let lower = base + base / int(big_e + 1) - int(1);
    let upper = base + int(2) * base / int(big_e);
    let excluded_interval = (p > 3 && h >= 3).then(|| (int(3) * base / int(2), int(2) * base));
    Ok(BoundReport { q, n, e, p, big_e, lower, upper, upper_applicable: big_e > 3, excluded_interval })
}

/// Linear blocking set `B(U)` for `dim U = h(n-1)`; element indices are point
/// indices of the base space.
pub fn linear_blocking_set(u: &Subspace, spread: &Spread) -> Result<PointSet> {
    let base = spread.base();
    let expected = (base.field().h() as i64) * (base.n() as i64 - 1);
    if u.dim() != expected {
        return Err(Error::WrongDimension { expected, found: u.dim() });
    }
    let members = spread.b_of(u)?.into_iter().map(|e| e.0).collect();
    PointSet::new(spread.base_arc(), members)
}

#[derive(Debug, Clone, Serialize)]
pub struct OnePointReport {
    pub count: usize,
    /// `p^N - p^(N-1) + 1`
    pub weak_bound: u64,
    /// `((p+1) θ_(n-1)(q) - |U_N|) / p`, from the counting inequality
    /// `θ_(n-1)(q) <= (|U_N| - x)/(p+1) + x`.
    pub counting_bound: Rational,
    pub meets_counting_bound: bool,
}

/// Elements of `B(U)` meeting `U` in exactly one point.
pub fn count_one_point_elements(u: &Subspace, spread: &Spread) -> Result<OnePointReport> {
    let base = spread.base();
    let h = base.field().h() as i64;
    let expected = h * (base.n() as i64 - 1);
    if u.dim() != expected {
        return Err(Error::WrongDimension { expected, found: u.dim() });
    }
    let count = spread.intersection_sizes(u)?.iter().filter(|(_, c)| *c == 1).count();
    let p = base.p() as u64;
    let big_n = expected as u32;
    let weak_bound = p.pow(big_n) - p.pow(big_n - 1) + 1;
    let q = base.q() as u64;
    let counting_bound = (int(p + 1) * int(theta(base.n() as i64 - 1, q)) - int(theta(expected, p))) / int(p);
    if (count as u64) < weak_bound {
        return Err(Error::AssertionFailed(format!(
            "{count} one-point elements, fewer than p^N - p^(N-1) + 1 = {weak_bound}"
        )));
    }
    Ok(OnePointReport { count, weak_bound, counting_bound, meets_counting_bound: int(count as u64) >= counting_bound })
}

/// Rebuilds `B(U_N)` from a fixed `(N-1)`-space and two elements of
/// `B(U_N) \ B(U_(N-1))`.
///
/// Every N-space through `u_prev` meeting both elements is tried (one per point
/// of `r1` whose join with `u_prev` reaches `r2`). For each, the remaining
/// elements are reconstructed as `<R1,R4> ∩ <R2,R5>` with `R4`, `R5` the elements
/// through `<P1,P3> ∩ U_(N-1)` and `<P2,P3> ∩ U_(N-1)`, switching the second pivot
/// to an already reconstructed element when `P3` is on `P1P2`. All candidates
/// must produce the same set.
pub fn reconstruct_bset(
    u_prev: &Subspace,
    r1: SpreadElement,
    r2: SpreadElement,
    spread: &Spread,
) -> Result<Vec<SpreadElement>> {
    let amb = spread.ambient();
    let s = spread.b_of(u_prev)?;
    if r1 == r2 || s.contains(&r1) || s.contains(&r2) {
        return Err(Error::PreconditionFailed("R1, R2 must be distinct and outside B(U_(N-1))".into()));
    }
    let mut result: Option<Vec<SpreadElement>> = None;
    for &p1 in spread.element_points(r1) {
        let u = amb.join(u_prev, &amb.span(&[p1])?)?;
        let meet2 = amb.intersect(&u, spread.element_subspace(r2))?;
        if meet2.dim() < 0 {
            continue;
        }
        let p2 = amb.subspace_points(&meet2)[0];
        let rebuilt = rebuild_from_pivots(u_prev, &u, p1, p2, spread)?;
        let direct = spread.b_of(&u)?;
        if rebuilt != direct {
            return Err(Error::InconsistentInput(format!("reconstruction through point {p1} differs from B(U)")));
        }
        match &result {
            None => result = Some(rebuilt),
            Some(prev) if *prev != rebuilt => {
                return Err(Error::InconsistentInput(format!(
                    "two N-spaces through U_(N-1) meeting R{} and R{} give different sets",
                    r1.0, r2.0
                )))
            }
            _ => {}
        }
    }
    result.ok_or_else(|| Error::InconsistentInput(format!("no N-space through U_(N-1) meets R{} and R{}", r1.0, r2.0)))
}

fn rebuild_from_pivots(
    u_prev: &Subspace,
    u: &Subspace,
    p1: usize,
    p2: usize,
    spread: &Spread,
) -> Result<Vec<SpreadElement>> {
    let amb = spread.ambient();
    let r1 = spread.element_of(p1);
    let mut found: BTreeMap<SpreadElement, usize> = BTreeMap::new();
    found.insert(r1, p1);
    found.insert(spread.element_of(p2), p2);
    let outside: Vec<usize> =
        amb.subspace_points(u).into_iter().filter(|&pt| !amb.contains(u_prev, pt).unwrap_or(true)).collect();
    let mut pending: Vec<usize> =
        outside.iter().copied().filter(|pt| !found.contains_key(&spread.element_of(*pt))).collect();
    let mut pivots = vec![p2];
    while !pending.is_empty() {
        let before = pending.len();
        let mut still = Vec::new();
        for &p3 in &pending {
            let r3 = spread.element_of(p3);
            if found.contains_key(&r3) {
                continue;
            }
            let mut got = None;
            for &pv in &pivots {
                if let Some(e) = intersect_construction(u_prev, p1, pv, p3, spread)? {
                    got = Some(e);
                    break;
                }
            }
            match got {
                Some(e) if e == r3 => {
                    found.insert(e, p3);
                    pivots.push(p3);
                }
                Some(e) => {
                    return Err(Error::InconsistentInput(format!(
                        "construction gave element {} for a point of element {}",
                        e.0, r3.0
                    )))
                }
                None => still.push(p3),
            }
        }
        if still.len() == before {
            return Err(Error::InconsistentInput(format!(
                "{} points of U_N could not be reached from the pivots",
                still.len()
            )));
        }
        pending = still;
    }
    let mut out: Vec<SpreadElement> = spread.b_of(u_prev)?;
    out.extend(found.keys().copied());
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// `<R1,R4> ∩ <R2,R5>` when it is a single spread element; `None` when P3 is on
/// the line through the pivots or the two spans coincide.
fn intersect_construction(
    u_prev: &Subspace,
    p1: usize,
    p2: usize,
    p3: usize,
    spread: &Spread,
) -> Result<Option<SpreadElement>> {
    let amb = spread.ambient();
    let line12 = amb.line_through(p1, p2)?;
    if p3 == p1 || p3 == p2 || amb.contains(&line12, p3)? {
        return Ok(None);
    }
    let through = |a: usize| -> Result<SpreadElement> {
        let l = amb.line_through(a, p3)?;
        let m = amb.intersect(&l, u_prev)?;
        Ok(spread.element_of(amb.subspace_points(&m)[0]))
    };
    let (r1, r2) = (spread.element_of(p1), spread.element_of(p2));
    let (r4, r5) = (through(p1)?, through(p2)?);
    if r4 == r1 || r5 == r2 {
        return Ok(None);
    }
    let a = amb.join(spread.element_subspace(r1), spread.element_subspace(r4))?;
    let b = amb.join(spread.element_subspace(r2), spread.element_subspace(r5))?;
    let meet = amb.intersect(&a, &b)?;
    let met = spread.b_of(&meet)?;
    if met.len() == 1 && spread.element_subspace(met[0]) == &meet {
        Ok(Some(met[0]))
    } else {
        Ok(None)
    }
}

/// Output of the companion construction.
#[derive(Debug, Clone, Serialize)]
pub struct Companion {
    pub r1: usize,
    pub r2: usize,
    pub r_prime: usize,
    /// Point of `U_(N-1) ∩ R2` the transversal passes through.
    pub transversal_point: usize,
    /// Ambient points of the companion N-space `U'`.
    pub u_prime_points: Vec<usize>,
    pub b_prime: Vec<usize>,
    pub intersection_size: usize,
    pub p: u32,
    /// Earlier choices in the search order whose `B'` shared a further
    /// element with `B` outside `B(U_(N-1)) ∪ {R1}`.
    pub rejected_choices: u64,
    #[serde(skip)]
    pub u_prime: Option<Subspace>,
}

/// Builds a second small linear blocking set meeting `B(U)` in 2 (mod p) points.
///
/// Search order: `R1` over one-point elements of `B(U)`, `R2` over `B(U)`, `R'`
/// over the elements of `<R1,R2>` outside `B(U)`, the transversal point over
/// `U ∩ R2`, and `U_(N-1)` over the hyperplanes of `U` (in the canonical order of
/// U's own coordinates) through that point and avoiding `U ∩ R1`; first choice
/// with `|B ∩ B'| ≡ 2 (mod p)` wins. For N > 2 some choices share a further
/// element with `B`; these are counted in `rejected_choices`.
pub fn companion_blocking_set(u: &Subspace, spread: &Spread) -> Result<Companion> {
    let b = linear_blocking_set(u, spread)?;
    if b.is_hyperplane() {
        return Err(Error::IsHyperplane);
    }
    let amb = spread.ambient();
    let p = spread.base().p();
    let sizes: BTreeMap<SpreadElement, usize> = spread.intersection_sizes(u)?.into_iter().collect();
    let in_b = |e: &SpreadElement| sizes.contains_key(e);
    let u_points = amb.subspace_points(u);
    let mut rejected = 0u64;
    let mut any_r_prime = false;
    for (&r1, _) in sizes.iter().filter(|(_, &c)| c == 1) {
        let p1 = *u_points.iter().find(|&&pt| spread.element_of(pt) == r1).unwrap();
        for &r2 in sizes.keys() {
            if r2 == r1 {
                continue;
            }
            for r_prime in spread.spread_elements_in_span(r1, r2)? {
                if in_b(&r_prime) {
                    continue;
                }
                any_r_prime = true;
                let mut xs: Vec<usize> = u_points.iter().copied().filter(|&pt| spread.element_of(pt) == r2).collect();
                xs.sort_unstable();
                for x in xs {
                    let m = spread.transversal_through(x, r1, r_prime)?;
                    for u_prev in hyperplanes_of_subspace(amb, u, &u_points, x, p1)? {
                        let u_prime = amb.join(&m, &u_prev)?;
                        if u_prime.dim() != u.dim() {
                            return Err(Error::AssertionFailed(format!(
                                "<m, U_(N-1)> has dimension {}, expected {}",
                                u_prime.dim(),
                                u.dim()
                            )));
                        }
                        let b_prime = linear_blocking_set(&u_prime, spread)?;
                        if !b_prime.contains(r_prime.0) {
                            return Err(Error::AssertionFailed("R' not in B(U')".into()));
                        }
                        let inter = b.intersection_size(&b_prime);
                        if inter % p as usize != 2 % p as usize {
                            rejected += 1;
                            continue;
                        }
                        let mut u_prime_points = amb.subspace_points(&u_prime);
                        u_prime_points.sort_unstable();
                        return Ok(Companion {
                            r1: r1.0,
                            r2: r2.0,
                            r_prime: r_prime.0,
                            transversal_point: x,
                            u_prime_points,
                            b_prime: b_prime.members().to_vec(),
                            intersection_size: inter,
                            p,
                            rejected_choices: rejected,
                            u_prime: Some(u_prime),
                        });
                    }
                }
            }
        }
    }
    if !any_r_prime {
        return Err(Error::SearchExhausted(format!("no R' outside B(U) for |B| = {}", b.len())));
    }
    Err(Error::AssertionFailed(format!("all {rejected} choices give |B ∩ B'| not 2 (mod {p})")))
}

/// Hyperplanes of `u` (by canonical order of normals in u's own coordinates)
/// through `through` and avoiding `avoid`.
fn hyperplanes_of_subspace(
    amb: &ProjSpace,
    u: &Subspace,
    u_points: &[usize],
    through: usize,
    avoid: usize,
) -> Result<Vec<Subspace>> {
    let k = u.rank();
    let local = ProjSpace::new(amb.field_arc(), k - 1)?;
    let local_index = |pt: usize| u_points.iter().position(|&x| x == pt).unwrap();
    let (xt, xa) = (local.point_coords(local_index(through)), local.point_coords(local_index(avoid)));
    let f = amb.field();
    let dot = |a: &[FieldElement], b: &[FieldElement]| {
        a.iter().zip(b).fold(FieldElement::ZERO, |acc, (&x, &y)| f.add(acc, f.mul(x, y)))
    };
    let mut out = Vec::new();
    for hi in 0..local.num_points() {
        let normal = local.point_coords(hi);
        if dot(&normal, &xt).is_zero() && !dot(&normal, &xa).is_zero() {
            let pts: Vec<usize> = (0..local.num_points())
                .filter(|&j| dot(&normal, &local.point_coords(j)).is_zero())
                .map(|j| u_points[j])
                .collect();
            out.push(amb.span(&pts)?);
        }
    }
    if out.is_empty() {
        return Err(Error::SearchExhausted("no hyperplane of U separates the two points".into()));
    }
    Ok(out)
}

/// `{(1,x,x^(p^e))} ∪ {(0,x,x^(p^e)) : x ≠ 0}` in PG(2,q) and the line `x_0 = 0`
/// (returned as its line index in [`ProjSpace::lines`]).
pub fn redei_blocking_set(space: Arc<ProjSpace>, e: u32) -> Result<(PointSet, usize)> {
    if space.n() != 2 {
        return Err(Error::DimensionMismatch("Rédei sets are built in PG(2,q)".into()));
    }
    let f = space.field();
    let h = f.h();
    if e == 0 || e >= h || !h.is_multiple_of(e) {
        return Err(Error::BadExponent { e, h });
    }
    let mut pts = Vec::new();
    for x in f.elements() {
        let fx = f.frobenius_power(x, e);
        pts.push(space.index_of(&[FieldElement::ONE, x, fx])?);
        if !x.is_zero() {
            pts.push(space.index_of(&[FieldElement::ZERO, x, fx])?);
        }
    }
    let set = PointSet::new(space.clone(), pts)?;
    let q = space.q() as usize;
    let k = (q - 1) / ((space.p() as usize).pow(e) - 1);
    if set.len() != q + k {
        return Err(Error::AssertionFailed(format!("|B| = {} != q + k = {}", set.len(), q + k)));
    }
    let line_pts = &space.hyperplane_points()[0];
    let line = space.lines().iter().position(|l| l == line_pts).expect("x_0 = 0 is a line");
    Ok((set, line))
}

/// `B - L` for a Rédei-type minimal blocking set of size `q + k` with `k`-secant
/// `L`; a dual codeword of weight `2q + 1 - k`.
///
/// Below `k < (q+3)/2` every line meets B in 1 (mod p) points by the known
/// theory; at or above it the property is checked directly instead.
pub fn redei_dual_word(b: &PointSet, line: usize) -> Result<Codeword> {
    let s = b.space();
    if s.n() != 2 {
        return Err(Error::DimensionMismatch("Rédei dual words live in PG(2,q)".into()));
    }
    let lines = s.lines();
    if line >= lines.len() {
        return Err(Error::DimensionMismatch(format!("line {line} out of range")));
    }
    let q = s.q() as usize;
    let p = s.p() as usize;
    let l_pts = &lines[line];
    let k = l_pts.iter().filter(|&&pt| b.contains(pt)).count();
    if b.len() != q + k {
        return Err(Error::PreconditionFailed(format!("|B| = {} but q + k = {}", b.len(), q + k)));
    }
    let small = 2 * k < q + 3;
    if !small && b.line_intersections().iter().any(|&m| m == 0 || (m - 1) % p != 0) {
        return Err(Error::PreconditionFailed(format!(
            "k = {k} >= (q+3)/2 and B does not meet every line in 1 (mod p) points"
        )));
    }
    let fp = Fp::new(p as u8);
    let mut v = b.indicator(p as u8, 1);
    for &pt in l_pts {
        v.entries[pt] = fp.sub(v.entries[pt], 1);
    }
    for (li, lp) in lines.iter().enumerate() {
        if lp.iter().fold(0u8, |acc, &pt| fp.add(acc, v.entries[pt])) != 0 {
            return Err(Error::NotInDual(li));
        }
    }
    if v.weight() != 2 * q + 1 - k {
        return Err(Error::AssertionFailed(format!("weight {} != 2q + 1 - k = {}", v.weight(), 2 * q + 1 - k)));
    }
    Ok(Codeword::new(
        v,
        Provenance::Difference {
            description: format!(
                "Rédei-type blocking set of size {} minus its {k}-secant line {line}{}",
                b.len(),
                if small { "" } else { " (1 mod p checked directly)" }
            ),
        },
    ))
}

/// Points of PG(n,q) all of whose coordinates lie in GF(sqrt q) after normalizing.
pub fn baer_subgeometry(space: Arc<ProjSpace>) -> Result<PointSet> {
    let h = space.field().h();
    if !h.is_multiple_of(2) {
        return Err(Error::NotSquareOrder(space.q()));
    }
    let sub = space.field().subfield(h / 2)?;
    let pts = (0..space.num_points()).filter(|&i| space.point_coords(i).iter().all(|x| sub.contains(x))).collect();
    PointSet::new(space, pts)
}

/// Cone with vertex `<e_0, ..., e_t>` (empty for `t = -1`) over a Baer
/// subgeometry of dimension `base_dim` on the coordinates `t+1 ..= t+1+base_dim`.
pub fn baer_cone(space: Arc<ProjSpace>, t: i64, base_dim: usize) -> Result<PointSet> {
    let h = space.field().h();
    if !h.is_multiple_of(2) {
        return Err(Error::NotSquareOrder(space.q()));
    }
    let n = space.n() as i64;
    if t < -1 || t + 1 + base_dim as i64 > n {
        return Err(Error::DimensionMismatch(format!(
            "vertex dimension {t} and base dimension {base_dim} do not fit in PG({n},q)"
        )));
    }
    let sub = space.field().subfield(h / 2)?;
    let f = space.field();
    let lo = (t + 1) as usize;
    let hi = lo + base_dim;
    let pts = (0..space.num_points())
        .filter(|&i| {
            let c = space.point_coords(i);
            if c[hi + 1..].iter().any(|x| !x.is_zero()) {
                return false;
            }
            match c[lo..=hi].iter().find(|x| !x.is_zero()) {
                None => t >= 0,
                Some(&lead) => {
                    let inv = f.inv(lead).expect("nonzero");
                    c[lo..=hi].iter().all(|&x| sub.contains(&f.mul(x, inv)))
                }
            }
        })
        .collect();
    PointSet::new(space, pts)
}

/// Lower bounds on the minimum weight of the dual code for odd p.
#[derive(Debug, Clone, Serialize)]
pub struct SacharBounds {
    pub p: u64,
    pub q: u64,
    pub m: u64,
    /// `q + (2m-1)/(2m+1) q + 6m/(2m+1)` for a word with 2m distinct symbols.
    pub symbol_bound: Rational,
    /// Plane bound: `(12q+6)/7` for p = 7, `(12q+18)/7` for p > 7.
    pub plane_bound: Option<Rational>,
    /// Bound for n >= 3: `(12q+7)/7` for p = 7, `(12q+18)/7` for p > 7.
    pub space_bound: Option<Rational>,
    pub plane_bound_ceil: Option<i128>,
    pub space_bound_ceil: Option<i128>,
    /// p = 7 states two different rationals; their ceilings are compared separately.
    pub rounding_discrepancy: bool,
}

pub fn sachar_bounds(p: u64, q: u64, m: u64) -> Result<SacharBounds> {
    if p <= 2 || m == 0 {
        return Err(Error::PreconditionFailed("need p > 2 and m >= 1".into()));
    }
    match prime_power(q as u32) {
        Some((pp, _)) if pp as u64 == p => {}
        _ => return Err(Error::PreconditionFailed(format!("{q} is not a power of {p}"))),
    }
    let qq = int(q);
    let mm = int(m);
    let two_m1 = int(2) * mm + int(1);
    let symbol_bound = qq + (int(2) * mm - int(1)) / two_m1 * qq + int(6) * mm / two_m1;
    let (plane_bound, space_bound) = match p {
        7 => (Some((int(12) * qq + int(6)) / int(7)), Some((int(12) * qq + int(7)) / int(7))),
        p if p > 7 => {
            let b = (int(12) * qq + int(18)) / int(7);
            (Some(b), Some(b))
        }
        _ => (None, None),
    };
    Ok(SacharBounds {
        p,
        q,
        m,
        symbol_bound,
        plane_bound,
        space_bound,
        plane_bound_ceil: plane_bound.map(|r| r.ceil().to_integer()),
        space_bound_ceil: space_bound.map(|r| r.ceil().to_integer()),
        rounding_discrepancy: plane_bound != space_bound,
    })
}
