//! The p-ary code spanned by the hyperplane/point incidence matrix of PG(n,q),
//! its dual and hull, and maps between dual codes of different dimensions.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::blocking::PointSet;
use crate::error::{Error, Result};
use crate::fplinalg::{Echelon, Fp, FpMatrix, FpVector};
use crate::gfq::Field;
use crate::projgeom::{ProjSpace, Subspace, DEFAULT_POINT_BUDGET};

/// How a codeword was obtained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// Linear combination of hyperplane rows: `(hyperplane index, coefficient)`.
    Hyperplanes { coeffs: Vec<(usize, u8)> },
    /// Difference of two point sets' incidence vectors.
    Difference { description: String },
    /// Dual word pushed into a smaller or larger space.
    Mapped { description: String },
    /// Found by a search routine.
    Search { description: String },
    /// Anything else, described in words.
    Constructed { description: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codeword {
    pub vector: FpVector,
    pub provenance: Provenance,
}

impl Codeword {
    pub fn new(vector: FpVector, provenance: Provenance) -> Codeword {
        Codeword { vector, provenance }
    }

    pub fn weight(&self) -> usize {
        self.vector.weight()
    }

    pub fn support(&self) -> Vec<usize> {
        self.vector.support()
    }

    /// Codeword file (`"p len"` header plus digit string) and the provenance record.
    pub fn to_files(&self) -> (String, String) {
        (self.vector.to_file_string(), serde_json::to_string_pretty(&self.provenance).expect("provenance serializes"))
    }

    pub fn from_files(word: &str, provenance: &str) -> Result<Codeword> {
        let vector = FpVector::from_file_string(word)?;
        let provenance = serde_json::from_str(provenance).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(Codeword { vector, provenance })
    }
}

/// Result of classifying a codeword of weight below `2q^(n-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SmallCodeword {
    /// The single nonzero symbol of the word.
    pub symbol: u8,
    /// Its support, a minimal blocking set meeting every line in 1 (mod p) points.
    pub support: Vec<usize>,
}

/// C(PG(n,q)) with its incidence matrix in canonical orders.
#[derive(Debug)]
pub struct Code {
    space: Arc<ProjSpace>,
    fp: Fp,
    incidence: FpMatrix,
    echelon: Echelon,
    dual: OnceLock<FpMatrix>,
    hull: OnceLock<FpMatrix>,
}

impl Code {
    pub fn build(n: usize, field: Arc<Field>) -> Result<Code> {
        Code::from_space(Arc::new(ProjSpace::with_budget(field, n, DEFAULT_POINT_BUDGET)?))
    }

    pub fn from_space(space: Arc<ProjSpace>) -> Result<Code> {
        let incidence = incidence_matrix(&space);
        Code::with_incidence(space, incidence)
    }

    /// Uses a precomputed (e.g. cached) incidence matrix after checking its shape.
    pub fn with_incidence(space: Arc<ProjSpace>, incidence: FpMatrix) -> Result<Code> {
        let np = space.num_points();
        if incidence.rows() != np || incidence.cols() != np || incidence.p() as u32 != space.p() {
            return Err(Error::DimensionMismatch(format!(
                "incidence matrix is {}x{} over F_{}, expected {np}x{np} over F_{}",
                incidence.rows(),
                incidence.cols(),
                incidence.p(),
                space.p()
            )));
        }
        let fp = Fp::new(space.p() as u8);
        let echelon = incidence.echelon();
        Ok(Code { space, fp, incidence, echelon, dual: OnceLock::new(), hull: OnceLock::new() })
    }

    pub fn space(&self) -> &ProjSpace {
        &self.space
    }

    pub fn space_arc(&self) -> Arc<ProjSpace> {
        self.space.clone()
    }

    pub fn p(&self) -> u8 {
        self.fp.p()
    }

    pub fn fp(&self) -> &Fp {
        &self.fp
    }

    pub fn length(&self) -> usize {
        self.incidence.cols()
    }

    pub fn incidence(&self) -> &FpMatrix {
        &self.incidence
    }

    pub fn dimension(&self) -> usize {
        self.echelon.rank()
    }

    /// Basis of C (reduced echelon rows).
    pub fn basis(&self) -> FpMatrix {
        self.echelon.basis()
    }

    pub fn dual_basis(&self) -> &FpMatrix {
        self.dual.get_or_init(|| self.echelon.null_basis())
    }

    pub fn hull_basis(&self) -> &FpMatrix {
        self.hull.get_or_init(|| self.incidence.row_space_intersection(self.dual_basis()).expect("same column count"))
    }

    /// Checks that the hull is spanned by the differences `H_0 - H_i` and has
    /// dimension `dim C - 1`; returns the hull dimension.
    pub fn verify_hull_structure(&self) -> Result<usize> {
        let hull = self.hull_basis();
        let np = self.length();
        let mut diffs = FpMatrix::zeros(self.p(), 0, np);
        let h0 = self.incidence.row_vector(0);
        for i in 1..np {
            diffs.push_row(&h0.sub(&self.incidence.row_vector(i)).entries);
        }
        let diff_rank = diffs.rank();
        let hull_dim = hull.rows();
        if diff_rank != hull_dim || hull_dim + 1 != self.dimension() {
            return Err(Error::AssertionFailed(format!(
                "hull dim {hull_dim}, span of differences {diff_rank}, dim C {}",
                self.dimension()
            )));
        }
        let hull_ech = hull.echelon();
        for r in 0..diffs.rows() {
            if !hull_ech.contains(diffs.row(r)) {
                return Err(Error::AssertionFailed(format!("H_0 - H_{} not in hull", r + 1)));
            }
        }
        for r in 0..hull.rows() {
            if !self.in_dual(hull.row(r)) || !self.contains(hull.row(r)) {
                return Err(Error::AssertionFailed(format!("hull basis row {r} not in C ∩ C⊥")));
            }
        }
        Ok(hull_dim)
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        v.len() == self.length() && self.echelon.contains(v)
    }

    pub fn row_member(&self, v: &FpVector) -> Result<bool> {
        if v.len() != self.length() {
            return Err(Error::DimensionMismatch(format!(
                "word of length {} for code of length {}",
                v.len(),
                self.length()
            )));
        }
        Ok(self.echelon.contains(&v.entries))
    }

    /// Orthogonal to every hyperplane.
    pub fn in_dual(&self, v: &[u8]) -> bool {
        v.len() == self.length()
            && self
                .space
                .hyperplane_points()
                .iter()
                .all(|pts| pts.iter().fold(0u8, |acc, &i| self.fp.add(acc, v[i])) == 0)
    }

    /// First hyperplane not orthogonal to `v`.
    pub fn first_nonorthogonal_hyperplane(&self, v: &[u8]) -> Option<usize> {
        self.space
            .hyperplane_points()
            .iter()
            .position(|pts| pts.iter().fold(0u8, |acc, &i| self.fp.add(acc, v[i])) != 0)
    }

    pub fn hyperplane_vector(&self, h: usize) -> FpVector {
        self.incidence.row_vector(h)
    }

    /// Incidence vector of an arbitrary point set, scaled by `value`.
    pub fn indicator(&self, points: &[usize], value: u8) -> FpVector {
        FpVector::indicator(self.p(), self.length(), points, value)
    }

    pub fn word_from_hyperplanes(&self, coeffs: &[(usize, u8)]) -> Result<Codeword> {
        let np = self.length();
        let mut acc = vec![0u8; np];
        let mut used = Vec::new();
        for &(h, a) in coeffs {
            if h >= np {
                return Err(Error::DimensionMismatch(format!("hyperplane {h} out of range")));
            }
            let a = a % self.p();
            if a != 0 {
                self.fp.axpy(&mut acc, a, self.incidence.row(h));
                used.push((h, a));
            }
        }
        if used.is_empty() {
            return Err(Error::EmptyCombination);
        }
        Ok(Codeword::new(FpVector::new(self.p(), acc), Provenance::Hyperplanes { coeffs: used }))
    }

    /// For each requested dimension `d >= 1`, the set of values `(c, U)` over all
    /// `d`-dimensional subspaces `U`.
    pub fn scalar_profile(&self, c: &FpVector, dims: &[usize]) -> Result<BTreeMap<usize, BTreeSet<u8>>> {
        if !self.row_member(c)? {
            return Err(Error::NotInCode);
        }
        let mut out = BTreeMap::new();
        for &d in dims {
            if d == 0 || d > self.space.n() {
                return Err(Error::DimensionMismatch(format!("subspace dimension {d} outside 1..={}", self.space.n())));
            }
            let values: BTreeSet<u8> = self
                .space
                .enumerate_subspaces(d)
                .iter()
                .map(|u| self.space.subspace_points(u).iter().fold(0u8, |acc, &i| self.fp.add(acc, c.entries[i])))
                .collect();
            out.insert(d, values);
        }
        Ok(out)
    }

    /// `2 q^(n-1)`, the minimum weight of the hull.
    pub fn hull_weight_bound(&self) -> usize {
        2 * (self.space.q() as usize).pow(self.space.n() as u32 - 1)
    }

    /// Classifies a codeword of weight in `]0, 2q^(n-1)[` as a scalar multiple of
    /// a minimal blocking set meeting every line in 1 (mod p) points. Any failed
    /// check is returned as `AssertionFailed` carrying the offending word.
    pub fn classify_small_codeword(&self, c: &FpVector) -> Result<SmallCodeword> {
        let limit = self.hull_weight_bound();
        let w = c.weight();
        if w == 0 || w >= limit {
            return Err(Error::NotSmall { weight: w, limit });
        }
        if !self.row_member(c)? {
            return Err(Error::NotInCode);
        }
        let symbols = c.symbols();
        if symbols.len() != 1 {
            return Err(Error::AssertionFailed(format!("word {} uses symbols {symbols:?}", c.digit_string())));
        }
        let support = c.support();
        let set = PointSet::new(self.space.clone(), support.clone())?;
        let p = self.p() as usize;
        for (li, size) in set.line_intersections().iter().enumerate() {
            if size % p != 1 % p {
                return Err(Error::AssertionFailed(format!(
                    "word {}: line {li} meets the support in {size} points",
                    c.digit_string()
                )));
            }
        }
        if !set.is_blocking() || !set.is_minimal() {
            return Err(Error::AssertionFailed(format!(
                "support of {} is not a minimal blocking set",
                c.digit_string()
            )));
        }
        Ok(SmallCodeword { symbol: symbols[0], support })
    }

    /// Projection of a dual word from a point `r` onto hyperplane `h`: the value
    /// at a point P of `h` is the sum of the symbols on the line `<r, P>`. The
    /// result lives in PG(n-1,q), identified with `h` through its echelon basis.
    pub fn project_dual_word(&self, c: &FpVector, r: usize, h: usize) -> Result<(FpVector, Arc<ProjSpace>)> {
        let space = &self.space;
        let n = space.n();
        if n < 3 {
            return Err(Error::DimensionMismatch("projection needs n >= 3".into()));
        }
        let np = space.num_points();
        if c.len() != np || r >= np || h >= np {
            return Err(Error::DimensionMismatch("word, centre or hyperplane out of range".into()));
        }
        if c.entries[r] != 0 {
            return Err(Error::PointInSupport(r));
        }
        let supp = PointSet::new(space.clone(), c.support())?;
        if supp.tangent_count(r) == 0 {
            return Err(Error::NoTangentThroughR(r));
        }
        let hyperplane = space.hyperplane(h);
        if space.incident(&space.point(r), &hyperplane)? {
            return Err(Error::PointOnHyperplane(r));
        }
        let hsub = space.hyperplane_subspace(&hyperplane);
        let chart = space.subspace_points(&hsub);
        let mut position = vec![usize::MAX; np];
        for (j, &pt) in chart.iter().enumerate() {
            position[pt] = j;
        }
        let mut out = vec![0u8; chart.len()];
        for x in c.support() {
            let line = space.line_through(r, x)?;
            let meet = space.intersect(&line, &hsub)?;
            let pt = space.subspace_points(&meet)[0];
            let j = position[pt];
            out[j] = self.fp.add(out[j], c.entries[x]);
        }
        let smaller = Arc::new(ProjSpace::new(space.field_arc(), n - 1)?);
        Ok((FpVector::new(self.p(), out), smaller))
    }

    /// A centre for [`Code::project_dual_word`] that lowers the weight: a point
    /// outside the support on both a tangent and a secant, and the first
    /// hyperplane avoiding it.
    pub fn find_reducing_center(&self, c: &FpVector) -> Option<(usize, usize)> {
        let supp = PointSet::new(self.space.clone(), c.support()).ok()?;
        let sizes = supp.line_intersections();
        let r = (0..self.length()).find(|&r| {
            c.entries[r] == 0 && {
                let through = &self.space.point_lines()[r];
                through.iter().any(|&l| sizes[l] == 1) && through.iter().any(|&l| sizes[l] >= 2)
            }
        })?;
        let h = (0..self.length()).find(|&h| !self.space.hyperplane_points()[h].contains(&r))?;
        Some((r, h))
    }

    /// Extends a word on a plane `pi` (identified with PG(2,q) via its echelon
    /// basis) by zeros.
    pub fn embed_planar_dual_word(&self, c: &FpVector, pi: &Subspace) -> Result<FpVector> {
        let chart = self.plane_chart(pi)?;
        if c.len() != chart.len() {
            return Err(Error::DimensionMismatch(format!(
                "planar word of length {} for a plane with {} points",
                c.len(),
                chart.len()
            )));
        }
        let mut out = vec![0u8; self.length()];
        for (j, &pt) in chart.iter().enumerate() {
            out[pt] = c.entries[j];
        }
        Ok(FpVector::new(self.p(), out))
    }

    /// Inverse of [`Code::embed_planar_dual_word`] on the plane.
    pub fn restrict_to_plane(&self, v: &FpVector, pi: &Subspace) -> Result<FpVector> {
        let chart = self.plane_chart(pi)?;
        Ok(FpVector::new(self.p(), chart.iter().map(|&pt| v.entries[pt]).collect()))
    }

    fn plane_chart(&self, pi: &Subspace) -> Result<Vec<usize>> {
        if pi.dim() != 2 || pi.ambient_len() != self.space.coord_len() {
            return Err(Error::PlaneNotInSpace);
        }
        Ok(self.space.subspace_points(pi))
    }
}

/// Rows are hyperplanes, columns points, both in canonical order.
pub fn incidence_matrix(space: &ProjSpace) -> FpMatrix {
    let np = space.num_points();
    let mut m = FpMatrix::zeros(space.p() as u8, np, np);
    for (h, pts) in space.hyperplane_points().iter().enumerate() {
        for &pt in pts {
            m.set(h, pt, 1);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn code(p: u32, h: u32, n: usize) -> Code {
        Code::build(n, Arc::new(Field::new(p, h).unwrap())).unwrap()
    }

    /// Dimension oracle: C(n+p-1, n)^h + 1.
    fn dimension_formula(p: u64, h: u32, n: u64) -> u64 {
        let mut binom = 1u64;
        for i in 0..n {
            binom = binom * (n + p - 1 - i) / (i + 1);
        }
        binom.pow(h) + 1
    }

    #[test]
    fn dimensions_match_formula() {
        for (p, h, n, expected) in [(2, 1, 2, 4), (2, 2, 2, 10), (2, 1, 3, 5), (3, 1, 2, 7)] {
            let c = code(p, h, n);
            assert_eq!(c.dimension(), expected);
            assert_eq!(dimension_formula(p as u64, h, n as u64), expected as u64);
        }
    }

    #[test]
    fn incidence_shape() {
        let c = code(2, 1, 2);
        assert_eq!(c.incidence().rows(), 7);
        for r in 0..7 {
            assert_eq!(c.incidence().row_vector(r).weight(), 3);
        }
        assert!(Code::with_incidence(c.space_arc(), FpMatrix::zeros(2, 6, 7)).is_err());
    }

    #[test]
    fn hull_dimensions() {
        let c = code(3, 1, 2);
        assert_eq!(c.verify_hull_structure().unwrap(), 6);
        assert_eq!(c.dual_basis().rows(), 13 - 7);
        let c = code(2, 1, 3);
        assert_eq!(c.verify_hull_structure().unwrap(), 4);
        let c = code(2, 2, 2);
        assert_eq!(c.verify_hull_structure().unwrap(), 9);
    }

    #[test]
    fn words_from_hyperplanes() {
        let c = code(3, 1, 2);
        let w = c.word_from_hyperplanes(&[(4, 1)]).unwrap();
        assert_eq!(w.weight(), 4);
        let d = c.word_from_hyperplanes(&[(0, 1), (5, 2)]).unwrap();
        assert_eq!(d.weight(), 6);
        assert!(c.in_dual(&d.vector.entries));
        let e = c.word_from_hyperplanes(&[(0, 1), (5, 1)]).unwrap();
        assert_eq!(e.weight(), 7);
        assert_eq!(c.word_from_hyperplanes(&[(0, 3), (2, 0)]), Err(Error::EmptyCombination));
    }

    #[test]
    fn scalar_profiles() {
        let c = code(3, 1, 2);
        let line = c.hyperplane_vector(2);
        let prof = c.scalar_profile(&line, &[1]).unwrap();
        assert_eq!(prof[&1], BTreeSet::from([1]));
        let diff = c.word_from_hyperplanes(&[(1, 1), (7, 2)]).unwrap().vector;
        let prof = c.scalar_profile(&diff, &[1, 2]).unwrap();
        assert_eq!(prof[&1], BTreeSet::from([0]));
        assert_eq!(prof[&2], BTreeSet::from([0]));
        let not_code = c.indicator(&[0], 1);
        assert_eq!(c.scalar_profile(&not_code, &[1]), Err(Error::NotInCode));
    }

    #[test]
    fn classify_lines() {
        let c = code(2, 2, 2);
        let r = c.classify_small_codeword(&c.hyperplane_vector(3)).unwrap();
        assert_eq!(r.symbol, 1);
        assert_eq!(r.support, c.space().hyperplane_points()[3]);
        let c3 = code(3, 1, 2);
        let r = c3.classify_small_codeword(&c3.hyperplane_vector(0).scale(2)).unwrap();
        assert_eq!(r.symbol, 2);
        let big = c3.word_from_hyperplanes(&[(0, 1), (1, 2)]).unwrap().vector;
        assert!(matches!(c3.classify_small_codeword(&big), Err(Error::NotSmall { .. })));
    }

    #[test]
    fn lemma_one_random_pairs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for (p, h, n) in [(3, 1, 3), (2, 2, 3), (5, 1, 2)] {
            let c = code(p, h, n);
            let s = c.space();
            for _ in 0..200 {
                let d1 = rng.gen_range(1..=n);
                let d2 = rng.gen_range(1..=n);
                let u1 = s.subspace_points(&s.random_subspace(d1, &mut rng));
                let u2 = s.subspace_points(&s.random_subspace(d2, &mut rng));
                let v = c.indicator(&u1, 1).sub(&c.indicator(&u2, 1));
                assert!(c.in_dual(&v.entries));
            }
        }
    }

    fn planar_line_difference(plane: &Code) -> FpVector {
        let l1 = plane.hyperplane_vector(0);
        let l2 = plane.hyperplane_vector(1);
        l1.sub(&l2)
    }

    #[test]
    fn embed_and_restrict() {
        let f = Arc::new(Field::new(2, 2).unwrap());
        let plane = Code::build(2, f.clone()).unwrap();
        let space3 = Code::build(3, f).unwrap();
        let pi = space3.space().enumerate_subspaces(2)[5].clone();
        // weight-6 dual word of PG(2,4): a hyperoval minus... any dual word works here
        let dual = plane.dual_basis().row_vector(0);
        assert!(plane.in_dual(&dual.entries));
        let big = space3.embed_planar_dual_word(&dual, &pi).unwrap();
        assert_eq!(big.weight(), dual.weight());
        assert!(space3.in_dual(&big.entries));
        assert_eq!(space3.restrict_to_plane(&big, &pi).unwrap(), dual);
        let zero = FpVector::zero(2, 21);
        assert!(space3.embed_planar_dual_word(&zero, &pi).unwrap().is_zero());
        let line = space3.space().enumerate_subspaces(1)[0].clone();
        assert_eq!(space3.embed_planar_dual_word(&dual, &line), Err(Error::PlaneNotInSpace));
    }

    #[test]
    fn projection_of_embedded_word() {
        let f = Arc::new(Field::new(2, 1).unwrap());
        let plane = Code::build(2, f.clone()).unwrap();
        let big = Code::build(3, f).unwrap();
        let pi = big.space().enumerate_subspaces(2)[0].clone();
        let c = big.embed_planar_dual_word(&planar_line_difference(&plane), &pi).unwrap();
        assert_eq!(c.weight(), 4);
        // a planar line difference has no point on both a tangent and a secant
        assert_eq!(big.find_reducing_center(&c), None);
        // the plane itself as target hyperplane: projection keeps the support
        let plane_h = (0..15)
            .find(|&h| {
                let pts = &big.space().hyperplane_points()[h];
                c.support().iter().all(|x| pts.contains(x))
            })
            .unwrap();
        let r = (0..15)
            .find(|&r| {
                !big.space().hyperplane_points()[plane_h].contains(&r) && big.project_dual_word(&c, r, plane_h).is_ok()
            })
            .unwrap();
        let (same, smaller) = big.project_dual_word(&c, r, plane_h).unwrap();
        let small_code = Code::from_space(smaller).unwrap();
        assert_eq!(same.weight(), c.weight());
        assert!(small_code.in_dual(&same.entries));
    }

    #[test]
    fn projection_errors() {
        let f = Arc::new(Field::new(2, 1).unwrap());
        let plane = Code::build(2, f.clone()).unwrap();
        let big = Code::build(3, f).unwrap();
        let pi = big.space().enumerate_subspaces(2)[0].clone();
        let c = big.embed_planar_dual_word(&planar_line_difference(&plane), &pi).unwrap();
        let s = c.support()[0];
        assert!(matches!(big.project_dual_word(&c, s, 0), Err(Error::PointInSupport(x)) if x == s));
        let r = (0..15).find(|&r| c.entries[r] == 0).unwrap();
        let h_on = (0..15).find(|&h| big.space().hyperplane_points()[h].contains(&r)).unwrap();
        let res = big.project_dual_word(&c, r, h_on);
        assert!(matches!(res, Err(Error::PointOnHyperplane(_)) | Err(Error::NoTangentThroughR(_))));
        assert!(plane.project_dual_word(&planar_line_difference(&plane), 0, 1).is_err());
    }

    #[test]
    fn codeword_files() {
        let c = code(3, 1, 2);
        let w = c.word_from_hyperplanes(&[(0, 1), (3, 2)]).unwrap();
        let (word, prov) = w.to_files();
        assert!(word.starts_with("3 13\n"));
        assert_eq!(Codeword::from_files(&word, &prov).unwrap(), w);
    }
}
