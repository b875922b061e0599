use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::space::{ProjSpace, Subspace};
use crate::error::{Error, Result};
use crate::fplinalg::parse_header;
use crate::gfq::{Field, FieldElement};

/// A spread element together with the point of PG(n,q) it represents.
/// Element indices coincide with point indices of PG(n,q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpreadElement(pub usize);

/// The Desarguesian (h-1)-spread of PG(h(n+1)-1, p) obtained by field reduction
/// from PG(n, p^h).
#[derive(Debug)]
pub struct Spread {
    base: Arc<ProjSpace>,
    ambient: Arc<ProjSpace>,
    elements: Vec<Vec<usize>>,
    subspaces: Vec<Subspace>,
    lookup: Vec<usize>,
}

impl Spread {
    /// Field reduction of `base = PG(n, p^h)`, `h >= 2`.
    pub fn field_reduce(base: Arc<ProjSpace>) -> Result<Spread> {
        let f = base.field();
        let h = f.h() as usize;
        if h < 2 {
            return Err(Error::PrimeFieldInput);
        }
        let prime = Arc::new(Field::new(f.p(), 1)?);
        let ambient = Arc::new(ProjSpace::new(prime, h * (base.n() + 1) - 1)?);
        let mut elements = Vec::with_capacity(base.num_points());
        let mut subspaces = Vec::with_capacity(base.num_points());
        let mut lookup = vec![usize::MAX; ambient.num_points()];
        for idx in 0..base.num_points() {
            let coords = base.point_coords(idx);
            let mut pts: Vec<usize> = f
                .elements()
                .skip(1)
                .map(|lam| {
                    let v = Self::reduce_vector(f, &coords, lam);
                    ambient.index_of(&v).expect("nonzero vector")
                })
                .collect();
            pts.sort_unstable();
            pts.dedup();
            for &pt in &pts {
                if lookup[pt] != usize::MAX {
                    return Err(Error::InconsistentInput(format!(
                        "point {pt} lies in elements {} and {idx}",
                        lookup[pt]
                    )));
                }
                lookup[pt] = idx;
            }
            subspaces.push(ambient.span(&pts)?);
            elements.push(pts);
        }
        if let Some(pt) = lookup.iter().position(|&e| e == usize::MAX) {
            return Err(Error::InconsistentInput(format!("point {pt} is not covered")));
        }
        Ok(Spread { base, ambient, elements, subspaces, lookup })
    }

    /// Prime-field coordinates of `lam * v`, coordinate blocks of length h in order.
    fn reduce_vector(f: &Field, v: &[FieldElement], lam: FieldElement) -> Vec<FieldElement> {
        v.iter().flat_map(|&x| f.to_prime_vector(f.mul(lam, x))).map(FieldElement).collect()
    }

    pub fn base(&self) -> &ProjSpace {
        &self.base
    }

    pub fn base_arc(&self) -> Arc<ProjSpace> {
        self.base.clone()
    }

    pub fn ambient(&self) -> &ProjSpace {
        &self.ambient
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Ambient point indices of an element, ascending.
    pub fn element_points(&self, e: SpreadElement) -> &[usize] {
        &self.elements[e.0]
    }

    pub fn element_subspace(&self, e: SpreadElement) -> &Subspace {
        &self.subspaces[e.0]
    }

    /// The element containing an ambient point.
    pub fn element_of(&self, point: usize) -> SpreadElement {
        SpreadElement(self.lookup[point])
    }

    fn check_element(&self, e: SpreadElement) -> Result<()> {
        if e.0 >= self.elements.len() {
            return Err(Error::ElementNotInSpread(e.0));
        }
        Ok(())
    }

    fn check_ambient(&self, u: &Subspace) -> Result<()> {
        if u.ambient_len() != self.ambient.coord_len() {
            return Err(Error::DimensionMismatch(format!(
                "subspace lives in {} coordinates, spread ambient has {}",
                u.ambient_len(),
                self.ambient.coord_len()
            )));
        }
        Ok(())
    }

    /// Spread elements meeting `u`, ascending.
    pub fn b_of(&self, u: &Subspace) -> Result<Vec<SpreadElement>> {
        self.check_ambient(u)?;
        let mut out: Vec<SpreadElement> =
            self.ambient.subspace_points(u).into_iter().map(|pt| self.element_of(pt)).collect();
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// For each element of `b_of(u)`, the number of points it shares with `u`.
    pub fn intersection_sizes(&self, u: &Subspace) -> Result<Vec<(SpreadElement, usize)>> {
        self.check_ambient(u)?;
        let mut counts = std::collections::BTreeMap::new();
        for pt in self.ambient.subspace_points(u) {
            *counts.entry(self.element_of(pt)).or_insert(0usize) += 1;
        }
        Ok(counts.into_iter().collect())
    }

    /// The q+1 elements inside the span of two distinct elements.
    pub fn spread_elements_in_span(&self, r1: SpreadElement, r2: SpreadElement) -> Result<Vec<SpreadElement>> {
        self.check_element(r1)?;
        self.check_element(r2)?;
        if r1 == r2 {
            return Err(Error::ElementNotInSpread(r2.0));
        }
        let w = self.ambient.join(&self.subspaces[r1.0], &self.subspaces[r2.0])?;
        let met = self.b_of(&w)?;
        for &e in &met {
            for &pt in &self.elements[e.0] {
                if !self.ambient.contains(&w, pt)? {
                    return Err(Error::InconsistentInput(format!(
                        "element {} meets the span of {} and {} without lying in it",
                        e.0, r1.0, r2.0
                    )));
                }
            }
        }
        Ok(met)
    }

    /// The unique line through the ambient point `x` meeting `r2` and `r3`,
    /// computed as `<x, <x, r2> ∩ r3>`.
    pub fn transversal_through(&self, x: usize, r2: SpreadElement, r3: SpreadElement) -> Result<Subspace> {
        self.check_element(r2)?;
        self.check_element(r3)?;
        let r1 = self.element_of(x);
        if r1 == r2 || r1 == r3 || r2 == r3 {
            return Err(Error::NoTransversal("elements must be pairwise distinct".into()));
        }
        let amb = &self.ambient;
        let point = amb.span(&[x])?;
        let plane = amb.join(&point, &self.subspaces[r2.0])?;
        let meet = amb.intersect(&plane, &self.subspaces[r3.0])?;
        if meet.dim() != 0 {
            return Err(Error::NoTransversal(format!("<x, R{}> meets R{} in dimension {}", r2.0, r3.0, meet.dim())));
        }
        let line = amb.join(&point, &meet)?;
        for r in [r2, r3] {
            let hit = amb.intersect(&line, &self.subspaces[r.0])?;
            if hit.dim() != 0 {
                return Err(Error::NoTransversal(format!("line does not meet R{} in a point", r.0)));
            }
        }
        Ok(line)
    }

    /// Spread file: header `"p h n"` (of the base space), then one line per
    /// element listing its ambient point indices.
    pub fn to_file_string(&self) -> String {
        let f = self.base.field();
        let mut s = format!("{} {} {}\n", f.p(), f.h(), self.base.n());
        for el in &self.elements {
            let t: Vec<String> = el.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(s, "{}", t.join(" "));
        }
        s
    }

    /// Parses a spread file and checks that it matches this spread exactly.
    pub fn check_file(&self, s: &str) -> Result<()> {
        let parsed = parse_spread_file(s)?;
        let f = self.base.field();
        if parsed.0 != [f.p() as usize, f.h() as usize, self.base.n()] || parsed.1 != self.elements {
            return Err(Error::Parse("spread file does not match".into()));
        }
        Ok(())
    }
}

/// `([p, h, n], elements)` from a spread file.
pub fn parse_spread_file(s: &str) -> Result<(Vec<usize>, Vec<Vec<usize>>)> {
    let mut lines = s.lines();
    let header = parse_header(lines.next().unwrap_or(""), 3)?;
    let elements = lines
        .map(|l| {
            l.split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((header, elements))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spread(p: u32, h: u32, n: usize) -> Spread {
        let base = Arc::new(ProjSpace::new(Arc::new(Field::new(p, h).unwrap()), n).unwrap());
        Spread::field_reduce(base).unwrap()
    }

    #[test]
    fn partition_sizes() {
        let s = spread(2, 2, 2);
        assert_eq!(s.len(), 21);
        assert_eq!(s.ambient().num_points(), 63);
        assert!(s.elements.iter().all(|e| e.len() == 3));
        let s9 = spread(3, 2, 2);
        assert_eq!(s9.len(), 91);
        assert_eq!(s9.ambient().num_points(), 364);
        assert!(s9.elements.iter().all(|e| e.len() == 4));
        assert!(s9.subspaces.iter().all(|u| u.dim() == 1));
    }

    #[test]
    fn prime_field_rejected() {
        let base = Arc::new(ProjSpace::new(Arc::new(Field::new(3, 1).unwrap()), 2).unwrap());
        assert!(matches!(Spread::field_reduce(base), Err(Error::PrimeFieldInput)));
    }

    #[test]
    fn span_of_two_elements_is_partitioned() {
        let s = spread(2, 2, 2);
        for a in 0..s.len() {
            for b in a + 1..s.len() {
                let (ra, rb) = (SpreadElement(a), SpreadElement(b));
                let inside = s.spread_elements_in_span(ra, rb).unwrap();
                assert_eq!(inside.len(), 5);
                assert!(inside.contains(&ra) && inside.contains(&rb));
                let w = s.ambient().join(s.element_subspace(ra), s.element_subspace(rb)).unwrap();
                let mut union: Vec<usize> = inside.iter().flat_map(|&e| s.element_points(e).to_vec()).collect();
                union.sort_unstable();
                let mut pts = s.ambient().subspace_points(&w);
                pts.sort_unstable();
                assert_eq!(union, pts);
                // the elements in the span are the points of the line through a and b
                let mut line = s.base().line_through(a, b).map(|l| s.base().subspace_points(&l)).unwrap();
                line.sort_unstable();
                let idx: Vec<usize> = inside.iter().map(|e| e.0).collect();
                assert_eq!(idx, line);
            }
        }
        assert!(s.spread_elements_in_span(SpreadElement(1), SpreadElement(1)).is_err());
    }

    #[test]
    fn b_of_single_element() {
        let s = spread(3, 2, 2);
        let u = s.element_subspace(SpreadElement(17)).clone();
        assert_eq!(s.b_of(&u).unwrap(), vec![SpreadElement(17)]);
        let wrong = s.base().span(&[0]).unwrap();
        assert!(s.b_of(&wrong).is_err());
    }

    #[test]
    fn transversals_of_a_regulus() {
        let s = spread(2, 2, 2);
        let (r1, r2) = (SpreadElement(0), SpreadElement(5));
        let reg = s.spread_elements_in_span(r1, r2).unwrap();
        let r3 = *reg.iter().find(|&&e| e != r1 && e != r2).unwrap();
        let mut covered = Vec::new();
        for &x in s.element_points(r1) {
            let m = s.transversal_through(x, r2, r3).unwrap();
            let pts = s.ambient().subspace_points(&m);
            assert_eq!(pts.len(), 3);
            for e in [r1, r2, r3] {
                let c = pts.iter().filter(|&&pt| s.element_of(pt) == e).count();
                assert_eq!(c, 1, "transversal meets R{} once", e.0);
            }
            // p+1 points, each in a different element of the span
            let mut els: Vec<_> = pts.iter().map(|&pt| s.element_of(pt)).collect();
            els.dedup();
            assert_eq!(els.len(), 3);
            assert!(els.iter().all(|e| reg.contains(e)));
            assert_eq!(m, s.transversal_through(x, r3, r2).unwrap());
            covered.extend(pts);
        }
        let n = covered.len();
        covered.sort_unstable();
        covered.dedup();
        assert_eq!(covered.len(), n, "transversals are pairwise disjoint");
    }

    #[test]
    fn transversal_rejects_bad_input() {
        let s = spread(2, 2, 2);
        let x = s.element_points(SpreadElement(0))[0];
        assert!(s.transversal_through(x, SpreadElement(0), SpreadElement(3)).is_err());
        // three elements not in a common regulus
        let reg = s.spread_elements_in_span(SpreadElement(0), SpreadElement(5)).unwrap();
        let outside = (0..s.len()).map(SpreadElement).find(|e| !reg.contains(e)).unwrap();
        assert!(matches!(s.transversal_through(x, SpreadElement(5), outside), Err(Error::NoTransversal(_))));
    }

    #[test]
    fn file_roundtrip() {
        let s = spread(2, 2, 2);
        let text = s.to_file_string();
        assert!(text.starts_with("2 2 2\n"));
        assert_eq!(text.lines().count(), 22);
        s.check_file(&text).unwrap();
        let (h, els) = parse_spread_file(&text).unwrap();
        assert_eq!(h, vec![2, 2, 2]);
        assert_eq!(els.len(), 21);
    }
}
