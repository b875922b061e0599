use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fplinalg::parse_header;
use crate::gfq::{Field, FieldElement};

/// Largest number of points a space may have unless a budget is given.
pub const DEFAULT_POINT_BUDGET: u64 = 1_000_000;

/// Number of points of PG(m,q): `(q^(m+1) - 1) / (q - 1)`; zero for `m < 0`.
pub fn theta(m: i64, q: u64) -> u64 {
    if m < 0 {
        return 0;
    }
    (0..=m as u32).map(|i| q.pow(i)).sum()
}

/// Number of `k`-dimensional vector subspaces of GF(q)^m.
pub fn gaussian_binomial(m: u32, k: u32, q: u64) -> u64 {
    if k > m {
        return 0;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num *= (q as u128).pow(m - i) - 1;
        den *= (q as u128).pow(i + 1) - 1;
    }
    (num / den) as u64
}

/// A point with normalized coordinates (first nonzero coordinate equal to 1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    pub index: usize,
    pub coords: Vec<FieldElement>,
}

/// A hyperplane, given by a normalized normal vector; its index is the index of
/// the point with the same coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hyperplane {
    pub index: usize,
    pub normal: Vec<FieldElement>,
}

/// A projective subspace, stored as the reduced row echelon basis of its
/// underlying vector subspace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subspace {
    basis: Vec<Vec<FieldElement>>,
    len: usize,
}

impl Subspace {
    pub fn basis(&self) -> &[Vec<FieldElement>] {
        &self.basis
    }

    /// Vector dimension.
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Projective dimension; `-1` for the empty subspace.
    pub fn dim(&self) -> i64 {
        self.basis.len() as i64 - 1
    }

    /// Length of coordinate vectors (`n + 1`).
    pub fn ambient_len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }
}

#[derive(Debug, Default)]
struct Incidence {
    hyperplane_points: OnceLock<Vec<Vec<usize>>>,
    lines: OnceLock<Vec<Vec<usize>>>,
    point_lines: OnceLock<Vec<Vec<usize>>>,
}

/// PG(n,q) with canonical point order and cached incidence data.
#[derive(Debug)]
pub struct ProjSpace {
    field: Arc<Field>,
    n: usize,
    theta: Vec<u64>,
    cache: Incidence,
}

impl ProjSpace {
    pub fn new(field: Arc<Field>, n: usize) -> Result<ProjSpace> {
        ProjSpace::with_budget(field, n, DEFAULT_POINT_BUDGET)
    }

    pub fn with_budget(field: Arc<Field>, n: usize, budget: u64) -> Result<ProjSpace> {
        if n == 0 {
            return Err(Error::DimensionMismatch("projective dimension must be >= 1".into()));
        }
        let q = field.q() as u64;
        let total = (q as f64).powi(n as i32 + 1);
        if total > 4.0 * budget as f64 || theta(n as i64, q) > budget {
            return Err(Error::BudgetExceeded(format!("PG({n},{q}) has more than {budget} points")));
        }
        let theta = (0..=n as i64).map(|m| theta(m, q)).collect();
        Ok(ProjSpace { field, n, theta, cache: Incidence::default() })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn field_arc(&self) -> Arc<Field> {
        self.field.clone()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    /// `θ_0, ..., θ_n`.
    pub fn thetas(&self) -> &[u64] {
        &self.theta
    }

    pub fn theta(&self, m: i64) -> u64 {
        theta(m, self.q() as u64)
    }

    pub fn num_points(&self) -> usize {
        self.theta[self.n] as usize
    }

    pub fn coord_len(&self) -> usize {
        self.n + 1
    }

    /// Coordinates of the point with the given canonical index.
    pub fn point_coords(&self, index: usize) -> Vec<FieldElement> {
        coords_from_index(self.q() as u64, self.n + 1, index as u64)
    }

    pub fn point(&self, index: usize) -> Point {
        Point { index, coords: self.point_coords(index) }
    }

    /// Scales a nonzero vector so that its first nonzero coordinate is 1.
    pub fn normalize(&self, v: &[FieldElement]) -> Option<Vec<FieldElement>> {
        normalize(&self.field, v)
    }

    /// Canonical index of an already normalized coordinate vector.
    pub fn index_of_normalized(&self, v: &[FieldElement]) -> usize {
        index_from_normalized(self.q() as u64, v) as usize
    }

    pub fn index_of(&self, v: &[FieldElement]) -> Result<usize> {
        if v.len() != self.n + 1 {
            return Err(Error::DimensionMismatch(format!("{} coordinates in PG({},{})", v.len(), self.n, self.q())));
        }
        let w = self.normalize(v).ok_or(Error::EmptyInput)?;
        Ok(self.index_of_normalized(&w))
    }

    pub fn enumerate_points(&self) -> Vec<Point> {
        (0..self.num_points()).map(|i| self.point(i)).collect()
    }

    pub fn hyperplane(&self, index: usize) -> Hyperplane {
        Hyperplane { index, normal: self.point_coords(index) }
    }

    pub fn enumerate_hyperplanes(&self) -> Vec<Hyperplane> {
        (0..self.num_points()).map(|i| self.hyperplane(i)).collect()
    }

    /// The hyperplane as a subspace (annihilator of its normal).
    pub fn hyperplane_subspace(&self, h: &Hyperplane) -> Subspace {
        let ann = null_space(&self.field, std::slice::from_ref(&h.normal), self.n + 1);
        self.subspace_from_vectors_unchecked(ann)
    }

    fn dot(&self, a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
        let f = &self.field;
        a.iter().zip(b).fold(FieldElement::ZERO, |acc, (&x, &y)| f.add(acc, f.mul(x, y)))
    }

    pub fn incident(&self, point: &Point, h: &Hyperplane) -> Result<bool> {
        if point.coords.len() != h.normal.len() || point.coords.len() != self.n + 1 {
            return Err(Error::DimensionMismatch("point and hyperplane coordinates differ".into()));
        }
        Ok(self.dot(&point.coords, &h.normal).is_zero())
    }

    /// Point indices of each hyperplane, in hyperplane order.
    pub fn hyperplane_points(&self) -> &[Vec<usize>] {
        self.cache.hyperplane_points.get_or_init(|| {
            let coords: Vec<Vec<FieldElement>> = (0..self.num_points()).map(|i| self.point_coords(i)).collect();
            coords
                .iter()
                .map(|normal| {
                    coords.iter().enumerate().filter(|(_, c)| self.dot(c, normal).is_zero()).map(|(i, _)| i).collect()
                })
                .collect()
        })
    }

    /// Point indices of each line, in the order of [`ProjSpace::enumerate_subspaces`].
    pub fn lines(&self) -> &[Vec<usize>] {
        self.cache.lines.get_or_init(|| {
            self.enumerate_subspaces(1)
                .iter()
                .map(|l| {
                    let mut pts = self.subspace_points(l);
                    pts.sort_unstable();
                    pts
                })
                .collect()
        })
    }

    /// For every point, the indices of the lines through it.
    pub fn point_lines(&self) -> &[Vec<usize>] {
        self.cache.point_lines.get_or_init(|| {
            let mut out = vec![Vec::new(); self.num_points()];
            for (li, line) in self.lines().iter().enumerate() {
                for &pt in line {
                    out[pt].push(li);
                }
            }
            out
        })
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n + 1 {
            return Err(Error::DimensionMismatch(format!("vector of length {len} in PG({},{})", self.n, self.q())));
        }
        Ok(())
    }

    fn subspace_from_vectors_unchecked(&self, vectors: Vec<Vec<FieldElement>>) -> Subspace {
        Subspace { basis: rref(&self.field, vectors), len: self.n + 1 }
    }

    /// Subspace spanned by arbitrary coordinate vectors.
    pub fn subspace_from_vectors(&self, vectors: Vec<Vec<FieldElement>>) -> Result<Subspace> {
        for v in &vectors {
            self.check_len(v.len())?;
            if v.iter().any(|x| x.0 >= self.q()) {
                return Err(Error::DimensionMismatch("coordinate outside the field".into()));
            }
        }
        Ok(self.subspace_from_vectors_unchecked(vectors))
    }

    pub fn span(&self, points: &[usize]) -> Result<Subspace> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(&bad) = points.iter().find(|&&i| i >= self.num_points()) {
            return Err(Error::DimensionMismatch(format!("point index {bad} out of range")));
        }
        Ok(self.subspace_from_vectors_unchecked(points.iter().map(|&i| self.point_coords(i)).collect()))
    }

    pub fn line_through(&self, a: usize, b: usize) -> Result<Subspace> {
        if a == b {
            return Err(Error::DimensionMismatch("a line needs two distinct points".into()));
        }
        self.span(&[a, b])
    }

    pub fn join(&self, u: &Subspace, w: &Subspace) -> Result<Subspace> {
        self.check_len(u.len)?;
        self.check_len(w.len)?;
        let mut rows = u.basis.clone();
        rows.extend(w.basis.iter().cloned());
        Ok(self.subspace_from_vectors_unchecked(rows))
    }

    pub fn intersect(&self, u: &Subspace, w: &Subspace) -> Result<Subspace> {
        self.check_len(u.len)?;
        self.check_len(w.len)?;
        let m = self.n + 1;
        let mut ann = null_space(&self.field, &u.basis, m);
        ann.extend(null_space(&self.field, &w.basis, m));
        Ok(self.subspace_from_vectors_unchecked(null_space(&self.field, &ann, m)))
    }

    pub fn contains_vector(&self, u: &Subspace, v: &[FieldElement]) -> bool {
        let mut rows = u.basis.clone();
        rows.push(v.to_vec());
        rref(&self.field, rows).len() == u.basis.len()
    }

    pub fn contains(&self, u: &Subspace, point: usize) -> Result<bool> {
        self.check_len(u.len)?;
        Ok(self.contains_vector(u, &self.point_coords(point)))
    }

    pub fn is_subspace_of(&self, u: &Subspace, w: &Subspace) -> bool {
        u.basis.iter().all(|v| self.contains_vector(w, v))
    }

    /// Ambient indices of the points of `u`, listed in the canonical order of
    /// PG(rank-1, q) applied to coefficient vectors over the echelon basis.
    /// Entry `j` is the image of point `j` of that smaller space, which gives a
    /// fixed identification of `u` with PG(rank-1, q).
    pub fn subspace_points(&self, u: &Subspace) -> Vec<usize> {
        let k = u.basis.len();
        if k == 0 {
            return Vec::new();
        }
        let q = self.q() as u64;
        let f = &self.field;
        let count = theta(k as i64 - 1, q);
        let mut out = Vec::with_capacity(count as usize);
        let mut v = vec![FieldElement::ZERO; self.n + 1];
        for j in 0..count {
            let a = coords_from_index(q, k, j);
            v.iter_mut().for_each(|x| *x = FieldElement::ZERO);
            for (coef, row) in a.iter().zip(&u.basis) {
                if !coef.is_zero() {
                    for (x, &r) in v.iter_mut().zip(row) {
                        *x = f.add(*x, f.mul(*coef, r));
                    }
                }
            }
            out.push(self.index_of_normalized(&v));
        }
        out
    }

    /// All subspaces of projective dimension `dim`, in a fixed order
    /// (pivot sets lexicographically, then free entries counting in base q).
    pub fn enumerate_subspaces(&self, dim: usize) -> Vec<Subspace> {
        let m = self.n + 1;
        let k = dim + 1;
        let mut out = Vec::new();
        if k > m {
            return out;
        }
        let q = self.q();
        for pivots in combinations(m, k) {
            let free: Vec<(usize, usize)> = (0..k)
                .flat_map(|r| {
                    let pivots = &pivots;
                    (pivots[r] + 1..m).filter(move |c| !pivots.contains(c)).map(move |c| (r, c))
                })
                .collect();
            let total = (q as u64).pow(free.len() as u32);
            for code in 0..total {
                let mut basis = vec![vec![FieldElement::ZERO; m]; k];
                for (r, &c) in pivots.iter().enumerate() {
                    basis[r][c] = FieldElement::ONE;
                }
                let mut rest = code;
                for &(r, c) in free.iter().rev() {
                    basis[r][c] = FieldElement((rest % q as u64) as u32);
                    rest /= q as u64;
                }
                out.push(Subspace { basis, len: m });
            }
        }
        out
    }

    pub fn random_subspace<R: Rng>(&self, dim: usize, rng: &mut R) -> Subspace {
        let m = self.n + 1;
        assert!(dim < m);
        let mut rows: Vec<Vec<FieldElement>> = Vec::new();
        while rows.len() < dim + 1 {
            let v: Vec<FieldElement> = (0..m).map(|_| FieldElement(rng.gen_range(0..self.q()))).collect();
            let mut trial = rows.clone();
            trial.push(v.clone());
            if rref(&self.field, trial).len() == rows.len() + 1 {
                rows.push(v);
            }
        }
        self.subspace_from_vectors_unchecked(rows)
    }

    /// Point-list file: header `"p h n"`, then one line of coordinate codes per point.
    pub fn points_file_string(&self) -> String {
        let mut s = format!("{} {} {}\n", self.p(), self.field.h(), self.n);
        for i in 0..self.num_points() {
            let c: Vec<String> = self.point_coords(i).iter().map(|x| x.0.to_string()).collect();
            let _ = writeln!(s, "{}", c.join(" "));
        }
        s
    }

    /// Parses a point-list file, checking it against this space's canonical order.
    pub fn check_points_file(&self, s: &str) -> Result<()> {
        let mut lines = s.lines();
        let header = parse_header(lines.next().unwrap_or(""), 3)?;
        if header != [self.p() as usize, self.field.h() as usize, self.n] {
            return Err(Error::Parse(format!("header {header:?} does not match the space")));
        }
        let mut count = 0;
        for (i, line) in lines.enumerate() {
            let coords: Vec<FieldElement> = line
                .split_whitespace()
                .map(|t| t.parse::<u32>().map(FieldElement).map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<_>>()?;
            if i >= self.num_points() || coords != self.point_coords(i) {
                return Err(Error::Parse(format!("point line {i} does not match")));
            }
            count += 1;
        }
        if count != self.num_points() {
            return Err(Error::Parse(format!("expected {} points, got {count}", self.num_points())));
        }
        Ok(())
    }
}

pub(crate) fn normalize(f: &Field, v: &[FieldElement]) -> Option<Vec<FieldElement>> {
    let lead = *v.iter().find(|x| !x.is_zero())?;
    let inv = f.inv(lead).ok()?;
    Some(v.iter().map(|&x| f.mul(x, inv)).collect())
}

/// Canonical index of a normalized vector: points whose first nonzero
/// coordinate sits further left come first, then the remaining coordinates
/// are read as a base-q number.
pub(crate) fn index_from_normalized(q: u64, v: &[FieldElement]) -> u64 {
    let len = v.len();
    let lead = v.iter().position(|x| !x.is_zero()).expect("nonzero vector");
    let mut idx: u64 = (0..lead).map(|j| q.pow((len - 1 - j) as u32)).sum();
    let mut rest = 0u64;
    for x in &v[lead + 1..] {
        rest = rest * q + x.0 as u64;
    }
    idx += rest;
    idx
}

pub(crate) fn coords_from_index(q: u64, len: usize, mut index: u64) -> Vec<FieldElement> {
    let mut lead = 0;
    loop {
        let block = q.pow((len - 1 - lead) as u32);
        if index < block {
            break;
        }
        index -= block;
        lead += 1;
    }
    let mut v = vec![FieldElement::ZERO; len];
    v[lead] = FieldElement::ONE;
    for pos in (lead + 1..len).rev() {
        v[pos] = FieldElement((index % q) as u32);
        index /= q;
    }
    v
}

/// Reduced row echelon form over GF(q); zero rows dropped.
pub(crate) fn rref(f: &Field, mut rows: Vec<Vec<FieldElement>>) -> Vec<Vec<FieldElement>> {
    let m = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..m {
        let Some(piv) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, piv);
        let inv = f.inv(rows[r][c]).expect("nonzero pivot");
        for x in rows[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let factor = f.neg(row[c]);
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = f.add(*x, f.mul(factor, y));
                }
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    rows
}

/// Basis of `{x : <row, x> = 0 for every row}` in GF(q)^m.
pub(crate) fn null_space(f: &Field, rows: &[Vec<FieldElement>], m: usize) -> Vec<Vec<FieldElement>> {
    let red = rref(f, rows.to_vec());
    let pivots: Vec<usize> = red.iter().map(|row| row.iter().position(|x| !x.is_zero()).unwrap()).collect();
    (0..m)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![FieldElement::ZERO; m];
            v[free] = FieldElement::ONE;
            for (row, &pc) in red.iter().zip(&pivots) {
                v[pc] = f.neg(row[free]);
            }
            v
        })
        .collect()
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::new(), &mut out);
    out
}
