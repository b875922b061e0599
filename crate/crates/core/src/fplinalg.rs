//! Dense linear algebra over the prime field F_p.
//!
//! Entries are bytes in `[0, p)`. Elimination always picks the leftmost pivot
//! column and, within it, the lowest row index, so reduced forms, bases and
//! everything derived from them are reproducible.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multiplication and inverse tables for F_p, p < 256.
#[derive(Debug, Clone)]
pub struct Fp {
    p: u8,
    mul: Vec<u8>,
    inv: Vec<u8>,
}

impl Fp {
    pub fn new(p: u8) -> Fp {
        let pu = p as usize;
        let mut mul = vec![0u8; pu * pu];
        let mut inv = vec![0u8; pu];
        for a in 0..pu {
            for b in 0..pu {
                let m = (a * b) % pu;
                mul[a * pu + b] = m as u8;
                if m == 1 {
                    inv[a] = b as u8;
                }
            }
        }
        Fp { p, mul, inv }
    }

    #[inline]
    pub fn p(&self) -> u8 {
        self.p
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        let s = a as u16 + b as u16;
        if s >= self.p as u16 {
            (s - self.p as u16) as u8
        } else {
            s as u8
        }
    }

    #[inline]
    pub fn neg(&self, a: u8) -> u8 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.p as usize + b as usize]
    }

    /// Inverse of a nonzero element.
    #[inline]
    pub fn inv(&self, a: u8) -> u8 {
        debug_assert!(a != 0);
        self.inv[a as usize]
    }

    /// `dst += factor * src`
    #[inline]
    pub fn axpy(&self, dst: &mut [u8], factor: u8, src: &[u8]) {
        if factor == 0 {
            return;
        }
        let row = &self.mul[factor as usize * self.p as usize..][..self.p as usize];
        for (d, &s) in dst.iter_mut().zip(src) {
            *d = self.add(*d, row[s as usize]);
        }
    }

    pub fn dot(&self, a: &[u8], b: &[u8]) -> u8 {
        let p = self.p as u32;
        (a.iter().zip(b).map(|(&x, &y)| x as u32 * y as u32).sum::<u32>() % p) as u8
    }
}

/// A vector over F_p, typically indexed by the points of a projective space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FpVector {
    pub p: u8,
    pub entries: Vec<u8>,
}

impl FpVector {
    pub fn zero(p: u8, len: usize) -> FpVector {
        FpVector { p, entries: vec![0; len] }
    }

    pub fn new(p: u8, entries: Vec<u8>) -> FpVector {
        debug_assert!(entries.iter().all(|&e| e < p));
        FpVector { p, entries }
    }

    /// `value` on each listed position, zero elsewhere.
    pub fn indicator(p: u8, len: usize, positions: &[usize], value: u8) -> FpVector {
        let mut v = FpVector::zero(p, len);
        for &i in positions {
            v.entries[i] = value;
        }
        v
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.entries.iter().filter(|&&e| e != 0).count()
    }

    pub fn support(&self) -> Vec<usize> {
        self.entries.iter().enumerate().filter(|(_, &e)| e != 0).map(|(i, _)| i).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    pub fn dot(&self, other: &FpVector) -> u8 {
        Fp::new(self.p).dot(&self.entries, &other.entries)
    }

    pub fn add(&self, other: &FpVector) -> FpVector {
        let f = Fp::new(self.p);
        let entries = self.entries.iter().zip(&other.entries).map(|(&a, &b)| f.add(a, b)).collect();
        FpVector { p: self.p, entries }
    }

    pub fn sub(&self, other: &FpVector) -> FpVector {
        let f = Fp::new(self.p);
        let entries = self.entries.iter().zip(&other.entries).map(|(&a, &b)| f.sub(a, b)).collect();
        FpVector { p: self.p, entries }
    }

    pub fn scale(&self, s: u8) -> FpVector {
        let f = Fp::new(self.p);
        FpVector { p: self.p, entries: self.entries.iter().map(|&a| f.mul(a, s)).collect() }
    }

    /// Distinct nonzero symbols, ascending.
    pub fn symbols(&self) -> Vec<u8> {
        let mut s: Vec<u8> = self.entries.iter().copied().filter(|&e| e != 0).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Digit-string form used by the codeword file format.
    pub fn digit_string(&self) -> String {
        self.entries.iter().map(|&e| digit(e)).collect()
    }

    /// `"p len"` header followed by the digit string.
    pub fn to_file_string(&self) -> String {
        format!("{} {}\n{}\n", self.p, self.len(), self.digit_string())
    }

    pub fn from_file_string(s: &str) -> Result<FpVector> {
        let mut lines = s.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
        let nums = parse_header(header, 2)?;
        let (p, len) = (nums[0] as u8, nums[1]);
        let body = lines.next().unwrap_or("");
        let entries = parse_digits(body, p)?;
        if entries.len() != len {
            return Err(Error::Parse(format!("expected {len} digits, got {}", entries.len())));
        }
        Ok(FpVector { p, entries })
    }
}

fn digit(e: u8) -> char {
    std::char::from_digit(e as u32, 36).expect("entry below 36")
}

fn parse_digits(s: &str, p: u8) -> Result<Vec<u8>> {
    s.trim()
        .chars()
        .map(|c| {
            c.to_digit(36)
                .filter(|&d| d < p as u32)
                .map(|d| d as u8)
                .ok_or_else(|| Error::Parse(format!("bad digit {c:?} for p={p}")))
        })
        .collect()
}

pub(crate) fn parse_header(line: &str, count: usize) -> Result<Vec<usize>> {
    let nums: Vec<usize> = line
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
        .collect::<Result<_>>()?;
    if nums.len() != count {
        return Err(Error::Parse(format!("header {line:?} needs {count} fields")));
    }
    Ok(nums)
}

/// A dense row-major matrix over F_p.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FpMatrix {
    p: u8,
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub matrix: FpMatrix,
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces `v` against the pivot rows; zero remainder iff `v` is in the row space.
    pub fn reduce(&self, v: &mut [u8]) {
        let f = Fp::new(self.matrix.p);
        for (r, &c) in self.pivots.iter().enumerate() {
            let x = v[c];
            if x != 0 {
                f.axpy(v, f.neg(x), self.matrix.row(r));
            }
        }
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(|&x| x == 0)
    }

    /// Nonzero rows of the reduced form: a basis of the row space.
    pub fn basis(&self) -> FpMatrix {
        let mut m = FpMatrix::zeros(self.matrix.p, 0, self.matrix.cols);
        for r in 0..self.rank() {
            m.push_row(self.matrix.row(r));
        }
        m
    }

    /// Basis of the right null space `{x : Mx = 0}`.
    pub fn null_basis(&self) -> FpMatrix {
        let f = Fp::new(self.matrix.p);
        let cols = self.matrix.cols;
        let mut is_pivot = vec![false; cols];
        for &c in &self.pivots {
            is_pivot[c] = true;
        }
        let mut out = FpMatrix::zeros(self.matrix.p, 0, cols);
        for free in (0..cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0u8; cols];
            v[free] = 1;
            for (r, &c) in self.pivots.iter().enumerate() {
                v[c] = f.neg(self.matrix.get(r, free));
            }
            out.push_row(&v);
        }
        out
    }
}

impl FpMatrix {
    pub fn zeros(p: u8, rows: usize, cols: usize) -> FpMatrix {
        FpMatrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u8, n: usize) -> FpMatrix {
        let mut m = FpMatrix::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(p: u8, cols: usize, rows: &[Vec<u8>]) -> Result<FpMatrix> {
        let mut m = FpMatrix::zeros(p, 0, cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row of length {} in a matrix with {cols} columns",
                    r.len()
                )));
            }
            if r.iter().any(|&e| e >= p) {
                return Err(Error::DimensionMismatch(format!("entry outside F_{p}")));
            }
            m.push_row(r);
        }
        Ok(m)
    }

    pub fn p(&self) -> u8 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u8) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vector(&self, r: usize) -> FpVector {
        FpVector::new(self.p, self.row(r).to_vec())
    }

    pub fn row_vectors(&self) -> Vec<FpVector> {
        (0..self.rows).map(|r| self.row_vector(r)).collect()
    }

    pub fn push_row(&mut self, row: &[u8]) {
        assert_eq!(row.len(), self.cols);
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn stack(&self, other: &FpMatrix) -> Result<FpMatrix> {
        if self.cols != other.cols || self.p != other.p {
            return Err(Error::DimensionMismatch("stacking incompatible matrices".into()));
        }
        let mut m = self.clone();
        m.data.extend_from_slice(&other.data);
        m.rows += other.rows;
        Ok(m)
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut t = FpMatrix::zeros(self.p, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// Gauss-Jordan elimination with leftmost-column, lowest-row pivoting.
    pub fn echelon(&self) -> Echelon {
        let f = Fp::new(self.p);
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(piv) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            m.swap_rows(r, piv);
            let inv = f.inv(m.get(r, c));
            for x in &mut m.data[r * m.cols..(r + 1) * m.cols] {
                *x = f.mul(*x, inv);
            }
            let pivot_row = m.row(r).to_vec();
            for i in 0..m.rows {
                if i != r {
                    let x = m.get(i, c);
                    if x != 0 {
                        let start = i * m.cols;
                        f.axpy(&mut m.data[start..start + m.cols], f.neg(x), &pivot_row);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        Echelon { matrix: m, pivots }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    /// Reduced row echelon form and rank.
    pub fn rref(&self) -> (FpMatrix, usize) {
        let e = self.echelon();
        let rank = e.rank();
        (e.matrix, rank)
    }

    pub fn rank(&self) -> usize {
        self.echelon().rank()
    }

    pub fn row_member(&self, v: &FpVector) -> Result<bool> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!("vector length {} vs {} columns", v.len(), self.cols)));
        }
        Ok(self.echelon().contains(&v.entries))
    }

    pub fn null_basis(&self) -> FpMatrix {
        self.echelon().null_basis()
    }

    /// Basis of `rowspace(self) ∩ rowspace(other)`, computed as the annihilator
    /// of the union of the two annihilators.
    pub fn row_space_intersection(&self, other: &FpMatrix) -> Result<FpMatrix> {
        if self.cols != other.cols || self.p != other.p {
            return Err(Error::DimensionMismatch(format!("{} vs {} columns", self.cols, other.cols)));
        }
        let annihilator = self.null_basis().stack(&other.null_basis())?;
        if annihilator.rows == 0 {
            return Ok(FpMatrix::identity(self.p, self.cols).echelon().basis());
        }
        Ok(annihilator.null_basis().echelon().basis())
    }

    /// `M v` as a vector of row dot products.
    pub fn mul_vector(&self, v: &[u8]) -> Vec<u8> {
        let f = Fp::new(self.p);
        (0..self.rows).map(|r| f.dot(self.row(r), v)).collect()
    }

    /// Header `"p rows cols"` then one digit string per row.
    pub fn to_file_string(&self) -> String {
        let mut s = format!("{} {} {}\n", self.p, self.rows, self.cols);
        for r in 0..self.rows {
            for &e in self.row(r) {
                s.push(digit(e));
            }
            s.push('\n');
        }
        s
    }

    pub fn from_file_string(s: &str) -> Result<FpMatrix> {
        let mut lines = s.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
        let nums = parse_header(header, 3)?;
        let (p, rows, cols) = (nums[0] as u8, nums[1], nums[2]);
        let mut m = FpMatrix::zeros(p, 0, cols);
        for _ in 0..rows {
            let line = lines.next().ok_or_else(|| Error::Parse("missing row".into()))?;
            let row = parse_digits(line, p)?;
            if row.len() != cols {
                return Err(Error::Parse(format!("row of length {} != {cols}", row.len())));
            }
            m.push_row(&row);
        }
        Ok(m)
    }

    /// Compact display for diagnostics.
    pub fn pretty(&self) -> String {
        let mut s = String::new();
        for r in 0..self.rows {
            for &e in self.row(r) {
                let _ = write!(s, "{}", digit(e));
            }
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fano() -> FpMatrix {
        let lines = [[0, 1, 2], [0, 3, 4], [0, 5, 6], [1, 3, 5], [1, 4, 6], [2, 3, 6], [2, 4, 5]];
        let rows: Vec<Vec<u8>> = lines.iter().map(|l| (0..7).map(|i| l.contains(&i) as u8).collect()).collect();
        FpMatrix::from_rows(2, 7, &rows).unwrap()
    }

    #[test]
    fn identity_and_zero_rank() {
        assert_eq!(FpMatrix::identity(3, 3).rank(), 3);
        assert_eq!(FpMatrix::zeros(3, 4, 5).rank(), 0);
        assert!(FpMatrix::identity(5, 4).null_basis().rows() == 0);
    }

    #[test]
    fn fano_rank_and_null_space() {
        let m = fano();
        assert_eq!(m.rank(), 4);
        let n = m.null_basis();
        assert_eq!(n.rows(), 3);
        for r in 0..n.rows() {
            assert!(m.mul_vector(n.row(r)).iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn membership_basics() {
        let m = fano();
        for r in 0..m.rows() {
            assert!(m.row_member(&m.row_vector(r)).unwrap());
        }
        assert!(m.row_member(&FpVector::zero(2, 7)).unwrap());
        assert!(matches!(m.row_member(&FpVector::zero(2, 6)), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn intersection_edge_cases() {
        let m = fano();
        let i = m.row_space_intersection(&m).unwrap();
        assert_eq!(i.rank(), 4);
        let a = FpMatrix::from_rows(3, 3, &[vec![1, 0, 0]]).unwrap();
        let b = FpMatrix::from_rows(3, 3, &[vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        assert_eq!(a.row_space_intersection(&b).unwrap().rows(), 0);
        let c = FpMatrix::zeros(3, 0, 4);
        assert!(a.row_space_intersection(&c).is_err());
    }

    #[test]
    fn file_roundtrip() {
        let m = fano();
        let back = FpMatrix::from_file_string(&m.to_file_string()).unwrap();
        assert_eq!(back, m);
        let v = FpVector::new(5, vec![0, 4, 3, 1]);
        assert_eq!(v.to_file_string(), "5 4\n0431\n");
        assert_eq!(FpVector::from_file_string(&v.to_file_string()).unwrap(), v);
        assert!(FpVector::from_file_string("3 2\n05\n").is_err());
    }

    fn matrix_strategy() -> impl Strategy<Value = (u8, usize, Vec<Vec<u8>>)> {
        (prop::sample::select(vec![2u8, 3, 5, 7]), 1usize..7, 1usize..8).prop_flat_map(|(p, rows, cols)| {
            (Just(p), Just(cols), prop::collection::vec(prop::collection::vec(0..p, cols), rows))
        })
    }

    proptest! {
        #[test]
        fn rref_idempotent_and_rank_invariant((p, cols, rows) in matrix_strategy()) {
            let m = FpMatrix::from_rows(p, cols, &rows).unwrap();
            let (r1, k1) = m.rref();
            let (r2, k2) = r1.rref();
            prop_assert_eq!(&r1, &r2);
            prop_assert_eq!(k1, k2);
            let mut rev = rows.clone();
            rev.reverse();
            prop_assert_eq!(FpMatrix::from_rows(p, cols, &rev).unwrap().rank(), k1);
            prop_assert_eq!(k1 + m.null_basis().rows(), cols);
        }

        #[test]
        fn membership_matches_rank((p, cols, rows) in matrix_strategy(), seed in 0u64..1000) {
            let m = FpMatrix::from_rows(p, cols, &rows).unwrap();
            let v: Vec<u8> = (0..cols).map(|i| ((seed / (i as u64 + 1)) % p as u64) as u8).collect();
            let mut with_v = m.clone();
            with_v.push_row(&v);
            let by_rank = with_v.rank() == m.rank();
            prop_assert_eq!(m.row_member(&FpVector::new(p, v)).unwrap(), by_rank);
        }

        #[test]
        fn intersection_obeys_modular_law(
            (p, cols, rows) in matrix_strategy(),
            split in 0usize..7,
        ) {
            let split = split.min(rows.len());
            let a = FpMatrix::from_rows(p, cols, &rows[..split]).unwrap();
            let b = FpMatrix::from_rows(p, cols, &rows[split..]).unwrap();
            let i = a.row_space_intersection(&b).unwrap();
            let sum = a.stack(&b).unwrap().rank();
            prop_assert_eq!(i.rank() + sum, a.rank() + b.rank());
            let ea = a.echelon();
            let eb = b.echelon();
            for r in 0..i.rows() {
                prop_assert!(ea.contains(i.row(r)));
                prop_assert!(eb.contains(i.row(r)));
            }
        }
    }
}
