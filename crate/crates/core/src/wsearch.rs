//! Minimum-weight and weight-gap searches over C, its dual and its hull, plus
//! the subset scans used for the brute-force lemma checks.
//!
//! All parallel work is split into chunks whose results are merged in a fixed
//! order, so reports never depend on the worker count.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocking::{redei_blocking_set, redei_dual_word, sachar_bounds, Rational};
use crate::codes::Code;
use crate::error::{Error, Result};
use crate::fplinalg::{Fp, FpMatrix, FpVector};
use crate::gfq::{prime_power, Field};
use crate::projgeom::ProjSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Largest number of codewords a full enumeration may visit.
    pub max_enumeration: u64,
    /// Largest support size examined by the dual search.
    pub max_support: usize,
    /// Node limit per root of the dual search.
    pub max_combinations: u64,
    /// Not part of any report: results are identical for every worker count.
    #[serde(skip, default = "default_workers")]
    pub workers: usize,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_enumeration: 2_000_000,
            max_support: 64,
            max_combinations: 100_000_000,
            workers: default_workers(),
        }
    }
}

impl SearchBudget {
    pub fn with_workers(mut self, workers: usize) -> SearchBudget {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_enumeration == 0 || self.max_support == 0 || self.max_combinations == 0 || self.workers == 0 {
            return Err(Error::PreconditionFailed("budget fields must be positive".into()));
        }
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        self.validate()?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::PreconditionFailed(e.to_string()))
    }
}

/// An explicit word backing a reported weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub weight: usize,
    pub p: u8,
    /// Symbols in point order, one base-36 digit each.
    pub word: String,
    pub note: String,
}

impl Certificate {
    pub fn new(v: &FpVector, note: impl Into<String>) -> Certificate {
        Certificate { weight: v.weight(), p: v.p, word: v.digit_string(), note: note.into() }
    }

    pub fn vector(&self) -> Result<FpVector> {
        FpVector::from_file_string(&format!("{} {}\n{}\n", self.p, self.word.len(), self.word))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightReport {
    pub space: String,
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram: Option<BTreeMap<usize, u64>>,
    pub min: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_count: Option<u64>,
    /// Whether every minimum word has the predicted shape; `None` if not checked.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure_verified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub present: Option<Vec<usize>>,
    pub certificates: Vec<Certificate>,
    pub exhaustive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<u64>,
    pub budget: SearchBudget,
    #[serde(skip)]
    pub runtime_ms: u128,
}

impl WeightReport {
    fn new(space: String, mode: &str, budget: &SearchBudget) -> WeightReport {
        WeightReport {
            space,
            mode: mode.into(),
            histogram: None,
            min: None,
            min_count: None,
            structure_verified: None,
            interval: None,
            present: None,
            certificates: Vec::new(),
            exhaustive: false,
            nodes: None,
            budget: *budget,
            runtime_ms: 0,
        }
    }

    /// Report plus a separate timing object.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "report": self,
            "timing": { "runtime_ms": self.runtime_ms as u64 },
        })
    }
}

fn space_label(space: &ProjSpace) -> String {
    format!("PG({},{})", space.n(), space.q())
}

/// Number of words spanned by `rank` rows over F_p, if within the budget.
fn word_count(p: u8, rank: usize, budget: &SearchBudget) -> Result<u64> {
    (p as u64).checked_pow(rank as u32).filter(|&c| c <= budget.max_enumeration).ok_or_else(|| {
        Error::BudgetExceeded(format!("{p}^{rank} words exceed max_enumeration = {}", budget.max_enumeration))
    })
}

/// Folds over every F_p-combination of the rows of `basis`. Word `i` has
/// coefficient `(i / p^j) mod p` on row `j`. Chunks are visited in parallel and
/// merged in index order.
pub fn fold_codewords<T, I, F, M>(basis: &FpMatrix, budget: &SearchBudget, init: I, visit: F, merge: M) -> Result<T>
where
    T: Send,
    I: Fn() -> T + Sync,
    F: Fn(&mut T, u64, &[u8]) + Sync,
    M: Fn(T, T) -> T,
{
    let p = basis.p();
    let rank = basis.rows();
    word_count(p, rank, budget)?;
    let fp = Fp::new(p);
    let mut high = 0;
    while high < rank && (p as u64).pow(high as u32 + 1) <= 1024 {
        high += 1;
    }
    let low = rank - high;
    let chunks = (p as u64).pow(high as u32);
    let per_chunk = (p as u64).pow(low as u32);
    let pool = budget.pool()?;
    let parts: Vec<T> = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = init();
                let mut v = vec![0u8; basis.cols()];
                let mut rest = c;
                for j in 0..high {
                    let d = (rest % p as u64) as u8;
                    rest /= p as u64;
                    if d != 0 {
                        fp.axpy(&mut v, d, basis.row(low + j));
                    }
                }
                let mut digits = vec![0u8; low];
                let mut idx = c * per_chunk;
                loop {
                    visit(&mut acc, idx, &v);
                    let mut i = 0;
                    loop {
                        if i == low {
                            return acc;
                        }
                        fp.axpy(&mut v, 1, basis.row(i));
                        digits[i] += 1;
                        if digits[i] == p {
                            digits[i] = 0;
                            i += 1;
                        } else {
                            break;
                        }
                    }
                    idx += 1;
                }
            })
            .collect()
    });
    let mut it = parts.into_iter();
    let first = it.next().expect("at least one chunk");
    Ok(it.fold(first, merge))
}

struct Tally {
    hist: Vec<u64>,
    first: Vec<Option<Vec<u8>>>,
}

fn weight_of(v: &[u8]) -> usize {
    v.iter().filter(|&&x| x != 0).count()
}

/// Full weight enumerator of the row space of `basis`.
pub fn enumerate_weights(basis: &FpMatrix, budget: &SearchBudget) -> Result<WeightReport> {
    let start = Instant::now();
    let len = basis.cols();
    let tally = fold_codewords(
        basis,
        budget,
        || Tally { hist: vec![0; len + 1], first: vec![None; len + 1] },
        |t, _, v| {
            let w = weight_of(v);
            t.hist[w] += 1;
            if t.first[w].is_none() {
                t.first[w] = Some(v.to_vec());
            }
        },
        |mut a, b| {
            for w in 0..=len {
                a.hist[w] += b.hist[w];
                if a.first[w].is_none() {
                    a.first[w] = b.first[w].clone();
                }
            }
            a
        },
    )?;
    let mut report = WeightReport::new(format!("length {len}"), "enumerate", budget);
    let histogram: BTreeMap<usize, u64> =
        tally.hist.iter().enumerate().filter(|(_, &c)| c > 0).map(|(w, &c)| (w, c)).collect();
    report.min = histogram.keys().copied().find(|&w| w > 0);
    report.certificates = tally
        .first
        .iter()
        .enumerate()
        .skip(1)
        .filter_map(|(w, v)| {
            v.as_ref()
                .map(|v| Certificate::new(&FpVector::new(basis.p(), v.clone()), format!("first word of weight {w}")))
        })
        .collect();
    report.histogram = Some(histogram);
    report.exhaustive = true;
    report.runtime_ms = start.elapsed().as_millis();
    Ok(report)
}

/// Every word of the given weight, in enumeration order.
pub fn words_of_weight(basis: &FpMatrix, weight: usize, budget: &SearchBudget) -> Result<Vec<FpVector>> {
    let p = basis.p();
    fold_codewords(
        basis,
        budget,
        Vec::new,
        |acc: &mut Vec<FpVector>, _, v| {
            if weight_of(v) == weight {
                acc.push(FpVector::new(p, v.to_vec()));
            }
        },
        |mut a, b| {
            a.extend(b);
            a
        },
    )
}

/// Re-checks a certificate against C: row-space membership and weight recount.
pub fn verify_code_certificate(code: &Code, cert: &Certificate) -> Result<bool> {
    let v = cert.vector()?;
    Ok(code.row_member(&v)? && v.weight() == cert.weight)
}

/// Re-checks a certificate against the dual: orthogonal to every hyperplane,
/// nonzero, weight recount.
pub fn verify_dual_certificate(space: &ProjSpace, cert: &Certificate) -> Result<bool> {
    let v = cert.vector()?;
    if v.len() != space.num_points() {
        return Ok(false);
    }
    let fp = Fp::new(v.p);
    let orth = space.hyperplane_points().iter().all(|h| h.iter().fold(0u8, |a, &i| fp.add(a, v.entries[i])) == 0);
    Ok(orth && !v.is_zero() && v.weight() == cert.weight)
}

/// Weight enumerator of C with the minimum words checked to be scalar multiples
/// of hyperplanes.
pub fn code_min_weight(code: &Code, budget: &SearchBudget) -> Result<WeightReport> {
    let start = Instant::now();
    let mut report = enumerate_weights(&code.basis(), budget)?;
    report.space = space_label(code.space());
    report.mode = "min-weight".into();
    if let Some(min) = report.min {
        let words = words_of_weight(&code.basis(), min, budget)?;
        let fp = code.fp();
        let multiples: HashSet<FpVector> = (0..code.length())
            .flat_map(|h| {
                let hv = code.hyperplane_vector(h);
                (1..code.p()).map(move |a| hv.scale(a))
            })
            .collect();
        let _ = fp;
        report.min_count = Some(words.len() as u64);
        report.structure_verified = Some(words.len() == multiples.len() && words.iter().all(|w| multiples.contains(w)));
    }
    report.runtime_ms = start.elapsed().as_millis();
    Ok(report)
}

/// Weights of C strictly inside `]lo, hi[`, by full enumeration.
pub fn gap_scan(code: &Code, lo: usize, hi: usize, budget: &SearchBudget) -> Result<WeightReport> {
    let start = Instant::now();
    let mut report = enumerate_weights(&code.basis(), budget)?;
    report.space = space_label(code.space());
    report.mode = "gap-scan".into();
    let present: Vec<usize> =
        report.histogram.as_ref().unwrap().keys().copied().filter(|&w| lo < w && w < hi).collect();
    report.certificates.retain(|c| present.contains(&c.weight));
    report.interval = Some((lo, hi));
    report.present = Some(present);
    report.runtime_ms = start.elapsed().as_millis();
    Ok(report)
}

/// Minimum weight of C ∩ C⊥ by enumeration. For q prime every minimum word is
/// checked to be `α(H_i - H_j)`.
pub fn hull_min_weight(code: &Code, budget: &SearchBudget) -> Result<WeightReport> {
    let start = Instant::now();
    let hull = code.hull_basis().clone();
    let mut report = enumerate_weights(&hull, budget)?;
    report.space = space_label(code.space());
    report.mode = "hull-min-weight".into();
    if let Some(min) = report.min {
        let words = words_of_weight(&hull, min, budget)?;
        report.min_count = Some(words.len() as u64);
        if code.space().field().is_prime_field() {
            let np = code.length();
            let mut diffs = HashSet::new();
            for i in 0..np {
                let hi = code.hyperplane_vector(i);
                for j in 0..np {
                    if i != j {
                        let d = hi.sub(&code.hyperplane_vector(j));
                        for a in 1..code.p() {
                            diffs.insert(d.scale(a));
                        }
                    }
                }
            }
            report.structure_verified = Some(words.len() == diffs.len() && words.iter().all(|w| diffs.contains(w)));
        }
    }
    report.runtime_ms = start.elapsed().as_millis();
    Ok(report)
}

/// Points and blocks (hyperplanes) of a space as bitmasks; at most 128 points.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub num_points: usize,
    pub p: u8,
    pub blocks: Vec<Vec<usize>>,
    pub masks: Vec<u128>,
}

impl BlockSystem {
    pub fn hyperplanes(space: &ProjSpace) -> Result<BlockSystem> {
        let num_points = space.num_points();
        if num_points > 128 {
            return Err(Error::BudgetExceeded(format!("{num_points} points exceed the 128-point support search")));
        }
        let blocks = space.hyperplane_points().to_vec();
        let masks = blocks.iter().map(|b| b.iter().fold(0u128, |m, &i| m | (1u128 << i))).collect();
        Ok(BlockSystem { num_points, p: space.p() as u8, blocks, masks })
    }

    fn is_dual(&self, v: &[u8]) -> bool {
        let fp = Fp::new(self.p);
        self.blocks.iter().all(|b| b.iter().fold(0u8, |a, &i| fp.add(a, v[i])) == 0)
    }

    /// Lightest nonzero word with support inside `s` orthogonal to every block.
    fn lightest_in(&self, s: u128) -> Option<FpVector> {
        let members: Vec<usize> = (0..self.num_points).filter(|&i| s >> i & 1 == 1).collect();
        let mut m = FpMatrix::zeros(self.p, 0, members.len());
        for (b, &mask) in self.masks.iter().enumerate() {
            if mask & s != 0 {
                let row: Vec<u8> = members.iter().map(|i| u8::from(self.blocks[b].binary_search(i).is_ok())).collect();
                m.push_row(&row);
            }
        }
        let kernel = m.null_basis();
        if kernel.rows() == 0 {
            return None;
        }
        let spread = |local: &[u8]| {
            let mut full = vec![0u8; self.num_points];
            for (k, &i) in members.iter().enumerate() {
                full[i] = local[k];
            }
            FpVector::new(self.p, full)
        };
        let small = (self.p as u64).checked_pow(kernel.rows() as u32).is_some_and(|c| c <= 4096);
        let mut best: Option<FpVector> = None;
        let mut consider = |v: &[u8]| {
            let w = weight_of(v);
            if w > 0 && best.as_ref().is_none_or(|b| w < b.weight()) {
                best = Some(spread(v));
            }
        };
        if small {
            let mut tmp = SearchBudget::default().with_workers(1);
            tmp.max_enumeration = 4096;
            let words = fold_codewords(
                &kernel,
                &tmp,
                Vec::new,
                |acc: &mut Vec<Vec<u8>>, _, v| acc.push(v.to_vec()),
                |mut a, b| {
                    a.extend(b);
                    a
                },
            )
            .expect("kernel enumeration within its own budget");
            for w in &words {
                consider(w);
            }
        } else {
            for r in 0..kernel.rows() {
                consider(kernel.row(r));
            }
        }
        best
    }
}

#[derive(Debug, Clone)]
struct RootResult {
    best: Option<FpVector>,
    nodes: u64,
    complete: bool,
}

struct RootSearch<'a> {
    sys: &'a BlockSystem,
    allowed: u128,
    cap: usize,
    limit: u64,
    nodes: u64,
    aborted: bool,
    best_weight: usize,
    best: Option<FpVector>,
    seen: HashSet<u128>,
}

impl RootSearch<'_> {
    fn visit(&mut self, s: u128) {
        if self.aborted {
            return;
        }
        if !self.seen.insert(s) {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.limit {
            self.aborted = true;
            return;
        }
        let size = s.count_ones() as usize;
        let mut branch: Option<u128> = None;
        for &mask in &self.sys.masks {
            if (mask & s).count_ones() == 1 {
                let cand = mask & !s & self.allowed;
                if cand == 0 {
                    return;
                }
                if branch.is_none_or(|b| cand.count_ones() < b.count_ones()) {
                    branch = Some(cand);
                }
            }
        }
        let grow = size + 1 < self.best_weight && size < self.cap;
        match branch {
            Some(cand) => {
                if grow {
                    self.each(s, cand);
                }
            }
            None => {
                if let Some(v) = self.sys.lightest_in(s) {
                    if v.weight() < self.best_weight {
                        self.best_weight = v.weight();
                        self.best = Some(v);
                    }
                }
                if size + 1 < self.best_weight && size < self.cap {
                    self.each(s, self.allowed & !s);
                }
            }
        }
    }

    fn each(&mut self, s: u128, mut cand: u128) {
        while cand != 0 {
            let bit = cand & cand.wrapping_neg();
            cand &= !bit;
            self.visit(s | bit);
            if self.aborted {
                return;
            }
        }
    }
}

impl<'a> RootSearch<'a> {
    fn run(sys: &'a BlockSystem, root: usize, below: usize, cap: usize, limit: u64) -> RootResult {
        let allowed = if root + 1 >= 128 { 0 } else { (!0u128 << (root + 1)) & mask_upto(sys.num_points) };
        let mut st = RootSearch {
            sys,
            allowed,
            cap,
            limit,
            nodes: 0,
            aborted: false,
            best_weight: below,
            best: None,
            seen: HashSet::new(),
        };
        st.visit(1u128 << root);
        RootResult { best: st.best, nodes: st.nodes, complete: !st.aborted }
    }
}

fn mask_upto(n: usize) -> u128 {
    if n >= 128 {
        !0
    } else {
        (1u128 << n) - 1
    }
}

/// Resumable state of a dual search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub space: String,
    pub below: usize,
    pub cap: usize,
    pub next_root: usize,
    pub best: Option<Certificate>,
    pub nodes: u64,
    pub complete: bool,
}

/// Outcome of [`dual_support_search`].
#[derive(Debug, Clone)]
pub struct DualSearch {
    /// Lightest dual word of weight below the requested bound, if any.
    pub best: Option<FpVector>,
    /// Every root finished within its node budget.
    pub complete: bool,
    pub nodes: u64,
}

/// Searches for nonzero dual words of weight `< below` with support of size at
/// most `cap`.
///
/// One independent search per root point `r`, over supports whose least point
/// is `r`. A node is a set S of points forced into the support. If some block
/// meets S in exactly one point, the support must contain another point of that
/// block, so the search branches over the block's admissible points (choosing
/// the block with fewest). If no block is tangent, the words supported inside S
/// are read off the null space of the restricted incidence matrix, and then the
/// search branches over all admissible points. Roots never share bounds, which
/// keeps each root's result independent of scheduling.
pub fn dual_support_search(
    space: &ProjSpace,
    below: usize,
    cap: usize,
    budget: &SearchBudget,
    checkpoint: Option<&Path>,
) -> Result<DualSearch> {
    let sys = BlockSystem::hyperplanes(space)?;
    let label = space_label(space);
    let mut state = Checkpoint { space: label.clone(), below, cap, next_root: 0, best: None, nodes: 0, complete: true };
    if let Some(path) = checkpoint {
        if path.exists() {
            let text = std::fs::read_to_string(path)?;
            let saved: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            if saved.space != label || saved.below != below || saved.cap != cap {
                return Err(Error::InconsistentInput(format!(
                    "checkpoint for {} below {} cap {} does not match this search",
                    saved.space, saved.below, saved.cap
                )));
            }
            state = saved;
        }
    }
    let pool = budget.pool()?;
    let batch = budget.workers.max(1);
    while state.next_root < sys.num_points {
        let end = (state.next_root + batch).min(sys.num_points);
        let results: Vec<RootResult> = pool.install(|| {
            (state.next_root..end)
                .into_par_iter()
                .map(|r| RootSearch::run(&sys, r, below, cap, budget.max_combinations))
                .collect()
        });
        for res in results {
            state.nodes += res.nodes;
            state.complete &= res.complete;
            if let Some(v) = res.best {
                if state.best.as_ref().is_none_or(|b| v.weight() < b.weight) {
                    state.best = Some(Certificate::new(&v, "dual support search"));
                }
            }
        }
        state.next_root = end;
        if let Some(path) = checkpoint {
            let text = serde_json::to_string_pretty(&state).expect("checkpoint serializes");
            std::fs::write(path, text)?;
        }
    }
    let best = state.best.as_ref().map(|c| c.vector()).transpose()?;
    if let Some(v) = &best {
        if !sys.is_dual(&v.entries) {
            return Err(Error::AssertionFailed(format!("search word {} not in the dual", v.digit_string())));
        }
    }
    Ok(DualSearch { best, complete: state.complete, nodes: state.nodes })
}

/// `c_L0 - c_L1` in PG(2,q): a dual word of weight 2q.
pub fn line_difference(plane: &ProjSpace) -> FpVector {
    let p = plane.p() as u8;
    let np = plane.num_points();
    let h = plane.hyperplane_points();
    let a = FpVector::indicator(p, np, &h[0], 1);
    let b = FpVector::indicator(p, np, &h[1], 1);
    a.sub(&b)
}

/// Minimum weight of the dual code of PG(n,q). The plane is searched
/// exhaustively below the line-difference weight 2q; for n >= 3 the plane
/// certificate is embedded in a plane of PG(n,q) and a bounded search in
/// PG(n,q) looks for anything lighter.
pub fn dual_min_weight(
    field: Arc<Field>,
    n: usize,
    budget: &SearchBudget,
    checkpoint: Option<&Path>,
) -> Result<WeightReport> {
    let start = Instant::now();
    if n < 2 {
        return Err(Error::DimensionMismatch("dual search needs n >= 2".into()));
    }
    let plane = Arc::new(ProjSpace::new(field.clone(), 2)?);
    let q = plane.q() as usize;
    let mut best = line_difference(&plane);
    let mut note = "difference of two lines".to_string();
    let plane_ckpt = checkpoint.map(|p| p.with_extension("plane.json"));
    let search = dual_support_search(&plane, best.weight(), budget.max_support, budget, plane_ckpt.as_deref())?;
    if let Some(v) = search.best {
        best = v;
        note = "dual support search".into();
    }
    let d = best.weight();
    let plane_exhaustive = search.complete && budget.max_support + 1 >= d;
    let mut report = WeightReport::new(format!("PG({n},{q})"), "dual-min-weight", budget);
    let mut nodes = search.nodes;
    let mut exhaustive = plane_exhaustive;
    if n == 2 {
        report.certificates.push(Certificate::new(&best, note));
    } else {
        let code = Code::build(n, field)?;
        let pi = code.space().enumerate_subspaces(2).into_iter().next().expect("a plane exists");
        let embedded = code.embed_planar_dual_word(&best, &pi)?;
        if !code.in_dual(&embedded.entries) {
            return Err(Error::AssertionFailed("embedded plane word is not in the dual".into()));
        }
        report.certificates.push(Certificate::new(&embedded, format!("plane word ({note}) embedded in a plane")));
        report.certificates.push(Certificate::new(&best, format!("plane word: {note}")));
        let ckpt = checkpoint.map(|p| p.with_extension("space.json"));
        match dual_support_search(code.space(), d, budget.max_support, budget, ckpt.as_deref()) {
            Ok(s) => {
                nodes += s.nodes;
                if let Some(v) = s.best {
                    return Err(Error::AssertionFailed(format!(
                        "PG({n},{q}) dual word {} lighter than the plane minimum {d}",
                        v.digit_string()
                    )));
                }
                exhaustive &= s.complete && budget.max_support + 1 >= d;
            }
            Err(Error::BudgetExceeded(_)) => exhaustive = false,
            Err(e) => return Err(e),
        }
    }
    report.min = Some(d);
    report.exhaustive = exhaustive;
    report.nodes = Some(nodes);
    report.runtime_ms = start.elapsed().as_millis();
    Ok(report)
}

/// Folds over every subset of `num_points` points (as bitmasks), split by the
/// top bits and merged in order.
pub fn subset_scan<T, I, F, M>(num_points: usize, budget: &SearchBudget, init: I, visit: F, merge: M) -> Result<T>
where
    T: Send,
    I: Fn() -> T + Sync,
    F: Fn(&mut T, u64) + Sync,
    M: Fn(T, T) -> T,
{
    if num_points > 21 {
        return Err(Error::BudgetExceeded(format!("2^{num_points} subsets exceed 2^21")));
    }
    let top = num_points.min(8);
    let low = num_points - top;
    let pool = budget.pool()?;
    let parts: Vec<T> = pool.install(|| {
        (0u64..1 << top)
            .into_par_iter()
            .map(|hi| {
                let mut acc = init();
                for lo in 0u64..1 << low {
                    visit(&mut acc, hi << low | lo);
                }
                acc
            })
            .collect()
    });
    let mut it = parts.into_iter();
    let first = it.next().expect("at least one chunk");
    Ok(it.fold(first, merge))
}

/// Lines and hyperplanes of a small space as `u64` masks, for subset scans.
#[derive(Debug, Clone)]
pub struct MaskGeometry {
    pub num_points: usize,
    pub q: u64,
    pub n: usize,
    pub lines: Vec<u64>,
    pub point_lines: Vec<Vec<usize>>,
    pub hyperplanes: Vec<u64>,
}

impl MaskGeometry {
    pub fn new(space: &ProjSpace) -> Result<MaskGeometry> {
        let num_points = space.num_points();
        if num_points > 64 {
            return Err(Error::BudgetExceeded(format!("{num_points} points exceed 64")));
        }
        let to_mask = |pts: &Vec<usize>| pts.iter().fold(0u64, |m, &i| m | 1 << i);
        Ok(MaskGeometry {
            num_points,
            q: space.q() as u64,
            n: space.n(),
            lines: space.lines().iter().map(to_mask).collect(),
            point_lines: space.point_lines().to_vec(),
            hyperplanes: space.hyperplane_points().iter().map(to_mask).collect(),
        })
    }

    pub fn is_blocking(&self, b: u64) -> bool {
        self.lines.iter().all(|&l| l & b != 0)
    }

    pub fn tangents_at(&self, b: u64, point: usize) -> usize {
        self.point_lines[point].iter().filter(|&&l| (self.lines[l] & b).count_ones() == 1).count()
    }

    pub fn essential(&self, b: u64) -> u64 {
        let mut out = 0;
        for l in &self.lines {
            if (l & b).count_ones() == 1 {
                out |= l & b;
            }
        }
        out
    }

    pub fn is_minimal(&self, b: u64) -> bool {
        self.is_blocking(b) && self.essential(b) == b
    }

    pub fn is_hyperplane(&self, b: u64) -> bool {
        self.hyperplanes.contains(&b)
    }

    /// Every line meets `b` in 1 (mod m) points.
    pub fn one_mod(&self, b: u64, m: u32) -> bool {
        self.lines.iter().all(|&l| (l & b).count_ones() % m == 1 % m)
    }

    /// Points of `b` all of whose lines are tangents or contained in `b`.
    pub fn full_line_points(&self, b: u64) -> u64 {
        let full = self.q as u32 + 1;
        let mut out = 0;
        for i in 0..self.num_points {
            if b >> i & 1 == 1
                && self.point_lines[i].iter().all(|&l| {
                    let c = (self.lines[l] & b).count_ones();
                    c == 1 || c == full
                })
            {
                out |= 1 << i;
            }
        }
        out
    }

    pub fn secant_tangent_condition(&self, b: u64) -> bool {
        (0..self.num_points).filter(|&r| b >> r & 1 == 0).all(|r| {
            let mut secant = false;
            let mut tangent = false;
            for &l in &self.point_lines[r] {
                match (self.lines[l] & b).count_ones() {
                    1 => tangent = true,
                    0 => {}
                    _ => secant = true,
                }
            }
            !(secant && tangent)
        })
    }
}

/// One row of the dual minimum-weight table.
#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    pub q: u64,
    pub p: u64,
    pub h: u32,
    /// Which table row applies: `"p=2"`, `"h=1"`, `"p=7"`, `"p>7"`, or
    /// `"not tabulated"` for p in {3, 5} with h > 1.
    pub row: String,
    pub formula: String,
    pub lower: Rational,
    pub upper: Rational,
    pub exact: Option<u64>,
    /// `2q + 1 - (q-1)/(p-1)`, the weight of the Rédei-type word with e = 1.
    pub redei_weight: Rational,
    pub upper_certificate: Option<Certificate>,
    pub certificate_verified: Option<bool>,
    pub search_min: Option<usize>,
    pub search_exhaustive: Option<bool>,
    pub consistent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Report {
    pub rows: Vec<Table1Row>,
    /// The plane bound for p = 7 is `(12q+6)/7`; the bound for all n is `(12q+7)/7`.
    pub p7_plane_bound: String,
    pub p7_space_bound: String,
    /// Whether the two p = 7 values have equal ceilings for every listed q with p = 7.
    pub p7_ceilings_agree: bool,
    pub p7_values_differ: bool,
    pub consistent: bool,
}

pub const TABLE1_QS: [u64; 13] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25, 27, 49];

fn int(x: u64) -> Rational {
    Rational::from_integer(x as i128)
}

/// Reproduces the dual minimum-weight table for the given q, with Rédei-type
/// upper certificates where the field is available and optional search results
/// `q -> (min, exhaustive)`.
pub fn table1_report(qs: &[u64], searches: &BTreeMap<u64, (usize, bool)>) -> Result<Table1Report> {
    let mut rows = Vec::new();
    let mut p7_agree = true;
    let mut p7_differ = false;
    for &q in qs {
        let (p, h) =
            prime_power(q as u32).ok_or_else(|| Error::PreconditionFailed(format!("{q} is not a prime power")))?;
        let p = p as u64;
        let redei_weight = int(2 * q + 1) - int(q - 1) / int(p - 1);
        let (row, formula, lower, upper, exact) = if p == 2 {
            let d = (1u64 << h) + 2;
            ("p=2", "2^h+2".to_string(), int(d), int(d), Some(d))
        } else if h == 1 {
            ("h=1", "2p".to_string(), int(2 * p), int(2 * p), Some(2 * p))
        } else if p >= 7 {
            let b = sachar_bounds(p, q, 1)?;
            let lower = b.space_bound.expect("p >= 7");
            if p == 7 {
                let plane = b.plane_bound.expect("p = 7");
                p7_differ |= plane != lower;
                p7_agree &= plane.ceil() == lower.ceil();
                ("p=7", "(12q+7)/7 <= d <= 2q+1-(q-1)/(p-1)".to_string(), lower, redei_weight, None)
            } else {
                ("p>7", "(12q+18)/7 <= d <= 2q+1-(q-1)/(p-1)".to_string(), lower, redei_weight, None)
            }
        } else {
            ("not tabulated", "q+p <= d <= 2q+1-(q-1)/(p-1)".to_string(), int(q + p), redei_weight, None)
        };
        let (cert, verified) = match upper_certificate(p as u32, h) {
            Some((plane, v, note)) => {
                let c = Certificate::new(&v, note);
                let ok = verify_dual_certificate(&plane, &c)?;
                (Some(c), Some(ok))
            }
            None => (None, None),
        };
        let search = searches.get(&q).copied();
        let mut consistent = lower <= upper && verified != Some(false);
        if let Some(c) = &cert {
            let w = int(c.weight as u64);
            consistent &= lower <= w && w <= upper;
            if h > 1 {
                consistent &= w == redei_weight;
            }
        }
        if let Some((m, exh)) = search {
            let m = int(m as u64);
            consistent &= if exh { lower <= m && m <= upper } else { lower <= m };
            if let (Some(d), true) = (exact, exh) {
                consistent &= m == int(d);
            }
        }
        rows.push(Table1Row {
            q,
            p,
            h,
            row: row.into(),
            formula,
            lower,
            upper,
            exact,
            redei_weight,
            upper_certificate: cert,
            certificate_verified: verified,
            search_min: search.map(|s| s.0),
            search_exhaustive: search.map(|s| s.1),
            consistent,
        });
    }
    let consistent = rows.iter().all(|r| r.consistent);
    Ok(Table1Report {
        rows,
        p7_plane_bound: "(12q+6)/7".into(),
        p7_space_bound: "(12q+7)/7".into(),
        p7_ceilings_agree: p7_agree,
        p7_values_differ: p7_differ,
        consistent,
    })
}

/// Rédei-type word (e = 1) for h > 1, line difference for h = 1; `None` when
/// the field is not available.
fn upper_certificate(p: u32, h: u32) -> Option<(Arc<ProjSpace>, FpVector, String)> {
    let field = Arc::new(Field::new(p, h).ok()?);
    let plane = Arc::new(ProjSpace::new(field, 2).ok()?);
    if h == 1 {
        let v = line_difference(&plane);
        return Some((plane, v, "difference of two lines".into()));
    }
    let (b, l) = redei_blocking_set(plane.clone(), 1).ok()?;
    let w = redei_dual_word(&b, l).ok()?;
    Some((plane, w.vector, format!("Rédei-type set of size {} minus its secant line", b.len())))
}

/// Distinct weights of a report's histogram.
pub fn weights(report: &WeightReport) -> BTreeSet<usize> {
    report.histogram.as_ref().map(|h| h.keys().copied().collect()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(p: u32, h: u32, n: usize) -> Code {
        Code::build(n, Arc::new(Field::new(p, h).unwrap())).unwrap()
    }

    fn budget(workers: usize) -> SearchBudget {
        SearchBudget::default().with_workers(workers)
    }

    #[test]
    fn histograms() {
        let r = enumerate_weights(&code(2, 1, 2).basis(), &budget(2)).unwrap();
        let expect: BTreeMap<usize, u64> = [(0, 1), (3, 7), (4, 7), (7, 1)].into_iter().collect();
        assert_eq!(r.histogram.unwrap(), expect);
        let r = enumerate_weights(&code(2, 1, 3).basis(), &budget(3)).unwrap();
        let expect: BTreeMap<usize, u64> = [(0, 1), (7, 15), (8, 15), (15, 1)].into_iter().collect();
        assert_eq!(r.histogram.unwrap(), expect);
        let r = enumerate_weights(&code(3, 1, 2).basis(), &budget(4)).unwrap();
        let h = r.histogram.unwrap();
        assert_eq!(h.values().sum::<u64>(), 3u64.pow(7));
        assert!(!h.contains_key(&5));
    }

    #[test]
    fn enumeration_matches_naive_order() {
        // word i has coefficient (i / p^j) mod p on row j
        let c = code(3, 1, 2);
        let basis = c.basis();
        let fp = Fp::new(3);
        let words = fold_codewords(
            &basis,
            &budget(3),
            Vec::new,
            |a: &mut Vec<(u64, Vec<u8>)>, i, v| a.push((i, v.to_vec())),
            |mut a, b| {
                a.extend(b);
                a
            },
        )
        .unwrap();
        assert_eq!(words.len(), 2187);
        for (k, (i, v)) in words.iter().enumerate() {
            assert_eq!(*i, k as u64);
            let mut naive = vec![0u8; 13];
            let mut rest = *i;
            for j in 0..basis.rows() {
                fp.axpy(&mut naive, (rest % 3) as u8, basis.row(j));
                rest /= 3;
            }
            assert_eq!(&naive, v);
        }
    }

    #[test]
    fn budget_refusal() {
        let mut b = budget(1);
        b.max_enumeration = 100;
        assert!(matches!(enumerate_weights(&code(3, 1, 2).basis(), &b), Err(Error::BudgetExceeded(_))));
        b.max_combinations = 0;
        assert!(b.validate().is_err());
    }

    #[test]
    fn hull_minimum() {
        let r = hull_min_weight(&code(3, 1, 2), &budget(2)).unwrap();
        assert_eq!(r.min, Some(6));
        assert_eq!(r.min_count, Some(156));
        assert_eq!(r.structure_verified, Some(true));
        let r = hull_min_weight(&code(2, 2, 2), &budget(2)).unwrap();
        assert_eq!(r.min, Some(8));
        assert_eq!(r.structure_verified, None);
    }

    #[test]
    fn gaps() {
        let r = gap_scan(&code(3, 1, 2), 4, 6, &budget(2)).unwrap();
        assert_eq!(r.present, Some(vec![]));
        let r = gap_scan(&code(2, 2, 2), 5, 8, &budget(2)).unwrap();
        assert_eq!(r.present, Some(vec![]));
        let r = gap_scan(&code(2, 2, 2), 4, 9, &budget(2)).unwrap();
        assert_eq!(r.present, Some(vec![5, 8]));
        assert!(r.certificates.iter().all(|c| verify_code_certificate(&code(2, 2, 2), c).unwrap()));
    }

    #[test]
    fn code_minimum_is_hyperplanes() {
        for (p, h, n) in [(2, 1, 2), (3, 1, 2), (2, 1, 3)] {
            let c = code(p, h, n);
            let r = code_min_weight(&c, &budget(2)).unwrap();
            assert_eq!(r.min, Some(c.space().theta(n as i64 - 1) as usize));
            assert_eq!(r.structure_verified, Some(true));
        }
    }

    #[test]
    fn small_dual_minima() {
        for (p, h, d) in [(2, 1, 4), (3, 1, 6), (2, 2, 6)] {
            let f = Arc::new(Field::new(p, h).unwrap());
            let r = dual_min_weight(f.clone(), 2, &budget(3), None).unwrap();
            assert_eq!(r.min, Some(d));
            assert!(r.exhaustive);
            let plane = ProjSpace::new(f, 2).unwrap();
            assert!(verify_dual_certificate(&plane, &r.certificates[0]).unwrap());
        }
    }

    #[test]
    fn dual_search_is_worker_independent() {
        let f = Arc::new(Field::new(2, 2).unwrap());
        let a = dual_min_weight(f.clone(), 2, &budget(1), None).unwrap();
        let b = dual_min_weight(f, 2, &budget(5), None).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn node_budget_marks_incomplete() {
        let f = Arc::new(Field::new(3, 1).unwrap());
        let mut b = budget(2);
        b.max_combinations = 3;
        let r = dual_min_weight(f, 2, &b, None).unwrap();
        assert!(!r.exhaustive);
        assert_eq!(r.min, Some(6));
    }

    #[test]
    fn subset_scan_counts() {
        let total = subset_scan(13, &budget(3), || 0u64, |a, m| *a += m.count_ones() as u64, |a, b| a + b).unwrap();
        assert_eq!(total, 13 * (1 << 12));
        assert!(subset_scan(22, &budget(1), || 0, |_, _| {}, |a: u8, _| a).is_err());
    }

    #[test]
    fn table_rows() {
        let t = table1_report(&TABLE1_QS, &BTreeMap::new()).unwrap();
        assert!(t.consistent);
        let row = |q: u64| t.rows.iter().find(|r| r.q == q).unwrap();
        assert_eq!(row(8).exact, Some(10));
        assert_eq!(row(8).upper_certificate.as_ref().unwrap().weight, 10);
        assert_eq!(row(4).upper_certificate.as_ref().unwrap().weight, 6);
        assert_eq!(row(9).upper_certificate.as_ref().unwrap().weight, 15);
        assert_eq!(row(5).exact, Some(10));
        assert_eq!(row(49).lower, Rational::from_integer(85));
        assert!(t.p7_values_differ && t.p7_ceilings_agree);
    }
}
