use std::collections::BTreeSet;
use std::sync::Arc;

use pgcodes::blocking::{companion_blocking_set, line_profile, linear_blocking_set, reconstruct_bset, PointSet};
use pgcodes::codes::Code;
use pgcodes::fplinalg::FpVector;
use pgcodes::gfq::{Field, FieldElement};
use pgcodes::projgeom::{ProjSpace, Spread, SpreadElement, Subspace};
use pgcodes::verify::companion_subspace;
use pgcodes::wsearch::{dual_support_search, enumerate_weights, Certificate, Checkpoint, SearchBudget};
use pgcodes::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FIELDS: [(u32, u32); 8] = [(2, 1), (3, 1), (5, 1), (2, 2), (2, 3), (3, 2), (2, 4), (5, 2)];
const SPACES: [(u32, u32, usize); 6] = [(2, 1, 2), (3, 1, 2), (2, 2, 2), (5, 1, 2), (2, 1, 3), (3, 1, 3)];

fn space(p: u32, h: u32, n: usize) -> Arc<ProjSpace> {
    Arc::new(ProjSpace::new(Arc::new(Field::new(p, h).unwrap()), n).unwrap())
}

fn theta(m: i64, q: u64) -> u64 {
    if m < 0 {
        0
    } else {
        (q.pow(m as u32 + 1) - 1) / (q - 1)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(i in 0..FIELDS.len(), a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let (p, h) = FIELDS[i];
        let f = Field::new(p, h).unwrap();
        let q = f.q();
        let (a, b, c) = (FieldElement(a % q), FieldElement(b % q), FieldElement(c % q));
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), FieldElement(0));
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        if a.is_zero() {
            prop_assert!(f.inv(a).is_err());
        } else {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement(1));
        }
        prop_assert_eq!(f.pow(a, q as u64), a);
        prop_assert_eq!(f.from_prime_vector(&f.to_prime_vector(a)).unwrap(), a);
    }

    #[test]
    fn point_index_round_trip(i in 0..SPACES.len(), seed in any::<u64>()) {
        let (p, h, n) = SPACES[i];
        let s = space(p, h, n);
        let q = s.q();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<FieldElement> = (0..=n).map(|_| FieldElement(rand::Rng::gen_range(&mut rng, 0..q))).collect();
        if v.iter().all(|x| x.is_zero()) {
            prop_assert!(s.index_of(&v).is_err());
        } else {
            let idx = s.index_of(&v).unwrap();
            let coords = s.point_coords(idx);
            let lead = coords.iter().position(|x| !x.is_zero()).unwrap();
            prop_assert_eq!(coords[lead], FieldElement(1));
            let scale = v[lead];
            let f = s.field();
            let scaled: Vec<FieldElement> = coords.iter().map(|&x| f.mul(x, scale)).collect();
            prop_assert_eq!(&scaled, &v);
            let lam = FieldElement(1 + rand::Rng::gen_range(&mut rng, 0..q - 1));
            let w: Vec<FieldElement> = v.iter().map(|&x| f.mul(x, lam)).collect();
            prop_assert_eq!(s.index_of(&w).unwrap(), idx);
        }
    }

    #[test]
    fn subspaces_have_theta_points(i in 0..SPACES.len(), seed in any::<u64>(), dim in 0usize..3) {
        let (p, h, n) = SPACES[i];
        let s = space(p, h, n);
        let dim = dim.min(n - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = s.random_subspace(dim, &mut rng);
        prop_assert_eq!(u.dim(), dim as i64);
        prop_assert_eq!(u.rank(), dim + 1);
        let pts = s.subspace_points(&u);
        prop_assert_eq!(pts.len() as u64, theta(dim as i64, s.q() as u64));
        let back = s.span(&pts).unwrap();
        prop_assert_eq!(&back, &u);
        for &x in &pts {
            prop_assert!(s.contains(&u, x).unwrap());
        }
    }

    #[test]
    fn point_set_line_counts(i in 0..SPACES.len(), seed in any::<u64>(), density in 1u32..10) {
        let (p, h, n) = SPACES[i];
        let s = space(p, h, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let members: Vec<usize> =
            (0..s.num_points()).filter(|_| rand::Rng::gen_range(&mut rng, 0..10) < density).collect();
        let b = PointSet::new(s.clone(), members.clone()).unwrap();
        let sizes = b.line_intersections();
        let q = s.q() as u64;
        let on_point = theta(n as i64 - 1, q);
        prop_assert_eq!(sizes.iter().sum::<usize>() as u64, members.len() as u64 * on_point);
        let lp = line_profile(&b, 1).unwrap();
        prop_assert!(lp.identities_hold());
        let back = PointSet::from_file_string(s.clone(), &b.to_file_string()).unwrap();
        prop_assert_eq!(back.members(), b.members());
        let ess = b.essential_points();
        prop_assert!(ess.members().iter().all(|&x| b.contains(x)));
        if b.is_blocking() {
            let order: Vec<usize> = b.members().iter().rev().copied().collect();
            let m = b.greedy_reduce(&order);
            prop_assert!(m.is_blocking() && m.is_minimal());
            prop_assert!(m.members().iter().all(|&x| b.contains(x)));
        }
    }

    #[test]
    fn codewords_are_orthogonal_to_the_dual(i in 0..SPACES.len(), seed in any::<u64>()) {
        let (p, h, n) = SPACES[i];
        let c = Code::build(n, Arc::new(Field::new(p, h).unwrap())).unwrap();
        let pp = c.p();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = FpVector::zero(pp, c.length());
        for r in 0..c.length() {
            let a = rand::Rng::gen_range(&mut rng, 0..pp);
            w = w.add(&c.hyperplane_vector(r).scale(a));
        }
        prop_assert!(c.contains(&w.entries));
        for d in c.dual_basis().row_vectors() {
            prop_assert_eq!(w.dot(&d), 0);
        }
        for hv in c.hull_basis().row_vectors() {
            prop_assert!(c.contains(&hv.entries) && c.in_dual(&hv.entries));
        }
    }

    #[test]
    fn linear_sets_are_one_mod_p(h in 2u32..4, seed in any::<u64>(), dim in 0usize..5) {
        let base = space(2, h, 2);
        let spread = Spread::field_reduce(base.clone()).unwrap();
        let amb = spread.ambient();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = amb.random_subspace(dim.min(amb.n() - 1), &mut rng);
        let b = spread.b_of(&u).unwrap();
        prop_assert_eq!(b.len() % 2, 1);
        let met: usize = spread.intersection_sizes(&u).unwrap().iter().map(|&(_, k)| k).sum();
        prop_assert_eq!(met, amb.subspace_points(&u).len());
    }
}

/// A random N-space `U` of the field-reduction space of PG(2,q), q = 2^h or 3^h,
/// with `B(U)` not a line, a hyperplane `U_(N-1)` of it, and the elements of
/// `B(U) \ B(U_(N-1))`.
struct Sample {
    spread: Spread,
    u_prev: Subspace,
    full: Vec<SpreadElement>,
    fresh: Vec<SpreadElement>,
}

fn sample(p: u32, h: u32, seed: u64) -> Option<Sample> {
    let base = space(p, h, 2);
    let spread = Spread::field_reduce(base.clone()).unwrap();
    let amb = spread.ambient();
    let big_n = h as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = amb.random_subspace(big_n, &mut rng);
    let u_prev = loop {
        let hyp = amb.random_subspace(amb.n() - 1, &mut rng);
        let m = amb.intersect(&u, &hyp).unwrap();
        if m.dim() == big_n as i64 - 1 {
            break m;
        }
    };
    let full = spread.b_of(&u).unwrap();
    let b = PointSet::new(base, full.iter().map(|e| e.0).collect()).unwrap();
    if b.is_hyperplane() {
        return None;
    }
    let prev = spread.b_of(&u_prev).unwrap();
    let fresh: Vec<SpreadElement> = full.iter().copied().filter(|e| !prev.contains(e)).collect();
    (fresh.len() >= 2).then_some(Sample { spread, u_prev, full, fresh })
}

/// `B(U')` for every N-space `U'` through `U_(N-1)` meeting `r1` and `r2`.
fn all_completions(s: &Sample, r1: SpreadElement, r2: SpreadElement) -> BTreeSet<Vec<SpreadElement>> {
    let amb = s.spread.ambient();
    s.spread
        .element_points(r1)
        .iter()
        .map(|&x| amb.join(&s.u_prev, &amb.span(&[x]).unwrap()).unwrap())
        .filter(|w| amb.intersect(w, s.spread.element_subspace(r2)).unwrap().dim() >= 0)
        .map(|w| s.spread.b_of(&w).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn baer_type_sets_are_rebuilt_from_two_elements(seed in any::<u64>()) {
        let s = sample(3, 2, seed);
        prop_assume!(s.is_some());
        let s = s.unwrap();
        let rebuilt = reconstruct_bset(&s.u_prev, s.fresh[0], s.fresh[1], &s.spread).unwrap();
        prop_assert_eq!(&rebuilt, &s.full);
        let last = *s.fresh.last().unwrap();
        if last != s.fresh[1] {
            let other = reconstruct_bset(&s.u_prev, last, s.fresh[0], &s.spread).unwrap();
            prop_assert_eq!(&other, &s.full);
        }
    }

    #[test]
    fn rebuild_succeeds_exactly_when_the_completion_is_unique(seed in any::<u64>()) {
        // PG(2,8): N = 3 inside PG(8,2).
        let s = sample(2, 3, seed);
        prop_assume!(s.is_some());
        let s = s.unwrap();
        let (r1, r2) = (s.fresh[0], s.fresh[1]);
        let completions = all_completions(&s, r1, r2);
        prop_assert!(completions.contains(&s.full));
        match reconstruct_bset(&s.u_prev, r1, r2, &s.spread) {
            Ok(rebuilt) => {
                prop_assert_eq!(completions.len(), 1);
                prop_assert_eq!(&rebuilt, &s.full);
            }
            Err(Error::InconsistentInput(_)) => prop_assert!(completions.len() > 1),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}

#[test]
fn two_elements_do_not_always_determine_the_set() {
    let (seed, s) = (0..64)
        .find_map(|seed| {
            let s = sample(2, 3, seed)?;
            (all_completions(&s, s.fresh[0], s.fresh[1]).len() > 1).then_some((seed, s))
        })
        .expect("a PG(2,8) sample with several completions");
    let completions = all_completions(&s, s.fresh[0], s.fresh[1]);
    assert!(completions.len() > 1, "seed {seed}");
    for c in &completions {
        assert!(c.contains(&s.fresh[0]) && c.contains(&s.fresh[1]));
        assert_eq!(c.len() % 2, 1);
    }
    assert!(matches!(reconstruct_bset(&s.u_prev, s.fresh[0], s.fresh[1], &s.spread), Err(Error::InconsistentInput(_))));
}

#[test]
fn companion_exists_in_pg_2_8() {
    let base = space(2, 3, 2);
    let spread = Spread::field_reduce(base.clone()).unwrap();
    let u = companion_subspace(&spread).unwrap();
    let b = linear_blocking_set(&u, &spread).unwrap();
    let comp = companion_blocking_set(&u, &spread).unwrap();
    assert_eq!(comp.intersection_size % 2, 0);
    assert!(comp.rejected_choices > 0);
    let c = Code::from_space(base).unwrap();
    assert!(!c.row_member(&b.indicator(2, 1)).unwrap());
}

#[test]
fn theta_and_counts() {
    for (p, h, n) in SPACES {
        let s = space(p, h, n);
        let q = s.q() as u64;
        for m in 0..=n as i64 {
            assert_eq!(s.theta(m), theta(m, q));
        }
        assert_eq!(s.num_points() as u64, theta(n as i64, q));
        assert_eq!(s.enumerate_hyperplanes().len(), s.num_points());
        for row in s.hyperplane_points() {
            assert_eq!(row.len() as u64, theta(n as i64 - 1, q));
        }
    }
}

#[test]
fn spread_spans_are_partitioned() {
    for (p, h) in [(2, 2), (3, 2), (2, 3)] {
        let base = space(p, h, 2);
        let spread = Spread::field_reduce(base.clone()).unwrap();
        let amb = spread.ambient();
        let q = base.q() as usize;
        assert_eq!(spread.len(), base.num_points());
        let mut hit = vec![0; amb.num_points()];
        for e in 0..spread.len() {
            for &x in spread.element_points(SpreadElement(e)) {
                hit[x] += 1;
                assert_eq!(spread.element_of(x), SpreadElement(e));
            }
        }
        assert!(hit.iter().all(|&c| c == 1));
        for (a, b) in [(0, 1), (1, spread.len() - 1), (2, 5)] {
            let span =
                amb.join(spread.element_subspace(SpreadElement(a)), spread.element_subspace(SpreadElement(b))).unwrap();
            let inside = spread.spread_elements_in_span(SpreadElement(a), SpreadElement(b)).unwrap();
            assert_eq!(inside.len(), q + 1);
            let covered: usize = inside.iter().map(|&e| spread.element_points(e).len()).sum();
            assert_eq!(covered, amb.subspace_points(&span).len());
        }
    }
}

#[test]
fn enumeration_refuses_over_budget() {
    let c = Code::build(2, Arc::new(Field::new(3, 1).unwrap())).unwrap();
    let tight = SearchBudget { max_enumeration: 100, ..SearchBudget::default() };
    assert!(matches!(enumerate_weights(&c.basis(), &tight), Err(Error::BudgetExceeded(_))));
    let zero = SearchBudget { max_support: 0, ..SearchBudget::default() };
    assert!(zero.validate().is_err());
}

#[test]
fn certificates_round_trip() {
    let v = FpVector::new(3, vec![0, 1, 2, 0, 2, 1]);
    let c = Certificate::new(&v, "test");
    assert_eq!(c.weight, 4);
    assert_eq!(c.vector().unwrap(), v);
    assert_eq!(FpVector::from_file_string(&v.to_file_string()).unwrap(), v);
}

#[test]
fn dual_search_resumes_from_checkpoint() {
    let s = space(3, 1, 2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ck.json");
    let budget = SearchBudget::default().with_workers(2);
    let full = dual_support_search(&s, 7, 12, &budget, Some(&path)).unwrap();
    let best = full.best.clone().unwrap();
    assert_eq!(best.weight(), 6);
    let saved: Checkpoint = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(saved.next_root, s.num_points());
    assert!(saved.complete);

    let partial = Checkpoint { next_root: 4, nodes: 0, ..saved.clone() };
    std::fs::write(&path, serde_json::to_string(&partial).unwrap()).unwrap();
    let resumed = dual_support_search(&s, 7, 12, &budget, Some(&path)).unwrap();
    assert_eq!(resumed.best, full.best);
    assert!(resumed.complete);

    let other = dual_support_search(&s, 8, 12, &budget, Some(&path));
    assert!(matches!(other, Err(Error::InconsistentInput(_))));
}
