//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! The pipeline cases (generic pfaffian and maximal-minor trims) are built
//! once and shared; their build times are recorded so the runtime budgets
//! can be asserted where they apply.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use trimcx::builders::{
    eagon_northcott, parse_skew_file, pfaffian_resolution, GenericMatrixSpec, SkewMatrix,
};
use trimcx::chain::BettiTable;
use trimcx::detfacet::{
    betti_multi_minor, betti_pfaffian_trim, betti_single_minor, clique_fvector_enumerate,
    clique_fvector_formula, explicit_q, l_set, rank_formula, Clutter, ExponentAlpha,
    FvectorConvention, IndexSet,
};
use trimcx::linalg::{rank_over_field, ScalarMatrix};
use trimcx::oracle::{
    colon_dim_by_rank, colon_slice, colon_slice_contained, ideal_dim_sparse, ideal_equal_upto,
    koszul_betti, IdealBasis, Multigrading,
};
use trimcx::ring::{poly_parse, CoefficientField, Polynomial, DEFAULT_PRIME};
use trimcx::trim::{lift_q, run_pipeline, LiftStrategy, TrimOutput, TrimSetup};

fn gf() -> CoefficientField {
    CoefficientField::prime_field(DEFAULT_PRIME).unwrap()
}

fn pass(criterion: u32, name: &str) {
    println!("ACCEPTANCE {criterion} ({name}): PASS");
}

struct Case {
    name: &'static str,
    setup: TrimSetup,
    out: TrimOutput,
    expected: BettiTable,
    grading: Option<Multigrading>,
    elapsed: Duration,
}

fn pfaffian_case(n: usize) -> Case {
    let start = Instant::now();
    let (_, x) = SkewMatrix::generic(n, gf());
    let f = pfaffian_resolution(&x).unwrap();
    let setup = TrimSetup::with_koszul_aux(f, &[1], None).unwrap();
    let out = run_pipeline(&setup, LiftStrategy::Auto).unwrap();
    Case {
        name: Box::leak(format!("pfaffian n={n}").into_boxed_str()),
        setup,
        out,
        expected: betti_pfaffian_trim(n).unwrap(),
        grading: Some(Multigrading::generic_skew(n)),
        elapsed: start.elapsed(),
    }
}

fn canonical_sigmas(n: usize, r: usize) -> Vec<IndexSet> {
    (0..r)
        .map(|k| IndexSet::new(((k * n + 1)..=(k * n + n)).collect()).unwrap())
        .collect()
}

fn minors_case(n: usize, m: usize, r: usize) -> Case {
    let start = Instant::now();
    let (_, spec) = GenericMatrixSpec::generic(n, m, gf()).unwrap();
    let en = eagon_northcott(&spec).unwrap();
    let sigmas = canonical_sigmas(n, r);
    // marked columns: positions of the sigma subsets in the lex basis order
    let all = trimcx::builders::subsets_lex(m, n);
    let summands: Vec<usize> = sigmas
        .iter()
        .map(|s| {
            let zero: Vec<usize> = s.indices().iter().map(|&v| v - 1).collect();
            all.iter().position(|t| *t == zero).unwrap() + 1
        })
        .collect();
    let setup = TrimSetup::with_koszul_aux(en, &summands, None).unwrap();
    let out = run_pipeline(&setup, LiftStrategy::Auto).unwrap();
    let expected = betti_multi_minor(n, m, &sigmas).unwrap();
    Case {
        name: Box::leak(format!("minors n={n} m={m} r={r}").into_boxed_str()),
        setup,
        out,
        expected,
        grading: Some(Multigrading::generic_matrix(n, m)),
        elapsed: start.elapsed(),
    }
}

fn cases() -> &'static Vec<Case> {
    static CASES: OnceLock<Vec<Case>> = OnceLock::new();
    CASES.get_or_init(|| {
        vec![
            pfaffian_case(5),
            pfaffian_case(7),
            pfaffian_case(9),
            minors_case(2, 3, 1),
            minors_case(2, 4, 1),
            minors_case(3, 4, 1),
            minors_case(2, 5, 1),
            minors_case(3, 5, 1),
            minors_case(2, 4, 2),
            minors_case(2, 6, 2),
            minors_case(2, 6, 3),
            minors_case(3, 6, 2),
        ]
    })
}

fn case(name: &str) -> &'static Case {
    cases().iter().find(|c| c.name == name).unwrap()
}

const SECTION3_SKEW: &str = "ring x,y,z over QQ\nskew 5\n\
0, 0, 0, -x^2, -z^2\n\
0, 0, -x^2, -z^2, -y^2\n\
0, x^2, 0, -y^2, 0\n\
x^2, z^2, y^2, 0, 0\n\
z^2, y^2, 0, 0, 0\n";

struct Golden {
    setup: TrimSetup,
    out: TrimOutput,
    elapsed: Duration,
}

fn golden() -> &'static Golden {
    static GOLDEN: OnceLock<Golden> = OnceLock::new();
    GOLDEN.get_or_init(|| {
        let start = Instant::now();
        let (ring, x) = parse_skew_file(SECTION3_SKEW).unwrap();
        let f = pfaffian_resolution(&x).unwrap();
        let a: Vec<Polynomial> =
            ["x", "y", "z"].iter().map(|v| poly_parse(v, &ring).unwrap()).collect();
        let setup = TrimSetup::with_koszul_aux(f, &[1, 2], Some(&[a.clone(), a])).unwrap();
        let out = run_pipeline(&setup, LiftStrategy::Auto).unwrap();
        Golden { setup, out, elapsed: start.elapsed() }
    })
}

/// Criterion 1: the worked 5x5 example over the rationals, exactly.
#[test]
fn acceptance_1_golden_example_over_q() {
    let g = golden();
    let mut want = BettiTable::new();
    want.set(0, 0, 1);
    want.set(1, 4, 3);
    want.set(1, 5, 6);
    want.set(2, 6, 11);
    want.set(3, 7, 2);
    want.set(3, 10, 1);
    assert_eq!(g.out.betti, want, "graded table with exact row placement");
    assert_eq!(g.out.betti.totals(), vec![1, 9, 11, 3]);
    assert!(g.out.cone.is_minimal(), "this cone is minimal");
    assert_eq!(g.out.cone.betti_from_minimal().unwrap(), want);
    assert!(g.elapsed < Duration::from_secs(5), "took {:?}", g.elapsed);
    pass(1, "golden 5x5 example over QQ");
}

/// Criterion 2: pfaffian-trim tables for n = 5, 7, 9; the n = 5 case also
/// against the Koszul-homology oracle.
#[test]
fn acceptance_2_pfaffian_tables() {
    for n in [5usize, 7, 9] {
        let c = case(&format!("pfaffian n={n}"));
        assert_eq!(c.out.betti, c.expected, "pipeline vs closed form, n={n}");
    }
    let pf9 = case("pfaffian n=9");
    assert!(pf9.elapsed < Duration::from_secs(60), "n=9 took {:?}", pf9.elapsed);

    let pf5 = case("pfaffian n=5");
    let j = IdealBasis::new(pf5.setup.ring(), pf5.setup.kprime_gens()).unwrap();
    let imax = pf5.expected.max_index().unwrap() + 1;
    let dmax = pf5.expected.max_degree().unwrap() as u32 + 1;
    let oracle = koszul_betti(&j, imax, dmax, pf5.grading.as_ref().unwrap()).unwrap();
    assert_eq!(oracle, pf5.expected.restrict(imax, dmax as i64), "oracle vs closed form");
    assert_eq!(oracle, pf5.out.betti.restrict(imax, dmax as i64), "oracle vs pipeline");
    pass(2, "pfaffian tables n=5,7,9 + n=5 oracle");
}

/// Criterion 3: single-minor removal tables; (2,3) and (2,4) also against
/// the oracle.  Budget: 120 s total.
#[test]
fn acceptance_3_single_minor_tables() {
    let t0 = Instant::now();
    let mut build_time = Duration::ZERO;
    for (n, m) in [(2usize, 3usize), (2, 4), (3, 4), (2, 5), (3, 5)] {
        let c = case(&format!("minors n={n} m={m} r=1"));
        build_time += c.elapsed;
        let single = betti_single_minor(n, m).unwrap();
        assert_eq!(c.expected, single, "multi specializes at r=1");
        assert_eq!(c.out.betti, single, "pipeline vs closed form ({n},{m})");
    }
    for (n, m, margin) in [(2usize, 3usize, 1u32), (2, 4, 0)] {
        let c = case(&format!("minors n={n} m={m} r=1"));
        let j = IdealBasis::new(c.setup.ring(), c.setup.kprime_gens()).unwrap();
        let imax = c.expected.max_index().unwrap() + margin as usize;
        let dmax = c.expected.max_degree().unwrap() as u32 + margin;
        let oracle = koszul_betti(&j, imax, dmax, c.grading.as_ref().unwrap()).unwrap();
        assert_eq!(oracle, c.expected.restrict(imax, dmax as i64), "oracle ({n},{m})");
        assert_eq!(oracle, c.out.betti.restrict(imax, dmax as i64));
    }
    let total = t0.elapsed() + build_time;
    assert!(total < Duration::from_secs(120), "criterion took {total:?}");
    pass(3, "single-minor tables + (2,3)/(2,4) oracle");
}

/// Criterion 4: multi-minor removal tables with disjoint index sets.
/// Budget: 300 s total.
#[test]
fn acceptance_4_multi_minor_tables() {
    let t0 = Instant::now();
    let mut build_time = Duration::ZERO;
    for (n, m, r) in [(2usize, 4usize, 2usize), (2, 6, 2), (2, 6, 3), (3, 6, 2)] {
        let c = case(&format!("minors n={n} m={m} r={r}"));
        build_time += c.elapsed;
        assert_eq!(c.out.betti, c.expected, "pipeline vs closed form ({n},{m},{r})");
    }
    let total = t0.elapsed() + build_time;
    assert!(total < Duration::from_secs(300), "criterion took {total:?}");
    pass(4, "multi-minor tables");
}

/// Criterion 5: stacked explicit-lift ranks match the closed rank formula
/// across the whole small grid.
#[test]
fn acceptance_5_rank_formulas() {
    let field = gf();
    for n in 1usize..=3 {
        for m in n..=8 {
            let (ring, _) = GenericMatrixSpec::generic(n, m, field.clone()).unwrap();
            let rmax = m / n;
            for r in 1..=rmax {
                let sigmas = canonical_sigmas(n, r);
                let top = n * (m - n);
                for ell in 1..=top.max(1) {
                    let q = explicit_q(&ring, n, m, &sigmas, ell).unwrap();
                    let cols = q[0].matrix.cols;
                    let rows: usize = q.iter().map(|x| x.matrix.rows).sum();
                    let mut stacked = ScalarMatrix::zero(&field, rows, cols);
                    let mut off = 0;
                    for map in &q {
                        for rr in 0..map.matrix.rows {
                            for cc in 0..map.matrix.cols {
                                stacked.set(off + rr, cc, map.matrix.get(rr, cc).constant_term());
                            }
                        }
                        off += map.matrix.rows;
                    }
                    let got = rank_over_field(&stacked) as u64;
                    let want = rank_formula(n, m, r, ell);
                    assert_eq!(got, want, "n={n} m={m} r={r} l={ell}");
                }
            }
        }
    }
    pass(5, "stacked lift ranks = closed formula on the full grid");
}

/// Criterion 6: structural invariants on every pipeline complex: exact
/// d^2 = 0, exact lift identities, and randomized acyclicity evidence with
/// two independent seeds.
#[test]
fn acceptance_6_structural_invariants() {
    let mut all: Vec<(&TrimSetup, &TrimOutput, &str)> = cases()
        .iter()
        .map(|c| (&c.setup, &c.out, c.name))
        .collect();
    let g = golden();
    all.push((&g.setup, &g.out, "golden"));
    for (setup, out, name) in all {
        assert!(setup.f().verify(), "{name}: resolution d^2");
        for i in 0..setup.summand_count() {
            assert!(setup.aux_resolution(i).verify(), "{name}: auxiliary d^2");
        }
        assert!(out.cone.verify(), "{name}: cone d^2");
        for seed in [20260101u64, 987654321] {
            assert!(out.cone.rank_acyclicity_evidence(seed), "{name}: acyclicity @{seed}");
        }
        // lift identities, re-verified here from the public pieces
        let f = setup.f();
        for i in 0..setup.summand_count() {
            let gres = setup.aux_resolution(i);
            let qs = &out.lifts.q[i];
            for k in 1..=qs.len() {
                let lhs = if k < gres.modules.len() {
                    Some(gres.maps[k - 1].matrix.mul(&qs[k - 1].matrix).unwrap())
                } else {
                    None
                };
                if k == 1 {
                    let d2 = &f.maps[1].matrix;
                    let row = setup.summands()[i];
                    let lhs = lhs.expect("G_1 present");
                    for c in 0..d2.cols {
                        assert_eq!(lhs.get(0, c), d2.get(row, c), "{name}: m1 q1 = d0'");
                    }
                } else {
                    let rhs = qs[k - 2].matrix.mul(&f.maps[k].matrix).unwrap();
                    match lhs {
                        Some(lhs) => assert_eq!(lhs, rhs, "{name}: square {k}"),
                        None => assert!(rhs.is_zero(), "{name}: square {k} (G_k = 0)"),
                    }
                }
            }
        }
    }
    pass(6, "d^2 = 0, lift identities, acyclicity evidence x2 seeds");
}

/// Largest colon degree whose rank systems stay desk-scale (column cap).
fn colon_degree_cap(setup: &TrimSetup, dmax: u32) -> u32 {
    let ring = setup.ring();
    let v = ring.nvars() as i64;
    let gens = setup.kprime_gens().len() as i64 + 1;
    let mut cap = 0u32;
    for d in 1..=dmax {
        let dim_rd = trimcx::builders::binomial(d as i64 + v - 1, v - 1) as i64;
        if gens * dim_rd <= 4000 {
            cap = d;
        } else {
            break;
        }
    }
    cap
}

/// Criterion 7: the cone's presentation ideal equals `J` up to the
/// truncation bound, and the colon slices land inside the auxiliary ideal.
///
/// For the preset cases the auxiliary ideals satisfy `a * K_0 <= K'`
/// (certified by the H0 equality just above), so `a_d` sits inside the
/// colon slice and containment the other way is exactly a dimension match,
/// checked by sparse quotient ranks.  The golden case has `a` strictly
/// larger than the derived ideal, so its slices are checked element-wise.
#[test]
fn acceptance_7_h0_and_colon() {
    for c in cases() {
        let setup = &c.setup;
        let name = c.name;
        let ring = setup.ring();
        let l1 = &c.out.cone.maps[0].matrix;
        let im_gens: Vec<Polynomial> = (0..l1.cols)
            .map(|col| l1.get(0, col).clone())
            .filter(|p| !p.is_zero())
            .collect();
        let im = IdealBasis::new(ring, im_gens).unwrap();
        let j = IdealBasis::new(ring, setup.kprime_gens()).unwrap();
        let dmax = im.max_degree().max(j.max_degree()) + 3;
        assert!(ideal_equal_upto(&im, &j, dmax), "{name}: H0 = K' up to degree {dmax}");

        let kprime = IdealBasis::new(ring, setup.kprime_gens()).unwrap();
        let cap = colon_degree_cap(setup, dmax);
        assert!(cap >= 1, "{name}: at least one checkable colon degree");
        for i in 0..setup.summand_count() {
            let a = IdealBasis::new(ring, setup.a_gens(i).to_vec()).unwrap();
            for d in 1..=cap {
                let colon_dim = colon_dim_by_rank(&kprime, setup.removed_generator(i), d);
                let a_dim = ideal_dim_sparse(&a, d);
                assert_eq!(colon_dim, a_dim, "{name}: colon = a in degree {d}, summand {i}");
            }
        }
        println!("  {name}: colon checked for degrees 1..={cap}");
    }
    // golden case: J = K' + a1 K0^1 + a2 K0^2 and element-wise colon slices
    let g = golden();
    let ring = g.setup.ring();
    let l1 = &g.out.cone.maps[0].matrix;
    let im_gens: Vec<Polynomial> =
        (0..l1.cols).map(|c| l1.get(0, c).clone()).filter(|p| !p.is_zero()).collect();
    let im = IdealBasis::new(ring, im_gens).unwrap();
    let j = IdealBasis::new(ring, g.setup.trimmed_ideal_gens()).unwrap();
    let dmax = im.max_degree().max(j.max_degree()) + 3;
    assert!(ideal_equal_upto(&im, &j, dmax), "golden: H0 = J up to degree {dmax}");
    let kprime = IdealBasis::new(ring, g.setup.kprime_gens()).unwrap();
    for i in 0..g.setup.summand_count() {
        let a = IdealBasis::new(ring, g.setup.a_gens(i).to_vec()).unwrap();
        for d in 1..=5u32 {
            let slice = colon_slice(&kprime, g.setup.removed_generator(i), d);
            assert!(colon_slice_contained(&slice, &a), "golden: colon slice d={d}");
        }
    }
    pass(7, "H0 ideal identification + colon containment");
}

/// Criterion 8: independent random lifts produce the same Betti table.
#[test]
fn acceptance_8_lift_invariance() {
    let (_, spec) = GenericMatrixSpec::generic(2, 4, gf()).unwrap();
    let en = eagon_northcott(&spec).unwrap();
    let setup = TrimSetup::with_koszul_aux(en, &[1], None).unwrap();
    let b1 = run_pipeline(&setup, LiftStrategy::Randomized(2024)).unwrap().betti;
    let b2 = run_pipeline(&setup, LiftStrategy::Randomized(4048)).unwrap().betti;
    assert_eq!(b1, b2, "two independent random lifts");
    let b3 = run_pipeline(&setup, LiftStrategy::Auto).unwrap().betti;
    assert_eq!(b1, b3, "random lift vs contraction lift");
    assert_eq!(b1, betti_single_minor(2, 4).unwrap());
    pass(8, "lift invariance at (2,4)");
}

/// Criterion 9: the shifted f-vector formula matches enumeration on the
/// whole grid; the as-printed variant's first-column mismatch at (2,4,1)
/// is pinned as a documented discrepancy.
#[test]
fn acceptance_9_fvectors() {
    for n in 1usize..=3 {
        for m in n..=8 {
            for r in 0..=3usize {
                if r * n > m {
                    continue;
                }
                let sigmas = canonical_sigmas(n, r);
                let clutter = Clutter::complete_minus(n, m, &sigmas).unwrap();
                let enumerated = clique_fvector_enumerate(&clutter).unwrap();
                let shifted = clique_fvector_formula(n, m, r, FvectorConvention::Shifted);
                for (k, want) in shifted.iter().enumerate() {
                    let dim = n + k - 1;
                    let got = enumerated.get(dim).copied().unwrap_or(0);
                    assert_eq!(got, *want, "n={n} m={m} r={r} ell={}", k + 1);
                }
                // and the formula reports nothing beyond the enumeration
                for (dim, got) in enumerated.iter().enumerate() {
                    if dim + 1 >= n {
                        let k = dim + 1 - n; // ell - 1
                        let want = shifted.get(k).copied().unwrap_or(0);
                        assert_eq!(*got, want, "n={n} m={m} r={r} dim={dim}");
                    }
                }
            }
        }
    }
    // documented discrepancy of the as-printed convention at (2,4,1), l=1
    let printed = clique_fvector_formula(2, 4, 1, FvectorConvention::AsPrinted);
    let clutter = Clutter::complete_minus(2, 4, &canonical_sigmas(2, 1)).unwrap();
    let enumerated = clique_fvector_enumerate(&clutter).unwrap();
    assert_eq!(printed[0], 4);
    assert_eq!(enumerated[1], 5);
    assert_ne!(printed[0], enumerated[1], "expected mismatch is present");
    pass(9, "f-vectors: shifted = enumeration; as-printed mismatch pinned");
}

/// Criterion 10: matching-set counts.
#[test]
fn acceptance_10_matching_counts() {
    let tau3 = IndexSet::new(vec![1, 2, 3]).unwrap();
    assert_eq!(l_set(&ExponentAlpha(vec![2, 0, 1]), &tau3).len(), 3);
    let tau4 = IndexSet::new(vec![1, 2, 3, 4]).unwrap();
    assert_eq!(l_set(&ExponentAlpha(vec![2, 0, 2]), &tau4).len(), 6);

    let factorial = |k: usize| (1..=k as u64).product::<u64>();
    for n in 1usize..=4 {
        for ell in 1usize..=5 {
            for alpha in trimcx::builders::exponents_lex(n, ell) {
                for shift in [0usize, 2] {
                    let tau =
                        IndexSet::new((1..=ell).map(|v| v + shift).collect()).unwrap();
                    let got = l_set(&ExponentAlpha(alpha.clone()), &tau).len() as u64;
                    let want =
                        factorial(ell) / alpha.iter().map(|&a| factorial(a)).product::<u64>();
                    assert_eq!(got, want, "n={n} ell={ell} alpha={alpha:?}");
                }
            }
        }
    }
    pass(10, "matching-set counts: worked examples + multinomial grid");
}

/// The lifts behind criterion 6 must also hold for a generic-solver run on
/// a case with non-variable auxiliary generators (the derived quadric pair
/// of the 5x5 example), exercising the degree-slice route end to end.
#[test]
fn generic_solver_route_on_derived_ideal() {
    let (ring, x) = parse_skew_file(SECTION3_SKEW).unwrap();
    let f = pfaffian_resolution(&x).unwrap();
    // no override: summand 1's ideal is derived as (x^2, z^2)
    let setup = TrimSetup::with_koszul_aux(f, &[1], None).unwrap();
    assert_eq!(
        setup.a_gens(0),
        &[poly_parse("x^2", &ring).unwrap(), poly_parse("z^2", &ring).unwrap()]
    );
    let out = run_pipeline(&setup, LiftStrategy::Auto).unwrap();
    assert!(out.cone.verify());
    assert!(out.cone.rank_acyclicity_evidence(7));
    // H0 still presents K' + (x^2,z^2)*K_0
    let j = IdealBasis::new(&ring, setup.trimmed_ideal_gens()).unwrap();
    let l1 = &out.cone.maps[0].matrix;
    let im_gens: Vec<Polynomial> =
        (0..l1.cols).map(|c| l1.get(0, c).clone()).filter(|p| !p.is_zero()).collect();
    let im = IdealBasis::new(&ring, im_gens).unwrap();
    assert!(ideal_equal_upto(&im, &j, 9));
}

/// Sanity for the shared fixtures themselves.
#[test]
fn fixtures_have_expected_shapes() {
    let pf9 = case("pfaffian n=9");
    assert_eq!(pf9.setup.f().modules[1].rank(), 9);
    assert_eq!(pf9.setup.a_gens(0).len(), 8);
    let m36 = case("minors n=3 m=6 r=2");
    assert_eq!(m36.setup.summand_count(), 2);
    assert_eq!(m36.setup.a_gens(0).len(), 9);
    let lifts = lift_q(&m36.setup, LiftStrategy::Auto).unwrap();
    assert_eq!(lifts.q.len(), 2);
}
