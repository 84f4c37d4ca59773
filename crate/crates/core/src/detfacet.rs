//! Closed-form layer for determinantal trimming: matching combinatorics for
//! the explicit lift matrices, their rank formulas, closed-form Betti tables
//! for the pfaffian and maximal-minor families, and clique-complex
//! f-vectors of uniform clutters.

use crate::builders::{binomial, binomial_checked, exponents_lex, subsets_lex};
use crate::chain::{BettiTable, GradedFreeModule, GradedMap};
use crate::linalg::PolyMatrix;
use crate::ring::{PolyRing, Polynomial};
use itertools::Itertools;
use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DetfacetError {
    #[error("index set must be strictly increasing and positive, got {0:?}")]
    BadIndexSet(Vec<usize>),
    #[error("index sets overlap: {0:?} and {1:?}")]
    OverlappingSigmas(Vec<usize>, Vec<usize>),
    #[error("need r*n <= m (r={r}, n={n}, m={m})")]
    TooManyRemovals { r: usize, n: usize, m: usize },
    #[error("pfaffian table needs odd n >= 5, got {0}")]
    BadPfaffianSize(usize),
    #[error("need n <= m, got n={0}, m={1}")]
    NGreaterThanM(usize, usize),
    #[error("enumeration guard: ground set {0} exceeds 20")]
    GroundSetTooLarge(usize),
    #[error("clutter spec: {0}")]
    Spec(String),
    #[error("table entries exceed 128-bit integers for these parameters")]
    Overflow,
}

/// A strictly increasing sequence of positive (1-based) indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(indices: Vec<usize>) -> Result<Self, DetfacetError> {
        if indices.is_empty()
            || indices[0] == 0
            || indices.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(DetfacetError::BadIndexSet(indices));
        }
        Ok(IndexSet(indices))
    }

    /// Parse a comma-separated increasing list like `1,3,4`.
    pub fn parse(s: &str) -> Result<Self, DetfacetError> {
        let v: Result<Vec<usize>, _> = s.split(',').map(|t| t.trim().parse::<usize>()).collect();
        match v {
            Ok(v) => Self::new(v),
            Err(_) => Err(DetfacetError::Spec(format!("bad index set `{s}`"))),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn disjoint(&self, other: &IndexSet) -> bool {
        self.0.iter().all(|v| !other.contains(*v))
    }
}

impl std::fmt::Display for IndexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0.iter().map(|v| v.to_string()).join(","))
    }
}

/// Divided-power exponent vector `alpha` with `|alpha| = sum alpha_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentAlpha(pub Vec<usize>);

impl ExponentAlpha {
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

/// One matching: pairs (row, column), columns strictly increasing.
pub type LMatching = Vec<(usize, usize)>;

/// All matchings of the columns `tau` by rows with multiplicities `alpha`:
/// the sequences `(r_1, tau_1), ..., (r_l, tau_l)` in which row `i` occurs
/// exactly `alpha_i` times.  Empty unless `|alpha| = |tau|`.
pub fn l_set(alpha: &ExponentAlpha, tau: &IndexSet) -> Vec<LMatching> {
    let l = tau.len();
    if alpha.total() != l {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut remaining = alpha.0.clone();
    let mut cur: LMatching = Vec::with_capacity(l);
    fn rec(
        pos: usize,
        tau: &[usize],
        remaining: &mut Vec<usize>,
        cur: &mut LMatching,
        out: &mut Vec<LMatching>,
    ) {
        if pos == tau.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..remaining.len() {
            if remaining[i] == 0 {
                continue;
            }
            remaining[i] -= 1;
            cur.push((i + 1, tau[pos]));
            rec(pos + 1, tau, remaining, cur, out);
            cur.pop();
            remaining[i] += 1;
        }
    }
    rec(0, tau.indices(), &mut remaining, &mut cur, &mut out);
    out
}

/// `C(n+l-1, l) * sum_(i=1..r) (-1)^(i+1) C(r,i) C(m-i*n, l-(i-1)*n)`,
/// with the convention that out-of-range binomials vanish.  At `r = 1` this
/// is `C(n+l-1, l) * C(m-n, l)`.
pub fn rank_formula(n: usize, m: usize, r: usize, ell: usize) -> u64 {
    rank_formula_wide(n, m, r, ell)
        .and_then(|v| u64::try_from(v).ok())
        .expect("rank formula overflow")
}

/// As [`rank_formula`] with 128-bit arithmetic; `None` on overflow.
pub fn rank_formula_wide(n: usize, m: usize, r: usize, ell: usize) -> Option<u128> {
    let (n, m, r, ell) = (n as i64, m as i64, r as i64, ell as i64);
    let mut sum: i128 = 0;
    for i in 1..=r {
        let term = binomial_checked(r, i)?.checked_mul(binomial_checked(m - i * n, ell - (i - 1) * n)?)?;
        let term = i128::try_from(term).ok()?;
        if i % 2 == 1 {
            sum = sum.checked_add(term)?;
        } else {
            sum = sum.checked_sub(term)?;
        }
    }
    let lead = i128::try_from(binomial_checked(n + ell - 1, ell)?).ok()?;
    let total = lead.checked_mul(sum)?;
    debug_assert!(total >= 0, "rank formula went negative");
    Some(total.max(0) as u128)
}

// ---------------------------------------------------------------------------
// Explicit lift matrices against the Eagon-Northcott and Koszul bases.
// ---------------------------------------------------------------------------

/// The ordered generators of the complete intersection attached to `sigma`:
/// pairs `(i, l)` with `1 <= i <= n`, `l` not in `sigma`, sorted by
/// `(l, i)`.  This is also the basis order of the Koszul complex used for
/// the lifts.
pub fn u_pairs(n: usize, m: usize, sigma: &IndexSet) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for l in 1..=m {
        if sigma.contains(l) {
            continue;
        }
        for i in 1..=n {
            pairs.push((i, l));
        }
    }
    pairs
}

/// Ideal generators `x_(i,l)` in the [`u_pairs`] order, as polynomials of a
/// generic-matrix ring created by `GenericMatrixSpec::generic`.
pub fn u_ideal_gens(
    ring: &Arc<PolyRing>,
    n: usize,
    m: usize,
    sigma: &IndexSet,
) -> Vec<Polynomial> {
    u_pairs(n, m, sigma)
        .into_iter()
        .map(|(i, l)| {
            let name = crate::builders::generic_var_name("x", i, l);
            let idx = ring.var_index(&name).expect("generic ring variable");
            Polynomial::var(ring, idx)
        })
        .collect()
}

/// Sign of the shuffle sorting the concatenation `tau ++ sigma` of two
/// disjoint increasing sequences: `(-1)^(inversions)`.
fn shuffle_sign(tau: &[usize], sigma: &[usize]) -> i64 {
    let mut inversions = 0usize;
    for &a in tau {
        inversions += sigma.iter().filter(|&&b| a > b).count();
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The explicit lift `q_l : D_l(G*) (x) Lambda^(n+l) F -> Lambda^l U_j` for
/// each removed index set, as graded maps over the generic ring.  A basis
/// element `g^(alpha) (x) f_T` maps to the signed sum of wedge monomials
/// `e_L` over the matchings of `alpha` against `tau = T minus sigma_j`;
/// elements with `T` not containing `sigma_j` map to zero.  Entries are 0
/// or +-1; each map fits the commuting squares against the
/// Eagon-Northcott and Koszul differentials exactly.
pub fn explicit_q(
    ring: &Arc<PolyRing>,
    n: usize,
    m: usize,
    sigmas: &[IndexSet],
    ell: usize,
) -> Result<Vec<GradedMap>, DetfacetError> {
    validate_sigmas(n, m, sigmas)?;
    assert!(ell >= 1);
    let src_alphas = exponents_lex(n, ell);
    let src_tsets = subsets_lex(m, n + ell);
    // source degrees: EN generators of degree n + ell, twisted bookkeeping
    // lives entirely in the target below
    let src =
        GradedFreeModule::new(vec![(n + ell) as i64; src_alphas.len() * src_tsets.len()]);
    let mut out = Vec::with_capacity(sigmas.len());
    for sigma in sigmas {
        let pairs = u_pairs(n, m, sigma);
        let pair_index: HashMap<(usize, usize), usize> =
            pairs.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        let wedge = subsets_lex(pairs.len(), ell);
        let wedge_index: HashMap<&Vec<usize>, usize> =
            wedge.iter().enumerate().map(|(k, w)| (w, k)).collect();
        // target degrees: Lambda^l U twisted by deg Delta_sigma = n
        let tgt = GradedFreeModule::new(vec![(n + ell) as i64; wedge.len()]);
        let mut matrix = PolyMatrix::zero(ring, wedge.len(), src.rank());
        for (ai, alpha) in src_alphas.iter().enumerate() {
            let alpha = ExponentAlpha(alpha.clone());
            for (ti, t) in src_tsets.iter().enumerate() {
                let col = ai * src_tsets.len() + ti;
                let t1: Vec<usize> = t.iter().map(|&v| v + 1).collect();
                if !sigma.indices().iter().all(|s| t1.contains(s)) {
                    continue;
                }
                let tau: Vec<usize> =
                    t1.iter().copied().filter(|v| !sigma.contains(*v)).collect();
                let sign = shuffle_sign(&tau, sigma.indices());
                let tau_set = IndexSet::new(tau).expect("increasing by construction");
                for matching in l_set(&alpha, &tau_set) {
                    // pairs of a matching have distinct increasing columns,
                    // matching the (l, i)-sorted basis order up to row order
                    // within a column, which cannot occur here
                    let mut widx: Vec<usize> =
                        matching.iter().map(|p| pair_index[p]).collect();
                    widx.sort_unstable();
                    let row = wedge_index[&widx];
                    let v = matrix.get(row, col).add(&Polynomial::from_i64(ring, sign));
                    matrix.set(row, col, v);
                }
            }
        }
        out.push(
            GradedMap::new(src.clone(), tgt, matrix).expect("constant entries, equal degrees"),
        );
    }
    Ok(out)
}

pub fn validate_sigmas(n: usize, m: usize, sigmas: &[IndexSet]) -> Result<(), DetfacetError> {
    for s in sigmas {
        if s.len() != n || s.indices().iter().any(|&v| v > m) {
            return Err(DetfacetError::BadIndexSet(s.indices().to_vec()));
        }
    }
    for (a, b) in sigmas.iter().tuple_combinations() {
        if !a.disjoint(b) {
            return Err(DetfacetError::OverlappingSigmas(
                a.indices().to_vec(),
                b.indices().to_vec(),
            ));
        }
    }
    if sigmas.len() * n > m {
        return Err(DetfacetError::TooManyRemovals { r: sigmas.len(), n, m });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Closed-form Betti tables.
// ---------------------------------------------------------------------------

/// Betti table of the ideal of submaximal pfaffians of a generic odd skew
/// matrix with one generator removed.
pub fn betti_pfaffian_trim(n: usize) -> Result<BettiTable, DetfacetError> {
    if n < 5 || n % 2 == 0 {
        return Err(DetfacetError::BadPfaffianSize(n));
    }
    let d = (n as i64 - 1) / 2; // degree of the submaximal pfaffians
    let mut t = BettiTable::new();
    t.set(0, 0, 1);
    t.add(1, d, n as u128 - 1);
    t.add(2, d + 1, 1);
    for k in 2..=(n - 1) {
        let v = binomial_checked(n as i64 - 1, k as i64).ok_or(DetfacetError::Overflow)?;
        t.add(k, k as i64 + d, v);
    }
    t.add(3, n as i64, 1);
    Ok(t)
}

/// Betti table of the ideal of maximal minors of a generic `n x m` matrix
/// with the minor at one index set removed.
pub fn betti_single_minor(n: usize, m: usize) -> Result<BettiTable, DetfacetError> {
    if n > m {
        return Err(DetfacetError::NGreaterThanM(n, m));
    }
    let sigma = IndexSet::new((1..=n).collect()).unwrap();
    betti_multi_minor(n, m, &[sigma])
}

/// Betti table of the maximal-minor ideal with the minors at `sigmas`
/// (pairwise disjoint index sets) removed: row `n-1` column `l` holds
/// `C(n+l-2, l-1) C(m, n+l-1) - rk_(l-1)` and row `n` column `l` holds
/// `r C(n(m-n), l) - rk_l`.
pub fn betti_multi_minor(
    n: usize,
    m: usize,
    sigmas: &[IndexSet],
) -> Result<BettiTable, DetfacetError> {
    if n > m {
        return Err(DetfacetError::NGreaterThanM(n, m));
    }
    validate_sigmas(n, m, sigmas)?;
    let r = sigmas.len() as u128;
    let nn = n as i64;
    let mm = m as i64;
    let mut t = BettiTable::new();
    t.set(0, 0, 1);
    let top = (n * (m - n)) as i64;
    for ell in 1..=top.max(1) {
        // row n-1, internal degree n-1+l
        let e_rank = binomial_checked(nn + ell - 2, ell - 1)
            .zip(binomial_checked(mm, nn + ell - 1))
            .and_then(|(a, b)| a.checked_mul(b))
            .ok_or(DetfacetError::Overflow)?;
        let rk_prev = rank_formula_wide(n, m, sigmas.len(), (ell - 1) as usize)
            .ok_or(DetfacetError::Overflow)?;
        if e_rank > rk_prev {
            t.add(ell as usize, nn - 1 + ell, e_rank - rk_prev);
        }
        // row n, internal degree n+l
        let k_rank = binomial_checked(top, ell)
            .and_then(|b| r.checked_mul(b))
            .ok_or(DetfacetError::Overflow)?;
        let rk = rank_formula_wide(n, m, sigmas.len(), ell as usize)
            .ok_or(DetfacetError::Overflow)?;
        if k_rank > rk {
            t.add(ell as usize, nn + ell, k_rank - rk);
        }
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// Clutters, clique complexes and f-vectors.
// ---------------------------------------------------------------------------

/// An `n`-uniform clutter on ground set `{1..m}`: a set of size-`n`
/// circuits (uniformity makes the antichain condition automatic).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clutter {
    pub ground: usize,
    pub n: usize,
    circuits: BTreeSet<Vec<usize>>,
}

impl Clutter {
    pub fn new(ground: usize, circuits: BTreeSet<Vec<usize>>) -> Result<Self, DetfacetError> {
        let n = circuits.iter().next().map_or(0, |c| c.len());
        for c in &circuits {
            if c.len() != n
                || c.windows(2).any(|w| w[0] >= w[1])
                || c.iter().any(|&v| v == 0 || v > ground)
            {
                return Err(DetfacetError::BadIndexSet(c.clone()));
            }
        }
        Ok(Clutter { ground, n, circuits })
    }

    /// All `n`-subsets of `{1..m}` minus the given (disjoint) removals.
    pub fn complete_minus(
        n: usize,
        m: usize,
        removed: &[IndexSet],
    ) -> Result<Self, DetfacetError> {
        validate_sigmas(n, m, removed)?;
        let removed_set: BTreeSet<Vec<usize>> =
            removed.iter().map(|s| s.indices().to_vec()).collect();
        let circuits: BTreeSet<Vec<usize>> = subsets_lex(m, n)
            .into_iter()
            .map(|s| s.into_iter().map(|v| v + 1).collect::<Vec<usize>>())
            .filter(|s| !removed_set.contains(s))
            .collect();
        Clutter::new(m, circuits)
    }

    /// Parse `n=<n> m=<m> remove=<s1;s2;...>`; `remove=` may be empty or
    /// absent.
    pub fn parse_spec(spec: &str) -> Result<Self, DetfacetError> {
        let mut n = None;
        let mut m = None;
        let mut removed: Vec<IndexSet> = Vec::new();
        for tok in spec.split_whitespace() {
            if let Some(v) = tok.strip_prefix("n=") {
                n = v.parse().ok();
            } else if let Some(v) = tok.strip_prefix("m=") {
                m = v.parse().ok();
            } else if let Some(v) = tok.strip_prefix("remove=") {
                if !v.is_empty() {
                    for part in v.split(';') {
                        removed.push(IndexSet::parse(part)?);
                    }
                }
            } else {
                return Err(DetfacetError::Spec(format!("unexpected token `{tok}`")));
            }
        }
        let n = n.ok_or_else(|| DetfacetError::Spec("missing n=".into()))?;
        let m = m.ok_or_else(|| DetfacetError::Spec("missing m=".into()))?;
        Clutter::complete_minus(n, m, &removed)
    }

    pub fn circuits(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.circuits.iter()
    }

    pub fn is_circuit(&self, set: &[usize]) -> bool {
        self.circuits.contains(set)
    }
}

/// f-vector of the clique complex of the clutter: entry `i` counts the
/// faces of dimension `i` (sets of size `i+1` all of whose `n`-subsets are
/// circuits; sets smaller than `n` are faces vacuously).  Computed by
/// breadth-first clique extension.
pub fn clique_fvector_enumerate(c: &Clutter) -> Result<Vec<u64>, DetfacetError> {
    if c.ground > 20 {
        return Err(DetfacetError::GroundSetTooLarge(c.ground));
    }
    let m = c.ground;
    let n = c.n;
    let mut fvec = Vec::new();
    // sets smaller than n are faces vacuously; for n = 1 the vertices
    // themselves must be circuits
    let mut current: Vec<Vec<usize>> = (1..=m)
        .map(|v| vec![v])
        .filter(|f| n > 1 || c.is_circuit(f))
        .collect();
    let mut size = 1usize;
    while !current.is_empty() {
        fvec.push(current.len() as u64);
        let mut next: Vec<Vec<usize>> = Vec::new();
        for face in &current {
            let start = face.last().copied().unwrap_or(0) + 1;
            'ext: for v in start..=m {
                let mut cand = face.clone();
                cand.push(v);
                if cand.len() >= n {
                    // only the n-subsets through v need rechecking
                    for rest in subsets_lex(face.len(), n - 1) {
                        let mut sub: Vec<usize> = rest.iter().map(|&k| face[k]).collect();
                        sub.push(v);
                        if !c.is_circuit(&sub) {
                            continue 'ext;
                        }
                    }
                }
                next.push(cand);
            }
        }
        current = next;
        size += 1;
        if size > m {
            break;
        }
    }
    Ok(fvec)
}

/// Which reading of the closed-form f-vector to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FvectorConvention {
    /// Inner binomial argument `l - (i-1) n`.
    AsPrinted,
    /// Inner binomial argument `(l-1) - (i-1) n`, the reading forced by the
    /// linear strand of the closed-form Betti table.
    Shifted,
}

/// Closed-form `f_(n+l-2)` of the clique complex of the complete `n`-uniform
/// clutter on `[m]` minus `r` disjoint circuits, for `l = 1, 2, ...`.
/// Returns the values until they vanish.
pub fn clique_fvector_formula(
    n: usize,
    m: usize,
    r: usize,
    convention: FvectorConvention,
) -> Vec<u64> {
    let (nn, mm, rr) = (n as i64, m as i64, r as i64);
    let mut out = Vec::new();
    for ell in 1..=(mm - nn + 1).max(1) {
        let mut v: i128 = binomial(mm, nn + ell - 1) as i128;
        for i in 1..=rr {
            let inner = match convention {
                FvectorConvention::AsPrinted => ell - (i - 1) * nn,
                FvectorConvention::Shifted => (ell - 1) - (i - 1) * nn,
            };
            let term = (binomial(rr, i) * binomial(mm - i * nn, inner)) as i128;
            if i % 2 == 1 {
                v -= term;
            } else {
                v += term;
            }
        }
        out.push(v.max(0) as u64);
    }
    while out.last() == Some(&0) {
        out.pop();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{eagon_northcott, koszul_complex, GenericMatrixSpec};
    use crate::linalg::rank_over_field;
    use crate::ring::CoefficientField;
    use proptest::prelude::*;

    fn iset(v: &[usize]) -> IndexSet {
        IndexSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn l_set_first_worked_example() {
        let got = l_set(&ExponentAlpha(vec![2, 0, 1]), &iset(&[1, 2, 3]));
        let want: Vec<LMatching> = vec![
            vec![(3, 1), (1, 2), (1, 3)],
            vec![(1, 1), (3, 2), (1, 3)],
            vec![(1, 1), (1, 2), (3, 3)],
        ];
        assert_eq!(got.len(), 3);
        for w in want {
            assert!(got.contains(&w), "missing {w:?}");
        }
    }

    #[test]
    fn l_set_second_worked_example() {
        let got = l_set(&ExponentAlpha(vec![2, 0, 2]), &iset(&[1, 2, 3, 4]));
        assert_eq!(got.len(), 6);
        assert!(got.contains(&vec![(3, 1), (3, 2), (1, 3), (1, 4)]));
        assert!(got.contains(&vec![(1, 1), (1, 2), (3, 3), (3, 4)]));
    }

    #[test]
    fn l_set_empty_on_size_mismatch() {
        assert!(l_set(&ExponentAlpha(vec![1, 0]), &iset(&[1, 2])).is_empty());
    }

    #[test]
    fn rank_formula_examples() {
        assert_eq!(rank_formula(2, 4, 1, 1), 4);
        // vanishing range: l = m - n + 2 with r = 1ue
        assert_eq!(rank_formula(2, 4, 1, 4), 0);
        assert_eq!(rank_formula(3, 7, 1, 6), 0);
        assert_eq!(rank_formula(2, 4, 2, 2), 3);
        assert_eq!(rank_formula(2, 4, 2, 1), 8);
        // l = 0 recovers r
        assert_eq!(rank_formula(2, 4, 2, 0), 2);
    }

    #[test]
    fn explicit_q1_for_2x4() {
        let (ring, _) = GenericMatrixSpec::generic(2, 4, CoefficientField::Rationals).unwrap();
        let q = explicit_q(&ring, 2, 4, &[iset(&[1, 2])], 1).unwrap();
        assert_eq!(q.len(), 1);
        let ranks = q[0].constant_block_ranks();
        assert_eq!(ranks.get(&3).copied().unwrap_or(0), 4);
    }

    #[test]
    fn explicit_q_vanishes_past_en_length() {
        let (ring, _) = GenericMatrixSpec::generic(2, 4, CoefficientField::Rationals).unwrap();
        // l = m - n + 1 = 3 already has empty source
        let q = explicit_q(&ring, 2, 4, &[iset(&[1, 2])], 4).unwrap();
        assert_eq!(q[0].matrix.cols, 0);
    }

    #[test]
    fn explicit_q_stacked_rank_two_sigmas() {
        let (ring, _) = GenericMatrixSpec::generic(2, 4, CoefficientField::Rationals).unwrap();
        let q = explicit_q(&ring, 2, 4, &[iset(&[1, 2]), iset(&[3, 4])], 1).unwrap();
        let stacked = stack_constant(&q);
        assert_eq!(rank_over_field(&stacked), 8);
    }

    fn stack_constant(maps: &[GradedMap]) -> crate::linalg::ScalarMatrix {
        let field = maps[0].matrix.ring().field().clone();
        let cols = maps[0].matrix.cols;
        let rows: usize = maps.iter().map(|m| m.matrix.rows).sum();
        let mut out = crate::linalg::ScalarMatrix::zero(&field, rows, cols);
        let mut off = 0;
        for m in maps {
            for r in 0..m.matrix.rows {
                for c in 0..m.matrix.cols {
                    out.set(off + r, c, m.matrix.get(r, c).constant_term());
                }
            }
            off += m.matrix.rows;
        }
        out
    }

    #[test]
    fn explicit_q_rejects_overlap() {
        let (ring, _) = GenericMatrixSpec::generic(2, 4, CoefficientField::Rationals).unwrap();
        assert!(matches!(
            explicit_q(&ring, 2, 4, &[iset(&[1, 2]), iset(&[2, 3])], 1),
            Err(DetfacetError::OverlappingSigmas(..))
        ));
    }

    /// The commuting squares against the Eagon-Northcott and Koszul
    /// differentials, checked exactly on a grid of shapes.
    #[test]
    fn explicit_q_commuting_squares() {
        for (n, m) in [(1usize, 3usize), (2, 4), (2, 5), (3, 4), (3, 5)] {
            let (ring, spec) = GenericMatrixSpec::generic(n, m, CoefficientField::Rationals).unwrap();
            let en = eagon_northcott(&spec).unwrap();
            let sigmas = vec![iset(&(1..=n).collect::<Vec<_>>())];
            let gens = u_ideal_gens(&ring, n, m, &sigmas[0]);
            let koszul = koszul_complex(&gens).unwrap();
            let mut prev = explicit_q(&ring, n, m, &sigmas, 1).unwrap();
            for ell in 2..=(m - n) {
                let cur = explicit_q(&ring, n, m, &sigmas, ell).unwrap();
                // m_ell . q_ell = q_(ell-1) . d_(ell+1)
                let lhs = koszul.maps[ell - 1].matrix.mul(&cur[0].matrix).unwrap();
                let rhs = prev[0].matrix.mul(&en.maps[ell].matrix).unwrap();
                assert_eq!(lhs, rhs, "square l={ell} for ({n},{m})");
                prev = cur;
            }
        }
    }

    #[test]
    fn explicit_q_commuting_squares_multi() {
        let n = 2;
        let m = 6;
        let sigmas = vec![iset(&[1, 2]), iset(&[3, 4]), iset(&[5, 6])];
        let (ring, spec) = GenericMatrixSpec::generic(n, m, CoefficientField::Rationals).unwrap();
        let en = eagon_northcott(&spec).unwrap();
        for (j, sigma) in sigmas.iter().enumerate() {
            let gens = u_ideal_gens(&ring, n, m, sigma);
            let koszul = koszul_complex(&gens).unwrap();
            let mut prev = explicit_q(&ring, n, m, &sigmas, 1).unwrap();
            for ell in 2..=(m - n) {
                let cur = explicit_q(&ring, n, m, &sigmas, ell).unwrap();
                let lhs = koszul.maps[ell - 1].matrix.mul(&cur[j].matrix).unwrap();
                let rhs = prev[j].matrix.mul(&en.maps[ell].matrix).unwrap();
                assert_eq!(lhs, rhs, "square l={ell}, sigma #{j}");
                prev = cur;
            }
        }
    }

    #[test]
    fn betti_pfaffian_small_cases() {
        let t5 = betti_pfaffian_trim(5).unwrap();
        assert_eq!(t5.get(0, 0), 1);
        assert_eq!(t5.get(1, 2), 4);
        assert_eq!(t5.get(2, 3), 1);
        assert_eq!(t5.get(2, 4), 6);
        assert_eq!(t5.get(3, 5), 5);
        assert_eq!(t5.get(4, 6), 1);
        assert_eq!(t5.totals(), vec![1u128, 4, 7, 5, 1]);

        let t7 = betti_pfaffian_trim(7).unwrap();
        assert_eq!(t7.get(1, 3), 6); // row 2
        assert_eq!(t7.get(2, 4), 1); // row 2
        assert_eq!(t7.get(2, 5), 15); // row 3
        assert_eq!(t7.get(6, 9), 1); // row 3
        assert_eq!(t7.get(3, 7), 1); // row 4

        let t9 = betti_pfaffian_trim(9).unwrap();
        assert_eq!(t9.total(2), 1 + binomial(8, 2) as u128);

        assert!(betti_pfaffian_trim(4).is_err());
        assert!(betti_pfaffian_trim(3).is_err());
    }

    #[test]
    fn betti_single_minor_cases() {
        let t = betti_single_minor(2, 3).unwrap();
        assert_eq!(t.get(1, 2), 2);
        assert_eq!(t.get(2, 4), 1);
        assert_eq!(t.totals(), vec![1u128, 2, 1]);

        let t = betti_single_minor(2, 4).unwrap();
        assert_eq!(t.get(1, 2), binomial(4, 2) as u128 - 1);
        // right edge of row n: column n(m-n) holds 1, column n(m-n)-1 holds n(m-n)
        let top = 2 * (4 - 2);
        assert_eq!(t.get(top, 2 + top as i64), 1);
        assert_eq!(t.get(top - 1, 2 + top as i64 - 1), top as u128);

        assert!(betti_single_minor(3, 2).is_err());
    }

    #[test]
    fn betti_multi_specializes_to_single() {
        for (n, m) in [(2usize, 3usize), (2, 4), (3, 4), (2, 5), (3, 5)] {
            let sigma = iset(&(1..=n).collect::<Vec<_>>());
            let single = betti_single_minor(n, m).unwrap();
            let multi = betti_multi_minor(n, m, &[sigma]).unwrap();
            assert_eq!(single, multi, "({n},{m})");
        }
    }

    #[test]
    fn betti_multi_2x4_two_removals() {
        let t = betti_multi_minor(2, 4, &[iset(&[1, 2]), iset(&[3, 4])]).unwrap();
        assert_eq!(t.get(1, 2), 4);
        assert_eq!(t.get(2, 4), 9);
        assert_eq!(t.get(3, 5), 8);
        assert_eq!(t.get(4, 6), 2); // final column holds r
        assert_eq!(t.get(2, 3), 0);
    }

    #[test]
    fn clique_fvector_enumeration_examples() {
        // all 2-subsets of [4] minus {1,2}
        let c = Clutter::complete_minus(2, 4, &[iset(&[1, 2])]).unwrap();
        assert_eq!(clique_fvector_enumerate(&c).unwrap(), vec![4, 5, 2]);

        // full skeleton
        let c = Clutter::complete_minus(2, 4, &[]).unwrap();
        assert_eq!(clique_fvector_enumerate(&c).unwrap(), vec![4, 6, 4, 1]);

        // minus two disjoint edges: no triangles
        let c = Clutter::complete_minus(2, 4, &[iset(&[1, 2]), iset(&[3, 4])]).unwrap();
        assert_eq!(clique_fvector_enumerate(&c).unwrap(), vec![4, 4]);
    }

    #[test]
    fn clique_fvector_formula_conventions() {
        // as printed at (2,4,1), l=1: 6 - 2 = 4
        let printed = clique_fvector_formula(2, 4, 1, FvectorConvention::AsPrinted);
        assert_eq!(printed[0], 4);
        // shifted matches the enumerated f_1 = 5
        let shifted = clique_fvector_formula(2, 4, 1, FvectorConvention::Shifted);
        assert_eq!(shifted[0], 5);
        // shifted with two removals matches enumeration f_1 = 4
        let shifted2 = clique_fvector_formula(2, 4, 2, FvectorConvention::Shifted);
        assert_eq!(shifted2[0], 4);
    }

    #[test]
    fn clique_fvector_shifted_matches_enumeration_grid() {
        for n in 1..=3usize {
            for m in n..=8usize {
                for r in 0..=3usize {
                    if r * n > m {
                        continue;
                    }
                    let sigmas: Vec<IndexSet> = (0..r)
                        .map(|k| iset(&((k * n + 1)..=(k * n + n)).collect::<Vec<_>>()))
                        .collect();
                    let c = Clutter::complete_minus(n, m, &sigmas).unwrap();
                    let enumerated = clique_fvector_enumerate(&c).unwrap();
                    let shifted = clique_fvector_formula(n, m, r, FvectorConvention::Shifted);
                    for (ell_minus_1, want) in shifted.iter().enumerate() {
                        let dim = n + ell_minus_1 - 1; // face dimension n+l-2
                        let got = enumerated.get(dim).copied().unwrap_or(0);
                        assert_eq!(got, *want, "n={n} m={m} r={r} l={}", ell_minus_1 + 1);
                    }
                }
            }
        }
    }

    #[test]
    fn clutter_spec_parsing() {
        let c = Clutter::parse_spec("n=2 m=4 remove=1,2;3,4").unwrap();
        assert_eq!(c.circuits().count(), 4);
        assert!(Clutter::parse_spec("n=2 remove=1,2").is_err());
        assert!(Clutter::parse_spec("n=2 m=4 remove=2,1").is_err());
        let full = Clutter::parse_spec("n=3 m=6").unwrap();
        assert_eq!(full.circuits().count(), 20);
    }

    #[test]
    fn enumeration_guard() {
        let c = Clutter::complete_minus(2, 21, &[]);
        assert!(c.is_err() || clique_fvector_enumerate(&c.unwrap()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// |L| is the multinomial l!/(prod alpha_i!) when |alpha| = |tau|.
        #[test]
        fn l_set_count_is_multinomial(
            n in 1usize..5,
            ell in 0usize..6,
            shift in 0usize..3,
        ) {
            for alpha in exponents_lex(n, ell) {
                if ell > 5 { continue; }
                let tau: Vec<usize> = (1..=ell).map(|v| v + shift).collect();
                if tau.is_empty() { continue; }
                let tau = IndexSet::new(tau).unwrap();
                let got = l_set(&ExponentAlpha(alpha.clone()), &tau).len() as u64;
                let mut want = 1u64;
                for k in 1..=ell as u64 { want *= k; }
                for a in &alpha {
                    let mut f = 1u64;
                    for k in 1..=*a as u64 { f *= k; }
                    want /= f;
                }
                prop_assert_eq!(got, want);
            }
        }

        /// Every sub-matching extends to exactly one matching.
        #[test]
        fn l_set_unique_extension(n in 1usize..4, ell in 2usize..5) {
            for alpha in exponents_lex(n, ell) {
                let tau = IndexSet::new((1..=ell).collect()).unwrap();
                let full = l_set(&ExponentAlpha(alpha.clone()), &tau);
                // drop column k and reduce alpha at i
                for i in 0..n {
                    if alpha[i] == 0 { continue; }
                    let mut alpha_red = alpha.clone();
                    alpha_red[i] -= 1;
                    for k in 1..=ell {
                        let tau_red: Vec<usize> = (1..=ell).filter(|&v| v != k).collect();
                        if tau_red.is_empty() { continue; }
                        let tau_red = IndexSet::new(tau_red).unwrap();
                        for sub in l_set(&ExponentAlpha(alpha_red.clone()), &tau_red) {
                            let mut extended = sub.clone();
                            extended.push((i + 1, k));
                            extended.sort_by_key(|p| p.1);
                            let count = full.iter().filter(|l| {
                                sub.iter().all(|p| l.contains(p))
                            }).count();
                            prop_assert_eq!(count, 1);
                        }
                    }
                }
            }
        }
    }
}
