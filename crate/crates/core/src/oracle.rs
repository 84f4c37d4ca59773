//! Independent brute-force verification: degree-truncated ideal membership
//! and equality, colon slices, and Betti numbers via the homology of the
//! Koszul complex on the ring variables.
//!
//! Everything here is deliberately naive slice linear algebra: exact
//! elimination on Macaulay-style matrices, no Groebner bases, which keeps
//! this module fully independent of the resolution pipeline it checks.  The
//! Koszul-homology ranks are computed per multidegree component of any
//! grading that makes the ideal multihomogeneous; the default is the
//! standard grading.

use crate::builders::{binomial, subsets_lex};
use crate::chain::BettiTable;
use crate::linalg::{rank_over_field, ScalarMatrix, SparseSystem};
use crate::ring::{Coeff, CoefficientField, Monomial, PolyRing, Polynomial};
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("size guard: {0}")]
    SizeGuard(String),
    #[error("generator {0} is zero or not homogeneous")]
    BadGenerator(usize),
    #[error("generator {0} is not homogeneous for the given multigrading")]
    NotMultihomogeneous(usize),
}

/// A list of nonzero homogeneous generators of an ideal.
#[derive(Clone, Debug)]
pub struct IdealBasis {
    ring: Arc<PolyRing>,
    gens: Vec<Polynomial>,
    degrees: Vec<u32>,
}

impl IdealBasis {
    pub fn new(ring: &Arc<PolyRing>, gens: Vec<Polynomial>) -> Result<Self, OracleError> {
        let mut degrees = Vec::with_capacity(gens.len());
        for (i, g) in gens.iter().enumerate() {
            match g.homogeneity() {
                crate::ring::Homogeneity::Degree(d) => degrees.push(d),
                _ => return Err(OracleError::BadGenerator(i)),
            }
        }
        Ok(IdealBasis { ring: ring.clone(), gens, degrees })
    }

    pub fn gens(&self) -> &[Polynomial] {
        &self.gens
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn max_degree(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }
}

/// An exact basis of the degree-`d` piece of an ideal: columns are
/// coefficient vectors over the monomial basis of `R_d`.
#[derive(Clone, Debug)]
pub struct DegreeSlice {
    pub degree: u32,
    pub basis: ScalarMatrix,
}

impl DegreeSlice {
    pub fn dim(&self) -> usize {
        self.basis.cols
    }
}

/// Exact k-basis of the degree-`d` piece via the Macaulay multiplication
/// matrix (columns `monomial * generator`, reduced to an independent set).
pub fn ideal_slice(gens: &IdealBasis, d: u32) -> DegreeSlice {
    let ring = &gens.ring;
    let field = ring.field().clone();
    let monos = ring.monomials_of_degree(d);
    let mono_index: HashMap<&Monomial, usize> =
        monos.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut cols: Vec<Vec<(usize, Coeff)>> = Vec::new();
    for (g, &dg) in gens.gens.iter().zip(&gens.degrees) {
        if dg > d {
            continue;
        }
        for mu in ring.monomials_of_degree(d - dg).iter() {
            let prod = g.mul_monomial(mu);
            let col: Vec<(usize, Coeff)> =
                prod.terms().map(|(m, c)| (mono_index[m], c.clone())).collect();
            cols.push(col);
        }
    }
    if cols.is_empty() {
        return DegreeSlice { degree: d, basis: ScalarMatrix::zero(&field, monos.len(), 0) };
    }
    let mut mat = ScalarMatrix::zero(&field, monos.len(), cols.len());
    for (c, col) in cols.iter().enumerate() {
        for (r, v) in col {
            mat.set(*r, c, v.clone());
        }
    }
    let pivots = mat.pivot_columns();
    let mut basis = ScalarMatrix::zero(&field, monos.len(), pivots.len());
    for (k, &c) in pivots.iter().enumerate() {
        for r in 0..monos.len() {
            basis.set(r, k, mat.get(r, c).clone());
        }
    }
    DegreeSlice { degree: d, basis }
}

/// Exact membership of a homogeneous polynomial, solved sparsely on the
/// union of supports (no full monomial enumeration).
pub fn is_member(f: &Polynomial, gens: &IdealBasis) -> bool {
    if f.is_zero() {
        return true;
    }
    let d = match f.homogeneity() {
        crate::ring::Homogeneity::Degree(d) => d,
        crate::ring::Homogeneity::Zero => return true,
        crate::ring::Homogeneity::Mixed => return false,
    };
    let ring = &gens.ring;
    let field = ring.field().clone();
    // columns: (generator, multiplier monomial); rows: support monomials
    let mut row_index: HashMap<Monomial, usize> = HashMap::new();
    let mut columns: Vec<Vec<(usize, Coeff)>> = Vec::new();
    for (g, &dg) in gens.gens.iter().zip(&gens.degrees) {
        if dg > d {
            continue;
        }
        for mu in ring.monomials_of_degree(d - dg).iter() {
            let mut col = Vec::with_capacity(g.num_terms());
            for (m, c) in g.terms() {
                let target = m.mul(mu);
                let next = row_index.len();
                let idx = *row_index.entry(target).or_insert(next);
                col.push((idx, c.clone()));
            }
            columns.push(col);
        }
    }
    for (m, _) in f.terms() {
        let next = row_index.len();
        row_index.entry(m.clone()).or_insert(next);
    }
    let nrows = row_index.len();
    let mut rows: Vec<Vec<(usize, Coeff)>> = vec![Vec::new(); nrows];
    for (cidx, col) in columns.iter().enumerate() {
        for (r, v) in col {
            rows[*r].push((cidx, v.clone()));
        }
    }
    let mut rhs = vec![field.zero(); nrows];
    for (m, c) in f.terms() {
        rhs[row_index[m]] = c.clone();
    }
    let mut sys = SparseSystem::new(&field, columns.len());
    for (r, row) in rows.into_iter().enumerate() {
        sys.push_row(row, rhs[r].clone());
    }
    sys.solve(|_| field.zero()).is_some()
}

/// Degree-truncated ideal equality: the two ideals agree in every degree
/// `<= dmax`.  Decided by mutual membership of the generators of degree
/// `<= dmax`, which is equivalent to slice-dimension equality plus mutual
/// membership degree by degree (membership of a generator certifies all of
/// its monomial multiples at once).
pub fn ideal_equal_upto(a: &IdealBasis, b: &IdealBasis, dmax: u32) -> bool {
    let within = |x: &IdealBasis, other: &IdealBasis| {
        x.gens
            .iter()
            .zip(&x.degrees)
            .filter(|(_, &d)| d <= dmax)
            .all(|(g, _)| is_member(g, other))
    };
    within(a, b) && within(b, a)
}

/// Basis of `{ r in R_d : r * k0 in K' }`, computed by solving the
/// membership system in degree `d + deg k0` and projecting the kernel onto
/// the `r` coordinates.
pub fn colon_slice(kprime: &IdealBasis, k0: &Polynomial, d: u32) -> DegreeSlice {
    let ring = &kprime.ring;
    let field = ring.field().clone();
    let dk0 = match k0.homogeneity() {
        crate::ring::Homogeneity::Degree(dd) => dd,
        _ => panic!("k0 must be nonzero homogeneous"),
    };
    let rd = ring.monomials_of_degree(d);
    let target_deg = d + dk0;
    // unknowns: r-coefficients first, then membership witnesses
    let mut row_index: HashMap<Monomial, usize> = HashMap::new();
    let mut columns: Vec<Vec<(usize, Coeff)>> = Vec::new();
    for mu in rd.iter() {
        let prod = k0.mul_monomial(mu);
        let mut col = Vec::with_capacity(prod.num_terms());
        for (m, c) in prod.terms() {
            let next = row_index.len();
            let idx = *row_index.entry(m.clone()).or_insert(next);
            col.push((idx, c.clone()));
        }
        columns.push(col);
    }
    let r_count = columns.len();
    for (g, &dg) in kprime.gens.iter().zip(&kprime.degrees) {
        if dg > target_deg {
            continue;
        }
        for mu in ring.monomials_of_degree(target_deg - dg).iter() {
            let mut col = Vec::with_capacity(g.num_terms());
            for (m, c) in g.terms() {
                let target = m.mul(mu);
                let next = row_index.len();
                let idx = *row_index.entry(target).or_insert(next);
                // negated: r*k0 - sum of witnesses = 0
                col.push((idx, c.neg()));
            }
            columns.push(col);
        }
    }
    let nrows = row_index.len();
    let mut rows: Vec<Vec<(usize, Coeff)>> = vec![Vec::new(); nrows];
    for (cidx, col) in columns.iter().enumerate() {
        for (r, v) in col {
            rows[*r].push((cidx, v.clone()));
        }
    }
    let mut sys = SparseSystem::new(&field, columns.len());
    for row in rows {
        sys.push_row(row, field.zero());
    }
    let kernel = sys.kernel_basis();
    // project onto the r-part and reduce to an independent set
    let mut mat = ScalarMatrix::zero(&field, rd.len(), kernel.len());
    for (c, vec) in kernel.iter().enumerate() {
        for r in 0..r_count {
            if !vec[r].is_zero() {
                mat.set(r, c, vec[r].clone());
            }
        }
    }
    let pivots = mat.pivot_columns();
    let mut basis = ScalarMatrix::zero(&field, rd.len(), pivots.len());
    for (k, &c) in pivots.iter().enumerate() {
        for r in 0..rd.len() {
            basis.set(r, k, mat.get(r, c).clone());
        }
    }
    DegreeSlice { degree: d, basis }
}

/// Dimension of `{ r in R_d : r * k0 in K' }` by quotient ranks on the
/// union of supports: `dim R_d - rank [M_k0 | Mac K'] + rank [Mac K']`,
/// where both Macaulay blocks live in degree `d + deg k0`.  No kernel basis
/// is materialized, which keeps many-variable cases cheap.
pub fn colon_dim_by_rank(kprime: &IdealBasis, k0: &Polynomial, d: u32) -> usize {
    let ring = &kprime.ring;
    let field = ring.field().clone();
    let dk0 = match k0.homogeneity() {
        crate::ring::Homogeneity::Degree(dd) => dd,
        _ => panic!("k0 must be nonzero homogeneous"),
    };
    let target_deg = d + dk0;
    let mut row_index: HashMap<Monomial, usize> = HashMap::new();
    let mut k0_cols: Vec<Vec<(usize, Coeff)>> = Vec::new();
    let mut kp_cols: Vec<Vec<(usize, Coeff)>> = Vec::new();
    for mu in ring.monomials_of_degree(d).iter() {
        let prod = k0.mul_monomial(mu);
        let mut col = Vec::with_capacity(prod.num_terms());
        for (m, c) in prod.terms() {
            let next = row_index.len();
            let idx = *row_index.entry(m.clone()).or_insert(next);
            col.push((idx, c.clone()));
        }
        k0_cols.push(col);
    }
    for (g, &dg) in kprime.gens.iter().zip(&kprime.degrees) {
        if dg > target_deg {
            continue;
        }
        for mu in ring.monomials_of_degree(target_deg - dg).iter() {
            let mut col = Vec::with_capacity(g.num_terms());
            for (m, c) in g.terms() {
                let target = m.mul(mu);
                let next = row_index.len();
                let idx = *row_index.entry(target).or_insert(next);
                col.push((idx, c.clone()));
            }
            kp_cols.push(col);
        }
    }
    let push_all = |cols: &[Vec<(usize, Coeff)>], sys: &mut SparseSystem| {
        let nrows = row_index.len();
        let mut rows: Vec<Vec<(usize, Coeff)>> = vec![Vec::new(); nrows];
        for (cidx, col) in cols.iter().enumerate() {
            for (r, v) in col {
                rows[*r].push((cidx, v.clone()));
            }
        }
        for row in rows {
            sys.push_row(row, field.zero());
        }
    };
    let mut joint = SparseSystem::new(&field, k0_cols.len() + kp_cols.len());
    {
        let mut cols = k0_cols.clone();
        cols.extend(kp_cols.iter().cloned());
        push_all(&cols, &mut joint);
    }
    let joint_rank = joint.rank();
    let mut kp_only = SparseSystem::new(&field, kp_cols.len());
    push_all(&kp_cols, &mut kp_only);
    let kp_rank = kp_only.rank();
    let dim_rd = ring.monomials_of_degree(d).len();
    dim_rd - (joint_rank - kp_rank)
}

/// Support-indexed dimension of the degree-`d` piece of an ideal.
pub fn ideal_dim_sparse(gens: &IdealBasis, d: u32) -> usize {
    let ring = &gens.ring;
    let field = ring.field().clone();
    let mut row_index: HashMap<Monomial, usize> = HashMap::new();
    let mut cols: Vec<Vec<(usize, Coeff)>> = Vec::new();
    for (g, &dg) in gens.gens.iter().zip(&gens.degrees) {
        if dg > d {
            continue;
        }
        for mu in ring.monomials_of_degree(d - dg).iter() {
            let mut col = Vec::with_capacity(g.num_terms());
            for (m, c) in g.terms() {
                let target = m.mul(mu);
                let next = row_index.len();
                let idx = *row_index.entry(target).or_insert(next);
                col.push((idx, c.clone()));
            }
            cols.push(col);
        }
    }
    let nrows = row_index.len();
    let mut rows: Vec<Vec<(usize, Coeff)>> = vec![Vec::new(); nrows];
    for (cidx, col) in cols.iter().enumerate() {
        for (r, v) in col {
            rows[*r].push((cidx, v.clone()));
        }
    }
    let mut sys = SparseSystem::new(&field, cols.len());
    for row in rows {
        sys.push_row(row, field.zero());
    }
    sys.rank()
}

/// Check that every element of a colon slice lies in the degree-`d` piece
/// of the ideal generated by `a`.
pub fn colon_slice_contained(slice: &DegreeSlice, a: &IdealBasis) -> bool {
    let ring = &a.ring;
    let rd = ring.monomials_of_degree(slice.degree);
    for c in 0..slice.basis.cols {
        let poly = Polynomial::from_terms(
            ring,
            (0..rd.len()).map(|r| (rd[r].clone(), slice.basis.get(r, c).clone())),
        );
        if !is_member(&poly, a) {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Koszul-homology Betti numbers.
// ---------------------------------------------------------------------------

/// A positive multigrading on the ring variables; the standard grading is
/// the all-ones weight.  Ideals homogeneous for a finer grading split the
/// homology into many small components, which keeps the slice ranks cheap.
#[derive(Clone, Debug)]
pub struct Multigrading {
    /// `weights[v]` is the multidegree of variable `v`.
    pub weights: Vec<Vec<u32>>,
}

impl Multigrading {
    pub fn standard(nvars: usize) -> Self {
        Multigrading { weights: vec![vec![1]; nvars] }
    }

    /// Row-plus-column bidegree of the generic `n x m` matrix ring with
    /// variables ordered row-major.
    pub fn generic_matrix(n: usize, m: usize) -> Self {
        let mut weights = Vec::with_capacity(n * m);
        for i in 0..n {
            for j in 0..m {
                let mut w = vec![0u32; n + m];
                w[i] = 1;
                w[n + j] = 1;
                weights.push(w);
            }
        }
        Multigrading { weights }
    }

    /// `deg x_ij = e_i + e_j` for the generic skew ring on `x_ij`, `i < j`.
    pub fn generic_skew(n: usize) -> Self {
        let mut weights = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let mut w = vec![0u32; n];
                w[i] = 1;
                w[j] = 1;
                weights.push(w);
            }
        }
        Multigrading { weights }
    }

    pub fn mdeg_monomial(&self, m: &Monomial) -> Vec<u32> {
        let dim = self.weights.first().map_or(0, |w| w.len());
        let mut acc = vec![0u32; dim];
        for (v, &e) in m.0.iter().enumerate() {
            if e > 0 {
                for (k, w) in self.weights[v].iter().enumerate() {
                    acc[k] += w * e as u32;
                }
            }
        }
        acc
    }

    pub fn mdeg_set(&self, vars: &[usize]) -> Vec<u32> {
        let dim = self.weights.first().map_or(0, |w| w.len());
        let mut acc = vec![0u32; dim];
        for &v in vars {
            for (k, w) in self.weights[v].iter().enumerate() {
                acc[k] += w;
            }
        }
        acc
    }

    pub fn poly_mdeg(&self, p: &Polynomial) -> Option<Vec<u32>> {
        let mut it = p.terms();
        let first = self.mdeg_monomial(it.next()?.0);
        for (m, _) in it {
            if self.mdeg_monomial(m) != first {
                return None;
            }
        }
        Some(first)
    }
}

fn add_mdeg(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Rank of a set of sparse columns over the field (rows indexed locally).
fn rank_sparse_columns(
    field: &CoefficientField,
    nrows: usize,
    columns: &[Vec<(usize, Coeff)>],
) -> usize {
    match field {
        CoefficientField::PrimeField(p) => {
            let p = *p;
            let mut rows: Vec<Vec<u64>> = vec![vec![0; columns.len()]; nrows];
            for (c, col) in columns.iter().enumerate() {
                for (r, v) in col {
                    let Coeff::Fp { v, .. } = v else { unreachable!() };
                    rows[*r][c] = *v;
                }
            }
            let ncols = columns.len();
            let mut rank = 0;
            for col in 0..ncols {
                let Some(pr) = (rank..nrows).find(|&r| rows[r][col] != 0) else { continue };
                rows.swap(rank, pr);
                let inv = fp_inv(rows[rank][col], p);
                for c in col..ncols {
                    rows[rank][c] = rows[rank][c] * inv % p;
                }
                for r in 0..nrows {
                    if r != rank && rows[r][col] != 0 {
                        let f = rows[r][col];
                        for c in col..ncols {
                            let sub = f * rows[rank][c] % p;
                            rows[r][c] = (rows[r][c] + p - sub) % p;
                        }
                    }
                }
                rank += 1;
                if rank == nrows {
                    break;
                }
            }
            rank
        }
        CoefficientField::Rationals => {
            let mut mat = ScalarMatrix::zero(field, nrows, columns.len());
            for (c, col) in columns.iter().enumerate() {
                for (r, v) in col {
                    mat.set(*r, c, v.clone());
                }
            }
            rank_over_field(&mat)
        }
    }
}

fn fp_inv(a: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// Reduced column bases of the ideal slices, bucketed by multidegree.
struct SliceBases {
    /// per degree: multidegree -> reduced bucket basis
    by_degree: Vec<HashMap<Vec<u32>, BucketBasis>>,
    dims: Vec<usize>,
}

struct BucketBasis {
    /// global monomial index -> local row
    rows: HashMap<usize, usize>,
    /// reduced columns, sorted by leading local row
    basis: Vec<Vec<(usize, Coeff)>>,
}

fn reduce_column(
    field: &CoefficientField,
    basis: &[Vec<(usize, Coeff)>],
    mut col: HashMap<usize, Coeff>,
) -> Option<Vec<(usize, Coeff)>> {
    for b in basis {
        let lead = b[0].0;
        if let Some(f) = col.get(&lead).cloned() {
            for (r, v) in b {
                let delta = f.mul(v);
                let entry = col.entry(*r).or_insert_with(|| field.zero());
                *entry = entry.sub(&delta);
            }
            col.retain(|_, c| !c.is_zero());
        }
    }
    let mut v: Vec<(usize, Coeff)> = col.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by_key(|(r, _)| *r);
    let inv = v[0].1.inv();
    for (_, c) in &mut v {
        *c = c.mul(&inv);
    }
    Some(v)
}

fn slice_bases(
    gens: &IdealBasis,
    grading: &Multigrading,
    dmax: u32,
) -> Result<SliceBases, OracleError> {
    let ring = &gens.ring;
    let field = ring.field().clone();
    for (i, g) in gens.gens.iter().enumerate() {
        if grading.poly_mdeg(g).is_none() {
            return Err(OracleError::NotMultihomogeneous(i));
        }
    }
    let mut by_degree = Vec::with_capacity(dmax as usize + 1);
    let mut dims = Vec::with_capacity(dmax as usize + 1);
    for d in 0..=dmax {
        let monos = ring.monomials_of_degree(d);
        let mono_index: HashMap<&Monomial, usize> =
            monos.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut buckets: HashMap<Vec<u32>, BucketBasis> = HashMap::new();
        for (g, &dg) in gens.gens.iter().zip(&gens.degrees) {
            if dg > d {
                continue;
            }
            for mu in ring.monomials_of_degree(d - dg).iter() {
                let prod = g.mul_monomial(mu);
                let Some((first, _)) = prod.terms().next() else { continue };
                let key = grading.mdeg_monomial(first);
                let bucket = buckets
                    .entry(key)
                    .or_insert_with(|| BucketBasis { rows: HashMap::new(), basis: Vec::new() });
                let mut col: HashMap<usize, Coeff> = HashMap::new();
                for (m, c) in prod.terms() {
                    let g_idx = mono_index[m];
                    let next = bucket.rows.len();
                    let local = *bucket.rows.entry(g_idx).or_insert(next);
                    col.insert(local, c.clone());
                }
                if let Some(reduced) = reduce_column(&field, &bucket.basis, col) {
                    bucket.basis.push(reduced);
                    bucket.basis.sort_by_key(|b| b[0].0);
                }
            }
        }
        dims.push(buckets.values().map(|b| b.basis.len()).sum());
        by_degree.push(buckets);
    }
    Ok(SliceBases { by_degree, dims })
}

fn dim_j_of(slices: &SliceBases, d: i64) -> usize {
    if d < 0 || d as usize >= slices.dims.len() {
        0
    } else {
        slices.dims[d as usize]
    }
}

/// Graded Betti numbers `beta_(i,j)` of `R/J` for `i <= imax`, `j <= dmax`,
/// by exact dimension counting of the homology of the Koszul complex on the
/// ring variables tensored with `R/J`.
///
/// `grading` must make every generator multihomogeneous; pass
/// [`Multigrading::standard`] when nothing finer applies.  Size guard:
/// at most 10 variables and `dmax <= 12`.
pub fn koszul_betti(
    gens: &IdealBasis,
    imax: usize,
    dmax: u32,
    grading: &Multigrading,
) -> Result<BettiTable, OracleError> {
    let ring = &gens.ring;
    let v = ring.nvars();
    if v > 10 {
        return Err(OracleError::SizeGuard(format!("{v} variables exceeds 10")));
    }
    if dmax > 12 {
        return Err(OracleError::SizeGuard(format!("dmax {dmax} exceeds 12")));
    }
    let field = ring.field().clone();
    let slices = slice_bases(gens, grading, dmax)?;
    let dim_r =
        |d: i64| -> usize { if d < 0 { 0 } else { ring.monomials_of_degree(d as u32).len() } };

    let mut rank_cache: HashMap<(usize, i64), usize> = HashMap::new();
    let mut rank_dbar = |i: usize, j: i64| -> usize {
        if let Some(&r) = rank_cache.get(&(i, j)) {
            return r;
        }
        let value = rank_dbar_compute(gens, grading, &field, &slices, i, j);
        rank_cache.insert((i, j), value);
        value
    };

    let mut table = BettiTable::new();
    for i in 0..=imax {
        for j in 0..=(dmax as i64) {
            let middle = binomial(v as i64, i as i64) as i64
                * (dim_r(j - i as i64) as i64 - dim_j_of(&slices, j - i as i64) as i64);
            if middle == 0 {
                continue;
            }
            let r_in = rank_dbar(i, j) as i64;
            let r_out = if i < v { rank_dbar(i + 1, j) as i64 } else { 0 };
            let beta = middle - r_in - r_out;
            debug_assert!(beta >= 0, "negative homology dimension at ({i},{j})");
            if beta > 0 {
                table.set(i, j, beta as u128);
            }
        }
    }
    Ok(table)
}

/// Rank of the induced map `(K_i (x) R/J)_j -> (K_(i-1) (x) R/J)_j`, in
/// ambient bases: `rank [ ambient d_i | span (K_(i-1) (x) J)_j ]` minus
/// `C(v, i-1) * dim J_(j-i+1)`, summed over multidegree components.
fn rank_dbar_compute(
    gens: &IdealBasis,
    grading: &Multigrading,
    field: &CoefficientField,
    slices: &SliceBases,
    i: usize,
    j: i64,
) -> usize {
    if i == 0 {
        return 0;
    }
    let ring = &gens.ring;
    let v = ring.nvars();
    if i > v {
        return 0;
    }
    let src_mono_deg = j - i as i64;
    let tgt_mono_deg = j - i as i64 + 1;
    if src_mono_deg < 0 {
        return 0;
    }
    let src_monos = ring.monomials_of_degree(src_mono_deg as u32);
    let tgt_monos = ring.monomials_of_degree(tgt_mono_deg as u32);
    let tgt_mono_index: HashMap<&Monomial, usize> =
        tgt_monos.iter().enumerate().map(|(k, m)| (m, k)).collect();
    let src_sets = subsets_lex(v, i);
    let tgt_sets = subsets_lex(v, i - 1);
    let tgt_set_index: HashMap<&Vec<usize>, usize> =
        tgt_sets.iter().enumerate().map(|(k, s)| (s, k)).collect();
    let set_mdegs: Vec<Vec<u32>> = src_sets.iter().map(|s| grading.mdeg_set(s)).collect();
    let tgt_set_mdegs: Vec<Vec<u32>> = tgt_sets.iter().map(|s| grading.mdeg_set(s)).collect();
    let src_mono_mdegs: Vec<Vec<u32>> =
        src_monos.iter().map(|m| grading.mdeg_monomial(m)).collect();

    struct Bucket {
        rows: HashMap<(usize, usize), usize>,
        cols: Vec<Vec<(usize, Coeff)>>,
        b_count: usize,
    }
    let mut buckets: HashMap<Vec<u32>, Bucket> = HashMap::new();
    let one = field.one();
    for (si, s) in src_sets.iter().enumerate() {
        for (mi, mono) in src_monos.iter().enumerate() {
            let key = add_mdeg(&set_mdegs[si], &src_mono_mdegs[mi]);
            let bucket = buckets.entry(key).or_insert_with(|| Bucket {
                rows: HashMap::new(),
                cols: Vec::new(),
                b_count: 0,
            });
            let mut col = Vec::with_capacity(i);
            for (pos, &var) in s.iter().enumerate() {
                let mut rest = s.clone();
                rest.remove(pos);
                let tset = tgt_set_index[&rest];
                let prod = mono.mul(&Monomial::var(v, var));
                let tmono = tgt_mono_index[&prod];
                let next = bucket.rows.len();
                let local = *bucket.rows.entry((tset, tmono)).or_insert(next);
                let val = if pos % 2 == 0 { one.clone() } else { one.neg() };
                col.push((local, val));
            }
            bucket.cols.push(col);
        }
    }
    // spanning columns of (K_(i-1) (x) J)_j: e_T (x) reduced J-basis vectors
    if tgt_mono_deg >= 0 && (tgt_mono_deg as usize) < slices.by_degree.len() {
        let jslices = &slices.by_degree[tgt_mono_deg as usize];
        for (ti, _t) in tgt_sets.iter().enumerate() {
            for (mu, bucket_basis) in jslices.iter() {
                if bucket_basis.basis.is_empty() {
                    continue;
                }
                let key = add_mdeg(&tgt_set_mdegs[ti], mu);
                let bucket = buckets.entry(key).or_insert_with(|| Bucket {
                    rows: HashMap::new(),
                    cols: Vec::new(),
                    b_count: 0,
                });
                let mut inv: Vec<usize> = vec![0; bucket_basis.rows.len()];
                for (g, l) in &bucket_basis.rows {
                    inv[*l] = *g;
                }
                for bvec in &bucket_basis.basis {
                    let mut col = Vec::with_capacity(bvec.len());
                    for (local, c) in bvec {
                        let tmono = inv[*local];
                        let next = bucket.rows.len();
                        let row = *bucket.rows.entry((ti, tmono)).or_insert(next);
                        col.push((row, c.clone()));
                    }
                    bucket.cols.push(col);
                    bucket.b_count += 1;
                }
            }
        }
    }
    let mut total = 0usize;
    let mut b_total = 0usize;
    for bucket in buckets.values() {
        total += rank_sparse_columns(field, bucket.rows.len(), &bucket.cols);
        b_total += bucket.b_count;
    }
    debug_assert_eq!(b_total, tgt_sets.len() * dim_j_of(slices, tgt_mono_deg));
    total - b_total
}
