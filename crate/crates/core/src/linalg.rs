//! Exact linear algebra over the coefficient field and, degree-slice by
//! degree-slice, over the polynomial ring.
//!
//! Scalar elimination is plain Gaussian over GF(p) and fraction-free
//! (Bareiss) over the rationals.  Homogeneous systems `a * X = b` over the
//! ring are solved by expanding each unknown entry over the monomial basis
//! of its forced degree and running a sparse elimination on the resulting
//! scalar system.

use crate::ring::{Coeff, CoefficientField, Monomial, PolyRing, Polynomial, RingError};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix dimensions {0}x{1} and {2}x{3} are incompatible")]
    Shape(usize, usize, usize, usize),
    #[error("entries belong to different rings")]
    RingMismatch,
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Dense matrix of exact field elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalarMatrix {
    pub rows: usize,
    pub cols: usize,
    field: CoefficientField,
    data: Vec<Coeff>,
}

impl ScalarMatrix {
    pub fn zero(field: &CoefficientField, rows: usize, cols: usize) -> Self {
        ScalarMatrix {
            rows,
            cols,
            field: field.clone(),
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: &CoefficientField, n: usize) -> Self {
        let mut m = Self::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: &CoefficientField, rows: Vec<Vec<Coeff>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        ScalarMatrix {
            rows: r,
            cols: c,
            field: field.clone(),
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64_rows(field: &CoefficientField, rows: &[&[i64]]) -> Self {
        Self::from_rows(
            field,
            rows.iter()
                .map(|r| r.iter().map(|&n| field.from_i64(n)).collect())
                .collect(),
        )
    }

    pub fn field(&self) -> &CoefficientField {
        &self.field
    }

    pub fn get(&self, r: usize, c: usize) -> &Coeff {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Coeff) {
        self.data[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> ScalarMatrix {
        let mut out = Self::zero(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn mul(&self, other: &ScalarMatrix) -> Result<ScalarMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape(self.rows, self.cols, other.rows, other.cols));
        }
        let mut out = Self::zero(&self.field, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let v = out.get(r, c).add(&a.mul(other.get(k, c)));
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    /// Column indices of a maximal independent set of columns.
    pub fn pivot_columns(&self) -> Vec<usize> {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row >= m.rows {
                break;
            }
            let Some(pr) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            for c in 0..m.cols {
                let tmp = m.get(row, c).clone();
                m.set(row, c, m.get(pr, c).clone());
                m.set(pr, c, tmp);
            }
            let inv = m.get(row, col).inv();
            for c in col..m.cols {
                m.set(row, c, m.get(row, c).mul(&inv));
            }
            for r in 0..m.rows {
                if r != row && !m.get(r, col).is_zero() {
                    let f = m.get(r, col).clone();
                    for c in col..m.cols {
                        let v = m.get(r, c).sub(&f.mul(m.get(row, c)));
                        m.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }
}

/// Exact rank; fraction-free Bareiss elimination over the rationals and
/// ordinary Gaussian elimination over a prime field.
pub fn rank_over_field(m: &ScalarMatrix) -> usize {
    match m.field {
        CoefficientField::Rationals => rank_bareiss(m),
        CoefficientField::PrimeField(p) => rank_fp(m, p),
    }
}

fn rank_fp(m: &ScalarMatrix, p: u64) -> usize {
    let mut a: Vec<Vec<u64>> = (0..m.rows)
        .map(|r| {
            (0..m.cols)
                .map(|c| match m.get(r, c) {
                    Coeff::Fp { v, .. } => *v,
                    Coeff::Rat(_) => unreachable!(),
                })
                .collect()
        })
        .collect();
    let mut rank = 0;
    for col in 0..m.cols {
        let Some(pr) = (rank..m.rows).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(rank, pr);
        let inv = mod_inv(a[rank][col], p);
        for c in col..m.cols {
            a[rank][c] = a[rank][c] * inv % p;
        }
        for r in 0..m.rows {
            if r != rank && a[r][col] != 0 {
                let f = a[r][col];
                for c in col..m.cols {
                    let sub = f * a[rank][c] % p;
                    a[r][c] = (a[r][c] + p - sub) % p;
                }
            }
        }
        rank += 1;
        if rank == m.rows {
            break;
        }
    }
    rank
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // Fermat, p prime.
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

fn rank_bareiss(m: &ScalarMatrix) -> usize {
    // Clear denominators row by row, then run fraction-free elimination.
    let mut a: Vec<Vec<BigInt>> = (0..m.rows)
        .map(|r| {
            let rats: Vec<&BigRational> = (0..m.cols)
                .map(|c| match m.get(r, c) {
                    Coeff::Rat(q) => q,
                    Coeff::Fp { .. } => unreachable!(),
                })
                .collect();
            let mut lcm = BigInt::one();
            for q in &rats {
                let d = q.denom();
                let g = num_integer::Integer::gcd(&lcm, d);
                lcm = &lcm / g * d;
            }
            rats.iter().map(|q| q.numer() * (&lcm / q.denom())).collect()
        })
        .collect();
    let (rows, cols) = (m.rows, m.cols);
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..cols {
        let Some(pr) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, pr);
        let pivot = a[rank][col].clone();
        for r in rank + 1..rows {
            for c in col + 1..cols {
                let v = (&a[r][c] * &pivot - &a[r][col] * &a[rank][c]) / &prev;
                a[r][c] = v;
            }
            a[r][col] = BigInt::zero();
        }
        prev = pivot;
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Solve `a * X = b` exactly over the field.  Free variables are set to
/// zero; returns `None` when the system is inconsistent.
pub fn solve_scalar(a: &ScalarMatrix, b: &ScalarMatrix) -> Option<ScalarMatrix> {
    let zero = a.field.zero();
    solve_scalar_with(a, b, |_| zero.clone())
}

/// As [`solve_scalar`] with a caller-supplied value for each free column.
pub fn solve_scalar_with(
    a: &ScalarMatrix,
    b: &ScalarMatrix,
    mut free_value: impl FnMut(usize) -> Coeff,
) -> Option<ScalarMatrix> {
    assert_eq!(a.rows, b.rows, "row mismatch in solve");
    let field = &a.field;
    // Gauss-Jordan on the augmented matrix [a | b].
    let mut m = ScalarMatrix::zero(field, a.rows, a.cols + b.cols);
    for r in 0..a.rows {
        for c in 0..a.cols {
            m.set(r, c, a.get(r, c).clone());
        }
        for c in 0..b.cols {
            m.set(r, a.cols + c, b.get(r, c).clone());
        }
    }
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; a.cols];
    let mut row = 0;
    for col in 0..a.cols {
        if row >= m.rows {
            break;
        }
        let Some(pr) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
            continue;
        };
        for c in 0..m.cols {
            let tmp = m.get(row, c).clone();
            m.set(row, c, m.get(pr, c).clone());
            m.set(pr, c, tmp);
        }
        let inv = m.get(row, col).inv();
        for c in col..m.cols {
            m.set(row, c, m.get(row, c).mul(&inv));
        }
        for r in 0..m.rows {
            if r != row && !m.get(r, col).is_zero() {
                let f = m.get(r, col).clone();
                for c in col..m.cols {
                    let v = m.get(r, c).sub(&f.mul(m.get(row, c)));
                    m.set(r, c, v);
                }
            }
        }
        pivot_of_col[col] = Some(row);
        row += 1;
    }
    // Consistency: rows past the pivot rows must have zero right-hand side.
    for r in row..m.rows {
        for c in 0..b.cols {
            if !m.get(r, a.cols + c).is_zero() {
                return None;
            }
        }
    }
    let mut x = ScalarMatrix::zero(field, a.cols, b.cols);
    let free_vals: Vec<Option<Coeff>> = (0..a.cols)
        .map(|c| if pivot_of_col[c].is_none() { Some(free_value(c)) } else { None })
        .collect();
    for col in 0..a.cols {
        match pivot_of_col[col] {
            None => {
                let v = free_vals[col].clone().unwrap();
                for c in 0..b.cols {
                    x.set(col, c, v.clone());
                }
            }
            Some(pr) => {
                for c in 0..b.cols {
                    let mut v = m.get(pr, a.cols + c).clone();
                    for (fc, fv) in free_vals.iter().enumerate() {
                        if let Some(fv) = fv {
                            if !fv.is_zero() && !m.get(pr, fc).is_zero() {
                                v = v.sub(&m.get(pr, fc).mul(fv));
                            }
                        }
                    }
                    x.set(col, c, v);
                }
            }
        }
    }
    Some(x)
}

/// Dense matrix of polynomials sharing one ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    pub rows: usize,
    pub cols: usize,
    ring: Arc<PolyRing>,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn zero(ring: &Arc<PolyRing>, rows: usize, cols: usize) -> Self {
        PolyMatrix {
            rows,
            cols,
            ring: ring.clone(),
            entries: vec![Polynomial::zero(ring); rows * cols],
        }
    }

    pub fn from_rows(ring: &Arc<PolyRing>, rows: Vec<Vec<Polynomial>>) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(LinalgError::Shape(r, c, r, 0));
        }
        let entries: Vec<Polynomial> = rows.into_iter().flatten().collect();
        if entries.iter().any(|p| **p.ring() != **ring) {
            return Err(LinalgError::RingMismatch);
        }
        Ok(PolyMatrix { rows: r, cols: c, ring: ring.clone(), entries })
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn get(&self, r: usize, c: usize) -> &Polynomial {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Polynomial) {
        assert!(**v.ring() == *self.ring, "ring mismatch");
        self.entries[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|p| p.is_zero())
    }

    pub fn neg(&self) -> PolyMatrix {
        let mut out = self.clone();
        for e in &mut out.entries {
            *e = e.neg();
        }
        out
    }

    pub fn add(&self, other: &PolyMatrix) -> Result<PolyMatrix, LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::Shape(self.rows, self.cols, other.rows, other.cols));
        }
        let mut out = self.clone();
        for (e, o) in out.entries.iter_mut().zip(&other.entries) {
            *e = e.add(o);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &PolyMatrix) -> Result<PolyMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape(self.rows, self.cols, other.rows, other.cols));
        }
        let mut out = PolyMatrix::zero(&self.ring, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.get(r, c).add(&a.mul(b));
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> PolyMatrix {
        let mut out = PolyMatrix::zero(&self.ring, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).clone());
            }
        }
        out
    }

    /// Evaluate every entry at the point.
    pub fn specialize(&self, point: &[Coeff]) -> Result<ScalarMatrix, LinalgError> {
        let mut out = ScalarMatrix::zero(self.ring.field(), self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c).specialize(point)?);
            }
        }
        Ok(out)
    }
}

/// Sample a uniform point for the ring's field.  Over the rationals the
/// coordinates are drawn from a large integer window.
pub fn random_point(ring: &PolyRing, rng: &mut ChaCha8Rng) -> Vec<Coeff> {
    (0..ring.nvars())
        .map(|_| match ring.field() {
            CoefficientField::Rationals => {
                ring.field().from_i64(rng.gen_range(-1_000_000i64..=1_000_000))
            }
            CoefficientField::PrimeField(p) => {
                let v = rng.gen_range(0..*p);
                Coeff::Fp { v, p: *p }
            }
        })
        .collect()
}

/// Rank of the specialization at a seeded random point.  Always a lower
/// bound for the rank over the fraction field; equal with high probability.
pub fn rank_at_random_point(m: &PolyMatrix, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = random_point(&m.ring, &mut rng);
    let sm = m.specialize(&point).expect("dimension fixed by ring");
    rank_over_field(&sm)
}

// ---------------------------------------------------------------------------
// Sparse exact elimination.
//
// Rows are hash maps column -> coefficient.  Pivots are chosen to limit
// fill-in (fewest-entries column, then fewest-entries row), which keeps the
// Macaulay-style systems produced by the degree-slice solver cheap.
// ---------------------------------------------------------------------------

/// A sparse linear system A x = rhs over an exact field; columns indexed
/// `0..ncols`, rows appended freely.
pub struct SparseSystem {
    pub ncols: usize,
    field: CoefficientField,
    rows: Vec<HashMap<usize, Coeff>>,
    rhs: Vec<Coeff>,
}

impl SparseSystem {
    pub fn new(field: &CoefficientField, ncols: usize) -> Self {
        SparseSystem { ncols, field: field.clone(), rows: Vec::new(), rhs: Vec::new() }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn push_row(&mut self, entries: impl IntoIterator<Item = (usize, Coeff)>, rhs: Coeff) {
        let mut row = HashMap::new();
        for (c, v) in entries {
            debug_assert!(c < self.ncols);
            if v.is_zero() {
                continue;
            }
            match row.entry(c) {
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(v);
                }
                std::collections::hash_map::Entry::Occupied(mut e) => {
                    let s = e.get().add(&v);
                    if s.is_zero() {
                        e.remove();
                    } else {
                        e.insert(s);
                    }
                }
            }
        }
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    fn eliminate(&mut self) -> Elimination {
        let nrows = self.rows.len();
        let mut col_count = vec![0usize; self.ncols];
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); self.ncols];
        for (r, row) in self.rows.iter().enumerate() {
            for &c in row.keys() {
                col_count[c] += 1;
                col_rows[c].push(r);
            }
        }
        let mut row_active = vec![true; nrows];
        let mut col_pivot_row: Vec<Option<usize>> = vec![None; self.ncols];
        let mut pivot_order: Vec<(usize, usize)> = Vec::new();
        loop {
            // active column with fewest active rows
            let mut best: Option<(usize, usize)> = None;
            for c in 0..self.ncols {
                if col_pivot_row[c].is_some() || col_count[c] == 0 {
                    continue;
                }
                if best.is_none_or(|(bc, _)| col_count[c] < bc) {
                    best = Some((col_count[c], c));
                    if col_count[c] == 1 {
                        break;
                    }
                }
            }
            let Some((_, col)) = best else { break };
            // sparsest active row containing col
            col_rows[col].retain(|&r| row_active[r] && self.rows[r].contains_key(&col));
            let pr = *col_rows[col]
                .iter()
                .min_by_key(|&&r| self.rows[r].len())
                .expect("column count positive");
            let inv = self.rows[pr][&col].inv();
            let prow_entries: Vec<(usize, Coeff)> = {
                let row = &mut self.rows[pr];
                for v in row.values_mut() {
                    *v = v.mul(&inv);
                }
                self.rhs[pr] = self.rhs[pr].mul(&inv);
                row.iter().map(|(c, v)| (*c, v.clone())).collect()
            };
            let prhs = self.rhs[pr].clone();
            let victims: Vec<usize> = col_rows[col].iter().copied().filter(|&r| r != pr).collect();
            for r in victims {
                if !self.rows[r].contains_key(&col) {
                    continue;
                }
                let f = self.rows[r][&col].clone();
                for (c, v) in &prow_entries {
                    let delta = f.mul(v);
                    match self.rows[r].entry(*c) {
                        std::collections::hash_map::Entry::Vacant(e) => {
                            e.insert(delta.neg());
                            col_count[*c] += 1;
                            col_rows[*c].push(r);
                        }
                        std::collections::hash_map::Entry::Occupied(mut e) => {
                            let s = e.get().sub(&delta);
                            if s.is_zero() {
                                e.remove();
                                col_count[*c] -= 1;
                            } else {
                                e.insert(s);
                            }
                        }
                    }
                }
                self.rhs[r] = self.rhs[r].sub(&f.mul(&prhs));
            }
            row_active[pr] = false;
            for &c in self.rows[pr].keys() {
                col_count[c] -= 1;
            }
            col_pivot_row[col] = Some(pr);
            pivot_order.push((col, pr));
        }
        Elimination { row_active, col_pivot_row, pivot_order }
    }

    /// Eliminate and return a solution with free variables chosen by
    /// `free_value`, or `None` when inconsistent.
    pub fn solve(mut self, mut free_value: impl FnMut(usize) -> Coeff) -> Option<Vec<Coeff>> {
        let elim = self.eliminate();
        for (r, active) in elim.row_active.iter().enumerate() {
            if *active && !self.rhs[r].is_zero() {
                return None;
            }
        }
        let mut x = vec![self.field.zero(); self.ncols];
        for c in 0..self.ncols {
            if elim.col_pivot_row[c].is_none() {
                x[c] = free_value(c);
            }
        }
        // pivot rows may still reference later pivot columns; resolve in
        // reverse elimination order
        for &(col, pr) in elim.pivot_order.iter().rev() {
            let mut v = self.rhs[pr].clone();
            for (c, a) in &self.rows[pr] {
                if *c != col {
                    v = v.sub(&a.mul(&x[*c]));
                }
            }
            x[col] = v;
        }
        Some(x)
    }

    /// Rank of the coefficient matrix (the right-hand side is ignored).
    pub fn rank(mut self) -> usize {
        let zero = self.field.zero();
        for v in &mut self.rhs {
            *v = zero.clone();
        }
        self.eliminate().pivot_order.len()
    }

    /// Basis of the kernel of the coefficient matrix, one vector per free
    /// column.
    pub fn kernel_basis(mut self) -> Vec<Vec<Coeff>> {
        let zero = self.field.zero();
        for v in &mut self.rhs {
            *v = zero.clone();
        }
        let elim = self.eliminate();
        let free_cols: Vec<usize> =
            (0..self.ncols).filter(|&c| elim.col_pivot_row[c].is_none()).collect();
        let mut basis = Vec::with_capacity(free_cols.len());
        for &fc in &free_cols {
            let mut x = vec![self.field.zero(); self.ncols];
            x[fc] = self.field.one();
            for &(col, pr) in elim.pivot_order.iter().rev() {
                let mut v = self.field.zero();
                for (c, a) in &self.rows[pr] {
                    if *c != col {
                        v = v.sub(&a.mul(&x[*c]));
                    }
                }
                x[col] = v;
            }
            basis.push(x);
        }
        basis
    }
}

struct Elimination {
    row_active: Vec<bool>,
    col_pivot_row: Vec<Option<usize>>,
    pivot_order: Vec<(usize, usize)>,
}

/// Solve `a * X = b` where `a` and `b` are homogeneous against the given
/// generator degrees (entry `(r,c)` of a matrix is zero or homogeneous of
/// degree `col[c] - row[r]`).  The unknown `X` has column degrees
/// `bcol_degrees` against row degrees `acol_degrees`; each entry is solved
/// on the monomial basis of its forced degree, degree slice by degree slice.
///
/// Free coefficients default to zero; pass an `rng` to draw them uniformly
/// instead, which yields an independent random point of the affine solution
/// space.  The returned matrix always satisfies `a * X = b` exactly.
pub fn solve_poly_homogeneous(
    a: &PolyMatrix,
    b: &PolyMatrix,
    row_degrees: &[i64],
    acol_degrees: &[i64],
    bcol_degrees: &[i64],
    mut rng: Option<&mut ChaCha8Rng>,
) -> Option<PolyMatrix> {
    assert_eq!(a.rows, b.rows, "target rank mismatch");
    assert_eq!(a.rows, row_degrees.len());
    assert_eq!(a.cols, acol_degrees.len());
    assert_eq!(b.cols, bcol_degrees.len());
    let ring = a.ring();
    let field = ring.field().clone();
    let mut x = PolyMatrix::zero(ring, a.cols, b.cols);
    for xc in 0..b.cols {
        // unknown column: entries x_i of degree bcol[xc] - acol[i]
        let entry_degs: Vec<Option<u32>> = acol_degrees
            .iter()
            .map(|&d| {
                let delta = bcol_degrees[xc] - d;
                if delta < 0 {
                    None
                } else {
                    Some(delta as u32)
                }
            })
            .collect();
        let mut offsets = Vec::with_capacity(a.cols);
        let mut total = 0usize;
        let mut bases: Vec<Option<Arc<Vec<Monomial>>>> = Vec::with_capacity(a.cols);
        for d in &entry_degs {
            offsets.push(total);
            match d {
                None => bases.push(None),
                Some(d) => {
                    let basis = ring.monomials_of_degree(*d);
                    total += basis.len();
                    bases.push(Some(basis));
                }
            }
        }
        let mut sys = SparseSystem::new(&field, total);
        for r in 0..a.rows {
            // equation: sum_i a[r,i] * x_i = b[r,xc] on the degree slice
            let eq_deg = bcol_degrees[xc] - row_degrees[r];
            let rhs_poly = b.get(r, xc);
            if eq_deg < 0 {
                if !rhs_poly.is_zero() {
                    return None;
                }
                continue;
            }
            let mut eq_rows: HashMap<Monomial, (Vec<(usize, Coeff)>, Coeff)> = HashMap::new();
            for i in 0..a.cols {
                let ari = a.get(r, i);
                if ari.is_zero() {
                    continue;
                }
                let Some(basis) = &bases[i] else { continue };
                for (k, mono) in basis.iter().enumerate() {
                    for (am, ac) in ari.terms() {
                        let target = am.mul(mono);
                        let slot = eq_rows
                            .entry(target)
                            .or_insert_with(|| (Vec::new(), field.zero()));
                        slot.0.push((offsets[i] + k, ac.clone()));
                    }
                }
            }
            for (bm, bc) in rhs_poly.terms() {
                let slot = eq_rows
                    .entry(bm.clone())
                    .or_insert_with(|| (Vec::new(), field.zero()));
                slot.1 = slot.1.add(bc);
            }
            type SliceRow = (Vec<(usize, Coeff)>, Coeff);
            let mut keyed: Vec<(Monomial, SliceRow)> = eq_rows.into_iter().collect();
            keyed.sort_by(|x, y| x.0.cmp(&y.0));
            for (_, (entries, rhs)) in keyed {
                sys.push_row(entries, rhs);
            }
        }
        let solution = match rng.as_deref_mut() {
            None => sys.solve(|_| field.zero())?,
            Some(rng) => sys.solve(|_| match &field {
                CoefficientField::Rationals => field.from_i64(rng.gen_range(-50i64..=50)),
                CoefficientField::PrimeField(p) => Coeff::Fp { v: rng.gen_range(0..*p), p: *p },
            })?,
        };
        for i in 0..a.cols {
            let Some(basis) = &bases[i] else { continue };
            let poly = Polynomial::from_terms(
                ring,
                basis
                    .iter()
                    .enumerate()
                    .map(|(k, m)| (m.clone(), solution[offsets[i] + k].clone())),
            );
            x.set(i, xc, poly);
        }
    }
    // exact residual check
    let prod = a.mul(&x).expect("shapes agree");
    for r in 0..b.rows {
        for c in 0..b.cols {
            if prod.get(r, c) != b.get(r, c) {
                return None;
            }
        }
    }
    Some(x)
}
