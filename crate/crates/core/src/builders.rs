//! Constructors for the resolution families consumed by the trimming
//! pipeline: Koszul complexes, Eagon-Northcott complexes of generic (or
//! user-supplied) matrices, and the length-3 pfaffian resolutions of odd
//! skew-symmetric matrices, together with pfaffian/minor scalar builders.

use crate::chain::{ChainError, GradedFreeComplex, GradedFreeModule, GradedMap};
use crate::detfacet::IndexSet;
use crate::linalg::PolyMatrix;
use crate::ring::{poly_parse, CoefficientField, PolyRing, Polynomial};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("zero generator at position {0}")]
    ZeroGenerator(usize),
    #[error("generator {0} is not homogeneous")]
    NotHomogeneous(usize),
    #[error("skew matrix must have odd size, got {0}")]
    EvenSize(usize),
    #[error("matrix is not skew-symmetric with zero diagonal")]
    NotSkew,
    #[error("need n <= m, got n={0}, m={1}")]
    NGreaterThanM(usize, usize),
    #[error("bad index set: {0}")]
    BadIndexSet(String),
    #[error("entries must be homogeneous of one common degree")]
    MixedEntryDegrees,
    #[error("input file: {0}")]
    File(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

// ---------------------------------------------------------------------------
// Shared basis enumeration.  Exterior-power bases are the strictly
// increasing index subsets in lexicographic order; divided-power bases are
// the exponent vectors in lexicographic order.
// ---------------------------------------------------------------------------

/// All `k`-subsets of `{0, .., n-1}`, each increasing, in lex order.
pub fn subsets_lex(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// All exponent vectors of length `n` and total `total`, in lex order.
pub fn exponents_lex(n: usize, total: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(pos: usize, remaining: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos + 1 == cur.len() {
            cur[pos] = remaining;
            out.push(cur.clone());
            cur[pos] = 0;
            return;
        }
        // lex order: larger leading exponents first
        for e in (0..=remaining).rev() {
            cur[pos] = e;
            rec(pos + 1, remaining - e, cur, out);
            cur[pos] = 0;
        }
    }
    if n == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(0, total, &mut cur, &mut out);
    out
}

pub fn binomial(n: i64, k: i64) -> u64 {
    binomial_checked(n, k).and_then(|v| u64::try_from(v).ok()).expect("binomial overflow")
}

/// Extended binomial coefficient with the convention that out-of-range
/// values vanish; `None` on u128 overflow.
pub fn binomial_checked(n: i64, k: i64) -> Option<u128> {
    if k < 0 || n < 0 || k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i + 1) as u128;
    }
    Some(acc)
}

// ---------------------------------------------------------------------------
// Koszul complexes.
// ---------------------------------------------------------------------------

/// The Koszul complex on a list of nonzero homogeneous generators: the
/// exterior algebra on one generator per element, differential
/// `e_T -> sum_s (-1)^(s+1) gen(T_s) e_(T minus T_s)`.
pub fn koszul_complex(gens: &[Polynomial]) -> Result<GradedFreeComplex, BuildError> {
    assert!(!gens.is_empty(), "need at least one generator");
    let ring = gens[0].ring().clone();
    let mut degs = Vec::with_capacity(gens.len());
    for (i, g) in gens.iter().enumerate() {
        if g.is_zero() {
            return Err(BuildError::ZeroGenerator(i));
        }
        match g.homogeneity() {
            crate::ring::Homogeneity::Degree(d) => degs.push(d as i64),
            _ => return Err(BuildError::NotHomogeneous(i)),
        }
    }
    let n = gens.len();
    let mut modules = Vec::with_capacity(n + 1);
    let bases: Vec<Vec<Vec<usize>>> = (0..=n).map(|k| subsets_lex(n, k)).collect();
    for basis in bases.iter() {
        let degrees = basis
            .iter()
            .map(|t| t.iter().map(|&i| degs[i]).sum::<i64>())
            .collect();
        modules.push(GradedFreeModule::new(degrees));
    }
    let mut maps = Vec::with_capacity(n);
    for k in 1..=n {
        let src_basis = &bases[k];
        let tgt_basis = &bases[k - 1];
        let tgt_index: std::collections::HashMap<&Vec<usize>, usize> =
            tgt_basis.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let mut matrix = PolyMatrix::zero(&ring, tgt_basis.len(), src_basis.len());
        for (c, t) in src_basis.iter().enumerate() {
            for (pos, &elem) in t.iter().enumerate() {
                let mut rest = t.clone();
                rest.remove(pos);
                let r = tgt_index[&rest];
                let mut term = gens[elem].clone();
                if pos % 2 == 1 {
                    term = term.neg();
                }
                let v = matrix.get(r, c).add(&term);
                matrix.set(r, c, v);
            }
        }
        maps.push(GradedMap::new(modules[k].clone(), modules[k - 1].clone(), matrix)?);
    }
    Ok(GradedFreeComplex::new(ring, modules, maps)?)
}

// ---------------------------------------------------------------------------
// Pfaffians and the length-3 resolution of an odd skew matrix.
// ---------------------------------------------------------------------------

/// A skew-symmetric polynomial matrix with zero diagonal.
#[derive(Clone, Debug)]
pub struct SkewMatrix {
    mat: PolyMatrix,
}

impl SkewMatrix {
    pub fn new(mat: PolyMatrix) -> Result<Self, BuildError> {
        if mat.rows != mat.cols {
            return Err(BuildError::NotSkew);
        }
        for i in 0..mat.rows {
            if !mat.get(i, i).is_zero() {
                return Err(BuildError::NotSkew);
            }
            for j in 0..i {
                if mat.get(i, j).neg() != *mat.get(j, i) {
                    return Err(BuildError::NotSkew);
                }
            }
        }
        Ok(SkewMatrix { mat })
    }

    /// The generic skew matrix on variables `x_{ij}`, `i < j <= n`, over a
    /// freshly built ring.
    pub fn generic(n: usize, field: CoefficientField) -> (Arc<PolyRing>, Self) {
        let mut names = Vec::new();
        for i in 1..=n {
            for j in i + 1..=n {
                names.push(generic_var_name("x", i, j));
            }
        }
        let ring = PolyRing::new(names, field);
        let mut mat = PolyMatrix::zero(&ring, n, n);
        let mut idx = 0;
        for i in 0..n {
            for j in i + 1..n {
                let v = Polynomial::var(&ring, idx);
                mat.set(i, j, v.clone());
                mat.set(j, i, v.neg());
                idx += 1;
            }
        }
        (ring, SkewMatrix { mat })
    }

    pub fn size(&self) -> usize {
        self.mat.rows
    }

    pub fn matrix(&self) -> &PolyMatrix {
        &self.mat
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        self.mat.ring()
    }
}

pub fn generic_var_name(stem: &str, i: usize, j: usize) -> String {
    if i <= 9 && j <= 9 {
        format!("{stem}{i}{j}")
    } else {
        format!("{stem}_{i}_{j}")
    }
}

/// Pfaffian of an even-size skew submatrix given by `keep` (row/col indices),
/// by recursive expansion along the first remaining row:
/// `Pf = sum_j (-1)^j a_{1j} Pf(minor)`, so `Pf([[0,a],[-a,0]]) = a`.
fn pfaffian_on(mat: &PolyMatrix, keep: &[usize]) -> Polynomial {
    let ring = mat.ring();
    match keep.len() {
        0 => Polynomial::from_i64(ring, 1),
        2 => mat.get(keep[0], keep[1]).clone(),
        _ => {
            let mut acc = Polynomial::zero(ring);
            let first = keep[0];
            for (pos, &j) in keep.iter().enumerate().skip(1) {
                let entry = mat.get(first, j);
                if entry.is_zero() {
                    continue;
                }
                let rest: Vec<usize> =
                    keep.iter().copied().filter(|&k| k != first && k != j).collect();
                let sub = pfaffian_on(mat, &rest);
                let term = entry.mul(&sub);
                // 1-indexed column position j=pos+1 carries sign (-1)^(j)
                if pos % 2 == 1 {
                    acc = acc.add(&term);
                } else {
                    acc = acc.sub(&term);
                }
            }
            acc
        }
    }
}

/// Pfaffian of the matrix obtained by deleting row and column `j` (1-based)
/// from an odd-size skew matrix.
pub fn pfaffian(x: &SkewMatrix, j: usize) -> Result<Polynomial, BuildError> {
    let n = x.size();
    if n % 2 == 0 {
        return Err(BuildError::EvenSize(n));
    }
    assert!(j >= 1 && j <= n, "index out of range");
    let keep: Vec<usize> = (0..n).filter(|&k| k != j - 1).collect();
    Ok(pfaffian_on(&x.mat, &keep))
}

/// Full pfaffian of an even-size skew matrix.
pub fn pfaffian_full(x: &SkewMatrix) -> Result<Polynomial, BuildError> {
    let n = x.size();
    if n % 2 == 1 {
        return Err(BuildError::EvenSize(n));
    }
    let keep: Vec<usize> = (0..n).collect();
    Ok(pfaffian_on(&x.mat, &keep))
}

/// The signed submaximal-pfaffian vector `(Pf_1, -Pf_2, ..., (-1)^(n+1) Pf_n)`.
pub fn signed_pfaffians(x: &SkewMatrix) -> Result<Vec<Polynomial>, BuildError> {
    let n = x.size();
    (1..=n)
        .map(|j| {
            let p = pfaffian(x, j)?;
            Ok(if j % 2 == 0 { p.neg() } else { p })
        })
        .collect()
}

/// The resolution `0 -> R -> R^n -> R^n -> R` of the quotient by the ideal
/// of submaximal pfaffians: outer maps the signed pfaffian row/column, the
/// middle map the matrix itself.
pub fn pfaffian_resolution(x: &SkewMatrix) -> Result<GradedFreeComplex, BuildError> {
    let n = x.size();
    if n % 2 == 0 {
        return Err(BuildError::EvenSize(n));
    }
    let ring = x.ring().clone();
    let pf = signed_pfaffians(x)?;
    let pf_degs: Vec<i64> = pf
        .iter()
        .enumerate()
        .map(|(i, p)| match p.homogeneity() {
            crate::ring::Homogeneity::Degree(d) => Ok(d as i64),
            crate::ring::Homogeneity::Zero => Err(BuildError::ZeroGenerator(i)),
            crate::ring::Homogeneity::Mixed => Err(BuildError::NotHomogeneous(i)),
        })
        .collect::<Result<_, _>>()?;
    let f0 = GradedFreeModule::new(vec![0]);
    let f1 = GradedFreeModule::new(pf_degs.clone());
    // F_2 degrees forced by the columns of X against F_1
    let mut f2_degs = vec![None::<i64>; n];
    for c in 0..n {
        for r in 0..n {
            let e = x.mat.get(r, c);
            if let crate::ring::Homogeneity::Degree(d) = e.homogeneity() {
                let want = pf_degs[r] + d as i64;
                match f2_degs[c] {
                    None => f2_degs[c] = Some(want),
                    Some(w) if w == want => {}
                    _ => return Err(BuildError::MixedEntryDegrees),
                }
            }
        }
    }
    let f2_degs: Vec<i64> = f2_degs
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or(BuildError::MixedEntryDegrees)?;
    // F_3 degree forced by the signed pfaffian column against F_2
    let mut f3_deg = None::<i64>;
    for r in 0..n {
        if let crate::ring::Homogeneity::Degree(d) = pf[r].homogeneity() {
            let want = f2_degs[r] + d as i64;
            match f3_deg {
                None => f3_deg = Some(want),
                Some(w) if w == want => {}
                _ => return Err(BuildError::MixedEntryDegrees),
            }
        }
    }
    let f3 = GradedFreeModule::new(vec![f3_deg.ok_or(BuildError::MixedEntryDegrees)?]);
    let f2 = GradedFreeModule::new(f2_degs);

    let d1 = GradedMap::new(
        f1.clone(),
        f0.clone(),
        PolyMatrix::from_rows(&ring, vec![pf.clone()]).map_err(|_| BuildError::NotSkew)?,
    )?;
    let d2 = GradedMap::new(f2.clone(), f1.clone(), x.mat.clone())?;
    let d3 = GradedMap::new(
        f3.clone(),
        f2.clone(),
        PolyMatrix::from_rows(&ring, pf.iter().map(|p| vec![p.clone()]).collect())
            .map_err(|_| BuildError::NotSkew)?,
    )?;
    let complex = GradedFreeComplex::new(ring, vec![f0, f1, f2, f3], vec![d1, d2, d3])?;
    complex.verify_detail()?;
    Ok(complex)
}

/// Parse a skew-matrix input file:
/// ```text
/// ring x,y,z over QQ
/// skew 5
/// 0, 0, 0, -x^2, -z^2
/// ...
/// ```
pub fn parse_skew_file(text: &str) -> Result<(Arc<PolyRing>, SkewMatrix), BuildError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let ring_line = lines.next().ok_or_else(|| BuildError::File("empty file".into()))?;
    let rest = ring_line
        .trim()
        .strip_prefix("ring")
        .ok_or_else(|| BuildError::File("expected `ring <vars> over <QQ|gf:p>`".into()))?
        .trim();
    let (vars, field) = rest
        .split_once(" over ")
        .ok_or_else(|| BuildError::File("expected `over` in ring line".into()))?;
    let field = crate::chain::parse_field_spec(field.trim()).map_err(BuildError::File)?;
    let names: Vec<String> = vars.split(',').map(|s| s.trim().to_string()).collect();
    let ring = PolyRing::new(names, field);
    let size_line = lines.next().ok_or_else(|| BuildError::File("missing `skew <n>`".into()))?;
    let n: usize = size_line
        .trim()
        .strip_prefix("skew")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| BuildError::File("expected `skew <n>`".into()))?;
    let mut mat = PolyMatrix::zero(&ring, n, n);
    for r in 0..n {
        let row = lines
            .next()
            .ok_or_else(|| BuildError::File(format!("missing row {} of {}", r + 1, n)))?;
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != n {
            return Err(BuildError::File(format!(
                "row {} has {} entries, expected {}",
                r + 1,
                cells.len(),
                n
            )));
        }
        for (c, cell) in cells.iter().enumerate() {
            let p = poly_parse(cell.trim(), &ring)
                .map_err(|e| BuildError::File(format!("row {}: {}", r + 1, e)))?;
            mat.set(r, c, p);
        }
    }
    Ok((ring, SkewMatrix::new(mat)?))
}

// ---------------------------------------------------------------------------
// Generic matrices, minors and the Eagon-Northcott complex.
// ---------------------------------------------------------------------------

/// An `n x m` matrix (n <= m) with polynomial entries, generic by default.
#[derive(Clone, Debug)]
pub struct GenericMatrixSpec {
    pub nrows: usize,
    pub ncols: usize,
    entries: PolyMatrix,
    /// common homogeneous degree of the entries
    entry_degree: i64,
}

impl GenericMatrixSpec {
    /// The generic matrix on fresh variables `x_{ij}` over a new ring.
    pub fn generic(n: usize, m: usize, field: CoefficientField) -> Result<(Arc<PolyRing>, Self), BuildError> {
        if n > m {
            return Err(BuildError::NGreaterThanM(n, m));
        }
        let mut names = Vec::new();
        for i in 1..=n {
            for j in 1..=m {
                names.push(generic_var_name("x", i, j));
            }
        }
        let ring = PolyRing::new(names, field);
        let mut entries = PolyMatrix::zero(&ring, n, m);
        for i in 0..n {
            for j in 0..m {
                entries.set(i, j, Polynomial::var(&ring, i * m + j));
            }
        }
        Ok((ring.clone(), GenericMatrixSpec { nrows: n, ncols: m, entries, entry_degree: 1 }))
    }

    /// A matrix of user-supplied entries, homogeneous of one common degree.
    pub fn from_entries(entries: PolyMatrix) -> Result<Self, BuildError> {
        let (n, m) = (entries.rows, entries.cols);
        if n > m {
            return Err(BuildError::NGreaterThanM(n, m));
        }
        let mut deg = None;
        for r in 0..n {
            for c in 0..m {
                match entries.get(r, c).homogeneity() {
                    crate::ring::Homogeneity::Zero => {}
                    crate::ring::Homogeneity::Degree(d) => match deg {
                        None => deg = Some(d as i64),
                        Some(w) if w == d as i64 => {}
                        _ => return Err(BuildError::MixedEntryDegrees),
                    },
                    crate::ring::Homogeneity::Mixed => return Err(BuildError::MixedEntryDegrees),
                }
            }
        }
        Ok(GenericMatrixSpec {
            nrows: n,
            ncols: m,
            entries,
            entry_degree: deg.unwrap_or(1),
        })
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        self.entries.ring()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Polynomial {
        self.entries.get(i, j)
    }
}

/// Determinant of the square submatrix on all rows and the columns `tau`
/// (1-based, strictly increasing), by cofactor expansion.
pub fn minor(m: &GenericMatrixSpec, tau: &IndexSet) -> Result<Polynomial, BuildError> {
    let idx = tau.indices();
    if idx.len() != m.nrows {
        return Err(BuildError::BadIndexSet(format!(
            "need {} columns, got {}",
            m.nrows,
            idx.len()
        )));
    }
    if idx.iter().any(|&j| j < 1 || j > m.ncols) {
        return Err(BuildError::BadIndexSet("column index out of range".into()));
    }
    let cols: Vec<usize> = idx.iter().map(|&j| j - 1).collect();
    Ok(det_cofactor(&m.entries, &(0..m.nrows).collect::<Vec<_>>(), &cols))
}

fn det_cofactor(m: &PolyMatrix, rows: &[usize], cols: &[usize]) -> Polynomial {
    let ring = m.ring();
    match rows.len() {
        0 => Polynomial::from_i64(ring, 1),
        1 => m.get(rows[0], cols[0]).clone(),
        _ => {
            let mut acc = Polynomial::zero(ring);
            let rest_rows = &rows[1..];
            for (pos, &c) in cols.iter().enumerate() {
                let e = m.get(rows[0], c);
                if e.is_zero() {
                    continue;
                }
                let rest_cols: Vec<usize> =
                    cols.iter().copied().filter(|&cc| cc != c).collect();
                let sub = det_cofactor(m, rest_rows, &rest_cols);
                let term = e.mul(&sub);
                if pos % 2 == 0 {
                    acc = acc.add(&term);
                } else {
                    acc = acc.sub(&term);
                }
            }
            acc
        }
    }
}

/// Basis bookkeeping for one Eagon-Northcott module
/// `D_l(G*) (x) Lambda^(n+l) F`: pairs (alpha, T) with alpha-major order.
#[derive(Clone, Debug)]
pub struct EnBasis {
    pub alphas: Vec<Vec<usize>>,
    /// column subsets, 0-based, lex-ordered
    pub tsets: Vec<Vec<usize>>,
}

impl EnBasis {
    pub fn rank(&self) -> usize {
        self.alphas.len() * self.tsets.len()
    }

    pub fn index_of(&self, alpha_idx: usize, t_idx: usize) -> usize {
        alpha_idx * self.tsets.len() + t_idx
    }
}

/// Basis of homological degree `k` of the Eagon-Northcott complex of an
/// `n x m` map: `k = 1` is `Lambda^n F`, `k >= 2` is
/// `D_(k-1)(G*) (x) Lambda^(n+k-1) F`.
pub fn en_basis(n: usize, m: usize, k: usize) -> EnBasis {
    assert!(k >= 1);
    let l = k - 1;
    EnBasis { alphas: exponents_lex(n, l), tsets: subsets_lex(m, n + l) }
}

/// The Eagon-Northcott complex of the matrix, resolving the quotient by the
/// ideal of maximal minors: length `m - n + 1`, with
/// `F_1 = Lambda^n F` mapping by the row of maximal minors (lex order) and
/// higher differentials by contraction:
/// `g^(alpha) (x) f_T -> sum_(i: alpha_i > 0) sum_(t_j in T) (-1)^(j+1)
///  x_(i,t_j) g^(alpha - e_i) (x) f_(T minus t_j)`.
pub fn eagon_northcott(spec: &GenericMatrixSpec) -> Result<GradedFreeComplex, BuildError> {
    let (n, m) = (spec.nrows, spec.ncols);
    if n > m {
        return Err(BuildError::NGreaterThanM(n, m));
    }
    let ring = spec.ring().clone();
    let e = spec.entry_degree;
    let length = m - n + 1;
    let mut modules = vec![GradedFreeModule::new(vec![0])];
    let mut bases = Vec::with_capacity(length);
    for k in 1..=length {
        let basis = en_basis(n, m, k);
        let deg = (n + k - 1) as i64 * e;
        modules.push(GradedFreeModule::new(vec![deg; basis.rank()]));
        bases.push(basis);
    }
    let mut maps = Vec::with_capacity(length);
    // d_1: minors in lex order of tau
    {
        let basis = &bases[0];
        let mut row = Vec::with_capacity(basis.tsets.len());
        for t in &basis.tsets {
            let tau = IndexSet::new(t.iter().map(|&j| j + 1).collect()).unwrap();
            row.push(minor(spec, &tau)?);
        }
        let matrix = PolyMatrix::from_rows(&ring, vec![row]).map_err(|_| BuildError::NotSkew)?;
        maps.push(GradedMap::new(modules[1].clone(), modules[0].clone(), matrix)?);
    }
    for k in 2..=length {
        let src = &bases[k - 1];
        let tgt = &bases[k - 2];
        let tgt_alpha_index: std::collections::HashMap<&Vec<usize>, usize> =
            tgt.alphas.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let tgt_t_index: std::collections::HashMap<&Vec<usize>, usize> =
            tgt.tsets.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let mut matrix = PolyMatrix::zero(&ring, tgt.rank(), src.rank());
        for (ai, alpha) in src.alphas.iter().enumerate() {
            for (ti, t) in src.tsets.iter().enumerate() {
                let col = src.index_of(ai, ti);
                for i in 0..n {
                    if alpha[i] == 0 {
                        continue;
                    }
                    let mut alpha_red = alpha.clone();
                    alpha_red[i] -= 1;
                    let ar = tgt_alpha_index[&alpha_red];
                    for (pos, &tj) in t.iter().enumerate() {
                        let entry = spec.entry(i, tj);
                        if entry.is_zero() {
                            continue;
                        }
                        let mut rest = t.clone();
                        rest.remove(pos);
                        let tr = tgt_t_index[&rest];
                        let row = tgt.index_of(ar, tr);
                        let term = if pos % 2 == 0 { entry.clone() } else { entry.neg() };
                        let v = matrix.get(row, col).add(&term);
                        matrix.set(row, col, v);
                    }
                }
            }
        }
        maps.push(GradedMap::new(modules[k].clone(), modules[k - 1].clone(), matrix)?);
    }
    let complex = GradedFreeComplex::new(ring, modules, maps)?;
    complex.verify_detail()?;
    Ok(complex)
}
