//! Graded free complexes over a polynomial ring: construction and exact
//! verification (d^2 = 0, homogeneity, minimality), mapping cones, and
//! Betti-table extraction.
//!
//! A complex stores the free modules `F_0, ..., F_L` through their generator
//! degrees and the differentials `d_i : F_i -> F_{i-1}`.

use crate::linalg::{rank_at_random_point, rank_over_field, PolyMatrix, ScalarMatrix};
use crate::ring::{poly_parse, CoefficientField, Homogeneity, PolyRing};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("entry ({row},{col}) is not homogeneous of degree {want}")]
    NotHomogeneous { row: usize, col: usize, want: i64 },
    #[error("matrix shape {rows}x{cols} does not match target rank {target} x source rank {src}")]
    ShapeMismatch { rows: usize, cols: usize, target: usize, src: usize },
    #[error("maps do not form a complex: d_{i} . d_{next} != 0", next = i + 1)]
    NotAComplex { i: usize },
    #[error("chain map square {0} does not commute")]
    NonCommutingSquare(usize),
    #[error("complex is not minimal")]
    NotMinimal,
    #[error("complex parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("ring mismatch between complexes")]
    RingMismatch,
}

/// A free module described by the internal degrees of its generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedFreeModule {
    pub degrees: Vec<i64>,
}

impl GradedFreeModule {
    pub fn new(degrees: Vec<i64>) -> Self {
        GradedFreeModule { degrees }
    }

    pub fn rank(&self) -> usize {
        self.degrees.len()
    }

    /// Number of generators in internal degree `j`.
    pub fn rank_in_degree(&self, j: i64) -> usize {
        self.degrees.iter().filter(|&&d| d == j).count()
    }

    pub fn twist(&self, delta: i64) -> GradedFreeModule {
        GradedFreeModule::new(self.degrees.iter().map(|d| d + delta).collect())
    }
}

/// A homogeneous map of graded free modules.  Entry `(i,j)` is zero or
/// homogeneous of degree `source.degrees[j] - target.degrees[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedMap {
    pub source: GradedFreeModule,
    pub target: GradedFreeModule,
    pub matrix: PolyMatrix,
}

impl GradedMap {
    pub fn new(
        source: GradedFreeModule,
        target: GradedFreeModule,
        matrix: PolyMatrix,
    ) -> Result<Self, ChainError> {
        if matrix.rows != target.rank() || matrix.cols != source.rank() {
            return Err(ChainError::ShapeMismatch {
                rows: matrix.rows,
                cols: matrix.cols,
                target: target.rank(),
                src: source.rank(),
            });
        }
        for r in 0..matrix.rows {
            for c in 0..matrix.cols {
                let want = source.degrees[c] - target.degrees[r];
                let e = matrix.get(r, c);
                let ok = match e.homogeneity() {
                    Homogeneity::Zero => true,
                    Homogeneity::Degree(d) => want >= 0 && d as i64 == want,
                    Homogeneity::Mixed => false,
                };
                if !ok {
                    return Err(ChainError::NotHomogeneous { row: r, col: c, want });
                }
            }
        }
        Ok(GradedMap { source, target, matrix })
    }

    pub fn zero(ring: &Arc<PolyRing>, source: GradedFreeModule, target: GradedFreeModule) -> Self {
        let matrix = PolyMatrix::zero(ring, target.rank(), source.rank());
        GradedMap { source, target, matrix }
    }

    pub fn compose(&self, inner: &GradedMap) -> Result<GradedMap, ChainError> {
        let matrix = self.matrix.mul(&inner.matrix).map_err(|_| ChainError::ShapeMismatch {
            rows: self.matrix.rows,
            cols: inner.matrix.cols,
            target: self.target.rank(),
            src: inner.source.rank(),
        })?;
        GradedMap::new(inner.source.clone(), self.target.clone(), matrix)
    }

    /// Ranks of the reduction modulo the maximal ideal: for each internal
    /// degree `j`, the rank of the scalar block connecting degree-`j`
    /// generators.  Degrees with zero rank are omitted.
    pub fn constant_block_ranks(&self) -> BTreeMap<i64, usize> {
        let field = self.matrix.ring().field().clone();
        let mut out = BTreeMap::new();
        let mut degrees: Vec<i64> = self.source.degrees.clone();
        degrees.extend_from_slice(&self.target.degrees);
        degrees.sort();
        degrees.dedup();
        for j in degrees {
            let src: Vec<usize> =
                (0..self.source.rank()).filter(|&c| self.source.degrees[c] == j).collect();
            let tgt: Vec<usize> =
                (0..self.target.rank()).filter(|&r| self.target.degrees[r] == j).collect();
            if src.is_empty() || tgt.is_empty() {
                continue;
            }
            let mut block = ScalarMatrix::zero(&field, tgt.len(), src.len());
            for (bi, &r) in tgt.iter().enumerate() {
                for (bj, &c) in src.iter().enumerate() {
                    block.set(bi, bj, self.matrix.get(r, c).constant_term());
                }
            }
            let rk = rank_over_field(&block);
            if rk > 0 {
                out.insert(j, rk);
            }
        }
        out
    }
}

/// Betti table: (homological index, internal degree) -> positive count.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BettiTable {
    entries: BTreeMap<(usize, i64), u128>,
}

impl BettiTable {
    pub fn new() -> Self {
        BettiTable { entries: BTreeMap::new() }
    }

    pub fn set(&mut self, i: usize, j: i64, v: u128) {
        if v > 0 {
            self.entries.insert((i, j), v);
        }
    }

    pub fn add(&mut self, i: usize, j: i64, v: u128) {
        if v > 0 {
            *self.entries.entry((i, j)).or_insert(0) += v;
        }
    }

    pub fn get(&self, i: usize, j: i64) -> u128 {
        self.entries.get(&(i, j)).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, i64), &u128)> {
        self.entries.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total Betti number in homological index `i`.
    pub fn total(&self, i: usize) -> u128 {
        self.entries.iter().filter(|((bi, _), _)| *bi == i).map(|(_, v)| v).sum()
    }

    pub fn totals(&self) -> Vec<u128> {
        let max_i = self.entries.keys().map(|(i, _)| *i).max().unwrap_or(0);
        (0..=max_i).map(|i| self.total(i)).collect()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.entries.keys().map(|(_, j)| *j).max()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().map(|(i, _)| *i).max()
    }

    /// Restrict to the window `i <= imax, j <= dmax`.
    pub fn restrict(&self, imax: usize, dmax: i64) -> BettiTable {
        BettiTable {
            entries: self
                .entries
                .iter()
                .filter(|((i, j), _)| *i <= imax && *j <= dmax)
                .map(|(k, v)| (*k, *v))
                .collect(),
        }
    }
}

impl fmt::Display for BettiTable {
    /// Rows indexed by `j - i`, columns by `i`, in the usual layout.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return writeln!(f, "(empty Betti table)");
        }
        let max_i = self.entries.keys().map(|(i, _)| *i).max().unwrap();
        let rows: Vec<i64> = {
            let mut v: Vec<i64> = self.entries.keys().map(|(i, j)| j - *i as i64).collect();
            v.sort();
            v.dedup();
            v
        };
        write!(f, "       ")?;
        for i in 0..=max_i {
            write!(f, "{i:>6}")?;
        }
        writeln!(f)?;
        write!(f, "total: ")?;
        for i in 0..=max_i {
            write!(f, "{:>6}", self.total(i))?;
        }
        writeln!(f)?;
        for row in rows.iter().copied() {
            write!(f, "{row:>5}: ")?;
            for i in 0..=max_i {
                let v = self.get(i, row + i as i64);
                if v == 0 {
                    write!(f, "{:>6}", ".")?;
                } else {
                    write!(f, "{v:>6}")?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// A bounded complex of graded free modules `F_0 <- F_1 <- ... <- F_L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedFreeComplex {
    ring: Arc<PolyRing>,
    pub modules: Vec<GradedFreeModule>,
    /// `maps[i]` is the differential `F_{i+1} -> F_i`.
    pub maps: Vec<GradedMap>,
}

impl GradedFreeComplex {
    pub fn new(
        ring: Arc<PolyRing>,
        modules: Vec<GradedFreeModule>,
        maps: Vec<GradedMap>,
    ) -> Result<Self, ChainError> {
        assert_eq!(maps.len() + 1, modules.len(), "need one map per adjacent pair");
        for (i, m) in maps.iter().enumerate() {
            if m.source != modules[i + 1] || m.target != modules[i] {
                return Err(ChainError::ShapeMismatch {
                    rows: m.matrix.rows,
                    cols: m.matrix.cols,
                    target: modules[i].rank(),
                    src: modules[i + 1].rank(),
                });
            }
        }
        Ok(GradedFreeComplex { ring, modules, maps })
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    /// Homological length `L`.
    pub fn length(&self) -> usize {
        self.modules.len() - 1
    }

    pub fn module(&self, i: usize) -> Option<&GradedFreeModule> {
        self.modules.get(i)
    }

    /// Differential `F_i -> F_{i-1}` for `1 <= i <= L`.
    pub fn differential(&self, i: usize) -> Option<&GradedMap> {
        if i == 0 {
            None
        } else {
            self.maps.get(i - 1)
        }
    }

    /// True iff every composite `d_i . d_{i+1}` vanishes identically.
    /// Homogeneity holds by construction of [`GradedMap`].
    pub fn verify(&self) -> bool {
        self.verify_detail().is_ok()
    }

    pub fn verify_detail(&self) -> Result<(), ChainError> {
        for i in 0..self.maps.len().saturating_sub(1) {
            let prod = self.maps[i]
                .matrix
                .mul(&self.maps[i + 1].matrix)
                .map_err(|_| ChainError::NotAComplex { i: i + 1 })?;
            if !prod.is_zero() {
                return Err(ChainError::NotAComplex { i: i + 1 });
            }
        }
        Ok(())
    }

    /// True iff every differential entry has zero constant term.
    pub fn is_minimal(&self) -> bool {
        self.maps.iter().all(|m| {
            (0..m.matrix.rows)
                .all(|r| (0..m.matrix.cols).all(|c| m.matrix.get(r, c).constant_term().is_zero()))
        })
    }

    /// Graded Betti numbers read directly off a minimal resolution of a
    /// cyclic module: entry `(i,j)` counts degree-`j` generators of `F_i`.
    pub fn betti_from_minimal(&self) -> Result<BettiTable, ChainError> {
        if !self.is_minimal() {
            return Err(ChainError::NotMinimal);
        }
        Ok(self.generator_table())
    }

    fn generator_table(&self) -> BettiTable {
        let mut t = BettiTable::new();
        for (i, m) in self.modules.iter().enumerate() {
            for &j in &m.degrees {
                t.add(i, j, 1);
            }
        }
        t
    }

    /// Graded Betti numbers of the resolved module computed from a possibly
    /// non-minimal resolution: in each degree, the generator count minus the
    /// ranks of the constant blocks of the two adjacent differentials.
    pub fn betti_from_resolution(&self) -> BettiTable {
        let mut t = BettiTable::new();
        let blocks: Vec<BTreeMap<i64, usize>> =
            self.maps.iter().map(|m| m.constant_block_ranks()).collect();
        for (i, m) in self.modules.iter().enumerate() {
            let mut degrees: Vec<i64> = m.degrees.clone();
            degrees.sort();
            degrees.dedup();
            for j in degrees {
                let gens = m.rank_in_degree(j) as i64;
                let out_rank = if i > 0 { *blocks[i - 1].get(&j).unwrap_or(&0) as i64 } else { 0 };
                let in_rank =
                    if i < self.maps.len() { *blocks[i].get(&j).unwrap_or(&0) as i64 } else { 0 };
                let v = gens - out_rank - in_rank;
                debug_assert!(v >= 0, "negative Betti count at ({i},{j})");
                if v > 0 {
                    t.add(i, j, v as u128);
                }
            }
        }
        t
    }

    /// Randomized witness for acyclicity: at a seeded random point the
    /// specialized differentials must satisfy
    /// `rank d_i + rank d_{i+1} = rank F_i` for `0 < i < L` and
    /// `rank d_L = rank F_L`.
    pub fn rank_acyclicity_evidence(&self, seed: u64) -> bool {
        if self.maps.is_empty() {
            return true;
        }
        let ranks: Vec<usize> =
            self.maps.iter().map(|m| rank_at_random_point(&m.matrix, seed)).collect();
        let l = self.length();
        for i in 1..l {
            if ranks[i - 1] + ranks[i] != self.modules[i].rank() {
                return false;
            }
        }
        ranks[l - 1] == self.modules[l].rank()
    }

    /// Serialize to the versioned text format (exact round-trip).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("complex v1\n");
        out.push_str(&format!("ring {} over {}\n", self.ring.vars().join(","), self.ring.field()));
        for (i, m) in self.modules.iter().enumerate() {
            let degs: Vec<String> = m.degrees.iter().map(|d| d.to_string()).collect();
            out.push_str(&format!("module {} : {}\n", i, degs.join(",")));
        }
        for (i, m) in self.maps.iter().enumerate() {
            out.push_str(&format!(
                "map {} : rows={} cols={}\n",
                i + 1,
                m.matrix.rows,
                m.matrix.cols
            ));
            for r in 0..m.matrix.rows {
                let row: Vec<String> =
                    (0..m.matrix.cols).map(|c| m.matrix.get(r, c).to_string()).collect();
                out.push_str(&format!("  {}\n", row.join(", ")));
            }
        }
        out
    }

    /// Parse the text format produced by [`GradedFreeComplex::to_text`].
    pub fn from_text(text: &str) -> Result<Self, ChainError> {
        let err = |line: usize, msg: &str| ChainError::Parse { line: line + 1, msg: msg.into() };
        let mut lines = text.lines().enumerate().peekable();
        let (ln, header) = lines.next().ok_or_else(|| err(0, "empty input"))?;
        if header.trim() != "complex v1" {
            return Err(err(ln, "expected `complex v1` header"));
        }
        let (ln, ring_line) = lines.next().ok_or_else(|| err(1, "missing ring line"))?;
        let ring = parse_ring_line(ring_line.trim()).map_err(|msg| err(ln, &msg))?;
        let mut modules = Vec::new();
        while let Some((_, l)) = lines.peek() {
            if !l.trim_start().starts_with("module") {
                break;
            }
            let (ln, l) = lines.next().unwrap();
            let rest = l.trim().strip_prefix("module").unwrap();
            let (_, degs) =
                rest.split_once(':').ok_or_else(|| err(ln, "expected `module <i> : <degrees>`"))?;
            let degs = degs.trim();
            let degrees = if degs.is_empty() {
                Vec::new()
            } else {
                degs.split(',')
                    .map(|s| s.trim().parse::<i64>().map_err(|_| err(ln, "bad degree")))
                    .collect::<Result<Vec<_>, _>>()?
            };
            modules.push(GradedFreeModule::new(degrees));
        }
        if modules.is_empty() {
            return Err(err(0, "no modules"));
        }
        let mut maps = Vec::new();
        let mut idx = 0usize;
        while let Some((ln, l)) = lines.next() {
            let l = l.trim();
            if l.is_empty() {
                continue;
            }
            if !l.starts_with("map") {
                return Err(err(ln, "expected `map` line"));
            }
            let rows_cols = l
                .split_once(':')
                .ok_or_else(|| err(ln, "expected `map <i> : rows=<r> cols=<c>`"))?
                .1;
            let mut rows = None;
            let mut cols = None;
            for part in rows_cols.split_whitespace() {
                if let Some(v) = part.strip_prefix("rows=") {
                    rows = v.parse::<usize>().ok();
                }
                if let Some(v) = part.strip_prefix("cols=") {
                    cols = v.parse::<usize>().ok();
                }
            }
            let (rows, cols) = match (rows, cols) {
                (Some(r), Some(c)) => (r, c),
                _ => return Err(err(ln, "bad rows/cols")),
            };
            let mut matrix = PolyMatrix::zero(&ring, rows, cols);
            for r in 0..rows {
                let (ln2, row_line) = lines.next().ok_or_else(|| err(ln, "missing matrix row"))?;
                let cells: Vec<&str> =
                    if cols == 0 { Vec::new() } else { row_line.trim().split(',').collect() };
                if cells.len() != cols {
                    return Err(err(
                        ln2,
                        &format!("expected {cols} entries, found {}", cells.len()),
                    ));
                }
                for (c, cell) in cells.iter().enumerate() {
                    let p = poly_parse(cell.trim(), &ring)
                        .map_err(|e| err(ln2, &format!("bad polynomial `{cell}`: {e}")))?;
                    matrix.set(r, c, p);
                }
            }
            if idx + 1 >= modules.len() {
                return Err(err(ln, "more maps than module pairs"));
            }
            let map = GradedMap::new(modules[idx + 1].clone(), modules[idx].clone(), matrix)
                .map_err(|e| err(ln, &format!("{e}")))?;
            maps.push(map);
            idx += 1;
        }
        if maps.len() + 1 != modules.len() {
            return Err(err(0, "map count does not match module count"));
        }
        GradedFreeComplex::new(ring, modules, maps)
    }
}

fn parse_ring_line(line: &str) -> Result<Arc<PolyRing>, String> {
    let rest = line.strip_prefix("ring").ok_or("expected `ring` line")?.trim();
    let (vars, field) = rest.split_once(" over ").ok_or("expected `over`")?;
    let names: Vec<String> = vars.split(',').map(|s| s.trim().to_string()).collect();
    let field = parse_field_spec(field.trim())?;
    Ok(PolyRing::new(names, field))
}

/// Parse a field spec: `QQ` or `gf:<p>`.
pub fn parse_field_spec(s: &str) -> Result<CoefficientField, String> {
    if s == "QQ" {
        return Ok(CoefficientField::Rationals);
    }
    if let Some(p) = s.strip_prefix("gf:") {
        let p: u64 = p.parse().map_err(|_| format!("bad characteristic `{p}`"))?;
        return CoefficientField::prime_field(p).map_err(|e| e.to_string());
    }
    Err(format!("unknown field `{s}` (expected QQ or gf:<p>)"))
}

/// A chain map between two complexes, one [`GradedMap`] per homological
/// index (`maps[k] : source_k -> target_k`).
#[derive(Clone, Debug)]
pub struct ChainMapData {
    pub source: GradedFreeComplex,
    pub target: GradedFreeComplex,
    pub maps: Vec<GradedMap>,
}

impl ChainMapData {
    pub fn new(
        source: GradedFreeComplex,
        target: GradedFreeComplex,
        maps: Vec<GradedMap>,
    ) -> Result<Self, ChainError> {
        if *source.ring() != *target.ring() {
            return Err(ChainError::RingMismatch);
        }
        let data = ChainMapData { source, target, maps };
        data.verify_squares()?;
        Ok(data)
    }

    /// Each square `target_d . f_k = f_{k-1} . source_d` must commute.
    pub fn verify_squares(&self) -> Result<(), ChainError> {
        for k in 1..self.maps.len() {
            let Some(sd) = self.source.differential(k) else { continue };
            let Some(td) = self.target.differential(k) else { continue };
            let left = td
                .matrix
                .mul(&self.maps[k].matrix)
                .map_err(|_| ChainError::NonCommutingSquare(k))?;
            let right = self.maps[k - 1]
                .matrix
                .mul(&sd.matrix)
                .map_err(|_| ChainError::NonCommutingSquare(k))?;
            if left != right {
                return Err(ChainError::NonCommutingSquare(k));
            }
        }
        Ok(())
    }
}

/// The mapping cone of a chain map `f : C -> D`:
/// `Cone_k = D_k (+) C_{k-1}` with differential blocks `[[d_D, f], [0, -d_C]]`.
pub fn mapping_cone(f: &ChainMapData) -> Result<GradedFreeComplex, ChainError> {
    f.verify_squares()?;
    let ring = f.target.ring().clone();
    let c = &f.source;
    let d = &f.target;
    let len = std::cmp::max(d.modules.len(), c.modules.len() + 1);
    let module_at = |complex: &GradedFreeComplex, i: isize| -> GradedFreeModule {
        if i < 0 || i as usize >= complex.modules.len() {
            GradedFreeModule::new(Vec::new())
        } else {
            complex.modules[i as usize].clone()
        }
    };
    let mut modules = Vec::with_capacity(len);
    for k in 0..len {
        let dk = module_at(d, k as isize);
        let ck1 = module_at(c, k as isize - 1);
        let mut degrees = dk.degrees.clone();
        degrees.extend(ck1.degrees);
        modules.push(GradedFreeModule::new(degrees));
    }
    let mut maps = Vec::with_capacity(len - 1);
    for k in 1..len {
        let src = modules[k].clone();
        let tgt = modules[k - 1].clone();
        let mut matrix = PolyMatrix::zero(&ring, tgt.rank(), src.rank());
        let d_rank = module_at(d, k as isize).rank();
        let d_rank_tgt = module_at(d, k as isize - 1).rank();
        if let Some(dd) = d.differential(k) {
            for r in 0..dd.matrix.rows {
                for cidx in 0..dd.matrix.cols {
                    matrix.set(r, cidx, dd.matrix.get(r, cidx).clone());
                }
            }
        }
        // f-block: f_{k-1} : C_{k-1} -> D_{k-1}
        if k - 1 < f.maps.len() {
            let fm = &f.maps[k - 1];
            for r in 0..fm.matrix.rows {
                for cidx in 0..fm.matrix.cols {
                    matrix.set(r, d_rank + cidx, fm.matrix.get(r, cidx).clone());
                }
            }
        }
        // -d_C block: C_{k-1} -> C_{k-2}
        if k >= 2 {
            if let Some(cd) = c.differential(k - 1) {
                for r in 0..cd.matrix.rows {
                    for cidx in 0..cd.matrix.cols {
                        matrix.set(d_rank_tgt + r, d_rank + cidx, cd.matrix.get(r, cidx).neg());
                    }
                }
            }
        }
        maps.push(GradedMap::new(src, tgt, matrix)?);
    }
    let cone = GradedFreeComplex::new(ring, modules, maps)?;
    debug_assert!(cone.verify());
    Ok(cone)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::koszul_complex;
    use crate::ring::Polynomial;
    use crate::linalg::rank_over_field;
    use crate::ring::{poly_parse, CoefficientField, PolyRing};
    use rand_chacha::rand_core::SeedableRng;

    fn qq_xyz() -> Arc<PolyRing> {
        PolyRing::with_names(&["x", "y", "z"], CoefficientField::Rationals)
    }

    fn koszul_xyz() -> GradedFreeComplex {
        let r = qq_xyz();
        let gens = ["x", "y", "z"].map(|v| poly_parse(v, &r).unwrap());
        koszul_complex(&gens).unwrap()
    }

    fn identity_chain_map(k: &GradedFreeComplex) -> ChainMapData {
        let maps: Vec<GradedMap> = (0..k.modules.len())
            .map(|i| {
                let m = &k.modules[i];
                let mut mat = PolyMatrix::zero(k.ring(), m.rank(), m.rank());
                for d in 0..m.rank() {
                    mat.set(d, d, Polynomial::from_i64(k.ring(), 1));
                }
                GradedMap::new(m.clone(), m.clone(), mat).unwrap()
            })
            .collect();
        ChainMapData::new(k.clone(), k.clone(), maps).unwrap()
    }

    #[test]
    fn verify_koszul() {
        assert!(koszul_xyz().verify());
    }

    #[test]
    fn verify_rejects_non_complex() {
        let r = qq_xyz();
        let x = poly_parse("x", &r).unwrap();
        let m0 = GradedFreeModule::new(vec![0]);
        let m1 = GradedFreeModule::new(vec![1]);
        let m2 = GradedFreeModule::new(vec![2]);
        let d1 = GradedMap::new(
            m1.clone(),
            m0.clone(),
            PolyMatrix::from_rows(&r, vec![vec![x.clone()]]).unwrap(),
        )
        .unwrap();
        let d2 = GradedMap::new(
            m2.clone(),
            m1.clone(),
            PolyMatrix::from_rows(&r, vec![vec![x]]).unwrap(),
        )
        .unwrap();
        let c = GradedFreeComplex::new(r, vec![m0, m1, m2], vec![d1, d2]).unwrap();
        assert!(!c.verify());
    }

    #[test]
    fn koszul_is_minimal_with_binomial_betti() {
        let k = koszul_xyz();
        assert!(k.is_minimal());
        let b = k.betti_from_minimal().unwrap();
        for i in 0..=3usize {
            let expect = [1u128, 3, 3, 1][i];
            assert_eq!(b.get(i, i as i64), expect);
        }
        assert!(k.rank_acyclicity_evidence(11));
        assert!(k.rank_acyclicity_evidence(99));
    }

    #[test]
    fn cone_of_identity_has_no_homology() {
        let k = koszul_xyz();
        let f = identity_chain_map(&k);
        let cone = mapping_cone(&f).unwrap();
        assert!(cone.verify());
        assert!(!cone.is_minimal());
        assert!(cone.rank_acyclicity_evidence(3));
        // H_0 vanishes too: the first differential is surjective at a point
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let pt = crate::linalg::random_point(cone.ring(), &mut rng);
        let sm = cone.maps[0].matrix.specialize(&pt).unwrap();
        assert_eq!(rank_over_field(&sm), cone.modules[0].rank());
    }

    #[test]
    fn cone_of_zero_map_is_direct_sum() {
        let k = koszul_xyz();
        let r = qq_xyz();
        let x = poly_parse("x", &r).unwrap();
        let d = koszul_complex(&[x]).unwrap();
        let maps: Vec<GradedMap> = (0..k.modules.len())
            .map(|i| {
                let tgt = if i < d.modules.len() {
                    d.modules[i].clone()
                } else {
                    GradedFreeModule::new(vec![])
                };
                GradedMap::zero(&r, k.modules[i].clone(), tgt)
            })
            .collect();
        let f = ChainMapData::new(k.clone(), d.clone(), maps).unwrap();
        let cone = mapping_cone(&f).unwrap();
        assert!(cone.verify());
        for i in 0..cone.modules.len() {
            let d_rank = d.modules.get(i).map_or(0, |m| m.rank());
            let c_rank = if i >= 1 { k.modules[i - 1].rank() } else { 0 };
            assert_eq!(cone.modules[i].rank(), d_rank + c_rank);
        }
    }

    #[test]
    fn cone_rejects_non_commuting() {
        let k = koszul_xyz();
        let r = qq_xyz();
        let mut maps: Vec<GradedMap> = (0..k.modules.len())
            .map(|i| GradedMap::zero(&r, k.modules[i].clone(), k.modules[i].clone()))
            .collect();
        // corrupt one square: f_1 = identity, everything else zero
        let m1 = &k.modules[1];
        let mut mat = PolyMatrix::zero(&r, m1.rank(), m1.rank());
        for d in 0..m1.rank() {
            mat.set(d, d, Polynomial::from_i64(&r, 1));
        }
        maps[1] = GradedMap::new(m1.clone(), m1.clone(), mat).unwrap();
        assert!(ChainMapData::new(k.clone(), k, maps).is_err());
    }

    #[test]
    fn betti_from_resolution_discards_trivial_summands() {
        let k = koszul_xyz();
        let f = identity_chain_map(&k);
        let cone = mapping_cone(&f).unwrap();
        // the cone resolves the zero module
        assert_eq!(cone.betti_from_resolution(), BettiTable::new());
        assert!(cone.betti_from_minimal().is_err());
    }

    #[test]
    fn acyclicity_evidence_flags_spurious_summand() {
        let k = koszul_xyz();
        let r = qq_xyz();
        // direct sum with 0 -> R -> 0 concentrated in index 1
        let mut modules = k.modules.clone();
        modules[1] = GradedFreeModule::new(modules[1].degrees.iter().copied().chain([0]).collect());
        let mut maps = Vec::new();
        for i in 0..k.maps.len() {
            let src = modules[i + 1].clone();
            let tgt = modules[i].clone();
            let mut mat = PolyMatrix::zero(&r, tgt.rank(), src.rank());
            for rr in 0..k.maps[i].matrix.rows {
                for cc in 0..k.maps[i].matrix.cols {
                    mat.set(rr, cc, k.maps[i].matrix.get(rr, cc).clone());
                }
            }
            maps.push(GradedMap::new(src, tgt, mat).unwrap());
        }
        let c = GradedFreeComplex::new(r, modules, maps).unwrap();
        assert!(c.verify());
        assert!(!c.rank_acyclicity_evidence(17));
    }

    #[test]
    fn serialize_roundtrip() {
        let k = koszul_xyz();
        let text = k.to_text();
        let back = GradedFreeComplex::from_text(&text).unwrap();
        assert_eq!(k, back);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn betti_table_display_and_totals() {
        let mut t = BettiTable::new();
        t.set(0, 0, 1);
        t.set(1, 4, 3);
        t.set(1, 5, 6);
        t.set(2, 6, 11);
        t.set(3, 7, 2);
        t.set(3, 10, 1);
        assert_eq!(t.totals(), vec![1u128, 9, 11, 3]);
        assert!(t.to_string().contains("total:"));
    }
}
