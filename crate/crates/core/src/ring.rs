//! Sparse multivariate polynomial arithmetic over an exact coefficient field.
//!
//! Rings are standard graded (every variable has degree 1) with a fixed
//! graded reverse lexicographic term order, so every polynomial has a unique
//! canonical form.  Coefficients are arbitrary-precision rationals or
//! elements of GF(p); all arithmetic is exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};
use thiserror::Error;

/// Default prime for randomized / finite-field runs.
pub const DEFAULT_PRIME: u64 = 32003;

#[derive(Debug, Error)]
pub enum RingError {
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown variable `{name}` at position {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("{0} is not a valid prime field characteristic")]
    BadCharacteristic(u64),
    #[error("operands belong to different rings")]
    RingMismatch,
    #[error("evaluation point has length {got}, ring has {want} variables")]
    LengthMismatch { got: usize, want: usize },
}

/// The coefficient field: the rationals or a prime field GF(p).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CoefficientField {
    Rationals,
    PrimeField(u64),
}

impl CoefficientField {
    /// GF(p) after checking that `p` is prime.
    pub fn prime_field(p: u64) -> Result<Self, RingError> {
        if p < 2 || !is_prime(p) {
            return Err(RingError::BadCharacteristic(p));
        }
        Ok(CoefficientField::PrimeField(p))
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            CoefficientField::Rationals => 0,
            CoefficientField::PrimeField(p) => *p,
        }
    }

    pub fn zero(&self) -> Coeff {
        match self {
            CoefficientField::Rationals => Coeff::Rat(BigRational::zero()),
            CoefficientField::PrimeField(p) => Coeff::Fp { v: 0, p: *p },
        }
    }

    pub fn one(&self) -> Coeff {
        self.from_i64(1)
    }

    pub fn from_i64(&self, n: i64) -> Coeff {
        match self {
            CoefficientField::Rationals => Coeff::Rat(BigRational::from(BigInt::from(n))),
            CoefficientField::PrimeField(p) => Coeff::Fp {
                v: n.rem_euclid(*p as i64) as u64,
                p: *p,
            },
        }
    }
}

impl fmt::Display for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientField::Rationals => write!(f, "QQ"),
            CoefficientField::PrimeField(p) => write!(f, "gf:{p}"),
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// An exact field element, tagged with its field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Coeff {
    Rat(BigRational),
    Fp { v: u64, p: u64 },
}

impl Coeff {
    pub fn is_zero(&self) -> bool {
        match self {
            Coeff::Rat(r) => r.is_zero(),
            Coeff::Fp { v, .. } => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Coeff::Rat(r) => r.is_one(),
            Coeff::Fp { v, .. } => *v == 1,
        }
    }

    pub fn add(&self, other: &Coeff) -> Coeff {
        match (self, other) {
            (Coeff::Rat(a), Coeff::Rat(b)) => Coeff::Rat(a + b),
            (Coeff::Fp { v: a, p }, Coeff::Fp { v: b, p: q }) => {
                assert_eq!(p, q, "mixed prime fields");
                Coeff::Fp { v: (a + b) % p, p: *p }
            }
            _ => panic!("mixed coefficient fields"),
        }
    }

    pub fn sub(&self, other: &Coeff) -> Coeff {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Coeff {
        match self {
            Coeff::Rat(a) => Coeff::Rat(-a),
            Coeff::Fp { v, p } => Coeff::Fp { v: (p - v) % p, p: *p },
        }
    }

    pub fn mul(&self, other: &Coeff) -> Coeff {
        match (self, other) {
            (Coeff::Rat(a), Coeff::Rat(b)) => Coeff::Rat(a * b),
            (Coeff::Fp { v: a, p }, Coeff::Fp { v: b, p: q }) => {
                assert_eq!(p, q, "mixed prime fields");
                Coeff::Fp { v: a * b % p, p: *p }
            }
            _ => panic!("mixed coefficient fields"),
        }
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self) -> Coeff {
        match self {
            Coeff::Rat(a) => {
                assert!(!a.is_zero(), "inverse of zero");
                Coeff::Rat(a.recip())
            }
            Coeff::Fp { v, p } => {
                assert!(*v != 0, "inverse of zero");
                Coeff::Fp { v: fp_pow(*v, p - 2, *p), p: *p }
            }
        }
    }

    pub fn div(&self, other: &Coeff) -> Coeff {
        self.mul(&other.inv())
    }

    pub fn pow(&self, mut e: u64) -> Coeff {
        let mut base = self.clone();
        let mut acc = match self {
            Coeff::Rat(_) => Coeff::Rat(BigRational::one()),
            Coeff::Fp { p, .. } => Coeff::Fp { v: 1, p: *p },
        };
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Rat(r) => write!(f, "{r}"),
            Coeff::Fp { v, .. } => write!(f, "{v}"),
        }
    }
}

fn fp_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// Exponent vector of a monomial, one entry per ring variable.
///
/// `Ord` is graded reverse lexicographic: compare total degree first, then
/// the monomial whose last differing exponent is larger is the smaller one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u16>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, idx: usize) -> Self {
        let mut e = vec![0; nvars];
        e[idx] = 1;
        Monomial(e)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Exact division, when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            if a < b {
                return None;
            }
            out.push(a - b);
        }
        Some(Monomial(out))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let (da, db) = (self.total_degree(), other.total_degree());
        if da != db {
            return da.cmp(&db);
        }
        // grevlex tie break: larger exponent at the last differing position
        // means the smaller monomial.
        for i in (0..self.0.len()).rev() {
            match self.0[i].cmp(&other.0[i]) {
                Ordering::Equal => continue,
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A standard graded polynomial ring with named variables.
#[derive(Debug)]
pub struct PolyRing {
    vars: Vec<String>,
    field: CoefficientField,
    var_index: HashMap<String, usize>,
    basis_cache: Mutex<HashMap<u32, Arc<Vec<Monomial>>>>,
}

impl PartialEq for PolyRing {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && self.field == other.field
    }
}
impl Eq for PolyRing {}

impl PolyRing {
    pub fn new(vars: Vec<String>, field: CoefficientField) -> Arc<Self> {
        let mut var_index = HashMap::new();
        for (i, v) in vars.iter().enumerate() {
            let prev = var_index.insert(v.clone(), i);
            assert!(prev.is_none(), "duplicate variable name `{v}`");
        }
        Arc::new(PolyRing {
            vars,
            field,
            var_index,
            basis_cache: Mutex::new(HashMap::new()),
        })
    }

    /// Convenience constructor from `&str` names.
    pub fn with_names(names: &[&str], field: CoefficientField) -> Arc<Self> {
        Self::new(names.iter().map(|s| s.to_string()).collect(), field)
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn field(&self) -> &CoefficientField {
        &self.field
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_index.get(name).copied()
    }

    /// All monomials of total degree `d`, sorted by the term order.
    /// Results are memoized per ring.
    pub fn monomials_of_degree(&self, d: u32) -> Arc<Vec<Monomial>> {
        if let Some(b) = self.basis_cache.lock().unwrap().get(&d) {
            return b.clone();
        }
        let mut out = Vec::new();
        let mut exps = vec![0u16; self.nvars()];
        enumerate_monomials(&mut exps, 0, d as u16, &mut out);
        out.sort();
        let arc = Arc::new(out);
        self.basis_cache.lock().unwrap().insert(d, arc.clone());
        arc
    }
}

fn enumerate_monomials(exps: &mut [u16], pos: usize, remaining: u16, out: &mut Vec<Monomial>) {
    if pos + 1 == exps.len() {
        exps[pos] = remaining;
        out.push(Monomial(exps.to_vec()));
        exps[pos] = 0;
        return;
    }
    for e in 0..=remaining {
        exps[pos] = e;
        enumerate_monomials(exps, pos + 1, remaining - e, out);
    }
    exps[pos] = 0;
}

/// Homogeneity of a polynomial: zero, concentrated in one degree, or mixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Homogeneity {
    Zero,
    Degree(u32),
    Mixed,
}

/// A sparse multivariate polynomial in canonical form: a term map with no
/// zero coefficients, ordered by the ring's term order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    ring: Arc<PolyRing>,
    terms: BTreeMap<Monomial, Coeff>,
}

impl Polynomial {
    pub fn zero(ring: &Arc<PolyRing>) -> Self {
        Polynomial { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ring: &Arc<PolyRing>, c: Coeff) -> Self {
        let mut p = Self::zero(ring);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(ring.nvars()), c);
        }
        p
    }

    pub fn from_i64(ring: &Arc<PolyRing>, n: i64) -> Self {
        Self::constant(ring, ring.field().from_i64(n))
    }

    pub fn var(ring: &Arc<PolyRing>, idx: usize) -> Self {
        Self::monomial(ring, Monomial::var(ring.nvars(), idx), ring.field().one())
    }

    pub fn monomial(ring: &Arc<PolyRing>, m: Monomial, c: Coeff) -> Self {
        let mut p = Self::zero(ring);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms(ring: &Arc<PolyRing>, terms: impl IntoIterator<Item = (Monomial, Coeff)>) -> Self {
        let mut p = Self::zero(ring);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Coeff)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Coeff {
        self.terms.get(m).cloned().unwrap_or_else(|| self.ring.field().zero())
    }

    /// Constant term (coefficient of the monomial 1).
    pub fn constant_term(&self) -> Coeff {
        self.coeff(&Monomial::one(self.ring.nvars()))
    }

    /// Leading (largest) term in the ring's term order.
    pub fn leading_term(&self) -> Option<(&Monomial, &Coeff)> {
        self.terms.iter().next_back()
    }

    fn add_term(&mut self, m: Monomial, c: Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    e.insert(s);
                }
            }
        }
    }

    fn same_ring(&self, other: &Polynomial) -> Result<(), RingError> {
        if Arc::ptr_eq(&self.ring, &other.ring) || *self.ring == *other.ring {
            Ok(())
        } else {
            Err(RingError::RingMismatch)
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        self.same_ring(other).expect("ring mismatch in add");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Polynomial {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        self.same_ring(other).expect("ring mismatch in mul");
        let mut out = Polynomial::zero(&self.ring);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca.mul(cb));
            }
        }
        out
    }

    pub fn scale(&self, c: &Coeff) -> Polynomial {
        let mut out = Polynomial::zero(&self.ring);
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a.mul(c));
        }
        out
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Polynomial {
        let mut out = Polynomial::zero(&self.ring);
        for (mm, c) in &self.terms {
            out.terms.insert(mm.mul(m), c.clone());
        }
        out
    }

    /// Total degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.total_degree()).max()
    }

    pub fn homogeneity(&self) -> Homogeneity {
        let mut it = self.terms.keys();
        let first = match it.next() {
            None => return Homogeneity::Zero,
            Some(m) => m.total_degree(),
        };
        if it.all(|m| m.total_degree() == first) {
            Homogeneity::Degree(first)
        } else {
            Homogeneity::Mixed
        }
    }

    pub fn is_homogeneous_of_degree(&self, d: u32) -> bool {
        match self.homogeneity() {
            Homogeneity::Zero => true,
            Homogeneity::Degree(e) => e == d,
            Homogeneity::Mixed => false,
        }
    }

    /// Evaluate at a point, one field element per variable.
    pub fn specialize(&self, point: &[Coeff]) -> Result<Coeff, RingError> {
        if point.len() != self.ring.nvars() {
            return Err(RingError::LengthMismatch { got: point.len(), want: self.ring.nvars() });
        }
        let mut acc = self.ring.field().zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&point[i].pow(e as u64));
                }
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    /// Normalize so the leading coefficient is 1.
    pub fn monic(&self) -> Polynomial {
        match self.leading_term() {
            None => self.clone(),
            Some((_, c)) => self.scale(&c.inv()),
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let (neg, mag) = match c {
                Coeff::Rat(r) => (r.is_negative(), Coeff::Rat(r.abs())),
                Coeff::Fp { .. } => (false, c.clone()),
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mono = monomial_string(&self.ring, m);
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        Ok(())
    }
}

fn monomial_string(ring: &PolyRing, m: &Monomial) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.0.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(ring.vars()[i].clone()),
            _ => parts.push(format!("{}^{}", ring.vars()[i], e)),
        }
    }
    parts.join("*")
}

/// Parse a polynomial expression in the grammar used by all file formats:
/// integer (or `a/b` rational) literals, declared variable names, operators
/// `+ - * ^` with `^` tightest then `*` then `+/-`, explicit `*` between
/// factors, parentheses, insignificant whitespace.
pub fn poly_parse(text: &str, ring: &Arc<PolyRing>) -> Result<Polynomial, RingError> {
    let mut p = Parser { ring, bytes: text.as_bytes(), pos: 0 };
    let poly = p.parse_expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(RingError::Parse { pos: p.pos, msg: "trailing input".into() });
    }
    Ok(poly)
}

struct Parser<'a> {
    ring: &'a Arc<PolyRing>,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn parse_expr(&mut self) -> Result<Polynomial, RingError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                self.parse_term()?.neg()
            }
            Some(b'+') => {
                self.pos += 1;
                self.parse_term()?
            }
            _ => self.parse_term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.parse_term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.parse_term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Polynomial, RingError> {
        let mut acc = self.parse_factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.mul(&self.parse_factor()?);
        }
        Ok(acc)
    }

    fn parse_factor(&mut self) -> Result<Polynomial, RingError> {
        let base = self.parse_atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.parse_uint()? as u32;
            let mut acc = Polynomial::from_i64(self.ring, 1);
            for _ in 0..e {
                acc = acc.mul(&base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Polynomial, RingError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.parse_expr()?;
                if self.peek() != Some(b')') {
                    return Err(RingError::Parse { pos: self.pos, msg: "expected `)`".into() });
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(self.parse_factor()?.neg())
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.parse_uint()?;
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    self.skip_ws();
                    let start = self.pos;
                    let den = self.parse_uint()?;
                    if den == 0 {
                        return Err(RingError::Parse { pos: start, msg: "zero denominator".into() });
                    }
                    match self.ring.field() {
                        CoefficientField::Rationals => {
                            let r = BigRational::new(BigInt::from(num), BigInt::from(den));
                            Ok(Polynomial::constant(self.ring, Coeff::Rat(r)))
                        }
                        CoefficientField::PrimeField(_) => {
                            let n = self.ring.field().from_i64(num as i64);
                            let d = self.ring.field().from_i64(den as i64);
                            if d.is_zero() {
                                return Err(RingError::Parse {
                                    pos: start,
                                    msg: "denominator vanishes in the prime field".into(),
                                });
                            }
                            Ok(Polynomial::constant(self.ring, n.div(&d)))
                        }
                    }
                } else {
                    Ok(Polynomial::from_i64(self.ring, num as i64))
                }
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.bytes.len()
                    && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
                match self.ring.var_index(name) {
                    Some(i) => Ok(Polynomial::var(self.ring, i)),
                    None => Err(RingError::UnknownVariable { name: name.to_string(), pos: start }),
                }
            }
            _ => Err(RingError::Parse { pos: self.pos, msg: "expected a factor".into() }),
        }
    }

    fn parse_uint(&mut self) -> Result<u64, RingError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(RingError::Parse { pos: start, msg: "expected an integer".into() });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse::<u64>()
            .map_err(|_| RingError::Parse { pos: start, msg: "integer literal too large".into() })
    }
}

/// Multiply two polynomials, failing on a ring mismatch.
pub fn poly_mul(a: &Polynomial, b: &Polynomial) -> Result<Polynomial, RingError> {
    if !(Arc::ptr_eq(a.ring(), b.ring()) || **a.ring() == **b.ring()) {
        return Err(RingError::RingMismatch);
    }
    Ok(a.mul(b))
}
