//! Arithmetic in GF(q) for prime q and for binary extension fields GF(2^m),
//! plus exact dense linear algebra over those fields.
//!
//! Elements are plain `u32` values in `[0, q)`. For GF(2^m) the value is the
//! coefficient bitmask of the residue polynomial (bit i = coefficient of x^i).

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// A field element, always reduced into `[0, q)`.
pub type FieldElement = u32;

/// Largest supported extension degree.
pub const MAX_EXTENSION_DEGREE: u32 = 16;

/// Largest supported prime order.
pub const MAX_PRIME: u64 = 1 << 31;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GaloisError {
    #[error("order {0} is not a supported prime")]
    NonPrimeOrder(u64),
    #[error("polynomial {0:#x} is reducible over GF(2)")]
    ReduciblePolynomial(u32),
    #[error("polynomial {0:#x} has unsupported degree (expected 1..=16)")]
    BadPolynomial(u32),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("linear system is inconsistent")]
    InconsistentSystem,
    #[error("block length {n} exceeds field order {q}")]
    BlockTooLong { n: usize, q: u32 },
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("input matrix does not have full row rank")]
    RankDeficientInput,
    #[error("element {value} out of range for GF({q})")]
    ElementOutOfRange { value: u64, q: u32 },
    #[error("matrix text parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, GaloisError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Prime,
    BinaryExtension,
}

/// Default irreducible (primitive, except for m = 8) polynomials for GF(2^m).
/// m = 8 uses the byte-field polynomial x^8 + x^4 + x^3 + x + 1.
const DEFAULT_POLYS: [u32; 17] = [
    0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11B, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443,
    0x8003, 0x1100B,
];

/// Default reduction polynomial for GF(2^m).
pub fn default_polynomial(m: u32) -> Option<u32> {
    DEFAULT_POLYS.get(m as usize).copied().filter(|&p| p != 0)
}

struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
}

struct Inner {
    kind: FieldKind,
    q: u32,
    poly: u32,
    /// Smallest multiplicative generator (extension fields only).
    generator: u32,
    tables: Option<Tables>,
}

/// A finite field GF(q). Cheap to clone; immutable after construction.
#[derive(Clone)]
pub struct Field {
    inner: Arc<Inner>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            FieldKind::Prime => write!(f, "GF({})", self.q()),
            FieldKind::BinaryExtension => write!(f, "GF({}; {:#x})", self.q(), self.poly()),
        }
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.kind() == other.kind() && self.q() == other.q() && self.poly() == other.poly()
    }
}

impl Eq for Field {}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p.is_multiple_of(2) {
        return p == 2;
    }
    let mut d = 3u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn degree(poly: u32) -> u32 {
    31 - poly.leading_zeros()
}

/// Remainder of `a` modulo `b` as GF(2)[x] polynomials.
fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = degree(b);
    while a != 0 && degree(a) >= db {
        a ^= b << (degree(a) - db);
    }
    a
}

/// Exhaustive trial division by every polynomial of degree 1..=m/2.
fn is_irreducible(poly: u32) -> bool {
    let m = degree(poly);
    for d in 1..=m / 2 {
        for low in 0..(1u32 << d) {
            let f = (1 << d) | low;
            if poly_rem(poly, f) == 0 {
                return false;
            }
        }
    }
    true
}

fn clmul_mod(mut a: u32, mut b: u32, poly: u32, m: u32) -> u32 {
    let mut acc = 0u32;
    let top = 1u32 << m;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= poly;
        }
    }
    acc
}

impl Field {
    /// Prime field GF(p).
    pub fn prime(p: u64) -> Result<Self> {
        if p > MAX_PRIME || !is_prime(p) {
            return Err(GaloisError::NonPrimeOrder(p));
        }
        Ok(Field {
            inner: Arc::new(Inner {
                kind: FieldKind::Prime,
                q: p as u32,
                poly: 0,
                generator: 0,
                tables: None,
            }),
        })
    }

    /// GF(2^m) with the default reduction polynomial.
    pub fn binary(m: u32) -> Result<Self> {
        let poly = default_polynomial(m).ok_or(GaloisError::BadPolynomial(m))?;
        Self::binary_with_poly(poly)
    }

    /// GF(2^m) defined by an explicit polynomial bitmask of degree m.
    pub fn binary_with_poly(poly: u32) -> Result<Self> {
        if poly < 2 {
            return Err(GaloisError::BadPolynomial(poly));
        }
        let m = degree(poly);
        if m == 0 || m > MAX_EXTENSION_DEGREE {
            return Err(GaloisError::BadPolynomial(poly));
        }
        if !is_irreducible(poly) {
            return Err(GaloisError::ReduciblePolynomial(poly));
        }
        let q = 1u32 << m;
        let order = (q - 1) as usize;

        // smallest element whose powers cover every nonzero element
        let mut generator = 0;
        let mut exp = Vec::new();
        for g in 2..q.max(3) {
            let g = if q == 2 { 1 } else { g };
            exp.clear();
            let mut x = 1u32;
            loop {
                exp.push(x);
                x = clmul_mod(x, g, poly, m);
                if x == 1 || exp.len() > order {
                    break;
                }
            }
            if exp.len() == order {
                generator = g;
                break;
            }
        }
        debug_assert!(generator != 0);
        let mut log = vec![0u32; q as usize];
        for (i, &e) in exp.iter().enumerate() {
            log[e as usize] = i as u32;
        }

        Ok(Field {
            inner: Arc::new(Inner {
                kind: FieldKind::BinaryExtension,
                q,
                poly,
                generator,
                tables: Some(Tables { exp, log }),
            }),
        })
    }

    /// Builds a field from its kind and either a prime order or a polynomial.
    pub fn new(kind: FieldKind, order_or_poly: u64) -> Result<Self> {
        match kind {
            FieldKind::Prime => Self::prime(order_or_poly),
            FieldKind::BinaryExtension => {
                let poly = u32::try_from(order_or_poly)
                    .map_err(|_| GaloisError::BadPolynomial(u32::MAX))?;
                Self::binary_with_poly(poly)
            }
        }
    }

    /// Field of order q: prime fields for prime q, default-polynomial
    /// extension fields for q = 2^m with m >= 2.
    pub fn with_order(q: u64) -> Result<Self> {
        if q >= 4 && q.is_power_of_two() {
            let m = q.trailing_zeros();
            if m > MAX_EXTENSION_DEGREE {
                return Err(GaloisError::NonPrimeOrder(q));
            }
            Self::binary(m)
        } else {
            Self::prime(q)
        }
    }

    pub fn kind(&self) -> FieldKind {
        self.inner.kind
    }

    pub fn q(&self) -> u32 {
        self.inner.q
    }

    /// Reduction polynomial (0 for prime fields).
    pub fn poly(&self) -> u32 {
        self.inner.poly
    }

    /// True when this is the field `with_order(q)` would build.
    pub fn is_canonical(&self) -> bool {
        match self.kind() {
            FieldKind::Prime => true,
            FieldKind::BinaryExtension => {
                default_polynomial(self.q().trailing_zeros()) == Some(self.poly())
            }
        }
    }

    /// Bits needed to hold one element.
    pub fn element_bits(&self) -> u32 {
        32 - (self.q() - 1).leading_zeros()
    }

    pub fn check(&self, a: u64) -> Result<FieldElement> {
        if a < self.q() as u64 {
            Ok(a as u32)
        } else {
            Err(GaloisError::ElementOutOfRange { value: a, q: self.q() })
        }
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match self.inner.kind {
            FieldKind::BinaryExtension => a ^ b,
            FieldKind::Prime => ((a as u64 + b as u64) % self.inner.q as u64) as u32,
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        match self.inner.kind {
            FieldKind::BinaryExtension => a,
            FieldKind::Prime => {
                if a == 0 {
                    0
                } else {
                    self.inner.q - a
                }
            }
        }
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match &self.inner.tables {
            Some(t) => {
                if a == 0 || b == 0 {
                    0
                } else {
                    let order = self.inner.q - 1;
                    let s = (t.log[a as usize] + t.log[b as usize]) % order;
                    t.exp[s as usize]
                }
            }
            None => ((a as u64 * b as u64) % self.inner.q as u64) as u32,
        }
    }

    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: FieldElement) -> Option<FieldElement> {
        if a == 0 {
            return None;
        }
        match &self.inner.tables {
            Some(t) => {
                let order = self.inner.q - 1;
                Some(t.exp[((order - t.log[a as usize]) % order) as usize])
            }
            None => Some(self.pow(a, self.inner.q as u64 - 2)),
        }
    }

    /// The j-th evaluation point of the canonical enumeration: `1..=q-1` for
    /// prime fields, `1, g, g^2, ...` for extension fields, and 0 as the last
    /// point (j = q - 1).
    pub fn evaluation_point(&self, j: usize) -> Option<FieldElement> {
        let q = self.q() as usize;
        if j >= q {
            return None;
        }
        if j == q - 1 {
            return Some(0);
        }
        Some(match &self.inner.tables {
            Some(t) => t.exp[j],
            None => j as u32 + 1,
        })
    }

    /// Generator used for the extension-field enumeration (0 for prime fields).
    pub fn generator(&self) -> FieldElement {
        self.inner.generator
    }
}

/// Dense row-major matrix over GF(q).
#[derive(Clone, PartialEq, Eq)]
pub struct FqMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl fmt::Debug for FqMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FqMatrix {:?} {}x{}", self.field, self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl FqMatrix {
    pub fn new(field: &Field, rows: usize, cols: usize, data: Vec<FieldElement>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(GaloisError::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        for &v in &data {
            field.check(v as u64)?;
        }
        Ok(FqMatrix { field: field.clone(), rows, cols, data })
    }

    pub fn from_rows(field: &Field, rows: &[Vec<FieldElement>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(GaloisError::DimensionMismatch("ragged rows".into()));
        }
        Self::new(field, rows.len(), cols, rows.concat())
    }

    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        FqMatrix { field: field.clone(), rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        debug_assert!(v < self.field.q());
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<FieldElement>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    fn same_field(&self, other: &FqMatrix) -> Result<()> {
        if self.field != other.field {
            return Err(GaloisError::DimensionMismatch("operands over different fields".into()));
        }
        Ok(())
    }

    pub fn mul(&self, other: &FqMatrix) -> Result<FqMatrix> {
        self.same_field(other)?;
        if self.cols != other.rows {
            return Err(GaloisError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = FqMatrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = f.add(out.data[idx], f.mul(a, other.get(l, j)));
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if v.len() != self.cols {
            return Err(GaloisError::DimensionMismatch(format!(
                "vector of length {} for {} columns",
                v.len(),
                self.cols
            )));
        }
        let f = &self.field;
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect())
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &FqMatrix) -> Result<FqMatrix> {
        self.same_field(other)?;
        if self.cols != other.cols {
            return Err(GaloisError::DimensionMismatch("column counts differ".into()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(FqMatrix { field: self.field.clone(), rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Reduced row echelon form in place; returns pivot columns.
    fn rref_in_place(&mut self, limit_cols: usize) -> Vec<usize> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..limit_cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = f.inv(self.get(r, c)).expect("pivot is nonzero");
            for j in 0..self.cols {
                let v = self.get(r, j);
                self.set(r, j, f.mul(v, inv));
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let factor = self.get(i, c);
                if factor == 0 {
                    continue;
                }
                for j in 0..self.cols {
                    let v = f.sub(self.get(i, j), f.mul(factor, self.get(r, j)));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let cols = m.cols;
        m.rref_in_place(cols).len()
    }

    /// Returns one solution of `self * x = b`.
    pub fn solve(&self, b: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if b.len() != self.rows {
            return Err(GaloisError::DimensionMismatch(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.rows
            )));
        }
        let mut aug = FqMatrix::zeros(&self.field, self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, self.cols, self.field.check(b[r] as u64)?);
        }
        let pivots = aug.rref_in_place(self.cols);
        for r in pivots.len()..self.rows {
            if aug.get(r, self.cols) != 0 {
                return Err(GaloisError::InconsistentSystem);
            }
        }
        let mut x = vec![0; self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug.get(r, self.cols);
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<FqMatrix> {
        if self.rows != self.cols {
            return Err(GaloisError::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut aug = FqMatrix::zeros(&self.field, n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, n + r, 1);
        }
        if aug.rref_in_place(n).len() < n {
            return Err(GaloisError::SingularMatrix);
        }
        let mut out = FqMatrix::zeros(&self.field, n, n);
        for r in 0..n {
            for c in 0..n {
                out.set(r, c, aug.get(r, n + c));
            }
        }
        Ok(out)
    }

    /// Columns `cols` of this matrix, in the order given.
    pub fn select_columns(&self, cols: &[usize]) -> FqMatrix {
        let mut out = FqMatrix::zeros(&self.field, self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.set(r, j, self.get(r, c));
            }
        }
        out
    }

    /// Text fixture format: `q rows cols` then row-major integers.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.field.q(), self.rows, self.cols);
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(u32::to_string).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    /// Parses the text fixture format; the field is rebuilt from `q` with
    /// `Field::with_order`.
    pub fn parse_text(text: &str) -> Result<FqMatrix> {
        let mut tokens = text.split_whitespace().map(|t| {
            t.parse::<u64>().map_err(|e| GaloisError::Parse(format!("{t:?}: {e}")))
        });
        let mut next = |what: &str| {
            tokens.next().unwrap_or_else(|| Err(GaloisError::Parse(format!("missing {what}"))))
        };
        let q = next("q")?;
        let rows = next("rows")? as usize;
        let cols = next("cols")? as usize;
        let field = Field::with_order(q)?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(field.check(next("entry")?)?);
        }
        if tokens.next().is_some() {
            return Err(GaloisError::Parse("trailing tokens".into()));
        }
        FqMatrix::new(&field, rows, cols, data)
    }
}

/// Vandermonde parity-check matrix of an MDS code: entry (i, j) = α_j^i for
/// i in [0, n-k), with α_j from [`Field::evaluation_point`].
pub fn rs_parity_check(n: usize, k: usize, field: &Field) -> Result<FqMatrix> {
    if k == 0 || k >= n {
        return Err(GaloisError::BadParameters(format!("need 0 < k < n, got n={n}, k={k}")));
    }
    if n > field.q() as usize {
        return Err(GaloisError::BlockTooLong { n, q: field.q() });
    }
    let r = n - k;
    let mut h = FqMatrix::zeros(field, r, n);
    for j in 0..n {
        let alpha = field.evaluation_point(j).expect("n <= q");
        let mut p = 1;
        for i in 0..r {
            h.set(i, j, p);
            p = field.mul(p, alpha);
        }
    }
    Ok(h)
}

/// Rows completing the row space of `h` to the full space: standard basis
/// vectors tried in index order, kept when they increase the rank.
pub fn complete_basis(h: &FqMatrix) -> Result<FqMatrix> {
    let f = h.field().clone();
    let n = h.cols();
    if h.rank() != h.rows() || h.rows() >= n {
        return Err(GaloisError::RankDeficientInput);
    }

    // incremental echelon basis: (pivot, row) with later rows zero at earlier pivots
    let mut basis: Vec<(usize, Vec<FieldElement>)> = Vec::with_capacity(n);
    let insert = |mut v: Vec<FieldElement>, basis: &mut Vec<(usize, Vec<FieldElement>)>| {
        for (p, row) in basis.iter() {
            let factor = v[*p];
            if factor != 0 {
                for (x, &y) in v.iter_mut().zip(row) {
                    *x = f.sub(*x, f.mul(factor, y));
                }
            }
        }
        match v.iter().position(|&x| x != 0) {
            Some(p) => {
                let inv = f.inv(v[p]).expect("nonzero");
                for x in v.iter_mut() {
                    *x = f.mul(*x, inv);
                }
                basis.push((p, v));
                true
            }
            None => false,
        }
    };

    for r in 0..h.rows() {
        let added = insert(h.row(r).to_vec(), &mut basis);
        debug_assert!(added);
    }
    let mut chosen = Vec::new();
    for j in 0..n {
        if basis.len() == n {
            break;
        }
        let mut e = vec![0; n];
        e[j] = 1;
        if insert(e, &mut basis) {
            chosen.push(j);
        }
    }
    let mut d = FqMatrix::zeros(h.field(), chosen.len(), n);
    for (r, &j) in chosen.iter().enumerate() {
        d.set(r, j, 1);
    }
    Ok(d)
}
