//! Matrices over finite fields, acting on column vectors.
//!
//! The primary canonical form arranges companion blocks `F(χ)` of primary
//! polynomials `χ = f^a`; a companion block has ones on the subdiagonal and
//! `−c_i` in its last column, i.e. it is the matrix of `X·` on
//! `k[X]/(χ)` in the basis `1, X, …, X^{d−1}`.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::arith::{self, Ratio};
use crate::error::{Error, Result};
use crate::ff::{parse_field, Field, FieldElem};
use crate::poly::{Poly, QuotientRing};

pub type Vector = Vec<FieldElem>;

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix[{}] {}x{}", self.field, self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|c| c.0.to_string()).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        Ok(())
    }
}

/// The text format: `p^k n` on the first line, then the rows.
impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.field, self.rows)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|c| c.0.to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zero(field: &Field, rows: usize, cols: usize) -> Self {
        Matrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![FieldElem::ZERO; rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        Matrix::scalar(field, n, FieldElem::ONE)
    }

    pub fn scalar(field: &Field, n: usize, c: FieldElem) -> Self {
        let mut m = Matrix::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, c);
        }
        m
    }

    pub fn from_rows(field: &Field, rows: Vec<Vec<FieldElem>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Matrix {
            field: field.clone(),
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_codes(field: &Field, rows: &[&[u64]]) -> Self {
        Matrix::from_rows(
            field,
            rows.iter()
                .map(|r| r.iter().map(|&c| FieldElem(c)).collect())
                .collect(),
        )
    }

    /// Columns given as vectors.
    pub fn from_cols(field: &Field, n: usize, cols: &[Vector]) -> Self {
        let mut m = Matrix::zero(field, n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, &x) in c.iter().enumerate().take(n) {
                m.set(i, j, x);
            }
        }
        m
    }

    pub fn diag(field: &Field, d: &[FieldElem]) -> Self {
        let mut m = Matrix::zero(field, d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m.set(i, i, x);
        }
        m
    }

    pub fn random(field: &Field, n: usize, rng: &mut impl Rng) -> Self {
        let q = field.q();
        let mut m = Matrix::zero(field, n, n);
        for x in m.data.iter_mut() {
            *x = FieldElem(rng.gen_range(0..q));
        }
        m
    }

    pub fn random_invertible(field: &Field, n: usize, rng: &mut impl Rng) -> Self {
        loop {
            let m = Matrix::random(field, n, rng);
            if m.rank() == n {
                return m;
            }
        }
    }

    /// Companion matrix of a monic polynomial.
    pub fn companion(f: &Poly) -> Self {
        let fld = f.field();
        let d = f.deg();
        let mut m = Matrix::zero(fld, d, d);
        for i in 1..d {
            m.set(i, i - 1, FieldElem::ONE);
        }
        for i in 0..d {
            m.set(i, d - 1, fld.neg(f.coeff(i)));
        }
        m
    }

    pub fn block_diag(field: &Field, blocks: &[Matrix]) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let mut m = Matrix::zero(field, n, n);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m.set(off + i, off + j, b.get(i, j));
                }
            }
            off += b.rows;
        }
        m
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Dimension of a square matrix.
    pub fn n(&self) -> usize {
        self.rows
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> FieldElem {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: FieldElem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[FieldElem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn entries(&self) -> &[FieldElem] {
        &self.data
    }

    fn check_same_shape(&self, o: &Matrix) -> Result<()> {
        if *self.field != *o.field || self.rows != o.rows || self.cols != o.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} over {} vs {}x{} over {}",
                self.rows, self.cols, self.field, o.rows, o.cols, o.field
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let f = &self.field;
        Matrix {
            field: f.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&o.data)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        }
    }

    pub fn sub(&self, o: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let f = &self.field;
        Matrix {
            field: f.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&o.data)
                .map(|(&a, &b)| f.sub(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: FieldElem) -> Matrix {
        let f = &self.field;
        Matrix {
            data: self.data.iter().map(|&a| f.mul(a, c)).collect(),
            ..self.clone()
        }
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows, "shape mismatch in product");
        let f = &self.field;
        let mut r = Matrix::zero(f, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let idx = i * o.cols + j;
                    r.data[idx] = f.add(r.data[idx], f.mul(a, o.get(k, j)));
                }
            }
        }
        r
    }

    pub fn apply(&self, v: &[FieldElem]) -> Vector {
        let f = &self.field;
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(FieldElem::ZERO, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut r = Matrix::zero(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                r.set(j, i, self.get(i, j));
            }
        }
        r
    }

    pub fn map(&self, g: impl Fn(FieldElem) -> FieldElem) -> Matrix {
        Matrix {
            data: self.data.iter().map(|&a| g(a)).collect(),
            ..self.clone()
        }
    }

    pub fn pow(&self, mut e: u64) -> Matrix {
        let mut base = self.clone();
        let mut r = Matrix::identity(&self.field, self.rows);
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        r
    }

    pub fn is_identity(&self) -> bool {
        self.is_scalar_of(FieldElem::ONE)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    fn is_scalar_of(&self, c: FieldElem) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| self.get(i, j) == if i == j { c } else { FieldElem::ZERO })
            })
    }

    /// `Some(c)` when the matrix is `c·I`.
    pub fn as_scalar(&self) -> Option<FieldElem> {
        if self.rows == 0 {
            return Some(FieldElem::ONE);
        }
        let c = self.get(0, 0);
        self.is_scalar_of(c).then_some(c)
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let f = &self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    m.data.swap(pr * m.cols + j, r * m.cols + j);
                }
            }
            let inv = f.inv(m.get(r, c));
            for j in c..m.cols {
                let v = f.mul(m.get(r, j), inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c);
                if factor.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let v = f.sub(m.get(i, j), f.mul(factor, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the null space `{v : Mv = 0}`.
    pub fn kernel(&self) -> Vec<Vector> {
        let f = &self.field;
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![FieldElem::ZERO; self.cols];
                v[fc] = FieldElem::ONE;
                for (ri, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(r.get(ri, fc));
                }
                v
            })
            .collect()
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(
                "inverse of a non-square matrix".into(),
            ));
        }
        let n = self.rows;
        let mut aug = Matrix::zero(&self.field, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, n + i, FieldElem::ONE);
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::Singular);
        }
        let mut inv = Matrix::zero(&self.field, n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, r.get(i, n + j));
            }
        }
        Ok(inv)
    }

    pub fn det(&self) -> FieldElem {
        let f = &self.field;
        let mut m = self.clone();
        let n = self.rows;
        let mut det = FieldElem::ONE;
        for c in 0..n {
            let Some(pr) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return FieldElem::ZERO;
            };
            if pr != c {
                for j in 0..n {
                    m.data.swap(pr * n + j, c * n + j);
                }
                det = f.neg(det);
            }
            let piv = m.get(c, c);
            det = f.mul(det, piv);
            let inv = f.inv(piv);
            for i in c + 1..n {
                let factor = f.mul(m.get(i, c), inv);
                if factor.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = f.sub(m.get(i, j), f.mul(factor, m.get(c, j)));
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    /// `p(g)` by Horner's rule.
    pub fn eval_poly(&self, p: &Poly) -> Matrix {
        let n = self.rows;
        let mut acc = Matrix::zero(&self.field, n, n);
        for &c in p.coeffs().iter().rev() {
            acc = acc.mul(self).add(&Matrix::scalar(&self.field, n, c));
        }
        acc
    }

    /// Characteristic polynomial via reduction to Hessenberg form.
    pub fn char_poly(&self) -> Poly {
        assert!(self.is_square());
        let f = &self.field;
        let n = self.rows;
        let mut h = self.clone();
        for c in 0..n.saturating_sub(2) {
            let Some(pr) = (c + 1..n).find(|&i| !h.get(i, c).is_zero()) else {
                continue;
            };
            let t = c + 1;
            if pr != t {
                for j in 0..n {
                    h.data.swap(pr * n + j, t * n + j);
                }
                for i in 0..n {
                    h.data.swap(i * n + pr, i * n + t);
                }
            }
            let inv = f.inv(h.get(t, c));
            for j in t + 1..n {
                let u = f.mul(h.get(j, c), inv);
                if u.is_zero() {
                    continue;
                }
                for col in 0..n {
                    let v = f.sub(h.get(j, col), f.mul(u, h.get(t, col)));
                    h.set(j, col, v);
                }
                for row in 0..n {
                    let v = f.add(h.get(row, t), f.mul(u, h.get(row, j)));
                    h.set(row, t, v);
                }
            }
        }
        let x = Poly::x(f);
        let mut ps = vec![Poly::one(f)];
        for m in 1..=n {
            let mut pm = x
                .sub(&Poly::constant(f, h.get(m - 1, m - 1)))
                .mul(&ps[m - 1]);
            let mut t = FieldElem::ONE;
            for i in 1..m {
                t = f.mul(t, h.get(m - i, m - i - 1));
                let c = f.mul(t, h.get(m - i - 1, m - 1));
                pm = pm.sub(&ps[m - i - 1].scale(c));
            }
            ps.push(pm);
        }
        ps.pop().unwrap()
    }

    /// Parses the text format.
    pub fn parse(text: &str) -> Result<Matrix> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, 1, "empty matrix file"))?;
        let mut parts = header.split_whitespace();
        let fs = parts
            .next()
            .ok_or_else(|| Error::parse(1, 1, "missing field descriptor"))?;
        let field = parse_field(fs).map_err(|e| match e {
            Error::Parse { msg, .. } => Error::parse(1, 1, msg),
            other => other,
        })?;
        let ns = parts
            .next()
            .ok_or_else(|| Error::parse(1, fs.len() + 2, "missing dimension"))?;
        let n: usize = ns
            .parse()
            .map_err(|_| Error::parse(1, fs.len() + 2, format!("bad dimension {ns:?}")))?;
        let mut rows = Vec::with_capacity(n);
        for (li, line) in lines {
            if rows.len() == n {
                return Err(Error::parse(li + 1, 1, "too many rows"));
            }
            let mut row = Vec::with_capacity(n);
            let mut col = 1;
            for tok in line.split_whitespace() {
                col = line[col - 1..].find(tok).map_or(col, |o| col + o);
                let v: u64 = tok
                    .parse()
                    .map_err(|_| Error::parse(li + 1, col, format!("bad entry {tok:?}")))?;
                if v >= field.q() {
                    return Err(Error::parse(
                        li + 1,
                        col,
                        format!("entry {v} not below q = {}", field.q()),
                    ));
                }
                row.push(FieldElem(v));
                col += tok.len();
            }
            if row.len() != n {
                return Err(Error::parse(
                    li + 1,
                    1,
                    format!("expected {n} entries, found {}", row.len()),
                ));
            }
            rows.push(row);
        }
        if rows.len() != n {
            return Err(Error::parse(
                rows.len() + 2,
                1,
                format!("expected {n} rows"),
            ));
        }
        if n == 0 {
            return Ok(Matrix::zero(&field, 0, 0));
        }
        Ok(Matrix::from_rows(&field, rows))
    }
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<u64>> = (0..self.rows)
            .map(|r| self.row(r).iter().map(|c| c.0).collect())
            .collect();
        rows.serialize(ser)
    }
}

// ---- subspaces, given by spanning column vectors ----

/// Echelon basis of the span.
pub fn span_basis(field: &Field, n: usize, vs: &[Vector]) -> Vec<Vector> {
    if vs.is_empty() {
        return vec![];
    }
    let m = Matrix::from_rows(field, vs.to_vec());
    let (r, p) = m.rref();
    (0..p.len())
        .map(|i| r.row(i).to_vec())
        .collect::<Vec<_>>()
        .into_iter()
        .filter(|v| v.len() == n)
        .collect()
}

pub fn dim_span(field: &Field, vs: &[Vector]) -> usize {
    if vs.is_empty() {
        return 0;
    }
    Matrix::from_rows(field, vs.to_vec()).rank()
}

pub fn in_span(field: &Field, vs: &[Vector], v: &[FieldElem]) -> bool {
    let mut all = vs.to_vec();
    all.push(v.to_vec());
    dim_span(field, &all) == dim_span(field, vs)
}

pub fn intersect(field: &Field, n: usize, u: &[Vector], w: &[Vector]) -> Vec<Vector> {
    if u.is_empty() || w.is_empty() {
        return vec![];
    }
    // kernel of [U | −W]
    let mut cols: Vec<Vector> = u.to_vec();
    cols.extend(w.iter().map(|v| v.iter().map(|&x| field.neg(x)).collect()));
    let m = Matrix::from_cols(field, n, &cols);
    let vs: Vec<Vector> = m
        .kernel()
        .into_iter()
        .map(|k| {
            let mut v = vec![FieldElem::ZERO; n];
            for (i, basis) in u.iter().enumerate() {
                if k[i].is_zero() {
                    continue;
                }
                for (x, &b) in v.iter_mut().zip(basis) {
                    *x = field.add(*x, field.mul(k[i], b));
                }
            }
            v
        })
        .collect();
    span_basis(field, n, &vs)
}

/// `{v : g v ∈ W}` for invertible `g`.
pub fn preimage(g_inv: &Matrix, w: &[Vector]) -> Vec<Vector> {
    w.iter().map(|v| g_inv.apply(v)).collect()
}

// ---- invariant tuples ----

/// A primary polynomial `irr^exp`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Primary {
    pub irr: Poly,
    pub exp: u32,
}

impl Primary {
    pub fn new(irr: Poly, exp: u32) -> Self {
        Primary { irr, exp }
    }

    pub fn deg(&self) -> usize {
        self.irr.deg() * self.exp as usize
    }

    pub fn poly(&self) -> Poly {
        self.irr.pow(self.exp)
    }
}

impl fmt::Display for Primary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 1 {
            write!(f, "({})", self.irr)
        } else {
            write!(f, "({})^{}", self.irr, self.exp)
        }
    }
}

/// Multiplicities `c_χ` of primary blocks, together with the dimension `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantTuple {
    pub n: usize,
    pub entries: BTreeMap<Primary, usize>,
}

#[derive(Serialize)]
struct TupleEntryJson {
    poly: String,
    irreducible: String,
    exponent: u32,
    multiplicity: usize,
    q: String,
}

impl InvariantTuple {
    pub fn new(n: usize) -> Self {
        InvariantTuple {
            n,
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, irr: Poly, exp: u32, c: usize) {
        if c > 0 {
            *self.entries.entry(Primary::new(irr, exp)).or_insert(0) += c;
        }
    }

    pub fn c(&self, chi: &Primary) -> usize {
        self.entries.get(chi).copied().unwrap_or(0)
    }

    /// `n_χ = deg(χ)·c_χ`.
    pub fn n_chi(&self, chi: &Primary) -> usize {
        chi.deg() * self.c(chi)
    }

    /// `q_χ = n_χ / n`.
    pub fn q_chi(&self, chi: &Primary) -> Ratio {
        Ratio::new(self.n_chi(chi) as i64, self.n as i64)
    }

    pub fn support_dim(&self) -> usize {
        self.entries.iter().map(|(k, &c)| k.deg() * c).sum()
    }

    pub fn is_full_support(&self) -> bool {
        self.support_dim() == self.n
    }

    /// `r_ξ` reconstructed from the tuple: `Σ_χ (deg gcd(χ, ξ)/deg χ)·q_χ`.
    pub fn r_xi(&self, xi: &Poly) -> Ratio {
        let mut s = Ratio::zero();
        for (chi, &c) in &self.entries {
            let g = chi.poly().gcd(xi).deg();
            // (g / deg χ) · deg χ · c / n
            s = s + Ratio::new((g * c) as i64, self.n as i64);
        }
        s
    }

    pub fn is_semisimple(&self) -> bool {
        self.entries.keys().all(|k| k.exp == 1)
    }

    /// Minimal polynomial `∏ f^{max exponent}`.
    pub fn minimal_polynomial(&self, field: &Field) -> Poly {
        let mut top: BTreeMap<&Poly, u32> = BTreeMap::new();
        for k in self.entries.keys() {
            let e = top.entry(&k.irr).or_insert(0);
            *e = (*e).max(k.exp);
        }
        top.iter()
            .fold(Poly::one(field), |acc, (f, &e)| acc.mul(&f.pow(e)))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<TupleEntryJson> = self
            .entries
            .iter()
            .map(|(k, &c)| TupleEntryJson {
                poly: k.poly().to_csv(),
                irreducible: k.irr.to_csv(),
                exponent: k.exp,
                multiplicity: c,
                q: self.q_chi(k).to_string(),
            })
            .collect();
        serde_json::json!({ "n": self.n, "entries": entries })
    }
}

impl fmt::Display for InvariantTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(k, c)| format!("{k}↦{c}"))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

pub fn rank_metric(g: &Matrix, h: &Matrix) -> Result<Ratio> {
    g.check_same_shape(h)?;
    Ok(Ratio::new(g.sub(h).rank() as i64, g.n().max(1) as i64))
}

struct PrimaryComponent {
    irr: Poly,
    /// kernel dimensions of f(g)^j for j = 0..=top
    dims: Vec<usize>,
    /// kernels of f(g)^j
    kernels: Vec<Vec<Vector>>,
    f_of_g: Matrix,
}

fn primary_components(g: &Matrix) -> Vec<PrimaryComponent> {
    let n = g.n();
    let fld = g.field();
    if n == 0 {
        return vec![];
    }
    let chi = g.char_poly();
    let fac = chi
        .factor()
        .expect("characteristic polynomial has degree ≥ 1");
    fac.factors
        .into_iter()
        .map(|(irr, m)| {
            let fg = g.eval_poly(&irr);
            let mut dims = vec![0];
            let mut kernels = vec![vec![]];
            let mut pw = Matrix::identity(fld, n);
            for _ in 0..m {
                pw = pw.mul(&fg);
                let k = pw.kernel();
                let d = k.len();
                dims.push(d);
                kernels.push(k);
                if d == irr.deg() * m as usize {
                    break;
                }
            }
            PrimaryComponent {
                irr,
                dims,
                kernels,
                f_of_g: fg,
            }
        })
        .collect()
}

fn multiplicities(pc: &PrimaryComponent) -> Vec<(u32, usize)> {
    let d = pc.irr.deg();
    let top = pc.dims.len() - 1;
    let b = |j: usize| {
        if j > top {
            0
        } else {
            (pc.dims[j] - pc.dims[j - 1]) / d
        }
    };
    (1..=top)
        .filter_map(|a| {
            let c = b(a) - b(a + 1);
            (c > 0).then_some((a as u32, c))
        })
        .collect()
}

/// The canonical primary-block invariant of `g`.
pub fn invariant_tuple(g: &Matrix) -> InvariantTuple {
    let mut t = InvariantTuple::new(g.n());
    for pc in primary_components(g) {
        for (a, c) in multiplicities(&pc) {
            t.insert(pc.irr.clone(), a, c);
        }
    }
    t
}

/// Block-diagonal matrix of companion blocks in canonical order.
pub fn realize_invariant(field: &Field, n: usize, tuple: &InvariantTuple) -> Result<Matrix> {
    if tuple.support_dim() != n || tuple.n != n {
        return Err(Error::DimensionMismatch(format!(
            "tuple covers {} of n = {n}",
            tuple.support_dim()
        )));
    }
    let mut blocks = Vec::new();
    for (k, &c) in &tuple.entries {
        let comp = Matrix::companion(&k.poly());
        for _ in 0..c {
            blocks.push(comp.clone());
        }
    }
    Ok(Matrix::block_diag(field, &blocks))
}

/// Returns the tuple and `P` with `P^{−1} g P = realize_invariant(tuple)`.
pub fn frobenius_form(g: &Matrix) -> (InvariantTuple, Matrix) {
    let n = g.n();
    let fld = g.field().clone();
    let mut tuple = InvariantTuple::new(n);
    // cyclic generators per primary key
    let mut gens: BTreeMap<Primary, Vec<Vector>> = BTreeMap::new();
    for pc in primary_components(g) {
        let d = pc.irr.deg();
        let top = pc.dims.len() - 1;
        let mults: BTreeMap<u32, usize> = multiplicities(&pc).into_iter().collect();
        for a in (1..=top).rev() {
            let need = mults.get(&(a as u32)).copied().unwrap_or(0);
            if need == 0 {
                continue;
            }
            // S = ker f^{a−1} + f(g)·ker f^{a+1}
            let mut s: Vec<Vector> = pc.kernels[a - 1].clone();
            if a < top {
                s.extend(pc.kernels[a + 1].iter().map(|v| pc.f_of_g.apply(v)));
            }
            let mut s = span_basis(&fld, n, &s);
            let mut chosen = Vec::new();
            for v in &pc.kernels[a] {
                if chosen.len() == need {
                    break;
                }
                if in_span(&fld, &s, v) {
                    continue;
                }
                let mut w = v.clone();
                for _ in 0..d {
                    s.push(w.clone());
                    w = g.apply(&w);
                }
                s = span_basis(&fld, n, &s);
                chosen.push(v.clone());
            }
            assert_eq!(chosen.len(), need, "cyclic decomposition failed");
            tuple.insert(pc.irr.clone(), a as u32, need);
            gens.insert(Primary::new(pc.irr.clone(), a as u32), chosen);
        }
    }
    let mut cols = Vec::with_capacity(n);
    for (k, vs) in &gens {
        for v in vs {
            let mut w = v.clone();
            for _ in 0..k.deg() {
                cols.push(w.clone());
                w = g.apply(&w);
            }
        }
    }
    let p = Matrix::from_cols(&fld, n, &cols);
    debug_assert_eq!(p.rank(), n);
    (tuple, p)
}

pub fn r_xi(g: &Matrix, xi: &Poly) -> Result<Ratio> {
    if xi.is_constant() {
        return Err(Error::ConstantPolynomial);
    }
    Ok(Ratio::new(
        g.eval_poly(xi).kernel().len() as i64,
        g.n().max(1) as i64,
    ))
}

/// Multiplicative order of the class of `X` in `k[X]/(f)`, `f` irreducible, `f ≠ X`.
pub fn root_order(f: &Poly) -> Result<u64> {
    if f.coeff(0).is_zero() {
        return Err(Error::Singular);
    }
    let ring = QuotientRing::new(f.monic());
    ring.mult_order(&ring.gen())
}

pub fn element_order(g: &Matrix) -> Result<u64> {
    if !g.is_square() {
        return Err(Error::DimensionMismatch(
            "order of a non-square matrix".into(),
        ));
    }
    if g.n() == 0 {
        return Ok(1);
    }
    let t = invariant_tuple(g);
    let p = g.field().p();
    let mut top: BTreeMap<&Poly, u32> = BTreeMap::new();
    for k in t.entries.keys() {
        let e = top.entry(&k.irr).or_insert(0);
        *e = (*e).max(k.exp);
    }
    let mut ord = 1u64;
    for (f, &e) in &top {
        let mut o = root_order(f)?;
        let mut pp = 1u64;
        while pp < e as u64 {
            pp *= p;
        }
        o *= pp;
        ord = arith::lcm(ord, o);
    }
    debug_assert!(g.pow(ord).is_identity());
    Ok(ord)
}

pub fn is_semisimple(g: &Matrix) -> bool {
    invariant_tuple(g).is_semisimple()
}

/// Decides GL_n-conjugacy; the witness `W` satisfies `W^{−1} g W = h`.
pub fn conjugacy_test(g: &Matrix, h: &Matrix) -> Result<(bool, Option<Matrix>)> {
    g.check_same_shape(h)?;
    let (tg, pg) = frobenius_form(g);
    let (th, ph) = frobenius_form(h);
    if tg != th {
        return Ok((false, None));
    }
    let w = pg.mul(&ph.inverse().expect("change of basis is invertible"));
    Ok((true, Some(w)))
}

/// Largest `g`-invariant subspace contained in `span(u)`.
pub fn largest_invariant_subspace(g: &Matrix, u: &[Vector]) -> Result<Vec<Vector>> {
    let n = g.n();
    let fld = g.field().clone();
    let g_inv = g.inverse()?;
    let mut w = span_basis(&fld, n, u);
    loop {
        let next = intersect(&fld, n, &w, &span_basis(&fld, n, &preimage(&g_inv, &w)));
        if next.len() == w.len() {
            return Ok(w);
        }
        w = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::make_field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(f: &Field, d: &[u64]) -> Matrix {
        Matrix::diag(f, &d.iter().map(|&x| FieldElem(x)).collect::<Vec<_>>())
    }

    fn pr(f: &Field, codes: &[u64], e: u32) -> Primary {
        Primary::new(Poly::from_codes(f, codes), e)
    }

    #[test]
    fn rank_metric_examples() {
        let f3 = make_field(3, 1).unwrap();
        let i4 = Matrix::identity(&f3, 4);
        assert_eq!(rank_metric(&i4, &i4).unwrap(), Ratio::zero());
        assert_eq!(
            rank_metric(&i4, &Matrix::zero(&f3, 4, 4)).unwrap(),
            Ratio::new(1, 1)
        );
        assert_eq!(
            rank_metric(&diag(&f3, &[1, 1, 2]), &diag(&f3, &[1, 2, 2])).unwrap(),
            Ratio::new(1, 3)
        );
        assert!(matches!(
            rank_metric(&i4, &Matrix::identity(&f3, 3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn rank_metric_triangle() {
        let f5 = make_field(5, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let a = Matrix::random(&f5, 5, &mut rng);
            let b = Matrix::random(&f5, 5, &mut rng);
            let c = Matrix::random(&f5, 5, &mut rng);
            let ab = rank_metric(&a, &b).unwrap();
            let bc = rank_metric(&b, &c).unwrap();
            let ac = rank_metric(&a, &c).unwrap();
            assert!(ac <= ab + bc);
        }
    }

    #[test]
    fn char_poly_matches_det_oracle() {
        // det(x·I − g) at every field point equals char_poly evaluated there
        let f7 = make_field(7, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..6 {
            for _ in 0..20 {
                let g = Matrix::random(&f7, n, &mut rng);
                let cp = g.char_poly();
                assert_eq!(cp.deg(), n);
                for x in 0..7 {
                    let xi = Matrix::scalar(&f7, n, FieldElem(x));
                    assert_eq!(xi.sub(&g).det(), cp.eval(FieldElem(x)));
                }
                assert!(g.eval_poly(&cp).is_zero());
            }
        }
    }

    #[test]
    fn frobenius_form_examples() {
        let f2 = make_field(2, 1).unwrap();
        let t = invariant_tuple(&Matrix::identity(&f2, 3));
        assert_eq!(
            t.entries.into_iter().collect::<Vec<_>>(),
            vec![(pr(&f2, &[1, 1], 1), 3)]
        );
        let c = Matrix::companion(&Poly::from_codes(&f2, &[1, 1, 1]));
        let g = Matrix::block_diag(&f2, &[c, Matrix::identity(&f2, 1)]);
        let t = invariant_tuple(&g);
        assert_eq!(
            t.entries.into_iter().collect::<Vec<_>>(),
            vec![(pr(&f2, &[1, 1], 1), 1), (pr(&f2, &[1, 1, 1], 1), 1)]
        );
        let f3 = make_field(3, 1).unwrap();
        let j = Matrix::from_codes(&f3, &[&[1, 1], &[0, 1]]);
        let t = invariant_tuple(&j);
        assert_eq!(
            t.entries.into_iter().collect::<Vec<_>>(),
            vec![(pr(&f3, &[2, 1], 2), 1)]
        );
        let nil = Matrix::from_codes(&f2, &[&[0, 1], &[0, 0]]);
        let t = invariant_tuple(&nil);
        assert_eq!(
            t.entries.into_iter().collect::<Vec<_>>(),
            vec![(pr(&f2, &[0, 1], 2), 1)]
        );
        let t = invariant_tuple(&diag(&f3, &[1, 1, 2]));
        let x1 = pr(&f3, &[2, 1], 1);
        assert_eq!(t.c(&x1), 2);
        assert_eq!(t.c(&pr(&f3, &[1, 1], 1)), 1);
        assert_eq!(t.q_chi(&x1), Ratio::new(2, 3));
    }

    #[test]
    fn frobenius_roundtrip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for q in [2u64, 3, 4, 5] {
            let f = crate::ff::field_of_size(q).unwrap();
            for _ in 0..60 {
                let n = rng.gen_range(1..9);
                // mix random matrices with ones of large unipotent/repeated structure
                let g = if rng.gen_bool(0.5) {
                    Matrix::random(&f, n, &mut rng)
                } else {
                    let mut t = InvariantTuple::new(0);
                    let mut left = n;
                    while left > 0 {
                        let e = rng.gen_range(1..=left.min(3));
                        let root = FieldElem(rng.gen_range(0..q.min(3)));
                        t.insert(Poly::linear(&f, root), e as u32, 1);
                        left -= e;
                    }
                    t.n = n;
                    let c = realize_invariant(&f, n, &t).unwrap();
                    let p = Matrix::random_invertible(&f, n, &mut rng);
                    p.inverse().unwrap().mul(&c).mul(&p)
                };
                let (t, p) = frobenius_form(&g);
                assert!(t.is_full_support());
                let canon = realize_invariant(&f, n, &t).unwrap();
                assert_eq!(p.inverse().unwrap().mul(&g).mul(&p), canon);
                assert_eq!(invariant_tuple(&canon), t);
            }
        }
    }

    #[test]
    fn r_xi_examples_and_reconstruction() {
        let f3 = make_field(3, 1).unwrap();
        let x1 = Poly::linear(&f3, FieldElem(1));
        assert_eq!(
            r_xi(&Matrix::identity(&f3, 4), &x1).unwrap(),
            Ratio::new(1, 1)
        );
        assert_eq!(r_xi(&diag(&f3, &[1, 2]), &x1).unwrap(), Ratio::new(1, 2));
        let f2 = make_field(2, 1).unwrap();
        let xi = Poly::from_codes(&f2, &[1, 1, 1]);
        assert_eq!(
            r_xi(&Matrix::companion(&xi), &xi).unwrap(),
            Ratio::new(1, 1)
        );
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for q in [2u64, 3] {
            let f = crate::ff::field_of_size(q).unwrap();
            let xis: Vec<Poly> = (1..=4)
                .flat_map(|d| {
                    let total = q.pow(d);
                    (0..total).map(move |v| {
                        let mut c: Vec<u64> = (0..d).map(|i| (v / q.pow(i)) % q).collect();
                        c.push(1);
                        c
                    })
                })
                .map(|c| Poly::from_codes(&f, &c))
                .collect();
            for _ in 0..15 {
                let n = rng.gen_range(1..=12);
                let g = Matrix::random(&f, n, &mut rng);
                let t = invariant_tuple(&g);
                for xi in &xis {
                    assert_eq!(r_xi(&g, xi).unwrap(), t.r_xi(xi), "{xi:?}");
                }
            }
        }
    }

    #[test]
    fn lipschitz_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for q in [2u64, 3, 5] {
            let f = crate::ff::field_of_size(q).unwrap();
            for _ in 0..20 {
                let n = rng.gen_range(2..=30);
                let g = Matrix::random_invertible(&f, n, &mut rng);
                // perturb a few rows so that d_rk is small
                let mut h = g.clone();
                for _ in 0..rng.gen_range(0..3) {
                    let r = rng.gen_range(0..n);
                    for j in 0..n {
                        h.set(r, j, FieldElem(rng.gen_range(0..q)));
                    }
                }
                let d = rank_metric(&g, &h).unwrap();
                for deg in 1..=4usize {
                    let mut c: Vec<u64> = (0..deg).map(|_| rng.gen_range(0..q)).collect();
                    c.push(1);
                    let xi = Poly::from_codes(&f, &c);
                    let lhs = r_xi(&g, &xi).unwrap().abs_diff(r_xi(&h, &xi).unwrap());
                    let bound = d * arith::binomial(deg as u64 + 1, 2) as i64;
                    assert!(lhs <= bound, "{lhs} > {bound}");
                }
            }
        }
    }

    #[test]
    fn order_examples() {
        let f2 = make_field(2, 1).unwrap();
        assert_eq!(element_order(&Matrix::identity(&f2, 3)).unwrap(), 1);
        assert_eq!(
            element_order(&Matrix::companion(&Poly::from_codes(&f2, &[1, 1, 1]))).unwrap(),
            3
        );
        let f3 = make_field(3, 1).unwrap();
        let j = Matrix::from_codes(&f3, &[&[1, 1], &[0, 1]]);
        assert_eq!(element_order(&j).unwrap(), 3);
        assert!(!is_semisimple(&j));
        assert!(is_semisimple(&diag(&f3, &[1, 2, 2])));
        assert!(is_semisimple(&Matrix::companion(&Poly::from_codes(
            &f2,
            &[1, 1, 1]
        ))));
        assert_eq!(
            element_order(&Matrix::zero(&f3, 2, 2)),
            Err(Error::Singular)
        );
    }

    #[test]
    fn order_is_exact_and_divides_group_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for q in [2u64, 3, 4] {
            let f = crate::ff::field_of_size(q).unwrap();
            for n in 1..=4u32 {
                let gl: u64 = (0..n).map(|i| q.pow(n) - q.pow(i)).product();
                for _ in 0..20 {
                    let g = Matrix::random_invertible(&f, n as usize, &mut rng);
                    let o = element_order(&g).unwrap();
                    assert!(g.pow(o).is_identity());
                    for r in arith::prime_divisors(o) {
                        assert!(!g.pow(o / r).is_identity());
                    }
                    assert_eq!(gl % o, 0);
                    assert_eq!(is_semisimple(&g), !o.is_multiple_of(f.p()));
                }
            }
        }
    }

    fn all_invertible(f: &Field, n: usize) -> Vec<Matrix> {
        let q = f.q();
        let total = q.pow((n * n) as u32);
        (0..total)
            .map(|mut v| {
                let mut m = Matrix::zero(f, n, n);
                for i in 0..n * n {
                    m.data[i] = FieldElem(v % q);
                    v /= q;
                }
                m
            })
            .filter(|m| m.rank() == n)
            .collect()
    }

    #[test]
    fn conjugacy_against_exhaustive_search() {
        for (q, n) in [(2u64, 2usize), (3, 2), (2, 3)] {
            let f = crate::ff::field_of_size(q).unwrap();
            let gl = all_invertible(&f, n);
            let invs: Vec<Matrix> = gl.iter().map(|p| p.inverse().unwrap()).collect();
            // class of each element by exhaustive conjugation
            let mut class_id = vec![usize::MAX; gl.len()];
            let index: std::collections::HashMap<Vec<FieldElem>, usize> = gl
                .iter()
                .enumerate()
                .map(|(i, m)| (m.data.clone(), i))
                .collect();
            let mut next = 0;
            for i in 0..gl.len() {
                if class_id[i] != usize::MAX {
                    continue;
                }
                for (p, pi) in gl.iter().zip(&invs) {
                    let c = pi.mul(&gl[i]).mul(p);
                    class_id[index[&c.data]] = next;
                }
                next += 1;
            }
            for i in 0..gl.len() {
                for j in 0..gl.len() {
                    let (ok, w) = conjugacy_test(&gl[i], &gl[j]).unwrap();
                    assert_eq!(ok, class_id[i] == class_id[j]);
                    if let Some(w) = w {
                        assert_eq!(w.inverse().unwrap().mul(&gl[i]).mul(&w), gl[j]);
                    }
                }
            }
        }
    }

    #[test]
    fn conjugacy_examples() {
        let f3 = make_field(3, 1).unwrap();
        assert!(
            conjugacy_test(&diag(&f3, &[1, 2]), &diag(&f3, &[2, 1]))
                .unwrap()
                .0
        );
        assert!(
            !conjugacy_test(&diag(&f3, &[1, 1]), &diag(&f3, &[1, 2]))
                .unwrap()
                .0
        );
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = Matrix::random(&f3, 6, &mut rng);
        let p = Matrix::random_invertible(&f3, 6, &mut rng);
        let h = p.inverse().unwrap().mul(&g).mul(&p);
        let (ok, w) = conjugacy_test(&g, &h).unwrap();
        assert!(ok);
        let w = w.unwrap();
        assert_eq!(w.inverse().unwrap().mul(&g).mul(&w), h);
    }

    fn std_basis(_f: &Field, n: usize, idx: &[usize]) -> Vec<Vector> {
        idx.iter()
            .map(|&i| {
                let mut v = vec![FieldElem::ZERO; n];
                v[i] = FieldElem::ONE;
                v
            })
            .collect()
    }

    #[test]
    fn invariant_subspace_examples() {
        let f2 = make_field(2, 1).unwrap();
        let c = Matrix::companion(&Poly::from_codes(&f2, &[1, 1, 1]));
        let g = Matrix::block_diag(&f2, &[c.clone(), c.clone()]);
        let whole = std_basis(&f2, 4, &[0, 1, 2, 3]);
        assert_eq!(largest_invariant_subspace(&g, &whole).unwrap().len(), 4);
        let u = std_basis(&f2, 4, &[0, 1, 2]);
        let w = largest_invariant_subspace(&g, &u).unwrap();
        assert_eq!(w.len(), 2);
        for v in std_basis(&f2, 4, &[0, 1]) {
            assert!(in_span(&f2, &w, &v));
        }
        // sharpness: an irreducible companion has no proper invariant subspace,
        // so a hyperplane (codim 1) yields W = 0 of codimension k = deg.
        let f3 = make_field(3, 1).unwrap();
        let chi = crate::poly::irreducibles(&f3, 4)
            .unwrap()
            .into_iter()
            .find(|p| !p.coeff(0).is_zero())
            .unwrap();
        let g = Matrix::companion(&chi);
        let u = std_basis(&f3, 4, &[0, 1, 2]);
        let w = largest_invariant_subspace(&g, &u).unwrap();
        assert_eq!(4 - w.len(), 4 * (4 - u.len()));
    }

    #[test]
    fn invariant_subspace_bound_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for i in 0..500 {
            let q = [2u64, 3, 4, 5][i % 4];
            let f = crate::ff::field_of_size(q).unwrap();
            let n = rng.gen_range(1..=7);
            let g = Matrix::random_invertible(&f, n, &mut rng);
            let k = rng.gen_range(0..=n);
            let u: Vec<Vector> = (0..k)
                .map(|_| (0..n).map(|_| FieldElem(rng.gen_range(0..q))).collect())
                .collect();
            let u = span_basis(&f, n, &u);
            let w = largest_invariant_subspace(&g, &u).unwrap();
            let mindeg = invariant_tuple(&g).minimal_polynomial(&f).deg();
            assert!(n - w.len() <= mindeg * (n - u.len()));
            let gw: Vec<Vector> = w.iter().map(|v| g.apply(v)).collect();
            assert_eq!(span_basis(&f, n, &gw), w);
            for v in &w {
                assert!(in_span(&f, &u, v));
            }
        }
    }

    #[test]
    fn realize_examples() {
        let f2 = make_field(2, 1).unwrap();
        let mut t = InvariantTuple::new(3);
        t.insert(Poly::from_codes(&f2, &[1, 1]), 1, 3);
        assert_eq!(
            realize_invariant(&f2, 3, &t).unwrap(),
            Matrix::identity(&f2, 3)
        );
        let mut t = InvariantTuple::new(5);
        t.insert(Poly::from_codes(&f2, &[1, 1]), 1, 1);
        t.insert(Poly::from_codes(&f2, &[1, 1, 1]), 1, 2);
        let g = realize_invariant(&f2, 5, &t).unwrap();
        assert_eq!(element_order(&g).unwrap(), 3);
        assert_eq!(invariant_tuple(&g), t);
        let mut t = InvariantTuple::new(2);
        t.insert(Poly::x(&f2), 2, 1);
        let g = realize_invariant(&f2, 2, &t).unwrap();
        assert!(g.mul(&g).is_zero() && !g.is_zero());
        let mut t = InvariantTuple::new(4);
        t.insert(Poly::x(&f2), 2, 1);
        assert!(matches!(
            realize_invariant(&f2, 4, &t),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn matrix_text_roundtrip() {
        let f9 = make_field(3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = Matrix::random(&f9, 4, &mut rng);
        assert_eq!(Matrix::parse(&g.to_string()).unwrap(), g);
        assert!(matches!(
            Matrix::parse("3^2 2\n1 2\n3 9\n"),
            Err(Error::Parse {
                line: 3,
                col: 3,
                ..
            })
        ));
        assert!(matches!(
            Matrix::parse("3^2 2\n1 2\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(Matrix::parse("x 2\n"), Err(Error::Parse { .. })));
    }
}
