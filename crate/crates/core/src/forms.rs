//! Classical forms `B(x, y) = x^{σT} G y` and their isometry groups.
//!
//! `σ` is the identity except for unitary forms, where it is the involution
//! of the field GF(q²). Orthogonal forms are supported in odd characteristic
//! only.

use std::fmt;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ff::{parse_field, Field, FieldElem};
use crate::linalg::{self, span_basis, InvariantTuple, Matrix, Vector};
use crate::poly::{Poly, QuotientRing};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    Symplectic,
    OrthogonalPlus,
    OrthogonalMinus,
    OrthogonalOdd,
    Unitary,
}

impl FormKind {
    pub const ALL: [FormKind; 5] = [
        FormKind::Symplectic,
        FormKind::OrthogonalPlus,
        FormKind::OrthogonalMinus,
        FormKind::OrthogonalOdd,
        FormKind::Unitary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FormKind::Symplectic => "symplectic",
            FormKind::OrthogonalPlus => "orthogonal_plus",
            FormKind::OrthogonalMinus => "orthogonal_minus",
            FormKind::OrthogonalOdd => "orthogonal_odd",
            FormKind::Unitary => "unitary",
        }
    }

    pub fn parse(s: &str) -> Result<FormKind> {
        FormKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::parse(1, 1, format!("unknown form kind {s:?}")))
    }

    pub fn sigma_power(self) -> u32 {
        u32::from(self == FormKind::Unitary)
    }

    pub fn is_orthogonal(self) -> bool {
        matches!(
            self,
            FormKind::OrthogonalPlus | FormKind::OrthogonalMinus | FormKind::OrthogonalOdd
        )
    }
}

impl fmt::Display for FormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalForm {
    pub kind: FormKind,
    pub field: Field,
    pub n: usize,
    pub gram: Matrix,
}

fn check_kind(kind: FormKind, field: &Field, n: usize) -> Result<()> {
    match kind {
        FormKind::Symplectic if !n.is_multiple_of(2) => {
            Err(Error::BadParity(format!("symplectic dimension {n} is odd")))
        }
        k if k.is_orthogonal() && field.p() == 2 => Err(Error::UnsupportedCharacteristic(
            "orthogonal forms in characteristic 2".into(),
        )),
        FormKind::OrthogonalPlus | FormKind::OrthogonalMinus if !n.is_multiple_of(2) => Err(
            Error::BadParity(format!("{kind} needs even dimension, got {n}")),
        ),
        FormKind::OrthogonalMinus if n == 0 => {
            Err(Error::BadParity("orthogonal_minus needs n ≥ 2".into()))
        }
        FormKind::OrthogonalOdd if n.is_multiple_of(2) => Err(Error::BadParity(format!(
            "orthogonal_odd needs odd dimension, got {n}"
        ))),
        FormKind::Unitary if !field.k().is_multiple_of(2) => Err(Error::BadParity(format!(
            "unitary forms need a field of even degree, got {field}"
        ))),
        _ => Ok(()),
    }
}

fn hyperbolic(field: &Field, m: usize, eps: FieldElem) -> Matrix {
    let mut g = Matrix::zero(field, 2 * m, 2 * m);
    for i in 0..m {
        g.set(2 * i, 2 * i + 1, FieldElem::ONE);
        g.set(2 * i + 1, 2 * i, eps);
    }
    g
}

/// The fixed representative Gram matrix of each kind.
pub fn standard_form(kind: FormKind, field: &Field, n: usize) -> Result<ClassicalForm> {
    check_kind(kind, field, n)?;
    let gram = match kind {
        FormKind::Symplectic => hyperbolic(field, n / 2, field.neg(FieldElem::ONE)),
        FormKind::OrthogonalPlus => hyperbolic(field, n / 2, FieldElem::ONE),
        FormKind::OrthogonalMinus => {
            let nu = field.nonsquare();
            let h = hyperbolic(field, n / 2 - 1, FieldElem::ONE);
            Matrix::block_diag(
                field,
                &[h, Matrix::diag(field, &[FieldElem::ONE, field.neg(nu)])],
            )
        }
        FormKind::OrthogonalOdd => {
            let h = hyperbolic(field, n / 2, FieldElem::ONE);
            Matrix::block_diag(field, &[h, Matrix::identity(field, 1)])
        }
        FormKind::Unitary => Matrix::identity(field, n),
    };
    Ok(ClassicalForm {
        kind,
        field: field.clone(),
        n,
        gram,
    })
}

/// Parses `kind p^k n`.
pub fn parse_form(text: &str) -> Result<ClassicalForm> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(Error::parse(1, 1, "form descriptor is \"kind p^k n\""));
    }
    let kind = FormKind::parse(parts[0])?;
    let field = parse_field(parts[1])?;
    let n: usize = parts[2].parse().map_err(|_| {
        Error::parse(
            1,
            parts[0].len() + parts[1].len() + 3,
            format!("bad dimension {:?}", parts[2]),
        )
    })?;
    standard_form(kind, &field, n)
}

impl ClassicalForm {
    pub fn sigma_power(&self) -> u32 {
        self.kind.sigma_power()
    }

    pub fn sigma(&self, x: FieldElem) -> FieldElem {
        sigma(&self.field, self.sigma_power(), x)
    }

    /// `M^{σT}`.
    pub fn sigma_t(&self, m: &Matrix) -> Matrix {
        sigma_t(m, self.sigma_power())
    }

    pub fn eval(&self, x: &[FieldElem], y: &[FieldElem]) -> FieldElem {
        bform(&self.gram, self.sigma_power(), x, y)
    }

    pub fn is_isometry(&self, g: &Matrix) -> Result<bool> {
        if g.n() != self.n || !g.is_square() || **g.field() != *self.field {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} against form of dimension {}",
                g.rows(),
                g.cols(),
                self.n
            )));
        }
        Ok(self.sigma_t(g).mul(&self.gram).mul(g) == self.gram)
    }

    /// The `q` of the group's name (√|field| for unitary groups).
    pub fn base_q(&self) -> u64 {
        if self.kind == FormKind::Unitary {
            self.field.p().pow(self.field.k() / 2)
        } else {
            self.field.q()
        }
    }

    pub fn group_order(&self) -> BigUint {
        group_order(self.kind, self.base_q(), self.n)
    }

    pub fn descriptor(&self) -> String {
        format!("{} {} {}", self.kind, self.field, self.n)
    }
}

pub fn sigma(field: &Field, sigma_power: u32, x: FieldElem) -> FieldElem {
    if sigma_power == 1 {
        field.involution(x)
    } else {
        x
    }
}

pub fn sigma_t(m: &Matrix, sigma_power: u32) -> Matrix {
    let f = m.field().clone();
    m.transpose().map(|x| sigma(&f, sigma_power, x))
}

fn bform(gram: &Matrix, sp: u32, x: &[FieldElem], y: &[FieldElem]) -> FieldElem {
    let f = gram.field();
    let gy = gram.apply(y);
    x.iter().zip(&gy).fold(FieldElem::ZERO, |acc, (&a, &b)| {
        f.add(acc, f.mul(sigma(f, sp, a), b))
    })
}

/// Classical order formulas; `q` is the group's parameter.
pub fn group_order(kind: FormKind, q: u64, n: usize) -> BigUint {
    let q = BigUint::from(q);
    let one = BigUint::from(1u32);
    let m = n / 2;
    match kind {
        FormKind::Symplectic => {
            let mut o = q.pow((m * m) as u32);
            for i in 1..=m {
                o *= q.pow(2 * i as u32) - &one;
            }
            o
        }
        FormKind::OrthogonalPlus | FormKind::OrthogonalMinus => {
            if m == 0 {
                return one;
            }
            let mut o = BigUint::from(2u32) * q.pow((m * (m - 1)) as u32);
            o *= if kind == FormKind::OrthogonalPlus {
                q.pow(m as u32) - &one
            } else {
                q.pow(m as u32) + &one
            };
            for i in 1..m {
                o *= q.pow(2 * i as u32) - &one;
            }
            o
        }
        FormKind::OrthogonalOdd => {
            let mut o = BigUint::from(2u32) * q.pow((m * m) as u32);
            for i in 1..=m {
                o *= q.pow(2 * i as u32) - &one;
            }
            o
        }
        FormKind::Unitary => {
            let mut o = q.pow((n * (n.saturating_sub(1)) / 2) as u32);
            for i in 1..=n {
                let qi = q.pow(i as u32);
                o *= if i % 2 == 0 { qi - &one } else { qi + &one };
            }
            o
        }
    }
}

// ---- reduction of an arbitrary Gram matrix to the standard one ----

struct Reducer<'a> {
    gram: &'a Matrix,
    sp: u32,
    field: Field,
    n: usize,
}

impl Reducer<'_> {
    fn b(&self, x: &[FieldElem], y: &[FieldElem]) -> FieldElem {
        bform(self.gram, self.sp, x, y)
    }

    /// Projects every vector of `w` onto the orthogonal complement of the
    /// nondegenerate `s`, returning a basis of the result.
    fn project_out(&self, s: &[Vector], w: &[Vector]) -> Vec<Vector> {
        let f = &self.field;
        let r = s.len();
        let m = Matrix::from_rows(
            f,
            (0..r)
                .map(|i| (0..r).map(|j| self.b(&s[i], &s[j])).collect())
                .collect(),
        );
        let minv = m
            .inverse()
            .expect("projection onto a nondegenerate subspace");
        let proj: Vec<Vector> = w
            .iter()
            .map(|v| {
                let rhs: Vector = s.iter().map(|si| self.b(si, v)).collect();
                let c = minv.apply(&rhs);
                let mut out = v.clone();
                for (cj, sj) in c.iter().zip(s) {
                    for (o, &x) in out.iter_mut().zip(sj) {
                        *o = f.sub(*o, f.mul(*cj, x));
                    }
                }
                out
            })
            .collect();
        span_basis(f, self.n, &proj)
    }

    fn scaled(&self, v: &[FieldElem], c: FieldElem) -> Vector {
        v.iter().map(|&x| self.field.mul(x, c)).collect()
    }

    fn combo(&self, a: &[FieldElem], x: FieldElem, b: &[FieldElem]) -> Vector {
        a.iter()
            .zip(b)
            .map(|(&u, &w)| self.field.add(u, self.field.mul(x, w)))
            .collect()
    }

    fn symplectic(&self) -> Result<Vec<Vector>> {
        let f = &self.field;
        let mut w = span_basis(f, self.n, &identity_vectors(f, self.n));
        let mut out = Vec::new();
        while !w.is_empty() {
            let e = w[0].clone();
            let partner = w
                .iter()
                .find(|v| !self.b(&e, v).is_zero())
                .ok_or(Error::Singular)?;
            let fv = self.scaled(partner, f.inv(self.b(&e, partner)));
            w = self.project_out(&[e.clone(), fv.clone()], &w);
            out.push(e);
            out.push(fv);
        }
        Ok(out)
    }

    fn unitary(&self) -> Result<Vec<Vector>> {
        let f = &self.field;
        let mut w = span_basis(f, self.n, &identity_vectors(f, self.n));
        let mut out = Vec::new();
        while !w.is_empty() {
            let v = self.anisotropic(&w)?;
            let c = self.b(&v, &v);
            let mu = f.norm_preimage(f.inv(c)).ok_or(Error::Singular)?;
            let v = self.scaled(&v, mu);
            w = self.project_out(std::slice::from_ref(&v), &w);
            out.push(v);
        }
        Ok(out)
    }

    fn anisotropic(&self, w: &[Vector]) -> Result<Vector> {
        if let Some(v) = w.iter().find(|v| !self.b(v, v).is_zero()) {
            return Ok(v.clone());
        }
        for i in 0..w.len() {
            for j in i + 1..w.len() {
                if self.b(&w[i], &w[j]).is_zero() {
                    continue;
                }
                for x in 1..self.field.q() {
                    let v = self.combo(&w[i], FieldElem(x), &w[j]);
                    if !self.b(&v, &v).is_zero() {
                        return Ok(v);
                    }
                }
            }
        }
        Err(Error::Singular)
    }

    fn isotropic(&self, w: &[Vector]) -> Option<Vector> {
        let q = self.field.q();
        let zero = vec![FieldElem::ZERO; self.n];
        if let Some(v) = w.iter().find(|v| self.b(v, v).is_zero()) {
            return Some(v.clone());
        }
        if w.len() < 2 {
            return None;
        }
        for x in 0..q {
            let v = self.combo(&w[1], FieldElem(x), &w[0]);
            if self.b(&v, &v).is_zero() {
                return Some(v);
            }
        }
        if w.len() < 3 {
            return None;
        }
        for x in 0..q {
            for y in 0..q {
                let v = self.combo(&self.combo(&w[2], FieldElem(x), &w[0]), FieldElem(y), &w[1]);
                if v != zero && self.b(&v, &v).is_zero() {
                    return Some(v);
                }
            }
        }
        None
    }

    /// Returns the basis and the scale `s` with `A^T G A = s·G_std`, and the kind reached.
    fn orthogonal(&self) -> Result<(Vec<Vector>, FieldElem, FormKind)> {
        let f = &self.field;
        let two_inv = f.inv(f.from_int(2));
        let mut w = span_basis(f, self.n, &identity_vectors(f, self.n));
        let mut pairs: Vec<(Vector, Vector)> = Vec::new();
        while let Some(e) = if w.len() >= 2 {
            self.isotropic(&w)
        } else {
            None
        } {
            let partner = w
                .iter()
                .find(|v| !self.b(&e, v).is_zero())
                .ok_or(Error::Singular)?;
            let wv = self.scaled(partner, f.inv(self.b(&e, partner)));
            let c = f.neg(f.mul(self.b(&wv, &wv), two_inv));
            let fv = self.combo(&wv, c, &e);
            w = self.project_out(&[e.clone(), fv.clone()], &w);
            pairs.push((e, fv));
        }
        let nu = if f.p() == 2 {
            FieldElem::ONE
        } else {
            f.nonsquare()
        };
        let mut tail = Vec::new();
        let mut scale = FieldElem::ONE;
        let kind = match w.len() {
            0 => FormKind::OrthogonalPlus,
            1 => {
                let a = self.b(&w[0], &w[0]);
                if f.is_square(a) {
                    tail.push(self.scaled(&w[0], f.inv(f.sqrt(a).unwrap())));
                } else {
                    // similar (not isometric) to the standard form: scale by a
                    scale = a;
                    tail.push(w[0].clone());
                }
                FormKind::OrthogonalOdd
            }
            2 => {
                let r1 = w[0].clone();
                let r2 = self.project_out(std::slice::from_ref(&r1), &w).remove(0);
                let (a, b) = (self.b(&r1, &r1), self.b(&r2, &r2));
                let v = (0..f.q())
                    .find_map(|x| {
                        let x = FieldElem(x);
                        let t = f.div(f.sub(FieldElem::ONE, f.mul(a, f.mul(x, x))), b);
                        f.sqrt(t).map(|y| {
                            let mut v = self.scaled(&r1, x);
                            for (o, &z) in v.iter_mut().zip(&r2) {
                                *o = f.add(*o, f.mul(y, z));
                            }
                            v
                        })
                    })
                    .ok_or(Error::Singular)?;
                let u = self.project_out(std::slice::from_ref(&v), &w).remove(0);
                let c = self.b(&u, &u);
                let ratio = f.div(c, f.neg(nu));
                let s = f.sqrt(ratio).ok_or(Error::Singular)?;
                tail.push(v);
                tail.push(self.scaled(&u, f.inv(s)));
                FormKind::OrthogonalMinus
            }
            _ => return Err(Error::Singular),
        };
        let mut out = Vec::new();
        for (e, fv) in pairs {
            out.push(e);
            out.push(self.scaled(&fv, scale));
        }
        out.extend(tail);
        Ok((out, scale, kind))
    }
}

fn identity_vectors(_f: &Field, n: usize) -> Vec<Vector> {
    (0..n)
        .map(|i| {
            let mut v = vec![FieldElem::ZERO; n];
            v[i] = FieldElem::ONE;
            v
        })
        .collect()
}

/// For a nondegenerate Gram of the given family, returns `(A, s, kind)` with
/// `A^{σT} G A = s·G_std(kind)`; `s ≠ 1` only for odd-dimensional orthogonal forms.
pub fn reduce_to_standard(
    family: FormKind,
    gram: &Matrix,
) -> Result<(Matrix, FieldElem, FormKind)> {
    let field = gram.field().clone();
    let n = gram.n();
    if gram.rank() != n {
        return Err(Error::Singular);
    }
    let red = Reducer {
        gram,
        sp: family.sigma_power(),
        field: field.clone(),
        n,
    };
    let (cols, scale, kind) = match family {
        FormKind::Symplectic => (red.symplectic()?, FieldElem::ONE, FormKind::Symplectic),
        FormKind::Unitary => (red.unitary()?, FieldElem::ONE, FormKind::Unitary),
        _ => red.orthogonal()?,
    };
    let a = Matrix::from_cols(&field, n, &cols);
    debug_assert_eq!(
        sigma_t(&a, family.sigma_power()).mul(gram).mul(&a),
        standard_form(kind, &field, n).unwrap().gram.scale(scale)
    );
    Ok((a, scale, kind))
}

/// Witt type of a symmetric Gram matrix (odd characteristic).
pub fn orthogonal_kind(gram: &Matrix) -> Result<FormKind> {
    Ok(reduce_to_standard(FormKind::OrthogonalPlus, gram)?.2)
}

// ---- isometries with prescribed invariants ----

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsometryElement {
    pub form: ClassicalForm,
    pub mat: Matrix,
}

impl IsometryElement {
    pub fn new(form: ClassicalForm, mat: Matrix) -> Result<Self> {
        if !form.is_isometry(&mat)? {
            return Err(Error::NotAnIsometry);
        }
        Ok(IsometryElement { form, mat })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    /// `U ⊕ U*` for `χ ≠ χ*`: `g = F(χ)^{⊕c} ⊕ ((F(χ)^{−σ})^T)^{⊕c}`.
    Pair,
    /// `K_χ^c` with the trace form, `χ = χ*` of degree ≥ 2.
    SelfDual,
    /// A scalar `λ` on a standard block (`λ = ±1`, or `λ^{q+1} = 1` for unitary forms).
    Scalar,
    /// `F(χ)^{⊕c}` in GL (no form).
    General,
}

#[derive(Clone, Debug)]
pub struct Block {
    pub kind: BlockKind,
    pub chi: Poly,
    /// `χ*` for pair blocks.
    pub partner: Option<Poly>,
    pub mult: usize,
    pub deg: usize,
    pub offset: usize,
    pub dim: usize,
    /// The scalar `δ ∈ K_χ` of the trace form `tr(δ·u^τ·v)` on self-dual blocks.
    pub delta: Option<Poly>,
    /// Gram of a single copy (self-dual) or of the whole block (pair, scalar).
    pub gram: Matrix,
}

/// A constructed isometry: `g_block` preserves `gram_block`; `to_standard`
/// (columns = standard basis in block coordinates) carries it to `element`.
#[derive(Clone, Debug)]
pub struct Realization {
    pub form: ClassicalForm,
    pub tuple: InvariantTuple,
    pub blocks: Vec<Block>,
    pub gram_block: Matrix,
    pub g_block: Matrix,
    pub to_standard: Matrix,
    pub scale: FieldElem,
    pub element: IsometryElement,
}

/// `δ` for the trace form on a self-dual block.
pub fn trace_form_delta(family: FormKind, ring: &QuotientRing) -> Poly {
    let f = ring.base();
    if family == FormKind::Symplectic && f.p() != 2 {
        let x = ring.gen();
        ring.sub(&x, &ring.inv(&x).expect("X is invertible"))
    } else {
        ring.one()
    }
}

/// Gram of `tr_{K/k}(δ·τ(u)·v)` in the basis `1, X, …, X^{d−1}`.
pub fn trace_form_gram(ring: &QuotientRing, delta: &Poly) -> Matrix {
    let d = ring.degree();
    let f = ring.base();
    let x = ring.gen();
    let xinv = ring.inv(&x).expect("X is invertible");
    // Tr(δ·X^m) for m = −(d−1)..=(d−1)
    let mut pos = vec![ring.reduce(delta)];
    for _ in 1..d {
        pos.push(ring.mul(pos.last().unwrap(), &x));
    }
    let mut neg = vec![ring.reduce(delta)];
    for _ in 1..d {
        neg.push(ring.mul(neg.last().unwrap(), &xinv));
    }
    let mut g = Matrix::zero(f, d, d);
    for i in 0..d {
        for j in 0..d {
            let e = if j >= i { &pos[j - i] } else { &neg[i - j] };
            g.set(i, j, ring.trace(e));
        }
    }
    g
}

fn family_of(kind: FormKind) -> FormKind {
    if kind.is_orthogonal() {
        FormKind::OrthogonalPlus
    } else {
        kind
    }
}

fn eps(field: &Field, kind: FormKind) -> FieldElem {
    if kind == FormKind::Symplectic {
        field.neg(FieldElem::ONE)
    } else {
        FieldElem::ONE
    }
}

/// Scalar-block Gram of dimension `c`; for orthogonal forms the last
/// diagonal entry is `last`.
fn scalar_gram(kind: FormKind, field: &Field, c: usize, last: FieldElem) -> Result<Matrix> {
    Ok(match kind {
        FormKind::Symplectic => {
            if !c.is_multiple_of(2) {
                return Err(Error::KindMismatch(format!(
                    "±1 eigenspace of odd dimension {c} in a symplectic space"
                )));
            }
            hyperbolic(field, c / 2, field.neg(FieldElem::ONE))
        }
        FormKind::Unitary => Matrix::identity(field, c),
        _ => {
            let mut d = vec![FieldElem::ONE; c];
            if let Some(l) = d.last_mut() {
                *l = last;
            }
            Matrix::diag(field, &d)
        }
    })
}

/// Builds a semisimple isometry of `form` with the given invariant tuple.
pub fn realize_isometry(form: &ClassicalForm, tuple: &InvariantTuple) -> Result<Realization> {
    realize_isometry_matching(form, tuple, None)
}

/// As [`realize_isometry`]; for orthogonal forms `discriminants` (see
/// [`eigenspace_discriminants`]) selects the isometry class of the ±1-eigenspaces,
/// so that the result is conjugate to a given element.
pub fn realize_isometry_matching(
    form: &ClassicalForm,
    tuple: &InvariantTuple,
    discriminants: Option<[Option<bool>; 2]>,
) -> Result<Realization> {
    let field = form.field.clone();
    let n = form.n;
    let sp = form.sigma_power();
    if !tuple.is_semisimple() {
        return Err(Error::NotSemisimple);
    }
    if tuple.n != n || !tuple.is_full_support() {
        return Err(Error::DimensionMismatch(format!(
            "tuple covers {} of n = {n}",
            tuple.support_dim()
        )));
    }
    for (chi, &c) in &tuple.entries {
        let d = chi
            .irr
            .dual(sp)
            .map_err(|_| Error::NotSelfPaired(format!("{} has zero constant term", chi.irr)))?;
        let cd = tuple.c(&linalg::Primary::new(d.clone(), 1));
        if cd != c {
            return Err(Error::NotSelfPaired(format!(
                "c({}) = {c} but c({}) = {cd}",
                chi.irr, d
            )));
        }
    }
    let attempt = |lasts: &[FieldElem]| -> Result<(Vec<Block>, Matrix, Matrix)> {
        let mut blocks = Vec::new();
        let mut grams = Vec::new();
        let mut gs = Vec::new();
        let mut offset = 0;
        let mut scalar_seen = 0;
        for (chi, &c) in &tuple.entries {
            let irr = &chi.irr;
            let dual = irr.dual(sp)?;
            let d = irr.deg();
            if dual < *irr {
                continue; // handled with its partner
            }
            if dual != *irr {
                let m = Matrix::companion(irr);
                let mi = m.inverse()?;
                let nmat = sigma_t(&mi, sp);
                let mut blk_g = Vec::new();
                for _ in 0..c {
                    blk_g.push(m.clone());
                }
                for _ in 0..c {
                    blk_g.push(nmat.clone());
                }
                let dim = 2 * d * c;
                let mut gram = Matrix::zero(&field, dim, dim);
                let e = eps(&field, form.kind);
                for i in 0..d * c {
                    gram.set(i, d * c + i, FieldElem::ONE);
                    gram.set(d * c + i, i, e);
                }
                grams.push(gram.clone());
                gs.push(Matrix::block_diag(&field, &blk_g));
                blocks.push(Block {
                    kind: BlockKind::Pair,
                    chi: irr.clone(),
                    partner: Some(dual),
                    mult: c,
                    deg: d,
                    offset,
                    dim,
                    delta: None,
                    gram,
                });
                offset += dim;
            } else if d == 1 {
                let lambda = field.neg(irr.coeff(0));
                let l = lasts.get(scalar_seen).copied().unwrap_or(FieldElem::ONE);
                scalar_seen += 1;
                let gram = scalar_gram(form.kind, &field, c, l)?;
                grams.push(gram.clone());
                gs.push(Matrix::scalar(&field, c, lambda));
                blocks.push(Block {
                    kind: BlockKind::Scalar,
                    chi: irr.clone(),
                    partner: None,
                    mult: c,
                    deg: 1,
                    offset,
                    dim: c,
                    delta: None,
                    gram,
                });
                offset += c;
            } else {
                let ring = QuotientRing::new(irr.clone());
                let delta = trace_form_delta(form.kind, &ring);
                let copy = trace_form_gram(&ring, &delta);
                let comp = Matrix::companion(irr);
                for _ in 0..c {
                    grams.push(copy.clone());
                    gs.push(comp.clone());
                }
                blocks.push(Block {
                    kind: BlockKind::SelfDual,
                    chi: irr.clone(),
                    partner: None,
                    mult: c,
                    deg: d,
                    offset,
                    dim: d * c,
                    delta: Some(delta),
                    gram: copy,
                });
                offset += d * c;
            }
        }
        Ok((
            blocks,
            Matrix::block_diag(&field, &grams),
            Matrix::block_diag(&field, &gs),
        ))
    };
    let scalar_blocks = tuple
        .entries
        .keys()
        .filter(|k| k.irr.deg() == 1 && k.irr.dual(sp).is_ok_and(|d| d == k.irr))
        .count();
    let options: Vec<FieldElem> = if form.kind.is_orthogonal() {
        vec![FieldElem::ONE, field.nonsquare()]
    } else {
        vec![FieldElem::ONE]
    };
    let mut combos: Vec<Vec<FieldElem>> = vec![vec![]];
    for _ in 0..scalar_blocks {
        combos = combos
            .into_iter()
            .flat_map(|c| options.iter().map(move |&o| [c.clone(), vec![o]].concat()))
            .collect();
    }
    let mut mismatch = None;
    for lasts in combos {
        let (blocks, gram_block, g_block) = attempt(&lasts)?;
        debug_assert_eq!(
            sigma_t(&g_block, sp).mul(&gram_block).mul(&g_block),
            gram_block
        );
        let (a, scale, kind) = reduce_to_standard(family_of(form.kind), &gram_block)?;
        if kind != form.kind {
            mismatch = Some(kind.to_string());
            continue;
        }
        let element = a.inverse()?.mul(&g_block).mul(&a);
        let element = IsometryElement::new(form.clone(), element)?;
        if let Some(want) = discriminants {
            if eigenspace_discriminants(form, &element.mat) != want {
                mismatch = Some("other eigenspace discriminants".into());
                continue;
            }
        }
        return Ok(Realization {
            form: form.clone(),
            tuple: tuple.clone(),
            blocks,
            gram_block,
            g_block,
            to_standard: a,
            scale,
            element,
        });
    }
    Err(Error::KindMismatch(format!(
        "tuple forces {} but {} was requested",
        mismatch.unwrap_or_else(|| "?".into()),
        form.kind
    )))
}

/// Conjugacy in the isometry group of semisimple elements.
pub fn isometry_conjugacy_test(a: &IsometryElement, b: &IsometryElement) -> Result<bool> {
    if a.form != b.form {
        return Err(Error::MixedForms);
    }
    let ta = linalg::invariant_tuple(&a.mat);
    let tb = linalg::invariant_tuple(&b.mat);
    if !ta.is_semisimple() || !tb.is_semisimple() {
        return Err(Error::NotSemisimple);
    }
    if ta != tb {
        return Ok(false);
    }
    if a.form.kind.is_orthogonal() {
        // the ±1-eigenspaces carry a quadratic form whose square class is an
        // extra conjugacy invariant in the finite orthogonal group
        return Ok(
            eigenspace_discriminants(&a.form, &a.mat) == eigenspace_discriminants(&b.form, &b.mat)
        );
    }
    Ok(true)
}

/// Square classes (`true` = square) of the determinant of the form restricted
/// to `ker(g − 1)` and `ker(g + 1)`; `None` for a zero eigenspace.
pub fn eigenspace_discriminants(form: &ClassicalForm, g: &Matrix) -> [Option<bool>; 2] {
    let f = &form.field;
    let n = form.n;
    [FieldElem::ONE, f.neg(FieldElem::ONE)].map(|lambda| {
        let ker = g.sub(&Matrix::scalar(f, n, lambda)).kernel();
        if ker.is_empty() {
            return None;
        }
        let gram = Matrix::from_rows(
            f,
            ker.iter()
                .map(|u| ker.iter().map(|v| form.eval(u, v)).collect())
                .collect(),
        );
        Some(f.is_square(gram.det()))
    })
}

/// Every isometry of `gram` (σ per `sigma_power`), by column-wise backtracking.
pub fn enumerate_isometries(gram: &Matrix, sigma_power: u32, budget: u64) -> Result<Vec<Matrix>> {
    let f = gram.field().clone();
    let n = gram.n();
    let q = f.q();
    let space = (q as u128).pow(n as u32);
    if space > (1u128 << 20) {
        return Err(Error::BudgetExceeded {
            needed: space.to_string(),
            budget: 1 << 20,
        });
    }
    let vectors: Vec<Vector> = (0..space as u64)
        .map(|mut v| {
            (0..n)
                .map(|_| {
                    let d = v % q;
                    v /= q;
                    FieldElem(d)
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut cols: Vec<usize> = Vec::new();
    fn rec(
        gram: &Matrix,
        sp: u32,
        vectors: &[Vector],
        cols: &mut Vec<usize>,
        out: &mut Vec<Matrix>,
        budget: u64,
    ) -> Result<()> {
        let n = gram.n();
        let f = gram.field();
        let j = cols.len();
        if j == n {
            let cs: Vec<Vector> = cols.iter().map(|&i| vectors[i].clone()).collect();
            out.push(Matrix::from_cols(f, n, &cs));
            if out.len() as u64 > budget {
                return Err(Error::BudgetExceeded {
                    needed: format!("> {budget}"),
                    budget,
                });
            }
            return Ok(());
        }
        for (vi, v) in vectors.iter().enumerate() {
            if bform(gram, sp, v, v) != gram.get(j, j) {
                continue;
            }
            let ok = cols.iter().enumerate().all(|(i, &ci)| {
                bform(gram, sp, &vectors[ci], v) == gram.get(i, j)
                    && bform(gram, sp, v, &vectors[ci]) == gram.get(j, i)
            });
            if ok {
                cols.push(vi);
                rec(gram, sp, vectors, cols, out, budget)?;
                cols.pop();
            }
        }
        Ok(())
    }
    rec(gram, sigma_power, &vectors, &mut cols, &mut out, budget)?;
    Ok(out)
}
