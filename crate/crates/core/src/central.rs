//! Centralizers, conformal centralizers and double centralizers of semisimple
//! elements, in GL and in the isometry groups of `forms`.
//!
//! Everything structural happens in *block coordinates* (the companion-block
//! layout of `realize_invariant`, or the block layout of a `Realization`); a
//! [`Structure`] remembers how to get back to the caller's coordinates.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigUint;
use serde::Serialize;

use crate::arith;
use crate::error::{Error, Result};
use crate::ff::{Field, FieldElem};
use crate::forms::{self, Block, BlockKind, FormKind, IsometryElement, Realization};
use crate::linalg::{self, InvariantTuple, Matrix, Vector};
use crate::poly::{self, Poly, QuotientRing};

/// Default ceiling on enumerated candidate matrices.
pub const DEFAULT_MAX_ENUM: u64 = 1 << 24;

// ---- commutants ----

/// `{X : gX = μ⁻¹·X·g}`; an algebra for `μ = 1`.
#[derive(Clone, Debug)]
pub struct CommutantAlgebra {
    pub field: Field,
    pub n: usize,
    pub mu: FieldElem,
    pub basis: Vec<Matrix>,
}

impl CommutantAlgebra {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Closure of the span under multiplication (and containing `I`).
    pub fn is_algebra(&self) -> bool {
        let mut all = self.basis.clone();
        all.push(Matrix::identity(&self.field, self.n));
        let r = span_dim(&self.field, &self.basis);
        if span_dim(&self.field, &all) != r {
            return false;
        }
        for a in &self.basis {
            for b in &self.basis {
                let mut v = self.basis.clone();
                v.push(a.mul(b));
                if span_dim(&self.field, &v) != r {
                    return false;
                }
            }
        }
        true
    }

    /// Every element of the span (`q^dim ≤ budget`).
    pub fn elements(&self, budget: u64) -> Result<Vec<Matrix>> {
        let mut out = Vec::new();
        for_each_combination(&self.field, &self.basis, self.n, budget, |m| {
            out.push(m.clone())
        })?;
        Ok(out)
    }
}

pub fn commutant(g: &Matrix, mu: FieldElem) -> Result<CommutantAlgebra> {
    if !g.is_square() {
        return Err(Error::DimensionMismatch(
            "commutant of a non-square matrix".into(),
        ));
    }
    if mu.is_zero() {
        return Err(Error::ZeroScalar);
    }
    let f = g.field().clone();
    let c = f.inv(mu);
    Ok(CommutantAlgebra {
        field: f,
        n: g.n(),
        mu,
        basis: solve_sylvester(g, c, g),
    })
}

/// Basis of `{X : A·X = c·X·B}` (all square of the same size).
fn solve_sylvester(a: &Matrix, c: FieldElem, b: &Matrix) -> Vec<Matrix> {
    let f = a.field().clone();
    let n = a.n();
    let nn = n * n;
    let mut m = Matrix::zero(&f, nn, nn);
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            // (AX)_ij = Σ_k A_ik X_kj ; (XB)_ij = Σ_l X_il B_lj
            for k in 0..n {
                let v = a.get(i, k);
                if !v.is_zero() {
                    let col = k * n + j;
                    m.set(row, col, f.add(m.get(row, col), v));
                }
            }
            for l in 0..n {
                let v = b.get(l, j);
                if !v.is_zero() {
                    let col = i * n + l;
                    m.set(row, col, f.sub(m.get(row, col), f.mul(c, v)));
                }
            }
        }
    }
    m.kernel().into_iter().map(|v| unvec(&f, n, &v)).collect()
}

fn vec_of(m: &Matrix) -> Vector {
    m.entries().to_vec()
}

fn unvec(f: &Field, n: usize, v: &[FieldElem]) -> Matrix {
    Matrix::from_rows(f, v.chunks(n).map(|r| r.to_vec()).collect())
}

fn span_dim(f: &Field, ms: &[Matrix]) -> usize {
    linalg::dim_span(f, &ms.iter().map(vec_of).collect::<Vec<_>>())
}

/// Restricts `span(basis)` to `{X : X·f = z·f·X}`.
fn restrict(field: &Field, basis: &[Matrix], f: &Matrix, z: FieldElem) -> Vec<Matrix> {
    if basis.is_empty() {
        return Vec::new();
    }
    let n = f.n();
    let zf = f.scale(z);
    let cols: Vec<Vector> = basis
        .iter()
        .map(|b| vec_of(&b.mul(f).sub(&zf.mul(b))))
        .collect();
    if cols.iter().all(|c| c.iter().all(|x| x.is_zero())) {
        return basis.to_vec();
    }
    let m = Matrix::from_cols(field, n * n, &cols);
    m.kernel()
        .into_iter()
        .map(|x| {
            let mut acc = Matrix::zero(field, n, n);
            for (xi, b) in x.iter().zip(basis) {
                if !xi.is_zero() {
                    acc = acc.add(&b.scale(*xi));
                }
            }
            acc
        })
        .collect()
}

/// Runs `visit` on every `Σ x_i·B_i`; errors when `q^m > budget`.
fn for_each_combination(
    field: &Field,
    basis: &[Matrix],
    n: usize,
    budget: u64,
    mut visit: impl FnMut(&Matrix),
) -> Result<()> {
    let q = field.q();
    let m = basis.len();
    let total = (q as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded {
            needed: format!("{q}^{m}"),
            budget,
        });
    }
    let mut x = vec![0u64; m];
    let mut acc = Matrix::zero(field, n, n);
    loop {
        visit(&acc);
        // odometer, updating `acc` incrementally
        let mut i = 0;
        loop {
            if i == m {
                return Ok(());
            }
            let old = FieldElem(x[i]);
            x[i] = (x[i] + 1) % q;
            let new = FieldElem(x[i]);
            acc = acc.add(&basis[i].scale(field.sub(new, old)));
            if x[i] != 0 {
                break;
            }
            i += 1;
        }
    }
}

// ---- block structure ----

/// A semisimple element in block coordinates.
#[derive(Clone, Debug)]
pub struct Structure {
    /// `None` for GL.
    pub kind: Option<FormKind>,
    pub field: Field,
    pub g: Matrix,
    pub gram: Option<Matrix>,
    pub blocks: Vec<Block>,
    pub tuple: InvariantTuple,
    /// Caller coordinates: `original = conj · X · conj⁻¹`.
    pub conj: Matrix,
    pub conj_inv: Matrix,
    /// Set when `g` is a realized conjugate of the caller's element rather than
    /// the element itself.
    pub representative: bool,
}

impl Structure {
    pub fn n(&self) -> usize {
        self.g.n()
    }

    pub fn sigma_power(&self) -> u32 {
        self.kind.map_or(0, |k| k.sigma_power())
    }

    pub fn mode_name(&self) -> String {
        self.kind
            .map_or_else(|| "gl".to_string(), |k| k.to_string())
    }

    pub fn to_original(&self, x: &Matrix) -> Matrix {
        self.conj.mul(x).mul(&self.conj_inv)
    }

    pub fn from_original(&self, x: &Matrix) -> Matrix {
        self.conj_inv.mul(x).mul(&self.conj)
    }

    /// The admissible scalar group `Z`: `k^×` for GL, `±1` for symplectic and
    /// orthogonal groups, `{μ : μ^{q+1} = 1}` for unitary groups.
    pub fn z_group(&self) -> Vec<FieldElem> {
        z_group(self.kind, &self.field)
    }

    /// `T = stab_Z(q(g))`.
    pub fn stabilizer(&self) -> Result<Vec<FieldElem>> {
        let mut t = Vec::new();
        for z in self.z_group() {
            if act_on_tuple(&self.tuple, z)? == self.tuple {
                t.push(z);
            }
        }
        Ok(t)
    }

    fn is_isometry(&self, h: &Matrix) -> bool {
        match &self.gram {
            None => true,
            Some(gram) => forms::sigma_t(h, self.sigma_power()).mul(gram).mul(h) == *gram,
        }
    }
}

pub fn z_group(kind: Option<FormKind>, field: &Field) -> Vec<FieldElem> {
    let mut z: Vec<FieldElem> = match kind {
        None => field
            .nonzero_elements()
            .expect("field is enumerable")
            .collect(),
        Some(FormKind::Unitary) => {
            let q0 = field.p().pow(field.k() / 2);
            poly::cyclic_subgroup(field, q0 + 1).expect("q+1 divides q²−1")
        }
        Some(_) => vec![FieldElem::ONE, field.neg(FieldElem::ONE)],
    };
    z.sort();
    z.dedup();
    z
}

/// `q(g).z`: every χ replaced by `χ.z` (roots divided by `z`).
pub fn act_on_tuple(t: &InvariantTuple, z: FieldElem) -> Result<InvariantTuple> {
    let mut out = InvariantTuple::new(t.n);
    for (k, &c) in &t.entries {
        out.insert(k.irr.scalar_act(z)?, k.exp, c);
    }
    Ok(out)
}

/// Block structure of a semisimple `g ∈ GL_n`.
pub fn structure_gl(g: &Matrix) -> Result<Structure> {
    if !g.is_square() {
        return Err(Error::DimensionMismatch("non-square element".into()));
    }
    let (tuple, p) = linalg::frobenius_form(g);
    if !tuple.is_semisimple() {
        return Err(Error::NotSemisimple);
    }
    let field = g.field().clone();
    let canon = linalg::realize_invariant(&field, g.n(), &tuple)?;
    let mut blocks = Vec::new();
    let mut offset = 0;
    for (k, &c) in &tuple.entries {
        let d = k.irr.deg();
        blocks.push(Block {
            kind: BlockKind::General,
            chi: k.irr.clone(),
            partner: None,
            mult: c,
            deg: d,
            offset,
            dim: d * c,
            delta: None,
            gram: Matrix::zero(&field, 0, 0),
        });
        offset += d * c;
    }
    let p_inv = p.inverse()?;
    Ok(Structure {
        kind: None,
        field,
        g: canon,
        gram: None,
        blocks,
        tuple,
        conj: p,
        conj_inv: p_inv,
        representative: false,
    })
}

pub fn structure_of_realization(r: &Realization) -> Result<Structure> {
    Ok(Structure {
        kind: Some(r.form.kind),
        field: r.form.field.clone(),
        g: r.g_block.clone(),
        gram: Some(r.gram_block.clone()),
        blocks: r.blocks.clone(),
        tuple: r.tuple.clone(),
        conj: r.to_standard.inverse()?,
        conj_inv: r.to_standard.clone(),
        representative: false,
    })
}

/// Structure of a realized conjugate of `elem` (same tuple and, for orthogonal
/// forms, the same eigenspace discriminants). The form must be standard.
pub fn structure_of_isometry(elem: &IsometryElement) -> Result<Structure> {
    let tuple = linalg::invariant_tuple(&elem.mat);
    if !tuple.is_semisimple() {
        return Err(Error::NotSemisimple);
    }
    let disc = elem
        .form
        .kind
        .is_orthogonal()
        .then(|| forms::eigenspace_discriminants(&elem.form, &elem.mat));
    let r = forms::realize_isometry_matching(&elem.form, &tuple, disc)?;
    let mut st = structure_of_realization(&r)?;
    if r.element.mat != elem.mat {
        st.representative = true;
    }
    Ok(st)
}

// ---- block-group generators ----

fn gl_order(big_q: &BigUint, c: usize) -> BigUint {
    let qc = big_q.pow(c as u32);
    (0..c).fold(BigUint::from(1u32), |acc, i| {
        acc * (&qc - big_q.pow(i as u32))
    })
}

fn ring_size(ring: &QuotientRing) -> Result<u64> {
    ring.size().ok_or(Error::DegreeTooLarge {
        p: ring.base().p(),
        k: ring.degree() as u32,
    })
}

fn primitive_of(ring: &QuotientRing) -> Result<Poly> {
    let size = ring_size(ring)?;
    for a in ring.elements()? {
        if !a.is_zero() && ring.mult_order(&a)? == size - 1 {
            return Ok(a);
        }
    }
    unreachable!("a finite field has a primitive element")
}

/// Generator of the norm-one group `{δ : δ·τ(δ) = 1}` (order `√|K| + 1`).
fn norm_one_generator(ring: &QuotientRing, sp: u32) -> Result<Poly> {
    let size = ring_size(ring)?;
    let root = (size as f64).sqrt().round() as u64;
    debug_assert_eq!(root * root, size);
    let prim = primitive_of(ring)?;
    let d = ring.pow(&prim, root - 1);
    debug_assert!(ring.mul(&d, &ring.tau(&d, sp)).is_one());
    Ok(d)
}

/// `d×d` matrix of multiplication by `a` in the basis `1, X, …`.
fn mult_matrix(comp: &Matrix, a: &Poly) -> Matrix {
    comp.eval_poly(a)
}

/// A `c×c` matrix over `K` as a `dc×dc` matrix over `k`.
fn k_matrix(comp: &Matrix, m: &[Vec<Poly>]) -> Matrix {
    let d = comp.n();
    let c = m.len();
    let f = comp.field().clone();
    let mut out = Matrix::zero(&f, d * c, d * c);
    for (i, row) in m.iter().enumerate() {
        for (j, a) in row.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let b = mult_matrix(comp, a);
            for r in 0..d {
                for s in 0..d {
                    out.set(i * d + r, j * d + s, b.get(r, s));
                }
            }
        }
    }
    out
}

fn k_identity(ring: &QuotientRing, c: usize) -> Vec<Vec<Poly>> {
    (0..c)
        .map(|i| {
            (0..c)
                .map(|j| if i == j { ring.one() } else { ring.zero() })
                .collect()
        })
        .collect()
}

/// Elementary matrices `E_ij(1)` and `diag(ζ, 1, …)` generate `GL_c(K)`.
fn gl_generators(ring: &QuotientRing, c: usize) -> Result<Vec<Vec<Vec<Poly>>>> {
    let mut out = Vec::new();
    if ring_size(ring)? > 2 {
        let mut d = k_identity(ring, c);
        d[0][0] = primitive_of(ring)?;
        out.push(d);
    }
    for i in 0..c {
        for j in 0..c {
            if i != j {
                let mut e = k_identity(ring, c);
                e[i][j] = ring.one();
                out.push(e);
            }
        }
    }
    Ok(out)
}

/// Representatives of the projective points of `K^c` (first nonzero entry 1).
fn projective_points(elems: &[Poly], ring: &QuotientRing, c: usize) -> Vec<Vec<Poly>> {
    let mut out = Vec::new();
    for lead in 0..c {
        let free = c - lead - 1;
        let count = elems.len().pow(free as u32);
        for mut idx in 0..count {
            let mut v = vec![ring.zero(); c];
            v[lead] = ring.one();
            for slot in v.iter_mut().skip(lead + 1) {
                *slot = elems[idx % elems.len()].clone();
                idx /= elems.len();
            }
            out.push(v);
        }
    }
    out
}

/// Quasi-reflections and unitary transvections for the Hermitian form
/// `Σ τ(u_i)·v_i` on `K^c`; with `c = 1` the norm-one generator.
fn unitary_generators(ring: &QuotientRing, sp: u32, c: usize) -> Result<Vec<Vec<Vec<Poly>>>> {
    let delta = norm_one_generator(ring, sp)?;
    if c == 1 {
        return Ok(vec![vec![vec![delta]]]);
    }
    let elems = ring.elements()?;
    let tau = |a: &Poly| ring.tau(a, sp);
    let skew: Vec<Poly> = elems
        .iter()
        .filter(|a| !a.is_zero() && a.add(&tau(a)).is_zero())
        .cloned()
        .collect();
    let mut out = Vec::new();
    for v in projective_points(&elems, ring, c) {
        let h = v
            .iter()
            .fold(ring.zero(), |acc, x| acc.add(&ring.mul(&tau(x), x)));
        let coeffs: Vec<Poly> = if h.is_zero() {
            skew.clone()
        } else {
            let hi = ring.inv(&h).expect("nonzero");
            vec![ring.mul(&delta.sub(&ring.one()), &hi)]
        };
        for b in coeffs {
            let mut m = k_identity(ring, c);
            for i in 0..c {
                for j in 0..c {
                    let t = ring.mul(&ring.mul(&b, &v[i]), &tau(&v[j]));
                    m[i][j] = m[i][j].add(&t);
                }
            }
            out.push(m);
        }
    }
    Ok(out)
}

fn field_vectors(f: &Field, c: usize) -> Vec<Vector> {
    let q = f.q();
    let total = q.pow(c as u32);
    (1..total)
        .map(|mut v| {
            (0..c)
                .map(|_| {
                    let d = v % q;
                    v /= q;
                    FieldElem(d)
                })
                .collect()
        })
        .collect()
}

fn is_projective_rep(v: &[FieldElem]) -> bool {
    v.iter()
        .find(|x| !x.is_zero())
        .is_some_and(|x| *x == FieldElem::ONE)
}

/// `v·w^T` scaled by `a`, added to the identity.
fn rank_one_update(f: &Field, a: FieldElem, v: &[FieldElem], w: &[FieldElem]) -> Matrix {
    let c = v.len();
    let mut m = Matrix::identity(f, c);
    for (i, &vi) in v.iter().enumerate() {
        for (j, &wj) in w.iter().enumerate() {
            m.set(i, j, f.add(m.get(i, j), f.mul(a, f.mul(vi, wj))));
        }
    }
    m
}

/// Symplectic transvections `x ↦ x + a·B(v,x)·v`, all points `v`, all `a ∈ k^×`.
fn symplectic_generators(gram: &Matrix) -> Vec<Matrix> {
    let f = gram.field().clone();
    let c = gram.n();
    let mut out = Vec::new();
    for v in field_vectors(&f, c)
        .into_iter()
        .filter(|v| is_projective_rep(v))
    {
        let w = gram.transpose().apply(&v); // (v^T G)^T
        for a in f.nonzero_elements().expect("small field") {
            out.push(rank_one_update(&f, a, &v, &w));
        }
    }
    out
}

/// Reflections in all anisotropic points (odd characteristic).
fn orthogonal_generators(gram: &Matrix) -> Result<Vec<Matrix>> {
    let f = gram.field().clone();
    if f.p() == 2 {
        return Err(Error::UnsupportedCharacteristic(
            "orthogonal groups in characteristic 2".into(),
        ));
    }
    let c = gram.n();
    let mut out = Vec::new();
    for v in field_vectors(&f, c)
        .into_iter()
        .filter(|v| is_projective_rep(v))
    {
        let w = gram.transpose().apply(&v);
        let bvv = v
            .iter()
            .zip(&w)
            .fold(FieldElem::ZERO, |acc, (&a, &b)| f.add(acc, f.mul(a, b)));
        if bvv.is_zero() {
            continue;
        }
        let a = f.neg(f.div(f.from_int(2), bvv));
        out.push(rank_one_update(&f, a, &v, &w));
    }
    Ok(out)
}

fn embed(n: usize, f: &Field, pieces: &[(usize, &Matrix)]) -> Matrix {
    let mut m = Matrix::identity(f, n);
    for (off, p) in pieces {
        for i in 0..p.rows() {
            for j in 0..p.cols() {
                m.set(off + i, off + j, p.get(i, j));
            }
        }
    }
    m
}

/// A block is "blind" when its group is trivial (`GL_1(2)`): it cannot detect
/// anything on its own subspace.
fn is_flagged(st: &Structure, b: &Block) -> bool {
    b.mult == 1 && st.field.q().pow(b.deg as u32) == 2 && b.kind == BlockKind::General
}

/// Generators of `C(g)`, block by block, in block coordinates; also the order.
pub fn block_generators(st: &Structure) -> Result<Vec<(usize, Vec<Matrix>, BigUint)>> {
    let f = &st.field;
    let n = st.n();
    let sp = st.sigma_power();
    let mut out = Vec::new();
    for (bi, b) in st.blocks.iter().enumerate() {
        let ring = QuotientRing::new(b.chi.clone());
        let comp = Matrix::companion(&b.chi);
        let big_q = BigUint::from(f.q()).pow(b.deg as u32);
        let mut gens = Vec::new();
        let order = match b.kind {
            BlockKind::General => {
                for m in gl_generators(&ring, b.mult)? {
                    gens.push(embed(n, f, &[(b.offset, &k_matrix(&comp, &m))]));
                }
                gl_order(&big_q, b.mult)
            }
            BlockKind::Pair => {
                let half = b.dim / 2;
                for m in gl_generators(&ring, b.mult)? {
                    let mm = k_matrix(&comp, &m);
                    let nn = forms::sigma_t(&mm, sp).inverse()?;
                    gens.push(embed(n, f, &[(b.offset, &mm), (b.offset + half, &nn)]));
                }
                gl_order(&big_q, b.mult)
            }
            BlockKind::SelfDual => {
                for m in unitary_generators(&ring, sp, b.mult)? {
                    gens.push(embed(n, f, &[(b.offset, &k_matrix(&comp, &m))]));
                }
                let root = big_q.sqrt();
                forms::group_order(
                    FormKind::Unitary,
                    u64::try_from(&root)
                        .map_err(|_| Error::DimensionMismatch("block too large".into()))?,
                    b.mult,
                )
            }
            BlockKind::Scalar => {
                let kind = st.kind.expect("scalar blocks only occur with a form");
                let local: Vec<Matrix> = match kind {
                    FormKind::Symplectic => symplectic_generators(&b.gram),
                    FormKind::Unitary => unitary_generators(&ring, sp, b.mult)?
                        .iter()
                        .map(|m| k_matrix(&comp, m))
                        .collect(),
                    _ => orthogonal_generators(&b.gram)?,
                };
                gens.extend(local.iter().map(|m| embed(n, f, &[(b.offset, m)])));
                match kind {
                    FormKind::Symplectic => forms::group_order(kind, f.q(), b.mult),
                    FormKind::Unitary => forms::group_order(kind, f.p().pow(f.k() / 2), b.mult),
                    _ => forms::group_order(forms::orthogonal_kind(&b.gram)?, f.q(), b.mult),
                }
            }
        };
        debug_assert!(gens
            .iter()
            .all(|h| h.mul(&st.g) == st.g.mul(h) && st.is_isometry(h)));
        out.push((bi, gens, order));
    }
    Ok(out)
}

// ---- T-action ----

/// One "slot": a `g`-invariant piece of a block with the polynomial whose roots
/// are the eigenvalues of `g` there.
struct Slot {
    block: usize,
    psi: Poly,
    offset: usize,
    dim: usize,
    /// index of the copy inside its block (pair blocks: 0 = U, 1 = U*)
    side: usize,
    copy: usize,
}

fn slots(st: &Structure) -> Result<Vec<Slot>> {
    let sp = st.sigma_power();
    let mut out = Vec::new();
    for (bi, b) in st.blocks.iter().enumerate() {
        match b.kind {
            BlockKind::Scalar => out.push(Slot {
                block: bi,
                psi: b.chi.clone(),
                offset: b.offset,
                dim: b.dim,
                side: 0,
                copy: 0,
            }),
            BlockKind::Pair => {
                let dual = b.chi.dual(sp)?;
                for side in 0..2 {
                    for copy in 0..b.mult {
                        out.push(Slot {
                            block: bi,
                            psi: if side == 0 {
                                b.chi.clone()
                            } else {
                                dual.clone()
                            },
                            offset: b.offset + side * b.dim / 2 + copy * b.deg,
                            dim: b.deg,
                            side,
                            copy,
                        });
                    }
                }
            }
            _ => {
                for copy in 0..b.mult {
                    out.push(Slot {
                        block: bi,
                        psi: b.chi.clone(),
                        offset: b.offset + copy * b.deg,
                        dim: b.deg,
                        side: 0,
                        copy,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn sub_matrix(m: &Matrix, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
    Matrix::from_rows(
        m.field(),
        (0..rows)
            .map(|i| (0..cols).map(|j| m.get(r0 + i, c0 + j)).collect())
            .collect(),
    )
}

fn put(m: &mut Matrix, r0: usize, c0: usize, p: &Matrix) {
    for i in 0..p.rows() {
        for j in 0..p.cols() {
            m.set(r0 + i, c0 + j, p.get(i, j));
        }
    }
}

/// `A` with `R·A = t·A·S`.
fn intertwiner(s: &Matrix, r: &Matrix, t: FieldElem) -> Result<Matrix> {
    let (ok, w) = linalg::conjugacy_test(&s.scale(t), r)?;
    if !ok {
        return Err(Error::TNotStabilizing);
    }
    w.expect("witness").inverse()
}

/// `φ_t` with `φ_t⁻¹·g·φ_t = t·g` (an isometry when a form is present).
pub fn t_action_map(st: &Structure, t: FieldElem) -> Result<Matrix> {
    let f = st.field.clone();
    let n = st.n();
    let sp = st.sigma_power();
    let tinv = f.inv(t);
    let sl = slots(st)?;
    let find = |psi: &Poly, copy: usize, want_block_kind: BlockKind| -> Result<&Slot> {
        sl.iter()
            .find(|s| s.psi == *psi && s.copy == copy && st.blocks[s.block].kind == want_block_kind)
            .ok_or(Error::TNotStabilizing)
    };
    let mut phi = Matrix::zero(&f, n, n);
    for b in &st.blocks {
        let target_chi = b.chi.scalar_act(tinv)?;
        match b.kind {
            BlockKind::Scalar => {
                let tgt = find(&target_chi, 0, BlockKind::Scalar)?;
                let tb = &st.blocks[tgt.block];
                let a = if tb.gram == b.gram {
                    Matrix::identity(&f, b.dim)
                } else {
                    let fam = st.kind.expect("form");
                    let fam = if fam.is_orthogonal() {
                        FormKind::OrthogonalPlus
                    } else {
                        fam
                    };
                    let (a1, s1, k1) = forms::reduce_to_standard(fam, &b.gram)?;
                    let (a2, s2, k2) = forms::reduce_to_standard(fam, &tb.gram)?;
                    if k1 != k2 || s1 != s2 {
                        return Err(Error::TNotStabilizing);
                    }
                    a2.mul(&a1.inverse()?)
                };
                put(&mut phi, tgt.offset, b.offset, &a);
            }
            BlockKind::General | BlockKind::SelfDual => {
                let comp = Matrix::companion(&b.chi);
                let ring = QuotientRing::new(b.chi.clone());
                for copy in 0..b.mult {
                    let tgt = find(&target_chi, copy, b.kind)?;
                    let r = sub_matrix(&st.g, tgt.offset, tgt.offset, tgt.dim, tgt.dim);
                    let mut a = intertwiner(&comp, &r, t)?;
                    if b.kind == BlockKind::SelfDual {
                        // adjust by a K-scalar so that the trace forms match
                        let tg = &st.blocks[tgt.block].gram;
                        let mut found = None;
                        for mu in ring.elements()? {
                            if mu.is_zero() {
                                continue;
                            }
                            let cand = a.mul(&mult_matrix(&comp, &mu));
                            if forms::sigma_t(&cand, sp).mul(tg).mul(&cand) == b.gram {
                                found = Some(cand);
                                break;
                            }
                        }
                        a = found.ok_or(Error::TNotStabilizing)?;
                    }
                    put(&mut phi, tgt.offset, b.offset + copy * b.deg, &a);
                }
            }
            BlockKind::Pair => {
                let gram = st.gram.as_ref().expect("pair blocks carry a form");
                let half = b.dim / 2;
                let comp = Matrix::companion(&b.chi);
                for copy in 0..b.mult {
                    let src_u = b.offset + copy * b.deg;
                    let src_w = src_u + half;
                    let tgt_u = find(&target_chi, copy, BlockKind::Pair)?;
                    let tb = &st.blocks[tgt_u.block];
                    let partner_off = if tgt_u.side == 0 {
                        tgt_u.offset + tb.dim / 2
                    } else {
                        tgt_u.offset - tb.dim / 2
                    };
                    let r = sub_matrix(&st.g, tgt_u.offset, tgt_u.offset, b.deg, b.deg);
                    let a = intertwiner(&comp, &r, t)?;
                    // σ(A)^T·Q·N = P_src with Q, P_src the pairing blocks of the Gram
                    let q = sub_matrix(gram, tgt_u.offset, partner_off, b.deg, b.deg);
                    let p_src = sub_matrix(gram, src_u, src_w, b.deg, b.deg);
                    let nmat = forms::sigma_t(&a, sp).mul(&q).inverse()?.mul(&p_src);
                    put(&mut phi, tgt_u.offset, src_u, &a);
                    put(&mut phi, partner_off, src_w, &nmat);
                }
            }
        }
    }
    let ok_conj = st.g.mul(&phi) == phi.mul(&st.g).scale(t);
    if !ok_conj || phi.rank() != n || !st.is_isometry(&phi) {
        return Err(Error::TNotStabilizing);
    }
    Ok(phi)
}

/// `φ_t` for every `t ∈ T` (ascending codes of `t`).
pub fn t_action_maps(st: &Structure, t: &[FieldElem]) -> Result<Vec<(FieldElem, Matrix)>> {
    let stab = st.stabilizer()?;
    t.iter()
        .map(|&x| {
            if !stab.contains(&x) {
                return Err(Error::TNotStabilizing);
            }
            Ok((x, t_action_map(st, x)?))
        })
        .collect()
}

// ---- reports ----

#[derive(Clone, Debug, Serialize)]
pub struct LambdaRow {
    pub chi: String,
    pub block: BlockKind,
    /// Distinct values of `λ_χ(h)` over the reported elements, as coefficient lists.
    pub values: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CentralizerReport {
    pub what: &'static str,
    pub mode: String,
    pub conformal: bool,
    pub field: String,
    pub n: usize,
    pub element: Matrix,
    /// The computation used a realized conjugate of `element`.
    pub representative: bool,
    pub order: Option<String>,
    pub generators: usize,
    pub element_count: Option<usize>,
    /// Conformal centralizers: number of elements per twist `μ` (code, count).
    pub by_mu: Vec<(u64, usize)>,
    pub z: Vec<u64>,
    pub t: Vec<u64>,
    pub lambda: Vec<LambdaRow>,
    /// Abelian modulo `Z`.
    pub abelian: Option<bool>,
    /// Every element acts on each `V_χ` as a `K_χ`-scalar.
    pub block_scalar: bool,
    pub exponent_mod_center: Option<u64>,
    pub flagged: Vec<String>,
    pub checks: BTreeMap<String, bool>,
    #[serde(skip)]
    pub elements: Option<Vec<Matrix>>,
    #[serde(skip)]
    pub generator_list: Vec<Matrix>,
}

impl CentralizerReport {
    fn new(what: &'static str, st: &Structure, element: Matrix, conformal: bool) -> Self {
        CentralizerReport {
            what,
            mode: st.mode_name(),
            conformal,
            field: st.field.to_string(),
            n: st.n(),
            element,
            representative: st.representative,
            order: None,
            generators: 0,
            element_count: None,
            by_mu: Vec::new(),
            z: st.z_group().iter().map(|z| z.0).collect(),
            t: Vec::new(),
            lambda: Vec::new(),
            abelian: None,
            block_scalar: false,
            exponent_mod_center: None,
            flagged: Vec::new(),
            checks: BTreeMap::new(),
            elements: None,
            generator_list: Vec::new(),
        }
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.values().all(|&b| b)
    }
}

/// Centralizer of a semisimple `g` in `GL_n`. In enumeration mode the units of
/// the commutant are counted and compared with the structure formula.
pub fn centralizer_in_gl(g: &Matrix, enumerate: bool, budget: u64) -> Result<CentralizerReport> {
    let st = structure_gl(g)?;
    let mut rep = CentralizerReport::new("centralizer", &st, g.clone(), false);
    let gens = block_generators(&st)?;
    let order = gens
        .iter()
        .fold(BigUint::from(1u32), |acc, (_, _, o)| acc * o);
    rep.order = Some(order.to_string());
    rep.generator_list = gens
        .iter()
        .flat_map(|(_, v, _)| v.iter().map(|h| st.to_original(h)))
        .collect();
    rep.generators = rep.generator_list.len();
    rep.flagged = flagged_blocks(&st);
    rep.checks.insert(
        "generators_commute".into(),
        rep.generator_list.iter().all(|h| h.mul(g) == g.mul(h)),
    );
    if enumerate {
        let alg = commutant(g, FieldElem::ONE)?;
        let mut units = Vec::new();
        for_each_combination(&st.field, &alg.basis, g.n(), budget, |m| {
            if !m.det().is_zero() {
                units.push(m.clone());
            }
        })?;
        rep.checks.insert(
            "order_matches_enumeration".into(),
            BigUint::from(units.len()) == order,
        );
        rep.element_count = Some(units.len());
        rep.elements = Some(units);
    }
    Ok(rep)
}

fn flagged_blocks(st: &Structure) -> Vec<String> {
    st.blocks
        .iter()
        .filter(|b| is_flagged(st, b))
        .map(|b| b.chi.to_csv())
        .collect()
}

/// Centralizer (or conformal centralizer) of a semisimple isometry.
///
/// Structural mode works on a realized conjugate and reports generators and the
/// order `|C(g)|·|T|`; enumeration mode solves the twisted commutant for each
/// admissible `μ` and keeps the isometries.
pub fn centralizer_in_isometry(
    elem: &IsometryElement,
    conformal: bool,
    enumerate: bool,
    budget: u64,
) -> Result<CentralizerReport> {
    let st = structure_of_isometry(elem)?;
    let mut rep = CentralizerReport::new("centralizer", &st, elem.mat.clone(), conformal);
    let gens = block_generators(&st)?;
    let mut order = gens
        .iter()
        .fold(BigUint::from(1u32), |acc, (_, _, o)| acc * o);
    let t = st.stabilizer()?;
    rep.t = t.iter().map(|x| x.0).collect();
    let mut list: Vec<Matrix> = gens
        .iter()
        .flat_map(|(_, v, _)| v.iter().cloned())
        .collect();
    if conformal {
        order *= BigUint::from(t.len());
        for (x, phi) in t_action_maps(&st, &t)? {
            if x != FieldElem::ONE {
                list.push(phi);
            }
        }
    }
    rep.order = Some(order.to_string());
    rep.generator_list = list.iter().map(|h| st.to_original(h)).collect();
    rep.generators = rep.generator_list.len();
    let g_rep = st.to_original(&st.g);
    let z = st.z_group();
    rep.checks.insert(
        "generators_twist_commute".into(),
        rep.generator_list.iter().all(|h| {
            let lhs = h.inverse().map(|hi| hi.mul(&g_rep).mul(h));
            lhs.is_ok_and(|l| z.iter().any(|&m| l == g_rep.scale(m)) && (conformal || l == g_rep))
        }),
    );
    if enumerate {
        let g = &elem.mat;
        let f = &st.field;
        let mus: Vec<FieldElem> = if conformal {
            z.clone()
        } else {
            vec![FieldElem::ONE]
        };
        let mut all = Vec::new();
        for mu in mus {
            // h⁻¹gh = μg  ⇔  g·h = μ·h·g  ⇔  commutant(g, μ⁻¹)
            let alg = commutant(g, f.inv(mu))?;
            let mut found = Vec::new();
            let checker =
                IsometryChecker::new(&elem.form.gram, elem.form.sigma_power(), &alg.basis);
            for_each_combination_coeffs(f, &alg.basis, budget, |x| {
                if checker.check(x) {
                    found.push(combine(f, &alg.basis, x, g.n()));
                }
            })?;
            if !found.is_empty() {
                rep.by_mu.push((mu.0, found.len()));
            }
            all.extend(found);
        }
        rep.checks.insert(
            "order_matches_enumeration".into(),
            BigUint::from(all.len()) == order,
        );
        rep.element_count = Some(all.len());
        rep.elements = Some(all);
    }
    Ok(rep)
}

fn combine(f: &Field, basis: &[Matrix], x: &[FieldElem], n: usize) -> Matrix {
    let mut acc = Matrix::zero(f, n, n);
    for (xi, b) in x.iter().zip(basis) {
        if !xi.is_zero() {
            acc = acc.add(&b.scale(*xi));
        }
    }
    acc
}

fn for_each_combination_coeffs(
    field: &Field,
    basis: &[Matrix],
    budget: u64,
    mut visit: impl FnMut(&[FieldElem]),
) -> Result<()> {
    let q = field.q();
    let m = basis.len();
    let total = (q as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded {
            needed: format!("{q}^{m}"),
            budget,
        });
    }
    let mut x = vec![FieldElem::ZERO; m];
    loop {
        visit(&x);
        let mut i = 0;
        loop {
            if i == m {
                return Ok(());
            }
            x[i] = FieldElem((x[i].0 + 1) % q);
            if x[i].0 != 0 {
                break;
            }
            i += 1;
        }
    }
}

/// Tests `σ(h)^T·G·h = G` for `h = Σ x_i B_i` entry by entry, using the
/// precomputed products `σ(B_i)^T·G·B_j`.
struct IsometryChecker {
    field: Field,
    sp: u32,
    target: Vec<FieldElem>,
    /// per entry, the m×m table
    tables: Vec<Vec<FieldElem>>,
    m: usize,
    gl_only: bool,
    basis: Vec<Matrix>,
}

impl IsometryChecker {
    fn new(gram: &Matrix, sp: u32, basis: &[Matrix]) -> Self {
        let f = gram.field().clone();
        let m = basis.len();
        let n = gram.n();
        let prods: Vec<Vec<Matrix>> = basis
            .iter()
            .map(|bi| {
                let left = forms::sigma_t(bi, sp).mul(gram);
                basis.iter().map(|bj| left.mul(bj)).collect()
            })
            .collect();
        // entries with a nonzero target first: they reject fastest
        let mut order: Vec<usize> = (0..n * n).collect();
        order.sort_by_key(|&e| gram.entries()[e].is_zero());
        let tables = order
            .iter()
            .map(|&e| {
                let mut t = Vec::with_capacity(m * m);
                for row in &prods {
                    for p in row {
                        t.push(p.entries()[e]);
                    }
                }
                t
            })
            .collect();
        let target = order.iter().map(|&e| gram.entries()[e]).collect();
        IsometryChecker {
            field: f,
            sp,
            target,
            tables,
            m,
            gl_only: false,
            basis: basis.to_vec(),
        }
    }

    fn gl(field: &Field, basis: &[Matrix]) -> Self {
        IsometryChecker {
            field: field.clone(),
            sp: 0,
            target: Vec::new(),
            tables: Vec::new(),
            m: basis.len(),
            gl_only: true,
            basis: basis.to_vec(),
        }
    }

    fn check(&self, x: &[FieldElem]) -> bool {
        let f = &self.field;
        if self.gl_only {
            if x.iter().all(|c| c.is_zero()) {
                return false;
            }
            let n = self.basis[0].n();
            return !combine(f, &self.basis, x, n).det().is_zero();
        }
        let sx: Vec<FieldElem> = x.iter().map(|&c| forms::sigma(f, self.sp, c)).collect();
        for (t, &want) in self.tables.iter().zip(&self.target) {
            let mut acc = FieldElem::ZERO;
            for i in 0..self.m {
                if sx[i].is_zero() {
                    continue;
                }
                let mut inner = FieldElem::ZERO;
                for j in 0..self.m {
                    if !x[j].is_zero() {
                        inner = f.add(inner, f.mul(t[i * self.m + j], x[j]));
                    }
                }
                acc = f.add(acc, f.mul(sx[i], inner));
            }
            if acc != want {
                return false;
            }
        }
        true
    }
}

/// Scalars `z ∈ Z` with `z·f` conjugate to `f` in GL.
fn admissible(f: &Matrix, z: &[FieldElem]) -> Vec<FieldElem> {
    let cp = f.char_poly();
    let t = std::cell::OnceCell::new();
    z.iter()
        .copied()
        .filter(|&x| {
            if x == FieldElem::ONE {
                return true;
            }
            let zf = f.scale(x);
            zf.char_poly() == cp
                && linalg::invariant_tuple(&zf) == *t.get_or_init(|| linalg::invariant_tuple(f))
        })
        .collect()
}

fn canonical_span(f: &Field, basis: &[Matrix]) -> Vec<Vector> {
    let vs: Vec<Vector> = basis.iter().map(vec_of).collect();
    linalg::span_basis(f, basis.first().map_or(0, |b| b.n() * b.n()), &vs)
}

/// `λ_χ(h)` when `h` acts on the block as multiplication by a `K_χ`-scalar.
fn lambda_of(st: &Structure, b: &Block, h: &Matrix) -> Option<Poly> {
    let f = &st.field;
    let lam = if b.kind == BlockKind::Scalar {
        Poly::constant(f, h.get(b.offset, b.offset))
    } else {
        let col: Vec<FieldElem> = (0..b.deg).map(|i| h.get(b.offset + i, b.offset)).collect();
        Poly::new(f.clone(), col)
    };
    // verify on the whole block (U side for pairs)
    let (span, reps) = match b.kind {
        BlockKind::Scalar => (b.dim, b.dim),
        BlockKind::Pair => (b.dim / 2, b.mult),
        _ => (b.dim, b.mult),
    };
    let expect = if b.kind == BlockKind::Scalar {
        Matrix::scalar(f, span, lam.coeff(0))
    } else {
        let mm = mult_matrix(&Matrix::companion(&b.chi), &lam);
        Matrix::block_diag(f, &vec![mm; reps])
    };
    (sub_matrix(h, b.offset, b.offset, span, span) == expect).then_some(lam)
}

/// `C²(g)` (or the conformal variant) inside the ambient group of `st`, by
/// solving `h·f = z·f·h` over generators `f` of the (conformal) centralizer and
/// enumerating the solution spaces.
pub fn double_centralizer(
    st: &Structure,
    conformal: bool,
    budget: u64,
) -> Result<CentralizerReport> {
    let f = st.field.clone();
    let n = st.n();
    let z = st.z_group();
    let element = st.to_original(&st.g);
    let mut rep = CentralizerReport::new("double_centralizer", st, element, conformal);
    let t = st.stabilizer()?;
    rep.t = t.iter().map(|x| x.0).collect();
    rep.flagged = flagged_blocks(st);

    // generators, interleaved across blocks so that the solution space shrinks early
    let per_block = block_generators(st)?;
    let mut gens: Vec<Matrix> = Vec::new();
    let longest = per_block.iter().map(|(_, v, _)| v.len()).max().unwrap_or(0);
    for i in 0..longest {
        for (_, v, _) in &per_block {
            if let Some(m) = v.get(i) {
                gens.push(m.clone());
            }
        }
    }
    let mut phis = Vec::new();
    if conformal {
        for (x, phi) in t_action_maps(st, &t)? {
            if x != FieldElem::ONE {
                phis.push((x, phi.clone()));
                gens.push(phi);
            }
        }
    }
    let zs_for = |m: &Matrix| {
        if conformal {
            admissible(m, &z)
        } else {
            vec![FieldElem::ONE]
        }
    };
    let mut tagged: Vec<(Matrix, Vec<FieldElem>)> = gens
        .into_iter()
        .map(|m| {
            let a = zs_for(&m);
            (m, a)
        })
        .collect();
    tagged.sort_by_key(|(_, a)| a.len() > 1); // stable: single-z constraints first
    rep.generators = tagged.len() + 1;

    let mut branches: Vec<Vec<Matrix>> = Vec::new();
    for zz in zs_for(&st.g) {
        let b = commutant(&st.g, zz)?.basis;
        if !b.is_empty() {
            branches.push(b);
        }
    }
    for (m, zs) in &tagged {
        let mut next: Vec<Vec<Matrix>> = Vec::new();
        let mut seen: HashSet<Vec<Vector>> = HashSet::new();
        for b in &branches {
            for &zz in zs {
                let r = restrict(&f, b, m, zz);
                if r.is_empty() {
                    continue;
                }
                if seen.insert(canonical_span(&f, &r)) {
                    next.push(r);
                }
            }
        }
        branches = next;
    }

    // enumerate
    let mut seen: HashSet<Vec<FieldElem>> = HashSet::new();
    let mut elements: Vec<Matrix> = Vec::new();
    let total: u128 = branches
        .iter()
        .map(|b| (f.q() as u128).saturating_pow(b.len() as u32))
        .sum();
    if total > budget as u128 {
        let dims: Vec<String> = branches
            .iter()
            .map(|b| format!("{}^{}", f.q(), b.len()))
            .collect();
        return Err(Error::BudgetExceeded {
            needed: dims.join("+"),
            budget,
        });
    }
    for b in &branches {
        let checker = match &st.gram {
            Some(gram) => IsometryChecker::new(gram, st.sigma_power(), b),
            None => IsometryChecker::gl(&f, b),
        };
        for_each_combination_coeffs(&f, b, budget, |x| {
            if checker.check(x) {
                let h = combine(&f, b, x, n);
                if seen.insert(h.entries().to_vec()) {
                    elements.push(h);
                }
            }
        })?;
    }
    elements.sort_by(|a, b| {
        a.entries()
            .iter()
            .map(|x| x.0)
            .cmp(b.entries().iter().map(|x| x.0))
    });

    // sanity checks
    // abelian modulo Z: exact commutation of the spanning matrices suffices; otherwise
    // check commutators of the elements directly when there are few of them
    let exact = branches
        .iter()
        .flatten()
        .all(|a| branches.iter().flatten().all(|b| a.mul(b) == b.mul(a)));
    let abelian = exact
        || (elements.len() <= 500
            && elements.iter().all(|a| {
                let ai = a.inverse().expect("unit");
                elements.iter().all(|b| {
                    let c = ai.mul(&b.inverse().expect("unit")).mul(a).mul(b);
                    c.as_scalar().is_some_and(|s| z.contains(&s))
                })
            }));
    rep.abelian = Some(abelian);
    let contains_g = seen.contains(st.g.entries());
    let contains_z = z
        .iter()
        .all(|&x| seen.contains(Matrix::scalar(&f, n, x).entries()));
    rep.checks.insert("contains_g".into(), contains_g);
    rep.checks.insert("contains_Z".into(), contains_z);
    rep.checks.insert("abelian".into(), abelian);

    // λ-decomposition
    let mut block_scalar = true;
    let mut values: Vec<BTreeMap<Poly, ()>> = vec![BTreeMap::new(); st.blocks.len()];
    let mut lambdas: Vec<Vec<Poly>> = Vec::with_capacity(elements.len());
    for h in &elements {
        let mut row = Vec::with_capacity(st.blocks.len());
        for (bi, b) in st.blocks.iter().enumerate() {
            match lambda_of(st, b, h) {
                Some(l) => {
                    values[bi].insert(l.clone(), ());
                    row.push(l);
                }
                None => block_scalar = false,
            }
        }
        lambdas.push(row);
    }
    rep.block_scalar = block_scalar;
    rep.lambda = st
        .blocks
        .iter()
        .zip(&values)
        .map(|(b, v)| LambdaRow {
            chi: b.chi.to_csv(),
            block: b.kind,
            values: v.keys().map(coeff_list).collect(),
        })
        .collect();
    if block_scalar {
        rep.checks.insert(
            "self_dual_constraints".into(),
            self_dual_constraints_hold(st, &elements),
        );
        if let Some(ok) = coupling_holds(st, &t, &phis, &elements)? {
            rep.checks.insert("conformal_coupling".into(), ok);
        }
    }

    rep.element_count = Some(elements.len());
    rep.elements = Some(elements.iter().map(|h| st.to_original(h)).collect());
    if abelian {
        rep.exponent_mod_center = Some(if block_scalar {
            exponent_from_lambdas(st, &lambdas, &z)?
        } else {
            exponent_of(&elements, &z)?
        });
    }
    Ok(rep)
}

fn coeff_list(p: &Poly) -> String {
    let c: Vec<String> = p.coeffs().iter().map(|x| x.0.to_string()).collect();
    if c.is_empty() {
        "0".into()
    } else {
        c.join(",")
    }
}

/// Scalars on self-dual blocks satisfy the norm conditions of the form.
fn self_dual_constraints_hold(st: &Structure, elements: &[Matrix]) -> bool {
    let Some(kind) = st.kind else { return true };
    let f = &st.field;
    elements.iter().all(|h| {
        st.blocks.iter().all(|b| {
            let Some(lam) = lambda_of(st, b, h) else {
                return false;
            };
            let ring = QuotientRing::new(b.chi.clone());
            let exp = match (kind, b.kind) {
                (FormKind::Unitary, BlockKind::Scalar | BlockKind::SelfDual) => {
                    let q0 = f.p().pow(f.k() / 2);
                    q0.pow(b.deg as u32) + 1
                }
                (_, BlockKind::Scalar) => 2,
                (_, BlockKind::SelfDual) => f.q().pow(b.deg as u32 / 2) + 1,
                _ => return true,
            };
            ring.pow(&lam, exp).is_one()
        })
    })
}

/// The coupling `z^{l_χ} = λ_χ(h)^{Q−1}` where `h^{φ_t} = z·h` for a generator
/// `t` of `T`, `l_χ` is the orbit length and `x ↦ x^Q` is the automorphism of
/// `K_χ` induced by `t^{l_χ}`. `None` when `T` is trivial.
fn coupling_holds(
    st: &Structure,
    t: &[FieldElem],
    phis: &[(FieldElem, Matrix)],
    elements: &[Matrix],
) -> Result<Option<bool>> {
    if t.len() <= 1 {
        return Ok(None);
    }
    let f = &st.field;
    let gen = t
        .iter()
        .copied()
        .find(|&x| f.mult_order(x).is_ok_and(|o| o as usize == t.len()))
        .expect("T is cyclic");
    let phi = &phis
        .iter()
        .find(|(x, _)| *x == gen)
        .expect("φ for every t")
        .1;
    let phi_inv = phi.inverse()?;
    let mut ok = true;
    for h in elements {
        let conj = phi_inv.mul(h).mul(phi);
        let Some(zz) = conj.mul(&h.inverse()?).as_scalar() else {
            ok = false;
            continue;
        };
        for b in &st.blocks {
            let (orbit, _) = b.chi.orbit_stabilizer(t)?;
            let l = orbit.len() as u64;
            let ring = QuotientRing::new(b.chi.clone());
            let tl = f.pow(gen, l);
            let x = ring.gen();
            // the automorphism fixing the base field and sending X ↦ t^l·X  (roots of χ.t^{-l} …)
            let target = ring.reduce(&x.scale(tl));
            let mut qpow = 1u64;
            let mut img = x.clone();
            let mut j = 0;
            while img != target && j <= b.deg {
                img = ring.pow(&img, f.q());
                qpow = qpow.saturating_mul(f.q());
                j += 1;
            }
            if img != target {
                // the inverse orientation: X ↦ t^{−l}·X
                ok = false;
                continue;
            }
            let Some(lam) = lambda_of(st, b, h) else {
                ok = false;
                continue;
            };
            let lhs = ring.from_base(f.pow(zz, l));
            let rhs = ring.pow(&lam, qpow - 1);
            ok &= lhs == rhs;
        }
    }
    Ok(Some(ok))
}

/// The exponent modulo `Z` of block-scalar elements, read off their `λ_χ`:
/// `h^l ∈ Z·I` iff every `λ_χ^l` is the same `z ∈ Z`.
fn exponent_from_lambdas(st: &Structure, lambdas: &[Vec<Poly>], z: &[FieldElem]) -> Result<u64> {
    let rings: Vec<QuotientRing> = st
        .blocks
        .iter()
        .map(|b| QuotientRing::new(b.chi.clone()))
        .collect();
    let mut e = 1u64;
    for row in lambdas {
        let mut ord = 1u64;
        for (r, l) in rings.iter().zip(row) {
            ord = arith::lcm(ord, r.mult_order(l)?);
        }
        let mut best = ord;
        for d in arith::divisors(ord) {
            if d >= best {
                break;
            }
            let pw: Vec<Poly> = rings.iter().zip(row).map(|(r, l)| r.pow(l, d)).collect();
            let first = &pw[0];
            if first.deg() == 0 && z.contains(&first.coeff(0)) && pw.iter().all(|x| x == first) {
                best = d;
            }
        }
        e = arith::lcm(e, best);
    }
    Ok(e)
}

/// `min{l ≥ 1 : h^l ∈ Z·I}`.
pub fn order_mod_center(h: &Matrix, z: &[FieldElem]) -> Result<u64> {
    let ord = linalg::element_order(h)?;
    let mut best = ord;
    for d in arith::divisors(ord) {
        if d < best && h.pow(d).as_scalar().is_some_and(|s| z.contains(&s)) {
            best = d;
        }
    }
    Ok(best)
}

fn exponent_of(elements: &[Matrix], z: &[FieldElem]) -> Result<u64> {
    let mut e = 1u64;
    let mut done: HashSet<Vec<FieldElem>> = HashSet::new();
    for h in elements {
        if done.contains(h.entries()) {
            continue;
        }
        let l = order_mod_center(h, z)?;
        e = arith::lcm(e, l);
        // powers of h have orders dividing l: skip them
        let mut p = h.clone();
        for _ in 0..l.min(64) {
            done.insert(p.entries().to_vec());
            p = p.mul(h);
        }
    }
    Ok(e)
}

/// `lcm_h min{l : h^l ∈ Z·I}` over the report's elements.
pub fn exponent_mod_center(report: &CentralizerReport, z: &[FieldElem]) -> Result<u64> {
    let els = report.elements.as_ref().ok_or(Error::NotEnumerated)?;
    let abelian = match report.abelian {
        Some(a) => a,
        None => {
            if els.len() > 400 {
                return Err(Error::NotEnumerated);
            }
            els.iter().all(|a| els.iter().all(|b| a.mul(b) == b.mul(a)))
        }
    };
    if !abelian {
        return Err(Error::NotAbelian);
    }
    exponent_of(els, z)
}

/// Convenience: double centralizer of a semisimple `g ∈ GL_n`.
pub fn double_centralizer_gl(
    g: &Matrix,
    conformal: bool,
    budget: u64,
) -> Result<CentralizerReport> {
    double_centralizer(&structure_gl(g)?, conformal, budget)
}

/// Convenience: double centralizer of a semisimple isometry (on a realized conjugate).
pub fn double_centralizer_isometry(
    elem: &IsometryElement,
    conformal: bool,
    budget: u64,
) -> Result<CentralizerReport> {
    double_centralizer(&structure_of_isometry(elem)?, conformal, budget)
}

/// A semisimple tuple from `(χ, c_χ)` pairs.
pub fn tuple_from(n: usize, entries: &[(Poly, usize)]) -> InvariantTuple {
    let mut t = InvariantTuple::new(n);
    for (p, c) in entries {
        t.insert(p.clone(), 1, *c);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::make_field;
    use crate::forms::{realize_isometry, standard_form};

    fn closure(gens: &[Matrix], cap: usize) -> usize {
        let mut seen: HashSet<Vec<FieldElem>> = HashSet::new();
        let id = Matrix::identity(gens[0].field(), gens[0].n());
        let mut frontier = vec![id.clone()];
        seen.insert(id.entries().to_vec());
        while let Some(x) = frontier.pop() {
            for g in gens {
                let y = x.mul(g);
                if seen.insert(y.entries().to_vec()) {
                    assert!(seen.len() <= cap, "closure exceeded {cap}");
                    frontier.push(y);
                }
            }
        }
        seen.len()
    }

    #[test]
    fn commutant_examples() {
        let f3 = make_field(3, 1).unwrap();
        assert_eq!(
            commutant(&Matrix::identity(&f3, 3), FieldElem::ONE)
                .unwrap()
                .dim(),
            9
        );
        let g = Matrix::from_codes(&f3, &[&[1, 0], &[0, 2]]);
        let c = commutant(&g, FieldElem::ONE).unwrap();
        assert_eq!(c.dim(), 2);
        assert!(c.is_algebra());
        assert!(c
            .basis
            .iter()
            .all(|b| b.get(0, 1).is_zero() && b.get(1, 0).is_zero()));
        let tw = commutant(&g, FieldElem(2)).unwrap();
        assert_eq!(tw.dim(), 2);
        for b in &tw.basis {
            assert!(b.get(0, 0).is_zero() && b.get(1, 1).is_zero());
            // gX = 2⁻¹·X·g
            assert_eq!(g.mul(b), b.mul(&g).scale(f3.inv(FieldElem(2))));
        }
    }

    #[test]
    fn commutant_dimension_formula() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (p, k) in [(2, 1), (3, 1), (2, 2)] {
            let f = make_field(p, k).unwrap();
            for _ in 0..6 {
                let n = rand::Rng::gen_range(&mut rng, 1..=7);
                // random semisimple tuple from irreducibles of degree ≤ 3
                let mut pool = Vec::new();
                for d in 1..=3 {
                    pool.extend(
                        poly::irreducibles(&f, d)
                            .unwrap()
                            .into_iter()
                            .filter(|x| !x.coeff(0).is_zero()),
                    );
                }
                let mut left = n;
                let mut t = InvariantTuple::new(n);
                let mut used = HashSet::new();
                while left > 0 {
                    let chi = &pool[rand::Rng::gen_range(&mut rng, 0..pool.len())];
                    if chi.deg() > left || !used.insert(chi.clone()) {
                        if pool.iter().all(|x| x.deg() > left || used.contains(x)) {
                            break;
                        }
                        continue;
                    }
                    let c = left / chi.deg();
                    let c = rand::Rng::gen_range(&mut rng, 1..=c);
                    t.insert(chi.clone(), 1, c);
                    left -= c * chi.deg();
                }
                if left > 0 {
                    continue;
                }
                let g = linalg::realize_invariant(&f, n, &t).unwrap();
                let want: usize = t.entries.iter().map(|(k, &c)| c * c * k.irr.deg()).sum();
                assert_eq!(commutant(&g, FieldElem::ONE).unwrap().dim(), want);
            }
        }
    }

    #[test]
    fn gl_centralizer_examples() {
        let f2 = make_field(2, 1).unwrap();
        let phi3 = Poly::from_codes(&f2, &[1, 1, 1]);
        let g = Matrix::block_diag(&f2, &[Matrix::companion(&phi3), Matrix::identity(&f2, 1)]);
        let r = centralizer_in_gl(&g, true, DEFAULT_MAX_ENUM).unwrap();
        assert_eq!(r.order.as_deref(), Some("3"));
        assert_eq!(r.element_count, Some(3));
        assert!(r.all_checks_pass());
        let r = centralizer_in_gl(&Matrix::identity(&f2, 2), true, DEFAULT_MAX_ENUM).unwrap();
        assert_eq!(r.order.as_deref(), Some("6"));
        let f3 = make_field(3, 1).unwrap();
        let r = centralizer_in_gl(
            &Matrix::from_codes(&f3, &[&[1, 0], &[0, 2]]),
            true,
            DEFAULT_MAX_ENUM,
        )
        .unwrap();
        assert_eq!(r.element_count, Some(4));
        assert!(r.all_checks_pass());
    }

    #[test]
    fn block_generators_generate() {
        // closure of the structural generators has the formula order
        let cases: Vec<(FormKind, u64, u32, usize)> = vec![
            (FormKind::Symplectic, 3, 1, 2),
            (FormKind::Symplectic, 2, 1, 4),
            (FormKind::Unitary, 2, 2, 2),
            (FormKind::Unitary, 2, 2, 3),
            (FormKind::Unitary, 3, 2, 2),
            (FormKind::OrthogonalPlus, 3, 1, 2),
            (FormKind::OrthogonalMinus, 3, 1, 2),
            (FormKind::OrthogonalOdd, 3, 1, 3),
        ];
        for (kind, p, k, n) in cases {
            let f = make_field(p, k).unwrap();
            let form = standard_form(kind, &f, n).unwrap();
            let r = realize_isometry(&form, &linalg::invariant_tuple(&Matrix::identity(&f, n)))
                .unwrap();
            let st = structure_of_realization(&r).unwrap();
            let gens = block_generators(&st).unwrap();
            let all: Vec<Matrix> = gens.iter().flat_map(|(_, v, _)| v.clone()).collect();
            let want = form.group_order();
            let got = closure(&all, 200_000);
            assert_eq!(BigUint::from(got), want, "{kind} over {f} n={n}");
        }
        // self-dual blocks: U_1 and U_2 over K
        let f3 = make_field(3, 1).unwrap();
        let form = standard_form(FormKind::Symplectic, &f3, 4).unwrap();
        let x2p1 = Poly::from_codes(&f3, &[1, 0, 1]);
        let r = realize_isometry(&form, &tuple_from(4, &[(x2p1, 2)])).unwrap();
        let st = structure_of_realization(&r).unwrap();
        let gens = block_generators(&st).unwrap();
        let all: Vec<Matrix> = gens.iter().flat_map(|(_, v, _)| v.clone()).collect();
        // GU_2(3) has order 96
        assert_eq!(closure(&all, 10_000), 96);
        assert_eq!(gens[0].2, BigUint::from(96u32));
    }

    #[test]
    fn isometry_centralizer_examples() {
        let f3 = make_field(3, 1).unwrap();
        let form = standard_form(FormKind::Symplectic, &f3, 6).unwrap();
        // diag(1,1,−1,−1,−1,−1) up to conjugacy: realize from the tuple
        let mut t = InvariantTuple::new(6);
        t.insert(Poly::linear(&f3, FieldElem(1)), 1, 2);
        t.insert(Poly::linear(&f3, FieldElem(2)), 1, 4);
        let r = realize_isometry(&form, &t).unwrap();
        let rep = centralizer_in_isometry(&r.element, false, false, DEFAULT_MAX_ENUM).unwrap();
        assert_eq!(
            rep.order.as_deref(),
            Some((24u64 * 51840).to_string().as_str())
        );
        assert!(rep.all_checks_pass());

        let form2 = standard_form(FormKind::Symplectic, &f3, 2).unwrap();
        let g = Matrix::from_codes(&f3, &[&[0, 1], &[2, 0]]);
        let e = IsometryElement::new(form2, g).unwrap();
        let rep = centralizer_in_isometry(&e, true, true, DEFAULT_MAX_ENUM).unwrap();
        assert!(rep.by_mu.iter().any(|&(mu, c)| mu == 2 && c > 0));
        assert!(rep.all_checks_pass(), "{:?}", rep.checks);
        let id = IsometryElement::new(
            standard_form(FormKind::Symplectic, &f3, 2).unwrap(),
            Matrix::identity(&f3, 2),
        )
        .unwrap();
        let rep = centralizer_in_isometry(&id, false, true, DEFAULT_MAX_ENUM).unwrap();
        assert_eq!(rep.element_count, Some(24));
    }

    #[test]
    fn double_centralizer_examples() {
        let f2 = make_field(2, 1).unwrap();
        let phi3 = Poly::from_codes(&f2, &[1, 1, 1]);
        let g = Matrix::block_diag(&f2, &[Matrix::companion(&phi3), Matrix::identity(&f2, 1)]);
        let r = double_centralizer_gl(&g, true, DEFAULT_MAX_ENUM).unwrap();
        assert_eq!(r.element_count, Some(3));
        assert_eq!(r.exponent_mod_center, Some(3));
        assert!(r.all_checks_pass(), "{:?}", r.checks);
        // brute force: elements of GL_3(2) commuting with the centralizer
        let cent = centralizer_in_gl(&g, true, DEFAULT_MAX_ENUM)
            .unwrap()
            .elements
            .unwrap();
        let all = commutant(&Matrix::identity(&f2, 3), FieldElem::ONE)
            .unwrap()
            .elements(1 << 10)
            .unwrap();
        let brute = all
            .iter()
            .filter(|h| !h.det().is_zero() && cent.iter().all(|c| c.mul(h) == h.mul(c)))
            .count();
        assert_eq!(brute, 3);

        let r = double_centralizer_gl(&Matrix::identity(&f2, 2), true, DEFAULT_MAX_ENUM).unwrap();
        assert_eq!(r.element_count, Some(1));

        let f3 = make_field(3, 1).unwrap();
        let form = standard_form(FormKind::Symplectic, &f3, 6).unwrap();
        let mut t = InvariantTuple::new(6);
        t.insert(Poly::linear(&f3, FieldElem(1)), 1, 2);
        t.insert(Poly::linear(&f3, FieldElem(2)), 1, 4);
        let real = realize_isometry(&form, &t).unwrap();
        let st = structure_of_realization(&real).unwrap();
        let r = double_centralizer(&st, true, DEFAULT_MAX_ENUM).unwrap();
        assert_eq!(r.element_count, Some(4));
        assert_eq!(r.exponent_mod_center, Some(2));
        assert!(r.all_checks_pass(), "{:?}", r.checks);
        let els = r.elements.clone().unwrap();
        assert!(els.iter().all(|h| form.is_isometry(h).unwrap()));
        assert_eq!(
            exponent_mod_center(&r, &[FieldElem(1), FieldElem(2)]).unwrap(),
            2
        );
    }

    #[test]
    fn exponent_trivial() {
        let f2 = make_field(2, 1).unwrap();
        let st = structure_gl(&Matrix::identity(&f2, 1)).unwrap();
        let mut rep =
            CentralizerReport::new("double_centralizer", &st, Matrix::identity(&f2, 1), false);
        assert_eq!(
            exponent_mod_center(&rep, &[FieldElem::ONE]),
            Err(Error::NotEnumerated)
        );
        rep.elements = Some(vec![Matrix::identity(&f2, 1)]);
        assert_eq!(exponent_mod_center(&rep, &[FieldElem::ONE]).unwrap(), 1);
    }

    #[test]
    fn t_action_gl_swap() {
        let f3 = make_field(3, 1).unwrap();
        let x2p1 = Poly::from_codes(&f3, &[1, 0, 1]);
        let g = Matrix::block_diag(
            &f3,
            &[
                Matrix::diag(&f3, &[FieldElem(1), FieldElem(2)]),
                Matrix::companion(&x2p1),
            ],
        );
        let st = structure_gl(&g).unwrap();
        let t = st.stabilizer().unwrap();
        assert_eq!(t, vec![FieldElem(1), FieldElem(2)]);
        let maps = t_action_maps(&st, &t).unwrap();
        let (_, phi) = &maps[1];
        assert_eq!(
            phi.inverse().unwrap().mul(&st.g).mul(phi),
            st.g.scale(FieldElem(2))
        );
        assert!(maps[0].1.mul(&st.g) == st.g.mul(&maps[0].1));
        // φ·φ agrees with φ_1 up to C(g)
        let sq = phi.mul(phi);
        assert_eq!(sq.mul(&st.g), st.g.mul(&sq));
        assert_eq!(t_action_maps(&st, &[FieldElem(1)]).unwrap().len(), 1);
    }

    #[test]
    fn t_action_unitary_three_blocks() {
        let f4 = make_field(2, 2).unwrap();
        let form = standard_form(FormKind::Unitary, &f4, 3).unwrap();
        let mut t = InvariantTuple::new(3);
        for r in [1, 2, 3] {
            t.insert(Poly::linear(&f4, FieldElem(r)), 1, 1);
        }
        let real = realize_isometry(&form, &t).unwrap();
        let st = structure_of_realization(&real).unwrap();
        let tt = st.stabilizer().unwrap();
        assert_eq!(tt.len(), 3);
        let maps = t_action_maps(&st, &tt).unwrap();
        for (x, phi) in &maps {
            assert_eq!(phi.inverse().unwrap().mul(&st.g).mul(phi), st.g.scale(*x));
            assert!(st.is_isometry(phi));
        }
        for (a, pa) in &maps {
            for (b, pb) in &maps {
                let ab = f4.mul(*a, *b);
                let pab = &maps.iter().find(|(x, _)| *x == ab).unwrap().1;
                let c = pab.inverse().unwrap().mul(&pa.mul(pb));
                assert_eq!(c.mul(&st.g), st.g.mul(&c), "cocycle up to C(g)");
            }
        }
        // conformal double centralizer with nontrivial T: coupling holds
        let r = double_centralizer(&st, true, DEFAULT_MAX_ENUM).unwrap();
        assert!(r.all_checks_pass(), "{:?}", r.checks);
    }

    #[test]
    fn twisted_symplectic_conformal_double_centralizer() {
        // g of order 4 in Sp_2(3): T = {±1}
        let f3 = make_field(3, 1).unwrap();
        let form = standard_form(FormKind::Symplectic, &f3, 2).unwrap();
        let e = IsometryElement::new(form, Matrix::from_codes(&f3, &[&[0, 1], &[2, 0]])).unwrap();
        let st = structure_of_isometry(&e).unwrap();
        assert_eq!(st.stabilizer().unwrap().len(), 2);
        let r = double_centralizer(&st, true, DEFAULT_MAX_ENUM).unwrap();
        assert!(r.all_checks_pass(), "{:?}", r.checks);
        // Q8 ⊂ SL_2(3): abelian only modulo ±1, and φ_{−1} is not block-scalar
        assert_eq!(r.element_count, Some(8));
        assert!(!r.block_scalar);
        assert_eq!(r.exponent_mod_center, Some(2));
    }
}
