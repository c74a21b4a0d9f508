//! Univariate polynomials over finite fields.
//!
//! `Poly` carries arbitrary (not necessarily monic) polynomials so that
//! remainders and gcds can be represented; the public operations that the
//! rest of the crate consumes (`factor`, `dual`, `scalar_act`, …) take and
//! return monic ones.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith;
use crate::error::{Error, Result};
use crate::ff::{Field, FieldElem, MAX_ENUM_FIELD_SIZE};

#[derive(Clone)]
pub struct Poly {
    field: Field,
    coeffs: Vec<FieldElem>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && *self.field == *other.field
    }
}

impl Eq for Poly {}

impl std::hash::Hash for Poly {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

/// Canonical order: degree first, then the coefficient vector (constant first).
impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.cmp(&other.coeffs))
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({})", self.field, self)
    }
}

fn superscript(n: usize) -> String {
    const SUP: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string()
        .chars()
        .map(|c| SUP[c.to_digit(10).unwrap() as usize])
        .collect()
}

/// Pretty form such as `X²+2X+1`; coefficients print as their field codes.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for i in (0..self.coeffs.len()).rev() {
            let c = self.coeffs[i];
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            let coef = if c == FieldElem::ONE && i > 0 {
                String::new()
            } else {
                c.0.to_string()
            };
            match i {
                0 => write!(f, "{coef}")?,
                1 => write!(f, "{coef}X")?,
                _ => write!(f, "{coef}X{}", superscript(i))?,
            }
        }
        Ok(())
    }
}

impl Poly {
    /// Builds a polynomial, trimming high zero coefficients.
    pub fn new(field: Field, mut coeffs: Vec<FieldElem>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { field, coeffs }
    }

    pub fn from_codes(field: &Field, codes: &[u64]) -> Self {
        Poly::new(field.clone(), codes.iter().map(|&c| FieldElem(c)).collect())
    }

    pub fn zero(field: &Field) -> Self {
        Poly {
            field: field.clone(),
            coeffs: vec![],
        }
    }

    pub fn one(field: &Field) -> Self {
        Poly::constant(field, FieldElem::ONE)
    }

    pub fn x(field: &Field) -> Self {
        Poly::new(field.clone(), vec![FieldElem::ZERO, FieldElem::ONE])
    }

    pub fn constant(field: &Field, c: FieldElem) -> Self {
        Poly::new(field.clone(), vec![c])
    }

    /// `X − λ`.
    pub fn linear(field: &Field, root: FieldElem) -> Self {
        Poly::new(field.clone(), vec![field.neg(root), FieldElem::ONE])
    }

    pub fn monomial(field: &Field, c: FieldElem, deg: usize) -> Self {
        let mut v = vec![FieldElem::ZERO; deg + 1];
        v[deg] = c;
        Poly::new(field.clone(), v)
    }

    /// Parses the comma-separated code list (constant first). The result must be monic.
    pub fn parse_csv(field: &Field, s: &str) -> Result<Self> {
        let mut codes = Vec::new();
        let mut col = 1;
        for tok in s.split(',') {
            let t = tok.trim();
            let c: u64 = t
                .parse()
                .map_err(|_| Error::parse(1, col, format!("bad coefficient {t:?}")))?;
            if c >= field.q() {
                return Err(Error::parse(
                    1,
                    col,
                    format!("coefficient {c} not below q = {}", field.q()),
                ));
            }
            codes.push(c);
            col += tok.len() + 1;
        }
        let p = Poly::from_codes(field, &codes);
        if p.is_zero() || !p.is_monic() {
            return Err(Error::parse(1, 1, "polynomial must be monic"));
        }
        Ok(p)
    }

    pub fn to_csv(&self) -> String {
        self.coeffs
            .iter()
            .map(|c| c.0.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> FieldElem {
        self.coeffs.get(i).copied().unwrap_or(FieldElem::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn deg(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn lead(&self) -> FieldElem {
        self.coeffs.last().copied().unwrap_or(FieldElem::ZERO)
    }

    pub fn is_monic(&self) -> bool {
        self.lead() == FieldElem::ONE
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == FieldElem::ONE
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() || self.is_monic() {
            return self.clone();
        }
        self.scale(self.field.inv(self.lead()))
    }

    pub fn scale(&self, c: FieldElem) -> Poly {
        let f = &self.field;
        Poly::new(
            f.clone(),
            self.coeffs.iter().map(|&a| f.mul(a, c)).collect(),
        )
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let f = &self.field;
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new(
            f.clone(),
            (0..n).map(|i| f.add(self.coeff(i), o.coeff(i))).collect(),
        )
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let f = &self.field;
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new(
            f.clone(),
            (0..n).map(|i| f.sub(self.coeff(i), o.coeff(i))).collect(),
        )
    }

    pub fn neg(&self) -> Poly {
        let f = &self.field;
        Poly::new(f.clone(), self.coeffs.iter().map(|&a| f.neg(a)).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero(&self.field);
        }
        let f = &self.field;
        let mut r = vec![FieldElem::ZERO; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in o.coeffs.iter().enumerate() {
                r[i + j] = f.add(r[i + j], f.mul(a, b));
            }
        }
        Poly::new(f.clone(), r)
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut r = Poly::one(&self.field);
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let f = &self.field;
        if self.coeffs.len() < d.coeffs.len() {
            return (Poly::zero(f), self.clone());
        }
        let mut r = self.coeffs.clone();
        let dl = d.coeffs.len();
        let inv_lead = f.inv(d.lead());
        let mut qv = vec![FieldElem::ZERO; r.len() - dl + 1];
        for i in (0..qv.len()).rev() {
            let c = f.mul(r[i + dl - 1], inv_lead);
            qv[i] = c;
            if c.is_zero() {
                continue;
            }
            for (j, &b) in d.coeffs.iter().enumerate() {
                r[i + j] = f.sub(r[i + j], f.mul(c, b));
            }
        }
        r.truncate(dl - 1);
        (Poly::new(f.clone(), qv), Poly::new(f.clone(), r))
    }

    pub fn rem(&self, d: &Poly) -> Poly {
        self.divrem(d).1
    }

    /// Exact quotient (debug-asserts divisibility).
    pub fn div_exact(&self, d: &Poly) -> Poly {
        let (q, r) = self.divrem(d);
        debug_assert!(r.is_zero(), "{self} not divisible by {d}");
        q
    }

    pub fn divides(&self, o: &Poly) -> bool {
        o.rem(self).is_zero()
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Returns `(g, s, t)` with `s·self + t·o = g = gcd`.
    pub fn xgcd(&self, o: &Poly) -> (Poly, Poly, Poly) {
        let fld = &self.field;
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (Poly::one(fld), Poly::zero(fld));
        let (mut t0, mut t1) = (Poly::zero(fld), Poly::one(fld));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s = s0.sub(&q.mul(&s1));
            s0 = std::mem::replace(&mut s1, s);
            let t = t0.sub(&q.mul(&t1));
            t0 = std::mem::replace(&mut t1, t);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let c = fld.inv(r0.lead());
        (r0.scale(c), s0.scale(c), t0.scale(c))
    }

    pub fn derivative(&self) -> Poly {
        let f = &self.field;
        Poly::new(
            f.clone(),
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| f.mul(f.from_int((i as u64 % f.p()) as i64), c))
                .collect(),
        )
    }

    pub fn eval(&self, x: FieldElem) -> FieldElem {
        let f = &self.field;
        self.coeffs
            .iter()
            .rev()
            .fold(FieldElem::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// Applies `x ↦ x^(p^j)` to every coefficient.
    pub fn map_frobenius(&self, j: u32) -> Poly {
        let f = &self.field;
        Poly::new(
            f.clone(),
            self.coeffs.iter().map(|&c| f.frobenius(c, j)).collect(),
        )
    }

    pub fn mulmod(&self, o: &Poly, m: &Poly) -> Poly {
        self.mul(o).rem(m)
    }

    pub fn powmod(&self, mut e: u64, m: &Poly) -> Poly {
        let mut base = self.rem(m);
        let mut r = Poly::one(&self.field).rem(m);
        while e > 0 {
            if e & 1 == 1 {
                r = r.mulmod(&base, m);
            }
            base = base.mulmod(&base, m);
            e >>= 1;
        }
        r
    }

    pub fn powmod_big(&self, e: &BigUint, m: &Poly) -> Poly {
        let mut r = Poly::one(&self.field).rem(m);
        let base = self.rem(m);
        for i in (0..e.bits()).rev() {
            r = r.mulmod(&r, m);
            if e.bit(i) {
                r = r.mulmod(&base, m);
            }
        }
        r
    }

    /// Coefficient-wise p-th root of a polynomial in `X^p`.
    fn pth_root(&self) -> Poly {
        let f = &self.field;
        let p = f.p() as usize;
        let k = f.k();
        let v: Vec<FieldElem> = self
            .coeffs
            .iter()
            .step_by(p)
            .map(|&c| f.frobenius(c, k - 1))
            .collect();
        Poly::new(f.clone(), v)
    }

    fn squarefree_parts(&self) -> Vec<(Poly, u32)> {
        let mut out = Vec::new();
        let d = self.derivative();
        let mut c = self.gcd(&d);
        let mut w = self.div_exact(&c);
        let mut i = 1;
        while !w.is_one() {
            let y = w.gcd(&c);
            let z = w.div_exact(&y);
            if !z.is_one() {
                out.push((z, i));
            }
            i += 1;
            w = y;
            c = c.div_exact(&w);
        }
        if !c.is_one() {
            let p = self.field.p() as u32;
            for (g, m) in c.pth_root().squarefree_parts() {
                out.push((g, m * p));
            }
        }
        out
    }

    /// `X^(q^d) mod self`, for d = 1, 2, … as needed.
    fn frobenius_powers_x(&self) -> impl Iterator<Item = Poly> + '_ {
        let q = self.field.q();
        let mut h = Poly::x(&self.field).rem(self);
        std::iter::from_fn(move || {
            h = h.powmod(q, self);
            Some(h.clone())
        })
    }

    fn distinct_degree(&self) -> Vec<(Poly, usize)> {
        let mut out = Vec::new();
        let mut g = self.clone();
        let x = Poly::x(&self.field);
        let mut h = x.clone();
        let q = self.field.q();
        let mut d = 0;
        while g.deg() >= 2 * (d + 1) {
            d += 1;
            h = h.powmod(q, &g);
            let fac = g.gcd(&h.sub(&x));
            if !fac.is_one() {
                g = g.div_exact(&fac);
                h = h.rem(&g);
                out.push((fac, d));
            }
        }
        if g.deg() > 0 {
            let dg = g.deg();
            out.push((g, dg));
        }
        out
    }

    fn seed(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ self.field.q();
        for c in &self.coeffs {
            h ^= c.0;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }

    fn equal_degree(&self, d: usize, rng: &mut ChaCha8Rng, out: &mut Vec<Poly>) {
        let n = self.deg();
        if n == d {
            out.push(self.clone());
            return;
        }
        let fld = &self.field;
        let q = fld.q();
        loop {
            let a = Poly::new(
                fld.clone(),
                (0..n).map(|_| FieldElem(rng.gen_range(0..q))).collect(),
            );
            if a.is_constant() {
                continue;
            }
            let t = if fld.p() == 2 {
                // absolute trace map to GF(2)
                let mut t = a.rem(self);
                let mut s = t.clone();
                for _ in 1..(fld.k() as usize * d) {
                    s = s.mulmod(&s, self);
                    t = t.add(&s);
                }
                t
            } else {
                // a^((q^d − 1)/2) = (a^(1+q+…+q^(d−1)))^((q−1)/2)
                let mut b = a.rem(self);
                let mut acc = b.clone();
                for _ in 1..d {
                    b = b.powmod(q, self);
                    acc = acc.mulmod(&b, self);
                }
                acc.powmod((q - 1) / 2, self).sub(&Poly::one(fld))
            };
            let g = self.gcd(&t);
            if !g.is_constant() && g.deg() < n {
                let h = self.div_exact(&g);
                g.equal_degree(d, rng, out);
                h.equal_degree(d, rng, out);
                return;
            }
        }
    }

    /// Complete factorization into monic irreducibles with multiplicities.
    pub fn factor(&self) -> Result<PrimaryFactorization> {
        if self.is_constant() {
            return Err(Error::ConstantPolynomial);
        }
        let f = self.monic();
        let mut rng = ChaCha8Rng::seed_from_u64(f.seed());
        let mut acc: BTreeMap<Poly, u32> = BTreeMap::new();
        for (sf, mult) in f.squarefree_parts() {
            for (part, d) in sf.distinct_degree() {
                let mut pieces = Vec::new();
                part.equal_degree(d, &mut rng, &mut pieces);
                for pc in pieces {
                    *acc.entry(pc).or_insert(0) += mult;
                }
            }
        }
        Ok(PrimaryFactorization {
            factors: acc.into_iter().collect(),
        })
    }

    /// Rabin's test.
    pub fn is_irreducible(&self) -> Result<bool> {
        if self.is_constant() {
            return Err(Error::ConstantPolynomial);
        }
        let f = self.monic();
        let n = f.deg();
        if n == 1 {
            return Ok(true);
        }
        if f.coeff(0).is_zero() {
            return Ok(false);
        }
        let x = Poly::x(&f.field);
        let pows: Vec<Poly> = f.frobenius_powers_x().take(n).collect();
        if pows[n - 1] != x.rem(&f) {
            return Ok(false);
        }
        for (r, _) in arith::factorize(n as u64) {
            let h = &pows[n / r as usize - 1];
            if !f.gcd(&h.sub(&x)).is_one() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Distinct roots in the field, ascending by code.
    pub fn roots(&self) -> Result<Vec<FieldElem>> {
        if self.is_zero() {
            return Err(Error::ConstantPolynomial);
        }
        if self.is_constant() {
            return Ok(vec![]);
        }
        let f = self.monic();
        let x = Poly::x(&f.field);
        let xq = x.powmod(f.field.q(), &f);
        let g = f.gcd(&xq.sub(&x));
        if g.is_constant() {
            return Ok(vec![]);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(g.seed());
        let mut lin = Vec::new();
        g.equal_degree(1, &mut rng, &mut lin);
        let mut r: Vec<FieldElem> = lin.iter().map(|l| f.field.neg(l.coeff(0))).collect();
        r.sort();
        Ok(r)
    }

    /// The σ-dual `χ* = a_0^{−σ} X^{deg χ} χ^σ(X^{−1})`; `sigma_power = 1`
    /// uses the involution of a field of even degree.
    pub fn dual(&self, sigma_power: u32) -> Result<Poly> {
        let f = &self.field;
        let a0 = self.coeff(0);
        if a0.is_zero() {
            return Err(Error::ZeroConstantTerm);
        }
        let sigma = sigma_fn(f, sigma_power)?;
        let scale = f.inv(sigma(a0));
        let rev: Vec<FieldElem> = self
            .coeffs
            .iter()
            .rev()
            .map(|&c| f.mul(scale, sigma(c)))
            .collect();
        Ok(Poly::new(f.clone(), rev))
    }

    /// `f.z = z^{−deg f} f(zX)`.
    pub fn scalar_act(&self, z: FieldElem) -> Result<Poly> {
        if z.is_zero() {
            return Err(Error::ZeroScalar);
        }
        let f = &self.field;
        let n = self.deg() as i64;
        Ok(Poly::new(
            f.clone(),
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| f.mul(c, f.pow_i(z, i as i64 - n)))
                .collect(),
        ))
    }

    /// Checks `(f.z)* = f*.z` for `z` with `z^σ = z^{−1}`.
    pub fn dual_commutes_check(&self, z: FieldElem, sigma_power: u32) -> Result<bool> {
        let f = &self.field;
        if z.is_zero() {
            return Err(Error::NotInZ);
        }
        let sigma = sigma_fn(f, sigma_power)?;
        if sigma(z) != f.inv(z) {
            return Err(Error::NotInZ);
        }
        Ok(self.scalar_act(z)?.dual(sigma_power)? == self.dual(sigma_power)?.scalar_act(z)?)
    }

    pub fn is_self_dual(&self, sigma_power: u32) -> Result<bool> {
        Ok(self.dual(sigma_power)? == *self)
    }

    /// Orbit under `Z` (sorted) and the stabilizer (ascending codes).
    pub fn orbit_stabilizer(&self, z: &[FieldElem]) -> Result<(Vec<Poly>, Vec<FieldElem>)> {
        check_subgroup(&self.field, z)?;
        let mut orbit = Vec::new();
        let mut stab = Vec::new();
        for &w in z {
            let g = self.scalar_act(w)?;
            if g == *self {
                stab.push(w);
            }
            orbit.push(g);
        }
        orbit.sort();
        orbit.dedup();
        stab.sort();
        Ok((orbit, stab))
    }
}

fn sigma_fn(f: &Field, sigma_power: u32) -> Result<impl Fn(FieldElem) -> FieldElem + '_> {
    match sigma_power {
        0 => Ok(Box::new(|x| x) as Box<dyn Fn(FieldElem) -> FieldElem>),
        1 if f.k().is_multiple_of(2) => {
            Ok(Box::new(move |x| f.involution(x)) as Box<dyn Fn(FieldElem) -> FieldElem>)
        }
        _ => Err(Error::BadParity(format!(
            "σ-power {sigma_power} needs an even-degree field, got {}",
            f
        ))),
    }
}

/// Checks that `z` is a finite subgroup of `field^×` (nonempty, closed under multiplication).
pub fn check_subgroup(field: &Field, z: &[FieldElem]) -> Result<()> {
    if z.is_empty() || z.iter().any(|x| x.is_zero() || !field.contains(*x)) {
        return Err(Error::NotASubgroup);
    }
    let set: std::collections::HashSet<_> = z.iter().copied().collect();
    for &a in z {
        for &b in z {
            if !set.contains(&field.mul(a, b)) {
                return Err(Error::NotASubgroup);
            }
        }
    }
    Ok(())
}

/// The cyclic subgroup of `field^×` of order `d` (requires `d | q − 1`).
pub fn cyclic_subgroup(field: &Field, d: u64) -> Result<Vec<FieldElem>> {
    if d == 0 || !(field.q() - 1).is_multiple_of(d) {
        return Err(Error::NotASubgroup);
    }
    let g = field.pow(field.primitive_element(), (field.q() - 1) / d);
    let mut v = Vec::with_capacity(d as usize);
    let mut x = FieldElem::ONE;
    for _ in 0..d {
        v.push(x);
        x = field.mul(x, g);
    }
    v.sort();
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimaryFactorization {
    pub factors: Vec<(Poly, u32)>,
}

impl PrimaryFactorization {
    pub fn product(&self, field: &Field) -> Poly {
        self.factors
            .iter()
            .fold(Poly::one(field), |acc, (f, e)| acc.mul(&f.pow(*e)))
    }
}

impl fmt::Display for PrimaryFactorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(p, e)| format!("({p})^{e}"))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Irreducible monic divisors of `X^o − μ`, canonically sorted.
pub fn divisors_of_cyclotomic(field: &Field, o: u64, mu: FieldElem) -> Result<Vec<Poly>> {
    if mu.is_zero() {
        return Err(Error::ZeroScalar);
    }
    if o == 0 || o.is_multiple_of(field.p()) {
        return Err(Error::OrderDivisibleByP { o, p: field.p() });
    }
    let mut c = vec![FieldElem::ZERO; o as usize + 1];
    c[0] = field.neg(mu);
    c[o as usize] = FieldElem::ONE;
    let f = Poly::new(field.clone(), c);
    Ok(f.factor()?.factors.into_iter().map(|(p, _)| p).collect())
}

/// All monic irreducibles of degree `d`, canonically sorted (exhaustive; small cases only).
pub fn irreducibles(field: &Field, d: usize) -> Result<Vec<Poly>> {
    let q = field.q();
    let total = (q as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if total > MAX_ENUM_FIELD_SIZE as u128 {
        return Err(Error::BudgetExceeded {
            needed: total.to_string(),
            budget: MAX_ENUM_FIELD_SIZE,
        });
    }
    let mut out = Vec::new();
    for v in 0..total as u64 {
        let mut coeffs = Vec::with_capacity(d + 1);
        let mut x = v;
        for _ in 0..d {
            coeffs.push(FieldElem(x % q));
            x /= q;
        }
        coeffs.push(FieldElem::ONE);
        let p = Poly::new(field.clone(), coeffs);
        if p.is_irreducible()? {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

/// Number of monic irreducibles of degree `d` over GF(q): `(1/d) Σ_{e|d} μ(d/e) q^e`.
pub fn necklace_count(q: u64, d: u64) -> u128 {
    let mut s: i128 = 0;
    for e in arith::divisors(d) {
        s += arith::mobius(d / e) as i128 * (q as i128).pow(e as u32);
    }
    (s / d as i128) as u128
}

/// The ring `k[X]/(χ)`, a field when χ is irreducible. Elements are
/// reduced polynomials.
#[derive(Clone, Debug)]
pub struct QuotientRing {
    modulus: Poly,
    trace_basis: Vec<FieldElem>,
}

impl QuotientRing {
    pub fn new(modulus: Poly) -> Self {
        assert!(modulus.deg() >= 1 && modulus.is_monic());
        let fld = modulus.field().clone();
        let n = modulus.deg();
        let mut trace_basis = Vec::with_capacity(n);
        let mut xj = Poly::one(&fld);
        let x = Poly::x(&fld);
        for _ in 0..n {
            // Tr(X^j) = Σ_i [X^{i+j}]_i
            let mut t = FieldElem::ZERO;
            let mut m = xj.clone();
            for i in 0..n {
                t = fld.add(t, m.coeff(i));
                m = m.mulmod(&x, &modulus);
            }
            trace_basis.push(t);
            xj = xj.mulmod(&x, &modulus);
        }
        QuotientRing {
            modulus,
            trace_basis,
        }
    }

    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    pub fn base(&self) -> &Field {
        self.modulus.field()
    }

    pub fn degree(&self) -> usize {
        self.modulus.deg()
    }

    /// `|K| = q^deg`, if it fits.
    pub fn size(&self) -> Option<u64> {
        self.base().q().checked_pow(self.degree() as u32)
    }

    pub fn reduce(&self, a: &Poly) -> Poly {
        a.rem(&self.modulus)
    }

    pub fn from_base(&self, c: FieldElem) -> Poly {
        Poly::constant(self.base(), c)
    }

    pub fn one(&self) -> Poly {
        Poly::one(self.base())
    }

    pub fn zero(&self) -> Poly {
        Poly::zero(self.base())
    }

    /// The class of `X` (a root of the modulus).
    pub fn gen(&self) -> Poly {
        self.reduce(&Poly::x(self.base()))
    }

    pub fn add(&self, a: &Poly, b: &Poly) -> Poly {
        a.add(b)
    }

    pub fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        a.sub(b)
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        a.mulmod(b, &self.modulus)
    }

    pub fn pow(&self, a: &Poly, e: u64) -> Poly {
        a.powmod(e, &self.modulus)
    }

    pub fn inv(&self, a: &Poly) -> Option<Poly> {
        let (g, s, _) = a.xgcd(&self.modulus);
        if g.is_one() {
            Some(self.reduce(&s))
        } else {
            None
        }
    }

    /// Trace down to the base field.
    pub fn trace(&self, a: &Poly) -> FieldElem {
        let f = self.base();
        a.coeffs()
            .iter()
            .zip(&self.trace_basis)
            .fold(FieldElem::ZERO, |acc, (&c, &t)| f.add(acc, f.mul(c, t)))
    }

    /// Applies `x ↦ x^(p^j)` to base-field coefficients only.
    pub fn map_coeffs(&self, a: &Poly, j: u32) -> Poly {
        a.map_frobenius(j)
    }

    /// The automorphism `τ` with `τ(X) = X^{-1}` and `τ|_k` the σ of `sigma_power`.
    /// It is a ring map exactly when the modulus is σ-self-dual.
    pub fn tau(&self, a: &Poly, sigma_power: u32) -> Poly {
        let f = self.base();
        let xinv = self
            .inv(&self.gen())
            .expect("modulus has nonzero constant term");
        let mut acc = self.zero();
        let mut pw = self.one();
        for &c in a.coeffs() {
            let c = if sigma_power == 1 { f.involution(c) } else { c };
            acc = acc.add(&pw.scale(c));
            pw = self.mul(&pw, &xinv);
        }
        acc
    }

    /// Every element as a reduced polynomial, in code order of coefficient vectors.
    pub fn elements(&self) -> Result<Vec<Poly>> {
        let size = self
            .size()
            .filter(|&s| s <= MAX_ENUM_FIELD_SIZE)
            .ok_or_else(|| Error::BudgetExceeded {
                needed: format!("{}^{}", self.base().q(), self.degree()),
                budget: MAX_ENUM_FIELD_SIZE,
            })?;
        let q = self.base().q();
        Ok((0..size)
            .map(|mut v| {
                let c: Vec<FieldElem> = (0..self.degree())
                    .map(|_| {
                        let d = v % q;
                        v /= q;
                        FieldElem(d)
                    })
                    .collect();
                Poly::new(self.base().clone(), c)
            })
            .collect())
    }

    /// Multiplicative order of a nonzero element.
    pub fn mult_order(&self, a: &Poly) -> Result<u64> {
        let n = self.size().ok_or(Error::DegreeTooLarge {
            p: self.base().p(),
            k: self.degree() as u32,
        })? - 1;
        if a.is_zero() {
            return Err(Error::ZeroElement);
        }
        let mut ord = n;
        for (r, _) in arith::factorize(n) {
            while ord % r == 0 && self.pow(a, ord / r).is_one() {
                ord /= r;
            }
        }
        Ok(ord)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::make_field;

    fn p(field: &Field, codes: &[u64]) -> Poly {
        Poly::from_codes(field, codes)
    }

    #[test]
    fn factor_examples() {
        let f2 = make_field(2, 1).unwrap();
        let fa = p(&f2, &[0, 1, 1]).factor().unwrap();
        assert_eq!(fa.factors, vec![(p(&f2, &[0, 1]), 1), (p(&f2, &[1, 1]), 1)]);
        let fa = p(&f2, &[1, 0, 0, 1]).factor().unwrap();
        assert_eq!(
            fa.factors,
            vec![(p(&f2, &[1, 1]), 1), (p(&f2, &[1, 1, 1]), 1)]
        );
        assert_eq!(fa.to_string(), "(X+1)^1 (X²+X+1)^1");
        let f3 = make_field(3, 1).unwrap();
        let fa = p(&f3, &[1, 0, 2, 0, 1]).factor().unwrap();
        assert_eq!(fa.factors, vec![(p(&f3, &[1, 0, 1]), 2)]);
        assert_eq!(p(&f3, &[2]).factor(), Err(Error::ConstantPolynomial));
    }

    #[test]
    fn factor_pth_power_branch() {
        // (X²+X+1)^4 · (X+1)^2 over GF(2): derivative vanishes after the first layer
        let f2 = make_field(2, 1).unwrap();
        let a = p(&f2, &[1, 1, 1]);
        let b = p(&f2, &[1, 1]);
        let f = a.pow(4).mul(&b.pow(2));
        assert_eq!(f.factor().unwrap().factors, vec![(b, 2), (a, 4)]);
        let f9 = make_field(3, 2).unwrap();
        let c = p(&f9, &[2, 1]); // X + ω-ish code 2
        let f = c.pow(3).mul(&p(&f9, &[1, 0, 1]).pow(1));
        let fa = f.factor().unwrap();
        assert_eq!(fa.product(&f9), f);
    }

    #[test]
    fn irreducibility_examples() {
        let f2 = make_field(2, 1).unwrap();
        let f3 = make_field(3, 1).unwrap();
        assert!(p(&f2, &[1, 1, 1]).is_irreducible().unwrap());
        assert!(!p(&f2, &[1, 0, 1]).is_irreducible().unwrap());
        assert!(p(&f3, &[1, 0, 1]).is_irreducible().unwrap());
        assert_eq!(
            p(&f2, &[1]).is_irreducible(),
            Err(Error::ConstantPolynomial)
        );
    }

    #[test]
    fn factor_roundtrip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for q in [2u64, 3, 4, 5, 9] {
            let fld = crate::ff::field_of_size(q).unwrap();
            for _ in 0..200 {
                let d = rng.gen_range(1..=12);
                let mut c: Vec<u64> = (0..d).map(|_| rng.gen_range(0..q)).collect();
                c.push(1);
                let f = p(&fld, &c);
                let fa = f.factor().unwrap();
                assert_eq!(fa.product(&fld), f);
                for w in fa.factors.windows(2) {
                    assert!(w[0].0 < w[1].0);
                }
                for (g, _) in &fa.factors {
                    assert!(g.is_irreducible().unwrap());
                    assert!(g.is_monic());
                }
            }
        }
    }

    #[test]
    fn necklace_counts_exhaustive() {
        for q in [2u64, 3, 4, 5] {
            let fld = crate::ff::field_of_size(q).unwrap();
            for d in 1..=6usize {
                if (q as u128).pow(d as u32) > 20_000 {
                    continue;
                }
                let n = irreducibles(&fld, d).unwrap().len() as u128;
                assert_eq!(n, necklace_count(q, d as u64), "q={q} d={d}");
            }
        }
        assert_eq!(necklace_count(2, 4), 3);
    }

    #[test]
    fn dual_examples() {
        let f2 = make_field(2, 1).unwrap();
        let f = p(&f2, &[1, 1, 1]);
        assert_eq!(f.dual(0).unwrap(), f);
        let f9 = make_field(3, 2).unwrap();
        for l in 1..9 {
            let lam = FieldElem(l);
            let d = Poly::linear(&f9, lam).dual(0).unwrap();
            assert_eq!(d, Poly::linear(&f9, f9.inv(lam)));
        }
        let f4 = make_field(2, 2).unwrap();
        let w = FieldElem(2);
        let g = Poly::linear(&f4, w);
        assert_eq!(g.dual(1).unwrap(), g);
        assert_eq!(p(&f2, &[0, 1]).dual(0), Err(Error::ZeroConstantTerm));
        assert!(matches!(f.dual(1), Err(Error::BadParity(_))));
    }

    #[test]
    fn scalar_act_examples() {
        let f3 = make_field(3, 1).unwrap();
        let f = Poly::linear(&f3, FieldElem(1));
        assert_eq!(
            f.scalar_act(FieldElem(2)).unwrap(),
            Poly::linear(&f3, FieldElem(2))
        );
        assert_eq!(f.scalar_act(FieldElem(1)).unwrap(), f);
        assert_eq!(f.scalar_act(FieldElem(0)), Err(Error::ZeroScalar));
        let f2 = make_field(2, 1).unwrap();
        let g = p(&f2, &[1, 1, 1]);
        assert_eq!(g.scalar_act(FieldElem(1)).unwrap(), g);
    }

    #[test]
    fn scalar_act_is_group_action_and_moves_roots() {
        let f9 = make_field(3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let d = rng.gen_range(1..6);
            let mut c: Vec<u64> = (0..d).map(|_| rng.gen_range(0..9)).collect();
            c.push(1);
            let f = p(&f9, &c);
            let z = FieldElem(rng.gen_range(1..9));
            let w = FieldElem(rng.gen_range(1..9));
            assert_eq!(
                f.scalar_act(z).unwrap().scalar_act(w).unwrap(),
                f.scalar_act(f9.mul(z, w)).unwrap()
            );
            let fz = f.scalar_act(z).unwrap();
            assert_eq!(fz.deg(), f.deg());
            assert_eq!(fz.is_irreducible().unwrap(), f.is_irreducible().unwrap());
            for r in f.roots().unwrap() {
                assert!(fz.eval(f9.div(r, z)).is_zero());
            }
        }
    }

    #[test]
    fn dual_involution_and_commutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (q, sp) in [(4u64, 0u32), (4, 1), (9, 0), (9, 1), (25, 0), (25, 1)] {
            let fld = crate::ff::field_of_size(q).unwrap();
            let sigma = |x: FieldElem| if sp == 1 { fld.involution(x) } else { x };
            let zs: Vec<FieldElem> = (1..q)
                .map(FieldElem)
                .filter(|&z| sigma(z) == fld.inv(z))
                .collect();
            for _ in 0..500 {
                let d = rng.gen_range(1..7);
                let mut c: Vec<u64> = (0..d).map(|_| rng.gen_range(0..q)).collect();
                c[0] = rng.gen_range(1..q);
                c.push(1);
                let f = p(&fld, &c);
                let fd = f.dual(sp).unwrap();
                assert_eq!(fd.dual(sp).unwrap(), f);
                assert_eq!(fd.deg(), f.deg());
                assert_eq!(fd.is_irreducible().unwrap(), f.is_irreducible().unwrap());
                let z = zs[rng.gen_range(0..zs.len())];
                assert!(f.dual_commutes_check(z, sp).unwrap());
            }
            if let Some(bad) = (2..q).map(FieldElem).find(|&z| sigma(z) != fld.inv(z)) {
                assert_eq!(
                    p(&fld, &[1, 1]).dual_commutes_check(bad, sp),
                    Err(Error::NotInZ)
                );
            }
        }
    }

    #[test]
    fn self_dual_characterization_orthogonal() {
        for q in [2u64, 3, 5] {
            let fld = crate::ff::field_of_size(q).unwrap();
            for d in 1..=6usize {
                if (q as u128).pow(d as u32) > 20_000 {
                    continue;
                }
                for chi in irreducibles(&fld, d).unwrap() {
                    if chi.coeff(0).is_zero() {
                        continue;
                    }
                    let pm1 = d == 1
                        && (chi.coeff(0) == FieldElem::ONE || chi.coeff(0) == fld.from_int(-1));
                    let sd = chi.is_self_dual(0).unwrap();
                    if pm1 {
                        assert!(sd);
                        continue;
                    }
                    let ring = QuotientRing::new(chi.clone());
                    let lam = ring.gen();
                    let expected = d % 2 == 0 && ring.pow(&lam, q.pow(d as u32 / 2) + 1).is_one();
                    assert_eq!(sd, expected, "{chi:?}");
                }
            }
        }
    }

    #[test]
    fn self_dual_characterization_unitary() {
        for q0 in [2u64, 3] {
            let fld = crate::ff::field_of_size(q0 * q0).unwrap();
            for d in 1..=5usize {
                if (fld.q() as u128).pow(d as u32) > 70_000 {
                    continue;
                }
                for chi in irreducibles(&fld, d).unwrap() {
                    if chi.coeff(0).is_zero() {
                        continue;
                    }
                    let ring = QuotientRing::new(chi.clone());
                    let lam = ring.gen();
                    let expected = d % 2 == 1 && ring.pow(&lam, q0.pow(d as u32) + 1).is_one();
                    assert_eq!(chi.is_self_dual(1).unwrap(), expected, "{chi:?}");
                }
            }
        }
    }

    #[test]
    fn cyclotomic_divisors() {
        let f2 = make_field(2, 1).unwrap();
        assert_eq!(
            divisors_of_cyclotomic(&f2, 3, FieldElem::ONE).unwrap(),
            vec![p(&f2, &[1, 1]), p(&f2, &[1, 1, 1])]
        );
        let f4 = make_field(2, 2).unwrap();
        assert_eq!(
            divisors_of_cyclotomic(&f4, 3, FieldElem::ONE).unwrap(),
            vec![p(&f4, &[1, 1]), p(&f4, &[2, 1]), p(&f4, &[3, 1])]
        );
        let f3 = make_field(3, 1).unwrap();
        assert_eq!(
            divisors_of_cyclotomic(&f3, 2, FieldElem::ONE).unwrap(),
            vec![p(&f3, &[1, 1]), p(&f3, &[2, 1])]
        );
        assert!(matches!(
            divisors_of_cyclotomic(&f3, 6, FieldElem::ONE),
            Err(Error::OrderDivisibleByP { .. })
        ));
        // root sets: union equals {λ : λ^o = μ} in the splitting field
        let f16 = make_field(2, 4).unwrap();
        let divs = divisors_of_cyclotomic(&f4, 5, FieldElem::ONE).unwrap();
        assert_eq!(divs.iter().map(|d| d.deg()).sum::<usize>(), 5);
        let _ = f16;
    }

    #[test]
    fn orbit_stabilizer_examples() {
        let f3 = make_field(3, 1).unwrap();
        let z = vec![FieldElem(1), FieldElem(2)];
        let f = Poly::linear(&f3, FieldElem(1));
        let (orb, stab) = f.orbit_stabilizer(&z).unwrap();
        assert_eq!(
            orb,
            vec![
                Poly::linear(&f3, FieldElem(2)),
                Poly::linear(&f3, FieldElem(1))
            ]
        );
        assert_eq!(stab, vec![FieldElem(1)]);
        let g = p(&f3, &[1, 0, 1]);
        let (orb, stab) = g.orbit_stabilizer(&z).unwrap();
        assert_eq!(orb, vec![g.clone()]);
        assert_eq!(stab, z);
        let (orb, stab) = g.orbit_stabilizer(&[FieldElem(1)]).unwrap();
        assert_eq!((orb.len(), stab.len()), (1, 1));
        assert_eq!(
            g.orbit_stabilizer(&[FieldElem(2)]),
            Err(Error::NotASubgroup)
        );
        let f9 = make_field(3, 2).unwrap();
        let z4 = cyclic_subgroup(&f9, 4).unwrap();
        for c in 1..9 {
            let f = p(&f9, &[c, 1, 1]);
            let (o, s) = f.orbit_stabilizer(&z4).unwrap();
            assert_eq!(o.len() * s.len(), 4);
        }
    }

    #[test]
    fn quotient_ring_trace_and_tau() {
        let f2 = make_field(2, 1).unwrap();
        let r = QuotientRing::new(p(&f2, &[1, 1, 1]));
        // GF(4) over GF(2): Tr(ω) = 1, Tr(1) = 0
        assert_eq!(r.trace(&r.gen()), FieldElem(1));
        assert_eq!(r.trace(&r.one()), FieldElem(0));
        // τ is multiplicative on a self-dual modulus
        let f3 = make_field(3, 1).unwrap();
        let r = QuotientRing::new(p(&f3, &[1, 0, 1]));
        let els = r.elements().unwrap();
        for a in &els {
            for b in &els {
                assert_eq!(r.tau(&r.mul(a, b), 0), r.mul(&r.tau(a, 0), &r.tau(b, 0)));
            }
            assert_eq!(r.tau(&r.tau(a, 0), 0), *a);
            if !a.is_zero() {
                assert_eq!(r.mul(a, &r.inv(a).unwrap()), r.one());
            }
        }
        assert_eq!(r.mult_order(&r.gen()).unwrap(), 4);
    }

    #[test]
    fn csv_roundtrip() {
        let f4 = make_field(2, 2).unwrap();
        let f = Poly::parse_csv(&f4, "2,0,3,1").unwrap();
        assert_eq!(f.to_csv(), "2,0,3,1");
        assert_eq!(Poly::parse_csv(&f4, &f.to_csv()).unwrap(), f);
        assert!(matches!(
            Poly::parse_csv(&f4, "1,2"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            Poly::parse_csv(&f4, "1,x"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            Poly::parse_csv(&f4, "1,5,1"),
            Err(Error::Parse { .. })
        ));
    }
}
