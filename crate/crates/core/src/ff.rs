//! Finite fields GF(p^k).
//!
//! Elements are stored as their canonical integer code
//! `enc(x) = Σ digits[i]·p^i`, where `digits` are the coefficients of `x`
//! in the power basis of `GF(p)[X]/(defining)`. The defining polynomial is
//! the smallest monic irreducible of degree `k` when coefficient vectors
//! `(c_0, …, c_{k-1})` are read as base-`p` integers.
//!
//! Fields of size up to 2^16 carry exp/log tables; larger fields fall back
//! to schoolbook polynomial multiplication.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::arith;
use crate::error::{Error, Result};
use crate::poly::Poly;

/// Largest field size accepted for arithmetic.
pub const MAX_FIELD_SIZE: u64 = 1 << 48;
/// Largest field size for operations that walk every element.
pub const MAX_ENUM_FIELD_SIZE: u64 = 1 << 24;
const TABLE_LIMIT: u64 = 1 << 16;
const ADD_TABLE_LIMIT: u64 = 256;

pub type Field = Arc<FieldDesc>;

/// A field element, identified by its integer code `enc(x) ∈ [0, q)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem(pub u64);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    pub fn code(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
    add: Option<Vec<u32>>,
}

pub struct FieldDesc {
    p: u64,
    k: u32,
    q: u64,
    defining: Vec<u64>,
    pow_p: Vec<u64>,
    tables: Option<Tables>,
}

impl fmt::Debug for FieldDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.p, self.k)
    }
}

impl fmt::Display for FieldDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.p, self.k)
    }
}

impl PartialEq for FieldDesc {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k
    }
}

impl Eq for FieldDesc {}

fn cache() -> &'static Mutex<HashMap<(u64, u32), Field>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Field>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Builds (or fetches from the process-wide cache) the canonical GF(p^k).
pub fn make_field(p: u64, k: u32) -> Result<Field> {
    if !arith::is_prime_trial(p) {
        return Err(Error::NotPrime(p));
    }
    if k == 0 {
        return Err(Error::DegreeTooLarge { p, k });
    }
    match p.checked_pow(k) {
        Some(q) if q <= MAX_FIELD_SIZE => {}
        _ => return Err(Error::DegreeTooLarge { p, k }),
    }
    if let Some(f) = cache().lock().unwrap().get(&(p, k)) {
        return Ok(f.clone());
    }
    let defining = if k == 1 {
        vec![0, 1]
    } else {
        canonical_defining(p, k)?
    };
    let field = Arc::new(FieldDesc::with_defining(p, k, defining));
    cache().lock().unwrap().insert((p, k), field.clone());
    Ok(field)
}

/// Parses the `p^k` descriptor (a bare prime `p` means `p^1`).
pub fn parse_field(s: &str) -> Result<Field> {
    let s = s.trim();
    let (ps, ks) = match s.split_once('^') {
        Some((a, b)) => (a, b),
        None => (s, "1"),
    };
    let p: u64 = ps.trim().parse().map_err(|_| {
        Error::parse(
            1,
            1,
            format!("bad characteristic in field descriptor {s:?}"),
        )
    })?;
    let k: u32 = ks.trim().parse().map_err(|_| {
        Error::parse(
            1,
            ps.len() + 2,
            format!("bad degree in field descriptor {s:?}"),
        )
    })?;
    make_field(p, k)
}

/// Builds the field of size `q` (a prime power).
pub fn field_of_size(q: u64) -> Result<Field> {
    let (p, k) = arith::prime_power(q).ok_or(Error::NotPrime(q))?;
    make_field(p, k)
}

fn canonical_defining(p: u64, k: u32) -> Result<Vec<u64>> {
    let base = make_field(p, 1)?;
    let count = p.pow(k);
    for v in 0..count {
        let mut coeffs = Vec::with_capacity(k as usize + 1);
        let mut x = v;
        for _ in 0..k {
            coeffs.push(x % p);
            x /= p;
        }
        if coeffs[0] == 0 {
            continue;
        }
        coeffs.push(1);
        let f = Poly::new(base.clone(), coeffs.iter().map(|&c| FieldElem(c)).collect());
        if f.is_irreducible()? {
            return Ok(coeffs);
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl FieldDesc {
    fn with_defining(p: u64, k: u32, defining: Vec<u64>) -> Self {
        let q = p.pow(k);
        let pow_p = (0..k).map(|i| p.pow(i)).collect();
        let mut f = FieldDesc {
            p,
            k,
            q,
            defining,
            pow_p,
            tables: None,
        };
        if q <= TABLE_LIMIT {
            f.tables = Some(f.build_tables());
        }
        f
    }

    fn build_tables(&self) -> Tables {
        let q = self.q;
        let gen = self.find_primitive_slow();
        let mut exp = vec![0u32; (q - 1) as usize];
        let mut log = vec![0u32; q as usize];
        let mut x = FieldElem::ONE;
        for i in 0..(q - 1) {
            exp[i as usize] = x.0 as u32;
            log[x.0 as usize] = i as u32;
            x = self.mul_slow(x, gen);
        }
        let add = if q <= ADD_TABLE_LIMIT && self.p != 2 && self.k > 1 {
            let mut t = vec![0u32; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    t[(a * q + b) as usize] = self.add_digits(FieldElem(a), FieldElem(b)).0 as u32;
                }
            }
            Some(t)
        } else {
            None
        };
        Tables { exp, log, add }
    }

    fn find_primitive_slow(&self) -> FieldElem {
        if self.q == 2 {
            return FieldElem::ONE;
        }
        let primes = arith::prime_divisors(self.q - 1);
        (1..self.q)
            .map(FieldElem)
            .find(|&g| {
                primes
                    .iter()
                    .all(|&r| self.pow_slow(g, (self.q - 1) / r) != FieldElem::ONE)
            })
            .expect("multiplicative group is cyclic")
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Coefficients of the defining polynomial, constant term first.
    pub fn defining(&self) -> &[u64] {
        &self.defining
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem::ZERO
    }

    pub fn one(&self) -> FieldElem {
        FieldElem::ONE
    }

    /// The class of `X` in `GF(p)[X]/(defining)`; equals `p`'s image only when k = 1.
    pub fn generator(&self) -> FieldElem {
        if self.k == 1 {
            // defining = X, so X ≡ 0; the prime field is generated by 1.
            FieldElem::ONE
        } else {
            FieldElem(self.p)
        }
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> FieldElem {
        FieldElem(n.rem_euclid(self.p as i64) as u64)
    }

    pub fn contains(&self, x: FieldElem) -> bool {
        x.0 < self.q
    }

    pub fn digits(&self, x: FieldElem) -> Vec<u64> {
        let mut v = x.0;
        (0..self.k)
            .map(|_| {
                let d = v % self.p;
                v /= self.p;
                d
            })
            .collect()
    }

    pub fn from_digits(&self, digits: &[u64]) -> FieldElem {
        assert!(digits.len() <= self.k as usize);
        FieldElem(
            digits
                .iter()
                .zip(&self.pow_p)
                .map(|(&d, &pp)| (d % self.p) * pp)
                .sum(),
        )
    }

    /// Iterates every element in code order; refuses fields above the enumeration ceiling.
    pub fn elements(&self) -> Result<impl Iterator<Item = FieldElem>> {
        if self.q > MAX_ENUM_FIELD_SIZE {
            return Err(Error::BudgetExceeded {
                needed: self.q.to_string(),
                budget: MAX_ENUM_FIELD_SIZE,
            });
        }
        Ok((0..self.q).map(FieldElem))
    }

    pub fn nonzero_elements(&self) -> Result<impl Iterator<Item = FieldElem>> {
        Ok(self.elements()?.skip(1))
    }

    fn add_digits(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let (mut x, mut y, mut r) = (a.0, b.0, 0u64);
        for &pp in &self.pow_p {
            let d = (x % self.p + y % self.p) % self.p;
            r += d * pp;
            x /= self.p;
            y /= self.p;
        }
        FieldElem(r)
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.p == 2 {
            return FieldElem(a.0 ^ b.0);
        }
        if self.k == 1 {
            let s = a.0 + b.0;
            return FieldElem(if s >= self.p { s - self.p } else { s });
        }
        if let Some(Tables { add: Some(t), .. }) = &self.tables {
            return FieldElem(t[(a.0 * self.q + b.0) as usize] as u64);
        }
        self.add_digits(a, b)
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        if self.p == 2 || a.0 == 0 {
            return a;
        }
        if self.k == 1 {
            return FieldElem(self.p - a.0);
        }
        let (mut x, mut r) = (a.0, 0u64);
        for &pp in &self.pow_p {
            let d = x % self.p;
            r += ((self.p - d) % self.p) * pp;
            x /= self.p;
        }
        FieldElem(r)
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    fn mul_slow(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.k == 1 {
            return FieldElem(((a.0 as u128 * b.0 as u128) % self.p as u128) as u64);
        }
        let k = self.k as usize;
        let p = self.p as u128;
        let da = self.digits(a);
        let db = self.digits(b);
        let mut prod = vec![0u128; 2 * k - 1];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u128 * y as u128) % p;
            }
        }
        // reduce by the monic defining polynomial
        for top in (k..prod.len()).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            prod[top] = 0;
            for (i, &d) in self.defining[..k].iter().enumerate() {
                let idx = top - k + i;
                prod[idx] = (prod[idx] + (p - c) * d as u128) % p;
            }
        }
        self.from_digits(&prod[..k].iter().map(|&x| x as u64).collect::<Vec<_>>())
    }

    fn pow_slow(&self, mut b: FieldElem, mut e: u64) -> FieldElem {
        let mut r = FieldElem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul_slow(r, b);
            }
            b = self.mul_slow(b, b);
            e >>= 1;
        }
        r
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a.0 == 0 || b.0 == 0 {
            return FieldElem::ZERO;
        }
        match &self.tables {
            Some(t) => {
                let s = t.log[a.0 as usize] as u64 + t.log[b.0 as usize] as u64;
                let m = self.q - 1;
                FieldElem(t.exp[(if s >= m { s - m } else { s }) as usize] as u64)
            }
            None => self.mul_slow(a, b),
        }
    }

    pub fn pow(&self, b: FieldElem, e: u64) -> FieldElem {
        if b.0 == 0 {
            return if e == 0 {
                FieldElem::ONE
            } else {
                FieldElem::ZERO
            };
        }
        match &self.tables {
            Some(t) => {
                let m = self.q - 1;
                let l = ((t.log[b.0 as usize] as u128 * (e % m) as u128) % m as u128) as usize;
                FieldElem(t.exp[l] as u64)
            }
            None => self.pow_slow(b, e % (self.q - 1)),
        }
    }

    /// Raises to a signed exponent (`b ≠ 0` when `e < 0`).
    pub fn pow_i(&self, b: FieldElem, e: i64) -> FieldElem {
        if e >= 0 {
            self.pow(b, e as u64)
        } else {
            self.inv(self.pow(b, e.unsigned_abs()))
        }
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self, a: FieldElem) -> FieldElem {
        assert!(a.0 != 0, "inverse of zero");
        match &self.tables {
            Some(t) => {
                let l = t.log[a.0 as usize] as u64;
                FieldElem(t.exp[((self.q - 1 - l) % (self.q - 1)) as usize] as u64)
            }
            None => self.pow_slow(a, self.q - 2),
        }
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.mul(a, self.inv(b))
    }

    /// `x ↦ x^(p^j)`.
    pub fn frobenius(&self, x: FieldElem, j: u32) -> FieldElem {
        let j = j % self.k;
        if j == 0 || x.0 < self.p {
            return x;
        }
        self.pow(x, self.p.pow(j))
    }

    /// The involution `x ↦ x^(√q)` of a field of even degree.
    pub fn involution(&self, x: FieldElem) -> FieldElem {
        assert!(
            self.k.is_multiple_of(2),
            "involution needs an even-degree field"
        );
        self.frobenius(x, self.k / 2)
    }

    /// Norm and trace from GF(p^k) down to its subfield GF(p^s).
    /// Both results are returned as elements of this field.
    pub fn norm_trace(&self, x: FieldElem, s: u32) -> Result<(FieldElem, FieldElem)> {
        if s == 0 || !self.k.is_multiple_of(s) {
            return Err(Error::NotADivisor { sub: s, k: self.k });
        }
        let mut norm = FieldElem::ONE;
        let mut trace = FieldElem::ZERO;
        let mut y = x;
        for _ in 0..(self.k / s) {
            norm = self.mul(norm, y);
            trace = self.add(trace, y);
            y = self.frobenius(y, s);
        }
        Ok((norm, trace))
    }

    /// Smallest `l ≥ 1` with `x^l = 1`.
    pub fn mult_order(&self, x: FieldElem) -> Result<u64> {
        if x.is_zero() {
            return Err(Error::ZeroElement);
        }
        let mut ord = self.q - 1;
        for (r, _) in arith::factorize(self.q - 1) {
            while ord.is_multiple_of(r) && self.pow(x, ord / r) == FieldElem::ONE {
                ord /= r;
            }
        }
        Ok(ord)
    }

    /// A generator of the multiplicative group (smallest code).
    pub fn primitive_element(&self) -> FieldElem {
        match &self.tables {
            Some(t) if self.q > 2 => FieldElem(t.exp[1] as u64),
            _ => self.find_primitive_slow(),
        }
    }

    pub fn is_square(&self, x: FieldElem) -> bool {
        if x.is_zero() || self.p == 2 {
            return true;
        }
        self.pow(x, (self.q - 1) / 2) == FieldElem::ONE
    }

    /// Smallest-code non-square (odd characteristic).
    pub fn nonsquare(&self) -> FieldElem {
        assert!(self.p != 2);
        (2..self.q)
            .map(FieldElem)
            .find(|&x| !self.is_square(x))
            .expect("odd fields have non-squares")
    }

    /// A square root (Tonelli–Shanks; any root in characteristic 2).
    pub fn sqrt(&self, x: FieldElem) -> Option<FieldElem> {
        if x.is_zero() {
            return Some(x);
        }
        if self.p == 2 {
            // squaring is a bijection; invert it by x^(q/2)
            return Some(self.pow(x, self.q / 2));
        }
        if !self.is_square(x) {
            return None;
        }
        let mut s = 0;
        let mut t = self.q - 1;
        while t.is_multiple_of(2) {
            t /= 2;
            s += 1;
        }
        let z = self.nonsquare();
        let mut m = s;
        let mut c = self.pow(z, t);
        let mut r = self.pow(x, t.div_ceil(2));
        let mut u = self.pow(x, t);
        while u != FieldElem::ONE {
            let mut i = 0;
            let mut v = u;
            while v != FieldElem::ONE {
                v = self.mul(v, v);
                i += 1;
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = self.mul(b, b);
            }
            m = i;
            c = self.mul(b, b);
            r = self.mul(r, b);
            u = self.mul(u, c);
        }
        Some(r)
    }

    /// Discrete logarithm to the base `primitive_element()`.
    pub fn log(&self, x: FieldElem) -> Option<u64> {
        if x.is_zero() {
            return None;
        }
        if let Some(t) = &self.tables {
            return Some(t.log[x.0 as usize] as u64);
        }
        let g = self.primitive_element();
        let mut y = FieldElem::ONE;
        for i in 0..self.q - 1 {
            if y == x {
                return Some(i);
            }
            y = self.mul_slow(y, g);
        }
        None
    }

    /// Some `μ` with `μ^(√q + 1) = c` for `c` in the fixed field of the involution.
    pub fn norm_preimage(&self, c: FieldElem) -> Option<FieldElem> {
        let q0 = self.p.pow(self.k / 2);
        let l = self.log(c)?;
        (l % (q0 + 1) == 0).then(|| self.pow(self.primitive_element(), l / (q0 + 1)))
    }

    /// Whether `x` lies in the subfield of size `p^s`.
    pub fn in_subfield(&self, x: FieldElem, s: u32) -> bool {
        self.frobenius(x, s) == x
    }
}

/// A field embedding `sub → big`, fixed by sending the class of `X` in `sub`
/// to the smallest-code root of `sub.defining` in `big`.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub sub: Field,
    pub big: Field,
    /// Images of `X^i`, `i < sub.k`.
    powers: Vec<FieldElem>,
}

impl Embedding {
    pub fn apply(&self, x: FieldElem) -> FieldElem {
        let big = &self.big;
        self.sub
            .digits(x)
            .iter()
            .zip(&self.powers)
            .fold(FieldElem::ZERO, |acc, (&d, &pw)| {
                big.add(acc, big.mul(FieldElem(d), pw))
            })
    }

    pub fn generator_image(&self) -> FieldElem {
        if self.sub.k == 1 {
            FieldElem::ONE
        } else {
            self.powers[1]
        }
    }
}

pub fn embed(sub: &Field, big: &Field) -> Result<Embedding> {
    if sub.p != big.p || !big.k.is_multiple_of(sub.k) {
        return Err(Error::NotASubfield {
            sub: sub.q,
            big: big.q,
        });
    }
    if sub.k == 1 {
        return Ok(Embedding {
            sub: sub.clone(),
            big: big.clone(),
            powers: vec![FieldElem::ONE],
        });
    }
    let f = Poly::new(
        big.clone(),
        sub.defining.iter().map(|&c| FieldElem(c)).collect(),
    );
    let root = f
        .roots()?
        .into_iter()
        .min()
        .expect("defining polynomial splits in an extension of degree divisible by k");
    let mut powers = Vec::with_capacity(sub.k as usize);
    let mut x = FieldElem::ONE;
    for _ in 0..sub.k {
        powers.push(x);
        x = big.mul(x, root);
    }
    Ok(Embedding {
        sub: sub.clone(),
        big: big.clone(),
        powers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn canonical_defining_polynomials() {
        assert_eq!(make_field(2, 1).unwrap().defining(), &[0, 1]);
        assert_eq!(make_field(2, 2).unwrap().defining(), &[1, 1, 1]);
        assert_eq!(make_field(3, 2).unwrap().defining(), &[1, 0, 1]);
        // deterministic across calls
        let a = make_field(5, 3).unwrap().defining().to_vec();
        let b = FieldDesc::with_defining(5, 3, canonical_defining(5, 3).unwrap());
        assert_eq!(a, b.defining());
    }

    #[test]
    fn construction_errors() {
        assert_eq!(make_field(4, 1).unwrap_err(), Error::NotPrime(4));
        assert!(matches!(
            make_field(2, 49),
            Err(Error::DegreeTooLarge { .. })
        ));
        assert!(matches!(
            make_field(3, 31),
            Err(Error::DegreeTooLarge { .. })
        ));
    }

    #[test]
    fn brute_force_oracle_for_gf9_defining() {
        // first monic quadratic over GF(3) (base-3 order) with no root
        let mut first = None;
        'outer: for v in 0..9u64 {
            let (c0, c1) = (v % 3, v / 3);
            for x in 0..3u64 {
                if (x * x + c1 * x + c0) % 3 == 0 {
                    continue 'outer;
                }
            }
            first = Some(vec![c0, c1, 1]);
            break;
        }
        assert_eq!(first.unwrap(), make_field(3, 2).unwrap().defining());
    }

    fn field_axioms(f: &FieldDesc, rng: &mut ChaCha8Rng) {
        for _ in 0..1000 {
            let a = FieldElem(rng.gen_range(0..f.q()));
            let b = FieldElem(rng.gen_range(0..f.q()));
            let c = FieldElem(rng.gen_range(0..f.q()));
            assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            assert_eq!(f.add(a, f.neg(a)), FieldElem::ZERO);
            if !a.is_zero() {
                assert_eq!(f.mul(a, f.inv(a)), FieldElem::ONE);
            }
            assert_eq!(f.mul(a, b), f.mul_slow(a, b));
        }
    }

    #[test]
    fn axioms_on_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, k) in [
            (2, 1),
            (2, 4),
            (3, 2),
            (5, 2),
            (7, 3),
            (2, 17),
            (3, 11),
            (65521, 1),
        ] {
            field_axioms(&make_field(p, k).unwrap(), &mut rng);
        }
    }

    #[test]
    fn encoding_is_bijective() {
        for (p, k) in [(2, 4), (3, 3), (5, 2)] {
            let f = make_field(p, k).unwrap();
            for x in f.elements().unwrap() {
                assert_eq!(f.from_digits(&f.digits(x)), x);
            }
        }
    }

    #[test]
    fn frobenius_examples() {
        let f4 = make_field(2, 2).unwrap();
        assert_eq!(f4.frobenius(FieldElem(2), 1), FieldElem(3));
        assert_eq!(f4.frobenius(FieldElem(2), 2), FieldElem(2));
        let f2 = make_field(2, 1).unwrap();
        assert_eq!(f2.frobenius(FieldElem(1), 5), FieldElem(1));
        let f9 = make_field(3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x = FieldElem(rng.gen_range(0..9));
            assert_eq!(f9.frobenius(f9.frobenius(x, 1), 1), f9.frobenius(x, 2));
        }
    }

    #[test]
    fn frobenius_fixes_exactly_prime_field() {
        for (p, k) in [(2, 2), (2, 3), (3, 2), (3, 4), (5, 2), (2, 6)] {
            let f = make_field(p, k).unwrap();
            for a in f.elements().unwrap() {
                let fixed = f.frobenius(a, 1) == a;
                assert_eq!(fixed, a.0 < p, "{f:?} {a:?}");
                for b in [FieldElem(1), FieldElem(f.q() - 1)] {
                    assert_eq!(
                        f.frobenius(f.mul(a, b), 1),
                        f.mul(f.frobenius(a, 1), f.frobenius(b, 1))
                    );
                    assert_eq!(
                        f.frobenius(f.add(a, b), 1),
                        f.add(f.frobenius(a, 1), f.frobenius(b, 1))
                    );
                }
            }
        }
    }

    #[test]
    fn norm_trace_examples() {
        let f4 = make_field(2, 2).unwrap();
        assert_eq!(
            f4.norm_trace(FieldElem(2), 1).unwrap(),
            (FieldElem(1), FieldElem(1))
        );
        assert_eq!(
            f4.norm_trace(FieldElem(1), 1).unwrap(),
            (FieldElem(1), FieldElem(0))
        );
        assert_eq!(
            f4.norm_trace(FieldElem(0), 1).unwrap(),
            (FieldElem(0), FieldElem(0))
        );
        assert!(matches!(
            f4.norm_trace(FieldElem(1), 3),
            Err(Error::NotADivisor { .. })
        ));
        let f27 = make_field(3, 3).unwrap();
        assert_eq!(
            f27.norm_trace(FieldElem(1), 1).unwrap(),
            (FieldElem(1), FieldElem(0))
        );
        let f64 = make_field(2, 6).unwrap();
        for x in f64.elements().unwrap() {
            for s in [1, 2, 3] {
                let (n, t) = f64.norm_trace(x, s).unwrap();
                assert!(f64.in_subfield(n, s) && f64.in_subfield(t, s));
            }
        }
    }

    #[test]
    fn orders() {
        let f4 = make_field(2, 2).unwrap();
        assert_eq!(f4.mult_order(FieldElem(1)).unwrap(), 1);
        assert_eq!(f4.mult_order(FieldElem(2)).unwrap(), 3);
        assert_eq!(f4.mult_order(FieldElem(0)), Err(Error::ZeroElement));
        let f9 = make_field(3, 2).unwrap();
        let g = f9.primitive_element();
        // exhaust powers
        let mut seen = std::collections::HashSet::new();
        let mut x = FieldElem::ONE;
        for _ in 0..8 {
            seen.insert(x);
            x = f9.mul(x, g);
        }
        assert_eq!(seen.len(), 8);
        assert_eq!(f9.mult_order(g).unwrap(), 8);
    }

    #[test]
    fn order_statistics_exhaustive() {
        for (p, k) in [
            (2, 1),
            (2, 2),
            (2, 3),
            (2, 4),
            (2, 5),
            (2, 6),
            (3, 1),
            (3, 2),
            (3, 3),
            (3, 4),
            (5, 1),
            (5, 2),
            (7, 2),
        ] {
            let f = make_field(p, k).unwrap();
            if f.q() > 81 {
                continue;
            }
            let mut primitive = 0;
            for x in f.nonzero_elements().unwrap() {
                let o = f.mult_order(x).unwrap();
                assert_eq!((f.q() - 1) % o, 0);
                if o == f.q() - 1 {
                    primitive += 1;
                }
            }
            assert_eq!(primitive, arith::euler_phi(f.q() - 1));
        }
    }

    #[test]
    fn embeddings() {
        let f2 = make_field(2, 1).unwrap();
        let f4 = make_field(2, 2).unwrap();
        let f16 = make_field(2, 4).unwrap();
        let e = embed(&f2, &f4).unwrap();
        assert_eq!(e.apply(FieldElem(0)), FieldElem(0));
        assert_eq!(e.apply(FieldElem(1)), FieldElem(1));
        let e = embed(&f4, &f16).unwrap();
        // oracle: smallest-code root of X^2+X+1 in GF(16) by exhaustion
        let root = f16
            .elements()
            .unwrap()
            .find(|&x| f16.add(f16.add(f16.mul(x, x), x), FieldElem::ONE).is_zero())
            .unwrap();
        assert_eq!(e.generator_image(), root);
        for a in f4.elements().unwrap() {
            for b in f4.elements().unwrap() {
                assert_eq!(e.apply(f4.mul(a, b)), f16.mul(e.apply(a), e.apply(b)));
                assert_eq!(e.apply(f4.add(a, b)), f16.add(e.apply(a), e.apply(b)));
            }
            // Frobenius of the image stays in the orbit of the image
            let img = e.apply(f4.frobenius(a, 1));
            assert!((0..4).any(|j| f16.frobenius(e.apply(a), j) == img));
        }
        let id = embed(&f16, &f16).unwrap();
        for a in f16.elements().unwrap() {
            assert_eq!(id.apply(a), a);
        }
        let f8 = make_field(2, 3).unwrap();
        assert!(matches!(embed(&f8, &f16), Err(Error::NotASubfield { .. })));
        let f9 = make_field(3, 2).unwrap();
        assert!(matches!(embed(&f9, &f16), Err(Error::NotASubfield { .. })));
    }

    #[test]
    fn square_roots_and_logs() {
        for (p, k) in [
            (3, 1),
            (5, 1),
            (13, 1),
            (17, 1),
            (3, 2),
            (5, 2),
            (2, 3),
            (7, 2),
            (41, 1),
        ] {
            let f = make_field(p, k).unwrap();
            let g = f.primitive_element();
            for x in f.elements().unwrap() {
                match f.sqrt(x) {
                    Some(r) => assert_eq!(f.mul(r, r), x),
                    None => assert!(!f.is_square(x)),
                }
                if !x.is_zero() {
                    assert_eq!(f.pow(g, f.log(x).unwrap()), x);
                }
            }
        }
        let f9 = make_field(3, 2).unwrap();
        for c in [1u64, 2] {
            let mu = f9.norm_preimage(FieldElem(c)).unwrap();
            assert_eq!(f9.pow(mu, 4), FieldElem(c));
        }
    }

    #[test]
    fn parse_descriptor() {
        assert_eq!(parse_field("3^2").unwrap().q(), 9);
        assert_eq!(parse_field("7").unwrap().q(), 7);
        assert!(matches!(parse_field("x^2"), Err(Error::Parse { .. })));
    }
}
