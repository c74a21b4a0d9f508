//! The number-theoretic invariants `f_q(o)`, `f'_q(o)`, `f''_q(o)` and the
//! exponents `e_G(o)` of projective classical groups; witness orders that
//! separate families; and a brute-force oracle for `e_G(o)`.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith;
use crate::central::{self, DEFAULT_MAX_ENUM};
use crate::error::{Error, Result};
use crate::ff::{make_field, Field, FieldElem};
use crate::forms::{self, FormKind};
use crate::linalg::{self, InvariantTuple};
use crate::poly::{self, Poly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Family {
    PGL,
    PSp,
    PGO,
    PGU,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::PGL, Family::PSp, Family::PGO, Family::PGU];

    pub fn parse(s: &str) -> Result<Family> {
        match s.trim().to_ascii_uppercase().as_str() {
            "PGL" | "GL" => Ok(Family::PGL),
            "PSP" | "SP" => Ok(Family::PSp),
            "PGO" | "GO" | "O" => Ok(Family::PGO),
            "PGU" | "GU" | "U" => Ok(Family::PGU),
            _ => Err(Error::parse(1, 1, format!("unknown family `{s}`"))),
        }
    }

    /// `|Z|` of the linear group over GF(q) (GF(q²) for unitary groups).
    pub fn center_order(self, q: u64) -> u64 {
        match self {
            Family::PGL => q - 1,
            Family::PSp | Family::PGO => {
                if q.is_multiple_of(2) {
                    1
                } else {
                    2
                }
            }
            Family::PGU => q + 1,
        }
    }

    /// Exponent `d` with `|k| = q^d`: 2 for unitary groups.
    pub fn field_degree(self) -> u32 {
        if self == Family::PGU {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// `Family:q`, e.g. `PGL:2`.
pub fn parse_group(s: &str) -> Result<(Family, u64)> {
    let (fam, q) = s
        .split_once(':')
        .ok_or_else(|| Error::parse(1, 1, format!("expected FAMILY:q, got `{s}`")))?;
    let fam = Family::parse(fam)?;
    let q: u64 = q
        .trim()
        .parse()
        .map_err(|_| Error::parse(1, fam.to_string().len() + 2, format!("bad q `{q}`")))?;
    check_q(q)?;
    Ok((fam, q))
}

fn check_q(q: u64) -> Result<(u64, u32)> {
    arith::prime_power(q).ok_or(Error::NotPrime(q))
}

fn coprime_check(q: u64, o: u64) -> Result<()> {
    if o == 0 || arith::gcd(o, q) != 1 {
        return Err(Error::NotCoprime { o, q });
    }
    Ok(())
}

fn big_pow(q: u64, e: u64) -> BigUint {
    BigUint::from(q).pow(e as u32)
}

/// `ord_o(q)` (1 for `o = 1`).
fn ord(q: u64, o: u64) -> u64 {
    if o == 1 {
        1
    } else {
        arith::mult_order_mod(q % o, o)
    }
}

/// `f_q(o) = q^e − 1` with `e = ord_o(q)`.
pub fn f_q(q: u64, o: u64) -> Result<BigUint> {
    coprime_check(q, o)?;
    Ok(big_pow(q, ord(q, o)) - 1u32)
}

/// `q^{e/2} + 1` if `f_q(o) = q^e − 1` with `e` even and `o | q^{e/2} + 1`, else `f_q(o)`.
pub fn f_prime_q(q: u64, o: u64) -> Result<BigUint> {
    Ok(f_prime_branch(q, o)?.0)
}

fn f_prime_branch(q: u64, o: u64) -> Result<(BigUint, bool)> {
    coprime_check(q, o)?;
    let e = ord(q, o);
    if e.is_multiple_of(2) {
        let h = big_pow(q, e / 2) + 1u32;
        if (&h % o).is_zero() {
            return Ok((h, true));
        }
    }
    Ok((big_pow(q, e) - 1u32, false))
}

/// `q^e + 1` if `f_{q²}(o) = q^{2e} − 1` with `e` odd and `o | q^e + 1`, else `f_{q²}(o)`.
pub fn f_doubleprime_q(q: u64, o: u64) -> Result<BigUint> {
    Ok(f_doubleprime_branch(q, o)?.0)
}

fn f_doubleprime_branch(q: u64, o: u64) -> Result<(BigUint, bool)> {
    coprime_check(q, o)?;
    let q2 = q
        .checked_mul(q)
        .ok_or(Error::DegreeTooLarge { p: q, k: 2 })?;
    let e = ord(q2, o);
    if e % 2 == 1 {
        let h = big_pow(q, e) + 1u32;
        if (&h % o).is_zero() {
            return Ok((h, true));
        }
    }
    Ok((big_pow(q, 2 * e) - 1u32, false))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `o = 1`
    Trivial,
    /// `o = 2` for symplectic/orthogonal groups
    Two,
    /// `f_q(o)` (or `f_{q²}(o)` for unitary groups)
    Linear,
    /// the `q^{e/2} + 1` / `q^e + 1` refinement
    PlusOne,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EValue {
    pub family: Family,
    pub q: u64,
    pub o: u64,
    #[serde(serialize_with = "crate::invariants::ser_big")]
    pub value: BigUint,
    pub branch: Branch,
}

/// Integers above 2^53 as strings.
pub fn ser_big<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v.to_u64() {
        Some(x) if x <= 1 << 53 => s.serialize_u64(x),
        _ => s.serialize_str(&v.to_string()),
    }
}

/// The coprimality hypotheses of the closed forms: `gcd(o, p) = 1` and
/// `gcd(o, |Z|) = 1` (the latter waived for `o = 2` in the bilinear families,
/// whose formula is stated for exactly that case).
pub fn coprimality(family: Family, q: u64, o: u64) -> Result<()> {
    let (p, _) = check_q(q)?;
    if o == 0 {
        return Err(Error::CoprimalityViolated("o must be positive".into()));
    }
    if o.is_multiple_of(p) {
        return Err(Error::CoprimalityViolated(format!(
            "o = {o} is divisible by p = {p}"
        )));
    }
    let z = family.center_order(q);
    let exempt = o == 2 && matches!(family, Family::PSp | Family::PGO);
    if !exempt && arith::gcd(o, z) != 1 {
        return Err(Error::CoprimalityViolated(format!(
            "gcd(o = {o}, |Z| = {z}) ≠ 1"
        )));
    }
    Ok(())
}

/// `e_G(o)` for the projective group `G` of `family` over GF(q).
pub fn e_value(family: Family, q: u64, o: u64) -> Result<EValue> {
    coprimality(family, q, o)?;
    let (value, branch) = if o == 1 {
        (BigUint::one(), Branch::Trivial)
    } else {
        match family {
            Family::PGL => (f_q(q, o)?, Branch::Linear),
            Family::PSp | Family::PGO if o == 2 => (BigUint::from(2u32), Branch::Two),
            Family::PSp | Family::PGO => {
                let (v, plus) = f_prime_branch(q, o)?;
                (
                    v,
                    if plus {
                        Branch::PlusOne
                    } else {
                        Branch::Linear
                    },
                )
            }
            Family::PGU => {
                let (v, plus) = f_doubleprime_branch(q, o)?;
                (
                    v,
                    if plus {
                        Branch::PlusOne
                    } else {
                        Branch::Linear
                    },
                )
            }
        }
    };
    Ok(EValue {
        family,
        q,
        o,
        value,
        branch,
    })
}

/// The closed form without the `gcd(o, |Z|) = 1` hypothesis (only `p ∤ o`);
/// what the oracle is compared against outside the proven range.
pub fn closed_form(family: Family, q: u64, o: u64) -> Result<BigUint> {
    let (p, _) = check_q(q)?;
    if o == 0 || o.is_multiple_of(p) {
        return Err(Error::OrderDivisibleByP { o, p });
    }
    Ok(match (family, o) {
        (_, 1) => BigUint::one(),
        (Family::PSp | Family::PGO, 2) => BigUint::from(2u32),
        (Family::PGL, _) => f_q(q, o)?,
        (Family::PSp | Family::PGO, _) => f_prime_q(q, o)?,
        (Family::PGU, _) => f_doubleprime_q(q, o)?,
    })
}

// ---- witnesses ----

type Group = (Family, u64);

fn is_bilinear(f: Family) -> bool {
    matches!(f, Family::PSp | Family::PGO)
}

/// `(q²+1)/2` for odd `q`, `q²+1` for even `q`.
fn quartic_witness(q: u64) -> u64 {
    if q % 2 == 1 {
        (q * q).div_ceil(2)
    } else {
        q * q + 1
    }
}

/// The explicit witness order for a pair of groups, with its coprimality
/// side-conditions checked.
pub fn witness_o(a: Group, b: Group) -> Result<u64> {
    let ((fa, qa), (fb, qb)) = if (a.0, a.1) <= (b.0, b.1) {
        (a, b)
    } else {
        (b, a)
    };
    let (pa, _) = check_q(qa)?;
    let (pb, _) = check_q(qb)?;
    let not_case = |why: &str| {
        Err(Error::NotAProofCase(format!(
            "{fa}({qa}) vs {fb}({qb}): {why}"
        )))
    };
    if (fa, qa) == (fb, qb) {
        return not_case("identical groups");
    }
    if is_bilinear(fa) && is_bilinear(fb) && qa == qb {
        return not_case("the symplectic/orthogonal pair is not separated");
    }
    if pa != pb {
        return not_case("different characteristics are separated without an explicit witness");
    }
    let o = if fa == Family::PGL && is_bilinear(fb) && qa == qb {
        quartic_witness(qa)
    } else if is_bilinear(fa) && fb == Family::PGU && qa == qb * qb {
        quartic_witness(qb)
    } else if fa == Family::PGL && fb == Family::PGU && qa == qb * qb {
        let num = qb.pow(5) + 1;
        if (qb + 1) % 5 == 0 {
            num / (5 * (qb + 1))
        } else {
            num / (qb + 1)
        }
    } else if qa.pow(fa.field_degree()) != qb.pow(fb.field_degree()) {
        field_size_witness(a, b)?
    } else {
        return not_case("no witness construction applies");
    };
    for (f, q) in [(fa, qa), (fb, qb)] {
        let z = f.center_order(q);
        if o <= 2 || arith::gcd(o, pa) != 1 || arith::gcd(o, z) != 1 {
            return Err(Error::CoprimalityViolated(format!(
                "witness o = {o} fails gcd(o, p|Z|) = 1 for {f}({q})"
            )));
        }
    }
    Ok(o)
}

/// For `|k_1| ≠ |k_2|`: a prime `o | t_r` (`r > 2` prime) beyond `p`, both
/// `|Z|`, and `q^d − 1`, at which the two e-values differ.
fn field_size_witness(a: Group, b: Group) -> Result<u64> {
    for &(f, q) in &[a, b] {
        let qd = q.pow(f.field_degree());
        let (p, _) = check_q(q)?;
        let floor = [p, a.0.center_order(a.1), b.0.center_order(b.1), qd - 1]
            .into_iter()
            .max()
            .unwrap();
        for r in (3..=31u64).filter(|&r| arith::is_prime(r)) {
            let Some(tr) = t_r(q, r) else { break };
            for (o, _) in arith::factorize(tr) {
                if o <= floor {
                    continue;
                }
                if let (Ok(ea), Ok(eb)) = (e_value(a.0, a.1, o), e_value(b.0, b.1, o)) {
                    if ea.value != eb.value {
                        return Ok(o);
                    }
                }
            }
        }
    }
    Err(Error::NotAProofCase(
        "no prime divisor of t_r separates the pair".into(),
    ))
}

/// `t_r = (q^r − 1)/(q − 1)`, if it fits in 64 bits.
pub fn t_r(q: u64, r: u64) -> Option<u64> {
    let qr = (q as u128).checked_pow(r as u32)?;
    u64::try_from((qr - 1) / (q as u128 - 1)).ok()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Distinguished,
    ExceptionalPair,
    NotFoundWithinBound,
}

#[derive(Clone, Debug, Serialize)]
pub struct DistinguishReport {
    pub pair: [(Family, u64); 2],
    pub verdict: Verdict,
    pub witness_o: Option<u64>,
    /// `witness` when the explicit construction succeeded, `sweep` otherwise.
    pub source: Option<&'static str>,
    #[serde(serialize_with = "ser_opt_big")]
    pub e1: Option<BigUint>,
    #[serde(serialize_with = "ser_opt_big")]
    pub e2: Option<BigUint>,
    pub note: Option<String>,
}

fn ser_opt_big<S: serde::Serializer>(
    v: &Option<BigUint>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(b) => ser_big(b, s),
        None => s.serialize_none(),
    }
}

/// Finds an `o` at which `e_{G_1}(o) ≠ e_{G_2}(o)`: the explicit witness first,
/// then ascending admissible `o ≤ o_bound`.
pub fn distinguish(a: Group, b: Group, o_bound: u64) -> DistinguishReport {
    let mut rep = DistinguishReport {
        pair: [a, b],
        verdict: Verdict::NotFoundWithinBound,
        witness_o: None,
        source: None,
        e1: None,
        e2: None,
        note: None,
    };
    if is_bilinear(a.0) && is_bilinear(b.0) && a.0 != b.0 && a.1 == b.1 {
        rep.verdict = Verdict::ExceptionalPair;
        rep.note = Some(if a.1.is_multiple_of(2) {
            "Sp_{2m}(q) ≅ GO_{2m+1}(q) for even q".into()
        } else {
            "symplectic vs orthogonal over the same odd q is left open".into()
        });
        return rep;
    }
    let try_o = |o: u64| -> Option<(BigUint, BigUint)> {
        let ea = e_value(a.0, a.1, o).ok()?;
        let eb = e_value(b.0, b.1, o).ok()?;
        (ea.value != eb.value).then_some((ea.value, eb.value))
    };
    if let Ok(o) = witness_o(a, b) {
        if let Some((x, y)) = try_o(o) {
            rep.verdict = Verdict::Distinguished;
            rep.witness_o = Some(o);
            rep.source = Some("witness");
            rep.e1 = Some(x);
            rep.e2 = Some(y);
            return rep;
        }
    }
    for o in 1..=o_bound {
        if let Some((x, y)) = try_o(o) {
            rep.verdict = Verdict::Distinguished;
            rep.witness_o = Some(o);
            rep.source = Some("sweep");
            rep.e1 = Some(x);
            rep.e2 = Some(y);
            return rep;
        }
    }
    rep
}

#[derive(Clone, Debug, Serialize)]
pub struct TrRow {
    pub r: u64,
    pub t_r: u64,
    /// Smallest prime factor of `t_r` above the threshold.
    pub prime_above: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrTable {
    pub q: u64,
    pub rows: Vec<TrRow>,
    /// `(r, s, gcd(t_r, t_s))` for primes `r < s`.
    pub gcds: Vec<(u64, u64, u64)>,
}

impl TrTable {
    pub fn pairwise_coprime(&self) -> bool {
        self.gcds.iter().all(|&(_, _, g)| g == 1)
    }
}

pub fn t_r_table(q: u64, r_max: u64, threshold: u64) -> Result<TrTable> {
    if q < 2 {
        return Err(Error::NotPrime(q));
    }
    let mut rows = Vec::new();
    for r in (2..=r_max).filter(|&r| arith::is_prime(r)) {
        let t = t_r(q, r).ok_or(Error::DegreeTooLarge { p: q, k: r as u32 })?;
        let prime_above = arith::prime_divisors(t)
            .into_iter()
            .find(|&x| x > threshold);
        rows.push(TrRow {
            r,
            t_r: t,
            prime_above,
        });
    }
    let mut gcds = Vec::new();
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            gcds.push((a.r, b.r, a.t_r.gcd(&b.t_r)));
        }
    }
    Ok(TrTable { q, rows, gcds })
}

// ---- oracle ----

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub family: Family,
    pub q: u64,
    pub o: u64,
    pub e: u64,
    pub n: usize,
    pub form: Option<String>,
    /// `(χ, c_χ)` of the realized element.
    pub assignment: Vec<(String, usize)>,
    /// Blocks too small to see themselves (flagged; assignments avoid them).
    pub flagged: Vec<String>,
    /// `gcd(o, |Z|) ≠ 1`: outside the closed forms' hypotheses.
    pub outside_hypotheses: bool,
    pub elements: usize,
    pub checks_passed: bool,
}

/// A unit of the multiplicity assignment: a self-dual χ, or a pair `{χ, χ*}`.
struct Unit {
    polys: Vec<Poly>,
    deg: usize,
    /// ±1 in a symplectic space: even multiplicity.
    even: bool,
    /// GL_1(2): multiplicity one is blind.
    avoid_one: bool,
}

/// Brute-force `e_G(o)`: realizes an element of order dividing `o` with
/// pairwise-distinct multiplicities and trivial `stab_Z(q(g))`, then computes
/// the exponent of its conformal double centralizer modulo `Z`.
pub fn e_oracle(
    family: Family,
    q: u64,
    o: u64,
    n_budget: usize,
    max_enum: u64,
) -> Result<OracleReport> {
    let (p, k) = check_q(q)?;
    if o == 0 || o.is_multiple_of(p) {
        return Err(Error::OrderDivisibleByP { o, p });
    }
    if family == Family::PGO && p == 2 {
        return Err(Error::UnsupportedCharacteristic(
            "orthogonal oracle needs odd q".into(),
        ));
    }
    let field = make_field(p, k * family.field_degree())?;
    let kind = match family {
        Family::PGL => None,
        Family::PSp => Some(FormKind::Symplectic),
        Family::PGO => Some(FormKind::OrthogonalPlus),
        Family::PGU => Some(FormKind::Unitary),
    };
    let sp = kind.map_or(0, |k| k.sigma_power());
    let divisors = poly::divisors_of_cyclotomic(&field, o, FieldElem::ONE)?;
    let mut units: Vec<Unit> = Vec::new();
    for chi in &divisors {
        let dual = if kind.is_some() {
            chi.dual(sp)?
        } else {
            chi.clone()
        };
        if dual < *chi {
            continue;
        }
        let deg = chi.deg();
        let scalar = deg == 1 && dual == *chi;
        units.push(Unit {
            polys: if dual == *chi {
                vec![chi.clone()]
            } else {
                vec![chi.clone(), dual]
            },
            deg,
            even: kind == Some(FormKind::Symplectic) && scalar,
            avoid_one: kind.is_none() && field.q().pow(deg as u32) == 2,
        });
    }
    let z = central::z_group(kind, &field);
    let outside = arith::gcd(o, z.len() as u64) != 1;
    let mut tried = 0usize;
    for mults in assignments(&units, n_budget) {
        let n: usize = units
            .iter()
            .zip(&mults)
            .map(|(u, &c)| c * u.deg * u.polys.len())
            .sum();
        let mut tuple = InvariantTuple::new(n);
        for (u, &c) in units.iter().zip(&mults) {
            for chi in &u.polys {
                tuple.insert(chi.clone(), 1, c);
            }
        }
        let mut stab = Vec::new();
        for &x in &z {
            if central::act_on_tuple(&tuple, x)? == tuple {
                stab.push(x);
            }
        }
        tried += 1;
        if stab.len() != 1 {
            continue;
        }
        let (st, form_name) = match kind {
            None => {
                let g = linalg::realize_invariant(&field, n, &tuple)?;
                (central::structure_gl(&g)?, None)
            }
            Some(k) => match realize_for(k, &field, n, &tuple) {
                Ok(r) => {
                    let name = r.form.descriptor();
                    (central::structure_of_realization(&r)?, Some(name))
                }
                Err(Error::KindMismatch(_)) => continue,
                Err(e) => return Err(e),
            },
        };
        let rep = central::double_centralizer(&st, true, max_enum)?;
        let e = rep.exponent_mod_center.ok_or(Error::NotAbelian)?;
        return Ok(OracleReport {
            family,
            q,
            o,
            e,
            n,
            form: form_name,
            assignment: tuple
                .entries
                .iter()
                .map(|(k, &c)| (k.irr.to_csv(), c))
                .collect(),
            flagged: rep.flagged.clone(),
            outside_hypotheses: outside,
            elements: rep.element_count.unwrap_or(0),
            checks_passed: rep.all_checks_pass() && rep.block_scalar,
        });
    }
    if tried == 0 {
        return Err(Error::BudgetExceeded {
            needed: format!("n > {n_budget}"),
            budget: n_budget as u64,
        });
    }
    Err(Error::StabilizerNotTrivial)
}

/// Orthogonal forms: the odd kind for odd `n`, else whichever of ± the tuple forces.
fn realize_for(
    kind: FormKind,
    field: &Field,
    n: usize,
    tuple: &InvariantTuple,
) -> Result<forms::Realization> {
    let kinds: Vec<FormKind> = if kind.is_orthogonal() {
        if n % 2 == 1 {
            vec![FormKind::OrthogonalOdd]
        } else {
            vec![FormKind::OrthogonalPlus, FormKind::OrthogonalMinus]
        }
    } else {
        vec![kind]
    };
    let mut last = Error::KindMismatch("no kind".into());
    for k in kinds {
        let form = forms::standard_form(k, field, n)?;
        match forms::realize_isometry(&form, tuple) {
            Ok(r) => return Ok(r),
            Err(e @ Error::KindMismatch(_)) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Pairwise-distinct multiplicity vectors satisfying the parity rules, by
/// increasing dimension, then lexicographically.
fn assignments(units: &[Unit], n_budget: usize) -> Vec<Vec<usize>> {
    let m = units.len();
    let cap = 2 * m + 2;
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    fn rec(
        units: &[Unit],
        cap: usize,
        budget: usize,
        used: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let i = cur.len();
        if i == units.len() {
            out.push(cur.clone());
            return;
        }
        let u = &units[i];
        for c in 1..=cap {
            if cur.contains(&c) || (u.even && c % 2 == 1) || (u.avoid_one && c == 1) {
                continue;
            }
            let add = c * u.deg * u.polys.len();
            if used + add > budget {
                break;
            }
            cur.push(c);
            rec(units, cap, budget, used + add, cur, out);
            cur.pop();
        }
    }
    rec(units, cap, n_budget, 0, &mut cur, &mut out);
    out.sort_by_key(|v| {
        (
            units
                .iter()
                .zip(v)
                .map(|(u, &c)| c * u.deg * u.polys.len())
                .sum::<usize>(),
            v.clone(),
        )
    });
    out
}

/// Default `n` ceiling for the oracle.
pub const DEFAULT_N_BUDGET: usize = 24;

/// The oracle with default budgets.
pub fn e_oracle_default(family: Family, q: u64, o: u64) -> Result<OracleReport> {
    e_oracle(family, q, o, DEFAULT_N_BUDGET, DEFAULT_MAX_ENUM)
}
