//! Permutations of `{1, …, n}` (0-indexed internally), acting on the right:
//! `x.(στ) = (x.σ).τ`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::arith::{self, Ratio};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// From 0-indexed images; checks bijectivity.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::parse(1, 1, "images do not form a permutation"));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    /// From 1-indexed cycles on `n` points.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        for c in cycles {
            for (i, &x) in c.iter().enumerate() {
                if x == 0 || x > n || used[x - 1] {
                    return Err(Error::parse(
                        1,
                        1,
                        format!("bad or repeated point {x} in cycle"),
                    ));
                }
                used[x - 1] = true;
                images[x - 1] = c[(i + 1) % c.len()] - 1;
            }
        }
        Permutation::new(images)
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn image(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `self` followed by `o`.
    pub fn then(&self, o: &Permutation) -> Permutation {
        Permutation {
            images: self.images.iter().map(|&x| o.images[x]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.n()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { images: inv }
    }

    pub fn pow(&self, k: usize) -> Permutation {
        let mut r = Permutation::identity(self.n());
        for _ in 0..k {
            r = r.then(self);
        }
        r
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn commutes(&self, o: &Permutation) -> bool {
        self.then(o) == o.then(self)
    }

    /// Cycles (0-indexed), each starting at its least point, ordered by that point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for s in 0..self.n() {
            if seen[s] {
                continue;
            }
            let mut c = vec![s];
            seen[s] = true;
            let mut x = self.images[s];
            while x != s {
                seen[x] = true;
                c.push(x);
                x = self.images[x];
            }
            out.push(c);
        }
        out
    }

    pub fn order(&self) -> u64 {
        self.cycles()
            .iter()
            .fold(1, |acc, c| arith::lcm(acc, c.len() as u64))
    }

    /// Cycle notation with 1-indexed points, fixed points omitted.
    pub fn cycle_string(&self) -> String {
        let s: String = self
            .cycles()
            .into_iter()
            .filter(|c| c.len() > 1)
            .map(|c| {
                format!(
                    "({})",
                    c.iter()
                        .map(|x| (x + 1).to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                )
            })
            .collect();
        if s.is_empty() {
            "()".into()
        } else {
            s
        }
    }

    /// Accepts `n: i1 … in`, `n: (1 2)(3 4)`, or bare cycle notation
    /// (degree = largest point mentioned).
    pub fn parse(text: &str) -> Result<Permutation> {
        let text = text.trim();
        let (n, body, off) = match text.split_once(':') {
            Some((a, b)) => {
                let n: usize = a
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(1, 1, format!("bad degree {:?}", a.trim())))?;
                (Some(n), b, a.len() + 2)
            }
            None => (None, text, 1),
        };
        if body.contains('(') {
            let mut cycles = Vec::new();
            let mut cur: Option<Vec<usize>> = None;
            let mut num = String::new();
            let mut max = 0;
            for (i, ch) in body.char_indices() {
                let col = off + i;
                let flush = |num: &mut String,
                             cur: &mut Option<Vec<usize>>,
                             max: &mut usize|
                 -> Result<()> {
                    if !num.is_empty() {
                        let v: usize =
                            num.parse().map_err(|_| Error::parse(1, col, "bad point"))?;
                        cur.as_mut()
                            .ok_or_else(|| Error::parse(1, col, "point outside a cycle"))?
                            .push(v);
                        *max = (*max).max(v);
                        num.clear();
                    }
                    Ok(())
                };
                match ch {
                    '(' => {
                        if cur.is_some() {
                            return Err(Error::parse(1, col, "nested parenthesis"));
                        }
                        cur = Some(Vec::new());
                    }
                    ')' => {
                        flush(&mut num, &mut cur, &mut max)?;
                        cycles.push(
                            cur.take()
                                .ok_or_else(|| Error::parse(1, col, "unbalanced ')'"))?,
                        );
                    }
                    c if c.is_ascii_digit() => num.push(c),
                    c if c.is_whitespace() || c == ',' => flush(&mut num, &mut cur, &mut max)?,
                    c => return Err(Error::parse(1, col, format!("unexpected {c:?}"))),
                }
            }
            if cur.is_some() {
                return Err(Error::parse(1, off + body.len(), "unterminated cycle"));
            }
            let n = n.unwrap_or(max);
            if max > n {
                return Err(Error::parse(
                    1,
                    off,
                    format!("point {max} exceeds degree {n}"),
                ));
            }
            return Permutation::from_cycles(n, &cycles);
        }
        let n = n.ok_or_else(|| Error::parse(1, 1, "expected \"n: images\" or cycle notation"))?;
        let mut imgs = Vec::with_capacity(n);
        for tok in body.split_whitespace() {
            let col = off + body.find(tok).unwrap_or(0);
            let v: usize = tok
                .parse()
                .map_err(|_| Error::parse(1, col, format!("bad image {tok:?}")))?;
            if v == 0 || v > n {
                return Err(Error::parse(
                    1,
                    col,
                    format!("image {v} out of range 1..={n}"),
                ));
            }
            imgs.push(v - 1);
        }
        if imgs.len() != n {
            return Err(Error::parse(
                1,
                off,
                format!("expected {n} images, found {}", imgs.len()),
            ));
        }
        Permutation::new(imgs)
    }
}

/// `n: i1 … in`, 1-indexed.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.n())?;
        for &x in &self.images {
            write!(f, " {}", x + 1)?;
        }
        Ok(())
    }
}

pub fn hamming(s: &Permutation, t: &Permutation) -> Result<Ratio> {
    if s.n() != t.n() {
        return Err(Error::DegreeMismatch(s.n(), t.n()));
    }
    let d = s
        .images
        .iter()
        .zip(&t.images)
        .filter(|(a, b)| a != b)
        .count();
    Ok(Ratio::new(d as i64, s.n().max(1) as i64))
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CycleInvariants {
    pub n: usize,
    /// `k ↦ c_k` for cycle lengths present.
    pub c: BTreeMap<usize, usize>,
    /// `r_k = |fix(σ^k)|/n`, k = 1..=n.
    pub r: Vec<Ratio>,
    /// `q_k` by Möbius inversion of `r`.
    pub q_mobius: Vec<Ratio>,
    /// `q_k = k·c_k/n` directly.
    pub q_direct: Vec<Ratio>,
}

pub fn cycle_invariants(s: &Permutation) -> CycleInvariants {
    let n = s.n();
    let mut c = BTreeMap::new();
    for cy in s.cycles() {
        *c.entry(cy.len()).or_insert(0) += 1;
    }
    let nn = n.max(1) as i64;
    let r: Vec<Ratio> = (1..=n)
        .map(|k| {
            // a point is fixed by σ^k iff its cycle length divides k
            let fix: usize = c
                .iter()
                .filter(|(&l, _)| k % l == 0)
                .map(|(&l, &m)| l * m)
                .sum();
            Ratio::new(fix as i64, nn)
        })
        .collect();
    let q_mobius = (1..=n)
        .map(|k| {
            arith::divisors(k as u64)
                .into_iter()
                .fold(Ratio::zero(), |acc, d| {
                    acc + r[d as usize - 1] * arith::mobius(k as u64 / d)
                })
        })
        .collect();
    let q_direct = (1..=n)
        .map(|k| Ratio::new((k * c.get(&k).copied().unwrap_or(0)) as i64, nn))
        .collect();
    CycleInvariants {
        n,
        c,
        r,
        q_mobius,
        q_direct,
    }
}

/// `|C_{S_n}(σ)| = ∏_k k^{c_k}·c_k!`.
pub fn centralizer_order(s: &Permutation) -> num_bigint::BigUint {
    let inv = cycle_invariants(s);
    let mut o = num_bigint::BigUint::from(1u32);
    for (&k, &ck) in &inv.c {
        for i in 1..=ck {
            o *= k as u64;
            o *= i as u64;
        }
    }
    o
}

/// All elements of `C_{S_n}(σ)`: each cycle maps onto a cycle of equal
/// length, with a rotation.
pub fn centralizer_elements(s: &Permutation, budget: u64) -> Result<Vec<Permutation>> {
    let ord = centralizer_order(s);
    if ord > num_bigint::BigUint::from(budget) {
        return Err(Error::BudgetExceeded {
            needed: ord.to_string(),
            budget,
        });
    }
    let cycles = s.cycles();
    let mut by_len: BTreeMap<usize, Vec<&Vec<usize>>> = BTreeMap::new();
    for c in &cycles {
        by_len.entry(c.len()).or_default().push(c);
    }
    let mut out = vec![vec![usize::MAX; s.n()]];
    for (&k, cs) in &by_len {
        let m = cs.len();
        let perms = all_perms(m);
        let mut next = Vec::new();
        for partial in &out {
            for pi in &perms {
                // rotations: k^m choices
                let total = (k as u64).pow(m as u32);
                for mut rot in 0..total {
                    let mut img = partial.clone();
                    for (i, src) in cs.iter().enumerate() {
                        let dst = cs[pi[i]];
                        let r = (rot % k as u64) as usize;
                        rot /= k as u64;
                        for (j, &x) in src.iter().enumerate() {
                            img[x] = dst[(j + r) % k];
                        }
                    }
                    next.push(img);
                }
            }
        }
        out = next;
    }
    Ok(out
        .into_iter()
        .map(|images| Permutation { images })
        .collect())
}

fn all_perms(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_perms(m - 1) {
        for pos in 0..m {
            let mut q = p.clone();
            q.insert(pos, m - 1);
            out.push(q);
        }
    }
    out
}

/// Generators of `C(σ)`: a rotation of one cycle per length, and a
/// transposition and a long cycle of the cycles of each length.
pub fn centralizer_generators(s: &Permutation) -> Vec<Permutation> {
    let n = s.n();
    let mut by_len: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    for c in s.cycles() {
        by_len.entry(c.len()).or_default().push(c);
    }
    let mut gens = Vec::new();
    let map_cycles = |pairs: &[(usize, usize)], cs: &[Vec<usize>]| {
        let mut img: Vec<usize> = (0..n).collect();
        for &(a, b) in pairs {
            for (j, &x) in cs[a].iter().enumerate() {
                img[x] = cs[b][j];
            }
        }
        Permutation { images: img }
    };
    for cs in by_len.values() {
        let k = cs[0].len();
        if k > 1 {
            let mut img: Vec<usize> = (0..n).collect();
            for (j, &x) in cs[0].iter().enumerate() {
                img[x] = cs[0][(j + 1) % k];
            }
            gens.push(Permutation { images: img });
        }
        let m = cs.len();
        if m >= 2 {
            gens.push(map_cycles(&[(0, 1), (1, 0)], cs));
            if m >= 3 {
                let pairs: Vec<(usize, usize)> = (0..m).map(|i| (i, (i + 1) % m)).collect();
                gens.push(map_cycles(&pairs, cs));
            }
        }
    }
    gens
}

/// `Z(C(σ))` by exhaustive search over `C(σ)` (n ≤ 10).
pub fn center_of_centralizer(s: &Permutation, budget: u64) -> Result<Vec<Permutation>> {
    if s.n() > 10 {
        return Err(Error::BudgetExceeded {
            needed: format!("degree {}", s.n()),
            budget: 10,
        });
    }
    let gens = centralizer_generators(s);
    let mut z: Vec<Permutation> = centralizer_elements(s, budget)?
        .into_iter()
        .filter(|c| gens.iter().all(|g| c.commutes(g)))
        .collect();
    z.sort();
    Ok(z)
}

/// Predicted `|Z(C(σ))|`: `∏_{c_k ≥ 1} k`, doubled when `c_1 = 2`
/// (then `Z(S_2) = S_2` contributes a `C_2`).
pub fn predicted_center_order(s: &Permutation) -> u64 {
    let inv = cycle_invariants(s);
    let mut o: u64 = inv.c.keys().map(|&k| k as u64).product();
    if inv.c.get(&1) == Some(&2) {
        o *= 2;
    }
    o
}

/// Largest σ-invariant subset of `set` (0-indexed points): the union of
/// cycles lying entirely inside it.
pub fn largest_invariant_subset(s: &Permutation, set: &[usize]) -> Vec<usize> {
    let inside: HashSet<usize> = set.iter().copied().collect();
    let mut t: Vec<usize> = s
        .cycles()
        .into_iter()
        .filter(|c| c.iter().all(|x| inside.contains(x)))
        .flatten()
        .collect();
    t.sort();
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cyc(n: usize, s: &str) -> Permutation {
        Permutation::parse(&format!("{n}: {s}")).unwrap()
    }

    fn random_perm(n: usize, rng: &mut ChaCha8Rng) -> Permutation {
        let mut v: Vec<usize> = (0..n).collect();
        v.shuffle(rng);
        Permutation::new(v).unwrap()
    }

    #[test]
    fn hamming_examples() {
        let id4 = Permutation::identity(4);
        assert_eq!(hamming(&id4, &id4).unwrap(), Ratio::zero());
        assert_eq!(hamming(&cyc(4, "(1 2)"), &id4).unwrap(), Ratio::new(1, 2));
        assert_eq!(
            hamming(&cyc(5, "(1 2 3)(4 5)"), &cyc(5, "(1 2 3)")).unwrap(),
            Ratio::new(2, 5)
        );
        assert_eq!(
            hamming(&id4, &Permutation::identity(3)),
            Err(Error::DegreeMismatch(4, 3))
        );
    }

    #[test]
    fn hamming_bi_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let n = rng.gen_range(1..30);
            let (a, b, c) = (
                random_perm(n, &mut rng),
                random_perm(n, &mut rng),
                random_perm(n, &mut rng),
            );
            let d = hamming(&a, &b).unwrap();
            assert_eq!(hamming(&c.then(&a), &c.then(&b)).unwrap(), d);
            assert_eq!(hamming(&a.then(&c), &b.then(&c)).unwrap(), d);
        }
    }

    #[test]
    fn cycle_invariant_examples() {
        let inv = cycle_invariants(&cyc(5, "(1 2 3)(4 5)"));
        assert_eq!(inv.r[1], Ratio::new(2, 5));
        assert_eq!(inv.r[2], Ratio::new(3, 5));
        assert_eq!(inv.q_mobius[1], Ratio::new(2, 5));
        assert_eq!(inv.q_mobius[2], Ratio::new(3, 5));
        let inv = cycle_invariants(&Permutation::identity(6));
        assert!(inv.r.iter().all(|&r| r == Ratio::new(1, 1)));
        assert_eq!(inv.q_mobius[0], Ratio::new(1, 1));
        assert!(inv.q_mobius[1..].iter().all(|&q| q == Ratio::zero()));
        let inv = cycle_invariants(&cyc(6, "(1 2 3 4 5 6)"));
        for (k, q) in inv.q_mobius.iter().enumerate() {
            assert_eq!(
                *q,
                if k == 5 {
                    Ratio::new(1, 1)
                } else {
                    Ratio::zero()
                }
            );
        }
    }

    #[test]
    fn mobius_matches_direct_and_sums_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=200);
            let inv = cycle_invariants(&random_perm(n, &mut rng));
            assert_eq!(inv.q_mobius, inv.q_direct);
            assert_eq!(
                inv.q_direct.iter().fold(Ratio::zero(), |a, &b| a + b),
                Ratio::new(1, 1)
            );
            // r_k against σ^k directly for small k
            let s = random_perm(n, &mut rng);
            let inv = cycle_invariants(&s);
            for k in 1..=n.min(6) {
                let fix = s
                    .pow(k)
                    .images
                    .iter()
                    .enumerate()
                    .filter(|(i, &x)| *i == x)
                    .count();
                assert_eq!(inv.r[k - 1], Ratio::new(fix as i64, n as i64));
            }
        }
    }

    #[test]
    fn lipschitz_r_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let n = rng.gen_range(2..=200);
            let s = random_perm(n, &mut rng);
            // τ = σ composed with a few random transpositions
            let mut t = s.clone();
            for _ in 0..rng.gen_range(0..4) {
                let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                t.images.swap(a, b);
            }
            let d = hamming(&s, &t).unwrap();
            let (rs, rt) = (cycle_invariants(&s), cycle_invariants(&t));
            for k in 1..=n.min(12) {
                assert!(rs.r[k - 1].abs_diff(rt.r[k - 1]) <= d * k as i64);
            }
        }
    }

    fn brute_centralizer(s: &Permutation) -> usize {
        all_perms(s.n())
            .into_iter()
            .filter(|p| s.commutes(&Permutation { images: p.clone() }))
            .count()
    }

    #[test]
    fn centralizer_order_examples_and_brute_force() {
        assert_eq!(centralizer_order(&Permutation::identity(4)), 24u32.into());
        assert_eq!(centralizer_order(&cyc(4, "(1 2)(3 4)")), 8u32.into());
        assert_eq!(centralizer_order(&cyc(5, "(1 2 3)")), 6u32.into());
        for n in 1..=6 {
            for p in all_perms(n) {
                let s = Permutation { images: p };
                let bf = brute_centralizer(&s);
                assert_eq!(centralizer_order(&s), (bf as u64).into());
                let els = centralizer_elements(&s, 1 << 20).unwrap();
                assert_eq!(els.len(), bf);
                assert!(els.iter().all(|c| c.commutes(&s)));
            }
        }
    }

    fn closure_size(gens: &[Permutation], n: usize) -> usize {
        let mut seen: HashSet<Permutation> = HashSet::new();
        let mut stack = vec![Permutation::identity(n)];
        seen.insert(Permutation::identity(n));
        while let Some(x) = stack.pop() {
            for g in gens {
                let y = x.then(g);
                if seen.insert(y.clone()) {
                    stack.push(y);
                }
            }
        }
        seen.len()
    }

    #[test]
    fn generators_generate_centralizer() {
        for n in 1..=7 {
            for p in all_perms(n).into_iter().step_by(7) {
                let s = Permutation { images: p };
                let gens = centralizer_generators(&s);
                assert_eq!(
                    closure_size(&gens, n) as u64,
                    centralizer_order(&s).try_into().unwrap_or(0u64)
                );
            }
        }
    }

    #[test]
    fn center_examples() {
        let s = cyc(4, "(1 2)(3 4)");
        assert_eq!(
            center_of_centralizer(&s, 1 << 20).unwrap(),
            vec![Permutation::identity(4), s.clone()]
        );
        let s = cyc(5, "(1 2 3 4 5)");
        let z = center_of_centralizer(&s, 1 << 20).unwrap();
        assert_eq!(z.len(), 5);
        assert!(z.contains(&s));
        assert_eq!(
            center_of_centralizer(&Permutation::identity(4), 1 << 20).unwrap(),
            vec![Permutation::identity(4)]
        );
        assert!(matches!(
            center_of_centralizer(&Permutation::identity(11), 1 << 30),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn center_structure_exhaustive_small() {
        // every cycle type of degree ≤ 8: |Z| matches the prediction, Z is
        // abelian and contains the per-length diagonal elements
        for n in 1..=8 {
            let mut types = HashSet::new();
            for p in all_perms(n) {
                let s = Permutation { images: p };
                if !types.insert(cycle_invariants(&s).c) {
                    continue;
                }
                let z = center_of_centralizer(&s, 1 << 20).unwrap();
                assert_eq!(
                    z.len() as u64,
                    predicted_center_order(&s),
                    "{}",
                    s.cycle_string()
                );
                for a in &z {
                    for b in &z {
                        assert!(a.commutes(b));
                    }
                }
                let mut by_len: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
                for c in s.cycles() {
                    by_len.entry(c.len()).or_default().push(c);
                }
                for cs in by_len.values() {
                    let mut img: Vec<usize> = (0..n).collect();
                    for c in cs {
                        for (j, &x) in c.iter().enumerate() {
                            img[x] = c[(j + 1) % c.len()];
                        }
                    }
                    assert!(z.contains(&Permutation { images: img }));
                }
            }
        }
    }

    #[test]
    fn invariant_subset_examples() {
        let all: Vec<usize> = (0..4).collect();
        let s = cyc(4, "(1 2)(3 4)");
        assert_eq!(largest_invariant_subset(&s, &all), all);
        assert_eq!(largest_invariant_subset(&s, &[0, 2, 3]), vec![2, 3]);
        // sharpness: c cycles of length k, s of them punctured once
        for (k, c, sp) in [(3usize, 4usize, 2usize), (5, 3, 1), (2, 6, 6)] {
            let n = k * c;
            let cycles: Vec<Vec<usize>> = (0..c)
                .map(|i| (1..=k).map(|j| i * k + j).collect())
                .collect();
            let s = Permutation::from_cycles(n, &cycles).unwrap();
            let set: Vec<usize> = (0..n).filter(|x| !(x % k == 0 && x / k < sp)).collect();
            let t = largest_invariant_subset(&s, &set);
            assert_eq!(t.len(), n - k * sp);
        }
    }

    #[test]
    fn invariant_subset_bound_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let n = rng.gen_range(1..40);
            let s = random_perm(n, &mut rng);
            let set: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.9)).collect();
            let t = largest_invariant_subset(&s, &set);
            let k = s.order() as i64;
            let lhs = Ratio::new(t.len() as i64, n as i64);
            let rhs =
                Ratio::new(1, 1) - (Ratio::new(1, 1) - Ratio::new(set.len() as i64, n as i64)) * k;
            assert!(lhs >= rhs);
            for &x in &t {
                assert!(t.contains(&s.image(x)));
            }
        }
    }

    #[test]
    fn parse_and_print() {
        let s = Permutation::parse("5: 2 3 1 5 4").unwrap();
        assert_eq!(s, Permutation::parse("(1 2 3)(4 5)").unwrap());
        assert_eq!(s.to_string(), "5: 2 3 1 5 4");
        assert_eq!(Permutation::parse(&s.to_string()).unwrap(), s);
        assert_eq!(s.cycle_string(), "(1 2 3)(4 5)");
        assert_eq!(Permutation::parse("6: (1 2)").unwrap().n(), 6);
        assert!(matches!(
            Permutation::parse("3: 1 1 2"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            Permutation::parse("3: 1 2"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            Permutation::parse("(1 2"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            Permutation::parse("3: (1 4)"),
            Err(Error::Parse { .. })
        ));
    }
}
