//! Factorization of rational polynomials into irreducibles over the integers.
//!
//! Candidate factor degrees are restricted by distinct-degree factorization
//! modulo a handful of primes. Factors are then recovered from certified
//! root enclosures: a subset `S` of the complex roots of a primitive `g`
//! yields a factor iff `lc(g) * prod_{r in S} (t - r)` has integer
//! coefficients, and every candidate is confirmed by exact division.

use super::interval::{Dyadic, Interval};
use super::poly::QPoly;
use super::roots::{isolate, RootBox};
use crate::error::Result;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeSet;

/// Irreducible factors over the rationals as primitive integer polynomials
/// (positive leading coefficient) with multiplicities. Constant polynomials
/// have no factors.
pub fn factor(f: &QPoly, cap: u32) -> Result<Vec<(QPoly, usize)>> {
    let mut out = Vec::new();
    for (sq, mult) in f.squarefree_decomposition() {
        for g in factor_squarefree(&sq.primitive_int(), cap)? {
            out.push((QPoly::from_bigints(&g), mult));
        }
    }
    out.sort_by(|a, b| a.0.deg().cmp(&b.0.deg()).then_with(|| format!("{}", a.0).cmp(&format!("{}", b.0))));
    Ok(out)
}

/// True iff `f` (nonconstant) is irreducible over the rationals.
pub fn is_irreducible(f: &QPoly, cap: u32) -> Result<bool> {
    if f.is_constant() {
        return Ok(false);
    }
    let fs = factor(f, cap)?;
    Ok(fs.len() == 1 && fs[0].1 == 1)
}

fn factor_squarefree(g: &[BigInt], cap: u32) -> Result<Vec<Vec<BigInt>>> {
    let n = g.len().saturating_sub(1);
    if n <= 1 {
        return Ok(vec![g.to_vec()]);
    }
    if g[0].is_zero() {
        let rest: Vec<BigInt> = g[1..].to_vec();
        let mut v = vec![vec![BigInt::zero(), BigInt::one()]];
        v.extend(factor_squarefree(&rest, cap)?);
        return Ok(v);
    }
    let allowed = allowed_degrees(g);
    if allowed.is_empty() {
        return Ok(vec![g.to_vec()]);
    }
    recombine(g, &allowed, cap)
}

// ---------- distinct-degree factorization modulo small primes ----------

fn mod_p(g: &[BigInt], p: u64) -> Vec<u64> {
    let pb = BigInt::from(p);
    let mut v: Vec<u64> = g.iter().map(|c| c.mod_floor(&pb).to_u64().unwrap()).collect();
    trim(&mut v);
    v
}

fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % p;
        }
        a = a * a % p;
        e >>= 1;
    }
    r
}

fn pmul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut c = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            c[i + j] = (c[i + j] + x * y) % p;
        }
    }
    trim(&mut c);
    c
}

fn pdivrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let mut r = a.to_vec();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let db = b.len() - 1;
    let inv = inv_mod(b[db], p);
    let mut q = vec![0u64; r.len() - db];
    for i in (db..r.len()).rev() {
        let t = r[i] * inv % p;
        if t == 0 {
            continue;
        }
        q[i - db] = t;
        for (j, &bj) in b.iter().enumerate() {
            let k = i - db + j;
            r[k] = (r[k] + p - t * bj % p) % p;
        }
    }
    r.truncate(db);
    trim(&mut r);
    trim(&mut q);
    (q, r)
}

fn pgcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    while !b.is_empty() {
        let r = pdivrem(&a, &b, p).1;
        a = b;
        b = r;
    }
    if let Some(&l) = a.last() {
        let inv = inv_mod(l, p);
        for x in a.iter_mut() {
            *x = *x * inv % p;
        }
    }
    a
}

fn pderiv(a: &[u64], p: u64) -> Vec<u64> {
    let mut d: Vec<u64> = a.iter().enumerate().skip(1).map(|(i, &c)| (i as u64 % p) * c % p).collect();
    trim(&mut d);
    d
}

fn psub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut c: Vec<u64> = (0..n)
        .map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0)) % p)
        .collect();
    trim(&mut c);
    c
}

fn ppowmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut r = vec![1u64];
    let mut b = pdivrem(base, m, p).1;
    while e > 0 {
        if e & 1 == 1 {
            r = pdivrem(&pmul(&r, &b, p), m, p).1;
        }
        b = pdivrem(&pmul(&b, &b, p), m, p).1;
        e >>= 1;
    }
    r
}

/// Degrees of the irreducible factors of `g mod p`, or `None` if `p` is bad.
fn ddf_degrees(g: &[BigInt], p: u64) -> Option<Vec<usize>> {
    let n = g.len() - 1;
    let f = mod_p(g, p);
    if f.len() != n + 1 {
        return None;
    }
    if pgcd(&f, &pderiv(&f, p), p).len() != 1 {
        return None;
    }
    let mut f = f;
    let mut degs = Vec::new();
    let x = vec![0u64, 1];
    let mut h = x.clone();
    let mut i = 1;
    while f.len() > 2 * i {
        h = ppowmod(&h, p, &f, p);
        let d = pgcd(&psub(&h, &x, p), &f, p);
        let dd = d.len() - 1;
        if dd > 0 {
            for _ in 0..dd / i {
                degs.push(i);
            }
            f = pdivrem(&f, &d, p).0;
            h = pdivrem(&h, &f, p).1;
        }
        i += 1;
    }
    if f.len() > 1 {
        degs.push(f.len() - 1);
    }
    Some(degs)
}

fn subset_sums(degs: &[usize], n: usize) -> BTreeSet<usize> {
    let mut reach = vec![false; n + 1];
    reach[0] = true;
    for &d in degs {
        for s in (d..=n).rev() {
            if reach[s - d] {
                reach[s] = true;
            }
        }
    }
    (1..n).filter(|&s| reach[s]).collect()
}

fn small_primes() -> impl Iterator<Item = u64> {
    (3u64..).filter(|&k| (2..).take_while(|d| d * d <= k).all(|d| k % d != 0))
}

/// Proper factor degrees (at most half the degree) compatible with the
/// factorization pattern modulo several primes.
fn allowed_degrees(g: &[BigInt]) -> BTreeSet<usize> {
    let n = g.len() - 1;
    let mut allowed: BTreeSet<usize> = (1..n).collect();
    let mut good = 0;
    for p in small_primes().take(60) {
        if let Some(d) = ddf_degrees(g, p) {
            let s = subset_sums(&d, n);
            allowed = allowed.intersection(&s).copied().collect();
            good += 1;
            if allowed.is_empty() || good >= 8 {
                break;
            }
        }
    }
    allowed.into_iter().filter(|&d| 2 * d <= n).collect()
}

// ---------- recombination from certified roots ----------

/// Real interval polynomial, low degree first.
type IPoly = Vec<Interval>;

fn ipoly_mul(a: &IPoly, b: &IPoly, p: u32) -> IPoly {
    let mut c = vec![Interval::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            c[i + j] = c[i + j].add(&x.mul(y, p), p);
        }
    }
    c
}

/// One real root gives a linear factor, a conjugate pair a real quadratic.
fn unit_factor(u: &[RootBox], p: u32) -> IPoly {
    if u.len() == 1 {
        vec![u[0].value.re.neg(), Interval::from_i64(1)]
    } else {
        let z = &u[0].value;
        let s = z.re.add(&z.re, p);
        let n = z.norm_sqr(p);
        vec![n, s.neg(), Interval::from_i64(1)]
    }
}

enum Probe {
    Integer(Vec<BigInt>),
    NotInteger,
    Undecided,
}

fn probe(poly: &IPoly, lc: &BigInt, p: u32) -> Probe {
    let half = Dyadic::new(BigInt::one(), -1);
    let scale = Interval::from_int(lc);
    let mut out = Vec::with_capacity(poly.len());
    // test the constant term first: it rejects most subsets
    let order = std::iter::once(0).chain(1..poly.len());
    let mut vals = vec![BigInt::zero(); poly.len()];
    for i in order {
        let c = poly[i].mul(&scale, p);
        let lo = c.lo.to_rational().ceil().to_integer();
        let hi = c.hi.to_rational().floor().to_integer();
        if lo > hi {
            return Probe::NotInteger;
        }
        if c.width() >= half {
            return Probe::Undecided;
        }
        vals[i] = lo;
    }
    out.extend(vals);
    Probe::Integer(out)
}

fn exact_divides(g: &[BigInt], h: &[BigInt]) -> Option<Vec<BigInt>> {
    let (q, r) = QPoly::from_bigints(g).div_rem(&QPoly::from_bigints(h));
    if r.is_zero() && q.is_integral() {
        Some(q.coeffs().iter().map(|c| c.to_integer()).collect())
    } else {
        None
    }
}

fn primitive(v: &[BigInt]) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |a, x| a.gcd(x));
    let mut out: Vec<BigInt> = v.iter().map(|x| x / &g).collect();
    if out.last().is_some_and(|x| x.is_negative()) {
        out.iter_mut().for_each(|x| *x = -x.clone());
    }
    out
}

struct Search<'a> {
    units: &'a [Vec<RootBox>],
    lc: BigInt,
    g: Vec<BigInt>,
    target: usize,
    prec: u32,
    undecided: bool,
}

impl Search<'_> {
    /// Depth-first search for a subset of units of total degree `target`
    /// whose product is a factor; returns the chosen unit indices.
    fn dfs(&mut self, start: usize, deg: usize, acc: &IPoly, chosen: &mut Vec<usize>) -> Option<(Vec<usize>, Vec<BigInt>)> {
        if deg == self.target {
            match probe(acc, &self.lc, self.prec) {
                Probe::Integer(v) => {
                    let h = primitive(&v);
                    if h.len() > 1 && exact_divides(&self.g, &h).is_some() {
                        return Some((chosen.clone(), h));
                    }
                }
                Probe::Undecided => self.undecided = true,
                Probe::NotInteger => {}
            }
            return None;
        }
        for i in start..self.units.len() {
            let ud = self.units[i].len();
            if deg + ud > self.target {
                continue;
            }
            let next = ipoly_mul(acc, &unit_factor(&self.units[i], self.prec), self.prec);
            chosen.push(i);
            if let Some(r) = self.dfs(i + 1, deg + ud, &next, chosen) {
                return Some(r);
            }
            chosen.pop();
        }
        None
    }
}

fn recombine(g: &[BigInt], allowed: &BTreeSet<usize>, cap: u32) -> Result<Vec<Vec<BigInt>>> {
    let coeff_bits = g.iter().map(|c| c.bits()).max().unwrap_or(1) as u32;
    let n = g.len() - 1;
    let mut prec = 64 + coeff_bits + 2 * n as u32;
    'restart: loop {
        let roots = isolate(g, prec, cap)?;
        let nreal = roots.iter().filter(|b| b.real).count();
        let npairs = (roots.len() - nreal) / 2;
        let mut units: Vec<Vec<RootBox>> = roots[..nreal].iter().map(|b| vec![b.clone()]).collect();
        for k in 0..npairs {
            units.push(vec![roots[nreal + k].clone(), roots[nreal + npairs + k].clone()]);
        }
        let mut g_cur = g.to_vec();
        let mut factors = Vec::new();
        let mut remaining: Vec<Vec<RootBox>> = units;
        let degs: Vec<usize> = allowed.iter().copied().collect();
        let mut di = 0;
        while di < degs.len() {
            let d = degs[di];
            let cur_deg = g_cur.len() - 1;
            if 2 * d > cur_deg {
                break;
            }
            let mut search = Search {
                units: &remaining,
                lc: g_cur.last().unwrap().clone(),
                g: g_cur.clone(),
                target: d,
                prec,
                undecided: false,
            };
            let one: IPoly = vec![Interval::from_i64(1)];
            let found = search.dfs(0, 0, &one, &mut Vec::new());
            let undecided = search.undecided;
            match found {
                Some((idx, h)) => {
                    g_cur = exact_divides(&g_cur, &h).expect("verified factor");
                    factors.push(h);
                    let mut k = 0;
                    remaining.retain(|_| {
                        let keep = !idx.contains(&k);
                        k += 1;
                        keep
                    });
                    // same degree may occur again
                }
                None if undecided => {
                    prec *= 2;
                    if prec > cap {
                        return Err(crate::error::Error::PrecisionCapExceeded(cap));
                    }
                    continue 'restart;
                }
                None => di += 1,
            }
        }
        if g_cur.len() > 1 {
            factors.push(primitive(&g_cur));
        }
        return Ok(factors);
    }
}

/// Rational roots of `f` (without multiplicity).
pub fn rational_roots(f: &QPoly, cap: u32) -> Result<Vec<BigRational>> {
    Ok(factor(f, cap)?
        .into_iter()
        .filter(|(g, _)| g.deg() == 1)
        .map(|(g, _)| -g.coeff(0) / g.coeff(1))
        .collect())
}
