#![allow(dead_code)]
//! Oracles and fixtures shared by the integration tests.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use pep_core::matrixk::MatrixK;
use pep_core::numfield::{Field, FieldElement, NumberField};
use std::collections::BTreeSet;
use std::sync::OnceLock;

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn sqrt2() -> Field {
    static K: OnceLock<Field> = OnceLock::new();
    K.get_or_init(|| NumberField::with_symbol(&[-2, 0, 1], "s").unwrap()).clone()
}

pub fn cubic() -> Field {
    // discriminant -23
    static K: OnceLock<Field> = OnceLock::new();
    K.get_or_init(|| NumberField::with_symbol(&[-1, -1, 0, 1], "t").unwrap()).clone()
}

pub fn rationals() -> Field {
    static K: OnceLock<Field> = OnceLock::new();
    K.get_or_init(NumberField::rationals).clone()
}

pub fn element(k: &Field, num: &[i64], den: i64) -> FieldElement {
    let coords: Vec<BigRational> = (0..k.degree()).map(|i| q(num.get(i).copied().unwrap_or(0), den)).collect();
    k.from_power_coords(&coords)
}

pub fn random_matrix(k: &Field, rows: &[Vec<(i64, i64)>]) -> MatrixK {
    let entries = rows.iter().map(|r| r.iter().map(|&(a, b)| element(k, &[a, b], 1)).collect()).collect();
    MatrixK::new(k, entries).unwrap()
}

/// `P J P^-1` with `J` in Jordan form; `P` is replaced by the identity when
/// singular.
pub fn conjugated(k: &Field, p: MatrixK, eig: &[(i64, i64)], chain: &[bool]) -> MatrixK {
    let n = p.dim();
    let p = if p.is_invertible() { p } else { MatrixK::identity(k, n) };
    let mut rows = vec![vec![k.zero(); n]; n];
    for i in 0..n {
        let (a, b) = eig[i];
        let lambda = element(k, &[a, b], 1);
        rows[i][i] = if lambda.is_zero() { k.one() } else { lambda };
    }
    for i in 0..n - 1 {
        if chain[i] {
            rows[i + 1][i + 1] = rows[i][i].clone();
            rows[i][i + 1] = k.one();
        }
    }
    let j = MatrixK::new(k, rows).unwrap();
    p.mul(&j).mul(&p.inverse().unwrap())
}

/// Naive S-unit scan: every ordered tuple, then canonicalized.
pub fn naive_evertse(primes: &[i64], e: usize, bound: i64, c: (u32, u32)) -> BTreeSet<Vec<String>> {
    let mut units = Vec::new();
    let mut exps = vec![-bound; primes.len()];
    loop {
        let mut x = BigRational::one();
        for (p, k) in primes.iter().zip(&exps) {
            let pk = num_traits::pow(BigRational::from_integer(BigInt::from(*p)), k.unsigned_abs() as usize);
            x = if *k >= 0 { x * pk } else { x / pk };
        }
        units.push(x.clone());
        units.push(-x);
        let mut i = 0;
        while i < exps.len() && exps[i] == bound {
            exps[i] = -bound;
            i += 1;
        }
        if i == exps.len() {
            break;
        }
        exps[i] += 1;
    }
    let height = |x: &BigRational| x.numer().abs().max(x.denom().clone());
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; e];
    loop {
        let t: Vec<&BigRational> = idx.iter().map(|&i| &units[i]).collect();
        let nondegenerate = (1u32..(1 << e)).all(|mask| {
            let s: BigRational = (0..e).filter(|i| mask >> i & 1 == 1).map(|i| t[i].clone()).sum();
            !s.is_zero()
        });
        if nondegenerate {
            let sum: BigRational = t.iter().copied().sum();
            let prod: BigInt = t.iter().map(|x| height(x)).product();
            if num_traits::pow(height(&sum), c.1 as usize) < num_traits::pow(prod, c.0 as usize) {
                let mut a: Vec<BigRational> = t.iter().map(|x| (*x).clone()).collect();
                let mut b: Vec<BigRational> = a.iter().map(|x| -x).collect();
                a.sort_by(|x, y| y.cmp(x));
                b.sort_by(|x, y| y.cmp(x));
                let canon = if a >= b { a } else { b };
                out.insert(canon.iter().map(|x| x.to_string()).collect());
            }
        }
        let mut i = 0;
        while i < e && idx[i] + 1 == units.len() {
            idx[i] = 0;
            i += 1;
        }
        if i == e {
            break;
        }
        idx[i] += 1;
    }
    out
}

/// Count `SL_2(Z)` matrices of sup-norm at most `t` through primitive rows.
pub fn sl2_by_rows(t: i64) -> u64 {
    let mut total = 0u64;
    for a in -t..=t {
        for b in -t..=t {
            let g = a.extended_gcd(&b);
            if g.gcd != 1 {
                continue;
            }
            // a * d0 - b * c0 = 1
            let (d0, c0) = (g.x, -g.y);
            // c = c0 + k a, d = d0 + k b
            let range = |base: i64, step: i64| -> Option<(i64, i64)> {
                if step == 0 {
                    return if base.abs() <= t { Some((i64::MIN / 4, i64::MAX / 4)) } else { None };
                }
                let (lo, hi) = ((-t - base), (t - base));
                let (lo, hi) = if step > 0 { (lo, hi) } else { (-hi, -lo) };
                let s = step.abs();
                Some((Integer::div_ceil(&lo, &s), Integer::div_floor(&hi, &s)))
            };
            if let (Some(x), Some(y)) = (range(c0, a), range(d0, b)) {
                let (lo, hi) = (x.0.max(y.0), x.1.min(y.1));
                if hi >= lo {
                    total += (hi - lo + 1) as u64;
                }
            }
        }
    }
    total
}

