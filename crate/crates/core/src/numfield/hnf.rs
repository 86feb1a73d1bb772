//! Integer matrices: Hermite and Smith normal forms with unimodular transforms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type ZMatrix = Vec<Vec<BigInt>>;

pub fn identity(n: usize) -> ZMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

pub fn from_i64(rows: &[Vec<i64>]) -> ZMatrix {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

pub fn mat_mul(a: &ZMatrix, b: &ZMatrix) -> ZMatrix {
    let n = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| row.iter().zip(b.iter()).map(|(x, br)| x * &br[j]).sum())
                .collect()
        })
        .collect()
}

/// `(g, s, t)` with `s*a + t*b = g >= 0`.
fn xgcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (BigInt::one(), BigInt::zero());
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = r0.div_floor(&r1);
        let r = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r);
        let s = &s0 - &q * &s1;
        s0 = std::mem::replace(&mut s1, s);
        let t = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t);
    }
    if r0.is_negative() {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Replace rows `(r, i)` by `(s*r + t*i, -v*r + u*i)`; a unimodular step.
fn combine_rows(m: &mut ZMatrix, r: usize, i: usize, s: &BigInt, t: &BigInt, u: &BigInt, v: &BigInt) {
    let (a, b) = (m[r].clone(), m[i].clone());
    m[r] = a.iter().zip(&b).map(|(x, y)| s * x + t * y).collect();
    m[i] = a.iter().zip(&b).map(|(x, y)| u * y - v * x).collect();
}

/// Row-style Hermite normal form.
///
/// Returns `(h, u)` with `u * a = h`, `u` unimodular. Nonzero rows of `h`
/// come first, pivots are positive and the entries above each pivot lie in
/// `[0, pivot)`.
pub fn hnf(a: &ZMatrix) -> (ZMatrix, ZMatrix) {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut h = a.clone();
    let mut u = identity(m);
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        for i in r + 1..m {
            if h[i][c].is_zero() {
                continue;
            }
            let (g, s, t) = xgcd(&h[r][c], &h[i][c]);
            let uu = &h[r][c] / &g;
            let vv = &h[i][c] / &g;
            combine_rows(&mut h, r, i, &s, &t, &uu, &vv);
            combine_rows(&mut u, r, i, &s, &t, &uu, &vv);
        }
        if h[r][c].is_zero() {
            continue;
        }
        if h[r][c].is_negative() {
            h[r].iter_mut().for_each(|x| *x = -x.clone());
            u[r].iter_mut().for_each(|x| *x = -x.clone());
        }
        for i in 0..r {
            let q = h[i][c].div_floor(&h[r][c]);
            if q.is_zero() {
                continue;
            }
            let (hr, ur) = (h[r].clone(), u[r].clone());
            h[i].iter_mut().zip(&hr).for_each(|(x, y)| *x -= &q * y);
            u[i].iter_mut().zip(&ur).for_each(|(x, y)| *x -= &q * y);
        }
        r += 1;
    }
    (h, u)
}

/// Nonzero rows of the HNF: a canonical basis of the row lattice.
pub fn lattice_basis(a: &ZMatrix) -> ZMatrix {
    let (h, _) = hnf(a);
    h.into_iter().filter(|row| row.iter().any(|x| !x.is_zero())).collect()
}

/// Index of a full-rank square lattice in `Z^n` (`|det|`), or zero when the
/// rows do not span a full-rank lattice.
pub fn lattice_index(a: &ZMatrix) -> BigInt {
    let n = a.first().map_or(0, |r| r.len());
    let basis = lattice_basis(a);
    if basis.len() != n {
        return BigInt::zero();
    }
    (0..n).map(|i| basis[i][i].clone()).product()
}

/// Pivot column of each row of an HNF basis.
pub fn pivots(basis: &ZMatrix) -> Vec<usize> {
    basis
        .iter()
        .map(|row| row.iter().position(|x| !x.is_zero()).expect("nonzero row"))
        .collect()
}

/// Integer coefficients `c` with `c * basis = v`, if `v` lies in the lattice
/// spanned by the HNF `basis`.
pub fn solve_in_lattice(basis: &ZMatrix, v: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut rest = v.to_vec();
    let mut coeffs = Vec::with_capacity(basis.len());
    for (row, &p) in basis.iter().zip(pivots(basis).iter()) {
        if rest[..p].iter().any(|x| !x.is_zero()) {
            return None;
        }
        let (q, r) = rest[p].div_rem(&row[p]);
        if !r.is_zero() {
            return None;
        }
        rest.iter_mut().zip(row).for_each(|(x, y)| *x -= &q * y);
        coeffs.push(q);
    }
    if rest.iter().all(|x| x.is_zero()) {
        Some(coeffs)
    } else {
        None
    }
}

/// Reduce `v` modulo the lattice so each pivot coordinate lies in `[0, pivot)`.
pub fn reduce_mod_lattice(basis: &ZMatrix, v: &[BigInt]) -> Vec<BigInt> {
    let mut out = v.to_vec();
    for (row, &p) in basis.iter().zip(pivots(basis).iter()) {
        let q = out[p].div_floor(&row[p]);
        out.iter_mut().zip(row).for_each(|(x, y)| *x -= &q * y);
    }
    out
}

pub fn transpose(a: &ZMatrix) -> ZMatrix {
    let n = a.first().map_or(0, |r| r.len());
    (0..n).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Smith normal form: `(d, u, v)` with `u * a * v = diag(d)` (rectangular),
/// `u`, `v` unimodular, each `d[i]` dividing `d[i+1]`, zeros last.
pub fn snf(a: &ZMatrix) -> (Vec<BigInt>, ZMatrix, ZMatrix) {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut s = a.clone();
    let mut u = identity(m);
    let mut v = identity(n);
    let k = m.min(n);
    for t in 0..k {
        loop {
            // smallest nonzero entry in the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    if !s[i][j].is_zero()
                        && best.is_none_or(|(bi, bj)| s[i][j].abs() < s[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            s.swap(t, bi);
            u.swap(t, bi);
            for row in s.iter_mut() {
                row.swap(t, bj);
            }
            for row in v.iter_mut() {
                row.swap(t, bj);
            }
            let mut clean = true;
            for i in t + 1..m {
                let q = s[i][t].div_floor(&s[t][t]);
                if !q.is_zero() {
                    let (st, ut) = (s[t].clone(), u[t].clone());
                    s[i].iter_mut().zip(&st).for_each(|(x, y)| *x -= &q * y);
                    u[i].iter_mut().zip(&ut).for_each(|(x, y)| *x -= &q * y);
                }
                if !s[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let q = s[t][j].div_floor(&s[t][t]);
                if !q.is_zero() {
                    for i in 0..m {
                        let y = s[i][t].clone();
                        s[i][j] -= &q * y;
                    }
                    for i in 0..n {
                        let y = v[i][t].clone();
                        v[i][j] -= &q * y;
                    }
                }
                if !s[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility: fold a row with a non-multiple into row t
            let mut bad = None;
            'scan: for i in t + 1..m {
                for j in t + 1..n {
                    if !(&s[i][j] % &s[t][t]).is_zero() {
                        bad = Some(i);
                        break 'scan;
                    }
                }
            }
            match bad {
                Some(i) => {
                    let (si, ui) = (s[i].clone(), u[i].clone());
                    s[t].iter_mut().zip(&si).for_each(|(x, y)| *x += y);
                    u[t].iter_mut().zip(&ui).for_each(|(x, y)| *x += y);
                }
                None => break,
            }
        }
        if s[t][t].is_negative() {
            s[t].iter_mut().for_each(|x| *x = -x.clone());
            u[t].iter_mut().for_each(|x| *x = -x.clone());
        }
    }
    let d = (0..k).map(|i| s[i][i].clone()).collect();
    (d, u, v)
}

/// Inverse of a unimodular matrix.
pub fn unimodular_inverse(a: &ZMatrix) -> ZMatrix {
    // HNF of a unimodular matrix is the identity, so the transform is a^{-1}
    let (h, u) = hnf(a);
    debug_assert_eq!(h, identity(a.len()));
    u
}
