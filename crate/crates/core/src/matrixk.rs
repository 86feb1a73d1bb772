//! Square matrices over a number field.

use crate::error::{Error, Result};
use crate::exppoly::{PepSystem, Term};
use crate::heights::{affine_height, HeightValue};
use crate::numfield::{Field, FieldElement, KPoly, NumberField};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::OnceLock;

#[derive(Clone)]
pub struct MatrixK {
    field: Field,
    n: usize,
    a: Vec<Vec<FieldElement>>,
    charpoly: OnceLock<KPoly>,
    minpoly: OnceLock<KPoly>,
}

impl PartialEq for MatrixK {
    fn eq(&self, o: &Self) -> bool {
        self.a == o.a
    }
}

impl Eq for MatrixK {}

impl MatrixK {
    pub fn new(field: &Field, rows: Vec<Vec<FieldElement>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("matrix must be square and nonempty".into()));
        }
        if rows.iter().flatten().any(|x| !NumberField::same(x.field(), field)) {
            return Err(Error::FieldMismatch);
        }
        Ok(Self::raw(field, rows))
    }

    fn raw(field: &Field, a: Vec<Vec<FieldElement>>) -> Self {
        MatrixK { field: field.clone(), n: a.len(), a, charpoly: OnceLock::new(), minpoly: OnceLock::new() }
    }

    pub fn from_ints(field: &Field, rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(field, rows.iter().map(|r| r.iter().map(|&x| field.from_int(x)).collect()).collect())
    }

    pub fn from_rationals(field: &Field, rows: &[Vec<BigRational>]) -> Result<Self> {
        Self::new(field, rows.iter().map(|r| r.iter().map(|x| field.from_rational(x)).collect()).collect())
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        Self::raw(
            field,
            (0..n).map(|i| (0..n).map(|j| if i == j { field.one() } else { field.zero() }).collect()).collect(),
        )
    }

    pub fn zero(field: &Field, n: usize) -> Self {
        Self::raw(field, vec![vec![field.zero(); n]; n])
    }

    pub fn diagonal(field: &Field, d: &[FieldElement]) -> Self {
        let n = d.len();
        Self::raw(
            field,
            (0..n).map(|i| (0..n).map(|j| if i == j { d[i].clone() } else { field.zero() }).collect()).collect(),
        )
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &FieldElement {
        &self.a[i][j]
    }

    pub fn rows(&self) -> &[Vec<FieldElement>] {
        &self.a
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> Vec<FieldElement> {
        self.a.iter().flatten().cloned().collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(&self.field, self.n)
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().flatten().all(|x| x.is_zero())
    }

    pub fn add(&self, o: &MatrixK) -> MatrixK {
        Self::raw(
            &self.field,
            self.a.iter().zip(&o.a).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.add(y)).collect()).collect(),
        )
    }

    pub fn sub(&self, o: &MatrixK) -> MatrixK {
        Self::raw(
            &self.field,
            self.a.iter().zip(&o.a).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.sub(y)).collect()).collect(),
        )
    }

    pub fn scale(&self, c: &FieldElement) -> MatrixK {
        Self::raw(&self.field, self.a.iter().map(|r| r.iter().map(|x| x.mul(c)).collect()).collect())
    }

    pub fn mul(&self, o: &MatrixK) -> MatrixK {
        let n = self.n;
        let mut out = vec![vec![self.field.zero(); n]; n];
        for (i, row) in out.iter_mut().enumerate() {
            for k in 0..n {
                let x = &self.a[i][k];
                if x.is_zero() {
                    continue;
                }
                for (j, cell) in row.iter_mut().enumerate() {
                    if !o.a[k][j].is_zero() {
                        *cell = cell.add(&x.mul(&o.a[k][j]));
                    }
                }
            }
        }
        Self::raw(&self.field, out)
    }

    pub fn trace(&self) -> FieldElement {
        (0..self.n).fold(self.field.zero(), |acc, i| acc.add(&self.a[i][i]))
    }

    /// Inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<MatrixK> {
        let n = self.n;
        let mut a = self.a.clone();
        let mut inv = Self::identity(&self.field, n).a;
        for c in 0..n {
            let p = (c..n).find(|&r| !a[r][c].is_zero()).ok_or(Error::NotInvertible)?;
            a.swap(p, c);
            inv.swap(p, c);
            let pinv = a[c][c].inv()?;
            for j in 0..n {
                a[c][j] = a[c][j].mul(&pinv);
                inv[c][j] = inv[c][j].mul(&pinv);
            }
            for r in 0..n {
                if r == c || a[r][c].is_zero() {
                    continue;
                }
                let f = a[r][c].clone();
                for j in 0..n {
                    a[r][j] = a[r][j].sub(&f.mul(&a[c][j]));
                    inv[r][j] = inv[r][j].sub(&f.mul(&inv[c][j]));
                }
            }
        }
        Ok(Self::raw(&self.field, inv))
    }

    /// Integer power; negative powers need an invertible matrix.
    pub fn pow(&self, k: i64) -> Result<MatrixK> {
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Self::identity(&self.field, self.n);
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b);
            }
        }
        Ok(acc)
    }

    /// Characteristic polynomial `det(tI - M)`.
    pub fn charpoly(&self) -> &KPoly {
        self.charpoly.get_or_init(|| {
            let n = self.n;
            let f = &self.field;
            let mut coeffs = vec![f.zero(); n + 1];
            coeffs[n] = f.one();
            let mut mk = Self::zero(f, n);
            for k in 1..=n {
                mk = self.mul(&mk).add(&Self::identity(f, n).scale(&coeffs[n - k + 1]));
                let tr = self.mul(&mk).trace();
                coeffs[n - k] = tr.neg().scale(&BigRational::new(BigInt::from(1), BigInt::from(k)));
            }
            KPoly::new(f, coeffs)
        })
    }

    /// Minimal polynomial from the first linear dependency among powers.
    pub fn minpoly(&self) -> &KPoly {
        self.minpoly.get_or_init(|| {
            let f = &self.field;
            // reduced rows of vectorized powers, with the combination of powers
            // that produced each one
            let mut basis: Vec<(usize, Vec<FieldElement>, Vec<FieldElement>)> = Vec::new();
            let mut power = Self::identity(f, self.n);
            for k in 0..=self.n {
                let mut v = power.entries();
                let mut comb = vec![f.zero(); k + 1];
                comb[k] = f.one();
                for (piv, row, rc) in &basis {
                    if v[*piv].is_zero() {
                        continue;
                    }
                    let c = v[*piv].clone();
                    for (x, y) in v.iter_mut().zip(row) {
                        *x = x.sub(&c.mul(y));
                    }
                    for (i, y) in rc.iter().enumerate() {
                        comb[i] = comb[i].sub(&c.mul(y));
                    }
                }
                match v.iter().position(|x| !x.is_zero()) {
                    None => return KPoly::new(f, comb),
                    Some(p) => {
                        let inv = v[p].inv().expect("nonzero pivot");
                        let row = v.iter().map(|x| x.mul(&inv)).collect();
                        let rc = comb.iter().map(|x| x.mul(&inv)).collect();
                        basis.push((p, row, rc));
                    }
                }
                power = power.mul(self);
            }
            unreachable!("Cayley-Hamilton bounds the degree")
        })
    }

    pub fn is_invertible(&self) -> bool {
        !self.charpoly().coeff(0).is_zero()
    }

    pub fn is_semisimple(&self) -> bool {
        self.minpoly().is_squarefree()
    }

    pub fn is_unipotent(&self) -> bool {
        let x = self.sub(&Self::identity(&self.field, self.n));
        x.pow(self.n as i64).expect("nonnegative").is_zero()
    }

    /// Evaluate a polynomial at this matrix.
    pub fn eval_poly(&self, p: &KPoly) -> MatrixK {
        let id = Self::identity(&self.field, self.n);
        p.coeffs().iter().rev().fold(Self::zero(&self.field, self.n), |acc, c| acc.mul(self).add(&id.scale(c)))
    }

    /// Basis of the right kernel, one vector per free column of the reduced
    /// row echelon form, with that free coordinate equal to 1.
    pub fn kernel(&self) -> Vec<(usize, Vec<FieldElement>)> {
        let n = self.n;
        let mut a = self.a.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..n {
            let Some(p) = (r..n).find(|&i| !a[i][c].is_zero()) else { continue };
            a.swap(p, r);
            let inv = a[r][c].inv().expect("nonzero");
            a[r] = a[r].iter().map(|x| x.mul(&inv)).collect();
            for i in 0..n {
                if i != r && !a[i][c].is_zero() {
                    let f = a[i][c].clone();
                    let pr = a[r].clone();
                    for (x, y) in a[i].iter_mut().zip(&pr) {
                        *x = x.sub(&f.mul(y));
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (0..n)
            .filter(|c| !pivots.contains(c))
            .map(|free| {
                let mut v = vec![self.field.zero(); n];
                v[free] = self.field.one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = a[row][free].neg();
                }
                (free, v)
            })
            .collect()
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.a.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
    }

    pub fn to_spec(&self) -> MatrixSpec {
        MatrixSpec { rows: self.a.iter().map(|r| r.iter().map(|x| x.coord_strings()).collect()).collect() }
    }
}

/// Entries as power-basis coordinate strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixSpec {
    pub rows: Vec<Vec<Vec<String>>>,
}

impl fmt::Debug for MatrixK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MatrixK({self})")
    }
}

impl fmt::Display for MatrixK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> =
            self.a.iter().map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))).collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

/// `g` with `g^{-1} M g = diag(eigenvalues)`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub g: MatrixK,
    pub eigenvalues: Vec<FieldElement>,
}

/// Value at the real place where the generator is largest (real places are
/// ordered ascending), or the real part at the first complex place.
fn approx_value(x: &FieldElement) -> f64 {
    let place = x.field().signature().0.saturating_sub(1);
    x.embed(place, 64).map(|z| z.re.mid().to_f64()).unwrap_or(0.0)
}

pub fn eigen_decompose(m: &MatrixK) -> Result<EigenDecomposition> {
    if !m.is_semisimple() {
        return Err(Error::NotSemisimple);
    }
    let f = &m.field;
    let cap = f.precision_cap();
    let cp = m.charpoly();
    let roots = cp.roots(cap)?;
    let total: usize = roots.iter().map(|(_, k)| k).sum();
    if total != m.n {
        let factors = cp
            .squarefree_part()
            .factor_squarefree(cap)?
            .into_iter()
            .filter(|p| p.deg() > 1)
            .map(|p| p.to_string())
            .collect();
        return Err(Error::EigenvaluesNotInField(factors));
    }
    let mut cols: Vec<(usize, f64, String, FieldElement, Vec<FieldElement>)> = Vec::new();
    for (lambda, _) in &roots {
        let shifted = m.sub(&MatrixK::identity(f, m.n).scale(lambda));
        for (free, v) in shifted.kernel() {
            cols.push((free, -approx_value(lambda), lambda.key(), lambda.clone(), v));
        }
    }
    cols.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    let n = m.n;
    let g = MatrixK::raw(f, (0..n).map(|i| cols.iter().map(|c| c.4[i].clone()).collect()).collect());
    let eigenvalues: Vec<FieldElement> = cols.into_iter().map(|c| c.3).collect();
    let check = g.inverse()?.mul(m).mul(&g);
    debug_assert_eq!(check, MatrixK::diagonal(f, &eigenvalues));
    if check != MatrixK::diagonal(f, &eigenvalues) {
        return Err(Error::InvalidArgument("eigenvector verification failed".into()));
    }
    Ok(EigenDecomposition { g, eigenvalues })
}

/// Multiplicative Jordan decomposition `M = g_s g_u = g_u g_s`.
#[derive(Debug, Clone)]
pub struct JordanDecomposition {
    pub semisimple: MatrixK,
    pub unipotent: MatrixK,
}

pub fn jordan_multiplicative(m: &MatrixK) -> Result<JordanDecomposition> {
    if !m.is_invertible() {
        return Err(Error::NotInvertible);
    }
    let p = m.charpoly().squarefree_part();
    let dp = p.derivative();
    let mut s = m.clone();
    loop {
        let ps = s.eval_poly(&p);
        if ps.is_zero() {
            break;
        }
        let corr = ps.mul(&s.eval_poly(&dp).inverse()?);
        s = s.sub(&corr);
    }
    let u = m.mul(&s.inverse()?);
    let id = MatrixK::identity(&m.field, m.n);
    let ok = s.mul(&u) == *m && u.mul(&s) == *m && s.is_semisimple() && u.sub(&id).pow(m.n as i64)?.is_zero();
    if !ok {
        return Err(Error::InvalidArgument("Jordan decomposition verification failed".into()));
    }
    Ok(JordanDecomposition { semisimple: s, unipotent: u })
}

/// The entry tuples of `gamma_1^{a_1} ... gamma_r^{a_r}` as a system in
/// `r` variables whose bases are the eigenvalues.
pub fn bg_to_pep(gammas: &[MatrixK]) -> Result<PepSystem> {
    let first = gammas.first().ok_or_else(|| Error::InvalidArgument("need at least one matrix".into()))?;
    let f = first.field.clone();
    let n = first.n;
    if gammas.iter().any(|g| g.n != n || !NumberField::same(&g.field, &f)) {
        return Err(Error::DimensionMismatch("matrices must share size and field".into()));
    }
    let r = gammas.len();
    let mut bases: Vec<FieldElement> = Vec::new();
    // per matrix: (base index, projector) for each eigenvector
    let mut parts: Vec<Vec<(usize, MatrixK)>> = Vec::new();
    for gamma in gammas {
        let ed = eigen_decompose(gamma)?;
        let gi = ed.g.inverse()?;
        let mut list = Vec::new();
        for (j, lambda) in ed.eigenvalues.iter().enumerate() {
            let idx = match bases.iter().position(|b| b == lambda) {
                Some(i) => i,
                None => {
                    bases.push(lambda.clone());
                    bases.len() - 1
                }
            };
            let proj = MatrixK::raw(
                &f,
                (0..n).map(|p| (0..n).map(|q| ed.g.a[p][j].mul(&gi.a[j][q])).collect()).collect(),
            );
            list.push((idx, proj));
        }
        parts.push(list);
    }
    let k = bases.len();
    let mut components: Vec<Vec<Term>> = vec![Vec::new(); n * n];
    let mut choice = vec![0usize; r];
    loop {
        let mut prod = MatrixK::identity(&f, n);
        let mut ex = vec![vec![0i64; r]; k];
        for (i, &j) in choice.iter().enumerate() {
            let (idx, proj) = &parts[i][j];
            prod = prod.mul(proj);
            ex[*idx][i] += 1;
        }
        for (c, comp) in components.iter_mut().enumerate() {
            let coeff = prod.a[c / n][c % n].clone();
            if !coeff.is_zero() {
                comp.push(Term { coeff, exponents: ex.clone() });
            }
        }
        let mut i = r;
        loop {
            if i == 0 {
                return Ok(PepSystem::new(&f, r, bases, components)?.simplified());
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < parts[i].len() {
                break;
            }
            choice[i] = 0;
        }
    }
}

/// Heights of `g^n` for a unipotent `g`, with a log-log fit of the growth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnipotentGrowth {
    pub heights: Vec<(i64, HeightValue)>,
    /// Least-squares slope of `log H(g^n)` against `log n`.
    pub slope: f64,
    pub fitted_degree: u32,
}

/// Exact `g^n` for unipotent `g` through the binomial expansion of
/// `(I + X)^n` with `X` nilpotent.
pub fn unipotent_power(x_powers: &[MatrixK], n: i64) -> MatrixK {
    let f = x_powers[0].field.clone();
    let mut acc = MatrixK::zero(&f, x_powers[0].n);
    let mut binom = BigRational::from_integer(BigInt::from(1));
    for (k, xk) in x_powers.iter().enumerate() {
        if k > 0 {
            binom = binom * BigRational::from_integer(BigInt::from(n - k as i64 + 1))
                / BigRational::from_integer(BigInt::from(k));
        }
        if binom == BigRational::from_integer(BigInt::from(0)) {
            break;
        }
        acc = acc.add(&xk.scale(&f.from_rational(&binom)));
    }
    acc
}

pub fn unipotent_power_heights(g: &MatrixK, count: i64) -> Result<UnipotentGrowth> {
    if !g.is_unipotent() {
        return Err(Error::NotUnipotent);
    }
    if count < 1 {
        return Err(Error::InvalidArgument("need at least one power".into()));
    }
    let f = &g.field;
    let x = g.sub(&MatrixK::identity(f, g.n));
    let mut powers = vec![MatrixK::identity(f, g.n)];
    while !powers.last().expect("nonempty").is_zero() && powers.len() <= g.n {
        let next = powers.last().expect("nonempty").mul(&x);
        powers.push(next);
    }
    let mut heights = Vec::new();
    for n in 1..=count {
        let p = unipotent_power(&powers, n);
        heights.push((n, affine_height(&p.entries(), crate::heights::DEFAULT_TOLERANCE)?));
    }
    let pts: Vec<(f64, f64)> = heights
        .iter()
        .filter(|(n, h)| *n >= (count / 10).max(2) && h.value() > 0.0)
        .map(|(n, h)| ((*n as f64).ln(), h.value()))
        .collect();
    let slope = if pts.len() < 2 {
        0.0
    } else {
        crate::experiments::least_squares(&pts).0
    };
    Ok(UnipotentGrowth { heights, slope, fitted_degree: slope.round().max(0.0).to_u32().unwrap_or(0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exppoly::box_points;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn sqrt2() -> Field {
        NumberField::with_symbol(&[-2, 0, 1], "s").unwrap()
    }

    #[test]
    fn semisimplicity() {
        let k = NumberField::rationals();
        assert!(MatrixK::from_ints(&k, &[vec![2, 0], vec![0, 3]]).unwrap().is_semisimple());
        assert!(!MatrixK::from_ints(&k, &[vec![1, 1], vec![0, 1]]).unwrap().is_semisimple());
        let p = MatrixK::from_ints(&k, &[vec![3, 4], vec![2, 3]]).unwrap();
        assert!(p.is_semisimple());
        assert_eq!(p.minpoly().to_string(), "t^2 - 6*t + 1");
        assert!(MatrixK::identity(&k, 3).is_semisimple());
    }

    #[test]
    fn eigen_examples() {
        let k = sqrt2();
        let m = MatrixK::from_ints(&k, &[vec![3, 4], vec![2, 3]]).unwrap();
        let ed = eigen_decompose(&m).unwrap();
        let up = k.from_power_coords(&[q(3, 1), q(2, 1)]);
        let down = k.from_power_coords(&[q(3, 1), q(-2, 1)]);
        assert_eq!(ed.eigenvalues, vec![up, down]);
        let d = MatrixK::from_ints(&k, &[vec![2, 0], vec![0, 5]]).unwrap();
        assert!(eigen_decompose(&d).unwrap().g.is_identity());
        let qf = NumberField::rationals();
        let m = MatrixK::from_ints(&qf, &[vec![3, 4], vec![2, 3]]).unwrap();
        match eigen_decompose(&m).unwrap_err() {
            Error::EigenvaluesNotInField(f) => assert_eq!(f, vec!["t^2 - 6*t + 1".to_string()]),
            e => panic!("{e}"),
        }
        let j = MatrixK::from_ints(&qf, &[vec![1, 1], vec![0, 1]]).unwrap();
        assert_eq!(eigen_decompose(&j).unwrap_err(), Error::NotSemisimple);
    }

    #[test]
    fn jordan_examples() {
        let k = NumberField::rationals();
        let m = MatrixK::from_ints(&k, &[vec![2, 1], vec![0, 2]]).unwrap();
        let jd = jordan_multiplicative(&m).unwrap();
        assert_eq!(jd.semisimple, MatrixK::from_ints(&k, &[vec![2, 0], vec![0, 2]]).unwrap());
        assert_eq!(jd.unipotent, MatrixK::from_rationals(&k, &[vec![q(1, 1), q(1, 2)], vec![q(0, 1), q(1, 1)]]).unwrap());
        let u = MatrixK::from_ints(&k, &[vec![1, 1], vec![0, 1]]).unwrap();
        let jd = jordan_multiplicative(&u).unwrap();
        assert!(jd.semisimple.is_identity());
        assert_eq!(jd.unipotent, u);
        let p = MatrixK::from_ints(&k, &[vec![3, 4], vec![2, 3]]).unwrap();
        let jd = jordan_multiplicative(&p).unwrap();
        assert_eq!(jd.semisimple, p);
        assert!(jd.unipotent.is_identity());
        let z = MatrixK::from_ints(&k, &[vec![0, 1], vec![0, 0]]).unwrap();
        assert_eq!(jordan_multiplicative(&z).unwrap_err(), Error::NotInvertible);
    }

    #[test]
    fn bg_round_trip() {
        let k = sqrt2();
        let gamma = MatrixK::from_ints(&k, &[vec![3, 4], vec![2, 3]]).unwrap();
        let f = bg_to_pep(std::slice::from_ref(&gamma)).unwrap();
        assert_eq!(f.s(), 4);
        let ints = |v: &[i64]| v.iter().map(|&x| k.from_int(x)).collect::<Vec<_>>();
        assert_eq!(f.evaluate(&[1]).unwrap(), ints(&[3, 4, 2, 3]));
        assert_eq!(f.evaluate(&[0]).unwrap(), ints(&[1, 0, 0, 1]));
        assert_eq!(f.evaluate(&[-1]).unwrap(), ints(&[3, -4, -2, 3]));
        let delta = MatrixK::from_ints(&k, &[vec![2, 0], vec![0, 1]]).unwrap();
        let g2 = bg_to_pep(&[gamma.clone(), delta.clone()]).unwrap();
        for a in box_points(2, 3) {
            let m = gamma.pow(a[0]).unwrap().mul(&delta.pow(a[1]).unwrap());
            assert_eq!(g2.evaluate(&a).unwrap(), m.entries());
        }
    }

    #[test]
    fn unipotent_growth() {
        let k = NumberField::rationals();
        let u = MatrixK::from_ints(&k, &[vec![1, 1], vec![0, 1]]).unwrap();
        let g = unipotent_power_heights(&u, 100).unwrap();
        assert_eq!(g.fitted_degree, 1);
        for (n, h) in &g.heights {
            assert!(h.contains((*n as f64).ln()));
        }
        let j3 = MatrixK::from_ints(&k, &[vec![1, 1, 0], vec![0, 1, 1], vec![0, 0, 1]]).unwrap();
        assert_eq!(unipotent_power_heights(&j3, 100).unwrap().fitted_degree, 2);
        let id = unipotent_power_heights(&MatrixK::identity(&k, 2), 10).unwrap();
        assert!(id.heights.iter().all(|(_, h)| h.log_hi == 0.0));
        assert_eq!(id.fitted_degree, 0);
        let p = MatrixK::from_ints(&k, &[vec![3, 4], vec![2, 3]]).unwrap();
        assert_eq!(unipotent_power_heights(&p, 3).unwrap_err(), Error::NotUnipotent);
    }
}
