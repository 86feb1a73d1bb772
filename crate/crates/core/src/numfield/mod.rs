//! Exact arithmetic in a fixed number field `K = Q(theta)`.
//!
//! A [`NumberField`] is defined by a monic irreducible integer polynomial.
//! Elements are stored as integer coordinates in the power basis over a
//! common positive denominator. Archimedean embeddings are certified root
//! enclosures of the defining polynomial, refined on demand.

pub mod factor;
pub mod hnf;
pub mod interval;
pub mod kpoly;
pub mod poly;
pub mod roots;

use crate::error::{Error, Result};
use interval::{CInterval, Interval};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use poly::QPoly;
use roots::RootBox;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, RwLock};

pub use kpoly::KPoly;

/// Highest degree accepted for a defining polynomial.
pub const MAX_DEGREE: usize = 24;
/// Default cap on the working precision of root enclosures, in bits.
pub const DEFAULT_PRECISION_CAP: u32 = 4096;

/// Shared handle to a field; elements keep one of these.
pub type Field = Arc<NumberField>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlaceKind {
    Real,
    Complex,
}

impl PlaceKind {
    /// Local degree `d_v` of the place.
    pub fn local_degree(self) -> u32 {
        match self {
            PlaceKind::Real => 1,
            PlaceKind::Complex => 2,
        }
    }
}

#[derive(Debug)]
struct EmbeddingCache {
    prec: u32,
    roots: Vec<RootBox>,
}

/// A number field given by a monic irreducible integer polynomial.
#[derive(Debug)]
pub struct NumberField {
    poly: QPoly,
    int_poly: Vec<BigInt>,
    degree: usize,
    r1: usize,
    r2: usize,
    symbol: String,
    /// Rows are the integral basis elements in power-basis coordinates.
    basis: Vec<Vec<BigRational>>,
    /// Maps power-basis coordinates (row vector) to integral-basis coordinates.
    basis_inv: Vec<Vec<BigRational>>,
    discriminant: BigInt,
    poly_discriminant: BigInt,
    precision_cap: u32,
    embeddings: RwLock<EmbeddingCache>,
}

/// Construction options.
#[derive(Debug, Clone)]
pub struct FieldOptions {
    pub symbol: String,
    pub precision_cap: u32,
    /// Integral basis in power-basis coordinates; required for some fields of
    /// degree three or more.
    pub integral_basis: Option<Vec<Vec<BigRational>>>,
}

impl Default for FieldOptions {
    fn default() -> Self {
        FieldOptions { symbol: "a".into(), precision_cap: DEFAULT_PRECISION_CAP, integral_basis: None }
    }
}

/// Build a field from its defining polynomial (coefficients low degree first).
pub fn make_field(coeffs: &[BigInt], opts: FieldOptions) -> Result<Field> {
    NumberField::new(&QPoly::from_bigints(coeffs), opts)
}

/// Serializable description of a field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub polynomial: Vec<String>,
    pub symbol: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integral_basis: Option<Vec<Vec<String>>>,
}

fn squarefree_factor(n: &BigInt) -> Option<(BigInt, BigInt)> {
    // n = f^2 * m with m squarefree; None if trial division cannot decide
    const LIMIT: u64 = 1_000_000;
    let sign = if n.is_negative() { -BigInt::one() } else { BigInt::one() };
    let mut rest = n.abs();
    let mut f = BigInt::one();
    let mut m = sign;
    let mut p: u64 = 2;
    while p <= LIMIT {
        let pb = BigInt::from(p);
        if &pb * &pb > rest {
            break;
        }
        let mut e = 0;
        while (&rest % &pb).is_zero() {
            rest /= &pb;
            e += 1;
        }
        for _ in 0..e / 2 {
            f *= &pb;
        }
        if e % 2 == 1 {
            m *= &pb;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest.is_one() {
        return Some((f, m));
    }
    let lim = BigInt::from(LIMIT);
    let r = rest.sqrt();
    if &r * &r == rest {
        return Some((f * r, m));
    }
    // every prime factor of rest exceeds LIMIT; with rest < LIMIT^3 it is a
    // prime or a product of two distinct primes
    if rest < &lim * &lim * &lim {
        return Some((f, m * rest));
    }
    None
}

fn rational_det_inverse(m: &[Vec<BigRational>]) -> Option<(BigRational, Vec<Vec<BigRational>>)> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    let mut det = BigRational::one();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero())?;
        if p != c {
            a.swap(p, c);
            inv.swap(p, c);
            det = -det;
        }
        let pv = a[c][c].clone();
        det *= &pv;
        let pinv = pv.recip();
        for j in 0..n {
            a[c][j] *= &pinv;
            inv[c][j] *= &pinv;
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for j in 0..n {
                    let (x, y) = (a[c][j].clone(), inv[c][j].clone());
                    a[r][j] -= &f * x;
                    inv[r][j] -= &f * y;
                }
            }
        }
    }
    Some((det, inv))
}

/// Determinant of a rational matrix (zero if singular).
pub fn rational_det(m: &[Vec<BigRational>]) -> BigRational {
    rational_det_inverse(m).map(|(d, _)| d).unwrap_or_else(BigRational::zero)
}

impl NumberField {
    pub fn new(poly: &QPoly, opts: FieldOptions) -> Result<Field> {
        let degree = poly.degree().ok_or(Error::ZeroDegree)?;
        if degree == 0 {
            return Err(Error::ZeroDegree);
        }
        if !poly.is_integral() {
            return Err(Error::InvalidArgument("defining polynomial must have integer coefficients".into()));
        }
        if !poly.lc().is_one() {
            return Err(Error::NonMonic);
        }
        if degree > MAX_DEGREE {
            return Err(Error::DegreeTooLarge(degree, MAX_DEGREE));
        }
        let cap = opts.precision_cap;
        if !factor::is_irreducible(poly, cap)? {
            return Err(Error::ReduciblePolynomial(poly.display_with("x")));
        }
        let int_poly: Vec<BigInt> = poly.coeffs().iter().map(|c| c.to_integer()).collect();
        let roots = roots::isolate(&int_poly, 64, cap)?;
        let r1 = roots.iter().filter(|b| b.real).count();
        let r2 = (degree - r1) / 2;
        let poly_disc = poly.discriminant().to_integer();

        let basis = match opts.integral_basis {
            Some(b) => {
                if b.len() != degree || b.iter().any(|row| row.len() != degree) {
                    return Err(Error::InvalidIntegralBasis(format!("expected {degree} vectors of length {degree}")));
                }
                b
            }
            None => default_integral_basis(poly, degree, &poly_disc)?,
        };
        let (det, basis_inv) = rational_det_inverse(&basis)
            .ok_or_else(|| Error::InvalidIntegralBasis("basis matrix is singular".into()))?;
        let disc_q = BigRational::from_integer(poly_disc.clone()) * &det * &det;
        if !disc_q.is_integer() {
            return Err(Error::InvalidIntegralBasis("basis is not contained in the ring of integers".into()));
        }
        let field = Arc::new(NumberField {
            poly: poly.clone(),
            int_poly,
            degree,
            r1,
            r2,
            symbol: opts.symbol,
            basis,
            basis_inv,
            discriminant: disc_q.to_integer(),
            poly_discriminant: poly_disc,
            precision_cap: cap,
            embeddings: RwLock::new(EmbeddingCache { prec: 64, roots }),
        });
        // every supplied basis element must be an algebraic integer
        for row in &field.basis {
            let e = field.from_power_coords(row);
            if !e.minimal_polynomial_q().is_integral() {
                return Err(Error::InvalidIntegralBasis(format!("{e} is not an algebraic integer")));
            }
        }
        Ok(field)
    }

    /// The rationals, as `Q(theta)` with `theta` a root of `x - 1`.
    pub fn rationals() -> Field {
        NumberField::new(&QPoly::from_ints(&[-1, 1]), FieldOptions::default()).expect("x - 1 is irreducible")
    }

    pub fn with_symbol(coeffs: &[i64], symbol: &str) -> Result<Field> {
        let c: Vec<BigInt> = coeffs.iter().map(|&x| BigInt::from(x)).collect();
        make_field(&c, FieldOptions { symbol: symbol.into(), ..FieldOptions::default() })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn signature(&self) -> (usize, usize) {
        (self.r1, self.r2)
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn defining_polynomial(&self) -> &QPoly {
        &self.poly
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.discriminant
    }

    pub fn polynomial_discriminant(&self) -> &BigInt {
        &self.poly_discriminant
    }

    pub fn precision_cap(&self) -> u32 {
        self.precision_cap
    }

    /// True when `K = Q`.
    pub fn is_rational(&self) -> bool {
        self.degree == 1
    }

    pub fn spec(&self) -> FieldSpec {
        let power = self.degree == 1
            || self.basis.iter().enumerate().all(|(i, row)| {
                row.iter().enumerate().all(|(j, x)| if i == j { x.is_one() } else { x.is_zero() })
            });
        FieldSpec {
            polynomial: self.int_poly.iter().map(|c| c.to_string()).collect(),
            symbol: self.symbol.clone(),
            integral_basis: if power || self.degree <= 2 {
                None
            } else {
                Some(self.basis.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect())
            },
        }
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Field> {
        let coeffs = spec
            .polynomial
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(|_| Error::InvalidArgument(format!("bad coefficient {s}"))))
            .collect::<Result<Vec<_>>>()?;
        let integral_basis = match &spec.integral_basis {
            None => None,
            Some(rows) => Some(
                rows.iter()
                    .map(|r| r.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        make_field(&coeffs, FieldOptions { symbol: spec.symbol.clone(), integral_basis, ..FieldOptions::default() })
    }

    /// Two handles describe the same field.
    pub fn same(a: &Field, b: &Field) -> bool {
        Arc::ptr_eq(a, b) || (a.poly == b.poly && a.basis == b.basis)
    }

    pub fn integral_basis(self: &Arc<Self>) -> Vec<FieldElement> {
        self.basis.iter().map(|row| self.from_power_coords(row)).collect()
    }

    pub fn zero(self: &Arc<Self>) -> FieldElement {
        FieldElement { field: self.clone(), num: vec![BigInt::zero(); self.degree], den: BigInt::one() }
    }

    pub fn one(self: &Arc<Self>) -> FieldElement {
        self.from_int(1)
    }

    pub fn from_int(self: &Arc<Self>, n: i64) -> FieldElement {
        self.from_bigint(&BigInt::from(n))
    }

    pub fn from_bigint(self: &Arc<Self>, n: &BigInt) -> FieldElement {
        let mut num = vec![BigInt::zero(); self.degree];
        num[0] = n.clone();
        FieldElement { field: self.clone(), num, den: BigInt::one() }
    }

    pub fn from_rational(self: &Arc<Self>, q: &BigRational) -> FieldElement {
        let mut num = vec![BigInt::zero(); self.degree];
        num[0] = q.numer().clone();
        FieldElement::normalized(self.clone(), num, q.denom().clone())
    }

    /// The generator `theta` (for `Q` this is the rational 1).
    pub fn generator(self: &Arc<Self>) -> FieldElement {
        if self.degree == 1 {
            let q = -self.poly.coeff(0);
            return self.from_rational(&q);
        }
        let mut num = vec![BigInt::zero(); self.degree];
        num[1] = BigInt::one();
        FieldElement { field: self.clone(), num, den: BigInt::one() }
    }

    pub fn from_power_coords(self: &Arc<Self>, coords: &[BigRational]) -> FieldElement {
        assert_eq!(coords.len(), self.degree, "coordinate count");
        let den = coords.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let num = coords.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        FieldElement::normalized(self.clone(), num, den)
    }

    /// Element from power-basis coordinate strings such as `"3"`, `"-1/2"`.
    pub fn parse_coords(self: &Arc<Self>, coords: &[String]) -> Result<FieldElement> {
        if coords.len() != self.degree {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coordinates, got {}",
                self.degree,
                coords.len()
            )));
        }
        let q = coords.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
        Ok(self.from_power_coords(&q))
    }

    /// Certified enclosures of the embeddings of `theta`: `r1` real places
    /// first (ascending), then one representative of each complex pair (upper
    /// half plane). Each box has width at most `2^-prec * max(1, |theta|)`.
    pub fn embeddings(&self, prec: u32) -> Result<Vec<CInterval>> {
        self.embeddings_capped(prec, self.precision_cap)
    }

    /// As [`NumberField::embeddings`] with an explicit precision cap.
    pub fn embeddings_capped(&self, prec: u32, cap: u32) -> Result<Vec<CInterval>> {
        {
            let cache = self.embeddings.read().expect("embedding lock");
            if cache.prec >= prec {
                return Ok(Self::places_of(&cache.roots, self.r1, self.r2));
            }
        }
        let mut cache = self.embeddings.write().expect("embedding lock");
        if cache.prec < prec {
            let seed: Vec<_> = cache.roots.iter().map(|b| (b.value.re.mid(), b.value.im.mid())).collect();
            let fresh = roots::isolate_from(&self.int_poly, prec, cap, Some(&seed))?;
            // intersect with the previous boxes so enclosures only shrink
            let mut merged = Vec::with_capacity(fresh.len());
            for b in fresh {
                let old = cache.roots.iter().find_map(|o| o.value.intersect(&b.value));
                let value = old.unwrap_or(b.value);
                merged.push(RootBox { value, real: b.real });
            }
            cache.roots = merged;
            cache.prec = prec;
        }
        Ok(Self::places_of(&cache.roots, self.r1, self.r2))
    }

    fn places_of(roots: &[RootBox], r1: usize, r2: usize) -> Vec<CInterval> {
        roots[..r1 + r2].iter().map(|b| b.value.clone()).collect()
    }

    pub fn place_kinds(&self) -> Vec<PlaceKind> {
        let mut v = vec![PlaceKind::Real; self.r1];
        v.extend(std::iter::repeat_n(PlaceKind::Complex, self.r2));
        v
    }

    /// Content-ideal norm `[O_K : I]` of the ideal generated by integral
    /// elements `xs`.
    pub fn content_ideal_norm(self: &Arc<Self>, xs: &[FieldElement]) -> Result<BigInt> {
        if xs.iter().all(|x| x.is_zero()) {
            return Err(Error::AllZero);
        }
        for x in xs {
            if !Arc::ptr_eq(&x.field, self) && !NumberField::same(&x.field, self) {
                return Err(Error::FieldMismatch);
            }
            if !x.is_integral_in_basis() {
                return Err(Error::NotIntegral);
            }
        }
        if self.degree == 1 {
            let g = xs.iter().fold(BigInt::zero(), |acc, x| acc.gcd(&x.num[0]));
            return Ok(g);
        }
        let basis = self.integral_basis();
        let mut rows = Vec::with_capacity(xs.len() * self.degree);
        for x in xs {
            if x.is_zero() {
                continue;
            }
            for b in &basis {
                let c = x.mul(b).integral_coords();
                rows.push(c.into_iter().map(|q| q.to_integer()).collect());
            }
        }
        Ok(hnf::lattice_index(&rows))
    }
}

fn default_integral_basis(poly: &QPoly, degree: usize, disc: &BigInt) -> Result<Vec<Vec<BigRational>>> {
    let unit = |i: usize| -> Vec<BigRational> {
        (0..degree).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect()
    };
    match degree {
        1 => Ok(vec![vec![BigRational::one()]]),
        2 => {
            let b = poly.coeff(1).to_integer();
            let c = poly.coeff(0).to_integer();
            let d = &b * &b - BigInt::from(4) * &c;
            let (f, m) = squarefree_factor(&d)
                .ok_or_else(|| Error::IntegralBasisRequired("discriminant too large to factor".into()))?;
            // sqrt(m) = (2 theta + b) / f
            let fq = BigRational::from_integer(f);
            let s0 = BigRational::from_integer(b) / &fq;
            let s1 = BigRational::from_integer(BigInt::from(2)) / &fq;
            let omega = if m.mod_floor(&BigInt::from(4)) == BigInt::one() {
                let half = BigRational::new(BigInt::one(), BigInt::from(2));
                vec![(BigRational::one() + s0) * &half, s1 * &half]
            } else {
                vec![s0, s1]
            };
            Ok(vec![unit(0), omega])
        }
        _ => match squarefree_factor(disc) {
            Some((f, _)) if f.is_one() => Ok((0..degree).map(unit).collect()),
            Some(_) => Err(Error::IntegralBasisRequired(format!(
                "polynomial discriminant {disc} is not squarefree"
            ))),
            None => Err(Error::IntegralBasisRequired(format!(
                "cannot decide whether discriminant {disc} is squarefree"
            ))),
        },
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidArgument(format!("bad rational `{s}`"));
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// An element of a number field.
#[derive(Clone)]
pub struct FieldElement {
    field: Field,
    num: Vec<BigInt>,
    den: BigInt,
}

impl FieldElement {
    fn normalized(field: Field, mut num: Vec<BigInt>, mut den: BigInt) -> Self {
        if den.is_negative() {
            den = -den;
            num.iter_mut().for_each(|x| *x = -x.clone());
        }
        let g = num.iter().fold(den.clone(), |acc, x| acc.gcd(x));
        if !g.is_one() && !g.is_zero() {
            num.iter_mut().for_each(|x| *x /= &g);
            den /= &g;
        }
        if num.iter().all(|x| x.is_zero()) {
            den = BigInt::one();
        }
        FieldElement { field, num, den }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|x| x.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(|x| x.is_zero())
    }

    /// Power-basis coordinates.
    pub fn coords(&self) -> Vec<BigRational> {
        self.num.iter().map(|n| BigRational::new(n.clone(), self.den.clone())).collect()
    }

    /// Integer numerators in the power basis and the common denominator.
    pub fn numerators(&self) -> (&[BigInt], &BigInt) {
        (&self.num, &self.den)
    }

    pub fn is_rational(&self) -> bool {
        self.num[1..].iter().all(|x| x.is_zero())
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        if self.is_rational() {
            Some(BigRational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    /// Coordinates in the integral basis.
    pub fn integral_coords(&self) -> Vec<BigRational> {
        let v = self.coords();
        let inv = &self.field.basis_inv;
        (0..self.field.degree)
            .map(|j| v.iter().zip(inv.iter()).map(|(x, row)| x * &row[j]).sum())
            .collect()
    }

    pub fn is_integral_in_basis(&self) -> bool {
        self.integral_coords().iter().all(|c| c.is_integer())
    }

    /// Smallest positive integer `q` with `q * self` integral in the basis.
    pub fn integral_denominator(&self) -> BigInt {
        self.integral_coords().iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    fn check(&self, o: &FieldElement) -> Result<()> {
        if Arc::ptr_eq(&self.field, &o.field) || NumberField::same(&self.field, &o.field) {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn checked_add(&self, o: &FieldElement) -> Result<FieldElement> {
        self.check(o)?;
        let num = self.num.iter().zip(&o.num).map(|(a, b)| a * &o.den + b * &self.den).collect();
        Ok(FieldElement::normalized(self.field.clone(), num, &self.den * &o.den))
    }

    pub fn checked_sub(&self, o: &FieldElement) -> Result<FieldElement> {
        self.checked_add(&o.neg())
    }

    pub fn checked_mul(&self, o: &FieldElement) -> Result<FieldElement> {
        self.check(o)?;
        let d = self.field.degree;
        if d == 1 {
            return Ok(FieldElement::normalized(
                self.field.clone(),
                vec![&self.num[0] * &o.num[0]],
                &self.den * &o.den,
            ));
        }
        let mut prod = vec![BigInt::zero(); 2 * d - 1];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.num.iter().enumerate() {
                prod[i + j] += a * b;
            }
        }
        let f = &self.field.int_poly;
        for i in (d..prod.len()).rev() {
            let c = std::mem::take(&mut prod[i]);
            if c.is_zero() {
                continue;
            }
            for (j, fj) in f.iter().enumerate().take(d) {
                prod[i - d + j] -= &c * fj;
            }
        }
        prod.truncate(d);
        Ok(FieldElement::normalized(self.field.clone(), prod, &self.den * &o.den))
    }

    pub fn checked_div(&self, o: &FieldElement) -> Result<FieldElement> {
        self.check(o)?;
        self.checked_mul(&o.inv()?)
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement { field: self.field.clone(), num: self.num.iter().map(|x| -x).collect(), den: self.den.clone() }
    }

    pub fn add(&self, o: &FieldElement) -> FieldElement {
        self.checked_add(o).expect("field mismatch")
    }

    pub fn sub(&self, o: &FieldElement) -> FieldElement {
        self.checked_sub(o).expect("field mismatch")
    }

    pub fn mul(&self, o: &FieldElement) -> FieldElement {
        self.checked_mul(o).expect("field mismatch")
    }

    pub fn scale(&self, q: &BigRational) -> FieldElement {
        let num = self.num.iter().map(|x| x * q.numer()).collect();
        FieldElement::normalized(self.field.clone(), num, &self.den * q.denom())
    }

    /// Multiplicative inverse; `DivisionByZero` for zero.
    pub fn inv(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.field.degree == 1 {
            return Ok(FieldElement::normalized(self.field.clone(), vec![self.den.clone()], self.num[0].clone()));
        }
        let g = QPoly::from_bigints(&self.num);
        let (_, s, _) = g.xgcd(&self.field.poly);
        // s * g == 1 mod f, so self^{-1} = den * s
        let mut coords: Vec<BigRational> = (0..self.field.degree).map(|i| s.coeff(i)).collect();
        let den = BigRational::from_integer(self.den.clone());
        coords.iter_mut().for_each(|c| *c *= &den);
        Ok(self.field.from_power_coords(&coords))
    }

    /// Integer power; negative exponents need a nonzero base.
    pub fn pow(&self, k: i64) -> Result<FieldElement> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = self.field.one();
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

    /// Exact norm `N_{K/Q}(self)`.
    pub fn norm(&self) -> BigRational {
        if self.field.degree == 1 {
            return BigRational::new(self.num[0].clone(), self.den.clone());
        }
        let g = QPoly::from_bigints(&self.num);
        let r = self.field.poly.resultant(&g);
        r / BigRational::from_integer(num_traits::pow(self.den.clone(), self.field.degree))
    }

    pub fn trace(&self) -> BigRational {
        let cp = self.charpoly();
        -cp.coeff(self.field.degree - 1)
    }

    /// Matrix of multiplication by `self` on the power basis (column `j` holds
    /// the coordinates of `self * theta^j`).
    pub fn multiplication_matrix(&self) -> Vec<Vec<BigRational>> {
        let d = self.field.degree;
        let mut cols = Vec::with_capacity(d);
        let theta = self.field.generator();
        let mut cur = self.clone();
        for _ in 0..d {
            cols.push(cur.coords());
            cur = cur.mul(&theta);
        }
        (0..d).map(|i| (0..d).map(|j| cols[j][i].clone()).collect()).collect()
    }

    /// Characteristic polynomial of multiplication by `self` (monic, degree d).
    pub fn charpoly(&self) -> QPoly {
        faddeev_leverrier(&self.multiplication_matrix())
    }

    fn minimal_polynomial_q(&self) -> QPoly {
        self.charpoly().squarefree_part()
    }

    /// Minimal polynomial over the rationals as a primitive integer
    /// polynomial with positive leading coefficient.
    pub fn minimal_polynomial(&self) -> Vec<BigInt> {
        self.minimal_polynomial_q().primitive_int()
    }

    /// Enclosure of the image under place `v` (real places first).
    pub fn embed(&self, place: usize, prec: u32) -> Result<CInterval> {
        let emb = self.field.embeddings(prec)?;
        Ok(self.embed_with(&emb[place], prec))
    }

    /// Evaluate at a given enclosure of `theta`.
    pub fn embed_with(&self, theta: &CInterval, prec: u32) -> CInterval {
        let p = prec + 16;
        let den = Interval::from_int(&self.den);
        if theta.is_real() {
            let t = &theta.re;
            let mut acc = Interval::zero();
            for c in self.num.iter().rev() {
                acc = acc.mul(t, p).add(&Interval::from_int(c), p);
            }
            return CInterval::real(acc.div(&den, p).expect("positive denominator"));
        }
        let mut acc = CInterval::zero();
        for c in self.num.iter().rev() {
            acc = acc.mul(theta, p);
            acc.re = acc.re.add(&Interval::from_int(c), p);
        }
        CInterval::new(acc.re.div(&den, p).expect("positive"), acc.im.div(&den, p).expect("positive"))
    }

    /// Canonical exact serialization: power-basis coordinates as `p/q`.
    pub fn coord_strings(&self) -> Vec<String> {
        self.coords().iter().map(|c| c.to_string()).collect()
    }

    pub fn key(&self) -> String {
        self.coord_strings().join(",")
    }
}

/// Characteristic polynomial `det(tI - M)` of a rational matrix.
pub fn faddeev_leverrier(m: &[Vec<BigRational>]) -> QPoly {
    let n = m.len();
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[n] = BigRational::one();
    let mut mk: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n]; n];
    for k in 1..=n {
        // M_k = A * M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = BigRational::zero();
                for l in 0..n {
                    if !m[i][l].is_zero() && !mk[l][j].is_zero() {
                        s += &m[i][l] * &mk[l][j];
                    }
                }
                next[i][j] = s;
            }
            next[i][i] += &coeffs[n - k + 1];
        }
        mk = next;
        let mut tr = BigRational::zero();
        for i in 0..n {
            for l in 0..n {
                tr += &m[i][l] * &mk[l][i];
            }
        }
        coeffs[n - k] = -tr / BigRational::from_integer(BigInt::from(k));
    }
    QPoly::new(coeffs)
}

impl PartialEq for NumberField {
    fn eq(&self, o: &Self) -> bool {
        self.poly == o.poly && self.basis == o.basis
    }
}

impl Eq for NumberField {}

impl PartialEq for FieldElement {
    fn eq(&self, o: &Self) -> bool {
        self.num == o.num && self.den == o.den && NumberField::same(&self.field, &o.field)
    }
}

impl Eq for FieldElement {}

impl Hash for FieldElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.num.hash(state);
        self.den.hash(state);
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElement({self})")
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = &self.field.symbol;
        let coords = self.coords();
        let mut first = true;
        for (i, c) in coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let coef = if mag.is_integer() || i == 0 { mag.to_string() } else { format!("({mag})") };
            match i {
                0 => f.write_str(&coef)?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{coef}*")?;
                    }
                    f.write_str(sym)?;
                    if i > 1 {
                        write!(f, "^{i}")?;
                    }
                }
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl std::ops::Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, o: &FieldElement) -> FieldElement {
        FieldElement::add(self, o)
    }
}

impl std::ops::Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, o: &FieldElement) -> FieldElement {
        FieldElement::sub(self, o)
    }
}

impl std::ops::Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, o: &FieldElement) -> FieldElement {
        FieldElement::mul(self, o)
    }
}

impl std::ops::Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(self)
    }
}

/// f64 view of a rational, for diagnostics only.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}
