//! Absolute Weil heights of tuples of field elements.
//!
//! `H(x_0 : ... : x_n)^d` is the product over archimedean places of
//! `max_i |sigma_v(x_i)|^{d_v}` divided by the norm of the content ideal,
//! after scaling the tuple to be integral.

use crate::error::{Error, Result};
use crate::numfield::interval::{Dyadic, Interval};
use crate::numfield::{roots, Field, FieldElement, NumberField, PlaceKind};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Default width of a logarithmic height enclosure.
pub const DEFAULT_TOLERANCE: f64 = 1.0 / (1u64 << 40) as f64;

/// Certified enclosure `[log_lo, log_hi]` of a logarithmic height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightValue {
    pub log_lo: f64,
    pub log_hi: f64,
    pub tolerance: f64,
    /// `H^d` when it is rational, as `p/q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_rational_power: Option<String>,
}

impl HeightValue {
    pub fn zero(tolerance: f64) -> Self {
        HeightValue { log_lo: 0.0, log_hi: 0.0, tolerance, exact_rational_power: Some("1".into()) }
    }

    /// Midpoint of the enclosure.
    pub fn value(&self) -> f64 {
        0.5 * (self.log_lo + self.log_hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.log_lo <= x && x <= self.log_hi
    }

    pub fn overlaps(&self, o: &HeightValue) -> bool {
        self.log_lo <= o.log_hi && o.log_lo <= self.log_hi
    }

    fn from_interval(iv: &Interval, tolerance: f64, exact: Option<BigRational>) -> Self {
        if exact.as_ref().is_some_and(|q| q.is_one()) {
            return HeightValue::zero(tolerance);
        }
        let (lo, hi) = iv.to_f64_bounds();
        HeightValue {
            log_lo: lo.max(0.0),
            log_hi: hi.max(0.0),
            tolerance,
            exact_rational_power: exact.map(|q| q.to_string()),
        }
    }
}

fn common_field(xs: &[FieldElement]) -> Result<Field> {
    let f = xs.first().ok_or(Error::AllZero)?.field().clone();
    if xs.iter().any(|x| !NumberField::same(x.field(), &f)) {
        return Err(Error::FieldMismatch);
    }
    Ok(f)
}

/// Tuple scaled by a positive integer so every entry is integral.
struct Cleared {
    field: Field,
    ys: Vec<FieldElement>,
}

fn clear(xs: &[FieldElement]) -> Result<Cleared> {
    let field = common_field(xs)?;
    if xs.iter().all(|x| x.is_zero()) {
        return Err(Error::AllZero);
    }
    let q = xs.iter().fold(BigInt::one(), |acc, x| acc.lcm(&x.integral_denominator()));
    let qr = BigRational::from_integer(q);
    let ys = xs.iter().map(|x| x.scale(&qr)).collect();
    Ok(Cleared { field, ys })
}

/// Integer entries of a cleared tuple when every entry is rational.
fn rational_entries(c: &Cleared) -> Option<Vec<BigInt>> {
    c.ys.iter().map(|y| y.as_rational().map(|r| r.to_integer())).collect()
}

/// Exact `H` for a tuple of integers (not all zero).
fn rational_height(ints: &[BigInt]) -> BigRational {
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let m = ints.iter().map(|x| x.abs()).max().expect("nonempty");
    BigRational::new(m, g)
}

fn ln_rational(q: &BigRational, prec: u32) -> Interval {
    Interval::from_rational(q, prec + 8).ln(prec).expect("positive")
}

/// Enclosure of `prod_v max_i |sigma_v(y_i)|^{d_v}`.
fn arch_product(field: &Field, ys: &[FieldElement], prec: u32, cap: u32) -> Result<Interval> {
    let emb = field.embeddings_capped(prec, cap)?;
    let kinds = field.place_kinds();
    let mut prod = Interval::from_i64(1);
    for (theta, kind) in emb.iter().zip(kinds) {
        let mut m = Interval::zero();
        for y in ys {
            let z = y.embed_with(theta, prec);
            let a = match kind {
                PlaceKind::Real => z.re.abs(),
                PlaceKind::Complex => z.norm_sqr(prec + 8),
            };
            m = m.max(&a);
        }
        prod = prod.mul(&m, prec + 8);
    }
    Ok(prod)
}

fn tolerance_dyadic(tol: f64) -> Dyadic {
    let t = if tol.is_finite() && tol > 0.0 { tol } else { DEFAULT_TOLERANCE };
    // round down so the certified width is never larger than requested
    let d = Dyadic::from_f64(t);
    d.round(30, crate::numfield::interval::Round::Down)
}

/// Projective height of `(x_0 : ... : x_n)`.
pub fn projective_height(xs: &[FieldElement], tolerance: f64) -> Result<HeightValue> {
    let c = clear(xs)?;
    let d = c.field.degree() as i64;
    if let Some(ints) = rational_entries(&c) {
        let h = rational_height(&ints);
        let prec = 64 + bits_for_tolerance(tolerance);
        let iv = ln_rational(&h, prec);
        let exact = num_traits::pow(h, d as usize);
        return Ok(HeightValue::from_interval(&iv, tolerance, Some(exact)));
    }
    let content = c.field.content_ideal_norm(&c.ys)?;
    let ln_content = ln_rational(&BigRational::from_integer(content), 64 + bits_for_tolerance(tolerance));
    let tol = tolerance_dyadic(tolerance);
    let cap = c.field.precision_cap();
    let mut prec = 64 + bits_for_tolerance(tolerance);
    loop {
        if prec + 24 > cap {
            return Err(Error::PrecisionCapExceeded(cap));
        }
        let p = arch_product(&c.field, &c.ys, prec, cap)?;
        if p.is_positive() {
            let ln_p = p.ln(prec).expect("positive");
            let h = ln_p.sub(&ln_content, prec + 8).div_int(d, prec + 8);
            if h.width() <= tol {
                return Ok(HeightValue::from_interval(&h, tolerance, None));
            }
        }
        prec = prec * 3 / 2;
    }
}

fn bits_for_tolerance(tol: f64) -> u32 {
    if tol.is_finite() && tol > 0.0 {
        (-tol.log2()).ceil().max(0.0) as u32 + 8
    } else {
        48
    }
}

/// Affine height `H(1 : x_1 : ... : x_n)`; the empty tuple has height 1.
pub fn affine_height(xs: &[FieldElement], tolerance: f64) -> Result<HeightValue> {
    match xs.first() {
        None => Ok(HeightValue::zero(tolerance)),
        Some(x0) => {
            let mut full = Vec::with_capacity(xs.len() + 1);
            full.push(x0.field().one());
            full.extend_from_slice(xs);
            projective_height(&full, tolerance)
        }
    }
}

/// Height of one element from the Mahler measure of its minimal polynomial.
pub fn element_height_mahler(x: &FieldElement, tolerance: f64) -> Result<HeightValue> {
    let mp = x.minimal_polynomial();
    let m = (mp.len() - 1) as i64;
    let lc = mp.last().expect("nonconstant").abs();
    let tol = tolerance_dyadic(tolerance);
    let cap = x.field().precision_cap();
    let mut prec = 64 + bits_for_tolerance(tolerance);
    let ln_lc = ln_rational(&BigRational::from_integer(lc.clone()), prec);
    loop {
        if prec + 24 > cap {
            return Err(Error::PrecisionCapExceeded(cap));
        }
        let boxes = roots::isolate(&mp, prec, cap)?;
        let mut sum = ln_lc.clone();
        for b in &boxes {
            let r2 = b.value.norm_sqr(prec + 8);
            let one = Interval::from_i64(1);
            let m2 = r2.max(&one);
            let l = m2.ln(prec).expect("at least one").div_int(2, prec + 8);
            sum = sum.add(&l, prec + 8);
        }
        let h = sum.div_int(m, prec + 8);
        if h.width() <= tol {
            let exact = if m == 1 {
                let q = BigRational::new(-mp[0].clone(), mp[1].clone());
                let num = q.numer().abs().max(q.denom().clone());
                let g = q.numer().gcd(q.denom());
                Some(num_traits::pow(BigRational::new(num, g), x.field().degree()))
            } else {
                None
            };
            return Ok(HeightValue::from_interval(&h, tolerance, exact));
        }
        prec = prec * 3 / 2;
    }
}

/// Certified comparison of `H_aff(P)` with a positive rational bound.
///
/// Returns `Less` for Below, `Equal` and `Greater` for Above.
pub fn compare_height(point: &[FieldElement], bound: &BigRational) -> Result<Ordering> {
    if !bound.is_positive() {
        return Err(Error::InvalidArgument("height bound must be positive".into()));
    }
    let Some(x0) = point.first() else {
        return Ok(BigRational::one().cmp(bound));
    };
    let mut full = Vec::with_capacity(point.len() + 1);
    full.push(x0.field().one());
    full.extend_from_slice(point);
    let c = clear(&full)?;
    if let Some(ints) = rational_entries(&c) {
        return Ok(rational_height(&ints).cmp(bound));
    }
    let d = c.field.degree();
    let content = c.field.content_ideal_norm(&c.ys)?;
    // compare prod_v max |sigma_v(y)|^{d_v} with bound^d * content
    let target = num_traits::pow(bound.clone(), d) * BigRational::from_integer(content);
    let cap = c.field.precision_cap();
    let mut prec = 64;
    while prec <= 256 && prec + 24 <= cap {
        let p = arch_product(&c.field, &c.ys, prec, cap)?;
        if let Some(o) = p.cmp_rational(&target) {
            return Ok(o);
        }
        prec = prec * 3 / 2;
    }
    // The product is an algebraic number in the Galois closure (degree at
    // most d!). If it differs from the target, Liouville's inequality bounds
    // the difference from below; refine until the enclosure is narrower.
    let max_conj = c
        .ys
        .iter()
        .map(log_plus_conjugate_bound)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0f64, f64::max);
    let h_q = d as f64 * max_conj;
    let h_r = {
        let n = target.numer().abs().to_f64().unwrap_or(f64::MAX).max(1.0);
        let m = target.denom().to_f64().unwrap_or(f64::MAX).max(1.0);
        n.max(m).ln()
    };
    let galois: f64 = (1..=d).map(|i| i as f64).product();
    let gap_bits = (galois * (h_q + h_r + std::f64::consts::LN_2) / std::f64::consts::LN_2).ceil() as u64 + 16;
    let gap = Dyadic::new(BigInt::one(), -(gap_bits as i64));
    let mut prec = prec.max(64);
    loop {
        let big_cap = u32::try_from(gap_bits).unwrap_or(u32::MAX / 2).saturating_add(prec).saturating_mul(2);
        let p = arch_product(&c.field, &c.ys, prec, big_cap)?;
        match p.cmp_rational(&target) {
            Some(o) => return Ok(o),
            None if p.width() < gap => return Ok(Ordering::Equal),
            None => prec = prec * 3 / 2,
        }
    }
}

/// `log+ max_v |sigma_v(y)|` rounded up.
fn log_plus_conjugate_bound(y: &FieldElement) -> Result<f64> {
    let emb = y.field().embeddings(64)?;
    let mut m: f64 = 1.0;
    for theta in &emb {
        let z = y.embed_with(theta, 64);
        let a = z.abs_upper().to_f64();
        m = m.max(a * (1.0 + 1e-9));
    }
    Ok(m.ln().max(0.0) + 1e-9)
}
