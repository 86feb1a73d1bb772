//! Outward-rounded interval arithmetic over dyadic rationals.
//!
//! A [`Dyadic`] is `m * 2^e` with an arbitrary-size mantissa. Interval
//! operations take an explicit mantissa precision and round the lower
//! endpoint toward minus infinity and the upper endpoint toward plus
//! infinity, so every result encloses the exact value.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

/// `floor(m / 2^s)` or `ceil(m / 2^s)`.
fn shr_round(m: &BigInt, s: u64, dir: Round) -> BigInt {
    if s == 0 {
        return m.clone();
    }
    let mag: &BigUint = m.magnitude();
    let q = mag >> s;
    let exact = (&q << s) == *mag;
    let q = BigInt::from_biguint(Sign::Plus, q);
    match (m.sign(), dir, exact) {
        (Sign::Minus, _, _) => {
            // m < 0: floor(m/2^s) = -ceil(|m|/2^s)
            let up = if exact { q.clone() } else { &q + 1 };
            match dir {
                Round::Down => -up,
                Round::Up => -q,
            }
        }
        (_, Round::Up, false) => q + 1,
        _ => q,
    }
}

fn bitlen(m: &BigInt) -> u64 {
    m.magnitude().bits()
}

/// A dyadic rational `m * 2^e`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    m: BigInt,
    e: i64,
}

impl Dyadic {
    pub fn new(m: BigInt, e: i64) -> Self {
        Dyadic { m, e }.normalized()
    }

    pub fn zero() -> Self {
        Dyadic { m: BigInt::zero(), e: 0 }
    }

    pub fn from_int(n: &BigInt) -> Self {
        Dyadic::new(n.clone(), 0)
    }

    pub fn from_i64(n: i64) -> Self {
        Dyadic::new(BigInt::from(n), 0)
    }

    fn normalized(mut self) -> Self {
        if self.m.is_zero() {
            self.e = 0;
            return self;
        }
        let tz = self.m.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.m >>= tz;
            self.e += tz as i64;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.m.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.m
    }

    pub fn exponent(&self) -> i64 {
        self.e
    }

    /// Exponent of the leading bit plus one (`|x| < 2^magnitude`).
    pub fn magnitude(&self) -> i64 {
        if self.is_zero() {
            i64::MIN / 4
        } else {
            self.e + bitlen(&self.m) as i64
        }
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic { m: -&self.m, e: self.e }
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic { m: self.m.abs(), e: self.e }
    }

    pub fn add(&self, o: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let e = self.e.min(o.e);
        let a = &self.m << (self.e - e) as u64;
        let b = &o.m << (o.e - e) as u64;
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, o: &Dyadic) -> Dyadic {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Dyadic) -> Dyadic {
        Dyadic::new(&self.m * &o.m, self.e + o.e)
    }

    pub fn mul_pow2(&self, k: i64) -> Dyadic {
        Dyadic { m: self.m.clone(), e: self.e + k }.normalized()
    }

    /// Round to at most `prec` mantissa bits in direction `dir`.
    pub fn round(&self, prec: u32, dir: Round) -> Dyadic {
        let b = bitlen(&self.m);
        if b <= prec as u64 {
            return self.clone();
        }
        let s = b - prec as u64;
        Dyadic::new(shr_round(&self.m, s, dir), self.e + s as i64)
    }

    /// Round to a multiple of `2^-frac_bits` in direction `dir`.
    pub fn round_fixed(&self, frac_bits: i64, dir: Round) -> Dyadic {
        if self.e >= -frac_bits {
            return self.clone();
        }
        let s = (-frac_bits - self.e) as u64;
        Dyadic::new(shr_round(&self.m, s, dir), -frac_bits)
    }

    pub fn from_rational(q: &BigRational, prec: u32, dir: Round) -> Dyadic {
        if q.is_zero() {
            return Dyadic::zero();
        }
        let (n, d) = (q.numer(), q.denom());
        if d.is_one() {
            return Dyadic::from_int(n).round(prec, dir);
        }
        // scale so the quotient carries `prec` bits
        let shift = prec as i64 + bitlen(d) as i64 - bitlen(n) as i64 + 2;
        let (num, den) = if shift >= 0 {
            (n << shift as u64, d.clone())
        } else {
            (n.clone(), d << (-shift) as u64)
        };
        let (qq, r) = num.div_mod_floor(&den);
        let qq = if dir == Round::Up && !r.is_zero() { qq + 1 } else { qq };
        Dyadic::new(qq, -shift).round(prec, dir)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.e >= 0 {
            BigRational::from_integer(&self.m << self.e as u64)
        } else {
            BigRational::new(self.m.clone(), BigInt::one() << (-self.e) as u64)
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let b = bitlen(&self.m) as i64;
        let s = (b - 60).max(0);
        let top = (&self.m >> s as u64).to_f64().unwrap_or(0.0);
        let exp = self.e + s;
        if exp > 2000 {
            return top.signum() * f64::INFINITY;
        }
        if exp < -2200 {
            return 0.0;
        }
        top * 2f64.powi(exp as i32)
    }

    /// Round-to-nearest on an absolute grid of spacing `2^-frac_bits`.
    pub fn round_nearest_fixed(&self, frac_bits: i64) -> Dyadic {
        if self.e >= -frac_bits {
            return self.clone();
        }
        let s = (-frac_bits - self.e) as u64;
        let half = BigInt::one() << (s - 1);
        Dyadic::new(shr_round(&(&self.m + half), s, Round::Down), -frac_bits)
    }

    pub fn from_f64(x: f64) -> Dyadic {
        if x == 0.0 || !x.is_finite() {
            return Dyadic::zero();
        }
        let bits = x.to_bits();
        let sign = if (bits >> 63) != 0 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp - 1075)
        };
        Dyadic::new(BigInt::from(m) * sign, e)
    }

    pub fn cmp_rational(&self, q: &BigRational) -> Ordering {
        self.to_rational().cmp(q)
    }

    /// Quotient rounded to `prec` bits in direction `dir`. Panics on a zero divisor.
    pub fn div_round(&self, o: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        assert!(!o.is_zero(), "dyadic division by zero");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let s = (prec as i64 + bitlen(&o.m) as i64 - bitlen(&self.m) as i64 + 2).max(0) as u64;
        let num = &self.m << s;
        let q = match dir {
            Round::Down => num.div_floor(&o.m),
            Round::Up => -((-num).div_floor(&o.m)),
        };
        Dyadic::new(q, self.e - o.e - s as i64).round(prec, dir)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sub(other).signum().cmp(&0)
    }
}

/// Closed interval `[lo, hi]` with dyadic endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Dyadic,
    pub hi: Dyadic,
}

impl Interval {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(x: Dyadic) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn zero() -> Self {
        Interval::point(Dyadic::zero())
    }

    pub fn from_int(n: &BigInt) -> Self {
        Interval::point(Dyadic::from_int(n))
    }

    pub fn from_i64(n: i64) -> Self {
        Interval::point(Dyadic::from_i64(n))
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        Interval {
            lo: Dyadic::from_rational(q, prec, Round::Down),
            hi: Dyadic::from_rational(q, prec, Round::Up),
        }
    }

    /// Midpoint with radius, `[mid - rad, mid + rad]`.
    pub fn ball(mid: &Dyadic, rad: &Dyadic) -> Self {
        let r = rad.abs();
        Interval { lo: mid.sub(&r), hi: mid.add(&r) }
    }

    fn rounded(lo: Dyadic, hi: Dyadic, prec: u32) -> Self {
        Interval { lo: lo.round(prec, Round::Down), hi: hi.round(prec, Round::Up) }
    }

    pub fn add(&self, o: &Interval, prec: u32) -> Interval {
        Interval::rounded(self.lo.add(&o.lo), self.hi.add(&o.hi), prec)
    }

    pub fn sub(&self, o: &Interval, prec: u32) -> Interval {
        Interval::rounded(self.lo.sub(&o.hi), self.hi.sub(&o.lo), prec)
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: self.hi.neg(), hi: self.lo.neg() }
    }

    pub fn mul(&self, o: &Interval, prec: u32) -> Interval {
        let c = [
            self.lo.mul(&o.lo),
            self.lo.mul(&o.hi),
            self.hi.mul(&o.lo),
            self.hi.mul(&o.hi),
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval::rounded(lo, hi, prec)
    }

    pub fn sqr(&self, prec: u32) -> Interval {
        if self.contains_zero() {
            let a = self.lo.mul(&self.lo);
            let b = self.hi.mul(&self.hi);
            Interval::rounded(Dyadic::zero(), a.max(b), prec)
        } else {
            let a = self.lo.mul(&self.lo);
            let b = self.hi.mul(&self.hi);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            Interval::rounded(lo, hi, prec)
        }
    }

    pub fn mul_dyadic(&self, d: &Dyadic, prec: u32) -> Interval {
        self.mul(&Interval::point(d.clone()), prec)
    }

    /// Division; `None` when the divisor contains zero.
    pub fn div(&self, o: &Interval, prec: u32) -> Option<Interval> {
        if o.contains_zero() {
            return None;
        }
        let mut lo: Option<Dyadic> = None;
        let mut hi: Option<Dyadic> = None;
        for n in [&self.lo, &self.hi] {
            for d in [&o.lo, &o.hi] {
                let l = n.div_round(d, prec, Round::Down);
                let h = n.div_round(d, prec, Round::Up);
                lo = Some(match lo {
                    Some(x) if x <= l => x,
                    _ => l,
                });
                hi = Some(match hi {
                    Some(x) if x >= h => x,
                    _ => h,
                });
            }
        }
        Some(Interval { lo: lo.unwrap(), hi: hi.unwrap() })
    }

    pub fn abs(&self) -> Interval {
        if self.lo.signum() >= 0 {
            self.clone()
        } else if self.hi.signum() <= 0 {
            self.neg()
        } else {
            let m = self.lo.abs().max(self.hi.abs());
            Interval { lo: Dyadic::zero(), hi: m }
        }
    }

    /// Enclosure of `max(a, b)` for `a` in self and `b` in other.
    pub fn max(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.clone().max(o.lo.clone()), hi: self.hi.clone().max(o.hi.clone()) }
    }

    pub fn pow(&self, k: u32, prec: u32) -> Interval {
        let mut result = Interval::from_i64(1);
        let mut base = self.clone();
        let mut k = k;
        // even powers go through `sqr` so that intervals around zero stay tight
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base, prec);
            }
            k >>= 1;
            if k > 0 {
                base = base.sqr(prec);
            }
        }
        result
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.signum() <= 0 && self.hi.signum() >= 0
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        self.lo.cmp_rational(q) != Ordering::Greater && self.hi.cmp_rational(q) != Ordering::Less
    }

    pub fn contains(&self, o: &Interval) -> bool {
        self.lo <= o.lo && o.hi <= self.hi
    }

    pub fn intersect(&self, o: &Interval) -> Option<Interval> {
        let lo = self.lo.clone().max(o.lo.clone());
        let hi = self.hi.clone().min(o.hi.clone());
        if lo <= hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn mid(&self) -> Dyadic {
        self.lo.add(&self.hi).mul_pow2(-1)
    }

    pub fn is_positive(&self) -> bool {
        self.lo.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.hi.signum() < 0
    }

    /// Certified comparison against a rational; `None` if undecided.
    pub fn cmp_rational(&self, q: &BigRational) -> Option<Ordering> {
        if self.hi.cmp_rational(q) == Ordering::Less {
            Some(Ordering::Less)
        } else if self.lo.cmp_rational(q) == Ordering::Greater {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    pub fn to_f64_bounds(&self) -> (f64, f64) {
        let lo = self.lo.to_f64();
        let hi = self.hi.to_f64();
        (lo.next_down(), hi.next_up())
    }

    /// Natural logarithm; `None` unless the interval is strictly positive.
    pub fn ln(&self, prec: u32) -> Option<Interval> {
        if !self.is_positive() {
            return None;
        }
        let lo = ln_enclosure(&self.lo, prec).lo;
        let hi = ln_enclosure(&self.hi, prec).hi;
        Some(Interval { lo, hi })
    }

    pub fn div_int(&self, k: i64, prec: u32) -> Interval {
        self.div(&Interval::from_i64(k), prec).expect("nonzero divisor")
    }
}

/// Fixed-point value of `atanh(z)` where `z = zn / 2^w`, with the number of
/// series terms used.
fn atanh_fixed(z: &BigInt, w: u64) -> (BigInt, u64) {
    if z.is_negative() {
        let (s, j) = atanh_fixed(&-z, w);
        return (-s, j);
    }
    let z2 = (z * z) >> w;
    let mut p = z.clone();
    let mut s = BigInt::zero();
    let mut j: u64 = 0;
    while !p.is_zero() {
        s += &p / BigInt::from(2 * j + 1);
        p = (&p * &z2) >> w;
        j += 1;
    }
    (s, j)
}

/// Certified enclosure of `ln x` for a positive dyadic.
pub fn ln_enclosure(x: &Dyadic, prec: u32) -> Interval {
    assert!(x.signum() > 0, "logarithm of a non-positive number");
    let m = x.mantissa();
    let b = bitlen(m) as i64;
    // x = y * 2^k with y in [3/4, 3/2)
    let mut s = b - 1;
    let mut k = x.exponent() + b - 1;
    let three_quarter_top = BigInt::from(3) << ((b - 2).max(0) as u64);
    if b >= 2 && *m >= three_quarter_top {
        s += 1;
        k += 1;
    }
    let guard = 24 + 64 - (k.unsigned_abs().max(1)).leading_zeros() as u64;
    let w = prec as u64 + guard;
    let y = if (w as i64) >= s {
        m << (w as i64 - s) as u64
    } else {
        shr_round(m, (s - w as i64) as u64, Round::Down)
    };
    let one = BigInt::one() << w;
    let z = ((&y - &one) << w).div_floor(&(&y + &one));
    let (sy, ty) = atanh_fixed(&z, w);
    let mut total = sy * 2;
    let mut err = BigInt::from(2 * (4 * (ty + 2) + 2) + 4);
    if k != 0 {
        let third = one.div_floor(&BigInt::from(3));
        let (sl, tl) = atanh_fixed(&third, w);
        let ln2 = sl * 2;
        let ln2_err = 2 * (4 * (tl + 2) + 2) + 4;
        total += &ln2 * k;
        err += BigInt::from(ln2_err) * BigInt::from(k.unsigned_abs());
    }
    let lo = Dyadic::new(&total - &err, -(w as i64)).round(prec + 8, Round::Down);
    let hi = Dyadic::new(&total + &err, -(w as i64)).round(prec + 8, Round::Up);
    Interval { lo, hi }
}

/// Rectangular complex interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CInterval {
    pub re: Interval,
    pub im: Interval,
}

impl CInterval {
    pub fn new(re: Interval, im: Interval) -> Self {
        CInterval { re, im }
    }

    pub fn real(re: Interval) -> Self {
        CInterval { re, im: Interval::zero() }
    }

    pub fn zero() -> Self {
        CInterval::real(Interval::zero())
    }

    pub fn one() -> Self {
        CInterval::real(Interval::from_i64(1))
    }

    pub fn add(&self, o: &CInterval, prec: u32) -> CInterval {
        CInterval { re: self.re.add(&o.re, prec), im: self.im.add(&o.im, prec) }
    }

    pub fn sub(&self, o: &CInterval, prec: u32) -> CInterval {
        CInterval { re: self.re.sub(&o.re, prec), im: self.im.sub(&o.im, prec) }
    }

    pub fn mul(&self, o: &CInterval, prec: u32) -> CInterval {
        let re = self.re.mul(&o.re, prec).sub(&self.im.mul(&o.im, prec), prec);
        let im = self.re.mul(&o.im, prec).add(&self.im.mul(&o.re, prec), prec);
        CInterval { re, im }
    }

    pub fn scale(&self, q: &Interval, prec: u32) -> CInterval {
        CInterval { re: self.re.mul(q, prec), im: self.im.mul(q, prec) }
    }

    pub fn norm_sqr(&self, prec: u32) -> Interval {
        self.re.sqr(prec).add(&self.im.sqr(prec), prec)
    }

    pub fn div(&self, o: &CInterval, prec: u32) -> Option<CInterval> {
        let d = o.norm_sqr(prec);
        let conj = CInterval { re: o.re.clone(), im: o.im.neg() };
        let n = self.mul(&conj, prec);
        Some(CInterval { re: n.re.div(&d, prec)?, im: n.im.div(&d, prec)? })
    }

    /// Upper bound on `|z|` using `|re| + |im|`.
    pub fn abs_upper(&self) -> Dyadic {
        self.re.abs().hi.add(&self.im.abs().hi)
    }

    pub fn is_real(&self) -> bool {
        self.im.lo.is_zero() && self.im.hi.is_zero()
    }

    pub fn intersect(&self, o: &CInterval) -> Option<CInterval> {
        Some(CInterval { re: self.re.intersect(&o.re)?, im: self.im.intersect(&o.im)? })
    }

    pub fn contains(&self, o: &CInterval) -> bool {
        self.re.contains(&o.re) && self.im.contains(&o.im)
    }

    pub fn disjoint(&self, o: &CInterval) -> bool {
        self.re.intersect(&o.re).is_none() || self.im.intersect(&o.im).is_none()
    }

    pub fn max_width(&self) -> Dyadic {
        self.re.width().max(self.im.width())
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.mid().to_f64(), self.im.mid().to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rational_rounding_encloses() {
        let third = q(1, 3);
        let i = Interval::from_rational(&third, 53);
        assert!(i.contains_rational(&third));
        assert!(i.width() < Dyadic::new(1.into(), -50));
        let neg = q(-7, 5);
        let j = Interval::from_rational(&neg, 30);
        assert!(j.contains_rational(&neg));
    }

    #[test]
    fn floor_shift_of_negative() {
        assert_eq!(shr_round(&BigInt::from(-5), 1, Round::Down), BigInt::from(-3));
        assert_eq!(shr_round(&BigInt::from(-5), 1, Round::Up), BigInt::from(-2));
        assert_eq!(shr_round(&BigInt::from(5), 1, Round::Up), BigInt::from(3));
        assert_eq!(shr_round(&BigInt::from(-4), 1, Round::Down), BigInt::from(-2));
    }

    #[test]
    fn ln_matches_f64() {
        for &(n, d) in &[(2i64, 1i64), (3, 1), (1, 3), (1000, 1), (7, 1024), (5, 4), (1, 1)] {
            let x = Dyadic::from_rational(&q(n, d), 200, Round::Down);
            let e = ln_enclosure(&x, 80);
            let v = (x.to_f64()).ln();
            let (lo, hi) = e.to_f64_bounds();
            assert!(lo <= v + 1e-15 && v - 1e-15 <= hi, "{n}/{d}: {lo} {v} {hi}");
            assert!(e.width() < Dyadic::new(1.into(), -70));
        }
    }

    #[test]
    fn ln_of_huge_and_tiny() {
        let x = Dyadic::new(BigInt::from(3), 4000);
        let e = ln_enclosure(&x, 64);
        let v = 3f64.ln() + 4000.0 * 2f64.ln();
        let (lo, hi) = e.to_f64_bounds();
        assert!(lo <= v + 1e-9 && v - 1e-9 <= hi);
        let y = Dyadic::new(BigInt::from(3), -4000);
        let (lo, hi) = ln_enclosure(&y, 64).to_f64_bounds();
        let v = 3f64.ln() - 4000.0 * 2f64.ln();
        assert!(lo <= v + 1e-9 && v - 1e-9 <= hi);
    }

    #[test]
    fn complex_division_encloses() {
        let p = 80;
        let a = CInterval::new(Interval::from_i64(1), Interval::from_i64(2));
        let b = CInterval::new(Interval::from_i64(3), Interval::from_i64(-1));
        let c = a.div(&b, p).unwrap();
        // (1+2i)/(3-i) = (1+7i)/10
        assert!(c.re.contains_rational(&q(1, 10)));
        assert!(c.im.contains_rational(&q(7, 10)));
    }
}
