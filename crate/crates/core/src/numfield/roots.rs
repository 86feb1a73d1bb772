//! Certified isolation of the complex roots of a squarefree integer polynomial.
//!
//! Approximations come from an Aberth iteration in `f64`, are polished by
//! Weierstrass (Durand-Kerner) steps at the working precision, and are then
//! certified: with `W_i = p(z_i) / (lc * prod_{j != i} (z_i - z_j))` the disks
//! `|z - z_i| <= n |W_i|` contain exactly one root each whenever they are
//! pairwise disjoint. The disks are enlarged to axis-aligned boxes.

use super::interval::{CInterval, Dyadic, Interval, Round};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// A certified enclosure of one root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootBox {
    pub value: CInterval,
    /// The root is certified to be real; `value.im` is then exactly zero.
    pub real: bool,
}

#[derive(Debug, Clone)]
struct CD {
    re: Dyadic,
    im: Dyadic,
}

impl CD {
    fn zero() -> Self {
        CD { re: Dyadic::zero(), im: Dyadic::zero() }
    }
    fn sub(&self, o: &CD, p: u32) -> CD {
        CD { re: self.re.sub(&o.re).round(p, Round::Down), im: self.im.sub(&o.im).round(p, Round::Down) }
    }
    fn mul(&self, o: &CD, p: u32) -> CD {
        let re = self.re.mul(&o.re).sub(&self.im.mul(&o.im));
        let im = self.re.mul(&o.im).add(&self.im.mul(&o.re));
        CD { re: re.round(p, Round::Down), im: im.round(p, Round::Down) }
    }
    fn div(&self, o: &CD, p: u32) -> Option<CD> {
        let d = o.re.mul(&o.re).add(&o.im.mul(&o.im));
        if d.is_zero() {
            return None;
        }
        let re = self.re.mul(&o.re).add(&self.im.mul(&o.im));
        let im = self.im.mul(&o.re).sub(&self.re.mul(&o.im));
        Some(CD { re: re.div_round(&d, p, Round::Down), im: im.div_round(&d, p, Round::Down) })
    }
    /// Cheap magnitude exponent: `max(|re|, |im|) < 2^mag`.
    fn mag(&self) -> i64 {
        self.re.magnitude().max(self.im.magnitude())
    }
    fn point(&self) -> CInterval {
        CInterval::new(Interval::point(self.re.clone()), Interval::point(self.im.clone()))
    }
}

fn horner_cd(coeffs: &[BigInt], z: &CD, p: u32) -> CD {
    let mut acc = CD::zero();
    for c in coeffs.iter().rev() {
        acc = acc.mul(z, p);
        acc.re = acc.re.add(&Dyadic::from_int(c)).round(p, Round::Down);
    }
    acc
}

fn horner_interval(coeffs: &[BigInt], z: &CInterval, p: u32) -> CInterval {
    let mut acc = CInterval::zero();
    for c in coeffs.iter().rev() {
        acc = acc.mul(z, p);
        acc.re = acc.re.add(&Interval::from_int(c), p);
    }
    acc
}

fn aberth_f64(coeffs: &[BigInt]) -> Option<Vec<Complex64>> {
    let n = coeffs.len() - 1;
    let c: Vec<f64> = coeffs.iter().map(|x| x.to_f64().unwrap_or(f64::INFINITY)).collect();
    if c.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let lc = c[n];
    // Fujiwara bound
    let mut bound: f64 = 0.0;
    for (k, ck) in c.iter().enumerate().take(n) {
        let r = (ck / lc).abs().powf(1.0 / (n - k) as f64);
        bound = bound.max(r);
    }
    let radius = (2.0 * bound).max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 0.4 + std::f64::consts::TAU * k as f64 / n as f64))
        .collect();
    let eval = |x: Complex64| -> (Complex64, Complex64) {
        let mut pv = Complex64::new(0.0, 0.0);
        let mut dv = Complex64::new(0.0, 0.0);
        for a in c.iter().rev() {
            dv = dv * x + pv;
            pv = pv * x + a;
        }
        (pv, dv)
    };
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for i in 0..n {
            let (pv, dv) = eval(z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / dv;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    s += 1.0 / (z[i] - z[j]);
                }
            }
            let w = ratio / (1.0 - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / z[i].norm().max(1.0));
            }
        }
        if moved < 1e-14 {
            break;
        }
    }
    if z.iter().all(|x| x.is_finite()) {
        Some(z)
    } else {
        None
    }
}

fn circle_start(coeffs: &[BigInt], p: u32) -> Vec<CD> {
    let n = coeffs.len() - 1;
    // crude Cauchy bound 1 + max|c_k/c_n| expressed as a power of two
    let lcb = coeffs[n].bits() as i64;
    let mb = coeffs.iter().map(|x| x.bits() as i64).max().unwrap_or(0);
    let r = 2f64.powi((mb - lcb + 2).clamp(0, 1000) as i32);
    (0..n)
        .map(|k| {
            let a = 0.4 + std::f64::consts::TAU * k as f64 / n as f64;
            CD {
                re: Dyadic::from_f64(r * a.cos()).round(p, Round::Down),
                im: Dyadic::from_f64(r * a.sin()).round(p, Round::Down),
            }
        })
        .collect()
}

fn weierstrass(coeffs: &[BigInt], z: &[CD], i: usize, p: u32) -> Option<CD> {
    let n = coeffs.len() - 1;
    let num = horner_cd(coeffs, &z[i], p);
    let mut den = CD { re: Dyadic::from_int(&coeffs[n]), im: Dyadic::zero() };
    for (j, zj) in z.iter().enumerate() {
        if j != i {
            den = den.mul(&z[i].sub(zj, p), p);
        }
    }
    num.div(&den, p)
}

/// Snap near-real approximations onto the axis and make the non-real ones
/// conjugate-symmetric. Returns false if the pairing is inconsistent.
fn symmetrize(z: &mut [CD], p: u32) -> bool {
    let snap = -((p / 2) as i64);
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for (i, zi) in z.iter_mut().enumerate() {
        let scale = zi.re.magnitude().max(0);
        if zi.im.magnitude() < snap + scale {
            zi.im = Dyadic::zero();
        } else if zi.im.signum() > 0 {
            upper.push(i);
        } else {
            lower.push(i);
        }
    }
    if upper.len() != lower.len() {
        return false;
    }
    let mut used = vec![false; lower.len()];
    for &u in &upper {
        let target = (z[u].re.to_f64(), -z[u].im.to_f64());
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for (k, &l) in lower.iter().enumerate() {
            if used[k] {
                continue;
            }
            let d = (z[l].re.to_f64() - target.0).abs() + (z[l].im.to_f64() - target.1).abs();
            if d < best_d {
                best_d = d;
                best = Some(k);
            }
        }
        let Some(k) = best else { return false };
        used[k] = true;
        let l = lower[k];
        z[l] = CD { re: z[u].re.clone(), im: z[u].im.neg() };
    }
    true
}

fn certify(coeffs: &[BigInt], z: &[CD], p: u32) -> Option<Vec<RootBox>> {
    let n = coeffs.len() - 1;
    let nn = Interval::from_i64(n as i64);
    let mut boxes = Vec::with_capacity(n);
    for i in 0..n {
        let zi = z[i].point();
        let num = horner_interval(coeffs, &zi, p);
        let mut den = CInterval::real(Interval::from_int(&coeffs[n]));
        for (j, zj) in z.iter().enumerate() {
            if j != i {
                den = den.mul(&zi.sub(&zj.point(), p), p);
            }
        }
        let w = num.div(&den, p)?;
        let r = Interval::point(w.abs_upper()).mul(&nn, p).hi;
        let real = z[i].im.is_zero();
        if !real && z[i].im.abs() <= r {
            return None;
        }
        let value = if real {
            CInterval::new(Interval::ball(&z[i].re, &r), Interval::zero())
        } else {
            CInterval::new(Interval::ball(&z[i].re, &r), Interval::ball(&z[i].im, &r))
        };
        boxes.push(RootBox { value, real });
    }
    // disjointness of the (real-extended) boxes; real boxes are tested with
    // their full disk extent in the imaginary direction
    let ext: Vec<CInterval> = boxes
        .iter()
        .map(|b| {
            if b.real {
                let r = b.value.re.width().mul_pow2(-1);
                CInterval::new(b.value.re.clone(), Interval::ball(&Dyadic::zero(), &r))
            } else {
                b.value.clone()
            }
        })
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            if !ext[i].disjoint(&ext[j]) {
                return None;
            }
        }
    }
    Some(boxes)
}

fn order_roots(mut boxes: Vec<RootBox>) -> Vec<RootBox> {
    let key = |b: &RootBox| b.value.to_f64();
    let mut real: Vec<RootBox> = boxes.iter().filter(|b| b.real).cloned().collect();
    real.sort_by(|a, b| key(a).0.partial_cmp(&key(b).0).unwrap());
    let mut upper: Vec<RootBox> =
        boxes.iter().filter(|b| !b.real && b.value.im.lo.signum() > 0).cloned().collect();
    upper.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    boxes.retain(|b| !b.real && b.value.im.hi.signum() < 0);
    let mut lower = Vec::with_capacity(upper.len());
    for u in &upper {
        let (re, im) = key(u);
        let k = boxes
            .iter()
            .enumerate()
            .min_by(|a, b| {
                let da = (key(a.1).0 - re).abs() + (key(a.1).1 + im).abs();
                let db = (key(b.1).0 - re).abs() + (key(b.1).1 + im).abs();
                da.partial_cmp(&db).unwrap()
            })
            .map(|(k, _)| k)
            .unwrap();
        lower.push(boxes.swap_remove(k));
    }
    real.extend(upper);
    real.extend(lower);
    real
}

/// Isolate all roots of a squarefree integer polynomial (coefficients low
/// degree first) to boxes of width at most `2^-prec * max(1, |root|)`.
///
/// Output order: real roots ascending, then roots in the upper half plane,
/// then their conjugates in the same order.
pub fn isolate(coeffs: &[BigInt], prec: u32, cap: u32) -> Result<Vec<RootBox>> {
    isolate_from(coeffs, prec, cap, None)
}

/// As [`isolate`], optionally seeded with approximations (e.g. from a
/// previous, coarser call).
pub fn isolate_from(
    coeffs: &[BigInt],
    prec: u32,
    cap: u32,
    seed: Option<&[(Dyadic, Dyadic)]>,
) -> Result<Vec<RootBox>> {
    let mut coeffs = coeffs.to_vec();
    while coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
    if coeffs.len() <= 1 {
        return Ok(Vec::new());
    }
    let n = coeffs.len() - 1;
    if n == 1 {
        let q = BigRational::new(-coeffs[0].clone(), coeffs[1].clone());
        let re = Interval::from_rational(&q, prec + 4);
        return Ok(vec![RootBox { value: CInterval::real(re), real: true }]);
    }
    let mut p = (prec + 24).max(64);
    let mut z: Vec<CD> = match seed {
        Some(s) if s.len() == n => {
            s.iter().map(|(a, b)| CD { re: a.clone(), im: b.clone() }).collect()
        }
        _ => match aberth_f64(&coeffs) {
            Some(v) => v
                .iter()
                .map(|c| CD { re: Dyadic::from_f64(c.re), im: Dyadic::from_f64(c.im) })
                .collect(),
            None => circle_start(&coeffs, p),
        },
    };
    loop {
        if p > cap {
            return Err(Error::PrecisionCapExceeded(cap));
        }
        for _ in 0..400 {
            let mut worst = i64::MIN;
            let mut ok = true;
            for i in 0..n {
                match weierstrass(&coeffs, &z, i, p) {
                    Some(w) => {
                        worst = worst.max(w.mag() - z[i].mag().max(0));
                        z[i] = z[i].sub(&w, p);
                    }
                    None => {
                        // coincident approximations: nudge apart
                        ok = false;
                        let eps = Dyadic::new(BigInt::from(i as i64 + 1), -(p as i64) / 2);
                        z[i].im = z[i].im.add(&eps);
                    }
                }
            }
            if ok && worst < -(p as i64) + 8 {
                break;
            }
        }
        let mut zs = z.clone();
        if symmetrize(&mut zs, p) {
            if let Some(boxes) = certify(&coeffs, &zs, p) {
                let fine = boxes.iter().all(|b| {
                    let scale = b.value.abs_upper().magnitude().max(0);
                    b.value.max_width().magnitude() <= scale - prec as i64
                });
                if fine {
                    return Ok(order_roots(boxes));
                }
            }
        }
        p = p + p / 2;
    }
}

/// Roots sorted into real and upper-half-plane representatives.
pub fn split_places(boxes: &[RootBox]) -> (Vec<CInterval>, Vec<CInterval>) {
    let real = boxes.iter().filter(|b| b.real).map(|b| b.value.clone()).collect();
    let cpx = boxes
        .iter()
        .filter(|b| !b.real && b.value.im.lo.signum() > 0)
        .map(|b| b.value.clone())
        .collect();
    (real, cpx)
}
