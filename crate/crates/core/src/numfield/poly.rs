//! Dense univariate polynomials with rational coefficients.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Polynomial over the rationals, coefficients stored low degree first and
/// without trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QPoly {
    c: Vec<BigRational>,
}

impl QPoly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        QPoly { c }
    }

    pub fn from_ints<T: Into<BigInt> + Clone>(c: &[T]) -> Self {
        QPoly::new(c.iter().map(|x| BigRational::from_integer(x.clone().into())).collect())
    }

    pub fn from_bigints(c: &[BigInt]) -> Self {
        QPoly::new(c.iter().map(|x| BigRational::from_integer(x.clone())).collect())
    }

    pub fn zero() -> Self {
        QPoly { c: Vec::new() }
    }

    pub fn one() -> Self {
        QPoly::constant(BigRational::one())
    }

    pub fn constant(a: BigRational) -> Self {
        QPoly::new(vec![a])
    }

    /// `t - a`
    pub fn linear_root(a: &BigRational) -> Self {
        QPoly::new(vec![-a.clone(), BigRational::one()])
    }

    pub fn monomial(a: BigRational, k: usize) -> Self {
        let mut c = vec![BigRational::zero(); k + 1];
        c[k] = a;
        QPoly::new(c)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.c.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    /// Degree with the zero polynomial mapped to 0.
    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn lc(&self) -> BigRational {
        self.c.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    pub fn add(&self, o: &QPoly) -> QPoly {
        let n = self.c.len().max(o.c.len());
        QPoly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &QPoly) -> QPoly {
        let n = self.c.len().max(o.c.len());
        QPoly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn neg(&self) -> QPoly {
        QPoly { c: self.c.iter().map(|x| -x).collect() }
    }

    pub fn mul(&self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly::zero();
        }
        let mut c = vec![BigRational::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        QPoly::new(c)
    }

    pub fn scale(&self, a: &BigRational) -> QPoly {
        QPoly::new(self.c.iter().map(|x| x * a).collect())
    }

    pub fn pow(&self, k: u32) -> QPoly {
        let mut r = QPoly::one();
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    /// Euclidean division. Panics if `d` is zero.
    pub fn div_rem(&self, d: &QPoly) -> (QPoly, QPoly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.deg();
        if self.c.len() < d.c.len() {
            return (QPoly::zero(), self.clone());
        }
        let inv = d.lc().recip();
        let mut r = self.c.clone();
        let mut q = vec![BigRational::zero(); self.c.len() - dd];
        for i in (dd..r.len()).rev() {
            let t = &r[i] * &inv;
            if t.is_zero() {
                continue;
            }
            for (j, dc) in d.c.iter().enumerate() {
                r[i - dd + j] -= &t * dc;
            }
            q[i - dd] = t;
        }
        r.truncate(dd);
        (QPoly::new(q), QPoly::new(r))
    }

    pub fn rem(&self, d: &QPoly) -> QPoly {
        self.div_rem(d).1
    }

    pub fn monic(&self) -> QPoly {
        if self.is_zero() {
            return QPoly::zero();
        }
        self.scale(&self.lc().recip())
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, o: &QPoly) -> QPoly {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r.primitive_rational();
        }
        a.monic()
    }

    /// Extended gcd: returns `(g, s, t)` with `s*self + t*o = g`, `g` monic.
    pub fn xgcd(&self, o: &QPoly) -> (QPoly, QPoly, QPoly) {
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (QPoly::one(), QPoly::zero());
        let (mut t0, mut t1) = (QPoly::zero(), QPoly::one());
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let s = s0.sub(&q.mul(&s1));
            let t = t0.sub(&q.mul(&t1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
            t0 = std::mem::replace(&mut t1, t);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = r0.lc().recip();
        (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
    }

    pub fn derivative(&self) -> QPoly {
        QPoly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| a * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for a in self.c.iter().rev() {
            acc = acc * x + a;
        }
        acc
    }

    /// `self(t + a)`
    pub fn shift(&self, a: &BigRational) -> QPoly {
        let lin = QPoly::new(vec![a.clone(), BigRational::one()]);
        let mut acc = QPoly::zero();
        for c in self.c.iter().rev() {
            acc = acc.mul(&lin).add(&QPoly::constant(c.clone()));
        }
        acc
    }

    /// Rescale so that the coefficients are coprime integers (sign kept).
    fn primitive_rational(&self) -> QPoly {
        if self.is_zero() {
            return QPoly::zero();
        }
        let ints = self.integer_coeffs();
        QPoly::from_bigints(&ints)
    }

    /// Primitive integer coefficients with positive leading coefficient.
    pub fn primitive_int(&self) -> Vec<BigInt> {
        if self.is_zero() {
            return Vec::new();
        }
        let mut v = self.integer_coeffs();
        if v.last().unwrap().is_negative() {
            for x in v.iter_mut() {
                *x = -x.clone();
            }
        }
        v
    }

    fn integer_coeffs(&self) -> Vec<BigInt> {
        let den = self.c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let v: Vec<BigInt> = self.c.iter().map(|x| x.numer() * (&den / x.denom())).collect();
        let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        v.into_iter().map(|x| x / &g).collect()
    }

    pub fn is_integral(&self) -> bool {
        self.c.iter().all(|x| x.is_integer())
    }

    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).is_constant()
    }

    pub fn squarefree_part(&self) -> QPoly {
        if self.is_constant() {
            return QPoly::one();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    /// Yun's squarefree decomposition: monic `(factor, multiplicity)` pairs.
    pub fn squarefree_decomposition(&self) -> Vec<(QPoly, usize)> {
        let mut out = Vec::new();
        if self.is_constant() {
            return out;
        }
        let f = self.monic();
        let d = f.derivative();
        let a0 = f.gcd(&d);
        let mut b = f.div_rem(&a0).0;
        let mut c = d.div_rem(&a0).0;
        let mut dd = c.sub(&b.derivative());
        let mut i = 1;
        while !b.is_constant() {
            let a = b.gcd(&dd);
            b = b.div_rem(&a).0;
            c = dd.div_rem(&a).0;
            if !a.is_constant() {
                out.push((a.monic(), i));
            }
            dd = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    /// Resultant by the Euclidean recurrence over the rationals.
    pub fn resultant(&self, o: &QPoly) -> BigRational {
        if self.is_zero() || o.is_zero() {
            return BigRational::zero();
        }
        let (mut a, mut b) = (self.clone(), o.clone());
        let mut acc = BigRational::one();
        loop {
            let m = a.deg();
            let n = b.deg();
            if n == 0 {
                return acc * num_traits::pow(b.lc(), m);
            }
            let r = a.rem(&b);
            if r.is_zero() {
                return BigRational::zero();
            }
            let k = r.deg();
            if (m * n) % 2 == 1 {
                acc = -acc;
            }
            acc *= num_traits::pow(b.lc(), m - k);
            a = b;
            b = r;
        }
    }

    pub fn discriminant(&self) -> BigRational {
        let n = self.deg();
        let r = self.resultant(&self.derivative());
        let sign = if (n * (n.saturating_sub(1)) / 2) % 2 == 1 { -BigRational::one() } else { BigRational::one() };
        sign * r / self.lc()
    }

    /// Render with the given variable name, highest degree first.
    pub fn display_with(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, a) in self.c.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            let neg = a.is_negative();
            let mag = a.abs();
            if s.is_empty() {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let coef = if mag.is_integer() { mag.numer().to_string() } else { format!("({mag})") };
            match i {
                0 => s.push_str(&coef),
                _ => {
                    if !mag.is_one() {
                        s.push_str(&coef);
                        s.push('*');
                    }
                    s.push_str(var);
                    if i > 1 {
                        s.push_str(&format!("^{i}"));
                    }
                }
            }
        }
        s
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with("t"))
    }
}
