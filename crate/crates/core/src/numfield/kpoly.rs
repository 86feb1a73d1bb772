//! Univariate polynomials with coefficients in a number field.

use super::factor;
use super::poly::QPoly;
use super::{Field, FieldElement};
use crate::error::Result;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;

/// Polynomial over `K`, coefficients low degree first, no trailing zeros.
#[derive(Clone)]
pub struct KPoly {
    field: Field,
    c: Vec<FieldElement>,
}

impl KPoly {
    pub fn new(field: &Field, mut c: Vec<FieldElement>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        KPoly { field: field.clone(), c }
    }

    pub fn zero(field: &Field) -> Self {
        KPoly { field: field.clone(), c: Vec::new() }
    }

    pub fn constant(x: FieldElement) -> Self {
        let field = x.field().clone();
        KPoly::new(&field, vec![x])
    }

    /// `t - a`.
    pub fn linear(a: &FieldElement) -> Self {
        let field = a.field().clone();
        KPoly::new(&field, vec![a.neg(), field.one()])
    }

    pub fn from_qpoly(field: &Field, p: &QPoly) -> Self {
        KPoly::new(field, p.coeffs().iter().map(|q| field.from_rational(q)).collect())
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> FieldElement {
        self.c.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn lc(&self) -> FieldElement {
        self.c.last().cloned().unwrap_or_else(|| self.field.zero())
    }

    /// Coefficients as a rational polynomial, when all of them are rational.
    pub fn to_qpoly(&self) -> Option<QPoly> {
        self.c.iter().map(|x| x.as_rational()).collect::<Option<Vec<_>>>().map(QPoly::new)
    }

    pub fn add(&self, o: &KPoly) -> KPoly {
        let n = self.c.len().max(o.c.len());
        KPoly::new(&self.field, (0..n).map(|i| self.coeff(i).add(&o.coeff(i))).collect())
    }

    pub fn sub(&self, o: &KPoly) -> KPoly {
        let n = self.c.len().max(o.c.len());
        KPoly::new(&self.field, (0..n).map(|i| self.coeff(i).sub(&o.coeff(i))).collect())
    }

    pub fn mul(&self, o: &KPoly) -> KPoly {
        if self.is_zero() || o.is_zero() {
            return KPoly::zero(&self.field);
        }
        let mut out = vec![self.field.zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        KPoly::new(&self.field, out)
    }

    pub fn scale(&self, a: &FieldElement) -> KPoly {
        KPoly::new(&self.field, self.c.iter().map(|x| x.mul(a)).collect())
    }

    pub fn div_rem(&self, d: &KPoly) -> (KPoly, KPoly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.deg();
        let inv = d.lc().inv().expect("nonzero leading coefficient");
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (KPoly::zero(&self.field), self.clone());
        }
        let mut q = vec![self.field.zero(); r.len() - dd];
        for i in (dd..r.len()).rev() {
            let c = r[i].mul(&inv);
            if c.is_zero() {
                continue;
            }
            for j in 0..=dd {
                r[i - dd + j] = r[i - dd + j].sub(&c.mul(&d.c[j]));
            }
            q[i - dd] = c;
        }
        r.truncate(dd);
        (KPoly::new(&self.field, q), KPoly::new(&self.field, r))
    }

    pub fn rem(&self, d: &KPoly) -> KPoly {
        self.div_rem(d).1
    }

    pub fn monic(&self) -> KPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.lc().inv().expect("nonzero"))
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, o: &KPoly) -> KPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = std::mem::replace(&mut b, r);
        }
        a.monic()
    }

    pub fn derivative(&self) -> KPoly {
        KPoly::new(
            &self.field,
            self.c.iter().enumerate().skip(1).map(|(i, x)| x.scale(&BigRational::from_integer(i.into()))).collect(),
        )
    }

    pub fn eval(&self, x: &FieldElement) -> FieldElement {
        self.c.iter().rev().fold(self.field.zero(), |acc, c| acc.mul(x).add(c))
    }

    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).deg() == 0
    }

    pub fn squarefree_part(&self) -> KPoly {
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    /// `p(t + a)`.
    pub fn shift(&self, a: &FieldElement) -> KPoly {
        let lin = KPoly::new(&self.field, vec![a.clone(), self.field.one()]);
        self.c.iter().rev().fold(KPoly::zero(&self.field), |acc, c| acc.mul(&lin).add(&KPoly::constant(c.clone())))
    }

    /// Norm down to the rationals, `Res_y(f(y), p(t, y))`, by evaluating at
    /// integer points and interpolating.
    pub fn norm(&self) -> QPoly {
        let d = self.field.degree();
        let n = self.deg() * d;
        let pts: Vec<BigRational> = (0..=n as i64).map(|k| BigRational::from_integer(BigInt::from(k))).collect();
        let vals: Vec<BigRational> = pts
            .iter()
            .map(|t| self.eval(&self.field.from_rational(t)).norm())
            .collect();
        lagrange(&pts, &vals)
    }

    /// Monic irreducible factors over `K` of a squarefree polynomial.
    pub fn factor_squarefree(&self, cap: u32) -> Result<Vec<KPoly>> {
        let p = self.monic();
        if p.deg() <= 1 {
            return Ok(if p.deg() == 1 { vec![p] } else { Vec::new() });
        }
        let theta = self.field.generator();
        let mut s: i64 = 0;
        loop {
            let shift = theta.scale(&BigRational::from_integer(BigInt::from(s)));
            let q = p.shift(&shift.neg());
            let nq = q.norm();
            if nq.is_squarefree() {
                let mut out = Vec::new();
                for (g, _) in factor::factor(&nq, cap)? {
                    let h = q.gcd(&KPoly::from_qpoly(&self.field, &g));
                    if h.deg() >= 1 {
                        out.push(h.shift(&shift));
                    }
                }
                out.sort_by_key(|f| f.deg());
                return Ok(out);
            }
            s = if s <= 0 { 1 - s } else { -s };
        }
    }

    /// Roots in `K` with multiplicities, ordered by their display string.
    pub fn roots(&self, cap: u32) -> Result<Vec<(FieldElement, usize)>> {
        let mut out = Vec::new();
        for f in self.squarefree_part().factor_squarefree(cap)? {
            if f.deg() != 1 {
                continue;
            }
            let r = f.coeff(0).neg();
            let lin = KPoly::linear(&r);
            let mut m = 0;
            let mut cur = self.clone();
            loop {
                let (q, rem) = cur.div_rem(&lin);
                if !rem.is_zero() {
                    break;
                }
                m += 1;
                cur = q;
            }
            out.push((r, m));
        }
        out.sort_by_key(|(r, _)| r.key());
        Ok(out)
    }

    pub fn display_with(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, c) in self.c.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let text = c.to_string();
            let simple = c.is_rational();
            let neg = simple && text.starts_with('-');
            let mag = if neg { text[1..].to_string() } else { text.clone() };
            if s.is_empty() {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let coef = if simple { mag.clone() } else { format!("({mag})") };
            match i {
                0 => s.push_str(&coef),
                _ => {
                    if !(simple && mag == "1") {
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

/// Interpolating polynomial through `(x_i, y_i)`.
pub fn lagrange(xs: &[BigRational], ys: &[BigRational]) -> QPoly {
    let mut acc = QPoly::zero();
    for (i, (xi, yi)) in xs.iter().zip(ys).enumerate() {
        if yi.is_zero() {
            continue;
        }
        let mut basis = QPoly::one();
        let mut den = BigRational::one();
        for (j, xj) in xs.iter().enumerate() {
            if i != j {
                basis = basis.mul(&QPoly::linear_root(xj));
                den *= xi - xj;
            }
        }
        acc = acc.add(&basis.scale(&(yi / den)));
    }
    acc
}

impl PartialEq for KPoly {
    fn eq(&self, o: &Self) -> bool {
        self.c == o.c
    }
}

impl Eq for KPoly {}

impl fmt::Debug for KPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KPoly({})", self.display_with("t"))
    }
}

impl fmt::Display for KPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with("t"))
    }
}
