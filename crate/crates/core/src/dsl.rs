//! Text format for jobs: a field, an optional parametrization, matrices,
//! a command and its settings.
//!
//! ```text
//! field x^2 - 2 as s
//! pep vars m, n over s
//!   (-1)^(m) * (1/2) * (3 - 2s)^(n) + (-1)^(m) * (1/2) * (3 + 2s)^(n)
//!   (s/4) * (3 - 2s)^(n) - (s/4) * (3 + 2s)^(n)
//! end
//! command count-growth
//! thresholds 10^2, 10^3, 10^4
//! ```

use crate::error::{Error, Result};
use crate::exppoly::{PepSystem, Term};
use crate::matrixk::MatrixK;
use crate::numfield::poly::QPoly;
use crate::numfield::{make_field, Field, FieldElement, FieldOptions, NumberField, DEFAULT_PRECISION_CAP};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt::{self, Write as _};

/// Expression tree; integer literals are nonnegative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(BigInt),
    Ident(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
}

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Int(_) | Expr::Ident(_) => 5,
        }
    }

    pub fn int(n: i64) -> Expr {
        if n < 0 {
            Expr::Neg(Box::new(Expr::Int(BigInt::from(-n))))
        } else {
            Expr::Int(BigInt::from(n))
        }
    }

    pub fn rational(q: &BigRational) -> Expr {
        let num = Expr::Int(q.numer().abs());
        let e = if q.is_integer() { num } else { Expr::Div(Box::new(num), Box::new(Expr::Int(q.denom().clone()))) };
        if q.is_negative() {
            Expr::Neg(Box::new(e))
        } else {
            e
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool| {
            if paren {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Ident(s) => f.write_str(s),
            Expr::Neg(a) => {
                f.write_str("-")?;
                wrap(f, a, a.prec() < 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let p = self.prec();
                let op = match self {
                    Expr::Add(..) => " + ",
                    Expr::Sub(..) => " - ",
                    Expr::Mul(..) => "*",
                    _ => "/",
                };
                wrap(f, a, a.prec() < p)?;
                f.write_str(op)?;
                wrap(f, b, b.prec() <= p)
            }
            Expr::Pow(a, b) => {
                wrap(f, a, a.prec() < 5)?;
                write!(f, "^({b})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    /// Defining polynomial, low degree first.
    pub polynomial: Vec<BigInt>,
    pub symbol: String,
    pub basis: Option<Vec<Expr>>,
}

impl FieldDecl {
    pub fn rationals() -> FieldDecl {
        FieldDecl { polynomial: vec![BigInt::from(-1), BigInt::one()], symbol: "a".into(), basis: None }
    }
}

#[derive(Debug, Clone)]
pub struct PepDecl {
    pub vars: Vec<String>,
    pub over: String,
    pub components: Vec<Expr>,
    /// Source line of each component, for error reports.
    pub lines: Vec<usize>,
}

impl PartialEq for PepDecl {
    fn eq(&self, o: &Self) -> bool {
        self.vars == o.vars && self.over == o.over && self.components == o.components
    }
}

impl Eq for PepDecl {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixDecl {
    pub name: String,
    pub rows: Vec<Vec<Expr>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Tsv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Tsv => "tsv",
            Format::Json => "json",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Format> {
        match s {
            "tsv" => Ok(Format::Tsv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidArgument(format!("unknown format `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetDecl {
    pub offset: Vec<i64>,
    pub generators: Vec<Vec<i64>>,
}

/// Command parameters; all optional, defaults are chosen per command.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings {
    pub box_bound: Option<i64>,
    pub thresholds: Option<Vec<Expr>>,
    pub tolerance: Option<Expr>,
    pub max_cells: Option<u128>,
    pub precision_cap: Option<u32>,
    pub relation_bound: Option<i64>,
    pub component: Option<usize>,
    pub coset: Option<CosetDecl>,
    pub point: Option<Vec<Expr>>,
    pub primes: Option<Vec<u64>>,
    pub summands: Option<usize>,
    pub exponent_bound: Option<i64>,
    pub constant: Option<Expr>,
    pub value_box: Option<i64>,
    pub discard_factor: Option<Expr>,
    pub target: Option<String>,
    pub format: Option<Format>,
    pub output: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JobSpec {
    /// `None` means the rationals.
    pub field: Option<FieldDecl>,
    pub pep: Option<PepDecl>,
    pub matrices: Vec<MatrixDecl>,
    pub command: Option<String>,
    pub settings: Settings,
}

pub const COMMANDS: &[&str] = &[
    "height",
    "enumerate",
    "count-growth",
    "minimal",
    "evertse-scan",
    "sl2-count",
    "jordan",
    "semisimple",
    "bg-to-pep",
    "degeneracy",
    "restrict",
    "relations",
    "membership-count",
];

const KEYWORDS: &[&str] = &[
    "field",
    "basis",
    "pep",
    "end",
    "matrix",
    "command",
    "box",
    "thresholds",
    "tolerance",
    "max-cells",
    "precision-cap",
    "relation-bound",
    "component",
    "coset",
    "point",
    "primes",
    "summands",
    "exponent-bound",
    "constant",
    "value-box",
    "discard-factor",
    "target",
    "format",
    "output",
    "vars",
    "over",
    "as",
];

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, col, msg: msg.into() }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Punct(char),
}

fn tokenize(text: &str, line: usize, col0: usize) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push((Tok::Int(s.parse().expect("digits")), col));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*/^()[],;=".contains(c) {
            out.push((Tok::Punct(c), col));
            i += 1;
        } else {
            return Err(syntax(line, col, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

/// Names visible while parsing an expression.
#[derive(Clone, Copy)]
struct Scope<'a> {
    /// Name allowed outside exponents (the field symbol or `x`).
    symbol: Option<&'a str>,
    /// Names allowed inside exponents.
    vars: &'a [String],
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
    scope: Scope<'a>,
    in_exponent: bool,
}

impl<'a> Parser<'a> {
    fn new(text: &str, line: usize, col0: usize, scope: Scope<'a>) -> Result<Self> {
        Ok(Parser {
            toks: tokenize(text, line, col0)?,
            pos: 0,
            line,
            end_col: col0 + text.chars().count(),
            scope,
            in_exponent: false,
        })
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.1)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn at_punct(&self, c: char) -> bool {
        self.peek() == Some(&Tok::Punct(c))
    }

    fn eat(&mut self, c: char) -> bool {
        if self.at_punct(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        syntax(self.line, self.col(), msg)
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn finish(&self) -> Result<()> {
        if self.done() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut a = self.term()?;
        loop {
            if self.eat('+') {
                a = Expr::Add(Box::new(a), Box::new(self.term()?));
            } else if self.eat('-') {
                a = Expr::Sub(Box::new(a), Box::new(self.term()?));
            } else {
                return Ok(a);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut a = self.unary()?;
        loop {
            if self.eat('*') {
                a = Expr::Mul(Box::new(a), Box::new(self.unary()?));
            } else if self.eat('/') {
                a = Expr::Div(Box::new(a), Box::new(self.unary()?));
            } else if matches!(self.peek(), Some(Tok::Ident(_)) | Some(Tok::Punct('('))) {
                a = Expr::Mul(Box::new(a), Box::new(self.power()?));
            } else {
                return Ok(a);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let col = self.col();
        let outer = self.in_exponent;
        self.in_exponent = true;
        let e = self.exponent();
        self.in_exponent = outer;
        let e = e?;
        match linear_form(&e, self.scope.vars) {
            Some((coefs, c)) => {
                if coefs.iter().chain(std::iter::once(&c)).any(|q| !q.is_integer()) {
                    return Err(Error::NonIntegerExponentCoefficient { line: self.line, col });
                }
            }
            None => return Err(syntax(self.line, col, "exponent must be an integer linear form")),
        }
        Ok(Expr::Pow(Box::new(base), Box::new(e)))
    }

    fn exponent(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.exponent()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        let col = self.col();
        match self.toks.get(self.pos).cloned() {
            Some((Tok::Int(n), _)) => {
                self.pos += 1;
                Ok(Expr::Int(n))
            }
            Some((Tok::Ident(name), _)) => {
                self.pos += 1;
                let is_var = self.scope.vars.contains(&name);
                let is_sym = self.scope.symbol == Some(name.as_str());
                if self.in_exponent && !is_var {
                    if is_sym {
                        return Err(syntax(self.line, col, format!("`{name}` cannot appear in an exponent")));
                    }
                    return Err(Error::UnknownSymbol { name, line: self.line, col });
                }
                if !self.in_exponent && !is_sym {
                    if is_var {
                        return Err(syntax(self.line, col, format!("variable `{name}` may only appear in exponents")));
                    }
                    return Err(Error::UnknownSymbol { name, line: self.line, col });
                }
                Ok(Expr::Ident(name))
            }
            Some((Tok::Punct('('), _)) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            _ => Err(self.err("expected a number, a name or `(`")),
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.toks.get(self.pos).cloned() {
            Some((Tok::Ident(s), _)) => {
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err("expected a name")),
        }
    }

    fn expr_list(&mut self) -> Result<Vec<Expr>> {
        let mut out = vec![self.expr()?];
        while self.eat(',') {
            out.push(self.expr()?);
        }
        Ok(out)
    }

    fn signed_int(&mut self) -> Result<i64> {
        let col = self.col();
        let e = self.unary()?;
        let q = eval_rational(&e).map_err(|_| syntax(self.line, col, "expected an integer"))?;
        if !q.is_integer() {
            return Err(syntax(self.line, col, "expected an integer"));
        }
        q.to_integer().to_i64().ok_or_else(|| syntax(self.line, col, "integer out of range"))
    }

    fn int_list(&mut self) -> Result<Vec<i64>> {
        let mut out = vec![self.signed_int()?];
        while self.eat(',') {
            out.push(self.signed_int()?);
        }
        Ok(out)
    }
}

/// Exponent as integer-or-rational coefficients over `vars` plus a constant;
/// `None` when it is not affine-linear.
fn linear_form(e: &Expr, vars: &[String]) -> Option<(Vec<BigRational>, BigRational)> {
    let r = vars.len();
    let zero = || vec![BigRational::zero(); r];
    let is_const = |v: &(Vec<BigRational>, BigRational)| v.0.iter().all(|q| q.is_zero());
    Some(match e {
        Expr::Int(n) => (zero(), BigRational::from_integer(n.clone())),
        Expr::Ident(s) => {
            let i = vars.iter().position(|v| v == s)?;
            let mut c = zero();
            c[i] = BigRational::one();
            (c, BigRational::zero())
        }
        Expr::Neg(a) => {
            let (c, k) = linear_form(a, vars)?;
            (c.into_iter().map(|x| -x).collect(), -k)
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let (ca, ka) = linear_form(a, vars)?;
            let (cb, kb) = linear_form(b, vars)?;
            let sign = if matches!(e, Expr::Add(..)) { BigRational::one() } else { -BigRational::one() };
            (ca.iter().zip(&cb).map(|(x, y)| x + y * &sign).collect(), ka + kb * sign)
        }
        Expr::Mul(a, b) => {
            let la = linear_form(a, vars)?;
            let lb = linear_form(b, vars)?;
            let (s, (c, k)) = if is_const(&la) {
                (la.1, lb)
            } else if is_const(&lb) {
                (lb.1, la)
            } else {
                return None;
            };
            (c.into_iter().map(|x| x * &s).collect(), k * s)
        }
        Expr::Div(a, b) => {
            let lb = linear_form(b, vars)?;
            if !is_const(&lb) || lb.1.is_zero() {
                return None;
            }
            let (c, k) = linear_form(a, vars)?;
            (c.into_iter().map(|x| x / &lb.1).collect(), k / lb.1)
        }
        Expr::Pow(a, b) => {
            let la = linear_form(a, vars)?;
            let lb = linear_form(b, vars)?;
            if !is_const(&la) || !is_const(&lb) || !lb.1.is_integer() {
                return None;
            }
            let n = lb.1.to_integer().to_i32()?;
            if la.1.is_zero() && n < 0 {
                return None;
            }
            (zero(), num_traits::pow::Pow::pow(&la.1, n))
        }
    })
}

/// Value of a constant expression with no names.
pub fn eval_rational(e: &Expr) -> Result<BigRational> {
    let (c, k) = linear_form(e, &[]).ok_or_else(|| Error::InvalidArgument(format!("`{e}` is not a rational constant")))?;
    debug_assert!(c.is_empty());
    Ok(k)
}

/// Value of an expression in one variable as a rational polynomial.
fn eval_qpoly(e: &Expr, var: &str) -> Result<QPoly> {
    Ok(match e {
        Expr::Int(n) => QPoly::constant(BigRational::from_integer(n.clone())),
        Expr::Ident(s) if s == var => QPoly::monomial(BigRational::one(), 1),
        Expr::Ident(s) => return Err(Error::InvalidArgument(format!("unexpected name `{s}`"))),
        Expr::Neg(a) => eval_qpoly(a, var)?.neg(),
        Expr::Add(a, b) => eval_qpoly(a, var)?.add(&eval_qpoly(b, var)?),
        Expr::Sub(a, b) => eval_qpoly(a, var)?.sub(&eval_qpoly(b, var)?),
        Expr::Mul(a, b) => eval_qpoly(a, var)?.mul(&eval_qpoly(b, var)?),
        Expr::Div(a, b) => {
            let d = eval_qpoly(b, var)?;
            if !d.is_constant() || d.is_zero() {
                return Err(Error::InvalidArgument("division by a nonconstant or zero polynomial".into()));
            }
            eval_qpoly(a, var)?.scale(&d.coeff(0).recip())
        }
        Expr::Pow(a, b) => {
            let n = eval_rational(b)?;
            let n = n.to_integer().to_u32().filter(|_| n.is_integer()).ok_or_else(|| {
                Error::InvalidArgument("polynomial exponents must be nonnegative integers".into())
            })?;
            eval_qpoly(a, var)?.pow(n)
        }
    })
}

/// Value of a constant expression in `K`.
pub fn eval_field(e: &Expr, k: &Field) -> Result<FieldElement> {
    Ok(match e {
        Expr::Int(n) => k.from_bigint(n),
        Expr::Ident(s) if s == k.symbol() && k.degree() > 1 => k.generator(),
        Expr::Ident(s) => return Err(Error::InvalidArgument(format!("unexpected name `{s}`"))),
        Expr::Neg(a) => eval_field(a, k)?.neg(),
        Expr::Add(a, b) => eval_field(a, k)?.checked_add(&eval_field(b, k)?)?,
        Expr::Sub(a, b) => eval_field(a, k)?.checked_sub(&eval_field(b, k)?)?,
        Expr::Mul(a, b) => eval_field(a, k)?.checked_mul(&eval_field(b, k)?)?,
        Expr::Div(a, b) => eval_field(a, k)?.checked_div(&eval_field(b, k)?)?,
        Expr::Pow(a, b) => {
            let n = eval_rational(b)?;
            let n = n.to_integer().to_i64().filter(|_| n.is_integer()).ok_or_else(|| {
                Error::InvalidArgument("exponents of constants must be integers".into())
            })?;
            let x = eval_field(a, k)?;
            if x.is_zero() && n < 0 {
                return Err(Error::DivisionByZero);
            }
            x.pow(n)?
        }
    })
}

#[derive(Clone)]
struct Mono {
    coeff: FieldElement,
    factors: Vec<(FieldElement, Vec<i64>)>,
}

impl Mono {
    fn constant(c: FieldElement) -> Mono {
        Mono { coeff: c, factors: Vec::new() }
    }

    fn mul(&self, o: &Mono) -> Mono {
        let mut m = Mono { coeff: self.coeff.mul(&o.coeff), factors: self.factors.clone() };
        for (b, l) in &o.factors {
            m.push(b, l);
        }
        m
    }

    fn push(&mut self, b: &FieldElement, l: &[i64]) {
        match self.factors.iter_mut().find(|(x, _)| x == b) {
            Some((_, e)) => e.iter_mut().zip(l).for_each(|(x, y)| *x += y),
            None => self.factors.push((b.clone(), l.to_vec())),
        }
    }

    fn inv(&self) -> Result<Mono> {
        Ok(Mono {
            coeff: self.coeff.inv()?,
            factors: self.factors.iter().map(|(b, l)| (b.clone(), l.iter().map(|x| -x).collect())).collect(),
        })
    }

    fn pow(&self, n: i64) -> Result<Mono> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let m = n.unsigned_abs() as i64;
        Ok(Mono {
            coeff: base.coeff.pow(m)?,
            factors: base.factors.iter().map(|(b, l)| (b.clone(), l.iter().map(|x| x * m).collect())).collect(),
        })
    }
}

fn mentions(e: &Expr, vars: &[String]) -> bool {
    match e {
        Expr::Int(_) => false,
        Expr::Ident(s) => vars.contains(s),
        Expr::Neg(a) => mentions(a, vars),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
            mentions(a, vars) || mentions(b, vars)
        }
    }
}

fn expand(e: &Expr, k: &Field, vars: &[String]) -> Result<Vec<Mono>> {
    let bad = |m: &str| Error::InvalidArgument(m.to_string());
    if !mentions(e, vars) {
        return Ok(vec![Mono::constant(eval_field(e, k)?)]);
    }
    Ok(match e {
        Expr::Int(_) | Expr::Ident(_) => vec![Mono::constant(eval_field(e, k)?)],
        Expr::Neg(a) => expand(a, k, vars)?
            .into_iter()
            .map(|m| Mono { coeff: m.coeff.neg(), factors: m.factors })
            .collect(),
        Expr::Add(a, b) => [expand(a, k, vars)?, expand(b, k, vars)?].concat(),
        Expr::Sub(a, b) => [expand(a, k, vars)?, expand(&Expr::Neg(b.clone()), k, vars)?].concat(),
        Expr::Mul(a, b) => {
            let (xs, ys) = (expand(a, k, vars)?, expand(b, k, vars)?);
            xs.iter().flat_map(|x| ys.iter().map(move |y| x.mul(y))).collect()
        }
        Expr::Div(a, b) => {
            let d = expand(b, k, vars)?;
            if d.len() != 1 {
                return Err(bad("divisors must be single products"));
            }
            let inv = d[0].inv()?;
            expand(a, k, vars)?.iter().map(|x| x.mul(&inv)).collect()
        }
        Expr::Pow(a, b) => {
            let (coefs, c) = linear_form(b, vars).ok_or_else(|| bad("exponent must be a linear form"))?;
            let to_int = |q: &BigRational| q.to_integer().to_i64().ok_or_else(|| bad("exponent out of range"));
            let c = to_int(&c)?;
            let base = expand(a, k, vars)?;
            if coefs.iter().all(|q| q.is_zero()) {
                if base.len() == 1 {
                    return Ok(vec![base[0].pow(c)?]);
                }
                if c < 0 {
                    return Err(bad("negative powers of sums are not allowed"));
                }
                let mut acc = vec![Mono::constant(k.one())];
                for _ in 0..c {
                    acc = acc.iter().flat_map(|x| base.iter().map(move |y| x.mul(y))).collect();
                }
                return Ok(acc);
            }
            if base.len() != 1 || !base[0].factors.is_empty() {
                return Err(bad("bases of variable exponents must be constants"));
            }
            let b0 = base[0].coeff.clone();
            if b0.is_zero() {
                return Err(Error::DivisionByZero);
            }
            let l: Vec<i64> = coefs.iter().map(to_int).collect::<Result<_>>()?;
            vec![Mono { coeff: b0.pow(c)?, factors: vec![(b0, l)] }]
        }
    })
}

impl FieldDecl {
    pub fn build(&self, precision_cap: u32) -> Result<Field> {
        let integral_basis = match &self.basis {
            None => None,
            Some(es) => {
                let p = QPoly::from_bigints(&self.polynomial);
                let d = p.deg();
                let rows = es
                    .iter()
                    .map(|e| {
                        let r = eval_qpoly(e, &self.symbol)?.rem(&p);
                        Ok((0..d).map(|i| r.coeff(i)).collect())
                    })
                    .collect::<Result<Vec<Vec<BigRational>>>>()?;
                Some(rows)
            }
        };
        make_field(&self.polynomial, FieldOptions { symbol: self.symbol.clone(), precision_cap, integral_basis })
    }

    fn polynomial_text(&self) -> String {
        QPoly::from_bigints(&self.polynomial).display_with("x")
    }
}

impl PepDecl {
    pub fn build(&self, k: &Field) -> Result<PepSystem> {
        let r = self.vars.len();
        let mut bases: Vec<FieldElement> = Vec::new();
        let mut comps = Vec::new();
        for (e, &line) in self.components.iter().zip(&self.lines) {
            let monos = expand(e, k, &self.vars).map_err(|err| match err {
                Error::InvalidArgument(msg) => syntax(line, 1, msg),
                other => other,
            })?;
            for m in &monos {
                for (b, _) in &m.factors {
                    if !bases.contains(b) {
                        bases.push(b.clone());
                    }
                }
            }
            comps.push(monos);
        }
        let components = comps
            .into_iter()
            .map(|monos| {
                monos
                    .into_iter()
                    .map(|m| {
                        let mut ex = vec![vec![0i64; r]; bases.len()];
                        for (b, l) in m.factors {
                            let j = bases.iter().position(|x| *x == b).expect("collected");
                            ex[j] = l;
                        }
                        Term { coeff: m.coeff, exponents: ex }
                    })
                    .collect()
            })
            .collect();
        PepSystem::new(k, r, bases, components)
    }
}

impl MatrixDecl {
    pub fn build(&self, k: &Field) -> Result<MatrixK> {
        let rows = self.rows.iter().map(|r| r.iter().map(|e| eval_field(e, k)).collect()).collect::<Result<_>>()?;
        MatrixK::new(k, rows)
    }
}

impl JobSpec {
    pub fn precision_cap(&self) -> u32 {
        self.settings.precision_cap.unwrap_or(DEFAULT_PRECISION_CAP)
    }

    pub fn build_field(&self) -> Result<Field> {
        match &self.field {
            Some(f) => f.build(self.precision_cap()),
            None if self.settings.precision_cap.is_some() => FieldDecl::rationals().build(self.precision_cap()),
            None => Ok(NumberField::rationals()),
        }
    }

    /// Exact-rational settings such as thresholds.
    pub fn thresholds(&self) -> Result<Option<Vec<BigRational>>> {
        self.settings.thresholds.as_ref().map(|ts| ts.iter().map(eval_rational).collect()).transpose()
    }
}

fn field_symbol_ok(s: &str) -> bool {
    !KEYWORDS.contains(&s) && s != "Q"
}

/// Parse a job file.
pub fn parse_job(text: &str) -> Result<JobSpec> {
    let mut job = JobSpec::default();
    let lines: Vec<&str> = text.lines().collect();
    let mut i = 0;
    let mut seen: Vec<&str> = Vec::new();
    while i < lines.len() {
        let lno = i + 1;
        let raw = strip_comment(lines[i]);
        i += 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() {
            continue;
        }
        let indent = raw.len() - trimmed.len();
        let (kw, rest) = match trimmed.find(char::is_whitespace) {
            Some(p) => (&trimmed[..p], &trimmed[p..]),
            None => (trimmed, ""),
        };
        let rest_col = indent + kw.chars().count() + 1;
        if kw != "matrix" && kw != "basis" {
            if seen.contains(&kw) {
                return Err(syntax(lno, indent + 1, format!("duplicate `{kw}` line")));
            }
            seen.push(kw);
        }
        let field_sym = job.field.as_ref().map(|f| f.symbol.clone());
        let const_scope = Scope { symbol: None, vars: &[] };
        let s = &mut job.settings;
        match kw {
            "field" => {
                if job.pep.is_some() || !job.matrices.is_empty() {
                    return Err(syntax(lno, indent + 1, "the field must be declared first"));
                }
                let (poly_text, sym) = match rest.rfind(" as ") {
                    Some(p) => (&rest[..p], Some((rest[p + 4..].trim(), rest_col + p + 4))),
                    None => (rest, None),
                };
                let mut p = Parser::new(poly_text, lno, rest_col, Scope { symbol: Some("x"), vars: &[] })?;
                let e = p.expr()?;
                p.finish()?;
                let poly = eval_qpoly(&e, "x").map_err(|err| syntax(lno, rest_col, err.to_string()))?;
                if !poly.is_integral() {
                    return Err(syntax(lno, rest_col, "the defining polynomial must have integer coefficients"));
                }
                let polynomial = poly.coeffs().iter().map(|q| q.to_integer()).collect();
                let symbol = match sym {
                    Some((name, col)) => {
                        let mut sp = Parser::new(name, lno, col, const_scope)?;
                        let n = sp.ident()?;
                        sp.finish()?;
                        if !field_symbol_ok(&n) {
                            return Err(syntax(lno, col, format!("`{n}` cannot name a field generator")));
                        }
                        n
                    }
                    None => "a".into(),
                };
                job.field = Some(FieldDecl { polynomial, symbol, basis: None });
            }
            "basis" => {
                let f = job.field.as_mut().ok_or_else(|| syntax(lno, indent + 1, "`basis` must follow `field`"))?;
                if f.basis.is_some() {
                    return Err(syntax(lno, indent + 1, "duplicate `basis` line"));
                }
                let sym = f.symbol.clone();
                let mut p = Parser::new(rest, lno, rest_col, Scope { symbol: Some(&sym), vars: &[] })?;
                let es = p.expr_list()?;
                p.finish()?;
                f.basis = Some(es);
            }
            "pep" => {
                let mut p = Parser::new(rest, lno, rest_col, const_scope)?;
                if p.ident()? != "vars" {
                    return Err(syntax(lno, rest_col, "expected `vars`"));
                }
                let mut vars: Vec<String> = Vec::new();
                if !matches!(p.peek(), Some(Tok::Ident(w)) if w == "over") {
                    loop {
                        let col = p.col();
                        let v = p.ident()?;
                        if KEYWORDS.contains(&v.as_str()) || Some(&v) == field_sym.as_ref() || vars.contains(&v) {
                            return Err(syntax(lno, col, format!("`{v}` cannot name a variable")));
                        }
                        vars.push(v);
                        if !p.eat(',') {
                            break;
                        }
                    }
                }
                if p.ident()? != "over" {
                    return Err(p.err("expected `over`"));
                }
                let col = p.col();
                let over = p.ident()?;
                p.finish()?;
                let ok = match &field_sym {
                    Some(sym) => *sym == over,
                    None => over == "Q",
                };
                if !ok {
                    return Err(Error::UnknownSymbol { name: over, line: lno, col });
                }
                let mut components = Vec::new();
                let mut comp_lines = Vec::new();
                let scope = Scope { symbol: field_sym.as_deref(), vars: &vars };
                loop {
                    if i >= lines.len() {
                        return Err(syntax(lines.len() + 1, 1, "missing `end` after the pep body"));
                    }
                    let body = strip_comment(lines[i]);
                    let bl = i + 1;
                    i += 1;
                    let t = body.trim();
                    if t.is_empty() {
                        continue;
                    }
                    if t == "end" {
                        break;
                    }
                    let col0 = body.len() - body.trim_start().len() + 1;
                    let mut cp = Parser::new(body.trim_start(), bl, col0, scope)?;
                    let e = cp.expr()?;
                    cp.finish()?;
                    components.push(e);
                    comp_lines.push(bl);
                }
                if components.is_empty() {
                    return Err(syntax(lno, indent + 1, "empty pep body"));
                }
                job.pep = Some(PepDecl { vars, over, components, lines: comp_lines });
            }
            "end" => return Err(syntax(lno, indent + 1, "`end` without `pep`")),
            "matrix" => {
                let mut p = Parser::new(rest, lno, rest_col, Scope { symbol: field_sym.as_deref(), vars: &[] })?;
                let col = p.col();
                let name = p.ident()?;
                if KEYWORDS.contains(&name.as_str()) || job.matrices.iter().any(|m| m.name == name) {
                    return Err(syntax(lno, col, format!("`{name}` cannot name a matrix here")));
                }
                p.expect('=')?;
                let rows = parse_matrix(&mut p)?;
                p.finish()?;
                job.matrices.push(MatrixDecl { name, rows });
            }
            "command" => {
                let name = rest.trim();
                if !COMMANDS.contains(&name) {
                    return Err(syntax(lno, rest_col, format!("unknown command `{name}`")));
                }
                job.command = Some(name.into());
            }
            "format" => s.format = Some(rest.trim().parse().map_err(|_| syntax(lno, rest_col, "format must be tsv or json"))?),
            "output" => {
                let path = rest.trim();
                if path.is_empty() {
                    return Err(syntax(lno, rest_col, "missing output path"));
                }
                s.output = Some(path.into());
            }
            "target" => {
                let mut p = Parser::new(rest, lno, rest_col, const_scope)?;
                s.target = Some(p.ident()?);
                p.finish()?;
            }
            _ => {
                let sym = field_sym.as_deref();
                let mut p = Parser::new(rest, lno, rest_col, Scope { symbol: sym, vars: &[] })?;
                let int = |p: &mut Parser| p.signed_int();
                let nonneg = |p: &mut Parser, what: &str| -> Result<i64> {
                    let col = p.col();
                    let v = p.signed_int()?;
                    if v < 0 {
                        return Err(syntax(lno, col, format!("{what} must be nonnegative")));
                    }
                    Ok(v)
                };
                match kw {
                    "box" => s.box_bound = Some(nonneg(&mut p, "box")?),
                    "value-box" => s.value_box = Some(nonneg(&mut p, "value-box")?),
                    "relation-bound" => s.relation_bound = Some(nonneg(&mut p, "relation-bound")?),
                    "exponent-bound" => s.exponent_bound = Some(nonneg(&mut p, "exponent-bound")?),
                    "component" => s.component = Some(nonneg(&mut p, "component")? as usize),
                    "summands" => s.summands = Some(nonneg(&mut p, "summands")? as usize),
                    "max-cells" => s.max_cells = Some(nonneg(&mut p, "max-cells")? as u128),
                    "precision-cap" => s.precision_cap = Some(nonneg(&mut p, "precision-cap")? as u32),
                    "primes" => {
                        let ps = p.int_list()?;
                        if ps.iter().any(|&x| x < 2) {
                            return Err(syntax(lno, rest_col, "primes must be at least 2"));
                        }
                        s.primes = Some(ps.into_iter().map(|x| x as u64).collect());
                    }
                    "thresholds" => {
                        p.scope.symbol = None;
                        s.thresholds = Some(p.expr_list()?);
                    }
                    "tolerance" | "constant" | "discard-factor" => {
                        p.scope.symbol = None;
                        let e = p.expr()?;
                        match kw {
                            "tolerance" => s.tolerance = Some(e),
                            "constant" => s.constant = Some(e),
                            _ => s.discard_factor = Some(e),
                        }
                    }
                    "point" => s.point = Some(p.expr_list()?),
                    "coset" => {
                        let offset = p.int_list()?;
                        let mut generators = Vec::new();
                        while p.eat(';') {
                            generators.push(p.int_list()?);
                        }
                        s.coset = Some(CosetDecl { offset, generators });
                    }
                    _ => return Err(syntax(lno, indent + 1, format!("unknown keyword `{kw}`"))),
                }
                let _ = int;
                p.finish()?;
            }
        }
    }
    Ok(job)
}

fn parse_matrix(p: &mut Parser) -> Result<Vec<Vec<Expr>>> {
    p.expect('[')?;
    let mut rows = Vec::new();
    loop {
        p.expect('[')?;
        rows.push(p.expr_list()?);
        p.expect(']')?;
        if !p.eat(',') {
            break;
        }
    }
    p.expect(']')?;
    Ok(rows)
}

/// Parse a bare matrix such as `[[3, 4], [2, 3]]` over `k`.
pub fn parse_matrix_text(text: &str, k: &Field) -> Result<MatrixK> {
    let sym = k.symbol().to_string();
    let mut p = Parser::new(text, 1, 1, Scope { symbol: Some(&sym), vars: &[] })?;
    let rows = parse_matrix(&mut p)?;
    p.finish()?;
    MatrixDecl { name: "m".into(), rows }.build(k)
}

/// Parse a comma-separated tuple of field elements over `k`.
pub fn parse_point_text(text: &str, k: &Field) -> Result<Vec<FieldElement>> {
    let sym = k.symbol().to_string();
    let mut p = Parser::new(text, 1, 1, Scope { symbol: Some(&sym), vars: &[] })?;
    let es = p.expr_list()?;
    p.finish()?;
    es.iter().map(|e| eval_field(e, k)).collect()
}

/// Parse a field line body such as `x^2 - 2 as s`.
pub fn parse_field_text(text: &str) -> Result<FieldDecl> {
    let job = parse_job(&format!("field {}", text.trim()))?;
    Ok(job.field.expect("field line"))
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(p) => &line[..p],
        None => line,
    }
}

fn join<T: fmt::Display>(xs: &[T], sep: &str) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

impl fmt::Display for JobSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        if let Some(fd) = &self.field {
            writeln!(out, "field {} as {}", fd.polynomial_text(), fd.symbol)?;
            if let Some(b) = &fd.basis {
                writeln!(out, "basis {}", join(b, ", "))?;
            }
        }
        if let Some(p) = &self.pep {
            let vars = if p.vars.is_empty() { String::new() } else { format!(" {}", p.vars.join(", ")) };
            writeln!(out, "pep vars{vars} over {}", p.over)?;
            for c in &p.components {
                writeln!(out, "  {c}")?;
            }
            writeln!(out, "end")?;
        }
        for m in &self.matrices {
            let rows: Vec<String> = m.rows.iter().map(|r| format!("[{}]", join(r, ", "))).collect();
            writeln!(out, "matrix {} = [{}]", m.name, rows.join(", "))?;
        }
        if let Some(c) = &self.command {
            writeln!(out, "command {c}")?;
        }
        let s = &self.settings;
        let mut line = |k: &str, v: Option<String>| -> fmt::Result {
            if let Some(v) = v {
                writeln!(out, "{k} {v}")?;
            }
            Ok(())
        };
        line("box", s.box_bound.map(|x| x.to_string()))?;
        line("thresholds", s.thresholds.as_ref().map(|t| join(t, ", ")))?;
        line("tolerance", s.tolerance.as_ref().map(|t| t.to_string()))?;
        line("max-cells", s.max_cells.map(|x| x.to_string()))?;
        line("precision-cap", s.precision_cap.map(|x| x.to_string()))?;
        line("relation-bound", s.relation_bound.map(|x| x.to_string()))?;
        line("component", s.component.map(|x| x.to_string()))?;
        line(
            "coset",
            s.coset.as_ref().map(|c| {
                std::iter::once(join(&c.offset, ", "))
                    .chain(c.generators.iter().map(|g| join(g, ", ")))
                    .collect::<Vec<_>>()
                    .join("; ")
            }),
        )?;
        line("point", s.point.as_ref().map(|p| join(p, ", ")))?;
        line("primes", s.primes.as_ref().map(|p| join(p, ", ")))?;
        line("summands", s.summands.map(|x| x.to_string()))?;
        line("exponent-bound", s.exponent_bound.map(|x| x.to_string()))?;
        line("constant", s.constant.as_ref().map(|t| t.to_string()))?;
        line("value-box", s.value_box.map(|x| x.to_string()))?;
        line("discard-factor", s.discard_factor.as_ref().map(|t| t.to_string()))?;
        line("target", s.target.clone())?;
        line("format", s.format.map(|x| x.name().to_string()))?;
        line("output", s.output.clone())?;
        f.write_str(&out)
    }
}

/// Render a system in the job syntax, naming variables `n1, n2, ...`
/// unless `vars` is given.
pub fn pep_to_text(f: &PepSystem, vars: Option<&[String]>) -> String {
    let default: Vec<String> = (1..=f.r()).map(|i| format!("n{i}")).collect();
    let vars = vars.unwrap_or(&default);
    let k = f.field();
    let mut out = String::new();
    if k.degree() > 1 {
        let basis = if k.integral_basis().iter().enumerate().all(|(i, b)| b.coords().iter().enumerate().all(|(j, c)| {
            *c == if i == j { BigRational::one() } else { BigRational::zero() }
        })) {
            None
        } else {
            Some(k.integral_basis().iter().map(|b| b.to_string()).collect::<Vec<_>>())
        };
        let _ = writeln!(out, "field {} as {}", k.defining_polynomial().display_with("x"), k.symbol());
        if let Some(b) = basis {
            let _ = writeln!(out, "basis {}", b.join(", "));
        }
    }
    let over = if k.degree() > 1 { k.symbol().to_string() } else { "Q".into() };
    let vs = if vars.is_empty() { String::new() } else { format!(" {}", vars.join(", ")) };
    let _ = writeln!(out, "pep vars{vs} over {over}");
    for comp in f.components() {
        let terms: Vec<String> = comp
            .iter()
            .map(|t| {
                let mut parts = vec![format!("({})", t.coeff)];
                for (b, l) in f.bases().iter().zip(&t.exponents) {
                    if l.iter().all(|&x| x == 0) {
                        continue;
                    }
                    let lf: Vec<String> = l
                        .iter()
                        .zip(vars)
                        .filter(|(c, _)| **c != 0)
                        .map(|(c, v)| match c {
                            1 => v.clone(),
                            -1 => format!("-{v}"),
                            c => format!("{c}*{v}"),
                        })
                        .collect();
                    parts.push(format!("({})^({})", b, lf.join(" + ").replace("+ -", "- ")));
                }
                parts.join(" * ")
            })
            .collect();
        let body = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
        let _ = writeln!(out, "  {body}");
    }
    out.push_str("end\n");
    out
}
