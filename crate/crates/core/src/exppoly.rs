//! Systems of purely exponential polynomials in integer variables.
//!
//! A component is a sum of terms `a * lambda_1^{l_1(n)} * ... * lambda_k^{l_k(n)}`
//! where every `l_j` is a homogeneous integer linear form in `n in Z^r`.

use crate::error::{Error, Result};
use crate::heights::{affine_height, DEFAULT_TOLERANCE};
use crate::numfield::hnf::{self, ZMatrix};
use crate::numfield::{Field, FieldElement, FieldSpec, NumberField};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// Default search bound for multiplicative relations.
pub const DEFAULT_RELATION_BOUND: i64 = 20;
/// Largest number of terms scanned for vanishing subsums.
pub const MAX_SUBSUM_TERMS: usize = 12;

pub type ExponentVector = Vec<i64>;

pub fn sup_norm(n: &[i64]) -> i64 {
    n.iter().map(|x| x.abs()).max().unwrap_or(0)
}

/// All integer vectors of length `r` with entries in `[-bound, bound]`,
/// in lexicographic order.
pub fn box_points(r: usize, bound: i64) -> Vec<ExponentVector> {
    let mut out = Vec::new();
    let mut cur = vec![-bound; r];
    if bound < 0 {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < bound {
                cur[i] += 1;
                break;
            }
            cur[i] = -bound;
        }
    }
}

/// One term: coefficient times a product of base powers. `exponents` has one
/// row per base and one column per variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub coeff: FieldElement,
    pub exponents: Vec<Vec<i64>>,
}

impl Term {
    /// Exponent of each base at `n`.
    pub fn exponents_at(&self, n: &[i64]) -> Vec<i64> {
        self.exponents.iter().map(|row| row.iter().zip(n).map(|(a, b)| a * b).sum()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PepSystem {
    field: Field,
    r: usize,
    bases: Vec<FieldElement>,
    components: Vec<Vec<Term>>,
}

/// Cached integer powers of a fixed list of bases.
#[derive(Debug, Clone)]
pub struct PowerCache {
    bases: Vec<FieldElement>,
    cache: Vec<HashMap<i64, FieldElement>>,
}

impl PowerCache {
    pub fn new(bases: &[FieldElement]) -> Self {
        PowerCache { bases: bases.to_vec(), cache: vec![HashMap::new(); bases.len()] }
    }

    pub fn pow(&mut self, j: usize, e: i64) -> FieldElement {
        if let Some(v) = self.cache[j].get(&e) {
            return v.clone();
        }
        let v = self.bases[j].pow(e).expect("bases are nonzero");
        self.cache[j].insert(e, v.clone());
        v
    }

    /// `prod_j bases_j^{e_j}`.
    pub fn monomial(&mut self, e: &[i64]) -> FieldElement {
        let mut acc: Option<FieldElement> = None;
        for (j, &x) in e.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let p = self.pow(j, x);
            acc = Some(match acc {
                None => p,
                Some(a) => a.mul(&p),
            });
        }
        acc.unwrap_or_else(|| self.bases[0].field().one())
    }
}

impl PepSystem {
    pub fn new(field: &Field, r: usize, bases: Vec<FieldElement>, components: Vec<Vec<Term>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("a system needs at least one component".into()));
        }
        for b in &bases {
            if !NumberField::same(b.field(), field) {
                return Err(Error::FieldMismatch);
            }
            if b.is_zero() {
                return Err(Error::InvalidArgument("bases must be nonzero".into()));
            }
        }
        let k = bases.len();
        for t in components.iter().flatten() {
            if !NumberField::same(t.coeff.field(), field) {
                return Err(Error::FieldMismatch);
            }
            if t.coeff.is_zero() {
                return Err(Error::InvalidArgument("coefficients must be nonzero".into()));
            }
            if t.exponents.len() != k || t.exponents.iter().any(|row| row.len() != r) {
                return Err(Error::DimensionMismatch(format!("term exponents must be {k} x {r}")));
            }
        }
        Ok(PepSystem { field: field.clone(), r, bases, components })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Number of integer variables.
    pub fn r(&self) -> usize {
        self.r
    }

    /// Number of bases.
    pub fn k(&self) -> usize {
        self.bases.len()
    }

    /// Number of components.
    pub fn s(&self) -> usize {
        self.components.len()
    }

    pub fn bases(&self) -> &[FieldElement] {
        &self.bases
    }

    pub fn components(&self) -> &[Vec<Term>] {
        &self.components
    }

    pub fn power_cache(&self) -> PowerCache {
        PowerCache::new(&self.bases)
    }

    fn check_len(&self, n: &[i64]) -> Result<()> {
        if n.len() != self.r {
            return Err(Error::DimensionMismatch(format!("expected {} exponents, got {}", self.r, n.len())));
        }
        Ok(())
    }

    /// `(f_1(n), ..., f_s(n))`.
    pub fn evaluate(&self, n: &[i64]) -> Result<Vec<FieldElement>> {
        self.evaluate_with(&mut self.power_cache(), n)
    }

    pub fn evaluate_with(&self, cache: &mut PowerCache, n: &[i64]) -> Result<Vec<FieldElement>> {
        self.check_len(n)?;
        Ok(self
            .components
            .iter()
            .map(|terms| {
                terms.iter().fold(self.field.zero(), |acc, t| {
                    let m = if self.bases.is_empty() { self.field.one() } else { cache.monomial(&t.exponents_at(n)) };
                    acc.add(&t.coeff.mul(&m))
                })
            })
            .collect())
    }

    /// Monomial values `u_i(n)` of component `j`, without coefficients.
    pub fn term_monomials(&self, j: usize, n: &[i64]) -> Result<Vec<FieldElement>> {
        self.check_len(n)?;
        let terms = self
            .components
            .get(j)
            .ok_or_else(|| Error::DimensionMismatch(format!("no component {j}")))?;
        let mut cache = self.power_cache();
        Ok(terms
            .iter()
            .map(|t| if self.bases.is_empty() { self.field.one() } else { cache.monomial(&t.exponents_at(n)) })
            .collect())
    }

    /// Merge terms with identical exponents and drop zero coefficients.
    pub fn simplified(&self) -> PepSystem {
        let components = self
            .components
            .iter()
            .map(|terms| {
                let mut merged: Vec<Term> = Vec::new();
                for t in terms {
                    match merged.iter_mut().find(|m| m.exponents == t.exponents) {
                        Some(m) => m.coeff = m.coeff.add(&t.coeff),
                        None => merged.push(t.clone()),
                    }
                }
                merged.retain(|t| !t.coeff.is_zero());
                merged
            })
            .collect();
        PepSystem { field: self.field.clone(), r: self.r, bases: self.bases.clone(), components }
    }

    /// A system whose value set is the union of the two value sets. A new
    /// variable `t` selects between them through `(1 +- (-1)^t) / 2`.
    pub fn union(a: &PepSystem, b: &PepSystem) -> Result<PepSystem> {
        if !NumberField::same(&a.field, &b.field) {
            return Err(Error::FieldMismatch);
        }
        if a.s() != b.s() {
            return Err(Error::DimensionMismatch("systems must have the same number of components".into()));
        }
        let field = &a.field;
        let (ka, kb) = (a.k(), b.k());
        let r = a.r + b.r + 1;
        let mut bases = a.bases.clone();
        bases.extend(b.bases.iter().cloned());
        bases.push(field.from_int(-1));
        let half = BigRational::new(1.into(), 2.into());
        let lift = |t: &Term, offset_base: usize, offset_var: usize, k_own: usize, r_own: usize, sel: i64| {
            let mut ex = vec![vec![0i64; r]; ka + kb + 1];
            for j in 0..k_own {
                for i in 0..r_own {
                    ex[offset_base + j][offset_var + i] = t.exponents[j][i];
                }
            }
            let plain = Term { coeff: t.coeff.scale(&half), exponents: ex.clone() };
            ex[ka + kb][r - 1] = 1;
            let signed = Term { coeff: t.coeff.scale(&(&half * BigRational::from_integer(sel.into()))), exponents: ex };
            [plain, signed]
        };
        let components = (0..a.s())
            .map(|c| {
                let mut terms = Vec::new();
                for t in &a.components[c] {
                    terms.extend(lift(t, 0, 0, ka, a.r, 1));
                }
                for t in &b.components[c] {
                    terms.extend(lift(t, ka, a.r, kb, b.r, -1));
                }
                terms
            })
            .collect();
        PepSystem::new(field, r, bases, components)
    }

    pub fn to_spec(&self) -> PepSpec {
        PepSpec {
            field: self.field.spec(),
            r: self.r,
            bases: self.bases.iter().map(|b| b.coord_strings()).collect(),
            components: self
                .components
                .iter()
                .map(|ts| {
                    ts.iter()
                        .map(|t| TermSpec { coeff: t.coeff.coord_strings(), exponents: t.exponents.clone() })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_spec(spec: &PepSpec, field: Option<&Field>) -> Result<PepSystem> {
        let field = match field {
            Some(f) if f.spec().polynomial == spec.field.polynomial => f.clone(),
            _ => NumberField::from_spec(&spec.field)?,
        };
        let bases = spec.bases.iter().map(|b| field.parse_coords(b)).collect::<Result<Vec<_>>>()?;
        let components = spec
            .components
            .iter()
            .map(|ts| {
                ts.iter()
                    .map(|t| Ok(Term { coeff: field.parse_coords(&t.coeff)?, exponents: t.exponents.clone() }))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        PepSystem::new(&field, spec.r, bases, components)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_spec()).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<PepSystem> {
        let spec: PepSpec = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        PepSystem::from_spec(&spec, None)
    }
}

/// Serialized form of a [`PepSystem`]; field elements are power-basis
/// coordinate strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PepSpec {
    pub field: FieldSpec,
    pub r: usize,
    pub bases: Vec<Vec<String>>,
    pub components: Vec<Vec<TermSpec>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermSpec {
    pub coeff: Vec<String>,
    pub exponents: Vec<Vec<i64>>,
}

/// `offset + span(basis)` inside `Z^r`, with the basis in Hermite form and
/// the offset reduced modulo the lattice.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntegerLatticeCoset {
    pub offset: ExponentVector,
    pub basis: Vec<Vec<i64>>,
}

fn to_z(rows: &[Vec<i64>]) -> ZMatrix {
    hnf::from_i64(rows)
}

fn from_z(rows: &ZMatrix) -> Vec<Vec<i64>> {
    rows.iter().map(|r| r.iter().map(|x| x.to_i64().expect("small entry")).collect()).collect()
}

impl IntegerLatticeCoset {
    pub fn new(offset: ExponentVector, generators: &[Vec<i64>]) -> Self {
        let r = offset.len();
        let basis = if generators.is_empty() { Vec::new() } else { hnf::lattice_basis(&to_z(generators)) };
        let off: Vec<BigInt> = offset.iter().map(|&x| BigInt::from(x)).collect();
        let reduced = if basis.is_empty() { off } else { hnf::reduce_mod_lattice(&basis, &off) };
        let offset = reduced.iter().map(|x| x.to_i64().expect("small")).collect();
        let basis = from_z(&basis);
        debug_assert!(basis.iter().all(|b| b.len() == r));
        IntegerLatticeCoset { offset, basis }
    }

    /// The whole of `Z^r`.
    pub fn full(r: usize) -> Self {
        let id: Vec<Vec<i64>> = (0..r).map(|i| (0..r).map(|j| i64::from(i == j)).collect()).collect();
        IntegerLatticeCoset::new(vec![0; r], &id)
    }

    pub fn point(p: ExponentVector) -> Self {
        IntegerLatticeCoset { offset: p, basis: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, n: &[i64]) -> bool {
        let diff: Vec<BigInt> = n.iter().zip(&self.offset).map(|(a, b)| BigInt::from(a - b)).collect();
        if self.basis.is_empty() {
            return diff.iter().all(|x| x.is_zero());
        }
        hnf::solve_in_lattice(&to_z(&self.basis), &diff).is_some()
    }

    /// `offset + sum_i m_i * basis_i`.
    pub fn point_at(&self, m: &[i64]) -> ExponentVector {
        let mut p = self.offset.clone();
        for (c, b) in m.iter().zip(&self.basis) {
            for (x, y) in p.iter_mut().zip(b) {
                *x += c * y;
            }
        }
        p
    }

    /// Whether every point of `self` lies in `o`.
    pub fn is_subset_of(&self, o: &IntegerLatticeCoset) -> bool {
        if !o.contains(&self.offset) {
            return false;
        }
        let zero = vec![0; o.dim()];
        let lat = IntegerLatticeCoset { offset: zero, basis: o.basis.clone() };
        self.basis.iter().all(|b| lat.contains(b))
    }

    pub fn box_points(&self, bound: i64) -> Vec<ExponentVector> {
        box_points(self.dim(), bound).into_iter().filter(|p| self.contains(p)).collect()
    }
}

/// HNF basis of the relations `prod lambda_i^{theta_i} = 1` found with
/// `|theta|_inf <= bound`. Completeness beyond the bound is not claimed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationLattice {
    pub basis: Vec<Vec<i64>>,
    pub search_bound: i64,
    pub label: String,
}

/// Cap on the number of half-box products in the relation search.
pub const RELATION_SEARCH_CAP: u128 = 4_000_000;

pub fn relation_lattice(bases: &[FieldElement], bound: i64) -> Result<RelationLattice> {
    if bound < 1 {
        return Err(Error::InvalidArgument("search bound must be at least 1".into()));
    }
    let k = bases.len();
    let label = format!("relations within bound {bound}");
    if k == 0 {
        return Ok(RelationLattice { basis: Vec::new(), search_bound: bound, label });
    }
    let ka = k.div_ceil(2);
    let kb = k - ka;
    let side = (2 * bound + 1) as u128;
    let cells = side.pow(ka as u32);
    if cells > RELATION_SEARCH_CAP {
        return Err(Error::BoxTooLarge(cells, RELATION_SEARCH_CAP));
    }
    let mut cache = PowerCache::new(bases);
    // left half: prod lambda^a; right half: prod lambda^{-b}
    let mut left: HashMap<String, Vec<Vec<i64>>> = HashMap::new();
    for a in box_points(ka, bound) {
        let mut e = a.clone();
        e.resize(k, 0);
        left.entry(cache.monomial(&e).key()).or_default().push(a);
    }
    let mut gens: Vec<Vec<i64>> = Vec::new();
    let mut right: HashMap<String, Vec<Vec<i64>>> = HashMap::new();
    for b in box_points(kb, bound) {
        let mut e = vec![0; ka];
        e.extend(b.iter().map(|x| -x));
        let key = cache.monomial(&e).key();
        if left.contains_key(&key) {
            right.entry(key).or_default().push(b);
        }
    }
    for (key, bs) in &right {
        let as_ = &left[key];
        let (a0, b0) = (&as_[0], &bs[0]);
        let join = |a: &[i64], b: &[i64]| -> Vec<i64> { a.iter().chain(b).copied().collect() };
        gens.push(join(a0, b0));
        for a in &as_[1..] {
            let d: Vec<i64> = a.iter().zip(a0).map(|(x, y)| x - y).collect();
            gens.push(join(&d, &vec![0; kb]));
        }
        for b in &bs[1..] {
            let d: Vec<i64> = b.iter().zip(b0).map(|(x, y)| x - y).collect();
            gens.push(join(&vec![0; ka], &d));
        }
    }
    gens.retain(|g| g.iter().any(|&x| x != 0));
    let basis = if gens.is_empty() { Vec::new() } else { from_z(&hnf::lattice_basis(&to_z(&gens))) };
    for v in &basis {
        debug_assert!(cache.monomial(v).is_one());
    }
    Ok(RelationLattice { basis, search_bound: bound, label })
}

/// Root-of-unity orders `w` possible in a field of degree `d`: `phi(w) | d`
/// forces `phi(w) <= d`.
pub fn root_of_unity_bound(d: usize) -> u64 {
    // phi(w) >= sqrt(w / 2), so w <= 2 d^2
    let limit = 2 * (d as u64) * (d as u64) + 2;
    (1..=limit).filter(|&w| euler_phi(w) as usize <= d).max().unwrap_or(2)
}

fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Multiplicative order of a root of unity, or `None` beyond `bound`.
pub fn torsion_order(x: &FieldElement, bound: u64) -> Option<u64> {
    let mut p = x.clone();
    for o in 1..=bound {
        if p.is_one() {
            return Some(o);
        }
        p = p.mul(x);
    }
    None
}

/// One residue class of an [`IndependentReduction`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueClass {
    pub residue: Vec<i64>,
    pub system: PepSystem,
}

/// A system rewritten over bases without relations (within the search
/// bound). Torsion bases are folded into the coefficients, one system per
/// residue class of `n` modulo `moduli`.
#[derive(Debug, Clone)]
pub struct IndependentReduction {
    pub moduli: Vec<i64>,
    pub classes: Vec<ResidueClass>,
    /// Torsion generators found, with their orders.
    pub torsion: Vec<(FieldElement, u64)>,
    pub relations: RelationLattice,
}

impl IndependentReduction {
    pub fn class_of(&self, n: &[i64]) -> &ResidueClass {
        let res: Vec<i64> = n.iter().zip(&self.moduli).map(|(x, m)| x.rem_euclid(*m)).collect();
        self.classes.iter().find(|c| c.residue == res).expect("every residue has a class")
    }

    pub fn evaluate(&self, n: &[i64]) -> Result<Vec<FieldElement>> {
        if n.len() != self.moduli.len() {
            return Err(Error::DimensionMismatch(format!("expected {} exponents", self.moduli.len())));
        }
        self.class_of(n).system.evaluate(n)
    }
}

fn mat_t_times(v: &ZMatrix, l: &[Vec<i64>]) -> Vec<Vec<i64>> {
    // (V^T L)[j][c] = sum_i V[i][j] L[i][c]
    let k = v.len();
    let r = l.first().map_or(0, |x| x.len());
    (0..k)
        .map(|j| {
            (0..r)
                .map(|c| {
                    (0..k)
                        .map(|i| &v[i][j] * BigInt::from(l[i][c]))
                        .sum::<BigInt>()
                        .to_i64()
                        .expect("small exponent")
                })
                .collect()
        })
        .collect()
}

pub fn reduce_to_independent(f: &PepSystem, bound: i64) -> Result<IndependentReduction> {
    let rel = relation_lattice(&f.bases, bound)?;
    let r = f.r;
    if rel.basis.is_empty() {
        return Ok(IndependentReduction {
            moduli: vec![1; r],
            classes: vec![ResidueClass { residue: vec![0; r], system: f.clone() }],
            torsion: Vec::new(),
            relations: rel,
        });
    }
    let k = f.k();
    let (d, _u, v) = hnf::snf(&to_z(&rel.basis));
    let t = d.len();
    let v_inv = hnf::unimodular_inverse(&v);
    // new base j is prod_i lambda_i^{W_ij} with W = (V^{-1})^T
    let mut cache = f.power_cache();
    let mut new_bases = Vec::with_capacity(k);
    for j in 0..k {
        let e: Vec<i64> = (0..k).map(|i| v_inv[j][i].to_i64().expect("small")).collect();
        new_bases.push(cache.monomial(&e));
    }
    let rou = root_of_unity_bound(f.field.degree());
    let mut torsion = Vec::new();
    let mut orders = vec![0u64; k];
    for j in 0..t {
        if d[j] == BigInt::from(1) {
            orders[j] = 1;
            continue;
        }
        let o = torsion_order(&new_bases[j], rou).ok_or(Error::TorsionBoundExceeded(rou))?;
        orders[j] = o;
        if o > 1 {
            torsion.push((new_bases[j].clone(), o));
        }
    }
    // flip free bases whose inverse is integral when they are not
    let mut flip = vec![false; k];
    for j in t..k {
        let b = &new_bases[j];
        if !b.is_integral_in_basis() {
            let inv = b.inv()?;
            if inv.is_integral_in_basis() {
                new_bases[j] = inv;
                flip[j] = true;
            }
        }
    }
    let new_terms: Vec<Vec<(FieldElement, Vec<Vec<i64>>)>> = f
        .components
        .iter()
        .map(|ts| {
            ts.iter()
                .map(|tm| {
                    let mut ex = mat_t_times(&v, &tm.exponents);
                    for j in t..k {
                        if flip[j] {
                            ex[j].iter_mut().for_each(|x| *x = -*x);
                        }
                    }
                    (tm.coeff.clone(), ex)
                })
                .collect()
        })
        .collect();
    // per-variable modulus from the torsion exponent forms
    let mut moduli = vec![1i64; r];
    for ts in &new_terms {
        for (_, ex) in ts {
            for j in 0..t {
                let o = orders[j] as i64;
                if o <= 1 {
                    continue;
                }
                for (c, m) in moduli.iter_mut().enumerate() {
                    let need = o / o.gcd(&ex[j][c]);
                    *m = m.lcm(&need);
                }
            }
        }
    }
    let free_bases: Vec<FieldElement> = new_bases[t..].to_vec();
    let mut classes = Vec::new();
    let mut tcache = PowerCache::new(&new_bases[..t]);
    for residue in residues(&moduli) {
        let components = new_terms
            .iter()
            .map(|ts| {
                ts.iter()
                    .map(|(coeff, ex)| {
                        let tors: Vec<i64> = (0..t)
                            .map(|j| {
                                let o = orders[j] as i64;
                                if o <= 1 {
                                    0
                                } else {
                                    ex[j].iter().zip(&residue).map(|(a, b)| a * b).sum::<i64>().rem_euclid(o)
                                }
                            })
                            .collect();
                        let factor = if t == 0 { f.field.one() } else { tcache.monomial(&tors) };
                        Term { coeff: coeff.mul(&factor), exponents: ex[t..].to_vec() }
                    })
                    .collect()
            })
            .collect();
        let sys = PepSystem { field: f.field.clone(), r, bases: free_bases.clone(), components }.simplified();
        classes.push(ResidueClass { residue, system: sys });
    }
    Ok(IndependentReduction { moduli, classes, torsion, relations: rel })
}

fn residues(moduli: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &m in moduli {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..m).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// Points of a box where a nonempty proper subsum of one component
/// vanishes, with a covering by lattice cosets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegeneracyLocus {
    pub box_bound: i64,
    pub points: Vec<ExponentVector>,
    pub cosets: Vec<IntegerLatticeCoset>,
    /// True if some points could only be covered by single-point cosets.
    pub unstructured: bool,
}

pub fn degeneracy_locus(f: &PepSystem, j: usize, bound: i64) -> Result<DegeneracyLocus> {
    if bound < 1 {
        return Err(Error::InvalidArgument("box bound must be at least 1".into()));
    }
    let terms = f.components.get(j).ok_or_else(|| Error::DimensionMismatch(format!("no component {j}")))?;
    let e = terms.len();
    if e > MAX_SUBSUM_TERMS {
        return Err(Error::TooManyTerms(e, MAX_SUBSUM_TERMS));
    }
    let full: u32 = if e == 0 { 0 } else { (1u32 << e) - 1 };
    let mut cache = f.power_cache();
    let mut groups: BTreeMap<u32, Vec<ExponentVector>> = BTreeMap::new();
    let mut points = Vec::new();
    for n in box_points(f.r, bound) {
        let vals: Vec<FieldElement> = terms
            .iter()
            .map(|t| {
                let m = if f.bases.is_empty() { f.field.one() } else { cache.monomial(&t.exponents_at(&n)) };
                t.coeff.mul(&m)
            })
            .collect();
        let mut sums: Vec<FieldElement> = vec![f.field.zero(); 1usize << e];
        let mut hit = false;
        for mask in 1..full {
            let low = mask.trailing_zeros() as usize;
            sums[mask as usize] = sums[(mask & (mask - 1)) as usize].add(&vals[low]);
            if sums[mask as usize].is_zero() {
                groups.entry(mask).or_default().push(n.clone());
                hit = true;
            }
        }
        if hit {
            points.push(n);
        }
    }
    let mut cosets = Vec::new();
    let mut unstructured = false;
    for pts in groups.values() {
        let (cs, loose) = fit_cosets(pts, bound);
        cosets.extend(cs);
        unstructured |= loose;
    }
    Ok(DegeneracyLocus { box_bound: bound, points, cosets: minimal_cover(cosets), unstructured })
}

fn affine_hull(pts: &[ExponentVector]) -> IntegerLatticeCoset {
    let p0 = &pts[0];
    let gens: Vec<Vec<i64>> = pts[1..]
        .iter()
        .map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect::<Vec<i64>>())
        .filter(|v| v.iter().any(|&x| x != 0))
        .collect();
    IntegerLatticeCoset::new(p0.clone(), &gens)
}

fn hull_is_clean(c: &IntegerLatticeCoset, pts: &[ExponentVector], bound: i64) -> bool {
    let set: std::collections::HashSet<&ExponentVector> = pts.iter().collect();
    c.box_points(bound).iter().all(|p| set.contains(p))
}

/// Cosets covering exactly `pts` inside the box; the flag reports a fallback
/// to single points.
fn fit_cosets(pts: &[ExponentVector], bound: i64) -> (Vec<IntegerLatticeCoset>, bool) {
    let hull = affine_hull(pts);
    if hull_is_clean(&hull, pts, bound) {
        return (vec![hull], false);
    }
    for m in 2..=4i64 {
        let mut classes: BTreeMap<Vec<i64>, Vec<ExponentVector>> = BTreeMap::new();
        for p in pts {
            classes.entry(p.iter().map(|x| x.rem_euclid(m)).collect()).or_default().push(p.clone());
        }
        let hulls: Vec<_> = classes.values().map(|c| (affine_hull(c), c)).collect();
        if hulls.iter().all(|(h, c)| hull_is_clean(h, c, bound)) {
            return (hulls.into_iter().map(|(h, _)| h).collect(), false);
        }
    }
    (pts.iter().cloned().map(IntegerLatticeCoset::point).collect(), true)
}

fn minimal_cover(mut cosets: Vec<IntegerLatticeCoset>) -> Vec<IntegerLatticeCoset> {
    cosets.sort();
    cosets.dedup();
    let keep: Vec<bool> = (0..cosets.len())
        .map(|i| !(0..cosets.len()).any(|j| j != i && cosets[i].is_subset_of(&cosets[j]) && !cosets[j].is_subset_of(&cosets[i])))
        .collect();
    cosets.into_iter().zip(keep).filter(|(_, k)| *k).map(|(c, _)| c).collect()
}

/// `m -> f(offset + sum m_i basis_i)`, with constant parts folded into the
/// coefficients, then simplified.
pub fn restrict_to_coset(f: &PepSystem, c: &IntegerLatticeCoset) -> Result<PepSystem> {
    if c.dim() != f.r || c.basis.iter().any(|b| b.len() != f.r) {
        return Err(Error::DimensionMismatch(format!("coset lives in Z^{}, system in Z^{}", c.dim(), f.r)));
    }
    let rho = c.rank();
    let mut cache = f.power_cache();
    let components = f
        .components
        .iter()
        .map(|ts| {
            ts.iter()
                .map(|t| {
                    let shift = t.exponents_at(&c.offset);
                    let coeff = if f.bases.is_empty() { t.coeff.clone() } else { t.coeff.mul(&cache.monomial(&shift)) };
                    let exponents = t
                        .exponents
                        .iter()
                        .map(|row| (0..rho).map(|i| row.iter().zip(&c.basis[i]).map(|(a, b)| a * b).sum()).collect())
                        .collect();
                    Term { coeff, exponents }
                })
                .collect()
        })
        .collect();
    Ok(PepSystem { field: f.field.clone(), r: rho, bases: f.bases.clone(), components }.simplified())
}

/// Empirical and certified constants for `C1 |n| <= sum_i h(u_i(n)) <= C2 |n|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomHeightBounds {
    pub c1_empirical: f64,
    pub c2_empirical: f64,
    pub c2_certified_upper: f64,
    /// No nonzero `n` in the box maps every monomial to 1.
    pub injective_in_box: bool,
    pub box_bound: i64,
}

pub fn hom_height_bounds(f: &PepSystem, bound: i64) -> Result<HomHeightBounds> {
    if bound < 1 {
        return Err(Error::InvalidArgument("box bound must be at least 1".into()));
    }
    if f.r == 0 {
        return Ok(HomHeightBounds {
            c1_empirical: f64::INFINITY,
            c2_empirical: 0.0,
            c2_certified_upper: 0.0,
            injective_in_box: true,
            box_bound: bound,
        });
    }
    let mut monos: Vec<&Vec<Vec<i64>>> = Vec::new();
    for t in f.components.iter().flatten() {
        if !monos.contains(&&t.exponents) {
            monos.push(&t.exponents);
        }
    }
    let base_h = f
        .bases
        .iter()
        .map(|b| affine_height(std::slice::from_ref(b), DEFAULT_TOLERANCE).map(|h| h.log_hi))
        .collect::<Result<Vec<_>>>()?;
    let certified: f64 = monos
        .iter()
        .map(|l| {
            l.iter().zip(&base_h).map(|(row, h)| row.iter().map(|x| x.abs() as f64).sum::<f64>() * h).sum::<f64>()
        })
        .sum();
    let mut cache = f.power_cache();
    let (mut c1, mut c2) = (f64::INFINITY, 0.0f64);
    let mut injective = true;
    for n in box_points(f.r, bound) {
        let norm = sup_norm(&n);
        if norm == 0 {
            continue;
        }
        let mut total = 0.0;
        let mut all_one = true;
        for l in &monos {
            let e: Vec<i64> = l.iter().map(|row| row.iter().zip(&n).map(|(a, b)| a * b).sum()).collect();
            let u = if f.bases.is_empty() { f.field.one() } else { cache.monomial(&e) };
            all_one &= u.is_one();
            total += affine_height(std::slice::from_ref(&u), DEFAULT_TOLERANCE)?.value();
        }
        injective &= !all_one;
        let ratio = total / norm as f64;
        c1 = c1.min(ratio);
        c2 = c2.max(ratio);
    }
    Ok(HomHeightBounds {
        c1_empirical: c1,
        c2_empirical: c2,
        c2_certified_upper: certified,
        injective_in_box: injective,
        box_bound: bound,
    })
}

/// Frequently used systems.
pub mod examples {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// The field `Q(sqrt 2)` with generator `s`.
    pub fn sqrt2_field() -> Field {
        NumberField::with_symbol(&[-2, 0, 1], "s").expect("x^2 - 2 is irreducible")
    }

    /// Solutions of `x^2 - 2 y^2 = 1` in variables `(m, n)`:
    /// `x = (-1)^m ((3-2s)^n + (3+2s)^n) / 2`, `y = s/4 ((3-2s)^n - (3+2s)^n)`.
    pub fn pell() -> PepSystem {
        let k = sqrt2_field();
        let bases = vec![
            k.from_int(-1),
            k.from_power_coords(&[q(3, 1), q(-2, 1)]),
            k.from_power_coords(&[q(3, 1), q(2, 1)]),
        ];
        let half = k.from_rational(&q(1, 2));
        let s4 = k.from_power_coords(&[q(0, 1), q(1, 4)]);
        let ex = |sign: i64, which: usize| {
            let mut e = vec![vec![0, 0]; 3];
            e[0][0] = sign;
            e[which][1] = 1;
            e
        };
        let x = vec![Term { coeff: half.clone(), exponents: ex(1, 1) }, Term { coeff: half, exponents: ex(1, 2) }];
        let y = vec![Term { coeff: s4.clone(), exponents: ex(0, 1) }, Term { coeff: s4.neg(), exponents: ex(0, 2) }];
        PepSystem::new(&k, 2, bases, vec![x, y]).expect("valid system")
    }

    /// `1 + 2^{n1} - 2^{n2}` over the rationals.
    pub fn one_plus_two_powers() -> PepSystem {
        let k = NumberField::rationals();
        let t = |c: i64, e: [i64; 2]| Term { coeff: k.from_int(c), exponents: vec![e.to_vec()] };
        PepSystem::new(&k, 2, vec![k.from_int(2)], vec![vec![t(1, [0, 0]), t(1, [1, 0]), t(-1, [0, 1])]])
            .expect("valid system")
    }
}

#[cfg(test)]
mod tests {
    use super::examples::*;
    use super::*;

    fn ints(k: &Field, v: &[i64]) -> Vec<FieldElement> {
        v.iter().map(|&x| k.from_int(x)).collect()
    }

    fn single(k: &Field, bases: &[i64], forms: Vec<Vec<Vec<i64>>>, r: usize) -> PepSystem {
        let terms = forms.into_iter().map(|e| Term { coeff: k.one(), exponents: e }).collect();
        PepSystem::new(k, r, ints(k, bases), vec![terms]).unwrap()
    }

    #[test]
    fn pell_evaluation() {
        let f = pell();
        let k = f.field().clone();
        assert_eq!(f.evaluate(&[0, 0]).unwrap(), ints(&k, &[1, 0]));
        assert_eq!(f.evaluate(&[0, 1]).unwrap(), ints(&k, &[3, -2]));
        assert_eq!(f.evaluate(&[1, 1]).unwrap(), ints(&k, &[-3, -2]));
        assert_eq!(f.evaluate(&[1]).unwrap_err().code(), "DimensionMismatch");
        let two = k.from_int(2);
        for n in box_points(2, 4) {
            let v = f.evaluate(&n).unwrap();
            assert_eq!(v[0].mul(&v[0]).sub(&two.mul(&v[1]).mul(&v[1])), k.one());
        }
    }

    #[test]
    fn monomials() {
        let f = one_plus_two_powers();
        let k = f.field().clone();
        assert_eq!(f.term_monomials(0, &[3, 3]).unwrap(), ints(&k, &[1, 8, 8]));
        assert_eq!(f.term_monomials(0, &[0, 0]).unwrap(), ints(&k, &[1, 1, 1]));
        let p = pell();
        let m = p.term_monomials(0, &[0, 1]).unwrap();
        assert_eq!(m[0], p.bases()[1]);
        assert_eq!(m[1], p.bases()[2]);
    }

    #[test]
    fn relations() {
        let k = NumberField::rationals();
        assert!(relation_lattice(&ints(&k, &[2, 3]), 10).unwrap().basis.is_empty());
        assert_eq!(relation_lattice(&ints(&k, &[2, 4]), 10).unwrap().basis, vec![vec![2, -1]]);
        let p = pell();
        let rel = relation_lattice(&p.bases()[1..], 10).unwrap();
        assert_eq!(rel.basis, vec![vec![1, 1]]);
        let rel = relation_lattice(p.bases(), 5).unwrap();
        assert_eq!(rel.basis, vec![vec![2, 0, 0], vec![0, 1, 1]]);
    }

    #[test]
    fn reduction_of_dependent_bases() {
        let k = NumberField::rationals();
        let f = single(&k, &[2, 4], vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![1, 1]]], 2);
        let red = reduce_to_independent(&f, 10).unwrap();
        assert_eq!(red.classes.len(), 1);
        assert_eq!(red.classes[0].system.bases(), &[k.from_int(2)]);
        for n in box_points(2, 3) {
            assert_eq!(red.evaluate(&n).unwrap(), f.evaluate(&n).unwrap());
        }
        let g = single(&k, &[2, 3], vec![vec![vec![1, 0], vec![0, 1]]], 2);
        let red = reduce_to_independent(&g, 10).unwrap();
        assert_eq!(red.classes[0].system, g);
    }

    #[test]
    fn reduction_splits_torsion() {
        let f = pell();
        let red = reduce_to_independent(&f, 10).unwrap();
        assert_eq!(red.moduli, vec![2, 1]);
        assert_eq!(red.classes.len(), 2);
        assert_eq!(red.torsion.len(), 1);
        assert_eq!(red.torsion[0].1, 2);
        for c in &red.classes {
            assert_eq!(c.system.k(), 1);
        }
        for n in box_points(2, 3) {
            assert_eq!(red.evaluate(&n).unwrap(), f.evaluate(&n).unwrap());
        }
    }

    #[test]
    fn degeneracy_of_one_plus_powers() {
        let f = one_plus_two_powers();
        let loc = degeneracy_locus(&f, 0, 15).unwrap();
        let expect: Vec<Vec<i64>> = box_points(2, 15).into_iter().filter(|n| n[1] == 0 || n[0] == n[1]).collect();
        assert_eq!(loc.points, expect);
        assert_eq!(
            loc.cosets,
            vec![
                IntegerLatticeCoset { offset: vec![0, 0], basis: vec![vec![1, 0]] },
                IntegerLatticeCoset { offset: vec![0, 0], basis: vec![vec![1, 1]] },
            ]
        );
        assert!(!loc.unstructured);
        let k = NumberField::rationals();
        let g = PepSystem::new(
            &k,
            2,
            ints(&k, &[2, 3]),
            vec![vec![
                Term { coeff: k.one(), exponents: vec![vec![1, 0], vec![0, 0]] },
                Term { coeff: k.one(), exponents: vec![vec![0, 0], vec![0, 1]] },
            ]],
        )
        .unwrap();
        let loc = degeneracy_locus(&g, 0, 15).unwrap();
        assert!(loc.points.is_empty() && loc.cosets.is_empty());
    }

    #[test]
    fn restriction() {
        let f = one_plus_two_powers();
        let diag = IntegerLatticeCoset::new(vec![0, 0], &[vec![1, 1]]);
        let g = restrict_to_coset(&f, &diag).unwrap();
        assert_eq!(g.r(), 1);
        assert_eq!(g.components()[0].len(), 1);
        for t in -5..=5 {
            assert_eq!(g.evaluate(&[t]).unwrap(), vec![f.field().one()]);
        }
        let full = restrict_to_coset(&f, &IntegerLatticeCoset::full(2)).unwrap();
        assert_eq!(full, f);
        let p = pell();
        let m0 = IntegerLatticeCoset::new(vec![0, 0], &[vec![0, 1]]);
        let q = restrict_to_coset(&p, &m0).unwrap();
        for n in -5..=5 {
            assert_eq!(q.evaluate(&[n]).unwrap(), p.evaluate(&[0, n]).unwrap());
        }
        let shifted = IntegerLatticeCoset::new(vec![1, 0], &[vec![2, 0], vec![0, 1]]);
        let q = restrict_to_coset(&p, &shifted).unwrap();
        for m in box_points(2, 3) {
            assert_eq!(q.evaluate(&m).unwrap(), p.evaluate(&shifted.point_at(&m)).unwrap());
        }
    }

    #[test]
    fn height_constants() {
        let k = NumberField::rationals();
        let f = single(&k, &[2], vec![vec![vec![1]]], 1);
        let b = hom_height_bounds(&f, 10).unwrap();
        let l2 = 2f64.ln();
        assert!((b.c1_empirical - l2).abs() < 1e-9 && (b.c2_empirical - l2).abs() < 1e-9);
        assert!((b.c2_certified_upper - l2).abs() < 1e-9);
        let c = PepSystem::new(&k, 0, vec![], vec![vec![Term { coeff: k.one(), exponents: vec![] }]]).unwrap();
        let b = hom_height_bounds(&c, 3).unwrap();
        assert_eq!((b.c1_empirical, b.c2_empirical, b.c2_certified_upper), (f64::INFINITY, 0.0, 0.0));
    }

    #[test]
    fn pell_height_constants() {
        // the sign base makes every monomial trivial along m
        let raw = hom_height_bounds(&pell(), 10).unwrap();
        assert_eq!(raw.c1_empirical, 0.0);
        let on_n = restrict_to_coset(&pell(), &IntegerLatticeCoset::new(vec![0, 0], &[vec![0, 1]])).unwrap();
        let red = reduce_to_independent(&on_n, 20).unwrap();
        let b = hom_height_bounds(&red.class_of(&[0]).system, 10).unwrap();
        assert!(b.injective_in_box);
        assert!((b.c1_empirical - (3.0 + 2.0 * 2f64.sqrt()).ln()).abs() < 1e-9, "{b:?}");
    }

    #[test]
    fn serialization_round_trip() {
        let f = pell();
        let g = PepSystem::from_json(&f.to_json()).unwrap();
        assert_eq!(g, f);
    }

    #[test]
    fn union_of_value_sets() {
        let k = NumberField::rationals();
        let a = single(&k, &[2], vec![vec![vec![1]]], 1);
        let b = single(&k, &[3], vec![vec![vec![2]]], 1);
        let u = PepSystem::union(&a, &b).unwrap();
        let vals = |f: &PepSystem| -> std::collections::BTreeSet<String> {
            box_points(f.r(), 3).iter().map(|n| f.evaluate(n).unwrap()[0].key()).collect()
        };
        let mut both = vals(&a);
        both.extend(vals(&b));
        assert_eq!(vals(&u), both);
    }
}
