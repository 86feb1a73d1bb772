//! Box scans over systems: value sets, height counts, minimal exponent
//! vectors, S-unit sums and matrix baselines.

use crate::error::{Error, Result};
use crate::exppoly::{box_points, sup_norm, ExponentVector, PepSystem, PowerCache};
use crate::heights::{affine_height, compare_height, HeightValue, DEFAULT_TOLERANCE};
use crate::matrixk::MatrixK;
use crate::numfield::{Field, FieldElement};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

/// Default cap on the number of box cells scanned.
pub const DEFAULT_MAX_CELLS: u128 = 100_000_000;

/// Canonical key of a value tuple.
pub fn tuple_key(v: &[FieldElement]) -> String {
    v.iter().map(|x| x.key()).collect::<Vec<_>>().join(";")
}

fn cells(r: usize, bound: i64) -> u128 {
    ((2 * bound + 1) as u128).saturating_pow(r as u32)
}

#[cfg(feature = "parallel")]
fn scan<T: Send>(
    f: &PepSystem,
    pts: &[ExponentVector],
    op: impl Fn(&mut PowerCache, &ExponentVector) -> T + Sync,
) -> Vec<T> {
    use rayon::prelude::*;
    pts.par_chunks(256)
        .flat_map_iter(|chunk| {
            let mut cache = f.power_cache();
            chunk.iter().map(|p| op(&mut cache, p)).collect::<Vec<_>>()
        })
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn scan<T: Send>(
    f: &PepSystem,
    pts: &[ExponentVector],
    op: impl Fn(&mut PowerCache, &ExponentVector) -> T + Sync,
) -> Vec<T> {
    let mut cache = f.power_cache();
    pts.iter().map(|p| op(&mut cache, p)).collect()
}

#[cfg(feature = "parallel")]
fn par_map<A: Sync, T: Send>(xs: &[A], op: impl Fn(&A) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    xs.par_iter().map(op).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<A: Sync, T: Send>(xs: &[A], op: impl Fn(&A) -> T + Sync + Send) -> Vec<T> {
    xs.iter().map(op).collect()
}

#[derive(Debug, Clone)]
pub struct ValueEntry {
    pub value: Vec<FieldElement>,
    pub witnesses: Vec<ExponentVector>,
}

/// Box-truncated image of a system, keyed by exact value.
#[derive(Debug, Clone)]
pub struct ValueSet {
    pub box_bound: i64,
    pub values: BTreeMap<String, ValueEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueRecord {
    pub key: String,
    pub value: Vec<Vec<String>>,
    pub display: Vec<String>,
    pub witnesses: Vec<ExponentVector>,
}

impl ValueSet {
    fn insert_points(&mut self, f: &PepSystem, pts: &[ExponentVector]) -> Result<usize> {
        let evals = scan(f, pts, |cache, n| f.evaluate_with(cache, n).map(|v| (tuple_key(&v), v, n.clone())));
        let mut fresh = 0;
        for e in evals {
            let (key, value, n) = e?;
            let entry = self.values.entry(key).or_insert_with(|| {
                fresh += 1;
                ValueEntry { value, witnesses: Vec::new() }
            });
            entry.witnesses.push(n);
        }
        for v in self.values.values_mut() {
            v.witnesses.sort();
        }
        Ok(fresh)
    }

    pub fn records(&self) -> Vec<ValueRecord> {
        self.values
            .iter()
            .map(|(k, e)| ValueRecord {
                key: k.clone(),
                value: e.value.iter().map(|x| x.coord_strings()).collect(),
                display: e.value.iter().map(|x| x.to_string()).collect(),
                witnesses: e.witnesses.clone(),
            })
            .collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("value\twitnesses\n");
        for r in self.records() {
            let w: Vec<String> = r.witnesses.iter().map(|n| fmt_vec(n)).collect();
            s.push_str(&format!("({})\t{}\n", r.display.join(", "), w.join(" ")));
        }
        s
    }
}

fn fmt_vec(n: &[i64]) -> String {
    format!("({})", n.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
}

pub fn enumerate_values(f: &PepSystem, bound: i64, max_cells: u128) -> Result<ValueSet> {
    if bound < 0 {
        return Err(Error::InvalidArgument("box bound must be nonnegative".into()));
    }
    let c = cells(f.r(), bound);
    if c > max_cells {
        return Err(Error::BoxTooLarge(c, max_cells));
    }
    let mut set = ValueSet { box_bound: bound, values: BTreeMap::new() };
    set.insert_points(f, &box_points(f.r(), bound))?;
    Ok(set)
}

/// Least-squares line `y = slope x + intercept`.
pub fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return (0.0, my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// Fit of `count` against `log H`.
    pub slope_vs_log: f64,
    pub intercept_vs_log: f64,
    pub residuals: Vec<f64>,
    /// Slope of `log count` against `log log H`.
    pub log_power_exponent: Option<f64>,
    /// Slope of `log count` against `log H`.
    pub power_law_exponent: Option<f64>,
}

impl GrowthFit {
    fn new(hs: &[f64], counts: &[u64]) -> GrowthFit {
        let lin: Vec<(f64, f64)> = hs.iter().zip(counts).map(|(h, c)| (h.ln(), *c as f64)).collect();
        let (slope, intercept) = if lin.len() >= 2 { least_squares(&lin) } else { (0.0, 0.0) };
        let residuals = lin.iter().map(|(x, y)| y - (slope * x + intercept)).collect();
        let pos: Vec<(f64, f64)> = hs.iter().zip(counts).filter(|(h, c)| **c > 0 && h.ln() > 0.0).map(|(h, c)| (*h, *c as f64)).collect();
        let fit = |pts: Vec<(f64, f64)>| if pts.len() >= 2 { Some(least_squares(&pts).0) } else { None };
        GrowthFit {
            slope_vs_log: slope,
            intercept_vs_log: intercept,
            residuals,
            log_power_exponent: fit(pos.iter().filter(|(h, _)| h.ln() > 1.0).map(|(h, c)| (h.ln().ln(), c.ln())).collect()),
            power_law_exponent: fit(pos.iter().map(|(h, c)| (h.ln(), c.ln())).collect()),
        }
    }
}

/// Counts at increasing thresholds with fitted growth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSeries {
    pub thresholds: Vec<String>,
    pub counts: Vec<u64>,
    pub fit: GrowthFit,
    /// Final enumeration box, when one was used.
    pub box_bound: Option<i64>,
    /// Counts cover only the scanned box.
    pub box_relative: bool,
}

impl GrowthSeries {
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("H\tcount\n");
        for (h, c) in self.thresholds.iter().zip(&self.counts) {
            s.push_str(&format!("{h}\t{c}\n"));
        }
        s
    }
}

fn check_thresholds(ts: &[BigRational]) -> Result<()> {
    if ts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonMonotoneThresholds);
    }
    if ts.iter().any(|t| *t <= BigRational::one()) {
        return Err(Error::InvalidArgument("thresholds must exceed 1".into()));
    }
    Ok(())
}

/// Count distinct values with `H_aff <= H` for each threshold `H`, growing
/// the box until two consecutive expansions add no value below the largest
/// threshold.
pub fn count_growth(f: &PepSystem, thresholds: &[BigRational], max_cells: u128) -> Result<GrowthSeries> {
    check_thresholds(thresholds)?;
    let top = thresholds.last().ok_or_else(|| Error::InvalidArgument("no thresholds".into()))?;
    let below = |v: &[FieldElement], h: &BigRational| compare_height(v, h).map(|o| o != Ordering::Greater);
    let mut set = ValueSet { box_bound: 0, values: BTreeMap::new() };
    set.insert_points(f, &[vec![0; f.r()]])?;
    let mut counted: BTreeSet<String> = BTreeSet::new();
    let mut quiet = 0;
    let mut bound = 0;
    let update = |set: &ValueSet, counted: &mut BTreeSet<String>| -> Result<usize> {
        let fresh: Vec<(&String, &ValueEntry)> = set.values.iter().filter(|(k, _)| !counted.contains(*k)).collect();
        let flags = par_map(&fresh, |(_, e)| below(&e.value, top));
        let mut added = 0;
        for ((k, _), fl) in fresh.iter().zip(flags) {
            if fl? {
                added += 1;
            }
            counted.insert((*k).clone());
        }
        Ok(added)
    };
    update(&set, &mut counted)?;
    if f.r() > 0 {
        while quiet < 2 {
            bound += 1;
            let c = cells(f.r(), bound);
            if c > max_cells {
                return Err(Error::BoxTooLarge(c, max_cells));
            }
            let shell: Vec<ExponentVector> =
                box_points(f.r(), bound).into_iter().filter(|n| sup_norm(n) == bound).collect();
            set.insert_points(f, &shell)?;
            let added = update(&set, &mut counted)?;
            quiet = if added == 0 { quiet + 1 } else { 0 };
        }
    }
    let values: Vec<&ValueEntry> = set.values.values().collect();
    let per_value: Vec<Result<usize>> = par_map(&values, |e| {
        // index of the first threshold that the value does not exceed
        let mut lo = 0;
        let mut hi = thresholds.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            if below(&e.value, &thresholds[mid])? {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(lo)
    });
    let mut counts = vec![0u64; thresholds.len()];
    for idx in per_value {
        let i = idx?;
        if i < counts.len() {
            counts[i] += 1;
        }
    }
    for i in 1..counts.len() {
        counts[i] += counts[i - 1];
    }
    let hs: Vec<f64> = thresholds.iter().map(|t| t.to_f64().unwrap_or(f64::MAX)).collect();
    Ok(GrowthSeries {
        thresholds: thresholds.iter().map(|t| t.to_string()).collect(),
        fit: GrowthFit::new(&hs, &counts),
        counts,
        box_bound: Some(bound),
        box_relative: f.r() > 0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalEntry {
    pub key: String,
    pub value: Vec<String>,
    pub minimal_vectors: Vec<ExponentVector>,
    pub norm: i64,
    pub height: HeightValue,
    /// `h_aff(f(n)) / |n|` for `|n| >= 1`.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalityReport {
    pub box_bound: i64,
    pub entries: Vec<MinimalEntry>,
    pub median_ratio: Option<f64>,
    /// Minimum ratio after discarding exceptional candidates.
    pub c_estimate: Option<f64>,
    pub exceptional_candidates: Vec<MinimalEntry>,
    pub discard_factor: f64,
    pub box_relative: bool,
}

impl MinimalityReport {
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("value\tnorm\tminimal_vectors\tlog_height\tratio\texceptional\n");
        let exc: BTreeSet<&String> = self.exceptional_candidates.iter().map(|e| &e.key).collect();
        for e in &self.entries {
            let w: Vec<String> = e.minimal_vectors.iter().map(|n| fmt_vec(n)).collect();
            s.push_str(&format!(
                "({})\t{}\t{}\t{:.12}\t{}\t{}\n",
                e.value.join(", "),
                e.norm,
                w.join(" "),
                e.height.value(),
                e.ratio.map_or("-".into(), |r| format!("{r:.12}")),
                exc.contains(&e.key)
            ));
        }
        s
    }
}

/// Default factor below the median ratio that marks an exceptional value.
pub const DEFAULT_DISCARD_FACTOR: f64 = 5.0;

pub fn minimal_vectors(f: &PepSystem, bound: i64, max_cells: u128, discard_factor: f64) -> Result<MinimalityReport> {
    if bound < 1 {
        return Err(Error::InvalidArgument("box bound must be at least 1".into()));
    }
    let set = enumerate_values(f, bound, max_cells)?;
    let items: Vec<(&String, &ValueEntry)> = set.values.iter().collect();
    let entries: Vec<Result<MinimalEntry>> = par_map(&items, |(key, e)| {
        let norm = e.witnesses.iter().map(|n| sup_norm(n)).min().expect("nonempty");
        let minimal: Vec<ExponentVector> = e.witnesses.iter().filter(|n| sup_norm(n) == norm).cloned().collect();
        let height = affine_height(&e.value, DEFAULT_TOLERANCE)?;
        let ratio = if norm >= 1 { Some(height.value() / norm as f64) } else { None };
        Ok(MinimalEntry {
            key: (*key).clone(),
            value: e.value.iter().map(|x| x.to_string()).collect(),
            minimal_vectors: minimal,
            norm,
            height,
            ratio,
        })
    });
    let entries = entries.into_iter().collect::<Result<Vec<_>>>()?;
    let mut ratios: Vec<f64> = entries.iter().filter_map(|e| e.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let median = if ratios.is_empty() {
        None
    } else if ratios.len() % 2 == 1 {
        Some(ratios[ratios.len() / 2])
    } else {
        Some(0.5 * (ratios[ratios.len() / 2 - 1] + ratios[ratios.len() / 2]))
    };
    let cut = median.map(|m| m / discard_factor);
    let (exceptional, kept): (Vec<&MinimalEntry>, Vec<&MinimalEntry>) =
        entries.iter().filter(|e| e.ratio.is_some()).partition(|e| cut.is_some_and(|c| e.ratio.expect("set") < c));
    let c_estimate = kept.iter().filter_map(|e| e.ratio).min_by(f64::total_cmp);
    let exceptional_candidates = exceptional.into_iter().cloned().collect();
    Ok(MinimalityReport {
        box_bound: bound,
        entries,
        median_ratio: median,
        c_estimate,
        exceptional_candidates,
        discard_factor,
        box_relative: true,
    })
}

/// S-unit equation scan settings over the rationals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SUnitConfig {
    pub primes: Vec<u64>,
    pub summands: usize,
    pub exponent_bound: i64,
    /// The constant `C` as an exact rational `p/q`.
    pub constant: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvertseReport {
    pub config: SUnitConfig,
    /// Canonical representatives, each sorted descending with the global
    /// sign making the tuple lexicographically largest.
    pub solutions: Vec<Vec<String>>,
    pub tuples_checked: u64,
}

impl EvertseReport {
    pub fn to_tsv(&self) -> String {
        let e = self.config.summands;
        let mut s = (1..=e).map(|i| format!("s{i}")).collect::<Vec<_>>().join("\t");
        s.push_str("\tsum\n");
        for sol in &self.solutions {
            let sum: BigRational = sol.iter().map(|x| crate::numfield::parse_rational(x).expect("valid")).sum();
            s.push_str(&format!("{}\t{}\n", sol.join("\t"), sum));
        }
        s
    }
}

/// Cap on `(number of S-units)^e`.
pub const DEFAULT_EXPONENT_BOX_CAP: u128 = 50_000_000;

/// All S-units `+- prod p^{e_p}` with `|e_p| <= bound`, ascending.
pub fn s_units(primes: &[u64], bound: i64) -> Vec<BigRational> {
    let mut out = vec![BigRational::one()];
    for &p in primes {
        let pb = BigRational::from_integer(BigInt::from(p));
        out = out
            .into_iter()
            .flat_map(|x| {
                let pb = pb.clone();
                (-bound..=bound).map(move |e| {
                    let pw = if e >= 0 { num_traits::pow(pb.clone(), e as usize) } else { num_traits::pow(pb.recip(), (-e) as usize) };
                    &x * pw
                })
            })
            .collect();
    }
    let mut all: Vec<BigRational> = out.iter().map(|x| -x).chain(out.iter().cloned()).collect();
    all.sort();
    all
}

/// Multiplicative height `max(|num|, |den|)` of a nonzero rational.
fn mult_height(q: &BigRational) -> BigInt {
    q.numer().abs().max(q.denom().clone())
}

fn parse_constant(c: &str) -> Result<BigRational> {
    let q = crate::numfield::parse_rational(c)?;
    if !q.is_positive() {
        return Err(Error::InvalidArgument("the constant must be positive".into()));
    }
    Ok(q)
}

/// Tuples of S-units with non-degenerate nonzero sum and
/// `h(sum) < C * sum_i h(s_i)`, up to permutation and global sign.
pub fn evertse_scan(field: &Field, cfg: &SUnitConfig, cap: u128) -> Result<EvertseReport> {
    if !field.is_rational() {
        return Err(Error::UnsupportedField);
    }
    let c = parse_constant(&cfg.constant)?;
    let e = cfg.summands;
    if e < 2 || cfg.exponent_bound < 1 {
        return Err(Error::InvalidArgument("need at least two summands and a positive exponent bound".into()));
    }
    let mut primes = cfg.primes.clone();
    primes.sort();
    primes.dedup();
    if primes.len() != cfg.primes.len() {
        return Err(Error::InvalidArgument("primes must be distinct".into()));
    }
    let units = s_units(&primes, cfg.exponent_bound);
    let size = (units.len() as u128).saturating_pow(e as u32);
    if size > cap {
        return Err(Error::ExponentBoxTooLarge(size, cap));
    }
    let (p, q) = (c.numer().to_u32().unwrap_or(u32::MAX), c.denom().to_u32().unwrap_or(u32::MAX));
    // descending order so nondecreasing index tuples are sorted descending
    let desc: Vec<&BigRational> = units.iter().rev().collect();
    let heights: Vec<BigInt> = desc.iter().map(|x| mult_height(x)).collect();
    let small: Vec<Option<Ratio<i128>>> =
        desc.iter().map(|x| Some(Ratio::new_raw(x.numer().to_i128()?, x.denom().to_i128()?))).collect();
    let n = desc.len();
    let firsts: Vec<usize> = (0..n).collect();
    let parts = par_map(&firsts, |&first| {
        let mut found: Vec<Vec<String>> = Vec::new();
        let mut checked = 0u64;
        let mut idx = vec![first; e];
        loop {
            checked += 1;
            if is_canonical(&idx, n) {
                let hit = match small_test(&idx, &small, (p, q)) {
                    Some(hit) => hit,
                    None => {
                        let tuple: Vec<&BigRational> = idx.iter().map(|&i| desc[i]).collect();
                        non_degenerate(&tuple) && {
                            let sum = tuple.iter().fold(BigRational::zero(), |acc, x| acc + *x);
                            let prod: BigInt = idx.iter().map(|&i| &heights[i]).product();
                            num_traits::pow(mult_height(&sum), q as usize) < num_traits::pow(prod, p as usize)
                        }
                    }
                };
                if hit {
                    found.push(idx.iter().map(|&i| desc[i].to_string()).collect());
                }
            }
            let mut i = e;
            loop {
                i -= 1;
                if i == 0 {
                    return (found, checked);
                }
                if idx[i] + 1 < n {
                    idx[i] += 1;
                    for j in i + 1..e {
                        idx[j] = idx[i];
                    }
                    break;
                }
            }
        }
    });
    let checked = parts.iter().map(|(_, c)| c).sum();
    let solutions = parts.into_iter().flat_map(|(s, _)| s).collect();
    Ok(EvertseReport { config: cfg.clone(), solutions, tuples_checked: checked })
}

/// Whether a descending tuple, given by positions in the symmetric unit list,
/// is at least its negation. Negating the value at position `i` lands at
/// position `n - 1 - i`.
fn is_canonical(idx: &[usize], n: usize) -> bool {
    let e = idx.len();
    for k in 0..e {
        let neg = n - 1 - idx[e - 1 - k];
        match idx[k].cmp(&neg) {
            Ordering::Less => return true,
            Ordering::Greater => return false,
            Ordering::Equal => {}
        }
    }
    true
}

/// The scan test in machine integers; `None` on overflow.
fn small_test(idx: &[usize], small: &[Option<Ratio<i128>>], (p, q): (u32, u32)) -> Option<bool> {
    let t: Vec<Ratio<i128>> = idx.iter().map(|&i| small[i]).collect::<Option<_>>()?;
    let e = t.len();
    let mut sum = Ratio::zero();
    for mask in 1u32..(1 << e) {
        let mut s = Ratio::<i128>::zero();
        for (i, x) in t.iter().enumerate() {
            if mask >> i & 1 == 1 {
                s = s.checked_add(x)?;
            }
        }
        if s.is_zero() {
            return Some(false);
        }
        sum = s;
    }
    let height = |x: &Ratio<i128>| x.numer().checked_abs().map(|n| n.max(*x.denom()));
    let mut prod: i128 = 1;
    for x in &t {
        prod = prod.checked_mul(height(x)?)?;
    }
    Some(height(&sum)?.checked_pow(q)? < prod.checked_pow(p)?)
}

/// Every nonempty subsum (including the full sum) is nonzero.
fn non_degenerate(t: &[&BigRational]) -> bool {
    let e = t.len();
    (1u32..(1 << e)).all(|mask| {
        let s = (0..e).filter(|i| mask >> i & 1 == 1).fold(BigRational::zero(), |acc, i| acc + t[i]);
        !s.is_zero()
    })
}

/// Number of `[[a, b], [c, d]]` in `SL_2(Z)` with all entries at most `t` in
/// absolute value, for each `t`.
pub fn sl2_count(thresholds: &[i64]) -> Result<GrowthSeries> {
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonMonotoneThresholds);
    }
    if thresholds.iter().any(|&t| t < 0) {
        return Err(Error::InvalidArgument("thresholds must be nonnegative".into()));
    }
    let counts: Vec<u64> = par_map(thresholds, |&t| sl2_count_one(t));
    let hs: Vec<f64> = thresholds.iter().map(|&t| t as f64).collect();
    Ok(GrowthSeries {
        thresholds: thresholds.iter().map(|t| t.to_string()).collect(),
        fit: GrowthFit::new(&hs, &counts),
        counts,
        box_bound: None,
        box_relative: false,
    })
}

fn sl2_count_one(t: i64) -> u64 {
    if t == 0 {
        return 0;
    }
    let tt = t as usize;
    let limit = tt * tt + 1;
    // pairs[m] = #{b in [1, t] : b | m, m / b <= t}
    let mut pairs = vec![0u32; limit + 1];
    for b in 1..=tt {
        for c in 1..=tt {
            pairs[b * c] += 1;
        }
    }
    let mut total = 0u64;
    for a in -t..=t {
        for d in -t..=t {
            let m = a * d - 1;
            total += if m == 0 { (4 * t + 1) as u64 } else { 2 * pairs[m.unsigned_abs() as usize] as u64 };
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub thresholds: Vec<i64>,
    pub counts: Vec<u64>,
    pub value_box: i64,
    /// Membership is tested against the truncated image only.
    pub box_relative: bool,
}

impl MembershipReport {
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("N\tcount\n");
        for (n, c) in self.thresholds.iter().zip(&self.counts) {
            s.push_str(&format!("{n}\t{c}\n"));
        }
        s
    }
}

/// For each `N`, the number of `1 <= n <= N` with the entries of `g^n` in the
/// image of `f` over the value box.
pub fn membership_count(
    f: &PepSystem,
    g: &MatrixK,
    thresholds: &[i64],
    value_box: i64,
    max_cells: u128,
) -> Result<MembershipReport> {
    let n = g.dim();
    if f.s() != n * n {
        return Err(Error::DimensionMismatch(format!("system has {} components, matrix has {} entries", f.s(), n * n)));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonMonotoneThresholds);
    }
    let values = enumerate_values(f, value_box, max_cells)?;
    let top = thresholds.last().copied().unwrap_or(0).max(0);
    let mut counts = Vec::with_capacity(thresholds.len());
    let mut running = 0u64;
    let mut power = MatrixK::identity(g.field(), n);
    let mut ti = 0;
    for k in 1..=top {
        power = power.mul(g);
        if values.values.contains_key(&tuple_key(&power.entries())) {
            running += 1;
        }
        while ti < thresholds.len() && thresholds[ti] == k {
            counts.push(running);
            ti += 1;
        }
    }
    while counts.len() < thresholds.len() {
        counts.push(0);
    }
    Ok(MembershipReport { thresholds: thresholds.to_vec(), counts, value_box, box_relative: true })
}

/// `gcd`-free helper for tests and reports: `log max(|num|, |den|)`.
pub fn rational_log_height(q: &BigRational) -> f64 {
    let h = mult_height(q);
    let bits = h.bits();
    if bits < 1000 {
        h.to_f64().unwrap_or(f64::MAX).ln()
    } else {
        let shift = bits - 60;
        (&h >> shift).to_f64().expect("small").ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Greatest common divisor of a list of integers (used by report code).
pub fn gcd_all(xs: &[BigInt]) -> BigInt {
    xs.iter().fold(BigInt::zero(), |a, b| a.gcd(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exppoly::examples::pell;
    use crate::exppoly::Term;
    use crate::numfield::NumberField;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn pell_values_small_box() {
        let f = pell();
        let set = enumerate_values(&f, 1, DEFAULT_MAX_CELLS).unwrap();
        let k = f.field().clone();
        let mut want: Vec<String> = [(1, 0), (-1, 0), (3, -2), (-3, -2), (3, 2), (-3, 2)]
            .iter()
            .map(|&(x, y)| tuple_key(&[k.from_int(x), k.from_int(y)]))
            .collect();
        want.sort();
        assert_eq!(set.values.keys().cloned().collect::<Vec<_>>(), want);
        let zero = enumerate_values(&f, 0, DEFAULT_MAX_CELLS).unwrap();
        assert_eq!(zero.values.len(), 1);
    }

    #[test]
    fn collapsing_exponents() {
        let k = NumberField::rationals();
        let f = PepSystem::new(
            &k,
            2,
            vec![k.from_int(2)],
            vec![vec![Term { coeff: k.one(), exponents: vec![vec![1, 1]] }]],
        )
        .unwrap();
        let set = enumerate_values(&f, 2, DEFAULT_MAX_CELLS).unwrap();
        assert_eq!(set.values.len(), 9);
        let f1 = PepSystem::new(&k, 2, vec![k.from_int(2)], vec![vec![Term { coeff: k.one(), exponents: vec![vec![1, 1]] }]]);
        assert!(f1.is_ok());
        assert_eq!(enumerate_values(&f, 2, 10).unwrap_err(), Error::BoxTooLarge(25, 10));
    }

    #[test]
    fn pell_growth_small() {
        let f = pell();
        let g = count_growth(&f, &[q(100), q(1000)], DEFAULT_MAX_CELLS).unwrap();
        assert_eq!(g.counts, vec![14, 18]);
        assert!(g.box_relative);
        assert_eq!(count_growth(&f, &[q(1000), q(100)], DEFAULT_MAX_CELLS).unwrap_err(), Error::NonMonotoneThresholds);
    }

    #[test]
    fn constant_system_counts_once() {
        let k = NumberField::rationals();
        let f = PepSystem::new(&k, 0, vec![], vec![vec![Term { coeff: k.from_int(5), exponents: vec![] }]]).unwrap();
        let g = count_growth(&f, &[q(2), q(5), q(10)], DEFAULT_MAX_CELLS).unwrap();
        assert_eq!(g.counts, vec![0, 1, 1]);
    }

    #[test]
    fn pell_minimal_vectors() {
        let f = pell();
        let rep = minimal_vectors(&f, 8, DEFAULT_MAX_CELLS, DEFAULT_DISCARD_FACTOR).unwrap();
        assert!((rep.c_estimate.unwrap() - 3f64.ln()).abs() < 1e-9);
        assert_eq!(rep.exceptional_candidates.len(), 1);
        assert_eq!(rep.exceptional_candidates[0].value, vec!["-1".to_string(), "0".to_string()]);
        assert_eq!(rep.exceptional_candidates[0].minimal_vectors, vec![vec![-1, 0], vec![1, 0]]);
        let one = rep.entries.iter().find(|e| e.value == ["1", "0"]).unwrap();
        assert_eq!(one.minimal_vectors, vec![vec![0, 0]]);
    }

    #[test]
    fn evertse_small() {
        let k = NumberField::rationals();
        let cfg = SUnitConfig { primes: vec![2, 3], summands: 2, exponent_bound: 4, constant: "1/5".into() };
        let rep = evertse_scan(&k, &cfg, DEFAULT_EXPONENT_BOX_CAP).unwrap();
        assert!(rep.solutions.contains(&vec!["3".to_string(), "-2".to_string()]));
        let s2 = NumberField::with_symbol(&[-2, 0, 1], "s").unwrap();
        assert_eq!(evertse_scan(&s2, &cfg, DEFAULT_EXPONENT_BOX_CAP).unwrap_err(), Error::UnsupportedField);
        let big = SUnitConfig { summands: 4, exponent_bound: 10, ..cfg };
        assert_eq!(evertse_scan(&k, &big, DEFAULT_EXPONENT_BOX_CAP).unwrap_err().code(), "ExponentBoxTooLarge");
    }

    fn sl2_brute(t: i64) -> u64 {
        let mut c = 0;
        for a in -t..=t {
            for b in -t..=t {
                for cc in -t..=t {
                    for d in -t..=t {
                        if a * d - b * cc == 1 {
                            c += 1;
                        }
                    }
                }
            }
        }
        c
    }

    #[test]
    fn sl2_small_counts() {
        let s = sl2_count(&[0, 1, 2, 3, 5]).unwrap();
        assert_eq!(s.counts[0], 0);
        for (t, c) in [1, 2, 3, 5].iter().zip(&s.counts[1..]) {
            assert_eq!(*c, sl2_brute(*t));
        }
    }

    #[test]
    fn membership_of_own_powers() {
        let k = NumberField::with_symbol(&[-2, 0, 1], "s").unwrap();
        let gamma = MatrixK::from_ints(&k, &[vec![3, 4], vec![2, 3]]).unwrap();
        let f = crate::matrixk::bg_to_pep(std::slice::from_ref(&gamma)).unwrap();
        let rep = membership_count(&f, &gamma, &[1, 5, 10], 10, DEFAULT_MAX_CELLS).unwrap();
        assert_eq!(rep.counts, vec![1, 5, 10]);
        let u = MatrixK::from_ints(&k, &[vec![1, 1], vec![0, 1]]).unwrap();
        let rep = membership_count(&f, &u, &[1, 5, 10], 10, DEFAULT_MAX_CELLS).unwrap();
        assert_eq!(rep.counts, vec![0, 0, 0]);
        let id = MatrixK::identity(&k, 2);
        let rep = membership_count(&f, &id, &[3, 7], 2, DEFAULT_MAX_CELLS).unwrap();
        assert_eq!(rep.counts, vec![3, 7]);
    }
}
