use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use pep_core::dsl::{parse_job, Expr, JobSpec, PepDecl};
use pep_core::experiments::{count_growth, evertse_scan, minimal_vectors, sl2_count, SUnitConfig, DEFAULT_MAX_CELLS};
use pep_core::exppoly::examples::pell;
use pep_core::exppoly::{
    box_points, degeneracy_locus, reduce_to_independent, relation_lattice, restrict_to_coset, sup_norm,
    IntegerLatticeCoset, PepSystem, Term,
};
use pep_core::heights::{affine_height, element_height_mahler, projective_height};
use pep_core::matrixk::{bg_to_pep, eigen_decompose, jordan_multiplicative, MatrixK};
use pep_core::numfield::hnf::hnf;
use pep_core::numfield::interval::Interval;
use pep_core::numfield::{Field, FieldElement, NumberField, PlaceKind};
use proptest::prelude::*;

mod common;
use common::*;
use std::collections::{BTreeMap, BTreeSet};

fn elem_strategy() -> impl Strategy<Value = (Vec<i64>, i64)> {
    (prop::collection::vec(-30i64..=30, 3), 1i64..=12)
}

fn field_for(i: usize) -> Field {
    [rationals, sqrt2, cubic][i % 3]()
}

// Product formula: the archimedean product equals |N(x)|, and the content
// norm of the integral multiple matches the norm bookkeeping.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn product_formula((num, den) in elem_strategy(), which in 1usize..=2) {
        let k = field_for(which);
        let x = element(&k, &num, den);
        prop_assume!(!x.is_zero());
        let prec = 96;
        let mut prod = Interval::from_i64(1);
        for (place, kind) in k.place_kinds().into_iter().enumerate() {
            let z = x.embed(place, prec).unwrap();
            let factor = match kind {
                PlaceKind::Real => z.re.abs(),
                PlaceKind::Complex => z.norm_sqr(prec),
            };
            prod = prod.mul(&factor, prec);
        }
        let n = x.norm();
        prop_assert!(prod.contains_rational(&n.abs()));
        let d = x.integral_denominator();
        let y = x.scale(&BigRational::from_integer(d.clone()));
        let content = k.content_ideal_norm(std::slice::from_ref(&y)).unwrap();
        prop_assert_eq!(BigRational::from_integer(content), y.norm().abs());
        prop_assert_eq!(y.norm(), n * BigRational::from_integer(num_traits::pow(d, k.degree())));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn refinement_is_monotone(a in -9i64..=9, b in -9i64..=9) {
        let field = NumberField::with_symbol(&[b, a, 0, 1], "u");
        prop_assume!(field.is_ok());
        let k = field.unwrap();
        let mut prev = k.embeddings(32).unwrap();
        for prec in [64, 128, 256, 512] {
            let next = k.embeddings(prec).unwrap();
            prop_assert_eq!(prev.len(), next.len());
            for (p, n) in prev.iter().zip(&next) {
                prop_assert!(p.contains(n));
            }
            prev = next;
        }
    }

    #[test]
    fn hnf_idempotent_and_det(rows in prop::collection::vec(prop::collection::vec(-12i64..=12, 3), 3)) {
        let a: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let (h, u) = hnf(&a);
        prop_assert_eq!(&hnf(&h).0, &h);
        prop_assert_eq!(det3(&u).abs(), BigInt::one());
        prop_assert_eq!(det3(&h).abs(), det3(&a).abs());
        let ua: Vec<Vec<BigInt>> = (0..3)
            .map(|i| (0..3).map(|j| (0..3).map(|l| &u[i][l] * &a[l][j]).sum()).collect())
            .collect();
        prop_assert_eq!(ua, h);
    }
}

fn det3(m: &[Vec<BigInt>]) -> BigInt {
    let t = |a: usize, b: usize, c: usize| &m[0][a] * &m[1][b] * &m[2][c];
    t(0, 1, 2) + t(1, 2, 0) + t(2, 0, 1) - t(2, 1, 0) - t(0, 2, 1) - t(1, 0, 2)
}

const TOL: f64 = 1e-12;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn affine_height_matches_mahler((num, den) in elem_strategy(), which in 0usize..3) {
        let k = field_for(which);
        let x = element(&k, &num, den);
        let a = affine_height(std::slice::from_ref(&x), TOL).unwrap();
        let m = element_height_mahler(&x, TOL).unwrap();
        prop_assert!(a.overlaps(&m), "{:?} vs {:?}", a, m);
    }

    #[test]
    fn adding_a_coordinate_never_lowers_height(
        xs in prop::collection::vec(elem_strategy(), 1..=3),
        extra in elem_strategy(),
        which in 0usize..3,
    ) {
        let k = field_for(which);
        let mut pt: Vec<FieldElement> = xs.iter().map(|(n, d)| element(&k, n, *d)).collect();
        let h1 = affine_height(&pt, TOL).unwrap();
        pt.push(element(&k, &extra.0, extra.1));
        let h2 = affine_height(&pt, TOL).unwrap();
        prop_assert!(h1.log_lo <= h2.log_hi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn conjugates_have_equal_height(a in -200i64..=200, b in -200i64..=200, d in 1i64..=20) {
        let k = sqrt2();
        let x = element(&k, &[a, b], d);
        let y = element(&k, &[a, -b], d);
        let hx = affine_height(&[x], TOL).unwrap();
        let hy = affine_height(&[y], TOL).unwrap();
        prop_assert!(hx.overlaps(&hy));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn projective_height_ignores_scaling(
        xs in prop::collection::vec(elem_strategy(), 2..=3),
        c in (-50i64..=50, 1i64..=50),
        which in 0usize..3,
    ) {
        prop_assume!(c.0 != 0);
        let k = field_for(which);
        let pt: Vec<FieldElement> = xs.iter().map(|(n, d)| element(&k, n, *d)).collect();
        prop_assume!(pt.iter().any(|x| !x.is_zero()));
        let scaled: Vec<FieldElement> = pt.iter().map(|x| x.scale(&q(c.0, c.1))).collect();
        let h1 = projective_height(&pt, TOL).unwrap();
        let h2 = projective_height(&scaled, TOL).unwrap();
        prop_assert!(h1.overlaps(&h2));
    }
}

const BASE_POOL: &[(i64, i64)] = &[(-1, 1), (2, 1), (3, 1), (4, 1), (1, 2), (6, 1), (-2, 1), (9, 4)];

#[derive(Debug, Clone)]
struct SystemShape {
    r: usize,
    bases: Vec<usize>,
    components: Vec<Vec<(i64, Vec<Vec<i64>>)>>,
}

fn system_strategy(max_r: usize) -> impl Strategy<Value = SystemShape> {
    (1..=max_r, prop::sample::subsequence((0..BASE_POOL.len()).collect::<Vec<_>>(), 1..=3), 1usize..=2)
        .prop_flat_map(|(r, bases, s)| {
            let k = bases.len();
            let term = (prop::sample::select(vec![-3i64, -2, -1, 1, 2, 3]), prop::collection::vec(prop::collection::vec(-2i64..=2, r), k));
            let comp = prop::collection::vec(term, 1..=3);
            (Just(r), Just(bases), prop::collection::vec(comp, s))
        })
        .prop_map(|(r, bases, components)| SystemShape { r, bases, components })
}

fn build_system(sh: &SystemShape) -> PepSystem {
    let k = rationals();
    let bases = sh.bases.iter().map(|&i| k.from_rational(&q(BASE_POOL[i].0, BASE_POOL[i].1))).collect();
    let components = sh
        .components
        .iter()
        .map(|c| c.iter().map(|(a, e)| Term { coeff: k.from_int(*a), exponents: e.clone() }).collect())
        .collect();
    PepSystem::new(&k, sh.r, bases, components).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn restriction_commutes_with_evaluation(
        sh in system_strategy(2),
        offset in prop::collection::vec(-3i64..=3, 2),
        gens in prop::collection::vec(prop::collection::vec(-2i64..=2, 2), 0..=2),
    ) {
        let f = build_system(&sh);
        let offset = offset[..f.r()].to_vec();
        let gens: Vec<Vec<i64>> = gens.iter().map(|g| g[..f.r()].to_vec()).collect();
        let c = IntegerLatticeCoset::new(offset, &gens);
        let g = restrict_to_coset(&f, &c).unwrap();
        prop_assert_eq!(g.r(), c.rank());
        for m in box_points(c.rank(), 5) {
            prop_assert_eq!(g.evaluate(&m).unwrap(), f.evaluate(&c.point_at(&m)).unwrap());
        }
    }

    #[test]
    fn reduction_preserves_values(sh in system_strategy(2)) {
        let f = build_system(&sh);
        let red = reduce_to_independent(&f, 20).unwrap();
        for n in box_points(f.r(), 3) {
            prop_assert_eq!(red.evaluate(&n).unwrap(), f.evaluate(&n).unwrap());
        }
    }

    #[test]
    fn relations_are_exact(sh in system_strategy(1)) {
        let f = build_system(&sh);
        let lat = relation_lattice(f.bases(), 12).unwrap();
        let k = f.field();
        for v in &lat.basis {
            let mut p = k.one();
            for (b, e) in f.bases().iter().zip(v) {
                p = p.mul(&b.pow(*e).unwrap());
            }
            prop_assert!(p.is_one(), "{:?}", v);
        }
    }

    #[test]
    fn degeneracy_cosets_match_points(sh in system_strategy(2)) {
        let f = build_system(&sh);
        let bound = 4;
        let loc = degeneracy_locus(&f, 0, bound).unwrap();
        let pts: BTreeSet<Vec<i64>> = loc.points.iter().cloned().collect();
        let mut covered = BTreeSet::new();
        for c in &loc.cosets {
            for p in c.box_points(bound) {
                prop_assert!(pts.contains(&p), "coset point {:?} not degenerate", p);
                covered.insert(p);
            }
        }
        prop_assert_eq!(covered, pts);
    }
}

fn values(f: &PepSystem, bound: i64) -> BTreeSet<String> {
    box_points(f.r(), bound).iter().map(|n| pep_core::experiments::tuple_key(&f.evaluate(n).unwrap())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn union_of_value_sets(a in system_strategy(2), b in system_strategy(1)) {
        let (fa, fb) = (build_system(&a), build_system(&b));
        prop_assume!(fa.s() == fb.s());
        let u = PepSystem::union(&fa, &fb).unwrap();
        let mut want = values(&fa, 3);
        want.extend(values(&fb, 3));
        prop_assert_eq!(values(&u, 3), want);
    }
}

fn pair() -> impl Strategy<Value = (i64, i64)> {
    (-3i64..=3, -2i64..=2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn jordan_decomposition_identities(
        n in 2usize..=3,
        use_sqrt2 in any::<bool>(),
        p in prop::collection::vec(prop::collection::vec(pair(), 3), 3),
        eig in prop::collection::vec(pair(), 3),
        chain in prop::collection::vec(any::<bool>(), 2),
    ) {
        let k = if use_sqrt2 { sqrt2() } else { rationals() };
        let p: Vec<Vec<(i64, i64)>> = p[..n].iter().map(|r| r[..n].to_vec()).collect();
        let m = conjugated(&k, random_matrix(&k, &p), &eig[..n], &chain);
        let jd = jordan_multiplicative(&m).unwrap();
        let (s, u) = (&jd.semisimple, &jd.unipotent);
        prop_assert_eq!(s.mul(u), m.clone());
        prop_assert_eq!(u.mul(s), m);
        prop_assert!(s.minpoly().is_squarefree());
        let nil = u.sub(&MatrixK::identity(&k, n));
        prop_assert!(nil.pow(n as i64).unwrap().is_zero());
    }

    #[test]
    fn eigen_decomposition_diagonalizes(
        n in 2usize..=3,
        use_sqrt2 in any::<bool>(),
        p in prop::collection::vec(prop::collection::vec(pair(), 3), 3),
        eig in prop::collection::vec(pair(), 3),
    ) {
        let k = if use_sqrt2 { sqrt2() } else { rationals() };
        let p: Vec<Vec<(i64, i64)>> = p[..n].iter().map(|r| r[..n].to_vec()).collect();
        let m = conjugated(&k, random_matrix(&k, &p), &eig[..n], &[false, false]);
        let ed = eigen_decompose(&m).unwrap();
        let d = ed.g.inverse().unwrap().mul(&m).mul(&ed.g);
        prop_assert_eq!(d, MatrixK::diagonal(&k, &ed.eigenvalues));
        let mut got: Vec<String> = ed.eigenvalues.iter().map(|x| x.key()).collect();
        let mut want: Vec<String> = m
            .charpoly()
            .roots(4096)
            .unwrap()
            .into_iter()
            .flat_map(|(r, mult)| std::iter::repeat_n(r.key(), mult))
            .collect();
        got.sort();
        want.sort();
        prop_assert_eq!(got, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn bg_matches_matrix_products(
        r in 1usize..=2,
        ps in prop::collection::vec(prop::collection::vec(prop::collection::vec(pair(), 2), 2), 2),
        eigs in prop::collection::vec(prop::collection::vec((1i64..=3, 0i64..=1), 2), 2),
    ) {
        let k = sqrt2();
        let gammas: Vec<MatrixK> =
            (0..r).map(|i| conjugated(&k, random_matrix(&k, &ps[i]), &eigs[i], &[false])).collect();
        let f = bg_to_pep(&gammas).unwrap();
        prop_assert_eq!(f.r(), r);
        for a in box_points(r, 5) {
            let mut prod = MatrixK::identity(&k, 2);
            for (g, e) in gammas.iter().zip(&a) {
                prod = prod.mul(&g.pow(*e).unwrap());
            }
            prop_assert_eq!(f.evaluate(&a).unwrap(), prod.entries());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pell_counts_grow_slowly(raw in prop::collection::btree_set(1u32..=60, 1..=4)) {
        let ts: Vec<BigRational> = raw.iter().map(|&e| BigRational::from_integer(BigInt::from(10) * num_traits::pow(BigInt::from(2), e as usize / 2 + (e as usize % 7)))).collect();
        let mut ts = ts;
        ts.sort();
        ts.dedup();
        let g = count_growth(&pell(), &ts, DEFAULT_MAX_CELLS).unwrap();
        prop_assert!(g.counts.windows(2).all(|w| w[0] <= w[1]));
        for (t, c) in ts.iter().zip(&g.counts) {
            let lh = t.to_f64().unwrap().ln();
            prop_assert!((*c as f64) <= 3.0 * lh * lh);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn minimal_vectors_match_shell_scan(sh in system_strategy(2), bound in 1i64..=8) {
        let f = build_system(&sh);
        let rep = minimal_vectors(&f, bound, DEFAULT_MAX_CELLS, 5.0).unwrap();
        // first shell in which each value appears
        let mut first: BTreeMap<String, (i64, Vec<Vec<i64>>)> = BTreeMap::new();
        for nu in 0..=bound {
            let shell: Vec<Vec<i64>> = box_points(f.r(), nu).into_iter().filter(|n| sup_norm(n) == nu).collect();
            let mut here: BTreeMap<String, Vec<Vec<i64>>> = BTreeMap::new();
            for n in shell {
                let v = f.evaluate(&n).unwrap();
                let key = pep_core::experiments::tuple_key(&v);
                if !first.contains_key(&key) {
                    here.entry(key).or_default().push(n);
                }
            }
            for (k, mut ns) in here {
                ns.sort();
                first.insert(k, (nu, ns));
            }
        }
        prop_assert_eq!(rep.entries.len(), first.len());
        for e in &rep.entries {
            let (nu, ns) = &first[&e.key];
            prop_assert_eq!(e.norm, *nu);
            prop_assert_eq!(&e.minimal_vectors, ns);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn evertse_matches_naive(bound in 1i64..=4, e in 2usize..=3, c in prop::sample::select(vec![(1u32, 5u32), (1, 3), (1, 2)])) {
        prop_assume!(e == 2 || bound <= 2);
        let cfg = SUnitConfig { primes: vec![2, 3], summands: e, exponent_bound: bound, constant: format!("{}/{}", c.0, c.1) };
        let rep = evertse_scan(&rationals(), &cfg, u128::MAX).unwrap();
        let got: BTreeSet<Vec<String>> = rep.solutions.iter().cloned().collect();
        prop_assert_eq!(got.len(), rep.solutions.len());
        prop_assert_eq!(got, naive_evertse(&[2, 3], e, bound, c));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sl2_matches_row_oracle(t in 1i64..=64) {
        let s = sl2_count(&[t]).unwrap();
        prop_assert_eq!(s.counts[0], sl2_by_rows(t));
    }
}

fn const_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(0i64..=12).prop_map(Expr::int), Just(Expr::Ident("s".into()))];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
            (inner, -3i64..=3).prop_map(|(a, k)| Expr::Pow(Box::new(a), Box::new(Expr::int(k)))),
        ]
    })
}

fn linear_expr() -> impl Strategy<Value = Expr> {
    (-3i64..=3, -3i64..=3, -2i64..=2).prop_map(|(a, b, c)| {
        let term = |k: i64, v: &str| Expr::Mul(Box::new(Expr::int(k)), Box::new(Expr::Ident(v.into())));
        Expr::Add(Box::new(Expr::Sub(Box::new(term(a, "m")), Box::new(term(b, "n")))), Box::new(Expr::int(c)))
    })
}

fn component_expr() -> impl Strategy<Value = Expr> {
    let factor = prop_oneof![
        const_expr(),
        (const_expr(), linear_expr()).prop_map(|(b, l)| Expr::Pow(Box::new(b), Box::new(l))),
    ];
    prop::collection::vec(prop::collection::vec(factor, 1..=3), 1..=3).prop_map(|terms| {
        terms
            .into_iter()
            .map(|fs| fs.into_iter().reduce(|a, b| Expr::Mul(Box::new(a), Box::new(b))).unwrap())
            .reduce(|a, b| Expr::Add(Box::new(a), Box::new(b)))
            .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn job_print_parse_fixpoint(
        comps in prop::collection::vec(component_expr(), 1..=3),
        point in prop::collection::vec(const_expr(), 1..=3),
        ts in prop::collection::vec(1i64..=99, 1..=4),
        bx in prop::option::of(0i64..=50),
    ) {
        let base = parse_job("field x^2 - 2 as s\n").unwrap();
        let mut job = JobSpec {
            pep: Some(PepDecl { vars: vec!["m".into(), "n".into()], over: "s".into(), lines: vec![0; comps.len()], components: comps }),
            command: Some("count-growth".into()),
            ..base
        };
        job.settings.point = Some(point);
        job.settings.thresholds = Some(ts.into_iter().map(|t| Expr::Pow(Box::new(Expr::int(10)), Box::new(Expr::int(t % 9)))).collect());
        job.settings.box_bound = bx;
        let printed = job.to_string();
        let again = parse_job(&printed).map_err(|e| TestCaseError::fail(format!("{e}\n{printed}")))?;
        prop_assert_eq!(&again, &job);
        prop_assert_eq!(again.to_string(), printed);
    }
}
