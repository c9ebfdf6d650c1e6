#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use cdga::algebra::Algebra;
use cdga::document::Loaded;
use cdga::massey::{triple_massey, triple_massey_with, Verdict};
use cdga::minmodel::{formality_verdict, Formality, FormalityOptions};
use cdga::models::preset;
use cdga::symmetry::GroupAction;
use cdga::linalg;
use cdga::{CohomologyRing, CycScalar, Element};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

pub fn load(id: &str) -> Loaded {
    Loaded::new(preset(id, &BTreeMap::new()).unwrap()).unwrap()
}

pub fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Rank over Q by plain Gaussian elimination.
pub fn rank_q(mut rows: Vec<Vec<BigRational>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else { continue };
        rows.swap(rank, p);
        let pivot = rows[rank][col].clone();
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let f = &rows[r][col] / &pivot;
                for c in col..ncols {
                    let v = &rows[rank][c] * &f;
                    rows[r][c] -= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn to_q(m: &[Vec<CycScalar>]) -> Vec<Vec<BigRational>> {
    m.iter()
        .map(|r| r.iter().map(|c| c.to_rational().expect("rational matrix")).collect())
        .collect()
}

pub fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn s(n: i64) -> CycScalar {
    CycScalar::from_int(n)
}

/// Betti numbers from d-matrix ranks, for algebras with rational differentials.
pub fn betti_by_ranks(alg: &Algebra) -> Vec<usize> {
    let top = alg.cap() - 1;
    let ranks: Vec<usize> = (0..=top)
        .map(|k| if k == top { 0 } else { rank_q(to_q(&alg.d_matrix(k).unwrap())) })
        .collect();
    (0..=top)
        .map(|k| alg.dim(k) - ranks[k] - if k == 0 { 0 } else { ranks[k - 1] })
        .collect()
}

/// Element of degree k with small integer coordinates taken from `seed`.
pub fn element(alg: &Algebra, k: usize, seed: &[i8]) -> Element {
    let n = alg.dim(k);
    let v: Vec<CycScalar> = (0..n).map(|i| s(seed[i % seed.len()] as i64)).collect();
    alg.from_coords(k, &v)
}

pub fn combo(xs: &[Element], seed: &[i8], zero: Element) -> Element {
    xs.iter()
        .enumerate()
        .fold(zero, |acc, (i, x)| acc.plus(&x.scale(&s(seed[i % seed.len()] as i64))))
}

fn seed() -> impl Strategy<Value = Vec<i8>> {
    prop::collection::vec(-2i8..=2, 1..12)
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn report(name: &str, r: Result<(), proptest::test_runner::TestError<impl std::fmt::Debug>>) -> Result<(), String> {
    r.map_err(|e| format!("{name}: {e}"))
}

fn fixtures() -> &'static Vec<Arc<Algebra>> {
    static F: OnceLock<Vec<Arc<Algebra>>> = OnceLock::new();
    F.get_or_init(|| {
        ["HEIS6", "HEIS8_Z3", "SASAKI7_S2CUBE", "CPN(3)", "P_OVER_T6Z2", "SASAKI_CPN_S2(3)"]
            .iter()
            .map(|id| load(id).alg)
            .collect()
    })
}

fn sign(k: usize) -> CycScalar {
    s(if k.is_multiple_of(2) { 1 } else { -1 })
}

/// ab = (−1)^{pq} ba.
pub fn koszul(cases: u32) -> Result<(), String> {
    let st = (0..fixtures().len(), 0usize..8, 0usize..8, seed(), seed());
    report(
        "koszul",
        runner(cases).run(&st, |(i, p, q, sa, sb)| {
            let alg = &fixtures()[i];
            let top = alg.cap() - 1;
            let (p, q) = (p % (top + 1), q % (top + 1));
            prop_assume!(p + q <= top);
            let a = element(alg, p, &sa);
            let b = element(alg, q, &sb);
            let ab = alg.mul(&a, &b).unwrap();
            let ba = alg.mul(&b, &a).unwrap();
            prop_assert_eq!(ab, ba.scale(&sign(p * q)));
            Ok(())
        }),
    )
}

/// d(ab) = da·b + (−1)^p a·db.
pub fn leibniz(cases: u32) -> Result<(), String> {
    let st = (0..fixtures().len(), 0usize..8, 0usize..8, seed(), seed());
    report(
        "leibniz",
        runner(cases).run(&st, |(i, p, q, sa, sb)| {
            let alg = &fixtures()[i];
            let top = alg.cap() - 1;
            let (p, q) = (p % top, q % top);
            prop_assume!(p + q < top);
            let a = element(alg, p, &sa);
            let b = element(alg, q, &sb);
            let lhs = alg.d(&alg.mul(&a, &b).unwrap()).unwrap();
            let rhs = alg
                .mul(&alg.d(&a).unwrap(), &b)
                .unwrap()
                .plus(&alg.mul(&a, &alg.d(&b).unwrap()).unwrap().scale(&sign(p)));
            prop_assert_eq!(lhs, rhs);
            Ok(())
        }),
    )
}

pub fn d_squared(cases: u32) -> Result<(), String> {
    let st = (0..fixtures().len(), 0usize..8, seed());
    report(
        "d^2 = 0",
        runner(cases).run(&st, |(i, k, sa)| {
            let alg = &fixtures()[i];
            let k = k % (alg.cap() - 2);
            let a = element(alg, k, &sa);
            prop_assert!(alg.d(&alg.d(&a).unwrap()).unwrap().is_zero());
            Ok(())
        }),
    )
}

fn with_action(id: &str) -> (CohomologyRing, Option<GroupAction>) {
    let l = Loaded::new(preset(id, &BTreeMap::new()).unwrap()).unwrap();
    let h = l.ring(None).unwrap();
    let act = if l.doc.model == cdga::document::ModelKind::Invariant { l.action } else { None };
    (h, act)
}

fn rings() -> &'static Vec<(CohomologyRing, Option<GroupAction>)> {
    static R: OnceLock<Vec<(CohomologyRing, Option<GroupAction>)>> = OnceLock::new();
    R.get_or_init(|| ["HEIS6", "HEIS6_Z6", "SASAKI7_S2CUBE", "P_OVER_T6Z2"].iter().map(|id| with_action(id)).collect())
}

/// Closed element of degree k: a combination of class representatives plus a
/// random exact element. For invariant rings the exact part is averaged.
fn closed(h: &CohomologyRing, act: Option<&GroupAction>, k: usize, sr: &[i8], se: &[i8]) -> (Element, Element) {
    let alg = h.algebra();
    let z = combo(h.reps(k), sr, alg.zero(k));
    if k == 0 {
        return (z.clone(), z);
    }
    let mut b = element(alg, k - 1, se);
    if let Some(a) = act {
        b = a.average(&b).unwrap();
    }
    let pert = z.plus(&alg.d(&b).unwrap());
    (z, pert)
}

/// The class of a product does not depend on the representatives.
pub fn cup_well_defined(cases: u32) -> Result<(), String> {
    let st = (0..rings().len(), 0usize..8, 0usize..8, (seed(), seed(), seed(), seed()));
    report(
        "cup well-defined",
        runner(cases).run(&st, |(i, p, q, (s1, s2, s3, s4))| {
            let (h, act) = &rings()[i];
            let act = act.as_ref();
            let top = h.max_degree();
            let (p, q) = (p % (top + 1), q % (top + 1));
            prop_assume!(p + q <= top);
            let (z1, w1) = closed(h, act, p, &s1, &s2);
            let (z2, w2) = closed(h, act, q, &s3, &s4);
            let alg = h.algebra();
            prop_assert_eq!(h.class_of(&z1).unwrap(), h.class_of(&w1).unwrap());
            let a = h.class_of(&alg.mul(&z1, &z2).unwrap()).unwrap();
            let b = h.class_of(&alg.mul(&w1, &w2).unwrap()).unwrap();
            prop_assert_eq!(&a, &b);
            let c = h.cup(&h.class_of(&z1).unwrap(), &h.class_of(&z2).unwrap()).unwrap();
            prop_assert_eq!(a, c);
            Ok(())
        }),
    )
}

fn actions() -> &'static Vec<GroupAction> {
    static A: OnceLock<Vec<GroupAction>> = OnceLock::new();
    A.get_or_init(|| {
        ["HEIS6_Z6", "HEIS8_Z3", "T6_Z2"]
            .iter()
            .map(|id| load(id).action.unwrap())
            .collect()
    })
}

/// P² = P and Pd = dP for the averaging projector.
pub fn projector(cases: u32) -> Result<(), String> {
    let st = (0..actions().len(), 0usize..8, seed());
    report(
        "projector identities",
        runner(cases).run(&st, |(i, k, sa)| {
            let act = &actions()[i];
            let alg = act.algebra();
            let k = k % (alg.cap() - 1);
            let x = element(alg, k, &sa);
            let p = act.average(&x).unwrap();
            prop_assert_eq!(&act.average(&p).unwrap(), &p);
            prop_assert_eq!(&act.apply(&p).unwrap(), &p);
            prop_assert_eq!(act.average(&alg.d(&x).unwrap()).unwrap(), alg.d(&p).unwrap());
            Ok(())
        }),
    )
}

/// HEIS6 over Q(ζ_N) with N = lcm(4, m), cached per m.
fn heis6_over(m: u32) -> &'static (Loaded, CohomologyRing) {
    static C: OnceLock<Vec<(u32, (Loaded, CohomologyRing))>> = OnceLock::new();
    let all = C.get_or_init(|| {
        [1u32, 2, 3, 4, 6]
            .iter()
            .map(|&m| {
                let mut doc = preset("HEIS6", &BTreeMap::new()).unwrap();
                doc.algebra.zeta = 4u32.lcm(&m);
                let l = Loaded::new(doc).unwrap();
                let h = l.parent_ring(None).unwrap();
                (m, (l, h))
            })
            .collect()
    });
    &all.iter().find(|(k, _)| *k == m).unwrap().1
}

fn burnside(act: &GroupAction, h: &CohomologyRing, k: usize) -> CycScalar {
    let mut total = s(0);
    for j in 0..act.order() {
        // Trace on cohomology: push each representative through ρ^j.
        for (i, r) in h.reps(k).iter().enumerate() {
            let img = act.apply_pow(r, j).unwrap();
            total = &total + &h.class_of(&img).unwrap().coords[i];
        }
    }
    &total / &s(act.order() as i64)
}

/// dim H(A^G) = dim H(A)^G = Burnside average, for random diagonal actions on HEIS6.
pub fn invariant_dims(cases: u32) -> Result<(), String> {
    let st = (prop::sample::select(vec![2u32, 3, 4, 6]), 0u32..6, 0u32..6, 0usize..7);
    report(
        "H(A^G) dimensions",
        runner(cases).run(&st, |(m, wm, wn, k)| {
            let (wm, wn) = (wm % m, wn % m);
            let wt = (wm + wn) % m;
            let g = [wm, wn, wt].iter().fold(m, |acc, w| acc.gcd(w));
            let order = m / g;
            let (l, h) = heis6_over(m);
            let z = |w: u32| CycScalar::zeta_pow(m, w as i64);
            let zb = |w: u32| CycScalar::zeta_pow(m, (m - w) as i64 % m as i64);
            // Generator order: mu, mubar, nu, nubar, theta, thetabar.
            let weights = [z(wm), zb(wm), z(wn), zb(wn), z(wt), zb(wt)];
            let act = GroupAction::diagonal(l.alg.clone(), order, &weights).unwrap();
            let inv = act.invariant_cohomology(6).unwrap();
            let fixed = act.fixed_cohomology_dim(h, k).unwrap();
            prop_assert_eq!(inv.betti(k), fixed);
            prop_assert_eq!(burnside(&act, h, k), s(fixed as i64));
            Ok(())
        }),
    )
}

fn massey_rings() -> &'static Vec<(CohomologyRing, Option<GroupAction>)> {
    static R: OnceLock<Vec<(CohomologyRing, Option<GroupAction>)>> = OnceLock::new();
    R.get_or_init(|| {
        ["SASAKI7_S2CUBE", "P_OVER_T6Z2", "HEIS6", "SASAKI_S2N(4)"]
            .iter()
            .map(|id| with_action(id))
            .collect()
    })
}

/// Changing the primitives by closed elements moves the triple-product
/// representative only inside the reported indeterminacy.
pub fn triple_stability(cases: u32) -> Result<(), String> {
    let st = (0..massey_rings().len(), (1usize..3, 1usize..3, 1usize..3), (seed(), seed(), seed()), (seed(), seed(), seed(), seed()));
    report(
        "triple Massey stability",
        runner(cases).run(&st, |(i, (p1, p2, p3), (su, sv, sw), (c1, e1, c2, e2))| {
            let (h, act) = &massey_rings()[i];
            let alg = h.algebra();
            prop_assume!(p1 + p2 + p3 <= h.max_degree() + 1);
            let u = combo(h.reps(p1), &su, alg.zero(p1));
            let v = combo(h.reps(p2), &sv, alg.zero(p2));
            let w = combo(h.reps(p3), &sw, alg.zero(p3));
            let r = triple_massey(h, &u, &v, &w).unwrap();
            if !r.defined {
                return Ok(());
            }
            let x = h.is_exact(&alg.mul(&u, &v).unwrap()).unwrap().unwrap();
            let y = h.is_exact(&alg.mul(&v, &w).unwrap()).unwrap().unwrap();
            let (_, dx) = closed(h, act.as_ref(), p1 + p2 - 1, &c1, &e1);
            let (_, dy) = closed(h, act.as_ref(), p2 + p3 - 1, &c2, &e2);
            let r2 = triple_massey_with(h, &u, &v, &w, &x.plus(&dx), &y.plus(&dy)).unwrap();
            let a = r.class.unwrap();
            let b = r2.class.unwrap();
            let diff: Vec<CycScalar> = a.iter().zip(&b).map(|(p, q)| p - q).collect();
            let ind = cdga::linalg::Echelon::from_rows(a.len(), r.indeterminacy.clone());
            prop_assert!(ind.contains(&diff));
            if r.verdict != Verdict::Inconclusive {
                prop_assert_eq!(r.verdict == Verdict::Zero, ind.contains(&b));
            }
            Ok(())
        }),
    )
}

fn pairing_rings() -> &'static Vec<CohomologyRing> {
    static R: OnceLock<Vec<CohomologyRing>> = OnceLock::new();
    R.get_or_init(|| vec![load("HEIS6").ring(None).unwrap(), load("HEIS8").ring(None).unwrap()])
}

/// Every nonzero class pairs nontrivially with some class of complementary degree.
pub fn poincare_pairing(cases: u32) -> Result<(), String> {
    let st = (0..2usize, 0usize..9, seed());
    report(
        "Poincare pairing",
        runner(cases).run(&st, |(i, k, sc)| {
            let h = &pairing_rings()[i];
            let top = h.top_degree();
            let k = k % (top + 1);
            let alg = h.algebra();
            let z = combo(h.reps(k), &sc, alg.zero(k));
            prop_assume!(!h.class_of(&z).unwrap().is_zero());
            let pairs = h
                .reps(top - k)
                .iter()
                .any(|r| !h.integrate_element(&alg.mul(&z, r).unwrap()).unwrap().is_zero());
            prop_assert!(pairs);
            Ok(())
        }),
    )
}

fn verdicts() -> &'static Vec<(Loaded, CohomologyRing, Formality)> {
    static V: OnceLock<Vec<(Loaded, CohomologyRing, Formality)>> = OnceLock::new();
    V.get_or_init(|| {
        [
            "HEIS6", "HEIS6_Z6", "HEIS8_Z3", "T6", "T6_Z2", "SASAKI7_S2CUBE", "P_OVER_T6Z2", "SPHERE2", "CPN(3)",
            "SASAKI_CPN_S2(3)", "SASAKI_CPN_S2(4)", "SASAKI_S2N(4)",
        ]
        .iter()
        .map(|id| {
            let l = Loaded::new(preset(id, &BTreeMap::new()).unwrap()).unwrap();
            let h = l.ring(None).unwrap();
            let f = formality_verdict(&l, &FormalityOptions::default()).unwrap().verdict;
            (l, h, f)
        })
        .collect()
    })
}

/// No FORMAL verdict coexists with a NONZERO triple product.
pub fn formality_consistency(cases: u32) -> Result<(), String> {
    let st = (0..verdicts().len(), (1usize..4, 1usize..4, 1usize..4), (seed(), seed(), seed()));
    report(
        "formality consistency",
        runner(cases).run(&st, |(i, (p1, p2, p3), (su, sv, sw))| {
            let (_, h, f) = &verdicts()[i];
            prop_assume!(p1 + p2 + p3 <= h.max_degree() + 1);
            let alg = h.algebra();
            let u = combo(h.reps(p1), &su, alg.zero(p1));
            let v = combo(h.reps(p2), &sv, alg.zero(p2));
            let w = combo(h.reps(p3), &sw, alg.zero(p3));
            let r = triple_massey(h, &u, &v, &w).unwrap();
            prop_assert!(!(r.is_nonzero() && *f == Formality::Formal));
            Ok(())
        }),
    )
}

pub const PROPERTIES: [(&str, fn(u32) -> Result<(), String>); 9] = [
    ("Koszul sign law", koszul),
    ("Leibniz rule", leibniz),
    ("d^2 = 0", d_squared),
    ("cup well-defined", cup_well_defined),
    ("projector identities", projector),
    ("H(A^G) dimensions", invariant_dims),
    ("triple Massey stability", triple_stability),
    ("Poincare pairing", poincare_pairing),
    ("formality consistency", formality_consistency),
];

/// Rank of a set of classes of one degree.
pub fn class_rank(h: &CohomologyRing, xs: &[Element]) -> usize {
    let k = xs.first().map_or(0, Element::degree);
    let rows: Vec<Vec<CycScalar>> = xs.iter().map(|x| h.class_of(x).unwrap().coords).collect();
    linalg::rank(h.betti(k), &rows)
}

/// b_k(P) = dim coker(e: H^{k-2} -> H^k) + dim ker(e: H^{k-1} -> H^{k+1}).
pub fn gysin(x: &CohomologyRing, e: &Element, top: usize) -> Vec<usize> {
    let alg = x.algebra();
    let rank = |k: usize| -> usize {
        if k + 2 > top || x.betti(k) == 0 {
            return 0;
        }
        let imgs: Vec<Element> = x.reps(k).iter().map(|r| alg.mul(r, e).unwrap()).collect();
        class_rank(x, &imgs)
    };
    (0..=top + 1)
        .map(|k| {
            let coker = if k <= top { x.betti(k) } else { 0 } - if k >= 2 { rank(k - 2) } else { 0 };
            let ker = if k >= 1 && k - 1 <= top { x.betti(k - 1) - rank(k - 1) } else { 0 };
            coker + ker
        })
        .collect()
}

