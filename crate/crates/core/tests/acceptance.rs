//! One PASS/FAIL line per acceptance criterion, each backed by an oracle
//! written here rather than by the library's own check runner.

mod common;

use std::collections::BTreeMap;

use cdga::document::Loaded;
use cdga::lefschetz::{lefschetz_test, universal_lefschetz_obstruction};
use cdga::linalg::Echelon;
use cdga::massey::{a_massey, triple_massey, triple_massey_with, Verdict};
use cdga::minmodel::{build_minimal_model, formality_verdict, s_formality_check, Formality, FormalityOptions, SFormality};
use cdga::models::{circle_bundle, preset};
use cdga::verify::{HEIS6_BASES, X6_BASES};
use cdga::{Algebra, CohomologyRing, CycScalar, Element};
use common::*;

struct Outcome {
    ok: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { ok: true, lines: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.lines.push(format!("{} {}", if ok { "ok  " } else { "FAIL" }, what.into()));
        self.ok &= ok;
    }

    fn note(&mut self, what: impl Into<String>) {
        self.lines.push(format!("note {}", what.into()));
    }
}

fn doc(id: &str) -> Loaded {
    Loaded::new(preset(id, &BTreeMap::new()).unwrap()).unwrap()
}

fn mono(alg: &Algebra, names: &str) -> Element {
    if names.is_empty() {
        return alg.one();
    }
    alg.monomial(&names.split_whitespace().collect::<Vec<_>>()).unwrap()
}

fn listed_basis(out: &mut Outcome, h: &CohomologyRing, lists: &[&[&str]], tag: &str) {
    let alg = h.algebra();
    for (k, list) in lists.iter().enumerate() {
        let xs: Vec<Element> = list.iter().map(|m| mono(alg, m)).collect();
        let closed = xs.iter().all(|x| alg.d(x).unwrap().is_zero());
        let rank = if xs.is_empty() { 0 } else { class_rank(h, &xs) };
        out.check(
            closed && rank == xs.len() && rank == h.betti(k),
            format!("{tag} H^{k}: {} listed closed monomials, independent rank {rank}, b{k} = {}", xs.len(), h.betti(k)),
        );
    }
}

/// Fixed-point dimension of H^k via the averaged trace of the action.
fn burnside(l: &Loaded, h: &CohomologyRing, k: usize) -> CycScalar {
    let act = l.action.as_ref().unwrap();
    let mut total = s(0);
    for j in 0..act.order() {
        for (i, r) in h.reps(k).iter().enumerate() {
            total = &total + &h.class_of(&act.apply_pow(r, j).unwrap()).unwrap().coords[i];
        }
    }
    &total / &s(act.order() as i64)
}

/// Each generator must be scaled by ζ^w; returns the weight table as checked.
fn check_weights(out: &mut Outcome, l: &Loaded, m: u32, weights: &[(&str, i64)]) {
    let act = l.action.as_ref().unwrap();
    let ok = weights.iter().all(|(g, w)| {
        let x = l.alg.gen(g).unwrap();
        act.apply(&x).unwrap() == x.scale(&CycScalar::zeta_pow(m, *w))
    });
    out.check(ok, format!("action is diagonal with weights {weights:?} in powers of zeta_{m}"));
}

/// Number of degree-k monomials in the exterior generators whose weights sum to 0 mod m.
fn invariant_monomials(weights: &[i64], m: i64, k: usize) -> usize {
    (0u32..1 << weights.len())
        .filter(|mask| mask.count_ones() as usize == k)
        .filter(|mask| {
            let w: i64 = (0..weights.len()).filter(|i| mask >> i & 1 == 1).map(|i| weights[i]).sum();
            w.rem_euclid(m) == 0
        })
        .count()
}

const X6_WEIGHTS: [(&str, i64); 6] = [("mu", 4), ("mubar", 2), ("nu", 1), ("nubar", 5), ("theta", 5), ("thetabar", 1)];
const X8_WEIGHTS: [(&str, i64); 8] = [
    ("mu", 1),
    ("mubar", 2),
    ("nu", 1),
    ("nubar", 2),
    ("theta", 2),
    ("thetabar", 1),
    ("eta", 1),
    ("etabar", 2),
];

fn c1() -> Outcome {
    let mut out = Outcome::new();
    let l = doc("HEIS6");
    let oracle = betti_by_ranks(&l.alg);
    let h = l.ring(None).unwrap();
    out.check(oracle == [1, 4, 8, 10, 8, 4, 1], format!("Betti from d-matrix ranks {oracle:?}"));
    out.check(h.betti_numbers() == oracle, format!("cohomology ring Betti {:?}", h.betti_numbers()));
    listed_basis(&mut out, &h, &HEIS6_BASES, "M");
    out
}

fn c2() -> Outcome {
    let mut out = Outcome::new();
    let l = doc("HEIS6_Z6");
    check_weights(&mut out, &l, 6, &X6_WEIGHTS);
    let x = l.ring(None).unwrap();
    let m = l.parent_ring(None).unwrap();
    let b = x.betti_numbers();
    out.check(b == [1, 0, 4, 0, 4, 0, 1], format!("invariant Betti {b:?}"));
    let traces: Vec<CycScalar> = (0..=6).map(|k| burnside(&l, &m, k)).collect();
    out.check(
        traces.iter().zip(&b).all(|(t, &d)| *t == s(d as i64)),
        format!("Burnside trace averages {}", traces.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")),
    );
    let ws: Vec<i64> = X6_WEIGHTS.iter().map(|(_, w)| *w).collect();
    let dims: Vec<usize> = (0..=6).map(|k| invariant_monomials(&ws, 6, k)).collect();
    let lib: Vec<usize> = (0..=6).map(|k| x.cochain_dim(k)).collect();
    out.check(dims == lib, format!("invariant cochain dimensions {lib:?} match weight count {dims:?}"));
    listed_basis(&mut out, &x, &X6_BASES, "X");
    out.check(b[1].is_multiple_of(2) && b[3].is_multiple_of(2) && b[5].is_multiple_of(2), "odd Betti numbers are even");
    out
}

fn symplectic(out: &mut Outcome, id: &str, n: usize, m: u32, weights: &[(&str, i64)]) {
    let l = doc(id);
    check_weights(out, &l, m, weights);
    let alg = &l.alg;
    let w = l.class("omega").unwrap();
    out.check(alg.d(&w).unwrap().is_zero(), format!("{id}: d omega = 0"));
    let top = alg.pow(&w, n).unwrap();
    out.check(!top.is_zero(), format!("{id}: omega^{n} = {}", alg.fmt(&top)));
    // Invariance from the weight table alone: every term has total weight 0.
    let table: BTreeMap<&str, i64> = weights.iter().cloned().collect();
    let ok = alg
        .to_expr(&w)
        .iter()
        .all(|t| t.monomial.iter().map(|g| table[g.as_str()]).sum::<i64>().rem_euclid(m as i64) == 0);
    out.check(ok, format!("{id}: every term of omega has weight 0 mod {m}"));
    let act = l.action.as_ref().unwrap();
    out.check(act.apply(&w).unwrap() == w, format!("{id}: rho*(omega) = omega"));
}

fn c3() -> Outcome {
    let mut out = Outcome::new();
    symplectic(&mut out, "HEIS6_Z6", 3, 6, &X6_WEIGHTS);
    symplectic(&mut out, "HEIS8_Z3", 4, 3, &X8_WEIGHTS);
    out
}

fn c4() -> Outcome {
    let mut out = Outcome::new();
    let l = doc("HEIS6_Z6");
    let x = l.ring(None).unwrap();
    let alg = &l.alg;
    let nn = mono(alg, "nu nubar");
    // Oracle: [nu nubar] times every degree-2 class vanishes.
    let killed = x.reps(2).iter().all(|r| x.class_of(&alg.mul(&nn, r).unwrap()).unwrap().is_zero());
    out.check(killed, "[nu nubar] * H^2 = 0 checked class by class");
    let u = universal_lefschetz_obstruction(&x, 2).unwrap();
    let span = Echelon::from_rows(x.betti(2), u.witnesses.clone());
    out.check(span.contains(&x.class_of(&nn).unwrap().coords), format!("witness space of dim {} contains [nu nubar]", span.rank()));
    let w = l.class("omega").unwrap();
    let r = lefschetz_test(&x, &w, 3).unwrap();
    let images: Vec<Element> = x.reps(2).iter().map(|b| alg.mul(b, &w).unwrap()).collect();
    let rank = class_rank(&x, &images);
    let d2 = r.degree(2).unwrap();
    out.check(!d2.iso && d2.rank == rank && rank < 4, format!("L_omega: H^2 -> H^4 has rank {} (direct count {rank})", d2.rank));
    out.check(!r.overall, "hard Lefschetz fails for omega");
    out
}

fn c5() -> Outcome {
    let mut out = Outcome::new();
    let l = doc("HEIS8_Z3");
    let x = l.ring(None).unwrap();
    let m = l.parent_ring(Some(4)).unwrap();
    out.check(x.betti(3) == 0, "H^3(X) = 0");
    out.check(burnside(&l, &m, 3) == s(0), "Burnside average on H^3(M) is 0");
    let a = l.class("a").unwrap();
    let bs: Vec<Element> = ["b1", "b2", "b3"].iter().map(|b| l.class(b).unwrap()).collect();
    let r = a_massey(&x, &a, &bs, 2000).unwrap();
    out.check(r.verdict == Verdict::Nonzero, format!("verdict {:?} via {}", r.verdict, r.route));
    let alg = &l.alg;
    for (i, c) in r.certificate.iter().enumerate() {
        let xi = alg.parse_expr(&c.value, None).unwrap();
        let ok = alg.d(&xi).unwrap() == alg.mul(&a, &bs[i]).unwrap();
        out.check(ok, format!("d xi_{} = a b_{}", i + 1, i + 1));
    }
    let rep = r.rep_element.clone().unwrap();
    let vol = l.volume().unwrap().unwrap();
    let lambda = rep.coeff(&vol.terms().keys().next().unwrap().clone());
    let multiple = rep == vol.scale(&lambda) && lambda.is_rational() && !lambda.is_zero();
    out.check(multiple, format!("representative = {lambda} * volume monomial"));
    let int = x.integrate_element(&rep).unwrap();
    out.check(!int.is_zero(), format!("integral {int}"));
    out
}

fn half(alg: &Algebra, plus: &str, minus: &str) -> Element {
    mono(alg, plus).minus(&mono(alg, minus)).scale(&CycScalar::from_frac(1, 2))
}

/// Is z exact? Decided by comparing d-matrix ranks over Q.
fn exact_by_rank(alg: &Algebra, z: &Element) -> bool {
    let k = z.degree();
    let mut rows = to_q(&alg.d_matrix(k - 1).unwrap());
    let r0 = rank_q(rows.clone());
    rows.push(alg.coords(z).iter().map(|c| c.to_rational().unwrap()).collect());
    rank_q(rows) == r0
}

fn c6() -> Outcome {
    let mut out = Outcome::new();
    let l = doc("SASAKI7_S2CUBE");
    let alg = &l.alg;
    let oracle = betti_by_ranks(alg);
    out.check(oracle[3] == 0, format!("Betti from ranks {oracle:?}, so H^3 = 0 and the indeterminacy vanishes"));
    // Hand-built defining system: a1*a1 = 0 and d((a1 x + a2 x - a3 x)/2) = a1 a2.
    let y = mono(alg, "a1 x").plus(&mono(alg, "a2 x")).minus(&mono(alg, "a3 x")).scale(&CycScalar::from_frac(1, 2));
    out.check(alg.d(&y).unwrap() == mono(alg, "a1 a2"), "d y = a1 a2 for y = (a1 + a2 - a3) x / 2");
    let expect = half(alg, "a1 a2 x", "a1 a3 x");
    out.check(alg.mul(&mono(alg, "a1"), &y).unwrap() == expect, "a1 y = (a1 a2 - a1 a3) x / 2");
    out.check(!exact_by_rank(alg, &expect), "(a1 a2 - a1 a3) x / 2 is not exact (rank test)");
    let h = l.ring(None).unwrap();
    let r = triple_massey(&h, &mono(alg, "a1"), &mono(alg, "a1"), &mono(alg, "a2")).unwrap();
    out.check(r.rep_element.as_ref() == Some(&expect), "library representative matches in canonical form");
    out.check(r.indeterminacy.is_empty() && r.verdict == Verdict::Nonzero, format!("verdict {:?}, indeterminacy dim {}", r.verdict, r.indeterminacy.len()));
    out
}

fn names(r: std::ops::RangeInclusive<usize>) -> String {
    r.map(|i| format!("a{i} ")).collect()
}

fn c7() -> Outcome {
    let mut out = Outcome::new();
    for n in [4usize, 5] {
        let l = doc(&format!("SASAKI_S2N({n})"));
        let alg = &l.alg;
        let h = l.ring(None).unwrap();
        let a1 = mono(alg, "a1");
        let w = mono(alg, &names(2..=n - 1));
        // The displayed primitive: (a1 a2..a_{n-2} + a2..a_{n-1} - a2..a_{n-2} a_n) x / 2.
        let y = mono(alg, &format!("{}x", names(1..=n - 2)))
            .plus(&mono(alg, &format!("{}x", names(2..=n - 1))))
            .minus(&mono(alg, &format!("{}a{n} x", names(2..=n - 2))))
            .scale(&CycScalar::from_frac(1, 2));
        out.check(alg.d(&y).unwrap() == alg.mul(&a1, &w).unwrap(), format!("n={n}: displayed element is a primitive"));
        let rep = alg.mul(&a1, &y).unwrap();
        out.check(!exact_by_rank(alg, &rep), format!("n={n}: its representative {} is not exact", alg.fmt(&rep)));
        let r = triple_massey_with(&h, &a1, &a1, &w, &alg.zero(3), &y).unwrap();
        out.check(
            r.defined && r.verdict == Verdict::Nonzero,
            format!("n={n}: verdict {:?} modulo an indeterminacy of dim {}", r.verdict, r.indeterminacy.len()),
        );
        // Why it fails: another primitive gives the zero representative.
        let pre = format!("a1 {}", names(2..=n - 3));
        let z = mono(alg, &format!("{pre}a{} x", n - 2))
            .plus(&mono(alg, &format!("{pre}a{} x", n - 1)))
            .minus(&mono(alg, &format!("{pre}a{n} x")))
            .scale(&CycScalar::from_frac(1, 2));
        let zero_system = alg.d(&z).unwrap() == alg.mul(&a1, &w).unwrap() && alg.mul(&a1, &z).unwrap().is_zero();
        out.note(format!(
            "n={n}: y' = {} has d y' = a1*w and a1*y' = 0: {zero_system}",
            alg.fmt(&z)
        ));
    }
    out
}

fn c8() -> Outcome {
    let mut out = Outcome::new();
    let l = doc("SASAKI_CPN_S2(4)");
    let h = l.ring(None).unwrap();
    let mm = build_minimal_model(&h, 7).unwrap();
    out.check(mm.degrees() == [2, 3, 7], format!("generator degrees {:?}", mm.degrees()));
    let m = mm.algebra();
    let gens = mm.generators();
    let dn = m.parse_expr(&gens[1].differential, Some(4)).unwrap();
    let c2 = m.gen(&gens[0].name).unwrap();
    out.check(dn == m.mul(&c2, &c2).unwrap(), format!("d {} = {}^2, d of the others is 0", gens[1].name, gens[0].name));
    let oracle = betti_by_ranks(&l.alg);
    let ranks = mm.cohomology_ranks(&h).unwrap();
    let qiso = ranks.iter().enumerate().all(|(k, (r, bm, bt))| r == bm && r == bt && *bt == oracle[k]);
    out.check(qiso, "the model map is an isomorphism on cohomology through degree 8 (Betti from ranks)");
    let sf = s_formality_check(&mm, 3).unwrap();
    out.check(sf.verdict == SFormality::Certified, format!("3-formality {:?}: {}", sf.verdict, sf.route));
    let n3: usize = mm.n_dims().range(..=3).map(|(_, v)| v).sum();
    out.note(format!("N^(<=3) has dimension {n3}: the generator of degree 3 is not closed"));
    let f = formality_verdict(&l, &FormalityOptions::default()).unwrap();
    out.check(f.verdict == Formality::Formal, format!("formality {:?}: {}", f.verdict, f.route));
    out
}

fn c9() -> Outcome {
    let mut out = Outcome::new();
    let t = doc("T6_Z2");
    let x = t.ring(None).unwrap();
    let even: Vec<usize> = (0..=6).map(|k| if k % 2 == 0 { binom(6, k) } else { 0 }).collect();
    out.check(x.betti_numbers() == even, format!("invariant Betti {:?} = even exterior slices", x.betti_numbers()));
    let e = t.class("omega").unwrap();
    let spec = circle_bundle(&t.alg, &e, "eta").unwrap();
    let mut d = t.doc.clone();
    d.algebra = spec;
    d.action.as_mut().unwrap().images.insert("eta".into(), vec![cdga::Term::unit(&["eta"])]);
    d.volume.as_mut().unwrap().push("eta".into());
    let p = Loaded::new(d).unwrap();
    let h = p.ring(None).unwrap();
    let oracle = gysin(&x, &e, 6);
    out.check(h.betti_numbers() == oracle, format!("bundle Betti {:?}, Gysin ranks {oracle:?}", h.betti_numbers()));
    out.check(h.betti(1) == 0 && h.betti(3) == 0, "b1 = b3 = 0");
    let same = doc("P_OVER_T6Z2").ring(None).unwrap().betti_numbers() == h.betti_numbers();
    out.check(same, "preset model has the same Betti numbers");
    let alg = &p.alg;
    let r = triple_massey(&h, &mono(alg, "x1 x2"), &mono(alg, "x1 x2"), &mono(alg, "x3 x4")).unwrap();
    let expect = half(alg, "x1 x2 x3 x4 eta", "x1 x2 x5 x6 eta");
    out.check(r.rep_element.as_ref() == Some(&expect), "representative (a1 a2 - a1 a3) eta / 2");
    out.check(r.indeterminacy.is_empty() && r.verdict == Verdict::Nonzero, format!("verdict {:?}, indeterminacy dim {}", r.verdict, r.indeterminacy.len()));
    out
}

fn c10() -> Outcome {
    let mut out = Outcome::new();
    for (name, prop) in PROPERTIES {
        let r = prop(1000);
        out.check(r.is_ok(), format!("{name}: {}", r.err().unwrap_or_else(|| "1000 cases".into())));
    }
    out
}

const CRITERIA: [(&str, fn() -> Outcome); 10] = [
    ("6-dim nilmanifold cohomology and listed bases", c1),
    ("Z6 orbifold cohomology", c2),
    ("symplectic forms closed, non-degenerate, invariant", c3),
    ("universal Lefschetz failure", c4),
    ("8-dim a-Massey product", c5),
    ("Sasakian 7-manifold triple product", c6),
    ("general-n Sasakian triple product, n = 4, 5", c7),
    ("formal Sasakian minimal model, n = 4", c8),
    ("circle bundle over T6/Z2", c9),
    ("randomized property suites", c10),
];

/// Criteria that cannot be met; see the README for the analysis.
const KNOWN_UNATTAINABLE: [usize; 1] = [7];

// Runs without the libtest harness so the criterion lines are always printed.
fn main() {
    let mut failed = Vec::new();
    for (i, (label, f)) in CRITERIA.iter().enumerate() {
        let out = f();
        println!("criterion {:>2}: {}  {label}", i + 1, if out.ok { "PASS" } else { "FAIL" });
        for l in &out.lines {
            println!("      {l}");
        }
        if !out.ok {
            failed.push(i + 1);
        }
    }
    println!("failed: {failed:?}");
    let unexpected: Vec<usize> = failed.iter().copied().filter(|c| !KNOWN_UNATTAINABLE.contains(c)).collect();
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}
