//! Triple, higher and a-Massey products over a cohomology ring.
//!
//! Primitives default to the ring's canonical solve. Verdicts are exact when
//! the family of representatives is an affine subspace that can be written
//! down (triple products, last stage of higher products) and otherwise come
//! from a budgeted search over closed corrections.

use serde::Serialize;

use crate::algebra::{Element, Expr};
use crate::cohomology::{Class, CohomologyRing};
use crate::error::{Error, Result};
use crate::linalg::{self, Echelon};
use crate::scalar::CycScalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Nonzero,
    Zero,
    Inconclusive,
    /// No defining system exists.
    Undefined,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MasseyKind {
    Triple,
    Higher { order: usize },
    AMassey { n: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct Named {
    pub name: String,
    pub value: Expr,
}

#[derive(Clone, Debug, Serialize)]
pub struct MasseyReport {
    pub kind: MasseyKind,
    pub degree: usize,
    pub defined: bool,
    /// What blocks a defining system, when there is none.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<Named>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub representative: Option<Expr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<Vec<CycScalar>>,
    /// Basis, in class coordinates, of the subspace the representative is taken modulo.
    pub indeterminacy: Vec<Vec<CycScalar>>,
    pub verdict: Verdict,
    pub route: String,
    pub certificate: Vec<Named>,
    #[serde(skip)]
    pub rep_element: Option<Element>,
}

impl MasseyReport {
    fn undefined(kind: MasseyKind, degree: usize, label: String, witness: Expr, route: &str) -> Self {
        MasseyReport {
            kind,
            degree,
            defined: false,
            obstruction: Some(Named {
                name: label,
                value: witness,
            }),
            representative: None,
            class: None,
            indeterminacy: Vec::new(),
            verdict: Verdict::Undefined,
            route: route.to_string(),
            certificate: Vec::new(),
            rep_element: None,
        }
    }

    pub fn is_nonzero(&self) -> bool {
        self.verdict == Verdict::Nonzero
    }
}

fn sign(k: usize) -> CycScalar {
    CycScalar::from_int(if k % 2 == 0 { 1 } else { -1 })
}

fn named(h: &CohomologyRing, name: impl Into<String>, e: &Element) -> Named {
    Named {
        name: name.into(),
        value: h.algebra().to_expr(e),
    }
}

/// Echelon form of some classes of one degree.
fn span(h: &CohomologyRing, k: usize, classes: impl IntoIterator<Item = Class>) -> Echelon<CycScalar> {
    let mut e = Echelon::new(h.betti(k));
    for c in classes {
        e.insert(c.coords);
    }
    e
}

/// ⟨u, v, w⟩ with canonical primitives.
pub fn triple_massey(h: &CohomologyRing, u: &Element, v: &Element, w: &Element) -> Result<MasseyReport> {
    let alg = h.algebra();
    for z in [u, v, w] {
        h.class_of(z)?;
    }
    let degree = (u.degree() + v.degree() + w.degree()).saturating_sub(1);
    let uv = alg.mul(u, v)?;
    let vw = alg.mul(v, w)?;
    let x = match h.is_exact(&uv)? {
        Some(x) => x,
        None => {
            return Ok(MasseyReport::undefined(MasseyKind::Triple, degree, "u*v".into(), alg.to_expr(&uv), "product not exact"))
        }
    };
    let y = match h.is_exact(&vw)? {
        Some(y) => y,
        None => {
            return Ok(MasseyReport::undefined(MasseyKind::Triple, degree, "v*w".into(), alg.to_expr(&vw), "product not exact"))
        }
    };
    triple_massey_with(h, u, v, w, &x, &y)
}

/// ⟨u, v, w⟩ with given primitives d(x) = u·v and d(y) = v·w.
pub fn triple_massey_with(
    h: &CohomologyRing,
    u: &Element,
    v: &Element,
    w: &Element,
    x: &Element,
    y: &Element,
) -> Result<MasseyReport> {
    let alg = h.algebra();
    if alg.d(x)? != alg.mul(u, v)? || alg.d(y)? != alg.mul(v, w)? {
        return Err(Error::Document("supplied primitives do not bound the products".into()));
    }
    let (p1, p2, p3) = (u.degree(), v.degree(), w.degree());
    let rep = alg.mul(u, y)?.plus(&alg.mul(x, w)?.scale(&sign(p1 + 1)));
    let degree = p1 + p2 + p3 - 1;
    let class = h.class_of(&rep)?;
    let mut gens = Vec::new();
    if p2 + p3 >= 1 {
        for z in h.reps(p2 + p3 - 1) {
            gens.push(h.class_of(&alg.mul(u, z)?)?);
        }
    }
    if p1 + p2 >= 1 {
        for z in h.reps(p1 + p2 - 1) {
            gens.push(h.class_of(&alg.mul(z, w)?)?);
        }
    }
    let ind = span(h, degree, gens);
    let zero = ind.contains(&class.coords);
    Ok(MasseyReport {
        kind: MasseyKind::Triple,
        degree,
        defined: true,
        obstruction: None,
        representative: Some(alg.to_expr(&rep)),
        class: Some(class.coords.clone()),
        indeterminacy: ind.rows().to_vec(),
        verdict: if zero { Verdict::Zero } else { Verdict::Nonzero },
        route: "exact indeterminacy".into(),
        certificate: vec![named(h, "a_{1,2}", x), named(h, "a_{2,3}", y)],
        rep_element: Some(rep),
    })
}

pub fn triple_massey_classes(h: &CohomologyRing, u: &Class, v: &Class, w: &Class) -> Result<MasseyReport> {
    triple_massey(h, &h.rep_of(u), &h.rep_of(v), &h.rep_of(w))
}

/// Σ_i (−1)^{|ξ_1|+…+|ξ_{i−1}|} ξ_1⋯ξ_{i−1}·b_i·ξ_{i+1}⋯ξ_n.
fn a_massey_rep(h: &CohomologyRing, xis: &[Element], bs: &[Element], skip: &[bool]) -> Result<Element> {
    let alg = h.algebra();
    let n = bs.len();
    let degree: usize = xis.iter().map(Element::degree).sum::<usize>() + bs[0].degree() - xis[0].degree();
    let mut acc = alg.zero(degree);
    let mut prefix = 0;
    for i in 0..n {
        if !skip[i] {
            let mut term = alg.one();
            for (j, f) in xis.iter().enumerate() {
                let f = if j == i { &bs[i] } else { f };
                term = alg.mul(&term, f)?;
            }
            acc = acc.plus(&term.scale(&sign(prefix)));
        }
        prefix += xis[i].degree();
    }
    Ok(acc)
}

/// Odometer over {0, 1, −1}^n, starting at the origin.
struct Grid {
    digits: Vec<u8>,
    done: bool,
}

impl Grid {
    fn new(n: usize) -> Self {
        Grid {
            digits: vec![0; n],
            done: false,
        }
    }

    fn values(&self) -> Vec<CycScalar> {
        self.digits
            .iter()
            .map(|d| CycScalar::from_int([0, 1, -1][*d as usize]))
            .collect()
    }

    fn advance(&mut self) {
        for d in self.digits.iter_mut() {
            if *d < 2 {
                *d += 1;
                return;
            }
            *d = 0;
        }
        self.done = true;
    }
}

fn combo(base: &Element, dirs: &[Element], t: &[CycScalar]) -> Element {
    let mut e = base.clone();
    for (z, c) in dirs.iter().zip(t) {
        if !c.is_zero() {
            e = e.plus(&z.scale(c));
        }
    }
    e
}

/// ⟨a; b_1, …, b_n⟩. `budget` bounds the number of correction terms examined.
pub fn a_massey(h: &CohomologyRing, a: &Element, bs: &[Element], budget: usize) -> Result<MasseyReport> {
    let alg = h.algebra();
    if a.degree() % 2 != 0 {
        return Err(Error::OddADegree { degree: a.degree() });
    }
    h.class_of(a)?;
    for b in bs {
        h.class_of(b)?;
    }
    let n = bs.len();
    let kind = MasseyKind::AMassey { n };
    if n == 0 {
        return Err(Error::Document("a-Massey product needs at least one b".into()));
    }
    let mut xis = Vec::new();
    for (i, b) in bs.iter().enumerate() {
        let ab = alg.mul(a, b)?;
        match h.is_exact(&ab)? {
            Some(x) => xis.push(x),
            None => {
                let deg = xis.iter().map(Element::degree).sum::<usize>() + b.degree();
                return Ok(MasseyReport::undefined(kind, deg, format!("a*b_{}", i + 1), alg.to_expr(&ab), "product not exact"));
            }
        }
    }
    let all = vec![false; n];
    let rep = a_massey_rep(h, &xis, bs, &all)?;
    let degree = rep.degree();
    let class = h.class_of(&rep)?;
    let certificate = xis.iter().enumerate().map(|(i, x)| named(h, format!("xi_{}", i + 1), x)).collect();
    let mut report = MasseyReport {
        kind,
        degree,
        defined: true,
        obstruction: None,
        representative: Some(alg.to_expr(&rep)),
        class: Some(class.coords.clone()),
        indeterminacy: Vec::new(),
        verdict: Verdict::Inconclusive,
        route: String::new(),
        certificate,
        rep_element: Some(rep),
    };
    if class.is_zero() {
        report.verdict = Verdict::Zero;
        report.route = "canonical representative is exact".into();
        return Ok(report);
    }
    // ξ_i ranges over ξ_i + Z^{|ξ_i|}; the representative is multilinear in the corrections.
    let dirs: Vec<Vec<Element>> = xis.iter().map(|x| h.cocycle_basis(x.degree())).collect();
    let count = dirs.iter().map(|d| d.len() + 1).product::<usize>();
    let receiving_zero = xis.iter().all(|x| h.betti(x.degree()) == 0);
    if count > budget {
        if receiving_zero {
            report.verdict = Verdict::Nonzero;
            report.route = "no indeterminacy: every H^{|xi_i|} vanishes".into();
        } else {
            report.route = format!("{count} correction terms exceed the budget");
        }
        return Ok(report);
    }
    let mut coeff_classes = Vec::new();
    let mut linear: Vec<(usize, usize, Class)> = Vec::new();
    let mut choice = vec![0usize; n];
    loop {
        // Advance the mixed-radix counter; 0 means the canonical ξ_i.
        let mut i = 0;
        while i < n {
            choice[i] += 1;
            if choice[i] <= dirs[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
        let mut fs = Vec::with_capacity(n);
        let mut skip = vec![false; n];
        for j in 0..n {
            if choice[j] == 0 {
                fs.push(xis[j].clone());
            } else {
                fs.push(dirs[j][choice[j] - 1].clone());
                skip[j] = true;
            }
        }
        let v = a_massey_rep(h, &fs, bs, &skip)?;
        let c = h.class_of(&v)?;
        let moved: Vec<usize> = (0..n).filter(|&j| choice[j] != 0).collect();
        if moved.len() == 1 {
            linear.push((moved[0], choice[moved[0]] - 1, c.clone()));
        }
        coeff_classes.push(c);
    }
    let w = span(h, degree, coeff_classes);
    report.indeterminacy = w.rows().to_vec();
    if !w.contains(&class.coords) {
        report.verdict = Verdict::Nonzero;
        report.route = "representative outside the span of all correction classes".into();
        return Ok(report);
    }
    // Try the linearized solve, then a small grid.
    let flat: Vec<(usize, usize)> = dirs
        .iter()
        .enumerate()
        .flat_map(|(i, d)| (0..d.len()).map(move |r| (i, r)))
        .collect();
    let evaluate = |t: &[CycScalar]| -> Result<Option<Element>> {
        let mut fs = Vec::with_capacity(n);
        let mut k = 0;
        for i in 0..n {
            fs.push(combo(&xis[i], &dirs[i], &t[k..k + dirs[i].len()]));
            k += dirs[i].len();
        }
        let r = a_massey_rep(h, &fs, bs, &all)?;
        Ok(if h.class_of(&r)?.is_zero() { Some(r) } else { None })
    };
    let mut lin = Echelon::with_companions(h.betti(degree), flat.len());
    for (idx, (i, r)) in flat.iter().enumerate() {
        let c = linear
            .iter()
            .find(|(a, b, _)| a == i && b == r)
            .map(|x| x.2.coords.clone())
            .unwrap_or_else(|| linalg::zero_vec(h.betti(degree)));
        lin.insert_tracked(c, linalg::unit_vec(flat.len(), idx));
    }
    let target: Vec<CycScalar> = class.coords.iter().map(|x| -x).collect();
    if let Some(t) = lin.solve(&target) {
        if let Some(r) = evaluate(&t)? {
            report.verdict = Verdict::Zero;
            report.route = "linearized correction kills the class".into();
            report.representative = Some(alg.to_expr(&r));
            report.class = Some(linalg::zero_vec(h.betti(degree)));
            report.rep_element = Some(r);
            return Ok(report);
        }
    }
    let mut grid = Grid::new(flat.len());
    let mut tried = 0;
    while !grid.done && tried < budget {
        if let Some(r) = evaluate(&grid.values())? {
            report.verdict = Verdict::Zero;
            report.route = "grid correction kills the class".into();
            report.representative = Some(alg.to_expr(&r));
            report.class = Some(linalg::zero_vec(h.betti(degree)));
            report.rep_element = Some(r);
            return Ok(report);
        }
        tried += 1;
        grid.advance();
    }
    report.route = "representative inside the correction span; no zero found".into();
    Ok(report)
}

struct HigherSearch<'a> {
    h: &'a CohomologyRing,
    xs: &'a [Element],
    /// Entries (i, j) in the order they are chosen, 0-based and inclusive.
    order: Vec<(usize, usize)>,
    budget: usize,
    nodes: usize,
    exhaustive: bool,
    obstruction: Option<(String, Element)>,
    found: Option<HigherLeaf>,
    first_leaf: Option<HigherLeaf>,
}

#[derive(Clone)]
struct HigherLeaf {
    rep: Element,
    class: Class,
    ind: Echelon<CycScalar>,
    entries: Vec<((usize, usize), Element)>,
}

impl HigherSearch<'_> {
    fn t(&self) -> usize {
        self.xs.len()
    }

    fn entry<'b>(&'b self, sys: &'b [((usize, usize), Element)], i: usize, j: usize) -> &'b Element {
        if i == j {
            return &self.xs[i];
        }
        &sys.iter().find(|(k, _)| *k == (i, j)).expect("entry chosen earlier").1
    }

    /// Σ_{k=i}^{j−1} (−1)^{|a_{i,k}|} a_{i,k}·a_{k+1,j}.
    fn rhs(&self, sys: &[((usize, usize), Element)], i: usize, j: usize) -> Result<Element> {
        let alg = self.h.algebra();
        let mut acc: Option<Element> = None;
        for k in i..j {
            let l = self.entry(sys, i, k);
            let r = self.entry(sys, k + 1, j);
            let p = alg.mul(l, r)?.scale(&sign(l.degree()));
            acc = Some(match acc {
                None => p,
                Some(a) => a.plus(&p),
            });
        }
        Ok(acc.expect("j > i"))
    }

    fn run(&mut self, sys: &mut Vec<((usize, usize), Element)>, pos: usize) -> Result<()> {
        if self.found.is_some() {
            return Ok(());
        }
        let t = self.t();
        if pos == self.order.len() {
            return self.leaf(sys);
        }
        let (i, j) = self.order[pos];
        let rhs = self.rhs(sys, i, j)?;
        let base = match self.h.is_exact(&rhs)? {
            Some(x) => x,
            None => {
                if self.obstruction.is_none() {
                    self.obstruction = Some((format!("d a_{{{},{}}}", i + 1, j + 1), rhs));
                }
                return Ok(());
            }
        };
        let last_stage = j - i == t - 2;
        let dirs: Vec<Element> = if last_stage { Vec::new() } else { self.h.reps(base.degree()).to_vec() };
        let mut grid = Grid::new(dirs.len());
        while !grid.done {
            if self.nodes >= self.budget {
                self.exhaustive = false;
                return Ok(());
            }
            self.nodes += 1;
            sys.push(((i, j), combo(&base, &dirs, &grid.values())));
            self.run(sys, pos + 1)?;
            sys.pop();
            if self.found.is_some() {
                return Ok(());
            }
            grid.advance();
        }
        if !dirs.is_empty() {
            // A finite grid never covers a positive-dimensional family.
            self.exhaustive = false;
        }
        Ok(())
    }

    fn leaf(&mut self, sys: &[((usize, usize), Element)]) -> Result<()> {
        let t = self.t();
        let h = self.h;
        let alg = h.algebra();
        let rep = self.rhs(sys, 0, t - 1)?;
        let class = h.class_of(&rep)?;
        let mut gens = Vec::new();
        let a1t1 = self.entry(sys, 0, t - 2).degree();
        for z in h.reps(a1t1) {
            gens.push(h.class_of(&alg.mul(z, &self.xs[t - 1])?)?);
        }
        let a2t = self.entry(sys, 1, t - 1).degree();
        for z in h.reps(a2t) {
            gens.push(h.class_of(&alg.mul(&self.xs[0], z)?)?);
        }
        let ind = span(h, rep.degree(), gens);
        let leaf = HigherLeaf {
            rep,
            class,
            ind,
            entries: sys.to_vec(),
        };
        if leaf.ind.contains(&leaf.class.coords) {
            self.found = Some(leaf);
        } else if self.first_leaf.is_none() {
            self.first_leaf = Some(leaf);
        }
        Ok(())
    }
}

impl HigherSearch<'_> {
    /// System for t = 4 with first-stage corrections `c` along `dirs`; None
    /// when a second-stage equation has no solution.
    fn quadruple_rep(&self, bases: &[Element], dirs: &[Vec<Element>], c: &[CycScalar]) -> Result<Option<Element>> {
        let mut sys = Vec::new();
        let mut off = 0;
        for (i, (b, ds)) in bases.iter().zip(dirs).enumerate() {
            sys.push(((i, i + 1), combo(b, ds, &c[off..off + ds.len()])));
            off += ds.len();
        }
        for i in 0..2 {
            match self.h.is_exact(&self.rhs(&sys, i, i + 2)?)? {
                Some(x) => sys.push(((i, i + 2), x)),
                None => return Ok(None),
            }
        }
        self.rhs(&sys, 0, 3).map(Some)
    }

    /// For t = 4 the class modulo indeterminacy is a polynomial of degree at
    /// most 2 on the subspace of first-stage corrections that keep the system
    /// defined. True when the base class avoids the span of its coefficients.
    fn quadruple_certificate(&self, ind: &Echelon<CycScalar>) -> Result<Option<bool>> {
        let h = self.h;
        let mut bases = Vec::new();
        let mut dirs = Vec::new();
        for i in 0..3 {
            let rhs = self.rhs(&[], i, i + 1)?;
            let Some(b) = h.is_exact(&rhs)? else { return Ok(None) };
            dirs.push(h.reps(b.degree()).to_vec());
            bases.push(b);
        }
        let n: usize = dirs.iter().map(Vec::len).sum();
        // Linear constraints: the second-stage right-hand sides must stay exact.
        let unit = |k: usize| linalg::unit_vec::<CycScalar>(n, k);
        let stage2 = |c: &[CycScalar]| -> Result<Vec<CycScalar>> {
            let mut sys = Vec::new();
            let mut off = 0;
            for (i, (b, ds)) in bases.iter().zip(&dirs).enumerate() {
                sys.push(((i, i + 1), combo(b, ds, &c[off..off + ds.len()])));
                off += ds.len();
            }
            let mut v = h.class_of(&self.rhs(&sys, 0, 2)?)?.coords;
            v.extend(h.class_of(&self.rhs(&sys, 1, 3)?)?.coords);
            Ok(v)
        };
        let zero = stage2(&linalg::zero_vec(n))?;
        let mut rows = Vec::new();
        for k in 0..n {
            let mut v = stage2(&unit(k))?;
            for (x, z) in v.iter_mut().zip(&zero) {
                *x = &*x - z;
            }
            rows.push(v);
        }
        let width = zero.len();
        let free = if width == 0 {
            (0..n).map(unit).collect()
        } else {
            linalg::left_kernel(width, &rows)
        };
        if free.len() * (free.len() + 3) / 2 > self.budget {
            return Ok(None);
        }
        let eval = |c: &[CycScalar]| -> Result<Vec<CycScalar>> {
            let rep = self.quadruple_rep(&bases, &dirs, c)?.expect("correction keeps the system defined");
            Ok(h.class_of(&rep)?.coords)
        };
        let add = |a: &[CycScalar], b: &[CycScalar]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>();
        let sub = |a: &[CycScalar], b: &[CycScalar]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>();
        let two = CycScalar::from_int(2);
        let f0 = eval(&linalg::zero_vec(n))?;
        let mut span = Echelon::from_rows(f0.len(), ind.rows().to_vec());
        let mut f1 = Vec::new();
        for s in &free {
            let a = eval(s)?;
            let b = eval(&s.iter().map(|x| x * &two).collect::<Vec<_>>())?;
            // Quadratic and linear coefficients along s.
            span.insert(sub(&add(&b, &f0), &add(&a, &a)));
            span.insert(sub(&a, &f0));
            f1.push(a);
        }
        for i in 0..free.len() {
            for j in i + 1..free.len() {
                let ab = eval(&add(&free[i], &free[j]))?;
                span.insert(add(&sub(&ab, &add(&f1[i], &f1[j])), &f0));
            }
        }
        Ok(Some(!span.contains(&f0)))
    }
}

/// ⟨a_1, …, a_t⟩ for 4 ≤ t ≤ 6. Closed corrections of every entry but the
/// last stage are searched on a {0, ±1} grid within `budget` nodes; exact
/// corrections are not varied.
pub fn higher_massey(h: &CohomologyRing, xs: &[Element], budget: usize) -> Result<MasseyReport> {
    let t = xs.len();
    if !(4..=6).contains(&t) {
        return Err(Error::OrderUnsupported { order: t });
    }
    for x in xs {
        h.class_of(x)?;
    }
    let kind = MasseyKind::Higher { order: t };
    let degree = (xs.iter().map(Element::degree).sum::<usize>() + 2).saturating_sub(t);
    for p in 3..t {
        for i in 0..=t - p {
            let sub = &xs[i..i + p];
            let r = if p == 3 {
                triple_massey(h, &sub[0], &sub[1], &sub[2])?
            } else {
                higher_massey(h, sub, budget)?
            };
            if matches!(r.verdict, Verdict::Nonzero | Verdict::Undefined) {
                let label = format!("<a_{}..a_{}> is {:?}", i + 1, i + p, r.verdict).to_lowercase();
                let value = r
                    .representative
                    .clone()
                    .or_else(|| r.obstruction.as_ref().map(|o| o.value.clone()))
                    .unwrap_or_default();
                let mut out = MasseyReport::undefined(kind, degree, label, value, "lower-order product not trivial");
                out.certificate = r.certificate;
                return Ok(out);
            }
        }
    }
    let mut order = Vec::new();
    for len in 1..t - 1 {
        for i in 0..t - len {
            order.push((i, i + len));
        }
    }
    let mut s = HigherSearch {
        h,
        xs,
        order,
        budget,
        nodes: 0,
        exhaustive: true,
        obstruction: None,
        found: None,
        first_leaf: None,
    };
    s.run(&mut Vec::new(), 0)?;
    let alg = h.algebra();
    let certificate = |leaf: &HigherLeaf| {
        leaf.entries
            .iter()
            .map(|((i, j), e)| named(h, format!("a_{{{},{}}}", i + 1, j + 1), e))
            .collect::<Vec<_>>()
    };
    let build = |leaf: &HigherLeaf, verdict: Verdict, route: &str| MasseyReport {
        kind: kind.clone(),
        degree: leaf.rep.degree(),
        defined: true,
        obstruction: None,
        representative: Some(alg.to_expr(&leaf.rep)),
        class: Some(leaf.class.coords.clone()),
        indeterminacy: leaf.ind.rows().to_vec(),
        verdict,
        route: route.to_string(),
        certificate: certificate(leaf),
        rep_element: Some(leaf.rep.clone()),
    };
    if let Some(leaf) = &s.found {
        return Ok(build(leaf, Verdict::Zero, "defining system with zero in its last-stage family"));
    }
    if let Some(leaf) = &s.first_leaf {
        let (v, route) = if s.exhaustive {
            (Verdict::Nonzero, "no free corrections before the last stage")
        } else if t == 4 && s.quadruple_certificate(&leaf.ind)? == Some(true) {
            (Verdict::Nonzero, "representative outside the span of all correction classes")
        } else {
            (Verdict::Inconclusive, "search budget or grid exhausted")
        };
        return Ok(build(leaf, v, route));
    }
    let (label, w) = s
        .obstruction
        .map(|(l, e)| (l, alg.to_expr(&e)))
        .unwrap_or_else(|| ("search budget".into(), Vec::new()));
    let mut out = MasseyReport::undefined(kind, degree, label, w, "no defining system found");
    if !s.exhaustive {
        out.verdict = Verdict::Inconclusive;
        out.route = "no defining system within the search budget".into();
    }
    Ok(out)
}

/// Triple products over the given classes, stopping at the first NONZERO.
pub fn scan_triples(
    h: &CohomologyRing,
    candidates: &[Element],
    limit: usize,
) -> Result<(Option<MasseyReport>, usize)> {
    let mut checked = 0;
    for u in candidates {
        for v in candidates {
            for w in candidates {
                if checked >= limit {
                    return Ok((None, checked));
                }
                if u.degree() + v.degree() + w.degree() > h.max_degree() + 1 {
                    continue;
                }
                checked += 1;
                let r = triple_massey(h, u, v, w)?;
                if r.is_nonzero() {
                    return Ok((Some(r), checked));
                }
            }
        }
    }
    Ok((None, checked))
}
