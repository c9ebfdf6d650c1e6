//! Finitely presented graded-commutative differential algebras.
//!
//! Elements are sparse sums of normal-form monomials. A monomial is a sorted
//! list of generator indices (even generators may repeat); products carry the
//! Koszul sign from reordering odd generators. Relations are handled one degree
//! at a time: the ideal's degree-k slice is row reduced and the non-pivot
//! monomials form the quotient basis.
//!
//! Monomials are ordered colexicographically (compare the largest generator
//! first), so within a degree the basis lists monomials built from early
//! generators first.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::{Arc, OnceLock};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Echelon, Field};
use crate::scalar::CycScalar;

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(Vec<u16>);

impl Monomial {
    pub fn unit() -> Self {
        Monomial(Vec::new())
    }

    pub fn from_sorted(gens: Vec<u16>) -> Self {
        debug_assert!(gens.windows(2).all(|w| w[0] <= w[1]));
        Monomial(gens)
    }

    pub fn gens(&self) -> &[u16] {
        &self.0
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.iter().rev().cmp(other.0.iter().rev())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub type Terms = BTreeMap<Monomial, CycScalar>;

fn add_term(terms: &mut Terms, m: Monomial, c: CycScalar) {
    if c.is_zero() {
        return;
    }
    match terms.entry(m) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let s = o.get() + &c;
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorDecl {
    pub name: String,
    pub degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugate_of: Option<String>,
}

impl GeneratorDecl {
    pub fn new(name: &str, degree: usize) -> Self {
        GeneratorDecl {
            name: name.to_string(),
            degree,
            conjugate_of: None,
        }
    }

    pub fn conj_of(name: &str, degree: usize, partner: &str) -> Self {
        GeneratorDecl {
            name: name.to_string(),
            degree,
            conjugate_of: Some(partner.to_string()),
        }
    }
}

fn one_scalar() -> CycScalar {
    CycScalar::from_int(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    #[serde(default = "one_scalar")]
    pub coeff: CycScalar,
    pub monomial: Vec<String>,
}

impl Term {
    pub fn new(coeff: CycScalar, monomial: &[&str]) -> Self {
        Term {
            coeff,
            monomial: monomial.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn unit(monomial: &[&str]) -> Self {
        Self::new(CycScalar::from_int(1), monomial)
    }
}

/// A sum of terms, as it appears in documents.
pub type Expr = Vec<Term>;

fn default_zeta() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    #[serde(default = "default_zeta")]
    pub zeta: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_cap: Option<usize>,
    pub generators: Vec<GeneratorDecl>,
    #[serde(default)]
    pub differential: BTreeMap<String, Expr>,
    #[serde(default)]
    pub relations: Vec<Expr>,
}

impl AlgebraSpec {
    pub fn new(generators: Vec<GeneratorDecl>) -> Self {
        AlgebraSpec {
            zeta: 1,
            degree_cap: None,
            generators,
            differential: BTreeMap::new(),
            relations: Vec::new(),
        }
    }

    pub fn with_d(mut self, gen: &str, expr: Expr) -> Self {
        self.differential.insert(gen.to_string(), expr);
        self
    }

    pub fn with_relation(mut self, expr: Expr) -> Self {
        self.relations.push(expr);
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.degree_cap = Some(cap);
        self
    }

    pub fn with_zeta(mut self, zeta: u32) -> Self {
        self.zeta = zeta;
        self
    }

    /// lcm of the declared field and every coefficient's field.
    pub fn effective_modulus(&self) -> u32 {
        let exprs = self.differential.values().chain(self.relations.iter());
        exprs
            .flatten()
            .fold(self.zeta.max(1), |m, t| m.lcm(&t.coeff.modulus()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AlgebraFlags {
    pub is_minimal: bool,
    pub is_connected: bool,
    pub has_odd_only_generators: bool,
}

#[derive(Clone, Debug)]
struct Generator {
    name: String,
    degree: usize,
    partner: Option<usize>,
}

#[derive(Debug)]
struct Slice {
    free: Vec<Monomial>,
    free_pos: HashMap<Monomial, usize>,
    killed: Vec<bool>,
    reducer: Option<Echelon<CycScalar>>,
    basis: Vec<Monomial>,
    basis_pos: HashMap<Monomial, usize>,
}

/// Homogeneous element of a particular algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    alg: u64,
    degree: usize,
    terms: Terms,
    truncated: bool,
}

impl Element {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &Terms {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Set when a product or differential exceeded the degree cap.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn algebra_id(&self) -> u64 {
        self.alg
    }

    pub fn coeff(&self, m: &Monomial) -> CycScalar {
        self.terms.get(m).cloned().unwrap_or_else(CycScalar::zero)
    }

    fn combine(&self, other: &Element, negate: bool) -> Element {
        assert_eq!(self.alg, other.alg, "elements of different algebras");
        assert!(
            self.degree == other.degree || self.is_zero() || other.is_zero(),
            "adding elements of degrees {} and {}",
            self.degree,
            other.degree
        );
        let degree = if self.is_zero() && !other.is_zero() {
            other.degree
        } else {
            self.degree
        };
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            add_term(&mut terms, m.clone(), if negate { -c } else { c.clone() });
        }
        Element {
            alg: self.alg,
            degree,
            terms,
            truncated: self.truncated || other.truncated,
        }
    }

    pub fn plus(&self, other: &Element) -> Element {
        self.combine(other, false)
    }

    pub fn minus(&self, other: &Element) -> Element {
        self.combine(other, true)
    }

    pub fn scale(&self, c: &CycScalar) -> Element {
        let terms = if c.is_zero() {
            Terms::new()
        } else {
            self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect()
        };
        Element {
            terms,
            ..self.clone()
        }
    }

    pub fn neg(&self) -> Element {
        self.scale(&CycScalar::from_int(-1))
    }
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// A validated algebra. Bases and differentials are computed lazily per degree.
#[derive(Debug)]
pub struct Algebra {
    id: u64,
    modulus: u32,
    cap: usize,
    gens: Vec<Generator>,
    odd: Vec<bool>,
    names: HashMap<String, usize>,
    relations: Vec<(usize, Terms)>,
    diff: Vec<Terms>,
    spec: AlgebraSpec,
    flags: AlgebraFlags,
    slices: Vec<OnceLock<Slice>>,
    dcache: Vec<OnceLock<Vec<Terms>>>,
}

/// Product of two sorted monomials with its Koszul sign; `None` if an odd
/// generator repeats.
fn mul_mono(a: &[u16], b: &[u16], odd: &[bool]) -> Option<(bool, Monomial)> {
    let mut swaps = 0usize;
    for &y in b {
        if !odd[y as usize] {
            continue;
        }
        for &x in a {
            if !odd[x as usize] {
                continue;
            }
            match x.cmp(&y) {
                Ordering::Greater => swaps += 1,
                Ordering::Equal => return None,
                Ordering::Less => {}
            }
        }
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] <= b[j]) {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    Some((swaps % 2 == 1, Monomial(out)))
}

fn mul_terms(a: &Terms, b: &Terms, odd: &[bool]) -> Terms {
    let mut out = Terms::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            if let Some((neg, m)) = mul_mono(&ma.0, &mb.0, odd) {
                let c = ca * cb;
                add_term(&mut out, m, if neg { -c } else { c });
            }
        }
    }
    out
}

impl Algebra {
    pub fn new(spec: &AlgebraSpec) -> Result<Arc<Algebra>> {
        if spec.zeta == 0 {
            return Err(Error::ZeroModulus);
        }
        let mut names = HashMap::new();
        for (i, g) in spec.generators.iter().enumerate() {
            if g.degree == 0 {
                return Err(Error::BadDegree(g.name.clone()));
            }
            if names.insert(g.name.clone(), i).is_some() {
                return Err(Error::DuplicateGenerator(g.name.clone()));
            }
        }
        if spec.generators.len() > u16::MAX as usize {
            return Err(Error::Document("too many generators".into()));
        }
        let mut gens: Vec<Generator> = spec
            .generators
            .iter()
            .map(|g| Generator {
                name: g.name.clone(),
                degree: g.degree,
                partner: None,
            })
            .collect();
        for (i, g) in spec.generators.iter().enumerate() {
            if let Some(p) = &g.conjugate_of {
                let j = *names
                    .get(p)
                    .ok_or_else(|| Error::UnknownGenerator(p.clone()))?;
                if j == i || gens[j].degree != gens[i].degree {
                    return Err(Error::BadConjugate(g.name.clone()));
                }
                for (a, b) in [(i, j), (j, i)] {
                    match gens[a].partner {
                        None => gens[a].partner = Some(b),
                        Some(x) if x == b => {}
                        Some(_) => return Err(Error::BadConjugate(gens[a].name.clone())),
                    }
                }
            }
        }
        let odd: Vec<bool> = gens.iter().map(|g| g.degree % 2 == 1).collect();
        let has_even = odd.iter().any(|o| !o);
        let cap = match spec.degree_cap {
            Some(c) => c,
            None if has_even => return Err(Error::CapRequired),
            None => gens.iter().map(|g| g.degree).sum::<usize>() + 1,
        };
        let modulus = spec.effective_modulus();

        let mut alg = Algebra {
            id: NEXT_ID.fetch_add(1, AtomicOrdering::Relaxed),
            modulus,
            cap,
            odd,
            names,
            relations: Vec::new(),
            diff: vec![Terms::new(); gens.len()],
            spec: AlgebraSpec {
                zeta: modulus,
                degree_cap: Some(cap),
                ..spec.clone()
            },
            gens,
            flags: AlgebraFlags {
                is_minimal: true,
                is_connected: true,
                has_odd_only_generators: !has_even,
            },
            slices: (0..=cap).map(|_| OnceLock::new()).collect(),
            dcache: (0..=cap).map(|_| OnceLock::new()).collect(),
        };

        for (i, r) in spec.relations.iter().enumerate() {
            let (deg, terms) = alg
                .free_from_expr(r)?
                .ok_or(Error::InhomogeneousRelation { relation: i })?;
            if !terms.is_empty() {
                alg.relations.push((deg, terms));
            }
        }

        for (name, expr) in &spec.differential {
            let g = alg.index_of(name)?;
            let expected = alg.gens[g].degree + 1;
            let e = alg.parse_expr(expr, Some(expected))?;
            alg.diff[g] = e.terms;
        }

        for (g, dg) in alg.diff.iter().enumerate() {
            if dg.keys().any(|m| m.0.len() == 1) {
                alg.flags.is_minimal = false;
            }
            let deg = alg.gens[g].degree;
            if deg + 2 <= cap {
                let dd = alg.d_free(dg);
                let (dd, _) = alg.normalize(deg + 2, dd);
                if !dd.is_empty() {
                    let w = alg.elem(deg + 2, dd);
                    return Err(Error::D2Nonzero {
                        generator: alg.gens[g].name.clone(),
                        witness: alg.fmt(&w),
                    });
                }
            }
        }

        for (i, (deg, r)) in alg.relations.iter().enumerate() {
            if deg + 1 <= cap {
                let (dr, _) = alg.normalize(deg + 1, alg.d_free(r));
                if !dr.is_empty() {
                    return Err(Error::IdealNotStable {
                        relation: i,
                        degree: deg + 1,
                    });
                }
            }
        }
        alg.flags.is_connected = alg.dim(0) == 1;
        Ok(Arc::new(alg))
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn flags(&self) -> AlgebraFlags {
        self.flags
    }

    /// The defining data, with the field and degree cap made explicit.
    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn ngens(&self) -> usize {
        self.gens.len()
    }

    pub fn gen_name(&self, i: usize) -> &str {
        &self.gens[i].name
    }

    pub fn gen_degree(&self, i: usize) -> usize {
        self.gens[i].degree
    }

    pub fn gen_partner(&self, i: usize) -> Option<usize> {
        self.gens[i].partner
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    pub fn is_odd(&self, i: usize) -> bool {
        self.odd[i]
    }

    pub fn mono_degree(&self, m: &Monomial) -> usize {
        m.0.iter().map(|&g| self.gens[g as usize].degree).sum()
    }

    fn elem(&self, degree: usize, terms: Terms) -> Element {
        Element {
            alg: self.id,
            degree,
            terms,
            truncated: false,
        }
    }

    pub fn zero(&self, degree: usize) -> Element {
        self.elem(degree, Terms::new())
    }

    pub fn one(&self) -> Element {
        let mut t = Terms::new();
        t.insert(Monomial::unit(), CycScalar::from_int(1));
        let (t, _) = self.normalize(0, t);
        self.elem(0, t)
    }

    pub fn gen_at(&self, i: usize) -> Element {
        let mut t = Terms::new();
        t.insert(Monomial(vec![i as u16]), CycScalar::from_int(1));
        let deg = self.gens[i].degree;
        let (t, truncated) = self.normalize(deg, t);
        Element {
            truncated,
            ..self.elem(deg, t)
        }
    }

    pub fn gen(&self, name: &str) -> Result<Element> {
        Ok(self.gen_at(self.index_of(name)?))
    }

    /// The product of the named generators, in the given order.
    pub fn monomial(&self, names: &[&str]) -> Result<Element> {
        let mut acc = self.one();
        for n in names {
            acc = self.mul(&acc, &self.gen(n)?)?;
        }
        Ok(acc)
    }

    fn check(&self, e: &Element) -> Result<()> {
        if e.alg == self.id {
            Ok(())
        } else {
            Err(Error::ParentMismatch)
        }
    }

    fn slice(&self, k: usize) -> &Slice {
        self.slices[k].get_or_init(|| self.build_slice(k))
    }

    fn enumerate(&self, k: usize) -> Vec<Monomial> {
        fn rec(alg: &Algebra, start: usize, rem: usize, cur: &mut Vec<u16>, out: &mut Vec<Monomial>) {
            if rem == 0 {
                out.push(Monomial(cur.clone()));
                return;
            }
            for i in start..alg.gens.len() {
                let d = alg.gens[i].degree;
                if d > rem {
                    continue;
                }
                cur.push(i as u16);
                let next = if alg.odd[i] { i + 1 } else { i };
                rec(alg, next, rem - d, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(self, 0, k, &mut Vec::new(), &mut out);
        out.sort();
        out
    }

    fn build_slice(&self, k: usize) -> Slice {
        let free = self.enumerate(k);
        let free_pos: HashMap<Monomial, usize> =
            free.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let mut killed = vec![false; free.len()];
        let mut rows: Vec<Terms> = Vec::new();
        for (dr, r) in &self.relations {
            if *dr > k {
                continue;
            }
            for m in self.enumerate(k - dr) {
                let mut t = Terms::new();
                t.insert(m, CycScalar::from_int(1));
                let prod = mul_terms(r, &t, &self.odd);
                match prod.len() {
                    0 => {}
                    1 => killed[free_pos[prod.keys().next().unwrap()]] = true,
                    _ => rows.push(prod),
                }
            }
        }
        let reducer = if rows.is_empty() {
            None
        } else {
            let mut e = Echelon::new(free.len());
            for r in rows {
                let mut v = linalg::zero_vec(free.len());
                for (m, c) in r {
                    let p = free_pos[&m];
                    if !killed[p] {
                        v[p] = c;
                    }
                }
                e.insert(v);
            }
            Some(e)
        };
        let mut is_basis = killed.iter().map(|k| !k).collect::<Vec<_>>();
        if let Some(e) = &reducer {
            for &p in e.pivots() {
                is_basis[p] = false;
            }
        }
        let basis: Vec<Monomial> = free
            .iter()
            .zip(&is_basis)
            .filter(|(_, b)| **b)
            .map(|(m, _)| m.clone())
            .collect();
        let basis_pos = basis.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        Slice {
            free,
            free_pos,
            killed,
            reducer,
            basis,
            basis_pos,
        }
    }

    /// Reduce a free polynomial of degree `k` modulo the relations. The flag is
    /// set when `k` exceeds the cap and a nonzero input was dropped.
    fn normalize(&self, k: usize, terms: Terms) -> (Terms, bool) {
        if k > self.cap {
            return (Terms::new(), !terms.is_empty());
        }
        if self.relations.is_empty() || terms.is_empty() {
            return (terms, false);
        }
        let s = self.slice(k);
        match &s.reducer {
            None => (
                terms
                    .into_iter()
                    .filter(|(m, _)| !s.killed[s.free_pos[m]])
                    .collect(),
                false,
            ),
            Some(e) => {
                let mut v = linalg::zero_vec(s.free.len());
                for (m, c) in terms {
                    let p = s.free_pos[&m];
                    if !s.killed[p] {
                        v[p] = c;
                    }
                }
                let rem = e.reduce(&v).remainder;
                let out = rem
                    .into_iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| (s.free[i].clone(), c))
                    .collect();
                (out, false)
            }
        }
    }

    /// Parse a sum of terms. With `expected`, every term must have that
    /// degree; otherwise the degree is taken from the terms.
    pub fn parse_expr(&self, expr: &[Term], expected: Option<usize>) -> Result<Element> {
        let (deg, terms) = match self.free_from_expr(expr)? {
            None => return Err(Error::DegreeMismatch {
                expected: expected.unwrap_or(0),
            }),
            Some(x) => x,
        };
        let deg = match (expected, terms.is_empty()) {
            (Some(e), true) => e,
            (Some(e), false) if e != deg => return Err(Error::DegreeMismatch { expected: e }),
            _ => deg,
        };
        let (terms, truncated) = self.normalize(deg, terms);
        Ok(Element {
            truncated,
            ..self.elem(deg, terms)
        })
    }

    /// Free (unreduced) polynomial of an expression; `None` if inhomogeneous.
    fn free_from_expr(&self, expr: &[Term]) -> Result<Option<(usize, Terms)>> {
        let mut out = Terms::new();
        let mut deg: Option<usize> = None;
        for t in expr {
            let mut m = Terms::new();
            m.insert(Monomial::unit(), t.coeff.clone());
            let mut d = 0;
            for name in &t.monomial {
                let g = self.index_of(name)?;
                d += self.gens[g].degree;
                let mut gt = Terms::new();
                gt.insert(Monomial(vec![g as u16]), CycScalar::from_int(1));
                m = mul_terms(&m, &gt, &self.odd);
            }
            if t.coeff.is_zero() {
                continue;
            }
            match deg {
                None => deg = Some(d),
                Some(x) if x != d => return Ok(None),
                _ => {}
            }
            for (mono, c) in m {
                add_term(&mut out, mono, c);
            }
        }
        Ok(Some((deg.unwrap_or(0), out)))
    }

    pub fn to_expr(&self, e: &Element) -> Expr {
        e.terms
            .iter()
            .map(|(m, c)| Term {
                coeff: c.embed(self.modulus).unwrap_or_else(|_| c.clone()),
                monomial: m.0.iter().map(|&g| self.gens[g as usize].name.clone()).collect(),
            })
            .collect()
    }

    pub fn fmt_monomial(&self, m: &Monomial) -> String {
        if m.is_unit() {
            return "1".into();
        }
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < m.0.len() {
            let g = m.0[i];
            let mut j = i;
            while j < m.0.len() && m.0[j] == g {
                j += 1;
            }
            let name = &self.gens[g as usize].name;
            parts.push(if j - i > 1 {
                format!("{name}^{}", j - i)
            } else {
                name.clone()
            });
            i = j;
        }
        parts.join("*")
    }

    pub fn fmt(&self, e: &Element) -> String {
        if e.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (m, c)) in e.terms.iter().enumerate() {
            let (neg, mag) = match c.to_rational() {
                Some(r) if r < num_traits::Zero::zero() => (true, CycScalar::rational(-r)),
                _ => (false, c.clone()),
            };
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = self.fmt_monomial(m);
            if mag.is_one() {
                out.push_str(&mono);
            } else {
                if mag.is_rational() {
                    out.push_str(&mag.to_string());
                } else {
                    out.push_str(&format!("({mag})"));
                }
                if !m.is_unit() {
                    out.push('*');
                    out.push_str(&mono);
                }
            }
        }
        out
    }

    pub fn basis(&self, k: usize) -> Result<&[Monomial]> {
        if k > self.cap {
            return Err(Error::CapExceeded {
                degree: k,
                cap: self.cap,
            });
        }
        Ok(&self.slice(k).basis)
    }

    /// Dimension of the degree-`k` slice; zero above the cap.
    pub fn dim(&self, k: usize) -> usize {
        self.basis(k).map_or(0, |b| b.len())
    }

    pub fn coords(&self, e: &Element) -> Vec<CycScalar> {
        if e.degree > self.cap {
            return Vec::new();
        }
        let s = self.slice(e.degree);
        let mut v = linalg::zero_vec(s.basis.len());
        for (m, c) in &e.terms {
            v[s.basis_pos[m]] = c.clone();
        }
        v
    }

    pub fn from_coords(&self, k: usize, v: &[CycScalar]) -> Element {
        let s = self.slice(k);
        assert_eq!(v.len(), s.basis.len(), "coordinate vector has wrong length");
        let terms = s
            .basis
            .iter()
            .zip(v)
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        self.elem(k, terms)
    }

    pub fn basis_element(&self, k: usize, i: usize) -> Element {
        let s = self.slice(k);
        let mut t = Terms::new();
        t.insert(s.basis[i].clone(), CycScalar::from_int(1));
        self.elem(k, t)
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        let deg = a.degree + b.degree;
        let prod = mul_terms(&a.terms, &b.terms, &self.odd);
        let (terms, truncated) = self.normalize(deg, prod);
        Ok(Element {
            truncated: truncated || a.truncated || b.truncated,
            ..self.elem(deg, terms)
        })
    }

    /// Product of a list of elements; the empty product is 1.
    pub fn mul_all(&self, xs: &[&Element]) -> Result<Element> {
        let mut acc = self.one();
        for x in xs {
            acc = self.mul(&acc, x)?;
        }
        Ok(acc)
    }

    pub fn pow(&self, a: &Element, n: usize) -> Result<Element> {
        let mut acc = self.one();
        for _ in 0..n {
            acc = self.mul(&acc, a)?;
        }
        Ok(acc)
    }

    /// Leibniz extension of `d` on a free polynomial (result unreduced).
    fn d_free(&self, terms: &Terms) -> Terms {
        let mut out = Terms::new();
        for (m, c) in terms {
            let mut sign_odd = false;
            for (i, &g) in m.0.iter().enumerate() {
                let dg = &self.diff[g as usize];
                if !dg.is_empty() {
                    let mut left = Terms::new();
                    left.insert(Monomial(m.0[..i].to_vec()), c.clone());
                    let mut right = Terms::new();
                    right.insert(Monomial(m.0[i + 1..].to_vec()), CycScalar::from_int(1));
                    let t = mul_terms(&mul_terms(&left, dg, &self.odd), &right, &self.odd);
                    for (mm, cc) in t {
                        add_term(&mut out, mm, if sign_odd { -cc } else { cc });
                    }
                }
                if self.odd[g as usize] {
                    sign_odd = !sign_odd;
                }
            }
        }
        out
    }

    fn d_basis(&self, k: usize) -> &[Terms] {
        self.dcache[k].get_or_init(|| {
            self.slice(k)
                .basis
                .iter()
                .map(|m| {
                    let mut t = Terms::new();
                    t.insert(m.clone(), CycScalar::from_int(1));
                    self.normalize(k + 1, self.d_free(&t)).0
                })
                .collect()
        })
    }

    pub fn d(&self, a: &Element) -> Result<Element> {
        self.check(a)?;
        let deg = a.degree + 1;
        if a.degree >= self.cap {
            return Ok(Element {
                truncated: a.truncated || !a.is_zero(),
                ..self.elem(deg, Terms::new())
            });
        }
        let s = self.slice(a.degree);
        let dcache = self.d_basis(a.degree);
        let mut out = Terms::new();
        for (m, c) in &a.terms {
            for (mm, cc) in &dcache[s.basis_pos[m]] {
                add_term(&mut out, mm.clone(), c * cc);
            }
        }
        Ok(Element {
            truncated: a.truncated,
            ..self.elem(deg, out)
        })
    }

    pub fn is_closed(&self, a: &Element) -> Result<bool> {
        Ok(self.d(a)?.is_zero())
    }

    /// Differential of generator `i` as an element.
    pub fn d_gen(&self, i: usize) -> Element {
        let deg = self.gens[i].degree + 1;
        self.elem(deg, self.diff[i].clone())
    }

    /// Rows are the coordinates of d(basis_i) in degree k+1.
    pub fn d_matrix(&self, k: usize) -> Result<Vec<Vec<CycScalar>>> {
        if k + 1 > self.cap {
            return Err(Error::CapExceeded {
                degree: k + 1,
                cap: self.cap,
            });
        }
        let n = self.dim(k + 1);
        let s1 = self.slice(k + 1);
        Ok(self
            .d_basis(k)
            .iter()
            .map(|t| {
                let mut v = linalg::zero_vec(n);
                for (m, c) in t {
                    v[s1.basis_pos[m]] = c.clone();
                }
                v
            })
            .collect())
    }

    /// Swap every generator with its declared partner and conjugate coefficients.
    pub fn conj(&self, a: &Element) -> Result<Element> {
        self.check(a)?;
        let mut out = Terms::new();
        for (m, c) in &a.terms {
            let mut t = Terms::new();
            t.insert(Monomial::unit(), c.conj());
            for &g in &m.0 {
                let p = self.gens[g as usize].partner.ok_or_else(|| Error::NoConjugateDeclared {
                    generator: self.gens[g as usize].name.clone(),
                })?;
                let mut gt = Terms::new();
                gt.insert(Monomial(vec![p as u16]), CycScalar::from_int(1));
                t = mul_terms(&t, &gt, &self.odd);
            }
            for (mm, cc) in t {
                add_term(&mut out, mm, cc);
            }
        }
        let (terms, _) = self.normalize(a.degree, out);
        Ok(Element {
            truncated: a.truncated,
            ..self.elem(a.degree, terms)
        })
    }
}

/// Multiplicative map between algebras given by generator images. With
/// `antilinear` set, coefficients are conjugated on the way through.
#[derive(Clone, Debug)]
pub struct AlgebraMap {
    source: Arc<Algebra>,
    target: Arc<Algebra>,
    images: Vec<Element>,
    antilinear: bool,
}

impl AlgebraMap {
    pub fn new(
        source: Arc<Algebra>,
        target: Arc<Algebra>,
        images: Vec<Element>,
        antilinear: bool,
    ) -> Result<Self> {
        assert_eq!(images.len(), source.ngens(), "one image per generator");
        for (i, im) in images.iter().enumerate() {
            target.check(im)?;
            if !im.is_zero() && im.degree != source.gen_degree(i) {
                return Err(Error::DegreeMismatch {
                    expected: source.gen_degree(i),
                });
            }
        }
        let map = AlgebraMap {
            source,
            target,
            images,
            antilinear,
        };
        for (i, (deg, r)) in map.source.relations.iter().enumerate() {
            if *deg <= map.target.cap {
                let img = map.apply_terms(r, *deg)?;
                if !img.is_zero() {
                    return Err(Error::RelationNotPreserved { relation: i });
                }
            }
        }
        Ok(map)
    }

    /// Map given by generator names: `images[name]` for each source generator.
    pub fn from_exprs(
        source: Arc<Algebra>,
        target: Arc<Algebra>,
        images: &BTreeMap<String, Expr>,
        antilinear: bool,
    ) -> Result<Self> {
        for name in images.keys() {
            source.index_of(name)?;
        }
        let mut ims = Vec::with_capacity(source.ngens());
        for i in 0..source.ngens() {
            let deg = source.gen_degree(i);
            let im = match images.get(source.gen_name(i)) {
                Some(e) => target.parse_expr(e, Some(deg))?,
                None => target.zero(deg),
            };
            ims.push(im);
        }
        Self::new(source, target, ims, antilinear)
    }

    pub fn identity(alg: Arc<Algebra>) -> Self {
        let images = (0..alg.ngens()).map(|i| alg.gen_at(i)).collect();
        AlgebraMap {
            source: alg.clone(),
            target: alg,
            images,
            antilinear: false,
        }
    }

    pub fn source(&self) -> &Arc<Algebra> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Algebra> {
        &self.target
    }

    pub fn images(&self) -> &[Element] {
        &self.images
    }

    pub fn is_antilinear(&self) -> bool {
        self.antilinear
    }

    fn apply_terms(&self, terms: &Terms, degree: usize) -> Result<Element> {
        let t = &self.target;
        let mut acc = t.zero(degree);
        for (m, c) in terms {
            let c = if self.antilinear { c.conj() } else { c.clone() };
            let mut prod = t.one().scale(&c);
            for &g in &m.0 {
                prod = t.mul(&prod, &self.images[g as usize])?;
                if prod.is_zero() {
                    break;
                }
            }
            acc = acc.plus(&Element {
                degree,
                ..prod
            });
        }
        Ok(acc)
    }

    pub fn apply(&self, e: &Element) -> Result<Element> {
        self.source.check(e)?;
        let mut out = self.apply_terms(&e.terms, e.degree)?;
        out.truncated |= e.truncated;
        Ok(out)
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &AlgebraMap) -> Result<AlgebraMap> {
        if first.target.id != self.source.id {
            return Err(Error::ParentMismatch);
        }
        let images = first
            .images
            .iter()
            .map(|im| self.apply(im))
            .collect::<Result<Vec<_>>>()?;
        Ok(AlgebraMap {
            source: first.source.clone(),
            target: self.target.clone(),
            images,
            antilinear: self.antilinear ^ first.antilinear,
        })
    }

    /// First generator (in declaration order) on which f∘d and d∘f differ.
    pub fn chain_map_defect(&self) -> Result<Option<(usize, Element)>> {
        for i in 0..self.source.ngens() {
            let deg = self.source.gen_degree(i) + 1;
            if deg > self.source.cap || deg > self.target.cap {
                continue;
            }
            let lhs = self.apply(&self.source.d_gen(i))?;
            let rhs = self.target.d(&self.images[i])?;
            let diff = lhs.minus(&rhs);
            if !diff.is_zero() {
                return Ok(Some((i, diff)));
            }
        }
        Ok(None)
    }

    /// Matrix of the map on degree-`k` slices, rows indexed by source basis.
    pub fn matrix(&self, k: usize) -> Result<Vec<Vec<CycScalar>>> {
        let n = self.source.dim(k);
        (0..n)
            .map(|i| {
                let img = self.apply(&self.source.basis_element(k, i))?;
                if img.is_zero() {
                    Ok(linalg::zero_vec(self.target.dim(k)))
                } else {
                    Ok(self.target.coords(&img))
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heis6() -> Arc<Algebra> {
        let g = |n: &str| GeneratorDecl::new(n, 1);
        let spec = AlgebraSpec::new(vec![g("mu"), g("mubar"), g("nu"), g("nubar"), g("theta"), g("thetabar")])
            .with_d("theta", vec![Term::unit(&["mu", "nu"])])
            .with_d("thetabar", vec![Term::unit(&["mubar", "nubar"])]);
        Algebra::new(&spec).unwrap()
    }

    #[test]
    fn koszul_signs() {
        let a = heis6();
        let mu = a.gen("mu").unwrap();
        let nu = a.gen("nu").unwrap();
        let mn = a.mul(&mu, &nu).unwrap();
        let nm = a.mul(&nu, &mu).unwrap();
        assert_eq!(mn, nm.neg());
        assert!(a.mul(&mu, &mu).unwrap().is_zero());
    }

    #[test]
    fn heisenberg_differential() {
        let a = heis6();
        let th = a.gen("theta").unwrap();
        assert_eq!(a.d(&th).unwrap(), a.monomial(&["mu", "nu"]).unwrap());
        let x = a.monomial(&["theta", "mubar", "nubar"]).unwrap();
        assert_eq!(a.d(&x).unwrap(), a.monomial(&["mu", "nu", "mubar", "nubar"]).unwrap());
        assert!(a.d(&a.d(&x).unwrap()).unwrap().is_zero());
        assert!(a.flags().is_minimal);
        assert_eq!(a.dim(2), 15);
    }

    #[test]
    fn d2_nonzero_rejected() {
        let spec = AlgebraSpec::new(vec![
            GeneratorDecl::new("theta", 1),
            GeneratorDecl::new("mu", 2),
            GeneratorDecl::new("nu", 3),
        ])
        .with_cap(5)
        .with_d("theta", vec![Term::unit(&["mu"])])
        .with_d("mu", vec![Term::unit(&["nu"])]);
        match Algebra::new(&spec) {
            Err(Error::D2Nonzero { generator, .. }) => assert_eq!(generator, "theta"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn relations_and_cap() {
        let spec = AlgebraSpec::new(vec![GeneratorDecl::new("a", 2)])
            .with_cap(4)
            .with_relation(vec![Term::unit(&["a", "a"])]);
        let s = Algebra::new(&spec).unwrap();
        assert_eq!(s.dim(4), 0);
        assert_eq!(s.dim(2), 1);
        let a = s.gen("a").unwrap();
        assert!(s.mul(&a, &a).unwrap().is_zero());
        assert!(!s.pow(&a, 3).unwrap().is_truncated());
        let free = Algebra::new(&AlgebraSpec::new(vec![GeneratorDecl::new("a", 2)]).with_cap(4)).unwrap();
        let fa = free.gen("a").unwrap();
        let a3 = free.pow(&fa, 3).unwrap();
        assert!(a3.is_zero() && a3.is_truncated());
        assert!(matches!(s.basis(5), Err(Error::CapExceeded { .. })));
        assert_eq!(
            Algebra::new(&AlgebraSpec::new(vec![GeneratorDecl::new("a", 2)])).unwrap_err(),
            Error::CapRequired
        );
    }

    #[test]
    fn linear_relation_normal_form() {
        // a + b = 0 in degree 2, so b reduces onto a.
        let spec = AlgebraSpec::new(vec![GeneratorDecl::new("a", 2), GeneratorDecl::new("b", 2)])
            .with_cap(4)
            .with_relation(vec![Term::unit(&["a"]), Term::unit(&["b"])]);
        let s = Algebra::new(&spec).unwrap();
        assert_eq!(s.dim(2), 1);
        assert_eq!(s.dim(4), 1);
        let a = s.gen("a").unwrap();
        let b = s.gen("b").unwrap();
        assert_eq!(a.plus(&b), s.zero(2));
        assert_eq!(s.mul(&a, &b).unwrap(), s.mul(&b, &b).unwrap().neg());
    }

    #[test]
    fn ideal_stability_checked() {
        // d(xa) = a^2 is not a multiple of xa.
        let spec = AlgebraSpec::new(vec![GeneratorDecl::new("a", 2), GeneratorDecl::new("x", 1)])
            .with_cap(4)
            .with_d("x", vec![Term::unit(&["a"])])
            .with_relation(vec![Term::unit(&["x", "a"])]);
        assert_eq!(
            Algebra::new(&spec).unwrap_err(),
            Error::IdealNotStable { relation: 0, degree: 4 }
        );
        let inh = AlgebraSpec::new(vec![GeneratorDecl::new("a", 2), GeneratorDecl::new("x", 1)])
            .with_cap(4)
            .with_relation(vec![Term::unit(&["x"]), Term::unit(&["a"])]);
        assert_eq!(
            Algebra::new(&inh).unwrap_err(),
            Error::InhomogeneousRelation { relation: 0 }
        );
    }

    #[test]
    fn conjugation() {
        let g = |n: &str| GeneratorDecl::new(n, 1);
        let c = |n: &str, p: &str| GeneratorDecl::conj_of(n, 1, p);
        let spec = AlgebraSpec::new(vec![g("mu"), c("mubar", "mu"), g("nu"), c("nubar", "nu"), g("theta"), c("thetabar", "theta")]);
        let a = Algebra::new(&spec).unwrap();
        let mi = -CycScalar::i();
        let w = a.parse_expr(&[Term::new(mi.clone(), &["mu", "mubar"])], None).unwrap();
        assert_eq!(a.conj(&w).unwrap(), w);
        let nt = a.monomial(&["nu", "theta"]).unwrap();
        assert_eq!(a.conj(&nt).unwrap(), a.monomial(&["nubar", "thetabar"]).unwrap());
        let h = heis6();
        let err = h.conj(&h.gen("mu").unwrap()).unwrap_err();
        assert_eq!(err.code(), "NO_CONJUGATE_DECLARED");
    }

    #[test]
    fn parent_mismatch() {
        let a = heis6();
        let b = heis6();
        assert_eq!(
            a.mul(&a.gen("mu").unwrap(), &b.gen("mu").unwrap()).unwrap_err(),
            Error::ParentMismatch
        );
    }
}
