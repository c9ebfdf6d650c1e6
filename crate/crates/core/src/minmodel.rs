//! Degree-bounded minimal models of cohomologically 1-connected algebras,
//! s-formality checks and the combined formality verdict.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{Algebra, AlgebraMap, AlgebraSpec, Element, Expr, GeneratorDecl};
use crate::cohomology::CohomologyRing;
use crate::document::{Loaded, ModelKind};
use crate::error::{Error, Result};
use crate::linalg::{self, Echelon};
use crate::massey::{self, MasseyReport};

#[derive(Clone, Debug, Serialize)]
pub struct ModelGenerator {
    pub name: String,
    pub degree: usize,
    /// True for the closed part C, false for N.
    pub closed: bool,
    pub differential: Expr,
    /// Image under the quasi-isomorphism, in the target algebra.
    pub image: Expr,
}

#[derive(Clone, Debug)]
pub struct MinimalModel {
    bound: usize,
    model: Arc<Algebra>,
    target: Arc<Algebra>,
    generators: Vec<ModelGenerator>,
    images: Vec<Element>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalModelReport {
    pub bound: usize,
    pub generators: Vec<ModelGenerator>,
    pub c_dims: BTreeMap<usize, usize>,
    pub n_dims: BTreeMap<usize, usize>,
}

fn model_algebra(gens: &[GeneratorDecl], d: &BTreeMap<String, Expr>, bound: usize, zeta: u32) -> Result<Arc<Algebra>> {
    let mut spec = AlgebraSpec::new(gens.to_vec()).with_cap(bound + 2).with_zeta(zeta);
    spec.differential = d.clone();
    Algebra::new(&spec)
}

/// Build ⋀V through generators of degree `bound`, mapping into the complex of `target`.
pub fn build_minimal_model(target: &CohomologyRing, bound: usize) -> Result<MinimalModel> {
    let talg = target.algebra().clone();
    if target.max_degree() < bound + 1 {
        return Err(Error::CapTooLow {
            needed: bound + 2,
            cap: talg.cap(),
        });
    }
    if let Some(mm) = already_minimal(target, bound)? {
        return Ok(mm);
    }
    for (k, want) in [(0usize, 1usize), (1, 0)] {
        if target.betti(k) != want {
            return Err(Error::NotOneConnected {
                degree: k,
                betti: target.betti(k),
            });
        }
    }
    let zeta = talg.modulus();
    let mut decls: Vec<GeneratorDecl> = Vec::new();
    let mut diffs: BTreeMap<String, Expr> = BTreeMap::new();
    let mut gens: Vec<ModelGenerator> = Vec::new();
    let mut images: Vec<Element> = Vec::new();
    for k in 2..=bound {
        // Closed generators onto the cokernel of H^k(ψ).
        let m = model_algebra(&decls, &diffs, bound, zeta)?;
        let hm = CohomologyRing::compute(&m, k + 1)?;
        let psi = AlgebraMap::new(m.clone(), talg.clone(), images.clone(), false)?;
        let mut image = Echelon::new(target.betti(k));
        for r in hm.reps(k) {
            image.insert(target.class_of(&psi.apply(r)?)?.coords);
        }
        let mut added = 0;
        for (i, rep) in target.reps(k).iter().enumerate() {
            if image.insert(linalg::unit_vec(target.betti(k), i)) {
                added += 1;
                let name = format!("c{k}_{added}");
                decls.push(GeneratorDecl::new(&name, k));
                gens.push(ModelGenerator {
                    name,
                    degree: k,
                    closed: true,
                    differential: Vec::new(),
                    image: talg.to_expr(rep),
                });
                images.push(rep.clone());
            }
        }
        // Non-closed generators killing the kernel of H^{k+1}(ψ).
        let m = model_algebra(&decls, &diffs, bound, zeta)?;
        let hm = CohomologyRing::compute(&m, k + 1)?;
        let psi = AlgebraMap::new(m.clone(), talg.clone(), images.clone(), false)?;
        let reps = hm.reps(k + 1);
        let rows = reps
            .iter()
            .map(|r| Ok(target.class_of(&psi.apply(r)?)?.coords))
            .collect::<Result<Vec<_>>>()?;
        for (j, c) in linalg::left_kernel(target.betti(k + 1), &rows).iter().enumerate() {
            let mut z = m.zero(k + 1);
            for (x, r) in c.iter().zip(reps) {
                z = z.plus(&r.scale(x));
            }
            let a = target
                .is_exact(&psi.apply(&z)?)?
                .expect("kernel classes map to exact elements");
            let name = format!("n{k}_{}", j + 1);
            decls.push(GeneratorDecl::new(&name, k));
            diffs.insert(name.clone(), m.to_expr(&z));
            gens.push(ModelGenerator {
                name,
                degree: k,
                closed: false,
                differential: m.to_expr(&z),
                image: talg.to_expr(&a),
            });
            images.push(a);
        }
    }
    let model = model_algebra(&decls, &diffs, bound, zeta)?;
    Ok(MinimalModel {
        bound,
        model,
        target: talg,
        generators: gens,
        images,
    })
}

/// A free algebra without linear parts, where d is injective on the
/// non-closed generators of each degree, is its own minimal model.
fn already_minimal(target: &CohomologyRing, bound: usize) -> Result<Option<MinimalModel>> {
    let talg = target.algebra();
    let spec = talg.spec();
    if target.subcomplex().is_some() || !spec.relations.is_empty() || !talg.flags().is_minimal {
        return Ok(None);
    }
    let max_deg = (0..talg.ngens()).map(|i| talg.gen_degree(i)).max().unwrap_or(0);
    for k in 1..=max_deg {
        let rows: Vec<_> = (0..talg.ngens())
            .filter(|&i| talg.gen_degree(i) == k && !talg.d_gen(i).is_zero())
            .map(|i| talg.coords(&talg.d_gen(i)))
            .collect();
        if linalg::rank(talg.dim(k + 1), &rows) != rows.len() {
            return Ok(None);
        }
    }
    let mut own = spec.clone();
    own.degree_cap = Some(talg.cap().max(bound + 2));
    let model = Algebra::new(&own)?;
    let generators = (0..talg.ngens())
        .map(|i| ModelGenerator {
            name: talg.gen_name(i).to_string(),
            degree: talg.gen_degree(i),
            closed: talg.d_gen(i).is_zero(),
            differential: talg.to_expr(&talg.d_gen(i)),
            image: talg.to_expr(&talg.gen_at(i)),
        })
        .collect();
    Ok(Some(MinimalModel {
        bound,
        model,
        target: talg.clone(),
        generators,
        images: (0..talg.ngens()).map(|i| talg.gen_at(i)).collect(),
    }))
}

impl MinimalModel {
    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.model
    }

    pub fn generators(&self) -> &[ModelGenerator] {
        &self.generators
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.generators.iter().map(|g| g.degree).collect()
    }

    pub fn psi(&self) -> Result<AlgebraMap> {
        AlgebraMap::new(self.model.clone(), self.target.clone(), self.images.clone(), false)
    }

    pub fn c_dims(&self) -> BTreeMap<usize, usize> {
        self.dims(true)
    }

    pub fn n_dims(&self) -> BTreeMap<usize, usize> {
        self.dims(false)
    }

    fn dims(&self, closed: bool) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for g in &self.generators {
            if g.closed == closed {
                *out.entry(g.degree).or_insert(0) += 1;
            }
        }
        out
    }

    /// Rank of H^k(ψ) next to the two Betti numbers, for k ≤ bound + 1.
    pub fn cohomology_ranks(&self, target: &CohomologyRing) -> Result<Vec<(usize, usize, usize)>> {
        let hm = CohomologyRing::compute(&self.model, self.bound + 1)?;
        let psi = self.psi()?;
        (0..=self.bound + 1)
            .map(|k| {
                let rows = hm
                    .reps(k)
                    .iter()
                    .map(|r| Ok(target.class_of(&psi.apply(r)?)?.coords))
                    .collect::<Result<Vec<_>>>()?;
                Ok((linalg::rank(target.betti(k), &rows), hm.betti(k), target.betti(k)))
            })
            .collect()
    }

    pub fn report(&self) -> MinimalModelReport {
        MinimalModelReport {
            bound: self.bound,
            generators: self.generators.clone(),
            c_dims: self.c_dims(),
            n_dims: self.n_dims(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SFormality {
    Certified,
    Refuted,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct SFormalityReport {
    pub s: usize,
    pub verdict: SFormality,
    pub route: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Expr>,
}

/// Checks the constructed split V^i = C^i ⊕ N^i for i ≤ s.
pub fn s_formality_check(mm: &MinimalModel, s: usize) -> Result<SFormalityReport> {
    if s > mm.bound {
        return Err(Error::Document(format!("s = {s} exceeds the model bound {}", mm.bound)));
    }
    let alg = &mm.model;
    let report = |verdict, route: &str, witness: Option<Expr>| SFormalityReport {
        s,
        verdict,
        route: route.to_string(),
        witness,
    };
    let low: Vec<usize> = (0..mm.generators.len()).filter(|&i| mm.generators[i].degree <= s).collect();
    let n_low: Vec<usize> = low.iter().copied().filter(|&i| !mm.generators[i].closed).collect();
    if n_low.is_empty() {
        return Ok(report(SFormality::Certified, "N^i = 0 for all i <= s", None));
    }
    if n_low.len() == 1 && alg.is_odd(n_low[0]) {
        // One odd b with db a nonzero polynomial in even closed generators: the
        // ideal is ⋀C·b and d(p·b) = ±p·db vanishes only for p = 0.
        let db = alg.d_gen(n_low[0]);
        let polynomial = !db.is_zero()
            && db.terms().keys().all(|m| {
                m.gens().iter().all(|&g| {
                    let g = g as usize;
                    !alg.is_odd(g) && mm.generators[g].closed
                })
            });
        if polynomial {
            return Ok(report(
                SFormality::Certified,
                "single odd N generator with polynomial differential in even closed generators",
                None,
            ));
        }
    }
    let in_low = |g: usize| mm.generators[g].degree <= s;
    let is_n = |g: usize| !mm.generators[g].closed && mm.generators[g].degree <= s;
    let finite = low.iter().all(|&g| alg.is_odd(g));
    let top: usize = low.iter().map(|&g| mm.generators[g].degree).sum();
    let hm = CohomologyRing::compute(alg, mm.bound)?;
    let split_unique = (1..=s).all(|i| {
        let has_n = mm.generators.iter().any(|g| g.degree == i && !g.closed);
        let has_c = mm.generators.iter().any(|g| g.degree == i && g.closed);
        !(has_n && has_c)
    });
    for j in 1..=mm.bound {
        let basis = alg.basis(j)?;
        let idx: Vec<usize> = (0..basis.len())
            .filter(|&i| {
                let gs = basis[i].gens();
                gs.iter().all(|&g| in_low(g as usize)) && gs.iter().any(|&g| is_n(g as usize))
            })
            .collect();
        if idx.is_empty() {
            continue;
        }
        let rows = idx
            .iter()
            .map(|&i| {
                let d = alg.d(&alg.basis_element(j, i))?;
                Ok(if d.is_zero() { linalg::zero_vec(alg.dim(j + 1)) } else { alg.coords(&d) })
            })
            .collect::<Result<Vec<_>>>()?;
        for c in linalg::left_kernel(alg.dim(j + 1), &rows) {
            let mut e = alg.zero(j);
            for (x, &i) in c.iter().zip(&idx) {
                e = e.plus(&alg.basis_element(j, i).scale(x));
            }
            if !hm.class_of(&e)?.is_zero() {
                let (v, route) = if split_unique {
                    (SFormality::Refuted, "closed non-exact element in I_s")
                } else {
                    (SFormality::Inconclusive, "closed non-exact element in I_s for the constructed split")
                };
                return Ok(report(v, route, Some(alg.to_expr(&e))));
            }
        }
    }
    if finite && top <= mm.bound {
        Ok(report(SFormality::Certified, "every closed element of the finite ideal is exact", None))
    } else {
        Ok(report(SFormality::Inconclusive, "no witness up to the bound", None))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Formality {
    Formal,
    NotFormal,
    Unknown,
}

#[derive(Clone, Debug, Default)]
pub struct FormalityOptions {
    /// Limit on triple products examined, and on a-Massey correction terms.
    pub budget: usize,
    pub poincare_dim: Option<usize>,
    pub simply_connected: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FormalityReport {
    pub verdict: Formality,
    pub route: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub massey: Option<MasseyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimal_model: Option<MinimalModelReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_formality: Option<SFormalityReport>,
    pub notes: Vec<String>,
}

/// Massey scans, then the certificates that apply, in that order.
pub fn formality_verdict(doc: &Loaded, opts: &FormalityOptions) -> Result<FormalityReport> {
    let budget = if opts.budget == 0 { 2000 } else { opts.budget };
    let mut out = FormalityReport {
        verdict: Formality::Unknown,
        route: "no certificate applies".into(),
        massey: None,
        minimal_model: None,
        s_formality: None,
        notes: Vec::new(),
    };
    let h = doc.ring(None)?;
    for hint in &doc.doc.amassey {
        let a = doc.class(&hint.a)?;
        let bs = hint.bs.iter().map(|b| doc.class(b)).collect::<Result<Vec<_>>>()?;
        let r = massey::a_massey(&h, &a, &bs, budget.max(1000))?;
        out.notes.push(format!("a-Massey <{}; {}>: {:?}", hint.a, hint.bs.join(", "), r.verdict));
        if r.is_nonzero() {
            out.verdict = Formality::NotFormal;
            out.route = "nonzero a-Massey product".into();
            out.massey = Some(r);
            return Ok(out);
        }
    }
    let mut candidates: Vec<Element> = Vec::new();
    for name in doc.doc.classes.keys() {
        let e = doc.class(name)?;
        if e.degree() >= 1 && e.degree() <= h.max_degree() && h.class_of(&e).is_ok() {
            candidates.push(e);
        }
    }
    for k in 1..=h.max_degree() {
        candidates.extend(h.reps(k).iter().cloned());
    }
    let (found, checked) = massey::scan_triples(&h, &candidates, budget)?;
    out.notes.push(format!("{checked} triple products examined"));
    if let Some(r) = found {
        out.verdict = Formality::NotFormal;
        out.route = "nonzero triple Massey product".into();
        out.massey = Some(r);
        return Ok(out);
    }
    let alg = &doc.alg;
    if (0..alg.ngens()).all(|i| alg.d_gen(i).is_zero()) {
        out.verdict = Formality::Formal;
        out.route = "zero differential".into();
        return Ok(out);
    }
    let simply_connected = opts.simply_connected.unwrap_or(doc.doc.flags.simply_connected);
    let pdim = opts.poincare_dim.or(doc.doc.flags.poincare_dim);
    if let Some(p) = pdim {
        if simply_connected && p <= 6 {
            out.verdict = Formality::Formal;
            out.route = "simply connected of dimension at most 6".into();
            return Ok(out);
        }
        let s = p.div_ceil(2).saturating_sub(1).max(2);
        match build_minimal_model(&h, s) {
            Ok(mm) => {
                let sf = s_formality_check(&mm, s)?;
                out.minimal_model = Some(mm.report());
                if sf.verdict == SFormality::Certified {
                    out.verdict = Formality::Formal;
                    out.route = format!("{s}-formal Poincare duality algebra of dimension {p}");
                } else if sf.verdict == SFormality::Refuted {
                    out.verdict = Formality::NotFormal;
                    out.route = format!("not {s}-formal");
                }
                out.s_formality = Some(sf);
            }
            Err(e) => out.notes.push(format!("minimal model unavailable: {e}")),
        }
    }
    if doc.doc.model == ModelKind::Invariant {
        out.notes.push("computed on the invariant subcomplex".into());
    }
    Ok(out)
}
