//! Model constructors and the named presets.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_integer::Integer;

use crate::algebra::{Algebra, AlgebraSpec, Element, Expr, GeneratorDecl, Term};
use crate::document::{DocFlags, Document};
use crate::error::{Error, Result};

/// Chevalley–Eilenberg complex: degree-1 generators with quadratic differentials.
pub fn ce_complex(
    generators: Vec<GeneratorDecl>,
    differential: BTreeMap<String, Expr>,
    zeta: u32,
) -> Result<AlgebraSpec> {
    for g in &generators {
        if g.degree != 1 {
            return Err(Error::Document(format!("{} must have degree 1", g.name)));
        }
    }
    for (g, e) in &differential {
        if e.iter().any(|t| t.monomial.len() != 2) {
            return Err(Error::Document(format!("d({g}) is not quadratic")));
        }
    }
    let mut spec = AlgebraSpec::new(generators).with_zeta(zeta);
    spec.differential = differential;
    Algebra::new(&spec)?;
    Ok(spec)
}

/// Adjoin a degree-1 generator `name` with d(name) = euler.
pub fn circle_bundle(base: &Arc<Algebra>, euler: &Element, name: &str) -> Result<AlgebraSpec> {
    if euler.algebra_id() != base.id() {
        return Err(Error::ParentMismatch);
    }
    if euler.degree() != 2 {
        return Err(Error::EulerBadDegree {
            degree: euler.degree(),
        });
    }
    let de = base.d(euler)?;
    if !de.is_zero() {
        return Err(Error::EulerNotClosed {
            witness: base.fmt(&de),
        });
    }
    let mut spec = base.spec().clone();
    spec.generators.push(GeneratorDecl::new(name, 1));
    spec.differential.insert(name.to_string(), base.to_expr(euler));
    spec.degree_cap = Some(base.cap() + 1);
    Algebra::new(&spec)?;
    Ok(spec)
}

/// Graded tensor product. Generator names must be disjoint.
pub fn tensor(a: &AlgebraSpec, b: &AlgebraSpec) -> Result<AlgebraSpec> {
    let (x, y) = (Algebra::new(a)?, Algebra::new(b)?);
    let mut spec = x.spec().clone();
    let other = y.spec();
    spec.generators.extend(other.generators.iter().cloned());
    spec.differential
        .extend(other.differential.iter().map(|(k, v)| (k.clone(), v.clone())));
    spec.relations.extend(other.relations.iter().cloned());
    spec.zeta = x.modulus().lcm(&y.modulus());
    spec.degree_cap = Some(x.cap() + y.cap() - 1);
    Algebra::new(&spec)?;
    Ok(spec)
}

/// ⟨name | name^(m+1)⟩, the cohomology of CP^m.
pub fn truncated_polynomial(name: &str, m: usize) -> AlgebraSpec {
    let power: Vec<&str> = vec![name; m + 1];
    AlgebraSpec::new(vec![GeneratorDecl::new(name, 2)])
        .with_relation(vec![Term::unit(&power)])
        .with_cap(2 * m + 1)
}

const STATIC: &[(&str, &str)] = &[
    ("HEIS6", include_str!("../presets/heis6.json")),
    ("HEIS6_Z6", include_str!("../presets/heis6_z6.json")),
    ("HEIS8", include_str!("../presets/heis8.json")),
    ("HEIS8_Z3", include_str!("../presets/heis8_z3.json")),
    ("T6", include_str!("../presets/t6.json")),
    ("T6_Z2", include_str!("../presets/t6_z2.json")),
    ("SASAKI7_S2CUBE", include_str!("../presets/sasaki7_s2cube.json")),
    ("P_OVER_T6Z2", include_str!("../presets/p_over_t6z2.json")),
    ("SPHERE2", include_str!("../presets/sphere2.json")),
];

/// Presets taking a parameter, with its name.
const PARAMETRIC: &[(&str, &str)] = &[("CPN", "m"), ("SASAKI_CPN_S2", "n"), ("SASAKI_S2N", "n")];

pub fn preset_ids() -> Vec<String> {
    STATIC
        .iter()
        .map(|(id, _)| id.to_string())
        .chain(PARAMETRIC.iter().map(|(id, p)| format!("{id}({p})")))
        .collect()
}

/// Expand a preset. Parameters may be given inline, as in `CPN(3)`, or in `params`.
pub fn preset(id: &str, params: &BTreeMap<String, usize>) -> Result<Document> {
    let (base, inline) = match id.split_once('(') {
        Some((b, rest)) => {
            let v = rest
                .strip_suffix(')')
                .and_then(|s| s.trim().parse::<usize>().ok())
                .ok_or_else(|| Error::UnknownPreset(id.to_string()))?;
            (b.trim(), Some(v))
        }
        None => (id.trim(), None),
    };
    let upper = base.to_ascii_uppercase();
    if let Some((_, src)) = STATIC.iter().find(|(k, _)| *k == upper) {
        return Document::from_json(src);
    }
    let (_, pname) = PARAMETRIC
        .iter()
        .find(|(k, _)| *k == upper)
        .ok_or_else(|| Error::UnknownPreset(id.to_string()))?;
    let p = inline
        .or_else(|| params.get(*pname).copied())
        .ok_or_else(|| Error::Document(format!("preset {upper} needs parameter {pname}")))?;
    match upper.as_str() {
        "CPN" => cpn(p),
        "SASAKI_CPN_S2" => sasaki_cpn_s2(p),
        "SASAKI_S2N" => sasaki_s2n(p),
        _ => unreachable!(),
    }
}

fn cpn(m: usize) -> Result<Document> {
    if m == 0 {
        return Err(Error::Document("CPN needs m >= 1".into()));
    }
    let mut doc = Document::new(truncated_polynomial("a", m));
    doc.name = Some(format!("CPN({m})"));
    doc.classes.insert("a".into(), vec![Term::unit(&["a"])]);
    doc.volume = Some(vec!["a".to_string(); m]);
    doc.flags = DocFlags {
        poincare_dim: Some(2 * m),
        simply_connected: true,
    };
    Ok(doc)
}

fn sphere(name: &str) -> AlgebraSpec {
    truncated_polynomial(name, 1)
}

fn bundle_over(spec: AlgebraSpec, euler: &[&str]) -> Result<AlgebraSpec> {
    let base = Algebra::new(&spec)?;
    let terms: Expr = euler.iter().map(|g| Term::unit(&[g])).collect();
    let e = base.parse_expr(&terms, Some(2))?;
    circle_bundle(&base, &e, "x")
}

fn sasaki_cpn_s2(n: usize) -> Result<Document> {
    if n < 2 {
        return Err(Error::Document("SASAKI_CPN_S2 needs n >= 2".into()));
    }
    let base = tensor(&truncated_polynomial("a1", n - 1), &sphere("a2"))?;
    let mut doc = Document::new(bundle_over(base, &["a1", "a2"])?);
    doc.name = Some(format!("SASAKI_CPN_S2({n})"));
    for g in ["a1", "a2"] {
        doc.classes.insert(g.into(), vec![Term::unit(&[g])]);
    }
    let mut vol = vec!["a1".to_string(); n - 1];
    vol.extend(["a2".to_string(), "x".to_string()]);
    doc.volume = Some(vol);
    doc.flags = DocFlags {
        poincare_dim: Some(2 * n + 1),
        simply_connected: true,
    };
    Ok(doc)
}

fn sasaki_s2n(n: usize) -> Result<Document> {
    if n < 3 {
        return Err(Error::Document("SASAKI_S2N needs n >= 3".into()));
    }
    let names: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    let mut base = sphere(&names[0]);
    for g in &names[1..] {
        base = tensor(&base, &sphere(g))?;
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut doc = Document::new(bundle_over(base, &refs)?);
    doc.name = Some(format!("SASAKI_S2N({n})"));
    for g in &refs {
        doc.classes.insert(g.to_string(), vec![Term::unit(&[g])]);
    }
    let mut vol = names.clone();
    vol.push("x".into());
    doc.volume = Some(vol);
    doc.flags = DocFlags {
        poincare_dim: Some(2 * n + 1),
        simply_connected: true,
    };
    Ok(doc)
}
