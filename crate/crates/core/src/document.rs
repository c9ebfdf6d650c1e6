//! The JSON document format: an algebra spec plus optional attachments
//! (group action, named classes, volume monomial, topological flags).

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, AlgebraSpec, Element, Expr};
use crate::cohomology::CohomologyRing;
use crate::error::{Error, Result};
use crate::symmetry::GroupAction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionSpec {
    pub order: u32,
    #[serde(default)]
    pub images: BTreeMap<String, Expr>,
}

/// Which complex models the space: the algebra itself or its invariants.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Full,
    Invariant,
}

impl ModelKind {
    fn is_full(&self) -> bool {
        *self == ModelKind::Full
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocFlags {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poincare_dim: Option<usize>,
    #[serde(default)]
    pub simply_connected: bool,
}

impl DocFlags {
    fn is_default(&self) -> bool {
        *self == DocFlags::default()
    }
}

/// An a-Massey product worth scanning, by class names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AMasseyHint {
    pub a: String,
    pub bs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub algebra: AlgebraSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionSpec>,
    #[serde(default, skip_serializing_if = "ModelKind::is_full")]
    pub model: ModelKind,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub classes: BTreeMap<String, Expr>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub amassey: Vec<AMasseyHint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "DocFlags::is_default")]
    pub flags: DocFlags,
}

impl Document {
    pub fn new(algebra: AlgebraSpec) -> Self {
        Document {
            name: None,
            algebra,
            action: None,
            model: ModelKind::Full,
            classes: BTreeMap::new(),
            amassey: Vec::new(),
            volume: None,
            flags: DocFlags::default(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Document(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }
}

/// A validated document.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub doc: Document,
    pub alg: Arc<Algebra>,
    pub action: Option<GroupAction>,
}

impl Loaded {
    pub fn new(doc: Document) -> Result<Self> {
        let alg = Algebra::new(&doc.algebra)?;
        let action = match &doc.action {
            None => None,
            Some(a) => Some(GroupAction::from_exprs(alg.clone(), a.order, &a.images)?),
        };
        if doc.model == ModelKind::Invariant && action.is_none() {
            return Err(Error::Document("invariant model without an action".into()));
        }
        let loaded = Loaded { doc, alg, action };
        for name in loaded.doc.classes.keys() {
            loaded.class(name)?;
        }
        loaded.volume()?;
        Ok(loaded)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::new(Document::from_json(s)?)
    }

    pub fn with_cap(mut doc: Document, cap: Option<usize>) -> Result<Self> {
        if cap.is_some() {
            doc.algebra.degree_cap = cap;
        }
        Self::new(doc)
    }

    pub fn volume(&self) -> Result<Option<Element>> {
        match &self.doc.volume {
            None => Ok(None),
            Some(names) => {
                let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                self.alg.monomial(&refs).map(Some)
            }
        }
    }

    /// A named class, a generator name, or an inline JSON expression.
    pub fn class(&self, selector: &str) -> Result<Element> {
        let s = selector.trim();
        if s.starts_with('[') {
            let expr: Expr = serde_json::from_str(s).map_err(|e| Error::Document(e.to_string()))?;
            return self.alg.parse_expr(&expr, None);
        }
        match self.doc.classes.get(s) {
            Some(e) => self.alg.parse_expr(e, None),
            None => self.alg.gen(s),
        }
    }

    /// Cohomology of the whole algebra, ignoring any action.
    pub fn parent_ring(&self, max: Option<usize>) -> Result<CohomologyRing> {
        let max = max.unwrap_or(self.alg.cap().saturating_sub(1));
        self.attach_volume(CohomologyRing::compute(&self.alg, max)?)
    }

    /// Cohomology of the invariant subcomplex.
    pub fn invariant_ring(&self, max: Option<usize>) -> Result<CohomologyRing> {
        let act = self
            .action
            .as_ref()
            .ok_or_else(|| Error::Document("no action declared".into()))?;
        let max = max.unwrap_or(self.alg.cap().saturating_sub(1));
        self.attach_volume(act.invariant_cohomology(max)?)
    }

    /// The ring that models the space the document describes.
    pub fn ring(&self, max: Option<usize>) -> Result<CohomologyRing> {
        match self.doc.model {
            ModelKind::Full => self.parent_ring(max),
            ModelKind::Invariant => self.invariant_ring(max),
        }
    }

    fn attach_volume(&self, h: CohomologyRing) -> Result<CohomologyRing> {
        Ok(match self.volume()? {
            Some(v) if v.degree() <= h.max_degree() => h.with_volume(v),
            _ => h,
        })
    }

    pub fn label(&self) -> &str {
        self.doc.name.as_deref().unwrap_or("<anonymous>")
    }
}
