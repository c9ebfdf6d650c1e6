//! Cyclic group actions by multiplicative chain automorphisms, and the
//! invariant subcomplex cut out by the averaging projector.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::{Algebra, AlgebraMap, Element, Expr};
use crate::cohomology::{CohomologyRing, Subcomplex};
use crate::error::{Error, Result};
use crate::linalg::{self, Echelon};
use crate::scalar::CycScalar;

/// Action of the generator of Z/m. Validated on construction.
#[derive(Clone, Debug)]
pub struct GroupAction {
    order: u32,
    map: AlgebraMap,
}

/// Periods longer than this are reported as unknown.
const PERIOD_SEARCH: u32 = 1024;

impl GroupAction {
    pub fn new(alg: Arc<Algebra>, order: u32, images: Vec<Element>) -> Result<Self> {
        let map = AlgebraMap::new(alg.clone(), alg, images, false)?;
        Self::validate(order, map)
    }

    /// Generators missing from `images` are fixed.
    pub fn from_exprs(alg: Arc<Algebra>, order: u32, images: &BTreeMap<String, Expr>) -> Result<Self> {
        for name in images.keys() {
            alg.index_of(name)?;
        }
        let ims = (0..alg.ngens())
            .map(|i| match images.get(alg.gen_name(i)) {
                Some(e) => alg.parse_expr(e, Some(alg.gen_degree(i))),
                None => Ok(alg.gen_at(i)),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(alg, order, ims)
    }

    /// Each generator is multiplied by the given scalar.
    pub fn diagonal(alg: Arc<Algebra>, order: u32, weights: &[CycScalar]) -> Result<Self> {
        let ims = weights
            .iter()
            .enumerate()
            .map(|(i, w)| alg.gen_at(i).scale(w))
            .collect();
        Self::new(alg, order, ims)
    }

    fn validate(order: u32, map: AlgebraMap) -> Result<Self> {
        let alg = map.source().clone();
        if order == 0 {
            return Err(Error::OrderMismatch {
                expected: 0,
                actual: None,
            });
        }
        if let Some((g, w)) = map.chain_map_defect()? {
            return Err(Error::NotChainMap {
                generator: alg.gen_name(g).to_string(),
                witness: alg.fmt(&w),
            });
        }
        let identity = AlgebraMap::identity(alg.clone());
        let mut power = map.clone();
        let mut period = None;
        for p in 1..=PERIOD_SEARCH.max(order) {
            if power.images() == identity.images() {
                period = Some(p);
                break;
            }
            power = map.compose(&power)?;
        }
        if period != Some(order) {
            return Err(Error::OrderMismatch {
                expected: order,
                actual: period,
            });
        }
        for i in 0..alg.ngens() {
            if let Some(p) = alg.gen_partner(i) {
                let lhs = &map.images()[p];
                let rhs = alg.conj(&map.images()[i]).map_err(|_| Error::ConjugationBroken {
                    generator: alg.gen_name(i).to_string(),
                })?;
                if *lhs != rhs {
                    return Err(Error::ConjugationBroken {
                        generator: alg.gen_name(p).to_string(),
                    });
                }
            }
        }
        Ok(GroupAction { order, map })
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        self.map.source()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn map(&self) -> &AlgebraMap {
        &self.map
    }

    pub fn apply(&self, e: &Element) -> Result<Element> {
        self.map.apply(e)
    }

    pub fn apply_pow(&self, e: &Element, j: u32) -> Result<Element> {
        let mut x = e.clone();
        for _ in 0..j % self.order {
            x = self.apply(&x)?;
        }
        Ok(x)
    }

    /// (1/m) Σ_j ρ^j(e).
    pub fn average(&self, e: &Element) -> Result<Element> {
        let mut acc = e.clone();
        let mut x = e.clone();
        for _ in 1..self.order {
            x = self.apply(&x)?;
            acc = acc.plus(&x);
        }
        Ok(acc.scale(&CycScalar::from_frac(1, self.order as i64)))
    }

    /// Matrix of ρ^j on the degree-k slice; row i is the image of basis_i.
    pub fn power_matrix(&self, k: usize, j: u32) -> Result<Vec<Vec<CycScalar>>> {
        let alg = self.algebra();
        (0..alg.dim(k))
            .map(|i| Ok(coords_or_zero(alg, k, &self.apply_pow(&alg.basis_element(k, i), j)?)))
            .collect()
    }

    /// Matrix of the averaging projector on the degree-k slice.
    pub fn projector(&self, k: usize) -> Result<Vec<Vec<CycScalar>>> {
        let alg = self.algebra();
        (0..alg.dim(k))
            .map(|i| Ok(coords_or_zero(alg, k, &self.average(&alg.basis_element(k, i))?)))
            .collect()
    }

    /// Fixed subspace of every slice up to the cap.
    pub fn invariant_subcomplex(&self) -> Result<Arc<Subcomplex>> {
        let alg = self.algebra();
        let spaces = (0..=alg.cap())
            .map(|k| Ok(Echelon::from_rows(alg.dim(k), self.projector(k)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Arc::new(Subcomplex::new(alg.clone(), spaces)))
    }

    /// Cohomology of the invariant subcomplex; integrals carry the factor m.
    pub fn invariant_cohomology(&self, max_degree: usize) -> Result<CohomologyRing> {
        Ok(CohomologyRing::of_subcomplex(self.invariant_subcomplex()?, max_degree)?
            .with_group_order(self.order))
    }

    /// Matrix of ρ* on H^k of the parent ring; row i is the image of rep_i.
    pub fn on_cohomology(&self, h: &CohomologyRing, k: usize) -> Result<Vec<Vec<CycScalar>>> {
        h.reps(k)
            .iter()
            .map(|r| Ok(h.class_of(&self.apply(r)?)?.coords))
            .collect()
    }

    /// Dimension of the ρ*-fixed part of H^k of the parent ring.
    pub fn fixed_cohomology_dim(&self, h: &CohomologyRing, k: usize) -> Result<usize> {
        let m = self.on_cohomology(h, k)?;
        let n = m.len();
        let shifted: Vec<Vec<CycScalar>> = m
            .into_iter()
            .enumerate()
            .map(|(i, mut row)| {
                row[i] = &row[i] - &CycScalar::from_int(1);
                row
            })
            .collect();
        Ok(n - linalg::rank(n, &shifted))
    }
}

fn coords_or_zero(alg: &Algebra, k: usize, e: &Element) -> Vec<CycScalar> {
    if e.is_zero() {
        linalg::zero_vec(alg.dim(k))
    } else {
        alg.coords(e)
    }
}
