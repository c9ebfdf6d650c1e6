//! Cohomology of an algebra, or of a subcomplex of it, in a range of degrees.
//!
//! For each degree k the images d(s) of the cochain basis are fed into an
//! echelon form of degree k+1 with companions. Inputs that reduce to zero give
//! the cocycles Z^k; the echelon itself is the boundary space B^{k+1} and solves
//! d(w) = z. Representatives are the reduced echelon form of Z^k modulo B^k, so
//! they vanish on the pivot coordinates of B^k.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{Algebra, Element, Expr};
use crate::error::{Error, Result};
use crate::linalg::{self, Echelon, Field};
use crate::scalar::CycScalar;

/// A subspace of each degree slice, closed under d (and usually under products).
#[derive(Debug)]
pub struct Subcomplex {
    alg: Arc<Algebra>,
    spaces: Vec<Echelon<CycScalar>>,
}

impl Subcomplex {
    /// `spaces[k]` spans the degree-k part; degrees past the end are zero.
    pub fn new(alg: Arc<Algebra>, spaces: Vec<Echelon<CycScalar>>) -> Self {
        Subcomplex { alg, spaces }
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.alg
    }

    pub fn dim(&self, k: usize) -> usize {
        self.spaces.get(k).map_or(0, Echelon::rank)
    }

    pub fn basis(&self, k: usize) -> Vec<Element> {
        match self.spaces.get(k) {
            None => Vec::new(),
            Some(e) => e.rows().iter().map(|r| self.alg.from_coords(k, r)).collect(),
        }
    }

    pub fn contains(&self, e: &Element) -> bool {
        if e.is_zero() {
            return true;
        }
        match self.spaces.get(e.degree()) {
            None => false,
            Some(s) => s.contains(&self.alg.coords(e)),
        }
    }

    fn rows(&self, k: usize) -> &[Vec<CycScalar>] {
        self.spaces.get(k).map_or(&[], |e| e.rows())
    }
}

/// A cohomology class as coordinates in the representative basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Class {
    pub degree: usize,
    pub coords: Vec<CycScalar>,
}

impl Class {
    pub fn is_zero(&self) -> bool {
        linalg::is_zero_vec(&self.coords)
    }

    pub fn scale(&self, c: &CycScalar) -> Class {
        Class {
            degree: self.degree,
            coords: self.coords.iter().map(|x| x * c).collect(),
        }
    }

    pub fn plus(&self, other: &Class) -> Class {
        assert_eq!(self.degree, other.degree);
        Class {
            degree: self.degree,
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        }
    }
}

#[derive(Debug)]
struct DegreeData {
    /// Cochain basis in ambient coordinates.
    space: Vec<Vec<CycScalar>>,
    /// B^k with companions in coordinates of the degree k−1 cochain basis.
    boundaries: Echelon<CycScalar>,
    reps: Echelon<CycScalar>,
    rep_elems: Vec<Element>,
}

#[derive(Debug)]
pub struct CohomologyRing {
    alg: Arc<Algebra>,
    sub: Option<Arc<Subcomplex>>,
    max_degree: usize,
    group_order: u32,
    volume: Option<Element>,
    degrees: Vec<DegreeData>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CohomologyReport {
    pub betti: Vec<usize>,
    pub reps: BTreeMap<usize, Vec<Expr>>,
    pub pairing_ok: bool,
}

impl CohomologyRing {
    /// Cohomology of the whole algebra in degrees `0..=max_degree`.
    pub fn compute(alg: &Arc<Algebra>, max_degree: usize) -> Result<Self> {
        Self::build(alg.clone(), None, max_degree)
    }

    /// Cohomology of a subcomplex in degrees `0..=max_degree`.
    pub fn of_subcomplex(sub: Arc<Subcomplex>, max_degree: usize) -> Result<Self> {
        Self::build(sub.alg.clone(), Some(sub), max_degree)
    }

    /// Everything up to one below the degree cap.
    pub fn full(alg: &Arc<Algebra>) -> Result<Self> {
        Self::compute(alg, alg.cap().saturating_sub(1))
    }

    fn build(alg: Arc<Algebra>, sub: Option<Arc<Subcomplex>>, max_degree: usize) -> Result<Self> {
        if max_degree + 1 > alg.cap() {
            return Err(Error::CapTooLow {
                needed: max_degree + 1,
                cap: alg.cap(),
            });
        }
        let space = |k: usize| -> Vec<Vec<CycScalar>> {
            match &sub {
                Some(s) => s.rows(k).to_vec(),
                None => (0..alg.dim(k)).map(|i| linalg::unit_vec(alg.dim(k), i)).collect(),
            }
        };
        let mut spaces: Vec<Vec<Vec<CycScalar>>> = (0..=max_degree).map(space).collect();
        let mut boundaries = vec![Echelon::with_companions(alg.dim(0), 0)];
        let mut cocycles: Vec<Vec<Vec<CycScalar>>> = Vec::new();
        for k in 0..=max_degree {
            let n1 = alg.dim(k + 1);
            let dm = if sub.is_none() { Some(alg.d_matrix(k)?) } else { None };
            let mut e = Echelon::with_companions(n1, spaces[k].len());
            let mut z = Vec::new();
            for (i, s) in spaces[k].iter().enumerate() {
                let ds = match &dm {
                    Some(m) => m[i].clone(),
                    None => {
                        let d = alg.d(&alg.from_coords(k, s))?;
                        if d.is_zero() {
                            linalg::zero_vec(n1)
                        } else {
                            alg.coords(&d)
                        }
                    }
                };
                if let Some(c) = e.insert_tracked(ds, linalg::unit_vec(spaces[k].len(), i)) {
                    z.push(combine(&c, &spaces[k], alg.dim(k)));
                }
            }
            cocycles.push(z);
            boundaries.push(e);
        }
        let mut degrees = Vec::new();
        for (k, z) in cocycles.into_iter().enumerate() {
            let b = std::mem::replace(&mut boundaries[k], Echelon::new(0));
            let mut reps = Echelon::new(alg.dim(k));
            for v in z {
                reps.insert(b.reduce(&v).remainder);
            }
            let rep_elems = reps.rows().iter().map(|r| alg.from_coords(k, r)).collect();
            degrees.push(DegreeData {
                space: std::mem::take(&mut spaces[k]),
                boundaries: b,
                reps,
                rep_elems,
            });
        }
        Ok(CohomologyRing {
            alg,
            sub,
            max_degree,
            group_order: 1,
            volume: None,
            degrees,
        })
    }

    /// Declare the volume element used by [`integrate`](Self::integrate).
    pub fn with_volume(mut self, vol: Element) -> Self {
        self.volume = Some(vol);
        self
    }

    /// Order of the group when this ring comes from an invariant complex.
    pub fn with_group_order(mut self, m: u32) -> Self {
        self.group_order = m;
        self
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.alg
    }

    pub fn subcomplex(&self) -> Option<&Arc<Subcomplex>> {
        self.sub.as_ref()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn group_order(&self) -> u32 {
        self.group_order
    }

    pub fn volume(&self) -> Option<&Element> {
        self.volume.as_ref()
    }

    pub fn betti(&self, k: usize) -> usize {
        self.degrees.get(k).map_or(0, |d| d.reps.rank())
    }

    pub fn betti_numbers(&self) -> Vec<usize> {
        (0..=self.max_degree).map(|k| self.betti(k)).collect()
    }

    /// Dimension of the degree-k cochains (of the subcomplex, if any).
    pub fn cochain_dim(&self, k: usize) -> usize {
        self.degrees.get(k).map_or(0, |d| d.space.len())
    }

    pub fn reps(&self, k: usize) -> &[Element] {
        self.degrees.get(k).map_or(&[], |d| &d.rep_elems)
    }

    /// Highest degree with nonzero cohomology.
    pub fn top_degree(&self) -> usize {
        (0..=self.max_degree).rev().find(|&k| self.betti(k) > 0).unwrap_or(0)
    }

    pub fn zero_class(&self, k: usize) -> Class {
        Class {
            degree: k,
            coords: linalg::zero_vec(self.betti(k)),
        }
    }

    pub fn basis_class(&self, k: usize, i: usize) -> Class {
        Class {
            degree: k,
            coords: linalg::unit_vec(self.betti(k), i),
        }
    }

    pub fn unit(&self) -> Class {
        self.basis_class(0, 0)
    }

    /// The canonical representative of a class.
    pub fn rep_of(&self, c: &Class) -> Element {
        let mut acc = self.alg.zero(c.degree);
        for (x, r) in c.coords.iter().zip(self.reps(c.degree)) {
            if !x.is_zero() {
                acc = acc.plus(&r.scale(x));
            }
        }
        acc
    }

    fn check_element(&self, z: &Element) -> Result<()> {
        if z.algebra_id() != self.alg.id() {
            return Err(Error::ParentMismatch);
        }
        if z.is_truncated() {
            return Err(Error::Truncated);
        }
        if z.degree() > self.max_degree {
            return Err(Error::DegreeOverflow {
                degree: z.degree(),
                max: self.max_degree,
            });
        }
        if let Some(s) = &self.sub {
            if !s.contains(z) {
                return Err(Error::NotInSubcomplex);
            }
        }
        Ok(())
    }

    fn check_closed(&self, z: &Element) -> Result<()> {
        self.check_element(z)?;
        let dz = self.alg.d(z)?;
        if dz.is_zero() {
            Ok(())
        } else {
            Err(Error::NotClosed {
                witness: self.alg.fmt(&dz),
            })
        }
    }

    pub fn class_of(&self, z: &Element) -> Result<Class> {
        self.check_closed(z)?;
        let k = z.degree();
        if z.is_zero() {
            return Ok(self.zero_class(k));
        }
        let data = &self.degrees[k];
        let r = data.boundaries.reduce(&self.alg.coords(z)).remainder;
        let coords = data
            .reps
            .coordinates(&r)
            .expect("closed element reduces into the representative span");
        Ok(Class { degree: k, coords })
    }

    /// Some `w` with `d(w) = z`, chosen by the fixed pivot rule, or `None`.
    pub fn is_exact(&self, z: &Element) -> Result<Option<Element>> {
        self.check_closed(z)?;
        let k = z.degree();
        if z.is_zero() {
            return Ok(Some(self.alg.zero(k.saturating_sub(1))));
        }
        if k == 0 {
            return Ok(None);
        }
        let data = &self.degrees[k];
        match data.boundaries.solve(&self.alg.coords(z)) {
            None => Ok(None),
            Some(c) => {
                let prev = &self.degrees[k - 1].space;
                let v = combine(&c, prev, self.alg.dim(k - 1));
                Ok(Some(self.alg.from_coords(k - 1, &v)))
            }
        }
    }

    /// Basis of the closed elements of degree k (cocycles), in ambient form.
    pub fn cocycle_basis(&self, k: usize) -> Vec<Element> {
        // Cocycles are boundaries plus representatives.
        let mut out: Vec<Element> = match self.degrees.get(k) {
            None => return Vec::new(),
            Some(d) => d
                .boundaries
                .rows()
                .iter()
                .map(|r| self.alg.from_coords(k, r))
                .collect(),
        };
        out.extend(self.reps(k).iter().cloned());
        out
    }

    /// Dimension of the boundary space B^k.
    pub fn boundary_dim(&self, k: usize) -> usize {
        self.degrees.get(k).map_or(0, |d| d.boundaries.rank())
    }

    pub fn cup(&self, u: &Class, v: &Class) -> Result<Class> {
        let deg = u.degree + v.degree;
        if deg > self.max_degree {
            return Err(Error::DegreeOverflow {
                degree: deg,
                max: self.max_degree,
            });
        }
        let p = self.alg.mul(&self.rep_of(u), &self.rep_of(v))?;
        self.class_of(&p)
    }

    /// The multiple of the volume class that `c` is, times the group order.
    pub fn integrate(&self, c: &Class) -> Result<CycScalar> {
        let vol = self.volume.as_ref().ok_or(Error::NoTopDeclared)?;
        if c.degree != vol.degree() {
            return Err(Error::DegreeMismatch {
                expected: vol.degree(),
            });
        }
        let v = self.class_of(vol)?;
        let j = v.coords.iter().position(|x| !x.is_zero()).ok_or(Error::NoTopDeclared)?;
        let lambda = &c.coords[j] / &v.coords[j];
        if v.scale(&lambda) != *c {
            return Err(Error::Document("class is not a multiple of the volume class".into()));
        }
        Ok(&lambda * &CycScalar::from_int(self.group_order as i64))
    }

    /// Integral of a closed top-degree element.
    pub fn integrate_element(&self, z: &Element) -> Result<CycScalar> {
        self.integrate(&self.class_of(z)?)
    }

    /// Square, non-degenerate H^k × H^{n−k} → H^n for every k, with b_n = 1.
    pub fn pairing_ok(&self, n: usize) -> bool {
        if n > self.max_degree || self.betti(n) != 1 {
            return false;
        }
        (0..=n).all(|k| {
            let (a, b) = (self.betti(k), self.betti(n - k));
            if a != b {
                return false;
            }
            let rows: Vec<Vec<CycScalar>> = (0..a)
                .map(|i| {
                    (0..b)
                        .map(|j| {
                            self.cup(&self.basis_class(k, i), &self.basis_class(n - k, j))
                                .map(|c| c.coords[0].clone())
                                .unwrap_or_else(|_| CycScalar::zero())
                        })
                        .collect()
                })
                .collect();
            linalg::rank(b, &rows) == a
        })
    }

    pub fn report(&self) -> CohomologyReport {
        let reps = (0..=self.max_degree)
            .map(|k| (k, self.reps(k).iter().map(|e| self.alg.to_expr(e)).collect()))
            .collect();
        CohomologyReport {
            betti: self.betti_numbers(),
            reps,
            pairing_ok: self.pairing_ok(self.top_degree()),
        }
    }
}

/// Σ c_i · basis_i as an ambient coordinate vector.
fn combine(c: &[CycScalar], basis: &[Vec<CycScalar>], n: usize) -> Vec<CycScalar> {
    let mut v = linalg::zero_vec(n);
    for (x, b) in c.iter().zip(basis) {
        if !x.is_zero() {
            linalg::axpy_neg(&mut v, &x.negated(), b);
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgebraSpec, GeneratorDecl, Term};

    fn torus(n: usize) -> Arc<Algebra> {
        let gens = (1..=n).map(|i| GeneratorDecl::new(&format!("x{i}"), 1)).collect();
        Algebra::new(&AlgebraSpec::new(gens)).unwrap()
    }

    #[test]
    fn torus_betti_are_binomials() {
        let t = torus(4);
        let h = CohomologyRing::full(&t).unwrap();
        assert_eq!(h.betti_numbers(), vec![1, 4, 6, 4, 1]);
        assert!(h.pairing_ok(4));
    }

    #[test]
    fn exact_elements_have_zero_class() {
        let spec = AlgebraSpec::new(vec![
            GeneratorDecl::new("x", 1),
            GeneratorDecl::new("y", 1),
            GeneratorDecl::new("z", 1),
        ])
        .with_d("z", vec![Term::unit(&["x", "y"])]);
        let a = Algebra::new(&spec).unwrap();
        let h = CohomologyRing::full(&a).unwrap();
        assert_eq!(h.betti_numbers(), vec![1, 2, 2, 1]);
        let xy = a.monomial(&["x", "y"]).unwrap();
        assert!(h.class_of(&xy).unwrap().is_zero());
        let w = h.is_exact(&xy).unwrap().unwrap();
        assert_eq!(a.d(&w).unwrap(), xy);
        assert_eq!(w, a.gen("z").unwrap());
        assert!(h.is_exact(&a.monomial(&["x", "z"]).unwrap()).unwrap().is_none());
        assert_eq!(h.class_of(&a.gen("z").unwrap()).unwrap_err().code(), "NOT_CLOSED");
        let zero = a.zero(2);
        assert!(h.is_exact(&zero).unwrap().unwrap().is_zero());
    }

    #[test]
    fn cap_too_low() {
        let spec = AlgebraSpec::new(vec![GeneratorDecl::new("a", 2)]).with_cap(4);
        let a = Algebra::new(&spec).unwrap();
        assert!(matches!(
            CohomologyRing::compute(&a, 4),
            Err(Error::CapTooLow { needed: 5, cap: 4 })
        ));
    }
}
