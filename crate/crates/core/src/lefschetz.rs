//! Hard Lefschetz checks on cohomology rings.

use serde::Serialize;

use crate::algebra::{Element, Expr};
use crate::cohomology::{Class, CohomologyRing};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::CycScalar;

#[derive(Clone, Debug, Serialize)]
pub struct DegreeCheck {
    pub k: usize,
    pub source_dim: usize,
    pub target_dim: usize,
    pub rank: usize,
    pub iso: bool,
    /// Kernel of L^{n−k} in class coordinates of H^k.
    pub kernel: Vec<Vec<CycScalar>>,
    pub kernel_elements: Vec<Expr>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LefschetzReport {
    pub omega: Expr,
    pub half_dim: usize,
    pub per_degree: Vec<DegreeCheck>,
    pub overall: bool,
}

impl LefschetzReport {
    pub fn degree(&self, k: usize) -> Option<&DegreeCheck> {
        self.per_degree.iter().find(|d| d.k == k)
    }
}

fn check_top(h: &CohomologyRing, n: usize) -> Result<()> {
    if 2 * n > h.max_degree() || h.top_degree() != 2 * n {
        return Err(Error::NoTop { top: 2 * n });
    }
    Ok(())
}

/// Rows: images of the H^k basis under each multiplier, concatenated.
fn stacked(h: &CohomologyRing, k: usize, multipliers: &[Element]) -> Result<Vec<Vec<CycScalar>>> {
    let alg = h.algebra();
    h.reps(k)
        .iter()
        .map(|r| {
            let mut row = Vec::new();
            for m in multipliers {
                row.extend(h.class_of(&alg.mul(r, m)?)?.coords);
            }
            Ok(row)
        })
        .collect()
}

fn elements(h: &CohomologyRing, k: usize, vs: &[Vec<CycScalar>]) -> Vec<Expr> {
    vs.iter()
        .map(|v| {
            h.algebra().to_expr(&h.rep_of(&Class {
                degree: k,
                coords: v.clone(),
            }))
        })
        .collect()
}

/// Ranks of L_ω^{n−k}: H^k → H^{2n−k} for k = 0..=n.
pub fn lefschetz_test(h: &CohomologyRing, omega: &Element, n: usize) -> Result<LefschetzReport> {
    if omega.degree() != 2 {
        return Err(Error::BadOmegaDegree {
            degree: omega.degree(),
        });
    }
    check_top(h, n)?;
    h.class_of(omega)?;
    let alg = h.algebra();
    let mut per_degree = Vec::new();
    for k in 0..=n {
        let power = alg.pow(omega, n - k)?;
        let target_dim = h.betti(2 * n - k);
        let rows = stacked(h, k, std::slice::from_ref(&power))?;
        let rank = linalg::rank(target_dim, &rows);
        let source_dim = rows.len();
        let kernel = linalg::left_kernel(target_dim, &rows);
        per_degree.push(DegreeCheck {
            k,
            source_dim,
            target_dim,
            rank,
            iso: source_dim == target_dim && rank == source_dim,
            kernel_elements: elements(h, k, &kernel),
            kernel,
        });
    }
    Ok(LefschetzReport {
        omega: alg.to_expr(omega),
        half_dim: n,
        overall: per_degree.iter().all(|d| d.iso),
        per_degree,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct UniversalReport {
    pub k: usize,
    pub half_dim: usize,
    /// Classes of H^k killed by every (n−k)-fold product of degree-2 classes.
    pub witnesses: Vec<Vec<CycScalar>>,
    pub witness_elements: Vec<Expr>,
}

/// Classes in H^k annihilated by all products of n−k degree-2 classes, where
/// 2n is the top degree. A nonzero witness defeats hard Lefschetz for every ω.
pub fn universal_lefschetz_obstruction(h: &CohomologyRing, k: usize) -> Result<UniversalReport> {
    let top = h.top_degree();
    if top % 2 != 0 || k > top / 2 {
        return Err(Error::NoTop { top });
    }
    let n = top / 2;
    check_top(h, n)?;
    let alg = h.algebra();
    let h2 = h.reps(2).to_vec();
    // All monomials of length n−k in the H² basis, as multisets.
    let mut products = vec![(0usize, alg.one())];
    for _ in 0..n - k {
        let mut next = Vec::new();
        for (start, p) in &products {
            for (j, b) in h2.iter().enumerate().skip(*start) {
                next.push((j, alg.mul(p, b)?));
            }
        }
        products = next;
    }
    let multipliers: Vec<Element> = products.into_iter().map(|(_, p)| p).collect();
    let width = multipliers.len() * h.betti(2 * n - k);
    let rows = stacked(h, k, &multipliers)?;
    let witnesses = linalg::left_kernel(width, &rows);
    Ok(UniversalReport {
        k,
        half_dim: n,
        witness_elements: elements(h, k, &witnesses),
        witnesses,
    })
}
