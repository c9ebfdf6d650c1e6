//! Exact dense linear algebra over a field.
//!
//! Everything here is built around [`Echelon`], an incrementally maintained
//! reduced row echelon form. Rows are inserted one at a time; each row may carry
//! a *companion* vector that records how it was produced from the inserted
//! inputs, which is how kernels, primitives and solutions are recovered without
//! a second elimination pass.
//!
//! Pivot policy: a row's pivot is its leftmost nonzero column, and inputs are
//! consumed in insertion order. Solutions built from companions therefore use
//! the earliest inserted inputs that are linearly independent.

use std::fmt::Debug;

/// Minimal exact field interface used by the elimination routines.
pub trait Field: Clone + PartialEq + Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, rhs: &Self) -> Self;
    fn minus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    fn negated(&self) -> Self;
    /// Multiplicative inverse. Panics on zero.
    fn inverse(&self) -> Self;
}

impl Field for num_rational::BigRational {
    fn zero() -> Self {
        num_traits::Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn is_zero(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn negated(&self) -> Self {
        -self
    }
    fn inverse(&self) -> Self {
        assert!(!Field::is_zero(self), "inverse of zero");
        num_traits::Inv::inv(self.clone())
    }
}

/// `dst -= factor * src`, skipping zero entries of `src`.
pub fn axpy_neg<F: Field>(dst: &mut [F], factor: &F, src: &[F]) {
    if factor.is_zero() {
        return;
    }
    for (d, s) in dst.iter_mut().zip(src) {
        if !s.is_zero() {
            *d = d.minus(&factor.times(s));
        }
    }
}

pub fn scale<F: Field>(v: &mut [F], factor: &F) {
    for x in v.iter_mut() {
        if !x.is_zero() {
            *x = x.times(factor);
        }
    }
}

pub fn is_zero_vec<F: Field>(v: &[F]) -> bool {
    v.iter().all(Field::is_zero)
}

pub fn zero_vec<F: Field>(n: usize) -> Vec<F> {
    vec![F::zero(); n]
}

pub fn unit_vec<F: Field>(n: usize, i: usize) -> Vec<F> {
    let mut v = zero_vec(n);
    v[i] = F::one();
    v
}

/// Incrementally maintained reduced row echelon form.
///
/// Rows are kept sorted by pivot column, every pivot entry is one, and every
/// pivot column is zero in all other rows.
#[derive(Clone, Debug)]
pub struct Echelon<F> {
    ncols: usize,
    comp_width: usize,
    rows: Vec<Vec<F>>,
    comps: Vec<Vec<F>>,
    pivots: Vec<usize>,
}

/// Result of reducing a vector against an [`Echelon`].
#[derive(Clone, Debug)]
pub struct Reduction<F> {
    /// Coefficient of each echelon row that was subtracted.
    pub coeffs: Vec<F>,
    /// What is left; zero iff the input lies in the row space.
    pub remainder: Vec<F>,
}

impl<F: Field> Echelon<F> {
    pub fn new(ncols: usize) -> Self {
        Self::with_companions(ncols, 0)
    }

    pub fn with_companions(ncols: usize, comp_width: usize) -> Self {
        Echelon {
            ncols,
            comp_width,
            rows: Vec::new(),
            comps: Vec::new(),
            pivots: Vec::new(),
        }
    }

    /// Row-reduce a list of rows.
    pub fn from_rows<I: IntoIterator<Item = Vec<F>>>(ncols: usize, rows: I) -> Self {
        let mut e = Self::new(ncols);
        for r in rows {
            e.insert(r);
        }
        e
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<F>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn companions(&self) -> &[Vec<F>] {
        &self.comps
    }

    /// Insert a row without companion. Returns true if the rank grew.
    pub fn insert(&mut self, row: Vec<F>) -> bool {
        let comp = zero_vec(self.comp_width);
        self.insert_tracked(row, comp).is_none()
    }

    /// Insert a row together with its companion vector.
    ///
    /// Returns `None` if the row was independent (rank grew). Otherwise the
    /// row reduced to zero and the reduced companion is returned: it records a
    /// linear relation among the inserted inputs.
    pub fn insert_tracked(&mut self, mut row: Vec<F>, mut comp: Vec<F>) -> Option<Vec<F>> {
        assert_eq!(row.len(), self.ncols, "row width mismatch");
        assert_eq!(comp.len(), self.comp_width, "companion width mismatch");
        for (k, &p) in self.pivots.iter().enumerate() {
            if !row[p].is_zero() {
                let f = row[p].clone();
                axpy_neg(&mut row, &f, &self.rows[k]);
                axpy_neg(&mut comp, &f, &self.comps[k]);
            }
        }
        let pivot = match row.iter().position(|x| !x.is_zero()) {
            Some(p) => p,
            None => return Some(comp),
        };
        let inv = row[pivot].inverse();
        scale(&mut row, &inv);
        scale(&mut comp, &inv);
        for k in 0..self.rows.len() {
            if !self.rows[k][pivot].is_zero() {
                let f = self.rows[k][pivot].clone();
                let (r, c) = (&row, &comp);
                axpy_neg(&mut self.rows[k], &f, r);
                axpy_neg(&mut self.comps[k], &f, c);
            }
        }
        let at = self.pivots.partition_point(|&p| p < pivot);
        self.pivots.insert(at, pivot);
        self.rows.insert(at, row);
        self.comps.insert(at, comp);
        None
    }

    pub fn reduce(&self, v: &[F]) -> Reduction<F> {
        assert_eq!(v.len(), self.ncols, "vector width mismatch");
        let mut rem = v.to_vec();
        let mut coeffs = Vec::with_capacity(self.rows.len());
        for (k, &p) in self.pivots.iter().enumerate() {
            let f = rem[p].clone();
            if !f.is_zero() {
                axpy_neg(&mut rem, &f, &self.rows[k]);
            }
            coeffs.push(f);
        }
        Reduction {
            coeffs,
            remainder: rem,
        }
    }

    pub fn contains(&self, v: &[F]) -> bool {
        is_zero_vec(&self.reduce(v).remainder)
    }

    /// If `v` is in the row space, the combination of companions producing it.
    pub fn solve(&self, v: &[F]) -> Option<Vec<F>> {
        let red = self.reduce(v);
        if !is_zero_vec(&red.remainder) {
            return None;
        }
        let mut out = zero_vec(self.comp_width);
        for (c, comp) in red.coeffs.iter().zip(&self.comps) {
            axpy_neg(&mut out, &c.negated(), comp);
        }
        Some(out)
    }

    /// Coordinates of `v` in terms of the echelon rows, if it lies in their span.
    pub fn coordinates(&self, v: &[F]) -> Option<Vec<F>> {
        let red = self.reduce(v);
        is_zero_vec(&red.remainder).then_some(red.coeffs)
    }
}

/// Rank of a list of rows.
pub fn rank<F: Field>(ncols: usize, rows: &[Vec<F>]) -> usize {
    Echelon::from_rows(ncols, rows.iter().cloned()).rank()
}

/// Basis of `{ c : sum_i c_i rows[i] = 0 }`, in the order the relations are
/// discovered, then row-reduced for a canonical form.
pub fn left_kernel<F: Field>(ncols: usize, rows: &[Vec<F>]) -> Vec<Vec<F>> {
    let n = rows.len();
    let mut e = Echelon::with_companions(ncols, n);
    let mut rel = Echelon::new(n);
    for (i, r) in rows.iter().enumerate() {
        if let Some(c) = e.insert_tracked(r.clone(), unit_vec(n, i)) {
            rel.insert(c);
        }
    }
    rel.rows().to_vec()
}

/// Basis of `{ x : A x = 0 }` where `A` is given by its rows.
pub fn kernel<F: Field>(ncols: usize, rows: &[Vec<F>]) -> Vec<Vec<F>> {
    left_kernel(rows.len(), &transpose(ncols, rows))
}

pub fn transpose<F: Field>(ncols: usize, rows: &[Vec<F>]) -> Vec<Vec<F>> {
    (0..ncols)
        .map(|j| rows.iter().map(|r| r[j].clone()).collect())
        .collect()
}

/// Product of matrices given as rows: `(m x k) * (k x n)`.
pub fn mat_mul<F: Field>(a: &[Vec<F>], b: &[Vec<F>], n: usize) -> Vec<Vec<F>> {
    a.iter()
        .map(|row| {
            let mut out = zero_vec(n);
            for (x, brow) in row.iter().zip(b) {
                if !x.is_zero() {
                    axpy_neg(&mut out, &x.negated(), brow);
                }
            }
            out
        })
        .collect()
}

/// Solve the square system `M y = rhs` (rows of `M` given). `None` if singular.
pub fn solve_square<F: Field>(m: &[Vec<F>], rhs: &[F]) -> Option<Vec<F>> {
    let n = m.len();
    // Column j of M is inserted as a row with companion e_j; a solution is the
    // companion combination that produces rhs.
    let cols = transpose(n, m);
    let mut e = Echelon::with_companions(n, n);
    for (j, c) in cols.into_iter().enumerate() {
        if e.insert_tracked(c, unit_vec(n, j)).is_some() {
            return None;
        }
    }
    e.solve(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn qv(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn rref_is_canonical() {
        let a = Echelon::from_rows(3, vec![qv(&[2, 4, 6]), qv(&[1, 1, 1]), qv(&[3, 5, 7])]);
        let b = Echelon::from_rows(3, vec![qv(&[0, 1, 2]), qv(&[1, 0, -1])]);
        assert_eq!(a.rank(), 2);
        assert_eq!(a.rows(), b.rows());
        assert_eq!(a.pivots(), &[0, 1]);
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let rows = vec![qv(&[1, 2, 3, 4]), qv(&[2, 4, 6, 8]), qv(&[0, 1, 1, 0])];
        let k = kernel(4, &rows);
        assert_eq!(k.len(), 2);
        for v in &k {
            for r in &rows {
                let dot = r
                    .iter()
                    .zip(v)
                    .fold(q(0), |acc, (a, b)| acc + a * b);
                assert!(Field::is_zero(&dot));
            }
        }
    }

    #[test]
    fn solve_uses_earliest_inputs() {
        // inputs: e0 -> (1,0), e1 -> (1,0), e2 -> (0,1)
        let mut e = Echelon::with_companions(2, 3);
        assert!(e.insert_tracked(qv(&[1, 0]), unit_vec(3, 0)).is_none());
        let rel = e.insert_tracked(qv(&[1, 0]), unit_vec(3, 1)).unwrap();
        assert_eq!(rel, qv(&[-1, 1, 0]));
        assert!(e.insert_tracked(qv(&[0, 1]), unit_vec(3, 2)).is_none());
        assert_eq!(e.solve(&qv(&[3, 2])).unwrap(), qv(&[3, 0, 2]));
        assert!(e.solve(&qv(&[0, 0])).unwrap().iter().all(Field::is_zero));
    }

    #[test]
    fn square_solve_and_singular() {
        let m = vec![qv(&[2, 1]), qv(&[1, 1])];
        let y = solve_square(&m, &qv(&[3, 2])).unwrap();
        assert_eq!(y, qv(&[1, 1]));
        assert!(solve_square(&[qv(&[1, 2]), qv(&[2, 4])], &qv(&[1, 1])).is_none());
    }
}
