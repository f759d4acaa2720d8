//! Exact linear algebra over `ℚ`: dense matrices, row reduction and
//! subspaces kept in a canonical echelon form.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::SpectralError;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Dense `rows × cols` rational matrix, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QMatrix{}x{}", self.rows, self.cols)?;
        f.debug_list().entries((0..self.rows).map(|i| self.row(i).iter().map(|x| x.to_string()).collect::<Vec<_>>())).finish()
    }
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Q::one();
        }
        m
    }

    /// Builds a matrix from rows; every row must have length `cols`.
    pub fn from_rows(rows: Vec<Vec<Q>>, cols: usize) -> Result<Self, SpectralError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(SpectralError::Shape(format!("row {i} has length {}, expected {cols}", row.len())));
            }
            data.extend(row);
        }
        Ok(QMatrix { rows: n, cols, data })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        QMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect(), cols)
            .expect("rectangular integer matrix")
    }

    /// Matrix whose columns are the given vectors of length `dim`.
    pub fn from_columns(columns: &[Vec<Q>], dim: usize) -> Self {
        let mut m = QMatrix::zeros(dim, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Q] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vectors(&self) -> Vec<Vec<Q>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<Q> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> QMatrix {
        let mut t = QMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, o: &QMatrix) -> Result<QMatrix, SpectralError> {
        if self.cols != o.rows {
            return Err(SpectralError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let mut out = QMatrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    if !o[(k, j)].is_zero() {
                        out[(i, j)] += a * &o[(k, j)];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(v.len(), self.cols, "vector length does not match matrix");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).filter(|(a, _)| !a.is_zero()).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, s: &Q) -> QMatrix {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.cols {
                        let v = &m[(r, j)] * &f;
                        m[(i, j)] -= v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : self · x = 0}`.
    pub fn kernel(&self) -> Vec<Vec<Q>> {
        let (m, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Q::zero(); self.cols];
                v[f] = Q::one();
                for (r, &p) in pivots.iter().enumerate() {
                    v[p] = -m[(r, f)].clone();
                }
                v
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Q;
    fn index(&self, (i, j): (usize, usize)) -> &Q {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Q {
        &mut self.data[i * self.cols + j]
    }
}

/// A subspace of `ℚⁿ`, stored as the nonzero rows of the reduced echelon
/// form of any spanning set. The form is unique, so `==` is subspace
/// equality.
#[derive(Clone, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: QMatrix,
    pivots: Vec<usize>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(dim {} in Q^{}) {:?}", self.dim(), self.ambient, self.basis)
    }
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: QMatrix::zeros(0, ambient), pivots: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace { ambient, basis: QMatrix::identity(ambient), pivots: (0..ambient).collect() }
    }

    pub fn span(ambient: usize, vectors: &[Vec<Q>]) -> Result<Self, SpectralError> {
        let m = QMatrix::from_rows(vectors.to_vec(), ambient)?;
        Ok(Subspace::from_rows(m))
    }

    /// Coordinate subspace spanned by the unit vectors with the given indices.
    pub fn coordinate(ambient: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let vectors: Vec<Vec<Q>> = indices
            .into_iter()
            .map(|i| {
                let mut v = vec![Q::zero(); ambient];
                v[i] = Q::one();
                v
            })
            .collect();
        Subspace::span(ambient, &vectors).expect("indices within the ambient dimension")
    }

    fn from_rows(m: QMatrix) -> Self {
        let ambient = m.cols();
        let (r, pivots) = m.rref();
        let basis = QMatrix::from_rows(r.row_vectors().into_iter().take(pivots.len()).collect(), ambient)
            .expect("rows of the reduced form");
        Subspace { ambient, basis, pivots }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_zero(&self) -> bool {
        self.pivots.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    /// Canonical basis vectors.
    pub fn basis(&self) -> Vec<Vec<Q>> {
        self.basis.row_vectors()
    }

    fn check_ambient(&self, other: &Subspace) -> Result<(), SpectralError> {
        if self.ambient == other.ambient {
            Ok(())
        } else {
            Err(SpectralError::Shape(format!("subspaces of Q^{} and Q^{}", self.ambient, other.ambient)))
        }
    }

    /// Reduces `v` against the echelon basis; the result is zero iff `v` lies
    /// in the subspace.
    pub fn reduce(&self, v: &[Q]) -> Vec<Q> {
        let mut v = v.to_vec();
        for (r, &p) in self.pivots.iter().enumerate() {
            if !v[p].is_zero() {
                let f = v[p].clone();
                for (x, b) in v.iter_mut().zip(self.basis.row(r)) {
                    if !b.is_zero() {
                        *x -= b * &f;
                    }
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        v.len() == self.ambient && self.reduce(v).iter().all(Zero::is_zero)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.ambient == other.ambient && self.basis().iter().all(|v| other.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace, SpectralError> {
        self.check_ambient(other)?;
        let mut rows = self.basis();
        rows.extend(other.basis());
        Subspace::span(self.ambient, &rows)
    }

    /// Rows spanning the annihilator `{w : w · v = 0 for all v}`.
    fn annihilator(&self) -> Vec<Vec<Q>> {
        self.basis.kernel()
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, SpectralError> {
        self.check_ambient(other)?;
        let mut rows = self.annihilator();
        rows.extend(other.annihilator());
        let constraints = QMatrix::from_rows(rows, self.ambient)?;
        Subspace::span(self.ambient, &constraints.kernel())
    }

    /// `T(self)` for `T` with `self.ambient` columns.
    pub fn image(&self, t: &QMatrix) -> Result<Subspace, SpectralError> {
        if t.cols() != self.ambient {
            return Err(SpectralError::Shape(format!(
                "map with {} columns applied to a subspace of Q^{}",
                t.cols(),
                self.ambient
            )));
        }
        let images: Vec<Vec<Q>> = self.basis().iter().map(|v| t.apply(v)).collect();
        Subspace::span(t.rows(), &images)
    }

    /// `{x : T x ∈ W}`.
    pub fn preimage(t: &QMatrix, w: &Subspace) -> Result<Subspace, SpectralError> {
        if t.rows() != w.ambient {
            return Err(SpectralError::Shape(format!(
                "map into Q^{} with target subspace in Q^{}",
                t.rows(),
                w.ambient
            )));
        }
        let ann = QMatrix::from_rows(w.annihilator(), w.ambient)?;
        Subspace::span(t.cols(), &ann.mul(t)?.kernel())
    }

    /// `dim(self / sub)`; fails unless `sub ⊆ self`.
    pub fn quotient_dim(&self, sub: &Subspace) -> Result<usize, SpectralError> {
        if !sub.is_subspace_of(self) {
            return Err(SpectralError::NotContained);
        }
        Ok(self.dim() - sub.dim())
    }

    /// Representatives of a basis of `self / sub`: canonical vectors of
    /// `self` added greedily on top of the echelon basis of `sub`.
    pub fn quotient_basis(&self, sub: &Subspace) -> Result<Vec<Vec<Q>>, SpectralError> {
        if !sub.is_subspace_of(self) {
            return Err(SpectralError::NotContained);
        }
        let mut acc = sub.clone();
        let mut reps = Vec::new();
        for v in self.basis() {
            if !acc.contains(&v) {
                acc = acc.sum(&Subspace::span(self.ambient, std::slice::from_ref(&v))?)?;
                reps.push(v);
            }
        }
        Ok(reps)
    }
}

/// Coordinates of `v` modulo `sub` with respect to quotient representatives,
/// or `None` if `v` is not in `span(reps) + sub`.
pub fn quotient_coordinates(v: &[Q], reps: &[Vec<Q>], sub: &Subspace) -> Option<Vec<Q>> {
    let n = v.len();
    // Solve Σ cᵢ repᵢ + Σ bⱼ subⱼ = v.
    let mut columns = reps.to_vec();
    columns.extend(sub.basis());
    let mut aug = QMatrix::from_columns(&columns, n);
    let mut full = QMatrix::zeros(n, columns.len() + 1);
    for i in 0..n {
        for j in 0..columns.len() {
            full[(i, j)] = std::mem::take(&mut aug[(i, j)]);
        }
        full[(i, columns.len())] = v[i].clone();
    }
    let (r, pivots) = full.rref();
    if pivots.last() == Some(&columns.len()) {
        return None;
    }
    let mut solution = vec![Q::zero(); reps.len()];
    for (row, &p) in pivots.iter().enumerate() {
        if p < reps.len() {
            solution[p] = r[(row, columns.len())].clone();
        }
    }
    Some(solution)
}
