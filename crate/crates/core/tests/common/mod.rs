//! Random test data with known answers, plus plain row-reduction helpers that
//! do not go through the library's subspace code.
#![allow(dead_code)]

use std::collections::BTreeMap;

use chernlab::spectral::{Convention, DoubleComplex, FilteredComplex, QMatrix, Subspace, Q};
use num_traits::{One, Zero};
use rand::Rng;

pub type Vector = Vec<Q>;

pub fn rat(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

/// Rank of the span of `vectors`, by plain Gaussian elimination.
pub fn rank(vectors: &[Vector]) -> usize {
    let mut rows: Vec<Vector> = vectors.to_vec();
    let width = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..width {
        let Some(piv) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(r, piv);
        for i in r + 1..rows.len() {
            if !rows[i][col].is_zero() {
                let f = &rows[i][col] / &rows[r][col];
                for k in col..width {
                    let sub = &f * &rows[r][k];
                    rows[i][k] -= sub;
                }
            }
        }
        r += 1;
    }
    r
}

pub fn columns(m: &QMatrix) -> Vec<Vector> {
    (0..m.cols()).map(|j| (0..m.rows()).map(|i| m[(i, j)].clone()).collect()).collect()
}

pub fn apply(m: &QMatrix, v: &[Q]) -> Vector {
    (0..m.rows()).map(|i| (0..m.cols()).fold(Q::zero(), |acc, j| acc + &m[(i, j)] * &v[j])).collect()
}

pub fn matrix_rank(m: &QMatrix) -> usize {
    rank(&columns(m))
}

/// Basis of `{x : m x = 0}` by back substitution from an echelon form.
pub fn kernel(m: &QMatrix) -> Vec<Vector> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a: Vec<Vector> = (0..rows).map(|i| (0..cols).map(|j| m[(i, j)].clone()).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        let Some(piv) = (r..rows).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(r, piv);
        let inv = Q::one() / &a[r][col];
        for k in 0..cols {
            a[r][k] *= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for k in 0..cols {
                    let sub = &f * &a[r][k];
                    a[i][k] -= sub;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Q::zero(); cols];
            v[free] = Q::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][free].clone();
            }
            v
        })
        .collect()
}

/// `dim {x ∈ span(domain) : t x ∈ span(target)}` for independent `domain`.
pub fn preimage_dim(t: &QMatrix, domain: &[Vector], target: &[Vector]) -> usize {
    let images: Vec<Vector> = domain.iter().map(|x| apply(t, x)).collect();
    let mut joint = target.to_vec();
    joint.extend(images);
    domain.len() - (rank(&joint) - rank(target))
}

fn small_rational<R: Rng>(rng: &mut R) -> Q {
    rat(rng.gen_range(-3..=3), rng.gen_range(1..=3))
}

/// Random invertible matrix with small rational entries, and its inverse.
pub fn invertible<R: Rng>(rng: &mut R, n: usize) -> (QMatrix, QMatrix) {
    loop {
        let rows: Vec<Vector> = (0..n).map(|_| (0..n).map(|_| small_rational(rng)).collect()).collect();
        if rank(&rows) < n {
            continue;
        }
        let g = QMatrix::from_rows(rows, n).unwrap();
        return (g.clone(), inverse(&g));
    }
}

/// Gauss–Jordan inverse of an invertible matrix.
pub fn inverse(g: &QMatrix) -> QMatrix {
    let n = g.rows();
    let mut a: Vec<Vector> = (0..n)
        .map(|i| (0..2 * n).map(|j| if j < n { g[(i, j)].clone() } else if j - n == i { Q::one() } else { Q::zero() }).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by_key(|&i| !a[i][col].is_zero()).unwrap();
        a.swap(col, piv);
        let inv = Q::one() / &a[col][col];
        for k in 0..2 * n {
            a[col][k] *= &inv;
        }
        for i in 0..n {
            if i != col && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for k in 0..2 * n {
                    let sub = &f * &a[col][k];
                    a[i][k] -= sub;
                }
            }
        }
    }
    QMatrix::from_rows(a.into_iter().map(|row| row[n..].to_vec()).collect(), n).unwrap()
}

/// A pair `x → y` with `x` at filtration level `from` in degree `degree` and
/// `y = dx` at level `to ≥ from` in degree `degree + 1`. It survives on page
/// `r` exactly while `r ≤ to − from`.
#[derive(Clone, Debug)]
pub struct Pair {
    pub degree: i64,
    pub from: i64,
    pub to: i64,
}

/// A filtered complex assembled from isolated cycles and pairs, hidden by a
/// random change of basis in every degree, with its page dimensions known in
/// closed form.
#[derive(Clone, Debug)]
pub struct KnownComplex {
    pub complex: FilteredComplex,
    pub dots: Vec<(i64, i64)>,
    pub pairs: Vec<Pair>,
}

impl KnownComplex {
    /// Expected `dim E_r^{p,q}` at every position that is nonzero.
    pub fn page_dims(&self, r: Option<i64>) -> BTreeMap<(i64, i64), usize> {
        let mut out = BTreeMap::new();
        for &(n, p) in &self.dots {
            *out.entry((p, n - p)).or_insert(0) += 1;
        }
        for pair in &self.pairs {
            if r.is_some_and(|r| r <= pair.to - pair.from) {
                *out.entry((pair.from, pair.degree - pair.from)).or_insert(0) += 1;
                *out.entry((pair.to, pair.degree + 1 - pair.to)).or_insert(0) += 1;
            }
        }
        out
    }
}

/// Degrees `0..=top` with `top < 4`, levels `p_min ..= p_min + length`
/// with `length ≤ 4`, every `dim Cⁿ ≤ 6`.
pub fn random_filtered_complex<R: Rng>(rng: &mut R) -> KnownComplex {
    let top: i64 = rng.gen_range(0..=3);
    let p_min: i64 = rng.gen_range(-2..=1);
    let length: i64 = rng.gen_range(1..=4);
    let p_max = p_min + length;
    let degrees = (top + 1) as usize;
    let mut dims = vec![0usize; degrees];
    // (degree, level) per basis vector, and the matrix entries of d.
    let mut basis: Vec<Vec<i64>> = vec![Vec::new(); degrees];
    let mut arrows: Vec<(usize, usize, usize)> = Vec::new();
    let mut dots = Vec::new();
    let mut pairs = Vec::new();
    for _ in 0..rng.gen_range(0..=10) {
        let n = rng.gen_range(0..=top) as usize;
        if rng.gen_bool(0.6) && n < top as usize && dims[n] < 6 && dims[n + 1] < 6 {
            let from = rng.gen_range(p_min..p_max);
            let to = rng.gen_range(from..p_max);
            arrows.push((n, dims[n], dims[n + 1]));
            basis[n].push(from);
            basis[n + 1].push(to);
            dims[n] += 1;
            dims[n + 1] += 1;
            pairs.push(Pair { degree: n as i64, from, to });
        } else if dims[n] < 6 {
            let p = rng.gen_range(p_min..p_max);
            basis[n].push(p);
            dims[n] += 1;
            dots.push((n as i64, p));
        }
    }
    let mut d: Vec<QMatrix> = (0..top as usize).map(|n| QMatrix::zeros(dims[n + 1], dims[n])).collect();
    for &(n, x, y) in &arrows {
        d[n][(y, x)] = Q::one();
    }
    let changes: Vec<(QMatrix, QMatrix)> = dims.iter().map(|&k| invertible(rng, k)).collect();
    let d: Vec<QMatrix> =
        (0..top as usize).map(|n| changes[n + 1].0.mul(&d[n]).unwrap().mul(&changes[n].1).unwrap()).collect();
    let levels: Vec<Vec<Subspace>> = (p_min..=p_max)
        .map(|p| {
            (0..degrees)
                .map(|n| {
                    let g = &changes[n].0;
                    let vectors: Vec<Vector> =
                        basis[n].iter().enumerate().filter(|(_, &lvl)| lvl >= p).map(|(k, _)| g.column(k)).collect();
                    Subspace::span(dims[n], &vectors).unwrap()
                })
                .collect()
        })
        .collect();
    let complex = FilteredComplex::new(0, dims, d, p_min, levels).unwrap();
    KnownComplex { complex, dots, pairs }
}

/// Spanning vectors of `F^pCⁿ` in the complex's own basis.
pub fn level_vectors(c: &FilteredComplex, p: i64, n: i64) -> Vec<Vector> {
    c.filtration(p, n).basis()
}

pub fn cohomology_dim(c: &FilteredComplex, n: i64) -> usize {
    c.dim(n) - matrix_rank(&c.differential(n)) - matrix_rank(&c.differential(n - 1))
}

/// `dim F^pHⁿ / F^{p+1}Hⁿ` from ranks alone: `dim(F^pZ + B) − dim(F^{p+1}Z + B)`
/// with `dim(F^pZ + B) = rank[G_p | D] − rank(d G_p)` for a basis `G_p` of
/// `F^pCⁿ` and the columns `D` of the incoming differential.
pub fn graded_cohomology(c: &FilteredComplex, p: i64, q: i64) -> usize {
    let n = p + q;
    let incoming = columns(&c.differential(n - 1));
    let d = c.differential(n);
    let level = |p: i64| {
        let g = level_vectors(c, p, n);
        let mut joint = g.clone();
        joint.extend(incoming.iter().cloned());
        let dg: Vec<Vector> = g.iter().map(|x| apply(&d, x)).collect();
        rank(&joint) - rank(&dg)
    };
    level(p) - level(p + 1)
}

/// Cells of a double complex before the change of basis: `dims[i][j]` and
/// the maps as lists of `(source index, target index, coefficient)`.
struct Grid {
    width: usize,
    height: usize,
    dims: Vec<Vec<usize>>,
    h: BTreeMap<(usize, usize), Vec<(usize, usize, i64)>>,
    v: BTreeMap<(usize, usize), Vec<(usize, usize, i64)>>,
}

impl Grid {
    fn room(&self, cells: &[(i64, i64)]) -> bool {
        let mut want: BTreeMap<(i64, i64), usize> = BTreeMap::new();
        for &c in cells {
            *want.entry(c).or_insert(0) += 1;
        }
        want.iter().all(|(&(i, j), &k)| {
            i >= 0 && j >= 0 && (i as usize) < self.width && (j as usize) < self.height && self.dims[i as usize][j as usize] + k <= 3
        })
    }

    fn add(&mut self, i: i64, j: i64) -> usize {
        let cell = &mut self.dims[i as usize][j as usize];
        *cell += 1;
        *cell - 1
    }

    fn h(&mut self, from: (i64, i64, usize), to: usize, coef: i64) {
        self.h.entry((from.0 as usize, from.1 as usize)).or_default().push((from.2, to, coef));
    }

    fn v(&mut self, from: (i64, i64, usize), to: usize, coef: i64) {
        self.v.entry((from.0 as usize, from.1 as usize)).or_default().push((from.2, to, coef));
    }
}

/// Random anticommuting double complex of at most 4×4 cells of dimension
/// at most 3, built from dots, arrows, squares and staircases and then
/// disguised by a change of basis in every cell.
pub fn random_double_complex<R: Rng>(rng: &mut R) -> DoubleComplex {
    let width = rng.gen_range(1..=4);
    let height = rng.gen_range(1..=4);
    let mut g = Grid { width, height, dims: vec![vec![0; height]; width], h: BTreeMap::new(), v: BTreeMap::new() };
    for _ in 0..rng.gen_range(0..=12) {
        let i = rng.gen_range(0..width) as i64;
        let j = rng.gen_range(0..height) as i64;
        match rng.gen_range(0..5) {
            0 => {
                if g.room(&[(i, j)]) {
                    g.add(i, j);
                }
            }
            1 => {
                if g.room(&[(i, j), (i + 1, j)]) {
                    let a = g.add(i, j);
                    let b = g.add(i + 1, j);
                    g.h((i, j, a), b, 1);
                }
            }
            2 => {
                if g.room(&[(i, j), (i, j + 1)]) {
                    let a = g.add(i, j);
                    let b = g.add(i, j + 1);
                    g.v((i, j, a), b, 1);
                }
            }
            3 => {
                if g.room(&[(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]) {
                    let a = g.add(i, j);
                    let b = g.add(i + 1, j);
                    let c = g.add(i, j + 1);
                    let e = g.add(i + 1, j + 1);
                    g.h((i, j, a), b, 1);
                    g.v((i, j, a), c, 1);
                    g.v((i + 1, j, b), e, 1);
                    g.h((i, j + 1, c), e, -1);
                }
            }
            _ => {
                // Sources s_k with d_V s_k = t_k and d_H s_{k+1} = t_k, or the
                // mirror image with the roles of the two directions swapped.
                let steps = rng.gen_range(1..=3i64);
                let mirrored = rng.gen_bool(0.5);
                let at = |k: i64| if mirrored { (i + k, j - k) } else { (i - k, j + k) };
                let target = |k: i64| {
                    let (a, b) = at(k);
                    if mirrored { (a + 1, b) } else { (a, b + 1) }
                };
                let mut cells: Vec<(i64, i64)> = (0..=steps).map(at).collect();
                cells.extend((0..steps).map(target));
                if !g.room(&cells) {
                    continue;
                }
                let sources: Vec<usize> = (0..=steps).map(|k| { let (a, b) = at(k); g.add(a, b) }).collect();
                let targets: Vec<usize> = (0..steps).map(|k| { let (a, b) = target(k); g.add(a, b) }).collect();
                for k in 0..steps as usize {
                    let (a, b) = at(k as i64);
                    let (a1, b1) = at(k as i64 + 1);
                    if mirrored {
                        g.h((a, b, sources[k]), targets[k], 1);
                        g.v((a1, b1, sources[k + 1]), targets[k], 1);
                    } else {
                        g.v((a, b, sources[k]), targets[k], 1);
                        g.h((a1, b1, sources[k + 1]), targets[k], 1);
                    }
                }
            }
        }
    }
    let changes: Vec<Vec<(QMatrix, QMatrix)>> =
        g.dims.iter().map(|col| col.iter().map(|&k| invertible(rng, k)).collect()).collect();
    let dim = |i: usize, j: usize| if i < width && j < height { g.dims[i][j] } else { 0 };
    let mut dh = Vec::new();
    let mut dv = Vec::new();
    for i in 0..width {
        let mut hcol = Vec::new();
        let mut vcol = Vec::new();
        for j in 0..height {
            let mut h = QMatrix::zeros(dim(i + 1, j), dim(i, j));
            for &(s, t, c) in g.h.get(&(i, j)).into_iter().flatten() {
                h[(t, s)] = Q::from_integer(c.into());
            }
            let mut v = QMatrix::zeros(dim(i, j + 1), dim(i, j));
            for &(s, t, c) in g.v.get(&(i, j)).into_iter().flatten() {
                v[(t, s)] = Q::from_integer(c.into());
            }
            let inv = &changes[i][j].1;
            if i + 1 < width {
                h = changes[i + 1][j].0.mul(&h).unwrap().mul(inv).unwrap();
            }
            if j + 1 < height {
                v = changes[i][j + 1].0.mul(&v).unwrap().mul(inv).unwrap();
            }
            hcol.push(h);
            vcol.push(v);
        }
        dh.push(hcol);
        dv.push(vcol);
    }
    DoubleComplex::new(g.dims, dh, dv, Convention::Anticommuting).unwrap()
}

/// The same data with `d_V` negated on odd columns, which commutes with `d_H`.
pub fn twisted(dc: &DoubleComplex) -> DoubleComplex {
    let dims = (0..dc.width()).map(|i| (0..dc.height()).map(|j| dc.dim(i, j)).collect()).collect();
    let dh = (0..dc.width()).map(|i| (0..dc.height()).map(|j| dc.horizontal(i, j)).collect()).collect();
    let dv = (0..dc.width())
        .map(|i| {
            (0..dc.height())
                .map(|j| {
                    let v = dc.vertical(i, j);
                    if i % 2 == 1 { v.scale(&-Q::one()) } else { v }
                })
                .collect()
        })
        .collect();
    DoubleComplex::new(dims, dh, dv, Convention::Commuting).unwrap()
}

/// Swaps the roles of `i` and `j`.
pub fn transposed(dc: &DoubleComplex) -> DoubleComplex {
    let dims = (0..dc.height()).map(|j| (0..dc.width()).map(|i| dc.dim(i, j)).collect()).collect();
    let dh = (0..dc.height()).map(|j| (0..dc.width()).map(|i| dc.vertical(i, j)).collect()).collect();
    let dv = (0..dc.height()).map(|j| (0..dc.width()).map(|i| dc.horizontal(i, j)).collect()).collect();
    DoubleComplex::new(dims, dh, dv, dc.convention()).unwrap()
}

pub fn horizontal_cohomology(dc: &DoubleComplex, i: usize, j: usize) -> usize {
    let into = if i == 0 { 0 } else { matrix_rank(&dc.horizontal(i - 1, j)) };
    dc.dim(i, j) - matrix_rank(&dc.horizontal(i, j)) - into
}

/// `dim H_V H_H` at `(i, j)`: classes of `ker d_H` whose `d_V` lands in
/// `im d_H`, modulo `im d_H + d_V(ker d_H)` from the cell below.
pub fn vertical_of_horizontal(dc: &DoubleComplex, i: usize, j: usize) -> usize {
    let image_h = |i: usize, j: usize| if i == 0 { Vec::new() } else { columns(&dc.horizontal(i - 1, j)) };
    let cycles = kernel(&dc.horizontal(i, j));
    let numerator = preimage_dim(&dc.vertical(i, j), &cycles, &image_h(i, j + 1));
    let mut denominator = image_h(i, j);
    if j > 0 {
        let v = dc.vertical(i, j - 1);
        denominator.extend(kernel(&dc.horizontal(i, j - 1)).iter().map(|x| apply(&v, x)));
    }
    numerator - rank(&denominator)
}
