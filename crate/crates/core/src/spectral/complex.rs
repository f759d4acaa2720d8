//! Bounded filtered cochain complexes and first-quadrant double complexes.

use serde::{Deserialize, Serialize};

use super::linalg::{QMatrix, Subspace};
use super::SpectralError;

/// A cochain complex `C^{n_min} → … → C^{n_max}` with a decreasing filtration
/// `F^{p_min} = C ⊇ … ⊇ F^{p_max} = 0` by subcomplexes. `F^p` is full for
/// `p ≤ p_min` and zero for `p ≥ p_max`; `C^n` is zero outside the degree
/// range.
#[derive(Clone, Debug, PartialEq)]
pub struct FilteredComplex {
    n_min: i64,
    dims: Vec<usize>,
    d: Vec<QMatrix>,
    p_min: i64,
    levels: Vec<Vec<Subspace>>,
}

impl FilteredComplex {
    /// `d[k]` maps degree `n_min + k` to `n_min + k + 1` and there is one map
    /// fewer than degrees. `levels[i][k]` is `F^{p_min + i}` in degree
    /// `n_min + k`; the first level must be full and the last zero, and
    /// intermediate levels are checked for the subcomplex and decreasing
    /// conditions.
    pub fn new(
        n_min: i64,
        dims: Vec<usize>,
        d: Vec<QMatrix>,
        p_min: i64,
        levels: Vec<Vec<Subspace>>,
    ) -> Result<Self, SpectralError> {
        let c = FilteredComplex { n_min, dims, d, p_min, levels };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<(), SpectralError> {
        let len = self.dims.len();
        if len == 0 {
            return Err(SpectralError::Shape("complex needs at least one degree".into()));
        }
        if self.d.len() + 1 != len {
            return Err(SpectralError::Shape(format!("{} degrees need {} differentials, got {}", len, len - 1, self.d.len())));
        }
        for (k, m) in self.d.iter().enumerate() {
            if m.cols() != self.dims[k] || m.rows() != self.dims[k + 1] {
                return Err(SpectralError::Shape(format!(
                    "differential out of degree {} is {}x{}, expected {}x{}",
                    self.n_min + k as i64,
                    m.rows(),
                    m.cols(),
                    self.dims[k + 1],
                    self.dims[k]
                )));
            }
        }
        for k in 0..self.d.len().saturating_sub(1) {
            if !self.d[k + 1].mul(&self.d[k])?.is_zero() {
                return Err(SpectralError::DSquaredNonzero { degree: self.n_min + k as i64 });
            }
        }
        if self.levels.len() < 2 {
            return Err(SpectralError::Shape("filtration needs a full and a zero level".into()));
        }
        for (i, level) in self.levels.iter().enumerate() {
            if level.len() != len {
                return Err(SpectralError::Shape(format!("filtration level {i} covers {} degrees", level.len())));
            }
            for (k, s) in level.iter().enumerate() {
                if s.ambient() != self.dims[k] {
                    return Err(SpectralError::Shape(format!(
                        "filtration subspace at p = {}, n = {} lives in the wrong space",
                        self.p_min + i as i64,
                        self.n_min + k as i64
                    )));
                }
            }
        }
        let (first, last) = (&self.levels[0], &self.levels[self.levels.len() - 1]);
        if !first.iter().all(Subspace::is_full) || !last.iter().all(Subspace::is_zero) {
            return Err(SpectralError::NotExhaustive);
        }
        for (i, level) in self.levels.iter().enumerate() {
            let p = self.p_min + i as i64;
            for k in 0..len {
                let n = self.n_min + k as i64;
                if i + 1 < self.levels.len() && !self.levels[i + 1][k].is_subspace_of(&level[k]) {
                    return Err(SpectralError::NotDecreasing { p, n });
                }
                if k + 1 < len && !level[k].image(&self.d[k])?.is_subspace_of(&level[k + 1]) {
                    return Err(SpectralError::NotSubcomplex { p, n });
                }
            }
        }
        Ok(())
    }

    /// The only filtration steps are `F^0 = C` and `F^1 = 0`.
    pub fn trivial(n_min: i64, dims: Vec<usize>, d: Vec<QMatrix>) -> Result<Self, SpectralError> {
        let full = dims.iter().map(|&n| Subspace::full(n)).collect();
        let zero = dims.iter().map(|&n| Subspace::zero(n)).collect();
        FilteredComplex::new(n_min, dims, d, 0, vec![full, zero])
    }

    /// The truncation filtration: `F^pC^n = C^n` for `n ≥ p`, else zero.
    pub fn bete(n_min: i64, dims: Vec<usize>, d: Vec<QMatrix>) -> Result<Self, SpectralError> {
        let len = dims.len() as i64;
        let levels = (0..=len)
            .map(|i| {
                let p = n_min + i;
                dims.iter()
                    .enumerate()
                    .map(|(k, &dim)| if n_min + k as i64 >= p { Subspace::full(dim) } else { Subspace::zero(dim) })
                    .collect()
            })
            .collect();
        FilteredComplex::new(n_min, dims, d, n_min, levels)
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_min + self.dims.len() as i64 - 1
    }

    pub fn p_min(&self) -> i64 {
        self.p_min
    }

    pub fn p_max(&self) -> i64 {
        self.p_min + self.levels.len() as i64 - 1
    }

    /// `p_max − p_min`.
    pub fn filtration_length(&self) -> i64 {
        self.levels.len() as i64 - 1
    }

    fn index(&self, n: i64) -> Option<usize> {
        (n >= self.n_min && n <= self.n_max()).then(|| (n - self.n_min) as usize)
    }

    pub fn dim(&self, n: i64) -> usize {
        self.index(n).map_or(0, |k| self.dims[k])
    }

    /// The differential `C^n → C^{n+1}`, zero outside the range.
    pub fn differential(&self, n: i64) -> QMatrix {
        match self.index(n) {
            Some(k) if k < self.d.len() => self.d[k].clone(),
            _ => QMatrix::zeros(self.dim(n + 1), self.dim(n)),
        }
    }

    /// `F^pC^n` with clamping outside `[p_min, p_max]`.
    pub fn filtration(&self, p: i64, n: i64) -> Subspace {
        let Some(k) = self.index(n) else {
            return Subspace::zero(0);
        };
        let i = (p - self.p_min).clamp(0, self.levels.len() as i64 - 1) as usize;
        self.levels[i][k].clone()
    }

    pub fn cycles(&self, n: i64) -> Subspace {
        Subspace::preimage(&self.differential(n), &Subspace::zero(self.dim(n + 1))).expect("consistent shapes")
    }

    pub fn boundaries(&self, n: i64) -> Subspace {
        Subspace::full(self.dim(n - 1)).image(&self.differential(n - 1)).expect("consistent shapes")
    }

    /// `dim Hⁿ(C)`.
    pub fn cohomology_dim(&self, n: i64) -> usize {
        self.cycles(n).dim() - self.boundaries(n).dim()
    }

    /// Applies invertible changes of basis `g_n` in every degree: the
    /// differentials become `g_{n+1} d g_n⁻¹` and the filtration `g_n(F)`.
    pub fn change_basis(&self, g: &[QMatrix], g_inv: &[QMatrix]) -> Result<Self, SpectralError> {
        if g.len() != self.dims.len() || g_inv.len() != self.dims.len() {
            return Err(SpectralError::Shape("one change of basis per degree".into()));
        }
        let d = (0..self.d.len())
            .map(|k| g[k + 1].mul(&self.d[k])?.mul(&g_inv[k]))
            .collect::<Result<Vec<_>, _>>()?;
        let levels = self
            .levels
            .iter()
            .map(|level| level.iter().zip(g).map(|(s, gk)| s.image(gk)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        FilteredComplex::new(self.n_min, self.dims.clone(), d, self.p_min, levels)
    }
}

/// Sign convention of the input differentials of a double complex.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `d_H d_V + d_V d_H = 0`; the total differential is `d_H + d_V`.
    #[default]
    Anticommuting,
    /// `d_H d_V = d_V d_H`; the total differential is `d_H + (−1)^i d_V`.
    Commuting,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DoubleFiltration {
    /// `F^r = ⊕_{j ≥ r} Ω^{i,j}`.
    Vertical,
    /// `F^r = ⊕_{i ≥ r} Ω^{i,j}`.
    Horizontal,
}

/// A first-quadrant double complex `Ω^{i,j}`, `0 ≤ i < width`,
/// `0 ≤ j < height`, with `d_H: Ω^{i,j} → Ω^{i+1,j}` and
/// `d_V: Ω^{i,j} → Ω^{i,j+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubleComplex {
    dims: Vec<Vec<usize>>,
    dh: Vec<Vec<QMatrix>>,
    dv: Vec<Vec<QMatrix>>,
    convention: Convention,
}

impl DoubleComplex {
    /// `dims[i][j] = dim Ω^{i,j}`. `dh[i][j]` and `dv[i][j]` are the maps out of
    /// `(i, j)`; maps leaving the grid must be absent or zero.
    pub fn new(
        dims: Vec<Vec<usize>>,
        dh: Vec<Vec<QMatrix>>,
        dv: Vec<Vec<QMatrix>>,
        convention: Convention,
    ) -> Result<Self, SpectralError> {
        let width = dims.len();
        let height = dims.first().map_or(0, Vec::len);
        if width == 0 || height == 0 || dims.iter().any(|col| col.len() != height) {
            return Err(SpectralError::Shape("dims must be a non-empty rectangular grid".into()));
        }
        let dc = DoubleComplex { dims, dh, dv, convention };
        for i in 0..width {
            for j in 0..height {
                let h = dc.horizontal(i, j);
                let v = dc.vertical(i, j);
                if h.cols() != dc.dim(i, j) || h.rows() != dc.dim(i + 1, j) {
                    return Err(SpectralError::Shape(format!("dH at ({i},{j}) has the wrong shape")));
                }
                if v.cols() != dc.dim(i, j) || v.rows() != dc.dim(i, j + 1) {
                    return Err(SpectralError::Shape(format!("dV at ({i},{j}) has the wrong shape")));
                }
            }
        }
        for i in 0..width {
            for j in 0..height {
                if !dc.horizontal(i + 1, j).mul(&dc.horizontal(i, j))?.is_zero() {
                    return Err(SpectralError::DSquaredNonzero { degree: (i + j) as i64 });
                }
                if !dc.vertical(i, j + 1).mul(&dc.vertical(i, j))?.is_zero() {
                    return Err(SpectralError::DSquaredNonzero { degree: (i + j) as i64 });
                }
                let hv = dc.horizontal(i, j + 1).mul(&dc.vertical(i, j))?;
                let vh = dc.vertical(i + 1, j).mul(&dc.horizontal(i, j))?;
                let ok = match convention {
                    Convention::Anticommuting => hv == vh.scale(&super::linalg::q(-1)),
                    Convention::Commuting => hv == vh,
                };
                if !ok {
                    return Err(SpectralError::Convention { i, j });
                }
            }
        }
        Ok(dc)
    }

    pub fn width(&self) -> usize {
        self.dims.len()
    }

    pub fn height(&self) -> usize {
        self.dims[0].len()
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn dim(&self, i: usize, j: usize) -> usize {
        self.dims.get(i).and_then(|col| col.get(j)).copied().unwrap_or(0)
    }

    fn stored(maps: &[Vec<QMatrix>], i: usize, j: usize) -> Option<&QMatrix> {
        maps.get(i).and_then(|col| col.get(j))
    }

    pub fn horizontal(&self, i: usize, j: usize) -> QMatrix {
        DoubleComplex::stored(&self.dh, i, j).cloned().unwrap_or_else(|| QMatrix::zeros(self.dim(i + 1, j), self.dim(i, j)))
    }

    pub fn vertical(&self, i: usize, j: usize) -> QMatrix {
        DoubleComplex::stored(&self.dv, i, j).cloned().unwrap_or_else(|| QMatrix::zeros(self.dim(i, j + 1), self.dim(i, j)))
    }

    /// `d_V` with the sign that makes it anticommute with `d_H`.
    fn signed_vertical(&self, i: usize, j: usize) -> QMatrix {
        let v = self.vertical(i, j);
        match self.convention {
            Convention::Commuting if i % 2 == 1 => v.scale(&super::linalg::q(-1)),
            _ => v,
        }
    }

    /// Offsets of the summands `Ω^{i, n−i}` inside `Cⁿ`, in order of `i`.
    fn layout(&self, n: usize) -> Vec<(usize, usize, usize)> {
        let mut offset = 0;
        let mut out = Vec::new();
        for i in 0..=n.min(self.width() - 1) {
            let j = n - i;
            if j < self.height() {
                out.push((i, j, offset));
                offset += self.dim(i, j);
            }
        }
        out
    }

    /// Total complex with the chosen filtration.
    pub fn total(&self, filtration: DoubleFiltration) -> Result<FilteredComplex, SpectralError> {
        let top = self.width() + self.height() - 2;
        let layouts: Vec<_> = (0..=top).map(|n| self.layout(n)).collect();
        let dims: Vec<usize> = layouts.iter().map(|l| l.iter().map(|&(i, j, _)| self.dim(i, j)).sum()).collect();
        let mut d = Vec::with_capacity(top);
        for n in 0..top {
            let mut m = QMatrix::zeros(dims[n + 1], dims[n]);
            let target = |i: usize, j: usize| layouts[n + 1].iter().find(|&&(a, b, _)| a == i && b == j).map(|&(_, _, o)| o);
            for &(i, j, src) in &layouts[n] {
                if let Some(dst) = target(i + 1, j) {
                    place(&mut m, &self.horizontal(i, j), dst, src);
                }
                if let Some(dst) = target(i, j + 1) {
                    place(&mut m, &self.signed_vertical(i, j), dst, src);
                }
            }
            d.push(m);
        }
        let levels_count = match filtration {
            DoubleFiltration::Vertical => self.height(),
            DoubleFiltration::Horizontal => self.width(),
        };
        let levels = (0..=levels_count)
            .map(|r| {
                layouts
                    .iter()
                    .zip(&dims)
                    .map(|(layout, &dim)| {
                        let coords = layout.iter().flat_map(|&(i, j, o)| {
                            let keep = match filtration {
                                DoubleFiltration::Vertical => j >= r,
                                DoubleFiltration::Horizontal => i >= r,
                            };
                            (o..o + if keep { self.dim(i, j) } else { 0 }).collect::<Vec<_>>()
                        });
                        Subspace::coordinate(dim, coords)
                    })
                    .collect()
            })
            .collect();
        FilteredComplex::new(0, dims, d, 0, levels)
    }
}

fn place(m: &mut QMatrix, block: &QMatrix, row: usize, col: usize) {
    for i in 0..block.rows() {
        for j in 0..block.cols() {
            m[(row + i, col + j)] = block[(i, j)].clone();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::linalg::q;
    use super::*;

    fn line() -> (Vec<usize>, Vec<QMatrix>) {
        (vec![1, 1], vec![QMatrix::from_i64(&[&[1]])])
    }

    #[test]
    fn validation_catches_bad_data() {
        let d = vec![QMatrix::from_i64(&[&[1]]), QMatrix::from_i64(&[&[1]])];
        assert!(matches!(
            FilteredComplex::trivial(0, vec![1, 1, 1], d),
            Err(SpectralError::DSquaredNonzero { degree: 0 })
        ));
        let (dims, d) = line();
        // F^1 = C^0 only is not a subcomplex.
        let levels = vec![
            vec![Subspace::full(1), Subspace::full(1)],
            vec![Subspace::full(1), Subspace::zero(1)],
            vec![Subspace::zero(1), Subspace::zero(1)],
        ];
        assert!(matches!(
            FilteredComplex::new(0, dims.clone(), d.clone(), 0, levels),
            Err(SpectralError::NotSubcomplex { p: 1, n: 0 })
        ));
        let levels = vec![
            vec![Subspace::full(1), Subspace::full(1)],
            vec![Subspace::zero(1), Subspace::zero(1)],
            vec![Subspace::zero(1), Subspace::full(1)],
            vec![Subspace::zero(1), Subspace::zero(1)],
        ];
        assert!(matches!(FilteredComplex::new(0, dims, d, 0, levels), Err(SpectralError::NotDecreasing { .. })));
    }

    #[test]
    fn bete_levels() {
        let (dims, d) = line();
        let c = FilteredComplex::bete(3, dims, d).unwrap();
        assert_eq!((c.p_min(), c.p_max()), (3, 5));
        assert!(c.filtration(4, 3).is_zero());
        assert!(c.filtration(4, 4).is_full());
        assert!(c.filtration(-10, 3).is_full());
        assert!(c.filtration(10, 4).is_zero());
        assert_eq!(c.cohomology_dim(3) + c.cohomology_dim(4), 0);
    }

    #[test]
    fn total_complex_signs() {
        // A commuting square of identities becomes a complex only after twisting.
        let one = || QMatrix::from_i64(&[&[1]]);
        let dh = vec![vec![one(), one()]];
        let dv = vec![vec![one()], vec![one()]];
        let dc = DoubleComplex::new(vec![vec![1, 1], vec![1, 1]], dh.clone(), dv.clone(), Convention::Commuting).unwrap();
        assert!(DoubleComplex::new(vec![vec![1, 1], vec![1, 1]], dh, dv, Convention::Anticommuting).is_err());
        let total = dc.total(DoubleFiltration::Vertical).unwrap();
        assert_eq!(total.dim(1), 2);
        assert_eq!((0..=2).map(|n| total.cohomology_dim(n)).sum::<usize>(), 0);
        let d1 = total.differential(1);
        // Columns are Ω^{0,1} then Ω^{1,0}; the vertical map out of i = 1 is negated.
        assert_eq!(d1, QMatrix::from_rows(vec![vec![q(1), q(-1)]], 2).unwrap());
    }

    #[test]
    fn vertical_filtration_levels() {
        let dc = DoubleComplex::new(vec![vec![1, 2], vec![1, 1]], vec![], vec![], Convention::Anticommuting).unwrap();
        let c = dc.total(DoubleFiltration::Vertical).unwrap();
        // C¹ = Ω^{0,1} ⊕ Ω^{1,0}, summands ordered by i.
        assert_eq!(c.dim(1), 3);
        assert_eq!(c.filtration(1, 1), Subspace::coordinate(3, [0, 1]));
        let h = dc.total(DoubleFiltration::Horizontal).unwrap();
        assert_eq!(h.filtration(1, 1), Subspace::coordinate(3, [2]));
    }
}
