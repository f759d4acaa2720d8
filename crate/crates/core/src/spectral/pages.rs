//! Pages of the spectral sequence of a filtered complex, straight from the
//! cycles-up-to-filtration formulas.
//!
//! With `n = p + q`:
//!
//! * `A_r^{p,q} = {x ∈ F^pCⁿ : dx ∈ F^{p+r}C^{n+1}}`
//! * `E_r^{p,q} = A_r^{p,q} / (d A_{r−1}^{p−r+1, q+r−2} + A_{r−1}^{p+1, q−1})`
//! * `d_r : E_r^{p,q} → E_r^{p+r, q−r+1}` is induced by `d`.

use std::collections::BTreeMap;

use super::complex::FilteredComplex;
use super::linalg::{quotient_coordinates, QMatrix, Subspace, Q};
use super::SpectralError;

/// `A_r^{p,q}`. Any integer `r` is accepted; negative `r` gives `F^pC^{p+q}`.
pub fn cycles_up_to_filtration(c: &FilteredComplex, r: i64, p: i64, q: i64) -> Subspace {
    let n = p + q;
    let target = Subspace::preimage(&c.differential(n), &c.filtration(p + r, n + 1)).expect("consistent shapes");
    c.filtration(p, n).intersect(&target).expect("same ambient space")
}

/// `E_r^{p,q}` presented as a quotient, with chosen representatives.
#[derive(Clone, Debug, PartialEq)]
pub struct PageEntry {
    pub numerator: Subspace,
    pub denominator: Subspace,
    pub representatives: Vec<Vec<Q>>,
}

impl PageEntry {
    pub fn dim(&self) -> usize {
        self.representatives.len()
    }

    fn new(numerator: Subspace, denominator: Subspace) -> Result<Self, SpectralError> {
        let representatives = numerator.quotient_basis(&denominator)?;
        Ok(PageEntry { numerator, denominator, representatives })
    }
}

pub fn page_entry(c: &FilteredComplex, r: i64, p: i64, q: i64) -> Result<PageEntry, SpectralError> {
    if r < 0 {
        return Err(SpectralError::NegativePage(r));
    }
    let n = p + q;
    let numerator = cycles_up_to_filtration(c, r, p, q);
    let from_below = cycles_up_to_filtration(c, r - 1, p - r + 1, q + r - 2).image(&c.differential(n - 1))?;
    let from_above = cycles_up_to_filtration(c, r - 1, p + 1, q - 1);
    PageEntry::new(numerator, from_below.sum(&from_above)?)
}

/// Matrix of `d_r : E_r^{p,q} → E_r^{p+r, q−r+1}` in the chosen
/// representatives, with a check that it does not depend on them.
pub fn page_differential(c: &FilteredComplex, r: i64, p: i64, q: i64) -> Result<QMatrix, SpectralError> {
    let source = page_entry(c, r, p, q)?;
    let target = page_entry(c, r, p + r, q - r + 1)?;
    induced_map(c, r, (p, q), &source, &target)
}

fn induced_map(
    c: &FilteredComplex,
    r: i64,
    (p, q): (i64, i64),
    source: &PageEntry,
    target: &PageEntry,
) -> Result<QMatrix, SpectralError> {
    let d = c.differential(p + q);
    if !source.denominator.image(&d)?.is_subspace_of(&target.denominator) {
        return Err(SpectralError::RepresentativeDependence { r, p, q });
    }
    let mut m = QMatrix::zeros(target.dim(), source.dim());
    for (j, x) in source.representatives.iter().enumerate() {
        let y = d.apply(x);
        let coords = quotient_coordinates(&y, &target.representatives, &target.denominator).ok_or_else(|| {
            SpectralError::Internal(format!("d of a representative at r = {r}, ({p}, {q}) leaves the target page"))
        })?;
        for (i, v) in coords.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

/// All positions `(p, q)` where a page can be nonzero.
pub fn positions(c: &FilteredComplex) -> Vec<(i64, i64)> {
    (c.p_min()..c.p_max()).flat_map(|p| (c.n_min()..=c.n_max()).map(move |n| (p, n - p))).collect()
}

#[derive(Clone, Debug)]
pub struct Page {
    pub r: i64,
    pub entries: BTreeMap<(i64, i64), PageEntry>,
    pub differentials: BTreeMap<(i64, i64), QMatrix>,
}

impl Page {
    pub fn dim(&self, p: i64, q: i64) -> usize {
        self.entries.get(&(p, q)).map_or(0, PageEntry::dim)
    }

    pub fn dims(&self) -> BTreeMap<(i64, i64), usize> {
        self.entries.iter().map(|(&k, e)| (k, e.dim())).collect()
    }

    fn differential(&self, p: i64, q: i64) -> Option<&QMatrix> {
        self.differentials.get(&(p, q))
    }

    /// `dim ker(d_r out of (p, q)) − rank(d_r into (p, q))`.
    pub fn cohomology_dim(&self, p: i64, q: i64) -> usize {
        let dim = self.dim(p, q);
        let out = self.differential(p, q).map_or(0, QMatrix::rank);
        let into = self.differential(p - self.r, q + self.r - 1).map_or(0, QMatrix::rank);
        dim - out - into
    }

    /// Checks `d_r ∘ d_r = 0` at every position.
    pub fn check_square_zero(&self) -> Result<(), SpectralError> {
        for (&(p, q), first) in &self.differentials {
            if let Some(second) = self.differential(p + self.r, q - self.r + 1) {
                if !second.mul(first)?.is_zero() {
                    return Err(SpectralError::Internal(format!("d_{} squares to nonzero at ({p}, {q})", self.r)));
                }
            }
        }
        Ok(())
    }
}

pub fn page(c: &FilteredComplex, r: i64) -> Result<Page, SpectralError> {
    let mut entries = BTreeMap::new();
    for (p, q) in positions(c) {
        entries.insert((p, q), page_entry(c, r, p, q)?);
    }
    let empty = |c: &FilteredComplex, p: i64, q: i64| page_entry(c, r, p, q);
    let mut differentials = BTreeMap::new();
    for (&(p, q), source) in &entries {
        let key = (p + r, q - r + 1);
        let target = match entries.get(&key) {
            Some(t) => t.clone(),
            None => empty(c, key.0, key.1)?,
        };
        differentials.insert((p, q), induced_map(c, r, (p, q), source, &target)?);
    }
    Ok(Page { r, entries, differentials })
}

#[derive(Clone, Debug)]
pub struct InfinityPage {
    /// First `r` from which every page equals this one.
    pub stabilization: i64,
    /// `F^pZ / (F^pB + F^{p+1}Z)` at each position.
    pub entries: BTreeMap<(i64, i64), PageEntry>,
}

impl InfinityPage {
    pub fn dim(&self, p: i64, q: i64) -> usize {
        self.entries.get(&(p, q)).map_or(0, PageEntry::dim)
    }

    pub fn dims(&self) -> BTreeMap<(i64, i64), usize> {
        self.entries.iter().map(|(&k, e)| (k, e.dim())).collect()
    }
}

/// `E_∞` from the direct formula, cross-checked against pages `ℓ + 1` and
/// `ℓ + 2` where `ℓ` is the filtration length.
pub fn infinity_page(c: &FilteredComplex) -> Result<InfinityPage, SpectralError> {
    let stabilization = c.filtration_length() + 1;
    let stable = page(c, stabilization)?;
    let next = page(c, stabilization + 1)?;
    let mut entries = BTreeMap::new();
    for (p, q) in positions(c) {
        let n = p + q;
        let cycles = c.cycles(n);
        let numerator = c.filtration(p, n).intersect(&cycles)?;
        let boundaries = c.filtration(p, n).intersect(&c.boundaries(n))?;
        let higher = c.filtration(p + 1, n).intersect(&cycles)?;
        let entry = PageEntry::new(numerator, boundaries.sum(&higher)?)?;
        if stable.dim(p, q) != next.dim(p, q) {
            return Err(SpectralError::NonStabilization { r: stabilization, p, q });
        }
        if stable.dim(p, q) != entry.dim() {
            return Err(SpectralError::Internal(format!(
                "page {stabilization} has dim {} at ({p}, {q}) but the direct formula gives {}",
                stable.dim(p, q),
                entry.dim()
            )));
        }
        entries.insert((p, q), entry);
    }
    Ok(InfinityPage { stabilization, entries })
}

/// `dim F^pH^{p+q} / F^{p+1}H^{p+q}` for the image filtration
/// `F^pH = im(H(F^pC) → H(C))`, computed without any page.
pub fn graded_cohomology(c: &FilteredComplex, p: i64, q: i64) -> usize {
    let n = p + q;
    let cycles = c.cycles(n);
    let boundaries = c.boundaries(n);
    let level = |p: i64| {
        let z = c.filtration(p, n).intersect(&cycles).expect("same ambient space");
        z.sum(&boundaries).expect("same ambient space").dim()
    };
    level(p) - level(p + 1)
}

#[cfg(test)]
mod tests {
    use super::super::linalg::q as rat;
    use super::*;

    fn two_term() -> FilteredComplex {
        // C⁰ = ℚ² → C¹ = ℚ², d = [[1, 0], [0, 0]].
        let d = QMatrix::from_rows(vec![vec![rat(1), rat(0)], vec![rat(0), rat(0)]], 2).unwrap();
        FilteredComplex::bete(0, vec![2, 2], vec![d]).unwrap()
    }

    #[test]
    fn one_term_bete_page_zero() {
        let c = FilteredComplex::bete(0, vec![3], vec![]).unwrap();
        let e0 = page_entry(&c, 0, 0, 0).unwrap();
        assert_eq!(e0.dim(), 3);
        assert!(e0.numerator.is_full());
    }

    #[test]
    fn page_zero_is_associated_graded() {
        let c = two_term();
        for (p, q) in positions(&c) {
            let n = p + q;
            let expected = c.filtration(p, n).dim() - c.filtration(p + 1, n).dim();
            assert_eq!(page_entry(&c, 0, p, q).unwrap().dim(), expected);
        }
    }

    #[test]
    fn cycles_extremes() {
        let c = two_term();
        assert_eq!(cycles_up_to_filtration(&c, 0, 0, 0), c.filtration(0, 0));
        assert_eq!(cycles_up_to_filtration(&c, 100, 0, 0), c.cycles(0));
    }

    #[test]
    fn bete_converges_by_page_two() {
        let c = two_term();
        let e2 = page(&c, 2).unwrap();
        assert_eq!(e2.dim(0, 0), 1);
        assert_eq!(e2.dim(1, 0), 1);
        assert_eq!(e2.dims().values().sum::<usize>(), c.cohomology_dim(0) + c.cohomology_dim(1));
        let inf = infinity_page(&c).unwrap();
        assert_eq!(inf.dims(), e2.dims());
        assert_eq!(graded_cohomology(&c, 0, 0), 1);
        assert_eq!(graded_cohomology(&c, 1, 0), 1);
        assert_eq!(graded_cohomology(&c, 0, 1), 0);
    }

    #[test]
    fn d1_on_bete_is_the_differential() {
        let c = two_term();
        let d1 = page_differential(&c, 1, 0, 0).unwrap();
        assert_eq!(d1.rank(), 1);
        let e1 = page(&c, 1).unwrap();
        e1.check_square_zero().unwrap();
        assert_eq!(e1.cohomology_dim(0, 0), 1);
    }

    #[test]
    fn zero_complex() {
        let c = FilteredComplex::trivial(0, vec![0, 0], vec![QMatrix::zeros(0, 0)]).unwrap();
        assert!(infinity_page(&c).unwrap().dims().values().all(|&d| d == 0));
    }

    #[test]
    fn negative_page_rejected() {
        assert!(matches!(page_entry(&two_term(), -1, 0, 0), Err(SpectralError::NegativePage(-1))));
    }
}
