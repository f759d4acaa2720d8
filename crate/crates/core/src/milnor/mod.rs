//! Surface-group representations into `GL⁺(2,ℝ)`, their Milnor number and
//! explicit representations realizing every admissible degree.
//!
//! The Milnor number of `A₁..A_g, B₁..B_g` is `θ̃(∏[αᵢ, βᵢ]) / 2π` for any
//! lifts `αᵢ, βᵢ` to the cover. It obeys `|δ| < g`, and every integer in that
//! range is realized by [`build_representation`].
//!
//! The constructions start from the seed factorization `A₂ = A₀A₁` with
//! `A₀ = diag(2, 1/2)`, `A₁ = [[−5/2, 9/2], [−3, 5]]`. `K` denotes the
//! conjugacy class of `A₀` (trace `5/2`, determinant `1`) and `πK` its
//! negative (trace `−5/2`). In the cover, `K̃` consists of elements over `K`
//! whose lift lies in `(−π/2, π/2)` and `πK̃` of elements over `πK` with lift in
//! `(π/2, 3π/2)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

mod field;

use num_rational::{BigRational, Ratio};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::liftgroup::{
    deck_shift, lift_commutator, lift_loop, lift_product, CoveredElement, LiftError, Letter, Mat2,
    SampledLoop, WordPath, WINDING_TOL,
};
use crate::exact::{Scalar, M2};
use field::{product, Lifted};

/// ∞-norm tolerance on the surface relation.
pub const RELATION_TOL: f64 = 1e-8;

/// Tolerance used to recognise trace and determinant of the seed classes.
const CLASS_TOL: f64 = 1e-8;

pub const SEED_A0: Mat2 = Mat2::diag(2.0, 0.5);
pub const SEED_A1: Mat2 = Mat2::new(-2.5, 4.5, -3.0, 5.0);
pub const SEED_A2: Mat2 = Mat2::new(-5.0, 9.0, -1.5, 2.5);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MilnorError {
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error("surface relation violated: |prod [A_i, B_i] - I|_inf = {residual}")]
    RelationViolated { residual: f64 },
    #[error("representation needs {genus} matrices in each list, got {a} and {b}")]
    GenusMismatch { genus: usize, a: usize, b: usize },
    #[error("genus must be positive")]
    ZeroGenus,
    #[error("matrices are not conjugate: {0}")]
    NotSimilar(String),
    #[error("matrices have repeated or complex eigenvalues")]
    DegenerateSpectrum,
    #[error("element is not in the shifted class (trace -5/2, det 1, lift in (pi/2, 3pi/2)): {0}")]
    NotInShiftedClass(String),
    #[error("degree {degree} is not admissible for genus {genus}: need |d| < g")]
    Inadmissible { genus: usize, degree: i64 },
    #[error("chain length must be at least 1")]
    EmptyChain,
    #[error("lift {lift} is not within {tol} of a multiple of 2pi")]
    Instability { lift: f64, tol: f64 },
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

/// Identifies the seed conjugacy classes by trace and determinant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConjClassTag {
    pub trace: Ratio<i64>,
    pub det: Ratio<i64>,
    pub shifted: bool,
}

impl ConjClassTag {
    pub const K: ConjClassTag =
        ConjClassTag { trace: Ratio::new_raw(5, 2), det: Ratio::new_raw(1, 1), shifted: false };
    pub const SHIFTED_K: ConjClassTag =
        ConjClassTag { trace: Ratio::new_raw(-5, 2), det: Ratio::new_raw(1, 1), shifted: true };

    /// Classifies a matrix as lying in `K` or `πK`, if it does.
    pub fn of(m: &Mat2) -> Option<ConjClassTag> {
        [ConjClassTag::K, ConjClassTag::SHIFTED_K].into_iter().find(|tag| tag.matches(m))
    }

    pub fn matches(&self, m: &Mat2) -> bool {
        let as_f64 = |r: Ratio<i64>| *r.numer() as f64 / *r.denom() as f64;
        (m.trace() - as_f64(self.trace)).abs() <= CLASS_TOL && (m.det() - as_f64(self.det)).abs() <= CLASS_TOL
    }
}

/// Elements over `K` with lift in `(−π/2, π/2)`.
pub fn in_k_tilde(x: &CoveredElement) -> bool {
    ConjClassTag::K.matches(&x.matrix) && x.lift.abs() < FRAC_PI_2
}

/// Elements over `πK` with lift in `(π/2, 3π/2)`.
pub fn in_shifted_k_tilde(x: &CoveredElement) -> bool {
    ConjClassTag::SHIFTED_K.matches(&x.matrix) && x.lift > FRAC_PI_2 && x.lift < 3.0 * FRAC_PI_2
}

/// Applies the even deck shift that moves the lift of an element over `πK`
/// into `(π/2, 3π/2)`.
pub fn normalize_shifted(x: &CoveredElement) -> Result<CoveredElement, MilnorError> {
    if !ConjClassTag::SHIFTED_K.matches(&x.matrix) {
        return Err(MilnorError::NotInShiftedClass(format!("matrix {}", x.matrix)));
    }
    let turns = ((x.lift - PI) / TAU).round() as i64;
    Ok(deck_shift(x, -2 * turns))
}

/// A representation of the genus-`g` surface group, given by the images of
/// the standard generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RepresentationJson", into = "RepresentationJson")]
pub struct SurfaceGroupRep {
    genus: usize,
    a: Vec<Mat2>,
    b: Vec<Mat2>,
}

#[derive(Serialize, Deserialize)]
struct RepresentationJson {
    genus: usize,
    #[serde(rename = "A")]
    a: Vec<Mat2>,
    #[serde(rename = "B")]
    b: Vec<Mat2>,
}

impl TryFrom<RepresentationJson> for SurfaceGroupRep {
    type Error = MilnorError;

    fn try_from(j: RepresentationJson) -> Result<Self, Self::Error> {
        SurfaceGroupRep::unchecked(j.genus, j.a, j.b)
    }
}

impl From<SurfaceGroupRep> for RepresentationJson {
    fn from(r: SurfaceGroupRep) -> Self {
        RepresentationJson { genus: r.genus, a: r.a, b: r.b }
    }
}

impl SurfaceGroupRep {
    /// Validates shapes, determinants and the surface relation.
    pub fn new(genus: usize, a: Vec<Mat2>, b: Vec<Mat2>) -> Result<Self, MilnorError> {
        let rep = SurfaceGroupRep::unchecked(genus, a, b)?;
        rep.check_relation(RELATION_TOL)?;
        Ok(rep)
    }

    /// Validates shapes and determinants only; the relation is checked by
    /// [`SurfaceGroupRep::check_relation`].
    pub fn unchecked(genus: usize, a: Vec<Mat2>, b: Vec<Mat2>) -> Result<Self, MilnorError> {
        if genus == 0 {
            return Err(MilnorError::ZeroGenus);
        }
        if a.len() != genus || b.len() != genus {
            return Err(MilnorError::GenusMismatch { genus, a: a.len(), b: b.len() });
        }
        for m in a.iter().chain(&b) {
            if !(m.det() > 0.0) || !m.is_finite() {
                return Err(LiftError::NonPositiveDeterminant(m.det()).into());
            }
        }
        Ok(SurfaceGroupRep { genus, a, b })
    }

    pub fn trivial(genus: usize) -> Result<Self, MilnorError> {
        SurfaceGroupRep::new(genus, vec![Mat2::IDENTITY; genus], vec![Mat2::IDENTITY; genus])
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn a(&self) -> &[Mat2] {
        &self.a
    }

    pub fn b(&self) -> &[Mat2] {
        &self.b
    }

    /// `∏ [Aᵢ, Bᵢ]`, evaluated exactly from the stored entries.
    fn exact_relator(&self) -> M2<BigRational> {
        self.a.iter().zip(&self.b).fold(M2::identity(), |acc, (a, b)| {
            let (a, b) = (M2::from_mat2(a), M2::from_mat2(b));
            acc.mul(&a).mul(&b).mul(&a.inverse()).mul(&b.inverse())
        })
    }

    pub fn relator(&self) -> Mat2 {
        self.exact_relator().to_mat2()
    }

    /// `‖∏ [Aᵢ, Bᵢ] − I‖_∞` without rounding error in the product.
    pub fn relation_residual(&self) -> f64 {
        self.exact_relator().sub(&M2::identity()).norm_inf().to_f64()
    }

    pub fn check_relation(&self, tol: f64) -> Result<(), MilnorError> {
        let residual = self.relation_residual();
        if residual <= tol {
            Ok(())
        } else {
            Err(MilnorError::RelationViolated { residual })
        }
    }

    /// Conjugates every generator by `s`.
    pub fn conjugate(&self, s: &Mat2) -> Result<Self, MilnorError> {
        let s = M2::<BigRational>::from_mat2(s);
        let conj = |m: &Mat2| M2::from_mat2(m).conjugate_by(&s).to_mat2();
        let rep = SurfaceGroupRep::unchecked(self.genus, self.a.iter().map(conj).collect(), self.b.iter().map(conj).collect())?;
        Ok(rep.closed_up())
    }

    /// Rounding strongly hyperbolic generators to `f64` can break the
    /// relation by far more than the rounding itself. This moves the
    /// best-conditioned non-commuting pair by a few Gauss–Newton steps so
    /// that the exactly evaluated relator returns to the identity. Matrices
    /// move by roughly the size of the original defect.
    pub fn closed_up(self) -> Self {
        const TARGET: f64 = 1e-13;
        const STEPS: usize = 8;
        let start = self.relation_residual();
        if !(start > TARGET) || !start.is_finite() {
            return self;
        }
        let commutators: Vec<M2<BigRational>> = self
            .a
            .iter()
            .zip(&self.b)
            .map(|(a, b)| {
                let (a, b) = (M2::from_mat2(a), M2::from_mat2(b));
                a.mul(&b).mul(&a.inverse()).mul(&b.inverse())
            })
            .collect();
        let frob_cond = |m: &Mat2| (m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d) / m.det();
        let Some(k) = (0..self.genus)
            .filter(|&i| commutators[i].to_mat2().distance(&Mat2::IDENTITY) > 0.1)
            .min_by(|&i, &j| {
                let cost = |i: usize| frob_cond(&self.a[i]) * frob_cond(&self.b[i]);
                cost(i).total_cmp(&cost(j))
            })
        else {
            return self;
        };
        let prefix = commutators[..k].iter().fold(M2::identity(), |acc, c| acc.mul(c));
        let suffix = commutators[k + 1..].iter().fold(M2::identity(), |acc, c| acc.mul(c));
        let (p64, s64) = (prefix.to_mat2(), suffix.to_mat2());

        let unpack = |x: &[f64; 8]| (Mat2::new(x[0], x[1], x[2], x[3]), Mat2::new(x[4], x[5], x[6], x[7]));
        let exact_defect = |x: &[f64; 8]| {
            let (a, b) = unpack(x);
            let (a, b) = (M2::<BigRational>::from_mat2(&a), M2::from_mat2(&b));
            let c = a.mul(&b).mul(&a.inverse()).mul(&b.inverse());
            prefix.mul(&c).mul(&suffix).sub(&M2::identity()).to_mat2()
        };
        let float_defect = |x: &[f64; 8]| {
            let (a, b) = unpack(x);
            p64 * a * b * a.inverse() * b.inverse() * s64
        };

        let (a, b) = (self.a[k], self.b[k]);
        let mut x = [a.a, a.b, a.c, a.d, b.a, b.b, b.c, b.d];
        let mut best = (start, x);
        for _ in 0..STEPS {
            let f = exact_defect(&x);
            let h = 1e-6 * a.norm_inf().max(b.norm_inf());
            let mut jac = nalgebra::SMatrix::<f64, 4, 8>::zeros();
            for j in 0..8 {
                let (mut up, mut down) = (x, x);
                up[j] += h;
                down[j] -= h;
                let d = float_defect(&up).sub(&float_defect(&down));
                for (row, v) in [d.a, d.b, d.c, d.d].into_iter().enumerate() {
                    jac[(row, j)] = v / (2.0 * h);
                }
            }
            let rhs = nalgebra::Vector4::new(-f.a, -f.b, -f.c, -f.d);
            let Ok(step) = jac.svd(true, true).solve(&rhs, 1e-10 * jac.norm()) else {
                break;
            };
            for (xi, di) in x.iter_mut().zip(step.iter()) {
                *xi += di;
            }
            let residual = exact_defect(&x).norm_inf();
            if residual < best.0 {
                best = (residual, x);
            }
            if residual <= TARGET {
                break;
            }
        }
        let (a_new, b_new) = unpack(&best.1);
        let mut out = self;
        if a_new.det() > 0.0 && b_new.det() > 0.0 {
            out.a[k] = a_new;
            out.b[k] = b_new;
        }
        out
    }

    /// Principal lifts in the order `α₁, β₁, …, α_g, β_g`.
    fn principal_lifts(&self) -> Result<Vec<CoveredElement>, MilnorError> {
        let mut out = Vec::with_capacity(2 * self.genus);
        for (a, b) in self.a.iter().zip(&self.b) {
            out.push(CoveredElement::principal(*a)?);
            out.push(CoveredElement::principal(*b)?);
        }
        Ok(out)
    }
}

fn round_turns(lift: f64) -> Result<i64, MilnorError> {
    let turns = lift / TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() >= WINDING_TOL {
        return Err(MilnorError::Instability { lift, tol: WINDING_TOL });
    }
    Ok(rounded as i64)
}

/// Lift of `∏ [αᵢ, βᵢ]` for the given lifts (ordered `α₁, β₁, α₂, …`).
pub fn relator_lift(lifts: &[CoveredElement]) -> Result<CoveredElement, MilnorError> {
    let commutators = lifts
        .chunks_exact(2)
        .map(|pair| lift_commutator(&pair[0], &pair[1]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(lift_product(&commutators)?)
}

/// Milnor number from lift arithmetic with principal lifts.
pub fn milnor_number(rep: &SurfaceGroupRep) -> Result<i64, MilnorError> {
    milnor_number_with_tolerance(rep, RELATION_TOL)
}

pub fn milnor_number_with_tolerance(rep: &SurfaceGroupRep, tol: f64) -> Result<i64, MilnorError> {
    rep.check_relation(tol)?;
    let product = relator_lift(&rep.principal_lifts()?)?;
    round_turns(product.lift)
}

/// The commutator loop `t ↦ ∏ [αᵢ(t), βᵢ(t)]` built from canonical paths.
pub fn commutator_loop(rep: &SurfaceGroupRep) -> Result<WordPath, MilnorError> {
    let lifts = rep.principal_lifts()?;
    let word: Vec<Letter> = (0..rep.genus)
        .flat_map(|i| {
            let (a, b) = (2 * i, 2 * i + 1);
            [Letter::new(a), Letter::new(b), Letter::inv(a), Letter::inv(b)]
        })
        .collect();
    Ok(WordPath::new(&lifts, &word)?)
}

/// Milnor number as the winding number of the sampled commutator loop.
pub fn milnor_number_by_winding(rep: &SurfaceGroupRep) -> Result<i64, MilnorError> {
    milnor_number_by_winding_with_tolerance(rep, RELATION_TOL)
}

pub fn milnor_number_by_winding_with_tolerance(rep: &SurfaceGroupRep, tol: f64) -> Result<i64, MilnorError> {
    rep.check_relation(tol)?;
    let path = commutator_loop(rep)?;
    let lp = SampledLoop::sample(|t| path.at(t), tol)?;
    Ok(lift_loop(&lp)?)
}

pub fn check_milnor_inequality(rep: &SurfaceGroupRep) -> Result<bool, MilnorError> {
    Ok(milnor_number(rep)?.unsigned_abs() < rep.genus as u64)
}

/// Eigenpairs sorted by decreasing eigenvalue. Fails unless the eigenvalues
/// are distinct, real and (for exact scalars) rational.
fn eigen_basis<T: Scalar>(m: &M2<T>) -> Result<[(T, [T; 2]); 2], MilnorError> {
    let two = T::one() + T::one();
    let half_tr = m.trace() / two;
    let disc = half_tr.clone() * half_tr.clone() - m.det();
    let scale = m.to_mat2().norm_inf().max(1.0);
    if !(disc.to_f64() > 1e-12 * scale * scale) {
        return Err(MilnorError::DegenerateSpectrum);
    }
    let root = disc.sqrt().ok_or(MilnorError::DegenerateSpectrum)?;
    let vector = |lambda: T| {
        // Null vector of M − λI from whichever row is larger.
        let r1 = [m.b.clone(), lambda.clone() - m.a.clone()];
        let r2 = [lambda - m.d.clone(), m.c.clone()];
        let size = |r: &[T; 2]| r[0].abs().to_f64() + r[1].abs().to_f64();
        if size(&r1) >= size(&r2) {
            r1
        } else {
            r2
        }
    };
    let (hi, lo) = (half_tr.clone() + root.clone(), half_tr - root);
    Ok([(hi.clone(), vector(hi)), (lo.clone(), vector(lo))])
}

fn conjugator<T: Scalar>(m: &M2<T>, n: &M2<T>) -> Result<M2<T>, MilnorError> {
    let (mf, nf) = (m.to_mat2(), n.to_mat2());
    let scale = mf.norm_inf().max(nf.norm_inf()).max(1.0);
    if (mf.trace() - nf.trace()).abs() > CLASS_TOL * scale
        || (mf.det() - nf.det()).abs() > CLASS_TOL * scale * scale
    {
        return Err(MilnorError::NotSimilar(format!(
            "trace {} vs {}, det {} vs {}",
            mf.trace(),
            nf.trace(),
            mf.det(),
            nf.det()
        )));
    }
    let [(_, u1), (_, u2)] = eigen_basis(m)?;
    let [(_, w1), (_, w2)] = eigen_basis(n)?;
    let columns = |x: &[T; 2], y: &[T; 2]| M2::new(x[0].clone(), y[0].clone(), x[1].clone(), y[1].clone());
    let vm_inv = columns(&u1, &u2).inverse();
    let mut s = columns(&w1, &w2).mul(&vm_inv);
    if s.det() < T::zero() {
        s = columns(&w1, &[-w2[0].clone(), -w2[1].clone()]).mul(&vm_inv);
    }
    let err = m.conjugate_by(&s).to_mat2().distance(&nf);
    if err > RELATION_TOL * scale {
        return Err(MilnorError::NotSimilar(format!("conjugation residual {err}")));
    }
    Ok(s)
}

/// A matrix `S` with `det S = 1` and `S M S⁻¹ = N`, for `M`, `N` sharing
/// trace, determinant and two distinct real eigenvalues.
pub fn find_conjugator(m: &Mat2, n: &Mat2) -> Result<Mat2, MilnorError> {
    let s = conjugator(&M2::<f64>::from_mat2(m), &M2::from_mat2(n))?.to_mat2();
    Ok(s.scale(1.0 / s.det().sqrt()))
}

/// `σ x σ⁻¹`, with lift the unique lift of the conjugate within `π` of
/// `x.lift`.
pub fn conjugate(sigma: &Mat2, x: &CoveredElement) -> Result<CoveredElement, MilnorError> {
    Ok(Lifted::<f64>::from_covered(x).conjugate_by(&M2::from_mat2(sigma))?.covered())
}

/// `α₀ = (A₀, 0)`.
pub fn seed_alpha0() -> CoveredElement {
    CoveredElement { matrix: SEED_A0, lift: 0.0 }
}

/// `α₁ = (A₁, atan 3)`, the unique lift of `A₁` inside `K̃`.
pub fn seed_alpha1() -> CoveredElement {
    CoveredElement::principal(SEED_A1).expect("seed matrix has positive determinant")
}

/// A factorization `f₁ f₂ ∈ πK̃` with `f₁, f₂ ∈ K̃`, derived from `α₀α₁`.
fn seed_factorization<T: Scalar>() -> Result<[Lifted<T>; 3], MilnorError> {
    let a0 = Lifted::from_covered(&seed_alpha0());
    let a1 = Lifted::from_covered(&seed_alpha1());
    let product = a0.mul(&a1)?;
    if in_shifted_k_tilde(&product.covered()) {
        return Ok([a0, a1, product]);
    }
    // The other odd branch: (α₀α₁)⁻¹ = α₁⁻¹α₀⁻¹ then lies in πK̃.
    let inv = product.inv();
    if in_shifted_k_tilde(&inv.covered()) {
        return Ok([a1.inv(), a0.inv(), inv]);
    }
    Err(MilnorError::Internal(format!("seed product lift {} is outside both odd windows", product.lift)))
}

fn shifted_target(target: &CoveredElement) -> Result<(), MilnorError> {
    if in_shifted_k_tilde(target) {
        Ok(())
    } else {
        Err(MilnorError::NotInShiftedClass(format!(
            "trace {}, det {}, lift {}",
            target.matrix.trace(),
            target.matrix.det(),
            target.lift
        )))
    }
}

fn verify<T: Scalar>(label: &str, got: &Lifted<T>, want: &Lifted<T>) -> Result<(), MilnorError> {
    let (got, want) = (got.covered(), want.covered());
    let scale = want.matrix.norm_inf().max(1.0);
    if got.approx_eq(&want, RELATION_TOL * scale, 1e-6) {
        Ok(())
    } else {
        Err(MilnorError::Internal(format!(
            "{label}: reassembled ({}, {}) but expected ({}, {})",
            got.matrix, got.lift, want.matrix, want.lift
        )))
    }
}

fn productmil<T: Scalar>(target: &Lifted<T>) -> Result<(Lifted<T>, Lifted<T>), MilnorError> {
    shifted_target(&target.covered())?;
    let [f1, f2, seed] = seed_factorization::<T>()?;
    let s = conjugator(&seed.m, &target.m)?;
    let k1 = f1.conjugate_by(&s)?;
    let k2 = f2.conjugate_by(&s)?;
    if !in_k_tilde(&k1.covered()) || !in_k_tilde(&k2.covered()) {
        return Err(MilnorError::Internal("conjugated seed factors left K~".into()));
    }
    verify("product decomposition", &k1.mul(&k2)?, target)?;
    Ok((k1, k2))
}

fn commutator<T: Scalar>(target: &Lifted<T>) -> Result<(Lifted<T>, Lifted<T>), MilnorError> {
    let (b1, b3) = productmil(target)?;
    let b1_inv = b1.inv();
    let s = conjugator(&b1_inv.m, &b3.m)?;
    verify("conjugate of inverse factor", &b1_inv.conjugate_by(&s)?, &b3)?;
    let b2 = Lifted::principal(s)?;
    verify("commutator decomposition", &b1.commutator(&b2)?, target)?;
    Ok((b1, b2))
}

fn chain<T: Scalar>(n: usize) -> Result<Vec<Lifted<T>>, MilnorError> {
    if n == 0 {
        return Err(MilnorError::EmptyChain);
    }
    let alpha0 = Lifted::<T>::from_covered(&seed_alpha0());
    let (k1, k2) = productmil(&alpha0.deck_shift(1))?;
    let mut chain = vec![k1, k2];
    for _ in 1..n {
        let (g, g_prime) = productmil(&chain[0].deck_shift(1))?;
        chain.splice(0..1, [g, g_prime]);
    }
    verify("chain product", &product(&chain)?, &alpha0.deck_shift(n as i64))?;
    Ok(chain)
}

/// Writes an element of `πK̃` as a product `k₁k₂` of two elements of `K̃`.
pub fn productmil_decompose(target: &CoveredElement) -> Result<(CoveredElement, CoveredElement), MilnorError> {
    let (k1, k2) = productmil(&Lifted::<f64>::from_covered(target))?;
    Ok((k1.covered(), k2.covered()))
}

/// Writes an element of `πK̃` as a commutator `β₁β₂β₁⁻¹β₂⁻¹`.
pub fn commutator_decompose(target: &CoveredElement) -> Result<(CoveredElement, CoveredElement), MilnorError> {
    let (b1, b2) = commutator(&Lifted::<f64>::from_covered(target))?;
    Ok((b1.covered(), b2.covered()))
}

/// `n + 1` elements of `K̃` whose product is `nπ·α₀`, computed exactly.
pub fn chain_build(n: usize) -> Result<Vec<CoveredElement>, MilnorError> {
    Ok(chain::<BigRational>(n)?.iter().map(Lifted::covered).collect())
}

/// A representation of genus `g` whose Milnor number is `d`, for `|d| < g`.
/// The matrices are computed in exact rational arithmetic and rounded once.
pub fn build_representation(genus: usize, degree: i64) -> Result<SurfaceGroupRep, MilnorError> {
    if genus == 0 {
        return Err(MilnorError::ZeroGenus);
    }
    if degree.unsigned_abs() >= genus as u64 {
        return Err(MilnorError::Inadmissible { genus, degree });
    }
    if degree == 0 {
        return SurfaceGroupRep::trivial(genus);
    }
    if degree < 0 {
        return flip_orientation(&build_representation(genus, -degree)?);
    }

    let d = degree as usize;
    let alpha0 = Lifted::<BigRational>::from_covered(&seed_alpha0());
    // γ₁ ⋯ γ_d = (d − 1)π·α₀ and γ_{d+1} = α₀⁻¹, so ∏ γᵢ = (d − 1)π.
    let mut gammas = if d == 1 { vec![alpha0.clone()] } else { chain(d - 1)? };
    gammas.push(alpha0.inv());

    let mut a = Vec::with_capacity(genus);
    let mut b = Vec::with_capacity(genus);
    for gamma in &gammas {
        let (alpha, beta) = commutator(&gamma.deck_shift(1))?;
        a.push(alpha.m.to_mat2());
        b.push(beta.m.to_mat2());
    }
    a.resize(genus, Mat2::IDENTITY);
    b.resize(genus, Mat2::IDENTITY);
    let rep = SurfaceGroupRep::unchecked(genus, a, b)?.closed_up();
    rep.check_relation(RELATION_TOL)?;
    Ok(rep)
}

/// Reverses the order of the generator pairs and swaps each `(Aᵢ, Bᵢ)`.
/// The relator is inverted, so the Milnor number changes sign.
pub fn flip_orientation(rep: &SurfaceGroupRep) -> Result<SurfaceGroupRep, MilnorError> {
    let a = rep.b.iter().rev().copied().collect();
    let b = rep.a.iter().rev().copied().collect();
    SurfaceGroupRep::new(rep.genus, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liftgroup::lift_mul;

    #[test]
    fn seed_matrices_and_tags() {
        assert_eq!(SEED_A0 * SEED_A1, SEED_A2);
        assert_eq!(ConjClassTag::of(&SEED_A0), Some(ConjClassTag::K));
        assert_eq!(ConjClassTag::of(&SEED_A1), Some(ConjClassTag::K));
        assert_eq!(ConjClassTag::of(&SEED_A2), Some(ConjClassTag::SHIFTED_K));
        assert_eq!(ConjClassTag::of(&Mat2::IDENTITY), None);
        let product = lift_mul(&seed_alpha0(), &seed_alpha1()).unwrap();
        assert!(in_shifted_k_tilde(&product));
    }

    #[test]
    fn trivial_and_abelian_reps_have_zero_degree() {
        for g in 1..4 {
            let rep = SurfaceGroupRep::trivial(g).unwrap();
            assert_eq!(milnor_number(&rep).unwrap(), 0);
            assert!(check_milnor_inequality(&rep).unwrap());
        }
        let rot = SurfaceGroupRep::new(1, vec![Mat2::rotation(0.7)], vec![Mat2::rotation(2.1)]).unwrap();
        assert_eq!(milnor_number(&rot).unwrap(), 0);
        let diag = SurfaceGroupRep::new(
            3,
            vec![Mat2::diag(2.0, 3.0), Mat2::diag(0.1, 5.0), Mat2::diag(1.0, 1.0)],
            vec![Mat2::diag(7.0, 0.5), Mat2::diag(4.0, 4.0), Mat2::diag(0.3, 0.2)],
        )
        .unwrap();
        assert_eq!(milnor_number(&diag).unwrap(), 0);
    }

    #[test]
    fn relation_is_enforced() {
        let err = SurfaceGroupRep::new(1, vec![SEED_A0], vec![SEED_A1]).unwrap_err();
        assert!(matches!(err, MilnorError::RelationViolated { .. }));
        let err = SurfaceGroupRep::new(2, vec![Mat2::IDENTITY], vec![Mat2::IDENTITY]).unwrap_err();
        assert!(matches!(err, MilnorError::GenusMismatch { .. }));
        let err = SurfaceGroupRep::new(1, vec![Mat2::diag(-1.0, 1.0)], vec![Mat2::IDENTITY]).unwrap_err();
        assert!(matches!(err, MilnorError::Lift(LiftError::NonPositiveDeterminant(_))));
    }

    #[test]
    fn conjugator_examples() {
        let s = find_conjugator(&SEED_A0, &SEED_A0).unwrap();
        assert!(s.distance(&Mat2::IDENTITY) < 1e-14);

        let (m, n) = (Mat2::diag(2.0, 0.5), Mat2::diag(0.5, 2.0));
        let quarter = Mat2::new(0.0, 1.0, -1.0, 0.0);
        assert!((quarter * m * quarter.inverse()).distance(&n) < 1e-15);
        let s = find_conjugator(&m, &n).unwrap();
        assert!(s.det() > 0.0);
        assert!((s * m * s.inverse()).distance(&n) < 1e-12);

        let s = find_conjugator(&SEED_A0, &SEED_A1).unwrap();
        assert!((s.det() - 1.0).abs() < 1e-12);
        assert!((s * SEED_A0 * s.inverse()).distance(&SEED_A1) < 1e-12);
    }

    #[test]
    fn conjugator_errors() {
        assert!(matches!(find_conjugator(&SEED_A0, &SEED_A2), Err(MilnorError::NotSimilar(_))));
        let rot = Mat2::rotation(0.3);
        assert!(matches!(find_conjugator(&rot, &rot), Err(MilnorError::DegenerateSpectrum)));
        assert!(matches!(
            find_conjugator(&Mat2::IDENTITY, &Mat2::IDENTITY),
            Err(MilnorError::DegenerateSpectrum)
        ));
    }

    #[test]
    fn productmil_on_seed() {
        let target = lift_mul(&seed_alpha0(), &seed_alpha1()).unwrap();
        let (k1, k2) = productmil_decompose(&target).unwrap();
        assert!(k1.approx_eq(&seed_alpha0(), 1e-12, 1e-12));
        assert!(k2.approx_eq(&seed_alpha1(), 1e-12, 1e-12));
    }

    #[test]
    fn productmil_on_conjugate_target() {
        let s = Mat2::new(1.0, 2.0, 0.5, 3.0);
        let base = lift_mul(&seed_alpha0(), &seed_alpha1()).unwrap();
        let target = conjugate(&s, &base).unwrap();
        let (k1, k2) = productmil_decompose(&target).unwrap();
        assert!(in_k_tilde(&k1) && in_k_tilde(&k2));
        assert!(lift_mul(&k1, &k2).unwrap().approx_eq(&target, 1e-10, 1e-9));
    }

    #[test]
    fn decomposition_rejects_unshifted_targets() {
        let err = productmil_decompose(&seed_alpha0()).unwrap_err();
        assert!(matches!(err, MilnorError::NotInShiftedClass(_)));
        let wrong_branch = deck_shift(&lift_mul(&seed_alpha0(), &seed_alpha1()).unwrap(), 2);
        assert!(commutator_decompose(&wrong_branch).is_err());
        let normalized = normalize_shifted(&wrong_branch).unwrap();
        assert!(commutator_decompose(&normalized).is_ok());
    }

    #[test]
    fn commutator_decomposition_round_trip() {
        let target = lift_mul(&seed_alpha0(), &seed_alpha1()).unwrap();
        let (b1, b2) = commutator_decompose(&target).unwrap();
        let c = lift_commutator(&b1, &b2).unwrap();
        assert!(c.approx_eq(&target, 1e-10, 1e-9));
    }

    #[test]
    fn chain_products() {
        for n in 1..=3 {
            let chain = chain_build(n).unwrap();
            assert_eq!(chain.len(), n + 1);
            assert!(chain.iter().all(in_k_tilde));
            let p = lift_product(&chain).unwrap();
            assert!((p.lift - n as f64 * PI).abs() < 1e-9);
        }
        assert_eq!(chain_build(0), Err(MilnorError::EmptyChain));
    }

    #[test]
    fn build_and_flip() {
        let rep = build_representation(2, 1).unwrap();
        assert_eq!(milnor_number(&rep).unwrap(), 1);
        let flipped = flip_orientation(&rep).unwrap();
        assert_eq!(milnor_number(&flipped).unwrap(), -1);
        assert_eq!(milnor_number(&flip_orientation(&flipped).unwrap()).unwrap(), 1);
        assert_eq!(flip_orientation(&flipped).unwrap(), rep);

        let rep = build_representation(4, -3).unwrap();
        assert_eq!(milnor_number(&rep).unwrap(), -3);
        assert!(check_milnor_inequality(&build_representation(3, 2).unwrap()).unwrap());
    }

    #[test]
    fn inadmissible_degrees() {
        assert!(matches!(build_representation(2, 2), Err(MilnorError::Inadmissible { .. })));
        assert!(matches!(build_representation(1, -1), Err(MilnorError::Inadmissible { .. })));
        assert_eq!(build_representation(1, 0).unwrap(), SurfaceGroupRep::trivial(1).unwrap());
    }

    #[test]
    fn winding_oracle_on_genus_two() {
        let rep = build_representation(2, 1).unwrap();
        assert_eq!(milnor_number_by_winding(&rep).unwrap(), 1);
    }

    #[test]
    fn json_schema() {
        let rep = SurfaceGroupRep::trivial(1).unwrap();
        let text = serde_json::to_string(&rep).unwrap();
        assert_eq!(text, r#"{"genus":1,"A":[[1.0,0.0,0.0,1.0]],"B":[[1.0,0.0,0.0,1.0]]}"#);
        let back: SurfaceGroupRep = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rep);
        let bad: Result<SurfaceGroupRep, _> = serde_json::from_str(r#"{"genus":2,"A":[],"B":[]}"#);
        assert!(bad.is_err());
    }
}
