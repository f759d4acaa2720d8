//! Arithmetic in the universal cover of `GL⁺(2,ℝ)`.
//!
//! An element of the cover is stored as a pair `(matrix, lift)` where `lift`
//! is a real number projecting to the rotation angle of the polar factor of
//! `matrix`. The retraction onto `SO(2)` has the closed form
//! `atan2(b − c, a + d)`, and the angle defect of a product is strictly
//! smaller than `π/2`, which pins down the lift of every product uniquely.
//!
//! Rotations use the convention `R(α) = [[cos α, sin α], [−sin α, cos α]]`.
//!
//! [`lift_loop`] is an independent oracle: it unwinds the retraction angle
//! along a densely sampled path instead of using the defect rule.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fmt;
use std::ops::Mul;

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{DyadicMat, M2};

/// Rotation-consistency tolerance between a lift and the retraction angle.
pub const ANGLE_TOL: f64 = 1e-9;
/// Maximum residue accepted when rounding a lift to a multiple of `2π`.
pub const WINDING_TOL: f64 = 1e-3;
/// Distance from `π/2` at which [`lift_mul`] switches to split multiplication.
pub const DEFECT_GUARD: f64 = 1e-6;

/// Largest retraction-angle jump allowed between adjacent loop samples
/// before the adaptive sampler subdivides.
const SAMPLE_STEP: f64 = PI / 8.0;
const MAX_SUBDIVISION_DEPTH: u32 = 40;
/// Largest change of `ln |(a + d, b − c)|` between adjacent samples.
const SIZE_STEP: f64 = std::f64::consts::LN_2;
const INITIAL_SAMPLES: usize = 32;
const MAX_HALVINGS: u32 = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiftError {
    #[error("matrix is not in GL+(2,R): determinant {0} is not positive")]
    NonPositiveDeterminant(f64),
    #[error("lift {lift} is inconsistent with rotation angle {angle}")]
    InconsistentLift { lift: f64, angle: f64 },
    #[error("angle defect {defect} could not be resolved below pi/2")]
    NumericalInstability { defect: f64 },
    #[error("adjacent samples differ by {step} rad in rotation angle (must stay below pi/2)")]
    AdjacencyViolated { step: f64 },
    #[error("winding residue {residue} exceeds tolerance; sampling is insufficient")]
    SubdivisionInsufficient { residue: f64 },
    #[error("loop is not closed at the identity (deviation {0})")]
    NotClosed(f64),
    #[error("a sampled loop needs at least two samples")]
    TooFewSamples,
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// A real 2×2 matrix stored row-major as `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl From<[f64; 4]> for Mat2 {
    fn from([a, b, c, d]: [f64; 4]) -> Self {
        Mat2 { a, b, c, d }
    }
}

impl From<Mat2> for [f64; 4] {
    fn from(m: Mat2) -> Self {
        [m.a, m.b, m.c, m.d]
    }
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub const fn diag(x: f64, y: f64) -> Self {
        Mat2::new(x, 0.0, 0.0, y)
    }

    /// `R(α) = [[cos α, sin α], [−sin α, cos α]]`.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Mat2::new(c, s, -s, c)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.a, self.c, self.b, self.d)
    }

    pub fn scale(&self, s: f64) -> Self {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Inverse; the caller is responsible for a non-zero determinant.
    pub fn inverse(&self) -> Self {
        let det = self.det();
        Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det)
    }

    pub fn sub(&self, other: &Mat2) -> Self {
        Mat2::new(self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (self.a.abs() + self.b.abs()).max(self.c.abs() + self.d.abs())
    }

    pub fn distance(&self, other: &Mat2) -> f64 {
        self.sub(other).norm_inf()
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    fn check_positive(&self) -> Result<(), LiftError> {
        let det = self.det();
        if det > 0.0 && self.is_finite() {
            Ok(())
        } else {
            Err(LiftError::NonPositiveDeterminant(det))
        }
    }

    /// Angle of the rotation part of the polar decomposition, in `(−π, π]`.
    pub fn retract(&self) -> Result<f64, LiftError> {
        self.check_positive()?;
        let x = self.a + self.d;
        let y = self.b - self.c;
        // det > 0 forces x² + y² > 0.
        debug_assert!(x * x + y * y > 0.0);
        Ok(y.atan2(x))
    }

    /// Retraction angle for points of a path already known to stay in
    /// `GL⁺(2,ℝ)`. The determinant test only rejects values that are negative
    /// beyond rounding, since long products with large entries lose the
    /// determinant to cancellation while the angle stays accurate.
    pub fn path_angle(&self) -> Result<f64, LiftError> {
        let det = self.det();
        let slack = 8.0 * f64::EPSILON * ((self.a * self.d).abs() + (self.b * self.c).abs());
        let x = self.a + self.d;
        let y = self.b - self.c;
        if !self.is_finite() || det < -slack || (det <= 0.0 && slack == 0.0) || x == 0.0 && y == 0.0 {
            return Err(LiftError::NonPositiveDeterminant(det));
        }
        Ok(y.atan2(x))
    }

    /// Polar decomposition `self = R(angle) · P` with `P` symmetric positive definite.
    pub fn polar(&self) -> Result<(f64, Mat2), LiftError> {
        let angle = self.retract()?;
        let p = Mat2::rotation(-angle) * *self;
        let off = 0.5 * (p.b + p.c);
        Ok((angle, Mat2::new(p.a, off, off, p.d)))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// Spectral data of a symmetric positive-definite 2×2 matrix, used to take
/// real powers `P^t`.
#[derive(Clone, Copy, Debug)]
struct SpdPower {
    large: f64,
    small: f64,
    cos: f64,
    sin: f64,
}

impl SpdPower {
    fn new(p: &Mat2) -> Self {
        let mean = 0.5 * (p.a + p.d);
        let half_gap = 0.5 * (p.a - p.d);
        let radius = half_gap.hypot(p.b);
        let psi = 0.5 * p.b.atan2(half_gap);
        SpdPower { large: mean + radius, small: mean - radius, cos: psi.cos(), sin: psi.sin() }
    }

    fn pow(&self, t: f64) -> Mat2 {
        let l1 = self.large.powf(t);
        let l2 = self.small.powf(t);
        let (c, s) = (self.cos, self.sin);
        Mat2::new(
            l1 * c * c + l2 * s * s,
            (l1 - l2) * c * s,
            (l1 - l2) * c * s,
            l1 * s * s + l2 * c * c,
        )
    }
}

/// Real power of a symmetric positive-definite matrix.
pub fn spd_pow(p: &Mat2, t: f64) -> Mat2 {
    SpdPower::new(p).pow(t)
}

/// An element of the universal cover: a matrix together with a lift of its
/// retraction angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveredElement {
    pub matrix: Mat2,
    pub lift: f64,
}

impl CoveredElement {
    pub const IDENTITY: CoveredElement = CoveredElement { matrix: Mat2::IDENTITY, lift: 0.0 };

    /// Builds an element after checking that `lift` projects to the rotation
    /// part of `matrix`.
    pub fn new(matrix: Mat2, lift: f64) -> Result<Self, LiftError> {
        let angle = matrix.retract()?;
        if wrap_angle(lift - angle).abs() > ANGLE_TOL {
            return Err(LiftError::InconsistentLift { lift, angle });
        }
        Ok(CoveredElement { matrix, lift })
    }

    /// The lift whose angle lies in `(−π, π]`.
    pub fn principal(matrix: Mat2) -> Result<Self, LiftError> {
        let lift = matrix.retract()?;
        Ok(CoveredElement { matrix, lift })
    }

    pub fn rotation(angle: f64) -> Self {
        CoveredElement { matrix: Mat2::rotation(angle), lift: angle }
    }

    /// True when both the matrix and the lift agree within the given tolerances.
    pub fn approx_eq(&self, other: &CoveredElement, matrix_tol: f64, lift_tol: f64) -> bool {
        self.matrix.distance(&other.matrix) <= matrix_tol && (self.lift - other.lift).abs() <= lift_tol
    }
}

/// The lift `φ̃(angle)` of the rotation `R(angle)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationLift {
    pub angle: f64,
}

impl RotationLift {
    pub fn new(angle: f64) -> Self {
        RotationLift { angle }
    }
}

/// Product using the nearest-representative rule, reporting the defect.
fn nearest_product(x: &CoveredElement, y: &CoveredElement) -> Result<(CoveredElement, f64), LiftError> {
    let matrix = x.matrix * y.matrix;
    let base = x.lift + y.lift;
    let defect = wrap_angle(matrix.retract()? - base);
    Ok((CoveredElement { matrix, lift: base + defect }, defect))
}

/// Multiplication in the cover.
///
/// The lift of `xy` is the unique lift of `retract(XY)` within `π/2` of
/// `x.lift + y.lift`. Near the boundary of that window the product is
/// rebuilt from the polar factors of `y` instead.
pub fn lift_mul(x: &CoveredElement, y: &CoveredElement) -> Result<CoveredElement, LiftError> {
    let (product, defect) = nearest_product(x, y)?;
    if defect.abs() < FRAC_PI_2 - DEFECT_GUARD {
        return Ok(product);
    }
    split_mul(x, y)
}

/// `x · y` computed as `(x · φ̃(y.lift)) · Q · Q ⋯ Q` with `Q` a `2^k`-th root
/// of the positive-definite polar factor of `y`, refining `k` until every
/// partial defect is below `π/4`.
pub(crate) fn split_mul(x: &CoveredElement, y: &CoveredElement) -> Result<CoveredElement, LiftError> {
    let (_, spd) = y.matrix.polar()?;
    let spectral = SpdPower::new(&spd);
    let rotated = lift_mul_rotation(x, RotationLift::new(y.lift));
    let mut worst = f64::NAN;

    'refine: for halvings in 1..=MAX_HALVINGS {
        let root = CoveredElement { matrix: spectral.pow(0.5f64.powi(halvings as i32)), lift: 0.0 };
        let mut acc = rotated;
        for _ in 0..(1u64 << halvings) {
            let (next, defect) = nearest_product(&acc, &root)?;
            if defect.abs() >= FRAC_PI_4 {
                worst = defect;
                continue 'refine;
            }
            acc = next;
        }
        // Re-anchor on the exactly multiplied matrix.
        let matrix = x.matrix * y.matrix;
        let lift = acc.lift + wrap_angle(matrix.retract()? - acc.lift);
        return Ok(CoveredElement { matrix, lift });
    }
    Err(LiftError::NumericalInstability { defect: worst })
}

/// `(X · R(r.angle), x.lift + r.angle)`; exact because the retraction is
/// equivariant under right multiplication by rotations.
pub fn lift_mul_rotation(x: &CoveredElement, r: RotationLift) -> CoveredElement {
    CoveredElement { matrix: x.matrix * Mat2::rotation(r.angle), lift: x.lift + r.angle }
}

pub fn lift_inv(x: &CoveredElement) -> CoveredElement {
    CoveredElement { matrix: x.matrix.inverse(), lift: -x.lift }
}

/// `x y x⁻¹ y⁻¹`.
pub fn lift_commutator(x: &CoveredElement, y: &CoveredElement) -> Result<CoveredElement, LiftError> {
    let xy = lift_mul(x, y)?;
    let xyx = lift_mul(&xy, &lift_inv(x))?;
    lift_mul(&xyx, &lift_inv(y))
}

/// Multiplication by the central element lying over `R(nπ) = (−1)ⁿ I`.
pub fn deck_shift(x: &CoveredElement, n: i64) -> CoveredElement {
    let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    CoveredElement { matrix: x.matrix.scale(sign), lift: x.lift + n as f64 * PI }
}

/// Product of a list of elements from left to right.
pub fn lift_product<'a, I>(elements: I) -> Result<CoveredElement, LiftError>
where
    I: IntoIterator<Item = &'a CoveredElement>,
{
    elements.into_iter().try_fold(CoveredElement::IDENTITY, |acc, e| lift_mul(&acc, e))
}

/// The path `t ↦ R(t·lift) · P^t` from the identity to `matrix = R(lift) · P`.
///
/// Its continuous retraction lift is `t · lift`, so it represents the given
/// element of the cover.
#[derive(Clone, Copy, Debug)]
pub struct CanonicalPath {
    lift: f64,
    spd: SpdPower,
    endpoint: Mat2,
}

impl CanonicalPath {
    pub fn new(x: &CoveredElement) -> Result<Self, LiftError> {
        let (_, spd) = x.matrix.polar()?;
        Ok(CanonicalPath { lift: x.lift, spd: SpdPower::new(&spd), endpoint: x.matrix })
    }

    pub fn at(&self, t: f64) -> Mat2 {
        if t <= 0.0 {
            return Mat2::IDENTITY;
        }
        if t >= 1.0 {
            return self.endpoint;
        }
        Mat2::rotation(t * self.lift) * self.spd.pow(t)
    }
}

/// One factor of a word: an index into an element list, possibly inverted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Letter {
    pub index: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(index: usize) -> Self {
        Letter { index, inverse: false }
    }

    pub fn inv(index: usize) -> Self {
        Letter { index, inverse: true }
    }
}

/// Pointwise product of canonical paths following a word.
#[derive(Clone, Debug)]
pub struct WordPath {
    paths: Vec<CanonicalPath>,
    word: Vec<Letter>,
}

impl WordPath {
    pub fn new(elements: &[CoveredElement], word: &[Letter]) -> Result<Self, LiftError> {
        let paths = elements.iter().map(CanonicalPath::new).collect::<Result<Vec<_>, _>>()?;
        assert!(word.iter().all(|l| l.index < paths.len()), "word refers to a missing element");
        Ok(WordPath { paths, word: word.to_vec() })
    }

    /// The product is formed exactly from the `f64` factor values and
    /// rounded once, so long words of large matrices still close up.
    /// Inverses enter as adjugates and the determinants are divided out at
    /// the end.
    pub fn at(&self, t: f64) -> Mat2 {
        let mut scale = BigRational::one();
        let product = self.word.iter().fold(DyadicMat::identity(), |acc, letter| {
            let m = DyadicMat::from_mat2(&self.paths[letter.index].at(t));
            if letter.inverse {
                scale *= m.det();
                acc.mul(&m.adjugate())
            } else {
                acc.mul(&m)
            }
        });
        let p = product.to_rational();
        M2::new(p.a / scale.clone(), p.b / scale.clone(), p.c / scale.clone(), p.d / scale).to_mat2()
    }
}

/// Samples `path` on `[0, 1]`. Each interval is split at its midpoint until,
/// on both halves, the retraction angle moves by less than `π/8` and the
/// length of `(a + d, b − c)` changes by less than a factor of two. The
/// midpoint test catches fast turns that leave the interval endpoints at
/// nearly the same angle.
pub fn sample_path<F>(path: F) -> Result<Vec<Mat2>, LiftError>
where
    F: Fn(f64) -> Mat2,
{
    #[derive(Clone, Copy)]
    struct Point {
        t: f64,
        m: Mat2,
        angle: f64,
        size: f64,
    }

    fn point<F: Fn(f64) -> Mat2>(path: &F, t: f64) -> Result<Point, LiftError> {
        let m = path(t);
        let angle = m.path_angle()?;
        Ok(Point { t, m, angle, size: (m.a + m.d).hypot(m.b - m.c) })
    }

    fn smooth(p: &Point, q: &Point) -> bool {
        wrap_angle(q.angle - p.angle).abs() < SAMPLE_STEP && (q.size / p.size).ln().abs() < SIZE_STEP
    }

    fn refine<F: Fn(f64) -> Mat2>(path: &F, p0: Point, p1: Point, depth: u32, out: &mut Vec<Mat2>) -> Result<(), LiftError> {
        let mid = point(path, 0.5 * (p0.t + p1.t))?;
        if smooth(&p0, &mid) && smooth(&mid, &p1) {
            out.push(mid.m);
            out.push(p1.m);
            return Ok(());
        }
        if depth >= MAX_SUBDIVISION_DEPTH {
            return Err(LiftError::AdjacencyViolated { step: wrap_angle(p1.angle - p0.angle) });
        }
        refine(path, p0, mid, depth + 1, out)?;
        refine(path, mid, p1, depth + 1, out)
    }

    let mut out = Vec::with_capacity(4 * INITIAL_SAMPLES);
    let mut prev = point(&path, 0.0)?;
    out.push(prev.m);
    for k in 1..=INITIAL_SAMPLES {
        let next = point(&path, k as f64 / INITIAL_SAMPLES as f64)?;
        refine(&path, prev, next, 0, &mut out)?;
        prev = next;
    }
    Ok(out)
}

/// Continuous lift of the retraction angle along a sampled path, starting
/// from the principal angle of the first sample.
pub fn lift_path(samples: &[Mat2]) -> Result<f64, LiftError> {
    let (first, rest) = samples.split_first().ok_or(LiftError::TooFewSamples)?;
    let mut prev = first.path_angle()?;
    let mut total = prev;
    for m in rest {
        let angle = m.path_angle()?;
        let step = wrap_angle(angle - prev);
        if step.abs() >= FRAC_PI_2 {
            return Err(LiftError::AdjacencyViolated { step });
        }
        total += step;
        prev = angle;
    }
    Ok(total)
}

/// A closed sampled path based at the identity.
#[derive(Clone, Debug)]
pub struct SampledLoop {
    samples: Vec<Mat2>,
}

impl SampledLoop {
    /// Wraps samples after checking closure (both ends within `closure_tol` of
    /// the identity) and the adjacency bound.
    pub fn new(samples: Vec<Mat2>, closure_tol: f64) -> Result<Self, LiftError> {
        if samples.len() < 2 {
            return Err(LiftError::TooFewSamples);
        }
        for end in [samples[0], samples[samples.len() - 1]] {
            let dev = end.distance(&Mat2::IDENTITY);
            if !(dev <= closure_tol) {
                return Err(LiftError::NotClosed(dev));
            }
        }
        let mut prev = samples[0].path_angle()?;
        for m in &samples[1..] {
            let angle = m.path_angle()?;
            let step = wrap_angle(angle - prev);
            if step.abs() >= FRAC_PI_2 {
                return Err(LiftError::AdjacencyViolated { step });
            }
            prev = angle;
        }
        Ok(SampledLoop { samples })
    }

    /// Adaptively samples a loop given as a function on `[0, 1]`.
    pub fn sample<F>(path: F, closure_tol: f64) -> Result<Self, LiftError>
    where
        F: Fn(f64) -> Mat2,
    {
        SampledLoop::new(sample_path(path)?, closure_tol)
    }

    pub fn samples(&self) -> &[Mat2] {
        &self.samples
    }
}

/// Winding number of the retraction angle around a loop.
pub fn lift_loop(lp: &SampledLoop) -> Result<i64, LiftError> {
    let start = lp.samples[0].path_angle()?;
    let turns = (lift_path(&lp.samples)? - start) / TAU;
    let rounded = turns.round();
    let residue = (turns - rounded).abs();
    if residue >= WINDING_TOL {
        return Err(LiftError::SubdivisionInsufficient { residue });
    }
    Ok(rounded as i64)
}
