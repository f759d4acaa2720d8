//! Elements of the cover whose matrices live over a generic scalar field.
//!
//! The decompositions run either in `f64` or in exact rationals. Every
//! matrix they produce has eigenvalues `±2, ±1/2`, so the rational version
//! never needs an irrational square root and builds representations whose
//! relation holds exactly before rounding.

use crate::exact::{Scalar, M2};
use crate::liftgroup::{lift_mul, wrap_angle, CoveredElement, LiftError};

/// An element of the cover whose matrix is held in `T`; the lift is always a
/// float computed from the rounded matrix.
#[derive(Clone, Debug)]
pub struct Lifted<T> {
    pub m: M2<T>,
    pub lift: f64,
}

impl<T: Scalar> Lifted<T> {
    pub fn from_covered(x: &CoveredElement) -> Self {
        Lifted { m: M2::from_mat2(&x.matrix), lift: x.lift }
    }

    pub fn covered(&self) -> CoveredElement {
        CoveredElement { matrix: self.m.to_mat2(), lift: self.lift }
    }

    pub fn principal(m: M2<T>) -> Result<Self, LiftError> {
        let lift = m.to_mat2().retract()?;
        Ok(Lifted { m, lift })
    }

    /// The lift of `m` closest to `near`; `near` must be within `π` of it.
    pub fn relift(m: M2<T>, near: f64) -> Result<Self, LiftError> {
        let lift = near + wrap_angle(m.to_mat2().retract()? - near);
        Ok(Lifted { m, lift })
    }

    pub fn mul(&self, o: &Lifted<T>) -> Result<Self, LiftError> {
        let approx = lift_mul(&self.covered(), &o.covered())?.lift;
        Lifted::relift(self.m.mul(&o.m), approx)
    }

    pub fn inv(&self) -> Self {
        Lifted { m: self.m.inverse(), lift: -self.lift }
    }

    pub fn deck_shift(&self, n: i64) -> Self {
        let m = if n % 2 == 0 { self.m.clone() } else { self.m.neg() };
        Lifted { m, lift: self.lift + n as f64 * std::f64::consts::PI }
    }

    /// `σ x σ⁻¹`, lifted within `π` of `x`.
    pub fn conjugate_by(&self, sigma: &M2<T>) -> Result<Self, LiftError> {
        Lifted::relift(self.m.conjugate_by(sigma), self.lift)
    }

    pub fn commutator(&self, o: &Lifted<T>) -> Result<Self, LiftError> {
        self.mul(o)?.mul(&self.inv())?.mul(&o.inv())
    }
}

pub fn product<T: Scalar>(items: &[Lifted<T>]) -> Result<Lifted<T>, LiftError> {
    items.iter().try_fold(Lifted { m: M2::identity(), lift: 0.0 }, |acc, x| acc.mul(x))
}
