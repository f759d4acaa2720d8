//! 2×2 matrices over a scalar field, in `f64` or exact rationals.
//!
//! Every `f64` is a dyadic rational, so products and inverses of `f64`
//! matrices can be evaluated without rounding and rounded once at the end.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::liftgroup::Mat2;

pub trait Scalar:
    Clone
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Exact for rationals.
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn zero() -> Self;
    fn one() -> Self;
    /// `None` for negative input, and for rationals that are not squares.
    fn sqrt(&self) -> Option<Self>;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| f64::sqrt(*self))
    }
}

impl Scalar for BigRational {
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite matrix entry")
    }
    fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let exact = |n: &BigInt| {
            let r = n.sqrt();
            (&r * &r == *n).then_some(r)
        };
        Some(BigRational::new(exact(self.numer())?, exact(self.denom())?))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct M2<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Scalar> M2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        M2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        M2::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn from_mat2(m: &Mat2) -> Self {
        M2::new(T::from_f64(m.a), T::from_f64(m.b), T::from_f64(m.c), T::from_f64(m.d))
    }

    pub fn to_mat2(&self) -> Mat2 {
        Mat2::new(self.a.to_f64(), self.b.to_f64(), self.c.to_f64(), self.d.to_f64())
    }

    pub fn mul(&self, o: &M2<T>) -> M2<T> {
        M2::new(
            self.a.clone() * o.a.clone() + self.b.clone() * o.c.clone(),
            self.a.clone() * o.b.clone() + self.b.clone() * o.d.clone(),
            self.c.clone() * o.a.clone() + self.d.clone() * o.c.clone(),
            self.c.clone() * o.b.clone() + self.d.clone() * o.d.clone(),
        )
    }

    pub fn det(&self) -> T {
        self.a.clone() * self.d.clone() - self.b.clone() * self.c.clone()
    }

    pub fn trace(&self) -> T {
        self.a.clone() + self.d.clone()
    }

    pub fn neg(&self) -> M2<T> {
        M2::new(-self.a.clone(), -self.b.clone(), -self.c.clone(), -self.d.clone())
    }

    pub fn inverse(&self) -> M2<T> {
        let det = self.det();
        M2::new(
            self.d.clone() / det.clone(),
            -self.b.clone() / det.clone(),
            -self.c.clone() / det.clone(),
            self.a.clone() / det,
        )
    }

    pub fn sub(&self, o: &M2<T>) -> M2<T> {
        M2::new(
            self.a.clone() - o.a.clone(),
            self.b.clone() - o.b.clone(),
            self.c.clone() - o.c.clone(),
            self.d.clone() - o.d.clone(),
        )
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> T {
        let r1 = self.a.abs() + self.b.abs();
        let r2 = self.c.abs() + self.d.abs();
        if r1 >= r2 {
            r1
        } else {
            r2
        }
    }

    pub fn conjugate_by(&self, s: &M2<T>) -> M2<T> {
        s.mul(self).mul(&s.inverse())
    }
}

/// A matrix `2^exp · m` with integer entries. Every `f64` matrix is exactly of
/// this form, and products stay in it without any rounding or gcd work.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicMat {
    m: [BigInt; 4],
    exp: i64,
}

impl DyadicMat {
    pub fn identity() -> Self {
        DyadicMat { m: [BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one()], exp: 0 }
    }

    pub fn from_mat2(x: &Mat2) -> Self {
        let parts = [x.a, x.b, x.c, x.d].map(|v| {
            let (mantissa, exponent, sign) = num_traits::float::Float::integer_decode(v);
            (BigInt::from(mantissa) * sign, exponent as i64)
        });
        let exp = parts.iter().filter(|(m, _)| !m.is_zero()).map(|&(_, e)| e).min().unwrap_or(0);
        let m = parts.map(|(mantissa, e)| if mantissa.is_zero() { mantissa } else { mantissa << (e - exp) as usize });
        DyadicMat { m, exp }
    }

    pub fn mul(&self, o: &DyadicMat) -> DyadicMat {
        let [a, b, c, d] = &self.m;
        let [e, f, g, h] = &o.m;
        DyadicMat { m: [a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h], exp: self.exp + o.exp }
    }

    /// `det · inverse`.
    pub fn adjugate(&self) -> DyadicMat {
        let [a, b, c, d] = &self.m;
        DyadicMat { m: [d.clone(), -b, -c, a.clone()], exp: self.exp }
    }

    pub fn det(&self) -> BigRational {
        let [a, b, c, d] = &self.m;
        scaled(a * d - b * c, 2 * self.exp)
    }

    pub fn to_rational(&self) -> M2<BigRational> {
        let [a, b, c, d] = self.m.clone().map(|v| scaled(v, self.exp));
        M2::new(a, b, c, d)
    }
}

fn scaled(v: BigInt, exp: i64) -> BigRational {
    if exp >= 0 {
        BigRational::from_integer(v << exp as usize)
    } else {
        BigRational::new(v, BigInt::one() << (-exp) as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rational_square_roots() {
        assert_eq!(Scalar::sqrt(&q(9, 16)), Some(q(3, 4)));
        assert_eq!(Scalar::sqrt(&q(2, 1)), None);
        assert_eq!(Scalar::sqrt(&q(-1, 4)), None);
        assert_eq!(Scalar::sqrt(&4.0_f64), Some(2.0));
    }

    #[test]
    fn f64_round_trip_is_exact() {
        let m = Mat2::new(0.1, -2.5, 1e-300, 7.0);
        assert_eq!(M2::<BigRational>::from_mat2(&m).to_mat2(), m);
    }

    #[test]
    fn exact_inverse() {
        let m = M2::new(q(-5, 2), q(9, 2), q(-3, 1), q(5, 1));
        assert_eq!(m.mul(&m.inverse()), M2::identity());
        assert_eq!(m.norm_inf(), q(8, 1));
    }
    #[test]
    fn dyadic_products_are_exact() {
        let (x, y) = (Mat2::new(0.1, -3.0, 2.5e-8, 7.0), Mat2::new(1.0 / 3.0, 4.0, -1e10, 0.0));
        let d = DyadicMat::from_mat2(&x).mul(&DyadicMat::from_mat2(&y));
        let r = M2::<BigRational>::from_mat2(&x).mul(&M2::from_mat2(&y));
        assert_eq!(d.to_rational(), r);
        let adj = DyadicMat::from_mat2(&x).adjugate().to_rational();
        let inv = M2::<BigRational>::from_mat2(&x).inverse();
        let det = DyadicMat::from_mat2(&x).det();
        assert_eq!(adj, M2::new(inv.a * det.clone(), inv.b * det.clone(), inv.c * det.clone(), inv.d * det));
        assert_eq!(DyadicMat::from_mat2(&Mat2::IDENTITY).to_rational(), M2::identity());
    }
}
