//! Differential geometry on a single coordinate chart: connections given by
//! Christoffel symbols, torsion and curvature, geodesics, parallel transport,
//! the Levi-Civita connection of a metric, the Pfaffian, Gauss–Bonnet
//! quadrature and checks of the para-hypercomplex structure on `ℝ^{2m}`.
//!
//! All derivatives are central differences. Vector fields and connections
//! are shared closures so they can be composed freely.

mod connection;
mod flow;
mod named;
mod pfaffian;
mod structures;
mod surface;

use std::sync::Arc;

use thiserror::Error;

pub use connection::{
    bracket, covariant_derivative, curvature, levi_civita, nabla, torsion, ChartConnection, Christoffel, MetricField,
};
pub use flow::{exponential_map, geodesic, parallel_transport, Curve, Trajectory, ESCAPE_NORM, STEPS_PER_UNIT};
pub use named::{Geometry, GeometryKind};
pub use pfaffian::{pfaffian, MAX_PFAFFIAN_SIZE};
pub use structures::{
    nijenhuis, para_structure_check, standard_complex, standard_para, twisted_para, Check, EndomorphismField, ParaReport,
};
pub use surface::{gauss_bonnet, gaussian_curvature, MetricPatch, Surface, SKIP_BUDGET};

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Tolerance for identities that involve finite differences.
pub const FD_TOL: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point {0:?} is outside the chart")]
    OutsideDomain(Vec<f64>),
    #[error("expected a vector of length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("number of steps must be positive")]
    NoSteps,
    #[error("metric is singular at {0:?}")]
    SingularMetric(Vec<f64>),
    #[error("geodesic left the chart at t = {t}; last valid point {point:?}, velocity {velocity:?}")]
    Escape { t: f64, point: Vec<f64>, velocity: Vec<f64> },
    #[error("Pfaffian needs an even size, got {0}")]
    OddDimension(usize),
    #[error("matrix is not skew-symmetric at ({0}, {1})")]
    NotSkew(usize, usize),
    #[error("Pfaffian by direct summation is limited to size {max}, got {size}")]
    TooLarge { size: usize, max: usize },
    #[error("mesh must be at least {min}, got {got}")]
    CoarseMesh { got: usize, min: usize },
    #[error("{skipped} of {total} quadrature nodes had a singular metric")]
    SkipBudget { skipped: usize, total: usize },
    #[error("unknown geometry {0:?}; expected euclidean:m, hopf:m, flat-torus:m or sphere:r")]
    UnknownGeometry(String),
}

/// The chart: an axis-aligned box, some coordinates of which may be
/// periodic, minus finitely many small balls.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// `Some(period)` for a coordinate identified modulo `period`; its box
    /// bounds are then ignored.
    pub period: Vec<Option<f64>>,
    /// Deleted balls `(centre, radius)`.
    pub deleted: Vec<(Vec<f64>, f64)>,
}

impl Domain {
    pub fn whole(m: usize) -> Self {
        Domain { lower: vec![f64::NEG_INFINITY; m], upper: vec![f64::INFINITY; m], period: vec![None; m], deleted: vec![] }
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        let m = lower.len();
        Domain { lower, upper, period: vec![None; m], deleted: vec![] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().all(|v| v.is_finite())
            && (0..self.dim()).all(|i| self.period[i].is_some() || (x[i] > self.lower[i] && x[i] < self.upper[i]))
            && self.deleted.iter().all(|(c, r)| distance(x, c) > *r)
    }

    /// Reduces periodic coordinates into `[0, period)`.
    pub fn wrap(&self, x: &mut [f64]) {
        for (v, period) in x.iter_mut().zip(&self.period) {
            if let Some(l) = period {
                *v = v.rem_euclid(*l);
            }
        }
    }

    /// Whether the straight segment from `a` to `b` stays in the chart. The
    /// box is convex, so only the deleted balls need the closest-approach test.
    pub fn segment_inside(&self, a: &[f64], b: &[f64]) -> bool {
        if !self.contains(a) || !self.contains(b) {
            return false;
        }
        self.deleted.iter().all(|(c, r)| {
            let ab: Vec<f64> = b.iter().zip(a).map(|(p, q)| p - q).collect();
            let len2: f64 = ab.iter().map(|v| v * v).sum();
            let t = if len2 == 0.0 {
                0.0
            } else {
                (c.iter().zip(a).zip(&ab).map(|((ci, ai), di)| (ci - ai) * di).sum::<f64>() / len2).clamp(0.0, 1.0)
            };
            let closest: Vec<f64> = a.iter().zip(&ab).map(|(ai, di)| ai + t * di).collect();
            distance(&closest, c) > *r
        })
    }

    pub(crate) fn check(&self, x: &[f64]) -> Result<(), GeometryError> {
        if x.len() != self.dim() {
            return Err(GeometryError::Dimension { expected: self.dim(), got: x.len() });
        }
        if !self.contains(x) {
            return Err(GeometryError::OutsideDomain(x.to_vec()));
        }
        Ok(())
    }
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

type FieldFn = dyn Fn(&[f64]) -> Result<Vec<f64>, GeometryError> + Send + Sync;

/// A vector field on the chart, `x ↦ (a¹(x), …, aᵐ(x))`.
#[derive(Clone)]
pub struct VectorField(Arc<FieldFn>);

impl std::fmt::Debug for VectorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("VectorField")
    }
}

impl VectorField {
    pub fn new(f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        VectorField(Arc::new(move |x| Ok(f(x))))
    }

    pub fn fallible(f: impl Fn(&[f64]) -> Result<Vec<f64>, GeometryError> + Send + Sync + 'static) -> Self {
        VectorField(Arc::new(f))
    }

    pub fn constant(v: Vec<f64>) -> Self {
        VectorField::new(move |_| v.clone())
    }

    /// `∂ᵢ` on an `m`-dimensional chart.
    pub fn coordinate(m: usize, i: usize) -> Self {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        VectorField::constant(e)
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
        (self.0)(x)
    }

    /// `f·X` for a function `f`.
    pub fn scaled(&self, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        let x = self.clone();
        VectorField::fallible(move |p| Ok(x.eval(p)?.into_iter().map(|v| v * f(p)).collect()))
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        let (a, b) = (self.clone(), other.clone());
        VectorField::fallible(move |p| Ok(a.eval(p)?.iter().zip(b.eval(p)?).map(|(x, y)| x - y).collect()))
    }

    /// Central difference `∂ᵢ` of every component at `x`.
    pub fn partial(&self, x: &[f64], i: usize, h: f64) -> Result<Vec<f64>, GeometryError> {
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[i] += h;
        minus[i] -= h;
        let (fp, fm) = (self.eval(&plus)?, self.eval(&minus)?);
        Ok(fp.iter().zip(fm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
    }
}
