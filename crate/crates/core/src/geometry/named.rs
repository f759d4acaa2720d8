use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;

use super::surface::{MetricPatch, Surface};
use super::{levi_civita, ChartConnection, Domain, GeometryError, MetricField, FD_STEP};

/// Radius of the ball removed around the origin of a Hopf chart.
const HOPF_HOLE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GeometryKind {
    Euclidean(usize),
    /// `ℝᵐ ∖ {0}` with the flat connection, the universal cover chart of a
    /// Hopf manifold.
    Hopf(usize),
    /// `ℝᵐ / ℤᵐ` with the flat connection.
    FlatTorus(usize),
    /// Round sphere of the given radius in coordinates `(θ, φ)`.
    Sphere(f64),
}

/// A named chart with its connection, and its metric and closed surface
/// when it has them.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub key: String,
    pub kind: GeometryKind,
    pub connection: ChartConnection,
    pub metric: Option<MetricField>,
    pub surface: Option<Surface>,
}

impl Geometry {
    /// Parses `euclidean:m`, `hopf:m`, `flat-torus:m` or `sphere:r`.
    pub fn parse(key: &str) -> Result<Self, GeometryError> {
        let unknown = || GeometryError::UnknownGeometry(key.to_string());
        let (name, arg) = key.split_once(':').ok_or_else(unknown)?;
        let dim = || arg.trim().parse::<usize>().ok().filter(|&m| m >= 1).ok_or_else(unknown);
        let kind = match name.trim() {
            "euclidean" => GeometryKind::Euclidean(dim()?),
            "hopf" => GeometryKind::Hopf(dim()?),
            "flat-torus" => GeometryKind::FlatTorus(dim()?),
            "sphere" => {
                let r: f64 = arg.trim().parse().map_err(|_| unknown())?;
                if !(r > 0.0 && r.is_finite()) {
                    return Err(unknown());
                }
                GeometryKind::Sphere(r)
            }
            _ => return Err(unknown()),
        };
        Ok(Geometry::new(kind, key))
    }

    pub fn new(kind: GeometryKind, key: &str) -> Self {
        let flat_metric = |domain: Domain| {
            let m = domain.dim();
            MetricField::new(domain, move |_| DMatrix::identity(m, m))
        };
        let (connection, metric, surface) = match kind {
            GeometryKind::Euclidean(m) => {
                let domain = Domain::whole(m);
                (ChartConnection::flat(domain.clone()), Some(flat_metric(domain)), None)
            }
            GeometryKind::Hopf(m) => {
                let mut domain = Domain::whole(m);
                domain.deleted.push((vec![0.0; m], HOPF_HOLE));
                (ChartConnection::flat(domain.clone()), Some(flat_metric(domain)), None)
            }
            GeometryKind::FlatTorus(m) => {
                let domain = Domain { lower: vec![0.0; m], upper: vec![1.0; m], period: vec![Some(1.0); m], deleted: vec![] };
                let metric = flat_metric(domain.clone());
                let surface = (m == 2).then(|| Surface {
                    name: key.to_string(),
                    patches: vec![MetricPatch { metric: metric.clone(), lower: [0.0, 0.0], upper: [1.0, 1.0] }],
                });
                (ChartConnection::flat(domain), Some(metric), surface)
            }
            GeometryKind::Sphere(r) => {
                let domain = Domain { lower: vec![0.0, 0.0], upper: vec![PI, TAU], period: vec![None, Some(TAU)], deleted: vec![] };
                let metric = MetricField::new(domain, move |x| {
                    let s = x[0].sin();
                    DMatrix::from_row_slice(2, 2, &[r * r, 0.0, 0.0, r * r * s * s])
                });
                let surface = Surface {
                    name: key.to_string(),
                    patches: vec![MetricPatch { metric: metric.clone(), lower: [0.0, 0.0], upper: [PI, TAU] }],
                };
                (levi_civita(&metric, FD_STEP), Some(metric), Some(surface))
            }
        };
        Geometry { key: key.to_string(), kind, connection, metric, surface }
    }

    pub fn dim(&self) -> usize {
        self.connection.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys() {
        assert_eq!(Geometry::parse("euclidean:3").unwrap().dim(), 3);
        assert_eq!(Geometry::parse("hopf:2").unwrap().kind, GeometryKind::Hopf(2));
        assert_eq!(Geometry::parse("sphere:2.5").unwrap().kind, GeometryKind::Sphere(2.5));
        assert!(Geometry::parse("flat-torus:3").unwrap().surface.is_none());
        for bad in ["torus:2", "euclidean", "euclidean:0", "sphere:-1", "hopf:x"] {
            assert!(matches!(Geometry::parse(bad), Err(GeometryError::UnknownGeometry(_))), "{bad}");
        }
    }

    #[test]
    fn sphere_symbols() {
        let geo = Geometry::parse("sphere:1").unwrap();
        for theta in [0.3, 1.0, 2.2] {
            let g = geo.connection.symbols(&[theta, 0.7]).unwrap();
            // Γ^θ_{φφ} = −sinθ cosθ, Γ^φ_{θφ} = cotθ, all others zero.
            assert!((g.get(0, 1, 1) + theta.sin() * theta.cos()).abs() < 1e-8);
            assert!((g.get(1, 0, 1) - theta.cos() / theta.sin()).abs() < 1e-8);
            assert!(g.get(0, 0, 0).abs() < 1e-8 && g.get(1, 1, 1).abs() < 1e-8);
        }
    }
}
