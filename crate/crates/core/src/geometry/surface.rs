use std::f64::consts::TAU;

use super::{curvature, levi_civita, GeometryError, MetricField, VectorField};

/// At most this fraction of quadrature nodes may be skipped for a singular
/// metric.
pub const SKIP_BUDGET: f64 = 0.01;

/// Difference step for curvature, which nests two levels of differences.
const CURVATURE_STEP: f64 = 1e-4;

const MIN_MESH: usize = 8;

/// A metric on the rectangle `[lower, upper]` of a 2-dimensional chart.
#[derive(Clone, Debug)]
pub struct MetricPatch {
    pub metric: MetricField,
    pub lower: [f64; 2],
    pub upper: [f64; 2],
}

/// A closed surface as patches covering it up to measure zero.
#[derive(Clone, Debug)]
pub struct Surface {
    pub name: String,
    pub patches: Vec<MetricPatch>,
}

/// `K = g(R(∂₁, ∂₂)∂₂, ∂₁) / (g₁₁g₂₂ − g₁₂²)` from the Levi-Civita connection.
pub fn gaussian_curvature(metric: &MetricField, x: &[f64], h: f64) -> Result<f64, GeometryError> {
    let conn = levi_civita(metric, h);
    let (e1, e2) = (VectorField::coordinate(2, 0), VectorField::coordinate(2, 1));
    let r = curvature(&conn, &e1, &e2, &e2, x, h)?;
    let g = metric.at(x);
    let area2 = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(0, 1)];
    if !(area2 > 0.0) {
        return Err(GeometryError::SingularMetric(x.to_vec()));
    }
    Ok(metric.inner(x, &r, &[1.0, 0.0]) / area2)
}

/// `(1/2π) ∫ K √det g` by the midpoint rule on a `mesh × mesh` grid per patch.
/// Nodes where the metric is singular are skipped, up to [`SKIP_BUDGET`].
pub fn gauss_bonnet(surface: &Surface, mesh: usize) -> Result<f64, GeometryError> {
    if mesh < MIN_MESH {
        return Err(GeometryError::CoarseMesh { got: mesh, min: MIN_MESH });
    }
    let mut total = 0.0;
    let (mut skipped, mut nodes) = (0usize, 0usize);
    for patch in &surface.patches {
        let du = (patch.upper[0] - patch.lower[0]) / mesh as f64;
        let dv = (patch.upper[1] - patch.lower[1]) / mesh as f64;
        for a in 0..mesh {
            for b in 0..mesh {
                nodes += 1;
                let x = [patch.lower[0] + (a as f64 + 0.5) * du, patch.lower[1] + (b as f64 + 0.5) * dv];
                let g = patch.metric.at(&x);
                let det = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(0, 1)];
                match gaussian_curvature(&patch.metric, &x, CURVATURE_STEP) {
                    Ok(k) if det > 0.0 && k.is_finite() => total += k * det.sqrt() * du * dv,
                    Ok(_) | Err(GeometryError::SingularMetric(_)) => {
                        log::warn!("skipping quadrature node {x:?} of {}: singular metric", surface.name);
                        skipped += 1;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    if skipped as f64 > SKIP_BUDGET * nodes as f64 {
        return Err(GeometryError::SkipBudget { skipped, total: nodes });
    }
    Ok(total / TAU)
}
