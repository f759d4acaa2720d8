use std::sync::Arc;

use nalgebra::DMatrix;

use super::{Domain, GeometryError, VectorField};

/// `Γ^k_{ij}`, stored with `k` slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    m: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(m: usize) -> Self {
        Christoffel { m, data: vec![0.0; m * m * m] }
    }

    /// From `gamma[k][i][j] = Γ^k_{ij}`.
    pub fn from_nested(gamma: &[Vec<Vec<f64>>]) -> Self {
        let m = gamma.len();
        let mut c = Christoffel::zeros(m);
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    c.set(k, i, j, gamma[k][i][j]);
                }
            }
        }
        c
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.m + i) * self.m + j]
    }

    pub fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.data[(k * self.m + i) * self.m + j] = v;
    }

    pub fn is_symmetric(&self) -> bool {
        let m = self.m;
        (0..m).all(|k| (0..m).all(|i| (0..i).all(|j| self.get(k, i, j) == self.get(k, j, i))))
    }

    /// `Σ_{i,j} Γ^k_{ij} aⁱ bʲ`.
    pub fn contract(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let m = self.m;
        (0..m)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..m {
                    for j in 0..m {
                        s += self.get(k, i, j) * a[i] * b[j];
                    }
                }
                s
            })
            .collect()
    }
}

type SymbolsFn = dyn Fn(&[f64]) -> Result<Christoffel, GeometryError> + Send + Sync;

/// A connection on a chart, `∇_{∂ᵢ}∂ⱼ = Σ_k Γ^k_{ij} ∂_k`.
#[derive(Clone)]
pub struct ChartConnection {
    pub domain: Domain,
    /// Declared torsion-free; checked at every evaluation in debug builds.
    pub symmetric: bool,
    symbols: Arc<SymbolsFn>,
}

impl std::fmt::Debug for ChartConnection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChartConnection").field("domain", &self.domain).field("symmetric", &self.symmetric).finish()
    }
}

impl ChartConnection {
    pub fn new(
        domain: Domain,
        symmetric: bool,
        symbols: impl Fn(&[f64]) -> Result<Christoffel, GeometryError> + Send + Sync + 'static,
    ) -> Self {
        ChartConnection { domain, symmetric, symbols: Arc::new(symbols) }
    }

    pub fn flat(domain: Domain) -> Self {
        let m = domain.dim();
        ChartConnection::new(domain, true, move |_| Ok(Christoffel::zeros(m)))
    }

    /// The same symbols at every point.
    pub fn constant(domain: Domain, gamma: Christoffel) -> Self {
        let symmetric = gamma.is_symmetric();
        ChartConnection::new(domain, symmetric, move |_| Ok(gamma.clone()))
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Symbols at `x`, with no domain check so that difference stencils may
    /// straddle the boundary.
    pub fn symbols(&self, x: &[f64]) -> Result<Christoffel, GeometryError> {
        let g = (self.symbols)(x)?;
        debug_assert!(!self.symmetric || g.is_symmetric(), "connection declared symmetric is not");
        Ok(g)
    }
}

type MetricFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;

/// A Riemannian metric on a chart, `x ↦ g(x)`.
#[derive(Clone)]
pub struct MetricField {
    pub domain: Domain,
    g: Arc<MetricFn>,
}

impl std::fmt::Debug for MetricField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricField").field("domain", &self.domain).finish()
    }
}

impl MetricField {
    /// The closure must return a symmetric matrix; only its upper triangle
    /// is read.
    pub fn new(domain: Domain, g: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        MetricField { domain, g: Arc::new(g) }
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn at(&self, x: &[f64]) -> DMatrix<f64> {
        let raw = (self.g)(x);
        DMatrix::from_fn(raw.nrows(), raw.ncols(), |i, j| if i <= j { raw[(i, j)] } else { raw[(j, i)] })
    }

    pub fn inner(&self, x: &[f64], u: &[f64], v: &[f64]) -> f64 {
        let g = self.at(x);
        let mut s = 0.0;
        for i in 0..u.len() {
            for j in 0..v.len() {
                s += g[(i, j)] * u[i] * v[j];
            }
        }
        s
    }

    /// A positive-definiteness probe: Cholesky succeeds.
    pub fn is_positive_definite(&self, x: &[f64]) -> bool {
        self.at(x).cholesky().is_some()
    }
}

/// Levi-Civita connection: `Γ^k_{ij} = ½ g^{kl}(∂ᵢg_{jl} + ∂ⱼg_{il} − ∂_l g_{ij})`
/// with central differences of step `h`, filled symmetrically in `i, j`.
pub fn levi_civita(metric: &MetricField, h: f64) -> ChartConnection {
    let metric = metric.clone();
    let domain = metric.domain.clone();
    ChartConnection::new(domain, true, move |x| {
        let m = metric.dim();
        let g = metric.at(x);
        let scale = g.amax().powi(m as i32);
        let det = g.determinant();
        if !det.is_finite() || det.abs() <= 1e-12 * scale {
            return Err(GeometryError::SingularMetric(x.to_vec()));
        }
        let inv = g.try_inverse().ok_or_else(|| GeometryError::SingularMetric(x.to_vec()))?;
        // dg[l] = ∂_l g
        let dg: Vec<DMatrix<f64>> = (0..m)
            .map(|l| {
                let mut plus = x.to_vec();
                let mut minus = x.to_vec();
                plus[l] += h;
                minus[l] -= h;
                (metric.at(&plus) - metric.at(&minus)) / (2.0 * h)
            })
            .collect();
        let mut gamma = Christoffel::zeros(m);
        for k in 0..m {
            for i in 0..m {
                for j in i..m {
                    let mut s = 0.0;
                    for l in 0..m {
                        s += inv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                    }
                    gamma.set(k, i, j, 0.5 * s);
                    gamma.set(k, j, i, 0.5 * s);
                }
            }
        }
        Ok(gamma)
    })
}

/// `∇_X Y` as a field: `Σ_k (Σᵢ aⁱ ∂ᵢbᵏ + Σ_{i,j} Γ^k_{ij} aⁱ bʲ) ∂_k`.
pub fn nabla(conn: &ChartConnection, x: &VectorField, y: &VectorField, h: f64) -> VectorField {
    let (conn, x, y) = (conn.clone(), x.clone(), y.clone());
    VectorField::fallible(move |p| {
        let a = x.eval(p)?;
        let b = y.eval(p)?;
        let mut out = conn.symbols(p)?.contract(&a, &b);
        for (i, ai) in a.iter().enumerate() {
            if *ai != 0.0 {
                for (o, d) in out.iter_mut().zip(y.partial(p, i, h)?) {
                    *o += ai * d;
                }
            }
        }
        Ok(out)
    })
}

pub fn covariant_derivative(
    conn: &ChartConnection,
    x: &VectorField,
    y: &VectorField,
    p: &[f64],
    h: f64,
) -> Result<Vec<f64>, GeometryError> {
    conn.domain.check(p)?;
    nabla(conn, x, y, h).eval(p)
}

/// `[X, Y]ᵏ = Σᵢ (Xⁱ∂ᵢYᵏ − Yⁱ∂ᵢXᵏ)` as a field.
pub fn bracket(x: &VectorField, y: &VectorField, h: f64) -> VectorField {
    let (x, y) = (x.clone(), y.clone());
    VectorField::fallible(move |p| {
        let a = x.eval(p)?;
        let b = y.eval(p)?;
        let mut out = vec![0.0; p.len()];
        for i in 0..p.len() {
            if a[i] != 0.0 {
                for (o, d) in out.iter_mut().zip(y.partial(p, i, h)?) {
                    *o += a[i] * d;
                }
            }
            if b[i] != 0.0 {
                for (o, d) in out.iter_mut().zip(x.partial(p, i, h)?) {
                    *o -= b[i] * d;
                }
            }
        }
        Ok(out)
    })
}

/// `T(X, Y) = ∇_X Y − ∇_Y X − [X, Y]`.
pub fn torsion(
    conn: &ChartConnection,
    x: &VectorField,
    y: &VectorField,
    p: &[f64],
    h: f64,
) -> Result<Vec<f64>, GeometryError> {
    conn.domain.check(p)?;
    let t = nabla(conn, x, y, h).sub(&nabla(conn, y, x, h)).sub(&bracket(x, y, h));
    t.eval(p)
}

/// `R(X, Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]} Z`.
pub fn curvature(
    conn: &ChartConnection,
    x: &VectorField,
    y: &VectorField,
    z: &VectorField,
    p: &[f64],
    h: f64,
) -> Result<Vec<f64>, GeometryError> {
    conn.domain.check(p)?;
    let xy = nabla(conn, x, &nabla(conn, y, z, h), h);
    let yx = nabla(conn, y, &nabla(conn, x, z, h), h);
    let br = nabla(conn, &bracket(x, y, h), z, h);
    xy.sub(&yx).sub(&br).eval(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FD_STEP;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn flat_directional_derivative() {
        let conn = ChartConnection::flat(Domain::whole(2));
        let x = VectorField::coordinate(2, 0);
        let y = VectorField::new(|p| vec![0.0, p[0]]);
        let v = covariant_derivative(&conn, &x, &y, &[0.3, -1.0], FD_STEP).unwrap();
        assert!(close(&v, &[0.0, 1.0], 1e-9));
        let c = VectorField::constant(vec![2.0, 5.0]);
        assert!(close(&covariant_derivative(&conn, &x, &c, &[1.0, 1.0], FD_STEP).unwrap(), &[0.0, 0.0], 0.0));
    }

    fn asymmetric() -> Christoffel {
        let mut g = Christoffel::zeros(2);
        g.set(0, 0, 1, 1.5);
        g.set(0, 1, 0, -0.5);
        g.set(1, 1, 1, 2.0);
        g.set(1, 0, 0, 0.25);
        g
    }

    #[test]
    fn constant_symbols_only_contribute_the_contraction() {
        let gamma = asymmetric();
        let conn = ChartConnection::constant(Domain::whole(2), gamma.clone());
        assert!(!conn.symmetric);
        let (a, b) = (vec![1.0, -2.0], vec![0.5, 3.0]);
        let v = covariant_derivative(&conn, &VectorField::constant(a.clone()), &VectorField::constant(b.clone()), &[0.0, 0.0], FD_STEP)
            .unwrap();
        let expected: Vec<f64> = (0..2)
            .map(|k| (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| gamma.get(k, i, j) * a[i] * b[j]).sum())
            .collect();
        assert!(close(&v, &expected, 1e-12));
    }

    #[test]
    fn torsion_of_constant_symbols() {
        let gamma = asymmetric();
        let conn = ChartConnection::constant(Domain::whole(2), gamma.clone());
        for i in 0..2 {
            for j in 0..2 {
                let t = torsion(&conn, &VectorField::coordinate(2, i), &VectorField::coordinate(2, j), &[0.1, 0.2], FD_STEP)
                    .unwrap();
                let expected: Vec<f64> = (0..2).map(|k| gamma.get(k, i, j) - gamma.get(k, j, i)).collect();
                assert!(close(&t, &expected, 1e-12));
            }
        }
    }

    #[test]
    fn flat_connection_is_flat_and_torsion_free() {
        let conn = ChartConnection::flat(Domain::whole(3));
        let x = VectorField::new(|p| vec![p[1], p[0] * p[2], 1.0]);
        let y = VectorField::new(|p| vec![p[2].sin(), 0.0, p[0]]);
        let z = VectorField::new(|p| vec![1.0, p[1] * p[1], -p[0]]);
        let p = [0.3, -0.7, 1.1];
        assert!(close(&torsion(&conn, &x, &y, &p, FD_STEP).unwrap(), &[0.0; 3], 1e-8));
        assert!(close(&curvature(&conn, &x, &y, &z, &p, FD_STEP).unwrap(), &[0.0; 3], 1e-4));
    }

    #[test]
    fn euclidean_metric_has_zero_symbols() {
        let metric = MetricField::new(Domain::whole(3), |_| DMatrix::identity(3, 3));
        let gamma = levi_civita(&metric, FD_STEP).symbols(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(gamma, Christoffel::zeros(3));
    }

    #[test]
    fn singular_metric_is_reported() {
        let metric = MetricField::new(Domain::whole(2), |_| DMatrix::zeros(2, 2));
        assert!(matches!(levi_civita(&metric, FD_STEP).symbols(&[0.0, 0.0]), Err(GeometryError::SingularMetric(_))));
    }

    #[test]
    fn domain_is_checked() {
        let conn = ChartConnection::flat(Domain::boxed(vec![0.0], vec![1.0]));
        let x = VectorField::coordinate(1, 0);
        assert!(matches!(covariant_derivative(&conn, &x, &x, &[2.0], FD_STEP), Err(GeometryError::OutsideDomain(_))));
        assert!(matches!(covariant_derivative(&conn, &x, &x, &[0.5, 0.5], FD_STEP), Err(GeometryError::Dimension { .. })));
    }
}
