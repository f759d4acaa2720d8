use std::sync::Arc;

use serde::Serialize;

use super::{norm, ChartConnection, GeometryError};

/// Default number of RK4 steps per unit of time.
pub const STEPS_PER_UNIT: usize = 1000;

/// Position or velocity norms beyond this count as blowing up.
pub const ESCAPE_NORM: f64 = 1e8;

/// Samples of a curve in the chart. When `escape_flag` is set the last
/// sample is the last state that was still in the chart.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub escape_flag: bool,
    #[serde(skip)]
    period: Vec<Option<f64>>,
}

#[derive(Serialize)]
struct Row<'a> {
    t: f64,
    point: &'a [f64],
    velocity: &'a [f64],
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("a trajectory holds its initial state")
    }

    pub fn end_point(&self) -> &[f64] {
        self.points.last().expect("a trajectory holds its initial state")
    }

    /// One JSON object `{t, point, velocity}` per sample.
    pub fn rows(&self) -> serde_json::Value {
        let rows: Vec<Row> = (0..self.len())
            .map(|k| Row { t: self.times[k], point: &self.points[k], velocity: &self.velocities[k] })
            .collect();
        serde_json::to_value(rows).expect("plain numbers")
    }

    /// Cubic Hermite interpolation through the samples. Periodic coordinates
    /// are unwrapped between neighbours so the curve stays continuous.
    pub fn curve(&self) -> Curve {
        let me = self.clone();
        let (start, end) = (self.times[0], self.end_time());
        Curve::new(start, end, move |t| me.interpolate(t))
    }

    fn interpolate(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let k = match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            k if k >= self.len() => self.len().saturating_sub(2),
            k => k - 1,
        };
        if self.len() == 1 {
            return (self.points[0].clone(), self.velocities[0].clone());
        }
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let dt = t1 - t0;
        let s = (t - t0) / dt;
        let (h00, h10, h01, h11) = (2.0 * s.powi(3) - 3.0 * s * s + 1.0, s.powi(3) - 2.0 * s * s + s, -2.0 * s.powi(3) + 3.0 * s * s, s.powi(3) - s * s);
        let (d00, d10, d01, d11) = (6.0 * s * s - 6.0 * s, 3.0 * s * s - 4.0 * s + 1.0, -6.0 * s * s + 6.0 * s, 3.0 * s * s - 2.0 * s);
        let m = self.points[k].len();
        let mut x = vec![0.0; m];
        let mut v = vec![0.0; m];
        for i in 0..m {
            let p0 = self.points[k][i];
            let mut p1 = self.points[k + 1][i];
            if let Some(Some(l)) = self.period.get(i) {
                p1 -= ((p1 - p0) / l).round() * l;
            }
            let (v0, v1) = (self.velocities[k][i], self.velocities[k + 1][i]);
            x[i] = h00 * p0 + h10 * dt * v0 + h01 * p1 + h11 * dt * v1;
            v[i] = (d00 * p0 + d10 * dt * v0 + d01 * p1 + d11 * dt * v1) / dt;
        }
        (x, v)
    }
}

type CurveFn = dyn Fn(f64) -> (Vec<f64>, Vec<f64>) + Send + Sync;

/// A parametrized curve `t ↦ (γ(t), γ′(t))` on `[start, end]`.
#[derive(Clone)]
pub struct Curve {
    pub start: f64,
    pub end: f64,
    f: Arc<CurveFn>,
}

impl Curve {
    pub fn new(start: f64, end: f64, f: impl Fn(f64) -> (Vec<f64>, Vec<f64>) + Send + Sync + 'static) -> Self {
        Curve { start, end, f: Arc::new(f) }
    }

    pub fn at(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        (self.f)(t)
    }

    /// The same image traversed backwards over the same interval.
    pub fn reversed(&self) -> Curve {
        let me = self.clone();
        Curve::new(self.start, self.end, move |t| {
            let (x, v) = me.at(me.start + me.end - t);
            (x, v.into_iter().map(|c| -c).collect())
        })
    }
}

fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(yi, xi)| yi + a * xi).collect()
}

fn acceleration(conn: &ChartConnection, x: &[f64], v: &[f64]) -> Result<Vec<f64>, GeometryError> {
    Ok(conn.symbols(x)?.contract(v, v).into_iter().map(|a| -a).collect())
}

type State = (Vec<f64>, Vec<f64>);

fn rk4_geodesic(conn: &ChartConnection, (x, v): &State, dt: f64) -> Result<State, GeometryError> {
    let k1x = v.clone();
    let k1v = acceleration(conn, x, v)?;
    let x2 = axpy(dt / 2.0, &k1x, x);
    let v2 = axpy(dt / 2.0, &k1v, v);
    let k2v = acceleration(conn, &x2, &v2)?;
    let x3 = axpy(dt / 2.0, &v2, x);
    let v3 = axpy(dt / 2.0, &k2v, v);
    let k3v = acceleration(conn, &x3, &v3)?;
    let x4 = axpy(dt, &v3, x);
    let v4 = axpy(dt, &k3v, v);
    let k4v = acceleration(conn, &x4, &v4)?;
    let nx = (0..x.len()).map(|i| x[i] + dt / 6.0 * (k1x[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i])).collect();
    let nv = (0..v.len()).map(|i| v[i] + dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i])).collect();
    Ok((nx, nv))
}

/// Integrates `ü^k + Σ Γ^k_{ij} u̇ⁱu̇ʲ = 0` from `(p, v)` over `[0, t_end]` with
/// `steps` RK4 steps. Leaving the chart, failing to evaluate the symbols or
/// exceeding [`ESCAPE_NORM`] stops the integration with `escape_flag` set.
pub fn geodesic(conn: &ChartConnection, p: &[f64], v: &[f64], t_end: f64, steps: usize) -> Result<Trajectory, GeometryError> {
    if steps == 0 {
        return Err(GeometryError::NoSteps);
    }
    let domain = &conn.domain;
    domain.check(p)?;
    if v.len() != p.len() {
        return Err(GeometryError::Dimension { expected: p.len(), got: v.len() });
    }
    let dt = t_end / steps as f64;
    let mut traj = Trajectory {
        times: vec![0.0],
        points: vec![p.to_vec()],
        velocities: vec![v.to_vec()],
        escape_flag: false,
        period: domain.period.clone(),
    };
    let mut state: State = (p.to_vec(), v.to_vec());
    for n in 1..=steps {
        let next = rk4_geodesic(conn, &state, dt);
        let ok = match &next {
            Ok((x, u)) => {
                norm(x) <= ESCAPE_NORM && norm(u) <= ESCAPE_NORM && domain.segment_inside(&state.0, x)
            }
            Err(_) => false,
        };
        if !ok {
            traj.escape_flag = true;
            break;
        }
        let (mut x, u) = next.expect("checked");
        domain.wrap(&mut x);
        traj.times.push(n as f64 * dt);
        traj.points.push(x.clone());
        traj.velocities.push(u.clone());
        state = (x, u);
    }
    Ok(traj)
}

/// `Exp_p(v)`, the time-one point of the geodesic, or an error carrying the
/// last valid state when the geodesic leaves the chart first.
pub fn exponential_map(conn: &ChartConnection, p: &[f64], v: &[f64], steps: usize) -> Result<Vec<f64>, GeometryError> {
    let traj = geodesic(conn, p, v, 1.0, steps)?;
    if traj.escape_flag {
        return Err(GeometryError::Escape {
            t: traj.end_time(),
            point: traj.end_point().to_vec(),
            velocity: traj.velocities.last().expect("non-empty").clone(),
        });
    }
    Ok(traj.end_point().to_vec())
}

fn transport_rate(conn: &ChartConnection, curve: &Curve, t: f64, a: &[f64]) -> Result<Vec<f64>, GeometryError> {
    let (mut x, v) = curve.at(t);
    conn.domain.wrap(&mut x);
    conn.domain.check(&x)?;
    Ok(conn.symbols(&x)?.contract(&v, a).into_iter().map(|c| -c).collect())
}

/// Solves `α̇^k = −Σ Γ^k_{ij} γ̇ⁱ αʲ` along `curve` from `α(start) = v0` with
/// `steps` RK4 steps and returns `α(end)`.
pub fn parallel_transport(conn: &ChartConnection, curve: &Curve, v0: &[f64], steps: usize) -> Result<Vec<f64>, GeometryError> {
    if steps == 0 {
        return Err(GeometryError::NoSteps);
    }
    if v0.len() != conn.dim() {
        return Err(GeometryError::Dimension { expected: conn.dim(), got: v0.len() });
    }
    let dt = (curve.end - curve.start) / steps as f64;
    let mut a = v0.to_vec();
    for n in 0..steps {
        let t = curve.start + n as f64 * dt;
        let k1 = transport_rate(conn, curve, t, &a)?;
        let k2 = transport_rate(conn, curve, t + dt / 2.0, &axpy(dt / 2.0, &k1, &a))?;
        let k3 = transport_rate(conn, curve, t + dt / 2.0, &axpy(dt / 2.0, &k2, &a))?;
        let k4 = transport_rate(conn, curve, t + dt, &axpy(dt, &k3, &a))?;
        for i in 0..a.len() {
            a[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(a)
}
