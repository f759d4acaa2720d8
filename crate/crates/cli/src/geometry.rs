use std::f64::consts::PI;

use chernlab::geometry::{
    gauss_bonnet, geodesic, parallel_transport, Curve, Geometry, GeometryError, GeometryKind, Trajectory, FD_STEP,
    FD_TOL, STEPS_PER_UNIT,
};
use serde_json::{json, Value};

use crate::report::{Check, Exit, Failure, Outcome};

/// Agreement required between a run and the same run at twice the steps.
const REFINEMENT_TOL: f64 = 1e-6;

/// Tolerance for transporting a vector forth and back.
const ROUND_TRIP_TOL: f64 = 1e-8;

/// Largest number of trajectory rows printed by default.
pub const DEFAULT_ROWS: usize = 101;

fn classify(e: GeometryError) -> Failure {
    let exit = match e {
        GeometryError::UnknownGeometry(_)
        | GeometryError::OutsideDomain(_)
        | GeometryError::Dimension { .. }
        | GeometryError::NoSteps
        | GeometryError::CoarseMesh { .. } => Exit::Input,
        GeometryError::SingularMetric(_) | GeometryError::SkipBudget { .. } => Exit::Structure,
        GeometryError::Escape { .. } => Exit::Escape,
        _ => Exit::Internal,
    };
    Failure::new(exit, e.to_string())
}

fn bad(message: String) -> Failure {
    Failure::new(Exit::Input, message)
}

/// A number, optionally followed by `pi`: `0.5`, `pi`, `2pi`, `-0.5pi`.
fn parse_component(s: &str) -> Option<f64> {
    let s = s.trim();
    match s.strip_suffix("pi") {
        Some("") => Some(PI),
        Some("-") => Some(-PI),
        Some(k) => k.parse::<f64>().ok().map(|k| k * PI),
        None => s.parse().ok(),
    }
}

/// Comma-separated components of a point or vector.
pub fn parse_vector(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|c| parse_component(c).filter(|v| v.is_finite()).ok_or_else(|| bad(format!("cannot parse {c:?} in {s:?}"))))
        .collect()
}

fn vector_arg(arg: Option<&str>, dim: usize, default: Vec<f64>, what: &str) -> Result<Vec<f64>, Failure> {
    let v = match arg {
        Some(s) => parse_vector(s)?,
        None => default,
    };
    if v.len() != dim {
        return Err(bad(format!("{what} needs {dim} components, got {}", v.len())));
    }
    Ok(v)
}

pub fn load(key: &str) -> Result<Geometry, Failure> {
    Geometry::parse(key).map_err(classify)
}

fn default_point(geo: &Geometry) -> Vec<f64> {
    let m = geo.dim();
    match geo.kind {
        GeometryKind::Sphere(_) => vec![PI / 2.0, 0.0],
        GeometryKind::FlatTorus(_) => vec![0.5; m],
        GeometryKind::Euclidean(_) | GeometryKind::Hopf(_) => unit(m, 0),
    }
}

fn unit(m: usize, i: usize) -> Vec<f64> {
    (0..m).map(|k| if k == i { 1.0 } else { 0.0 }).collect()
}

fn point_arg(geo: &Geometry, arg: Option<&str>) -> Result<Vec<f64>, Failure> {
    let p = vector_arg(arg, geo.dim(), default_point(geo), "point")?;
    if !geo.connection.domain.contains(&p) {
        return Err(classify(GeometryError::OutsideDomain(p)));
    }
    Ok(p)
}

/// Largest coordinate difference, with periodic coordinates compared on
/// the circle.
fn chart_distance(geo: &Geometry, a: &[f64], b: &[f64]) -> f64 {
    let period = &geo.connection.domain.period;
    (0..a.len())
        .map(|i| {
            let d = a[i] - b[i];
            match period[i] {
                Some(l) => (d - l * (d / l).round()).abs(),
                None => d.abs(),
            }
        })
        .fold(0.0, f64::max)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Roughly `max_rows` evenly spaced rows, always with the first and last.
fn thin_rows(traj: &Trajectory, max_rows: usize) -> Value {
    let n = traj.len();
    let stride = if max_rows < 2 { n } else { n.div_ceil(max_rows - 1).max(1) };
    let all = traj.rows();
    let rows = all.as_array().expect("rows are an array");
    let mut keep: Vec<Value> = rows.iter().step_by(stride.max(1)).cloned().collect();
    if (n - 1) % stride.max(1) != 0 {
        keep.push(rows[n - 1].clone());
    }
    Value::Array(keep)
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.10}")).collect();
    format!("({})", parts.join(", "))
}

pub struct GeodesicArgs<'a> {
    pub key: &'a str,
    pub p: Option<&'a str>,
    /// Components, or `-p` for the negated starting point.
    pub v: Option<&'a str>,
    pub t: f64,
    pub steps: Option<usize>,
    pub rows: usize,
}

pub fn cmd_geodesic(args: &GeodesicArgs) -> Result<Outcome, Failure> {
    let geo = load(args.key)?;
    let p = point_arg(&geo, args.p)?;
    let v = match args.v.map(str::trim) {
        Some("-p") => p.iter().map(|c| -c).collect(),
        other => vector_arg(other, geo.dim(), unit(geo.dim(), 0), "velocity")?,
    };
    if !(args.t > 0.0 && args.t.is_finite()) {
        return Err(bad(format!("end time must be positive, got {}", args.t)));
    }
    let steps = args.steps.unwrap_or(((args.t * STEPS_PER_UNIT as f64).ceil() as usize).max(1));
    let traj = geodesic(&geo.connection, &p, &v, args.t, steps).map_err(classify)?;
    let end = json!({
        "t": traj.end_time(),
        "point": traj.end_point(),
        "velocity": traj.velocities.last().expect("non-empty"),
    });
    let mut checks = Vec::new();
    if !traj.escape_flag {
        let fine = geodesic(&geo.connection, &p, &v, args.t, 2 * steps).map_err(classify)?;
        let passed = !fine.escape_flag && chart_distance(&geo, fine.end_point(), traj.end_point()) <= REFINEMENT_TOL;
        let detail = if fine.escape_flag {
            "the refined run left the chart".to_string()
        } else {
            format!("end points at {steps} and {} steps differ by {:.3e}", 2 * steps, chart_distance(&geo, fine.end_point(), traj.end_point()))
        };
        checks.push(Check::new("step halving", passed, detail));
    }
    let verdict = if traj.escape_flag {
        format!("incomplete: leaves the chart after t = {}", traj.end_time())
    } else {
        format!("defined on [0, {}]", args.t)
    };
    let results = json!({
        "geometry": geo.key,
        "p": p,
        "v": v,
        "t_end": args.t,
        "steps": steps,
        "escape_flag": traj.escape_flag,
        "verdict": verdict,
        "end": end,
        "rows": thin_rows(&traj, args.rows),
    });
    let mut text = format!("geodesic on {} from {} with velocity {}\n", geo.key, fmt_vec(&p), fmt_vec(&v));
    text.push_str("         t  point / velocity\n");
    for row in results["rows"].as_array().expect("array") {
        let f = |k: &str| row[k].as_array().map(|a| a.iter().filter_map(Value::as_f64).collect::<Vec<_>>()).unwrap_or_default();
        text.push_str(&format!("{:>10.4}  {}  {}\n", row["t"].as_f64().unwrap_or(f64::NAN), fmt_vec(&f("point")), fmt_vec(&f("velocity"))));
    }
    text.push_str(&format!("{verdict}\n"));
    let outcome = Outcome::new(results, checks, text);
    if traj.escape_flag {
        let message = GeometryError::Escape {
            t: traj.end_time(),
            point: traj.end_point().to_vec(),
            velocity: traj.velocities.last().expect("non-empty").clone(),
        };
        return Ok(outcome.failing(Exit::Escape, message.to_string()));
    }
    Ok(refinement_verdict(outcome))
}

fn refinement_verdict(outcome: Outcome) -> Outcome {
    match outcome.checks.iter().find(|c| !c.passed) {
        Some(c) => {
            let message = format!("{} failed: {}", c.name, c.detail);
            outcome.failing(Exit::Disagreement, message)
        }
        None => outcome,
    }
}

pub struct TransportArgs<'a> {
    pub key: &'a str,
    pub p: Option<&'a str>,
    pub to: &'a str,
    pub w: Option<&'a str>,
    pub steps: usize,
}

/// Transports `w` along the coordinate segment from `p` to `to`.
pub fn cmd_transport(args: &TransportArgs) -> Result<Outcome, Failure> {
    let geo = load(args.key)?;
    let p = point_arg(&geo, args.p)?;
    let q = vector_arg(Some(args.to), geo.dim(), vec![], "end point")?;
    let w = vector_arg(args.w, geo.dim(), unit(geo.dim(), 0), "vector")?;
    if args.steps == 0 {
        return Err(classify(GeometryError::NoSteps));
    }
    let (a, b) = (p.clone(), q.clone());
    let velocity: Vec<f64> = b.iter().zip(&a).map(|(x, y)| x - y).collect();
    let curve = Curve::new(0.0, 1.0, move |t| (a.iter().zip(&b).map(|(x, y)| x + t * (y - x)).collect(), velocity.clone()));
    let conn = &geo.connection;
    let there = parallel_transport(conn, &curve, &w, args.steps).map_err(classify)?;
    let fine = parallel_transport(conn, &curve, &w, 2 * args.steps).map_err(classify)?;
    let back = parallel_transport(conn, &curve.reversed(), &there, args.steps).map_err(classify)?;
    let mut checks = vec![
        Check::new(
            "step halving",
            max_diff(&there, &fine) <= REFINEMENT_TOL,
            format!("{} and {} steps differ by {:.3e}", args.steps, 2 * args.steps, max_diff(&there, &fine)),
        ),
        Check::new(
            "round trip",
            max_diff(&back, &w) <= ROUND_TRIP_TOL,
            format!("transporting back changes the vector by {:.3e}", max_diff(&back, &w)),
        ),
    ];
    let mut results = json!({
        "geometry": geo.key,
        "from": p,
        "to": q,
        "w": w,
        "steps": args.steps,
        "transported": there,
    });
    if let Some(metric) = &geo.metric {
        let (mut qw, before) = (q.clone(), metric.inner(&p, &w, &w).sqrt());
        conn.domain.wrap(&mut qw);
        let after = metric.inner(&qw, &there, &there).sqrt();
        checks.push(Check::new(
            "length preserved",
            (after - before).abs() <= REFINEMENT_TOL * before.max(1.0),
            format!("|w| = {before:.10}, |transported| = {after:.10}"),
        ));
        results["length"] = json!([before, after]);
    }
    let text = format!(
        "transport on {} from {} to {}\n{} -> {}\n",
        geo.key,
        fmt_vec(&p),
        fmt_vec(&q),
        fmt_vec(&w),
        fmt_vec(&there)
    );
    Ok(refinement_verdict(Outcome::new(results, checks, text)))
}

pub fn cmd_gauss_bonnet(key: &str, mesh: usize) -> Result<Outcome, Failure> {
    let geo = load(key)?;
    let surface = geo
        .surface
        .as_ref()
        .ok_or_else(|| bad(format!("{key} has no closed surface to integrate over")))?;
    let coarse = gauss_bonnet(surface, mesh).map_err(classify)?;
    let fine = gauss_bonnet(surface, 2 * mesh).map_err(classify)?;
    let nearest = fine.round();
    let (e1, e2) = ((coarse - nearest).abs(), (fine - nearest).abs());
    let ratio = if e2 > 0.0 { Some(e1 / e2) } else { None };
    let checks = vec![Check::new(
        "mesh convergence",
        e2 <= e1,
        format!("error {e1:.3e} at mesh {mesh}, {e2:.3e} at mesh {}", 2 * mesh),
    )];
    let results = json!({
        "geometry": geo.key,
        "mesh": mesh,
        "chi": coarse,
        "refined": {"mesh": 2 * mesh, "chi": fine},
        "nearest_integer": nearest,
        "error_ratio": ratio,
    });
    let text = format!(
        "chi({}) ~ {coarse:.6} at mesh {mesh}, {fine:.6} at mesh {}\nnearest integer {nearest}\n",
        geo.key,
        2 * mesh
    );
    Ok(refinement_verdict(Outcome::new(results, checks, text)))
}

pub fn cmd_levi_civita(key: &str, p: Option<&str>) -> Result<Outcome, Failure> {
    let geo = load(key)?;
    let p = point_arg(&geo, p)?;
    let m = geo.dim();
    let gamma = geo.connection.symbols(&p).map_err(classify)?;
    let nested: Vec<Vec<Vec<f64>>> =
        (0..m).map(|k| (0..m).map(|i| (0..m).map(|j| gamma.get(k, i, j)).collect()).collect()).collect();
    let mut checks = vec![Check::new("torsion free", gamma.is_symmetric(), "Gamma^k_ij = Gamma^k_ji")];
    if let Some(metric) = &geo.metric {
        // ∂_k g_ij = Γ^l_{ki} g_lj + Γ^l_{kj} g_il.
        let g = metric.at(&p);
        let mut worst = 0.0f64;
        for k in 0..m {
            let (mut up, mut down) = (p.clone(), p.clone());
            up[k] += FD_STEP;
            down[k] -= FD_STEP;
            let dg = (metric.at(&up) - metric.at(&down)) / (2.0 * FD_STEP);
            for i in 0..m {
                for j in 0..m {
                    let rhs: f64 = (0..m).map(|l| gamma.get(l, k, i) * g[(l, j)] + gamma.get(l, k, j) * g[(i, l)]).sum();
                    worst = worst.max((dg[(i, j)] - rhs).abs());
                }
            }
        }
        checks.push(Check::new("metric compatible", worst <= FD_TOL, format!("max defect {worst:.3e}")));
    }
    let mut text = format!("Christoffel symbols of {} at {}\n", geo.key, fmt_vec(&p));
    for (k, block) in nested.iter().enumerate() {
        for (i, row) in block.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.abs() > 0.0 {
                    text.push_str(&format!("Gamma^{k}_{i}{j} = {v:.10}\n"));
                }
            }
        }
    }
    if nested.iter().flatten().flatten().all(|v| *v == 0.0) {
        text.push_str("all symbols vanish\n");
    }
    let results = json!({"geometry": geo.key, "p": p, "christoffel": nested});
    Ok(refinement_verdict(Outcome::new(results, checks, text)))
}
