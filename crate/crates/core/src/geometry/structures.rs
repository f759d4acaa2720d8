use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{bracket, GeometryError, VectorField};

/// `x ↦ A(x)`, an endomorphism of the tangent space at each point.
pub type EndomorphismField = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Difference step for the structure checks. Central differences are exact
/// on the quadratic test fields, so a larger step only lowers rounding.
const PARA_STEP: f64 = 1e-3;

/// Tolerance of every identity in [`para_structure_check`].
const PARA_TOL: f64 = 1e-10;

fn apply_field(a: &EndomorphismField, x: &VectorField) -> VectorField {
    let (a, x) = (a.clone(), x.clone());
    VectorField::fallible(move |p| Ok((a(p) * DVector::from_vec(x.eval(p)?)).as_slice().to_vec()))
}

/// `N_A(X, Y) = −A²[X, Y] + A([AX, Y] + [X, AY]) − [AX, AY]`.
pub fn nijenhuis(
    a: &EndomorphismField,
    x: &VectorField,
    y: &VectorField,
    p: &[f64],
    h: f64,
) -> Result<Vec<f64>, GeometryError> {
    let ax = apply_field(a, x);
    let ay = apply_field(a, y);
    let xy = DVector::from_vec(bracket(x, y, h).eval(p)?);
    let mixed = DVector::from_vec(bracket(&ax, y, h).eval(p)?) + DVector::from_vec(bracket(x, &ay, h).eval(p)?);
    let axay = DVector::from_vec(bracket(&ax, &ay, h).eval(p)?);
    let am = a(p);
    let n = -(&am * &am * xy) + &am * mixed - axay;
    Ok(n.as_slice().to_vec())
}

/// `I∂_{xᵢ} = ∂_{yᵢ}`, `I∂_{yᵢ} = −∂_{xᵢ}` in coordinates `(x₁..x_m, y₁..y_m)`.
pub fn standard_complex(m: usize) -> DMatrix<f64> {
    let mut i = DMatrix::zeros(2 * m, 2 * m);
    for k in 0..m {
        i[(m + k, k)] = 1.0;
        i[(k, m + k)] = -1.0;
    }
    i
}

/// `J∂_{xᵢ} = ∂_{xᵢ}`, `J∂_{yᵢ} = −∂_{yᵢ}`.
pub fn standard_para(m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * m, 2 * m, |r, c| if r != c { 0.0 } else if r < m { 1.0 } else { -1.0 })
}

/// `J_z = zJ = (a + bI)J` for `z = a + bi`, using `I` as the complex structure.
pub fn twisted_para(m: usize, z: (f64, f64)) -> DMatrix<f64> {
    let (a, b) = z;
    (DMatrix::identity(2 * m, 2 * m) * a + standard_complex(m) * b) * standard_para(m)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub max_error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ParaReport {
    pub m: usize,
    pub tolerance: f64,
    pub samples: usize,
    pub checks: Vec<Check>,
}

impl ParaReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn constant(a: DMatrix<f64>) -> EndomorphismField {
    Arc::new(move |_| a.clone())
}

/// Coordinate fields plus a few quadratic ones, on `ℝ^{2m}`.
fn test_fields(n: usize) -> Vec<VectorField> {
    let mut out: Vec<VectorField> = (0..n).map(|i| VectorField::coordinate(n, i)).collect();
    for s in 1..=3 {
        let s = s as f64;
        out.push(VectorField::new(move |x| {
            (0..n)
                .map(|i| {
                    let k = i as f64;
                    0.5 - 0.1 * s * k + 0.3 * s * x[(i + 1) % n] - 0.2 * x[i] * x[(i + 2) % n] / s
                })
                .collect()
        }));
    }
    out
}

/// Deterministic sample points spread over `[−2, 2]^{2m}`.
fn sample_points(n: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count).map(|k| (0..n).map(|i| 2.0 * ((k * n + i) as f64 * 1.618_033_988_75 + 0.3).sin()).collect()).collect()
}

fn max_entry(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Verifies on `ℝ^{2m}` that `J² = id`, `I² = −id`, `IJ + JI = 0`, that
/// `N_I`, `N_J` and `N_{J_z}` vanish at sampled points and that `J_z² = id`
/// for `samples` points `z` on the unit circle.
pub fn para_structure_check(m: usize, samples: usize) -> ParaReport {
    let n = 2 * m;
    let (i, j) = (standard_complex(m), standard_para(m));
    let id = DMatrix::<f64>::identity(n, n);
    let zs: Vec<(f64, f64)> =
        (0..samples).map(|k| TAU * (k as f64 + 0.25) / samples as f64).map(|t| (t.cos(), t.sin())).collect();
    let mut checks = Vec::new();
    let mut push = |name: &str, err: f64| checks.push(Check { name: name.into(), max_error: err, passed: err <= PARA_TOL });
    push("J^2 = id", max_entry(&(&j * &j - &id)));
    push("I^2 = -id", max_entry(&(&i * &i + &id)));
    push("IJ + JI = 0", max_entry(&(&i * &j + &j * &i)));
    let fields = test_fields(n);
    let points = sample_points(n, samples.max(1));
    let tensor_error = |a: &EndomorphismField| {
        let mut worst = 0.0f64;
        for p in &points {
            for x in &fields {
                for y in &fields {
                    let v = nijenhuis(a, x, y, p, PARA_STEP).expect("fields are total");
                    worst = worst.max(v.iter().fold(0.0, |acc, c| acc.max(c.abs())));
                }
            }
        }
        worst
    };
    push("N_I = 0", tensor_error(&constant(i.clone())));
    push("N_J = 0", tensor_error(&constant(j.clone())));
    let jz: Vec<DMatrix<f64>> = zs.iter().map(|&z| twisted_para(m, z)).collect();
    push("J_z^2 = id", jz.iter().map(|a| max_entry(&(a * a - &id))).fold(0.0, f64::max));
    push("N_{J_z} = 0", jz.iter().map(|a| tensor_error(&constant(a.clone()))).fold(0.0, f64::max));
    ParaReport { m, tolerance: PARA_TOL, samples, checks }
}
