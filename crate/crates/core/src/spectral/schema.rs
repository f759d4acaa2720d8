//! JSON input and report formats.
//!
//! A filtered complex is
//!
//! ```json
//! {"degrees": {"0": 2, "1": 2},
//!  "differentials": {"0": [["1", "0"], ["0", "0"]]},
//!  "filtration": {"1": {"0": [["1", "0"]], "1": "full"}}}
//! ```
//!
//! Matrices are lists of rows; the differential out of degree `n` has
//! `dim C^{n+1}` rows. Filtration entries list spanning vectors of
//! `F^pCⁿ`, or `"full"` / `"zero"`. A degree missing under some `p` is zero,
//! `F^p` is full below the smallest listed `p` and zero above the largest,
//! and listed `p` must be consecutive. Entries are integers or `"num/den"`
//! strings.
//!
//! A double complex is `{"dims": [[…], …], "dH": {"i,j": M}, "dV": {"i,j": M},
//! "convention": "anticommuting" | "commuting"}` with `dims[i][j] = dim Ω^{i,j}`
//! and absent maps zero.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Map, Value};

use super::complex::{Convention, DoubleComplex, FilteredComplex};
use super::linalg::{QMatrix, Subspace, Q};
use super::pages::{graded_cohomology, infinity_page, page, positions};
use super::SpectralError;

fn err(msg: impl Into<String>) -> SpectralError {
    SpectralError::Parse(msg.into())
}

pub fn parse_rational(v: &Value) -> Result<Q, SpectralError> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(|i| Q::from_integer(BigInt::from(i)))
            .ok_or_else(|| err(format!("{n} is not an integer; write fractions as \"num/den\" strings"))),
        Value::String(s) => {
            let t = s.trim();
            if let Some((num, den)) = t.split_once('/') {
                let num = BigInt::from_str(num.trim()).map_err(|_| err(format!("bad numerator in {s:?}")))?;
                let den = BigInt::from_str(den.trim()).map_err(|_| err(format!("bad denominator in {s:?}")))?;
                if den == BigInt::from(0) {
                    return Err(err(format!("zero denominator in {s:?}")));
                }
                Ok(Q::new(num, den))
            } else {
                BigInt::from_str(t).map(Q::from_integer).map_err(|_| err(format!("bad rational {s:?}")))
            }
        }
        other => Err(err(format!("expected a rational, found {other}"))),
    }
}

pub fn format_rational(x: &Q) -> Value {
    if x.is_integer() {
        Value::String(x.numer().to_string())
    } else {
        Value::String(format!("{}/{}", x.numer(), x.denom()))
    }
}

fn parse_vectors(v: &Value, dim: usize, what: &str) -> Result<Vec<Vec<Q>>, SpectralError> {
    let rows = v.as_array().ok_or_else(|| err(format!("{what}: expected a list of rows")))?;
    rows.iter()
        .map(|row| {
            let row = row.as_array().ok_or_else(|| err(format!("{what}: expected a list of entries")))?;
            if row.len() != dim {
                return Err(err(format!("{what}: row of length {} where {dim} was expected", row.len())));
            }
            row.iter().map(parse_rational).collect()
        })
        .collect()
}

pub fn parse_matrix(v: &Value, rows: usize, cols: usize, what: &str) -> Result<QMatrix, SpectralError> {
    let data = parse_vectors(v, cols, what)?;
    if data.len() != rows {
        return Err(err(format!("{what}: {} rows where {rows} were expected", data.len())));
    }
    QMatrix::from_rows(data, cols)
}

fn matrix_json(m: &QMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| Value::Array(m.row(i).iter().map(format_rational).collect())).collect())
}

fn vectors_json(vs: &[Vec<Q>]) -> Value {
    Value::Array(vs.iter().map(|v| Value::Array(v.iter().map(format_rational).collect())).collect())
}

fn object<'a>(v: &'a Value, key: &str) -> Result<Option<&'a Map<String, Value>>, SpectralError> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Object(m)) => Ok(Some(m)),
        Some(_) => Err(err(format!("\"{key}\" must be an object"))),
    }
}

fn int_key(k: &str, what: &str) -> Result<i64, SpectralError> {
    k.trim().parse().map_err(|_| err(format!("{what} key {k:?} is not an integer")))
}

fn check_keys(v: &Value, allowed: &[&str]) -> Result<(), SpectralError> {
    let obj = v.as_object().ok_or_else(|| err("top level must be an object"))?;
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(err(format!("unknown key {k:?}"))),
        None => Ok(()),
    }
}

pub fn filtered_complex_from_json(v: &Value) -> Result<FilteredComplex, SpectralError> {
    check_keys(v, &["degrees", "differentials", "filtration"])?;
    let degrees = object(v, "degrees")?.ok_or_else(|| err("missing \"degrees\""))?;
    let mut dims_by_n = BTreeMap::new();
    for (k, d) in degrees {
        let n = int_key(k, "degree")?;
        let d = d.as_u64().ok_or_else(|| err(format!("dimension in degree {n} must be a non-negative integer")))?;
        dims_by_n.insert(n, d as usize);
    }
    let (&n_min, _) = dims_by_n.first_key_value().ok_or_else(|| err("\"degrees\" is empty"))?;
    let (&n_max, _) = dims_by_n.last_key_value().expect("non-empty");
    let dims: Vec<usize> = (n_min..=n_max).map(|n| dims_by_n.get(&n).copied().unwrap_or(0)).collect();
    let dim = |n: i64| if n < n_min || n > n_max { 0 } else { dims[(n - n_min) as usize] };

    let mut d: Vec<QMatrix> = (n_min..n_max).map(|n| QMatrix::zeros(dim(n + 1), dim(n))).collect();
    if let Some(diffs) = object(v, "differentials")? {
        for (k, m) in diffs {
            let n = int_key(k, "differential")?;
            if n < n_min || n >= n_max {
                let parsed = parse_matrix(m, dim(n + 1), dim(n), &format!("differential {n}"))?;
                if !parsed.is_zero() {
                    return Err(err(format!("differential out of degree {n} leaves the degree range")));
                }
                continue;
            }
            d[(n - n_min) as usize] = parse_matrix(m, dim(n + 1), dim(n), &format!("differential {n}"))?;
        }
    }

    let mut listed: BTreeMap<i64, Vec<Subspace>> = BTreeMap::new();
    if let Some(filtration) = object(v, "filtration")? {
        for (k, per_degree) in filtration {
            let p = int_key(k, "filtration")?;
            let per_degree = per_degree.as_object().ok_or_else(|| err(format!("filtration level {p} must be an object")))?;
            let mut level: Vec<Subspace> = dims.iter().map(|&dm| Subspace::zero(dm)).collect();
            for (nk, value) in per_degree {
                let n = int_key(nk, "filtration degree")?;
                if n < n_min || n > n_max {
                    return Err(err(format!("filtration level {p} names degree {n} outside the complex")));
                }
                let dn = dim(n);
                let what = format!("F^{p}C^{n}");
                level[(n - n_min) as usize] = match value {
                    Value::String(s) if s == "full" => Subspace::full(dn),
                    Value::String(s) if s == "zero" => Subspace::zero(dn),
                    other => Subspace::span(dn, &parse_vectors(other, dn, &what)?)?,
                };
            }
            listed.insert(p, level);
        }
    }
    if listed.is_empty() {
        return FilteredComplex::trivial(n_min, dims, d);
    }
    let lo = *listed.keys().next().expect("non-empty");
    let hi = *listed.keys().last().expect("non-empty");
    if (hi - lo + 1) as usize != listed.len() {
        return Err(err("filtration levels must be consecutive integers"));
    }
    let mut levels = vec![dims.iter().map(|&dm| Subspace::full(dm)).collect::<Vec<_>>()];
    levels.extend(listed.into_values());
    levels.push(dims.iter().map(|&dm| Subspace::zero(dm)).collect());
    let mut p_min = lo - 1;
    while levels.len() > 2 && levels[1].iter().all(Subspace::is_full) {
        levels.remove(0);
        p_min += 1;
    }
    while levels.len() > 2 && levels[levels.len() - 2].iter().all(Subspace::is_zero) {
        levels.pop();
    }
    FilteredComplex::new(n_min, dims, d, p_min, levels)
}

pub fn filtered_complex_to_json(c: &FilteredComplex) -> Value {
    let degrees: Map<String, Value> = (c.n_min()..=c.n_max()).map(|n| (n.to_string(), json!(c.dim(n)))).collect();
    let differentials: Map<String, Value> =
        (c.n_min()..c.n_max()).map(|n| (n.to_string(), matrix_json(&c.differential(n)))).collect();
    let filtration: Map<String, Value> = (c.p_min()..c.p_max())
        .map(|p| {
            let level: Map<String, Value> = (c.n_min()..=c.n_max())
                .map(|n| {
                    let s = c.filtration(p, n);
                    let v = if s.is_full() { json!("full") } else { vectors_json(&s.basis()) };
                    (n.to_string(), v)
                })
                .collect();
            (p.to_string(), Value::Object(level))
        })
        .collect();
    json!({"degrees": degrees, "differentials": differentials, "filtration": filtration})
}

fn pair_key(k: &str) -> Result<(usize, usize), SpectralError> {
    let (a, b) = k.split_once(',').ok_or_else(|| err(format!("map key {k:?} must look like \"i,j\"")))?;
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| err(format!("map key {k:?} must look like \"i,j\"")));
    Ok((parse(a)?, parse(b)?))
}

pub fn double_complex_from_json(v: &Value) -> Result<DoubleComplex, SpectralError> {
    check_keys(v, &["dims", "dH", "dV", "convention"])?;
    let grid = v.get("dims").and_then(Value::as_array).ok_or_else(|| err("missing \"dims\" grid"))?;
    let dims: Vec<Vec<usize>> = grid
        .iter()
        .map(|col| {
            col.as_array()
                .ok_or_else(|| err("\"dims\" must be a list of lists"))?
                .iter()
                .map(|x| x.as_u64().map(|x| x as usize).ok_or_else(|| err("dimensions must be non-negative integers")))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let width = dims.len();
    let height = dims.first().map_or(0, Vec::len);
    if width == 0 || height == 0 || dims.iter().any(|c| c.len() != height) {
        return Err(err("\"dims\" must be a non-empty rectangular grid"));
    }
    let dim = |i: usize, j: usize| dims.get(i).and_then(|c| c.get(j)).copied().unwrap_or(0);
    let convention = match v.get("convention") {
        None | Some(Value::Null) => Convention::default(),
        Some(c) => serde_json::from_value(c.clone()).map_err(|_| err("convention must be \"anticommuting\" or \"commuting\""))?,
    };
    let maps = |key: &str, horizontal: bool| -> Result<Vec<Vec<QMatrix>>, SpectralError> {
        let mut out: Vec<Vec<QMatrix>> = (0..width)
            .map(|i| {
                (0..height)
                    .map(|j| {
                        let (ti, tj) = if horizontal { (i + 1, j) } else { (i, j + 1) };
                        QMatrix::zeros(dim(ti, tj), dim(i, j))
                    })
                    .collect()
            })
            .collect();
        if let Some(entries) = object(v, key)? {
            for (k, m) in entries {
                let (i, j) = pair_key(k)?;
                if i >= width || j >= height {
                    return Err(err(format!("{key} at {k:?} is outside the grid")));
                }
                let (ti, tj) = if horizontal { (i + 1, j) } else { (i, j + 1) };
                out[i][j] = parse_matrix(m, dim(ti, tj), dim(i, j), &format!("{key} at ({i},{j})"))?;
            }
        }
        Ok(out)
    };
    let dh = maps("dH", true)?;
    let dv = maps("dV", false)?;
    DoubleComplex::new(dims, dh, dv, convention)
}

pub fn double_complex_to_json(dc: &DoubleComplex) -> Value {
    let dims: Vec<Vec<usize>> = (0..dc.width()).map(|i| (0..dc.height()).map(|j| dc.dim(i, j)).collect()).collect();
    let mut dh = Map::new();
    let mut dv = Map::new();
    for i in 0..dc.width() {
        for j in 0..dc.height() {
            let h = dc.horizontal(i, j);
            if !h.is_zero() {
                dh.insert(format!("{i},{j}"), matrix_json(&h));
            }
            let v = dc.vertical(i, j);
            if !v.is_zero() {
                dv.insert(format!("{i},{j}"), matrix_json(&v));
            }
        }
    }
    json!({"dims": dims, "dH": dh, "dV": dv, "convention": dc.convention()})
}

/// Page dimensions for `r = 0 ..= last`, the infinity page, the graded
/// pieces of cohomology and the cohomology itself.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct PageReport {
    /// Keys `"r,p,q"`.
    pub dims: BTreeMap<String, usize>,
    /// Keys `"p,q"`.
    pub infinity: BTreeMap<String, usize>,
    pub stabilization: i64,
    /// Keys `"p,q"`.
    pub graded_cohomology: BTreeMap<String, usize>,
    /// Keys `"n"`.
    pub cohomology: BTreeMap<String, usize>,
    #[serde(skip)]
    pub table: String,
}

pub fn page_report(c: &FilteredComplex, last: Option<i64>) -> Result<PageReport, SpectralError> {
    let inf = infinity_page(c)?;
    let last = last.unwrap_or(inf.stabilization);
    let mut dims = BTreeMap::new();
    let mut table = String::new();
    for r in 0..=last {
        let pg = page(c, r)?;
        pg.check_square_zero()?;
        table.push_str(&render(&format!("E_{r}"), c, |p, q| pg.dim(p, q)));
        for ((p, q), d) in pg.dims() {
            dims.insert(format!("{r},{p},{q}"), d);
        }
    }
    table.push_str(&render("E_inf", c, |p, q| inf.dim(p, q)));
    let infinity = inf.dims().into_iter().map(|((p, q), d)| (format!("{p},{q}"), d)).collect();
    let graded_cohomology =
        positions(c).into_iter().map(|(p, q)| (format!("{p},{q}"), graded_cohomology(c, p, q))).collect();
    let cohomology = (c.n_min()..=c.n_max()).map(|n| (n.to_string(), c.cohomology_dim(n))).collect();
    Ok(PageReport { dims, infinity, stabilization: inf.stabilization, graded_cohomology, cohomology, table })
}

/// Grid with `q` decreasing downwards and `p` increasing to the right.
fn render(title: &str, c: &FilteredComplex, dim: impl Fn(i64, i64) -> usize) -> String {
    let ps: Vec<i64> = (c.p_min()..c.p_max()).collect();
    let (q_lo, q_hi) = (c.n_min() - c.p_max() + 1, c.n_max() - c.p_min());
    let mut out = format!("{title}\n");
    for q in (q_lo..=q_hi).rev() {
        let cells: Vec<String> = ps.iter().map(|&p| format!("{:>3}", dim(p, q))).collect();
        out.push_str(&format!("q={q:>3} |{}\n", cells.join("")));
    }
    let header: Vec<String> = ps.iter().map(|p| format!("{p:>3}")).collect();
    out.push_str(&format!("  p=   {}\n\n", header.join("")));
    out
}
