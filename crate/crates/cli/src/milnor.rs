use std::path::Path;

use chernlab::milnor::{
    build_representation, milnor_number_by_winding_with_tolerance, milnor_number_with_tolerance, MilnorError,
    SurfaceGroupRep,
};
use serde_json::{json, Value};

use crate::report::{Check, Exit, Failure, Outcome};

fn classify(e: MilnorError) -> Failure {
    let exit = match e {
        MilnorError::RelationViolated { .. } | MilnorError::Instability { .. } => Exit::Structure,
        MilnorError::GenusMismatch { .. } | MilnorError::ZeroGenus => Exit::Input,
        MilnorError::Inadmissible { .. } => Exit::Inadmissible,
        _ => Exit::Internal,
    };
    Failure::new(exit, e.to_string())
}

pub fn parse_representation(bytes: &[u8]) -> Result<SurfaceGroupRep, Failure> {
    let value: Value =
        serde_json::from_slice(bytes).map_err(|e| Failure::new(Exit::Input, format!("malformed JSON: {e}")))?;
    serde_json::from_value(value).map_err(|e| Failure::new(Exit::Input, format!("bad representation: {e}")))
}

/// Degree of the representation, optionally cross-checked by winding number.
fn evaluate(rep: &SurfaceGroupRep, tol: f64, oracle: bool) -> Result<(Value, Vec<Check>, Option<(i64, i64)>), Failure> {
    let g = rep.genus();
    let residual = rep.relation_residual();
    let mut checks = vec![Check::new(
        "surface relation",
        residual <= tol,
        format!("|prod [A_i, B_i] - I|_inf = {residual:.3e} (tolerance {tol:.1e})"),
    )];
    let delta = milnor_number_with_tolerance(rep, tol).map_err(classify)?;
    let bound = g as i64 - 1;
    checks.push(Check::new("degree bound", delta.abs() <= bound, format!("|{delta}| <= {bound}")));
    let mut results = json!({
        "genus": g,
        "delta": delta,
        "bound": bound,
        "relation_residual": residual,
    });
    let mut pair = None;
    if oracle {
        let winding = milnor_number_by_winding_with_tolerance(rep, tol).map_err(classify)?;
        checks.push(Check::new(
            "winding number agrees",
            winding == delta,
            format!("lift arithmetic {delta}, sampled loop {winding}"),
        ));
        results["winding_delta"] = json!(winding);
        pair = Some((delta, winding));
    }
    Ok((results, checks, pair))
}

fn settle(outcome: Outcome, delta: i64, bound: i64, pair: Option<(i64, i64)>) -> Outcome {
    if let Some((a, b)) = pair.filter(|(a, b)| a != b) {
        return outcome.failing(Exit::Disagreement, format!("lift arithmetic gives {a}, winding gives {b}"));
    }
    if delta.abs() > bound {
        return outcome.failing(Exit::Internal, format!("computed degree {delta} exceeds the bound {bound}"));
    }
    outcome
}

pub fn cmd_milnor(bytes: &[u8], tol: f64, oracle: bool) -> Result<Outcome, Failure> {
    let rep = parse_representation(bytes)?;
    let (results, checks, pair) = evaluate(&rep, tol, oracle)?;
    let (delta, bound) = (results["delta"].as_i64().unwrap_or(0), results["bound"].as_i64().unwrap_or(0));
    let mut text = format!("genus {}\ndelta = {delta}\n|delta| <= g - 1 = {bound}: ", rep.genus());
    text.push_str(if delta.abs() <= bound { "holds\n" } else { "VIOLATED\n" });
    if let Some((_, w)) = pair {
        text.push_str(&format!("winding number = {w}\n"));
    }
    Ok(settle(Outcome::new(results, checks, text), delta, bound, pair))
}

pub fn cmd_build(genus: usize, degree: i64, out: Option<&Path>, tol: f64) -> Result<Outcome, Failure> {
    let rep = build_representation(genus, degree).map_err(|e| match e {
        MilnorError::ZeroGenus => Failure::new(Exit::Inadmissible, "genus 0 admits no degree: need |d| < g"),
        e => classify(e),
    })?;
    let (mut results, mut checks, pair) = evaluate(&rep, tol, true)?;
    let delta = results["delta"].as_i64().unwrap_or(0);
    checks.insert(0, Check::new("requested degree", delta == degree, format!("requested {degree}, computed {delta}")));
    let json = serde_json::to_string_pretty(&rep).map_err(|e| Failure::new(Exit::Internal, e.to_string()))?;
    if let Some(path) = out {
        std::fs::write(path, format!("{json}\n"))
            .map_err(|e| Failure::new(Exit::Input, format!("cannot write {}: {e}", path.display())))?;
        results["out"] = json!(path.display().to_string());
    }
    results["degree"] = json!(degree);
    results["representation"] = serde_json::to_value(&rep).map_err(|e| Failure::new(Exit::Internal, e.to_string()))?;
    let mut text = format!("built genus {genus}, degree {degree}: delta = {delta}\n");
    match out {
        Some(p) => text.push_str(&format!("written to {}\n", p.display())),
        None => text.push_str(&format!("{json}\n")),
    }
    let outcome = Outcome::new(results, checks, text);
    if delta != degree {
        return Ok(outcome.failing(Exit::Disagreement, format!("built degree {delta}, requested {degree}")));
    }
    Ok(settle(outcome, delta, genus as i64 - 1, pair))
}
