use std::collections::{BTreeMap, BTreeSet};

use chernlab::spectral::schema::{double_complex_from_json, filtered_complex_from_json, page_report};
use chernlab::spectral::{page, DoubleComplex, DoubleFiltration, FilteredComplex, SpectralError};
use serde_json::{json, Value};

use crate::report::{Check, Exit, Failure, Outcome};

fn classify(e: SpectralError) -> Failure {
    let exit = match e {
        SpectralError::DSquaredNonzero { .. }
        | SpectralError::NotSubcomplex { .. }
        | SpectralError::NotDecreasing { .. }
        | SpectralError::NotExhaustive
        | SpectralError::Convention { .. } => Exit::Structure,
        SpectralError::Shape(_) | SpectralError::Parse(_) | SpectralError::NegativePage(_) => Exit::Input,
        SpectralError::RepresentativeDependence { .. } | SpectralError::NonStabilization { .. } => Exit::Disagreement,
        SpectralError::NotContained | SpectralError::Internal(_) => Exit::Internal,
    };
    Failure::new(exit, e.to_string())
}

/// `H_H` (or `H_V` when `vertical`) at `(i, j)` from ranks.
fn one_way_cohomology(dc: &DoubleComplex, i: usize, j: usize, vertical: bool) -> usize {
    let (out, incoming) = if vertical {
        (dc.vertical(i, j).rank(), j.checked_sub(1).map_or(0, |j0| dc.vertical(i, j0).rank()))
    } else {
        (dc.horizontal(i, j).rank(), i.checked_sub(1).map_or(0, |i0| dc.horizontal(i0, j).rank()))
    };
    dc.dim(i, j) - out - incoming
}

/// Compares the first page with the cohomology of the differential that the
/// filtration leaves on the associated graded.
fn first_page_check(dc: &DoubleComplex, c: &FilteredComplex, filtration: DoubleFiltration) -> Result<Check, Failure> {
    let e1 = page(c, 1).map_err(classify)?;
    let mut mismatches = Vec::new();
    for i in 0..dc.width() {
        for j in 0..dc.height() {
            let (p, q, expected) = match filtration {
                DoubleFiltration::Vertical => (j as i64, i as i64, one_way_cohomology(dc, i, j, false)),
                DoubleFiltration::Horizontal => (i as i64, j as i64, one_way_cohomology(dc, i, j, true)),
            };
            let got = e1.dim(p, q);
            if got != expected {
                mismatches.push(format!("({p},{q}): {got} vs {expected}"));
            }
        }
    }
    let which = match filtration {
        DoubleFiltration::Vertical => "horizontal",
        DoubleFiltration::Horizontal => "vertical",
    };
    let detail = if mismatches.is_empty() {
        format!("E_1 equals {which} cohomology at all {} cells", dc.width() * dc.height())
    } else {
        mismatches.join(", ")
    };
    Ok(Check::new(&format!("E_1 = {which} cohomology"), mismatches.is_empty(), detail))
}

/// Page dimensions never increase, so the first page whose dimensions match
/// the infinity page is the one from which the sequence is constant.
fn first_stable_page(c: &FilteredComplex, infinity: &BTreeMap<String, usize>, bound: i64) -> Result<i64, Failure> {
    for r in 0..bound {
        let pg = page(c, r).map_err(classify)?;
        if pg.dims().into_iter().all(|((p, q), d)| infinity.get(&format!("{p},{q}")).copied().unwrap_or(0) == d) {
            return Ok(r);
        }
    }
    Ok(bound)
}

pub fn cmd_spectral(bytes: &[u8], pages: Option<i64>, double: Option<DoubleFiltration>) -> Result<Outcome, Failure> {
    let value: Value =
        serde_json::from_slice(bytes).map_err(|e| Failure::new(Exit::Input, format!("malformed JSON: {e}")))?;
    let (complex, double_check) = match double {
        None => (filtered_complex_from_json(&value).map_err(classify)?, None),
        Some(f) => {
            let dc = double_complex_from_json(&value).map_err(classify)?;
            let c = dc.total(f).map_err(classify)?;
            let check = first_page_check(&dc, &c, f)?;
            (c, Some(check))
        }
    };
    if let Some(r) = pages.filter(|&r| r < 0) {
        return Err(classify(SpectralError::NegativePage(r)));
    }
    let report = page_report(&complex, pages).map_err(classify)?;
    let last = pages.unwrap_or(report.stabilization);
    let mut checks = vec![Check::new("d_r squares to zero", true, format!("pages 0..={last}"))];
    let keys: BTreeSet<&String> = report.infinity.keys().chain(report.graded_cohomology.keys()).collect();
    let off: Vec<String> = keys
        .into_iter()
        .filter_map(|k| {
            let (a, b) = (report.infinity.get(k).copied().unwrap_or(0), report.graded_cohomology.get(k).copied().unwrap_or(0));
            (a != b).then(|| format!("({k}): {a} vs {b}"))
        })
        .collect();
    let converges = off.is_empty();
    checks.push(Check::new(
        "E_inf = graded cohomology",
        converges,
        if converges { "entrywise equal".to_string() } else { off.join(", ") },
    ));
    checks.extend(double_check);
    let degenerates_at = first_stable_page(&complex, &report.infinity, report.stabilization)?;
    let mut results = serde_json::to_value(&report).map_err(|e| Failure::new(Exit::Internal, e.to_string()))?;
    results["converges"] = json!(converges);
    results["degenerates_at"] = json!(degenerates_at);
    if let Some(f) = double {
        results["filtration"] = json!(f);
    }
    let mut text = report.table.clone();
    text.push_str(&format!("degenerates at page {degenerates_at}\n"));
    let outcome = Outcome::new(results, checks, text);
    if let Some(bad) = outcome.checks.iter().find(|c| !c.passed) {
        let message = format!("{} failed: {}", bad.name, bad.detail);
        return Ok(outcome.failing(Exit::Disagreement, message));
    }
    Ok(outcome)
}
