use chernlab::euler::{euler_char, parse, smillie, EulerError};
use serde_json::json;

use crate::report::{Check, Exit, Failure, Outcome};

fn input_error(e: EulerError) -> Failure {
    Failure::new(Exit::Input, e.to_string())
}

/// `words` is either an expression (whose words are joined) or
/// `smillie N`.
pub fn cmd_euler(words: &[String]) -> Result<Outcome, Failure> {
    if words.first().map(String::as_str) == Some("smillie") {
        let [_, n] = words else {
            return Err(Failure::new(Exit::Input, "usage: euler smillie N"));
        };
        let dim: u32 = n.parse().map_err(|_| Failure::new(Exit::Input, format!("cannot parse dimension {n:?}")))?;
        return cmd_smillie(dim);
    }
    let input = words.join(" ");
    let expr = parse(&input).map_err(input_error)?;
    let chi = euler_char(&expr).map_err(input_error)?;
    let normalized = expr.to_string();
    let results = json!({"expression": normalized, "dimension": expr.dimension(), "chi": chi});
    let text = format!("chi({normalized}) = {chi}\n");
    Ok(Outcome::new(results, vec![], text))
}

fn cmd_smillie(dim: u32) -> Result<Outcome, Failure> {
    let (expr, chi) = smillie(dim).map_err(input_error)?;
    let recomputed = euler_char(&expr).map_err(input_error)?;
    let checks = vec![
        Check::new("nonzero", chi != 0, format!("chi = {chi}")),
        Check::new("expression evaluates to chi", recomputed == chi, format!("{recomputed} vs {chi}")),
        Check::new("dimension", expr.dimension() == dim, format!("{} vs {dim}", expr.dimension())),
    ];
    let results = json!({"dimension": dim, "expression": expr.to_string(), "chi": chi});
    let text = format!("Smillie manifold of dimension {dim}: {expr}\nchi = {chi}\n");
    let outcome = Outcome::new(results, checks, text);
    if let Some(c) = outcome.checks.iter().find(|c| !c.passed) {
        let message = format!("{} failed: {}", c.name, c.detail);
        return Ok(outcome.failing(Exit::Internal, message));
    }
    Ok(outcome)
}
