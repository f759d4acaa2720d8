//! Euler characteristics of spaces built from surfaces, spheres, tori and
//! `S¹×S³` by products and connected sums, Smillie's flat manifolds with
//! nonzero Euler characteristic, and the degree bound for flat `GL⁺(2,ℝ)`
//! bundles over surfaces.
//!
//! Expressions:
//!
//! ```text
//! sum     := product ('#' product)*
//! product := power ('*' power)*
//! power   := atom ('^' count)?          X^k is the k-fold connected sum X # … # X
//! atom    := 'Sigma(' g ')' | 'Sphere(' n ')' | 'Torus(' n ')' | 'Hopf(' m ')'
//!          | 'P' | 'M4' | 'M6' | '(' sum ')'
//! ```
//!
//! `P` is `S¹×S³`, `Hopf(m)` is `S¹×S^{m−1}`, and `M4`, `M6` abbreviate
//! Smillie's manifolds. Whitespace is ignored.

use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpaceExpr {
    /// Closed orientable surface of genus `g`.
    Surface(u32),
    Sphere(u32),
    /// `S¹ × S³`.
    P,
    Torus(u32),
    /// `S¹ × S^{m−1}`.
    Hopf(u32),
    Product(Box<SpaceExpr>, Box<SpaceExpr>),
    ConnectedSum(Vec<SpaceExpr>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EulerError {
    #[error("{message} at column {column}\n  {input}\n  {caret}^", caret = " ".repeat(*column - 1))]
    Parse { message: String, column: usize, input: String },
    #[error("connected sums are only evaluated for even dimensions, got dimension {0}")]
    OddConnectedSum(u32),
    #[error("connected sum of spaces of dimensions {0} and {1}")]
    MismatchedDimensions(u32, u32),
    #[error("Smillie's construction needs an even dimension of at least 4, got {0}")]
    SmillieDimension(u32),
}

impl SpaceExpr {
    pub fn product(a: SpaceExpr, b: SpaceExpr) -> Self {
        SpaceExpr::Product(Box::new(a), Box::new(b))
    }

    /// `(Σ₃ × Σ₃) # P^{#6}`.
    pub fn smillie_m4() -> Self {
        let mut parts = vec![SpaceExpr::product(SpaceExpr::Surface(3), SpaceExpr::Surface(3))];
        parts.extend(std::iter::repeat_n(SpaceExpr::P, 6));
        SpaceExpr::ConnectedSum(parts)
    }

    /// `((Σ₃ × Σ₃) # P^{#9}) × Σ₃`.
    pub fn smillie_m6() -> Self {
        let mut parts = vec![SpaceExpr::product(SpaceExpr::Surface(3), SpaceExpr::Surface(3))];
        parts.extend(std::iter::repeat_n(SpaceExpr::P, 9));
        SpaceExpr::product(SpaceExpr::ConnectedSum(parts), SpaceExpr::Surface(3))
    }

    pub fn dimension(&self) -> u32 {
        match self {
            SpaceExpr::Surface(_) => 2,
            SpaceExpr::Sphere(n) | SpaceExpr::Torus(n) | SpaceExpr::Hopf(n) => *n,
            SpaceExpr::P => 4,
            SpaceExpr::Product(a, b) => a.dimension() + b.dimension(),
            SpaceExpr::ConnectedSum(parts) => parts.first().map_or(0, SpaceExpr::dimension),
        }
    }

    /// Checks that every connected sum joins spaces of one even dimension.
    pub fn validate(&self) -> Result<(), EulerError> {
        match self {
            SpaceExpr::Product(a, b) => {
                a.validate()?;
                b.validate()
            }
            SpaceExpr::ConnectedSum(parts) => {
                let dim = self.dimension();
                for part in parts {
                    part.validate()?;
                    if part.dimension() != dim {
                        return Err(EulerError::MismatchedDimensions(dim, part.dimension()));
                    }
                }
                if dim % 2 == 1 {
                    return Err(EulerError::OddConnectedSum(dim));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// `χ`, with `χ(M # N) = χ(M) + χ(N) − 2` in even dimensions.
pub fn euler_char(e: &SpaceExpr) -> Result<i64, EulerError> {
    e.validate()?;
    Ok(chi(e))
}

fn chi(e: &SpaceExpr) -> i64 {
    match e {
        SpaceExpr::Surface(g) => 2 - 2 * *g as i64,
        SpaceExpr::Sphere(n) => 1 + if n % 2 == 0 { 1 } else { -1 },
        SpaceExpr::P | SpaceExpr::Torus(_) | SpaceExpr::Hopf(_) => 0,
        SpaceExpr::Product(a, b) => chi(a) * chi(b),
        SpaceExpr::ConnectedSum(parts) => parts.iter().map(chi).sum::<i64>() - 2 * (parts.len() as i64 - 1),
    }
}

/// A product of copies of `M⁴` and `M⁶` of dimension `dim`, with at most one
/// `M⁶`, and its Euler characteristic `4^a · 8^b`.
pub fn smillie(dim: u32) -> Result<(SpaceExpr, i64), EulerError> {
    if dim % 2 == 1 || dim < 4 {
        return Err(EulerError::SmillieDimension(dim));
    }
    let (fours, six) = if dim % 4 == 0 { (dim / 4, false) } else { ((dim - 6) / 4, true) };
    let mut factors: Vec<SpaceExpr> = std::iter::repeat_with(SpaceExpr::smillie_m4).take(fours as usize).collect();
    if six {
        factors.push(SpaceExpr::smillie_m6());
    }
    let expr = factors.into_iter().reduce(SpaceExpr::product).expect("at least one factor");
    let chi = euler_char(&expr)?;
    Ok((expr, chi))
}

/// A rank-2 oriented bundle of degree `d` over the genus-`g` surface admits a
/// flat structure exactly when `|d| < g`.
pub fn milnor_admissible(g: u32, d: i64) -> bool {
    d.unsigned_abs() < g as u64
}

impl fmt::Display for SpaceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceExpr::Surface(g) => write!(f, "Sigma({g})"),
            SpaceExpr::Sphere(n) => write!(f, "Sphere({n})"),
            SpaceExpr::Torus(n) => write!(f, "Torus({n})"),
            SpaceExpr::Hopf(m) => write!(f, "Hopf({m})"),
            SpaceExpr::P => write!(f, "P"),
            SpaceExpr::Product(a, b) => {
                let side = |e: &SpaceExpr| match e {
                    SpaceExpr::ConnectedSum(parts) if parts.len() > 1 && !all_equal(parts) => format!("({e})"),
                    _ => e.to_string(),
                };
                let right = match **b {
                    SpaceExpr::Product(..) => format!("({b})"),
                    _ => side(b),
                };
                write!(f, "{} * {}", side(a), right)
            }
            SpaceExpr::ConnectedSum(parts) => {
                let mut runs: Vec<(&SpaceExpr, usize)> = Vec::new();
                for p in parts {
                    match runs.last_mut() {
                        Some((q, k)) if *q == p => *k += 1,
                        _ => runs.push((p, 1)),
                    }
                }
                let shown: Vec<String> = runs
                    .into_iter()
                    .map(|(p, k)| {
                        let atom = match p {
                            SpaceExpr::Product(..) | SpaceExpr::ConnectedSum(_) => format!("({p})"),
                            _ => p.to_string(),
                        };
                        if k == 1 { atom } else { format!("{atom}^{k}") }
                    })
                    .collect();
                write!(f, "{}", shown.join(" # "))
            }
        }
    }
}

fn all_equal(parts: &[SpaceExpr]) -> bool {
    parts.windows(2).all(|w| w[0] == w[1])
}

/// Parses the expression language described in the module docs.
pub fn parse(input: &str) -> Result<SpaceExpr, EulerError> {
    let mut p = Parser { input, chars: input.chars().collect(), pos: 0 };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error("unexpected input"));
    }
    Ok(e)
}

struct Parser<'a> {
    input: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> EulerError {
        EulerError::Parse { message: message.to_string(), column: self.pos + 1, input: self.input.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), EulerError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{c}'")))
        }
    }

    fn sum(&mut self) -> Result<SpaceExpr, EulerError> {
        let mut parts = vec![self.product()?];
        while self.eat('#') {
            parts.push(self.product()?);
        }
        Ok(if parts.len() == 1 { parts.pop().expect("one part") } else { flatten(parts) })
    }

    fn product(&mut self) -> Result<SpaceExpr, EulerError> {
        let mut e = self.power()?;
        while self.eat('*') {
            e = SpaceExpr::product(e, self.power()?);
        }
        Ok(e)
    }

    fn power(&mut self) -> Result<SpaceExpr, EulerError> {
        let e = self.atom()?;
        if self.eat('^') {
            let k = self.number()?;
            if k == 0 {
                return Err(self.error("connected-sum power must be at least 1"));
            }
            return Ok(if k == 1 { e } else { flatten(vec![e; k as usize]) });
        }
        Ok(e)
    }

    fn number(&mut self) -> Result<u32, EulerError> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a number"));
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse().map_err(|_| {
            self.pos = start;
            self.error("number too large")
        })
    }

    fn word(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn argument(&mut self) -> Result<u32, EulerError> {
        self.expect('(')?;
        let n = self.number()?;
        self.expect(')')?;
        Ok(n)
    }

    fn atom(&mut self) -> Result<SpaceExpr, EulerError> {
        if self.eat('(') {
            let e = self.sum()?;
            self.expect(')')?;
            return Ok(e);
        }
        let start = self.pos;
        let word = self.word();
        let e = match word.as_str() {
            "Sigma" => SpaceExpr::Surface(self.argument()?),
            "Sphere" => SpaceExpr::Sphere(self.argument()?),
            "Torus" => SpaceExpr::Torus(self.argument()?),
            "Hopf" => {
                let m = self.argument()?;
                if m < 2 {
                    self.pos = start;
                    return Err(self.error("Hopf(m) needs m >= 2"));
                }
                SpaceExpr::Hopf(m)
            }
            "P" => SpaceExpr::P,
            "M4" => SpaceExpr::smillie_m4(),
            "M6" => SpaceExpr::smillie_m6(),
            "" => return Err(self.error("expected a space")),
            _ => {
                self.pos = start;
                self.skip_ws();
                return Err(self.error(&format!("unknown space '{word}'")));
            }
        };
        Ok(e)
    }
}

/// Merges nested connected sums, which does not change `χ`.
fn flatten(parts: Vec<SpaceExpr>) -> SpaceExpr {
    let mut out = Vec::new();
    for p in parts {
        match p {
            SpaceExpr::ConnectedSum(inner) => out.extend(inner),
            other => out.push(other),
        }
    }
    SpaceExpr::ConnectedSum(out)
}
