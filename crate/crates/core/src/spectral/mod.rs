//! Exact spectral sequences of bounded filtered cochain complexes over `ℚ`,
//! with a front end for first-quadrant double complexes.

pub mod complex;
pub mod linalg;
pub mod pages;
pub mod schema;

use thiserror::Error;

pub use complex::{Convention, DoubleComplex, DoubleFiltration, FilteredComplex};
pub use linalg::{QMatrix, Subspace, Q};
pub use pages::{
    cycles_up_to_filtration, graded_cohomology, infinity_page, page, page_differential, page_entry, InfinityPage,
    Page, PageEntry,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectralError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("quotient requested by a subspace that is not contained in the numerator")]
    NotContained,
    #[error("d∘d is nonzero out of degree {degree}")]
    DSquaredNonzero { degree: i64 },
    #[error("F^{p} is not a subcomplex: d maps F^{p}C^{n} outside F^{p}")]
    NotSubcomplex { p: i64, n: i64 },
    #[error("filtration is not decreasing at p = {p}, n = {n}")]
    NotDecreasing { p: i64, n: i64 },
    #[error("filtration must start at the whole complex and end at zero")]
    NotExhaustive,
    #[error("dH and dV do not satisfy the declared sign convention at ({i}, {j})")]
    Convention { i: usize, j: usize },
    #[error("page index must be non-negative, got {0}")]
    NegativePage(i64),
    #[error("d_{r} at ({p}, {q}) depends on the choice of representatives")]
    RepresentativeDependence { r: i64, p: i64, q: i64 },
    #[error("pages did not stabilize by r = {r} at ({p}, {q})")]
    NonStabilization { r: i64, p: i64, q: i64 },
    #[error("invalid input: {0}")]
    Parse(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}
