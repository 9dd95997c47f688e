//! Estimation of real cohomology groups of a metric-measure space from point
//! samples.
//!
//! The pipeline: build weighted Vietoris-Rips complexes across all scales
//! where the complex changes, compare short-time and long-time heat operators
//! of the combinatorial Hodge Laplacian at each scale, select the scale where
//! the two operators differ the most, and report the kernel dimension of the
//! selected Laplacian as the Betti number estimate.
//!
//! Modules mirror the pipeline stages:
//!
//! - [`metric`]: point clouds, distance matrices, synthetic samplers
//! - [`complex`]: Vietoris-Rips skeleta with geometric simplex weights
//! - [`hodge`]: coboundary operators, symmetrized Hodge Laplacians, spectra
//! - [`semigroup`]: operator-comparison criteria evaluated in eigenvalue space
//! - [`selection`]: the scale scan, argmax selection and Betti estimate
//! - [`io`]: CSV/JSON interchange formats

pub mod complex;
pub mod hodge;
pub mod io;
pub mod metric;
pub mod selection;
pub mod semigroup;

mod eigen;

#[cfg(test)]
pub(crate) mod test_util;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigensolver failed on a {n}x{n} matrix (LAPACK info = {info})")]
    Eigensolver { n: usize, info: i32 },

    #[error("no {q}-dimensional structure at any scale in the grid")]
    NoQStructure { q: usize },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
