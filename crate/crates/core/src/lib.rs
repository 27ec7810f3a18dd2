//! Projected Picard solver for state-dependent delay and functional
//! differential equations, posed on piecewise-linear `H^1` functions with
//! exponentially weighted norms.
//!
//! Module map:
//! - [`grid_function`]: piecewise-linear functions, exact weighted norms, windows.
//! - [`weighted_calculus`]: operator-norm certification for the pre-history map,
//!   integration from zero and the Sobolev embedding.
//! - [`convex_projection`]: metric projections onto derivative- and box-constrained sets.
//! - [`delay_functionals`]: delay functionals and empirical Lipschitz measurement.
//! - [`picard_solver`]: the projected fixed-point iteration with derivative-bound continuation.
//! - [`scenarios`]: end-to-end model problems.
//! - [`cli`]: command-line front end.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod convex_projection;
pub mod delay_functionals;
pub mod error;
pub mod grid_function;
pub mod picard_solver;
pub mod scenarios;
pub mod weighted_calculus;

pub use error::{Error, Result};
pub use grid_function::{GridFunction, WindowView};

use std::path::Path;

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
