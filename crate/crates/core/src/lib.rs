//! Extended Plackett-Luce (EPL) ranking toolkit.
//!
//! - [`perm`]: permutation algebra, rank vectors, distances, Spearman correlation
//! - [`models`]: EPL, Mallows (Kendall/Cayley/Hamming) and Thurstone samplers
//! - [`summaries`]: marginal, top, pairwise and stagewise pairwise counts
//! - [`diagnostics`]: the `T` matrix, `T_m`, `X²_IIA` and classical chi-squared statistics
//! - [`inference`]: MM weight fitting, PCA/MDS reference-order heuristic, MLE search
//! - [`study`]: parametric bootstrap and the simulation studies

pub mod data;
pub mod diagnostics;
pub mod error;
pub mod inference;
pub mod models;
pub mod perm;
pub mod rng;
pub mod study;
pub mod summaries;

pub use data::Dataset;
pub use error::{EplError, Result};
pub use perm::{Metric, Permutation};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
