//! Self-organizing maps that tolerate missing values.
//!
//! Observations carry an explicit missingness mask. Winner selection and
//! code-vector updates use distances restricted to the components actually
//! present, so incomplete data takes part in training (or is classified
//! afterwards as supplementary) without being imputed first. A trained
//! codebook then estimates the missing entries a posteriori: from the
//! winning unit alone, or as a membership-probability-weighted mean over
//! all units. Hierarchical clustering of the code-vectors yields
//! super-classes, and a mask-and-recover harness measures how well
//! suppressed values are recovered.
//!
//! The `parallel` feature (on by default) runs classification, batch
//! imputation, and evaluation replicates on a rayon pool; disable it for a
//! fully sequential build. Training itself is sequential either way, since
//! each online step reads the codebook the previous one wrote.

pub mod data;
pub mod error;
pub mod evaluation;
pub mod impute;
pub mod som;
pub mod superclass;

pub use error::{Error, Result};
