//! Variability toolchain for product-process-resource (PPR) models.
//!
//! A PPR model is transformed into a product feature model, a process
//! decision model, a resource feature model and cross-disciplinary
//! constraints linking them. The configuration engine walks a user through
//! the three stages, and the delta generator turns a finished
//! configuration into a function-block application.

pub mod deltagen;
pub mod diag;
pub mod engine;
pub mod lex;
pub mod logic;
pub mod ppr;
pub mod samples;
pub mod synth;
pub mod transform;
pub mod vmodels;

pub use diag::{Diagnostic, Diagnostics, Pos, Severity};
