//! Aspect-level sentiment analysis of scholarly abstracts driven by Shapley
//! attributions.
//!
//! The pipeline runs in five stages, each in its own module:
//!
//! - [`corpus`]: harvest arXiv metadata and build title-prefixed documents.
//! - [`inference`]: classifier abstraction producing label distributions.
//! - [`explain`]: Shapley estimators over text spans and heatmap rendering.
//! - [`aspects`]: attribution-driven aspect extraction and divergence checks.
//! - [`report`]: corpus-level aggregation and report emission.

pub mod aspects;
pub mod corpus;
pub mod explain;
pub mod inference;
pub mod report;
mod span;
mod util;

pub use span::Span;
pub use util::write_atomic;
