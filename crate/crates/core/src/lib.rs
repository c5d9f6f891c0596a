//! Audits concept-combination membership data for violations of classical
//! probability structure, fits a two-concept quantum interference model to
//! each triple, and realizes the fit as explicit vectors and projectors in
//! `C^3` whose Born probabilities reproduce the data.
//!
//! - [`classicality`]: representability deficits and extension classes.
//! - [`interference_fit`]: forward model and inverse fit of `(n, n', phi)`.
//! - [`realization`]: the `C^3` model and its Born-rule evaluation.
//! - [`qlinalg`]: the small complex linear algebra underneath.
//! - [`scop`]: states, contexts and transition probabilities.
//! - [`dataset`]: CSV in, JSON reports and curve tables out.

pub mod classicality;
pub mod dataset;
pub mod interference_fit;
pub mod qlinalg;
pub mod realization;
pub mod scop;

pub use classicality::{classify, ClassicalityVerdict, Connective, ExtensionClass, MembershipTriple};
pub use dataset::{parse_dataset, run_pipeline, Dataset, ItemReport, PipelineOptions, Report, Stage};
pub use interference_fit::{fit, FitParameters, FitResult};
pub use realization::{build_model, contextualized_weight, verify_model, ConceptPairModel, Target};
