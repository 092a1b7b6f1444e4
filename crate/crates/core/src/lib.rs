//! Graduation analytics over a student registry.
//!
//! The pipeline selects the modelling cohort at an observation date, derives
//! per-study-right covariates and labels, fits logistic and linear models,
//! scores students (including a two-stage graduation / time-to-degree
//! prediction), evaluates accuracy, and emits SQL views that embed the fitted
//! coefficients.

pub mod featurize;
pub mod glm;
pub mod privacy;
pub mod registry;
pub mod pipeline;
pub mod codegen;
pub mod metrics;
pub mod synthgen;
pub mod cli;
