//! Univariate time-series anomaly detection built on a small
//! harmonic-basis forecasting model.
//!
//! The crate is organised around the stages of a detection run:
//!
//! * [`pipeline`] loads and prepares series (normalization, differencing,
//!   sliding windows, splits, synthetic data);
//! * [`basis`] expands windows into stacks of fixed univariate function
//!   rows;
//! * [`ndcore`] provides the differentiable kernels and the optimizer;
//! * [`model`] assembles the forecasting network with hand-derived
//!   gradients;
//! * [`trainer`] runs mini-batch training with early stopping;
//! * [`detector`] converts predictions into per-point anomaly scores;
//! * [`metrics`] evaluates score traces with segment-aware F1 variants
//!   and AUPRC;
//! * [`experiment`] wires the stages into reproducible end-to-end runs.

pub mod basis;
pub mod detector;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod model;
pub mod ndcore;
pub mod pipeline;
pub mod trainer;

pub use error::{Error, Result};
