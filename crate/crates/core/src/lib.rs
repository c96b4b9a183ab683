//! Statistical analysis of equity trading activity.
//!
//! The pipeline aggregates tick trades into regular activity series
//! ([`ingest`]), removes the intraday U-shape ([`pattern`]), studies the
//! distribution of trading values ([`distribution`]), the scaling of growth
//! fluctuations with size ([`growth`]) and long-term correlations via DFA
//! ([`dfa`]). [`surrogate`] builds synthetic activity with known exponents
//! to check the estimators against each other.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dfa;
pub mod distribution;
pub mod error;
pub mod growth;
pub mod ingest;
pub mod io;
pub mod pattern;
pub mod stats;
pub mod surrogate;

pub use error::{Error, Result};
