//! Analysis toolkit for mass school shooting incidents in the United States,
//! 1999–2024.
//!
//! The crate ships a curated incident corpus and reproduces the standard
//! analyses run over it:
//!
//! * [`corpus`] parses and validates the incident records and derives the
//!   yearly series, state counts and location histogram.
//! * [`stats`] holds the per-school probability arithmetic and Pearson
//!   correlation with exact two-tailed p-values.
//! * [`timeline`] splits each attack into its four phases.
//! * [`forecast`] fits zero-inflated Poisson, OLS and SVR models to the
//!   yearly series and projects 2025–2030.
//! * [`gametheory`] simulates the shooter/law-enforcement game and searches
//!   best responses on finite strategy grids.
//! * [`report`] assembles every table and figure series into one bundle.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod error;
pub mod forecast;
pub mod gametheory;
pub mod published;
pub mod report;
pub mod stats;
pub mod timeline;

#[cfg(feature = "cli")]
pub mod cli;

pub use error::{Error, Result};
