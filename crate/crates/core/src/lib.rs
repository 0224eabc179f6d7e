//! Risk laboratory for a pension guarantee fund.
//!
//! The crate simulates claims on the fund from insolvent sponsors of
//! defined-benefit schemes under correlated markets, values the guarantee
//! as a put on scheme assets, prices competing levy schedules, runs
//! twin-peaks regulatory stress tests on insurer balance sheets, and tracks
//! the fund's own solvency.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fixtures;
pub mod grade;
pub mod ledger;
pub mod levy;
pub mod market;
pub mod pricing;
pub mod report;
pub mod rng;
pub mod scheme;
pub mod sim;
pub mod stats;
pub mod stress;
mod validate;

pub use error::{Error, Result};
