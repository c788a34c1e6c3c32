//! Link-level analysis of backscatter relaying with energy detection.
//!
//! The crate covers amplify-and-forward (AF) and decode-and-forward (DF)
//! relays: baseband sample synthesis ([`txsim`]), exact and Gaussian models
//! of the energy statistic ([`statmodels`]), detection thresholds
//! ([`thresholds`]), analytic BER, power allocation and outage ([`perf`]) and
//! an experiment runner ([`bench`]) behind the `bsrelay` binary.

// `!(x > 0.0)` is how argument checks reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod perf;
pub mod root;
pub mod specfun;
pub mod statmodels;
pub mod sysmodel;
pub mod thresholds;
pub mod txsim;

pub use error::{Error, Result};
