//! Market-calibrated, risk-selected non-self-financing hedging of a European
//! call in a discrete-time market with bounded i.i.d. jumps.
//!
//! The workflow has two stages:
//!
//! 1. [`contour`]: find every jump pair `(u, d)` whose binomial price matches
//!    the quoted option price.
//! 2. [`criteria`]: hedge bootstrap price paths ([`bootstrap`]) with each of
//!    those pairs ([`hedging`]) and pick the pair that optimizes a risk
//!    criterion of the resulting residual stream.
//!
//! [`report`] strings the stages together and writes the run artifacts.

pub mod bootstrap;
pub mod contour;
pub mod criteria;
pub mod error;
pub mod hedging;
pub mod par;
pub mod pricing;
pub mod report;

pub use error::{Error, Result};
pub use par::Execution;
