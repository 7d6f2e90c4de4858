//! Multivariate Hawkes-process toolkit for Bitcoin block arrivals and price jumps.
//!
//! - [`hawkes`]: intensities, compensators, kernel norms and the log-likelihood.
//! - [`sim`]: Ogata thinning simulation.
//! - [`fit`]: maximum-likelihood estimation with a profile search over decays.
//! - [`gof`]: random-time-change residuals, Q-Q data, slope deviation and KS tests.
//! - [`ingest`]: block-timestamp cleaning, VWAP log returns, jump extraction and
//!   the trivariate event stream.

// `!(x > 0.0)` is used deliberately so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fit;
pub mod gof;
pub mod hawkes;
pub mod ingest;
pub mod quadrature;
pub mod sim;

pub use error::{Error, Result, RowError};
pub use hawkes::{Event, EventSequence, HawkesModel, KernelSpec, Matrix};
