//! Simulation core for sequential choice bandits with threshold users.
//!
//! Users carry a hidden threshold θ and a patience budget. Actions at or
//! below θ pay `r(y)`; actions above θ burn one unit of patience, and a
//! crossing with no patience left makes the user leave. The crate contains
//! the user simulator, the δ-policy oracle (value iteration over uncertainty
//! intervals), the exploration and exploitation learners, the population
//! estimators that connect them, and the sequential-learning baseline.
//!
//! Everything here is `no_std` + `alloc`. The `parallel` feature solves
//! value-table layers with rayon and pulls in `std`.

#![no_std]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod baseline;
pub mod env;
pub mod error;
pub mod estimate;
pub mod exploit;
pub mod explore;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod rng;
pub mod table;

mod math;

pub use error::{Error, Result};
pub use model::{
    Beta, FeedbackMode, FeedbackModel, ModelConfig, RewardFunction, ThresholdDistribution,
};
