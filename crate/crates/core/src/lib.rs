//! Revenue-optimal pricing, service levels and scheduling for a single-server
//! queue shared by a contract-bound primary class and a price- and
//! delay-sensitive secondary class.
//!
//! * [`queue`]: closed-form mean waits under delay-dependent priority.
//! * [`cubic`]: the characteristic cubics and their bracketed roots.
//! * [`optimizer`]: region classification and the finite-step optimum.
//! * [`game`]: provider / user-set best responses and equilibrium checks.
//! * [`sim`]: discrete-event simulation used to cross-check the waits.
//! * [`cli`]: the command-line front end behind the `queue-pricing` binary.
//!
//! ```
//! use queue_pricing::{MarketParams, PricingModel, QueueParams};
//!
//! let model = PricingModel::new(
//!     QueueParams::new(6.0, 12.0, 0.2)?,
//!     MarketParams::new(120.0, 0.1, 0.3)?,
//! )?;
//! let op = model.optimize(8.0)?;
//! assert!((op.revenue - 6277.9).abs() < 0.5);
//! # Ok::<(), queue_pricing::Error>(())
//! ```

// `!(x > y)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cubic;
mod error;
pub mod game;
pub mod optimizer;
pub mod queue;
pub mod sim;
pub mod table1;

pub use error::{Error, Result};
pub use optimizer::{MarketParams, OperatingPoint, PricingModel, Region, RegionReport};
pub use queue::{PriorityRatio, QueueParams, WaitPair};
