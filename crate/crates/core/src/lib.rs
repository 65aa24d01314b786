//! Degrees-of-freedom region and signal-alignment transceiver synthesis for
//! the asymmetric three-user MIMO Y channel (three multi-antenna users
//! exchanging messages through one multi-antenna relay).
//!
//! The crate is organised bottom-up:
//!
//! - [`region`]: the exact rational polytope of achievable DoF tuples, with
//!   membership, vertex enumeration and weighted-sum maximisation.
//! - [`planner`]: symbol extension, user relabeling and the pairwise/cyclic
//!   pattern decomposition with its relay block layout.
//! - [`channel`]: seeded Gaussian channels, antenna deactivation, extension.
//! - [`transceiver`]: precoders, relay zero-forcing and receive filters.
//! - [`simulate`]: noiseless end-to-end decoding and rate-slope estimation.
//! - [`oracle`]: independent verifiers used by tests and the `verify` command.
//!
//! ```
//! use ydof::{channel, linalg::Tolerances, planner, simulate, transceiver};
//! use ydof::{AntennaConfig, DofTuple};
//!
//! # fn main() -> ydof::Result<()> {
//! let config = AntennaConfig::new(3, 2, 2, 4)?;
//! let d = DofTuple::from_integers([2, 0, 0, 2, 2, 0])?;
//! let plan = planner::plan(&d, &config)?;
//! let ch = channel::deactivate(&channel::sample(&config, plan.t, 7)?, plan.j as usize)?;
//! let tol = Tolerances::default();
//! let design = transceiver::design(&plan, &ch, &tol)?;
//! let rep = simulate::run_noiseless(&design, &plan, &ch, 7, simulate::SymbolSource::Gaussian, &tol)?;
//! assert!(rep.recovery.unwrap().success);
//! # Ok(())
//! # }
//! ```

// Dense elimination reads better with explicit row and column indices.
#![allow(clippy::needless_range_loop)]

pub mod channel;
pub mod container;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod planner;
pub mod rational;
pub mod region;
pub mod report;
pub mod simulate;
pub mod transceiver;

pub use error::{Error, Result};
pub use rational::Q;
pub use region::{AntennaConfig, Direction, DofTuple};
