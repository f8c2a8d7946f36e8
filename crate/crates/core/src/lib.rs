//! Stochastic state reduction driven by probability current.
//!
//! Components of a superposition evolve under a piecewise-constant coupling schedule. A hit on a
//! component is sampled with time density `(sum of positive currents into the watched subsystem) / s`
//! and reduces the state according to the selected rule family. Ready brain states, created by
//! discontinuous spawns, are what a standard-mode hit acts on.
//!
//! ```
//! use readyrules::ensemble::run_ensemble;
//! use readyrules::rules::RuleMode;
//! use readyrules::scenarios::{build, ScenarioParams};
//!
//! let scenario = build("observer_on_board", &ScenarioParams::default().full_transfer()).unwrap();
//! let stats = run_ensemble(&scenario, RuleMode::standard(), 100, 0).unwrap();
//! assert_eq!(stats.frequency("D1 1:B1*"), 1.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensemble;
pub mod error;
pub mod pulse;
pub mod rules;
pub mod scenarios;
pub mod statedyn;
pub mod verify;

pub use error::{Error, Result};
