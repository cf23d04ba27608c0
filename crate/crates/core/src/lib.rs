//! Leakage analysis for the SARG04-based J-protocol quantum private query.
//!
//! The crate simulates oblivious key distribution at the level of measurement
//! statistics, distills and applies the oblivious key to a bit database, and
//! measures how much of that database a dishonest user can infer under three
//! attack models:
//!
//! * honest-but-curious direct observation (`hbc`), which post-processes the
//!   inconclusive signals of an otherwise honest transcript;
//! * unambiguous discrimination (`ud`) with stored signals;
//! * minimum-error discrimination (`med`) with stored signals.
//!
//! It also models the multi-encryption defense, where the database is
//! encrypted under two or three independently shifted final keys.
//!
//! [`analytics`] holds the closed forms, [`attacks`] the Monte Carlo engine and
//! [`harness`] the table/curve/simulation front end used by the `qpq` binary.

pub mod analytics;
pub mod attacks;
pub mod distillation;
mod error;
pub mod harness;
pub mod protocol;
pub mod stream;

pub use error::{Error, Result};
