//! Simulation and decision procedures for quantum finite automata and their
//! classical counterparts.
//!
//! * [`quantum`]: states, measurements, Kraus channels.
//! * [`classical`]: probabilistic and generalized automata, acceptance modes.
//! * [`oneway`]: measure-once, measure-many and general one-way QFAs.
//! * [`equivalence`]: linearization and exact equivalence checking.
//! * [`twoway`]: two-way machines with classical or quantum heads.
//! * [`format`], [`report`], [`harness`]: file format and command front end.

pub mod alphabet;
pub mod classical;
pub mod equivalence;
pub mod error;
pub mod format;
pub mod harness;
pub mod matrix;
pub mod numeric;
pub mod oneway;
pub mod quantum;
pub mod report;
pub mod twoway;

pub use alphabet::Alphabet;
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use numeric::{Rational, C64};
