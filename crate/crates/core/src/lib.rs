//! Analysis toolkit for fork-after-withholding mining attacks: closed-form
//! rewards against one or several pools, the two-pool attack game,
//! countermeasure bounds, and a Monte Carlo simulator that checks them.
//!
//! Powers are fractions of the total network hash rate and rewards are
//! expected blocks per round, with one block awarded per round.

pub mod bounds;
pub mod error;
pub mod game;
pub mod model;
pub mod multi;
pub mod optimize;
pub mod scenario_file;
pub mod sim;
pub mod single;

pub use error::{Error, Result};
