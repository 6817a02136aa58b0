//! Machine-teaching simulator.
//!
//! Teachers reveal one labeled example per category on a grid of stimuli;
//! 1-nearest-neighbour students generalise from those examples in their own
//! (possibly shuffled) coordinates. The crate measures how representational
//! alignment and teacher label error jointly drive student accuracy, turns
//! that into bucketed utility curves, and uses the curves to match students
//! to teachers.

pub mod agents;
pub mod curves;
pub mod error;
pub mod grid;
pub mod matching;
pub mod pools;
pub mod seeds;
pub mod stats;
pub mod study_io;

pub use error::{Error, Result};
