//! Potential heuristics for classical planning with feature conjunctions of
//! arbitrary size: task model, TNF transformation, LP encodings (direct
//! dimension-2 and bucket-elimination based), cost partitioning over
//! abstractions, the 3-coloring hardness reduction and A* search.

pub mod bucket;
pub mod cost_partitioning;
pub mod error;
pub mod feature;
pub mod generator;
pub mod hardness;
pub mod lp;
pub mod potential;
pub mod sas;
pub mod search;
pub mod task;
pub mod tnf;
pub mod transition;

pub use error::{Error, Result};
