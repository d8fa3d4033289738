//! Ladders, boxes, sampled families and the decay-rate estimator.
//!
//! Everything downstream decides "exponentially small" through [`fit_decay`].

mod decay;
mod family;
mod grid;
mod ladder;

pub use decay::{fit_decay, DecayFit, Verdict, DEFAULT_DELTA_MIN, DEFAULT_RHO_MIN};
pub(crate) use family::cache_step;
pub use family::{weighted_sup, GridCache, SampledFamily};
pub use grid::{grid_nodes, AxisBox};
pub use ladder::HLadder;

pub use num_complex::Complex64 as C64;
