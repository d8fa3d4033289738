//! Gridded 1+1 Lorentzian geometry: cones, chronological sets, I₀, the
//! timelike tube envelope and the tube sweep.

mod envelope;
mod front;
mod model;
mod region;
mod tube;

pub use envelope::{timelike_envelope, timelike_envelope_with, Envelope, ENVELOPE_ITER_CAP};
pub use front::{
    chronological_set, chronological_set_with, i_zero, i_zero_with, is_chronological,
    resolution_warning, Bracket, CausalSet, Direction, FrontOptions, Seed,
};
pub use model::{kruskal_r, kruskal_residual, CausalClass, Preset, SpacetimeModel, NULL_BAND};
pub use region::{Grid, Region};
pub use tube::{
    forward_cone_set, holmgren_sweep, tube_sweep, BoundarySample, CurveFamily, HolmgrenRow, Side,
    TimelikeCurve, TubeBoundary, TubeConfig, TubeSlice, TubeSweep,
};
