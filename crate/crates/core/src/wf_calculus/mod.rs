//! Conic sets and the rules that bound wavefront sets of sums, products,
//! tensor products and pullbacks.

mod causal;
mod cone;
mod conic;
mod geometry;

pub use causal::{
    rightmost_future_causal, spectrum_cone, ucp_predicates, ConeModel, SpectrumCone, UcpVerdict,
};
pub use cone::{angle_of, Cone, SNAP};
pub use conic::{cs_combine, Cell, Combine, ConicSet, SmoothMap};
pub use geometry::{char_set, conormal_of_hypersurface, Hypersurface, Symbol, CONORMAL_SPREAD};
