//! Analytic wavefront detection for h-independent distributions: the
//! constant-family FBI scan, the sech-kernel boundary-value split and a
//! Taylor-coefficient radius estimator.

mod detect;
mod onesided;
mod radius;
mod sech;
mod signal;

pub use detect::{wfa_detect, Directions, WfaReport};
pub use onesided::{one_sided_check, OneSided, Side};
pub use radius::{analyticity_radius, RadiusEstimate, TaylorInput, Trend};
pub use sech::{sech_decompose, sech_kernel, sech_reconstruct, SechKernel};
pub use signal::Distribution1d;
