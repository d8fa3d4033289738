//! Semiclassical Fourier and FBI transforms.
//!
//! Conventions: T_h f(x,ξ) = α_h ∫ e^{-(x−y)²/2h} e^{i(x−y)·ξ/h} f(y) dy with
//! α_h = 2^{-d/2}(πh)^{-3d/4}, equivalently (2πh)^{-d/2}⟨ψ_{x,ξ,h}, f⟩.

mod coherent;
mod fbi;
mod field;
mod fourier;
mod radial;
mod variants;

use serde::{Deserialize, Serialize};

pub use coherent::{coherent_family, coherent_state, coherent_value};
pub use fbi::{
    alpha_h, fbi_batch, fbi_forward, fbi_point, window_radius, FbiSource, Flagged, EPS_CUT,
};
pub use field::{fbi_adjoint_reconstruct, FbiField, FieldHeader, PhaseBox};
pub use fourier::semiclassical_fourier;
pub use radial::{fbi_radial_reconstruct, RadialResult};
pub use variants::{fbi_classical, fbi_modified, fbi_modified_direct};

/// A point (x, ξ) of phase space R^d × R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

impl PhasePoint {
    pub fn new(x: Vec<f64>, xi: Vec<f64>) -> Self {
        Self { x, xi }
    }

    pub fn d1(x: f64, xi: f64) -> Self {
        Self {
            x: vec![x],
            xi: vec![xi],
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.xi).all(|v| v.is_finite())
    }
}
