//! Worked physics examples: Källén–Lehmann two-point functions and the
//! analyticity of spectral measures, the 1+1 massless propagators, a
//! smearing counterexample with vanishing radius of convergence, and a
//! finite-truncation quantum mechanics model with its correlators.

mod commutator;
mod counterexample;
mod qm;
mod spectral;
mod two_point;

pub use commutator::{
    commutator_1p1, poly_bump, product_bump, source_support, PropagatorGrid, PropagatorKind,
    SUPPORT_LEVEL,
};
pub use counterexample::{
    counterexample_g, g_complex, g_derivative_closed, CounterexampleReport, DerivativeRow, K_MAX,
    ROUTE_TOLERANCE,
};
pub use qm::{
    basis, correlator_terms, in_nested_cone, qm_correlator_wfa, qm_fbi_profile, rightmost_verdict,
    rough_vector, CorrelatorReport, Finding, QmProfile, QmRung, TruncatedQM, DEFAULT_QM_WINDOW,
};
pub use spectral::{
    measure_analyticity_class, spectral_fourier, AnalyticityClass, AnalyticityReport, Density,
    MomentRow, SpectralMeasure, TAIL_TOLERANCE,
};
pub use two_point::{two_point_kl, two_point_mass, two_point_momentum, two_point_time_source};
