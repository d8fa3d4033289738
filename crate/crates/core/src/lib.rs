pub mod analytic_wf;
pub mod error;
pub mod microsupport;
pub mod phase_core;
pub mod qft_examples;
pub mod quadrature;
pub mod spacetime;
pub mod special;
pub mod transforms;
pub mod wf_calculus;
