//! Microsupport estimation for h-families: scans over phase windows,
//! uniform smallness off ε-collars, bump and step families, pullbacks and
//! products.

mod band;
mod bump;
mod product;
mod pullback;
mod scan;
mod sets;

pub use band::{band_limited_family, band_limited_value, plateau_spectrum};
pub use bump::{bump_family, smooth_step, BumpFamily, BumpKind, BumpParams};
pub use product::{product_microsupport, ContainmentReport};
pub use pullback::{pullback_family, pullback_points, AnalyticMap};
pub(crate) use scan::floored_magnitudes;
pub use scan::QUALITY_THRESHOLD;
pub use scan::{microsupport_scan, uniform_small_check, MicrosupportMap, PhaseWindow, ScanConfig};
pub use sets::{CompactSet, Primitive};
