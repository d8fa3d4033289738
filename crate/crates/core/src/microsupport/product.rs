use serde::{Deserialize, Serialize};

use super::scan::{microsupport_scan, MicrosupportMap, PhaseWindow, ScanConfig};
use crate::error::{invalid, Result};
use crate::phase_core::{SampledFamily, Verdict};
use crate::transforms::FbiSource;

/// Whether the product's NOT_EXP_SMALL nodes sit in the fiberwise sum of the
/// factors' NOT_EXP_SMALL sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    /// Fiberwise sums (x, ξ₁ + ξ₂).
    pub predicted: Vec<(f64, f64)>,
    /// Product nodes farther than one grid cell from every prediction.
    pub escapes: Vec<(f64, f64)>,
    pub holds: bool,
    /// Any of the three scans was QUALITY_LOW.
    pub quality_low: bool,
}

/// Scans u, v and uv on the same window and checks containment of the
/// product's microsupport in the fiberwise sum.
pub fn product_microsupport(
    u: &SampledFamily,
    v: &SampledFamily,
    window: &PhaseWindow,
    cfg: &ScanConfig,
) -> Result<(MicrosupportMap, ContainmentReport)> {
    if u.support().intersect(v.support()).is_none() {
        return Err(invalid("v", "factors have disjoint supports"));
    }
    let uv = u.product(v)?;
    let mu = microsupport_scan(&FbiSource::Family(u.clone()), window, cfg)?;
    let mv = microsupport_scan(&FbiSource::Family(v.clone()), window, cfg)?;
    let muv = microsupport_scan(&FbiSource::Family(uv), window, cfg)?;
    let not_small = |v: Verdict| v == Verdict::NotExpSmall;
    let (a, b) = (mu.nodes_where(not_small), mv.nodes_where(not_small));
    let mut predicted = Vec::new();
    for &(x, xi1) in &a {
        for &(x2, xi2) in &b {
            if (x - x2).abs() <= 1e-9 * (1.0 + x.abs()) {
                predicted.push((x, xi1 + xi2));
            }
        }
    }
    let (dx, dxi) = (window.x_step * (1.0 + 1e-9), window.xi_step * (1.0 + 1e-9));
    let escapes: Vec<(f64, f64)> = muv
        .nodes_where(not_small)
        .into_iter()
        .filter(|&(x, xi)| {
            !predicted
                .iter()
                .any(|&(px, pxi)| (x - px).abs() <= dx && (xi - pxi).abs() <= dxi)
        })
        .collect();
    let report = ContainmentReport {
        holds: escapes.is_empty(),
        predicted,
        escapes,
        quality_low: mu.quality_low || mv.quality_low || muv.quality_low,
    };
    Ok((muv, report))
}
