use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_ur, ln_gamma};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{filon, gauss_legendre};

/// Relative mass left beyond the truncation point of a density.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Above this value of |Re t|·m_max the density integral switches to Filon.
const FILON_THRESHOLD: f64 = 50.0;

const PANEL_ORDER: usize = 20;

type Sigma = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closed-form density σ(m) on [m₀, ∞).
#[derive(Clone)]
pub enum Density {
    /// e^{-m^α} on [m₀, ∞).
    ExpAlpha { m0: f64, alpha: f64 },
    /// User density, taken as zero beyond `m_max`.
    Custom {
        name: String,
        m0: f64,
        m_max: f64,
        sigma: Sigma,
    },
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl Density {
    pub fn label(&self) -> String {
        match self {
            Density::ExpAlpha { m0, alpha } => format!("EXP_ALPHA({m0}, {alpha})"),
            Density::Custom { name, .. } => format!("CUSTOM({name})"),
        }
    }

    pub fn m0(&self) -> f64 {
        match self {
            Density::ExpAlpha { m0, .. } | Density::Custom { m0, .. } => *m0,
        }
    }

    fn value(&self, m: f64) -> f64 {
        match self {
            Density::ExpAlpha { m0, alpha } => {
                if m < *m0 {
                    0.0
                } else {
                    (-m.powf(*alpha)).exp()
                }
            }
            Density::Custom {
                m0, m_max, sigma, ..
            } => {
                if m < *m0 || m > *m_max {
                    0.0
                } else {
                    sigma(m)
                }
            }
        }
    }
}

/// dρ(m) = Σ w δ_m + c·σ(m) dm on [0, ∞).
#[derive(Debug, Clone)]
pub struct SpectralMeasure {
    /// (mass, weight) pairs.
    pub atoms: Vec<(f64, f64)>,
    pub density: Option<Density>,
    /// Multiplier c of the density.
    density_weight: f64,
    cutoff: f64,
}

impl SpectralMeasure {
    pub fn atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Self::build(atoms, None, 1.0)
    }

    pub fn atom(m: f64, w: f64) -> Result<Self> {
        Self::atoms(vec![(m, w)])
    }

    pub fn exp_alpha(m0: f64, alpha: f64) -> Result<Self> {
        Self::build(Vec::new(), Some(Density::ExpAlpha { m0, alpha }), 1.0)
    }

    pub fn custom(
        name: impl Into<String>,
        m0: f64,
        m_max: f64,
        sigma: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let d = Density::Custom {
            name: name.into(),
            m0,
            m_max,
            sigma: Arc::new(sigma),
        };
        Self::build(Vec::new(), Some(d), 1.0)
    }

    pub fn with_atoms(self, atoms: Vec<(f64, f64)>) -> Result<Self> {
        let mut all = self.atoms;
        all.extend(atoms);
        Self::build(all, self.density, self.density_weight)
    }

    /// λρ.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", "scale must be positive"));
        }
        let atoms = self.atoms.iter().map(|&(m, w)| (m, lambda * w)).collect();
        Self::build(atoms, self.density.clone(), lambda * self.density_weight)
    }

    fn build(
        atoms: Vec<(f64, f64)>,
        density: Option<Density>,
        density_weight: f64,
    ) -> Result<Self> {
        if atoms
            .iter()
            .any(|&(m, w)| !(m >= 0.0 && m.is_finite() && w > 0.0 && w.is_finite()))
        {
            return Err(invalid("atoms", "need masses m ≥ 0 and weights w > 0"));
        }
        if atoms.is_empty() && density.is_none() {
            return Err(invalid("rho", "empty measure"));
        }
        let cutoff = match &density {
            None => 0.0,
            Some(Density::ExpAlpha { m0, alpha }) => {
                if !(*m0 >= 0.0 && m0.is_finite() && *alpha > 0.0 && alpha.is_finite()) {
                    return Err(invalid("density", "EXP_ALPHA needs m0 ≥ 0 and alpha > 0"));
                }
                exp_alpha_cutoff(*m0, *alpha)
            }
            Some(Density::Custom {
                m0, m_max, sigma, ..
            }) => {
                if !(*m0 >= 0.0 && m_max > m0 && m_max.is_finite()) {
                    return Err(invalid("density", "CUSTOM needs 0 ≤ m0 < m_max < ∞"));
                }
                let probe = [*m0, 0.5 * (m0 + m_max), *m_max];
                if probe
                    .iter()
                    .any(|&m| !(sigma(m) >= 0.0 && sigma(m).is_finite()))
                {
                    return Err(invalid("density", "σ must be finite and non-negative"));
                }
                *m_max
            }
        };
        let rho = Self {
            atoms,
            density,
            density_weight,
            cutoff,
        };
        if let Some(Density::Custom { m_max, .. }) = &rho.density {
            // Crude tail witness: the last unit interval carries a negligible share.
            let edge = rho.sigma(*m_max) * m_max.max(1.0);
            if edge > TAIL_TOLERANCE * rho.total_mass() {
                return Err(invalid(
                    "density",
                    format!("σ({m_max}) is not negligible; raise m_max"),
                ));
            }
        }
        Ok(rho)
    }

    /// c·σ(m), zero off the density's support.
    pub fn sigma(&self, m: f64) -> f64 {
        self.density
            .as_ref()
            .map_or(0.0, |d| self.density_weight * d.value(m))
    }

    /// Truncation point m_max of the density; 0 without one.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn total_mass(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.1).sum();
        let dens = match &self.density {
            None => 0.0,
            Some(Density::ExpAlpha { m0, alpha }) => {
                self.density_weight * exp_alpha_tail(*m0, *alpha)
            }
            Some(d) => {
                graded_integral(d.m0(), self.cutoff, 0.0, |m| C64::new(self.sigma(m), 0.0)).re
            }
        };
        atoms + dens
    }

    /// (C, N) with ρ([0, m]) ≤ C(1 + m)^N.
    pub fn envelope(&self) -> (f64, u32) {
        (self.total_mass(), 0)
    }

    /// M_k = ∫ m^k dρ(m), the density integrated over its whole support.
    pub fn moment(&self, k: u32) -> Result<f64> {
        let atoms: f64 = self.atoms.iter().map(|&(m, w)| w * m.powi(k as i32)).sum();
        let Some(d) = &self.density else {
            return Ok(atoms);
        };
        let lo = d.m0();
        let hi = match d {
            Density::Custom { m_max, .. } => *m_max,
            Density::ExpAlpha { .. } => moment_upper_limit(|m| self.sigma(m), lo, k)?,
        };
        let v = graded_integral(lo, hi, 0.0, |m| {
            C64::new(m.powi(k as i32) * self.sigma(m), 0.0)
        })
        .re;
        if !v.is_finite() {
            return Err(Error::NonFinite("moment"));
        }
        Ok(atoms + v)
    }

    pub fn label(&self) -> String {
        let mut parts: Vec<String> = self
            .atoms
            .iter()
            .map(|(m, w)| format!("{w}·δ({m})"))
            .collect();
        if let Some(d) = &self.density {
            parts.push(format!("{}·{}", self.density_weight, d.label()));
        }
        parts.join(" + ")
    }
}

/// ∫_{m₀}^∞ e^{-m^α} dm = Γ(1/α, m₀^α)/α.
fn exp_alpha_tail(m0: f64, alpha: f64) -> f64 {
    let a = 1.0 / alpha;
    gamma(a) * gamma_ur(a, m0.powf(alpha)) / alpha
}

fn exp_alpha_cutoff(m0: f64, alpha: f64) -> f64 {
    let total = exp_alpha_tail(m0, alpha);
    let mut hi = m0.max(1.0);
    while exp_alpha_tail(hi, alpha) > TAIL_TOLERANCE * total {
        hi *= 2.0;
    }
    let mut lo = m0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if exp_alpha_tail(mid, alpha) > TAIL_TOLERANCE * total {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Past the peak of m^k σ(m), the first m where it has dropped by e^{-46}.
fn moment_upper_limit(sigma: impl Fn(f64) -> f64, m0: f64, k: u32) -> Result<f64> {
    let lg = |m: f64| {
        let s = sigma(m);
        if s > 0.0 {
            k as f64 * m.ln() + s.ln()
        } else {
            f64::NEG_INFINITY
        }
    };
    let mut m = m0.max(1e-3);
    let mut peak = lg(m);
    while m < 1e12 {
        m *= 1.05;
        let v = lg(m);
        peak = peak.max(v);
        if v < peak - 46.0 {
            return Ok(m);
        }
    }
    Err(invalid(
        "k",
        format!("moment {k} does not converge below m = 1e12"),
    ))
}

/// Panel breaks on [lo, hi]: widths ∝ (1 + √m)/(1 + damping), geometric
/// grading toward lo = 0 where m^α-type densities are not smooth.
fn breaks(lo: f64, hi: f64, damping: f64) -> Vec<f64> {
    let mut out = vec![lo];
    let mut m = lo;
    if lo == 0.0 {
        m = (1e-14 * hi).max(1e-300);
        while m < hi.min(0.25) {
            out.push(m);
            m *= 2.0;
        }
    }
    while m < hi {
        out.push(m);
        m += 0.25 * (1.0 + m.sqrt()) / (1.0 + damping);
    }
    out.push(hi);
    out.dedup();
    out
}

fn graded_integral(lo: f64, hi: f64, damping: f64, f: impl Fn(f64) -> C64) -> C64 {
    if hi <= lo {
        return C64::new(0.0, 0.0);
    }
    let rule = gauss_legendre(PANEL_ORDER);
    let (x, w) = (&rule.0, &rule.1);
    breaks(lo, hi, damping)
        .windows(2)
        .map(|p| {
            let (mid, half) = (0.5 * (p[0] + p[1]), 0.5 * (p[1] - p[0]));
            x.iter()
                .zip(w.iter())
                .map(|(s, wt)| f(mid + half * s) * (wt * half))
                .sum::<C64>()
        })
        .sum()
}

/// μ̂(t) = ∫ e^{-imt} dρ(m) for Im t ≤ 0.
pub fn spectral_fourier(rho: &SpectralMeasure, t: C64) -> Result<C64> {
    if !(t.re.is_finite() && t.im.is_finite()) {
        return Err(Error::NonFinite("spectral_fourier t"));
    }
    if t.im > 0.0 {
        return Err(invalid("t", "Im t > 0 makes e^{-imt} unbounded"));
    }
    let i = C64::new(0.0, 1.0);
    let mut acc: C64 = rho.atoms.iter().map(|&(m, w)| w * (-i * m * t).exp()).sum();
    if let Some(d) = &rho.density {
        let (lo, hi) = (d.m0(), rho.cutoff);
        let damping = -t.im;
        if t.re.abs() * hi > FILON_THRESHOLD {
            let amp = |m: f64| rho.sigma(m) * (m * t.im).exp();
            acc += filon(amp, &breaks(lo, hi, damping), t.re, PANEL_ORDER - 4);
        } else {
            acc += graded_integral(lo, hi, damping, |m| rho.sigma(m) * (-i * m * t).exp());
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnalyticityClass {
    Analytic,
    GevreyNonanalytic,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub k: u32,
    pub moment: f64,
    /// (M_k/(M₀ k!))^{1/k}
    pub root: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticityReport {
    pub class: AnalyticityClass,
    pub table: Vec<MomentRow>,
    /// Fitted slope of the roots over the upper half of the orders.
    pub slope: f64,
    /// Same slope relative to the largest root there, times the top order.
    pub relative_growth: f64,
    pub k_used: u32,
    /// Quadrature gave out before the requested k_max.
    pub lowered: bool,
}

/// Whether μ̂ is analytic at 0, read off the growth of normalized moments.
///
/// M_k/(M₀ k!) are the Taylor coefficients of μ̂/μ̂(0) at 0 up to a phase,
/// so bounded roots mean a positive radius and linear growth means a
/// Gevrey-2 transform with radius zero. Normalizing by M₀ makes the class
/// invariant under ρ → λρ.
pub fn measure_analyticity_class(rho: &SpectralMeasure, k_max: u32) -> Result<AnalyticityReport> {
    if k_max < 6 {
        return Err(invalid("k_max", "need at least six moments"));
    }
    let m0 = rho.moment(0)?;
    let mut table = Vec::new();
    let mut lowered = false;
    for k in 1..=k_max {
        match rho.moment(k) {
            Ok(v) if v.is_finite() => {
                let kf = k as f64;
                let root = if v > 0.0 {
                    (((v / m0).ln() - ln_gamma(kf + 1.0)) / kf).exp()
                } else {
                    0.0
                };
                table.push(MomentRow { k, moment: v, root });
            }
            _ => {
                lowered = true;
                break;
            }
        }
    }
    let k_used = table.last().map_or(0, |r| r.k);
    if k_used < 6 {
        return Ok(AnalyticityReport {
            class: AnalyticityClass::Unresolved,
            table,
            slope: f64::NAN,
            relative_growth: f64::NAN,
            k_used,
            lowered,
        });
    }
    let tail: Vec<(f64, f64)> = table
        .iter()
        .filter(|r| 2 * r.k >= k_used)
        .map(|r| (r.k as f64, r.root))
        .collect();
    let slope = ls_slope(&tail);
    let top = tail.iter().map(|p| p.1).fold(0.0, f64::max);
    let relative_growth = if top > 0.0 {
        slope * k_used as f64 / top
    } else {
        0.0
    };
    let positive: Vec<(f64, f64)> = tail
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(k, r)| (k, r.ln()))
        .collect();
    let log_slope = if positive.len() >= 2 {
        ls_slope(&positive)
    } else {
        f64::NAN
    };
    let class = if top == 0.0 || relative_growth < 0.1 {
        AnalyticityClass::Analytic
    } else if relative_growth > 0.5 && log_slope > 0.0 {
        AnalyticityClass::GevreyNonanalytic
    } else {
        AnalyticityClass::Unresolved
    };
    Ok(AnalyticityReport {
        class,
        table,
        slope,
        relative_growth,
        k_used,
        lowered,
    })
}

fn ls_slope(p: &[(f64, f64)]) -> f64 {
    let n = p.len() as f64;
    let mx = p.iter().map(|q| q.0).sum::<f64>() / n;
    let my = p.iter().map(|q| q.1).sum::<f64>() / n;
    let sxx: f64 = p.iter().map(|q| (q.0 - mx).powi(2)).sum();
    let sxy: f64 = p.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
    sxy / sxx
}
