use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::sech::{sech_decompose, sech_kernel};
use crate::error::Result;
use crate::phase_core::{AxisBox, SampledFamily};
use crate::quadrature::gl_composite;
use crate::transforms::{alpha_h, FbiSource};

type SechFn = Arc<dyn Fn(C64) -> Result<C64> + Send + Sync>;
type ComplexFn = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// An h-independent distribution on R with both an FBI evaluator and its
/// sech-kernel transform K_u.
#[derive(Clone)]
pub struct Distribution1d {
    pub name: String,
    pub fbi: FbiSource,
    sech: SechFn,
    /// Holomorphic extension of u where one exists in closed form.
    pub complex: Option<ComplexFn>,
}

impl fmt::Debug for Distribution1d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Distribution1d")
            .field("name", &self.name)
            .field("fbi", &self.fbi)
            .finish()
    }
}

impl Distribution1d {
    /// A function given by an h-independent family; K_u by quadrature.
    pub fn function(name: impl Into<String>, u: SampledFamily) -> Self {
        let v = u.clone();
        Self {
            name: name.into(),
            fbi: FbiSource::Family(u),
            sech: Arc::new(move |z| sech_decompose(&v, z)),
            complex: None,
        }
    }

    pub fn with_complex(mut self, f: impl Fn(C64) -> C64 + Send + Sync + 'static) -> Self {
        self.complex = Some(Arc::new(f));
        self
    }

    /// δ_a.
    pub fn point_mass(a: f64) -> Self {
        Self {
            name: format!("delta({a})"),
            fbi: FbiSource::PointMasses {
                dim: 1,
                atoms: vec![(vec![a], C64::new(1.0, 0.0))],
            },
            sech: Arc::new(move |z| Ok(sech_kernel(z - a))),
            complex: None,
        }
    }

    /// 1_{[0, ∞)}.
    pub fn heaviside() -> Self {
        let u = SampledFamily::fixed(
            1,
            AxisBox::new(vec![0.0], vec![f64::INFINITY]).expect("ordered"),
            |_| C64::new(1.0, 0.0),
        )
        .expect("valid family")
        .with_bandwidth(|_| 0.0)
        .with_breakpoints(vec![0.0]);
        Self::function("heaviside", u)
    }

    /// e^{-x²/2}.
    pub fn gaussian() -> Self {
        let u = SampledFamily::fixed(1, AxisBox::everywhere(1), |x| {
            C64::new((-x[0] * x[0] / 2.0).exp(), 0.0)
        })
        .expect("valid family")
        .with_bandwidth(|_| 12.0);
        Self::function("gaussian", u).with_complex(|z| (-z * z / 2.0).exp())
    }

    /// e^{-1/(1−x²)} on (−1, 1), zero elsewhere: C^∞, analytic except at ±1.
    pub fn nonanalytic_bump() -> Self {
        let u = SampledFamily::fixed(1, AxisBox::interval(-1.0, 1.0), |x| {
            let q = 1.0 - x[0] * x[0];
            C64::new(if q > 0.0 { (-1.0 / q).exp() } else { 0.0 }, 0.0)
        })
        .expect("valid family")
        .with_breakpoints(vec![-1.0, 1.0]);
        Self::function("bump", u).with_complex(|z| (-1.0 / (1.0 - z * z)).exp())
    }

    /// u(t) = ∫₀^∞ e^{-imt} w(m) dm for a weight w decaying faster than any
    /// power. Both transforms reduce to one-dimensional m-integrals:
    /// T_h u(x, ξ) = α_h√(2πh)∫ w(m) e^{-imx} e^{-(ξ+hm)²/2h} dm and
    /// K_u(z) = ½∫ w(m) sech(m) e^{-imz} dm.
    pub fn spectral_boundary(
        name: impl Into<String>,
        w: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let w = Arc::new(w);
        let wf = w.clone();
        let fbi = FbiSource::closed(1, move |h, x, xi| {
            let (x, xi) = (x[0], xi[0]);
            let pre = alpha_h(h, 1) * (2.0 * PI * h).sqrt();
            let g = |m: f64| wf(m) * (-(xi + h * m).powi(2) / (2.0 * h)).exp();
            let top = (-xi / h).max(0.0) + 14.0 / h.sqrt() + 60.0;
            pre * m_integral(&g, x, top)
        });
        let ws = w.clone();
        let sech = Arc::new(move |z: C64| -> Result<C64> {
            let margin = (1.0 - z.im).max(1e-3);
            let g = |m: f64| ws(m) * sech_tilted(m, z.im);
            Ok(0.5 * m_integral(&g, z.re, (45.0 / margin).min(5e4)))
        });
        Self {
            name: name.into(),
            fbi,
            sech,
            complex: None,
        }
    }

    /// The spectral boundary value with weight e^{-√m}.
    pub fn spectral_sqrt() -> Self {
        Self::spectral_boundary("spectral e^{-sqrt m}", |m: f64| (-m.sqrt()).exp())
    }

    /// K_u(z), |Im z| < 1.
    pub fn sech_transform(&self, z: C64) -> Result<C64> {
        (self.sech)(z)
    }
}

/// sech(m)·e^{my} for m ≥ 0 without overflow near y = 1.
fn sech_tilted(m: f64, y: f64) -> f64 {
    2.0 * (-m * (1.0 - y)).exp() / (1.0 + (-2.0 * m).exp())
}

/// ∫₀^top g(m) e^{-imx} dm with m = s² on [0, 1] (weights like e^{-√m}
/// are smooth in s) and unit panels beyond.
fn m_integral(g: &dyn Fn(f64) -> f64, x: f64, top: f64) -> C64 {
    let head = gl_composite(0.0, 1.0, 2, 24, |s| {
        let m = s * s;
        C64::from_polar(2.0 * s * g(m), -m * x)
    });
    let panels = ((top - 1.0) * (1.0 + x.abs() / 2.0)).ceil().max(1.0) as usize;
    head + gl_composite(1.0, top.max(1.0 + 1e-9), panels, 24, |m| {
        C64::from_polar(g(m), -m * x)
    })
}
