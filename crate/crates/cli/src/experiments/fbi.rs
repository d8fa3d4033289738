use std::f64::consts::PI;

use microlocal::phase_core::{grid_nodes, AxisBox, SampledFamily};
use microlocal::transforms::{
    coherent_value, fbi_adjoint_reconstruct, fbi_radial_reconstruct, window_radius, FbiField,
    FbiSource, PhaseBox, PhasePoint,
};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Ctx, LadderSpec, Report};
use crate::config::CliError;
use crate::envelope::{num, Table};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct IsometryParams {
    mixtures: usize,
    components: usize,
    ladder: LadderSpec,
    /// Phase-space quadrature reach beyond the centres, in units of √h.
    reach: f64,
    tolerance: f64,
}

impl Default for IsometryParams {
    fn default() -> Self {
        Self {
            mixtures: 20,
            components: 3,
            ladder: LadderSpec::DEFAULT,
            reach: 8.0,
            tolerance: 1e-6,
        }
    }
}

struct Mixture {
    centers: Vec<PhasePoint>,
    coeffs: Vec<C64>,
}

impl Mixture {
    fn draw(rng: &mut ChaCha8Rng, n: usize) -> Self {
        let centers = (0..n)
            .map(|_| PhasePoint::d1(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let coeffs = (0..n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Self { centers, coeffs }
    }

    /// ‖Σ c_k ψ_k‖² from the Gaussian Gram matrix.
    fn norm_sq(&self, h: f64) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for (a, ca) in self.centers.iter().zip(&self.coeffs) {
            for (b, cb) in self.centers.iter().zip(&self.coeffs) {
                acc += ca.conj() * cb * gram(a, b, h);
            }
        }
        acc.re
    }

    fn family(&self) -> Result<SampledFamily, CliError> {
        let lo = self.centers.iter().map(|p| p.x[0]).fold(f64::INFINITY, f64::min);
        let hi = self.centers.iter().map(|p| p.x[0]).fold(f64::NEG_INFINITY, f64::max);
        let xi = self.centers.iter().map(|p| p.xi[0].abs()).fold(0.0, f64::max);
        let (centers, coeffs) = (self.centers.clone(), self.coeffs.clone());
        let f = SampledFamily::new(1, AxisBox::everywhere(1), move |h, y| {
            centers
                .iter()
                .zip(&coeffs)
                .map(|(p, c)| c * coherent_value(p, h, y))
                .sum()
        })?
        .with_support_at(move |h| {
            let r = window_radius(h);
            AxisBox::interval(lo - r, hi + r)
        })
        .with_bandwidth(move |h| xi / h + (92.0 / h).sqrt());
        Ok(f)
    }
}

/// ⟨ψ_a, ψ_b⟩ = (πh)^{-1/2} ∫ e^{-Ay² + By + C} dy = (πh)^{-1/2} √(π/A) e^{B²/4A + C}.
fn gram(a: &PhasePoint, b: &PhasePoint, h: f64) -> C64 {
    let (xa, xia, xb, xib) = (a.x[0], a.xi[0], b.x[0], b.xi[0]);
    let big_a = 1.0 / h;
    let big_b = C64::new((xa + xb) / h, (xib - xia) / h);
    let big_c = C64::new(-(xa * xa + xb * xb) / (2.0 * h), (xa * xia - xb * xib) / h);
    (PI * h).powf(-0.5) * (PI / big_a).sqrt() * (big_b * big_b / (4.0 * big_a) + big_c).exp()
}

pub fn isometry(ctx: &Ctx) -> Result<Report, CliError> {
    let p: IsometryParams = ctx.params()?;
    let ladder = p.ladder.build()?;
    if p.mixtures == 0 || p.components == 0 {
        return Err(CliError::Schema {
            field: "params.mixtures".into(),
            message: "need at least one mixture of at least one component".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mixtures: Vec<Mixture> = (0..p.mixtures)
        .map(|_| Mixture::draw(&mut rng, p.components))
        .collect();

    let mut rows = Vec::new();
    for (k, m) in mixtures.iter().enumerate() {
        let src = FbiSource::Family(m.family()?);
        let lo_x = m.centers.iter().map(|c| c.x[0]).fold(f64::INFINITY, f64::min);
        let hi_x = m.centers.iter().map(|c| c.x[0]).fold(f64::NEG_INFINITY, f64::max);
        let lo_xi = m.centers.iter().map(|c| c.xi[0]).fold(f64::INFINITY, f64::min);
        let hi_xi = m.centers.iter().map(|c| c.xi[0]).fold(f64::NEG_INFINITY, f64::max);
        let per_rung: Vec<(f64, f64, f64)> = ladder
            .rungs()
            .par_iter()
            .map(|&h| {
                let sq = h.sqrt();
                let r = p.reach * sq;
                // Cross terms oscillate at up to (spread)/h; keep the
                // trapezoid alias beyond the Gaussian envelope.
                let spread = (hi_x - lo_x).max(hi_xi - lo_xi).max(1e-3);
                let step = 2.0 * PI / (spread / h + p.reach / sq);
                let xs = grid_nodes(lo_x - r, hi_x + r, step);
                let xis = grid_nodes(lo_xi - r, hi_xi + r, step);
                // grid_nodes rounds the step so the ends land on nodes.
                let (dx, dxi) = (xs[1] - xs[0], xis[1] - xis[0]);
                let t = src.grid(h, &xs, &xis);
                let tf: f64 = t.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>() * dx * dxi;
                (h, m.norm_sq(h), tf)
            })
            .collect();
        for (h, f2, tf2) in per_rung {
            rows.push((k, h, f2.sqrt(), tf2.sqrt()));
        }
    }

    let mut rep = Report::new(&p);
    rep.tol("relative_error", p.tolerance);
    let mut t = Table::new(&["mixture", "h", "norm_f", "norm_tf", "ratio", "rel_err"]);
    let mut worst: f64 = 0.0;
    for &(k, h, nf, ntf) in &rows {
        let ratio = ntf / nf;
        let err = (ratio - 1.0).abs();
        worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
        t.push(vec![
            k.into(),
            num(h),
            num(nf),
            num(ntf),
            num(ratio),
            num(err),
        ]);
    }
    rep.table("norms", t);
    rep.check(
        "norm_ratio",
        worst <= p.tolerance,
        format!(
            "max |‖T_h f‖/‖f‖ − 1| = {worst:.3e} over {} mixtures × {} rungs",
            p.mixtures,
            ladder.len()
        ),
    );
    Ok(rep)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ReconstructParams {
    /// Phase-space window half-width beyond the centres, in units of √h.
    reach: f64,
    /// Grid step, in units of √h.
    step: f64,
    /// Evaluation points cover the centres ± this many √h.
    eval_reach: f64,
    eval_points: usize,
    tolerance: f64,
}

impl Default for ReconstructParams {
    fn default() -> Self {
        Self {
            reach: 7.0,
            step: 1.0 / 6.0,
            eval_reach: 3.0,
            eval_points: 41,
            tolerance: 1e-4,
        }
    }
}

struct Case {
    name: &'static str,
    h: f64,
    centers: Vec<(f64, f64)>,
    coeffs: Vec<f64>,
}

fn battery() -> Vec<Case> {
    vec![
        Case {
            name: "coherent(0,0)",
            h: 0.1,
            centers: vec![(0.0, 0.0)],
            coeffs: vec![1.0],
        },
        Case {
            name: "pair(-1,0)+(1,0)",
            h: 0.05,
            centers: vec![(-1.0, 0.0), (1.0, 0.0)],
            coeffs: vec![1.0, -0.5],
        },
        Case {
            name: "coherent(0.3,0.5)",
            h: 0.05,
            centers: vec![(0.3, 0.5)],
            coeffs: vec![1.0],
        },
    ]
}

pub fn reconstruct(ctx: &Ctx) -> Result<Report, CliError> {
    let p: ReconstructParams = ctx.params()?;
    if p.eval_points < 2 || !(p.step > 0.0) || !(p.reach > 0.0) {
        return Err(CliError::Schema {
            field: "params".into(),
            message: "need eval_points ≥ 2 and positive step and reach".into(),
        });
    }
    let mut rep = Report::new(&p);
    rep.tol("sup_relative_error", p.tolerance);
    let mut t = Table::new(&["case", "h", "y", "re", "im", "exact_re", "exact_im", "abs_err"]);
    let mut summary = Table::new(&["case", "h", "sup_err", "sup_u", "rel_err", "tail_warning"]);
    let mut worst: f64 = 0.0;
    for case in battery() {
        let h = case.h;
        let sq = h.sqrt();
        let centers: Vec<PhasePoint> = case
            .centers
            .iter()
            .map(|&(x, xi)| PhasePoint::d1(x, xi))
            .collect();
        let cs = centers.clone();
        let coeffs = case.coeffs.clone();
        let u = SampledFamily::new(1, AxisBox::everywhere(1), move |h, y| {
            cs.iter()
                .zip(&coeffs)
                .map(|(c, &w)| coherent_value(c, h, y) * w)
                .sum()
        })?;
        let x_lo = centers.iter().map(|c| c.x[0]).fold(f64::INFINITY, f64::min);
        let x_hi = centers.iter().map(|c| c.x[0]).fold(f64::NEG_INFINITY, f64::max);
        let xi_lo = centers.iter().map(|c| c.xi[0]).fold(f64::INFINITY, f64::min);
        let xi_hi = centers.iter().map(|c| c.xi[0]).fold(f64::NEG_INFINITY, f64::max);
        let r = p.reach * sq;
        let window = PhaseBox::new((x_lo - r, x_hi + r), (xi_lo - r, xi_hi + r));
        let step = p.step * sq;
        let sr = window_radius(h);
        let u_src = u
            .clone()
            .with_support_at(move |_| AxisBox::interval(x_lo - sr, x_hi + sr));
        let field = FbiField::compute(&FbiSource::Family(u_src), window, step, step, &[h])?;
        let (a, b) = (x_lo - p.eval_reach * sq, x_hi + p.eval_reach * sq);
        let ys: Vec<f64> = (0..p.eval_points)
            .map(|i| a + (b - a) * i as f64 / (p.eval_points - 1) as f64)
            .collect();
        let vals: Vec<(f64, C64, C64, bool)> = ys
            .par_iter()
            .map(|&y| {
                let got = fbi_adjoint_reconstruct(&field, y, h)?;
                Ok((y, got.value, u.eval1(h, y), got.tail_warning))
            })
            .collect::<Result<_, microlocal::error::Error>>()?;
        let sup_u = vals.iter().map(|v| v.2.norm()).fold(0.0, f64::max);
        let sup_err = vals.iter().map(|v| (v.1 - v.2).norm()).fold(0.0, f64::max);
        let tail = vals.iter().any(|v| v.3);
        for (y, got, want, _) in &vals {
            t.push(vec![
                case.name.into(),
                num(h),
                num(*y),
                num(got.re),
                num(got.im),
                num(want.re),
                num(want.im),
                num((got - want).norm()),
            ]);
        }
        let rel = sup_err / sup_u;
        worst = worst.max(if rel.is_nan() { f64::INFINITY } else { rel });
        summary.push(vec![
            case.name.into(),
            num(h),
            num(sup_err),
            num(sup_u),
            num(rel),
            tail.into(),
        ]);
        rep.check(
            &format!("sup_error {}", case.name),
            rel <= p.tolerance,
            format!("sup-norm relative error {rel:.3e} at h = {h}"),
        );
    }
    rep.table("samples", t);
    rep.table("summary", summary);
    rep.note(format!("worst sup-norm relative error {worst:.3e}"));
    Ok(rep)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RadialParams {
    /// Test functions e^{-x²/2}cos(kx), one per entry.
    frequencies: Vec<f64>,
    points: Vec<f64>,
    tolerance: f64,
}

impl Default for RadialParams {
    fn default() -> Self {
        Self {
            frequencies: vec![0.0, 4.0],
            points: vec![-1.4, -1.0, -0.7, -0.3, 0.0, 0.15, 0.3, 0.6, 0.9, 1.3],
            tolerance: 1e-3,
        }
    }
}

pub fn radial(ctx: &Ctx) -> Result<Report, CliError> {
    let p: RadialParams = ctx.params()?;
    let mut rep = Report::new(&p);
    rep.tol("pointwise_relative_error", p.tolerance);
    let mut t = Table::new(&["k", "x", "re", "im", "exact", "rel_err", "converged"]);
    for &k in &p.frequencies {
        let u = SampledFamily::fixed(1, AxisBox::interval(-12.0, 12.0), move |x| {
            C64::new((-x[0] * x[0] / 2.0).exp() * (k * x[0]).cos(), 0.0)
        })?
        .with_bandwidth(move |_| k.abs() + 10.0);
        let res: Vec<_> = p
            .points
            .par_iter()
            .map(|&x| fbi_radial_reconstruct(&u, x).map(|r| (x, r)))
            .collect::<Result<_, _>>()?;
        let mut worst: f64 = 0.0;
        let mut all_converged = true;
        for (x, r) in res {
            let want = u.eval1(1.0, x);
            let err = (r.value - want).norm() / want.norm();
            worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
            all_converged &= r.converged;
            t.push(vec![
                num(k),
                num(x),
                num(r.value.re),
                num(r.value.im),
                num(want.re),
                num(err),
                r.converged.into(),
            ]);
        }
        rep.check(
            &format!("pointwise k={k}"),
            worst <= p.tolerance && all_converged,
            format!("max relative error {worst:.3e}, converged {all_converged}"),
        );
    }
    rep.table("samples", t);
    Ok(rep)
}
