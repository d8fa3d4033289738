use microlocal::microsupport::{
    bump_family, microsupport_scan, product_microsupport, pullback_family, pullback_points,
    AnalyticMap, BumpKind, BumpParams, PhaseWindow, ScanConfig,
};
use microlocal::transforms::{coherent_family, FbiSource, PhaseBox, PhasePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{fmt_points, Ctx, Report, NODE_EPS};
use crate::config::CliError;
use crate::envelope::{num, Table};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ProductParams {
    pairs: usize,
    /// Grid step of the scan window; random centres are multiples of it.
    step: f64,
    x_range: (f64, f64),
    xi_range: (f64, f64),
}

impl Default for ProductParams {
    fn default() -> Self {
        Self {
            pairs: 10,
            step: 0.5,
            x_range: (-1.5, 1.5),
            xi_range: (-3.0, 3.0),
        }
    }
}

pub fn product_rule(ctx: &Ctx) -> Result<Report, CliError> {
    let p: ProductParams = ctx.params()?;
    let cfg = ScanConfig::default();
    let w = PhaseWindow::new(PhaseBox::new(p.x_range, p.xi_range), p.step, p.step)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut rep = Report::new(&p);
    rep.tol("cell", p.step);
    let mut t = Table::new(&["x0", "xi_a", "xi_b", "flagged", "predicted", "escapes", "holds"]);
    let mut failures = Vec::new();
    for _ in 0..p.pairs {
        // Shared base point: distinct ones give products that are small everywhere.
        let x0 = p.step * rng.gen_range(-1..=1) as f64;
        let a = p.step * rng.gen_range(-2..=2) as f64;
        let b = p.step * rng.gen_range(-2..=2) as f64;
        let u = coherent_family(&PhasePoint::d1(x0, a))?;
        let v = coherent_family(&PhasePoint::d1(x0, b))?;
        let (map, cr) = product_microsupport(&u, &v, &w, &cfg)?;
        let flagged = map.flagged();
        t.push(vec![
            num(x0),
            num(a),
            num(b),
            fmt_points(&flagged).into(),
            fmt_points(&cr.predicted).into(),
            fmt_points(&cr.escapes).into(),
            cr.holds.into(),
        ]);
        if !cr.holds {
            failures.push(format!("({x0}, {a}, {b}) escapes {}", fmt_points(&cr.escapes)));
        }
    }
    rep.table("pairs", t);
    rep.check(
        "fiberwise_sum",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} pairs, every flagged node within one cell", p.pairs)
        } else {
            failures.join("; ")
        },
    );
    Ok(rep)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PullbackParams {
    linear_slope: f64,
    sine_amplitude: f64,
    base: (f64, f64),
    step: f64,
}

impl Default for PullbackParams {
    fn default() -> Self {
        Self {
            linear_slope: 2.0,
            sine_amplitude: 0.3,
            base: (0.0, 1.0),
            step: 0.5,
        }
    }
}

pub fn pullback(ctx: &Ctx) -> Result<Report, CliError> {
    let p: PullbackParams = ctx.params()?;
    let cfg = ScanConfig::default();
    let chi = bump_family(
        BumpKind::Plateau,
        BumpParams {
            xi_max: 3.0,
            ..BumpParams::default()
        },
        &cfg.ladder,
    )?;
    let u = coherent_family(&PhasePoint::d1(p.base.0, p.base.1))?;
    let w = PhaseWindow::new(PhaseBox::new((-2.0, 2.0), (-3.0, 3.0)), p.step, p.step)?;
    let base = microsupport_scan(&FbiSource::Family(u.clone()), &w, &cfg)?.flagged();
    let mut rep = Report::new(&p);
    rep.tol("cell", p.step);
    let mut t = Table::new(&["map", "flagged", "predicted", "unmatched"]);
    let near = |a: (f64, f64), b: (f64, f64)| {
        (a.0 - b.0).abs() <= p.step + NODE_EPS && (a.1 - b.1).abs() <= p.step + NODE_EPS
    };
    for map in [
        AnalyticMap::linear(p.linear_slope),
        AnalyticMap::sine_perturbed(p.sine_amplitude),
    ] {
        let pulled = pullback_family(&u, &map, &chi)?;
        let scan = microsupport_scan(&FbiSource::Family(pulled), &w, &cfg)?;
        let flagged = scan.flagged();
        let predicted = pullback_points(&map, chi.ones, &base);
        let mut unmatched: Vec<(f64, f64)> = flagged
            .iter()
            .filter(|f| !predicted.iter().any(|q| near(**f, *q)))
            .copied()
            .collect();
        unmatched.extend(
            predicted
                .iter()
                .filter(|q| !flagged.iter().any(|f| near(*f, **q))),
        );
        t.push(vec![
            map.name.clone().into(),
            fmt_points(&flagged).into(),
            fmt_points(&predicted).into(),
            fmt_points(&unmatched).into(),
        ]);
        rep.check(
            &format!("jacobian {}", map.name),
            !flagged.is_empty() && unmatched.is_empty(),
            format!(
                "{} flagged, {} predicted, unmatched {}",
                flagged.len(),
                predicted.len(),
                fmt_points(&unmatched)
            ),
        );
    }
    rep.table("maps", t);
    Ok(rep)
}
