use microlocal::phase_core::AxisBox;
use microlocal::spacetime::{
    chronological_set, holmgren_sweep, i_zero, timelike_envelope, tube_sweep as sweep_tubes,
    CurveFamily, Direction, Grid, Region, Seed, SpacetimeModel, TubeConfig,
};
use serde::{Deserialize, Serialize};

use super::{Ctx, Report};
use crate::config::CliError;
use crate::envelope::{num, Table};

/// Points within `w` of the segment pq.
fn stadium(grid: &Grid, p: [f64; 2], q: [f64; 2], w: f64) -> Region {
    Region::from_fn(grid, |t, x| {
        let (vt, vx) = (q[0] - p[0], q[1] - p[1]);
        let s = (((t - p[0]) * vt + (x - p[1]) * vx) / (vt * vt + vx * vx)).clamp(0.0, 1.0);
        (t - p[0] - s * vt).hypot(x - p[1] - s * vx) < w
    })
}

/// The conformal preset: a smooth positive factor times the flat metric.
fn conformal_factor(t: f64, x: f64) -> f64 {
    (0.3 * t - 0.2 * x * x).exp() * (2.0 + (3.0 * x).sin())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CausalParams {
    resolutions: Vec<usize>,
    max_hausdorff: f64,
}

impl Default for CausalParams {
    fn default() -> Self {
        Self {
            resolutions: vec![48, 96],
            max_hausdorff: 1.0,
        }
    }
}

pub fn causal(ctx: &Ctx) -> Result<Report, CliError> {
    let p: CausalParams = ctx.params()?;
    let mut rep = Report::new(&p);
    rep.tol("hausdorff_cells", p.max_hausdorff);
    let mut t = Table::new(&["set", "n", "model", "hausdorff", "cells", "matches_minkowski"]);
    let future_box = AxisBox::rect((-1.0, 2.0), (-1.5, 1.5));
    let diamond_box = AxisBox::rect((-0.5, 2.5), (-1.5, 1.5));
    for &n in &p.resolutions {
        for (name, b) in [("future", &future_box), ("diamond", &diamond_box)] {
            let g = Grid::new(b, n, n)?;
            let flat = SpacetimeModel::minkowski(b.clone())?;
            let conf = SpacetimeModel::conformal(b.clone(), conformal_factor)?;
            let (exact, mf, mc) = if name == "future" {
                let exact = Region::from_fn(&g, |t, x| t > x.abs());
                let f = |m: &SpacetimeModel| {
                    chronological_set(m, &g, Seed::Point([0.0, 0.0]), Direction::Future)
                        .map(|c| c.region)
                };
                (exact, f(&flat)?, f(&conf)?)
            } else {
                let exact = Region::from_fn(&g, |t, x| x.abs() < t.min(2.0 - t));
                let f = |m: &SpacetimeModel| {
                    i_zero(m, &g, [0.0, 0.0], [2.0, 0.0]).map(|c| c.region)
                };
                (exact, f(&flat)?, f(&conf)?)
            };
            let d = mf.hausdorff(&exact)?;
            let dc = mc.hausdorff(&exact)?;
            let same = mf == mc;
            for (model, dist, region) in [("minkowski", d, &mf), ("conformal", dc, &mc)] {
                t.push(vec![
                    name.into(),
                    n.into(),
                    model.into(),
                    num(dist),
                    region.count().into(),
                    same.into(),
                ]);
            }
            rep.check(
                &format!("{name} n={n}"),
                d <= p.max_hausdorff,
                format!("Hausdorff distance {d} cells"),
            );
            rep.check(
                &format!("{name} conformal n={n}"),
                same,
                format!("conformal mask identical: {same}"),
            );
            rep.region(&format!("{name}_{n}"), mf);
        }
    }
    rep.table("masks", t);
    Ok(rep)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EnvelopeParams {
    n: usize,
    tube_width: f64,
    coverage: f64,
}

impl Default for EnvelopeParams {
    fn default() -> Self {
        Self {
            n: 60,
            tube_width: 0.2,
            coverage: 0.99,
        }
    }
}

pub fn envelope_diamond(ctx: &Ctx) -> Result<Report, CliError> {
    let p: EnvelopeParams = ctx.params()?;
    let b = AxisBox::rect((-0.5, 2.5), (-1.5, 1.5));
    let m = SpacetimeModel::minkowski(b.clone())?;
    let g = Grid::new(&b, p.n, p.n)?;
    let mut rep = Report::new(&p);
    rep.tol("coverage", p.coverage);

    let tube = stadium(&g, [0.0, 0.0], [2.0, 0.0], p.tube_width);
    let env = timelike_envelope(&m, &tube)?;
    let diamond = Region::from_fn(&g, |t, x| x.abs() < t.min(2.0 - t));
    let covered = diamond.intersection(&env.region)?.count();
    let frac = covered as f64 / diamond.count() as f64;
    let haus = env.region.hausdorff(&diamond.union(&tube)?)?;
    let mut t = Table::new(&["quantity", "value"]);
    t.push(vec!["diamond_cells".into(), diamond.count().into()]);
    t.push(vec!["covered_cells".into(), covered.into()]);
    t.push(vec!["coverage".into(), num(frac)]);
    t.push(vec!["iterations".into(), env.iterations.into()]);
    t.push(vec!["capped".into(), env.capped.into()]);
    t.push(vec!["hausdorff_to_diamond_union_tube".into(), num(haus)]);
    rep.table("thin_tube", t);
    rep.check(
        "covers_diamond",
        frac >= p.coverage && !env.capped,
        format!("{covered} of {} diamond cells ({:.2}%)", diamond.count(), 100.0 * frac),
    );
    rep.region("tube", tube);
    rep.region("envelope", env.region.clone());
    rep.region("diamond", diamond);

    let battery = [
        stadium(&g, [0.0, 0.0], [1.0, 0.0], 0.15),
        stadium(&g, [0.0, 0.0], [1.5, 0.5], 0.2),
        stadium(&g, [0.0, 0.0], [1.0, 0.0], 0.15).union(&stadium(
            &g,
            [1.2, -0.4],
            [2.0, -0.3],
            0.15,
        ))?,
        Region::from_fn(&g, |t, x| (t - 1.0).abs() < 0.2 && x.abs() < 0.8),
        i_zero(&m, &g, [0.0, 0.0], [2.0, 0.0])?.region,
    ];
    let mut bt = Table::new(&["case", "cells", "envelope_cells", "extensive", "idempotent"]);
    let mut envs = Vec::new();
    let mut idem = true;
    let mut ext = true;
    for (k, o) in battery.iter().enumerate() {
        let e = timelike_envelope(&m, o)?.region;
        let again = timelike_envelope(&m, &e)?.region;
        let is_ext = o.is_subset(&e)?;
        let is_idem = again == e;
        idem &= is_idem;
        ext &= is_ext;
        bt.push(vec![
            k.into(),
            o.count().into(),
            e.count().into(),
            is_ext.into(),
            is_idem.into(),
        ]);
        envs.push(e);
    }
    rep.table("battery", bt);
    rep.check("idempotent", idem, "E(E(O)) = E(O) on every battery set");
    rep.check("extensive", ext, "O ⊆ E(O) on every battery set");
    let mut mono = Vec::new();
    for i in 0..battery.len() {
        for j in 0..battery.len() {
            if i != j && battery[i].is_subset(&battery[j])? {
                mono.push((i, j, envs[i].is_subset(&envs[j])?));
            }
        }
    }
    let monotone = !mono.is_empty() && mono.iter().all(|m| m.2);
    rep.check(
        "monotone",
        monotone,
        format!("inclusions (i ⊆ j, E_i ⊆ E_j): {mono:?}"),
    );
    Ok(rep)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TubeParams {
    duration: f64,
    accel: f64,
    radius: f64,
    s_samples: usize,
    cone_cells: usize,
}

impl Default for TubeParams {
    fn default() -> Self {
        Self {
            duration: 2.0,
            accel: 0.8,
            radius: 0.15,
            s_samples: 5,
            cone_cells: 8,
        }
    }
}

pub fn tube_sweep(ctx: &Ctx) -> Result<Report, CliError> {
    let p: TubeParams = ctx.params()?;
    let b = AxisBox::rect((-1.0, 3.0), (-2.0, 2.0));
    let m = SpacetimeModel::minkowski(b)?;
    let cfg = TubeConfig {
        s_samples: p.s_samples,
        ..TubeConfig::default()
    };
    let sweep = sweep_tubes(&m, &CurveFamily::bent(p.duration, p.accel), p.radius, cfg)?;
    let rows = holmgren_sweep(&m, &sweep, p.cone_cells)?;
    let mut rep = Report::new(&p);
    let mut t = Table::new(&["s", "side", "conormal_cells", "holmgren_ok", "edge_ok"]);
    for r in &rows {
        t.push(vec![
            num(r.s),
            serde_json::to_value(r.side).expect("sides serialize"),
            r.conormal_cells.into(),
            r.verdict.holmgren_ok.into(),
            r.verdict.edge_ok.into(),
        ]);
    }
    rep.table("holmgren", t);
    let holm = rows
        .iter()
        .all(|r| r.verdict.holmgren_ok && r.conormal_cells > 0);
    rep.check(
        "holmgren",
        !rows.is_empty() && holm,
        format!("{} swept boundaries, all disjoint from the forward cone: {holm}", rows.len()),
    );
    let edge = rows.iter().all(|r| r.verdict.edge_ok);
    rep.check("edge_of_wedge", !rows.is_empty() && edge, "W ∩ −W = ∅ on every window");
    Ok(rep)
}
