use microlocal::phase_core::AxisBox;
use microlocal::qft_examples::{product_bump, source_support, PropagatorGrid, PropagatorKind};
use microlocal::spacetime::{chronological_set, Direction, Grid, Seed, SpacetimeModel};
use serde::{Deserialize, Serialize};

use super::{Ctx, Report};
use crate::config::CliError;
use crate::envelope::{num, Table};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SupportParams {
    nt: usize,
    nx: usize,
    t_range: (f64, f64),
    x_range: (f64, f64),
    support_radius: f64,
    residual_radius: f64,
    /// Residual bound in units of step².
    residual_factor: f64,
}

impl Default for SupportParams {
    fn default() -> Self {
        Self {
            nt: 40,
            nx: 60,
            t_range: (-1.0, 3.0),
            x_range: (-3.0, 3.0),
            support_radius: 0.5,
            residual_radius: 0.8,
            residual_factor: 10.0,
        }
    }
}

pub fn support(ctx: &Ctx) -> Result<Report, CliError> {
    let p: SupportParams = ctx.params()?;
    let b = AxisBox::rect(p.t_range, p.x_range);
    let grid = Grid::new(&b, p.nt, p.nx)?;
    // A larger chart so the causal sets are not clipped by the grid box.
    let model = SpacetimeModel::minkowski(b.inflate(1.0))?;
    let step = grid.dt().max(grid.dx());
    let mut rep = Report::new(&p);
    rep.tol("residual", p.residual_factor * step * step);
    rep.tol("support_cells", 1.0);

    let f = product_bump([0.0, 0.0], p.support_radius)?;
    let src = source_support(&f, &grid, 1.0);
    let mut t = Table::new(&["kind", "support_cells", "allowed_cells", "outside", "hausdorff"]);
    for (kind, dir, name) in [
        (PropagatorKind::Ret, Direction::Future, "RET"),
        (PropagatorKind::Adv, Direction::Past, "ADV"),
    ] {
        let g = PropagatorGrid::compute(&f, kind, &grid, 1.0)?;
        let cone = chronological_set(&model, &grid, Seed::Region(&src), dir)?;
        let causal = src.union(&cone.region)?;
        let allowed = causal.dilate();
        let sup = g.support();
        let outside = sup.difference(&allowed)?.count();
        let haus = sup.hausdorff(&causal)?;
        t.push(vec![
            name.into(),
            sup.count().into(),
            allowed.count().into(),
            outside.into(),
            num(haus),
        ]);
        rep.check(
            &format!("support {name}"),
            outside == 0 && sup.count() > 3 * src.count(),
            format!(
                "{} support cells, {outside} beyond one cell of the causal set",
                sup.count()
            ),
        );
        rep.region(&format!("support_{}", name.to_lowercase()), sup);
        rep.region(&format!("causal_{}", name.to_lowercase()), causal);
    }
    rep.table("support", t);

    let f = product_bump([0.0, 0.0], p.residual_radius)?;
    let g = PropagatorGrid::compute(&f, PropagatorKind::Ret, &grid, 1.0)?;
    let res = g.wave_residual(&f);
    let bound = p.residual_factor * step * step;
    rep.check(
        "wave_residual",
        res < bound,
        format!("max |□G f − f| = {res:.3e}, bound {bound:.3e}"),
    );
    Ok(rep)
}
