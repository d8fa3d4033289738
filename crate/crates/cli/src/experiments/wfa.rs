use microlocal::analytic_wf::{one_sided_check, wfa_detect, Directions, Distribution1d, Side};
use microlocal::microsupport::ScanConfig;
use microlocal::phase_core::grid_nodes;
use microlocal::qft_examples::{counterexample_g, K_MAX, ROUTE_TOLERANCE};
use serde::{Deserialize, Serialize};

use super::{Ctx, Report, NODE_EPS};
use crate::config::CliError;
use crate::envelope::{num, Table};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TruthParams {
    range: (f64, f64),
    step: f64,
    /// |t| from which the spectral boundary value must read analytic.
    spectral_clear: f64,
}

impl Default for TruthParams {
    fn default() -> Self {
        Self {
            range: (-2.0, 2.0),
            step: 0.25,
            spectral_clear: 0.5,
        }
    }
}

fn side_name(s: Side) -> &'static str {
    match s {
        Side::Upper => "UPPER",
        Side::Lower => "LOWER",
        Side::Both => "BOTH",
        Side::None => "NONE",
    }
}

pub fn truth_table(ctx: &Ctx) -> Result<Report, CliError> {
    let p: TruthParams = ctx.params()?;
    let cfg = ScanConfig::analytic();
    let pts: Vec<Vec<f64>> = grid_nodes(p.range.0, p.range.1, p.step)
        .into_iter()
        .map(|x| vec![x])
        .collect();
    let cell = p.step + NODE_EPS;
    let mut rep = Report::new(&p);
    rep.tol("cell", p.step);
    rep.tol("delta_min", cfg.delta_min);
    let mut flagged_t = Table::new(&["distribution", "x", "directions"]);

    // (flagged x, directions per flagged x)
    let detect = |u: &Distribution1d| -> Result<Vec<(f64, Vec<usize>)>, CliError> {
        let r = wfa_detect(&u.fbi, &pts, Directions::Line, &cfg)?;
        Ok(r.flagged_points()
            .into_iter()
            .map(|i| (r.base_points[i][0], r.flagged_directions(i)))
            .collect())
    };
    let mut record = |name: &str, f: &[(f64, Vec<usize>)]| {
        for (x, d) in f {
            flagged_t.push(vec![name.into(), num(*x), format!("{d:?}").into()]);
        }
    };
    let describe = |f: &[(f64, Vec<usize>)]| -> String {
        let parts: Vec<String> = f.iter().map(|(x, d)| format!("{x}:{d:?}")).collect();
        format!("[{}]", parts.join(", "))
    };

    let delta = detect(&Distribution1d::point_mass(0.0))?;
    record("delta", &delta);
    let at0 = delta.iter().find(|(x, _)| x.abs() < NODE_EPS);
    rep.check(
        "delta",
        at0.is_some_and(|(_, d)| d == &[0, 1]) && delta.iter().all(|(x, _)| x.abs() <= cell),
        describe(&delta),
    );

    let gauss = detect(&Distribution1d::gaussian())?;
    record("gaussian", &gauss);
    rep.check("gaussian", gauss.is_empty(), describe(&gauss));

    let bump = detect(&Distribution1d::nonanalytic_bump())?;
    record("nonanalytic_bump", &bump);
    let ends_ok = [-1.0, 1.0].iter().all(|e| {
        bump.iter()
            .any(|(x, d)| (x - e).abs() <= cell && d == &[0, 1])
    });
    let nothing_else = bump
        .iter()
        .all(|(x, d)| (x.abs() - 1.0).abs() <= cell && d == &[0, 1]);
    rep.check("nonanalytic_bump", ends_ok && nothing_else, describe(&bump));

    let spec = detect(&Distribution1d::spectral_sqrt())?;
    record("spectral_sqrt", &spec);
    let one_sided = spec
        .iter()
        .any(|(x, d)| x.abs() < NODE_EPS && d.len() == 1);
    let clear = spec.iter().all(|(x, _)| x.abs() < p.spectral_clear - NODE_EPS);
    rep.check(
        "spectral_sqrt",
        one_sided && clear,
        format!("{} (one-sided at 0: {one_sided})", describe(&spec)),
    );
    rep.table("flagged", flagged_t);

    let cases: Vec<(Distribution1d, f64, Side)> = vec![
        (Distribution1d::point_mass(0.0), 0.0, Side::Both),
        (Distribution1d::point_mass(0.0), 0.5, Side::None),
        (Distribution1d::gaussian(), 0.0, Side::None),
        (Distribution1d::gaussian(), 1.0, Side::None),
        (Distribution1d::heaviside(), 0.0, Side::Both),
        (Distribution1d::heaviside(), -0.5, Side::None),
        (Distribution1d::heaviside(), 0.5, Side::None),
        (Distribution1d::nonanalytic_bump(), 1.0, Side::Both),
        (Distribution1d::nonanalytic_bump(), -1.0, Side::Both),
        (Distribution1d::nonanalytic_bump(), 0.0, Side::None),
        (Distribution1d::spectral_sqrt(), 0.0, Side::Lower),
        (Distribution1d::spectral_sqrt(), 0.5, Side::None),
        (Distribution1d::spectral_sqrt(), -0.5, Side::None),
    ];
    let mut t = Table::new(&["distribution", "x0", "side", "expected", "fbi", "sech", "disagree"]);
    let mut disagree = 0;
    let mut wrong = Vec::new();
    for (u, x0, want) in &cases {
        let o = one_sided_check(u, *x0, &cfg)?;
        if o.disagree {
            disagree += 1;
        }
        if o.side != *want {
            wrong.push(format!("{} at {x0}: {:?}", u.name, o.side));
        }
        t.push(vec![
            u.name.clone().into(),
            num(*x0),
            side_name(o.side).into(),
            side_name(*want).into(),
            format!("{:?}", o.fbi_sides).into(),
            format!("{:?}", o.sech_sides).into(),
            o.disagree.into(),
        ]);
    }
    rep.table("one_sided", t);
    rep.check(
        "detectors_agree",
        disagree == 0,
        format!("{disagree} DISAGREE flags over {} cases", cases.len()),
    );
    rep.check(
        "one_sided_sides",
        wrong.is_empty(),
        if wrong.is_empty() {
            "all sides as expected".to_string()
        } else {
            wrong.join("; ")
        },
    );
    Ok(rep)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CounterParams {
    k_max: usize,
    /// Even orders up to here must agree across the two routes.
    k_agree: usize,
    route_tolerance: f64,
    odd_tolerance: f64,
    /// Roots must increase from this order on.
    k_root_from: usize,
}

impl Default for CounterParams {
    fn default() -> Self {
        Self {
            k_max: K_MAX,
            k_agree: 20,
            route_tolerance: ROUTE_TOLERANCE,
            odd_tolerance: 1e-10,
            k_root_from: 8,
        }
    }
}

pub fn counterexample(ctx: &Ctx) -> Result<Report, CliError> {
    let p: CounterParams = ctx.params()?;
    let r = counterexample_g(p.k_max)?;
    let mut rep = Report::new(&p);
    rep.tol("route_relative", p.route_tolerance);
    rep.tol("odd_derivatives", p.odd_tolerance);
    let mut t = Table::new(&["k", "cauchy", "closed", "rel_diff", "cauchy_scale", "root"]);
    let mut worst_even: f64 = 0.0;
    let mut worst_odd: f64 = 0.0;
    for row in &r.rows {
        let root = r
            .roots
            .iter()
            .find(|(k, _)| *k == row.k)
            .map_or(f64::NAN, |x| x.1);
        t.push(vec![
            row.k.into(),
            num(row.cauchy),
            num(row.closed),
            num(row.rel_diff),
            num(row.cauchy_scale),
            num(root),
        ]);
        if row.k % 2 == 0 && row.k <= p.k_agree {
            worst_even = worst_even.max(row.rel_diff);
        }
        if row.k % 2 == 1 {
            worst_odd = worst_odd.max(row.cauchy_scale);
        }
    }
    rep.table("derivatives", t);
    rep.check(
        "routes_agree",
        worst_even <= p.route_tolerance,
        format!(
            "max relative gap {worst_even:.3e} over even k ≤ {}",
            p.k_agree
        ),
    );
    rep.check(
        "odd_vanish",
        worst_odd <= p.odd_tolerance,
        format!("max odd |g^(k)(0)|/k! scale {worst_odd:.3e}"),
    );
    let roots: Vec<(usize, f64)> = r
        .roots
        .iter()
        .filter(|(k, _)| *k >= p.k_root_from)
        .copied()
        .collect();
    let increasing = roots.len() >= 2 && roots.windows(2).all(|w| w[1].1 > w[0].1);
    rep.check(
        "roots_increase",
        increasing,
        format!("(|g^(k)(0)|/k!)^(1/k) for even k ≥ {}: {roots:?}", p.k_root_from),
    );
    rep.note(format!(
        "root-test radius estimate {:.4e} ({:?})",
        r.radius.radius, r.radius.trend
    ));
    Ok(rep)
}
