use microlocal::microsupport::{
    band_limited_family, bump_family, microsupport_scan, uniform_small_check, BumpKind,
    BumpParams, CompactSet, PhaseWindow, ScanConfig,
};
use microlocal::phase_core::{DecayFit, Verdict};
use microlocal::transforms::{coherent_family, FbiSource, PhaseBox, PhasePoint};
use serde::{Deserialize, Serialize};

use super::{Ctx, Report};
use crate::config::CliError;
use crate::envelope::{num, Table};

fn fit_row(t: &mut Table, case: &str, fit: &DecayFit) {
    t.push(vec![
        case.into(),
        num(fit.delta_hat),
        num(fit.r_squared),
        serde_json::to_value(fit.verdict).expect("verdicts serialize"),
    ]);
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ZeroEnergyParams {
    /// Fourier support: flat on |k| ≤ k_flat, zero beyond k_max.
    k_flat: f64,
    k_max: f64,
    half_width: f64,
    /// Collar around the zero section over [-2, 2].
    collar: f64,
    coherent_xi: f64,
    min_delta: f64,
}

impl Default for ZeroEnergyParams {
    fn default() -> Self {
        Self {
            k_flat: 0.5,
            k_max: 1.0,
            half_width: 20.0,
            collar: 0.5,
            coherent_xi: 1.0,
            min_delta: 0.1,
        }
    }
}

pub fn zero_energy(ctx: &Ctx) -> Result<Report, CliError> {
    let p: ZeroEnergyParams = ctx.params()?;
    let cfg = ScanConfig::default();
    let w = PhaseWindow::default_window();
    let zero = CompactSet::zero_section(-2.0, 2.0);
    let mut rep = Report::new(&p);
    rep.tol("min_delta_hat", p.min_delta);
    rep.tol("delta_min", cfg.delta_min);
    rep.tol("rho_min", cfg.rho_min);
    let mut t = Table::new(&["case", "delta_hat", "r2", "verdict"]);

    let f = band_limited_family(p.k_flat, p.k_max, p.half_width, &cfg.ladder, 2.0)?;
    let fit = uniform_small_check(&FbiSource::Family(f), &zero, p.collar, &w, &cfg)?;
    fit_row(&mut t, "band_limited", &fit);
    rep.check(
        "band_limited_exp_small",
        fit.is_exp_small() && fit.delta_hat >= p.min_delta,
        format!("verdict {:?}, delta_hat {:.4}", fit.verdict, fit.delta_hat),
    );

    let c = coherent_family(&PhasePoint::d1(0.0, p.coherent_xi))?;
    let src = FbiSource::Family(c);
    let fit = uniform_small_check(&src, &zero, p.collar, &w, &cfg)?;
    fit_row(&mut t, "coherent_uniform", &fit);
    rep.check(
        "coherent_not_exp_small",
        fit.verdict == Verdict::NotExpSmall,
        format!("verdict {:?}, delta_hat {:.4}", fit.verdict, fit.delta_hat),
    );
    let map = microsupport_scan(&src, &w, &cfg)?;
    let (i, j) = map.nearest(0.0, p.coherent_xi);
    fit_row(&mut t, "coherent_node", &map.fits[i][j]);
    rep.check(
        "coherent_node",
        map.verdict(i, j) == Verdict::NotExpSmall,
        format!(
            "node ({}, {}) verdict {:?}",
            map.xs[i],
            map.xis[j],
            map.verdict(i, j)
        ),
    );
    let mut csv = Vec::new();
    map.write_csv(&mut csv)?;
    rep.attach("coherent_scan", csv);
    rep.table("fits", t);
    Ok(rep)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BumpParamsCfg {
    collars: Vec<f64>,
    plateau: (f64, f64),
    plateau_tolerance: f64,
    /// Plateau samples per rung.
    samples: usize,
}

impl Default for BumpParamsCfg {
    fn default() -> Self {
        Self {
            collars: vec![0.1, 0.3],
            plateau: (-1.0, 1.0),
            plateau_tolerance: 1e-12,
            samples: 201,
        }
    }
}

pub fn bump_lemma(ctx: &Ctx) -> Result<Report, CliError> {
    let p: BumpParamsCfg = ctx.params()?;
    if p.samples < 2 {
        return Err(CliError::Schema {
            field: "params.samples".into(),
            message: "need at least two plateau samples".into(),
        });
    }
    let mut rep = Report::new(&p);
    rep.tol("plateau", p.plateau_tolerance);
    let mut t = Table::new(&["eps", "plateau_defect", "delta_hat", "r2", "verdict"]);
    for &eps in &p.collars {
        let cfg = ScanConfig::default().collar_scaled(eps).map_err(|e| CliError::Schema {
            field: "params.collars".into(),
            message: e.to_string(),
        })?;
        let bp = BumpParams {
            plateau: p.plateau,
            ..BumpParams::default()
        };
        let chi = bump_family(BumpKind::Plateau, bp, &cfg.ladder)?;
        let (a, b) = p.plateau;
        let mut defect: f64 = 0.0;
        for &h in cfg.ladder.rungs() {
            for i in 0..p.samples {
                let x = a + (b - a) * i as f64 / (p.samples - 1) as f64;
                defect = defect.max((chi.realization.eval1(h, x) - 1.0).norm());
            }
        }
        let w = PhaseWindow::new(
            PhaseBox::new((a - 2.5, b + 2.5), (-2.0, 2.0)),
            0.1,
            eps / 4.0,
        )?;
        let zero = CompactSet::zero_section(chi.support.0, chi.support.1);
        let fit = uniform_small_check(
            &FbiSource::Family(chi.realization.clone()),
            &zero,
            eps,
            &w,
            &cfg,
        )?;
        t.push(vec![
            num(eps),
            num(defect),
            num(fit.delta_hat),
            num(fit.r_squared),
            serde_json::to_value(fit.verdict).expect("verdicts serialize"),
        ]);
        rep.check(
            &format!("plateau eps={eps}"),
            defect <= p.plateau_tolerance,
            format!("max |chi - 1| on K = {defect:.3e}"),
        );
        rep.check(
            &format!("zero_energy eps={eps}"),
            fit.is_exp_small(),
            format!(
                "verdict {:?}, delta_hat {:.4} (rescaled delta_min {:.4})",
                fit.verdict, fit.delta_hat, cfg.delta_min
            ),
        );
    }
    rep.table("collars", t);
    Ok(rep)
}
