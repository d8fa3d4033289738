use microlocal::qft_examples::{measure_analyticity_class, AnalyticityClass, SpectralMeasure};
use serde::{Deserialize, Serialize};

use super::{Ctx, Report};
use crate::config::CliError;
use crate::envelope::{num, Table};

/// Measure presets understood by the classifier experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum Preset {
    /// Σ w δ_m over (m, w) pairs.
    Atoms { atoms: Vec<(f64, f64)> },
    /// e^{-m^α} dm on m ≥ m0.
    ExpAlpha { m0: f64, alpha: f64 },
}

impl Preset {
    fn build(&self) -> Result<SpectralMeasure, CliError> {
        let m = match self {
            Preset::Atoms { atoms } => SpectralMeasure::atoms(atoms.clone()),
            Preset::ExpAlpha { m0, alpha } => SpectralMeasure::exp_alpha(*m0, *alpha),
        };
        m.map_err(|e| CliError::Schema {
            field: "params.cases".into(),
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Case {
    measure: Preset,
    expect: AnalyticityClass,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SpectralParams {
    k_max: u32,
    cases: Vec<Case>,
}

impl Default for SpectralParams {
    fn default() -> Self {
        Self {
            k_max: 12,
            cases: vec![
                Case {
                    measure: Preset::Atoms {
                        atoms: vec![(1.3, 1.0)],
                    },
                    expect: AnalyticityClass::Analytic,
                },
                Case {
                    measure: Preset::Atoms {
                        atoms: vec![(1.0, 2.0), (2.5, 0.5)],
                    },
                    expect: AnalyticityClass::Analytic,
                },
                Case {
                    measure: Preset::ExpAlpha {
                        m0: 1.0,
                        alpha: 0.5,
                    },
                    expect: AnalyticityClass::GevreyNonanalytic,
                },
                Case {
                    measure: Preset::ExpAlpha {
                        m0: 1.0,
                        alpha: 1.0,
                    },
                    expect: AnalyticityClass::Analytic,
                },
            ],
        }
    }
}

pub fn classes(ctx: &Ctx) -> Result<Report, CliError> {
    let p: SpectralParams = ctx.params()?;
    let mut rep = Report::new(&p);
    let mut t = Table::new(&["measure", "class", "expected", "slope", "relative_growth", "k_used"]);
    let mut moments = Table::new(&["measure", "k", "moment", "root"]);
    for case in &p.cases {
        let rho = case.measure.build()?;
        let r = measure_analyticity_class(&rho, p.k_max)?;
        let again = measure_analyticity_class(&rho, p.k_max)?;
        let class = serde_json::to_value(r.class).expect("classes serialize");
        t.push(vec![
            rho.label().into(),
            class.clone(),
            serde_json::to_value(case.expect).expect("classes serialize"),
            num(r.slope),
            num(r.relative_growth),
            r.k_used.into(),
        ]);
        for row in &r.table {
            moments.push(vec![
                rho.label().into(),
                row.k.into(),
                num(row.moment),
                num(row.root),
            ]);
        }
        rep.check(
            &format!("class {}", rho.label()),
            r.class == case.expect,
            format!("{class} (expected {:?})", case.expect),
        );
        rep.check(
            &format!("deterministic {}", rho.label()),
            r == again,
            "repeat classification is identical",
        );
    }
    rep.table("classes", t);
    rep.table("moments", moments);
    Ok(rep)
}
