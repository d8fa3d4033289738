//! One module per subcommand group. Each experiment decodes its own
//! parameters, runs the library pipeline and records named checks.

mod calculus;
mod commutator;
mod fbi;
mod geometry;
mod microsupport;
mod qm;
mod spectral;
mod wfa;

use std::collections::BTreeMap;

use microlocal::phase_core::HLadder;
use microlocal::spacetime::Region;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{decode_params, CliError};
use crate::envelope::{Check, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    Fbi,
    Microsupport,
    Wfa,
    Calculus,
    Envelope,
    Spectral,
    Qm,
    Commutator,
}

impl Group {
    pub fn name(self) -> &'static str {
        match self {
            Group::Fbi => "fbi",
            Group::Microsupport => "microsupport",
            Group::Wfa => "wfa",
            Group::Calculus => "calculus",
            Group::Envelope => "envelope",
            Group::Spectral => "spectral",
            Group::Qm => "qm",
            Group::Commutator => "commutator",
        }
    }
}

/// Inputs handed to an experiment.
pub struct Ctx<'a> {
    pub params: &'a toml::Table,
    pub seed: u64,
}

impl Ctx<'_> {
    pub fn params<P: DeserializeOwned>(&self) -> Result<P, CliError> {
        decode_params(self.params)
    }
}

/// What an experiment hands back before it is wrapped in an envelope.
#[derive(Default)]
pub struct Report {
    pub params: Value,
    pub tolerances: BTreeMap<String, f64>,
    pub tables: BTreeMap<String, Table>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    /// Masks written as PNG when plots are requested.
    pub regions: Vec<(String, Region)>,
    /// Extra CSV files produced by library writers.
    pub attachments: Vec<(String, Vec<u8>)>,
}

impl Report {
    pub fn new(params: &impl Serialize) -> Self {
        Self {
            params: serde_json::to_value(params).expect("params serialize"),
            ..Self::default()
        }
    }

    pub fn tol(&mut self, name: &str, v: f64) {
        self.tolerances.insert(name.into(), v);
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn table(&mut self, name: &str, t: Table) {
        self.tables.insert(name.into(), t);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn region(&mut self, name: &str, r: Region) {
        self.regions.push((name.into(), r));
    }

    pub fn attach(&mut self, name: &str, bytes: Vec<u8>) {
        self.attachments.push((name.into(), bytes));
    }
}

pub type RunFn = fn(&Ctx) -> Result<Report, CliError>;

pub struct Spec {
    pub id: &'static str,
    pub group: Group,
    pub criterion: u8,
    pub title: &'static str,
    pub run: RunFn,
}

pub static REGISTRY: &[Spec] = &[
    Spec {
        id: "fbi-isometry",
        group: Group::Fbi,
        criterion: 1,
        title: "FBI transform is an isometry",
        run: fbi::isometry,
    },
    Spec {
        id: "fbi-reconstruct",
        group: Group::Fbi,
        criterion: 2,
        title: "coherent-state reconstruction",
        run: fbi::reconstruct,
    },
    Spec {
        id: "fbi-radial",
        group: Group::Fbi,
        criterion: 3,
        title: "radial inversion formula",
        run: fbi::radial,
    },
    Spec {
        id: "zero-energy",
        group: Group::Microsupport,
        criterion: 4,
        title: "zero-energy families",
        run: microsupport::zero_energy,
    },
    Spec {
        id: "bump-lemma",
        group: Group::Microsupport,
        criterion: 5,
        title: "plateau bump families carry no energy",
        run: microsupport::bump_lemma,
    },
    Spec {
        id: "product-rule",
        group: Group::Calculus,
        criterion: 6,
        title: "microsupport of products",
        run: calculus::product_rule,
    },
    Spec {
        id: "pullback",
        group: Group::Calculus,
        criterion: 7,
        title: "pullback covariance",
        run: calculus::pullback,
    },
    Spec {
        id: "wfa-truth-table",
        group: Group::Wfa,
        criterion: 8,
        title: "analytic wavefront detector truth table",
        run: wfa::truth_table,
    },
    Spec {
        id: "counterexample-g",
        group: Group::Wfa,
        criterion: 9,
        title: "smooth function with zero radius of convergence",
        run: wfa::counterexample,
    },
    Spec {
        id: "spectral-class",
        group: Group::Spectral,
        criterion: 10,
        title: "analyticity class of spectral measures",
        run: spectral::classes,
    },
    Spec {
        id: "qm-identity",
        group: Group::Qm,
        criterion: 11,
        title: "FBI identity for truncated quantum mechanics",
        run: qm::identity,
    },
    Spec {
        id: "correlator-cone",
        group: Group::Qm,
        criterion: 12,
        title: "correlator wavefront in the nested cone",
        run: qm::correlator,
    },
    Spec {
        id: "causal-geometry",
        group: Group::Envelope,
        criterion: 13,
        title: "chronological futures and diamonds",
        run: geometry::causal,
    },
    Spec {
        id: "envelope-diamond",
        group: Group::Envelope,
        criterion: 14,
        title: "timelike tube envelope of a thin tube",
        run: geometry::envelope_diamond,
    },
    Spec {
        id: "tube-sweep",
        group: Group::Envelope,
        criterion: 15,
        title: "tube sweep and Holmgren predicates",
        run: geometry::tube_sweep,
    },
    Spec {
        id: "commutator-support",
        group: Group::Commutator,
        criterion: 16,
        title: "support of the retarded solution",
        run: commutator::support,
    },
];

pub fn find(id: &str) -> Option<&'static Spec> {
    REGISTRY.iter().find(|s| s.id == id)
}

pub fn in_group(g: Group) -> impl Iterator<Item = &'static Spec> {
    REGISTRY.iter().filter(move |s| s.group == g)
}

/// Tolerance on grid-aligned comparisons of node coordinates.
pub(crate) const NODE_EPS: f64 = 1e-9;

pub(crate) fn fmt_points(p: &[(f64, f64)]) -> String {
    let parts: Vec<String> = p.iter().map(|(a, b)| format!("({a}, {b})")).collect();
    format!("[{}]", parts.join(", "))
}

/// h-ladder h_max·ratio^k, k < count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct LadderSpec {
    pub h_max: f64,
    pub ratio: f64,
    pub count: usize,
}

impl LadderSpec {
    pub const DEFAULT: LadderSpec = LadderSpec {
        h_max: 0.5,
        ratio: 0.8,
        count: 16,
    };

    pub fn build(&self) -> Result<HLadder, CliError> {
        HLadder::new(self.h_max, self.ratio, self.count).map_err(|e| CliError::Schema {
            field: "params.ladder".into(),
            message: e.to_string(),
        })
    }
}

impl Default for LadderSpec {
    fn default() -> Self {
        Self::DEFAULT
    }
}
