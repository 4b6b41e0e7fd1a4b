//! Result files: an echo of the instance plus whatever was computed.

use std::path::Path;

use kdlab_core::diagnostics::{AttainmentReport, BoundRow, CcmOutcome, SequenceDiagnostics, ViolationKind};
use kdlab_core::{DualityReport, ExtReal, PlanKind, PotentialPair, SolverStats, TransportPlan};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::instance::{InstanceFile, SCHEMA_VERSION};
use crate::json::{self, ExtFloat};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub schema_version: u32,
    pub instance: InstanceFile,
    /// `primal`, `dual`, `partial:ε`, `restricted`, `relaxed-dual:ε`, or the sweep/diagnostic name.
    pub problem: String,
    pub solver: SolverEcho,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ReportRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<Vec<BoundRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singular: Option<SingularRecord>,
}

impl ResultFile {
    pub fn new(instance: InstanceFile, problem: String, solver: SolverEcho) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            instance,
            problem,
            solver,
            report: None,
            certificate: None,
            sweep: None,
            bound: None,
            singular: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        json::to_string(self)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::parse(&text, path)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverEcho {
    pub tolerance: f64,
    pub max_iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportRecord {
    pub primal_value: ExtFloat,
    pub dual_value: ExtFloat,
    pub gap: ExtFloat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potentials: Option<PotentialRecord>,
    pub stats: StatsRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanRecord {
    /// `exact` or `sub`.
    pub kind: String,
    pub mass: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialRecord {
    pub phi: Vec<ExtFloat>,
    pub psi: Vec<ExtFloat>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsRecord {
    pub iterations: usize,
    pub pivots: usize,
    pub degenerate_pivots: usize,
    pub bland_pivots: usize,
}

fn ext(v: ExtReal) -> ExtFloat {
    ExtFloat(v.to_f64())
}

impl From<&TransportPlan> for PlanRecord {
    fn from(p: &TransportPlan) -> Self {
        let kind = match p.kind() {
            PlanKind::ExactCoupling => "exact",
            PlanKind::SubCoupling => "sub",
        };
        Self { kind: kind.into(), mass: p.mass().chunks(p.cols()).map(<[f64]>::to_vec).collect() }
    }
}

impl From<&PotentialPair> for PotentialRecord {
    fn from(pp: &PotentialPair) -> Self {
        Self { phi: pp.phi().iter().map(|&v| ext(v)).collect(), psi: pp.psi().iter().map(|&v| ext(v)).collect() }
    }
}

impl From<&SolverStats> for StatsRecord {
    fn from(s: &SolverStats) -> Self {
        Self {
            iterations: s.iterations,
            pivots: s.pivots,
            degenerate_pivots: s.degenerate_pivots,
            bland_pivots: s.bland_pivots,
        }
    }
}

impl From<&DualityReport> for ReportRecord {
    fn from(r: &DualityReport) -> Self {
        Self {
            primal_value: ext(r.primal_value),
            dual_value: ext(r.dual_value),
            gap: ExtFloat(r.gap),
            plan: r.optimal_plan.as_ref().map(PlanRecord::from),
            potentials: r.optimal_potentials.as_ref().map(PotentialRecord::from),
            stats: StatsRecord::from(&r.stats),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateRecord {
    pub tolerance: f64,
    pub strong_ccm: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<ViolationRecord>,
    pub j_c: ExtFloat,
    pub cost: ExtFloat,
    pub gap: ExtFloat,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViolationRecord {
    pub row: usize,
    pub col: usize,
    /// `above_cost` or `slack_on_support`.
    pub kind: String,
    pub excess: ExtFloat,
}

impl CertificateRecord {
    pub fn new(a: &AttainmentReport, tolerance: f64) -> Self {
        let violation = match a.ccm {
            CcmOutcome::Pass => None,
            CcmOutcome::Fail(v) => Some(ViolationRecord {
                row: v.row,
                col: v.col,
                kind: match v.kind {
                    ViolationKind::AboveCost => "above_cost",
                    ViolationKind::SlackOnSupport => "slack_on_support",
                }
                .into(),
                excess: ExtFloat(v.excess),
            }),
        };
        Self {
            tolerance,
            strong_ccm: a.ccm.passed(),
            violation,
            j_c: ext(a.j_c),
            cost: ext(a.cost),
            gap: ExtFloat(a.gap),
            certified: a.certified,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRecord {
    /// `epsilon-primal`, `epsilon-dual` or `n-scaling`.
    pub kind: String,
    pub rows: Vec<SweepPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extrapolated_limit: Option<f64>,
    pub monotone: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPoint {
    pub parameter: f64,
    pub value: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundRecord {
    pub epsilon: f64,
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl BoundRecord {
    pub fn new(row: &BoundRow, epsilons: &[f64]) -> Self {
        Self { epsilon: epsilons[row.sequence_index], k: row.k, lhs: row.lhs, rhs: row.rhs, pass: row.pass }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingularRecord {
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    /// `profile[d][e]` for δ index `d` and ε index `e`.
    pub profile: Vec<Vec<f64>>,
    pub l1_distances_to_limit: Vec<f64>,
    pub positive_part_norms: Vec<f64>,
    pub singular_mass_estimate: f64,
}

impl SingularRecord {
    pub fn new(d: &SequenceDiagnostics, epsilons: &[f64], deltas: &[f64]) -> Self {
        Self {
            epsilons: epsilons.to_vec(),
            deltas: deltas.to_vec(),
            profile: d.profile.clone(),
            l1_distances_to_limit: d.l1_distances_to_limit.clone(),
            positive_part_norms: d.positive_part_norms.clone(),
            singular_mass_estimate: d.singular_mass_estimate,
        }
    }
}
