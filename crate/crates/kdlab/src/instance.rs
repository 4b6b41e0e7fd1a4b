//! Instance files and their conversion into solver inputs.

use std::path::Path;

use kdlab_core::rotation::{build_ap_cost, build_ex33_cost, build_h, graph_mixture, make_weights, RotationInstance};
use kdlab_core::{Cost, CostMatrix, Marginal, TransportPlan};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::json::ExtFloat;

pub const SCHEMA_VERSION: u32 = 1;

/// Mixture depth of the default reference plan for the clamped-Birkhoff cost.
pub const DEFAULT_REFERENCE_K: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InstanceFile {
    Explicit(ExplicitInstance),
    Ap(RotationSpec),
    Ex33(RotationSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitInstance {
    pub schema_version: u32,
    /// Rows of costs; `"inf"` marks a forbidden cell.
    pub cost: Vec<Vec<ExtFloat>>,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    /// Reference coupling for the restricted and relaxed problems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_plan: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationSpec {
    pub schema_version: u32,
    pub n: usize,
    pub shift: Shift,
    /// Largest graph index; defaults to `n − 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    /// Graphs `0..=reference_k` carry the reference mixture (clamped cost only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shift {
    AutoGolden,
    Fixed(usize),
}

impl Serialize for Shift {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shift::AutoGolden => s.serialize_str("auto-golden"),
            Shift::Fixed(v) => s.serialize_u64(*v as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Shift {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(usize),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Shift::Fixed(v)),
            Raw::Text(t) if t == "auto-golden" => Ok(Shift::AutoGolden),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("shift must be an integer or \"auto-golden\", got {t:?}"))),
        }
    }
}

impl Shift {
    pub fn resolve(self, n: usize) -> Result<RotationInstance> {
        Ok(match self {
            Shift::AutoGolden => RotationInstance::golden(n)?,
            Shift::Fixed(s) => RotationInstance::new(n, s)?,
        })
    }
}

/// Solver inputs derived from an instance file.
#[derive(Clone, Debug)]
pub struct Model {
    pub cost: CostMatrix,
    pub mu: Marginal,
    pub nu: Marginal,
    /// Reference coupling for the restricted and relaxed problems.
    pub reference: TransportPlan,
    pub rotation: Option<RotationInstance>,
    pub k_max: Option<usize>,
}

impl RotationSpec {
    pub fn template(n: usize, shift: Shift, k_max: Option<usize>) -> Self {
        Self { schema_version: SCHEMA_VERSION, n, shift, k_max, reference_k: None, seed: None }
    }

    fn k_max(&self) -> Result<usize> {
        match self.k_max {
            Some(k) if k >= self.n => Err(CliError::Invalid(format!("k_max must be below n = {}, got {k}", self.n))),
            Some(k) => Ok(k),
            None => Ok(self.n - 1),
        }
    }
}

fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(CliError::Invalid(format!("unsupported schema_version {v}, expected {SCHEMA_VERSION}")));
    }
    Ok(())
}

impl InstanceFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            InstanceFile::Explicit(_) => "explicit",
            InstanceFile::Ap(_) => "ap",
            InstanceFile::Ex33(_) => "ex33",
        }
    }

    pub fn build(&self) -> Result<Model> {
        match self {
            InstanceFile::Explicit(e) => e.build(),
            InstanceFile::Ap(spec) => {
                check_version(spec.schema_version)?;
                if spec.reference_k.is_some() {
                    return Err(CliError::Invalid("reference_k applies to ex33 instances only".into()));
                }
                let inst = spec.shift.resolve(spec.n)?;
                let k_max = spec.k_max()?;
                Ok(Model {
                    cost: build_ap_cost(&inst)?,
                    mu: inst.marginal(),
                    nu: inst.marginal(),
                    reference: inst.ap_reference_plan(),
                    rotation: Some(inst),
                    k_max: Some(k_max),
                })
            }
            InstanceFile::Ex33(spec) => {
                check_version(spec.schema_version)?;
                let inst = spec.shift.resolve(spec.n)?;
                let k_max = spec.k_max()?;
                let reference_k = spec.reference_k.unwrap_or(DEFAULT_REFERENCE_K).min(k_max);
                let h = build_h(&inst, k_max)?;
                let weights = make_weights(&inst, reference_k, &h, &[])?;
                Ok(Model {
                    cost: build_ex33_cost(&inst, k_max)?,
                    mu: inst.marginal(),
                    nu: inst.marginal(),
                    reference: graph_mixture(&inst, &weights)?,
                    rotation: Some(inst),
                    k_max: Some(k_max),
                })
            }
        }
    }
}

impl ExplicitInstance {
    fn build(&self) -> Result<Model> {
        check_version(self.schema_version)?;
        let rows = self.cost.len();
        let cols = self.cost.first().map_or(0, Vec::len);
        if let Some(i) = self.cost.iter().position(|r| r.len() != cols) {
            return Err(CliError::Invalid(format!("cost row {i} has {} entries, row 0 has {cols}", self.cost[i].len())));
        }
        let entries = self
            .cost
            .iter()
            .flatten()
            .map(|v| if v.0 == f64::INFINITY { Cost::Infinite } else { Cost::Finite(v.0) })
            .collect();
        let cost = CostMatrix::new(rows, cols, entries)?;
        let mu = Marginal::new(self.mu.clone())?;
        let nu = Marginal::new(self.nu.clone())?;
        let reference = match &self.reference_plan {
            Some(plan) => {
                if plan.len() != rows || plan.iter().any(|r| r.len() != cols) {
                    return Err(CliError::Invalid(format!("reference_plan must be {rows}x{cols}")));
                }
                TransportPlan::exact_coupling(plan.iter().flatten().copied().collect(), &mu, &nu)?
            }
            None => {
                let mass = mu.weights().iter().flat_map(|a| nu.weights().iter().map(move |b| a * b)).collect();
                TransportPlan::exact_coupling(mass, &mu, &nu)?
            }
        };
        Ok(Model { cost, mu, nu, reference, rotation: None, k_max: None })
    }
}
