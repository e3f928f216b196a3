use mclass::evt::{DomainReport, SimulationResult, SubsequenceWitness};
use mclass::order::KappaConfig;
use mclass::tauberian::TransformConfig;
use mclass::{ClassLabel, ConditionReport, GridSpec, IndexEstimate};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub schema_version: String,
    pub command: String,
    pub input: InputDescriptor,
    pub class: ClassLabel,
    pub estimates: Estimates,
    pub conditions: Vec<ConditionReport>,
    pub evt: Option<EvtSection>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum InputDescriptor {
    Named { name: String, params: BTreeMap<String, f64> },
    File { path: String, sha256: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Estimates {
    pub mu: IndexEstimate,
    pub nu: IndexEstimate,
    pub kappa: Option<IndexEstimate>,
    pub rho: Option<IndexEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvtSection {
    pub domain: Option<DomainReport>,
    pub simulation: Option<SimulationResult>,
    pub witness: Option<SubsequenceWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub grid: GridSpec,
    /// Grid used by representation and Karamata checks.
    pub condition_grid: Option<GridSpec>,
    pub kappa: KappaConfig,
    pub transform: Option<TransformConfig>,
    pub tol: f64,
    pub seed: Option<u64>,
    pub tool_version: String,
}

impl ReportDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}
