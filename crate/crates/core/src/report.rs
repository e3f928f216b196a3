//! Structured outcome of a named condition check.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Identifier of a checked condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionId {
    #[serde(rename = "C1r")]
    C1r,
    #[serde(rename = "C2r")]
    C2r,
    #[serde(rename = "K1*")]
    K1,
    #[serde(rename = "K2*")]
    K2,
    #[serde(rename = "K3*")]
    K3,
    #[serde(rename = "REP-LIMITS")]
    RepLimits,
    #[serde(rename = "REP-INF")]
    RepInf,
    #[serde(rename = "KAPPA-RHO")]
    KappaRho,
    #[serde(rename = "RV-RATIO")]
    RvRatio,
    #[serde(rename = "TAUBERIAN")]
    Tauberian,
    #[serde(rename = "VM1")]
    Vm1,
    #[serde(rename = "VM2")]
    Vm2,
    #[serde(rename = "PBDH")]
    Pbdh,
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConditionId::C1r => "C1r",
            ConditionId::C2r => "C2r",
            ConditionId::K1 => "K1*",
            ConditionId::K2 => "K2*",
            ConditionId::K3 => "K3*",
            ConditionId::RepLimits => "REP-LIMITS",
            ConditionId::RepInf => "REP-INF",
            ConditionId::KappaRho => "KAPPA-RHO",
            ConditionId::RvRatio => "RV-RATIO",
            ConditionId::Tauberian => "TAUBERIAN",
            ConditionId::Vm1 => "VM1",
            ConditionId::Vm2 => "VM2",
            ConditionId::Pbdh => "PBDH",
        };
        f.write_str(s)
    }
}

/// A named diagnostic value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Measured {
    pub name: String,
    #[serde(with = "crate::ext")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionReport {
    pub condition: ConditionId,
    pub passed: bool,
    pub measured: Vec<Measured>,
    #[serde(with = "crate::ext")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl ConditionReport {
    pub fn new(condition: ConditionId, passed: bool, tolerance: f64) -> Self {
        ConditionReport {
            condition,
            passed,
            measured: Vec::new(),
            tolerance,
            detail: None,
        }
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Self {
        self.measured.push(Measured {
            name: name.into(),
            value,
        });
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }

    /// Looks up a measured value by name.
    pub fn get(&self, name: &str) -> Option<f64> {
        self.measured.iter().find(|m| m.name == name).map(|m| m.value)
    }
}
