use serde::{Deserialize, Serialize};
use std::fmt;

/// Classification verdict for a positive function at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", deny_unknown_fields)]
pub enum ClassLabel {
    /// `log U(x) / log x -> rho`, finite.
    M { rho: f64 },
    /// Decays faster than every power.
    MInf,
    /// Grows faster than every power.
    MNegInf,
    /// Lower and upper orders differ.
    Oscillating {
        #[serde(with = "crate::ext")]
        mu: f64,
        #[serde(with = "crate::ext")]
        nu: f64,
    },
    Undecided,
}

impl ClassLabel {
    pub fn rho(&self) -> Option<f64> {
        match self {
            ClassLabel::M { rho } => Some(*rho),
            _ => None,
        }
    }

    pub fn is_decided(&self) -> bool {
        !matches!(self, ClassLabel::Undecided)
    }

    /// Same tag and, for `M`, indices within `tol`. Oscillating orders
    /// compare within `tol` too, with infinities matched exactly.
    pub fn agrees_with(&self, other: &ClassLabel, tol: f64) -> bool {
        let close = |a: f64, b: f64| {
            if a.is_infinite() || b.is_infinite() {
                a == b
            } else {
                (a - b).abs() <= tol
            }
        };
        match (self, other) {
            (ClassLabel::M { rho: a }, ClassLabel::M { rho: b }) => close(*a, *b),
            (ClassLabel::MInf, ClassLabel::MInf) => true,
            (ClassLabel::MNegInf, ClassLabel::MNegInf) => true,
            (ClassLabel::Undecided, ClassLabel::Undecided) => true,
            (
                ClassLabel::Oscillating { mu: m1, nu: n1 },
                ClassLabel::Oscillating { mu: m2, nu: n2 },
            ) => close(*m1, *m2) && close(*n1, *n2),
            _ => false,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            ClassLabel::M { .. } => "M",
            ClassLabel::MInf => "MInf",
            ClassLabel::MNegInf => "MNegInf",
            ClassLabel::Oscillating { .. } => "Oscillating",
            ClassLabel::Undecided => "Undecided",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassLabel::M { rho } => write!(f, "M({rho})"),
            ClassLabel::MInf => write!(f, "MInf"),
            ClassLabel::MNegInf => write!(f, "MNegInf"),
            ClassLabel::Oscillating { mu, nu } => write!(f, "Oscillating({mu}, {nu})"),
            ClassLabel::Undecided => write!(f, "Undecided"),
        }
    }
}
