//! Closure operations on handles and the index arithmetic they obey.

use crate::class::ClassLabel;
use crate::error::{Error, Result};
use crate::ext::log_add;
use crate::fnmodel::{FunctionHandle, KnownTruth};
use crate::quad::{adaptive_log, LogQuad};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OpKind {
    ScaleAdd,
    Reciprocal,
    Product,
    Convolve,
    Compose,
}

impl OpKind {
    pub fn arity(self) -> usize {
        match self {
            OpKind::Reciprocal => 1,
            _ => 2,
        }
    }
}

/// Label predicted by the closure rules; `Undecided` where no rule applies.
///
/// For `Compose` the operands are `[outer, inner]`. For `ScaleAdd` the
/// operands are `[U, V]` in `aU + V`, with `a` defaulting to 1.
pub fn predicted_class(op: OpKind, operands: &[ClassLabel], a: Option<f64>) -> Result<ClassLabel> {
    use ClassLabel::*;
    if operands.len() != op.arity() {
        return Err(Error::Arity {
            expected: op.arity(),
            got: operands.len(),
        });
    }
    let first = operands[0];
    if op == OpKind::Reciprocal {
        return Ok(match first {
            M { rho } => M { rho: -rho },
            MInf => MNegInf,
            MNegInf => MInf,
            Oscillating { mu, nu } => Oscillating { mu: -nu, nu: -mu },
            Undecided => Undecided,
        });
    }
    let (u, v) = (first, operands[1]);
    Ok(match op {
        OpKind::ScaleAdd => {
            if a == Some(0.0) {
                return Ok(v);
            }
            match (u, v) {
                (M { rho: a }, M { rho: b }) => M { rho: a.max(b) },
                (MInf, MInf) => MInf,
                (MNegInf, MNegInf) => MNegInf,
                _ => Undecided,
            }
        }
        OpKind::Product => match (u, v) {
            (M { rho: a }, M { rho: b }) => M { rho: a + b },
            (MInf, MInf) | (MInf, M { .. }) | (M { .. }, MInf) => MInf,
            (MNegInf, MNegInf) | (MNegInf, M { .. }) | (M { .. }, MNegInf) => MNegInf,
            _ => Undecided,
        },
        OpKind::Convolve => match (u, v) {
            (M { rho: a }, M { rho: b }) => {
                let (lo, hi) = (a.min(b), a.max(b));
                if hi < -1.0 {
                    M { rho: hi }
                } else if lo < -1.0 && hi >= 0.0 {
                    M { rho: hi }
                } else if lo > -1.0 {
                    M { rho: lo + hi + 1.0 }
                } else {
                    Undecided
                }
            }
            (MInf, M { rho }) | (M { rho }, MInf) => {
                if rho >= 0.0 || rho < -1.0 {
                    M { rho }
                } else {
                    Undecided
                }
            }
            (MInf, MInf) => MInf,
            (MNegInf, M { .. } | MInf | MNegInf) | (M { .. } | MInf, MNegInf) => MNegInf,
            _ => Undecided,
        },
        OpKind::Compose => {
            let inner_grows = matches!(v, MNegInf) || matches!(v, M { rho } if rho > 0.0);
            if !inner_grows {
                return Ok(Undecided);
            }
            match (u, v) {
                (M { rho: a }, M { rho: b }) => M { rho: a * b },
                (MInf, _) => MInf,
                (MNegInf, _) => MNegInf,
                _ => Undecided,
            }
        }
        OpKind::Reciprocal => unreachable!(),
    })
}

fn truth_for(label: ClassLabel) -> Option<KnownTruth> {
    label.is_decided().then(|| KnownTruth::from_class(label))
}

fn merged_breaks(u: &FunctionHandle, v: &FunctionHandle) -> impl Fn(f64, f64) -> Vec<f64> + Send + Sync {
    let (u, v) = (u.clone(), v.clone());
    move |lo, hi| {
        let mut b = u.breakpoints(lo, hi);
        b.extend(v.breakpoints(lo, hi));
        b
    }
}

/// `aU + V`, evaluated with log-sum-exp.
pub fn scale_add(a: f64, u: &FunctionHandle, v: &FunctionHandle) -> Result<FunctionHandle> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::Param(format!("scale_add needs a >= 0, got {a}")));
    }
    let label = predicted_class(OpKind::ScaleAdd, &[u.label(), v.label()], Some(a))?;
    let name = format!("{a}*{}+{}", u.name(), v.name());
    let floor = u.support_floor().max(v.support_floor());
    let b = if a == 0.0 {
        let v2 = v.clone();
        FunctionHandle::builder_fallible(name, move |x| v2.eval_log(x))
            .breaks(merged_breaks(v, v))
    } else {
        let (u2, v2, la) = (u.clone(), v.clone(), a.ln());
        FunctionHandle::builder_fallible(name, move |x| {
            Ok(log_add(la + u2.eval_log(x)?, v2.eval_log(x)?))
        })
        .breaks(merged_breaks(u, v))
    };
    Ok(b.support_floor(floor)
        .smooth(u.is_smooth() && v.is_smooth())
        .maybe_truth(truth_for(label))
        .build())
}

/// `1/U`.
pub fn reciprocal(u: &FunctionHandle) -> FunctionHandle {
    let label = predicted_class(OpKind::Reciprocal, &[u.label()], None).expect("arity 1");
    let u2 = u.clone();
    let u3 = u.clone();
    FunctionHandle::builder_fallible(format!("1/{}", u.name()), move |x| Ok(-u2.eval_log(x)?))
        .support_floor(u.support_floor())
        .range_ceiling(u.range_ceiling())
        .breaks(move |lo, hi| u3.breakpoints(lo, hi))
        .smooth(u.is_smooth())
        .maybe_truth(truth_for(label))
        .build()
}

/// `U V`.
pub fn product(u: &FunctionHandle, v: &FunctionHandle) -> FunctionHandle {
    let label = predicted_class(OpKind::Product, &[u.label(), v.label()], None).expect("arity 2");
    let (u2, v2) = (u.clone(), v.clone());
    FunctionHandle::builder_fallible(format!("{}*{}", u.name(), v.name()), move |x| {
        Ok(u2.eval_log(x)? + v2.eval_log(x)?)
    })
    .support_floor(u.support_floor().max(v.support_floor()))
    .range_ceiling(u.range_ceiling().min(v.range_ceiling()))
    .breaks(merged_breaks(u, v))
    .smooth(u.is_smooth() && v.is_smooth())
    .maybe_truth(truth_for(label))
    .build()
}

/// Quadrature settings for convolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    /// Evaluation budget per abscissa.
    pub max_evals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-8,
            max_evals: 100_000,
        }
    }
}

/// `log ∫_0^{x/2} A(s) B(x - s) ds`.
fn half_convolution(
    a: &FunctionHandle,
    b: &FunctionHandle,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<LogQuad> {
    let h = 0.5 * x;
    let m = h.min(1.0);
    let mut budget = cfg.max_evals;
    // linear part on (0, min(1, x/2)]
    let lin = |s: f64| a.raw_log(s) + b.raw_log(x - s);
    let mut lin_breaks = a.breakpoints(0.0, m);
    lin_breaks.extend(b.breakpoints(x - m, x).into_iter().map(|t| x - t));
    lin_breaks.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let mut total = adaptive_log(&lin, 0.0, m, &lin_breaks, cfg.rel_tol, budget)?;
    budget = budget.saturating_sub(total.evals);
    if h > 1.0 {
        // logarithmic part on [1, x/2]
        let g = |t: f64| {
            let s = t.exp();
            t + a.raw_log(s) + b.raw_log(x - s)
        };
        let mut br: Vec<f64> = a.breakpoints(1.0, h).into_iter().map(f64::ln).collect();
        br.extend(
            b.breakpoints(x - h, x - 1.0)
                .into_iter()
                .map(|t| (x - t).ln()),
        );
        br.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let q = adaptive_log(&g, 0.0, h.ln(), &br, cfg.rel_tol, budget.max(15))?;
        total = total.combine(q);
    }
    Ok(total)
}

/// `log (U * V)(x)`.
pub fn convolution_log_value(
    u: &FunctionHandle,
    v: &FunctionHandle,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("convolution at x = {x}")));
    }
    let first = half_convolution(u, v, x, cfg)?;
    let second = half_convolution(v, u, x, cfg)?;
    Ok(first.combine(second).log_value)
}

/// `(U * V)(x) = ∫_0^x U(t) V(x - t) dt`.
///
/// Both halves `[0, x/2]` and `[x/2, x]` are integrated after reflecting the
/// second one, so each operand is only ever evaluated near zero on its own
/// linear sub-range.
pub fn convolve(u: &FunctionHandle, v: &FunctionHandle, cfg: &QuadratureConfig) -> Result<FunctionHandle> {
    if !(cfg.rel_tol > 0.0) || cfg.max_evals < 30 {
        return Err(Error::Param("invalid quadrature configuration".into()));
    }
    if u.support_floor() > 0.0 || v.support_floor() > 0.0 {
        return Err(Error::Domain("convolution needs operands defined on (0, inf)".into()));
    }
    let label = predicted_class(OpKind::Convolve, &[u.label(), v.label()], None)?;
    let (u2, v2, c) = (u.clone(), v.clone(), *cfg);
    Ok(FunctionHandle::builder_fallible(format!("{}(*){}", u.name(), v.name()), move |x| {
        convolution_log_value(&u2, &v2, x, &c)
    })
    .range_ceiling(u.range_ceiling().min(v.range_ceiling()))
    .maybe_truth(truth_for(label))
    .build())
}

/// `U(V(x))`.
pub fn compose(u: &FunctionHandle, v: &FunctionHandle) -> Result<FunctionHandle> {
    let label = predicted_class(OpKind::Compose, &[u.label(), v.label()], None)?;
    let (u2, v2) = (u.clone(), v.clone());
    Ok(FunctionHandle::builder_fallible(format!("{}o{}", u.name(), v.name()), move |x| {
        let inner = v2.eval_log(x)?.exp();
        if !inner.is_finite() || inner <= u2.support_floor() {
            return Err(Error::Domain(format!(
                "inner value {inner} at x = {x} outside the outer domain"
            )));
        }
        u2.eval_log(inner)
    })
    .support_floor(v.support_floor())
    .smooth(u.is_smooth() && v.is_smooth())
    .maybe_truth(truth_for(label))
    .build())
}
