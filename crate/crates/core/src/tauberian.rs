//! Laplace–Stieltjes transforms in integrated form and the index-preservation check.

use crate::class::ClassLabel;
use crate::error::{Error, Result};
use crate::ext::log_sub;
use crate::fnmodel::{FunctionHandle, KnownTruth};
use crate::grid::GridSpec;
use crate::order::{classify, DEFAULT_TOL};
use crate::quad::adaptive_log;
use crate::report::{ConditionId, ConditionReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Abscissa at which `U(0+)` is read.
pub const ORIGIN_PROBE: f64 = 1e-200;
/// Largest admissible `U(0+)`.
pub const ORIGIN_TOL: f64 = 1e-9;
const SCAN_STEP: f64 = 0.5;
const LOWER_MARGIN: f64 = 20.0;
const QUAD_BUDGET: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformConfig {
    pub s_max: f64,
    pub s_min: f64,
    pub points: usize,
    pub quad_rel_tol: f64,
    /// Integration stops once the log integrand is this far below its running maximum.
    pub cutoff_nats: f64,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig {
            s_max: 1e-1,
            s_min: 1e-8,
            points: 200,
            quad_rel_tol: 1e-8,
            cutoff_nats: 40.0,
        }
    }
}

impl TransformConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.s_min > 0.0 && self.s_min < self.s_max && self.s_max.is_finite()) {
            return Err(Error::Param(format!(
                "s grid needs 0 < s_min < s_max, got [{}, {}]",
                self.s_min, self.s_max
            )));
        }
        if self.points < 2 {
            return Err(Error::Param("s grid needs at least 2 points".into()));
        }
        if !(self.quad_rel_tol > 0.0 && self.quad_rel_tol < 1.0) || !(self.cutoff_nats > 0.0) {
            return Err(Error::Param("quad_rel_tol in (0,1) and cutoff_nats > 0 required".into()));
        }
        Ok(())
    }

    /// Geometric, strictly decreasing s values.
    pub fn s_grid(&self) -> Vec<f64> {
        let (a, b) = (self.s_max.ln(), self.s_min.ln());
        let n = self.points - 1;
        (0..=n).map(|i| (a + (b - a) * i as f64 / n as f64).exp()).collect()
    }
}

/// `log U(0+)`, read at [`ORIGIN_PROBE`] or just above the support floor.
pub fn log_value_at_origin(u: &FunctionHandle) -> f64 {
    let floor = u.support_floor();
    let x0 = if floor > 0.0 {
        floor * (1.0 + 1e-12)
    } else {
        ORIGIN_PROBE
    };
    u.raw_log(x0.max(ORIGIN_PROBE).min(u.range_ceiling()))
}

fn check_origin(u: &FunctionHandle) -> Result<()> {
    let l = log_value_at_origin(u);
    if !(l <= ORIGIN_TOL.ln()) {
        return Err(Error::Precondition(format!(
            "{}: U(0+) = {:.3e} exceeds {ORIGIN_TOL:e}",
            u.name(),
            l.exp()
        )));
    }
    Ok(())
}

/// `U - U(0+)`, which satisfies the origin precondition of the transform.
pub fn anchored(u: &FunctionHandle) -> FunctionHandle {
    let l0 = log_value_at_origin(u);
    if !(l0 > f64::NEG_INFINITY) {
        return u.clone();
    }
    let inner = u.clone();
    let truth = u
        .truth()
        .filter(|t| matches!(t.class, ClassLabel::M { rho } if rho > 0.0) || t.class == ClassLabel::MNegInf)
        .map(|t| KnownTruth::from_class(t.class));
    let br = u.clone();
    FunctionHandle::builder_fallible(format!("{}-anchored", u.name()), move |x| {
        Ok(log_sub(inner.eval_log(x)?, l0))
    })
    .params(u.params().clone())
    .support_floor(u.support_floor())
    .range_ceiling(u.range_ceiling())
    .maybe_truth(truth)
    .breaks(move |lo, hi| br.breakpoints(lo, hi))
    .smooth(u.is_smooth())
    .build()
}

/// `log Û(s)` with `Û(s) = s ∫_0^∞ e^{-xs} U(x) dx`.
pub fn laplace_stieltjes_log(u: &FunctionHandle, s: f64, cfg: &TransformConfig) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Param(format!("transform needs s > 0, got {s}")));
    }
    check_origin(u)?;
    let ls = s.ln();
    let g = |t: f64| ls + t - s * t.exp() + u.raw_log(t.exp());
    let lo = u.support_floor().max(ORIGIN_PROBE).ln();
    let ceiling = u.range_ceiling().ln();

    // coarse scan for the bulk of the integrand
    let mut samples = Vec::new();
    let mut max = f64::NEG_INFINITY;
    let mut t = lo;
    loop {
        let v = g(t);
        if v > max {
            max = v;
        }
        samples.push((t, v));
        let past_peak = v.is_finite() && v < max - cfg.cutoff_nats && t > lo + SCAN_STEP;
        let decaying = s * t.exp() > 1.0;
        if (past_peak && decaying) || t >= ceiling {
            break;
        }
        t = (t + SCAN_STEP).min(ceiling);
    }
    if max == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let first = samples
        .iter()
        .position(|&(_, v)| v > max - cfg.cutoff_nats - LOWER_MARGIN)
        .unwrap_or(0);
    let a = samples[first.saturating_sub(1)].0;
    let b = samples.last().unwrap().0;
    let mut breaks: Vec<f64> = samples[first..].iter().map(|&(t, _)| t).collect();
    breaks.extend(u.breakpoints(a.exp(), b.exp()).into_iter().map(f64::ln));
    breaks.retain(|&t| t > a && t < b);
    breaks.sort_by(f64::total_cmp);
    let q = adaptive_log(&g, a, b, &breaks, cfg.quad_rel_tol, QUAD_BUDGET)?;
    Ok(q.log_value)
}

pub fn laplace_stieltjes(u: &FunctionHandle, s: f64, cfg: &TransformConfig) -> Result<f64> {
    laplace_stieltjes_log(u, s, cfg).map(f64::exp)
}

/// `(s, log Û(s))` over the configured s grid, evaluated in parallel.
pub fn transform_on_grid(u: &FunctionHandle, cfg: &TransformConfig) -> Result<Vec<(f64, f64)>> {
    cfg.validate()?;
    check_origin(u)?;
    cfg.s_grid()
        .into_par_iter()
        .map(|s| laplace_stieltjes_log(u, s, cfg).map(|l| (s, l)))
        .collect()
}

/// `x ↦ Û(1/x)`.
pub fn transform_at_reciprocal(u: &FunctionHandle, cfg: &TransformConfig) -> Result<FunctionHandle> {
    cfg.validate()?;
    check_origin(u)?;
    let inner = u.clone();
    let cfg = *cfg;
    Ok(FunctionHandle::builder_fallible(format!("LS[{}]∘1/x", u.name()), move |x| {
        laplace_stieltjes_log(&inner, 1.0 / x, &cfg)
    })
    .smooth(true)
    .build())
}

/// Fraction of sample triples on which `x^{-eta} U(x)` is concave.
fn concavity_fraction(u: &FunctionHandle, eta: f64, grid: &GridSpec) -> f64 {
    let xs: Vec<f64> = grid.xs().into_iter().step_by(10).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| (u.raw_log(x) - eta * x.ln()).exp()).collect();
    let mut ok = 0usize;
    let mut total = 0usize;
    for i in 1..xs.len().saturating_sub(1) {
        let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
        let chord = ys[i - 1] + (ys[i + 1] - ys[i - 1]) * (x1 - x0) / (x2 - x0);
        if !chord.is_finite() || !ys[i].is_finite() {
            continue;
        }
        total += 1;
        if ys[i] >= chord * (1.0 - 1e-9) {
            ok += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        ok as f64 / total as f64
    }
}

/// Checks that `Û(1/x)` lands in `M(α)` when `U ∈ M(α)`, `α > 0`.
///
/// The concavity of `x^{-η}U(x)` for η on a small grid in `[0, α)` is
/// reported alongside but does not affect `passed`.
pub fn tauberian_check(
    u: &FunctionHandle,
    cfg: &TransformConfig,
    grid: &GridSpec,
    tol: f64,
) -> Result<ConditionReport> {
    let alpha = match classify(u, grid, DEFAULT_TOL)? {
        ClassLabel::M { rho } => rho,
        other => {
            return Err(Error::ClassMismatch {
                expected: "M(alpha), alpha > 0".into(),
                found: other,
            })
        }
    };
    if !(alpha > DEFAULT_TOL) {
        return Err(Error::Precondition(format!("index {alpha:.4} is not positive")));
    }
    check_origin(u)?;
    let h = transform_at_reciprocal(u, cfg)?;
    let label = classify(&h, grid, DEFAULT_TOL)?;
    let found = label.rho();
    let passed = matches!(label, ClassLabel::M { rho } if (rho - alpha).abs() <= tol);

    let etas: Vec<f64> = (0..4).map(|k| alpha * k as f64 / 4.0).collect();
    let fractions: Vec<f64> = etas.iter().map(|&e| concavity_fraction(u, e, grid)).collect();
    let concave: Vec<f64> = etas
        .iter()
        .zip(&fractions)
        .filter(|(_, f)| **f == 1.0)
        .map(|(e, _)| *e)
        .collect();
    let converse = if concave.is_empty() { "Undecided" } else { "Supported" };

    let mut rpt = ConditionReport::new(ConditionId::Tauberian, passed, tol)
        .with("rho_u", alpha)
        .with("rho_transform", found.unwrap_or(f64::NAN))
        .with("concave_eta_count", concave.len() as f64);
    for (e, f) in etas.iter().zip(&fractions) {
        rpt = rpt.with(&format!("concave_fraction_eta_{e:.3}"), *f);
    }
    Ok(rpt.detail(format!("transform class {label}; converse direction {converse}")))
}
