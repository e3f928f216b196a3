//! Lower/upper orders, classification, the index κ and RV ratio tests.

use crate::class::ClassLabel;
use crate::error::{Error, Result};
use crate::ext::log_add;
use crate::fnmodel::FunctionHandle;
use crate::grid::{sample, windowed_limits, GridSpec, IndexEstimate, Trend};
use crate::quad::composite_log;
use crate::report::{ConditionId, ConditionReport};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Default classification tolerance.
pub const DEFAULT_TOL: f64 = 0.05;

/// `log U(x) / log x` on the grid, as `(log x, ratio)` pairs.
pub fn order_series(u: &FunctionHandle, grid: &GridSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    grid.validate()?;
    sample(grid, |x| Ok(u.eval_log(x)? / x.ln()))
}

/// Estimates of the lower order μ and upper order ν.
pub fn estimate_orders(u: &FunctionHandle, grid: &GridSpec) -> Result<(IndexEstimate, IndexEstimate)> {
    let (lnx, r) = order_series(u, grid)?;
    let w = windowed_limits(&lnx, &r, grid)?;
    Ok((w.lower, w.upper))
}

/// Classification together with the order estimates it was derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Classification {
    pub label: ClassLabel,
    pub mu: IndexEstimate,
    pub nu: IndexEstimate,
}

/// Label from windowed order estimates.
///
/// A finite gap wider than `tol` only counts as oscillation when both order
/// estimates are stable across windows; a drifting window extreme means the
/// horizon is too short to tell, and the label is `Undecided`. A swing
/// between a finite order and the infinity threshold inside the newest
/// window is read as oscillation.
pub fn label_from_orders(mu: &IndexEstimate, nu: &IndexEstimate, windows: usize, tol: f64) -> ClassLabel {
    let (m, n) = (mu.value, nu.value);
    if n == f64::NEG_INFINITY {
        return ClassLabel::MInf;
    }
    if m == f64::INFINITY {
        return ClassLabel::MNegInf;
    }
    if m.is_finite() && n.is_finite() && n - m <= tol {
        return ClassLabel::M { rho: 0.5 * (m + n) };
    }
    let one_infinite = m.is_infinite() != n.is_infinite();
    if one_infinite || (windows >= 2 && mu.spread <= tol && nu.spread <= tol) {
        ClassLabel::Oscillating { mu: m, nu: n }
    } else {
        ClassLabel::Undecided
    }
}

pub fn classify_detailed(u: &FunctionHandle, grid: &GridSpec, tol: f64) -> Result<Classification> {
    if !(tol > 0.0) {
        return Err(Error::Param(format!("tolerance must be positive, got {tol}")));
    }
    let (lnx, r) = order_series(u, grid)?;
    let w = windowed_limits(&lnx, &r, grid)?;
    let label = label_from_orders(&w.lower, &w.upper, w.window_gaps.len(), tol);
    Ok(Classification {
        label,
        mu: w.lower,
        nu: w.upper,
    })
}

pub fn classify(u: &FunctionHandle, grid: &GridSpec, tol: f64) -> Result<ClassLabel> {
    classify_detailed(u, grid, tol).map(|c| c.label)
}

/// Outcome of an improper-integral probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvergenceTag {
    Convergent,
    Divergent,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceVerdict {
    pub tag: ConvergenceTag,
    /// `(log10 T, log I(T))` at doubling truncations.
    pub trace: Vec<(f64, f64)>,
    /// Fitted growth rate of `log2` of the per-doubling increments.
    pub slope: f64,
}

/// Slope magnitude below which a probe is Undecided.
pub const PROBE_DEADBAND: f64 = 5e-4;
const PROBE_PANEL: f64 = 0.25;

fn lsq_slope(ks: &[f64], ys: &[f64]) -> f64 {
    let n = ks.len() as f64;
    let scale = ys.iter().fold(1.0f64, |m, y| m.max(y.abs()));
    let km = ks.iter().sum::<f64>() / n;
    let ym = ys.iter().map(|y| y / scale).sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (k, y) in ks.iter().zip(ys) {
        sxy += (k - km) * (y / scale - ym);
        sxx += (k - km) * (k - km);
    }
    sxy / sxx * scale
}

/// Largest usable truncation for a probe over `grid`.
fn probe_horizon(u: &FunctionHandle, grid: &GridSpec) -> f64 {
    grid.x_max().min(u.range_ceiling())
}

/// Probes convergence of `∫_1^∞ x^{r-1} U(x) dx`.
///
/// Functions whose support starts above 1 are integrated from the first
/// power of 2 inside the support.
/// Increments over `[2^{k-1}, 2^k]` are integrated in `log x`. For
/// `U ≈ x^ρ` their base-2 logarithms grow like `(r + ρ) k`, so the fitted
/// slope over the newest half of the doublings decides the verdict.
pub fn probe_integral_convergence(u: &FunctionHandle, r: f64, grid: &GridSpec) -> Result<ConvergenceVerdict> {
    if !r.is_finite() {
        return Err(Error::Param(format!("probe exponent must be finite, got {r}")));
    }
    let top = probe_horizon(u, grid);
    let floor = u.support_floor();
    if !(floor.is_finite()) {
        return Err(Error::Domain(format!("{}: no finite support floor", u.name())));
    }
    // convergence is a tail property, so a function defined only above some
    // point is probed from the first doubling inside its domain
    let k0 = if floor < 1.0 { 0 } else { floor.log2().floor() as i32 + 1 };
    let kmax = top.log2().floor() as i32;
    if kmax - k0 < 4 {
        return Err(Error::Domain("probe needs at least 4 doublings".into()));
    }
    let g = |t: f64| r * t + u.raw_log(t.exp());
    let breaks: Vec<f64> = u
        .breakpoints(2f64.powi(k0), 2f64.powi(kmax))
        .into_iter()
        .map(f64::ln)
        .collect();
    let mut trace = Vec::with_capacity((kmax - k0) as usize + 1);
    let mut incs = Vec::with_capacity((kmax - k0) as usize);
    let mut total = f64::NEG_INFINITY;
    trace.push((k0 as f64 * LN_2 / std::f64::consts::LN_10, total));
    for k in k0 + 1..=kmax {
        let a = (k - 1) as f64 * LN_2;
        let b = k as f64 * LN_2;
        let q = composite_log(&g, a, b, &breaks, PROBE_PANEL);
        if q.log_value.is_nan() {
            return Err(Error::Domain(format!(
                "{}: integrand undefined on [2^{}, 2^{k}]",
                u.name(),
                k - 1
            )));
        }
        total = log_add(total, q.log_value);
        trace.push((k as f64 * LN_2 / std::f64::consts::LN_10, total));
        incs.push(q.log_value / LN_2);
    }
    let start = incs.len() / 2;
    let tail = &incs[start..];
    let ks: Vec<f64> = (start..incs.len()).map(|k| (k as i32 + k0) as f64).collect();
    let slope = if tail.iter().all(|v| *v == f64::NEG_INFINITY) {
        f64::NEG_INFINITY
    } else if tail.iter().any(|v| !v.is_finite()) {
        // increments underflowing to exactly zero: decay beyond any rate
        if tail.last().copied() == Some(f64::NEG_INFINITY) {
            f64::NEG_INFINITY
        } else {
            f64::NAN
        }
    } else {
        lsq_slope(&ks, tail)
    };
    let tag = if slope < -PROBE_DEADBAND {
        ConvergenceTag::Convergent
    } else if slope > PROBE_DEADBAND {
        ConvergenceTag::Divergent
    } else {
        ConvergenceTag::Undecided
    };
    Ok(ConvergenceVerdict { tag, trace, slope })
}

/// Configuration for [`estimate_kappa`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaConfig {
    pub r_lo: f64,
    pub r_hi: f64,
    pub bisect_tol: f64,
    pub probe: GridSpec,
    pub inf_threshold: f64,
}

impl Default for KappaConfig {
    fn default() -> Self {
        KappaConfig {
            r_lo: -64.0,
            r_hi: 64.0,
            bisect_tol: 0.01,
            probe: GridSpec::new(0.0, 300.0),
            inf_threshold: 100.0,
        }
    }
}

impl KappaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_lo < self.r_hi) || !self.r_lo.is_finite() || !self.r_hi.is_finite() {
            return Err(Error::Param("kappa bracket needs r_lo < r_hi".into()));
        }
        if !(self.bisect_tol > 0.0) {
            return Err(Error::Param("bisect_tol must be positive".into()));
        }
        if !(self.probe.x_max() >= 16.0) {
            return Err(Error::Param("probe grid must reach x = 16".into()));
        }
        Ok(())
    }
}

/// One probe made during κ estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaProbe {
    pub r: f64,
    pub tag: ConvergenceTag,
    #[serde(with = "crate::ext")]
    pub last_log_partial: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaEstimate {
    pub estimate: IndexEstimate,
    pub trace: Vec<KappaProbe>,
}

/// Estimates `κ_U = sup{r : ∫_1^∞ x^{r-1} U(x) dx < ∞}` by bisection.
pub fn estimate_kappa(u: &FunctionHandle, cfg: &KappaConfig) -> Result<IndexEstimate> {
    estimate_kappa_traced(u, cfg).map(|k| k.estimate)
}

pub fn estimate_kappa_traced(u: &FunctionHandle, cfg: &KappaConfig) -> Result<KappaEstimate> {
    cfg.validate()?;
    let mut trace = Vec::new();
    let mut probe = |r: f64| -> Result<ConvergenceTag> {
        let v = probe_integral_convergence(u, r, &cfg.probe)?;
        trace.push(KappaProbe {
            r,
            tag: v.tag,
            last_log_partial: v.trace.last().map(|t| t.1).unwrap_or(f64::NEG_INFINITY),
        });
        Ok(v.tag)
    };
    let done = |value: f64, trace: Vec<KappaProbe>, spread: f64| KappaEstimate {
        estimate: IndexEstimate {
            value,
            raw: value,
            spread,
            trend: Trend::Stable,
            grid: cfg.probe,
        },
        trace,
    };
    match probe(cfg.r_hi)? {
        ConvergenceTag::Convergent => return Ok(done(f64::INFINITY, trace, 0.0)),
        ConvergenceTag::Undecided => return Err(Error::UndecidedConvergence { r: cfg.r_hi }),
        ConvergenceTag::Divergent => {}
    }
    match probe(cfg.r_lo)? {
        ConvergenceTag::Divergent => return Ok(done(f64::NEG_INFINITY, trace, 0.0)),
        ConvergenceTag::Undecided => return Err(Error::UndecidedConvergence { r: cfg.r_lo }),
        ConvergenceTag::Convergent => {}
    }
    let (mut lo, mut hi) = (cfg.r_lo, cfg.r_hi);
    while hi - lo > cfg.bisect_tol {
        let mid = 0.5 * (lo + hi);
        match probe(mid)? {
            ConvergenceTag::Convergent => lo = mid,
            ConvergenceTag::Divergent => hi = mid,
            ConvergenceTag::Undecided => return Ok(done(mid, trace, hi - lo)),
        }
    }
    Ok(done(0.5 * (lo + hi), trace, hi - lo))
}

/// Checks `κ_U = -ρ_U` for a member of `M`.
pub fn check_second_characterization(
    u: &FunctionHandle,
    grid: &GridSpec,
    cfg: &KappaConfig,
) -> Result<ConditionReport> {
    let label = classify(u, grid, DEFAULT_TOL)?;
    let rho = match label {
        ClassLabel::M { rho } => rho,
        other => {
            return Err(Error::ClassMismatch {
                expected: "M".into(),
                found: other,
            })
        }
    };
    let kappa = estimate_kappa(u, cfg)?.value;
    let tol = cfg.bisect_tol + DEFAULT_TOL;
    let dev = (kappa + rho).abs();
    Ok(ConditionReport::new(ConditionId::KappaRho, dev <= tol, tol)
        .with("kappa", kappa)
        .with("rho", rho)
        .with("abs_kappa_plus_rho", dev))
}

/// Verdict of [`rv_ratio_test`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag")]
pub enum RvVerdict {
    IsRv { rho: f64 },
    NotRv { witness_t: f64 },
}

/// Tests `U(xt)/U(x) -> t^ρ` for each supplied `t`.
pub fn rv_ratio_test(
    u: &FunctionHandle,
    t_values: &[f64],
    grid: &GridSpec,
    tol: f64,
) -> Result<(RvVerdict, ConditionReport)> {
    grid.validate()?;
    if t_values.is_empty() {
        return Err(Error::Param("rv_ratio_test needs at least one t".into()));
    }
    if let Some(t) = t_values.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
        return Err(Error::Param(format!("ratio points must be positive, got {t}")));
    }
    let ceiling = u.range_ceiling();
    let mut report = ConditionReport::new(ConditionId::RvRatio, true, tol);
    let mut rhos = Vec::new();
    let mut witness = None;
    for &t in t_values {
        let mut lnx = Vec::new();
        let mut d = Vec::new();
        for x in grid.xs() {
            if x * t > ceiling || x * t <= u.support_floor() {
                continue;
            }
            lnx.push(x.ln());
            d.push(u.eval_log(x * t)? - u.eval_log(x)?);
        }
        let w = windowed_limits(&lnx, &d, grid)?;
        report = report
            .with(format!("log_ratio_lower@t={t}"), w.lower.value)
            .with(format!("log_ratio_upper@t={t}"), w.upper.value);
        let stable = w.lower.value.is_finite()
            && w.upper.value.is_finite()
            && w.upper.value - w.lower.value <= tol * t.ln().abs().max(1.0);
        if !stable {
            witness.get_or_insert(t);
            continue;
        }
        if t != 1.0 {
            rhos.push((t, 0.5 * (w.lower.value + w.upper.value) / t.ln()));
        }
    }
    if witness.is_none() && !rhos.is_empty() {
        let r0 = rhos[0].1;
        if let Some((t, _)) = rhos.iter().find(|(_, r)| (r - r0).abs() > tol) {
            witness = Some(*t);
        }
    }
    let verdict = match witness {
        Some(t) => RvVerdict::NotRv { witness_t: t },
        None if rhos.is_empty() => RvVerdict::NotRv { witness_t: 1.0 },
        None => RvVerdict::IsRv {
            rho: rhos.iter().map(|r| r.1).sum::<f64>() / rhos.len() as f64,
        },
    };
    report.passed = matches!(verdict, RvVerdict::IsRv { .. });
    report = match verdict {
        RvVerdict::IsRv { rho } => report.with("rho", rho).detail("IsRV"),
        RvVerdict::NotRv { witness_t } => report.with("witness_t", witness_t).detail("NotRV"),
    };
    Ok((verdict, report))
}

/// `log U(x) / log x` at the spike midpoints `n + n^{-n}/2` of `remark7_mix`.
///
/// Grid sampling misses these intervals, which is why the grid classifies the
/// function as rapidly decaying even though `κ = ∞` holds without membership
/// in the rapidly decaying class.
pub fn remark7_targeted_probe(u: &FunctionHandle, ns: &[u32]) -> Result<Vec<(f64, f64)>> {
    ns.iter()
        .map(|&n| {
            let nf = n as f64;
            let x = nf + 0.5 * nf.powf(-nf);
            Ok((x, u.eval_log(x)? / x.ln()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fnmodel::*;

    fn g() -> GridSpec {
        GridSpec::default()
    }

    #[test]
    fn power_orders_exact() {
        let (mu, nu) = estimate_orders(&make_power_tail(-2.0), &g()).unwrap();
        assert!((mu.value + 2.0).abs() < 1e-9 && (nu.value + 2.0).abs() < 1e-9);
        assert_eq!(mu.trend, Trend::Stable);
    }

    #[test]
    fn classify_basic() {
        assert_eq!(classify(&make_exp_neg(1.0).unwrap(), &g(), 0.05).unwrap(), ClassLabel::MInf);
        assert_eq!(classify(&make_exp_pos(1.0).unwrap(), &g(), 0.05).unwrap(), ClassLabel::MNegInf);
        let pp = classify(&make_peter_paul(), &g(), 0.05).unwrap();
        assert!(pp.agrees_with(&ClassLabel::M { rho: -1.0 }, 0.05), "{pp}");
        let s = classify(&make_two_plus_sin(), &g(), 0.05).unwrap();
        assert!(s.agrees_with(&ClassLabel::M { rho: 0.0 }, 0.05), "{s}");
    }

    #[test]
    fn classify_oscillating() {
        let c = classify(&make_x_pow_sin_x(), &g(), 0.05).unwrap();
        assert!(
            c.agrees_with(&ClassLabel::Oscillating { mu: -1.0, nu: 1.0 }, 0.05),
            "{c}"
        );
        let o = classify(&make_oset_geometric(1.0, 0.0, 2.0).unwrap(), &g(), 0.05).unwrap();
        assert!(o.agrees_with(&ClassLabel::Oscillating { mu: 0.5, nu: 1.0 }, 0.05), "{o}");
    }

    #[test]
    fn tie_is_m() {
        let mu = IndexEstimate::exact(0.0, g());
        let nu = IndexEstimate::exact(0.05, g());
        assert_eq!(
            label_from_orders(&mu, &nu, 3, 0.05),
            ClassLabel::M { rho: 0.025 }
        );
    }

    #[test]
    fn probe_power() {
        let kc = KappaConfig::default();
        let u = make_power_tail(-2.0);
        assert_eq!(probe_integral_convergence(&u, 1.0, &kc.probe).unwrap().tag, ConvergenceTag::Convergent);
        assert_eq!(probe_integral_convergence(&u, 3.0, &kc.probe).unwrap().tag, ConvergenceTag::Divergent);
    }

    #[test]
    fn probe_trace_is_increasing() {
        let v = probe_integral_convergence(&make_power_tail(-0.5), 0.0, &GridSpec::new(0.0, 10.0)).unwrap();
        assert!(v.trace.len() >= 5);
        assert!(v.trace.windows(2).all(|w| w[1].0 > w[0].0));
    }

    #[test]
    fn kappa_power_and_infinite() {
        let kc = KappaConfig::default();
        let k = estimate_kappa(&make_power_tail(-2.0), &kc).unwrap();
        assert!((k.value - 2.0).abs() <= 0.01, "{k:?}");
        assert_eq!(estimate_kappa(&make_exp_neg(1.0).unwrap(), &kc).unwrap().value, f64::INFINITY);
        assert_eq!(estimate_kappa(&make_exp_pos(1.0).unwrap(), &kc).unwrap().value, f64::NEG_INFINITY);
    }

    #[test]
    fn second_characterization() {
        let kc = KappaConfig::default();
        assert!(check_second_characterization(&make_power_tail(3.0), &g(), &kc).unwrap().passed);
        assert!(matches!(
            check_second_characterization(&make_exp_neg(1.0).unwrap(), &g(), &kc),
            Err(Error::ClassMismatch { .. })
        ));
    }

    #[test]
    fn rv_ratios() {
        let (v, r) = rv_ratio_test(&make_power_tail(-2.0), &[2.0, 5.0, 10.0], &g(), 0.05).unwrap();
        assert!(r.passed);
        match v {
            RvVerdict::IsRv { rho } => assert!((rho + 2.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        let (v, _) = rv_ratio_test(&make_peter_paul(), &[3.0], &g(), 0.05).unwrap();
        assert_eq!(v, RvVerdict::NotRv { witness_t: 3.0 });
        let (v, _) = rv_ratio_test(&make_two_plus_sin(), &[2.0], &g(), 0.05).unwrap();
        assert!(matches!(v, RvVerdict::NotRv { .. }));
    }

    #[test]
    fn remark7_probe() {
        let u = make_remark7_mix();
        for (_, r) in remark7_targeted_probe(&u, &[2, 3, 4]).unwrap() {
            assert!((r + 1.0).abs() < 1e-12);
        }
    }
}
