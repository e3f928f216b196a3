//! Karamata-type representations, the cumulative integrals `V_r`, `W_r`
//! and the generalized Karamata theorem checks.

use crate::class::ClassLabel;
use crate::error::{Error, Result};
use crate::ext::log_add;
use crate::fnmodel::{dyadic_level, from_table_named, FunctionHandle, TableData, TableRow, ValueKind};
use crate::grid::{limit_estimate, windowed_limits, GridSpec, IndexEstimate};
use crate::order::{classify, probe_integral_convergence, ConvergenceTag, KappaConfig, DEFAULT_TOL};
use crate::quad::{adaptive_log_lenient, composite_real};
use crate::report::{ConditionId, ConditionReport};
use serde::{Deserialize, Serialize};

/// `|∫_b^x β(t)/t dt|` below this is treated as a vanishing denominator.
pub const DENOM_FLOOR: f64 = 1e-6;
const MAX_B_SHIFTS: usize = 8;
const BETA_PANEL: f64 = 0.25;
const CUMULATIVE_REL_TOL: f64 = 1e-11;
const CUMULATIVE_BUDGET: usize = 2_000;
/// Largest abscissa used for tail integrals.
pub const TAIL_HORIZON: f64 = 1e300;
/// Relative tolerance on the pointwise reconstruction of `log U`.
pub const RECONSTRUCTION_TOL: f64 = 1e-7;

fn require_m(u: &FunctionHandle, grid: &GridSpec) -> Result<f64> {
    match classify(u, grid, DEFAULT_TOL)? {
        ClassLabel::M { rho } => Ok(rho),
        other => Err(Error::ClassMismatch {
            expected: "M".into(),
            found: other,
        }),
    }
}

/// Representation components tabulated on grid points `x >= b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepTable {
    pub xs: Vec<f64>,
    pub log_u: Vec<f64>,
    pub beta: Vec<f64>,
    /// `∫_b^x β(t)/t dt`.
    pub integral: Vec<f64>,
    pub eps: Vec<f64>,
    pub alpha: Vec<f64>,
}

/// `U(x) = exp{α(x) + ε(x) ∫_b^x β(t)/t dt}` with `γ ≡ 0`.
///
/// `β = log U / log x` and, away from index zero, `α ≡ 0` and
/// `ε = log U / ∫_b^x β(t)/t dt`. At index zero the construction goes
/// through `V(x) = x U(x)`: `ε = ε_V` and `α = (ε_V - 1) log x - ε_V log b`.
#[derive(Debug, Clone)]
pub struct RepresentationTriple {
    handle: FunctionHandle,
    /// Effective base point after any shift.
    pub b: f64,
    pub b_requested: f64,
    pub kappa_zero_mode: bool,
    pub rho: f64,
    pub table: RepTable,
}

fn beta_of(u: &FunctionHandle, x: f64) -> f64 {
    u.raw_log(x) / x.ln()
}

impl RepresentationTriple {
    pub fn b_shift(&self) -> f64 {
        self.b - self.b_requested
    }

    pub fn beta(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.handle.eval_log(x)? / x.ln())
    }

    /// `∫_b^x β(t)/t dt`, integrated directly from `b`.
    pub fn integral(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        let breaks: Vec<f64> = self
            .handle
            .breakpoints(self.b, x)
            .into_iter()
            .map(f64::ln)
            .collect();
        let f = |t: f64| beta_of(&self.handle, t.exp());
        Ok(composite_real(&f, self.b.ln(), x.ln(), &breaks, BETA_PANEL).0)
    }

    pub fn eps(&self, x: f64) -> Result<f64> {
        let d = self.integral(x)?;
        let log_u = self.handle.eval_log(x)?;
        Ok(eps_value(log_u, d, x, self.b, self.kappa_zero_mode))
    }

    pub fn alpha(&self, x: f64) -> Result<f64> {
        let e = self.eps(x)?;
        Ok(alpha_value(e, x, self.b, self.kappa_zero_mode))
    }

    fn check(&self, x: f64) -> Result<()> {
        if !(x >= self.b) {
            return Err(Error::Domain(format!(
                "representation defined for x >= {}, got {x}",
                self.b
            )));
        }
        Ok(())
    }
}

fn eps_value(log_u: f64, d: f64, x: f64, b: f64, zero_mode: bool) -> f64 {
    if zero_mode {
        (log_u + x.ln()) / (d + (x / b).ln())
    } else {
        log_u / d
    }
}

fn alpha_value(eps: f64, x: f64, b: f64, zero_mode: bool) -> f64 {
    if zero_mode {
        (eps - 1.0) * x.ln() - eps * b.ln()
    } else {
        0.0
    }
}

/// Denominator of ε: `∫β/t` itself, or its `V = xU` counterpart.
fn denominator(d: f64, x: f64, b: f64, zero_mode: bool) -> f64 {
    if zero_mode {
        d + (x / b).ln()
    } else {
        d
    }
}

struct Pass {
    table: RepTable,
    /// Grid point past which the denominator vanishes again, if any.
    vanishes_at: Option<f64>,
}

fn tabulate(u: &FunctionHandle, b: f64, grid: &GridSpec, zero_mode: bool) -> Result<Pass> {
    let xs: Vec<f64> = grid.xs().into_iter().filter(|&x| x > b).collect();
    let mut table = RepTable {
        xs: Vec::new(),
        log_u: Vec::new(),
        beta: Vec::new(),
        integral: Vec::new(),
        eps: Vec::new(),
        alpha: Vec::new(),
    };
    let f = |t: f64| beta_of(u, t.exp());
    let breaks: Vec<f64> = u
        .breakpoints(b, grid.x_max())
        .into_iter()
        .map(f64::ln)
        .collect();
    let mut d = 0.0;
    let mut prev = b.ln();
    let mut started = false;
    let mut last_sign = 0.0;
    for x in xs {
        let t = x.ln();
        d += composite_real(&f, prev, t, &breaks, BETA_PANEL).0;
        prev = t;
        let den = denominator(d, x, b, zero_mode);
        if !started {
            if den.abs() <= DENOM_FLOOR {
                continue;
            }
            started = true;
            last_sign = den.signum();
        } else if den.abs() <= DENOM_FLOOR || den.signum() != last_sign {
            return Ok(Pass {
                table,
                vanishes_at: Some(x),
            });
        }
        let log_u = u.eval_log(x)?;
        let e = eps_value(log_u, d, x, b, zero_mode);
        table.xs.push(x);
        table.log_u.push(log_u);
        table.beta.push(log_u / t);
        table.integral.push(d);
        table.eps.push(e);
        table.alpha.push(alpha_value(e, x, b, zero_mode));
    }
    Ok(Pass {
        table,
        vanishes_at: None,
    })
}

/// Extracts the representation of a member of `M`.
pub fn extract_representation(u: &FunctionHandle, b: f64, grid: &GridSpec) -> Result<RepresentationTriple> {
    if !(b > 1.0) || !b.is_finite() {
        return Err(Error::Param(format!("representation needs b > 1, got {b}")));
    }
    let rho = require_m(u, grid)?;
    let zero_mode = rho.abs() <= DEFAULT_TOL;
    let mut b_eff = b;
    for _ in 0..=MAX_B_SHIFTS {
        let pass = tabulate(u, b_eff, grid, zero_mode)?;
        match pass.vanishes_at {
            None if !pass.table.xs.is_empty() => {
                return Ok(RepresentationTriple {
                    handle: u.clone(),
                    b: b_eff,
                    b_requested: b,
                    kappa_zero_mode: zero_mode,
                    rho,
                    table: pass.table,
                })
            }
            None => return Err(Error::SingularDenominator { x: grid.x_max() }),
            Some(x) => b_eff = x,
        }
    }
    Err(Error::SingularDenominator { x: b_eff })
}

/// Checks pointwise reconstruction and the limits `α/log x → 0`, `ε → 1`, `β → ρ`.
pub fn verify_representation(
    u: &FunctionHandle,
    rep: &RepresentationTriple,
    grid: &GridSpec,
    tol: f64,
) -> Result<ConditionReport> {
    let t = &rep.table;
    let mut residual: f64 = 0.0;
    for i in 0..t.xs.len() {
        let log_u = u.eval_log(t.xs[i])?;
        let rebuilt = t.alpha[i] + t.eps[i] * t.integral[i];
        residual = residual.max((log_u - rebuilt).abs() / log_u.abs().max(1.0));
    }
    let lnx: Vec<f64> = t.xs.iter().map(|x| x.ln()).collect();
    let a_over: Vec<f64> = t.alpha.iter().zip(&lnx).map(|(a, l)| a / l).collect();
    let beta = windowed_limits(&lnx, &t.beta, grid)?;
    let eps = windowed_limits(&lnx, &t.eps, grid)?;
    let alpha = windowed_limits(&lnx, &a_over, grid)?;
    let dev_beta = (beta.lower.value - rep.rho).abs().max((beta.upper.value - rep.rho).abs());
    let dev_eps = (eps.lower.value - 1.0).abs().max((eps.upper.value - 1.0).abs());
    let dev_alpha = alpha.lower.value.abs().max(alpha.upper.value.abs());
    // independent quadrature of the denominator at the last tabulated point
    let crosscheck = match t.xs.last() {
        Some(&x) => {
            let direct = rep.integral(x)?;
            let tab = *t.integral.last().unwrap();
            (direct - tab).abs() / tab.abs().max(1.0)
        }
        None => f64::NAN,
    };
    let passed = residual <= RECONSTRUCTION_TOL && dev_beta <= tol && dev_eps <= tol && dev_alpha <= tol;
    Ok(ConditionReport::new(ConditionId::RepLimits, passed, tol)
        .with("reconstruction_residual", residual)
        .with("beta_lower", beta.lower.value)
        .with("beta_upper", beta.upper.value)
        .with("eps_lower", eps.lower.value)
        .with("eps_upper", eps.upper.value)
        .with("alpha_over_log_lower", alpha.lower.value)
        .with("alpha_over_log_upper", alpha.upper.value)
        .with("rho", rep.rho)
        .with("b_effective", rep.b)
        .with("b_shift", rep.b_shift())
        .with("kappa_zero_mode", if rep.kappa_zero_mode { 1.0 } else { 0.0 })
        .with("integral_crosscheck", crosscheck))
}

/// `U = exp(-α)` (rapid decay) or `U = exp(α)` (rapid growth) with `α/log x → ∞`.
#[derive(Debug, Clone)]
pub struct InfRepresentation {
    handle: FunctionHandle,
    pub b: f64,
    pub class: ClassLabel,
}

impl InfRepresentation {
    pub fn alpha(&self, x: f64) -> Result<f64> {
        let l = self.handle.eval_log(x)?;
        Ok(match self.class {
            ClassLabel::MInf => -l,
            _ => l,
        })
    }
}

pub fn extract_representation_inf(u: &FunctionHandle, b: f64, grid: &GridSpec) -> Result<InfRepresentation> {
    if !(b > 1.0) || !b.is_finite() {
        return Err(Error::Param(format!("representation needs b > 1, got {b}")));
    }
    match classify(u, grid, DEFAULT_TOL)? {
        class @ (ClassLabel::MInf | ClassLabel::MNegInf) => Ok(InfRepresentation {
            handle: u.clone(),
            b,
            class,
        }),
        other => Err(Error::ClassMismatch {
            expected: "MInf or MNegInf".into(),
            found: other,
        }),
    }
}

/// Checks `α(x)/log x → ∞`: the value at the grid end must exceed the
/// grid's infinity threshold.
pub fn verify_representation_inf(rep: &InfRepresentation, grid: &GridSpec) -> Result<ConditionReport> {
    let xs: Vec<f64> = grid.xs().into_iter().filter(|&x| x >= rep.b).collect();
    let mut lnx = Vec::with_capacity(xs.len());
    let mut v = Vec::with_capacity(xs.len());
    for x in xs {
        lnx.push(x.ln());
        v.push(rep.alpha(x)? / x.ln());
    }
    let at_end = *v.last().ok_or_else(|| Error::Domain("empty grid above b".into()))?;
    let w = windowed_limits(&lnx, &v, grid)?;
    let passed = at_end > grid.inf_threshold && w.lower.value == f64::INFINITY;
    Ok(ConditionReport::new(ConditionId::RepInf, passed, grid.inf_threshold)
        .with("alpha_over_log_at_end", at_end)
        .with("alpha_over_log_limit", w.lower.value)
        .detail(rep.class.tag()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CumulativeKind {
    /// `∫_b^x t^r U(t) dt`
    V,
    /// `∫_x^∞ t^r U(t) dt`
    W,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CumulativeIntegral {
    pub kind: CumulativeKind,
    pub r: f64,
    pub b: f64,
    pub xs: Vec<f64>,
    /// Logarithms of the integral at `xs`.
    pub log_values: Vec<f64>,
}

impl CumulativeIntegral {
    /// Log-log interpolating handle over the tabulated range.
    pub fn to_handle(&self) -> Result<FunctionHandle> {
        let rows = self
            .xs
            .iter()
            .zip(&self.log_values)
            .filter(|(_, v)| v.is_finite())
            .map(|(&x, &v)| TableRow {
                x,
                kind: ValueKind::Log,
                v,
            })
            .collect();
        let name = match self.kind {
            CumulativeKind::V => format!("V_{}", self.r),
            CumulativeKind::W => format!("W_{}", self.r),
        };
        from_table_named(&name, &TableData { rows })
    }
}

fn tail_integrand(u: &FunctionHandle, r: f64) -> impl Fn(f64) -> f64 + '_ {
    move |t: f64| (r + 1.0) * t + u.raw_log(t.exp())
}

fn log_breaks(u: &FunctionHandle, lo: f64, hi: f64) -> Vec<f64> {
    u.breakpoints(lo, hi).into_iter().map(f64::ln).collect()
}

/// `V_r` or `W_r` in log space on the grid points above `b`.
pub fn cumulative_integral(
    u: &FunctionHandle,
    kind: CumulativeKind,
    r: f64,
    b: f64,
    grid: &GridSpec,
) -> Result<CumulativeIntegral> {
    grid.validate()?;
    if !(b > 0.0) || !b.is_finite() || !r.is_finite() {
        return Err(Error::Param(format!("cumulative integral needs b > 0, finite r (b = {b}, r = {r})")));
    }
    if b <= u.support_floor() {
        return Err(Error::Domain(format!("b = {b} at or below the support floor")));
    }
    let xs: Vec<f64> = grid.xs().into_iter().filter(|&x| x > b).collect();
    let g = tail_integrand(u, r);
    let piece = |lo: f64, hi: f64| {
        let br = log_breaks(u, lo, hi);
        adaptive_log_lenient(&g, lo.ln(), hi.ln(), &br, CUMULATIVE_REL_TOL, CUMULATIVE_BUDGET).log_value
    };
    let mut log_values = Vec::with_capacity(xs.len());
    match kind {
        CumulativeKind::V => {
            let mut acc = f64::NEG_INFINITY;
            let mut prev = b;
            for &x in &xs {
                acc = log_add(acc, piece(prev, x));
                log_values.push(acc);
                prev = x;
            }
        }
        CumulativeKind::W => {
            let probe = KappaConfig::default().probe;
            if probe_integral_convergence(u, r + 1.0, &probe)?.tag != ConvergenceTag::Convergent {
                return Err(Error::DivergentTail { r });
            }
            let top = TAIL_HORIZON.min(u.range_ceiling());
            let last = *xs.last().ok_or_else(|| Error::Domain("empty grid above b".into()))?;
            let mut acc = if top > last { piece(last, top) } else { f64::NEG_INFINITY };
            // beyond the horizon, continue the local power law of the integrand
            let (t1, t0) = (top.ln(), top.ln() - 1.0);
            let slope = g(t1) - g(t0);
            if slope < 0.0 && g(t1).is_finite() {
                acc = log_add(acc, g(t1) - (-slope).ln());
            }
            let mut rev = vec![acc];
            for w in xs.windows(2).rev() {
                acc = log_add(acc, piece(w[0], w[1]));
                rev.push(acc);
            }
            rev.reverse();
            log_values = rev;
        }
    }
    Ok(CumulativeIntegral {
        kind,
        r,
        b,
        xs,
        log_values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// Uses `∫_b^x t^{r-1} U`.
    Lower,
    /// Uses `∫_x^∞ t^{r-1} U`.
    Upper,
}

fn side_integral(u: &FunctionHandle, r: f64, b: f64, kind: CumulativeKind, grid: &GridSpec) -> Result<CumulativeIntegral> {
    cumulative_integral(u, kind, r - 1.0, b, grid).map_err(|e| match e {
        Error::DivergentTail { .. } => Error::DivergentTail { r },
        other => other,
    })
}

fn limit_of_integral(c: &CumulativeIntegral, grid: &GridSpec) -> Result<IndexEstimate> {
    let lnx: Vec<f64> = c.xs.iter().map(|x| x.ln()).collect();
    let v: Vec<f64> = c.log_values.iter().zip(&lnx).map(|(l, t)| l / t).collect();
    limit_estimate(&lnx, &v, grid)
}

fn condition_of_integral(
    u: &FunctionHandle,
    c: &CumulativeIntegral,
    which: Condition,
    r: f64,
    grid: &GridSpec,
    tol: f64,
) -> Result<ConditionReport> {
    let mut lnx = Vec::with_capacity(c.xs.len());
    let mut v = Vec::with_capacity(c.xs.len());
    for (&x, &l) in c.xs.iter().zip(&c.log_values) {
        let t = x.ln();
        lnx.push(t);
        v.push((l - u.eval_log(x)?) / t);
    }
    let est = limit_estimate(&lnx, &v, grid)?;
    let dev = (est.value - r).abs();
    let id = match which {
        Condition::C1r => ConditionId::C1r,
        Condition::C2r => ConditionId::C2r,
    };
    Ok(ConditionReport::new(id, dev <= tol && est.spread <= 2.0 * tol, tol)
        .with("r", r)
        .with("limit", est.value)
        .with("spread", est.spread))
}

/// Limit of `log(∫ t^{r-1} U) / log x` for the chosen side.
pub fn karamata_limit(u: &FunctionHandle, r: f64, b: f64, side: Side, grid: &GridSpec) -> Result<IndexEstimate> {
    let kind = match side {
        Side::Lower => CumulativeKind::V,
        Side::Upper => CumulativeKind::W,
    };
    limit_of_integral(&side_integral(u, r, b, kind, grid)?, grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    C1r,
    C2r,
}

fn condition_kind(which: Condition) -> CumulativeKind {
    match which {
        Condition::C1r => CumulativeKind::V,
        Condition::C2r => CumulativeKind::W,
    }
}

/// Limit of `(log ∫ t^{r-1}U - log U(x)) / log x`, compared with `r`.
pub fn check_condition(
    u: &FunctionHandle,
    which: Condition,
    r: f64,
    b: f64,
    grid: &GridSpec,
    tol: f64,
) -> Result<ConditionReport> {
    let c = side_integral(u, r, b, condition_kind(which), grid)?;
    condition_of_integral(u, &c, which, r, grid, tol)
}

/// Runs the branch of the generalized Karamata theorem selected by the sign of `ρ + r`.
pub fn karamata_theorem_report(
    u: &FunctionHandle,
    r: f64,
    b: f64,
    grid: &GridSpec,
    tol: f64,
) -> Result<ConditionReport> {
    let rho = require_m(u, grid)?;
    let s = rho + r;
    let (id, cond) = if s.abs() <= tol {
        (ConditionId::K3, Condition::C1r)
    } else if s > 0.0 {
        (ConditionId::K1, Condition::C1r)
    } else {
        (ConditionId::K2, Condition::C2r)
    };
    let integral = side_integral(u, r, b, condition_kind(cond), grid)?;
    let lim = limit_of_integral(&integral, grid)?;
    let c = condition_of_integral(u, &integral, cond, r, grid, tol)?;
    let target = if id == ConditionId::K3 { 0.0 } else { s };
    let limit_ok = (lim.value - target).abs() <= tol;
    let cond_limit = c.get("limit").unwrap_or(f64::NAN);
    Ok(ConditionReport::new(id, limit_ok && c.passed, tol)
        .with("rho", rho)
        .with("r", r)
        .with("rho_plus_r", s)
        .with("integral_limit", lim.value)
        .with("condition_limit", cond_limit)
        .detail(format!(
            "{id}: integral limit {} and {} {}",
            if limit_ok { "holds" } else { "fails" },
            c.condition,
            if c.passed { "holds" } else { "fails" }
        )))
}

/// Closed form of `∫_{2^a}^x F̄(t) dt` for the Peter-and-Paul tail.
pub fn peter_paul_partial_integral(x: f64, a: u32) -> Result<f64> {
    if !(x >= 2.0) || !x.is_finite() {
        return Err(Error::Param(format!("x must be finite and >= 2, got {x}")));
    }
    let n = dyadic_level(x);
    if a as i32 >= n {
        return Err(Error::Param(format!("need 2^a < 2^n <= x, got a = {a}, n = {n}")));
    }
    Ok((n - a as i32) as f64 + x * 2f64.powi(-n) - 1.0)
}
