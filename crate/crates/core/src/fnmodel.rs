//! Evaluable positive functions on `(0, ∞)` and the built-in corpus.
//!
//! Every handle evaluates `log U(x)` rather than `U(x)`: members of the
//! rapidly growing or decaying classes leave the `f64` range long before
//! the horizons used by the estimators.

use crate::class::ClassLabel;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{E, LN_2};
use std::fmt;
use std::sync::Arc;

type LogFn = dyn Fn(f64) -> Result<f64> + Send + Sync;
type BreakFn = dyn Fn(f64, f64) -> Vec<f64> + Send + Sync;
type QuantileFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Ground truth attached to corpus members.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnownTruth {
    #[serde(with = "crate::ext::option")]
    pub rho: Option<f64>,
    #[serde(with = "crate::ext::option")]
    pub kappa: Option<f64>,
    #[serde(with = "crate::ext::option")]
    pub mu: Option<f64>,
    #[serde(with = "crate::ext::option")]
    pub nu: Option<f64>,
    pub class: ClassLabel,
    /// Survival function: non-increasing with values in `(0, 1]`.
    pub is_tail: bool,
}

impl KnownTruth {
    /// Truth for a member of `M` with index `rho`.
    pub fn m(rho: f64, is_tail: bool) -> Self {
        KnownTruth {
            rho: Some(rho),
            kappa: Some(-rho),
            mu: Some(rho),
            nu: Some(rho),
            class: ClassLabel::M { rho },
            is_tail,
        }
    }

    pub fn from_class(class: ClassLabel) -> Self {
        match class {
            ClassLabel::M { rho } => Self::m(rho, false),
            ClassLabel::MInf => KnownTruth {
                rho: None,
                kappa: Some(f64::INFINITY),
                mu: Some(f64::NEG_INFINITY),
                nu: Some(f64::NEG_INFINITY),
                class,
                is_tail: false,
            },
            ClassLabel::MNegInf => KnownTruth {
                rho: None,
                kappa: Some(f64::NEG_INFINITY),
                mu: Some(f64::INFINITY),
                nu: Some(f64::INFINITY),
                class,
                is_tail: false,
            },
            ClassLabel::Oscillating { mu, nu } => KnownTruth {
                rho: None,
                kappa: Some(-nu),
                mu: Some(mu),
                nu: Some(nu),
                class,
                is_tail: false,
            },
            ClassLabel::Undecided => KnownTruth {
                rho: None,
                kappa: None,
                mu: None,
                nu: None,
                class,
                is_tail: false,
            },
        }
    }

    fn tail(mut self, is_tail: bool) -> Self {
        self.is_tail = is_tail;
        self
    }
}

struct Inner {
    name: String,
    params: BTreeMap<String, f64>,
    log_eval: Box<LogFn>,
    support_floor: f64,
    range_ceiling: f64,
    truth: Option<KnownTruth>,
    breaks: Option<Box<BreakFn>>,
    smooth: bool,
    quantile: Option<Box<QuantileFn>>,
}

/// An immutable, shareable positive function evaluated in log space.
#[derive(Clone)]
pub struct FunctionHandle {
    inner: Arc<Inner>,
}

impl fmt::Debug for FunctionHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionHandle")
            .field("name", &self.inner.name)
            .field("params", &self.inner.params)
            .field("support_floor", &self.inner.support_floor)
            .field("truth", &self.inner.truth)
            .finish()
    }
}

/// Builder for [`FunctionHandle`].
pub struct HandleBuilder {
    inner: Inner,
}

impl HandleBuilder {
    pub fn params(mut self, params: BTreeMap<String, f64>) -> Self {
        self.inner.params = params;
        self
    }

    pub fn support_floor(mut self, floor: f64) -> Self {
        self.inner.support_floor = floor;
        self
    }

    /// Largest admissible abscissa (tabulated data only).
    pub fn range_ceiling(mut self, ceiling: f64) -> Self {
        self.inner.range_ceiling = ceiling;
        self
    }

    pub fn truth(mut self, truth: KnownTruth) -> Self {
        self.inner.truth = Some(truth);
        self
    }

    pub fn maybe_truth(mut self, truth: Option<KnownTruth>) -> Self {
        self.inner.truth = truth;
        self
    }

    /// Points in `(lo, hi)` where the function may jump or kink.
    pub fn breaks(mut self, f: impl Fn(f64, f64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.inner.breaks = Some(Box::new(f));
        self
    }

    /// Mark the function as twice differentiable on `(support_floor, ∞)`
    /// apart from its declared breakpoints at small `x`.
    pub fn smooth(mut self, smooth: bool) -> Self {
        self.inner.smooth = smooth;
        self
    }

    /// Left endpoint of `{x : U(x) <= u}` for tails.
    pub fn quantile(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.inner.quantile = Some(Box::new(f));
        self
    }

    pub fn build(self) -> FunctionHandle {
        FunctionHandle {
            inner: Arc::new(self.inner),
        }
    }
}

impl FunctionHandle {
    /// Starts a handle from a log-space evaluator.
    pub fn builder(
        name: impl Into<String>,
        log_eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> HandleBuilder {
        Self::builder_fallible(name, move |x| Ok(log_eval(x)))
    }

    /// Like [`FunctionHandle::builder`] for evaluators that can fail.
    pub fn builder_fallible(
        name: impl Into<String>,
        log_eval: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
    ) -> HandleBuilder {
        HandleBuilder {
            inner: Inner {
                name: name.into(),
                params: BTreeMap::new(),
                log_eval: Box::new(log_eval),
                support_floor: 0.0,
                range_ceiling: f64::INFINITY,
                truth: None,
                breaks: None,
                smooth: false,
                quantile: None,
            },
        }
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.inner.params
    }

    pub fn support_floor(&self) -> f64 {
        self.inner.support_floor
    }

    pub fn range_ceiling(&self) -> f64 {
        self.inner.range_ceiling
    }

    pub fn truth(&self) -> Option<&KnownTruth> {
        self.inner.truth.as_ref()
    }

    /// Truth label, or `Undecided` when the handle carries no truth.
    pub fn label(&self) -> ClassLabel {
        self.inner
            .truth
            .map(|t| t.class)
            .unwrap_or(ClassLabel::Undecided)
    }

    pub fn is_tail(&self) -> bool {
        self.inner.truth.map(|t| t.is_tail).unwrap_or(false)
    }

    pub fn is_smooth(&self) -> bool {
        self.inner.smooth
    }

    pub fn has_quantile(&self) -> bool {
        self.inner.quantile.is_some()
    }

    pub fn analytic_quantile(&self, u: f64) -> Option<f64> {
        self.inner.quantile.as_ref().map(|q| q(u))
    }

    /// Jump/kink locations in `(lo, hi)`, sorted.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        match &self.inner.breaks {
            Some(f) => {
                let mut v: Vec<f64> = f(lo, hi).into_iter().filter(|&b| b > lo && b < hi).collect();
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                v.dedup();
                v
            }
            None => Vec::new(),
        }
    }

    /// `log U(x)`.
    pub fn eval_log(&self, x: f64) -> Result<f64> {
        if !(x > self.inner.support_floor) || x.is_nan() {
            return Err(Error::Domain(format!(
                "{}: x = {x} not above support floor {}",
                self.inner.name, self.inner.support_floor
            )));
        }
        if x > self.inner.range_ceiling || x.is_infinite() {
            return Err(Error::Domain(format!(
                "{}: x = {x} outside evaluable range",
                self.inner.name
            )));
        }
        let v = (self.inner.log_eval)(x)?;
        if v.is_nan() {
            return Err(Error::Domain(format!("{}: undefined at x = {x}", self.inner.name)));
        }
        Ok(v)
    }

    /// `U(x)`; may overflow to `inf` or underflow to `0`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.eval_log(x).map(f64::exp)
    }

    /// Evaluation without error wrapping, for quadrature loops; NaN outside the domain.
    pub fn raw_log(&self, x: f64) -> f64 {
        if x > self.inner.support_floor && x <= self.inner.range_ceiling {
            (self.inner.log_eval)(x).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        }
    }
}

/// `log U(x)` for a handle.
pub fn eval_log(h: &FunctionHandle, x: f64) -> Result<f64> {
    h.eval_log(x)
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// `U(x) = 1` on `(0,1)`, `x^alpha` on `[1,∞)`.
pub fn make_power_tail(alpha: f64) -> FunctionHandle {
    let mut b = FunctionHandle::builder("power_tail", move |x: f64| {
        if x < 1.0 {
            0.0
        } else {
            alpha * x.ln()
        }
    })
    .params(params(&[("alpha", alpha)]))
    .truth(KnownTruth::m(alpha, alpha <= 0.0))
    .breaks(|_, _| vec![1.0])
    .smooth(true);
    if alpha < 0.0 {
        b = b.quantile(move |u| u.powf(1.0 / alpha).max(1.0));
    }
    b.build()
}

/// Pareto tail `x^{-alpha}` on `[1, ∞)`.
pub fn make_pareto_tail(alpha: f64) -> Result<FunctionHandle> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Param(format!("pareto_tail needs alpha > 0, got {alpha}")));
    }
    Ok(FunctionHandle::builder("pareto_tail", move |x: f64| {
        if x < 1.0 {
            0.0
        } else {
            -alpha * x.ln()
        }
    })
    .params(params(&[("alpha", alpha)]))
    .truth(KnownTruth::m(-alpha, true))
    .breaks(|_, _| vec![1.0])
    .smooth(true)
    .quantile(move |u| u.powf(-1.0 / alpha).max(1.0))
    .build())
}

/// Integer `n >= 0` with `2^n <= x < 2^{n+1}` (0 below 2).
pub fn dyadic_level(x: f64) -> i32 {
    if x < 2.0 {
        return 0;
    }
    let mut n = x.log2().floor() as i32;
    while 2f64.powi(n + 1) <= x {
        n += 1;
    }
    while 2f64.powi(n) > x {
        n -= 1;
    }
    n
}

/// Peter-and-Paul tail: `2^{-n}` on `[2^n, 2^{n+1})`, 1 on `(0, 2)`.
pub fn make_peter_paul() -> FunctionHandle {
    FunctionHandle::builder("peter_paul", |x: f64| -(dyadic_level(x) as f64) * LN_2)
        .truth(KnownTruth::m(-1.0, true))
        .breaks(|lo, hi| {
            let mut v = Vec::new();
            let mut k = dyadic_level(lo.max(1.0)).max(1);
            loop {
                let p = 2f64.powi(k);
                if p >= hi || !p.is_finite() {
                    break;
                }
                v.push(p);
                k += 1;
            }
            v
        })
        .quantile(|u| {
            let m = (-u.log2()).ceil().max(1.0) as i32;
            2f64.powi(m)
        })
        .build()
}

/// Nodes `x_n = x_a^{(1+alpha)^n}`, `n >= 1`, of the geometric 𝒪-set step function.
pub fn oset_geometric_node(alpha: f64, x_a: f64, n: i32) -> f64 {
    x_a.powf((1.0 + alpha).powi(n))
}

/// Step function `x_n^{alpha(1+beta)}` on `[x_n, x_{n+1})`, 1 below `x_1`.
pub fn make_oset_geometric(alpha: f64, beta: f64, x_a: f64) -> Result<FunctionHandle> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Param(format!("oset_geometric needs alpha > 0, got {alpha}")));
    }
    if beta == -1.0 || !beta.is_finite() {
        return Err(Error::Param("oset_geometric needs beta != -1".into()));
    }
    if !(x_a > 1.0) || !x_a.is_finite() {
        return Err(Error::Param(format!("oset_geometric needs x_a > 1, got {x_a}")));
    }
    let c = alpha * (1.0 + beta);
    let (mu, nu) = if 1.0 + beta > 0.0 {
        (c / (1.0 + alpha), c)
    } else {
        (c, c / (1.0 + alpha))
    };
    let level = move |x: f64| -> Option<i32> {
        if x < oset_geometric_node(alpha, x_a, 1) {
            return None;
        }
        let mut n = 1;
        while oset_geometric_node(alpha, x_a, n + 1) <= x {
            n += 1;
        }
        Some(n)
    };
    let ln_xa = x_a.ln();
    Ok(FunctionHandle::builder("oset_geometric", move |x: f64| match level(x) {
        None => 0.0,
        Some(n) => c * (1.0 + alpha).powi(n) * ln_xa,
    })
    .params(params(&[("alpha", alpha), ("beta", beta), ("x_a", x_a)]))
    .truth(KnownTruth::from_class(ClassLabel::Oscillating { mu, nu }).tail(1.0 + beta < 0.0))
    .breaks(move |lo, hi| {
        let mut v = Vec::new();
        let mut n = 1;
        loop {
            let node = oset_geometric_node(alpha, x_a, n);
            if node >= hi || !node.is_finite() {
                break;
            }
            if node > lo {
                v.push(node);
            }
            n += 1;
        }
        v
    })
    .build())
}

/// Nodes of the tower sequence `x_1 = 1`, `x_{n+1} = 2^{x_n / c}`, truncated at overflow.
pub fn oset_tower_nodes(c: f64) -> Vec<f64> {
    let mut v = vec![1.0];
    loop {
        let last = *v.last().unwrap();
        let next = 2f64.powf(last / c);
        if !next.is_finite() || next <= last || v.len() > 64 {
            break;
        }
        v.push(next);
    }
    v
}

/// Step function `2^{alpha x_n}` on `[x_n, x_{n+1})` with the tower nodes.
///
/// The recursion only diverges for `c < e·ln 2`; larger `c` makes the nodes
/// converge to a finite fixed point and the function would be undefined
/// beyond it.
pub fn make_oset_tower(c: f64, alpha: f64) -> Result<FunctionHandle> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Param(format!("oset_tower needs c > 0, got {c}")));
    }
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::Param("oset_tower needs alpha != 0".into()));
    }
    if c >= E * LN_2 {
        return Err(Error::Param(format!(
            "oset_tower nodes converge for c >= e*ln 2 ({:.4}); got c = {c}",
            E * LN_2
        )));
    }
    let nodes = Arc::new(oset_tower_nodes(c));
    let (mu, nu) = if alpha > 0.0 {
        (alpha * c, f64::INFINITY)
    } else {
        (f64::NEG_INFINITY, alpha * c)
    };
    let eval_nodes = nodes.clone();
    Ok(FunctionHandle::builder("oset_tower", move |x: f64| {
        if x < 1.0 {
            return 0.0;
        }
        let idx = eval_nodes.partition_point(|&node| node <= x) - 1;
        alpha * eval_nodes[idx] * LN_2
    })
    .params(params(&[("c", c), ("alpha", alpha)]))
    .truth(KnownTruth::from_class(ClassLabel::Oscillating { mu, nu }).tail(alpha < 0.0))
    .breaks(move |lo, hi| nodes.iter().copied().filter(|&n| n > lo && n < hi).collect())
    .build())
}

pub fn make_two_plus_sin() -> FunctionHandle {
    FunctionHandle::builder("two_plus_sin", |x: f64| (2.0 + x.sin()).ln())
        .truth(KnownTruth::m(0.0, false))
        .smooth(true)
        .build()
}

pub fn make_x_pow_sin_x() -> FunctionHandle {
    FunctionHandle::builder("x_pow_sin_x", |x: f64| x.sin() * x.ln())
        .truth(KnownTruth::from_class(ClassLabel::Oscillating { mu: -1.0, nu: 1.0 }))
        .smooth(true)
        .build()
}

/// `exp(-x^p)`.
pub fn make_exp_neg(p: f64) -> Result<FunctionHandle> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Param(format!("exp_neg needs p > 0, got {p}")));
    }
    Ok(FunctionHandle::builder("exp_neg", move |x: f64| -x.powf(p))
        .params(params(&[("p", p)]))
        .truth(KnownTruth::from_class(ClassLabel::MInf).tail(true))
        .smooth(true)
        .quantile(move |u| (-u.ln()).powf(1.0 / p))
        .build())
}

/// `exp(x^p)`.
pub fn make_exp_pos(p: f64) -> Result<FunctionHandle> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Param(format!("exp_pos needs p > 0, got {p}")));
    }
    Ok(FunctionHandle::builder("exp_pos", move |x: f64| x.powf(p))
        .params(params(&[("p", p)]))
        .truth(KnownTruth::from_class(ClassLabel::MNegInf))
        .smooth(true)
        .build())
}

// beyond this the tail is below exp(-30000) and jumps are irrelevant to any integral
const FLOOR_LOG_BREAK_CAP: f64 = 4096.0;

/// Tail `exp(-⌊x⌋ log x)`.
pub fn make_floor_log_tail() -> FunctionHandle {
    FunctionHandle::builder("floor_log_tail", |x: f64| {
        if x < 1.0 {
            0.0
        } else {
            -x.floor() * x.ln()
        }
    })
    .truth(KnownTruth::from_class(ClassLabel::MInf).tail(true))
    .breaks(|lo, hi| {
        let start = lo.max(0.0).floor() + 1.0;
        let stop = hi.min(FLOOR_LOG_BREAK_CAP);
        let mut v = Vec::new();
        let mut k = start.max(1.0);
        while k < stop {
            v.push(k);
            k += 1.0;
        }
        v
    })
    .build()
}

// n^{-n} underflows the spacing of f64 near n long before this
const REMARK7_MAX_N: f64 = 50.0;

/// True when `x` lies in one of the spikes `(n, n + n^{-n})`.
pub fn remark7_in_spike(x: f64) -> bool {
    let n = x.floor();
    n >= 1.0 && n < REMARK7_MAX_N && x > n && x < n + n.powf(-n)
}

/// `1/x` on the spikes `(n, n + n^{-n})`, `e^{-x}` elsewhere.
pub fn make_remark7_mix() -> FunctionHandle {
    FunctionHandle::builder("remark7_mix", |x: f64| {
        if remark7_in_spike(x) {
            -x.ln()
        } else {
            -x
        }
    })
    .truth(KnownTruth {
        rho: None,
        kappa: Some(f64::INFINITY),
        mu: Some(f64::NEG_INFINITY),
        nu: Some(-1.0),
        class: ClassLabel::Oscillating {
            mu: f64::NEG_INFINITY,
            nu: -1.0,
        },
        is_tail: false,
    })
    .breaks(|lo, hi| {
        let mut v = Vec::new();
        let mut n = 1.0f64;
        while n < REMARK7_MAX_N {
            for b in [n, n + n.powf(-n)] {
                if b > lo && b < hi {
                    v.push(b);
                }
            }
            n += 1.0;
        }
        v
    })
    .build()
}

/// `(x/e)^alpha (1 + 1/log x) / 2` for `x >= e`, 1 below.
pub fn make_log_perturbed_power(alpha: f64) -> FunctionHandle {
    FunctionHandle::builder("log_perturbed_power", move |x: f64| {
        if x < E {
            0.0
        } else {
            let l = x.ln();
            alpha * (l - 1.0) + (1.0 / l).ln_1p() - LN_2
        }
    })
    .params(params(&[("alpha", alpha)]))
    .truth(KnownTruth::m(alpha, alpha <= 0.0))
    .breaks(|_, _| vec![E])
    .smooth(true)
    .build()
}

/// `x^alpha` on all of `(0, ∞)`; vanishes at the origin.
pub fn make_ramp(alpha: f64) -> Result<FunctionHandle> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Param(format!("ramp needs alpha > 0, got {alpha}")));
    }
    Ok(FunctionHandle::builder("ramp", move |x: f64| alpha * x.ln())
        .params(params(&[("alpha", alpha)]))
        .truth(KnownTruth::m(alpha, false))
        .smooth(true)
        .build())
}

/// `x^alpha (1 + amp sin(log x))` on `(0, ∞)`.
pub fn make_ramp_log_sine(alpha: f64, amp: f64) -> Result<FunctionHandle> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Param(format!("ramp_log_sine needs alpha > 0, got {alpha}")));
    }
    if !(amp.abs() < 1.0) {
        return Err(Error::Param(format!("ramp_log_sine needs |amp| < 1, got {amp}")));
    }
    Ok(FunctionHandle::builder("ramp_log_sine", move |x: f64| {
        let l = x.ln();
        alpha * l + (amp * l.sin()).ln_1p()
    })
    .params(params(&[("alpha", alpha), ("amp", amp)]))
    .truth(KnownTruth::m(alpha, false))
    .smooth(true)
    .build())
}

/// Catalog names accepted by [`make_named`].
pub const CATALOG: &[&str] = &[
    "power_tail",
    "peter_paul",
    "oset_geometric",
    "oset_tower",
    "two_plus_sin",
    "x_pow_sin_x",
    "exp_neg",
    "exp_pos",
    "floor_log_tail",
    "remark7_mix",
    "pareto_tail",
    "log_perturbed_power",
    "ramp",
    "ramp_log_sine",
];

/// Builds a corpus member by name. Missing parameters take their defaults;
/// unknown parameter keys are rejected.
pub fn make_named(name: &str, params: &BTreeMap<String, f64>) -> Result<FunctionHandle> {
    let allowed: &[(&str, f64)] = match name {
        "power_tail" => &[("alpha", -2.0)],
        "peter_paul" | "two_plus_sin" | "x_pow_sin_x" | "floor_log_tail" | "remark7_mix" => &[],
        "oset_geometric" => &[("alpha", 1.0), ("beta", 0.0), ("x_a", 2.0)],
        "oset_tower" => &[("c", 1.0), ("alpha", -1.0)],
        "exp_neg" | "exp_pos" => &[("p", 1.0)],
        "pareto_tail" => &[("alpha", 2.0)],
        "log_perturbed_power" => &[("alpha", -1.0)],
        "ramp" => &[("alpha", 1.0)],
        "ramp_log_sine" => &[("alpha", 1.5), ("amp", 0.1)],
        other => return Err(Error::UnknownName(other.to_string())),
    };
    for key in params.keys() {
        if !allowed.iter().any(|(k, _)| k == key) {
            return Err(Error::Param(format!("{name} has no parameter `{key}`")));
        }
    }
    let get = |k: &str| {
        params
            .get(k)
            .copied()
            .unwrap_or_else(|| allowed.iter().find(|(n, _)| *n == k).unwrap().1)
    };
    match name {
        "power_tail" => Ok(make_power_tail(get("alpha"))),
        "peter_paul" => Ok(make_peter_paul()),
        "oset_geometric" => make_oset_geometric(get("alpha"), get("beta"), get("x_a")),
        "oset_tower" => make_oset_tower(get("c"), get("alpha")),
        "two_plus_sin" => Ok(make_two_plus_sin()),
        "x_pow_sin_x" => Ok(make_x_pow_sin_x()),
        "exp_neg" => make_exp_neg(get("p")),
        "exp_pos" => make_exp_pos(get("p")),
        "floor_log_tail" => Ok(make_floor_log_tail()),
        "remark7_mix" => Ok(make_remark7_mix()),
        "pareto_tail" => make_pareto_tail(get("alpha")),
        "log_perturbed_power" => Ok(make_log_perturbed_power(get("alpha"))),
        "ramp" => make_ramp(get("alpha")),
        "ramp_log_sine" => make_ramp_log_sine(get("alpha"), get("amp")),
        _ => unreachable!(),
    }
}

/// How a tabulated value is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub x: f64,
    pub kind: ValueKind,
    pub v: f64,
}

/// Sampled function values, interpolated linearly in `(log x, log U)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TableData {
    pub rows: Vec<TableRow>,
}

pub const MIN_TABLE_ROWS: usize = 8;

impl TableData {
    /// Parses `x,value` or `x,logvalue` CSV text.
    pub fn from_csv(text: &str) -> Result<TableData> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = rdr
            .headers()
            .map_err(|e| Error::Format(format!("bad header: {e}")))?
            .clone();
        let kind = match (headers.get(0), headers.get(1), headers.len()) {
            (Some("x"), Some("value"), 2) => ValueKind::Linear,
            (Some("x"), Some("logvalue"), 2) => ValueKind::Log,
            _ => {
                return Err(Error::Format(format!(
                    "header must be `x,value` or `x,logvalue`, got `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                )))
            }
        };
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Format(format!("row {}: {e}", i + 2)))?;
            if rec.len() != 2 {
                return Err(Error::Format(format!("row {}: expected 2 fields", i + 2)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Format(format!("row {}: `{s}` is not a number", i + 2)))
            };
            rows.push(TableRow {
                x: parse(&rec[0])?,
                kind,
                v: parse(&rec[1])?,
            });
        }
        Ok(TableData { rows })
    }

    fn validate(&self) -> Result<()> {
        if self.rows.len() < MIN_TABLE_ROWS {
            return Err(Error::Format(format!(
                "table needs at least {MIN_TABLE_ROWS} rows, got {}",
                self.rows.len()
            )));
        }
        for r in &self.rows {
            if !(r.x > 0.0) || !r.x.is_finite() || !r.v.is_finite() {
                return Err(Error::Format(format!("invalid row x = {}, v = {}", r.x, r.v)));
            }
            if r.kind == ValueKind::Linear && r.v <= 0.0 {
                return Err(Error::PositivityViolation { x: r.x, value: r.v });
            }
        }
        for w in self.rows.windows(2) {
            if !(w[1].x > w[0].x) {
                return Err(Error::Format(format!(
                    "x must be strictly increasing ({} then {})",
                    w[0].x, w[1].x
                )));
            }
        }
        Ok(())
    }
}

/// Handle interpolating `data` in log-log coordinates. No truth metadata.
pub fn from_table(data: &TableData) -> Result<FunctionHandle> {
    from_table_named("table", data)
}

pub fn from_table_named(name: &str, data: &TableData) -> Result<FunctionHandle> {
    data.validate()?;
    let lx: Vec<f64> = data.rows.iter().map(|r| r.x.ln()).collect();
    let ly: Vec<f64> = data
        .rows
        .iter()
        .map(|r| match r.kind {
            ValueKind::Linear => r.v.ln(),
            ValueKind::Log => r.v,
        })
        .collect();
    let first = data.rows[0].x;
    let last = data.rows[data.rows.len() - 1].x;
    Ok(FunctionHandle::builder(name, move |x: f64| {
        let t = x.ln();
        if x < first || x > last {
            return f64::NAN;
        }
        let i = lx.partition_point(|&v| v <= t);
        if i == 0 {
            return ly[0];
        }
        if i >= lx.len() {
            return ly[lx.len() - 1];
        }
        let w = (t - lx[i - 1]) / (lx[i] - lx[i - 1]);
        ly[i - 1] + w * (ly[i] - ly[i - 1])
    })
    .support_floor(first * (1.0 - 1e-15))
    .range_ceiling(last)
    .build())
}
