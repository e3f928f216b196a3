//! Von Mises conditions, domain-of-attraction verdicts, the PBdH ratio probe
//! and block-maxima simulation.

use crate::class::ClassLabel;
use crate::error::{Error, Result};
use crate::fnmodel::FunctionHandle;
use crate::grid::{limit_estimate, GridSpec, IndexEstimate};
use crate::order::{classify, rv_ratio_test, RvVerdict, DEFAULT_TOL};
use crate::report::{ConditionId, ConditionReport};
use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Relative step for first derivatives.
pub const FIRST_STEP: f64 = 1e-6;
/// Relative step for the five-point second derivative.
pub const SECOND_STEP: f64 = 1e-4;
/// Ratio points handed to the RV test.
pub const RV_T_VALUES: [f64; 4] = [0.5, 2.0, 3.0, 10.0];
const ENDPOINT_SCAN_MAX: f64 = 1e300;
const BISECT_ITERS: usize = 200;

/// A distribution given by its tail `F̄`.
#[derive(Debug, Clone)]
pub struct DistributionHandle {
    pub base: FunctionHandle,
    /// `x* = sup{x : F(x) < 1}`.
    pub endpoint: f64,
}

impl DistributionHandle {
    pub fn new(base: FunctionHandle) -> Result<Self> {
        if !base.is_tail() {
            return Err(Error::Param(format!("{} is not a distribution tail", base.name())));
        }
        let top = base.range_ceiling().min(ENDPOINT_SCAN_MAX);
        let mut prev = base.support_floor().max(0.0);
        let mut x = 1.0;
        let mut endpoint = f64::INFINITY;
        while x <= top {
            if base.raw_log(x) == f64::NEG_INFINITY {
                let (mut lo, mut hi) = (prev, x);
                for _ in 0..BISECT_ITERS {
                    let mid = 0.5 * (lo + hi);
                    if base.raw_log(mid) == f64::NEG_INFINITY {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                // a log tail that runs off to -f64::MAX is underflow, not an endpoint
                if base.raw_log(lo) > -1e300 {
                    endpoint = hi;
                }
                break;
            }
            prev = x;
            x *= 2.0;
        }
        Ok(DistributionHandle { base, endpoint })
    }

    /// `log F̄(x)`, with `F̄ = 1` at or below the support floor.
    pub fn log_tail(&self, x: f64) -> f64 {
        if x <= self.base.support_floor() {
            0.0
        } else {
            self.base.raw_log(x)
        }
    }

    /// `inf{x : F̄(x) <= u}`; analytic where the base supplies it.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Quantile(format!("quantile level must lie in (0,1), got {u}")));
        }
        if let Some(x) = self.base.analytic_quantile(u) {
            if !x.is_finite() {
                return Err(Error::Quantile(format!("quantile at u = {u} overflows")));
            }
            return Ok(x);
        }
        let lu = u.ln();
        let mut lo = self.base.support_floor().max(0.0);
        let mut hi = lo.max(1.0);
        while !(self.log_tail(hi) <= lu) {
            lo = hi;
            hi *= 2.0;
            if hi > self.endpoint.min(ENDPOINT_SCAN_MAX) {
                return Err(Error::Quantile(format!("no quantile found for u = {u}")));
            }
        }
        for _ in 0..BISECT_ITERS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.log_tail(mid) <= lu {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

fn require_smooth(d: &DistributionHandle) -> Result<()> {
    if !d.base.is_smooth() {
        return Err(Error::NonDifferentiable(format!("{} has jumps", d.base.name())));
    }
    Ok(())
}

fn dlog(d: &DistributionHandle, x: f64, h_rel: f64) -> f64 {
    let h = x * h_rel;
    (d.log_tail(x + h) - d.log_tail(x - h)) / (2.0 * h)
}

fn d2log(d: &DistributionHandle, x: f64, h_rel: f64) -> f64 {
    let h = x * h_rel;
    let l = |k: f64| d.log_tail(x + k * h);
    (-l(2.0) + 16.0 * l(1.0) - 30.0 * l(0.0) + 16.0 * l(-1.0) - l(-2.0)) / (12.0 * h * h)
}

/// Limit of `x F'(x) / F̄(x)`.
pub fn von_mises_frechet(d: &DistributionHandle, grid: &GridSpec, h_rel: f64) -> Result<IndexEstimate> {
    require_smooth(d)?;
    if !(h_rel > 0.0 && h_rel < 0.1) {
        return Err(Error::Param(format!("relative step must lie in (0, 0.1), got {h_rel}")));
    }
    let xs = grid.xs();
    let lnx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let v: Vec<f64> = xs.iter().map(|&x| -x * dlog(d, x, h_rel)).collect();
    limit_estimate(&lnx, &v, grid)
}

/// Limit of `(F̄/F')'`, computed as `ℓ''/ℓ'^2` with `ℓ = log F̄`.
pub fn von_mises_gumbel(d: &DistributionHandle, grid: &GridSpec) -> Result<IndexEstimate> {
    require_smooth(d)?;
    let xs = grid.xs();
    let lnx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let v: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let d1 = dlog(d, x, FIRST_STEP);
            d2log(d, x, SECOND_STEP) / (d1 * d1)
        })
        .collect();
    limit_estimate(&lnx, &v, grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag")]
pub enum DomainVerdict {
    Frechet { alpha: f64 },
    GumbelInfCandidate,
    NotClassified,
}

impl fmt::Display for DomainVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainVerdict::Frechet { alpha } => write!(f, "Frechet({alpha:.4})"),
            DomainVerdict::GumbelInfCandidate => write!(f, "GumbelInfCandidate"),
            DomainVerdict::NotClassified => write!(f, "NotClassified"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainReport {
    pub verdict: DomainVerdict,
    pub label: ClassLabel,
    pub rv: RvVerdict,
    pub conditions: Vec<ConditionReport>,
}

/// Fréchet iff the tail is certified regularly varying; a Gumbel candidate
/// only when the tail is rapidly decaying and vM2 holds.
pub fn classify_domain_attraction(d: &DistributionHandle, grid: &GridSpec, tol: f64) -> Result<DomainReport> {
    if d.endpoint.is_finite() {
        return Err(Error::Endpoint(d.endpoint));
    }
    let label = classify(&d.base, grid, DEFAULT_TOL)?;
    let (rv, rv_report) = rv_ratio_test(&d.base, &RV_T_VALUES, grid, tol)?;
    let mut conditions = vec![rv_report];
    let verdict = match rv {
        RvVerdict::IsRv { rho } if rho < -tol => DomainVerdict::Frechet { alpha: -rho },
        _ if label == ClassLabel::MInf => match von_mises_gumbel(d, grid) {
            Ok(est) => {
                let ok = est.value.abs() <= tol;
                conditions.push(
                    ConditionReport::new(ConditionId::Vm2, ok, tol)
                        .with("limit", est.value)
                        .with("spread", est.spread),
                );
                if ok {
                    DomainVerdict::GumbelInfCandidate
                } else {
                    DomainVerdict::NotClassified
                }
            }
            Err(Error::NonDifferentiable(msg)) => {
                conditions.push(ConditionReport::new(ConditionId::Vm2, false, tol).detail(msg));
                DomainVerdict::NotClassified
            }
            Err(e) => return Err(e),
        },
        _ => DomainVerdict::NotClassified,
    };
    Ok(DomainReport {
        verdict,
        label,
        rv,
        conditions,
    })
}

/// Generalized Pareto shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpdSpec {
    pub xi: f64,
}

impl GpdSpec {
    pub fn in_support(&self, x: f64) -> bool {
        1.0 + self.xi * x > 0.0
    }

    /// `(1 + ξx)^{-1/ξ}`, or `e^{-x}` at `ξ = 0`.
    pub fn survival(&self, x: f64) -> Result<f64> {
        if !self.in_support(x) {
            return Err(Error::Param(format!("1 + xi*x <= 0 at x = {x}, xi = {}", self.xi)));
        }
        Ok(if self.xi == 0.0 {
            (-x).exp()
        } else {
            (-(self.xi * x).ln_1p() / self.xi).exp()
        })
    }
}

/// Named scale function `u ↦ a(u)`.
#[derive(Clone)]
pub struct AFunction {
    pub name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl AFunction {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        AFunction {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        (self.f)(u)
    }
}

impl fmt::Debug for AFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AFunction({})", self.name)
    }
}

/// `{c·u, c·√u, c}`.
pub fn default_a_family(c: f64) -> Vec<AFunction> {
    vec![
        AFunction::new(format!("{c}*u"), move |u| c * u),
        AFunction::new(format!("{c}*sqrt(u)"), move |u| c * u.sqrt()),
        AFunction::new(format!("{c}"), move |_| c),
    ]
}

/// Geometric grid of `points` values in `[lo, hi]`.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let n = points.max(2) - 1;
    (0..=n).map(|i| (a + (b - a) * i as f64 / n as f64).exp()).collect()
}

/// Spread of `F̄(u + x a(u)) / F̄(u)` over the trailing half of the u values,
/// for every probe `x` and every member of the `a` family.
///
/// The u values are augmented with points straddling each jump of the
/// tail, so that step tails are evaluated along their node subsequence.
/// Passes when some member yields, at every probe, a spread within `tol`
/// and a final ratio within `tol` of the GPD survival function.
pub fn gpd_ratio_probe(
    d: &DistributionHandle,
    gpd: GpdSpec,
    a_family: &[AFunction],
    x_probe: &[f64],
    u_grid: &[f64],
    tol: f64,
) -> Result<ConditionReport> {
    if a_family.is_empty() || x_probe.is_empty() || u_grid.len() < 2 {
        return Err(Error::Param("probe needs a family, probe points and at least 2 u values".into()));
    }
    if let Some(x) = x_probe.iter().find(|&&x| !gpd.in_support(x)) {
        return Err(Error::Param(format!("probe x = {x} violates 1 + xi*x > 0 (xi = {})", gpd.xi)));
    }
    if u_grid.iter().any(|&u| !(u > 0.0) || !u.is_finite()) {
        return Err(Error::Param("u grid must be positive and finite".into()));
    }
    let (u_lo, u_hi) = u_grid
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &u| (a.min(u), b.max(u)));
    let nodes = d.base.breakpoints(u_lo, u_hi);
    let mut rpt = ConditionReport::new(ConditionId::Pbdh, false, tol).with("xi", gpd.xi);
    let mut any_ok = false;
    for a in a_family {
        let mut worst_spread: f64 = 0.0;
        let mut worst_dev: f64 = 0.0;
        for &x in x_probe {
            let mut us: Vec<f64> = u_grid.to_vec();
            for &b in &nodes {
                let ab = a.eval(b);
                if !(ab > 0.0) || !ab.is_finite() {
                    return Err(Error::Param(format!("a({b}) = {ab} is not positive")));
                }
                let u = b - x * ab / 2.0;
                if u > u_lo && u < u_hi {
                    us.push(u);
                }
            }
            us.sort_by(f64::total_cmp);
            let tail = &us[us.len() / 2..];
            let mut ratios = Vec::with_capacity(tail.len());
            for &u in tail {
                let au = a.eval(u);
                if !(au > 0.0) || !au.is_finite() {
                    return Err(Error::Param(format!("a({u}) = {au} is not positive")));
                }
                let y = u + x * au;
                if y <= 0.0 {
                    continue;
                }
                let r = (d.log_tail(y) - d.log_tail(u)).exp();
                if r.is_finite() {
                    ratios.push(r);
                }
            }
            let (lo, hi) = ratios
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
            let spread = if ratios.is_empty() { f64::INFINITY } else { hi - lo };
            let last = ratios.last().copied().unwrap_or(f64::NAN);
            let dev = (last - gpd.survival(x)?).abs();
            worst_spread = worst_spread.max(spread);
            worst_dev = if dev.is_nan() { f64::INFINITY } else { worst_dev.max(dev) };
        }
        if worst_spread <= tol && worst_dev <= tol {
            any_ok = true;
        }
        rpt = rpt
            .with(format!("spread[{}]", a.name), worst_spread)
            .with(format!("deviation[{}]", a.name), worst_dev);
    }
    rpt.passed = any_ok;
    Ok(rpt.detail(if any_ok {
        "stable ratio matching the GPD limit for some scale function"
    } else {
        "no scale function in the family stabilizes the excess ratio"
    }))
}

/// Normalization of block maxima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule")]
pub enum NormRule {
    /// `b_n = 0`, `a_n = quantile(1/n)`.
    FrechetStandard,
    Custom { a_n: Vec<f64>, b_n: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationResult {
    pub n_values: Vec<u64>,
    pub a_n: Vec<f64>,
    pub b_n: Vec<f64>,
    pub abscissae: Vec<f64>,
    /// Per n, the empirical CDF of `(M_n - b_n)/a_n` at `abscissae`.
    pub empirical_cdfs: Vec<Vec<f64>>,
    /// Per n, the KS distance to `Φ_α` when `alpha` is given.
    pub distances: Vec<Option<f64>>,
    pub alpha: Option<f64>,
    pub reps: usize,
    pub seed: u64,
}

/// Default abscissae: 64 geometric points in `[0.05, 20]`.
pub fn default_abscissae() -> Vec<f64> {
    geometric_grid(0.05, 20.0, 64)
}

/// `Φ_α(x) = exp(-x^{-α})` for `x > 0`.
pub fn frechet_cdf(alpha: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-x.powf(-alpha)).exp()
    }
}

/// Exact `P((M_n - b)/a <= x) = F^n(a x + b)`.
pub fn normalized_max_cdf(d: &DistributionHandle, n: u64, a: f64, b: f64, x: f64) -> f64 {
    let y = a * x + b;
    let tail = d.log_tail(y).exp();
    if tail >= 1.0 {
        return 0.0;
    }
    (n as f64 * (-tail).ln_1p()).exp()
}

fn norm_constants(d: &DistributionHandle, n_values: &[u64], rule: &NormRule) -> Result<(Vec<f64>, Vec<f64>)> {
    match rule {
        NormRule::FrechetStandard => {
            let a = n_values
                .iter()
                .map(|&n| d.quantile(1.0 / n as f64))
                .collect::<Result<Vec<_>>>()?;
            Ok((a, vec![0.0; n_values.len()]))
        }
        NormRule::Custom { a_n, b_n } => {
            if a_n.len() != n_values.len() || b_n.len() != n_values.len() {
                return Err(Error::Param("custom a_n, b_n must match n_values".into()));
            }
            if a_n.iter().any(|a| !(*a > 0.0)) {
                return Err(Error::Param("a_n must be positive".into()));
            }
            Ok((a_n.clone(), b_n.clone()))
        }
    }
}

/// Sorted normalized maxima, one vector per n.
///
/// Replica `i` draws from ChaCha stream `i` of `seed`; a block maximum of
/// `n` draws is sampled as `Q(1 - V^{1/n})` with `V` uniform, which has
/// exactly the law of the maximum.
fn normalized_samples(
    d: &DistributionHandle,
    n_values: &[u64],
    a: &[f64],
    b: &[f64],
    reps: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let per_rep: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            n_values
                .iter()
                .enumerate()
                .map(|(k, &n)| {
                    let v: f64 = rng.sample(Open01);
                    let p = -(v.ln() / n as f64).exp_m1();
                    d.quantile(p).map(|m| (m - b[k]) / a[k])
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![Vec::with_capacity(reps); n_values.len()];
    for row in per_rep {
        for (k, y) in row.into_iter().enumerate() {
            out[k].push(y);
        }
    }
    for v in &mut out {
        v.sort_by(f64::total_cmp);
    }
    Ok(out)
}

fn ecdf(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&y| y <= x) as f64 / sorted.len() as f64
}

/// One-sample Kolmogorov–Smirnov distance of sorted data to `cdf`.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |m, (i, &y)| {
        let f = cdf(y);
        m.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    })
}

/// Two-sample Kolmogorov–Smirnov distance of sorted data.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut m: f64 = 0.0;
    for &x in a.iter().chain(b) {
        m = m.max((ecdf(a, x) - ecdf(b, x)).abs());
    }
    m
}

pub fn block_maxima_simulate(
    d: &DistributionHandle,
    n_values: &[u64],
    reps: usize,
    seed: u64,
    rule: &NormRule,
    alpha: Option<f64>,
) -> Result<SimulationResult> {
    if reps == 0 {
        return Err(Error::Param("reps must be at least 1".into()));
    }
    if n_values.is_empty() || n_values.contains(&0) {
        return Err(Error::Param("n_values must be non-empty and positive".into()));
    }
    if let Some(a) = alpha {
        if !(a > 0.0) {
            return Err(Error::Param(format!("candidate alpha must be positive, got {a}")));
        }
    }
    let (a_n, b_n) = norm_constants(d, n_values, rule)?;
    let samples = normalized_samples(d, n_values, &a_n, &b_n, reps, seed)?;
    let abscissae = default_abscissae();
    let empirical_cdfs = samples
        .iter()
        .map(|s| abscissae.iter().map(|&x| ecdf(s, x)).collect())
        .collect();
    let distances = samples
        .iter()
        .map(|s| alpha.map(|al| ks_distance(s, |x| frechet_cdf(al, x))))
        .collect();
    Ok(SimulationResult {
        n_values: n_values.to_vec(),
        a_n,
        b_n,
        abscissae,
        empirical_cdfs,
        distances,
        alpha,
        reps,
        seed,
    })
}

/// Distance between normalized maxima along `n = 2^k` and `n = 3·2^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsequenceWitness {
    pub k_values: Vec<u32>,
    /// Sup distance between the exact laws `F^n(a_n x)` of the two subsequences.
    pub ks_exact: Vec<f64>,
    /// Two-sample KS distance between simulated normalized maxima.
    pub ks_empirical: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
}

pub fn subsequence_witness(d: &DistributionHandle, k_values: &[u32], reps: usize, seed: u64) -> Result<SubsequenceWitness> {
    if reps == 0 || k_values.is_empty() {
        return Err(Error::Param("witness needs reps >= 1 and at least one k".into()));
    }
    if k_values.iter().any(|&k| k > 60) {
        return Err(Error::Param("k must not exceed 60".into()));
    }
    let mut n_values = Vec::new();
    for &k in k_values {
        n_values.push(1u64 << k);
        n_values.push(3u64 << k);
    }
    let (a, b) = norm_constants(d, &n_values, &NormRule::FrechetStandard)?;
    let samples = normalized_samples(d, &n_values, &a, &b, reps, seed)?;
    let xs = geometric_grid(0.01, 100.0, 4001);
    let mut ks_exact = Vec::new();
    let mut ks_empirical = Vec::new();
    for j in 0..k_values.len() {
        let (p, q) = (2 * j, 2 * j + 1);
        let exact = xs.iter().fold(0.0f64, |m, &x| {
            let f1 = normalized_max_cdf(d, n_values[p], a[p], b[p], x);
            let f2 = normalized_max_cdf(d, n_values[q], a[q], b[q], x);
            m.max((f1 - f2).abs())
        });
        ks_exact.push(exact);
        ks_empirical.push(ks_two_sample(&samples[p], &samples[q]));
    }
    Ok(SubsequenceWitness {
        k_values: k_values.to_vec(),
        ks_exact,
        ks_empirical,
        reps,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fnmodel::*;

    fn dist(h: FunctionHandle) -> DistributionHandle {
        DistributionHandle::new(h).unwrap()
    }

    #[test]
    fn tails_only() {
        assert!(matches!(
            DistributionHandle::new(make_exp_pos(1.0).unwrap()),
            Err(Error::Param(_))
        ));
        assert_eq!(dist(make_peter_paul()).endpoint, f64::INFINITY);
    }

    #[test]
    fn bisection_quantile_inverts_tail() {
        let d = dist(make_log_perturbed_power(-1.0));
        for u in [0.3, 0.01, 1e-6] {
            let x = d.quantile(u).unwrap();
            assert!((d.log_tail(x) - u.ln()).abs() < 1e-9, "u = {u}");
        }
        assert!(matches!(d.quantile(0.0), Err(Error::Quantile(_))));
        assert!(matches!(d.quantile(1.0), Err(Error::Quantile(_))));
        let tiny = dist(make_pareto_tail(0.01).unwrap());
        assert!(matches!(tiny.quantile(1e-4), Err(Error::Quantile(_))));
    }

    #[test]
    fn peter_paul_quantile_is_left_endpoint() {
        let d = dist(make_peter_paul());
        assert_eq!(d.quantile(0.25).unwrap(), 4.0);
        assert_eq!(d.quantile(0.2).unwrap(), 8.0);
    }

    #[test]
    fn von_mises_values() {
        let g = GridSpec::default();
        let p = dist(make_pareto_tail(2.0).unwrap());
        assert!((von_mises_frechet(&p, &g, FIRST_STEP).unwrap().value - 2.0).abs() < 1e-4);
        // (F̄/F')' = 1/α for a Pareto tail
        assert!((von_mises_gumbel(&p, &g).unwrap().value - 0.5).abs() < 1e-3);
        for q in [1.0, 2.0] {
            let e = dist(make_exp_neg(q).unwrap());
            assert!(von_mises_gumbel(&e, &g).unwrap().value.abs() < 1e-3);
        }
        let lp = dist(make_log_perturbed_power(-1.0));
        assert!((von_mises_frechet(&lp, &g, FIRST_STEP).unwrap().value - 1.0).abs() < 0.05);
        assert!(matches!(
            von_mises_frechet(&dist(make_peter_paul()), &g, FIRST_STEP),
            Err(Error::NonDifferentiable(_))
        ));
    }

    #[test]
    fn gpd_survival() {
        let g = GpdSpec { xi: 0.5 };
        assert!((g.survival(2.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(g.survival(-3.0), Err(Error::Param(_))));
        assert!((GpdSpec { xi: 0.0 }.survival(1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn ks_helpers() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_two_sample(&[1.0], &[2.0]), 1.0);
        let d = ks_distance(&[0.5], |x| x);
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn simulation_rejects_bad_input() {
        let d = dist(make_pareto_tail(1.0).unwrap());
        assert!(matches!(
            block_maxima_simulate(&d, &[100], 0, 1, &NormRule::FrechetStandard, None),
            Err(Error::Param(_))
        ));
        assert!(matches!(
            block_maxima_simulate(&d, &[0], 10, 1, &NormRule::FrechetStandard, None),
            Err(Error::Param(_))
        ));
    }
}
