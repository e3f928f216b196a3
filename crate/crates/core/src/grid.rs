//! Geometric sampling grids and the trailing-window limit estimator.
//!
//! Windows are log-octaves in `log x`: the first covers
//! `(L/2, L]` with `L = log x_max`, the second `(L/4, L/2]`, and so on.
//! A sequence converging like `c / log x` (the Peter-and-Paul sawtooth, the
//! ε of a Karamata representation) has window extremes that are linear in
//! `1 / log x`, so two windows suffice to extrapolate them.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Geometric abscissa grid `10^{log10_x_min} .. 10^{log10_x_max}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub log10_x_min: f64,
    pub log10_x_max: f64,
    pub points: usize,
    /// Upper bound on the number of trailing windows.
    pub windows: usize,
    /// `|r|` beyond which a window extreme is read as an infinite limit.
    pub inf_threshold: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            log10_x_min: 1.0,
            log10_x_max: 8.0,
            points: 2000,
            windows: 8,
            inf_threshold: 100.0,
        }
    }
}

impl GridSpec {
    pub fn new(log10_x_min: f64, log10_x_max: f64) -> Self {
        GridSpec {
            log10_x_min,
            log10_x_max,
            ..GridSpec::default()
        }
    }

    pub fn with_points(mut self, points: usize) -> Self {
        self.points = points;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.log10_x_min >= 0.0) || !self.log10_x_max.is_finite() {
            return Err(Error::Param(format!(
                "grid needs x_min >= 1, got log10 {}",
                self.log10_x_min
            )));
        }
        if !(self.log10_x_min < self.log10_x_max) {
            return Err(Error::Param("grid needs x_min < x_max".into()));
        }
        if self.log10_x_max > 307.0 {
            return Err(Error::Param("grid x_max beyond f64 range".into()));
        }
        if self.windows == 0 || self.points < 16 * self.windows {
            return Err(Error::Param(format!(
                "grid needs points >= 16 * windows ({} < 16 * {})",
                self.points, self.windows
            )));
        }
        if !(self.inf_threshold > 0.0) {
            return Err(Error::Param("inf_threshold must be positive".into()));
        }
        Ok(())
    }

    pub fn x_min(&self) -> f64 {
        10f64.powf(self.log10_x_min)
    }

    pub fn x_max(&self) -> f64 {
        10f64.powf(self.log10_x_max)
    }

    /// Abscissae, geometric, both ends included.
    pub fn xs(&self) -> Vec<f64> {
        let n = self.points.max(2);
        let step = (self.log10_x_max - self.log10_x_min) / (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    self.x_max()
                } else {
                    10f64.powf(self.log10_x_min + step * i as f64)
                }
            })
            .collect()
    }

    /// `(lo, hi]` bounds in `log x` of the usable trailing windows, newest first.
    pub fn window_bounds(&self) -> Vec<(f64, f64)> {
        let l = self.x_max().ln();
        let floor = self.x_min().ln() - 1e-9;
        let mut v = Vec::new();
        let mut hi = l;
        for _ in 0..self.windows {
            let lo = hi / 2.0;
            if lo < floor || lo <= 0.0 {
                break;
            }
            v.push((lo, hi));
            hi = lo;
        }
        v
    }
}

/// Trend of the per-window extremes, oldest to newest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trend {
    Stable,
    Increasing,
    Decreasing,
    Oscillating,
}

/// Extended-real limit estimate with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexEstimate {
    #[serde(with = "crate::ext")]
    pub value: f64,
    /// Extreme over the newest window, before extrapolation.
    #[serde(with = "crate::ext")]
    pub raw: f64,
    /// Range of the per-window extremes.
    #[serde(with = "crate::ext")]
    pub spread: f64,
    pub trend: Trend,
    pub grid: GridSpec,
}

impl IndexEstimate {
    /// An estimate that is exact by construction.
    pub fn exact(value: f64, grid: GridSpec) -> Self {
        IndexEstimate {
            value,
            raw: value,
            spread: 0.0,
            trend: Trend::Stable,
            grid,
        }
    }
}

// window extremes closer than this count as equal when reporting trends
const STABLE_TOL: f64 = 5e-3;

#[derive(Debug, Clone, Copy)]
struct WindowExtremes {
    min: f64,
    min_at: f64,
    max: f64,
    max_at: f64,
}

/// Per-window lower and upper limit estimates of a sampled sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedLimits {
    pub lower: IndexEstimate,
    pub upper: IndexEstimate,
    /// `max - min` in each window, newest first.
    pub window_gaps: Vec<f64>,
}

fn trend_of(extremes_newest_first: &[f64]) -> (Trend, f64) {
    let lo = extremes_newest_first.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = extremes_newest_first.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = if lo.is_finite() && hi.is_finite() {
        hi - lo
    } else if lo == hi {
        0.0
    } else {
        f64::INFINITY
    };
    if spread <= STABLE_TOL {
        return (Trend::Stable, spread);
    }
    let old_to_new: Vec<f64> = extremes_newest_first.iter().rev().cloned().collect();
    let inc = old_to_new.windows(2).all(|w| w[1] >= w[0]);
    let dec = old_to_new.windows(2).all(|w| w[1] <= w[0]);
    let t = if inc {
        Trend::Increasing
    } else if dec {
        Trend::Decreasing
    } else {
        Trend::Oscillating
    };
    (t, spread)
}

/// Extrapolates extremes `e` at `log x` positions `t` (newest first) in `1 / log x`.
fn extrapolate(e: &[f64], t: &[f64]) -> Option<f64> {
    if e.len() < 3 || e[..3].iter().chain(&t[..3]).any(|v| !v.is_finite()) {
        return None;
    }
    let (e1, e2, e3) = (e[0], e[1], e[2]);
    let monotone = (e3 < e2 && e2 < e1) || (e3 > e2 && e2 > e1);
    if !monotone || (e1 - e2).abs() >= (e2 - e3).abs() {
        return None;
    }
    let (u1, u2, u3) = (1.0 / t[0], 1.0 / t[1], 1.0 / t[2]);
    if !(u2 > u1) {
        return None;
    }
    let slope = (e2 - e1) / (u2 - u1);
    let limit = e1 - slope * u1;
    // the oldest window must sit on the same line, otherwise the extremes
    // are not following a 1/log x law and are left alone
    if (limit + slope * u3 - e3).abs() > 0.5 * (e2 - e3).abs() {
        return None;
    }
    Some(limit)
}

/// Lower/upper limit estimates of `values[i]` sampled at `log x = lnx[i]`.
///
/// Non-finite samples are treated as infinite values of the appropriate sign.
/// Returns a domain error when no window holds at least four samples.
pub fn windowed_limits(lnx: &[f64], values: &[f64], grid: &GridSpec) -> Result<WindowedLimits> {
    let bounds = grid.window_bounds();
    let mut ext = Vec::new();
    for (lo, hi) in bounds {
        let mut w = WindowExtremes {
            min: f64::INFINITY,
            min_at: f64::NAN,
            max: f64::NEG_INFINITY,
            max_at: f64::NAN,
        };
        let mut count = 0;
        for (&t, &v) in lnx.iter().zip(values) {
            if t > lo && t <= hi + 1e-12 {
                if v.is_nan() {
                    continue;
                }
                count += 1;
                if v < w.min {
                    w.min = v;
                    w.min_at = t;
                }
                if v > w.max {
                    w.max = v;
                    w.max_at = t;
                }
            }
        }
        if count < 4 {
            break;
        }
        ext.push(w);
    }
    if ext.is_empty() {
        return Err(Error::Domain("no trailing window holds enough samples".into()));
    }
    let thr = grid.inf_threshold;
    let mins: Vec<f64> = ext.iter().map(|w| w.min).collect();
    let maxs: Vec<f64> = ext.iter().map(|w| w.max).collect();
    let min_at: Vec<f64> = ext.iter().map(|w| w.min_at).collect();
    let max_at: Vec<f64> = ext.iter().map(|w| w.max_at).collect();
    let (lt, ls) = trend_of(&mins);
    let (ut, us) = trend_of(&maxs);

    let w1 = ext[0];
    let lower = if w1.min < -thr {
        f64::NEG_INFINITY
    } else if w1.min > thr {
        f64::INFINITY
    } else {
        extrapolate(&mins, &min_at).unwrap_or(w1.min)
    };
    let upper = if w1.max < -thr {
        f64::NEG_INFINITY
    } else if w1.max > thr {
        f64::INFINITY
    } else {
        extrapolate(&maxs, &max_at).unwrap_or(w1.max)
    };
    // extrapolation must not cross the other side
    let (lower, upper) = if lower > upper {
        let mid = 0.5 * (lower + upper);
        (mid, mid)
    } else {
        (lower, upper)
    };
    Ok(WindowedLimits {
        lower: IndexEstimate {
            value: lower,
            raw: w1.min,
            spread: ls,
            trend: lt,
            grid: *grid,
        },
        upper: IndexEstimate {
            value: upper,
            raw: w1.max,
            spread: us,
            trend: ut,
            grid: *grid,
        },
        window_gaps: ext.iter().map(|w| w.max - w.min).collect(),
    })
}

/// Samples `f` on the grid, returning `(log x, f(x))` pairs.
pub fn sample<F: Fn(f64) -> Result<f64>>(grid: &GridSpec, f: F) -> Result<(Vec<f64>, Vec<f64>)> {
    let xs = grid.xs();
    let mut lnx = Vec::with_capacity(xs.len());
    let mut vals = Vec::with_capacity(xs.len());
    for x in xs {
        lnx.push(x.ln());
        vals.push(f(x)?);
    }
    Ok((lnx, vals))
}

/// Single limit estimate from windowed lower/upper limits: the midpoint,
/// with the remaining gap reported as spread.
pub fn limit_estimate(lnx: &[f64], values: &[f64], grid: &GridSpec) -> Result<IndexEstimate> {
    let w = windowed_limits(lnx, values, grid)?;
    let (lo, hi) = (w.lower.value, w.upper.value);
    let mid = |a: f64, b: f64| if a == b { a } else { 0.5 * (a + b) };
    let spread = if lo == hi { 0.0 } else { hi - lo };
    let trend = if spread <= STABLE_TOL { Trend::Stable } else { w.upper.trend };
    Ok(IndexEstimate {
        value: mid(lo, hi),
        raw: mid(w.lower.raw, w.upper.raw),
        spread,
        trend,
        grid: *grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_windows() {
        let g = GridSpec::default();
        g.validate().unwrap();
        assert_eq!(g.window_bounds().len(), 3);
        let xs = g.xs();
        assert_eq!(xs.len(), 2000);
        assert_eq!(xs[1999], 1e8);
        assert!((xs[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(GridSpec::new(-1.0, 8.0).validate().is_err());
        assert!(GridSpec::new(5.0, 3.0).validate().is_err());
        assert!(GridSpec::new(1.0, 8.0).with_points(100).validate().is_err());
    }

    #[test]
    fn constant_sequence() {
        let g = GridSpec::default();
        let (lnx, v) = sample(&g, |_| Ok(-2.0)).unwrap();
        let w = windowed_limits(&lnx, &v, &g).unwrap();
        assert_eq!(w.lower.value, -2.0);
        assert_eq!(w.upper.value, -2.0);
        assert_eq!(w.lower.trend, Trend::Stable);
        assert_eq!(w.lower.spread, 0.0);
    }

    #[test]
    fn inverse_log_decay_is_extrapolated() {
        let g = GridSpec::default();
        let (lnx, v) = sample(&g, |x| Ok(-1.0 + 3.0 / x.ln())).unwrap();
        let w = windowed_limits(&lnx, &v, &g).unwrap();
        assert!((w.upper.value + 1.0).abs() < 1e-6, "{:?}", w.upper);
        assert!((w.lower.value + 1.0).abs() < 1e-6, "{:?}", w.lower);
        assert!(w.upper.raw > -0.9);
    }

    #[test]
    fn divergence_is_clamped() {
        let g = GridSpec::default();
        let (lnx, v) = sample(&g, |x| Ok(-x / x.ln())).unwrap();
        let w = windowed_limits(&lnx, &v, &g).unwrap();
        assert_eq!(w.upper.value, f64::NEG_INFINITY);
        assert_eq!(w.lower.value, f64::NEG_INFINITY);
    }

    #[test]
    fn oscillation_is_kept() {
        let g = GridSpec::default();
        let (lnx, v) = sample(&g, |x| Ok(x.sin())).unwrap();
        let w = windowed_limits(&lnx, &v, &g).unwrap();
        assert!(w.lower.value < -0.99 && w.upper.value > 0.99);
    }
}
