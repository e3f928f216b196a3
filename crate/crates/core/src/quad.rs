//! Log-space Gauss–Kronrod quadrature.
//!
//! Integrands are supplied as `g(t) = log f(t)` so that values spanning
//! hundreds of orders of magnitude can be summed without overflow. All
//! results are returned as logarithms.

use crate::error::{Error, Result};
use crate::ext::log_add;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of one log-space quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogQuad {
    /// log of the integral (`-inf` for an identically zero integrand).
    pub log_value: f64,
    /// log of the absolute error estimate.
    pub log_err: f64,
    pub evals: usize,
}

impl LogQuad {
    pub const ZERO: LogQuad = LogQuad {
        log_value: f64::NEG_INFINITY,
        log_err: f64::NEG_INFINITY,
        evals: 0,
    };

    pub fn combine(self, other: LogQuad) -> LogQuad {
        LogQuad {
            log_value: log_add(self.log_value, other.log_value),
            log_err: log_add(self.log_err, other.log_err),
            evals: self.evals + other.evals,
        }
    }
}

/// G7/K15 on `[a, b]` for `exp(g)`.
pub fn gk15_log<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64) -> LogQuad {
    if b <= a {
        return LogQuad::ZERO;
    }
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut vals = [f64::NEG_INFINITY; 15];
    for i in 0..7 {
        vals[2 * i] = g(c - h * XGK[i]);
        vals[2 * i + 1] = g(c + h * XGK[i]);
    }
    vals[14] = g(c);
    let mut m = f64::NEG_INFINITY;
    for v in vals.iter() {
        if v.is_nan() {
            continue;
        }
        if *v > m {
            m = *v;
        }
    }
    if m == f64::NEG_INFINITY || m.is_nan() {
        return LogQuad {
            evals: 15,
            ..LogQuad::ZERO
        };
    }
    let e = |v: f64| if v.is_nan() { 0.0 } else { (v - m).exp() };
    let mut kron = WGK[7] * e(vals[14]);
    let mut gauss = WG[3] * e(vals[14]);
    for i in 0..7 {
        let pair = e(vals[2 * i]) + e(vals[2 * i + 1]);
        kron += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    let scale = m + h.ln();
    let err = (kron - gauss).abs();
    LogQuad {
        log_value: if kron > 0.0 { scale + kron.ln() } else { f64::NEG_INFINITY },
        log_err: if err > 0.0 { scale + err.ln() } else { f64::NEG_INFINITY },
        evals: 15,
    }
}

#[derive(Debug)]
struct Piece {
    a: f64,
    b: f64,
    q: LogQuad,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.q.log_err == other.q.log_err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.q
            .log_err
            .partial_cmp(&other.q.log_err)
            .unwrap_or(Ordering::Equal)
    }
}

/// Adaptive bisection driven by the largest local error estimate.
///
/// `breaks` are interior points where the integrand may be discontinuous;
/// the interval is split there before refinement starts. Fails with
/// `QuadratureFailure` once `max_evals` is exhausted above tolerance.
pub fn adaptive_log<G: Fn(f64) -> f64>(
    g: &G,
    a: f64,
    b: f64,
    breaks: &[f64],
    rel_tol: f64,
    max_evals: usize,
) -> Result<LogQuad> {
    let q = adaptive_log_lenient(g, a, b, breaks, rel_tol, max_evals);
    if q.log_err > q.log_value + rel_tol.ln() && q.log_value.is_finite() {
        return Err(Error::QuadratureFailure(format!(
            "relative error {:.3e} above {rel_tol:.1e} after {} evaluations on [{a}, {b}]",
            (q.log_err - q.log_value).exp(),
            q.evals
        )));
    }
    Ok(q)
}

/// Like [`adaptive_log`] but returns the best estimate when the budget runs out.
pub fn adaptive_log_lenient<G: Fn(f64) -> f64>(
    g: &G,
    a: f64,
    b: f64,
    breaks: &[f64],
    rel_tol: f64,
    max_evals: usize,
) -> LogQuad {
    if b <= a {
        return LogQuad::ZERO;
    }
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&t| t > a && t < b));
    cuts.push(b);
    cuts.dedup();
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    for w in cuts.windows(2) {
        let q = gk15_log(g, w[0], w[1]);
        evals += q.evals;
        heap.push(Piece { a: w[0], b: w[1], q });
    }
    loop {
        let (total, err) = heap.iter().fold(
            (f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(v, e), p| (log_add(v, p.q.log_value), log_add(e, p.q.log_err)),
        );
        let done = total == f64::NEG_INFINITY || err <= total + rel_tol.ln();
        if done || evals + 30 > max_evals {
            return LogQuad {
                log_value: total,
                log_err: err,
                evals,
            };
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval cannot be split further in floating point
            heap.push(Piece {
                q: LogQuad {
                    log_err: f64::NEG_INFINITY,
                    ..worst.q
                },
                ..worst
            });
            continue;
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let q = gk15_log(g, lo, hi);
            evals += q.evals;
            heap.push(Piece { a: lo, b: hi, q });
        }
    }
}

/// Fixed composite rule: panels no wider than `max_width`, split at `breaks`.
pub fn composite_log<G: Fn(f64) -> f64>(
    g: &G,
    a: f64,
    b: f64,
    breaks: &[f64],
    max_width: f64,
) -> LogQuad {
    if b <= a {
        return LogQuad::ZERO;
    }
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&t| t > a && t < b));
    cuts.push(b);
    let mut acc = LogQuad::ZERO;
    for w in cuts.windows(2) {
        let span = w[1] - w[0];
        if span <= 0.0 {
            continue;
        }
        let n = (span / max_width).ceil().max(1.0) as usize;
        let h = span / n as f64;
        for k in 0..n {
            let lo = w[0] + k as f64 * h;
            let hi = if k + 1 == n { w[1] } else { lo + h };
            acc = acc.combine(gk15_log(g, lo, hi));
        }
    }
    acc
}

/// G7/K15 for a signed integrand; returns `(value, error estimate)`.
pub fn gk15_real<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    if b <= a {
        return (0.0, 0.0);
    }
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let pair = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        kron += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Fixed-panel G7/K15 for a signed integrand, split at `breaks`.
pub fn composite_real<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, breaks: &[f64], max_width: f64) -> (f64, f64) {
    if b <= a {
        return (0.0, 0.0);
    }
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&t| t > a && t < b));
    cuts.push(b);
    let (mut v, mut e) = (0.0, 0.0);
    for w in cuts.windows(2) {
        let span = w[1] - w[0];
        if span <= 0.0 {
            continue;
        }
        let n = (span / max_width).ceil().max(1.0) as usize;
        let h = span / n as f64;
        for k in 0..n {
            let lo = w[0] + k as f64 * h;
            let hi = if k + 1 == n { w[1] } else { lo + h };
            let (dv, de) = gk15_real(f, lo, hi);
            v += dv;
            e += de;
        }
    }
    (v, e)
}
