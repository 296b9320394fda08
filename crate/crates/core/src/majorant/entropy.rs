use std::collections::HashMap;
use std::f64::consts::LN_2;

use super::Majorant;
use crate::criteria::{TailReport, Verdict};
use crate::dyadic::{DyadicClosedSet, SetGenerator};
use crate::error::{BlochError, Result};
use crate::quad::adaptive_gk15;
use crate::rational::to_f64;

/// Decrement tolerance of the Cauchy test.
const CAUCHY_TOL: f64 = 1e-3;
/// Number of successive depths the Cauchy test looks at.
const CAUCHY_DEPTHS: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyReport {
    /// Entry `n` holds the change of the entropy value from depth `n - 1` to `n`; the cumulative
    /// column is the value at depth `n`.
    pub report: TailReport,
    /// The deepest approximation has no complementary gap.
    pub measure_zero_violation: bool,
    /// Exact value for finite point sets, from the gaps between the points.
    pub limit: Option<f64>,
    /// Lebesgue measure of the deepest approximation (union of closed survivor arcs).
    pub hull_measure: f64,
}

impl EntropyReport {
    pub fn value(&self) -> f64 {
        self.report.total()
    }
}

/// `2 ∫_0^{L/2} log w(u) du`: the entropy contribution of a complementary gap of length `L`,
/// with arc-length distance to the nearer endpoint.
pub fn gap_integral(w: &Majorant, len: f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    let half = 0.5 * len.min(1.0);
    let lh = half.ln();
    // u = half · e^{-v}
    let f = |v: f64| w.ln_eval_ln(lh - v) * (-v).exp();
    let mut total = 0.0;
    let mut a = 0.0;
    for b in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0] {
        total += adaptive_gk15(f, a, b, 1e-15, 30).value;
        a = b;
    }
    2.0 * half * total
}

/// Gap lengths (in units of `2^-level`) of the complement of the closed survivor arcs.
fn gaps(survivors: &[u64], level: u32) -> Vec<u64> {
    let n = 1u64 << level;
    if survivors.is_empty() {
        return vec![n];
    }
    let mut out: Vec<u64> = survivors.windows(2).map(|p| p[1] - p[0] - 1).filter(|&g| g > 0).collect();
    let wrap = survivors[0] + n - survivors[survivors.len() - 1] - 1;
    if wrap > 0 {
        out.push(wrap);
    }
    out
}

/// `∫ log w(dist(θ, E)) dθ` over the complement of each depth-`n` approximation of `E`, for
/// `n = 1..=depth`, with a Cauchy-decrement verdict over the last four depths.
pub fn w_entropy(set: &DyadicClosedSet, w: &Majorant, depth: u32) -> Result<EntropyReport> {
    if depth > set.depth() {
        return Err(BlochError::Precondition(format!("set is defined to depth {}, not {depth}", set.depth())));
    }
    if (0..=64).any(|j| !w.ln_eval_ln(-(j as f64) * LN_2).is_finite()) {
        return Err(BlochError::InvalidArgument("w must be strictly positive on (0, 1]".into()));
    }
    let mut values = Vec::with_capacity(depth as usize);
    let mut violation = depth == 0;
    for level in 1..=depth {
        let mut cache: HashMap<u64, f64> = HashMap::new();
        let gs = gaps(set.survivors(level), level);
        if level == depth && gs.is_empty() {
            violation = true;
        }
        let scale = 0.5f64.powi(level as i32);
        let v: f64 = gs.iter().map(|&g| *cache.entry(g).or_insert_with(|| gap_integral(w, g as f64 * scale))).sum();
        values.push(v);
    }
    let mut report = TailReport::accumulate(values.iter().enumerate().map(|(i, &v)| {
        let prev = if i == 0 { 0.0 } else { values[i - 1] };
        (i as u32 + 1, v - prev, false)
    }));
    report.verdict = if violation || values.len() < CAUCHY_DEPTHS {
        Verdict::Inconclusive
    } else if values[values.len() - CAUCHY_DEPTHS..].windows(2).all(|p| (p[0] - p[1]).abs() <= CAUCHY_TOL) {
        Verdict::Converging
    } else {
        Verdict::Diverging
    };
    let limit = match set.generator() {
        Some(SetGenerator::Points(points)) => {
            let pts: Vec<f64> = points.iter().map(to_f64).collect();
            let mut total = 0.0;
            for i in 0..pts.len() {
                let next = if i + 1 < pts.len() { pts[i + 1] } else { pts[0] + 1.0 };
                total += gap_integral(w, next - pts[i]);
            }
            Some(total)
        }
        _ => None,
    };
    let hull_measure = set.survivors(depth).len() as f64 * 0.5f64.powi(depth as i32);
    Ok(EntropyReport { report, measure_zero_violation: violation, limit, hull_measure })
}
