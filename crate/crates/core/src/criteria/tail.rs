use serde::Serialize;
use serde_json::{json, Value};

use crate::rational::{fmt_f64, json_f64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Converging,
    Diverging,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Converging => "converging",
            Verdict::Diverging => "diverging",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Ratio at or below which the geometric fit counts as converging.
pub const CONVERGING_RATIO: f64 = 0.9;
/// Ratio at or above which the contributions count as not decaying.
pub const DIVERGING_RATIO: f64 = 0.99;

#[derive(Clone, Debug, PartialEq)]
pub struct TailEntry {
    pub index: u32,
    pub contribution: f64,
    pub cumulative: f64,
    /// Set when the contribution's own error estimate is unreliable.
    pub flagged: bool,
}

/// Per-level contributions of a truncated series with a convergence verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct TailReport {
    pub per_level: Vec<TailEntry>,
    pub verdict: Verdict,
    /// Geometric fit `(c_last / c_{last-3})^{1/3}` over the last four contributions.
    pub tail_ratio: f64,
}

/// Geometric decay rate over the last four contributions, `NaN` with fewer than four.
pub fn tail_ratio(contributions: &[f64]) -> f64 {
    let n = contributions.len();
    if n < 4 {
        return f64::NAN;
    }
    let (first, last) = (contributions[n - 4].abs(), contributions[n - 1].abs());
    match (first == 0.0, last == 0.0) {
        (true, true) => 0.0,
        (true, false) => f64::INFINITY,
        _ => (last / first).powf(1.0 / 3.0),
    }
}

impl TailReport {
    /// Builds the report from `(index, contribution, flagged)` triples with the geometric-tail
    /// verdict: converging iff the ratio is at most 0.9 and nothing is flagged, diverging iff it
    /// is at least 0.99.
    pub fn geometric(entries: impl IntoIterator<Item = (u32, f64, bool)>) -> Self {
        let mut report = Self::accumulate(entries);
        let contributions: Vec<f64> = report.per_level.iter().map(|e| e.contribution).collect();
        let r = tail_ratio(&contributions);
        let clean = report.per_level.iter().all(|e| !e.flagged);
        report.tail_ratio = r;
        report.verdict = if r.is_nan() {
            Verdict::Inconclusive
        } else if r <= CONVERGING_RATIO && clean {
            Verdict::Converging
        } else if r >= DIVERGING_RATIO {
            Verdict::Diverging
        } else {
            Verdict::Inconclusive
        };
        report
    }

    /// Running sums only; the verdict is left inconclusive for the caller to set.
    pub fn accumulate(entries: impl IntoIterator<Item = (u32, f64, bool)>) -> Self {
        let mut cumulative = 0.0;
        let per_level = entries
            .into_iter()
            .map(|(index, contribution, flagged)| {
                cumulative += contribution;
                TailEntry { index, contribution, cumulative, flagged }
            })
            .collect::<Vec<_>>();
        let contributions: Vec<f64> = per_level.iter().map(|e| e.contribution).collect();
        Self { tail_ratio: tail_ratio(&contributions), per_level, verdict: Verdict::Inconclusive }
    }

    pub fn total(&self) -> f64 {
        self.per_level.last().map_or(0.0, |e| e.cumulative)
    }

    /// Relative change of the cumulative sum over the last two entries.
    pub fn last_relative_change(&self) -> f64 {
        let n = self.per_level.len();
        if n < 2 {
            return f64::NAN;
        }
        let (a, b) = (self.per_level[n - 2].cumulative, self.per_level[n - 1].cumulative);
        ((b - a) / b).abs()
    }

    pub fn any_flagged(&self) -> bool {
        self.per_level.iter().any(|e| e.flagged)
    }

    /// `index,contribution,cumulative,flagged` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,contribution,cumulative,flagged\n");
        for e in &self.per_level {
            out.push_str(&format!("{},{},{},{}\n", e.index, fmt_f64(e.contribution), fmt_f64(e.cumulative), e.flagged));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "verdict": self.verdict.as_str(),
            "tail_ratio": json_f64(self.tail_ratio),
            "total": json_f64(self.total()),
            "per_level": self.per_level.iter().map(|e| json!({
                "index": e.index,
                "contribution": json_f64(e.contribution),
                "cumulative": json_f64(e.cumulative),
                "flagged": e.flagged,
            })).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_series_converges() {
        let r = TailReport::geometric((0..10).map(|n| (n, 0.5f64.powi(n as i32), false)));
        assert_eq!(r.verdict, Verdict::Converging);
        assert!((r.tail_ratio - 0.5).abs() < 1e-12);
        assert!((r.total() - (2.0 - 0.5f64.powi(9))).abs() < 1e-12);
    }

    #[test]
    fn constant_series_diverges() {
        let r = TailReport::geometric((0..6).map(|n| (n, 0.5, false)));
        assert_eq!(r.verdict, Verdict::Diverging);
    }

    #[test]
    fn flags_block_convergence() {
        let r = TailReport::geometric((0..6).map(|n| (n, 0.1f64.powi(n as i32), n == 2)));
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn short_series_is_inconclusive() {
        let r = TailReport::geometric([(0, 1.0, false), (1, 0.1, false)]);
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }
}
