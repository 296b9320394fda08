//! Majorants `w` (moduli of continuity), their Dini and exponent conditions, and w-entropy of
//! closed sets.

mod entropy;

use std::f64::consts::LN_2;
use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::criteria::{TailReport, Verdict};
use crate::error::{BlochError, Result};
use crate::quad::adaptive_gk15;
use crate::rational::{int, ln_abs, parse, pow2, Rational};

pub use entropy::{gap_integral, w_entropy, EntropyReport};

/// A majorant given by samples `(t, w(t))`, interpolated linearly (with `w(0) = 0`).
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedMajorant {
    points: Vec<(f64, f64)>,
}

impl TabulatedMajorant {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        points.dedup_by(|a, b| a.0 == b.0);
        points.retain(|p| p.0 > 0.0);
        if points.is_empty() {
            return Err(BlochError::InvalidArgument("majorant table is empty".into()));
        }
        if points.iter().any(|&(t, w)| !(t <= 1.0 && w.is_finite() && w >= 0.0)) {
            return Err(BlochError::InvalidArgument("table entries need t in (0, 1] and finite w >= 0".into()));
        }
        if points.last().map(|p| p.0) != Some(1.0) {
            return Err(BlochError::InvalidArgument("majorant table must include t = 1".into()));
        }
        Ok(Self { points })
    }

    /// Reads `t,w` lines; blank lines and lines starting with `#` are ignored.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).trim(csv::Trim::All).from_path(path)?;
        let mut points = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            let field = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| BlochError::Parse(format!("bad majorant table row {:?}", rec)))
            };
            points.push((field(0)?, field(1)?));
        }
        Self::new(points)
    }

    /// Smallest tabulated `t`; below it the table carries no information.
    pub fn resolution(&self) -> f64 {
        self.points[0].0
    }

    fn eval(&self, t: f64) -> f64 {
        let i = self.points.partition_point(|p| p.0 < t);
        if i < self.points.len() && self.points[i].0 == t {
            return self.points[i].1;
        }
        let (t0, w0) = if i == 0 { (0.0, 0.0) } else { self.points[i - 1] };
        let (t1, w1) = self.points[i.min(self.points.len() - 1)];
        if t1 == t0 {
            return w1;
        }
        w0 + (w1 - w0) * (t - t0) / (t1 - t0)
    }
}

/// A majorant `w` on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Majorant {
    /// `t^α`, `0 < α ≤ 1`.
    Power(Rational),
    /// `t log(e/t)`.
    TLog,
    /// `log^{-α}(e/t)`, `α > 0`.
    LogInv(Rational),
    Table(TabulatedMajorant),
}

impl fmt::Display for Majorant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Majorant::Power(a) => write!(f, "power:{a}"),
            Majorant::TLog => write!(f, "tlog"),
            Majorant::LogInv(a) => write!(f, "loginv:{a}"),
            Majorant::Table(t) => write!(f, "table({} points)", t.points.len()),
        }
    }
}

impl Majorant {
    pub fn power(alpha: Rational) -> Result<Self> {
        if !(alpha > Rational::zero() && alpha <= Rational::one()) {
            return Err(BlochError::InvalidArgument(format!("power exponent {alpha} must lie in (0, 1]")));
        }
        Ok(Majorant::Power(alpha))
    }

    pub fn loginv(alpha: Rational) -> Result<Self> {
        if !alpha.is_positive() {
            return Err(BlochError::InvalidArgument(format!("loginv exponent {alpha} must be positive")));
        }
        Ok(Majorant::LogInv(alpha))
    }

    /// Parses `power:<α>`, `tlog`, `loginv:<α>` or `table:<path>`.
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, arg) = match text.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (text.trim(), None),
        };
        let need = || arg.ok_or_else(|| BlochError::Parse(format!("majorant '{text}' needs a parameter")));
        match kind {
            "power" => Self::power(parse(need()?)?),
            "tlog" if arg.is_none() => Ok(Majorant::TLog),
            "loginv" => Self::loginv(parse(need()?)?),
            "table" => Ok(Majorant::Table(TabulatedMajorant::from_csv(Path::new(need()?))?)),
            _ => Err(BlochError::Parse(format!("unknown majorant '{text}'"))),
        }
    }

    /// `ln w(e^{lt})` for `lt = ln t ≤ 0`.
    pub fn ln_eval_ln(&self, lt: f64) -> f64 {
        if lt == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        match self {
            Majorant::Power(a) => crate::rational::to_f64(a) * lt,
            Majorant::TLog => lt + (1.0 - lt).ln(),
            Majorant::LogInv(a) => -crate::rational::to_f64(a) * (1.0 - lt).ln(),
            Majorant::Table(t) => t.eval(lt.exp()).ln(),
        }
    }

    /// `w(t)` for `t ∈ [0, 1]`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(BlochError::InvalidArgument(format!("majorant argument {t} outside [0, 1]")));
        }
        Ok(match self {
            Majorant::Table(tab) => tab.eval(t),
            _ if t == 0.0 => 0.0,
            _ => self.ln_eval_ln(t.ln()).exp(),
        })
    }

    /// `w(2^-s)`, well defined for huge `s`.
    pub fn at_level(&self, s: f64) -> f64 {
        self.ln_eval_ln(-s * LN_2).exp()
    }

    /// Smallest `t > 0` where the majorant is known, for tabulated majorants.
    pub fn resolution(&self) -> Option<f64> {
        match self {
            Majorant::Table(t) => Some(t.resolution()),
            _ => None,
        }
    }

    /// Whether `mass ≤ w(2^-level) / divisor`, decided exactly for power majorants and with
    /// outward rounding otherwise (an undecidable comparison counts as a failure).
    pub fn dominates(&self, mass: &Rational, level: u32, divisor: u32) -> bool {
        if let Majorant::Power(alpha) = self {
            // (mass · divisor)^q · 2^{level · p} ≤ 1 with α = p/q
            if let (Some(p), Some(q)) = (alpha.numer().to_u32(), alpha.denom().to_u32()) {
                let lhs = num_traits::pow(mass * int(divisor as i64), q as usize) * pow2(level * p);
                return lhs <= Rational::one();
            }
        }
        if mass.is_zero() {
            return true;
        }
        let ln_mass_upper = ln_abs(mass) + 1e-13;
        let ln_w_lower = self.ln_eval_ln(-(level as f64) * LN_2) - (divisor as f64).ln() - 1e-12 * (1.0 + level as f64);
        ln_mass_upper <= ln_w_lower
    }

    /// `ln(w(2^-n) 2^n)`, the growth of `w(t)/t` at dyadic scales.
    pub fn ln_ratio_at_level(&self, n: u32) -> f64 {
        self.ln_eval_ln(-(n as f64) * LN_2) + n as f64 * LN_2
    }

    /// Exact test of `w(2^-n) 2^n ≥ c` for power majorants and integer `c > 0`.
    pub fn ratio_at_least(&self, n: u32, c: &BigInt) -> bool {
        if let Majorant::Power(alpha) = self {
            if let (Some(p), Some(q)) = (alpha.numer().to_u32(), alpha.denom().to_u32()) {
                // 2^{n(1 - α)} ≥ c  ⟺  2^{n(q - p)} ≥ c^q
                let lhs = BigInt::one() << (n as usize * (q - p) as usize);
                return lhs >= num_traits::pow(c.clone(), q as usize);
            }
        }
        self.ln_ratio_at_level(n) >= c.to_f64().unwrap_or(f64::INFINITY).ln()
    }

    /// Structural checks on the geometric grid `t = 2^{-j/2}`, `j ≤ 2 grid_depth`.
    pub fn check_structure(&self, grid_depth: u32) -> StructureReport {
        let grid: Vec<f64> = (0..=2 * grid_depth).map(|j| -(j as f64) * 0.5 * LN_2).collect();
        let ln_w: Vec<f64> = grid.iter().map(|&lt| self.ln_eval_ln(lt)).collect();
        let positive = ln_w.iter().all(|v| v.is_finite());
        let nondecreasing = ln_w.windows(2).all(|p| p[1] <= p[0] + 1e-12);
        // w(t)/t ≤ 2 w(s)/s for s < t; the grid runs from t = 1 towards 0.
        let ln_ratio: Vec<f64> = ln_w.iter().zip(&grid).map(|(w, lt)| w - lt).collect();
        let mut subadditive = true;
        let mut running_max = f64::NEG_INFINITY;
        for lr in &ln_ratio {
            running_max = running_max.max(*lr);
            if *lr < running_max - LN_2 - 1e-12 {
                subadditive = false;
            }
        }
        StructureReport { positive, nondecreasing, subadditive_surrogate: subadditive, at_one: self.at_level(0.0) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructureReport {
    pub positive: bool,
    pub nondecreasing: bool,
    /// `w(t)/t ≤ 2 w(s)/s` for grid points `s < t`.
    pub subadditive_surrogate: bool,
    pub at_one: f64,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.positive && self.nondecreasing && self.subadditive_surrogate
    }
}

/// `w(t)` for rational `t`, to absolute accuracy `precision`.
pub fn eval_majorant(w: &Majorant, t: &Rational, precision: f64) -> Result<f64> {
    if t.is_negative() || *t > Rational::one() {
        return Err(BlochError::InvalidArgument(format!("majorant argument {t} outside [0, 1]")));
    }
    if !(precision >= 1e-13) {
        return Err(BlochError::InvalidArgument(format!("precision {precision} is below what double precision delivers")));
    }
    if t.is_zero() {
        return Ok(0.0);
    }
    match w {
        Majorant::Table(tab) => Ok(tab.eval(crate::rational::to_f64(t))),
        _ => Ok(w.ln_eval_ln(ln_abs(t)).exp()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiniResult {
    /// `∫₀¹ w(t)/t dt` when the verdict is converging.
    pub value: Option<f64>,
    /// Per-block integrals over `t ∈ [2^{-2^k}, 2^{-2^{k-1}}]` (block 0 is `[1/2, 1]`).
    pub report: TailReport,
}

impl DiniResult {
    pub fn verdict(&self) -> Verdict {
        self.report.verdict
    }
}

const DINI_MAX_BLOCKS: u32 = 62;

/// Dini integral `∫₀¹ w(t)/t dt`.
///
/// With `t = 2^{-s}` the integral becomes `ln 2 ∫₀^∞ w(2^{-s}) ds`, integrated over the blocks
/// `s ∈ [0, 1]` and `[2^{k-1}, 2^k]`. Once the block integrals decay geometrically (ratio ≤ 0.9)
/// the remaining tail is estimated from that ratio; blocks that stop decaying (ratio ≥ 0.99)
/// mean divergence.
pub fn dini_integral(w: &Majorant, tol: f64) -> Result<DiniResult> {
    if !(tol > 0.0) {
        return Err(BlochError::InvalidArgument("tolerance must be positive".into()));
    }
    let mut pieces: Vec<f64> = Vec::new();
    let mut verdict = Verdict::Inconclusive;
    let mut value = None;
    for k in 0..=DINI_MAX_BLOCKS {
        let (a, b) = if k == 0 { (0.0, 1.0) } else { (2f64.powi(k as i32 - 1), 2f64.powi(k as i32)) };
        if let Some(res) = w.resolution() {
            if b * LN_2 > -res.ln() {
                break;
            }
        }
        let piece_tol = tol * 2f64.powi(-(k as i32) - 4);
        let est = adaptive_gk15(|s: f64| w.at_level(s), a, b, piece_tol / LN_2, 40);
        pieces.push(LN_2 * est.value);
        if k < 3 {
            continue;
        }
        let n = pieces.len();
        let ratio = (pieces[n - 1] / pieces[n - 4]).powf(1.0 / 3.0);
        let sum: f64 = pieces.iter().sum();
        let rho = pieces[n - 4..].windows(2).map(|p| p[1] / p[0]).fold(ratio, f64::max);
        if pieces[n - 1] == 0.0 || rho <= crate::criteria::CONVERGING_RATIO {
            let tail = if pieces[n - 1] == 0.0 { 0.0 } else { pieces[n - 1] * rho / (1.0 - rho) };
            if tail <= 0.5 * tol {
                verdict = Verdict::Converging;
                value = Some(sum + tail);
                break;
            }
        } else if k >= 6 && ratio >= crate::criteria::DIVERGING_RATIO {
            verdict = Verdict::Diverging;
            break;
        }
    }
    let mut report = TailReport::accumulate(pieces.iter().enumerate().map(|(k, &p)| (k as u32, p, false)));
    report.verdict = verdict;
    Ok(DiniResult { value, report })
}

/// First pair `t_small < t_large` of the grid where `w(t)/t^γ` increases with `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct AaWitness {
    pub t_small: f64,
    pub t_large: f64,
    pub ratio_small: f64,
    pub ratio_large: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AaReport {
    pub passed: bool,
    pub witness: Option<AaWitness>,
}

/// Checks that `w(t)/t^γ` is non-increasing on the grid `t = 2^{-j}`, `j ≤ grid_depth`, and the
/// geometric midpoints `2^{-j-1/2}`.
pub fn aa_exponent_check(w: &Majorant, gamma: &Rational, grid_depth: u32) -> Result<AaReport> {
    if !(gamma.is_positive() && *gamma < Rational::one()) {
        return Err(BlochError::InvalidArgument("gamma must lie in (0, 1)".into()));
    }
    let g = crate::rational::to_f64(gamma);
    let ln_ratio = |j: u32| {
        let lt = -(j as f64) * 0.5 * LN_2;
        (lt, w.ln_eval_ln(lt) - g * lt)
    };
    // Walk towards 0: the ratio must never drop.
    let mut prev = ln_ratio(0);
    for j in 1..=2 * grid_depth {
        let cur = ln_ratio(j);
        if cur.1 < prev.1 - 1e-12 * (1.0 + prev.1.abs()) {
            return Ok(AaReport {
                passed: false,
                witness: Some(AaWitness {
                    t_small: cur.0.exp(),
                    t_large: prev.0.exp(),
                    ratio_small: cur.1.exp(),
                    ratio_large: prev.1.exp(),
                }),
            });
        }
        prev = cur;
    }
    Ok(AaReport { passed: true, witness: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn evaluates_examples() {
        let p = Majorant::parse("power:1/2").unwrap();
        assert!((p.eval(0.25).unwrap() - 0.5).abs() < 1e-15);
        assert!((Majorant::TLog.eval(1.0).unwrap() - 1.0).abs() < 1e-15);
        let l = Majorant::parse("loginv:2").unwrap();
        let t = (-2.0f64).exp();
        assert!((l.eval(t).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!(p.eval(1.5).is_err());
        assert_eq!(p.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn rational_evaluation_survives_underflow() {
        let p = Majorant::parse("power:1/2").unwrap();
        let t = crate::rational::pow2_inv(2000);
        let v = eval_majorant(&p, &t, 1e-12).unwrap();
        assert!((v / 2f64.powi(-1000) - 1.0).abs() < 1e-12);
        let tiny = crate::rational::pow2_inv(1 << 20);
        assert!(eval_majorant(&Majorant::parse("loginv:1").unwrap(), &tiny, 1e-12).unwrap() > 0.0);
        let l = Majorant::parse("loginv:1").unwrap();
        let v = eval_majorant(&l, &t, 1e-12).unwrap();
        assert!((v - 1.0 / (1.0 + 2000.0 * LN_2)).abs() < 1e-14);
        assert!(eval_majorant(&p, &ratio(1, 2), 1e-20).is_err());
    }

    #[test]
    fn rejects_bad_specs() {
        for s in ["power", "power:2", "power:0", "loginv:-1", "tlog:3", "cubic", "table:/nonexistent.csv"] {
            assert!(Majorant::parse(s).is_err(), "{s}");
        }
    }

    #[test]
    fn exact_domination_for_powers() {
        let p = Majorant::parse("power:1/2").unwrap();
        // 2^-7 vs sqrt(2^-8)/3 = 1/48
        assert!(p.dominates(&crate::rational::pow2_inv(7), 8, 3));
        assert!(!p.dominates(&ratio(1, 47), 8, 3));
        assert!(p.dominates(&ratio(1, 48), 8, 3));
    }

    #[test]
    fn float_domination_is_conservative() {
        let l = Majorant::parse("loginv:1").unwrap();
        let w = 1.0 / (1.0 + 4.0 * LN_2);
        assert!(l.dominates(&ratio(1, 10), 4, 1));
        assert!(!l.dominates(&Rational::from_float(w).unwrap(), 4, 1));
    }

    #[test]
    fn structure_of_standard_majorants() {
        for s in ["power:1/4", "power:1", "tlog", "loginv:2", "loginv:1/2"] {
            let r = Majorant::parse(s).unwrap().check_structure(30);
            assert!(r.passed(), "{s}: {r:?}");
            assert!((r.at_one - 1.0).abs() < 1e-15);
        }
        // w(t) = t² is not a majorant: w(t)/t grows with t.
        let square = Majorant::Table(TabulatedMajorant::new((1..=64).map(|k| (k as f64 / 64.0, (k as f64 / 64.0).powi(2))).collect()).unwrap());
        assert!(!square.check_structure(6).subadditive_surrogate);
    }

    #[test]
    fn dini_values() {
        for (s, expected) in [("power:1/2", 2.0), ("power:1/4", 4.0), ("power:3/4", 4.0 / 3.0), ("loginv:2", 1.0), ("tlog", 2.0)] {
            let d = dini_integral(&Majorant::parse(s).unwrap(), 1e-8).unwrap();
            assert_eq!(d.verdict(), Verdict::Converging, "{s}");
            assert!((d.value.unwrap() - expected).abs() < 1e-7, "{s}: {:?}", d.value);
        }
        let d = dini_integral(&Majorant::parse("loginv:1").unwrap(), 1e-8).unwrap();
        assert_eq!(d.verdict(), Verdict::Diverging);
        assert!(d.value.is_none());
        assert!(d.report.total() > 3.0);
    }

    #[test]
    fn coarse_table_is_inconclusive() {
        let tab = TabulatedMajorant::new(vec![(1e-3, 1e-3f64.sqrt()), (0.5, 0.5f64.sqrt()), (1.0, 1.0)]).unwrap();
        let d = dini_integral(&Majorant::Table(tab), 1e-8).unwrap();
        assert_eq!(d.verdict(), Verdict::Inconclusive);
    }

    #[test]
    fn aa_examples() {
        let p = Majorant::parse("power:1/2").unwrap();
        assert!(aa_exponent_check(&p, &ratio(3, 5), 30).unwrap().passed);
        let fail = aa_exponent_check(&p, &ratio(2, 5), 30).unwrap();
        assert!(!fail.passed);
        let w = fail.witness.unwrap();
        assert!(w.t_small < w.t_large && w.ratio_small < w.ratio_large);
        assert!(aa_exponent_check(&p, &ratio(1, 2), 30).unwrap().passed);
    }

    #[test]
    fn tlog_fails_aa_with_gamma_one_half() {
        // t^{1/2} log(e/t) increases on (0, 1/e), so the first violation is near t = 2^-1.5.
        let r = aa_exponent_check(&Majorant::TLog, &ratio(1, 2), 30).unwrap();
        assert!(!r.passed);
        assert!(r.witness.unwrap().t_large > 0.1);
    }
}
