//! Riesz-product type measure: every arc passes a fixed larger share of its mass to its right
//! child.

use num_traits::{One, Zero};

use crate::dyadic::{DyadicArc, DyadicMeasure, MassRule};
use crate::error::{BlochError, Result};
use crate::rational::{int, pow2_inv, to_f64, Rational};

#[derive(Clone, Debug)]
pub struct RieszRule {
    eta: Rational,
    left_share: Rational,
    right_share: Rational,
    moments: (f64, f64),
}

impl RieszRule {
    pub fn new(eta: Rational) -> Result<Self> {
        if !(eta > Rational::zero() && eta < Rational::one()) {
            return Err(BlochError::InvalidArgument(format!("eta = {eta} must lie in (0, 1)")));
        }
        let right_share = (Rational::one() + &eta) / int(2);
        let left_share = (Rational::one() - &eta) / int(2);
        let e = to_f64(&eta);
        // barycentre b = ρ (right share), second moment from x ↦ x/2 and x ↦ (1 + x)/2
        let moments = (0.5 * (1.0 + e), ((1.0 - e * e) / 12.0).sqrt());
        Ok(Self { eta, left_share, right_share, moments })
    }

    pub fn eta(&self) -> &Rational {
        &self.eta
    }

    /// Exact `ν(arc)`: `ρ₊^r ρ₋^s` with `r`, `s` the right and left steps from the root.
    pub fn closed_form_mass(&self, arc: DyadicArc) -> Rational {
        let r = arc.index.count_ones() as usize;
        let s = arc.level as usize - r;
        num_traits::pow(self.right_share.clone(), r) * num_traits::pow(self.left_share.clone(), s)
    }
}

impl MassRule for RieszRule {
    fn name(&self) -> String {
        format!("riesz({})", self.eta)
    }

    fn split(&self, _arc: DyadicArc, mass: &Rational) -> Result<(Rational, Rational)> {
        Ok((mass * &self.left_share, mass * &self.right_share))
    }

    fn split_f64(&self, _arc: DyadicArc, mass: f64) -> Option<(f64, f64)> {
        Some((mass * to_f64(&self.left_share), mass * to_f64(&self.right_share)))
    }

    fn moments(&self, _arc: DyadicArc) -> Option<(f64, f64)> {
        Some(self.moments)
    }
}

pub fn build_riesz(eta: Rational) -> Result<(DyadicMeasure, RieszRule)> {
    let rule = RieszRule::new(eta)?;
    Ok((DyadicMeasure::new(rule.clone(), Rational::one())?, rule))
}

/// `ν(J) ≥ |J|^{1-δ}` decided exactly: with `1 - δ = p/q`, compares `ν(J)^q` with `|J|^p`.
fn heavy(mass: &Rational, level: u32, delta: &Rational) -> bool {
    let e = Rational::one() - delta;
    let (p, q) = (e.numer().clone(), e.denom().clone());
    let (p, q): (usize, usize) = (p.try_into().expect("small exponent"), q.try_into().expect("small exponent"));
    num_traits::pow(mass.clone(), q) >= num_traits::pow(pow2_inv(level), p)
}

/// Least `k` such that the rightmost descendant of `arc` `k` levels down satisfies
/// `ν(J) ≥ |J|^{1-δ}`, searching at most `max_extra` levels. Descending to the right multiplies
/// `ν(J) / |J|^{1-δ}` by the largest possible factor, so no other descendant of the same level
/// does better.
pub fn witness_depth(rule: &RieszRule, arc: DyadicArc, delta: &Rational, max_extra: u32) -> Result<Option<u32>> {
    if !(*delta > Rational::zero() && *delta < Rational::one()) {
        return Err(BlochError::InvalidArgument(format!("delta = {delta} must lie in (0, 1)")));
    }
    let mut mass = rule.closed_form_mass(arc);
    for k in 0..=max_extra {
        if heavy(&mass, arc.level + k, delta) {
            return Ok(Some(k));
        }
        mass *= &rule.right_share;
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessReport {
    pub max_level: u32,
    pub max_extra: u32,
    pub arcs_checked: usize,
    /// Arcs without a witness within `max_extra` further levels.
    pub missing: Vec<DyadicArc>,
    /// Largest witness depth needed over all arcs, searching without the `max_extra` limit.
    pub deepest_needed: Option<u32>,
}

impl WitnessReport {
    pub fn passed(&self) -> bool {
        self.missing.is_empty()
    }
}

/// Runs [`witness_depth`] for every dyadic arc of level at most `max_level`.
pub fn witness_search(rule: &RieszRule, delta: &Rational, max_level: u32, max_extra: u32) -> Result<WitnessReport> {
    let mut report = WitnessReport { max_level, max_extra, arcs_checked: 0, missing: Vec::new(), deepest_needed: Some(0) };
    for level in 0..=max_level {
        for index in 0..DyadicArc::count(level) {
            let arc = DyadicArc { level, index };
            report.arcs_checked += 1;
            if witness_depth(rule, arc, delta, max_extra)?.is_none() {
                report.missing.push(arc);
            }
        }
        // the leftmost arc of a level has the smallest mass, hence needs the deepest witness
        let worst = witness_depth(rule, DyadicArc { level, index: 0 }, delta, 1 << 12)?;
        report.deepest_needed = match (report.deepest_needed, worst) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
    }
    Ok(report)
}
