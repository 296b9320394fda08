//! A measure that spreads its mass on every other dyadic arc of a fast-growing sequence of
//! generations, so that `μ(I) ≤ w(|I|)` holds while the carrier has no `w`-modulus.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::dyadic::{DyadicArc, DyadicMeasure, MassRule, MAX_LEVEL};
use crate::error::{BlochError, Result};
use crate::majorant::Majorant;
use crate::rational::{int, to_f64, Rational};

/// Largest generation index searched before `w(t)/t` is declared bounded.
const SEARCH_LIMIT: u32 = 1 << 14;
/// Factor in the defining inequality `w(2^-n) 2^n ≥ FACTOR · 2^l`.
const FACTOR: i64 = 6;

fn first_level_with_ratio(w: &Majorant, l: u32, after: Option<u32>) -> Result<u32> {
    let target = BigInt::from(FACTOR) << l as usize;
    let start = after.map_or(0, |n| n + 1);
    (start..=SEARCH_LIMIT).find(|&n| w.ratio_at_least(n, &target)).ok_or_else(|| {
        BlochError::IneligibleMajorant(format!(
            "w(t)/t stays below {FACTOR}·2^{l} down to t = 2^-{SEARCH_LIMIT}; it must tend to infinity"
        ))
    })
}

/// `n_0 < n_1 < … < n_l`: `n_j` is the least level above `n_{j-1}` with `w(2^-n) 2^n ≥ 6·2^j`.
pub fn generation_sequence(w: &Majorant, l: u32) -> Result<Vec<u32>> {
    let mut out: Vec<u32> = Vec::with_capacity(l as usize + 1);
    for j in 0..=l {
        let n = first_level_with_ratio(w, j, out.last().copied())?;
        out.push(n);
    }
    Ok(out)
}

/// The level `n_l` of the `l`-th generation, `l ≥ 1`.
pub fn choose_generation(w: &Majorant, l: u32) -> Result<u32> {
    if l == 0 {
        return Err(BlochError::InvalidArgument("generations are numbered from 1".into()));
    }
    Ok(generation_sequence(w, l)?[l as usize])
}

/// Even splitting, except that the step into a generation level gives everything to the left
/// child.
#[derive(Clone, Debug)]
pub struct NomocRule {
    majorant: Majorant,
    levels: u32,
    /// `n_0, n_1, …` up to the last one not deeper than the maximum level.
    generations: Vec<u32>,
    transition: Vec<bool>,
    /// `(offset, rms)` of the normalized mass on a charged arc, per level.
    moments: Vec<(f64, f64)>,
}

impl NomocRule {
    fn new(w: &Majorant, levels: u32) -> Result<Self> {
        if levels == 0 {
            return Err(BlochError::InvalidArgument("the construction needs at least one generation".into()));
        }
        let declared = generation_sequence(w, levels)?;
        if declared[levels as usize] > MAX_LEVEL {
            return Err(BlochError::InvalidArgument(format!(
                "generation {levels} sits at level {}, beyond the index width ({MAX_LEVEL})",
                declared[levels as usize]
            )));
        }
        let mut generations = declared;
        loop {
            let l = generations.len() as u32;
            match first_level_with_ratio(w, l, generations.last().copied()) {
                Ok(n) if n <= MAX_LEVEL => generations.push(n),
                _ => break,
            }
        }
        let mut transition = vec![false; MAX_LEVEL as usize + 1];
        for &n in &generations[1..] {
            transition[n as usize] = true;
        }
        // Beyond the last level the mass is taken to be uniform.
        let mut moments = vec![(0.5f64, 1.0f64 / 12.0); MAX_LEVEL as usize + 1];
        for m in (0..MAX_LEVEL as usize).rev() {
            let (b, v) = moments[m + 1];
            moments[m] = if transition[m + 1] { (0.5 * b, 0.25 * v) } else { (0.25 + 0.5 * b, 0.0625 + 0.25 * v) };
        }
        for mv in &mut moments {
            mv.1 = mv.1.sqrt();
        }
        Ok(Self { majorant: w.clone(), levels, generations, transition, moments })
    }

    /// `n_0, n_1, …`, including the generations past the declared count that still fit.
    pub fn generations(&self) -> &[u32] {
        &self.generations
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    /// Level of generation `l` (`n_0` for `l = 0`).
    pub fn generation_level(&self, l: u32) -> Option<u32> {
        self.generations.get(l as usize).copied()
    }

    /// Number of generation levels `n_l` with `1 ≤ l` and `n_l ≤ level`.
    pub fn generations_up_to(&self, level: u32) -> u32 {
        self.generations[1..].iter().filter(|&&n| n <= level).count() as u32
    }

    /// Exact mass of `arc` without walking the tree: `2^{l} |arc|` on charged arcs, where `l`
    /// counts the generations not deeper than the arc, and zero elsewhere.
    pub fn closed_form_mass(&self, arc: DyadicArc) -> Rational {
        let charged = self.generations[1..]
            .iter()
            .filter(|&&n| n <= arc.level)
            .all(|&n| (arc.index >> (arc.level - n)) & 1 == 0);
        if !charged {
            return Rational::zero();
        }
        crate::rational::pow2(self.generations_up_to(arc.level)) * arc.length()
    }
}

impl MassRule for NomocRule {
    fn name(&self) -> String {
        format!("nomoc({}, levels={})", self.majorant, self.levels)
    }

    fn split(&self, arc: DyadicArc, mass: &Rational) -> Result<(Rational, Rational)> {
        if self.transition[arc.level as usize + 1] {
            Ok((mass.clone(), Rational::zero()))
        } else {
            let half = mass / int(2);
            Ok((half.clone(), half))
        }
    }

    fn split_f64(&self, arc: DyadicArc, mass: f64) -> Option<(f64, f64)> {
        if self.transition[arc.level as usize + 1] {
            Some((mass, 0.0))
        } else {
            Some((0.5 * mass, 0.5 * mass))
        }
    }

    fn moments(&self, arc: DyadicArc) -> Option<(f64, f64)> {
        Some(self.moments[arc.level as usize])
    }
}

/// The measure with `levels` declared generations. The rule keeps charging every other arc of
/// the later generations as long as they fit in the index width.
pub fn build_nomoc(w: &Majorant, levels: u32) -> Result<(DyadicMeasure, NomocRule)> {
    let rule = NomocRule::new(w, levels)?;
    let measure = DyadicMeasure::new(rule.clone(), Rational::one())?;
    Ok((measure, rule))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MocReport {
    pub depth: u32,
    /// `μ(I) ≤ w(|I|)` on every dyadic arc up to `depth`.
    pub direct: bool,
    /// `μ(I) ≤ w(|I|)/3` on every dyadic arc up to `depth`, the root included.
    pub third_all_levels: bool,
    /// First level where the construction guarantees the `w/3` bound: the least `n` with
    /// `w(2^-n) 2^n ≥ 6`. `None` if there is none.
    pub regime_start: Option<u32>,
    /// `μ(I) ≤ w(|I|)/3` on dyadic arcs from `regime_start` to `depth`.
    pub third_regime: bool,
    /// Three consecutive arcs of a level from `regime_start` on carry at most `w` of the level:
    /// this covers every arc `I` with `2^-n < |I| ≤ 2^{1-n}`.
    pub triple_regime: bool,
    /// Largest `μ(I)/w(|I|)` over all dyadic arcs up to `depth`.
    pub worst_ratio: f64,
    pub worst_arc: DyadicArc,
    /// Largest `μ(I)/w(|I|)` from `regime_start` on.
    pub worst_regime_ratio: f64,
}

impl MocReport {
    pub fn passed(&self) -> bool {
        self.direct && self.third_regime && self.triple_regime
    }
}

/// Checks the majorization `μ(I) ≤ w(|I|)` on dyadic arcs and on unions of three neighbours.
pub fn verify_moc_bound(mu: &DyadicMeasure, w: &Majorant, depth: u32) -> Result<MocReport> {
    let regime_start = first_level_with_ratio(w, 0, None).ok();
    let mut report = MocReport {
        depth,
        direct: true,
        third_all_levels: true,
        regime_start,
        third_regime: true,
        triple_regime: true,
        worst_ratio: 0.0,
        worst_arc: DyadicArc::ROOT,
        worst_regime_ratio: 0.0,
    };
    let mut masses = vec![mu.total_mass().clone()];
    for level in 0..=depth {
        if level > 0 {
            let mut next = Vec::with_capacity(masses.len() * 2);
            for (k, m) in masses.iter().enumerate() {
                let (l, r) = mu.split(DyadicArc { level: level - 1, index: k as u64 }, m)?;
                next.push(l);
                next.push(r);
            }
            masses = next;
        }
        let in_regime = regime_start.is_some_and(|n| level >= n);
        let w_level = w.at_level(level as f64);
        for (k, m) in masses.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            let r = to_f64(m) / w_level;
            if r > report.worst_ratio {
                report.worst_ratio = r;
                report.worst_arc = DyadicArc { level, index: k as u64 };
            }
            if !w.dominates(m, level, 1) {
                report.direct = false;
            }
            let third = w.dominates(m, level, 3);
            report.third_all_levels &= third;
            if in_regime {
                report.worst_regime_ratio = report.worst_regime_ratio.max(r);
                report.third_regime &= third;
            }
        }
        if in_regime && masses.len() >= 3 {
            let n = masses.len();
            for k in 0..n {
                let sum = &masses[k] + &masses[(k + 1) % n] + &masses[(k + 2) % n];
                if !sum.is_zero() && !w.dominates(&sum, level, 1) {
                    report.triple_regime = false;
                }
            }
        }
    }
    Ok(report)
}
