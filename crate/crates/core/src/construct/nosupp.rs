//! A measure carried by a given closed null set `E`: mass splits evenly while both children meet
//! `E` and goes entirely to the meeting child otherwise.

use num_traits::{One, Zero};

use crate::dyadic::{DyadicArc, DyadicClosedSet, DyadicMeasure, Keep, MassRule, SetGenerator, MAX_LEVEL};
use crate::error::{BlochError, Result};
use crate::rational::{int, pow2, to_f64, Rational};

#[derive(Clone, Debug)]
pub struct NosuppRule {
    set: DyadicClosedSet,
    /// Per-level `(offset, rms)` for pattern sets.
    pattern_moments: Option<Vec<(f64, f64)>>,
}

impl NosuppRule {
    fn new(set: DyadicClosedSet) -> Self {
        let pattern_moments = match set.generator() {
            Some(SetGenerator::Pattern { prefix, cycle }) => Some(pattern_moments(prefix, cycle)),
            _ => None,
        };
        Self { set, pattern_moments }
    }
}

fn keep_at(prefix: &[Keep], cycle: &[Keep], level: u32) -> Keep {
    let step = (level - 1) as usize;
    if step < prefix.len() {
        prefix[step]
    } else {
        cycle[(step - prefix.len()) % cycle.len()]
    }
}

/// Moments of the normalized mass on a charged arc, level by level. The rule is the same on
/// every charged arc of a level, so one recursion from far below the index width suffices.
fn pattern_moments(prefix: &[Keep], cycle: &[Keep]) -> Vec<(f64, f64)> {
    let bottom = MAX_LEVEL + 64;
    let mut cur = (0.5f64, 1.0f64 / 12.0);
    let mut out = vec![(0.0, 0.0); MAX_LEVEL as usize + 1];
    for m in (0..bottom).rev() {
        let (b, v) = cur;
        cur = match keep_at(prefix, cycle, m + 1) {
            Keep::Both => (0.25 + 0.5 * b, 0.0625 + 0.25 * v),
            Keep::Left => (0.5 * b, 0.25 * v),
            Keep::Right => (0.5 + 0.5 * b, 0.25 * v),
        };
        if m <= MAX_LEVEL {
            out[m as usize] = (cur.0, cur.1.sqrt());
        }
    }
    out
}

impl MassRule for NosuppRule {
    fn name(&self) -> String {
        "nosupp".into()
    }

    fn split(&self, arc: DyadicArc, mass: &Rational) -> Result<(Rational, Rational)> {
        let [l, r] = arc.children();
        Ok(match (self.set.meets(l), self.set.meets(r)) {
            (true, true) => {
                let half = mass / int(2);
                (half.clone(), half)
            }
            (true, false) => (mass.clone(), Rational::zero()),
            (false, true) => (Rational::zero(), mass.clone()),
            (false, false) => {
                return Err(BlochError::Precondition(format!("charged arc {arc} has no child meeting the set")));
            }
        })
    }

    fn moments(&self, arc: DyadicArc) -> Option<(f64, f64)> {
        match self.set.generator() {
            Some(SetGenerator::Points(points)) => {
                let start = arc.start();
                let end = &start + arc.length();
                let inside: Vec<&Rational> = points.iter().filter(|p| **p >= start && **p <= end).collect();
                match inside.as_slice() {
                    [p] => Some((to_f64(&((*p - &start) * pow2(arc.level))), 0.0)),
                    _ => None,
                }
            }
            Some(SetGenerator::Pattern { .. }) => self.pattern_moments.as_ref().map(|m| m[arc.level as usize]),
            None => None,
        }
    }
}

/// The coverings `G_0 = {circle}, G_1, …` of `E`. Inside each arc `I` of `G_k`, the maximal
/// dyadic subarcs with a child missing `E` tile `I`; their meeting children form `G_{k+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coverings {
    pub generations: Vec<Vec<DyadicArc>>,
    /// `tilde[k]`: the maximal subarcs found inside the arcs of `generations[k]`.
    pub tilde: Vec<Vec<DyadicArc>>,
    /// Whether the search for the next generation ran into the depth limit.
    pub truncated: bool,
}

impl Coverings {
    fn build(set: &DyadicClosedSet, depth: u32) -> Self {
        let mut generations = vec![vec![DyadicArc::ROOT]];
        let mut tilde = Vec::new();
        loop {
            let current = generations.last().expect("G_0 present");
            let mut next = Vec::new();
            let mut found = Vec::new();
            let mut truncated = false;
            for &i in current {
                let mut stack = vec![i];
                while let Some(j) = stack.pop() {
                    if j.level >= depth {
                        truncated = true;
                        continue;
                    }
                    let [l, r] = j.children();
                    match (set.meets(l), set.meets(r)) {
                        (true, true) => {
                            stack.push(r);
                            stack.push(l);
                        }
                        (true, false) => {
                            found.push(j);
                            next.push(l);
                        }
                        (false, true) => {
                            found.push(j);
                            next.push(r);
                        }
                        (false, false) => {}
                    }
                }
            }
            if truncated || next.is_empty() {
                return Self { generations, tilde, truncated };
            }
            next.sort();
            found.sort();
            generations.push(next);
            tilde.push(found);
        }
    }

    /// Completed generations beyond `G_0`.
    pub fn count(&self) -> usize {
        self.generations.len() - 1
    }
}

#[derive(Clone, Debug)]
pub struct NosuppConstruction {
    pub measure: DyadicMeasure,
    pub set: DyadicClosedSet,
    pub coverings: Coverings,
}

/// Builds the measure on `E` and the coverings reachable within `depth` levels.
pub fn build_nosupp(set: &DyadicClosedSet, depth: u32) -> Result<NosuppConstruction> {
    let set = if depth == set.depth() { set.clone() } else { set.with_depth(depth)? };
    // A deepest generation without gaps leaves no evidence that E is null.
    if depth > 0 && set.survivors(depth).len() as u64 == DyadicArc::count(depth) {
        return Err(BlochError::MeasureZeroViolation { level: depth });
    }
    let measure = DyadicMeasure::new(NosuppRule::new(set.clone()), Rational::one())?;
    let coverings = Coverings::build(&set, depth);
    Ok(NosuppConstruction { measure, set, coverings })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NosuppReport {
    /// `μ(I) ≥ |I|` on every arc meeting `E`, up to the set depth.
    pub dense_on_set: bool,
    /// `μ(I) = 0` on every arc missing `E`, up to the set depth.
    pub null_off_set: bool,
    /// `μ(I)/|I| ≥ 2^k` on every arc of `G_k`.
    pub covering_density: bool,
    /// `Σ_{J ∈ G_{k+1}, J ⊂ I} |J| = |I|/2` for every `I ∈ G_k`, exactly.
    pub packing: bool,
    /// Smallest `μ(I)/(2^k |I|)` over the covering arcs.
    pub min_density_margin: f64,
}

impl NosuppReport {
    pub fn passed(&self) -> bool {
        self.dense_on_set && self.null_off_set && self.covering_density && self.packing
    }
}

impl NosuppConstruction {
    pub fn check(&self) -> Result<NosuppReport> {
        let mu = &self.measure;
        let mut dense = true;
        let mut null_off = true;
        for level in 0..=self.set.depth() {
            let mut charged = Rational::zero();
            for arc in self.set.survivor_arcs(level) {
                let m = mu.mass(arc)?;
                dense &= m >= arc.length();
                charged += m;
            }
            // total mass 1 on the meeting arcs leaves nothing for the others
            null_off &= charged == Rational::one();
        }
        let mut density = true;
        let mut margin = f64::INFINITY;
        for (k, gen) in self.coverings.generations.iter().enumerate() {
            for &arc in gen {
                let d = mu.mass(arc)? / arc.length();
                let need = pow2(k as u32);
                density &= d >= need;
                margin = margin.min(to_f64(&(d / need)));
            }
        }
        let mut packing = true;
        for (k, gen) in self.coverings.generations.iter().enumerate().take(self.coverings.count()) {
            let next = &self.coverings.generations[k + 1];
            for i in gen {
                let sum: Rational = next.iter().filter(|j| i.contains(j)).map(|j| j.length()).sum();
                packing &= sum * int(2) == i.length();
            }
        }
        Ok(NosuppReport { dense_on_set: dense, null_off_set: null_off, covering_density: density, packing, min_density_margin: margin })
    }
}
