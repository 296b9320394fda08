//! Exact, lazily evaluated measures on the dyadic tree of the circle.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_traits::{Signed, Zero};

use super::arc::{DyadicArc, MAX_LEVEL};
use crate::error::{BlochError, Result};
use crate::rational::{to_f64, Rational};

/// Number of levels the generic moment fallback descends before giving up on an arc.
const MOMENT_FALLBACK_LEVELS: u32 = 12;

/// Position of the mass inside an arc, in units of the arc length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalMoments {
    /// Computed barycentre, as an offset from the arc start.
    pub offset: f64,
    /// Bound on the distance from `offset` to the true barycentre.
    pub offset_err: f64,
    /// Bound on the root mean square deviation of the mass from the true barycentre.
    pub rms: f64,
}

impl LocalMoments {
    const UNKNOWN: Self = Self { offset: 0.5, offset_err: 0.5, rms: 0.5 };
    const EMPTY: Self = Self { offset: 0.5, offset_err: 0.0, rms: 0.0 };

    fn exact(offset: f64, rms: f64) -> Self {
        Self { offset, offset_err: 4.0 * f64::EPSILON, rms }
    }
}

/// The generating rule of a dyadic measure: how an arc's mass is shared between its children.
///
/// Rules must be pure: the same `(arc, mass)` always yields the same split.
pub trait MassRule: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    /// Masses of the `(left, right)` children of `arc`, given the mass of `arc`.
    fn split(&self, arc: DyadicArc, mass: &Rational) -> Result<(Rational, Rational)>;

    /// Floating-point version of [`MassRule::split`] for rules where it is cheap and accurate
    /// to a few ulps. `None` means callers must go through the exact path.
    fn split_f64(&self, _arc: DyadicArc, _mass: f64) -> Option<(f64, f64)> {
        None
    }

    /// Depth to which masses are taken from an explicit table or finite construction.
    fn authoritative_depth(&self) -> Option<u32> {
        None
    }

    /// Barycentre and spread of the restriction of the measure to `arc`, when known in closed
    /// form: `(offset, rms)` with the barycentre at `start + offset·|arc|` and the root mean
    /// square deviation from it at most `rms·|arc|`. Only asked for arcs of positive mass.
    fn moments(&self, _arc: DyadicArc) -> Option<(f64, f64)> {
        None
    }

    /// Constant density with respect to normalized arc length, for multiples of Lebesgue measure.
    fn uniform_density(&self) -> Option<Rational> {
        None
    }
}

/// A positive finite measure on the circle, known through its masses on dyadic arcs.
///
/// Cheap to clone; clones share the memo cache.
#[derive(Clone)]
pub struct DyadicMeasure {
    inner: Arc<Inner>,
}

struct Inner {
    rule: Box<dyn MassRule>,
    total_mass: Rational,
    masses: RwLock<HashMap<DyadicArc, Rational>>,
    moments: RwLock<HashMap<DyadicArc, LocalMoments>>,
}

impl fmt::Debug for DyadicMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DyadicMeasure")
            .field("rule", &self.inner.rule)
            .field("total_mass", &self.inner.total_mass)
            .finish()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyViolation {
    pub arc: DyadicArc,
    pub mass: Rational,
    pub children_sum: Rational,
}

#[derive(Clone, Debug, Default)]
pub struct ConsistencyReport {
    pub depth: u32,
    pub arcs_checked: u64,
    pub violations: Vec<ConsistencyViolation>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub theta: Rational,
    pub mass: Rational,
}

/// Point masses approximating a measure; see [`DyadicMeasure::to_atoms`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AtomList {
    pub atoms: Vec<Atom>,
}

impl AtomList {
    pub fn total_mass(&self) -> Rational {
        self.atoms.iter().map(|a| &a.mass).sum()
    }
}

impl DyadicMeasure {
    pub fn new(rule: impl MassRule + 'static, total_mass: Rational) -> Result<Self> {
        if total_mass.is_negative() {
            return Err(BlochError::InvalidArgument("total mass must be nonnegative".into()));
        }
        let mut masses = HashMap::new();
        masses.insert(DyadicArc::ROOT, total_mass.clone());
        Ok(Self {
            inner: Arc::new(Inner {
                rule: Box::new(rule),
                total_mass,
                masses: RwLock::new(masses),
                moments: RwLock::new(HashMap::new()),
            }),
        })
    }

    pub fn rule(&self) -> &dyn MassRule {
        self.inner.rule.as_ref()
    }

    pub fn name(&self) -> String {
        self.inner.rule.name()
    }

    pub fn total_mass(&self) -> &Rational {
        &self.inner.total_mass
    }

    pub fn declared_depth(&self) -> Option<u32> {
        self.inner.rule.authoritative_depth()
    }

    pub fn uniform_density(&self) -> Option<Rational> {
        self.inner.rule.uniform_density()
    }

    /// Exact mass of `arc`, memoized.
    pub fn mass(&self, arc: DyadicArc) -> Result<Rational> {
        if let Some(m) = self.inner.masses.read().expect("mass cache poisoned").get(&arc) {
            return Ok(m.clone());
        }
        // Walk up to the nearest cached ancestor, then split down.
        let mut chain = vec![arc];
        let mut known = None;
        {
            let cache = self.inner.masses.read().expect("mass cache poisoned");
            let mut cur = arc;
            while let Some(p) = cur.parent() {
                if let Some(m) = cache.get(&p) {
                    known = Some(m.clone());
                    break;
                }
                chain.push(p);
                cur = p;
            }
        }
        let top = *chain.last().expect("non-empty chain");
        let mut mass = match known {
            Some(m) => m,
            None => {
                debug_assert_eq!(top, DyadicArc::ROOT);
                self.inner.total_mass.clone()
            }
        };
        let mut cur = top.parent();
        let mut fresh = Vec::with_capacity(chain.len());
        for &a in chain.iter().rev() {
            if let Some(p) = cur {
                let (l, r) = self.inner.rule.split(p, &mass)?;
                mass = if a.is_right_child() { r } else { l };
            }
            fresh.push((a, mass.clone()));
            cur = Some(a);
        }
        let mut cache = self.inner.masses.write().expect("mass cache poisoned");
        for (a, m) in fresh {
            cache.entry(a).or_insert(m);
        }
        Ok(mass)
    }

    /// Exact `(left, right)` child masses of `arc` given its mass, bypassing the cache.
    pub fn split(&self, arc: DyadicArc, mass: &Rational) -> Result<(Rational, Rational)> {
        if arc.level >= MAX_LEVEL {
            return Err(BlochError::DepthCap { arc, max_depth: MAX_LEVEL });
        }
        if mass.is_zero() && self.inner.rule.authoritative_depth().is_none_or(|d| arc.level >= d) {
            return Ok((Rational::zero(), Rational::zero()));
        }
        self.inner.rule.split(arc, mass)
    }

    /// Floating-point child masses; uses the rule's fast path when available.
    pub fn split_f64(&self, arc: DyadicArc, mass: f64) -> Result<(f64, f64)> {
        if arc.level >= MAX_LEVEL {
            return Err(BlochError::DepthCap { arc, max_depth: MAX_LEVEL });
        }
        if let Some(s) = self.inner.rule.split_f64(arc, mass) {
            return Ok(s);
        }
        let [l, r] = arc.children();
        Ok((to_f64(&self.mass(l)?), to_f64(&self.mass(r)?)))
    }

    /// Exact masses of all `2^level` arcs at `level`, in index order.
    pub fn level_masses(&self, level: u32) -> Result<Vec<Rational>> {
        let mut cur = vec![self.inner.total_mass.clone()];
        for n in 0..level {
            let mut next = Vec::with_capacity(cur.len() * 2);
            for (k, m) in cur.iter().enumerate() {
                let (l, r) = self.split(DyadicArc { level: n, index: k as u64 }, m)?;
                next.push(l);
                next.push(r);
            }
            cur = next;
        }
        Ok(cur)
    }

    /// Depth-first visit of every arc at `depth` with nonzero mass, in index order.
    pub fn visit_nonzero(&self, depth: u32, mut f: impl FnMut(DyadicArc, &Rational)) -> Result<()> {
        let mut stack = vec![(DyadicArc::ROOT, self.inner.total_mass.clone())];
        while let Some((arc, m)) = stack.pop() {
            if m.is_zero() && self.inner.rule.authoritative_depth().is_none_or(|d| arc.level >= d) {
                continue;
            }
            if arc.level == depth {
                if !m.is_zero() {
                    f(arc, &m);
                }
                continue;
            }
            let (l, r) = self.split(arc, &m)?;
            stack.push((arc.right(), r));
            stack.push((arc.left(), l));
        }
        Ok(())
    }

    /// Lists every arc up to `depth` whose children do not sum exactly to it.
    pub fn check_consistency(&self, depth: u32) -> Result<ConsistencyReport> {
        let mut report = ConsistencyReport { depth, ..Default::default() };
        let authoritative = self.inner.rule.authoritative_depth();
        let mut stack = vec![(DyadicArc::ROOT, self.inner.total_mass.clone())];
        while let Some((arc, m)) = stack.pop() {
            if arc.level >= depth {
                continue;
            }
            // Zero subtrees of a lazy rule are zero by positivity; tables are checked everywhere.
            if m.is_zero() && authoritative.is_none_or(|d| arc.level >= d) {
                continue;
            }
            report.arcs_checked += 1;
            let (l, r) = self.inner.rule.split(arc, &m)?;
            let sum = &l + &r;
            if sum != m || l.is_negative() || r.is_negative() {
                report.violations.push(ConsistencyViolation { arc, mass: m.clone(), children_sum: sum });
            }
            stack.push((arc.right(), r));
            stack.push((arc.left(), l));
        }
        report.violations.sort_by_key(|v| v.arc);
        Ok(report)
    }

    /// One atom per nonzero arc at `depth`, placed at the arc centre `(k + 1/2) 2^-depth`.
    pub fn to_atoms(&self, depth: u32) -> Result<AtomList> {
        let mut atoms = Vec::new();
        self.visit_nonzero(depth, |arc, m| {
            let half = crate::rational::pow2_inv(depth + 1);
            atoms.push(Atom { theta: arc.start() + half, mass: m.clone() });
        })?;
        Ok(AtomList { atoms })
    }

    /// Barycentre and spread of the mass in `arc`, given its (floating) mass.
    pub fn moments(&self, arc: DyadicArc, mass: f64) -> Result<LocalMoments> {
        if mass == 0.0 {
            return Ok(LocalMoments::EMPTY);
        }
        if let Some((b, s)) = self.inner.rule.moments(arc) {
            return Ok(LocalMoments::exact(b, s));
        }
        if let Some(&hit) = self.inner.moments.read().expect("moment cache poisoned").get(&arc) {
            return Ok(hit);
        }
        let out = self.moments_recursive(arc, mass, MOMENT_FALLBACK_LEVELS)?;
        self.inner.moments.write().expect("moment cache poisoned").insert(arc, out);
        Ok(out)
    }

    fn moments_recursive(&self, arc: DyadicArc, mass: f64, levels: u32) -> Result<LocalMoments> {
        if mass == 0.0 {
            return Ok(LocalMoments::EMPTY);
        }
        if let Some((b, s)) = self.inner.rule.moments(arc) {
            return Ok(LocalMoments::exact(b, s));
        }
        if levels == 0 || arc.level + 1 >= MAX_LEVEL {
            return Ok(LocalMoments::UNKNOWN);
        }
        let (l, r) = match self.split_f64(arc, mass) {
            Ok(s) => s,
            Err(BlochError::BeyondAuthoritativeDepth { .. }) => return Ok(LocalMoments::UNKNOWN),
            Err(e) => return Err(e),
        };
        let ml = self.moments_recursive(arc.left(), l, levels - 1)?;
        let mr = self.moments_recursive(arc.right(), r, levels - 1)?;
        let (wl, wr) = (l / (l + r), r / (l + r));
        let (pl, pr) = (0.5 * ml.offset, 0.5 + 0.5 * mr.offset);
        let offset = wl * pl + wr * pr;
        let offset_err = 0.5 * (wl * ml.offset_err + wr * mr.offset_err) + 8.0 * f64::EPSILON;
        // Each child's mass sits within (rms/2) of its barycentre, which is within
        // |p - offset| + err_child/2 + offset_err of the parent's true barycentre.
        let dev = |w: f64, m: LocalMoments, p: f64| {
            let shift = (p - offset).abs() + 0.5 * m.offset_err + offset_err;
            w * (0.25 * m.rms * m.rms + shift * shift)
        };
        let rms = (dev(wl, ml, pl) + dev(wr, mr, pr)).sqrt() * (1.0 + 4.0 * f64::EPSILON);
        Ok(LocalMoments { offset, offset_err, rms: rms.min(1.0) })
    }
}
