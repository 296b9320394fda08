//! Elementary measures: multiples of Lebesgue measure, point masses, rescalings and tables.

use num_traits::{One, Zero};

use crate::dyadic::{DyadicArc, DyadicMeasure, MassRule};
use crate::error::{BlochError, Result};
use crate::rational::{int, to_f64, Rational};

/// Barycentre offset and rms spread of normalized Lebesgue measure on an arc.
pub const UNIFORM_MOMENTS: (f64, f64) = (0.5, 0.28867513459481287); // 1/sqrt(12)

/// Constant density (normalized Lebesgue measure times `density`).
#[derive(Clone, Debug)]
pub struct Uniform {
    pub density: Rational,
}

impl MassRule for Uniform {
    fn name(&self) -> String {
        if self.density.is_one() {
            "lebesgue".into()
        } else {
            format!("uniform({})", self.density)
        }
    }

    fn split(&self, _arc: DyadicArc, mass: &Rational) -> Result<(Rational, Rational)> {
        let half = mass / int(2);
        Ok((half.clone(), half))
    }

    fn split_f64(&self, _arc: DyadicArc, mass: f64) -> Option<(f64, f64)> {
        Some((0.5 * mass, 0.5 * mass))
    }

    fn moments(&self, _arc: DyadicArc) -> Option<(f64, f64)> {
        Some(UNIFORM_MOMENTS)
    }

    fn uniform_density(&self) -> Option<Rational> {
        Some(self.density.clone())
    }
}

pub fn lebesgue() -> DyadicMeasure {
    uniform(int(1))
}

pub fn uniform(density: Rational) -> DyadicMeasure {
    DyadicMeasure::new(Uniform { density: density.clone() }, density).expect("nonnegative density")
}

/// Dirac mass at `θ`; an arc owns the atom when its half-open interval contains `θ`.
#[derive(Clone, Debug)]
pub struct PointMass {
    pub theta: Rational,
}

impl MassRule for PointMass {
    fn name(&self) -> String {
        format!("atom({})", self.theta)
    }

    fn split(&self, arc: DyadicArc, mass: &Rational) -> Result<(Rational, Rational)> {
        if arc.right().half_open_contains(&self.theta) {
            Ok((Rational::zero(), mass.clone()))
        } else {
            Ok((mass.clone(), Rational::zero()))
        }
    }

    fn split_f64(&self, arc: DyadicArc, mass: f64) -> Option<(f64, f64)> {
        if arc.right().half_open_contains(&self.theta) {
            Some((0.0, mass))
        } else {
            Some((mass, 0.0))
        }
    }

    fn moments(&self, arc: DyadicArc) -> Option<(f64, f64)> {
        let offset = (&self.theta - arc.start()) * crate::rational::pow2(arc.level);
        Some((to_f64(&offset), 0.0))
    }
}

pub fn point_mass(theta: Rational, mass: Rational) -> DyadicMeasure {
    DyadicMeasure::new(PointMass { theta }, mass).expect("nonnegative mass")
}

/// `c · μ` for a rational `c > 0`.
#[derive(Clone, Debug)]
pub struct Scaled {
    pub factor: Rational,
    pub base: DyadicMeasure,
}

impl MassRule for Scaled {
    fn name(&self) -> String {
        format!("{}*{}", self.factor, self.base.name())
    }

    fn split(&self, arc: DyadicArc, mass: &Rational) -> Result<(Rational, Rational)> {
        let (l, r) = self.base.split(arc, &(mass / &self.factor))?;
        Ok((l * &self.factor, r * &self.factor))
    }

    fn split_f64(&self, arc: DyadicArc, mass: f64) -> Option<(f64, f64)> {
        let c = to_f64(&self.factor);
        let (l, r) = self.base.rule().split_f64(arc, mass / c)?;
        Some((l * c, r * c))
    }

    fn authoritative_depth(&self) -> Option<u32> {
        self.base.declared_depth()
    }

    fn moments(&self, arc: DyadicArc) -> Option<(f64, f64)> {
        self.base.rule().moments(arc)
    }

    fn uniform_density(&self) -> Option<Rational> {
        self.base.uniform_density().map(|d| d * &self.factor)
    }
}

pub fn scaled(factor: Rational, base: &DyadicMeasure) -> Result<DyadicMeasure> {
    if factor <= Rational::zero() {
        return Err(BlochError::InvalidArgument("scaling factor must be positive".into()));
    }
    let total = base.total_mass() * &factor;
    DyadicMeasure::new(Scaled { factor, base: base.clone() }, total)
}

/// Explicit masses for every arc up to `depth`; optionally uniform inside each leaf beyond it.
#[derive(Clone, Debug)]
pub struct TableRule {
    levels: Vec<Vec<Rational>>,
    extend_uniform: bool,
}

impl TableRule {
    /// Builds all coarser levels by summing the `2^depth` leaf masses.
    pub fn from_leaves(depth: u32, leaves: Vec<Rational>, extend_uniform: bool) -> Result<Self> {
        if leaves.len() as u64 != DyadicArc::count(depth) {
            return Err(BlochError::InvalidArgument(format!(
                "expected {} leaf masses at depth {depth}, got {}",
                DyadicArc::count(depth),
                leaves.len()
            )));
        }
        if leaves.iter().any(|m| *m < Rational::zero()) {
            return Err(BlochError::InvalidArgument("masses must be nonnegative".into()));
        }
        let mut levels = vec![leaves];
        while levels[0].len() > 1 {
            let up = levels[0].chunks(2).map(|p| &p[0] + &p[1]).collect();
            levels.insert(0, up);
        }
        Ok(Self { levels, extend_uniform })
    }

    pub fn depth(&self) -> u32 {
        (self.levels.len() - 1) as u32
    }

    pub fn total(&self) -> Rational {
        self.levels[0][0].clone()
    }

    /// Overwrites one stored mass (used to build deliberately inconsistent tables).
    pub fn set(&mut self, arc: DyadicArc, mass: Rational) {
        self.levels[arc.level as usize][arc.index as usize] = mass;
    }
}

impl MassRule for TableRule {
    fn name(&self) -> String {
        format!("table(depth {})", self.depth())
    }

    fn split(&self, arc: DyadicArc, mass: &Rational) -> Result<(Rational, Rational)> {
        if arc.level < self.depth() {
            let next = &self.levels[arc.level as usize + 1];
            let k = 2 * arc.index as usize;
            return Ok((next[k].clone(), next[k + 1].clone()));
        }
        if self.extend_uniform {
            let half = mass / int(2);
            return Ok((half.clone(), half));
        }
        Err(BlochError::BeyondAuthoritativeDepth { arc: arc.left(), depth: self.depth() })
    }

    fn split_f64(&self, arc: DyadicArc, mass: f64) -> Option<(f64, f64)> {
        if arc.level < self.depth() {
            let next = &self.levels[arc.level as usize + 1];
            let k = 2 * arc.index as usize;
            return Some((to_f64(&next[k]), to_f64(&next[k + 1])));
        }
        self.extend_uniform.then_some((0.5 * mass, 0.5 * mass))
    }

    fn authoritative_depth(&self) -> Option<u32> {
        Some(self.depth())
    }

    fn moments(&self, arc: DyadicArc) -> Option<(f64, f64)> {
        (self.extend_uniform && arc.level >= self.depth()).then_some(UNIFORM_MOMENTS)
    }
}

pub fn table(depth: u32, leaves: Vec<Rational>, extend_uniform: bool) -> Result<DyadicMeasure> {
    let rule = TableRule::from_leaves(depth, leaves, extend_uniform)?;
    let total = rule.total();
    DyadicMeasure::new(rule, total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn scaling_is_exact() {
        let m = point_mass(ratio(1, 3), int(1));
        let s = scaled(ratio(7, 5), &m).unwrap();
        let a = DyadicArc::new(6, 21).unwrap();
        assert_eq!(s.mass(a).unwrap(), m.mass(a).unwrap() * ratio(7, 5));
        assert!(s.check_consistency(8).unwrap().passed());
    }

    #[test]
    fn point_mass_barycenter_is_the_point() {
        let m = point_mass(ratio(1, 3), int(1));
        let a = DyadicArc::new(2, 1).unwrap();
        let mo = m.moments(a, to_f64(&m.mass(a).unwrap())).unwrap();
        assert!((mo.offset - (1.0 / 3.0 - 0.25) * 4.0).abs() < 1e-15);
        assert_eq!(mo.rms, 0.0);
    }

    #[test]
    fn table_moments_fall_back_to_recursion() {
        // all mass in the left quarter, uniform there
        let m = table(2, vec![int(1), int(0), int(0), int(0)], true).unwrap();
        let mo = m.moments(DyadicArc::ROOT, 1.0).unwrap();
        assert!((mo.offset - 0.125).abs() < 1e-12);
        assert!(mo.rms >= 0.25 / 12f64.sqrt() - 1e-12 && mo.rms < 0.1);
    }

    #[test]
    fn table_extends_uniformly_when_asked() {
        let m = table(1, vec![ratio(1, 4), ratio(3, 4)], true).unwrap();
        assert_eq!(m.mass(DyadicArc::new(3, 7).unwrap()).unwrap(), ratio(3, 16));
    }
}
