//! Adaptive discretization of a measure into weighted point masses, with a truncation bound
//! valid for every evaluation point in a region of the disc.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex;

use super::kernel::{distance_lower_bound, Kernel};
use super::point::DiscPoint;
use super::TransformValue;
use crate::dyadic::{circle_dist, DyadicArc, DyadicMeasure, LocalMoments, MAX_LEVEL};
use crate::error::{BlochError, Result};
use crate::rational::{ratio, to_f64, Rational};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct AtomizeOptions {
    /// Geometric refinement ratio: every leaf satisfies `|J| ≤ ratio · max(1 - |z|, dist(J, z))`.
    pub ratio: Rational,
    /// Absolute error target.
    pub abs_tol: f64,
    /// Relative error target, measured against `∫ |K| dμ`.
    pub rel_tol: f64,
    pub max_leaves: usize,
    pub max_depth: u32,
    /// Use `H ≡ c`, `H' ≡ 0` for multiples of Lebesgue measure instead of quadrature.
    pub closed_form_uniform: bool,
}

impl Default for AtomizeOptions {
    fn default() -> Self {
        Self {
            ratio: ratio(1, 4),
            abs_tol: 1e-8,
            rel_tol: 1e-10,
            max_leaves: 1 << 20,
            max_depth: MAX_LEVEL - 1,
            closed_form_uniform: true,
        }
    }
}

impl AtomizeOptions {
    /// Looser targets for bulk sampling (growth scans, area quadrature).
    pub fn coarse(rel_tol: f64) -> Self {
        Self { abs_tol: 0.0, rel_tol, ..Self::default() }
    }
}

/// Set of evaluation points `{ r e^{2πiθ} : r ∈ [r_min, r_max], θ ∈ [theta_lo, theta_lo + width] }`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub r_min: f64,
    pub r_max: f64,
    pub theta_lo: f64,
    pub width: f64,
}

impl Region {
    pub fn point<S: Scalar>(z: &DiscPoint<S>) -> Self {
        let r = z.modulus().to_f64_lossy();
        Self { r_min: r, r_max: r, theta_lo: z.theta().to_f64_lossy(), width: 0.0 }
    }

    pub fn polar_box(r_min: f64, r_max: f64, theta_lo: f64, width: f64) -> Result<Self> {
        if !(0.0 <= r_min && r_min <= r_max && r_max < 1.0 && (0.0..1.0).contains(&width)) {
            return Err(BlochError::InvalidArgument("polar box must lie inside the disc".into()));
        }
        Ok(Self { r_min, r_max, theta_lo: theta_lo.rem_euclid(1.0), width })
    }

    pub fn center(&self) -> Complex<f64> {
        let r = 0.5 * (self.r_min + self.r_max);
        Complex::from_polar(r, std::f64::consts::TAU * (self.theta_lo + 0.5 * self.width))
    }

    /// Circular distance in turns between the arc and the angular range of the region.
    fn arc_gap(&self, arc: DyadicArc) -> f64 {
        if self.r_max == 0.0 {
            return 0.5;
        }
        let c = circle_dist(arc.center_f64(), self.theta_lo + 0.5 * self.width);
        (c - 0.5 * arc.length_f64() - 0.5 * self.width).max(0.0)
    }

    fn geometric_gap(&self, arc: DyadicArc) -> f64 {
        if self.r_max == 0.0 {
            return 0.0;
        }
        self.arc_gap(arc)
    }

    fn distance_bound(&self, arc: DyadicArc) -> f64 {
        distance_lower_bound(self.r_min, self.r_max, self.arc_gap(arc))
    }
}

/// A dyadic leaf and the placement of its mass.
#[derive(Clone, Copy, Debug)]
pub struct Leaf {
    pub arc: DyadicArc,
    pub mass: f64,
    pub moments: LocalMoments,
    terminal: bool,
}

impl Leaf {
    /// Angle (turns) where the leaf's mass is placed: its barycentre.
    pub fn position(&self) -> f64 {
        self.arc.start_f64() + self.moments.offset * self.arc.length_f64()
    }

    fn sort_key(&self) -> u64 {
        self.arc.index << (MAX_LEVEL - self.arc.level)
    }

    /// Bound on `|∫_J K dμ - μ(J) K(position)|` for every `z` in the region.
    fn error(&self, kernel: Kernel, region: &Region) -> f64 {
        if self.mass == 0.0 {
            return 0.0;
        }
        let len = self.arc.length_f64();
        let (k1, k2) = kernel.derivative_bounds(region.r_max, region.distance_bound(self.arc));
        let m = self.moments;
        self.mass * (0.5 * k2 * (m.rms * m.rms + m.offset_err * m.offset_err) * len * len + k1 * m.offset_err * len)
    }
}

struct Entry {
    priority: f64,
    slot: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority).then_with(|| other.slot.cmp(&self.slot))
    }
}

/// Point masses at leaf barycentres, refined until the truncation bound of each requested kernel
/// meets its tolerance on the whole region (or a budget runs out).
#[derive(Clone, Debug)]
pub struct Atomization {
    leaves: Vec<Leaf>,
    region: Region,
    kernels: Vec<Kernel>,
    tolerance: Vec<f64>,
    truncation: Vec<f64>,
    max_level: u32,
}

fn make_leaf(measure: &DyadicMeasure, arc: DyadicArc, mass: f64, terminal: bool) -> Result<Leaf> {
    Ok(Leaf { arc, mass, moments: measure.moments(arc, mass)?, terminal })
}

pub fn atomize(measure: &DyadicMeasure, region: Region, kernels: &[Kernel], opts: &AtomizeOptions) -> Result<Atomization> {
    let r = to_f64(&opts.ratio);
    if !(r > 0.0 && r < 1.0) {
        return Err(BlochError::InvalidArgument("ratio must lie in (0, 1)".into()));
    }
    let max_depth = opts.max_depth.min(MAX_LEVEL - 1);
    let gap = 1.0 - region.r_max;

    // Geometric partition, dropping massless subtrees.
    let mut slots: Vec<Option<Leaf>> = Vec::new();
    let mut stack = vec![(DyadicArc::ROOT, to_f64(measure.total_mass()))];
    while let Some((arc, m)) = stack.pop() {
        if m <= 0.0 {
            continue;
        }
        if arc.length_f64() <= r * gap.max(region.geometric_gap(arc)) {
            slots.push(Some(make_leaf(measure, arc, m, false)?));
            continue;
        }
        if arc.level >= max_depth {
            return Err(BlochError::DepthCap { arc, max_depth });
        }
        match measure.split_f64(arc, m) {
            Ok((l, rm)) => {
                stack.push((arc.right(), rm));
                stack.push((arc.left(), l));
            }
            Err(BlochError::BeyondAuthoritativeDepth { .. }) => slots.push(Some(make_leaf(measure, arc, m, true)?)),
            Err(e) => return Err(e),
        }
    }

    let center = region.center();
    let tolerance: Vec<f64> = kernels
        .iter()
        .map(|&k| {
            let scale: f64 = slots
                .iter()
                .flatten()
                .map(|l| l.mass * k.eval(Complex::from_polar(1.0, std::f64::consts::TAU * l.position()), center).norm())
                .sum();
            opts.abs_tol.max(opts.rel_tol * scale)
        })
        .collect();
    let priority = |leaf: &Leaf| {
        kernels
            .iter()
            .zip(&tolerance)
            .map(|(&k, &t)| leaf.error(k, &region) / t.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    };

    let mut totals: Vec<f64> = kernels.iter().map(|&k| slots.iter().flatten().map(|l| l.error(k, &region)).sum()).collect();
    let mut heap: BinaryHeap<Entry> = slots
        .iter()
        .enumerate()
        .filter_map(|(slot, l)| l.as_ref().map(|l| Entry { priority: priority(l), slot }))
        .collect();
    let mut live = heap.len();
    let above = |totals: &[f64]| totals.iter().zip(&tolerance).any(|(e, t)| e > t);
    while live < opts.max_leaves {
        if !above(&totals) {
            // the running totals drift by cancellation from far above the tolerance; re-sum
            // before stopping
            for (t, &k) in totals.iter_mut().zip(kernels) {
                *t = slots.iter().flatten().map(|l| l.error(k, &region)).sum();
            }
            if !above(&totals) {
                break;
            }
        }
        let Some(Entry { slot, .. }) = heap.pop() else { break };
        let leaf = slots[slot].expect("heap entries point at live leaves");
        if leaf.terminal || leaf.arc.level >= max_depth {
            continue;
        }
        let (l, rm) = match measure.split_f64(leaf.arc, leaf.mass) {
            Ok(s) => s,
            Err(BlochError::BeyondAuthoritativeDepth { .. }) => {
                slots[slot] = Some(Leaf { terminal: true, ..leaf });
                continue;
            }
            Err(e) => return Err(e),
        };
        for (t, &k) in totals.iter_mut().zip(kernels) {
            *t -= leaf.error(k, &region);
        }
        slots[slot] = None;
        live -= 1;
        for (arc, m) in [(leaf.arc.left(), l), (leaf.arc.right(), rm)] {
            if m <= 0.0 {
                continue;
            }
            let child = make_leaf(measure, arc, m, false)?;
            for (t, &k) in totals.iter_mut().zip(kernels) {
                *t += child.error(k, &region);
            }
            heap.push(Entry { priority: priority(&child), slot: slots.len() });
            slots.push(Some(child));
            live += 1;
        }
    }

    let mut leaves: Vec<Leaf> = slots.into_iter().flatten().collect();
    leaves.sort_by_key(Leaf::sort_key);
    let truncation = kernels.iter().map(|&k| leaves.iter().map(|l| l.error(k, &region)).sum()).collect();
    let max_level = leaves.iter().map(|l| l.arc.level).max().unwrap_or(0);
    Ok(Atomization { leaves, region, kernels: kernels.to_vec(), tolerance, truncation, max_level })
}

impl Atomization {
    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    fn kernel_slot(&self, kernel: Kernel) -> Option<usize> {
        self.kernels.iter().position(|&k| k == kernel)
    }

    /// Sum of the per-leaf truncation bounds for `kernel`.
    pub fn truncation_bound(&self, kernel: Kernel) -> f64 {
        match self.kernel_slot(kernel) {
            Some(i) => self.truncation[i],
            None => self.leaves.iter().map(|l| l.error(kernel, &self.region)).sum(),
        }
    }

    /// Whether refinement reached the tolerance for `kernel`.
    pub fn certified(&self, kernel: Kernel) -> bool {
        match self.kernel_slot(kernel) {
            Some(i) => self.truncation[i] <= self.tolerance[i] * (1.0 + 1e-9),
            None => false,
        }
    }

    /// Leaf with the largest truncation bound for `kernel`.
    pub fn limiting_leaf(&self, kernel: Kernel) -> Option<DyadicArc> {
        self.leaves
            .iter()
            .max_by(|a, b| a.error(kernel, &self.region).total_cmp(&b.error(kernel, &self.region)))
            .map(|l| l.arc)
    }

    /// `∫ K(ζ, z) dμ(ζ)` for a point `z` of the region, with truncation and rounding bounds.
    pub fn evaluate<S: Scalar>(&self, kernel: Kernel, z: Complex<S>) -> TransformValue<S> {
        let eps = S::epsilon().to_f64_lossy();
        let mut sum = Complex::new(S::zero(), S::zero());
        let mut carry = Complex::new(S::zero(), S::zero());
        let mut abs_sum = 0.0f64;
        let mut rounding = 0.0f64;
        for leaf in &self.leaves {
            let phi = S::TAU() * S::lit(leaf.position());
            let zeta = Complex::new(phi.cos(), phi.sin());
            let term = kernel.eval(zeta, z) * S::lit(leaf.mass);
            // Kahan summation keeps the accumulated rounding proportional to Σ|term|.
            let y = term - carry;
            let t = sum + y;
            carry = (t - sum) - y;
            sum = t;
            let size = term.norm().to_f64_lossy();
            let (k1, _) = kernel.derivative_bounds(self.region.r_max, self.region.distance_bound(leaf.arc));
            abs_sum += size;
            rounding += 16.0 * eps * size + 4.0 * eps * leaf.mass * k1;
        }
        rounding += 4.0 * eps * abs_sum + (self.max_level as f64 + 2.0) * 1.1 * f64::EPSILON * abs_sum;
        let bound = (self.truncation_bound(kernel) + rounding) * (1.0 + 1e-6);
        TransformValue { value: sum, error_bound: S::lit(bound) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::basic::{lebesgue, point_mass};
    use crate::rational::int;

    #[test]
    fn point_mass_needs_a_single_leaf() {
        let m = point_mass(ratio(1, 3), int(1));
        let z = DiscPoint::from_parts(0.5f64, 0.25).unwrap();
        let a = atomize(&m, Region::point(&z), &[Kernel::Herglotz], &AtomizeOptions::default()).unwrap();
        assert_eq!(a.leaves().len(), 1);
        assert!(a.truncation_bound(Kernel::Herglotz) < 1e-13);
        assert!((a.leaves()[0].position() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn lebesgue_by_quadrature_is_one() {
        let z = DiscPoint::from_parts(0.3f64, 0.4).unwrap();
        let a = atomize(&lebesgue(), Region::point(&z), &[Kernel::Herglotz], &AtomizeOptions::default()).unwrap();
        assert!(a.certified(Kernel::Herglotz));
        let v = a.evaluate(Kernel::Herglotz, z.value());
        assert!((v.value - Complex::new(1.0, 0.0)).norm() <= v.error_bound);
        assert!(v.error_bound <= 1e-8);
    }

    #[test]
    fn derivative_near_the_boundary_is_certified() {
        // the running error total used to drift below the tolerance before the true sum did
        let mu = crate::construct::basic::uniform(crate::rational::ratio(7, 4));
        for (u, theta) in [(9.74266047931194f64, 0.0), (7.0, 0.3), (10.0, 0.71)] {
            let z = DiscPoint::polar(1.0 - (-u).exp2(), theta).unwrap();
            let a = atomize(&mu, Region::point(&z), &[Kernel::HerglotzPrime], &AtomizeOptions::default()).unwrap();
            assert!(a.certified(Kernel::HerglotzPrime), "u {u} theta {theta}");
            let v = a.evaluate(Kernel::HerglotzPrime, z.value());
            assert!(v.value.norm() <= v.error_bound);
        }
    }

    #[test]
    fn box_atomization_bounds_every_point_of_the_box() {
        let region = Region::polar_box(0.875, 0.9375, 0.0, 1.0 / 16.0).unwrap();
        let a = atomize(&lebesgue(), region, &[Kernel::HerglotzPrime], &AtomizeOptions::coarse(1e-6)).unwrap();
        for (r, t) in [(0.875, 0.0), (0.9375, 1.0 / 16.0), (0.9, 0.03)] {
            let z = Complex::from_polar(r, std::f64::consts::TAU * t);
            let v = a.evaluate(Kernel::HerglotzPrime, z);
            assert!(v.value.norm() <= v.error_bound, "H' of Lebesgue should vanish: {v:?}");
        }
    }
}
