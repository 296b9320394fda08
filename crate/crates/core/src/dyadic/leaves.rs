use super::arc::{DyadicArc, MAX_LEVEL};
use crate::error::{BlochError, Result};
use crate::rational::{to_f64, Rational};
use crate::scalar::Scalar;
use crate::transform::DiscPoint;

/// Partition of the circle into dyadic arcs, each satisfying
/// `|J| <= ratio * max(1 - |z|, dist(J, z/|z|))`, so arcs get finer towards the radial projection
/// of `z`. Arcs are returned in increasing `θ` order.
pub fn adaptive_leaves<S: Scalar>(z: &DiscPoint<S>, ratio: &Rational, max_depth: u32) -> Result<Vec<DyadicArc>> {
    let r = to_f64(ratio);
    if !(r > 0.0 && r < 1.0) {
        return Err(BlochError::InvalidArgument("ratio must lie in (0, 1)".into()));
    }
    let max_depth = max_depth.min(MAX_LEVEL);
    let gap = z.boundary_gap().to_f64_lossy();
    let theta = z.theta().to_f64_lossy();
    let at_origin = z.modulus() == S::zero();
    let mut out = Vec::new();
    let mut stack = vec![DyadicArc::ROOT];
    while let Some(arc) = stack.pop() {
        let dist = if at_origin { 0.0 } else { arc.circular_distance_to(theta) };
        if arc.length_f64() <= r * gap.max(dist) {
            out.push(arc);
            continue;
        }
        if arc.level >= max_depth {
            return Err(BlochError::DepthCap { arc, max_depth });
        }
        stack.push(arc.right());
        stack.push(arc.left());
    }
    Ok(out)
}
