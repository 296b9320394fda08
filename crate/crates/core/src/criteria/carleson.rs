//! Carleson boxes, dyadic Carleson sums, and area integrals of `|S_μ'|` over top halves.

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;

use super::tail::TailReport;
use crate::dyadic::{DyadicArc, DyadicClosedSet, DyadicMeasure};
use crate::error::{BlochError, Result};
use crate::rational::Rational;
use crate::transform::{atomize, singular_from_herglotz, AtomizeOptions, Kernel, Region};

/// The Carleson square `Q_I = {z : z/|z| ∈ I, 1 - |z| ≤ |I|}` over a dyadic arc and its top half
/// `T_I = {z ∈ Q_I : 1 - |z| ≥ |I|/2}`; the children's squares tile `Q_I ∖ T_I`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CarlesonBox {
    pub arc: DyadicArc,
}

impl CarlesonBox {
    pub fn new(arc: DyadicArc) -> Self {
        Self { arc }
    }

    fn angle_in_arc(&self, z: Complex<f64>) -> bool {
        let theta = (z.arg() / std::f64::consts::TAU).rem_euclid(1.0);
        theta >= self.arc.start_f64() && theta <= self.arc.end_f64()
    }

    pub fn contains(&self, z: Complex<f64>) -> bool {
        let gap = 1.0 - z.norm();
        gap > 0.0 && gap <= self.arc.length_f64() && self.angle_in_arc(z)
    }

    pub fn top_half_contains(&self, z: Complex<f64>) -> bool {
        self.contains(z) && 1.0 - z.norm() >= 0.5 * self.arc.length_f64()
    }

    /// `T_I` as a polar box of the disc.
    pub fn top_half(&self) -> Region {
        let len = self.arc.length_f64();
        Region { r_min: 1.0 - len, r_max: 1.0 - 0.5 * len, theta_lo: self.arc.start_f64(), width: len }
    }
}

/// `Σ_{n ≤ depth} #{I of level n meeting E} 2^-n`, level by level, with a geometric verdict.
pub fn carleson_sum(set: &DyadicClosedSet, depth: u32) -> Result<TailReport> {
    if depth > set.depth() {
        return Err(BlochError::Precondition(format!("set is defined to depth {}, not {depth}", set.depth())));
    }
    Ok(TailReport::geometric(
        (0..=depth).map(|n| (n, set.survivors(n).len() as f64 * 0.5f64.powi(n as i32), false)),
    ))
}

/// The same sum in exact arithmetic.
pub fn carleson_sum_exact(set: &DyadicClosedSet, depth: u32) -> Result<Rational> {
    if depth > set.depth() {
        return Err(BlochError::Precondition(format!("set is defined to depth {}, not {depth}", set.depth())));
    }
    Ok((0..=depth).map(|n| Rational::from_integer(set.survivors(n).len().into()) * crate::rational::pow2_inv(n)).sum())
}

/// The arcs of positive mass, level by level: the dyadic hull of the support.
pub fn support_hull(mu: &DyadicMeasure, depth: u32) -> Result<DyadicClosedSet> {
    let mut levels = vec![Vec::new(); depth as usize + 1];
    let mut stack = vec![(DyadicArc::ROOT, mu.total_mass().clone())];
    while let Some((arc, m)) = stack.pop() {
        if m.is_zero() {
            continue;
        }
        levels[arc.level as usize].push(arc.index);
        if arc.level < depth {
            let (l, r) = mu.split(arc, &m)?;
            stack.push((arc.right(), r));
            stack.push((arc.left(), l));
        }
    }
    DyadicClosedSet::from_survivors(levels)
}

/// Tensor midpoint rule for the area integrals.
#[derive(Clone, Debug)]
pub struct QuadOptions {
    /// Nodes per direction on the coarse grid; the refined grid doubles it.
    pub nodes: usize,
    pub atomize: AtomizeOptions,
    /// Quadrature error above this fraction of a level's contribution flags the level.
    pub flag_fraction: f64,
    /// How often a box may be bisected (in both directions) to meet a quarter of that fraction.
    pub max_splits: u32,
    /// Errors below this share of the series total are not flagged: they cannot move the sum.
    pub negligible_share: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { nodes: 8, atomize: AtomizeOptions::coarse(1e-6), flag_fraction: 0.1, max_splits: 4, negligible_share: 1e-4 }
    }
}

/// `∫_{T_I} |S_μ'| dA` with Lebesgue area measure on the unit disc.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxIntegral {
    /// Richardson combination `(4 Q_2n - Q_n) / 3` of the two midpoint sums.
    pub value: f64,
    /// `|Q_2n - Q_n| / 3` plus the transform error carried through the quadrature.
    pub error: f64,
}

fn midpoint_sum(region: &Region, nodes: usize, f: &impl Fn(Complex<f64>) -> (f64, f64)) -> (f64, f64) {
    let dr = (region.r_max - region.r_min) / nodes as f64;
    let dt = region.width / nodes as f64;
    let weight = dr * dt * std::f64::consts::TAU;
    let (mut sum, mut err) = (0.0, 0.0);
    for i in 0..nodes {
        let r = region.r_min + (i as f64 + 0.5) * dr;
        for j in 0..nodes {
            let theta = region.theta_lo + (j as f64 + 0.5) * dt;
            let (v, e) = f(Complex::from_polar(r, std::f64::consts::TAU * theta));
            sum += weight * r * v;
            err += weight * r * e;
        }
    }
    (sum, err)
}

fn richardson(region: &Region, nodes: usize, f: &impl Fn(Complex<f64>) -> (f64, f64)) -> (f64, f64, f64) {
    let (coarse, e1) = midpoint_sum(region, nodes, f);
    let (fine, e2) = midpoint_sum(region, 2 * nodes, f);
    ((4.0 * fine - coarse) / 3.0, (fine - coarse).abs() / 3.0, (4.0 * e2 + e1) / 3.0)
}

/// Richardson step on one polar box. While the error estimate exceeds `fraction` of the value,
/// the box is bisected in both directions and each quarter gets a quarter of the error budget.
fn adaptive_box(region: &Region, nodes: usize, fraction: f64, splits: u32, f: &impl Fn(Complex<f64>) -> (f64, f64)) -> BoxIntegral {
    let (value, quad_err, carried) = richardson(region, nodes, f);
    refine(region, nodes, fraction * value.abs(), splits, (value, quad_err, carried), f)
}

fn refine(
    region: &Region,
    nodes: usize,
    budget: f64,
    splits: u32,
    (value, quad_err, carried): (f64, f64, f64),
    f: &impl Fn(Complex<f64>) -> (f64, f64),
) -> BoxIntegral {
    // subdivision cannot reduce the carried transform error
    if quad_err + carried <= budget || splits == 0 || quad_err <= carried {
        return BoxIntegral { value, error: quad_err + carried };
    }
    let (hr, hw) = (0.5 * (region.r_max - region.r_min), 0.5 * region.width);
    let mut out = BoxIntegral { value: 0.0, error: 0.0 };
    for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let sub = Region {
            r_min: region.r_min + i as f64 * hr,
            r_max: region.r_min + (i + 1) as f64 * hr,
            theta_lo: region.theta_lo + j as f64 * hw,
            width: hw,
        };
        let part = refine(&sub, nodes, 0.25 * budget, splits - 1, richardson(&sub, nodes, f), f);
        out.value += part.value;
        out.error += part.error;
    }
    out
}

/// Integral of `|S_μ'|` over the top half of the Carleson box of `arc`.
pub fn top_half_integral(mu: &DyadicMeasure, arc: DyadicArc, quad: &QuadOptions) -> Result<BoxIntegral> {
    if quad.atomize.closed_form_uniform && mu.uniform_density().is_some() {
        return Ok(BoxIntegral { value: 0.0, error: 0.0 });
    }
    let region = CarlesonBox::new(arc).top_half();
    let kernels = [Kernel::Herglotz, Kernel::HerglotzPrime];
    let a = atomize(mu, region, &kernels, &quad.atomize)?;
    for k in kernels {
        if !a.certified(k) {
            return Err(BlochError::Uncertifiable { arc: a.limiting_leaf(k).unwrap_or(DyadicArc::ROOT) });
        }
    }
    let integrand = |z: Complex<f64>| {
        let (_, sp) = singular_from_herglotz(a.evaluate(Kernel::Herglotz, z), a.evaluate(Kernel::HerglotzPrime, z));
        (sp.value.norm(), sp.error_bound)
    };
    Ok(adaptive_box(&region, quad.nodes, 0.25 * quad.flag_fraction, quad.max_splits, &integrand))
}

#[derive(Clone, Debug, PartialEq)]
pub struct W1Report {
    /// Per level `n`: `Σ_{I ∩ E ≠ ∅, |I| = 2^-n} ∫_{T_I} |S_μ'| dA`.
    pub report: TailReport,
    pub per_level_error: Vec<f64>,
    pub boxes: usize,
}

/// Truncations of `Σ_{I ∩ E ≠ ∅} ∫_{T_I} |S_μ'| dA` over the dyadic arcs of levels `≤ depth`,
/// whose finiteness characterizes membership of `S_μ` in `W¹` for `μ` carried by `E`.
pub fn w1_report(mu: &DyadicMeasure, set: &DyadicClosedSet, depth: u32, quad: &QuadOptions) -> Result<W1Report> {
    if depth > set.depth() {
        return Err(BlochError::Precondition(format!("set is defined to depth {}, not {depth}", set.depth())));
    }
    let carried: Rational = set.survivor_arcs(depth).map(|a| mu.mass(a)).collect::<Result<Vec<_>>>()?.into_iter().sum();
    if carried != *mu.total_mass() {
        return Err(BlochError::Precondition(format!(
            "the measure puts mass {} outside the depth-{depth} hull of the set",
            mu.total_mass() - carried
        )));
    }
    let mut levels = Vec::new();
    let mut boxes = 0;
    for n in 0..=depth {
        let arcs: Vec<DyadicArc> = set.survivor_arcs(n).collect();
        boxes += arcs.len();
        let parts = arcs.par_iter().map(|&a| top_half_integral(mu, a, quad)).collect::<Result<Vec<_>>>()?;
        let value: f64 = parts.iter().map(|b| b.value).sum();
        let error: f64 = parts.iter().map(|b| b.error).sum();
        levels.push((value, error));
    }
    let total: f64 = levels.iter().map(|l| l.0).sum();
    let entries = levels.iter().enumerate().map(|(n, &(value, error))| {
        let flagged = error > quad.flag_fraction * value.abs() && error > quad.negligible_share * total.abs();
        (n as u32, value, flagged)
    });
    let errors = levels.iter().map(|l| l.1).collect();
    Ok(W1Report { report: TailReport::geometric(entries), per_level_error: errors, boxes })
}

#[derive(Clone, Debug, PartialEq)]
pub struct QboxReport {
    pub estimate: f64,
    pub error: f64,
    /// `estimate / |I|`.
    pub ratio: f64,
    pub depth_cap: u32,
    /// Sum over the subarcs of each level, from the level of `I` down to the cap.
    pub per_level: Vec<f64>,
    /// `estimate` plus a geometric extrapolation of the levels below the cap, when the last
    /// levels decay.
    pub extrapolated: Option<f64>,
}

/// `∫_{Q_I} |S_μ'| dA` for an arc of zero mass, summing the top halves of all dyadic subarcs of
/// `I` down to `depth_cap`.
pub fn qbox_check(mu: &DyadicMeasure, arc: DyadicArc, depth_cap: u32, quad: &QuadOptions) -> Result<QboxReport> {
    if !mu.mass(arc)?.is_zero() {
        return Err(BlochError::Precondition(format!("arc {arc} carries mass {}", mu.mass(arc)?)));
    }
    if depth_cap < arc.level {
        return Err(BlochError::InvalidArgument(format!("depth cap {depth_cap} is above the arc level {}", arc.level)));
    }
    let mut per_level = Vec::new();
    let mut error = 0.0;
    for n in arc.level..=depth_cap {
        let shift = n - arc.level;
        let first = arc.index << shift;
        let subarcs: Vec<DyadicArc> = (first..first + (1u64 << shift)).map(|index| DyadicArc { level: n, index }).collect();
        let parts = subarcs.par_iter().map(|&a| top_half_integral(mu, a, quad)).collect::<Result<Vec<_>>>()?;
        per_level.push(parts.iter().map(|b| b.value).sum::<f64>());
        error += parts.iter().map(|b| b.error).sum::<f64>();
    }
    let estimate: f64 = per_level.iter().sum();
    let r = super::tail::tail_ratio(&per_level);
    let extrapolated = (r < 1.0).then(|| estimate + per_level.last().copied().unwrap_or(0.0) * r / (1.0 - r));
    Ok(QboxReport { estimate, error, ratio: estimate / arc.length_f64(), depth_cap, per_level, extrapolated })
}

/// `|S_μ'(z)|` for the unit point mass at `θ = 0`: `2/|1 - z|² · exp(-Re (1+z)/(1-z))`.
pub fn atom_singular_derivative_norm(z: Complex<f64>) -> f64 {
    let one = Complex::new(1.0, 0.0);
    let h = (one + z) / (one - z);
    2.0 / (one - z).norm_sqr() * (-h.re).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::basic::{lebesgue, point_mass};
    use crate::rational::{int, ratio};

    #[test]
    fn boxes_nest() {
        let b = CarlesonBox::new(DyadicArc::new(2, 1).unwrap());
        let z = Complex::from_polar(1.0 - 0.2, std::f64::consts::TAU * 0.3);
        assert!(b.contains(z) && b.top_half_contains(z));
        let child = CarlesonBox::new(DyadicArc::new(3, 2).unwrap());
        let w = Complex::from_polar(1.0 - 0.1, std::f64::consts::TAU * 0.3);
        assert!(b.contains(w) && !b.top_half_contains(w) && child.contains(w) && child.top_half_contains(w));
    }

    #[test]
    fn carleson_sums_of_points() {
        let one = DyadicClosedSet::from_points(vec![ratio(1, 3)], 12).unwrap();
        let r = carleson_sum(&one, 12).unwrap();
        assert!((r.total() - (2.0 - 0.5f64.powi(12))).abs() < 1e-15);
        let dyadic = DyadicClosedSet::from_points(vec![ratio(1, 2)], 12).unwrap();
        assert_eq!(carleson_sum_exact(&dyadic, 12).unwrap(), int(3) - crate::rational::pow2_inv(11));
        let half = DyadicClosedSet::half_density(12).unwrap();
        assert_eq!(carleson_sum(&half, 12).unwrap().verdict, super::super::Verdict::Diverging);
    }

    #[test]
    fn atom_box_integral_matches_closed_form() {
        let atom = point_mass(int(0), int(1));
        let quad = QuadOptions::default();
        let exact = |z| (atom_singular_derivative_norm(z), 0.0);
        for level in [0, 2, 5] {
            let arc = DyadicArc::new(level, 0).unwrap();
            let got = top_half_integral(&atom, arc, &quad).unwrap();
            let region = CarlesonBox::new(arc).top_half();
            let same_nodes = adaptive_box(&region, quad.nodes, 0.25 * quad.flag_fraction, quad.max_splits, &exact).value;
            assert!((got.value - same_nodes).abs() < 1e-6 * got.value.max(1e-300), "{level}");
            let reference = (4.0 * midpoint_sum(&region, 256, &exact).0 - midpoint_sum(&region, 128, &exact).0) / 3.0;
            assert!((got.value - reference).abs() <= got.error + 1e-12, "{level}: {got:?} vs {reference}");
        }
    }

    #[test]
    fn lebesgue_boxes_vanish() {
        assert_eq!(top_half_integral(&lebesgue(), DyadicArc::new(3, 1).unwrap(), &QuadOptions::default()).unwrap().value, 0.0);
    }

    #[test]
    fn qbox_requires_an_empty_arc() {
        let atom = point_mass(int(0), int(1));
        assert!(qbox_check(&atom, DyadicArc::new(1, 0).unwrap(), 3, &QuadOptions::default()).is_err());
        // the atom sits at the closing endpoint of the arc, so the levels decay only like 2^{-n/2}
        let a = qbox_check(&atom, DyadicArc::new(1, 1).unwrap(), 10, &QuadOptions::default()).unwrap();
        let b = qbox_check(&atom, DyadicArc::new(1, 1).unwrap(), 12, &QuadOptions::default()).unwrap();
        let (x, y) = (a.extrapolated.unwrap(), b.extrapolated.unwrap());
        assert!((x - y).abs() < 0.05 * y, "{x} {y}");
        assert!(a.ratio.is_finite() && (a.estimate - b.estimate).abs() < 0.05 * b.estimate, "{a:?} {b:?}");
    }

    #[test]
    fn atom_w1_converges() {
        let atom = point_mass(int(0), int(1));
        let e = DyadicClosedSet::from_points(vec![int(0)], 10).unwrap();
        let r = w1_report(&atom, &e, 10, &QuadOptions::default()).unwrap();
        assert_eq!(r.report.verdict, super::super::Verdict::Converging, "{:?}", r.report);
    }
}
