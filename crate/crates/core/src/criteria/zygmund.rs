//! Density oscillation of a measure over adjacent dyadic arcs of equal length.

use num_traits::{Signed, Zero};

use super::tail::Verdict;
use crate::dyadic::{DyadicArc, DyadicMeasure};
use crate::error::Result;
use crate::rational::{ln_abs, pow2, to_f64, Rational};

/// Exact densities `ν(I)/|I|` of every arc of levels `0..=n_max`.
fn level_densities(nu: &DyadicMeasure, n_max: u32) -> Result<Vec<Vec<Rational>>> {
    let mut masses = vec![nu.total_mass().clone()];
    let mut out = Vec::with_capacity(n_max as usize + 1);
    for level in 0..=n_max {
        if level > 0 {
            let mut next = Vec::with_capacity(masses.len() * 2);
            for (k, m) in masses.iter().enumerate() {
                let (l, r) = nu.split(DyadicArc { level: level - 1, index: k as u64 }, m)?;
                next.push(l);
                next.push(r);
            }
            masses = next;
        }
        let scale = pow2(level);
        out.push(masses.iter().map(|m| m * &scale).collect());
    }
    Ok(out)
}

/// The arc `k` of a level and its right neighbour, wrapping around at the end of the circle.
fn adjacent_pairs(level: u32) -> impl Iterator<Item = (DyadicArc, DyadicArc)> {
    let n = DyadicArc::count(level);
    let pairs = if n == 1 { 0 } else if n == 2 { 1 } else { n };
    (0..pairs).map(move |k| (DyadicArc { level, index: k }, DyadicArc { level, index: (k + 1) % n }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZygmundReport {
    /// Largest density difference over adjacent arcs, per level.
    pub per_level: Vec<Rational>,
    /// A pair attaining the per-level maximum.
    pub worst: Vec<Option<(DyadicArc, DyadicArc)>>,
}

impl ZygmundReport {
    pub fn sup(&self) -> Rational {
        self.per_level.iter().max().cloned().unwrap_or_else(Rational::zero)
    }
}

/// `max |ν(I)/|I| - ν(I')/|I'||` over adjacent dyadic arcs `I, I'` of each level `≤ n_max`.
/// Comparable up to an absolute constant with the supremum over all contiguous arcs.
pub fn zygmund_seminorm(nu: &DyadicMeasure, n_max: u32) -> Result<ZygmundReport> {
    let dens = level_densities(nu, n_max)?;
    let mut report = ZygmundReport { per_level: Vec::new(), worst: Vec::new() };
    for level in 0..=n_max {
        let d = &dens[level as usize];
        let mut best = Rational::zero();
        let mut worst = None;
        for (a, b) in adjacent_pairs(level) {
            let diff = (&d[a.index as usize] - &d[b.index as usize]).abs();
            if diff > best {
                best = diff;
                worst = Some((a, b));
            }
        }
        report.per_level.push(best);
        report.worst.push(worst);
    }
    Ok(report)
}

/// A constant `C` in an inequality `|d(I) - d(I')| ≤ C · e^{-D}`, kept as `ln C` since `e^D`
/// overflows quickly.
#[derive(Clone, Debug, PartialEq)]
pub struct PairConstantReport {
    /// `ln C_n` for the pairs of level `n`; `-∞` when every difference vanishes.
    pub per_level_ln: Vec<f64>,
    /// The arc `I` whose density enters the exponent, and its neighbour, per level.
    pub worst: Vec<Option<(DyadicArc, DyadicArc)>>,
    /// Whether `C_n` stays bounded as the level grows.
    pub trend: Verdict,
}

impl PairConstantReport {
    pub fn ln_constant(&self) -> f64 {
        self.per_level_ln.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `C`, possibly infinite after overflow.
    pub fn constant(&self) -> f64 {
        self.ln_constant().exp()
    }

    fn from_levels(per_level_ln: Vec<f64>, worst: Vec<Option<(DyadicArc, DyadicArc)>>) -> Self {
        let trend = trend(&per_level_ln);
        Self { per_level_ln, worst, trend }
    }
}

/// Diverging when the last four levels increase strictly and at least double `C`; bounded
/// (converging) when they do not exceed the earlier maximum.
fn trend(v: &[f64]) -> Verdict {
    let n = v.len();
    if n < 5 {
        return Verdict::Inconclusive;
    }
    let last = &v[n - 4..];
    if last.iter().all(|x| *x == f64::NEG_INFINITY) && v.iter().all(|x| *x == f64::NEG_INFINITY) {
        return Verdict::Converging;
    }
    if last.windows(2).all(|p| p[1] > p[0]) && last[3] - last[0] >= std::f64::consts::LN_2 {
        return Verdict::Diverging;
    }
    let earlier = v[..n - 4].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if last.iter().all(|x| *x <= earlier + 1e-12) {
        Verdict::Converging
    } else {
        Verdict::Inconclusive
    }
}

/// Smallest `C` with `|d(I) - d(I')| ≤ C e^{-d(I)}` over adjacent dyadic pairs, both
/// orientations, where `d` is the density.
pub fn exp_zygmund_constant(nu: &DyadicMeasure, n_max: u32) -> Result<PairConstantReport> {
    let dens = level_densities(nu, n_max)?;
    let mut per_level = Vec::new();
    let mut worst = Vec::new();
    for level in 0..=n_max {
        let d = &dens[level as usize];
        let mut best = f64::NEG_INFINITY;
        let mut arg = None;
        for (a, b) in adjacent_pairs(level) {
            let (da, db) = (&d[a.index as usize], &d[b.index as usize]);
            let diff = (da - db).abs();
            if diff.is_zero() {
                continue;
            }
            let (i, j, di) = if da >= db { (a, b, da) } else { (b, a, db) };
            let v = ln_abs(&diff) + to_f64(di);
            if v > best {
                best = v;
                arg = Some((i, j));
            }
        }
        per_level.push(best);
        worst.push(arg);
    }
    Ok(PairConstantReport::from_levels(per_level, worst))
}

/// Smallest `C` with `|d(I) - d(I')| ≤ C inf_J e^{-d(J)}`, the infimum over the dyadic arcs `J`
/// containing `I ∪ I'` (the smallest such arc and its ancestors).
pub fn cyclicity_constant(nu: &DyadicMeasure, n_max: u32) -> Result<PairConstantReport> {
    container_constant(nu, n_max, true)
}

fn container_constant(nu: &DyadicMeasure, n_max: u32, whole_chain: bool) -> Result<PairConstantReport> {
    let dens = level_densities(nu, n_max)?;
    // largest density along the chain from the root to each arc
    let mut chain_max: Vec<Vec<f64>> = Vec::with_capacity(dens.len());
    for (level, d) in dens.iter().enumerate() {
        let row = d
            .iter()
            .enumerate()
            .map(|(k, q)| {
                let own = to_f64(q);
                if level == 0 || !whole_chain { own } else { own.max(chain_max[level - 1][k / 2]) }
            })
            .collect();
        chain_max.push(row);
    }
    let mut per_level = Vec::new();
    let mut worst = Vec::new();
    for level in 0..=n_max {
        let d = &dens[level as usize];
        let mut best = f64::NEG_INFINITY;
        let mut arg = None;
        for (a, b) in adjacent_pairs(level) {
            let diff = (&d[a.index as usize] - &d[b.index as usize]).abs();
            if diff.is_zero() {
                continue;
            }
            let j = a.common_ancestor(&b);
            let v = ln_abs(&diff) + chain_max[j.level as usize][j.index as usize];
            if v > best {
                best = v;
                arg = Some((a, b));
            }
        }
        per_level.push(best);
        worst.push(arg);
    }
    Ok(PairConstantReport::from_levels(per_level, worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::basic::{lebesgue, point_mass, scaled};
    use crate::construct::riesz::build_riesz;
    use crate::rational::{int, ratio};

    #[test]
    fn lebesgue_has_no_oscillation() {
        let z = zygmund_seminorm(&lebesgue(), 10).unwrap();
        assert!(z.per_level.iter().all(Rational::is_zero));
        let e = exp_zygmund_constant(&lebesgue(), 10).unwrap();
        assert_eq!(e.constant(), 0.0);
        assert_eq!(e.trend, Verdict::Converging);
        assert_eq!(cyclicity_constant(&lebesgue(), 10).unwrap().constant(), 0.0);
    }

    #[test]
    fn atom_oscillation_doubles() {
        let atom = point_mass(int(0), int(1));
        let z = zygmund_seminorm(&atom, 12).unwrap();
        for (n, v) in z.per_level.iter().enumerate().skip(1) {
            assert_eq!(*v, pow2(n as u32));
        }
        assert_eq!(exp_zygmund_constant(&atom, 8).unwrap().trend, Verdict::Diverging);
        assert_eq!(cyclicity_constant(&atom, 8).unwrap().trend, Verdict::Diverging);
    }

    #[test]
    fn riesz_first_level() {
        let (nu, _) = build_riesz(ratio(1, 2)).unwrap();
        assert_eq!(zygmund_seminorm(&nu, 1).unwrap().per_level[1], int(1));
    }

    #[test]
    fn seminorm_is_homogeneous() {
        let (nu, _) = build_riesz(ratio(1, 3)).unwrap();
        let base = zygmund_seminorm(&nu, 9).unwrap();
        for c in [ratio(1, 3), int(2), ratio(7, 5)] {
            let s = zygmund_seminorm(&scaled(c.clone(), &nu).unwrap(), 9).unwrap();
            for (a, b) in s.per_level.iter().zip(&base.per_level) {
                assert_eq!(*a, b * &c);
            }
        }
    }

    #[test]
    fn fewer_containers_give_a_larger_constant() {
        let (nu, _) = build_riesz(ratio(1, 2)).unwrap();
        let all = cyclicity_constant(&nu, 8).unwrap();
        let smallest = container_constant(&nu, 8, false).unwrap();
        for (a, s) in all.per_level_ln.iter().zip(&smallest.per_level_ln) {
            assert!(a >= s);
        }
    }
}
