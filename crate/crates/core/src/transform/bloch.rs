//! Sampling of analytic functions: Bloch seminorm lower bounds and large-growth sets.

use num_complex::Complex;
use rayon::prelude::*;

use super::point::DiscPoint;
use crate::error::{BlochError, Result};
use crate::scalar::Scalar;

/// Anything that can be evaluated at points of the disc.
pub trait AnalyticFn<S: Scalar>: Sync {
    fn eval(&self, z: Complex<S>) -> Result<Complex<S>>;
}

impl<S: Scalar, F> AnalyticFn<S> for F
where
    F: Fn(Complex<S>) -> Result<Complex<S>> + Sync,
{
    fn eval(&self, z: Complex<S>) -> Result<Complex<S>> {
        self(z)
    }
}

/// Central difference `(f(z + h) - f(z - h)) / 2h` with `h = (1 - |z|) / 1000`.
pub fn derivative<S: Scalar>(f: &impl AnalyticFn<S>, z: &DiscPoint<S>) -> Result<Complex<S>> {
    let h = z.boundary_gap() / S::lit(1000.0);
    let step = Complex::new(h, S::zero());
    let plus = DiscPoint::new(z.value() + step)?;
    let minus = DiscPoint::new(z.value() - step)?;
    Ok((f.eval(plus.value())? - f.eval(minus.value())?) / (h + h))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlochSample<S> {
    /// `max (1 - |z|) |f'(z)|` over the evaluated points; a lower bound for the seminorm.
    pub value: S,
    pub argmax: Option<Complex<S>>,
    pub evaluated: usize,
    pub skipped: usize,
}

pub fn bloch_seminorm_sample<S: Scalar>(f: &impl AnalyticFn<S>, points: &[DiscPoint<S>]) -> Result<BlochSample<S>> {
    let values: Vec<Option<S>> = points
        .par_iter()
        .map(|z| match derivative(f, z) {
            Ok(d) => Ok(Some(z.boundary_gap() * d.norm())),
            Err(BlochError::OutsideDisc { .. }) => {
                log::warn!("skipping {:?}: derivative stencil leaves the disc", z.value());
                Ok(None)
            }
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let mut out = BlochSample { value: S::zero(), argmax: None, evaluated: 0, skipped: 0 };
    for (z, v) in points.iter().zip(values) {
        match v {
            Some(v) => {
                out.evaluated += 1;
                if out.argmax.is_none() || v > out.value {
                    out.value = v;
                    out.argmax = Some(z.value());
                }
            }
            None => out.skipped += 1,
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthScan<S> {
    /// Points with `|f(z)| ≥ δ log(1 / (1 - |z|))`, in input order.
    pub captured: Vec<DiscPoint<S>>,
    /// For each boundary window, the distance from its midpoint to the nearest captured point
    /// (infinite if none).
    pub window_distances: Vec<f64>,
}

impl<S> GrowthScan<S> {
    pub fn max_window_distance(&self) -> f64 {
        self.window_distances.iter().copied().fold(0.0, f64::max)
    }
}

/// Scans `points` for large values of `f`, then measures how close the captured points come to
/// the midpoints of `2^windows_log2` equal boundary windows.
pub fn growth_scan<S: Scalar>(f: &impl AnalyticFn<S>, delta: S, points: &[DiscPoint<S>], windows_log2: u32) -> Result<GrowthScan<S>> {
    if !(delta > S::zero()) {
        return Err(BlochError::InvalidArgument("delta must be positive".into()));
    }
    let hits: Vec<bool> = points
        .par_iter()
        .map(|z| {
            let v = f.eval(z.value())?;
            Ok(v.norm() >= delta * (S::one() / z.boundary_gap()).ln())
        })
        .collect::<Result<_>>()?;
    let captured: Vec<DiscPoint<S>> = points.iter().zip(hits).filter(|(_, h)| *h).map(|(z, _)| *z).collect();
    let coords: Vec<Complex<f64>> = captured
        .iter()
        .map(|z| Complex::new(z.value().re.to_f64_lossy(), z.value().im.to_f64_lossy()))
        .collect();
    let n = 1u64 << windows_log2;
    let window_distances = (0..n)
        .into_par_iter()
        .map(|k| {
            let mid = Complex::from_polar(1.0, std::f64::consts::TAU * (k as f64 + 0.5) / n as f64);
            coords.iter().map(|c| (c - mid).norm()).fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(GrowthScan { captured, window_distances })
}
