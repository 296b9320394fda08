//! The analytic self-map `b` with Clark measure `ν`, `(1 + b)/(1 - b) = H(ν)`, and the
//! unbounded Bloch function `f = log(e / (1 - b))`.

use num_complex::Complex;

use crate::dyadic::DyadicMeasure;
use crate::error::Result;
use crate::scalar::Scalar;
use crate::transform::{transform, AnalyticFn, AtomizeOptions, DiscPoint, Kernel};

#[derive(Clone, Debug)]
pub struct ClarkFunction {
    nu: DyadicMeasure,
    opts: AtomizeOptions,
}

/// `b` and `f` for a probability measure `ν`, with transforms certified to `opts`.
pub fn clark_function(nu: &DyadicMeasure, opts: AtomizeOptions) -> ClarkFunction {
    ClarkFunction { nu: nu.clone(), opts }
}

impl ClarkFunction {
    fn herglotz<S: Scalar>(&self, z: Complex<S>) -> Result<Complex<S>> {
        Ok(transform(&self.nu, &DiscPoint::new(z)?, Kernel::Herglotz, &self.opts)?.value)
    }

    /// `b = (H - 1)/(H + 1)`.
    pub fn b<S: Scalar>(&self, z: Complex<S>) -> Result<Complex<S>> {
        let h = self.herglotz(z)?;
        let one = Complex::new(S::one(), S::zero());
        Ok((h - one) / (h + one))
    }

    /// `f = log(e/(1 - b)) = 1 + log((H + 1)/2)`, principal branch. `Re H > 0` keeps the
    /// argument in the right half-plane, so `|Im f| < π/2`.
    pub fn f<S: Scalar>(&self, z: Complex<S>) -> Result<Complex<S>> {
        let h = self.herglotz(z)?;
        let one = Complex::new(S::one(), S::zero());
        Ok(one + ((h + one) / S::lit(2.0)).ln())
    }

    pub fn b_fn<S: Scalar>(&self) -> impl AnalyticFn<S> + '_ {
        move |z: Complex<S>| self.b(z)
    }

    pub fn f_fn<S: Scalar>(&self) -> impl AnalyticFn<S> + '_ {
        move |z: Complex<S>| self.f(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::basic::{lebesgue, point_mass};
    use crate::construct::riesz::build_riesz;
    use crate::rational::{int, ratio};

    #[test]
    fn atom_at_zero_gives_the_identity() {
        let c = clark_function(&point_mass(int(0), int(1)), AtomizeOptions::default());
        for z in [Complex::new(0.5, 0.0), Complex::new(-0.2, 0.7), Complex::new(0.0, -0.9)] {
            assert!((c.b(z).unwrap() - z).norm() < 1e-12);
            let expected = (Complex::new(std::f64::consts::E, 0.0) / (Complex::new(1.0, 0.0) - z)).ln();
            assert!((c.f(z).unwrap() - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn lebesgue_is_trivial() {
        let c = clark_function(&lebesgue(), AtomizeOptions::default());
        let z = Complex::new(0.3, -0.6);
        assert!(c.b(z).unwrap().norm() < 1e-15);
        assert!((c.f(z).unwrap() - Complex::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn riesz_self_map_stays_in_the_disc() {
        let (nu, _) = build_riesz(ratio(1, 2)).unwrap();
        let c = clark_function(&nu, AtomizeOptions::coarse(1e-8));
        assert!(c.b(Complex::new(0.0, 0.0)).unwrap().norm() < 1e-12);
        for k in 0..16 {
            let z = Complex::from_polar(0.99, std::f64::consts::TAU * k as f64 / 16.0);
            let b = c.b(z).unwrap();
            assert!(b.norm() < 1.0);
            assert!(c.f(z).unwrap().im.abs() <= std::f64::consts::PI + 1.0);
        }
    }
}
