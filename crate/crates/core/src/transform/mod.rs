//! Poisson and Herglotz transforms of dyadic measures with certified error bounds, singular
//! inner functions, and sampling tools for analytic functions on the disc.

mod atomize;
mod bloch;
mod kernel;
mod point;

use num_complex::Complex;

pub use atomize::{atomize, AtomizeOptions, Atomization, Leaf, Region};
pub use bloch::{bloch_seminorm_sample, derivative, growth_scan, AnalyticFn, BlochSample, GrowthScan};
pub use kernel::{distance_lower_bound, Kernel};
pub use point::{DiscPoint, DEFAULT_BOUNDARY_FLOOR};

use crate::dyadic::DyadicMeasure;
use crate::error::{BlochError, Result};
use crate::rational::to_f64;
use crate::scalar::Scalar;

/// A computed value with a bound on its absolute error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformValue<S> {
    pub value: Complex<S>,
    pub error_bound: S,
}

impl<S: Scalar> TransformValue<S> {
    pub fn exact(value: Complex<S>) -> Self {
        Self { value, error_bound: S::zero() }
    }
}

fn closed_form_uniform<S: Scalar>(measure: &DyadicMeasure, kernel: Kernel, opts: &AtomizeOptions) -> Option<TransformValue<S>> {
    if !opts.closed_form_uniform {
        return None;
    }
    let c = to_f64(&measure.uniform_density()?);
    Some(match kernel {
        Kernel::Poisson | Kernel::Herglotz => TransformValue {
            value: Complex::new(S::lit(c), S::zero()),
            error_bound: S::lit(c) * S::epsilon() * S::lit(2.0),
        },
        Kernel::HerglotzPrime => TransformValue::exact(Complex::new(S::zero(), S::zero())),
    })
}

/// `∫ K(ζ, z) dν(ζ)`; fails if the error target of `opts` cannot be certified.
pub fn transform<S: Scalar>(measure: &DyadicMeasure, z: &DiscPoint<S>, kernel: Kernel, opts: &AtomizeOptions) -> Result<TransformValue<S>> {
    if let Some(v) = closed_form_uniform(measure, kernel, opts) {
        return Ok(v);
    }
    let a = atomize(measure, Region::point(z), &[kernel], opts)?;
    if !a.certified(kernel) {
        let arc = a.limiting_leaf(kernel).unwrap_or(crate::dyadic::DyadicArc::ROOT);
        return Err(BlochError::Uncertifiable { arc });
    }
    Ok(a.evaluate(kernel, z.value()))
}

/// Poisson extension `∫ (1 - |z|²) / |ζ - z|² dν(ζ)` (returned with zero imaginary part).
pub fn poisson<S: Scalar>(measure: &DyadicMeasure, z: &DiscPoint<S>) -> Result<TransformValue<S>> {
    transform(measure, z, Kernel::Poisson, &AtomizeOptions::default())
}

/// Herglotz transform `∫ (ζ + z) / (ζ - z) dν(ζ)`.
pub fn herglotz<S: Scalar>(measure: &DyadicMeasure, z: &DiscPoint<S>) -> Result<TransformValue<S>> {
    transform(measure, z, Kernel::Herglotz, &AtomizeOptions::default())
}

/// Derivative of the Herglotz transform, `∫ 2ζ / (ζ - z)² dν(ζ)`.
pub fn herglotz_prime<S: Scalar>(measure: &DyadicMeasure, z: &DiscPoint<S>) -> Result<TransformValue<S>> {
    transform(measure, z, Kernel::HerglotzPrime, &AtomizeOptions::default())
}

/// `e^{-w}` for `w` known to within `e_w`, with the propagated error.
pub fn exp_neg<S: Scalar>(w: TransformValue<S>) -> TransformValue<S> {
    let value = (-w.value).exp();
    let error_bound = value.norm() * w.error_bound.exp_m1() + value.norm() * S::epsilon() * S::lit(4.0);
    TransformValue { value, error_bound }
}

/// `S_μ(z) = exp(-H(μ)(z))` and `S_μ'(z) = -H(μ)'(z) S_μ(z)`, each with an error bound.
pub fn singular_inner<S: Scalar>(
    measure: &DyadicMeasure,
    z: &DiscPoint<S>,
    opts: &AtomizeOptions,
) -> Result<(TransformValue<S>, TransformValue<S>)> {
    let (h, hp) = match (
        closed_form_uniform(measure, Kernel::Herglotz, opts),
        closed_form_uniform(measure, Kernel::HerglotzPrime, opts),
    ) {
        (Some(h), Some(hp)) => (h, hp),
        _ => {
            let kernels = [Kernel::Herglotz, Kernel::HerglotzPrime];
            let a = atomize(measure, Region::point(z), &kernels, opts)?;
            for k in kernels {
                if !a.certified(k) {
                    let arc = a.limiting_leaf(k).unwrap_or(crate::dyadic::DyadicArc::ROOT);
                    return Err(BlochError::Uncertifiable { arc });
                }
            }
            (a.evaluate(Kernel::Herglotz, z.value()), a.evaluate(Kernel::HerglotzPrime, z.value()))
        }
    };
    Ok(singular_from_herglotz(h, hp))
}

/// `(S, S')` from `H` and `H'`.
pub fn singular_from_herglotz<S: Scalar>(h: TransformValue<S>, hp: TransformValue<S>) -> (TransformValue<S>, TransformValue<S>) {
    let s = exp_neg(h);
    let value = -hp.value * s.value;
    let err = hp.value.norm() * s.error_bound
        + s.value.norm() * hp.error_bound
        + hp.error_bound * s.error_bound
        + value.norm() * S::epsilon() * S::lit(4.0);
    (s, TransformValue { value, error_bound: err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::basic::{lebesgue, point_mass, uniform};
    use crate::rational::{int, ratio};

    fn close<S: Scalar>(v: &TransformValue<S>, expected: Complex<S>) -> bool {
        (v.value - expected).norm() <= v.error_bound + S::epsilon() * S::lit(64.0) * expected.norm().max(S::one())
    }

    #[test]
    fn atom_at_zero_at_one_half() {
        let atom = point_mass(int(0), int(1));
        let z = DiscPoint::from_parts(0.5f64, 0.0).unwrap();
        assert!(close(&poisson(&atom, &z).unwrap(), Complex::new(3.0, 0.0)));
        assert!(close(&herglotz(&atom, &z).unwrap(), Complex::new(3.0, 0.0)));
        assert!(close(&herglotz_prime(&atom, &z).unwrap(), Complex::new(8.0, 0.0)));
        let (s, sp) = singular_inner(&atom, &z, &AtomizeOptions::default()).unwrap();
        assert!((s.value.re - (-3.0f64).exp()).abs() < 1e-15);
        assert!((sp.value.norm() - 8.0 * (-3.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn origin_gives_total_mass() {
        let z = DiscPoint::from_parts(0.0f64, 0.0).unwrap();
        let m = point_mass(ratio(2, 7), int(1));
        let h = herglotz(&m, &z).unwrap();
        assert!(close(&h, Complex::new(1.0, 0.0)));
        let (s, _) = singular_inner(&m, &z, &AtomizeOptions::default()).unwrap();
        assert!((s.value.re - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn lebesgue_closed_form_and_quadrature_agree() {
        let z = DiscPoint::from_parts(0.3f64, 0.4).unwrap();
        let quad = AtomizeOptions { closed_form_uniform: false, ..AtomizeOptions::default() };
        for kernel in Kernel::ALL {
            let a = transform(&lebesgue(), &z, kernel, &AtomizeOptions::default()).unwrap();
            let b = transform(&lebesgue(), &z, kernel, &quad).unwrap();
            assert!((a.value - b.value).norm() <= a.error_bound + b.error_bound + 1e-15, "{kernel:?}");
        }
    }

    #[test]
    fn single_precision_evaluation() {
        let atom = point_mass(int(0), int(1));
        let z = DiscPoint::from_parts(0.5f32, 0.0).unwrap();
        let h = transform(&atom, &z, Kernel::Herglotz, &AtomizeOptions::coarse(1e-5)).unwrap();
        assert!((h.value.re - 3.0).abs() <= h.error_bound.max(1e-6));
        let c = transform(&uniform(ratio(3, 2)), &z, Kernel::Poisson, &AtomizeOptions::default()).unwrap();
        assert_eq!(c.value.re, 1.5f32);
    }
}
