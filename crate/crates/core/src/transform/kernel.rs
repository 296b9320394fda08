use std::f64::consts::PI;

use num_complex::Complex;

use crate::scalar::Scalar;

/// Integration kernels `K(ζ, z)` of the transforms, for `ζ` on the circle and `z` in the disc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kernel {
    /// `(1 - |z|²) / |ζ - z|²`.
    Poisson,
    /// `(ζ + z) / (ζ - z)`.
    Herglotz,
    /// `2ζ / (ζ - z)²`, the `z`-derivative of the Herglotz kernel.
    HerglotzPrime,
}

impl Kernel {
    pub const ALL: [Kernel; 3] = [Kernel::Poisson, Kernel::Herglotz, Kernel::HerglotzPrime];

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Poisson => "P",
            Kernel::Herglotz => "H",
            Kernel::HerglotzPrime => "H'",
        }
    }

    pub fn eval<S: Scalar>(self, zeta: Complex<S>, z: Complex<S>) -> Complex<S> {
        let diff = zeta - z;
        match self {
            Kernel::Poisson => Complex::new((S::one() - z.norm_sqr()) / diff.norm_sqr(), S::zero()),
            Kernel::Herglotz => (zeta + z) / diff,
            Kernel::HerglotzPrime => (zeta + zeta) / (diff * diff),
        }
    }

    /// Upper bounds on the first and second derivatives of `θ ↦ K(e^{2πiθ}, z)` (θ in turns),
    /// valid whenever `|z| ≤ a` and `|ζ - z| ≥ d`.
    pub fn derivative_bounds(self, a: f64, d: f64) -> (f64, f64) {
        let (d2, d3) = (d * d, d * d * d);
        match self {
            Kernel::Poisson | Kernel::Herglotz => (4.0 * PI * a / d2, 8.0 * PI * PI * a * (1.0 + a) / d3),
            Kernel::HerglotzPrime => (
                4.0 * PI * (1.0 + a) / d3,
                8.0 * PI * PI * ((2.0 + a) / d3 + 3.0 * (1.0 + a) / (d3 * d)),
            ),
        }
    }
}

/// Lower bound on `|e^{2πiθ} - z|` over `|z| ∈ [r_min, r_max]` and angular separation at least
/// `gap` turns between `θ` and `arg z`.
pub fn distance_lower_bound(r_min: f64, r_max: f64, gap: f64) -> f64 {
    let s = (PI * gap.clamp(0.0, 0.5)).sin();
    let d2 = (1.0 - r_max) * (1.0 - r_max) + 4.0 * r_min * s * s;
    d2.sqrt() * (1.0 - 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn on_circle(theta: f64) -> Complex<f64> {
        Complex::from_polar(1.0, 2.0 * PI * theta)
    }

    #[test]
    fn poisson_is_real_part_of_herglotz() {
        let z = Complex::new(0.3, -0.45);
        for k in 0..16 {
            let zeta = on_circle(k as f64 / 16.0);
            let p = Kernel::Poisson.eval(zeta, z);
            let h = Kernel::Herglotz.eval(zeta, z);
            assert!((p.re - h.re).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_bounds_dominate_finite_differences() {
        let z = Complex::new(0.7, 0.2);
        let a = z.norm();
        let h = 1e-5;
        for kernel in Kernel::ALL {
            for k in 0..200 {
                let t = k as f64 / 200.0;
                let f = |s: f64| kernel.eval(on_circle(s), z);
                let d1 = (f(t + h) - f(t - h)) / (2.0 * h);
                let d2 = (f(t + h) - f(t) * 2.0 + f(t - h)) / (h * h);
                let d = (on_circle(t) - z).norm();
                let (k1, k2) = kernel.derivative_bounds(a, d * 0.999);
                assert!(d1.norm() <= k1, "{kernel:?} first derivative at {t}");
                assert!(d2.norm() <= k2 * 1.001, "{kernel:?} second derivative at {t}");
            }
        }
    }

    #[test]
    fn distance_bound_holds_on_a_box() {
        let bound = distance_lower_bound(0.8, 0.9, 0.05);
        for i in 0..=10 {
            for j in 0..=10 {
                let r = 0.8 + 0.01 * i as f64;
                let gap = 0.05 + 0.01 * j as f64;
                let z = Complex::from_polar(r, 0.0);
                assert!((on_circle(gap) - z).norm() >= bound);
            }
        }
    }
}
