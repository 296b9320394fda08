use num_complex::Complex;

use crate::error::{BlochError, Result};
use crate::scalar::Scalar;

/// Default lower bound on `1 - |z|` for admissible query points.
pub const DEFAULT_BOUNDARY_FLOOR: f64 = 9.094947017729282e-13; // 2^-40

/// A point of the open unit disc, kept away from the boundary by a floor on `1 - |z|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscPoint<S> {
    z: Complex<S>,
}

impl<S: Scalar> DiscPoint<S> {
    pub fn new(z: Complex<S>) -> Result<Self> {
        Self::with_floor(z, S::lit(DEFAULT_BOUNDARY_FLOOR))
    }

    pub fn from_parts(re: S, im: S) -> Result<Self> {
        Self::new(Complex::new(re, im))
    }

    /// Polar form with the angle given in turns.
    pub fn polar(radius: S, theta: S) -> Result<Self> {
        let phi = S::TAU() * theta;
        Self::new(Complex::new(radius * phi.cos(), radius * phi.sin()))
    }

    pub fn with_floor(z: Complex<S>, floor: S) -> Result<Self> {
        let r = z.norm();
        let err = |reason| BlochError::OutsideDisc { re: z.re.to_f64_lossy(), im: z.im.to_f64_lossy(), reason };
        if !r.is_finite() {
            return Err(err("non-finite coordinates"));
        }
        if r >= S::one() {
            return Err(err("|z| >= 1"));
        }
        if S::one() - r < floor {
            return Err(err("1 - |z| below the boundary floor"));
        }
        Ok(Self { z })
    }

    pub fn value(&self) -> Complex<S> {
        self.z
    }

    pub fn modulus(&self) -> S {
        self.z.norm()
    }

    /// `1 - |z|`.
    pub fn boundary_gap(&self) -> S {
        S::one() - self.z.norm()
    }

    /// Angle of the radial projection in turns, in `[0, 1)`; zero for `z = 0`.
    pub fn theta(&self) -> S {
        if self.z.re == S::zero() && self.z.im == S::zero() {
            return S::zero();
        }
        let t = self.z.im.atan2(self.z.re) / S::TAU();
        if t < S::zero() {
            t + S::one()
        } else {
            t
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_boundary_and_outside() {
        assert!(DiscPoint::from_parts(1.0f64, 0.0).is_err());
        assert!(DiscPoint::from_parts(0.0f64, -1.5).is_err());
        assert!(DiscPoint::from_parts(1.0f64 - 1e-14, 0.0).is_err());
        assert!(DiscPoint::from_parts(0.5f64, 0.5).is_ok());
    }

    #[test]
    fn theta_in_turns() {
        let p = DiscPoint::from_parts(0.0f64, -0.5).unwrap();
        assert!((p.theta() - 0.75).abs() < 1e-15);
        let q = DiscPoint::<f32>::polar(0.5, 0.125).unwrap();
        assert!((q.theta() - 0.125).abs() < 1e-6);
    }
}
