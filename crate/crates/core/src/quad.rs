//! One-dimensional Gauss–Kronrod quadrature with bisection.
#![allow(clippy::excessive_precision)]

use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Result of a quadrature: the estimate and an error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadEstimate<S> {
    pub value: S,
    pub error: S,
}

/// 15-point Kronrod rule with the embedded 7-point Gauss rule on `[a, b]`.
pub fn gk15<S: Scalar>(f: &mut impl FnMut(S) -> S, a: S, b: S) -> QuadEstimate<S> {
    let half = (b - a) * S::lit(0.5);
    let center = (a + b) * S::lit(0.5);
    let fc = f(center);
    let mut kronrod = fc * S::lit(WGK[7]);
    let mut gauss = fc * S::lit(WG[3]);
    for j in 0..7 {
        let dx = half * S::lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * S::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * S::lit(WG[j / 2]);
        }
    }
    QuadEstimate { value: kronrod * half, error: ((kronrod - gauss) * half).abs() }
}

/// Bisects until each piece's Kronrod–Gauss difference is below its share of `tol`.
pub fn adaptive_gk15<S: Scalar>(mut f: impl FnMut(S) -> S, a: S, b: S, tol: S, max_depth: u32) -> QuadEstimate<S> {
    fn rec<S: Scalar>(f: &mut impl FnMut(S) -> S, a: S, b: S, tol: S, depth: u32) -> QuadEstimate<S> {
        let est = gk15(f, a, b);
        if est.error <= tol || depth == 0 || !est.value.is_finite() {
            return est;
        }
        let mid = (a + b) * S::lit(0.5);
        let half_tol = tol * S::lit(0.5);
        let l = rec(f, a, mid, half_tol, depth - 1);
        let r = rec(f, mid, b, half_tol, depth - 1);
        QuadEstimate { value: l.value + r.value, error: l.error + r.error }
    }
    rec(&mut f, a, b, tol, max_depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let est = gk15(&mut |x: f64| x.powi(6) - 3.0 * x, 0.0, 2.0);
        assert!((est.value - (128.0 / 7.0 - 6.0)).abs() < 1e-12);
    }

    #[test]
    fn handles_endpoint_log_singularity() {
        // ∫_0^1 ln x dx = -1
        let est = adaptive_gk15(|x: f64| x.ln(), 0.0, 1.0, 1e-10, 60);
        assert!((est.value + 1.0).abs() < 1e-8, "{}", est.value);
    }

    #[test]
    fn works_in_single_precision() {
        let est = adaptive_gk15(|x: f32| x.sin(), 0.0, std::f32::consts::PI, 1e-5, 20);
        assert!((est.value - 2.0).abs() < 1e-5);
    }
}
