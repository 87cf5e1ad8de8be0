//! Spectral coordinates `(theta, omega, lambda, z)`, the dispersion function
//! `g(theta) = sqrt(2 - 2 cos theta + m^2)` and the phase `g(theta) + v theta`.
//!
//! `theta` always lives in the closed strip `-pi <= Re theta <= pi`,
//! `Im theta <= 0`, and `z = exp(-i theta)` so that `|z| <= 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Which spectral half-plane a point belongs to: `Re lambda >= 0` uses the
/// plain Jost family, `Re lambda <= 0` the tilde family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HalfPlane {
    Plain,
    Tilde,
}

/// Side from which a point of the cut `[0, 4]` (or the bands) is approached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundarySide {
    /// `+ i0`
    Upper,
    /// `- i0`
    Lower,
}

/// `g(theta)`, principal square root.
pub fn g(theta: Complex64, m: f64) -> Complex64 {
    (2.0 - 2.0 * theta.cos() + m * m).sqrt()
}

/// `g` on real arguments.
pub fn g_real(theta: f64, m: f64) -> f64 {
    (2.0 - 2.0 * theta.cos() + m * m).sqrt()
}

/// Solves `2 - 2 cos theta = omega` with `theta` in the closed lower strip.
///
/// Off the cut the solution is unique. On `(0, 4)` a side is required:
/// `omega + i0` lands in `[-pi, 0]` and `omega - i0` in `[0, pi]`.
/// The endpoints `0` and `4` need no side.
pub fn theta_from_omega(omega: Complex64, side: Option<BoundarySide>) -> Result<Complex64> {
    if !(omega.re.is_finite() && omega.im.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite omega {omega}")));
    }
    let on_cut = omega.im == 0.0 && omega.re > 0.0 && omega.re < 4.0;
    if on_cut && side.is_none() {
        return Err(Error::AmbiguousBranch(omega.re));
    }
    // z = exp(-i theta) solves z^2 - 2c z + 1 = 0, c = cos theta.
    let c = 1.0 - omega / 2.0;
    let root = (c * c - 1.0).sqrt();
    let (z1, z2) = (c + root, c - root);
    let z = if on_cut || omega.im == 0.0 && (omega.re == 0.0 || omega.re == 4.0) {
        // |z1| = |z2| = 1: choose by the side (Im z >= 0 <=> theta in [-pi, 0]).
        let want_upper = side.unwrap_or(BoundarySide::Upper) == BoundarySide::Upper;
        let pick_first = (z1.im >= z2.im) == want_upper;
        let mut z = if pick_first { z1 } else { z2 };
        z /= z.norm();
        z
    } else if z1.norm() <= z2.norm() {
        z1
    } else {
        z2
    };
    let mut theta = I * z.ln();
    if theta.im > 0.0 {
        theta.im = 0.0;
    }
    // ln has Im in (-pi, pi]; map Re theta = pi to -pi only when the side asks for it.
    if theta.re > PI - 1e-300 && side != Some(BoundarySide::Lower) {
        theta.re = -PI;
    }
    Ok(theta)
}

/// A consistent bundle `(theta, omega, lambda, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    theta: Complex64,
    omega: Complex64,
    lambda: Complex64,
    z: Complex64,
    half_plane: HalfPlane,
    mass: f64,
}

impl SpectralPoint {
    /// Point with the given `theta`; `lambda = +g(theta)` (plain) or `-g(theta)` (tilde).
    pub fn from_theta(theta: Complex64, m: f64, half_plane: HalfPlane) -> Result<Self> {
        if theta.im > 1e-14 || theta.re.abs() > PI + 1e-12 {
            return Err(Error::Domain(format!(
                "theta = {theta} outside the closed strip -pi <= Re <= pi, Im <= 0"
            )));
        }
        let omega = 2.0 - 2.0 * theta.cos();
        let gv = g(theta, m);
        let lambda = match half_plane {
            HalfPlane::Plain => gv,
            HalfPlane::Tilde => -gv,
        };
        Ok(Self {
            theta,
            omega,
            lambda,
            z: (-I * theta).exp(),
            half_plane,
            mass: m,
        })
    }

    /// Real `theta` in `[-pi, pi]`, the parametrisation used on the bands.
    pub fn on_band(theta: f64, m: f64, half_plane: HalfPlane) -> Result<Self> {
        Self::from_theta(Complex64::new(theta, 0.0), m, half_plane)
    }

    /// Point for a spectral parameter off the closed bands. `Re lambda = 0`
    /// is assigned to the plain half-plane.
    pub fn from_lambda(lambda: Complex64, m: f64) -> Result<Self> {
        let omega = lambda * lambda - m * m;
        let theta = theta_from_omega(omega, None)?;
        Ok(Self {
            theta,
            omega,
            lambda,
            z: (-I * theta).exp(),
            half_plane: if lambda.re >= 0.0 { HalfPlane::Plain } else { HalfPlane::Tilde },
            mass: m,
        })
    }

    /// Boundary value `lambda +- i0` for real `lambda` on the closed bands.
    pub fn from_lambda_boundary(lambda: f64, side: BoundarySide, m: f64) -> Result<Self> {
        if lambda == 0.0 {
            return Err(Error::Domain("lambda = 0 is not on a band".into()));
        }
        let omega = Complex64::new(lambda * lambda - m * m, 0.0);
        // For lambda < 0, lambda + i0 maps to omega - i0.
        let omega_side = match (lambda > 0.0, side) {
            (true, s) => s,
            (false, BoundarySide::Upper) => BoundarySide::Lower,
            (false, BoundarySide::Lower) => BoundarySide::Upper,
        };
        let theta = theta_from_omega(omega, Some(omega_side))?;
        Ok(Self {
            theta,
            omega,
            lambda: Complex64::new(lambda, 0.0),
            z: (-I * theta).exp(),
            half_plane: if lambda > 0.0 { HalfPlane::Plain } else { HalfPlane::Tilde },
            mass: m,
        })
    }

    pub fn theta(&self) -> Complex64 {
        self.theta
    }
    pub fn omega(&self) -> Complex64 {
        self.omega
    }
    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }
    /// `exp(-i theta)`
    pub fn z(&self) -> Complex64 {
        self.z
    }
    pub fn half_plane(&self) -> HalfPlane {
        self.half_plane
    }
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `theta` is real (a band point, possibly an edge).
    pub fn is_real(&self) -> bool {
        self.theta.im == 0.0
    }

    /// Same `lambda`, opposite `theta` (only meaningful for real `theta`).
    pub fn reflected(&self) -> Result<Self> {
        if !self.is_real() {
            return Err(Error::Domain("theta -> -theta needs real theta".into()));
        }
        Self::from_theta(-self.theta, self.mass, self.half_plane)
    }
}

/// `Phi_v(theta) = g(theta) + v theta` and its first three derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDerivatives {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// Analytic phase and derivatives from `g g' = sin`, `g'^2 + g g'' = cos`.
pub fn phase(theta: f64, v: f64, m: f64) -> PhaseDerivatives {
    let gv = g_real(theta, m);
    let (s, c) = theta.sin_cos();
    let g1 = s / gv;
    let g2 = (c - g1 * g1) / gv;
    let g3 = (-s - 3.0 * g1 * g2) / gv;
    PhaseDerivatives {
        value: gv + v * theta,
        d1: g1 + v,
        d2: g2,
        d3: g3,
    }
}

/// Constants of the degenerate stationary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryData {
    /// `(2 + m^2 - sqrt(4 m^2 + m^4)) / 2`
    pub kappa: f64,
    /// Critical velocity `sqrt(kappa)` (the maximal group speed).
    pub v0: f64,
    /// `-arccos(kappa)`
    pub theta0: f64,
    /// Splitting radius `min(1/2, sqrt(2 v0 / (3 G theta0^2)))`.
    pub nu: f64,
    /// `G = sup |g'''|` on `[-pi, pi]` (grid scan).
    pub g3_bound: f64,
}

impl StationaryData {
    pub fn new(m: f64) -> Self {
        let m2 = m * m;
        let kappa = (2.0 + m2 - (4.0 * m2 + m2 * m2).sqrt()) / 2.0;
        let v0 = kappa.sqrt();
        let theta0 = -kappa.acos();
        const GRID: usize = 10_000;
        let g3_bound = (0..=GRID)
            .map(|i| -PI + 2.0 * PI * i as f64 / GRID as f64)
            .map(|t| phase(t, 0.0, m).d3.abs())
            .fold(0.0, f64::max);
        let nu = 0.5f64.min((2.0 * v0 / (3.0 * g3_bound * theta0 * theta0)).sqrt());
        Self {
            kappa,
            v0,
            theta0,
            nu,
            g3_bound,
        }
    }
}

/// A real root of `Phi_v'`, with order 1 (non-degenerate) or 2 (`Phi_v'' = 0` too).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPoint {
    pub theta: f64,
    pub order: u8,
}

/// Tolerance on `|v - v0|` for declaring the stationary point degenerate.
const DEGENERACY_TOL: f64 = 1e-12;

/// All stationary points of `Phi_v` on `[-pi, pi]` for `v >= 0`.
pub fn stationary_points(v: f64, m: f64) -> (Vec<StationaryPoint>, StationaryData) {
    let data = StationaryData::new(m);
    let d1 = |t: f64| phase(t, v, m).d1;
    let points = if v == 0.0 {
        [-PI, 0.0, PI]
            .into_iter()
            .map(|theta| StationaryPoint { theta, order: 1 })
            .collect()
    } else if (v - data.v0).abs() <= DEGENERACY_TOL {
        vec![StationaryPoint {
            theta: data.theta0,
            order: 2,
        }]
    } else if v < data.v0 {
        // g' + v > 0 at -pi and 0, negative at theta0.
        vec![
            StationaryPoint {
                theta: bisect(d1, -PI, data.theta0),
                order: 1,
            },
            StationaryPoint {
                theta: bisect(d1, data.theta0, 0.0),
                order: 1,
            },
        ]
    } else {
        Vec::new()
    };
    (points, data)
}

/// Root of a sign-changing function on `[a, b]` by bisection to machine precision.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cr(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn g_examples() {
        assert!((g(cr(0.0), 0.8) - cr(0.8)).norm() < 1e-15);
        assert!((g(cr(PI), 0.8) - cr((0.64f64 + 4.0).sqrt())).norm() < 1e-15);
        assert!((g(cr(-PI / 2.0), 1.0) - cr(3f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta_from_omega(cr(0.0), None).unwrap(), cr(0.0));
        let t = theta_from_omega(cr(-2.0), None).unwrap();
        let expected = -(2.0f64).acosh();
        assert!((t - Complex64::new(0.0, expected)).norm() < 1e-14);
        assert!((t.im - (-1.316958)).abs() < 1e-6);
        assert!((2.0 - 2.0 * t.cos() - cr(-2.0)).norm() < 1e-14);

        let t = theta_from_omega(cr(2.0), Some(BoundarySide::Upper)).unwrap();
        assert!((t - cr(-PI / 2.0)).norm() < 1e-14);
        let t = theta_from_omega(cr(2.0), Some(BoundarySide::Lower)).unwrap();
        assert!((t - cr(PI / 2.0)).norm() < 1e-14);
    }

    #[test]
    fn cut_without_side_is_ambiguous() {
        assert!(matches!(
            theta_from_omega(cr(1.5), None),
            Err(Error::AmbiguousBranch(_))
        ));
        assert!(theta_from_omega(cr(4.0), None).is_ok());
    }

    #[test]
    fn band_point_boundary_values() {
        let m = 1.0;
        let up = SpectralPoint::from_lambda_boundary(1.5, BoundarySide::Upper, m).unwrap();
        assert!(up.theta().re < 0.0 && up.theta().im == 0.0);
        let lo = SpectralPoint::from_lambda_boundary(1.5, BoundarySide::Lower, m).unwrap();
        assert!((lo.theta() + up.theta()).norm() < 1e-14);
        // Negative band: lambda + i0 corresponds to omega - i0.
        let neg = SpectralPoint::from_lambda_boundary(-1.5, BoundarySide::Upper, m).unwrap();
        assert!(neg.theta().re > 0.0);
        assert_eq!(neg.half_plane(), HalfPlane::Tilde);
    }

    #[test]
    fn from_lambda_keeps_lambda() {
        let p = SpectralPoint::from_lambda(Complex64::new(0.0, -3.0), 1.0).unwrap();
        assert_eq!(p.lambda(), Complex64::new(0.0, -3.0));
        assert_eq!(p.half_plane(), HalfPlane::Plain);
        assert!((p.lambda() * p.lambda() - 1.0 - p.omega()).norm() < 1e-12);
        assert!(p.theta().im < 0.0);
    }

    #[test]
    fn stationary_data_at_unit_mass() {
        let d = StationaryData::new(1.0);
        let kappa = (3.0 - 5f64.sqrt()) / 2.0;
        assert!((d.kappa - kappa).abs() < 1e-15);
        assert!((d.v0 - 0.618033988749895).abs() < 1e-12);
        assert!((d.theta0 - (-1.1788736513480185)).abs() < 1e-12);
        assert!(d.nu > 0.0 && d.nu <= 0.5);
        let ph = phase(d.theta0, d.v0, 1.0);
        assert!(ph.d1.abs() < 1e-12);
        assert!(ph.d2.abs() < 1e-10);
        assert!((ph.d3 - kappa.sqrt()).abs() < 1e-12);
        // g'(theta0) = -v0, golden-ratio conjugate.
        assert!((phase(d.theta0, 0.0, 1.0).d1 + (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn stationary_point_counts() {
        let (pts, _) = stationary_points(0.0, 1.0);
        assert_eq!(pts.len(), 3);
        assert!(pts.iter().any(|p| p.theta == 0.0));

        let d = StationaryData::new(1.0);
        let (pts, _) = stationary_points(d.v0, 1.0);
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].order, 2);

        let (pts, _) = stationary_points(1.0, 1.0);
        assert!(pts.is_empty());
        // brute-force sign scan confirms no root at v = 1
        let n = 100_000;
        assert!((0..=n).all(|i| phase(-PI + 2.0 * PI * i as f64 / n as f64, 1.0, 1.0).d1 > 0.0));

        let (pts, _) = stationary_points(0.3, 1.0);
        assert_eq!(pts.len(), 2);
        for p in pts {
            assert!(phase(p.theta, 0.3, 1.0).d1.abs() < 1e-14);
        }
    }

    #[test]
    fn degenerate_point_by_finite_differences() {
        let d = StationaryData::new(1.0);
        let h = 1e-3;
        let f = |t: f64| phase(t, d.v0, 1.0).value;
        let t0 = d.theta0;
        let d1 = (f(t0 + h) - f(t0 - h)) / (2.0 * h);
        let d2 = (f(t0 + h) - 2.0 * f(t0) + f(t0 - h)) / (h * h);
        // central differences carry O(h^2 Phi''') truncation
        assert!(d1.abs() < 1e-6 * 0.7);
        assert!(d2.abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn theta_round_trip(re in -PI + 1e-6..PI - 1e-6, im in -3.0f64..-1e-3) {
            let theta = Complex64::new(re, im);
            let omega = 2.0 - 2.0 * theta.cos();
            let back = theta_from_omega(omega, None).unwrap();
            prop_assert!((back - theta).norm() < 1e-10);
        }

        #[test]
        fn spectral_point_invariants(re in -PI..PI, im in -3.0f64..0.0, m in 0.2f64..3.0, tilde in any::<bool>()) {
            let hp = if tilde { HalfPlane::Tilde } else { HalfPlane::Plain };
            let p = SpectralPoint::from_theta(Complex64::new(re, im), m, hp).unwrap();
            let om = p.omega();
            prop_assert!((2.0 - 2.0 * p.theta().cos() - om).norm() <= 1e-12 * (1.0 + om.norm()));
            prop_assert!((p.lambda() * p.lambda() - m * m - om).norm() <= 1e-12 * (1.0 + om.norm()));
            prop_assert!((p.z() - (-I * p.theta()).exp()).norm() < 1e-14);
            match hp {
                HalfPlane::Plain => prop_assert!(p.lambda().re >= 0.0),
                HalfPlane::Tilde => prop_assert!(p.lambda().re <= 0.0),
            }
        }
    }

    #[test]
    fn g_squared_identity_on_grid() {
        for m in [0.3, 1.0, 2.5] {
            for i in 0..1000 {
                let t = -PI + 2.0 * PI * i as f64 / 999.0;
                let gv = g_real(t, m);
                assert!((gv * gv - (2.0 - 2.0 * t.cos()) - m * m).abs() < 1e-12);
                assert!(gv >= m - 1e-15 && gv <= (m * m + 4.0).sqrt() + 1e-15);
            }
        }
    }

    #[test]
    fn phase_derivatives_match_finite_differences() {
        let h = 1e-5;
        for m in [0.5, 1.0, 2.0] {
            for i in 0..200 {
                let t = -PI + 0.1 + (2.0 * PI - 0.2) * i as f64 / 199.0;
                let v = 0.37;
                let p = phase(t, v, m);
                let f = |x: f64| phase(x, v, m);
                assert!(((f(t + h).value - f(t - h).value) / (2.0 * h) - p.d1).abs() < 1e-6);
                assert!(((f(t + h).d1 - f(t - h).d1) / (2.0 * h) - p.d2).abs() < 1e-6);
                assert!(((f(t + h).d2 - f(t - h).d2) / (2.0 * h) - p.d3).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn boundary_limit_from_above() {
        for i in 0..=30 {
            let w = 0.5 + 3.0 * i as f64 / 30.0;
            let near = theta_from_omega(Complex64::new(w, 1e-9), None).unwrap();
            let edge = theta_from_omega(cr(w), Some(BoundarySide::Upper)).unwrap();
            assert!((near - edge).norm() < 1e-4, "omega {w}: {near} vs {edge}");
        }
    }
}
