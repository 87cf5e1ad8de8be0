//! Scattering data against a transfer-matrix computation written from the
//! difference equation alone.

use discrete_dirac::dispersion::{g_real, HalfPlane, SpectralPoint};
use discrete_dirac::lattice::{LatticeWindow, MatrixPotential};
use discrete_dirac::scattering::{scattering_coefficients, wronskian_constancy_check};
use discrete_dirac::jost::{jost, Side};
use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use proptest::prelude::*;

type C = Complex64;

/// Solves `(D - lambda) w = 0` one site to the right.
///
/// The v-row at n+1 and the u-row at n give
/// `v_{n+1} = (m + q11 - lambda) u_n + (1 + q12) v_n` and
/// `u_{n+1} = (u_n - (q22 - m - lambda) v_{n+1}) / (1 + q21)` with `Q = Q_{n+1}` in the second.
fn step(u: C, v: C, qn: Matrix2<f64>, qn1: Matrix2<f64>, m: f64, lambda: f64) -> (C, C) {
    let v1 = u * (m + qn[(0, 0)] - lambda) + v * (1.0 + qn[(0, 1)]);
    let u1 = (u - v1 * (qn1[(1, 1)] - m - lambda)) / (1.0 + qn1[(1, 0)]);
    (u1, v1)
}

/// `|T|` and `|R|` by shooting a single free mode through the support from the right.
fn transfer_oracle(q: &MatrixPotential, m: f64, lambda: f64) -> (f64, f64) {
    let s = q.support().unwrap();
    let k = ((2.0 + m * m - lambda * lambda) / 2.0).acos();
    let zeta = C::from_polar(1.0, k);
    // free modes u = zeta^{+-n}, v = (lambda - m) / (1 - zeta^{+-1}) zeta^{+-n}
    let beta = |z: C| (lambda - m) / (C::new(1.0, 0.0) - z);
    let (lo, hi) = (s.n_min() - 2, s.n_max() + 2);
    // the recursion runs right to left, so invert the one-step map numerically
    let back = |u1: C, v1: C, n: i64| -> (C, C) {
        let a = step(C::new(1.0, 0.0), C::new(0.0, 0.0), q.at(n), q.at(n + 1), m, lambda);
        let b = step(C::new(0.0, 0.0), C::new(1.0, 0.0), q.at(n), q.at(n + 1), m, lambda);
        let t = Matrix2::new(a.0, b.0, a.1, b.1);
        let x = t.try_inverse().unwrap() * Vector2::new(u1, v1);
        (x[0], x[1])
    };
    let (mut u, mut v) = (zeta.powi(hi as i32), beta(zeta) * zeta.powi(hi as i32));
    for n in (lo..hi).rev() {
        (u, v) = back(u, v, n);
    }
    // decompose at lo into alpha zeta^n e_+ + gamma zeta^{-n} e_-
    let zi = zeta.inv();
    let basis = Matrix2::new(zeta.powi(lo as i32), zi.powi(lo as i32), beta(zeta) * zeta.powi(lo as i32), beta(zi) * zi.powi(lo as i32));
    let c = basis.try_inverse().unwrap() * Vector2::new(u, v);
    (1.0 / c[0].norm(), c[1].norm() / c[0].norm())
}

fn potentials() -> Vec<MatrixPotential> {
    let mut out: Vec<MatrixPotential> = (0..6).map(|s| MatrixPotential::seeded_random(s, 3, 0.2).unwrap()).collect();
    out.push(MatrixPotential::single_site(0, 0.3, 0.2, 0.2, -0.25).unwrap());
    out.push(MatrixPotential::single_site(2, -2.0, 0.4, 0.4, 1.0).unwrap());
    out
}

#[test]
fn transmission_matches_transfer_matrix() {
    let m = 1.0;
    for q in potentials() {
        for i in 1..24 {
            let theta = -std::f64::consts::PI * i as f64 / 24.0;
            let p = SpectralPoint::on_band(theta, m, HalfPlane::Plain).unwrap();
            let sc = scattering_coefficients(&p, &q).unwrap();
            let (t, r) = transfer_oracle(&q, m, g_real(theta, m));
            assert!((sc.t.norm() - t).abs() < 1e-10, "theta {theta}: |T| {} vs {t}", sc.t.norm());
            let rp = sc.r_plus.unwrap().norm();
            let rm = sc.r_minus.unwrap().norm();
            assert!((rp - r).abs() < 1e-10 && (rm - r).abs() < 1e-10, "theta {theta}: |R| {rp} {rm} vs {r}");
        }
    }
}

#[test]
fn free_transfer_oracle_is_reflectionless() {
    // a potential that vanishes on its only site is trimmed, so use a tiny one
    let q = MatrixPotential::single_site(0, 1e-300, 0.0, 0.0, 0.0).unwrap();
    let (t, r) = transfer_oracle(&q, 1.0, 1.7);
    assert!((t - 1.0).abs() < 1e-14 && r < 1e-14);
}

#[test]
fn translation_leaves_moduli_unchanged() {
    let m = 0.7;
    let q = MatrixPotential::seeded_random(3, 2, 0.0).unwrap();
    let shifted = MatrixPotential::from_sites(q.iter().map(|(n, b)| (n + 5, b))).unwrap();
    for theta in [-2.9, -1.4, -0.3, 0.8, 2.2] {
        for branch in [HalfPlane::Plain, HalfPlane::Tilde] {
            let p = SpectralPoint::on_band(theta, m, branch).unwrap();
            let (a, b) = (scattering_coefficients(&p, &q).unwrap(), scattering_coefficients(&p, &shifted).unwrap());
            assert!((a.t.norm() - b.t.norm()).abs() < 1e-12);
            assert!((a.r_plus.unwrap().norm() - b.r_plus.unwrap().norm()).abs() < 1e-12);
        }
    }
}

#[test]
fn asymmetric_coupling_breaks_constancy() {
    let m = 1.0;
    let q = MatrixPotential::from_entries_unchecked(0, vec![Matrix2::new(0.1, 0.4, 0.1, -0.2)]);
    let p = SpectralPoint::on_band(-1.1, m, HalfPlane::Plain).unwrap();
    let w = LatticeWindow::symmetric(6);
    let a = jost(Side::Plus, &p, &q, w).unwrap().w();
    let b = jost(Side::Minus, &p, &q, w).unwrap().w();
    assert!(wronskian_constancy_check(&a, &b, LatticeWindow::new(-6, 5).unwrap()).unwrap() >= 1e-2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unitarity_and_constancy_hold(seed in 0u64..10_000, half in 0usize..5, theta in -3.1f64..3.1, m in 0.2f64..3.0) {
        prop_assume!(theta.sin().abs() > 1e-3);
        let q = MatrixPotential::seeded_random(seed, half, 0.0).unwrap();
        for branch in [HalfPlane::Plain, HalfPlane::Tilde] {
            let p = SpectralPoint::on_band(theta, m, branch).unwrap();
            let sc = scattering_coefficients(&p, &q).unwrap();
            // round-off scales with |a|^2 (which grows like 1/sin^2 theta at the edges)
            // and with the cancellation scale / |W| inside the Wronskians
            let cond = (sc.scale / sc.w.norm()).max(1.0);
            prop_assert!(sc.unitarity_defect().unwrap().abs() < 1e-14 * cond * sc.a.norm_sqr().max(1.0));
            prop_assert!(sc.energy_defect().unwrap() < 1e-9);
            let w = LatticeWindow::symmetric(half + 4);
            let a = jost(Side::Plus, &p, &q, w).unwrap().w();
            let b = jost(Side::Minus, &p, &q, w).unwrap().w();
            let r = wronskian_constancy_check(&a, &b, LatticeWindow::new(-(half as i64) - 4, half as i64 + 3).unwrap()).unwrap();
            prop_assert!(r < 1e-11, "relative spread {}", r);
        }
    }

    #[test]
    fn potential_text_round_trips(seed in 0u64..10_000, half in 0usize..6, rate in 0.0f64..1.0) {
        let q = MatrixPotential::seeded_random(seed, half, rate).unwrap();
        prop_assert_eq!(MatrixPotential::parse(&q.to_text()).unwrap(), q);
    }
}
