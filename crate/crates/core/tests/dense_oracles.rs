//! Finite-section identities and cross-checks between the Jost formulas and
//! dense linear algebra.

use discrete_dirac::dispersion::SpectralPoint;
use discrete_dirac::kernel::KernelBlockMatrix;
use discrete_dirac::lattice::{LatticeWindow, MatrixPotential};
use discrete_dirac::propagator::propagator_pc_oracle;
use discrete_dirac::resolvent::{pc_projector, resolvent_kernel, TruncatedOperator};
use faer::Mat;
use num_complex::Complex64;

fn dense(k: &KernelBlockMatrix) -> Mat<Complex64> {
    k.to_dense()
}

fn max_abs(a: &Mat<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max(a[(i, j)].norm());
        }
    }
    worst
}

fn generic() -> MatrixPotential {
    MatrixPotential::single_site(0, 0.3, 0.2, 0.2, -0.25).unwrap()
}

#[test]
fn first_resolvent_identity() {
    let op = TruncatedOperator::new(1.0, &MatrixPotential::seeded_random(2, 3, 0.0).unwrap(), 25).unwrap();
    let w = op.window();
    let (z1, z2) = (Complex64::new(0.3, 0.7), Complex64::new(-1.6, 0.2));
    let r1 = dense(&op.dense_resolvent(z1, w, w).unwrap());
    let r2 = dense(&op.dense_resolvent(z2, w, w).unwrap());
    let rhs = (&r1 * &r2) * faer::Scale(z1 - z2);
    assert!(max_abs(&(&r1 - &r2 - rhs)) < 1e-11);
}

#[test]
fn jost_kernel_is_symmetric_in_sites() {
    // D is real symmetric, so R(lambda)_{n,k} = R(lambda)_{k,n}^T
    let q = MatrixPotential::seeded_random(9, 2, 0.0).unwrap();
    let r = LatticeWindow::symmetric(5);
    for lambda in [Complex64::new(0.2, 1.0), Complex64::new(-2.8, 0.0), Complex64::new(1.4, -0.3)] {
        let k = resolvent_kernel(&SpectralPoint::from_lambda(lambda, 1.0).unwrap(), &q, r, r).unwrap();
        for (n, kk, b) in k.iter() {
            assert!((b - k.get(kk, n).unwrap().transpose()).norm() < 1e-12, "lambda {lambda} ({n},{kk})");
        }
    }
}

#[test]
fn jost_kernel_matches_dense_on_random_potentials() {
    for seed in 0..5 {
        let q = MatrixPotential::seeded_random(seed, 4, 0.1).unwrap();
        let op = TruncatedOperator::new(0.8, &q, 80).unwrap();
        let r = LatticeWindow::symmetric(6);
        for lambda in [Complex64::new(0.0, 2.0), Complex64::new(1.5, 0.4), Complex64::new(-0.3, 0.0)] {
            let point = SpectralPoint::from_lambda(lambda, 0.8).unwrap();
            // an eigenvalue in the gap makes the real point a pole on both sides
            let Ok(j) = resolvent_kernel(&point, &q, r, r) else { continue };
            let d = op.dense_resolvent(lambda, r, r).unwrap();
            assert!(j.max_abs_diff(&d).unwrap() < 1e-9, "seed {seed} lambda {lambda}");
        }
    }
}

#[test]
fn projector_commutes_and_is_idempotent() {
    let q = MatrixPotential::single_site(0, -3.0, 0.5, 0.5, 2.0).unwrap();
    let op = TruncatedOperator::new(1.0, &q, 60).unwrap();
    let p = pc_projector(&op).unwrap();
    assert!(p.rank_deficiency() >= 2);
    let pd = p.to_dense();
    assert!((&pd * &pd - &pd).norm_max() < 1e-12);
    assert!((&pd * op.matrix() - op.matrix() * &pd).norm_max() < 1e-11);
}

#[test]
fn propagator_group_law_and_isometry() {
    let op = TruncatedOperator::new(1.0, &MatrixPotential::single_site(0, -2.5, 0.0, 0.0, 0.5).unwrap(), 40).unwrap();
    let w = op.window();
    let u = |t: f64| dense(&propagator_pc_oracle(t, &op, w, w).unwrap().kernel);
    let (a, b, ab) = (u(1.3), u(2.4), u(3.7));
    assert!(max_abs(&(&a * &b - &ab)) < 1e-11);
    let p = u(0.0);
    assert!(max_abs(&(a.adjoint() * &a - &p)) < 1e-11);
    // P_c commutes with the group
    assert!(max_abs(&(&p * &a - &a)) < 1e-11);
}

#[test]
fn oracle_has_a_light_cone_for_the_free_operator() {
    // entries of exp(-itD0) decay superexponentially once |n - k| exceeds e t
    let op = TruncatedOperator::new(1.0, &MatrixPotential::zero(), 120).unwrap();
    let r = LatticeWindow::symmetric(60);
    let t = 10.0;
    let k = propagator_pc_oracle(t, &op, r, LatticeWindow::new(0, 0).unwrap()).unwrap();
    for (n, _, b) in k.kernel.iter() {
        if n.abs() > 40 {
            assert!(b.iter().all(|z| z.norm() < 1e-8), "site {n}");
        }
    }
}

#[test]
fn generic_site_has_no_embedded_states() {
    let op = TruncatedOperator::new(1.0, &generic(), 150).unwrap();
    assert!(discrete_dirac::resolvent::embedded_eigenvalue_scan(&op, 1e-8).unwrap().is_empty());
}
