//! Resolvent kernels from Jost data against a dense finite-section solve, and
//! the limiting absorption table `R(lambda + i eps) -> R(lambda + i0)`.
//!
//! cargo run --release --example resolvent_kernels

use discrete_dirac::dispersion::{BoundarySide, SpectralPoint};
use discrete_dirac::lattice::{LatticeWindow, MatrixPotential};
use discrete_dirac::resolvent::{lap_probe, resolvent_kernel, TruncatedOperator};
use num_complex::Complex64;

fn main() -> discrete_dirac::Result<()> {
    let m = 1.0;
    let q = MatrixPotential::single_site(0, 0.3, 0.2, 0.2, -0.25)?;
    let interior = LatticeWindow::symmetric(10);
    for n in [50, 100, 200] {
        let op = TruncatedOperator::new(m, &q, n)?;
        print!("N = {n:3}:");
        for lambda in [Complex64::new(0.0, 3.0), Complex64::new(0.5, 0.0), Complex64::new(-0.5, 0.0)] {
            let jk = resolvent_kernel(&SpectralPoint::from_lambda(lambda, m)?, &q, interior, interior)?;
            let dk = op.dense_resolvent(lambda, interior, interior)?;
            print!("  lambda={lambda}: {:.1e}", jk.max_abs_diff(&dk)?);
        }
        println!();
    }

    let eps: Vec<f64> = vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
    for lambda in [1.5, 1.7, -1.5] {
        let table = lap_probe(m, &q, lambda, BoundarySide::Upper, &eps, 1.5, 10)?;
        println!("lambda = {lambda:+}: monotone = {}", table.monotone);
        for row in &table.rows {
            println!("  eps={:.0e}  N={:6}  distance={:.3e}", row.eps, row.half_width, row.distance);
        }
    }
    Ok(())
}
