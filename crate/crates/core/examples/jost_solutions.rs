//! Jost solutions of `(D - lambda) w = 0` for a short-range potential: the
//! difference-equation residual, the tilde branch, and growth of theta-derivatives.
//!
//! cargo run --release --example jost_solutions

use discrete_dirac::dispersion::{HalfPlane, SpectralPoint};
use discrete_dirac::jost::{check_derivative_growth, jost, GrowthRegion, Side};
use discrete_dirac::lattice::{LatticeWindow, MatrixPotential};

fn main() -> discrete_dirac::Result<()> {
    let m = 1.0;
    let q = MatrixPotential::exp_decay(0.5, 0.7, 12)?;
    let window = LatticeWindow::symmetric(20);

    println!("theta      branch  side   |w_0|        residual");
    for theta in [-2.5, -1.0, -0.2, 0.4, 1.8] {
        for branch in [HalfPlane::Plain, HalfPlane::Tilde] {
            let p = SpectralPoint::on_band(theta, m, branch)?;
            for side in [Side::Plus, Side::Minus] {
                let sol = jost(side, &p, &q, window)?;
                println!(
                    "{theta:+.2}      {branch:?}  {side:?}  {:.6e}  {:.2e}",
                    sol.w_at(0)?.norm(),
                    sol.residual(&q)?
                );
            }
        }
    }

    // band edges need no special treatment
    let edge = SpectralPoint::on_band(0.0, m, HalfPlane::Plain)?;
    println!("edge theta = 0 residual {:.2e}", jost(Side::Plus, &edge, &q, window)?.residual(&q)?);

    // boundedness means the ratio does not grow when the range doubles
    let interior: Vec<f64> = (0..30).map(|i| -2.8 + 0.09 * i as f64).filter(|t: &f64| t.abs() > 0.3).collect();
    let full: Vec<f64> = (0..64).map(|i| -3.1 + 0.1 * i as f64).collect();
    for (region, grid) in [(GrowthRegion::Interior, &interior), (GrowthRegion::WithEdges, &full)] {
        for order in 1..=2 {
            let ratios: Vec<f64> = [30, 60, 120]
                .iter()
                .map(|&n| check_derivative_growth(Side::Plus, HalfPlane::Plain, m, &q, grid, LatticeWindow::new(-n, 0)?, order, region))
                .map(|r| r.map(|r| r.max_ratio))
                .collect::<discrete_dirac::Result<_>>()?;
            println!("{region:?} order {order}: sup ratio to envelope on n >= -30, -60, -120: {ratios:.3?}");
        }
    }
    Ok(())
}
