//! Transmission and reflection coefficients over the positive band, with the
//! unitarity relation |a|^2 - |b|^2 = 1 and Wronskian constancy.
//!
//! cargo run --release --example scattering_data

use std::f64::consts::PI;

use discrete_dirac::dispersion::{HalfPlane, SpectralPoint};
use discrete_dirac::jost::{jost, Side};
use discrete_dirac::lattice::{LatticeWindow, MatrixPotential};
use discrete_dirac::scattering::{scattering_coefficients, scattering_relation_residual, wronskian_constancy_check};

fn main() -> discrete_dirac::Result<()> {
    let m = 1.0;
    let q = MatrixPotential::seeded_random(7, 4, 0.0)?;
    println!("theta     |T|        |R+|       |T|^2+|R+|^2  unitarity  relation");
    for i in 1..12 {
        let theta = -PI + 2.0 * PI * i as f64 / 12.0;
        if theta.sin().abs() < 1e-9 {
            continue;
        }
        let p = SpectralPoint::on_band(theta, m, HalfPlane::Plain)?;
        let sc = scattering_coefficients(&p, &q)?;
        let r = sc.r_plus.unwrap();
        println!(
            "{theta:+.3}   {:.6}   {:.6}   {:.12}  {:.1e}    {:.1e}",
            sc.t.norm(),
            r.norm(),
            sc.t.norm_sqr() + r.norm_sqr(),
            sc.unitarity_defect().unwrap(),
            scattering_relation_residual(&p, &q, LatticeWindow::symmetric(8))?
        );
    }

    let p = SpectralPoint::on_band(-1.3, m, HalfPlane::Plain)?;
    let window = LatticeWindow::symmetric(15);
    let plus = jost(Side::Plus, &p, &q, window)?.w();
    let minus = jost(Side::Minus, &p, &q, window)?.w();
    println!("Wronskian relative spread on [-15, 14]: {:.2e}", wronskian_constancy_check(&plus, &minus, LatticeWindow::new(-15, 14)?)?);

    // a coupling with q12 != q21 breaks constancy
    let skew = MatrixPotential::from_entries_unchecked(0, vec![nalgebra::Matrix2::new(0.2, 0.3, -0.1, 0.1)]);
    let plus = jost(Side::Plus, &p, &skew, window)?.w();
    let minus = jost(Side::Minus, &p, &skew, window)?.w();
    println!("with q12 != q21: {:.2e}", wronskian_constancy_check(&plus, &minus, LatticeWindow::new(-15, 14)?)?);
    Ok(())
}
