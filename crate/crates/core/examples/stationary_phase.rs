//! The degenerate stationary point of `g(theta) + v theta` and the domain split.
//!
//! cargo run --release --example stationary_phase

use discrete_dirac::decay::split_domains;
use discrete_dirac::dispersion::{phase, stationary_points, StationaryData};

fn main() -> discrete_dirac::Result<()> {
    for m in [0.5, 1.0, 2.0] {
        let d = StationaryData::new(m);
        let p = phase(d.theta0, d.v0, m);
        println!(
            "m={m}: kappa={:.12} v0={:.12} theta0={:.12} Phi'={:.1e} Phi''={:.1e} Phi'''={:.12} nu={:.4}",
            d.kappa, d.v0, d.theta0, p.d1, p.d2, p.d3, d.nu
        );
    }
    let d = StationaryData::new(1.0);
    for v in [0.3, d.v0, 0.7] {
        let (pts, _) = stationary_points(v, 1.0);
        println!("v={v:.6}: {:?}", pts);
    }
    let s = split_domains(d.v0, 1.0)?;
    println!("J+ = {:?}\nJ- = {:?}\nJ  = {:?}", s.j_plus, s.j_minus, s.j);
    println!("min |Phi''| on J at v0: {:.4}", s.min_curvature_on_j(d.v0, 4000));
    Ok(())
}
