//! Dispersive decay: fitted power laws of propagator norms.
//!
//! cargo run --release --example decay_rates            # free l1 -> l-infinity only
//! cargo run --release --example decay_rates -- all     # all five rate runs (several minutes)

use discrete_dirac::decay::{run_decay_experiment, time_grid, DecayConfig, NormKind};
use discrete_dirac::lattice::MatrixPotential;

fn main() -> discrete_dirac::Result<()> {
    let all = std::env::args().any(|a| a == "all");
    let times = time_grid(20.0, 400.0, 12, true)?;
    let q = MatrixPotential::single_site(0, 0.3, 0.2, 0.2, -0.25)?;
    let mut runs = vec![("free", MatrixPotential::zero(), NormKind::L1Linf, 1, "-1/3")];
    if all {
        runs.push(("free", MatrixPotential::zero(), NormKind::L2Weighted { sigma: 1.0, hs: false }, 1, "-1/2"));
        runs.push(("generic site", q.clone(), NormKind::L1Linf, 8, "-1/3"));
        runs.push(("generic site", q.clone(), NormKind::L2Weighted { sigma: 2.5, hs: false }, 8, "-3/2"));
        runs.push(("generic site", q, NormKind::L1wLinfw { sigma: 1.5 }, 8, "-4/3"));
    }
    for (name, pot, norm, envelope, target) in runs {
        let cfg = DecayConfig::new(1.0, pot, norm, times.clone()).with_envelope(envelope);
        let s = run_decay_experiment(&cfg)?;
        println!("{name:13} {norm:22} slope {:+.3} (target {target}), residual {:.3}", s.fitted_slope, s.residual);
        print!("{}", s.to_csv());
    }
    Ok(())
}
