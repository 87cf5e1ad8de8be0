//! The free propagator `exp(-it D_0)`: band-weight integral, Toeplitz table,
//! dense oracle, and where its sup norm sits.
//!
//! cargo run --release --example free_kernel

use discrete_dirac::dispersion::StationaryData;
use discrete_dirac::free::{free_propagator_block, FreePropagatorTable};
use discrete_dirac::lattice::{LatticeWindow, MatrixPotential};
use discrete_dirac::propagator::propagator_pc_oracle;
use discrete_dirac::quadrature::QuadratureSpec;
use discrete_dirac::resolvent::TruncatedOperator;

fn main() -> discrete_dirac::Result<()> {
    let m = 1.0;
    let quad = QuadratureSpec::default();
    let op = TruncatedOperator::new(m, &MatrixPotential::zero(), 300)?;
    for (t, n, k) in [(0.0, 0, 0), (10.0, 3, 0), (50.0, -20, 10)] {
        let b = free_propagator_block(t, n, k, m, &quad)?;
        let table = FreePropagatorTable::new(t, m, 40, &quad)?.block(n - k)?;
        let oracle = propagator_pc_oracle(t, &op, LatticeWindow::new(n, n)?, LatticeWindow::new(k, k)?)?.kernel.get(n, k)?;
        println!(
            "t={t:4} (n,k)=({n},{k}): uu={:.6}  |omega-table|={:.1e}  |omega-oracle|={:.1e}  quad error {:.1e}",
            b.block[(0, 0)],
            (b.block - table).norm(),
            (b.block - oracle).norm(),
            b.error_estimate
        );
    }
    let v0 = StationaryData::new(m).v0;
    for t in [100.0, 200.0, 400.0] {
        let table = FreePropagatorTable::new(t, m, (v0 * t) as usize + 100, &quad)?;
        let (sup, d) = table.sup_entry();
        println!("t={t}: sup={sup:.5}  t^(1/3) sup={:.4}  argmax |n-k|={d}  v0 t={:.1}", sup * t.cbrt(), v0 * t);
    }
    Ok(())
}
