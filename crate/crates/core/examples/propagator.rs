//! The continuous-spectrum propagator by theta-quadrature and by the
//! eigendecomposition oracle, and the time-reversal adjoint check.
//!
//! This potential has a bound state 0.0045 above the outer band edge. The
//! default edge margin 10/N tags it as continuum, so the oracle is built
//! with a tighter margin and the default is shown for contrast.
//!
//! cargo run --release --example propagator

use discrete_dirac::lattice::{LatticeWindow, MatrixPotential};
use discrete_dirac::propagator::{propagator_pc_oracle, propagator_pc_spectral};
use discrete_dirac::quadrature::QuadratureSpec;
use discrete_dirac::resolvent::TruncatedOperator;

fn main() -> discrete_dirac::Result<()> {
    let m = 1.0;
    let q = MatrixPotential::single_site(0, -2.0, 0.4, 0.4, 1.0)?;
    let interior = LatticeWindow::symmetric(30);
    let quad = QuadratureSpec::default();
    let coarse = TruncatedOperator::new(m, &q, 400)?;
    let reference = propagator_pc_spectral(0.0, &q, m, interior, interior, &quad)?;
    println!(
        "margin {:.3}: bound {:?}, |P_c spectral - oracle| = {:.1e}",
        coarse.edge_margin(),
        coarse.bound_states()?,
        reference.kernel.max_abs_diff(&propagator_pc_oracle(0.0, &coarse, interior, interior)?.kernel)?
    );
    let op = TruncatedOperator::new(m, &q, 400)?.with_edge_margin(1e-3);
    println!("margin 0.001: bound {:?}", op.bound_states()?);
    for t in [0.0, 5.0, 20.0, 50.0] {
        let s = propagator_pc_spectral(t, &q, m, interior, interior, &quad)?;
        let o = propagator_pc_oracle(t, &op, interior, interior)?;
        let back = propagator_pc_spectral(-t, &q, m, interior, interior, &quad)?;
        println!(
            "t={t:5}: |spectral - oracle| = {:.1e}  quad error {:.1e}  adjoint defect {:.1e}",
            s.kernel.max_abs_diff(&o.kernel)?,
            s.quad_error.unwrap(),
            s.adjoint_defect(&back)?
        );
    }
    Ok(())
}
