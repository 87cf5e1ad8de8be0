//! Edge resonances: the free operator is resonant at all four band edges, a
//! generic site at none, and a one-parameter family can be tuned onto one.
//!
//! cargo run --release --example resonances

use discrete_dirac::lattice::MatrixPotential;
use discrete_dirac::scattering::{
    detect_resonances, find_edge_resonance, two_site_family, Edge, ResonanceReport, RESONANCE_THRESHOLD, TWO_SITE_BRACKET,
};

fn show(name: &str, r: &ResonanceReport) {
    println!("{name}: {} resonant edge(s)", r.resonant_count());
    for e in &r.edges {
        println!("  {:7} lambda={:+.6}  |W|/scale={:.3e}  {}", e.edge.label(), e.lambda, e.wronskian.norm() / e.scale, if e.resonant { "resonant" } else { "" });
    }
}

fn main() -> discrete_dirac::Result<()> {
    let m = 1.0;
    show("free", &detect_resonances(&MatrixPotential::zero(), m, RESONANCE_THRESHOLD)?);
    let generic = MatrixPotential::single_site(0, 0.3, 0.2, 0.2, -0.25)?;
    show("generic single site", &detect_resonances(&generic, m, RESONANCE_THRESHOLD)?);

    let root = find_edge_resonance(two_site_family, Edge::LowerPositive, m, TWO_SITE_BRACKET, 1e-12)?;
    println!("tuned s = {:.15} (bracket width {:.1e}, {} steps)", root.parameter, root.width, root.iterations);
    show("tuned two-site", &detect_resonances(&two_site_family(root.parameter)?, m, RESONANCE_THRESHOLD)?);
    Ok(())
}
