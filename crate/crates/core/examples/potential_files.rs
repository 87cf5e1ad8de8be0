//! Potential text files: writing, reading, validation errors with line numbers.
//!
//! cargo run --release --example potential_files

use discrete_dirac::cli::parse_potential;
use discrete_dirac::lattice::MatrixPotential;

fn main() -> discrete_dirac::Result<()> {
    let q = MatrixPotential::seeded_random(11, 2, 0.3)?;
    let text = q.to_text();
    print!("{text}");
    assert_eq!(MatrixPotential::parse(&text)?, q);

    for bad in ["0 0.1 0.2 0.3", "0 0.1 0.2 0.2 0.4\n0 1 1 1 1", "# comment\n1 0 0.5 0.4 0", "2 0 nan nan 0"] {
        match MatrixPotential::parse(bad) {
            Ok(_) => println!("accepted: {bad:?}"),
            Err(e) => println!("rejected: {e}"),
        }
    }
    for spec in ["zero", "single_site(0, 0.3, 0.2, 0.2, -0.25)", "exp_decay(1.0, 0.5, 3)", "seeded_random(1, 2, 0.0)"] {
        let q = parse_potential(spec)?;
        println!("{spec}: support {:?}, weighted l1 (sigma=1) {:.4}", q.support().map(|s| s.to_string()), q.weighted_l1(1.0));
    }
    Ok(())
}
