//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use discrete_dirac::decay::{run_decay_experiment, time_grid, DecayConfig, DecaySeries, NormKind};
use discrete_dirac::dispersion::{phase, BoundarySide, HalfPlane, SpectralPoint, StationaryData};
use discrete_dirac::free::{free_propagator_block, FreePropagatorTable};
use discrete_dirac::jost::{jost, Side};
use discrete_dirac::lattice::{LatticeWindow, MatrixPotential};
use discrete_dirac::propagator::{propagator_pc_oracle, propagator_pc_spectral};
use discrete_dirac::quadrature::QuadratureSpec;
use discrete_dirac::resolvent::{lap_probe, resolvent_kernel, TruncatedOperator};
use discrete_dirac::scattering::{
    detect_resonances, edge_wronskian, find_edge_resonance, scattering_coefficients, two_site_family,
    wronskian_constancy_check, Edge, RESONANCE_THRESHOLD, TWO_SITE_BRACKET,
};
use nalgebra::Matrix2;
use num_complex::Complex64;

type Outcome = Result<(bool, String), discrete_dirac::Error>;

fn generic_site() -> MatrixPotential {
    MatrixPotential::single_site(0, 0.3, 0.2, 0.2, -0.25).expect("valid site")
}

/// Five sites with entries uniform in [-1/4, 1/4]. Stronger barriers push
/// |a|^2 past 1e6 near the edges, where an absolute 1e-10 on |a|^2 - |b|^2 - 1
/// is below double precision.
fn random_set() -> Vec<MatrixPotential> {
    (0..10)
        .map(|s| MatrixPotential::seeded_random(s, 2, 0.0).and_then(|q| q.scaled(0.5)).expect("valid potential"))
        .collect()
}

fn strong_set() -> Vec<MatrixPotential> {
    (0..10).map(|s| MatrixPotential::seeded_random(100 + s, 3, 0.0).expect("valid potential")).collect()
}

fn band_thetas() -> Vec<f64> {
    (0..100).map(|j| -PI + (j as f64 + 0.5) * 2.0 * PI / 100.0).collect()
}

fn decay_times() -> Vec<f64> {
    time_grid(20.0, 400.0, 12, true).expect("valid grid")
}

fn slope_check(series: &DecaySeries, lo: f64, hi: f64, elapsed: Duration, limit: Duration) -> (bool, String) {
    let s = series.fitted_slope;
    let ok = (lo..=hi).contains(&s) && elapsed <= limit;
    (
        ok,
        format!(
            "slope {s:+.3} in [{lo}, {hi}], residual {:.3}, {:.0} s (limit {} s)",
            series.residual,
            elapsed.as_secs_f64(),
            limit.as_secs()
        ),
    )
}

fn decay_run(q: MatrixPotential, norm: NormKind, envelope: usize, lo: f64, hi: f64, limit: u64) -> Outcome {
    let start = Instant::now();
    let cfg = DecayConfig::new(1.0, q, norm, decay_times()).with_envelope(envelope);
    let series = run_decay_experiment(&cfg)?;
    Ok(slope_check(&series, lo, hi, start.elapsed(), Duration::from_secs(limit)))
}

fn c1() -> Outcome {
    let start = Instant::now();
    let cfg = DecayConfig::new(1.0, MatrixPotential::zero(), NormKind::L1Linf, decay_times());
    let series = run_decay_experiment(&cfg)?;
    let (ok, msg) = slope_check(&series, -0.40, -0.27, start.elapsed(), Duration::from_secs(120));
    let n = series.times.len();
    let late = series.refit(n / 5, n)?;
    let full = series.refit(0, n)?;
    Ok((ok, format!("{msg}; slope without first 20% {late:+.3} vs all {full:+.3}")))
}

fn c2() -> Outcome {
    decay_run(MatrixPotential::zero(), NormKind::L2Weighted { sigma: 1.0, hs: false }, 1, -0.58, -0.42, 300)
}

fn c3() -> Outcome {
    let flags = detect_resonances(&generic_site(), 1.0, RESONANCE_THRESHOLD)?.resonant_count();
    let (ok, msg) = decay_run(generic_site(), NormKind::L1Linf, 8, -0.40, -0.27, 300)?;
    Ok((ok && flags == 0, format!("{msg}; resonant edges {flags}")))
}

fn c4() -> Outcome {
    decay_run(generic_site(), NormKind::L2Weighted { sigma: 2.5, hs: false }, 8, -1.70, -1.30, 600)
}

fn c5() -> Outcome {
    decay_run(generic_site(), NormKind::L1wLinfw { sigma: 1.5 }, 8, -1.55, -1.15, 600)
}

fn c6() -> Outcome {
    let mut worst: f64 = 0.0;
    for q in random_set() {
        for &theta in &band_thetas() {
            let p = SpectralPoint::on_band(theta, 1.0, HalfPlane::Plain)?;
            let d = scattering_coefficients(&p, &q)?.unitarity_defect().expect("real theta");
            worst = worst.max(d.abs());
        }
    }
    let mut relative: f64 = 0.0;
    for q in strong_set() {
        for &theta in &band_thetas() {
            let sc = scattering_coefficients(&SpectralPoint::on_band(theta, 1.0, HalfPlane::Plain)?, &q)?;
            relative = relative.max(sc.unitarity_defect().expect("real theta").abs() / sc.a.norm_sqr());
        }
    }
    Ok((
        worst < 1e-10 && relative < 1e-13,
        format!("max ||a|^2 - |b_-|^2 - 1| = {worst:.2e} over 100 theta x 10 potentials; 7-site full-strength set, relative to |a|^2: {relative:.2e}"),
    ))
}

fn c7() -> Outcome {
    let window = LatticeWindow::symmetric(8);
    let pairs = LatticeWindow::new(-8, 7)?;
    let spread = |q: &MatrixPotential, theta: f64| -> discrete_dirac::Result<f64> {
        let p = SpectralPoint::on_band(theta, 1.0, HalfPlane::Plain)?;
        let a = jost(Side::Plus, &p, q, window)?.w();
        let b = jost(Side::Minus, &p, q, window)?.w();
        wronskian_constancy_check(&a, &b, pairs)
    };
    let mut worst: f64 = 0.0;
    for q in random_set() {
        for &theta in &band_thetas() {
            worst = worst.max(spread(&q, theta)?);
        }
    }
    let skew = MatrixPotential::from_entries_unchecked(0, vec![Matrix2::new(0.3, 0.2, -0.1, -0.25)]);
    let mut control = f64::INFINITY;
    for &theta in &band_thetas() {
        control = control.min(spread(&skew, theta)?);
    }
    Ok((
        worst < 1e-11 && control >= 1e-2,
        format!("max relative spread {worst:.2e}; q12 != q21 control min {control:.2e}"),
    ))
}

fn c8() -> Outcome {
    let q = MatrixPotential::seeded_random(5, 3, 0.0)?;
    let interior = LatticeWindow::symmetric(3);
    let lambdas = [Complex64::new(0.0, 3.0), Complex64::new(0.5, 0.0), Complex64::new(-0.5, 0.0)];
    let windows = [8usize, 16, 32, 64];
    let mut ok = true;
    let mut parts = Vec::new();
    for lambda in lambdas {
        let jk = resolvent_kernel(&SpectralPoint::from_lambda(lambda, 1.0)?, &q, interior, interior)?;
        let mut errs = Vec::new();
        for &n in &windows {
            let op = TruncatedOperator::new(1.0, &q, n)?;
            errs.push(jk.max_abs_diff(&op.dense_resolvent(lambda, interior, interior)?)?);
        }
        // each doubling at least halves the error until round-off
        let halving = errs.windows(2).all(|e| e[1] <= 0.5 * e[0] || e[1] < 1e-13);
        ok &= halving && *errs.last().unwrap() < 1e-8;
        parts.push(format!("{lambda}: {}", errs.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>().join(" ")));
    }
    Ok((ok, format!("errors at N = 8,16,32,64: {}", parts.join("; "))))
}

fn c9() -> Outcome {
    let eps = [1e-1, 1e-2, 1e-3, 1e-4];
    let mut ok = true;
    let mut parts = Vec::new();
    for lambda in [1.5, 1.7, -1.5] {
        let t = lap_probe(1.0, &generic_site(), lambda, BoundarySide::Upper, &eps, 1.5, 10)?;
        ok &= t.monotone && t.final_distance() < 1e-3;
        parts.push(format!("{lambda:+}: monotone={} final {:.2e}", t.monotone, t.final_distance()));
    }
    let free = lap_probe(1.0, &MatrixPotential::zero(), 1.5, BoundarySide::Upper, &eps, 1.0, 3)?;
    ok &= free.monotone && free.final_distance() < 1e-3;
    parts.push(format!("free sigma=1: final {:.2e}", free.final_distance()));
    Ok((ok, parts.join("; ")))
}

fn c10() -> Outcome {
    let quad = QuadratureSpec::default();
    let range = LatticeWindow::symmetric(10);
    let op = TruncatedOperator::new(1.0, &MatrixPotential::zero(), 200)?;
    let (mut a, mut b): (f64, f64) = (0.0, 0.0);
    for t in [0.0, 10.0, 25.0, 50.0] {
        let s = propagator_pc_spectral(t, &MatrixPotential::zero(), 1.0, range, range, &quad)?;
        let o = propagator_pc_oracle(t, &op, range, range)?;
        b = b.max(s.kernel.max_abs_diff(&o.kernel)?);
        for (n, k) in [(0, 0), (4, -3), (-10, 10), (7, 7)] {
            let om = free_propagator_block(t, n, k, 1.0, &quad)?.block;
            a = a.max((om - s.kernel.get(n, k)?).norm());
            b = b.max((om - o.kernel.get(n, k)?).norm());
        }
    }
    Ok((a < 1e-8 && b < 1e-8, format!("spectral vs closed form {a:.1e}; vs dense exponential {b:.1e} (t <= 50)")))
}

fn c11() -> Outcome {
    let free = detect_resonances(&MatrixPotential::zero(), 1.0, RESONANCE_THRESHOLD)?.resonant_count();
    let generic = detect_resonances(&generic_site(), 1.0, RESONANCE_THRESHOLD)?.resonant_count();
    let (lo, hi) = TWO_SITE_BRACKET;
    let w = |s: f64| -> discrete_dirac::Result<f64> { Ok(edge_wronskian(Edge::LowerPositive, &two_site_family(s)?, 1.0)?.0.re) };
    let crossing = w(lo)?.signum() != w(hi)?.signum();
    let root = find_edge_resonance(two_site_family, Edge::LowerPositive, 1.0, TWO_SITE_BRACKET, 1e-12)?;
    let tuned = detect_resonances(&two_site_family(root.parameter)?, 1.0, RESONANCE_THRESHOLD)?;
    let ok = free == 4 && generic == 0 && crossing && root.width < 1e-10 && tuned.resonant_count() == 1 && tuned.edge(Edge::LowerPositive).resonant;
    Ok((
        ok,
        format!(
            "free {free} flags, generic {generic}, tuned s = {:.12} (width {:.1e}) {} flag(s)",
            root.parameter,
            root.width,
            tuned.resonant_count()
        ),
    ))
}

fn c12() -> Outcome {
    let d = StationaryData::new(1.0);
    let kappa = (3.0 - 5f64.sqrt()) / 2.0;
    let h = 1e-5;
    let th = d.theta0;
    let fd1 = (phase(th + h, d.v0, 1.0).value - phase(th - h, d.v0, 1.0).value) / (2.0 * h);
    let fd2 = (phase(th + h, d.v0, 1.0).d1 - phase(th - h, d.v0, 1.0).d1) / (2.0 * h);
    let fd3 = (phase(th + h, d.v0, 1.0).d2 - phase(th - h, d.v0, 1.0).d2) / (2.0 * h);
    let exact = phase(th, d.v0, 1.0);
    let mut ok = (d.kappa - kappa).abs() < 1e-14 && (d.v0 - kappa.sqrt()).abs() < 1e-14;
    ok &= fd1.abs() < 1e-10 && fd2.abs() < 1e-10 && (fd3 - kappa.sqrt()).abs() < 1e-8;
    ok &= (exact.d3 - kappa.sqrt()).abs() < 1e-8;
    let quad = QuadratureSpec::default();
    let mut rays = Vec::new();
    for t in [100.0, 200.0, 300.0, 400.0] {
        let table = FreePropagatorTable::new(t, 1.0, (2.0 * d.v0 * t) as usize + 100, &quad)?;
        let (_, at) = table.sup_entry();
        let off = (at as f64 - d.v0 * t).abs();
        ok &= off <= 0.1 * t;
        rays.push(format!("t={t}: |n-k|={at}"));
    }
    Ok((
        ok,
        format!(
            "Phi' {fd1:.1e}, Phi'' {fd2:.1e}, Phi''' - sqrt(kappa) {:.1e}; argmax {}",
            fd3 - kappa.sqrt(),
            rays.join(", ")
        ),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("free l1 -> l_inf decay", c1),
        ("free weighted l2 decay", c2),
        ("perturbed l1 -> l_inf decay", c3),
        ("perturbed weighted l2 decay", c4),
        ("perturbed weighted sup decay", c5),
        ("unitarity", c6),
        ("Wronskian constancy", c7),
        ("resolvent cross-check", c8),
        ("limiting absorption", c9),
        ("free spectral consistency", c10),
        ("resonance dichotomy", c11),
        ("stationary phase", c12),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!("{} {:2} {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
