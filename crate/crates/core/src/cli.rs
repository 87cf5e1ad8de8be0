//! The `ddirac` command line: argument and config-file handling, the six
//! subcommands and their CSV output.
//!
//! Every flag can also be given as `key = value` in a `--config` file (the
//! key is the flag name without dashes); command-line values win.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::decay::{run_decay_experiment, time_grid, DecayConfig, NormKind};
use crate::dispersion::{HalfPlane, SpectralPoint, StationaryData};
use crate::error::{Error, Result};
use crate::free::{free_propagator_block, FreePropagatorTable};
use crate::lattice::{Block, LatticeWindow, MatrixPotential, ModelParams};
use crate::propagator::{propagator_pc_oracle, propagator_pc_spectral, Method, PropagatorSnapshot};
use crate::quadrature::QuadratureSpec;
use crate::resolvent::{pc_projector, TruncatedOperator};
use crate::scattering::{
    detect_resonances, find_edge_resonance, scattering_coefficients, two_site_family, Edge, ResonanceReport,
    RESONANCE_THRESHOLD,
};

#[derive(Debug, Parser)]
#[command(name = "ddirac", version, about = "Discrete Dirac operator: spectra, scattering and dispersive decay")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Finite-section eigenvalues with bound/continuum tags
    Spectrum(Flags),
    /// Scattering data over a theta grid
    Scattering(Flags),
    /// Edge Wronskians and resonance verdicts
    Resonances(Flags),
    /// Propagator kernel snapshots
    Evolve(Flags),
    /// Operator-norm decay series with a fitted power law
    Decay(Flags),
    /// One block of the free propagator
    FreeKernel(Flags),
}

#[derive(Debug, Clone, Default, Args)]
struct Flags {
    #[arg(long, allow_hyphen_values = true)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    mass: Option<f64>,
    /// file path or zero | single_site(n,q11,q12,q21,q22) | exp_decay(a,rate,h) | seeded_random(seed,h,rate)
    #[arg(long, allow_hyphen_values = true)]
    potential: Option<String>,
    /// finite-section half-width N
    #[arg(long, allow_hyphen_values = true)]
    window: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<f64>,
    /// l1_linf | l2w | l2w_hs | l1w_linfw
    #[arg(long, allow_hyphen_values = true)]
    norm: Option<String>,
    /// a:b:points[:log|:lin]
    #[arg(long = "t-grid", allow_hyphen_values = true)]
    t_grid: Option<String>,
    /// a:b:points
    #[arg(long = "theta-grid", allow_hyphen_values = true)]
    theta_grid: Option<String>,
    /// spectral | oracle (evolve also accepts both)
    #[arg(long, allow_hyphen_values = true)]
    method: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    threshold: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    out: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    threads: Option<usize>,
    /// bound/continuum classification margin (default 10/N)
    #[arg(long = "edge-margin", allow_hyphen_values = true)]
    edge_margin: Option<f64>,
    /// interior half-width of printed kernels
    #[arg(long, allow_hyphen_values = true)]
    interior: Option<usize>,
    /// envelope samples per beat period for decay runs
    #[arg(long, allow_hyphen_values = true)]
    envelope: Option<usize>,
    /// fit window a:b (indices into the time grid)
    #[arg(long, allow_hyphen_values = true)]
    fit: Option<String>,
    /// bracket a:b for tuning the two-site family to an edge resonance
    #[arg(long, allow_hyphen_values = true)]
    tune: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    n: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    k: Option<i64>,
}

const KEYS: &[&str] = &[
    "mass",
    "potential",
    "window",
    "sigma",
    "norm",
    "t-grid",
    "theta-grid",
    "method",
    "threshold",
    "out",
    "threads",
    "edge-margin",
    "interior",
    "envelope",
    "fit",
    "tune",
    "t",
    "n",
    "k",
];

/// Reads `key = value` lines (`#` comments, blank lines ignored).
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::PotentialParse {
            line: i + 1,
            message: format!("expected `key = value`, found `{line}`"),
        })?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::PotentialParse {
                line: i + 1,
                message: format!("unknown config key `{}`", k.trim()),
            });
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn merge<T: std::str::FromStr>(flag: Option<T>, map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidParameter(format!("config key `{key}`: cannot parse `{v}`"))),
    }
}

impl Flags {
    fn resolve(self) -> Result<Flags> {
        let map = match &self.config {
            Some(p) => parse_config(
                &std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
            )?,
            None => BTreeMap::new(),
        };
        Ok(Flags {
            config: self.config,
            mass: merge(self.mass, &map, "mass")?,
            potential: merge(self.potential, &map, "potential")?,
            window: merge(self.window, &map, "window")?,
            sigma: merge(self.sigma, &map, "sigma")?,
            norm: merge(self.norm, &map, "norm")?,
            t_grid: merge(self.t_grid, &map, "t-grid")?,
            theta_grid: merge(self.theta_grid, &map, "theta-grid")?,
            method: merge(self.method, &map, "method")?,
            threshold: merge(self.threshold, &map, "threshold")?,
            out: merge(self.out, &map, "out")?,
            threads: merge(self.threads, &map, "threads")?,
            edge_margin: merge(self.edge_margin, &map, "edge-margin")?,
            interior: merge(self.interior, &map, "interior")?,
            envelope: merge(self.envelope, &map, "envelope")?,
            fit: merge(self.fit, &map, "fit")?,
            tune: merge(self.tune, &map, "tune")?,
            t: merge(self.t, &map, "t")?,
            n: merge(self.n, &map, "n")?,
            k: merge(self.k, &map, "k")?,
        })
    }
}

/// Validated settings shared by all commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mass: f64,
    pub potential: MatrixPotential,
    pub window: usize,
    pub sigma: Option<f64>,
    pub norm: Option<NormKind>,
    pub times: Vec<f64>,
    pub thetas: Vec<f64>,
    pub method: Option<String>,
    pub threshold: f64,
    pub out: Option<PathBuf>,
    pub threads: usize,
    pub edge_margin: Option<f64>,
    pub interior: usize,
    pub envelope: usize,
    pub fit: Option<(usize, usize)>,
    pub tune: Option<(f64, f64)>,
    pub t: f64,
    pub n: i64,
    pub k: i64,
}

fn split_pair<T: std::str::FromStr>(s: &str, what: &str) -> Result<(T, T)> {
    let bad = || Error::InvalidParameter(format!("{what} `{s}` must look like a:b"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// `a:b:points[:log|:lin]`; the default spacing is logarithmic.
pub fn parse_t_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::InvalidParameter(format!("t-grid `{s}` must look like a:b:points[:log|:lin]"));
    if !(parts.len() == 3 || parts.len() == 4) {
        return Err(bad());
    }
    let a: f64 = parts[0].parse().map_err(|_| bad())?;
    let b: f64 = parts[1].parse().map_err(|_| bad())?;
    let p: usize = parts[2].parse().map_err(|_| bad())?;
    let log = match parts.get(3).copied() {
        None | Some("log") => true,
        Some("lin") => false,
        Some(_) => return Err(bad()),
    };
    time_grid(a, b, p, log)
}

/// `a:b:points`, inclusive and evenly spaced, inside `[-pi, pi]`.
pub fn parse_theta_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::InvalidParameter(format!("theta-grid `{s}` must look like a:b:points"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].parse().map_err(|_| bad())?;
    let b: f64 = parts[1].parse().map_err(|_| bad())?;
    let p: usize = parts[2].parse().map_err(|_| bad())?;
    let lim = std::f64::consts::PI + 1e-12;
    if p == 0 || !(a.abs() <= lim && b.abs() <= lim && a <= b) {
        return Err(Error::InvalidParameter(format!("theta-grid `{s}` must satisfy -pi <= a <= b <= pi, points >= 1")));
    }
    let step = if p > 1 { (b - a) / (p - 1) as f64 } else { 0.0 };
    Ok((0..p)
        .map(|i| (a + step * i as f64).clamp(-std::f64::consts::PI, std::f64::consts::PI))
        .collect())
}

/// Builtin generator call or a potential file path.
pub fn parse_potential(spec: &str) -> Result<MatrixPotential> {
    let s = spec.trim();
    if s == "zero" {
        return Ok(MatrixPotential::zero());
    }
    if let Some((name, rest)) = s.split_once('(') {
        let args = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::InvalidParameter(format!("potential `{s}`: missing `)`")))?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidParameter(format!("potential `{s}`: arguments must be numbers")))?;
        let want = |k: usize| {
            if nums.len() == k {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("potential `{name}` takes {k} arguments, got {}", nums.len())))
            }
        };
        let as_int = |x: f64, what: &str| {
            if x.fract() == 0.0 && x.is_finite() {
                Ok(x)
            } else {
                Err(Error::InvalidParameter(format!("potential `{name}`: {what} must be an integer")))
            }
        };
        let as_count = |x: f64, what: &str| -> Result<usize> {
            let v = as_int(x, what)?;
            if v < 0.0 {
                return Err(Error::InvalidParameter(format!("potential `{name}`: {what} must be nonnegative")));
            }
            Ok(v as usize)
        };
        return match name.trim() {
            "single_site" => {
                want(5)?;
                MatrixPotential::single_site(as_int(nums[0], "site")? as i64, nums[1], nums[2], nums[3], nums[4])
            }
            "exp_decay" => {
                want(3)?;
                MatrixPotential::exp_decay(nums[0], nums[1], as_count(nums[2], "half_width")?)
            }
            "seeded_random" => {
                want(3)?;
                MatrixPotential::seeded_random(as_count(nums[0], "seed")? as u64, as_count(nums[1], "half_width")?, nums[2])
            }
            "two_site" => {
                want(1)?;
                two_site_family(nums[0])
            }
            other => Err(Error::InvalidParameter(format!("unknown potential generator `{other}`"))),
        };
    }
    MatrixPotential::from_file(s)
}

impl RunConfig {
    fn from_flags(f: Flags) -> Result<Self> {
        let f = f.resolve()?;
        let mass = f.mass.unwrap_or(1.0);
        ModelParams::new(mass)?;
        let potential = parse_potential(f.potential.as_deref().unwrap_or("zero"))?;
        let window = f.window.unwrap_or(600);
        if window == 0 {
            return Err(Error::InvalidParameter("window must be positive".into()));
        }
        let norm = f.norm.as_deref().map(|n| NormKind::parse(n, f.sigma)).transpose()?;
        let times = parse_t_grid(f.t_grid.as_deref().unwrap_or("20:400:12:log"))?;
        let thetas = parse_theta_grid(f.theta_grid.as_deref().unwrap_or("-3.14159:3.14159:101"))?;
        if let Some(m) = &f.method {
            if !matches!(m.as_str(), "spectral" | "oracle" | "both") {
                return Err(Error::InvalidParameter(format!("unknown method `{m}`")));
            }
        }
        let threshold = f.threshold.unwrap_or(RESONANCE_THRESHOLD);
        if !(threshold > 0.0) {
            return Err(Error::InvalidParameter("threshold must be positive".into()));
        }
        let threads = f.threads.unwrap_or(1);
        if threads == 0 {
            return Err(Error::InvalidParameter("threads must be at least 1".into()));
        }
        if let Some(e) = f.edge_margin {
            if !(e > 0.0) {
                return Err(Error::InvalidParameter("edge-margin must be positive".into()));
            }
        }
        let envelope = f.envelope.unwrap_or(1);
        if envelope == 0 {
            return Err(Error::InvalidParameter("envelope must be at least 1".into()));
        }
        let t = f.t.unwrap_or(0.0);
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("t = {t} must be finite and nonnegative")));
        }
        Ok(Self {
            mass,
            potential,
            window,
            sigma: f.sigma,
            norm,
            times,
            thetas,
            method: f.method,
            threshold,
            out: f.out,
            threads,
            edge_margin: f.edge_margin,
            interior: f.interior.unwrap_or(10),
            envelope,
            fit: f.fit.as_deref().map(|s| split_pair(s, "fit")).transpose()?,
            tune: f.tune.as_deref().map(|s| split_pair(s, "tune")).transpose()?,
            t,
            n: f.n.unwrap_or(0),
            k: f.k.unwrap_or(0),
        })
    }
}

/// Text produced by a command: named CSV files plus a stdout report.
#[derive(Debug, Default)]
pub struct Output {
    pub files: Vec<(String, String)>,
    pub report: String,
}

impl Output {
    fn emit(self, out_dir: Option<&Path>, stdout: &mut dyn std::io::Write) -> Result<()> {
        let io = |e: std::io::Error| Error::Io(e.to_string());
        match out_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
                for (name, body) in &self.files {
                    let p = dir.join(name);
                    std::fs::write(&p, body).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                }
            }
            None => {
                for (_, body) in &self.files {
                    stdout.write_all(body.as_bytes()).map_err(io)?;
                }
            }
        }
        stdout.write_all(self.report.as_bytes()).map_err(io)
    }
}

fn fmt_c(z: Complex64) -> String {
    format!("{:.16e},{:.16e}", z.re, z.im)
}

fn block_cells(b: &Block) -> String {
    [b[(0, 0)], b[(0, 1)], b[(1, 0)], b[(1, 1)]].map(fmt_c).join(",")
}

const BLOCK_HEADER: &str = "uu_re,uu_im,uv_re,uv_im,vu_re,vu_im,vv_re,vv_im";

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Output> {
    let mut op = TruncatedOperator::new(cfg.mass, &cfg.potential, cfg.window)?;
    if let Some(e) = cfg.edge_margin {
        op = op.with_edge_margin(e);
    }
    let spec = op.spectrum()?;
    let mut csv = String::from("index,eigenvalue,tag\n");
    for (j, (v, tag)) in spec.values.iter().zip(&spec.tags).enumerate() {
        let _ = writeln!(csv, "{j},{v:.16e},{}", if *tag == crate::resolvent::SpectralTag::Bound { "bound" } else { "continuum" });
    }
    let edges = op.params().gap_edges();
    let bound = op.bound_states()?;
    let mut report = format!(
        "# band edges: {:.12} {:.12} {:.12} {:.12}\n# window N = {}, edge margin = {:.3e}\n# bound states: {}\n",
        edges[0],
        edges[1],
        edges[2],
        edges[3],
        op.half_width(),
        op.edge_margin(),
        bound.len()
    );
    for b in bound {
        let _ = writeln!(report, "# bound {b:.16e}");
    }
    Ok(Output {
        files: vec![("spectrum.csv".into(), csv)],
        report,
    })
}

fn resonance_lines(rep: &ResonanceReport) -> String {
    let mut s = String::new();
    for e in &rep.edges {
        let _ = writeln!(
            s,
            "# edge {} lambda={:.12} |W|={:.6e} scale={:.6e} resonant={}",
            e.edge.label(),
            e.lambda,
            e.wronskian.norm(),
            e.scale,
            e.resonant
        );
    }
    let _ = writeln!(s, "# resonant edges: {}", rep.resonant_count());
    s
}

pub fn cmd_scattering(cfg: &RunConfig) -> Result<Output> {
    let mut csv = String::from(
        "theta,W_re,W_im,a_re,a_im,b_plus_re,b_plus_im,b_minus_re,b_minus_im,T_re,T_im,R_plus_re,R_plus_im,R_minus_re,R_minus_im,unitarity\n",
    );
    let mut skipped = 0;
    for &theta in &cfg.thetas {
        if theta.sin().abs() < 1e-12 {
            skipped += 1;
            continue;
        }
        let p = SpectralPoint::on_band(theta, cfg.mass, HalfPlane::Plain)?;
        let sc = scattering_coefficients(&p, &cfg.potential)?;
        let nan = Complex64::new(f64::NAN, f64::NAN);
        let _ = writeln!(
            csv,
            "{theta:.16e},{},{},{},{},{},{},{},{:.3e}",
            fmt_c(sc.w),
            fmt_c(sc.a),
            fmt_c(sc.b_plus.unwrap_or(nan)),
            fmt_c(sc.b_minus.unwrap_or(nan)),
            fmt_c(sc.t),
            fmt_c(sc.r_plus.unwrap_or(nan)),
            fmt_c(sc.r_minus.unwrap_or(nan)),
            sc.unitarity_defect().unwrap_or(f64::NAN)
        );
    }
    let rep = detect_resonances(&cfg.potential, cfg.mass, cfg.threshold)?;
    let mut report = resonance_lines(&rep);
    if skipped > 0 {
        let _ = writeln!(report, "# skipped {skipped} band-edge theta values");
    }
    Ok(Output {
        files: vec![("scattering.csv".into(), csv)],
        report,
    })
}

pub fn cmd_resonances(cfg: &RunConfig) -> Result<Output> {
    let mut report = String::new();
    let potential = match cfg.tune {
        Some((a, b)) => {
            let root = find_edge_resonance(two_site_family, Edge::LowerPositive, cfg.mass, (a, b), 1e-12)?;
            let _ = writeln!(
                report,
                "# tuned two_site family: s={:.16e} width={:.3e} iterations={} |W(0)|={:.3e}",
                root.parameter,
                root.width,
                root.iterations,
                root.wronskian.norm()
            );
            two_site_family(root.parameter)?
        }
        None => cfg.potential.clone(),
    };
    let rep = detect_resonances(&potential, cfg.mass, cfg.threshold)?;
    let mut csv = String::from("edge,lambda,W_re,W_im,scale,relative,resonant\n");
    for e in &rep.edges {
        let _ = writeln!(
            csv,
            "{},{:.16e},{},{:.16e},{:.6e},{}",
            e.edge.label(),
            e.lambda,
            fmt_c(e.wronskian),
            e.scale,
            e.wronskian.norm() / e.scale,
            e.resonant
        );
    }
    report.push_str(&resonance_lines(&rep));
    Ok(Output {
        files: vec![("resonances.csv".into(), csv)],
        report,
    })
}

fn snapshot_csv(a: &PropagatorSnapshot, b: Option<&PropagatorSnapshot>) -> Result<String> {
    let mut s = format!("n,k,{BLOCK_HEADER}{}\n", if b.is_some() { ",agreement" } else { "" });
    for (n, k, blk) in a.kernel.iter() {
        let _ = write!(s, "{n},{k},{}", block_cells(blk));
        if let Some(b) = b {
            let d = (blk - b.kernel.get(n, k)?).iter().map(|z| z.norm()).fold(0.0, f64::max);
            let _ = write!(s, ",{d:.3e}");
        }
        s.push('\n');
    }
    Ok(s)
}

pub fn cmd_evolve(cfg: &RunConfig) -> Result<Output> {
    let method = cfg.method.as_deref().unwrap_or("oracle");
    let range = LatticeWindow::symmetric(cfg.interior);
    let quad = QuadratureSpec::default();
    let need_oracle = method != "spectral";
    let op = if need_oracle {
        let mut op = TruncatedOperator::new(cfg.mass, &cfg.potential, cfg.window)?;
        if let Some(e) = cfg.edge_margin {
            op = op.with_edge_margin(e);
        }
        Some(op)
    } else {
        None
    };
    let mut out = Output::default();
    let v0 = StationaryData::new(cfg.mass).v0;
    let _ = writeln!(out.report, "# t,method,quad_error,agreement,cone_max");
    for &t in &cfg.times {
        let spectral = if method != "oracle" {
            Some(propagator_pc_spectral(t, &cfg.potential, cfg.mass, range, range, &quad)?)
        } else {
            None
        };
        let oracle = match &op {
            Some(op) => Some(propagator_pc_oracle(t, op, range, range)?),
            None => None,
        };
        let (main, other) = match (&spectral, &oracle) {
            (Some(s), o) => (s, o.as_ref()),
            (None, Some(o)) => (o, None),
            (None, None) => unreachable!(),
        };
        let agreement = match other {
            Some(o) => main.kernel.max_abs_diff(&o.kernel)?,
            None => f64::NAN,
        };
        let cone = main
            .kernel
            .iter()
            .filter(|(n, k, _)| ((n - k).abs() as f64) > v0 * t + 40.0)
            .map(|(_, _, b)| b.iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        out.files.push((format!("kernel_t{t}.csv"), snapshot_csv(main, other)?));
        let _ = writeln!(
            out.report,
            "# {t},{method},{},{agreement:.3e},{cone:.3e}",
            main.quad_error.map_or("none".to_string(), |e| format!("{e:.3e}"))
        );
    }
    if let Some(op) = &op {
        let p = pc_projector(op)?;
        let _ = writeln!(out.report, "# bound states removed by P_c: {}", p.rank_deficiency());
    }
    Ok(out)
}

pub fn cmd_decay(cfg: &RunConfig) -> Result<Output> {
    let norm = cfg.norm.unwrap_or(NormKind::L1Linf);
    let mut dc = DecayConfig::new(cfg.mass, cfg.potential.clone(), norm, cfg.times.clone()).with_envelope(cfg.envelope);
    dc.window = cfg.window;
    dc.fit_window = cfg.fit;
    if let Some(m) = cfg.method.as_deref() {
        dc.method = m.parse::<Method>()?;
    }
    let series = run_decay_experiment(&dc)?;
    let report = format!(
        "# norm={} method={} window={} probe={} slope={:.6} residual={:.3e} fit_window={}:{}\n",
        norm,
        dc.method,
        dc.effective_window(),
        dc.probe_half_width(),
        series.fitted_slope,
        series.residual,
        series.fit_window.0,
        series.fit_window.1
    );
    Ok(Output {
        files: vec![("decay.csv".into(), series.to_csv())],
        report,
    })
}

pub fn cmd_free_kernel(cfg: &RunConfig) -> Result<Output> {
    let quad = QuadratureSpec::default();
    let (t, n, k) = (cfg.t, cfg.n, cfg.k);
    let omega = free_propagator_block(t, n, k, cfg.mass, &quad)?;
    let table = FreePropagatorTable::new(t, cfg.mass, (n - k).unsigned_abs() as usize + 1, &quad)?;
    let tb = table.block(n - k)?;
    let mut csv = format!("source,{BLOCK_HEADER}\n");
    let _ = writeln!(csv, "omega,{}", block_cells(&omega.block));
    let _ = writeln!(csv, "table,{}", block_cells(&tb));
    let mut report = format!(
        "# t={t} n={n} k={k} quad_error(omega)={:.3e} quad_error(table)={:.3e}\n",
        omega.error_estimate,
        table.error_estimate()
    );
    if cfg.method.as_deref() == Some("oracle") || cfg.method.as_deref() == Some("both") {
        let op = TruncatedOperator::new(cfg.mass, &MatrixPotential::zero(), cfg.window)?;
        let r = LatticeWindow::new(n, n)?;
        let c = LatticeWindow::new(k, k)?;
        let snap = propagator_pc_oracle(t, &op, r, c)?;
        let ob = snap.kernel.get(n, k)?;
        let _ = writeln!(csv, "oracle,{}", block_cells(&ob));
        let d = (ob - omega.block).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let _ = writeln!(report, "# oracle window N={} max difference {d:.3e}", cfg.window);
    }
    Ok(Output {
        files: vec![("free_kernel.csv".into(), csv)],
        report,
    })
}

/// Parses `args` (including the program name), runs the command and writes
/// results; returns the process exit code. Errors go to `stderr` as
/// `ERROR <code>: <detail>`.
pub fn run<I, T>(args: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let first = e.to_string().lines().next().unwrap_or("").to_string();
            let _ = writeln!(stderr, "ERROR 1: {}", first.trim_start_matches("error: "));
            return 1;
        }
    };
    let result = dispatch(cli.command, stdout);
    match result {
        Ok(()) => 0,
        Err(e) => {
            let code = e.exit_code();
            let _ = writeln!(stderr, "ERROR {code}: {e}");
            code
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn std::io::Write) -> Result<()> {
    let (flags, f): (Flags, fn(&RunConfig) -> Result<Output>) = match command {
        Command::Spectrum(x) => (x, cmd_spectrum),
        Command::Scattering(x) => (x, cmd_scattering),
        Command::Resonances(x) => (x, cmd_resonances),
        Command::Evolve(x) => (x, cmd_evolve),
        Command::Decay(x) => (x, cmd_decay),
        Command::FreeKernel(x) => (x, cmd_free_kernel),
    };
    let cfg = RunConfig::from_flags(flags)?;
    let out = f(&cfg)?;
    out.emit(cfg.out.as_deref(), stdout)
}
