//! Operator norms of propagator snapshots, slope fits and decay runs.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use faer::Mat;
use num_complex::Complex64;

use crate::dispersion::{phase, StationaryData};
use crate::error::{Error, Result};
use crate::free::FreePropagatorTable;
use crate::kernel::{KernelBlockMatrix, KernelParameter};
use crate::lattice::{LatticeWindow, MatrixPotential};
use crate::linalg::top_singular_value;
use crate::propagator::{propagator_pc_oracle, propagator_pc_spectral, Method};
use crate::quadrature::QuadratureSpec;
use crate::resolvent::TruncatedOperator;

fn block_max(b: &crate::lattice::Block) -> f64 {
    b.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn weight(n: i64, sigma: f64) -> f64 {
    (1.0 + n.abs() as f64).powf(-sigma)
}

/// `sup_{n,k} max |[K]_{n,k}|`, the l1 -> l-infinity norm.
pub fn norm_l1_to_linf(kernel: &KernelBlockMatrix) -> f64 {
    norm_l1_to_linf_argmax(kernel).0
}

/// The l1 -> l-infinity norm with the `(n, k)` attaining it.
pub fn norm_l1_to_linf_argmax(kernel: &KernelBlockMatrix) -> (f64, i64, i64) {
    kernel
        .iter()
        .fold((0.0, 0, 0), |best, (n, k, b)| {
            let v = block_max(b);
            if v > best.0 {
                (v, n, k)
            } else {
                best
            }
        })
}

/// `sup_{n,k} max |[K]_{n,k}| ((1+|n|)(1+|k|))^{-sigma}`.
pub fn norm_weighted_l1_linf(kernel: &KernelBlockMatrix, sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} must be nonnegative")));
    }
    Ok(kernel
        .iter()
        .map(|(n, k, b)| block_max(b) * weight(n, sigma) * weight(k, sigma))
        .fold(0.0, f64::max))
}

/// Norm of `(1+|n|)^{-sigma} K (1+|k|)^{-sigma}` on l2: the largest singular
/// value, or with `hs` the Frobenius norm (an upper bound).
pub fn norm_weighted_l2(kernel: &KernelBlockMatrix, sigma: f64, hs: bool) -> Result<f64> {
    if !(sigma > 0.5) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} must exceed 1/2")));
    }
    if hs {
        let s: f64 = kernel
            .iter()
            .map(|(n, k, b)| (weight(n, sigma) * weight(k, sigma)).powi(2) * b.norm_squared())
            .sum();
        return Ok(s.sqrt());
    }
    let (n0, k0) = (kernel.n_range().n_min(), kernel.k_range().n_min());
    let d = kernel.to_dense();
    let a = Mat::<Complex64>::from_fn(d.nrows(), d.ncols(), |i, j| {
        d[(i, j)] * (weight(n0 + (i / 2) as i64, sigma) * weight(k0 + (j / 2) as i64, sigma))
    });
    top_singular_value(&a)
}

/// Which operator norm a decay run measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    /// l1 -> l-infinity
    L1Linf,
    /// l2_sigma -> l2_{-sigma}
    L2Weighted { sigma: f64, hs: bool },
    /// l1_sigma -> l-infinity_{-sigma}
    L1wLinfw { sigma: f64 },
}

impl NormKind {
    /// From the names `l1_linf`, `l2w`, `l2w_hs`, `l1w_linfw`.
    pub fn parse(name: &str, sigma: Option<f64>) -> Result<Self> {
        let need = |default: Option<f64>| {
            sigma.or(default).ok_or_else(|| Error::InvalidParameter(format!("norm '{name}' needs --sigma")))
        };
        let kind = match name {
            "l1_linf" => NormKind::L1Linf,
            "l2w" => NormKind::L2Weighted { sigma: need(None)?, hs: false },
            "l2w_hs" => NormKind::L2Weighted { sigma: need(None)?, hs: true },
            "l1w_linfw" => NormKind::L1wLinfw { sigma: need(Some(1.5))? },
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown norm '{other}' (expected l1_linf, l2w, l2w_hs, l1w_linfw)"
                )))
            }
        };
        kind.validate()?;
        Ok(kind)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            NormKind::L2Weighted { sigma, .. } if !(sigma > 0.5) => {
                Err(Error::InvalidParameter(format!("sigma = {sigma} must exceed 1/2")))
            }
            NormKind::L1wLinfw { sigma } if !(sigma >= 0.0) => {
                Err(Error::InvalidParameter(format!("sigma = {sigma} must be nonnegative")))
            }
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, kernel: &KernelBlockMatrix) -> Result<f64> {
        match *self {
            NormKind::L1Linf => Ok(norm_l1_to_linf(kernel)),
            NormKind::L2Weighted { sigma, hs } => norm_weighted_l2(kernel, sigma, hs),
            NormKind::L1wLinfw { sigma } => norm_weighted_l1_linf(kernel, sigma),
        }
    }
}

impl std::fmt::Display for NormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NormKind::L1Linf => write!(f, "l1_linf"),
            NormKind::L2Weighted { sigma, hs: false } => write!(f, "l2w(sigma={sigma})"),
            NormKind::L2Weighted { sigma, hs: true } => write!(f, "l2w_hs(sigma={sigma})"),
            NormKind::L1wLinfw { sigma } => write!(f, "l1w_linfw(sigma={sigma})"),
        }
    }
}

/// Least-squares line through `(log t, log y)`: `(slope, intercept, rms residual)`.
pub fn fit_log_log(times: &[f64], values: &[f64]) -> Result<(f64, f64, f64)> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::InvalidParameter("a fit needs at least two (t, norm) pairs".into()));
    }
    if times.iter().chain(values).any(|&x| !(x > 0.0)) {
        return Err(Error::Domain("log-log fit needs positive times and norms".into()));
    }
    let xs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("log-log fit needs distinct times".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok((slope, intercept, rms))
}

/// `points` times log-spaced on `[a, b]` (or evenly spaced when `log` is false).
pub fn time_grid(a: f64, b: f64, points: usize, log: bool) -> Result<Vec<f64>> {
    if points == 0 || !(a > 0.0 || (!log && a >= 0.0)) || !(b >= a) {
        return Err(Error::InvalidParameter(format!(
            "time grid {a}:{b}:{points} needs 0 < a <= b and points >= 1"
        )));
    }
    if points == 1 {
        return Ok(vec![a]);
    }
    let step = |i: usize| i as f64 / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if log {
                (a.ln() + (b.ln() - a.ln()) * step(i)).exp()
            } else {
                a + (b - a) * step(i)
            }
        })
        .collect())
}

/// Norms at increasing times with the fitted power law.
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySeries {
    pub norm_kind: NormKind,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// `(|n - k|, max(|n|, |k|))` of the maximising block for the l1 -> l-infinity norm
    pub argmax: Vec<Option<(i64, i64)>>,
    pub fitted_slope: f64,
    /// half-open index range `a..b` used by the fit
    pub fit_window: (usize, usize),
    pub residual: f64,
}

impl DecaySeries {
    pub fn new(norm_kind: NormKind, times: Vec<f64>, norms: Vec<f64>, fit_window: Option<(usize, usize)>) -> Result<Self> {
        if times.len() != norms.len() || times.is_empty() {
            return Err(Error::InvalidParameter("times and norms must be nonempty and of equal length".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("times must be strictly increasing".into()));
        }
        let len = times.len();
        let (a, b) = fit_window.unwrap_or((len / 2, len));
        if !(a < b && b <= len && b - a >= 2) {
            return Err(Error::InvalidParameter(format!("fit window {a}:{b} invalid for {len} times")));
        }
        let (slope, _, residual) = fit_log_log(&times[a..b], &norms[a..b])?;
        Ok(Self {
            norm_kind,
            argmax: vec![None; len],
            times,
            norms,
            fitted_slope: slope,
            fit_window: (a, b),
            residual,
        })
    }

    /// Refit over another index window.
    pub fn refit(&self, a: usize, b: usize) -> Result<f64> {
        if !(a < b && b <= self.times.len() && b - a >= 2) {
            return Err(Error::InvalidParameter(format!("fit window {a}:{b} invalid")));
        }
        Ok(fit_log_log(&self.times[a..b], &self.norms[a..b])?.0)
    }

    /// `t,norm` rows with 17 significant digits and a trailing summary comment.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,norm\n");
        for (t, v) in self.times.iter().zip(&self.norms) {
            let _ = writeln!(s, "{t:.16e},{v:.16e}");
        }
        let _ = writeln!(
            s,
            "# slope={:.16e} residual={:.16e} fit_window={}:{}",
            self.fitted_slope, self.residual, self.fit_window.0, self.fit_window.1
        );
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    /// Reads back `(times, norms)` and the summary `(slope, residual, fit window)`.
    pub fn parse_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>, Option<(f64, f64, usize, usize)>)> {
        let bad = |line: usize, message: String| Error::PotentialParse { line, message };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "t,norm")) => {}
            _ => return Err(bad(1, "expected header 't,norm'".into())),
        }
        let (mut ts, mut vs, mut summary) = (Vec::new(), Vec::new(), None);
        for (i, line) in lines {
            if let Some(rest) = line.strip_prefix("# ") {
                let mut slope = None;
                let mut resid = None;
                let mut win = None;
                for kv in rest.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("slope", v)) => slope = v.parse().ok(),
                        Some(("residual", v)) => resid = v.parse().ok(),
                        Some(("fit_window", v)) => {
                            win = v.split_once(':').and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                        }
                        _ => {}
                    }
                }
                if let (Some(s), Some(r), Some((a, b))) = (slope, resid, win) {
                    summary = Some((s, r, a, b));
                }
                continue;
            }
            let (t, v) = line.split_once(',').ok_or_else(|| bad(i + 1, format!("expected 't,norm', got '{line}'")))?;
            ts.push(t.trim().parse().map_err(|e| bad(i + 1, format!("{e}")))?);
            vs.push(v.trim().parse().map_err(|e| bad(i + 1, format!("{e}")))?);
        }
        Ok((ts, vs, summary))
    }
}

/// Settings of one decay run.
#[derive(Debug, Clone)]
pub struct DecayConfig {
    pub mass: f64,
    pub potential: MatrixPotential,
    pub norm: NormKind,
    pub times: Vec<f64>,
    /// half-width `N`; raised to at least `v0 t_max + 100`
    pub window: usize,
    pub method: Method,
    pub fit_window: Option<(usize, usize)>,
    pub quad: QuadratureSpec,
    /// Samples per beat period; the norm at `t` becomes the maximum over
    /// `t + j T / s`, `j < s`, with `T = beat_period(m)`. One sample means plain `t`.
    pub envelope_samples: usize,
}

impl DecayConfig {
    pub fn new(mass: f64, potential: MatrixPotential, norm: NormKind, times: Vec<f64>) -> Self {
        let method = if potential_is_free(&potential) {
            Method::Spectral
        } else {
            Method::Oracle
        };
        Self {
            mass,
            potential,
            norm,
            times,
            window: 600,
            method,
            fit_window: None,
            quad: QuadratureSpec::default(),
            envelope_samples: 1,
        }
    }

    pub fn with_envelope(mut self, samples: usize) -> Self {
        self.envelope_samples = samples;
        self
    }

    /// Times at which snapshots are taken for grid point `t`.
    pub fn sample_times(&self, t: f64) -> Vec<f64> {
        let s = self.envelope_samples.max(1);
        let span = beat_period(self.mass);
        (0..s).map(|j| t + span * j as f64 / s as f64).collect()
    }

    pub fn t_max(&self) -> f64 {
        let last = self.times.iter().copied().fold(0.0, f64::max);
        self.sample_times(last).last().copied().unwrap_or(last)
    }

    /// Half-width after the propagation-cone rule.
    pub fn effective_window(&self) -> usize {
        let v0 = StationaryData::new(self.mass).v0;
        self.window.max((v0 * self.t_max()).ceil() as usize + 100)
    }

    /// Sites `|n|, |k| <= R` whose reflected paths `2 (N - R)` exceed `v0 t_max + 40`.
    pub fn probe_half_width(&self) -> usize {
        let v0 = StationaryData::new(self.mass).v0;
        let reach = (v0 * self.t_max()).ceil() as usize;
        let n = self.effective_window();
        let reflection_free = n.saturating_sub(reach.div_ceil(2) + 20);
        (reach + 40).min(reflection_free).max(1)
    }
}

/// Longest period among the differences of the edge frequencies
/// `+-m`, `+-sqrt(m^2 + 4)`: the slowest beat of the long-time tail.
pub fn beat_period(m: f64) -> f64 {
    let o = (m * m + 4.0).sqrt();
    let gap = [2.0 * m, o - m, o + m, 2.0 * o].into_iter().fold(f64::INFINITY, f64::min);
    2.0 * PI / gap
}

fn potential_is_free(q: &MatrixPotential) -> bool {
    q.is_zero()
}

/// Norm value and argmax of one snapshot.
type Measured = (f64, Option<(i64, i64)>);

/// Runs the propagator at every configured time, evaluates the norm and fits the slope.
///
/// The free potential with the spectral method uses the Toeplitz table on
/// the full window `[-N, N]`; everything else works on the probe range.
pub fn run_decay_experiment(config: &DecayConfig) -> Result<DecaySeries> {
    config.norm.validate()?;
    if config.times.is_empty() || config.times.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
        return Err(Error::InvalidParameter("times must be finite and nonnegative".into()));
    }
    let fail = |t: f64, e: Error| match e {
        Error::Quadrature { .. } | Error::Consistency(_) | Error::LinearAlgebra(_) => {
            Error::Consistency(format!("decay run failed at t = {t}: {e}"))
        }
        other => other,
    };
    let free = potential_is_free(&config.potential) && config.method == Method::Spectral;
    let op = if !free && config.method == Method::Oracle {
        Some(TruncatedOperator::new(config.mass, &config.potential, config.effective_window())?)
    } else {
        None
    };
    let measure = |s: f64| -> Result<Measured> {
        if free {
            let n = config.window;
            let table = FreePropagatorTable::new(s, config.mass, 2 * n, &config.quad)?;
            if let NormKind::L1Linf = config.norm {
                let (v, d) = table.sup_entry();
                return Ok((v, Some((d as i64, 0))));
            }
            let range = LatticeWindow::symmetric(n);
            let kernel = KernelBlockMatrix::try_from_fn(KernelParameter::Time(s), range, range, |a, b| table.block(a - b))?;
            return measure_kernel(config.norm, &kernel);
        }
        let range = LatticeWindow::symmetric(config.probe_half_width());
        let snap = match &op {
            Some(op) => propagator_pc_oracle(s, op, range, range)?,
            None => propagator_pc_spectral(s, &config.potential, config.mass, range, range, &config.quad)?,
        };
        measure_kernel(config.norm, &snap.kernel)
    };
    let mut norms = Vec::with_capacity(config.times.len());
    let mut argmax = Vec::with_capacity(config.times.len());
    for &t in &config.times {
        let mut best: Measured = (f64::NEG_INFINITY, None);
        for s in config.sample_times(t) {
            let got = measure(s).map_err(|e| fail(s, e))?;
            if got.0 > best.0 {
                best = got;
            }
        }
        norms.push(best.0);
        argmax.push(best.1);
    }
    let mut series = DecaySeries::new(config.norm, config.times.clone(), norms, config.fit_window)?;
    series.argmax = argmax;
    Ok(series)
}

fn measure_kernel(kind: NormKind, kernel: &KernelBlockMatrix) -> Result<Measured> {
    if let NormKind::L1Linf = kind {
        let (v, n, k) = norm_l1_to_linf_argmax(kernel);
        Ok((v, Some(((n - k).abs(), n.abs().max(k.abs())))))
    } else {
        Ok((kind.evaluate(kernel)?, None))
    }
}

/// Theta-intervals around the degenerate points and their complement.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSplit {
    /// `|theta - theta0| <= nu |theta0|`
    pub j_plus: Vec<(f64, f64)>,
    /// `|theta + theta0| <= nu |theta0|`
    pub j_minus: Vec<(f64, f64)>,
    /// the rest of `[-pi, pi]`
    pub j: Vec<(f64, f64)>,
    pub data: StationaryData,
    pub mass: f64,
}

impl DomainSplit {
    /// Total length of all intervals (should be `2 pi`).
    pub fn measure(&self) -> f64 {
        self.j_plus.iter().chain(&self.j_minus).chain(&self.j).map(|(a, b)| b - a).sum()
    }

    /// `min |Phi_v''|` over a uniform grid of `points` per interval of `J`.
    pub fn min_curvature_on_j(&self, v: f64, points: usize) -> f64 {
        let m = self.mass;
        self.j
            .iter()
            .flat_map(|&(a, b)| (0..=points).map(move |i| a + (b - a) * i as f64 / points as f64))
            .map(|th| phase(th, v, m).d2.abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Splits `[-pi, pi]` into neighbourhoods of `+-theta0` and the rest.
///
/// The phase velocity `v` only enters through the diagnostics; the intervals
/// depend on `m` alone. Uses `|n + k| / t` and `(n + k) / t` interchangeably.
pub fn split_domains(v: f64, m: f64) -> Result<DomainSplit> {
    if !(m > 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!("split_domains needs m > 0 and finite v (m = {m}, v = {v})")));
    }
    let data = StationaryData::new(m);
    let r = data.nu * data.theta0.abs();
    let c = data.theta0;
    let j_plus = vec![(c - r, c + r)];
    let j_minus = vec![(-c - r, -c + r)];
    let j = vec![(-PI, c - r), (c + r, -c - r), (-c + r, PI)];
    Ok(DomainSplit {
        j_plus,
        j_minus,
        j,
        data,
        mass: m,
    })
}
