//! Wronskians, scattering data, scattering relations and edge resonances.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dispersion::{HalfPlane, SpectralPoint};
use crate::error::{Error, Result};
use crate::jost::{jost, JostSolution, Side};
use crate::lattice::{LatticeWindow, MatrixPotential, SpinorSequence};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `W(w1, w2) = u1_n v2_{n+1} - u2_n v1_{n+1}`.
pub fn wronskian(w1: &SpinorSequence, w2: &SpinorSequence, n: i64) -> Result<Complex64> {
    let (a, b) = (w1.at(n)?, w2.at(n)?);
    let (a1, b1) = (w1.at(n + 1)?, w2.at(n + 1)?);
    Ok(a[0] * b1[1] - b[0] * a1[1])
}

fn jost_wronskian(w1: &JostSolution, w2: &JostSolution, n: i64) -> Result<Complex64> {
    let (a, b) = (w1.w_at(n)?, w2.w_at(n)?);
    let (a1, b1) = (w1.w_at(n + 1)?, w2.w_at(n + 1)?);
    Ok(a[0] * b1[1] - b[0] * a1[1])
}

/// Wronskian of the free pair `W(w^+(theta), w^-(theta)) = 2i sin(theta) / c`,
/// with `c = m + lambda` (plain) or `lambda - m` (tilde).
pub fn free_wronskian(point: &SpectralPoint) -> Complex64 {
    2.0 * I * point.theta().sin() / mass_factor(point)
}

fn mass_factor(point: &SpectralPoint) -> Complex64 {
    match point.half_plane() {
        HalfPlane::Plain => point.mass() + point.lambda(),
        HalfPlane::Tilde => point.lambda() - point.mass(),
    }
}

/// Window on which all Wronskians for `q` are evaluated: the support padded by one site.
pub fn evaluation_window(q: &MatrixPotential) -> LatticeWindow {
    match q.support() {
        Some(s) => s.expand(1),
        None => LatticeWindow::new(0, 1).expect("valid window"),
    }
}

/// Scattering data at one spectral point.
///
/// `W_plus`, `W_minus` and everything built from them need real `theta`
/// (they pair `theta` with `-theta`) and are `None` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringCoefficients {
    pub point: SpectralPoint,
    pub w: Complex64,
    pub w_plus: Option<Complex64>,
    pub w_minus: Option<Complex64>,
    pub a: Complex64,
    pub b_plus: Option<Complex64>,
    pub b_minus: Option<Complex64>,
    pub t: Complex64,
    pub r_plus: Option<Complex64>,
    pub r_minus: Option<Complex64>,
    /// `max_n |w^+_n| |w^-_{n+1}|` on the evaluation window
    pub scale: f64,
}

impl ScatteringCoefficients {
    /// `|a|^2 - |b_-|^2 - 1`.
    pub fn unitarity_defect(&self) -> Option<f64> {
        self.b_minus.map(|b| self.a.norm_sqr() - b.norm_sqr() - 1.0)
    }

    /// `max_pm | |T|^2 + |R_pm|^2 - 1 |`.
    pub fn energy_defect(&self) -> Option<f64> {
        let t2 = self.t.norm_sqr();
        Some(
            (t2 + self.r_plus?.norm_sqr() - 1.0)
                .abs()
                .max((t2 + self.r_minus?.norm_sqr() - 1.0).abs()),
        )
    }
}

/// The four Jost solutions at `+-theta`, sharing one window.
struct JostQuartet {
    plus: JostSolution,
    minus: JostSolution,
    plus_reflected: Option<JostSolution>,
    minus_reflected: Option<JostSolution>,
}

impl JostQuartet {
    fn new(point: &SpectralPoint, q: &MatrixPotential, window: LatticeWindow) -> Result<Self> {
        let plus = jost(Side::Plus, point, q, window)?;
        let minus = jost(Side::Minus, point, q, window)?;
        let (plus_reflected, minus_reflected) = if point.is_real() {
            let r = point.reflected()?;
            (Some(jost(Side::Plus, &r, q, window)?), Some(jost(Side::Minus, &r, q, window)?))
        } else {
            (None, None)
        };
        Ok(Self {
            plus,
            minus,
            plus_reflected,
            minus_reflected,
        })
    }
}

fn product_scale(a: &JostSolution, b: &JostSolution, window: LatticeWindow) -> Result<f64> {
    let mut scale: f64 = 0.0;
    for n in window.n_min()..window.n_max() {
        let x = a.w_at(n)?.norm() * b.w_at(n + 1)?.norm();
        let y = b.w_at(n)?.norm() * a.w_at(n + 1)?.norm();
        scale = scale.max(x).max(y);
    }
    Ok(scale)
}

/// Computes `W`, `W^+-`, `a`, `b_+-`, `T`, `R_+-` at `point`.
///
/// For real `theta` in the open band a vanishing `W` contradicts the theory
/// and is reported as a consistency failure.
pub fn scattering_coefficients(
    point: &SpectralPoint,
    q: &MatrixPotential,
) -> Result<ScatteringCoefficients> {
    let window = evaluation_window(q);
    let n0 = window.midpoint().min(window.n_max() - 1);
    let quartet = JostQuartet::new(point, q, window)?;
    let w = jost_wronskian(&quartet.plus, &quartet.minus, n0)?;
    let scale = product_scale(&quartet.plus, &quartet.minus, window)?;
    let theta = point.theta();
    let open_band = point.is_real() && theta.re.abs() > 0.0 && theta.re.abs() < PI;
    if open_band && w.norm() < 1e-13 * scale {
        return Err(Error::Consistency(format!(
            "Wronskian vanishes at real theta = {} (|W| = {:e}, scale {:e})",
            theta.re,
            w.norm(),
            scale
        )));
    }
    let w_free = free_wronskian(point);
    let a = w / w_free;
    let (w_plus, w_minus) = match (&quartet.plus_reflected, &quartet.minus_reflected) {
        (Some(pr), Some(mr)) => (
            Some(jost_wronskian(&quartet.minus, pr, n0)?),
            Some(jost_wronskian(&quartet.plus, mr, n0)?),
        ),
        _ => (None, None),
    };
    let b_plus = w_plus.map(|x| x / w_free);
    let b_minus = w_minus.map(|x| -x / w_free);
    Ok(ScatteringCoefficients {
        point: *point,
        w,
        w_plus,
        w_minus,
        a,
        b_plus,
        b_minus,
        t: 1.0 / a,
        r_plus: w_plus.map(|x| x / w),
        r_minus: w_minus.map(|x| -x / w),
        scale,
    })
}

/// `max_n |W(n) - W(n_0)|`, relative to `|W(n_0)|` unless that is tiny.
pub fn wronskian_constancy_check(
    w1: &SpinorSequence,
    w2: &SpinorSequence,
    window: LatticeWindow,
) -> Result<f64> {
    if window.len() < 2 {
        return Err(Error::Domain("constancy check needs two sites".into()));
    }
    let n0 = window.n_min();
    let reference = wronskian(w1, w2, n0)?;
    let denom = if reference.norm() > 1e-300 { reference.norm() } else { 1.0 };
    let mut worst: f64 = 0.0;
    for n in window.n_min()..window.n_max() {
        worst = worst.max((wronskian(w1, w2, n)? - reference).norm() / denom);
    }
    Ok(worst)
}

/// Residual of `T w^+- = R^-+ w^-+(theta) + w^-+(-theta)` on `window`, both relations.
pub fn scattering_relation_residual(
    point: &SpectralPoint,
    q: &MatrixPotential,
    window: LatticeWindow,
) -> Result<f64> {
    if !point.is_real() {
        return Err(Error::Domain("scattering relations need real theta".into()));
    }
    let sc = scattering_coefficients(point, q)?;
    let window = window.hull(&evaluation_window(q));
    let quartet = JostQuartet::new(point, q, window)?;
    let (pr, mr) = (
        quartet.plus_reflected.as_ref().unwrap(),
        quartet.minus_reflected.as_ref().unwrap(),
    );
    let (r_plus, r_minus) = (sc.r_plus.unwrap(), sc.r_minus.unwrap());
    let mut worst: f64 = 0.0;
    for n in window.sites() {
        let lhs_p = quartet.plus.w_at(n)? * sc.t;
        let rhs_p = quartet.minus.w_at(n)? * r_minus + mr.w_at(n)?;
        let lhs_m = quartet.minus.w_at(n)? * sc.t;
        let rhs_m = quartet.plus.w_at(n)? * r_plus + pr.w_at(n)?;
        worst = worst
            .max((lhs_p - rhs_p).camax())
            .max((lhs_m - rhs_m).camax());
    }
    Ok(worst)
}

/// Default relative threshold for declaring an edge Wronskian zero.
pub const RESONANCE_THRESHOLD: f64 = 1e-8;

/// The four band edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    /// `lambda = m`, `theta = 0`, plain branch
    LowerPositive,
    /// `lambda = sqrt(m^2 + 4)`, `theta = pi`, plain branch
    UpperPositive,
    /// `lambda = -m`, `theta = 0`, tilde branch
    LowerNegative,
    /// `lambda = -sqrt(m^2 + 4)`, `theta = pi`, tilde branch
    UpperNegative,
}

impl Edge {
    pub const ALL: [Edge; 4] = [
        Edge::LowerPositive,
        Edge::UpperPositive,
        Edge::LowerNegative,
        Edge::UpperNegative,
    ];

    pub fn theta(self) -> f64 {
        match self {
            Edge::LowerPositive | Edge::LowerNegative => 0.0,
            Edge::UpperPositive | Edge::UpperNegative => PI,
        }
    }

    pub fn branch(self) -> HalfPlane {
        match self {
            Edge::LowerPositive | Edge::UpperPositive => HalfPlane::Plain,
            Edge::LowerNegative | Edge::UpperNegative => HalfPlane::Tilde,
        }
    }

    pub fn point(self, m: f64) -> Result<SpectralPoint> {
        SpectralPoint::on_band(self.theta(), m, self.branch())
    }

    pub fn label(self) -> &'static str {
        match self {
            Edge::LowerPositive => "W(0)",
            Edge::UpperPositive => "W(pi)",
            Edge::LowerNegative => "W~(0)",
            Edge::UpperNegative => "W~(pi)",
        }
    }
}

/// Edge Wronskian with its scale and verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeReport {
    pub edge: Edge,
    pub lambda: f64,
    pub wronskian: Complex64,
    pub scale: f64,
    pub resonant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceReport {
    pub mass: f64,
    pub threshold: f64,
    pub edges: Vec<EdgeReport>,
}

impl ResonanceReport {
    pub fn resonant_count(&self) -> usize {
        self.edges.iter().filter(|e| e.resonant).count()
    }

    pub fn edge(&self, edge: Edge) -> &EdgeReport {
        self.edges.iter().find(|e| e.edge == edge).expect("all edges present")
    }
}

/// Edge Wronskian `W(w^+, w^-)` at `theta in {0, pi}` and its scale.
pub fn edge_wronskian(edge: Edge, q: &MatrixPotential, m: f64) -> Result<(Complex64, f64)> {
    let point = edge.point(m)?;
    let window = evaluation_window(q);
    let plus = jost(Side::Plus, &point, q, window)?;
    let minus = jost(Side::Minus, &point, q, window)?;
    let n0 = window.midpoint().min(window.n_max() - 1);
    Ok((
        jost_wronskian(&plus, &minus, n0)?,
        product_scale(&plus, &minus, window)?,
    ))
}

/// Flags edge `lambda` as resonant when `|W_edge| < threshold * scale`.
pub fn detect_resonances(q: &MatrixPotential, m: f64, threshold: f64) -> Result<ResonanceReport> {
    let mut edges = Vec::with_capacity(4);
    for edge in Edge::ALL {
        let (w, scale) = edge_wronskian(edge, q, m)?;
        edges.push(EdgeReport {
            edge,
            lambda: edge.point(m)?.lambda().re,
            wronskian: w,
            scale,
            resonant: w.norm() < threshold * scale,
        });
    }
    Ok(ResonanceReport {
        mass: m,
        threshold,
        edges,
    })
}

/// Outcome of a bisection for a zero of an edge Wronskian along a family `Q(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceRoot {
    pub parameter: f64,
    pub width: f64,
    pub iterations: usize,
    pub wronskian: Complex64,
}

/// Bisects `s -> Re W_edge(Q(s))` on a sign-changing bracket down to width `tol`.
///
/// For real potentials and `theta in {0, pi}` all data are real, so the real
/// part carries the whole Wronskian.
pub fn find_edge_resonance(
    family: impl Fn(f64) -> Result<MatrixPotential>,
    edge: Edge,
    m: f64,
    bracket: (f64, f64),
    tol: f64,
) -> Result<ResonanceRoot> {
    let f = |s: f64| -> Result<f64> { Ok(edge_wronskian(edge, &family(s)?, m)?.0.re) };
    let (mut a, mut b) = bracket;
    let (mut fa, fb) = (f(a)?, f(b)?);
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidParameter(format!(
            "bracket [{a}, {b}] does not change sign ({fa:e}, {fb:e})"
        )));
    }
    let mut iterations = 0;
    while (b - a).abs() > tol && iterations < 200 {
        let mid = 0.5 * (a + b);
        let fm = f(mid)?;
        if fm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
        iterations += 1;
    }
    let parameter = 0.5 * (a + b);
    Ok(ResonanceRoot {
        parameter,
        width: (b - a).abs(),
        iterations,
        wronskian: edge_wronskian(edge, &family(parameter)?, m)?.0,
    })
}

/// Two-site family used to exhibit a tuned edge resonance: the generic site
/// `[[0.3, 0.2], [0.2, -0.25]]` at 0 and `q11 = s` at site 1.
///
/// `W(0)` changes sign on [`TWO_SITE_BRACKET`] while the other three edges
/// stay non-resonant.
pub fn two_site_family(s: f64) -> Result<MatrixPotential> {
    MatrixPotential::from_sites([
        (0, nalgebra::Matrix2::new(0.3, 0.2, 0.2, -0.25)),
        (1, nalgebra::Matrix2::new(s, 0.0, 0.0, 0.0)),
    ])
}

/// Bracket for the `W(0)` root of [`two_site_family`] at `m = 1`.
pub const TWO_SITE_BRACKET: (f64, f64) = (-0.5, 0.25);
