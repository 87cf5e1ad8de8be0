//! Jost solutions on both spatial sides and both spectral half-planes.
//!
//! Writing `w^+_n = z^n h_n`, `w^-_n = z^{-n} h_n` with `z = exp(-i theta)`,
//! variation of parameters gives the Volterra equations
//!
//! ```text
//! A^+_n h_n = b + sum_{k>n} G(k-n) Q_k h_k,      A^+_n = [[1, 0], [q11, 1 + q12]]
//! A^-_n h_n = b + sum_{k<n} G(n-k)^T Q_k h_k,    A^-_n = [[1 + q21, q22], [0, 1]]
//! ```
//!
//! with `b` the boundary vector and, for `l >= 1`,
//!
//! ```text
//! G(l) = [[0, 1], [-1, 0]] + S_l [[(m+lambda) z, z - 1], [z (1 - z), (lambda - m) z]],
//! S_l  = 1 + z^2 + ... + z^{2(l-1)}.
//! ```
//!
//! Since `S_{l+1} = 1 + z^2 S_l`, both sums obey a two-term recurrence, so one
//! sweep costs O(1) per site. `G` is polynomial in `z`, which makes the band
//! edges `theta in {0, +-pi}` ordinary points.

use num_complex::Complex64;

use crate::dispersion::{HalfPlane, SpectralPoint};
use crate::error::{Error, Result};
use crate::lattice::{apply_dirac, Block, LatticeWindow, MatrixPotential, ModelParams, Spinor, SpinorSequence};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Default weighted-tail tolerance for windowing a potential.
pub const TRUNCATION_TOL: f64 = 1e-12;

/// Spatial side at which the solution is normalised to a plane wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// decays (or is a pure wave) as `n -> +infinity`
    Plus,
    /// decays (or is a pure wave) as `n -> -infinity`
    Minus,
}

/// Boundary vector: `(1, alpha_{+-})` on the plain branch, `(alpha~_{+-}, 1)` on the tilde branch.
pub fn boundary_vector(side: Side, point: &SpectralPoint) -> Spinor {
    let z = point.z();
    let m = point.mass();
    let lambda = point.lambda();
    let one = Complex64::new(1.0, 0.0);
    match (point.half_plane(), side) {
        (HalfPlane::Plain, Side::Plus) => Spinor::new(one, (1.0 - 1.0 / z) / (m + lambda)),
        (HalfPlane::Plain, Side::Minus) => Spinor::new(one, (1.0 - z) / (m + lambda)),
        (HalfPlane::Tilde, Side::Plus) => Spinor::new((1.0 - z) / (lambda - m), one),
        (HalfPlane::Tilde, Side::Minus) => Spinor::new((1.0 - 1.0 / z) / (lambda - m), one),
    }
}

/// Green's kernel `G(l)` for the plus side; the minus side uses its transpose.
pub fn green_kernel(l: usize, point: &SpectralPoint) -> Block {
    let z = point.z();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    if l == 0 {
        return Block::new(zero, zero, -one, zero);
    }
    let mut s = zero;
    for _ in 0..l {
        s = 1.0 + z * z * s;
    }
    green_constant() + green_slope(point) * s
}

fn green_constant() -> Block {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    Block::new(zero, one, -one, zero)
}

fn green_slope(point: &SpectralPoint) -> Block {
    let z = point.z();
    let m = point.mass();
    let lambda = point.lambda();
    Block::new((m + lambda) * z, z - 1.0, z * (1.0 - z), (lambda - m) * z)
}

/// Normalised Jost data `h_n` on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct JostSolution {
    side: Side,
    point: SpectralPoint,
    h: SpinorSequence,
    tail_error: f64,
}

impl JostSolution {
    /// Runs the recursion on `window` (extended to cover the effective support of `q`).
    pub fn compute(
        side: Side,
        point: &SpectralPoint,
        q: &MatrixPotential,
        window: LatticeWindow,
        truncation_tol: f64,
    ) -> Result<Self> {
        let (q, tail_error) = match q.effective_support(truncation_tol) {
            None => (
                MatrixPotential::zero(),
                q.iter().map(|(n, e)| (1.0 + n.abs() as f64) * e.norm()).sum(),
            ),
            Some(s) if s == q.support().unwrap() => (q.clone(), 0.0),
            Some(s) => (q.restricted(&s), q.weighted_tail(&s)),
        };
        if tail_error > truncation_tol {
            return Err(Error::Truncation {
                tail: tail_error,
                tolerance: truncation_tol,
            });
        }
        let window = match q.support() {
            Some(s) => window.hull(&s),
            None => window,
        };
        let h = match side {
            Side::Plus => sweep_plus(point, &q, window)?,
            Side::Minus => sweep_minus(point, &q, window)?,
        };
        Ok(Self {
            side,
            point: *point,
            h,
            tail_error,
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn branch(&self) -> HalfPlane {
        self.point.half_plane()
    }

    pub fn point(&self) -> &SpectralPoint {
        &self.point
    }

    pub fn window(&self) -> LatticeWindow {
        self.h.window()
    }

    /// The phase-stripped sequence `h_n`.
    pub fn h(&self) -> &SpinorSequence {
        &self.h
    }

    pub fn tail_error(&self) -> f64 {
        self.tail_error
    }

    /// Phase `z^n` (plus side) or `z^{-n}` (minus side).
    pub fn phase(&self, n: i64) -> Complex64 {
        let s = match self.side {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        };
        (-I * self.point.theta() * (s * n as f64)).exp()
    }

    /// `w_n` at a window site.
    pub fn w_at(&self, n: i64) -> Result<Spinor> {
        Ok(self.h.at(n)? * self.phase(n))
    }

    /// The solution `w` itself on the stored window.
    pub fn w(&self) -> SpinorSequence {
        let win = self.h.window();
        SpinorSequence::from_fn(win, |n| self.h.values()[(n - win.n_min()) as usize] * self.phase(n))
    }

    /// `max_n |(D w)_n - lambda w_n|` over interior sites.
    pub fn residual(&self, q: &MatrixPotential) -> Result<f64> {
        let params = ModelParams::new(self.point.mass())?;
        let w = self.w();
        let dw = apply_dirac(&params, q, &w)?;
        let lambda = self.point.lambda();
        Ok(dw
            .window()
            .sites()
            .map(|n| (dw.at(n).unwrap() - w.at(n).unwrap() * lambda).norm())
            .fold(0.0, f64::max))
    }
}

fn sweep_plus(point: &SpectralPoint, q: &MatrixPotential, window: LatticeWindow) -> Result<SpinorSequence> {
    let b = boundary_vector(Side::Plus, point);
    let ga = green_constant();
    let gb = green_slope(point);
    let z2 = point.z() * point.z();
    let zero = Spinor::zeros();
    // y_sum = sum_{k>n} Q_k h_k, s_sum = sum_{k>n} S_{k-n} Q_k h_k
    let (mut y_sum, mut s_sum) = (zero, zero);
    let mut values = vec![zero; window.len()];
    let top = q.support().map_or(window.n_max(), |s| s.n_max().min(window.n_max()));
    for n in (window.n_min()..=window.n_max()).rev() {
        let i = (n - window.n_min()) as usize;
        if n > top {
            values[i] = b;
            continue;
        }
        let rhs = b + ga * y_sum + gb * s_sum;
        let qn = q.at(n);
        let h = if qn == nalgebra::Matrix2::zeros() {
            rhs
        } else {
            let d = 1.0 + qn[(0, 1)];
            if d.abs() < 1e-14 {
                return Err(Error::SingularRecursion { site: n });
            }
            let h1 = rhs[0];
            Spinor::new(h1, (rhs[1] - h1 * qn[(0, 0)]) / d)
        };
        values[i] = h;
        let y = qn.map(|x| Complex64::new(x, 0.0)) * h;
        y_sum += y;
        s_sum = y_sum + s_sum * z2;
    }
    SpinorSequence::new(window, values)
}

fn sweep_minus(point: &SpectralPoint, q: &MatrixPotential, window: LatticeWindow) -> Result<SpinorSequence> {
    let b = boundary_vector(Side::Minus, point);
    let ga = green_constant().transpose();
    let gb = green_slope(point).transpose();
    let z2 = point.z() * point.z();
    let zero = Spinor::zeros();
    let (mut y_sum, mut s_sum) = (zero, zero);
    let mut values = vec![zero; window.len()];
    let bottom = q.support().map_or(window.n_min(), |s| s.n_min().max(window.n_min()));
    for n in window.n_min()..=window.n_max() {
        let i = (n - window.n_min()) as usize;
        if n < bottom {
            values[i] = b;
            continue;
        }
        let rhs = b + ga * y_sum + gb * s_sum;
        let qn = q.at(n);
        let h = if qn == nalgebra::Matrix2::zeros() {
            rhs
        } else {
            let d = 1.0 + qn[(1, 0)];
            if d.abs() < 1e-14 {
                return Err(Error::SingularRecursion { site: n });
            }
            let h2 = rhs[1];
            Spinor::new((rhs[0] - h2 * qn[(1, 1)]) / d, h2)
        };
        values[i] = h;
        let y = qn.map(|x| Complex64::new(x, 0.0)) * h;
        y_sum += y;
        s_sum = y_sum + s_sum * z2;
    }
    SpinorSequence::new(window, values)
}

fn require_branch(point: &SpectralPoint, branch: HalfPlane) -> Result<()> {
    if point.half_plane() != branch {
        return Err(Error::Domain(format!(
            "spectral point lies on the {:?} branch, expected {branch:?}",
            point.half_plane()
        )));
    }
    Ok(())
}

/// Plain-branch Jost solution normalised at `+infinity`.
pub fn jost_plus(point: &SpectralPoint, q: &MatrixPotential, window: LatticeWindow) -> Result<JostSolution> {
    require_branch(point, HalfPlane::Plain)?;
    JostSolution::compute(Side::Plus, point, q, window, TRUNCATION_TOL)
}

/// Plain-branch Jost solution normalised at `-infinity`.
pub fn jost_minus(point: &SpectralPoint, q: &MatrixPotential, window: LatticeWindow) -> Result<JostSolution> {
    require_branch(point, HalfPlane::Plain)?;
    JostSolution::compute(Side::Minus, point, q, window, TRUNCATION_TOL)
}

/// Tilde-branch Jost solution (`lambda = -g(theta)`).
pub fn jost_tilde(
    side: Side,
    point: &SpectralPoint,
    q: &MatrixPotential,
    window: LatticeWindow,
) -> Result<JostSolution> {
    require_branch(point, HalfPlane::Tilde)?;
    JostSolution::compute(side, point, q, window, TRUNCATION_TOL)
}

/// Jost solution on whichever branch the point belongs to.
pub fn jost(side: Side, point: &SpectralPoint, q: &MatrixPotential, window: LatticeWindow) -> Result<JostSolution> {
    JostSolution::compute(side, point, q, window, TRUNCATION_TOL)
}

/// Where the `theta` grid of a growth scan lives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthRegion {
    /// away from the band edges: envelope `max((-+n)|n|^{p-1}, 1)`
    Interior,
    /// edges included: envelope `max((-+n)|n|^p, 1)`
    WithEdges,
}

/// Outcome of a derivative-growth scan.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub order: u32,
    pub max_ratio: f64,
    pub argmax_theta: f64,
    pub argmax_site: i64,
    /// max ratio per grid point
    pub per_theta: Vec<(f64, f64)>,
}

/// Finite-difference step for `theta`-derivatives.
pub const DERIVATIVE_STEP: f64 = 1e-4;

/// Compares `|d^p h_n / d theta^p|` with the growth envelope over a grid of real `theta`.
pub fn check_derivative_growth(
    side: Side,
    branch: HalfPlane,
    m: f64,
    q: &MatrixPotential,
    theta_grid: &[f64],
    n_range: LatticeWindow,
    order: u32,
    region: GrowthRegion,
) -> Result<GrowthReport> {
    if order > 2 {
        return Err(Error::InvalidParameter("derivative order must be 0, 1 or 2".into()));
    }
    let h_at = |theta: f64| -> Result<SpinorSequence> {
        let p = SpectralPoint::on_band(theta, m, branch)?;
        let sol = JostSolution::compute(side, &p, q, n_range, TRUNCATION_TOL)?;
        sol.h().restrict(n_range)
    };
    let step = DERIVATIVE_STEP;
    let limit = std::f64::consts::PI - step;
    let mut report = GrowthReport {
        order,
        max_ratio: 0.0,
        argmax_theta: 0.0,
        argmax_site: 0,
        per_theta: Vec::with_capacity(theta_grid.len()),
    };
    for &theta in theta_grid {
        let theta = theta.clamp(-limit, limit);
        let deriv: Vec<Spinor> = match order {
            0 => h_at(theta)?.values().to_vec(),
            1 => {
                let (a, b) = (h_at(theta + step)?, h_at(theta - step)?);
                a.values().iter().zip(b.values()).map(|(x, y)| (x - y) / Complex64::new(2.0 * step, 0.0)).collect()
            }
            _ => {
                let (a, c, b) = (h_at(theta + step)?, h_at(theta)?, h_at(theta - step)?);
                a.values()
                    .iter()
                    .zip(c.values())
                    .zip(b.values())
                    .map(|((x, y), w)| (x - y * Complex64::new(2.0, 0.0) + w) / Complex64::new(step * step, 0.0))
                    .collect()
            }
        };
        let mut worst: f64 = 0.0;
        for (n, d) in n_range.sites().zip(&deriv) {
            let env = growth_envelope(side, n, order, region);
            let r = d.norm() / env;
            worst = worst.max(r);
            if r > report.max_ratio {
                report.max_ratio = r;
                report.argmax_theta = theta;
                report.argmax_site = n;
            }
        }
        report.per_theta.push((theta, worst));
    }
    Ok(report)
}

fn growth_envelope(side: Side, n: i64, order: u32, region: GrowthRegion) -> f64 {
    let signed = match side {
        Side::Plus => -n,
        Side::Minus => n,
    } as f64;
    let exponent = match region {
        GrowthRegion::Interior => order as i32 - 1,
        GrowthRegion::WithEdges => order as i32,
    };
    if order == 0 {
        return 1.0;
    }
    (signed * (n.abs() as f64).powi(exponent)).max(1.0)
}
