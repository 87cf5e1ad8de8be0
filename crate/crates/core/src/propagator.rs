//! The continuous-spectrum propagator `exp(-itD) P_c`.
//!
//! Two routes: a theta-quadrature of the Jost resolvent kernel over both
//! bands, and the finite-section eigendecomposition.
//!
//! With `d lambda = (sin theta / g) d theta` on the positive band,
//!
//! ```text
//! exp(-itD) P_c^+ = -(1/2 pi i) int_{-pi}^{pi} exp(-itg) (sin theta / g) K(theta) d theta
//! exp(-itD) P_c^- = +(1/2 pi i) int_{-pi}^{pi} exp(+itg) (sin theta / g) K~(theta) d theta
//! ```
//!
//! where `K` is the Jost resolvent kernel at `theta` (plain data, `lambda = g`)
//! and `K~` its tilde counterpart (`lambda = -g`). Gauss nodes never touch
//! `theta in {0, +-pi}`, where `sin theta / W` only has a limit.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;

use crate::dispersion::{g_real, HalfPlane, SpectralPoint};
use crate::error::{Error, Result};
use crate::jost::{jost, Side};
use crate::kernel::{KernelBlockMatrix, KernelParameter};
use crate::lattice::{Block, LatticeWindow, MatrixPotential};
use crate::quadrature::{QuadratureSpec, ThetaRule};
use crate::resolvent::TruncatedOperator;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
/// Theta nodes processed per matrix product.
const NODE_CHUNK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Spectral,
    Oracle,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Spectral => "spectral",
            Method::Oracle => "oracle",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Method::Spectral),
            "oracle" => Ok(Method::Oracle),
            other => Err(Error::InvalidParameter(format!(
                "unknown method '{other}' (expected spectral or oracle)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorSnapshot {
    pub t: f64,
    pub method: Method,
    pub kernel: KernelBlockMatrix,
    /// difference to the half-panel rule (spectral method only)
    pub quad_error: Option<f64>,
}

impl PropagatorSnapshot {
    /// `max |K(t)_{n,k} - conj(K(-t)_{k,n})^T|` against a snapshot at `-t`.
    pub fn adjoint_defect(&self, reversed: &PropagatorSnapshot) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (n, k, b) in self.kernel.iter() {
            let r = reversed.kernel.get(k, n)?;
            worst = worst.max((b - r.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        Ok(worst)
    }
}

/// Per-node Jost data stacked as matrices with rows `(u_n, v_n)` over a range.
struct NodeColumns {
    plus: Mat<Complex64>,
    minus: Mat<Complex64>,
}

fn fill_columns(cols: &mut NodeColumns, j: usize, range: LatticeWindow, plus: &[Complex64], minus: &[Complex64]) {
    for i in 0..2 * range.len() {
        cols.plus[(i, j)] = plus[i];
        cols.minus[(i, j)] = minus[i];
    }
}

/// Jost values `(u, v)` over `range`, flattened.
fn flatten(sol: &crate::jost::JostSolution, range: LatticeWindow) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(2 * range.len());
    for n in range.sites() {
        let w = sol.w_at(n)?;
        out.push(w[0]);
        out.push(w[1]);
    }
    Ok(out)
}

/// One quadrature rule applied to one band; returns the dense kernel
/// with rows over `n_range` and columns over `k_range`.
fn band_kernel(
    rule: &ThetaRule,
    band: HalfPlane,
    t: f64,
    q: &MatrixPotential,
    m: f64,
    n_range: LatticeWindow,
    k_range: LatticeWindow,
) -> Result<Mat<Complex64>> {
    let mut window = n_range.hull(&k_range);
    if let Some(s) = q.support() {
        window = window.hull(&s.expand(1));
    }
    let (rn, rk) = (2 * n_range.len(), 2 * k_range.len());
    let mut lower = Mat::<Complex64>::zeros(rn, rk);
    let mut upper = Mat::<Complex64>::zeros(rn, rk);
    let mut diag = vec![Block::zeros(); n_range.len()];
    let band_sign = match band {
        HalfPlane::Plain => -1.0,
        HalfPlane::Tilde => 1.0,
    };
    for chunk_start in (0..rule.len()).step_by(NODE_CHUNK) {
        let chunk_end = (chunk_start + NODE_CHUNK).min(rule.len());
        let width = chunk_end - chunk_start;
        let mut rows = NodeColumns {
            plus: Mat::zeros(rn, width),
            minus: Mat::zeros(rn, width),
        };
        let mut cols = NodeColumns {
            plus: Mat::zeros(rk, width),
            minus: Mat::zeros(rk, width),
        };
        let mut coef = vec![ZERO; width];
        for j in 0..width {
            let theta = rule.nodes[chunk_start + j];
            let point = SpectralPoint::on_band(theta, m, band)?;
            let plus = jost(Side::Plus, &point, q, window)?;
            let minus = jost(Side::Minus, &point, q, window)?;
            let n0 = window.midpoint().min(window.n_max() - 1);
            let (a, b, a1, b1) = (plus.w_at(n0)?, minus.w_at(n0)?, plus.w_at(n0 + 1)?, minus.w_at(n0 + 1)?);
            let w = a[0] * b1[1] - b[0] * a1[1];
            if w == ZERO {
                return Err(Error::Consistency(format!("Wronskian vanishes at theta = {theta}")));
            }
            let g = g_real(theta, m);
            let phase = Complex64::from_polar(1.0, band_sign * t * g);
            coef[j] = phase * (rule.weights[chunk_start + j] * band_sign * theta.sin() / g) / (2.0 * PI * I * w);
            let (pn, mn) = (flatten(&plus, n_range)?, flatten(&minus, n_range)?);
            fill_columns(&mut rows, j, n_range, &pn, &mn);
            let (pk, mk) = (flatten(&plus, k_range)?, flatten(&minus, k_range)?);
            fill_columns(&mut cols, j, k_range, &pk, &mk);
            for (i, n) in n_range.sites().enumerate() {
                if k_range.contains(n) {
                    let (p, mm) = (&pn[2 * i..2 * i + 2], &mn[2 * i..2 * i + 2]);
                    diag[i] += Block::new(p[0] * mm[0], p[0] * mm[1], mm[1] * p[0], mm[1] * p[1]) * coef[j];
                }
            }
        }
        // scale the column-side factors by the node coefficients, then contract over nodes
        for j in 0..width {
            for i in 0..rk {
                cols.plus[(i, j)] *= coef[j];
                cols.minus[(i, j)] *= coef[j];
            }
        }
        lower += &rows.plus * cols.minus.transpose();
        upper += &rows.minus * cols.plus.transpose();
    }
    let mut out = Mat::<Complex64>::zeros(rn, rk);
    for (i, n) in n_range.sites().enumerate() {
        for (l, k) in k_range.sites().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    let (r, c) = (2 * i + a, 2 * l + b);
                    out[(r, c)] = if n > k {
                        lower[(r, c)]
                    } else if n < k {
                        upper[(r, c)]
                    } else {
                        diag[i][(a, b)]
                    };
                }
            }
        }
    }
    Ok(out)
}

fn both_bands(
    rule: &ThetaRule,
    t: f64,
    q: &MatrixPotential,
    m: f64,
    n_range: LatticeWindow,
    k_range: LatticeWindow,
) -> Result<Mat<Complex64>> {
    let pos = band_kernel(rule, HalfPlane::Plain, t, q, m, n_range, k_range)?;
    let neg = band_kernel(rule, HalfPlane::Tilde, t, q, m, n_range, k_range)?;
    Ok(pos + neg)
}

/// `exp(-itD) P_c` blocks by theta-quadrature of the Jost resolvent kernel.
///
/// Fails with a quadrature error when the fine and half-panel rules differ
/// by more than `quad.tolerance`.
pub fn propagator_pc_spectral(
    t: f64,
    q: &MatrixPotential,
    m: f64,
    n_range: LatticeWindow,
    k_range: LatticeWindow,
    quad: &QuadratureSpec,
) -> Result<PropagatorSnapshot> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("t = {t} must be finite")));
    }
    let hull = n_range.hull(&k_range);
    let max_offset = (hull.n_max() - hull.n_min()) as usize + 1;
    let (fine, coarse) = quad.rule_pair(t, max_offset);
    let a = both_bands(&fine, t, q, m, n_range, k_range)?;
    let b = both_bands(&coarse, t, q, m, n_range, k_range)?;
    let mut est: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            est = est.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    if est > quad.tolerance {
        return Err(Error::Quadrature {
            estimate: est,
            tolerance: quad.tolerance,
        });
    }
    Ok(PropagatorSnapshot {
        t,
        method: Method::Spectral,
        kernel: KernelBlockMatrix::from_dense(KernelParameter::Time(t), n_range, k_range, &a)?,
        quad_error: Some(est),
    })
}

/// `sum over continuum-tagged eigenpairs of exp(-it lambda_j) psi_j psi_j^T`.
pub fn propagator_pc_oracle(
    t: f64,
    op: &TruncatedOperator,
    n_range: LatticeWindow,
    k_range: LatticeWindow,
) -> Result<PropagatorSnapshot> {
    let spec = op.spectrum()?;
    let idx = spec.continuum_indices();
    let rows = |range: LatticeWindow| -> Result<Mat<f64>> {
        let mut ids = Vec::with_capacity(2 * range.len());
        for n in range.sites() {
            for c in 0..2 {
                ids.push(op.index(n, c).ok_or_else(|| {
                    Error::Domain(format!("site {n} outside window {}", op.window()))
                })?);
            }
        }
        Ok(Mat::from_fn(ids.len(), idx.len(), |i, j| spec.vectors[(ids[i], idx[j])]))
    };
    let vn = rows(n_range)?;
    let vk = rows(k_range)?;
    let (mut vc, mut vs) = (vn.clone(), vn);
    for (j, &e) in idx.iter().enumerate() {
        let (s, c) = (t * spec.values[e]).sin_cos();
        for i in 0..vc.nrows() {
            vc[(i, j)] *= c;
            vs[(i, j)] *= s;
        }
    }
    let re = &vc * vk.transpose();
    let im = &vs * vk.transpose();
    let dense = Mat::<Complex64>::from_fn(re.nrows(), re.ncols(), |i, j| Complex64::new(re[(i, j)], -im[(i, j)]));
    Ok(PropagatorSnapshot {
        t,
        method: Method::Oracle,
        kernel: KernelBlockMatrix::from_dense(KernelParameter::Time(t), n_range, k_range, &dense)?,
        quad_error: None,
    })
}

/// Snapshot by either method; the spectral route takes the potential and
/// mass from `op` and does not decompose it.
pub fn propagator_pc(
    method: Method,
    t: f64,
    op: &TruncatedOperator,
    n_range: LatticeWindow,
    k_range: LatticeWindow,
    quad: &QuadratureSpec,
) -> Result<PropagatorSnapshot> {
    match method {
        Method::Spectral => propagator_pc_spectral(t, op.potential(), op.mass(), n_range, k_range, quad),
        Method::Oracle => propagator_pc_oracle(t, op, n_range, k_range),
    }
}
