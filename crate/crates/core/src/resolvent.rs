//! Resolvent kernels from Jost data, the finite-section operator and the
//! limiting absorption probe.
//!
//! With `W = W(w^+, w^-)`, the kernel of `(D - lambda)^{-1}` is
//!
//! ```text
//! n > k:  w^+_n (w^-_k)^T / W
//! n < k:  w^-_n (w^+_k)^T / W
//! n = k:  [[u^+ u^-, u^+ v^-], [v^- u^+, v^- v^+]]_k / W
//! ```
//!
//! (the `u_k` row of column `k` follows the plus solution, the `v_k` row the
//! minus solution, because `u_k` couples to `v_{k+1}` and `v_k` to `u_{k-1}`).

use std::sync::OnceLock;

use faer::linalg::solvers::Solve;
use faer::{Mat, Side as EigSide};
use num_complex::Complex64;

use crate::dispersion::{BoundarySide, HalfPlane, SpectralPoint};
use crate::error::{Error, Result};
use crate::jost::{jost, JostSolution, Side};
use crate::kernel::{KernelBlockMatrix, KernelParameter};
use crate::lattice::{Block, LatticeWindow, MatrixPotential, ModelParams, Spinor, SpinorSequence};
use crate::linalg::TridiagonalLu;

/// Relative size of `W` below which `lambda` counts as a bound state.
pub const POLE_RADIUS: f64 = 1e-8;
/// Largest dense matrix dimension the finite-section oracle accepts.
pub const MAX_DENSE_DIM: usize = 12_000;

fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// The shifted outer product
/// `[[u1_k u2_n, v1_{k+1} u2_n], [u1_k v2_n, v1_{k+1} v2_n]]`.
pub fn tensor_block(w1: &SpinorSequence, k: i64, w2: &SpinorSequence, n: i64) -> Result<Block> {
    let (a, a1, b) = (w1.at(k)?, w1.at(k + 1)?, w2.at(n)?);
    Ok(Block::new(a[0] * b[0], a1[1] * b[0], a[0] * b[1], a1[1] * b[1]))
}

/// Jost data at one spectral point, ready to produce resolvent blocks.
#[derive(Debug, Clone)]
pub struct JostResolvent {
    plus: JostSolution,
    minus: JostSolution,
    w: Complex64,
}

impl JostResolvent {
    /// Jost pair on `window` (grown to the support of `q`).
    pub fn new(point: &SpectralPoint, q: &MatrixPotential, window: LatticeWindow) -> Result<Self> {
        let theta = point.theta();
        if theta.im == 0.0 && theta.re.sin().abs() < 1e-14 {
            return Err(Error::BandEdge { theta: theta.re });
        }
        let window = match q.support() {
            Some(s) => window.hull(&s.expand(1)),
            None => window.hull(&LatticeWindow::new(0, 1)?),
        };
        let plus = jost(Side::Plus, point, q, window)?;
        let minus = jost(Side::Minus, point, q, window)?;
        let n0 = window.midpoint().min(window.n_max() - 1);
        let (a, b, a1, b1) = (plus.w_at(n0)?, minus.w_at(n0)?, plus.w_at(n0 + 1)?, minus.w_at(n0 + 1)?);
        let w = a[0] * b1[1] - b[0] * a1[1];
        let scale = (a.norm() * b1.norm()).max(b.norm() * a1.norm());
        if w.norm() < POLE_RADIUS * scale {
            return Err(Error::Pole {
                lambda: format!("{}", point.lambda()),
                eigenvalue: point.lambda().re,
                radius: POLE_RADIUS,
            });
        }
        Ok(Self { plus, minus, w })
    }

    pub fn wronskian(&self) -> Complex64 {
        self.w
    }

    pub fn plus(&self) -> &JostSolution {
        &self.plus
    }

    pub fn minus(&self) -> &JostSolution {
        &self.minus
    }

    /// Block `(n, k)`; both sites must lie in the Jost window.
    pub fn block(&self, n: i64, k: i64) -> Result<Block> {
        block_from(&self.plus.w_at(n)?, &self.minus.w_at(n)?, &self.plus.w_at(k)?, &self.minus.w_at(k)?, n, k, self.w)
    }

    pub fn kernel(&self, lambda: Complex64, n_range: LatticeWindow, k_range: LatticeWindow) -> Result<KernelBlockMatrix> {
        let wp = self.plus.w();
        let wm = self.minus.w();
        let get = |s: &SpinorSequence, n: i64| s.at(n);
        KernelBlockMatrix::try_from_fn(KernelParameter::Lambda(lambda), n_range, k_range, |n, k| {
            block_from(&get(&wp, n)?, &get(&wm, n)?, &get(&wp, k)?, &get(&wm, k)?, n, k, self.w)
        })
    }
}

/// Resolvent block from the plus/minus spinors at rows `n` and column `k`.
pub(crate) fn block_from(
    plus_n: &Spinor,
    minus_n: &Spinor,
    plus_k: &Spinor,
    minus_k: &Spinor,
    n: i64,
    k: i64,
    w: Complex64,
) -> Result<Block> {
    let b = if n > k {
        plus_n * minus_k.transpose()
    } else if n < k {
        minus_n * plus_k.transpose()
    } else {
        Block::new(
            plus_n[0] * minus_n[0],
            plus_n[0] * minus_n[1],
            minus_n[1] * plus_n[0],
            minus_n[1] * plus_n[1],
        )
    };
    Ok(b / w)
}

fn jost_window(n_range: LatticeWindow, k_range: LatticeWindow) -> LatticeWindow {
    n_range.hull(&k_range)
}

/// Block `(n, k)` of `(D - lambda)^{-1}` from the Jost representation.
///
/// The plain family is used for `Re lambda >= 0`, the tilde family otherwise;
/// a boundary point `lambda +- i0` is selected through the spectral point.
pub fn resolvent_block(point: &SpectralPoint, q: &MatrixPotential, n: i64, k: i64) -> Result<Block> {
    let win = LatticeWindow::new(n.min(k), n.max(k))?;
    JostResolvent::new(point, q, win)?.block(n, k)
}

/// Dense resolvent kernel over the given ranges from one Jost pair.
pub fn resolvent_kernel(
    point: &SpectralPoint,
    q: &MatrixPotential,
    n_range: LatticeWindow,
    k_range: LatticeWindow,
) -> Result<KernelBlockMatrix> {
    JostResolvent::new(point, q, jost_window(n_range, k_range))?.kernel(point.lambda(), n_range, k_range)
}

/// Bound or continuum classification of a finite-section eigenpair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralTag {
    Bound,
    Continuum,
}

/// Eigen-decomposition of the finite section with its classification.
#[derive(Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// columns are orthonormal eigenvectors, rows in `(u_n, v_n)` order
    pub vectors: Mat<f64>,
    pub tags: Vec<SpectralTag>,
}

impl Spectrum {
    pub fn bound_indices(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&j| self.tags[j] == SpectralTag::Bound).collect()
    }

    pub fn continuum_indices(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&j| self.tags[j] == SpectralTag::Continuum).collect()
    }
}

/// `D` restricted to `[-N, N]` with zero exterior values, as a dense symmetric matrix.
#[derive(Debug)]
pub struct TruncatedOperator {
    params: ModelParams,
    potential: MatrixPotential,
    window: LatticeWindow,
    matrix: Mat<f64>,
    edge_margin: f64,
    spectrum: OnceLock<std::result::Result<Spectrum, Error>>,
}

impl TruncatedOperator {
    pub fn new(m: f64, q: &MatrixPotential, half_width: usize) -> Result<Self> {
        let params = ModelParams::new(m)?;
        let dim = 2 * (2 * half_width + 1);
        if dim > MAX_DENSE_DIM {
            return Err(Error::MemoryGuard {
                dim,
                limit: MAX_DENSE_DIM,
            });
        }
        if half_width == 0 {
            return Err(Error::InvalidParameter("window half-width must be positive".into()));
        }
        let window = LatticeWindow::symmetric(half_width);
        if let Some(s) = q.support() {
            let half = (half_width / 2) as i64;
            if s.n_min() < -half || s.n_max() > half {
                return Err(Error::InvalidParameter(format!(
                    "potential support {s} must lie within [-{half}, {half}] for window N = {half_width}"
                )));
            }
        }
        let matrix = dense_matrix(&params, q, window);
        Ok(Self {
            params,
            potential: q.clone(),
            window,
            matrix,
            edge_margin: 10.0 / half_width as f64,
            spectrum: OnceLock::new(),
        })
    }

    /// Overrides the default `edge_margin = 10 / N` (before the spectrum is computed).
    pub fn with_edge_margin(mut self, margin: f64) -> Self {
        self.edge_margin = margin;
        self.spectrum = OnceLock::new();
        self
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn mass(&self) -> f64 {
        self.params.mass()
    }

    pub fn potential(&self) -> &MatrixPotential {
        &self.potential
    }

    pub fn window(&self) -> LatticeWindow {
        self.window
    }

    pub fn half_width(&self) -> usize {
        self.window.n_max() as usize
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn edge_margin(&self) -> f64 {
        self.edge_margin
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    /// Row/column index of component `c` (0 = u, 1 = v) at site `n`.
    pub fn index(&self, n: i64, c: usize) -> Option<usize> {
        self.window.index_of(n).map(|i| 2 * i + c)
    }

    /// Eigenpairs, computed on first use.
    pub fn spectrum(&self) -> Result<&Spectrum> {
        self.spectrum
            .get_or_init(|| {
                let eig = self
                    .matrix
                    .self_adjoint_eigen(EigSide::Lower)
                    .map_err(|e| Error::LinearAlgebra(format!("eigensolver failed: {e:?}")))?;
                let values: Vec<f64> = eig.S().column_vector().iter().copied().collect();
                let tags = values
                    .iter()
                    .map(|&l| {
                        if self.params.band_distance(l) > self.edge_margin {
                            SpectralTag::Bound
                        } else {
                            SpectralTag::Continuum
                        }
                    })
                    .collect();
                Ok(Spectrum {
                    values,
                    vectors: eig.U().to_owned(),
                    tags,
                })
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Bound-tagged eigenvalues.
    pub fn bound_states(&self) -> Result<Vec<f64>> {
        let s = self.spectrum()?;
        Ok(s.bound_indices().into_iter().map(|j| s.values[j]).collect())
    }

    /// `(matrix - lambda)^{-1}` blocks by dense LU, columns `k_range`, rows `n_range`.
    pub fn dense_resolvent(
        &self,
        lambda: Complex64,
        n_range: LatticeWindow,
        k_range: LatticeWindow,
    ) -> Result<KernelBlockMatrix> {
        let dim = self.dim();
        let a = Mat::<Complex64>::from_fn(dim, dim, |i, j| {
            let v = cx(self.matrix[(i, j)]);
            if i == j {
                v - lambda
            } else {
                v
            }
        });
        let lu = a.partial_piv_lu();
        let mut rhs = Mat::<Complex64>::zeros(dim, 2 * k_range.len());
        for (c, k) in k_range.sites().enumerate() {
            for comp in 0..2 {
                let row = self.index(k, comp).ok_or_else(|| Error::Domain(format!("site {k} outside window")))?;
                rhs[(row, 2 * c + comp)] = cx(1.0);
            }
        }
        lu.solve_in_place(&mut rhs);
        KernelBlockMatrix::try_from_fn(KernelParameter::Lambda(lambda), n_range, k_range, |n, k| {
            let c = (k - k_range.n_min()) as usize;
            let (ru, rv) = (
                self.index(n, 0).ok_or_else(|| Error::Domain(format!("site {n} outside window")))?,
                self.index(n, 1).unwrap(),
            );
            Ok(Block::new(
                rhs[(ru, 2 * c)],
                rhs[(ru, 2 * c + 1)],
                rhs[(rv, 2 * c)],
                rhs[(rv, 2 * c + 1)],
            ))
        })
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let dim = self.dim();
        (0..dim)
            .map(|i| {
                let lo = i.saturating_sub(3);
                let hi = (i + 3).min(dim - 1);
                (lo..=hi).map(|j| x[j] * self.matrix[(i, j)]).sum()
            })
            .collect()
    }
}

/// Dense symmetric matrix of `D` on `window` in `(u_n, v_n)` order.
fn dense_matrix(params: &ModelParams, q: &MatrixPotential, window: LatticeWindow) -> Mat<f64> {
    let dim = 2 * window.len();
    let m = params.mass();
    let mut a = Mat::<f64>::zeros(dim, dim);
    for (i, n) in window.sites().enumerate() {
        let qn = q.at(n);
        let (u, v) = (2 * i, 2 * i + 1);
        a[(u, u)] = m + qn[(0, 0)];
        a[(v, v)] = -m + qn[(1, 1)];
        a[(u, v)] = 1.0 + qn[(0, 1)];
        a[(v, u)] = 1.0 + qn[(1, 0)];
        if i + 1 < window.len() {
            let vn = 2 * (i + 1) + 1;
            a[(u, vn)] = -1.0;
            a[(vn, u)] = -1.0;
        }
    }
    a
}

/// `P_c = I - sum_bound psi psi^T` on the finite section.
#[derive(Debug, Clone)]
pub struct Projector {
    window: LatticeWindow,
    bound: Mat<f64>,
}

impl Projector {
    pub fn rank_deficiency(&self) -> usize {
        self.bound.ncols()
    }

    pub fn window(&self) -> LatticeWindow {
        self.window
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        let id = if i == j { 1.0 } else { 0.0 };
        id - (0..self.bound.ncols()).map(|c| self.bound[(i, c)] * self.bound[(j, c)]).sum::<f64>()
    }

    pub fn block(&self, n: i64, k: i64) -> Result<Block> {
        let (i, j) = (
            self.window.index_of(n).ok_or_else(|| Error::Domain(format!("site {n} outside window")))?,
            self.window.index_of(k).ok_or_else(|| Error::Domain(format!("site {k} outside window")))?,
        );
        Ok(Block::new(
            cx(self.entry(2 * i, 2 * j)),
            cx(self.entry(2 * i, 2 * j + 1)),
            cx(self.entry(2 * i + 1, 2 * j)),
            cx(self.entry(2 * i + 1, 2 * j + 1)),
        ))
    }

    pub fn kernel(&self, n_range: LatticeWindow, k_range: LatticeWindow) -> Result<KernelBlockMatrix> {
        KernelBlockMatrix::try_from_fn(KernelParameter::None, n_range, k_range, |n, k| self.block(n, k))
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let dim = self.bound.nrows();
        let mut p = Mat::<f64>::identity(dim, dim);
        if self.bound.ncols() > 0 {
            p -= &self.bound * self.bound.transpose();
        }
        p
    }
}

/// Continuum projector of the finite section.
pub fn pc_projector(op: &TruncatedOperator) -> Result<Projector> {
    let s = op.spectrum()?;
    let idx = s.bound_indices();
    let bound = Mat::<f64>::from_fn(op.dim(), idx.len(), |i, c| s.vectors[(i, idx[c])]);
    Ok(Projector {
        window: op.window(),
        bound,
    })
}

/// Eigenpair whose vector is concentrated near the potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizedState {
    pub eigenvalue: f64,
    /// squared weight outside `|n| <= N/2`
    pub tail_weight: f64,
    pub tag: SpectralTag,
}

/// Eigenpairs whose squared weight outside `|n| <= N/2` is below `tail_tol`.
pub fn localized_states(op: &TruncatedOperator, tail_tol: f64) -> Result<Vec<LocalizedState>> {
    let s = op.spectrum()?;
    let half = (op.half_width() / 2) as i64;
    let mut out = Vec::new();
    for j in 0..s.values.len() {
        let tail: f64 = op
            .window()
            .sites()
            .filter(|n| n.abs() > half)
            .map(|n| {
                let (iu, iv) = (op.index(n, 0).unwrap(), op.index(n, 1).unwrap());
                s.vectors[(iu, j)].powi(2) + s.vectors[(iv, j)].powi(2)
            })
            .sum();
        if tail < tail_tol {
            out.push(LocalizedState {
                eigenvalue: s.values[j],
                tail_weight: tail,
                tag: s.tags[j],
            });
        }
    }
    Ok(out)
}

/// Localized eigenpairs with eigenvalues inside the open bands (none are expected).
pub fn embedded_eigenvalue_scan(op: &TruncatedOperator, tail_tol: f64) -> Result<Vec<LocalizedState>> {
    Ok(localized_states(op, tail_tol)?
        .into_iter()
        .filter(|s| op.params().in_band(s.eigenvalue))
        .collect())
}

/// One row of the limiting-absorption table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LapRow {
    pub eps: f64,
    pub distance: f64,
    pub half_width: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LapTable {
    pub lambda: f64,
    pub side: BoundarySide,
    pub sigma: f64,
    pub interior: usize,
    pub rows: Vec<LapRow>,
    /// distances decrease (or sit below the noise floor) along the table
    pub monotone: bool,
}

impl LapTable {
    pub fn final_distance(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.distance)
    }
}

/// Largest finite section used by the probe.
pub const LAP_MAX_HALF_WIDTH: usize = 200_000;
const LAP_NOISE_FLOOR: f64 = 1e-12;

/// Weighted Hilbert-Schmidt distance between `R(lambda +- i0)` from Jost data and
/// the finite-section resolvent at `lambda +- i eps`, over `|n|, |k| <= interior`.
///
/// The section for each `eps` has half-width about `12 / eps` sites so that
/// waves are damped by `exp(-12 / v)` before reaching the boundary.
pub fn lap_probe(
    m: f64,
    q: &MatrixPotential,
    lambda: f64,
    side: BoundarySide,
    eps_list: &[f64],
    sigma: f64,
    interior: usize,
) -> Result<LapTable> {
    let params = ModelParams::new(m)?;
    if !params.in_band(lambda) || params.edge_distance(lambda) < 0.05 {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda} must lie in a band at least 0.05 from the edges"
        )));
    }
    if !(sigma > 0.5) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} must exceed 1/2")));
    }
    let range = LatticeWindow::symmetric(interior);
    let point = SpectralPoint::from_lambda_boundary(lambda, side, m)?;
    let boundary = resolvent_kernel(&point, q, range, range)?;
    let sign = match side {
        BoundarySide::Upper => 1.0,
        BoundarySide::Lower => -1.0,
    };
    let weight = |n: i64| (1.0 + n.abs() as f64).powf(-sigma);
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
        }
        let half = ((12.0 / eps).ceil() as usize).max(4 * interior).max(100);
        if half > LAP_MAX_HALF_WIDTH {
            return Err(Error::MemoryGuard {
                dim: 2 * (2 * half + 1),
                limit: 2 * (2 * LAP_MAX_HALF_WIDTH + 1),
            });
        }
        if let Some(s) = q.support() {
            if s.n_min() < -(half as i64) / 2 || s.n_max() > half as i64 / 2 {
                return Err(Error::InvalidParameter("potential support too wide for the probe".into()));
            }
        }
        let z = Complex64::new(lambda, sign * eps);
        let oracle = tridiagonal_resolvent(&params, q, half, z, range)?;
        let mut acc = 0.0;
        for (n, k, b) in oracle.iter() {
            let d = b - boundary.block(n, k).unwrap();
            acc += (weight(n) * weight(k)).powi(2) * d.norm_squared();
        }
        rows.push(LapRow {
            eps,
            distance: acc.sqrt(),
            half_width: half,
        });
    }
    let monotone = rows
        .windows(2)
        .all(|w| w[1].distance < w[0].distance || w[1].distance < LAP_NOISE_FLOOR);
    Ok(LapTable {
        lambda,
        side,
        sigma,
        interior,
        rows,
        monotone,
    })
}

/// Finite-section resolvent on `[-half, half]` via a tridiagonal LU in `(v_n, u_n)` order.
pub fn tridiagonal_resolvent(
    params: &ModelParams,
    q: &MatrixPotential,
    half: usize,
    z: Complex64,
    range: LatticeWindow,
) -> Result<KernelBlockMatrix> {
    let window = LatticeWindow::symmetric(half);
    let len = window.len();
    let dim = 2 * len;
    let m = params.mass();
    let mut diag = vec![Complex64::new(0.0, 0.0); dim];
    let mut off = vec![Complex64::new(0.0, 0.0); dim - 1];
    for (i, n) in window.sites().enumerate() {
        let qn = q.at(n);
        diag[2 * i] = cx(-m + qn[(1, 1)]) - z;
        diag[2 * i + 1] = cx(m + qn[(0, 0)]) - z;
        off[2 * i] = cx(1.0 + qn[(0, 1)]);
        if 2 * i + 1 < dim - 1 {
            off[2 * i + 1] = cx(-1.0);
        }
    }
    let lu = TridiagonalLu::new(&off, &diag, &off)?;
    let (vi, ui) = (|n: i64| 2 * (n + half as i64) as usize, |n: i64| 2 * (n + half as i64) as usize + 1);
    let mut cols: Vec<[Vec<Complex64>; 2]> = Vec::with_capacity(range.len());
    for k in range.sites() {
        let mut eu = vec![Complex64::new(0.0, 0.0); dim];
        eu[ui(k)] = cx(1.0);
        lu.solve_in_place(&mut eu);
        let mut ev = vec![Complex64::new(0.0, 0.0); dim];
        ev[vi(k)] = cx(1.0);
        lu.solve_in_place(&mut ev);
        cols.push([eu, ev]);
    }
    Ok(KernelBlockMatrix::from_fn(KernelParameter::Lambda(z), range, range, |n, k| {
        let c = &cols[(k - range.n_min()) as usize];
        Block::new(c[0][ui(n)], c[1][ui(n)], c[0][vi(n)], c[1][vi(n)])
    }))
}

/// Which Jost family a resolvent evaluation at `lambda` uses.
pub fn branch_for(lambda: Complex64) -> HalfPlane {
    if lambda.re >= 0.0 {
        HalfPlane::Plain
    } else {
        HalfPlane::Tilde
    }
}
