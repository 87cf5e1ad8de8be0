//! Free resolvent kernels and the free propagator `exp(-it D_0)`.
//!
//! `D_0^2 = -Delta + m^2` blockwise, so `(D_0 - lambda)^{-1} = (D_0 + lambda)(-Delta - omega)^{-1}`
//! with `omega = lambda^2 - m^2`, and the free evolution splits into a
//! positive band (`exp(-itg)`) and a negative band (`exp(+itg)`).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dispersion::{g_real, SpectralPoint};
use crate::error::{Error, Result};
use crate::lattice::Block;
use crate::quadrature::{integrate_checked, QuadratureSpec};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `exp(-i theta |p|) / (2 i sin theta)`, the kernel of `(-Delta - omega)^{-1}`.
pub fn free_laplacian_resolvent_entry(point: &SpectralPoint, n: i64, k: i64) -> Result<Complex64> {
    let theta = point.theta();
    let s = theta.sin();
    if s.norm() < 1e-14 {
        return Err(Error::BandEdge { theta: theta.re });
    }
    let p = (n - k).unsigned_abs() as f64;
    Ok((-I * theta * p).exp() / (2.0 * I * s))
}

/// Block `(n, k)` of `(D_0 - lambda)^{-1}`, with `D_0 + lambda` acting on the row index.
pub fn free_dirac_resolvent_block(point: &SpectralPoint, n: i64, k: i64) -> Result<Block> {
    let m = point.mass();
    let lambda = point.lambda();
    let r = |n: i64| free_laplacian_resolvent_entry(point, n, k);
    let (r0, r_next, r_prev) = (r(n)?, r(n + 1)?, r(n - 1)?);
    Ok(Block::new(
        (m + lambda) * r0,
        r0 - r_next,
        r0 - r_prev,
        (lambda - m) * r0,
    ))
}

/// Band weights `Omega_j(theta)`, `j in {-1, 0, 1}`, of the free propagator.
///
/// The positive band carries `Omega_0 = [[m+g, 1], [1, g-m]]`,
/// `Omega_{-1} = [[0,0],[-1,0]]`, `Omega_1 = [[0,-1],[0,0]]`; the negative
/// band carries `[[g-m, -1], [-1, g+m]]` and `-Omega_{+-1}`. Each band
/// enters with weight `1 / (2g)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaWeights {
    pub mass: f64,
}

impl OmegaWeights {
    pub fn new(mass: f64) -> Self {
        Self { mass }
    }

    /// `[(j, Omega_j(theta))]` for the positive band.
    pub fn positive(&self, theta: f64) -> [(i64, Block); 3] {
        let m = self.mass;
        let g = g_real(theta, m);
        [
            (-1, Block::new(c(0.0), c(0.0), c(-1.0), c(0.0))),
            (0, Block::new(c(m + g), c(1.0), c(1.0), c(g - m))),
            (1, Block::new(c(0.0), c(-1.0), c(0.0), c(0.0))),
        ]
    }

    /// `[(j, Omega~_j(theta))]` for the negative band.
    pub fn negative(&self, theta: f64) -> [(i64, Block); 3] {
        let m = self.mass;
        let g = g_real(theta, m);
        [
            (-1, Block::new(c(0.0), c(0.0), c(1.0), c(0.0))),
            (0, Block::new(c(g - m), c(-1.0), c(-1.0), c(g + m))),
            (1, Block::new(c(0.0), c(1.0), c(0.0), c(0.0))),
        ]
    }
}

/// A 2x2 block together with the quadrature error estimate behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadBlock {
    pub block: Block,
    pub error_estimate: f64,
}

/// Block `(n, k)` of `exp(-it D_0)` from the band-weight integral.
pub fn free_propagator_block(
    t: f64,
    n: i64,
    k: i64,
    m: f64,
    quad: &QuadratureSpec,
) -> Result<QuadBlock> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("t = {t} must be nonnegative")));
    }
    let weights = OmegaWeights::new(m);
    let d = n - k;
    let offset = d.unsigned_abs() as usize + 1;
    let res = integrate_checked(quad, t, offset, 4, |theta, out| {
        let g = g_real(theta, m);
        let (ep, em) = (
            Complex64::from_polar(1.0, -t * g),
            Complex64::from_polar(1.0, t * g),
        );
        let pos = weights.positive(theta);
        let neg = weights.negative(theta);
        let mut acc = Block::zeros();
        for ((j, wp), (_, wn)) in pos.iter().zip(&neg) {
            let phase = Complex64::from_polar(1.0, -theta * (d + j).abs() as f64);
            acc += (wp * ep + wn * em) * phase;
        }
        acc /= c(4.0 * PI * g);
        out.copy_from_slice(&[acc[(0, 0)], acc[(0, 1)], acc[(1, 0)], acc[(1, 1)]]);
    })?;
    let v = res.values;
    Ok(QuadBlock {
        block: Block::new(v[0], v[1], v[2], v[3]),
        error_estimate: res.error_estimate,
    })
}

/// Toeplitz table of the free propagator at fixed `t` for offsets `|n - k| <= max_offset`.
///
/// Built from `C_p = (1/2pi) int cos(tg) e^{-i theta p}` and
/// `S_p = (1/2pi) int sin(tg)/g e^{-i theta p}` (both real and even in `p`),
/// using `exp(-itD_0) = cos(t|D_0|) - i D_0 sin(t|D_0|)/|D_0|`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreePropagatorTable {
    t: f64,
    mass: f64,
    cos_part: Vec<f64>,
    sin_part: Vec<f64>,
    error_estimate: f64,
}

impl FreePropagatorTable {
    pub fn new(t: f64, m: f64, max_offset: usize, quad: &QuadratureSpec) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!("t = {t} must be nonnegative")));
        }
        let len = max_offset + 2;
        // integrands are even in theta, so only cos(p theta) survives
        let res = integrate_checked(quad, t, len, 2 * len, |theta, out| {
            let g = g_real(theta, m);
            let (s, co) = (t * g).sin_cos();
            let (cw, sw) = (co / (2.0 * PI), s / (g * 2.0 * PI));
            for p in 0..len {
                let ph = (p as f64 * theta).cos();
                out[p] = c(cw * ph);
                out[len + p] = c(sw * ph);
            }
        })?;
        Ok(Self {
            t,
            mass: m,
            cos_part: res.values[..len].iter().map(|z| z.re).collect(),
            sin_part: res.values[len..].iter().map(|z| z.re).collect(),
            error_estimate: res.error_estimate,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn max_offset(&self) -> usize {
        self.cos_part.len() - 2
    }

    pub fn error_estimate(&self) -> f64 {
        self.error_estimate
    }

    /// Block at offset `d = n - k`.
    pub fn block(&self, d: i64) -> Result<Block> {
        let a = d.unsigned_abs() as usize;
        if a > self.max_offset() {
            return Err(Error::Domain(format!(
                "offset {d} beyond table range {}",
                self.max_offset()
            )));
        }
        let m = self.mass;
        let cp = self.cos_part[a];
        let sp = |p: i64| self.sin_part[p.unsigned_abs() as usize];
        let s0 = sp(d);
        Ok(Block::new(
            Complex64::new(cp, -m * s0),
            -I * (s0 - sp(d + 1)),
            -I * (s0 - sp(d - 1)),
            Complex64::new(cp, m * s0),
        ))
    }

    /// `max_{|d| <= max_offset} max |entry|` together with the maximising `|d|`.
    pub fn sup_entry(&self) -> (f64, usize) {
        let mut best = (0.0, 0);
        for a in 0..=self.max_offset() as i64 {
            for d in [a, -a] {
                let b = self.block(d).expect("offset in range");
                let v = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
                if v > best.0 {
                    best = (v, a as usize);
                }
            }
        }
        best
    }
}
