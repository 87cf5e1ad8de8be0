//! Dense `(n, k)`-indexed 2x2 block kernels.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Block, LatticeWindow};

/// What a kernel is a kernel of.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelParameter {
    /// resolvent at spectral parameter `lambda`
    Lambda(Complex64),
    /// propagator at time `t`
    Time(f64),
    /// anything else (projectors, identities, weighted copies)
    None,
}

/// Blocks `[K]_{n,k}` for `n` in `n_range` and `k` in `k_range`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBlockMatrix {
    parameter: KernelParameter,
    n_range: LatticeWindow,
    k_range: LatticeWindow,
    blocks: Vec<Block>,
}

impl KernelBlockMatrix {
    pub fn zeros(parameter: KernelParameter, n_range: LatticeWindow, k_range: LatticeWindow) -> Self {
        Self {
            parameter,
            n_range,
            k_range,
            blocks: vec![Block::zeros(); n_range.len() * k_range.len()],
        }
    }

    pub fn from_fn(
        parameter: KernelParameter,
        n_range: LatticeWindow,
        k_range: LatticeWindow,
        mut f: impl FnMut(i64, i64) -> Block,
    ) -> Self {
        let blocks = n_range
            .sites()
            .flat_map(|n| k_range.sites().map(move |k| (n, k)))
            .map(|(n, k)| f(n, k))
            .collect();
        Self {
            parameter,
            n_range,
            k_range,
            blocks,
        }
    }

    pub fn try_from_fn(
        parameter: KernelParameter,
        n_range: LatticeWindow,
        k_range: LatticeWindow,
        mut f: impl FnMut(i64, i64) -> Result<Block>,
    ) -> Result<Self> {
        let mut blocks = Vec::with_capacity(n_range.len() * k_range.len());
        for n in n_range.sites() {
            for k in k_range.sites() {
                blocks.push(f(n, k)?);
            }
        }
        Ok(Self {
            parameter,
            n_range,
            k_range,
            blocks,
        })
    }

    /// Identity kernel on a square range.
    pub fn identity(range: LatticeWindow) -> Self {
        Self::from_fn(KernelParameter::None, range, range, |n, k| {
            if n == k {
                Block::identity()
            } else {
                Block::zeros()
            }
        })
    }

    pub fn parameter(&self) -> KernelParameter {
        self.parameter
    }

    pub fn n_range(&self) -> LatticeWindow {
        self.n_range
    }

    pub fn k_range(&self) -> LatticeWindow {
        self.k_range
    }

    fn offset(&self, n: i64, k: i64) -> Option<usize> {
        Some(self.n_range.index_of(n)? * self.k_range.len() + self.k_range.index_of(k)?)
    }

    pub fn block(&self, n: i64, k: i64) -> Option<&Block> {
        self.offset(n, k).map(|i| &self.blocks[i])
    }

    pub fn get(&self, n: i64, k: i64) -> Result<Block> {
        self.block(n, k).copied().ok_or_else(|| {
            Error::Domain(format!(
                "block ({n}, {k}) outside {} x {}",
                self.n_range, self.k_range
            ))
        })
    }

    pub fn block_mut(&mut self, n: i64, k: i64) -> Option<&mut Block> {
        self.offset(n, k).map(move |i| &mut self.blocks[i])
    }

    /// `(n, k, block)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, &Block)> + '_ {
        let kr = self.k_range;
        self.n_range
            .sites()
            .flat_map(move |n| kr.sites().map(move |k| (n, k)))
            .zip(&self.blocks)
            .map(|((n, k), b)| (n, k, b))
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn map(&self, mut f: impl FnMut(i64, i64, &Block) -> Block) -> Self {
        let blocks = self.iter().map(|(n, k, b)| f(n, k, b)).collect();
        Self {
            parameter: self.parameter,
            n_range: self.n_range,
            k_range: self.k_range,
            blocks,
        }
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        self.map(|_, _, b| b * s)
    }

    /// Sub-kernel on smaller ranges.
    pub fn restrict(&self, n_range: LatticeWindow, k_range: LatticeWindow) -> Result<Self> {
        Self::try_from_fn(self.parameter, n_range, k_range, |n, k| self.get(n, k))
    }

    /// Largest entrywise modulus of the difference on the common ranges.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (n, k, b) in self.iter() {
            if let Some(o) = other.block(n, k) {
                worst = worst.max((b - o).iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        Ok(worst)
    }

    /// Dense matrix with rows `(u_n, v_n)` and columns `(u_k, v_k)` interleaved per site.
    pub fn to_dense(&self) -> Mat<Complex64> {
        let kl = self.k_range.len();
        Mat::from_fn(2 * self.n_range.len(), 2 * kl, |i, j| {
            self.blocks[(i / 2) * kl + j / 2][(i % 2, j % 2)]
        })
    }

    pub fn from_dense(
        parameter: KernelParameter,
        n_range: LatticeWindow,
        k_range: LatticeWindow,
        dense: &Mat<Complex64>,
    ) -> Result<Self> {
        if dense.nrows() != 2 * n_range.len() || dense.ncols() != 2 * k_range.len() {
            return Err(Error::Domain(format!(
                "dense matrix {}x{} does not match ranges {n_range} x {k_range}",
                dense.nrows(),
                dense.ncols()
            )));
        }
        let (n0, k0) = (n_range.n_min(), k_range.n_min());
        Ok(Self::from_fn(parameter, n_range, k_range, |n, k| {
            let (i, j) = (2 * (n - n0) as usize, 2 * (k - k0) as usize);
            Block::new(
                dense[(i, j)],
                dense[(i, j + 1)],
                dense[(i + 1, j)],
                dense[(i + 1, j + 1)],
            )
        }))
    }
}
