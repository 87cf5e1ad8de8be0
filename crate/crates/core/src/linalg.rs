//! Small numerical kernels that the dense libraries do not cover directly:
//! a pivoted complex tridiagonal LU and a Lanczos estimate of the top
//! singular value.

use faer::Mat;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// LU factorisation of a complex tridiagonal matrix with partial pivoting.
///
/// Row interchanges create one extra superdiagonal, as in LAPACK's `gttrf`.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    lower: Vec<Complex64>,
    diag: Vec<Complex64>,
    upper1: Vec<Complex64>,
    upper2: Vec<Complex64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    /// `sub[i] = A[i+1, i]`, `diag[i] = A[i, i]`, `sup[i] = A[i, i+1]`.
    pub fn new(sub: &[Complex64], diag: &[Complex64], sup: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || sub.len() + 1 != n || sup.len() + 1 != n {
            return Err(Error::LinearAlgebra("inconsistent tridiagonal bands".into()));
        }
        let mut d = diag.to_vec();
        let mut u1 = sup.to_vec();
        let mut u2 = vec![ZERO; n.saturating_sub(2)];
        let mut l = vec![ZERO; n - 1];
        let mut swapped = vec![false; n - 1];
        let mut sub = sub.to_vec();
        for i in 0..n - 1 {
            if sub[i].norm() > d[i].norm() {
                // swap rows i and i+1
                swapped[i] = true;
                std::mem::swap(&mut d[i], &mut sub[i]);
                let next_diag = d[i + 1];
                d[i + 1] = u1[i];
                u1[i] = next_diag;
                if i + 2 < n {
                    u2[i] = u1[i + 1];
                    u1[i + 1] = ZERO;
                }
            }
            if d[i] == ZERO {
                return Err(Error::LinearAlgebra(format!("singular tridiagonal pivot at {i}")));
            }
            let f = sub[i] / d[i];
            l[i] = f;
            d[i + 1] -= f * u1[i];
            if i + 2 < n {
                u1[i + 1] -= f * u2[i];
            }
        }
        if d[n - 1] == ZERO {
            return Err(Error::LinearAlgebra("singular tridiagonal pivot at end".into()));
        }
        Ok(Self {
            lower: l,
            diag: d,
            upper1: u1,
            upper2: u2,
            swapped,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.dim();
        for i in 0..n - 1 {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            let bi = b[i];
            b[i + 1] -= self.lower[i] * bi;
        }
        b[n - 1] /= self.diag[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.upper1[n - 2] * b[n - 1]) / self.diag[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.upper1[i] * b[i + 1] - self.upper2[i] * b[i + 2]) / self.diag[i];
        }
    }
}

/// Largest singular value of `a` by Lanczos on `a^H a` with full reorthogonalisation.
///
/// Deterministic: the start vector comes from a fixed seed.
pub fn top_singular_value(a: &Mat<Complex64>) -> Result<f64> {
    top_singular_value_with(a, 1e-13, 200)
}

pub fn top_singular_value_with(a: &Mat<Complex64>, rel_tol: f64, max_iter: usize) -> Result<f64> {
    let (rows, cols) = (a.nrows(), a.ncols());
    if rows == 0 || cols == 0 {
        return Ok(0.0);
    }
    let ah = a.adjoint().to_owned();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q = Mat::<Complex64>::from_fn(cols, 1, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    let nrm = q.norm_l2();
    q /= faer::Scale(Complex64::new(nrm, 0.0));
    let mut basis: Vec<Mat<Complex64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut previous = 0.0;
    let steps = max_iter.min(cols);
    for j in 0..steps {
        let mut r = &ah * (a * &q);
        let a_j = dot(&q, &r).re;
        alpha.push(a_j);
        basis.push(q.clone());
        // full reorthogonalisation, twice for safety
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &r);
                r -= v * faer::Scale(c);
            }
        }
        let b_j = r.norm_l2();
        let ritz = largest_ritz(&alpha, &beta);
        let converged = j > 2 && (ritz - previous).abs() <= rel_tol * ritz.abs();
        previous = ritz;
        if converged || b_j <= 1e-14 * ritz.abs().max(1e-300) || j + 1 == steps {
            return Ok(ritz.max(0.0).sqrt());
        }
        beta.push(b_j);
        q = r / faer::Scale(Complex64::new(b_j, 0.0));
    }
    Ok(previous.max(0.0).sqrt())
}

fn dot(a: &Mat<Complex64>, b: &Mat<Complex64>) -> Complex64 {
    (0..a.nrows()).map(|i| a[(i, 0)].conj() * b[(i, 0)]).sum()
}

fn largest_ritz(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    SymmetricEigen::new(t).eigenvalues.max()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn tridiagonal_matches_dense_solve() {
        use faer::linalg::solvers::Solve;
        let n = 30;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut gen = || c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        // small diagonal forces pivoting
        let diag: Vec<_> = (0..n).map(|_| gen() * 0.01).collect();
        let sub: Vec<_> = (0..n - 1).map(|_| gen()).collect();
        let sup: Vec<_> = (0..n - 1).map(|_| gen()).collect();
        let b: Vec<_> = (0..n).map(|_| gen()).collect();
        let lu = TridiagonalLu::new(&sub, &diag, &sup).unwrap();
        let mut x = b.clone();
        lu.solve_in_place(&mut x);
        let dense = Mat::<Complex64>::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else if i == j + 1 {
                sub[j]
            } else if j == i + 1 {
                sup[i]
            } else {
                c(0.0, 0.0)
            }
        });
        let mut rhs = Mat::<Complex64>::from_fn(n, 1, |i, _| b[i]);
        dense.partial_piv_lu().solve_in_place(&mut rhs);
        for i in 0..n {
            assert!((x[i] - rhs[(i, 0)]).norm() < 1e-10 * (1.0 + rhs[(i, 0)].norm()));
        }
    }

    #[test]
    fn lanczos_matches_full_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for &(r, k) in &[(12, 12), (40, 25), (7, 60)] {
            let a = Mat::<Complex64>::from_fn(r, k, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            let exact = a.singular_values().unwrap()[0];
            let est = top_singular_value(&a).unwrap();
            assert!((est - exact).abs() < 1e-10 * exact, "{est} vs {exact}");
        }
    }

    #[test]
    fn lanczos_on_rank_one() {
        let a = Mat::<Complex64>::from_fn(10, 10, |i, j| c((i + 1) as f64 * (j + 1) as f64, 0.0));
        let exact: f64 = (1..=10).map(|i| (i * i) as f64).sum();
        assert!((top_singular_value(&a).unwrap() - exact).abs() < 1e-10 * exact);
    }
}
