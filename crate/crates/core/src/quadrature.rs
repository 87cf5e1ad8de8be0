//! Composite Gauss-Legendre rules on `[-pi, pi]` for oscillatory `theta` integrals.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Panel layout and acceptance tolerance for `theta` quadrature.
///
/// The panel count is `max(min_panels, panels_per_time * t, 2 * max_offset)`,
/// rounded up to an even number so that `0` is a panel boundary and no node
/// ever sits on `{0, +-pi}`. The error estimate compares against the rule
/// with half as many panels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub order: usize,
    pub min_panels: usize,
    pub panels_per_time: f64,
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            order: 16,
            min_panels: 64,
            panels_per_time: 8.0,
            tolerance: 1e-9,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    /// Panels for time `t` and lattice offsets up to `max_offset`.
    pub fn panels(&self, t: f64, max_offset: usize) -> usize {
        let by_time = (self.panels_per_time * t.abs()).ceil() as usize;
        let p = self.min_panels.max(by_time).max(2 * max_offset).max(2);
        p + p % 2
    }

    pub fn rule(&self, panels: usize) -> ThetaRule {
        ThetaRule::composite(self.order, panels)
    }

    /// Fine rule for `(t, max_offset)` together with its half-panel companion.
    pub fn rule_pair(&self, t: f64, max_offset: usize) -> (ThetaRule, ThetaRule) {
        let p = self.panels(t, max_offset);
        (self.rule(p), self.rule((p / 2).max(1)))
    }
}

/// Nodes and weights of a composite rule on `[-pi, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ThetaRule {
    pub fn composite(order: usize, panels: usize) -> Self {
        let order = NonZeroUsize::new(order.max(1)).unwrap();
        let base = GaussLegendre::new(order);
        let pairs = base.as_node_weight_pairs();
        let h = 2.0 * PI / panels as f64;
        let mut nodes = Vec::with_capacity(panels * pairs.len());
        let mut weights = Vec::with_capacity(panels * pairs.len());
        for p in 0..panels {
            let a = -PI + h * p as f64;
            for &(x, w) in pairs {
                nodes.push(a + 0.5 * h * (x + 1.0));
                weights.push(0.5 * h * w);
            }
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Accumulates `weight * f(theta)` into a buffer of length `dim`.
    /// `f` writes the integrand at `theta` into its slice argument.
    pub fn integrate_into(
        &self,
        dim: usize,
        mut f: impl FnMut(f64, &mut [Complex64]),
    ) -> Vec<Complex64> {
        let mut acc = vec![Complex64::new(0.0, 0.0); dim];
        let mut buf = vec![Complex64::new(0.0, 0.0); dim];
        for (&theta, &w) in self.nodes.iter().zip(&self.weights) {
            buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
            f(theta, &mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += b * w;
            }
        }
        acc
    }

    pub fn integrate(&self, f: impl Fn(f64) -> Complex64) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| f(t) * w)
            .sum()
    }
}

/// Vector-valued integral over `[-pi, pi]` with an error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResult {
    pub values: Vec<Complex64>,
    pub error_estimate: f64,
    pub nodes: usize,
}

/// Integrates on the fine and the half-panel rule; the estimate is the max
/// absolute difference. Fails when it exceeds `spec.tolerance`.
pub fn integrate_checked(
    spec: &QuadratureSpec,
    t: f64,
    max_offset: usize,
    dim: usize,
    mut f: impl FnMut(f64, &mut [Complex64]),
) -> Result<QuadratureResult> {
    let (fine, coarse) = spec.rule_pair(t, max_offset);
    let values = fine.integrate_into(dim, &mut f);
    let rough = coarse.integrate_into(dim, &mut f);
    let error_estimate = values
        .iter()
        .zip(&rough)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if !(error_estimate <= spec.tolerance) {
        return Err(Error::Quadrature {
            estimate: error_estimate,
            tolerance: spec.tolerance,
        });
    }
    Ok(QuadratureResult {
        values,
        error_estimate,
        nodes: fine.len(),
    })
}
