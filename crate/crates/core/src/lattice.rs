//! Lattice windows, spinor sequences, the matrix potential and weighted norms.
//!
//! The operator acting on two-component sequences `w_n = (u_n, v_n)` is
//!
//! ```text
//! (D w)_n = ( m u_n + v_n - v_{n+1} + (Q_n w_n)_1 ,
//!             u_n - u_{n-1} - m v_n + (Q_n w_n)_2 )
//! ```

use std::fmt;
use std::path::Path;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Two-component complex spinor `(u_n, v_n)`.
pub type Spinor = Vector2<Complex64>;
/// Complex 2x2 kernel block.
pub type Block = Matrix2<Complex64>;

/// Mass parameter and the band geometry it fixes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    mass: f64,
}

impl ModelParams {
    pub fn new(mass: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mass must be positive and finite, got {mass}"
            )));
        }
        Ok(Self { mass })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Upper band edge `sqrt(m^2 + 4)`.
    pub fn outer_edge(&self) -> f64 {
        (self.mass * self.mass + 4.0).sqrt()
    }

    /// `[-sqrt(m^2+4), -m, m, sqrt(m^2+4)]`.
    pub fn gap_edges(&self) -> [f64; 4] {
        let o = self.outer_edge();
        [-o, -self.mass, self.mass, o]
    }

    /// Distance from a real energy to the closed bands; zero inside.
    pub fn band_distance(&self, lambda: f64) -> f64 {
        let a = lambda.abs();
        if a < self.mass {
            self.mass - a
        } else if a > self.outer_edge() {
            a - self.outer_edge()
        } else {
            0.0
        }
    }

    /// Distance from a real energy to the nearest of the four band edges.
    pub fn edge_distance(&self, lambda: f64) -> f64 {
        self.gap_edges().iter().map(|e| (lambda - e).abs()).fold(f64::INFINITY, f64::min)
    }

    /// Open-band membership.
    pub fn in_band(&self, lambda: f64) -> bool {
        let a = lambda.abs();
        a > self.mass && a < self.outer_edge()
    }
}

/// Inclusive range of lattice sites `n_min..=n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeWindow {
    n_min: i64,
    n_max: i64,
}

impl LatticeWindow {
    pub fn new(n_min: i64, n_max: i64) -> Result<Self> {
        if n_min > n_max {
            return Err(Error::InvalidParameter(format!(
                "empty window [{n_min}, {n_max}]"
            )));
        }
        Ok(Self { n_min, n_max })
    }

    /// `[-half_width, half_width]`.
    pub fn symmetric(half_width: usize) -> Self {
        let h = half_width as i64;
        Self { n_min: -h, n_max: h }
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    pub fn len(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.n_min && n <= self.n_max
    }

    pub fn index_of(&self, n: i64) -> Option<usize> {
        self.contains(n).then(|| (n - self.n_min) as usize)
    }

    pub fn sites(&self) -> impl DoubleEndedIterator<Item = i64> {
        self.n_min..=self.n_max
    }

    /// Smallest window containing both.
    pub fn hull(&self, other: &LatticeWindow) -> LatticeWindow {
        LatticeWindow {
            n_min: self.n_min.min(other.n_min),
            n_max: self.n_max.max(other.n_max),
        }
    }

    pub fn expand(&self, margin: usize) -> LatticeWindow {
        let m = margin as i64;
        LatticeWindow {
            n_min: self.n_min - m,
            n_max: self.n_max + m,
        }
    }

    pub fn midpoint(&self) -> i64 {
        self.n_min + (self.n_max - self.n_min) / 2
    }
}

impl fmt::Display for LatticeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.n_min, self.n_max)
    }
}

/// Spinor values on a contiguous window.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorSequence {
    window: LatticeWindow,
    values: Vec<Spinor>,
}

impl SpinorSequence {
    pub fn new(window: LatticeWindow, values: Vec<Spinor>) -> Result<Self> {
        if values.len() != window.len() {
            return Err(Error::InvalidParameter(format!(
                "{} values for window {window} of size {}",
                values.len(),
                window.len()
            )));
        }
        Ok(Self { window, values })
    }

    pub fn from_fn(window: LatticeWindow, f: impl FnMut(i64) -> Spinor) -> Self {
        let values = window.sites().map(f).collect();
        Self { window, values }
    }

    pub fn zeros(window: LatticeWindow) -> Self {
        Self::from_fn(window, |_| Spinor::zeros())
    }

    pub fn window(&self) -> LatticeWindow {
        self.window
    }

    pub fn values(&self) -> &[Spinor] {
        &self.values
    }

    pub fn get(&self, n: i64) -> Option<&Spinor> {
        self.window.index_of(n).map(|i| &self.values[i])
    }

    /// Value at `n`, or a domain error naming the missing site.
    pub fn at(&self, n: i64) -> Result<Spinor> {
        self.get(n)
            .copied()
            .ok_or_else(|| Error::Domain(format!("site {n} outside window {}", self.window)))
    }

    /// `a * self + b * other` on a shared window.
    pub fn combine(&self, a: Complex64, other: &SpinorSequence, b: Complex64) -> Result<Self> {
        if self.window != other.window {
            return Err(Error::Domain("windows differ".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x * a + y * b)
            .collect();
        Ok(Self {
            window: self.window,
            values,
        })
    }

    /// Restriction to a sub-window.
    pub fn restrict(&self, window: LatticeWindow) -> Result<Self> {
        let lo = self
            .window
            .index_of(window.n_min())
            .ok_or_else(|| Error::Domain(format!("{window} not inside {}", self.window)))?;
        if !self.window.contains(window.n_max()) {
            return Err(Error::Domain(format!("{window} not inside {}", self.window)));
        }
        Ok(Self {
            window,
            values: self.values[lo..lo + window.len()].to_vec(),
        })
    }

    /// Component sequences `u` and `v`.
    pub fn components(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        self.values.iter().map(|s| (s[0], s[1])).unzip()
    }
}

/// Exponent of a weighted sequence norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exponent {
    One,
    Two,
    Infinity,
}

/// `(sum (1+|n|)^{p sigma} |u_n|^p)^{1/p}`, or `sup (1+|n|)^sigma |u_n|` for `p = inf`.
pub fn weighted_norm(window: LatticeWindow, values: &[Complex64], p: Exponent, sigma: f64) -> f64 {
    let weighted = window
        .sites()
        .zip(values)
        .map(|(n, u)| (1.0 + n.abs() as f64).powf(sigma) * u.norm());
    match p {
        Exponent::One => weighted.sum(),
        Exponent::Two => weighted.map(|x| x * x).sum::<f64>().sqrt(),
        Exponent::Infinity => weighted.fold(0.0, f64::max),
    }
}

/// Real 2x2 matrix potential with finite support.
///
/// Entries are `[[q11, q12], [q21, q22]]`. Construction enforces
/// `q12 = q21` exactly and `q21 != -1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPotential {
    support: Option<LatticeWindow>,
    entries: Vec<Matrix2<f64>>,
}

impl MatrixPotential {
    pub fn zero() -> Self {
        Self {
            support: None,
            entries: Vec::new(),
        }
    }

    /// Potential from per-site entries starting at `first_site`.
    pub fn new(first_site: i64, entries: Vec<Matrix2<f64>>) -> Result<Self> {
        for (i, q) in entries.iter().enumerate() {
            validate_entry(first_site + i as i64, q)?;
        }
        Ok(Self::from_entries_unchecked(first_site, entries))
    }

    /// Builds a potential without the structural checks.
    ///
    /// Only meant for negative controls in tests; downstream formulas assume
    /// `q12 = q21`.
    #[doc(hidden)]
    pub fn from_entries_unchecked(first_site: i64, entries: Vec<Matrix2<f64>>) -> Self {
        if entries.is_empty() {
            return Self::zero();
        }
        let mut p = Self {
            support: Some(LatticeWindow {
                n_min: first_site,
                n_max: first_site + entries.len() as i64 - 1,
            }),
            entries,
        };
        p.trim();
        p
    }

    /// Potential from `(site, entry)` pairs; unlisted sites are zero.
    pub fn from_sites(sites: impl IntoIterator<Item = (i64, Matrix2<f64>)>) -> Result<Self> {
        let sites: Vec<_> = sites.into_iter().collect();
        if sites.is_empty() {
            return Ok(Self::zero());
        }
        let lo = sites.iter().map(|s| s.0).min().unwrap();
        let hi = sites.iter().map(|s| s.0).max().unwrap();
        let mut entries = vec![Matrix2::zeros(); (hi - lo + 1) as usize];
        for (n, q) in sites {
            entries[(n - lo) as usize] = q;
        }
        Self::new(lo, entries)
    }

    /// Single nonzero site.
    pub fn single_site(n: i64, q11: f64, q12: f64, q21: f64, q22: f64) -> Result<Self> {
        Self::from_sites([(n, Matrix2::new(q11, q12, q21, q22))])
    }

    /// `amplitude * exp(-rate |n|)` on every entry for `|n| <= half_width`,
    /// with the off-diagonal pair at half amplitude.
    pub fn exp_decay(amplitude: f64, rate: f64, half_width: usize) -> Result<Self> {
        if !(rate >= 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParameter(
                "exp_decay needs finite amplitude and rate >= 0".into(),
            ));
        }
        let h = half_width as i64;
        let entries = (-h..=h)
            .map(|n| {
                let a = amplitude * (-rate * n.abs() as f64).exp();
                Matrix2::new(a, 0.5 * a, 0.5 * a, -a)
            })
            .collect();
        Self::new(-h, entries)
    }

    /// Reproducible random potential: entries uniform in `[-1/2, 1/2]` times
    /// `exp(-envelope_rate |n|)`, symmetric off-diagonal.
    pub fn seeded_random(seed: u64, half_width: usize, envelope_rate: f64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = half_width as i64;
        let entries = (-h..=h)
            .map(|n| {
                let env = (-envelope_rate * n.abs() as f64).exp();
                let mut draw = || (rng.gen::<f64>() - 0.5) * env;
                let (q11, q12, q22) = (draw(), draw(), draw());
                Matrix2::new(q11, q12, q12, q22)
            })
            .collect();
        Self::new(-h, entries)
    }

    /// Parses the text format `n q11 q12 q21 q22` (one site per line, `#` comments).
    pub fn parse(text: &str) -> Result<Self> {
        let mut sites: Vec<(i64, Matrix2<f64>)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(Error::PotentialParse {
                    line,
                    message: format!("expected 5 fields `n q11 q12 q21 q22`, found {}", fields.len()),
                });
            }
            let n: i64 = fields[0].parse().map_err(|_| Error::PotentialParse {
                line,
                message: format!("bad site index `{}`", fields[0]),
            })?;
            let mut q = [0.0f64; 4];
            for (slot, field) in q.iter_mut().zip(&fields[1..]) {
                *slot = field.parse().map_err(|_| Error::PotentialParse {
                    line,
                    message: format!("bad number `{field}`"),
                })?;
                if !slot.is_finite() {
                    return Err(Error::PotentialParse {
                        line,
                        message: format!("non-finite value `{field}`"),
                    });
                }
            }
            if sites.iter().any(|s| s.0 == n) {
                return Err(Error::PotentialParse {
                    line,
                    message: format!("site {n} listed twice"),
                });
            }
            let entry = Matrix2::new(q[0], q[1], q[2], q[3]);
            validate_entry(n, &entry).map_err(|e| Error::PotentialParse {
                line,
                message: e.to_string(),
            })?;
            sites.push((n, entry));
        }
        Self::from_sites(sites)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::parse(&text)
    }

    /// Text form accepted by [`MatrixPotential::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::from("# n q11 q12 q21 q22\n");
        for (n, q) in self.iter() {
            out.push_str(&format!(
                "{n} {:.17e} {:.17e} {:.17e} {:.17e}\n",
                q[(0, 0)],
                q[(0, 1)],
                q[(1, 0)],
                q[(1, 1)]
            ));
        }
        out
    }

    /// Window of (possibly) nonzero entries; `None` for the zero potential.
    pub fn support(&self) -> Option<LatticeWindow> {
        self.support
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_none()
    }

    /// Entry at site `n` (zero off the support).
    pub fn at(&self, n: i64) -> Matrix2<f64> {
        match self.support.and_then(|s| s.index_of(n)) {
            Some(i) => self.entries[i],
            None => Matrix2::zeros(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Matrix2<f64>)> + '_ {
        self.support
            .into_iter()
            .flat_map(|s| s.sites())
            .zip(self.entries.iter().copied())
    }

    /// `max_ij ||q^{ij}||_{l^1_sigma}`.
    pub fn weighted_l1(&self, sigma: f64) -> f64 {
        let mut per_entry = [0.0f64; 4];
        for (n, q) in self.iter() {
            let w = (1.0 + n.abs() as f64).powf(sigma);
            for (acc, x) in per_entry.iter_mut().zip(q.iter()) {
                *acc += w * x.abs();
            }
        }
        per_entry.into_iter().fold(0.0, f64::max)
    }

    /// `sum_{k outside window} (1+|k|) ||Q_k||`.
    pub fn weighted_tail(&self, window: &LatticeWindow) -> f64 {
        self.iter()
            .filter(|(n, _)| !window.contains(*n))
            .map(|(n, q)| (1.0 + n.abs() as f64) * q.norm())
            .sum()
    }

    /// Smallest symmetric window whose complement carries weighted tail below `tol`.
    pub fn effective_support(&self, tol: f64) -> Option<LatticeWindow> {
        let s = self.support?;
        let mut lo = s.n_min;
        let mut hi = s.n_max;
        let mut tail = 0.0;
        loop {
            if lo > hi {
                return None;
            }
            let candidate = if (lo.abs()) >= (hi.abs()) { lo } else { hi };
            let q = self.at(candidate);
            let w = (1.0 + candidate.abs() as f64) * q.norm();
            if tail + w >= tol {
                break;
            }
            tail += w;
            if candidate == lo {
                lo += 1;
            } else {
                hi -= 1;
            }
        }
        Some(LatticeWindow { n_min: lo, n_max: hi })
    }

    /// Restriction to a window (no further validation needed).
    pub fn restricted(&self, window: &LatticeWindow) -> Self {
        let sites: Vec<_> = self.iter().filter(|(n, _)| window.contains(*n)).collect();
        if sites.is_empty() {
            return Self::zero();
        }
        let lo = sites[0].0;
        Self::from_entries_unchecked(lo, sites.into_iter().map(|s| s.1).collect())
    }

    /// `s * Q`; fails if scaling makes some `q21 = -1`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        match self.support {
            None => Ok(Self::zero()),
            Some(w) => Self::new(w.n_min, self.entries.iter().map(|q| q * s).collect()),
        }
    }

    /// Sum of two potentials.
    pub fn add(&self, other: &MatrixPotential) -> Result<Self> {
        let sites: Vec<i64> = self.iter().chain(other.iter()).map(|s| s.0).collect();
        if sites.is_empty() {
            return Ok(Self::zero());
        }
        let lo = *sites.iter().min().unwrap();
        let hi = *sites.iter().max().unwrap();
        Self::new(lo, (lo..=hi).map(|n| self.at(n) + other.at(n)).collect())
    }

    /// Mirror image `Q_n -> Q_{-n}`.
    pub fn reflected(&self) -> Self {
        match self.support {
            None => Self::zero(),
            Some(w) => {
                let entries = self.entries.iter().rev().copied().collect();
                Self::from_entries_unchecked(-w.n_max, entries)
            }
        }
    }

    fn trim(&mut self) {
        let Some(w) = self.support else { return };
        let first = self.entries.iter().position(|q| q.iter().any(|x| *x != 0.0));
        let Some(first) = first else {
            *self = Self::zero();
            return;
        };
        let last = self.entries.iter().rposition(|q| q.iter().any(|x| *x != 0.0)).unwrap();
        self.entries = self.entries[first..=last].to_vec();
        self.support = Some(LatticeWindow {
            n_min: w.n_min + first as i64,
            n_max: w.n_min + last as i64,
        });
    }
}

fn validate_entry(site: i64, q: &Matrix2<f64>) -> Result<()> {
    if q.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite entry at site {site}")));
    }
    let (q12, q21) = (q[(0, 1)], q[(1, 0)]);
    if q12 != q21 {
        return Err(Error::AsymmetricCoupling { site, q12, q21 });
    }
    if q21 == -1.0 {
        return Err(Error::SingularCoupling { site });
    }
    Ok(())
}

/// Applies `D = D_0 + Q` to `w`; the result lives on the interior of `w`'s window.
pub fn apply_dirac(
    params: &ModelParams,
    potential: &MatrixPotential,
    w: &SpinorSequence,
) -> Result<SpinorSequence> {
    let win = w.window();
    if win.len() < 3 {
        return Err(Error::Domain(format!(
            "apply_dirac needs at least three sites, window {win} has {}",
            win.len()
        )));
    }
    let m = params.mass();
    let interior = LatticeWindow::new(win.n_min() + 1, win.n_max() - 1)?;
    let vals = w.values();
    let out = interior
        .sites()
        .map(|n| {
            let i = (n - win.n_min()) as usize;
            let (prev, cur, next) = (vals[i - 1], vals[i], vals[i + 1]);
            let q = potential.at(n);
            let qw = q.map(|x| Complex64::new(x, 0.0)) * cur;
            Spinor::new(
                cur[0] * m + cur[1] - next[1] + qw[0],
                cur[0] - prev[0] - cur[1] * m + qw[1],
            )
        })
        .collect();
    SpinorSequence::new(interior, out)
}
