//! Finite lattice windows and banded Hermitian storage.
//!
//! Operators on `ℓ²(𝔾; ℂ²)` are truncated to a window of sites and flattened
//! to scalar indices: site `n` occupies the pair `(2(n − n_lo), 2(n − n_lo) + 1)`
//! — upper component first, lower second. Only the main diagonal and the
//! superdiagonals are stored; the lower triangle is implied by symmetry, so
//! stored matrices are Hermitian *exactly*, not up to rounding.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

/// Which copy of the lattice a window truncates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    /// Sites `−N ..= N` of `ℤ`.
    Bilateral,
    /// Sites `0 ..= N` of `ℤ₊`.
    Unilateral,
}

/// A finite window of lattice sites `lo ..= hi`.
///
/// The standard truncations are the radius windows (`−N..=N` bilateral,
/// `0..=N` unilateral); interior restriction produces general spans.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeWindow {
    pub kind: WindowKind,
    lo: i64,
    hi: i64,
}

impl LatticeWindow {
    /// Radius-`n` window: sites `−n..=n` on `ℤ`, `0..=n` on `ℤ₊`.
    #[must_use]
    pub fn new(kind: WindowKind, n: u32) -> Self {
        match kind {
            WindowKind::Bilateral => Self { kind, lo: -i64::from(n), hi: i64::from(n) },
            WindowKind::Unilateral => Self { kind, lo: 0, hi: i64::from(n) },
        }
    }

    #[must_use]
    pub fn bilateral(n: u32) -> Self {
        Self::new(WindowKind::Bilateral, n)
    }

    #[must_use]
    pub fn unilateral(n: u32) -> Self {
        Self::new(WindowKind::Unilateral, n)
    }

    /// Arbitrary span `lo..=hi`. Unilateral spans must stay inside `ℤ₊`.
    #[must_use]
    pub fn span(kind: WindowKind, lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "window span must be nonempty");
        assert!(
            kind == WindowKind::Bilateral || lo >= 0,
            "unilateral windows live on nonnegative sites"
        );
        Self { kind, lo, hi }
    }

    /// Smallest site index in the window.
    #[must_use]
    pub fn site_lo(&self) -> i64 {
        self.lo
    }

    /// Largest site index in the window.
    #[must_use]
    pub fn site_hi(&self) -> i64 {
        self.hi
    }

    #[must_use]
    pub fn site_count(&self) -> usize {
        (self.site_hi() - self.site_lo() + 1) as usize
    }

    /// Flattened dimension: two components per site.
    #[must_use]
    pub fn dim(&self) -> usize {
        2 * self.site_count()
    }

    /// Flattened index of the upper component at site `n`.
    #[must_use]
    pub fn flat_upper(&self, n: i64) -> usize {
        debug_assert!(n >= self.site_lo() && n <= self.site_hi());
        (2 * (n - self.site_lo())) as usize
    }

    /// Flattened index of the lower component at site `n`.
    #[must_use]
    pub fn flat_lower(&self, n: i64) -> usize {
        self.flat_upper(n) + 1
    }

    /// Site index owning flattened index `i`.
    #[must_use]
    pub fn site_of_flat(&self, i: usize) -> i64 {
        self.site_lo() + (i / 2) as i64
    }

    /// Iterator over all sites in the window.
    pub fn sites(&self) -> impl Iterator<Item = i64> {
        self.site_lo()..=self.site_hi()
    }
}

/// A Hermitian matrix with limited bandwidth; only the upper triangle is kept.
///
/// `diag(d)` holds the entries `A[i, i + d]` for `d = 0 ..= half_bandwidth`.
/// `get(i, j)` serves the lower triangle by conjugation, so hermiticity is
/// structural.
#[derive(Clone, Debug)]
pub struct BandedHermitian {
    window: LatticeWindow,
    dim: usize,
    half_bandwidth: usize,
    /// `diags[d][i] = A[i, i + d]`; row `d` has length `dim − d`.
    diags: Vec<Vec<Complex64>>,
}

impl BandedHermitian {
    #[must_use]
    pub fn new_zero(window: LatticeWindow, half_bandwidth: usize) -> Self {
        let dim = window.dim();
        let hb = half_bandwidth.min(dim.saturating_sub(1));
        let diags = (0..=hb).map(|d| vec![Complex64::ZERO; dim - d]).collect();
        Self { window, dim, half_bandwidth: hb, diags }
    }

    /// Builds from an upper-triangle accessor `f(i, j)` with `i ≤ j ≤ i + hb`.
    #[must_use]
    pub fn from_upper_fn(
        window: LatticeWindow,
        half_bandwidth: usize,
        f: impl Fn(usize, usize) -> Complex64,
    ) -> Self {
        let mut m = Self::new_zero(window, half_bandwidth);
        for d in 0..=m.half_bandwidth {
            for i in 0..m.dim - d {
                m.diags[d][i] = f(i, i + d);
            }
        }
        m
    }

    #[must_use]
    pub fn window(&self) -> LatticeWindow {
        self.window
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[must_use]
    pub fn half_bandwidth(&self) -> usize {
        self.half_bandwidth
    }

    /// Entry `A[i, j]`, either triangle.
    #[must_use]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if j >= i {
            let d = j - i;
            if d > self.half_bandwidth {
                Complex64::ZERO
            } else {
                self.diags[d][i]
            }
        } else {
            self.get(j, i).conj()
        }
    }

    /// Sets `A[i, j]` with `j ≥ i` (and implicitly `A[j, i] = conj`).
    pub fn set_upper(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(j >= i, "set_upper expects an upper-triangle index pair");
        let d = j - i;
        assert!(d <= self.half_bandwidth, "index pair outside stored band");
        self.diags[d][i] = v;
    }

    pub fn add_upper(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(j >= i, "add_upper expects an upper-triangle index pair");
        let d = j - i;
        assert!(d <= self.half_bandwidth, "index pair outside stored band");
        self.diags[d][i] += v;
    }

    /// Largest imaginary part on the main diagonal (must vanish for a
    /// self-adjoint matrix; builders keep it identically zero).
    #[must_use]
    pub fn diag_imag_max(&self) -> f64 {
        self.diags[0].iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.fill(Complex64::ZERO);
        for i in 0..self.dim {
            let mut acc = self.diags[0][i] * x[i];
            for d in 1..=self.half_bandwidth {
                if i + d < self.dim {
                    acc += self.diags[d][i] * x[i + d];
                }
                if i >= d {
                    acc += self.diags[d][i - d].conj() * x[i - d];
                }
            }
            y[i] = acc;
        }
    }

    /// Maximum absolute row sum — an upper bound on the operator norm.
    #[must_use]
    pub fn inf_norm(&self) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..self.dim {
            let mut row = self.diags[0][i].norm();
            for d in 1..=self.half_bandwidth {
                if i + d < self.dim {
                    row += self.diags[d][i].norm();
                }
                if i >= d {
                    row += self.diags[d][i - d].norm();
                }
            }
            best = best.max(row);
        }
        best
    }

    /// Largest entry magnitude.
    #[must_use]
    pub fn max_entry(&self) -> f64 {
        self.diags
            .iter()
            .flat_map(|row| row.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Full dense copy (for small windows and oracle comparisons).
    #[must_use]
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let mut out = vec![vec![Complex64::ZERO; self.dim]; self.dim];
        for (i, row) in out.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.half_bandwidth);
            let hi = (i + self.half_bandwidth).min(self.dim - 1);
            for (j, slot) in row.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *slot = self.get(i, j);
            }
        }
        out
    }

    /// Writes the matrix in a plain triplet format:
    /// a header line `dim bandwidth`, then one line `row col re im` per
    /// nonzero entry (both triangles), ordered by row then column.
    pub fn write_triplets(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(out, "{} {}", self.dim, self.half_bandwidth)?;
        for i in 0..self.dim {
            let lo = i.saturating_sub(self.half_bandwidth);
            let hi = (i + self.half_bandwidth).min(self.dim - 1);
            for j in lo..=hi {
                let v = self.get(i, j);
                if v != Complex64::ZERO {
                    writeln!(out, "{} {} {} {}", i, j, crate::f17(v.re), crate::f17(v.im))?;
                }
            }
        }
        Ok(())
    }
}
