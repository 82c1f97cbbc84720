//! Banded LU with partial pivoting for shifted solves `(A − z)x = b`.
//!
//! Storage follows the classic band scheme: a `(2·kl + ku + 1) × n`
//! column-major array whose top `kl` rows are workspace for pivoting fill,
//! so `A[i, j]` lives at `ab[j·ldab + kl + ku + i − j]`. Row interchanges
//! widen the effective upper bandwidth to `kl + ku`.

use super::LinalgError;
use num_complex::Complex64;

/// LU factors of `A − z·I` for a banded matrix, with the permutation.
pub struct BandedLu {
    dim: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<Complex64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    /// Factor `A − shift·I` where `entry(i, j)` yields `A[i, j]` inside the
    /// band `|i − j| ≤ half_bandwidth` (it is never called outside).
    ///
    /// Fails with [`LinalgError::SingularPivot`] when an entire pivot column
    /// is exactly zero; for Hermitian `A` and `Im shift ≠ 0` this cannot
    /// happen.
    pub fn factor(
        dim: usize,
        half_bandwidth: usize,
        shift: Complex64,
        entry: impl Fn(usize, usize) -> Complex64,
    ) -> Result<Self, LinalgError> {
        let kl = half_bandwidth;
        let ku = half_bandwidth;
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![Complex64::ZERO; ldab * dim];
        for j in 0..dim {
            let lo = j.saturating_sub(ku);
            let hi = (j + kl).min(dim - 1);
            for i in lo..=hi {
                let mut v = entry(i, j);
                if i == j {
                    v -= shift;
                }
                ab[j * ldab + kl + ku + i - j] = v;
            }
        }

        let diag = kl + ku;
        let mut ipiv = vec![0usize; dim];
        let mut ju = 0usize; // rightmost column touched by interchanges so far
        for j in 0..dim {
            let km = kl.min(dim - 1 - j);
            let col = j * ldab;
            let mut jp = 0usize;
            let mut best = ab[col + diag].norm_sqr();
            for p in 1..=km {
                let v = ab[col + diag + p].norm_sqr();
                if v > best {
                    best = v;
                    jp = p;
                }
            }
            ipiv[j] = j + jp;
            if best == 0.0 {
                return Err(LinalgError::SingularPivot { col: j });
            }
            ju = ju.max((j + ku + jp).min(dim - 1));
            if jp != 0 {
                for c in j..=ju {
                    let base = c * ldab + diag + j - c;
                    ab.swap(base, base + jp);
                }
            }
            if km > 0 {
                let piv = ab[col + diag];
                for p in 1..=km {
                    let m = ab[col + diag + p] / piv;
                    ab[col + diag + p] = m;
                }
                for c in j + 1..=ju {
                    let row_j = c * ldab + diag + j - c;
                    let f = ab[row_j];
                    if f != Complex64::ZERO {
                        for p in 1..=km {
                            let m = ab[col + diag + p];
                            ab[row_j + p] -= m * f;
                        }
                    }
                }
            }
        }
        Ok(Self { dim, kl, ku, ldab, ab, ipiv })
    }

    /// Dimension of the factored matrix.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Solve `(A − shift)x = b` in place.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        assert_eq!(b.len(), self.dim, "right-hand side length must match the matrix dimension");
        let n = self.dim;
        if n == 0 {
            return;
        }
        let diag = self.kl + self.ku;
        if self.kl > 0 {
            for j in 0..n - 1 {
                let lm = self.kl.min(n - 1 - j);
                let l = self.ipiv[j];
                if l != j {
                    b.swap(l, j);
                }
                let bj = b[j];
                if bj != Complex64::ZERO {
                    let col = j * self.ldab;
                    for p in 1..=lm {
                        b[j + p] -= self.ab[col + diag + p] * bj;
                    }
                }
            }
        }
        let band = self.kl + self.ku;
        for j in (0..n).rev() {
            let col = j * self.ldab;
            b[j] /= self.ab[col + diag];
            let xj = b[j];
            if xj != Complex64::ZERO {
                for i in j.saturating_sub(band)..j {
                    b[i] -= self.ab[col + diag + i - j] * xj;
                }
            }
        }
    }

    /// Solve into a fresh vector.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
