//! Dense Hermitian eigensolver.
//!
//! Classical two-stage scheme: unitary reduction to Hermitian tridiagonal
//! form by Householder reflectors, a diagonal phase twist making the
//! tridiagonal real symmetric, then implicit-shift QL. Eigenvectors are
//! recovered by accumulating the QL rotations into the phase matrix and
//! applying the reflectors in reverse.

use super::tri::ql_implicit;
use super::LinalgError;
use num_complex::Complex64;
use rayon::prelude::*;

/// Hard cap on the dense path; larger problems must use banded/tridiagonal
/// routes.
pub const DENSE_DIM_LIMIT: usize = 4096;

/// Result of [`hermitian_dense_eig`].
pub struct DenseEig {
    /// Eigenvalues sorted ascending.
    pub values: Vec<f64>,
    /// `vectors[j]` is the unit eigenvector for `values[j]`; empty when
    /// vectors were not requested.
    pub vectors: Vec<Vec<Complex64>>,
}

/// Full eigendecomposition of a dense Hermitian matrix (rows of equal
/// length). Only the lower triangle is read; the upper triangle is assumed
/// conjugate.
pub fn hermitian_dense_eig(m: &[Vec<Complex64>], want_vectors: bool) -> Result<DenseEig, LinalgError> {
    let n = m.len();
    if n > DENSE_DIM_LIMIT {
        return Err(LinalgError::DimensionTooLarge { dim: n, limit: DENSE_DIM_LIMIT });
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != n {
            return Err(LinalgError::NotSquare { rows: n, cols: row.len(), row: i });
        }
    }
    if n == 0 {
        return Ok(DenseEig { values: vec![], vectors: vec![] });
    }

    // Working copy, filled symmetrically from the lower triangle.
    let mut a: Vec<Vec<Complex64>> = vec![vec![Complex64::ZERO; n]; n];
    for i in 0..n {
        a[i][i] = Complex64::new(m[i][i].re, 0.0);
        for j in 0..i {
            a[i][j] = m[i][j];
            a[j][i] = m[i][j].conj();
        }
    }

    // Householder reduction. reflectors[k] acts on indices k+1..n.
    let mut reflectors: Vec<Option<Vec<Complex64>>> = vec![None; n.saturating_sub(1)];
    let mut e_c = vec![Complex64::ZERO; n.saturating_sub(1)];
    for k in 0..n.saturating_sub(1) {
        let mlen = n - k - 1;
        if mlen == 1 {
            e_c[k] = a[k + 1][k];
            continue;
        }
        let scale: f64 = (k + 1..n).map(|i| a[i][k].norm()).sum();
        if scale == 0.0 {
            e_c[k] = Complex64::ZERO;
            continue;
        }
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| a[i][k] / scale).collect();
        let sigma = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let x0 = v[0];
        let phase0 = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::ONE };
        let alpha = -phase0 * sigma;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        e_c[k] = alpha * scale;
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // Rank-2 update of the trailing block B ← B − 2vw* − 2wv*,
        // w = Bv − (v*Bv)v.
        let mut p = vec![Complex64::ZERO; mlen];
        p.par_iter_mut().enumerate().for_each(|(r, slot)| {
            let row = &a[k + 1 + r][k + 1..n];
            let mut acc = Complex64::ZERO;
            for (c, vc) in v.iter().enumerate() {
                acc += row[c] * vc;
            }
            *slot = acc;
        });
        let kappa: f64 = v.iter().zip(&p).map(|(vc, pc)| (vc.conj() * pc).re).sum();
        let w: Vec<Complex64> = p.iter().zip(&v).map(|(pc, vc)| pc - kappa * vc).collect();
        a.par_iter_mut().skip(k + 1).enumerate().for_each(|(r, row)| {
            let vr = v[r];
            let wr = w[r];
            for c in 0..mlen {
                row[k + 1 + c] -= 2.0 * (vr * w[c].conj() + wr * v[c].conj());
            }
        });
        // Zero the reduced column (kept implicitly; stored for clarity).
        a[k + 1][k] = e_c[k];
        for i in k + 2..n {
            a[i][k] = Complex64::ZERO;
        }
        reflectors[k] = Some(v);
    }

    let mut d: Vec<f64> = (0..n).map(|i| a[i][i].re).collect();
    // Phase twist making the tridiagonal real symmetric.
    let mut phases = vec![Complex64::ONE; n];
    let mut e = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let mag = e_c[i].norm();
        e[i] = mag;
        phases[i + 1] = if mag > 0.0 { phases[i] * (e_c[i] / mag) } else { phases[i] };
    }

    if !want_vectors {
        ql_implicit(&mut d, &mut e, |_, _, _| {})?;
        let mut values = d;
        values.sort_by(f64::total_cmp);
        return Ok(DenseEig { values, vectors: vec![] });
    }

    // Columns of Z start as the phase matrix D; QL rotations accumulate the
    // real eigenvector matrix on the right, so Z ends as D·Z_r.
    let mut z: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut col = vec![Complex64::ZERO; n];
            col[j] = phases[j];
            col
        })
        .collect();
    ql_implicit(&mut d, &mut e, |i, c, s| {
        let (left, right) = z.split_at_mut(i + 1);
        let zi = &mut left[i];
        let zi1 = &mut right[0];
        for r in 0..n {
            let f = zi1[r];
            zi1[r] = s * zi[r] + c * f;
            zi[r] = c * zi[r] - s * f;
        }
    })?;

    // Back-transform: eigenvector = P_0 P_1 … P_{n-3} (D z_r).
    z.par_iter_mut().for_each(|col| {
        for k in (0..n.saturating_sub(1)).rev() {
            if let Some(v) = &reflectors[k] {
                let tail = &mut col[k + 1..n];
                let dot: Complex64 = v.iter().zip(tail.iter()).map(|(vc, tc)| vc.conj() * tc).sum();
                for (tc, vc) in tail.iter_mut().zip(v) {
                    *tc -= 2.0 * dot * vc;
                }
            }
        }
    });

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let vectors: Vec<Vec<Complex64>> = order.iter().map(|&i| std::mem::take(&mut z[i])).collect();
    Ok(DenseEig { values, vectors })
}
