//! Real symmetric tridiagonal kernel: implicit-shift QL for eigenvalues (with
//! an optional rotation sink for eigenvector accumulation) and inverse
//! iteration for selected eigenvectors.

use super::LinalgError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAX_QL_SWEEPS: usize = 60;

/// Implicit-shift QL on a symmetric tridiagonal matrix.
///
/// `d` (length `n`) holds the diagonal and is overwritten with eigenvalues in
/// no particular order; `e` (length `n`, last entry ignored and zeroed) holds
/// the subdiagonal couplings `e[i] = T[i+1, i]`. Every plane rotation is
/// reported through `rot(i, c, s)`, meaning columns `i, i+1` of an
/// accumulation target `Z` transform as
/// `(z_i, z_{i+1}) ← (c·z_i − s·z_{i+1}, s·z_i + c·z_{i+1})`.
pub fn ql_implicit(
    d: &mut [f64],
    e: &mut [f64],
    mut rot: impl FnMut(usize, f64, f64),
) -> Result<(), LinalgError> {
    let n = d.len();
    assert_eq!(e.len(), n, "subdiagonal buffer must have the same length as d");
    if n <= 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_SWEEPS {
                return Err(LinalgError::ConvergenceFailure { index: l, iters: iter });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                rot(i, c, s);
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// subdiagonal `e` (length `n − 1`), sorted ascending.
pub fn ql_eigenvalues(d: &[f64], e: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = d.len();
    assert!(n == 0 || e.len() == n - 1, "subdiagonal must have length n - 1");
    let mut dd = d.to_vec();
    let mut ee = vec![0.0; n];
    ee[..n.saturating_sub(1)].copy_from_slice(e);
    ql_implicit(&mut dd, &mut ee, |_, _, _| {})?;
    dd.sort_by(f64::total_cmp);
    Ok(dd)
}

/// `y = T x` for the tridiagonal matrix `(d, e)`.
pub fn tri_matvec(d: &[f64], e: &[f64], x: &[f64], y: &mut [f64]) {
    let n = d.len();
    for i in 0..n {
        let mut acc = d[i] * x[i];
        if i > 0 {
            acc += e[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            acc += e[i] * x[i + 1];
        }
        y[i] = acc;
    }
}

/// LU factorization of `T − σ` with partial pivoting (fill bandwidth 2),
/// with tiny pivots floored so the factorization never fails — exactly what
/// inverse iteration wants near an eigenvalue.
struct TriShiftSolver {
    n: usize,
    du: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl TriShiftSolver {
    fn factor(d: &[f64], e: &[f64], sigma: f64, pivot_floor: f64) -> Self {
        let n = d.len();
        let mut du = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        if n == 0 {
            return Self { n, du, u1, u2, mult, swapped };
        }
        let floor = |x: f64| {
            if x.abs() < pivot_floor {
                pivot_floor.copysign(if x == 0.0 { 1.0 } else { x })
            } else {
                x
            }
        };
        // Running row for column i: entries at columns (i, i+1, i+2).
        let mut cd = d[0] - sigma;
        let mut cu1 = if n > 1 { e[0] } else { 0.0 };
        let mut cu2 = 0.0;
        for i in 0..n - 1 {
            let sub = e[i];
            let nd = d[i + 1] - sigma;
            let ne = if i + 1 < n - 1 { e[i + 1] } else { 0.0 };
            if sub.abs() > cd.abs() {
                swapped[i] = true;
                du[i] = sub;
                u1[i] = nd;
                u2[i] = ne;
                let m = cd / sub;
                mult[i] = m;
                cd = cu1 - m * nd;
                cu1 = cu2 - m * ne;
            } else {
                du[i] = floor(cd);
                u1[i] = cu1;
                u2[i] = cu2;
                let m = sub / du[i];
                mult[i] = m;
                cd = nd - m * cu1;
                cu1 = ne - m * cu2;
            }
            cu2 = 0.0;
        }
        du[n - 1] = floor(cd);
        Self { n, du, u1, u2, mult, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        if n == 0 {
            return;
        }
        for i in 0..n - 1 {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.mult[i] * b[i];
        }
        b[n - 1] /= self.du[n - 1];
        for i in (0..n - 1).rev() {
            let mut acc = b[i] - self.u1[i] * b[i + 1];
            if i + 2 < n {
                acc -= self.u2[i] * b[i + 2];
            }
            b[i] = acc / self.du[i];
        }
    }
}

/// Eigenvectors for the given (pre-computed) eigenvalues of `(d, e)`.
pub struct WindowedVectors {
    /// Eigenvalues the vectors belong to, in input order.
    pub lambdas: Vec<f64>,
    /// Unit-norm real eigenvectors, one per lambda.
    pub vectors: Vec<Vec<f64>>,
    /// Largest `‖T v − λ v‖` over the returned pairs.
    pub max_residual: f64,
}

/// Inverse iteration for selected eigenvalues of a symmetric tridiagonal
/// matrix. `lambdas` must be sorted ascending (eigenvalues from
/// [`ql_eigenvalues`] are). Nearby eigenvalues are treated as a cluster and
/// their vectors re-orthogonalized, so degenerate pairs come out orthonormal.
pub fn inverse_iteration(
    d: &[f64],
    e: &[f64],
    lambdas: &[f64],
    seed: u64,
) -> Result<WindowedVectors, LinalgError> {
    let n = d.len();
    let scale = d
        .iter()
        .map(|x| x.abs())
        .fold(0.0f64, f64::max)
        .max(2.0 * e.iter().map(|x| x.abs()).fold(0.0f64, f64::max))
        .max(1.0);
    let resid_tol = 1e-10 * scale;
    let cluster_tol = 1e-8 * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(lambdas.len());
    let mut max_residual: f64 = 0.0;
    let mut cluster_start = 0usize;

    for (idx, &lambda) in lambdas.iter().enumerate() {
        if idx > 0 && (lambda - lambdas[idx - 1]).abs() > cluster_tol {
            cluster_start = idx;
        }
        let mut best: Option<(Vec<f64>, f64)> = None;
        for attempt in 0..4 {
            // A slight shift off the exact eigenvalue keeps the solve finite
            // while still amplifying the wanted direction.
            let sigma = lambda + scale * 1e-12 * attempt as f64;
            let solver = TriShiftSolver::factor(d, e, sigma, f64::EPSILON * scale * n as f64);
            let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            normalize(&mut x);
            for _ in 0..3 {
                solver.solve(&mut x);
                for prev in &vectors[cluster_start..idx] {
                    let dot: f64 = prev.iter().zip(&x).map(|(p, q)| p * q).sum();
                    for (xi, pi) in x.iter_mut().zip(prev) {
                        *xi -= dot * pi;
                    }
                }
                let nrm = normalize(&mut x);
                if nrm == 0.0 {
                    break;
                }
            }
            let mut tx = vec![0.0; n];
            tri_matvec(d, e, &x, &mut tx);
            let residual = tx
                .iter()
                .zip(&x)
                .map(|(t, xi)| (t - lambda * xi) * (t - lambda * xi))
                .sum::<f64>()
                .sqrt();
            if best.as_ref().is_none_or(|(_, r)| residual < *r) {
                best = Some((x, residual));
            }
            if residual <= resid_tol {
                break;
            }
        }
        let (x, residual) = best.expect("at least one attempt ran");
        if residual > resid_tol {
            return Err(LinalgError::BadResidual { lambda, residual, tol: resid_tol });
        }
        max_residual = max_residual.max(residual);
        vectors.push(x);
    }
    Ok(WindowedVectors { lambdas: lambdas.to_vec(), vectors, max_residual })
}

fn normalize(x: &mut [f64]) -> f64 {
    let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nrm > 0.0 {
        for v in x.iter_mut() {
            *v /= nrm;
        }
    }
    nrm
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Free Laplacian-style chain: eigenvalues 2cos(kπ/(n+1)).
    fn laplacian_eigs(n: usize) -> Vec<f64> {
        let mut v: Vec<f64> =
            (1..=n).map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn ql_matches_laplacian_closed_form() {
        for n in [1, 2, 5, 16, 101] {
            let d = vec![0.0; n];
            let e = vec![1.0; n - 1];
            let got = ql_eigenvalues(&d, &e).unwrap();
            let want = laplacian_eigs(n);
            for (g, w) in got.iter().zip(&want) {
                assert_relative_eq!(g, w, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn ql_handles_diagonal_input() {
        let d = vec![3.0, -1.0, 2.0];
        let e = vec![0.0, 0.0];
        let got = ql_eigenvalues(&d, &e).unwrap();
        assert_eq!(got, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn inverse_iteration_reproduces_eigenpairs() {
        let n = 64;
        let d: Vec<f64> = (0..n).map(|i| ((i * 37) % 11) as f64 * 0.3 - 1.0).collect();
        let e: Vec<f64> = (0..n - 1).map(|i| 0.5 + 0.1 * ((i % 7) as f64)).collect();
        let all = ql_eigenvalues(&d, &e).unwrap();
        let window: Vec<f64> = all.iter().copied().filter(|x| x.abs() < 1.0).collect();
        assert!(window.len() > 4, "test window should contain several eigenvalues");
        let out = inverse_iteration(&d, &e, &window, 1).unwrap();
        assert!(out.max_residual < 1e-10 * 4.0);
        // Orthogonality across the batch.
        for i in 0..out.vectors.len() {
            for j in 0..i {
                let dot: f64 =
                    out.vectors[i].iter().zip(&out.vectors[j]).map(|(a, b)| a * b).sum();
                assert!(dot.abs() < 1e-8, "vectors {i},{j} not orthogonal: {dot:.2e}");
            }
        }
    }

    #[test]
    fn inverse_iteration_handles_degenerate_pair() {
        // Two decoupled 2-chains give doubly degenerate ±1.
        let d = vec![0.0, 0.0, 0.0, 0.0];
        let e = vec![1.0, 0.0, 1.0];
        let lambdas = vec![-1.0, -1.0, 1.0, 1.0];
        let out = inverse_iteration(&d, &e, &lambdas, 7).unwrap();
        assert!(out.max_residual < 1e-12);
        let dot: f64 = out.vectors[0].iter().zip(&out.vectors[1]).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-10);
    }
}
