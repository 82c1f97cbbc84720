//! Seeded power iteration for the top eigenvalue of a Hermitian
//! positive-semidefinite operator given only as a matvec.
//!
//! Callers wanting the operator norm of a general map `T` pass the Gram
//! operator `T*T` and take the square root of the result.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a power-iteration run produced.
#[derive(Debug, Clone, Copy)]
pub struct PowerOutcome {
    /// Final Rayleigh-quotient estimate of the top eigenvalue.
    pub norm: f64,
    /// Number of matvec rounds performed.
    pub iters: usize,
    /// Whether the estimate stabilized (three consecutive relative changes
    /// below `tol`) before the iteration cap.
    pub converged: bool,
}

/// Power iteration on a Hermitian PSD operator `apply` of dimension `dim`.
///
/// Deterministic for a fixed `seed`. An exactly annihilated start vector is
/// reported as norm `0` (the estimate a PSD operator with trivial range
/// deserves, and the only way `‖y‖ = 0` arises for a random start).
pub fn power_iteration_norm(
    dim: usize,
    tol: f64,
    iter_cap: usize,
    seed: u64,
    mut apply: impl FnMut(&[Complex64], &mut [Complex64]),
) -> PowerOutcome {
    if dim == 0 {
        return PowerOutcome { norm: 0.0, iters: 0, converged: true };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    normalize(&mut x);
    let mut y = vec![Complex64::ZERO; dim];

    let mut lambda_prev = f64::NAN;
    let mut stable = 0usize;
    let mut iters = 0usize;
    while iters < iter_cap {
        iters += 1;
        apply(&x, &mut y);
        let lambda: f64 = x.iter().zip(&y).map(|(xi, yi)| (xi.conj() * yi).re).sum();
        let ny = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if ny == 0.0 {
            return PowerOutcome { norm: 0.0, iters, converged: true };
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
        if (lambda - lambda_prev).abs() <= tol * lambda.abs().max(f64::MIN_POSITIVE) {
            stable += 1;
            if stable >= 3 {
                return PowerOutcome { norm: lambda, iters, converged: true };
            }
        } else {
            stable = 0;
        }
        lambda_prev = lambda;
    }
    PowerOutcome { norm: lambda_prev, iters, converged: false }
}

fn normalize(x: &mut [Complex64]) {
    let nrm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if nrm > 0.0 {
        for v in x.iter_mut() {
            *v /= nrm;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::hermitian_dense_eig;
    use crate::linalg::DEFAULT_SEED;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_three() {
        let d = [1.0, 2.0, 3.0];
        let out = power_iteration_norm(3, 1e-6, 500, DEFAULT_SEED, |x, y| {
            for i in 0..3 {
                y[i] = d[i] * x[i];
            }
        });
        assert!(out.converged);
        assert!((out.norm - 3.0).abs() < 1e-5, "norm {} off", out.norm);
    }

    #[test]
    fn zero_operator() {
        let out = power_iteration_norm(8, 1e-6, 500, DEFAULT_SEED, |_, y| {
            y.fill(Complex64::ZERO);
        });
        assert!(out.converged);
        assert_eq!(out.norm, 0.0);
    }

    #[test]
    fn empty_dimension() {
        let out = power_iteration_norm(0, 1e-6, 500, DEFAULT_SEED, |_, _| {});
        assert!(out.converged);
        assert_eq!(out.norm, 0.0);
        assert_eq!(out.iters, 0);
    }

    #[test]
    fn matches_dense_top_eigenvalue_on_gram_operator() {
        let n = 48;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut m = vec![vec![Complex64::ZERO; n]; n];
        for i in 0..n {
            for j in 0..n {
                m[i][j] = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
        }
        // Gram operator G = M* M is Hermitian PSD.
        let gram = {
            let m = m.clone();
            move |x: &[Complex64], y: &mut [Complex64]| {
                let mut t = vec![Complex64::ZERO; n];
                for i in 0..n {
                    t[i] = (0..n).map(|j| m[i][j] * x[j]).sum();
                }
                for i in 0..n {
                    y[i] = (0..n).map(|j| m[j][i].conj() * t[j]).sum();
                }
            }
        };
        let out = power_iteration_norm(n, 1e-8, 2000, DEFAULT_SEED, gram);
        assert!(out.converged, "power iteration did not settle in {} iters", out.iters);

        let mut g = vec![vec![Complex64::ZERO; n]; n];
        for i in 0..n {
            for j in 0..n {
                g[i][j] = (0..n).map(|r| m[r][i].conj() * m[r][j]).sum();
            }
        }
        let dense = hermitian_dense_eig(&g, false).unwrap();
        let top = dense.values[n - 1];
        assert!(
            (out.norm - top).abs() < 1e-6 * top,
            "power {} vs dense {top}",
            out.norm
        );
    }
}
