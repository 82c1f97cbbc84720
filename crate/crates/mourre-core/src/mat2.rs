//! Minimal 2×2 complex matrix arithmetic.
//!
//! Matrix-valued sequences take values in `M₂(ℂ)`; everything the crate needs
//! from them (products, adjoints, spectral norms) has a closed form at this
//! size, so no general linear algebra is involved.

use num_complex::Complex64;

/// A 2×2 complex matrix in row-major layout: `m[i][j]` is row `i`, column `j`.
pub type Mat2 = [[Complex64; 2]; 2];

pub const ZERO2: Mat2 = [[Complex64::ZERO; 2]; 2];

#[must_use]
pub fn identity() -> Mat2 {
    [[Complex64::ONE, Complex64::ZERO], [Complex64::ZERO, Complex64::ONE]]
}

#[must_use]
pub fn diag(a: Complex64, d: Complex64) -> Mat2 {
    [[a, Complex64::ZERO], [Complex64::ZERO, d]]
}

#[must_use]
pub fn scale(m: &Mat2, c: Complex64) -> Mat2 {
    [[m[0][0] * c, m[0][1] * c], [m[1][0] * c, m[1][1] * c]]
}

#[must_use]
pub fn add(x: &Mat2, y: &Mat2) -> Mat2 {
    [
        [x[0][0] + y[0][0], x[0][1] + y[0][1]],
        [x[1][0] + y[1][0], x[1][1] + y[1][1]],
    ]
}

#[must_use]
pub fn sub(x: &Mat2, y: &Mat2) -> Mat2 {
    [
        [x[0][0] - y[0][0], x[0][1] - y[0][1]],
        [x[1][0] - y[1][0], x[1][1] - y[1][1]],
    ]
}

#[must_use]
pub fn mul(x: &Mat2, y: &Mat2) -> Mat2 {
    let mut out = ZERO2;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

/// Conjugate transpose.
#[must_use]
pub fn adjoint(m: &Mat2) -> Mat2 {
    [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]]
}

/// Largest singular value (the operator norm on `ℂ²`).
///
/// Computed from the closed-form eigenvalues of the 2×2 positive matrix
/// `M*M`: for `[[p, q], [q̄, r]]` they are `((p+r) ± √((p−r)² + 4|q|²))/2`.
#[must_use]
pub fn spectral_norm(m: &Mat2) -> f64 {
    let p = m[0][0].norm_sqr() + m[1][0].norm_sqr();
    let r = m[0][1].norm_sqr() + m[1][1].norm_sqr();
    let q = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];
    let disc = ((p - r) * (p - r) + 4.0 * q.norm_sqr()).max(0.0).sqrt();
    (0.5 * (p + r + disc)).max(0.0).sqrt()
}

/// Largest absolute deviation from Hermitian symmetry.
#[must_use]
pub fn hermitian_defect(m: &Mat2) -> f64 {
    let d = sub(m, &adjoint(m));
    d.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry magnitude.
#[must_use]
pub fn max_entry(m: &Mat2) -> f64 {
    m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
}
