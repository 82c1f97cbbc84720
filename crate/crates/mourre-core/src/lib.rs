//! Numerical toolkit for a family of first-order block difference operators
//! on `ℓ²(𝔾; ℂ²)` with `𝔾 ∈ {ℤ, ℤ₊}`.
//!
//! The free operator is
//!
//! ```text
//!         ⎛    α      ā + b̄ S* ⎞
//!   H₀ =  ⎜                    ⎟ ,     (S u)(n) = u(n − 1),
//!         ⎝ a + b S      −α    ⎠
//! ```
//!
//! with `α ∈ ℝ` and `a, b ∈ ℂ \ {0}`. Its spectrum consists of two bands
//! `±[λ_min, λ_max]` which touch at `0` exactly when `α = 0` and `|a| = |b|`
//! (the gapless case). The crate provides:
//!
//! * [`model`] — band structure, the polynomials `g_k`, critical sets `κ_k`,
//!   and strict-positivity intervals `μ±` of the commutator symbol;
//! * [`band`] / [`lattice`] — banded Hermitian matrices on finite windows,
//!   builders for `H₀`, potentials, and the conjugate operators `A_k`, plus
//!   exact finite-volume commutator identities;
//! * [`classes`] — finite-horizon classifiers for the perturbation classes
//!   (weighted seminorms, annulus integrals, iterated-log rates, and the
//!   alternating tent counterexample);
//! * [`probe`] — eigenvalue extraction with truncation-artifact control,
//!   edge-state detection, and weighted resolvent-norm (LAP) sweeps;
//! * [`linalg`] — the self-contained numeric backbone (dense Hermitian
//!   eigensolver, banded LU, power iteration).
//!
//! Everything is deterministic: all randomized starts are seeded.

pub mod band;
pub mod classes;
pub mod lattice;
pub mod linalg;
pub mod mat2;
pub mod model;
pub mod probe;
pub mod seq;

/// Formats a float with 17 significant digits, enough to round-trip `f64`.
#[must_use]
pub fn f17(x: f64) -> String {
    format!("{x:.16e}")
}
