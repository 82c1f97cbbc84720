//! Truncated lattice operators and the exact commutator identities tying
//! them together.
//!
//! The free Hamiltonian couples the two components on a site and the
//! components of neighbouring sites; conjugate operators are weighted shifts
//! built from the position operator. All commutators here are the Hermitian
//! combination `i(AB − BA)`, and — because diagonal perturbations commute
//! with the window projection — the block formulas they satisfy hold
//! *exactly* on the stored entries, not merely up to boundary terms. The
//! checks in this module exploit that: they compare a numerically computed
//! commutator against an independently evaluated closed form entry by entry.

use crate::band::{BandedHermitian, LatticeWindow, WindowKind};
use crate::linalg::dense::hermitian_dense_eig;
use crate::linalg::{tri, LinalgError};
use crate::mat2::{self, Mat2};
use crate::model::{self, ModelError, ModelParams};
use crate::seq::MatrixSequence;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

/// Per-site hermiticity tolerance for supplied potentials.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("window with {got} sites is too small; need at least {needed}")]
    WindowTooSmall { needed: usize, got: usize },
    #[error("order k = 0 has no shift-type generator; use the gapless generator instead")]
    OrderZero,
    #[error("potential is not Hermitian at site {site}: defect {defect:.3e}")]
    NotHermitian { site: i64, defect: f64 },
    #[error("operators live on different windows")]
    WindowMismatch,
    #[error("margin {margin} swallows the whole window of {sites} sites")]
    MarginTooLarge { margin: usize, sites: usize },
    #[error("no eigenvalue of the truncated operator lies in [{lo}, {hi}]")]
    EmptyProjector { lo: f64, hi: f64 },
    #[error("operator does not reduce to a scalar chain: it needs a real diagonal and couplings within a site or between neighbouring sites only")]
    NotUnfoldable,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The free block Hamiltonian on a window: `±alpha` on the component
/// diagonal, `a` within a site, `b` between neighbouring sites.
#[must_use]
pub fn build_h0(p: &ModelParams, window: LatticeWindow) -> BandedHermitian {
    let alpha = p.alpha();
    let ca = p.a().conj();
    let cb = p.b().conj();
    BandedHermitian::from_upper_fn(window, 3, |i, j| match (j - i, i % 2) {
        (0, 0) => Complex64::new(alpha, 0.0),
        (0, 1) => Complex64::new(-alpha, 0.0),
        (1, 0) => ca,
        (3, 0) => cb,
        _ => Complex64::ZERO,
    })
}

fn site_block_checked(seq: &MatrixSequence, n: i64) -> Result<Mat2, LatticeError> {
    let m = seq.eval(n);
    let defect = mat2::hermitian_defect(&m);
    if defect > HERMITIAN_TOL {
        return Err(LatticeError::NotHermitian { site: n, defect });
    }
    Ok(m)
}

/// The diagonal (site-local) operator of a matrix sequence on a window.
pub fn build_potential(
    seq: &MatrixSequence,
    window: LatticeWindow,
) -> Result<BandedHermitian, LatticeError> {
    let mut v = BandedHermitian::new_zero(window, 1);
    for (m, n) in window.sites().enumerate() {
        let blk = site_block_checked(seq, n)?;
        v.set_upper(2 * m, 2 * m, Complex64::new(blk[0][0].re, 0.0));
        v.set_upper(2 * m + 1, 2 * m + 1, Complex64::new(blk[1][1].re, 0.0));
        v.set_upper(2 * m, 2 * m + 1, blk[0][1]);
    }
    Ok(v)
}

/// `H₀ + V` in one pass.
pub fn build_hamiltonian(
    p: &ModelParams,
    potential: Option<&MatrixSequence>,
    window: LatticeWindow,
) -> Result<BandedHermitian, LatticeError> {
    let mut h = build_h0(p, window);
    if let Some(seq) = potential {
        for (m, n) in window.sites().enumerate() {
            let blk = site_block_checked(seq, n)?;
            h.add_upper(2 * m, 2 * m, Complex64::new(blk[0][0].re, 0.0));
            h.add_upper(2 * m + 1, 2 * m + 1, Complex64::new(blk[1][1].re, 0.0));
            h.add_upper(2 * m, 2 * m + 1, blk[0][1]);
        }
    }
    Ok(h)
}

/// The order-`k` conjugate operator (`k ≥ 1`): a `k`-site shift weighted by
/// the symmetrized position, acting identically on both components.
pub fn build_ak(
    p: &ModelParams,
    k: usize,
    window: LatticeWindow,
) -> Result<BandedHermitian, LatticeError> {
    if k == 0 {
        return Err(LatticeError::OrderZero);
    }
    let sites = window.site_count();
    if sites < 2 * k + 1 {
        return Err(LatticeError::WindowTooSmall { needed: 2 * k + 1, got: sites });
    }
    let mut a = BandedHermitian::new_zero(window, 2 * k + 1);
    let phase = Complex64::from_polar(1.0, -(k as f64) * p.phi());
    let scale = Complex64::new(0.0, -p.ab_product() / 4.0) * phase;
    let lo = window.site_lo();
    for n in lo..=(window.site_hi() - k as i64) {
        let weight = (2 * n + k as i64) as f64;
        let v = scale * weight;
        let m = (n - lo) as usize;
        a.set_upper(2 * m, 2 * (m + k), v);
        a.set_upper(2 * m + 1, 2 * (m + k) + 1, v);
    }
    Ok(a)
}

/// The gapless conjugate operator. Its off-diagonal block is the symmetrized
/// position weighting `−i(GN + NG)` of the *difference* coupling
/// `G = a − bS`, so it occupies the same band profile as the Hamiltonian.
/// Requires a gapless model (`alpha = 0`, `|a| = |b|`) and at least three
/// sites.
pub fn build_a0(p: &ModelParams, window: LatticeWindow) -> Result<BandedHermitian, LatticeError> {
    if !p.is_gapless() {
        return Err(ModelError::NotGapless {
            alpha: p.alpha(),
            imbalance: p.abs_a() - p.abs_b(),
        }
        .into());
    }
    let sites = window.site_count();
    if sites < 3 {
        return Err(LatticeError::WindowTooSmall { needed: 3, got: sites });
    }
    let ca = p.a().conj();
    let cb = p.b().conj();
    let mut a = BandedHermitian::new_zero(window, 3);
    let lo = window.site_lo();
    for n in window.sites() {
        let m = (n - lo) as usize;
        // Within the site: 2i n conj(a) on the upper-right component pair.
        a.set_upper(2 * m, 2 * m + 1, Complex64::i() * 2.0 * n as f64 * ca);
        if n < window.site_hi() {
            // Upper component of site n to lower of site n+1: −i(2n+1) conj(b).
            a.set_upper(2 * m, 2 * m + 3, -Complex64::i() * (2 * n + 1) as f64 * cb);
        }
    }
    Ok(a)
}

/// Hermitian commutator `i(AH − HA)` of two banded operators on the same
/// window. The diagonal is assembled as `−2·Im Σ A[i,r] H[r,i]`, which is
/// exactly real.
pub fn commutator_i(
    a: &BandedHermitian,
    h: &BandedHermitian,
) -> Result<BandedHermitian, LatticeError> {
    if a.window() != h.window() {
        return Err(LatticeError::WindowMismatch);
    }
    let dim = a.dim();
    let reach = a.half_bandwidth().max(h.half_bandwidth());
    let hb = (a.half_bandwidth() + h.half_bandwidth()).min(dim.saturating_sub(1));
    let mut c = BandedHermitian::new_zero(a.window(), hb);
    for i in 0..dim {
        let rlo = i.saturating_sub(reach);
        let rhi = (i + reach).min(dim - 1);
        let mut s = Complex64::ZERO;
        for r in rlo..=rhi {
            s += a.get(i, r) * h.get(r, i);
        }
        c.set_upper(i, i, Complex64::new(-2.0 * s.im, 0.0));
        for j in i + 1..=(i + hb).min(dim - 1) {
            let rhi = (j + reach).min(dim - 1);
            let mut s1 = Complex64::ZERO;
            let mut s2 = Complex64::ZERO;
            for r in rlo..=rhi {
                s1 += a.get(i, r) * h.get(r, j);
                s2 += h.get(i, r) * a.get(r, j);
            }
            c.set_upper(i, j, Complex64::i() * (s1 - s2));
        }
    }
    Ok(c)
}

/// The same operator on the window with `margin` sites dropped from each end.
pub fn interior_restrict(
    op: &BandedHermitian,
    margin: usize,
) -> Result<BandedHermitian, LatticeError> {
    let w = op.window();
    let sites = w.site_count();
    if 2 * margin >= sites {
        return Err(LatticeError::MarginTooLarge { margin, sites });
    }
    let sub = LatticeWindow::span(w.kind, w.site_lo() + margin as i64, w.site_hi() - margin as i64);
    let off = 2 * margin;
    Ok(BandedHermitian::from_upper_fn(sub, op.half_bandwidth(), |i, j| {
        op.get(i + off, j + off)
    }))
}

fn band_square(h: &BandedHermitian) -> BandedHermitian {
    let hbh = h.half_bandwidth();
    let dim = h.dim();
    BandedHermitian::from_upper_fn(h.window(), 2 * hbh, |i, j| {
        let rlo = j.saturating_sub(hbh);
        let rhi = (i + hbh).min(dim - 1);
        let mut s = Complex64::ZERO;
        for r in rlo..=rhi {
            s += h.get(i, r) * h.get(r, j);
        }
        s
    })
}

/// Outcome of the gapless commutator identity check
/// `i[A₀, H₀] = 4|a|² − H₀²`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct IdentityReport {
    /// Margin (in sites) trimmed from each window end for the interior part.
    pub margin: usize,
    /// Largest entry deviation over the interior — rounding-level when the
    /// identity holds.
    pub interior_defect: f64,
    /// Largest deviation anywhere, boundary included. Stays `O(|a|² N)` near
    /// the window ends: truncation (and, on the half-lattice, the genuine
    /// finite-rank boundary correction) lives there.
    pub full_defect: f64,
}

pub fn check_a0_identity(
    p: &ModelParams,
    window: LatticeWindow,
    margin: usize,
) -> Result<IdentityReport, LatticeError> {
    let sites = window.site_count();
    if 2 * margin >= sites {
        return Err(LatticeError::MarginTooLarge { margin, sites });
    }
    let h0 = build_h0(p, window);
    let a0 = build_a0(p, window)?;
    let c = commutator_i(&a0, &h0)?;
    let h2 = band_square(&h0);
    let cst = 4.0 * p.ab_product();
    let hb = c.half_bandwidth().max(h2.half_bandwidth());
    let dim = window.dim();
    let lo_in = window.site_lo() + margin as i64;
    let hi_in = window.site_hi() - margin as i64;
    let mut full: f64 = 0.0;
    let mut interior: f64 = 0.0;
    for i in 0..dim {
        for j in i..=(i + hb).min(dim - 1) {
            let want = if i == j {
                Complex64::new(cst, 0.0) - h2.get(i, i)
            } else {
                -h2.get(i, j)
            };
            let d = (c.get(i, j) - want).norm();
            full = full.max(d);
            let si = window.site_of_flat(i);
            let sj = window.site_of_flat(j);
            if si >= lo_in && sj <= hi_in {
                interior = interior.max(d);
            }
        }
    }
    Ok(IdentityReport { margin, interior_defect: interior, full_defect: full })
}

/// Largest entry deviation between `i[A_k, V]` computed numerically and its
/// closed form — a position-weighted `k`-site difference of the potential.
/// Exact (up to rounding) on every stored entry for both window kinds.
pub fn check_ak_first_commutator(
    p: &ModelParams,
    k: usize,
    seq: &MatrixSequence,
    window: LatticeWindow,
) -> Result<f64, LatticeError> {
    if k == 0 {
        return Err(LatticeError::OrderZero);
    }
    let a = build_ak(p, k, window)?;
    let v = build_potential(seq, window)?;
    let c = commutator_i(&a, &v)?;
    let coef = p.ab_product() / 4.0;
    let phase = Complex64::from_polar(1.0, -(k as f64) * p.phi());
    let dim = window.dim();
    let hb = c.half_bandwidth().max(2 * k + 1);
    let mut defect: f64 = 0.0;
    for i in 0..dim {
        let si = window.site_of_flat(i);
        let ci = i % 2;
        for j in i..=(i + hb).min(dim - 1) {
            let sj = window.site_of_flat(j);
            let cj = j % 2;
            let want = if sj - si == k as i64 {
                let blk = mat2::sub(&seq.eval(sj), &seq.eval(si));
                let weight = (2 * si + k as i64) as f64;
                coef * weight * phase * blk[ci][cj]
            } else {
                Complex64::ZERO
            };
            defect = defect.max((c.get(i, j) - want).norm());
        }
    }
    Ok(defect)
}

/// Largest entry deviation between `i[A₀, V]` and its closed form: a
/// position-weighted band matrix assembled from component mixes of `V` and
/// its one-site shift. Exact (up to rounding) on every stored entry.
pub fn check_a0_commutator(
    p: &ModelParams,
    seq: &MatrixSequence,
    window: LatticeWindow,
) -> Result<f64, LatticeError> {
    let a0 = build_a0(p, window)?;
    let v = build_potential(seq, window)?;
    let c = commutator_i(&a0, &v)?;
    let av = p.a();
    let avc = av.conj();
    let bvc = p.b().conj();

    // On-site mixing block (Hermitian for Hermitian input).
    let b_onsite = |n: i64| -> Mat2 {
        let w = seq.eval(n);
        let s = avc * w[1][0] + av * w[0][1];
        let t = w[1][1] - w[0][0];
        [[s, avc * t], [av * t, -s]]
    };
    // Block coupling site n to site n+1.
    let b_right = |n: i64| -> Mat2 {
        let w = seq.eval(n);
        let w1 = seq.eval(n + 1);
        [
            [w1[1][0], w1[1][1] - w[0][0]],
            [Complex64::ZERO, -w[1][0]],
        ]
    };

    let dim = window.dim();
    let hb = c.half_bandwidth().max(3);
    let mut defect: f64 = 0.0;
    for i in 0..dim {
        let si = window.site_of_flat(i);
        let ci = i % 2;
        for j in i..=(i + hb).min(dim - 1) {
            let sj = window.site_of_flat(j);
            let cj = j % 2;
            let want = if si == sj {
                -2.0 * si as f64 * b_onsite(si)[ci][cj]
            } else if sj - si == 1 {
                (2 * si + 1) as f64 * bvc * b_right(si)[ci][cj]
            } else {
                Complex64::ZERO
            };
            defect = defect.max((c.get(i, j) - want).norm());
        }
    }
    Ok(defect)
}

/// A window operator rewritten as a real symmetric chain, plus the gauge
/// needed to map chain eigenvectors back to the flattened lattice.
pub struct UnfoldedChain {
    /// Chain diagonal (length `dim`).
    pub diag: Vec<f64>,
    /// Nonnegative chain couplings (length `dim − 1`).
    pub offdiag: Vec<f64>,
    /// Unit phases of the gauge transform.
    pub phases: Vec<Complex64>,
    /// `perm[s]` is the flattened index of chain position `s`.
    pub perm: Vec<usize>,
}

impl UnfoldedChain {
    /// Lift a chain vector back to the flattened lattice.
    #[must_use]
    pub fn lift(&self, x: &[f64]) -> Vec<Complex64> {
        let mut v = vec![Complex64::ZERO; x.len()];
        for (s, &xs) in x.iter().enumerate() {
            v[self.perm[s]] = self.phases[s] * xs;
        }
        v
    }
}

/// Attempt to rewrite a window operator as a scalar chain.
///
/// This succeeds exactly when the diagonal is real and the only couplings
/// are within a site or from the upper component of one site to the lower
/// component of the next — which covers the free Hamiltonian plus any
/// site-local potential. The two components then thread into a single path,
/// and a diagonal gauge makes the couplings nonnegative.
#[must_use]
pub fn try_unfold_tridiagonal(h: &BandedHermitian) -> Option<UnfoldedChain> {
    let dim = h.dim();
    for i in 0..dim {
        if h.get(i, i).im != 0.0 {
            return None;
        }
        for d in 1..=h.half_bandwidth() {
            let j = i + d;
            if j >= dim {
                break;
            }
            let allowed = (d == 1 || d == 3) && i % 2 == 0;
            if !allowed && h.get(i, j) != Complex64::ZERO {
                return None;
            }
        }
    }
    let perm: Vec<usize> = (0..dim).map(|s| s ^ 1).collect();
    let diag: Vec<f64> = perm.iter().map(|&f| h.get(f, f).re).collect();
    let mut offdiag = Vec::with_capacity(dim.saturating_sub(1));
    let mut phases = vec![Complex64::ONE; dim];
    for s in 0..dim.saturating_sub(1) {
        // Coupling between chain positions s and s+1 in the flattened picture.
        let coupling = if s % 2 == 0 {
            h.get(s + 1, s) // within-site pair, lower row
        } else {
            h.get(s - 1, s + 2) // upper of site m to lower of site m+1
        };
        let mag = coupling.norm();
        offdiag.push(mag);
        phases[s + 1] = if mag > 0.0 { phases[s] * (coupling.conj() / mag) } else { phases[s] };
    }
    Some(UnfoldedChain { diag, offdiag, phases, perm })
}

/// The scalar chain of an unfoldable operator together with the largest
/// reconstruction error (exactly zero for real couplings).
#[derive(Debug, Clone, serde::Serialize)]
pub struct SshChain {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub residual: f64,
}

pub fn ssh_unfold(h: &BandedHermitian) -> Result<SshChain, LatticeError> {
    let chain = try_unfold_tridiagonal(h).ok_or(LatticeError::NotUnfoldable)?;
    let mut residual: f64 = 0.0;
    for s in 0..chain.diag.len() {
        let f = chain.perm[s];
        residual = residual.max((h.get(f, f) - chain.diag[s]).norm());
    }
    for s in 0..chain.offdiag.len() {
        let original = if s % 2 == 0 { h.get(s + 1, s) } else { h.get(s - 1, s + 2) };
        let refolded = chain.offdiag[s] * chain.phases[s] * chain.phases[s + 1].conj();
        residual = residual.max((original - refolded).norm());
    }
    Ok(SshChain { diag: chain.diag, offdiag: chain.offdiag, residual })
}

/// All eigenvalues of a window operator, sorted ascending. Uses the chain
/// reduction when available, the dense solver otherwise.
pub fn spectrum(h: &BandedHermitian) -> Result<Vec<f64>, LatticeError> {
    if let Some(chain) = try_unfold_tridiagonal(h) {
        Ok(tri::ql_eigenvalues(&chain.diag, &chain.offdiag)?)
    } else {
        Ok(hermitian_dense_eig(&h.to_dense(), false)?.values)
    }
}

/// Eigenpairs with eigenvalue in `[lo, hi]`, as flattened complex vectors.
pub fn eigenpairs_in_window(
    h: &BandedHermitian,
    lo: f64,
    hi: f64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<Vec<Complex64>>), LatticeError> {
    if let Some(chain) = try_unfold_tridiagonal(h) {
        let all = tri::ql_eigenvalues(&chain.diag, &chain.offdiag)?;
        let selected: Vec<f64> = all.into_iter().filter(|t| *t >= lo && *t <= hi).collect();
        if selected.is_empty() {
            return Err(LatticeError::EmptyProjector { lo, hi });
        }
        let wv = tri::inverse_iteration(&chain.diag, &chain.offdiag, &selected, seed)?;
        let vectors = wv.vectors.iter().map(|x| chain.lift(x)).collect();
        Ok((selected, vectors))
    } else {
        let eig = hermitian_dense_eig(&h.to_dense(), true)?;
        let mut lambdas = Vec::new();
        let mut vectors = Vec::new();
        for (t, v) in eig.values.into_iter().zip(eig.vectors) {
            if t >= lo && t <= hi {
                lambdas.push(t);
                vectors.push(v);
            }
        }
        if lambdas.is_empty() {
            return Err(LatticeError::EmptyProjector { lo, hi });
        }
        Ok((lambdas, vectors))
    }
}

/// Result of projecting a commutator to a spectral window of `H`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ProjectedCommutator {
    /// Smallest eigenvalue of `E i[A, H] E`, `E` the eigenprojection onto
    /// `[lo, hi]`.
    pub min_eig: f64,
    /// Infimum of the symbol-level commutator density over `[lo, hi]`
    /// intersected with the bands (`None` when that set is empty) — the
    /// value the projection should approach on large windows.
    pub density_infimum: Option<f64>,
    /// Number of eigenvalues in the window.
    pub rank: usize,
}

fn density_infimum(p: &ModelParams, k: usize, lo: f64, hi: f64) -> Option<f64> {
    let bands = model::spectral_bands(p);
    let mut inf = f64::INFINITY;
    let mut seen = false;
    let mut eval = |t: f64| {
        if t >= lo && t <= hi && bands.contains(t) && t != 0.0 {
            if let Ok(v) = model::commutator_density(p, k, t) {
                inf = inf.min(v);
                seen = true;
            }
        }
    };
    let steps = 4096;
    for i in 0..=steps {
        eval(lo + (hi - lo) * i as f64 / steps as f64);
    }
    for edge in [
        bands.lambda_min,
        bands.lambda_max,
        -bands.lambda_min,
        -bands.lambda_max,
    ] {
        eval(edge);
    }
    seen.then_some(inf)
}

/// Compress `i[A, H]` by the spectral projection of `H` onto `[lo, hi]` and
/// report the smallest eigenvalue of the compression. `k = 0` selects the
/// gapless generator; `k ≥ 1` the order-`k` shift generator.
///
/// The eigenvectors come from the Hamiltonian truncated to `window`, but the
/// commutator is rebuilt on a window padded past its band reach: commuting
/// two truncations corrupts the entries near the cut (the generator carries
/// position weights, so the corruption does not fade with window size), while
/// on the padded window every entry the compression touches is the
/// infinite-volume one.  On the half lattice the left end stays at `0` —
/// there the boundary is part of the operator, not a truncation artifact.
pub fn projected_commutator_min_eig(
    p: &ModelParams,
    k: usize,
    potential: Option<&MatrixSequence>,
    window: LatticeWindow,
    lo: f64,
    hi: f64,
    seed: u64,
) -> Result<ProjectedCommutator, LatticeError> {
    let h = build_hamiltonian(p, potential, window)?;
    let (lambdas, vectors) = eigenpairs_in_window(&h, lo, hi, seed)?;

    let pad = k as i64 + 3;
    let big_lo = match window.kind {
        WindowKind::Unilateral => (window.site_lo() - pad).max(0),
        WindowKind::Bilateral => window.site_lo() - pad,
    };
    let big = LatticeWindow::span(window.kind, big_lo, window.site_hi() + pad);
    let h_big = build_hamiltonian(p, potential, big)?;
    let a_big = if k == 0 { build_a0(p, big)? } else { build_ak(p, k, big)? };
    let c = commutator_i(&a_big, &h_big)?;

    let offset = big.flat_upper(window.site_lo());
    let dim = window.dim();
    let dim_big = big.dim();
    let cv: Vec<Vec<Complex64>> = vectors
        .par_iter()
        .map(|v| {
            let mut emb = vec![Complex64::ZERO; dim_big];
            emb[offset..offset + dim].copy_from_slice(v);
            let mut y = vec![Complex64::ZERO; dim_big];
            c.apply(&emb, &mut y);
            y[offset..offset + dim].to_vec()
        })
        .collect();
    let m = vectors.len();
    let mut gram = vec![vec![Complex64::ZERO; m]; m];
    gram.par_iter_mut().enumerate().for_each(|(s, row)| {
        for (t, cvt) in cv.iter().enumerate() {
            row[t] = vectors[s].iter().zip(cvt).map(|(x, y)| x.conj() * y).sum();
        }
    });
    let vals = hermitian_dense_eig(&gram, false)?.values;
    Ok(ProjectedCommutator {
        min_eig: vals[0],
        density_infimum: density_infimum(p, k, lo, hi),
        rank: lambdas.len(),
    })
}
