//! Resolvent and eigenvalue probes for truncated Hamiltonians.
//!
//! Two families of numerical experiments live here.  The resolvent probes
//! estimate `‖⟨N⟩^{−s} (H − x − iε)^{−1} ⟨N⟩^{−s}‖` on a finite window and
//! track how the estimate behaves as `ε ↓ 0` — bounded plateaus are the
//! finite-volume signature of a limiting absorption bound, blow-up marks its
//! failure.  The eigenvalue probes look for spectrum that survives a doubling
//! of the truncation window: discrete eigenvalues and boundary modes are
//! stable under `N → 2N`, while band states drift at the mesh scale and
//! truncation artifacts move or vanish.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::band::{BandedHermitian, LatticeWindow};
use crate::f17;
use crate::lattice::{self, LatticeError};
use crate::linalg::banded::BandedLu;
use crate::linalg::power::{power_iteration_norm, PowerOutcome};
use crate::linalg::{LinalgError, DEFAULT_SEED};
use crate::model::ModelParams;
use crate::seq::MatrixSequence;

/// Relative tolerance for the power iteration on the weighted Gram operator.
const POWER_TOL: f64 = 1e-6;
/// Iteration cap for the power iteration.
const POWER_CAP: usize = 500;
/// Two eigenvalues from consecutive window sizes describe the same state when
/// they are at most this far apart.
const MATCH_TOL: f64 = 1e-6;
/// A matched eigenvalue counts as stable when no doubling moved it further
/// than this.
const STABLE_TOL: f64 = 1e-8;
/// Fraction of the ℓ² mass that must sit in one third of the window before a
/// state counts as localized on that side.
const SIDE_MASS_FRACTION: f64 = 0.8;
/// The `ε`-scan has plateaued when the last refinement changed the norm by
/// less than this relative amount.
const PLATEAU_RELATIVE_GAP: f64 = 0.1;
/// Lower bound imposed on `site_count · ε_min · |a||b|` before a scan runs;
/// below it the smallest `ε` cannot be resolved on the window.
const SCAN_RESOLUTION_FLOOR: f64 = 4.0;

/// Exact header of the resolvent-scan CSV output.
pub const LAP_CSV_HEADER: &str = "x,epsilon,s,N,norm,iters,converged";
/// Exact header of the eigenvalue-probe CSV output.
pub const EIG_CSV_HEADER: &str = "lambda,stable,decay_ratio,side";

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("resolvent probe needs a nonreal shift, got z = {re:.6e} + {im:.6e}i")]
    RealShift { re: f64, im: f64 },
    #[error(
        "no boundary mode expected: the half-lattice model needs |b| > |a| > 0, \
         got |a| = {abs_a:.6e}, |b| = {abs_b:.6e}"
    )]
    NoEdgeState { abs_a: f64, abs_b: f64 },
    #[error("no boundary-localized eigenvalue found in the spectral gap near {expected:.6e}")]
    EdgeEigNotFound { expected: f64 },
    #[error(
        "scan too coarse: site_count * eps_min * |a||b| = {value:.3e} is below {required}; \
         widen the window or raise the smallest epsilon"
    )]
    ScanTooCoarse { value: f64, required: f64 },
    #[error("invalid probe grid: {reason}")]
    BadGrid { reason: String },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Which part of the window carries the ℓ² mass of an eigenvector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Mass concentrated at the low-index end of the window.
    Left,
    /// Mass concentrated at the high-index end.
    Right,
    /// No single third of the window dominates.
    Bulk,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Bulk => "bulk",
        })
    }
}

/// One eigenvalue of the largest truncation, with its stability history.
#[derive(Debug, Clone, serde::Serialize)]
pub struct StableEig {
    /// Eigenvalue on the largest window.
    pub lambda: f64,
    /// Whether the eigenvalue was matched across every window size with moves
    /// below the stability tolerance.
    pub stable: bool,
    /// Localization of the eigenvector on the largest window.
    pub side: Side,
    /// ℓ² mass fraction carried by the dominant third of the window.
    pub mass_fraction: f64,
    /// Geometric mean of successive site-norm ratios from the localized end;
    /// `1` for bulk states.
    pub decay_ratio: f64,
}

/// Per-site ℓ² norms of a flattened window vector.
fn site_norms(window: LatticeWindow, v: &[Complex64]) -> Vec<f64> {
    debug_assert_eq!(v.len(), window.dim());
    (0..window.site_count())
        .map(|m| (v[2 * m].norm_sqr() + v[2 * m + 1].norm_sqr()).sqrt())
        .collect()
}

/// Classify where the mass of a vector sits and how fast it decays inward.
fn localize(window: LatticeWindow, v: &[Complex64]) -> (Side, f64, f64) {
    let r = site_norms(window, v);
    let s = r.len();
    let third = (s / 3).max(1);
    let total: f64 = r.iter().map(|x| x * x).sum();
    if total <= 0.0 || s < 3 {
        return (Side::Bulk, 0.0, 1.0);
    }
    let left: f64 = r[..third].iter().map(|x| x * x).sum::<f64>() / total;
    let right: f64 = r[s - third..].iter().map(|x| x * x).sum::<f64>() / total;
    let (side, frac) = if left >= SIDE_MASS_FRACTION {
        (Side::Left, left)
    } else if right >= SIDE_MASS_FRACTION {
        (Side::Right, right)
    } else {
        (Side::Bulk, left.max(right))
    };
    let ratio = match side {
        Side::Left => decay_ratio(&r),
        Side::Right => {
            let rev: Vec<f64> = r.iter().rev().copied().collect();
            decay_ratio(&rev)
        }
        Side::Bulk => 1.0,
    };
    (side, frac, ratio)
}

/// Geometric mean of successive site-norm ratios, taken from the start of the
/// profile down to where it falls six orders below the starting value.
fn decay_ratio(r: &[f64]) -> f64 {
    let Some(&first) = r.first() else { return 1.0 };
    if first <= 0.0 {
        return 1.0;
    }
    let floor = first * 1e-6;
    let mut last_idx = 0;
    for (m, &val) in r.iter().enumerate() {
        if val < floor {
            break;
        }
        last_idx = m;
    }
    if last_idx == 0 {
        // Everything past the first site is already below the floor.
        return 0.0;
    }
    (r[last_idx] / first).powf(1.0 / last_idx as f64)
}

fn eigenpairs_or_empty(
    h: &BandedHermitian,
    lo: f64,
    hi: f64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<Vec<Complex64>>), ProbeError> {
    match lattice::eigenpairs_in_window(h, lo, hi, seed) {
        Ok(pairs) => Ok(pairs),
        Err(LatticeError::EmptyProjector { .. }) => Ok((Vec::new(), Vec::new())),
        Err(e) => Err(e.into()),
    }
}

/// Eigenvalues of the largest truncation inside `[lo, hi]`, flagged by whether
/// they persist across the whole ladder of window sizes.
///
/// `build` maps a window radius to the truncated operator; `sizes` must be
/// strictly increasing.  An eigenvalue of the largest window is traced
/// backwards through the ladder by nearest-neighbor matching and counts as
/// stable when every consecutive move stays below `1e−8`.
pub fn truncation_stable_eigs(
    build: impl Fn(u32) -> Result<BandedHermitian, LatticeError>,
    sizes: &[u32],
    lo: f64,
    hi: f64,
    seed: u64,
) -> Result<Vec<StableEig>, ProbeError> {
    if sizes.len() < 2 {
        return Err(ProbeError::BadGrid {
            reason: "need at least two window sizes to assess stability".into(),
        });
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ProbeError::BadGrid {
            reason: "window sizes must be strictly increasing".into(),
        });
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(ProbeError::BadGrid {
            reason: format!("eigenvalue window [{lo}, {hi}] is empty or not finite"),
        });
    }

    let mut ladders: Vec<Vec<f64>> = Vec::with_capacity(sizes.len() - 1);
    for &n in &sizes[..sizes.len() - 1] {
        let h = build(n)?;
        let spectrum = lattice::spectrum(&h)?;
        ladders.push(spectrum.into_iter().filter(|t| *t >= lo && *t <= hi).collect());
    }
    let h_top = build(*sizes.last().expect("sizes checked nonempty"))?;
    let (lambdas, vectors) = eigenpairs_or_empty(&h_top, lo, hi, seed)?;

    let mut out = Vec::with_capacity(lambdas.len());
    for (t, v) in lambdas.iter().zip(&vectors) {
        let mut stable = true;
        let mut current = *t;
        for ladder in ladders.iter().rev() {
            match nearest(ladder, current) {
                Some(prev) if (prev - current).abs() <= MATCH_TOL => {
                    if (prev - current).abs() > STABLE_TOL {
                        stable = false;
                        break;
                    }
                    current = prev;
                }
                _ => {
                    stable = false;
                    break;
                }
            }
        }
        let (side, mass_fraction, ratio) = localize(h_top.window(), v);
        out.push(StableEig { lambda: *t, stable, side, mass_fraction, decay_ratio: ratio });
    }
    Ok(out)
}

/// Nearest element of a sorted slice, `None` when empty.
fn nearest(sorted: &[f64], x: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let idx = sorted.partition_point(|t| *t < x);
    let mut best = f64::INFINITY;
    let mut arg = None;
    for j in [idx.wrapping_sub(1), idx] {
        if let Some(&t) = sorted.get(j) {
            if (t - x).abs() < best {
                best = (t - x).abs();
                arg = Some(t);
            }
        }
    }
    arg
}

/// Serialize eigenvalue probes as CSV with the pinned header.
pub fn write_eig_csv<W: Write>(mut out: W, eigs: &[StableEig]) -> io::Result<()> {
    writeln!(out, "{EIG_CSV_HEADER}")?;
    for e in eigs {
        writeln!(out, "{},{},{},{}", f17(e.lambda), e.stable, f17(e.decay_ratio), e.side)?;
    }
    Ok(())
}

/// Boundary-mode report for the half-lattice operator.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct EdgeReport {
    /// Energy of the boundary mode.
    pub lambda: f64,
    /// Whether the mode survived a doubling of the window.
    pub stable: bool,
    /// Measured per-site amplitude ratio of the mode.
    pub decay_ratio: f64,
    /// ℓ² mass fraction in the boundary third of the window.
    pub mass_fraction: f64,
    /// Spectral gap searched for the mode.
    pub gap_lo: f64,
    pub gap_hi: f64,
}

/// Look for the boundary mode of the free half-lattice operator.
///
/// When the far coupling dominates (`|b| > |a| > 0`) the half-lattice operator
/// carries exactly one boundary-localized eigenstate.  It sits at energy
/// `−α`, lives on the upper components, and decays by `|a|/|b|` per site.  The
/// probe truncates at radius `n` and `2n`, keeps only gap eigenvalues whose
/// mass sits at the boundary end (the opposite end hosts a truncation
/// artifact at `+α`), and reports the one closest to `−α`.
pub fn edge_state_check(p: &ModelParams, n: u32, seed: u64) -> Result<EdgeReport, ProbeError> {
    if !(p.abs_a() > 0.0 && p.abs_b() > p.abs_a()) {
        return Err(ProbeError::NoEdgeState { abs_a: p.abs_a(), abs_b: p.abs_b() });
    }
    let gap = p.lambda_min() - 1e-9;
    let expected = -p.alpha();
    let build = |radius: u32| Ok(lattice::build_h0(p, LatticeWindow::unilateral(radius)));
    let eigs = truncation_stable_eigs(build, &[n, 2 * n], -gap, gap, seed)?;
    let best = eigs
        .iter()
        .filter(|e| e.side == Side::Left)
        .min_by(|x, y| {
            let dx = (x.lambda - expected).abs();
            let dy = (y.lambda - expected).abs();
            dx.partial_cmp(&dy).expect("eigenvalue distances are finite")
        })
        .ok_or(ProbeError::EdgeEigNotFound { expected })?;
    Ok(EdgeReport {
        lambda: best.lambda,
        stable: best.stable,
        decay_ratio: best.decay_ratio,
        mass_fraction: best.mass_fraction,
        gap_lo: -gap,
        gap_hi: gap,
    })
}

/// Estimate `‖⟨N⟩^{−s} (H − z)^{−1} ⟨N⟩^{−s}‖` by power iteration.
///
/// The operator `T = D (H − z)^{−1} D` with `D = ⟨N⟩^{−s}` is reached through
/// two banded LU solves per matvec (one with `z`, one with `z̄` for the
/// adjoint), and the norm is the square root of the top eigenvalue of the
/// Gram operator `T^* T`.  The shift must have a nonzero imaginary part.
pub fn weighted_resolvent_norm(
    h: &BandedHermitian,
    s: f64,
    z: Complex64,
    tol: f64,
    iter_cap: usize,
    seed: u64,
) -> Result<PowerOutcome, ProbeError> {
    if z.im == 0.0 {
        return Err(ProbeError::RealShift { re: z.re, im: z.im });
    }
    let window = h.window();
    let dim = h.dim();
    let weights: Vec<f64> = (0..dim)
        .map(|i| {
            let n = window.site_of_flat(i) as f64;
            n.hypot(1.0).powf(-s)
        })
        .collect();
    let lu = BandedLu::factor(dim, h.half_bandwidth(), z, |i, j| h.get(i, j))?;
    let lu_adj = BandedLu::factor(dim, h.half_bandwidth(), z.conj(), |i, j| h.get(i, j))?;

    let mut buf = vec![Complex64::ZERO; dim];
    let outcome = power_iteration_norm(dim, tol, iter_cap, seed, |x, y| {
        for i in 0..dim {
            buf[i] = weights[i] * x[i];
        }
        lu.solve_in_place(&mut buf);
        for (w, v) in weights.iter().zip(buf.iter_mut()) {
            *v *= w * w;
        }
        lu_adj.solve_in_place(&mut buf);
        for i in 0..dim {
            y[i] = weights[i] * buf[i];
        }
    });
    Ok(PowerOutcome {
        norm: outcome.norm.max(0.0).sqrt(),
        iters: outcome.iters,
        converged: outcome.converged,
    })
}

/// One `(x, ε)` sample of the resolvent scan.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LapRow {
    pub x: f64,
    pub epsilon: f64,
    pub s: f64,
    /// Number of lattice sites in the window.
    pub site_count: usize,
    pub norm: f64,
    pub iters: usize,
    pub converged: bool,
}

/// Scan summary at a fixed energy `x`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LapPoint {
    pub x: f64,
    /// Distance from `x` to the nearest eigenvalue of the truncated operator.
    pub nearest_eig_dist: f64,
    /// Relative change of the norm over the last `ε` refinement.
    pub final_ratio: f64,
    /// Whether the norm has stopped growing as `ε ↓ 0`.
    pub plateau: bool,
}

/// Full resolvent scan over an energy grid and a ladder of `ε` values.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LapScanReport {
    pub site_count: usize,
    pub rows: Vec<LapRow>,
    pub points: Vec<LapPoint>,
}

/// Run the weighted-resolvent scan for `H = H₀ + V` on a window.
///
/// For every energy in `xs` and every `ε` in `eps` (visited in decreasing
/// order) the probe estimates the weighted resolvent norm at `z = x + iε`.
/// The window must be fine enough for the smallest `ε`:
/// `site_count · ε_min · |a||b|` has to reach 4, otherwise the scan cannot
/// distinguish a plateau from unresolved level spacing.
pub fn lap_scan(
    p: &ModelParams,
    potential: Option<&MatrixSequence>,
    window: LatticeWindow,
    s: f64,
    xs: &[f64],
    eps: &[f64],
) -> Result<LapScanReport, ProbeError> {
    if xs.is_empty() || xs.iter().any(|x| !x.is_finite()) {
        return Err(ProbeError::BadGrid {
            reason: "energy grid must be nonempty and finite".into(),
        });
    }
    if eps.len() < 2 || eps.iter().any(|e| !e.is_finite() || *e <= 0.0) {
        return Err(ProbeError::BadGrid {
            reason: "need at least two positive epsilon values".into(),
        });
    }
    let mut eps_sorted = eps.to_vec();
    eps_sorted.sort_by(|a, b| b.partial_cmp(a).expect("epsilon values are finite"));
    eps_sorted.dedup();
    let eps_min = *eps_sorted.last().expect("epsilon ladder is nonempty");
    let resolution = window.site_count() as f64 * eps_min * p.ab_product();
    if resolution < SCAN_RESOLUTION_FLOOR {
        return Err(ProbeError::ScanTooCoarse {
            value: resolution,
            required: SCAN_RESOLUTION_FLOOR,
        });
    }

    let h = lattice::build_hamiltonian(p, potential, window)?;
    let mut eigs = lattice::spectrum(&h)?;
    eigs.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));

    let grid: Vec<(f64, f64)> = xs
        .iter()
        .flat_map(|&x| eps_sorted.iter().map(move |&e| (x, e)))
        .collect();
    let rows: Vec<LapRow> = grid
        .par_iter()
        .map(|&(x, e)| {
            let outcome =
                weighted_resolvent_norm(&h, s, Complex64::new(x, e), POWER_TOL, POWER_CAP, DEFAULT_SEED)?;
            Ok(LapRow {
                x,
                epsilon: e,
                s,
                site_count: window.site_count(),
                norm: outcome.norm,
                iters: outcome.iters,
                converged: outcome.converged,
            })
        })
        .collect::<Result<_, ProbeError>>()?;

    let per_x = eps_sorted.len();
    let points = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let tail = &rows[i * per_x..(i + 1) * per_x];
            let last = tail[per_x - 1].norm;
            let prev = tail[per_x - 2].norm;
            let final_ratio = if last > 0.0 { (last - prev).abs() / last } else { 0.0 };
            let nearest_eig_dist =
                nearest(&eigs, x).map_or(f64::INFINITY, |t| (t - x).abs());
            LapPoint { x, nearest_eig_dist, final_ratio, plateau: final_ratio < PLATEAU_RELATIVE_GAP }
        })
        .collect();
    Ok(LapScanReport { site_count: window.site_count(), rows, points })
}

/// Serialize a resolvent scan as CSV with the pinned header.
pub fn write_lap_csv<W: Write>(mut out: W, report: &LapScanReport) -> io::Result<()> {
    writeln!(out, "{LAP_CSV_HEADER}")?;
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            f17(r.x),
            f17(r.epsilon),
            f17(r.s),
            r.site_count,
            f17(r.norm),
            r.iters,
            r.converged
        )?;
    }
    Ok(())
}

/// A point of interest for the accumulation scan.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct AccumulationTarget {
    /// Energy to watch.
    pub value: f64,
    /// Control points are expected to attract no stable eigenvalues.
    pub control: bool,
}

/// Count of stable eigenvalues within one radius of one target.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct AccumulationCell {
    pub target: f64,
    pub control: bool,
    pub radius: f64,
    pub count: usize,
}

/// Where the truncation-stable eigenvalues cluster.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AccumulationReport {
    /// Stable eigenvalues found in the scanned energy range.
    pub stable_eigenvalues: Vec<f64>,
    /// Counts per `(target, radius)` pair.
    pub cells: Vec<AccumulationCell>,
    /// Total count over all control cells; nonzero values flag spurious
    /// clustering away from the watched thresholds.
    pub control_total: usize,
}

/// Count truncation-stable eigenvalues near each target energy.
///
/// The scanned range is the union of all `target ± radius` intervals; the
/// stable set is computed once on the ladder of window sizes and shared by
/// every cell.
pub fn accumulation_scan(
    build: impl Fn(u32) -> Result<BandedHermitian, LatticeError>,
    targets: &[AccumulationTarget],
    radii: &[f64],
    sizes: &[u32],
    seed: u64,
) -> Result<AccumulationReport, ProbeError> {
    if targets.is_empty() || radii.is_empty() {
        return Err(ProbeError::BadGrid {
            reason: "accumulation scan needs at least one target and one radius".into(),
        });
    }
    if radii.iter().any(|r| !r.is_finite() || *r <= 0.0) {
        return Err(ProbeError::BadGrid {
            reason: "radii must be positive and finite".into(),
        });
    }
    let r_max = radii.iter().cloned().fold(0.0_f64, f64::max);
    let lo = targets.iter().map(|t| t.value).fold(f64::INFINITY, f64::min) - r_max;
    let hi = targets.iter().map(|t| t.value).fold(f64::NEG_INFINITY, f64::max) + r_max;
    let eigs = truncation_stable_eigs(build, sizes, lo, hi, seed)?;
    let stable: Vec<f64> = eigs.iter().filter(|e| e.stable).map(|e| e.lambda).collect();

    let mut cells = Vec::with_capacity(targets.len() * radii.len());
    let mut control_total = 0;
    for t in targets {
        for &r in radii {
            let count = stable.iter().filter(|x| (*x - t.value).abs() <= r).count();
            if t.control {
                control_total += count;
            }
            cells.push(AccumulationCell { target: t.value, control: t.control, radius: r, count });
        }
    }
    Ok(AccumulationReport { stable_eigenvalues: stable, cells, control_total })
}

/// Group the stable-eigenvalue counts of a report by target for quick lookup.
pub fn counts_by_target(report: &AccumulationReport) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for c in &report.cells {
        let key = format!("{:+.6}@{:.0e}", c.target, c.radius);
        *out.entry(key).or_insert(0) += c.count;
    }
    out
}
