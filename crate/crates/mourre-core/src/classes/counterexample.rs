//! A potential on the half lattice that separates the weighted-difference
//! classes from every integral class.
//!
//! The construction starts from a partition of the half lattice into blocks
//! `P_n` of strictly growing size, a nonnegative bump `f_n` on each block and
//! a positive weight sequence `a_n` that decreases to zero while `sum a_n`
//! diverges.  The signed sequence
//!
//! ```text
//! b_j = (-1)^n a_n f_n(j) / ||f_n||_1    for j in P_n
//! ```
//!
//! telescopes blockwise to the alternating series `sum (-1)^n a_n`, which
//! converges — but for every window length `p >= 1` the absolute window sums
//! `sum_j |b_j + ... + b_{j+p-1}|` pick up at least `a_n` from each block and
//! therefore diverge.  Running sums of `b` then give an on-site potential
//! whose weighted first and second differences are bounded (the growing
//! blocks trade decay of `b` against block length), yet whose size and
//! differences fail every summability and integrability test: the standard
//! short/long-range hypotheses all break on it while the weighted-difference
//! hypothesis survives.

use std::sync::Arc;

use num_complex::Complex64;

use super::{tail, ClassError, ClassVerdict};
use crate::band::WindowKind;
use crate::mat2::ZERO2;
use crate::seq::MatrixSequence;
use rayon::prelude::*;

/// Weight positivity/monotonicity/divergence is probed up to this index.
const WEIGHT_VALIDATION_HORIZON: usize = 10_000;

/// Relative tolerance on the proven inequalities re-checked numerically.
const CHECK_TOL: f64 = 1e-9;

/// A partition of the half lattice into blocks with a nonnegative bump on
/// each block.
///
/// Invariants enforced at construction: blocks start at 0, are contiguous,
/// their sizes grow strictly from the second block on, and every bump is
/// nonnegative with positive total mass.
#[derive(Clone)]
pub struct SubordinateFamily {
    /// Block starts plus one final exclusive end: block `n` is
    /// `[starts[n], starts[n+1] - 1]`.
    starts: Vec<i64>,
    f: Arc<dyn Fn(usize, i64) -> f64 + Send + Sync>,
    norms_l1: Vec<f64>,
    norms_inf: Vec<f64>,
    zero_at_start: bool,
}

impl std::fmt::Debug for SubordinateFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SubordinateFamily")
            .field("blocks", &self.blocks())
            .field("span", &self.starts.last())
            .finish()
    }
}

impl SubordinateFamily {
    pub fn new(
        starts: Vec<i64>,
        f: impl Fn(usize, i64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self, ClassError> {
        let bad = |reason: &str| ClassError::BadFamily { reason: reason.to_string() };
        if starts.len() < 3 {
            return Err(bad("need at least two blocks"));
        }
        if starts[0] != 0 {
            return Err(bad("blocks must cover the half lattice from 0"));
        }
        if starts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("block starts must be strictly increasing"));
        }
        let sizes: Vec<i64> = starts.windows(2).map(|w| w[1] - w[0]).collect();
        if sizes.windows(2).skip(1).any(|w| w[1] <= w[0]) {
            return Err(bad("block sizes must grow strictly from the second block on"));
        }

        let blocks = starts.len() - 1;
        let mut norms_l1 = Vec::with_capacity(blocks);
        let mut norms_inf = Vec::with_capacity(blocks);
        let mut zero_at_start = true;
        for n in 0..blocks {
            let mut l1 = 0.0f64;
            let mut linf = 0.0f64;
            for j in starts[n]..starts[n + 1] {
                let v = f(n, j);
                if v < 0.0 {
                    return Err(bad("bumps must be nonnegative"));
                }
                l1 += v;
                linf = linf.max(v);
            }
            if l1 <= 0.0 {
                return Err(bad("every bump needs positive total mass"));
            }
            zero_at_start &= f(n, starts[n]) == 0.0;
            norms_l1.push(l1);
            norms_inf.push(linf);
        }
        Ok(Self { starts, f: Arc::new(f), norms_l1, norms_inf, zero_at_start })
    }

    pub fn blocks(&self) -> usize {
        self.starts.len() - 1
    }

    /// First site of block `n`.
    pub fn alpha(&self, n: usize) -> i64 {
        self.starts[n]
    }

    /// Last site of block `n`.
    pub fn beta(&self, n: usize) -> i64 {
        self.starts[n + 1] - 1
    }

    /// Block containing site `j`, if any.
    pub fn block_of(&self, j: i64) -> Option<usize> {
        if j < 0 || j >= *self.starts.last().unwrap() {
            return None;
        }
        Some(self.starts.partition_point(|&s| s <= j) - 1)
    }

    pub fn bump(&self, n: usize, j: i64) -> f64 {
        (self.f)(n, j)
    }

    pub fn norm_l1(&self, n: usize) -> f64 {
        self.norms_l1[n]
    }

    pub fn norm_inf(&self, n: usize) -> f64 {
        self.norms_inf[n]
    }

    /// Whether every bump vanishes on its block's first site — the condition
    /// under which the weighted bounds of [`CounterexampleSeq`] are proven.
    pub fn zero_at_block_starts(&self) -> bool {
        self.zero_at_start
    }
}

/// Dyadic blocks `{0,1}, [2,3], [4,7], ..., [2^n_max, 2^{n_max+1}-1]` with
/// tent bumps `f_n(j) = min(j - 2^n, 2^{n+1} - j)`.
///
/// The tents have `||f_n||_1 = 4^{n-1}` and `||f_n||_inf = 2^{n-1}` for
/// `n >= 1`, which is what makes the weighted difference bounds finite while
/// the window sums diverge.
pub fn dyadic_tent_family(n_max: usize) -> SubordinateFamily {
    assert!(n_max >= 2, "need at least three dyadic blocks");
    let mut starts = vec![0i64];
    for n in 1..=(n_max + 1) {
        starts.push(1i64 << n);
    }
    SubordinateFamily::new(starts, |n, j| {
        if n == 0 {
            if j == 1 { 1.0 } else { 0.0 }
        } else {
            let lo = 1i64 << n;
            let hi = 1i64 << (n + 1);
            (j - lo).min(hi - j) as f64
        }
    })
    .expect("dyadic tent family satisfies the block invariants")
}

/// The signed block sequence `b` together with its weights and the proven
/// sup bounds on `|j b_j|` and `|j^2 (b_j - b_{j+1})|`.
#[derive(Clone, Debug)]
pub struct CounterexampleSeq {
    family: SubordinateFamily,
    a: Vec<f64>,
    linear_bound: Option<f64>,
    quadratic_bound: Option<f64>,
}

/// Build the alternating block sequence for an admissible weight `a`.
///
/// Admissibility (each checked on a finite probe up to index 10^4): `a` is
/// positive, nonincreasing, decays, and its partial sums keep growing — the
/// combination that makes `sum (-1)^n a_n` conditionally but not absolutely
/// convergent.
pub fn build_counterexample(
    family: SubordinateFamily,
    a: impl Fn(usize) -> f64,
) -> Result<CounterexampleSeq, ClassError> {
    let reject = |reason: String| ClassError::NotAlternatingAdmissible { reason };
    let probe: Vec<f64> = (0..=WEIGHT_VALIDATION_HORIZON).map(&a).collect();
    if let Some(i) = probe.iter().position(|&x| !(x > 0.0)) {
        return Err(reject(format!("weights must be positive, a({i}) = {}", probe[i])));
    }
    if let Some(i) = probe.windows(2).position(|w| w[1] > w[0] * (1.0 + 1e-12)) {
        return Err(reject(format!(
            "weights must be nonincreasing, a({}) = {} > a({i}) = {}",
            i + 1,
            probe[i + 1],
            probe[i]
        )));
    }
    if probe[WEIGHT_VALIDATION_HORIZON] > 0.9 * probe[0] {
        return Err(reject("weights must decay towards zero".to_string()));
    }
    let half: f64 = probe[..=WEIGHT_VALIDATION_HORIZON / 2].iter().sum();
    let full: f64 = probe.iter().sum();
    if (full - half) / full < 0.01 {
        return Err(reject(
            "weight series must diverge (conditional convergence needs sum a_n = infinity)"
                .to_string(),
        ));
    }

    let a: Vec<f64> = (0..family.blocks()).map(a).collect();
    let (linear_bound, quadratic_bound) = if family.zero_at_block_starts() {
        let mut l = 0.0f64;
        let mut q = 0.0f64;
        for n in 0..family.blocks() {
            let beta = family.beta(n) as f64;
            l = l.max(beta * a[n] * family.norm_inf(n) / family.norm_l1(n));
            let mut step = family.bump(n, family.beta(n));
            for j in family.alpha(n)..family.beta(n) {
                step = step.max((family.bump(n, j) - family.bump(n, j + 1)).abs());
            }
            q = q.max(beta * beta * a[n] * step / family.norm_l1(n));
        }
        (Some(l), Some(q))
    } else {
        (None, None)
    };
    Ok(CounterexampleSeq { family, a, linear_bound, quadratic_bound })
}

impl CounterexampleSeq {
    pub fn family(&self) -> &SubordinateFamily {
        &self.family
    }

    pub fn weight(&self, n: usize) -> f64 {
        self.a[n]
    }

    /// `b_j`; zero outside the constructed blocks.
    pub fn b(&self, j: i64) -> f64 {
        match self.family.block_of(j) {
            None => 0.0,
            Some(n) => {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                sign * self.a[n] * self.family.bump(n, j) / self.family.norm_l1(n)
            }
        }
    }

    /// Partial sums of `b` at block ends.  Blockwise the bumps resum to their
    /// weight, so these are exactly the alternating partial sums
    /// `sum_{k<=n} (-1)^k a_k`.
    pub fn block_partial_sums(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.a
            .iter()
            .enumerate()
            .map(|(n, &a)| {
                acc += if n % 2 == 0 { a } else { -a };
                acc
            })
            .collect()
    }

    /// Limit of `sum b_j`, estimated as the mean of the last two block
    /// partial sums (the alternating series brackets its limit between
    /// consecutive partial sums).
    pub fn limit(&self) -> f64 {
        let s = self.block_partial_sums();
        (s[s.len() - 2] + s[s.len() - 1]) / 2.0
    }

    /// Proven bound on `sup_j |j b_j|`, available when the bumps vanish at
    /// block starts.
    pub fn linear_bound(&self) -> Option<f64> {
        self.linear_bound
    }

    /// Proven bound on `sup_j |j^2 (b_j - b_{j+1})|`.
    pub fn quadratic_bound(&self) -> Option<f64> {
        self.quadratic_bound
    }
}

/// Per-window-length record of the divergence mechanism: every late block
/// contributes at least its weight to the absolute window sums.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BlockDominance {
    pub p: usize,
    /// Blocks from this index on are long enough for the blockwise bound.
    pub first_checked_block: usize,
    /// Minimum of `C_n(p) - a_n` over the checked blocks, where `C_n(p)` is
    /// the absolute window sum inside block `n`; nonnegative when the bound
    /// holds.
    pub min_margin: f64,
    /// Total of the `C_n(p)` over the checked blocks.
    pub divergence_total: f64,
    /// The divergent minorant `sum a_n` over the same blocks.
    pub harmonic_floor: f64,
    pub dominated: bool,
}

/// Everything [`verify_counterexample`] measured.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CounterexampleReport {
    pub blocks_checked: usize,
    /// Limit of the alternating series over the scanned blocks.
    pub limit: f64,
    pub block_partial_sums: Vec<f64>,
    /// Worst gap between brute-force block resummation and `(-1)^n a_n`.
    pub resummation_defect: f64,
    /// Whether `|S_n - limit| <= a_{n+1}` held for every scanned block.
    pub alternating_bound_ok: bool,
    pub window_sums: Vec<BlockDominance>,
    pub sup_weighted_value: f64,
    pub linear_bound: Option<f64>,
    pub linear_bound_ok: bool,
    pub sup_weighted_difference: f64,
    pub quadratic_bound: Option<f64>,
    pub quadratic_bound_ok: bool,
}

/// Re-derive the three claimed properties of the sequence numerically over
/// all blocks inside `horizon`:
///
/// 1. blockwise resummation gives the convergent alternating series, with the
///    standard alternating-series error bound;
/// 2. for each window length `p <= p_max` the absolute window sums dominate
///    the divergent weight series blockwise;
/// 3. the weighted sup bounds on `|j b_j|` and `|j^2 (b_j - b_{j+1})|` hold
///    exhaustively.
pub fn verify_counterexample(
    seq: &CounterexampleSeq,
    p_max: usize,
    horizon: i64,
) -> Result<CounterexampleReport, ClassError> {
    assert!(p_max >= 1);
    let fam = &seq.family;
    let nb = (0..fam.blocks()).take_while(|&n| fam.beta(n) <= horizon).count();
    if nb < 12 {
        let want = fam.beta((fam.blocks() - 1).min(11));
        return Err(ClassError::HorizonTooSmall { needed: want, got: horizon });
    }

    // Item 1: blockwise resummation and the alternating limit.
    let all_partials = seq.block_partial_sums();
    let partials = all_partials[..nb].to_vec();
    let limit = (partials[nb - 2] + partials[nb - 1]) / 2.0;
    let mut resummation_defect = 0.0f64;
    for n in 0..nb {
        let brute: f64 = (fam.alpha(n)..=fam.beta(n)).map(|j| seq.b(j)).sum();
        let exact = if n % 2 == 0 { seq.a[n] } else { -seq.a[n] };
        resummation_defect = resummation_defect.max((brute - exact).abs());
    }
    let alternating_bound_ok = (0..nb - 1)
        .all(|n| (partials[n] - limit).abs() <= seq.a[n + 1] * (1.0 + CHECK_TOL));

    // Item 2: window sums block by block.
    let mut window_sums = Vec::with_capacity(p_max);
    for p in 1..=p_max {
        let log2p = (p as f64).log2().ceil() as usize;
        let first = (log2p + 2).max(3);
        if first + 2 >= nb {
            return Err(ClassError::HorizonTooSmall { needed: fam.beta(first + 2), got: horizon });
        }
        let mut min_margin = f64::MAX;
        let mut divergence_total = 0.0;
        let mut harmonic_floor = 0.0;
        for n in first..nb {
            let len = (fam.beta(n) - fam.alpha(n) + 1) as usize;
            if len < p {
                continue;
            }
            let bvals: Vec<f64> = (fam.alpha(n)..=fam.beta(n)).map(|j| seq.b(j)).collect();
            let c_n: f64 = bvals
                .windows(p)
                .map(|w| w.iter().sum::<f64>().abs())
                .sum();
            min_margin = min_margin.min(c_n - seq.a[n]);
            divergence_total += c_n;
            harmonic_floor += seq.a[n];
        }
        let dominated = harmonic_floor > 0.0
            && min_margin >= -CHECK_TOL * seq.a[first]
            && divergence_total >= harmonic_floor * (1.0 - 1e-12);
        window_sums.push(BlockDominance {
            p,
            first_checked_block: first,
            min_margin,
            divergence_total,
            harmonic_floor,
            dominated,
        });
    }

    // Item 3: exhaustive weighted sup bounds.
    let mut sup_value = 0.0f64;
    let mut sup_diff = 0.0f64;
    let top = fam.beta(nb - 1);
    for j in 0..=top {
        let b = seq.b(j);
        sup_value = sup_value.max((j as f64 * b).abs());
        let jb = j as f64;
        sup_diff = sup_diff.max((jb * jb * (b - seq.b(j + 1))).abs());
    }
    let within = |sup: f64, bound: Option<f64>| match bound {
        Some(l) => sup <= l * (1.0 + CHECK_TOL),
        None => true,
    };

    Ok(CounterexampleReport {
        blocks_checked: nb,
        limit,
        block_partial_sums: partials,
        resummation_defect,
        alternating_bound_ok,
        window_sums,
        sup_weighted_value: sup_value,
        linear_bound: seq.linear_bound,
        linear_bound_ok: within(sup_value, seq.linear_bound),
        sup_weighted_difference: sup_diff,
        quadratic_bound: seq.quadratic_bound,
        quadratic_bound_ok: within(sup_diff, seq.quadratic_bound),
    })
}

/// The on-site potential with `V11(n) = sum_{j<n} b_j - lim sum b`, zero on
/// the negative half lattice and in every other entry.
///
/// Bounded weighted differences of `V` follow from the sup bounds on `b`
/// (first differences are `b_{n-1}`, second differences are `b_{n-1} -
/// b_{n-2}`), while its failure of every integral condition is inherited
/// from the divergent window sums.  Values are exact up to the last
/// constructed block and clamp beyond it.
pub fn counterexample_potential(seq: &CounterexampleSeq) -> MatrixSequence {
    let top = seq.family.beta(seq.family.blocks() - 1);
    let mut prefix = Vec::with_capacity(top as usize + 2);
    prefix.push(0.0f64);
    let mut acc = 0.0;
    for j in 0..=top {
        acc += seq.b(j);
        prefix.push(acc);
    }
    let limit = seq.limit();
    let prefix = Arc::new(prefix);
    MatrixSequence::new("alternating-block potential", move |n| {
        if n < 0 {
            return ZERO2;
        }
        let v = prefix[(n as usize).min(prefix.len() - 1)] - limit;
        let mut m = ZERO2;
        m[0][0] = Complex64::new(v, 0.0);
        m
    })
}

/// Summability test for a single matrix entry of the `p`-step difference:
/// decade partial sums of `|W_rc(n) - (t^p W)_rc(n)|` over the lattice,
/// judged by the shared convergence rules.
///
/// The report also records whether the scanned sequence stayed clear of the
/// two pointwise values (`W12 = -1`, `W21 = +1`) that would make the
/// block-tridiagonal reduction of a perturbed operator break down.
#[derive(Debug, Clone, serde::Serialize)]
pub struct L1DifferenceReport {
    pub p: usize,
    pub row: usize,
    pub col: usize,
    pub verdict: ClassVerdict,
    pub offdiag_upper_avoids_minus_one: bool,
    pub offdiag_lower_avoids_plus_one: bool,
}

pub fn l1_difference_test(
    seq: &MatrixSequence,
    kind: WindowKind,
    p: usize,
    row: usize,
    col: usize,
    horizon: i64,
) -> L1DifferenceReport {
    assert!(p >= 1 && row < 2 && col < 2);
    let f = |n: i64| {
        let w = seq.eval(n)[row][col];
        let s = super::shifted(seq, kind, n, p as i64)[row][col];
        (w - s).norm()
    };
    let series = tail::decade_sums(kind, horizon, &f);
    let (verdict, witness) = series.judge();
    let verdict = ClassVerdict { verdict, witness, horizon };

    let lo = match kind {
        WindowKind::Bilateral => -horizon,
        WindowKind::Unilateral => 0,
    };
    let (min_upper, min_lower) = (lo..horizon + 1)
        .into_par_iter()
        .fold(
            || (f64::MAX, f64::MAX),
            |acc, n| {
                let w = seq.eval(n);
                (acc.0.min((w[0][1] + 1.0).norm()), acc.1.min((w[1][0] - 1.0).norm()))
            },
        )
        .reduce(|| (f64::MAX, f64::MAX), |a, b| (a.0.min(b.0), a.1.min(b.1)));

    L1DifferenceReport {
        p,
        row,
        col,
        verdict,
        offdiag_upper_avoids_minus_one: min_upper > 1e-9,
        offdiag_lower_avoids_plus_one: min_lower > 1e-9,
    }
}
