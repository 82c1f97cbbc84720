//! Symbol-level description of the block hopping model: band structure,
//! threshold sets, and the even polynomial densities that drive the
//! positive-commutator estimates.
//!
//! Everything in this module is a closed-form function of the three
//! parameters `(alpha, a, b)`; no lattice truncation is involved.

use crate::mat2::{self, Mat2};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

/// `alpha = 0` and `|a| = |b|` up to this tolerance counts as gapless.
pub const GAPLESS_TOL: f64 = 1e-12;
/// Threshold values closer than this are merged into one.
pub const KAPPA_DEDUP_TOL: f64 = 1e-10;
/// Band eigenprojectors are refused when `lambda(theta)` is below this.
pub const CONICAL_TOL: f64 = 1e-13;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("coupling `{which}` must be nonzero")]
    ZeroCoupling { which: &'static str },
    #[error("commutator order k must be at least 1; the gapless case has its own order-0 generator")]
    OrderZero,
    #[error("the commutator density is undefined at t = 0")]
    ZeroEnergy,
    #[error(
        "order-0 thresholds require a gapless model (alpha = 0 and |a| = |b|); \
         got alpha = {alpha:.3e}, |a| - |b| = {imbalance:.3e}"
    )]
    NotGapless { alpha: f64, imbalance: f64 },
    #[error("band eigenprojectors are singular at the conical point: lambda({theta}) = {lambda:.3e}")]
    ConicalPoint { theta: f64, lambda: f64 },
}

/// Validated model parameters `(alpha, a, b)` with `a, b` nonzero.
#[derive(Debug, Clone, Copy)]
pub struct ModelParams {
    alpha: f64,
    a: Complex64,
    b: Complex64,
}

impl ModelParams {
    pub fn new(alpha: f64, a: Complex64, b: Complex64) -> Result<Self, ModelError> {
        if a.norm() == 0.0 {
            return Err(ModelError::ZeroCoupling { which: "a" });
        }
        if b.norm() == 0.0 {
            return Err(ModelError::ZeroCoupling { which: "b" });
        }
        Ok(Self { alpha, a, b })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn a(&self) -> Complex64 {
        self.a
    }
    pub fn b(&self) -> Complex64 {
        self.b
    }
    pub fn abs_a(&self) -> f64 {
        self.a.norm()
    }
    pub fn abs_b(&self) -> f64 {
        self.b.norm()
    }
    /// Phase of the on-site coupling `a`.
    pub fn phi1(&self) -> f64 {
        self.a.arg()
    }
    /// Phase of the hopping coupling `b`.
    pub fn phi2(&self) -> f64 {
        self.b.arg()
    }
    /// Phase offset `phi = phi2 - phi1` entering every dispersion formula.
    pub fn phi(&self) -> f64 {
        self.b.arg() - self.a.arg()
    }
    /// `|a|·|b|`, the velocity scale of the model.
    pub fn ab_product(&self) -> f64 {
        self.a.norm() * self.b.norm()
    }

    pub fn is_gapless(&self) -> bool {
        self.alpha.abs() <= GAPLESS_TOL && (self.abs_a() - self.abs_b()).abs() <= GAPLESS_TOL
    }

    /// `sqrt(alpha² + (|a| - |b|)²)`, the inner band edge.
    pub fn lambda_min(&self) -> f64 {
        let d = self.abs_a() - self.abs_b();
        (self.alpha * self.alpha + d * d).sqrt()
    }

    /// `sqrt(alpha² + (|a| + |b|)²)`, the outer band edge.
    pub fn lambda_max(&self) -> f64 {
        let s = self.abs_a() + self.abs_b();
        (self.alpha * self.alpha + s * s).sqrt()
    }

    /// Dispersion value from a cosine sample: `sqrt(alpha² + |a|² + |b|² + 2|a||b| c)`.
    ///
    /// Going through the cosine (rather than an angle) keeps threshold values
    /// exact at the band edges.
    pub fn lambda_from_cos(&self, c: f64) -> f64 {
        let v = self.alpha * self.alpha
            + self.a.norm_sqr()
            + self.b.norm_sqr()
            + 2.0 * self.ab_product() * c;
        v.max(0.0).sqrt()
    }
}

/// The two symmetric bands `±[lambda_min, lambda_max]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BandStructure {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub gapless: bool,
}

impl BandStructure {
    /// Whether `t` lies in the closed union of the two bands.
    pub fn contains(&self, t: f64) -> bool {
        let s = t.abs();
        s >= self.lambda_min && s <= self.lambda_max
    }

    /// Closed band intervals, low to high (a single interval when gapless).
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        if self.gapless {
            vec![(-self.lambda_max, self.lambda_max)]
        } else {
            vec![
                (-self.lambda_max, -self.lambda_min),
                (self.lambda_min, self.lambda_max),
            ]
        }
    }
}

pub fn spectral_bands(p: &ModelParams) -> BandStructure {
    BandStructure {
        lambda_min: p.lambda_min(),
        lambda_max: p.lambda_max(),
        gapless: p.is_gapless(),
    }
}

/// The 2×2 fiber symbol at momentum `theta`:
/// `[[alpha, conj(a) + conj(b) e^{-i theta}], [a + b e^{i theta}, -alpha]]`.
pub fn symbol(p: &ModelParams, theta: f64) -> Mat2 {
    let e = Complex64::from_polar(1.0, theta);
    let lower = p.a + p.b * e;
    [
        [Complex64::new(p.alpha, 0.0), lower.conj()],
        [lower, Complex64::new(-p.alpha, 0.0)],
    ]
}

/// Positive dispersion branch `lambda(theta)`.
pub fn band_function(p: &ModelParams, theta: f64) -> f64 {
    p.lambda_from_cos((theta + p.phi()).cos())
}

/// Chebyshev polynomial of the second kind, `U_k(x)`, by the three-term
/// recurrence (exact in exact arithmetic, which is what the identity tests
/// exploit).
pub fn chebyshev_u(k: usize, x: f64) -> f64 {
    let mut prev = 1.0; // U_0
    if k == 0 {
        return prev;
    }
    let mut cur = 2.0 * x; // U_1
    for _ in 1..k {
        (prev, cur) = (cur, 2.0 * x * cur - prev);
    }
    cur
}

fn g0(p: &ModelParams, t: f64) -> f64 {
    let lmin2 = {
        let d = p.abs_a() - p.abs_b();
        p.alpha * p.alpha + d * d
    };
    let lmax2 = {
        let s = p.abs_a() + p.abs_b();
        p.alpha * p.alpha + s * s
    };
    let t2 = t * t;
    -(t2 - lmin2) * (t2 - lmax2) / (4.0 * t.abs())
}

/// The even density `g_k(t) = g_0(t) · U_{k-1}((t² - alpha² - |a|² - |b|²) / (2|a||b|))`
/// whose restriction to the bands is the diagonal symbol of the order-`k`
/// commutator. Requires `k ≥ 1` and `t ≠ 0`.
pub fn g_k_eval(p: &ModelParams, k: usize, t: f64) -> Result<f64, ModelError> {
    if k == 0 {
        return Err(ModelError::OrderZero);
    }
    if t == 0.0 {
        return Err(ModelError::ZeroEnergy);
    }
    let x = (t * t - p.alpha * p.alpha - p.a.norm_sqr() - p.b.norm_sqr()) / (2.0 * p.ab_product());
    Ok(g0(p, t) * chebyshev_u(k - 1, x))
}

/// One positive threshold energy with its provenance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KappaPoint {
    /// Index `j` in `cos(pi j / k)`.
    pub j: usize,
    /// The cosine sample defining this threshold.
    pub cos_value: f64,
    /// Threshold energy `lambda` computed from the cosine.
    pub t: f64,
    /// A momentum with `lambda(theta) = t`; lies in `[0, pi]` whenever a
    /// representative exists there, otherwise wrapped to `(-pi, pi]`.
    pub theta: f64,
}

fn wrap_to_pi(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * std::f64::consts::PI);
    if y > std::f64::consts::PI {
        y - 2.0 * std::f64::consts::PI
    } else {
        y
    }
}

/// Positive-side threshold detail for order `k ≥ 1`: energies
/// `lambda(cos = cos(pi j / k))` for `j = 0..=k` with momentum witnesses.
pub fn kappa_points(p: &ModelParams, k: usize) -> Result<Vec<KappaPoint>, ModelError> {
    if k == 0 {
        return Err(ModelError::OrderZero);
    }
    let phi = p.phi();
    let mut out = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let angle = std::f64::consts::PI * j as f64 / k as f64;
        let cos_value = angle.cos();
        let t = p.lambda_from_cos(cos_value);
        // Both ±angle - phi solve cos(theta + phi) = cos_value; prefer a
        // representative in [0, pi] when one exists.
        let c1 = wrap_to_pi(angle - phi);
        let c2 = wrap_to_pi(-angle - phi);
        let theta = if (0.0..=std::f64::consts::PI).contains(&c1) {
            c1
        } else if (0.0..=std::f64::consts::PI).contains(&c2) {
            c2
        } else {
            c1
        };
        out.push(KappaPoint { j, cos_value, t, theta });
    }
    Ok(out)
}

/// Full signed threshold set for order `k`, sorted ascending with nearby
/// values merged.
///
/// `k = 0` is only defined for the gapless model, where it is `{±2|a|}` (the
/// band edges).
pub fn kappa_k(p: &ModelParams, k: usize) -> Result<Vec<f64>, ModelError> {
    let mut vals: Vec<f64> = if k == 0 {
        if !p.is_gapless() {
            return Err(ModelError::NotGapless {
                alpha: p.alpha,
                imbalance: p.abs_a() - p.abs_b(),
            });
        }
        vec![-p.lambda_max(), p.lambda_max()]
    } else {
        kappa_points(p, k)?
            .into_iter()
            .flat_map(|kp| [kp.t, -kp.t])
            .collect()
    };
    vals.sort_by(f64::total_cmp);
    vals.dedup_by(|x, y| (*x - *y).abs() <= KAPPA_DEDUP_TOL);
    Ok(vals)
}

/// Strict-sign intervals of the order-`k` commutator density inside the
/// bands: `positive` where the projected commutator is positive definite,
/// `negative` where its negative is, and `all` their union (the bands with
/// the thresholds removed).
#[derive(Debug, Clone, Serialize)]
pub struct MourreSets {
    pub order: usize,
    pub positive: Vec<(f64, f64)>,
    pub negative: Vec<(f64, f64)>,
    pub all: Vec<(f64, f64)>,
}

pub fn mu_sets(p: &ModelParams, k: usize) -> Result<MourreSets, ModelError> {
    if k == 0 {
        // Order-0 density 4|a|² - t² is positive on the whole open band.
        let edge = match kappa_k(p, 0) {
            Ok(v) => v[v.len() - 1],
            Err(e) => return Err(e),
        };
        return Ok(MourreSets {
            order: 0,
            positive: vec![(-edge, edge)],
            negative: vec![],
            all: vec![(-edge, edge)],
        });
    }
    let bands = spectral_bands(p);
    // The band-edge thresholds come out of `lambda_from_cos(±1)`, which can
    // differ from the `lambda_min`/`lambda_max` formulas by an ulp; a strict
    // containment filter would then drop an edge and lose the outermost sign
    // interval. Keep near-edge points and clamp them onto the band.
    let tol = 1e-12 * (1.0 + bands.lambda_max);
    let mut cut: Vec<f64> = kappa_k(p, k)?
        .into_iter()
        .filter(|t| *t >= 0.0 && *t >= bands.lambda_min - tol && *t <= bands.lambda_max + tol)
        .map(|t| t.clamp(bands.lambda_min, bands.lambda_max))
        .collect();
    cut.sort_by(f64::total_cmp);
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    let mut all = Vec::new();
    for w in cut.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo <= 1e-12 {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let sign = g_k_eval(p, k, mid)?;
        if sign > 0.0 {
            positive.push((lo, hi));
            negative.push((-hi, -lo));
        } else {
            negative.push((lo, hi));
            positive.push((-hi, -lo));
        }
        all.push((lo, hi));
        all.push((-hi, -lo));
    }
    positive.sort_by(|x, y| x.0.total_cmp(&y.0));
    negative.sort_by(|x, y| x.0.total_cmp(&y.0));
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(MourreSets { order: k, positive, negative, all })
}

/// Spectral projectors `(P_plus, P_minus)` of the symbol onto the `±lambda(theta)`
/// eigenvalues. Fails at (near-)conical points where the bands touch.
pub fn eig_projectors(p: &ModelParams, theta: f64) -> Result<(Mat2, Mat2), ModelError> {
    let lambda = band_function(p, theta);
    if lambda <= CONICAL_TOL {
        return Err(ModelError::ConicalPoint { theta, lambda });
    }
    let h = symbol(p, theta);
    let scaled = mat2::scale(&h, Complex64::new(1.0 / lambda, 0.0));
    let half = Complex64::new(0.5, 0.0);
    let plus = mat2::scale(&mat2::add(&mat2::identity(), &scaled), half);
    let minus = mat2::scale(&mat2::sub(&mat2::identity(), &scaled), half);
    Ok((plus, minus))
}

/// Expected value of the order-`k` commutator on a band state of energy `t`:
/// `sign(t)·g_k(|t|)` for `k ≥ 1` (the density is even but acts with opposite
/// signs on the two bands), and `4|a||b| − t²` for the gapless order-0
/// generator.
pub fn commutator_density(p: &ModelParams, k: usize, t: f64) -> Result<f64, ModelError> {
    if k == 0 {
        return Ok(4.0 * p.ab_product() - t * t);
    }
    if t == 0.0 {
        return Err(ModelError::ZeroEnergy);
    }
    Ok(t.signum() * g_k_eval(p, k, t.abs())?)
}

/// Momentum-space value of the order-`k` commutator on the upper band:
/// `U_{k-1}(cos(theta + phi)) · |a|²|b|² sin²(theta + phi) / lambda(theta)`,
/// extended by continuity (value `0`) through conical points.
///
/// As an identity this equals `g_k(lambda(theta))` — the basis of the
/// momentum-space consistency checks.
pub fn fourier_commutator_density(p: &ModelParams, k: usize, theta: f64) -> Result<f64, ModelError> {
    if k == 0 {
        return Err(ModelError::OrderZero);
    }
    let lambda = band_function(p, theta);
    if lambda <= CONICAL_TOL {
        return Ok(0.0);
    }
    let s = (theta + p.phi()).sin();
    let c = (theta + p.phi()).cos();
    let ab = p.ab_product();
    Ok(chebyshev_u(k - 1, c) * ab * ab * s * s / lambda)
}
