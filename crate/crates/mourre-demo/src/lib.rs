//! Browser playground for the block Dirac model.
//!
//! Three entry points, each returning a JSON string so the page needs no
//! extra glue: [`band_curve`] samples the dispersion relation, [`density_curve`]
//! evaluates the commutator density together with its threshold zeros, and
//! [`mourre_summary`] reports the intervals where the density has a sign.
//! Errors come back as `{"error": "..."}` instead of throwing, which keeps
//! the page logic to a single `JSON.parse`.
//!
//! The crate is plain Rust apart from the `#[wasm_bindgen]` attributes, so
//! the same functions run natively in the unit tests below.

use mourre_core::model::{
    commutator_density, kappa_k, mu_sets, spectral_bands, ModelParams,
};
use num_complex::Complex64;
use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

fn params(alpha: f64, a_re: f64, a_im: f64, b_re: f64, b_im: f64) -> Result<ModelParams, String> {
    ModelParams::new(
        alpha,
        Complex64::new(a_re, a_im),
        Complex64::new(b_re, b_im),
    )
    .map_err(|e| e.to_string())
}

fn to_json(value: &impl Serialize) -> String {
    serde_json::to_string(value).expect("report serializes")
}

fn error_json(message: String) -> String {
    #[derive(Serialize)]
    struct ErrorReport {
        error: String,
    }
    to_json(&ErrorReport { error: message })
}

#[derive(Serialize)]
struct BandCurve {
    lambda_min: f64,
    lambda_max: f64,
    gapless: bool,
    theta: Vec<f64>,
    lambda: Vec<f64>,
}

/// Sample the positive band function `lambda(theta)` on `[-pi, pi]`.
///
/// The spectrum of the free operator is `[-lambda_max, -lambda_min] u
/// [lambda_min, lambda_max]`; the page draws both `lambda` and its mirror.
#[wasm_bindgen]
pub fn band_curve(alpha: f64, a_re: f64, a_im: f64, b_re: f64, b_im: f64, points: usize) -> String {
    let p = match params(alpha, a_re, a_im, b_re, b_im) {
        Ok(p) => p,
        Err(e) => return error_json(e),
    };
    let n = points.max(2);
    let bands = spectral_bands(&p);
    let mut theta = Vec::with_capacity(n);
    let mut lambda = Vec::with_capacity(n);
    for i in 0..n {
        let th = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64;
        theta.push(th);
        lambda.push(mourre_core::model::band_function(&p, th));
    }
    to_json(&BandCurve {
        lambda_min: bands.lambda_min,
        lambda_max: bands.lambda_max,
        gapless: bands.gapless,
        theta,
        lambda,
    })
}

#[derive(Serialize)]
struct DensityCurve {
    k: usize,
    kappa: Vec<f64>,
    t: Vec<f64>,
    g: Vec<f64>,
}

/// Evaluate the order-`k` commutator density on a midpoint grid over both
/// bands, plus the threshold set `kappa_k` where it changes sign.
#[wasm_bindgen]
pub fn density_curve(
    alpha: f64,
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    k: usize,
    points: usize,
) -> String {
    let p = match params(alpha, a_re, a_im, b_re, b_im) {
        Ok(p) => p,
        Err(e) => return error_json(e),
    };
    let kappa = match kappa_k(&p, k) {
        Ok(v) => v,
        Err(e) => return error_json(e.to_string()),
    };
    let bands = spectral_bands(&p);
    let half = (points / 2).max(1);
    let step = (bands.lambda_max - bands.lambda_min) / half as f64;
    // Midpoints never hit t = 0, where the density is undefined.
    let upper: Vec<f64> = (0..half)
        .map(|j| bands.lambda_min + (j as f64 + 0.5) * step)
        .collect();
    let mut t: Vec<f64> = upper.iter().rev().map(|&x| -x).collect();
    t.extend(&upper);
    let mut g = Vec::with_capacity(t.len());
    for &x in &t {
        match commutator_density(&p, k, x) {
            Ok(v) => g.push(v),
            Err(e) => return error_json(e.to_string()),
        }
    }
    to_json(&DensityCurve { k, kappa, t, g })
}

#[derive(Serialize)]
struct MourreSummary {
    order: usize,
    lambda_min: f64,
    lambda_max: f64,
    gapless: bool,
    positive: Vec<(f64, f64)>,
    negative: Vec<(f64, f64)>,
    all: Vec<(f64, f64)>,
}

/// Report the maximal intervals on which the order-`k` density is positive,
/// negative, or merely nonzero, together with the band edges.
#[wasm_bindgen]
pub fn mourre_summary(alpha: f64, a_re: f64, a_im: f64, b_re: f64, b_im: f64, k: usize) -> String {
    let p = match params(alpha, a_re, a_im, b_re, b_im) {
        Ok(p) => p,
        Err(e) => return error_json(e),
    };
    let sets = match mu_sets(&p, k) {
        Ok(s) => s,
        Err(e) => return error_json(e.to_string()),
    };
    let bands = spectral_bands(&p);
    to_json(&MourreSummary {
        order: sets.order,
        lambda_min: bands.lambda_min,
        lambda_max: bands.lambda_max,
        gapless: bands.gapless,
        positive: sets.positive,
        negative: sets.negative,
        all: sets.all,
    })
}
