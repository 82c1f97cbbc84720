//! Free-operator commands: `bands`, `kappa`, `g`, and `mourre`.

use serde::Serialize;

use mourre_core::band::{LatticeWindow, WindowKind};
use mourre_core::f17;
use mourre_core::lattice;
use mourre_core::linalg::DEFAULT_SEED;
use mourre_core::model::{
    self, commutator_density, fourier_commutator_density, g_k_eval, kappa_k, ModelParams,
    CONICAL_TOL,
};

use crate::config::{resolve_kind, resolve_pair, KindArg, ModelArgs, PotentialArgs, RunConfig};
use crate::report;
use crate::Failure;

use super::csv_table;

/// Order 0 exists only for the gapless model; every command taking `--k`
/// rejects the combination up front.
fn check_order(p: &ModelParams, k: usize) -> Result<(), Failure> {
    if k == 0 && !p.is_gapless() {
        return Err(Failure::Validation(format!(
            "k = 0 needs a gapless model (alpha = 0 and |a| = |b|); \
             got alpha = {:.3e}, |a| - |b| = {:.3e}",
            p.alpha(),
            p.abs_a() - p.abs_b()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// bands
// ---------------------------------------------------------------------------

#[derive(clap::Args, Debug)]
pub struct BandsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
}

pub fn bands(args: &BandsArgs, cfg: &RunConfig) -> Result<String, Failure> {
    let p = args.model.resolve(cfg)?;
    let has_gap = (!p.is_gapless()).to_string();
    // `0.0 - x` rather than `-x` so a touching band edge prints 0, not -0.
    let rows = vec![
        vec![
            "lower".to_string(),
            f17(0.0 - p.lambda_max()),
            f17(0.0 - p.lambda_min()),
            has_gap.clone(),
        ],
        vec!["upper".to_string(), f17(p.lambda_min()), f17(p.lambda_max()), has_gap],
    ];
    csv_table(&["band", "lo", "hi", "has_gap"], rows)
}

// ---------------------------------------------------------------------------
// kappa
// ---------------------------------------------------------------------------

#[derive(clap::Args, Debug)]
pub struct KappaArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Commutator order k (0 only for gapless models).
    #[arg(long, value_name = "K")]
    pub k: Option<usize>,
}

pub fn kappa(args: &KappaArgs, cfg: &RunConfig) -> Result<String, Failure> {
    let p = args.model.resolve(cfg)?;
    let k = args.k.or(cfg.k).unwrap_or(1);
    check_order(&p, k)?;
    let points = kappa_k(&p, k)?;
    let rows = points
        .into_iter()
        .map(|t| vec![k.to_string(), f17(t)])
        .collect::<Vec<_>>();
    csv_table(&["k", "point"], rows)
}

// ---------------------------------------------------------------------------
// g
// ---------------------------------------------------------------------------

#[derive(clap::Args, Debug)]
pub struct GArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Commutator order k.
    #[arg(long, value_name = "K")]
    pub k: Option<usize>,

    /// Explicit sample energies (t = 0 is rejected); repeat or separate
    /// with commas.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', value_name = "T,...")]
    pub t: Option<Vec<f64>>,

    /// Grid size for the default band sampling.
    #[arg(long, value_name = "COUNT")]
    pub points: Option<usize>,
}

pub fn g(args: &GArgs, cfg: &RunConfig) -> Result<String, Failure> {
    let p = args.model.resolve(cfg)?;
    let k = args.k.or(cfg.k).unwrap_or(1);
    check_order(&p, k)?;

    let ts: Vec<f64> = match args.t.clone().or_else(|| cfg.t_values.clone()) {
        Some(list) => {
            if list.is_empty() {
                return Err(Failure::Validation("--t needs at least one energy".into()));
            }
            list
        }
        None => {
            // Midpoint sampling of both bands: covers the spectrum, never
            // hits the excluded t = 0 even when the bands touch.
            let points = args.points.or(cfg.points).unwrap_or(512);
            let m = (points / 2).max(1);
            let (lo, hi) = (p.lambda_min(), p.lambda_max());
            let upper: Vec<f64> =
                (0..m).map(|j| lo + (j as f64 + 0.5) * (hi - lo) / m as f64).collect();
            upper.iter().rev().map(|t| -t).chain(upper.iter().copied()).collect()
        }
    };

    let mut rows = Vec::with_capacity(ts.len());
    for t in ts {
        let value = if k == 0 { commutator_density(&p, 0, t)? } else { g_k_eval(&p, k, t)? };
        rows.push(vec![f17(t), f17(value)]);
    }
    csv_table(&["t", "g"], rows)
}

// ---------------------------------------------------------------------------
// mourre
// ---------------------------------------------------------------------------

#[derive(clap::Args, Debug)]
pub struct MourreArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// `fourier` checks the symbol-side identity on a momentum grid;
    /// `truncated` compresses i[A, H] by a spectral window of a truncation.
    #[arg(long, value_name = "MODE")]
    pub mode: Option<ModeArg>,

    /// Commutator order k.
    #[arg(long, value_name = "K")]
    pub k: Option<usize>,

    /// Momentum grid size (fourier mode).
    #[arg(long, value_name = "COUNT")]
    pub points: Option<usize>,

    /// Energy window for the spectral projection (truncated mode).
    #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["LO", "HI"])]
    pub window: Option<Vec<f64>>,

    /// Lattice copy (truncated mode).
    #[arg(long, value_name = "KIND")]
    pub kind: Option<KindArg>,

    /// Window radius N (truncated mode).
    #[arg(long, alias = "N", value_name = "N")]
    pub n: Option<u32>,

    #[command(flatten)]
    pub potential: PotentialArgs,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    Fourier,
    Truncated,
}

#[derive(Serialize)]
struct FourierReport {
    anchor: &'static str,
    mode: &'static str,
    k: usize,
    points: usize,
    /// Largest gap between `g_k(lambda(theta))` and the symbol-side
    /// commutator density over the grid.
    max_deviation: f64,
}

#[derive(Serialize)]
struct TruncatedReport {
    anchor: &'static str,
    mode: &'static str,
    k: usize,
    kind: WindowKind,
    n: u32,
    window: [f64; 2],
    /// Smallest eigenvalue of the compressed commutator.
    min_eig: f64,
    /// Infimum of the commutator density over the window (the target value).
    density_infimum: Option<f64>,
    /// Number of eigenvalues inside the window.
    rank: usize,
}

pub fn mourre(args: &MourreArgs, cfg: &RunConfig) -> Result<String, Failure> {
    let p = args.model.resolve(cfg)?;
    let mode = match args.mode {
        Some(m) => m,
        None => match cfg.mode.as_deref() {
            None | Some("fourier") => ModeArg::Fourier,
            Some("truncated") => ModeArg::Truncated,
            Some(other) => {
                return Err(Failure::Validation(format!(
                    "unknown mode `{other}` (use fourier or truncated)"
                )))
            }
        },
    };
    let k = args.k.or(cfg.k).unwrap_or(1);

    match mode {
        ModeArg::Fourier => {
            if k == 0 {
                return Err(Failure::Validation(
                    "the symbol-side identity is an order k >= 1 statement; \
                     use --mode truncated for the gapless generator"
                        .into(),
                ));
            }
            let points = args.points.or(cfg.points).unwrap_or(1024);
            if points == 0 {
                return Err(Failure::Validation("--points must be positive".into()));
            }
            let mut max_dev = 0.0f64;
            for i in 0..points {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / points as f64;
                let lambda = model::band_function(&p, theta);
                let density = fourier_commutator_density(&p, k, theta)?;
                let dev = if lambda <= CONICAL_TOL {
                    density.abs()
                } else {
                    (g_k_eval(&p, k, lambda)? - density).abs()
                };
                max_dev = max_dev.max(dev);
            }
            report::render(&FourierReport {
                anchor: "fourier_commutator_identity",
                mode: "fourier",
                k,
                points,
                max_deviation: max_dev,
            })
        }
        ModeArg::Truncated => {
            check_order(&p, k)?;
            let (lo, hi) = resolve_pair(&args.window, cfg.window, "window")?
                .ok_or_else(|| {
                    Failure::Validation("truncated mode needs --window LO HI".into())
                })?;
            let kind = resolve_kind(args.kind, cfg);
            let n = args.n.or(cfg.lattice.n).unwrap_or(300);
            let seq = match args.potential.resolve(cfg)? {
                None => None,
                Some(spec) => Some(spec.build()?),
            };
            let window = LatticeWindow::new(kind, n);
            let pc = lattice::projected_commutator_min_eig(
                &p,
                k,
                seq.as_ref(),
                window,
                lo,
                hi,
                DEFAULT_SEED,
            )?;
            report::render(&TruncatedReport {
                anchor: "projected_commutator_positivity",
                mode: "truncated",
                k,
                kind,
                n,
                window: [lo, hi],
                min_eig: pc.min_eig,
                density_infimum: pc.density_infimum,
                rank: pc.rank,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Cx;

    fn dirac_args() -> ModelArgs {
        ModelArgs {
            alpha: Some(1.0),
            a: Some(Cx(num_complex::Complex64::new(1.0, 0.0))),
            b: Some(Cx(num_complex::Complex64::new(-1.0, 0.0))),
        }
    }

    #[test]
    fn bands_csv_lists_lower_then_upper() {
        let out = bands(&BandsArgs { model: dirac_args() }, &RunConfig::default()).unwrap();
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("band,lo,hi,has_gap"));
        let lower = lines.next().unwrap();
        assert!(lower.starts_with("lower,-2.23"), "{lower}");
        assert!(lower.ends_with("true"), "{lower}");
        let upper = lines.next().unwrap();
        assert!(upper.starts_with("upper,1.00"), "{upper}");
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn g_defaults_to_a_band_grid_without_zero() {
        let args = GArgs { model: dirac_args(), k: Some(1), t: None, points: Some(16) };
        let out = g(&args, &RunConfig::default()).unwrap();
        let rows: Vec<&str> = out.lines().skip(1).collect();
        assert_eq!(rows.len(), 16);
        for row in rows {
            let t: f64 = row.split(',').next().unwrap().parse().unwrap();
            assert!(t.abs() >= 1.0, "grid point {t} left the bands");
        }
    }

    #[test]
    fn order_zero_needs_a_gapless_model() {
        let args = KappaArgs { model: dirac_args(), k: Some(0) };
        match kappa(&args, &RunConfig::default()) {
            Err(Failure::Validation(msg)) => assert!(msg.contains("gapless"), "{msg}"),
            other => panic!("expected validation failure, got {other:?}"),
        }
    }
}
