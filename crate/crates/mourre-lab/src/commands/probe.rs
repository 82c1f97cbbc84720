//! Truncation-probe commands: `eigs`, `edge`, and `lap`.

use serde::Serialize;

use mourre_core::band::{LatticeWindow, WindowKind};
use mourre_core::lattice::build_hamiltonian;
use mourre_core::linalg::DEFAULT_SEED;
use mourre_core::probe::{
    edge_state_check, lap_scan, truncation_stable_eigs, write_eig_csv, write_lap_csv,
    EdgeReport, LapScanReport, StableEig,
};

use crate::config::{
    resolve_format, resolve_kind, resolve_pair, FormatArg, KindArg, ModelArgs, PotentialArgs,
    RunConfig,
};
use crate::report;
use crate::Failure;

// ---------------------------------------------------------------------------
// eigs
// ---------------------------------------------------------------------------

#[derive(clap::Args, Debug)]
pub struct EigsArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Lattice copy.
    #[arg(long, value_name = "KIND")]
    pub kind: Option<KindArg>,

    /// Increasing ladder of window radii used to separate genuine point
    /// spectrum from truncation artifacts.
    #[arg(long, value_delimiter = ',', value_name = "N1,N2,...")]
    pub sizes: Option<Vec<u32>>,

    /// Energy window to search (default: the spectral gap).
    #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["LO", "HI"])]
    pub window: Option<Vec<f64>>,

    #[command(flatten)]
    pub potential: PotentialArgs,

    /// Output layout: `csv` rows or a `json` report.
    #[arg(long, value_name = "FMT")]
    pub format: Option<FormatArg>,
}

#[derive(Serialize)]
struct EigsReport {
    anchor: &'static str,
    kind: WindowKind,
    sizes: Vec<u32>,
    window: [f64; 2],
    eigenvalues: Vec<StableEig>,
}

pub fn eigs(args: &EigsArgs, cfg: &RunConfig) -> Result<String, Failure> {
    let p = args.model.resolve(cfg)?;
    let kind = resolve_kind(args.kind, cfg);
    let sizes = args
        .sizes
        .clone()
        .or_else(|| cfg.sizes.clone())
        .unwrap_or_else(|| vec![200, 400]);
    let (lo, hi) = match resolve_pair(&args.window, cfg.window, "window")? {
        Some(pair) => pair,
        None => {
            if p.is_gapless() {
                return Err(Failure::Validation(
                    "the bands touch, so there is no default gap window; give --window LO HI"
                        .into(),
                ));
            }
            let edge = p.lambda_min() - 1e-9;
            (-edge, edge)
        }
    };
    let seq = match args.potential.resolve(cfg)? {
        None => None,
        Some(spec) => Some(spec.build()?),
    };
    let build =
        |n: u32| build_hamiltonian(&p, seq.as_ref(), LatticeWindow::new(kind, n));
    let found = truncation_stable_eigs(build, &sizes, lo, hi, DEFAULT_SEED)?;

    match resolve_format(args.format, cfg, FormatArg::Csv)? {
        FormatArg::Csv => {
            let mut buf = Vec::new();
            write_eig_csv(&mut buf, &found)?;
            String::from_utf8(buf).map_err(|e| Failure::Validation(format!("csv: {e}")))
        }
        FormatArg::Json => report::render(&EigsReport {
            anchor: "truncation_stable_point_spectrum",
            kind,
            sizes,
            window: [lo, hi],
            eigenvalues: found,
        }),
    }
}

// ---------------------------------------------------------------------------
// edge
// ---------------------------------------------------------------------------

#[derive(clap::Args, Debug)]
pub struct EdgeArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Half-lattice truncation length (the probe also runs 2N).
    #[arg(long, alias = "N", value_name = "N")]
    pub n: Option<u32>,
}

#[derive(Serialize)]
struct EdgeCliReport {
    anchor: &'static str,
    n: u32,
    #[serde(flatten)]
    report: EdgeReport,
}

pub fn edge(args: &EdgeArgs, cfg: &RunConfig) -> Result<String, Failure> {
    if cfg.lattice.kind == Some(WindowKind::Bilateral) {
        return Err(Failure::Validation(
            "the boundary mode lives on the half lattice; drop `lattice.kind: bilateral`"
                .into(),
        ));
    }
    let p = args.model.resolve(cfg)?;
    let n = args.n.or(cfg.lattice.n).unwrap_or(400);
    if n < 2 {
        return Err(Failure::Validation(format!("--n {n} is too small")));
    }
    let rep = edge_state_check(&p, n, DEFAULT_SEED)?;
    report::render(&EdgeCliReport { anchor: "half_lattice_boundary_mode", n, report: rep })
}

// ---------------------------------------------------------------------------
// lap
// ---------------------------------------------------------------------------

#[derive(clap::Args, Debug)]
pub struct LapArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Lattice copy.
    #[arg(long, value_name = "KIND")]
    pub kind: Option<KindArg>,

    /// Window radius N; must resolve the smallest epsilon.
    #[arg(long, alias = "N", value_name = "N")]
    pub n: Option<u32>,

    /// Weight exponent s of the diagonal <n>^-s.
    #[arg(long, value_name = "S")]
    pub s: Option<f64>,

    /// Energies x to probe; repeat or separate with commas.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', value_name = "X,...")]
    pub x: Option<Vec<f64>>,

    /// Imaginary offsets epsilon for the z = x + i*eps ladder.
    #[arg(long, value_delimiter = ',', value_name = "E1,E2,...")]
    pub eps: Option<Vec<f64>>,

    #[command(flatten)]
    pub potential: PotentialArgs,

    /// Output layout: `csv` grid rows or a `json` report with the per-x
    /// plateau analysis.
    #[arg(long, value_name = "FMT")]
    pub format: Option<FormatArg>,
}

#[derive(Serialize)]
struct LapCliReport {
    anchor: &'static str,
    s: f64,
    kind: WindowKind,
    #[serde(flatten)]
    report: LapScanReport,
}

pub fn lap(args: &LapArgs, cfg: &RunConfig) -> Result<String, Failure> {
    let p = args.model.resolve(cfg)?;
    let kind = resolve_kind(args.kind, cfg);
    let n = args.n.or(cfg.lattice.n).unwrap_or(4000);
    let s = args.s.or(cfg.s).unwrap_or(1.0);
    if !(s > 0.0) {
        return Err(Failure::Validation(format!("weight exponent s must be positive, got {s}")));
    }
    let xs = args
        .x
        .clone()
        .or_else(|| cfg.x_grid.clone())
        .ok_or_else(|| Failure::Validation("lap needs --x (or config `x_grid`)".into()))?;
    let eps = args
        .eps
        .clone()
        .or_else(|| cfg.eps_list.clone())
        .unwrap_or_else(|| vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3]);
    let seq = match args.potential.resolve(cfg)? {
        None => None,
        Some(spec) => Some(spec.build()?),
    };
    let scan = lap_scan(&p, seq.as_ref(), LatticeWindow::new(kind, n), s, &xs, &eps)?;

    match resolve_format(args.format, cfg, FormatArg::Csv)? {
        FormatArg::Csv => {
            let mut buf = Vec::new();
            write_lap_csv(&mut buf, &scan)?;
            String::from_utf8(buf).map_err(|e| Failure::Validation(format!("csv: {e}")))
        }
        FormatArg::Json => report::render(&LapCliReport {
            anchor: "weighted_resolvent_boundary_values",
            s,
            kind,
            report: scan,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Cx;
    use num_complex::Complex64;

    fn ssh_edge_args(n: Option<u32>) -> EdgeArgs {
        EdgeArgs {
            model: ModelArgs {
                alpha: Some(0.5),
                a: Some(Cx(Complex64::new(1.0, 0.0))),
                b: Some(Cx(Complex64::new(2.0, 0.0))),
            },
            n,
        }
    }

    #[test]
    fn edge_reports_the_boundary_mode() {
        let out = edge(&ssh_edge_args(Some(80)), &RunConfig::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["anchor"], "half_lattice_boundary_mode");
        assert!((v["lambda"].as_f64().unwrap() + 0.5).abs() < 1e-8);
        assert!((v["decay_ratio"].as_f64().unwrap() - 0.5).abs() < 1e-2);
        assert_eq!(v["stable"], true);
    }

    #[test]
    fn edge_rejects_a_bilateral_config() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"lattice": {"kind": "bilateral"}}"#).unwrap();
        assert!(matches!(
            edge(&ssh_edge_args(None), &cfg),
            Err(Failure::Validation(_))
        ));
    }

    #[test]
    fn lap_requires_an_energy_grid() {
        let args = LapArgs {
            model: ModelArgs::default(),
            kind: None,
            n: Some(100),
            s: None,
            x: None,
            eps: None,
            potential: PotentialArgs::default(),
            format: None,
        };
        match lap(&args, &RunConfig::default()) {
            Err(Failure::Validation(msg)) => assert!(msg.contains("--x"), "{msg}"),
            other => panic!("expected validation failure, got {other:?}"),
        }
    }
}
