//! Perturbation-class commands: `classify` and `counterexample`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use serde::Serialize;

use mourre_core::band::WindowKind;
use mourre_core::classes::counterexample::{
    build_counterexample, counterexample_potential, dyadic_tent_family, verify_counterexample,
    CounterexampleReport, L1DifferenceReport,
};
use mourre_core::classes::{
    class_m, class_q, class_s, decay_rate_estimate, ClassVerdict, Verdict,
};
use mourre_core::f17;
use mourre_core::seq::write_sequence_csv;

use crate::config::{resolve_kind, resolve_pair, KindArg, PotentialArgs, RunConfig};
use crate::report;
use crate::Failure;

use super::csv_table;

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

#[derive(clap::Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,

    /// Class to test: `q` (weighted differences), `s` (short range),
    /// `m` (long range).
    #[arg(long, value_name = "CLASS")]
    pub class: Option<ClassArg>,

    /// Shift order k of the class (0 selects the gapless variants).
    #[arg(long, value_name = "K")]
    pub k: Option<usize>,

    /// Difference order for class `q`: 1 or 2.
    #[arg(long, value_name = "ORDER")]
    pub order: Option<u8>,

    /// Scan horizon in lattice sites.
    #[arg(long, value_name = "N")]
    pub horizon: Option<i64>,

    /// Annulus shape (beta, gamma) for the integral classes.
    #[arg(long, num_args = 2, value_names = ["BETA", "GAMMA"])]
    pub annulus: Option<Vec<f64>>,

    /// Lattice copy the sequence lives on.
    #[arg(long, value_name = "KIND")]
    pub kind: Option<KindArg>,

    /// Also dump the scanned sequence values as CSV to this file; feeding
    /// the dump back through `--from-csv` at the same horizon reproduces
    /// the verdict bit for bit.
    #[arg(long, value_name = "FILE")]
    pub dump: Option<PathBuf>,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassArg {
    Q,
    S,
    M,
}

#[derive(Serialize)]
struct ClassifyReport {
    anchor: &'static str,
    sequence: String,
    class: &'static str,
    kind: WindowKind,
    k: Option<usize>,
    order: Option<u8>,
    annulus: Option<[f64; 2]>,
    horizon: i64,
    verdict: Verdict,
    witness: BTreeMap<String, f64>,
    /// Fitted polynomial decay exponent of the entry envelope; logarithmic
    /// decay fits approximately zero.
    decay_rate: f64,
}

pub fn classify(args: &ClassifyArgs, cfg: &RunConfig) -> Result<String, Failure> {
    let class = match args.class {
        Some(c) => c,
        None => match cfg.class.as_deref() {
            Some("q") => ClassArg::Q,
            Some("s") => ClassArg::S,
            Some("m") => ClassArg::M,
            Some(other) => {
                return Err(Failure::Validation(format!(
                    "unknown class `{other}` (use q, s or m)"
                )))
            }
            None => return Err(Failure::Validation("classify needs --class".into())),
        },
    };
    let kind = resolve_kind(args.kind, cfg);
    let k = args.k.or(cfg.k).unwrap_or(1);
    let order = args.order.or(cfg.order).unwrap_or(2);
    if !matches!(order, 1 | 2) {
        return Err(Failure::Validation(format!("--order must be 1 or 2, got {order}")));
    }
    let horizon = args.horizon.or(cfg.horizon).unwrap_or(100_000);
    if horizon < 100 {
        return Err(Failure::Validation(format!(
            "horizon {horizon} is too small; the judges need at least 100 sites"
        )));
    }
    let (beta, gamma) =
        resolve_pair(&args.annulus, cfg.annulus, "annulus")?.unwrap_or((1.0, 2.0));
    let spec = args.potential.resolve(cfg)?.ok_or_else(|| {
        Failure::Validation(
            "classify needs a sequence: --family, --from-csv, or a config `potential`".into(),
        )
    })?;
    let seq = spec.build()?;

    let (label, cv): (&'static str, ClassVerdict) = match class {
        ClassArg::Q => ("q", class_q(&seq, kind, k, order, horizon)),
        ClassArg::S => ("s", class_s(&seq, kind, beta, gamma, horizon)?),
        ClassArg::M => ("m", class_m(&seq, kind, k, beta, gamma, horizon)?),
    };
    let decay_rate = decay_rate_estimate(&seq, kind, horizon)?;

    if let Some(path) = &args.dump {
        // Cover every site the classifiers can touch at this horizon: the
        // annulus scans stay below the horizon, the difference seminorms
        // reach 2k past it.
        let reach = horizon + 2 * k as i64 + 2;
        let lo = match kind {
            WindowKind::Bilateral => -reach,
            WindowKind::Unilateral => 0,
        };
        let file = File::create(path)
            .map_err(|e| Failure::Validation(format!("dump {}: {e}", path.display())))?;
        write_sequence_csv(BufWriter::new(file), &seq, lo, reach)?;
    }

    report::render(&ClassifyReport {
        anchor: match class {
            ClassArg::Q => "weighted_difference_class",
            ClassArg::S => "short_range_integrability",
            ClassArg::M => "long_range_integrability",
        },
        sequence: seq.label().to_string(),
        class: label,
        kind,
        k: match class {
            ClassArg::S => None,
            _ => Some(k),
        },
        order: match class {
            ClassArg::Q => Some(order),
            _ => None,
        },
        annulus: match class {
            ClassArg::Q => None,
            _ => Some([beta, gamma]),
        },
        horizon,
        verdict: cv.verdict,
        witness: cv.witness,
        decay_rate,
    })
}

// ---------------------------------------------------------------------------
// counterexample
// ---------------------------------------------------------------------------

#[derive(clap::Args, Debug)]
pub struct CounterexampleArgs {
    /// Subordinate bump family; `dyadic` is the only built-in.
    #[arg(long, value_name = "NAME")]
    pub family: Option<String>,

    /// Weight sequence a_n; `harmonic` (1/(n+1)) is the only built-in.
    #[arg(long = "a", value_name = "NAME")]
    pub weights: Option<String>,

    /// Largest window length p for the divergence checks.
    #[arg(long = "pmax", value_name = "P")]
    pub p_max: Option<usize>,

    /// Scan horizon in lattice sites.
    #[arg(long, value_name = "N")]
    pub horizon: Option<i64>,

    /// Number of bump blocks (default: as many as the horizon covers).
    #[arg(long, value_name = "COUNT")]
    pub blocks: Option<usize>,

    /// Also dump the coefficient series b_j as CSV (j, b) to this file.
    #[arg(long, value_name = "FILE")]
    pub dump: Option<PathBuf>,
}

#[derive(Serialize)]
struct CounterexampleCliReport {
    anchor: &'static str,
    family: &'static str,
    weights: &'static str,
    blocks: usize,
    p_max: usize,
    horizon: i64,
    /// The three construction properties, re-derived numerically.
    verification: CounterexampleReport,
    /// Class of the accumulated potential: member of the order-2 weighted
    /// difference class despite failing every integral condition.
    potential_class: PotentialClass,
    /// Entrywise p-step difference summability of the potential, per p.
    l1_difference: Vec<L1DifferenceReport>,
}

#[derive(Serialize)]
struct PotentialClass {
    k: usize,
    order: u8,
    verdict: Verdict,
    witness: BTreeMap<String, f64>,
}

pub fn counterexample(args: &CounterexampleArgs, cfg: &RunConfig) -> Result<String, Failure> {
    let family = args.family.clone().or_else(|| cfg.family.clone());
    match family.as_deref() {
        None | Some("dyadic") => {}
        Some(other) => {
            return Err(Failure::Validation(format!(
                "unknown bump family `{other}` (only `dyadic` is built in)"
            )))
        }
    }
    let weights = args.weights.clone().or_else(|| cfg.weights.clone());
    match weights.as_deref() {
        None | Some("harmonic") => {}
        Some(other) => {
            return Err(Failure::Validation(format!(
                "unknown weight sequence `{other}` (only `harmonic` is built in)"
            )))
        }
    }
    let p_max = args.p_max.or(cfg.p_max).unwrap_or(8);
    if p_max == 0 {
        return Err(Failure::Validation("--pmax must be at least 1".into()));
    }
    let horizon = args.horizon.or(cfg.horizon).unwrap_or(1 << 20);
    if horizon < 2 {
        return Err(Failure::Validation(format!("horizon {horizon} is too small")));
    }
    // Block n covers sites up to 2^(n+1) - 1, so the largest block the
    // horizon fully contains is log2(horizon + 1) - 1.
    let default_blocks = ((horizon + 1) as f64).log2().floor() as usize;
    let blocks = args.blocks.or(cfg.blocks).unwrap_or(default_blocks.max(13));
    if blocks == 0 {
        return Err(Failure::Validation("--blocks must be at least 1".into()));
    }
    let n_max = blocks - 1;

    let fam = dyadic_tent_family(n_max);
    let seq = build_counterexample(fam, |n| 1.0 / (n as f64 + 1.0))?;
    let verification = verify_counterexample(&seq, p_max, horizon)?;

    let potential = counterexample_potential(&seq);
    let qv = class_q(&potential, WindowKind::Unilateral, 1, 2, horizon);
    let l1 = (1..=p_max)
        .map(|p| l1_difference(&potential, p, horizon))
        .collect::<Vec<_>>();

    if let Some(path) = &args.dump {
        let top = seq.family().beta(seq.family().blocks() - 1);
        let rows = (0..=top).map(|j| vec![j.to_string(), f17(seq.b(j))]);
        let text = csv_table(&["j", "b"], rows)?;
        std::fs::write(path, text)
            .map_err(|e| Failure::Validation(format!("dump {}: {e}", path.display())))?;
    }

    report::render(&CounterexampleCliReport {
        anchor: "alternating_block_construction",
        family: "dyadic",
        weights: "harmonic",
        blocks: n_max + 1,
        p_max,
        horizon,
        verification,
        potential_class: PotentialClass {
            k: 1,
            order: 2,
            verdict: qv.verdict,
            witness: qv.witness,
        },
        l1_difference: l1,
    })
}

fn l1_difference(
    potential: &mourre_core::seq::MatrixSequence,
    p: usize,
    horizon: i64,
) -> L1DifferenceReport {
    mourre_core::classes::counterexample::l1_difference_test(
        potential,
        WindowKind::Unilateral,
        p,
        0,
        0,
        horizon,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PotentialArgs;

    #[test]
    fn classify_reports_the_member_verdict_for_fast_decay() {
        let args = ClassifyArgs {
            potential: PotentialArgs {
                family: Some("inverse_power".into()),
                p: Some(2.0),
                ..Default::default()
            },
            class: Some(ClassArg::S),
            k: None,
            order: None,
            horizon: Some(100_000),
            annulus: None,
            kind: None,
            dump: None,
        };
        let out = classify(&args, &RunConfig::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["verdict"], "member");
        assert_eq!(v["class"], "s");
        assert_eq!(v["anchor"], "short_range_integrability");
        assert!(v["decay_rate"].as_f64().unwrap() > 1.5);
    }

    #[test]
    fn classify_requires_a_sequence() {
        let args = ClassifyArgs {
            potential: PotentialArgs::default(),
            class: Some(ClassArg::Q),
            k: None,
            order: None,
            horizon: None,
            annulus: None,
            kind: None,
            dump: None,
        };
        assert!(matches!(
            classify(&args, &RunConfig::default()),
            Err(Failure::Validation(_))
        ));
    }

    #[test]
    fn counterexample_report_carries_all_three_checks() {
        let args = CounterexampleArgs {
            family: None,
            weights: None,
            p_max: Some(2),
            horizon: Some(1 << 14),
            blocks: None,
            dump: None,
        };
        let out = counterexample(&args, &RunConfig::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["verification"]["alternating_bound_ok"], true);
        assert_eq!(v["verification"]["linear_bound_ok"], true);
        assert_eq!(v["verification"]["quadratic_bound_ok"], true);
        assert_eq!(v["potential_class"]["verdict"], "member");
        assert_eq!(v["l1_difference"].as_array().unwrap().len(), 2);
    }
}
