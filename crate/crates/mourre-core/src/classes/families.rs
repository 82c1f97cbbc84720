//! Named perturbation families used by the tests, the benchmarks and the
//! command line.
//!
//! Each builder returns a plain [`MatrixSequence`]; [`FamilySpec`] is the
//! serializable form used in JSON configs.

use std::fs::File;
use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

use super::counterexample::{build_counterexample, counterexample_potential, dyadic_tent_family};
use super::{make_longrange_example, ClassError, RateMode, WeightSpec};
use crate::mat2::ZERO2;
use crate::seq::{read_sequence_csv, MatrixSequence, SeqIoError};

/// `I_2 / ln(1 + <n>)`: logarithmic decay.  The reference example of a
/// sequence with bounded weighted differences whose entries decay slower
/// than any power — dispersive-estimate hypotheses of the form
/// `|W_ij(n)| <= C (1+|n|)^{-rho}` fail for it for every `rho > 0`.
pub fn inverse_log() -> MatrixSequence {
    MatrixSequence::scalar("inverse-log", |n| 1.0 / (1.0 + (n as f64).hypot(1.0)).ln())
}

/// `I_2 / <n>^p`: polynomial decay.
pub fn inverse_power(p: f64) -> MatrixSequence {
    MatrixSequence::scalar(format!("inverse-power({p})"), move |n| {
        (n as f64).hypot(1.0).powf(-p)
    })
}

/// `I_2 / (1 + |n|)`: the harmonic borderline — not quite integrable, the
/// canonical short-range nonmember with logarithmic divergence.
pub fn harmonic() -> MatrixSequence {
    MatrixSequence::scalar("harmonic", |n| 1.0 / (1.0 + n.abs() as f64))
}

/// `I_2 sin(n) / <n>^p`: oscillation with slow envelope decay.  Its first
/// difference does not decay like `1/n`, so the weighted difference
/// seminorms grow — a Q-class nonmember probe.
pub fn sin_slow(p: f64) -> MatrixSequence {
    MatrixSequence::scalar(format!("sin-slow({p})"), move |n| {
        (n as f64).sin() / (n as f64).hypot(1.0).powf(p)
    })
}

/// Constant scalar sequence `value * I_2`.
pub fn constant(value: f64) -> MatrixSequence {
    MatrixSequence::scalar(format!("constant({value})"), move |_| value)
}

/// Constant off-diagonal block `[[0, value], [value, 0]]`: the witness that
/// the gapless (`k = 0`) classes are strictly finer than the `k = 1` ones —
/// its first difference vanishes while its anisotropy seminorm does not.
pub fn constant_offdiag(value: f64) -> MatrixSequence {
    MatrixSequence::new(format!("constant-offdiag({value})"), move |_| {
        let mut m = ZERO2;
        m[0][1] = Complex64::new(value, 0.0);
        m[1][0] = Complex64::new(value, 0.0);
        m
    })
}

/// The alternating-block potential over dyadic tents with harmonic weights
/// `a_n = 1/(n+1)`; see [`super::counterexample`].
pub fn alternating_blocks(n_max: usize) -> Result<MatrixSequence, ClassError> {
    let seq = build_counterexample(dyadic_tent_family(n_max), |n| 1.0 / (n as f64 + 1.0))?;
    Ok(counterexample_potential(&seq))
}

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error(transparent)]
    Class(#[from] ClassError),
    #[error(transparent)]
    Seq(#[from] SeqIoError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn default_rate_k() -> usize {
    1
}

fn default_block_count() -> usize {
    19
}

/// Serializable family selector for configs and the command line.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    InverseLog,
    InversePower { p: f64 },
    Harmonic,
    SinSlow { p: f64 },
    Constant { value: f64 },
    ConstantOffdiag { value: f64 },
    OmegaRate {
        l: u32,
        r: f64,
        mode: RateMode,
        #[serde(default = "default_rate_k")]
        k: usize,
    },
    AlternatingBlocks {
        #[serde(default = "default_block_count")]
        n_max: usize,
    },
    /// Load a sequence from a CSV file in the standard column layout.
    Csv { path: PathBuf },
}

impl FamilySpec {
    pub fn build(&self) -> Result<MatrixSequence, FamilyError> {
        Ok(match self {
            FamilySpec::InverseLog => inverse_log(),
            FamilySpec::InversePower { p } => inverse_power(*p),
            FamilySpec::Harmonic => harmonic(),
            FamilySpec::SinSlow { p } => sin_slow(*p),
            FamilySpec::Constant { value } => constant(*value),
            FamilySpec::ConstantOffdiag { value } => constant_offdiag(*value),
            FamilySpec::OmegaRate { l, r, mode, k } => {
                make_longrange_example(WeightSpec { l: *l, r: *r }, *mode, *k)
            }
            FamilySpec::AlternatingBlocks { n_max } => alternating_blocks(*n_max)?,
            FamilySpec::Csv { path } => {
                let label = path.display().to_string();
                read_sequence_csv(File::open(path)?, label)?
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::write_sequence_csv;

    #[test]
    fn builders_evaluate_everywhere() {
        let families = [
            inverse_log(),
            inverse_power(2.0),
            harmonic(),
            sin_slow(0.1),
            constant(3.0),
            constant_offdiag(0.5),
            alternating_blocks(12).unwrap(),
        ];
        for w in &families {
            for n in [-1_000_000i64, -3, 0, 5, 999_999] {
                let m = w.eval(n);
                assert!(
                    m.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite()),
                    "{} at n = {n}",
                    w.label()
                );
            }
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let specs = [
            FamilySpec::InverseLog,
            FamilySpec::InversePower { p: 1.5 },
            FamilySpec::SinSlow { p: 0.1 },
            FamilySpec::OmegaRate { l: 0, r: 2.0, mode: RateMode::SRate, k: 1 },
            FamilySpec::AlternatingBlocks { n_max: 16 },
            FamilySpec::Csv { path: PathBuf::from("/tmp/w.csv") },
        ];
        for spec in specs {
            let json = serde_json::to_string(&spec).unwrap();
            let back: FamilySpec = serde_json::from_str(&json).unwrap();
            assert_eq!(back, spec, "json: {json}");
        }
        // Tagged names are stable: they are part of the config format.
        let json = serde_json::to_string(&FamilySpec::InverseLog).unwrap();
        assert_eq!(json, r#"{"family":"inverse_log"}"#);
        // Defaults fill in when omitted.
        let spec: FamilySpec = serde_json::from_str(r#"{"family":"alternating_blocks"}"#).unwrap();
        assert_eq!(spec, FamilySpec::AlternatingBlocks { n_max: 19 });
    }

    #[test]
    fn csv_spec_loads_what_was_written() {
        let path = std::env::temp_dir().join(format!("family-spec-{}.csv", std::process::id()));
        let w = inverse_power(2.0);
        let mut buf = Vec::new();
        write_sequence_csv(&mut buf, &w, -40, 40).unwrap();
        std::fs::write(&path, &buf).unwrap();

        let spec = FamilySpec::Csv { path: path.clone() };
        let loaded = spec.build().unwrap();
        for n in -40..=40 {
            assert_eq!(loaded.eval(n), w.eval(n), "n = {n}");
        }
        assert_eq!(loaded.eval(900), crate::mat2::ZERO2);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn missing_csv_reports_io_error() {
        let spec = FamilySpec::Csv { path: PathBuf::from("/nonexistent/nowhere.csv") };
        assert!(matches!(spec.build(), Err(FamilyError::Io(_))));
    }
}
