//! The JSON run configuration and the flag-side argument bundles shared by
//! several subcommands.
//!
//! Resolution order for every setting is flag, then config field, then
//! default. A config document is validated against the owning command's key
//! set before anything is computed, so a file written for `lap` fed to
//! `bands` fails fast instead of being silently ignored.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use num_complex::Complex64;
use serde::Deserialize;

use mourre_core::band::WindowKind;
use mourre_core::classes::families::FamilySpec;
use mourre_core::classes::RateMode;
use mourre_core::model::ModelParams;

use crate::Failure;

/// Keys every command accepts in addition to its own.
const COMMON_KEYS: &[&str] = &["output"];

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelBlock,
    #[serde(default)]
    pub lattice: LatticeBlock,
    pub k: Option<usize>,
    pub order: Option<u8>,
    pub class: Option<String>,
    pub mode: Option<String>,
    pub points: Option<usize>,
    pub t_values: Option<Vec<f64>>,
    pub window: Option<[f64; 2]>,
    pub annulus: Option<[f64; 2]>,
    pub horizon: Option<i64>,
    pub potential: Option<FamilySpec>,
    pub s: Option<f64>,
    pub x_grid: Option<Vec<f64>>,
    pub eps_list: Option<Vec<f64>>,
    pub sizes: Option<Vec<u32>>,
    pub family: Option<String>,
    pub weights: Option<String>,
    pub p_max: Option<usize>,
    pub blocks: Option<usize>,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub alpha: Option<f64>,
    pub a_re: Option<f64>,
    pub a_im: Option<f64>,
    pub b_re: Option<f64>,
    pub b_im: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeBlock {
    pub kind: Option<WindowKind>,
    pub n: Option<u32>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub path: Option<PathBuf>,
    pub format: Option<String>,
}

/// Parse and key-check the JSON config for one command.
pub fn load(path: &Path, allowed: &[&str]) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("config {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Validation(format!("config {}: {e}", path.display())))?;
    let Some(map) = value.as_object() else {
        return Err(Failure::Validation(format!(
            "config {}: top level must be a JSON object",
            path.display()
        )));
    };
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) && !COMMON_KEYS.contains(&key.as_str()) {
            return Err(Failure::Validation(format!(
                "config field `{key}` is not used by this command (accepted: {})",
                allowed
                    .iter()
                    .chain(COMMON_KEYS)
                    .map(|k| format!("`{k}`"))
                    .collect::<Vec<_>>()
                    .join(", ")
            )));
        }
    }
    serde_json::from_value(value)
        .map_err(|e| Failure::Validation(format!("config {}: {e}", path.display())))
}

/// A complex flag value: `re` or `re,im`.
#[derive(Debug, Clone, Copy)]
pub struct Cx(pub Complex64);

impl FromStr for Cx {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.splitn(3, ',');
        let re = parts.next().unwrap_or("").trim();
        let re: f64 = re.parse().map_err(|_| format!("`{re}` is not a number"))?;
        let im = match parts.next() {
            None => 0.0,
            Some(raw) => {
                let raw = raw.trim();
                raw.parse().map_err(|_| format!("`{raw}` is not a number"))?
            }
        };
        if parts.next().is_some() {
            return Err("expected `re` or `re,im`".to_string());
        }
        Ok(Cx(Complex64::new(re, im)))
    }
}

/// Free-operator coefficients, shared by every command that builds one.
#[derive(clap::Args, Debug, Clone, Copy, Default)]
pub struct ModelArgs {
    /// Mass term alpha.
    #[arg(long, allow_hyphen_values = true, value_name = "X")]
    pub alpha: Option<f64>,

    /// Near coupling a, as `re` or `re,im` (nonzero).
    #[arg(long, allow_hyphen_values = true, value_name = "RE[,IM]")]
    pub a: Option<Cx>,

    /// Far coupling b, as `re` or `re,im` (nonzero).
    #[arg(long, allow_hyphen_values = true, value_name = "RE[,IM]")]
    pub b: Option<Cx>,
}

impl ModelArgs {
    pub fn resolve(&self, cfg: &RunConfig) -> Result<ModelParams, Failure> {
        let alpha = self.alpha.or(cfg.model.alpha).unwrap_or(1.0);
        let a = match self.a {
            Some(cx) => cx.0,
            None => Complex64::new(
                cfg.model.a_re.unwrap_or(1.0),
                cfg.model.a_im.unwrap_or(0.0),
            ),
        };
        let b = match self.b {
            Some(cx) => cx.0,
            None => Complex64::new(
                cfg.model.b_re.unwrap_or(-1.0),
                cfg.model.b_im.unwrap_or(0.0),
            ),
        };
        ModelParams::new(alpha, a, b).map_err(Into::into)
    }
}

/// Which copy of the lattice a command truncates.
#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindArg {
    /// Sites -N..=N of the full lattice.
    Bilateral,
    /// Sites 0..=N of the half lattice.
    Unilateral,
}

impl From<KindArg> for WindowKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Bilateral => WindowKind::Bilateral,
            KindArg::Unilateral => WindowKind::Unilateral,
        }
    }
}

pub fn resolve_kind(flag: Option<KindArg>, cfg: &RunConfig) -> WindowKind {
    flag.map(WindowKind::from)
        .or(cfg.lattice.kind)
        .unwrap_or(WindowKind::Bilateral)
}

/// Perturbation selection, as a named family plus its parameters or a dumped
/// sequence CSV. Commands that take no perturbation simply omit this bundle.
#[derive(clap::Args, Debug, Clone, Default)]
pub struct PotentialArgs {
    /// Perturbation family: inverse_log, inverse_power, harmonic, sin_slow,
    /// constant, constant_offdiag, omega_rate, alternating_blocks.
    #[arg(long, value_name = "NAME")]
    pub family: Option<String>,

    /// Family exponent p (inverse_power, sin_slow).
    #[arg(long, allow_hyphen_values = true, value_name = "X")]
    pub p: Option<f64>,

    /// Family amplitude (constant, constant_offdiag).
    #[arg(long, allow_hyphen_values = true, value_name = "X")]
    pub value: Option<f64>,

    /// Iterated-logarithm depth l (omega_rate).
    #[arg(long, value_name = "L")]
    pub l: Option<u32>,

    /// Outer-logarithm exponent r (omega_rate).
    #[arg(long, allow_hyphen_values = true, value_name = "X")]
    pub r: Option<f64>,

    /// Decay profile for omega_rate: s_rate or mk_rate.
    #[arg(long, value_name = "MODE")]
    pub rate_mode: Option<String>,

    /// Shift order of the omega_rate profile.
    #[arg(long, value_name = "K")]
    pub rate_k: Option<usize>,

    /// Block count (alternating_blocks).
    #[arg(long, value_name = "COUNT")]
    pub n_max: Option<usize>,

    /// Read the sequence from a dumped CSV file instead of a named family.
    #[arg(long, value_name = "FILE", conflicts_with = "family")]
    pub from_csv: Option<PathBuf>,
}

impl PotentialArgs {
    pub fn resolve(&self, cfg: &RunConfig) -> Result<Option<FamilySpec>, Failure> {
        if let Some(path) = &self.from_csv {
            return Ok(Some(FamilySpec::Csv { path: path.clone() }));
        }
        let Some(name) = &self.family else {
            return Ok(cfg.potential.clone());
        };
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| {
                Failure::Validation(format!("family `{name}` needs --{flag}"))
            })
        };
        let spec = match name.as_str() {
            "inverse_log" => FamilySpec::InverseLog,
            "inverse_power" => FamilySpec::InversePower { p: need(self.p, "p")? },
            "harmonic" => FamilySpec::Harmonic,
            "sin_slow" => FamilySpec::SinSlow { p: need(self.p, "p")? },
            "constant" => FamilySpec::Constant { value: need(self.value, "value")? },
            "constant_offdiag" => {
                FamilySpec::ConstantOffdiag { value: need(self.value, "value")? }
            }
            "omega_rate" => {
                let mode = match self.rate_mode.as_deref() {
                    None | Some("s_rate") => RateMode::SRate,
                    Some("mk_rate") => RateMode::MkRate,
                    Some(other) => {
                        return Err(Failure::Validation(format!(
                            "unknown rate mode `{other}` (use s_rate or mk_rate)"
                        )))
                    }
                };
                FamilySpec::OmegaRate {
                    l: self.l.unwrap_or(0),
                    r: need(self.r, "r")?,
                    mode,
                    k: self.rate_k.unwrap_or(1),
                }
            }
            "alternating_blocks" => {
                FamilySpec::AlternatingBlocks { n_max: self.n_max.unwrap_or(19) }
            }
            other => {
                return Err(Failure::Validation(format!("unknown family `{other}`")))
            }
        };
        Ok(Some(spec))
    }
}

/// Resolve a two-element `[lo, hi]` pair from a flag (given as two values)
/// or a config field, enforcing `lo < hi`.
pub fn resolve_pair(
    flag: &Option<Vec<f64>>,
    cfg_value: Option<[f64; 2]>,
    what: &str,
) -> Result<Option<(f64, f64)>, Failure> {
    let pair = match flag {
        Some(v) if v.len() == 2 => Some([v[0], v[1]]),
        Some(_) => {
            return Err(Failure::Validation(format!("--{what} takes exactly two values")))
        }
        None => cfg_value,
    };
    match pair {
        None => Ok(None),
        Some([lo, hi]) => {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Failure::Validation(format!(
                    "{what} [{lo}, {hi}] must satisfy lo < hi"
                )));
            }
            Ok(Some((lo, hi)))
        }
    }
}

/// Output format for commands that can emit both tables and reports.
#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatArg {
    Csv,
    Json,
}

pub fn resolve_format(
    flag: Option<FormatArg>,
    cfg: &RunConfig,
    default: FormatArg,
) -> Result<FormatArg, Failure> {
    if let Some(f) = flag {
        return Ok(f);
    }
    match cfg.output.format.as_deref() {
        None => Ok(default),
        Some("csv") => Ok(FormatArg::Csv),
        Some("json") => Ok(FormatArg::Json),
        Some(other) => Err(Failure::Validation(format!(
            "unknown output format `{other}` (use csv or json)"
        ))),
    }
}
