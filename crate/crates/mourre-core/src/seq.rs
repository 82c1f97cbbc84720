//! Lazily evaluated matrix sequences `n ↦ W(n) ∈ C^{2×2}`.
//!
//! Perturbations are handed around as closures so classifiers can probe them
//! at horizons (`10^6`–`10^7` sites and beyond) that no materialized array
//! should pay for. A CSV representation (one row per site, split into real
//! and imaginary parts) supports feeding externally produced sequences in and
//! getting bit-identical values back.

use crate::f17;
use crate::mat2::{Mat2, ZERO2};
use num_complex::Complex64;
use std::collections::HashMap;
use std::io;
use std::sync::Arc;
use thiserror::Error;

/// A named sequence of 2×2 matrices over the integers.
#[derive(Clone)]
pub struct MatrixSequence {
    label: String,
    f: Arc<dyn Fn(i64) -> Mat2 + Send + Sync>,
}

impl std::fmt::Debug for MatrixSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MatrixSequence").field("label", &self.label).finish_non_exhaustive()
    }
}

impl MatrixSequence {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(i64) -> Mat2 + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), f: Arc::new(f) }
    }

    /// Scalar sequence `f(n)·I`.
    pub fn scalar(label: impl Into<String>, f: impl Fn(i64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(label, move |n| {
            let v = Complex64::new(f(n), 0.0);
            [[v, Complex64::ZERO], [Complex64::ZERO, v]]
        })
    }

    /// Real diagonal sequence `diag(f(n).0, f(n).1)`.
    pub fn diagonal(
        label: impl Into<String>,
        f: impl Fn(i64) -> (f64, f64) + Send + Sync + 'static,
    ) -> Self {
        Self::new(label, move |n| {
            let (p, q) = f(n);
            [
                [Complex64::new(p, 0.0), Complex64::ZERO],
                [Complex64::ZERO, Complex64::new(q, 0.0)],
            ]
        })
    }

    pub fn zero() -> Self {
        Self::new("zero", |_| ZERO2)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, n: i64) -> Mat2 {
        (self.f)(n)
    }
}

pub const CSV_HEADER: [&str; 9] =
    ["n", "w11_re", "w11_im", "w12_re", "w12_im", "w21_re", "w21_im", "w22_re", "w22_im"];

#[derive(Debug, Error)]
pub enum SeqIoError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("unexpected header {found:?}; want {:?}", CSV_HEADER)]
    BadHeader { found: Vec<String> },
    #[error("row {row}: field `{field}` is not a number: {value:?}")]
    BadField { row: usize, field: &'static str, value: String },
}

/// Dump `seq` over the inclusive site range as CSV with full-precision
/// floats, so reading the file back reproduces the exact values.
pub fn write_sequence_csv<W: io::Write>(
    out: W,
    seq: &MatrixSequence,
    lo: i64,
    hi: i64,
) -> Result<(), SeqIoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for n in lo..=hi {
        let m = seq.eval(n);
        let mut rec = vec![n.to_string()];
        for row in &m {
            for z in row {
                rec.push(f17(z.re));
                rec.push(f17(z.im));
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a sequence CSV back into a map-backed [`MatrixSequence`]; sites not
/// listed in the file evaluate to zero.
pub fn read_sequence_csv<R: io::Read>(
    input: R,
    label: impl Into<String>,
) -> Result<MatrixSequence, SeqIoError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(SeqIoError::BadHeader { found: header });
    }
    let mut table: HashMap<i64, Mat2> = HashMap::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let field = |pos: usize| -> Result<f64, SeqIoError> {
            let raw = record.get(pos).unwrap_or("");
            raw.parse().map_err(|_| SeqIoError::BadField {
                row: idx + 1,
                field: CSV_HEADER[pos],
                value: raw.to_owned(),
            })
        };
        let n: i64 = record.get(0).unwrap_or("").parse().map_err(|_| SeqIoError::BadField {
            row: idx + 1,
            field: "n",
            value: record.get(0).unwrap_or("").to_owned(),
        })?;
        let mut m = ZERO2;
        for r in 0..2 {
            for c in 0..2 {
                let base = 1 + 4 * r + 2 * c;
                m[r][c] = Complex64::new(field(base)?, field(base + 1)?);
            }
        }
        table.insert(n, m);
    }
    let label = label.into();
    Ok(MatrixSequence::new(label, move |n| table.get(&n).copied().unwrap_or(ZERO2)))
}
