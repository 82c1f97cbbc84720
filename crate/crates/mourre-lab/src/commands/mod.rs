//! One module per command group: free-operator quantities, perturbation
//! classification, and the truncation probes.

pub mod classes;
pub mod probe;
pub mod spectral;

use crate::Failure;

/// Render CSV records (header plus rows) into a string.
pub fn csv_table(
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)
        .map_err(|e| Failure::Validation(format!("csv: {e}")))?;
    for row in rows {
        w.write_record(&row)
            .map_err(|e| Failure::Validation(format!("csv: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Failure::Validation(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Failure::Validation(format!("csv: {e}")))
}
