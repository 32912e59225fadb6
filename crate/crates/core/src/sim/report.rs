//! CSV output: per-packet `detail` rows followed by per-cell `summary` rows,
//! sharing one header. Fields a row kind does not use are left empty.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{SummaryRow, TrialRecord};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 21] = [
    "kind",
    "snr_db",
    "scheme",
    "code",
    "packet",
    "mse",
    "ber",
    "decoded1",
    "decoded2",
    "iterations",
    "rate",
    "h13_re",
    "h13_im",
    "h23_re",
    "h23_im",
    "stream",
    "mean_mse",
    "mean_ber",
    "delta_snr_db",
    "prop1_bound_db",
    "extrapolation_flag",
];

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn detail_row(r: &TrialRecord) -> Vec<String> {
    let mut row = vec![
        "detail".to_string(),
        num(r.snr_db),
        r.scheme.to_string(),
        r.code.to_string(),
        r.packet.to_string(),
        num(r.mse),
        num(r.ber),
        r.decoded1.to_string(),
        r.decoded2.to_string(),
        r.iterations.to_string(),
        num(r.rate),
        num(r.h13.re),
        num(r.h13.im),
        num(r.h23.re),
        num(r.h23.im),
        r.stream.to_string(),
    ];
    row.resize(CSV_HEADER.len(), String::new());
    row
}

fn summary_row(s: &SummaryRow) -> Vec<String> {
    let mut row = vec![String::new(); CSV_HEADER.len()];
    row[0] = "summary".into();
    row[1] = num(s.snr_db);
    row[2] = s.scheme.to_string();
    row[3] = s.code.to_string();
    row[4] = s.packets.to_string();
    row[16] = num(s.mean_mse);
    row[17] = num(s.mean_ber);
    row[18] = s.delta_snr_db.map(num).unwrap_or_default();
    row[19] = num(s.prop1_bound_db);
    row[20] = s.extrapolated.to_string();
    row
}

/// Writes all rows to `w`. In summary rows the `packet` column holds the
/// packet count of the cell.
pub fn write_csv<W: Write>(records: &[TrialRecord], summaries: &[SummaryRow], w: W) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no trial records to write".into()));
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in records {
        out.write_record(detail_row(r))?;
    }
    for s in summaries {
        out.write_record(summary_row(s))?;
    }
    out.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[TrialRecord], summaries: &[SummaryRow], path: &Path) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    write_csv(records, summaries, file)
}
