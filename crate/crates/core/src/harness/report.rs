//! CSV output for coverage reports.

use std::io::Write;

use super::coverage::CoverageReport;
use crate::Result;

pub const REPORT_HEADER: [&str; 7] = [
    "method",
    "n",
    "coverage",
    "mean_length",
    "median_length",
    "discarded",
    "seed",
];

/// Writes `method,n,coverage,mean_length,median_length,discarded,seed`.
///
/// Wall time stays out of the file so reruns compare byte for byte.
pub fn write_reports<W: Write>(w: W, reports: &[CoverageReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(REPORT_HEADER)?;
    for r in reports {
        let e = &r.config.experiment;
        for row in &r.rows {
            out.write_record([
                row.method.to_string(),
                e.n.to_string(),
                format!("{:.6}", row.coverage),
                format!("{:.6}", row.mean_length),
                format!("{:.6}", row.median_length),
                row.discarded.to_string(),
                e.seed.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn reports_to_string(reports: &[CoverageReport]) -> Result<String> {
    let mut buf = Vec::new();
    write_reports(&mut buf, reports)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
