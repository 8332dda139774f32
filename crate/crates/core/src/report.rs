//! Report emission: CSV bodies with an embedded JSON header line, and full
//! JSON documents. Formatting is locale-free and deterministic so re-running
//! a configuration reproduces files byte for byte.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::acs::{AcsDistanceReport, ExtractionReport};
use crate::config::RunConfig;
use crate::distribution::{DiscrepancyReport, ZeroTestReport};
use crate::error::Result;
use crate::glt::{GltPermutationReport, PermutationEntry};
use crate::piecewise::PiecewiseReport;
use crate::symbols::Symbol;

/// Shortest round-trip decimal form with a `.` separator.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// A CSV document: one `#`-prefixed JSON header line carrying the full run
/// configuration, a column row, then the data rows.
pub fn csv_document(kind: &str, cfg: &RunConfig, extra: Value, columns: &str, rows: &[String]) -> String {
    let header = json!({ "kind": kind, "config": cfg, "meta": extra });
    let mut out = String::new();
    out.push_str("# ");
    out.push_str(&header.to_string());
    out.push('\n');
    out.push_str(columns);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    out
}

/// Full JSON document for a serializable report.
pub fn json_document<T: Serialize>(kind: &str, cfg: &RunConfig, report: &T) -> Value {
    json!({ "kind": kind, "config": cfg, "report": report })
}

pub fn acs_report_csv(report: &AcsDistanceReport, cfg: &RunConfig) -> String {
    let rows: Vec<String> =
        report.rows.iter().map(|r| format!("{},{}", r.n, fmt_f64(r.p))).collect();
    let meta = json!({
        "left": report.left,
        "right": report.right,
        "schedule": report.schedule,
        "tail_window": report.tail_window,
        "tail_estimate": report.tail_estimate,
    });
    csv_document("acs-distance", cfg, meta, "n,p", &rows)
}

pub fn discrepancy_report_csv(report: &DiscrepancyReport, cfg: &RunConfig) -> String {
    let rows: Vec<String> =
        report.rows.iter().map(|r| format!("{},{}", r.n, fmt_f64(r.discrepancy))).collect();
    let meta = json!({
        "sequence": report.sequence,
        "symbol": report.symbol,
        "mode": report.mode,
        "family": report.family,
        "threshold": report.threshold,
        "tail_value": report.tail_value,
        "tail_monotone": report.tail_monotone,
        "verdict": report.verdict,
    });
    csv_document("verify", cfg, meta, "n,discrepancy", &rows)
}

pub fn zero_report_csv(report: &ZeroTestReport, cfg: &RunConfig) -> String {
    let rows: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("{},{},{}", r.n, fmt_f64(r.epsilon), fmt_f64(r.fraction)))
        .collect();
    let meta = json!({
        "sequence": report.sequence,
        "epsilons": report.epsilons,
        "threshold": report.threshold,
        "verdict": report.verdict,
    });
    csv_document("zero-test", cfg, meta, "n,epsilon,fraction", &rows)
}

pub fn piecewise_report_csv(report: &PiecewiseReport, cfg: &RunConfig) -> String {
    let rows: Vec<String> =
        report.rows.iter().map(|r| format!("{},{}", r.n, fmt_f64(r.d_m))).collect();
    let meta = json!({
        "sequence": report.sequence,
        "symbol": report.symbol,
        "threshold": report.threshold,
        "resolution": report.resolution,
        "tail_value": report.tail_value,
        "tail_monotone": report.tail_monotone,
        "verdict": report.verdict,
    });
    csv_document("piecewise", cfg, meta, "n,d_M", &rows)
}

pub fn extraction_map_csv(report: &ExtractionReport, cfg: &RunConfig) -> String {
    let rows: Vec<String> =
        report.map_rows.iter().map(|&(n, m)| format!("{n},{m}")).collect();
    let meta = json!({
        "family": report.family,
        "k_max": report.k_max,
        "levels": report.levels,
    });
    csv_document("extract", cfg, meta, "n,m_of_n", &rows)
}

pub fn extraction_verification_csv(report: &ExtractionReport, cfg: &RunConfig) -> String {
    let rows: Vec<String> = report
        .verification
        .iter()
        .map(|v| format!("{},{}", v.m, fmt_f64(v.tail_distance)))
        .collect();
    let meta = json!({ "family": report.family, "k_max": report.k_max });
    csv_document("extract-verification", cfg, meta, "m,tail_distance", &rows)
}

/// Symbol samples as `x,re,im` at the given resolution.
pub fn symbol_csv(symbol: &Symbol, resolution: usize, cfg: &RunConfig) -> String {
    let res = symbol.resolution().unwrap_or(resolution);
    let rows: Vec<String> = symbol
        .samples(res)
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let x = (i + 1) as f64 / res as f64;
            format!("{},{},{}", fmt_f64(x), fmt_f64(v.re), fmt_f64(v.im))
        })
        .collect();
    let meta = json!({ "symbol": symbol.descriptor(), "resolution": res });
    csv_document("symbol", cfg, meta, "x,re,im", &rows)
}

/// Diagonal vector as `i,re,im`.
pub fn diagonal_csv(descriptor: &str, diagonal: &[Complex64], cfg: &RunConfig) -> String {
    let rows: Vec<String> = diagonal
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{},{},{}", i + 1, fmt_f64(v.re), fmt_f64(v.im)))
        .collect();
    let meta = json!({ "sequence": descriptor, "n": diagonal.len() });
    csv_document("diagonal", cfg, meta, "i,re,im", &rows)
}

/// One size's combined permutation as `i,P(i)` (1-based).
pub fn permutation_csv(entry: &PermutationEntry, cfg: &RunConfig) -> String {
    let rows: Vec<String> =
        entry.p.iter().enumerate().map(|(i, &p)| format!("{},{}", i + 1, p + 1)).collect();
    let meta = json!({ "n": entry.n });
    csv_document("permutation", cfg, meta, "i,P(i)", &rows)
}

/// The pipeline's combined JSON report with the three sub-verdicts.
pub fn glt_report_json(report: &GltPermutationReport, cfg: &RunConfig) -> Value {
    json!({
        "kind": "theorem-demo",
        "config": cfg,
        "sequence": report.sequence,
        "symbol": report.symbol,
        "approximant_levels": report.approximant_levels,
        "checks": {
            "sorted_vs_rearrangement": {
                "verdict": report.sorted_vs_rearrangement.verdict,
                "tail_value": report.sorted_vs_rearrangement.tail_value,
                "rows": report.sorted_vs_rearrangement.rows,
            },
            "difference_zero": {
                "verdict": report.difference_zero.verdict,
                "rows": report.difference_zero.rows,
            },
            "permuted_vs_symbol": {
                "verdict": report.permuted_vs_symbol.verdict,
                "tail_value": report.permuted_vs_symbol.tail_value,
                "rows": report.permuted_vs_symbol.rows,
            },
        },
        "verdict": report.verdict,
    })
}

/// Write a file, creating parent directories as needed.
pub fn write_text(path: &std::path::Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acs::acs_distance_estimate;
    use crate::config::Schedule;
    use crate::sequences::{DiagonalSequence, MatrixSequence};

    #[test]
    fn csv_documents_are_reproducible() {
        let cfg = RunConfig {
            sizes: Schedule::doubling(16, 64).unwrap(),
            ..RunConfig::default()
        };
        let a: MatrixSequence = DiagonalSequence::harmonic().into();
        let b: MatrixSequence = DiagonalSequence::constant(0.0).into();
        let r1 = acs_distance_estimate(&a, &b, &cfg).unwrap();
        let r2 = acs_distance_estimate(&a, &b, &cfg).unwrap();
        assert_eq!(acs_report_csv(&r1, &cfg), acs_report_csv(&r2, &cfg));
        let text = acs_report_csv(&r1, &cfg);
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("# {"));
        assert!(header.contains("\"config\""));
        assert_eq!(lines.next().unwrap(), "n,p");
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn float_formatting_is_locale_free() {
        assert_eq!(fmt_f64(0.25), "0.25");
        assert_eq!(fmt_f64(1.0 / 3.0), "0.3333333333333333");
        assert_eq!(fmt_f64(2.0), "2");
    }
}
