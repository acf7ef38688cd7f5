//! Check-line printing and artifact writing shared by the `validate`,
//! `reproduce`, and `analyze` subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use bullwhip::experiments::{CheckResult, ValidationReport};
use bullwhip::Result;

use crate::svg::table_chart;
use crate::Format;

/// Compact float for check lines: plain decimals in the readable range,
/// scientific notation outside it.
pub fn fmt_measured(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs();
    if (1e-3..1e4).contains(&magnitude) {
        format!("{x:.4}")
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    } else {
        format!("{x:.3e}")
    }
}

/// Thresholds are round numbers; prefer their shortest exact form.
fn fmt_threshold(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.abs() >= 1e-3 {
        fmt_measured(x)
    } else {
        format!("{x:e}")
    }
}

fn print_check(experiment: &str, check: &CheckResult) {
    let status = if check.passed { "PASS" } else { "FAIL" };
    // Bound checks state their threshold; margin checks (threshold slot
    // unused) state the sign convention, positive meaning the claim holds.
    // A check is a bound check exactly when the threshold reproduces its
    // outcome.
    let clause = if check.passed == (check.measured <= check.threshold) {
        format!(
            "measured {} <= {}",
            fmt_measured(check.measured),
            fmt_threshold(check.threshold)
        )
    } else {
        format!("measured {} > 0", fmt_measured(check.measured))
    };
    if check.passed {
        println!("{experiment}  {status}  {:<26} {clause}", check.name);
    } else {
        println!(
            "{experiment}  {status}  {:<26} {clause}  ({})",
            check.name, check.detail
        );
    }
}

/// Prints the per-check lines, any notes, and the closing tally; returns
/// whether every check passed.
pub fn print_report(report: &ValidationReport) -> bool {
    for check in &report.checks {
        print_check(&report.experiment, check);
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    let passed = report.checks.iter().filter(|c| c.passed).count();
    println!(
        "{}: {}/{} checks passed",
        report.experiment,
        passed,
        report.checks.len()
    );
    report.passed()
}

/// Writes the report JSON, its tables (CSV format only — the JSON report
/// already embeds them), and one SVG chart per plottable table.
pub fn write_report_artifacts(
    report: &ValidationReport,
    dir: &Path,
    format: Format,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let json_path = dir.join(format!("{}_report.json", report.experiment));
    fs::write(&json_path, report.to_json_string()?)?;
    written.push(json_path);
    if format == Format::Csv {
        written.extend(report.write_tables_csv(dir)?);
    }
    for (name, table) in &report.tables {
        if let Some(svg) = table_chart(&format!("{} {name}", report.experiment), table) {
            let path = dir.join(format!("{}_{name}.svg", report.experiment));
            fs::write(&path, svg)?;
            written.push(path);
        }
    }
    Ok(written)
}

pub fn announce(written: &[PathBuf]) {
    for path in written {
        println!("wrote {}", path.display());
    }
}
