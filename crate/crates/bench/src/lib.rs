//! Benchmark harness for the `aoplan` planners: seeded multi-trial runs,
//! CSV persistence and convergence reports.

pub mod error;
pub mod planners;
pub mod report;
pub mod run;

pub use error::{BenchError, Result};
pub use planners::{execute, parse_shrink, Execution, PlannerKind, PlannerSpec, Problem, PLANNERS};
pub use report::{convergence_report, quantile, Report, SummaryRow};
pub use run::{
    read_rows, read_rows_file, rows_to_csv, run_benchmark, write_rows, write_rows_file, ResultRow, RunSpec, CSV_COLUMNS,
};

/// Formats `x` with `digits` significant digits, dropping trailing zeros.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(0.114_860_092_198_3, 12), "0.114860092198");
        assert_eq!(format_significant(1.131_370_849_898_476, 9), "1.13137085");
        assert_eq!(format_significant(29.0, 12), "29");
        assert_eq!(format_significant(0.0, 5), "0");
    }
}
