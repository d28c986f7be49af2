//! The versioned CSV result format: row types, deterministic serialization,
//! and a strict parser that reports the offending line on malformed input.
//!
//! Every file starts with the version comment line, then one of the two
//! fixed headers. All text is UTF-8 with LF line endings and `.` decimals,
//! so equal inputs serialize to byte-identical files.

use std::fmt;

/// First line of every result file.
pub const CSV_VERSION_LINE: &str = "# aoe-chain v1";

/// Header of sweep result files.
pub const SWEEP_HEADER: &str = "scenario_id,sweep_param,sweep_value,policy,avg_aoe_exact,\
avg_aoe_mc,mc_stderr,rvi_iterations,bellman_residual,wall_time_ms";

/// Header of solver-trace files.
pub const TRACE_HEADER: &str = "scenario_id,iteration,max_abs_change,span,gain_estimate";

/// One (scenario, sweep value, policy) result.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub scenario_id: String,
    pub sweep_param: String,
    pub sweep_value: f64,
    pub policy: String,
    pub avg_aoe_exact: f64,
    pub avg_aoe_mc: f64,
    pub mc_stderr: f64,
    /// Value-iteration sweeps run for this row; 0 on heuristic rows.
    pub rvi_iterations: u64,
    /// Optimality-equation residual of the solved values; 0 on heuristic
    /// rows.
    pub bellman_residual: f64,
    /// Wall-clock milliseconds for the row; 0 unless timings were requested
    /// (they would break byte-reproducibility).
    pub wall_time_ms: u64,
}

/// One solver iteration of one convergence cell.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub scenario_id: String,
    pub iteration: u64,
    pub max_abs_change: f64,
    pub span: f64,
    pub gain_estimate: f64,
}

/// Fixed-point form used for averages and standard errors.
pub fn fmt_fixed(x: f64) -> String {
    format!("{x:.6}")
}

/// Scientific form used for residual-like quantities that span many orders
/// of magnitude; zero stays a plain `0.0`.
pub fn fmt_sci(x: f64) -> String {
    if x == 0.0 {
        "0.0".to_string()
    } else {
        format!("{x:.6e}")
    }
}

impl ResultRow {
    fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.scenario_id,
            self.sweep_param,
            self.sweep_value,
            self.policy,
            fmt_fixed(self.avg_aoe_exact),
            fmt_fixed(self.avg_aoe_mc),
            fmt_fixed(self.mc_stderr),
            self.rvi_iterations,
            fmt_sci(self.bellman_residual),
            self.wall_time_ms,
        )
    }
}

impl TraceRow {
    fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.scenario_id,
            self.iteration,
            fmt_sci(self.max_abs_change),
            fmt_sci(self.span),
            fmt_fixed(self.gain_estimate),
        )
    }
}

/// Serializes sweep rows to the full file contents.
pub fn write_sweep_csv(rows: &[ResultRow]) -> String {
    let mut out = String::new();
    out.push_str(CSV_VERSION_LINE);
    out.push('\n');
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

/// Serializes trace rows to the full file contents.
pub fn write_trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::new();
    out.push_str(CSV_VERSION_LINE);
    out.push('\n');
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

/// Either kind of result file, parsed.
#[derive(Clone, Debug, PartialEq)]
pub enum ParsedCsv {
    Sweep(Vec<ResultRow>),
    Trace(Vec<TraceRow>),
}

/// A malformed result file, with the 1-based offending line.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvError {
    pub line: usize,
    pub what: String,
}

impl fmt::Display for CsvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.what)
    }
}

impl std::error::Error for CsvError {}

fn csv_err(line: usize, what: impl Into<String>) -> CsvError {
    CsvError {
        line,
        what: what.into(),
    }
}

fn parse_field<T: std::str::FromStr>(
    field: &str,
    name: &str,
    line: usize,
) -> Result<T, CsvError> {
    field
        .trim()
        .parse()
        .map_err(|_| csv_err(line, format!("cannot parse {name} from {field:?}")))
}

/// Parses a result file, accepting either schema and rejecting anything
/// else with the offending line number. Files without data rows are
/// rejected: there is nothing to plot or analyze in them.
pub fn parse_csv(text: &str) -> Result<ParsedCsv, CsvError> {
    let mut lines = text.lines().enumerate();
    let (_, version) = lines
        .next()
        .ok_or_else(|| csv_err(1, "empty file"))?;
    if version.trim_end() != CSV_VERSION_LINE {
        return Err(csv_err(
            1,
            format!("expected version line {CSV_VERSION_LINE:?}, got {version:?}"),
        ));
    }
    let (_, header) = lines
        .next()
        .ok_or_else(|| csv_err(2, "missing header line"))?;
    let header = header.trim_end();

    if header == SWEEP_HEADER {
        let mut rows = Vec::new();
        for (idx, raw) in lines {
            let line_no = idx + 1;
            let raw = raw.trim_end();
            if raw.is_empty() {
                continue;
            }
            let f: Vec<&str> = raw.split(',').collect();
            if f.len() != 10 {
                return Err(csv_err(
                    line_no,
                    format!("expected 10 fields, got {}", f.len()),
                ));
            }
            rows.push(ResultRow {
                scenario_id: f[0].to_string(),
                sweep_param: f[1].to_string(),
                sweep_value: parse_field(f[2], "sweep_value", line_no)?,
                policy: f[3].to_string(),
                avg_aoe_exact: parse_field(f[4], "avg_aoe_exact", line_no)?,
                avg_aoe_mc: parse_field(f[5], "avg_aoe_mc", line_no)?,
                mc_stderr: parse_field(f[6], "mc_stderr", line_no)?,
                rvi_iterations: parse_field(f[7], "rvi_iterations", line_no)?,
                bellman_residual: parse_field(f[8], "bellman_residual", line_no)?,
                wall_time_ms: parse_field(f[9], "wall_time_ms", line_no)?,
            });
        }
        if rows.is_empty() {
            return Err(csv_err(3, "no data rows"));
        }
        Ok(ParsedCsv::Sweep(rows))
    } else if header == TRACE_HEADER {
        let mut rows = Vec::new();
        for (idx, raw) in lines {
            let line_no = idx + 1;
            let raw = raw.trim_end();
            if raw.is_empty() {
                continue;
            }
            let f: Vec<&str> = raw.split(',').collect();
            if f.len() != 5 {
                return Err(csv_err(
                    line_no,
                    format!("expected 5 fields, got {}", f.len()),
                ));
            }
            rows.push(TraceRow {
                scenario_id: f[0].to_string(),
                iteration: parse_field(f[1], "iteration", line_no)?,
                max_abs_change: parse_field(f[2], "max_abs_change", line_no)?,
                span: parse_field(f[3], "span", line_no)?,
                gain_estimate: parse_field(f[4], "gain_estimate", line_no)?,
            });
        }
        if rows.is_empty() {
            return Err(csv_err(3, "no data rows"));
        }
        Ok(ParsedCsv::Trace(rows))
    } else {
        Err(csv_err(2, format!("unrecognized header {header:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row() -> ResultRow {
        ResultRow {
            scenario_id: "fig1".into(),
            sweep_param: "p_gen".into(),
            sweep_value: 0.3,
            policy: "rvi".into(),
            avg_aoe_exact: 11.840445,
            avg_aoe_mc: 11.82,
            mc_stderr: 0.021,
            rvi_iterations: 69,
            bellman_residual: 7.3e-9,
            wall_time_ms: 0,
        }
    }

    #[test]
    fn sweep_csv_round_trips() {
        let rows = vec![sample_row()];
        let text = write_sweep_csv(&rows);
        assert!(text.starts_with("# aoe-chain v1\nscenario_id,"));
        assert!(text.ends_with('\n'));
        match parse_csv(&text).unwrap() {
            ParsedCsv::Sweep(parsed) => {
                assert_eq!(parsed.len(), 1);
                assert_eq!(parsed[0].scenario_id, "fig1");
                assert_eq!(parsed[0].sweep_value, 0.3);
                assert_eq!(parsed[0].rvi_iterations, 69);
                // Fixed-precision fields round-trip through their format.
                assert_eq!(parsed[0].avg_aoe_exact, 11.840445);
                assert!((parsed[0].bellman_residual - 7.3e-9).abs() < 1e-15);
            }
            other => panic!("wrong kind: {other:?}"),
        }
    }

    #[test]
    fn trace_csv_round_trips() {
        let rows = vec![TraceRow {
            scenario_id: "cell-a".into(),
            iteration: 3,
            max_abs_change: 0.125,
            span: 0.5,
            gain_estimate: -7.442513,
        }];
        let text = write_trace_csv(&rows);
        match parse_csv(&text).unwrap() {
            ParsedCsv::Trace(parsed) => {
                assert_eq!(parsed[0].iteration, 3);
                assert_eq!(parsed[0].max_abs_change, 0.125);
                assert_eq!(parsed[0].gain_estimate, -7.442513);
            }
            other => panic!("wrong kind: {other:?}"),
        }
    }

    #[test]
    fn serialization_is_deterministic() {
        let rows = vec![sample_row(), sample_row()];
        assert_eq!(write_sweep_csv(&rows), write_sweep_csv(&rows));
    }

    #[test]
    fn zero_residual_prints_as_plain_zero() {
        let mut row = sample_row();
        row.bellman_residual = 0.0;
        let text = write_sweep_csv(&[row]);
        let data_line = text.lines().nth(2).unwrap();
        assert!(data_line.ends_with(",0.0,0"), "{data_line}");
    }

    #[test]
    fn malformed_input_names_the_line() {
        // Wrong version line.
        let err = parse_csv("# nope\n").unwrap_err();
        assert_eq!(err.line, 1);

        // Unknown header.
        let err = parse_csv("# aoe-chain v1\na,b,c\n").unwrap_err();
        assert_eq!(err.line, 2);

        // Field-count mismatch on the first data row.
        let text = format!("{CSV_VERSION_LINE}\n{SWEEP_HEADER}\nfig1,p_gen,0.1\n");
        let err = parse_csv(&text).unwrap_err();
        assert_eq!(err.line, 3);

        // Unparsable number, second data row.
        let good = write_sweep_csv(&[sample_row()]);
        let text = format!("{good}fig1,p_gen,zero,rvi,1,1,0,0,0.0,0\n");
        let err = parse_csv(&text).unwrap_err();
        assert_eq!(err.line, 4);
        assert!(err.what.contains("sweep_value"), "{}", err.what);
    }

    #[test]
    fn empty_files_are_rejected() {
        assert!(parse_csv("").is_err());
        let headers_only = format!("{CSV_VERSION_LINE}\n{SWEEP_HEADER}\n");
        assert!(parse_csv(&headers_only).is_err());
        let trace_only = format!("{CSV_VERSION_LINE}\n{TRACE_HEADER}\n");
        assert!(parse_csv(&trace_only).is_err());
    }
}
