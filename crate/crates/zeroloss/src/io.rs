//! File formats: trial and summary tables, finite problems, enumeration
//! reports, learning-curve data and fits.
//!
//! CSV files are UTF-8 with a header row, `,` separators, `.` decimals and
//! LF line endings. Floats are written in the shortest form that reads back
//! to the same value, so every table round-trips exactly.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use zeroloss_core::finitehyp::{EnumerationMode, EnumerationReport, FiniteProblem};
use zeroloss_core::fitting::{CurveFit, CurvePoint, FittedRow, Weighting};
use zeroloss_core::montecarlo::{SummaryRow, TrialRecord, TrialStatus};

use crate::error::{CliError, Result};

pub const TRIAL_HEADER: [&str; 6] = ["n", "trial_index", "trial_seed", "test_error", "updates", "status"];

/// `f64` in its shortest round-trip form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| CliError::output(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    if let csv::ErrorKind::Io(_) = e.kind() {
        let csv::ErrorKind::Io(io) = e.into_kind() else {
            unreachable!()
        };
        return CliError::output(path, io);
    }
    CliError::Parse {
        path: path.to_owned(),
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

/// Writes a CSV table with the given header.
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::output(path, e))
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::output(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Input {
        path: path.to_owned(),
        source,
    })
}

/// A CSV file as its header and string cells, with the line of each row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub path: PathBuf,
    pub header: Vec<String>,
    pub rows: Vec<(u64, Vec<String>)>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    fn parse_error(&self, line: u64, message: impl Into<String>) -> CliError {
        CliError::Parse {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    /// The numeric column `name`; empty cells become `None`.
    pub fn numbers(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let col = self
            .column(name)
            .ok_or_else(|| self.parse_error(1, format!("missing column `{name}`")))?;
        self.rows
            .iter()
            .map(|(line, cells)| {
                let cell = cells[col].trim();
                if cell.is_empty() {
                    return Ok(None);
                }
                cell.parse::<f64>()
                    .map(Some)
                    .map_err(|_| self.parse_error(*line, format!("`{cell}` in column `{name}` is not a number")))
            })
            .collect()
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = read_text(path)?;
    parse_table(&text, path)
}

pub fn parse_table(text: &str, path: &Path) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.iter().all(String::is_empty) {
        return Err(CliError::Parse {
            path: path.to_owned(),
            line: 1,
            message: "missing header row".into(),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push((line, record.iter().map(str::to_owned).collect()));
    }
    Ok(Table {
        path: path.to_owned(),
        header,
        rows,
    })
}

pub fn write_trials(path: &Path, records: &[TrialRecord]) -> Result<()> {
    write_csv(
        path,
        &TRIAL_HEADER,
        records.iter().map(|r| {
            [
                r.n.to_string(),
                r.trial_index.to_string(),
                r.trial_seed.to_string(),
                fmt_opt(r.test_error),
                r.updates.to_string(),
                r.status.as_str().to_owned(),
            ]
        }),
    )
}

pub fn read_trials(path: &Path) -> Result<Vec<TrialRecord>> {
    let table = read_table(path)?;
    let cols: Vec<usize> = TRIAL_HEADER
        .iter()
        .map(|h| {
            table
                .column(h)
                .ok_or_else(|| table.parse_error(1, format!("missing column `{h}`")))
        })
        .collect::<Result<_>>()?;
    table
        .rows
        .iter()
        .map(|(line, cells)| {
            let int = |k: usize| {
                cells[cols[k]]
                    .parse::<u64>()
                    .map_err(|_| table.parse_error(*line, format!("bad integer in `{}`", TRIAL_HEADER[k])))
            };
            let error_cell = &cells[cols[3]];
            let test_error = if error_cell.is_empty() {
                None
            } else {
                Some(
                    error_cell
                        .parse::<f64>()
                        .map_err(|_| table.parse_error(*line, "bad test_error"))?,
                )
            };
            let status = TrialStatus::parse(&cells[cols[5]]).ok_or_else(|| table.parse_error(*line, "bad status"))?;
            Ok(TrialRecord {
                n: int(0)?,
                trial_index: int(1)?,
                trial_seed: int(2)?,
                test_error,
                updates: int(4)?,
                status,
            })
        })
        .collect()
}

fn quantile_column(q: f64) -> String {
    format!("q{}", fmt_f64(q))
}

fn exceed_column(eps: f64) -> String {
    format!("exceed{}", fmt_f64(eps))
}

/// Columns `n,trials,failed,mean,std`, then `q<q>` per quantile and
/// `exceed<eps>` per threshold.
pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut header: Vec<String> = ["n", "trials", "failed", "mean", "std"].map(String::from).to_vec();
    if let Some(first) = rows.first() {
        header.extend(first.quantile_values.iter().map(|&(q, _)| quantile_column(q)));
        header.extend(first.exceed_fractions.iter().map(|&(e, _)| exceed_column(e)));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(
        path,
        &header,
        rows.iter().map(|r| {
            let mut cells = vec![
                r.n.to_string(),
                r.trials.to_string(),
                r.failed.to_string(),
                fmt_f64(r.mean),
                fmt_f64(r.std),
            ];
            cells.extend(r.quantile_values.iter().map(|&(_, v)| fmt_f64(v)));
            cells.extend(r.exceed_fractions.iter().map(|&(_, v)| fmt_f64(v)));
            cells
        }),
    )
}

pub fn summary_json(rows: &[SummaryRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                json!({
                    "n": r.n,
                    "trials": r.trials,
                    "failed": r.failed,
                    "mean": r.mean,
                    "std": r.std,
                    "quantiles": r.quantile_values.iter().map(|&(q, v)| json!({"q": q, "value": v})).collect::<Vec<_>>(),
                    "exceed_fractions": r.exceed_fractions.iter().map(|&(e, f)| json!({"epsilon": e, "fraction": f})).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

/// Column names the summary CSV uses for a quantile and a threshold.
pub fn summary_columns(q: f64, eps: f64) -> (String, String) {
    (quantile_column(q), exceed_column(eps))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputEntry {
    pub p: f64,
    pub label: u32,
}

/// `{"inputs": [{"p": .., "label": ..}], "hypotheses": [[..]], "class_count": ..}`;
/// `class_count` defaults to one more than the largest class mentioned (at least 2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub inputs: Vec<InputEntry>,
    pub hypotheses: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_count: Option<u32>,
}

impl ProblemFile {
    pub fn into_problem(self) -> Result<FiniteProblem> {
        let largest = self
            .inputs
            .iter()
            .map(|i| i.label)
            .chain(self.hypotheses.iter().flatten().copied())
            .max()
            .unwrap_or(0);
        let classes = self.class_count.unwrap_or((largest + 1).max(2));
        Ok(FiniteProblem::new(
            self.inputs.iter().map(|i| i.p).collect(),
            self.inputs.iter().map(|i| i.label).collect(),
            self.hypotheses,
            classes,
        )?)
    }
}

pub fn parse_problem(text: &str, path: &Path) -> Result<FiniteProblem> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    file.into_problem()
}

pub fn read_problem(path: &Path) -> Result<FiniteProblem> {
    parse_problem(&read_text(path)?, path)
}

pub fn mode_name(mode: EnumerationMode) -> &'static str {
    match mode {
        EnumerationMode::Exhaustive => "exhaustive",
        EnumerationMode::Support => "support",
    }
}

pub fn report_json(report: &EnumerationReport, conditioned: bool) -> Value {
    json!({
        "n": report.n,
        "epsilon": report.epsilon,
        "mode": mode_name(report.mode),
        "condition_on_nonempty": conditioned,
        "lhs_mean_ratio": report.lhs_mean_ratio,
        "rhs_ratio_of_means": report.rhs_ratio_of_means,
        "covariance_term": report.covariance_term,
        "mean_bad_count": report.mean_bad_count,
        "formula_bad_count": report.formula_bad_count,
        "mean_minima_count": report.mean_minima_count,
        "formula_minima_count": report.formula_minima_count,
        "conditioning_probability": report.conditioning_probability,
        "count_identity_residual": report.mean_bad_count - report.formula_bad_count,
        "covariance_identity_residual": report.covariance_identity_residual(),
    })
}

/// Parses `n,mean_error[,std_error]` learning-curve data, sorted by `n`.
/// Columns may come in any order; others are ignored.
pub fn parse_curve(text: &str, path: &Path) -> Result<Vec<CurvePoint>> {
    let table = parse_table(text, path)?;
    let n_col = table.column("n");
    let mean_col = table.column("mean_error");
    let (Some(n_col), Some(mean_col)) = (n_col, mean_col) else {
        return Err(table.parse_error(1, "header must contain `n` and `mean_error`"));
    };
    let std_col = table.column("std_error");
    let mut seen: HashMap<u64, u64> = HashMap::new();
    let mut points = Vec::with_capacity(table.rows.len());
    for (line, cells) in &table.rows {
        let line = *line;
        let n_cell = cells[n_col].as_str();
        let n = n_cell
            .parse::<u64>()
            .ok()
            .or_else(|| {
                n_cell
                    .parse::<f64>()
                    .ok()
                    .filter(|x| *x >= 0.0 && x.fract() == 0.0 && *x < 2f64.powi(53))
                    .map(|x| x as u64)
            })
            .ok_or_else(|| table.parse_error(line, format!("n = `{n_cell}` is not a non-negative integer")))?;
        if seen.insert(n, line).is_some() {
            return Err(CliError::DuplicateN {
                path: path.to_owned(),
                line,
                n,
            });
        }
        let number = |col: usize, field: &str| {
            cells[col]
                .parse::<f64>()
                .map_err(|_| table.parse_error(line, format!("{field} = `{}` is not a number", cells[col])))
        };
        let mean = number(mean_col, "mean_error")?;
        if !(0.0..=1.0).contains(&mean) {
            return Err(CliError::Range {
                path: path.to_owned(),
                line,
                field: "mean_error",
                value: mean,
            });
        }
        let std_error = match std_col {
            Some(c) if !cells[c].is_empty() => {
                let s = number(c, "std_error")?;
                if !(s >= 0.0 && s.is_finite()) {
                    return Err(CliError::Range {
                        path: path.to_owned(),
                        line,
                        field: "std_error",
                        value: s,
                    });
                }
                Some(s)
            }
            _ => None,
        };
        points.push(CurvePoint {
            n: n as f64,
            mean_error: mean,
            std_error,
        });
    }
    points.sort_by(|a, b| a.n.total_cmp(&b.n));
    Ok(points)
}

pub fn read_curve(path: &Path) -> Result<Vec<CurvePoint>> {
    parse_curve(&read_text(path)?, path)
}

pub fn weighting_name(w: Weighting) -> &'static str {
    match w {
        Weighting::Unweighted => "unweighted",
        Weighting::InverseVariance => "inverse_variance",
        Weighting::MixedStdIgnored => "mixed_std_ignored",
    }
}

pub fn fit_json(fit: &CurveFit, points: &[CurvePoint]) -> Value {
    json!({
        "e_min": fit.e_min,
        "eta": fit.eta,
        "e0": fit.e0,
        "e0_fixed": fit.e0_fixed,
        "rss": fit.rss,
        "weighting": weighting_name(fit.weighting),
        "points": points.iter().zip(&fit.residuals).map(|(p, r)| json!({
            "n": p.n,
            "mean_error": p.mean_error,
            "std_error": p.std_error,
            "model": fit.model(p.n),
            "residual": r,
        })).collect::<Vec<_>>(),
    })
}

/// Columns `n,mean_error,log_n,log_deviation`; `mean_error` holds the model
/// so the file is itself valid curve input.
pub fn write_fitted_curve(path: &Path, rows: &[FittedRow]) -> Result<()> {
    write_csv(
        path,
        &["n", "mean_error", "log_n", "log_deviation"],
        rows.iter().map(|r| {
            [
                fmt_f64(r.n),
                fmt_f64(r.model),
                fmt_opt(r.log_n),
                fmt_opt(r.log_deviation),
            ]
        }),
    )
}
