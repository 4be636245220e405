//! Command-line interface.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use zeroloss_core::bounds::{frac_bound, frac_min_n, quartile_eps, vc_bound, vc_min_n, DecayForm};
use zeroloss_core::docmodel::{expected_error_closed, expected_error_quadrature, q_n_curve, DocParams};
use zeroloss_core::finitehyp::{exact_report, EnumerationMode, ReportOptions};
use zeroloss_core::fitting::{fit_curve, fitted_curve, random_choice_error};
use zeroloss_core::geometry::{DiskProblem, FeatureMap};
use zeroloss_core::montecarlo::{summarize, ExperimentConfig};
use zeroloss_core::perceptron::DEFAULT_MAX_UPDATES;

use crate::error::{CliError, Result};
use crate::io;
use crate::manifest::RunManifest;
use crate::runner;
use crate::svg::{self, Panel, Scale, Series, Style};

#[derive(Debug, Parser)]
#[command(name = "zeroloss", version, about = "Zero-training-error learning experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Perceptron Monte Carlo on the separable disk problem.
    Separable(SeparableArgs),
    /// Exact enumeration over all training sets of a finite problem.
    Finite(FiniteArgs),
    /// Density-of-classifiers curves.
    Doc(DocArgs),
    /// Evaluate or invert generalization bounds.
    Bounds(BoundsArgs),
    /// Fit a learning curve to `n,mean_error[,std_error]` data.
    Fit(FitArgs),
}

/// Comma-separated sample sizes; `a..b` expands to every integer in `[a, b]`.
pub fn parse_n_list(s: &str) -> std::result::Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let int = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| format!("`{t}` is not a non-negative integer"))
        };
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (int(a)?, int(b.trim_start_matches('='))?);
                if a > b {
                    return Err(format!("empty range `{item}`"));
                }
                out.extend(a..=b);
            }
            None => out.push(int(item)?),
        }
    }
    if out.is_empty() {
        return Err("need at least one value".into());
    }
    Ok(out)
}

fn parse_n_values(s: &str) -> std::result::Result<NList, String> {
    parse_n_list(s).map(NList)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct NList(pub Vec<u64>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    Linear,
    Poly10,
}

impl Feature {
    fn map(self) -> FeatureMap {
        match self {
            Feature::Linear => FeatureMap::Identity,
            Feature::Poly10 => FeatureMap::Polynomial { degree: 10 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleArg {
    Linear,
    Log,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Scale {
        match s {
            ScaleArg::Linear => Scale::Linear,
            ScaleArg::Log => Scale::Log,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SeparableArgs {
    #[arg(long, value_parser = parse_n_values)]
    pub n_list: NList,
    #[arg(long)]
    pub trials: u64,
    #[arg(long, default_value_t = 100_000)]
    pub test_count: usize,
    #[arg(long, value_enum, default_value_t = Feature::Linear)]
    pub feature: Feature,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.1])]
    pub epsilons: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 0.75])]
    pub quantiles: Vec<f64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub threads: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_UPDATES)]
    pub max_updates: u64,
    /// Also write `separable.svg`.
    #[arg(long)]
    pub svg: bool,
    /// Overlay `R (1 - eps)^n` for each ratio on the exceedance plot.
    #[arg(long, value_delimiter = ',')]
    pub bound_r: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ScaleArg::Linear)]
    pub x_scale: ScaleArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Exhaustive,
    Support,
}

#[derive(Debug, Args, Serialize)]
pub struct FiniteArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
    pub mode: ModeArg,
    /// Average ratios over training sets with a non-empty minimizer set only.
    #[arg(long)]
    pub condition: bool,
    /// Write `report.json` and `manifest.json` here instead of printing.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Qn,
    Learning,
}

#[derive(Debug, Args, Serialize)]
pub struct DocArgs {
    #[arg(long)]
    pub e_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub e_max: f64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, value_parser = parse_n_values)]
    pub n_list: NList,
    #[arg(long, value_enum)]
    pub curve: CurveKind,
    #[arg(long, default_value_t = 1e-3)]
    pub grid_step: f64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub svg: bool,
    #[arg(long, value_enum, default_value_t = ScaleArg::Linear)]
    pub x_scale: ScaleArg,
    #[arg(long, value_enum, default_value_t = ScaleArg::Linear)]
    pub y_scale: ScaleArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Vc,
    Frac,
    Quartile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormArg {
    Power,
    Exp,
}

impl From<FormArg> for DecayForm {
    fn from(f: FormArg) -> DecayForm {
        match f {
            FormArg::Power => DecayForm::Power,
            FormArg::Exp => DecayForm::Exponential,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub kind: BoundKind,
    /// Report the smallest n with bound <= delta.
    #[arg(long)]
    pub solve_n: bool,
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub r: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, value_enum, default_value_t = FormArg::Power)]
    pub form: FormArg,
    /// Also write `bounds.json` and `manifest.json` here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Hold the error at n = 0 fixed.
    #[arg(long, conflicts_with = "classes")]
    pub fix_e0: Option<f64>,
    /// Hold the error at n = 0 at random choice among this many classes.
    #[arg(long)]
    pub classes: Option<u32>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub svg: bool,
    #[arg(long, value_enum, default_value_t = ScaleArg::Log)]
    pub x_scale: ScaleArg,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Separable(a) => separable(&a),
        Command::Finite(a) => finite(&a),
        Command::Doc(a) => doc(&a),
        Command::Bounds(a) => bounds(&a),
        Command::Fit(a) => fit(&a),
    }
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))
}

fn write_manifest(dir: &Path, manifest: RunManifest) -> Result<()> {
    io::write_json(&dir.join("manifest.json"), &manifest.finish().to_json())
}

fn print_json(value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    writeln!(std::io::stdout(), "{text}").map_err(|e| CliError::output("<stdout>", e))
}

fn require<T>(value: Option<T>, flag: &str, kind: &str) -> Result<T> {
    value.ok_or_else(|| CliError::Usage(format!("--kind {kind} needs --{flag}")))
}

fn column_values(table: &io::Table, name: &str) -> Result<Vec<(f64, f64)>> {
    let xs = table.numbers("n")?;
    let ys = table.numbers(name)?;
    Ok(xs.into_iter().zip(ys).filter_map(|(x, y)| Some((x?, y?))).collect())
}

fn write_svg(path: &Path, panels: &[Panel]) -> Result<()> {
    fs::write(path, svg::render(panels)).map_err(|e| CliError::output(path, e))
}

fn separable(a: &SeparableArgs) -> Result<()> {
    let manifest = RunManifest::start("separable", a, Some(a.seed));
    let threads = runner::thread_count(a.threads)?;
    let config = ExperimentConfig {
        n_values: a.n_list.0.clone(),
        trials_per_n: a.trials,
        test_count: a.test_count,
        feature_map: a.feature.map(),
        master_seed: a.seed,
        epsilons: a.epsilons.clone(),
        quantiles: a.quantiles.clone(),
        max_updates: a.max_updates,
    };
    for &r in &a.bound_r {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(CliError::Usage(format!("--bound-r {r} must be finite and >= 0")));
        }
    }
    log::info!(
        "running {} trials on {threads} threads",
        config.trial_keys().len() as u64
    );
    let records = runner::run_parallel(&config, &DiskProblem::default(), threads)?;
    let summary = summarize(&records, &config.epsilons, &config.quantiles)?;

    prepare(&a.out_dir)?;
    io::write_trials(&a.out_dir.join("trials.csv"), &records)?;
    let summary_csv = a.out_dir.join("summary.csv");
    io::write_summary_csv(&summary_csv, &summary)?;
    io::write_json(&a.out_dir.join("summary.json"), &io::summary_json(&summary))?;
    if a.svg {
        separable_svg(&summary_csv, &a.out_dir.join("separable.svg"), a)?;
    }
    write_manifest(&a.out_dir, manifest)
}

fn separable_svg(summary_csv: &Path, out: &Path, a: &SeparableArgs) -> Result<()> {
    let table = io::read_table(summary_csv)?;
    let x_scale = a.x_scale.into();
    let mut bands = Panel::new("Test error quantiles", "n", "test error").scales(x_scale, Scale::Linear);
    let mut exceed =
        Panel::new("Fraction of solutions with test error >= epsilon", "n", "fraction").scales(x_scale, Scale::Log);
    for name in &table.header {
        if let Some(q) = name.strip_prefix('q') {
            bands = bands.with(Series::new(
                format!("quantile {q}"),
                column_values(&table, name)?,
                Style::Line,
            ));
        } else if let Some(eps) = name.strip_prefix("exceed") {
            let points = column_values(&table, name)?;
            exceed = exceed.with(Series::new(format!("epsilon {eps}"), points.clone(), Style::Line));
            let eps: f64 = eps
                .parse()
                .map_err(|_| CliError::Usage(format!("bad column `{name}`")))?;
            for &r in &a.bound_r {
                let bound = points
                    .iter()
                    .map(|&(n, _)| (n, frac_bound(r, n as u64, eps, DecayForm::Power).min(1.0)))
                    .collect();
                exceed = exceed.with(Series::new(format!("R = {r}, epsilon {eps}"), bound, Style::Dashed));
            }
        }
    }
    write_svg(out, &[bands, exceed])
}

fn finite(a: &FiniteArgs) -> Result<()> {
    let manifest = RunManifest::start("finite", a, None);
    let problem = io::read_problem(&a.problem)?;
    let mode = match a.mode {
        ModeArg::Exhaustive => EnumerationMode::Exhaustive,
        ModeArg::Support => EnumerationMode::Support,
    };
    let options = ReportOptions {
        mode,
        condition_on_nonempty: a.condition,
    };
    let report = exact_report(&problem, a.n, a.epsilon, options)?;
    let value = io::report_json(&report, a.condition);
    emit(a.out_dir.as_deref(), "report.json", &value, manifest)
}

/// Writes `value` and the manifest into `dir`, or prints `value` to stdout
/// and the manifest to stderr.
fn emit(dir: Option<&Path>, name: &str, value: &Value, manifest: RunManifest) -> Result<()> {
    match dir {
        Some(dir) => {
            prepare(dir)?;
            io::write_json(&dir.join(name), value)?;
            write_manifest(dir, manifest)
        }
        None => {
            print_json(value)?;
            let text = serde_json::to_string(&manifest.finish().to_json()).expect("JSON values always serialize");
            writeln!(std::io::stderr(), "{text}").map_err(|e| CliError::output("<stderr>", e))
        }
    }
}

/// `e_min, e_min + step, ...` up to and including `e_max`.
pub fn error_grid(e_min: f64, e_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::Usage(format!("--grid-step {step} must be positive")));
    }
    let count = ((e_max - e_min) / step * (1.0 + 1e-12)).floor() as usize;
    if count > 10_000_000 {
        return Err(CliError::Usage(format!("--grid-step {step} gives too many points")));
    }
    let mut grid: Vec<f64> = (0..=count).map(|k| e_min + k as f64 * step).collect();
    if let Some(last) = grid.last_mut() {
        if (e_max - *last).abs() <= 1e-9 * step {
            *last = e_max;
        } else {
            grid.push(e_max);
        }
    }
    Ok(grid)
}

fn doc(a: &DocArgs) -> Result<()> {
    let manifest = RunManifest::start("doc", a, None);
    let params = DocParams::new(a.e_min, a.e_max, a.alpha, a.beta)?;
    prepare(&a.out_dir)?;
    let fmt = io::fmt_f64;
    match a.curve {
        CurveKind::Qn => {
            let grid = error_grid(a.e_min, a.e_max, a.grid_step)?;
            let mut files = Vec::new();
            for &n in &a.n_list.0 {
                let q = q_n_curve(&grid, n as f64, &params)?;
                let path = a.out_dir.join(format!("qn_{n}.csv"));
                io::write_csv(
                    &path,
                    &["E", "q_n"],
                    grid.iter().zip(&q).map(|(&e, &v)| [fmt(e), fmt(v)]),
                )?;
                files.push((n, path));
            }
            if a.svg {
                let mut panel = Panel::new("Density of zero-training-error classifiers", "E", "q_n")
                    .scales(a.x_scale.into(), a.y_scale.into());
                for (n, path) in &files {
                    let t = io::read_table(path)?;
                    let xs = t.numbers("E")?;
                    let ys = t.numbers("q_n")?;
                    let pts = xs.into_iter().zip(ys).filter_map(|(x, y)| Some((x?, y?))).collect();
                    panel = panel.with(Series::new(format!("n = {n}"), pts, Style::Line));
                }
                write_svg(&a.out_dir.join("doc.svg"), &[panel])?;
            }
        }
        CurveKind::Learning => {
            let closed = a.e_max == 1.0;
            let mut rows = Vec::new();
            for &n in &a.n_list.0 {
                let nf = n as f64;
                let quad = expected_error_quadrature(nf, &params)?;
                let cf = closed.then(|| expected_error_closed(nf, a.e_min, a.alpha, a.beta));
                rows.push([n.to_string(), fmt(quad), cf.map(fmt).unwrap_or_default()]);
            }
            let path = a.out_dir.join("learning.csv");
            io::write_csv(&path, &["n", "expected_error", "closed_form"], rows)?;
            if a.svg {
                let t = io::read_table(&path)?;
                let mut panel = Panel::new("Expected test error", "n", "error")
                    .scales(a.x_scale.into(), a.y_scale.into())
                    .with(Series::new(
                        "quadrature",
                        column_values(&t, "expected_error")?,
                        Style::Line,
                    ));
                if closed {
                    panel = panel.with(Series::new(
                        "closed form",
                        column_values(&t, "closed_form")?,
                        Style::Scatter,
                    ));
                }
                write_svg(&a.out_dir.join("doc.svg"), &[panel])?;
            }
        }
    }
    write_manifest(&a.out_dir, manifest)
}

fn bounds(a: &BoundsArgs) -> Result<()> {
    let manifest = RunManifest::start("bounds", a, None);
    let form: DecayForm = a.form.into();
    let form_name = match a.form {
        FormArg::Power => "power",
        FormArg::Exp => "exp",
    };
    let value = match a.kind {
        BoundKind::Vc => {
            let d = require(a.d, "d", "vc")?;
            let eps = require(a.epsilon, "epsilon", "vc")?;
            if a.solve_n {
                let delta = require(a.delta, "delta", "vc")?;
                let n = vc_min_n(d, eps, delta)?;
                json!({"kind": "vc", "d": d, "epsilon": eps, "delta": delta, "n": n, "bound": vc_bound(d, n, eps)})
            } else {
                let n = require(a.n, "n", "vc")?;
                if !(eps > 0.0 && eps <= 1.0) {
                    return Err(CliError::Usage(format!("--epsilon {eps} must lie in (0, 1]")));
                }
                json!({"kind": "vc", "d": d, "epsilon": eps, "n": n, "bound": vc_bound(d, n, eps)})
            }
        }
        BoundKind::Frac => {
            let r = require(a.r, "R", "frac")?;
            let eps = require(a.epsilon, "epsilon", "frac")?;
            if a.solve_n {
                let delta = require(a.delta, "delta", "frac")?;
                let n = frac_min_n(r, eps, delta, form)?;
                json!({"kind": "frac", "R": r, "epsilon": eps, "delta": delta, "form": form_name, "n": n,
                       "bound": frac_bound(r, n, eps, form)})
            } else {
                let n = require(a.n, "n", "frac")?;
                if !(r >= 0.0 && r.is_finite() && eps > 0.0 && eps <= 1.0) {
                    return Err(CliError::Usage("need R >= 0 and epsilon in (0, 1]".into()));
                }
                json!({"kind": "frac", "R": r, "epsilon": eps, "form": form_name, "n": n,
                       "bound": frac_bound(r, n, eps, form)})
            }
        }
        BoundKind::Quartile => {
            let r = require(a.r, "R", "quartile")?;
            let n = require(a.n, "n", "quartile")?;
            let q = require(a.q, "q", "quartile")?;
            let e = quartile_eps(r, n, q)?;
            json!({"kind": "quartile", "R": r, "n": n, "q": q, "power": e.power, "exponential": e.exponential})
        }
    };
    emit(a.out_dir.as_deref(), "bounds.json", &value, manifest)
}

/// Integers roughly 20 per decade from 1 to `2 max`, plus 0 and the data sizes.
pub fn fitted_grid(data: &[f64]) -> Vec<f64> {
    let top = data.iter().copied().fold(1.0f64, f64::max) * 2.0;
    let mut grid: Vec<f64> = vec![0.0];
    let mut k = 0;
    loop {
        let v = 10f64.powf(k as f64 / 20.0).round();
        if v > top {
            break;
        }
        grid.push(v);
        k += 1;
    }
    grid.extend(data.iter().map(|n| n.round()));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn fit(a: &FitArgs) -> Result<()> {
    let manifest = RunManifest::start("fit", a, None);
    let points = io::read_curve(&a.input)?;
    let e0 = match (a.fix_e0, a.classes) {
        (Some(v), _) => Some(v),
        (None, Some(c)) if c >= 1 => Some(random_choice_error(c)),
        (None, Some(c)) => return Err(CliError::Usage(format!("--classes {c} must be at least 1"))),
        (None, None) => None,
    };
    let result = fit_curve(&points, e0)?;
    log::info!("e_min = {}, eta = {}, e0 = {}", result.e_min, result.eta, result.e0);
    prepare(&a.out_dir)?;
    let fit_path = a.out_dir.join("fit.json");
    io::write_json(&fit_path, &io::fit_json(&result, &points))?;
    let ns: Vec<f64> = points.iter().map(|p| p.n).collect();
    let curve_path = a.out_dir.join("fitted.csv");
    io::write_fitted_curve(&curve_path, &fitted_curve(&result, &fitted_grid(&ns)))?;
    if a.svg {
        fit_svg(&fit_path, &curve_path, &a.out_dir.join("fit.svg"), a.x_scale.into())?;
    }
    write_manifest(&a.out_dir, manifest)
}

fn fit_svg(fit_path: &Path, curve_path: &Path, out: &Path, x_scale: Scale) -> Result<()> {
    let text = fs::read_to_string(fit_path).map_err(|source| CliError::Input {
        path: fit_path.to_owned(),
        source,
    })?;
    let fit: Value = serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: fit_path.to_owned(),
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    let e_min = fit["e_min"].as_f64().unwrap_or(0.0);
    let data: Vec<(f64, f64)> = fit["points"]
        .as_array()
        .into_iter()
        .flatten()
        .filter_map(|p| Some((p["n"].as_f64()?, p["mean_error"].as_f64()?)))
        .collect();
    let curve = io::read_table(curve_path)?;
    let model = column_values(&curve, "mean_error")?;
    let logs: Vec<(f64, f64)> = curve
        .numbers("log_n")?
        .into_iter()
        .zip(curve.numbers("log_deviation")?)
        .filter_map(|(x, y)| Some((x?.exp(), y?.exp())))
        .collect();
    let fit_panel = Panel::new("Learning curve", "n", "test error")
        .scales(x_scale, Scale::Linear)
        .with(Series::new("data", data.clone(), Style::Scatter))
        .with(Series::new("fit", model, Style::Line));
    let deviation = Panel::new("Distance to the error floor", "n", "error - E_min")
        .scales(Scale::Log, Scale::Log)
        .with(Series::new(
            "data",
            data.iter().map(|&(n, e)| (n, e - e_min)).collect(),
            Style::Scatter,
        ))
        .with(Series::new("fit", logs, Style::Line));
    write_svg(out, &[fit_panel, deviation])
}
