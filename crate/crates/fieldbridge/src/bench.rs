//! Benchmark and demonstrator drivers behind the command-line tool.
//!
//! Timed regions cover only the transfer and evaluation work. Opening the
//! session and loading scripts or weights are reported separately as startup
//! rows.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use fieldbridge_core::heat::DEFAULT_TOL;
use fieldbridge_core::profile::evaluate_profile;
use fieldbridge_core::{
    build_exact_nn_weights, error_norms, hooke_native, lame_from_engineering, native_fd_step,
    solve_steady, solve_with_boundary_updates, synth_strain_field, BoundaryConditions, ErrorNorms,
    HeatConfig, LameParams, MinMaxScaler, Patch, PatchBc, SolveReport, StructuredGrid,
};
use serde::{Deserialize, Serialize};

use crate::bridge::{ScriptSource, Session, TransferStrategy};
use crate::error::{Error, Result};
use crate::scripted::{
    eval_scripted_profile, load_weight_bundle, load_weight_file, scripted_fd_step,
    scripted_stress_until, set_lame, LawKind,
};
use crate::{fixtures, io};

/// Element counts of the coarse and fine stress meshes.
pub const DEFAULT_SIZES: [usize; 2] = [1_000, 400_000];
/// Per-row wall-clock budget; rows past it are reported as `timeout`.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(300);
/// Half width of the synthetic strain box, per component.
pub const DEFAULT_STRAIN_HALF_WIDTH: f64 = 2e-3;
pub const MIN_REPEATS: usize = 3;
pub const MIN_WARMUP: usize = 1;

/// Median of `samples` (mean of the middle pair for even counts).
pub fn median(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty(), "median of no samples");
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Runs `f` `warmup` times untimed, then `repeats` times timed. Returns the
/// per-repeat wall times in seconds and the output of the last run.
///
/// `f` receives the row deadline so long runs can stop early; the deadline is
/// also checked between runs.
pub fn time_repeats<T>(
    warmup: usize,
    repeats: usize,
    budget: Option<Duration>,
    mut f: impl FnMut(Option<(Instant, Duration)>) -> Result<T>,
) -> Result<(Vec<f64>, T)> {
    let deadline = budget.map(|b| (Instant::now() + b, b));
    let over = || match deadline {
        Some((at, b)) if Instant::now() >= at => Err(Error::Timeout(b)),
        _ => Ok(()),
    };
    for _ in 0..warmup {
        f(deadline)?;
        over()?;
    }
    let mut times = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats {
        let start = Instant::now();
        let out = f(deadline)?;
        times.push(start.elapsed().as_secs_f64());
        last = Some(out);
        over()?;
    }
    let last = last.ok_or_else(|| Error::Config("at least one timed repeat is required".into()))?;
    Ok((times, last))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub case: String,
    pub law: String,
    pub strategy: String,
    pub size: usize,
    pub time_s: Option<f64>,
    pub ratio: Option<f64>,
    pub l2_mean: Option<f64>,
    pub linf: Option<f64>,
    /// `ok`, `timeout` or `failed: <reason>`.
    pub status: String,
}

impl BenchRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Fixed cost outside the timed regions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartupRow {
    pub law: String,
    pub phase: String,
    pub time_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub startup: Vec<StartupRow>,
    /// Per-repeat times of each row, in row order.
    pub samples: Vec<Vec<f64>>,
}

impl BenchReport {
    pub fn find(&self, law: &str, strategy: &str, size: usize) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.law == law && r.strategy == strategy && r.size == size)
    }

    fn push(&mut self, row: BenchRow, samples: Vec<f64>) {
        self.rows.push(row);
        self.samples.push(samples);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown format {other:?} (csv, markdown)")),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "markdown",
        })
    }
}

pub const REPORT_COLUMNS: [&str; 9] = [
    "case", "law", "strategy", "size", "time_s", "ratio", "l2_mean", "linf", "status",
];

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the report rows to `path`.
pub fn emit_report(report: &BenchReport, format: ReportFormat, path: &Path) -> Result<()> {
    if report.rows.is_empty() {
        return Err(Error::Config("refusing to write an empty report".into()));
    }
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
            for row in &report.rows {
                w.serialize(row).map_err(|e| Error::csv(path, e))?;
            }
            w.flush().map_err(|e| Error::io(path, e))
        }
        ReportFormat::Markdown => {
            std::fs::write(path, render_markdown(report)).map_err(|e| Error::io(path, e))
        }
    }
}

/// Report rows as a markdown table: one header row, one row per entry.
pub fn render_markdown(report: &BenchReport) -> String {
    let mut text = format!("| {} |\n", REPORT_COLUMNS.join(" | "));
    text.push_str(&format!("|{}\n", "---|".repeat(REPORT_COLUMNS.len())));
    for r in &report.rows {
        let cells = [
            r.case.clone(),
            r.law.clone(),
            r.strategy.clone(),
            r.size.to_string(),
            cell(r.time_s),
            cell(r.ratio),
            cell(r.l2_mean),
            cell(r.linf),
            r.status.replace('|', "\\|").replace('\n', " "),
        ];
        text.push_str(&format!("| {} |\n", cells.join(" | ")));
    }
    text
}

pub fn read_report_csv(path: &Path) -> Result<Vec<BenchRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::csv(path, e)))
        .collect()
}

pub fn write_startup_csv(path: &Path, rows: &[StartupRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone)]
pub struct StressBenchSpec {
    /// Scripted laws to time; the native law is always timed as the baseline.
    pub laws: Vec<LawKind>,
    pub strategies: Vec<TransferStrategy>,
    pub sizes: Vec<usize>,
    pub repeats: usize,
    pub warmup: usize,
    pub seed: u64,
    pub timeout: Duration,
    pub params: LameParams,
    pub strain_half_width: f64,
    /// Replaces the built-in script of the single scripted law.
    pub script: Option<PathBuf>,
    /// Weight bundle JSON for the network law; exact weights are built when
    /// absent.
    pub weights: Option<PathBuf>,
}

impl Default for StressBenchSpec {
    fn default() -> Self {
        Self {
            laws: vec![LawKind::ScriptedAnalytic, LawKind::ScriptedArrayNn],
            strategies: TransferStrategy::ALL.to_vec(),
            sizes: DEFAULT_SIZES.to_vec(),
            repeats: MIN_REPEATS,
            warmup: MIN_WARMUP,
            seed: 0,
            timeout: DEFAULT_TIMEOUT,
            params: lame_from_engineering(200e9, 0.3).expect("steel constants are valid"),
            strain_half_width: DEFAULT_STRAIN_HALF_WIDTH,
            script: None,
            weights: None,
        }
    }
}

impl StressBenchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.repeats < MIN_REPEATS || self.warmup < MIN_WARMUP {
            return Err(Error::Config(format!(
                "timing needs repeats >= {MIN_REPEATS} and warmup >= {MIN_WARMUP}, got {} and {}",
                self.repeats, self.warmup
            )));
        }
        if self.sizes.is_empty() || self.strategies.is_empty() {
            return Err(Error::Config("no sizes or strategies to benchmark".into()));
        }
        if self.laws.contains(&LawKind::NativeHooke) {
            return Err(Error::Config(
                "the native law is always the baseline".into(),
            ));
        }
        if self.script.is_some() && self.laws.len() != 1 {
            return Err(Error::Config(
                "a script path needs exactly one scripted law".into(),
            ));
        }
        if self.weights.is_some() && !self.laws.contains(&LawKind::ScriptedArrayNn) {
            return Err(Error::Config("weights are only used by the nn law".into()));
        }
        MinMaxScaler::symmetric(self.strain_half_width)?;
        Ok(())
    }

    fn script_for(&self, law: LawKind) -> ScriptSource {
        match (&self.script, law) {
            (Some(p), _) => ScriptSource::Path(p.clone()),
            (None, LawKind::ScriptedArrayNn) => fixtures::ARRAY_NN_LAW.into(),
            (None, _) => fixtures::ANALYTIC_LAW.into(),
        }
    }
}

fn failure_status(e: &Error) -> String {
    match e {
        Error::Timeout(_) => "timeout".into(),
        // The last line of a guest traceback names the exception.
        other => {
            let text = other.to_string();
            let line = text
                .lines()
                .rev()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("");
            format!("failed: {}", line.trim())
        }
    }
}

fn load_law(s: &Session, spec: &StressBenchSpec, law: LawKind) -> Result<()> {
    s.load_script(&spec.script_for(law))?;
    set_lame(s, &spec.params)?;
    if law == LawKind::ScriptedArrayNn {
        match &spec.weights {
            Some(path) => load_weight_file(s, path)?,
            None => {
                let range = MinMaxScaler::symmetric(spec.strain_half_width)?;
                load_weight_bundle(s, &build_exact_nn_weights(&spec.params, &range)?)?;
            }
        }
    }
    Ok(())
}

/// Opens a session and times every (size, law, strategy) combination against
/// the native law. Rows that fail are recorded and the rest still run.
pub fn cmd_stress_bench(spec: &StressBenchSpec) -> Result<BenchReport> {
    spec.validate()?;
    let mut report = BenchReport::default();
    let start = Instant::now();
    let session = Session::open()?;
    report.startup.push(StartupRow {
        law: "-".into(),
        phase: "session_open".into(),
        time_s: start.elapsed().as_secs_f64(),
    });
    run_stress_bench(&session, spec, &mut report)?;
    session.close()?;
    Ok(report)
}

/// [`cmd_stress_bench`] on an already open session.
pub fn run_stress_bench(
    s: &Session,
    spec: &StressBenchSpec,
    report: &mut BenchReport,
) -> Result<()> {
    spec.validate()?;
    let range = MinMaxScaler::symmetric(spec.strain_half_width)?;
    for (size_index, &size) in spec.sizes.iter().enumerate() {
        let strain = synth_strain_field(size, spec.seed, &range);
        let native_run = time_repeats(spec.warmup, spec.repeats, Some(spec.timeout), |_| {
            Ok(hooke_native(&strain, &spec.params)?)
        });
        let (native_times, reference) = match native_run {
            Ok(v) => v,
            Err(e) => {
                let status = failure_status(&e);
                report.push(
                    row("native", "native", size, None, None, None, status),
                    Vec::new(),
                );
                for &law in &spec.laws {
                    for &strategy in &spec.strategies {
                        let status = "failed: no native baseline".to_string();
                        report.push(
                            row(law.name(), strategy.name(), size, None, None, None, status),
                            Vec::new(),
                        );
                    }
                }
                continue;
            }
        };
        let native_time = median(&native_times);
        report.push(
            row(
                "native",
                "native",
                size,
                Some(native_time),
                Some(1.0),
                Some(ErrorNorms::default()),
                "ok".into(),
            ),
            native_times,
        );

        for &law in &spec.laws {
            let start = Instant::now();
            let loaded = load_law(s, spec, law);
            if size_index == 0 {
                report.startup.push(StartupRow {
                    law: law.name().into(),
                    phase: "script_load".into(),
                    time_s: start.elapsed().as_secs_f64(),
                });
            }
            for &strategy in &spec.strategies {
                let result = loaded.as_ref().map_err(failure_status).and_then(|_| {
                    time_repeats(spec.warmup, spec.repeats, Some(spec.timeout), |deadline| {
                        scripted_stress_until(s, &strain, strategy, law, deadline)
                    })
                    .and_then(|(times, out)| Ok((times, error_norms(&out, &reference)?)))
                    .map_err(|e| failure_status(&e))
                });
                match result {
                    Ok((times, norms)) => {
                        let t = median(&times);
                        report.push(
                            row(
                                law.name(),
                                strategy.name(),
                                size,
                                Some(t),
                                Some(t / native_time),
                                Some(norms),
                                "ok".into(),
                            ),
                            times,
                        );
                    }
                    Err(status) => {
                        report.push(
                            row(law.name(), strategy.name(), size, None, None, None, status),
                            Vec::new(),
                        );
                    }
                }
            }
        }
    }
    Ok(())
}

fn row(
    law: &str,
    strategy: &str,
    size: usize,
    time_s: Option<f64>,
    ratio: Option<f64>,
    norms: Option<ErrorNorms>,
    status: String,
) -> BenchRow {
    BenchRow {
        case: "stress".into(),
        law: law.into(),
        strategy: strategy.into(),
        size,
        time_s,
        ratio,
        l2_mean: norms.map(|n| n.l2_mean),
        linf: norms.map(|n| n.linf),
        status,
    }
}

#[derive(Debug, Clone)]
pub struct HeatSpec {
    pub config: HeatConfig,
    pub strategy: TransferStrategy,
    /// Heat-step script; the built-in one when absent.
    pub script: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct HeatOutcome {
    pub grid: StructuredGrid,
    pub native: SolveReport,
    pub scripted: SolveReport,
    pub norms: ErrorNorms,
}

impl HeatOutcome {
    pub fn converged(&self) -> bool {
        self.native.converged && self.scripted.converged
    }
}

fn script_or(path: &Option<PathBuf>, builtin: &str) -> ScriptSource {
    match path {
        Some(p) => ScriptSource::Path(p.clone()),
        None => builtin.into(),
    }
}

/// Solves the steady heat problem with the native sweep and with the guest
/// sweep, and compares the fields.
pub fn cmd_heat(spec: &HeatSpec) -> Result<HeatOutcome> {
    spec.config.validate()?;
    let native = solve_steady::<Error, _>(&spec.config, |t, gamma| {
        Ok(native_fd_step(t, gamma, &spec.config.grid)?)
    })?;
    let session = Session::open()?;
    session.load_script(&script_or(&spec.script, fixtures::HEAT_STEP))?;
    let scripted = solve_steady(&spec.config, |t, gamma| {
        scripted_fd_step(&session, t, gamma, spec.strategy)
    })?;
    session.close()?;
    let norms = error_norms(&native.temperature, &scripted.temperature)?;
    Ok(HeatOutcome {
        grid: spec.config.grid.clone(),
        native,
        scripted,
        norms,
    })
}

/// Writes both temperature fields, both residual histories, the vertical
/// centre line and a summary into `dir`.
pub fn write_heat_artifacts(outcome: &HeatOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    io::write_field_csv(&dir.join("T_native.csv"), &outcome.native.temperature)?;
    io::write_field_csv(&dir.join("T_scripted.csv"), &outcome.scripted.temperature)?;
    io::write_residual_csv(
        &dir.join("residuals_native.csv"),
        &outcome.native.residual_history,
    )?;
    io::write_residual_csv(
        &dir.join("residuals_scripted.csv"),
        &outcome.scripted.residual_history,
    )?;
    let native_line = outcome.native.centre_line(&outcome.grid);
    let scripted_line = outcome.scripted.centre_line(&outcome.grid);
    io::write_columns_csv(
        &dir.join("centre_line.csv"),
        &["y", "T_native", "T_scripted"],
        &[
            native_line.iter().map(|p| p.0).collect(),
            native_line.iter().map(|p| p.1).collect(),
            scripted_line.iter().map(|p| p.1).collect(),
        ],
    )?;
    let path = dir.join("heat_summary.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::csv(&path, e))?;
    w.write_record([
        "solver",
        "converged",
        "iterations",
        "final_residual",
        "centre_T",
    ])
    .map_err(|e| Error::csv(&path, e))?;
    for (name, r) in [("native", &outcome.native), ("scripted", &outcome.scripted)] {
        w.write_record([
            name.to_string(),
            r.converged.to_string(),
            r.iterations.to_string(),
            cell(r.final_residual()),
            r.centre_value(&outcome.grid).to_string(),
        ])
        .map_err(|e| Error::csv(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    io::write_columns_csv(
        &dir.join("heat_norms.csv"),
        &["l2_mean", "linf"],
        &[vec![outcome.norms.l2_mean], vec![outcome.norms.linf]],
    )
}

/// Heat run whose top patch follows `base + amplitude * u_x(x, t)`, with the
/// profile evaluated by the guest before every sweep.
#[derive(Debug, Clone)]
pub struct ProfileHeatSpec {
    pub diffusivity: f64,
    pub dt: f64,
    pub bc: BoundaryConditions,
    pub amplitude: f64,
    pub sweeps: usize,
}

#[derive(Debug, Clone)]
pub struct BcDemoSpec {
    pub grid: StructuredGrid,
    pub patch: Patch,
    pub times: Vec<f64>,
    pub script: Option<PathBuf>,
    pub heat: Option<ProfileHeatSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub time: f64,
    pub x: f64,
    pub guest: f64,
    pub host: f64,
}

#[derive(Debug, Clone)]
pub struct BcDemoOutcome {
    pub samples: Vec<ProfileSample>,
    /// Largest `|guest - host|` over the samples and every heat-run update.
    pub max_abs_diff: f64,
    pub heat: Option<SolveReport>,
}

/// Samples the guest profile on a patch at each time, checks it against the
/// host formula and optionally drives a heat run with it.
pub fn cmd_bc_demo(spec: &BcDemoSpec) -> Result<BcDemoOutcome> {
    let fc = spec.grid.patch_face_centres(spec.patch);
    let session = Session::open()?;
    session.load_script(&script_or(&spec.script, fixtures::PROFILE))?;
    let mut samples = Vec::new();
    let mut max_abs_diff = 0.0_f64;
    for &time in &spec.times {
        let guest = eval_scripted_profile(&session, &fc, time)?;
        let host = evaluate_profile(&fc, time)?;
        max_abs_diff = max_abs_diff.max(error_norms(&guest, &host)?.linf);
        for (k, centre) in fc.rows().enumerate() {
            samples.push(ProfileSample {
                time,
                x: centre[0],
                guest: guest.row(k)[0],
                host: host.row(k)[0],
            });
        }
    }

    let heat = match &spec.heat {
        None => None,
        Some(h) => {
            let mut config = HeatConfig::new(spec.grid.clone(), h.diffusivity, h.dt, h.bc.clone());
            config.max_iters = h.sweeps;
            config.tol = DEFAULT_TOL;
            let (lo, hi) = h.bc.bounds();
            config.initial_temperature = 0.5 * (lo + hi);
            let base = h.bc.get(spec.patch).clone();
            let report = solve_with_boundary_updates(
                &config,
                |t, gamma| Ok::<_, Error>(native_fd_step(t, gamma, &spec.grid)?),
                |_, time, bc| {
                    let guest = eval_scripted_profile(&session, &fc, time)?;
                    let host = evaluate_profile(&fc, time)?;
                    max_abs_diff = max_abs_diff.max(error_norms(&guest, &host)?.linf);
                    let values = guest
                        .rows()
                        .enumerate()
                        .map(|(k, u)| base_value(&base, k) + h.amplitude * u[0])
                        .collect();
                    *bc.get_mut(spec.patch) = PatchBc::Faces(values);
                    Ok(())
                },
            )?;
            Some(report)
        }
    };
    session.close()?;
    Ok(BcDemoOutcome {
        samples,
        max_abs_diff,
        heat,
    })
}

fn base_value(bc: &PatchBc, k: usize) -> f64 {
    match bc {
        PatchBc::Uniform(v) => *v,
        PatchBc::Faces(v) => v[k],
    }
}

pub fn write_bc_artifacts(outcome: &BcDemoOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let s = &outcome.samples;
    io::write_columns_csv(
        &dir.join("profile_samples.csv"),
        &["time", "x", "u_x_guest", "u_x_host", "diff"],
        &[
            s.iter().map(|p| p.time).collect(),
            s.iter().map(|p| p.x).collect(),
            s.iter().map(|p| p.guest).collect(),
            s.iter().map(|p| p.host).collect(),
            s.iter().map(|p| p.guest - p.host).collect(),
        ],
    )?;
    if let Some(heat) = &outcome.heat {
        io::write_field_csv(&dir.join("T_profile_heat.csv"), &heat.temperature)?;
        io::write_residual_csv(
            &dir.join("residuals_profile_heat.csv"),
            &heat.residual_history,
        )?;
    }
    Ok(())
}

/// Writes the benchmark report plus its startup rows into `dir`.
pub fn write_bench_artifacts(
    report: &BenchReport,
    format: ReportFormat,
    dir: &Path,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(format!("stress_bench.{}", format.extension()));
    emit_report(report, format, &path)?;
    write_startup_csv(&dir.join("startup.csv"), &report.startup)?;
    Ok(path)
}
