//! Command-line front end. `main.rs` only parses arguments and maps the
//! outcome of [`run`] to an exit code.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::characterization::{
    characterize, comparison_report, compute_loss_series, validate_sweep, ComparisonReport, SweepDataset, SweepProtocol,
};
use crate::config::{read_toml, to_toml, LayoutConfig, ShapesConfig};
use crate::error::Error;
use crate::force_model::{predict, ActuatorSpec, LossModel};
use crate::format::fixed4;
use crate::geometry::{equal_area_family, CrossSection};
use crate::rig::{generate_sweep, RigConfig};
use crate::svg::{LineChart, Series};
use crate::units::Pressure;
use crate::wearable::{run_gait_cycle, BraceLayout, GaitSchedule, SimulationTrace};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hybrid-actuator", version, about = "Shell-constrained soft actuator modeling toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the equal-area cross-section family.
    Geometry {
        #[arg(long, default_value_t = 25.0)]
        radius: f64,
        #[arg(long, default_value_t = 2.0)]
        aspect: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Ideal and loss-factored block force over a list of pressures.
    Predict {
        /// Actuator spec TOML file, or one of the presets `balloon` / `engineered`.
        #[arg(long)]
        spec: String,
        /// Comma list (`30,40,50`) or inclusive range `start:stop:step`.
        #[arg(long, default_value = "30:60:5")]
        pressures: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Emit a synthetic sweep dataset and its shapes config.
    Generate {
        /// Rig config TOML; defaults to the reference four-shape rig.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fit linear loss models to a measurement CSV and write comparison reports.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        shapes: PathBuf,
        /// Fit window `min,max` in kPa.
        #[arg(long, default_value = "30,60")]
        window: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulate one gait cycle of the six-actuator knee brace.
    Simulate {
        /// Layout TOML; defaults to the standard brace with engineered actuators.
        #[arg(long)]
        layout: Option<PathBuf>,
        /// Schedule TOML; defaults to the valgus-correction example.
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// Gait cycle duration, s.
        #[arg(long, default_value_t = 2.0)]
        duration: f64,
        /// Sample interval, s.
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output directory; created if missing. Without it tables go to stdout only.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
    Both,
}

impl Format {
    fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    fn svg(self) -> bool {
        matches!(self, Format::Svg | Format::Both)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e.to_string())
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parse `a,b,c` or `start:stop:step` (inclusive) pressure lists.
pub fn parse_pressures(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || usage(format!("cannot parse pressures `{text}`"));
    if let Some((start, rest)) = text.split_once(':') {
        let (stop, step) = rest.split_once(':').ok_or_else(bad)?;
        let protocol = SweepProtocol {
            start_kpa: start.trim().parse().map_err(|_| bad())?,
            stop_kpa: stop.trim().parse().map_err(|_| bad())?,
            step_kpa: step.trim().parse().map_err(|_| bad())?,
            trials_per_step: 1,
            safety_cap_kpa: f64::INFINITY,
        };
        protocol.validate().map_err(|_| bad())?;
        return Ok(protocol.steps());
    }
    let values: Vec<f64> = text.split(',').map(|s| s.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    if values.is_empty() || values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(bad());
    }
    Ok(values)
}

pub fn parse_window(text: &str) -> Result<[f64; 2], CliError> {
    let bad = || usage(format!("window must be `min,max` in kPa, got `{text}`"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
        return Err(bad());
    }
    Ok([lo, hi])
}

fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(usage(format!("input file {} does not exist", path.display())))
    }
}

fn prepare_out(output: &OutputArgs) -> Result<Option<&Path>, CliError> {
    match &output.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            Ok(Some(dir.as_path()))
        }
        None => Ok(None),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| io_err(&path, e))
}

fn load_spec(spec: &str) -> Result<ActuatorSpec, CliError> {
    match spec {
        "balloon" => Ok(ActuatorSpec::balloon(CrossSection::circle(25.0)?)?),
        "engineered" => Ok(ActuatorSpec::engineered()),
        path => {
            let path = Path::new(path);
            require_file(path)?;
            let spec: ActuatorSpec = read_toml(path)?;
            spec.validate()?;
            Ok(spec)
        }
    }
}

/// Run one subcommand, writing human-facing output to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Geometry { radius, aspect, output } => cmd_geometry(radius, aspect, &output, stdout),
        Command::Predict { spec, pressures, output } => cmd_predict(&spec, &pressures, &output, stdout),
        Command::Generate { config, seed, output } => cmd_generate(config.as_deref(), seed, &output, stdout),
        Command::Fit { input, shapes, window, output } => cmd_fit(&input, &shapes, &window, &output, stdout),
        Command::Simulate { layout, schedule, duration, dt, output } => {
            cmd_simulate(layout.as_deref(), schedule.as_deref(), duration, dt, &output, stdout)
        }
    }
}

fn emit(stdout: &mut dyn Write, text: &str) -> Result<(), CliError> {
    stdout.write_all(text.as_bytes()).map_err(|e| CliError::Data(format!("stdout: {e}")))
}

pub fn cmd_geometry(radius: f64, aspect: f64, output: &OutputArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(usage(format!("--radius must be positive, got {radius}")));
    }
    if !(aspect.is_finite() && aspect >= 1.0) {
        return Err(usage(format!("--aspect must be >= 1, got {aspect}")));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["shape", "dim1_mm", "dim2_mm", "area_mm2"]).map_err(Error::from)?;
    for cs in equal_area_family(radius, aspect)? {
        let (d1, d2) = match cs {
            CrossSection::Circle { radius_mm } => (radius_mm, f64::NAN),
            CrossSection::EquilateralTriangle { side_mm } | CrossSection::Square { side_mm } => (side_mm, f64::NAN),
            CrossSection::Rectangle { width_mm, height_mm } => (width_mm, height_mm),
            CrossSection::RoundedRectangle { width_mm, height_mm, .. } => (width_mm, height_mm),
        };
        let d2 = if d2.is_nan() { String::new() } else { fixed4(d2) };
        w.write_record([cs.kind_name().to_string(), fixed4(d1), d2, fixed4(cs.area()?)]).map_err(Error::from)?;
    }
    let table = String::from_utf8(w.into_inner().map_err(|e| CliError::Data(e.to_string()))?).expect("utf-8");
    emit(stdout, &table)?;
    if let Some(dir) = prepare_out(output)? {
        if output.format.csv() {
            write_file(dir, "geometry.csv", &table)?;
        }
    }
    Ok(())
}

pub fn cmd_predict(spec: &str, pressures: &str, output: &OutputArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let pressures = parse_pressures(pressures)?;
    let spec = load_spec(spec)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["pressure_kpa", "ideal_force_n", "loss_fraction", "efficiency", "predicted_force_n", "extrapolated"])
        .map_err(Error::from)?;
    let mut ideal_pts = Vec::new();
    let mut pred_pts = Vec::new();
    for p in pressures {
        let pr = predict(Pressure::kpa(p)?, &spec)?;
        w.write_record([
            fixed4(p),
            fixed4(pr.ideal.value()),
            fixed4(pr.loss.fraction),
            fixed4(pr.loss.efficiency()),
            fixed4(pr.force.value()),
            pr.loss.extrapolated.to_string(),
        ])
        .map_err(Error::from)?;
        ideal_pts.push((p, pr.ideal.value()));
        pred_pts.push((p, pr.force.value()));
    }
    let table = String::from_utf8(w.into_inner().map_err(|e| CliError::Data(e.to_string()))?).expect("utf-8");
    emit(stdout, &table)?;
    if let Some(dir) = prepare_out(output)? {
        if output.format.csv() {
            write_file(dir, "predict.csv", &table)?;
        }
        if output.format.svg() {
            let chart = LineChart::new("Ideal vs loss-factored block force", "pressure (kPa)", "force (N)")
                .with_series(Series::new("ideal P·A", ideal_pts))
                .with_series(Series::new("predicted", pred_pts));
            write_file(dir, "predict.svg", &chart.render())?;
        }
    }
    Ok(())
}

pub fn cmd_generate(
    config: Option<&Path>,
    seed: Option<u64>,
    output: &OutputArgs,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let mut cfg = match config {
        Some(path) => {
            require_file(path)?;
            read_toml::<RigConfig>(path)?
        }
        None => RigConfig::four_shape(0),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let ds = generate_sweep(&cfg)?;
    let shapes = ShapesConfig { shapes: cfg.ground_truth.iter().map(|(k, s)| (k.clone(), s.cross_section)).collect() };
    let csv = ds.to_csv_string();
    match prepare_out(output)? {
        Some(dir) => {
            write_file(dir, "measurements.csv", &csv)?;
            write_file(dir, "shapes.toml", &to_toml(&shapes)?)?;
            emit(
                stdout,
                &format!("wrote {} records for {} shapes to {}\n", ds.records().len(), shapes.shapes.len(), dir.display()),
            )?;
        }
        None => emit(stdout, &csv)?,
    }
    Ok(())
}

fn efficiency_chart(series: &BTreeMap<String, Vec<crate::characterization::LossPoint>>) -> LineChart {
    series
        .iter()
        .fold(LineChart::new("Force efficiency (1 - loss) vs pressure", "pressure (kPa)", "efficiency"), |chart, (shape, pts)| {
            chart.with_series(Series::new(shape, pts.iter().map(|p| (p.pressure_kpa, 1.0 - p.loss)).collect()))
        })
}

/// Cross-shape means of the report columns at each pressure.
fn force_chart(report: &ComparisonReport) -> LineChart {
    let mut by_p: BTreeMap<u64, (f64, f64, f64, f64, usize)> = BTreeMap::new();
    for r in &report.rows {
        let e = by_p.entry(r.pressure_kpa.to_bits()).or_insert((r.pressure_kpa, 0.0, 0.0, 0.0, 0));
        e.1 += r.ideal_force_n;
        e.2 += r.predicted_force_n;
        e.3 += r.mean_measured_force_n;
        e.4 += 1;
    }
    let mut rows: Vec<_> = by_p.into_values().collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let col = |k: usize| -> Vec<(f64, f64)> {
        rows.iter()
            .map(|r| {
                let v = match k {
                    0 => r.1,
                    1 => r.2,
                    _ => r.3,
                };
                (r.0, v / r.4 as f64)
            })
            .collect()
    };
    LineChart::new("Ideal vs average measured force", "pressure (kPa)", "force (N)")
        .with_series(Series::new("ideal", col(0)))
        .with_series(Series::new("fitted model", col(1)))
        .with_series(Series::new("measured mean", col(2)))
}

pub fn cmd_fit(input: &Path, shapes: &Path, window: &str, output: &OutputArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let window = parse_window(window)?;
    require_file(input)?;
    require_file(shapes)?;
    let text = std::fs::read_to_string(input).map_err(|e| io_err(input, e))?;
    let ds = SweepDataset::from_csv_str(&text)?;
    let shapes: ShapesConfig = read_toml(shapes)?;
    shapes.validate()?;

    let violations = validate_sweep(&ds, &SweepProtocol::default());
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
        return Err(CliError::Data(format!("measurement file violates the sweep protocol:\n{}", list.join("\n"))));
    }

    let result = characterize(&ds, &shapes.shapes, window, Some(&LossModel::balloon_fit()))?;
    let fitted = result.pooled.to_loss_model()?;
    let report = comparison_report(&ds, &shapes.shapes, &fitted)?;
    let series = compute_loss_series(&ds, &shapes.shapes)?;

    let mut summary = String::new();
    for (scope, fit) in result.per_shape.iter().map(|(s, f)| (s.as_str(), f)).chain([("all", &result.pooled)]) {
        summary.push_str(&format!(
            "{scope:>10}: loss = {:.5}·P + {:.4}  r² = {:.4}  (n = {})\n",
            fit.slope_per_kpa,
            fit.intercept,
            fit.r_squared,
            fit.n_points()
        ));
    }
    emit(stdout, &summary)?;

    if let Some(dir) = prepare_out(output)? {
        if output.format.csv() {
            write_file(dir, "fit.csv", &result.fit_csv())?;
            write_file(dir, "residuals.csv", &result.residuals_csv())?;
            write_file(dir, "report.csv", &report.to_csv())?;
        }
        if output.format.svg() {
            write_file(dir, "efficiency.svg", &efficiency_chart(&series).render())?;
            write_file(dir, "force.svg", &force_chart(&report).render())?;
        }
    }
    Ok(())
}

fn trace_chart(trace: &SimulationTrace) -> LineChart {
    let mut chart = LineChart::new("Knee brace gait cycle", "time (s)", "force (N) / moment (N·m)");
    for (i, id) in trace.actuator_ids.iter().enumerate() {
        chart = chart.with_series(Series::new(
            format!("{id} force"),
            trace.samples.iter().map(|s| (s.t_s, s.actuators[i].force_n)).collect(),
        ));
    }
    chart.with_series(Series::new("corrective moment", trace.samples.iter().map(|s| (s.t_s, s.moment_nm)).collect()))
}

pub fn cmd_simulate(
    layout: Option<&Path>,
    schedule: Option<&Path>,
    duration: f64,
    dt: f64,
    output: &OutputArgs,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(usage(format!("--duration must be positive, got {duration}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(usage(format!("--dt must be positive, got {dt}")));
    }
    let layout = match layout {
        Some(path) => {
            require_file(path)?;
            read_toml::<LayoutConfig>(path)?.into_layout()?
        }
        None => BraceLayout::standard(ActuatorSpec::engineered()),
    };
    let schedule = match schedule {
        Some(path) => {
            require_file(path)?;
            read_toml::<GaitSchedule>(path)?
        }
        None => GaitSchedule::valgus_correction(),
    };
    let trace = run_gait_cycle(&layout, &schedule, duration, dt)?;

    let peak = trace.samples.iter().map(|s| s.moment_nm).fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    let mut summary = format!("{} samples over {duration} s, peak corrective moment {:.4} N·m\n", trace.samples.len(), peak);
    for (i, id) in trace.actuator_ids.iter().enumerate() {
        let max_f = trace.samples.iter().map(|s| s.actuators[i].force_n).fold(0.0, f64::max);
        summary.push_str(&format!("{id:>14}: peak force {max_f:.4} N\n"));
    }
    emit(stdout, &summary)?;

    if let Some(dir) = prepare_out(output)? {
        if output.format.csv() {
            write_file(dir, "trace.csv", &trace.to_csv())?;
        }
        if output.format.svg() {
            write_file(dir, "trace.svg", &trace_chart(&trace).render())?;
        }
    }
    Ok(())
}

/// Parse `args`, run, print errors to `stderr` and return the exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match run(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
