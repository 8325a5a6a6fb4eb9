//! Pressure-sweep ingestion, trial aggregation, least-squares loss fitting and
//! ideal-vs-measured comparison reports.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::force_model::{loss_fraction, loss_from_measurement, LossForm, LossModel};
use crate::format::{fixed4, sci4};
use crate::geometry::{ideal_force_with_cap, CrossSection};
use crate::units::{Force, Pressure, DEFAULT_SAFETY_CAP_KPA};

/// Exact header of the measurement CSV.
pub const MEASUREMENT_HEADER: [&str; 4] = ["shape_id", "pressure_kpa", "trial", "force_n"];

/// Exact header of the comparison report CSV.
pub const REPORT_HEADER: [&str; 6] =
    ["shape_id", "pressure_kpa", "ideal_force_n", "predicted_force_n", "mean_measured_force_n", "loss_fraction"];

/// Header of the fit summary CSV.
pub const FIT_HEADER: [&str; 9] = [
    "scope",
    "window_min_kpa",
    "window_max_kpa",
    "n_points",
    "slope_per_kpa",
    "intercept",
    "r_squared",
    "delta_slope",
    "delta_intercept",
];

/// Default fitting window. Below 30 kPa the bladder is still filling the cavity.
pub const DEFAULT_FIT_WINDOW_KPA: [f64; 2] = [30.0, 60.0];

/// Tolerance for matching a recorded pressure to a protocol step.
const STEP_TOLERANCE_KPA: f64 = 1e-6;

/// One load-cell reading.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub shape_id: String,
    pub pressure: Pressure,
    /// 1-based repetition index at this pressure.
    pub trial: u32,
    pub force: Force,
}

impl MeasurementRecord {
    pub fn new(shape_id: impl Into<String>, pressure_kpa: f64, trial: u32, force_n: f64) -> Result<Self> {
        let shape_id = shape_id.into();
        if shape_id.is_empty() {
            return Err(Error::InvalidMeasurement("empty shape_id".into()));
        }
        if trial == 0 {
            return Err(Error::InvalidMeasurement("trial numbers start at 1".into()));
        }
        let force = Force::newtons(force_n)?;
        if force.value() < 0.0 {
            return Err(Error::InvalidMeasurement(format!("negative force {force_n} N")));
        }
        Ok(MeasurementRecord { shape_id, pressure: Pressure::kpa(pressure_kpa)?, trial, force })
    }

    fn sort_key(&self, other: &Self) -> std::cmp::Ordering {
        self.shape_id
            .cmp(&other.shape_id)
            .then(self.pressure.value().total_cmp(&other.pressure.value()))
            .then(self.trial.cmp(&other.trial))
            .then(self.force.value().total_cmp(&other.force.value()))
    }
}

/// Mean and spread of the trials recorded for one (shape, pressure) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub shape_id: String,
    pub pressure_kpa: f64,
    pub trials: usize,
    pub mean_force_n: f64,
    /// Sample standard deviation; zero for a single trial.
    pub std_dev_n: f64,
}

/// The stepwise sweep procedure: start, increment and stop pressure plus repeats per step.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepProtocol {
    pub start_kpa: f64,
    pub step_kpa: f64,
    pub stop_kpa: f64,
    pub trials_per_step: u32,
    #[serde(default = "default_cap")]
    pub safety_cap_kpa: f64,
}

fn default_cap() -> f64 {
    DEFAULT_SAFETY_CAP_KPA
}

impl Default for SweepProtocol {
    /// 5 kPa increments up to 60 kPa, three readings per step.
    fn default() -> Self {
        SweepProtocol {
            start_kpa: 5.0,
            step_kpa: 5.0,
            stop_kpa: 60.0,
            trials_per_step: 3,
            safety_cap_kpa: DEFAULT_SAFETY_CAP_KPA,
        }
    }
}

impl SweepProtocol {
    pub fn validate(&self) -> Result<()> {
        let ok = self.step_kpa.is_finite()
            && self.step_kpa > 0.0
            && self.start_kpa.is_finite()
            && self.start_kpa >= 0.0
            && self.start_kpa <= self.stop_kpa
            && self.stop_kpa <= self.safety_cap_kpa
            && self.trials_per_step >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidRig(format!("malformed sweep protocol {self:?}")))
        }
    }

    /// Pressure steps from start to stop inclusive.
    pub fn steps(&self) -> Vec<f64> {
        let n = ((self.stop_kpa - self.start_kpa) / self.step_kpa + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start_kpa + i as f64 * self.step_kpa).collect()
    }
}

/// Ways a dataset can deviate from its protocol.
#[derive(Debug, Clone, PartialEq)]
pub enum ProtocolViolation {
    MissingStep { shape_id: String, pressure_kpa: f64 },
    TrialCount { shape_id: String, pressure_kpa: f64, expected: u32, found: usize },
    OverCap { shape_id: String, pressure_kpa: f64 },
    OffProtocolStep { shape_id: String, pressure_kpa: f64 },
}

impl std::fmt::Display for ProtocolViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::MissingStep { shape_id, pressure_kpa } => write!(f, "{shape_id}: missing {pressure_kpa} kPa step"),
            Self::TrialCount { shape_id, pressure_kpa, expected, found } => {
                write!(f, "{shape_id}: {found} trials at {pressure_kpa} kPa, expected {expected}")
            }
            Self::OverCap { shape_id, pressure_kpa } => write!(f, "{shape_id}: {pressure_kpa} kPa is over the safety cap"),
            Self::OffProtocolStep { shape_id, pressure_kpa } => {
                write!(f, "{shape_id}: {pressure_kpa} kPa is not a protocol step")
            }
        }
    }
}

/// Raw sweep readings plus free-form provenance lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepDataset {
    records: Vec<MeasurementRecord>,
    /// Comment lines carried in the CSV header, without the leading `#`.
    pub provenance: Vec<String>,
}

impl SweepDataset {
    pub fn new(mut records: Vec<MeasurementRecord>) -> Self {
        records.sort_by(|a, b| a.sort_key(b));
        SweepDataset { records, provenance: Vec::new() }
    }

    /// Records in canonical (shape, pressure, trial) order.
    pub fn records(&self) -> &[MeasurementRecord] {
        &self.records
    }

    pub fn shape_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.records.iter().map(|r| r.shape_id.as_str()).collect();
        ids.dedup();
        ids
    }

    /// Per (shape, pressure) arithmetic mean and sample standard deviation.
    pub fn aggregates(&self) -> Vec<Aggregate> {
        self.records
            .chunk_by(|a, b| a.shape_id == b.shape_id && a.pressure == b.pressure)
            .map(|group| {
                let n = group.len();
                let mean = group.iter().map(|r| r.force.value()).sum::<f64>() / n as f64;
                let std_dev = if n > 1 {
                    let ss: f64 = group.iter().map(|r| (r.force.value() - mean).powi(2)).sum();
                    (ss / (n - 1) as f64).sqrt()
                } else {
                    0.0
                };
                Aggregate {
                    shape_id: group[0].shape_id.clone(),
                    pressure_kpa: group[0].pressure.value(),
                    trials: n,
                    mean_force_n: mean,
                    std_dev_n: std_dev,
                }
            })
            .collect()
    }

    /// Parse the measurement CSV. `#` lines before the header become provenance.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let provenance =
            text.lines().take_while(|l| l.starts_with('#')).map(|l| l.trim_start_matches('#').trim().to_string()).collect();
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = reader.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != MEASUREMENT_HEADER {
            return Err(Error::Csv(format!(
                "expected header `{}`, found `{}`",
                MEASUREMENT_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut records = Vec::new();
        for (i, row) in reader.records().enumerate() {
            let row = row?;
            let line = i + 2;
            let field =
                |k: usize| row.get(k).ok_or_else(|| Error::Csv(format!("line {line}: missing column {}", MEASUREMENT_HEADER[k])));
            let number = |k: usize| -> Result<f64> {
                field(k)?.parse::<f64>().map_err(|e| Error::Csv(format!("line {line}: {}: {e}", MEASUREMENT_HEADER[k])))
            };
            let trial = field(2)?.parse::<u32>().map_err(|e| Error::Csv(format!("line {line}: trial: {e}")))?;
            let record = MeasurementRecord::new(field(0)?, number(1)?, trial, number(3)?)
                .map_err(|e| Error::Csv(format!("line {line}: {e}")))?;
            records.push(record);
        }
        let mut ds = Self::new(records);
        ds.provenance = provenance;
        Ok(ds)
    }

    /// Write the measurement CSV with full round-trip precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for line in &self.provenance {
            writeln!(out, "# {line}").map_err(|e| Error::Csv(e.to_string()))?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(MEASUREMENT_HEADER)?;
        for r in &self.records {
            w.write_record([
                r.shape_id.clone(),
                r.pressure.value().to_string(),
                r.trial.to_string(),
                r.force.value().to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

fn on_step(p: f64, steps: &[f64]) -> bool {
    steps.iter().any(|s| (s - p).abs() <= STEP_TOLERANCE_KPA)
}

/// List every deviation of `ds` from `protocol`. An empty list means conformant.
pub fn validate_sweep(ds: &SweepDataset, protocol: &SweepProtocol) -> Vec<ProtocolViolation> {
    let steps = protocol.steps();
    let aggregates = ds.aggregates();
    let mut violations = Vec::new();
    for shape in ds.shape_ids() {
        let groups: Vec<&Aggregate> = aggregates.iter().filter(|a| a.shape_id == shape).collect();
        for &step in &steps {
            match groups.iter().find(|a| (a.pressure_kpa - step).abs() <= STEP_TOLERANCE_KPA) {
                None => violations.push(ProtocolViolation::MissingStep { shape_id: shape.to_string(), pressure_kpa: step }),
                Some(a) if a.trials != protocol.trials_per_step as usize => violations.push(ProtocolViolation::TrialCount {
                    shape_id: shape.to_string(),
                    pressure_kpa: step,
                    expected: protocol.trials_per_step,
                    found: a.trials,
                }),
                Some(_) => {}
            }
        }
        for a in &groups {
            if a.pressure_kpa > protocol.safety_cap_kpa {
                violations.push(ProtocolViolation::OverCap { shape_id: shape.to_string(), pressure_kpa: a.pressure_kpa });
            } else if !on_step(a.pressure_kpa, &steps) {
                violations.push(ProtocolViolation::OffProtocolStep { shape_id: shape.to_string(), pressure_kpa: a.pressure_kpa });
            }
        }
    }
    violations
}

/// Loss derived from one aggregated reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossPoint {
    pub pressure_kpa: f64,
    pub loss: f64,
    /// Measured force exceeded the ideal force.
    pub anomalous: bool,
}

/// Per-shape `(pressure, mean loss)` series computed from the trial means.
/// Zero-pressure groups carry no loss information and are skipped.
pub fn compute_loss_series(
    ds: &SweepDataset,
    shapes: &BTreeMap<String, CrossSection>,
) -> Result<BTreeMap<String, Vec<LossPoint>>> {
    let mut out: BTreeMap<String, Vec<LossPoint>> = BTreeMap::new();
    for a in ds.aggregates() {
        let cs = shapes.get(&a.shape_id).ok_or_else(|| Error::UnknownShape(a.shape_id.clone()))?;
        let series = out.entry(a.shape_id.clone()).or_default();
        if a.pressure_kpa == 0.0 {
            continue;
        }
        let measured = loss_from_measurement(Pressure::kpa(a.pressure_kpa)?, cs, Force::newtons(a.mean_force_n)?)?;
        series.push(LossPoint { pressure_kpa: a.pressure_kpa, loss: measured.fraction, anomalous: measured.anomalous });
    }
    Ok(out)
}

/// Cross-shape mean loss at each pressure present in any series.
pub fn pooled_loss_series(series: &BTreeMap<String, Vec<LossPoint>>) -> Vec<(f64, f64)> {
    let mut all: Vec<(f64, f64)> = series.values().flatten().map(|p| (p.pressure_kpa, p.loss)).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    all.chunk_by(|a, b| a.0 == b.0).map(|g| (g[0].0, g.iter().map(|p| p.1).sum::<f64>() / g.len() as f64)).collect()
}

/// Outcome of an ordinary least-squares line fit of loss against pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub window_kpa: [f64; 2],
    pub slope_per_kpa: f64,
    pub intercept: f64,
    /// Coefficient of determination `1 - SS_res/SS_tot`.
    pub r_squared: f64,
    /// `(pressure, observed - fitted)` for each point inside the window.
    pub residuals: Vec<(f64, f64)>,
    /// `(fitted - reference)` slope and intercept, when a linear reference was supplied.
    pub reference_deltas: Option<(f64, f64)>,
}

impl FitReport {
    pub fn n_points(&self) -> usize {
        self.residuals.len()
    }

    /// The fitted line as a loss model valid over the fit window.
    pub fn to_loss_model(&self) -> Result<LossModel> {
        LossModel::linear(self.slope_per_kpa, self.intercept, self.window_kpa)
    }

    fn csv_row(&self, scope: &str) -> Vec<String> {
        let (ds, di) = match self.reference_deltas {
            Some((ds, di)) => (sci4(ds), sci4(di)),
            None => (String::new(), String::new()),
        };
        vec![
            scope.to_string(),
            fixed4(self.window_kpa[0]),
            fixed4(self.window_kpa[1]),
            self.n_points().to_string(),
            sci4(self.slope_per_kpa),
            sci4(self.intercept),
            sci4(self.r_squared),
            ds,
            di,
        ]
    }
}

/// Fit `loss = slope·P + intercept` to the points whose pressure lies inside `window_kpa`.
pub fn fit_linear_loss(points: &[(f64, f64)], window_kpa: [f64; 2], reference: Option<&LossModel>) -> Result<FitReport> {
    let [lo, hi] = window_kpa;
    let inside: Vec<(f64, f64)> = points.iter().copied().filter(|&(p, _)| p >= lo && p <= hi).collect();
    if inside.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, found: inside.len() });
    }
    let n = inside.len() as f64;
    let mean_x = inside.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = inside.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in &inside {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residuals: Vec<(f64, f64)> = inside.iter().map(|&(x, y)| (x, y - (slope * x + intercept))).collect();
    let ss_res: f64 = residuals.iter().map(|r| r.1 * r.1).sum();
    let r_squared = if syy == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    let reference_deltas = reference.and_then(|m| match m.form {
        LossForm::Linear { slope_per_kpa, intercept: ref_intercept } => Some((slope - slope_per_kpa, intercept - ref_intercept)),
        LossForm::Exponential { .. } => None,
    });
    Ok(FitReport { window_kpa, slope_per_kpa: slope, intercept, r_squared, residuals, reference_deltas })
}

/// Per-shape fits plus one fit of the cross-shape mean loss.
#[derive(Debug, Clone, PartialEq)]
pub struct Characterization {
    pub per_shape: BTreeMap<String, FitReport>,
    pub pooled: FitReport,
}

impl Characterization {
    /// Fit summary CSV: one row per shape followed by the pooled row (`scope = all`).
    pub fn fit_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(FIT_HEADER).expect("in-memory write");
        for (shape, fit) in &self.per_shape {
            w.write_record(fit.csv_row(shape)).expect("in-memory write");
        }
        w.write_record(self.pooled.csv_row("all")).expect("in-memory write");
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    /// `scope,pressure_kpa,residual` rows.
    pub fn residuals_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["scope", "pressure_kpa", "residual"]).expect("in-memory write");
        let scopes = self.per_shape.iter().map(|(s, f)| (s.as_str(), f)).chain(std::iter::once(("all", &self.pooled)));
        for (scope, fit) in scopes {
            for &(p, r) in &fit.residuals {
                w.write_record([scope.to_string(), fixed4(p), sci4(r)]).expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Loss series for every shape, a fit per shape and a pooled fit, all over `window_kpa`.
pub fn characterize(
    ds: &SweepDataset,
    shapes: &BTreeMap<String, CrossSection>,
    window_kpa: [f64; 2],
    reference: Option<&LossModel>,
) -> Result<Characterization> {
    let series = compute_loss_series(ds, shapes)?;
    let mut per_shape = BTreeMap::new();
    for (shape, points) in &series {
        let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.pressure_kpa, p.loss)).collect();
        per_shape.insert(shape.clone(), fit_linear_loss(&xy, window_kpa, reference)?);
    }
    let pooled = fit_linear_loss(&pooled_loss_series(&series), window_kpa, reference)?;
    Ok(Characterization { per_shape, pooled })
}

/// One row of the ideal / predicted / measured comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub shape_id: String,
    pub pressure_kpa: f64,
    pub ideal_force_n: f64,
    pub predicted_force_n: f64,
    pub mean_measured_force_n: f64,
    /// Loss derived from the mean measured force; zero at zero pressure.
    pub loss_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(REPORT_HEADER).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.shape_id.clone(),
                fixed4(r.pressure_kpa),
                fixed4(r.ideal_force_n),
                fixed4(r.predicted_force_n),
                fixed4(r.mean_measured_force_n),
                fixed4(r.loss_fraction),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    /// Mean measured loss of `shape_id` over rows inside `window_kpa`.
    pub fn mean_loss(&self, shape_id: &str, window_kpa: [f64; 2]) -> Option<f64> {
        let losses: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.shape_id == shape_id && r.pressure_kpa >= window_kpa[0] && r.pressure_kpa <= window_kpa[1])
            .map(|r| r.loss_fraction)
            .collect();
        (!losses.is_empty()).then(|| losses.iter().sum::<f64>() / losses.len() as f64)
    }
}

/// Ideal force, force predicted by `fitted`, and mean measured force at every
/// recorded (shape, pressure).
pub fn comparison_report(
    ds: &SweepDataset,
    shapes: &BTreeMap<String, CrossSection>,
    fitted: &LossModel,
) -> Result<ComparisonReport> {
    let mut rows = Vec::new();
    for a in ds.aggregates() {
        let cs = shapes.get(&a.shape_id).ok_or_else(|| Error::UnknownShape(a.shape_id.clone()))?;
        let pressure = Pressure::kpa(a.pressure_kpa)?;
        let ideal = ideal_force_with_cap(pressure, cs, f64::INFINITY)?.value();
        let predicted = ideal * (1.0 - loss_fraction(pressure, fitted).fraction);
        let loss = if a.pressure_kpa == 0.0 { 0.0 } else { 1.0 - a.mean_force_n / ideal };
        rows.push(ComparisonRow {
            shape_id: a.shape_id,
            pressure_kpa: a.pressure_kpa,
            ideal_force_n: ideal,
            predicted_force_n: predicted,
            mean_measured_force_n: a.mean_force_n,
            loss_fraction: loss,
        });
    }
    Ok(ComparisonReport { rows })
}
