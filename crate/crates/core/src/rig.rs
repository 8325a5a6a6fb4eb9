//! Seedable synthetic test rig that emits sweep datasets from a known actuator model.
//!
//! Above the pre-pressurization knee the readings follow the ground-truth
//! model plus Gaussian load-cell noise. Below it the loss is blended linearly
//! from a high starting loss down to the model's value at the knee, mimicking
//! a bladder that has not yet filled the shell cavity.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::characterization::{MeasurementRecord, SweepDataset, SweepProtocol};
use crate::error::{Error, Result};
use crate::force_model::{loss_fraction, ActuatorSpec, LossModel};
use crate::geometry::{equal_area_family, ideal_force_with_cap};
use crate::units::Pressure;

/// Number of inflate/deflate cycles applied to a fresh balloon before testing.
pub const DEFAULT_CONDITIONING_CYCLES: u32 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigConfig {
    pub seed: u64,
    /// Load-cell noise standard deviation, N.
    pub noise_sigma_n: f64,
    /// Pressure below which the bladder is still filling the cavity, kPa.
    pub pre_pressurization_knee_kpa: f64,
    /// Loss at the first protocol step when that step lies below the knee.
    #[serde(default = "default_start_loss")]
    pub start_loss: f64,
    #[serde(default = "default_cycles")]
    pub conditioning_cycles: u32,
    #[serde(default)]
    pub protocol: SweepProtocol,
    /// Ground-truth actuator per shape id.
    pub ground_truth: BTreeMap<String, ActuatorSpec>,
}

fn default_start_loss() -> f64 {
    0.70
}

fn default_cycles() -> u32 {
    DEFAULT_CONDITIONING_CYCLES
}

impl RigConfig {
    /// The four equal-area balloon shells, each following the linear balloon
    /// loss with a small per-shape offset: square and rectangle lose least,
    /// the triangle most. Offsets average to zero. Noise is 1 % of the circle's
    /// ideal force at the middle of the sweep.
    pub fn four_shape(seed: u64) -> Self {
        let names = ["circle", "triangle", "square", "rectangle"];
        let offsets = [0.0, 0.022, -0.012, -0.010];
        let family = equal_area_family(25.0, 2.0).expect("reference family is valid");
        let base = LossModel::balloon_fit();
        let crate::force_model::LossForm::Linear { slope_per_kpa, intercept } = base.form else { unreachable!() };
        let ground_truth = names
            .iter()
            .zip(offsets)
            .zip(family)
            .map(|((name, off), cs)| {
                let model = LossModel::linear(slope_per_kpa, intercept + off, base.valid_range_kpa).expect("valid");
                (name.to_string(), ActuatorSpec::new(cs, model, 60.0, 5.0).expect("valid"))
            })
            .collect();
        let protocol = SweepProtocol::default();
        let mid = (protocol.start_kpa + protocol.stop_kpa) / 2.0;
        let circle_area = std::f64::consts::PI * 625.0;
        RigConfig {
            seed,
            noise_sigma_n: 0.01 * mid * circle_area * 1e-3,
            pre_pressurization_knee_kpa: 30.0,
            start_loss: default_start_loss(),
            conditioning_cycles: DEFAULT_CONDITIONING_CYCLES,
            protocol,
            ground_truth,
        }
    }

    /// Every shape follows the same model exactly.
    pub fn uniform(model: LossModel, seed: u64, noise_sigma_n: f64) -> Result<Self> {
        let names = ["circle", "triangle", "square", "rectangle"];
        let family = equal_area_family(25.0, 2.0)?;
        let mut ground_truth = BTreeMap::new();
        for (name, cs) in names.iter().zip(family) {
            let spec = ActuatorSpec {
                cross_section: cs,
                loss_model: model,
                max_pressure_kpa: 60.0,
                stroke_mm: 5.0,
                allow_extrapolation: model.valid_range_kpa[1] < 60.0,
            };
            spec.validate()?;
            ground_truth.insert(name.to_string(), spec);
        }
        Ok(RigConfig {
            seed,
            noise_sigma_n,
            pre_pressurization_knee_kpa: model.valid_range_kpa[0],
            start_loss: default_start_loss(),
            conditioning_cycles: DEFAULT_CONDITIONING_CYCLES,
            protocol: SweepProtocol::default(),
            ground_truth,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.protocol.validate()?;
        if !(self.noise_sigma_n.is_finite() && self.noise_sigma_n >= 0.0) {
            return Err(Error::InvalidRig(format!("noise sigma must be >= 0, got {}", self.noise_sigma_n)));
        }
        if !(self.pre_pressurization_knee_kpa.is_finite() && self.pre_pressurization_knee_kpa >= 0.0) {
            return Err(Error::InvalidRig("pre-pressurization knee must be a non-negative pressure".into()));
        }
        if !(0.0..=1.0).contains(&self.start_loss) {
            return Err(Error::InvalidRig(format!("start loss {} is outside [0, 1]", self.start_loss)));
        }
        if self.ground_truth.is_empty() {
            return Err(Error::InvalidRig("no ground-truth actuators".into()));
        }
        for (shape, spec) in &self.ground_truth {
            spec.validate()?;
            if spec.max_pressure_kpa < self.protocol.stop_kpa {
                return Err(Error::InvalidRig(format!(
                    "{shape}: sweep stops at {} kPa but the actuator is limited to {} kPa",
                    self.protocol.stop_kpa, spec.max_pressure_kpa
                )));
            }
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML form.
    pub fn config_hash(&self) -> String {
        let text = toml::to_string(self).expect("rig config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Recorded balloon conditioning. It has no numeric effect on the readings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConditioningLog {
    pub cycles: Vec<u32>,
}

impl ConditioningLog {
    pub fn provenance_lines(&self) -> Vec<String> {
        self.cycles.iter().map(|i| format!("conditioning_cycle={i} inflate_deflate")).collect()
    }

    /// Append the cycles to a dataset's provenance.
    pub fn apply(&self, ds: &mut SweepDataset) {
        ds.provenance.extend(self.provenance_lines());
    }
}

/// Log of `n` inflate/deflate cycles.
pub fn precondition_cycles(n: u32) -> ConditioningLog {
    ConditioningLog { cycles: (1..=n).collect() }
}

/// Loss the rig applies at `pressure`, including the pre-knee blend.
pub fn rig_loss(cfg: &RigConfig, model: &LossModel, pressure: f64) -> Result<f64> {
    let knee = cfg.pre_pressurization_knee_kpa;
    let start = cfg.protocol.start_kpa;
    if pressure >= knee || knee <= start {
        return Ok(loss_fraction(Pressure::kpa(pressure)?, model).fraction);
    }
    let at_knee = loss_fraction(Pressure::kpa(knee)?, model).fraction;
    let t = (pressure - start) / (knee - start);
    Ok(cfg.start_loss + (at_knee - cfg.start_loss) * t)
}

/// Generate a sweep dataset. Shapes are visited in id order, then pressure,
/// then trial, drawing one normal deviate per record from a ChaCha8 stream
/// seeded with `cfg.seed`.
pub fn generate_sweep(cfg: &RigConfig) -> Result<SweepDataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let steps = cfg.protocol.steps();
    let mut records = Vec::with_capacity(cfg.ground_truth.len() * steps.len() * cfg.protocol.trials_per_step as usize);
    for (shape, spec) in &cfg.ground_truth {
        for &p in &steps {
            let pressure = Pressure::kpa(p)?;
            let ideal = ideal_force_with_cap(pressure, &spec.cross_section, spec.max_pressure_kpa)?.value();
            let clean = ideal * (1.0 - rig_loss(cfg, &spec.loss_model, p)?);
            for trial in 1..=cfg.protocol.trials_per_step {
                let z: f64 = StandardNormal.sample(&mut rng);
                let force = (clean + cfg.noise_sigma_n * z).max(0.0);
                records.push(MeasurementRecord::new(shape.clone(), p, trial, force)?);
            }
        }
    }
    let mut ds = SweepDataset::new(records);
    ds.provenance = vec![
        "generator=synthetic_rig".to_string(),
        format!("seed={}", cfg.seed),
        format!("config_sha256={}", cfg.config_hash()),
        format!("noise_sigma_n={}", cfg.noise_sigma_n),
        format!("pre_pressurization_knee_kpa={}", cfg.pre_pressurization_knee_kpa),
    ];
    precondition_cycles(cfg.conditioning_cycles).apply(&mut ds);
    Ok(ds)
}
