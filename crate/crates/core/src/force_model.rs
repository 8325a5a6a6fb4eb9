//! Loss-factored pressure–force–area model.
//!
//! The delivered block force is the ideal cylinder force scaled by the
//! efficiency `1 - loss`, where the loss fraction depends on supply pressure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ideal_force_with_cap, CrossSection};
use crate::units::{Force, Pressure, DEFAULT_SAFETY_CAP_KPA};

/// Parametric shape of the loss curve. Slopes and decay rates are per kPa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum LossForm {
    /// `slope·P + intercept`
    Linear { slope_per_kpa: f64, intercept: f64 },
    /// `amplitude·exp(-decay·P)`
    Exponential { amplitude: f64, decay_per_kpa: f64 },
}

/// A loss curve together with the pressure interval it was characterized over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    #[serde(flatten)]
    pub form: LossForm,
    /// `[min, max]` in kPa.
    pub valid_range_kpa: [f64; 2],
}

/// Result of evaluating a loss model at one pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossEvaluation {
    /// Fraction of the ideal force that is lost, clamped to `[0, 1]`.
    pub fraction: f64,
    /// Set when the pressure lies outside the model's valid range.
    pub extrapolated: bool,
}

impl LossEvaluation {
    pub fn efficiency(&self) -> f64 {
        1.0 - self.fraction
    }
}

impl LossModel {
    pub fn linear(slope_per_kpa: f64, intercept: f64, valid_range_kpa: [f64; 2]) -> Result<Self> {
        let m = LossModel { form: LossForm::Linear { slope_per_kpa, intercept }, valid_range_kpa };
        m.validate().map(|_| m)
    }

    pub fn exponential(amplitude: f64, decay_per_kpa: f64, valid_range_kpa: [f64; 2]) -> Result<Self> {
        let m = LossModel { form: LossForm::Exponential { amplitude, decay_per_kpa }, valid_range_kpa };
        m.validate().map(|_| m)
    }

    /// Exponential curve passing exactly through two `(pressure kPa, loss)` anchors.
    pub fn exponential_through(a: (f64, f64), b: (f64, f64), valid_range_kpa: [f64; 2]) -> Result<Self> {
        let ((p1, l1), (p2, l2)) = (a, b);
        if !(l1 > 0.0 && l2 > 0.0) || p1 == p2 {
            return Err(Error::InvalidModel("exponential anchors need positive losses at distinct pressures".into()));
        }
        let decay = (l1 / l2).ln() / (p2 - p1);
        let amplitude = l1 * (decay * p1).exp();
        Self::exponential(amplitude, decay, valid_range_kpa)
    }

    /// Linear fit of the shell-constrained balloon rig over 30–60 kPa.
    pub fn balloon_fit() -> Self {
        LossModel { form: LossForm::Linear { slope_per_kpa: -0.005, intercept: 0.522 }, valid_range_kpa: [30.0, 60.0] }
    }

    /// Engineered single-shell actuator: 70 % loss at the first 5 kPa step
    /// decaying to 3 % at 50 kPa.
    pub fn engineered() -> Self {
        Self::exponential_through((5.0, 0.70), (50.0, 0.03), [5.0, 50.0]).expect("anchors are valid")
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.valid_range_kpa;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi) {
            return Err(Error::InvalidModel(format!("valid range [{lo}, {hi}] kPa is empty or malformed")));
        }
        if hi > DEFAULT_SAFETY_CAP_KPA {
            return Err(Error::InvalidModel(format!(
                "valid range upper bound {hi} kPa is above the {DEFAULT_SAFETY_CAP_KPA} kPa safety cap"
            )));
        }
        match self.form {
            LossForm::Linear { slope_per_kpa, intercept } => {
                if !(slope_per_kpa.is_finite() && intercept.is_finite()) {
                    return Err(Error::InvalidModel("linear coefficients must be finite".into()));
                }
            }
            LossForm::Exponential { amplitude, decay_per_kpa } => {
                if !(amplitude.is_finite() && amplitude >= 0.0 && decay_per_kpa.is_finite()) {
                    return Err(Error::InvalidModel(
                        "exponential amplitude must be finite and non-negative, decay finite".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn in_range(&self, pressure: Pressure) -> bool {
        let p = pressure.value();
        p >= self.valid_range_kpa[0] && p <= self.valid_range_kpa[1]
    }

    /// Unclamped curve value.
    pub fn raw(&self, pressure: Pressure) -> f64 {
        let p = pressure.value();
        match self.form {
            LossForm::Linear { slope_per_kpa, intercept } => slope_per_kpa * p + intercept,
            LossForm::Exponential { amplitude, decay_per_kpa } => amplitude * (-decay_per_kpa * p).exp(),
        }
    }
}

/// Loss fraction at `pressure`, clamped to `[0, 1]` and flagged when extrapolated.
pub fn loss_fraction(pressure: Pressure, model: &LossModel) -> LossEvaluation {
    LossEvaluation { fraction: model.raw(pressure).clamp(0.0, 1.0), extrapolated: !model.in_range(pressure) }
}

/// Efficiency `1 - loss` at `pressure`.
pub fn efficiency(pressure: Pressure, model: &LossModel) -> f64 {
    loss_fraction(pressure, model).efficiency()
}

/// A complete hybrid actuator: interaction geometry, loss curve and operating limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorSpec {
    pub cross_section: CrossSection,
    pub loss_model: LossModel,
    pub max_pressure_kpa: f64,
    pub stroke_mm: f64,
    /// Permit `max_pressure_kpa` beyond the loss model's characterized range.
    #[serde(default)]
    pub allow_extrapolation: bool,
}

impl ActuatorSpec {
    pub fn new(cross_section: CrossSection, loss_model: LossModel, max_pressure_kpa: f64, stroke_mm: f64) -> Result<Self> {
        let spec = ActuatorSpec { cross_section, loss_model, max_pressure_kpa, stroke_mm, allow_extrapolation: false };
        spec.validate().map(|_| spec)
    }

    /// Balloon in rigid sliding shells, 5 mm stroke, characterized by the linear fit.
    pub fn balloon(cross_section: CrossSection) -> Result<Self> {
        Self::new(cross_section, LossModel::balloon_fit(), 60.0, 5.0)
    }

    /// Custom-molded bladder on a 60×40 mm rounded-rectangle pop-up area with 8 mm corners.
    pub fn engineered() -> Self {
        Self::new(
            CrossSection::RoundedRectangle { width_mm: 60.0, height_mm: 40.0, corner_radius_mm: 8.0 },
            LossModel::engineered(),
            50.0,
            5.0,
        )
        .expect("engineered preset is valid")
    }

    pub fn validate(&self) -> Result<()> {
        self.cross_section.validate()?;
        self.loss_model.validate()?;
        if !(self.stroke_mm.is_finite() && self.stroke_mm > 0.0) {
            return Err(Error::InvalidSpec(format!("stroke must be positive, got {} mm", self.stroke_mm)));
        }
        if !(self.max_pressure_kpa.is_finite() && self.max_pressure_kpa > 0.0) {
            return Err(Error::InvalidSpec(format!("max pressure must be positive, got {} kPa", self.max_pressure_kpa)));
        }
        let upper = self.loss_model.valid_range_kpa[1];
        if self.max_pressure_kpa > upper && !self.allow_extrapolation {
            return Err(Error::InvalidSpec(format!(
                "max pressure {} kPa is beyond the loss model range (upper {upper} kPa); set allow_extrapolation to accept",
                self.max_pressure_kpa
            )));
        }
        Ok(())
    }
}

/// Force and loss evaluation for one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub ideal: Force,
    pub force: Force,
    pub loss: LossEvaluation,
}

/// Ideal force, loss and delivered force at `pressure`.
pub fn predict(pressure: Pressure, spec: &ActuatorSpec) -> Result<Prediction> {
    if pressure.value() > spec.max_pressure_kpa {
        return Err(Error::OverPressure { pressure: pressure.value(), max: spec.max_pressure_kpa });
    }
    let ideal = ideal_force_with_cap(pressure, &spec.cross_section, spec.max_pressure_kpa)?;
    let loss = loss_fraction(pressure, &spec.loss_model);
    Ok(Prediction { ideal, force: Force::from_raw(ideal.value() * (1.0 - loss.fraction)), loss })
}

/// Delivered block force `P·A·(1 - loss(P))`.
pub fn predicted_force(pressure: Pressure, spec: &ActuatorSpec) -> Result<Force> {
    predict(pressure, spec).map(|p| p.force)
}

/// Loss inferred from one measured force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredLoss {
    /// `1 - measured/ideal`; not clamped.
    pub fraction: f64,
    /// Measured force exceeded the ideal force (negative loss).
    pub anomalous: bool,
}

/// Back out the loss fraction from a measured force. Negative results are
/// kept and flagged so that bad data stays visible.
pub fn loss_from_measurement(pressure: Pressure, cross_section: &CrossSection, measured: Force) -> Result<MeasuredLoss> {
    if pressure.value() == 0.0 {
        return Err(Error::ZeroPressure);
    }
    if measured.value() < 0.0 {
        return Err(Error::InvalidMeasurement(format!("measured force {} N is negative", measured.value())));
    }
    let ideal = ideal_force_with_cap(pressure, cross_section, f64::INFINITY)?;
    let fraction = 1.0 - measured.value() / ideal.value();
    Ok(MeasuredLoss { fraction, anomalous: fraction < 0.0 })
}
