//! Six-actuator knee brace: gait-phase scheduling, first-order line dynamics,
//! per-actuator block force and the resulting corrective knee moment.
//!
//! Coordinates live in the coronal plane. Forces are positive when they push
//! from medial towards lateral. Lever arms are signed distances along the leg
//! from the knee-joint axis: positive on the thigh, negative on the shank.
//!
//! The corrective moment is the moment that closes the knee's varus/valgus
//! angle: thigh loads are taken about the knee in the thigh's frame and shank
//! loads in the shank's frame, so a symmetric three-point system
//! (one central push, two opposite end pushes) yields `2·F·d` rather than
//! cancelling to zero.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::force_model::{predicted_force, ActuatorSpec};
use crate::format::fixed4;
use crate::units::Pressure;

pub const TRACE_HEADER: [&str; 6] = ["t_s", "actuator_id", "commanded_kpa", "actual_kpa", "force_n", "moment_nm"];

pub const DEFAULT_LEVER_ARM_M: f64 = 0.15;
pub const DEFAULT_TIME_CONSTANT_S: f64 = 0.2;

/// Largest |lever arm| accepted for a knee-site actuator.
pub const KNEE_ARM_TOLERANCE_M: f64 = 0.01;

const FRACTION_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Site {
    Thigh,
    Knee,
    Shank,
}

impl Site {
    /// +1 for loads taken in the thigh frame, -1 in the shank frame.
    fn frame_sign(self) -> f64 {
        match self {
            Site::Thigh | Site::Knee => 1.0,
            Site::Shank => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Medial,
    Lateral,
}

impl Side {
    pub fn mirrored(self) -> Self {
        match self {
            Side::Medial => Side::Lateral,
            Side::Lateral => Side::Medial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceDirection {
    MedialToLateral,
    LateralToMedial,
}

impl ForceDirection {
    pub fn sign(self) -> f64 {
        match self {
            ForceDirection::MedialToLateral => 1.0,
            ForceDirection::LateralToMedial => -1.0,
        }
    }

    pub fn mirrored(self) -> Self {
        match self {
            ForceDirection::MedialToLateral => ForceDirection::LateralToMedial,
            ForceDirection::LateralToMedial => ForceDirection::MedialToLateral,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BraceActuator {
    pub id: String,
    pub site: Site,
    pub side: Side,
    /// Signed distance from the knee-joint axis, m.
    pub lever_arm_m: f64,
    pub direction: ForceDirection,
    pub spec: ActuatorSpec,
}

/// Exactly six actuators, one per (site, side).
#[derive(Debug, Clone, PartialEq)]
pub struct BraceLayout {
    actuators: Vec<BraceActuator>,
    pressure_time_constant_s: f64,
}

impl BraceLayout {
    pub fn new(actuators: Vec<BraceActuator>, pressure_time_constant_s: f64) -> Result<Self> {
        if actuators.len() != 6 {
            return Err(Error::InvalidLayout(format!("expected 6 actuators, got {}", actuators.len())));
        }
        let mut slots = BTreeSet::new();
        let mut ids = BTreeSet::new();
        for a in &actuators {
            if !slots.insert((a.site, a.side)) {
                return Err(Error::InvalidLayout(format!("two actuators at {:?} {:?}", a.site, a.side)));
            }
            if a.id.is_empty() || !ids.insert(a.id.as_str()) {
                return Err(Error::InvalidLayout(format!("actuator id `{}` is empty or repeated", a.id)));
            }
            a.spec.validate()?;
            let arm = a.lever_arm_m;
            let ok = arm.is_finite()
                && match a.site {
                    Site::Thigh => arm > 0.0,
                    Site::Knee => arm.abs() <= KNEE_ARM_TOLERANCE_M,
                    Site::Shank => arm < 0.0,
                };
            if !ok {
                return Err(Error::InvalidLayout(format!(
                    "{}: lever arm {arm} m breaks the thigh > 0, knee ~ 0, shank < 0 convention",
                    a.id
                )));
            }
        }
        if !(pressure_time_constant_s.is_finite() && pressure_time_constant_s > 0.0) {
            return Err(Error::InvalidLayout(format!("time constant must be positive, got {pressure_time_constant_s}")));
        }
        Ok(BraceLayout { actuators, pressure_time_constant_s })
    }

    /// Two X-frames carrying one actuator on each side of thigh, knee and shank.
    /// Every actuator pushes into the leg from its own side.
    pub fn standard(spec: ActuatorSpec) -> Self {
        let mut actuators = Vec::new();
        for (site, arm) in [(Site::Thigh, DEFAULT_LEVER_ARM_M), (Site::Knee, 0.0), (Site::Shank, -DEFAULT_LEVER_ARM_M)] {
            for side in [Side::Medial, Side::Lateral] {
                let direction = match side {
                    Side::Medial => ForceDirection::MedialToLateral,
                    Side::Lateral => ForceDirection::LateralToMedial,
                };
                actuators.push(BraceActuator { id: slot_id(site, side), site, side, lever_arm_m: arm, direction, spec });
            }
        }
        Self::new(actuators, DEFAULT_TIME_CONSTANT_S).expect("standard layout is valid")
    }

    pub fn actuators(&self) -> &[BraceActuator] {
        &self.actuators
    }

    pub fn time_constant_s(&self) -> f64 {
        self.pressure_time_constant_s
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.actuators.iter().position(|a| a.id == id)
    }

    /// Same brace with medial and lateral swapped, including force directions.
    pub fn mirrored(&self) -> Self {
        let actuators = self
            .actuators
            .iter()
            .map(|a| BraceActuator { side: a.side.mirrored(), direction: a.direction.mirrored(), ..a.clone() })
            .collect();
        BraceLayout { actuators, pressure_time_constant_s: self.pressure_time_constant_s }
    }
}

/// Conventional id for a (site, side) slot, e.g. `thigh_medial`.
pub fn slot_id(site: Site, side: Side) -> String {
    let site = match site {
        Site::Thigh => "thigh",
        Site::Knee => "knee",
        Site::Shank => "shank",
    };
    let side = match side {
        Side::Medial => "medial",
        Side::Lateral => "lateral",
    };
    format!("{site}_{side}")
}

/// Net lateral force and corrective moment of one force set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceSystem {
    pub net_force_n: f64,
    pub moment_nm: f64,
}

/// Net force and corrective knee moment for one force per actuator, given in
/// layout order. Inactive actuators contribute 0.
pub fn corrective_moment(layout: &BraceLayout, forces_n: &[f64]) -> Result<ForceSystem> {
    if forces_n.len() != layout.actuators.len() {
        return Err(Error::InvalidSimulation(format!(
            "{} forces given for {} actuators",
            forces_n.len(),
            layout.actuators.len()
        )));
    }
    let mut net = 0.0;
    let mut moment = 0.0;
    for (a, &f) in layout.actuators.iter().zip(forces_n) {
        let signed = a.direction.sign() * f;
        net += signed;
        moment += signed * a.lever_arm_m * a.site.frame_sign();
    }
    Ok(ForceSystem { net_force_n: net + 0.0, moment_nm: moment + 0.0 })
}

/// Exact discrete update of a first-order lag over `dt_s`. The result never
/// passes the commanded pressure.
pub fn step_pressure(actual_kpa: f64, commanded_kpa: f64, dt_s: f64, tau_s: f64) -> Result<f64> {
    if !(dt_s > 0.0 && tau_s > 0.0 && dt_s.is_finite() && tau_s.is_finite()) {
        return Err(Error::InvalidSimulation(format!("dt {dt_s} s and tau {tau_s} s must be positive")));
    }
    let gain = -(-dt_s / tau_s).exp_m1();
    let next = actual_kpa + (commanded_kpa - actual_kpa) * gain;
    Ok(next.clamp(actual_kpa.min(commanded_kpa), actual_kpa.max(commanded_kpa)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitPhase {
    pub name: String,
    /// Share of the gait cycle, in (0, 1].
    pub fraction: f64,
    /// Commanded pressure in kPa per active actuator id.
    #[serde(default)]
    pub commands: BTreeMap<String, f64>,
}

/// Ordered gait phases and the actuators pressurized in each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitSchedule {
    pub phases: Vec<GaitPhase>,
}

impl GaitSchedule {
    /// Nothing pressurized for the whole cycle.
    pub fn idle() -> Self {
        GaitSchedule { phases: vec![GaitPhase { name: "rest".into(), fraction: 1.0, commands: BTreeMap::new() }] }
    }

    /// Illustrative valgus correction for the standard layout: the lateral knee
    /// actuator holds 50 kPa through stance and the medial thigh and shank
    /// actuators join it at mid-stance; everything vents during swing.
    pub fn valgus_correction() -> Self {
        let cmd = |pairs: &[(&str, f64)]| pairs.iter().map(|&(id, p)| (id.to_string(), p)).collect();
        let knee = [("knee_lateral", 50.0)];
        let three_point = [("knee_lateral", 50.0), ("thigh_medial", 30.0), ("shank_medial", 30.0)];
        GaitSchedule {
            phases: vec![
                GaitPhase { name: "heel_strike".into(), fraction: 0.10, commands: cmd(&knee) },
                GaitPhase { name: "mid_stance".into(), fraction: 0.30, commands: cmd(&three_point) },
                GaitPhase { name: "toe_off".into(), fraction: 0.20, commands: cmd(&knee) },
                GaitPhase { name: "swing".into(), fraction: 0.40, commands: BTreeMap::new() },
            ],
        }
    }

    pub fn validate_for(&self, layout: &BraceLayout) -> Result<()> {
        if self.phases.is_empty() {
            return Err(Error::InvalidSchedule("no phases".into()));
        }
        let mut total = 0.0;
        for phase in &self.phases {
            if !(phase.fraction.is_finite() && phase.fraction > 0.0) {
                return Err(Error::InvalidSchedule(format!("phase `{}` has non-positive duration", phase.name)));
            }
            total += phase.fraction;
            for (id, &p) in &phase.commands {
                let idx = layout
                    .index_of(id)
                    .ok_or_else(|| Error::InvalidSchedule(format!("phase `{}` commands unknown actuator `{id}`", phase.name)))?;
                Pressure::kpa(p)?;
                let max = layout.actuators[idx].spec.max_pressure_kpa;
                if p > max {
                    return Err(Error::OverPressure { pressure: p, max });
                }
            }
        }
        if (total - 1.0).abs() > FRACTION_SUM_TOLERANCE {
            return Err(Error::InvalidSchedule(format!("phase fractions sum to {total}, not 1")));
        }
        Ok(())
    }

    /// Commanded pressure per actuator (layout order) for each phase.
    fn command_table(&self, layout: &BraceLayout) -> Vec<Vec<f64>> {
        self.phases
            .iter()
            .map(|ph| layout.actuators().iter().map(|a| ph.commands.get(&a.id).copied().unwrap_or(0.0)).collect())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorState {
    pub commanded_kpa: f64,
    pub actual_kpa: f64,
    pub force_n: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSample {
    pub t_s: f64,
    /// Index of the phase in force at `t_s`.
    pub phase: usize,
    /// Layout order.
    pub actuators: Vec<ActuatorState>,
    pub net_force_n: f64,
    pub moment_nm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub actuator_ids: Vec<String>,
    pub phase_names: Vec<String>,
    pub samples: Vec<TraceSample>,
}

impl SimulationTrace {
    /// One row per (sample, actuator); the moment repeats across a sample's rows.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(TRACE_HEADER).expect("in-memory write");
        for s in &self.samples {
            for (id, a) in self.actuator_ids.iter().zip(&s.actuators) {
                w.write_record([
                    fixed4(s.t_s),
                    id.clone(),
                    fixed4(a.commanded_kpa),
                    fixed4(a.actual_kpa),
                    fixed4(a.force_n),
                    fixed4(s.moment_nm),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Simulate one gait cycle from vented actuators at `t = 0`.
///
/// Samples are taken every `dt_s` (the last step is shortened to land on
/// `cycle_duration_s`). Pressure is integrated exactly, with intervals split
/// at phase boundaries so transitions happen at the exact cumulative fractions.
pub fn run_gait_cycle(
    layout: &BraceLayout,
    schedule: &GaitSchedule,
    cycle_duration_s: f64,
    dt_s: f64,
) -> Result<SimulationTrace> {
    schedule.validate_for(layout)?;
    if !(cycle_duration_s.is_finite() && cycle_duration_s > 0.0 && dt_s.is_finite() && dt_s > 0.0) {
        return Err(Error::InvalidSimulation("cycle duration and dt must be positive".into()));
    }
    let shortest = schedule.phases.iter().map(|p| p.fraction * cycle_duration_s).fold(f64::INFINITY, f64::min);
    if dt_s >= shortest {
        return Err(Error::InvalidSimulation(format!("dt {dt_s} s is not shorter than the shortest phase ({shortest} s)")));
    }

    let mut ends: Vec<f64> = schedule
        .phases
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p.fraction;
            Some(*acc * cycle_duration_s)
        })
        .collect();
    *ends.last_mut().expect("non-empty") = cycle_duration_s;
    let phase_at = |t: f64| ends.iter().position(|&e| t < e).unwrap_or(ends.len() - 1);
    let commands = schedule.command_table(layout);
    let tau = layout.time_constant_s();

    let sample = |t: f64, phase: usize, actual: &[f64]| -> Result<TraceSample> {
        let mut states = Vec::with_capacity(actual.len());
        let mut forces = Vec::with_capacity(actual.len());
        for ((a, &p), &c) in layout.actuators().iter().zip(actual).zip(&commands[phase]) {
            let f = predicted_force(Pressure::kpa(p)?, &a.spec)?.value();
            forces.push(f);
            states.push(ActuatorState { commanded_kpa: c, actual_kpa: p, force_n: f });
        }
        let system = corrective_moment(layout, &forces)?;
        Ok(TraceSample { t_s: t, phase, actuators: states, net_force_n: system.net_force_n, moment_nm: system.moment_nm })
    };

    let mut actual = vec![0.0; layout.actuators().len()];
    let mut samples = vec![sample(0.0, phase_at(0.0), &actual)?];
    let mut t = 0.0;
    let mut k = 0u64;
    while t < cycle_duration_s {
        k += 1;
        let target = (k as f64 * dt_s).min(cycle_duration_s);
        while t < target {
            let phase = phase_at(t);
            let seg_end = target.min(ends[phase]);
            for (p, &c) in actual.iter_mut().zip(&commands[phase]) {
                *p = step_pressure(*p, c, seg_end - t, tau)?;
            }
            t = seg_end;
        }
        samples.push(sample(t, phase_at(t), &actual)?);
    }

    Ok(SimulationTrace {
        actuator_ids: layout.actuators().iter().map(|a| a.id.clone()).collect(),
        phase_names: schedule.phases.iter().map(|p| p.name.clone()).collect(),
        samples,
    })
}
