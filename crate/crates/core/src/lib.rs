//! Modeling toolkit for shell-constrained soft (hybrid) fluidic actuators.
//!
//! A bladder sealed inside rigid shells behaves like a lossy hydraulic
//! cylinder: the block force is the ideal `P·A` force scaled by an efficiency
//! `1 - loss(P)`. The crate provides
//!
//! * [`geometry`]: equal-area interaction cross-sections and the ideal force,
//! * [`force_model`]: linear and exponential loss curves and force prediction,
//! * [`characterization`]: sweep CSV ingestion, OLS loss fitting and reports,
//! * [`rig`]: a seedable synthetic test rig producing sweep datasets,
//! * [`wearable`]: the six-actuator knee brace gait simulation,
//! * [`cli`]: the `hybrid-actuator` command-line front end.

pub mod characterization;
pub mod cli;
pub mod config;
pub mod error;
pub mod force_model;
pub mod format;
pub mod geometry;
pub mod rig;
pub mod svg;
pub mod units;
pub mod wearable;

pub use characterization::{
    characterize, comparison_report, compute_loss_series, fit_linear_loss, validate_sweep, ComparisonReport, FitReport,
    MeasurementRecord, ProtocolViolation, SweepDataset, SweepProtocol, DEFAULT_FIT_WINDOW_KPA,
};
pub use error::{Error, Result};
pub use force_model::{
    efficiency, loss_fraction, loss_from_measurement, predict, predicted_force, ActuatorSpec, LossEvaluation, LossForm,
    LossModel, MeasuredLoss, Prediction,
};
pub use geometry::{equal_area_family, ideal_force, ideal_force_with_cap, CrossSection};
pub use rig::{generate_sweep, precondition_cycles, RigConfig};
pub use units::{Force, Pressure, DEFAULT_SAFETY_CAP_KPA};
pub use wearable::{corrective_moment, run_gait_cycle, step_pressure, BraceLayout, GaitSchedule, SimulationTrace};
