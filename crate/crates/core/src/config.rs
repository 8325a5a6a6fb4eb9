//! TOML configuration files: shape sets, actuator specs, brace layouts,
//! gait schedules and rig configs.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::force_model::ActuatorSpec;
use crate::geometry::CrossSection;
use crate::wearable::{BraceActuator, BraceLayout, ForceDirection, Side, Site, DEFAULT_TIME_CONSTANT_S};

pub fn parse_toml<T: DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

pub fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| Error::Config(e.to_string()))
}

/// Cross-section per shape id.
///
/// ```toml
/// [shapes.circle]
/// kind = "circle"
/// radius_mm = 25.0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapesConfig {
    pub shapes: BTreeMap<String, CrossSection>,
}

impl ShapesConfig {
    pub fn validate(&self) -> Result<()> {
        for cs in self.shapes.values() {
            cs.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActuatorEntry {
    pub id: String,
    pub site: Site,
    pub side: Side,
    pub lever_arm_m: f64,
    pub direction: ForceDirection,
    /// Falls back to the layout's `default_spec`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<ActuatorSpec>,
}

/// Brace layout as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutConfig {
    #[serde(default = "default_tau")]
    pub pressure_time_constant_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_spec: Option<ActuatorSpec>,
    pub actuators: Vec<ActuatorEntry>,
}

fn default_tau() -> f64 {
    DEFAULT_TIME_CONSTANT_S
}

impl LayoutConfig {
    pub fn into_layout(self) -> Result<BraceLayout> {
        let mut actuators = Vec::with_capacity(self.actuators.len());
        for e in self.actuators {
            let spec = e
                .spec
                .or(self.default_spec)
                .ok_or_else(|| Error::InvalidLayout(format!("{}: no spec and no default_spec", e.id)))?;
            actuators.push(BraceActuator {
                id: e.id,
                site: e.site,
                side: e.side,
                lever_arm_m: e.lever_arm_m,
                direction: e.direction,
                spec,
            });
        }
        BraceLayout::new(actuators, self.pressure_time_constant_s)
    }

    /// Compact form of a layout whose actuators share one spec.
    pub fn from_layout(layout: &BraceLayout) -> Self {
        let first = layout.actuators()[0].spec;
        let shared = layout.actuators().iter().all(|a| a.spec == first);
        LayoutConfig {
            pressure_time_constant_s: layout.time_constant_s(),
            default_spec: shared.then_some(first),
            actuators: layout
                .actuators()
                .iter()
                .map(|a| ActuatorEntry {
                    id: a.id.clone(),
                    site: a.site,
                    side: a.side,
                    lever_arm_m: a.lever_arm_m,
                    direction: a.direction,
                    spec: (!shared).then_some(a.spec),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wearable::GaitSchedule;

    #[test]
    fn shapes_config() {
        let cfg: ShapesConfig = parse_toml(
            r#"
[shapes.circle]
kind = "circle"
radius_mm = 25.0

[shapes.square]
kind = "square"
side_mm = 44.31134627
"#,
        )
        .unwrap();
        assert_eq!(cfg.shapes.len(), 2);
        assert!(cfg.validate().is_ok());
        let bad: ShapesConfig = parse_toml("[shapes.c]\nkind = \"circle\"\nradius_mm = -1.0\n").unwrap();
        assert!(bad.validate().is_err());
        assert!(parse_toml::<ShapesConfig>("[shapes.c]\nkind = \"hexagon\"\n").is_err());
    }

    #[test]
    fn layout_round_trip() {
        let layout = BraceLayout::standard(ActuatorSpec::engineered());
        let cfg = LayoutConfig::from_layout(&layout);
        assert!(cfg.default_spec.is_some());
        let text = to_toml(&cfg).unwrap();
        let back: LayoutConfig = parse_toml(&text).unwrap();
        assert_eq!(back.into_layout().unwrap(), layout);
    }

    #[test]
    fn layout_needs_a_spec() {
        let mut cfg = LayoutConfig::from_layout(&BraceLayout::standard(ActuatorSpec::engineered()));
        cfg.default_spec = None;
        assert!(matches!(cfg.into_layout(), Err(Error::InvalidLayout(_))));
    }

    #[test]
    fn schedule_round_trip() {
        let s = GaitSchedule::valgus_correction();
        let back: GaitSchedule = parse_toml(&to_toml(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
