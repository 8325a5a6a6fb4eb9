//! Unit conventions: pressures in kPa, lengths in mm, areas in mm², forces in N.
//!
//! The only place kPa·mm² is turned into newtons is [`crate::geometry::ideal_force`].

use std::fmt;

use crate::error::{Error, Result};

/// Default supply-pressure ceiling. The 3D-printed test rig risks fracture above it.
pub const DEFAULT_SAFETY_CAP_KPA: f64 = 60.0;

/// 1 kPa acting on 1 mm² is exactly 1 mN.
pub(crate) const NEWTONS_PER_KPA_MM2: f64 = 1.0e-3;

/// Gauge supply pressure in kilopascal.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Pressure(f64);

impl Pressure {
    pub const ZERO: Pressure = Pressure(0.0);

    pub fn kpa(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            // normalise -0.0 so keys and formatting stay stable
            Ok(Pressure(value + 0.0))
        } else {
            Err(Error::InvalidPressure(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Rejects the pressure if it is above `cap`.
    pub fn check_cap(self, cap: f64) -> Result<Self> {
        if self.0 > cap {
            Err(Error::SafetyCap { pressure: self.0, cap })
        } else {
            Ok(self)
        }
    }
}

impl fmt::Display for Pressure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} kPa", self.0)
    }
}

/// Force in newton.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Force(f64);

impl Force {
    pub const ZERO: Force = Force(0.0);

    pub fn newtons(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(Force(value + 0.0))
        } else {
            Err(Error::InvalidMeasurement(format!("force {value} N is not finite")))
        }
    }

    pub(crate) fn from_raw(value: f64) -> Self {
        debug_assert!(value.is_finite());
        Force(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Force {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} N", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pressure_rejects_negative_and_nan() {
        assert!(Pressure::kpa(-0.1).is_err());
        assert!(Pressure::kpa(f64::NAN).is_err());
        assert!(Pressure::kpa(f64::INFINITY).is_err());
        assert_eq!(Pressure::kpa(-0.0).unwrap().value().to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn cap_is_inclusive() {
        let p = Pressure::kpa(60.0).unwrap();
        assert!(p.check_cap(DEFAULT_SAFETY_CAP_KPA).is_ok());
        let over = Pressure::kpa(60.5).unwrap();
        assert_eq!(over.check_cap(DEFAULT_SAFETY_CAP_KPA), Err(Error::SafetyCap { pressure: 60.5, cap: 60.0 }));
    }

    #[test]
    fn force_must_be_finite() {
        assert!(Force::newtons(f64::NAN).is_err());
        assert_eq!(Force::newtons(12.5).unwrap().value(), 12.5);
    }
}
