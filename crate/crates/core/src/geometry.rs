//! Planar interaction geometries and the equal-area shape family.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{Force, Pressure, DEFAULT_SAFETY_CAP_KPA, NEWTONS_PER_KPA_MM2};

/// Cross-section of the shell cavity that the pressurized bladder pushes against.
/// All dimensions are millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CrossSection {
    Circle { radius_mm: f64 },
    EquilateralTriangle { side_mm: f64 },
    Square { side_mm: f64 },
    Rectangle { width_mm: f64, height_mm: f64 },
    RoundedRectangle { width_mm: f64, height_mm: f64, corner_radius_mm: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDimension(format!("{name} must be a positive finite length, got {v}")))
    }
}

impl CrossSection {
    pub fn circle(radius_mm: f64) -> Result<Self> {
        Self::Circle { radius_mm }.validated()
    }

    pub fn equilateral_triangle(side_mm: f64) -> Result<Self> {
        Self::EquilateralTriangle { side_mm }.validated()
    }

    pub fn square(side_mm: f64) -> Result<Self> {
        Self::Square { side_mm }.validated()
    }

    pub fn rectangle(width_mm: f64, height_mm: f64) -> Result<Self> {
        Self::Rectangle { width_mm, height_mm }.validated()
    }

    pub fn rounded_rectangle(width_mm: f64, height_mm: f64, corner_radius_mm: f64) -> Result<Self> {
        Self::RoundedRectangle { width_mm, height_mm, corner_radius_mm }.validated()
    }

    /// Checks the dimension invariants. A zero corner radius is allowed (sharp rectangle).
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Circle { radius_mm } => positive("radius", radius_mm),
            Self::EquilateralTriangle { side_mm } | Self::Square { side_mm } => positive("side", side_mm),
            Self::Rectangle { width_mm, height_mm } => {
                positive("width", width_mm)?;
                positive("height", height_mm)
            }
            Self::RoundedRectangle { width_mm, height_mm, corner_radius_mm } => {
                positive("width", width_mm)?;
                positive("height", height_mm)?;
                if !(corner_radius_mm.is_finite() && corner_radius_mm >= 0.0) {
                    return Err(Error::InvalidDimension(format!(
                        "corner radius must be finite and non-negative, got {corner_radius_mm}"
                    )));
                }
                let limit = width_mm.min(height_mm) / 2.0;
                if corner_radius_mm > limit {
                    return Err(Error::InvalidDimension(format!(
                        "corner radius {corner_radius_mm} exceeds half the shorter side ({limit})"
                    )));
                }
                Ok(())
            }
        }
    }

    fn validated(self) -> Result<Self> {
        self.validate().map(|_| self)
    }

    /// Short lowercase name of the shape kind.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Circle { .. } => "circle",
            Self::EquilateralTriangle { .. } => "triangle",
            Self::Square { .. } => "square",
            Self::Rectangle { .. } => "rectangle",
            Self::RoundedRectangle { .. } => "rounded_rectangle",
        }
    }

    /// Exact analytic area in mm².
    pub fn area(&self) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            Self::Circle { radius_mm } => PI * radius_mm * radius_mm,
            Self::EquilateralTriangle { side_mm } => 3f64.sqrt() / 4.0 * side_mm * side_mm,
            Self::Square { side_mm } => side_mm * side_mm,
            Self::Rectangle { width_mm, height_mm } => width_mm * height_mm,
            Self::RoundedRectangle { width_mm, height_mm, corner_radius_mm: r } => width_mm * height_mm - (4.0 - PI) * r * r,
        })
    }
}

impl fmt::Display for CrossSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Circle { radius_mm } => write!(f, "circle r={radius_mm} mm"),
            Self::EquilateralTriangle { side_mm } => write!(f, "triangle side={side_mm} mm"),
            Self::Square { side_mm } => write!(f, "square side={side_mm} mm"),
            Self::Rectangle { width_mm, height_mm } => write!(f, "rectangle {width_mm}x{height_mm} mm"),
            Self::RoundedRectangle { width_mm, height_mm, corner_radius_mm } => {
                write!(f, "rounded rectangle {width_mm}x{height_mm} mm r={corner_radius_mm} mm")
            }
        }
    }
}

/// Circle, equilateral triangle, square and rectangle sharing the area of a
/// circle of `reference_radius_mm`. The rectangle's width/height equals
/// `rectangle_aspect`.
pub fn equal_area_family(reference_radius_mm: f64, rectangle_aspect: f64) -> Result<Vec<CrossSection>> {
    positive("reference radius", reference_radius_mm)?;
    if !(rectangle_aspect.is_finite() && rectangle_aspect >= 1.0) {
        return Err(Error::InvalidDimension(format!("rectangle aspect must be >= 1, got {rectangle_aspect}")));
    }
    let area = PI * reference_radius_mm * reference_radius_mm;
    let square_side = area.sqrt();
    let triangle_side = (4.0 * area / 3f64.sqrt()).sqrt();
    let height = (area / rectangle_aspect).sqrt();
    Ok(vec![
        CrossSection::circle(reference_radius_mm)?,
        CrossSection::equilateral_triangle(triangle_side)?,
        CrossSection::square(square_side)?,
        CrossSection::rectangle(rectangle_aspect * height, height)?,
    ])
}

/// Lossless cylinder force `P·A` for a pressure under the default safety cap.
pub fn ideal_force(pressure: Pressure, cross_section: &CrossSection) -> Result<Force> {
    ideal_force_with_cap(pressure, cross_section, DEFAULT_SAFETY_CAP_KPA)
}

/// Lossless cylinder force `P·A` with an actuator-specific pressure cap.
pub fn ideal_force_with_cap(pressure: Pressure, cross_section: &CrossSection, cap_kpa: f64) -> Result<Force> {
    pressure.check_cap(cap_kpa)?;
    let area = cross_section.area()?;
    Ok(Force::from_raw(pressure.value() * area * NEWTONS_PER_KPA_MM2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn kpa(v: f64) -> Pressure {
        Pressure::kpa(v).unwrap()
    }

    /// Hit-or-miss integration over the bounding box, using only a point-in-shape test.
    fn monte_carlo_area(w: f64, h: f64, r: f64, samples: usize) -> f64 {
        let inside = |x: f64, y: f64| {
            // fold into the first quadrant relative to the centre
            let (x, y) = ((x - w / 2.0).abs(), (y - h / 2.0).abs());
            let (cx, cy) = (w / 2.0 - r, h / 2.0 - r);
            if x <= cx || y <= cy {
                true
            } else {
                (x - cx).powi(2) + (y - cy).powi(2) <= r * r
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let hits = (0..samples).filter(|_| inside(rng.random::<f64>() * w, rng.random::<f64>() * h)).count();
        w * h * hits as f64 / samples as f64
    }

    #[test]
    fn circle_area() {
        assert_relative_eq!(CrossSection::circle(25.0).unwrap().area().unwrap(), 1963.4954, epsilon = 1e-4);
    }

    #[test]
    fn square_from_equal_area_side() {
        let side = (PI * 625.0).sqrt();
        assert_relative_eq!(side, 44.3113, epsilon = 1e-4);
        // squaring the side recovers the circle area
        assert_relative_eq!(CrossSection::square(44.3113).unwrap().area().unwrap(), 1963.49, epsilon = 0.01);
    }

    #[test]
    fn rounded_rectangle_area_matches_monte_carlo() {
        let analytic = CrossSection::rounded_rectangle(60.0, 40.0, 8.0).unwrap().area().unwrap();
        assert_relative_eq!(analytic, 2345.062, epsilon = 1e-3);
        let mc = monte_carlo_area(60.0, 40.0, 8.0, 2_000_000);
        // binomial std error is about 0.6 mm² here
        assert!((mc - analytic).abs() < 4.0, "mc {mc} vs analytic {analytic}");
    }

    #[test]
    fn zero_corner_radius_is_plain_rectangle() {
        let rr = CrossSection::rounded_rectangle(60.0, 40.0, 0.0).unwrap().area().unwrap();
        let r = CrossSection::rectangle(60.0, 40.0).unwrap().area().unwrap();
        assert_eq!(rr, r);
    }

    #[test]
    fn invalid_dimensions() {
        assert!(CrossSection::circle(0.0).is_err());
        assert!(CrossSection::square(-1.0).is_err());
        assert!(CrossSection::rectangle(10.0, f64::NAN).is_err());
        assert!(CrossSection::rounded_rectangle(60.0, 40.0, 20.5).is_err());
        assert!(CrossSection::rounded_rectangle(60.0, 40.0, 20.0).is_ok());
        assert!(CrossSection::rounded_rectangle(60.0, 40.0, -1.0).is_err());
        // deserialized values bypass the constructors, area still checks
        let raw = CrossSection::Circle { radius_mm: -3.0 };
        assert!(matches!(raw.area(), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn family_sides() {
        let fam = equal_area_family(25.0, 2.0).unwrap();
        assert_eq!(fam.len(), 4);
        match fam[1] {
            CrossSection::EquilateralTriangle { side_mm } => {
                assert_relative_eq!(side_mm, 67.3387, epsilon = 1e-4);
                // Heron's formula as an independent area check
                let s = 1.5 * side_mm;
                let heron = (s * (s - side_mm).powi(3)).sqrt();
                assert_relative_eq!(heron, PI * 625.0, max_relative = 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        match fam[2] {
            CrossSection::Square { side_mm } => assert_relative_eq!(side_mm, 44.3113, epsilon = 1e-4),
            other => panic!("unexpected {other:?}"),
        }
        match fam[3] {
            CrossSection::Rectangle { width_mm, height_mm } => assert_relative_eq!(width_mm / height_mm, 2.0, epsilon = 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn aspect_one_rectangle_is_square() {
        let fam = equal_area_family(25.0, 1.0).unwrap();
        let CrossSection::Square { side_mm } = fam[2] else { panic!() };
        let CrossSection::Rectangle { width_mm, height_mm } = fam[3] else { panic!() };
        assert_eq!(width_mm, side_mm);
        assert_eq!(height_mm, side_mm);
    }

    #[test]
    fn family_rejects_bad_inputs() {
        assert!(equal_area_family(25.0, 0.5).is_err());
        assert!(equal_area_family(0.0, 2.0).is_err());
    }

    #[test]
    fn ideal_force_examples() {
        let circle = CrossSection::circle(25.0).unwrap();
        assert_relative_eq!(ideal_force(kpa(60.0), &circle).unwrap().value(), 117.810, epsilon = 1e-3);
        assert_eq!(ideal_force(kpa(0.0), &circle).unwrap().value(), 0.0);
        let rr = CrossSection::rounded_rectangle(60.0, 40.0, 8.0).unwrap();
        assert_relative_eq!(ideal_force(kpa(50.0), &rr).unwrap().value(), 117.253, epsilon = 1e-3);
    }

    #[test]
    fn ideal_force_respects_cap() {
        let circle = CrossSection::circle(25.0).unwrap();
        assert!(matches!(ideal_force(kpa(61.0), &circle), Err(Error::SafetyCap { .. })));
        assert!(ideal_force_with_cap(kpa(80.0), &circle, 100.0).is_ok());
    }

    #[test]
    fn toml_round_trip() {
        let cs: CrossSection =
            toml::from_str("kind = \"rounded_rectangle\"\nwidth_mm = 60.0\nheight_mm = 40.0\ncorner_radius_mm = 8.0\n").unwrap();
        assert_eq!(cs, CrossSection::rounded_rectangle(60.0, 40.0, 8.0).unwrap());
        let text = toml::to_string(&cs).unwrap();
        assert_eq!(toml::from_str::<CrossSection>(&text).unwrap(), cs);
    }

    proptest! {
        #[test]
        fn equal_area_invariance(radius in 1.0f64..100.0, aspect in 1.0f64..6.0, p in 0.1f64..60.0) {
            let fam = equal_area_family(radius, aspect).unwrap();
            let reference = ideal_force(kpa(p), &fam[0]).unwrap().value();
            for cs in &fam[1..] {
                let f = ideal_force(kpa(p), cs).unwrap().value();
                prop_assert!(((f - reference) / reference).abs() < 1e-9);
            }
        }

        #[test]
        fn force_is_linear_in_pressure(p in 0.0f64..30.0, alpha in 0.0f64..2.0, radius in 1.0f64..50.0) {
            let cs = CrossSection::circle(radius).unwrap();
            let base = ideal_force(kpa(p), &cs).unwrap().value();
            let scaled = ideal_force(kpa(alpha * p), &cs).unwrap().value();
            prop_assert!((scaled - alpha * base).abs() <= 1e-12 * scaled.abs().max(1.0));
        }

        #[test]
        fn area_increases_with_each_length(w in 1.0f64..100.0, h in 1.0f64..100.0, frac in 0.0f64..1.0, dw in 0.01f64..10.0) {
            let r = frac * w.min(h) / 2.0;
            let base = CrossSection::rounded_rectangle(w, h, r).unwrap().area().unwrap();
            prop_assert!(CrossSection::rounded_rectangle(w + dw, h, r).unwrap().area().unwrap() > base);
            prop_assert!(CrossSection::rounded_rectangle(w, h + dw, r).unwrap().area().unwrap() > base);
            let p = kpa(40.0);
            prop_assert!(ideal_force(p, &CrossSection::circle(w + dw).unwrap()).unwrap().value()
                > ideal_force(p, &CrossSection::circle(w).unwrap()).unwrap().value());
            prop_assert!(CrossSection::equilateral_triangle(w + dw).unwrap().area().unwrap()
                > CrossSection::equilateral_triangle(w).unwrap().area().unwrap());
            prop_assert!(CrossSection::square(w + dw).unwrap().area().unwrap()
                > CrossSection::square(w).unwrap().area().unwrap());
        }
    }
}
