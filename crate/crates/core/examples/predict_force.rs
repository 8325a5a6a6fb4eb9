//! Loss-factored force prediction for the balloon fit and the engineered actuator,
//! plus the inverse: recovering a loss fraction from a measured force.
//!
//! cargo run --example predict_force

use hybrid_actuator::{loss_from_measurement, predict, ActuatorSpec, CrossSection, Force, Pressure};

fn main() -> hybrid_actuator::Result<()> {
    let balloon = ActuatorSpec::balloon(CrossSection::circle(25.0)?)?;
    println!("balloon circle r=25 mm");
    for kpa in [30.0, 40.0, 50.0, 60.0] {
        let pred = predict(Pressure::kpa(kpa)?, &balloon)?;
        println!(
            "  {kpa:>4} kPa  ideal {:>7.3} N  loss {:.3}  force {:>7.3} N",
            pred.ideal.value(),
            pred.loss.fraction,
            pred.force.value()
        );
    }

    let engineered = ActuatorSpec::engineered();
    println!("\nengineered {}", engineered.cross_section);
    for kpa in [5.0, 20.0, 35.0, 50.0] {
        let pred = predict(Pressure::kpa(kpa)?, &engineered)?;
        println!("  {kpa:>4} kPa  efficiency {:.3}  force {:>7.3} N", pred.loss.efficiency(), pred.force.value());
    }

    // anything above the spec's max pressure is refused
    if let Err(e) = predict(Pressure::kpa(55.0)?, &engineered) {
        println!("  55 kPa rejected: {e}");
    }

    let circle = CrossSection::circle(25.0)?;
    let measured = loss_from_measurement(Pressure::kpa(45.0)?, &circle, Force::newtons(60.0)?)?;
    println!("\n60 N measured at 45 kPa on the circle -> loss {:.4}", measured.fraction);
    Ok(())
}
