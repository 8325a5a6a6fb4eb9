//! Equal-area cross-sections and their ideal force across a pressure sweep.
//!
//! cargo run --example geometry_family

use hybrid_actuator::{equal_area_family, ideal_force, Pressure};

fn main() -> hybrid_actuator::Result<()> {
    let family = equal_area_family(25.0, 2.0)?;
    for cs in &family {
        println!("{:<22} {}  area {:.4} mm^2", cs.kind_name(), cs, cs.area()?);
    }

    println!("\npressure_kpa  ideal_force_n (same for every shape)");
    for step in (0..=60).step_by(10) {
        let p = Pressure::kpa(step as f64)?;
        let forces: Vec<f64> = family.iter().map(|cs| ideal_force(p, cs).map(|f| f.value())).collect::<Result<_, _>>()?;
        println!("{:>12}  {:.4}", step, forces[0]);
    }
    Ok(())
}
