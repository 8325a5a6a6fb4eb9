//! First-order supply-line lag: a 50 kPa step command followed by venting.
//!
//! cargo run --example pressure_lag

use hybrid_actuator::step_pressure;

fn main() -> hybrid_actuator::Result<()> {
    let tau = 0.2;
    let dt = 0.05;
    let mut actual = 0.0;
    println!("t_s    commanded_kpa  actual_kpa");
    for i in 0..=40 {
        let t = i as f64 * dt;
        let commanded = if t < 1.0 { 50.0 } else { 0.0 };
        if i % 4 == 0 {
            println!("{t:<6.2} {commanded:>13.1}  {actual:>10.4}");
        }
        actual = step_pressure(actual, commanded, dt, tau)?;
    }
    // the update is exact, so one big step equals many small ones
    let one = step_pressure(0.0, 50.0, 1.0, tau)?;
    let mut many = 0.0;
    for _ in 0..100 {
        many = step_pressure(many, 50.0, 0.01, tau)?;
    }
    println!("\nafter 1 s: one step {one:.9} kPa, 100 steps {many:.9} kPa");
    Ok(())
}
