//! Full characterization: generate a sweep, fit loss per shape and pooled over
//! 30..60 kPa, then compare the fitted model against the measured means.
//!
//! cargo run --example characterize_sweep

use std::collections::BTreeMap;

use hybrid_actuator::{characterize, comparison_report, generate_sweep, CrossSection, LossModel, RigConfig};

fn main() -> hybrid_actuator::Result<()> {
    let cfg = RigConfig::four_shape(7);
    let ds = generate_sweep(&cfg)?;
    let shapes: BTreeMap<String, CrossSection> = cfg.ground_truth.iter().map(|(k, s)| (k.clone(), s.cross_section)).collect();

    let reference = LossModel::balloon_fit();
    let ch = characterize(&ds, &shapes, [30.0, 60.0], Some(&reference))?;
    print!("{}", ch.fit_csv());

    let pooled = &ch.pooled;
    println!(
        "\npooled: loss = {:.5}*P + {:.4}  (r2 {:.4}, {} points)",
        pooled.slope_per_kpa,
        pooled.intercept,
        pooled.r_squared,
        pooled.n_points()
    );

    let report = comparison_report(&ds, &shapes, &pooled.to_loss_model()?)?;
    let mut ranked: Vec<(&String, f64)> = shapes.keys().filter_map(|s| Some((s, report.mean_loss(s, [30.0, 60.0])?))).collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
    println!("mean loss over 30..60 kPa, best first:");
    for (shape, loss) in ranked {
        println!("  {shape:<10} {loss:.4}");
    }
    Ok(())
}
