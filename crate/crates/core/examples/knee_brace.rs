//! Six-actuator knee brace: static corrective moment of a three-point force
//! system, then one simulated gait cycle under the valgus schedule.
//!
//! cargo run --example knee_brace

use hybrid_actuator::{corrective_moment, run_gait_cycle, ActuatorSpec, BraceLayout, GaitSchedule};

fn main() -> hybrid_actuator::Result<()> {
    let layout = BraceLayout::standard(ActuatorSpec::engineered());

    let mut forces = vec![0.0; layout.actuators().len()];
    for (id, f) in [("knee_lateral", 100.0), ("thigh_medial", 50.0), ("shank_medial", 50.0)] {
        forces[layout.index_of(id).expect("standard id")] = f;
    }
    let sys = corrective_moment(&layout, &forces)?;
    println!("three-point system: net {:.3} N, moment {:.3} N*m", sys.net_force_n, sys.moment_nm);
    let mirrored = corrective_moment(&layout.mirrored(), &forces)?;
    println!("mirrored brace:     moment {:.3} N*m", mirrored.moment_nm);

    let trace = run_gait_cycle(&layout, &GaitSchedule::valgus_correction(), 2.0, 0.01)?;
    let knee = layout.index_of("knee_lateral").expect("standard id");
    let mut last_phase = usize::MAX;
    for s in &trace.samples {
        if s.phase != last_phase {
            println!(
                "t={:.2}s  {:<12} knee_lateral {:>6.2} kPa  moment {:>7.3} N*m",
                s.t_s, trace.phase_names[s.phase], s.actuators[knee].actual_kpa, s.moment_nm
            );
            last_phase = s.phase;
        }
    }
    let peak = trace.samples.iter().map(|s| s.moment_nm).fold(f64::MIN, f64::max);
    println!("peak moment {peak:.3} N*m over {} samples", trace.samples.len());
    Ok(())
}
