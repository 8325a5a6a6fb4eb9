//! Seeded synthetic sweep: four equal-area shapes, three trials per 5 kPa step.
//! Writes the measurement CSV (with `#` provenance lines) to stdout.
//!
//! cargo run --example synthetic_rig -- [seed]

use hybrid_actuator::{generate_sweep, validate_sweep, RigConfig};

fn main() -> hybrid_actuator::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2024);
    let cfg = RigConfig::four_shape(seed);
    let ds = generate_sweep(&cfg)?;
    let violations = validate_sweep(&ds, &cfg.protocol);
    eprintln!("{} records, {} protocol violations, config {}", ds.records().len(), violations.len(), cfg.config_hash());
    ds.write_csv(std::io::stdout().lock())
}
