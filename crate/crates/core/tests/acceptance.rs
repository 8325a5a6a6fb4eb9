//! Acceptance suite. Runs without the libtest harness so that every criterion
//! prints one PASS/FAIL line; exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;

use hybrid_actuator::characterization::{characterize, comparison_report, fit_linear_loss};
use hybrid_actuator::config::ShapesConfig;
use hybrid_actuator::wearable::{BraceActuator, ForceDirection, Side, Site};
use hybrid_actuator::{
    corrective_moment, equal_area_family, generate_sweep, ideal_force, loss_fraction, predict, run_gait_cycle, ActuatorSpec,
    BraceLayout, CrossSection, GaitSchedule, LossModel, Pressure, RigConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, ok: String, bad: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(bad)
    }
}

fn p(kpa: f64) -> Pressure {
    Pressure::kpa(kpa).unwrap()
}

fn prediction_chain() -> Outcome {
    let spec = ActuatorSpec::balloon(CrossSection::circle(25.0).unwrap()).map_err(|e| e.to_string())?;
    let f30 = predict(p(30.0), &spec).map_err(|e| e.to_string())?.force.value();
    let f60 = predict(p(60.0), &spec).map_err(|e| e.to_string())?.force.value();
    // hand arithmetic: pi*625 mm^2 * P kPa * 1e-3 * (1 - loss)
    let area = std::f64::consts::PI * 625.0;
    let hand30 = area * 30.0 * 1e-3 * (1.0 - 0.372);
    let hand60 = area * 60.0 * 1e-3 * (1.0 - 0.222);
    let ok = (f30 - 36.99).abs() <= 0.01
        && (f60 - 91.66).abs() <= 0.01
        && (f30 - hand30).abs() < 1e-9
        && (f60 - hand60).abs() < 1e-9
        && f30 >= 36.0
        && (f60 - 90.0).abs() <= 3.0;
    let msg = format!("F(30)={f30:.4} N, F(60)={f60:.4} N");
    check(ok, msg.clone(), msg)
}

fn efficiency_anchor() -> Outcome {
    let eta = loss_fraction(p(60.0), &LossModel::balloon_fit());
    let eff = eta.efficiency();
    let ok = (eff - 0.778).abs() < 1e-12 && (eff - 0.77).abs() <= 0.01 && !eta.extrapolated;
    let msg = format!("efficiency(60)={eff:.6}");
    check(ok, msg.clone(), msg)
}

fn engineered_force() -> Outcome {
    let spec = ActuatorSpec::engineered();
    let area = spec.cross_section.area().map_err(|e| e.to_string())?;
    let pred = predict(p(50.0), &spec).map_err(|e| e.to_string())?;
    let f = pred.force.value();
    let ok = (area - 2345.06).abs() < 0.01 && (pred.loss.fraction - 0.03).abs() < 1e-12 && (f - 113.7).abs() <= 1.0 && f > 100.0;
    let msg = format!("area={area:.3} mm^2, loss={:.4}, F(50)={f:.3} N", pred.loss.fraction);
    check(ok, msg.clone(), msg)
}

fn fit_recovery() -> Outcome {
    // noiseless: synthetic sweep through the rig, all four shapes
    let truth = LossModel::balloon_fit();
    let cfg = RigConfig::uniform(truth, 7, 0.0).map_err(|e| e.to_string())?;
    let ds = generate_sweep(&cfg).map_err(|e| e.to_string())?;
    let shapes: BTreeMap<String, CrossSection> = cfg.ground_truth.iter().map(|(k, s)| (k.clone(), s.cross_section)).collect();
    let ch = characterize(&ds, &shapes, [30.0, 60.0], Some(&truth)).map_err(|e| e.to_string())?;
    let mut worst_coef: f64 = 0.0;
    let mut worst_r2: f64 = 0.0;
    for fit in ch.per_shape.values().chain([&ch.pooled]) {
        worst_coef = worst_coef.max((fit.slope_per_kpa + 0.005).abs()).max((fit.intercept - 0.522).abs());
        worst_r2 = worst_r2.max((fit.r_squared - 1.0).abs());
    }
    let noiseless = worst_coef <= 1e-10 && worst_r2 <= 1e-12;

    // sigma = 0.01 fractional loss noise on the seven window points
    let pressures: Vec<f64> = (0..7).map(|i| 30.0 + 5.0 * i as f64).collect();
    let mut covered = 0;
    let mut r2s = Vec::with_capacity(200);
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<(f64, f64)> = pressures
            .iter()
            .map(|&x| {
                let z: f64 = rng.sample(StandardNormal);
                (x, -0.005 * x + 0.522 + 0.01 * z)
            })
            .collect();
        let fit = fit_linear_loss(&pts, [30.0, 60.0], None).map_err(|e| e.to_string())?;
        if (fit.slope_per_kpa + 0.005).abs() <= 0.0008 {
            covered += 1;
        }
        r2s.push(fit.r_squared);
    }
    r2s.sort_by(f64::total_cmp);
    let median_r2 = 0.5 * (r2s[99] + r2s[100]);
    let noisy = covered >= 190 && median_r2 >= 0.97;
    let msg = format!(
        "noiseless max coef err={worst_coef:.1e}, |r2-1|={worst_r2:.1e}; noisy slope coverage {covered}/200, median r2={median_r2:.4}"
    );
    check(noiseless && noisy, msg.clone(), msg)
}

fn equal_area_invariance() -> Outcome {
    let family = equal_area_family(25.0, 2.0).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for step in 0..=12 {
        let pressure = p(5.0 * step as f64);
        let forces: Vec<f64> = family
            .iter()
            .map(|cs| ideal_force(pressure, cs).map(|f| f.value()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let reference = forces[0];
        for f in &forces[1..] {
            let rel = if reference == 0.0 { f.abs() } else { ((f - reference) / reference).abs() };
            worst = worst.max(rel);
        }
    }
    let msg = format!("{} shapes x 13 pressures, max relative spread {worst:.2e}", family.len());
    check(family.len() == 4 && worst < 1e-9, msg.clone(), msg)
}

/// Coarse-to-fine SSE grid search over (slope, level at the 45 kPa window
/// midpoint); pivoting there keeps the two grid axes nearly uncorrelated.
/// Returns (slope, intercept, slope step, level step).
fn grid_minimizer(pts: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    const PIVOT: f64 = 45.0;
    const N: i32 = 80;
    let sse = |b: f64, c: f64| pts.iter().map(|&(x, y)| (y - (c + b * (x - PIVOT))).powi(2)).sum::<f64>();
    let (mut b_lo, mut b_hi) = (-0.05, 0.05);
    let (mut c_lo, mut c_hi) = (-1.0, 2.0);
    let (mut best_b, mut best_c) = (0.0, 0.0);
    let (mut db, mut dc) = (0.0, 0.0);
    for _ in 0..9 {
        db = (b_hi - b_lo) / N as f64;
        dc = (c_hi - c_lo) / N as f64;
        let mut best = f64::INFINITY;
        for i in 0..=N {
            let b = b_lo + db * i as f64;
            for j in 0..=N {
                let c = c_lo + dc * j as f64;
                let s = sse(b, c);
                if s < best {
                    best = s;
                    best_b = b;
                    best_c = c;
                }
            }
        }
        (b_lo, b_hi) = (best_b - 8.0 * db, best_b + 8.0 * db);
        (c_lo, c_hi) = (best_c - 8.0 * dc, best_c + 8.0 * dc);
    }
    (best_b, best_c - PIVOT * best_b, db, dc)
}

fn ols_vs_brute_force() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst_b: f64 = 0.0;
    let mut worst_a: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..20 {
        let n = rng.random_range(5..=15);
        let slope = rng.random_range(-0.02..0.0);
        let intercept = rng.random_range(0.2..1.2);
        let sigma = rng.random_range(0.0..0.03);
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let x: f64 = rng.random_range(30.0..60.0);
                let z: f64 = rng.sample(StandardNormal);
                (x, slope * x + intercept + sigma * z)
            })
            .collect();
        let fit = fit_linear_loss(&pts, [30.0, 60.0], None).map_err(|e| e.to_string())?;
        let (gb, ga, db, dc) = grid_minimizer(&pts);
        // intercept resolution follows from the grid: one level cell plus one slope cell over 45 kPa
        let da = dc + 45.0 * db;
        let eb = (fit.slope_per_kpa - gb).abs() / db;
        let ea = (fit.intercept - ga).abs() / da;
        if eb > 1.0 || ea > 1.0 {
            failures += 1;
        }
        worst_b = worst_b.max(eb);
        worst_a = worst_a.max(ea);
    }
    let msg = format!("20 datasets, worst slope diff {worst_b:.4} cells, worst intercept diff {worst_a:.4} cells");
    check(failures == 0, msg.clone(), msg)
}

fn random_layout(rng: &mut ChaCha8Rng) -> BraceLayout {
    let spec = ActuatorSpec::engineered();
    let mut acts = Vec::new();
    for site in [Site::Thigh, Site::Knee, Site::Shank] {
        for side in [Side::Medial, Side::Lateral] {
            let arm = match site {
                Site::Thigh => rng.random_range(0.05..0.30),
                Site::Knee => rng.random_range(-0.01..=0.01),
                Site::Shank => -rng.random_range(0.05..0.30),
            };
            let direction = if rng.random_bool(0.5) { ForceDirection::MedialToLateral } else { ForceDirection::LateralToMedial };
            acts.push(BraceActuator { id: format!("{site:?}-{side:?}"), site, side, lever_arm_m: arm, direction, spec });
        }
    }
    BraceLayout::new(acts, 0.2).unwrap()
}

/// Knee moment as thigh-segment moment minus shank-segment moment, summed per
/// segment in reverse order.
fn resum(layout: &BraceLayout, forces: &[f64]) -> (f64, f64) {
    let mut upper = 0.0;
    let mut lower = 0.0;
    let mut lateral = 0.0;
    for (a, f) in layout.actuators().iter().zip(forces).rev() {
        let push = if a.direction == ForceDirection::MedialToLateral { *f } else { -*f };
        lateral += push;
        match a.site {
            Site::Thigh | Site::Knee => upper += push * a.lever_arm_m,
            Site::Shank => lower += push * a.lever_arm_m,
        }
    }
    (lateral, upper - lower)
}

fn moment_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let layout = random_layout(&mut rng);
        let forces: Vec<f64> = (0..6).map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..150.0) }).collect();
        let sys = corrective_moment(&layout, &forces).map_err(|e| e.to_string())?;
        let (net, m) = resum(&layout, &forces);
        worst = worst.max((sys.moment_nm - m).abs()).max((sys.net_force_n - net).abs());
    }
    let layout = BraceLayout::standard(ActuatorSpec::engineered());
    let mut forces = [0.0; 6];
    for (id, f) in [("knee_lateral", 100.0), ("thigh_medial", 50.0), ("shank_medial", 50.0)] {
        forces[layout.index_of(id).unwrap()] = f;
    }
    let ex = corrective_moment(&layout, &forces).map_err(|e| e.to_string())?;
    let ok = worst <= 1e-12 && ex.net_force_n == 0.0 && (ex.moment_nm - 15.0).abs() < 1e-12;
    let msg =
        format!("1000 random sets, max diff {worst:.1e}; valgus example net={} N, moment={} N*m", ex.net_force_n, ex.moment_nm);
    check(ok, msg.clone(), msg)
}

fn pipeline_bytes(seed: u64) -> Result<Vec<String>, String> {
    let cfg = RigConfig::four_shape(seed);
    let ds = generate_sweep(&cfg).map_err(|e| e.to_string())?;
    let shapes = ShapesConfig { shapes: cfg.ground_truth.iter().map(|(k, s)| (k.clone(), s.cross_section)).collect() };
    let reference = LossModel::balloon_fit();
    let ch = characterize(&ds, &shapes.shapes, [30.0, 60.0], Some(&reference)).map_err(|e| e.to_string())?;
    let fitted = ch.pooled.to_loss_model().map_err(|e| e.to_string())?;
    let report = comparison_report(&ds, &shapes.shapes, &fitted).map_err(|e| e.to_string())?;
    let layout = BraceLayout::standard(ActuatorSpec::engineered());
    let trace = run_gait_cycle(&layout, &GaitSchedule::valgus_correction(), 2.0, 0.01).map_err(|e| e.to_string())?;
    Ok(vec![ds.to_csv_string(), ch.fit_csv(), ch.residuals_csv(), report.to_csv(), trace.to_csv()])
}

fn determinism() -> Outcome {
    let a = pipeline_bytes(2024)?;
    let b = pipeline_bytes(2024)?;
    let c = pipeline_bytes(2025)?;
    let same = a == b;
    let seed_matters = a[0] != c[0];
    let bytes: usize = a.iter().map(String::len).sum();
    let msg = format!("{} artifacts, {bytes} bytes, identical={same}, other seed differs={seed_matters}", a.len());
    check(same && seed_matters, msg.clone(), msg)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 prediction chain", prediction_chain),
        ("2 efficiency anchor", efficiency_anchor),
        ("3 engineered actuator force", engineered_force),
        ("4 fit recovery", fit_recovery),
        ("5 equal-area invariance", equal_area_invariance),
        ("6 OLS vs brute force", ols_vs_brute_force),
        ("7 moment oracle", moment_oracle),
        ("8 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
