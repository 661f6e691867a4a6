//! Coverage of a shipped reference scenario at desk scale.
//!
//! Usage: cargo run --release --example coverage -- KIND [REPEATS] [SEED]

use std::time::Instant;

use linewidth::lineshape::reference_scenario;
use linewidth::pipeline::validate_scenario;
use linewidth::{PipelineConfig, Result, ScenarioKind};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: ScenarioKind = args.next().unwrap_or_else(|| "lorentzian".into()).parse()?;
    let repeats = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let scenario = reference_scenario(kind);
    let config = PipelineConfig {
        seed,
        ..Default::default()
    };
    let t = Instant::now();
    let report = validate_scenario(&scenario, &config, repeats)?;
    for r in &report.runs {
        println!(
            "run {:2}: mean {:8.3} interval [{:8.3}, {:8.3}] covered {} {}",
            r.index,
            r.mean.unwrap_or(f64::NAN),
            r.lower.unwrap_or(f64::NAN),
            r.upper.unwrap_or(f64::NAN),
            r.covered,
            r.error.as_deref().unwrap_or("")
        );
    }
    println!(
        "{kind}: true {:.4} coverage {}/{} mean width {:.3} ({:.0}s)",
        report.true_gamma,
        report.covered,
        report.repeats,
        report.mean_interval_width,
        t.elapsed().as_secs_f64()
    );
    Ok(())
}
