//! Run the estimator on one Lorentzian band (HWHM 10, noise 1% of the peak)
//! and print the posterior summary with stage timings.
//!
//! Usage: cargo run --release --example single_lorentzian [-- SEED]

use std::time::Instant;

use linewidth::lineshape::{synth_spectrum, uniform_grid, LineShapeParams, NoiseSpec};
use linewidth::mcmc::ChainSettings;
use linewidth::pipeline::{run, summarize};
use linewidth::{PipelineConfig, Result};

fn main() -> Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let params = LineShapeParams::new(vec![20.0], vec![1650.0], vec![10.0], vec![0.0])?;
    let grid = uniform_grid(1550.0, 1750.0, 512);
    let peak = params.evaluate(1650.0);
    let spectrum = synth_spectrum(&params, &grid, &NoiseSpec::new(0.01 * peak, seed)?)?;
    let config = PipelineConfig {
        realizations: 30,
        gamma_samples: 2000,
        truncation: 30,
        stage1: ChainSettings::with_length(10_000, 5_000),
        stage2: ChainSettings::with_length(10_000, 5_000),
        seed,
        ..Default::default()
    };
    let t = Instant::now();
    let out = run(&spectrum, &config)?;
    let s = summarize(out.posterior())?;
    println!("elapsed {:.1}s", t.elapsed().as_secs_f64());
    println!("stage1 mean {:?} acc {:?}", out.stage1.chain.posterior_mean(), out.stage1.chain.acceptance_rates());
    println!("stage2 mean {:?} acc {:?}", out.stage2.chain.posterior_mean(), out.stage2.chain.acceptance_rates());
    println!("{}", serde_json::to_string_pretty(&s).expect("serializable"));
    if std::env::var("DUMP").is_ok() {
        let c = &out.stage2.chain;
        for i in (0..c.len()).step_by(250) {
            println!("{i} {:?} {}", c.samples[i], c.log_posterior[i]);
        }
        println!("init {:?}", linewidth::pipeline::stage2_initial(&out.dataset));
        println!("xi {:?}", out.dataset.xi());
        println!("block0 {:?}", out.dataset.block(0));
        println!("block1 {:?}", out.dataset.block(1));
    }
    Ok(())
}
