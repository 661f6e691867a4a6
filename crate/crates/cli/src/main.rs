use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use linewidth::ScenarioKind;

mod commands;
mod manifest;
mod settings;

#[derive(Parser, Debug)]
#[command(name = "linewidth", version, about = "Estimate the mean Lorentzian line width of a spectrum")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a synthetic scenario and write it with its noisy spectrum.
    Synth(SynthArgs),
    /// Run the estimator on a two-column spectrum file.
    Estimate(EstimateArgs),
    /// Rerun the Fourier stage over several truncation lengths.
    Sensitivity(SensitivityArgs),
    /// Coverage of the true mean width over repeated noisy spectra.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: ScenarioKind,
    /// Number of bands (defaults: 8 Lorentzian, 10 Gaussian, 6 Voigt).
    #[arg(long)]
    bands: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the shipped reference scenario of this kind instead of drawing one.
    #[arg(long, conflicts_with_all = ["bands", "seed"])]
    reference: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

/// Pipeline settings shared by the estimating commands.
#[derive(Args, Debug, Clone, Default)]
pub struct RunOpts {
    #[arg(long)]
    seed: Option<u64>,
    /// Flat `key = value` settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Chain length for both stages.
    #[arg(long)]
    chain_length: Option<usize>,
    /// Burn-in for both stages.
    #[arg(long)]
    burn_in: Option<usize>,
    /// Stage-1 realizations `J`.
    #[arg(long)]
    realizations: Option<usize>,
    /// Mean-width samples `J_z`.
    #[arg(long)]
    gamma_samples: Option<usize>,
    /// Draws for the width curve export (0 disables it).
    #[arg(long)]
    curve_draws: Option<usize>,
    /// `clamp` or `reject` for negative width samples.
    #[arg(long)]
    positivity: Option<String>,
    /// `parallel` or `sequential`.
    #[arg(long)]
    execution: Option<String>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    spectrum: PathBuf,
    /// Wavenumber interval LO:HI (HI:LO is accepted).
    #[arg(long, value_parser = parse_region_arg)]
    region: Option<(f64, f64)>,
    /// Truncation length.
    #[arg(long = "P")]
    p: Option<usize>,
    #[command(flatten)]
    run: RunOpts,
}

#[derive(Args, Debug)]
struct SensitivityArgs {
    spectrum: PathBuf,
    #[arg(long, value_parser = parse_region_arg)]
    region: Option<(f64, f64)>,
    /// A single P or start:step:stop, inclusive.
    #[arg(long = "P", value_parser = parse_p_arg, default_value = "20:5:100")]
    p: PList,
    #[command(flatten)]
    run: RunOpts,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Scenario file; omit and pass --kind to use a shipped reference scenario.
    #[arg(required_unless_present = "kind")]
    scenario: Option<PathBuf>,
    #[arg(long, value_parser = parse_kind, conflicts_with = "scenario")]
    kind: Option<ScenarioKind>,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long = "P")]
    p: Option<usize>,
    #[command(flatten)]
    run: RunOpts,
}

#[derive(Clone, Debug)]
struct PList(Vec<usize>);

fn parse_kind(s: &str) -> Result<ScenarioKind, String> {
    s.parse().map_err(|e: linewidth::Error| e.to_string())
}

fn parse_region_arg(s: &str) -> Result<(f64, f64), String> {
    settings::parse_region(s).map_err(|e| format!("{e:#}"))
}

fn parse_p_arg(s: &str) -> Result<PList, String> {
    settings::parse_p_list(s).map(PList).map_err(|e| format!("{e:#}"))
}

/// The error chain, skipping causes already spelled out by their parent.
fn render(e: &anyhow::Error) -> String {
    let mut msg = e.to_string();
    for cause in e.chain().skip(1) {
        let c = cause.to_string();
        if !msg.contains(&c) {
            msg.push_str(": ");
            msg.push_str(&c);
        }
    }
    msg
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Synth(a) => commands::synth(a.kind, a.bands, a.seed, a.reference, &a.out),
        Command::Estimate(a) => commands::estimate(&a.spectrum, a.region, a.p, &a.run),
        Command::Sensitivity(a) => commands::sensitivity(&a.spectrum, a.region, &a.p.0, &a.run),
        Command::Validate(a) => commands::validate(a.scenario.as_deref(), a.kind, a.repeats, a.p, &a.run),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", render(&e));
            ExitCode::FAILURE
        }
    }
}
