use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use linewidth::io::{read_scenario, read_spectrum, read_text, tsv, write_scenario, write_spectrum, write_text};
use linewidth::lineshape::{reference_scenario, sample_scenario};
use linewidth::pipeline::{self, summarize, SensitivityRow, Summary, ValidationReport};
use linewidth::{PipelineConfig, ScenarioKind};
use serde::Serialize;

use crate::manifest::RunManifest;
use crate::settings::{apply, parse_config};
use crate::RunOpts;

/// Width-curve draws exported by `estimate` unless configured otherwise.
const DEFAULT_CURVE_DRAWS: usize = 1000;

const CURVE_PLOT: &str = r#"# Plot the pointwise width curve and the sample histogram.
import csv
import matplotlib.pyplot as plt

def read(path):
    with open(path) as f:
        rows = list(csv.reader(f, delimiter="\t"))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]

fig, (a, b) = plt.subplots(1, 2, figsize=(10, 4))
try:
    _, rows = read("curve.tsv")
    xi = [r[0] for r in rows]
    a.fill_between(xi, [r[2] for r in rows], [r[3] for r in rows], alpha=0.3)
    a.plot(xi, [r[1] for r in rows])
    a.set_xlabel("xi [1/cm^-1]")
    a.set_ylabel("width estimate [cm^-1]")
except FileNotFoundError:
    pass
_, rows = read("samples.tsv")
b.hist([r[0] for r in rows], bins=60)
b.set_xlabel("mean Lorentzian width [cm^-1]")
fig.tight_layout()
fig.savefig("estimate.png", dpi=150)
"#;

const SENSITIVITY_PLOT: &str = r#"# Posterior mean and 95% interval against the truncation length.
import csv
import matplotlib.pyplot as plt

with open("sensitivity.tsv") as f:
    rows = [r for r in csv.DictReader(f, delimiter="\t") if r["mean"] != "nan"]
p = [int(r["p"]) for r in rows]
fig, ax = plt.subplots(figsize=(6, 4))
ax.fill_between(p, [float(r["lower"]) for r in rows], [float(r["upper"]) for r in rows], alpha=0.3)
ax.plot(p, [float(r["mean"]) for r in rows], marker="o")
ax.set_xlabel("P")
ax.set_ylabel("mean Lorentzian width [cm^-1]")
fig.tight_layout()
fig.savefig("sensitivity.png", dpi=150)
"#;

/// Defaults, then the config file, then flags.
fn resolve(
    base: PipelineConfig,
    run: &RunOpts,
    region: Option<(f64, f64)>,
    p: Option<usize>,
    manifest: &mut RunManifest,
) -> Result<PipelineConfig> {
    let mut config = base;
    if let Some(path) = &run.config {
        let text = read_text(path)?;
        let file = parse_config(&text, path)?;
        for (k, v) in &file {
            apply(&mut config, k, v).with_context(|| format!("{}: {k}", path.display()))?;
        }
        manifest.config_path = Some(path.display().to_string());
        manifest.config_file = file;
    }
    let flags: [(&str, Option<String>); 10] = [
        ("seed", run.seed.map(|v| v.to_string())),
        ("chain_length", run.chain_length.map(|v| v.to_string())),
        ("burn_in", run.burn_in.map(|v| v.to_string())),
        ("realizations", run.realizations.map(|v| v.to_string())),
        ("gamma_samples", run.gamma_samples.map(|v| v.to_string())),
        ("curve_draws", run.curve_draws.map(|v| v.to_string())),
        ("positivity", run.positivity.clone()),
        ("execution", run.execution.clone()),
        ("region", region.map(|(a, b)| format!("{a}:{b}"))),
        ("truncation", p.map(|v| v.to_string())),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            apply(&mut config, k, &v).with_context(|| format!("--{}", k.replace('_', "-")))?;
            manifest.overrides.insert(k.to_string(), v);
        }
    }
    config.validate()?;
    manifest.seed = config.seed;
    manifest.region = config.region.map(|(a, b)| [a.min(b), a.max(b)]);
    Ok(config)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)?;
    Ok(())
}

pub fn synth(kind: ScenarioKind, bands: Option<usize>, seed: u64, reference: bool, out: &Path) -> Result<()> {
    let scenario = if reference {
        reference_scenario(kind)
    } else {
        let bands = bands.unwrap_or(match kind {
            ScenarioKind::Lorentzian => 8,
            ScenarioKind::Gaussian => 10,
            ScenarioKind::Voigt => 6,
        });
        sample_scenario(kind, bands, seed)?
    };
    let spectrum = scenario.spectrum()?;
    write_scenario(&out.join("scenario.scn"), &scenario)?;
    write_spectrum(&out.join("spectrum.txt"), &spectrum)?;
    println!("true_mean_gamma = {}", scenario.true_mean_gamma());
    Ok(())
}

#[derive(Serialize)]
struct EstimateReport<'a> {
    #[serde(flatten)]
    summary: Summary,
    nonpositive_value: usize,
    spectrum_points: usize,
    spectrum_range: [f64; 2],
    config: &'a PipelineConfig,
    manifest: &'a RunManifest,
}

pub fn estimate(path: &Path, region: Option<(f64, f64)>, p: Option<usize>, run: &RunOpts) -> Result<()> {
    let mut manifest = RunManifest::start("estimate");
    manifest.inputs.push(path.display().to_string());
    let base = PipelineConfig {
        curve_draws: DEFAULT_CURVE_DRAWS,
        ..Default::default()
    };
    let config = resolve(base, run, region, p, &mut manifest)?;
    let spectrum = read_spectrum(path)?;
    let out = pipeline::run(&spectrum, &config)?;
    let summary = summarize(out.posterior())?;

    let dir = &run.out;
    write_text(&dir.join("samples.tsv"), &tsv(&["gamma"], out.posterior().samples.iter().map(|s| [*s])))?;
    write_text(&dir.join("stage1_chain.tsv"), &out.stage1.chain.to_tsv())?;
    write_text(&dir.join("stage2_chain.tsv"), &out.stage2.chain.to_tsv())?;
    write_text(&dir.join("fourier.tsv"), &out.dataset.to_tsv())?;
    if let Some(curve) = &out.stage2.curve {
        write_text(&dir.join("curve.tsv"), &curve.to_tsv())?;
    }
    write_text(&dir.join("plot_estimate.py"), CURVE_PLOT)?;

    manifest.finish();
    let used = &out.stage1.spectrum;
    let report = EstimateReport {
        summary: summary.clone(),
        nonpositive_value: out.posterior().nonpositive_value,
        spectrum_points: used.len(),
        spectrum_range: [used.grid()[0], used.grid()[used.len() - 1]],
        config: &config,
        manifest: &manifest,
    };
    write_json(&dir.join("report.json"), &report)?;
    println!(
        "gamma_mean = {:.4}  gamma_ci95 = [{:.4}, {:.4}]  rejected = {}",
        summary.gamma_mean, summary.gamma_ci95[0], summary.gamma_ci95[1], summary.rejected
    );
    Ok(())
}

#[derive(Serialize)]
struct SensitivityReport<'a> {
    rows: &'a [SensitivityRow],
    config: &'a PipelineConfig,
    manifest: &'a RunManifest,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |x| x.to_string())
}

pub fn sensitivity(path: &Path, region: Option<(f64, f64)>, p_values: &[usize], run: &RunOpts) -> Result<()> {
    let mut manifest = RunManifest::start("sensitivity");
    manifest.inputs.push(path.display().to_string());
    let list = p_values.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    manifest.overrides.insert("P".to_string(), list);
    let config = resolve(PipelineConfig::default(), run, region, None, &mut manifest)?;
    let spectrum = read_spectrum(path)?;
    let rows = pipeline::sensitivity_scan(&spectrum, &config, p_values)?;

    let mut table = String::from("p\tmean\tlower\tupper\terror\n");
    for r in &rows {
        let _ = writeln!(
            table,
            "{}\t{}\t{}\t{}\t{}",
            r.p,
            opt(r.mean),
            opt(r.lower),
            opt(r.upper),
            r.error.as_deref().unwrap_or("").replace(['\t', '\n'], " ")
        );
    }
    write_text(&run.out.join("sensitivity.tsv"), &table)?;
    write_text(&run.out.join("plot_sensitivity.py"), SENSITIVITY_PLOT)?;
    manifest.finish();
    write_json(
        &run.out.join("sensitivity.json"),
        &SensitivityReport {
            rows: &rows,
            config: &config,
            manifest: &manifest,
        },
    )?;
    for r in &rows {
        match r.error.as_deref() {
            None => println!("P = {}: mean {} [{}, {}]", r.p, opt(r.mean), opt(r.lower), opt(r.upper)),
            Some(e) => println!("P = {}: failed: {e}", r.p),
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ValidateOutput<'a> {
    #[serde(flatten)]
    report: &'a ValidationReport,
    manifest: &'a RunManifest,
}

pub fn validate(
    path: Option<&Path>,
    kind: Option<ScenarioKind>,
    repeats: usize,
    p: Option<usize>,
    run: &RunOpts,
) -> Result<()> {
    let mut manifest = RunManifest::start("validate");
    let scenario = match (path, kind) {
        (Some(path), _) => {
            manifest.inputs.push(path.display().to_string());
            read_scenario(path)?
        }
        (None, Some(kind)) => {
            manifest.inputs.push(format!("reference:{kind}"));
            reference_scenario(kind)
        }
        (None, None) => anyhow::bail!("need a scenario file or --kind"),
    };
    manifest.overrides.insert("repeats".to_string(), repeats.to_string());
    let config = resolve(PipelineConfig::default(), run, None, p, &mut manifest)?;
    let report = pipeline::validate_scenario(&scenario, &config, repeats)?;

    let mut table = String::from("run\tnoise_seed\tpipeline_seed\tmean\tlower\tupper\tcovered\terror\n");
    for r in &report.runs {
        let _ = writeln!(
            table,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.index,
            r.noise_seed,
            r.pipeline_seed,
            opt(r.mean),
            opt(r.lower),
            opt(r.upper),
            r.covered as u8,
            r.error.as_deref().unwrap_or("").replace(['\t', '\n'], " ")
        );
    }
    write_text(&run.out.join("validation.tsv"), &table)?;
    manifest.finish();
    write_json(
        &run.out.join("validation.json"),
        &ValidateOutput {
            report: &report,
            manifest: &manifest,
        },
    )?;
    println!(
        "coverage = {}/{} ({:.2})  true_mean_gamma = {:.4}  mean_interval_width = {:.4}",
        report.covered, report.repeats, report.coverage, report.true_gamma, report.mean_interval_width
    );
    Ok(())
}
