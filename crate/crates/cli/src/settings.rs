//! Flat `key = value` config files, flag overrides and range parsing.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use linewidth::pipeline::PositivityPolicy;
use linewidth::{Execution, PipelineConfig};

/// Keys accepted in config files and recorded as overrides.
pub const KEYS: &[&str] = &[
    "realizations",
    "gamma_samples",
    "truncation",
    "chain_length",
    "burn_in",
    "stage1.chain_length",
    "stage1.burn_in",
    "stage2.chain_length",
    "stage2.burn_in",
    "dr_stages",
    "dr_scale",
    "adapt",
    "region",
    "seed",
    "positivity",
    "curve_draws",
    "execution",
];

/// Parse `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_config(text: &str, path: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("{}:{}: expected key = value, got '{line}'", path.display(), i + 1);
        };
        let k = k.trim();
        if !KEYS.contains(&k) {
            bail!("{}:{}: unknown key '{k}'", path.display(), i + 1);
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    value.parse().with_context(|| format!("invalid value '{value}' for {key}"))
}

/// Apply one setting to `config`.
pub fn apply(config: &mut PipelineConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "realizations" => config.realizations = num(key, value)?,
        "gamma_samples" => config.gamma_samples = num(key, value)?,
        "truncation" => config.truncation = num(key, value)?,
        "chain_length" => {
            config.stage1.chain_length = num(key, value)?;
            config.stage2.chain_length = config.stage1.chain_length;
        }
        "burn_in" => {
            config.stage1.burn_in = num(key, value)?;
            config.stage2.burn_in = config.stage1.burn_in;
        }
        "stage1.chain_length" => config.stage1.chain_length = num(key, value)?,
        "stage1.burn_in" => config.stage1.burn_in = num(key, value)?,
        "stage2.chain_length" => config.stage2.chain_length = num(key, value)?,
        "stage2.burn_in" => config.stage2.burn_in = num(key, value)?,
        "dr_stages" => {
            config.stage1.dr_stages = num(key, value)?;
            config.stage2.dr_stages = config.stage1.dr_stages;
        }
        "dr_scale" => {
            config.stage1.dr_scale = num(key, value)?;
            config.stage2.dr_scale = config.stage1.dr_scale;
        }
        "adapt" => {
            config.stage1.adapt = num(key, value)?;
            config.stage2.adapt = config.stage1.adapt;
        }
        "region" => config.region = Some(parse_region(value).context("invalid region")?),
        "seed" => config.seed = num(key, value)?,
        "positivity" => config.positivity = value.parse::<PositivityPolicy>()?,
        "curve_draws" => config.curve_draws = num(key, value)?,
        "execution" => config.execution = value.parse::<Execution>()?,
        other => bail!("unknown setting '{other}'"),
    }
    Ok(())
}

/// `LO:HI` or `HI:LO`; the order is normalized to ascending.
pub fn parse_region(s: &str) -> Result<(f64, f64)> {
    let Some((a, b)) = s.split_once(':') else {
        bail!("expected LO:HI, got '{s}'");
    };
    let a: f64 = a.trim().parse().with_context(|| format!("bad bound '{a}' in '{s}'"))?;
    let b: f64 = b.trim().parse().with_context(|| format!("bad bound '{b}' in '{s}'"))?;
    if !a.is_finite() || !b.is_finite() || a == b {
        bail!("region '{s}' must have two distinct finite bounds");
    }
    Ok((a.min(b), a.max(b)))
}

/// A single `P` or an inclusive `start:step:stop` range.
pub fn parse_p_list(s: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let int = |t: &str| -> Result<usize> { t.parse().with_context(|| format!("'{t}' is not a non-negative integer")) };
    match parts.as_slice() {
        [p] => Ok(vec![int(p)?]),
        [start, step, stop] => {
            let (start, step, stop) = (int(start)?, int(step)?, int(stop)?);
            if step == 0 || start > stop {
                bail!("range '{s}' needs step > 0 and start <= stop");
            }
            Ok((start..=stop).step_by(step).collect())
        }
        _ => bail!("expected P or start:step:stop, got '{s}'"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_ranges() {
        let p = parse_p_list("20:5:100").unwrap();
        assert_eq!(p.len(), 17);
        assert_eq!((p[0], p[1], p[16]), (20, 25, 100));
        assert_eq!(parse_p_list("30").unwrap(), vec![30]);
        for bad in ["", "20:5", "20:0:100", "50:5:20", "a:b:c", "1:2:3:4", "-3"] {
            assert!(parse_p_list(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn regions_normalize() {
        assert_eq!(parse_region("1240:1060").unwrap(), (1060.0, 1240.0));
        assert_eq!(parse_region("1060:1240").unwrap(), (1060.0, 1240.0));
        assert!(parse_region("1060").is_err());
        assert!(parse_region("5:5").is_err());
        assert!(parse_region("x:5").is_err());
    }

    #[test]
    fn config_file() {
        let text = "# run\nrealizations = 12\nchain_length=4000 # both\nburn_in = 2000\nregion = 1700:1600\n\n";
        let map = parse_config(text, Path::new("c.cfg")).unwrap();
        let mut c = PipelineConfig::default();
        for (k, v) in &map {
            apply(&mut c, k, v).unwrap();
        }
        assert_eq!(c.realizations, 12);
        assert_eq!((c.stage1.chain_length, c.stage2.burn_in), (4000, 2000));
        assert_eq!(c.region, Some((1600.0, 1700.0)));

        let err = parse_config("bogus = 1\n", Path::new("c.cfg")).unwrap_err().to_string();
        assert!(err.contains("c.cfg:1"), "{err}");
        assert!(parse_config("realizations 3\n", Path::new("c.cfg")).is_err());
        assert!(apply(&mut c, "realizations", "many").is_err());
    }
}
