//! Text file formats: two-column spectra and scenario files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lineshape::{Scenario, Spectrum};

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// Write `contents`, creating parent directories as needed.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

/// Parse a two-column (wavenumber, intensity) table. Blank lines and text
/// after `#` are ignored; columns may be separated by whitespace, commas or
/// semicolons. A grid listed in decreasing order is reversed.
pub fn parse_spectrum(text: &str, path: &Path) -> Result<Spectrum> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut grid = Vec::new();
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',' || c == ';')
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(err(i + 1, format!("expected 2 columns, found {}", fields.len())));
        }
        let parse = |f: &str| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(i + 1, format!("'{f}' is not a finite number")))
        };
        grid.push(parse(fields[0])?);
        values.push(parse(fields[1])?);
    }
    if grid.len() >= 2 && grid[0] > grid[grid.len() - 1] {
        grid.reverse();
        values.reverse();
    }
    Spectrum::new(grid, values).map_err(|e| err(0, e.to_string()))
}

pub fn read_spectrum(path: &Path) -> Result<Spectrum> {
    parse_spectrum(&read_text(path)?, path)
}

pub fn spectrum_to_text(spectrum: &Spectrum) -> String {
    let mut out = String::from("# wavenumber\tintensity\n");
    for (nu, s) in spectrum.grid().iter().zip(spectrum.intensities()) {
        let _ = writeln!(out, "{nu}\t{s}");
    }
    out
}

pub fn write_spectrum(path: &Path, spectrum: &Spectrum) -> Result<()> {
    write_text(path, &spectrum_to_text(spectrum))
}

pub fn read_scenario(path: &Path) -> Result<Scenario> {
    Scenario::parse(&read_text(path)?, path)
}

pub fn write_scenario(path: &Path, scenario: &Scenario) -> Result<()> {
    write_text(path, &scenario.to_text())
}

/// Tab-separated table with a header row.
pub fn tsv<R: AsRef<[f64]>>(header: &[&str], rows: impl IntoIterator<Item = R>) -> String {
    let mut out = header.join("\t");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.as_ref().iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    out
}
