//! Flat TOML run configuration.
//!
//! Every key is optional; command-line flags take precedence.
//!
//! ```toml
//! example = "1"          # 1, 2 or constant
//! case = 2               # 1 or 2
//! omega = 32.0
//! omegas = [16.0, 32.0, 64.0]
//! nx = 8                 # or h = 0.125
//! nxs = [8, 16, 32]
//! omega_h = 1.0
//! p = 5
//! q = 1                  # override of the automatic choice
//! m = 5
//! quad_points = 16
//! threads = 4
//! impedance = "wavenumber"  # or "omega"
//! out = "results.csv"
//! no_timing = false
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub example: Option<String>,
    pub case: Option<u8>,
    pub omega: Option<f64>,
    pub omegas: Option<Vec<f64>>,
    pub h: Option<f64>,
    pub nx: Option<usize>,
    pub nxs: Option<Vec<usize>>,
    pub omega_h: Option<f64>,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub m: Option<usize>,
    pub quad_points: Option<usize>,
    pub threads: Option<usize>,
    pub impedance: Option<String>,
    pub out: Option<PathBuf>,
    pub no_timing: Option<bool>,
}

impl FileConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
    }
}

/// `1/h` rounded, rejecting values that do not divide the unit square.
pub fn nx_from_h(h: f64) -> anyhow::Result<usize> {
    anyhow::ensure!(h > 0.0 && h <= 1.0, "h must lie in (0, 1], got {h}");
    let nx = (1.0 / h).round();
    anyhow::ensure!(
        ((1.0 / nx) - h).abs() <= 1e-9 * h,
        "h = {h} does not divide the unit square"
    );
    Ok(nx as usize)
}
