//! Experiment configuration files.
//!
//! A config is a TOML document with top-level keys and two flat tables:
//!
//! ```toml
//! experiment = "gaussian1d_sandwich"
//! seed = 7
//! output = "sandwich.csv"
//!
//! [grid]
//! R = 1
//! t = [0.125, 0.25, 0.5]
//!
//! [overrides]
//! n_points = 2001
//! ```
//!
//! Grid entries are a number or a list of numbers; `inf` is accepted.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    FormulaTable,
    Gaussian1dSandwich,
    Remark3,
    Subgaussian,
    HypercubeValidation,
    ConvergenceStudy,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::FormulaTable,
        ExperimentKind::Gaussian1dSandwich,
        ExperimentKind::Remark3,
        ExperimentKind::Subgaussian,
        ExperimentKind::HypercubeValidation,
        ExperimentKind::ConvergenceStudy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::FormulaTable => "formula_table",
            ExperimentKind::Gaussian1dSandwich => "gaussian1d_sandwich",
            ExperimentKind::Remark3 => "remark3",
            ExperimentKind::Subgaussian => "subgaussian",
            ExperimentKind::HypercubeValidation => "hypercube_validation",
            ExperimentKind::ConvergenceStudy => "convergence_study",
        }
    }

    /// Grid keys this experiment understands, with defaults for the optional ones.
    pub fn grid_keys(self) -> &'static [(&'static str, Option<&'static [f64]>)] {
        match self {
            ExperimentKind::FormulaTable => &[
                ("R", None),
                ("t", None),
                ("k_ls", None),
                ("k_p", None),
                ("p", None),
                ("k_poincare", None),
                ("sigma2", None),
                ("c_sg", None),
                ("kappa", None),
                ("k_inf", None),
                ("c0", None),
                ("c1", None),
                ("k_chi2", None),
                ("k_ls_pi", None),
                ("k_chi2_pi", None),
                ("k", None),
                ("p_bernoulli", None),
                ("c", None),
                ("d", None),
                ("c_p", None),
            ],
            ExperimentKind::Gaussian1dSandwich | ExperimentKind::Remark3 => &[("R", None), ("t", None)],
            ExperimentKind::Subgaussian => &[("R", None), ("sigma2", None), ("t", None)],
            ExperimentKind::HypercubeValidation => &[
                ("max_n", Some(&[6.0])),
                ("max_atoms", Some(&[6.0])),
                ("p", Some(&[0.1, 0.25, 0.4])),
                ("exponent", Some(&[2.0, 4.0, f64::INFINITY])),
                ("instances", Some(&[200.0])),
            ],
            ExperimentKind::ConvergenceStudy => &[("R", None), ("t", None), ("ladder", Some(&[1001.0, 2001.0, 4001.0]))],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    /// CSV for a `.csv` extension, JSON otherwise.
    pub fn for_path(path: Option<&Path>) -> Format {
        match path {
            Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum GridValue {
    One(f64),
    Many(Vec<f64>),
}

/// Numeric knobs shared by the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Overrides {
    pub n_points: usize,
    pub window_sigmas: f64,
    /// Relative slack allowed in every audited inequality.
    pub audit_tolerance: f64,
    /// Relative eigenvalue change that ends the 1-d eigensolve.
    pub solver_tolerance: f64,
    pub restarts: usize,
    pub max_iters: usize,
}

impl Default for Overrides {
    fn default() -> Self {
        Self {
            n_points: 4001,
            window_sigmas: 8.0,
            audit_tolerance: 1e-6,
            solver_tolerance: 1e-10,
            restarts: 8,
            max_iters: 500,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: ExperimentKind,
    #[serde(default)]
    seed: u64,
    output: Option<PathBuf>,
    format: Option<Format>,
    plot: Option<PathBuf>,
    workers: Option<usize>,
    #[serde(default)]
    grid: BTreeMap<String, GridValue>,
    #[serde(default)]
    overrides: Overrides,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    /// `None` writes to stdout.
    pub output: Option<PathBuf>,
    pub format: Format,
    /// Optional CSV of parameters against values and their logs.
    pub plot: Option<PathBuf>,
    pub workers: Option<usize>,
    /// Grid values in key order; every list is non-empty.
    pub grid: BTreeMap<String, Vec<f64>>,
    pub overrides: Overrides,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let allowed = raw.experiment.grid_keys();
        let mut grid = BTreeMap::new();
        for (key, value) in raw.grid {
            if !allowed.iter().any(|(k, _)| *k == key) {
                let names: Vec<&str> = allowed.iter().map(|(k, _)| *k).collect();
                return Err(CliError::Config(format!(
                    "unknown grid key `{key}` for {}; expected one of {}",
                    raw.experiment,
                    names.join(", ")
                )));
            }
            let values = match value {
                GridValue::One(v) => vec![v],
                GridValue::Many(v) => v,
            };
            if values.is_empty() {
                return Err(CliError::Config(format!("grid `{key}` is empty")));
            }
            if values.iter().any(|v| v.is_nan()) {
                return Err(CliError::Config(format!("grid `{key}` contains nan")));
            }
            grid.insert(key, values);
        }
        for (key, default) in allowed {
            if !grid.contains_key(*key) {
                if let Some(d) = default {
                    grid.insert((*key).to_string(), d.to_vec());
                } else if raw.experiment != ExperimentKind::FormulaTable {
                    return Err(CliError::Config(format!("{} needs grid `{key}`", raw.experiment)));
                }
            }
        }
        if grid.is_empty() {
            return Err(CliError::Config("grid is empty".into()));
        }
        let o = raw.overrides;
        if o.n_points < 3 || o.restarts == 0 || o.max_iters == 0 {
            return Err(CliError::Config("n_points must be ≥ 3, restarts and max_iters ≥ 1".into()));
        }
        if !(o.window_sigmas > 0.0 && o.audit_tolerance >= 0.0 && o.solver_tolerance > 0.0) {
            return Err(CliError::Config("window_sigmas and solver_tolerance must be positive".into()));
        }
        if raw.workers == Some(0) {
            return Err(CliError::Config("workers must be ≥ 1".into()));
        }
        let format = raw.format.unwrap_or(Format::for_path(raw.output.as_deref()));
        Ok(Self {
            experiment: raw.experiment,
            seed: raw.seed,
            output: raw.output,
            format,
            plot: raw.plot,
            workers: raw.workers,
            grid,
            overrides: o,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Single value of a grid key, for keys that are not swept.
    pub fn scalar(&self, key: &str) -> Result<f64, CliError> {
        match self.grid.get(key).map(Vec::as_slice) {
            Some([v]) => Ok(*v),
            Some(_) => Err(CliError::Config(format!("grid `{key}` takes a single value"))),
            None => Err(CliError::Config(format!("missing grid `{key}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars_and_lists() {
        let c = ExperimentConfig::parse("experiment = \"remark3\"\n[grid]\nR = 1\nt = [0.5, 1]\n").unwrap();
        assert_eq!(c.grid["R"], vec![1.0]);
        assert_eq!(c.grid["t"], vec![0.5, 1.0]);
        assert_eq!(c.seed, 0);
        assert_eq!(c.format, Format::Json);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(ExperimentConfig::parse("experiment = \"remark3\"\nsed = 1\n[grid]\nR = 1\nt = 1\n").is_err());
        assert!(ExperimentConfig::parse("experiment = \"remark3\"\n[grid]\nR = 1\nt = 1\nx = 2\n").is_err());
        assert!(ExperimentConfig::parse("experiment = \"remark3\"\n[grid]\nR = 1\nt = 1\n[overrides]\nn = 2\n").is_err());
    }

    #[test]
    fn rejects_empty_and_missing_grids() {
        assert!(ExperimentConfig::parse("experiment = \"remark3\"\n[grid]\nR = []\nt = 1\n").is_err());
        assert!(ExperimentConfig::parse("experiment = \"remark3\"\n[grid]\nR = 1\n").is_err());
        assert!(ExperimentConfig::parse("experiment = \"formula_table\"\n").is_err());
    }

    #[test]
    fn infinity_and_defaults() {
        let c = ExperimentConfig::parse("experiment = \"hypercube_validation\"\noutput = \"x.CSV\"\n[grid]\nexponent = [2, inf]\n").unwrap();
        assert_eq!(c.grid["exponent"], vec![2.0, f64::INFINITY]);
        assert_eq!(c.grid["instances"], vec![200.0]);
        assert_eq!(c.format, Format::Csv);
    }
}
