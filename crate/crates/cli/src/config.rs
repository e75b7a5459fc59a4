use crate::CliError;
use clap::Args;
use qesmms_core::DimParam;
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// Flags shared by every subcommand. A `--config` JSON file uses the same
/// names as keys; flags given on the command line take precedence.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    /// JSON file with any of these options.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Input descriptor (verify, energy, export) or scale tuple (duality).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Manifold dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Dimensional parameter: a number, "+inf" or "-inf".
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<DimParam>,
    /// Tolerance (solver or verification).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Length of the integration interval.
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of sample points.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Characteristic constant used by `energy`.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// Family: cigar, bryant or lpp.
    #[arg(long)]
    pub family: Option<String>,
    /// Comma-separated m values for `sweep-m`, e.g. "2,10,100,+inf".
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub ms: Option<Vec<DimParam>>,
    /// Logarithmic m range "start:stop:count" for `sweep-m`.
    #[arg(long = "m-range")]
    pub m_range: Option<String>,
    /// Circle bundle class of the LPP family.
    #[arg(long)]
    pub s: Option<u32>,
    /// First Chern class multiple of the LPP base.
    #[arg(long)]
    pub q: Option<u32>,
    /// Seed of the LPP random starts.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output format for tables written to stdout: json or csv.
    #[arg(long)]
    pub format: Option<String>,
}

macro_rules! merge {
    ($a:ident, $b:ident, $($f:ident),*) => {
        RunConfig { config: $a.config.clone(), $($f: $a.$f.clone().or($b.$f),)* }
    };
}

impl RunConfig {
    /// Command-line values overlaid on the `--config` file, if any.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let Some(path) = &self.config else { return Ok(self.clone()) };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let file: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let file = file.relative_to(path.parent().unwrap_or(Path::new(".")));
        Ok(merge!(self, file, input, n, m, tol, t_max, out, grid, mu, family, ms, m_range, s, q, seed, format))
    }

    fn relative_to(mut self, dir: &Path) -> Self {
        for p in [&mut self.input, &mut self.out].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        self
    }

    pub fn tol_or(&self, default: f64) -> Result<f64, CliError> {
        let t = self.tol.unwrap_or(default);
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Input(format!("--tol must be positive, got {t}")));
        }
        Ok(t)
    }

    pub fn t_max_or(&self, default: f64) -> Result<f64, CliError> {
        let t = self.t_max.unwrap_or(default);
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Input(format!("--t-max must be positive and finite, got {t}")));
        }
        Ok(t)
    }

    pub fn grid_or(&self, default: usize) -> Result<usize, CliError> {
        let k = self.grid.unwrap_or(default);
        if k < 2 {
            return Err(CliError::Input(format!("--grid must be at least 2, got {k}")));
        }
        Ok(k)
    }

    pub fn input(&self) -> Result<&Path, CliError> {
        self.input.as_deref().ok_or_else(|| CliError::Input("--input is required".into()))
    }

    pub fn family(&self) -> Result<Family, CliError> {
        match self.family.as_deref() {
            Some("cigar") => Ok(Family::Cigar),
            Some("bryant") | Some("bohm") => Ok(Family::Bryant),
            Some("lpp") => Ok(Family::Lpp),
            Some(f) => Err(CliError::Input(format!("unknown family {f:?}; use cigar, bryant or lpp"))),
            None => Err(CliError::Input("--family is required".into())),
        }
    }

    /// The sweep list, sorted ascending with `+inf` last and duplicates removed.
    pub fn sweep_list(&self) -> Result<Vec<DimParam>, CliError> {
        let mut ms = self.ms.clone().unwrap_or_default();
        if let Some(range) = &self.m_range {
            ms.extend(log_range(range)?);
        }
        if ms.is_empty() {
            return Err(CliError::Input("empty m list: give --ms or --m-range".into()));
        }
        ms.sort_by(|a, b| a.total_order(b));
        ms.dedup();
        Ok(ms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Cigar,
    Bryant,
    Lpp,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Cigar => "cigar",
            Family::Bryant => "bryant",
            Family::Lpp => "lpp",
        }
    }
}

/// `start:stop:count`, logarithmically spaced and inclusive.
fn log_range(spec: &str) -> Result<Vec<DimParam>, CliError> {
    let bad = || CliError::Input(format!("--m-range must be start:stop:count with 0 < start < stop, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, k] = parts[..] else { return Err(bad()) };
    let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    let k: usize = k.parse().map_err(|_| bad())?;
    if !(a > 0.0 && b > a && b.is_finite() && k >= 2) {
        return Err(bad());
    }
    let (la, lb) = (a.ln(), b.ln());
    Ok((0..k).map(|i| DimParam::Finite((la + (lb - la) * i as f64 / (k - 1) as f64).exp())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_lists_are_sorted_with_infinity_last() {
        let c = RunConfig { ms: Some(vec![DimParam::PosInfinity, DimParam::Finite(10.0), DimParam::Finite(2.0), DimParam::Finite(10.0)]), ..Default::default() };
        assert_eq!(c.sweep_list().unwrap(), vec![DimParam::Finite(2.0), DimParam::Finite(10.0), DimParam::PosInfinity]);
        assert!(RunConfig::default().sweep_list().is_err());
    }

    #[test]
    fn log_ranges_hit_both_ends() {
        let r = log_range("10:10000:4").unwrap();
        assert_eq!(r.len(), 4);
        assert!((r[1].as_f64() - 100.0).abs() < 1e-9 && (r[3].as_f64() - 1e4).abs() < 1e-9);
        assert!(log_range("10:1:3").is_err() && log_range("1:2").is_err());
    }

    #[test]
    fn command_line_overrides_config() {
        let dir = std::env::temp_dir().join(format!("qesmms-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.json");
        std::fs::write(&path, r#"{"n": 3, "m": "+inf", "tol": 1e-6, "t-max": 4, "out": "res"}"#).unwrap();
        let cli = RunConfig { config: Some(path), n: Some(5), ..Default::default() };
        let c = cli.resolve().unwrap();
        assert_eq!((c.n, c.m, c.tol, c.t_max), (Some(5), Some(DimParam::PosInfinity), Some(1e-6), Some(4.0)));
        assert_eq!(c.out.unwrap(), dir.join("res"));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
