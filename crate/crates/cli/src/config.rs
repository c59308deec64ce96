//! Run configuration layered from defaults, a config file, the environment
//! and command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sarg04_core::detection::DeviceParams;
use sarg04_core::lower_bound::Protocol;
use sarg04_core::pns::DEFAULT_N_MAX;

use crate::error::CliError;

pub const N_MAX_ENV: &str = "QKD_NMAX";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format '{s}' (expected csv or json)")),
        }
    }
}

/// Inclusive grid `start:end:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.end - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + self.step * i as f64).collect()
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, end, step] = parts.as_slice() else {
            return Err(format!("'{s}' is not of the form start:end:step"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("'{x}' is not a number in '{s}'"));
        let grid = GridSpec {
            start: num(start)?,
            end: num(end)?,
            step: num(step)?,
        };
        if !(grid.start.is_finite() && grid.end.is_finite() && grid.step.is_finite()) {
            return Err(format!("'{s}' contains a non-finite bound"));
        }
        if grid.step <= 0.0 || grid.end < grid.start {
            return Err(format!("'{s}' needs start <= end and step > 0"));
        }
        Ok(grid)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.step)
    }
}

/// Every setting a run can take. Unset fields fall through to the next layer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub protocol: Option<Protocol>,
    pub qber: Option<f64>,
    pub qber_grid: Option<GridSpec>,
    pub visibility_grid: Option<GridSpec>,
    pub alpha: Option<f64>,
    pub eta: Option<f64>,
    pub p_dark: Option<f64>,
    pub visibility: Option<f64>,
    pub d_min: Option<f64>,
    pub d_max: Option<f64>,
    pub step: Option<f64>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub preprocessing: Option<bool>,
    pub n_max: Option<usize>,
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| CliError::Config {
                path: origin.to_path_buf(),
                line: index + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', found '{line}'")))?;
            let key = key.trim().replace('-', "_");
            cfg.set(&key, value.trim()).map_err(err)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<Option<T>, String> {
            value.parse().map(Some).map_err(|_| format!("invalid value '{value}' for '{key}'"))
        }
        fn parsed<T: FromStr<Err = String>>(value: &str) -> Result<Option<T>, String> {
            value.parse().map(Some)
        }
        match key {
            "protocol" => self.protocol = parsed(value)?,
            "qber" => self.qber = num(key, value)?,
            "qber_grid" => self.qber_grid = parsed(value)?,
            "visibility_grid" => self.visibility_grid = parsed(value)?,
            "alpha" => self.alpha = num(key, value)?,
            "eta" => self.eta = num(key, value)?,
            "p_dark" => self.p_dark = num(key, value)?,
            "visibility" => self.visibility = num(key, value)?,
            "d_min" => self.d_min = num(key, value)?,
            "d_max" => self.d_max = num(key, value)?,
            "step" => self.step = num(key, value)?,
            "sweep" => {
                let g: GridSpec = value.parse()?;
                self.set_sweep(g);
            }
            "format" => self.format = parsed(value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            "preprocessing" => self.preprocessing = num(key, value)?,
            "n_max" => self.n_max = num(key, value)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    pub fn set_sweep(&mut self, grid: GridSpec) {
        self.d_min = Some(grid.start);
        self.d_max = Some(grid.end);
        self.step = Some(grid.step);
    }

    /// `top` wins wherever it is set.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        RunConfig {
            protocol: top.protocol.or(self.protocol),
            qber: top.qber.or(self.qber),
            qber_grid: top.qber_grid.or(self.qber_grid),
            visibility_grid: top.visibility_grid.or(self.visibility_grid),
            alpha: top.alpha.or(self.alpha),
            eta: top.eta.or(self.eta),
            p_dark: top.p_dark.or(self.p_dark),
            visibility: top.visibility.or(self.visibility),
            d_min: top.d_min.or(self.d_min),
            d_max: top.d_max.or(self.d_max),
            step: top.step.or(self.step),
            format: top.format.or(self.format),
            output: top.output.or(self.output),
            preprocessing: top.preprocessing.or(self.preprocessing),
            n_max: top.n_max.or(self.n_max),
        }
    }

    /// Layer for the `QKD_NMAX` variable.
    pub fn from_env_value(value: Option<&str>) -> Result<Self, CliError> {
        let n_max = value
            .map(|v| {
                v.trim().parse::<usize>().map_err(|_| CliError::Invalid(format!("{N_MAX_ENV} = '{v}' is not an integer")))
            })
            .transpose()?;
        Ok(RunConfig { n_max, ..RunConfig::default() })
    }

    pub fn device(&self) -> DeviceParams {
        let d = DeviceParams::default();
        DeviceParams {
            alpha: self.alpha.unwrap_or(d.alpha),
            eta: self.eta.unwrap_or(d.eta),
            p_dark: self.p_dark.unwrap_or(d.p_dark),
        }
    }

    pub fn n_max_or_default(&self) -> usize {
        self.n_max.unwrap_or(DEFAULT_N_MAX)
    }

    pub fn preprocessing_or_default(&self) -> bool {
        self.preprocessing.unwrap_or(true)
    }

    pub fn format_or_default(&self) -> Format {
        self.format.unwrap_or_default()
    }

    /// Range checks run before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        let invalid = |m: String| Err(CliError::Invalid(m));
        if let Some(q) = self.qber {
            if !(0.0..0.5).contains(&q) {
                return invalid(format!("qber = {q} is outside [0, 0.5)"));
            }
        }
        for (name, grid) in [("qber_grid", self.qber_grid), ("visibility_grid", self.visibility_grid)] {
            if let Some(g) = grid {
                if g.start < 0.0 || g.end > 1.0 {
                    return invalid(format!("{name} = {g} leaves [0, 1]"));
                }
            }
        }
        if let Some(v) = self.visibility {
            if !(0.0..=1.0).contains(&v) {
                return invalid(format!("visibility = {v} is outside [0, 1]"));
            }
        }
        self.device().validate().map_err(CliError::Core)?;
        if let Some(d) = self.d_min {
            if !(d >= 0.0 && d.is_finite()) {
                return invalid(format!("d_min = {d} must be a finite non-negative distance"));
            }
        }
        if let (Some(lo), Some(hi)) = (self.d_min, self.d_max) {
            if hi < lo {
                return invalid(format!("d_max = {hi} is below d_min = {lo}"));
            }
        }
        if let Some(s) = self.step {
            if !(s > 0.0 && s.is_finite()) {
                return invalid(format!("step = {s} must be positive"));
            }
        }
        if let Some(n) = self.n_max {
            if !(3..=30).contains(&n) {
                return invalid(format!("n_max = {n} is outside 3..=30"));
            }
        }
        Ok(())
    }
}
