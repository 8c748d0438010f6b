//! Run configuration: a strict JSON schema with defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::ScanSettings;
use crate::model::{BoundaryData, DataError, Grid, Problem};
use crate::monitors::REPORT_TOL;
use crate::profile::Profile;
use crate::transport::TraceScheme;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    Picard,
    Steady,
    Scan,
    SweepDelta,
    Converge,
    Verify,
}

impl Mode {
    fn needs_data(self) -> bool {
        matches!(self, Mode::Simulate | Mode::Picard | Mode::SweepDelta | Mode::Verify)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Simulate => "simulate",
            Mode::Picard => "picard",
            Mode::Steady => "steady",
            Mode::Scan => "scan",
            Mode::SweepDelta => "sweep-delta",
            Mode::Converge => "converge",
            Mode::Verify => "verify",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub length: f64,
    pub horizon: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub cells: usize,
    /// Target `max(v) dt / dx`; used when `dt` is absent (default 0.5).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataProfiles {
    pub s0: Profile,
    pub s1: Profile,
    pub v_in: Profile,
    pub v_l: Profile,
}

/// Ramp width: a number or `"auto"`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum DeltaChoice {
    #[default]
    Auto,
    Value(f64),
}

impl Serialize for DeltaChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            DeltaChoice::Auto => s.serialize_str("auto"),
            DeltaChoice::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for DeltaChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(DeltaChoice::Value(v)),
            Raw::Text(s) if s == "auto" => Ok(DeltaChoice::Auto),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"auto\", found \"{s}\""
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Regularization {
    pub delta: DeltaChoice,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub picard_tol: f64,
    pub max_iter: usize,
    pub report_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            picard_tol: 1e-12,
            max_iter: 50,
            report_tol: REPORT_TOL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardConfig {
    /// Slab length; `t* / 2` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    /// Minimum number of time steps across the slab.
    pub min_steps: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig { t0: None, min_steps: 40 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SteadyConfig {
    pub draw_ratio: f64,
    pub v_in: f64,
    pub inlet_area: f64,
    pub residence_times: f64,
}

impl Default for SteadyConfig {
    fn default() -> Self {
        SteadyConfig {
            draw_ratio: 2.0,
            v_in: 1.0,
            inlet_area: 1.0,
            residence_times: 5.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Explicit widths; otherwise `count` halvings of the resolved delta.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    pub count: usize,
    /// Run length; `20 delta_0` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Time steps per smallest width.
    pub steps_per_delta: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            deltas: None,
            count: 4,
            t_end: None,
            steps_per_delta: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeConfig {
    pub cells: Vec<usize>,
    pub draw_ratio: f64,
    pub residence_times: f64,
    pub advection_t_end: f64,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        ConvergeConfig {
            cells: vec![100, 200, 400],
            draw_ratio: 2.0,
            residence_times: 5.0,
            advection_t_end: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    pub stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: None,
            stride: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    pub geometry: Geometry,
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataProfiles>,
    #[serde(default)]
    pub regularization: Regularization,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub trace: TraceScheme,
    #[serde(default)]
    pub picard: PicardConfig,
    #[serde(default)]
    pub steady: SteadyConfig,
    #[serde(default)]
    pub scan: ScanSettings,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub converge: ConvergeConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Trouton viscosity `3 mu`. It cancels from the isothermal equations and
    /// only scales the reported tension `3 mu Q`.
    #[serde(default = "unit_viscosity")]
    pub viscosity: f64,
}

fn unit_viscosity() -> f64 {
    1.0
}

pub const DEFAULT_CFL: f64 = 0.5;

impl RunConfig {
    /// The mode, which must be set (by the file or [`RunConfig::resolve`]).
    pub fn mode(&self) -> Mode {
        self.mode.expect("resolved config carries a mode")
    }

    pub fn boundary_data(&self) -> Option<BoundaryData> {
        self.data.as_ref().map(|d| BoundaryData {
            s0: d.s0.clone(),
            s1: d.s1.clone(),
            v_in: d.v_in.clone(),
            v_l: d.v_l.clone(),
            length: self.geometry.length,
            horizon: self.geometry.horizon,
        })
    }

    /// The configured grid for data with maximal speed `v_max`.
    pub fn grid_for(&self, v_max: f64) -> Result<Grid, DataError> {
        match self.grid.dt {
            Some(dt) => Grid::new(self.grid.cells, self.geometry.length, dt),
            None => Grid::with_cfl(
                self.grid.cells,
                self.geometry.length,
                v_max,
                self.grid.cfl.unwrap_or(DEFAULT_CFL),
            ),
        }
    }

    pub fn problem(&self) -> Result<Option<Problem>, ConfigError> {
        self.boundary_data()
            .map(|d| Problem::new(d, self.grid.cells).map_err(data_error))
            .transpose()
    }

    /// The ramp width for `problem`, `"auto"` resolved.
    pub fn delta_for(&self, problem: &Problem) -> f64 {
        match self.regularization.delta {
            DeltaChoice::Auto => problem.auto_delta(),
            DeltaChoice::Value(v) => v,
        }
    }

    /// Checks mode requirements, fills defaults and resolves `delta`.
    pub fn resolve(mut self, mode: Mode) -> Result<Self, ConfigError> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(invalid("mode", format!("file says `{m}` but `{mode}` was requested")));
            }
        }
        self.mode = Some(mode);
        let g = self.geometry;
        if !(g.length.is_finite() && g.length > 0.0) {
            return Err(invalid("geometry.length", "must be positive"));
        }
        if !(g.horizon.is_finite() && g.horizon > 0.0) {
            return Err(invalid("geometry.horizon", "must be positive"));
        }
        if self.grid.cells < 8 {
            return Err(invalid("grid.cells", "must be at least 8"));
        }
        match (self.grid.cfl, self.grid.dt) {
            (Some(_), Some(_)) => return Err(invalid("grid", "give either `cfl` or `dt`, not both")),
            (None, None) => self.grid.cfl = Some(DEFAULT_CFL),
            (Some(c), None) if !(c > 0.0 && c.is_finite()) => return Err(invalid("grid.cfl", "must be positive")),
            (None, Some(dt)) if !(dt > 0.0 && dt.is_finite()) => return Err(invalid("grid.dt", "must be positive")),
            _ => {}
        }
        if !(self.viscosity > 0.0 && self.viscosity.is_finite()) {
            return Err(invalid("viscosity", "must be positive"));
        }
        if self.output.stride == 0 {
            return Err(invalid("output.stride", "must be at least 1"));
        }
        let t = self.tolerances;
        if !(t.picard_tol > 0.0) {
            return Err(invalid("tolerances.picard_tol", "must be positive"));
        }
        if t.max_iter == 0 {
            return Err(invalid("tolerances.max_iter", "must be at least 1"));
        }
        if !(t.report_tol >= 0.0) {
            return Err(invalid("tolerances.report_tol", "must be non-negative"));
        }
        if let Some(d) = &self.data {
            for (name, p) in [("s0", &d.s0), ("s1", &d.s1), ("v_in", &d.v_in), ("v_l", &d.v_l)] {
                p.check_parameters()
                    .map_err(|m| invalid(&format!("data.{name}"), m))?;
            }
        }
        if mode.needs_data() && self.data.is_none() {
            return Err(invalid("data", format!("required in `{mode}` mode")));
        }
        if mode == Mode::Scan {
            self.scan.length = g.length;
            let s = &self.scan;
            if s.epsilon <= 0.0 || s.epsilon > 0.01 {
                return Err(invalid("scan.epsilon", "must lie in (0, 0.01]"));
            }
            if s.ratios.iter().any(|&d| !(d > 1.0)) {
                return Err(invalid("scan.ratios", "draw ratios must exceed 1"));
            }
            if s.ratios.len() < 2 {
                return Err(invalid("scan.ratios", "need at least two draw ratios"));
            }
            if s.residence_times < 30.0 {
                return Err(invalid("scan.residence_times", "must be at least 30"));
            }
            if s.cells < 8 {
                return Err(invalid("scan.cells", "must be at least 8"));
            }
        }
        if mode == Mode::Steady && !(self.steady.draw_ratio > 1.0) {
            return Err(invalid("steady.draw_ratio", "must exceed 1"));
        }
        if mode == Mode::Converge {
            let c = &self.converge.cells;
            if c.len() < 3 || c.windows(2).any(|w| w[1] != 2 * w[0]) || c[0] < 8 {
                return Err(invalid("converge.cells", "need at least three doubling cell counts, from 8"));
            }
        }
        if let Some(problem) = self.problem()? {
            let delta = self.delta_for(&problem);
            let t0 = self.picard.t0.unwrap_or(problem.picard_horizon());
            if mode == Mode::Picard && !(t0 > 0.0 && t0 < problem.budget.t_star) {
                return Err(invalid(
                    "picard.t0",
                    format!("must lie in (0, t*) with t* = {}", problem.budget.t_star),
                ));
            }
            problem
                .time_march_plan(delta)
                .check_admissible(problem.bounds.area_min, t0)
                .map_err(|e| invalid("regularization.delta", e.to_string()))?;
            self.regularization.delta = DeltaChoice::Value(delta);
        }
        Ok(self)
    }
}

fn data_error(e: DataError) -> ConfigError {
    let (field, label) = match &e {
        DataError::OrderingViolation { .. } => ("data.v_in/data.v_l", "ordering"),
        DataError::PositivityViolation { profile, .. } => (*profile, "positivity"),
        DataError::CompatibilityViolation { .. } => ("data.s0/data.s1", "compatibility"),
        DataError::RegularityViolation { profile, .. } => (*profile, "regularity"),
        DataError::InvalidProfile { profile, .. } => (*profile, "profile"),
        DataError::InvalidGeometry(_) => ("geometry", "geometry"),
        DataError::InadmissibleDelta { .. } => ("regularization.delta", "delta"),
    };
    let field = if field.starts_with("data") || field.contains('.') || field == "geometry" {
        field.to_string()
    } else {
        format!("data.{}", field.to_lowercase())
    };
    invalid(&field, format!("{label}: {e}"))
}

/// Parses a configuration document.
pub fn parse_config(text: &str, path: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data => invalid(
                if field.is_empty() || field == "." { "<root>" } else { &field },
                strip_position(&inner.to_string()),
            ),
            _ => ConfigError::Parse {
                path: path.to_string(),
                line: inner.line(),
                column: inner.column(),
                message: strip_position(&inner.to_string()),
            },
        }
    })
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

/// Reads, parses and resolves the configuration at `path` for `mode`.
pub fn load_config(path: &Path, mode: Mode) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text, &path.display().to_string())?.resolve(mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "geometry": {"length": 1.0, "horizon": 1.0},
        "grid": {"cells": 50},
        "data": {
            "s0": {"family": "constant", "value": 1.0},
            "s1": {"family": "constant", "value": 1.0},
            "v_in": {"family": "constant", "value": 1.0},
            "v_l": {"family": "constant", "value": 2.0}
        }
    }"#;

    #[test]
    fn minimal_simulate_fills_defaults() {
        let cfg = parse_config(MINIMAL, "min.json").unwrap().resolve(Mode::Simulate).unwrap();
        assert_eq!(cfg.grid.cfl, Some(0.5));
        assert_eq!(cfg.output.stride, 10);
        let problem = cfg.problem().unwrap().unwrap();
        assert_eq!(cfg.regularization.delta, DeltaChoice::Value(problem.auto_delta()));
        assert_eq!(cfg.trace, TraceScheme::Midpoint);
    }

    #[test]
    fn ordering_violation_names_ordering() {
        let text = MINIMAL.replace(r#""value": 2.0"#, r#""value": 0.5"#).replace(
            r#""v_in": {"family": "constant", "value": 1.0}"#,
            r#""v_in": {"family": "constant", "value": 2.0}"#,
        );
        match parse_config(&text, "x").unwrap().resolve(Mode::Simulate) {
            Err(ConfigError::Validation { message, .. }) => assert!(message.starts_with("ordering"), "{message}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let text = MINIMAL.replace(r#""cells": 50"#, r#""cells": 50, "cfl_taget": 0.3"#);
        match parse_config(&text, "x") {
            Err(ConfigError::Validation { field, message }) => {
                assert_eq!(field, "grid.cfl_taget");
                assert!(message.contains("cfl_taget"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_position() {
        match parse_config("{\n  \"geometry\": {,}\n}", "bad.json") {
            Err(ConfigError::Parse { line, column, .. }) => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn delta_accepts_number_or_auto() {
        let text = MINIMAL.replace(r#""grid""#, r#""regularization": {"delta": 0.001}, "grid""#);
        let cfg = parse_config(&text, "x").unwrap().resolve(Mode::Simulate).unwrap();
        assert_eq!(cfg.regularization.delta, DeltaChoice::Value(0.001));
        let text = MINIMAL.replace(r#""grid""#, r#""regularization": {"delta": "often"}, "grid""#);
        assert!(matches!(parse_config(&text, "x"), Err(ConfigError::Validation { .. })));
    }

    #[test]
    fn mode_requirements() {
        let text = r#"{"geometry": {"length": 1.0, "horizon": 1.0}, "grid": {"cells": 50}}"#;
        let cfg = parse_config(text, "x").unwrap();
        assert!(cfg.clone().resolve(Mode::Steady).is_ok());
        match cfg.resolve(Mode::Simulate) {
            Err(ConfigError::Validation { field, .. }) => assert_eq!(field, "data"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = parse_config(MINIMAL, "x").unwrap().resolve(Mode::Simulate).unwrap();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let again = parse_config(&text, "echo").unwrap().resolve(Mode::Simulate).unwrap();
        assert_eq!(cfg, again);
    }
}
