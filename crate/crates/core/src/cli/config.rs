//! Run configuration: a versioned JSON document, validated on load.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::backlund::ProjectorSpec;
use crate::frames::Tolerances;
use crate::grid::{Grid, Topology};
use crate::vmkdv::{TimeScheme, DEFAULT_MAX_FLOW};

/// The only schema version understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

/// Initial curvature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Zero,
    /// The one-soliton obtained by dressing `k = 0` with `(s, c)`.
    Soliton {
        s: f64,
        c: Vec<f64>,
    },
    /// A snapshot CSV (`x, k1, ...`); its grid replaces the configured one.
    SamplesFile {
        path: PathBuf,
    },
    RandomSmooth {
        seed: u64,
        #[serde(default = "default_modes")]
        modes: usize,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
}

fn default_modes() -> usize {
    6
}

fn default_amplitude() -> f64 {
    0.5
}

/// Optional tolerance overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub orth: Option<f64>,
    pub arc: Option<f64>,
    /// Max error against closed forms in reports.
    pub oracle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Ambient dimension `n` (curvature has `n - 1` components).
    pub dimension: usize,
    pub topology: Topology,
    pub domain_length: f64,
    /// Left end of the domain; defaults to `-domain_length / 2`.
    pub origin: Option<f64>,
    pub samples: usize,
    /// Flow index `j` (2 is vmKdV).
    pub flow: usize,
    pub scheme: TimeScheme,
    pub dt: f64,
    pub t_final: f64,
    /// Number of equal output intervals on `[0, t_final]`.
    pub snapshot_count: usize,
    /// Explicit output times in `(0, t_final]`; replaces `snapshot_count`.
    pub snapshot_times: Option<Vec<f64>>,
    pub initial: InitialCondition,
    /// Soliton or transformation parameters.
    pub solitons: Vec<ProjectorSpec>,
    pub output_dir: PathBuf,
    /// Directory of an earlier `evolve` run, for `reconstruct` and `export`.
    pub input_dir: Option<PathBuf>,
    pub tolerances: ToleranceOverrides,
    #[doc(hidden)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub inject_sign_bug: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            dimension: 2,
            topology: Topology::Periodic,
            domain_length: 40.0,
            origin: None,
            samples: 1024,
            flow: 2,
            scheme: TimeScheme::Etdrk4,
            dt: 1e-3,
            t_final: 0.5,
            snapshot_count: 10,
            snapshot_times: None,
            initial: InitialCondition::Soliton { s: 1.0, c: vec![0.0, 1.0] },
            solitons: vec![ProjectorSpec { s: 0.5, c: vec![0.6, 0.8] }],
            output_dir: PathBuf::from("out"),
            input_dir: None,
            tolerances: ToleranceOverrides::default(),
            inject_sign_bug: false,
        }
    }
}

fn bad(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Config { field: field.into(), message: message.into() }
}

impl RunConfig {
    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad("config", format!("{}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<RunConfig, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| bad(field_of(&e), e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(bad("schema_version", format!("expected {SCHEMA_VERSION}, got {}", self.schema_version)));
        }
        if !(2..=8).contains(&self.dimension) {
            return Err(bad("dimension", "must be between 2 and 8"));
        }
        if !(self.domain_length.is_finite() && self.domain_length > 0.0) {
            return Err(bad("domain_length", "must be positive"));
        }
        if let Some(o) = self.origin {
            if !o.is_finite() {
                return Err(bad("origin", "must be finite"));
            }
        }
        if self.samples < 16 {
            return Err(bad("samples", "need at least 16 samples"));
        }
        if !(1..=DEFAULT_MAX_FLOW).contains(&self.flow) {
            return Err(bad("flow", format!("must be between 1 and {DEFAULT_MAX_FLOW}")));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(bad("dt", "must be positive"));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(bad("t_final", "must be non-negative"));
        }
        if self.snapshot_count == 0 {
            return Err(bad("snapshot_count", "must be at least 1"));
        }
        if let Some(times) = &self.snapshot_times {
            let ok = times.iter().all(|t| t.is_finite() && *t > 0.0 && *t <= self.t_final) && times.windows(2).all(|w| w[0] < w[1]);
            if !ok {
                return Err(bad("snapshot_times", "must increase strictly within (0, t_final]"));
            }
        }
        match &self.initial {
            InitialCondition::Zero => {}
            InitialCondition::Soliton { s, c } => {
                if c.len() != self.dimension {
                    return Err(bad("initial.c", format!("expected {} components", self.dimension)));
                }
                ProjectorSpec::new(*s, c.clone())
                    .map_err(|e| bad(if *s == 0.0 || !s.is_finite() { "initial.s" } else { "initial.c" }, e.to_string()))?;
            }
            InitialCondition::SamplesFile { path } => {
                if !path.exists() {
                    return Err(bad("initial.path", format!("{} does not exist", path.display())));
                }
            }
            InitialCondition::RandomSmooth { modes, amplitude, .. } => {
                if *modes == 0 {
                    return Err(bad("initial.modes", "must be at least 1"));
                }
                if !amplitude.is_finite() {
                    return Err(bad("initial.amplitude", "must be finite"));
                }
            }
        }
        for (i, spec) in self.solitons.iter().enumerate() {
            if spec.c.len() != self.dimension {
                return Err(bad(format!("solitons[{i}].c"), format!("expected {} components", self.dimension)));
            }
            spec.validate().map_err(|e| {
                let field = if spec.s == 0.0 || !spec.s.is_finite() { "s" } else { "c" };
                bad(format!("solitons[{i}].{field}"), e.to_string())
            })?;
        }
        for (name, v) in [
            ("tolerances.orth", self.tolerances.orth),
            ("tolerances.arc", self.tolerances.arc),
            ("tolerances.oracle", self.tolerances.oracle),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(bad(name, "must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        let origin = self.origin.unwrap_or(-0.5 * self.domain_length);
        match self.topology {
            Topology::Periodic => Grid::periodic(self.samples, origin, self.domain_length),
            Topology::Line => Grid::line(self.samples, origin, self.domain_length / (self.samples - 1) as f64),
        }
    }

    pub fn frame_tolerances(&self) -> Tolerances {
        let d = Tolerances::default();
        Tolerances { tol_orth: self.tolerances.orth.unwrap_or(d.tol_orth), tol_arc: self.tolerances.arc.unwrap_or(d.tol_arc) }
    }

    pub fn oracle_tolerance(&self) -> f64 {
        self.tolerances.oracle.unwrap_or(1e-6)
    }

    /// Output times after 0, ending at `t_final`.
    pub fn output_times(&self) -> Vec<f64> {
        if self.t_final == 0.0 {
            return Vec::new();
        }
        match &self.snapshot_times {
            Some(times) => times.clone(),
            None => (1..=self.snapshot_count).map(|m| self.t_final * m as f64 / self.snapshot_count as f64).collect(),
        }
    }
}

/// Best-effort field name from a serde error message.
fn field_of(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    for marker in ["unknown field `", "missing field `"] {
        if let Some(rest) = msg.split(marker).nth(1) {
            if let Some(name) = rest.split('`').next() {
                return name.to_string();
            }
        }
    }
    "config".to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_nonpositive_dt() {
        match RunConfig::from_json(r#"{"dt": 0.0}"#) {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "dt"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_non_unit_direction() {
        let err = RunConfig::from_json(r#"{"initial": {"kind": "soliton", "s": 1.0, "c": [0.0, 2.0]}}"#).unwrap_err();
        assert!(matches!(err, CliError::Config { ref field, .. } if field == "initial.c"));
    }

    #[test]
    fn unknown_fields_are_named() {
        let err = RunConfig::from_json(r#"{"dtt": 1.0}"#).unwrap_err();
        assert!(matches!(err, CliError::Config { ref field, .. } if field == "dtt"));
    }
}
