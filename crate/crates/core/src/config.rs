//! Run configuration: sectioned TOML with exhaustive error reporting.
//!
//! Parsing happens in two passes. The first walks the raw table against a
//! key schema and collects every unknown key (with a spelling suggestion)
//! and every type mismatch, each tagged with its line. The second
//! deserialises the now well-typed table and range-checks the values,
//! collecting all violations with their dotted field paths.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constitutive::SigmaModel;
use crate::evolution::{InitialData, RunSettings, SolverOptions, StopPolicy};
use crate::riemann::Family;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConfigIssue {
    Parse { line: Option<usize>, message: String },
    Validation { path: String, message: String },
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigIssue::Parse { line: Some(l), message } => write!(f, "line {l}: {message}"),
            ConfigIssue::Parse { line: None, message } => write!(f, "{message}"),
            ConfigIssue::Validation { path, message } => write!(f, "{path}: {message}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid configuration:\n{}", render(.issues))]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

fn render(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  - {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl ConfigError {
    pub fn mentions(&self, needle: &str) -> bool {
        self.issues.iter().any(|i| i.to_string().contains(needle))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Quadratic,
    Cubic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: ModelName,
    /// Quadratic law `(u − shift)²/2`.
    #[serde(default)]
    pub shift: f64,
    /// Cubic law centred at `center` with elliptic band `[center − half_width, center + half_width]`.
    #[serde(default)]
    pub center: f64,
    #[serde(default = "one_f")]
    pub half_width: f64,
}

impl ModelSpec {
    pub fn build(&self) -> crate::Result<SigmaModel> {
        match self.name {
            ModelName::Quadratic => Ok(SigmaModel::quadratic(self.shift)),
            ModelName::Cubic => SigmaModel::cubic(self.center, self.half_width),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Constant,
    #[serde(alias = "hyperbolic_sine")]
    Sine,
    SimpleWave,
    /// Two whitespace/comma separated columns `u v_periodic`, one grid point per line.
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    pub profile: Profile,
    #[serde(default)]
    pub base: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "one_u")]
    pub mode: u32,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub v_base: f64,
    #[serde(default)]
    pub v_amplitude: f64,
    #[serde(default = "one_u")]
    pub v_mode: u32,
    #[serde(default)]
    pub v_phase: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// `v(t, x + 1) = v(t, x) + winding_c`.
    #[serde(default)]
    pub winding_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub n_x: usize,
    pub t0: f64,
    pub t_max: f64,
    pub cfl: f64,
    pub lambda_floor: f64,
    pub filter: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        let s = SolverOptions::default();
        GridSpec {
            n_x: 256,
            t0: 0.0,
            t_max: 10.0,
            cfl: s.cfl,
            lambda_floor: s.lambda_floor,
            filter: s.filter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpec {
    pub stop_policy: StopPolicy,
    pub grad_max: f64,
    pub tail_max: f64,
    pub save_every: usize,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for RunSpec {
    fn default() -> Self {
        let s = RunSettings::default();
        RunSpec {
            stop_policy: s.stop_policy,
            grad_max: s.solver.grad_max,
            tail_max: s.solver.tail_max,
            save_every: s.save_every,
            max_steps: s.max_steps,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianAction {
    Flow,
    Drift,
    Orbit,
    Reduce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsSpec {
    pub characteristics: bool,
    pub riccati: bool,
    pub energy: bool,
    /// Only `"default"`, i.e. `(u − α)(β − u)`, is available.
    pub energy_weight: String,
    pub hamiltonian: Vec<HamiltonianAction>,
    /// Characteristic seeds on the first frame.
    pub seeds: usize,
    /// Draw seed positions uniformly at random (from `run.seed`) instead of evenly.
    pub random_seeds: bool,
    pub growth_threshold: f64,
    pub extrapolate: f64,
    pub flow_start: [f64; 3],
    pub flow_t_end: f64,
    pub orbits: Vec<(u32, i32)>,
}

impl Default for DiagnosticsSpec {
    fn default() -> Self {
        DiagnosticsSpec {
            characteristics: false,
            riccati: false,
            energy: false,
            energy_weight: "default".into(),
            hamiltonian: Vec::new(),
            seeds: 16,
            random_seeds: false,
            growth_threshold: crate::characteristics::GROWTH_THRESHOLD,
            extrapolate: 0.0,
            flow_start: [0.0, 0.0, 1.0],
            flow_t_end: 1.0,
            orbits: vec![(1, 0), (1, 1), (2, 1)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: String,
    /// Write every n-th stored frame as CSV (the last frame is always written).
    pub frame_every: usize,
    /// Keep every n-th tracer step in characteristic CSVs.
    pub path_every: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: "out".into(),
            frame_every: 1,
            path_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Dotted path of a numeric parameter, e.g. `data.amplitude`.
    pub parameter: String,
    pub values: Vec<f64>,
}

/// Numeric parameters a sweep may vary.
pub const SWEEPABLE: &[&str] = &[
    "model.shift",
    "model.center",
    "model.half_width",
    "data.base",
    "data.amplitude",
    "data.phase",
    "data.v_base",
    "data.v_amplitude",
    "data.v_phase",
    "data.winding_c",
    "grid.t_max",
    "grid.cfl",
    "run.grad_max",
    "run.tail_max",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub data: DataSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub run: RunSpec,
    #[serde(default)]
    pub diagnostics: DiagnosticsSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

fn one_f() -> f64 {
    1.0
}

fn one_u() -> u32 {
    1
}

impl RunConfig {
    pub fn run_settings(&self) -> RunSettings {
        RunSettings {
            t_max: self.grid.t_max,
            solver: SolverOptions {
                cfl: self.grid.cfl,
                lambda_floor: self.grid.lambda_floor,
                filter: self.grid.filter,
                grad_max: self.run.grad_max,
                tail_max: self.run.tail_max,
            },
            stop_policy: self.run.stop_policy,
            save_every: self.run.save_every,
            max_steps: self.run.max_steps,
        }
    }

    /// Initial data for the solver; `File` profiles are read relative to `base_dir`.
    pub fn initial_data(&self, base_dir: &std::path::Path) -> crate::Result<InitialData> {
        let d = &self.data;
        Ok(match d.profile {
            Profile::Constant => InitialData::Constant { u: d.base, v: d.v_base },
            Profile::Sine => InitialData::Sine {
                base: d.base,
                amplitude: d.amplitude,
                mode: d.mode,
                phase: d.phase,
                v_amplitude: d.v_amplitude,
                v_mode: d.v_mode,
                v_phase: d.v_phase,
            },
            Profile::SimpleWave => InitialData::SimpleWave {
                base: d.base,
                amplitude: d.amplitude,
                mode: d.mode,
                phase: d.phase,
                family: d.family.unwrap_or(Family::First),
            },
            Profile::File => {
                let rel = d.path.as_deref().unwrap_or_default();
                let path = base_dir.join(rel);
                let text = std::fs::read_to_string(&path).map_err(|e| crate::Error::io(&path, e))?;
                let (mut u, mut v) = (Vec::new(), Vec::new());
                for (i, line) in text.lines().enumerate() {
                    let line = line.trim();
                    if line.is_empty() || line.starts_with('#') {
                        continue;
                    }
                    let cols: Vec<f64> = line
                        .split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|s| !s.is_empty())
                        .map(str::parse)
                        .collect::<Result<_, _>>()
                        .map_err(|e| crate::Error::InvalidInput(format!("{}:{}: {e}", path.display(), i + 1)))?;
                    if cols.len() != 2 {
                        return Err(crate::Error::InvalidInput(format!(
                            "{}:{}: expected two columns (u, v_periodic)",
                            path.display(),
                            i + 1
                        )));
                    }
                    u.push(cols[0]);
                    v.push(cols[1]);
                }
                InitialData::Samples { u, v_periodic: v }
            }
        })
    }

    /// Sets a sweepable parameter by its dotted path.
    pub fn set_parameter(&mut self, path: &str, value: f64) -> Result<(), ConfigError> {
        let slot = match path {
            "model.shift" => &mut self.model.shift,
            "model.center" => &mut self.model.center,
            "model.half_width" => &mut self.model.half_width,
            "data.base" => &mut self.data.base,
            "data.amplitude" => &mut self.data.amplitude,
            "data.phase" => &mut self.data.phase,
            "data.v_base" => &mut self.data.v_base,
            "data.v_amplitude" => &mut self.data.v_amplitude,
            "data.v_phase" => &mut self.data.v_phase,
            "data.winding_c" => &mut self.data.winding_c,
            "grid.t_max" => &mut self.grid.t_max,
            "grid.cfl" => &mut self.grid.cfl,
            "run.grad_max" => &mut self.run.grad_max,
            "run.tail_max" => &mut self.run.tail_max,
            other => {
                return Err(ConfigError {
                    issues: vec![ConfigIssue::Validation {
                        path: "sweep.parameter".into(),
                        message: unknown_message("parameter", other, SWEEPABLE),
                    }],
                })
            }
        };
        *slot = value;
        Ok(())
    }

    /// Canonical TOML text; `parse_config` of it gives back `self`.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut issues = Vec::new();
        let mut bad = |path: &str, message: String| {
            issues.push(ConfigIssue::Validation {
                path: path.into(),
                message,
            })
        };
        let finite = [
            ("model.shift", self.model.shift),
            ("model.center", self.model.center),
            ("data.base", self.data.base),
            ("data.amplitude", self.data.amplitude),
            ("data.phase", self.data.phase),
            ("data.v_base", self.data.v_base),
            ("data.v_amplitude", self.data.v_amplitude),
            ("data.v_phase", self.data.v_phase),
            ("data.winding_c", self.data.winding_c),
            ("grid.t0", self.grid.t0),
        ];
        for (path, v) in finite {
            if !v.is_finite() {
                bad(path, format!("must be finite, got {v}"));
            }
        }
        if self.model.name == ModelName::Cubic && !(self.model.half_width > 0.0 && self.model.half_width.is_finite()) {
            bad("model.half_width", format!("must be > 0, got {}", self.model.half_width));
        }
        if self.data.mode == 0 {
            bad("data.mode", "must be >= 1".into());
        }
        if self.data.v_mode == 0 {
            bad("data.v_mode", "must be >= 1".into());
        }
        if self.data.profile == Profile::File && self.data.path.is_none() {
            bad("data.path", "required when profile = \"file\"".into());
        }
        if self.data.profile == Profile::SimpleWave && self.data.family.is_none() {
            bad("data.family", "required when profile = \"simple_wave\" (first | second)".into());
        }
        if !(8..=1 << 20).contains(&self.grid.n_x) {
            bad("grid.n_x", format!("must be in [8, 1048576], got {}", self.grid.n_x));
        }
        if !(self.grid.t_max.is_finite() && self.grid.t_max > self.grid.t0) {
            bad("grid.t_max", format!("must be finite and > grid.t0, got {}", self.grid.t_max));
        }
        if !(self.grid.cfl > 0.0 && self.grid.cfl <= 2.0) {
            bad("grid.cfl", format!("must be in (0, 2], got {}", self.grid.cfl));
        }
        if !(self.grid.lambda_floor > 0.0 && self.grid.lambda_floor.is_finite()) {
            bad("grid.lambda_floor", format!("must be > 0, got {}", self.grid.lambda_floor));
        }
        if !(self.run.grad_max > 0.0) {
            bad("run.grad_max", format!("must be > 0, got {}", self.run.grad_max));
        }
        if !(self.run.tail_max > 0.0 && self.run.tail_max < 1.0) {
            bad("run.tail_max", format!("must be in (0, 1), got {}", self.run.tail_max));
        }
        if self.run.save_every == 0 {
            bad("run.save_every", "must be >= 1".into());
        }
        if self.run.max_steps == 0 {
            bad("run.max_steps", "must be >= 1".into());
        }
        let d = &self.diagnostics;
        if d.energy_weight != "default" {
            bad("diagnostics.energy_weight", format!("unknown weight {:?} (available: \"default\")", d.energy_weight));
        }
        if d.seeds == 0 {
            bad("diagnostics.seeds", "must be >= 1".into());
        }
        if !(d.growth_threshold > 0.0) {
            bad("diagnostics.growth_threshold", format!("must be > 0, got {}", d.growth_threshold));
        }
        if !(0.0..=1.0).contains(&d.extrapolate) {
            bad("diagnostics.extrapolate", format!("must be in [0, 1], got {}", d.extrapolate));
        }
        if !d.flow_start.iter().all(|v| v.is_finite()) || !d.flow_t_end.is_finite() {
            bad("diagnostics.flow_start", "must be finite".into());
        }
        for (i, (m, _)) in d.orbits.iter().enumerate() {
            if *m == 0 {
                bad(&format!("diagnostics.orbits[{i}]"), "period m must be >= 1".into());
            }
        }
        if !d.hamiltonian.is_empty() && self.model.name != ModelName::Quadratic {
            bad("diagnostics.hamiltonian", "the Hamiltonian correspondence needs model.name = \"quadratic\"".into());
        }
        if self.output.dir.is_empty() {
            bad("output.dir", "must not be empty".into());
        }
        if self.output.frame_every == 0 {
            bad("output.frame_every", "must be >= 1".into());
        }
        if self.output.path_every == 0 {
            bad("output.path_every", "must be >= 1".into());
        }
        if let Some(s) = &self.sweep {
            if !SWEEPABLE.contains(&s.parameter.as_str()) {
                bad("sweep.parameter", unknown_message("parameter", &s.parameter, SWEEPABLE));
            }
            if s.values.is_empty() {
                bad("sweep.values", "must list at least one value".into());
            }
            if s.values.iter().any(|v| !v.is_finite()) {
                bad("sweep.values", "must be finite".into());
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { issues })
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Float,
    Int,
    Bool,
    Str,
    FloatTriple,
    IntPairs,
    StrList,
    FloatList,
}

impl Kind {
    fn describe(self) -> &'static str {
        match self {
            Kind::Float => "a number",
            Kind::Int => "a non-negative integer",
            Kind::Bool => "true or false",
            Kind::Str => "a string",
            Kind::FloatTriple => "an array of three numbers",
            Kind::IntPairs => "an array of [m, n] integer pairs",
            Kind::StrList => "an array of strings",
            Kind::FloatList => "an array of numbers",
        }
    }
}

const SCHEMA: &[(&str, &[(&str, Kind)])] = &[
    (
        "model",
        &[
            ("name", Kind::Str),
            ("shift", Kind::Float),
            ("center", Kind::Float),
            ("half_width", Kind::Float),
        ],
    ),
    (
        "data",
        &[
            ("profile", Kind::Str),
            ("base", Kind::Float),
            ("amplitude", Kind::Float),
            ("mode", Kind::Int),
            ("phase", Kind::Float),
            ("v_base", Kind::Float),
            ("v_amplitude", Kind::Float),
            ("v_mode", Kind::Int),
            ("v_phase", Kind::Float),
            ("family", Kind::Str),
            ("path", Kind::Str),
            ("winding_c", Kind::Float),
        ],
    ),
    (
        "grid",
        &[
            ("n_x", Kind::Int),
            ("t0", Kind::Float),
            ("t_max", Kind::Float),
            ("cfl", Kind::Float),
            ("lambda_floor", Kind::Float),
            ("filter", Kind::Bool),
        ],
    ),
    (
        "run",
        &[
            ("stop_policy", Kind::Str),
            ("grad_max", Kind::Float),
            ("tail_max", Kind::Float),
            ("save_every", Kind::Int),
            ("max_steps", Kind::Int),
            ("seed", Kind::Int),
        ],
    ),
    (
        "diagnostics",
        &[
            ("characteristics", Kind::Bool),
            ("riccati", Kind::Bool),
            ("energy", Kind::Bool),
            ("energy_weight", Kind::Str),
            ("hamiltonian", Kind::StrList),
            ("seeds", Kind::Int),
            ("random_seeds", Kind::Bool),
            ("growth_threshold", Kind::Float),
            ("extrapolate", Kind::Float),
            ("flow_start", Kind::FloatTriple),
            ("flow_t_end", Kind::Float),
            ("orbits", Kind::IntPairs),
        ],
    ),
    (
        "output",
        &[("dir", Kind::Str), ("frame_every", Kind::Int), ("path_every", Kind::Int)],
    ),
    ("sweep", &[("parameter", Kind::Str), ("values", Kind::FloatList)]),
];

/// Enumerated string values, checked in the first pass so typos get suggestions.
const CHOICES: &[(&str, &str, &[&str])] = &[
    ("model", "name", &["quadratic", "cubic"]),
    ("data", "profile", &["constant", "sine", "hyperbolic_sine", "simple_wave", "file"]),
    ("data", "family", &["first", "second"]),
    ("run", "stop_policy", &["continue", "stop-on-mixed"]),
];

const HAMILTONIAN_ACTIONS: &[&str] = &["flow", "drift", "orbit", "reduce"];

fn suggestion<'a>(word: &str, candidates: &[&'a str]) -> Option<&'a str> {
    candidates
        .iter()
        .map(|c| {
            let plain = |s: &str| s.replace(['_', '-'], "").to_lowercase();
            let score = strsim::jaro_winkler(word, c).max(strsim::jaro_winkler(&plain(word), &plain(c)));
            (score, *c)
        })
        .filter(|(score, _)| *score >= 0.7)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c)
}

fn unknown_message(what: &str, word: &str, candidates: &[&str]) -> String {
    match suggestion(word, candidates) {
        Some(s) => format!("unknown {what} `{word}` (did you mean `{s}`?)"),
        None => format!("unknown {what} `{word}` (expected one of: {})", candidates.join(", ")),
    }
}

/// 1-based line of `key` inside `[section]` (or of the section header when `key` is None).
fn locate(text: &str, section: &str, key: Option<&str>) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            current = rest.trim_end_matches(']').trim().to_string();
            if key.is_none() && current == section {
                return Some(i + 1);
            }
            continue;
        }
        if let Some(k) = key {
            if current == section {
                let lhs = line.split('=').next().unwrap_or("").trim().trim_matches('"');
                if line.contains('=') && lhs == k {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn kind_matches(kind: Kind, value: &toml::Value) -> bool {
    use toml::Value as V;
    match (kind, value) {
        (Kind::Float, V::Float(_) | V::Integer(_)) => true,
        (Kind::Int, V::Integer(i)) => *i >= 0,
        (Kind::Bool, V::Boolean(_)) => true,
        (Kind::Str, V::String(_)) => true,
        (Kind::FloatTriple, V::Array(a)) => a.len() == 3 && a.iter().all(|v| kind_matches(Kind::Float, v)),
        (Kind::FloatList, V::Array(a)) => a.iter().all(|v| kind_matches(Kind::Float, v)),
        (Kind::StrList, V::Array(a)) => a.iter().all(|v| v.is_str()),
        (Kind::IntPairs, V::Array(a)) => a.iter().all(|p| match p {
            V::Array(pair) => pair.len() == 2 && pair.iter().all(|v| v.is_integer()),
            _ => false,
        }),
        _ => false,
    }
}

/// Integers are accepted wherever a number is expected.
fn widen(kind: Kind, value: &mut toml::Value) {
    use toml::Value as V;
    match (kind, &mut *value) {
        (Kind::Float, V::Integer(i)) => *value = V::Float(*i as f64),
        (Kind::FloatTriple | Kind::FloatList, V::Array(a)) => a.iter_mut().for_each(|v| widen(Kind::Float, v)),
        _ => {}
    }
}

/// Parses and validates a configuration, reporting every problem found.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError {
        issues: vec![ConfigIssue::Parse {
            line: e.span().map(|s| line_of(text, s.start)),
            message: e.message().to_string(),
        }],
    })?;

    let mut issues = Vec::new();
    // entries rejected here are dropped so the second pass can still report
    // range problems in everything else
    let mut rejected: Vec<(String, Option<String>)> = Vec::new();
    let sections: Vec<&str> = SCHEMA.iter().map(|(s, _)| *s).collect();
    for (name, value) in table.iter_mut() {
        let Some((_, keys)) = SCHEMA.iter().find(|(s, _)| s == name) else {
            issues.push(ConfigIssue::Parse {
                line: locate(text, name, None),
                message: unknown_message("section", name, &sections),
            });
            rejected.push((name.clone(), None));
            continue;
        };
        let Some(body) = value.as_table_mut() else {
            issues.push(ConfigIssue::Parse {
                line: None,
                message: format!("`{name}` must be a [section]"),
            });
            rejected.push((name.clone(), None));
            continue;
        };
        let names: Vec<&str> = keys.iter().map(|(k, _)| *k).collect();
        for (key, v) in body.iter_mut() {
            let line = locate(text, name, Some(key));
            let Some((_, kind)) = keys.iter().find(|(k, _)| k == key) else {
                issues.push(ConfigIssue::Parse {
                    line,
                    message: unknown_message(&format!("key in [{name}]"), key, &names),
                });
                rejected.push((name.clone(), Some(key.clone())));
                continue;
            };
            if !kind_matches(*kind, v) {
                issues.push(ConfigIssue::Parse {
                    line,
                    message: format!("{name}.{key} must be {}", kind.describe()),
                });
                rejected.push((name.clone(), Some(key.clone())));
                continue;
            }
            widen(*kind, v);
            if let Some((_, _, choices)) = CHOICES.iter().find(|(s, k, _)| s == name && k == key) {
                let s = v.as_str().unwrap_or_default();
                if !choices.contains(&s) {
                    issues.push(ConfigIssue::Parse {
                        line,
                        message: unknown_message(&format!("value for {name}.{key}"), s, choices),
                    });
                    rejected.push((name.clone(), Some(key.clone())));
                }
            }
            if *name == "diagnostics" && key == "hamiltonian" {
                for a in v.as_array().into_iter().flatten().filter_map(|a| a.as_str()) {
                    if !HAMILTONIAN_ACTIONS.contains(&a) {
                        issues.push(ConfigIssue::Parse {
                            line,
                            message: unknown_message("hamiltonian action", a, HAMILTONIAN_ACTIONS),
                        });
                        rejected.push((name.clone(), Some(key.clone())));
                    }
                }
            }
        }
    }
    for (section, key) in &rejected {
        match key {
            None => {
                table.remove(section);
            }
            Some(k) => {
                if let Some(t) = table.get_mut(section).and_then(|v| v.as_table_mut()) {
                    t.remove(k);
                }
            }
        }
    }
    let already_reported = |section: &str, key: Option<&str>| {
        rejected
            .iter()
            .any(|(s, k)| s == section && (k.is_none() || k.as_deref() == key))
    };
    let mut blocking = false;
    for required in ["model", "data"] {
        if already_reported(required, None) {
            blocking = true;
            continue;
        }
        if !table.contains_key(required) {
            issues.push(ConfigIssue::Validation {
                path: required.into(),
                message: "section is required".into(),
            });
        }
    }
    for (section, key) in [("model", "name"), ("data", "profile")] {
        if let Some(t) = table.get(section).and_then(|v| v.as_table()) {
            if already_reported(section, Some(key)) {
                blocking = true;
            } else if !t.contains_key(key) {
                issues.push(ConfigIssue::Validation {
                    path: format!("{section}.{key}"),
                    message: "is required".into(),
                });
            }
        }
    }
    if blocking || issues.iter().any(|i| matches!(i, ConfigIssue::Validation { .. })) {
        return Err(ConfigError { issues });
    }

    let cfg: RunConfig = match toml::Value::Table(table).try_into() {
        Ok(cfg) => cfg,
        Err(e) => {
            let e: toml::de::Error = e;
            issues.push(ConfigIssue::Parse {
                line: None,
                message: e.message().to_string(),
            });
            return Err(ConfigError { issues });
        }
    };
    if let Err(e) = cfg.validate() {
        issues.extend(e.issues);
    }
    if !issues.is_empty() {
        return Err(ConfigError { issues });
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[model]
name = "quadratic"

[data]
profile = "hyperbolic_sine"
base = -1.0
amplitude = 0.1

[grid]
n_x = 256
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.grid.n_x, 256);
        assert_eq!(cfg.data.profile, Profile::Sine);
        assert_eq!(cfg.grid.cfl, 0.4);
        assert_eq!(cfg.run.tail_max, 1e-4);
        assert_eq!(cfg.run.stop_policy, StopPolicy::StopOnMixed);
        assert_eq!(cfg.output.dir, "out");
        assert_eq!(cfg.diagnostics.orbits, vec![(1, 0), (1, 1), (2, 1)]);
    }

    #[test]
    fn zero_grid_is_a_validation_error() {
        let text = MINIMAL.replace("n_x = 256", "n_x = 0");
        let err = parse_config(&text).unwrap_err();
        assert!(matches!(&err.issues[0], ConfigIssue::Validation { path, .. } if path == "grid.n_x"));
    }

    #[test]
    fn unknown_key_suggests_spelling() {
        let text = MINIMAL.replace("n_x = 256", "nx = 256");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.issues.len(), 1);
        match &err.issues[0] {
            ConfigIssue::Parse { line, message } => {
                assert_eq!(*line, Some(11));
                assert!(message.contains("`n_x`"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn range_errors_survive_unknown_keys() {
        let text = MINIMAL.replace("n_x = 256", "nx = 256\ncfl = -1.0");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.issues.len(), 2, "{err}");
        assert!(err.mentions("did you mean `n_x`"));
        assert!(err.mentions("grid.cfl"));
    }

    #[test]
    fn all_problems_are_reported() {
        let text = r#"
[model]
name = "quadratik"
[data]
profile = "sine"
amplitude = "big"
[grid]
nx = 5
[outptu]
dir = "x"
"#;
        let err = parse_config(text).unwrap_err();
        assert_eq!(err.issues.len(), 4, "{err}");
        assert!(err.mentions("`quadratic`"));
        assert!(err.mentions("data.amplitude must be a number"));
        assert!(err.mentions("`output`"));
        let rendered = err.to_string();
        assert!(rendered.contains("line 3"), "{rendered}");
    }

    #[test]
    fn validation_collects_every_range_error() {
        let text = format!("{MINIMAL}\n[run]\ntail_max = 2.0\nsave_every = 0\n");
        let err = parse_config(&text).unwrap_err();
        assert!(err.mentions("run.tail_max"));
        assert!(err.mentions("run.save_every"));
    }

    #[test]
    fn syntax_error_has_a_line() {
        let err = parse_config("[model]\nname = \n").unwrap_err();
        assert!(matches!(err.issues[0], ConfigIssue::Parse { line: Some(2), .. }), "{err}");
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = parse_config(MINIMAL).unwrap();
        cfg.sweep = Some(SweepSpec {
            parameter: "data.amplitude".into(),
            values: vec![0.05, 0.1],
        });
        cfg.diagnostics.hamiltonian = vec![HamiltonianAction::Drift];
        assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn sweep_parameters_are_settable() {
        let mut cfg = parse_config(MINIMAL).unwrap();
        for p in SWEEPABLE {
            cfg.set_parameter(p, 0.5).unwrap();
        }
        assert!(cfg.set_parameter("grid.nx", 1.0).unwrap_err().mentions("did you mean"));
    }
}
