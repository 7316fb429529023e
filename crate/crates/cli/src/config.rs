//! Config loading and validation. Configs are TOML or JSON objects with flat
//! keys plus an optional `grid` table; see `docs/formats.md`.

use std::collections::BTreeSet;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    SingleQubitDynamics,
    SseCheck,
    TwoQubitQfi,
    Optimize,
    IsingScan,
    HScan,
    SizeScan,
    DeltaG,
    Gap,
}

pub const COMMANDS: [Command; 9] = [
    Command::SingleQubitDynamics,
    Command::SseCheck,
    Command::TwoQubitQfi,
    Command::Optimize,
    Command::IsingScan,
    Command::HScan,
    Command::SizeScan,
    Command::DeltaG,
    Command::Gap,
];

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::SingleQubitDynamics => "single-qubit-dynamics",
            Command::SseCheck => "sse-check",
            Command::TwoQubitQfi => "two-qubit-qfi",
            Command::Optimize => "optimize",
            Command::IsingScan => "ising-scan",
            Command::HScan => "h-scan",
            Command::SizeScan => "size-scan",
            Command::DeltaG => "delta-g",
            Command::Gap => "gap",
        }
    }

    pub fn parse(s: &str) -> Option<Command> {
        COMMANDS.into_iter().find(|c| c.name() == s)
    }
}

/// Parses TOML or JSON text into an object. A sidecar written by a previous
/// run is unwrapped to the config it recorded.
pub fn parse_text(text: &str, path_hint: Option<&Path>) -> Result<Map<String, Value>, CliError> {
    let is_json = path_hint.and_then(|p| p.extension()).is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
    let value: Value = if is_json {
        serde_json::from_str(text).map_err(|e| CliError::Validation(vec![format!("invalid JSON: {e}")]))?
    } else {
        let t: toml::Table = toml::from_str(text).map_err(|e| CliError::Validation(vec![format!("invalid TOML: {}", e.message())]))?;
        serde_json::to_value(t).map_err(|e| CliError::Validation(vec![format!("invalid TOML: {e}")]))?
    };
    let Value::Object(mut map) = value else {
        return Err(CliError::Validation(vec!["config must be a table/object".into()]));
    };
    if map.contains_key("schema_version") {
        match map.remove("config") {
            Some(Value::Object(inner)) => map = inner,
            _ => return Err(CliError::Validation(vec!["sidecar has no `config` object".into()])),
        }
    }
    Ok(map)
}

pub fn load_file(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_text(&text, Some(path))
}

/// Typed, range-checked access to a config object. Records every violation,
/// every applied default and every resolved value; keys never read are
/// reported as unknown by [`Reader::finish`].
pub struct Reader {
    map: Map<String, Value>,
    used: BTreeSet<String>,
    errors: Vec<String>,
    defaults: Vec<String>,
    resolved: Map<String, Value>,
}

impl Reader {
    pub fn new(map: Map<String, Value>) -> Self {
        Self { map, used: BTreeSet::new(), errors: Vec::new(), defaults: Vec::new(), resolved: Map::new() }
    }

    pub fn error(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    /// Records a constructor error from the library.
    pub fn check<T>(&mut self, r: critprobe_core::Result<T>) -> Option<T> {
        r.map_err(|e| self.error(e.to_string())).ok()
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.used.insert(key.to_string());
        self.map.get(key).cloned()
    }

    fn resolve(&mut self, key: &str, v: Value) {
        self.resolved.insert(key.to_string(), v);
    }

    pub fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    pub fn command(&mut self) -> Option<Command> {
        match self.take("command") {
            None => {
                self.error("missing required key `command`");
                None
            }
            Some(Value::String(s)) => match Command::parse(&s) {
                Some(c) => {
                    self.resolve("command", Value::String(s));
                    Some(c)
                }
                None => {
                    let names: Vec<_> = COMMANDS.iter().map(|c| c.name()).collect();
                    self.error(format!("unknown command {s:?} (expected one of {})", names.join(", ")));
                    None
                }
            },
            Some(other) => {
                self.error(format!("`command` must be a string, got {other}"));
                None
            }
        }
    }

    fn number(&mut self, key: &str, v: &Value) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.error(format!("`{key}` must be a finite number, got {v}"));
                None
            }
        }
    }

    fn ranged(&mut self, key: &str, x: f64, range: (f64, f64)) -> Option<f64> {
        if x < range.0 || x > range.1 {
            self.error(format!("`{key}` = {x} outside [{}, {}]", range.0, range.1));
            return None;
        }
        Some(x)
    }

    /// Number in `range`, or `default` (echoed) when absent.
    pub fn f64_or(&mut self, key: &str, default: f64, range: (f64, f64)) -> f64 {
        match self.take(key) {
            None => {
                self.defaults.push(format!("{key} = {default}"));
                self.resolve(key, Value::from(default));
                default
            }
            Some(v) => {
                let x = self.number(key, &v).and_then(|x| self.ranged(key, x, range));
                if let Some(x) = x {
                    self.resolve(key, Value::from(x));
                }
                x.unwrap_or(default)
            }
        }
    }

    pub fn f64_req(&mut self, key: &str, range: (f64, f64)) -> f64 {
        match self.take(key) {
            None => {
                self.error(format!("missing required key `{key}`"));
                f64::NAN
            }
            Some(v) => {
                let x = self.number(key, &v).and_then(|x| self.ranged(key, x, range));
                if let Some(x) = x {
                    self.resolve(key, Value::from(x));
                }
                x.unwrap_or(f64::NAN)
            }
        }
    }

    pub fn f64_opt(&mut self, key: &str, range: (f64, f64)) -> Option<f64> {
        let v = self.take(key)?;
        let x = self.number(key, &v).and_then(|x| self.ranged(key, x, range))?;
        self.resolve(key, Value::from(x));
        Some(x)
    }

    pub fn usize_or(&mut self, key: &str, default: usize, range: (usize, usize)) -> usize {
        match self.take(key) {
            None => {
                self.defaults.push(format!("{key} = {default}"));
                self.resolve(key, Value::from(default));
                default
            }
            Some(v) => match v.as_u64() {
                Some(n) if (range.0 as u64..=range.1 as u64).contains(&n) => {
                    self.resolve(key, Value::from(n));
                    n as usize
                }
                _ => {
                    self.error(format!("`{key}` must be an integer in [{}, {}], got {v}", range.0, range.1));
                    default
                }
            },
        }
    }

    pub fn u64_or(&mut self, key: &str, default: u64) -> u64 {
        match self.take(key) {
            None => {
                self.defaults.push(format!("{key} = {default}"));
                self.resolve(key, Value::from(default));
                default
            }
            Some(v) => match v.as_u64() {
                Some(n) => {
                    self.resolve(key, Value::from(n));
                    n
                }
                None => {
                    self.error(format!("`{key}` must be a non-negative integer, got {v}"));
                    default
                }
            },
        }
    }

    pub fn bool_or(&mut self, key: &str, default: bool) -> bool {
        match self.take(key) {
            None => {
                self.resolve(key, Value::from(default));
                default
            }
            Some(Value::Bool(b)) => {
                self.resolve(key, Value::from(b));
                b
            }
            Some(v) => {
                self.error(format!("`{key}` must be true or false, got {v}"));
                default
            }
        }
    }

    pub fn string_or(&mut self, key: &str, default: &str, allowed: &[&str]) -> String {
        match self.take(key) {
            None => {
                self.defaults.push(format!("{key} = {default:?}"));
                self.resolve(key, Value::from(default));
                default.to_string()
            }
            Some(Value::String(s)) if allowed.contains(&s.as_str()) => {
                self.resolve(key, Value::from(s.clone()));
                s
            }
            Some(v) => {
                self.error(format!("`{key}` must be one of {allowed:?}, got {v}"));
                default.to_string()
            }
        }
    }

    /// A number or a non-empty, strictly increasing list of numbers in `range`.
    pub fn f64_list_or(&mut self, key: &str, default: &[f64], range: (f64, f64)) -> Vec<f64> {
        let Some(v) = self.take(key) else {
            self.defaults.push(format!("{key} = {default:?}"));
            self.resolve(key, Value::from(default.to_vec()));
            return default.to_vec();
        };
        let items = match v {
            Value::Array(a) => a,
            other => vec![other],
        };
        let mut out = Vec::with_capacity(items.len());
        for it in &items {
            if let Some(x) = self.number(key, it).and_then(|x| self.ranged(key, x, range)) {
                out.push(x);
            }
        }
        if out.len() != items.len() {
            return default.to_vec();
        }
        if out.is_empty() || out.windows(2).any(|w| w[1] <= w[0]) {
            self.error(format!("`{key}` must be non-empty and strictly increasing"));
            return default.to_vec();
        }
        self.resolve(key, Value::from(out.clone()));
        out
    }

    pub fn usize_list_or(&mut self, key: &str, default: &[usize], range: (usize, usize)) -> Vec<usize> {
        let Some(v) = self.take(key) else {
            self.defaults.push(format!("{key} = {default:?}"));
            self.resolve(key, Value::from(default.to_vec()));
            return default.to_vec();
        };
        let parsed: Option<Vec<usize>> = v.as_array().and_then(|a| {
            a.iter().map(|x| x.as_u64().filter(|n| (range.0 as u64..=range.1 as u64).contains(n)).map(|n| n as usize)).collect()
        });
        match parsed {
            Some(list) if !list.is_empty() && list.windows(2).all(|w| w[1] > w[0]) => {
                self.resolve(key, Value::from(list.clone()));
                list
            }
            _ => {
                self.error(format!(
                    "`{key}` must be a strictly increasing list of integers in [{}, {}], got {v}",
                    range.0, range.1
                ));
                default.to_vec()
            }
        }
    }

    /// The `grid` table: `{min, max, points, spacing}` or `{preset, points}`.
    pub fn grid_or(&mut self, default: GridSpec, range: (f64, f64)) -> GridSpec {
        let Some(v) = self.take("grid") else {
            self.defaults.push(format!("grid = {}", default.describe()));
            self.resolve("grid", default.to_value());
            return default;
        };
        let Value::Object(mut g) = v else {
            self.error("`grid` must be a table");
            return default;
        };
        let mut spec = default;
        if let Some(p) = g.remove("preset") {
            let name = p.as_str().unwrap_or_default().to_string();
            match critprobe_core::metrology::LAMBDA_PRESETS.iter().find(|x| x.0.eq_ignore_ascii_case(&name)) {
                Some(&(_, lo, hi)) => {
                    spec = GridSpec { min: lo, max: hi, points: critprobe_core::metrology::PRESET_POINTS, log: true }
                }
                None => self.error(format!("unknown grid preset {p} (expected I1..I4)")),
            }
            for k in ["min", "max", "spacing"] {
                if g.remove(k).is_some() {
                    self.error(format!("`grid.{k}` cannot be combined with `grid.preset`"));
                }
            }
        } else {
            for k in ["min", "max"] {
                match g.remove(k) {
                    None => self.error(format!("missing required key `grid.{k}`")),
                    Some(v) => {
                        if let Some(x) = self.number(&format!("grid.{k}"), &v) {
                            if k == "min" { spec.min = x } else { spec.max = x }
                        }
                    }
                }
            }
            match g.remove("spacing") {
                None => {}
                Some(Value::String(s)) if s == "log" || s == "linear" => spec.log = s == "log",
                Some(v) => self.error(format!("`grid.spacing` must be \"log\" or \"linear\", got {v}")),
            }
        }
        if let Some(v) = g.remove("points") {
            match v.as_u64() {
                Some(n) if n >= 2 => spec.points = n as usize,
                _ => self.error(format!("`grid.points` must be an integer >= 2, got {v}")),
            }
        }
        for k in g.keys() {
            self.error(format!("unknown key `grid.{k}`"));
        }
        if !(spec.min < spec.max) {
            self.error(format!("grid min {} must be below max {}", spec.min, spec.max));
        } else if spec.min < range.0 || spec.max > range.1 {
            self.error(format!("grid [{}, {}] outside [{}, {}]", spec.min, spec.max, range.0, range.1));
        } else if spec.log && spec.min <= 0.0 {
            self.error("log grid needs min > 0");
        }
        self.resolve("grid", spec.to_value());
        spec
    }

    /// Fails with every collected violation, including unknown keys.
    pub fn finish(&mut self) -> Result<(), CliError> {
        let unknown: Vec<String> =
            self.map.keys().filter(|k| !self.used.contains(*k)).map(|k| format!("unknown key `{k}`")).collect();
        self.errors.extend(unknown);
        if self.errors.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(std::mem::take(&mut self.errors)))
        }
    }

    pub fn defaults(&self) -> &[String] {
        &self.defaults
    }

    pub fn resolved(&self) -> &Map<String, Value> {
        &self.resolved
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl GridSpec {
    pub fn log(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points, log: true }
    }

    pub fn linear(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points, log: false }
    }

    pub fn values(&self) -> critprobe_core::Result<Vec<f64>> {
        if self.log {
            critprobe_core::metrology::log_grid(self.min, self.max, self.points)
        } else {
            critprobe_core::metrology::linear_grid(self.min, self.max, self.points)
        }
    }

    fn describe(&self) -> String {
        format!("{} [{}, {}] x{}", if self.log { "log" } else { "linear" }, self.min, self.max, self.points)
    }

    fn to_value(self) -> Value {
        serde_json::json!({
            "min": self.min,
            "max": self.max,
            "points": self.points,
            "spacing": if self.log { "log" } else { "linear" },
        })
    }
}
