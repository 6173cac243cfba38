//! Experiment configuration: a flat set of keys accepted either as JSON
//! or as `key = value` lines.
//!
//! ```text
//! # comments start with '#'
//! problem = p2
//! mode = accel
//! x0 = 3, 1
//! t_end = 100
//! r = 3
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::flow::AccelScheme;
use crate::problems::{builtin, Problem};
use crate::scaling::ScalingRule;

/// Every accepted key, in serialization order.
pub const KEYS: [&str; 15] = [
    "problem",
    "mode",
    "scaling",
    "x0",
    "t_end",
    "dt",
    "r",
    "theta",
    "scheme",
    "iters",
    "safety",
    "record_every",
    "seed",
    "out",
    "summary",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    /// First-order flow.
    #[default]
    Flow,
    Accel,
    Discrete,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Flow => "flow",
            Mode::Accel => "accel",
            Mode::Discrete => "discrete",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "flow" | "run" => Ok(Mode::Flow),
            "accel" => Ok(Mode::Accel),
            "discrete" => Ok(Mode::Discrete),
            other => Err(Error::OutOfRange {
                key: "mode".into(),
                reason: format!("unknown mode `{other}` (expected flow, accel or discrete)"),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub problem: String,
    pub mode: Mode,
    pub scaling: ScalingRule<f64>,
    /// Start point; the problem's first shipped start point when absent.
    pub x0: Option<Vec<f64>>,
    pub t_end: f64,
    pub dt: f64,
    pub r: f64,
    pub theta: f64,
    pub scheme: AccelScheme,
    pub iters: usize,
    pub safety: f64,
    pub record_every: usize,
    pub seed: u64,
    /// Trajectory or iterate CSV.
    pub out: Option<String>,
    /// Summary JSON.
    pub summary: Option<String>,
}

impl ExperimentConfig {
    /// Defaults for everything but the problem.
    pub fn new(problem: impl Into<String>) -> Self {
        Self {
            problem: problem.into(),
            mode: Mode::Flow,
            scaling: ScalingRule::unit(),
            x0: None,
            t_end: 10.0,
            dt: 1e-3,
            r: 3.0,
            theta: 1.0,
            scheme: AccelScheme::Rk4,
            iters: 1000,
            safety: 0.99,
            record_every: 10,
            seed: 0,
            out: None,
            summary: None,
        }
    }

    /// Sets one key from its textual form, as used by config files and
    /// command-line overrides.
    pub fn set(&mut self, key: &str, text: &str) -> Result<()> {
        self.assign(key, Raw::Text(text.trim()))
    }

    fn assign(&mut self, key: &str, raw: Raw<'_>) -> Result<()> {
        match key {
            "problem" => self.problem = raw.string(key)?,
            "mode" => self.mode = raw.string(key)?.parse()?,
            "scaling" => self.scaling = raw.string(key)?.parse()?,
            "x0" => self.x0 = Some(raw.list(key)?),
            "t_end" => self.t_end = raw.number(key)?,
            "dt" => self.dt = raw.number(key)?,
            "r" => self.r = raw.number(key)?,
            "theta" => self.theta = raw.number(key)?,
            "scheme" => self.scheme = raw.string(key)?.parse()?,
            "iters" => self.iters = raw.count(key)? as usize,
            "safety" => self.safety = raw.number(key)?,
            "record_every" => self.record_every = raw.count(key)? as usize,
            "seed" => self.seed = raw.count(key)?,
            "out" => self.out = Some(raw.string(key)?),
            "summary" => self.summary = Some(raw.string(key)?),
            other => return Err(Error::UnknownKey(other.into())),
        }
        Ok(())
    }

    /// Range checks that need no problem data, then the problem-dependent
    /// ones.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: &str| {
            Err(Error::OutOfRange {
                key: key.into(),
                reason: reason.into(),
            })
        };
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return bad("t_end", "must be positive and finite");
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad("dt", "must be positive and finite");
        }
        if !(self.r >= 3.0) || !self.r.is_finite() {
            return bad("r", "must be >= 3");
        }
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            return bad("theta", "must be positive (t0 = 0)");
        }
        if self.iters == 0 {
            return bad("iters", "must be >= 1");
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return bad("safety", "must lie in (0, 1]");
        }
        if self.record_every == 0 {
            return bad("record_every", "must be >= 1");
        }
        let p = self.problem()?;
        if let Some(x0) = &self.x0 {
            if x0.len() != p.dim {
                return bad(
                    "x0",
                    &format!("{} has dimension {}, got {}", p.name, p.dim, x0.len()),
                );
            }
            if x0.iter().any(|v| !v.is_finite()) {
                return bad("x0", "must be finite");
            }
            if !p.region.contains(x0) {
                return bad("x0", &format!("lies outside the region of {}", p.name));
            }
        }
        if let ScalingRule::Constant(v) = &self.scaling {
            if v.len() != 1 && v.len() != p.objectives {
                return bad(
                    "scaling",
                    &format!(
                        "{} has {} objectives, got {} values",
                        p.name,
                        p.objectives,
                        v.len()
                    ),
                );
            }
        }
        if self.mode == Mode::Accel && !self.scaling.is_constant() {
            return bad(
                "scaling",
                "accelerated mode supports constant scalings only",
            );
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<Problem<f64>> {
        if self.problem.is_empty() {
            return Err(Error::Config("missing required key `problem`".into()));
        }
        builtin(&self.problem).ok_or_else(|| Error::OutOfRange {
            key: "problem".into(),
            reason: format!(
                "unknown problem `{}` (expected p1, p2, p3 or p4)",
                self.problem
            ),
        })
    }

    /// The configured start point, or the problem's first shipped one.
    pub fn start(&self) -> Result<Vec<f64>> {
        match &self.x0 {
            Some(x) => Ok(x.clone()),
            None => Ok(self.problem()?.start_points[0].clone()),
        }
    }

    fn entries(&self) -> Vec<(&'static str, Value)> {
        let mut out = vec![
            ("problem", Value::from(self.problem.clone())),
            ("mode", Value::from(self.mode.name())),
            ("scaling", Value::from(self.scaling.to_string())),
        ];
        if let Some(x0) = &self.x0 {
            out.push(("x0", Value::from(x0.clone())));
        }
        out.extend([
            ("t_end", Value::from(self.t_end)),
            ("dt", Value::from(self.dt)),
            ("r", Value::from(self.r)),
            ("theta", Value::from(self.theta)),
            ("scheme", Value::from(self.scheme.to_string())),
            ("iters", Value::from(self.iters)),
            ("safety", Value::from(self.safety)),
            ("record_every", Value::from(self.record_every)),
            ("seed", Value::from(self.seed)),
        ]);
        if let Some(out_path) = &self.out {
            out.push(("out", Value::from(out_path.clone())));
        }
        if let Some(s) = &self.summary {
            out.push(("summary", Value::from(s.clone())));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let map: Map<String, Value> = self
            .entries()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        serde_json::to_string_pretty(&Value::Object(map)).expect("config serializes")
    }

    /// `key = value` form accepted by [`parse_config`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let text = match v {
                Value::String(t) => t,
                Value::Array(items) => items
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(", "),
                other => other.to_string(),
            };
            let _ = writeln!(s, "{k} = {text}");
        }
        s
    }
}

/// Parses a config in JSON (text starting with `{`) or `key = value` form.
/// Keys absent from the text take their defaults; `problem` is required.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg = parse_unvalidated(text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Like [`parse_config`] but skips range checks, for callers that apply
/// overrides first.
pub fn parse_unvalidated(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new("");
    if text.trim_start().starts_with('{') {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("malformed JSON: {e}")))?;
        let Value::Object(map) = value else {
            return Err(Error::Config("expected a JSON object".into()));
        };
        for (k, v) in &map {
            cfg.assign(k, Raw::Json(v))?;
        }
    } else {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            cfg.set(k.trim(), v)?;
        }
    }
    if cfg.problem.is_empty() {
        return Err(Error::Config("missing required key `problem`".into()));
    }
    Ok(cfg)
}

enum Raw<'a> {
    Text(&'a str),
    Json(&'a Value),
}

impl Raw<'_> {
    fn malformed(key: &str, what: &str) -> Error {
        Error::OutOfRange {
            key: key.into(),
            reason: format!("malformed value: {what}"),
        }
    }

    fn string(&self, key: &str) -> Result<String> {
        match self {
            Raw::Text(t) => Ok(t.trim_matches('"').to_string()),
            Raw::Json(Value::String(s)) => Ok(s.clone()),
            Raw::Json(v) => Err(Self::malformed(key, &format!("expected a string, got {v}"))),
        }
    }

    fn number(&self, key: &str) -> Result<f64> {
        match self {
            Raw::Text(t) => t
                .parse::<f64>()
                .map_err(|_| Self::malformed(key, &format!("`{t}` is not a number"))),
            Raw::Json(Value::Number(n)) => n
                .as_f64()
                .ok_or_else(|| Self::malformed(key, &n.to_string())),
            Raw::Json(v) => Err(Self::malformed(key, &format!("expected a number, got {v}"))),
        }
    }

    fn count(&self, key: &str) -> Result<u64> {
        match self {
            Raw::Text(t) => t
                .parse::<u64>()
                .map_err(|_| Self::malformed(key, &format!("`{t}` is not a nonnegative integer"))),
            Raw::Json(v) => v.as_u64().ok_or_else(|| {
                Self::malformed(key, &format!("expected a nonnegative integer, got {v}"))
            }),
        }
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        match self {
            Raw::Text(t) => {
                let inner = t.trim().trim_start_matches('[').trim_end_matches(']');
                inner
                    .split(',')
                    .map(|s| {
                        let s = s.trim();
                        s.parse::<f64>()
                            .map_err(|_| Self::malformed(key, &format!("`{s}` is not a number")))
                    })
                    .collect()
            }
            Raw::Json(Value::Array(items)) => {
                items.iter().map(|v| Raw::Json(v).number(key)).collect()
            }
            Raw::Json(v) => Err(Self::malformed(key, &format!("expected a list, got {v}"))),
        }
    }
}
