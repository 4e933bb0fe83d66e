use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// One row of a measured series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesPoint {
    pub x: f64,
    pub value: f64,
    pub error: f64,
    pub fit_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConstant {
    pub name: String,
    pub value: f64,
    pub error: f64,
    pub method: String,
}

/// A fitted parameter with a 95% interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitParameter {
    pub name: String,
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl FitParameter {
    pub fn new(name: impl Into<String>, value: f64, half_width: f64) -> Self {
        Self {
            name: name.into(),
            value,
            ci_low: value - half_width,
            ci_high: value + half_width,
        }
    }
}

/// A declared tolerance and its outcome. Informational checks never fail
/// the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub passed: bool,
    pub informational: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: format!("<= {limit:e}"),
            passed: value <= limit,
            informational: false,
        }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: format!("in [{lo}, {hi}]"),
            passed: (lo..=hi).contains(&value),
            informational: false,
        }
    }

    pub fn informational(mut self) -> Self {
        self.informational = true;
        self
    }
}

/// Wall-clock data; the only part of a report that varies between runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunStamp {
    pub unix_seconds: u64,
    pub runtime_seconds: f64,
}

impl RunStamp {
    pub fn since(start: std::time::Instant) -> Self {
        Self {
            unix_seconds: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            runtime_seconds: start.elapsed().as_secs_f64(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    /// Every input that produced the numbers below.
    pub config: serde_json::Value,
    pub grid: Vec<f64>,
    pub series: Vec<SeriesPoint>,
    pub target: Option<TargetConstant>,
    pub fits: Vec<FitParameter>,
    pub checks: Vec<Check>,
    /// Experiment-specific tables.
    pub details: serde_json::Value,
    pub passed: bool,
    pub timestamp: RunStamp,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>, config: serde_json::Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.into(),
            config,
            grid: Vec::new(),
            series: Vec::new(),
            target: None,
            fits: Vec::new(),
            checks: Vec::new(),
            details: serde_json::Value::Null,
            passed: false,
            timestamp: RunStamp::default(),
        }
    }

    /// Sets `passed` from the non-informational checks and stamps the time.
    pub fn finish(mut self, start: std::time::Instant) -> Self {
        self.passed = self.checks.iter().filter(|c| !c.informational).all(|c| c.passed);
        self.timestamp = RunStamp::since(start);
        self
    }

    pub fn fit(&self, name: &str) -> Option<&FitParameter> {
        self.fits.iter().find(|f| f.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}
