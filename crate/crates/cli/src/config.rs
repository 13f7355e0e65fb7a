use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use nodesum_core::sumrules::AbelSchedule;
use nodesum_core::{build_grid, Grid, PotentialSpec, RuleId};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid TOML config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid JSON config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown rule id '{0}'")]
    UnknownRule(String),
    #[error("bad problem: {0}")]
    Problem(String),
    #[error("verify entry {index}: {reason}")]
    Request { index: usize, reason: String },
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialName {
    Box,
    Oscillator,
    Polynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub potential: PotentialName,
    /// Ascending powers, polynomial potentials only.
    #[serde(default)]
    pub coefficients: Vec<f64>,
    pub halfwidth: Option<f64>,
    pub x0: Option<f64>,
    pub x1: Option<f64>,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Numeric,
    Analytic,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub method: Method,
    pub num_states: usize,
    #[serde(default = "yes")]
    pub energy_correction: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleRequest {
    pub rule: String,
    #[serde(default = "one")]
    pub n: usize,
    pub location: Option<f64>,
    pub location2: Option<f64>,
    pub truncation: Option<usize>,
    pub abel: Option<AbelSchedule>,
    pub tolerance: Option<f64>,
}

fn one() -> usize {
    1
}

impl RuleRequest {
    pub fn new(rule: RuleId, n: usize) -> Self {
        Self {
            rule: rule.name().to_string(),
            n,
            location: None,
            location2: None,
            truncation: None,
            abel: None,
            tolerance: None,
        }
    }

    pub fn truncation(mut self, j: usize) -> Self {
        self.truncation = Some(j);
        self
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }

    pub fn at(mut self, r: f64) -> Self {
        self.location = Some(r);
        self
    }

    pub fn and(mut self, r: f64) -> Self {
        self.location2 = Some(r);
        self
    }

    pub fn rule_id(&self) -> Result<RuleId, ConfigError> {
        self.rule
            .parse()
            .map_err(|_| ConfigError::UnknownRule(self.rule.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_report")]
    pub report: PathBuf,
    #[serde(default = "default_trace")]
    pub trace: PathBuf,
}

fn default_report() -> PathBuf {
    PathBuf::from("report.json")
}

fn default_trace() -> PathBuf {
    PathBuf::from("trace.csv")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            report: default_report(),
            trace: default_trace(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub solver: SolverConfig,
    #[serde(default)]
    pub verify: Vec<RuleRequest>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    /// Reads TOML, or JSON when the file ends in `.json`.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let config = if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)?
        } else {
            Self::from_toml(&text)?
        };
        Ok(config)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.potential()?;
        self.grid()?;
        if self.solver.num_states == 0 {
            return Err(ConfigError::Problem("num_states must be positive".into()));
        }
        for (index, req) in self.verify.iter().enumerate() {
            req.rule_id()?;
            let bad = |reason: String| ConfigError::Request { index, reason };
            if req.n == 0 || req.n > self.solver.num_states {
                return Err(bad(format!("n = {} outside 1..={}", req.n, self.solver.num_states)));
            }
            if let Some(j) = req.truncation {
                if j == 0 || j > self.solver.num_states {
                    return Err(bad(format!("truncation {j} outside 1..={}", self.solver.num_states)));
                }
            }
            if let Some(schedule) = &req.abel {
                schedule.validate().map_err(|e| bad(e.to_string()))?;
            }
            if let Some(t) = req.tolerance {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(bad(format!("tolerance {t} must be positive")));
                }
            }
        }
        Ok(())
    }

    pub fn potential(&self) -> Result<PotentialSpec, ConfigError> {
        let p = &self.problem;
        let bad = |e: nodesum_core::Error| ConfigError::Problem(e.to_string());
        let hw = p.halfwidth.unwrap_or(nodesum_core::potential::DEFAULT_HALFWIDTH);
        match p.potential {
            PotentialName::Box => Ok(PotentialSpec::particle_in_box()),
            PotentialName::Oscillator => {
                let spec = PotentialSpec::oscillator(hw);
                spec.validate().map_err(bad)?;
                Ok(spec)
            }
            PotentialName::Polynomial => PotentialSpec::polynomial(p.coefficients.clone(), hw).map_err(bad),
        }
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        let p = &self.problem;
        let (d0, d1) = match p.potential {
            PotentialName::Box => (0.0, std::f64::consts::PI),
            _ => {
                let hw = p.halfwidth.unwrap_or(nodesum_core::potential::DEFAULT_HALFWIDTH);
                (-hw, hw)
            }
        };
        build_grid(p.x0.unwrap_or(d0), p.x1.unwrap_or(d1), p.n_points)
            .map_err(|e| ConfigError::Problem(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOX: &str = r#"
[problem]
potential = "box"
n_points = 201

[solver]
method = "analytic"
num_states = 50

[[verify]]
rule = "Node2"
n = 2

[[verify]]
rule = "GroundTrace"
truncation = 40
tolerance = 1e-2
"#;

    #[test]
    fn toml_and_json_agree() {
        let a = RunConfig::from_toml(BOX).unwrap();
        let b = RunConfig::from_json(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.verify[1].n, 1);
        assert!(a.solver.energy_correction);
        assert_eq!(a.output.report, PathBuf::from("report.json"));
    }

    #[test]
    fn unknown_rule_is_rejected() {
        let text = BOX.replace("GroundTrace", "Eq99");
        assert!(matches!(RunConfig::from_toml(&text), Err(ConfigError::UnknownRule(r)) if r == "Eq99"));
    }

    #[test]
    fn bad_domain_and_requests() {
        let text = BOX.replace("n_points = 201", "n_points = 201\nx0 = 2.0\nx1 = 1.0");
        assert!(matches!(RunConfig::from_toml(&text), Err(ConfigError::Problem(_))));
        let text = BOX.replace("n = 2", "n = 99");
        assert!(matches!(RunConfig::from_toml(&text), Err(ConfigError::Request { index: 0, .. })));
        let text = BOX.replace("num_states = 50", "num_states = 50\nextra = 1");
        assert!(matches!(RunConfig::from_toml(&text), Err(ConfigError::Toml(_))));
    }
}
