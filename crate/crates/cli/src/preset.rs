use std::f64::consts::PI;
use std::path::PathBuf;

use nodesum_core::RuleId;

use crate::config::{
    ConfigError, Method, OutputConfig, PotentialName, ProblemConfig, RuleRequest, RunConfig, SolverConfig,
};

fn outputs(stem: &str) -> OutputConfig {
    OutputConfig {
        report: PathBuf::from(format!("{stem}-report.json")),
        trace: PathBuf::from(format!("{stem}-trace.csv")),
    }
}

/// Closed-form box with every rule the infinite well supports.
pub fn box_battery() -> RunConfig {
    use RuleId::*;
    let (a, b) = (PI / 2.0, 2.0 * PI / 3.0);
    RunConfig {
        problem: ProblemConfig {
            potential: PotentialName::Box,
            coefficients: Vec::new(),
            halfwidth: None,
            x0: None,
            x1: None,
            n_points: 2001,
        },
        solver: SolverConfig {
            method: Method::Analytic,
            num_states: 2000,
            energy_correction: true,
        },
        verify: vec![
            RuleRequest::new(Node1, 2),
            RuleRequest::new(Node2, 2),
            RuleRequest::new(Node2, 3),
            RuleRequest::new(Ext1, 1),
            RuleRequest::new(Ext2, 1),
            RuleRequest::new(Ext2, 2),
            RuleRequest::new(PairIntegral, 1).at(a).and(b).truncation(400).tolerance(1e-2),
            RuleRequest::new(TwoParticle, 1).at(a).and(b).truncation(400).tolerance(1e-2),
            RuleRequest::new(Combined, 2).truncation(400).tolerance(1e-2),
            RuleRequest::new(GroundTrace, 1).tolerance(1e-3),
            RuleRequest::new(SusyTrace, 2).truncation(400).tolerance(1e-2),
        ],
        output: outputs("box"),
    }
}

/// Closed-form oscillator; the trace rules are expected to diverge.
pub fn oscillator_battery() -> RunConfig {
    use RuleId::*;
    RunConfig {
        problem: ProblemConfig {
            potential: PotentialName::Oscillator,
            coefficients: Vec::new(),
            halfwidth: Some(8.0),
            x0: None,
            x1: None,
            n_points: 2001,
        },
        solver: SolverConfig {
            method: Method::Analytic,
            num_states: 800,
            energy_correction: true,
        },
        verify: vec![
            RuleRequest::new(Node1, 2),
            RuleRequest::new(Node2, 2).truncation(60).tolerance(1e-3),
            RuleRequest::new(Ext1, 1),
            RuleRequest::new(Ext2, 1).truncation(400).tolerance(1e-3),
            RuleRequest::new(GroundTrace, 1),
            RuleRequest::new(SusyTrace, 1),
        ],
        output: outputs("oscillator"),
    }
}

/// Named preset batteries; `paper` runs both closed-form batteries.
pub fn preset(name: &str) -> Result<Vec<RunConfig>, ConfigError> {
    match name {
        "paper" => Ok(vec![box_battery(), oscillator_battery()]),
        "box" => Ok(vec![box_battery()]),
        "oscillator" => Ok(vec![oscillator_battery()]),
        other => Err(ConfigError::UnknownPreset(other.to_string())),
    }
}
