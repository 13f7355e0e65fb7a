use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use nodesum_core::eigensolver::{analytic_spectrum, solve_numeric_with};
use nodesum_core::sumrules::{self, PartialValue};
use nodesum_core::susy::trace_identity;
use nodesum_core::waveanalysis::{find_extrema, find_nodes, last_node};
use nodesum_core::{ConvergenceClass, RuleId, SolverOptions, Spectrum, SumRuleReport};

use crate::config::{ConfigError, Method, RuleRequest, RunConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("solver failed: {0}")]
    Solve(nodesum_core::Error),
    #[error("cannot build worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("sweep needs at least two strictly increasing values")]
    SweepValues,
}

/// Batch-wide knobs that sit outside the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses rayon's default.
    pub workers: Option<usize>,
    /// Overrides every default tolerance; per-rule values still win.
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSummary {
    pub potential: String,
    pub method: Method,
    pub x0: f64,
    pub x1: f64,
    pub n_points: usize,
    pub num_states: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleRecord {
    pub rule_id: String,
    pub n: usize,
    pub location: Option<f64>,
    pub location2: Option<f64>,
    #[serde(rename = "J_schedule")]
    pub j_schedule: Vec<f64>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub abs_err: Option<f64>,
    pub rel_err: Option<f64>,
    pub convergence_class: Option<ConvergenceClass>,
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub divergent: bool,
    pub diagnostics: BTreeMap<String, f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub problem: ProblemSummary,
    pub rules: Vec<RuleRecord>,
    /// Every rule that is not divergent passed.
    pub success: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

/// A rule result together with its partial sums, for the trace file.
#[derive(Debug, Clone)]
pub struct Evaluated {
    pub record: RuleRecord,
    pub partials: Vec<PartialValue>,
}

pub struct RunOutput {
    pub report: Report,
    pub trace_csv: String,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn build_spectrum(config: &RunConfig) -> Result<Spectrum, RunError> {
    let potential = config.potential()?;
    let grid = config.grid()?;
    let s = &config.solver;
    match s.method {
        Method::Numeric => solve_numeric_with(
            &potential,
            &grid,
            s.num_states,
            SolverOptions {
                energy_correction: s.energy_correction,
            },
        ),
        Method::Analytic => analytic_spectrum(&potential, &grid, s.num_states),
    }
    .map_err(RunError::Solve)
}

fn default_node(spectrum: &Spectrum, n: usize) -> nodesum_core::Result<f64> {
    let nodes = find_nodes(spectrum.state(n)?)?;
    nodes
        .last()
        .map(|p| p.location)
        .ok_or_else(|| nodesum_core::Error::InvalidArgument(format!("state {n} has no interior node")))
}

fn default_extremum(spectrum: &Spectrum, n: usize) -> nodesum_core::Result<f64> {
    let extrema = find_extrema(spectrum.state(n)?)?;
    extrema
        .last()
        .map(|p| p.location)
        .ok_or_else(|| nodesum_core::Error::InvalidArgument(format!("state {n} has no extremum")))
}

/// Two points beyond the outermost node, at 1/2 and 2/3 of the way to `x1`.
fn default_pair(spectrum: &Spectrum, n: usize) -> nodesum_core::Result<(f64, f64)> {
    let wall = last_node(spectrum.state(n)?)?;
    let span = spectrum.grid.x1 - wall;
    Ok((wall + span / 2.0, wall + 2.0 * span / 3.0))
}

fn dispatch(spectrum: &Spectrum, rule: RuleId, req: &RuleRequest) -> nodesum_core::Result<SumRuleReport> {
    let n = req.n;
    let j = req.truncation.unwrap_or_else(|| spectrum.max_truncation());
    let pair = || -> nodesum_core::Result<(f64, f64)> {
        let (a, b) = default_pair(spectrum, n)?;
        Ok((req.location.unwrap_or(a), req.location2.unwrap_or(b)))
    };
    match rule {
        RuleId::Node1 => {
            let r = req.location.map_or_else(|| default_node(spectrum, n), Ok)?;
            sumrules::node_rule_linear(spectrum, n, r, j)
        }
        RuleId::Node2 => {
            let r = req.location.map_or_else(|| default_node(spectrum, n), Ok)?;
            sumrules::node_rule_quadratic(spectrum, n, r, j)
        }
        RuleId::Ext1 => {
            let r = req.location.map_or_else(|| default_extremum(spectrum, n), Ok)?;
            let schedule = req.abel.clone().unwrap_or_default();
            sumrules::extremum_rule_linear(spectrum, n, r, &schedule)
        }
        RuleId::Ext2 => {
            let r = req.location.map_or_else(|| default_extremum(spectrum, n), Ok)?;
            sumrules::extremum_rule_quadratic(spectrum, n, r, j)
        }
        RuleId::PairIntegral => {
            let (a, b) = pair()?;
            sumrules::pair_integral_rule(spectrum, n, a, b, j)
        }
        RuleId::TwoParticle => {
            let (a, b) = pair()?;
            sumrules::two_particle_rule(spectrum, n, a, b, j)
        }
        RuleId::Combined => sumrules::combined_rule(spectrum, n, j),
        RuleId::GroundTrace => sumrules::groundstate_rule(spectrum, j),
        RuleId::SusyTrace => trace_identity(spectrum, n, j),
    }
}

/// Runs one request against `spectrum`. Failures are folded into the
/// record with the error text.
pub fn evaluate(spectrum: &Spectrum, req: &RuleRequest, global_tolerance: Option<f64>) -> Evaluated {
    let rule = match req.rule_id() {
        Ok(r) => r,
        Err(e) => return failed(req, e.to_string()),
    };
    match dispatch(spectrum, rule, req) {
        Ok(report) => {
            let report = match req.tolerance.or(global_tolerance) {
                Some(t) => report.with_tolerance(t),
                None => report,
            };
            Evaluated {
                record: record_of(&report),
                partials: report.lhs_partials,
            }
        }
        Err(e) => failed(req, format!("{rule} n={}: {e}", req.n)),
    }
}

fn failed(req: &RuleRequest, error: String) -> Evaluated {
    Evaluated {
        record: RuleRecord {
            rule_id: req.rule.clone(),
            n: req.n,
            location: req.location,
            location2: req.location2,
            j_schedule: Vec::new(),
            lhs: None,
            rhs: None,
            abs_err: None,
            rel_err: None,
            convergence_class: None,
            tolerance: req.tolerance,
            pass: false,
            divergent: false,
            diagnostics: BTreeMap::new(),
            error: Some(error),
        },
        partials: Vec::new(),
    }
}

fn record_of(r: &SumRuleReport) -> RuleRecord {
    RuleRecord {
        rule_id: r.rule_id.name().to_string(),
        n: r.n,
        location: r.location,
        location2: r.location2,
        j_schedule: r.lhs_partials.iter().map(|p| p.at).collect(),
        lhs: r.lhs_value.and_then(finite),
        rhs: finite(r.rhs_value),
        abs_err: r.abs_err.and_then(finite),
        rel_err: r.rel_err.and_then(finite),
        convergence_class: Some(r.convergence_class),
        tolerance: Some(r.tolerance),
        pass: r.passed,
        divergent: r.is_divergent(),
        diagnostics: r
            .diagnostics
            .iter()
            .filter(|(_, v)| v.is_finite())
            .map(|(k, v)| (k.clone(), *v))
            .collect(),
        error: None,
    }
}

pub(crate) fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool, RunError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = workers {
        builder = builder.num_threads(k.max(1));
    }
    Ok(builder.build()?)
}

pub fn summarize(config: &RunConfig, spectrum: &Spectrum) -> ProblemSummary {
    ProblemSummary {
        potential: format!("{:?}", config.problem.potential).to_lowercase(),
        method: config.solver.method,
        x0: spectrum.grid.x0,
        x1: spectrum.grid.x1,
        n_points: spectrum.grid.n_points,
        num_states: spectrum.count(),
    }
}

/// Solves the problem and evaluates every requested rule, in parallel but
/// reported in declaration order.
pub fn run(config: &RunConfig, options: &RunOptions) -> Result<RunOutput, RunError> {
    config.validate()?;
    let spectrum = build_spectrum(config)?;
    let evaluated: Vec<Evaluated> = pool(options.workers)?.install(|| {
        config
            .verify
            .par_iter()
            .map(|req| evaluate(&spectrum, req, options.tolerance))
            .collect()
    });
    let success = evaluated.iter().all(|e| e.record.divergent || e.record.pass);
    let trace_csv = trace_csv(&evaluated);
    Ok(RunOutput {
        report: Report {
            problem: summarize(config, &spectrum),
            rules: evaluated.into_iter().map(|e| e.record).collect(),
            success,
        },
        trace_csv,
    })
}

pub fn trace_csv(evaluated: &[Evaluated]) -> String {
    let mut out = String::from("rule_id,J_or_epsilon,partial_value\n");
    for e in evaluated {
        for p in &e.partials {
            let _ = writeln!(out, "{},{},{}", e.record.rule_id, p.at, p.value);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    fn config(potential: &str, rules: &str) -> RunConfig {
        let (n_points, states) = if potential == "box" { (2001, 2000) } else { (2001, 400) };
        RunConfig::from_toml(&format!(
            "[problem]\npotential = \"{potential}\"\nn_points = {n_points}\n\n[solver]\nmethod = \"analytic\"\nnum_states = {states}\n\n{rules}"
        ))
        .unwrap()
    }

    #[test]
    fn box_battery_passes() {
        let c = config(
            "box",
            "[[verify]]\nrule = \"Node2\"\nn = 2\n\n[[verify]]\nrule = \"Ext2\"\nn = 1\n\n[[verify]]\nrule = \"GroundTrace\"\ntolerance = 1e-3\n",
        );
        let out = run(&c, &RunOptions::default()).unwrap();
        assert!(out.report.success, "{}", out.report.to_json());
        let g = &out.report.rules[2];
        assert!((g.lhs.unwrap() + 0.75).abs() < 1e-3 && (g.rhs.unwrap() + 0.75).abs() < 1e-3);
        assert!(out.trace_csv.starts_with("rule_id,J_or_epsilon,partial_value\nNode2,"));
    }

    #[test]
    fn oscillator_ground_trace_is_divergent_but_succeeds() {
        let c = config("oscillator", "[[verify]]\nrule = \"GroundTrace\"\n");
        let out = run(&c, &RunOptions { workers: Some(2), tolerance: None }).unwrap();
        let r = &out.report.rules[0];
        assert!(r.divergent && !r.pass && r.lhs.is_none());
        assert!(out.report.success);
    }

    #[test]
    fn rule_errors_are_reported_in_context() {
        let c = config("box", "[[verify]]\nrule = \"Node1\"\nn = 1\n");
        let out = run(&c, &RunOptions::default()).unwrap();
        let r = &out.report.rules[0];
        assert!(r.error.as_deref().unwrap().starts_with("Node1 n=1"));
        assert!(!out.report.success);
    }

    #[test]
    fn report_round_trips_byte_identical() {
        let c = config("box", "[[verify]]\nrule = \"Ext1\"\nn = 1\n\n[[verify]]\nrule = \"PairIntegral\"\n");
        let first = run(&c, &RunOptions::default()).unwrap().report.to_json();
        let parsed: Report = serde_json::from_str(&first).unwrap();
        assert_eq!(parsed.to_json(), first);
        for k in [1, 3] {
            let again = run(&c, &RunOptions { workers: Some(k), tolerance: None }).unwrap().report.to_json();
            assert_eq!(again, first);
        }
    }
}
