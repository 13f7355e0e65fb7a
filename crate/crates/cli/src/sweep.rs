use serde::{Deserialize, Serialize};

use nodesum_core::eigensolver::analytic_spectrum;
use nodesum_core::Spectrum;

use crate::config::{Method, PotentialName, RuleRequest, RunConfig};
use crate::run::{build_spectrum, evaluate, RunError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum SweepParameter {
    /// Grid size `n_points`; discrepancy against the closed-form spectrum
    /// on the same grid when one exists, else against the right-hand side.
    GridPoints,
    /// Truncation `J`; discrepancy of the raw partial sum from the
    /// right-hand side.
    Truncation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: usize,
    pub lhs: Option<f64>,
    pub reference: Option<f64>,
    pub discrepancy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rule_id: String,
    pub n: usize,
    pub parameter: SweepParameter,
    pub points: Vec<SweepPoint>,
    /// Least-squares slope of ln(discrepancy) against ln(value).
    pub slope: Option<f64>,
}

pub fn log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let s = sxy / sxx;
    s.is_finite().then_some(s)
}

fn last_partial(spectrum: &Spectrum, req: &RuleRequest) -> Result<(f64, f64), String> {
    let e = evaluate(spectrum, req, None);
    if let Some(err) = e.record.error {
        return Err(err);
    }
    let last = e.partials.last().map(|p| p.value).ok_or("no partial sums")?;
    Ok((last, e.record.rhs.unwrap_or(f64::NAN)))
}

fn point(value: usize, outcome: Result<(f64, f64), String>) -> SweepPoint {
    match outcome {
        Ok((lhs, reference)) => {
            let d = (lhs - reference).abs();
            SweepPoint {
                value,
                lhs: Some(lhs),
                reference: reference.is_finite().then_some(reference),
                discrepancy: (d.is_finite() && d > 0.0).then_some(d),
                error: None,
            }
        }
        Err(error) => SweepPoint {
            value,
            lhs: None,
            reference: None,
            discrepancy: None,
            error: Some(error),
        },
    }
}

fn closed_form(config: &RunConfig) -> bool {
    config.problem.potential != PotentialName::Polynomial
}

fn grid_point(config: &RunConfig, req: &RuleRequest, n_points: usize) -> Result<(f64, f64), String> {
    let mut c = config.clone();
    c.problem.n_points = n_points;
    c.solver.num_states = c.solver.num_states.min(n_points.saturating_sub(2));
    let spectrum = build_spectrum(&c).map_err(|e| e.to_string())?;
    let mut req = req.clone();
    let j = req.truncation.unwrap_or_else(|| spectrum.max_truncation()).min(spectrum.max_truncation());
    req.truncation = Some(j);
    let (lhs, rhs) = last_partial(&spectrum, &req)?;
    if closed_form(&c) && c.solver.method == Method::Numeric {
        let exact = analytic_spectrum(&c.potential().map_err(|e| e.to_string())?, &spectrum.grid, j)
            .map_err(|e| e.to_string())?;
        let (reference, _) = last_partial(&exact, &req)?;
        Ok((lhs, reference))
    } else {
        Ok((lhs, rhs))
    }
}

/// Re-evaluates one rule across increasing parameter values.
pub fn sweep(
    config: &RunConfig,
    req: &RuleRequest,
    parameter: SweepParameter,
    values: &[usize],
    workers: Option<usize>,
) -> Result<SweepResult, RunError> {
    if values.len() < 2 || values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(RunError::SweepValues);
    }
    config.validate()?;
    req.rule_id()?;
    let points: Vec<SweepPoint> = match parameter {
        SweepParameter::GridPoints => {
            use rayon::prelude::*;
            crate::run::pool(workers)?.install(|| {
                values
                    .par_iter()
                    .map(|&v| point(v, grid_point(config, req, v)))
                    .collect()
            })
        }
        SweepParameter::Truncation => {
            let spectrum = build_spectrum(config)?;
            values
                .iter()
                .map(|&j| {
                    let mut r = req.clone();
                    r.truncation = Some(j);
                    point(j, last_partial(&spectrum, &r))
                })
                .collect()
        }
    };
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter_map(|p| p.discrepancy.map(|d| ((p.value as f64).ln(), d.ln())))
        .unzip();
    let slope = if xs.len() == points.len() { log_slope(&xs, &ys) } else { None };
    Ok(SweepResult {
        rule_id: req.rule.clone(),
        n: req.n,
        parameter,
        points,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs: Vec<f64> = [10.0f64, 20.0, 40.0].iter().map(|x| x.ln()).collect();
        let ys: Vec<f64> = [10.0f64, 20.0, 40.0].iter().map(|x| (3.0 * x.powf(-2.0)).ln()).collect();
        assert!((log_slope(&xs, &ys).unwrap() + 2.0).abs() < 1e-12);
        assert_eq!(log_slope(&xs[..1], &ys[..1]), None);
    }
}
