//! Rules evaluated at a single node or extremum of `psi_n`.

use crate::eigensolver::{BoundState, Spectrum};
use crate::error::{Error, Result};
use crate::summation::ConvergenceClass;
use crate::waveanalysis::{partial_overlap, NODE_TOL};

use super::abel::{abel_sum, AbelSchedule, AbelTerm};
use super::{truncated_series, PartialValue, RuleId, SumRuleReport};

fn check_node(state: &BoundState, r0: f64) -> Result<()> {
    let (v, _) = state.eval(r0)?;
    if v.abs() > NODE_TOL * state.max_abs() {
        return Err(Error::NotANode {
            n: state.index,
            location: r0,
            value: v.abs(),
        });
    }
    Ok(())
}

fn check_extremum(state: &BoundState, r1: f64) -> Result<()> {
    let (_, d) = state.eval(r1)?;
    let peak = state.derivative_values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if d.abs() > NODE_TOL * peak {
        return Err(Error::NotAnExtremum {
            n: state.index,
            location: r1,
            value: d.abs(),
        });
    }
    Ok(())
}

/// `int_{x0}^{r} psi^2 * int_{r}^{x1} psi^2`.
fn split_mass_product(state: &BoundState, r: f64) -> Result<f64> {
    let g = &state.grid;
    Ok(partial_overlap(state, state, g.x0, r)? * partial_overlap(state, state, r, g.x1)?)
}

struct PointData {
    values: Vec<(f64, f64)>,
    energies: Vec<f64>,
    energy_n: f64,
}

fn point_data(spectrum: &Spectrum, n: usize, r: f64, truncation: usize) -> Result<PointData> {
    spectrum.check_truncation(truncation)?;
    let energy_n = spectrum.energy(n)?;
    Ok(PointData {
        values: spectrum.values_at(r, truncation)?,
        energies: spectrum.states[..truncation].iter().map(|s| s.energy).collect(),
        energy_n,
    })
}

/// `sum_{j != n} psi_j^2(R0) / (E_n - E_j)` against 0.
pub fn node_rule_linear(spectrum: &Spectrum, n: usize, r0: f64, truncation: usize) -> Result<SumRuleReport> {
    let psi = spectrum.state(n)?;
    check_node(psi, r0)?;
    let d = point_data(spectrum, n, r0, truncation)?;
    let (partials, tail) = truncated_series(truncation, |j| {
        if j == n {
            0.0
        } else {
            d.values[j - 1].0.powi(2) / (d.energy_n - d.energies[j - 1])
        }
    });
    Ok(SumRuleReport::new(RuleId::Node1, n, 0.0)
        .at(r0)
        .with_series(&partials, tail)
        .settle(spectrum.is_analytic()))
}

/// `sum_{j != n} psi_j^2(R0) / (E_n - E_j)^2` against
/// `int_{x0}^{R0} psi_n^2 int_{R0}^{x1} psi_n^2 / psi_n'(R0)^2`.
pub fn node_rule_quadratic(spectrum: &Spectrum, n: usize, r0: f64, truncation: usize) -> Result<SumRuleReport> {
    let psi = spectrum.state(n)?;
    check_node(psi, r0)?;
    let slope = psi.eval(r0)?.1;
    let rhs = split_mass_product(psi, r0)? / (slope * slope);
    let d = point_data(spectrum, n, r0, truncation)?;
    let (partials, tail) = truncated_series(truncation, |j| {
        if j == n {
            0.0
        } else {
            d.values[j - 1].0.powi(2) / (d.energy_n - d.energies[j - 1]).powi(2)
        }
    });
    Ok(SumRuleReport::new(RuleId::Node2, n, rhs)
        .at(r0)
        .with_series(&partials, tail)
        .settle(spectrum.is_analytic()))
}

/// Abel sum of `psi_j'^2(R1) / (E_n - E_j) + psi_j^2(R1)` over `j != n`
/// against `-psi_n^2(R1)`. The two parts are combined per term; summed
/// separately each diverges.
pub fn extremum_rule_linear(
    spectrum: &Spectrum,
    n: usize,
    r1: f64,
    schedule: &AbelSchedule,
) -> Result<SumRuleReport> {
    let psi = spectrum.state(n)?;
    check_extremum(psi, r1)?;
    let value_n = psi.eval(r1)?.0;
    let rhs = -value_n * value_n;
    let truncation = spectrum.max_truncation();
    let d = point_data(spectrum, n, r1, truncation)?;
    let terms: Vec<AbelTerm> = (1..=truncation)
        .filter(|&j| j != n)
        .map(|j| {
            let (v, dv) = d.values[j - 1];
            let gap = d.energies[j - 1] - d.energy_n;
            AbelTerm {
                gap,
                value: dv * dv / (-gap) + v * v,
            }
        })
        .collect();
    let outcome = abel_sum(&terms, schedule)?;
    let mut report = SumRuleReport::new(RuleId::Ext1, n, rhs).at(r1);
    report.lhs_partials = outcome
        .table
        .iter()
        .map(|&(eps, v)| PartialValue { at: eps, value: v })
        .collect();
    report.regularization = Some(schedule.clone());
    report = report
        .diagnostic("order_spread", outcome.order_spread)
        .diagnostic("truncation", truncation as f64);
    for (k, v) in outcome.orders.iter().enumerate() {
        report = report.diagnostic(&format!("extrapolant_order_{}", k + 1), *v);
    }
    if outcome.divergent {
        report.convergence_class = ConvergenceClass::Divergent;
    } else {
        report.convergence_class = ConvergenceClass::ConditionalAbel;
        report.lhs_value = Some(outcome.value);
    }
    Ok(report.settle(spectrum.is_analytic()))
}

/// `sum_{j != n} psi_j'^2(R1) / (E_n - E_j)^2` against
/// `int_{x0}^{R1} psi_n^2 int_{R1}^{x1} psi_n^2 / psi_n^2(R1)`.
pub fn extremum_rule_quadratic(
    spectrum: &Spectrum,
    n: usize,
    r1: f64,
    truncation: usize,
) -> Result<SumRuleReport> {
    let psi = spectrum.state(n)?;
    check_extremum(psi, r1)?;
    let value_n = psi.eval(r1)?.0;
    let rhs = split_mass_product(psi, r1)? / (value_n * value_n);
    let d = point_data(spectrum, n, r1, truncation)?;
    let (partials, tail) = truncated_series(truncation, |j| {
        if j == n {
            0.0
        } else {
            d.values[j - 1].1.powi(2) / (d.energy_n - d.energies[j - 1]).powi(2)
        }
    });
    Ok(SumRuleReport::new(RuleId::Ext2, n, rhs)
        .at(r1)
        .with_series(&partials, tail)
        .settle(spectrum.is_analytic()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::analytic_box_spectrum;
    use crate::grid::build_grid;
    use std::f64::consts::PI;

    fn box_spec(count: usize) -> Spectrum {
        analytic_box_spectrum(&build_grid(0.0, PI, 2001).unwrap(), count).unwrap()
    }

    #[test]
    fn node_rules_box_second_state() {
        let s = box_spec(400);
        let r1 = node_rule_linear(&s, 2, PI / 2.0, 400).unwrap();
        assert!(r1.lhs_value.unwrap().abs() < 5e-3);
        let r2 = node_rule_quadratic(&s, 2, PI / 2.0, 400).unwrap();
        // normalized states: (2/pi) * pi^2/64
        assert!((r2.rhs_value - PI / 32.0).abs() < 1e-12);
        assert!(r2.rel_err.unwrap() < 1e-6, "{:?}", r2);
    }

    #[test]
    fn off_node_is_rejected() {
        let s = box_spec(10);
        assert!(matches!(
            node_rule_linear(&s, 2, 1.0, 10),
            Err(Error::NotANode { .. })
        ));
        assert!(matches!(
            extremum_rule_quadratic(&s, 1, 1.0, 10),
            Err(Error::NotAnExtremum { .. })
        ));
    }

    #[test]
    fn two_state_spectrum_keeps_one_term() {
        let s = box_spec(2);
        let r = node_rule_linear(&s, 2, PI / 2.0, 2).unwrap();
        // only j = 1 remains
        assert!((r.lhs_value.unwrap() - (2.0 / PI) / 3.0).abs() < 1e-14);
    }

    #[test]
    fn extremum_rules_box_ground_state() {
        let s = box_spec(400);
        let lin = extremum_rule_linear(&s, 1, PI / 2.0, &AbelSchedule::default()).unwrap();
        assert!((lin.rhs_value + 2.0 / PI).abs() < 1e-14);
        assert!(lin.rel_err.unwrap() < 1e-2, "{lin:?}");
        let quad = extremum_rule_quadratic(&s, 1, PI / 2.0, 400).unwrap();
        assert!((quad.rhs_value - PI / 8.0).abs() < 1e-12);
        assert!(quad.rel_err.unwrap() < 1e-5, "{quad:?}");
    }
}
