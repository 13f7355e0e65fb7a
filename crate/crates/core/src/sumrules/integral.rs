//! Rules over the region beyond the outermost node of `psi_n`, where
//! `1/psi_n` is regular.

use crate::eigensolver::{BoundState, Spectrum};
use crate::error::{Error, Result};
use crate::quadrature::{open_midpoint, CumulativeIntegral, GaussTable, Sweep};
use crate::summation::ConvergenceClass;
use crate::waveanalysis::{check_node_free, inverse_square_integral, last_node};

use super::{truncated_series, RuleId, SumRuleReport};

fn pair_points(spectrum: &Spectrum, n: usize, r: f64, r2: f64) -> Result<(&BoundState, f64, f64)> {
    let psi = spectrum.state(n)?;
    if r == r2 {
        return Err(Error::CoincidentPoints(r));
    }
    let (lo, hi) = (r.min(r2), r.max(r2));
    check_node_free(last_node(psi)?, spectrum.grid.x1, lo, hi)?;
    Ok((psi, lo, hi))
}

/// `sum_{j != n} (psi_j(r)/psi_n(r) - psi_j(r2)/psi_n(r2))^2 / (E_n - E_j)`
/// against `-int_{r<}^{r>} dy / psi_n^2`.
pub fn pair_integral_rule(spectrum: &Spectrum, n: usize, r: f64, r2: f64, truncation: usize) -> Result<SumRuleReport> {
    let (psi, lo, hi) = pair_points(spectrum, n, r, r2)?;
    spectrum.check_truncation(truncation)?;
    let rhs = -inverse_square_integral(psi, lo, hi)?;
    let a = spectrum.values_at(r, truncation)?;
    let b = spectrum.values_at(r2, truncation)?;
    let e_n = psi.energy;
    let (vn, vn2) = (a[n - 1].0, b[n - 1].0);
    let (partials, tail) = truncated_series(truncation, |j| {
        if j == n {
            return 0.0;
        }
        let diff = a[j - 1].0 / vn - b[j - 1].0 / vn2;
        diff * diff / (e_n - spectrum.states[j - 1].energy)
    });
    Ok(SumRuleReport::new(RuleId::PairIntegral, n, rhs)
        .at(r)
        .and(r2)
        .with_series(&partials, tail)
        .settle(spectrum.is_analytic()))
}

/// Antisymmetric two-fermion amplitude
/// `(psi_n(r1) psi_j(r2) - psi_n(r2) psi_j(r1)) / sqrt(2)`.
pub fn two_particle_density(spectrum: &Spectrum, n: usize, j: usize, r1: f64, r2: f64) -> Result<f64> {
    let (a1, _) = spectrum.state(n)?.eval(r1)?;
    let (a2, _) = spectrum.state(n)?.eval(r2)?;
    let (b1, _) = spectrum.state(j)?.eval(r1)?;
    let (b2, _) = spectrum.state(j)?.eval(r2)?;
    Ok((a1 * b2 - a2 * b1) * std::f64::consts::FRAC_1_SQRT_2)
}

/// `sum_{j != n} Phi_nj^2(r1, r2) / (E_n - E_j)` against
/// `-(1/2) psi_n^2(r1) psi_n^2(r2) int_{r<}^{r>} dy / psi_n^2`.
pub fn two_particle_rule(spectrum: &Spectrum, n: usize, r1: f64, r2: f64, truncation: usize) -> Result<SumRuleReport> {
    let (psi, lo, hi) = pair_points(spectrum, n, r1, r2)?;
    spectrum.check_truncation(truncation)?;
    let a = spectrum.values_at(r1, truncation)?;
    let b = spectrum.values_at(r2, truncation)?;
    let (vn1, vn2) = (a[n - 1].0, b[n - 1].0);
    let rhs = -0.5 * vn1 * vn1 * vn2 * vn2 * inverse_square_integral(psi, lo, hi)?;
    let e_n = psi.energy;
    let (partials, tail) = truncated_series(truncation, |j| {
        if j == n {
            return 0.0;
        }
        let phi = (vn1 * b[j - 1].0 - vn2 * a[j - 1].0) * std::f64::consts::FRAC_1_SQRT_2;
        phi * phi / (e_n - spectrum.states[j - 1].energy)
    });
    Ok(SumRuleReport::new(RuleId::TwoParticle, n, rhs)
        .at(r1)
        .and(r2)
        .with_series(&partials, tail)
        .settle(spectrum.is_analytic()))
}

/// States `1..=truncation` sampled at the nodes of a Gauss table on
/// `[wall, x1]`, state-major.
fn sample_beyond_wall(spectrum: &Spectrum, wall: f64, truncation: usize) -> Result<(GaussTable, Vec<Vec<f64>>)> {
    let grid = &spectrum.grid;
    let top = spectrum.states[truncation - 1].energy.abs() + 1.0;
    let sub = (2.0 * top.sqrt() * grid.h).ceil() as usize;
    let table = GaussTable::on_grid(grid, wall, grid.x1, sub);
    let mut samples = vec![Vec::with_capacity(table.nodes.len()); truncation];
    for &x in &table.nodes {
        for (j, (v, _)) in spectrum.values_at(x, truncation)?.into_iter().enumerate() {
            samples[j].push(v);
        }
    }
    Ok((table, samples))
}

/// Overlaps `A_jk = int_{wall}^{x1} psi_j psi_k` needed by the trace rules:
/// the diagonal `A_jj` and the row `A_nj`, for `j = 1..=truncation`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapRows {
    pub wall: f64,
    pub diagonal: Vec<f64>,
    pub row: Vec<f64>,
}

impl OverlapRows {
    pub fn compute(spectrum: &Spectrum, n: usize, truncation: usize) -> Result<Self> {
        let psi = spectrum.state(n)?;
        spectrum.check_truncation(truncation)?;
        if n > truncation {
            return Err(Error::InsufficientStates {
                requested: n,
                available: truncation,
            });
        }
        let wall = last_node(psi)?;
        let (table, samples) = sample_beyond_wall(spectrum, wall, truncation)?;
        let diagonal = samples.iter().map(|s| table.inner(s, s)).collect();
        let row = samples.iter().map(|s| table.inner(&samples[n - 1], s)).collect();
        Ok(Self { wall, diagonal, row })
    }
}

/// `A_jk = int_{R~0}^{x1} psi_j psi_k` for `j, k = 1..=truncation`, with
/// `R~0` the outermost node of `psi_n`.
pub fn overlap_matrix(spectrum: &Spectrum, n: usize, truncation: usize) -> Result<Vec<Vec<f64>>> {
    let psi = spectrum.state(n)?;
    spectrum.check_truncation(truncation)?;
    let wall = last_node(psi)?;
    let (table, samples) = sample_beyond_wall(spectrum, wall, truncation)?;
    let mut a = vec![vec![0.0; truncation]; truncation];
    for j in 0..truncation {
        for k in j..truncation {
            let v = table.inner(&samples[j], &samples[k]);
            a[j][k] = v;
            a[k][j] = v;
        }
    }
    Ok(a)
}

const MAX_CUMULATIVE_CELLS: usize = 2048;
const OUTER_CELLS: usize = 64;

pub(crate) fn density_beyond<'a>(state: &'a BoundState, wall: f64) -> CumulativeIntegral<impl Fn(f64) -> f64 + 'a> {
    let g = &state.grid;
    let cells = (((g.x1 - wall) / g.h).ceil() as usize).clamp(16, MAX_CUMULATIVE_CELLS);
    let density = move |y: f64| state.eval(y).map(|p| p.0 * p.0).unwrap_or(f64::NAN);
    CumulativeIntegral::new(density, wall, g.x1, cells, Sweep::Both)
}

fn inverse_square(state: &BoundState, y: f64) -> f64 {
    match state.eval(y) {
        Ok((v, _)) => 1.0 / (v * v),
        Err(_) => f64::NAN,
    }
}

/// `int_{wall}^{x1} dr/psi^2(r) int_{wall}^r psi^2 int_r^{x1} psi^2`, the
/// integrand composed pointwise (bounded at both ends) before the open rule.
pub fn triple_integral_single(state: &BoundState, wall: f64) -> Result<f64> {
    let cum = density_beyond(state, wall);
    let f = |r: f64| cum.left(r) * cum.right(r) * inverse_square(state, r);
    open_midpoint(f, wall, state.grid.x1, OUTER_CELLS)
}

/// `int_{wall}^{x1} psi^2(r) dr int_r^{x1} dy/psi^2(y) int_y^{x1} psi^2`,
/// evaluated as nested running integrals.
pub fn triple_integral_nested(state: &BoundState, wall: f64) -> Result<f64> {
    let x1 = state.grid.x1;
    let cum = density_beyond(state, wall);
    let inner = |y: f64| cum.right(y) * inverse_square(state, y);
    let cells = (((x1 - wall) / state.grid.h).ceil() as usize).clamp(16, MAX_CUMULATIVE_CELLS);
    let middle = CumulativeIntegral::new(inner, wall, x1, cells, Sweep::RightOnly);
    let f = |r: f64| {
        let v = state.eval(r).map(|p| p.0).unwrap_or(f64::NAN);
        v * v * middle.right(r)
    };
    open_midpoint(f, wall, x1, OUTER_CELLS)
}

/// `A_nn sum_{j != n} A_jj/(E_n - E_j) - psi_n'^2(R~0) sum_{j != n} psi_j^2(R~0)/(E_n - E_j)^3`
/// against minus the triple integral beyond the outermost node. Both
/// orderings of the triple integral are evaluated; the single-reciprocal
/// form is the reported right-hand side.
pub fn combined_rule(spectrum: &Spectrum, n: usize, truncation: usize) -> Result<SumRuleReport> {
    let psi = spectrum.state(n)?;
    let rows = OverlapRows::compute(spectrum, n, truncation)?;
    let wall = rows.wall;
    let at_wall = spectrum.values_at(wall, truncation)?;
    let slope_sq = at_wall[n - 1].1.powi(2);
    let a_nn = rows.diagonal[n - 1];
    let e_n = psi.energy;
    let (partials, tail) = truncated_series(truncation, |j| {
        if j == n {
            return 0.0;
        }
        let d = e_n - spectrum.states[j - 1].energy;
        a_nn * rows.diagonal[j - 1] / d - slope_sq * at_wall[j - 1].0.powi(2) / (d * d * d)
    });
    let single = triple_integral_single(psi, wall)?;
    let nested = triple_integral_nested(psi, wall)?;
    Ok(SumRuleReport::new(RuleId::Combined, n, -single)
        .at(wall)
        .diagnostic("rhs_nested", -nested)
        .diagnostic("rhs_form_gap", (single - nested).abs())
        .diagnostic("a_nn", a_nn)
        .with_series(&partials, tail)
        .settle(spectrum.is_analytic()))
}

/// `sum_{j >= 2} 1/(E_1 - E_j)` against minus the ground-state triple
/// integral over the whole domain. Spectra with linearly growing levels
/// are reported as divergent.
pub fn groundstate_rule(spectrum: &Spectrum, truncation: usize) -> Result<SumRuleReport> {
    let psi = spectrum.state(1)?;
    spectrum.check_truncation(truncation)?;
    let x0 = spectrum.grid.x0;
    let single = triple_integral_single(psi, x0)?;
    let nested = triple_integral_nested(psi, x0)?;
    let report = SumRuleReport::new(RuleId::GroundTrace, 1, -single)
        .diagnostic("rhs_nested", -nested)
        .diagnostic("rhs_form_gap", (single - nested).abs());
    if truncation < 2 {
        let mut r = report;
        r.lhs_value = Some(0.0);
        r.convergence_class = ConvergenceClass::Incomparable;
        return Ok(r.settle(spectrum.is_analytic()));
    }
    let e1 = psi.energy;
    let (partials, tail) = truncated_series(truncation, |j| {
        if j == 1 {
            0.0
        } else {
            1.0 / (e1 - spectrum.states[j - 1].energy)
        }
    });
    Ok(report.with_series(&partials, tail).settle(spectrum.is_analytic()))
}
