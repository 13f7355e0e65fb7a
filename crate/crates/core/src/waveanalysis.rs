//! Nodes and extrema of a bound state, off-grid evaluation, the second
//! solution at the same energy, and the Wronskian-based overlap identity.

use serde::{Deserialize, Serialize};

use crate::eigensolver::{sign_change_cells, BoundState, Spectrum};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_gauss, integrate, open_midpoint, Scheme};

/// Nodes and extrema are accepted when the refined residual is below this
/// fraction of the state's peak (value or slope respectively).
pub const NODE_TOL: f64 = 1e-10;
const BISECTION_WIDTH: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalKind {
    Node,
    Extremum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub kind: CriticalKind,
    pub location: f64,
    pub owner_index: usize,
    /// Grid samples on either side of the sign change.
    pub bracketing_cells: (usize, usize),
    /// Slope at a node, value at an extremum.
    pub refined_value: f64,
    /// Set on the outermost node.
    pub is_last_node: bool,
}

fn refine<F: Fn(f64) -> Result<f64>>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut f_lo = f(lo)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f(hi)? == 0.0 {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= BISECTION_WIDTH * mid.abs().max(1.0) || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Interior zeros of the state, ascending. Exactly `index - 1` of them.
pub fn find_nodes(state: &BoundState) -> Result<Vec<CriticalPoint>> {
    let n = state.grid.n_points;
    let interior = &state.values[1..n - 1];
    let cells: Vec<(usize, usize)> = sign_change_cells(interior)
        .into_iter()
        .map(|(a, b)| (a + 1, b + 1))
        .collect();
    if cells.len() != state.index - 1 {
        return Err(Error::NodeCountMismatch {
            index: state.index,
            expected: state.index - 1,
            found: cells.len(),
        });
    }
    let count = cells.len();
    cells
        .into_iter()
        .enumerate()
        .map(|(i, (lo, hi))| {
            let g = &state.grid;
            let location = refine(|r| Ok(state.eval(r)?.0), g.point(lo), g.point(hi))?;
            Ok(CriticalPoint {
                kind: CriticalKind::Node,
                location,
                owner_index: state.index,
                bracketing_cells: (lo, hi),
                refined_value: state.eval(location)?.1,
                is_last_node: i + 1 == count,
            })
        })
        .collect()
}

/// Interior zeros of the derivative, ascending. Exactly `index` of them.
pub fn find_extrema(state: &BoundState) -> Result<Vec<CriticalPoint>> {
    let cells = sign_change_cells(&state.derivative_values);
    if cells.len() != state.index {
        return Err(Error::NodeCountMismatch {
            index: state.index,
            expected: state.index,
            found: cells.len(),
        });
    }
    cells
        .into_iter()
        .map(|(lo, hi)| {
            let g = &state.grid;
            let location = refine(|r| Ok(state.eval(r)?.1), g.point(lo), g.point(hi))?;
            Ok(CriticalPoint {
                kind: CriticalKind::Extremum,
                location,
                owner_index: state.index,
                bracketing_cells: (lo, hi),
                refined_value: state.eval(location)?.0,
                is_last_node: false,
            })
        })
        .collect()
}

/// Outermost node, or the lower wall for a nodeless state.
pub fn last_node(state: &BoundState) -> Result<f64> {
    Ok(find_nodes(state)?
        .last()
        .map(|c| c.location)
        .unwrap_or(state.grid.x0))
}

/// Cubic interpolation of the stored samples at `r`.
pub fn interpolate_state(state: &BoundState, r: f64) -> Result<(f64, f64)> {
    state.interpolate(r)
}

/// `psi_A psi_B' - psi_B psi_A'` from `(value, derivative)` pairs.
pub fn wronskian(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.1 - b.0 * a.1
}

/// Checks that `[lo, hi]` stays strictly inside the node-free region
/// `(wall, x1)` of the state.
pub(crate) fn check_node_free(wall: f64, x1: f64, lo: f64, hi: f64) -> Result<()> {
    if lo <= wall {
        return Err(Error::NodeInPath {
            from: lo,
            to: hi,
            node: wall,
        });
    }
    if hi >= x1 {
        return Err(Error::SingularAtWall(x1));
    }
    Ok(())
}

/// `int_a^b dy / psi(y)^2` by the open midpoint rule; `a > b` flips the sign.
pub fn inverse_square_integral(state: &BoundState, a: f64, b: f64) -> Result<f64> {
    let cells = (((b - a).abs() / state.grid.h).ceil() as usize).max(4);
    let probe = |y: f64| match state.eval(y) {
        Ok((v, _)) => 1.0 / (v * v),
        Err(_) => f64::NAN,
    };
    open_midpoint(probe, a, b, cells)
}

/// Second solution `psi(r) int_R^r dy / psi^2` and its derivative
/// `psi'(r) int_R^r dy / psi^2 + 1/psi(r)` at each `r`.
pub fn second_solution_with_derivative(
    state: &BoundState,
    anchor: f64,
    r_eval: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let wall = last_node(state)?;
    let x1 = state.grid.x1;
    let lo = r_eval.iter().copied().fold(anchor, f64::min);
    let hi = r_eval.iter().copied().fold(anchor, f64::max);
    check_node_free(wall, x1, lo, hi)?;
    r_eval
        .iter()
        .map(|&r| {
            let integral = inverse_square_integral(state, anchor, r)?;
            let (v, d) = state.eval(r)?;
            Ok((v * integral, d * integral + 1.0 / v))
        })
        .collect()
}

pub fn second_solution(state: &BoundState, anchor: f64, r_eval: &[f64]) -> Result<Vec<f64>> {
    Ok(second_solution_with_derivative(state, anchor, r_eval)?
        .into_iter()
        .map(|p| p.0)
        .collect())
}

/// Default anchor for the second solution: midway between the outermost
/// node and the upper wall.
pub fn default_anchor(state: &BoundState) -> Result<f64> {
    Ok(0.5 * (last_node(state)? + state.grid.x1))
}

/// `int_{x0}^r psi_j psi_k` against `(psi_k psi_j' - psi_k' psi_j) / (E_k - E_j)`.
pub fn overlap_partial(spectrum: &Spectrum, j: usize, k: usize, r: f64) -> Result<(f64, f64)> {
    let sj = spectrum.state(j)?;
    let sk = spectrum.state(k)?;
    if (sk.energy - sj.energy).abs() < 1e-12 {
        return Err(Error::DegenerateEnergies { j, k });
    }
    spectrum.grid.check_contains(r)?;
    let lhs = partial_overlap(sj, sk, spectrum.grid.x0, r)?;
    let (vj, dj) = sj.eval(r)?;
    let (vk, dk) = sk.eval(r)?;
    let rhs = (vk * dj - dk * vj) / (sk.energy - sj.energy);
    Ok((lhs, rhs))
}

/// `int_a^b psi_j psi_k`: Gauss-Legendre on the closed forms when both
/// states have one, trapezoid on the samples otherwise.
pub fn partial_overlap(sj: &BoundState, sk: &BoundState, a: f64, b: f64) -> Result<f64> {
    if sj.has_closed_form() && sk.has_closed_form() {
        let f = |y: f64| {
            let a = sj.eval(y).map(|p| p.0).unwrap_or(f64::NAN);
            let b = sk.eval(y).map(|p| p.0).unwrap_or(f64::NAN);
            a * b
        };
        let pieces = (((b - a) / (16.0 * sj.grid.h)).ceil() as usize).max(1);
        let width = (b - a) / pieces as f64;
        let mut acc = crate::summation::CompensatedSum::new();
        for i in 0..pieces {
            let lo = a + i as f64 * width;
            let hi = if i + 1 == pieces { b } else { lo + width };
            acc.add(adaptive_gauss(&f, lo, hi, 1e-15));
        }
        return Ok(acc.value());
    }
    let product: Vec<f64> = sj.values.iter().zip(&sk.values).map(|(a, b)| a * b).collect();
    integrate(&sj.grid, &product, a, b, Scheme::Closed)
}
