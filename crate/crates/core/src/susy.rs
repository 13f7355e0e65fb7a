//! The walled potential beyond the outermost node of `psi_n`, its
//! supersymmetric partner and the partner Green's function trace.

use serde::Serialize;

use crate::eigensolver::{box_spectrum_on, solve_numeric, BoundState, Spectrum, NUMERIC_TRUNCATION_FRACTION};
use crate::error::{Error, Result};
use crate::grid::{build_grid, Grid};
use crate::potential::PotentialKind;
use crate::sumrules::integral::density_beyond;
use crate::sumrules::{triple_integral_single, truncated_series, OverlapRows, RuleId, SumRuleReport};
use crate::summation::ConvergenceClass;
use crate::waveanalysis::{last_node, partial_overlap};

const MIN_WALLED_CELLS: usize = 8;

fn has_wall(spectrum: &Spectrum, wall: f64) -> bool {
    wall > spectrum.grid.x0 + 1e-12 * spectrum.grid.h
}

/// Uniform grid on `[wall, x1]` with spacing close to the parent grid's.
pub fn walled_grid(spectrum: &Spectrum, n: usize) -> Result<Grid> {
    let wall = last_node(spectrum.state(n)?)?;
    if !has_wall(spectrum, wall) {
        return Ok(spectrum.grid);
    }
    let g = &spectrum.grid;
    let cells = (((g.x1 - wall) / g.h).round() as usize).max(MIN_WALLED_CELLS);
    build_grid(wall, g.x1, cells + 1)
}

/// Spectrum of `V` restricted to `[R~0, x1]` with Dirichlet ends, `R~0` the
/// outermost node of `psi_n`. A nodeless state gives back `spectrum`.
pub fn walled_spectrum(spectrum: &Spectrum, n: usize, num_states: usize) -> Result<Spectrum> {
    let wall = last_node(spectrum.state(n)?)?;
    if !has_wall(spectrum, wall) {
        return Ok(spectrum.clone());
    }
    let grid = walled_grid(spectrum, n)?;
    if spectrum.is_analytic() && spectrum.potential.kind == PotentialKind::Box {
        return Ok(box_spectrum_on(&grid, num_states));
    }
    let cap = ((NUMERIC_TRUNCATION_FRACTION * (grid.n_points - 2) as f64).floor() as usize).max(1);
    solve_numeric(&spectrum.potential, &grid, num_states.clamp(1, cap))
}

/// `V~_1 = V - 2 d^2/dr^2 ln psi_n`, written as
/// `2 E_n - V + 2 (psi_n'/psi_n)^2` through the eigen-equation. With
/// `-psi'' + V psi = E psi` this is the partner for which `1/psi_n` solves
/// the equation at `E_n` and the walled ground level is removed.
pub fn partner_potential_at(spectrum: &Spectrum, n: usize, r: f64) -> Result<f64> {
    let psi = spectrum.state(n)?;
    let wall = last_node(psi)?;
    if r <= wall || r >= spectrum.grid.x1 {
        return Err(Error::SingularAtWall(r));
    }
    let (v, d) = psi.eval(r)?;
    if v == 0.0 {
        return Err(Error::SingularAtWall(r));
    }
    let ratio = d / v;
    Ok(2.0 * psi.energy - spectrum.potential.value(r) + 2.0 * ratio * ratio)
}

/// `V~_1` on the interior points of [`walled_grid`].
pub fn partner_potential(spectrum: &Spectrum, n: usize) -> Result<Vec<f64>> {
    let grid = walled_grid(spectrum, n)?;
    (1..grid.last())
        .map(|k| partner_potential_at(spectrum, n, grid.point(k)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartnerSolutions {
    pub points: Vec<f64>,
    /// `(1/psi_n) int_{R~0}^r psi_n^2`, vanishing at the wall.
    pub phi1: Vec<f64>,
    /// `(1/psi_n) int_{x1}^r psi_n^2`, vanishing at `x1`.
    pub phi2: Vec<f64>,
    /// Pointwise `phi1 phi2' - phi1' phi2`.
    pub wronskian: Vec<f64>,
    /// `int_{R~0}^{x1} psi_n^2`.
    pub w: f64,
}

/// The two partner solutions at energy `E_n` that vanish at either end of
/// the walled interval.
pub fn partner_solutions(spectrum: &Spectrum, n: usize, r_eval: &[f64]) -> Result<PartnerSolutions> {
    let psi = spectrum.state(n)?;
    let wall = last_node(psi)?;
    let x1 = spectrum.grid.x1;
    let cum = density_beyond(psi, wall);
    let w = cum.total();
    let mut out = PartnerSolutions {
        points: r_eval.to_vec(),
        phi1: Vec::with_capacity(r_eval.len()),
        phi2: Vec::with_capacity(r_eval.len()),
        wronskian: Vec::with_capacity(r_eval.len()),
        w,
    };
    for &r in r_eval {
        if r <= wall || r >= x1 {
            return Err(Error::SingularAtWall(r));
        }
        let (v, d) = psi.eval(r)?;
        let (f1, f2) = (cum.left(r), cum.right(r));
        let phi1 = f1 / v;
        let phi2 = -f2 / v;
        let dphi1 = v - f1 * d / (v * v);
        let dphi2 = v + f2 * d / (v * v);
        out.phi1.push(phi1);
        out.phi2.push(phi2);
        out.wronskian.push(phi1 * dphi2 - dphi1 * phi2);
    }
    Ok(out)
}

/// Walled problem for state `n`.
#[derive(Debug, Clone)]
pub struct PartnerProblem {
    pub base_n: usize,
    pub wall: f64,
    pub walled_spectrum: Spectrum,
    /// `psi_n / sqrt(W)` sampled on the walled grid.
    pub renormalized_psi_n: BoundState,
    /// `V~_1` on the walled grid's interior points.
    pub partner_potential_values: Vec<f64>,
    pub wronskian_w: f64,
}

impl PartnerProblem {
    pub fn build(spectrum: &Spectrum, n: usize, num_states: usize) -> Result<Self> {
        let psi = spectrum.state(n)?;
        let wall = last_node(psi)?;
        let x1 = spectrum.grid.x1;
        let walled = walled_spectrum(spectrum, n, num_states)?;
        let w = partial_overlap(psi, psi, wall, x1)?;
        let grid = walled.grid;
        let scale = 1.0 / w.sqrt();
        let last = grid.last();
        let mut values = Vec::with_capacity(grid.n_points);
        let mut derivative_values = Vec::with_capacity(grid.n_points);
        for k in 0..=last {
            let (v, d) = psi.eval(grid.point(k))?;
            let v = if k == 0 || k == last { 0.0 } else { v };
            values.push(v * scale);
            derivative_values.push(d * scale);
        }
        let renormalized_psi_n = BoundState {
            index: 1,
            energy: psi.energy,
            discrete_energy: None,
            grid,
            values,
            derivative_values,
            source: psi.source,
            closed_form: None,
        };
        let partner_potential_values = if has_wall(spectrum, wall) || n == 1 {
            (1..last)
                .map(|k| partner_potential_at(spectrum, n, grid.point(k)))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(Self {
            base_n: n,
            wall,
            walled_spectrum: walled,
            renormalized_psi_n,
            partner_potential_values,
            wronskian_w: w,
        })
    }

    /// `|E~_1 - E_n| / |E_n|`.
    pub fn ground_mismatch(&self) -> f64 {
        let e_n = self.renormalized_psi_n.energy;
        (self.walled_spectrum.states[0].energy - e_n).abs() / e_n.abs().max(f64::MIN_POSITIVE)
    }
}

/// Partner Green's function `G~_1(r, r~) = phi1(r<) phi2(r>) / W`.
pub fn partner_green(spectrum: &Spectrum, n: usize, r: f64, rt: f64) -> Result<f64> {
    let (lo, hi) = (r.min(rt), r.max(rt));
    let sol = partner_solutions(spectrum, n, &[lo, hi])?;
    Ok(sol.phi1[0] * sol.phi2[1] / sol.w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartnerTrace {
    /// `int G~_1(r, r) dr` by quadrature.
    pub trace_integral: f64,
    /// `sum_{j >= 2} 1/(E_n - E~_j)`, absent when divergent.
    pub spectral_sum: Option<f64>,
    pub spectral_partials: Vec<(usize, f64)>,
    pub class: ConvergenceClass,
    pub w: f64,
}

/// Trace of the partner Green's function two ways: the quadrature of its
/// diagonal and the spectral sum over the walled levels.
pub fn partner_green_trace(spectrum: &Spectrum, n: usize, num_states: usize) -> Result<PartnerTrace> {
    let psi = spectrum.state(n)?;
    let wall = last_node(psi)?;
    let w = partial_overlap(psi, psi, wall, spectrum.grid.x1)?;
    let trace_integral = -triple_integral_single(psi, wall)? / w;
    let walled = walled_spectrum(spectrum, n, num_states)?;
    let count = walled.count().min(walled.max_truncation()).min(num_states);
    let e_n = psi.energy;
    let (partials, tail) = if count < 2 {
        (Vec::new(), None)
    } else {
        let (p, t) = truncated_series(count, |j| {
            if j == 1 {
                0.0
            } else {
                1.0 / (e_n - walled.states[j - 1].energy)
            }
        });
        (p, Some(t))
    };
    let (class, spectral_sum) = match tail {
        Some(t) if t.class == ConvergenceClass::Divergent => (t.class, None),
        Some(t) => (t.class, Some(t.value)),
        None => (ConvergenceClass::Incomparable, None),
    };
    Ok(PartnerTrace {
        trace_integral,
        spectral_sum,
        spectral_partials: partials,
        class,
        w,
    })
}

/// `sum_{j != n} (1/(E_n - E_j)) int int_{[R~0, x1]^2} Phi_nj^2` against
/// `W * trace`, with the two-fermion double integrals reduced to overlaps
/// `A_nn A_jj - A_nj^2`.
pub fn trace_identity(spectrum: &Spectrum, n: usize, truncation: usize) -> Result<SumRuleReport> {
    let psi = spectrum.state(n)?;
    let rows = OverlapRows::compute(spectrum, n, truncation)?;
    let trace = partner_green_trace(spectrum, n, truncation)?;
    let a_nn = rows.diagonal[n - 1];
    let e_n = psi.energy;
    let (partials, tail) = truncated_series(truncation, |j| {
        if j == n {
            return 0.0;
        }
        let pair = a_nn * rows.diagonal[j - 1] - rows.row[j - 1].powi(2);
        pair / (e_n - spectrum.states[j - 1].energy)
    });
    let mut report = SumRuleReport::new(RuleId::SusyTrace, n, trace.w * trace.trace_integral)
        .at(rows.wall)
        .diagnostic("w", trace.w)
        .diagnostic("trace_integral", trace.trace_integral)
        .with_series(&partials, tail);
    if let Some(s) = trace.spectral_sum {
        report = report
            .diagnostic("spectral_sum", s)
            .diagnostic("w_times_spectral_sum", trace.w * s);
    }
    if trace.class == ConvergenceClass::Divergent {
        report.convergence_class = ConvergenceClass::Divergent;
        report.lhs_value = None;
    }
    Ok(report.settle(spectrum.is_analytic()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::{analytic_box_spectrum, analytic_sho_spectrum};
    use std::f64::consts::PI;

    fn box_spec(count: usize) -> Spectrum {
        analytic_box_spectrum(&build_grid(0.0, PI, 2001).unwrap(), count).unwrap()
    }

    #[test]
    fn walled_box_levels() {
        let s = box_spec(4);
        let w = walled_spectrum(&s, 2, 5).unwrap();
        assert!((w.grid.x0 - PI / 2.0).abs() < 1e-12);
        for (k, st) in w.states.iter().enumerate() {
            let e = 4.0 * ((k + 1) * (k + 1)) as f64;
            assert!((st.energy - e).abs() < 1e-8 * e);
        }
        let same = walled_spectrum(&s, 1, 4).unwrap();
        assert_eq!(same.energies(), s.energies());
    }

    #[test]
    fn walled_oscillator_keeps_odd_levels() {
        let s = analytic_sho_spectrum(&build_grid(-8.0, 8.0, 2001).unwrap(), 10).unwrap();
        let w = walled_spectrum(&s, 2, 4).unwrap();
        for (k, st) in w.states.iter().enumerate() {
            let e = 4.0 * (k + 1) as f64 - 1.0;
            assert!((st.energy - e).abs() < 1e-4 * e, "{} vs {e}", st.energy);
        }
    }

    #[test]
    fn partner_potentials() {
        let s = box_spec(2);
        for k in 1..10 {
            let r = k as f64 * PI / 10.0;
            let v = partner_potential_at(&s, 1, r).unwrap();
            assert!((v - 2.0 / r.sin().powi(2)).abs() < 1e-9);
        }
        assert!(matches!(partner_potential_at(&s, 2, PI / 2.0), Err(Error::SingularAtWall(_))));
        let o = analytic_sho_spectrum(&build_grid(-8.0, 8.0, 2001).unwrap(), 2).unwrap();
        for x in [-3.0, -1.0, 0.5, 2.0] {
            assert!((partner_potential_at(&o, 1, x).unwrap() - (x * x + 2.0)).abs() < 1e-8);
        }
    }

    #[test]
    fn wronskian_is_constant() {
        let s = box_spec(2);
        let pts: Vec<f64> = (1..=10).map(|k| PI / 2.0 + k as f64 * PI / 22.0).collect();
        let sol = partner_solutions(&s, 2, &pts).unwrap();
        assert!((sol.w - 0.5).abs() < 1e-10);
        for w in &sol.wronskian {
            assert!((w - 0.5).abs() < 1e-6);
        }
        assert!((partner_green(&s, 2, 2.0, 2.5).unwrap() - partner_green(&s, 2, 2.5, 2.0).unwrap()).abs() == 0.0);
    }

    #[test]
    fn trace_box_second_state() {
        let s = box_spec(400);
        let t = partner_green_trace(&s, 2, 400).unwrap();
        assert!((t.trace_integral + 3.0 / 16.0).abs() < 1e-6, "{t:?}");
        assert!((t.spectral_sum.unwrap() + 3.0 / 16.0).abs() < 1e-6);
        let r = trace_identity(&s, 2, 400).unwrap();
        assert!((r.rhs_value + 3.0 / 32.0).abs() < 1e-6);
        assert!(r.rel_err.unwrap() < 1e-2, "{r:?}");
    }

    #[test]
    fn oscillator_trace_is_divergent() {
        let o = analytic_sho_spectrum(&build_grid(-8.0, 8.0, 2001).unwrap(), 400).unwrap();
        let r = trace_identity(&o, 1, 400).unwrap();
        assert!(r.is_divergent() && !r.passed);
    }
}
