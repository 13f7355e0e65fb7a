//! Bound states of `-psi'' + V psi = E psi` with Dirichlet ends: a
//! finite-difference solver for arbitrary confining potentials and exact
//! spectra for the infinite well and the harmonic oscillator.

mod hermite;
mod tridiag;

pub use hermite::hermite_functions;
pub use tridiag::{Eigenpair, SymTridiagonal};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potential::{PotentialKind, PotentialSpec};
use crate::summation::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    Numeric,
    Analytic,
}

/// Closed form behind an analytic state, used for off-grid evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum ClosedForm {
    /// `sign * sqrt(2/L) sin(mode*pi*(x-a)/L)` on `[a, b]`, `L = b - a`.
    Box { a: f64, b: f64, mode: usize, sign: f64 },
    /// `sign * psi_quantum(x)` (normalized Hermite function).
    Oscillator { quantum: usize, sign: f64 },
}

impl ClosedForm {
    fn eval(&self, r: f64) -> (f64, f64) {
        match *self {
            ClosedForm::Box { a, b, mode, sign } => {
                let len = b - a;
                let amp = sign * (2.0 / len).sqrt();
                let k = mode as f64 * std::f64::consts::PI / len;
                let (s, c) = (k * (r - a)).sin_cos();
                (amp * s, amp * k * c)
            }
            ClosedForm::Oscillator { quantum, sign } => {
                let (v, d) = hermite_functions(r, quantum + 1)[quantum];
                (sign * v, sign * d)
            }
        }
    }

    fn negated(self) -> Self {
        match self {
            ClosedForm::Box { a, b, mode, sign } => ClosedForm::Box { a, b, mode, sign: -sign },
            ClosedForm::Oscillator { quantum, sign } => ClosedForm::Oscillator { quantum, sign: -sign },
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundState {
    /// 1-based; the ground state is 1.
    pub index: usize,
    pub energy: f64,
    /// Raw finite-difference eigenvalue, before the truncation correction.
    pub discrete_energy: Option<f64>,
    pub grid: Grid,
    pub values: Vec<f64>,
    pub derivative_values: Vec<f64>,
    pub source: Source,
    pub(crate) closed_form: Option<ClosedForm>,
}

impl BoundState {
    /// Value and derivative at `r`: the closed form when there is one,
    /// otherwise the grid interpolant.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        self.grid.check_contains(r)?;
        match &self.closed_form {
            Some(cf) => {
                if let Some(k) = self.grid.index_of(r) {
                    return Ok((self.values[k], self.derivative_values[k]));
                }
                Ok(cf.eval(r))
            }
            None => Ok(self.hermite_cubic(r)),
        }
    }

    /// Cubic Hermite interpolation of the stored samples and slopes.
    /// Grid points return the stored samples unchanged.
    pub fn interpolate(&self, r: f64) -> Result<(f64, f64)> {
        self.grid.check_contains(r)?;
        Ok(self.hermite_cubic(r))
    }

    fn hermite_cubic(&self, r: f64) -> (f64, f64) {
        if let Some(k) = self.grid.index_of(r) {
            return (self.values[k], self.derivative_values[k]);
        }
        let g = &self.grid;
        let k = g.cell_of(r);
        let h = g.h;
        let t = (r - g.point(k)) / h;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (h * self.derivative_values[k], h * self.derivative_values[k + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1;
        let slope = (6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * d1;
        (value, slope / h)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed_form.is_some()
    }

    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = -*v);
        out.derivative_values.iter_mut().for_each(|v| *v = -*v);
        out.closed_form = out.closed_form.map(ClosedForm::negated);
        out
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub grid: Grid,
    pub potential: PotentialSpec,
    pub states: Vec<BoundState>,
    /// Largest `|psi_j(x1)|` among analytic whole-line states (0 otherwise):
    /// how much of the untruncated function the wall cuts off.
    pub wall_amplitude: f64,
}

/// Fraction of the finite-difference spectrum trusted in spectral sums.
pub const NUMERIC_TRUNCATION_FRACTION: f64 = 0.6;

impl Spectrum {
    pub fn count(&self) -> usize {
        self.states.len()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.energy).collect()
    }

    /// 1-based state lookup.
    pub fn state(&self, j: usize) -> Result<&BoundState> {
        j.checked_sub(1)
            .and_then(|i| self.states.get(i))
            .ok_or(Error::InsufficientStates {
                requested: j,
                available: self.count(),
            })
    }

    pub fn energy(&self, j: usize) -> Result<f64> {
        Ok(self.state(j)?.energy)
    }

    pub fn is_analytic(&self) -> bool {
        self.states.iter().all(|s| s.source == Source::Analytic)
    }

    /// Largest truncation usable in spectral sums.
    pub fn max_truncation(&self) -> usize {
        if self.is_analytic() {
            self.count()
        } else {
            let cap = (NUMERIC_TRUNCATION_FRACTION * (self.grid.n_points - 2) as f64) as usize;
            self.count().min(cap.max(1))
        }
    }

    pub fn check_truncation(&self, j: usize) -> Result<()> {
        if j > self.max_truncation() {
            return Err(Error::InsufficientStates {
                requested: j,
                available: self.max_truncation(),
            });
        }
        Ok(())
    }

    /// `(psi_j(r), psi_j'(r))` for `j = 1..=upto`.
    pub fn values_at(&self, r: f64, upto: usize) -> Result<Vec<(f64, f64)>> {
        if upto > self.count() {
            return Err(Error::InsufficientStates {
                requested: upto,
                available: self.count(),
            });
        }
        self.grid.check_contains(r)?;
        let states = &self.states[..upto];
        if self.grid.index_of(r).is_none() {
            let consecutive_oscillator = states.iter().enumerate().all(|(i, s)| {
                matches!(s.closed_form, Some(ClosedForm::Oscillator { quantum, .. }) if quantum == i)
            });
            if consecutive_oscillator && upto > 1 {
                let table = hermite_functions(r, upto);
                return Ok(states
                    .iter()
                    .zip(table)
                    .map(|(s, (v, d))| match s.closed_form {
                        Some(ClosedForm::Oscillator { sign, .. }) => (sign * v, sign * d),
                        _ => unreachable!(),
                    })
                    .collect());
            }
        }
        states.iter().map(|s| s.eval(r)).collect()
    }

    /// The same spectrum with every eigenfunction multiplied by -1.
    pub fn negated(&self) -> Self {
        Self {
            grid: self.grid,
            potential: self.potential.clone(),
            states: self.states.iter().map(BoundState::negated).collect(),
            wall_amplitude: self.wall_amplitude,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Add the leading `h^2/12 * int (psi'')^2` truncation correction to each
    /// finite-difference eigenvalue.
    pub energy_correction: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            energy_correction: true,
        }
    }
}

pub fn solve_numeric(potential: &PotentialSpec, grid: &Grid, num_states: usize) -> Result<Spectrum> {
    solve_numeric_with(potential, grid, num_states, SolverOptions::default())
}

pub fn solve_numeric_with(
    potential: &PotentialSpec,
    grid: &Grid,
    num_states: usize,
    options: SolverOptions,
) -> Result<Spectrum> {
    potential.validate()?;
    let n = grid.n_points;
    let m = n - 2;
    if num_states == 0 || num_states > m {
        return Err(Error::ConvergenceFailure(format!(
            "a {n}-point grid supports 1..={m} states, {num_states} requested"
        )));
    }
    let h = grid.h;
    let potential_values: Vec<f64> = (0..n).map(|k| potential.value(grid.point(k))).collect();
    if let Some(k) = (1..n - 1).find(|&k| !potential_values[k].is_finite()) {
        return Err(Error::NonFinite(grid.point(k)));
    }
    let inv_h2 = 1.0 / (h * h);
    let op = SymTridiagonal {
        diag: (1..n - 1).map(|k| 2.0 * inv_h2 + potential_values[k]).collect(),
        off: vec![-inv_h2; m - 1],
    };
    let pairs = op.lowest(num_states)?;

    let norm_scale = 1.0 / h.sqrt();
    let mut states = Vec::with_capacity(num_states);
    for (i, pair) in pairs.into_iter().enumerate() {
        let index = i + 1;
        let mut values = Vec::with_capacity(n);
        values.push(0.0);
        values.extend(pair.vector.iter().map(|v| v * norm_scale));
        values.push(0.0);

        let max = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let leading = values.iter().find(|v| v.abs() > 1e-6 * max).copied().unwrap_or(1.0);
        if leading < 0.0 {
            values.iter_mut().for_each(|v| *v = -*v);
        }

        let found = sign_changes(&values);
        if found != index - 1 {
            return Err(Error::NodeCountMismatch {
                index,
                expected: index - 1,
                found,
            });
        }

        let lambda = pair.value;
        let energy = if options.energy_correction {
            let mut acc = CompensatedSum::new();
            for k in 1..n - 1 {
                let curvature = (potential_values[k] - lambda) * values[k];
                acc.add(curvature * curvature);
            }
            lambda + h * h / 12.0 * acc.value() * h
        } else {
            lambda
        };
        let derivative_values = dirichlet_derivative(&values, h);
        states.push(BoundState {
            index,
            energy,
            discrete_energy: Some(lambda),
            grid: *grid,
            values,
            derivative_values,
            source: Source::Numeric,
            closed_form: None,
        });
    }
    for w in states.windows(2) {
        if w[1].energy <= w[0].energy {
            return Err(Error::ConvergenceFailure(format!(
                "energies of states {} and {} are not increasing",
                w[0].index, w[1].index
            )));
        }
    }
    Ok(Spectrum {
        grid: *grid,
        potential: potential.clone(),
        states,
        wall_amplitude: 0.0,
    })
}

/// Samples below this fraction of the peak are treated as zero when
/// counting sign changes.
pub const SIGN_CHANGE_FLOOR: f64 = 1e-12;

/// Number of sign changes, skipping samples that are negligibly small.
pub fn sign_changes(values: &[f64]) -> usize {
    sign_change_cells(values).len()
}

/// Pairs `(k_lo, k_hi)` of consecutive significant samples with opposite
/// signs; the zero lies in `[x_{k_lo}, x_{k_hi}]`.
pub fn sign_change_cells(values: &[f64]) -> Vec<(usize, usize)> {
    let max = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let floor = SIGN_CHANGE_FLOOR * max;
    let mut out = Vec::new();
    let mut last: Option<usize> = None;
    for (k, v) in values.iter().enumerate() {
        if v.abs() <= floor {
            continue;
        }
        if let Some(p) = last {
            if values[p].signum() != v.signum() {
                out.push((p, k));
            }
        }
        last = Some(k);
    }
    out
}

/// Fourth-order differences for a function vanishing at both ends. Near a
/// wall the odd reflection `u(-h) = -u(h)` supplies the missing sample.
pub fn dirichlet_derivative(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    let mut d = vec![0.0; n];
    if n < 5 {
        for k in 0..n {
            d[k] = match k {
                0 => (u[1] - u[0]) / h,
                k if k == n - 1 => (u[k] - u[k - 1]) / h,
                k => (u[k + 1] - u[k - 1]) / (2.0 * h),
            };
        }
        return d;
    }
    d[0] = (8.0 * u[1] - u[2]) / (6.0 * h);
    d[1] = (-u[1] + 8.0 * u[2] - u[3]) / (12.0 * h);
    for k in 2..n - 2 {
        d[k] = (u[k - 2] - 8.0 * u[k - 1] + 8.0 * u[k + 1] - u[k + 2]) / (12.0 * h);
    }
    d[n - 2] = (u[n - 4] - 8.0 * u[n - 3] + u[n - 2]) / (12.0 * h);
    d[n - 1] = -(8.0 * u[n - 2] - u[n - 3]) / (6.0 * h);
    d
}

/// `sin(pi * p / q)` with exact zeros and exact unit peaks.
fn sin_pi_ratio(p: u64, q: u64) -> f64 {
    let mut p = p % (2 * q);
    let mut sign = 1.0;
    if p >= q {
        p -= q;
        sign = -1.0;
    }
    if 2 * p > q {
        p = q - p;
    }
    if p == 0 {
        0.0
    } else if 2 * p == q {
        sign
    } else {
        sign * (std::f64::consts::PI * p as f64 / q as f64).sin()
    }
}

fn spans(grid: &Grid, a: f64, b: f64) -> bool {
    let tol = 1e-12 * a.abs().max(b.abs()).max(1.0);
    (grid.x0 - a).abs() <= tol && (grid.x1 - b).abs() <= tol
}

/// Exact infinite-well states on `[0, pi]`: `sqrt(2/pi) sin(j r)`, `E_j = j^2`.
pub fn analytic_box_spectrum(grid: &Grid, num_states: usize) -> Result<Spectrum> {
    if !spans(grid, 0.0, std::f64::consts::PI) {
        return Err(Error::DomainMismatch(format!(
            "box spectrum needs the grid [0, pi], got [{}, {}]",
            grid.x0, grid.x1
        )));
    }
    Ok(box_spectrum_on(grid, num_states))
}

/// Exact infinite-well states between the ends of `grid`.
pub fn box_spectrum_on(grid: &Grid, num_states: usize) -> Spectrum {
    let (a, b) = (grid.x0, grid.x1);
    let len = b - a;
    let amp = (2.0 / len).sqrt();
    let q = grid.last() as u64;
    let states = (1..=num_states)
        .map(|j| {
            let k_wave = j as f64 * std::f64::consts::PI / len;
            let jj = j as u64;
            let values = (0..=q).map(|k| amp * sin_pi_ratio(jj * k, q)).collect();
            let derivative_values = (0..=q)
                .map(|k| amp * k_wave * sin_pi_ratio(2 * jj * k + q, 2 * q))
                .collect();
            BoundState {
                index: j,
                energy: k_wave * k_wave,
                discrete_energy: None,
                grid: *grid,
                values,
                derivative_values,
                source: Source::Analytic,
                closed_form: Some(ClosedForm::Box { a, b, mode: j, sign: 1.0 }),
            }
        })
        .collect();
    Spectrum {
        grid: *grid,
        potential: PotentialSpec::particle_in_box(),
        states,
        wall_amplitude: 0.0,
    }
}

/// Smallest half-width at which the oscillator closed forms are used.
pub const MIN_OSCILLATOR_HALFWIDTH: f64 = 6.0;

/// Exact oscillator states for `V = x^2`: normalized Hermite functions,
/// `E_j = 2j - 1`, on a grid symmetric about the origin.
pub fn analytic_sho_spectrum(grid: &Grid, num_states: usize) -> Result<Spectrum> {
    let halfwidth = grid.x1;
    if (grid.x0 + grid.x1).abs() > 1e-12 * halfwidth.abs() {
        return Err(Error::DomainMismatch(format!(
            "oscillator grid must be symmetric about 0, got [{}, {}]",
            grid.x0, grid.x1
        )));
    }
    if halfwidth < MIN_OSCILLATOR_HALFWIDTH {
        return Err(Error::DomainMismatch(format!(
            "oscillator half-width {halfwidth} is below {MIN_OSCILLATOR_HALFWIDTH}"
        )));
    }
    let n = grid.n_points;
    let mut values = vec![vec![0.0; n]; num_states];
    let mut derivs = vec![vec![0.0; n]; num_states];
    for k in 0..n {
        for (m, (v, d)) in hermite_functions(grid.point(k), num_states).into_iter().enumerate() {
            values[m][k] = v;
            derivs[m][k] = d;
        }
    }
    let wall_amplitude = values
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v[0].abs()).max(v[n - 1].abs()));
    let states = values
        .into_iter()
        .zip(derivs)
        .enumerate()
        .map(|(m, (values, derivative_values))| BoundState {
            index: m + 1,
            energy: (2 * m + 1) as f64,
            discrete_energy: None,
            grid: *grid,
            values,
            derivative_values,
            source: Source::Analytic,
            closed_form: Some(ClosedForm::Oscillator { quantum: m, sign: 1.0 }),
        })
        .collect();
    Ok(Spectrum {
        grid: *grid,
        potential: PotentialSpec::oscillator(halfwidth),
        states,
        wall_amplitude,
    })
}

/// Solves with the closed forms when the potential has them, otherwise
/// numerically.
pub fn analytic_spectrum(potential: &PotentialSpec, grid: &Grid, num_states: usize) -> Result<Spectrum> {
    match potential.kind {
        PotentialKind::Box => analytic_box_spectrum(grid, num_states),
        PotentialKind::Oscillator => analytic_sho_spectrum(grid, num_states),
        PotentialKind::Polynomial => Err(Error::InvalidArgument(
            "no closed-form spectrum for a general polynomial".into(),
        )),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalityReport {
    pub matrix: Vec<Vec<f64>>,
    pub max_deviation: f64,
}

/// Trapezoid overlaps `int psi_j psi_k` over the whole grid.
pub fn orthonormality_matrix(spectrum: &Spectrum) -> OrthonormalityReport {
    let count = spectrum.count();
    let h = spectrum.grid.h;
    let n = spectrum.grid.n_points;
    let mut matrix = vec![vec![0.0; count]; count];
    let mut max_deviation = 0.0_f64;
    for j in 0..count {
        for k in j..count {
            let a = &spectrum.states[j].values;
            let b = &spectrum.states[k].values;
            let mut acc = CompensatedSum::new();
            for i in 0..n {
                let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                acc.add(w * a[i] * b[i]);
            }
            let v = acc.value() * h;
            matrix[j][k] = v;
            matrix[k][j] = v;
            let target = if j == k { 1.0 } else { 0.0 };
            max_deviation = max_deviation.max((v - target).abs());
        }
    }
    OrthonormalityReport {
        matrix,
        max_deviation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use std::f64::consts::PI;

    #[test]
    fn exact_trig_samples() {
        assert_eq!(sin_pi_ratio(0, 7), 0.0);
        assert_eq!(sin_pi_ratio(7, 7), 0.0);
        assert_eq!(sin_pi_ratio(14, 7), 0.0);
        assert_eq!(sin_pi_ratio(1, 2), 1.0);
        assert_eq!(sin_pi_ratio(3, 2), -1.0);
        assert!((sin_pi_ratio(1, 3) - (PI / 3.0).sin()).abs() < 1e-16);
        assert!((sin_pi_ratio(5, 4) - (5.0 * PI / 4.0).sin()).abs() < 1e-15);
    }

    #[test]
    fn box_node_and_slope() {
        let g = build_grid(0.0, PI, 2001).unwrap();
        let s = analytic_box_spectrum(&g, 3).unwrap();
        let psi2 = s.state(2).unwrap();
        assert_eq!(psi2.values[1000], 0.0);
        let expected = -2.0 * (2.0 / PI).sqrt();
        assert!((psi2.derivative_values[1000] - expected).abs() < 1e-14);
    }

    #[test]
    fn box_domain_is_checked() {
        let g = build_grid(0.0, 3.0, 11).unwrap();
        assert!(matches!(analytic_box_spectrum(&g, 2), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn oscillator_domain_is_checked() {
        let g = build_grid(-8.0, 7.0, 101).unwrap();
        assert!(matches!(analytic_sho_spectrum(&g, 2), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn numeric_box_low_levels() {
        let g = build_grid(0.0, PI, 2001).unwrap();
        let s = solve_numeric(&PotentialSpec::particle_in_box(), &g, 5).unwrap();
        for j in 1..=5 {
            let e = s.energy(j).unwrap();
            let exact = (j * j) as f64;
            assert!((e - exact).abs() / exact < 1e-8, "j={j} e={e}");
        }
    }

    #[test]
    fn too_many_states_fails() {
        let g = build_grid(0.0, PI, 20).unwrap();
        let r = solve_numeric(&PotentialSpec::particle_in_box(), &g, 20);
        assert!(matches!(r, Err(Error::ConvergenceFailure(_))));
    }

    #[test]
    fn derivative_stencils_are_fourth_order_at_walls() {
        let errs: Vec<f64> = [101usize, 201]
            .iter()
            .map(|&n| {
                let h = PI / (n - 1) as f64;
                let u: Vec<f64> = (0..n).map(|k| (2.0 * k as f64 * h).sin()).collect();
                let d = dirichlet_derivative(&u, h);
                [0, 1, n - 2, n - 1]
                    .iter()
                    .map(|&k| (d[k] - 2.0 * (2.0 * k as f64 * h).cos()).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[0] / errs[1] > 14.0, "{errs:?}");
    }

    #[test]
    fn hermite_cubic_passthrough_and_accuracy() {
        let g = build_grid(-8.0, 8.0, 2001).unwrap();
        let s = analytic_sho_spectrum(&g, 2).unwrap();
        let psi1 = s.state(1).unwrap();
        let (v, _) = psi1.interpolate(g.point(700)).unwrap();
        assert_eq!(v, psi1.values[700]);
        let (v, d) = psi1.interpolate(1.0).unwrap();
        let exact = PI.powf(-0.25) * (-0.5_f64).exp();
        assert!((v - exact).abs() < 1e-9);
        assert!((d + exact).abs() < 1e-7);
    }

    #[test]
    fn single_state_orthonormality() {
        let g = build_grid(0.0, PI, 2001).unwrap();
        let s = analytic_box_spectrum(&g, 1).unwrap();
        let r = orthonormality_matrix(&s);
        assert_eq!(r.matrix.len(), 1);
        assert!((r.matrix[0][0] - 1.0).abs() < 1e-12);
    }
}
