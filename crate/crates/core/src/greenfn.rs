//! The kernel `G(r, r~) = sum_{j != n} psi_j(r) psi_j(r~) / (E_n - E_j)`
//! built at the eigenenergy `E_n`, its diagonal `S(r) = G(r, r)`, and the
//! first-order relations they satisfy.

use std::f64::consts::PI;

use crate::eigensolver::{BoundState, Spectrum};
use crate::error::{Error, Result};
use crate::quadrature::{open_midpoint, CumulativeIntegral, Sweep};
use crate::summation::CompensatedSum;
use crate::waveanalysis::{check_node_free, last_node, partial_overlap};

/// Truncated kernel evaluated on demand.
#[derive(Debug, Clone, Copy)]
pub struct GKernel<'a> {
    spectrum: &'a Spectrum,
    n: usize,
    truncation: usize,
    energy_n: f64,
}

impl<'a> GKernel<'a> {
    pub fn new(spectrum: &'a Spectrum, n: usize, truncation: usize) -> Result<Self> {
        let energy_n = spectrum.energy(n)?;
        spectrum.check_truncation(truncation)?;
        Ok(Self {
            spectrum,
            n,
            truncation,
            energy_n,
        })
    }

    pub fn owner(&self) -> usize {
        self.n
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    fn weights(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (1..=self.truncation)
            .filter(move |&j| j != self.n)
            .map(move |j| (j, 1.0 / (self.energy_n - self.spectrum.states[j - 1].energy)))
    }

    pub fn value(&self, r: f64, rt: f64) -> Result<f64> {
        let a = self.spectrum.values_at(r, self.truncation)?;
        let b = self.spectrum.values_at(rt, self.truncation)?;
        let mut acc = CompensatedSum::new();
        for (j, w) in self.weights() {
            acc.add(a[j - 1].0 * b[j - 1].0 * w);
        }
        Ok(acc.value())
    }

    /// `(G, dG/dr)`, the derivative taken term by term.
    pub fn value_and_slope(&self, r: f64, rt: f64) -> Result<(f64, f64)> {
        let a = self.spectrum.values_at(r, self.truncation)?;
        let b = self.spectrum.values_at(rt, self.truncation)?;
        let mut g = CompensatedSum::new();
        let mut dg = CompensatedSum::new();
        for (j, w) in self.weights() {
            g.add(a[j - 1].0 * b[j - 1].0 * w);
            dg.add(a[j - 1].1 * b[j - 1].0 * w);
        }
        Ok((g.value(), dg.value()))
    }

    /// `S(r) = G(r, r)`.
    pub fn diagonal(&self, r: f64) -> Result<f64> {
        let a = self.spectrum.values_at(r, self.truncation)?;
        let mut acc = CompensatedSum::new();
        for (j, w) in self.weights() {
            acc.add(a[j - 1].0 * a[j - 1].0 * w);
        }
        Ok(acc.value())
    }

    /// Dense table `G(points[a], points[b])`.
    pub fn table(&self, points: &[f64]) -> Result<Vec<Vec<f64>>> {
        let rows: Vec<Vec<(f64, f64)>> = points
            .iter()
            .map(|&r| self.spectrum.values_at(r, self.truncation))
            .collect::<Result<_>>()?;
        let weights: Vec<(usize, f64)> = self.weights().collect();
        let mut out = vec![vec![0.0; points.len()]; points.len()];
        for a in 0..points.len() {
            for b in a..points.len() {
                let mut acc = CompensatedSum::new();
                for &(j, w) in &weights {
                    acc.add(rows[a][j - 1].0 * rows[b][j - 1].0 * w);
                }
                out[a][b] = acc.value();
                out[b][a] = out[a][b];
            }
        }
        Ok(out)
    }
}

pub fn g_kernel(spectrum: &Spectrum, n: usize, r: f64, rt: f64, truncation: usize) -> Result<f64> {
    GKernel::new(spectrum, n, truncation)?.value(r, rt)
}

/// Closed form of the untruncated kernel for the box `[0, pi]` with
/// states `sqrt(2/pi) sin(j r)`.
pub fn box_kernel(n: usize, r: f64, rt: f64) -> f64 {
    let nf = n as f64;
    let (lo, hi) = if r <= rt { (r, rt) } else { (rt, r) };
    let (s, c) = (nf * r).sin_cos();
    let (st, ct) = (nf * rt).sin_cos();
    let bracket = -s * st / (2.0 * nf) + r * c * st + rt * s * ct - PI * (nf * hi).cos() * (nf * lo).sin();
    bracket / (PI * nf)
}

/// `theta(z)` with `theta(0) = 1/2`.
fn step(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else if z < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// Residual of
/// `(psi_n d/dr - psi_n') G + psi_n(r~) [theta(r - r~) int_{x1}^r + theta(r~ - r) int_{x0}^r] psi_n^2`
/// at truncation `J`.
pub fn g_ode_residual(spectrum: &Spectrum, n: usize, r: f64, rt: f64, truncation: usize) -> Result<f64> {
    let grid = &spectrum.grid;
    if r <= grid.x0 || r >= grid.x1 {
        return Err(Error::OutOfDomain {
            point: r,
            x0: grid.x0,
            x1: grid.x1,
        });
    }
    let kernel = GKernel::new(spectrum, n, truncation)?;
    let (g, dg) = kernel.value_and_slope(r, rt)?;
    let psi = spectrum.state(n)?;
    let (v, d) = psi.eval(r)?;
    let (vt, _) = psi.eval(rt)?;
    let below = partial_overlap(psi, psi, grid.x0, r)?;
    let above = partial_overlap(psi, psi, r, grid.x1)?;
    let source = step(r - rt) * (-above) + step(rt - r) * below;
    Ok(v * dg - d * g + vt * source)
}

/// Running integrals of `psi^2` from either wall.
pub(crate) fn density_cumulative(state: &BoundState) -> CumulativeIntegral<impl Fn(f64) -> f64 + '_> {
    let g = state.grid;
    let density = move |y: f64| state.eval(y).map(|p| p.0 * p.0).unwrap_or(f64::NAN);
    CumulativeIntegral::new(density, g.x0, g.x1, g.n_points - 1, Sweep::Both)
}

fn open_cells(state: &BoundState, a: f64, b: f64) -> usize {
    (((b - a).abs() / state.grid.h).ceil() as usize).max(8)
}

/// `S(r)` at truncation `J` against its integrated first-order relation
/// anchored at `r2`:
/// `psi^2(r)/psi^2(r2) S(r2) + psi^2(r) int_{r2}^r dy/psi^2 (int_y^{x1} - int_{x0}^y) psi^2`.
pub fn s_relation(spectrum: &Spectrum, n: usize, r: f64, r2: f64, truncation: usize) -> Result<(f64, f64)> {
    let psi = spectrum.state(n)?;
    let wall = last_node(psi)?;
    check_node_free(wall, spectrum.grid.x1, r.min(r2), r.max(r2))?;
    let kernel = GKernel::new(spectrum, n, truncation)?;
    let lhs = kernel.diagonal(r)?;
    let s2 = kernel.diagonal(r2)?;
    let v = psi.eval(r)?.0;
    let v2 = psi.eval(r2)?.0;
    let cumulative = density_cumulative(psi);
    let integrand = |y: f64| {
        let p = psi.eval(y).map(|p| p.0).unwrap_or(f64::NAN);
        (cumulative.right(y) - cumulative.left(y)) / (p * p)
    };
    let integral = open_midpoint(integrand, r2, r, open_cells(psi, r2, r))?;
    let rhs = v * v / (v2 * v2) * s2 + v * v * integral;
    Ok((lhs, rhs))
}

/// `G(r, r~)/psi_n(r) - G(r2, r~)/psi_n(r2)` against
/// `psi_n(r~) int_{r2}^r dy/psi_n^2 (theta(y - r~) int_y^{x1} - theta(r~ - y) int_{x0}^y) psi_n^2`.
pub fn integrated_relation(
    spectrum: &Spectrum,
    n: usize,
    r: f64,
    rt: f64,
    r2: f64,
    truncation: usize,
) -> Result<(f64, f64)> {
    let psi = spectrum.state(n)?;
    let wall = last_node(psi)?;
    check_node_free(wall, spectrum.grid.x1, r.min(r2), r.max(r2))?;
    spectrum.grid.check_contains(rt)?;
    let kernel = GKernel::new(spectrum, n, truncation)?;
    let v = psi.eval(r)?.0;
    let v2 = psi.eval(r2)?.0;
    let vt = psi.eval(rt)?.0;
    let lhs = kernel.value(r, rt)? / v - kernel.value(r2, rt)? / v2;

    let cumulative = density_cumulative(psi);
    let integrand = |y: f64| {
        let p = psi.eval(y).map(|p| p.0).unwrap_or(f64::NAN);
        let inner = if y > rt {
            cumulative.right(y)
        } else {
            -cumulative.left(y)
        };
        inner / (p * p)
    };
    let (lo, hi) = (r.min(r2), r.max(r2));
    let mut integral = 0.0;
    if rt > lo && rt < hi {
        integral += open_midpoint(integrand, lo, rt, open_cells(psi, lo, rt))?;
        integral += open_midpoint(integrand, rt, hi, open_cells(psi, rt, hi))?;
    } else {
        integral += open_midpoint(integrand, lo, hi, open_cells(psi, lo, hi))?;
    }
    if r < r2 {
        integral = -integral;
    }
    Ok((lhs, vt * integral))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::analytic_box_spectrum;
    use crate::grid::build_grid;

    fn box_spec(count: usize) -> Spectrum {
        analytic_box_spectrum(&build_grid(0.0, PI, 2001).unwrap(), count).unwrap()
    }

    #[test]
    fn kernel_is_symmetric_bitwise() {
        let s = box_spec(50);
        let k = GKernel::new(&s, 2, 50).unwrap();
        assert_eq!(k.value(0.7, 2.3).unwrap(), k.value(2.3, 0.7).unwrap());
    }

    #[test]
    fn truncated_kernel_approaches_closed_form() {
        let s = box_spec(1600);
        let (r, rt) = (1.0, 2.0);
        let exact = box_kernel(2, r, rt);
        let errs: Vec<f64> = [200, 400, 800, 1600]
            .iter()
            .map(|&j| (g_kernel(&s, 2, r, rt, j).unwrap() - exact).abs())
            .collect();
        assert!(errs[3] < 1e-4, "{errs:?}");
        assert!(errs[3] < errs[0]);
    }

    #[test]
    fn kernel_at_node_pair_vanishes() {
        let s = box_spec(1000);
        let r0 = PI / 2.0;
        assert!(box_kernel(2, r0, r0).abs() < 1e-15);
        assert!(g_kernel(&s, 2, r0, r0, 1000).unwrap().abs() < 1e-3);
    }

    #[test]
    fn ode_residual_box() {
        let s = box_spec(400);
        for n in [1, 2] {
            let res = g_ode_residual(&s, n, 1.0, 2.0, 400).unwrap();
            assert!(res.abs() < 1e-3, "n={n} {res}");
        }
    }

    #[test]
    fn s_relation_degenerate_interval() {
        let s = box_spec(100);
        let (lhs, rhs) = s_relation(&s, 2, 2.0, 2.0, 100).unwrap();
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn s_relation_box_closed_form() {
        let s = box_spec(100);
        let (r, r2) = (2.0_f64, 2.6_f64);
        let n = 2.0;
        let psi2 = |x: f64| 2.0 / PI * (n * x).sin().powi(2);
        // the integral term alone, from the cotangent closed form
        let delta = (2.0 * r - PI) / (2.0 * n) / (n * r).tan() - (2.0 * r2 - PI) / (2.0 * n) / (n * r2).tan();
        let k = GKernel::new(&s, 2, 100).unwrap();
        let (_, rhs) = s_relation(&s, 2, r, r2, 100).unwrap();
        let integral = rhs / psi2(r) - k.diagonal(r2).unwrap() / psi2(r2);
        assert!((integral - delta).abs() < 1e-8, "{integral} vs {delta}");
    }

    #[test]
    fn integrated_relation_box_ground_state() {
        let s = box_spec(400);
        let (lhs, rhs) = integrated_relation(&s, 1, 2.0, 1.0, 1.5, 400).unwrap();
        assert!((lhs - rhs).abs() < 1e-3, "{lhs} vs {rhs}");
        let exact = box_kernel(1, 2.0, 1.0) / (2.0 / PI).sqrt() / 2.0_f64.sin()
            - box_kernel(1, 1.5, 1.0) / (2.0 / PI).sqrt() / 1.5_f64.sin();
        assert!((exact - rhs).abs() < 1e-8, "{exact} vs {rhs}");
    }
}
