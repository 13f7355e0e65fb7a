//! Quadrature on grid samples and on closures.
//!
//! Grid data is integrated with the composite trapezoid rule (cubic
//! interpolation fills partial cells) or with an open composite midpoint
//! rule that never touches the interval ends. Closures use the same open
//! midpoint rule with cell halving, plus Gauss-Legendre for cumulative
//! integrals of smooth densities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::summation::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    Closed,
    OpenMidpoint,
}

/// Successive open-midpoint estimates must agree to this relative level.
pub const OPEN_REL_TOL: f64 = 1e-8;
pub const MAX_HALVINGS: u32 = 20;
/// Upper bound on integrand evaluations in one open-midpoint pass.
const MAX_EVALUATIONS: usize = 1 << 23;

/// 4-point Lagrange interpolation of grid samples, returning value and slope.
pub fn cubic_interpolate(grid: &Grid, f: &[f64], r: f64) -> (f64, f64) {
    let n = grid.n_points;
    if let Some(k) = grid.index_of(r) {
        let slope = cubic_slope_at_node(grid, f, k);
        return (f[k], slope);
    }
    let k = grid.cell_of(r);
    let start = k.saturating_sub(1).min(n - 4);
    let xs = [start, start + 1, start + 2, start + 3].map(|i| grid.point(i));
    let ys = [f[start], f[start + 1], f[start + 2], f[start + 3]];
    lagrange4(&xs, &ys, r)
}

fn cubic_slope_at_node(grid: &Grid, f: &[f64], k: usize) -> f64 {
    let n = grid.n_points;
    let start = k.saturating_sub(1).min(n - 4);
    let xs = [start, start + 1, start + 2, start + 3].map(|i| grid.point(i));
    let ys = [f[start], f[start + 1], f[start + 2], f[start + 3]];
    lagrange4(&xs, &ys, grid.point(k)).1
}

fn lagrange4(xs: &[f64; 4], ys: &[f64; 4], r: f64) -> (f64, f64) {
    let mut value = 0.0;
    let mut slope = 0.0;
    for i in 0..4 {
        let mut basis = 1.0;
        let mut denom = 1.0;
        for j in 0..4 {
            if j != i {
                basis *= r - xs[j];
                denom *= xs[i] - xs[j];
            }
        }
        let mut dbasis = 0.0;
        for m in 0..4 {
            if m == i {
                continue;
            }
            let mut prod = 1.0;
            for j in 0..4 {
                if j != i && j != m {
                    prod *= r - xs[j];
                }
            }
            dbasis += prod;
        }
        value += ys[i] * basis / denom;
        slope += ys[i] * dbasis / denom;
    }
    (value, slope)
}

/// Integrates grid samples `f` over `[a, b]`.
pub fn integrate(grid: &Grid, f: &[f64], a: f64, b: f64, scheme: Scheme) -> Result<f64> {
    if f.len() != grid.n_points {
        return Err(Error::InvalidArgument(format!(
            "sample count {} does not match grid ({})",
            f.len(),
            grid.n_points
        )));
    }
    grid.check_contains(a)?;
    grid.check_contains(b)?;
    if a > b {
        return Err(Error::InvalidArgument(format!("need a <= b, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    match scheme {
        Scheme::Closed => closed_on_grid(grid, f, a, b),
        Scheme::OpenMidpoint => {
            let (lo, hi) = support_indices(grid, a, b);
            check_finite(grid, f, lo, hi)?;
            let cells = (((b - a) / grid.h).ceil() as usize).max(1);
            open_midpoint(|x| cubic_interpolate(grid, f, x).0, a, b, cells)
        }
    }
}

fn support_indices(grid: &Grid, a: f64, b: f64) -> (usize, usize) {
    let n = grid.n_points;
    let lo = grid.cell_of(a).saturating_sub(1);
    let hi = (grid.cell_of(b) + 2).min(n - 1);
    (lo, hi)
}

fn check_finite(grid: &Grid, f: &[f64], lo: usize, hi: usize) -> Result<()> {
    match (lo..=hi).find(|&k| !f[k].is_finite()) {
        Some(k) => Err(Error::NonFinite(grid.point(k))),
        None => Ok(()),
    }
}

fn closed_on_grid(grid: &Grid, f: &[f64], a: f64, b: f64) -> Result<f64> {
    let (lo, hi) = support_indices(grid, a, b);
    check_finite(grid, f, lo, hi)?;

    let ka = grid.index_of(a).unwrap_or_else(|| grid.cell_of(a) + 1);
    let kb = grid.index_of(b).unwrap_or_else(|| grid.cell_of(b));
    let mut acc = CompensatedSum::new();
    if ka >= kb {
        // both ends inside one cell (or adjacent partial cells)
        acc.add(gauss_cubic(grid, f, a, b));
        return Ok(acc.value());
    }
    let xa = grid.point(ka);
    let xb = grid.point(kb);
    if a < xa {
        acc.add(gauss_cubic(grid, f, a, xa));
    }
    for k in ka..kb {
        acc.add(0.5 * grid.h * (f[k] + f[k + 1]));
    }
    if b > xb {
        acc.add(gauss_cubic(grid, f, xb, b));
    }
    Ok(acc.value())
}

/// Exact integral of the local cubic interpolant over a sub-cell span.
fn gauss_cubic(grid: &Grid, f: &[f64], a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let node = (3.0_f64 / 5.0).sqrt();
    let w = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let xs = [mid - half * node, mid, mid + half * node];
    half * xs
        .iter()
        .zip(w)
        .map(|(&x, w)| w * cubic_interpolate(grid, f, x).0)
        .sum::<f64>()
}

/// Composite open midpoint rule with cell halving. Stops once two
/// successive estimates agree to [`OPEN_REL_TOL`] and returns the
/// Richardson-combined value of the last pair.
pub fn open_midpoint<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, initial_cells: usize) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cells = initial_cells.max(4);
    let mut previous = midpoint_pass(&f, lo, hi, cells)?;
    for _ in 0..MAX_HALVINGS {
        if cells * 2 > MAX_EVALUATIONS {
            break;
        }
        cells *= 2;
        let current = midpoint_pass(&f, lo, hi, cells)?;
        let diff = current - previous;
        let extrapolated = current + diff / 3.0;
        if diff.abs() <= OPEN_REL_TOL * current.abs() || diff.abs() < 1e-300 {
            return Ok(sign * extrapolated);
        }
        previous = current;
    }
    Ok(sign * previous)
}

fn midpoint_pass<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, cells: usize) -> Result<f64> {
    let h = (b - a) / cells as f64;
    let mut acc = CompensatedSum::new();
    for i in 0..cells {
        let x = a + (i as f64 + 0.5) * h;
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite(x));
        }
        acc.add(v);
    }
    Ok(acc.value() * h)
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

/// Five-point Gauss-Legendre on `[a, b]`.
pub fn gauss5<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * GL5_NODES
        .iter()
        .zip(GL5_WEIGHTS)
        .map(|(&t, w)| w * f(mid + half * t))
        .sum::<f64>()
}

const MAX_ADAPTIVE_DEPTH: u32 = 24;

/// Recursive bisection on five-point Gauss-Legendre until the two halves
/// agree with the whole to `tol` (absolute) or `depth` runs out.
pub fn adaptive_gauss<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    adaptive_inner(f, a, b, gauss5(f, a, b), tol, MAX_ADAPTIVE_DEPTH)
}

fn adaptive_inner<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let mid = 0.5 * (a + b);
    let left = gauss5(f, a, mid);
    let right = gauss5(f, mid, b);
    let split = left + right;
    let floor = 16.0 * f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || (split - whole).abs() <= tol.max(floor) {
        return split;
    }
    adaptive_inner(f, a, mid, left, 0.5 * tol, depth - 1)
        + adaptive_inner(f, mid, b, right, 0.5 * tol, depth - 1)
}

/// Running integrals of a density over `[a, b]`, tabulated on a uniform
/// set of cell edges so that `int_a^r` and `int_r^b` can be read off at any
/// `r` without cancellation between the two.
pub struct CumulativeIntegral<F: Fn(f64) -> f64> {
    f: F,
    a: f64,
    b: f64,
    h: f64,
    cells: usize,
    /// `from_left[k] = int_a^{e_k}`, `from_right[k] = int_{e_k}^b`.
    from_left: Vec<f64>,
    from_right: Vec<f64>,
    tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    Both,
    /// Only `int_r^b` is tabulated; the cell touching `a` is never integrated.
    RightOnly,
}

impl<F: Fn(f64) -> f64> CumulativeIntegral<F> {
    pub fn new(f: F, a: f64, b: f64, cells: usize, sweep: Sweep) -> Self {
        let cells = cells.max(1);
        let h = (b - a) / cells as f64;
        let edge = |k: usize| if k == cells { b } else { a + k as f64 * h };
        let mut cell_values = vec![f64::NAN; cells];
        let first = if sweep == Sweep::RightOnly { 1 } else { 0 };
        let mut scale = 0.0_f64;
        for (k, slot) in cell_values.iter_mut().enumerate().skip(first) {
            *slot = gauss5(&f, edge(k), edge(k + 1));
            scale = scale.max(slot.abs());
        }
        let tol = 1e-15 * scale.max(1e-300);
        for k in first..cells {
            cell_values[k] = adaptive_gauss(&f, edge(k), edge(k + 1), tol);
        }

        let mut from_left = vec![f64::NAN; cells + 1];
        if sweep == Sweep::Both {
            let mut acc = CompensatedSum::new();
            from_left[0] = 0.0;
            for k in 0..cells {
                acc.add(cell_values[k]);
                from_left[k + 1] = acc.value();
            }
        }
        let mut from_right = vec![f64::NAN; cells + 1];
        let mut acc = CompensatedSum::new();
        from_right[cells] = 0.0;
        for k in (first..cells).rev() {
            acc.add(cell_values[k]);
            from_right[k] = acc.value();
        }
        Self {
            f,
            a,
            b,
            h,
            cells,
            from_left,
            from_right,
            tol,
        }
    }

    fn locate(&self, r: f64) -> usize {
        let t = ((r - self.a) / self.h).floor();
        if t <= 0.0 {
            0
        } else {
            (t as usize).min(self.cells - 1)
        }
    }

    fn edge(&self, k: usize) -> f64 {
        if k == self.cells {
            self.b
        } else {
            self.a + k as f64 * self.h
        }
    }

    /// `int_a^r f`.
    pub fn left(&self, r: f64) -> f64 {
        let r = r.clamp(self.a, self.b);
        let k = self.locate(r);
        self.from_left[k] + adaptive_gauss(&self.f, self.edge(k), r, self.tol)
    }

    /// `int_r^b f`.
    pub fn right(&self, r: f64) -> f64 {
        let r = r.clamp(self.a, self.b);
        let k = self.locate(r);
        self.from_right[k + 1] + adaptive_gauss(&self.f, r, self.edge(k + 1), self.tol)
    }

    pub fn total(&self) -> f64 {
        self.from_right[0]
    }
}

/// Composite five-point Gauss-Legendre rule on `[a, b]` whose panel edges
/// follow the grid cells (each cell split into `sub` panels), so piecewise
/// polynomial interpolants are integrated exactly.
#[derive(Debug, Clone)]
pub struct GaussTable {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussTable {
    pub fn on_grid(grid: &Grid, a: f64, b: f64, sub: usize) -> Self {
        let sub = sub.max(1);
        let mut edges = vec![a];
        let first = grid.index_of(a).unwrap_or_else(|| grid.cell_of(a)) + 1;
        let last = grid.index_of(b).unwrap_or_else(|| grid.cell_of(b) + 1);
        for k in first..last {
            let x = grid.point(k);
            if x > a && x < b {
                edges.push(x);
            }
        }
        edges.push(b);
        let mut nodes = Vec::with_capacity(5 * sub * edges.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for w in edges.windows(2) {
            let step = (w[1] - w[0]) / sub as f64;
            for p in 0..sub {
                let lo = w[0] + p as f64 * step;
                let half = 0.5 * step;
                let mid = lo + half;
                for (t, wt) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
                    nodes.push(mid + half * t);
                    weights.push(half * wt);
                }
            }
        }
        Self { nodes, weights }
    }

    /// `sum_i w_i f_i g_i` over samples at the table nodes.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        let mut acc = CompensatedSum::new();
        for ((w, a), b) in self.weights.iter().zip(f).zip(g) {
            acc.add(w * a * b);
        }
        acc.value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use std::f64::consts::PI;

    fn sampled(grid: &Grid, f: impl Fn(f64) -> f64) -> Vec<f64> {
        grid.points().into_iter().map(f).collect()
    }

    #[test]
    fn closed_full_and_half_domain() {
        let g = build_grid(0.0, PI, 2001).unwrap();
        let f = sampled(&g, |y| 2.0 / PI * (2.0 * y).sin().powi(2));
        let full = integrate(&g, &f, 0.0, PI, Scheme::Closed).unwrap();
        let half = integrate(&g, &f, 0.0, PI / 2.0, Scheme::Closed).unwrap();
        assert!((full - 1.0).abs() < 1e-12);
        assert!((half - 0.5).abs() < 1e-12);
    }

    #[test]
    fn closed_partial_cells() {
        let g = build_grid(0.0, 1.0, 101).unwrap();
        let f = sampled(&g, |x| x.exp());
        let v = integrate(&g, &f, 0.123, 0.789, Scheme::Closed).unwrap();
        let exact = 0.789_f64.exp() - 0.123_f64.exp();
        let trapezoid_bound = (0.789 - 0.123) * g.h * g.h / 12.0 * 0.789_f64.exp();
        assert!((v - exact).abs() < trapezoid_bound, "{v} vs {exact}");
    }

    #[test]
    fn open_midpoint_matches_closed_form() {
        let g = build_grid(0.0, 1.0, 201).unwrap();
        let f = sampled(&g, |x| x * x);
        let v = integrate(&g, &f, 0.1, 0.9, Scheme::OpenMidpoint).unwrap();
        assert!((v - (0.729 - 0.001) / 3.0).abs() < 1e-9);
    }

    #[test]
    fn singular_sample_is_reported() {
        let g = build_grid(0.0, PI, 2001).unwrap();
        let f: Vec<f64> = g
            .points()
            .iter()
            .enumerate()
            .map(|(k, &y)| if k == 1000 { f64::INFINITY } else { 1.0 / (2.0 * y).sin().powi(2) })
            .collect();
        let err = integrate(&g, &f, 1.4, 1.7, Scheme::OpenMidpoint).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
        let err = integrate(&g, &f, 1.4, 1.7, Scheme::Closed).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
    }

    #[test]
    fn open_closure_cotangent() {
        // int_{pi/2}^{2pi/3} dy / sin^2 y = 1/sqrt(3)
        let v = open_midpoint(|y: f64| 1.0 / y.sin().powi(2), PI / 2.0, 2.0 * PI / 3.0, 64).unwrap();
        assert!((v - 1.0 / 3.0_f64.sqrt()).abs() < 1e-10);
        let back = open_midpoint(|y: f64| 1.0 / y.sin().powi(2), 2.0 * PI / 3.0, PI / 2.0, 64).unwrap();
        assert_eq!(back, -v);
    }

    #[test]
    fn cumulative_reads_both_directions() {
        let c = CumulativeIntegral::new(|x: f64| x.cos(), 0.0, PI, 50, Sweep::Both);
        for r in [0.0, 0.3, 1.0, 2.5, PI] {
            assert!((c.left(r) - r.sin()).abs() < 1e-14);
            assert!((c.right(r) + r.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn right_only_skips_singular_cell() {
        let c = CumulativeIntegral::new(|x: f64| 1.0 / (x * x), 0.0, 1.0, 10, Sweep::RightOnly);
        for r in [0.01, 0.05, 0.5] {
            assert!((c.right(r) - (1.0 / r - 1.0)).abs() < 1e-9 * (1.0 / r));
        }
    }

    #[test]
    fn gauss_table_integrates_oscillatory_products() {
        let g = build_grid(0.0, PI, 201).unwrap();
        let t = GaussTable::on_grid(&g, 0.3, 2.9, 2);
        let f: Vec<f64> = t.nodes.iter().map(|x| (7.0 * x).sin()).collect();
        let h: Vec<f64> = t.nodes.iter().map(|x| (5.0 * x).sin()).collect();
        let anti = |x: f64| (2.0 * x).sin() / 4.0 - (12.0 * x).sin() / 24.0;
        assert!((t.inner(&f, &h) - (anti(2.9) - anti(0.3))).abs() < 1e-14);
    }
}
