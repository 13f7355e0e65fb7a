use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform discretization of `[x0, x1]` with `n_points` samples, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x0: f64,
    pub x1: f64,
    pub n_points: usize,
    pub h: f64,
}

/// Builds a uniform grid. Point `k` is `x0 + k*h`; the last point is pinned to `x1`.
pub fn build_grid(x0: f64, x1: f64, n_points: usize) -> Result<Grid> {
    if !(x0.is_finite() && x1.is_finite()) || x1 <= x0 {
        return Err(Error::InvalidDomain(format!(
            "need finite x1 > x0, got [{x0}, {x1}]"
        )));
    }
    if n_points < 3 {
        return Err(Error::InvalidDomain(format!(
            "need at least 3 grid points, got {n_points}"
        )));
    }
    let h = (x1 - x0) / (n_points - 1) as f64;
    Ok(Grid {
        x0,
        x1,
        n_points,
        h,
    })
}

impl Grid {
    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        if k + 1 == self.n_points {
            self.x1
        } else {
            self.x0 + k as f64 * self.h
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.point(k)).collect()
    }

    pub fn last(&self) -> usize {
        self.n_points - 1
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.x0 && r <= self.x1
    }

    pub fn check_contains(&self, r: f64) -> Result<()> {
        if self.contains(r) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                point: r,
                x0: self.x0,
                x1: self.x1,
            })
        }
    }

    /// Index of the cell `[x_k, x_{k+1}]` holding `r` (clamped to the last cell).
    pub fn cell_of(&self, r: f64) -> usize {
        let t = ((r - self.x0) / self.h).floor();
        if t <= 0.0 {
            0
        } else {
            (t as usize).min(self.n_points - 2)
        }
    }

    /// Grid index of `r` when it coincides with a sample to within a few ulps.
    pub fn index_of(&self, r: f64) -> Option<usize> {
        let t = (r - self.x0) / self.h;
        let k = t.round();
        if k < 0.0 || k as usize >= self.n_points {
            return None;
        }
        let k = k as usize;
        let tol = 8.0 * f64::EPSILON * self.x0.abs().max(self.x1.abs()).max(self.h);
        ((self.point(k) - r).abs() <= tol).then_some(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn five_points_on_zero_pi() {
        let g = build_grid(0.0, PI, 5).unwrap();
        let expected = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI];
        for (p, e) in g.points().iter().zip(expected) {
            assert!((p - e).abs() < 1e-15);
        }
        assert_eq!(g.point(4), PI);
    }

    #[test]
    fn symmetric_spacing() {
        let g = build_grid(-8.0, 8.0, 2001).unwrap();
        assert!((g.h - 0.008).abs() < 1e-16);
        assert_eq!(g.point(1000), 0.0);
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(matches!(build_grid(0.0, PI, 2), Err(Error::InvalidDomain(_))));
        assert!(matches!(build_grid(1.0, 1.0, 10), Err(Error::InvalidDomain(_))));
        assert!(matches!(build_grid(2.0, 1.0, 10), Err(Error::InvalidDomain(_))));
    }

    #[test]
    fn cell_lookup() {
        let g = build_grid(0.0, 1.0, 11).unwrap();
        assert_eq!(g.cell_of(0.0), 0);
        assert_eq!(g.cell_of(0.55), 5);
        assert_eq!(g.cell_of(1.0), 9);
        assert_eq!(g.index_of(0.3), Some(3));
        assert_eq!(g.index_of(0.35), None);
    }
}
