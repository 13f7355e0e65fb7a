//! Lowest eigenpairs of a real symmetric tridiagonal matrix by Sturm
//! bisection followed by inverse iteration.

use crate::error::{Error, Result};

pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
}

const MAX_INVERSE_STEPS: usize = 12;
/// Vectors whose eigenvalues lie within this fraction of the matrix norm
/// are re-orthogonalized against each other.
const CLUSTER_FRACTION: f64 = 1e-3;
const MAX_CLUSTER_NEIGHBOURS: usize = 16;

impl SymTridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn norm(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE.sqrt() * self.norm().max(1.0);
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based), bisected to machine precision.
    pub fn eigenvalue(&self, k: usize, lower_hint: f64) -> f64 {
        let (glo, ghi) = self.gershgorin();
        let mut lo = glo.max(lower_hint.min(ghi));
        if self.sturm_count(lo) > k {
            lo = glo;
        }
        let mut hi = ghi;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Lowest `count` eigenpairs, ascending, unit-norm vectors (Euclidean).
    pub fn lowest(&self, count: usize) -> Result<Vec<Eigenpair>> {
        let n = self.len();
        if count > n {
            return Err(Error::ConvergenceFailure(format!(
                "requested {count} eigenpairs of a {n}x{n} operator"
            )));
        }
        let norm = self.norm();
        let mut pairs: Vec<Eigenpair> = Vec::with_capacity(count);
        let mut rng = XorShift(0x9E37_79B9_7F4A_7C15);
        let mut hint = f64::NEG_INFINITY;
        for k in 0..count {
            let value = self.eigenvalue(k, hint);
            hint = value;
            if let Some(prev) = pairs.last() {
                if value <= prev.value {
                    return Err(Error::ConvergenceFailure(format!(
                        "eigenvalues {} and {} are not separated",
                        k - 1,
                        k
                    )));
                }
            }
            let neighbours: Vec<&Eigenpair> = pairs
                .iter()
                .rev()
                .take_while(|p| value - p.value < CLUSTER_FRACTION * norm)
                .take(MAX_CLUSTER_NEIGHBOURS)
                .collect();
            let vector = self.inverse_iteration(value, norm, &neighbours, &mut rng)?;
            pairs.push(Eigenpair { value, vector });
        }
        Ok(pairs)
    }

    fn inverse_iteration(
        &self,
        shift: f64,
        norm: f64,
        neighbours: &[&Eigenpair],
        rng: &mut XorShift,
    ) -> Result<Vec<f64>> {
        let n = self.len();
        let lu = ShiftedLu::factor(self, shift, norm);
        let mut x: Vec<f64> = (0..n).map(|_| rng.next_unit()).collect();
        let tol = 64.0 * f64::EPSILON * norm.max(1.0) * (n as f64).sqrt();
        for step in 0..MAX_INVERSE_STEPS {
            lu.solve(&mut x);
            for nb in neighbours {
                let overlap: f64 = x.iter().zip(&nb.vector).map(|(a, b)| a * b).sum();
                for (xi, vi) in x.iter_mut().zip(&nb.vector) {
                    *xi -= overlap * vi;
                }
            }
            let len = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(len.is_finite() && len > 0.0) {
                return Err(Error::ConvergenceFailure(format!(
                    "inverse iteration broke down at eigenvalue {shift}"
                )));
            }
            for v in x.iter_mut() {
                *v /= len;
            }
            if step >= 1 && self.residual(&x, shift) <= tol {
                return Ok(x);
            }
        }
        Err(Error::ConvergenceFailure(format!(
            "inverse iteration did not converge at eigenvalue {shift}"
        )))
    }

    fn residual(&self, x: &[f64], shift: f64) -> f64 {
        let n = self.len();
        let mut worst = 0.0_f64;
        for i in 0..n {
            let mut y = (self.diag[i] - shift) * x[i];
            if i > 0 {
                y += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                y += self.off[i] * x[i + 1];
            }
            worst = worst.max(y.abs());
        }
        worst
    }
}

/// LU factorization of `T - shift*I` with partial pivoting (second
/// superdiagonal fill-in), following the usual tridiagonal scheme.
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &SymTridiagonal, shift: f64, norm: f64) -> Self {
        let n = t.len();
        let mut dl = t.off.clone();
        let mut d: Vec<f64> = t.diag.iter().map(|v| v - shift).collect();
        let mut du = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        let tiny = f64::EPSILON * norm.max(f64::MIN_POSITIVE);
        for v in d.iter_mut() {
            if v.abs() < tiny {
                *v = if *v < 0.0 { -tiny } else { tiny };
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Fixed-seed generator for start vectors; keeps solves reproducible.
struct XorShift(u64);

impl XorShift {
    fn next_unit(&mut self) -> f64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiagonal {
        SymTridiagonal {
            diag: vec![2.0; n],
            off: vec![-1.0; n - 1],
        }
    }

    #[test]
    fn discrete_laplacian_spectrum() {
        let n = 50;
        let t = laplacian(n);
        let pairs = t.lowest(n).unwrap();
        for (k, p) in pairs.iter().enumerate() {
            let theta = (k + 1) as f64 * std::f64::consts::PI / (2.0 * (n + 1) as f64);
            let exact = 4.0 * theta.sin().powi(2);
            assert!((p.value - exact).abs() < 1e-13, "k={k}");
        }
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = pairs[i].vector.iter().zip(&pairs[j].vector).map(|(a, b)| a * b).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-12, "({i},{j}) {dot}");
            }
        }
    }

    #[test]
    fn sturm_count_brackets() {
        let t = laplacian(10);
        assert_eq!(t.sturm_count(-1.0), 0);
        assert_eq!(t.sturm_count(5.0), 10);
        assert_eq!(t.sturm_count(2.0 - 1e-9), 5);
    }

    #[test]
    fn too_many_pairs_is_an_error() {
        assert!(matches!(laplacian(5).lowest(6), Err(Error::ConvergenceFailure(_))));
    }
}
