//! Abel-regularized sums `S(eps) = sum_j t_j exp(-eps (E_j - E_n))`,
//! extrapolated to `eps -> 0`.
//!
//! For point-evaluated eigenfunction series the damped sums approach their
//! limit like `sqrt(eps)`, so the extrapolation polynomial is built in
//! `sqrt(eps)` rather than `eps`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summation::CompensatedSum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbelSchedule {
    /// Strictly decreasing, positive.
    pub epsilons: Vec<f64>,
    pub extrapolation_order: usize,
}

/// Largest admissible final damping.
pub const MAX_FINAL_EPSILON: f64 = 0.02;
/// Damping at the truncation point must be below this.
pub const TRUNCATION_DAMPING: f64 = 1e-12;
/// Successive `|S|` ratios above this flag growth without bound.
const GROWTH_RATIO: f64 = 2.0;

impl Default for AbelSchedule {
    fn default() -> Self {
        Self {
            epsilons: vec![0.16, 0.08, 0.04, 0.02],
            extrapolation_order: 3,
        }
    }
}

impl AbelSchedule {
    pub fn validate(&self) -> Result<()> {
        let e = &self.epsilons;
        if e.len() < 3 {
            return Err(Error::InvalidArgument("Abel schedule needs at least 3 epsilons".into()));
        }
        if e.iter().any(|v| !(v.is_finite() && *v > 0.0)) || e.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument(
                "Abel epsilons must be positive and strictly decreasing".into(),
            ));
        }
        if e[e.len() - 1] > MAX_FINAL_EPSILON {
            return Err(Error::InvalidArgument(format!(
                "final Abel epsilon must be at most {MAX_FINAL_EPSILON}"
            )));
        }
        if self.extrapolation_order == 0 || self.extrapolation_order >= e.len() {
            return Err(Error::InvalidArgument(format!(
                "extrapolation order must lie in 1..{}",
                e.len()
            )));
        }
        Ok(())
    }

    pub fn smallest(&self) -> f64 {
        self.epsilons.last().copied().unwrap_or(MAX_FINAL_EPSILON)
    }
}

/// One series term with its level gap `E_j - E_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbelTerm {
    pub gap: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbelOutcome {
    pub value: f64,
    /// `(eps, S(eps))` in schedule order.
    pub table: Vec<(f64, f64)>,
    /// Extrapolants of order `1..=extrapolation_order`.
    pub orders: Vec<f64>,
    /// `|orders[last] - orders[last - 1]|`.
    pub order_spread: f64,
    pub divergent: bool,
}

/// Abel sum of `terms` under `schedule`.
///
/// Requires the damping of the largest gap at the smallest epsilon to be
/// below [`TRUNCATION_DAMPING`]; otherwise the truncation itself would
/// bias the limit.
pub fn abel_sum(terms: &[AbelTerm], schedule: &AbelSchedule) -> Result<AbelOutcome> {
    schedule.validate()?;
    let eps_min = schedule.smallest();
    let needed_gap = -TRUNCATION_DAMPING.ln() / eps_min;
    let max_gap = terms.iter().fold(0.0_f64, |m, t| m.max(t.gap));
    if max_gap < needed_gap {
        return Err(Error::InsufficientStates {
            requested: estimate_needed(terms, needed_gap),
            available: terms.len(),
        });
    }

    let table: Vec<(f64, f64)> = schedule
        .epsilons
        .iter()
        .map(|&eps| {
            let mut acc = CompensatedSum::new();
            for t in terms {
                acc.add(t.value * (-eps * t.gap).exp());
            }
            (eps, acc.value())
        })
        .collect();

    let divergent = table
        .windows(2)
        .all(|w| w[0].1.abs() > 0.0 && w[1].1.abs() / w[0].1.abs() > GROWTH_RATIO);

    let order = schedule.extrapolation_order;
    let orders: Vec<f64> = (1..=order)
        .map(|k| {
            let pts = &table[table.len() - (k + 1)..];
            let xs: Vec<f64> = pts.iter().map(|p| p.0.sqrt()).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
            neville_at_zero(&xs, &ys)
        })
        .collect();
    let value = orders[order - 1];
    let order_spread = if order >= 2 {
        (orders[order - 1] - orders[order - 2]).abs()
    } else {
        (table[table.len() - 1].1 - value).abs()
    };
    Ok(AbelOutcome {
        value,
        table,
        orders,
        order_spread,
        divergent,
    })
}

/// Rough count of terms needed to reach `gap`, extrapolating the last two
/// gaps linearly in the term index.
fn estimate_needed(terms: &[AbelTerm], gap: f64) -> usize {
    let n = terms.len();
    if n < 2 {
        return n + 1;
    }
    let slope = terms[n - 1].gap - terms[n - 2].gap;
    if slope <= 0.0 {
        return n + 1;
    }
    n + ((gap - terms[n - 1].gap) / slope).ceil().max(1.0) as usize
}

/// Value at 0 of the interpolating polynomial through `(xs, ys)`.
fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let m = xs.len();
    for level in 1..m {
        for i in 0..m - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neville_recovers_polynomials() {
        let xs = [0.4, 0.3, 0.2, 0.1];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - x + 3.0 * x * x - x * x * x).collect();
        assert!((neville_at_zero(&xs, &ys) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn schedule_validation() {
        assert!(AbelSchedule::default().validate().is_ok());
        let short = AbelSchedule { epsilons: vec![0.1, 0.01], extrapolation_order: 1 };
        assert!(short.validate().is_err());
        let coarse = AbelSchedule { epsilons: vec![0.4, 0.2, 0.1], extrapolation_order: 2 };
        assert!(coarse.validate().is_err());
        let rising = AbelSchedule { epsilons: vec![0.01, 0.02, 0.015], extrapolation_order: 2 };
        assert!(rising.validate().is_err());
    }

    #[test]
    fn absolutely_convergent_series_is_unchanged() {
        // sum_{j>=2} (-1)^j / j^2 = 1 - pi^2/12, level gaps j^2 - 1
        let terms: Vec<AbelTerm> = (2..=400)
            .map(|j| {
                let jf = j as f64;
                AbelTerm {
                    gap: jf * jf - 1.0,
                    value: if j % 2 == 0 { 1.0 } else { -1.0 } / (jf * jf),
                }
            })
            .collect();
        let out = abel_sum(&terms, &AbelSchedule::default()).unwrap();
        let plain: f64 = terms.iter().map(|t| t.value).sum();
        assert!((out.value - plain).abs() < 1e-3, "{} vs {}", out.value, plain);
        assert!(!out.divergent);
    }

    #[test]
    fn short_spectrum_is_rejected() {
        let terms: Vec<AbelTerm> = (1..20).map(|j| AbelTerm { gap: j as f64, value: 1.0 }).collect();
        match abel_sum(&terms, &AbelSchedule::default()) {
            Err(Error::InsufficientStates { requested, available }) => {
                assert_eq!(available, 19);
                assert!(requested > 1300);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn growing_sums_are_divergent() {
        // S(eps) ~ 1/eps^2 quadruples on each halving
        let terms: Vec<AbelTerm> = (1..=4000)
            .map(|j| AbelTerm { gap: j as f64, value: j as f64 })
            .collect();
        assert!(abel_sum(&terms, &AbelSchedule::default()).unwrap().divergent);
    }
}
