//! Deterministic series accumulation: compensated sums, truncation
//! schedules, tail extrapolation and divergence classification.

use serde::{Deserialize, Serialize};

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvergenceClass {
    Absolute,
    #[serde(rename = "Conditional-Abel")]
    ConditionalAbel,
    Divergent,
    /// Vacuous comparison (no terms and nothing to compare against).
    Incomparable,
}

/// Truncation points `J, J/2, J/4, ...` (ascending), at most `max_len` of
/// them and none below `floor`.
pub fn doubling_schedule(j_max: usize, floor: usize, max_len: usize) -> Vec<usize> {
    let mut out = vec![j_max];
    let mut j = j_max;
    while out.len() < max_len && j / 2 >= floor.max(1) && j / 2 < j {
        j /= 2;
        out.push(j);
    }
    out.reverse();
    out
}

/// Partial sums of `term(j)` for `j = 1..=J_max`, recorded at each
/// schedule point. Terms are accumulated in ascending `j`.
pub fn partial_sums<F: FnMut(usize) -> f64>(schedule: &[usize], mut term: F) -> Vec<(usize, f64)> {
    let mut acc = CompensatedSum::new();
    let mut out = Vec::with_capacity(schedule.len());
    let mut next = 0;
    let j_max = schedule.last().copied().unwrap_or(0);
    for j in 1..=j_max {
        acc.add(term(j));
        while next < schedule.len() && schedule[next] == j {
            out.push((j, acc.value()));
            next += 1;
        }
    }
    out
}

/// Classification of a doubling sequence of partial sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailAnalysis {
    pub class: ConvergenceClass,
    /// Extrapolated limit (last partial sum when no extrapolation applies).
    pub value: f64,
    /// `|S(J) - S(J/2)|`, the doubling error proxy.
    pub tail_estimate: f64,
}

/// Increments over the last doublings that stay the same sign and do not
/// shrink flag the series as divergent.
const STALL_RATIO: f64 = 0.8;
const MIN_STALLED_INCREMENTS: usize = 3;

/// Classifies a sequence of partial sums taken on a doubling schedule and
/// extrapolates the tail. The tail is modelled as `a J^-p + b J^-(p+1)`,
/// with `p` read off the ratio of the last two increments and snapped to a
/// half-integer; two Richardson steps then remove both terms. Exponents far
/// from a half-integer fall back to Aitken's delta-squared.
pub fn analyze_tail(partials: &[(usize, f64)]) -> TailAnalysis {
    let values: Vec<f64> = partials.iter().map(|p| p.1).collect();
    let last = values.last().copied().unwrap_or(0.0);
    let increments: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let tail_estimate = increments.last().map(|d| d.abs()).unwrap_or(0.0);

    if is_stalled(&increments) {
        return TailAnalysis {
            class: ConvergenceClass::Divergent,
            value: last,
            tail_estimate,
        };
    }

    TailAnalysis {
        class: ConvergenceClass::Absolute,
        value: power_tail_limit(partials).unwrap_or(last),
        tail_estimate,
    }
}

const HALF_INTEGER_SNAP: f64 = 0.1;

fn power_tail_limit(partials: &[(usize, f64)]) -> Option<f64> {
    let n = partials.len();
    if n < 3 {
        return None;
    }
    let [(_, a), (jb, b), (jc, c)] = [partials[n - 3], partials[n - 2], partials[n - 1]];
    let (d1, d2) = (b - a, c - b);
    if d1 == 0.0 || d2 == 0.0 {
        return Some(c);
    }
    let q = d2 / d1;
    if !(q > 0.0 && q < 0.95) {
        return Some(aitken(a, b, c));
    }
    let step = ((jc as f64) / (jb as f64)).ln().max(f64::EPSILON);
    let fitted = -q.ln() / step;
    let snapped = (2.0 * fitted).round() / 2.0;
    if (fitted - snapped).abs() > HALF_INTEGER_SNAP || snapped <= 0.0 {
        return Some(aitken(a, b, c));
    }
    let p = snapped;
    let richardson = |pts: &[(usize, f64)], power: f64| -> Vec<(usize, f64)> {
        pts.windows(2)
            .map(|w| {
                let f = (w[1].0 as f64 / w[0].0 as f64).powf(power);
                (w[1].0, (f * w[1].1 - w[0].1) / (f - 1.0))
            })
            .collect()
    };
    let first = richardson(&partials[n.saturating_sub(4)..], p);
    if first.len() < 3 {
        return first.last().map(|v| v.1);
    }
    let second = richardson(&first[first.len() - 2..], p + 1.0);
    second.last().map(|v| v.1)
}

fn is_stalled(increments: &[f64]) -> bool {
    let window = &increments[increments.len().saturating_sub(5)..];
    if window.len() < MIN_STALLED_INCREMENTS {
        return false;
    }
    let scale = window.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    if scale == 0.0 {
        return false;
    }
    let same_sign = window.iter().all(|d| d.signum() == window[0].signum() && *d != 0.0);
    same_sign
        && window
            .windows(2)
            .all(|w| w[1].abs() >= STALL_RATIO * w[0].abs())
}

/// Aitken extrapolation of a geometrically converging triple; falls back
/// to the last value when the ratio is not safely below one.
pub fn aitken(a: f64, b: f64, c: f64) -> f64 {
    let d1 = b - a;
    let d2 = c - b;
    if d1 == 0.0 || d2 == 0.0 {
        return c;
    }
    let q = d2 / d1;
    if q.abs() >= 0.95 {
        return c;
    }
    c + d2 * q / (1.0 - q)
}
