//! Normalized Hermite functions
//! `psi_m(x) = (2^m m! sqrt(pi))^{-1/2} H_m(x) exp(-x^2/2)`
//! via the three-term recurrence on the normalized functions themselves,
//! with running rescaling so large orders at large |x| neither overflow
//! nor underflow before the Gaussian factor is applied.

const RESCALE_ABOVE: f64 = 1e150;

/// Values and first derivatives of `psi_0 .. psi_{count-1}` at `x`.
pub fn hermite_functions(x: f64, count: usize) -> Vec<(f64, f64)> {
    if count == 0 {
        return Vec::new();
    }
    let mut scaled = Vec::with_capacity(count);
    let mut log_scale = Vec::with_capacity(count);
    let mut log_acc = 0.0_f64;

    let mut prev = 0.0_f64;
    let mut cur = std::f64::consts::PI.powf(-0.25);
    scaled.push(cur);
    log_scale.push(0.0);
    for m in 0..count.saturating_sub(1) {
        let mf = m as f64;
        let next = (2.0 / (mf + 1.0)).sqrt() * x * cur - (mf / (mf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_ABOVE {
            prev /= RESCALE_ABOVE;
            cur /= RESCALE_ABOVE;
            log_acc += RESCALE_ABOVE.ln();
        }
        scaled.push(cur);
        log_scale.push(log_acc);
    }

    let gauss_log = -0.5 * x * x;
    let values: Vec<f64> = scaled
        .iter()
        .zip(&log_scale)
        .map(|(&s, &l)| if s == 0.0 { 0.0 } else { s * (l + gauss_log).exp() })
        .collect();
    (0..count)
        .map(|m| {
            let lower = if m > 0 { (2.0 * m as f64).sqrt() * values[m - 1] } else { 0.0 };
            (values[m], lower - x * values[m])
        })
        .collect()
}
