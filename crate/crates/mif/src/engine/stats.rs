/// Two-sided 95% Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054; // 97.5th percentile of N(0, 1)
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Half-width of the 95% Wilson interval.
pub fn wilson_halfwidth(successes: u64, trials: u64) -> f64 {
    let (lo, hi) = wilson_interval(successes, trials);
    (hi - lo) / 2.0
}
