/// Two-sided 95% standard normal quantile.
pub const WILSON_Z95: f64 = 1.959963984540054;

/// Wilson score interval `(lo, hi)` for `hits` successes in `trials`.
pub fn wilson_interval(hits: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // The limits are exactly 0 and 1 at the extremes; rounding leaves ~1e-19.
    let lo = if hits == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if hits == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{Beta, ContinuousCDF};

    /// Exact Clopper–Pearson limits from beta quantiles.
    fn clopper_pearson(k: usize, n: usize) -> (f64, f64) {
        let a = 0.025;
        let lo = if k == 0 {
            0.0
        } else {
            Beta::new(k as f64, (n - k + 1) as f64).unwrap().inverse_cdf(a)
        };
        let hi = if k == n {
            1.0
        } else {
            Beta::new((k + 1) as f64, (n - k) as f64).unwrap().inverse_cdf(1.0 - a)
        };
        (lo, hi)
    }

    #[test]
    fn textbook_values() {
        let (lo, hi) = wilson_interval(5, 10, WILSON_Z95);
        assert!((lo - 0.2366).abs() < 1e-4 && (hi - 0.7634).abs() < 1e-4);
        let (lo, hi) = wilson_interval(0, 10, WILSON_Z95);
        assert!(lo == 0.0 && (hi - 0.2775).abs() < 1e-4);
    }

    #[test]
    fn close_to_exact_binomial_limits() {
        for &(k, n, tol) in &[
            (0usize, 10_000usize, 4e-4),
            (3, 10_000, 5e-4),
            (50, 1_000, 6e-3),
            (500, 1_000, 2e-3),
            (9_990, 10_000, 5e-4),
        ] {
            let (wl, wh) = wilson_interval(k, n, WILSON_Z95);
            let (cl, ch) = clopper_pearson(k, n);
            assert!((wl - cl).abs() < tol, "lower ({k}, {n}): {wl} vs {cl}");
            assert!((wh - ch).abs() < tol, "upper ({k}, {n}): {wh} vs {ch}");
            // Both intervals contain the point estimate.
            let p = k as f64 / n as f64;
            assert!(wl <= p && p <= wh && cl <= p && p <= ch);
        }
    }
}
