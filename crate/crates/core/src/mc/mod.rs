//! Seeded Monte Carlo harness: empirical tail frequencies against the
//! deviation bounds, fluctuation-rate sweeps, and audits of the auxiliary
//! inequalities.
//!
//! Every replicate draws from its own counter-based stream, so results do not
//! depend on the number of worker threads.

mod audit;
mod sweep;
mod tail;
mod wilson;

pub use audit::{
    chi_square_tail_check, interlacing_audit, interlacing_violation, ChiSquareReport, ChiSquareRow,
    InterlacingReport,
};
pub use sweep::{convergence_sweep, SweepPlan, SweepReport, SweepRow};
pub use tail::{run_tail, ExperimentPlan, TailReport, TailRow};
pub use wilson::{wilson_interval, WILSON_Z95};

/// Formats `x` with 12 significant digits, in plain notation for moderate
/// exponents and scientific notation otherwise. Trailing zeros are dropped.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Linear-interpolation quantile of sorted data, `q ∈ [0, 1]`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(2.5), "2.5");
        assert_eq!(fmt_sig(16.0 / 3.0), "5.33333333333");
        assert_eq!(fmt_sig(1.0 / 6.0), "0.166666666667");
        assert_eq!(fmt_sig(-0.011108996538242306), "-0.0111089965382");
        assert_eq!(fmt_sig(1e-20), "1e-20");
        assert_eq!(fmt_sig(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(9.99999999999951), "10");
        assert_eq!(fmt_sig(624.0), "624");
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.5), 2.5);
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }
}
