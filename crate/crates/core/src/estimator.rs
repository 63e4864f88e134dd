//! Recovery of population spikes from sample eigenvalues by inverting the
//! spiked-model limit map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    AboveBulk,
    BelowBulk,
    InBulk,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::AboveBulk => "above-bulk",
            Side::BelowBulk => "below-bulk",
            Side::InBulk => "in-bulk",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeEstimate {
    /// 1-based position from the top, when produced from a spectrum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    pub lambda_obs: f64,
    pub c: f64,
    pub theta_sq_hat: Option<f64>,
    pub detectable: bool,
    pub side: Side,
}

/// Edges `((1−√c)², (1+√c)²)` of the Marchenko–Pastur bulk.
pub fn bulk_edges(c: f64) -> (f64, f64) {
    let rc = c.sqrt();
    ((1.0 - rc).powi(2), (1.0 + rc).powi(2))
}

/// Solves `θ⁴ − (λ+1−c)θ² + λ = 0` for the spike that would produce the
/// observed eigenvalue `λ`.
///
/// Above the bulk the larger root is taken, below it the smaller. Inside the
/// closed bulk interval (or anywhere below the top edge when `c ≥ 1`) the
/// spike is not identifiable.
pub fn invert_spike(lambda_obs: f64, c: f64) -> Result<SpikeEstimate> {
    if !(lambda_obs.is_finite() && lambda_obs >= 0.0) {
        return Err(Error::Domain(format!("lambda must be finite and >= 0, got {lambda_obs}")));
    }
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::Domain(format!("c must be finite and >= 0, got {c}")));
    }
    let (lo, hi) = bulk_edges(c);
    let side = if lambda_obs > hi {
        Side::AboveBulk
    } else if c < 1.0 && lambda_obs < lo {
        Side::BelowBulk
    } else {
        Side::InBulk
    };
    let theta_sq_hat = match side {
        Side::InBulk => None,
        _ => {
            let b = lambda_obs + 1.0 - c;
            let disc = (b * b - 4.0 * lambda_obs).max(0.0);
            let larger = 0.5 * (b + disc.sqrt());
            Some(if side == Side::AboveBulk {
                larger
            } else if larger > 0.0 {
                lambda_obs / larger
            } else {
                0.0
            })
        }
    };
    Ok(SpikeEstimate {
        rank: None,
        lambda_obs,
        c,
        theta_sq_hat,
        detectable: side != Side::InBulk,
        side,
    })
}

/// Divides the leading `r` eigenvalues by the mean `σ̂²` of the remaining
/// ones, so that a heteroscedastic noise floor is treated as homoscedastic.
pub fn heteroscedastic_normalize(sample_eigs: &[f64], r: usize) -> Result<(f64, Vec<f64>)> {
    if r >= sample_eigs.len() {
        return Err(Error::Parameter(format!(
            "spike count r = {r} must be below the number of eigenvalues {}",
            sample_eigs.len()
        )));
    }
    if sample_eigs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite eigenvalue".into()));
    }
    let rest = &sample_eigs[r..];
    let sigma_hat_sq = rest.iter().sum::<f64>() / rest.len() as f64;
    if sigma_hat_sq <= 0.0 {
        return Err(Error::Domain(format!(
            "noise level estimate must be positive, got {sigma_hat_sq}"
        )));
    }
    let rescaled = sample_eigs[..r].iter().map(|x| x / sigma_hat_sq).collect();
    Ok((sigma_hat_sq, rescaled))
}

/// Inverts the top `r_max` and bottom `r_max` eigenvalues with `c = p/n`.
/// Each eigenvalue is reported once, in descending order.
pub fn estimate_all(spectrum: &Spectrum, n: usize, r_max: usize) -> Result<Vec<SpikeEstimate>> {
    if n == 0 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    let p = spectrum.len();
    let c = p as f64 / n as f64;
    let mut ranks: Vec<usize> = (0..r_max.min(p)).collect();
    ranks.extend(p.saturating_sub(r_max)..p);
    ranks.sort_unstable();
    ranks.dedup();
    ranks
        .into_iter()
        .map(|k| {
            let mut est = invert_spike(spectrum.eigenvalues[k].max(0.0), c)?;
            est.rank = Some(k + 1);
            Ok(est)
        })
        .collect()
}

/// Reads eigenvalues from text with one value per line. Blank lines and
/// lines starting with `#` are skipped; a non-numeric first line is treated
/// as a header. The result is sorted in descending order.
pub fn parse_eigenvalues(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.split(',').next().unwrap_or("").trim();
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(_) => {
                return Err(Error::InvalidInput(format!("line {}: non-finite value", k + 1)))
            }
            Err(_) if out.is_empty() && k == 0 => continue,
            Err(_) => {
                return Err(Error::InvalidInput(format!(
                    "line {}: cannot parse '{field}' as a number",
                    k + 1
                )))
            }
        }
    }
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::lambda_theta_c;

    #[test]
    fn inversion_examples() {
        let e = invert_spike(16.0 / 3.0, 1.0).unwrap();
        assert_eq!(e.side, Side::AboveBulk);
        assert!((e.theta_sq_hat.unwrap() - 4.0).abs() < 1e-12);

        let e = invert_spike(3.9, 1.0).unwrap();
        assert_eq!(e.side, Side::InBulk);
        assert!(e.theta_sq_hat.is_none() && !e.detectable);

        let e = invert_spike(1.0 / 6.0, 0.25).unwrap();
        assert_eq!(e.side, Side::BelowBulk);
        let th = e.theta_sq_hat.unwrap();
        assert!((th - 0.25).abs() < 1e-12);
        assert!((lambda_theta_c(th, 0.25).unwrap().value - 1.0 / 6.0).abs() < 1e-10);
    }

    #[test]
    fn bulk_edges_are_closed() {
        assert_eq!(invert_spike(4.0, 1.0).unwrap().side, Side::InBulk);
        assert_eq!(invert_spike(0.25, 0.25).unwrap().side, Side::InBulk);
        assert_eq!(invert_spike(2.25, 0.25).unwrap().side, Side::InBulk);
        assert_eq!(invert_spike(0.1, 2.0).unwrap().side, Side::InBulk);
        assert_eq!(invert_spike(0.0, 1.0).unwrap().side, Side::InBulk);
        let zero = invert_spike(0.0, 0.25).unwrap();
        assert_eq!(zero.side, Side::BelowBulk);
        assert_eq!(zero.theta_sq_hat, Some(0.0));
        assert!(invert_spike(-1.0, 0.5).is_err());
        assert!(invert_spike(1.0, -0.5).is_err());
    }

    #[test]
    fn normalization_examples() {
        let (s, spikes) = heteroscedastic_normalize(&[1.0, 1.0, 1.0], 0).unwrap();
        assert_eq!(s, 1.0);
        assert!(spikes.is_empty());
        let (s, spikes) = heteroscedastic_normalize(&[8.0, 2.0, 2.0, 2.0], 1).unwrap();
        assert_eq!(s, 2.0);
        assert_eq!(spikes, vec![4.0]);
        assert!(heteroscedastic_normalize(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn degenerate_spectrum() {
        let spec = Spectrum {
            eigenvalues: vec![3.0],
            eigenvectors: None,
        };
        let all = estimate_all(&spec, 10, 1).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].rank, Some(1));
    }

    #[test]
    fn parses_csv() {
        let v = parse_eigenvalues("eigenvalue\n1.5\n\n# note\n4.0\n0.25, extra\n").unwrap();
        assert_eq!(v, vec![4.0, 1.5, 0.25]);
        assert!(parse_eigenvalues("1.0\nabc\n").is_err());
        assert!(parse_eigenvalues("1.0\nNaN\n").is_err());
    }
}
