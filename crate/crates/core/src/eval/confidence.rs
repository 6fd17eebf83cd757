use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::normal_cdf;

/// Percent probability that `log10 O_u <= log10 xi` under a Gaussian fit
/// `N(mean_log10, sd_log10^2)` of the log-outage.
pub fn confidence_value(xi: f64, mean_log10: f64, sd_log10: f64) -> f64 {
    let threshold = xi.log10();
    if sd_log10 == 0.0 {
        return if mean_log10 <= threshold { 100.0 } else { 0.0 };
    }
    100.0 * normal_cdf((threshold - mean_log10) / sd_log10)
}

/// Gaussian fit of `log10 O_u` across realizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleFit {
    pub mean_log10: f64,
    pub sd_log10: f64,
    /// Percent.
    pub confidence_value: f64,
    pub outage_target: f64,
    pub realizations_used: usize,
    /// Zero-failure estimates, left out of the log fit.
    pub realizations_excluded: usize,
}

/// Moment-matching fit (sample mean and `n - 1` standard deviation) of
/// `log10` of the nonzero outages.
pub fn fit_log10_outage(outages: &[f64], xi: f64) -> Result<EnsembleFit> {
    let logs: Vec<f64> = outages.iter().filter(|&&o| o > 0.0).map(|o| o.log10()).collect();
    let excluded = outages.len() - logs.len();
    if logs.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no nonzero outage among {} realizations",
            outages.len()
        )));
    }
    let n = logs.len() as f64;
    let mean = logs.iter().sum::<f64>() / n;
    let sd = if logs.len() > 1 {
        (logs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(EnsembleFit {
        mean_log10: mean,
        sd_log10: sd,
        confidence_value: confidence_value(xi, mean, sd),
        outage_target: xi,
        realizations_used: logs.len(),
        realizations_excluded: excluded,
    })
}
