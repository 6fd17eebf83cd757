use serde::Serialize;

use super::student_t::student_t_quantile;
use crate::error::{Error, Result};
use crate::linalg::{inner_abs2, CMatrix, CVector};

/// Chernoff-bound outage certificate of a precoder over the URLLC history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutageCertificate {
    /// Sample mean of `exp(r (target - sinr_j))`.
    pub mu_hat: f64,
    /// Sample standard deviation of the same terms.
    pub s_hat: f64,
    /// Upper confidence bound `mu_hat - s_hat / sqrt(L) * F^{-1}(1 - alpha)`.
    pub mu_ub: f64,
    pub r: f64,
    pub dof: usize,
    /// Fraction of history samples with SINR below the target.
    pub empirical_outage: f64,
    /// Every sample satisfied `1{sinr_j < target} <= exp(r (target - sinr_j))`
    /// and `empirical_outage <= mu_hat`.
    pub domination_holds: bool,
}

/// Evaluates certificates for a fixed target, `r`, noise power and confidence.
/// The Student-t quantile is computed once for the configured history length.
#[derive(Debug, Clone)]
pub struct ChernoffCertifier {
    target: f64,
    r: f64,
    noise_power: f64,
    confidence: f64,
    history_len: usize,
    t_quantile: f64,
}

impl ChernoffCertifier {
    pub fn new(target: f64, r: f64, noise_power: f64, confidence: f64, history_len: usize) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("Chernoff r must be > 0, got {r}")));
        }
        if !(confidence > 0.0 && confidence < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "confidence must lie in (0, 1), got {confidence}"
            )));
        }
        if history_len < 2 {
            return Err(Error::InsufficientHistory(history_len));
        }
        let t_quantile = student_t_quantile(1.0 - confidence, (history_len - 1) as f64)?;
        Ok(Self {
            target,
            r,
            noise_power,
            confidence,
            history_len,
            t_quantile,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// URLLC SINR `|h^H w_0|^2 / (sum_{i>0} |h^H w_i|^2 + noise)` for one sample.
    pub fn urllc_sinr(&self, h: &CVector, w: &CMatrix) -> f64 {
        let m = w.nrows();
        let hs = h.as_slice();
        let mut cols = w.as_slice().chunks_exact(m);
        let signal = inner_abs2(hs, cols.next().unwrap_or(&[]));
        let interference: f64 = cols.map(|c| inner_abs2(hs, c)).sum();
        signal / (interference + self.noise_power)
    }

    /// Certificate of `w` (column 0 = URLLC) against each history sample.
    pub fn certify(&self, history: &[CVector], w: &CMatrix) -> Result<OutageCertificate> {
        if w.ncols() == 0 {
            return Err(Error::DimensionMismatch("precoder has no columns".into()));
        }
        if let Some(h) = history.iter().find(|h| h.len() != w.nrows()) {
            return Err(Error::DimensionMismatch(format!(
                "history vector of length {} against {} antennas",
                h.len(),
                w.nrows()
            )));
        }
        let sinrs: Vec<f64> = history.iter().map(|h| self.urllc_sinr(h, w)).collect();
        self.certify_sinrs(&sinrs)
    }

    /// Certificate from precomputed per-sample URLLC SINRs.
    pub fn certify_sinrs(&self, sinrs: &[f64]) -> Result<OutageCertificate> {
        let l = sinrs.len();
        if l < 2 {
            return Err(Error::InsufficientHistory(l));
        }
        let t_quantile = if l == self.history_len {
            self.t_quantile
        } else {
            student_t_quantile(1.0 - self.confidence, (l - 1) as f64)?
        };

        let mut domination_holds = true;
        let mut outages = 0usize;
        let terms: Vec<f64> = sinrs
            .iter()
            .map(|&g| {
                let term = (self.r * (self.target - g)).exp();
                if g < self.target {
                    outages += 1;
                    domination_holds &= term >= 1.0;
                }
                term
            })
            .collect();
        let n = l as f64;
        let mu_hat = terms.iter().sum::<f64>() / n;
        let var = terms.iter().map(|t| (t - mu_hat).powi(2)).sum::<f64>() / (n - 1.0);
        let s_hat = var.sqrt();
        let mu_ub = if s_hat == 0.0 {
            mu_hat
        } else {
            mu_hat - s_hat / n.sqrt() * t_quantile
        };
        let empirical_outage = outages as f64 / n;
        domination_holds &= empirical_outage <= mu_hat;
        debug_assert!(domination_holds, "Chernoff domination violated");
        Ok(OutageCertificate {
            mu_hat,
            s_hat,
            mu_ub,
            r: self.r,
            dof: l - 1,
            empirical_outage,
            domination_holds,
        })
    }
}

/// One-shot certificate; see [`ChernoffCertifier`].
pub fn chernoff_certificate(
    history: &[CVector],
    w: &CMatrix,
    target: f64,
    r: f64,
    noise_power: f64,
    confidence: f64,
) -> Result<OutageCertificate> {
    ChernoffCertifier::new(target, r, noise_power, confidence, history.len())?.certify(history, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Complex64;
    use proptest::prelude::*;

    fn certifier(target: f64, r: f64, l: usize) -> ChernoffCertifier {
        ChernoffCertifier::new(target, r, 1.0, 0.99, l).unwrap()
    }

    #[test]
    fn boundary_sinr_gives_unit_bound() {
        let g = 0.0718;
        let c = certifier(g, 10.0, 6).certify_sinrs(&[g; 6]).unwrap();
        assert_eq!(c.mu_hat, 1.0);
        assert_eq!(c.s_hat, 0.0);
        assert_eq!(c.mu_ub, 1.0);
        let c2 = certifier(g, 10.0, 2).certify_sinrs(&[g; 2]).unwrap();
        assert_eq!(c2.mu_ub, 1.0);
        assert_eq!(c2.dof, 1);
    }

    #[test]
    fn four_sample_hand_example() {
        let g = 0.3;
        let c = certifier(g, 1.0, 4)
            .certify_sinrs(&[2.0 * g, 2.0 * g, 2.0 * g, 0.5 * g])
            .unwrap();
        let expected = (3.0 * (-g).exp() + (g / 2.0).exp()) / 4.0;
        assert!((c.mu_hat - expected).abs() < 1e-15);
        let terms = [(-g).exp(), (-g).exp(), (-g).exp(), (g / 2.0).exp()];
        let var = terms.iter().map(|t| (t - expected).powi(2)).sum::<f64>() / 3.0;
        assert!((c.s_hat - var.sqrt()).abs() < 1e-15);
        assert_eq!(c.empirical_outage, 0.25);
    }

    #[test]
    fn upper_bound_sign_with_high_confidence() {
        // alpha = 0.99 -> F^{-1}(0.01) < 0, so the bound sits above the mean.
        let cert = certifier(1.0, 2.0, 5);
        assert!(cert.t_quantile < 0.0);
        let c = cert.certify_sinrs(&[1.5, 2.0, 0.7, 3.0, 1.1]).unwrap();
        let expected = c.mu_hat + cert.t_quantile.abs() * c.s_hat / 5f64.sqrt();
        assert!((c.mu_ub - expected).abs() < 1e-15);
        assert!(c.mu_ub > c.mu_hat);
    }

    #[test]
    fn certify_matches_scalar_route() {
        let w = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.3),
                Complex64::new(0.2, 0.0),
                Complex64::new(0.5, 0.0),
            ],
        );
        let hist: Vec<CVector> = (0..5)
            .map(|j| CVector::from_vec(vec![Complex64::new(1.0, j as f64 * 0.1), Complex64::new(0.3, -0.2)]))
            .collect();
        let cert = ChernoffCertifier::new(0.5, 3.0, 0.1, 0.99, 5).unwrap();
        let sinrs: Vec<f64> = hist
            .iter()
            .map(|h| {
                let s = (h.adjoint() * w.column(0))[0].norm_sqr();
                let i = (h.adjoint() * w.column(1))[0].norm_sqr();
                s / (i + 0.1)
            })
            .collect();
        let a = cert.certify(&hist, &w).unwrap();
        let b = cert.certify_sinrs(&sinrs).unwrap();
        assert!((a.mu_hat - b.mu_hat).abs() < 1e-14 && (a.mu_ub - b.mu_ub).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ChernoffCertifier::new(1.0, 0.0, 1.0, 0.99, 10).is_err());
        assert!(ChernoffCertifier::new(1.0, -1.0, 1.0, 0.99, 10).is_err());
        assert!(ChernoffCertifier::new(1.0, 1.0, 1.0, 0.99, 1).is_err());
    }

    proptest! {
        #[test]
        fn domination_and_bound_order(
            sinrs in prop::collection::vec(0.0f64..5.0, 2..60),
            target in 0.01f64..2.0,
            r in 0.01f64..50.0,
        ) {
            let c = certifier(target, r, sinrs.len()).certify_sinrs(&sinrs).unwrap();
            prop_assert!(c.domination_holds);
            prop_assert!(c.empirical_outage <= c.mu_hat);
            prop_assert!(c.mu_ub >= c.mu_hat);
        }

        #[test]
        fn permutation_invariance(sinrs in prop::collection::vec(0.0f64..5.0, 2..40), seed in any::<u64>()) {
            let mut shuffled = sinrs.clone();
            let n = shuffled.len();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (s >> 33) as usize % (i + 1));
            }
            let cert = certifier(0.5, 4.0, n);
            let a = cert.certify_sinrs(&sinrs).unwrap();
            let b = cert.certify_sinrs(&shuffled).unwrap();
            prop_assert!((a.mu_hat - b.mu_hat).abs() <= 1e-12 * a.mu_hat.max(1.0));
            prop_assert!((a.s_hat - b.s_hat).abs() <= 1e-9 * a.s_hat.max(1e-3));
        }

        #[test]
        fn exponent_scale_invariance(sinrs in prop::collection::vec(0.0f64..5.0, 2..40), scale in 0.01f64..100.0) {
            let a = certifier(0.5, 4.0, sinrs.len()).certify_sinrs(&sinrs).unwrap();
            let scaled: Vec<f64> = sinrs.iter().map(|g| g * scale).collect();
            let b = certifier(0.5 * scale, 4.0 / scale, sinrs.len()).certify_sinrs(&scaled).unwrap();
            prop_assert!((a.mu_hat - b.mu_hat).abs() <= 1e-10 * a.mu_hat);
        }
    }
}
