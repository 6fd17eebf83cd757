use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{covariance_factor, repair_psd, standard_complex_normal, CMatrix, CVector};

/// Sample mean and (PSD-repaired) sample covariance of the URLLC history,
/// together with a factor `A`, `C = A A^H`, used for synthesis.
#[derive(Debug, Clone)]
pub struct ChannelStats {
    pub mean: CVector,
    pub covariance: CMatrix,
    pub sample_count: usize,
    /// Smallest eigenvalue of the symmetrized covariance before clamping.
    pub min_eigenvalue_before_repair: f64,
    factor: CMatrix,
}

/// `m = (1/L) sum h_j`, `C = (1/(L-1)) sum (h_j - m)(h_j - m)^H`.
pub fn channel_stats(history: &[CVector]) -> Result<ChannelStats> {
    let l = history.len();
    if l < 2 {
        return Err(Error::InsufficientHistory(l));
    }
    let m = history[0].len();
    if let Some(bad) = history.iter().find(|h| h.len() != m) {
        return Err(Error::DimensionMismatch(format!(
            "history vectors of length {m} and {}",
            bad.len()
        )));
    }
    let mut mean = CVector::zeros(m);
    for h in history {
        mean += h;
    }
    mean.unscale_mut(l as f64);

    let mut centered = CMatrix::zeros(m, l);
    for (j, h) in history.iter().enumerate() {
        centered.set_column(j, &(h - &mean));
    }
    let raw = (&centered * centered.adjoint()).unscale((l - 1) as f64);
    let repaired = repair_psd(&raw);
    let factor = covariance_factor(&repaired.matrix).ok_or(Error::DegenerateCovariance)?;
    Ok(ChannelStats {
        mean,
        covariance: repaired.matrix,
        sample_count: l,
        min_eigenvalue_before_repair: repaired.min_eigenvalue,
        factor,
    })
}

impl ChannelStats {
    pub fn num_antennas(&self) -> usize {
        self.mean.len()
    }

    /// Draw from CN(m, C) as `m + A z` with `z ~ CN(0, I)`.
    pub fn synthesize_channel<R: Rng + ?Sized>(&self, rng: &mut R) -> CVector {
        let z = standard_complex_normal(self.num_antennas(), rng);
        &self.mean + &self.factor * z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_rician;
    use crate::linalg::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identical_samples_give_zero_covariance() {
        let v = CVector::from_vec(vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0)]);
        let s = channel_stats(&[v.clone(), v.clone()]).unwrap();
        assert_eq!(s.mean, v);
        assert!(s.covariance.norm() == 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(s.synthesize_channel(&mut rng), v);
    }

    #[test]
    fn two_point_hand_example() {
        let h = [
            CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]),
            CVector::from_vec(vec![c(-1.0, 0.0), c(0.0, 0.0)]),
        ];
        let s = channel_stats(&h).unwrap();
        assert!(s.mean.norm() == 0.0);
        let expected = CMatrix::from_diagonal(&CVector::from_vec(vec![c(2.0, 0.0), c(0.0, 0.0)]));
        assert!((&s.covariance - expected).norm() < 1e-14);
    }

    #[test]
    fn insufficient_history() {
        let v = CVector::zeros(2);
        assert_eq!(channel_stats(&[v]).unwrap_err(), Error::InsufficientHistory(1));
        assert_eq!(channel_stats(&[]).unwrap_err(), Error::InsufficientHistory(0));
    }

    #[test]
    fn rayleigh_covariance_converges_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = 4;
        let hist: Vec<CVector> = (0..100_000).map(|_| sample_rician(1.0, 0.0, m, &mut rng)).collect();
        let s = channel_stats(&hist).unwrap();
        let id = CMatrix::identity(m, m);
        let rel = (&s.covariance - &id).norm() / id.norm();
        assert!(rel < 0.05, "{rel}");
    }

    #[test]
    fn covariance_invariants_hold_for_short_histories() {
        // L < M makes C rank deficient.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = 16;
        let hist: Vec<CVector> = (0..5).map(|_| sample_rician(1e-9, 2.0, m, &mut rng)).collect();
        let s = channel_stats(&hist).unwrap();
        let cn = s.covariance.norm();
        assert!((&s.covariance - s.covariance.adjoint()).norm() <= 1e-12 * cn);
        let trace: f64 = (0..m).map(|i| s.covariance[(i, i)].re).sum();
        assert!(s.min_eigenvalue_before_repair >= -1e-10 * trace / m as f64);
        let eig = s.covariance.clone().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-12 * trace));
        let fa = &s.factor * s.factor.adjoint();
        assert!((&fa - &s.covariance).norm() < 1e-9 * cn);
    }

    #[test]
    fn standard_synthesis_second_moment() {
        let m = 2;
        let s = ChannelStats {
            mean: CVector::zeros(m),
            covariance: CMatrix::identity(m, m),
            sample_count: 2,
            min_eigenvalue_before_repair: 1.0,
            factor: CMatrix::identity(m, m),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 1_000_000;
        let mut acc = [0.0; 2];
        for _ in 0..n {
            let h = s.synthesize_channel(&mut rng);
            acc[0] += h[0].norm_sqr();
            acc[1] += h[1].norm_sqr();
        }
        for a in acc {
            assert!((a / n as f64 - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn synthesized_channels_cluster_near_los_mean() {
        let m = 8;
        let psi = 3e-9;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let hist: Vec<CVector> = (0..500).map(|_| sample_rician(psi, 10.0, m, &mut rng)).collect();
        let s = channel_stats(&hist).unwrap();
        let los = CVector::from_element(m, c((psi * 10.0 / 11.0).sqrt(), 0.0));
        let n = 2000;
        let mut mean = CVector::zeros(m);
        for _ in 0..n {
            mean += s.synthesize_channel(&mut rng);
        }
        mean.unscale_mut(n as f64);
        let trace: f64 = (0..m).map(|i| s.covariance[(i, i)].re).sum();
        // mean error is small relative to the spread of the synthesized draws
        assert!((&mean - &los).norm() < trace.sqrt(), "{}", (&mean - &los).norm());
    }
}
