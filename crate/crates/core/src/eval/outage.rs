use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{sample_rician_into, UrllcChannelLaw};
use crate::linalg::{inner_abs2, CMatrix, Complex64};
use crate::rng::{Purpose, RandomStream};

/// Samples per MC batch; batch `b` draws from substream `(OutageMc, b)`.
pub const MC_BATCH: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutageEstimate {
    pub outage: f64,
    pub mc_samples: u64,
    pub failures: u64,
    pub standard_error: f64,
}

impl OutageEstimate {
    pub fn from_counts(failures: u64, mc_samples: u64) -> Self {
        let n = mc_samples as f64;
        let outage = failures as f64 / n;
        Self {
            outage,
            mc_samples,
            failures,
            standard_error: (outage * (1.0 - outage) / n).sqrt(),
        }
    }
}

/// Fraction of `n` fresh URLLC channels whose SINR under `w` (column 0 =
/// URLLC) falls below `target`.
pub fn outage_mc(
    w: &CMatrix,
    law: &UrllcChannelLaw,
    target: f64,
    noise: f64,
    n: u64,
    stream: &RandomStream,
) -> OutageEstimate {
    assert!(n >= 1, "outage_mc needs at least one sample");
    assert_eq!(w.nrows(), law.num_antennas, "precoder rows must match antennas");
    let m = w.nrows();
    let cols: Vec<&[Complex64]> = w.as_slice().chunks_exact(m).collect();
    let batches = n.div_ceil(MC_BATCH);
    let failures: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream.rng(Purpose::OutageMc, &[b]);
            let count = MC_BATCH.min(n - b * MC_BATCH);
            let mut h = vec![Complex64::new(0.0, 0.0); m];
            let mut fails = 0u64;
            for _ in 0..count {
                sample_rician_into(law.path_gain, law.rician_k, &mut h, &mut rng);
                let signal = cols.first().map_or(0.0, |c| inner_abs2(&h, c));
                let interference: f64 = cols.iter().skip(1).map(|c| inner_abs2(&h, c)).sum();
                if signal < target * (interference + noise) {
                    fails += 1;
                }
            }
            fails
        })
        .sum();
    OutageEstimate::from_counts(failures, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CVector;

    fn law(psi: f64, kappa: f64, m: usize) -> UrllcChannelLaw {
        UrllcChannelLaw {
            path_gain: psi,
            rician_k: kappa,
            num_antennas: m,
        }
    }

    #[test]
    fn zero_precoder_always_fails() {
        let w = CMatrix::zeros(4, 3);
        let e = outage_mc(&w, &law(1.0, 0.0, 4), 0.07, 1.0, 1000, &RandomStream::new(1));
        assert_eq!(e.outage, 1.0);
        assert_eq!(e.failures, 1000);
        assert_eq!(e.standard_error, 0.0);
    }

    #[test]
    fn line_of_sight_strong_signal_never_fails() {
        let m = 4;
        let mut w = CMatrix::zeros(m, 2);
        w.set_column(0, &CVector::from_element(m, Complex64::new(10.0, 0.0)));
        let e = outage_mc(&w, &law(1.0, 1e12, m), 0.07, 1.0, 50_000, &RandomStream::new(2));
        assert_eq!(e.failures, 0);
    }

    #[test]
    fn single_antenna_rayleigh_closed_form() {
        let (psi, p, noise, target): (f64, f64, f64, f64) = (2e-3, 0.5, 1e-3, 0.0718);
        let w = CMatrix::from_element(1, 1, Complex64::new(p.sqrt(), 0.0));
        let n = 1_000_000;
        let e = outage_mc(&w, &law(psi, 0.0, 1), target, noise, n, &RandomStream::new(3));
        let exact = 1.0 - (-target * noise / (p * psi)).exp();
        assert!((e.outage - exact).abs() < 3.0 * e.standard_error, "{} vs {exact}", e.outage);
    }

    #[test]
    fn deterministic_and_batch_nested() {
        let m = 3;
        let w = CMatrix::from_element(m, 2, Complex64::new(0.3, 0.1));
        let s = RandomStream::new(9);
        let a = outage_mc(&w, &law(1.0, 1.0, m), 0.5, 0.2, 3 * MC_BATCH + 17, &s);
        let b = outage_mc(&w, &law(1.0, 1.0, m), 0.5, 0.2, 3 * MC_BATCH + 17, &s);
        assert_eq!(a, b);
        let first = outage_mc(&w, &law(1.0, 1.0, m), 0.5, 0.2, 2 * MC_BATCH, &s);
        let more = outage_mc(&w, &law(1.0, 1.0, m), 0.5, 0.2, 3 * MC_BATCH, &s);
        assert!(more.failures >= first.failures);
    }

    #[test]
    fn independent_seeds_agree_within_error() {
        let w = CMatrix::from_element(2, 1, Complex64::new(0.2, 0.0));
        let l = law(1.0, 0.0, 2);
        let ests: Vec<f64> = (0..20)
            .map(|s| outage_mc(&w, &l, 0.3, 0.05, 20_000, &RandomStream::new(100 + s)).outage)
            .collect();
        let mean = ests.iter().sum::<f64>() / 20.0;
        let pooled = outage_mc(&w, &l, 0.3, 0.05, 400_000, &RandomStream::new(7));
        assert!((mean - pooled.outage).abs() < 4.0 * pooled.standard_error * 2f64.sqrt());
    }
}
