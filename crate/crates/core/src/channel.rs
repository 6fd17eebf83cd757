//! Network deployments, Rician channel vectors and the URLLC measurement history.

use rand::Rng;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::linalg::{standard_complex_sample, CVector, Complex64};
use crate::rng::{Purpose, RandomStream};

/// Path gain `d^(-delta)`.
pub fn path_gain(distance: f64, exponent: f64) -> f64 {
    distance.powf(-exponent)
}

/// Draw `sqrt(psi) * (sqrt(k/(k+1)) * 1 + sqrt(1/(k+1)) * CN(0, I))`.
///
/// The LOS component is the all-ones vector.
pub fn sample_rician<R: Rng + ?Sized>(psi: f64, kappa: f64, m: usize, rng: &mut R) -> CVector {
    let mut h = CVector::zeros(m);
    sample_rician_into(psi, kappa, h.as_mut_slice(), rng);
    h
}

/// In-place variant of [`sample_rician`] for hot Monte-Carlo loops.
pub fn sample_rician_into<R: Rng + ?Sized>(psi: f64, kappa: f64, out: &mut [Complex64], rng: &mut R) {
    let (los, nlos) = rician_weights(psi, kappa);
    for z in out.iter_mut() {
        *z = Complex64::new(los, 0.0) + standard_complex_sample(rng) * nlos;
    }
}

/// Amplitudes `(sqrt(psi k/(k+1)), sqrt(psi/(k+1)))` of the LOS and scattered parts.
pub fn rician_weights(psi: f64, kappa: f64) -> (f64, f64) {
    let los = (psi * kappa / (kappa + 1.0)).sqrt();
    let nlos = (psi / (kappa + 1.0)).sqrt();
    (los, nlos)
}

/// Distribution of the URLLC user's true channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UrllcChannelLaw {
    pub path_gain: f64,
    pub rician_k: f64,
    pub num_antennas: usize,
}

impl UrllcChannelLaw {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CVector {
        sample_rician(self.path_gain, self.rician_k, self.num_antennas, rng)
    }
}

/// One network draw. Index 0 is always the URLLC user.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub positions: Vec<(f64, f64)>,
    pub distances: Vec<f64>,
    pub path_gains: Vec<f64>,
    /// Instantaneous channels of eMBB users `1..=K`.
    pub embb_channels: Vec<CVector>,
    pub urllc_law: UrllcChannelLaw,
    pub history: Vec<CVector>,
}

impl NetworkRealization {
    pub fn num_embb(&self) -> usize {
        self.distances.len() - 1
    }

    pub fn num_antennas(&self) -> usize {
        self.urllc_law.num_antennas
    }
}

/// Place `K + 1` users uniformly over the disk of radius `d_r` around the BS.
///
/// Radius is `d_r * sqrt(u)`, floored at the configured minimum distance.
/// Channel fields are left empty.
pub fn deploy_users<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<NetworkRealization> {
    config.validate()?;
    let n = config.num_users();
    let mut positions = Vec::with_capacity(n);
    let mut distances = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        let theta = std::f64::consts::TAU * rng.random::<f64>();
        let d = (config.cell_radius * u.sqrt()).max(config.min_distance);
        positions.push((d * theta.cos(), d * theta.sin()));
        distances.push(d);
    }
    let path_gains: Vec<f64> = distances
        .iter()
        .map(|&d| path_gain(d, config.pathloss_exponent))
        .collect();
    Ok(NetworkRealization {
        positions,
        urllc_law: UrllcChannelLaw {
            path_gain: path_gains[0],
            rician_k: config.rician_k_urllc,
            num_antennas: config.num_antennas,
        },
        distances,
        path_gains,
        embb_channels: Vec::new(),
        history: Vec::new(),
    })
}

/// `len` independent draws of the URLLC channel.
pub fn generate_history<R: Rng + ?Sized>(law: &UrllcChannelLaw, len: usize, rng: &mut R) -> Result<Vec<CVector>> {
    if len < 2 {
        return Err(Error::InsufficientHistory(len));
    }
    Ok((0..len).map(|_| law.sample(rng)).collect())
}

/// Full realization from substreams of `stream`:
/// deployment `(Deployment)`, eMBB user `k` from `(EmbbChannel, k)`, history
/// from `(History)`. Users keep their positions and channels when `K` or
/// `L` change, and history draws are nested in `L`.
pub fn realize(config: &ScenarioConfig, stream: &RandomStream) -> Result<NetworkRealization> {
    let mut real = deploy_users(config, &mut stream.rng(Purpose::Deployment, &[]))?;
    real.embb_channels = (1..=config.num_embb)
        .map(|k| {
            let mut rng = stream.rng(Purpose::EmbbChannel, &[k as u64]);
            sample_rician(real.path_gains[k], config.rician_k_embb, config.num_antennas, &mut rng)
        })
        .collect();
    real.history = generate_history(
        &real.urllc_law,
        config.history_len,
        &mut stream.rng(Purpose::History, &[]),
    )?;
    Ok(real)
}
