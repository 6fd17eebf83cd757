//! Normalized precoding directions for ZF, TPM and MRT.
//!
//! All routines take the `M x (K+1)` channel matrix with the URLLC column at
//! index 0 and return unit-norm columns in the same order.

use nalgebra::DVector;

use crate::config::PrecoderKind;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, Complex64};

/// Upper bound on `cond(H^H H)` accepted by ZF.
pub const ZF_MAX_CONDITION: f64 = 1e12;
pub const TPM_MAX_ITERATIONS: usize = 500;
pub const TPM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum DirectionAux {
    /// Norms `||z_k||` of the unnormalized ZF columns.
    Zf { column_norms: Vec<f64> },
    /// Converged Lagrange multipliers and the number of fixed-point sweeps.
    Tpm { multipliers: Vec<f64>, iterations: usize },
    Mrt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionMatrix {
    pub u: CMatrix,
    pub kind: PrecoderKind,
    pub aux: DirectionAux,
}

impl DirectionMatrix {
    pub fn num_users(&self) -> usize {
        self.u.ncols()
    }
}

fn normalize_columns(z: &CMatrix) -> (CMatrix, Vec<f64>) {
    let norms: Vec<f64> = z.column_iter().map(|c| c.norm()).collect();
    let mut u = z.clone();
    for (mut col, &n) in u.column_iter_mut().zip(&norms) {
        col.unscale_mut(n);
    }
    (u, norms)
}

/// `h / ||h||`.
pub fn mrt_direction(h: &CVector) -> Result<CVector> {
    let n = h.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(h.unscale(n))
}

pub fn mrt_directions(h: &CMatrix) -> Result<DirectionMatrix> {
    if h.column_iter().any(|c| c.norm() == 0.0) {
        return Err(Error::ZeroVector);
    }
    let (u, _) = normalize_columns(h);
    Ok(DirectionMatrix {
        u,
        kind: PrecoderKind::Mrt,
        aux: DirectionAux::Mrt,
    })
}

/// Zero-forcing: `Z = H (H^H H)^{-1}`, `u_k = z_k / ||z_k||`.
///
/// Computed from the thin QR factorization `H = Q R` as `Z = Q R^{-H}`.
pub fn zf_directions(h: &CMatrix) -> Result<DirectionMatrix> {
    let (m, n) = h.shape();
    if n == 0 || n > m {
        return Err(Error::DimensionMismatch(format!(
            "ZF needs 1 <= users <= antennas, got {n} users and {m} antennas"
        )));
    }
    let qr = h.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let sv = r.singular_values();
    let (smax, smin) = sv
        .iter()
        .fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    let cond = if smin > 0.0 { (smax / smin).powi(2) } else { f64::INFINITY };
    if !(cond <= ZF_MAX_CONDITION) {
        return Err(Error::IllConditioned(cond));
    }
    // Z^H = R^{-1} Q^H
    let zh = r
        .solve_upper_triangular(&q.adjoint())
        .ok_or(Error::IllConditioned(f64::INFINITY))?;
    let z = zh.adjoint();
    let (u, column_norms) = normalize_columns(&z);
    Ok(DirectionMatrix {
        u,
        kind: PrecoderKind::Zf,
        aux: DirectionAux::Zf { column_norms },
    })
}

/// `I + sum_i (lambda_i / noise) h_i h_i^H`.
fn tpm_matrix(h: &CMatrix, lambda: &[f64], noise: f64) -> CMatrix {
    let m = h.nrows();
    let weights = DVector::from_iterator(
        lambda.len(),
        lambda.iter().map(|&l| Complex64::new(l / noise, 0.0)),
    );
    let mut weighted = h.clone();
    for (mut col, w) in weighted.column_iter_mut().zip(weights.iter()) {
        col *= *w;
    }
    CMatrix::identity(m, m) + weighted * h.adjoint()
}

/// Transmit-power-minimizing directions with per-user SINR targets.
///
/// The multipliers solve `lambda_k = noise / ((1 + 1/gamma_k) h_k^H S^{-1} h_k)`
/// with `S = I + sum_i lambda_i/noise h_i h_i^H`, iterated from
/// `lambda_k = noise gamma_k / ||h_k||^2` until the largest relative change is
/// below [`TPM_TOLERANCE`]. Directions are `S^{-1} h_k` normalized.
/// `damping` in (0, 1] blends each update with the previous iterate.
pub fn tpm_directions(h: &CMatrix, targets: &[f64], noise: f64, damping: f64) -> Result<DirectionMatrix> {
    let (m, n) = h.shape();
    if targets.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} SINR targets for {n} users",
            targets.len()
        )));
    }
    if n == 0 || n > m {
        return Err(Error::DimensionMismatch(format!(
            "TPM needs 1 <= users <= antennas, got {n} users and {m} antennas"
        )));
    }
    if targets.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::InvalidArgument("SINR targets must be > 0".into()));
    }
    let norms_sq: Vec<f64> = h.column_iter().map(|c| c.norm_squared()).collect();
    if norms_sq.contains(&0.0) {
        return Err(Error::ZeroVector);
    }
    let mut lambda: Vec<f64> = targets
        .iter()
        .zip(&norms_sq)
        .map(|(g, n2)| noise * g / n2)
        .collect();

    // h_k^H S^{-1} h_k is the diagonal of (I + G D)^{-1} G, G = H^H H, D = diag(lambda)/noise
    let gram = h.adjoint() * h;
    let identity = CMatrix::identity(n, n);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < TPM_MAX_ITERATIONS {
        iterations += 1;
        let mut coupled = gram.clone();
        for (mut col, &l) in coupled.column_iter_mut().zip(&lambda) {
            col *= Complex64::new(l / noise, 0.0);
        }
        let x = (&identity + coupled)
            .lu()
            .solve(&gram)
            .ok_or(Error::TpmDiverged(iterations))?;
        let mut max_change = 0.0f64;
        for k in 0..n {
            let quad = x[(k, k)].re;
            let fresh = noise / ((1.0 + 1.0 / targets[k]) * quad);
            let next = (1.0 - damping) * lambda[k] + damping * fresh;
            if !next.is_finite() || next <= 0.0 {
                return Err(Error::TpmDiverged(iterations));
            }
            max_change = max_change.max((next - lambda[k]).abs() / lambda[k]);
            lambda[k] = next;
        }
        if max_change < TPM_TOLERANCE {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::TpmDiverged(iterations));
    }
    let chol = tpm_matrix(h, &lambda, noise)
        .cholesky()
        .ok_or(Error::TpmDiverged(iterations))?;
    let (u, _) = normalize_columns(&chol.solve(h));
    Ok(DirectionMatrix {
        u,
        kind: PrecoderKind::Tpm,
        aux: DirectionAux::Tpm {
            multipliers: lambda,
            iterations,
        },
    })
}

/// Dispatch on `kind`. `targets` and `noise` are only used by TPM.
pub fn directions(
    kind: PrecoderKind,
    h: &CMatrix,
    targets: &[f64],
    noise: f64,
    damping: f64,
) -> Result<DirectionMatrix> {
    match kind {
        PrecoderKind::Zf => zf_directions(h),
        PrecoderKind::Tpm => tpm_directions(h, targets, noise, damping),
        PrecoderKind::Mrt => mrt_directions(h),
    }
}
