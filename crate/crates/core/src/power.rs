//! SINR evaluation and target-SINR power allocation.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::config::{db_to_linear, linear_to_db, PrecoderKind, TargetDrawDomain};
use crate::error::{Error, Result};
use crate::linalg::{inner_abs2, CMatrix, CVector, Complex64};
use crate::precoders::{DirectionAux, DirectionMatrix};

/// Relative pivot below which the allocation system is treated as singular.
pub const SINGULAR_PIVOT: f64 = 1e-12;

/// `|h^H w_k|^2 / (sum_{i != k} |h^H w_i|^2 + noise)`.
pub fn sinr(h: &CVector, w: &CMatrix, k: usize, noise: f64) -> f64 {
    let m = w.nrows();
    let hs = h.as_slice();
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (i, col) in w.as_slice().chunks_exact(m).enumerate() {
        let g = inner_abs2(hs, col);
        if i == k {
            signal = g;
        } else {
            interference += g;
        }
    }
    signal / (interference + noise)
}

/// Interference-free MRT SINR with the whole budget on one link: `p_max ||h||^2 / noise`.
pub fn gamma_max(h: &CVector, p_max: f64, noise: f64) -> f64 {
    p_max * h.norm_squared() / noise
}

/// Uniform draw of a URLLC candidate target on `[gamma_min, gamma_max]`,
/// in the linear or the dB domain.
pub fn draw_urllc_target<R: Rng + ?Sized>(
    gamma_min: f64,
    gamma_max: f64,
    domain: TargetDrawDomain,
    rng: &mut R,
) -> Result<f64> {
    if !(gamma_max > gamma_min) {
        return Err(Error::TargetInfeasible { gamma_min, gamma_max });
    }
    Ok(match domain {
        TargetDrawDomain::Linear => rng.random_range(gamma_min..=gamma_max),
        TargetDrawDomain::Db => {
            let db = rng.random_range(linear_to_db(gamma_min)..=linear_to_db(gamma_max));
            db_to_linear(db).clamp(gamma_min, gamma_max)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationStatus {
    Feasible,
    OverBudget,
    NonPositive,
    Singular,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerAllocation {
    /// Per-user powers in mW, URLLC first.
    pub powers: Vec<f64>,
    pub total: f64,
    pub feasible: bool,
    pub status: AllocationStatus,
}

impl PowerAllocation {
    fn classify(powers: Vec<f64>, p_max: f64) -> Self {
        let total: f64 = powers.iter().sum();
        let status = if powers.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            AllocationStatus::NonPositive
        } else if total > p_max {
            AllocationStatus::OverBudget
        } else {
            AllocationStatus::Feasible
        };
        Self {
            powers,
            total,
            feasible: status == AllocationStatus::Feasible,
            status,
        }
    }

    fn singular(n: usize) -> Self {
        Self {
            powers: vec![f64::NAN; n],
            total: f64::NAN,
            feasible: false,
            status: AllocationStatus::Singular,
        }
    }
}

fn check_dims(eval: &CMatrix, u: &CMatrix, targets: &[f64]) -> Result<()> {
    if eval.shape() != u.shape() || targets.len() != u.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eval {:?}, directions {:?}, {} targets",
            eval.shape(),
            u.shape(),
            targets.len()
        )));
    }
    Ok(())
}

/// Solve the `(K+1) x (K+1)` system that makes every user hit its target:
///
/// `p_k |h_k^H u_k|^2 - gamma_k sum_{i != k} p_i |h_k^H u_i|^2 = gamma_k noise`.
///
/// Column `k` of `eval` is the channel on which user `k`'s SINR is evaluated.
pub fn solve_power_linear(
    eval: &CMatrix,
    u: &CMatrix,
    targets: &[f64],
    noise: f64,
    p_max: f64,
) -> Result<PowerAllocation> {
    check_dims(eval, u, targets)?;
    let n = u.ncols();
    let m = u.nrows();
    let ucols: Vec<&[Complex64]> = u.as_slice().chunks_exact(m).collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (k, hk) in eval.as_slice().chunks_exact(m).enumerate() {
        for (i, ui) in ucols.iter().enumerate() {
            let g = inner_abs2(hk, ui);
            a[(k, i)] = if i == k { g } else { -targets[k] * g };
        }
    }
    let b = DVector::from_iterator(n, targets.iter().map(|g| g * noise));
    let scale = a.amax();
    let lu = a.lu();
    let min_pivot = lu.u().diagonal().amin();
    if !(scale > 0.0) || min_pivot < SINGULAR_PIVOT * scale {
        return Ok(PowerAllocation::singular(n));
    }
    match lu.solve(&b) {
        Some(p) => Ok(PowerAllocation::classify(p.iter().copied().collect(), p_max)),
        None => Ok(PowerAllocation::singular(n)),
    }
}

/// ZF closed form `p_k = gamma_k noise ||z_k||^2`.
pub fn zf_power(column_norms: &[f64], targets: &[f64], noise: f64, p_max: f64) -> Result<PowerAllocation> {
    if column_norms.len() != targets.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} ZF columns, {} targets",
            column_norms.len(),
            targets.len()
        )));
    }
    let powers = column_norms
        .iter()
        .zip(targets)
        .map(|(z, g)| g * noise * z * z)
        .collect();
    Ok(PowerAllocation::classify(powers, p_max))
}

/// Power allocation for `dirs`: the ZF closed form when available, the
/// general linear solve otherwise.
pub fn solve_power(
    eval: &CMatrix,
    dirs: &DirectionMatrix,
    targets: &[f64],
    noise: f64,
    p_max: f64,
) -> Result<PowerAllocation> {
    match (&dirs.kind, &dirs.aux) {
        (PrecoderKind::Zf, DirectionAux::Zf { column_norms }) => {
            check_dims(eval, &dirs.u, targets)?;
            zf_power(column_norms, targets, noise, p_max)
        }
        _ => solve_power_linear(eval, &dirs.u, targets, noise, p_max),
    }
}

/// Largest URLLC target in `[gamma_min, gamma_max]` that `dirs` can serve
/// within budget, with the other targets held fixed. `None` when even
/// `gamma_min` is infeasible.
///
/// For fixed directions the feasible targets form an interval starting at
/// zero, so a log-domain bisection brackets the edge. The returned value is
/// always a feasible point.
pub fn max_feasible_target(
    eval: &CMatrix,
    dirs: &DirectionMatrix,
    targets: &[f64],
    noise: f64,
    p_max: f64,
    gamma_min: f64,
    gamma_max: f64,
) -> Result<Option<f64>> {
    let mut trial = targets.to_vec();
    let mut feasible_at = |g: f64| -> Result<bool> {
        trial[0] = g;
        Ok(solve_power(eval, dirs, &trial, noise, p_max)?.feasible)
    };
    if !feasible_at(gamma_min)? {
        return Ok(None);
    }
    if gamma_max <= gamma_min || feasible_at(gamma_max)? {
        return Ok(Some(gamma_max.max(gamma_min)));
    }
    let (mut lo, mut hi) = (gamma_min.ln(), gamma_max.ln());
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible_at(mid.exp())? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo.exp().max(gamma_min)))
}

/// `W = [sqrt(p_0) u_0, ..., sqrt(p_K) u_K]`.
pub fn assemble_precoder(u: &CMatrix, powers: &[f64]) -> CMatrix {
    let mut w = u.clone();
    for (mut col, &p) in w.column_iter_mut().zip(powers) {
        col.scale_mut(p.sqrt());
    }
    w
}
