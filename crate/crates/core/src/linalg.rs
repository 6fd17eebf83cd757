//! Complex vector/matrix aliases and the few dense kernels shared across modules.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub use nalgebra::Complex;

pub type Complex64 = Complex<f64>;
pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// Draw from CN(0, I_m): real and imaginary parts i.i.d. N(0, 1/2).
pub fn standard_complex_normal<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CVector {
    CVector::from_fn(m, |_, _| standard_complex_sample(rng))
}

#[inline]
pub fn standard_complex_sample<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `|a^H b|^2` without allocating.
#[inline]
pub fn inner_abs2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        acc += x.conj() * y;
    }
    acc.norm_sqr()
}

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Outcome of Hermitian PSD repair.
#[derive(Debug, Clone)]
pub struct PsdRepair {
    pub matrix: CMatrix,
    /// Smallest eigenvalue of the symmetrized input, before clamping.
    pub min_eigenvalue: f64,
}

/// Symmetrize `(C + C^H)/2` and clamp negative eigenvalues to zero.
pub fn repair_psd(c: &CMatrix) -> PsdRepair {
    let sym = (c + c.adjoint()).scale(0.5);
    let eig = sym.clone().symmetric_eigen();
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eigenvalue >= 0.0 {
        return PsdRepair {
            matrix: sym,
            min_eigenvalue,
        };
    }
    let v = &eig.eigenvectors;
    let clamped = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| Complex64::new(l.max(0.0), 0.0)),
    );
    let rebuilt = v * CMatrix::from_diagonal(&clamped) * v.adjoint();
    let matrix = (&rebuilt + rebuilt.adjoint()).scale(0.5);
    PsdRepair {
        matrix,
        min_eigenvalue,
    }
}

/// Lower-triangular `A` with `C = A A^H`.
///
/// Cholesky first; on failure a diagonal jitter of `1e-12 * trace(C) / M` is
/// added once. A zero matrix factors to zero. Returns `None` when both fail.
pub fn covariance_factor(c: &CMatrix) -> Option<CMatrix> {
    let m = c.nrows();
    let trace: f64 = (0..m).map(|i| c[(i, i)].re).sum();
    if trace == 0.0 {
        return Some(CMatrix::zeros(m, m));
    }
    if let Some(ch) = c.clone().cholesky() {
        return Some(ch.unpack());
    }
    let jitter = 1e-12 * trace / m as f64;
    let mut jittered = c.clone();
    for i in 0..m {
        jittered[(i, i)] += Complex64::new(jitter, 0.0);
    }
    jittered.cholesky().map(|ch| ch.unpack())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn repair_clamps_negative_eigenvalues() {
        // Hermitian with eigenvalues {3, -1}.
        let c = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 2.0),
                Complex64::new(0.0, -2.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        let rep = repair_psd(&c);
        assert!((rep.min_eigenvalue + 1.0).abs() < 1e-12);
        let eig = rep.matrix.clone().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&l| l > -1e-12));
        assert!(eig.eigenvalues.iter().any(|&l| (l - 3.0).abs() < 1e-12));
    }

    #[test]
    fn factor_of_rank_deficient_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = standard_complex_normal(4, &mut rng);
        let c = &v * v.adjoint();
        let a = covariance_factor(&c).expect("jittered factor");
        let err = (&a * a.adjoint() - &c).norm() / c.norm();
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn zero_matrix_factors_to_zero() {
        let a = covariance_factor(&CMatrix::zeros(3, 3)).unwrap();
        assert_eq!(a, CMatrix::zeros(3, 3));
    }
}
