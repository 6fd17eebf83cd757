use statrs::function::gamma::ln_gamma;

use super::special::{normal_quantile, regularized_beta_pair};
use crate::error::{Error, Result};

/// `P(T > t)` for `t >= 0`, i.e. `I_{nu/(nu+t^2)}(nu/2, 1/2) / 2`.
fn upper_tail(t: f64, nu: f64) -> f64 {
    let t2 = t * t;
    let x = nu / (nu + t2);
    let y = t2 / (nu + t2);
    0.5 * regularized_beta_pair(0.5 * nu, 0.5, x, y).0
}

fn ln_pdf(t: f64, nu: f64) -> f64 {
    ln_gamma(0.5 * (nu + 1.0))
        - ln_gamma(0.5 * nu)
        - 0.5 * (nu * std::f64::consts::PI).ln()
        - 0.5 * (nu + 1.0) * (t * t / nu).ln_1p()
}

pub fn student_t_cdf(t: f64, nu: f64) -> f64 {
    if t >= 0.0 {
        1.0 - upper_tail(t, nu)
    } else {
        upper_tail(-t, nu)
    }
}

/// Inverse CDF of Student's t with `nu` degrees of freedom.
///
/// Solves `P(T > t) = min(p, 1 - p)` on the tail with a bracketed Newton
/// iteration in log-probability, so tail probabilities keep their relative
/// precision.
pub fn student_t_quantile(p: f64, nu: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "quantile probability must lie in (0, 1), got {p}"
        )));
    }
    if !(nu >= 1.0 && nu.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "degrees of freedom must be >= 1, got {nu}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let q = p.min(1.0 - p);
    let ln_q = q.ln();

    // Cornish-Fisher start from the normal quantile.
    let z = normal_quantile(1.0 - q);
    let z3 = z * z * z;
    let z5 = z3 * z * z;
    let guess = z + (z3 + z) / (4.0 * nu) + (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * nu * nu);

    let mut lo = 0.0;
    let mut hi = guess.max(1.0);
    while upper_tail(hi, nu) > q {
        lo = hi;
        hi *= 2.0;
    }
    let mut t = if guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) };
    for _ in 0..200 {
        let tail = upper_tail(t, nu);
        if tail > q {
            lo = t;
        } else {
            hi = t;
        }
        // d(ln tail)/dt = -pdf / tail
        let step = (tail.ln() - ln_q) * (tail.ln() - ln_pdf(t, nu)).exp();
        let mut next = t + step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - t).abs() <= 1e-15 * t.max(1.0) || hi - lo <= 1e-15 * hi;
        t = next;
        if done {
            break;
        }
    }
    Ok(if p > 0.5 { t } else { -t })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_is_zero() {
        for nu in [1.0, 3.0, 499.0, 1e6] {
            assert_eq!(student_t_quantile(0.5, nu).unwrap(), 0.0);
        }
    }

    #[test]
    fn cauchy_closed_form() {
        // nu = 1: F^{-1}(p) = tan(pi (p - 1/2))
        for p in [0.001, 0.1, 0.3, 0.75, 0.9, 0.999] {
            let exact = (std::f64::consts::PI * (p - 0.5)).tan();
            let t = student_t_quantile(p, 1.0).unwrap();
            assert!((t - exact).abs() < 1e-8 * exact.abs().max(1.0), "{p}: {t} vs {exact}");
        }
        assert!((student_t_quantile(0.75, 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_dof_closed_form() {
        // nu = 2: F^{-1}(p) = (2p - 1) / sqrt(2 p (1 - p))
        for p in [0.0005f64, 0.01, 0.2, 0.6, 0.95, 0.9999] {
            let exact = (2.0 * p - 1.0) / (2.0 * p * (1.0 - p)).sqrt();
            let t = student_t_quantile(p, 2.0).unwrap();
            assert!((t - exact).abs() < 1e-9 * exact.abs().max(1.0), "{p}: {t} vs {exact}");
        }
    }

    #[test]
    fn normal_limit() {
        let z = normal_quantile(0.99);
        let t = student_t_quantile(0.99, 1e6).unwrap();
        assert!((t - 2.3263).abs() < 1e-3);
        assert!((t - z).abs() < 1e-5);
        let t3 = student_t_quantile(0.99, 1e3).unwrap();
        assert!(t3 > t && t3 - z < 0.01);
    }

    #[test]
    fn cdf_inverts_quantile() {
        for nu in [1.0, 2.5, 9.0, 249.0, 499.0] {
            for p in [1e-4, 0.01, 0.2, 0.5, 0.8, 0.99] {
                let t = student_t_quantile(p, nu).unwrap();
                assert!((student_t_cdf(t, nu) - p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn monotone_in_p() {
        let mut prev = f64::NEG_INFINITY;
        for i in 1..200 {
            let t = student_t_quantile(i as f64 / 200.0, 7.0).unwrap();
            assert!(t > prev);
            prev = t;
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(student_t_quantile(0.0, 3.0).is_err());
        assert!(student_t_quantile(1.0, 3.0).is_err());
        assert!(student_t_quantile(f64::NAN, 3.0).is_err());
        assert!(student_t_quantile(0.3, 0.5).is_err());
    }
}
