//! Laguerre polynomials, special Hermite functions and their L² norms.
//!
//! The special Hermite function of degree `k` on ℝ^{2n} at spectral scale
//! `λ > 0` is the radial function
//!
//! ```text
//! φ_k^λ(z) = L_k^{n-1}(λ|z|²/2) · exp(-λ|z|²/4)
//! ```
//!
//! and its squared L² norm is `(2π)^n λ^{-n} binom(k+n-1, k)`.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::quad::AdaptiveQuad;

/// Degree and type parameter of a generalized Laguerre polynomial `L_k^α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaguerreParams {
    pub k: usize,
    pub alpha: f64,
}

impl LaguerreParams {
    pub fn new(k: usize, alpha: f64) -> Result<Self> {
        if !(alpha > -1.0) {
            return domain(format!("Laguerre type parameter must exceed -1, got {alpha}"));
        }
        Ok(Self { k, alpha })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        laguerre(self.k, self.alpha, x)
    }
}

/// Degree `k`, half-dimension `n` and scale `λ` of a special Hermite function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteProfile {
    pub k: usize,
    pub n: usize,
    pub lambda: f64,
}

impl HermiteProfile {
    pub fn new(k: usize, n: usize, lambda: f64) -> Result<Self> {
        if n == 0 {
            return domain("half-dimension n must be at least 1");
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return domain(format!("spectral scale must be positive and finite, got {lambda}"));
        }
        Ok(Self { k, n, lambda })
    }

    /// `φ_k^λ` as a function of `|z|²`.
    pub fn eval_r2(&self, r2: f64) -> f64 {
        let u = 0.5 * self.lambda * r2;
        laguerre_unchecked(self.k, (self.n - 1) as f64, u) * (-0.5 * u).exp()
    }
}

/// `L_k^α(x)` by the upward three-term recurrence
/// `k L_k = (2k - 1 + α - x) L_{k-1} - (k - 1 + α) L_{k-2}`.
pub fn laguerre(k: usize, alpha: f64, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("Laguerre argument must be finite, got {x}"));
    }
    if !(alpha > -1.0) {
        return domain(format!("Laguerre type parameter must exceed -1, got {alpha}"));
    }
    Ok(laguerre_unchecked(k, alpha, x))
}

pub(crate) fn laguerre_unchecked(k: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for j in 2..=k {
        let jf = j as f64;
        let next = ((2.0 * jf - 1.0 + alpha - x) * cur - (jf - 1.0 + alpha) * prev) / jf;
        prev = cur;
        cur = next;
    }
    cur
}

/// `L_k^α(x) · exp(-x/2)` without intermediate overflow for large `k` and `x`.
pub fn laguerre_function(k: usize, alpha: f64, x: f64) -> f64 {
    const BIG: f64 = 1e200;
    let mut log_scale = 0.0;
    let mut prev = 1.0;
    if k == 0 {
        return (-0.5 * x).exp();
    }
    let mut cur = 1.0 + alpha - x;
    for j in 2..=k {
        let jf = j as f64;
        let next = ((2.0 * jf - 1.0 + alpha - x) * cur - (jf - 1.0 + alpha) * prev) / jf;
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            cur /= BIG;
            prev /= BIG;
            log_scale += BIG.ln();
        }
    }
    cur * (log_scale - 0.5 * x).exp()
}

/// `φ_k^λ(z)` for `z ∈ ℝ^{2n}`.
pub fn special_hermite(profile: &HermiteProfile, z: &[f64]) -> Result<f64> {
    if z.len() != 2 * profile.n {
        return domain(format!(
            "point has {} coordinates, expected 2n = {}",
            z.len(),
            2 * profile.n
        ));
    }
    let r2: f64 = z.iter().map(|c| c * c).sum();
    if !r2.is_finite() {
        return domain("point coordinates must be finite");
    }
    Ok(profile.eval_r2(r2))
}

/// Upper end of the radial quadrature interval, past the oscillatory region
/// of `L_k^α(u)² e^{-u}`. The floor of 50 keeps the `e^{-u}` tail negligible
/// at low degree.
pub fn radial_cutoff(k: usize, alpha: f64) -> f64 {
    (4.0 * (4.0 * k as f64 + 2.0 * alpha + 4.0)).max(50.0)
}

/// `∫_0^∞ L_k^α(u)² e^{-u} u^α du` by adaptive quadrature on `[0, radial_cutoff]`.
pub fn laguerre_weighted_square(k: usize, alpha: f64) -> Result<f64> {
    laguerre_weighted_product(k, k, alpha)
}

/// `∫_0^∞ L_j^α(u) L_k^α(u) e^{-u} u^α du` by adaptive quadrature.
pub fn laguerre_weighted_product(j: usize, k: usize, alpha: f64) -> Result<f64> {
    if !(alpha > -1.0) {
        return domain(format!("Laguerre type parameter must exceed -1, got {alpha}"));
    }
    let upper = radial_cutoff(j.max(k), alpha);
    let mut quad = AdaptiveQuad::with_tolerance(1e-12);
    quad.initial_panels = 16 + 2 * j.max(k);
    quad.integrate(
        |u| {
            let w = if alpha == 0.0 { 1.0 } else { u.powf(alpha) };
            laguerre_function(j, alpha, u) * laguerre_function(k, alpha, u) * w
        },
        0.0,
        upper,
    )
    .map_err(|e| match e {
        Error::Numerical(msg) => Error::Numerical(format!(
            "radial quadrature for (j, k, alpha) = ({j}, {k}, {alpha}) failed: {msg}"
        )),
        other => other,
    })
}

/// L²(ℝ^{2n}) norm of `φ_k^λ` from one-dimensional radial quadrature.
///
/// In polar coordinates with `u = λ r²/2` the squared norm becomes
/// `(2π)^n / (Γ(n) λ^n) ∫ L_k^{n-1}(u)² e^{-u} u^{n-1} du`.
pub fn phi_l2_norm(k: usize, n: usize, lambda: f64) -> Result<f64> {
    let profile = HermiteProfile::new(k, n, lambda)?;
    let radial = laguerre_weighted_square(k, (n - 1) as f64)?;
    let gamma_n: f64 = (1..n).map(|i| i as f64).product();
    let sq = (2.0 * PI).powi(n as i32) / (gamma_n * profile.lambda.powi(n as i32)) * radial;
    Ok(sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laguerre_low_degree_values() {
        assert_eq!(laguerre(0, 3.0, 7.2).unwrap(), 1.0);
        assert_eq!(laguerre(1, 0.0, 2.0).unwrap(), -1.0);
        assert!((laguerre(2, 0.0, 2.0).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn laguerre_rejects_bad_input() {
        assert!(matches!(laguerre(3, 0.0, f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(laguerre(3, 0.0, f64::INFINITY), Err(Error::Domain(_))));
        assert!(matches!(laguerre(3, -1.0, 1.0), Err(Error::Domain(_))));
        assert!(LaguerreParams::new(2, -1.5).is_err());
    }

    #[test]
    fn special_hermite_examples() {
        let p = HermiteProfile::new(0, 1, 1.0).unwrap();
        let v = special_hermite(&p, &[2.0, 0.0]).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);

        let p = HermiteProfile::new(2, 2, 1.0).unwrap();
        assert_eq!(special_hermite(&p, &[0.0; 4]).unwrap(), 3.0);

        let p = HermiteProfile::new(1, 1, 2.0).unwrap();
        assert!(special_hermite(&p, &[1.0, 0.0]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn special_hermite_checks_dimension_and_profile() {
        let p = HermiteProfile::new(1, 2, 1.0).unwrap();
        assert!(special_hermite(&p, &[1.0, 0.0]).is_err());
        assert!(HermiteProfile::new(1, 0, 1.0).is_err());
        assert!(HermiteProfile::new(1, 1, 0.0).is_err());
        assert!(HermiteProfile::new(1, 1, -2.0).is_err());
    }

    #[test]
    fn scaled_function_matches_plain_recurrence() {
        for &(k, a, x) in &[(0, 0.0, 3.0), (5, 1.0, 2.5), (30, 2.0, 40.0), (12, 0.0, 0.0)] {
            let plain = laguerre_unchecked(k, a, x) * (-0.5 * x).exp();
            let scaled = laguerre_function(k, a, x);
            assert!((plain - scaled).abs() <= 1e-12 * plain.abs().max(1e-300), "{k} {a} {x}");
        }
        // Large degree far out: finite, no overflow.
        let v = laguerre_function(500, 0.0, 5000.0);
        assert!(v.is_finite());
    }

    #[test]
    fn phi_norm_examples() {
        let two_pi = 2.0 * PI;
        assert!((phi_l2_norm(5, 1, 1.0).unwrap() - two_pi.sqrt()).abs() < 1e-10);
        assert!((phi_l2_norm(1, 2, 1.0).unwrap() - two_pi * 2f64.sqrt()).abs() < 1e-9);
        assert!((phi_l2_norm(0, 1, 4.0).unwrap() - two_pi.sqrt() / 2.0).abs() < 1e-10);
    }

    #[test]
    fn phi_norm_rejects_nonpositive_scale() {
        assert!(phi_l2_norm(1, 1, 0.0).is_err());
    }

    #[test]
    fn large_degree_norm_converges() {
        // binom(k + n - 1, k) (2π)^n at n = 1 is 2π for every k.
        let v = phi_l2_norm(500, 1, 1.0).unwrap();
        assert!((v - (2.0 * PI).sqrt()).abs() < 1e-9 * v);
    }
}
