//! Joint functional calculus `m(ℒ, −Δ_z)` for the two families
//! `(a^α + b^β)^γ` and `(1 + a^α + b^β)^γ`, the spectral roots `μ_k`, and the
//! restriction operator `P_μ^m` on `ℍ¹ × ℝ` (n = 1, d = 1).
//!
//! `P_μ^m f` is kept in modal form: a sum over `k ≤ K` and `ω = ±1` of
//! `profile_{k,ω}(v) e^{−iμ_k ω z}`, where
//! `profile = (2π)^{−n−d} μ_k^{n+d−1} |μ_k′| Λ_k^{μ_k ω}(𝔉_z f)(·, μ_k ω)` and
//! `𝔉_z f(v, η) = ∫ f(v, z) e^{iηz} dz`. With these constants
//! `∫ P_μ^m f dμ = f` for band-limited `f`.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::field::{GridSpec, SampledField};
use crate::kv::KeyValues;
use crate::product::{CentralAxis, ProductField};
use crate::quad::GaussLegendre;
use crate::twisted::ProjectorKernel;

/// Relative accuracy certified for every root.
pub const ROOT_TOLERANCE: f64 = 1e-12;

/// Ratio `‖P_μ f‖ / ‖f‖₂` below which the restricted field counts as empty.
pub const LEAKAGE_FLOOR: f64 = 1e-3;

/// Central dimension of the desk-scale restriction operator.
const CENTRAL_DIM: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `m(a, b) = (a^α + b^β)^γ`
    Homogeneous,
    /// `m(a, b) = (1 + a^α + b^β)^γ`
    Inhomogeneous,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Homogeneous => "homogeneous",
            Family::Inhomogeneous => "inhomogeneous",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "homogeneous" => Ok(Family::Homogeneous),
            "inhomogeneous" => Ok(Family::Inhomogeneous),
            other => Err(Error::Parse(format!("unknown family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalculusSpec {
    family: Family,
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl CalculusSpec {
    pub fn new(family: Family, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(alpha) || !ok(beta) {
            return domain(format!("alpha and beta must be positive, got ({alpha}, {beta})"));
        }
        if !(gamma.is_finite() && gamma != 0.0) {
            return domain(format!("gamma must be nonzero, got {gamma}"));
        }
        Ok(Self { family, alpha, beta, gamma })
    }

    pub fn homogeneous(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        Self::new(Family::Homogeneous, alpha, beta, gamma)
    }

    pub fn inhomogeneous(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        Self::new(Family::Inhomogeneous, alpha, beta, gamma)
    }

    /// Reads keys `family`, `alpha`, `beta`, `gamma`.
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let family: Family = kv.require_str("family")?.parse()?;
        Self::new(family, kv.require("alpha")?, kv.require("beta")?, kv.require("gamma")?)
    }

    pub fn write_kv(&self, kv: &mut KeyValues) {
        kv.insert("family", self.family.name());
        kv.insert("alpha", self.alpha);
        kv.insert("beta", self.beta);
        kv.insert("gamma", self.gamma);
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eval_m(&self, a: f64, b: f64) -> Result<f64> {
        if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
            return domain(format!("m needs finite nonnegative arguments, got ({a}, {b})"));
        }
        let s = a.powf(self.alpha) + b.powf(self.beta);
        match self.family {
            Family::Homogeneous => {
                if s == 0.0 && self.gamma < 0.0 {
                    return domain("m has a pole at the origin for negative gamma");
                }
                Ok(s.powf(self.gamma))
            }
            Family::Inhomogeneous => Ok((1.0 + s).powf(self.gamma)),
        }
    }

    /// Value `s` of `a^α + b^β` on the level set `m = μ`.
    pub fn level(&self, mu: f64) -> Result<f64> {
        if !(mu > 0.0 && mu.is_finite()) {
            return domain(format!("spectral value must be positive, got {mu}"));
        }
        let t = mu.ln() / self.gamma;
        let s = match self.family {
            Family::Homogeneous => t.exp(),
            Family::Inhomogeneous => t.exp_m1(),
        };
        if s <= 0.0 {
            return domain(format!(
                "no positive root: mu^(1/gamma) = {} is not above 1",
                t.exp()
            ));
        }
        if !s.is_finite() || s < f64::MIN_POSITIVE {
            return Err(Error::Numerical(format!("level set value {s:e} leaves the f64 range")));
        }
        Ok(s)
    }

    /// `ds/dμ = μ^{1/γ − 1} / γ`.
    pub fn level_derivative(&self, mu: f64) -> f64 {
        ((1.0 / self.gamma - 1.0) * mu.ln()).exp() / self.gamma
    }

    /// Open interval of `μ` with a positive root.
    pub fn spectral_range(&self) -> (f64, f64) {
        match (self.family, self.gamma > 0.0) {
            (Family::Homogeneous, _) => (0.0, f64::INFINITY),
            (Family::Inhomogeneous, true) => (1.0, f64::INFINITY),
            (Family::Inhomogeneous, false) => (0.0, 1.0),
        }
    }

    pub fn contains(&self, mu: f64) -> bool {
        let (lo, hi) = self.spectral_range();
        mu > lo && mu < hi
    }

    /// `1/α − 1/(2β)`.
    pub fn scale_gap(&self) -> f64 {
        1.0 / self.alpha - 0.5 / self.beta
    }

    /// `[c₁, c₂]` containing `μ |μ_k′| / μ_k` for the homogeneous family.
    pub fn comparability_window(&self) -> (f64, f64) {
        let lo = self.alpha.min(2.0 * self.beta);
        let hi = self.alpha.max(2.0 * self.beta);
        let g = self.gamma.abs();
        (1.0 / (g * hi), 1.0 / (g * lo))
    }
}

/// A root `μ_k` of `m((2k+n)λ, λ²) = μ` and its `μ`-derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub mu: f64,
    pub k: usize,
    pub n: usize,
    pub mu_k: f64,
    pub mu_k_prime: f64,
}

impl SpectralPoint {
    /// Joint eigenvalue `((2k+n)μ_k, μ_k²)` of `(ℒ, −Δ_z)`.
    pub fn ray_point(&self) -> (f64, f64) {
        ((2 * self.k + self.n) as f64 * self.mu_k, self.mu_k * self.mu_k)
    }
}

pub fn solve_mu_k(spec: &CalculusSpec, mu: f64, k: usize, n: usize) -> Result<SpectralPoint> {
    if n == 0 {
        return domain("half-dimension n must be at least 1");
    }
    let s = spec.level(mu)?;
    let c = (2 * k + n) as f64;
    let (a, b2) = (spec.alpha, 2.0 * spec.beta);
    let g = |x: f64| (c * x).powf(a) + x.powf(b2);

    // Each term is at most s/2 at lo, one of them equals s at hi.
    let mut lo = (0.5 * s).powf(1.0 / b2).min((0.5 * s).powf(1.0 / a) / c);
    let mut hi = s.powf(1.0 / b2).min(s.powf(1.0 / a) / c);
    if !(lo > 0.0 && hi.is_finite()) {
        return Err(Error::Numerical(format!("root bracket [{lo:e}, {hi:e}] degenerate")));
    }
    // Tighten with (cλ)^α = s − λ^{2β} and λ^{2β} = s − (cλ)^α: each bound on
    // one term bounds the other. Only ends that keep the sign of g are taken.
    for _ in 0..4 {
        let up = ((s - lo.powf(b2)).max(0.0).powf(1.0 / a) / c)
            .min((s - (c * lo).powf(a)).max(0.0).powf(1.0 / b2));
        if up < hi && up > lo && g(up) >= s {
            hi = up;
        }
        let down = ((s - hi.powf(b2)).max(0.0).powf(1.0 / a) / c)
            .max((s - (c * hi).powf(a)).max(0.0).powf(1.0 / b2));
        if down > lo && down < hi && g(down) < s {
            lo = down;
        }
    }
    for _ in 0..2000 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = if (g(lo) - s).abs() <= (g(hi) - s).abs() { lo } else { hi };

    let m = spec.eval_m(c * lambda, lambda * lambda)?;
    let rel = (m - mu).abs() / mu;
    if rel > ROOT_TOLERANCE {
        return Err(Error::Numerical(format!(
            "root certificate failed: relative defect {rel:e} at k = {k}, mu = {mu:e}"
        )));
    }
    let slope = (a * (c * lambda).powf(a) + b2 * lambda.powf(b2)) / lambda;
    Ok(SpectralPoint {
        mu,
        k,
        n,
        mu_k: lambda,
        mu_k_prime: spec.level_derivative(mu) / slope,
    })
}

/// Root of `m((2k+n)λ, λ²) = μ` on `(0, hi]` for a user-supplied `m`.
///
/// `m` is accepted only if `λ ↦ m((2k+n)λ, λ²)` is strictly monotone on a
/// 512-point scan of the bracket.
pub fn solve_custom<M>(m: M, mu: f64, k: usize, n: usize, hi: f64) -> Result<f64>
where
    M: Fn(f64, f64) -> f64,
{
    if n == 0 || !(hi > 0.0 && hi.is_finite()) {
        return domain("custom root needs n ≥ 1 and a positive finite bracket");
    }
    let c = (2 * k + n) as f64;
    let g = |x: f64| m(c * x, x * x);
    const SCAN: usize = 512;
    let samples: Vec<f64> = (1..=SCAN).map(|i| g(hi * i as f64 / SCAN as f64)).collect();
    let increasing = samples.windows(2).all(|w| w[1] > w[0]);
    let decreasing = samples.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) || samples.iter().any(|v| !v.is_finite()) {
        return domain("m is not strictly monotone along the spectrum ray on the bracket");
    }
    let below = |x: f64| if increasing { g(x) < mu } else { g(x) > mu };
    let (mut lo, mut top) = (0.0, hi);
    if below(top) {
        return domain(format!("mu = {mu} is not attained on the bracket (0, {hi}]"));
    }
    for _ in 0..2000 {
        let mid = lo + 0.5 * (top - lo);
        if mid <= lo || mid >= top {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            top = mid;
        }
    }
    Ok(top)
}

/// `𝔉_z f(·, η) = Σ_j f(·, z_j) e^{iη z_j} h_z`.
///
/// At off-grid `η` this is the band-limited (Dirichlet kernel) interpolation of
/// the discrete z-spectrum.
pub fn central_fourier(f: &ProductField, eta: f64) -> SampledField {
    let axis = f.axis();
    let h = axis.spacing();
    let mut acc = vec![Complex64::new(0.0, 0.0); f.vgrid().len()];
    for (j, slice) in f.slices().iter().enumerate() {
        let w = Complex64::from_polar(h, eta * axis.coordinate(j));
        for (a, &x) in acc.iter_mut().zip(slice.values()) {
            *a += w * x;
        }
    }
    SampledField::from_raw(*f.vgrid(), acc)
}

/// One term `profile(v) e^{−iλz}` of `P_μ^m f`, with `λ = ω μ_k`.
#[derive(Debug, Clone)]
pub struct RestrictionMode {
    pub point: SpectralPoint,
    pub omega: f64,
    pub profile: SampledField,
}

impl RestrictionMode {
    pub fn lambda(&self) -> f64 {
        self.omega * self.point.mu_k
    }
}

#[derive(Debug, Clone)]
pub struct RestrictedField {
    mu: f64,
    vgrid: GridSpec,
    modes: Vec<RestrictionMode>,
}

impl RestrictedField {
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn vgrid(&self) -> &GridSpec {
        &self.vgrid
    }

    pub fn modes(&self) -> &[RestrictionMode] {
        &self.modes
    }

    /// `(Σ ‖profile‖₂²)^{1/2}`, the L² norm in the modal representation.
    pub fn norm(&self) -> f64 {
        self.modes.iter().map(|m| m.profile.l2_norm().powi(2)).sum::<f64>().sqrt()
    }

    /// `m(ℒ, −Δ_z)` applied mode by mode.
    pub fn apply_multiplier(&self, spec: &CalculusSpec) -> Result<Self> {
        let modes = self
            .modes
            .iter()
            .map(|m| {
                let (a, b) = m.point.ray_point();
                let factor = spec.eval_m(a, b)?;
                Ok(RestrictionMode { profile: m.profile.scale_real(factor), ..m.clone() })
            })
            .collect::<Result<_>>()?;
        Ok(Self { modes, ..self.clone() })
    }

    /// Modal L² distance, for fields built from the same roots.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.modes.len() != other.modes.len() {
            return Err(Error::GridMismatch("restricted fields with different mode sets".into()));
        }
        let mut s = 0.0;
        for (a, b) in self.modes.iter().zip(&other.modes) {
            if a.point.k != b.point.k || a.omega != b.omega {
                return Err(Error::GridMismatch("restricted fields with different mode sets".into()));
            }
            s += a.profile.sub(&b.profile)?.l2_norm().powi(2);
        }
        Ok(s.sqrt())
    }

    pub fn scale_real(&self, c: f64) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|m| RestrictionMode { profile: m.profile.scale_real(c), ..m.clone() })
            .collect();
        Self { modes, ..self.clone() }
    }

    /// Samples `Σ profile(v) e^{−iλz}` on a central axis.
    pub fn sample(&self, axis: CentralAxis) -> ProductField {
        let slices = (0..axis.points())
            .into_par_iter()
            .map(|j| {
                let z = axis.coordinate(j);
                let mut acc = vec![Complex64::new(0.0, 0.0); self.vgrid.len()];
                for m in &self.modes {
                    let w = Complex64::from_polar(1.0, -m.lambda() * z);
                    for (a, &x) in acc.iter_mut().zip(m.profile.values()) {
                        *a += w * x;
                    }
                }
                SampledField::from_raw(self.vgrid, acc)
            })
            .collect();
        ProductField::from_slices(axis, slices).expect("one slice per axis point")
    }
}

/// `P_μ^m f` truncated to `k ≤ cutoff`.
pub fn restriction_apply(
    f: &ProductField,
    mu: f64,
    spec: &CalculusSpec,
    cutoff: usize,
) -> Result<RestrictedField> {
    let degrees: Vec<usize> = (0..=cutoff).collect();
    restriction_modes(f, mu, spec, &degrees)
}

/// The `(k, ±)` terms of `P_μ^m f` for the listed degrees.
pub fn restriction_modes(
    f: &ProductField,
    mu: f64,
    spec: &CalculusSpec,
    degrees: &[usize],
) -> Result<RestrictedField> {
    let vgrid = *f.vgrid();
    let n = vgrid.n();
    if n != 1 {
        return Err(Error::Unsupported(format!(
            "the restriction operator is implemented for n = 1, got n = {n}"
        )));
    }
    let nyquist = f.axis().nyquist();
    let points = degrees
        .iter()
        .map(|&k| solve_mu_k(spec, mu, k, n))
        .collect::<Result<Vec<_>>>()?;
    if let Some(p) = points.iter().find(|p| p.mu_k > nyquist) {
        return Err(Error::Resolution { frequency: p.mu_k, nyquist });
    }
    let norm = (2.0 * PI).powi(-((n + CENTRAL_DIM) as i32));
    let tasks: Vec<(SpectralPoint, f64)> = points
        .iter()
        .flat_map(|&p| [(p, 1.0), (p, -1.0)])
        .collect();
    let modes = tasks
        .into_par_iter()
        .map(|(point, omega)| {
            let lambda = omega * point.mu_k;
            let spectrum = central_fourier(f, lambda);
            let kernel = ProjectorKernel::new(vgrid, &[point.k], lambda)?;
            let image = kernel.apply(&spectrum)?.remove(0);
            let weight = norm
                * point.mu_k.powi((n + CENTRAL_DIM - 1) as i32)
                * point.mu_k_prime.abs();
            Ok(RestrictionMode { point, omega, profile: image.scale_real(weight) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RestrictedField { mu, vgrid, modes })
}

/// `‖m(ℒ,−Δ_z) P_μ f − μ P_μ f‖ / ‖μ P_μ f‖` in the modal norm.
///
/// Fails with [`Error::UndefinedResidual`] when `‖P_μ f‖ ≤ LEAKAGE_FLOOR ‖f‖₂`.
pub fn eigen_check(f: &ProductField, mu: f64, spec: &CalculusSpec, cutoff: usize) -> Result<f64> {
    let restricted = restriction_apply(f, mu, spec, cutoff)?;
    let output = restricted.norm();
    let input = f.l2_norm();
    if !(output > LEAKAGE_FLOOR * input) {
        return Err(Error::UndefinedResidual { output, input, floor: LEAKAGE_FLOOR });
    }
    let image = restricted.apply_multiplier(spec)?;
    let scaled = restricted.scale_real(mu);
    Ok(image.distance(&scaled)? / scaled.norm())
}

/// `∫ P_μ^m f dμ` over the part of the spectrum with `|η| ∈ [band.0, band.1]`.
///
/// Each degree is integrated over its own μ-window (the image of the band under
/// `λ ↦ m((2k+n)λ, λ²)`) with `panels × nodes` Gauss–Legendre points.
pub fn band_limited_recovery(
    f: &ProductField,
    spec: &CalculusSpec,
    cutoff: usize,
    band: (f64, f64),
    panels: usize,
    nodes: usize,
) -> Result<ProductField> {
    let (lo, hi) = band;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return domain(format!("band must satisfy 0 < lo < hi, got ({lo}, {hi})"));
    }
    if panels == 0 || nodes == 0 {
        return domain("need at least one panel and one node");
    }
    let n = f.vgrid().n();
    let rule = GaussLegendre::new(nodes);
    let mut quadrature: Vec<(usize, f64, f64)> = Vec::new();
    for k in 0..=cutoff {
        let c = (2 * k + n) as f64;
        let a = spec.eval_m(c * lo, lo * lo)?;
        let b = spec.eval_m(c * hi, hi * hi)?;
        let (a, b) = (a.min(b), a.max(b));
        let width = (b - a) / panels as f64;
        for p in 0..panels {
            let left = a + p as f64 * width;
            for (x, w) in rule.nodes().iter().zip(rule.weights()) {
                quadrature.push((k, left + 0.5 * width * (x + 1.0), 0.5 * width * w));
            }
        }
    }
    let axis = *f.axis();
    let parts = quadrature
        .into_par_iter()
        .map(|(k, mu, w)| {
            let field = restriction_modes(f, mu, spec, &[k])?;
            Ok(field.scale_real(w).sample(axis))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = ProductField::zeros(*f.vgrid(), axis);
    for p in parts {
        total = total.add(&p)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_m_examples() {
        let h = CalculusSpec::homogeneous(1.0, 1.0, 1.0).unwrap();
        assert_eq!(h.eval_m(1.0, 1.0).unwrap(), 2.0);
        let i = CalculusSpec::inhomogeneous(1.3, 0.7, -2.0).unwrap();
        assert_eq!(i.eval_m(0.0, 0.0).unwrap(), 1.0);
        let s = CalculusSpec::homogeneous(2.0, 1.0, 0.5).unwrap();
        assert!((s.eval_m(3.0, 4.0).unwrap() - 13f64.sqrt()).abs() < 1e-15);
        let pole = CalculusSpec::homogeneous(1.0, 1.0, -1.0).unwrap();
        assert!(matches!(pole.eval_m(0.0, 0.0), Err(Error::Domain(_))));
        assert!(h.eval_m(-1.0, 0.0).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(CalculusSpec::homogeneous(0.0, 1.0, 1.0).is_err());
        assert!(CalculusSpec::homogeneous(1.0, -1.0, 1.0).is_err());
        assert!(CalculusSpec::homogeneous(1.0, 1.0, 0.0).is_err());
        let mut kv = KeyValues::new();
        CalculusSpec::inhomogeneous(1.5, 0.5, -1.0).unwrap().write_kv(&mut kv);
        let back = CalculusSpec::from_kv(&kv).unwrap();
        assert_eq!(back, CalculusSpec::inhomogeneous(1.5, 0.5, -1.0).unwrap());
    }

    #[test]
    fn root_examples() {
        let h = CalculusSpec::homogeneous(1.0, 1.0, 1.0).unwrap();
        let p = solve_mu_k(&h, 2.0, 0, 1).unwrap();
        assert!((p.mu_k - 1.0).abs() < 1e-13);
        let p = solve_mu_k(&h, 6.0, 0, 1).unwrap();
        assert!((p.mu_k - 2.0).abs() < 1e-13);
        assert!((p.mu_k_prime - 0.2).abs() < 1e-13);
        let r = CalculusSpec::inhomogeneous(1.0, 1.0, -1.0).unwrap();
        let p = solve_mu_k(&r, 1.0 / 3.0, 0, 1).unwrap();
        assert!((p.mu_k - 1.0).abs() < 1e-13);
        assert!(p.mu_k_prime < 0.0);
    }

    #[test]
    fn empty_root_domain() {
        let r = CalculusSpec::inhomogeneous(1.0, 1.0, -1.0).unwrap();
        assert!(matches!(solve_mu_k(&r, 1.5, 0, 1), Err(Error::Domain(_))));
        assert!(matches!(solve_mu_k(&r, 1.0, 0, 1), Err(Error::Domain(_))));
        let g = CalculusSpec::inhomogeneous(1.0, 1.0, 2.0).unwrap();
        assert!(solve_mu_k(&g, 0.5, 0, 1).is_err());
        assert!(solve_mu_k(&g, 4.0, 0, 1).is_ok());
        assert!(solve_mu_k(&g, 4.0, 0, 0).is_err());
    }

    #[test]
    fn custom_m_matches_family_and_rejects_non_monotone() {
        let h = CalculusSpec::homogeneous(1.5, 0.8, 1.2).unwrap();
        let exact = solve_mu_k(&h, 7.0, 2, 1).unwrap().mu_k;
        let custom = solve_custom(|a, b| h.eval_m(a, b).unwrap(), 7.0, 2, 1, 10.0).unwrap();
        assert!((custom - exact).abs() < 1e-12 * exact);
        assert!(solve_custom(|a, _| (a - 1.0).powi(2), 0.5, 0, 1, 4.0).is_err());
    }
}
