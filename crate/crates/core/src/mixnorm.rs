//! Empirical mixed-norm ratios `‖P_μ^m f‖_{L_z^{r′}L_v^q} / ‖f‖_{L_z^r L_v^p}`
//! for random band-limited `f` on the `n = d = 1` configuration.
//!
//! Each `μ` gets its own grids, dilated to the largest root `λ₀ = μ_0(μ)`:
//! the v-grid has half width `v_span/√λ₀` and the z-axis `z_span/λ₀`, so the
//! sampled field looks the same at every scale.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{fit_loglog, predicted_exponent, ExponentParams, Lebesgue, LogLogFit};
use crate::calculus::{restriction_apply, solve_mu_k, CalculusSpec};
use crate::error::{domain, Error, Result};
use crate::field::{GridSpec, SampledField};
use crate::product::{CentralAxis, ProductField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixnormSetup {
    pub v_points: usize,
    pub z_points: usize,
    pub v_span: f64,
    pub z_span: f64,
    pub cutoff: usize,
    pub seed: u64,
}

impl Default for MixnormSetup {
    fn default() -> Self {
        Self { v_points: 48, z_points: 128, v_span: 8.0, z_span: 32.0, cutoff: 8, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixnormSample {
    pub mu: f64,
    pub ratio: f64,
    pub predicted: f64,
    pub regime: String,
}

fn random_field(setup: &MixnormSetup, lambda0: f64, rng: &mut ChaCha8Rng) -> Result<ProductField> {
    let vgrid = GridSpec::new(1, setup.v_span / lambda0.sqrt(), setup.v_points)?;
    let axis = CentralAxis::new(setup.z_span / lambda0, setup.z_points)?;
    let bumps: Vec<([f64; 2], f64, Complex64)> = (0..3)
        .map(|_| {
            let c = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let w = rng.random_range(0.5..2.0);
            let a = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            (c, w, a)
        })
        .collect();
    let s = lambda0.sqrt();
    let profile = SampledField::from_fn(vgrid, |v| {
        let (x, y) = (v[0] * s, v[1] * s);
        bumps
            .iter()
            .map(|(c, w, a)| a * (-((x - c[0]).powi(2) + (y - c[1]).powi(2)) / (2.0 * w)).exp())
            .sum()
    });
    // Frequency within 10% of λ₀; the z-window has spectral width λ₀/8.
    let nu = lambda0 * (1.0 + rng.random_range(-0.1..0.1));
    let sigma = 8.0 / lambda0;
    let b: Vec<Complex64> = (0..axis.points())
        .map(|j| {
            let z = axis.coordinate(j);
            Complex64::from_polar((-z * z / (2.0 * sigma * sigma)).exp(), -nu * z)
        })
        .collect();
    ProductField::separable(&profile, axis, &b)
}

/// Ratio for the `index`-th draw; the stream is fixed by `(seed, index)`.
pub fn mixnorm_ratio(
    spec: &CalculusSpec,
    exps: Lebesgue,
    mu: f64,
    setup: &MixnormSetup,
    index: u64,
) -> Result<f64> {
    let lambda0 = solve_mu_k(spec, mu, 0, 1)?.mu_k;
    let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
    rng.set_stream(index);
    let f = random_field(setup, lambda0, &mut rng)?;
    let image = restriction_apply(&f, mu, spec, setup.cutoff)?.sample(*f.axis());
    let den = f.mixed_norm(exps.p, exps.r);
    if !(den > 0.0) {
        return Err(Error::Numerical("random field vanished".into()));
    }
    Ok(image.mixed_norm(exps.q, exps.r_conj()) / den)
}

/// Ratios over `mus`, one draw per point, in input order.
pub fn mixnorm_sweep(
    spec: &CalculusSpec,
    exps: Lebesgue,
    mus: &[f64],
    setup: &MixnormSetup,
) -> Result<Vec<MixnormSample>> {
    let params = ExponentParams::for_spec(spec, exps, 1, 1)?;
    if params.is_excluded_endpoint() {
        return domain("(d, p, q) = (1, 2, 2) is the excluded endpoint (nu = -1)");
    }
    mus.par_iter()
        .enumerate()
        .map(|(i, &mu)| {
            let pred = predicted_exponent(spec, &params, mu)?;
            let ratio = mixnorm_ratio(spec, exps, mu, setup, i as u64)?;
            Ok(MixnormSample { mu, ratio, predicted: pred.exponent, regime: pred.regime })
        })
        .collect()
}

pub fn mixnorm_fit(samples: &[MixnormSample]) -> Result<LogLogFit> {
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.mu, s.ratio)).collect();
    fit_loglog(&pts)
}
