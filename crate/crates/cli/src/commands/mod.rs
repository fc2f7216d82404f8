mod algebra;
mod bounds;
mod mixnorm;
mod norms;
mod projectors;

pub use algebra::metivier_check;
pub use bounds::bound_scaling;
pub use mixnorm::mixnorm;
pub use norms::norm_scaling;
pub use projectors::verify_projectors;

use metivier_core::bounds::Lebesgue;
use metivier_core::calculus::{CalculusSpec, Family};
use metivier_core::kv::KeyValues;

use crate::config::get;
use crate::Failure;

pub(crate) const SPEC_KEYS: [&str; 4] = ["family", "alpha", "beta", "gamma"];
pub(crate) const LEBESGUE_KEYS: [&str; 3] = ["p", "q", "r"];

/// `(family, α, β, γ)`, defaulting to the homogeneous `α = β = γ = 1`.
pub(crate) fn spec_from(kv: &KeyValues) -> Result<CalculusSpec, Failure> {
    let family: Family = get(kv, "family", Family::Homogeneous)?;
    let a = get(kv, "alpha", 1.0)?;
    let b = get(kv, "beta", 1.0)?;
    let g = get(kv, "gamma", 1.0)?;
    CalculusSpec::new(family, a, b, g).map_err(|e| Failure::Usage(e.to_string()))
}

pub(crate) fn lebesgue_from(kv: &KeyValues, p: f64, q: f64, r: f64) -> Result<Lebesgue, Failure> {
    Ok(Lebesgue::new(get(kv, "p", p)?, get(kv, "q", q)?, get(kv, "r", r)?))
}

/// `2^e` for `e = lo, lo + step, …, hi`.
pub(crate) fn exponents_between(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, Failure> {
    if !(step > 0.0 && hi >= lo) {
        return Err(Failure::Usage(format!("need exp_hi >= exp_lo and exp_step > 0, got {lo}, {hi}, {step}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| lo + i as f64 * step).collect())
}
