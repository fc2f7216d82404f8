use metivier_core::calculus::Family;
use metivier_core::mixnorm::{mixnorm_fit, mixnorm_sweep, MixnormSetup};

use super::{exponents_between, lebesgue_from, spec_from, LEBESGUE_KEYS, SPEC_KEYS};
use crate::config::{get, load};
use crate::report::Report;
use crate::{Context, Failure};

const OWN_KEYS: [&str; 7] = ["exp_lo", "exp_hi", "exp_step", "v_points", "z_points", "cutoff", "slack"];

pub fn mixnorm(ctx: &Context) -> Result<bool, Failure> {
    let allowed: Vec<&str> = SPEC_KEYS.iter().chain(&LEBESGUE_KEYS).chain(&OWN_KEYS).copied().collect();
    let kv = load(ctx.config.as_deref(), "mixnorm", &allowed)?;
    let spec = spec_from(&kv)?;
    if spec.family() != Family::Homogeneous {
        return Err(Failure::Usage("mixnorm supports the homogeneous family only".into()));
    }
    let exps = lebesgue_from(&kv, 1.0, 2.0, 1.0)?;
    let setup = MixnormSetup {
        v_points: get(&kv, "v_points", 48usize)?,
        z_points: get(&kv, "z_points", 128usize)?,
        cutoff: get(&kv, "cutoff", 8usize)?,
        seed: ctx.seed,
        ..MixnormSetup::default()
    };
    let slack = get(&kv, "slack", 0.1)?;
    let es = exponents_between(get(&kv, "exp_lo", 2.0)?, get(&kv, "exp_hi", 14.0)?, get(&kv, "exp_step", 1.0)?)?;
    let windows = [
        ("mu_small", es.iter().rev().map(|e| (-e).exp2()).collect::<Vec<_>>()),
        ("mu_large", es.iter().map(|e| e.exp2()).collect()),
    ];

    let mut report = Report::new("mixnorm", &ctx.out)?;
    let mut rows = String::from("window,mu,ratio,predicted_exponent,regime\n");
    let mut fits = String::from("window,fitted_slope,predicted_exponent,slack,pass\n");
    for (name, mus) in &windows {
        let samples = mixnorm_sweep(&spec, exps, mus, &setup).map_err(|e| match e {
            metivier_core::Error::Domain(m) => Failure::Usage(format!("rejected: {m}")),
            other => Failure::Core(other),
        })?;
        for s in &samples {
            rows.push_str(&format!("{name},{:e},{:e},{},\"{}\"\n", s.mu, s.ratio, s.predicted, s.regime));
        }
        let pred = samples[0].predicted;
        let single = samples.iter().all(|s| s.predicted == pred);
        let slope = mixnorm_fit(&samples)?.slope;
        let pass = single && slope <= pred + slack;
        fits.push_str(&format!("{name},{slope},{pred},{slack},{pass}\n"));
        let mut detail = format!("slope {slope:.4} <= {pred:.4} + {slack}");
        if !single {
            detail.push_str("; window straddles regimes");
        }
        report.check(format!("{name} ({})", samples[0].regime), pass, detail);
    }
    report.csv("mixnorm.csv", &rows)?;
    report.csv("mixnorm_fits.csv", &fits)?;
    report.finish()
}
