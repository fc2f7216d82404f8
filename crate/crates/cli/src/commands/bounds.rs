use metivier_core::bounds::{nu_analysis, BoundCurve, ExponentParams, FitVariable};
use metivier_core::calculus::Family;

use super::{exponents_between, lebesgue_from, spec_from, LEBESGUE_KEYS, SPEC_KEYS};
use crate::config::{get, load};
use crate::report::{num, Report};
use crate::{Context, Failure};

const OWN_KEYS: [&str; 6] = ["n", "d", "exp_lo", "exp_hi", "exp_step", "tolerance"];

pub fn bound_scaling(ctx: &Context) -> Result<bool, Failure> {
    let allowed: Vec<&str> = SPEC_KEYS.iter().chain(&LEBESGUE_KEYS).chain(&OWN_KEYS).copied().collect();
    let kv = load(ctx.config.as_deref(), "bound-scaling", &allowed)?;
    let spec = spec_from(&kv)?;
    let exps = lebesgue_from(&kv, 1.0, f64::INFINITY, 1.0)?;
    let (n, d) = (get(&kv, "n", 1usize)?, get(&kv, "d", 2usize)?);
    let analysis = nu_analysis(exps, n, d).map_err(|e| Failure::Usage(e.to_string()))?;
    if analysis.endpoint {
        return Err(Failure::Usage(
            "rejected: (d, r, p, q) = (1, 1, 2, 2) is the excluded endpoint, where nu = -1 and the series bound diverges"
                .into(),
        ));
    }
    if analysis.nu >= -1.0 {
        return Err(Failure::Usage(format!("rejected: nu = {} is not below -1", analysis.nu)));
    }
    let params = ExponentParams::for_spec(&spec, exps, n, d).map_err(|e| Failure::Usage(e.to_string()))?;
    let es = exponents_between(get(&kv, "exp_lo", 10.0)?, get(&kv, "exp_hi", 30.0)?, get(&kv, "exp_step", 2.0)?)?;
    let tol = get(&kv, "tolerance", 0.05)?;

    // Each window sits ≥ 2^exp_lo away from the regime boundary.
    let up: Vec<f64> = es.iter().map(|e| e.exp2()).collect();
    let down: Vec<f64> = es.iter().rev().map(|e| (-e).exp2()).collect();
    let windows: Vec<(&str, Vec<f64>)> = match (spec.family(), spec.gamma() > 0.0) {
        (Family::Homogeneous, _) => vec![("mu_large", up), ("mu_small", down)],
        (Family::Inhomogeneous, true) => {
            vec![("far", up), ("near_one", down.iter().rev().map(|t| 1.0 + t).collect())]
        }
        (Family::Inhomogeneous, false) => {
            vec![("far", down.clone()), ("near_one", down.iter().rev().map(|t| 1.0 - t).collect())]
        }
    };

    let mut report = Report::new("bound-scaling", &ctx.out)?;
    let mut points = String::from("window,mu,value,tail_fraction,regime,predicted_exponent\n");
    let mut fits = String::from(
        "family,alpha,beta,gamma,p,q,r,n,d,window,regime,variable,fitted_slope,predicted_exponent,tolerance,pass\n",
    );
    for (name, mus) in &windows {
        let curve = BoundCurve::evaluate(&spec, &params, mus)?;
        for line in curve.to_csv().lines().skip(1) {
            points.push_str(&format!("{name},{line}\n"));
        }
        let first = &curve.points[0].prediction;
        let single = curve.points.iter().all(|p| p.prediction.exponent == first.exponent);
        let converged = curve.points.iter().all(|p| p.converged);
        let slope = curve.fit()?.slope;
        let pass = single && converged && (slope - first.exponent).abs() <= tol;
        let variable = match first.variable {
            FitVariable::Mu => "mu",
            FitVariable::DistanceToOne => "abs(1-mu)",
        };
        fits.push_str(&format!(
            "{},{},{},{},{},{},{},{n},{d},{name},\"{} -> {}\",{variable},{slope},{},{tol},{pass}\n",
            spec.family().name(),
            spec.alpha(),
            spec.beta(),
            spec.gamma(),
            num(exps.p),
            num(exps.q),
            num(exps.r),
            first.regime,
            first.branch,
            first.exponent,
        ));
        let mut detail = format!("slope {slope:.4} in {variable} vs {} = {:.4}", first.branch, first.exponent);
        if !single {
            detail.push_str("; window straddles regimes");
        }
        if !converged {
            detail.push_str("; tail did not converge");
        }
        report.check(format!("{name} ({})", first.regime), pass, detail);
    }
    report.csv("bound_points.csv", &points)?;
    report.csv("bound_fits.csv", &fits)?;
    report.finish()
}
