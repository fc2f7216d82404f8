use std::path::Path;

use metivier_core::group::{
    is_htype, is_metivier, muller_seeger_example, muller_seeger_j, StepTwoAlgebra,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{get, load};
use crate::report::Report;
use crate::{Context, Failure};

const KEYS: [&str; 3] = ["samples", "det_points", "det_tolerance"];

fn fixture(name: &str) -> Result<StepTwoAlgebra, Failure> {
    match name {
        "muller-seeger" => Ok(muller_seeger_example()),
        "heisenberg" => Ok(StepTwoAlgebra::heisenberg(1)),
        "zero" => Ok(StepTwoAlgebra::new(1, vec![DMatrix::zeros(2, 2)])?),
        other => Err(Failure::Usage(format!(
            "unknown fixture `{other}` (expected muller-seeger, heisenberg or zero)"
        ))),
    }
}

fn yes(b: bool) -> &'static str {
    if b { "yes" } else { "no" }
}

pub fn metivier_check(ctx: &Context, name: &str, file: Option<&Path>) -> Result<bool, Failure> {
    let kv = load(ctx.config.as_deref(), "metivier-check", &KEYS)?;
    let samples = get(&kv, "samples", 10_000usize)?;
    let det_points = get(&kv, "det_points", 100usize)?;
    let det_tol = get(&kv, "det_tolerance", 1e-10)?;
    let (label, alg) = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read algebra {}: {e}", path.display())))?;
            let alg = StepTwoAlgebra::parse(&text)
                .map_err(|e| Failure::Usage(format!("malformed algebra {}: {e}", path.display())))?;
            (path.display().to_string(), alg)
        }
        None => (name.to_string(), fixture(name)?),
    };

    let mut report = Report::new("metivier-check", &ctx.out)?;
    let m = is_metivier(&alg, samples);
    let h = is_htype(&alg, samples);
    report.note(format!("algebra: {label} (n = {}, d = {})", alg.n(), alg.d()));
    report.note(format!("Metivier: {} (margin {:e} over {} directions)", yes(m.metivier), m.margin, m.samples));
    report.note(format!("H-type: {} (defect {:e} over {} directions)", yes(h.htype), h.defect, h.samples));
    let mut csv = String::from("quantity,value\n");
    csv.push_str(&format!("algebra,{label}\nn,{}\nd,{}\n", alg.n(), alg.d()));
    csv.push_str(&format!("metivier,{}\nmetivier_margin,{:e}\n", yes(m.metivier), m.margin));
    csv.push_str(&format!("htype,{}\nhtype_defect,{:e}\nsamples,{}\n", yes(h.htype), h.defect, m.samples));
    // An H-type algebra is always Métivier.
    report.check("htype implies metivier", !h.htype || m.metivier, format!("{} / {}", yes(h.htype), yes(m.metivier)));

    if file.is_none() && name == "muller-seeger" {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        let mut worst = 0.0f64;
        for _ in 0..det_points {
            let (z1, z2): (f64, f64) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let expect = (z1.powi(4) + z2.powi(4)).powi(2);
            worst = worst.max((muller_seeger_j(z1, z2).determinant() - expect).abs() / expect);
        }
        csv.push_str(&format!("det_identity_max_relative,{worst:e}\n"));
        report.check(
            "det J_z = (z1^4 + z2^4)^2",
            worst <= det_tol,
            format!("max relative residual {worst:.3e} over {det_points} points (tolerance {det_tol:e})"),
        );
    }
    report.csv("metivier_check.csv", &csv)?;
    report.finish()
}
