use metivier_core::specfun::HermiteProfile;
use metivier_core::twisted::{
    project_many, projector_normalization, reconstruct, twisted_laplacian, ProjectorKernel,
};
use metivier_core::{GridSpec, SampledField};
use num_complex::Complex64;

use crate::config::{get, list, load};
use crate::report::Report;
use crate::{Context, Failure};

const KEYS: [&str; 9] = [
    "half_width",
    "points",
    "lambda",
    "max_degree",
    "probe_degrees",
    "tolerance",
    "eigen_half_width",
    "eigen_max_degree",
    "eigen_tolerance",
];

fn generic(grid: GridSpec) -> SampledField {
    SampledField::from_fn(grid, |x| {
        let (a, b) = (x[0] - 0.7, x[1] + 0.4);
        let g = (-(a * a + 1.3 * b * b) / 2.5).exp();
        Complex64::new(g * (1.0 + 0.3 * x[1]), 0.5 * g * x[0])
    })
}

fn hermite(grid: GridSpec, k: usize, lambda: f64) -> Result<SampledField, Failure> {
    let p = HermiteProfile::new(k, 1, lambda.abs())?;
    Ok(SampledField::from_fn(grid, |x| Complex64::new(p.eval_r2(x[0] * x[0] + x[1] * x[1]), 0.0)))
}

pub fn verify_projectors(ctx: &Context) -> Result<bool, Failure> {
    let kv = load(ctx.config.as_deref(), "verify-projectors", &KEYS)?;
    let half_width = get(&kv, "half_width", 8.0)?;
    let points = get(&kv, "points", 128usize)?;
    let lambda = get(&kv, "lambda", 1.0)?;
    let max_degree = get(&kv, "max_degree", 8usize)?;
    let probes = list(&kv, "probe_degrees", vec![0usize, 4, 8])?;
    let tol = get(&kv, "tolerance", 1e-3)?;
    let eigen_half_width = get(&kv, "eigen_half_width", 12.0)?;
    let eigen_max = get(&kv, "eigen_max_degree", 6usize)?;
    let eigen_tol = get(&kv, "eigen_tolerance", 1e-2)?;
    if let Some(&k) = probes.iter().find(|&&k| k > max_degree) {
        return Err(Failure::Usage(format!("probe degree {k} exceeds max_degree {max_degree}")));
    }
    if max_degree < 3 {
        return Err(Failure::Usage("max_degree must be at least 3 for the reconstruction check".into()));
    }

    let mut report = Report::new("verify-projectors", &ctx.out)?;
    let mut csv = String::from("check,k,j,relative_error,tolerance,pass\n");
    let mut row = |report: &mut Report, check: &str, k: usize, j: usize, err: f64, t: f64| {
        let pass = err <= t;
        csv.push_str(&format!("{check},{k},{j},{err:e},{t:e},{pass}\n"));
        report.check(format!("{check} k={k} j={j}"), pass, format!("relative error {err:.3e} (tolerance {t:e})"));
    };

    // Normalized projectors P_k = (2π)^{-1} |λ| Λ_k on the main grid.
    let grid = GridSpec::new(1, half_width, points)?;
    let f = generic(grid);
    let c = projector_normalization(1, lambda);
    let degrees: Vec<usize> = (0..=max_degree).collect();
    let kernel = ProjectorKernel::new(grid, &degrees, lambda)?;
    let first: Vec<SampledField> = kernel.apply(&f)?.into_iter().map(|p| p.scale_real(c)).collect();
    let scale = f.l2_norm();
    for &k in &probes {
        let second = kernel.apply(&first[k])?;
        for (j, pjk) in second.into_iter().enumerate() {
            let pjk = pjk.scale_real(c);
            if j == k {
                let err = pjk.sub(&first[k])?.l2_norm() / scale;
                row(&mut report, "idempotency", k, j, err, tol);
            } else {
                row(&mut report, "orthogonality", k, j, pjk.l2_norm() / scale, tol);
            }
        }
    }
    let target = hermite(grid, 1, lambda)?.add(&hermite(grid, 3, lambda)?.scale_real(0.5))?;
    let back = reconstruct(&target, lambda, max_degree)?;
    row(&mut report, "reconstruction", max_degree, 0, back.relative_l2_distance(&target)?, tol);

    // Eigen-relation at the same spacing on a wider grid.
    let h = grid.spacing();
    let mut eigen_points = (2.0 * eigen_half_width / h).round() as usize;
    eigen_points += eigen_points % 2;
    let wide = GridSpec::new(1, eigen_half_width, eigen_points)?;
    let g = generic(wide);
    let degrees: Vec<usize> = (0..=eigen_max).collect();
    let parts = project_many(&g, &degrees, lambda)?;
    for (&k, part) in degrees.iter().zip(&parts) {
        let ev = (2 * k + 1) as f64 * lambda.abs();
        let img = twisted_laplacian(part, lambda)?;
        if let Some(w) = img.warning() {
            report.note(format!("note k={k}: {w}"));
        }
        let err = img.field.sub(&part.scale_real(ev))?.l2_norm() / (ev * part.l2_norm());
        row(&mut report, "eigen", k, k, err, eigen_tol);
    }
    report.csv("verify_projectors.csv", &csv)?;
    report.finish()
}
