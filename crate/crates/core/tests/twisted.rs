use std::f64::consts::PI;

use metivier_core::specfun::{phi_l2_norm, HermiteProfile};
use metivier_core::twisted::{
    dilation_check, project, project_many, projector_normalization, reconstruct, twisted_convolve,
    twisted_laplacian, ProjectorKernel,
};
use metivier_core::{GridSpec, SampledField};
use num_complex::Complex64;

fn phi(grid: GridSpec, k: usize, lambda: f64) -> SampledField {
    let p = HermiteProfile::new(k, 1, lambda).unwrap();
    SampledField::from_fn(grid, |x| Complex64::new(p.eval_r2(x[0] * x[0] + x[1] * x[1]), 0.0))
}

fn generic(grid: GridSpec) -> SampledField {
    SampledField::from_fn(grid, |x| {
        let (a, b) = (x[0] - 0.7, x[1] + 0.4);
        let g = (-(a * a + 1.3 * b * b) / 2.5).exp();
        Complex64::new(g * (1.0 + 0.3 * x[1]), 0.5 * g * x[0])
    })
}

#[test]
fn projector_reproduces_its_own_profile() {
    let grid = GridSpec::desk();
    for k in [0, 3] {
        let f = phi(grid, k, 1.0);
        let out = project(&f, k, 1.0).unwrap();
        let expect = f.scale_real(2.0 * PI);
        assert!(out.relative_l2_distance(&expect).unwrap() < 1e-3, "k = {k}");
        let other = project(&f, k + 1, 1.0).unwrap();
        assert!(other.l2_norm() < 1e-3 * f.l2_norm());
    }
}

#[test]
fn reconstruction_examples() {
    let grid = GridSpec::desk();
    let f = phi(grid, 2, 1.0);
    let r2 = reconstruct(&f, 1.0, 2).unwrap();
    assert!(r2.relative_l2_distance(&f).unwrap() < 1e-3);
    let r1 = reconstruct(&f, 1.0, 1).unwrap();
    assert!(r1.l2_norm() < 1e-3 * f.l2_norm());
}

#[test]
fn twisted_convolution_of_hermite_functions() {
    let grid = GridSpec::new(1, 8.0, 96).unwrap();
    let p0 = phi(grid, 0, 1.0);
    let p2 = phi(grid, 2, 1.0);
    let same = twisted_convolve(&p2, &p2, 1.0).unwrap();
    assert!(same.relative_l2_distance(&p2.scale_real(2.0 * PI)).unwrap() < 1e-3);
    let cross = twisted_convolve(&p0, &p2, 1.0).unwrap();
    assert!(cross.l2_norm() < 1e-3 * p2.l2_norm());
}

#[test]
fn projector_is_symmetric_in_the_grid_inner_product() {
    let grid = GridSpec::new(1, 8.0, 64).unwrap();
    let f = generic(grid);
    let g = phi(grid, 1, 1.0).add(&SampledField::from_fn(grid, |x| {
        Complex64::new(0.0, (-(x[0] + 1.0).powi(2) - x[1] * x[1]).exp())
    }))
    .unwrap();
    for (k, lambda) in [(0, 1.0), (2, -0.8), (5, 1.7)] {
        let pf = project(&f, k, lambda).unwrap();
        let pg = project(&g, k, lambda).unwrap();
        let a = pf.inner(&g).unwrap();
        let b = f.inner(&pg).unwrap();
        assert!((a - b).norm() <= 1e-10 * a.norm().max(b.norm()), "k = {k}");
    }
}

#[test]
fn column_norm_matches_hermite_norm() {
    let grid = GridSpec::desk();
    let np = grid.points_per_axis();
    let kernel = ProjectorKernel::new(grid, &[0, 4], 1.0).unwrap();
    let centre = grid.origin_index() * np + grid.origin_index();
    for (slot, &k) in kernel.degrees().iter().enumerate() {
        let col: f64 = (0..grid.len())
            .map(|z| kernel.kernel(slot, z, centre).norm_sqr())
            .sum::<f64>()
            * grid.cell_volume();
        let exact = phi_l2_norm(k, 1, 1.0).unwrap();
        assert!((col.sqrt() / exact - 1.0).abs() < 1e-3, "k = {k}");
    }
}

#[test]
fn eigen_relation_for_generic_input() {
    // h = 0.125 as on the desk grid, but wide enough to hold φ_6.
    let grid = GridSpec::new(1, 12.0, 192).unwrap();
    let f = generic(grid);
    let degrees: Vec<usize> = (0..=6).collect();
    let parts = project_many(&f, &degrees, 1.0).unwrap();
    for (k, part) in degrees.iter().zip(&parts) {
        let ev = (2 * k + 1) as f64;
        let img = twisted_laplacian(part, 1.0).unwrap();
        let res = img.field.sub(&part.scale_real(ev)).unwrap().l2_norm();
        assert!(res <= 1e-2 * ev * part.l2_norm(), "k = {k}: {}", res / (ev * part.l2_norm()));
    }
}

#[test]
fn negative_lambda_uses_the_conjugate_phase() {
    let grid = GridSpec::new(1, 8.0, 64).unwrap();
    let f = generic(grid);
    let g = SampledField::new(grid, f.values().iter().map(|v| v.conj()).collect()).unwrap();
    let a = project(&f, 2, -1.0).unwrap();
    let b = project(&g, 2, 1.0).unwrap();
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!((x - y.conj()).norm() < 1e-12);
    }
}

#[test]
fn normalized_projectors_are_idempotent_and_orthogonal() {
    let grid = GridSpec::desk();
    let f = generic(grid);
    let c = projector_normalization(1, 1.0);
    let degrees: Vec<usize> = (0..=8).collect();
    let kernel = ProjectorKernel::new(grid, &degrees, 1.0).unwrap();
    let first: Vec<SampledField> = kernel
        .apply(&f)
        .unwrap()
        .into_iter()
        .map(|p| p.scale_real(c))
        .collect();
    let scale = f.l2_norm();
    for (k, pk) in first.iter().enumerate().step_by(4) {
        let second: Vec<SampledField> = kernel
            .apply(pk)
            .unwrap()
            .into_iter()
            .map(|p| p.scale_real(c))
            .collect();
        for (j, pjk) in second.iter().enumerate() {
            if j == k {
                assert!(pjk.sub(pk).unwrap().l2_norm() <= 1e-3 * scale, "idempotency k = {k}");
            } else {
                assert!(pjk.l2_norm() <= 1e-3 * scale, "orthogonality j = {j}, k = {k}");
            }
        }
    }
}

#[test]
fn dilation_identity_holds_at_commensurate_scales() {
    let grid = GridSpec::new(1, 8.0, 64).unwrap();
    let g = generic(grid);
    for lambda in [0.25, 4.0] {
        for k in [0, 3] {
            let r = dilation_check(&g, k, lambda).unwrap();
            assert!(r <= 1e-6, "lambda {lambda}, k {k}: {r}");
        }
    }
}
