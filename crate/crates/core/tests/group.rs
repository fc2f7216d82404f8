use metivier_core::gaussian::Gaussian;
use metivier_core::group::{
    is_htype, is_metivier, lemma24_check, mixed_norm, mixed_norm_gaussian, muller_seeger_example,
    muller_seeger_j, partial_radon, radon_relation_check, sphere_samples,
    symplectic_normalize, symplectic_residual, DualDirection, GaussianTestFunction, StepTwoAlgebra,
};
use metivier_core::{CentralAxis, GridSpec, ProductField};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_gaussian(rng: &mut ChaCha8Rng, n: usize, d: usize) -> GaussianTestFunction {
    let dim = 2 * n + d;
    let b = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    let m = b.transpose() * &b / dim as f64 + DMatrix::identity(dim, dim) * 0.5;
    let lin = DVector::from_fn(dim, |_, _| {
        Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-1.0..1.0))
    });
    let c = Complex64::new(rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0));
    GaussianTestFunction::new(n, d, Gaussian::new(m, lin, c).unwrap()).unwrap()
}

fn random_probes(rng: &mut ChaCha8Rng, dim: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect())
        .collect()
}

fn random_direction(rng: &mut ChaCha8Rng, d: usize) -> DualDirection {
    let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    DualDirection::normalized(&v).unwrap()
}

#[test]
fn muller_seeger_determinant_identity_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let (z1, z2) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let j = muller_seeger_j(z1, z2);
        assert!((&j + j.transpose()).abs().max() == 0.0);
        let expect = (z1.powi(4) + z2.powi(4)).powi(2);
        let det = j.determinant();
        assert!((det - expect).abs() <= 1e-10 * expect, "z = ({z1}, {z2})");
    }
}

#[test]
fn muller_seeger_is_metivier_but_not_htype() {
    let ms = muller_seeger_example();
    let m = is_metivier(&ms, 10_000);
    assert!(m.metivier);
    // min over the circle of (z₁⁴ + z₂⁴)² is 1/4, at 45°; the entry scale is ≤ 1.
    assert!(m.margin >= 0.2);
    let h = is_htype(&ms, 10_000);
    assert!(!h.htype);
    assert!(h.defect >= 0.1);
}

#[test]
fn htype_algebras_are_metivier() {
    let algebras = vec![
        StepTwoAlgebra::heisenberg(1),
        StepTwoAlgebra::heisenberg(3),
        // Quaternionic H-type algebra, n = 2, d = 3.
        StepTwoAlgebra::new(
            2,
            vec![
                DMatrix::from_row_slice(4, 4, &[0., 1., 0., 0., -1., 0., 0., 0., 0., 0., 0., 1., 0., 0., -1., 0.]),
                DMatrix::from_row_slice(4, 4, &[0., 0., 1., 0., 0., 0., 0., -1., -1., 0., 0., 0., 0., 1., 0., 0.]),
                DMatrix::from_row_slice(4, 4, &[0., 0., 0., 1., 0., 0., 1., 0., 0., -1., 0., 0., -1., 0., 0., 0.]),
            ],
        )
        .unwrap(),
        muller_seeger_example(),
    ];
    for alg in &algebras {
        if is_htype(alg, 500).htype {
            assert!(is_metivier(alg, 500).metivier);
        }
    }
    assert!(is_htype(&algebras[2], 500).htype);
}

#[test]
fn symplectic_normalize_round_trip_on_random_skew_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut done = 0;
    for size in [2, 4, 6, 8] {
        for _ in 0..50 {
            let b = DMatrix::<f64>::from_fn(size, size, |_, _| rng.random_range(-1.0..1.0));
            let j = &b - b.transpose();
            if j.determinant().abs() < 1e-6 {
                continue;
            }
            let a = symplectic_normalize(&j).unwrap();
            assert!(symplectic_residual(&j, &a) <= 1e-10, "size {size}");
            done += 1;
        }
    }
    assert!(done >= 190);
}

#[test]
fn lemma24_on_heisenberg_and_muller_seeger() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for (alg, lambda) in [
        (StepTwoAlgebra::heisenberg(1), 1.0),
        (StepTwoAlgebra::heisenberg(2), -0.7),
        (muller_seeger_example(), 0.5),
    ] {
        let f = random_gaussian(&mut rng, alg.n(), alg.d());
        let omega = random_direction(&mut rng, alg.d());
        let probes = random_probes(&mut rng, 2 * alg.n(), 50);
        for j in 0..2 * alg.n() {
            let r = lemma24_check(&alg, &f, &omega, lambda, j, &probes).unwrap();
            assert!(r <= 1e-6, "j = {j}: {r}");
        }
    }
}

#[test]
fn lemma24_without_twist_reduces_to_plain_derivative() {
    // Separable f and λ = 0: both sides are ∂_{v_j} of the z-integral.
    let mut m = DMatrix::identity(3, 3);
    m[(0, 1)] = 0.3;
    m[(1, 0)] = 0.3;
    let f = GaussianTestFunction::new(1, 1, Gaussian::centred(m, 1.0).unwrap()).unwrap();
    let alg = StepTwoAlgebra::heisenberg(1);
    let omega = DualDirection::new(vec![1.0]).unwrap();
    let probes = vec![vec![0.2, -0.4], vec![1.0, 0.5]];
    assert!(lemma24_check(&alg, &f, &omega, 0.0, 0, &probes).unwrap() < 1e-14);
}

#[test]
fn radon_relation_in_one_and_two_central_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for alg in [StepTwoAlgebra::heisenberg(1), muller_seeger_example()] {
        let f = random_gaussian(&mut rng, alg.n(), alg.d());
        let omega = random_direction(&mut rng, alg.d());
        let probes: Vec<(Vec<f64>, f64)> = random_probes(&mut rng, 2 * alg.n(), 30)
            .into_iter()
            .map(|v| (v, rng.random_range(-1.0..1.0)))
            .collect();
        for j in 0..2 * alg.n() {
            let r = radon_relation_check(&alg, &f, &omega, j, &probes).unwrap();
            assert!(r <= 1e-6, "d = {}, j = {j}: {r}", alg.d());
        }
    }
}

#[test]
fn partial_radon_is_linear_in_the_amplitude() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = random_gaussian(&mut rng, 1, 3);
    let scaled = GaussianTestFunction::new(1, 3, f.gaussian().scaled(Complex64::new(-2.0, 0.5))).unwrap();
    let omega = random_direction(&mut rng, 3);
    let a = partial_radon(&f, &omega, &[0.1, 0.2], 0.3).unwrap();
    let b = partial_radon(&scaled, &omega, &[0.1, 0.2], 0.3).unwrap();
    assert!((b - a * Complex64::new(-2.0, 0.5)).norm() < 1e-14 * b.norm());
}

#[test]
fn partial_radon_matches_direct_line_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = random_gaussian(&mut rng, 1, 2);
    let omega = DualDirection::normalized(&[0.6, 0.8]).unwrap();
    let u = [-0.8, 0.6];
    let (v, t) = ([0.4, -0.3], 0.5);
    let h = 2e-3;
    let mut s = Complex64::new(0.0, 0.0);
    for i in -6000..=6000 {
        let x = i as f64 * h;
        let z = [t * 0.6 + x * u[0], t * 0.8 + x * u[1]];
        s += f.eval(&v, &z) * h;
    }
    let got = partial_radon(&f, &omega, &v, t).unwrap();
    assert!((got - s).norm() < 1e-10 * s.norm());
}

#[test]
fn gaussian_mixed_norm_agrees_with_grid_riemann_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let f = random_gaussian(&mut rng, 1, 1);
    let vgrid = GridSpec::new(1, 7.0, 112).unwrap();
    let axis = CentralAxis::new(7.0, 112).unwrap();
    let grid = ProductField::from_fn(vgrid, axis, |v, z| f.eval(v, &[z]));
    for (p, r) in [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (1.5, 4.0), (f64::INFINITY, 1.0), (2.0, f64::INFINITY)] {
        let exact = mixed_norm_gaussian(&f, p, r).unwrap();
        let riemann = mixed_norm(&grid, p, r).unwrap();
        // Sup norms on a grid miss the peak by O(h²).
        let tol = if p.is_infinite() || r.is_infinite() { 1e-2 } else { 1e-8 };
        assert!((exact - riemann).abs() < tol * exact, "({p}, {r}): {exact} vs {riemann}");
    }
}

#[test]
fn sphere_sampling_covers_the_circle() {
    let s = sphere_samples(2, 8);
    assert_eq!(s.len(), 8);
    assert!((s[2].as_slice()[1] - 1.0).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mixed_norm_is_monotone_under_pointwise_domination(
        seed in any::<u64>(),
        p in 1.0f64..4.0,
        r in 1.0f64..4.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vgrid = GridSpec::new(1, 2.0, 8).unwrap();
        let axis = CentralAxis::new(2.0, 8).unwrap();
        let big: Vec<f64> = (0..8 * 64).map(|_| rng.random_range(0.0..2.0)).collect();
        let shrink: Vec<f64> = (0..8 * 64).map(|_| rng.random_range(0.0..1.0)).collect();
        let phase: Vec<f64> = (0..8 * 64).map(|_| rng.random_range(0.0..6.3)).collect();
        let mk = |scale: bool| {
            let slices = (0..8)
                .map(|iz| {
                    let vals = (0..64)
                        .map(|iv| {
                            let k = iz * 64 + iv;
                            let m = if scale { big[k] * shrink[k] } else { big[k] };
                            Complex64::from_polar(m, phase[k])
                        })
                        .collect();
                    metivier_core::SampledField::new(vgrid, vals).unwrap()
                })
                .collect();
            ProductField::from_slices(axis, slices).unwrap()
        };
        let (small, large) = (mk(true), mk(false));
        prop_assert!(mixed_norm(&small, p, r).unwrap() <= mixed_norm(&large, p, r).unwrap() * (1.0 + 1e-12));
    }
}

#[test]
fn lemma24_closed_form_matches_brute_force_quadrature() {
    // Both sides from the definitions: central Fourier transform by a z-sum,
    // derivatives by central differences of f itself.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let alg = StepTwoAlgebra::heisenberg(1);
    let f = random_gaussian(&mut rng, 1, 1);
    let lambda = 0.8;
    let (hz, eps) = (1e-2, 1e-5);
    let fourier = |g: &dyn Fn(f64) -> Complex64| -> Complex64 {
        (-3000..=3000)
            .map(|i| {
                let z = i as f64 * hz;
                g(z) * Complex64::from_polar(hz, lambda * z)
            })
            .sum()
    };
    for v in random_probes(&mut rng, 2, 5) {
        for j in 0..2 {
            let c = alg.bracket_coefficients(&v, j)[0];
            let field = |z: f64| {
                let mut vp = v.clone();
                let mut vm = v.clone();
                vp[j] += eps;
                vm[j] -= eps;
                let dv = (f.eval(&vp, &[z]) - f.eval(&vm, &[z])) / (2.0 * eps);
                let dz = (f.eval(&v, &[z + eps]) - f.eval(&v, &[z - eps])) / (2.0 * eps);
                dv + dz * (0.5 * c)
            };
            let lhs = fourier(&field);
            let transform = |vv: &[f64]| fourier(&|z| f.eval(vv, &[z]));
            let mut vp = v.clone();
            let mut vm = v.clone();
            vp[j] += eps;
            vm[j] -= eps;
            let dfv = (transform(&vp) - transform(&vm)) / (2.0 * eps);
            let rhs = dfv - Complex64::new(0.0, 0.5 * lambda * c) * transform(&v);
            assert!((lhs - rhs).norm() < 1e-6 * rhs.norm().max(1e-3), "{lhs} vs {rhs}");
        }
    }
    let omega = DualDirection::new(vec![1.0]).unwrap();
    let probes = random_probes(&mut rng, 2, 10);
    assert!(lemma24_check(&alg, &f, &omega, lambda, 1, &probes).unwrap() < 1e-12);
}
