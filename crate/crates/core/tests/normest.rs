use std::f64::consts::PI;

use metivier_core::bounds::{exponents, ExponentParams, Lebesgue};
use metivier_core::normest::{
    degree_family, lambda_family, opnorm_1_to_2, opnorm_nonlinear, opnorm_power, scaling_fit,
    Adjoint, DiscreteOperator, Method, PowerOptions, ProjectorOperator, ScalingVariable,
};
use metivier_core::specfun::phi_l2_norm;
use metivier_core::GridSpec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INF: f64 = f64::INFINITY;

fn opts() -> PowerOptions {
    PowerOptions { seed: 7, ..PowerOptions::default() }
}

fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

#[test]
fn column_norm_matches_profile_norm_on_desk_grid() {
    let grid = GridSpec::desk();
    for k in 0..=3 {
        let op = ProjectorOperator::new(grid, k, 1.0).unwrap();
        let got = opnorm_1_to_2(&op).unwrap();
        let want = phi_l2_norm(k, 1, 1.0).unwrap();
        assert!((got - want).abs() < 1e-3 * want, "k={k}: {got} vs {want}");
    }
}

// Plain column loop over kernel entries, against the summed-area shortcut.
#[test]
fn windowed_column_norms_match_brute_force() {
    let grid = GridSpec::new(1, 4.0, 24).unwrap();
    let op = ProjectorOperator::new(grid, 2, 1.3).unwrap();
    let w = grid.cell_volume();
    for q in [1.0, 2.0, 3.5, INF] {
        let mut best = 0.0f64;
        for j in 0..op.input_len() {
            let mags = (0..op.output_len()).map(|i| op.kernel(i, j).unwrap().norm());
            let v = if q.is_infinite() {
                mags.fold(0.0, f64::max)
            } else {
                (mags.map(|m| m.powf(q)).sum::<f64>() * w).powf(1.0 / q)
            };
            best = best.max(v);
        }
        let fast = op.max_column_norm(q).unwrap();
        assert!((fast - best).abs() < 1e-10 * best, "q={q}: {fast} vs {best}");
    }
}

#[test]
fn apply_is_linear() {
    let grid = GridSpec::new(1, 6.0, 32).unwrap();
    let op = ProjectorOperator::new(grid, 3, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..3 {
        let x = random_vec(&mut rng, op.input_len());
        let y = random_vec(&mut rng, op.input_len());
        let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
        let mix: Vec<Complex64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let lhs = op.apply(&mix);
        let (tx, ty) = (op.apply(&x), op.apply(&y));
        let scale = lhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for i in 0..lhs.len() {
            assert!((lhs[i] - (a * tx[i] + b * ty[i])).norm() < 1e-10 * scale);
        }
    }
}

#[test]
fn two_to_two_norm_is_two_pi() {
    let grid = GridSpec::new(1, 8.0, 64).unwrap();
    for k in [0, 2] {
        let op = ProjectorOperator::new(grid, k, 1.0).unwrap();
        let e = opnorm_power(&op, 2.0, 2.0, opts()).unwrap();
        assert_eq!(e.method, Method::SingularValue);
        assert!((e.estimate - 2.0 * PI).abs() < 0.01 * 2.0 * PI, "k={k}: {}", e.estimate);
    }
}

#[test]
fn power_method_is_monotone_lower_bound() {
    let grid = GridSpec::new(1, 6.0, 32).unwrap();
    let op = ProjectorOperator::new(grid, 1, 1.0).unwrap();
    let exact = opnorm_1_to_2(&op).unwrap();
    let e = opnorm_nonlinear(&op, 1.0, 2.0, opts()).unwrap();
    assert!(e.estimate <= exact + 1e-9);
    assert!((e.estimate - exact).abs() < 0.01 * exact, "{} vs {exact}", e.estimate);
    for (p, q) in [(1.0, 2.0), (1.25, 3.0), (1.5, 4.0), (2.0, INF)] {
        let e = opnorm_nonlinear(&op, p, q, opts()).unwrap();
        assert!(e.history.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        if p == 1.0 {
            assert!(e.estimate <= op.max_column_norm(q).unwrap() + 1e-9);
        }
        if q.is_infinite() {
            let pc = p / (p - 1.0);
            assert!(e.estimate <= op.max_row_norm(pc).unwrap() + 1e-9);
        }
    }
}

#[test]
fn duality_between_operator_and_adjoint() {
    let grid = GridSpec::new(1, 6.0, 32).unwrap();
    let op = ProjectorOperator::new(grid, 2, 1.0).unwrap();
    let adj = Adjoint(&op);
    let conj = |x: f64| if x.is_infinite() { 1.0 } else { x / (x - 1.0) };
    for (p, q) in [(1.0, 2.0), (1.25, 3.0), (2.0, INF)] {
        let a = opnorm_power(&op, p, q, opts()).unwrap().estimate;
        let b = opnorm_power(&adj, conj(q), conj(p), opts()).unwrap().estimate;
        assert!((a - b).abs() < 0.01 * a.max(b), "({p},{q}): {a} vs {b}");
    }
}

#[test]
fn lambda_scaling_of_one_to_two_norm() {
    let grid = GridSpec::new(1, 16.0, 128).unwrap();
    let lambdas = [0.25, 0.5, 1.0, 2.0, 4.0];
    for k in [0, 2] {
        let fam = lambda_family(grid, k, &lambdas, 1.0, 2.0, opts()).unwrap();
        let fit = scaling_fit(&fam, ScalingVariable::Lambda).unwrap();
        assert!((fit.slope + 0.5).abs() < 0.02, "k={k}: slope {}", fit.slope);
    }
}

#[test]
fn degree_slopes_respect_the_projector_bound() {
    let grid = GridSpec::new(1, 12.0, 64).unwrap();
    let degrees = [0, 2, 4, 6, 8];
    let fam = degree_family(grid, &degrees, 1.0, 2.0, 2.0, opts()).unwrap();
    let flat = scaling_fit(&fam, ScalingVariable::Degree { n: 1 }).unwrap();
    assert!(flat.slope.abs() < 0.02, "(2,2) slope {}", flat.slope);

    let small = GridSpec::new(1, 10.0, 40).unwrap();
    for (p, q) in [(1.0, 2.0), (1.0, INF), (2.0, INF), (4.0 / 3.0, 4.0)] {
        let g = if p == 1.0 || q.is_infinite() { grid } else { small };
        let fam = degree_family(g, &degrees, 1.0, p, q, opts()).unwrap();
        let fit = scaling_fit(&fam, ScalingVariable::Degree { n: 1 }).unwrap();
        let params = ExponentParams::new(1.0, 1.0, 1.0, Lebesgue::new(p, q, 1.0), 1, 1).unwrap();
        let nu1 = exponents(&params).nu1;
        assert!(fit.slope <= nu1 + 0.1, "({p},{q}): slope {} vs nu1 {nu1}", fit.slope);
    }
}
