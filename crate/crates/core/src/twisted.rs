//! Twisted convolution, special Hermite projectors and the twisted Laplacian on
//! ℂ ≅ ℝ² (half-dimension n = 1).
//!
//! Coordinates are `y = (y_1, y_2)` and the twisting phase uses the standard
//! symplectic form `σ(z, w) = z_1 w_2 - z_2 w_1`:
//!
//! ```text
//! (f ×_λ g)(z) = Σ_w f(z - w) g(w) exp(iλ σ(z, w) / 2) h²
//! Λ_k^λ f      = f ×_λ φ_k^{|λ|}
//! L^λ          = -Δ + (λ²/4)|y|² + iλ (y_1 ∂_{y_2} - y_2 ∂_{y_1})
//! ```
//!
//! With these conventions `L^λ Λ_k^λ f = (2k+1)|λ| Λ_k^λ f`, the operators
//! `P_k = (2π)^{-1} |λ| Λ_k^λ` are orthogonal projectors, and `Σ_k P_k = I`.
//! Samples outside the grid are taken to be zero.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::field::{GridSpec, SampledField};
use crate::specfun::HermiteProfile;

/// Boundary-to-peak ratio above which a field is treated as not decayed.
pub const BOUNDARY_DECAY: f64 = 1e-8;

fn require_plane(grid: &GridSpec) -> Result<()> {
    if grid.n() != 1 {
        return Err(Error::Unsupported(format!(
            "gridded twisted operators are implemented for n = 1 only (got n = {})",
            grid.n()
        )));
    }
    Ok(())
}

/// `E[a][b] = exp(i s x_a x_b)` over grid coordinates.
fn phase_table(grid: &GridSpec, s: f64) -> Vec<Complex64> {
    let np = grid.points_per_axis();
    let xs: Vec<f64> = (0..np).map(|i| grid.coordinate(i)).collect();
    let mut out = Vec::with_capacity(np * np);
    for &xa in &xs {
        for &xb in &xs {
            out.push(Complex64::from_polar(1.0, s * xa * xb));
        }
    }
    out
}

/// `(f ×_λ g)(z)` by direct double summation.
pub fn twisted_convolve(f: &SampledField, g: &SampledField, lambda: f64) -> Result<SampledField> {
    f.check_same_grid(g)?;
    let grid = *f.grid();
    require_plane(&grid)?;
    if !lambda.is_finite() {
        return domain("twisting parameter must be finite");
    }
    let np = grid.points_per_axis();
    let c = grid.origin_index() as isize;
    let e = phase_table(&grid, 0.5 * lambda);
    let fv = f.values();
    let gv = g.values();
    let weight = grid.cell_volume();

    let values: Vec<Complex64> = (0..np)
        .into_par_iter()
        .flat_map_iter(|i1| {
            // g(w) exp(iλ/2 z_1 w_2) for this output row.
            let ge: Vec<Complex64> = (0..np * np)
                .map(|idx| gv[idx] * e[i1 * np + idx % np])
                .collect();
            let e = &e;
            (0..np).map(move |i2| {
                let mut acc = Complex64::new(0.0, 0.0);
                for j1 in 0..np {
                    let a = i1 as isize - j1 as isize + c;
                    if a < 0 || a >= np as isize {
                        continue;
                    }
                    let frow = &fv[a as usize * np..(a as usize + 1) * np];
                    let grow = &ge[j1 * np..(j1 + 1) * np];
                    let lo = (i2 as isize + c - np as isize + 1).max(0) as usize;
                    let hi = ((i2 as isize + c).min(np as isize - 1)) as usize;
                    let mut inner = Complex64::new(0.0, 0.0);
                    for j2 in lo..=hi {
                        inner += frow[(i2 as isize - j2 as isize + c) as usize] * grow[j2];
                    }
                    // exp(-iλ/2 z_2 w_1)
                    acc += e[i2 * np + j1].conj() * inner;
                }
                acc * weight
            })
        })
        .collect();
    Ok(SampledField::from_raw(grid, values))
}

/// Twisted convolution by `φ_k^{|λ|}` for a set of degrees, evaluated with the
/// kernel known in closed form at every grid-point difference.
///
/// The operator is `(Λ f)(z) = Σ_u K(z, u) f(u) h²` with
/// `K(z, u) = φ_k^{|λ|}(z - u) exp(-iλ σ(z, u)/2)`, which is Hermitian.
#[derive(Debug, Clone)]
pub struct ProjectorKernel {
    grid: GridSpec,
    lambda: f64,
    degrees: Vec<usize>,
    /// `φ_{k}(d_1 h, d_2 h)` for `d_i ∈ [-(N-1), N-1]`, one block per degree.
    tables: Vec<Vec<f64>>,
    /// `exp(iλ x_a x_b / 2)`.
    phase: Vec<Complex64>,
}

impl ProjectorKernel {
    pub fn new(grid: GridSpec, degrees: &[usize], lambda: f64) -> Result<Self> {
        require_plane(&grid)?;
        if lambda == 0.0 || !lambda.is_finite() {
            return domain(format!(
                "projector needs a nonzero finite spectral parameter, got {lambda}"
            ));
        }
        if degrees.is_empty() {
            return domain("at least one degree is required");
        }
        let np = grid.points_per_axis();
        let span = 2 * np - 1;
        let h = grid.spacing();
        let tables = degrees
            .iter()
            .map(|&k| {
                let profile = HermiteProfile::new(k, 1, lambda.abs())?;
                let mut t = vec![0.0; span * span];
                for d1 in 0..span {
                    let x = (d1 as f64 - (np - 1) as f64) * h;
                    for d2 in 0..span {
                        let y = (d2 as f64 - (np - 1) as f64) * h;
                        t[d1 * span + d2] = profile.eval_r2(x * x + y * y);
                    }
                }
                Ok(t)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid,
            lambda,
            degrees: degrees.to_vec(),
            tables,
            phase: phase_table(&grid, 0.5 * lambda),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// Kernel entry `K(z, u)` for degree slot `slot`, by flat grid indices.
    pub fn kernel(&self, slot: usize, z: usize, u: usize) -> Complex64 {
        let np = self.grid.points_per_axis();
        let span = 2 * np - 1;
        let (i1, i2) = (z / np, z % np);
        let (j1, j2) = (u / np, u % np);
        let d1 = i1 + np - 1 - j1;
        let d2 = i2 + np - 1 - j2;
        let phi = self.tables[slot][d1 * span + d2];
        // exp(-iλ/2 (x_{i1} x_{j2} - x_{i2} x_{j1}))
        let ph = self.phase[i1 * np + j2].conj() * self.phase[i2 * np + j1];
        ph * phi
    }

    /// `Λ_k^λ f` for every configured degree, in one pass over the grid.
    pub fn apply(&self, f: &SampledField) -> Result<Vec<SampledField>> {
        if !f.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch(format!(
                "field grid {:?} differs from kernel grid {:?}",
                f.grid(),
                self.grid
            )));
        }
        let np = self.grid.points_per_axis();
        let span = 2 * np - 1;
        let nk = self.degrees.len();
        let weight = self.grid.cell_volume();
        let fv = f.values();
        let phase = &self.phase;
        let tables = &self.tables;

        // rows[i1] holds the nk outputs for every i2 of that row.
        let rows: Vec<Vec<Complex64>> = (0..np)
            .into_par_iter()
            .map(|i1| {
                let mut fe_re = vec![0.0; np * np];
                let mut fe_im = vec![0.0; np * np];
                for j1 in 0..np {
                    for j2 in 0..np {
                        let v = fv[j1 * np + j2] * phase[i1 * np + j2].conj();
                        fe_re[j1 * np + j2] = v.re;
                        fe_im[j1 * np + j2] = v.im;
                    }
                }
                let mut out = vec![Complex64::new(0.0, 0.0); np * nk];
                let mut acc = vec![Complex64::new(0.0, 0.0); nk];
                for i2 in 0..np {
                    acc.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
                    for j1 in 0..np {
                        let d1 = i1 + np - 1 - j1;
                        let re = &fe_re[j1 * np..(j1 + 1) * np];
                        let im = &fe_im[j1 * np..(j1 + 1) * np];
                        // φ is radial, so φ(d_1, i2 - j2) = φ(d_1, j2 - i2); the
                        // kernel row then runs forward with j2.
                        let start = d1 * span + (np - 1) - i2;
                        let rot = phase[i2 * np + j1];
                        for (slot, table) in tables.iter().enumerate() {
                            let krow = &table[start..start + np];
                            let (sr, si) = dot_split(re, im, krow);
                            acc[slot] += rot * Complex64::new(sr, si);
                        }
                    }
                    for slot in 0..nk {
                        out[i2 * nk + slot] = acc[slot] * weight;
                    }
                }
                out
            })
            .collect();

        Ok((0..nk)
            .map(|slot| {
                let mut vals = Vec::with_capacity(np * np);
                for row in &rows {
                    for i2 in 0..np {
                        vals.push(row[i2 * nk + slot]);
                    }
                }
                SampledField::from_raw(self.grid, vals)
            })
            .collect())
    }
}

/// `(Σ re·k, Σ im·k)` with independent lanes so the loop vectorizes.
#[inline]
fn dot_split(re: &[f64], im: &[f64], k: &[f64]) -> (f64, f64) {
    const LANES: usize = 4;
    let mut ar = [0.0; LANES];
    let mut ai = [0.0; LANES];
    let chunks = k.len() / LANES;
    for c in 0..chunks {
        let o = c * LANES;
        for l in 0..LANES {
            ar[l] += re[o + l] * k[o + l];
            ai[l] += im[o + l] * k[o + l];
        }
    }
    let mut sr = ar.iter().sum::<f64>();
    let mut si = ai.iter().sum::<f64>();
    for o in chunks * LANES..k.len() {
        sr += re[o] * k[o];
        si += im[o] * k[o];
    }
    (sr, si)
}

/// `Λ_k^λ f = f ×_λ φ_k^{|λ|}`.
pub fn project(f: &SampledField, k: usize, lambda: f64) -> Result<SampledField> {
    let kernel = ProjectorKernel::new(*f.grid(), &[k], lambda)?;
    Ok(kernel.apply(f)?.pop().expect("one degree"))
}

/// `Λ_k^λ f` for several degrees at once.
pub fn project_many(f: &SampledField, degrees: &[usize], lambda: f64) -> Result<Vec<SampledField>> {
    ProjectorKernel::new(*f.grid(), degrees, lambda)?.apply(f)
}

/// Normalization turning `Λ_k^λ` into an orthogonal projector: `(2π)^{-n} |λ|^n`.
pub fn projector_normalization(n: usize, lambda: f64) -> f64 {
    (lambda.abs() / (2.0 * PI)).powi(n as i32)
}

/// `(2π)^{-n} |λ|^n Σ_{k ≤ K} Λ_k^λ f`.
pub fn reconstruct(f: &SampledField, lambda: f64, cutoff: usize) -> Result<SampledField> {
    if !(lambda > 0.0) {
        return domain(format!("reconstruction needs a positive scale, got {lambda}"));
    }
    let degrees: Vec<usize> = (0..=cutoff).collect();
    let parts = project_many(f, &degrees, lambda)?;
    let mut total = SampledField::zeros(*f.grid());
    for p in &parts {
        for (t, v) in total.values_mut().iter_mut().zip(p.values()) {
            *t += v;
        }
    }
    Ok(total.scale_real(projector_normalization(f.grid().n(), lambda)))
}

/// Result of [`twisted_laplacian`]: the image plus the boundary-decay diagnosis
/// of the input.
#[derive(Debug, Clone)]
pub struct LaplacianImage {
    pub field: SampledField,
    /// `max |f|` on the grid boundary divided by `max |f|`.
    pub boundary_ratio: f64,
}

impl LaplacianImage {
    /// Whether the input decayed below [`BOUNDARY_DECAY`] at the boundary.
    pub fn decay_ok(&self) -> bool {
        self.boundary_ratio <= BOUNDARY_DECAY
    }

    pub fn warning(&self) -> Option<String> {
        (!self.decay_ok()).then(|| {
            format!(
                "input does not decay at the grid boundary (boundary/peak = {:e} > {BOUNDARY_DECAY:e}); zero extension distorts the stencil",
                self.boundary_ratio
            )
        })
    }
}

/// `L^λ f` by second-order central differences with zero extension.
pub fn twisted_laplacian(f: &SampledField, lambda: f64) -> Result<LaplacianImage> {
    let grid = *f.grid();
    require_plane(&grid)?;
    let np = grid.points_per_axis();
    let h = grid.spacing();
    let v = f.values();
    let at = |i: isize, j: isize| -> Complex64 {
        if i < 0 || j < 0 || i >= np as isize || j >= np as isize {
            Complex64::new(0.0, 0.0)
        } else {
            v[i as usize * np + j as usize]
        }
    };
    let quarter = 0.25 * lambda * lambda;
    let i_lambda = Complex64::new(0.0, lambda);
    let mut out = Vec::with_capacity(np * np);
    for i in 0..np as isize {
        let y1 = grid.coordinate(i as usize);
        for j in 0..np as isize {
            let y2 = grid.coordinate(j as usize);
            let c = at(i, j);
            let (n1, s1) = (at(i + 1, j), at(i - 1, j));
            let (n2, s2) = (at(i, j + 1), at(i, j - 1));
            let lap = (n1 + s1 + n2 + s2 - c * 4.0) / (h * h);
            let d1 = (n1 - s1) / (2.0 * h);
            let d2 = (n2 - s2) / (2.0 * h);
            out.push(-lap + c * (quarter * (y1 * y1 + y2 * y2)) + i_lambda * (d2 * y1 - d1 * y2));
        }
    }
    let peak = f.max_abs();
    let boundary_ratio = if peak == 0.0 { 0.0 } else { f.boundary_max_abs() / peak };
    Ok(LaplacianImage {
        field: SampledField::from_raw(grid, out),
        boundary_ratio,
    })
}

/// `log2 √λ` when `√λ` is an integral power of two, so dilation by `√λ` maps
/// the grid onto a rescaled copy of itself.
fn commensurate_exponent(lambda: f64) -> Option<i32> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return None;
    }
    let s = lambda.sqrt();
    let e = s.log2().round();
    (e.abs() <= 30.0 && (2f64.powi(e as i32) == s)).then_some(e as i32)
}

/// Relative L² difference between `Λ_k^λ g` and
/// `λ^{-n} δ_{√λ}(Λ_k^1(δ_{1/√λ} g))`, with `δ_s g(·) = g(s ·)`.
///
/// The dilations are realized by reading the same samples on a grid whose
/// spacing is scaled by `√λ`, so `√λ` must be a power of two.
pub fn dilation_check(g: &SampledField, k: usize, lambda: f64) -> Result<f64> {
    let Some(exp) = commensurate_exponent(lambda) else {
        return domain(format!(
            "dilation by sqrt({lambda}) does not map the grid to a rescaled grid; use sqrt(lambda) = 2^j"
        ));
    };
    let grid = *g.grid();
    let n = grid.n();
    let direct = project(g, k, lambda)?;

    let s = 2f64.powi(exp);
    let wide = grid.rescaled(s)?;
    // Samples of g at x_i are the samples of δ_{1/s} g at s·x_i.
    let dilated = g.clone().reinterpret(wide)?;
    let unit = project(&dilated, k, 1.0)?;
    let back = unit.reinterpret(grid)?.scale_real(lambda.powi(-(n as i32)));

    let scale = direct.l2_norm();
    let diff = direct.sub(&back)?.l2_norm();
    Ok(if scale == 0.0 { diff } else { diff / scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> GridSpec {
        GridSpec::new(1, 8.0, 64).unwrap()
    }

    fn phi_field(grid: GridSpec, k: usize, lambda: f64) -> SampledField {
        let p = HermiteProfile::new(k, 1, lambda).unwrap();
        SampledField::from_fn(grid, |x| Complex64::new(p.eval_r2(x[0] * x[0] + x[1] * x[1]), 0.0))
    }

    fn bump(grid: GridSpec) -> SampledField {
        SampledField::from_fn(grid, |x| {
            let (a, b) = (x[0] - 0.4, x[1] + 0.3);
            Complex64::new((-(a * a + b * b) / 3.0).exp(), 0.2 * x[0] * (-(x[0] * x[0] + x[1] * x[1]) / 4.0).exp())
        })
    }

    #[test]
    fn zero_twist_is_plain_convolution() {
        let grid = GridSpec::new(1, 2.0, 8).unwrap();
        let f = SampledField::from_fn(grid, |x| Complex64::new(x[0] + 0.5, x[1]));
        let g = SampledField::from_fn(grid, |x| Complex64::new(1.0 - x[1] * x[0], 0.25));
        let out = twisted_convolve(&f, &g, 0.0).unwrap();
        let np = 8isize;
        let c = 4isize;
        let h2 = grid.cell_volume();
        for i1 in 0..np {
            for i2 in 0..np {
                let mut s = Complex64::new(0.0, 0.0);
                for j1 in 0..np {
                    for j2 in 0..np {
                        let (a, b) = (i1 - j1 + c, i2 - j2 + c);
                        if (0..np).contains(&a) && (0..np).contains(&b) {
                            s += f.values()[(a * np + b) as usize] * g.values()[(j1 * np + j2) as usize];
                        }
                    }
                }
                let got = out.values()[(i1 * np + i2) as usize];
                assert!((got - s * h2).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn convolution_and_kernel_routes_agree_on_decayed_fields() {
        let grid = small_grid();
        let f = bump(grid);
        let phi = phi_field(grid, 2, 1.0);
        let a = twisted_convolve(&f, &phi, 1.0).unwrap();
        let b = project(&f, 2, 1.0).unwrap();
        // The routes differ only in how φ is truncated past the grid edge.
        assert!(a.relative_l2_distance(&b).unwrap() < 1e-5);
    }

    #[test]
    fn hermite_functions_reproduce_under_twisted_convolution() {
        let grid = small_grid();
        let p0 = phi_field(grid, 0, 1.0);
        let out = twisted_convolve(&p0, &p0, 1.0).unwrap();
        let expect = p0.scale_real(2.0 * PI);
        assert!(out.relative_l2_distance(&expect).unwrap() < 1e-3);

        let p1 = phi_field(grid, 1, 1.0);
        let cross = twisted_convolve(&p1, &p0, 1.0).unwrap();
        assert!(cross.l2_norm() < 1e-3 * p0.l2_norm());
    }

    #[test]
    fn projector_rejects_zero_lambda_and_other_dimensions() {
        let grid = small_grid();
        let f = bump(grid);
        assert!(matches!(project(&f, 1, 0.0), Err(Error::Domain(_))));
        let g2 = GridSpec::new(2, 4.0, 8).unwrap();
        assert!(matches!(
            project(&SampledField::zeros(g2), 0, 1.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn projector_is_linear() {
        let grid = GridSpec::new(1, 6.0, 32).unwrap();
        let f = bump(grid);
        let g = phi_field(grid, 1, 1.0);
        let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
        let combo = f.scale(a).add(&g.scale(b)).unwrap();
        let lhs = project(&combo, 2, 0.7).unwrap();
        let rhs = project(&f, 2, 0.7)
            .unwrap()
            .scale(a)
            .add(&project(&g, 2, 0.7).unwrap().scale(b))
            .unwrap();
        assert!(lhs.relative_l2_distance(&rhs).unwrap() < 1e-13);
    }

    #[test]
    fn kernel_is_hermitian() {
        let grid = GridSpec::new(1, 4.0, 16).unwrap();
        let k = ProjectorKernel::new(grid, &[3], -1.3).unwrap();
        for (z, u) in [(0, 255), (17, 200), (100, 101), (37, 37)] {
            let a = k.kernel(0, z, u);
            let b = k.kernel(0, u, z).conj();
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn laplacian_without_twist_is_five_point_stencil() {
        let grid = GridSpec::new(1, 2.0, 8).unwrap();
        let f = SampledField::from_fn(grid, |x| Complex64::new(x[0] * x[0] - x[1], 0.0));
        let out = twisted_laplacian(&f, 0.0).unwrap();
        // Interior point (3, 5): f = x² - y has -Δf = -2.
        let v = out.field.values()[3 * 8 + 5];
        assert!((v.re + 2.0).abs() < 1e-12 && v.im.abs() < 1e-12);
        assert!(!out.decay_ok());
        assert!(out.warning().is_some());
    }

    #[test]
    fn gaussian_is_ground_state_of_twisted_laplacian() {
        let grid = GridSpec::new(1, 10.0, 200).unwrap(); // h = 0.1
        for lambda in [1.0, 2.0] {
            let g = phi_field(grid, 0, lambda);
            let out = twisted_laplacian(&g, lambda).unwrap();
            assert!(out.decay_ok());
            let r = out.field.relative_l2_distance(&g.scale_real(lambda)).unwrap();
            assert!(r < 1e-2, "lambda {lambda}: residual {r}");
        }
    }

    #[test]
    fn dilation_identity_is_exact_at_unit_scale() {
        let grid = GridSpec::new(1, 6.0, 32).unwrap();
        let g = bump(grid);
        assert_eq!(dilation_check(&g, 2, 1.0).unwrap(), 0.0);
        assert!(matches!(dilation_check(&g, 2, 2.0), Err(Error::Domain(_))));
        assert!(dilation_check(&g, 1, 4.0).unwrap() < 1e-12);
    }
}
