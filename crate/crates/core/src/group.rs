//! Step-two nilpotent Lie algebras `𝔤 = 𝔳 ⊕ 𝔷`, `dim 𝔳 = 2n`, `dim 𝔷 = d`,
//! given by skew matrices with `⟨Z_i, [V, U]⟩ = vᵀ J^(i) u`.
//!
//! Group law `(V, Z)(V', Z') = (V + V', Z + Z' + [V, V']/2)`, left-invariant
//! fields `Ṽ_j = ∂_{v_j} + ½ Σ_i vᵀJ^(i)e_j ∂_{z_i}`. The central Fourier
//! transform is `𝔉_z f(v, η) = ∫ f(v, z) e^{iη·z} dz`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::gaussian::{Gaussian, Reduction};
use crate::kv::KeyValues;
use crate::product::ProductField;

/// Threshold on the normalized determinant used by [`is_metivier`].
pub const METIVIER_THRESHOLD: f64 = 1e-10;
/// Threshold on `‖J_ωᵀJ_ω − I‖` used by [`is_htype`].
pub const HTYPE_THRESHOLD: f64 = 1e-10;
/// Default number of sphere samples for the sampling-based checks.
pub const DEFAULT_SPHERE_SAMPLES: usize = 10_000;

/// `J₀ = [[0, I], [-I, 0]]` of size `2n`.
pub fn standard_symplectic(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepTwoAlgebra {
    n: usize,
    d: usize,
    brackets: Vec<DMatrix<f64>>,
}

impl StepTwoAlgebra {
    pub fn new(n: usize, brackets: Vec<DMatrix<f64>>) -> Result<Self> {
        if n == 0 {
            return domain("half-dimension n must be at least 1");
        }
        if brackets.is_empty() {
            return domain("center dimension d must be at least 1");
        }
        for (i, j) in brackets.iter().enumerate() {
            if j.nrows() != 2 * n || j.ncols() != 2 * n {
                return domain(format!(
                    "bracket matrix {} is {}x{}, expected {}x{}",
                    i + 1,
                    j.nrows(),
                    j.ncols(),
                    2 * n,
                    2 * n
                ));
            }
            let skew = (j + j.transpose()).norm();
            if skew > 1e-12 * j.norm() {
                return domain(format!(
                    "bracket matrix {} is not skew-symmetric (‖J + Jᵀ‖ = {skew:e})",
                    i + 1
                ));
            }
        }
        Ok(Self {
            n,
            d: brackets.len(),
            brackets,
        })
    }

    /// Heisenberg algebra of half-dimension `n`: `d = 1`, `J = J₀`.
    pub fn heisenberg(n: usize) -> Self {
        Self::new(n, vec![standard_symplectic(n)]).expect("J₀ is skew")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn brackets(&self) -> &[DMatrix<f64>] {
        &self.brackets
    }

    /// `J_ω = Σ ω_i J^(i)`.
    pub fn j_omega(&self, omega: &[f64]) -> DMatrix<f64> {
        assert_eq!(omega.len(), self.d, "dual direction dimension");
        let mut out = DMatrix::zeros(2 * self.n, 2 * self.n);
        for (w, j) in omega.iter().zip(&self.brackets) {
            out += j * *w;
        }
        out
    }

    /// `c_i = vᵀ J^(i) e_j`, the coefficients of `∂_{z_i}` in `Ṽ_j` (times 2).
    pub fn bracket_coefficients(&self, v: &[f64], j: usize) -> Vec<f64> {
        self.brackets
            .iter()
            .map(|m| (0..2 * self.n).map(|a| v[a] * m[(a, j)]).sum())
            .collect()
    }

    /// Parses `n`, `d` and `J1 .. Jd` (row-major) from key-value text.
    pub fn parse(text: &str) -> Result<Self> {
        let kv = KeyValues::parse(text)?;
        let n: usize = kv.require("n")?;
        let d: usize = kv.require("d")?;
        if n == 0 || d == 0 {
            return Err(Error::Parse("n and d must be positive".into()));
        }
        let dim = 2 * n;
        let mut brackets = Vec::with_capacity(d);
        for i in 1..=d {
            let key = format!("J{i}");
            let entries: Vec<f64> = kv
                .get_list(&key)?
                .ok_or_else(|| Error::Parse(format!("missing key `{key}`")))?;
            if entries.len() != dim * dim {
                return Err(Error::Parse(format!(
                    "`{key}` has {} entries, expected {}",
                    entries.len(),
                    dim * dim
                )));
            }
            brackets.push(DMatrix::from_row_slice(dim, dim, &entries));
        }
        let unknown: Vec<&str> = kv
            .keys()
            .filter(|k| {
                !(matches!(*k, "n" | "d" | "name")
                    || k.strip_prefix('J')
                        .and_then(|s| s.parse::<usize>().ok())
                        .is_some_and(|i| (1..=d).contains(&i)))
            })
            .collect();
        if !unknown.is_empty() {
            return Err(Error::Parse(format!("unknown keys: {}", unknown.join(", "))));
        }
        Self::new(n, brackets).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut kv = KeyValues::new();
        kv.insert("n", self.n);
        kv.insert("d", self.d);
        for (i, j) in self.brackets.iter().enumerate() {
            let row_major: Vec<String> = (0..j.nrows())
                .flat_map(|r| (0..j.ncols()).map(move |c| (r, c)))
                .map(|(r, c)| format!("{}", j[(r, c)]))
                .collect();
            kv.insert(format!("J{}", i + 1), row_major.join(" "));
        }
        kv.to_text()
    }
}

/// `E_z` of the Müller–Seeger algebra.
pub fn muller_seeger_e(z1: f64, z2: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            z1, 0.0, 0.0, -z2, //
            z2, z1, 0.0, 0.0, //
            0.0, z2, z1, 0.0, //
            0.0, 0.0, z2, z1,
        ],
    )
}

/// `J_z = [[0, E_z], [-E_zᵀ, 0]]`. The transpose in the lower block makes
/// `J_z` skew; `E_z` itself is not symmetric for `z_2 ≠ 0`.
pub fn muller_seeger_j(z1: f64, z2: f64) -> DMatrix<f64> {
    let e = muller_seeger_e(z1, z2);
    let mut j = DMatrix::zeros(8, 8);
    j.view_mut((0, 4), (4, 4)).copy_from(&e);
    j.view_mut((4, 0), (4, 4)).copy_from(&(-e.transpose()));
    j
}

/// The `(n, d) = (4, 2)` algebra with `J^(1) = J_{(1,0)}`, `J^(2) = J_{(0,1)}`;
/// Métivier (`det J_z = (z₁⁴ + z₂⁴)²`) but not H-type.
pub fn muller_seeger_example() -> StepTwoAlgebra {
    StepTwoAlgebra::new(4, vec![muller_seeger_j(1.0, 0.0), muller_seeger_j(0.0, 1.0)])
        .expect("block matrices are skew")
}

/// A unit vector `ω` in the dual of the center.
#[derive(Debug, Clone, PartialEq)]
pub struct DualDirection {
    omega: Vec<f64>,
}

impl DualDirection {
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        let norm = omega.iter().map(|w| w * w).sum::<f64>().sqrt();
        if omega.is_empty() || (norm - 1.0).abs() > 1e-12 {
            return domain(format!("dual direction must have unit length, got {norm}"));
        }
        Ok(Self { omega })
    }

    pub fn normalized(v: &[f64]) -> Result<Self> {
        let norm = v.iter().map(|w| w * w).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return domain("cannot normalize a zero or non-finite vector");
        }
        Ok(Self {
            omega: v.iter().map(|w| w / norm).collect(),
        })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.omega
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    /// Orthonormal basis of `ker ω` as the columns of a `d × (d-1)` matrix,
    /// from the Householder reflection exchanging `e_1` and `±ω`.
    pub fn kernel_basis(&self) -> DMatrix<f64> {
        let d = self.dim();
        let w = DVector::from_column_slice(&self.omega);
        let mut u = w.clone();
        let s = if w[0] >= 0.0 { 1.0 } else { -1.0 };
        u[0] += s;
        let uu = u.dot(&u);
        let h = DMatrix::identity(d, d) - &u * u.transpose() * (2.0 / uu);
        h.columns(1, d - 1).into_owned()
    }
}

/// Quasi-uniform unit directions: `±1` for `d = 1`, equally spaced angles for
/// `d = 2`, Halton points pushed through Box–Muller and normalized otherwise.
pub fn sphere_samples(d: usize, count: usize) -> Vec<DualDirection> {
    match d {
        0 => Vec::new(),
        1 => vec![
            DualDirection { omega: vec![1.0] },
            DualDirection { omega: vec![-1.0] },
        ],
        2 => (0..count.max(1))
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / count.max(1) as f64;
                DualDirection {
                    omega: vec![t.cos(), t.sin()],
                }
            })
            .collect(),
        _ => {
            let pairs = d.div_ceil(2);
            let primes = first_primes(2 * pairs);
            (1..=count.max(1))
                .map(|i| {
                    let mut g = Vec::with_capacity(2 * pairs);
                    for p in 0..pairs {
                        let u1 = radical_inverse(i, primes[2 * p]);
                        let u2 = radical_inverse(i, primes[2 * p + 1]);
                        let r = (-2.0 * u1.ln()).sqrt();
                        let t = 2.0 * std::f64::consts::PI * u2;
                        g.push(r * t.cos());
                        g.push(r * t.sin());
                    }
                    g.truncate(d);
                    DualDirection::normalized(&g)
                        .unwrap_or_else(|_| DualDirection::normalized(&unit(d, 0)).expect("unit"))
                })
                .collect()
        }
    }
}

fn unit(d: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[i] = 1.0;
    v
}

fn first_primes(k: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut c = 2;
    while out.len() < k {
        if out.iter().all(|p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    out
}

/// Outcome of a sampled Métivier test.
#[derive(Debug, Clone, PartialEq)]
pub struct MetivierReport {
    pub metivier: bool,
    /// `min_ω |det J_ω| / (max_{ab} |J_ω[a,b]|)^{2n}` over the samples.
    pub margin: f64,
    pub worst_omega: Vec<f64>,
    pub samples: usize,
}

/// Sampling-based Métivier test. A `true` verdict certifies only the sampled
/// directions.
pub fn is_metivier(alg: &StepTwoAlgebra, samples: usize) -> MetivierReport {
    let dirs = sphere_samples(alg.d(), samples.max(1));
    let (margin, worst) = dirs
        .par_iter()
        .map(|w| {
            let j = alg.j_omega(w.as_slice());
            let scale = j.abs().max();
            let m = if scale == 0.0 {
                0.0
            } else {
                (j / scale).determinant().abs()
            };
            (m, w.as_slice().to_vec())
        })
        .reduce_with(|a, b| if b.0 < a.0 { b } else { a })
        .expect("at least one sample");
    MetivierReport {
        metivier: margin > METIVIER_THRESHOLD,
        margin,
        worst_omega: worst,
        samples: dirs.len(),
    }
}

/// Outcome of a sampled H-type test.
#[derive(Debug, Clone, PartialEq)]
pub struct HTypeReport {
    pub htype: bool,
    /// `max_ω ‖J_ωᵀJ_ω − I‖_F` over the samples.
    pub defect: f64,
    pub worst_omega: Vec<f64>,
    pub samples: usize,
}

pub fn is_htype(alg: &StepTwoAlgebra, samples: usize) -> HTypeReport {
    let dirs = sphere_samples(alg.d(), samples.max(1));
    let dim = 2 * alg.n();
    let (defect, worst) = dirs
        .par_iter()
        .map(|w| {
            let j = alg.j_omega(w.as_slice());
            let e = (j.transpose() * &j - DMatrix::<f64>::identity(dim, dim)).norm();
            (e, w.as_slice().to_vec())
        })
        .reduce_with(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one sample");
    HTypeReport {
        htype: defect <= HTYPE_THRESHOLD,
        defect,
        worst_omega: worst,
        samples: dirs.len(),
    }
}

/// `A` with `AᵀJA = J₀` by symplectic Gram–Schmidt, pivoting on the largest
/// pairing `|xᵀJy|` among the remaining vectors.
pub fn symplectic_normalize(j: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let dim = j.nrows();
    if !j.is_square() || dim == 0 || dim % 2 != 0 {
        return domain(format!("expected an even-dimensional square matrix, got {}x{}", j.nrows(), j.ncols()));
    }
    let scale = j.abs().max();
    if (j + j.transpose()).abs().max() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return domain("matrix is not skew-symmetric");
    }
    let threshold = 1e-10 * scale.max(f64::MIN_POSITIVE);
    let n = dim / 2;
    let mut pool: Vec<DVector<f64>> = (0..dim).map(|i| DVector::from_column_slice(&unit(dim, i))).collect();
    let mut es = Vec::with_capacity(n);
    let mut fs = Vec::with_capacity(n);
    for _ in 0..n {
        let jp: Vec<DVector<f64>> = pool.iter().map(|u| j * u).collect();
        let mut best = (0, 0, 0.0f64);
        for a in 0..pool.len() {
            for b in a + 1..pool.len() {
                let pairing = pool[a].dot(&jp[b]);
                if pairing.abs() > best.2.abs() {
                    best = (a, b, pairing);
                }
            }
        }
        let (a, b, pairing) = best;
        if pairing.abs() <= threshold {
            return Err(Error::RankDeficient {
                pairing: pairing.abs(),
                threshold,
            });
        }
        let e = pool[a].clone();
        let f = &pool[b] / pairing;
        pool.remove(b);
        pool.remove(a);
        let je = j * &e;
        let jf = j * &f;
        for u in pool.iter_mut() {
            // fᵀJu = -(Jf)ᵀu, eᵀJu = -(Je)ᵀu
            let fju = -jf.dot(u);
            let eju = -je.dot(u);
            *u += &e * fju - &f * eju;
        }
        es.push(e);
        fs.push(f);
    }
    let cols: Vec<DVector<f64>> = es.into_iter().chain(fs).collect();
    Ok(DMatrix::from_columns(&cols))
}

/// `‖AᵀJA − J₀‖_max`.
pub fn symplectic_residual(j: &DMatrix<f64>, a: &DMatrix<f64>) -> f64 {
    let n = j.nrows() / 2;
    (a.transpose() * j * a - standard_symplectic(n)).abs().max()
}

/// Closed-form test function `c · exp(-xᵀMx + bᵀx)` on `x = (v, z) ∈ ℝ^{2n+d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTestFunction {
    n: usize,
    d: usize,
    g: Gaussian,
}

impl GaussianTestFunction {
    pub fn new(n: usize, d: usize, g: Gaussian) -> Result<Self> {
        if g.dim() != 2 * n + d {
            return domain(format!("Gaussian has dimension {}, expected 2n + d = {}", g.dim(), 2 * n + d));
        }
        Ok(Self { n, d, g })
    }

    /// `c · exp(-xᵀMx + i ξᵀx)`.
    pub fn with_phase(n: usize, d: usize, m: DMatrix<f64>, xi: &[f64], c: Complex64) -> Result<Self> {
        let b = DVector::from_iterator(xi.len(), xi.iter().map(|&x| Complex64::new(0.0, x)));
        Self::new(n, d, Gaussian::new(m, b, c)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn gaussian(&self) -> &Gaussian {
        &self.g
    }

    pub fn eval(&self, v: &[f64], z: &[f64]) -> Complex64 {
        let x: Vec<f64> = v.iter().chain(z).copied().collect();
        self.g.eval(&x)
    }

    fn dims_match(&self, alg: &StepTwoAlgebra) -> Result<()> {
        if alg.n() != self.n || alg.d() != self.d {
            return domain(format!(
                "test function on (n, d) = ({}, {}) but algebra has ({}, {})",
                self.n,
                self.d,
                alg.n(),
                alg.d()
            ));
        }
        Ok(())
    }

    /// `(T, P)` with `(v, z) = T(v, t) + P s`, `z = tω + U s`.
    fn radon_maps(&self, omega: &DualDirection) -> (DMatrix<f64>, DMatrix<f64>) {
        let (v, d) = (2 * self.n, self.d);
        let mut t = DMatrix::zeros(v + d, v + 1);
        t.view_mut((0, 0), (v, v)).fill_with_identity();
        for (i, w) in omega.as_slice().iter().enumerate() {
            t[(v + i, v)] = *w;
        }
        let mut p = DMatrix::zeros(v + d, d - 1);
        if d > 1 {
            p.view_mut((v, 0), (d, d - 1)).copy_from(&omega.kernel_basis());
        }
        (t, p)
    }

    /// `(T, P)` with `(v, z) = T v + P z`.
    fn central_maps(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let (v, d) = (2 * self.n, self.d);
        let mut t = DMatrix::zeros(v + d, v);
        t.view_mut((0, 0), (v, v)).fill_with_identity();
        let mut p = DMatrix::zeros(v + d, d);
        p.view_mut((v, 0), (d, d)).fill_with_identity();
        (t, p)
    }

    /// `R_ω f` as a Gaussian in `(v, t)`.
    pub fn radon(&self, omega: &DualDirection) -> Result<Gaussian> {
        if omega.dim() != self.d {
            return domain("dual direction dimension differs from the center");
        }
        let (t, p) = self.radon_maps(omega);
        self.g.reduce(&t, &p, Reduction::Integrate)
    }

    /// `𝔉_z f(·, η)` as a Gaussian in `v`.
    pub fn central_fourier(&self, eta: &[f64]) -> Result<Gaussian> {
        if eta.len() != self.d {
            return domain("frequency dimension differs from the center");
        }
        let coords: Vec<usize> = (2 * self.n..2 * self.n + self.d).collect();
        let (t, p) = self.central_maps();
        self.g.with_phase(&coords, eta).reduce(&t, &p, Reduction::Integrate)
    }
}

/// `R_ω f(V, t) = ∫_{ker ω} f(V, tZ_ω + Z′) dσ(Z′)` in closed form.
pub fn partial_radon(f: &GaussianTestFunction, omega: &DualDirection, v: &[f64], t: f64) -> Result<Complex64> {
    if v.len() != 2 * f.n() {
        return domain("point dimension differs from 2n");
    }
    let g = f.radon(omega)?;
    let y: Vec<f64> = v.iter().copied().chain(std::iter::once(t)).collect();
    Ok(g.eval(&y))
}

/// `e_j + ½ Σ_i c_i e_{2n+i}`: the direction of `Ṽ_j` at `v` in `(v, z)` space.
fn horizontal_direction(alg: &StepTwoAlgebra, v: &[f64], j: usize) -> Vec<f64> {
    let dim = 2 * alg.n();
    let mut w = vec![0.0; dim + alg.d()];
    w[j] = 1.0;
    for (i, c) in alg.bracket_coefficients(v, j).into_iter().enumerate() {
        w[dim + i] = 0.5 * c;
    }
    w
}

/// `∫ (Ṽ_j f)(Ty + Ps) ds` given the conditional mean of `s` and `∫ f ds`.
fn reduced_derivative(
    g: &Gaussian,
    direction: &[f64],
    t: &DMatrix<f64>,
    p: &DMatrix<f64>,
    y: &[f64],
    mean: &DVector<Complex64>,
    mass: Complex64,
) -> Complex64 {
    // ∂_w f = wᵀ(b − 2Mx) f is affine in x, so its s-average is its value at
    // the conditional mean.
    let ty = t * DVector::from_column_slice(y);
    let x: Vec<Complex64> = (0..g.dim())
        .map(|r| {
            let ps: Complex64 = (0..p.ncols()).map(|c| mean[c] * p[(r, c)]).sum();
            Complex64::new(ty[r], 0.0) + ps
        })
        .collect();
    let m = g.quadratic();
    let b = g.linear();
    let mut acc = Complex64::new(0.0, 0.0);
    for (r, &wr) in direction.iter().enumerate() {
        if wr == 0.0 {
            continue;
        }
        let mx: Complex64 = (0..g.dim()).map(|c| x[c] * m[(r, c)]).sum();
        acc += (b[r] - mx * 2.0) * wr;
    }
    acc * mass
}

fn check_probe_dims(alg: &StepTwoAlgebra, j: usize, probes: &[Vec<f64>]) -> Result<()> {
    if j >= 2 * alg.n() {
        return domain(format!("field index {j} out of range for 2n = {}", 2 * alg.n()));
    }
    if probes.is_empty() {
        return domain("at least one probe point is required");
    }
    if probes.iter().any(|v| v.len() != 2 * alg.n()) {
        return domain("probe points must have 2n coordinates");
    }
    Ok(())
}

/// Relation `𝔉_z(Ṽ_j f)(V, λω) = V_j^{λω}(𝔉_z f)(V, λω)` with
/// `V_j^{λω} = ∂_{v_j} − (iλ/2) ω([V, V_j])`, both sides in closed form at the
/// probe points. Returns `max |lhs − rhs| / max |rhs|`.
pub fn lemma24_check(
    alg: &StepTwoAlgebra,
    f: &GaussianTestFunction,
    omega: &DualDirection,
    lambda: f64,
    j: usize,
    probes: &[Vec<f64>],
) -> Result<f64> {
    f.dims_match(alg)?;
    check_probe_dims(alg, j, probes)?;
    let eta: Vec<f64> = omega.as_slice().iter().map(|w| lambda * w).collect();
    let coords: Vec<usize> = (2 * alg.n()..2 * alg.n() + alg.d()).collect();
    let phased = f.gaussian().with_phase(&coords, &eta);
    let (t, p) = f.central_maps();
    let transformed = f.central_fourier(&eta)?;
    let jw = alg.j_omega(omega.as_slice());

    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for v in probes {
        let mean = phased.conditional_mean(&t, &p, v)?;
        let mass = transformed.eval(v);
        let direction = horizontal_direction(alg, v, j);
        let lhs = reduced_derivative(f.gaussian(), &direction, &t, &p, v, &mean, mass);

        let bracket: f64 = (0..2 * alg.n()).map(|a| v[a] * jw[(a, j)]).sum();
        let rhs = transformed.log_gradient(v)[j] * mass - Complex64::new(0.0, 0.5 * lambda * bracket) * mass;
        worst = worst.max((lhs - rhs).norm());
        scale = scale.max(rhs.norm());
    }
    Ok(if scale == 0.0 { worst } else { worst / scale })
}

/// Relation `R_ω(Ṽ_j f)(V, t) = V_j^ω(R_ω f)(V, t)` with
/// `V_j^ω = ∂_{v_j} + ½ ω([V, V_j]) ∂_t`, at probe points `(V, t)`.
pub fn radon_relation_check(
    alg: &StepTwoAlgebra,
    f: &GaussianTestFunction,
    omega: &DualDirection,
    j: usize,
    probes: &[(Vec<f64>, f64)],
) -> Result<f64> {
    f.dims_match(alg)?;
    let vs: Vec<Vec<f64>> = probes.iter().map(|(v, _)| v.clone()).collect();
    check_probe_dims(alg, j, &vs)?;
    let (t, p) = f.radon_maps(omega);
    let reduced = f.radon(omega)?;
    let jw = alg.j_omega(omega.as_slice());
    let dim = 2 * alg.n();

    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for (v, tt) in probes {
        let y: Vec<f64> = v.iter().copied().chain(std::iter::once(*tt)).collect();
        let mass = reduced.eval(&y);
        let mean = if p.ncols() == 0 {
            DVector::zeros(0)
        } else {
            f.gaussian().conditional_mean(&t, &p, &y)?
        };
        let direction = horizontal_direction(alg, v, j);
        let lhs = reduced_derivative(f.gaussian(), &direction, &t, &p, &y, &mean, mass);

        let bracket: f64 = (0..dim).map(|a| v[a] * jw[(a, j)]).sum();
        let grad = reduced.log_gradient(&y);
        let rhs = (grad[j] + grad[dim] * (0.5 * bracket)) * mass;
        worst = worst.max((lhs - rhs).norm());
        scale = scale.max(rhs.norm());
    }
    Ok(if scale == 0.0 { worst } else { worst / scale })
}

/// `‖f‖_{L^r_z L^p_v}` by Riemann sums.
pub fn mixed_norm(f: &ProductField, p_inner: f64, r_outer: f64) -> Result<f64> {
    check_exponents(p_inner, r_outer)?;
    Ok(f.mixed_norm(p_inner, r_outer))
}

fn check_exponents(p: f64, r: f64) -> Result<()> {
    if !(p >= 1.0 && r >= 1.0) {
        return domain(format!("mixed-norm exponents must be at least 1, got ({p}, {r})"));
    }
    Ok(())
}

/// `‖f‖_{L^r_z L^p_v}` of a Gaussian test function in closed form.
pub fn mixed_norm_gaussian(f: &GaussianTestFunction, p_inner: f64, r_outer: f64) -> Result<f64> {
    check_exponents(p_inner, r_outer)?;
    let (v, d) = (2 * f.n(), f.d());
    // (v, z) = T z + P v
    let mut t = DMatrix::zeros(v + d, d);
    t.view_mut((v, 0), (d, d)).fill_with_identity();
    let mut p = DMatrix::zeros(v + d, v);
    p.view_mut((0, 0), (v, v)).fill_with_identity();

    // h(z) = ‖f(·, z)‖_p, itself an unnormalized Gaussian in z.
    let h = if p_inner.is_infinite() {
        f.gaussian().abs_pow(1.0).reduce(&t, &p, Reduction::Supremum)?
    } else {
        f.gaussian()
            .abs_pow(p_inner)
            .reduce(&t, &p, Reduction::Integrate)?
            .abs_pow(1.0 / p_inner)
    };
    if r_outer.is_infinite() {
        h.sup_abs()
    } else {
        Ok(h.abs_pow(r_outer).integral()?.re.powf(1.0 / r_outer))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_is_metivier_and_htype() {
        let h = StepTwoAlgebra::heisenberg(1);
        let m = is_metivier(&h, 10);
        assert!(m.metivier);
        assert!((m.margin - 1.0).abs() < 1e-15);
        assert!(is_htype(&h, 10).htype);
    }

    #[test]
    fn zero_bracket_is_degenerate() {
        let z = StepTwoAlgebra::new(1, vec![DMatrix::zeros(2, 2)]).unwrap();
        assert!(!is_metivier(&z, 10).metivier);
    }

    #[test]
    fn scaled_bracket_is_not_htype() {
        let a = StepTwoAlgebra::new(1, vec![standard_symplectic(1) * 2.0]).unwrap();
        let r = is_htype(&a, 4);
        assert!(!r.htype);
        // J_ωᵀJ_ω = 4I, so ‖3I‖_F = 3√2.
        assert!((r.defect - 3.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_skew_brackets() {
        let j = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(StepTwoAlgebra::new(1, vec![j]).is_err());
    }

    #[test]
    fn muller_seeger_determinant_at_axis_and_example_point() {
        assert!((muller_seeger_j(1.0, 0.0).determinant() - 1.0).abs() < 1e-14);
        let (z1, z2) = (0.3f64, -1.2f64);
        let expect = (z1.powi(4) + z2.powi(4)).powi(2);
        let det = muller_seeger_j(z1, z2).determinant();
        assert!((det - expect).abs() <= 1e-10 * expect);
    }

    #[test]
    fn algebra_text_round_trip() {
        let ms = muller_seeger_example();
        let back = StepTwoAlgebra::parse(&ms.to_text()).unwrap();
        assert_eq!(back, ms);
        assert!(StepTwoAlgebra::parse("n = 1\nd = 1\nJ1 = 0 1 -1").is_err());
        assert!(StepTwoAlgebra::parse("n = 1\nd = 1\nJ1 = 0 1 -1 0\nJ2 = 0 0 0 0").is_err());
    }

    #[test]
    fn kernel_basis_is_orthonormal_and_orthogonal_to_omega() {
        for w in [vec![0.6, -0.8], vec![-1.0, 0.0, 0.0], vec![0.5, 0.5, 0.5, 0.5]] {
            let omega = DualDirection::new(w.clone()).unwrap();
            let u = omega.kernel_basis();
            let gram = u.transpose() * &u;
            assert!((gram - DMatrix::<f64>::identity(w.len() - 1, w.len() - 1)).abs().max() < 1e-14);
            let wv = DVector::from_vec(w);
            assert!((u.transpose() * wv).abs().max() < 1e-14);
        }
    }

    #[test]
    fn sphere_samples_are_unit_vectors() {
        for d in 1..=5 {
            for w in sphere_samples(d, 50) {
                let n: f64 = w.as_slice().iter().map(|x| x * x).sum();
                assert!((n - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symplectic_normalize_scaled_standard_form() {
        let j0 = standard_symplectic(2);
        let a = symplectic_normalize(&j0).unwrap();
        assert!(symplectic_residual(&j0, &a) == 0.0);
        let j = &j0 * 3.5;
        let a = symplectic_normalize(&j).unwrap();
        assert!(symplectic_residual(&j, &a) <= 1e-12);
        assert!(matches!(
            symplectic_normalize(&DMatrix::zeros(4, 4)),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn partial_radon_examples() {
        // d = 2, f = e^{-|Z|²} a(V) with a(V) = e^{-|V|²}, ω = (1, 0).
        let m = DMatrix::identity(4, 4);
        let f = GaussianTestFunction::new(1, 2, Gaussian::centred(m, 1.0).unwrap()).unwrap();
        let omega = DualDirection::new(vec![1.0, 0.0]).unwrap();
        let (v, t) = ([0.3, -0.2], 0.7);
        let got = partial_radon(&f, &omega, &v, t).unwrap();
        let a = (-(v[0] * v[0] + v[1] * v[1])).exp();
        let expect = std::f64::consts::PI.sqrt() * (-t * t).exp() * a;
        assert!((got.re - expect).abs() < 1e-14 && got.im.abs() < 1e-15);

        // d = 1: R_ω f(V, t) = f(V, tω).
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.1, 0.2, 0.1, 2.0, 0.0, 0.2, 0.0, 0.5]);
        let f = GaussianTestFunction::with_phase(1, 1, m, &[0.3, 0.0, -1.0], Complex64::new(1.0, 1.0)).unwrap();
        let omega = DualDirection::new(vec![-1.0]).unwrap();
        let got = partial_radon(&f, &omega, &v, t).unwrap();
        assert!((got - f.eval(&v, &[-t])).norm() < 1e-15);
    }

    #[test]
    fn mixed_norm_of_separable_gaussian() {
        // f = exp(-|v|² - 2z²): ‖·‖_p over v is (π/p)^{1/p}; over z the r-norm
        // of exp(-2z²) is (π/(2r))^{1/(2r)}.
        let mut m = DMatrix::identity(3, 3);
        m[(2, 2)] = 2.0;
        let f = GaussianTestFunction::new(1, 1, Gaussian::centred(m, 1.0).unwrap()).unwrap();
        let pi = std::f64::consts::PI;
        for (p, r) in [(1.0, 1.0), (2.0, 1.0), (1.5, 3.0)] {
            let expect = (pi / p).powf(1.0 / p) * (pi / (2.0 * r)).powf(1.0 / (2.0 * r));
            assert!((mixed_norm_gaussian(&f, p, r).unwrap() - expect).abs() < 1e-13 * expect);
        }
        assert!((mixed_norm_gaussian(&f, f64::INFINITY, f64::INFINITY).unwrap() - 1.0).abs() < 1e-15);
        assert!(mixed_norm_gaussian(&f, 0.5, 1.0).is_err());
    }
}
