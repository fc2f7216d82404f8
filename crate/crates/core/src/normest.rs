//! `L^p → L^q` norms of discretized integral operators.
//!
//! Norms use the quadrature weights of the operator, so for a kernel
//! `(Tx)_i = Σ_j K_ij x_j w_in` the `p = 1` norm is the largest weighted
//! column norm and the `q = ∞` norm the largest weighted row norm. Between
//! those the estimate is a lower bound from a nonlinear power method.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{fit_loglog, LogLogFit};
use crate::error::{domain, Error, Result};
use crate::field::{GridSpec, SampledField};
use crate::specfun::HermiteProfile;
use crate::twisted::ProjectorKernel;

/// Default relative change in the power ratio at which an iteration stops.
pub const POWER_TOLERANCE: f64 = 1e-8;

/// Random restarts of the nonlinear power method.
pub const DEFAULT_RESTARTS: usize = 8;

pub trait DiscreteOperator: Sync {
    fn input_len(&self) -> usize;
    fn output_len(&self) -> usize;
    /// Quadrature weight of one input sample.
    fn input_weight(&self) -> f64;
    /// Quadrature weight of one output sample.
    fn output_weight(&self) -> f64;
    /// `(Tx)_i = Σ_j K_ij x_j w_in`.
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64>;
    /// `(T*y)_j = Σ_i conj(K_ij) y_i w_out`, the adjoint for the weighted pairings.
    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64>;

    /// `K_ij`, when the kernel is materialized.
    fn kernel(&self, _i: usize, _j: usize) -> Option<Complex64> {
        None
    }

    /// `max_j (Σ_i |K_ij|^q w_out)^{1/q}`.
    fn max_column_norm(&self, q: f64) -> Option<f64> {
        self.kernel(0, 0)?;
        let w = self.output_weight();
        let rows = self.output_len();
        Some(
            (0..self.input_len())
                .into_par_iter()
                .map(|j| weighted_norm((0..rows).map(|i| self.kernel(i, j).unwrap().norm()), q, w))
                .reduce(|| 0.0, f64::max),
        )
    }

    /// `max_i (Σ_j |K_ij|^s w_in)^{1/s}`.
    fn max_row_norm(&self, s: f64) -> Option<f64> {
        self.kernel(0, 0)?;
        let w = self.input_weight();
        let cols = self.input_len();
        Some(
            (0..self.output_len())
                .into_par_iter()
                .map(|i| weighted_norm((0..cols).map(|j| self.kernel(i, j).unwrap().norm()), s, w))
                .reduce(|| 0.0, f64::max),
        )
    }
}

fn weighted_norm(mags: impl Iterator<Item = f64>, q: f64, w: f64) -> f64 {
    if q.is_infinite() {
        mags.fold(0.0, f64::max)
    } else {
        (mags.map(|m| m.powf(q)).sum::<f64>() * w).powf(1.0 / q)
    }
}

fn lp(x: &[Complex64], p: f64, w: f64) -> f64 {
    weighted_norm(x.iter().map(|v| v.norm()), p, w)
}

fn conj_exp(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Dual direction of `y` in `L^q`: `|y|^{q−2} y`, or a point mass at the
/// largest entry for `q = ∞`.
fn dual_map(y: &[Complex64], q: f64) -> Vec<Complex64> {
    if q.is_infinite() {
        let (imax, _) = y
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, v)| if v.norm() > acc.1 { (i, v.norm()) } else { acc });
        let mut out = vec![Complex64::new(0.0, 0.0); y.len()];
        let v = y[imax];
        out[imax] = if v.norm() > 0.0 { v / v.norm() } else { Complex64::new(1.0, 0.0) };
        return out;
    }
    y.iter()
        .map(|&v| {
            let m = v.norm();
            if m == 0.0 { v } else { v * m.powf(q - 2.0) }
        })
        .collect()
}

/// Dense kernel `K` with uniform weights.
#[derive(Debug, Clone)]
pub struct MatrixOperator {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
    w_in: f64,
    w_out: f64,
}

impl MatrixOperator {
    pub fn from_fn<F>(rows: usize, cols: usize, w_in: f64, w_out: f64, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Complex64,
    {
        if rows == 0 || cols == 0 {
            return domain("operator needs at least one row and one column");
        }
        if !(w_in > 0.0 && w_out > 0.0) {
            return domain("quadrature weights must be positive");
        }
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Ok(Self { rows, cols, data, w_in, w_out })
    }

    /// The identity on `len` samples of weight `w`: kernel `δ_ij / w`.
    pub fn identity(len: usize, w: f64) -> Result<Self> {
        Self::from_fn(len, len, w, w, |i, j| {
            Complex64::new(if i == j { 1.0 / w } else { 0.0 }, 0.0)
        })
    }
}

impl DiscreteOperator for MatrixOperator {
    fn input_len(&self) -> usize {
        self.cols
    }

    fn output_len(&self) -> usize {
        self.rows
    }

    fn input_weight(&self) -> f64 {
        self.w_in
    }

    fn output_weight(&self) -> f64 {
        self.w_out
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.data
            .chunks(self.cols)
            .map(|row| row.iter().zip(x).map(|(k, v)| k * v).sum::<Complex64>() * self.w_in)
            .collect()
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (row, &yi) in self.data.chunks(self.cols).zip(y) {
            for (o, k) in out.iter_mut().zip(row) {
                *o += k.conj() * yi;
            }
        }
        out.iter().map(|v| v * self.w_out).collect()
    }

    fn kernel(&self, i: usize, j: usize) -> Option<Complex64> {
        Some(self.data[i * self.cols + j])
    }
}

/// `Λ_k^λ` on a plane grid (n = 1).
#[derive(Debug, Clone)]
pub struct ProjectorOperator {
    kernel: ProjectorKernel,
    /// `|φ_k^{|λ|}(d h)|` for `d ∈ [-(N-1), N-1]²`.
    modulus: Vec<f64>,
}

impl ProjectorOperator {
    pub fn new(grid: GridSpec, k: usize, lambda: f64) -> Result<Self> {
        let kernel = ProjectorKernel::new(grid, &[k], lambda)?;
        let np = grid.points_per_axis();
        let span = 2 * np - 1;
        let h = grid.spacing();
        let profile = HermiteProfile::new(k, 1, lambda.abs())?;
        let mut modulus = vec![0.0; span * span];
        for d1 in 0..span {
            let x = (d1 as f64 - (np - 1) as f64) * h;
            for d2 in 0..span {
                let y = (d2 as f64 - (np - 1) as f64) * h;
                modulus[d1 * span + d2] = profile.eval_r2(x * x + y * y).abs();
            }
        }
        Ok(Self { kernel, modulus })
    }

    pub fn grid(&self) -> &GridSpec {
        self.kernel.grid()
    }

    /// `max_u (Σ_z |φ(z − u)|^q h²)^{1/q}`; `|K(z,u)|` depends only on
    /// `z − u`, so every column is one window of a summed-area table.
    fn max_window_norm(&self, q: f64) -> f64 {
        if q.is_infinite() {
            return self.modulus.iter().copied().fold(0.0, f64::max);
        }
        let np = self.grid().points_per_axis();
        let span = 2 * np - 1;
        let w = self.grid().cell_volume();
        // sat[(a, b)] = Σ_{a' < a, b' < b} |φ|^q
        let stride = span + 1;
        let mut sat = vec![0.0f64; stride * stride];
        for a in 0..span {
            let mut row = 0.0;
            for b in 0..span {
                row += self.modulus[a * span + b].powf(q);
                sat[(a + 1) * stride + b + 1] = sat[a * stride + b + 1] + row;
            }
        }
        let rect = |a0: usize, b0: usize| {
            let (a1, b1) = (a0 + np, b0 + np);
            sat[a1 * stride + b1] - sat[a0 * stride + b1] - sat[a1 * stride + b0] + sat[a0 * stride + b0]
        };
        let mut best = 0.0f64;
        for j1 in 0..np {
            for j2 in 0..np {
                best = best.max(rect(np - 1 - j1, np - 1 - j2));
            }
        }
        (best.max(0.0) * w).powf(1.0 / q)
    }
}

impl DiscreteOperator for ProjectorOperator {
    fn input_len(&self) -> usize {
        self.grid().len()
    }

    fn output_len(&self) -> usize {
        self.grid().len()
    }

    fn input_weight(&self) -> f64 {
        self.grid().cell_volume()
    }

    fn output_weight(&self) -> f64 {
        self.grid().cell_volume()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let f = SampledField::from_raw(*self.grid(), x.to_vec());
        self.kernel.apply(&f).expect("same grid").remove(0).into_values()
    }

    // The kernel is exactly Hermitian.
    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        self.apply(y)
    }

    fn kernel(&self, i: usize, j: usize) -> Option<Complex64> {
        Some(self.kernel.kernel(0, i, j))
    }

    fn max_column_norm(&self, q: f64) -> Option<f64> {
        Some(self.max_window_norm(q))
    }

    fn max_row_norm(&self, s: f64) -> Option<f64> {
        Some(self.max_window_norm(s))
    }
}

/// `T*` of a wrapped operator.
pub struct Adjoint<'a, O: DiscreteOperator>(pub &'a O);

impl<O: DiscreteOperator> DiscreteOperator for Adjoint<'_, O> {
    fn input_len(&self) -> usize {
        self.0.output_len()
    }

    fn output_len(&self) -> usize {
        self.0.input_len()
    }

    fn input_weight(&self) -> f64 {
        self.0.output_weight()
    }

    fn output_weight(&self) -> f64 {
        self.0.input_weight()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.0.apply_adjoint(x)
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        self.0.apply(y)
    }

    fn kernel(&self, i: usize, j: usize) -> Option<Complex64> {
        self.0.kernel(j, i).map(|k| k.conj())
    }

    fn max_column_norm(&self, q: f64) -> Option<f64> {
        self.0.max_row_norm(q)
    }

    fn max_row_norm(&self, s: f64) -> Option<f64> {
        self.0.max_column_norm(s)
    }
}

/// Exact `L¹ → L²` norm: the largest weighted column norm.
pub fn opnorm_1_to_2<O: DiscreteOperator>(op: &O) -> Result<f64> {
    op.max_column_norm(2.0)
        .ok_or_else(|| Error::Unsupported("L1 -> L2 norm needs a materialized kernel".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ColumnNorms,
    RowNorms,
    SingularValue,
    NonlinearPower,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::ColumnNorms => "column-norms",
            Method::RowNorms => "row-norms",
            Method::SingularValue => "singular-value",
            Method::NonlinearPower => "nonlinear-power",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerEstimate {
    pub estimate: f64,
    pub method: Method,
    pub converged: bool,
    pub iterations: usize,
    /// Best ratio after each iteration of the best restart.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    pub iterations: usize,
    /// Random starts of the nonlinear method; the singular-value path uses one.
    pub restarts: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self { iterations: 60, restarts: DEFAULT_RESTARTS, seed: 0, tolerance: POWER_TOLERANCE }
    }
}

fn check_exponents(p: f64, q: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&p) || !(q >= 2.0) {
        return domain(format!("need 1 ≤ p ≤ 2 ≤ q ≤ ∞, got p = {p}, q = {q}"));
    }
    Ok(())
}

/// `‖T‖_{p→q}`: exact for `p = 1`, `q = ∞` (materialized kernels) and
/// `p = q = 2`; otherwise the nonlinear power method.
pub fn opnorm_power<O: DiscreteOperator>(op: &O, p: f64, q: f64, opts: PowerOptions) -> Result<PowerEstimate> {
    check_exponents(p, q)?;
    let exact = |estimate, method| PowerEstimate { estimate, method, converged: true, iterations: 0, history: vec![estimate] };
    if p == 1.0 {
        if let Some(v) = op.max_column_norm(q) {
            return Ok(exact(v, Method::ColumnNorms));
        }
    }
    if q.is_infinite() {
        if let Some(v) = op.max_row_norm(conj_exp(p)) {
            return Ok(exact(v, Method::RowNorms));
        }
    }
    if p == 2.0 && q == 2.0 {
        return Ok(best_of(op, p, q, PowerOptions { restarts: 1, ..opts }, singular_run));
    }
    opnorm_nonlinear(op, p, q, opts)
}

/// The nonlinear power method alone, whatever the exponents.
pub fn opnorm_nonlinear<O: DiscreteOperator>(op: &O, p: f64, q: f64, opts: PowerOptions) -> Result<PowerEstimate> {
    check_exponents(p, q)?;
    Ok(best_of(op, p, q, opts, nonlinear_run))
}

type Run<O> = fn(&O, f64, f64, Vec<Complex64>, &PowerOptions) -> (Vec<f64>, bool);

fn best_of<O: DiscreteOperator>(op: &O, p: f64, q: f64, opts: PowerOptions, run: Run<O>) -> PowerEstimate {
    let restarts = opts.restarts.max(1);
    let results: Vec<(Vec<f64>, bool)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(r as u64);
            let x: Vec<Complex64> = (0..op.input_len())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            run(op, p, q, x, &opts)
        })
        .collect();
    let method = if p == 2.0 && q == 2.0 { Method::SingularValue } else { Method::NonlinearPower };
    let (history, converged) = results
        .into_iter()
        .max_by(|a, b| a.0.last().unwrap().total_cmp(b.0.last().unwrap()))
        .unwrap();
    PowerEstimate {
        estimate: *history.last().unwrap(),
        method,
        converged,
        iterations: history.len(),
        history,
    }
}

fn ratio<O: DiscreteOperator>(op: &O, x: &[Complex64], p: f64, q: f64) -> (Vec<Complex64>, f64) {
    let y = op.apply(x);
    let nx = lp(x, p, op.input_weight());
    let r = if nx > 0.0 { lp(&y, q, op.output_weight()) / nx } else { 0.0 };
    (y, r)
}

fn normalize(x: &mut [Complex64], p: f64, w: f64) {
    let n = lp(x, p, w);
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

fn record(history: &mut Vec<f64>, r: f64, tol: f64) -> bool {
    let best = history.last().copied().unwrap_or(0.0);
    history.push(best.max(r));
    best > 0.0 && (r - best).abs() <= tol * best
}

fn singular_run<O: DiscreteOperator>(op: &O, _p: f64, _q: f64, mut x: Vec<Complex64>, opts: &PowerOptions) -> (Vec<f64>, bool) {
    let mut history = Vec::new();
    normalize(&mut x, 2.0, op.input_weight());
    for _ in 0..opts.iterations {
        let (y, r) = ratio(op, &x, 2.0, 2.0);
        if record(&mut history, r, opts.tolerance) {
            return (history, true);
        }
        x = op.apply_adjoint(&y);
        normalize(&mut x, 2.0, op.input_weight());
    }
    (history, false)
}

fn nonlinear_run<O: DiscreteOperator>(op: &O, p: f64, q: f64, mut x: Vec<Complex64>, opts: &PowerOptions) -> (Vec<f64>, bool) {
    let mut history = Vec::new();
    let pc = conj_exp(p);
    normalize(&mut x, p, op.input_weight());
    for _ in 0..opts.iterations {
        let (y, r) = ratio(op, &x, p, q);
        if record(&mut history, r, opts.tolerance) {
            return (history, true);
        }
        let z = op.apply_adjoint(&dual_map(&y, q));
        x = dual_map(&z, pc);
        normalize(&mut x, p, op.input_weight());
    }
    (history, false)
}

/// Whether a family is indexed by degree (against `2k + n`) or by `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingVariable {
    Degree { n: usize },
    Lambda,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormSample {
    /// `k` or `λ`.
    pub index: f64,
    pub p: f64,
    pub q: f64,
    pub estimate: f64,
    pub method: Method,
    pub converged: bool,
}

/// Log-log slope of the estimates against `2k + n` or `λ`.
pub fn scaling_fit(samples: &[NormSample], variable: ScalingVariable) -> Result<LogLogFit> {
    if samples.len() < 5 {
        return domain(format!("scaling fit needs at least 5 family members, got {}", samples.len()));
    }
    let mut pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| {
            let x = match variable {
                ScalingVariable::Degree { n } => 2.0 * s.index + n as f64,
                ScalingVariable::Lambda => s.index,
            };
            (x, s.estimate)
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    fit_loglog(&pts)
}

/// `‖Λ_k^λ‖_{p→q}` for each `k` at fixed `λ`.
pub fn degree_family(grid: GridSpec, degrees: &[usize], lambda: f64, p: f64, q: f64, opts: PowerOptions) -> Result<Vec<NormSample>> {
    degrees
        .iter()
        .map(|&k| {
            let op = ProjectorOperator::new(grid, k, lambda)?;
            let e = opnorm_power(&op, p, q, opts)?;
            Ok(NormSample { index: k as f64, p, q, estimate: e.estimate, method: e.method, converged: e.converged })
        })
        .collect()
}

/// `‖Λ_k^λ‖_{p→q}` for each `λ` at fixed `k`.
pub fn lambda_family(grid: GridSpec, k: usize, lambdas: &[f64], p: f64, q: f64, opts: PowerOptions) -> Result<Vec<NormSample>> {
    lambdas
        .iter()
        .map(|&lambda| {
            let op = ProjectorOperator::new(grid, k, lambda)?;
            let e = opnorm_power(&op, p, q, opts)?;
            Ok(NormSample { index: lambda, p, q, estimate: e.estimate, method: e.method, converged: e.converged })
        })
        .collect()
}

/// CSV with columns `(<index>, p, q, estimate, method, converged)`.
pub fn samples_to_csv(samples: &[NormSample], index_name: &str) -> String {
    let fmt = |x: f64| if x.is_infinite() { "inf".to_string() } else { format!("{x}") };
    let mut out = format!("{index_name},p,q,estimate,method,converged\n");
    for s in samples {
        out.push_str(&format!(
            "{},{},{},{:e},{},{}\n",
            s.index,
            fmt(s.p),
            fmt(s.q),
            s.estimate,
            s.method.name(),
            s.converged
        ));
    }
    out
}
