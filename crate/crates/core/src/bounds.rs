//! Exponent calculus for the restriction bounds: `φ`, the exponents `A`–`D`,
//! the convergence exponents `ν`, `ν₁`, and numerical evaluation of the series
//! `Σ_k |μ_k′| μ_k^{β−1} (2k+n)^{ν₁}` with `β = n(1/p−1/q) + d(1/r−1/r′)`.

use std::fmt;

use rayon::prelude::*;

use crate::calculus::{solve_mu_k, CalculusSpec, Family};
use crate::error::{domain, Error, Result};

/// Tail-to-sum ratio at which [`series_bound`] stops adding terms.
pub const TAIL_TARGET: f64 = 1e-4;

/// Largest number of exactly evaluated terms.
pub const MAX_TERMS: usize = 1 << 22;

/// `φ(s) = −s/2` for `s ≤ s*`, `ns − 1/2` above, `s* = 1/(2n+1)`.
pub fn phi(s: f64, n: usize) -> Result<f64> {
    if !(0.0..=0.5).contains(&s) {
        return domain(format!("phi is defined on [0, 1/2], got {s}"));
    }
    if n == 0 {
        return domain("half-dimension n must be at least 1");
    }
    Ok(if s <= s_star(n) { -0.5 * s } else { n as f64 * s - 0.5 })
}

pub fn s_star(n: usize) -> f64 {
    1.0 / (2 * n + 1) as f64
}

/// `p* = 2(2n+1)/(2n+3)`, where `1/p* − 1/2 = s*`.
pub fn p_star(n: usize) -> f64 {
    2.0 * (2 * n + 1) as f64 / (2 * n + 3) as f64
}

/// Largest admissible `r`, `2(d+1)/(d+3)`.
pub fn r_max(d: usize) -> f64 {
    2.0 * (d + 1) as f64 / (d + 3) as f64
}

/// Lebesgue exponents `(p, q, r)` with `1 ≤ p ≤ 2 ≤ q ≤ ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lebesgue {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl Lebesgue {
    pub fn new(p: f64, q: f64, r: f64) -> Self {
        Self { p, q, r }
    }

    pub fn r_conj(&self) -> f64 {
        conj(self.r)
    }
}

fn conj(x: f64) -> f64 {
    if x == 1.0 {
        f64::INFINITY
    } else if x.is_infinite() {
        1.0
    } else {
        x / (x - 1.0)
    }
}

fn inv(x: f64) -> f64 {
    if x.is_infinite() { 0.0 } else { 1.0 / x }
}

fn check_lebesgue(e: &Lebesgue, n: usize, d: usize) -> Result<()> {
    if n == 0 || d == 0 {
        return domain(format!("need n, d ≥ 1, got n = {n}, d = {d}"));
    }
    if !(1.0..=2.0).contains(&e.p) {
        return domain(format!("p must lie in [1, 2], got {}", e.p));
    }
    if !(e.q >= 2.0) {
        return domain(format!("q must lie in [2, ∞], got {}", e.q));
    }
    let rm = r_max(d);
    if !(e.r >= 1.0 && e.r <= rm + 1e-15) {
        return domain(format!("r must lie in [1, {rm}] for d = {d}, got {}", e.r));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentParams {
    alpha: f64,
    beta: f64,
    gamma: f64,
    exps: Lebesgue,
    n: usize,
    d: usize,
}

impl ExponentParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, exps: Lebesgue, n: usize, d: usize) -> Result<Self> {
        // Reuse the calculus checks on (α, β, γ).
        CalculusSpec::homogeneous(alpha, beta, gamma)?;
        check_lebesgue(&exps, n, d)?;
        Ok(Self { alpha, beta, gamma, exps, n, d })
    }

    pub fn for_spec(spec: &CalculusSpec, exps: Lebesgue, n: usize, d: usize) -> Result<Self> {
        Self::new(spec.alpha(), spec.beta(), spec.gamma(), exps, n, d)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lebesgue(&self) -> Lebesgue {
        self.exps
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `(d, p, q) = (1, 2, 2)`, excluded from the restriction theorems.
    pub fn is_excluded_endpoint(&self) -> bool {
        self.d == 1 && self.exps.p == 2.0 && self.exps.q == 2.0
    }

    /// `n(1/p − 1/q) + d(1/r − 1/r′)`.
    pub fn bracket(&self) -> f64 {
        bracket(&self.exps, self.n, self.d)
    }

    pub fn matches(&self, spec: &CalculusSpec) -> bool {
        self.alpha == spec.alpha() && self.beta == spec.beta() && self.gamma == spec.gamma()
    }
}

fn bracket(e: &Lebesgue, n: usize, d: usize) -> f64 {
    n as f64 * (inv(e.p) - inv(e.q)) + d as f64 * (inv(e.r) - inv(e.r_conj()))
}

fn nu1_of(e: &Lebesgue, n: usize) -> f64 {
    let a = (inv(e.p) - 0.5).clamp(0.0, 0.5);
    let b = (0.5 - inv(e.q)).clamp(0.0, 0.5);
    phi(a, n).expect("clamped") + phi(b, n).expect("clamped")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentSet {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub s_star: f64,
    pub p_star: f64,
    pub nu: f64,
    pub nu1: f64,
}

pub fn exponents(params: &ExponentParams) -> ExponentSet {
    let br = params.bracket();
    let nu1 = nu1_of(&params.exps, params.n);
    let (al, be, ga) = (params.alpha, params.beta, params.gamma);
    let gap = 1.0 / al - 0.5 / be;
    let c = 0.5 / be * br + gap * (nu1 + 1.0) - 1.0;
    let d = br / al - 1.0;
    ExponentSet {
        a: 0.5 / (be * ga) * br + gap / ga * (nu1 + 1.0) - 1.0,
        b: br / (al * ga) - 1.0,
        c,
        d,
        s_star: s_star(params.n),
        p_star: p_star(params.n),
        nu: nu1 - br,
        nu1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuCase {
    /// `p ≤ p*`, `q ≥ p*′`
    A,
    /// `p ≤ p*`, `q ≤ p*′`
    B,
    /// `p ≥ p*`, `q ≥ p*′`
    C,
    /// `p ≥ p*`, `q ≤ p*′`
    D,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuAnalysis {
    pub case: NuCase,
    pub nu: f64,
    pub nu1: f64,
    /// `(d, r, p, q) = (1, 1, 2, 2)`, where `ν = −1`.
    pub endpoint: bool,
}

pub fn nu_analysis(exps: Lebesgue, n: usize, d: usize) -> Result<NuAnalysis> {
    check_lebesgue(&exps, n, d)?;
    let ss = s_star(n);
    let low_p = inv(exps.p) - 0.5 >= ss;
    let high_q = 0.5 - inv(exps.q) >= ss;
    let case = match (low_p, high_q) {
        (true, true) => NuCase::A,
        (true, false) => NuCase::B,
        (false, true) => NuCase::C,
        (false, false) => NuCase::D,
    };
    let nu1 = nu1_of(&exps, n);
    Ok(NuAnalysis {
        case,
        nu: nu1 - bracket(&exps, n, d),
        nu1,
        endpoint: d == 1 && exps.r == 1.0 && exps.p == 2.0 && exps.q == 2.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    A,
    B,
    C,
    D,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Branch::A => "A",
            Branch::B => "B",
            Branch::C => "C",
            Branch::D => "D",
        };
        f.write_str(s)
    }
}

/// Whether the growth is measured in `μ` or in `|1 − μ|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitVariable {
    Mu,
    DistanceToOne,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub exponent: f64,
    pub branch: Branch,
    pub variable: FitVariable,
    /// Row of the regime table, e.g. `gamma>0, alpha/2beta<1, mu>1`.
    pub regime: String,
}

fn sign_label(x: f64) -> &'static str {
    if x > 0.0 { ">0" } else { "<0" }
}

fn ratio_label(spec: &CalculusSpec) -> &'static str {
    let r = spec.alpha() / (2.0 * spec.beta());
    if r < 1.0 {
        "<1"
    } else if r > 1.0 {
        ">1"
    } else {
        "=1"
    }
}

pub fn predicted_exponent(spec: &CalculusSpec, params: &ExponentParams, mu: f64) -> Result<Prediction> {
    if !params.matches(spec) {
        return domain("exponent parameters and calculus spec disagree on (alpha, beta, gamma)");
    }
    if !spec.contains(mu) {
        let (lo, hi) = spec.spectral_range();
        return domain(format!("mu = {mu} outside the spectral range ({lo}, {hi})"));
    }
    let set = exponents(params);
    let g = spec.gamma();
    let head = format!("gamma{}, alpha/2beta{}", sign_label(g), ratio_label(spec));
    // log of μ^{(1/γ)(1/α − 1/(2β))}
    let far_test = spec.scale_gap() * mu.ln() / g;
    let far = |side: &str| {
        let branch = if far_test <= 0.0 { Branch::B } else { Branch::A };
        let exponent = if branch == Branch::B { set.b } else { set.a };
        Prediction { exponent, branch, variable: FitVariable::Mu, regime: format!("{head}, {side}") }
    };
    match spec.family() {
        Family::Homogeneous => {
            let side = if mu > 1.0 { "mu>1" } else { "mu<=1" };
            Ok(far(side))
        }
        Family::Inhomogeneous => {
            let far_side = if g > 0.0 { "mu->inf" } else { "mu->0+" };
            let near_side = if g > 0.0 { "mu->1+" } else { "mu->1-" };
            if spec.level(mu)? > 1.0 {
                return Ok(far(far_side));
            }
            let near_test = spec.scale_gap() * (1.0 - mu).abs().ln();
            let branch = if near_test >= 0.0 { Branch::C } else { Branch::D };
            let exponent = if branch == Branch::C { set.c } else { set.d };
            Ok(Prediction {
                exponent,
                branch,
                variable: FitVariable::DistanceToOne,
                regime: format!("{head}, {near_side}"),
            })
        }
    }
}

/// `|μ_k′| μ_k^{β−1} (2k+n)^{ν₁}`.
fn series_term(spec: &CalculusSpec, mu: f64, k: usize, n: usize, br: f64, nu1: f64) -> Result<f64> {
    let p = solve_mu_k(spec, mu, k, n)?;
    Ok(p.mu_k_prime.abs() * p.mu_k.powf(br - 1.0) * ((2 * k + n) as f64).powf(nu1))
}

/// `Σ_{k ≤ cutoff}` of the series, with no tail.
pub fn series_partial_sum(
    spec: &CalculusSpec,
    mu: f64,
    params: &ExponentParams,
    cutoff: usize,
) -> Result<f64> {
    let (br, nu1) = (params.bracket(), exponents(params).nu1);
    (0..=cutoff)
        .into_par_iter()
        .map(|k| series_term(spec, mu, k, params.n, br, nu1))
        .try_reduce(|| 0.0, |a, b| Ok(a + b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundPoint {
    pub mu: f64,
    /// Exact partial sum over `k ≤ cutoff`.
    pub value: f64,
    /// Upper bound for the remaining terms.
    pub tail: f64,
    pub tail_fraction: f64,
    pub cutoff: usize,
    pub converged: bool,
    pub prediction: Prediction,
}

/// The series bound at `μ`, starting from `k ≤ cutoff` and doubling the
/// cutoff until the tail bound is below [`TAIL_TARGET`] of the sum.
///
/// For `k > K` the terms are at most `C (2k+n)^ν` with
/// `C = |s′| s^{β/α−1} / min(α, 2β)`, from `μ_k < (2k+n)^{−1} s^{1/α}` and
/// `|μ_k′|/μ_k ≤ |s′| / (min(α, 2β) s)`, where `s` is the level of `μ`. The
/// tail is bounded by `C ∫_K^∞ (2x+n)^ν dx`.
pub fn series_bound(
    spec: &CalculusSpec,
    mu: f64,
    params: &ExponentParams,
    cutoff: usize,
) -> Result<BoundPoint> {
    let prediction = predicted_exponent(spec, params, mu)?;
    let set = exponents(params);
    if set.nu >= -1.0 {
        return Err(Error::DivergentSeries { nu: set.nu });
    }
    let (br, n) = (params.bracket(), params.n);
    let s = spec.level(mu)?;
    let c = spec.level_derivative(mu).abs() / (spec.alpha().min(2.0 * spec.beta()) * s)
        * (br / spec.alpha() * s.ln()).exp();
    let tail_at = |k: usize| c * ((2 * k + n) as f64).powf(set.nu + 1.0) / (2.0 * (set.nu + 1.0).abs());

    let mut k_max = cutoff;
    let mut sum = series_partial_sum(spec, mu, params, k_max)?;
    loop {
        let tail = tail_at(k_max);
        let fraction = tail / sum;
        let converged = fraction < TAIL_TARGET;
        if converged || k_max + 1 >= MAX_TERMS {
            return Ok(BoundPoint {
                mu,
                value: sum,
                tail,
                tail_fraction: fraction,
                cutoff: k_max,
                converged,
                prediction,
            });
        }
        let next = (2 * k_max + 1).min(MAX_TERMS - 1);
        sum += (k_max + 1..=next)
            .into_par_iter()
            .map(|k| series_term(spec, mu, k, n, br, set.nu1))
            .try_reduce(|| 0.0, |a, b| Ok(a + b))?;
        k_max = next;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

/// Least-squares line through `(ln x, ln y)`.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 3 {
        return domain(format!("need at least 3 points, got {}", points.len()));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return domain("log-log fit needs positive finite values");
    }
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return domain("x values must be strictly increasing");
    }
    let m = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(LogLogFit { slope, intercept, max_residual })
}

/// `2^{lo}, 2^{lo+step}, …` up to `2^{hi}`.
pub fn dyadic_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| (lo + i as f64 * step).exp2()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve {
    pub points: Vec<BoundPoint>,
}

impl BoundCurve {
    pub fn evaluate(spec: &CalculusSpec, params: &ExponentParams, mus: &[f64]) -> Result<Self> {
        let points = mus
            .iter()
            .map(|&mu| series_bound(spec, mu, params, 64))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { points })
    }

    /// Slope in the variable of the first point's regime.
    pub fn fit(&self) -> Result<LogLogFit> {
        let var = self
            .points
            .first()
            .map(|p| p.prediction.variable)
            .ok_or_else(|| Error::Domain("empty bound curve".into()))?;
        let mut pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .map(|p| match var {
                FitVariable::Mu => (p.mu, p.value),
                FitVariable::DistanceToOne => ((1.0 - p.mu).abs(), p.value),
            })
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        fit_loglog(&pts)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("mu,value,tail_fraction,regime,predicted_exponent\n");
        for p in &self.points {
            out.push_str(&format!(
                "{:e},{:e},{:e},\"{} -> {}\",{}\n",
                p.mu, p.value, p.tail_fraction, p.prediction.regime, p.prediction.branch, p.prediction.exponent
            ));
        }
        out
    }
}
