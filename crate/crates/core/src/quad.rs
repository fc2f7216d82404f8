//! Gauss–Legendre rules and an adaptive composite integrator.

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, refined by Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over [a, b].
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Integrates `f` and `|f|` over [a, b] in one sweep.
    fn integrate_with_abs<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> (f64, f64) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let (mut s, mut sa) = (0.0, 0.0);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x);
            s += w * v;
            sa += w * v.abs();
        }
        (s * half, sa * half)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive composite Gauss–Legendre integration.
///
/// The interval is first split into `initial_panels` panels; each panel is
/// bisected until the rule on the panel and on its two halves agree to a share
/// of `rel_tol * ∫|f|`. Measuring the tolerance against `∫|f|` keeps the
/// criterion meaningful when the signed integral cancels to zero.
#[derive(Debug, Clone)]
pub struct AdaptiveQuad {
    rule: GaussLegendre,
    pub rel_tol: f64,
    pub initial_panels: usize,
    pub max_depth: u32,
}

impl Default for AdaptiveQuad {
    fn default() -> Self {
        Self {
            rule: GaussLegendre::new(20),
            rel_tol: 1e-12,
            initial_panels: 16,
            max_depth: 40,
        }
    }
}

impl AdaptiveQuad {
    pub fn with_tolerance(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Domain("integration limits must be finite".into()));
        }
        if a == b {
            return Ok(0.0);
        }
        let panels = self.initial_panels.max(1);
        let width = (b - a) / panels as f64;
        let mut pieces = Vec::with_capacity(panels);
        let mut scale = 0.0;
        for i in 0..panels {
            let lo = a + width * i as f64;
            let hi = if i + 1 == panels { b } else { lo + width };
            let (s, sa) = self.rule.integrate_with_abs(&f, lo, hi);
            scale += sa;
            pieces.push((lo, hi, s));
        }
        if scale == 0.0 {
            return Ok(0.0);
        }
        let budget = self.rel_tol * scale;
        let total_width = b - a;
        let mut total = 0.0;
        for (lo, hi, s) in pieces {
            let tol = budget * (hi - lo) / total_width;
            total += self.refine(&f, lo, hi, s, tol, 0)?;
        }
        Ok(total)
    }

    fn refine<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let mid = 0.5 * (a + b);
        let left = self.rule.integrate(f, a, mid);
        let right = self.rule.integrate(f, mid, b);
        let split = left + right;
        // Integrands built from long recurrences carry evaluation noise well
        // above one ulp; differences below that floor are not refinable.
        let noise = 1e4 * f64::EPSILON * self.rule.integrate_with_abs(f, a, b).1;
        if (split - whole).abs() <= tol.max(noise) {
            return Ok(split);
        }
        if depth >= self.max_depth {
            return Err(Error::Numerical(format!(
                "adaptive quadrature did not converge on [{a}, {b}] (error estimate {:e}, tolerance {tol:e})",
                (split - whole).abs()
            )));
        }
        Ok(self.refine(f, a, mid, left, 0.5 * tol, depth + 1)?
            + self.refine(f, mid, b, right, 0.5 * tol, depth + 1)?)
    }
}
