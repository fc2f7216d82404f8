//! Closed-form Gaussians `c · exp(-xᵀMx + bᵀx)` with real positive definite
//! `M` and complex `b`, `c`. Integrating out an affine family of variables
//! gives another Gaussian of the same form, which is all the group module
//! needs for Radon transforms, central Fourier transforms and mixed norms.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    m: DMatrix<f64>,
    b: DVector<Complex64>,
    c: Complex64,
}

/// How the eliminated variables are removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    /// `∫ g ds`.
    Integrate,
    /// `sup_s g`, only meaningful for real `b` and `c > 0`.
    Supremum,
}

fn cmul(m: &DMatrix<f64>, v: &DVector<Complex64>) -> DVector<Complex64> {
    DVector::from_fn(m.nrows(), |i, _| {
        (0..m.ncols()).map(|j| v[j] * m[(i, j)]).sum()
    })
}

fn ctmul(m: &DMatrix<f64>, v: &DVector<Complex64>) -> DVector<Complex64> {
    DVector::from_fn(m.ncols(), |i, _| {
        (0..m.nrows()).map(|j| v[j] * m[(j, i)]).sum()
    })
}

fn dot(a: &DVector<Complex64>, b: &DVector<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

impl Gaussian {
    pub fn new(m: DMatrix<f64>, b: DVector<Complex64>, c: Complex64) -> Result<Self> {
        if !m.is_square() || m.nrows() != b.len() || m.nrows() == 0 {
            return domain(format!(
                "quadratic form is {}x{} but linear term has length {}",
                m.nrows(),
                m.ncols(),
                b.len()
            ));
        }
        let sym = (&m + m.transpose()) * 0.5;
        let asym = (&m - &sym).abs().max();
        if asym > 1e-12 * sym.abs().max().max(1.0) {
            return domain("quadratic form must be symmetric");
        }
        if sym.clone().cholesky().is_none() {
            return domain("quadratic form must be positive definite");
        }
        Ok(Self { m: sym, b, c })
    }

    /// Real Gaussian `c · exp(-xᵀMx)`.
    pub fn centred(m: DMatrix<f64>, c: f64) -> Result<Self> {
        let dim = m.nrows();
        Self::new(m, DVector::zeros(dim), Complex64::new(c, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn quadratic(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn linear(&self) -> &DVector<Complex64> {
        &self.b
    }

    pub fn amplitude(&self) -> Complex64 {
        self.c
    }

    pub fn exponent(&self, x: &[f64]) -> Complex64 {
        let xv = DVector::from_column_slice(x);
        let q = xv.dot(&(&self.m * &xv));
        let l: Complex64 = self.b.iter().zip(x).map(|(b, x)| b * x).sum();
        l - q
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        assert_eq!(x.len(), self.dim(), "point dimension");
        self.c * self.exponent(x).exp()
    }

    /// `∂g/∂x_i = (b_i - 2(Mx)_i) g`, as the factor multiplying `g`.
    pub fn log_gradient(&self, x: &[f64]) -> DVector<Complex64> {
        let xv = DVector::from_column_slice(x);
        let mx = &self.m * xv;
        DVector::from_fn(self.dim(), |i, _| self.b[i] - 2.0 * mx[i])
    }

    /// Multiplies by `exp(i ηᵀ x)` on the listed coordinates.
    pub fn with_phase(&self, coords: &[usize], eta: &[f64]) -> Self {
        let mut out = self.clone();
        for (&i, &e) in coords.iter().zip(eta) {
            out.b[i] += Complex64::new(0.0, e);
        }
        out
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            c: self.c * s,
            ..self.clone()
        }
    }

    /// `|g|^p`, a real Gaussian.
    pub fn abs_pow(&self, p: f64) -> Self {
        Self {
            m: &self.m * p,
            b: self.b.map(|b| Complex64::new(p * b.re, 0.0)),
            c: Complex64::new(self.c.norm().powf(p), 0.0),
        }
    }

    /// Reduces `y ↦ g(Ty + Ps)` over `s`, returning a Gaussian in `y`.
    ///
    /// With `A = PᵀMP` and `β(y) = Pᵀb - 2PᵀMTy`, the `s`-integral is
    /// `π^{r/2} det(A)^{-1/2} exp(βᵀA⁻¹β/4)` and the supremum (real case) is
    /// `exp(βᵀA⁻¹β/4)`.
    pub fn reduce(&self, t: &DMatrix<f64>, p: &DMatrix<f64>, how: Reduction) -> Result<Self> {
        let dim = self.dim();
        if t.nrows() != dim || p.nrows() != dim {
            return Err(Error::GridMismatch(format!(
                "affine map rows ({}, {}) do not match dimension {dim}",
                t.nrows(),
                p.nrows()
            )));
        }
        if p.ncols() == 0 {
            return Ok(Self {
                m: t.transpose() * &self.m * t,
                b: ctmul(t, &self.b),
                c: self.c,
            });
        }
        let mp = &self.m * p;
        let a = p.transpose() * &mp;
        let chol = a
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Numerical("eliminated block is not positive definite".into()))?;
        let a_inv = chol.inverse();
        let det_a = chol.determinant();
        let tm_p = t.transpose() * &mp; // TᵀMP
        let m_y = t.transpose() * &self.m * t - &tm_p * &a_inv * tm_p.transpose();
        let m_y = (&m_y + m_y.transpose()) * 0.5;
        let pb = ctmul(p, &self.b);
        let a_inv_pb = cmul(&a_inv, &pb);
        let b_y = ctmul(t, &self.b) - cmul(&tm_p, &a_inv_pb);
        let shift = (dot(&pb, &a_inv_pb) * 0.25).exp();
        let factor = match how {
            Reduction::Integrate => PI.powf(0.5 * p.ncols() as f64) / det_a.sqrt(),
            Reduction::Supremum => 1.0,
        };
        Ok(Self {
            m: m_y,
            b: b_y,
            c: self.c * shift * factor,
        })
    }

    /// Mean of `s` under `s ↦ g(Ty + Ps)` normalized, i.e. `½A⁻¹β(y)`, so that
    /// `∫ s g ds = mean · ∫ g ds`.
    pub fn conditional_mean(
        &self,
        t: &DMatrix<f64>,
        p: &DMatrix<f64>,
        y: &[f64],
    ) -> Result<DVector<Complex64>> {
        let mp = &self.m * p;
        let a = p.transpose() * &mp;
        let a_inv = a
            .cholesky()
            .ok_or_else(|| Error::Numerical("eliminated block is not positive definite".into()))?
            .inverse();
        let ty = t * DVector::from_column_slice(y);
        let beta = ctmul(p, &self.b) - (mp.transpose() * ty * 2.0).map(|v| Complex64::new(v, 0.0));
        Ok(cmul(&a_inv, &beta) * Complex64::new(0.5, 0.0))
    }

    /// `∫_{ℝ^dim} g`.
    pub fn integral(&self) -> Result<Complex64> {
        let dim = self.dim();
        let g = self.reduce(
            &DMatrix::zeros(dim, 0),
            &DMatrix::identity(dim, dim),
            Reduction::Integrate,
        )?;
        Ok(g.c)
    }

    /// `sup |g|`.
    pub fn sup_abs(&self) -> Result<f64> {
        let dim = self.dim();
        let g = self.abs_pow(1.0).reduce(
            &DMatrix::zeros(dim, 0),
            &DMatrix::identity(dim, dim),
            Reduction::Supremum,
        )?;
        Ok(g.c.re)
    }
}
