//! Fields over `(v, z) ∈ ℝ^{2n} × ℝ`: one [`SampledField`] in `v` per sample of
//! the central variable.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::field::{GridSpec, SampledField};

/// Uniform axis `z_i = -L + i h`, `h = 2L/N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralAxis {
    half_width: f64,
    points: usize,
}

impl CentralAxis {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return domain(format!("half width must be positive, got {half_width}"));
        }
        if points < 2 || points % 2 != 0 {
            return domain(format!("axis needs an even number of points, got {points}"));
        }
        Ok(Self { half_width, points })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Largest frequency resolved by the samples, `π / h`.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.spacing()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductField {
    vgrid: GridSpec,
    axis: CentralAxis,
    slices: Vec<SampledField>,
}

impl ProductField {
    pub fn from_slices(axis: CentralAxis, slices: Vec<SampledField>) -> Result<Self> {
        if slices.len() != axis.points() {
            return domain(format!(
                "{} slices for an axis of {} points",
                slices.len(),
                axis.points()
            ));
        }
        let vgrid = *slices[0].grid();
        if slices.iter().any(|s| !s.grid().same_as(&vgrid)) {
            return Err(Error::GridMismatch("slices live on different v-grids".into()));
        }
        Ok(Self { vgrid, axis, slices })
    }

    pub fn from_fn<F>(vgrid: GridSpec, axis: CentralAxis, f: F) -> Self
    where
        F: Fn(&[f64], f64) -> Complex64,
    {
        let slices = (0..axis.points())
            .map(|i| {
                let z = axis.coordinate(i);
                SampledField::from_fn(vgrid, |v| f(v, z))
            })
            .collect();
        Self { vgrid, axis, slices }
    }

    /// `a(v) b(z)`.
    pub fn separable(a: &SampledField, axis: CentralAxis, b: &[Complex64]) -> Result<Self> {
        if b.len() != axis.points() {
            return domain("central profile length differs from the axis");
        }
        Self::from_slices(axis, b.iter().map(|&bz| a.scale(bz)).collect())
    }

    pub fn zeros(vgrid: GridSpec, axis: CentralAxis) -> Self {
        Self {
            vgrid,
            axis,
            slices: vec![SampledField::zeros(vgrid); axis.points()],
        }
    }

    pub fn vgrid(&self) -> &GridSpec {
        &self.vgrid
    }

    pub fn axis(&self) -> &CentralAxis {
        &self.axis
    }

    pub fn slices(&self) -> &[SampledField] {
        &self.slices
    }

    pub fn slice(&self, i: usize) -> &SampledField {
        &self.slices[i]
    }

    pub fn check_same_grid(&self, other: &ProductField) -> Result<()> {
        if self.vgrid.same_as(&other.vgrid) && self.axis == other.axis {
            Ok(())
        } else {
            Err(Error::GridMismatch("product fields on different grids".into()))
        }
    }

    pub fn add(&self, other: &ProductField) -> Result<Self> {
        self.check_same_grid(other)?;
        let slices = self
            .slices
            .iter()
            .zip(&other.slices)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(Self { slices, ..self.clone() })
    }

    pub fn sub(&self, other: &ProductField) -> Result<Self> {
        self.check_same_grid(other)?;
        let slices = self
            .slices
            .iter()
            .zip(&other.slices)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<_>>()?;
        Ok(Self { slices, ..self.clone() })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            slices: self.slices.iter().map(|s| s.scale(c)).collect(),
            ..self.clone()
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.mixed_norm(2.0, 2.0)
    }

    /// `(Σ_z (Σ_v |f|^p h_v^{2n})^{r/p} h_z)^{1/r}`; infinite exponents take maxima.
    pub fn mixed_norm(&self, p: f64, r: f64) -> f64 {
        let inner: Vec<f64> = self.slices.iter().map(|s| s.lp_norm(p)).collect();
        if r.is_infinite() {
            return inner.into_iter().fold(0.0, f64::max);
        }
        let s: f64 = inner.iter().map(|v| v.powf(r)).sum();
        (s * self.axis.spacing()).powf(1.0 / r)
    }

    pub fn max_abs(&self) -> f64 {
        self.slices.iter().map(|s| s.max_abs()).fold(0.0, f64::max)
    }
}
