//! Uniform grids over ℝ^{2n} and complex fields sampled on them.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::kv::KeyValues;

/// Largest number of grid points accepted by [`GridSpec::new`].
pub const MAX_GRID_POINTS: usize = 1 << 24;

/// Uniform grid `x_i = -L + i h`, `h = 2L/N`, `i = 0..N`, on every one of the
/// `2n` axes. The origin is the grid point with index `N/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    half_width: f64,
    points_per_axis: usize,
}

impl GridSpec {
    pub fn new(n: usize, half_width: f64, points_per_axis: usize) -> Result<Self> {
        if n == 0 {
            return domain("half-dimension n must be at least 1");
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return domain(format!("half width must be positive, got {half_width}"));
        }
        if points_per_axis < 8 || points_per_axis % 2 != 0 {
            return domain(format!(
                "points per axis must be even and at least 8, got {points_per_axis}"
            ));
        }
        let total = (points_per_axis as u128).pow(2 * n as u32);
        if total > MAX_GRID_POINTS as u128 {
            return domain(format!(
                "grid with {points_per_axis}^{} points exceeds the budget of {MAX_GRID_POINTS}",
                2 * n
            ));
        }
        Ok(Self {
            n,
            half_width,
            points_per_axis,
        })
    }

    /// The default desk-scale grid: n = 1, N = 128, L = 8.
    pub fn desk() -> Self {
        Self::new(1, 8.0, 128).expect("valid default grid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> usize {
        2 * self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points_per_axis as f64
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dims() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Riemann weight `h^{2n}` of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dims() as i32)
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn origin_index(&self) -> usize {
        self.points_per_axis / 2
    }

    /// Axis indices of flat index `idx` (axis 0 varies slowest).
    pub fn unflatten(&self, mut idx: usize, out: &mut [usize]) {
        let np = self.points_per_axis;
        for slot in out.iter_mut().rev() {
            *slot = idx % np;
            idx /= np;
        }
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut ax = vec![0; self.dims()];
        self.unflatten(idx, &mut ax);
        ax.iter().map(|&i| self.coordinate(i)).collect()
    }

    /// The same index set reinterpreted with all coordinates multiplied by `s`.
    pub fn rescaled(&self, s: f64) -> Result<Self> {
        Self::new(self.n, self.half_width * s, self.points_per_axis)
    }

    pub fn same_as(&self, other: &GridSpec) -> bool {
        self.n == other.n
            && self.points_per_axis == other.points_per_axis
            && (self.half_width - other.half_width).abs() <= 1e-14 * self.half_width
    }
}

/// Complex values on a [`GridSpec`], flattened row-major over the `2n` axes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return domain(format!(
                "field has {} values, grid expects {}",
                values.len(),
                grid.len()
            ));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return domain("field values must be finite");
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn<F: Fn(&[f64]) -> Complex64>(grid: GridSpec, f: F) -> Self {
        let mut ax = vec![0usize; grid.dims()];
        let mut x = vec![0.0; grid.dims()];
        let values = (0..grid.len())
            .map(|idx| {
                grid.unflatten(idx, &mut ax);
                for (xi, &ai) in x.iter_mut().zip(&ax) {
                    *xi = grid.coordinate(ai);
                }
                f(&x)
            })
            .collect();
        Self { grid, values }
    }

    pub(crate) fn from_raw(grid: GridSpec, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Same samples, reinterpreted on a rescaled grid.
    pub fn reinterpret(self, grid: GridSpec) -> Result<Self> {
        if grid.len() != self.grid.len() || grid.n() != self.grid.n() {
            return Err(Error::GridMismatch(
                "reinterpretation must keep the index set".into(),
            ));
        }
        Ok(Self {
            grid,
            values: self.values,
        })
    }

    pub fn check_same_grid(&self, other: &SampledField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )))
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|v| v * c).collect())
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn add(&self, other: &SampledField) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self::from_raw(
            self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &SampledField) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self::from_raw(
            self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        ))
    }

    /// `Σ conj(self) · other · h^{2n}`.
    pub fn inner(&self, other: &SampledField) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.cell_volume())
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(2.0)
    }

    /// Riemann-sum `L^p` norm; `p = ∞` gives the maximum modulus.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.max_abs();
        }
        let s: f64 = self.values.iter().map(|v| v.norm().powf(p)).sum();
        (s * self.grid.cell_volume()).powf(1.0 / p)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus over grid points with some axis index at 0 or N-1.
    pub fn boundary_max_abs(&self) -> f64 {
        let np = self.grid.points_per_axis();
        let mut ax = vec![0usize; self.grid.dims()];
        let mut m: f64 = 0.0;
        for (idx, v) in self.values.iter().enumerate() {
            self.grid.unflatten(idx, &mut ax);
            if ax.iter().any(|&a| a == 0 || a == np - 1) {
                m = m.max(v.norm());
            }
        }
        m
    }

    /// `‖self - other‖₂ / ‖other‖₂`.
    pub fn relative_l2_distance(&self, other: &SampledField) -> Result<f64> {
        let d = self.sub(other)?.l2_norm();
        let r = other.l2_norm();
        Ok(if r == 0.0 { d } else { d / r })
    }

    /// Descriptor text for the binary layout written by [`SampledField::to_le_bytes`].
    pub fn descriptor(&self, values_file: &str) -> String {
        let mut kv = KeyValues::new();
        kv.insert("format", "sampled-field");
        kv.insert("version", 1);
        kv.insert("n", self.grid.n());
        kv.insert("half_width", format!("{:e}", self.grid.half_width()));
        kv.insert("points_per_axis", self.grid.points_per_axis());
        kv.insert("count", self.values.len());
        kv.insert("encoding", "f64-le-complex-pairs");
        kv.insert("order", "row-major");
        kv.insert("values_file", values_file);
        kv.to_text()
    }

    /// Little-endian `(re, im)` f64 pairs in row-major order.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.values.len() * 16);
        for v in &self.values {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
        out
    }

    pub fn from_parts(descriptor: &str, bytes: &[u8]) -> Result<Self> {
        let kv = KeyValues::parse(descriptor)?;
        if kv.require_str("format")? != "sampled-field" {
            return Err(Error::Parse("descriptor is not a sampled-field descriptor".into()));
        }
        if kv.require_str("encoding")? != "f64-le-complex-pairs" {
            return Err(Error::Parse("unsupported value encoding".into()));
        }
        let grid = GridSpec::new(
            kv.require("n")?,
            kv.require("half_width")?,
            kv.require("points_per_axis")?,
        )?;
        let count: usize = kv.require("count")?;
        if count != grid.len() || bytes.len() != count * 16 {
            return Err(Error::Parse(format!(
                "value block has {} bytes, descriptor promises {count} values on a {}-point grid",
                bytes.len(),
                grid.len()
            )));
        }
        let values = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        Self::new(grid, values)
    }

    /// Writes `<stem>.bin` and `<stem>.desc`; returns both paths.
    pub fn write(&self, stem: &Path) -> Result<(PathBuf, PathBuf)> {
        let bin = stem.with_extension("bin");
        let desc = stem.with_extension("desc");
        let bin_name = bin
            .file_name()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::Io("invalid output file name".into()))?;
        fs::write(&bin, self.to_le_bytes())?;
        fs::write(&desc, self.descriptor(bin_name))?;
        Ok((bin, desc))
    }

    /// Reads a field from its descriptor; the value file is resolved relative to it.
    pub fn read(descriptor_path: &Path) -> Result<Self> {
        let text = fs::read_to_string(descriptor_path)?;
        let kv = KeyValues::parse(&text)?;
        let values_file = kv.require_str("values_file")?;
        let dir = descriptor_path.parent().unwrap_or_else(|| Path::new("."));
        let bytes = fs::read(dir.join(values_file))?;
        Self::from_parts(&text, &bytes)
    }
}
