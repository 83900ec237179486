use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::{fft, Grid};
use crate::error::{invalid, Error, Result};

/// Relative spectral divergence accepted for a field flagged divergence free.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-12;

/// Scalar field on a [`Grid`], stored as Fourier coefficients of
/// `u(x) = Σ_k û_k e^{ik·x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

/// Fields on which a radial Fourier multiplier `m(|k|²)` acts mode by mode.
pub trait FourierMultiply: Sized {
    fn grid(&self) -> &Grid;

    /// Multiplies every coefficient by `m(|k|²)`.
    fn apply_multiplier(&self, m: impl Fn(f64) -> f64) -> Self;

    /// `Σ_k w(|k|²) |û_k|²` times the box volume.
    fn weighted_energy(&self, w: impl Fn(f64) -> f64) -> f64;

    fn has_mean(&self) -> bool;

    /// `(|k|², V|û_k|²)` for every nonzero coefficient (summed over components).
    fn mode_energies(&self) -> Vec<(f64, f64)>;
}

impl SpectralField {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    /// The constant field with value `value`.
    pub fn constant(grid: Grid, value: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    /// `a e^{ik·x}`, or `a e^{ik·x} + conj(a) e^{-ik·x}` when `real` is set.
    pub fn single_mode(grid: Grid, m: &[i64], amplitude: Complex64, real: bool) -> Result<Self> {
        let idx = grid
            .index_of(m)
            .ok_or_else(|| invalid("m", format!("{m:?} is not on the lattice")))?;
        let mut f = Self::zeros(grid);
        f.coeffs[idx] += amplitude;
        if real {
            let neg = grid.conjugate_index(idx);
            if neg == idx {
                f.coeffs[idx] = Complex64::new(2.0 * amplitude.re, 0.0);
            } else {
                f.coeffs[neg] += amplitude.conj();
            }
        }
        Ok(f)
    }

    pub fn from_physical(grid: Grid, values: &[f64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self {
            grid,
            coeffs: fft::real_to_spectral(&grid, values),
        })
    }

    /// Samples at the grid points (real part).
    pub fn to_physical(&self) -> Vec<f64> {
        fft::to_physical(&self.grid, &self.coeffs)
            .into_iter()
            .map(|z| z.re)
            .collect()
    }

    pub fn to_physical_complex(&self) -> Vec<Complex64> {
        fft::to_physical(&self.grid, &self.coeffs)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, m: &[i64]) -> Option<Complex64> {
        self.grid.index_of(m).map(|i| self.coeffs[i])
    }

    pub fn mean_coeff(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Largest `|û(-k) - conj(û(k))|`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[self.grid.conjugate_index(i)] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Projects onto real-valued data: `û ↦ (û(k) + conj(û(-k)))/2`.
    pub fn symmetrized(&self) -> Self {
        let coeffs = (0..self.coeffs.len())
            .map(|i| 0.5 * (self.coeffs[i] + self.coeffs[self.grid.conjugate_index(i)].conj()))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Fourier-side `L²` norm, `(V Σ|û_k|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.weighted_energy(|_| 1.0).sqrt()
    }

    /// Physical-side `L²` norm by the rectangle rule, `(V/N Σ_x |u(x)|²)^{1/2}`.
    pub fn l2_norm_physical(&self) -> f64 {
        let phys = self.to_physical_complex();
        let sum: f64 = phys.iter().map(|z| z.norm_sqr()).sum();
        (self.grid.volume() * sum / phys.len() as f64).sqrt()
    }

    /// `∫ f conj(g) dx` over the box.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let s: Complex64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.grid.volume())
    }

    /// Fractional derivative `Λ^s`, the multiplier `|k|^s`.
    ///
    /// The zero mode is sent to 0 for `s > 0`, kept for `s = 0`, and must
    /// already vanish for `s < 0`.
    pub fn lambda_pow(&self, s: f64) -> Result<Self> {
        check_order(self.has_mean(), s)?;
        Ok(self.apply_multiplier(|k2| lambda_symbol(k2, s)))
    }

    /// `‖Λ^s f‖_{L²}`.
    pub fn homogeneous_norm(&self, s: f64) -> Result<f64> {
        check_order(self.has_mean(), s)?;
        Ok(self.weighted_energy(|k2| lambda_symbol(k2, 2.0 * s)).sqrt())
    }

    /// `(‖Λ^s f‖² + ‖f‖²)^{1/2}` for `s > 0`; plain `‖f‖_{L²}` at `s = 0`.
    pub fn sobolev_norm(&self, s: f64) -> Result<f64> {
        Ok(self.weighted_energy(sobolev_weight(s)?).sqrt())
    }

    /// Zeroes every mode outside the 2/3-rule band.
    pub fn dealiased(&self) -> Self {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            if !self.grid.is_resolved(i) {
                *c = Complex64::default();
            }
        }
        out
    }

    /// Spectral derivative `∂/∂x_axis`.
    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = self.clone();
        self.grid.for_each_mode(|i, k| {
            out.coeffs[i] *= Complex64::new(0.0, k[axis]);
        });
        out
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }
}

fn check_order(has_mean: bool, s: f64) -> Result<()> {
    if !s.is_finite() {
        return Err(invalid("s", "order must be finite"));
    }
    if s < 0.0 && has_mean {
        return Err(Error::NegativeOrderOnZeroMode { order: s });
    }
    Ok(())
}

/// `|k|^s` as a function of `|k|²`, with `|0|^s = 0` for `s ≠ 0`.
#[inline]
pub(crate) fn lambda_symbol(k2: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if k2 == 0.0 {
        0.0
    } else if s == 2.0 {
        k2
    } else {
        k2.powf(0.5 * s)
    }
}

/// Weight `|k|^{2s} + 1` of the squared `H^s` norm (`1` at `s = 0`).
pub(crate) fn sobolev_weight(s: f64) -> Result<impl Fn(f64) -> f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(invalid("s", format!("Sobolev order must be >= 0, got {s}")));
    }
    Ok(move |k2: f64| {
        if s == 0.0 {
            1.0
        } else {
            lambda_symbol(k2, 2.0 * s) + 1.0
        }
    })
}

impl FourierMultiply for SpectralField {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn apply_multiplier(&self, m: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        self.grid.for_each_mode(|i, k| {
            let c = &mut out.coeffs[i];
            if *c != Complex64::default() {
                *c *= m(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
            }
        });
        out
    }

    fn weighted_energy(&self, w: impl Fn(f64) -> f64) -> f64 {
        let mut sum = 0.0;
        self.grid.for_each_mode(|i, k| {
            let a = self.coeffs[i].norm_sqr();
            if a != 0.0 {
                sum += w(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * a;
            }
        });
        sum * self.grid.volume()
    }

    fn has_mean(&self) -> bool {
        self.coeffs[0] != Complex64::default()
    }

    fn mode_energies(&self) -> Vec<(f64, f64)> {
        let vol = self.grid.volume();
        let mut out = Vec::new();
        self.grid.for_each_mode(|i, k| {
            let a = self.coeffs[i].norm_sqr();
            if a != 0.0 {
                out.push((k[0] * k[0] + k[1] * k[1] + k[2] * k[2], vol * a));
            }
        });
        out
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        SpectralField {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        SpectralField {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, a: f64) -> SpectralField {
        self.scaled(a)
    }
}

/// Vector field: `d` components on one grid (a single component is allowed
/// for scalar forcing traces), plus an asserted divergence-free flag.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<SpectralField>,
    divergence_free: bool,
}

impl VectorField {
    pub fn new(components: Vec<SpectralField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| invalid("components", "at least one component required"))?;
        let grid = *first.grid();
        if components.iter().any(|c| *c.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        if components.len() != 1 && components.len() != grid.dim() {
            return Err(invalid(
                "components",
                format!(
                    "expected 1 or {} components, got {}",
                    grid.dim(),
                    components.len()
                ),
            ));
        }
        Ok(Self {
            components,
            divergence_free: false,
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            components: vec![SpectralField::zeros(grid); grid.dim()],
            divergence_free: true,
        }
    }

    /// Wraps a scalar as a one-component field.
    pub fn scalar(f: SpectralField) -> Self {
        Self {
            components: vec![f],
            divergence_free: false,
        }
    }

    /// Sets the divergence-free flag after checking the spectral divergence.
    pub fn assert_divergence_free(mut self) -> Result<Self> {
        let residual = self.divergence_residual();
        if self.components.len() != self.grid().dim() || residual > DIVERGENCE_TOLERANCE {
            return Err(Error::NotDivergenceFree { residual });
        }
        self.divergence_free = true;
        Ok(self)
    }

    pub fn is_divergence_free(&self) -> bool {
        self.divergence_free
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[SpectralField] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &SpectralField {
        &self.components[i]
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn into_components(self) -> Vec<SpectralField> {
        self.components
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(SpectralField::is_finite)
    }

    /// Spectral divergence `Σ_j i k_j û_j`.
    pub fn divergence(&self) -> SpectralField {
        let grid = *self.grid();
        let mut out = SpectralField::zeros(grid);
        grid.for_each_mode(|i, k| {
            let mut s = Complex64::default();
            for (j, c) in self.components.iter().enumerate() {
                s += c.coeffs[i] * k[j];
            }
            out.coeffs[i] = Complex64::new(0.0, 1.0) * s;
        });
        out
    }

    /// `max_k |k·û(k)| / max_k |k||û(k)|` (0 for a constant field).
    pub fn divergence_residual(&self) -> f64 {
        let grid = *self.grid();
        let (mut div, mut scale) = (0.0f64, 0.0f64);
        grid.for_each_mode(|i, k| {
            let mut s = Complex64::default();
            let mut mag = 0.0;
            for (j, c) in self.components.iter().enumerate() {
                s += c.coeffs[i] * k[j];
                mag += c.coeffs[i].norm_sqr();
            }
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            div = div.max(s.norm());
            scale = scale.max((k2 * mag).sqrt());
        });
        if scale == 0.0 {
            0.0
        } else {
            div / scale
        }
    }

    /// Leray projection `û ↦ û - k(k·û)/|k|²`; the zero mode is left alone.
    pub fn leray_project(&self) -> Self {
        let grid = *self.grid();
        let d = grid.dim();
        assert_eq!(
            self.components.len(),
            d,
            "Leray projection needs d components"
        );
        let mut out = self.components.clone();
        grid.for_each_mode(|i, k| {
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if k2 == 0.0 {
                return;
            }
            let mut kdotu = Complex64::default();
            for j in 0..d {
                kdotu += self.components[j].coeffs[i] * k[j];
            }
            let kdotu = kdotu / k2;
            for j in 0..d {
                out[j].coeffs[i] = self.components[j].coeffs[i] - kdotu * k[j];
            }
        });
        Self {
            components: out,
            divergence_free: true,
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.weighted_energy(|_| 1.0).sqrt()
    }

    pub fn homogeneous_norm(&self, s: f64) -> Result<f64> {
        check_order(self.has_mean(), s)?;
        Ok(self.weighted_energy(|k2| lambda_symbol(k2, 2.0 * s)).sqrt())
    }

    pub fn sobolev_norm(&self, s: f64) -> Result<f64> {
        Ok(self.weighted_energy(sobolev_weight(s)?).sqrt())
    }

    pub fn lambda_pow(&self, s: f64) -> Result<Self> {
        check_order(self.has_mean(), s)?;
        Ok(self.apply_multiplier(|k2| lambda_symbol(k2, s)))
    }

    /// `Σ_j ∫ f_j conj(g_j) dx`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.grid() != other.grid() || self.len() != other.len() {
            return Err(Error::GridMismatch);
        }
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.inner(b))
            .sum()
    }

    pub fn dealiased(&self) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(SpectralField::dealiased)
                .collect(),
            divergence_free: self.divergence_free,
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            components: self.components.iter().map(|c| c.scaled(a)).collect(),
            divergence_free: self.divergence_free,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a - b)
                .collect(),
            divergence_free: self.divergence_free && other.divergence_free,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
            divergence_free: self.divergence_free && other.divergence_free,
        }
    }

    pub(crate) fn from_parts(components: Vec<SpectralField>, divergence_free: bool) -> Self {
        Self {
            components,
            divergence_free,
        }
    }
}

impl FourierMultiply for VectorField {
    fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    fn apply_multiplier(&self, m: impl Fn(f64) -> f64) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|c| c.apply_multiplier(&m))
                .collect(),
            divergence_free: self.divergence_free,
        }
    }

    fn weighted_energy(&self, w: impl Fn(f64) -> f64) -> f64 {
        self.components.iter().map(|c| c.weighted_energy(&w)).sum()
    }

    fn has_mean(&self) -> bool {
        self.components.iter().any(FourierMultiply::has_mean)
    }

    fn mode_energies(&self) -> Vec<(f64, f64)> {
        self.components
            .iter()
            .flat_map(|c| c.mode_energies())
            .collect()
    }
}
