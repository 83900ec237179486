//! Dealiased pseudo-spectral products.

use num_complex::Complex64;

use super::{fft, Grid, SpectralField, VectorField};
use crate::error::{Error, Result};

/// Fields that can be transported by a velocity, `w ↦ (u·∇)w`.
pub trait Advected: Sized {
    fn advected_by(&self, u: &VectorField) -> Result<Self>;
}

/// Dealiased evaluation of `(u·∇)w`: both factors are truncated by the 2/3
/// rule, multiplied at the grid points, transformed back and truncated again.
pub fn advect<W: Advected>(u: &VectorField, w: &W) -> Result<W> {
    w.advected_by(u)
}

fn physical_velocity(u: &VectorField) -> Result<Vec<Vec<f64>>> {
    if u.len() != u.grid().dim() {
        return Err(Error::GridMismatch);
    }
    Ok(u.components()
        .iter()
        .map(|c| c.dealiased().to_physical())
        .collect())
}

fn advect_with(grid: &Grid, u_phys: &[Vec<f64>], w: &SpectralField) -> SpectralField {
    let w = w.dealiased();
    let mut acc = vec![0.0; grid.len()];
    for (j, uj) in u_phys.iter().enumerate() {
        let dw = w.derivative(j).to_physical();
        for ((a, &x), &y) in acc.iter_mut().zip(uj).zip(&dw) {
            *a += x * y;
        }
    }
    SpectralField::new(*grid, fft::real_to_spectral(grid, &acc))
        .expect("grid length")
        .dealiased()
}

impl Advected for SpectralField {
    fn advected_by(&self, u: &VectorField) -> Result<Self> {
        if u.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        let u_phys = physical_velocity(u)?;
        Ok(advect_with(self.grid(), &u_phys, self))
    }
}

impl Advected for VectorField {
    fn advected_by(&self, u: &VectorField) -> Result<Self> {
        if u.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        let grid = *self.grid();
        let u_phys = physical_velocity(u)?;
        let comps = self
            .components()
            .iter()
            .map(|c| advect_with(&grid, &u_phys, c))
            .collect();
        Ok(VectorField::from_parts(comps, false))
    }
}

/// Dealiased product `P_N(f g)` of two real fields.
pub fn dealiased_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *f.grid();
    let a = f.dealiased().to_physical();
    let b = g.dealiased().to_physical();
    let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    Ok(SpectralField::new(grid, fft::real_to_spectral(&grid, &prod))?.dealiased())
}

fn max_active_mode(f: &SpectralField) -> i64 {
    let grid = f.grid();
    f.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != Complex64::default())
        .map(|(i, _)| grid.lattice(i).iter().map(|m| m.abs()).max().unwrap_or(0))
        .max()
        .unwrap_or(0)
}

/// Exact product of two real fields, returned on a grid wide enough that no
/// product mode aliases.
pub fn exact_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid();
    let reach = max_active_mode(f) + max_active_mode(g);
    let n = (2 * (reach as usize + 1)).max(grid.n());
    let wide = Grid::new(grid.dim(), n, grid.length())?;
    let fw = f.resampled(wide);
    let gw = g.resampled(wide);
    let a = fw.to_physical();
    let b = gw.to_physical();
    let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    SpectralField::new(wide, fft::real_to_spectral(&wide, &prod))
}

impl SpectralField {
    /// Copies the coefficients onto another resolution of the same box,
    /// dropping modes the target lattice does not carry.
    pub fn resampled(&self, target: Grid) -> SpectralField {
        assert_eq!(target.dim(), self.grid().dim());
        assert_eq!(target.length(), self.grid().length());
        let mut out = SpectralField::zeros(target);
        let d = target.dim();
        for (i, c) in self.coeffs().iter().enumerate() {
            if *c == Complex64::default() {
                continue;
            }
            let m = self.grid().lattice(i);
            if let Some(j) = target.index_of(&m[..d]) {
                out.coeffs_mut()[j] = *c;
            }
        }
        out
    }
}

impl VectorField {
    pub fn resampled(&self, target: Grid) -> VectorField {
        VectorField::from_parts(
            self.components()
                .iter()
                .map(|c| c.resampled(target))
                .collect(),
            self.is_divergence_free(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_real_field, random_vector_field, SpectrumShape};

    fn grid() -> Grid {
        Grid::new(2, 32, 1.0).unwrap()
    }

    #[test]
    fn constant_velocity_differentiates() {
        let g = grid();
        let u = VectorField::new(vec![
            SpectralField::constant(g, 1.0),
            SpectralField::zeros(g),
        ])
        .unwrap();
        let w = SpectralField::single_mode(g, &[3, 2], Complex64::new(1.0, 0.0), true).unwrap();
        let a = advect(&u, &w).unwrap();
        let expect = w.derivative(0);
        assert!((&a - &expect).l2_norm() < 1e-12);
    }

    #[test]
    fn constant_field_is_not_advected() {
        let g = grid();
        let u = random_vector_field(g, 3, SpectrumShape::smooth(), true);
        let w = SpectralField::constant(g, 2.5);
        assert!(advect(&u, &w).unwrap().l2_norm() < 1e-13);
    }

    #[test]
    fn transport_is_skew() {
        let g = grid();
        let u = random_vector_field(g, 5, SpectrumShape::smooth(), true);
        let w = random_real_field(g, 6, SpectrumShape::smooth());
        let a = advect(&u, &w).unwrap();
        let pairing = a.inner(&w.dealiased()).unwrap().re;
        assert!(pairing.abs() < 1e-10 * a.l2_norm() * w.l2_norm());
    }

    #[test]
    fn exact_product_matches_trig_identity() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let one = Complex64::new(0.5, 0.0);
        // cos x · cos 3x = (cos 2x + cos 4x)/2; mode 4 lies outside n = 8
        let f = SpectralField::single_mode(g, &[1, 0], one, true).unwrap();
        let h = SpectralField::single_mode(g, &[3, 0], one, true).unwrap();
        let p = exact_product(&f, &h).unwrap();
        assert!(p.grid().n() >= 10);
        assert!((p.coeff(&[4, 0]).unwrap() - Complex64::new(0.25, 0.0)).norm() < 1e-14);
        assert!((p.coeff(&[2, 0]).unwrap() - Complex64::new(0.25, 0.0)).norm() < 1e-14);
        assert!((p.coeff(&[0, 0]).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn resampling_preserves_norms() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        let f = random_real_field(g, 9, SpectrumShape::smooth());
        let up = f.resampled(Grid::new(2, 64, 1.0).unwrap());
        assert!((up.sobolev_norm(1.5).unwrap() - f.sobolev_norm(1.5).unwrap()).abs() < 1e-12);
    }
}
