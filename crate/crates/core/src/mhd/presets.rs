//! Named initial conditions. Modes are lattice modes, so on a torus of
//! length `L` a term `sin x` reads `sin(x/L)`.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::random::{random_vector_field, SpectrumShape};
use crate::spectral::{Grid, SpectralField, VectorField};

pub const PRESETS: [&str; 5] = [
    "orszag-tang-2d",
    "taylor-green-2d",
    "abc-3d",
    "random",
    "zero",
];

/// `Σ a cos(m·x) + b sin(m·x)` over `(m, a, b)`.
fn trig(grid: Grid, terms: &[(&[i64], f64, f64)]) -> Result<SpectralField> {
    let mut out = SpectralField::zeros(grid);
    for &(m, a, b) in terms {
        let mode = SpectralField::single_mode(grid, m, Complex64::new(0.5 * a, -0.5 * b), true)?;
        for (o, c) in out.coeffs_mut().iter_mut().zip(mode.coeffs()) {
            *o += c;
        }
    }
    Ok(out)
}

fn vector(parts: Vec<SpectralField>) -> Result<VectorField> {
    VectorField::new(parts)?.assert_divergence_free()
}

fn need_dim(name: &str, grid: &Grid, dim: usize) -> Result<()> {
    if grid.dim() != dim {
        return Err(invalid(
            "preset",
            format!("{name} needs d = {dim}, grid has d = {}", grid.dim()),
        ));
    }
    Ok(())
}

/// Velocity and magnetic field of a named preset.
///
/// * `orszag-tang-2d`: `u = (-sin y, sin x)`, `B = (-sin y, sin 2x)`
/// * `taylor-green-2d`: `u = (cos x sin y, -sin x cos y)`, `B = 0`
/// * `abc-3d`: `u = (sin z + cos y, sin x + cos z, sin y + cos x)`, `B = (sin 2z, sin 2x, sin 2y)`
/// * `random`: seeded divergence-free fields with energy in `|k| <= 4`
/// * `zero`
pub fn preset(name: &str, grid: Grid, seed: u64) -> Result<(VectorField, VectorField)> {
    match name {
        "orszag-tang-2d" => {
            need_dim(name, &grid, 2)?;
            let u = vector(vec![
                trig(grid, &[(&[0, 1], 0.0, -1.0)])?,
                trig(grid, &[(&[1, 0], 0.0, 1.0)])?,
            ])?;
            let b = vector(vec![
                trig(grid, &[(&[0, 1], 0.0, -1.0)])?,
                trig(grid, &[(&[2, 0], 0.0, 1.0)])?,
            ])?;
            Ok((u, b))
        }
        "taylor-green-2d" => {
            need_dim(name, &grid, 2)?;
            // cos x sin y = (sin(x+y) - sin(x-y))/2, sin x cos y = (sin(x+y) + sin(x-y))/2
            let u = vector(vec![
                trig(grid, &[(&[1, 1], 0.0, 0.5), (&[1, -1], 0.0, -0.5)])?,
                trig(grid, &[(&[1, 1], 0.0, -0.5), (&[1, -1], 0.0, -0.5)])?,
            ])?;
            Ok((u, VectorField::zeros(grid)))
        }
        "abc-3d" => {
            need_dim(name, &grid, 3)?;
            let u = vector(vec![
                trig(grid, &[(&[0, 0, 1], 0.0, 1.0), (&[0, 1, 0], 1.0, 0.0)])?,
                trig(grid, &[(&[1, 0, 0], 0.0, 1.0), (&[0, 0, 1], 1.0, 0.0)])?,
                trig(grid, &[(&[0, 1, 0], 0.0, 1.0), (&[1, 0, 0], 1.0, 0.0)])?,
            ])?;
            let b = vector(vec![
                trig(grid, &[(&[0, 0, 2], 0.0, 1.0)])?,
                trig(grid, &[(&[2, 0, 0], 0.0, 1.0)])?,
                trig(grid, &[(&[0, 2, 0], 0.0, 1.0)])?,
            ])?;
            Ok((u, b))
        }
        "random" => {
            let shape = SpectrumShape::band(4.0);
            let u = random_vector_field(grid, seed, shape, true).dealiased();
            let b =
                random_vector_field(grid, seed.wrapping_add(0x9e37_79b9), shape, true).dealiased();
            Ok((u, b))
        }
        "zero" => Ok((VectorField::zeros(grid), VectorField::zeros(grid))),
        other => Err(invalid(
            "preset",
            format!("unknown preset `{other}`; known: {}", PRESETS.join(", ")),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_green_matches_physical_samples() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let (u, b) = preset("taylor-green-2d", g, 0).unwrap();
        assert_eq!(b.l2_norm(), 0.0);
        let u1 = u.component(0).to_physical();
        let u2 = u.component(1).to_physical();
        let h = g.spacing();
        for i in 0..16 {
            for j in 0..16 {
                let (x, y) = (i as f64 * h, j as f64 * h);
                // row-major, first axis slowest
                let idx = i * 16 + j;
                assert!((u1[idx] - x.cos() * y.sin()).abs() < 1e-14);
                assert!((u2[idx] + x.sin() * y.cos()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn presets_are_divergence_free_and_real() {
        let g2 = Grid::new(2, 32, 1.0).unwrap();
        let g3 = Grid::new(3, 16, 1.0).unwrap();
        for (name, g) in [
            ("orszag-tang-2d", g2),
            ("taylor-green-2d", g2),
            ("abc-3d", g3),
            ("random", g2),
            ("random", g3),
            ("zero", g3),
        ] {
            let (u, b) = preset(name, g, 11).unwrap();
            for v in [&u, &b] {
                assert!(v.divergence_residual() <= 1e-14, "{name}");
                for c in v.components() {
                    assert_eq!(c.conjugate_symmetry_defect(), 0.0, "{name}");
                }
            }
        }
    }

    #[test]
    fn wrong_dimension_and_unknown_name_fail() {
        let g3 = Grid::new(3, 16, 1.0).unwrap();
        assert!(preset("orszag-tang-2d", g3, 0).is_err());
        assert!(preset("vortex", g3, 0).is_err());
    }
}
