use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Grid;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(n), p.plan_fft_inverse(n))
    })
}

fn transform_axes(grid: &Grid, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
    let n = grid.n();
    let total = data.len();
    let lines = total / n;
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut line_buf = vec![Complex64::default(); total];
    for axis in 0..grid.dim() {
        let stride = n.pow((grid.dim() - 1 - axis) as u32);
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        // gather every line along `axis` into contiguous storage
        for l in 0..lines {
            let base = (l / stride) * stride * n + (l % stride);
            let dst = &mut line_buf[l * n..(l + 1) * n];
            for (j, d) in dst.iter_mut().enumerate() {
                *d = data[base + j * stride];
            }
        }
        fft.process_with_scratch(&mut line_buf, &mut scratch);
        for l in 0..lines {
            let base = (l / stride) * stride * n + (l % stride);
            let src = &line_buf[l * n..(l + 1) * n];
            for (j, s) in src.iter().enumerate() {
                data[base + j * stride] = *s;
            }
        }
    }
}

/// Synthesis `u(x) = Σ_k û_k e^{ik·x}` at the grid points.
pub(crate) fn to_physical(grid: &Grid, coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut data = coeffs.to_vec();
    let (_, inv) = plans(grid.n());
    transform_axes(grid, &mut data, &inv);
    data
}

/// Analysis `û_k = N^{-1} Σ_x u(x) e^{-ik·x}`, in place.
pub(crate) fn to_spectral(grid: &Grid, data: &mut [Complex64]) {
    let (fwd, _) = plans(grid.n());
    transform_axes(grid, data, &fwd);
    let scale = 1.0 / data.len() as f64;
    for c in data.iter_mut() {
        *c *= scale;
    }
}

pub(crate) fn real_to_spectral(grid: &Grid, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    to_spectral(grid, &mut data);
    data
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_synthesis_matches_direct_sum() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let mut c = vec![Complex64::default(); g.len()];
        let idx = g.index_of(&[2, -1]).unwrap();
        c[idx] = Complex64::new(0.5, -0.25);
        let phys = to_physical(&g, &c);
        let h = g.spacing();
        for i0 in 0..8 {
            for i1 in 0..8 {
                let (x, y) = (i0 as f64 * h, i1 as f64 * h);
                let expect = c[idx] * Complex64::from_polar(1.0, 2.0 * x - y);
                let got = phys[i0 * 8 + i1];
                assert!((got - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn round_trip_3d() {
        let g = Grid::new(3, 6, 1.0).unwrap();
        let vals: Vec<f64> = (0..g.len())
            .map(|i| (i as f64 * 0.37).sin() + 0.1 * PI)
            .collect();
        let spec = real_to_spectral(&g, &vals);
        let back = to_physical(&g, &spec);
        for (a, b) in vals.iter().zip(&back) {
            assert!((a - b.re).abs() < 1e-13 && b.im.abs() < 1e-13);
        }
    }
}
