//! Seeded random band-limited fields.
//!
//! Each lattice mode draws its coefficient from a generator seeded by the
//! run seed and the integer mode itself, so the same seed yields the same
//! field on every resolution that carries the band.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::spectral::{Grid, SpectralField, VectorField};

/// Amplitude envelope `(1 + |k|²)^{-slope/2}` on `0 < |k| <= k_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumShape {
    pub k_max: f64,
    pub slope: f64,
    /// Whether the zero mode is drawn too.
    pub include_mean: bool,
}

impl SpectrumShape {
    pub fn smooth() -> Self {
        Self {
            k_max: 6.0,
            slope: 2.0,
            include_mean: false,
        }
    }

    pub fn band(k_max: f64) -> Self {
        Self {
            k_max,
            ..Self::smooth()
        }
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn mode_rng(seed: u64, stream: u64, m: [i64; 3]) -> ChaCha8Rng {
    let mut h = splitmix(seed ^ 0x5eed);
    h = splitmix(h ^ stream);
    for mj in m {
        h = splitmix(h ^ mj as u64);
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Canonical member of the pair `{m, -m}`: first nonzero entry positive.
fn is_canonical(m: [i64; 3]) -> bool {
    m.iter().find(|&&x| x != 0).is_none_or(|&x| x > 0)
}

fn draw(grid: Grid, seed: u64, stream: u64, shape: SpectrumShape) -> SpectralField {
    let mut f = SpectralField::zeros(grid);
    for i in 0..grid.len() {
        if !grid.is_resolved(i) {
            continue;
        }
        let m = grid.lattice(i);
        if !is_canonical(m) {
            continue;
        }
        let k = grid.wavevector(i);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 && !shape.include_mean {
            continue;
        }
        if k2.sqrt() > shape.k_max {
            continue;
        }
        let amp = (1.0 + k2).powf(-0.5 * shape.slope);
        let mut rng = mode_rng(seed, stream, m);
        let re: f64 = rng.random_range(-1.0..1.0);
        let im: f64 = rng.random_range(-1.0..1.0);
        let c = if k2 == 0.0 {
            Complex64::new(amp * re, 0.0)
        } else {
            Complex64::new(amp * re, amp * im)
        };
        f.coeffs_mut()[i] = c;
        let j = grid.conjugate_index(i);
        if j != i {
            f.coeffs_mut()[j] = c.conj();
        }
    }
    f
}

/// Real-valued random field with the given envelope.
pub fn random_real_field(grid: Grid, seed: u64, shape: SpectrumShape) -> SpectralField {
    draw(grid, seed, 0, shape)
}

/// Real-valued random vector field; Leray-projected when `divergence_free`.
pub fn random_vector_field(
    grid: Grid,
    seed: u64,
    shape: SpectrumShape,
    divergence_free: bool,
) -> VectorField {
    let comps = (0..grid.dim())
        .map(|j| draw(grid, seed, 1 + j as u64, shape))
        .collect();
    let v = VectorField::new(comps).expect("components share a grid");
    if divergence_free {
        v.leray_project()
    } else {
        v
    }
}
