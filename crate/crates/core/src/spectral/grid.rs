use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic box `[0, 2πL)^d` sampled with `n` points per axis.
///
/// Coefficients are stored in FFT order along every axis: storage index `i`
/// carries the integer mode `m = i` for `i < n/2` and `m = i - n` otherwise,
/// so the lattice is `{-n/2, …, n/2 - 1}^d` and the wavevector is `k = m / L`.
/// The flattened index is row-major with the last axis contiguous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!(
                "dimension {dim} not in {{2, 3}}"
            )));
        }
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "modes per axis must be an even integer >= 2, got {n}"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "box scale must be positive, got {length}"
            )));
        }
        Ok(Self { dim, n, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Box scale `L`; the period is `2πL`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of lattice points, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> f64 {
        (2.0 * PI * self.length).powi(self.dim as i32)
    }

    /// Physical grid spacing `2πL / n`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI * self.length / self.n as f64
    }

    /// Integer mode carried by storage position `i` along one axis.
    #[inline]
    pub fn mode_of(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    fn position_of(&self, m: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if m < -half || m >= half {
            return None;
        }
        Some(if m >= 0 {
            m as usize
        } else {
            (m + self.n as i64) as usize
        })
    }

    /// Integer multi-index of a flattened storage index (unused axes are 0).
    pub fn lattice(&self, index: usize) -> [i64; 3] {
        let mut m = [0i64; 3];
        let mut rest = index;
        for axis in (0..self.dim).rev() {
            m[axis] = self.mode_of(rest % self.n);
            rest /= self.n;
        }
        m
    }

    /// Flattened storage index of an integer multi-index, if it lies on the lattice.
    pub fn index_of(&self, m: &[i64]) -> Option<usize> {
        if m.len() != self.dim {
            return None;
        }
        let mut index = 0;
        for &mj in m {
            index = index * self.n + self.position_of(mj)?;
        }
        Some(index)
    }

    /// Storage index of `-m`; the Nyquist plane maps onto itself.
    pub fn conjugate_index(&self, index: usize) -> usize {
        let mut out = 0;
        let mut stride = 1;
        let mut rest = index;
        for _ in 0..self.dim {
            let i = rest % self.n;
            rest /= self.n;
            let j = (self.n - i) % self.n;
            out += j * stride;
            stride *= self.n;
        }
        out
    }

    pub fn wavevector(&self, index: usize) -> [f64; 3] {
        let m = self.lattice(index);
        [
            m[0] as f64 / self.length,
            m[1] as f64 / self.length,
            m[2] as f64 / self.length,
        ]
    }

    /// `true` when the mode survives the 2/3 rule (`3|m_j| < n` on every axis).
    pub fn is_resolved(&self, index: usize) -> bool {
        let m = self.lattice(index);
        m[..self.dim]
            .iter()
            .all(|mj| 3 * mj.unsigned_abs() < self.n as u64)
    }

    /// Visits every storage index with its wavevector, without per-index division.
    pub fn for_each_mode(&self, mut visit: impl FnMut(usize, [f64; 3])) {
        let ks: Vec<f64> = (0..self.n)
            .map(|i| self.mode_of(i) as f64 / self.length)
            .collect();
        let n = self.n;
        match self.dim {
            2 => {
                for i0 in 0..n {
                    for i1 in 0..n {
                        visit(i0 * n + i1, [ks[i0], ks[i1], 0.0]);
                    }
                }
            }
            _ => {
                for i0 in 0..n {
                    for i1 in 0..n {
                        for i2 in 0..n {
                            visit((i0 * n + i1) * n + i2, [ks[i0], ks[i1], ks[i2]]);
                        }
                    }
                }
            }
        }
    }

    /// Precomputed wavevectors, `|k|²` and dealiasing mask for hot loops.
    pub fn tables(&self) -> ModeTables {
        let len = self.len();
        let mut k = Vec::with_capacity(len);
        let mut k2 = Vec::with_capacity(len);
        let mut resolved = Vec::with_capacity(len);
        let cut = self.n as f64 / 3.0;
        self.for_each_mode(|_, kv| {
            k.push(kv);
            k2.push(kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2]);
            resolved.push(kv.iter().all(|kj| (kj * self.length).abs() < cut));
        });
        ModeTables { k, k2, resolved }
    }
}

#[derive(Debug, Clone)]
pub struct ModeTables {
    pub k: Vec<[f64; 3]>,
    pub k2: Vec<f64>,
    pub resolved: Vec<bool>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(Grid::new(1, 8, 1.0).is_err());
        assert!(Grid::new(2, 7, 1.0).is_err());
        assert!(Grid::new(3, 8, 0.0).is_err());
        assert!(Grid::new(2, 8, f64::NAN).is_err());
    }

    #[test]
    fn zero_mode_appears_once() {
        for g in [Grid::new(2, 8, 1.0).unwrap(), Grid::new(3, 6, 2.0).unwrap()] {
            let mut zeros = 0;
            g.for_each_mode(|_, k| {
                if k == [0.0; 3] {
                    zeros += 1;
                }
            });
            assert_eq!(zeros, 1);
        }
    }

    #[test]
    fn lattice_and_index_agree() {
        let g = Grid::new(3, 6, 1.5).unwrap();
        for idx in 0..g.len() {
            let m = g.lattice(idx);
            assert_eq!(g.index_of(&m[..3]), Some(idx));
            let neg = g.conjugate_index(idx);
            let mn = g.lattice(neg);
            for a in 0..3 {
                if m[a] != -3 {
                    assert_eq!(mn[a], -m[a]);
                } else {
                    assert_eq!(mn[a], -3);
                }
            }
        }
    }

    #[test]
    fn wavenumbers_scale_with_box() {
        let g = Grid::new(2, 8, 2.0).unwrap();
        let idx = g.index_of(&[1, -4]).unwrap();
        assert_eq!(g.wavevector(idx), [0.5, -2.0, 0.0]);
        assert!(!g.is_resolved(idx));
        let mut seen = Vec::new();
        g.for_each_mode(|i, k| {
            assert_eq!(k, g.wavevector(i));
            seen.push(i);
        });
        assert_eq!(seen, (0..g.len()).collect::<Vec<_>>());
    }

    #[test]
    fn two_thirds_mask() {
        let g = Grid::new(2, 12, 1.0).unwrap();
        // n = 12: keep |m| <= 3 (3*4 = 12 is not < 12)
        assert!(g.is_resolved(g.index_of(&[3, -3]).unwrap()));
        assert!(!g.is_resolved(g.index_of(&[4, 0]).unwrap()));
        let t = g.tables();
        for idx in 0..g.len() {
            assert_eq!(t.resolved[idx], g.is_resolved(idx));
        }
    }
}
