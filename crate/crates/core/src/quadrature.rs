//! One-dimensional quadrature: Gauss–Legendre rules, graded composite rules
//! for time integrals with an initial layer, and globally adaptive
//! Gauss–Kronrod (7, 15) integration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// A fixed composite rule: nodes and weights on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    pub fn empty() -> Self {
        Self {
            nodes: Vec::new(),
            weights: Vec::new(),
        }
    }

    /// Gauss–Legendre with `order` points on each panel `[b_i, b_{i+1}]`.
    pub fn on_panels(breaks: &[f64], order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let mut rule = Self::empty();
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b <= a {
                continue;
            }
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (xi, wi) in x.iter().zip(&w) {
                rule.nodes.push(mid + half * xi);
                rule.weights.push(half * wi);
            }
        }
        rule
    }

    /// Panels on `[a, b]` shrinking geometrically (ratio 2) toward `a`,
    /// the smallest having width at most `finest`.
    pub fn graded(a: f64, b: f64, finest: f64, order: usize) -> Self {
        Self::on_panels(&graded_breaks(a, b, finest), order)
    }

    pub fn append(&mut self, other: CompositeRule) {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.weights.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn integrate_fn(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, w)| w * f(t))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Breakpoints `a, a + h 2^{-L}, …, a + h/2, b` with `h = b - a`.
pub fn graded_breaks(a: f64, b: f64, finest: f64) -> Vec<f64> {
    let h = b - a;
    if h <= 0.0 {
        return vec![a];
    }
    let mut widths = vec![h];
    while *widths.last().unwrap() > finest && widths.len() < 1000 {
        let w = widths.last().unwrap() / 2.0;
        widths.push(w);
    }
    // panel boundaries a, a + w_L, a + w_{L-1}, ..., b
    let mut breaks = vec![a];
    for w in widths.iter().rev() {
        let p = a + w;
        if p > *breaks.last().unwrap() {
            breaks.push(p);
        }
    }
    *breaks.last_mut().unwrap() = b;
    breaks
}

// Gauss–Kronrod (7, 15) abscissae and weights.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`,
/// bisecting the interval with the largest error estimate.
pub fn integrate_adaptive(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    opts: AdaptiveOptions,
) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value, error });
    let (mut total, mut err) = (value, error);
    let mut count = 1;
    loop {
        if !total.is_finite() {
            return Err(Error::Quadrature(
                "integrand produced a non-finite value".into(),
            ));
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            break;
        }
        if count >= opts.max_intervals {
            return Err(Error::Quadrature(format!(
                "no convergence after {count} intervals: estimate {total:e}, error {err:e}"
            )));
        }
        let worst = heap.pop().expect("heap non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in floating point
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        count += 1;
    }
    // re-sum to shed accumulated cancellation in the running totals
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Ok(Estimate { value, error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for p in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = if p % 2 == 1 {
                    0.0
                } else {
                    2.0 / (p as f64 + 1.0)
                };
                assert!((q - exact).abs() < 1e-13, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn graded_rule_resolves_initial_layer() {
        let lambda = 1e4;
        let rule = CompositeRule::graded(0.0, 1.0, 1e-6, 10);
        let q = rule.integrate_fn(|t| (-lambda * t).exp());
        let exact = (1.0 - (-lambda).exp()) / lambda;
        assert!((q - exact).abs() < 1e-13 * exact);
    }

    #[test]
    fn graded_breaks_are_increasing() {
        let b = graded_breaks(0.5, 1.5, 1e-3);
        assert_eq!(b[0], 0.5);
        assert_eq!(*b.last().unwrap(), 1.5);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        assert!(b[1] - b[0] <= 1e-3);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let est = integrate_adaptive(
            |x| 1.0 / (1e-4 + x * x),
            -1.0,
            1.0,
            AdaptiveOptions::default(),
        )
        .unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((est.value - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn adaptive_reports_failure() {
        let opts = AdaptiveOptions {
            max_intervals: 3,
            ..Default::default()
        };
        assert!(integrate_adaptive(|x| x.abs().sqrt().recip(), -1.0, 1.0, opts).is_err());
    }
}
