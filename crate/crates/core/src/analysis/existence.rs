//! Existence time from the two bootstrap conditions.

use crate::error::{Error, Result};
use crate::mhd::MhdConstants;

/// Condition 1 reads `(1 - g(T))^{-ε} < 2`, i.e. `g(T) < 1 - 2^{-1/ε}`.
pub const TSTAR1_LIMIT: f64 = 2.0;

/// `g(T) = c₁ T (M₁² + T M₂)^{1/ε} / ε`
fn comparison_growth(c: &MhdConstants, t: f64) -> f64 {
    c.c1.value * t * (c.m1 * c.m1 + t * c.m2).powf(1.0 / c.eps) / c.eps
}

/// `(1 - g(T))^{-ε}`, or `+∞` once the bracket is no longer positive.
pub fn tstar1_lhs(c: &MhdConstants, t: f64) -> f64 {
    let bracket = 1.0 - comparison_growth(c, t);
    if bracket > 0.0 {
        bracket.powf(-c.eps)
    } else {
        f64::INFINITY
    }
}

/// `C_ε T^{ε/2} M₁ + C_ε T^{ε/(s+ε)} (2^{2(s+ε)/s} T b₀^{2(s+ε)/s}
///  + c₅ M₀^{ε/s} [c₁ T (2(M₁² + T M₂))^{(1+ε)/ε} + T M₂])^{s/(s+ε)}`
pub fn tstar2_lhs(c: &MhdConstants, t: f64) -> f64 {
    let (s, e) = (c.s, c.eps);
    let r = (s + e) / s;
    let y = 2.0 * (c.m1 * c.m1 + t * c.m2);
    let u_int = c.c1.value * t * y.powf((1.0 + e) / e) + t * c.m2;
    let inner =
        2f64.powf(2.0 * r) * t * c.b0_hs.powf(2.0 * r) + c.c5.value * c.m0.powf(e / s) * u_int;
    c.c_eps.value * (t.powf(0.5 * e) * c.m1 + t.powf(e / (s + e)) * inner.powf(1.0 / r))
}

/// Largest `T` in `[lo, 1]` with `holds(T)`, assuming `holds(lo)` and
/// monotonicity, to machine precision.
fn bisect(holds: impl Fn(f64) -> bool) -> f64 {
    if holds(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return lo;
        }
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// `T* = min(T₁, T₂)`, capped at 1, where `T₁` and `T₂` are the thresholds
/// of the two bootstrap conditions found by bisection. A vanishing `c₁`
/// (resp. `c₄`) makes the first (resp. second) condition hold for all `T`.
pub fn existence_time(c: &MhdConstants) -> Result<f64> {
    c.validate()?;
    let limit1 = 1.0 - 2f64.powf(-1.0 / c.eps);
    let t1 = if c.c1.value == 0.0 {
        1.0
    } else {
        bisect(|t| comparison_growth(c, t) < limit1)
    };
    let t2 = if c.c4.value == 0.0 {
        1.0
    } else {
        let limit2 = 4f64.ln() / (2.0 * c.c4.value);
        bisect(|t| tstar2_lhs(c, t) < limit2)
    };
    let tstar = t1.min(t2);
    if tstar > 0.0 {
        Ok(tstar)
    } else {
        Err(Error::NoExistenceTime(format!(
            "thresholds T1 = {t1:e}, T2 = {t2:e}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mhd::Tagged;

    fn constants(c1: f64, m2_zero: bool, c4: f64) -> MhdConstants {
        let a = Tagged::assumed;
        let (m0, c2, c3, b0) = if m2_zero {
            (0.0, 0.0, 0.0, 0.0)
        } else {
            (1.0, 0.5, 0.2, 0.8)
        };
        MhdConstants::new(
            2.0,
            0.5,
            m0,
            1.3,
            b0,
            a(c1),
            a(c2),
            a(c3),
            a(c4),
            a(0.7),
            a(1.1),
        )
        .unwrap()
    }

    #[test]
    fn first_threshold_matches_algebraic_solution() {
        let c = constants(0.9, true, 0.0);
        assert_eq!(c.m2, 0.0);
        let e = c.eps;
        let exact = e * (1.0 - 2f64.powf(-1.0 / e)) / (c.c1.value * c.m1.powf(2.0 / e));
        let t = existence_time(&c).unwrap();
        assert!((t - exact).abs() <= 1e-15, "{t} vs {exact}");
    }

    #[test]
    fn thresholds_bracket_the_conditions() {
        let c = constants(0.4, false, 2.0);
        let t = existence_time(&c).unwrap();
        assert!(t > 0.0 && t < 1.0);
        let both = |t: f64| tstar1_lhs(&c, t) < TSTAR1_LIMIT && tstar2_lhs(&c, t) < 4f64.ln() / 4.0;
        assert!(both(t * (1.0 - 1e-9)));
        assert!(!both(t * (1.0 + 1e-6)));
    }

    #[test]
    fn limits_at_zero() {
        let c = constants(0.4, false, 2.0);
        assert_eq!(tstar1_lhs(&c, 0.0), 1.0);
        assert_eq!(tstar2_lhs(&c, 0.0), 0.0);
    }

    #[test]
    fn vanishing_coefficients_give_full_interval() {
        let c = constants(0.0, false, 0.0);
        assert_eq!(existence_time(&c).unwrap(), 1.0);
    }
}
