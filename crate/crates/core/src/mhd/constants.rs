//! Data and inequality constants of the local existence argument.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Where a constant's value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Closed-form expression.
    Formula,
    /// Ensemble or time-series maximum (a lower bound for the true constant).
    Fitted,
    /// Value produced by the proof of the estimate.
    Proof,
    /// Supplied by the user.
    Assumed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tagged {
    pub value: f64,
    pub provenance: Provenance,
}

impl Tagged {
    pub fn new(value: f64, provenance: Provenance) -> Self {
        Self { value, provenance }
    }

    pub fn fitted(value: f64) -> Self {
        Self::new(value, Provenance::Fitted)
    }

    pub fn assumed(value: f64) -> Self {
        Self::new(value, Provenance::Assumed)
    }
}

/// Constants feeding the existence-time conditions.
///
/// * `m0 = ‖u₀‖² + ‖B₀‖²`, `m1 = ‖u₀‖_{H^{s-1+ε}}`, `b0_hs = ‖B₀‖_{H^s}`
/// * `m2 = 2^{2(1+ε)} c2 b0_hs^{2(1+ε)} + 16 c3 b0_hs⁴ + 2 m0`
/// * `c1, c2, c3`: coefficients of the `H^{s-1+ε}` energy inequality
///   (`c3` also bounds `d‖u‖²/dt + ‖∇u‖² ≤ c3 ‖B‖⁴_{H^s}`)
/// * `c4`: `½ d‖B‖²_{H^s}/dt ≤ c4 ‖∇u‖_{H^s} ‖B‖²_{H^s}`
/// * `c5`: forcing bound coefficient, `c_eps` and `c_r`: Stokes constants
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MhdConstants {
    pub s: f64,
    pub eps: f64,
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
    pub b0_hs: f64,
    pub c1: Tagged,
    pub c2: Tagged,
    pub c3: Tagged,
    pub c4: Tagged,
    pub c5: Tagged,
    pub c_eps: Tagged,
    pub c_r: Option<Tagged>,
}

impl MhdConstants {
    /// Builds the bundle and fills `m2` from its formula.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        s: f64,
        eps: f64,
        m0: f64,
        m1: f64,
        b0_hs: f64,
        c1: Tagged,
        c2: Tagged,
        c3: Tagged,
        c4: Tagged,
        c5: Tagged,
        c_eps: Tagged,
    ) -> Result<Self> {
        let mut out = Self {
            s,
            eps,
            m0,
            m1,
            m2: 0.0,
            b0_hs,
            c1,
            c2,
            c3,
            c4,
            c5,
            c_eps,
            c_r: None,
        };
        out.m2 = out.m2_formula();
        out.validate()?;
        Ok(out)
    }

    pub fn m2_formula(&self) -> f64 {
        let e = self.eps;
        2f64.powf(2.0 * (1.0 + e)) * self.c2.value * self.b0_hs.powf(2.0 * (1.0 + e))
            + 16.0 * self.c3.value * self.b0_hs.powi(4)
            + 2.0 * self.m0
    }

    /// Stored `m2` agrees with its formula to `1e-12` relative.
    pub fn m2_consistent(&self) -> bool {
        let f = self.m2_formula();
        (self.m2 - f).abs() <= 1e-12 * f.abs().max(f64::MIN_POSITIVE)
    }

    /// `p = (1+ε)/ε`
    pub fn exponent(&self) -> f64 {
        (1.0 + self.eps) / self.eps
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(invalid(
                "eps",
                format!("need 0 < eps < 1, got {}", self.eps),
            ));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(invalid("s", format!("must be positive, got {}", self.s)));
        }
        let named = [
            ("m0", self.m0),
            ("m1", self.m1),
            ("m2", self.m2),
            ("b0_hs", self.b0_hs),
            ("c1", self.c1.value),
            ("c2", self.c2.value),
            ("c3", self.c3.value),
            ("c4", self.c4.value),
            ("c5", self.c5.value),
            ("c_eps", self.c_eps.value),
        ];
        for (name, v) in named {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(
                    "constants",
                    format!("{name} must be finite and >= 0, got {v}"),
                ));
            }
        }
        if !self.m2_consistent() {
            return Err(invalid(
                "m2",
                format!(
                    "stored {} differs from formula {}",
                    self.m2,
                    self.m2_formula()
                ),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MhdConstants {
        let a = Tagged::assumed;
        MhdConstants::new(
            2.0,
            0.5,
            3.0,
            1.0,
            0.5,
            a(1.0),
            a(2.0),
            a(3.0),
            a(1.0),
            a(1.0),
            a(1.0),
        )
        .unwrap()
    }

    #[test]
    fn m2_follows_its_formula() {
        let c = sample();
        // 2^3 · 2 · 0.5^3 + 16 · 3 · 0.5^4 + 6
        assert!((c.m2 - (2.0 + 3.0 + 6.0)).abs() < 1e-14);
        assert!(c.m2_consistent());
        let mut bad = c.clone();
        bad.m2 *= 1.01;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn negative_constants_are_rejected() {
        let a = Tagged::assumed;
        assert!(MhdConstants::new(
            2.0,
            0.5,
            1.0,
            1.0,
            1.0,
            a(-1.0),
            a(0.0),
            a(0.0),
            a(0.0),
            a(0.0),
            a(0.0)
        )
        .is_err());
        assert!(MhdConstants::new(
            2.0,
            1.0,
            1.0,
            1.0,
            1.0,
            a(0.0),
            a(0.0),
            a(0.0),
            a(0.0),
            a(0.0),
            a(0.0)
        )
        .is_err());
    }

    #[test]
    fn serializes_with_provenance() {
        let json = serde_json::to_string(&sample()).unwrap();
        assert!(json.contains("\"provenance\":\"assumed\""));
        let back: MhdConstants = serde_json::from_str(&json).unwrap();
        assert_eq!(back, sample());
    }
}
