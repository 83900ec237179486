//! Per-step norm records of a run and their CSV form.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One row of the norm series. Column order is the CSV column order.
///
/// `s` and `ε` are those of the run; `r = (s+ε)/s`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NormRecord {
    pub t: f64,
    pub u_l2: f64,
    pub b_l2: f64,
    pub grad_u_l2: f64,
    /// `‖u‖_{H^{s-1+ε}}`
    pub u_h_sm1pe: f64,
    /// `‖u‖_{H^{s+ε}}`
    pub u_h_spe: f64,
    /// `‖u‖_{H^{s+1}}`
    pub u_h_sp1: f64,
    /// `‖B‖_{H^s}`
    pub b_h_s: f64,
    /// `‖∇u‖_{H^s}`
    pub grad_u_h_s: f64,
    /// `∫₀^t ‖∇u‖²`
    pub int_grad_u_sq: f64,
    /// `∫₀^t ‖u‖²_{H^{s+ε}}`
    pub int_u_h_spe_sq: f64,
    /// `∫₀^t ‖u‖_{H^{s+1}}`
    pub int_u_h_sp1: f64,
    /// `∫₀^t ‖∇u‖_{H^s}`
    pub int_grad_u_h_s: f64,
    /// `‖f‖_{H^{s-1}}`, `f = -∇·(u⊗u) + ∇·(B⊗B)`
    pub f_h_sm1: f64,
    /// `∫₀^t ‖B‖^{2r}_{H^s}`
    pub int_b_h_s_pow: f64,
    /// `∫₀^t ‖f‖^r_{H^{s-1}}`
    pub int_f_h_sm1_pow: f64,
    pub div_u: f64,
    pub div_b: f64,
    /// size of the step that produced this row (0 for the first)
    pub dt: f64,
}

impl NormRecord {
    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.u_l2,
            self.b_l2,
            self.grad_u_l2,
            self.u_h_sm1pe,
            self.u_h_spe,
            self.u_h_sp1,
            self.b_h_s,
            self.grad_u_h_s,
            self.int_grad_u_sq,
            self.int_u_h_spe_sq,
            self.int_u_h_sp1,
            self.int_grad_u_h_s,
            self.f_h_sm1,
            self.int_b_h_s_pow,
            self.int_f_h_sm1_pow,
            self.div_u,
            self.div_b,
            self.dt,
        ]
        .iter()
        .all(|v| v.is_finite())
    }

    /// `‖u‖² + ‖B‖² + 2∫‖∇u‖²`
    pub fn energy_budget(&self) -> f64 {
        self.u_l2 * self.u_l2 + self.b_l2 * self.b_l2 + 2.0 * self.int_grad_u_sq
    }
}

/// Norm records of a run at every accepted step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSeries {
    pub s: f64,
    pub eps: f64,
    pub rows: Vec<NormRecord>,
}

impl NormSeries {
    pub fn new(s: f64, eps: f64) -> Self {
        Self {
            s,
            eps,
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn first(&self) -> Option<&NormRecord> {
        self.rows.first()
    }

    pub fn last(&self) -> Option<&NormRecord> {
        self.rows.last()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn column(&self, get: impl Fn(&NormRecord) -> f64) -> Vec<f64> {
        self.rows.iter().map(get).collect()
    }

    /// `(s+ε)/s`
    pub fn r(&self) -> f64 {
        (self.s + self.eps) / self.s
    }

    /// `M₀ = ‖u₀‖² + ‖B₀‖²`
    pub fn m0(&self) -> f64 {
        self.first()
            .map_or(0.0, |r| r.u_l2 * r.u_l2 + r.b_l2 * r.b_l2)
    }

    /// `max_t |‖u‖² + ‖B‖² + 2∫‖∇u‖² - M₀| / M₀` (0 for zero data).
    pub fn energy_residual(&self) -> f64 {
        let m0 = self.m0();
        if m0 == 0.0 {
            return self
                .rows
                .iter()
                .map(|r| r.energy_budget().abs())
                .fold(0.0, f64::max);
        }
        self.rows
            .iter()
            .map(|r| (r.energy_budget() - m0).abs() / m0)
            .fold(0.0, f64::max)
    }

    pub fn max_divergence(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.div_u.max(r.div_b))
            .fold(0.0, f64::max)
    }

    /// Finite entries, increasing times and nondecreasing running integrals.
    pub fn is_consistent(&self) -> bool {
        self.rows.iter().all(NormRecord::is_finite)
            && self.rows.windows(2).all(|w| {
                let (a, b) = (&w[0], &w[1]);
                b.t > a.t
                    && b.int_grad_u_sq >= a.int_grad_u_sq
                    && b.int_u_h_spe_sq >= a.int_u_h_spe_sq
                    && b.int_u_h_sp1 >= a.int_u_h_sp1
                    && b.int_grad_u_h_s >= a.int_grad_u_h_s
                    && b.int_b_h_s_pow >= a.int_b_h_s_pow
                    && b.int_f_h_sm1_pow >= a.int_f_h_sm1_pow
            })
    }

    /// Rows with `t <= horizon`.
    pub fn up_to(&self, horizon: f64) -> impl Iterator<Item = &NormRecord> {
        self.rows.iter().take_while(move |r| r.t <= horizon)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wr.serialize(r)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, s: f64, eps: f64) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let rows = rd
            .deserialize()
            .collect::<std::result::Result<Vec<NormRecord>, _>>()
            .map_err(Error::from)?;
        Ok(Self { s, eps, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64, int: f64) -> NormRecord {
        NormRecord {
            t,
            u_l2: 1.0,
            b_l2: 2.0,
            int_grad_u_sq: int,
            ..Default::default()
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut s = NormSeries::new(2.0, 0.5);
        s.rows.push(row(0.0, 0.0));
        s.rows.push(row(0.1, 1.0 / 3.0));
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(
            text.starts_with("t,u_l2,b_l2,grad_u_l2,u_h_sm1pe,u_h_spe,u_h_sp1,b_h_s,grad_u_h_s,")
        );
        let back = NormSeries::read_csv(buf.as_slice(), 2.0, 0.5).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn consistency_flags_decreasing_integrals() {
        let mut s = NormSeries::new(2.0, 0.5);
        s.rows.push(row(0.0, 0.0));
        s.rows.push(row(0.1, 0.2));
        assert!(s.is_consistent());
        s.rows.push(row(0.2, 0.1));
        assert!(!s.is_consistent());
        assert_eq!(s.m0(), 5.0);
    }
}
