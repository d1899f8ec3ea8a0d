use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::GeometryError;
use crate::quad::{adaptive_simpson, log_space};

const MAX_PIECES: usize = 1000;

/// Family of a modulus of continuity `ε(t)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ModulusKind {
    /// `ε(t) = t^a`, `a ∈ (0, 1]`.
    Power { a: f64 },
    /// `ε(t) = (log(1/t))^{-q}`, defined for `t < 1`.
    LogPower { q: f64 },
    /// Sampled `ε`, linear between samples and continued as a power law
    /// below the first one.
    Table { ts: Vec<f64>, eps: Vec<f64> },
}

/// A modulus `ε` on `(0, t_cap]`, increasing with `ε(t) → 0` as `t → 0`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiniModulus {
    pub kind: ModulusKind,
    pub t_cap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiniReport {
    /// `∫₀^{t1} ε(t)/t dt`; the partial sum when divergent.
    pub integral: f64,
    pub converges: bool,
    /// `t ↦ t·ε(t)` is convex on the sampled grid.
    pub convex_dini: bool,
    /// Dyadic pieces summed.
    pub pieces: usize,
}

impl DiniModulus {
    pub fn power(a: f64) -> Result<Self, GeometryError> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(GeometryError::InvalidParameter("power modulus needs a in (0, 1]"));
        }
        Ok(DiniModulus { kind: ModulusKind::Power { a }, t_cap: 1.0 })
    }

    pub fn log_power(q: f64) -> Result<Self, GeometryError> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(GeometryError::InvalidParameter("log-power modulus needs q > 0"));
        }
        Ok(DiniModulus { kind: ModulusKind::LogPower { q }, t_cap: 0.5 })
    }

    pub fn table(ts: Vec<f64>, eps: Vec<f64>) -> Result<Self, GeometryError> {
        if ts.len() < 2 || ts.len() != eps.len() {
            return Err(GeometryError::InvalidParameter("modulus table needs at least two samples"));
        }
        if ts[0] <= 0.0 || ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GeometryError::InvalidParameter("modulus abscissae must be positive and increasing"));
        }
        if eps[0] <= 0.0 || eps.windows(2).any(|w| w[1] < w[0]) {
            return Err(GeometryError::InvalidParameter("modulus values must be positive and non-decreasing"));
        }
        let t_cap = *ts.last().unwrap();
        Ok(DiniModulus { kind: ModulusKind::Table { ts, eps }, t_cap })
    }

    pub fn eps(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            ModulusKind::Power { a } => t.powf(*a),
            ModulusKind::LogPower { q } => {
                if t >= 1.0 {
                    f64::INFINITY
                } else {
                    (-t.ln()).powf(-q)
                }
            }
            ModulusKind::Table { ts, eps } => {
                if t < ts[0] {
                    let slope = (eps[1] / eps[0]).ln() / (ts[1] / ts[0]).ln();
                    eps[0] * (t / ts[0]).powf(slope)
                } else {
                    crate::interp::linear(ts, eps, t)
                }
            }
        }
    }

    /// `∫₀^{t1} ε(t)/t dt` with no range check, summed over dyadic pieces
    /// `[2^{-k-1}t1, 2^{-k}t1]`. Returns the sum (or partial sum) and
    /// whether the series was judged convergent.
    pub fn integral_to(&self, t1: f64) -> (f64, bool, usize) {
        if t1 <= 0.0 {
            return (0.0, true, 0);
        }
        // s = ln(1/t) turns each dyadic piece into an interval of length ln 2
        let s0 = -t1.ln();
        let ln2 = core::f64::consts::LN_2;
        let integrand = |s: f64| self.eps((-s).exp());
        let mut sum = 0.0;
        let mut pieces: Vec<f64> = Vec::new();
        for k in 0..MAX_PIECES {
            let a = s0 + k as f64 * ln2;
            let scale = integrand(a).abs() * ln2;
            let piece = match adaptive_simpson(integrand, a, a + ln2, 1e-14 * scale.max(1e-300)) {
                Some(v) => v,
                None => return (f64::INFINITY, false, k),
            };
            sum += piece;
            pieces.push(piece);
            if piece <= 1e-17 * sum {
                return (sum, true, k + 1);
            }
        }
        let n = pieces.len();
        let (last, prev) = (pieces[n - 1], pieces[n - 2]);
        if last == 0.0 {
            return (sum, true, n);
        }
        let ratio = last / prev;
        if ratio < 0.999 {
            return (sum + last * ratio / (1.0 - ratio), true, n);
        }
        // Raabe's test with the index measured in units of ln 2 from t = 1
        let index = (s0 + (n as f64 - 1.0) * ln2) / ln2;
        let rho = index * (prev / last - 1.0);
        if rho > 1.05 {
            (sum + last * index / (rho - 1.0), true, n)
        } else {
            (sum, false, n)
        }
    }

    /// `t ↦ t·ε(t)` convex on a log grid of `(t_cap·1e-8, t1]`.
    pub fn is_convex_dini(&self, t1: f64) -> bool {
        let ts = log_space(t1 * 1e-8, t1, 240);
        let vs: Vec<f64> = ts.iter().map(|&t| t * self.eps(t)).collect();
        for k in 1..ts.len() - 1 {
            let d0 = (vs[k] - vs[k - 1]) / (ts[k] - ts[k - 1]);
            let d1 = (vs[k + 1] - vs[k]) / (ts[k + 1] - ts[k]);
            if d1 < d0 - 1e-9 * d0.abs().max(d1.abs()) {
                return false;
            }
        }
        true
    }

    pub fn report(&self, t1: f64) -> Result<DiniReport, GeometryError> {
        if !(t1 > 0.0 && t1 <= self.t_cap) {
            return Err(GeometryError::InvalidParameter("t1 must lie in (0, t_cap]"));
        }
        if let ModulusKind::Table { ts, eps } = &self.kind {
            if ts[0] > t1 * 2f64.powi(-10) {
                return Err(GeometryError::TableTooCoarse { t: ts[0] });
            }
            if eps[1] <= eps[0] {
                return Err(GeometryError::TableTooCoarse { t: ts[1] });
            }
        }
        let (integral, converges, pieces) = self.integral_to(t1);
        Ok(DiniReport { integral, converges, convex_dini: self.is_convex_dini(t1), pieces })
    }
}
