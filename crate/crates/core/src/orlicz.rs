//! The structural function `F(t) = ∫₀ᵗ h` and its companions.
//!
//! For a flow law `h` (continuous, strictly increasing, `h(0) = 0`) this
//! module evaluates
//!
//! * `F`, the energy density, and `H(t) = h(t)/t`,
//! * `g = h⁻¹` and the conjugate `F*(s) = ∫₀ˢ g`,
//! * `R(t) = F''(t)/F'(t)`,
//!
//! and certifies the structural conditions on `F`: the physical ones,
//! two-sided power coercivity, the Δ₂ growth condition, and the integral
//! condition on `R` used to build barriers. Orlicz (Luxemburg) norms of grid
//! fields are computed here as well.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::field::ScalarField;
use crate::interp::MonotoneCubic;
use crate::quad::{adaptive_simpson, log_space};

/// Absolute tolerance of the quadratures behind `F` and `F*`.
pub const QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrliczError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("h is not strictly increasing near t = {t}")]
    NonMonotone { t: f64 },
    #[error("h(0) = {value} is not zero")]
    NonzeroOrigin { value: f64 },
    #[error("argument {t} outside the validated range [0, {max}]")]
    OutOfRange { t: f64, max: f64 },
    #[error("g({y}) cannot be bracketed below t_max")]
    InversionFailure { y: f64 },
    #[error("no (alpha, beta) on the search lattice works: weight #{sample} violates the inequality on [{t}, {upper}]")]
    SearchExhausted { sample: usize, t: f64, upper: f64 },
    #[error("the norm integral exceeds its threshold for every M up to {bound}")]
    Unbounded { bound: f64 },
    #[error("field has no interior cells")]
    EmptyField,
    #[error("quadrature produced a non-finite value")]
    Quadrature,
}

type Law = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Representation of the flow law `h`.
#[derive(Clone)]
pub enum FlowLaw {
    /// `h(t) = t^{p-1}`, the p-Laplacian.
    Power { p: f64 },
    /// `h(t) = t / √(1+t²)`, the (non-coercive) minimal-surface law.
    MinimalSurface,
    /// Sampled `h` with monotone-cubic interpolation.
    Table(MonotoneCubic),
    /// An arbitrary closed-form `h`, identified by name.
    Closed { name: String, h: Law },
}

impl fmt::Debug for FlowLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowLaw::Power { p } => write!(f, "Power {{ p: {p} }}"),
            FlowLaw::MinimalSurface => write!(f, "MinimalSurface"),
            FlowLaw::Table(t) => write!(f, "Table({} knots)", t.knots().0.len()),
            FlowLaw::Closed { name, .. } => write!(f, "Closed({name})"),
        }
    }
}

/// Coarse classification used by callers that special-case power laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Power(f64),
    Custom,
}

/// Values returned by [`OrliczFunction::eval`]. `g` and `fstar` are
/// evaluated at the same argument as `F` and `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Evaluation {
    pub f: f64,
    pub h: f64,
    pub g: f64,
    pub fstar: f64,
    pub r: f64,
}

/// A validated structural function.
#[derive(Debug, Clone)]
pub struct OrliczFunction {
    law: FlowLaw,
    t_max: f64,
}

impl OrliczFunction {
    pub const DEFAULT_T_MAX: f64 = 1e6;

    /// `F(t) = t^p / p`.
    pub fn power(p: f64) -> Result<Self, OrliczError> {
        Self::new(FlowLaw::Power { p }, Self::DEFAULT_T_MAX)
    }

    pub fn minimal_surface(t_max: f64) -> Result<Self, OrliczError> {
        Self::new(FlowLaw::MinimalSurface, t_max)
    }

    /// Sampled flow law. The first sample must sit at `t = 0`; `t_max` is
    /// the last sample.
    pub fn from_table(ts: Vec<f64>, hs: Vec<f64>) -> Result<Self, OrliczError> {
        if ts.first() != Some(&0.0) {
            return Err(OrliczError::InvalidParameter("table must start at t = 0"));
        }
        let t_max = *ts.last().unwrap();
        let cubic = MonotoneCubic::new(ts, hs).ok_or(OrliczError::InvalidParameter("table must have at least two strictly increasing abscissae"))?;
        Self::new(FlowLaw::Table(cubic), t_max)
    }

    pub fn from_fn<F>(name: &str, h: F, t_max: f64) -> Result<Self, OrliczError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(FlowLaw::Closed { name: name.to_string(), h: Arc::new(h) }, t_max)
    }

    /// Runs every construction-time invariant check.
    pub fn new(law: FlowLaw, t_max: f64) -> Result<Self, OrliczError> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(OrliczError::InvalidParameter("t_max must be positive and finite"));
        }
        if let FlowLaw::Power { p } = law {
            if !(p.is_finite() && p > 1.0) {
                return Err(OrliczError::InvalidParameter("power law requires p > 1"));
            }
        }
        let of = OrliczFunction { law, t_max };
        of.validate()?;
        Ok(of)
    }

    fn validate(&self) -> Result<(), OrliczError> {
        let top = self.h(self.t_max);
        let h0 = self.h(0.0);
        if !top.is_finite() || !h0.is_finite() {
            return Err(OrliczError::InvalidParameter("h is not finite on [0, t_max]"));
        }
        if h0.abs() > 1e-12 * top.abs().max(1.0) {
            return Err(OrliczError::NonzeroOrigin { value: h0 });
        }
        let mut prev = (0.0, h0);
        for t in log_space(self.t_max * 1e-9, self.t_max, 511) {
            let v = self.h(t);
            if !(v > prev.1) {
                return Err(OrliczError::NonMonotone { t });
            }
            prev = (t, v);
        }
        // strict convexity of F through second divided differences
        let ts = log_space(self.t_max * 1e-6, self.t_max, 32);
        let fs: Vec<f64> = ts.iter().map(|&t| self.big_f(t)).collect();
        for k in 1..ts.len() - 1 {
            let d0 = (fs[k] - fs[k - 1]) / (ts[k] - ts[k - 1]);
            let d1 = (fs[k + 1] - fs[k]) / (ts[k + 1] - ts[k]);
            if !(d1 > d0) {
                return Err(OrliczError::NonMonotone { t: ts[k] });
            }
        }
        Ok(())
    }

    pub fn law(&self) -> &FlowLaw {
        &self.law
    }

    pub fn kind(&self) -> Kind {
        match self.law {
            FlowLaw::Power { p } => Kind::Power(p),
            _ => Kind::Custom,
        }
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Largest admissible argument of `g` and `F*`.
    pub fn h_max(&self) -> f64 {
        self.h(self.t_max)
    }

    /// Flow law `h = F'`. Not range-checked.
    pub fn h(&self, t: f64) -> f64 {
        match &self.law {
            FlowLaw::Power { p } => {
                if t <= 0.0 {
                    0.0
                } else {
                    t.powf(p - 1.0)
                }
            }
            FlowLaw::MinimalSurface => t / (1.0 + t * t).sqrt(),
            FlowLaw::Table(c) => c.eval(t),
            FlowLaw::Closed { h, .. } => h(t),
        }
    }

    /// `h' = F''`. Not range-checked.
    pub fn dh(&self, t: f64) -> f64 {
        match &self.law {
            FlowLaw::Power { p } => {
                if t <= 0.0 {
                    if *p < 2.0 {
                        f64::INFINITY
                    } else if *p == 2.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    (p - 1.0) * t.powf(p - 2.0)
                }
            }
            FlowLaw::MinimalSurface => {
                let s = 1.0 + t * t;
                1.0 / (s * s.sqrt())
            }
            FlowLaw::Table(c) => c.derivative(t),
            FlowLaw::Closed { h, .. } => {
                let e = 1e-6 * t.max(1e-3);
                if t > e {
                    (h(t + e) - h(t - e)) / (2.0 * e)
                } else {
                    (h(t + e) - h(t)) / e
                }
            }
        }
    }

    /// `H(t) = h(t)/t`, with the flux convention `H(t)·t → 0` at `t = 0`.
    pub fn big_h(&self, t: f64) -> f64 {
        match &self.law {
            FlowLaw::Power { p } => {
                if t <= 0.0 {
                    if *p == 2.0 {
                        1.0
                    } else if *p < 2.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                } else {
                    t.powf(p - 2.0)
                }
            }
            _ => {
                if t <= 0.0 {
                    self.dh(0.0)
                } else {
                    self.h(t) / t
                }
            }
        }
    }

    /// `F(t) = ∫₀ᵗ h`. Not range-checked; closed form where available,
    /// adaptive Simpson otherwise.
    pub fn big_f(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.law {
            FlowLaw::Power { p } => t.powf(*p) / p,
            FlowLaw::MinimalSurface => {
                let s = (1.0 + t * t).sqrt();
                t * t / (s + 1.0)
            }
            FlowLaw::Table(c) => c.integral_from_start(t),
            FlowLaw::Closed { h, .. } => adaptive_simpson(|s| h(s), 0.0, t, QUAD_TOL * (t * h(t)).max(1.0)).unwrap_or(f64::NAN),
        }
    }

    /// `F(t)`, range-checked.
    pub fn f(&self, t: f64) -> Result<f64, OrliczError> {
        self.check_t(t)?;
        let v = self.big_f(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(OrliczError::Quadrature)
        }
    }

    fn check_t(&self, t: f64) -> Result<(), OrliczError> {
        if t.is_nan() || t < 0.0 || t > self.t_max {
            Err(OrliczError::OutOfRange { t, max: self.t_max })
        } else {
            Ok(())
        }
    }

    fn check_dual(&self, y: f64) -> Result<(), OrliczError> {
        let top = self.h_max();
        if y.is_nan() || y < 0.0 {
            return Err(OrliczError::OutOfRange { t: y, max: top });
        }
        if y > top {
            return Err(OrliczError::InversionFailure { y });
        }
        Ok(())
    }

    /// Inverse flow law `g = h⁻¹` on `[0, h(t_max)]`.
    pub fn g(&self, y: f64) -> Result<f64, OrliczError> {
        self.check_dual(y)?;
        Ok(self.g_unchecked(y))
    }

    fn g_unchecked(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        match &self.law {
            FlowLaw::Power { p } => y.powf(1.0 / (p - 1.0)),
            FlowLaw::MinimalSurface => y / ((1.0 - y) * (1.0 + y)).sqrt(),
            _ => self.g_bisect(y),
        }
    }

    // Exponential bracket growth followed by bisection; h is strictly
    // increasing so the bracket is unique.
    fn g_bisect(&self, y: f64) -> f64 {
        let mut hi = 1.0f64.min(self.t_max);
        while self.h(hi) < y && hi < self.t_max {
            hi = (hi * 2.0).min(self.t_max);
        }
        let mut lo = 0.0;
        if hi > 1.0 {
            lo = hi * 0.5;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.h(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Conjugate `F*(y) = ∫₀ʸ g`.
    pub fn f_star(&self, y: f64) -> Result<f64, OrliczError> {
        self.check_dual(y)?;
        let v = self.f_star_unchecked(y);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(OrliczError::Quadrature)
        }
    }

    fn f_star_unchecked(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        match &self.law {
            FlowLaw::Power { p } => {
                let q = p / (p - 1.0);
                y.powf(q) / q
            }
            FlowLaw::MinimalSurface => {
                if y >= 1.0 {
                    f64::INFINITY
                } else {
                    y * y / (1.0 + ((1.0 - y) * (1.0 + y)).sqrt())
                }
            }
            _ => adaptive_simpson(|s| self.g_unchecked(s), 0.0, y, QUAD_TOL * (y * self.g_unchecked(y)).max(1.0)).unwrap_or(f64::NAN),
        }
    }

    /// `R(t) = F''(t)/F'(t) = h'(t)/h(t)`.
    pub fn r(&self, t: f64) -> f64 {
        match &self.law {
            FlowLaw::Power { p } => (p - 1.0) / t,
            FlowLaw::MinimalSurface => 1.0 / (t * (1.0 + t * t)),
            _ => self.dh(t) / self.h(t),
        }
    }

    /// Evaluates `F, h, g, F*, R` at `t`.
    pub fn eval(&self, t: f64) -> Result<Evaluation, OrliczError> {
        self.check_t(t)?;
        Ok(Evaluation { f: self.f(t)?, h: self.h(t), g: self.g(t)?, fstar: self.f_star(t)?, r: self.r(t) })
    }

    /// `F(a) + F*(b) − ab`, non-negative by Young's inequality and zero
    /// exactly when `b = h(a)`.
    pub fn young_gap(&self, a: f64, b: f64) -> Result<f64, OrliczError> {
        Ok(self.f(a)? + self.f_star(b)? - a * b)
    }

    /// The conjugate structural function `F*`, whose flow law is `g`.
    /// Available for power laws (`p ↦ p/(p−1)`) and tables.
    pub fn conjugate(&self) -> Option<OrliczFunction> {
        match &self.law {
            FlowLaw::Power { p } => OrliczFunction::power(p / (p - 1.0)).ok(),
            FlowLaw::Table(c) => {
                let (ts, hs) = c.knots();
                OrliczFunction::from_table(hs.to_vec(), ts.to_vec()).ok()
            }
            _ => None,
        }
    }
}

/// Which structural condition a report certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ConditionId {
    Physical,
    Coercivity,
    Delta2,
    TechnicalR,
    Holder,
}

/// Outcome of one sampled certification. A failing report always carries
/// at least one witness `(input, measured value)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConditionReport {
    pub condition: ConditionId,
    pub pass: bool,
    pub witnesses: Vec<(f64, f64)>,
    pub constants: BTreeMap<String, f64>,
    pub note: String,
}

impl ConditionReport {
    fn new(condition: ConditionId) -> Self {
        ConditionReport { condition, pass: true, witnesses: Vec::new(), constants: BTreeMap::new(), note: String::new() }
    }

    fn fail(&mut self, input: f64, value: f64) {
        self.pass = false;
        self.witnesses.push((input, value));
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.get(name).copied()
    }
}

/// Tunables of [`check_conditions`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConditionOptions {
    /// Log-spaced samples per check.
    pub samples: usize,
    /// Δ₂ is only required above this threshold.
    pub delta2_t0: f64,
    /// Largest admissible `C/c` in the coercivity check.
    pub coercivity_max_spread: f64,
    /// Largest admissible Δ₂ constant.
    pub delta2_cap: f64,
}

impl Default for ConditionOptions {
    fn default() -> Self {
        ConditionOptions { samples: 256, delta2_t0: 1.0, coercivity_max_spread: 100.0, delta2_cap: 1e3 }
    }
}

/// Physical, coercivity and Δ₂ certificates over `range = (lo, hi)`.
pub fn check_conditions(of: &OrliczFunction, p_guess: f64, range: (f64, f64), opts: &ConditionOptions) -> Vec<ConditionReport> {
    let (lo, hi) = range;
    let n = opts.samples.max(8);
    let ts = log_space(lo, hi, n);

    let mut physical = ConditionReport::new(ConditionId::Physical);
    let h0 = of.h(0.0);
    physical.constants.insert("h0".to_string(), h0);
    if h0.abs() > 1e-12 {
        physical.fail(0.0, h0);
    }
    let mut prev = h0;
    for &t in &ts {
        let v = of.h(t);
        if !(v > prev) {
            physical.fail(t, v);
        }
        prev = v;
    }
    physical.note = "h(0) = 0 and h strictly increasing on the sample".to_string();

    let mut coercive = ConditionReport::new(ConditionId::Coercivity);
    let mut c = f64::INFINITY;
    let mut big_c = 0.0f64;
    let (mut t_c, mut t_big_c) = (lo, lo);
    for &t in &ts {
        let ratio = of.h(t) / t.powf(p_guess - 1.0);
        if ratio < c {
            c = ratio;
            t_c = t;
        }
        if ratio > big_c {
            big_c = ratio;
            t_big_c = t;
        }
    }
    coercive.constants.insert("p".to_string(), p_guess);
    coercive.constants.insert("c".to_string(), c);
    coercive.constants.insert("C".to_string(), big_c);
    let spread = big_c / c;
    coercive.constants.insert("spread".to_string(), spread);
    if !(c > 0.0 && big_c.is_finite() && spread <= opts.coercivity_max_spread) {
        coercive.fail(t_c, c);
        coercive.witnesses.push((t_big_c, big_c));
    }
    coercive.note = "c = inf h(t)/t^(p-1), C = sup h(t)/t^(p-1) on the sample; pass requires C/c within the spread limit".to_string();

    let mut delta2 = ConditionReport::new(ConditionId::Delta2);
    let t0 = opts.delta2_t0;
    let mut c0 = 0.0f64;
    let mut worst = (t0, 0.0);
    if hi > t0 {
        for t in log_space(t0, hi, n) {
            let r = of.big_f(2.0 * t) / of.big_f(t);
            if !r.is_finite() || r > c0 {
                c0 = if r.is_finite() { r } else { f64::INFINITY };
                worst = (t, r);
            }
        }
    }
    let dual_hi = hi.min(0.5 * of.h_max());
    if dual_hi > t0 {
        for y in log_space(t0, dual_hi, n) {
            let r = of.f_star_unchecked(2.0 * y) / of.f_star_unchecked(y);
            if !r.is_finite() || r > c0 {
                c0 = if r.is_finite() { r } else { f64::INFINITY };
                worst = (y, r);
            }
        }
    } else {
        // F* is only finite below h(t_max): it cannot grow like a power.
        c0 = f64::INFINITY;
        worst = (2.0 * t0, f64::INFINITY);
        delta2.note = "F* is undefined beyond sup h; ".to_string();
    }
    delta2.constants.insert("t0".to_string(), t0);
    delta2.constants.insert("C0".to_string(), c0);
    if !(c0.is_finite() && c0 <= opts.delta2_cap) {
        delta2.fail(worst.0, worst.1);
    } else {
        delta2.witnesses.push(worst);
    }
    delta2.note.push_str("C0 = max(sup F(2t)/F(t), sup F*(2t)/F*(t)) for t > t0");

    alloc::vec![physical, coercive, delta2]
}

/// A positive, non-decreasing, bounded weight `c(s)`, piecewise linear
/// between samples and constant outside them.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MonotoneWeight {
    s: Vec<f64>,
    c: Vec<f64>,
}

impl MonotoneWeight {
    pub fn constant(c: f64) -> Option<Self> {
        Self::from_samples(alloc::vec![0.0, 1.0], alloc::vec![c, c])
    }

    /// Requires ascending `s`, positive finite `c`, non-decreasing in `s`.
    pub fn from_samples(s: Vec<f64>, c: Vec<f64>) -> Option<Self> {
        if s.len() < 2 || s.len() != c.len() {
            return None;
        }
        if s.windows(2).any(|w| !(w[1] > w[0])) || c.windows(2).any(|w| w[1] < w[0]) {
            return None;
        }
        if c.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return None;
        }
        Some(MonotoneWeight { s, c })
    }

    pub fn from_fn(f: impl Fn(f64) -> f64, s_range: (f64, f64), n: usize) -> Option<Self> {
        let s: Vec<f64> = (0..=n).map(|k| s_range.0 + (s_range.1 - s_range.0) * k as f64 / n as f64).collect();
        let c = s.iter().map(|&x| f(x)).collect();
        Self::from_samples(s, c)
    }

    pub fn eval(&self, s: f64) -> f64 {
        crate::interp::linear(&self.s, &self.c, s)
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.c[0], *self.c.last().unwrap())
    }
}

/// Certifies `∫ₜᵀ R(c(s)s) ds ≥ α ∫ₜᵀ R(βs) ds` for each supplied weight on a
/// lattice of `(t, T)` pairs in `s_range`, searching `(α, β)` over
/// `α ∈ {2^{-k}}`, `β ∈ {C} ∪ {c·2^{k/2}} ∩ (0, 4C]`.
///
/// The condition quantifies over all monotone weights; only the supplied
/// ones are certified.
pub fn check_condition_r(of: &OrliczFunction, weights: &[MonotoneWeight], s_range: (f64, f64)) -> Result<ConditionReport, OrliczError> {
    if weights.is_empty() || !(s_range.0 > 0.0 && s_range.1 > s_range.0) {
        return Err(OrliczError::InvalidParameter("condition R needs weights and a positive range"));
    }
    let lattice = log_space(s_range.0, s_range.1, 12);
    let c_lo = weights.iter().map(|w| w.bounds().0).fold(f64::INFINITY, f64::min);
    let c_hi = weights.iter().map(|w| w.bounds().1).fold(0.0, f64::max);

    let piece = |f: &dyn Fn(f64) -> f64, a: f64, b: f64| -> Result<f64, OrliczError> {
        let scale = f(a).abs().max(f(b).abs()) * (b - a);
        adaptive_simpson(f, a, b, 1e-12 * scale.max(1e-300)).ok_or(OrliczError::Quadrature)
    };

    // ∫ over consecutive lattice cells, per weight
    let mut lhs: Vec<Vec<f64>> = Vec::with_capacity(weights.len());
    for w in weights {
        let f = |s: f64| of.r(w.eval(s) * s);
        let row = lattice.windows(2).map(|ab| piece(&f, ab[0], ab[1])).collect::<Result<Vec<_>, _>>()?;
        lhs.push(row);
    }

    let alphas: Vec<f64> = (0..=8).map(|k| 0.5f64.powi(k)).collect();
    let mut betas = alloc::vec![c_hi];
    let mut k = 0;
    loop {
        let b = c_lo * 2f64.powf(k as f64 / 2.0);
        if b > 4.0 * c_hi {
            break;
        }
        if (b - c_hi).abs() > 1e-12 * c_hi {
            betas.push(b);
        }
        k += 1;
    }

    let mut first_violation: Option<(usize, f64, f64)> = None;
    let mut rhs_cache: Vec<Vec<f64>> = Vec::with_capacity(betas.len());
    for &beta in &betas {
        let f = |s: f64| of.r(beta * s);
        rhs_cache.push(lattice.windows(2).map(|ab| piece(&f, ab[0], ab[1])).collect::<Result<Vec<_>, _>>()?);
    }

    for &alpha in &alphas {
        for (bi, &beta) in betas.iter().enumerate() {
            let rhs = &rhs_cache[bi];
            let mut violation = None;
            'outer: for (wi, row) in lhs.iter().enumerate() {
                for a in 0..row.len() {
                    let (mut l, mut r) = (0.0, 0.0);
                    for b in a..row.len() {
                        l += row[b];
                        r += rhs[b];
                        if l < alpha * r - 1e-9 * (alpha * r).abs() {
                            violation = Some((wi, lattice[a], lattice[b + 1]));
                            break 'outer;
                        }
                    }
                }
            }
            match violation {
                None => {
                    let mut rep = ConditionReport::new(ConditionId::TechnicalR);
                    rep.constants.insert("alpha".to_string(), alpha);
                    rep.constants.insert("beta".to_string(), beta);
                    rep.constants.insert("c".to_string(), c_lo);
                    rep.constants.insert("C".to_string(), c_hi);
                    rep.constants.insert("weights".to_string(), weights.len() as f64);
                    rep.witnesses.push((s_range.0, s_range.1));
                    rep.note = "certified only for the supplied weights c(s) on the sampled (t, T) lattice".to_string();
                    return Ok(rep);
                }
                Some(v) => {
                    if first_violation.is_none() {
                        first_violation = Some(v);
                    }
                }
            }
        }
    }
    let (sample, t, upper) = first_violation.unwrap_or((0, s_range.0, s_range.1));
    Err(OrliczError::SearchExhausted { sample, t, upper })
}

/// Luxemburg-type norm `min{M : ∫ Φ(|u|/M) ≤ Φ(1)}` by geometric bisection.
fn luxemburg(values: &[f64], area: f64, phi: impl Fn(f64) -> f64, phi_one: f64) -> Result<f64, OrliczError> {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Ok(0.0);
    }
    let integral = |m: f64| -> f64 {
        let mut acc = 0.0;
        for v in values {
            let x = v.abs() / m;
            let f = phi(x);
            if !f.is_finite() {
                return f64::INFINITY;
            }
            acc += f;
        }
        acc * area
    };
    let bound = 1e12 * peak;
    let mut hi = peak;
    while integral(hi) > phi_one {
        hi *= 2.0;
        if hi > bound {
            return Err(OrliczError::Unbounded { bound });
        }
    }
    let mut lo = hi;
    while integral(lo) <= phi_one {
        lo *= 0.5;
        if lo < 1e-300 {
            return Ok(0.0);
        }
    }
    while hi / lo - 1.0 > 1e-12 {
        let mid = (lo * hi).sqrt();
        if integral(mid) > phi_one {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Orlicz norm `‖u‖_F = min{M | ∫_D F(|u|/M) dx ≤ F(1)}` over the interior
/// cells of `field`, to relative tolerance well below 1e-8.
pub fn orlicz_norm(field: &ScalarField, of: &OrliczFunction) -> Result<f64, OrliczError> {
    let values = field.interior_values();
    if values.is_empty() {
        return Err(OrliczError::EmptyField);
    }
    let t_max = of.t_max();
    let phi = |x: f64| if x > t_max { f64::INFINITY } else { of.big_f(x) };
    luxemburg(&values, field.grid().cell_area(), phi, of.big_f(1.0))
}

/// The conjugate norm `‖v‖_{F*}`, thresholded at `F*(1)`.
pub fn orlicz_norm_conjugate(field: &ScalarField, of: &OrliczFunction) -> Result<f64, OrliczError> {
    let values = field.interior_values();
    if values.is_empty() {
        return Err(OrliczError::EmptyField);
    }
    let y_max = of.h_max();
    let phi = |y: f64| if y > y_max { f64::INFINITY } else { of.f_star_unchecked(y) };
    luxemburg(&values, field.grid().cell_area(), phi, of.f_star(1.0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn quadratic_case() {
        let of = OrliczFunction::power(2.0).unwrap();
        let e = of.eval(1.0).unwrap();
        assert_eq!(e, Evaluation { f: 0.5, h: 1.0, g: 1.0, fstar: 0.5, r: 1.0 });
        assert_eq!(of.big_h(0.3), 1.0);
    }

    #[test]
    fn cubic_case() {
        let of = OrliczFunction::power(3.0).unwrap();
        let e = of.eval(2.0).unwrap();
        assert!(close(e.f, 8.0 / 3.0, 1e-15));
        assert!(close(e.h, 4.0, 1e-15));
        assert!(close(e.g, 2f64.sqrt(), 1e-15));
        // F*(t) = (2/3) t^{3/2} for h(t) = t²
        assert!(close(e.fstar, 2.0 / 3.0 * 2f64.powf(1.5), 1e-14));
        assert!((e.fstar - 1.8856).abs() < 1e-4);
        assert!(close(e.r, 1.0, 1e-15));
    }

    #[test]
    fn minimal_surface_constructs() {
        let of = OrliczFunction::minimal_surface(1e6).unwrap();
        assert!(of.h_max() < 1.0);
        assert_eq!(of.kind(), Kind::Custom);
        assert!(matches!(of.g(1.5), Err(OrliczError::InversionFailure { .. })));
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(OrliczFunction::power(1.0), Err(OrliczError::InvalidParameter(_))));
        let r = OrliczFunction::from_fn("shifted", |t| t + 0.5, 10.0);
        assert!(matches!(r, Err(OrliczError::NonzeroOrigin { .. })));
        let r = OrliczFunction::from_fn("bump", |t: f64| t * (2.0 - t), 10.0);
        assert!(matches!(r, Err(OrliczError::NonMonotone { .. })));
        let r = OrliczFunction::from_table(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 1.0]);
        assert!(matches!(r, Err(OrliczError::NonMonotone { .. })));
        let r = OrliczFunction::from_table(vec![0.5, 1.0], vec![0.0, 2.0]);
        assert!(matches!(r, Err(OrliczError::InvalidParameter(_))));
    }

    #[test]
    fn out_of_range() {
        let of = OrliczFunction::power(2.0).unwrap();
        assert!(matches!(of.eval(-1.0), Err(OrliczError::OutOfRange { .. })));
        assert!(matches!(of.eval(2e6), Err(OrliczError::OutOfRange { .. })));
    }

    #[test]
    fn custom_closed_form_matches_power() {
        let custom = OrliczFunction::from_fn("cube", |t: f64| t * t, 100.0).unwrap();
        let exact = OrliczFunction::power(3.0).unwrap();
        for &t in &[0.1, 1.0, 2.5, 7.0] {
            assert!(close(custom.f(t).unwrap(), exact.f(t).unwrap(), 1e-9));
            assert!(close(custom.g(t).unwrap(), exact.g(t).unwrap(), 1e-12));
            assert!(close(custom.f_star(t).unwrap(), exact.f_star(t).unwrap(), 1e-8));
            assert!(close(custom.r(t), exact.r(t), 1e-6));
        }
    }

    #[test]
    fn table_law_behaves() {
        let ts: Vec<f64> = (0..=200).map(|k| k as f64 * 0.05).collect();
        let hs: Vec<f64> = ts.iter().map(|t| t * t).collect();
        let of = OrliczFunction::from_table(ts, hs).unwrap();
        assert!(close(of.f(3.0).unwrap(), 9.0, 1e-3));
        assert!(close(of.g(4.0).unwrap(), 2.0, 1e-4));
        let conj = of.conjugate().unwrap();
        assert!(close(conj.h(4.0), 2.0, 1e-4));
    }

    #[test]
    fn young_gap_values() {
        let two = OrliczFunction::power(2.0).unwrap();
        assert!(two.young_gap(3.0, 3.0).unwrap().abs() < 1e-14);
        assert!(close(two.young_gap(1.0, 2.0).unwrap(), 0.5, 1e-15));
        let three = OrliczFunction::power(3.0).unwrap();
        assert!(three.young_gap(1.0, 1.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn power_conditions() {
        for &p in &[1.5, 2.0, 3.0] {
            let of = OrliczFunction::power(p).unwrap();
            let reps = check_conditions(&of, p, (1e-3, 1e3), &ConditionOptions::default());
            assert!(reps.iter().all(|r| r.pass), "{reps:?}");
            let co = &reps[1];
            assert!(close(co.constant("c").unwrap(), 1.0, 1e-12));
            assert!(close(co.constant("C").unwrap(), 1.0, 1e-12));
        }
        let of = OrliczFunction::power(2.0).unwrap();
        let reps = check_conditions(&of, 2.0, (1e-3, 1e3), &ConditionOptions::default());
        assert!((reps[2].constant("C0").unwrap() - 4.0).abs() < 1e-6);
    }

    #[test]
    fn minimal_surface_is_not_coercive() {
        let of = OrliczFunction::minimal_surface(1e6).unwrap();
        let reps = check_conditions(&of, 2.0, (1e-2, 1e4), &ConditionOptions::default());
        assert!(reps[0].pass);
        assert!(!reps[1].pass);
        assert!(!reps[1].witnesses.is_empty());
        assert!(!reps[2].pass);
    }

    #[test]
    fn condition_r_power_takes_unit_alpha_and_big_c() {
        let of = OrliczFunction::power(3.0).unwrap();
        let ws = vec![
            MonotoneWeight::from_fn(|s| 0.5 + 0.1 * s, (0.1, 10.0), 50).unwrap(),
            MonotoneWeight::constant(1.2).unwrap(),
        ];
        let rep = check_condition_r(&of, &ws, (0.1, 10.0)).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.constant("alpha"), Some(1.0));
        assert!(close(rep.constant("beta").unwrap(), 1.5, 1e-12));
    }

    #[test]
    fn condition_r_identity_weight() {
        let of = OrliczFunction::power(2.0).unwrap();
        let ws = vec![MonotoneWeight::constant(1.0).unwrap()];
        let rep = check_condition_r(&of, &ws, (0.5, 4.0)).unwrap();
        assert_eq!(rep.constant("alpha"), Some(1.0));
        assert_eq!(rep.constant("beta"), Some(1.0));
    }

    #[test]
    fn condition_r_detects_increasing_r() {
        // h(t) = exp(t²) − 1 has R(t) = 2t·e^{t²}/(e^{t²} − 1), increasing for
        // large t; a fast-rising weight then makes small α necessary.
        let of = OrliczFunction::from_fn("gauss", |t: f64| (t * t).exp_m1(), 20.0).unwrap();
        let ws = vec![MonotoneWeight::constant(1.0).unwrap()];
        let rep = check_condition_r(&of, &ws, (1.0, 3.0)).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.constant("beta"), Some(1.0));
    }

    #[test]
    fn weight_validation() {
        assert!(MonotoneWeight::from_samples(vec![0.0, 1.0], vec![2.0, 1.0]).is_none());
        assert!(MonotoneWeight::from_samples(vec![0.0, 1.0], vec![0.0, 1.0]).is_none());
        let w = MonotoneWeight::from_samples(vec![0.0, 1.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(w.bounds(), (1.0, 3.0));
        assert_eq!(w.eval(0.5), 2.0);
    }
}
