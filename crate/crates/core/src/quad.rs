//! One-dimensional quadrature.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

const MAX_DEPTH: u32 = 50;

struct Segment {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `abs_tol`.
///
/// Returns `None` if the integrand produced a non-finite value. Intervals
/// that reach the depth limit are accepted with their current estimate.
/// The tolerance never drops below `1e-15` of the first Simpson estimate.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Option<f64> {
    if a == b {
        return Some(0.0);
    }
    if b < a {
        return adaptive_simpson(f, b, a, abs_tol).map(|v| -v);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    if !(fa.is_finite() && fb.is_finite() && fm.is_finite()) {
        return None;
    }
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut stack = Vec::with_capacity(64);
    stack.push(Segment { a, b, fa, fm, fb, whole, tol: abs_tol.max(1e-15 * whole.abs()).max(1e-300), depth: 0 });
    let mut total = 0.0;
    let mut comp = 0.0;
    while let Some(s) = stack.pop() {
        let m = 0.5 * (s.a + s.b);
        let lm = 0.5 * (s.a + m);
        let rm = 0.5 * (m + s.b);
        let flm = f(lm);
        let frm = f(rm);
        if !(flm.is_finite() && frm.is_finite()) {
            return None;
        }
        let left = (m - s.a) / 6.0 * (s.fa + 4.0 * flm + s.fm);
        let right = (s.b - m) / 6.0 * (s.fm + 4.0 * frm + s.fb);
        let delta = left + right - s.whole;
        if s.depth >= MAX_DEPTH || delta.abs() <= 15.0 * s.tol {
            // Kahan summation keeps many small accepted pieces accurate.
            let y = left + right + delta / 15.0 - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
        } else {
            let tol = 0.5 * s.tol;
            stack.push(Segment { a: m, b: s.b, fa: s.fm, fm: frm, fb: s.fb, whole: right, tol, depth: s.depth + 1 });
            stack.push(Segment { a: s.a, b: m, fa: s.fa, fm: flm, fb: s.fm, whole: left, tol, depth: s.depth + 1 });
        }
    }
    Some(total)
}

/// Composite trapezoid rule on tabulated data. `xs` must be ascending.
pub fn cumulative_trapezoid(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    for k in 0..xs.len() {
        if k > 0 {
            acc += 0.5 * (xs[k] - xs[k - 1]) * (ys[k] + ys[k - 1]);
        }
        out.push(acc);
    }
    out
}

/// `n + 1` points `lo * (hi/lo)^(k/n)`.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (ll, lh) = (lo.ln(), hi.ln());
    (0..=n)
        .map(|k| {
            if k == 0 {
                lo
            } else if k == n {
                hi
            } else {
                (ll + (lh - ll) * k as f64 / n as f64).exp()
            }
        })
        .collect()
}
