//! Interpolation on tabulated data.

use alloc::vec::Vec;

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
///
/// Preserves monotonicity of the data; outside the knot range the
/// interpolant is continued linearly with the end slope.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
    /// ∫_{x0}^{x_k} of the interpolant, per knot.
    cumulative: Vec<f64>,
}

impl MonotoneCubic {
    /// Returns `None` unless `xs` is strictly increasing with at least two
    /// knots and all values are finite.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Option<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return None;
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return None;
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return None;
        }
        let secants: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k])).collect();
        let mut slopes = Vec::with_capacity(n);
        slopes.push(secants[0]);
        for k in 1..n - 1 {
            let (a, b) = (secants[k - 1], secants[k]);
            if a * b <= 0.0 {
                slopes.push(0.0);
            } else {
                // weighted harmonic mean
                let h0 = xs[k] - xs[k - 1];
                let h1 = xs[k + 1] - xs[k];
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                slopes.push((w1 + w2) / (w1 / a + w2 / b));
            }
        }
        slopes.push(secants[n - 2]);
        let mut cumulative = Vec::with_capacity(n);
        cumulative.push(0.0);
        let mut out = MonotoneCubic { xs, ys, slopes, cumulative: Vec::new() };
        for k in 0..n - 1 {
            let seg = out.segment_integral(k, out.xs[k + 1]);
            let last = *cumulative.last().unwrap();
            cumulative.push(last + seg);
        }
        out.cumulative = cumulative;
        Some(out)
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.ys)
    }

    fn locate(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap_or(core::cmp::Ordering::Less)) {
            Ok(k) => k.min(n - 2),
            Err(k) => k.saturating_sub(1).min(n - 2),
        }
    }

    fn hermite(&self, k: usize, x: f64) -> (f64, f64) {
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let (y0, y1) = (self.ys[k], self.ys[k + 1]);
        let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1;
        let d = ((6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * y1 + (3.0 * t2 - 2.0 * t) * m1) / h;
        (v, d)
    }

    // Simpson's rule is exact for the cubic on [x_k, x].
    fn segment_integral(&self, k: usize, x: f64) -> f64 {
        let a = self.xs[k];
        let (fa, _) = self.hermite(k, a);
        let (fm, _) = self.hermite(k, 0.5 * (a + x));
        let (fb, _) = self.hermite(k, x);
        (x - a) / 6.0 * (fa + 4.0 * fm + fb)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0] + self.slopes[0] * (x - self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1] + self.slopes[n - 1] * (x - self.xs[n - 1]);
        }
        self.hermite(self.locate(x), x).0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.slopes[0];
        }
        if x >= self.xs[n - 1] {
            return self.slopes[n - 1];
        }
        self.hermite(self.locate(x), x).1
    }

    /// ∫_{x0}^{x} of the interpolant, for `x ≥ x0`.
    pub fn integral_from_start(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[n - 1] {
            let d = x - self.xs[n - 1];
            return self.cumulative[n - 1] + self.ys[n - 1] * d + 0.5 * self.slopes[n - 1] * d * d;
        }
        let k = self.locate(x);
        self.cumulative[k] + self.segment_integral(k, x)
    }
}

/// Piecewise-linear interpolation on ascending `xs`, clamped at the ends.
pub fn linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let k = match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap_or(core::cmp::Ordering::Less)) {
        Ok(k) => return ys[k],
        Err(k) => k - 1,
    };
    let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
    ys[k] + t * (ys[k + 1] - ys[k])
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn reproduces_knots_and_stays_monotone() {
        let xs = vec![0.0, 0.5, 1.0, 3.0, 4.0];
        let ys = vec![0.0, 0.1, 2.0, 2.1, 8.0];
        let c = MonotoneCubic::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((c.eval(*x) - y).abs() < 1e-14);
        }
        let mut prev = c.eval(0.0);
        for k in 1..=4000 {
            let v = c.eval(4.0 * k as f64 / 4000.0);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn integral_of_linear_data_is_exact() {
        let xs: Vec<f64> = (0..11).map(|k| k as f64 * 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        let c = MonotoneCubic::new(xs, ys).unwrap();
        assert!((c.integral_from_start(2.2) - 2.2 * 2.2).abs() < 1e-12);
        assert!((c.derivative(1.234) - 2.0).abs() < 1e-12);
        // linear continuation past the last knot
        assert!((c.integral_from_start(4.0) - 16.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(MonotoneCubic::new(vec![0.0], vec![0.0]).is_none());
        assert!(MonotoneCubic::new(vec![0.0, 0.0], vec![0.0, 1.0]).is_none());
        assert!(MonotoneCubic::new(vec![0.0, 1.0], vec![0.0, f64::NAN]).is_none());
    }

    #[test]
    fn linear_interp_clamps() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.0, 10.0, 0.0];
        assert_eq!(linear(&xs, &ys, -1.0), 0.0);
        assert_eq!(linear(&xs, &ys, 0.5), 5.0);
        assert_eq!(linear(&xs, &ys, 1.0), 10.0);
        assert_eq!(linear(&xs, &ys, 3.0), 0.0);
    }
}
