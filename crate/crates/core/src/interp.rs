//! Shape-preserving cubic interpolation (Fritsch-Carlson slopes).
//!
//! Used when resampling profiles between grids and for tabulated
//! nonlinearities; monotone data stays monotone, so rescaled ground
//! states pick up no spurious oscillation in their tails.

/// Piecewise-cubic Hermite interpolant with monotonicity-limited slopes.
#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    /// Build the interpolant. `x` must be strictly increasing and at
    /// least two points long.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len());
        assert!(x.len() >= 2);
        debug_assert!(x.windows(2).all(|w| w[1] > w[0]));
        let n = x.len();
        let mut h = vec![0.0; n - 1];
        let mut delta = vec![0.0; n - 1];
        for i in 0..n - 1 {
            h[i] = x[i + 1] - x[i];
            delta[i] = (y[i + 1] - y[i]) / h[i];
        }
        let mut d = vec![0.0; n];
        d[0] = edge_slope(h[0], h.get(1).copied().unwrap_or(h[0]), delta[0], delta.get(1).copied().unwrap_or(delta[0]));
        d[n - 1] = edge_slope(
            h[n - 2],
            if n >= 3 { h[n - 3] } else { h[n - 2] },
            delta[n - 2],
            if n >= 3 { delta[n - 3] } else { delta[n - 2] },
        );
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                d[i] = 0.0;
            } else {
                // Weighted harmonic mean keeps the interpolant monotone.
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        Self { x, y, d }
    }

    /// Evaluate at `t`; constant extrapolation outside the data range.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k => k - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (d0, d1) = (self.d[i], self.d[i + 1]);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
    }

    /// Derivative at `t` (zero outside the data range).
    pub fn eval_deriv(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] || t >= self.x[n - 1] {
            return 0.0;
        }
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k => k - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (d0, d1) = (self.d[i], self.d[i + 1]);
        let s2 = s * s;
        let dh00 = (6.0 * s2 - 6.0 * s) / h;
        let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
        let dh01 = (-6.0 * s2 + 6.0 * s) / h;
        let dh11 = 3.0 * s2 - 2.0 * s;
        dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1
    }
}

fn edge_slope(h0: f64, h1: f64, delta0: f64, delta1: f64) -> f64 {
    // Non-centered three-point estimate, limited to preserve shape.
    let d = ((2.0 * h0 + h1) * delta0 - h0 * delta1) / (h0 + h1);
    if d * delta0 <= 0.0 {
        0.0
    } else if delta0 * delta1 <= 0.0 && d.abs() > 3.0 * delta0.abs() {
        3.0 * delta0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_linear_data() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.37).collect();
        let y: Vec<f64> = x.iter().map(|&v| 2.0 * v - 1.0).collect();
        let p = Pchip::new(x, y);
        for k in 0..100 {
            let t = k as f64 * 0.07;
            assert!((p.eval(t) - (2.0 * t - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn preserves_monotonicity() {
        // Data with a step: a plain cubic spline would overshoot.
        let x = vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let y = vec![0.0, 0.0, 0.1, 4.0, 4.0, 4.0];
        let p = Pchip::new(x, y);
        let mut prev = p.eval(0.0);
        for k in 1..=500 {
            let t = k as f64 * 0.01;
            let v = p.eval(t);
            assert!(v >= prev - 1e-12, "not monotone at t={t}");
            assert!((0.0..=4.0).contains(&v), "overshoot at t={t}: {v}");
            prev = v;
        }
    }

    #[test]
    fn accurate_on_smooth_function() {
        let n = 200;
        let x: Vec<f64> = (0..=n).map(|i| 6.0 * i as f64 / n as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| (-v * v / 2.0).exp()).collect();
        let p = Pchip::new(x, y);
        for k in 0..=300 {
            let t = 6.0 * k as f64 / 300.0;
            let exact = (-t * t / 2.0).exp();
            assert!((p.eval(t) - exact).abs() < 5e-5);
        }
    }
}
