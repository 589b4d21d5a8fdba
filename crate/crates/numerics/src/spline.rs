//! Clamped cubic splines on uniform nodes. End slopes come from third-order
//! one-sided differences, which keeps the interpolant fourth-order accurate.

#[derive(Clone, Debug)]
pub struct CubicSpline {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    /// Spline through `y` at nodes x0 + i h; needs at least four nodes.
    pub fn new(x0: f64, h: f64, y: &[f64]) -> Self {
        let n = y.len() - 1;
        assert!(n >= 3, "cubic spline needs four nodes");
        let s0 = (-11.0 * y[0] + 18.0 * y[1] - 9.0 * y[2] + 2.0 * y[3]) / (6.0 * h);
        let sn = (11.0 * y[n] - 18.0 * y[n - 1] + 9.0 * y[n - 2] - 2.0 * y[n - 3]) / (6.0 * h);
        let h2 = h * h;
        let mut a = vec![1.0; n + 1];
        let mut b = vec![4.0; n + 1];
        let mut c = vec![1.0; n + 1];
        let mut d = vec![0.0; n + 1];
        for i in 1..n {
            d[i] = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h2;
        }
        (a[0], b[0], c[0]) = (0.0, 2.0, 1.0);
        d[0] = 6.0 * ((y[1] - y[0]) / h - s0) / h;
        (a[n], b[n], c[n]) = (1.0, 2.0, 0.0);
        d[n] = 6.0 * (sn - (y[n] - y[n - 1]) / h) / h;
        for i in 1..=n {
            let w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        let mut m = vec![0.0; n + 1];
        m[n] = d[n] / b[n];
        for i in (0..n).rev() {
            m[i] = (d[i] - c[i] * m[i + 1]) / b[i];
        }
        Self { x0, h, y: y.to_vec(), m }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x0, self.x0 + (self.y.len() - 1) as f64 * self.h)
    }

    /// Value at x; `None` outside the node range beyond a rounding margin.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let (lo, hi) = self.domain();
        let tol = 1e-12 * (hi - lo).max(1.0);
        if !(x >= lo - tol && x <= hi + tol) {
            return None;
        }
        let n = self.y.len() - 1;
        let u = ((x - self.x0) / self.h).clamp(0.0, n as f64);
        let i = (u.floor() as usize).min(n - 1);
        let (h, xl) = (self.h, self.x0 + i as f64 * self.h);
        let p = (x - xl).clamp(-tol, h + tol);
        let q = h - p;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        Some(
            m0 * q * q * q / (6.0 * h)
                + m1 * p * p * p / (6.0 * h)
                + (self.y[i] / h - m0 * h / 6.0) * q
                + (self.y[i + 1] / h - m1 * h / 6.0) * p,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_exactly() {
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x - 0.3 * x * x * x;
        let y: Vec<f64> = (0..=8).map(|i| f(0.25 * i as f64)).collect();
        let s = CubicSpline::new(0.0, 0.25, &y);
        for j in 0..=40 {
            let x = 0.05 * j as f64;
            assert!((s.eval(x).unwrap() - f(x)).abs() < 1e-12);
        }
        assert!(s.eval(2.1).is_none());
    }

    #[test]
    fn fourth_order_on_smooth_data() {
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let y: Vec<f64> = (0..=n).map(|i| (3.0 * i as f64 * h).sin()).collect();
            let s = CubicSpline::new(0.0, h, &y);
            (0..=997)
                .map(|j| j as f64 / 997.0)
                .map(|x| (s.eval(x).unwrap() - (3.0 * x).sin()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(16) / err(32);
        assert!(ratio > 12.0, "{ratio}");
    }
}
