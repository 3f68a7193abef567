//! Natural cubic spline on arbitrary strictly increasing nodes.

#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the nodes (natural boundary: zero at the ends).
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> CubicSpline {
        assert_eq!(xs.len(), ys.len());
        assert!(xs.len() >= 3, "spline needs at least 3 nodes");
        let n = xs.len();
        // Tridiagonal system for the natural spline moments.
        let mut sub = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            sub[i] = h0 / 6.0;
            diag[i] = (h0 + h1) / 3.0;
            sup[i] = h1 / 6.0;
            rhs[i] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
        }
        // Thomas algorithm.
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        c[0] = sup[0] / diag[0];
        d[0] = rhs[0] / diag[0];
        for i in 1..n {
            let w = diag[i] - sub[i] * c[i - 1];
            c[i] = sup[i] / w;
            d[i] = (rhs[i] - sub[i] * d[i - 1]) / w;
        }
        let mut m = vec![0.0; n];
        m[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        CubicSpline { xs, ys, m }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(0) => 0,
            Err(i) if i >= self.xs.len() => self.xs.len() - 2,
            Err(i) => i - 1,
        }
    }

    /// Value at x; linear continuation outside the node range.
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn eval_d1(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        (self.ys[i + 1] - self.ys[i]) / h
            + ((1.0 - 3.0 * a * a) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }

    pub fn eval_d2(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        a * self.m[i] + b * self.m[i + 1]
    }
}

/// Piecewise-linear interpolant, for low-order sampled data.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearInterp {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl LinearInterp {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> LinearInterp {
        assert_eq!(xs.len(), ys.len());
        LinearInterp { xs, ys }
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(0) => 0,
            Err(i) if i >= self.xs.len() => self.xs.len() - 2,
            Err(i) => i - 1,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.ys[i] * (1.0 - t) + self.ys[i + 1] * t
    }

    pub fn eval_d1(&self, x: f64) -> f64 {
        let i = self.segment(x);
        (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_reproduces_cubic() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powi(3) - x).collect();
        let s = CubicSpline::new(xs, ys);
        // interior accuracy (natural BC pollutes the end segments)
        for i in 5..30 {
            let x = 0.1 * i as f64 + 0.05;
            assert!((s.eval(x) - (x.powi(3) - x)).abs() < 2e-4);
            assert!((s.eval_d1(x) - (3.0 * x * x - 1.0)).abs() < 2e-3);
        }
    }

    #[test]
    fn spline_interpolates_nodes_exactly() {
        let xs = vec![0.0, 1.0, 2.5, 3.0, 4.2, 5.0];
        let ys = vec![1.0, -2.0, 0.5, 3.0, 3.0, -1.0];
        let s = CubicSpline::new(xs.clone(), ys.clone());
        for (x, y) in xs.iter().zip(&ys) {
            assert!((s.eval(*x) - y).abs() < 1e-12);
        }
    }
}
