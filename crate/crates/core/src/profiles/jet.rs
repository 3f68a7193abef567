//! Truncated Taylor series ("jets") for exact higher-order derivatives of
//! the analytic profile families. A jet of length L at x0 stores the scaled
//! coefficients c_k = f^{(k)}(x0)/k! for k < L.

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub c: Vec<f64>,
}

impl Jet {
    pub fn constant(v: f64, len: usize) -> Jet {
        let mut c = vec![0.0; len];
        if len > 0 {
            c[0] = v;
        }
        Jet { c }
    }

    /// The identity function r |-> r expanded at x0.
    pub fn var(x0: f64, len: usize) -> Jet {
        let mut c = vec![0.0; len];
        if len > 0 {
            c[0] = x0;
        }
        if len > 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// f^{(k)}(x0), undoing the factorial scaling.
    pub fn derivative(&self, k: usize) -> f64 {
        if k >= self.c.len() {
            return 0.0;
        }
        let mut fact = 1.0;
        for i in 2..=k {
            fact *= i as f64;
        }
        self.c[k] * fact
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let len = self.len().min(other.len());
        Jet {
            c: (0..len).map(|k| self.c[k] + other.c[k]).collect(),
        }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let len = self.len().min(other.len());
        Jet {
            c: (0..len).map(|k| self.c[k] - other.c[k]).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            c: self.c.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut c = self.c.clone();
        c[0] += s;
        Jet { c }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let len = self.len().min(other.len());
        let mut c = vec![0.0; len];
        for k in 0..len {
            let mut acc = 0.0;
            for i in 0..=k {
                acc += self.c[i] * other.c[k - i];
            }
            c[k] = acc;
        }
        Jet { c }
    }

    pub fn recip(&self) -> Jet {
        let len = self.len();
        let mut c = vec![0.0; len];
        c[0] = 1.0 / self.c[0];
        for k in 1..len {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += self.c[j] * c[k - j];
            }
            c[k] = -acc / self.c[0];
        }
        Jet { c }
    }

    pub fn div(&self, other: &Jet) -> Jet {
        self.mul(&other.recip())
    }

    pub fn exp(&self) -> Jet {
        let len = self.len();
        let mut c = vec![0.0; len];
        c[0] = self.c[0].exp();
        for k in 1..len {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.c[j] * c[k - j];
            }
            c[k] = acc / k as f64;
        }
        Jet { c }
    }

    pub fn ln(&self) -> Jet {
        let len = self.len();
        let mut c = vec![0.0; len];
        c[0] = self.c[0].ln();
        for k in 1..len {
            let mut acc = 0.0;
            for j in 1..k {
                acc += j as f64 * c[j] * self.c[k - j];
            }
            c[k] = (self.c[k] - acc / k as f64) / self.c[0];
        }
        Jet { c }
    }

    pub fn powi(&self, p: u32) -> Jet {
        let mut acc = Jet::constant(1.0, self.len());
        let mut base = self.clone();
        let mut p = p;
        while p > 0 {
            if p & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            p >>= 1;
        }
        acc
    }

    /// Series derivative: the jet of f' (one order shorter).
    pub fn deriv(&self) -> Jet {
        let len = self.len().saturating_sub(1);
        Jet {
            c: (0..len).map(|k| (k + 1) as f64 * self.c[k + 1]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_derivatives() {
        // f = exp(2r) at r = 0.3: f^{(k)} = 2^k exp(0.6)
        let r = Jet::var(0.3, 6);
        let f = r.scale(2.0).exp();
        for k in 0..6 {
            let expected = 2f64.powi(k as i32) * (0.6f64).exp();
            assert!((f.derivative(k) - expected).abs() < 1e-12 * expected.abs());
        }
    }

    #[test]
    fn ln_of_one_plus_r_squared() {
        // f = ln(1+r^2) at r = 2: f' = 2r/(1+r^2), f'' = 2(1-r^2)/(1+r^2)^2
        let r = Jet::var(2.0, 4);
        let f = r.mul(&r).add_scalar(1.0).ln();
        assert!((f.value() - 5.0f64.ln()).abs() < 1e-14);
        assert!((f.derivative(1) - 4.0 / 5.0).abs() < 1e-14);
        assert!((f.derivative(2) - 2.0 * (1.0 - 4.0) / 25.0).abs() < 1e-14);
    }

    #[test]
    fn recip_matches_powers() {
        let r = Jet::var(1.5, 5);
        let g = r.recip();
        // (1/r)^{(k)} = (-1)^k k! / r^{k+1}
        for k in 0..5 {
            let mut fact = 1.0;
            for i in 2..=k {
                fact *= i as f64;
            }
            let expected = if k % 2 == 0 { 1.0 } else { -1.0 } * fact / 1.5f64.powi(k as i32 + 1);
            assert!((g.derivative(k) - expected).abs() < 1e-12 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn division_and_powers_compose() {
        // f = r^3 / (1 + r)^2 at r = 0.7, checked against a hand derivative.
        let r = Jet::var(0.7, 3);
        let f = r.powi(3).div(&r.add_scalar(1.0).powi(2));
        let v = 0.7f64;
        assert!((f.value() - v.powi(3) / (1.0 + v).powi(2)).abs() < 1e-14);
        let d1 =
            (3.0 * v.powi(2) * (1.0 + v).powi(2) - v.powi(3) * 2.0 * (1.0 + v)) / (1.0 + v).powi(4);
        assert!((f.derivative(1) - d1).abs() < 1e-13);
    }
}
