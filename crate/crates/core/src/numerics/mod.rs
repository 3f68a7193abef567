//! Numerical substrate: radial grids, dimensional constants, slope and
//! polynomial fits. Quadrature lives in [`quad`].

pub mod quad;

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Strictly increasing positive radii. Geometric by default so that
/// asymptotic fits see uniformly spaced points in log r.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
}

impl RadialGrid {
    pub fn geometric(r_min: f64, r_max: f64, count: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min) {
            return Err(Error::InvalidSpec(format!(
                "geometric grid needs 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        if count < 8 {
            return Err(Error::InvalidSpec(format!(
                "grid needs >= 8 nodes, got {count}"
            )));
        }
        let log_step = (r_max / r_min).ln() / (count as f64 - 1.0);
        let nodes = (0..count)
            .map(|i| r_min * (log_step * i as f64).exp())
            .collect();
        Ok(RadialGrid { nodes })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 8 {
            return Err(Error::InvalidSpec(format!(
                "grid needs >= 8 nodes, got {}",
                nodes.len()
            )));
        }
        if nodes[0] <= 0.0 || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpec(
                "grid nodes must be strictly positive and strictly increasing".into(),
            ));
        }
        Ok(RadialGrid { nodes })
    }

    /// Default grid used across the pipeline: 241 geometric nodes on [1e-3, 1e4].
    pub fn default_grid() -> Self {
        RadialGrid::geometric(1e-3, 1e4, 241).expect("default grid parameters are valid")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Constant ratio of a geometric grid, if the grid is geometric to 1e-12
    /// relative accuracy.
    pub fn geometric_ratio(&self) -> Option<f64> {
        let q = self.nodes[1] / self.nodes[0];
        for w in self.nodes.windows(2) {
            let qi = w[1] / w[0];
            if (qi - q).abs() > 1e-12 * q {
                return None;
            }
        }
        Some(q)
    }
}

/// Exact gamma at integer or half-integer argument 2*a = two_a.
pub(crate) fn gamma_half(two_a: u32) -> f64 {
    assert!(two_a >= 1);
    if two_a % 2 == 0 {
        factorial(two_a / 2 - 1)
    } else {
        // Gamma(m + 1/2) = (2m)! / (4^m m!) sqrt(pi)
        let m = (two_a - 1) / 2;
        factorial(2 * m) / (4.0f64.powi(m as i32) * factorial(m)) * PI.sqrt()
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k as u64).map(|i| i as f64).product()
}

/// Sphere and ball measures plus the potential normalization for a given n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionConstants {
    pub n: usize,
    /// Surface measure of the unit n-sphere (the sphere in R^{n+1}).
    pub sphere_volume_n: f64,
    /// Surface measure of the unit (n-1)-sphere, i.e. the sphere in R^n.
    pub sphere_volume_n_minus_1: f64,
    /// Volume of the unit ball in R^n.
    pub ball_volume: f64,
    pub factorial_n_minus_1: f64,
    /// 2 / ((n-1)! |S^n|), the prefactor of the logarithmic potential.
    pub normalization: f64,
}

pub fn dimension_constants(n: i64) -> Result<DimensionConstants> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let n = n as usize;
    let sphere_n = 2.0 * PI.powf((n as f64 + 1.0) / 2.0) / gamma_half(n as u32 + 1);
    let sphere_nm1 = 2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n as u32);
    let fact = factorial(n as u32 - 1);
    Ok(DimensionConstants {
        n,
        sphere_volume_n: sphere_n,
        sphere_volume_n_minus_1: sphere_nm1,
        ball_volume: sphere_nm1 / n as f64,
        factorial_n_minus_1: fact,
        normalization: 2.0 / (fact * sphere_n),
    })
}

/// Window selection for asymptotic slope extraction. The limit superior in
/// the entropy definitions has no canonical finite-sample estimator; the
/// convention here (trailing fraction of the points, at least `min_points`)
/// is flagged in every report that consumes it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowPolicy {
    pub trailing_fraction: f64,
    pub min_points: usize,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy {
            trailing_fraction: 0.4,
            min_points: 8,
        }
    }
}

/// Least-squares slope over a trailing window, with a stability band from
/// sliding sub-windows.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Index range [start, end) of the points used.
    pub window: (usize, usize),
    pub residual_rms: f64,
    /// Max deviation of sub-window slopes from the full-window slope.
    pub stability: f64,
}

fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let m = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let mx = sx / m;
    let my = sy / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - (slope * x + intercept);
        ss += r * r;
    }
    (slope, intercept, (ss / m).sqrt())
}

/// Slope of log y against log x over the trailing window.
pub fn fit_loglog_slope(points: &[(f64, f64)], policy: WindowPolicy) -> Result<FitResult> {
    if points.len() < policy.min_points.max(8) {
        return Err(Error::InvalidSpec(format!(
            "log-log fit needs >= {} points, got {}",
            policy.min_points.max(8),
            points.len()
        )));
    }
    for w in points.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::InvalidSpec(
                "log-log fit needs strictly increasing x".into(),
            ));
        }
    }
    if let Some((x, y)) = points.iter().find(|(x, y)| *x <= 0.0 || *y <= 0.0) {
        return Err(Error::DomainError(format!(
            "log-log fit needs positive data, got ({x}, {y})"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|(x, _)| x.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, y)| y.ln()).collect();
    Ok(windowed_line_fit(&xs, &ys, policy))
}

/// Same window machinery for data that is already in (abscissa, ordinate)
/// form, e.g. a potential against log r.
pub fn fit_slope(points: &[(f64, f64)], policy: WindowPolicy) -> Result<FitResult> {
    if points.len() < policy.min_points.max(4) {
        return Err(Error::InvalidSpec(format!(
            "slope fit needs >= {} points, got {}",
            policy.min_points.max(4),
            points.len()
        )));
    }
    let xs: Vec<f64> = points.iter().map(|(x, _)| *x).collect();
    let ys: Vec<f64> = points.iter().map(|(_, y)| *y).collect();
    Ok(windowed_line_fit(&xs, &ys, policy))
}

fn windowed_line_fit(xs: &[f64], ys: &[f64], policy: WindowPolicy) -> FitResult {
    let len = xs.len();
    let want = ((len as f64) * policy.trailing_fraction).ceil() as usize;
    let w = want.max(policy.min_points).max(4).min(len);
    let start = len - w;
    let (slope, intercept, rms) = line_fit(&xs[start..], &ys[start..]);

    // Sliding sub-windows of half length quantify drift of the local slope.
    let sub = (w / 2).max(4).min(w);
    let mut stability = 0.0f64;
    if w > sub {
        let step = ((w - sub) / 3).max(1);
        let mut s0 = start;
        while s0 + sub <= len {
            let (sl, _, _) = line_fit(&xs[s0..s0 + sub], &ys[s0..s0 + sub]);
            stability = stability.max((sl - slope).abs());
            if s0 + sub == len {
                break;
            }
            s0 = (s0 + step).min(len - sub);
        }
    }
    FitResult {
        slope,
        intercept,
        window: (start, len),
        residual_rms: rms,
        stability,
    }
}

/// Least-squares fit in the even-monomial basis {1, r^2, ..., r^max_degree}.
#[derive(Debug, Clone, PartialEq)]
pub struct EvenPolyFit {
    /// coefficients[j] multiplies r^{2j}.
    pub coefficients: Vec<f64>,
    pub residual_rms: f64,
}

impl EvenPolyFit {
    pub fn eval(&self, r: f64) -> f64 {
        let r2 = r * r;
        let mut acc = 0.0;
        for &c in self.coefficients.iter().rev() {
            acc = acc * r2 + c;
        }
        acc
    }
}

pub fn fit_even_polynomial(points: &[(f64, f64)], max_degree: usize) -> Result<EvenPolyFit> {
    if max_degree % 2 != 0 {
        return Err(Error::InvalidSpec(format!(
            "max_degree must be even, got {max_degree}"
        )));
    }
    let k = max_degree / 2 + 1;
    if points.len() < k + 1 {
        return Err(Error::InvalidSpec(format!(
            "even-polynomial fit of degree {max_degree} needs >= {} points, got {}",
            k + 1,
            points.len()
        )));
    }
    let m = points.len();
    let r_scale = points.iter().map(|(r, _)| r.abs()).fold(0.0f64, f64::max);
    if r_scale == 0.0 {
        return Err(Error::IllPosedFit("all radii are zero".into()));
    }
    // Design matrix in the scaled basis ((r/r_scale)^2)^j, column-major.
    let mut a = vec![0.0f64; m * k];
    let mut rhs: Vec<f64> = points.iter().map(|(_, v)| *v).collect();
    for (i, (r, _)) in points.iter().enumerate() {
        let x = (r / r_scale) * (r / r_scale);
        let mut pw = 1.0;
        for j in 0..k {
            a[j * m + i] = pw;
            pw *= x;
        }
    }
    // Householder QR on the tall-skinny system.
    let mut rdiag = vec![0.0f64; k];
    for j in 0..k {
        let col = &a[j * m + j..(j + 1) * m];
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-13 {
            return Err(Error::IllPosedFit(
                "rank-deficient design matrix (duplicate or degenerate radii)".into(),
            ));
        }
        let alpha = if a[j * m + j] >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0f64; m - j];
        v[0] = a[j * m + j] - alpha;
        for i in 1..m - j {
            v[i] = a[j * m + j + i];
        }
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        a[j * m + j] = alpha;
        rdiag[j] = alpha;
        if vtv > 0.0 {
            for jj in j + 1..k {
                let mut dot = 0.0;
                for i in 0..m - j {
                    dot += v[i] * a[jj * m + j + i];
                }
                let beta = 2.0 * dot / vtv;
                for i in 0..m - j {
                    a[jj * m + j + i] -= beta * v[i];
                }
            }
            let mut dot = 0.0;
            for i in 0..m - j {
                dot += v[i] * rhs[j + i];
            }
            let beta = 2.0 * dot / vtv;
            for i in 0..m - j {
                rhs[j + i] -= beta * v[i];
            }
        }
    }
    // Back substitution on the k x k upper triangle.
    let mut coeffs = vec![0.0f64; k];
    for j in (0..k).rev() {
        let mut acc = rhs[j];
        for jj in j + 1..k {
            acc -= a[jj * m + j] * coeffs[jj];
        }
        if rdiag[j].abs() < 1e-13 {
            return Err(Error::IllPosedFit("singular triangular factor".into()));
        }
        coeffs[j] = acc / rdiag[j];
    }
    // Residual in original coordinates.
    let mut unscaled = vec![0.0f64; k];
    for j in 0..k {
        unscaled[j] = coeffs[j] / r_scale.powi(2 * j as i32);
    }
    let fit = EvenPolyFit {
        coefficients: unscaled,
        residual_rms: 0.0,
    };
    let mut ss = 0.0;
    for (r, v) in points {
        let d = v - fit.eval(*r);
        ss += d * d;
    }
    Ok(EvenPolyFit {
        residual_rms: (ss / m as f64).sqrt(),
        ..fit
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_n3() {
        let c = dimension_constants(3).unwrap();
        assert!((c.sphere_volume_n - 2.0 * PI * PI).abs() < 1e-12);
        assert!((c.sphere_volume_n_minus_1 - 4.0 * PI).abs() < 1e-12);
        assert!((c.ball_volume - 4.0 * PI / 3.0).abs() < 1e-12);
        assert_eq!(c.factorial_n_minus_1, 2.0);
    }

    #[test]
    fn constants_n2() {
        let c = dimension_constants(2).unwrap();
        assert!((c.sphere_volume_n - 4.0 * PI).abs() < 1e-12);
        assert_eq!(c.factorial_n_minus_1, 1.0);
        assert!((c.normalization - 1.0 / (2.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn constants_n4() {
        let c = dimension_constants(4).unwrap();
        assert!((c.sphere_volume_n - 8.0 * PI * PI / 3.0).abs() < 1e-12);
        assert_eq!(c.factorial_n_minus_1, 6.0);
    }

    #[test]
    fn normalization_identity_many_n() {
        for n in 2..=12 {
            let c = dimension_constants(n).unwrap();
            let p = c.normalization * c.factorial_n_minus_1 * c.sphere_volume_n;
            assert!((p - 2.0).abs() < 1e-14, "n={n}: got {p}");
            // |S^{n-1}| \int_0^1 r^{n-1} dr = omega_n
            let q = quad::integrate_radial(|_| 1.0, n as usize, 0.0, 1.0, 1e-14).unwrap();
            assert!((c.sphere_volume_n_minus_1 * q.value - c.ball_volume).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_dimension_rejected() {
        assert!(dimension_constants(1).is_err());
        assert!(dimension_constants(-3).is_err());
    }

    #[test]
    fn grid_geometric_ratio_constant() {
        let g = RadialGrid::geometric(1e-3, 1e4, 241).unwrap();
        assert_eq!(g.len(), 241);
        assert!(g.geometric_ratio().is_some());
        assert!((g.nodes()[0] - 1e-3).abs() < 1e-15);
        assert!((g.nodes()[240] - 1e4).abs() < 1e-8);
    }

    #[test]
    fn loglog_exact_power_law() {
        let pts: Vec<(f64, f64)> = (0..16)
            .map(|i| {
                let x = 10f64.powf(i as f64 * 0.25);
                (x, x * x)
            })
            .collect();
        let fit = fit_loglog_slope(&pts, WindowPolicy::default()).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-10, "slope {}", fit.slope);
        assert!(fit.stability < 1e-10);
    }

    #[test]
    fn loglog_slowly_converging_exponent() {
        // y = x^0.8 (1 + 1/log x) on [1e2, 1e6] approaches slope 0.8.
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let x = 10f64.powf(2.0 + 4.0 * i as f64 / 39.0);
                (x, x.powf(0.8) * (1.0 + 1.0 / x.ln()))
            })
            .collect();
        let fit = fit_loglog_slope(&pts, WindowPolicy::default()).unwrap();
        assert!((fit.slope - 0.8).abs() < 0.05, "slope {}", fit.slope);
    }

    #[test]
    fn loglog_constant_is_flat() {
        let pts: Vec<(f64, f64)> = (0..16).map(|i| (2f64.powi(i), 7.5)).collect();
        let fit = fit_loglog_slope(&pts, WindowPolicy::default()).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn loglog_rejects_nonpositive() {
        let pts: Vec<(f64, f64)> = (0..16).map(|i| (2f64.powi(i), -1.0)).collect();
        assert!(matches!(
            fit_loglog_slope(&pts, WindowPolicy::default()),
            Err(Error::DomainError(_))
        ));
    }

    #[test]
    fn even_poly_exact_quadratic() {
        let pts: Vec<(f64, f64)> = (1..=12)
            .map(|i| {
                let r = i as f64 * 0.5;
                (r, 3.0 + 2.0 * r * r)
            })
            .collect();
        let fit = fit_even_polynomial(&pts, 2).unwrap();
        assert!((fit.coefficients[0] - 3.0).abs() < 1e-10);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-12);
        assert!(fit.residual_rms < 1e-10);
    }

    #[test]
    fn even_poly_model_mismatch_reports_residual() {
        let pts: Vec<(f64, f64)> = (1..=20)
            .map(|i| {
                let r = 1.0 + 9.0 * (i as f64 - 1.0) / 19.0;
                (r, r * r * r)
            })
            .collect();
        let fit = fit_even_polynomial(&pts, 2).unwrap();
        assert!(fit.residual_rms > 1.0, "odd function should not be in span");
    }

    #[test]
    fn even_poly_degree_four_exact() {
        let pts: Vec<(f64, f64)> = (1..=10)
            .map(|i| {
                let r = i as f64 * 0.7;
                (r, 1.0 - r * r + 0.5 * r.powi(4))
            })
            .collect();
        let fit = fit_even_polynomial(&pts, 4).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-10);
        assert!((fit.coefficients[1] + 1.0).abs() < 1e-10);
        assert!((fit.coefficients[2] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn even_poly_duplicate_radii_ill_posed() {
        let pts = vec![(1.0, 1.0); 8];
        assert!(matches!(
            fit_even_polynomial(&pts, 4),
            Err(Error::IllPosedFit(_))
        ));
    }
}
