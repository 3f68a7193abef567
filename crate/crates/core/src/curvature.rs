//! Curvature diagnostics of a conformal metric: the Q-curvature density
//! (-Delta)^{n/2} u = Q e^{nu}, pointwise Q and scalar curvature, the total
//! Q-curvature integral and its normalized value alpha_0, and the sign
//! behaviour of the scalar curvature near infinity.

use crate::error::{Error, Result};
use crate::numerics::quad;
use crate::numerics::{dimension_constants, RadialGrid};
use crate::operators::{self, OperatorResult};
use crate::potential::TotalMass;
use crate::profiles::{ConformalMetric, RadialProfile, TailKind};

/// Q-curvature density (-Delta)^{n/2} u on the grid.
pub fn q_density(metric: &ConformalMetric, grid: &RadialGrid) -> Result<OperatorResult> {
    operators::polyharmonic(metric, grid)
}

/// Scalar curvature R_g = 2(n-1) e^{-2u} (-Delta u - (n-2)/2 |grad u|^2).
pub fn scalar_curvature(metric: &ConformalMetric, r: f64) -> f64 {
    let n = metric.n as f64;
    2.0 * (n - 1.0) * (-2.0 * metric.u.value(r)).exp() * scalar_sign_factor(metric, r)
}

/// The sign-carrying factor -Delta u - (n-2)/2 (u')^2. Shares the sign of
/// R_g but stays representable where e^{-2u} under- or overflows.
pub fn scalar_sign_factor(metric: &ConformalMetric, r: f64) -> f64 {
    let n = metric.n as f64;
    let du = if r == 0.0 { 0.0 } else { metric.u.d1(r) };
    -operators::radial_laplacian(&metric.u, r, metric.n) - (n - 2.0) / 2.0 * du * du
}

/// Density samples with the sub-noise values suppressed, plus a bound on the
/// mass that suppression could have hidden.
pub(crate) fn clean_density_profile(res: &OperatorResult, n: usize) -> (RadialProfile, f64) {
    let radii = res.grid.nodes();
    let consts = dimension_constants(n as i64).expect("dimension validated upstream");
    let mut suppressed_mass_bound = 0.0;
    let mut clean = Vec::with_capacity(radii.len());
    for (i, (&v, &e)) in res.values.iter().zip(&res.error_estimates).enumerate() {
        let floor = 3.0 * e + 1e-14;
        if v.abs() < floor {
            clean.push(0.0);
            // Shell measure around this node.
            let lo = if i == 0 {
                0.0
            } else {
                (radii[i - 1] * radii[i]).sqrt()
            };
            let hi = if i + 1 == radii.len() {
                radii[i]
            } else {
                (radii[i] * radii[i + 1]).sqrt()
            };
            let shell =
                consts.sphere_volume_n_minus_1 / n as f64 * (hi.powi(n as i32) - lo.powi(n as i32));
            suppressed_mass_bound += floor * shell;
        } else {
            clean.push(v);
        }
    }
    let profile = profile_from_samples(radii, clean);
    (profile, suppressed_mass_bound)
}

/// Build an interpolating profile (spline in ln r) from grid samples.
pub(crate) fn profile_from_samples(radii: &[f64], values: Vec<f64>) -> RadialProfile {
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let s = crate::profiles::spline::CubicSpline::new(xs.clone(), values.clone());
    let v1: Vec<f64> = xs
        .iter()
        .zip(radii)
        .map(|(&x, &r)| s.eval_d1(x) / r)
        .collect();
    let v2: Vec<f64> = xs
        .iter()
        .zip(radii)
        .map(|(&x, &r)| (s.eval_d2(x) - s.eval_d1(x)) / (r * r))
        .collect();
    RadialProfile::from_tabulated(radii, values, v1, v2, None)
}

/// Total Q-curvature \int Q e^{nu} dx with tail correction, and alpha_0.
pub fn total_q(metric: &ConformalMetric) -> Result<TotalMass> {
    total_q_on(metric, &RadialGrid::default_grid())
}

pub fn total_q_on(metric: &ConformalMetric, grid: &RadialGrid) -> Result<TotalMass> {
    let n = metric.n;
    let consts = dimension_constants(n as i64)?;
    let res = q_density(metric, grid)?;
    let (density, _suppressed) = clean_density_profile(&res, n);

    // Integrability of the density tail.
    let t = density.tail;
    let tail_ok = match t.kind {
        TailKind::Power => {
            t.is_zero() || (t.offset == 0.0 && t.leading_exponent + t.band < -(n as f64))
        }
        TailKind::GaussianType => t.offset == 0.0,
        _ => false,
    };
    if !tail_ok {
        return Err(Error::FiniteTotalQViolated {
            tail_exponent: t.leading_exponent,
        });
    }

    let radii = grid.nodes();
    let r0 = radii[0];
    let r_max = *radii.last().unwrap();
    // Head: the density is smooth at the origin.
    let head = density.value(r0) * r0.powi(n as i32) / n as f64;
    // Integrate segment by segment between grid nodes; a single adaptive
    // pass over seven decades can miss localized densities entirely.
    let mut body = quad::Quadrature {
        value: 0.0,
        abs_error: 0.0,
        evals: 0,
    };
    for w in radii.windows(2) {
        let rough = density.value(w[0]).abs().max(density.value(w[1]).abs())
            * (w[1] - w[0])
            * w[1].powi(n as i32 - 1);
        let seg_tol = 1e-11 / radii.len() as f64 + 1e-12 * rough;
        let q = quad::integrate_radial(|s| density.value(s), n, w[0], w[1], seg_tol)?;
        body = body.merge(q);
    }
    // Tail in closed form under the fitted power law.
    let tail_mass = if t.is_zero() {
        0.0
    } else {
        let p = t.leading_exponent + n as f64;
        -t.leading_coefficient * r_max.powf(p) / p
    };
    let integral = consts.sphere_volume_n_minus_1 * (head + body.value + tail_mass);
    Ok(TotalMass {
        integral,
        alpha: consts.normalization * integral,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarSignClass {
    /// R_g >= 0 from some radius on (within numerical dead-band).
    NonnegativeNearInfinity,
    /// R_g dips below zero but its negative part stays bounded on the grid.
    BoundedBelow,
    /// The negative part of R_g grows along the grid tail.
    UnboundedBelowNumerically,
}

#[derive(Debug, Clone)]
pub struct ScalarSignReport {
    pub min_scalar: f64,
    pub min_radius: f64,
    /// Smallest grid radius beyond which the sign factor keeps one sign.
    pub sign_radius: Option<f64>,
    pub classification: ScalarSignClass,
    pub scalar: Vec<f64>,
}

/// Classify the sign of R_g near infinity on the grid. The classification
/// uses the un-exponentiated sign factor, which keeps the sign information
/// where e^{-2u} underflows.
pub fn scalar_sign_profile(metric: &ConformalMetric, grid: &RadialGrid) -> ScalarSignReport {
    let radii = grid.nodes();
    let scalar: Vec<f64> = radii.iter().map(|&r| scalar_curvature(metric, r)).collect();
    let factor: Vec<f64> = radii
        .iter()
        .map(|&r| scalar_sign_factor(metric, r))
        .collect();
    let fscale = factor.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let eps = 1e-9 * (1.0 + fscale);

    let (mut min_scalar, mut min_radius) = (f64::INFINITY, radii[0]);
    for (&r, &v) in radii.iter().zip(&scalar) {
        if v < min_scalar {
            min_scalar = v;
            min_radius = r;
        }
    }

    // Walk back from the tail while the sign stays consistent.
    let last_sign = factor
        .iter()
        .rev()
        .find(|v| v.abs() > eps)
        .map(|v| v.signum())
        .unwrap_or(0.0);
    let mut start = 0usize;
    for i in (0..factor.len()).rev() {
        let v = factor[i];
        let compatible = if last_sign >= 0.0 {
            v >= -eps
        } else {
            v <= eps
        };
        if !compatible {
            start = i + 1;
            break;
        }
    }
    let sign_radius = if start < radii.len() {
        Some(radii[start])
    } else {
        None
    };

    let classification = if last_sign >= 0.0 {
        ScalarSignClass::NonnegativeNearInfinity
    } else {
        // Does the negative part of R_g grow along the tail?
        let neg: Vec<(f64, f64)> = radii
            .iter()
            .zip(&scalar)
            .filter(|(_, &v)| v < 0.0 && v.is_finite())
            .map(|(&r, &v)| (r, -v))
            .collect();
        let growing = if neg.len() >= 8 {
            crate::numerics::fit_loglog_slope(&neg, crate::numerics::WindowPolicy::default())
                .map(|f| f.slope > 0.2)
                .unwrap_or(false)
        } else {
            false
        };
        if growing {
            ScalarSignClass::UnboundedBelowNumerically
        } else {
            ScalarSignClass::BoundedBelow
        }
    };

    ScalarSignReport {
        min_scalar,
        min_radius,
        sign_radius,
        classification,
        scalar,
    }
}

/// Full curvature summary of a metric on a grid.
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    pub grid: RadialGrid,
    pub q_density: Vec<f64>,
    /// Q = density * e^{-nu}; underflowed entries are clamped to zero and
    /// counted in `q_underflow_count`.
    pub q: Vec<f64>,
    pub q_underflow_count: usize,
    pub scalar: Vec<f64>,
    pub total_q: f64,
    pub alpha0: f64,
    pub min_scalar: f64,
    pub scalar_sign_radius: Option<f64>,
    pub scalar_class: ScalarSignClass,
}

pub fn curvature_report(metric: &ConformalMetric, grid: &RadialGrid) -> Result<CurvatureReport> {
    let res = q_density(metric, grid)?;
    let total = total_q_on(metric, grid)?;
    let sign = scalar_sign_profile(metric, grid);
    let n = metric.n as f64;
    let mut q = Vec::with_capacity(res.values.len());
    let mut underflow = 0usize;
    for (&r, &dens) in grid.nodes().iter().zip(&res.values) {
        let e = (-n * metric.u.value(r)).exp();
        if e == 0.0 || !e.is_finite() {
            underflow += 1;
            q.push(0.0);
        } else {
            q.push(dens * e);
        }
    }
    Ok(CurvatureReport {
        grid: grid.clone(),
        q_density: res.values,
        q,
        q_underflow_count: underflow,
        scalar: sign.scalar.clone(),
        total_q: total.integral,
        alpha0: total.alpha,
        min_scalar: sign.min_scalar,
        scalar_sign_radius: sign.sign_radius,
        scalar_class: sign.classification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::potential_profile;
    use crate::profiles::{builtin_profile, composite_profile, Family};
    use std::f64::consts::PI;

    fn metric(n: usize, family: Family) -> ConformalMetric {
        ConformalMetric::new(n, builtin_profile(family).unwrap()).unwrap()
    }

    fn test_grid() -> RadialGrid {
        RadialGrid::geometric(1e-3, 1e4, 141).unwrap()
    }

    #[test]
    fn q_density_of_flat_is_zero() {
        let m = metric(3, Family::Flat);
        let res = q_density(&m, &test_grid()).unwrap();
        for v in res.values {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn q_density_nonnormal_matches_sphere_multiple() {
        // (-Delta)^{3/2}(-beta log(1+r^2) + r^2) = beta 16/(1+r^2)^3.
        let beta = 0.5;
        let m = metric(3, Family::Nonnormal { beta });
        let g = RadialGrid::geometric(0.05, 20.0, 12).unwrap();
        let res = q_density(&m, &g).unwrap();
        for (&r, &v) in g.nodes().iter().zip(&res.values) {
            let want = beta * 16.0 / (1.0 + r * r).powi(3);
            assert!(
                (v - want).abs() < 1e-3 * want,
                "r={r}: got {v}, want {want}"
            );
        }
    }

    #[test]
    fn q_density_sphere_n4() {
        let m = metric(4, Family::Sphere);
        let g = test_grid();
        let res = q_density(&m, &g).unwrap();
        for (&r, &v) in g.nodes().iter().zip(&res.values) {
            let want = 6.0 * (2.0 / (1.0 + r * r)).powi(4);
            assert!(
                (v - want).abs() < 1e-6 * want.max(1e-12),
                "r={r}: got {v}, want {want}"
            );
        }
    }

    #[test]
    fn scalar_curvature_spot_values() {
        let flat = metric(3, Family::Flat);
        assert_eq!(scalar_curvature(&flat, 2.0), 0.0);

        let sph = metric(3, Family::Sphere);
        for r in [0.0, 1.0, 5.0] {
            assert!(
                (scalar_curvature(&sph, r) - 6.0).abs() < 1e-8,
                "at r={r}: {}",
                scalar_curvature(&sph, r)
            );
        }

        let mono = metric(3, Family::Monomial { k: 1 });
        assert!((scalar_curvature(&mono, 0.0) + 24.0).abs() < 1e-8);
        // general radius: R_g = 4 e^{-2r^2} (-6 - 2 r^2)
        let r: f64 = 1.3;
        let want = 4.0 * (-2.0 * r * r).exp() * (-6.0 - 2.0 * r * r);
        assert!((scalar_curvature(&mono, r) - want).abs() < 1e-8 * want.abs());
    }

    #[test]
    fn total_q_area_law_nonnormal() {
        // integral = (n-1)! |S^n| beta = 4 pi^2 beta at n = 3.
        let beta = 1.0;
        let m = metric(3, Family::Nonnormal { beta });
        let t = total_q(&m).unwrap();
        let want = 4.0 * PI * PI * beta;
        assert!(
            (t.integral - want).abs() < 0.01 * want,
            "integral {} vs {want}",
            t.integral
        );
        assert!((t.alpha - 2.0 * beta).abs() < 0.01 * 2.0 * beta);
    }

    #[test]
    fn total_q_linearity_in_beta() {
        let mut ratios = Vec::new();
        for beta in [0.25, 0.5, 1.0] {
            let m = metric(3, Family::Nonnormal { beta });
            let t = total_q_on(&m, &test_grid()).unwrap();
            ratios.push(t.integral / beta);
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        for r in &ratios {
            assert!((r - mean).abs() < 1e-3 * mean, "ratios {ratios:?}");
        }
    }

    #[test]
    fn total_q_of_flat_is_zero() {
        let m = metric(3, Family::Flat);
        let t = total_q(&m).unwrap();
        assert!(t.integral.abs() < 1e-8, "integral {}", t.integral);
    }

    #[test]
    fn total_q_of_potential_metric_recovers_bump_mass() {
        // u = L(f) with alpha = 0.5: the polyharmonic operator returns f,
        // whose normalized mass must come back.
        let f = builtin_profile(Family::Bump {
            alpha: 0.5,
            center: 1.0,
            width: 0.5,
            n: 3,
        })
        .unwrap();
        let u = potential_profile(&f, 3).unwrap();
        let m = ConformalMetric::new(3, u).unwrap();
        let t = total_q(&m).unwrap();
        assert!((t.alpha - 0.5).abs() < 1e-2, "alpha {}", t.alpha);
    }

    #[test]
    fn total_q_additivity_polynomial_plus_potential() {
        // u = r^2 + L(f): the polynomial part is annihilated, so total Q
        // equals the bump mass.
        let f = builtin_profile(Family::Bump {
            alpha: 0.3,
            center: 1.0,
            width: 0.5,
            n: 3,
        })
        .unwrap();
        let pot = potential_profile(&f, 3).unwrap();
        let r2 = builtin_profile(Family::Monomial { k: 1 }).unwrap();
        let u = composite_profile(&[(r2, 1.0), (pot, 1.0)]).unwrap();
        let m = ConformalMetric::new(3, u).unwrap();
        let t = total_q(&m).unwrap();
        assert!(
            (t.alpha - 0.3).abs() < 0.01 * 0.3 + 5e-3,
            "alpha {}",
            t.alpha
        );
    }

    #[test]
    fn conformal_bookkeeping_q_times_weight() {
        let m = metric(3, Family::Sphere);
        let g = RadialGrid::geometric(0.1, 1e4, 100).unwrap();
        let rep = curvature_report(&m, &g).unwrap();
        for ((&r, &q), &dens) in g.nodes().iter().zip(&rep.q).zip(&rep.q_density) {
            let nu = 3.0 * m.u.value(r);
            if nu < 600.0 {
                assert!(
                    (q * nu.exp() - dens).abs() < 1e-8 * dens.abs().max(1e-12),
                    "at r={r}"
                );
            }
        }
        // Round sphere: Q = 2, asserted where the density is resolved well
        // above the quadrature noise floor.
        for (&r, &q) in g.nodes().iter().zip(&rep.q) {
            if r <= 3.0 {
                assert!((q - 2.0).abs() < 2e-3, "Q at r={r}: {q}");
            }
        }
        assert!((rep.alpha0 - 2.0).abs() < 0.01, "alpha0 {}", rep.alpha0);
    }

    #[test]
    fn scalar_sign_sphere_nonnegative() {
        let m = metric(3, Family::Sphere);
        let rep = scalar_sign_profile(&m, &test_grid());
        assert_eq!(rep.classification, ScalarSignClass::NonnegativeNearInfinity);
        assert!((rep.min_scalar - 6.0).abs() < 1e-6);
    }

    #[test]
    fn scalar_sign_monomial_bounded_below() {
        let m = metric(3, Family::Monomial { k: 1 });
        let rep = scalar_sign_profile(&m, &test_grid());
        assert_eq!(rep.classification, ScalarSignClass::BoundedBelow);
        assert!(
            (rep.min_scalar + 24.0).abs() < 0.1,
            "min {}",
            rep.min_scalar
        );
    }

    #[test]
    fn scalar_sign_nonnormal_bounded_below() {
        let m = metric(3, Family::Nonnormal { beta: 1.0 });
        let rep = scalar_sign_profile(&m, &test_grid());
        assert_eq!(rep.classification, ScalarSignClass::BoundedBelow);
    }

    #[test]
    fn scalar_sign_flat_nonnegative() {
        let m = metric(3, Family::Flat);
        let rep = scalar_sign_profile(&m, &test_grid());
        assert_eq!(rep.classification, ScalarSignClass::NonnegativeNearInfinity);
        assert_eq!(rep.min_scalar, 0.0);
    }
}
