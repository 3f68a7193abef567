//! The logarithmic potential
//!
//!   L(f)(x) = 2/((n-1)! |S^n|) \int log(|y|/|x-y|) f(y) dy,
//!
//! its radial reduction through spherical means of the kernel, its gradient
//! and Laplacian through differentiated kernels, ball averages, and the
//! normalized total mass alpha.

use crate::error::{Error, Result};
use crate::numerics::quad::{self, Quadrature};
use crate::numerics::{dimension_constants, gamma_half, RadialGrid};
use crate::operators;
use crate::profiles::{decay_check, sampled_profile, Membership, RadialProfile, TailModel};
use std::f64::consts::PI;

/// Spherical means of the logarithmic and related kernels at radius pairs.
/// Closed forms for n = 2 and n = 3; polar-angle quadrature otherwise.
#[derive(Debug, Clone, Copy)]
pub struct LogKernel {
    pub n: usize,
}

impl LogKernel {
    pub fn new(n: usize) -> Result<LogKernel> {
        if n < 2 {
            return Err(Error::InvalidDimension(n as i64));
        }
        Ok(LogKernel { n })
    }

    /// A(r, s): mean of log|r e1 - s w| over the unit sphere.
    pub fn a(&self, r: f64, s: f64) -> f64 {
        if r == 0.0 && s == 0.0 {
            return f64::NEG_INFINITY;
        }
        let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
        match self.n {
            2 => hi.ln(),
            3 => {
                let rho = lo / hi;
                if rho < 0.5 {
                    // ln(max) + sum rho^{2k} / ((2k-1) 2k (2k+1)); the closed
                    // form cancels catastrophically for separated radii.
                    hi.ln() + a3_series(rho)
                } else {
                    let p = r + s;
                    let q = r - s;
                    let num = p * p * (2.0 * p.ln() - 1.0)
                        - if q == 0.0 {
                            0.0
                        } else {
                            q * q * (2.0 * q.abs().ln() - 1.0)
                        };
                    num / (8.0 * r * s)
                }
            }
            _ => self.mean_by_quadrature(r, s, |d2| 0.5 * d2.ln()),
        }
    }

    /// dA/dr(r, s).
    pub fn da_dr(&self, r: f64, s: f64) -> f64 {
        match self.n {
            2 => {
                if r > s {
                    1.0 / r
                } else {
                    0.0
                }
            }
            3 => {
                let rho = r.min(s) / r.max(s);
                if rho < 0.5 {
                    if r < s {
                        // d/dr [ln s + sum (r/s)^{2k} c_{2k}]
                        a3_series_d(rho) / s
                    } else {
                        // d/dr [ln r + sum (s/r)^{2k} c_{2k}]
                        (1.0 - rho * a3_series_d(rho)) / r
                    }
                } else {
                    let p = r + s;
                    let q = r - s;
                    let dnum = p * p.ln() - if q == 0.0 { 0.0 } else { q * q.abs().ln() };
                    dnum / (2.0 * r * s) - self.a(r, s) / r
                }
            }
            _ => self.da_dr_quadrature(r, s),
        }
    }

    /// Mean of |r e1 - s w|^{-2}; log-singular in s at s = r.
    pub fn m2(&self, r: f64, s: f64) -> f64 {
        let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
        if lo <= 1e-12 * hi {
            return 1.0 / (hi * hi);
        }
        match self.n {
            3 => (2.0 * lo / (hi - lo)).ln_1p() / (2.0 * r * s),
            _ => self.mean_by_quadrature(r, s, |d2| 1.0 / d2),
        }
    }

    /// Spherical mean of g(|r e1 - s w|^2) by polar-angle quadrature.
    fn mean_by_quadrature<G: Fn(f64) -> f64 + Copy>(&self, r: f64, s: f64, g: G) -> f64 {
        let n = self.n;
        let a = r * r + s * s;
        let b = 2.0 * r * s;
        let ratio = sphere_ratio(n);
        let f = move |theta: f64| theta.sin().powi(n as i32 - 2) * g(a - b * theta.cos());
        // Integrand may peak or have an integrable log singularity toward
        // theta = 0 when r ~ s; split there.
        let peak = ((r - s).abs() / (r * s).sqrt().max(1e-300)).min(1.0);
        let q1 = quad::integrate(f, 0.0, peak, 1e-12)
            .map(|q| q.value)
            .unwrap_or_else(best_estimate);
        let q2 = quad::integrate(f, peak, PI, 1e-12)
            .map(|q| q.value)
            .unwrap_or_else(best_estimate);
        ratio * (q1 + q2)
    }

    fn da_dr_quadrature(&self, r: f64, s: f64) -> f64 {
        let n = self.n;
        let a = r * r + s * s;
        let b = 2.0 * r * s;
        let ratio = sphere_ratio(n);
        let f = move |theta: f64| {
            let ct = theta.cos();
            theta.sin().powi(n as i32 - 2) * (r - s * ct) / (a - b * ct)
        };
        let peak = ((r - s).abs() / (r * s).sqrt().max(1e-300)).min(1.0);
        let q1 = quad::integrate(f, 0.0, peak, 1e-12)
            .map(|q| q.value)
            .unwrap_or_else(best_estimate);
        let q2 = quad::integrate(f, peak, PI, 1e-12)
            .map(|q| q.value)
            .unwrap_or_else(best_estimate);
        ratio * (q1 + q2)
    }
}

/// Salvage the carried estimate when an angular quadrature hits its budget;
/// the error is already below any tolerance used on the radial level.
fn best_estimate(e: Error) -> f64 {
    match e {
        Error::QuadratureFailure { estimate, .. } => estimate,
        _ => f64::NAN,
    }
}

/// sum_{k>=1} rho^{2k} / ((2k-1) 2k (2k+1)), the separated-radii expansion
/// of the three-dimensional log-kernel mean.
fn a3_series(rho: f64) -> f64 {
    let rho2 = rho * rho;
    let mut pw = rho2;
    let mut acc = 0.0;
    let mut k = 1.0f64;
    loop {
        let add = pw / ((2.0 * k - 1.0) * 2.0 * k * (2.0 * k + 1.0));
        acc += add;
        if add < 1e-18 || k > 40.0 {
            return acc;
        }
        pw *= rho2;
        k += 1.0;
    }
}

/// d/d(rho) of a3_series: sum rho^{2k-1} / ((2k-1)(2k+1)).
fn a3_series_d(rho: f64) -> f64 {
    let rho2 = rho * rho;
    let mut pw = rho;
    let mut acc = 0.0;
    let mut k = 1.0f64;
    loop {
        let add = pw / ((2.0 * k - 1.0) * (2.0 * k + 1.0));
        acc += add;
        if add < 1e-18 || k > 40.0 {
            return acc;
        }
        pw *= rho2;
        k += 1.0;
    }
}

/// |S^{n-2}| / |S^{n-1}|, the normalizer of polar-angle means.
fn sphere_ratio(n: usize) -> f64 {
    let snm1 = 2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n as u32);
    let snm2 = if n == 2 {
        2.0
    } else {
        2.0 * PI.powf((n as f64 - 1.0) / 2.0) / gamma_half(n as u32 - 1)
    };
    snm2 / snm1
}

/// Mean of log|x - y| over the sphere |y| = s at |x| = r.
pub fn log_kernel(r: f64, s: f64, n: usize) -> Result<f64> {
    if r == 0.0 && s == 0.0 {
        return Err(Error::DomainError(
            "log kernel undefined at r = s = 0".into(),
        ));
    }
    let k = LogKernel::new(n)?;
    if n > 3 {
        return Ok(k.mean_by_quadrature(r, s, |d2| 0.5 * d2.ln()));
    }
    Ok(k.a(r, s))
}

/// Integral \int f dx over R^n and its normalized value
/// alpha = 2/((n-1)! |S^n|) \int f dx.
#[derive(Debug, Clone, Copy)]
pub struct TotalMass {
    pub integral: f64,
    pub alpha: f64,
}

pub fn alpha_of(f: &RadialProfile, n: usize) -> Result<TotalMass> {
    let consts = dimension_constants(n as i64)?;
    let decay = decay_check(f, n)?;
    if decay.integrable == Membership::No {
        return Err(Error::OperandNotInDomain(format!(
            "density is not integrable (tail {:?} exponent {})",
            f.tail.kind, f.tail.leading_exponent
        )));
    }
    let split = f.compact_support().map(|(_, b)| b).unwrap_or(100.0);
    let head = quad::integrate_decades(|s| f.value(s) * s.powi(n as i32 - 1), 0.0, split, 1e-11)?;
    let tail = if f.tail.is_zero() && f.compact_support().is_some() {
        Quadrature {
            value: 0.0,
            abs_error: 0.0,
            evals: 0,
        }
    } else {
        quad::integrate_radial_to_inf(|s| f.value(s), n, split, 1e-11)?
    };
    let integral = consts.sphere_volume_n_minus_1 * (head.value + tail.value);
    Ok(TotalMass {
        integral,
        alpha: consts.normalization * integral,
    })
}

fn potential_factor(n: usize) -> Result<f64> {
    let c = dimension_constants(n as i64)?;
    Ok(c.normalization * c.sphere_volume_n_minus_1)
}

/// Split points for the radial integration of kernel(s) * f(s) s^{n-1}.
fn split_points(f: &RadialProfile, r: f64) -> (Vec<f64>, f64) {
    let mut cuts = vec![0.0f64];
    if let Some((a, b)) = f.compact_support() {
        cuts.push(a);
        cuts.push(b);
    }
    if r > 0.0 {
        cuts.push(r);
    }
    let outer = f
        .compact_support()
        .map(|(_, b)| b)
        .unwrap_or(2e4)
        .max(if r.is_finite() { 2.0 * r } else { 0.0 })
        .max(1.0);
    cuts.push(outer);
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * b.abs().max(1e-300));
    (cuts, outer)
}

/// Integrate kernel(s) * f(s) * s^{n-1} over [0, inf) with splits at the
/// kernel diagonal and the support edges of f, each piece decade-panelized.
fn kernel_integral<K: Fn(f64) -> f64>(
    f: &RadialProfile,
    n: usize,
    r: f64,
    kernel: K,
    tol: f64,
) -> Result<Quadrature> {
    let (cuts, outer) = split_points(f, r);
    let integrand = |s: f64| kernel(s) * f.value(s) * s.powi(n as i32 - 1);
    let mut acc = Quadrature {
        value: 0.0,
        abs_error: 0.0,
        evals: 0,
    };
    let m = cuts.len() - 1;
    for w in cuts.windows(2) {
        let q = quad::integrate_decades(&integrand, w[0], w[1], tol / (m as f64 + 1.0))?;
        acc = acc.merge(q);
    }
    let skip_tail = f
        .compact_support()
        .map(|(_, b)| outer >= b)
        .unwrap_or(false)
        && f.tail.is_zero();
    if !skip_tail {
        let q = quad::integrate_to_inf(&integrand, outer, tol / (m as f64 + 1.0))?;
        acc = acc.merge(q);
    }
    Ok(acc)
}

/// L(f) at one radius.
pub fn log_potential_at(f: &RadialProfile, r: f64, n: usize) -> Result<f64> {
    log_potential_at_tol(f, r, n, 1e-9)
}

pub fn log_potential_at_tol(f: &RadialProfile, r: f64, n: usize, tol: f64) -> Result<f64> {
    let decay = decay_check(f, n)?;
    if decay.integrable == Membership::No {
        return Err(Error::OperandNotInDomain(
            "logarithmic potential needs an integrable density".into(),
        ));
    }
    let factor = potential_factor(n)?;
    let kern = LogKernel::new(n)?;
    let q = kernel_integral(f, n, r, |s| s.ln() - kern.a(r, s), tol / factor)?;
    Ok(factor * q.value)
}

/// L(f) at each requested radius.
pub fn log_potential(f: &RadialProfile, r_points: &[f64], n: usize) -> Result<Vec<f64>> {
    r_points
        .iter()
        .map(|&r| log_potential_at(f, r, n))
        .collect()
}

/// d/dr L(f)(r) through the differentiated kernel.
pub fn potential_gradient_at(f: &RadialProfile, r: f64, n: usize) -> Result<f64> {
    let factor = potential_factor(n)?;
    let kern = LogKernel::new(n)?;
    let q = kernel_integral(f, n, r, |s| -kern.da_dr(r, s), 1e-9 / factor)?;
    Ok(factor * q.value)
}

/// (-Delta) L(f)(r) through the |x-y|^{-2} kernel (n >= 3); for n = 2 the
/// potential inverts -Delta directly, so the value is f(r) itself.
pub fn potential_laplacian_at(f: &RadialProfile, r: f64, n: usize) -> Result<f64> {
    if n == 2 {
        return Ok(f.value(r));
    }
    let factor = potential_factor(n)?;
    let kern = LogKernel::new(n)?;
    if n == 3 {
        // M_3 = ln((r+s)/|r-s|)/(2rs): log-singular at s = r. Split the
        // kernel only inside a local window around the diagonal, where the
        // smooth and singular pieces share the local scale; outside it the
        // direct ln1p form is well conditioned at any radius ratio.
        let tol = 1e-9 / factor;
        let (lo_w, hi_w) = (0.5 * r, 1.5 * r);
        let smooth = |s: f64| (r + s).ln() / (2.0 * r * s) * f.value(s) * s * s;
        let singular_weight = |s: f64| -f.value(s) * s * s / (2.0 * r * s);
        let mut acc = Quadrature {
            value: 0.0,
            abs_error: 0.0,
            evals: 0,
        };
        acc = acc.merge(quad::integrate(&smooth, lo_w, hi_w, tol / 4.0)?);
        acc = acc.merge(quad::integrate_log_singular(
            &singular_weight,
            r,
            lo_w,
            hi_w,
            tol / 4.0,
        )?);
        // Direct kernel outside the window, split at support edges.
        let direct = |s: f64| kern.m2(r, s) * f.value(s) * s * s;
        let (cuts, outer) = split_points(f, r);
        let mut pieces: Vec<(f64, f64)> = Vec::new();
        let mut edges: Vec<f64> = cuts.clone();
        edges.push(lo_w);
        edges.push(hi_w);
        edges.sort_by(|a, b| a.total_cmp(b));
        edges.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * b.abs().max(1e-300));
        for w in edges.windows(2) {
            // Skip the window; it is already accounted for.
            if w[0] >= lo_w - 1e-300 && w[1] <= hi_w + 1e-300 {
                continue;
            }
            pieces.push((w[0], w[1]));
        }
        let m = (pieces.len() as f64).max(1.0) + 1.0;
        for (a, b) in pieces {
            acc = acc.merge(quad::integrate_decades(&direct, a, b, tol / (2.0 * m))?);
        }
        let top = outer.max(hi_w);
        let skip_tail =
            f.compact_support().map(|(_, b)| top >= b).unwrap_or(false) && f.tail.is_zero();
        if !skip_tail {
            acc = acc.merge(quad::integrate_to_inf(&direct, top, tol / (2.0 * m))?);
        }
        return Ok(factor * (n as f64 - 2.0) * acc.value);
    }
    let q = kernel_integral(f, n, r, |s| kern.m2(r, s), 1e-9 / factor)?;
    Ok(factor * (n as f64 - 2.0) * q.value)
}

/// L(f) as a reusable profile: values, first and second radial derivatives
/// tabulated once from the exact kernels, with the known logarithmic tail
/// -alpha ln r + c attached.
pub fn potential_profile(f: &RadialProfile, n: usize) -> Result<RadialProfile> {
    let mass = alpha_of(f, n)?;
    let r_min = 1e-4;
    let r_max = 4e4;
    let per_decade = 40usize;
    let decades = (r_max / r_min as f64).log10();
    let count = (decades * per_decade as f64).ceil() as usize + 1;
    let radii: Vec<f64> = (0..count)
        .map(|i| r_min * (r_max / r_min).powf(i as f64 / (count as f64 - 1.0)))
        .collect();
    let nm1 = n as f64 - 1.0;
    let eval = |&r: &f64| -> Result<(f64, f64, f64)> {
        let v = log_potential_at(f, r, n)?;
        let g = potential_gradient_at(f, r, n)?;
        let lap = -potential_laplacian_at(f, r, n)?;
        // u'' = Delta u - (n-1) u'/r
        Ok((v, g, lap - nm1 * g / r))
    };
    #[cfg(feature = "parallel")]
    let rows: Result<Vec<(f64, f64, f64)>> = {
        use rayon::prelude::*;
        radii.par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Result<Vec<(f64, f64, f64)>> = radii.iter().map(eval).collect();
    let rows = rows?;
    let v0: Vec<f64> = rows.iter().map(|t| t.0).collect();
    let v1: Vec<f64> = rows.iter().map(|t| t.1).collect();
    let v2: Vec<f64> = rows.iter().map(|t| t.2).collect();
    // Far field: L(f)(r) = -alpha ln r + c + o(1).
    let c_inf = v0[count - 1] + mass.alpha * radii[count - 1].ln();
    let mut tail = TailModel::log(-mass.alpha, c_inf);
    let check = v0[count - 9] + mass.alpha * radii[count - 9].ln();
    tail.band = (check - c_inf).abs();
    Ok(RadialProfile::from_tabulated(
        &radii,
        v0,
        v1,
        v2,
        Some(tail),
    ))
}

/// Residual report of the inversion identity (-Delta)^{n/2} L(f) = f,
/// checked through an independently interpolated potential (n even, n <= 4).
#[derive(Debug, Clone)]
pub struct GreensCheck {
    pub max_relative_residual: f64,
    pub radii: Vec<f64>,
    pub residuals: Vec<f64>,
}

pub fn greens_property_check(
    f: &RadialProfile,
    grid: &RadialGrid,
    n: usize,
) -> Result<GreensCheck> {
    if n % 2 != 0 || n > 4 {
        return Err(Error::UnsupportedCheck(format!(
            "inversion identity check needs even n <= 4 (sampled differentiation), got {n}"
        )));
    }
    // Sample the potential on a dense grid around where f lives, then
    // differentiate the interpolant only: an independent code path.
    let (lo, hi) = f.compact_support().unwrap_or_else(|| {
        // Effective extent of a decaying density: where it falls below
        // 1e-10 of its peak.
        let peak = (0..40)
            .map(|i| f.value(0.25 * i as f64).abs())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        let mut hi = 1.0;
        while hi < 1e3 && f.value(hi).abs() > 1e-10 * peak {
            hi *= 1.3;
        }
        (1e-3, hi)
    });
    let a = (0.25 * lo).max(1e-3);
    let b = 4.0 * hi;
    let count = 1600usize;
    let table: Result<Vec<(f64, f64)>> = (0..count)
        .map(|i| {
            let r = a + (b - a) * i as f64 / (count as f64 - 1.0);
            log_potential_at(f, r, n).map(|v| (r, v))
        })
        .collect();
    let pot = sampled_profile(&table?, 3)?;
    let m = n / 2;
    let res = operators::iterate_laplacian(&pot, m, grid, n)?;
    let f_scale = grid
        .nodes()
        .iter()
        .map(|&r| f.value(r).abs())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let mut worst = 0.0f64;
    let mut residuals = Vec::with_capacity(grid.len());
    for (&r, &v) in grid.nodes().iter().zip(&res.values) {
        let d = (v - f.value(r)).abs() / f_scale;
        residuals.push(d);
        worst = worst.max(d);
    }
    Ok(GreensCheck {
        max_relative_residual: worst,
        radii: grid.nodes().to_vec(),
        residuals,
    })
}

/// Average of a radial function over the ball B_rho(x) with |x| = center,
/// reduced to a weighted shell integral with the exact sphere-cap weight.
pub fn ball_average<F: Fn(f64) -> f64>(phi: F, center: f64, rho: f64, n: usize) -> Result<f64> {
    if rho <= 0.0 || center < 0.0 {
        return Err(Error::DomainError(format!(
            "ball average needs center >= 0 and rho > 0, got ({center}, {rho})"
        )));
    }
    let consts = dimension_constants(n as i64)?;
    let snm2 = if n == 2 {
        2.0
    } else {
        2.0 * PI.powf((n as f64 - 1.0) / 2.0) / gamma_half(n as u32 - 1)
    };
    let lo = (center - rho).max(0.0);
    let hi = center + rho;
    let full_inside = (rho - center).max(0.0); // spheres enclosed entirely
    let weight = |s: f64| -> f64 {
        if s <= full_inside {
            return consts.sphere_volume_n_minus_1 * s.powi(n as i32 - 1);
        }
        // Complement u = 1 - cos(theta*) formed without the cancellation of
        // (center^2 + s^2 - rho^2)/(2 center s) near 1.
        let u = ((rho - center + s) * (rho + center - s) / (2.0 * center * s)).clamp(0.0, 2.0);
        snm2 * cap_from_complement(u, n) * s.powi(n as i32 - 1)
    };
    let scale = consts.ball_volume * rho.powi(n as i32);
    let numer = quad::integrate(|s| weight(s) * phi(s), lo, hi, 1e-12 * scale.max(1.0))?;
    let denom = quad::integrate(&weight, lo, hi, 1e-12 * scale.max(1.0))?;
    Ok(numer.value / denom.value)
}

/// Cap integral \int_{1-u}^1 (1-t^2)^{(n-3)/2} dt in terms of the complement
/// u = 1 - cos(theta*).
fn cap_from_complement(u: f64, n: usize) -> f64 {
    let u = u.clamp(0.0, 2.0);
    match n {
        2 => 2.0 * (u / 2.0).sqrt().asin(),
        3 => u,
        4 => (u / 2.0).sqrt().asin() - 0.5 * (1.0 - u) * (u * (2.0 - u)).sqrt(),
        5 => u * u * (3.0 - u) / 3.0,
        _ => quad::integrate(
            |v: f64| (v * (2.0 - v)).max(0.0).powf((n as f64 - 3.0) / 2.0),
            0.0,
            u,
            1e-13,
        )
        .map(|q| q.value)
        .unwrap_or(f64::NAN),
    }
}
