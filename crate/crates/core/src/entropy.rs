//! Volume growth and the two volume entropies.
//!
//! tau(g) compares log V_g(B_R) against log |B_R| and is finite exactly when
//! the volume grows polynomially; h(g) is the infimal s with
//! log V_g(B_R) = O(R^s) and detects stretched-exponential growth.
//!
//! Both limits superior are operationalized as trailing-window slopes with a
//! stability band; the band is part of every estimate, and the divergence
//! thresholds are artifact conventions recorded in the output.

use crate::error::{Error, Result};
use crate::numerics::quad;
use crate::numerics::{dimension_constants, FitResult, RadialGrid, WindowPolicy};
use crate::profiles::{ConformalMetric, TailKind};

/// V_g(B_R) along a geometric sequence of radii, kept in log space so that
/// rapidly growing conformal factors cannot overflow.
#[derive(Debug, Clone)]
pub struct VolumeCurve {
    pub radii: Vec<f64>,
    /// V values; +inf where e^{log V} exceeds f64 range.
    pub volumes: Vec<f64>,
    pub log_volumes: Vec<f64>,
    pub n: usize,
}

pub fn volume_curve(metric: &ConformalMetric, radii: &RadialGrid) -> Result<VolumeCurve> {
    if radii.len() < 12 {
        return Err(Error::InvalidSpec(format!(
            "volume curve needs >= 12 radii, got {}",
            radii.len()
        )));
    }
    if radii.geometric_ratio().is_none() {
        return Err(Error::InvalidSpec(
            "volume curve needs a geometric radius sequence".into(),
        ));
    }
    let n = metric.n;
    let consts = dimension_constants(n as i64)?;
    let u = &metric.u;
    let g = |s: f64| n as f64 * u.value(s) + (n as f64 - 1.0) * s.ln();
    let nodes = radii.nodes();

    // Head ball [0, r_0]: no overflow risk at small radii.
    let r0 = nodes[0];
    let head = quad::integrate(
        |s: f64| (n as f64 * u.value(s)).exp() * s.powi(n as i32 - 1),
        0.0,
        r0,
        1e-13,
    )?;
    let mut log_v = head.value.max(1e-300).ln();
    let mut log_volumes = Vec::with_capacity(nodes.len());
    log_volumes.push(log_v + consts.sphere_volume_n_minus_1.ln());

    let shell_logs: Result<Vec<f64>> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            nodes
                .par_windows(2)
                .map(|w| quad::log_integrate_exp(g, w[0], w[1], 1e-10))
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            nodes
                .windows(2)
                .map(|w| quad::log_integrate_exp(g, w[0], w[1], 1e-10))
                .collect()
        }
    };
    for shell in shell_logs? {
        // log-sum-exp accumulation of V(r_{i+1}) = V(r_i) + shell.
        let m = log_v.max(shell);
        log_v = m + ((log_v - m).exp() + (shell - m).exp()).ln();
        log_volumes.push(log_v + consts.sphere_volume_n_minus_1.ln());
    }
    let volumes = log_volumes
        .iter()
        .map(|&lv| if lv > 700.0 { f64::INFINITY } else { lv.exp() })
        .collect();
    Ok(VolumeCurve {
        radii: nodes.to_vec(),
        volumes,
        log_volumes,
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyKind {
    Tau,
    H,
}

/// A windowed-slope entropy estimate. `value` is meaningless when
/// `diverging` is set (tau) and carries the raw slope for h.
#[derive(Debug, Clone)]
pub struct EntropyEstimate {
    pub kind: EntropyKind,
    pub value: f64,
    pub diverging: bool,
    pub fit: FitResult,
    /// Nearest even integer >= 0, reported for h alongside the raw value.
    pub snapped_even: Option<i64>,
}

fn window_slope(xs: &[f64], ys: &[f64], fraction: f64) -> f64 {
    let len = xs.len();
    let w = ((len as f64 * fraction).ceil() as usize).clamp(4, len);
    let start = len - w;
    let mx = xs[start..].iter().sum::<f64>() / w as f64;
    let my = ys[start..].iter().sum::<f64>() / w as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs[start..].iter().zip(&ys[start..]) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    sxy / sxx
}

/// tau(g) from the slope of log V against log R over trailing windows,
/// divided by n. Divergence policy: the trailing-window slope exceeds 10 n,
/// or the slope grows monotonically by more than 20% per window halving.
pub fn tau_estimate(curve: &VolumeCurve) -> Result<EntropyEstimate> {
    let xs: Vec<f64> = curve.radii.iter().map(|r| r.ln()).collect();
    let ys = &curve.log_volumes;
    let n = curve.n as f64;
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(&x, &y)| (x, y)).collect();
    let fit = crate::numerics::fit_slope(&pts, WindowPolicy::default())?;
    let s80 = window_slope(&xs, ys, 0.8);
    let s40 = window_slope(&xs, ys, 0.4);
    let s20 = window_slope(&xs, ys, 0.2);
    let diverging = s20 > 10.0 * n || (s20 > 1.2 * s40 && s40 > 1.2 * s80 && s80 > 0.0);
    Ok(EntropyEstimate {
        kind: EntropyKind::Tau,
        value: if diverging {
            f64::INFINITY
        } else {
            fit.slope / n
        },
        diverging,
        fit,
        snapped_even: None,
    })
}

/// h(g): zero when tau is finite; otherwise the slope of log log V against
/// log R over the trailing window, with the nearest-even-integer snap.
pub fn h_estimate(curve: &VolumeCurve) -> Result<EntropyEstimate> {
    let tau = tau_estimate(curve)?;
    if !tau.diverging {
        return Ok(EntropyEstimate {
            kind: EntropyKind::H,
            value: 0.0,
            diverging: false,
            fit: tau.fit,
            snapped_even: Some(0),
        });
    }
    let pts: Vec<(f64, f64)> = curve
        .radii
        .iter()
        .zip(&curve.log_volumes)
        .filter(|(_, &lv)| lv > 1.0)
        .map(|(&r, &lv)| (r.ln(), lv.ln()))
        .collect();
    if pts.len() < 8 {
        return Ok(EntropyEstimate {
            kind: EntropyKind::H,
            value: 0.0,
            diverging: false,
            fit: tau.fit,
            snapped_even: Some(0),
        });
    }
    let fit = crate::numerics::fit_slope(&pts, WindowPolicy::default())?;
    let raw = fit.slope;
    let snap = ((raw / 2.0).round() as i64 * 2).max(0);
    Ok(EntropyEstimate {
        kind: EntropyKind::H,
        value: raw,
        diverging: true,
        fit,
        snapped_even: Some(snap),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completeness {
    Complete,
    Incomplete,
    Inconclusive,
}

/// Radial ray length D(R) = int_0^R e^{u} dr and the completeness verdict
/// from the tail model of u. For radial metrics the radial ray realizes the
/// distance to infinity.
#[derive(Debug, Clone)]
pub struct RayReport {
    pub radius: f64,
    pub distance: f64,
    pub log_distance: f64,
    pub classification: Completeness,
    pub note: String,
}

pub fn ray_distance(metric: &ConformalMetric, radius: f64) -> Result<RayReport> {
    if radius <= 0.0 {
        return Err(Error::DomainError("ray distance needs R > 0".into()));
    }
    let u = &metric.u;
    let log_d = quad::log_integrate_exp(|s| u.value(s), 0.0, radius, 1e-10)?;
    let t = u.tail;
    let margin = t.band.max(0.02);
    let (classification, note) = match t.kind {
        TailKind::PolynomialGrowth => {
            if t.leading_coefficient > 0.0 {
                (
                    Completeness::Complete,
                    format!(
                        "u grows like {:.3} r^{:.2}",
                        t.leading_coefficient, t.leading_exponent
                    ),
                )
            } else {
                (
                    Completeness::Incomplete,
                    "u decays faster than any log".into(),
                )
            }
        }
        TailKind::GaussianType => (
            Completeness::Complete,
            "e^u approaches a positive constant".into(),
        ),
        TailKind::Power => {
            if t.leading_coefficient == 0.0 || t.leading_exponent < 0.0 {
                (
                    Completeness::Complete,
                    "e^u approaches a positive constant".into(),
                )
            } else if t.leading_coefficient > 0.0 {
                (Completeness::Complete, "u grows polynomially".into())
            } else {
                (
                    Completeness::Incomplete,
                    "u falls off polynomially fast".into(),
                )
            }
        }
        TailKind::Log => {
            let gamma = t.leading_coefficient;
            if gamma > -1.0 + margin {
                (
                    Completeness::Complete,
                    format!("e^u ~ r^{gamma:.3}, integral diverges (gamma >= -1)"),
                )
            } else if gamma < -1.0 - margin {
                (
                    Completeness::Incomplete,
                    format!("e^u ~ r^{gamma:.3}, integral converges"),
                )
            } else {
                (
                    Completeness::Inconclusive,
                    format!("e^u ~ r^{gamma:.3} within band {margin:.3} of the threshold -1"),
                )
            }
        }
    };
    Ok(RayReport {
        radius,
        distance: if log_d > 700.0 {
            f64::INFINITY
        } else {
            log_d.exp()
        },
        log_distance: log_d,
        classification,
        note,
    })
}
