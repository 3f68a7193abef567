//! Browser bindings: three interactive views over the core library, each
//! returning a JSON payload ready for canvas plotting.
//!
//! Build with `wasm-pack build crates/wasm --target web --out-dir ../../demo/pkg`.

use qcurv::curvature;
use qcurv::decomposition;
use qcurv::entropy;
use qcurv::error::Result;
use qcurv::numerics::RadialGrid;
use qcurv::potential;
use qcurv::profiles::{builtin_profile, ConformalMetric, Family};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Curve {
    label: String,
    x: Vec<f64>,
    y: Vec<f64>,
}

#[derive(Serialize)]
struct AnalyzePayload {
    family: String,
    n: usize,
    curves: Vec<Curve>,
    alpha0: f64,
    tau: f64,
    tau_diverging: bool,
    h_raw: f64,
    h_snapped: i64,
    verdict: String,
    ray: String,
    min_scalar: f64,
}

#[derive(Serialize)]
struct PotentialPayload {
    alpha: f64,
    n: usize,
    curves: Vec<Curve>,
    fitted_slope: f64,
    predicted_slope: f64,
    band: f64,
}

#[derive(Serialize)]
struct VolumePayload {
    family: String,
    n: usize,
    curves: Vec<Curve>,
    tau: f64,
    tau_diverging: bool,
    h_raw: f64,
    h_snapped: i64,
}

fn metric_from(family: &str, param: f64, n: usize) -> Result<(ConformalMetric, String)> {
    let (u, label) = match family {
        "flat" => (builtin_profile(Family::Flat)?, "flat".to_string()),
        "sphere" => (builtin_profile(Family::Sphere)?, "sphere".to_string()),
        "nonnormal" => (
            builtin_profile(Family::Nonnormal { beta: param })?,
            format!("nonnormal (beta = {param})"),
        ),
        "monomial" => {
            let k = param.max(1.0).round() as u32;
            (
                builtin_profile(Family::Monomial { k })?,
                format!("monomial (k = {k})"),
            )
        }
        "potential" => {
            let f = builtin_profile(Family::Bump {
                alpha: param,
                center: 1.0,
                width: 0.5,
                n,
            })?;
            (
                potential::potential_profile(&f, n)?,
                format!("potential (alpha = {param})"),
            )
        }
        other => {
            return Err(qcurv::error::Error::InvalidSpec(format!(
                "unknown family {other:?}"
            )))
        }
    };
    Ok((ConformalMetric::new(n, u)?, label))
}

fn err_json(e: impl std::fmt::Display) -> String {
    serde_json::json!({ "error": format!("{e}") }).to_string()
}

/// Curvature and invariants of a builtin metric family: u(r), the density
/// Q e^{nu}, scalar curvature, plus the summary verdicts.
#[wasm_bindgen]
pub fn analyze_family(family: &str, param: f64, n: usize, points: usize) -> String {
    match analyze_family_impl(family, param, n, points) {
        Ok(p) => serde_json::to_string(&p).unwrap_or_else(err_json),
        Err(e) => err_json(e),
    }
}

fn analyze_family_impl(
    family: &str,
    param: f64,
    n: usize,
    points: usize,
) -> Result<AnalyzePayload> {
    let (metric, label) = metric_from(family, param, n)?;
    let points = points.clamp(41, 241);
    let grid = RadialGrid::geometric(1e-3, 1e4, points)?;
    let nodes = grid.nodes().to_vec();
    let u_curve: Vec<f64> = nodes.iter().map(|&r| metric.u.value(r)).collect();
    let density = curvature::q_density(&metric, &grid)?;
    let scalar: Vec<f64> = nodes
        .iter()
        .map(|&r| curvature::scalar_curvature(&metric, r))
        .collect();
    let total = curvature::total_q_on(&metric, &grid);
    let curve = entropy::volume_curve(&metric, &grid)?;
    let tau = entropy::tau_estimate(&curve)?;
    let h = entropy::h_estimate(&curve)?;
    let ray = entropy::ray_distance(&metric, *nodes.last().unwrap())?;
    let dec = decomposition::polynomial_part(&metric, &grid)?;
    let min_scalar = scalar.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(AnalyzePayload {
        family: label,
        n,
        curves: vec![
            Curve {
                label: "u".into(),
                x: nodes.clone(),
                y: u_curve,
            },
            Curve {
                label: "Q e^{nu}".into(),
                x: nodes.clone(),
                y: density.values,
            },
            Curve {
                label: "R_g".into(),
                x: nodes,
                y: scalar,
            },
        ],
        alpha0: total.map(|t| t.alpha).unwrap_or(f64::NAN),
        tau: tau.value,
        tau_diverging: tau.diverging,
        h_raw: h.value,
        h_snapped: h.snapped_even.unwrap_or(0),
        verdict: format!("{:?}", dec.verdict),
        ray: format!("{:?}", ray.classification),
        min_scalar,
    })
}

/// The logarithmic potential of a mass-alpha bump and its far-field slope
/// against -alpha.
#[wasm_bindgen]
pub fn potential_farfield(alpha: f64, n: usize) -> String {
    match potential_farfield_impl(alpha, n) {
        Ok(p) => serde_json::to_string(&p).unwrap_or_else(err_json),
        Err(e) => err_json(e),
    }
}

fn potential_farfield_impl(alpha: f64, n: usize) -> Result<PotentialPayload> {
    let f = builtin_profile(Family::Bump {
        alpha,
        center: 1.0,
        width: 0.5,
        n,
    })?;
    let radii: Vec<f64> = (0..81)
        .map(|i| 1e-2 * (1e6f64).powf(i as f64 / 80.0))
        .collect();
    let values = potential::log_potential(&f, &radii, n)?;
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(&values)
        .filter(|(r, _)| **r >= 1e2)
        .map(|(r, v)| (r.ln(), *v))
        .collect();
    let fit = qcurv::numerics::fit_slope(
        &pts,
        qcurv::numerics::WindowPolicy {
            trailing_fraction: 1.0,
            min_points: 8,
        },
    )?;
    Ok(PotentialPayload {
        alpha,
        n,
        curves: vec![Curve {
            label: "L(f)".into(),
            x: radii,
            y: values,
        }],
        fitted_slope: fit.slope,
        predicted_slope: -alpha,
        band: fit.stability,
    })
}

/// Volume curve log V_g(B_R) with the two entropy estimates.
#[wasm_bindgen]
pub fn volume_entropy(family: &str, param: f64, n: usize) -> String {
    match volume_entropy_impl(family, param, n) {
        Ok(p) => serde_json::to_string(&p).unwrap_or_else(err_json),
        Err(e) => err_json(e),
    }
}

fn volume_entropy_impl(family: &str, param: f64, n: usize) -> Result<VolumePayload> {
    let (metric, label) = metric_from(family, param, n)?;
    let grid = RadialGrid::geometric(1e-2, 1e4, 97)?;
    let curve = entropy::volume_curve(&metric, &grid)?;
    let tau = entropy::tau_estimate(&curve)?;
    let h = entropy::h_estimate(&curve)?;
    Ok(VolumePayload {
        family: label,
        n,
        curves: vec![Curve {
            label: "log V".into(),
            x: curve.radii.clone(),
            y: curve.log_volumes.clone(),
        }],
        tau: tau.value,
        tau_diverging: tau.diverging,
        h_raw: h.value,
        h_snapped: h.snapped_even.unwrap_or(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analyze_flat_payload_is_sound() {
        let s = analyze_family("flat", 0.0, 3, 61);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert!(v.get("error").is_none(), "payload: {s}");
        assert_eq!(v["verdict"], "Normal");
        assert!((v["tau"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn potential_payload_slope_tracks_alpha() {
        let s = potential_farfield(0.5, 3);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert!(v.get("error").is_none(), "payload: {s}");
        let slope = v["fitted_slope"].as_f64().unwrap();
        assert!((slope + 0.5).abs() < 0.02, "slope {slope}");
    }

    #[test]
    fn volume_payload_monomial_h() {
        let s = volume_entropy("monomial", 1.0, 3);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert!(v.get("error").is_none(), "payload: {s}");
        assert!(v["tau_diverging"].as_bool().unwrap());
        assert_eq!(v["h_snapped"].as_i64().unwrap(), 2);
    }

    #[test]
    fn unknown_family_reports_error_json() {
        let s = analyze_family("torus", 0.0, 3, 61);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert!(v.get("error").is_some());
    }
}
