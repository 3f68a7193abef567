//! Metric-spec parsing, the analysis pipeline, and deterministic report /
//! table rendering.
//!
//! The input format is sectioned key-value text; the report is a single
//! structured text document whose float formatting is fixed, so identical
//! specs produce byte-identical reports on the same platform.

use crate::curvature::{self, CurvatureReport};
use crate::decomposition::{self, DecompositionResult, Verdict};
use crate::entropy::{self, EntropyEstimate, RayReport};
use crate::error::{Error, Result};
use crate::numerics::RadialGrid;
use crate::profiles::{
    builtin_profile, load_radial_table, sampled_profile, ConformalMetric, Family,
};
use crate::verify::{self, CheckResult};
use std::fmt::Write as _;

pub const SCHEMA_VERSION: u32 = 1;

/// Metric family as named in a spec file.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    Flat,
    Sphere,
    Nonnormal {
        beta: f64,
    },
    Monomial {
        k: u32,
    },
    /// The bump density itself as conformal factor.
    Bump {
        alpha: f64,
        center: f64,
        width: f64,
    },
    /// u = L(bump): the canonical normal test metric.
    Potential {
        alpha: f64,
        center: f64,
        width: f64,
    },
    /// Two-column data file, cubic interpolation.
    Sampled {
        path: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    pub n: usize,
    pub family: FamilySpec,
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    pub tolerance: f64,
    pub run_checks: bool,
}

impl Default for MetricSpec {
    fn default() -> Self {
        MetricSpec {
            n: 3,
            family: FamilySpec::Flat,
            r_min: 1e-3,
            r_max: 1e4,
            points: 241,
            tolerance: 1e-8,
            run_checks: false,
        }
    }
}

fn fnum(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl MetricSpec {
    pub fn grid(&self) -> Result<RadialGrid> {
        RadialGrid::geometric(self.r_min, self.r_max, self.points)
    }

    /// Build the metric this spec describes.
    pub fn build(&self) -> Result<ConformalMetric> {
        let u = match &self.family {
            FamilySpec::Flat => builtin_profile(Family::Flat)?,
            FamilySpec::Sphere => builtin_profile(Family::Sphere)?,
            FamilySpec::Nonnormal { beta } => builtin_profile(Family::Nonnormal { beta: *beta })?,
            FamilySpec::Monomial { k } => builtin_profile(Family::Monomial { k: *k })?,
            FamilySpec::Bump {
                alpha,
                center,
                width,
            } => builtin_profile(Family::Bump {
                alpha: *alpha,
                center: *center,
                width: *width,
                n: self.n,
            })?,
            FamilySpec::Potential {
                alpha,
                center,
                width,
            } => {
                let f = builtin_profile(Family::Bump {
                    alpha: *alpha,
                    center: *center,
                    width: *width,
                    n: self.n,
                })?;
                crate::potential::potential_profile(&f, self.n)?
            }
            FamilySpec::Sampled { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::InvalidSpec(format!("cannot read {path}: {e}")))?;
                let table = load_radial_table(&text)?;
                sampled_profile(&table, 3)?
            }
        };
        ConformalMetric::new(self.n, u)
    }

    /// Render back to spec text; parse(render(spec)) == spec.
    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str("[metric]\n");
        let _ = writeln!(s, "n = {}", self.n);
        match &self.family {
            FamilySpec::Flat => s.push_str("family = flat\n"),
            FamilySpec::Sphere => s.push_str("family = sphere\n"),
            FamilySpec::Nonnormal { beta } => {
                let _ = writeln!(s, "family = nonnormal\nbeta = {}", fnum(*beta));
            }
            FamilySpec::Monomial { k } => {
                let _ = writeln!(s, "family = monomial\nk = {k}");
            }
            FamilySpec::Bump {
                alpha,
                center,
                width,
            } => {
                let _ = writeln!(
                    s,
                    "family = bump\nalpha = {}\ncenter = {}\nwidth = {}",
                    fnum(*alpha),
                    fnum(*center),
                    fnum(*width)
                );
            }
            FamilySpec::Potential {
                alpha,
                center,
                width,
            } => {
                let _ = writeln!(
                    s,
                    "family = potential\nalpha = {}\ncenter = {}\nwidth = {}",
                    fnum(*alpha),
                    fnum(*center),
                    fnum(*width)
                );
            }
            FamilySpec::Sampled { path } => {
                let _ = writeln!(s, "family = sampled\npath = {path}");
            }
        }
        s.push_str("\n[grid]\n");
        let _ = writeln!(s, "r_min = {}", fnum(self.r_min));
        let _ = writeln!(s, "r_max = {}", fnum(self.r_max));
        let _ = writeln!(s, "points = {}", self.points);
        s.push_str("\n[quadrature]\n");
        let _ = writeln!(s, "tol = {}", fnum(self.tolerance));
        s.push_str("\n[analysis]\n");
        let _ = writeln!(s, "checks = {}", self.run_checks);
        s
    }
}

/// Parse sectioned key-value text into a validated spec. All violations are
/// collected and reported together.
pub fn parse_spec(text: &str) -> Result<MetricSpec> {
    let mut section = String::new();
    let mut pairs: Vec<(String, String, String)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if body.starts_with('[') && body.ends_with(']') {
            section = body[1..body.len() - 1].to_string();
            continue;
        }
        match body.split_once('=') {
            Some((k, v)) => {
                pairs.push((section.clone(), k.trim().to_string(), v.trim().to_string()))
            }
            None => {
                return Err(Error::InvalidSpec(format!(
                    "line {}: expected key = value, got {body:?}",
                    lineno + 1
                )))
            }
        }
    }
    let mut violations: Vec<String> = Vec::new();
    let get = |sec: &str, key: &str| -> Option<&str> {
        pairs
            .iter()
            .find(|(s, k, _)| s == sec && k == key)
            .map(|(_, _, v)| v.as_str())
    };
    let mut spec = MetricSpec::default();

    if let Some(v) = get("metric", "n") {
        match v.parse::<i64>() {
            Ok(n) if n >= 2 => spec.n = n as usize,
            Ok(n) => violations.push(format!("metric.n = {n}: need an integer n >= 2")),
            Err(_) => violations.push(format!("metric.n = {v:?}: not an integer")),
        }
    }
    let parse_f64 = |sec: &str, key: &str, violations: &mut Vec<String>| -> Option<f64> {
        get(sec, key).and_then(|v| match v.parse::<f64>() {
            Ok(x) => Some(x),
            Err(_) => {
                violations.push(format!("{sec}.{key} = {v:?}: not a number"));
                None
            }
        })
    };
    let family = get("metric", "family").unwrap_or("flat").to_string();
    spec.family = match family.as_str() {
        "flat" => FamilySpec::Flat,
        "sphere" => FamilySpec::Sphere,
        "nonnormal" => {
            let beta = parse_f64("metric", "beta", &mut violations);
            if beta.is_none() {
                violations.push("nonnormal family needs key \"beta\"".into());
            }
            FamilySpec::Nonnormal {
                beta: beta.unwrap_or(f64::NAN),
            }
        }
        "monomial" => {
            let k = get("metric", "k").and_then(|v| v.parse::<u32>().ok());
            if k.is_none() {
                violations.push("monomial family needs integer key \"k\" >= 1".into());
            }
            FamilySpec::Monomial { k: k.unwrap_or(0) }
        }
        "bump" | "potential" => {
            let alpha = parse_f64("metric", "alpha", &mut violations);
            if alpha.is_none() {
                violations.push(format!("{family} family needs key \"alpha\""));
            }
            let center = parse_f64("metric", "center", &mut violations).unwrap_or(1.0);
            let width = parse_f64("metric", "width", &mut violations).unwrap_or(0.5);
            if family == "bump" {
                FamilySpec::Bump {
                    alpha: alpha.unwrap_or(f64::NAN),
                    center,
                    width,
                }
            } else {
                FamilySpec::Potential {
                    alpha: alpha.unwrap_or(f64::NAN),
                    center,
                    width,
                }
            }
        }
        "sampled" => match get("metric", "path") {
            Some(p) => FamilySpec::Sampled {
                path: p.to_string(),
            },
            None => {
                violations.push("sampled family needs key \"path\"".into());
                FamilySpec::Flat
            }
        },
        other => {
            violations.push(format!("unknown family {other:?}"));
            FamilySpec::Flat
        }
    };
    if let Some(v) = parse_f64("grid", "r_min", &mut violations) {
        spec.r_min = v;
    }
    if let Some(v) = parse_f64("grid", "r_max", &mut violations) {
        spec.r_max = v;
    }
    if let Some(v) = get("grid", "points") {
        match v.parse::<usize>() {
            Ok(p) => spec.points = p,
            Err(_) => violations.push(format!("grid.points = {v:?}: not an integer")),
        }
    }
    if let Some(v) = parse_f64("quadrature", "tol", &mut violations) {
        spec.tolerance = v;
    }
    if let Some(v) = get("analysis", "checks") {
        match v.parse::<bool>() {
            Ok(b) => spec.run_checks = b,
            Err(_) => violations.push(format!("analysis.checks = {v:?}: not a boolean")),
        }
    }

    if !(spec.r_min > 0.0 && spec.r_max > spec.r_min) {
        violations.push(format!(
            "grid range [{}, {}] invalid",
            spec.r_min, spec.r_max
        ));
    }
    if spec.points < 12 {
        violations.push(format!("grid.points = {}: need >= 12", spec.points));
    }
    if !(spec.tolerance > 0.0 && spec.tolerance <= 1e-2) {
        violations.push(format!(
            "quadrature.tol = {} outside (0, 1e-2]",
            spec.tolerance
        ));
    }
    if !violations.is_empty() {
        if violations.iter().any(|v| v.starts_with("metric.n")) {
            return Err(Error::InvalidDimension(
                get("metric", "n")
                    .and_then(|v| v.parse().ok())
                    .unwrap_or(-1),
            ));
        }
        return Err(Error::InvalidSpec(violations.join("; ")));
    }
    Ok(spec)
}

/// Full analysis of a single metric.
#[derive(Debug, Clone)]
pub struct Report {
    pub spec: MetricSpec,
    pub curvature: CurvatureReport,
    pub tau: EntropyEstimate,
    pub h: EntropyEstimate,
    pub ray: RayReport,
    pub decomposition: DecompositionResult,
    pub entropy_consistent: bool,
    pub checks: Vec<CheckResult>,
    pub warnings: Vec<String>,
}

/// Curvature -> entropy -> decomposition -> conditional checks.
pub fn cmd_analyze(spec: &MetricSpec) -> Result<Report> {
    let metric = spec.build()?;
    let grid = spec.grid()?;
    let curvature = curvature::curvature_report(&metric, &grid)?;
    let curve = entropy::volume_curve(&metric, &grid)?;
    let tau = entropy::tau_estimate(&curve)?;
    let h = entropy::h_estimate(&curve)?;
    let ray = entropy::ray_distance(&metric, spec.r_max)?;
    let dec = decomposition::polynomial_part(&metric, &grid)?;
    let entropy_consistent = match dec.verdict {
        Verdict::Normal => !tau.diverging,
        Verdict::NonNormal => tau.diverging,
        Verdict::Inconclusive => true,
    };
    let mut warnings = Vec::new();
    if curvature.q_underflow_count > 0 {
        warnings.push(format!(
            "pointwise Q underflowed at {} grid radii (density reported instead)",
            curvature.q_underflow_count
        ));
    }
    if metric.u.tail.band > 0.1 {
        warnings.push(format!(
            "conformal factor tail fit has a wide band ({:.2e}); asymptotic verdicts may be unstable",
            metric.u.tail.band
        ));
    }
    if !entropy_consistent {
        warnings.push("normality verdict and volume entropy disagree".into());
    }
    warnings.push(dec.radial_scope_note.to_string());
    warnings.push(
        "lim sup estimators use trailing-window slopes (40% of points, >= 8) with stability bands"
            .into(),
    );

    let mut checks = Vec::new();
    if spec.run_checks {
        checks.push(verify::check_tau_formula(&metric, &grid, 0.05)?);
        checks.push(verify::check_cohn_vossen(&metric, &grid)?);
        checks.push(verify::check_scalar_conditional(&metric, &grid)?);
        checks.push(verify::check_h_even_integer(&metric, &grid)?);
    }

    Ok(Report {
        spec: spec.clone(),
        curvature,
        tau,
        h,
        ray,
        decomposition: dec,
        entropy_consistent,
        checks,
        warnings,
    })
}

fn fmt_f(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.10e}")
    }
}

fn render_check(c: &CheckResult, out: &mut String) {
    let status = match &c.skipped {
        Some(_) => "SKIP",
        None if c.pass => "PASS",
        None => "FAIL",
    };
    let _ = writeln!(
        out,
        "{status} {} | predicted = {} | measured = {} | band = {} | tol = {}",
        c.id,
        fmt_f(c.predicted),
        fmt_f(c.measured),
        fmt_f(c.band),
        fmt_f(c.tolerance)
    );
    let _ = writeln!(out, "  claim: {}", c.claim);
    if let Some(why) = &c.skipped {
        let _ = writeln!(out, "  skipped: {why}");
    }
    for n in &c.notes {
        let _ = writeln!(out, "  note: {n}");
    }
}

impl Report {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "qcurv analysis report");
        let _ = writeln!(s, "schema = {SCHEMA_VERSION}");
        s.push('\n');
        s.push_str("[spec]\n");
        for line in self.spec.render().lines() {
            if !line.is_empty() && !line.starts_with('[') {
                let _ = writeln!(s, "{line}");
            }
        }
        s.push('\n');
        s.push_str("[curvature]\n");
        let _ = writeln!(s, "total_q = {}", fmt_f(self.curvature.total_q));
        let _ = writeln!(s, "alpha0 = {}", fmt_f(self.curvature.alpha0));
        let _ = writeln!(s, "min_scalar = {}", fmt_f(self.curvature.min_scalar));
        let _ = writeln!(s, "scalar_class = {:?}", self.curvature.scalar_class);
        let _ = writeln!(
            s,
            "scalar_sign_radius = {}",
            self.curvature
                .scalar_sign_radius
                .map(fmt_f)
                .unwrap_or_else(|| "none".into())
        );
        let _ = writeln!(
            s,
            "q_underflow_count = {}",
            self.curvature.q_underflow_count
        );
        s.push('\n');
        s.push_str("[entropy]\n");
        let _ = writeln!(s, "tau = {}", fmt_f(self.tau.value));
        let _ = writeln!(
            s,
            "tau_band = {}",
            fmt_f(self.tau.fit.stability / self.spec.n as f64)
        );
        let _ = writeln!(s, "tau_diverging = {}", self.tau.diverging);
        let _ = writeln!(s, "h_raw = {}", fmt_f(self.h.value));
        let _ = writeln!(
            s,
            "h_snapped_even = {}",
            self.h
                .snapped_even
                .map(|v| v.to_string())
                .unwrap_or_else(|| "none".into())
        );
        let _ = writeln!(s, "h_band = {}", fmt_f(self.h.fit.stability));
        let _ = writeln!(s, "ray_distance = {}", fmt_f(self.ray.distance));
        let _ = writeln!(s, "ray_classification = {:?}", self.ray.classification);
        s.push('\n');
        s.push_str("[decomposition]\n");
        let _ = writeln!(s, "verdict = {:?}", self.decomposition.verdict);
        let _ = writeln!(s, "degree = {}", self.decomposition.degree);
        for (j, c) in self.decomposition.coefficients.iter().enumerate() {
            let _ = writeln!(s, "c{} = {}", 2 * j, fmt_f(*c));
        }
        let _ = writeln!(
            s,
            "residual_rms = {}",
            fmt_f(self.decomposition.residual_rms)
        );
        let _ = writeln!(s, "p_spread = {}", fmt_f(self.decomposition.spread));
        let _ = writeln!(
            s,
            "lower_bound_margin = {}",
            fmt_f(self.decomposition.lower_bound_margin)
        );
        let _ = writeln!(s, "entropy_consistent = {}", self.entropy_consistent);
        s.push('\n');
        if !self.checks.is_empty() {
            s.push_str("[checks]\n");
            for c in &self.checks {
                render_check(c, &mut s);
            }
            s.push('\n');
        }
        s.push_str("[warnings]\n");
        for w in &self.warnings {
            let _ = writeln!(s, "- {w}");
        }
        s
    }

    /// Profile dump: r, u, Q e^{nu}, R_g, L(Q e^{nu}), P.
    pub fn profile_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# r  u  q_density  scalar  potential  P");
        let metric_u: Vec<f64> = self
            .decomposition
            .p_samples
            .iter()
            .zip(&self.decomposition.potential_samples)
            .map(|(p, l)| p + l)
            .collect();
        for (i, &r) in self.curvature.grid.nodes().iter().enumerate() {
            let _ = writeln!(
                s,
                "{} {} {} {} {} {}",
                fmt_f(r),
                fmt_f(metric_u[i]),
                fmt_f(self.curvature.q_density[i]),
                fmt_f(self.curvature.scalar[i]),
                fmt_f(self.decomposition.potential_samples[i]),
                fmt_f(self.decomposition.p_samples[i])
            );
        }
        s
    }
}

/// Quantities a table dump can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableQuantity {
    ConformalFactor,
    Potential,
    QDensity,
    Scalar,
    Volume,
}

impl TableQuantity {
    pub fn parse(s: &str) -> Result<TableQuantity> {
        Ok(match s {
            "u" => TableQuantity::ConformalFactor,
            "potential" => TableQuantity::Potential,
            "q_density" => TableQuantity::QDensity,
            "scalar" => TableQuantity::Scalar,
            "volume" => TableQuantity::Volume,
            other => return Err(Error::InvalidSpec(format!(
                "unknown quantity {other:?}; expected u | potential | q_density | scalar | volume"
            ))),
        })
    }
}

/// Two-column tabular dump of one quantity along the grid.
pub fn cmd_table(spec: &MetricSpec, quantity: TableQuantity) -> Result<String> {
    let metric = spec.build()?;
    let grid = spec.grid()?;
    let mut s = String::new();
    match quantity {
        TableQuantity::ConformalFactor => {
            let _ = writeln!(s, "# r  u");
            for &r in grid.nodes() {
                let _ = writeln!(s, "{} {}", fmt_f(r), fmt_f(metric.u.value(r)));
            }
        }
        TableQuantity::Scalar => {
            let _ = writeln!(s, "# r  scalar_curvature");
            for &r in grid.nodes() {
                let _ = writeln!(
                    s,
                    "{} {}",
                    fmt_f(r),
                    fmt_f(curvature::scalar_curvature(&metric, r))
                );
            }
        }
        TableQuantity::QDensity => {
            let res = curvature::q_density(&metric, &grid)?;
            let _ = writeln!(s, "# r  q_density");
            for (&r, &v) in grid.nodes().iter().zip(&res.values) {
                let _ = writeln!(s, "{} {}", fmt_f(r), fmt_f(v));
            }
        }
        TableQuantity::Potential => {
            let dec = decomposition::polynomial_part(&metric, &grid)?;
            let _ = writeln!(s, "# r  potential");
            for (&r, &v) in grid.nodes().iter().zip(&dec.potential_samples) {
                let _ = writeln!(s, "{} {}", fmt_f(r), fmt_f(v));
            }
        }
        TableQuantity::Volume => {
            let curve = entropy::volume_curve(&metric, &grid)?;
            let _ = writeln!(s, "# R  volume  log_volume");
            for ((&r, &v), &lv) in curve
                .radii
                .iter()
                .zip(&curve.volumes)
                .zip(&curve.log_volumes)
            {
                let _ = writeln!(s, "{} {} {}", fmt_f(r), fmt_f(v), fmt_f(lv));
            }
        }
    }
    Ok(s)
}

/// Render a verification-suite report, one line per check.
pub fn render_suite(rep: &verify::SuiteReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "qcurv verification suite");
    let _ = writeln!(s, "schema = {SCHEMA_VERSION}");
    s.push('\n');
    for c in &rep.checks {
        render_check(c, &mut s);
    }
    s.push('\n');
    let _ = writeln!(
        s,
        "summary: {} passed, {} failed, {} skipped",
        rep.passed, rep.failed, rep.skipped
    );
    s
}
