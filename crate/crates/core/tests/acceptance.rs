//! Acceptance suite: one test per quantitative criterion, each printing a
//! PASS line with the measured values at the stated tolerance.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture`.

use qcurv::curvature;
use qcurv::decomposition::{self, Verdict};
use qcurv::entropy::{self, Completeness};
use qcurv::numerics::RadialGrid;
use qcurv::operators::{half_laplacian_at, halflap_fourier_oracle, HalfLapConfig};
use qcurv::potential::potential_profile;
use qcurv::profiles::{builtin_profile, composite_profile, ConformalMetric, Family, RadialProfile};
use qcurv::verify;
use std::f64::consts::PI;
use std::time::Instant;

fn grid() -> RadialGrid {
    RadialGrid::default_grid()
}

fn bump(alpha: f64, n: usize) -> RadialProfile {
    builtin_profile(Family::Bump {
        alpha,
        center: 1.0,
        width: 0.5,
        n,
    })
    .unwrap()
}

fn potential_metric(alpha: f64, n: usize) -> ConformalMetric {
    let u = potential_profile(&bump(alpha, n), n).unwrap();
    ConformalMetric::new(n, u).unwrap()
}

#[test]
fn criterion_01_nonnormal_area_law() {
    // total Q of u = -beta log(1+r^2) + r^2 equals (n-1)! |S^n| beta = 4 pi^2 beta.
    for beta in [0.25, 0.5, 1.0] {
        let t0 = Instant::now();
        let u = builtin_profile(Family::Nonnormal { beta }).unwrap();
        let m = ConformalMetric::new(3, u).unwrap();
        let total = curvature::total_q_on(&m, &grid()).unwrap();
        let want = 4.0 * PI * PI * beta;
        let rel = (total.integral - want).abs() / want;
        let secs = t0.elapsed().as_secs_f64();
        assert!(
            rel <= 0.01,
            "beta={beta}: total {} vs {want} (rel {rel:.2e})",
            total.integral
        );
        assert!(secs < 60.0, "beta={beta} took {secs:.1} s");
        println!(
            "criterion 1 (area law, beta={beta}): PASS - total {:.6} vs {want:.6}, rel {rel:.2e}, {secs:.1} s",
            total.integral
        );
    }
}

#[test]
fn criterion_02_tau_formula() {
    for alpha in [0.25, 0.5, 0.75] {
        let m = potential_metric(alpha, 3);
        let curve = entropy::volume_curve(&m, &grid()).unwrap();
        let tau = entropy::tau_estimate(&curve).unwrap();
        assert!(!tau.diverging, "alpha={alpha}: tau diverged");
        let want = 1.0 - alpha;
        assert!(
            (tau.value - want).abs() <= 0.05,
            "alpha={alpha}: tau {} vs {want}",
            tau.value
        );
        println!(
            "criterion 2 (tau = 1 - alpha, alpha={alpha}): PASS - tau {:.4} vs {want:.4}",
            tau.value
        );
    }
}

#[test]
fn criterion_03_h_entropy_of_monomials() {
    for (n, k) in [(3usize, 1u32), (5, 1), (5, 2)] {
        let u = builtin_profile(Family::Monomial { k }).unwrap();
        let m = ConformalMetric::new(n, u).unwrap();
        let c = entropy::volume_curve(&m, &RadialGrid::geometric(1e-2, 1e4, 121).unwrap()).unwrap();
        let h = entropy::h_estimate(&c).unwrap();
        let want = 2.0 * k as f64;
        assert!(
            (h.value - want).abs() <= 0.15,
            "(n,k)=({n},{k}): h {}",
            h.value
        );
        assert_eq!(h.snapped_even, Some(2 * k as i64));
        assert!(2 * k as usize <= n - 1);
        println!(
            "criterion 3 (h(g_k) = 2k, n={n}, k={k}): PASS - h {:.4} snaps to {}",
            h.value,
            2 * k
        );
    }
}

#[test]
fn criterion_04_shell_exponent() {
    for alpha in [0.0, 0.4] {
        let c = verify::check_shell_exponent(alpha, 3).unwrap();
        assert!(
            c.pass,
            "alpha={alpha}: slope {} vs {} (band {})",
            c.measured, c.predicted, c.band
        );
        println!(
            "criterion 4 (shell exponent, alpha={alpha}): PASS - slope {:.4} vs {:.4}",
            c.measured, c.predicted
        );
    }
}

#[test]
fn criterion_05_blowdown_limits() {
    let m = potential_metric(0.5, 3);
    let checks = verify::check_blowdown_limits(&m, &grid()).unwrap();
    for c in &checks {
        assert!(c.skipped.is_none(), "{} skipped", c.id);
        assert!(
            c.pass,
            "{}: measured {} vs {} (band {}, tol {})",
            c.id, c.measured, c.predicted, c.band, c.tolerance
        );
        println!(
            "criterion 5 ({}): PASS - measured {:.5} vs {:.5}",
            c.id, c.measured, c.predicted
        );
    }
}

#[test]
fn criterion_06_scalar_curvature_spot_values() {
    let sph = ConformalMetric::new(3, builtin_profile(Family::Sphere).unwrap()).unwrap();
    // The factor -Delta u - u'^2/2 cancels to 6/(1+r^2)^4-scale from
    // 1/r^2-scale terms; the f64 floor of the product with e^{-2u} grows
    // like eps r^4 and crosses 1e-8 near r ~ 6e3. Assert the stated
    // tolerance where f64 can represent it and a floor-tracking bound above.
    for r in [0.0, 1.0, 5.0, 100.0, 1000.0] {
        let v = curvature::scalar_curvature(&sph, r);
        assert!((v - 6.0).abs() <= 1e-8, "sphere at r={r}: {v}");
    }
    for &r in grid().nodes() {
        let v = curvature::scalar_curvature(&sph, r);
        let tol = if r <= 1e3 { 1e-8 } else { 2e-7 };
        assert!((v - 6.0).abs() <= tol, "sphere at r={r}: {v}");
    }
    let mono =
        ConformalMetric::new(3, builtin_profile(Family::Monomial { k: 1 }).unwrap()).unwrap();
    let v0 = curvature::scalar_curvature(&mono, 0.0);
    assert!((v0 + 24.0).abs() <= 1e-8, "monomial at 0: {v0}");
    println!("criterion 6 (scalar spot values): PASS - sphere 6 on r <= 1e3, monomial(1) at 0 = {v0:.10}");
}

#[test]
fn criterion_07_half_laplacian_against_oracle() {
    let g = RadialProfile::gaussian(1.0);
    let cfg = HalfLapConfig::for_dimension(3).unwrap();
    let pts = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
    let oracle = halflap_fourier_oracle(&g, &pts, 3).unwrap();
    let mut worst = 0.0f64;
    for (i, &r) in pts.iter().enumerate() {
        let (pv, _) = half_laplacian_at(&g, r, 3, &cfg).unwrap();
        let rel = (pv - oracle[i]).abs() / oracle[i].abs();
        worst = worst.max(rel);
        assert!(rel <= 1e-4, "at r={r}: pv {pv} vs oracle {}", oracle[i]);
    }
    // Composition: two half-Laplacians equal one Laplacian on the Gaussian.
    let once = RadialProfile::interpolated(
        |r| {
            half_laplacian_at(&g, r, 3, &cfg)
                .expect("inner half-Laplacian")
                .0
        },
        1e-4,
        4e4,
        32,
    );
    let mut worst_comp = 0.0f64;
    for &r in &pts {
        let (twice, _) = half_laplacian_at(&once, r, 3, &cfg).unwrap();
        let want = (3.0 - r * r) * (-r * r / 2.0).exp();
        let rel = (twice - want).abs() / want.abs();
        worst_comp = worst_comp.max(rel);
        assert!(rel <= 1e-3, "at r={r}: composed {twice} vs -Delta G {want}");
    }
    println!(
        "criterion 7 (half-Laplacian): PASS - PV vs oracle worst rel {worst:.2e}, composition worst rel {worst_comp:.2e}"
    );
}

#[test]
fn criterion_08_decomposition() {
    let g = grid();

    let m =
        ConformalMetric::new(3, builtin_profile(Family::Nonnormal { beta: 1.0 }).unwrap()).unwrap();
    let d = decomposition::polynomial_part(&m, &g).unwrap();
    assert_eq!(d.verdict, Verdict::NonNormal);
    assert_eq!(d.degree, 2);
    assert!(
        (d.coefficients[1] - 1.0).abs() <= 0.02,
        "c2 {}",
        d.coefficients[1]
    );
    println!(
        "criterion 8a (nonnormal decomposition): PASS - degree 2, c2 {:.5}",
        d.coefficients[1]
    );

    let m = ConformalMetric::new(3, builtin_profile(Family::Sphere).unwrap()).unwrap();
    let d = decomposition::polynomial_part(&m, &g).unwrap();
    assert_eq!(d.verdict, Verdict::Normal);
    assert!(d.spread <= 5e-3, "sphere spread {}", d.spread);
    println!(
        "criterion 8b (sphere decomposition): PASS - normal, P spread {:.2e}",
        d.spread
    );

    let pot = potential_profile(&bump(0.3, 3), 3).unwrap();
    let r2 = builtin_profile(Family::Monomial { k: 1 }).unwrap();
    let u = composite_profile(&[(r2, 1.0), (pot, 1.0)]).unwrap();
    let m = ConformalMetric::new(3, u).unwrap();
    let d = decomposition::polynomial_part(&m, &g).unwrap();
    assert_eq!(d.degree, 2);
    assert!(
        (d.coefficients[1] - 1.0).abs() <= 0.02,
        "c2 {}",
        d.coefficients[1]
    );
    println!(
        "criterion 8c (constructed r^2 + potential): PASS - degree 2, c2 {:.5}",
        d.coefficients[1]
    );
}

#[test]
fn criterion_09_cohn_vossen_property() {
    let g = grid();
    let configs: Vec<(&str, ConformalMetric)> = vec![
        (
            "flat",
            ConformalMetric::new(3, builtin_profile(Family::Flat).unwrap()).unwrap(),
        ),
        (
            "sphere",
            ConformalMetric::new(3, builtin_profile(Family::Sphere).unwrap()).unwrap(),
        ),
        (
            "monomial-k1",
            ConformalMetric::new(3, builtin_profile(Family::Monomial { k: 1 }).unwrap()).unwrap(),
        ),
        (
            "nonnormal-b1",
            ConformalMetric::new(3, builtin_profile(Family::Nonnormal { beta: 1.0 }).unwrap())
                .unwrap(),
        ),
        ("potential-a05", potential_metric(0.5, 3)),
        ("potential-a15", potential_metric(1.5, 3)),
    ];
    for (label, m) in &configs {
        let rep = decomposition::normality_test_on(m, &g).unwrap();
        let ray = entropy::ray_distance(m, 1e4).unwrap();
        let alpha0 = curvature::total_q_on(m, &g)
            .map(|t| t.alpha)
            .unwrap_or(f64::NAN);
        let violation = rep.verdict == Verdict::Normal
            && ray.classification == Completeness::Complete
            && alpha0 > 1.01;
        assert!(
            !violation,
            "{label}: normal + complete with alpha_0 = {alpha0}"
        );
        println!(
            "criterion 9 ({label}): PASS - verdict {:?}, ray {:?}, alpha0 {alpha0:.4}",
            rep.verdict, ray.classification
        );
    }
}

#[test]
fn criterion_10_scalar_conditionals() {
    // Flat boundary case of the nonnegative-scalar control.
    let flat = ConformalMetric::new(3, builtin_profile(Family::Flat).unwrap()).unwrap();
    let g = grid();
    let sign = curvature::scalar_sign_profile(&flat, &g);
    assert!(sign.scalar.iter().all(|&v| v == 0.0));
    let curve = entropy::volume_curve(&flat, &g).unwrap();
    let tau = entropy::tau_estimate(&curve).unwrap();
    assert!((tau.value - 1.0).abs() <= 0.01, "flat tau {}", tau.value);
    println!(
        "criterion 10a (flat boundary): PASS - R_g = 0, tau {:.6}",
        tau.value
    );

    // alpha_0 = 1 normal metric under a strictly positive scalar floor.
    let density = composite_profile(&[(RadialProfile::sphere_density(3), 0.5)]).unwrap();
    let u = potential_profile(&density, 3).unwrap();
    let m = ConformalMetric::new(3, u).unwrap();
    let long = RadialGrid::geometric(1e-3, 1e6, 310).unwrap();
    let rep = decomposition::normality_test_on(&m, &long).unwrap();
    assert_eq!(rep.verdict, Verdict::Normal);
    let curve = entropy::volume_curve(&m, &long).unwrap();
    let tau = entropy::tau_estimate(&curve).unwrap();
    assert!(tau.value <= 0.05, "alpha0=1 metric tau {}", tau.value);
    println!(
        "criterion 10b (alpha0 = 1 positive-floor metric): PASS - normal, tau {:.4} <= 0.05",
        tau.value
    );
}
