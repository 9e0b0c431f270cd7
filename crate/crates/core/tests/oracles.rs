//! Independent oracles: closed forms computed here, compared with the
//! library's numerical pipeline.

use nalgebra::Vector3;
use std::f64::consts::FRAC_PI_2;

use devsurf_core::curve_model::{
    angles_from_curve, build, curve_from_angles, parse_curve_spec, sample_curve, CurveSpec, Helix,
    SmoothCurve,
};
use devsurf_core::development::{develop_point, unfold};
use devsurf_core::numeric::linspace;
use devsurf_core::shadow_cone::{
    circle_section, classify_ruling_family, cubic_example_quad, monomial_family, MonomialParams,
    RulingFamily,
};
use devsurf_core::tangent_dev::{ruling_direction, surface_point};
use devsurf_core::verify::{isometry_triangle_check, ruling_coplanarity_check, seeded_pairs};

/// `(τ, sin τ, τ²/2)` on `[0.2, 1.5]`: increasing abscissa.
const WAVE: &str = r#"{"family": "expressions", "params": {"t": "tau", "u": "sin(tau)", "v": "tau^2/2"},
    "range": [0.2, 1.5], "samples": 513}"#;

fn wave_tangent(tau: f64) -> Vector3<f64> {
    Vector3::new(1.0, tau.cos(), tau)
}

#[test]
fn ruling_is_the_oriented_unit_tangent() {
    // expression curves take finite-difference tangents: O(Δτ²) with
    // Δτ ≈ 2.5e-3
    let (curve, profile) = build(&parse_curve_spec(WAVE).unwrap()).unwrap();
    for i in 0..curve.len() {
        let d = wave_tangent(curve.tau[i]).normalize();
        let r = ruling_direction(profile.zeta[i], profile.theta[i]);
        assert!((r - d).norm() < 1e-5, "sample {i}: {}", (r - d).norm());
    }

    // helix abscissa decreases, so the ruling is the reversed tangent
    let curve = sample_curve(&CurveSpec::helix(1.0, 1.0, (0.3, 2.0), 257)).unwrap();
    let profile = angles_from_curve(&curve).unwrap();
    for i in 0..curve.len() {
        let t = curve.tau[i];
        let d = Vector3::new(-t.sin(), t.cos(), 1.0).normalize();
        assert!((ruling_direction(profile.zeta[i], profile.theta[i]) + d).norm() < 1e-14);
    }
}

#[test]
fn helix_development_angle_is_linear() {
    // the rulings of the unit helix turn at rate R/√(R²+c²) = 1/√2
    let curve = sample_curve(&CurveSpec::helix(1.0, 1.0, (0.3, 2.0), 10_000)).unwrap();
    let (p, _) = unfold(&curve, &angles_from_curve(&curve).unwrap()).unwrap();
    let omega = p.omega().unwrap();
    for (t, w) in p.tau.iter().zip(omega) {
        assert!((w - (t - 0.3) / 2f64.sqrt()).abs() < 1e-7, "{t}: {w}");
    }
}

fn wave_roundtrip_error(n: usize) -> f64 {
    let tau = linspace(0.2, 1.5, n);
    let zeta: Vec<f64> = tau.iter().map(|&t| 1f64.atan2(t.cos())).collect();
    let theta: Vec<f64> = tau
        .iter()
        .map(|&t| (t / wave_tangent(t).norm()).acos())
        .collect();
    let curve = curve_from_angles(&tau, &zeta, &theta).unwrap();
    (0..n)
        .map(|i| {
            let t = tau[i];
            let exact = Vector3::new(t, t.sin() - 0.2f64.sin(), (t * t - 0.04) / 2.0);
            (curve.position[i] - exact).norm()
        })
        .fold(0.0, f64::max)
}

#[test]
fn curve_from_angles_converges_at_second_order() {
    let (coarse, fine) = (wave_roundtrip_error(257), wave_roundtrip_error(513));
    let ratio = coarse / fine;
    assert!(fine < 1e-6, "{fine}");
    assert!((3.5..=4.5).contains(&ratio), "{ratio}");
}

#[test]
fn planar_directrix_develops_rigidly() {
    // a circle in the plane z = 0 spans that plane; its development is a
    // rigid motion, so all pairwise distances survive
    let spec = r#"{"family": "expressions", "params": {"t": "2*cos(tau)", "u": "2*sin(tau)", "v": "0"},
        "range": [0.3, 2.8], "samples": 4001}"#;
    let (curve, profile) = build(&parse_curve_spec(spec).unwrap()).unwrap();
    assert!(profile.theta.iter().all(|&t| (t - FRAC_PI_2).abs() < 1e-15));
    let (p, dev) = unfold(&curve, &profile).unwrap();
    let pts = seeded_pairs(11, 40, (0.3, 2.8), (0.5, 2.0));
    let spatial: Vec<_> = pts
        .iter()
        .map(|&(t, s)| surface_point(&curve, &p, t, s).unwrap().position)
        .collect();
    let planar: Vec<_> = pts
        .iter()
        .map(|&(t, s)| develop_point(&dev, t, s).unwrap())
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..pts.len() {
        assert!(spatial[i].z.abs() < 1e-12);
        for j in 0..i {
            let d3 = (spatial[i] - spatial[j]).norm();
            let d2 = (planar[i][0] - planar[j][0]).hypot(planar[i][1] - planar[j][1]);
            worst = worst.max((d3 - d2).abs() / d3);
        }
    }
    assert!(worst < 1e-5, "{worst}");
}

#[test]
fn coplanarity_of_tangent_lines_halves_with_step() {
    let helix = Helix {
        radius: 1.0,
        pitch: 1.0,
    };
    let line = |t: f64| helix.eval(t).map(|(p, d)| (p, d.normalize()));
    let taus = linspace(0.3, 1.9, 33);
    let a = ruling_coplanarity_check(line, &taus, 1e-3).unwrap().max;
    let b = ruling_coplanarity_check(line, &taus, 5e-4).unwrap().max;
    assert!(a < 1e-3, "{a}");
    assert!((1.7..=4.5).contains(&(a / b)), "{a} {b}");
}

#[test]
fn isometry_mismatch_converges_with_triangle_size() {
    let curve = sample_curve(&CurveSpec::helix(1.0, 1.0, (0.3, 2.0), 10_000)).unwrap();
    let (p, dev) = unfold(&curve, &angles_from_curve(&curve).unwrap()).unwrap();
    let samples = seeded_pairs(5, 300, (0.3, 1.9), (0.5, 2.0));
    let run = |h: f64| {
        isometry_triangle_check(
            |t, s| surface_point(&curve, &p, t, s).map(|sp| sp.position),
            |t, s| develop_point(&dev, t, s),
            &samples,
            h,
        )
        .unwrap()
        .max
    };
    let (a, b) = (run(4e-2), run(2e-2));
    assert!(b < a, "{a} {b}");
    assert!((1.7..=4.5).contains(&(a / b)), "{a} {b}");

    // doubling ω breaks the isometry
    let mut bad = dev.clone();
    bad.omega.iter_mut().for_each(|w| *w *= 2.0);
    let r = isometry_triangle_check(
        |t, s| surface_point(&curve, &p, t, s).map(|sp| sp.position),
        |t, s| develop_point(&bad, t, s),
        &samples,
        1e-4,
    )
    .unwrap();
    assert!(r.max > 1e-3, "{}", r.max);
}

#[test]
fn cone_apex_by_similar_triangles() {
    // radii 1 and 3 over a gap of 2: the rulings meet one gap-unit before
    // the first plane
    let phi = linspace(-2.0, 2.0, 201);
    let a = circle_section(1.0, [0.5, -0.25], &phi, 0.0).unwrap();
    let b = circle_section(3.0, [0.5, -0.25], &phi, 2.0).unwrap();
    match classify_ruling_family(&a, &b).unwrap() {
        RulingFamily::Cone { apex, .. } => {
            assert!(
                (apex - Vector3::new(-1.0, 0.5, -0.25)).norm() < 1e-10,
                "{apex}"
            );
        }
        other => panic!("expected a cone, got {other:?}"),
    }
    let shifted = circle_section(1.0, [1.5, -0.25], &phi, 2.0).unwrap();
    assert!(matches!(
        classify_ruling_family(&a, &shifted).unwrap(),
        RulingFamily::Cylinder { .. }
    ));
    let skew = circle_section(
        2.0,
        [0.5, 1.0],
        &linspace(-2.0, 2.0, 201)
            .iter()
            .map(|p| p * 1.1)
            .collect::<Vec<_>>(),
        2.0,
    );
    let skew = skew.unwrap();
    assert_eq!(classify_ruling_family(&a, &skew).unwrap().name(), "general");
}

#[test]
fn monomial_family_recovers_the_cubic_quad() {
    let params = MonomialParams {
        f: 2.0,
        g: 1.0,
        h: 3.0,
        k: 2.0,
        kappa: 1.into(),
        lambda: 0.into(),
        mu: 1.into(),
        nu: 2.into(),
    };
    let quad = monomial_family(&params).unwrap();
    let cubic = cubic_example_quad();
    for phi in linspace(0.1, 2.0, 20) {
        let (x, y) = (quad.eval(phi).unwrap(), cubic.eval(phi).unwrap());
        for k in 0..4 {
            assert!(
                (x[k] - y[k]).abs() <= 1e-14 * y[k].abs().max(1.0),
                "{phi} {k}"
            );
        }
    }
}
