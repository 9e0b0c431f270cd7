//! Acceptance suite: one function per criterion, each returning a
//! [`CriterionOutcome`] with the measured quantities in `detail`.

use std::time::Instant;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve_model::{
    angles_from_curve, curve_from_angles, sample_curve, AngleProfile, CurveSpec, Helix,
};
use crate::development::{develop_point, developed_curvature, fit_circle, omega_profile, unfold};
use crate::error::Error;
use crate::frame_sextet::{check_conditions, check_tangent_relation, sextet};
use crate::geom_io::{
    export_csv, export_obj, export_svg, parse_csv, report_json, Flat2Doc, Mesh3Doc, SvgStyle, Table,
};
use crate::numeric::linspace;
use crate::shadow_cone::{
    circle_section, classify_ruling_family, cubic_example_quad, cubic_example_residual,
    pqrs_surface, RulingFamily, SampledQuad, CONDITION_TOL,
};
use crate::tangent_dev::{
    gaussian_curvature_estimate, smooth_surface_fn, surface_grid, surface_point,
};
use crate::verify::{
    apex_homogeneity, isometry_triangle_check, parametric_curvature_check, seeded_pairs,
    CheckEntry, VerificationReport,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub ms: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} {:>2} {:<26} {} ({:.0} ms)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.ms
        )
    }
}

fn outcome(
    id: u32,
    name: &'static str,
    started: Instant,
    result: Result<(bool, String), Error>,
) -> CriterionOutcome {
    let (pass, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionOutcome {
        id,
        name,
        pass,
        detail,
        ms: started.elapsed().as_secs_f64() * 1e3,
    }
}

/// Smooth angle functions on `t ∈ [0, 1]`:
/// `ζ = ζ₀ + c t + Σ aₖ sin(kπt + φₖ)`, `θ = θ₀ + b t + Σ bₖ sin(kπt + ψₖ)`.
/// The ranges keep `ζ` monotone, both angles inside `(0, π)` and `ω` below
/// `π/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothAngles {
    pub zeta0: f64,
    pub zeta_slope: f64,
    pub zeta_waves: [(f64, f64); 3],
    pub theta0: f64,
    pub theta_slope: f64,
    pub theta_waves: [(f64, f64); 3],
}

impl SmoothAngles {
    /// Draws until the ruling-direction curve turns with geodesic curvature of
    /// one sign and at least [`MIN_TURNING`] in magnitude, so the frame
    /// derivatives never vanish.
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        loop {
            let mut waves = |amp: f64| {
                let mut w = [(0.0, 0.0); 3];
                for x in &mut w {
                    *x = (
                        rng.random_range(-amp..amp),
                        rng.random_range(0.0..std::f64::consts::TAU),
                    );
                }
                w
            };
            let zeta_waves = waves(0.01);
            let theta_waves = waves(0.002);
            let candidate = SmoothAngles {
                zeta0: rng.random_range(1.0..1.4),
                zeta_slope: rng.random_range(0.5..0.7),
                zeta_waves,
                theta0: rng.random_range(0.9..1.2),
                theta_slope: rng.random_range(-0.2..0.2),
                theta_waves,
            };
            if candidate.min_turning() >= MIN_TURNING {
                return candidate;
            }
        }
    }

    fn direction(&self, t: f64) -> Vector3<f64> {
        let z = Self::eval(self.zeta0, self.zeta_slope, &self.zeta_waves, t);
        let th = Self::eval(self.theta0, self.theta_slope, &self.theta_waves, t);
        Vector3::new(th.sin() * z.sin(), th.sin() * z.cos(), th.cos())
    }

    /// Smallest |geodesic curvature| of the direction curve, by central
    /// differences on the closed form.
    pub fn min_turning(&self) -> f64 {
        let h = 1e-4;
        linspace(h, 1.0 - h, 257)
            .into_iter()
            .map(|t| {
                let (a, b, c) = (
                    self.direction(t - h),
                    self.direction(t),
                    self.direction(t + h),
                );
                let d1 = (c - a) / (2.0 * h);
                let d2 = (c - 2.0 * b + a) / (h * h);
                b.dot(&d1.cross(&d2)).abs() / d1.norm().powi(3)
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn eval(base: f64, slope: f64, waves: &[(f64, f64); 3], t: f64) -> f64 {
        let mut v = base + slope * t;
        for (k, (a, p)) in waves.iter().enumerate() {
            v += a * ((k + 1) as f64 * std::f64::consts::PI * t + p).sin();
        }
        v
    }

    pub fn profile(&self, n: usize) -> Result<AngleProfile, Error> {
        let t = linspace(0.0, 1.0, n);
        let zeta = t
            .iter()
            .map(|&x| Self::eval(self.zeta0, self.zeta_slope, &self.zeta_waves, x))
            .collect();
        let theta = t
            .iter()
            .map(|&x| Self::eval(self.theta0, self.theta_slope, &self.theta_waves, x))
            .collect();
        AngleProfile::new(t, zeta, theta)
    }
}

pub const RANDOM_PROFILES: usize = 100;
pub const MIN_TURNING: f64 = 0.1;

pub fn random_profiles(seed: u64, count: usize) -> Vec<SmoothAngles> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| SmoothAngles::random(&mut rng)).collect()
}

/// Residual of the implicit cubic on the `100 × 100` grid over `[−2, 2]²`.
pub fn cubic_example() -> CriterionOutcome {
    let started = Instant::now();
    let grid = linspace(-2.0, 2.0, 100);
    let mut worst: f64 = 0.0;
    for &phi in &grid {
        for &x in &grid {
            worst = worst.max(cubic_example_residual(phi, x));
        }
    }
    let ms = started.elapsed().as_secs_f64() * 1e3;
    let pass = worst <= 1e-9 && ms < 1000.0;
    outcome(
        1,
        "cubic example residual",
        started,
        Ok((pass, format!("max scaled residual {worst:.3e} (tol 1e-9)"))),
    )
}

/// Unit norms and orthogonality of the sextet on random profiles.
pub fn sextet_algebra(seed: u64) -> CriterionOutcome {
    let started = Instant::now();
    let run = || -> Result<(bool, String), Error> {
        let (mut a, mut b, mut c) = (0.0f64, 0.0f64, 0.0f64);
        for angles in random_profiles(seed, RANDOM_PROFILES) {
            let p = omega_profile(&angles.profile(1024)?)?;
            let f = sextet(&p)?;
            for i in 0..f.len() {
                a = a.max((f.along_t[i].norm_squared() - 1.0).abs());
                b = b.max((f.along_u[i].norm_squared() - 1.0).abs());
                c = c.max(f.along_t[i].dot(&f.along_u[i]).abs());
            }
        }
        let ms = started.elapsed().as_secs_f64() * 1e3;
        let pass = a <= 1e-12 && b <= 1e-12 && c <= 1e-12 && ms < 5000.0;
        Ok((
            pass,
            format!("|lmn|²-1 {a:.1e}, |λμν|²-1 {b:.1e}, lλ+mμ+nν {c:.1e} (tol 1e-12)"),
        ))
    };
    outcome(2, "sextet unit/orthogonal", started, run())
}

/// `dλ = −tanω dl` on random profiles, with a two-grid convergence ratio.
pub fn tangent_relation(seed: u64) -> CriterionOutcome {
    let started = Instant::now();
    let run = || -> Result<(bool, String), Error> {
        let residual = |angles: &SmoothAngles, n: usize| -> Result<f64, Error> {
            let p = omega_profile(&angles.profile(n)?)?;
            Ok(check_tangent_relation(&sextet(&p)?)?.residual.max)
        };
        let (mut worst, mut lo, mut hi) = (0.0f64, f64::INFINITY, 0.0f64);
        for angles in random_profiles(seed, RANDOM_PROFILES) {
            let fine = residual(&angles, 4096)?;
            let coarse = residual(&angles, 2048)?;
            worst = worst.max(fine);
            let ratio = coarse / fine;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        let pass = worst <= 1e-5 && lo >= 1.7 && hi <= 4.5;
        Ok((
            pass,
            format!(
                "max {worst:.2e} at N=4096 (tol 1e-5), ratio N=2048/4096 in [{lo:.2}, {hi:.2}]"
            ),
        ))
    };
    outcome(3, "tangent relation", started, run())
}

/// Helix grid used for the differential consistency check: `Δτ = 2.5e-5`
/// on `[0.3, 2.0]`, so both steps are whole numbers of cells.
pub const DIFFERENTIAL_GRID: usize = 68_001;

/// `dx` against `l dT + λ dU` on the helix at two steps.
pub fn differential_consistency() -> CriterionOutcome {
    let started = Instant::now();
    let run = || -> Result<(bool, String), Error> {
        let curve = sample_curve(&CurveSpec::helix(1.0, 1.0, (0.3, 2.0), DIFFERENTIAL_GRID))?;
        let (p, dev) = unfold(&curve, &angles_from_curve(&curve)?)?;
        let frame = sextet(&p)?;
        let coarse = check_conditions(&frame, &curve, &dev, 1e-3)?;
        let fine = check_conditions(&frame, &curve, &dev, 1e-4)?;
        let (a, b) = (coarse.differential.max, fine.differential.max);
        let pass = a <= 1e-5 && b <= 1e-7;
        Ok((
            pass,
            format!(
                "h=1e-3: {a:.2e} (tol 1e-5), h=1e-4: {b:.2e} (tol 1e-7), ratio {:.1}",
                a / b
            ),
        ))
    };
    outcome(4, "differential consistency", started, run())
}

/// Developed helix: constant curvature `R/(R²+c²)` and a circle of radius 2.
pub fn helix_development() -> CriterionOutcome {
    let started = Instant::now();
    let run = || -> Result<(bool, String), Error> {
        let helix = Helix {
            radius: 1.0,
            pitch: 1.0,
        };
        let curve = sample_curve(&CurveSpec::helix(1.0, 1.0, (0.3, 2.0), 10_000))?;
        let (_, dev) = unfold(&curve, &angles_from_curve(&curve)?)?;
        let kappa = helix.curvature();
        let worst_k = developed_curvature(&dev)?
            .iter()
            .map(|k| (k - kappa).abs() / kappa)
            .fold(0.0, f64::max);
        let pts: Vec<[f64; 2]> = dev.pd.iter().zip(&dev.qd).map(|(&p, &q)| [p, q]).collect();
        let fit = fit_circle(&pts)?;
        let pass = worst_k <= 1e-6
            && fit.max_deviation <= 1e-5
            && (fit.radius - 1.0 / kappa).abs() <= 1e-5;
        Ok((
            pass,
            format!(
                "curvature rel err {worst_k:.1e} (tol 1e-6), radius {:.9}, radial dev {:.1e} (tol 1e-5)",
                fit.radius, fit.max_deviation
            ),
        ))
    };
    outcome(5, "helix development", started, run())
}

/// Side lengths of 1000 seeded elementary triangles, surface against plane.
pub fn isometry(seed: u64) -> CriterionOutcome {
    let started = Instant::now();
    let run = || -> Result<(bool, String), Error> {
        let h = 1e-4;
        let curve = sample_curve(&CurveSpec::helix(1.0, 1.0, (0.3, 2.0), 10_000))?;
        let (p, dev) = unfold(&curve, &angles_from_curve(&curve)?)?;
        let samples = seeded_pairs(seed, 1000, (0.3, 2.0 - h), (0.5, 2.0));
        let surf = |t: f64, s: f64| surface_point(&curve, &p, t, s).map(|sp| sp.position);
        let flat = |t: f64, s: f64| develop_point(&dev, t, s);
        let r = isometry_triangle_check(surf, flat, &samples, h)?;
        Ok((
            r.max <= 1e-6,
            format!("max relative side mismatch {:.2e} (tol 1e-6)", r.max),
        ))
    };
    outcome(6, "isometry", started, run())
}

/// `|K|` on the helix tangent developable and the cubic example surface,
/// with the unit sphere as a negative control.
pub fn flatness() -> CriterionOutcome {
    let started = Instant::now();
    let run = || -> Result<(bool, String), Error> {
        let h = 1e-3;
        let helix = Helix {
            radius: 1.0,
            pitch: 1.0,
        };
        let tangent = smooth_surface_fn(&helix, -1.0);
        let taus = linspace(0.4, 1.9, 16);
        let ss = linspace(0.5, 2.0, 16);
        let k_tangent = parametric_curvature_check(&tangent, &taus, &ss, h, 1.0)?;

        let quad = pqrs_surface(cubic_example_quad(), (0.5, 1.5), 201, CONDITION_TOL)?;
        let cubic = |phi: f64, x: f64| quad.point(phi, x);
        let k_cubic = parametric_curvature_check(
            cubic,
            &linspace(0.5, 1.5, 16),
            &linspace(0.0, 1.0, 16),
            h,
            1.0,
        )?;

        let sphere =
            |a: f64, b: f64| Ok(Vector3::new(a.sin() * b.cos(), a.sin() * b.sin(), a.cos()));
        let k_sphere = gaussian_curvature_estimate(sphere, 1.0, 0.5, h)?;
        let sphere_fails = k_sphere.abs() > 1e-6;
        let pass = k_tangent.max <= 1e-6
            && k_cubic.max <= 1e-6
            && (k_sphere - 1.0).abs() <= 1e-3
            && sphere_fails;
        Ok((
            pass,
            format!(
                "tangent {:.1e}, quad {:.1e} (tol 1e-6); sphere K={k_sphere:.6} rejected={sphere_fails}",
                k_tangent.max, k_cubic.max
            ),
        ))
    };
    outcome(7, "curvature flatness", started, run())
}

/// Slope grid used for the circle sections.
pub fn section_slopes() -> Vec<f64> {
    linspace(-3.0, 3.0, 301)
}

/// Cylinder and cone detection, and homogeneity of the cone about its apex.
pub fn shadow_classification(seed: u64) -> CriterionOutcome {
    let started = Instant::now();
    let run = || -> Result<(bool, String), Error> {
        let phi = section_slopes();
        let a = circle_section(1.0, [0.0, 0.0], &phi, 0.0)?;
        let same = circle_section(1.0, [0.0, 0.0], &phi, 1.0)?;
        let double = circle_section(2.0, [0.0, 0.0], &phi, 1.0)?;
        let cylinder_spread = match classify_ruling_family(&a, &same)? {
            RulingFamily::Cylinder { spread, .. } => Some(spread),
            _ => None,
        };
        let apex = match classify_ruling_family(&a, &double)? {
            RulingFamily::Cone { apex, .. } => Some(apex),
            _ => None,
        };
        let (Some(spread), Some(apex)) = (cylinder_spread, apex) else {
            return Ok((
                false,
                "equal circles not a cylinder or unequal circles not a cone".into(),
            ));
        };
        let homogeneity =
            apex_homogeneity(&SampledQuad::from_sections(&a, &double)?, &apex, seed)?.max;
        let pass = spread <= 1e-10 && (apex.x + 1.0).abs() <= 1e-8 && homogeneity <= 1e-8;
        Ok((
            pass,
            format!(
                "cylinder spread {spread:.1e}, apex x {:.12}, homogeneity {homogeneity:.1e} (tol 1e-8)",
                apex.x
            ),
        ))
    };
    outcome(8, "shadow classification", started, run())
}

/// Round trips and byte determinism.
pub fn round_trips(seed: u64) -> CriterionOutcome {
    let started = Instant::now();
    let run = || -> Result<(bool, String), Error> {
        let mut angle_err: f64 = 0.0;
        for angles in random_profiles(seed, 10) {
            let p = angles.profile(4096)?;
            let curve = curve_from_angles(&p.tau, &p.zeta, &p.theta)?;
            let back = angles_from_curve(&curve)?;
            for i in 0..p.len() {
                angle_err = angle_err
                    .max((back.zeta[i] - p.zeta[i]).abs())
                    .max((back.theta[i] - p.theta[i]).abs());
            }
        }

        let first = export_bundle(seed)?;
        let again = export_bundle(seed)?;
        let deterministic = first == again;

        let table = parse_csv(&first[2])?;
        let p = omega_profile(&random_profiles(seed, 1)[0].profile(257)?)?;
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        let original = [
            bits(&p.tau),
            bits(&p.zeta),
            bits(&p.theta),
            bits(p.omega()?),
        ];
        let parsed: Vec<_> = table.columns.iter().map(|c| bits(&c.1)).collect();
        let csv_bitwise = parsed == original;

        let pass = angle_err <= 1e-8 && csv_bitwise && deterministic;
        Ok((
            pass,
            format!("angles {angle_err:.1e} (tol 1e-8), csv bitwise {csv_bitwise}, exports deterministic {deterministic}"),
        ))
    };
    outcome(9, "round trips", started, run())
}

/// OBJ, SVG, CSV and report bytes for a fixed pipeline.
fn export_bundle(seed: u64) -> Result<Vec<String>, Error> {
    let curve = sample_curve(&CurveSpec::helix(1.0, 1.0, (0.3, 2.0), 400))?;
    let (p, dev) = unfold(&curve, &angles_from_curve(&curve)?)?;
    let mesh = surface_grid(&curve, &p, (0.3, 2.0), (0.5, 2.0), 40, 8)?;
    let obj = export_obj(&Mesh3Doc::from_surface(&mesh))?;
    let svg = export_svg(
        &Flat2Doc::from_development(&dev, 20, (0.5, 2.0))?,
        &SvgStyle::default(),
    )?;

    let q = omega_profile(&random_profiles(seed, 1)[0].profile(257)?)?;
    let table = Table::new()
        .column("tau", q.tau.clone())
        .column("zeta", q.zeta.clone())
        .column("theta", q.theta.clone())
        .column("omega", q.omega()?.to_vec());
    let csv = export_csv(&table)?;

    let started = Instant::now();
    let samples = seeded_pairs(seed, 50, (0.3, 1.9), (0.5, 2.0));
    let r = isometry_triangle_check(
        |t, s| surface_point(&curve, &p, t, s).map(|sp| sp.position),
        |t, s| develop_point(&dev, t, s),
        &samples,
        1e-3,
    )?;
    let mut report = VerificationReport::default();
    report.push(CheckEntry::new("isometry", 1e-6, &r, Some(seed), started));
    let json = report_json("unfold", &report.without_timing(), None);
    Ok(vec![obj, svg, csv, json])
}

/// Run criteria 1 to 9, then report the total wall time as criterion 10.
pub fn run_all(seed: u64) -> Vec<CriterionOutcome> {
    let started = Instant::now();
    let mut out = vec![
        cubic_example(),
        sextet_algebra(seed),
        tangent_relation(seed),
        differential_consistency(),
        helix_development(),
        isometry(seed),
        flatness(),
        shadow_classification(seed),
        round_trips(seed),
    ];
    let secs = started.elapsed().as_secs_f64();
    out.push(CriterionOutcome {
        id: 10,
        name: "selftest runtime",
        pass: secs < 60.0,
        detail: format!("{secs:.2} s (limit 60 s)"),
        ms: secs * 1e3,
    });
    out
}
