//! Developability certificates: isometry of the unfolding, coplanarity of
//! neighbouring rulings, homogeneity of cones, and the Gaussian curvature
//! of parametric and implicit surfaces.
//!
//! Every check yields a [`CheckEntry`] whose `pass` flag is exactly
//! `max_residual <= tolerance`. Random sample sets come from a seeded
//! ChaCha stream so that reports are reproducible bit for bit.

use std::time::Instant;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, SpecError};
use crate::expr::Expr;
use crate::numeric::Residual;
use crate::shadow_cone::{
    cubic_example_equation, cubic_example_point, cubic_example_scale, SampledQuad,
};
use crate::specdoc;
use crate::tangent_dev::gaussian_curvature_estimate;

pub const DEFAULT_SEED: u64 = 0x4519;

/// Absolute floor added to relative-residual denominators.
pub const RELATIVE_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub check: String,
    pub tolerance: f64,
    pub max_residual: f64,
    pub argmax: Vec<f64>,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub pass: bool,
    pub ms: f64,
}

impl CheckEntry {
    pub fn new(
        check: impl Into<String>,
        tolerance: f64,
        residual: &Residual,
        seed: Option<u64>,
        started: Instant,
    ) -> Self {
        CheckEntry {
            check: check.into(),
            tolerance,
            max_residual: residual.max,
            argmax: residual.argmax.clone(),
            samples: residual.samples,
            seed,
            pass: residual.max <= tolerance,
            ms: started.elapsed().as_secs_f64() * 1e3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckEntry>,
}

impl VerificationReport {
    pub fn push(&mut self, entry: CheckEntry) {
        self.checks.push(entry);
        self.checks.sort_by(|a, b| a.check.cmp(&b.check));
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, check: &str) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| c.check == check)
    }

    /// Copy with wall-time fields zeroed, for byte comparisons.
    pub fn without_timing(&self) -> Self {
        let mut out = self.clone();
        for c in &mut out.checks {
            c.ms = 0.0;
        }
        out
    }
}

/// `n` points drawn uniformly from `[a.0, a.1) × [b.0, b.1)`.
pub fn seeded_pairs(seed: u64, n: usize, a: (f64, f64), b: (f64, f64)) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (rng.random_range(a.0..a.1), rng.random_range(b.0..b.1)))
        .collect()
}

/// Compare side lengths of the triangle `(τ,s), (τ,s+h), (τ+h,s)` on the
/// surface and in the development; records the largest relative mismatch.
pub fn isometry_triangle_check<S, D>(
    surface: S,
    development: D,
    samples: &[(f64, f64)],
    h: f64,
) -> Result<Residual, Error>
where
    S: Fn(f64, f64) -> Result<Vector3<f64>, Error>,
    D: Fn(f64, f64) -> Result<[f64; 2], Error>,
{
    let mut res = Residual::empty();
    for &(tau, s) in samples {
        let corners = [(tau, s), (tau, s + h), (tau + h, s)];
        let mut spatial = [Vector3::zeros(); 3];
        let mut planar = [[0.0; 2]; 3];
        for (k, &(t, r)) in corners.iter().enumerate() {
            spatial[k] = surface(t, r)?;
            planar[k] = development(t, r)?;
        }
        let mut worst: f64 = 0.0;
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let l3 = (spatial[i] - spatial[j]).norm();
            let l2 = (planar[i][0] - planar[j][0]).hypot(planar[i][1] - planar[j][1]);
            worst = worst.max((l3 - l2).abs() / (l3 + RELATIVE_FLOOR));
        }
        res.record_at(worst, &[tau, s]);
    }
    Ok(res)
}

/// Sine of the angle between the chord joining two neighbouring base points
/// and the plane of their rulings. Zero for coplanar pairs and when the
/// rulings or the base points coincide.
pub fn coplanarity_residual(
    b1: &Vector3<f64>,
    e1: &Vector3<f64>,
    b2: &Vector3<f64>,
    e2: &Vector3<f64>,
) -> f64 {
    let normal = e1.cross(e2);
    let chord = b2 - b1;
    let (nn, cn) = (normal.norm(), chord.norm());
    let scale = e1.norm() * e2.norm();
    if nn <= f64::EPSILON * scale || cn == 0.0 {
        return 0.0;
    }
    normal.dot(&chord).abs() / (nn * cn)
}

/// Coplanarity of the rulings at `τ` and `τ + h` for every `τ` in `taus`.
/// `line(τ)` returns a base point and the ruling direction.
pub fn ruling_coplanarity_check<L>(line: L, taus: &[f64], h: f64) -> Result<Residual, Error>
where
    L: Fn(f64) -> Result<(Vector3<f64>, Vector3<f64>), Error>,
{
    let mut res = Residual::empty();
    for &tau in taus {
        let (b1, e1) = line(tau)?;
        let (b2, e2) = line(tau + h)?;
        res.record(coplanarity_residual(&b1, &e1, &b2, &e2), tau);
    }
    Ok(res)
}

pub const HOMOGENEITY_SCALES: [f64; 3] = [0.5, 2.0, 3.0];

/// `|f(λx, λy) − λ f(x, y)| / (|λ f(x, y)| + ε)` over the samples and
/// scale factors.
pub fn homogeneity_check<F>(f: F, samples: &[(f64, f64)], scales: &[f64]) -> Result<Residual, Error>
where
    F: Fn(f64, f64) -> Result<f64, Error>,
{
    let mut res = Residual::empty();
    for &(x, y) in samples {
        let base = f(x, y)?;
        for &l in scales {
            let scaled = f(l * x, l * y)?;
            res.record_at(
                (scaled - l * base).abs() / ((l * base).abs() + RELATIVE_FLOOR),
                &[x, y, l],
            );
        }
    }
    Ok(res)
}

/// Homogeneity of the height function `z(x, y)` of the surface tabulated
/// by `quad`, in coordinates centred on `apex`. Samples lie strictly
/// between the two section planes.
pub fn apex_homogeneity(
    quad: &SampledQuad,
    apex: &Vector3<f64>,
    seed: u64,
) -> Result<Residual, Error> {
    let (lo, hi) = (quad.phi[0], quad.phi[quad.phi.len() - 1]);
    let samples: Vec<(f64, f64)> = seeded_pairs(seed, 200, (lo, hi), (0.2, 0.8))
        .into_iter()
        .map(|(phi, x)| {
            let [p, q, _, _] = quad.eval(phi)?;
            Ok((x - apex.x, p + q * x - apex.y))
        })
        .collect::<Result<_, Error>>()?;
    let f = |x: f64, y: f64| Ok(quad.height(x + apex.x, y + apex.y)? - apex.z);
    homogeneity_check(f, &samples, &HOMOGENEITY_SCALES)
}

/// Central-difference gradient and Hessian of `f` at `p`.
pub fn gradient_hessian<F>(f: &F, p: &Vector3<f64>, h: f64) -> (Vector3<f64>, Matrix3<f64>)
where
    F: Fn(&Vector3<f64>) -> f64,
{
    let e = |i: usize| {
        let mut v = Vector3::zeros();
        v[i] = h;
        v
    };
    let f0 = f(p);
    let mut g = Vector3::zeros();
    let mut hess = Matrix3::zeros();
    for i in 0..3 {
        let (fp, fm) = (f(&(p + e(i))), f(&(p - e(i))));
        g[i] = (fp - fm) / (2.0 * h);
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let v = (f(&(p + e(i) + e(j))) - f(&(p + e(i) - e(j))) - f(&(p - e(i) + e(j)))
                + f(&(p - e(i) - e(j))))
                / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    (g, hess)
}

/// Gaussian curvature of the level set through `p`:
/// `K = ∇Fᵀ adj(H) ∇F / |∇F|⁴`.
pub fn implicit_gaussian_curvature<F>(f: &F, p: &Vector3<f64>, h: f64) -> Result<f64, Error>
where
    F: Fn(&Vector3<f64>) -> f64,
{
    let (g, hess) = gradient_hessian(f, p, h);
    let gn = g.norm();
    if !(gn > 1e-12) {
        return Err(Error::VanishingGradient([p.x, p.y, p.z]));
    }
    let adj = adjugate(&hess);
    Ok(g.dot(&(adj * g)) / (gn * gn * gn * gn))
}

fn adjugate(m: &Matrix3<f64>) -> Matrix3<f64> {
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| {
        m[(r0, c0)] * m[(r1, c1)] - m[(r0, c1)] * m[(r1, c0)]
    };
    Matrix3::new(
        c(1, 2, 1, 2),
        -c(0, 2, 1, 2),
        c(0, 1, 1, 2),
        -c(1, 2, 0, 2),
        c(0, 2, 0, 2),
        -c(0, 1, 0, 2),
        c(1, 2, 0, 1),
        -c(0, 2, 0, 1),
        c(0, 1, 0, 1),
    )
}

/// Relative tolerance on `|F|` for accepting a sample as a surface point.
pub const ON_SURFACE_TOL: f64 = 1e-9;

/// `max |K|·scale²` of the implicit surface `F = 0` over the points.
/// Points must lie on the surface: `|F| ≤ 1e-9 · max(1, |∇F|(1 + |p|))`.
pub fn implicit_developability_check<F>(
    f: F,
    points: &[Vector3<f64>],
    h: f64,
    scale: f64,
) -> Result<Residual, Error>
where
    F: Fn(&Vector3<f64>) -> f64,
{
    let mut res = Residual::empty();
    for p in points {
        let (g, _) = gradient_hessian(&f, p, h);
        let value = f(p);
        if !(value.abs() <= ON_SURFACE_TOL * (g.norm() * (1.0 + p.norm())).max(1.0)) {
            return Err(Error::InvalidInput(format!(
                "point ({}, {}, {}) is off the surface: F = {value:e}",
                p.x, p.y, p.z
            )));
        }
        let k = implicit_gaussian_curvature(&f, p, h)?;
        res.record_at(k.abs() * scale * scale, &[p.x, p.y, p.z]);
    }
    Ok(res)
}

/// `max |K|·scale²` of a parametric surface over a grid of `(u, v)`.
pub fn parametric_curvature_check<F>(
    surface: F,
    us: &[f64],
    vs: &[f64],
    h: f64,
    scale: f64,
) -> Result<Residual, Error>
where
    F: Fn(f64, f64) -> Result<Vector3<f64>, Error>,
{
    let mut res = Residual::empty();
    for &u in us {
        for &v in vs {
            let k = gaussian_curvature_estimate(&surface, u, v, h)?;
            res.record_at(k.abs() * scale * scale, &[u, v]);
        }
    }
    Ok(res)
}

/// Implicit surface `F(x, y, z) = 0` together with a parametrization in
/// `(a, b)` that supplies points on it.
#[derive(Debug, Clone, PartialEq)]
pub struct ImplicitSpec {
    pub equation: Expr,
    pub source: String,
    pub parametrization: [Expr; 3],
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
    /// Length scale applied to the curvature: the check reports `|K|·scale²`.
    pub scale: f64,
}

/// Parse an implicit surface document.
///
/// ```json
/// { "equation": "x^2 + y^2 - 1",
///   "parametrization": { "x": "cos(a)", "y": "sin(a)", "z": "b" },
///   "a_range": [0, 6], "b_range": [-1, 1], "scale": 1 }
/// ```
pub fn parse_implicit_spec(document: &str) -> Result<ImplicitSpec, SpecError> {
    let doc = specdoc::parse_object(document)?;
    specdoc::reject_unknown(
        &doc,
        &["equation", "parametrization", "a_range", "b_range", "scale"],
        "",
    )?;
    let (source, equation) = specdoc::expression(&doc, "equation", "equation", &["x", "y", "z"])?;
    let param = specdoc::object(&doc, "parametrization", "parametrization")?;
    specdoc::reject_unknown(param, &["x", "y", "z"], "parametrization")?;
    let coord = |k: &str| {
        specdoc::expression(param, k, &format!("parametrization.{k}"), &["a", "b"]).map(|e| e.1)
    };
    let parametrization = [coord("x")?, coord("y")?, coord("z")?];
    let a_range = specdoc::range(&doc, "a_range", "a_range")?;
    let b_range = specdoc::range(&doc, "b_range", "b_range")?;
    let scale = specdoc::number_or(&doc, "scale", "scale", 1.0)?;
    if !(scale > 0.0) {
        return Err(SpecError::new("scale", "must be positive"));
    }
    Ok(ImplicitSpec {
        equation,
        source,
        parametrization,
        a_range,
        b_range,
        scale,
    })
}

impl ImplicitSpec {
    /// `F(p)`; evaluation failures give NaN, which fails every check.
    pub fn value(&self, p: &Vector3<f64>) -> f64 {
        let lookup = |name: &str| match name {
            "x" => Some(p.x),
            "y" => Some(p.y),
            "z" => Some(p.z),
            _ => None,
        };
        self.equation.eval_with(&lookup).unwrap_or(f64::NAN)
    }

    pub fn point(&self, a: f64, b: f64) -> Result<Vector3<f64>, Error> {
        let lookup = |name: &str| match name {
            "a" => Some(a),
            "b" => Some(b),
            _ => None,
        };
        let mut out = Vector3::zeros();
        for (k, e) in self.parametrization.iter().enumerate() {
            out[k] = e.eval_with(&lookup)?;
        }
        Ok(out)
    }
}

/// Knobs of [`implicit_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImplicitOptions {
    pub samples: usize,
    pub seed: u64,
    pub step: f64,
    pub scale: f64,
    pub surface_tol: f64,
    pub curvature_tol: f64,
}

/// Residual of `F` scaled by `max(1, |∇F|(1 + |p|))`.
pub fn gradient_scaled_residual<F>(f: &F, p: &Vector3<f64>, h: f64) -> f64
where
    F: Fn(&Vector3<f64>) -> f64,
{
    let (g, _) = gradient_hessian(f, p, h);
    f(p).abs() / (g.norm() * (1.0 + p.norm())).max(1.0)
}

/// Seeded points of the parametrization, scored for lying on `F = 0`
/// (`on-surface`) and for vanishing Gaussian curvature (`curvature`). The
/// curvature entry is only added when every point lies on the surface.
pub fn implicit_report<F, P, R>(
    f: F,
    point: P,
    residual: R,
    a_range: (f64, f64),
    b_range: (f64, f64),
    opts: &ImplicitOptions,
) -> Result<VerificationReport, Error>
where
    F: Fn(&Vector3<f64>) -> f64,
    P: Fn(f64, f64) -> Result<Vector3<f64>, Error>,
    R: Fn(&Vector3<f64>) -> f64,
{
    let started = Instant::now();
    let params = seeded_pairs(opts.seed, opts.samples, a_range, b_range);
    let mut points = Vec::with_capacity(params.len());
    let mut on_surface = Residual::empty();
    for &(a, b) in &params {
        let p = point(a, b)?;
        on_surface.record_at(residual(&p), &[a, b]);
        points.push(p);
    }
    let mut report = VerificationReport::default();
    let entry = CheckEntry::new(
        "on-surface",
        opts.surface_tol,
        &on_surface,
        Some(opts.seed),
        started,
    );
    let on = entry.pass;
    report.push(entry);
    if on {
        let started = Instant::now();
        let k = implicit_developability_check(&f, &points, opts.step, opts.scale)?;
        report.push(CheckEntry::new(
            "curvature",
            opts.curvature_tol,
            &k,
            Some(opts.seed),
            started,
        ));
    }
    Ok(report)
}

/// Built-in implicit surfaces for `verify-implicit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImplicitExample {
    /// The cubic `−4xy³ − y² + 18xyz + 27x²z² + 4z = 0`, away from its
    /// edge of regression `1 + 3φx = 0`.
    Cubic,
    /// The unit sphere, which must fail.
    Sphere,
}

impl ImplicitExample {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "cubic" => Some(ImplicitExample::Cubic),
            "sphere" => Some(ImplicitExample::Sphere),
            _ => None,
        }
    }

    pub fn report(self, opts: &ImplicitOptions) -> Result<VerificationReport, Error> {
        match self {
            ImplicitExample::Cubic => implicit_report(
                cubic_example_equation,
                |phi, x| Ok(cubic_example_point(phi, x)),
                |p| cubic_example_equation(p).abs() / cubic_example_scale(p),
                (0.5, 1.5),
                (0.0, 1.0),
                opts,
            ),
            ImplicitExample::Sphere => {
                let f = |p: &Vector3<f64>| p.norm_squared() - 1.0;
                implicit_report(
                    f,
                    |a, b| Ok(Vector3::new(a.sin() * b.cos(), a.sin() * b.sin(), a.cos())),
                    |p| gradient_scaled_residual(&f, p, opts.step),
                    (0.3, 2.8),
                    (0.0, std::f64::consts::TAU),
                    opts,
                )
            }
        }
    }
}

impl Default for ImplicitOptions {
    fn default() -> Self {
        ImplicitOptions {
            samples: 1000,
            seed: DEFAULT_SEED,
            step: 1e-3,
            scale: 1.0,
            surface_tol: 1e-9,
            curvature_tol: 1e-5,
        }
    }
}

/// Report for a parsed implicit spec; the spec's `scale` overrides
/// `opts.scale`.
pub fn implicit_spec_report(
    spec: &ImplicitSpec,
    opts: &ImplicitOptions,
) -> Result<VerificationReport, Error> {
    let f = |p: &Vector3<f64>| spec.value(p);
    let opts = ImplicitOptions {
        scale: spec.scale,
        ..*opts
    };
    implicit_report(
        f,
        |a, b| spec.point(a, b),
        |p| gradient_scaled_residual(&f, p, opts.step),
        spec.a_range,
        spec.b_range,
        &opts,
    )
}
