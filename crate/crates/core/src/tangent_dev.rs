//! The tangent developable swept by the rulings of a directrix:
//!
//! ```text
//! x = t − s sinθ sinζ,  y = u − s sinθ cosζ,  z = v − s cosθ
//! ```
//!
//! `s` is the distance from the directrix point back along the ruling.

use nalgebra::Vector3;

use crate::curve_model::{angles_from_differential, AngleProfile, DirectrixCurve, SmoothCurve};
use crate::error::Error;
use crate::numeric::{self, EPS_SING};

/// Unit vector `(sinθ sinζ, sinθ cosζ, cosθ)`; the surface runs along its
/// negative.
pub fn ruling_direction(zeta: f64, theta: f64) -> Vector3<f64> {
    let (sz, cz) = zeta.sin_cos();
    let (st, ct) = theta.sin_cos();
    Vector3::new(st * sz, st * cz, ct)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub position: Vector3<f64>,
    pub tau: f64,
    pub s: f64,
}

/// Surface point at `(τ, s)` with `(t, u, v, ζ, θ)` linearly interpolated
/// between samples. Negative `s` is allowed (the other sheet).
pub fn surface_point(
    curve: &DirectrixCurve,
    profile: &AngleProfile,
    tau: f64,
    s: f64,
) -> Result<SurfacePoint, Error> {
    if curve.tau.len() != profile.tau.len() {
        return Err(Error::GridMismatch(
            "curve and angle profile sample counts differ".into(),
        ));
    }
    if !s.is_finite() {
        return Err(Error::InvalidInput(format!(
            "ruling distance {s} is not finite"
        )));
    }
    let b = numeric::locate(&curve.tau, tau)?;
    let base = curve.position_at(tau)?;
    let dir = ruling_direction(b.lerp(&profile.zeta), b.lerp(&profile.theta));
    Ok(SurfacePoint {
        position: base - dir * s,
        tau,
        s,
    })
}

/// Point function of the tangent developable of a smooth curve, using exact
/// tangents. `orientation` follows [`crate::curve_model::curve_orientation`].
pub fn smooth_surface_fn<'a, C: SmoothCurve + ?Sized>(
    curve: &'a C,
    orientation: f64,
) -> impl Fn(f64, f64) -> Result<Vector3<f64>, Error> + 'a {
    move |tau, s| {
        let (p, d) = curve.eval(tau)?;
        let (zeta, theta) = angles_from_differential(&d, orientation, 0)?;
        Ok(p - ruling_direction(zeta, theta) * s)
    }
}

/// Row-major `n_tau × n_s` tabulation of the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    pub n_tau: usize,
    pub n_s: usize,
    pub vertices: Vec<SurfacePoint>,
    pub s_range: (f64, f64),
}

impl SurfaceMesh {
    pub fn vertex(&self, i_tau: usize, i_s: usize) -> &SurfacePoint {
        &self.vertices[i_tau * self.n_s + i_s]
    }
}

pub fn surface_grid(
    curve: &DirectrixCurve,
    profile: &AngleProfile,
    tau_range: (f64, f64),
    s_range: (f64, f64),
    n_tau: usize,
    n_s: usize,
) -> Result<SurfaceMesh, Error> {
    validate_grid(s_range, n_tau, n_s)?;
    let taus = numeric::linspace(tau_range.0, tau_range.1, n_tau);
    let ss = numeric::linspace(s_range.0, s_range.1, n_s);
    let mut vertices = Vec::with_capacity(n_tau * n_s);
    for &tau in &taus {
        for &s in &ss {
            vertices.push(surface_point(curve, profile, tau, s)?);
        }
    }
    Ok(SurfaceMesh {
        n_tau,
        n_s,
        vertices,
        s_range,
    })
}

pub(crate) fn validate_grid(s_range: (f64, f64), n_tau: usize, n_s: usize) -> Result<(), Error> {
    if n_tau < 2 || n_s < 2 {
        return Err(Error::InvalidInput(format!(
            "grid {n_tau}x{n_s} needs at least 2x2 vertices"
        )));
    }
    if !(s_range.0 > 0.0) || !(s_range.1 > s_range.0) {
        return Err(Error::InvalidInput(format!(
            "s range {}:{} must satisfy 0 < lo < hi (the directrix itself is singular)",
            s_range.0, s_range.1
        )));
    }
    Ok(())
}

/// Gaussian curvature of a parametric surface at `(u, v)` from central
/// differences of step `h`, via `K = (LN − M²)/(EG − F²)`.
pub fn gaussian_curvature_estimate<F>(surface: F, u: f64, v: f64, h: f64) -> Result<f64, Error>
where
    F: Fn(f64, f64) -> Result<Vector3<f64>, Error>,
{
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("step {h} must be positive")));
    }
    let p = |du: f64, dv: f64| surface(u + du * h, v + dv * h);
    let c = p(0.0, 0.0)?;
    let (up, um, vp, vm) = (p(1.0, 0.0)?, p(-1.0, 0.0)?, p(0.0, 1.0)?, p(0.0, -1.0)?);
    let (pp, pm, mp, mm) = (p(1.0, 1.0)?, p(1.0, -1.0)?, p(-1.0, 1.0)?, p(-1.0, -1.0)?);

    let xu = (up - um) / (2.0 * h);
    let xv = (vp - vm) / (2.0 * h);
    let xuu = (up - c * 2.0 + um) / (h * h);
    let xvv = (vp - c * 2.0 + vm) / (h * h);
    let xuv = (pp - pm - mp + mm) / (4.0 * h * h);

    let e = xu.dot(&xu);
    let f = xu.dot(&xv);
    let g = xv.dot(&xv);
    let metric = e * g - f * f;
    if !(metric > EPS_SING * e * g) {
        return Err(Error::DegenerateMetric(metric));
    }
    let normal = xu.cross(&xv) / metric.sqrt();
    let l = xuu.dot(&normal);
    let m = xuv.dot(&normal);
    let n = xvv.dot(&normal);
    Ok((l * n - m * m) / metric)
}
