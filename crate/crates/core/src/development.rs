//! Isometric unfolding of the tangent developable.
//!
//! The development angle accumulates the turning of consecutive rulings,
//! `dω = √(dζ² sin²θ + dθ²)`. In the plane the directrix becomes the curve
//! `(pd, qd)` whose tangent makes the angle `ω` with the ordinate axis and
//! whose arc element equals the space curve's, and a surface point `(τ, s)`
//! lands at `(T, U) = (pd − s sinω, qd − s cosω)`.
//!
//! The unfolding is fixed up to a rigid motion by anchoring `ω = 0` and
//! `(pd, qd) = (0, 0)` at the first sample.

use nalgebra::{Matrix3, Vector3};

use crate::curve_model::{AngleProfile, DirectrixCurve};
use crate::error::Error;
use crate::numeric::{self, EPS_SING};
use crate::tangent_dev::{surface_point, validate_grid};

/// Fill `ω` by cumulative trapezoid of `√(ζ'² sin²θ + θ'²)` over the grid.
pub fn omega_profile(profile: &AngleProfile) -> Result<AngleProfile, Error> {
    if profile.len() < 3 {
        return Err(Error::InvalidInput(
            "need at least three samples to differentiate angles".into(),
        ));
    }
    let dz = numeric::derivative(&profile.tau, &profile.zeta);
    let dt = numeric::derivative(&profile.tau, &profile.theta);
    let rate: Vec<f64> = (0..profile.len())
        .map(|i| {
            let st = profile.theta[i].sin();
            (dz[i] * dz[i] * st * st + dt[i] * dt[i]).sqrt()
        })
        .collect();
    let mut out = profile.clone();
    out.omega = Some(numeric::cumulative_trapezoid(&profile.tau, &rate, 0.0));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DevelopedDirectrix {
    pub tau: Vec<f64>,
    pub pd: Vec<f64>,
    pub qd: Vec<f64>,
    pub omega: Vec<f64>,
    pub arc_length: Vec<f64>,
}

/// Lay the directrix flat: `pd = ∫ dt sinω/(sinζ sinθ)`,
/// `qd = ∫ dt cosω/(sinζ sinθ)`, with `dt` the abscissa differential.
pub fn plane_directrix(
    curve: &DirectrixCurve,
    profile: &AngleProfile,
) -> Result<DevelopedDirectrix, Error> {
    let omega = profile.omega()?;
    if curve.tau != profile.tau {
        return Err(Error::GridMismatch(
            "curve and angle profile use different grids".into(),
        ));
    }
    let n = curve.len();
    let mut dp = Vec::with_capacity(n);
    let mut dq = Vec::with_capacity(n);
    for (i, w) in omega.iter().enumerate() {
        let denom = profile.zeta[i].sin() * profile.theta[i].sin();
        if denom.abs() < EPS_SING {
            return Err(Error::SingularAngle {
                sample: i,
                what: "sin zeta sin theta",
            });
        }
        let element = curve.differential[i].x / denom;
        let (so, co) = w.sin_cos();
        dp.push(element * so);
        dq.push(element * co);
    }
    Ok(DevelopedDirectrix {
        tau: curve.tau.clone(),
        pd: numeric::cumulative_trapezoid(&curve.tau, &dp, 0.0),
        qd: numeric::cumulative_trapezoid(&curve.tau, &dq, 0.0),
        omega: omega.to_vec(),
        arc_length: curve.arc_length.clone(),
    })
}

impl DevelopedDirectrix {
    /// Length of the developed polyline.
    pub fn polyline_length(&self) -> f64 {
        self.pd
            .windows(2)
            .zip(self.qd.windows(2))
            .map(|(p, q)| (p[1] - p[0]).hypot(q[1] - q[0]))
            .sum()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.tau[0], self.tau[self.tau.len() - 1])
    }
}

/// Planar image `(T, U)` of the surface point `(τ, s)`.
pub fn develop_point(dev: &DevelopedDirectrix, tau: f64, s: f64) -> Result<[f64; 2], Error> {
    let b = numeric::locate(&dev.tau, tau)?;
    let (so, co) = b.lerp(&dev.omega).sin_cos();
    Ok([b.lerp(&dev.pd) - s * so, b.lerp(&dev.qd) - s * co])
}

/// Curvature `dω/dσ` of the developed directrix at every sample.
pub fn developed_curvature(dev: &DevelopedDirectrix) -> Result<Vec<f64>, Error> {
    if dev.tau.len() < 3 {
        return Err(Error::InvalidInput("need at least three samples".into()));
    }
    let d_omega = numeric::derivative(&dev.tau, &dev.omega);
    let d_sigma = numeric::derivative(&dev.tau, &dev.arc_length);
    Ok(d_omega.iter().zip(&d_sigma).map(|(w, s)| w / s).collect())
}

/// Algebraic least-squares circle through planar points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleFit {
    pub center: [f64; 2],
    pub radius: f64,
    /// Largest `| |p − center| − radius |` over the points.
    pub max_deviation: f64,
}

/// Fit `x² + y² + Dx + Ey + F = 0` in coordinates centred on the mean
/// point, then measure the geometric deviation.
pub fn fit_circle(points: &[[f64; 2]]) -> Result<CircleFit, Error> {
    if points.len() < 3 {
        return Err(Error::InvalidInput(
            "a circle fit needs at least three points".into(),
        ));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for p in points {
        let (x, y) = (p[0] - mx, p[1] - my);
        let row = Vector3::new(x, y, 1.0);
        ata += row * row.transpose();
        atb -= row * (x * x + y * y);
    }
    let sol = ata
        .lu()
        .solve(&atb)
        .ok_or_else(|| Error::Degenerate("points are collinear".into()))?;
    let (cx, cy) = (-sol.x / 2.0, -sol.y / 2.0);
    let r2 = cx * cx + cy * cy - sol.z;
    if !(r2 > 0.0) || !r2.is_finite() {
        return Err(Error::Degenerate("points are collinear".into()));
    }
    let radius = r2.sqrt();
    let max_deviation = points
        .iter()
        .map(|p| ((p[0] - mx - cx).hypot(p[1] - my - cy) - radius).abs())
        .fold(0.0, f64::max);
    Ok(CircleFit {
        center: [cx + mx, cy + my],
        radius,
        max_deviation,
    })
}

/// Grid of surface samples paired with their planar images.
#[derive(Debug, Clone, PartialEq)]
pub struct DevelopmentMap {
    pub n_tau: usize,
    pub n_s: usize,
    pub params: Vec<(f64, f64)>,
    pub spatial: Vec<Vector3<f64>>,
    pub planar: Vec<[f64; 2]>,
}

pub fn development_map(
    curve: &DirectrixCurve,
    profile: &AngleProfile,
    dev: &DevelopedDirectrix,
    tau_range: (f64, f64),
    s_range: (f64, f64),
    n_tau: usize,
    n_s: usize,
) -> Result<DevelopmentMap, Error> {
    validate_grid(s_range, n_tau, n_s)?;
    let taus = numeric::linspace(tau_range.0, tau_range.1, n_tau);
    let ss = numeric::linspace(s_range.0, s_range.1, n_s);
    let mut map = DevelopmentMap {
        n_tau,
        n_s,
        params: Vec::with_capacity(n_tau * n_s),
        spatial: Vec::with_capacity(n_tau * n_s),
        planar: Vec::with_capacity(n_tau * n_s),
    };
    for &tau in &taus {
        for &s in &ss {
            map.params.push((tau, s));
            map.spatial
                .push(surface_point(curve, profile, tau, s)?.position);
            map.planar.push(develop_point(dev, tau, s)?);
        }
    }
    Ok(map)
}

/// Curve, angles with `ω`, and development in one go.
pub fn unfold(
    curve: &DirectrixCurve,
    profile: &AngleProfile,
) -> Result<(AngleProfile, DevelopedDirectrix), Error> {
    let with_omega = omega_profile(profile)?;
    let dev = plane_directrix(curve, &with_omega)?;
    Ok((with_omega, dev))
}
