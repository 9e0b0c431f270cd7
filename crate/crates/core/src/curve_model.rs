//! The directrix: a space curve `(t, u, v)` sampled over a parameter `τ`,
//! and its angle form `(ζ, θ)`.
//!
//! `ζ` is the angle of the projected tangent measured from the `u` axis
//! (`tan ζ = dt/du`) and `θ` the angle of the tangent from the `v` axis
//! (`cos θ = dv/|d|`). Both live in `(0, π)`, which can only describe
//! directions with a positive `t` component. When a curve runs towards
//! decreasing `t` the ruling direction is taken as the reversed tangent;
//! the ruling line is the same, only the sign of the ruling distance `s`
//! changes. A curve whose `t` direction reverses must be split.

use nalgebra::Vector3;
use serde_json::Value;

use crate::error::{Error, SpecError};
use crate::expr::Expr;
use crate::numeric::{self, EPS_SING};
use crate::specdoc;

pub const MIN_SAMPLES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum CurveFamily {
    /// `(R cos τ, R sin τ, c τ)`; `pitch` is the rise `c` per radian.
    Helix { radius: f64, pitch: f64 },
    /// Three expressions in `tau`.
    Expressions {
        t: Expr,
        u: Expr,
        v: Expr,
        source: [String; 3],
    },
    /// Explicit points; `τ` is spread evenly over the range.
    Sampled { points: Vec<[f64; 3]> },
    /// `ζ(t)` and `θ(t)` over the abscissa `t`.
    Angles {
        zeta: Expr,
        theta: Expr,
        source: [String; 2],
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub family: CurveFamily,
    pub range: (f64, f64),
    pub samples: usize,
}

impl CurveSpec {
    pub fn helix(radius: f64, pitch: f64, range: (f64, f64), samples: usize) -> Self {
        CurveSpec {
            family: CurveFamily::Helix { radius, pitch },
            range,
            samples,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            CurveFamily::Helix { .. } => "helix",
            CurveFamily::Expressions { .. } => "expressions",
            CurveFamily::Sampled { .. } => "sampled",
            CurveFamily::Angles { .. } => "angles",
        }
    }

    /// Serialize back to the JSON document format.
    pub fn to_json(&self) -> String {
        let params = match &self.family {
            CurveFamily::Helix { radius, pitch } => {
                serde_json::json!({ "radius": radius, "pitch": pitch })
            }
            CurveFamily::Expressions { source, .. } => {
                serde_json::json!({ "t": source[0], "u": source[1], "v": source[2] })
            }
            CurveFamily::Sampled { points } => serde_json::json!({ "points": points }),
            CurveFamily::Angles { source, .. } => {
                serde_json::json!({ "zeta": source[0], "theta": source[1] })
            }
        };
        let doc = serde_json::json!({
            "family": self.family_name(),
            "params": params,
            "range": [self.range.0, self.range.1],
            "samples": self.samples,
        });
        serde_json::to_string_pretty(&doc).expect("json values always serialize")
    }
}

/// Parse and validate a curve specification document.
///
/// ```json
/// { "family": "helix", "params": { "radius": 1, "pitch": 1 },
///   "range": [0.3, 2.0], "samples": 64 }
/// ```
pub fn parse_curve_spec(document: &str) -> Result<CurveSpec, SpecError> {
    let doc = specdoc::parse_object(document)?;
    specdoc::reject_unknown(&doc, &["family", "params", "range", "samples"], "")?;
    let family_name = specdoc::string(&doc, "family", "family")?;
    let params = specdoc::object(&doc, "params", "params")?;
    let range = specdoc::range(&doc, "range", "range")?;
    let samples_field = doc.get("samples");

    let (family, samples) = match family_name {
        "helix" => {
            specdoc::reject_unknown(params, &["radius", "pitch"], "params")?;
            let radius = specdoc::number(params, "radius", "params.radius")?;
            let pitch = specdoc::number(params, "pitch", "params.pitch")?;
            if radius <= 0.0 {
                return Err(SpecError::new("params.radius", "must be positive"));
            }
            let n = required_samples(samples_field)?;
            (CurveFamily::Helix { radius, pitch }, n)
        }
        "expressions" => {
            specdoc::reject_unknown(params, &["t", "u", "v"], "params")?;
            let (ts, t) = specdoc::expression(params, "t", "params.t", &["tau"])?;
            let (us, u) = specdoc::expression(params, "u", "params.u", &["tau"])?;
            let (vs, v) = specdoc::expression(params, "v", "params.v", &["tau"])?;
            let n = required_samples(samples_field)?;
            (
                CurveFamily::Expressions {
                    t,
                    u,
                    v,
                    source: [ts, us, vs],
                },
                n,
            )
        }
        "angles" => {
            specdoc::reject_unknown(params, &["zeta", "theta"], "params")?;
            let (zs, zeta) = specdoc::expression(params, "zeta", "params.zeta", &["t"])?;
            let (hs, theta) = specdoc::expression(params, "theta", "params.theta", &["t"])?;
            let n = required_samples(samples_field)?;
            (
                CurveFamily::Angles {
                    zeta,
                    theta,
                    source: [zs, hs],
                },
                n,
            )
        }
        "sampled" => {
            specdoc::reject_unknown(params, &["points"], "params")?;
            let points = specdoc::points::<3>(params, "points", "params.points")?;
            if points.len() < MIN_SAMPLES {
                return Err(SpecError::new(
                    "params.points",
                    format!("need at least {MIN_SAMPLES} points, got {}", points.len()),
                ));
            }
            if let Some(v) = samples_field {
                let n = specdoc::count(v, "samples", MIN_SAMPLES)?;
                if n != points.len() {
                    return Err(SpecError::new(
                        "samples",
                        format!("{n} does not match the {} points given", points.len()),
                    ));
                }
            }
            let n = points.len();
            (CurveFamily::Sampled { points }, n)
        }
        other => {
            return Err(SpecError::new(
                "family",
                format!(
                    "unknown family `{other}` (expected helix, expressions, sampled or angles)"
                ),
            ))
        }
    };
    Ok(CurveSpec {
        family,
        range,
        samples,
    })
}

fn required_samples(value: Option<&Value>) -> Result<usize, SpecError> {
    let v = value.ok_or_else(|| SpecError::new("samples", "missing field"))?;
    specdoc::count(v, "samples", MIN_SAMPLES)
}

/// Sampled directrix. `differential[i]` is `d(t,u,v)/dτ` at `tau[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectrixCurve {
    pub tau: Vec<f64>,
    pub position: Vec<Vector3<f64>>,
    pub differential: Vec<Vector3<f64>>,
    pub arc_length: Vec<f64>,
}

impl DirectrixCurve {
    /// Build from positions and differentials; arc length by cumulative
    /// trapezoid of the speed.
    pub fn new(
        tau: Vec<f64>,
        position: Vec<Vector3<f64>>,
        differential: Vec<Vector3<f64>>,
    ) -> Result<Self, Error> {
        let n = tau.len();
        if position.len() != n || differential.len() != n {
            return Err(Error::GridMismatch(
                "tau, position and differential lengths differ".into(),
            ));
        }
        if n < 2 {
            return Err(Error::InvalidInput(
                "a curve needs at least two samples".into(),
            ));
        }
        if tau.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "parameter grid must be strictly increasing".into(),
            ));
        }
        for (i, d) in differential.iter().enumerate() {
            let speed = d.norm();
            if !(speed > 0.0) || !speed.is_finite() {
                return Err(Error::Irregular { sample: i });
            }
        }
        if position.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidInput("non-finite curve position".into()));
        }
        let speed: Vec<f64> = differential.iter().map(|d| d.norm()).collect();
        let arc_length = numeric::cumulative_trapezoid(&tau, &speed, 0.0);
        Ok(DirectrixCurve {
            tau,
            position,
            differential,
            arc_length,
        })
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.tau[0], self.tau[self.tau.len() - 1])
    }

    pub fn total_length(&self) -> f64 {
        self.arc_length[self.arc_length.len() - 1]
    }

    /// Linearly interpolated position.
    pub fn position_at(&self, tau: f64) -> Result<Vector3<f64>, Error> {
        let b = numeric::locate(&self.tau, tau)?;
        let p0 = self.position[b.index];
        if b.weight == 0.0 {
            return Ok(p0);
        }
        Ok(p0 + (self.position[b.index + 1] - p0) * b.weight)
    }
}

/// A curve that can be evaluated with exact derivatives anywhere in its
/// range. Used where finite differences of the surface need a smooth
/// point function rather than the sampled interpolant.
pub trait SmoothCurve {
    /// Position and `d/dτ` at `tau`.
    fn eval(&self, tau: f64) -> Result<(Vector3<f64>, Vector3<f64>), Error>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Helix {
    pub radius: f64,
    pub pitch: f64,
}

impl Helix {
    /// Classical curvature `R / (R² + c²)`.
    pub fn curvature(&self) -> f64 {
        self.radius / (self.radius * self.radius + self.pitch * self.pitch)
    }
}

impl SmoothCurve for Helix {
    fn eval(&self, tau: f64) -> Result<(Vector3<f64>, Vector3<f64>), Error> {
        let (s, c) = tau.sin_cos();
        Ok((
            Vector3::new(self.radius * c, self.radius * s, self.pitch * tau),
            Vector3::new(-self.radius * s, self.radius * c, self.pitch),
        ))
    }
}

/// Expression curve with derivatives by forward-mode differentiation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionCurve {
    pub t: Expr,
    pub u: Expr,
    pub v: Expr,
}

impl SmoothCurve for ExpressionCurve {
    fn eval(&self, tau: f64) -> Result<(Vector3<f64>, Vector3<f64>), Error> {
        let (t, dt) = self.t.eval_derivative("tau", tau)?;
        let (u, du) = self.u.eval_derivative("tau", tau)?;
        let (v, dv) = self.v.eval_derivative("tau", tau)?;
        Ok((Vector3::new(t, u, v), Vector3::new(dt, du, dv)))
    }
}

impl CurveSpec {
    /// The smooth form of the curve, where one exists.
    pub fn smooth_curve(&self) -> Option<Box<dyn SmoothCurve + Send + Sync>> {
        match &self.family {
            CurveFamily::Helix { radius, pitch } => Some(Box::new(Helix {
                radius: *radius,
                pitch: *pitch,
            })),
            CurveFamily::Expressions { t, u, v, .. } => Some(Box::new(ExpressionCurve {
                t: t.clone(),
                u: u.clone(),
                v: v.clone(),
            })),
            _ => None,
        }
    }
}

/// Sample a helix, expression or point-list curve. Differentials are
/// closed-form for the helix and finite differences otherwise.
pub fn sample_curve(spec: &CurveSpec) -> Result<DirectrixCurve, Error> {
    let (lo, hi) = spec.range;
    let tau = numeric::linspace(lo, hi, spec.samples);
    match &spec.family {
        CurveFamily::Helix { radius, pitch } => {
            let helix = Helix {
                radius: *radius,
                pitch: *pitch,
            };
            let (position, differential) = tau
                .iter()
                .map(|&t| helix.eval(t))
                .collect::<Result<(Vec<_>, Vec<_>), _>>()?;
            DirectrixCurve::new(tau, position, differential)
        }
        CurveFamily::Expressions { t, u, v, .. } => {
            let position = tau
                .iter()
                .map(|&x| {
                    Ok(Vector3::new(
                        t.eval_at("tau", x)?,
                        u.eval_at("tau", x)?,
                        v.eval_at("tau", x)?,
                    ))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let differential = finite_difference_differentials(&tau, &position);
            DirectrixCurve::new(tau, position, differential)
        }
        CurveFamily::Sampled { points } => {
            let tau = numeric::linspace(lo, hi, points.len());
            let position: Vec<Vector3<f64>> = points
                .iter()
                .map(|p| Vector3::new(p[0], p[1], p[2]))
                .collect();
            let differential = finite_difference_differentials(&tau, &position);
            DirectrixCurve::new(tau, position, differential)
        }
        CurveFamily::Angles { .. } => Err(Error::InvalidInput(
            "angle-form specs are integrated with curve_from_angles, not sampled".into(),
        )),
    }
}

fn finite_difference_differentials(tau: &[f64], position: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    let comp = |k: usize| {
        let y: Vec<f64> = position.iter().map(|p| p[k]).collect();
        numeric::derivative(tau, &y)
    };
    let (dt, du, dv) = (comp(0), comp(1), comp(2));
    (0..tau.len())
        .map(|i| Vector3::new(dt[i], du[i], dv[i]))
        .collect()
}

/// Per-sample angles on the curve's parameter grid. `omega` is filled by
/// [`crate::development::omega_profile`].
#[derive(Debug, Clone, PartialEq)]
pub struct AngleProfile {
    pub tau: Vec<f64>,
    pub zeta: Vec<f64>,
    pub theta: Vec<f64>,
    pub omega: Option<Vec<f64>>,
}

impl AngleProfile {
    pub fn new(tau: Vec<f64>, zeta: Vec<f64>, theta: Vec<f64>) -> Result<Self, Error> {
        if zeta.len() != tau.len() || theta.len() != tau.len() {
            return Err(Error::GridMismatch(
                "angle arrays differ in length from the grid".into(),
            ));
        }
        for (i, (&z, &t)) in zeta.iter().zip(&theta).enumerate() {
            if !(z > 0.0 && z < std::f64::consts::PI) {
                return Err(Error::SingularAngle {
                    sample: i,
                    what: "zeta in (0, pi)",
                });
            }
            if !(t > 0.0 && t < std::f64::consts::PI) {
                return Err(Error::SingularAngle {
                    sample: i,
                    what: "theta in (0, pi)",
                });
            }
        }
        Ok(AngleProfile {
            tau,
            zeta,
            theta,
            omega: None,
        })
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn omega(&self) -> Result<&[f64], Error> {
        self.omega.as_deref().ok_or_else(|| {
            Error::InvalidInput(
                "angle profile has no development angle; run omega_profile first".into(),
            )
        })
    }
}

/// `(ζ, θ)` of the ruling through a point with differential `d`.
/// `orientation` is `+1` when the ruling follows the tangent and `-1` when
/// it is the reversed tangent.
pub fn angles_from_differential(
    d: &Vector3<f64>,
    orientation: f64,
    sample: usize,
) -> Result<(f64, f64), Error> {
    let speed = d.norm();
    if !(speed > 0.0) || !speed.is_finite() {
        return Err(Error::Irregular { sample });
    }
    let horizontal = d.x.hypot(d.y);
    if horizontal / speed < EPS_SING {
        return Err(Error::SingularAngle {
            sample,
            what: "sin theta",
        });
    }
    if d.x.abs() / horizontal < EPS_SING {
        return Err(Error::SingularAngle {
            sample,
            what: "sin zeta",
        });
    }
    let zeta = (orientation * d.x).atan2(orientation * d.y);
    let theta = (orientation * d.z / speed).clamp(-1.0, 1.0).acos();
    Ok((zeta, theta))
}

/// Angle form of a sampled curve.
pub fn angles_from_curve(curve: &DirectrixCurve) -> Result<AngleProfile, Error> {
    let orientation = curve_orientation(curve)?;
    let mut zeta = Vec::with_capacity(curve.len());
    let mut theta = Vec::with_capacity(curve.len());
    for (i, d) in curve.differential.iter().enumerate() {
        let (z, t) = angles_from_differential(d, orientation, i)?;
        zeta.push(z);
        theta.push(t);
    }
    AngleProfile::new(curve.tau.clone(), zeta, theta)
}

/// `+1` if `t` increases along the curve, `-1` if it decreases.
pub fn curve_orientation(curve: &DirectrixCurve) -> Result<f64, Error> {
    let first = curve.differential[0].x;
    if first == 0.0 {
        return Err(Error::SingularAngle {
            sample: 0,
            what: "sin zeta",
        });
    }
    for (i, w) in curve.differential.windows(2).enumerate() {
        if w[1].x == 0.0 {
            return Err(Error::SingularAngle {
                sample: i + 1,
                what: "sin zeta",
            });
        }
        if (w[0].x > 0.0) != (w[1].x > 0.0) {
            return Err(Error::OrientationFlip { sample: i });
        }
    }
    Ok(first.signum())
}

/// Rebuild the curve from its angles over an increasing abscissa grid,
/// with `u(t₀) = v(t₀) = 0`.
pub fn curve_from_angles(
    abscissa: &[f64],
    zeta: &[f64],
    theta: &[f64],
) -> Result<DirectrixCurve, Error> {
    let n = abscissa.len();
    if zeta.len() != n || theta.len() != n {
        return Err(Error::GridMismatch(
            "angle arrays differ in length from the abscissa grid".into(),
        ));
    }
    let mut du = Vec::with_capacity(n);
    let mut dv = Vec::with_capacity(n);
    for i in 0..n {
        let (sz, cz) = zeta[i].sin_cos();
        let (st, ct) = theta[i].sin_cos();
        if sz.abs() < EPS_SING {
            return Err(Error::SingularAngle {
                sample: i,
                what: "sin zeta",
            });
        }
        if st.abs() < EPS_SING {
            return Err(Error::SingularAngle {
                sample: i,
                what: "sin theta",
            });
        }
        du.push(cz / sz);
        dv.push(ct / (sz * st));
    }
    let u = numeric::cumulative_trapezoid(abscissa, &du, 0.0);
    let v = numeric::cumulative_trapezoid(abscissa, &dv, 0.0);
    let position = (0..n)
        .map(|i| Vector3::new(abscissa[i], u[i], v[i]))
        .collect();
    let differential = (0..n).map(|i| Vector3::new(1.0, du[i], dv[i])).collect();
    DirectrixCurve::new(abscissa.to_vec(), position, differential)
}

/// Sample a spec into a curve and its angle profile, whatever the family.
pub fn build(spec: &CurveSpec) -> Result<(DirectrixCurve, AngleProfile), Error> {
    match &spec.family {
        CurveFamily::Angles { zeta, theta, .. } => {
            let t = numeric::linspace(spec.range.0, spec.range.1, spec.samples);
            let z = t
                .iter()
                .map(|&x| zeta.eval_at("t", x))
                .collect::<Result<Vec<_>, _>>()?;
            let th = t
                .iter()
                .map(|&x| theta.eval_at("t", x))
                .collect::<Result<Vec<_>, _>>()?;
            let profile = AngleProfile::new(t.clone(), z, th)?;
            let curve = curve_from_angles(&t, &profile.zeta, &profile.theta)?;
            Ok((curve, profile))
        }
        _ => {
            let curve = sample_curve(spec)?;
            let profile = angles_from_curve(&curve)?;
            Ok((curve, profile))
        }
    }
}
