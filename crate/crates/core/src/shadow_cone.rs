//! Developable surfaces through two parallel plane sections.
//!
//! Sections lie in planes perpendicular to the `x` axis and are
//! parametrized by their slope `φ = dU/dT`. Points of equal slope on the
//! two sections have parallel tangents, so the segment joining them is a
//! ruling of a developable surface:
//!
//! ```text
//! y = T − x (T − t)/a,   z = U − x (U − u)/a
//! ```
//!
//! In the general form `y = P + Qx`, `z = R + Sx` the surface is
//! developable exactly when `dS·dP = dQ·dR`.

use nalgebra::{Matrix3, Vector3};
use num_rational::Ratio;

use crate::error::{Error, SpecError};
use crate::expr::Expr;
use crate::numeric::{self, Residual, EPS_SING};
use crate::specdoc;

pub const MIN_SECTION_SAMPLES: usize = 8;

/// A plane section sampled over increasing slope `phi`, lying in the plane
/// `x = offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowSection {
    pub phi: Vec<f64>,
    pub abscissa: Vec<f64>,
    pub ordinate: Vec<f64>,
    pub offset: f64,
}

impl ShadowSection {
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.phi[0], self.phi[self.phi.len() - 1])
    }

    /// `(abscissa, ordinate)` at slope `phi`, linearly interpolated.
    pub fn at(&self, phi: f64) -> Result<(f64, f64), Error> {
        let b = numeric::locate(&self.phi, phi)?;
        Ok((b.lerp(&self.abscissa), b.lerp(&self.ordinate)))
    }

    /// Diagonal of the bounding box of the section points.
    pub fn diameter(&self) -> f64 {
        let span = |v: &[f64]| {
            let (lo, hi) = v
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                    (a.min(x), b.max(x))
                });
            hi - lo
        };
        span(&self.abscissa).hypot(span(&self.ordinate))
    }
}

/// Integrate `dU = φ dT` segment by segment, starting from `start`. The
/// segment form `ΔU = φ̄ ΔT` makes sections built on one grid exactly
/// parallel segment by segment.
pub fn profile_from_slope(
    phi: &[f64],
    abscissa: &[f64],
    start: f64,
    offset: f64,
) -> Result<ShadowSection, Error> {
    if phi.len() != abscissa.len() {
        return Err(Error::GridMismatch(
            "slope and abscissa lengths differ".into(),
        ));
    }
    if phi.len() < 2 {
        return Err(Error::InvalidInput(
            "a section needs at least two samples".into(),
        ));
    }
    if phi.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(
            "slope grid must be strictly increasing".into(),
        ));
    }
    let mut ordinate = Vec::with_capacity(phi.len());
    let mut acc = start;
    ordinate.push(acc);
    for i in 1..phi.len() {
        acc += 0.5 * (phi[i] + phi[i - 1]) * (abscissa[i] - abscissa[i - 1]);
        ordinate.push(acc);
    }
    Ok(ShadowSection {
        phi: phi.to_vec(),
        abscissa: abscissa.to_vec(),
        ordinate,
        offset,
    })
}

/// Circle of `radius` about `center`, on the arc where the slope runs
/// over `phi`: `T = c_T − rφ/√(1+φ²)`, starting at `U = c_U + r/√(1+φ₀²)`.
pub fn circle_section(
    radius: f64,
    center: [f64; 2],
    phi: &[f64],
    offset: f64,
) -> Result<ShadowSection, Error> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!(
            "radius {radius} must be positive"
        )));
    }
    let abscissa: Vec<f64> = phi
        .iter()
        .map(|&p| center[0] - radius * p / (1.0 + p * p).sqrt())
        .collect();
    let start = center[1] + radius / (1.0 + phi[0] * phi[0]).sqrt();
    profile_from_slope(phi, &abscissa, start, offset)
}

/// Section from explicit points, with the slope estimated by three-point
/// differences. The slope must be strictly monotone along the points
/// (a convex arc); decreasing slopes are reordered.
pub fn sampled_section(points: &[[f64; 2]], offset: f64) -> Result<ShadowSection, Error> {
    let n = points.len();
    if n < 3 {
        return Err(Error::InvalidInput(
            "a sampled section needs at least three points".into(),
        ));
    }
    let index: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let t: Vec<f64> = points.iter().map(|p| p[0]).collect();
    let u: Vec<f64> = points.iter().map(|p| p[1]).collect();
    let dt = numeric::derivative(&index, &t);
    let du = numeric::derivative(&index, &u);
    let mut phi = Vec::with_capacity(n);
    for i in 0..n {
        let scale = dt[i].abs().max(du[i].abs());
        if !(dt[i].abs() > EPS_SING * scale) || scale == 0.0 {
            return Err(Error::SingularAngle {
                sample: i,
                what: "dT (vertical tangent)",
            });
        }
        phi.push(du[i] / dt[i]);
    }
    let increasing = phi.windows(2).all(|w| w[1] > w[0]);
    let decreasing = phi.windows(2).all(|w| w[1] < w[0]);
    let (mut phi, mut t, mut u) = (phi, t, u);
    if decreasing {
        phi.reverse();
        t.reverse();
        u.reverse();
    } else if !increasing {
        let bad = phi
            .windows(3)
            .position(|w| (w[1] - w[0]) * (w[2] - w[1]) <= 0.0)
            .map_or(0, |i| i + 1);
        return Err(Error::Degenerate(format!(
            "slope is not monotone near point {bad}; the section must be a convex arc"
        )));
    }
    Ok(ShadowSection {
        phi,
        abscissa: t,
        ordinate: u,
        offset,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum SectionFamily {
    Circle {
        radius: f64,
        center: [f64; 2],
    },
    /// Abscissa as an expression in `phi`; the ordinate is integrated.
    Expressions {
        abscissa: Expr,
        source: String,
        start: f64,
    },
    Sampled {
        points: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectionSpec {
    pub family: SectionFamily,
    /// Slope range and sample count; unused for sampled sections.
    pub range: (f64, f64),
    pub samples: usize,
    pub offset: f64,
}

/// Parse a section document.
///
/// ```json
/// { "family": "circle", "params": { "radius": 1, "center": [0, 0] },
///   "range": [-3, 3], "samples": 401, "offset": 0 }
/// ```
pub fn parse_section_spec(document: &str) -> Result<SectionSpec, SpecError> {
    let doc = specdoc::parse_object(document)?;
    specdoc::reject_unknown(
        &doc,
        &["family", "params", "range", "samples", "offset"],
        "",
    )?;
    let family_name = specdoc::string(&doc, "family", "family")?;
    let params = specdoc::object(&doc, "params", "params")?;
    let offset = specdoc::number_or(&doc, "offset", "offset", 0.0)?;

    if family_name == "sampled" {
        specdoc::reject_unknown(params, &["points"], "params")?;
        for key in ["range", "samples"] {
            if doc.contains_key(key) {
                return Err(SpecError::new(
                    key,
                    "not used by sampled sections (slope comes from the points)",
                ));
            }
        }
        let points = specdoc::points::<2>(params, "points", "params.points")?;
        if points.len() < MIN_SECTION_SAMPLES {
            return Err(SpecError::new(
                "params.points",
                format!(
                    "need at least {MIN_SECTION_SAMPLES} points, got {}",
                    points.len()
                ),
            ));
        }
        let n = points.len();
        return Ok(SectionSpec {
            family: SectionFamily::Sampled { points },
            range: (0.0, 1.0),
            samples: n,
            offset,
        });
    }

    let range = specdoc::range(&doc, "range", "range")?;
    let samples = specdoc::count(
        specdoc::field(&doc, "samples", "samples")?,
        "samples",
        MIN_SECTION_SAMPLES,
    )?;
    let family = match family_name {
        "circle" => {
            specdoc::reject_unknown(params, &["radius", "center"], "params")?;
            let radius = specdoc::number(params, "radius", "params.radius")?;
            if !(radius > 0.0) {
                return Err(SpecError::new("params.radius", "must be positive"));
            }
            let center = match params.get("center") {
                Some(v) => {
                    let arr = v
                        .as_array()
                        .filter(|a| a.len() == 2)
                        .ok_or_else(|| SpecError::new("params.center", "expected [T, U]"))?;
                    [
                        specdoc::number_value(&arr[0], "params.center[0]")?,
                        specdoc::number_value(&arr[1], "params.center[1]")?,
                    ]
                }
                None => [0.0, 0.0],
            };
            SectionFamily::Circle { radius, center }
        }
        "expressions" => {
            specdoc::reject_unknown(params, &["abscissa", "start"], "params")?;
            let (source, abscissa) =
                specdoc::expression(params, "abscissa", "params.abscissa", &["phi"])?;
            let start = specdoc::number_or(params, "start", "params.start", 0.0)?;
            SectionFamily::Expressions {
                abscissa,
                source,
                start,
            }
        }
        other => {
            return Err(SpecError::new(
                "family",
                format!("unknown family `{other}` (expected circle, expressions or sampled)"),
            ))
        }
    };
    Ok(SectionSpec {
        family,
        range,
        samples,
        offset,
    })
}

pub fn build_section(spec: &SectionSpec) -> Result<ShadowSection, Error> {
    let phi = || numeric::linspace(spec.range.0, spec.range.1, spec.samples);
    match &spec.family {
        SectionFamily::Circle { radius, center } => {
            circle_section(*radius, *center, &phi(), spec.offset)
        }
        SectionFamily::Expressions {
            abscissa, start, ..
        } => {
            let grid = phi();
            let t = grid
                .iter()
                .map(|&p| abscissa.eval_at("phi", p))
                .collect::<Result<Vec<_>, _>>()?;
            profile_from_slope(&grid, &t, *start, spec.offset)
        }
        SectionFamily::Sampled { points } => sampled_section(points, spec.offset),
    }
}

/// Axial gap between the section planes; must be positive.
pub fn gap(a: &ShadowSection, b: &ShadowSection) -> Result<f64, Error> {
    let g = b.offset - a.offset;
    if !(g > 0.0) {
        return Err(Error::InvalidInput(format!(
            "second section plane ({}) must lie beyond the first ({})",
            b.offset, a.offset
        )));
    }
    Ok(g)
}

/// Point of the surface at slope `phi` and axial coordinate `x`.
pub fn shadow_point(
    a: &ShadowSection,
    b: &ShadowSection,
    phi: f64,
    x: f64,
) -> Result<Vector3<f64>, Error> {
    let g = gap(a, b)?;
    let (tt, uu) = a.at(phi)?;
    let (t, u) = b.at(phi)?;
    let r = x - a.offset;
    Ok(Vector3::new(
        x,
        tt - r * (tt - t) / g,
        uu - r * (uu - u) / g,
    ))
}

/// Put both sections on one slope grid. Identical grids are kept as they
/// are; otherwise both are resampled over the overlap of their ranges.
pub fn align(
    a: &ShadowSection,
    b: &ShadowSection,
) -> Result<(ShadowSection, ShadowSection), Error> {
    if a.phi == b.phi {
        return Ok((a.clone(), b.clone()));
    }
    let lo = a.phi[0].max(b.phi[0]);
    let hi = a.range().1.min(b.range().1);
    if !(lo < hi) {
        return Err(Error::GridMismatch(format!(
            "slope ranges [{}, {}] and [{}, {}] do not overlap",
            a.phi[0],
            a.range().1,
            b.phi[0],
            b.range().1
        )));
    }
    let grid = numeric::linspace(lo, hi, a.len().max(b.len()));
    let resample = |s: &ShadowSection| -> Result<ShadowSection, Error> {
        let mut abscissa = Vec::with_capacity(grid.len());
        let mut ordinate = Vec::with_capacity(grid.len());
        for &p in &grid {
            let (t, u) = s.at(p)?;
            abscissa.push(t);
            ordinate.push(u);
        }
        Ok(ShadowSection {
            phi: grid.clone(),
            abscissa,
            ordinate,
            offset: s.offset,
        })
    };
    Ok((resample(a)?, resample(b)?))
}

/// Tabulated `P, Q, R, S` over a parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledQuad {
    pub phi: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
}

impl SampledQuad {
    /// `P = T`, `Q = (t − T)/a`, `R = U`, `S = (u − U)/a` with `x` measured
    /// from the first section's plane.
    pub fn from_sections(a: &ShadowSection, b: &ShadowSection) -> Result<Self, Error> {
        let g = gap(a, b)?;
        let (a, b) = align(a, b)?;
        Ok(SampledQuad {
            phi: a.phi.clone(),
            p: a.abscissa.clone(),
            q: a.abscissa
                .iter()
                .zip(&b.abscissa)
                .map(|(tt, t)| (t - tt) / g)
                .collect(),
            r: a.ordinate.clone(),
            s: a.ordinate
                .iter()
                .zip(&b.ordinate)
                .map(|(uu, u)| (u - uu) / g)
                .collect(),
        })
    }

    pub fn eval(&self, phi: f64) -> Result<[f64; 4], Error> {
        let b = numeric::locate(&self.phi, phi)?;
        Ok([
            b.lerp(&self.p),
            b.lerp(&self.q),
            b.lerp(&self.r),
            b.lerp(&self.s),
        ])
    }

    /// `|ΔS ΔP − ΔQ ΔR| / (|ΔS ΔP| + |ΔQ ΔR|)` on every segment.
    pub fn condition_residual(&self) -> Residual {
        let mut res = Residual::empty();
        for i in 0..self.phi.len().saturating_sub(1) {
            let d = |v: &[f64]| v[i + 1] - v[i];
            let (dp, dq, dr, ds) = (d(&self.p), d(&self.q), d(&self.r), d(&self.s));
            let floor = EPS_SING * (dp.abs() + dr.abs());
            res.record(
                relative_condition(ds * dp, dq * dr, floor),
                0.5 * (self.phi[i] + self.phi[i + 1]),
            );
        }
        res
    }

    /// Height `z` of the surface above `(x, y)`: the first parameter
    /// segment on which `P + Qx` crosses `y`, then `R + Sx` there.
    pub fn height(&self, x: f64, y: f64) -> Result<f64, Error> {
        let yy = |i: usize| self.p[i] + self.q[i] * x;
        for i in 0..self.phi.len().saturating_sub(1) {
            let (y0, y1) = (yy(i), yy(i + 1));
            if (y0 - y) * (y1 - y) <= 0.0 && y0 != y1 {
                let w = (y - y0) / (y1 - y0);
                let z0 = self.r[i] + self.s[i] * x;
                let z1 = self.r[i + 1] + self.s[i + 1] * x;
                return Ok(z0 + w * (z1 - z0));
            }
            if y0 == y && y1 == y {
                return Ok(self.r[i] + self.s[i] * x);
            }
        }
        Err(Error::OutOfRange {
            value: y,
            lo: (0..self.phi.len()).map(yy).fold(f64::INFINITY, f64::min),
            hi: (0..self.phi.len())
                .map(yy)
                .fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

fn relative_condition(a: f64, b: f64, floor: f64) -> f64 {
    let den = a.abs() + b.abs();
    if den <= floor {
        // both products vanish to the resolution of the data
        return 0.0;
    }
    (a - b).abs() / den
}

/// Exponents of the monomial family, kept exact.
pub type Exponent = Ratio<i64>;

/// Generators of a monomial quad: the free coefficients `f, g, h, k` and
/// the exponent generators `κ, λ, μ, ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialParams {
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub k: f64,
    pub kappa: Exponent,
    pub lambda: Exponent,
    pub mu: Exponent,
    pub nu: Exponent,
}

/// The four functions `P, Q, R, S` of a parameter `phi`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileQuad {
    Expressions {
        p: Expr,
        q: Expr,
        r: Expr,
        s: Expr,
    },
    /// `P = aφ^α, Q = bφ^β, R = cφ^γ, S = dφ^δ`.
    Monomial {
        coefficients: [f64; 4],
        exponents: [Exponent; 4],
    },
    Sampled(SampledQuad),
}

fn power(phi: f64, e: Exponent) -> Result<(f64, f64), Error> {
    let ef = *e.numer() as f64 / *e.denom() as f64;
    if e.is_integer() {
        let n = *e.numer();
        let n32 =
            i32::try_from(n).map_err(|_| Error::InvalidInput(format!("exponent {n} too large")))?;
        if n == 0 {
            return Ok((1.0, 0.0));
        }
        return Ok((phi.powi(n32), ef * phi.powi(n32 - 1)));
    }
    if !(phi > 0.0) {
        return Err(Error::OutOfRange {
            value: phi,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    Ok((phi.powf(ef), ef * phi.powf(ef - 1.0)))
}

impl ProfileQuad {
    /// `[P, Q, R, S]` at `phi`.
    pub fn eval(&self, phi: f64) -> Result<[f64; 4], Error> {
        match self {
            ProfileQuad::Expressions { p, q, r, s } => Ok([
                p.eval_at("phi", phi)?,
                q.eval_at("phi", phi)?,
                r.eval_at("phi", phi)?,
                s.eval_at("phi", phi)?,
            ]),
            ProfileQuad::Monomial {
                coefficients,
                exponents,
            } => {
                let mut out = [0.0; 4];
                for i in 0..4 {
                    out[i] = coefficients[i] * power(phi, exponents[i])?.0;
                }
                Ok(out)
            }
            ProfileQuad::Sampled(sq) => sq.eval(phi),
        }
    }

    /// `[P', Q', R', S']` at `phi`, for the smooth variants.
    pub fn derivative(&self, phi: f64) -> Result<[f64; 4], Error> {
        match self {
            ProfileQuad::Expressions { p, q, r, s } => Ok([
                p.eval_derivative("phi", phi)?.1,
                q.eval_derivative("phi", phi)?.1,
                r.eval_derivative("phi", phi)?.1,
                s.eval_derivative("phi", phi)?.1,
            ]),
            ProfileQuad::Monomial {
                coefficients,
                exponents,
            } => {
                let mut out = [0.0; 4];
                for i in 0..4 {
                    out[i] = coefficients[i] * power(phi, exponents[i])?.1;
                }
                Ok(out)
            }
            ProfileQuad::Sampled(_) => Err(Error::InvalidInput(
                "sampled quads have no pointwise derivative".into(),
            )),
        }
    }

    /// Relative residual of `dS·dP = dQ·dR` at each grid point (or on each
    /// segment for sampled quads).
    pub fn condition_residual(&self, grid: &[f64]) -> Result<Residual, Error> {
        if let ProfileQuad::Sampled(sq) = self {
            return Ok(sq.condition_residual());
        }
        let mut res = Residual::empty();
        for &phi in grid {
            let [dp, dq, dr, ds] = self.derivative(phi)?;
            res.record(relative_condition(ds * dp, dq * dr, 0.0), phi);
        }
        Ok(res)
    }

    /// Tabulate on a grid.
    pub fn sample(&self, grid: &[f64]) -> Result<SampledQuad, Error> {
        let mut out = SampledQuad {
            phi: grid.to_vec(),
            p: Vec::with_capacity(grid.len()),
            q: Vec::with_capacity(grid.len()),
            r: Vec::with_capacity(grid.len()),
            s: Vec::with_capacity(grid.len()),
        };
        for &phi in grid {
            let [p, q, r, s] = self.eval(phi)?;
            out.p.push(p);
            out.q.push(q);
            out.r.push(r);
            out.s.push(s);
        }
        Ok(out)
    }
}

/// Default tolerance of the developability condition.
pub const CONDITION_TOL: f64 = 1e-9;

/// A quad whose developability condition has been checked over `range`.
#[derive(Debug, Clone, PartialEq)]
pub struct PqrsSurface {
    pub quad: ProfileQuad,
    pub range: (f64, f64),
    pub condition: Residual,
}

/// Check the condition on `samples` points of `range` (or on the quad's
/// own grid when sampled) and wrap the quad for evaluation.
pub fn pqrs_surface(
    quad: ProfileQuad,
    range: (f64, f64),
    samples: usize,
    tol: f64,
) -> Result<PqrsSurface, Error> {
    let grid = numeric::linspace(range.0, range.1, samples.max(2));
    let condition = quad.condition_residual(&grid)?;
    if !(condition.max <= tol) {
        return Err(Error::ConditionViolated {
            param: condition.argmax.first().copied().unwrap_or(f64::NAN),
            residual: condition.max,
        });
    }
    let range = match &quad {
        ProfileQuad::Sampled(sq) => (sq.phi[0], sq.phi[sq.phi.len() - 1]),
        _ => range,
    };
    Ok(PqrsSurface {
        quad,
        range,
        condition,
    })
}

impl PqrsSurface {
    /// `(x, P + Qx, R + Sx)`.
    pub fn point(&self, phi: f64, x: f64) -> Result<Vector3<f64>, Error> {
        let [p, q, r, s] = self.quad.eval(phi)?;
        Ok(Vector3::new(x, p + q * x, r + s * x))
    }
}

/// Build `P, Q, R, S` from the generators:
/// `α = κ+λ, β = κ+μ, γ = λ+ν, δ = μ+ν` and
/// `a = fg/α, b = fh/β, c = gk/γ, d = hk/δ`.
/// Both conditions `β − α = δ − γ` and `bβ/(aα) = dδ/(cγ)` are asserted.
pub fn monomial_family(params: &MonomialParams) -> Result<ProfileQuad, Error> {
    let MonomialParams {
        f,
        g,
        h,
        k,
        kappa,
        lambda,
        mu,
        nu,
    } = params.clone();
    let exponents = [kappa + lambda, kappa + mu, lambda + nu, mu + nu];
    for (e, name) in
        exponents
            .iter()
            .zip(["kappa + lambda", "kappa + mu", "lambda + nu", "mu + nu"])
    {
        if *e.numer() == 0 {
            return Err(Error::Degenerate(format!("exponent sum {name} is zero")));
        }
    }
    let [alpha, beta, gamma, delta] = exponents;
    if beta - alpha != delta - gamma {
        return Err(Error::Degenerate("exponent condition failed".into()));
    }
    let ef = |e: Exponent| *e.numer() as f64 / *e.denom() as f64;
    let coefficients = [
        f * g / ef(alpha),
        f * h / ef(beta),
        g * k / ef(gamma),
        h * k / ef(delta),
    ];
    if coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidInput(
            "non-finite monomial coefficient".into(),
        ));
    }
    let [a, b, c, d] = coefficients;
    // b β c γ = d δ a α, cross-multiplied to stay finite when a or c is 0
    let lhs = b * ef(beta) * c * ef(gamma);
    let rhs = d * ef(delta) * a * ef(alpha);
    if (lhs - rhs).abs() > 1e-12 * lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE) {
        return Err(Error::ConditionViolated {
            param: f64::NAN,
            residual: (lhs - rhs).abs(),
        });
    }
    Ok(ProfileQuad::Monomial {
        coefficients,
        exponents,
    })
}

/// Point `(x, 2φ + 3φ²x, φ² + 2φ³x)` of the cubic worked example.
pub fn cubic_example_point(phi: f64, x: f64) -> Vector3<f64> {
    let p2 = phi * phi;
    Vector3::new(x, 2.0 * phi + 3.0 * p2 * x, p2 + 2.0 * p2 * phi * x)
}

/// `−4xy³ − y² + 18xyz + 27x²z² + 4z`, the implicit equation of the cubic
/// example.
pub fn cubic_example_equation(p: &Vector3<f64>) -> f64 {
    let (x, y, z) = (p.x, p.y, p.z);
    -4.0 * x * y * y * y - y * y + 18.0 * x * y * z + 27.0 * x * x * z * z + 4.0 * z
}

/// A look-alike with wrong coefficients,
/// `4y³x + 72y²x²z − y² − 18yxz + 27x²z² + 2z`; a known-bad fixture that
/// does not vanish on the surface.
pub fn cubic_example_decoy(p: &Vector3<f64>) -> f64 {
    let (x, y, z) = (p.x, p.y, p.z);
    4.0 * y * y * y * x + 72.0 * y * y * x * x * z - y * y - 18.0 * y * x * z
        + 27.0 * x * x * z * z
        + 2.0 * z
}

/// Largest monomial magnitude of the equation at `p`, at least 1.
pub fn cubic_example_scale(p: &Vector3<f64>) -> f64 {
    let (x, y, z) = (p.x, p.y, p.z);
    [
        (4.0 * x * y * y * y).abs(),
        (y * y).abs(),
        (18.0 * x * y * z).abs(),
        (27.0 * x * x * z * z).abs(),
        (4.0 * z).abs(),
        1.0,
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Scaled residual of the implicit equation at the parametrized point.
pub fn cubic_example_residual(phi: f64, x: f64) -> f64 {
    let p = cubic_example_point(phi, x);
    cubic_example_equation(&p).abs() / cubic_example_scale(&p)
}

/// The quad `P = 2φ, Q = 3φ², R = φ², S = 2φ³` of the cubic example.
pub fn cubic_example_quad() -> ProfileQuad {
    ProfileQuad::Monomial {
        coefficients: [2.0, 3.0, 1.0, 2.0],
        exponents: [
            Ratio::from(1),
            Ratio::from(2),
            Ratio::from(2),
            Ratio::from(3),
        ],
    }
}

pub const CYLINDER_ANGLE_TOL: f64 = 1e-10;
pub const APEX_RELATIVE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum RulingFamily {
    /// All rulings parallel to `direction` within `spread` radians.
    Cylinder {
        direction: Vector3<f64>,
        spread: f64,
    },
    /// All rulings within `spread` of `apex`.
    Cone { apex: Vector3<f64>, spread: f64 },
    General {
        angular_spread: f64,
        apex_spread: Option<f64>,
    },
}

impl RulingFamily {
    pub fn name(&self) -> &'static str {
        match self {
            RulingFamily::Cylinder { .. } => "cylinder",
            RulingFamily::Cone { .. } => "cone",
            RulingFamily::General { .. } => "general",
        }
    }
}

/// Decide whether the rulings joining two sections are parallel, concurrent
/// or neither, with thresholds relative to the sections' size.
pub fn classify_ruling_family(a: &ShadowSection, b: &ShadowSection) -> Result<RulingFamily, Error> {
    classify_with(a, b, CYLINDER_ANGLE_TOL, APEX_RELATIVE_TOL)
}

pub fn classify_with(
    a: &ShadowSection,
    b: &ShadowSection,
    angle_tol: f64,
    apex_tol: f64,
) -> Result<RulingFamily, Error> {
    let g = gap(a, b)?;
    let (a, b) = align(a, b)?;
    let diameter = a.diameter().max(b.diameter());
    if !(diameter > 0.0) {
        return Err(Error::Degenerate("section points all coincide".into()));
    }
    let lines: Vec<(Vector3<f64>, Vector3<f64>)> = (0..a.len())
        .map(|i| {
            let origin = Vector3::new(a.offset, a.abscissa[i], a.ordinate[i]);
            let dir = Vector3::new(
                g,
                b.abscissa[i] - a.abscissa[i],
                b.ordinate[i] - a.ordinate[i],
            )
            .normalize();
            (origin, dir)
        })
        .collect();

    let mean = lines
        .iter()
        .fold(Vector3::zeros(), |acc, (_, d)| acc + d)
        .normalize();
    let angular_spread = lines
        .iter()
        .map(|(_, d)| d.cross(&mean).norm().atan2(d.dot(&mean)))
        .fold(0.0, f64::max);
    if angular_spread <= angle_tol {
        return Ok(RulingFamily::Cylinder {
            direction: mean,
            spread: angular_spread,
        });
    }

    // least-squares point nearest to every ruling line
    let mut m = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for (o, d) in &lines {
        let proj = Matrix3::identity() - d * d.transpose();
        m += proj;
        rhs += proj * o;
    }
    let apex_spread = m.lu().solve(&rhs).map(|apex| {
        let spread = lines
            .iter()
            .map(|(o, d)| {
                let w = apex - o;
                (w - d * d.dot(&w)).norm()
            })
            .fold(0.0, f64::max);
        (apex, spread)
    });
    match apex_spread {
        Some((apex, spread)) if spread <= apex_tol * diameter => {
            Ok(RulingFamily::Cone { apex, spread })
        }
        other => Ok(RulingFamily::General {
            angular_spread,
            apex_spread: other.map(|(_, s)| s),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(r: f64, offset: f64) -> ShadowSection {
        circle_section(r, [0.0, 0.0], &numeric::linspace(-3.0, 3.0, 301), offset).unwrap()
    }

    #[test]
    fn parabola_and_constant_profiles() {
        let phi = numeric::linspace(0.0, 2.0, 201);
        let s = profile_from_slope(&phi, &phi, 0.0, 0.0).unwrap();
        for (p, u) in phi.iter().zip(&s.ordinate) {
            // trapezoid of a linear integrand is exact
            assert!((u - p * p / 2.0).abs() < 1e-14);
        }
        let s = profile_from_slope(&phi, &vec![3.0; 201], 1.5, 0.0).unwrap();
        assert!(s.ordinate.iter().all(|&u| u == 1.5));
    }

    #[test]
    fn circle_section_lies_on_circle() {
        for n in [201, 401] {
            let s =
                circle_section(2.0, [0.5, -1.0], &numeric::linspace(-3.0, 3.0, n), 0.0).unwrap();
            let worst = (0..n)
                .map(|i| ((s.abscissa[i] - 0.5).hypot(s.ordinate[i] + 1.0) - 2.0).abs())
                .fold(0.0, f64::max);
            assert!(worst < 40.0 / (n * n) as f64, "{worst}");
        }
    }

    #[test]
    fn scaled_circle_is_exactly_scaled() {
        let (a, b) = (circle(1.0, 0.0), circle(2.0, 1.0));
        for i in 0..a.len() {
            assert_eq!(b.abscissa[i], 2.0 * a.abscissa[i]);
            assert_eq!(b.ordinate[i], 2.0 * a.ordinate[i]);
        }
    }

    #[test]
    fn shadow_point_interpolates_between_sections() {
        let (a, b) = (circle(1.0, 0.0), circle(2.0, 1.0));
        let (tt, uu) = a.at(0.4).unwrap();
        let (t, u) = b.at(0.4).unwrap();
        assert_eq!(
            shadow_point(&a, &b, 0.4, 0.0).unwrap(),
            Vector3::new(0.0, tt, uu)
        );
        let p = shadow_point(&a, &b, 0.4, 1.0).unwrap();
        assert!((p - Vector3::new(1.0, t, u)).norm() < 1e-15);
        let c = circle(1.0, 1.0);
        for x in [0.0, 0.3, 5.0] {
            assert_eq!(
                shadow_point(&a, &c, 0.4, x).unwrap().yz(),
                Vector3::new(0.0, tt, uu).yz()
            );
        }
        assert!(shadow_point(&a, &b, 3.5, 0.0).is_err());
        assert!(shadow_point(&b, &a, 0.0, 0.0).is_err());
    }

    #[test]
    fn parallel_tangents_on_shared_grid() {
        let (a, b) = (circle(1.0, 0.0), circle(2.5, 1.0));
        for i in 1..a.len() {
            let (dtt, duu) = (
                a.abscissa[i] - a.abscissa[i - 1],
                a.ordinate[i] - a.ordinate[i - 1],
            );
            let (dt, du) = (
                b.abscissa[i] - b.abscissa[i - 1],
                b.ordinate[i] - b.ordinate[i - 1],
            );
            assert!(
                (dtt * du - duu * dt).abs()
                    <= 1e-12 * (dtt.abs() + duu.abs()) * (dt.abs() + du.abs())
            );
        }
    }

    #[test]
    fn pqrs_matches_shadow_point() {
        let (a, b) = (circle(1.0, 0.0), circle(1.7, 2.0));
        let quad = SampledQuad::from_sections(&a, &b).unwrap();
        let surf = pqrs_surface(ProfileQuad::Sampled(quad), (0.0, 1.0), 2, CONDITION_TOL).unwrap();
        for phi in [-2.9, -0.3, 0.0, 1.1, 3.0] {
            for x in [0.0, 0.7, 2.0, 3.5] {
                let d = surf.point(phi, x).unwrap() - shadow_point(&a, &b, phi, x).unwrap();
                assert!(d.norm() <= 1e-14, "{d}");
            }
        }
    }

    #[test]
    fn classifies_cylinder_cone_and_general() {
        match classify_ruling_family(&circle(1.0, 0.0), &circle(1.0, 1.0)).unwrap() {
            RulingFamily::Cylinder { direction, spread } => {
                assert_eq!(spread, 0.0);
                assert_eq!(direction, Vector3::x());
            }
            other => panic!("{other:?}"),
        }
        match classify_ruling_family(&circle(1.0, 0.0), &circle(2.0, 1.0)).unwrap() {
            RulingFamily::Cone { apex, .. } => assert!(
                (apex - Vector3::new(-1.0, 0.0, 0.0)).norm() <= 1e-12,
                "{apex}"
            ),
            other => panic!("{other:?}"),
        }
        let phi = numeric::linspace(-3.0, 3.0, 301);
        let t: Vec<f64> = phi
            .iter()
            .map(|p| -4.0 * p / (4.0 * p * p + 1.0).sqrt())
            .collect();
        let ellipse = profile_from_slope(&phi, &t, 0.0, 1.0).unwrap();
        let fam = classify_ruling_family(&circle(1.0, 0.0), &ellipse).unwrap();
        assert_eq!(fam.name(), "general");
    }

    #[test]
    fn coincident_sections_are_degenerate() {
        let pts = [[1.0, 1.0]; 3];
        let s = ShadowSection {
            phi: vec![0.0, 1.0, 2.0],
            abscissa: pts.iter().map(|p| p[0]).collect(),
            ordinate: pts.iter().map(|p| p[1]).collect(),
            offset: 0.0,
        };
        let mut t = s.clone();
        t.offset = 1.0;
        assert!(matches!(
            classify_ruling_family(&s, &t),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn sampled_section_recovers_slopes() {
        let pts: Vec<[f64; 2]> = numeric::linspace(-1.0, 1.0, 41)
            .iter()
            .map(|&t| [t, t * t])
            .collect();
        let s = sampled_section(&pts, 0.0).unwrap();
        for (p, t) in s.phi.iter().zip(&s.abscissa) {
            assert!((p - 2.0 * t).abs() < 1e-12);
        }
        let rev: Vec<[f64; 2]> = pts.iter().rev().copied().collect();
        let back = sampled_section(&rev, 0.0).unwrap();
        assert_eq!(back.abscissa, s.abscissa);
        assert!(back
            .phi
            .iter()
            .zip(&s.phi)
            .all(|(a, b)| (a - b).abs() < 1e-12));
        let wiggle: Vec<[f64; 2]> = numeric::linspace(0.0, 6.0, 41)
            .iter()
            .map(|&t| [t, t.sin()])
            .collect();
        assert!(matches!(
            sampled_section(&wiggle, 0.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn misaligned_grids_are_resampled() {
        let a = circle_section(1.0, [0.0, 0.0], &numeric::linspace(-2.0, 2.0, 101), 0.0).unwrap();
        let b = circle_section(1.0, [0.0, 0.0], &numeric::linspace(-1.0, 3.0, 81), 1.0).unwrap();
        let (ra, rb) = align(&a, &b).unwrap();
        assert_eq!(ra.phi, rb.phi);
        assert_eq!(ra.range(), (-1.0, 2.0));
        let far = circle_section(1.0, [0.0, 0.0], &numeric::linspace(5.0, 6.0, 11), 1.0).unwrap();
        assert!(matches!(align(&a, &far), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn section_spec_parsing() {
        let s = parse_section_spec(
            r#"{"family":"circle","params":{"radius":2},"range":[-3,3],"samples":64,"offset":1}"#,
        )
        .unwrap();
        assert_eq!(
            s.family,
            SectionFamily::Circle {
                radius: 2.0,
                center: [0.0, 0.0]
            }
        );
        assert_eq!(s.offset, 1.0);
        let sec = build_section(&s).unwrap();
        assert_eq!(sec.len(), 64);
        let s = parse_section_spec(
            r#"{"family":"expressions","params":{"abscissa":"-phi"},"range":[0,1],"samples":16}"#,
        )
        .unwrap();
        assert!((build_section(&s).unwrap().ordinate[15] + 0.5).abs() < 1e-15);
        let e = parse_section_spec(
            r#"{"family":"circle","params":{"radius":-1},"range":[-3,3],"samples":64}"#,
        )
        .unwrap_err();
        assert_eq!(e.key, "params.radius");
        let e =
            parse_section_spec(r#"{"family":"sampled","params":{"points":[[0,0]]}}"#).unwrap_err();
        assert_eq!(e.key, "params.points");
        let e = parse_section_spec(
            r#"{"family":"expressions","params":{"abscissa":"tau"},"range":[0,1],"samples":16}"#,
        )
        .unwrap_err();
        assert_eq!(e.key, "params.abscissa");
    }

    #[test]
    fn monomial_recipe() {
        let one = Ratio::from(1);
        let params = MonomialParams {
            f: 1.0,
            g: 1.0,
            h: 1.0,
            k: 1.0,
            kappa: one,
            lambda: Ratio::from(0),
            mu: one,
            nu: Ratio::from(2),
        };
        match monomial_family(&params).unwrap() {
            ProfileQuad::Monomial {
                coefficients,
                exponents,
            } => {
                assert_eq!(
                    exponents,
                    [
                        Ratio::from(1),
                        Ratio::from(2),
                        Ratio::from(2),
                        Ratio::from(3)
                    ]
                );
                assert_eq!(coefficients, [1.0, 0.5, 0.5, 1.0 / 3.0]);
            }
            other => panic!("{other:?}"),
        }
        let zero = MonomialParams {
            kappa: Ratio::from(1),
            lambda: Ratio::from(-1),
            ..params
        };
        assert!(matches!(monomial_family(&zero), Err(Error::Degenerate(_))));
    }

    #[test]
    fn cubic_example_quad_from_generators() {
        let params = MonomialParams {
            f: 2.0,
            g: 1.0,
            h: 3.0,
            k: 2.0,
            kappa: Ratio::from(1),
            lambda: Ratio::from(0),
            mu: Ratio::from(1),
            nu: Ratio::from(2),
        };
        assert_eq!(monomial_family(&params).unwrap(), cubic_example_quad());
        let surf = pqrs_surface(cubic_example_quad(), (-2.0, 2.0), 401, CONDITION_TOL).unwrap();
        assert!(surf.condition.max <= 1e-15);
        assert_eq!(surf.point(1.0, 1.0).unwrap(), Vector3::new(1.0, 5.0, 3.0));
    }

    #[test]
    fn cubic_example_values() {
        assert_eq!(cubic_example_equation(&cubic_example_point(0.0, 0.7)), 0.0);
        assert_eq!(cubic_example_point(1.0, 1.0), Vector3::new(1.0, 5.0, 3.0));
        assert_eq!(cubic_example_equation(&Vector3::new(1.0, 5.0, 3.0)), 0.0);
        assert_eq!(cubic_example_equation(&Vector3::new(0.0, 4.0, 4.0)), 0.0);
        assert!(cubic_example_decoy(&Vector3::new(1.0, 5.0, 3.0)).abs() > 1.0);
    }

    #[test]
    fn violated_condition_names_parameter() {
        let q = ProfileQuad::Expressions {
            p: crate::expr::parse("phi").unwrap(),
            q: crate::expr::parse("phi").unwrap(),
            r: crate::expr::parse("0").unwrap(),
            s: crate::expr::parse("phi").unwrap(),
        };
        match pqrs_surface(q, (0.5, 1.5), 11, CONDITION_TOL) {
            Err(Error::ConditionViolated { param, residual }) => {
                assert_eq!(param, 0.5);
                assert_eq!(residual, 1.0);
            }
            other => panic!("{other:?}"),
        }
    }
}
