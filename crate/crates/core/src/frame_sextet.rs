//! The six functions `l, m, n, λ, μ, ν` attached to the rulings.
//!
//! On a tangent developable the spatial differentials are linear in the
//! developed ones: `dx = l dT + λ dU`, `dy = m dT + μ dU`, `dz = n dT + ν dU`,
//! with coefficients depending on the ruling alone. Writing `c = (c1, c2, c3)`
//! for the ruling's direction cosines and `D = dc/dω`,
//!
//! ```text
//! (l, m, n) = c sinω + D cosω
//! (λ, μ, ν) = c cosω − D sinω
//! ```
//!
//! `D` is the unit vector along the derivative of `c`, taken perpendicular to
//! `c`; its length is one in exact arithmetic because `|dc| = dω`, and
//! normalizing it keeps the three algebraic conditions (two unit norms and
//! orthogonality) at rounding level instead of at the finite-difference
//! error of the derivative.

use nalgebra::Vector3;

use crate::curve_model::{AngleProfile, DirectrixCurve};
use crate::development::DevelopedDirectrix;
use crate::error::Error;
use crate::numeric::{self, Residual, EPS_SING};
use crate::tangent_dev::ruling_direction;

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionCosines {
    pub tau: Vec<f64>,
    /// `(sinζ sinθ, cosζ sinθ, cosθ)` per sample.
    pub cosines: Vec<Vector3<f64>>,
}

pub fn direction_cosines(profile: &AngleProfile) -> DirectionCosines {
    DirectionCosines {
        tau: profile.tau.clone(),
        cosines: profile
            .zeta
            .iter()
            .zip(&profile.theta)
            .map(|(&z, &t)| ruling_direction(z, t))
            .collect(),
    }
}

impl DirectionCosines {
    /// Derivative of each cosine with respect to `τ`.
    pub fn derivative(&self) -> Result<Vec<Vector3<f64>>, Error> {
        if self.tau.len() < 3 {
            return Err(Error::InvalidInput("need at least three samples".into()));
        }
        let comp = |k: usize| {
            let y: Vec<f64> = self.cosines.iter().map(|c| c[k]).collect();
            numeric::derivative(&self.tau, &y)
        };
        let (a, b, c) = (comp(0), comp(1), comp(2));
        Ok((0..self.tau.len())
            .map(|i| Vector3::new(a[i], b[i], c[i]))
            .collect())
    }
}

/// `along_t[i] = (l, m, n)` and `along_u[i] = (λ, μ, ν)` at `tau[i]`: the
/// coefficients of `dT` and `dU` in the spatial differentials.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSextet {
    pub tau: Vec<f64>,
    pub omega: Vec<f64>,
    pub along_t: Vec<Vector3<f64>>,
    pub along_u: Vec<Vector3<f64>>,
}

impl FrameSextet {
    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }
}

/// Unit `dc/dω` per sample, or `None` where `c` does not turn.
fn unit_derivatives(dc: &DirectionCosines) -> Result<Vec<Option<Vector3<f64>>>, Error> {
    let span = dc.tau[dc.tau.len() - 1] - dc.tau[0];
    let raw = dc.derivative()?;
    Ok(raw
        .iter()
        .zip(&dc.cosines)
        .map(|(g, c)| {
            let perp = g - c * c.dot(g);
            let norm = perp.norm();
            // total turning at this rate over the whole range below EPS_SING
            (norm * span > EPS_SING).then(|| perp / norm)
        })
        .collect())
}

/// Build the sextet from a profile whose `ω` has been filled.
pub fn sextet(profile: &AngleProfile) -> Result<FrameSextet, Error> {
    let omega = profile.omega()?;
    let dc = direction_cosines(profile);
    let units = unit_derivatives(&dc)?;
    let mut along_t = Vec::with_capacity(profile.len());
    let mut along_u = Vec::with_capacity(profile.len());
    for (i, d) in units.into_iter().enumerate() {
        let d = d.ok_or(Error::DegenerateFrame { sample: i })?;
        let c = dc.cosines[i];
        let (so, co) = omega[i].sin_cos();
        along_t.push(c * so + d * co);
        along_u.push(c * co - d * so);
    }
    Ok(FrameSextet {
        tau: profile.tau.clone(),
        omega: omega.to_vec(),
        along_t,
        along_u,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    /// `l² + m² + n² − 1`.
    pub unit_t: Residual,
    /// `λ² + μ² + ν² − 1`.
    pub unit_u: Residual,
    /// `lλ + mμ + nν`.
    pub orthogonal: Residual,
    /// `dx` against `l dT + λ dU` (and likewise `y`, `z`), relative to
    /// `|(dT, dU)|`.
    pub differential: Residual,
    /// Grid step actually used for the differential check: a whole number
    /// of cells closest to the requested step.
    pub effective_step: f64,
    /// `s`-variation of `T − U tanω` at fixed `τ`.
    pub omega_invariance: Residual,
    /// `(l, m, n) sinω + (λ, μ, ν) cosω` against the direction cosines.
    pub split: Residual,
}

/// Ruling distances at which the differential identities are probed.
pub const PROBE_DISTANCES: [f64; 3] = [0.5, 1.0, 2.0];

/// Check the algebraic conditions sample by sample, and the differential
/// identities by central differences of `2k` grid cells in `τ` and the
/// matching step in `s`, for the displacements `(h, 0)`, `(0, h)`, `(h, h)`.
pub fn check_conditions(
    frame: &FrameSextet,
    curve: &DirectrixCurve,
    dev: &DevelopedDirectrix,
    h: f64,
) -> Result<ConditionReport, Error> {
    let n = frame.len();
    if curve.tau != frame.tau || dev.tau != frame.tau {
        return Err(Error::GridMismatch(
            "sextet, curve and development must share one grid".into(),
        ));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("step {h} must be positive")));
    }
    let mean_step = (frame.tau[n - 1] - frame.tau[0]) / (n - 1) as f64;
    let k = (h / mean_step).round().max(1.0) as usize;
    if 2 * k >= n {
        return Err(Error::InvalidInput(format!(
            "step {h} is too large for the {n}-sample grid"
        )));
    }

    let mut report = ConditionReport {
        unit_t: Residual::empty(),
        unit_u: Residual::empty(),
        orthogonal: Residual::empty(),
        differential: Residual::empty(),
        effective_step: k as f64 * mean_step,
        omega_invariance: Residual::empty(),
        split: Residual::empty(),
    };

    for i in 0..n {
        let tau = frame.tau[i];
        let (t, u) = (frame.along_t[i], frame.along_u[i]);
        report.unit_t.record((t.norm_squared() - 1.0).abs(), tau);
        report.unit_u.record((u.norm_squared() - 1.0).abs(), tau);
        report.orthogonal.record(t.dot(&u).abs(), tau);
    }

    // The spatial side uses the curve's own ruling directions, so that a
    // corrupted sextet shows up against it.
    let direction = |j: usize| curve_direction(curve, j);
    for i in 0..n {
        let (so, co) = frame.omega[i].sin_cos();
        let recombined = frame.along_t[i] * so + frame.along_u[i] * co;
        report
            .split
            .record((recombined - direction(i)?).amax(), frame.tau[i]);
    }

    let point = |j: usize, s: f64| -> Result<(Vector3<f64>, f64, f64), Error> {
        let (so, co) = dev.omega[j].sin_cos();
        Ok((
            curve.position[j] - direction(j)? * s,
            dev.pd[j] - s * so,
            dev.qd[j] - s * co,
        ))
    };
    let ds = report.effective_step;
    for i in k..n - k {
        for &s in &PROBE_DISTANCES {
            for (dt, dsk) in [(1usize, 0.0), (0, 1.0), (1, 1.0)] {
                let (hi, lo) = (i + dt * k, i - dt * k);
                let (xp, tp, up) = point(hi, s + dsk * ds)?;
                let (xm, tm, um) = point(lo, s - dsk * ds)?;
                let (d_t, d_u) = (tp - tm, up - um);
                let predicted = frame.along_t[i] * d_t + frame.along_u[i] * d_u;
                let mismatch = (xp - xm - predicted).amax() / d_t.hypot(d_u);
                report.differential.record(mismatch, frame.tau[i]);
            }
        }
    }

    for i in 0..n {
        let (so, co) = dev.omega[i].sin_cos();
        if co.abs() < EPS_SING {
            continue;
        }
        let omega_at = |s: f64| (dev.pd[i] - s * so) - (dev.qd[i] - s * co) * (so / co);
        let base = omega_at(0.0);
        let scale = dev.pd[i].abs().max(dev.qd[i].abs() / co.abs()).max(1.0);
        for &s in &PROBE_DISTANCES {
            report
                .omega_invariance
                .record((omega_at(s) - base).abs() / scale, frame.tau[i]);
        }
    }
    Ok(report)
}

fn curve_direction(curve: &DirectrixCurve, j: usize) -> Result<Vector3<f64>, Error> {
    let d = curve.differential[j];
    let orientation = if d.x < 0.0 { -1.0 } else { 1.0 };
    let (z, t) = crate::curve_model::angles_from_differential(&d, orientation, j)?;
    Ok(ruling_direction(z, t))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentRelation {
    /// `|dλ⃗ + tanω dl⃗| / (|dl⃗| + |dλ⃗|)` over segments, with `dl⃗ = (dl, dm, dn)`.
    pub residual: Residual,
    /// `|dl⃗ sinω + dλ⃗ cosω| / (|dl⃗| + |dλ⃗|)`: the ratio chain
    /// `dl : dλ = −cosω : sinω` in cross-multiplied form.
    pub ratio_chain: Residual,
    pub skipped: usize,
}

/// Check `dλ = −tanω dl` (and its `m`, `n` companions) on every grid
/// segment, with `ω` taken at the segment midpoint.
pub fn check_tangent_relation(frame: &FrameSextet) -> Result<TangentRelation, Error> {
    let mut out = TangentRelation {
        residual: Residual::empty(),
        ratio_chain: Residual::empty(),
        skipped: 0,
    };
    for i in 0..frame.len().saturating_sub(1) {
        let dl = frame.along_t[i + 1] - frame.along_t[i];
        let dlam = frame.along_u[i + 1] - frame.along_u[i];
        if dl.norm() < EPS_SING {
            out.skipped += 1;
            continue;
        }
        let mid = 0.5 * (frame.omega[i] + frame.omega[i + 1]);
        let at = 0.5 * (frame.tau[i] + frame.tau[i + 1]);
        let scale = dl.norm() + dlam.norm();
        let (so, co) = mid.sin_cos();
        out.residual
            .record((dlam + dl * (so / co)).norm() / scale, at);
        out.ratio_chain
            .record((dl * so + dlam * co).norm() / scale, at);
    }
    if out.residual.samples == 0 {
        return Err(Error::Degenerate("constant frame".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve_model::{angles_from_curve, sample_curve, CurveSpec};
    use crate::development::{omega_profile, unfold};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn cosines_of_simple_angles() {
        let p = AngleProfile::new(
            vec![0.0, 1.0],
            vec![FRAC_PI_2, FRAC_PI_2],
            vec![FRAC_PI_2, FRAC_PI_4],
        )
        .unwrap();
        let dc = direction_cosines(&p);
        assert_eq!(
            dc.cosines[0],
            Vector3::new(1.0, FRAC_PI_2.cos(), FRAC_PI_2.cos())
        );
        let h = 0.5f64.sqrt();
        assert!((dc.cosines[1] - Vector3::new(h, 0.0, h)).norm() < 1e-15);
        for c in &dc.cosines {
            assert!((c.norm_squared() - 1.0).abs() <= 1e-15);
        }
    }

    fn profile(zeta: impl Fn(f64) -> f64, theta: impl Fn(f64) -> f64, n: usize) -> AngleProfile {
        let tau = numeric::linspace(0.0, 1.0, n);
        let z = tau.iter().map(|&t| zeta(t)).collect();
        let th = tau.iter().map(|&t| theta(t)).collect();
        AngleProfile::new(tau, z, th).unwrap()
    }

    #[test]
    fn horizontal_rulings_with_omega_equal_zeta() {
        let mut p = profile(|t| 0.5 + t, |_| FRAC_PI_2, 201);
        p.omega = Some(p.zeta.clone());
        let f = sextet(&p).unwrap();
        for i in 0..f.len() {
            assert!(
                (f.along_t[i] - Vector3::x()).amax() < 1e-12,
                "{}",
                f.along_t[i]
            );
            assert!((f.along_u[i] - Vector3::y()).amax() < 1e-12);
        }
    }

    #[test]
    fn meridian_rulings_with_omega_equal_theta() {
        let mut p = profile(|_| FRAC_PI_2, |t| 0.5 + t, 201);
        p.omega = Some(p.theta.clone());
        let f = sextet(&p).unwrap();
        for i in 0..f.len() {
            assert!((f.along_t[i] - Vector3::x()).amax() < 1e-12);
            assert!((f.along_u[i] - Vector3::z()).amax() < 1e-12);
        }
    }

    #[test]
    fn constant_angles_are_degenerate() {
        let p = omega_profile(&profile(|_| 1.0, |_| 1.2, 20)).unwrap();
        assert_eq!(sextet(&p), Err(Error::DegenerateFrame { sample: 0 }));
    }

    fn helix_setup(n: usize) -> (DirectrixCurve, FrameSextet, DevelopedDirectrix) {
        let c = sample_curve(&CurveSpec::helix(1.0, 1.0, (0.3, 2.0), n)).unwrap();
        let (p, d) = unfold(&c, &angles_from_curve(&c).unwrap()).unwrap();
        (c, sextet(&p).unwrap(), d)
    }

    #[test]
    fn helix_conditions_hold() {
        let (c, f, d) = helix_setup(4001);
        let r = check_conditions(&f, &c, &d, 1e-2).unwrap();
        assert!(r.unit_t.max <= 1e-12 && r.unit_u.max <= 1e-12 && r.orthogonal.max <= 1e-12);
        assert!(r.split.max <= 1e-12, "{:?}", r.split);
        assert!(r.omega_invariance.max <= 1e-9);
        assert!(r.differential.max <= 1e-3, "{:?}", r.differential);
        assert!((r.effective_step - 1e-2).abs() < 1e-3);
    }

    #[test]
    fn corrupted_sextet_fails_orthogonality() {
        let (c, mut f, d) = helix_setup(401);
        for v in &mut f.along_u {
            v.x = -v.x;
        }
        let r = check_conditions(&f, &c, &d, 1e-2).unwrap();
        let expected = (0..f.len())
            .map(|i| 2.0 * (f.along_t[i].x * f.along_u[i].x).abs())
            .fold(0.0, f64::max);
        assert!(r.orthogonal.max > 1e-3);
        assert!((r.orthogonal.max - expected).abs() < 1e-12);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let (c, f, _) = helix_setup(401);
        let (_, _, d) = helix_setup(402);
        assert!(matches!(
            check_conditions(&f, &c, &d, 1e-2),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn tangent_relation_on_helix() {
        let (_, f, _) = helix_setup(10_000);
        let r = check_tangent_relation(&f).unwrap();
        assert!(r.residual.max <= 1e-6, "{:?}", r);
        assert!(r.ratio_chain.max <= 1e-6);
        assert_eq!(r.skipped, 0);
    }

    #[test]
    fn constant_frame_is_degenerate() {
        let f = FrameSextet {
            tau: vec![0.0, 1.0, 2.0],
            omega: vec![0.0; 3],
            along_t: vec![Vector3::x(); 3],
            along_u: vec![Vector3::y(); 3],
        };
        assert_eq!(
            check_tangent_relation(&f),
            Err(Error::Degenerate("constant frame".into()))
        );
    }
}
