//! Subcommand bodies. Each returns whether every check passed.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

use devsurf_core::curve_model::{build, parse_curve_spec, AngleProfile, DirectrixCurve};
use devsurf_core::development::{develop_point, unfold};
use devsurf_core::frame_sextet::{check_conditions, check_tangent_relation, sextet};
use devsurf_core::geom_io::{
    export_csv, export_obj, export_svg, grid_quads, report_json, Flat2Doc, Mesh3Doc, SvgStyle,
    Table,
};
use devsurf_core::numeric::{linspace, Residual};
use devsurf_core::selftest;
use devsurf_core::shadow_cone::{
    align, build_section, classify_ruling_family, gap, parse_section_spec, shadow_point,
    RulingFamily, SampledQuad, ShadowSection,
};
use devsurf_core::tangent_dev::{surface_grid, surface_point};
use devsurf_core::verify::{
    apex_homogeneity, implicit_spec_report, isometry_triangle_check, parse_implicit_spec,
    CheckEntry, ImplicitExample, ImplicitOptions, VerificationReport,
};
use devsurf_core::{Error, SpecError};

use crate::{
    Command, SelftestArgs, SextetArgs, ShadowArgs, SurfaceArgs, UnfoldArgs, VerifyImplicitArgs,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read `{}`: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write `{}`: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("`{}`: {source}", path.display())]
    Spec { path: PathBuf, source: SpecError },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

pub fn run(command: Command) -> Result<bool, CliError> {
    match command {
        Command::Surface(a) => surface(a),
        Command::Unfold(a) => unfold_cmd(a),
        Command::Sextet(a) => sextet_cmd(a),
        Command::Shadow(a) => shadow(a),
        Command::VerifyImplicit(a) => verify_implicit(a),
        Command::Selftest(a) => selftest_cmd(a),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn load_curve(path: &Path) -> Result<(DirectrixCurve, AngleProfile), CliError> {
    let spec = parse_curve_spec(&read(path)?).map_err(|source| CliError::Spec {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(build(&spec)?)
}

fn load_section(path: &Path) -> Result<ShadowSection, CliError> {
    let spec = parse_section_spec(&read(path)?).map_err(|source| CliError::Spec {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(build_section(&spec)?)
}

fn check_step(step: f64) -> Result<(), CliError> {
    if step.is_finite() && step > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--step must be positive, got {step}"
        )))
    }
}

/// Print one line per check, write the report if asked, and return the
/// overall verdict. The report is written whatever the verdict.
fn finish(
    command: &str,
    report: &VerificationReport,
    extra: Option<(&str, Value)>,
    path: Option<&Path>,
) -> Result<bool, CliError> {
    for c in &report.checks {
        println!(
            "{} {:<18} max {:.3e} (tol {:e}, {} samples)",
            if c.pass { "PASS" } else { "FAIL" },
            c.check,
            c.max_residual,
            c.tolerance,
            c.samples
        );
    }
    if let Some(path) = path {
        write(path, &report_json(command, report, extra))?;
    }
    Ok(report.all_pass())
}

fn surface(a: SurfaceArgs) -> Result<bool, CliError> {
    let (curve, profile) = load_curve(&a.spec)?;
    let mesh = surface_grid(
        &curve,
        &profile,
        curve.range(),
        a.s_range,
        a.grid.0,
        a.grid.1,
    )?;
    let doc = Mesh3Doc::from_surface(&mesh);
    write(&a.out, &export_obj(&doc)?)?;
    println!(
        "wrote {}: {} vertices, {} faces",
        a.out.display(),
        doc.vertices.len(),
        doc.faces.len()
    );
    Ok(true)
}

fn unfold_cmd(a: UnfoldArgs) -> Result<bool, CliError> {
    check_step(a.step)?;
    let (curve, profile) = load_curve(&a.spec)?;
    let (p, dev) = unfold(&curve, &profile)?;

    let flat = Flat2Doc::from_development(&dev, a.grid.0, a.s_range)?;
    write(&a.out, &export_svg(&flat, &SvgStyle::default())?)?;
    let table = Table::new()
        .column("tau", p.tau.clone())
        .column("zeta", p.zeta.clone())
        .column("theta", p.theta.clone())
        .column("omega", p.omega()?.to_vec());
    let csv_path = a.csv.unwrap_or_else(|| a.out.with_extension("csv"));
    write(&csv_path, &export_csv(&table)?)?;

    let started = std::time::Instant::now();
    let (lo, hi) = curve.range();
    if !(hi - a.step > lo && a.s_range.1 - a.step > a.s_range.0) {
        return Err(CliError::Usage(format!(
            "--step {} leaves no room for triangles",
            a.step
        )));
    }
    let mut lattice = Vec::with_capacity(a.grid.0 * a.grid.1);
    for &t in &linspace(lo, hi - a.step, a.grid.0) {
        for &s in &linspace(a.s_range.0, a.s_range.1 - a.step, a.grid.1) {
            lattice.push((t, s));
        }
    }
    let r = isometry_triangle_check(
        |t, s| surface_point(&curve, &p, t, s).map(|sp| sp.position),
        |t, s| develop_point(&dev, t, s),
        &lattice,
        a.step,
    )?;
    let mut report = VerificationReport::default();
    report.push(CheckEntry::new(
        "isometry",
        a.tol_isometry,
        &r,
        None,
        started,
    ));
    finish("unfold", &report, None, a.report.as_deref())
}

fn sextet_cmd(a: SextetArgs) -> Result<bool, CliError> {
    check_step(a.step)?;
    let (curve, profile) = load_curve(&a.spec)?;
    let started = std::time::Instant::now();
    let (p, dev) = unfold(&curve, &profile)?;
    let frame = sextet(&p)?;
    let c = check_conditions(&frame, &curve, &dev, a.step)?;
    let t = check_tangent_relation(&frame)?;
    let mut report = VerificationReport::default();
    let entries: [(&str, f64, &Residual); 7] = [
        ("unit-t", a.tol_algebraic, &c.unit_t),
        ("unit-u", a.tol_algebraic, &c.unit_u),
        ("orthogonal", a.tol_algebraic, &c.orthogonal),
        ("split", a.tol_algebraic, &c.split),
        ("omega-invariance", a.tol_algebraic, &c.omega_invariance),
        ("differential", a.tol_differential, &c.differential),
        ("tangent-relation", a.tol_tangent_relation, &t.residual),
    ];
    for (name, tol, r) in entries {
        report.push(CheckEntry::new(name, tol, r, None, started));
    }
    let extra = json!({ "effective_step": c.effective_step, "skipped_segments": t.skipped });
    finish(
        "sextet",
        &report,
        Some(("frame", extra)),
        a.report.as_deref(),
    )
}

fn shadow(a: ShadowArgs) -> Result<bool, CliError> {
    let [first, second] = a.spec.as_slice() else {
        return Err(CliError::Usage(format!(
            "shadow takes exactly two --spec files, got {}",
            a.spec.len()
        )));
    };
    let lit = load_section(first)?;
    let mut dark = load_section(second)?;
    if let Some(g) = a.gap {
        dark.offset = lit.offset + g;
    }
    gap(&lit, &dark)?;
    let (lit, dark) = align(&lit, &dark)?;

    let (lo, hi) = lit.range();
    let phis = linspace(lo, hi, a.grid.0);
    let xs = linspace(lit.offset, dark.offset, a.grid.1);
    let mut vertices = Vec::with_capacity(phis.len() * xs.len());
    for &phi in &phis {
        for &x in &xs {
            let v = shadow_point(&lit, &dark, phi, x)?;
            vertices.push([v.x, v.y, v.z]);
        }
    }
    let doc = Mesh3Doc {
        vertices,
        faces: grid_quads(phis.len(), xs.len()),
        provenance: None,
    };
    write(&a.out, &export_obj(&doc)?)?;

    let started = std::time::Instant::now();
    let quad = SampledQuad::from_sections(&lit, &dark)?;
    let mut report = VerificationReport::default();
    report.push(CheckEntry::new(
        "section-condition",
        a.tol_condition,
        &quad.condition_residual(),
        None,
        started,
    ));
    let family = classify_ruling_family(&lit, &dark)?;
    let classification = match &family {
        RulingFamily::Cylinder { direction, spread } => {
            json!({ "family": "cylinder", "direction": [direction.x, direction.y, direction.z], "spread": spread })
        }
        RulingFamily::Cone { apex, spread } => {
            let started = std::time::Instant::now();
            let h = apex_homogeneity(&quad, apex, a.seed)?;
            report.push(CheckEntry::new(
                "homogeneity",
                a.tol_homogeneity,
                &h,
                Some(a.seed),
                started,
            ));
            json!({ "family": "cone", "apex": [apex.x, apex.y, apex.z], "spread": spread })
        }
        RulingFamily::General {
            angular_spread,
            apex_spread,
        } => {
            json!({ "family": "general", "angular_spread": angular_spread, "apex_spread": apex_spread })
        }
    };
    println!("{}", family_line(&family));
    finish(
        "shadow",
        &report,
        Some(("classification", classification)),
        a.report.as_deref(),
    )
}

fn family_line(family: &RulingFamily) -> String {
    match family {
        RulingFamily::Cylinder { spread, .. } => {
            format!("family cylinder (angular spread {spread:.3e})")
        }
        RulingFamily::Cone { apex, .. } => format!(
            "family cone (apex {:.12} {:.12} {:.12})",
            apex.x, apex.y, apex.z
        ),
        RulingFamily::General { angular_spread, .. } => {
            format!("family general (angular spread {angular_spread:.3e})")
        }
    }
}

fn verify_implicit(a: VerifyImplicitArgs) -> Result<bool, CliError> {
    check_step(a.step)?;
    if a.samples == 0 || a.samples > 10_000_000 {
        return Err(CliError::Usage(format!(
            "--samples must be in 1..=10^7, got {}",
            a.samples
        )));
    }
    let opts = ImplicitOptions {
        samples: a.samples,
        seed: a.seed,
        step: a.step,
        surface_tol: a.tol_on_surface,
        curvature_tol: a.tol_curvature,
        ..ImplicitOptions::default()
    };
    let report = match (&a.example, &a.spec) {
        (Some(name), _) => ImplicitExample::from_name(name)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown example `{name}` (expected cubic or sphere)"
                ))
            })?
            .report(&opts)?,
        (None, Some(path)) => {
            let spec = parse_implicit_spec(&read(path)?).map_err(|source| CliError::Spec {
                path: path.clone(),
                source,
            })?;
            implicit_spec_report(&spec, &opts)?
        }
        (None, None) => return Err(CliError::Usage("give --example or --spec".into())),
    };
    finish("verify-implicit", &report, None, a.report.as_deref())
}

fn selftest_cmd(a: SelftestArgs) -> Result<bool, CliError> {
    let outcomes = selftest::run_all(a.seed);
    for o in &outcomes {
        println!("{}", o.line());
    }
    Ok(outcomes.iter().all(|o| o.pass))
}
