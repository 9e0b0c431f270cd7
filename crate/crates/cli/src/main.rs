//! `devsurf`: build tangent developables and shadow surfaces, unfold them,
//! and certify developability from the command line.
//!
//! Exit status is 0 when every check passes, 1 when a check fails (any
//! report is still written) and 2 for usage or input errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use devsurf_core::verify::DEFAULT_SEED;

#[derive(Debug, Parser)]
#[command(
    name = "devsurf",
    version,
    about = "Developable surfaces: construction, unfolding and verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tangent developable of a curve spec as an OBJ mesh.
    Surface(SurfaceArgs),
    /// Develop a curve's tangent developable into the plane: SVG pattern,
    /// angle table and isometry report.
    Unfold(UnfoldArgs),
    /// Six-function frame conditions for a curve spec.
    Sextet(SextetArgs),
    /// Surface through two parallel sections: OBJ mesh and classification.
    Shadow(ShadowArgs),
    /// Curvature certificate for an implicit surface.
    VerifyImplicit(VerifyImplicitArgs),
    /// Run the acceptance suite and print one PASS/FAIL line per criterion.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
struct SurfaceArgs {
    /// Curve spec (JSON).
    #[arg(short, long)]
    spec: PathBuf,
    /// OBJ output path.
    #[arg(short, long)]
    out: PathBuf,
    /// Mesh vertices along τ and along the rulings.
    #[arg(long, default_value = "100x20", value_parser = parse_grid)]
    grid: (usize, usize),
    /// Ruling distances covered, `lo:hi` with `0 < lo`.
    #[arg(long, default_value = "0.5:2", value_parser = parse_range)]
    s_range: (f64, f64),
}

#[derive(Debug, Args)]
struct UnfoldArgs {
    /// Curve spec (JSON).
    #[arg(short, long)]
    spec: PathBuf,
    /// SVG output path.
    #[arg(short, long)]
    out: PathBuf,
    /// CSV of `tau, zeta, theta, omega`; defaults to the SVG path with a
    /// `.csv` extension.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON report path.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Rulings drawn and isometry lattice: `τ` stations by `s` stations.
    #[arg(long, default_value = "100x10", value_parser = parse_grid)]
    grid: (usize, usize),
    #[arg(long, default_value = "0.5:2", value_parser = parse_range)]
    s_range: (f64, f64),
    /// Side length of the isometry triangles.
    #[arg(long, default_value_t = 1e-4)]
    step: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol_isometry: f64,
}

#[derive(Debug, Args)]
struct SextetArgs {
    /// Curve spec (JSON).
    #[arg(short, long)]
    spec: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Step of the differential identities, rounded to whole grid cells.
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Tolerance of the pointwise algebraic identities.
    #[arg(long, default_value_t = 1e-12)]
    tol_algebraic: f64,
    #[arg(long, default_value_t = 1e-5)]
    tol_differential: f64,
    #[arg(long, default_value_t = 1e-5)]
    tol_tangent_relation: f64,
}

#[derive(Debug, Args)]
struct ShadowArgs {
    /// Two section specs (JSON): the luminous section, then the opaque one.
    #[arg(short, long, num_args = 1, required = true)]
    spec: Vec<PathBuf>,
    /// Distance between the section planes; overrides the second spec's
    /// offset.
    #[arg(long)]
    gap: Option<f64>,
    /// OBJ output path.
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Mesh vertices along the slope parameter and along the axis.
    #[arg(long, default_value = "100x10", value_parser = parse_grid)]
    grid: (usize, usize),
    #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol_condition: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol_homogeneity: f64,
}

#[derive(Debug, Args)]
struct VerifyImplicitArgs {
    /// Built-in surface: `cubic` or `sphere`.
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    example: Option<String>,
    /// Implicit surface spec (JSON).
    #[arg(short, long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
    seed: u64,
    /// Central-difference step for gradient and Hessian.
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol_on_surface: f64,
    #[arg(long, default_value_t = 1e-5)]
    tol_curvature: f64,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
    seed: u64,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected AxB, got `{s}`"))?;
    let n = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    let (a, b) = (n(a)?, n(b)?);
    if a < 2 || b < 2 {
        return Err(format!("grid {a}x{b} needs at least 2 stations each way"));
    }
    if a.saturating_mul(b) > 10_000_000 {
        return Err(format!("grid {a}x{b} exceeds 10^7 vertices"));
    }
    Ok((a, b))
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let n = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    let (lo, hi) = (n(a)?, n(b)?);
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(format!("need finite lo < hi, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
        None => s.replace('_', "").parse(),
    };
    r.map_err(|e| format!("`{s}`: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("devsurf: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn knob_parsers() {
        assert_eq!(parse_grid("200x20"), Ok((200, 20)));
        assert!(parse_grid("1x5").is_err());
        assert!(parse_grid("200").is_err());
        assert!(parse_grid("100000x1000").is_err());
        assert_eq!(parse_range("0.5:2"), Ok((0.5, 2.0)));
        assert!(parse_range("2:1").is_err());
        assert_eq!(parse_seed("0x1_0000"), Ok(65536));
        assert_eq!(parse_seed("17"), Ok(17));
        assert!(parse_seed("0xzz").is_err());
    }
}
