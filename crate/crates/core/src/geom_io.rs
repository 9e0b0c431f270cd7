//! Text exporters: OBJ meshes, SVG development patterns, CSV tables and
//! JSON reports. Floating-point values in OBJ and CSV are written with 17
//! significant digits so that they read back bit for bit. All writers are
//! deterministic.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::development::{develop_point, DevelopedDirectrix};
use crate::error::Error;
use crate::numeric;
use crate::tangent_dev::SurfaceMesh;
use crate::verify::VerificationReport;

/// 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mesh3Doc {
    pub vertices: Vec<[f64; 3]>,
    /// 1-based vertex indices, three or four per face.
    pub faces: Vec<Vec<usize>>,
    /// Optional `(τ, s)` per vertex.
    pub provenance: Option<Vec<(f64, f64)>>,
}

impl Mesh3Doc {
    /// Quad faces over the `n_tau × n_s` grid.
    pub fn from_surface(mesh: &SurfaceMesh) -> Self {
        let vertices = mesh
            .vertices
            .iter()
            .map(|v| [v.position.x, v.position.y, v.position.z])
            .collect();
        let provenance = Some(mesh.vertices.iter().map(|v| (v.tau, v.s)).collect());
        Mesh3Doc {
            vertices,
            faces: grid_quads(mesh.n_tau, mesh.n_s),
            provenance,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(
                "mesh has non-finite coordinates".into(),
            ));
        }
        let n = self.vertices.len();
        for (k, f) in self.faces.iter().enumerate() {
            if f.len() < 3 {
                return Err(Error::InvalidInput(format!(
                    "face {k} has fewer than three vertices"
                )));
            }
            if let Some(bad) = f.iter().find(|&&i| i == 0 || i > n) {
                return Err(Error::InvalidInput(format!(
                    "face {k} references vertex {bad} of {n}"
                )));
            }
        }
        if let Some(p) = &self.provenance {
            if p.len() != n {
                return Err(Error::GridMismatch(
                    "provenance length differs from vertex count".into(),
                ));
            }
        }
        Ok(())
    }
}

/// 1-based quads of a row-major `rows × cols` vertex grid.
pub fn grid_quads(rows: usize, cols: usize) -> Vec<Vec<usize>> {
    let mut faces = Vec::with_capacity(rows.saturating_sub(1) * cols.saturating_sub(1));
    for i in 0..rows.saturating_sub(1) {
        for j in 0..cols.saturating_sub(1) {
            let a = i * cols + j + 1;
            faces.push(vec![a, a + 1, a + cols + 1, a + cols]);
        }
    }
    faces
}

pub fn export_obj(mesh: &Mesh3Doc) -> Result<String, Error> {
    mesh.validate()?;
    let mut out = String::from("# devsurf mesh\n");
    if mesh.provenance.is_some() {
        out.push_str("# vertex parameters follow as `# p tau s` after the faces\n");
    }
    for v in &mesh.vertices {
        let _ = writeln!(
            out,
            "v {} {} {}",
            fmt_f64(v[0]),
            fmt_f64(v[1]),
            fmt_f64(v[2])
        );
    }
    for f in &mesh.faces {
        out.push('f');
        for i in f {
            let _ = write!(out, " {i}");
        }
        out.push('\n');
    }
    if let Some(p) = &mesh.provenance {
        for (t, s) in p {
            let _ = writeln!(out, "# p {} {}", fmt_f64(*t), fmt_f64(*s));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Flat2Doc {
    pub directrix: Vec<[f64; 2]>,
    pub rulings: Vec<([f64; 2], [f64; 2])>,
}

impl Flat2Doc {
    /// Developed directrix at every sample plus one ruling segment per
    /// `τ` row of an `n_tau`-row grid over `s_range`.
    pub fn from_development(
        dev: &DevelopedDirectrix,
        n_tau: usize,
        s_range: (f64, f64),
    ) -> Result<Self, Error> {
        let directrix = dev.pd.iter().zip(&dev.qd).map(|(&p, &q)| [p, q]).collect();
        let (lo, hi) = dev.range();
        let rulings = numeric::linspace(lo, hi, n_tau)
            .into_iter()
            .map(|tau| {
                Ok((
                    develop_point(dev, tau, s_range.0)?,
                    develop_point(dev, tau, s_range.1)?,
                ))
            })
            .collect::<Result<Vec<_>, Error>>()?;
        Ok(Flat2Doc { directrix, rulings })
    }

    /// `[xmin, ymin, xmax, ymax]` over every point, or `None` when empty.
    pub fn bounding_box(&self) -> Option<[f64; 4]> {
        let pts = self
            .directrix
            .iter()
            .chain(self.rulings.iter().flat_map(|(a, b)| [a, b]));
        pts.fold(None, |acc, p| {
            Some(match acc {
                None => [p[0], p[1], p[0], p[1]],
                Some([x0, y0, x1, y1]) => [x0.min(p[0]), y0.min(p[1]), x1.max(p[0]), y1.max(p[1])],
            })
        })
    }

    pub fn validate(&self) -> Result<(), Error> {
        let finite = |p: &[f64; 2]| p[0].is_finite() && p[1].is_finite();
        if !self.directrix.iter().all(finite)
            || !self.rulings.iter().all(|(a, b)| finite(a) && finite(b))
        {
            return Err(Error::InvalidInput(
                "development has non-finite coordinates".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    pub directrix_color: &'static str,
    pub ruling_color: &'static str,
    /// Padding as a fraction of the larger bounding-box side.
    pub padding: f64,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            directrix_color: "#1f4e99",
            ruling_color: "#9a9a9a",
            padding: 0.05,
        }
    }
}

pub fn export_svg(flat: &Flat2Doc, style: &SvgStyle) -> Result<String, Error> {
    flat.validate()?;
    let [x0, y0, x1, y1] = flat.bounding_box().unwrap_or([0.0, 0.0, 1.0, 1.0]);
    let side = (x1 - x0).max(y1 - y0);
    let pad = if side > 0.0 {
        side * style.padding
    } else {
        1.0
    };
    // SVG's y axis points down: every y is negated
    let (vx, vy) = (x0 - pad, -y1 - pad);
    let (vw, vh) = (x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vx} {vy} {vw} {vh}">"#
    );
    let _ = writeln!(out, "<desc>Developed surface. Coordinates are (T, -U): the U axis is flipped because SVG y points down.</desc>");
    let _ = writeln!(
        out,
        r#"<g stroke="{}" stroke-width="1" vector-effect="non-scaling-stroke">"#,
        style.ruling_color
    );
    for (a, b) in &flat.rulings {
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" vector-effect="non-scaling-stroke"/>"#,
            a[0], -a[1], b[0], -b[1]
        );
    }
    out.push_str("</g>\n");
    if !flat.directrix.is_empty() {
        let mut d = String::new();
        for (i, p) in flat.directrix.iter().enumerate() {
            let _ = write!(d, "{}{},{}", if i == 0 { "M" } else { " L" }, p[0], -p[1]);
        }
        let _ = writeln!(
            out,
            r#"<path d="{d}" fill="none" stroke="{}" stroke-width="2" vector-effect="non-scaling-stroke"/>"#,
            style.directrix_color
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Named columns of equal length.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<(String, Vec<f64>)>,
}

impl Table {
    pub fn new() -> Self {
        Table::default()
    }

    pub fn column(mut self, name: impl Into<String>, values: Vec<f64>) -> Self {
        self.columns.push((name.into(), values));
        self
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.1.len())
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

pub fn export_csv(table: &Table) -> Result<String, Error> {
    let rows = table.rows();
    if let Some((name, _)) = table.columns.iter().find(|c| c.1.len() != rows) {
        return Err(Error::GridMismatch(format!(
            "column `{name}` length differs from the first column"
        )));
    }
    if let Some((name, _)) = table
        .columns
        .iter()
        .find(|c| c.1.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::InvalidInput(format!(
            "column `{name}` has non-finite values"
        )));
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(table.columns.iter().map(|c| c.0.as_str()))
        .map_err(csv_error)?;
    for i in 0..rows {
        w.write_record(table.columns.iter().map(|c| fmt_f64(c.1[i])))
            .map_err(csv_error)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Parse a table written by [`export_csv`].
pub fn parse_csv(text: &str) -> Result<Table, Error> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let names: Vec<String> = r
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    if names.is_empty() {
        return Err(Error::InvalidInput("csv has no header row".into()));
    }
    let mut columns: Vec<(String, Vec<f64>)> = names.into_iter().map(|n| (n, Vec::new())).collect();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        if rec.len() != columns.len() {
            return Err(Error::InvalidInput(format!(
                "row {} has {} fields, expected {}",
                row + 1,
                rec.len(),
                columns.len()
            )));
        }
        for (k, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "row {}, column {}: `{field}` is not a finite number",
                        row + 1,
                        k + 1
                    ))
                })?;
            columns[k].1.push(v);
        }
    }
    Ok(Table { columns })
}

/// Report document `{"command": .., "checks": [..], "classification": ..}`.
pub fn report_json(
    command: &str,
    report: &VerificationReport,
    extra: Option<(&str, Value)>,
) -> String {
    let mut doc = json!({
        "command": command,
        "checks": report.checks,
    });
    if let Some((key, value)) = extra {
        doc[key] = value;
    }
    let mut s = serde_json::to_string_pretty(&doc).expect("report values always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_lines(s: &str, prefix: &str) -> usize {
        s.lines().filter(|l| l.starts_with(prefix)).count()
    }

    #[test]
    fn unit_quad_obj() {
        let m = Mesh3Doc {
            vertices: vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [1.0, 1.0, 0.0],
                [0.0, 1.0, 0.0],
            ],
            faces: vec![vec![1, 2, 3, 4]],
            provenance: None,
        };
        let s = export_obj(&m).unwrap();
        assert_eq!(s.lines().filter(|l| !l.starts_with('#')).count(), 5);
        assert!(s.contains("v 1.0000000000000000e0 0.0000000000000000e0 0.0000000000000000e0\n"));
        assert!(s.ends_with("f 1 2 3 4\n"));
    }

    #[test]
    fn empty_obj_is_header_only() {
        let s = export_obj(&Mesh3Doc::default()).unwrap();
        assert!(s.lines().all(|l| l.starts_with('#')));
    }

    #[test]
    fn invalid_meshes_are_rejected() {
        let m = Mesh3Doc {
            vertices: vec![[0.0; 3]; 3],
            faces: vec![vec![1, 2, 4]],
            provenance: None,
        };
        assert!(export_obj(&m).is_err());
        let m = Mesh3Doc {
            vertices: vec![[f64::NAN, 0.0, 0.0]],
            faces: vec![],
            provenance: None,
        };
        assert!(export_obj(&m).is_err());
    }

    #[test]
    fn grid_quads_count() {
        let f = grid_quads(100, 20);
        assert_eq!(f.len(), 99 * 19);
        assert_eq!(f[0], vec![1, 2, 22, 21]);
        assert_eq!(*f.last().unwrap(), vec![1979, 1980, 2000, 1999]);
    }

    #[test]
    fn svg_structure() {
        let one = Flat2Doc {
            directrix: vec![],
            rulings: vec![([0.0, 0.0], [1.0, 2.0])],
        };
        let s = export_svg(&one, &SvgStyle::default()).unwrap();
        assert_eq!(count_lines(&s, "<line"), 1);
        assert_eq!(count_lines(&s, "<path"), 0);
        assert!(s.contains(r#"y2="-2""#));
        let path_only = Flat2Doc {
            directrix: vec![[0.0, 0.0], [1.0, 1.0]],
            rulings: vec![],
        };
        let s = export_svg(&path_only, &SvgStyle::default()).unwrap();
        assert_eq!(count_lines(&s, "<line"), 0);
        assert_eq!(count_lines(&s, "<path"), 1);
        assert!(s.contains(r#"viewBox="-0.05 -1.05 1.1 1.1""#), "{s}");
        assert!(s.contains("<desc>"));
    }

    #[test]
    fn csv_round_trip_is_bitwise() {
        let vals = vec![0.1, -1.0 / 3.0, 1e-300, f64::MAX, 5e-324, -0.0];
        let t = Table::new()
            .column("tau", vals.clone())
            .column("omega", vals.iter().map(|v| v * 0.5).collect());
        let s = export_csv(&t).unwrap();
        assert_eq!(s.lines().next(), Some("tau,omega"));
        assert!(!s.contains('\r'));
        let back = parse_csv(&s).unwrap();
        for (a, b) in t.columns.iter().zip(&back.columns) {
            assert_eq!(a.0, b.0);
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&a.1), bits(&b.1));
        }
        let one = export_csv(&Table::new().column("x", vec![1.5])).unwrap();
        assert_eq!(one.lines().count(), 2);
    }

    #[test]
    fn ragged_and_garbled_tables() {
        let t = Table::new()
            .column("a", vec![1.0, 2.0])
            .column("b", vec![1.0]);
        assert!(matches!(export_csv(&t), Err(Error::GridMismatch(_))));
        assert!(parse_csv("a,b\n1,x\n").is_err());
        assert!(parse_csv("a,b\n1\n").is_err());
        assert!(parse_csv("").is_err());
        let nan = Table::new().column("a", vec![f64::NAN]);
        assert!(export_csv(&nan).is_err());
        assert!(parse_csv("a\nNaN\n").is_err());
        assert!(parse_csv("a\ninf\n").is_err());
    }
}
