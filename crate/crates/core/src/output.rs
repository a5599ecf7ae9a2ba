//! Field dumps (CSV and legacy VTK), step history and result tables.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::basis::TensorBasis2D;
use crate::error::{Error, Result};
use crate::field::NodalField;
use crate::mesh::QuadMesh;
use crate::runner::RunReport;

/// Nodal values, one row per node:
/// `cell_id,level,x,y,node_i,<var names>`.
pub fn write_field_csv(
    path: &Path,
    mesh: &QuadMesh,
    basis: &TensorBasis2D,
    field: &NodalField,
    var_names: &[&str],
) -> Result<()> {
    field.check_mesh(mesh)?;
    let io = |e| Error::io(path, e);
    let mut f = BufWriter::new(std::fs::File::create(path).map_err(io)?);
    let mut line = String::from("cell_id,level,x,y,node_i");
    for n in &var_names[..field.n_vars()] {
        line.push(',');
        line.push_str(n);
    }
    writeln!(f, "{line}").map_err(io)?;
    for (ci, cell) in mesh.cells().iter().enumerate() {
        for i in 0..basis.n_nodes() {
            let x = cell.map(basis.node(i));
            line.clear();
            let _ = write!(line, "{ci},{},{:?},{:?},{i}", cell.level(), x[0], x[1]);
            for v in 0..field.n_vars() {
                let _ = write!(line, ",{:?}", field.get(ci, i, v));
            }
            writeln!(f, "{line}").map_err(io)?;
        }
    }
    f.flush().map_err(io)
}

/// Read back a field written by [`write_field_csv`] on the same mesh.
pub fn read_field_csv(path: &Path, mesh: &QuadMesh, degree: usize) -> Result<NodalField> {
    let io = |e| Error::io(path, e);
    let reader = BufReader::new(std::fs::File::open(path).map_err(io)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidInput(format!("{}: empty file", path.display())))?
        .map_err(io)?;
    let n_vars = header.split(',').count().saturating_sub(5);
    if n_vars == 0 || n_vars > crate::models::MAX_VARS {
        return Err(Error::InvalidInput(format!("{}: bad header `{header}`", path.display())));
    }
    let npc = (degree + 1) * (degree + 1);
    let mut data = Vec::with_capacity(mesh.n_cells() * npc * n_vars);
    for (row, line) in lines.enumerate() {
        let line = line.map_err(io)?;
        let cols: Vec<&str> = line.split(',').collect();
        let bad = || Error::InvalidInput(format!("{}: malformed row {}", path.display(), row + 2));
        if cols.len() != n_vars + 5 {
            return Err(bad());
        }
        let cell: usize = cols[0].parse().map_err(|_| bad())?;
        let node: usize = cols[4].parse().map_err(|_| bad())?;
        if cell != row / npc || node != row % npc {
            return Err(bad());
        }
        for c in &cols[5..] {
            data.push(c.parse::<f64>().map_err(|_| bad())?);
        }
    }
    if data.len() != mesh.n_cells() * npc * n_vars {
        return Err(Error::MeshMismatch(format!(
            "{}: {} values for {} cells",
            path.display(),
            data.len(),
            mesh.n_cells()
        )));
    }
    Ok(NodalField::from_parts(mesh, degree, n_vars, data))
}

/// Legacy ASCII VTK unstructured grid; each cell is split into `k x k`
/// quads between its nodes, values are point data.
pub fn write_field_vtk(
    path: &Path,
    mesh: &QuadMesh,
    basis: &TensorBasis2D,
    field: &NodalField,
    var_names: &[&str],
) -> Result<()> {
    field.check_mesh(mesh)?;
    let k = basis.degree().max(1);
    let n1 = basis.n1();
    let npc = basis.n_nodes();
    let io = |e| Error::io(path, e);
    let mut f = BufWriter::new(std::fs::File::create(path).map_err(io)?);
    let n_pts = mesh.n_cells() * npc;
    let n_sub = if basis.degree() == 0 { 0 } else { mesh.n_cells() * k * k };
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\ndgfilter field\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {n_pts} double");
    for cell in mesh.cells() {
        for i in 0..npc {
            let x = cell.map(basis.node(i));
            let _ = writeln!(s, "{:?} {:?} 0", x[0], x[1]);
        }
    }
    let _ = writeln!(s, "CELLS {n_sub} {}", 5 * n_sub);
    if n_sub > 0 {
        for ci in 0..mesh.n_cells() {
            let base = ci * npc;
            for b in 0..k {
                for a in 0..k {
                    let p = |a: usize, b: usize| base + a + n1 * b;
                    let _ = writeln!(s, "4 {} {} {} {}", p(a, b), p(a + 1, b), p(a + 1, b + 1), p(a, b + 1));
                }
            }
        }
    }
    let _ = writeln!(s, "CELL_TYPES {n_sub}");
    for _ in 0..n_sub {
        s.push_str("9\n");
    }
    let _ = writeln!(s, "POINT_DATA {n_pts}");
    for v in 0..field.n_vars() {
        let _ = writeln!(s, "SCALARS {} double 1\nLOOKUP_TABLE default", var_names[v]);
        for ci in 0..mesh.n_cells() {
            for i in 0..npc {
                let _ = writeln!(s, "{:?}", field.get(ci, i, v));
            }
        }
    }
    f.write_all(s.as_bytes()).map_err(io)?;
    f.flush().map_err(io)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub n_cells: usize,
    pub min: f64,
    pub max: f64,
    pub mass_drift: f64,
}

pub fn write_history(path: &Path, rows: &[HistoryRow]) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut f = BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(f, "step,t,dt,n_cells,min,max,mass_drift").map_err(io)?;
    for r in rows {
        writeln!(
            f,
            "{},{:?},{:?},{},{:?},{:?},{:?}",
            r.step, r.t, r.dt, r.n_cells, r.min, r.max, r.mass_drift
        )
        .map_err(io)?;
    }
    f.flush().map_err(io)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableStyle {
    /// Error norms with observed rates.
    Errors,
    /// Extrema over the run and mass drift.
    Extrema,
}

/// Aligned text table over a refinement sequence; rates compare each row
/// with the previous one and use `sqrt` of the cell-count ratio as the mesh
/// factor.
pub fn emit_table(reports: &[RunReport], style: TableStyle) -> String {
    let mut rows: Vec<Vec<String>> = Vec::new();
    let sci = |v: f64| format!("{v:.3e}");
    match style {
        TableStyle::Errors => {
            rows.push(
                ["N_el", "L1", "rate", "L2", "rate", "Linf", "rate"]
                    .map(String::from)
                    .to_vec(),
            );
            for (i, r) in reports.iter().enumerate() {
                let mut row = vec![r.n_cells.to_string()];
                let prev = if i > 0 { reports[i - 1].error } else { None };
                match r.error {
                    None => row.extend(std::iter::repeat("—".to_string()).take(6)),
                    Some(e) => {
                        let pick = [e.l1_rel, e.l2_rel, e.linf_rel];
                        for (j, v) in pick.iter().enumerate() {
                            row.push(sci(*v));
                            let rate = prev.and_then(|p| {
                                let pv = [p.l1_rel, p.l2_rel, p.linf_rel][j];
                                let factor = (r.n_cells as f64 / reports[i - 1].n_cells as f64).sqrt();
                                (pv > 0.0 && *v > 0.0 && factor > 1.0)
                                    .then(|| (pv / v).ln() / factor.ln())
                            });
                            row.push(rate.map_or("—".to_string(), |x| format!("{x:.2}")));
                        }
                    }
                }
                rows.push(row);
            }
        }
        TableStyle::Extrema => {
            rows.push(["N_el", "min", "max", "mass drift"].map(String::from).to_vec());
            for r in reports {
                rows.push(vec![
                    r.n_cells.to_string(),
                    format!("{:.6}", r.run_min),
                    format!("{:.6}", r.run_max),
                    sci(r.mass_drift),
                ]);
            }
        }
    }
    let ncol = rows[0].len();
    let widths: Vec<usize> = (0..ncol)
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (ri, r) in rows.iter().enumerate() {
        let cells: Vec<String> = r
            .iter()
            .zip(&widths)
            .map(|(v, w)| format!("{v:>w$}", w = *w))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
        if ri == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            out.push_str(&rule.join("  "));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Rect;
    use crate::reference::ErrorReport;

    fn setup() -> (QuadMesh, TensorBasis2D, NodalField) {
        let mesh = QuadMesh::build_uniform(3, 2, Rect::square(0.0, 1.0)).unwrap();
        let b = TensorBasis2D::new(2);
        let f = NodalField::interpolate(&mesh, &b, 2, |x| [x[0].sin() / 3.0, 1e-300 * x[1], 0.0, 0.0]);
        (mesh, b, f)
    }

    #[test]
    fn csv_round_trip_is_bitwise() {
        let (mesh, b, f) = setup();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        write_field_csv(&p, &mesh, &b, &f, &["u", "w"]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("cell_id,level,x,y,node_i,u,w\n"));
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().count(), 1 + 6 * 9);
        let back = read_field_csv(&p, &mesh, 2).unwrap();
        assert_eq!(back.values(), f.values());
        let other = QuadMesh::build_uniform(2, 2, Rect::square(0.0, 1.0)).unwrap();
        assert!(read_field_csv(&p, &other, 2).is_err());
    }

    #[test]
    fn vtk_layout() {
        let (mesh, b, f) = setup();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.vtk");
        write_field_vtk(&p, &mesh, &b, &f, &["u", "w"]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0\n"));
        assert!(text.contains("POINTS 54 double"));
        assert!(text.contains("CELLS 24 120"));
        assert!(text.contains("CELL_TYPES 24"));
        assert!(text.contains("SCALARS w double 1"));
    }

    fn report(n: usize, l1: f64) -> RunReport {
        RunReport {
            n_cells: n,
            error: Some(ErrorReport {
                l1_rel: l1,
                l2_rel: l1,
                linf_rel: l1,
                ..Default::default()
            }),
            ..RunReport::empty()
        }
    }

    #[test]
    fn table_rates() {
        let t = emit_table(&[report(400, 8e-3), report(1600, 2e-3)], TableStyle::Errors);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].contains("N_el") && lines[0].contains("Linf"));
        assert_eq!(lines[2].matches('—').count(), 3);
        assert_eq!(lines[3].split_whitespace().filter(|t| *t == "2.00").count(), 3);
        let w: Vec<usize> = lines.iter().map(|l| l.chars().count()).collect();
        assert!(w.iter().all(|&x| x == w[1]));
        let e = emit_table(&[report(400, 1.0)], TableStyle::Extrema);
        assert!(e.contains("mass drift"));
    }
}
