//! Field output: CSV with 17 significant digits, legacy VTK structured
//! points, diagonal slices and report tables.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::diagnostics::FieldReport;
use crate::eos::{eval_thermo, MixtureEOS};
use crate::error::{Result, SolverError};
use crate::state::{mach_numbers, Field, Grid, State};

/// Column names of the field CSV.
pub const FIELD_COLUMNS: [&str; 14] = [
    "x", "y", "alpha1", "rho1", "rho2", "v1x", "v1y", "v2x", "v2y", "wx", "wy", "T", "p_mix", "M_mix",
];

/// Output columns for one cell.
pub fn field_row(q: &State, x: [f64; 2], eos: &MixtureEOS) -> Result<[f64; 14]> {
    let p = q.to_primitives(eos)?;
    let th = eval_thermo(q.alpha1, p.rho1, p.rho2, p.t, eos)?;
    let m = mach_numbers(q.alpha1, &p, eos)?;
    Ok([
        x[0], x[1], q.alpha1, p.rho1, p.rho2, p.v1[0], p.v1[1], p.v2[0], p.v2[1], q.w[0], q.w[1], p.t, th.p_mix, m.mix,
    ])
}

fn write_row(w: &mut impl Write, row: &[f64]) -> std::io::Result<()> {
    for (k, v) in row.iter().enumerate() {
        if k > 0 {
            w.write_all(b",")?;
        }
        write!(w, "{v:.16e}")?;
    }
    w.write_all(b"\n")
}

/// One row per interior cell in row-major order.
pub fn write_field_csv(f: &Field, eos: &MixtureEOS, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", FIELD_COLUMNS.join(","))?;
    for (i, j) in f.grid.interior() {
        write_row(&mut w, &field_row(f.at(i, j), f.grid.centre(i, j), eos)?)?;
    }
    w.flush()?;
    Ok(())
}

/// Parsed field CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTable {
    pub rows: Vec<[f64; 14]>,
}

impl FieldTable {
    /// Rebuild conserved states on `grid` from the primitive columns.
    pub fn to_field(&self, grid: &Grid, eos: &MixtureEOS) -> Result<Field> {
        if self.rows.len() != grid.interior_len() {
            return Err(SolverError::Parse(format!(
                "{} rows for a grid with {} cells",
                self.rows.len(),
                grid.interior_len()
            )));
        }
        let mut f = Field::zeros(grid);
        for ((i, j), r) in grid.interior().zip(&self.rows) {
            *f.at_mut(i, j) = State::from_phase_velocities(r[2], r[3], r[4], [r[5], r[6]], [r[7], r[8]], r[11], eos)?;
        }
        Ok(f)
    }
}

pub fn read_field_csv(path: &Path) -> Result<FieldTable> {
    let rd = BufReader::new(File::open(path)?);
    let mut lines = rd.lines();
    let header = lines.next().ok_or_else(|| SolverError::Parse("empty file".into()))??;
    if header.trim() != FIELD_COLUMNS.join(",") {
        return Err(SolverError::Parse(format!("unexpected header '{header}'")));
    }
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut row = [0.0; 14];
        let mut n = 0;
        for (k, tok) in line.split(',').enumerate() {
            if k >= 14 {
                return Err(SolverError::Parse(format!("line {}: too many columns", ln + 2)));
            }
            row[k] = tok
                .trim()
                .parse()
                .map_err(|e| SolverError::Parse(format!("line {}: {e}", ln + 2)))?;
            n += 1;
        }
        if n != 14 {
            return Err(SolverError::Parse(format!("line {}: {n} columns", ln + 2)));
        }
        rows.push(row);
    }
    Ok(FieldTable { rows })
}

/// Legacy ASCII VTK structured points with cell data.
pub fn write_vtk(f: &Field, eos: &MixtureEOS, path: &Path) -> Result<()> {
    let g = &f.grid;
    let mut rows = Vec::with_capacity(g.interior_len());
    for (i, j) in g.interior() {
        rows.push(field_row(f.at(i, j), g.centre(i, j), eos)?);
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "rsimex field")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_POINTS")?;
    writeln!(w, "DIMENSIONS {} {} 1", g.nx + 1, g.ny + 1)?;
    writeln!(w, "ORIGIN {:.16e} {:.16e} 0", g.x0, g.y0)?;
    writeln!(w, "SPACING {:.16e} {:.16e} 1", g.dx, g.dy)?;
    writeln!(w, "CELL_DATA {}", rows.len())?;
    for (c, name) in [(2, "alpha1"), (3, "rho1"), (4, "rho2"), (11, "T"), (12, "p_mix"), (13, "M_mix")] {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for r in &rows {
            writeln!(w, "{:.16e}", r[c])?;
        }
    }
    for (c, name) in [(5, "v1"), (7, "v2"), (9, "w")] {
        writeln!(w, "VECTORS {name} double")?;
        for r in &rows {
            writeln!(w, "{:.16e} {:.16e} 0", r[c], r[c + 1])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Cells `(i, i)` of a square grid with their distance from the lower-left corner.
pub fn diagonal_slice(f: &Field) -> Result<Vec<(f64, State)>> {
    let g = &f.grid;
    if g.nx != g.ny || g.dims() != 2 {
        return Err(SolverError::Config("diagonal slice needs a square 2D grid".into()));
    }
    Ok((0..g.nx)
        .map(|i| {
            let c = g.centre(i, i);
            ((c[0] - g.x0).hypot(c[1] - g.y0), *f.at(i, i))
        })
        .collect())
}

/// Diagonal slice as CSV: `s` followed by the field columns.
pub fn write_diagonal_csv(f: &Field, eos: &MixtureEOS, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "s,{}", FIELD_COLUMNS.join(","))?;
    for (k, (s, q)) in diagonal_slice(f)?.into_iter().enumerate() {
        let mut row = vec![s];
        row.extend(field_row(&q, f.grid.centre(k, k), eos)?);
        write_row(&mut w, &row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_reports_csv(reports: &[FieldReport], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", FieldReport::csv_header())?;
    for r in reports {
        writeln!(w, "{}", r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}
