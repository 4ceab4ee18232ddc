use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use phasefield::fem::StructuredGrid;
use phasefield::State;

use crate::error::BenchError;

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV file whose rows are flushed as soon as they are written.
pub struct CsvSink {
    w: csv::Writer<File>,
}

impl CsvSink {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self, BenchError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(header)?;
        w.flush().map_err(|e| BenchError::Io(path.to_path_buf(), e))?;
        Ok(CsvSink { w })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<(), BenchError> {
        self.w.write_record(fields)?;
        self.w.flush().map_err(|e| BenchError::Io("csv".into(), e))?;
        Ok(())
    }
}

pub const FORCE_HEADER: [&str; 3] = ["step", "load_mm", "force_kN"];
pub const STATS_HEADER: [&str; 7] =
    ["step", "iterations", "walltime_s", "final_stationarity", "truncated_dofs", "dofs", "status"];

/// Legacy ASCII VTK unstructured grid with point data `damage` and
/// `displacement`.
pub fn write_vtk(path: &Path, grid: &StructuredGrid, state: &State, title: &str) -> Result<(), BenchError> {
    let io = |e| BenchError::Io(path.to_path_buf(), e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    let nv = grid.num_vertices();
    let nc = grid.num_cells();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    s.push_str(&title.replace('\n', " "));
    s.push_str("\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    s.push_str(&format!("POINTS {nv} double\n"));
    for v in 0..nv {
        let [x, y] = grid.vertex_coords(v);
        s.push_str(&format!("{} {} 0\n", fmt_f64(x), fmt_f64(y)));
    }
    s.push_str(&format!("CELLS {nc} {}\n", 5 * nc));
    for c in 0..nc {
        let [a, b, cc, d] = grid.cell_vertices(c);
        s.push_str(&format!("4 {a} {b} {d} {cc}\n"));
    }
    s.push_str(&format!("CELL_TYPES {nc}\n"));
    for _ in 0..nc {
        s.push_str("9\n");
    }
    s.push_str(&format!("POINT_DATA {nv}\nSCALARS damage double 1\nLOOKUP_TABLE default\n"));
    for v in 0..nv {
        s.push_str(&fmt_f64(state.d(v)));
        s.push('\n');
    }
    s.push_str("VECTORS displacement double\n");
    for v in 0..nv {
        let [ux, uy] = state.u(v);
        s.push_str(&format!("{} {} 0\n", fmt_f64(ux), fmt_f64(uy)));
    }
    w.write_all(s.as_bytes()).map_err(io)?;
    w.flush().map_err(io)
}
