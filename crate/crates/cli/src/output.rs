//! Deterministic artifact writers: CSV at 17 significant digits, pretty JSON
//! with fixed key order, SVG text.

use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use su11::io::fmt_f64;
use su11::linalg::CMat;

use crate::error::CliError;

/// Output directory that records every file it writes.
pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|source| CliError::Output { path: root.display().to_string(), source })?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.path(name);
        std::fs::write(&path, body).map_err(|source| CliError::Output { path: path.display().to_string(), source })?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut body = serde_json::to_string_pretty(value)?;
        body.push('\n');
        self.text(name, &body)
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        self.text(name, &table.render())
    }
}

/// One CSV cell.
pub enum Cell {
    Num(f64),
    Int(usize),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => fmt_f64(*v),
                    Cell::Int(i) => i.to_string(),
                    Cell::Empty => String::new(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Complex matrix as `{rows, cols, data: [[[re, im], ...], ...]}`.
pub fn matrix_json(m: &CMat) -> Value {
    let data: Vec<Vec<[f64; 2]>> =
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
    json!({ "rows": m.nrows(), "cols": m.ncols(), "data": data })
}

pub fn modulus(m: &CMat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].norm()).collect()).collect()
}

pub fn phase(m: &CMat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].arg()).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_seventeen_digits_and_newlines() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![0.1.into(), 3usize.into(), Cell::Empty]);
        assert_eq!(t.render(), "a,b,c\n1.0000000000000001e-1,3,\n");
    }
}
