use std::io::{Read, Write};
use std::path::Path;

use super::IoError;

/// Fixed-schema CSV outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportKind {
    Interface,
    FinTemp,
    SolidFraction,
    Contour,
    FinExtrema,
    LossCurve,
    ValidateInterface,
    ValidateFin,
    ValidateFraction,
}

impl ExportKind {
    pub fn file_name(self) -> &'static str {
        match self {
            ExportKind::Interface => "interface.csv",
            ExportKind::FinTemp => "fin_temp.csv",
            ExportKind::SolidFraction => "solid_fraction.csv",
            ExportKind::Contour => "contour.csv",
            ExportKind::FinExtrema => "fin_extrema.csv",
            ExportKind::LossCurve => "loss_curve.csv",
            ExportKind::ValidateInterface => "validate_interface.csv",
            ExportKind::ValidateFin => "validate_fin_temp.csv",
            ExportKind::ValidateFraction => "validate_solid_fraction.csv",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            ExportKind::Interface => &["t_star", "x_star", "s_star", "P"],
            ExportKind::FinTemp => &["t_star", "x_star", "Tf_star", "P"],
            ExportKind::SolidFraction => &["t_star", "fraction", "P"],
            ExportKind::Contour => &["x_star", "y_star", "t_star", "P", "field", "value"],
            ExportKind::FinExtrema => &["P", "Tf_star_min", "Tf_star_max"],
            ExportKind::LossCurve => &["phase", "step", "weighted_total", "pde", "ic", "bc", "int"],
            ExportKind::ValidateInterface => &["t_star", "x_star", "P", "s_star_model", "s_star_oracle"],
            ExportKind::ValidateFin => &["t_star", "x_star", "P", "Tf_star_model", "Tf_star_oracle"],
            ExportKind::ValidateFraction => &["t_star", "P", "fraction_model", "fraction_oracle"],
        }
    }
}

/// One table cell. Numbers print in the shortest form that parses back to the same value,
/// independent of locale.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Num(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }

    fn parse(s: &str) -> Cell {
        match s.parse::<f64>() {
            Ok(v) if v.to_string() == s => Cell::Num(v),
            _ => Cell::Text(s.to_string()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExportTable {
    pub kind: ExportKind,
    pub rows: Vec<Vec<Cell>>,
}

impl ExportTable {
    pub fn new(kind: ExportKind) -> Self {
        ExportTable { kind, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<(), IoError> {
        if row.len() != self.kind.columns().len() {
            return Err(IoError::Schema(format!(
                "{} expects {} columns, got {}",
                self.kind.file_name(),
                self.kind.columns().len(),
                row.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Values of a numeric column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.kind.columns().iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[j].as_f64().unwrap_or(f64::NAN)).collect())
    }

    pub fn write<W: Write>(&self, out: W) -> Result<(), IoError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(self.kind.columns())?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, IoError> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        Ok(buf)
    }

    pub fn save(&self, dir: &Path) -> Result<std::path::PathBuf, IoError> {
        let path = dir.join(self.kind.file_name());
        std::fs::write(&path, self.to_bytes()?)?;
        Ok(path)
    }

    /// Read a table, checking the header against the schema of `kind`.
    pub fn read<R: Read>(kind: ExportKind, input: R) -> Result<Self, IoError> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header != kind.columns() {
            return Err(IoError::Schema(format!("{} header {:?} does not match {:?}", kind.file_name(), header, kind.columns())));
        }
        let mut t = ExportTable::new(kind);
        for rec in r.records() {
            let rec = rec?;
            t.push(rec.iter().map(Cell::parse).collect())?;
        }
        Ok(t)
    }
}
