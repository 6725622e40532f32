//! Minimal CSV output with shortest-roundtrip-safe `%.17g` floats.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::assembly::SystemKind;
use crate::error::{Error, Result};
use crate::evolution::Trajectory;

/// Formats like C's `printf("%.17g", x)`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mant = strip_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let digits = (16 - exp) as usize;
        strip_zeros(&format!("{x:.digits$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => fmt_g17(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::Dimension(format!(
                "row has {} cells, header {}",
                row.len(),
                self.header.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }
}

/// Energy history: `time, E_total, E_plate, E_kinetic, [E_eta, E_xi,] E_line1, E_line2`,
/// the boundary-control columns only for System 1.
pub fn energy_table(kind: SystemKind, traj: &Trajectory) -> Table {
    let controls = kind == SystemKind::System1;
    let mut header = vec!["time", "E_total", "E_plate", "E_kinetic"];
    if controls {
        header.extend(["E_eta", "E_xi"]);
    }
    header.extend(["E_line1", "E_line2"]);
    let mut table = Table::new(&header);
    for (t, e) in traj.times.iter().zip(&traj.energies) {
        let mut row: Vec<Cell> = vec![
            (*t).into(),
            e.total.into(),
            e.plate.into(),
            e.kinetic.into(),
        ];
        if controls {
            row.extend([e.boundary_eta.into(), e.boundary_xi.into()]);
        }
        row.extend([e.line1.into(), e.line2.into()]);
        table.rows.push(row);
    }
    table
}

pub const DESIGN_HEADER: [&str; 9] = [
    "lambda", "case", "mode", "tau1", "tau2", "k", "l", "drift", "residual",
];

/// Reads the named numeric columns of a CSV file with a header row.
pub fn read_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    parse_columns(&text, names)
}

pub fn parse_columns(text: &str, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::InvalidArgument("CSV input is empty".into()))?
        .split(',')
        .map(str::trim)
        .collect();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| {
            header
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| Error::InvalidArgument(format!("CSV input has no column '{n}'")))
        })
        .collect::<Result<_>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    for (lineno, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        for (c, &i) in idx.iter().enumerate() {
            let cell = cells.get(i).ok_or_else(|| {
                Error::InvalidArgument(format!("CSV row {} is too short", lineno + 2))
            })?;
            let v: f64 = cell.parse().map_err(|_| {
                Error::InvalidArgument(format!("CSV row {}: '{cell}' is not a number", lineno + 2))
            })?;
            cols[c].push(v);
        }
    }
    Ok(cols)
}
