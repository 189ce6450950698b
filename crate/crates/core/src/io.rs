//! Grid and cell-set files.
//!
//! Grids are JSON `{dim, root_level, resolution_m, values}` or CSV (one
//! column in 1D, a square matrix in 2D with rows along axis 0). Cell sets are
//! JSON `{dim, level, resolution, cells}` or a raster of `0`/`1` characters.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::choquet::GridFunction;
use crate::content::CellSet;
use crate::error::{Error, Result};
use crate::geometry::{BaseDomain, DyadicCube};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    /// Guess from a file extension; JSON unless it says otherwise.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFile {
    pub dim: usize,
    #[serde(default)]
    pub root_level: i32,
    pub resolution_m: u32,
    pub values: Vec<f64>,
}

impl GridFile {
    pub fn from_grid(f: &GridFunction) -> Self {
        Self {
            dim: f.domain.dim,
            root_level: f.domain.root.level,
            resolution_m: f.domain.resolution,
            values: f.values.clone(),
        }
    }

    pub fn into_grid(self) -> Result<GridFunction> {
        if self.dim == 0 {
            return Err(Error::Format("dim must be at least 1".into()));
        }
        let domain = BaseDomain::new(DyadicCube::origin(self.dim, self.root_level), self.resolution_m)?;
        GridFunction::new(domain, self.values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSetFile {
    pub dim: usize,
    /// Level of the root cube.
    #[serde(default)]
    pub level: i32,
    pub resolution: u32,
    pub cells: Vec<usize>,
}

/// `log2(len)` when `len` is a power of two.
fn exact_log2(len: usize, what: &str) -> Result<u32> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Format(format!("{what} must be a power of two, got {len}")));
    }
    Ok(len.trailing_zeros())
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.trim()
        .parse::<f64>()
        .map_err(|_| Error::Format(format!("line {line}: cannot parse {:?} as a number", tok.trim())))
}

pub fn grid_from_csv(text: &str) -> Result<GridFunction> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| l.split(',').map(|t| parse_f64(t, i + 1)).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    if rows.is_empty() {
        return Err(Error::Format("empty grid file".into()));
    }
    if rows.iter().all(|r| r.len() == 1) {
        let m = exact_log2(rows.len(), "number of cells per side")?;
        let values = rows.into_iter().map(|r| r[0]).collect();
        return GridFunction::new(BaseDomain::unit(1, m)?, values);
    }
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Format(format!("a 2D grid must be a square matrix; got {n} rows of unequal or different length")));
    }
    let m = exact_log2(n, "number of cells per side")?;
    GridFunction::new(BaseDomain::unit(2, m)?, rows.into_iter().flatten().collect())
}

pub fn grid_to_csv(f: &GridFunction) -> Result<String> {
    let mut out = String::new();
    match f.domain.dim {
        1 => {
            for v in &f.values {
                out.push_str(&format!("{v:?}\n"));
            }
        }
        2 => {
            for row in f.values.chunks(f.domain.side_cells()) {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        d => return Err(Error::Format(format!("CSV grids are 1D or 2D, got dimension {d}"))),
    }
    Ok(out)
}

pub fn grid_from_json(text: &str) -> Result<GridFunction> {
    let file: GridFile = serde_json::from_str(text)?;
    file.into_grid()
}

pub fn grid_to_json(f: &GridFunction) -> Result<String> {
    Ok(serde_json::to_string(&GridFile::from_grid(f))?)
}

pub fn read_grid(path: &Path) -> Result<GridFunction> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    match Format::from_path(path) {
        Format::Csv => grid_from_csv(&text),
        Format::Json => grid_from_json(&text),
    }
}

pub fn write_grid(f: &GridFunction, path: &Path, format: Format) -> Result<()> {
    let text = match format {
        Format::Csv => grid_to_csv(f)?,
        Format::Json => grid_to_json(f)?,
    };
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn cellset_from_json(text: &str) -> Result<CellSet> {
    let file: CellSetFile = serde_json::from_str(text)?;
    let domain = BaseDomain::new(DyadicCube::origin(file.dim, file.level), file.resolution)?;
    CellSet::from_cells(domain, &file.cells)
}

pub fn cellset_to_json(set: &CellSet) -> Result<String> {
    let d = &set.domain;
    Ok(serde_json::to_string(&CellSetFile {
        dim: d.dim,
        level: d.root.level,
        resolution: d.resolution,
        cells: set.iter().collect(),
    })?)
}

/// Raster: one line in 1D, `N` lines in 2D; `1` marks a member cell.
pub fn cellset_from_raster(text: &str) -> Result<CellSet> {
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    let mut mask = Vec::new();
    for (i, l) in lines.iter().enumerate() {
        for ch in l.chars() {
            match ch {
                '0' => mask.push(false),
                '1' => mask.push(true),
                c => return Err(Error::Format(format!("raster line {}: unexpected character {c:?}", i + 1))),
            }
        }
    }
    let domain = match lines.len() {
        0 => return Err(Error::Format("empty raster".into())),
        1 => BaseDomain::unit(1, exact_log2(mask.len(), "raster width")?)?,
        n => {
            if lines.iter().any(|l| l.len() != n) {
                return Err(Error::Format("a 2D raster must be square".into()));
            }
            BaseDomain::unit(2, exact_log2(n, "raster side")?)?
        }
    };
    CellSet::from_mask(domain, &mask)
}

pub fn read_cellset(path: &Path) -> Result<CellSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        cellset_from_json(&text)
    } else {
        cellset_from_raster(&text)
    }
}
