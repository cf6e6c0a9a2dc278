//! Terrain attribute raster on a fixed square grid (1 km cells by default).
//!
//! Cells are keyed by integer coordinates in an equirectangular plane
//! anchored at a configured origin. Points outside the raster fall back to a
//! declared default cell; every fallback is logged once per run site.

use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use crate::geo::{GeoPoint, LocalPlane};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellAttributes {
    pub altitude_m: f64,
    pub slope_deg: f64,
    pub rain24h_mm: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum TerrainError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("terrain grid: cell size must be positive, got {0}")]
    BadCellSize(f64),
}

#[derive(Debug, Deserialize)]
struct CellRow {
    cell_x: i32,
    cell_y: i32,
    altitude_m: f64,
    slope_deg: f64,
    rain24h_mm: f64,
}

#[derive(Debug, Clone)]
pub struct TerrainGrid {
    plane: LocalPlane,
    cell_km: f64,
    cells: HashMap<(i32, i32), CellAttributes>,
    default_cell: CellAttributes,
}

impl TerrainGrid {
    pub fn load(
        path: &Path,
        origin: GeoPoint,
        cell_km: f64,
        default_cell: CellAttributes,
    ) -> Result<Self, TerrainError> {
        if !(cell_km > 0.0) {
            return Err(TerrainError::BadCellSize(cell_km));
        }
        let text = std::fs::read_to_string(path).map_err(|source| TerrainError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut cells = HashMap::new();
        for row in reader.deserialize::<CellRow>() {
            let row = row.map_err(|source| TerrainError::Csv {
                path: path.display().to_string(),
                source,
            })?;
            cells.insert(
                (row.cell_x, row.cell_y),
                CellAttributes {
                    altitude_m: row.altitude_m,
                    slope_deg: row.slope_deg,
                    rain24h_mm: row.rain24h_mm,
                },
            );
        }
        Ok(Self {
            plane: LocalPlane::new(origin),
            cell_km,
            cells,
            default_cell,
        })
    }

    /// Grid with no cells; every lookup hits the default. Used by the pure
    /// model-driven mode when no raster is supplied.
    pub fn uniform(origin: GeoPoint, cell_km: f64, default_cell: CellAttributes) -> Self {
        Self {
            plane: LocalPlane::new(origin),
            cell_km,
            cells: HashMap::new(),
            default_cell,
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Integer cell coordinates containing `point`. Points exactly on a
    /// shared edge belong to the lower-index cell (row-major tie-break).
    pub fn cell_of(&self, point: GeoPoint) -> (i32, i32) {
        let (east, north) = self.plane.to_km(point);
        (self.axis_index(east), self.axis_index(north))
    }

    fn axis_index(&self, km: f64) -> i32 {
        const EDGE_SNAP: f64 = 1e-9; // one micrometre in cell units
        let u = km / self.cell_km;
        let mut i = (u - EDGE_SNAP).ceil() - 1.0;
        // the grid-origin edge itself belongs to cell 0
        if i < 0.0 && u > -EDGE_SNAP {
            i = 0.0;
        }
        i as i32
    }

    /// Attributes of the containing cell, or the default cell (logged) when
    /// the point lies outside the raster coverage.
    pub fn lookup(&self, point: GeoPoint) -> CellAttributes {
        let key = self.cell_of(point);
        match self.cells.get(&key) {
            Some(attrs) => *attrs,
            None => {
                log::warn!(
                    "terrain lookup outside coverage at ({:.4}, {:.4}) -> cell {:?}; using default cell",
                    point.lat_deg,
                    point.lon_deg,
                    key
                );
                self.default_cell
            }
        }
    }
}
