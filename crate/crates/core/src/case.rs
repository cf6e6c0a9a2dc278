//! Electrical network case: buses, generators and geo-referenced corridors.
//!
//! Electrical data and geography live in the same corridor record but the
//! polyline is free-form, so the same electrical case can be remapped to a
//! new region by editing only the polylines. Corridors are discretized into
//! tower-line units (one tower plus its adjoining span) for failure
//! analysis.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::geo::{GeoPoint, Polyline};

pub type BusId = u32;
pub type CorridorId = u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: BusId,
    pub load_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub bus: BusId,
    pub pmax_mw: f64,
    pub pmin_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corridor {
    pub id: CorridorId,
    pub from_bus: BusId,
    pub to_bus: BusId,
    pub reactance_pu: f64,
    pub limit_mw: f64,
    /// Design wind speed of the line sections, m/s.
    pub vd_line_ms: f64,
    /// Design wind speed of the towers, m/s.
    pub vd_tower_ms: f64,
    /// Tower fragility exponent, per (m/s). Empty in the file means the
    /// ln(20)/vd_tower default (5% collapse rate at the design speed).
    pub gamma: f64,
    pub op_years: f64,
    pub polyline: Polyline,
    pub length_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkCase {
    pub buses: Vec<Bus>,
    pub generators: Vec<Generator>,
    pub corridors: Vec<Corridor>,
}

/// One transmission tower plus the span it anchors; the atomic element of
/// failure analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct TowerLineUnit {
    pub corridor: CorridorId,
    pub index: usize,
    pub tower: GeoPoint,
    /// Bearing of the span leaving this tower, degrees from north.
    pub span_bearing_deg: f64,
    /// Span length, km; the final span of a corridor may be shorter.
    pub span_km: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum CaseError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}: record {record}: invalid field {field}: {reason}")]
    Field {
        path: String,
        record: usize,
        field: &'static str,
        reason: String,
    },
    #[error("corridor {corridor} references missing bus {bus}")]
    MissingBus { corridor: CorridorId, bus: BusId },
    #[error("generator {index} references missing bus {bus}")]
    GeneratorMissingBus { index: usize, bus: BusId },
    #[error("corridor {corridor} has non-positive reactance {value}")]
    NonPositiveReactance { corridor: CorridorId, value: f64 },
    #[error("corridor {corridor} has non-positive flow limit {value}")]
    NonPositiveLimit { corridor: CorridorId, value: f64 },
    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: u32 },
    #[error("base network is disconnected: bus {bus} unreachable from bus {root}")]
    DisconnectedBaseGraph { bus: BusId, root: BusId },
    #[error("total generation capacity {pmax_mw} MW cannot cover total load {load_mw} MW")]
    InsufficientGeneration { pmax_mw: f64, load_mw: f64 },
    #[error("corridor {corridor} has zero geographic length")]
    ZeroLengthCorridor { corridor: CorridorId },
}

fn read_to_string(path: &Path) -> Result<String, CaseError> {
    std::fs::read_to_string(path).map_err(|source| CaseError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Deserialize)]
struct BusRow {
    id: BusId,
    load_mw: f64,
}

#[derive(Debug, Deserialize)]
struct GeneratorRow {
    bus: BusId,
    pmax_mw: f64,
    pmin_mw: f64,
}

#[derive(Debug, Deserialize)]
struct CorridorRow {
    id: CorridorId,
    from: BusId,
    to: BusId,
    x_pu: f64,
    limit_mw: f64,
    vd_line: f64,
    vd_tower: f64,
    gamma: Option<f64>,
    op_years: f64,
    polyline: String,
}

fn parse_polyline(text: &str) -> Result<Polyline, String> {
    let mut points = Vec::new();
    for pair in text.split(';') {
        let pair = pair.trim();
        if pair.is_empty() {
            continue;
        }
        let (lat, lon) = pair
            .split_once(',')
            .ok_or_else(|| format!("expected \"lat,lon\", got {pair:?}"))?;
        let lat: f64 = lat
            .trim()
            .parse()
            .map_err(|e| format!("bad latitude {lat:?}: {e}"))?;
        let lon: f64 = lon
            .trim()
            .parse()
            .map_err(|e| format!("bad longitude {lon:?}: {e}"))?;
        points.push(GeoPoint::new(lat, lon));
    }
    if points.len() < 2 {
        return Err("polyline needs at least two vertices".to_string());
    }
    Ok(Polyline::new(points))
}

fn csv_rows<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CaseError> {
    let text = read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    reader
        .deserialize()
        .collect::<Result<Vec<T>, csv::Error>>()
        .map_err(|source| CaseError::Csv {
            path: path.display().to_string(),
            source,
        })
}

/// Load and validate a network case from its three delimiter-separated
/// files. Validation checks referential integrity, positivity of reactances
/// and limits, base-graph connectivity and generation adequacy.
pub fn load_case(
    buses: &Path,
    generators: &Path,
    corridors: &Path,
) -> Result<NetworkCase, CaseError> {
    let bus_rows: Vec<BusRow> = csv_rows(buses)?;
    let gen_rows: Vec<GeneratorRow> = csv_rows(generators)?;
    let corr_rows: Vec<CorridorRow> = csv_rows(corridors)?;

    let mut case = NetworkCase {
        buses: bus_rows
            .into_iter()
            .map(|r| Bus {
                id: r.id,
                load_mw: r.load_mw,
            })
            .collect(),
        generators: gen_rows
            .into_iter()
            .map(|r| Generator {
                bus: r.bus,
                pmax_mw: r.pmax_mw,
                pmin_mw: r.pmin_mw,
            })
            .collect(),
        corridors: Vec::with_capacity(corr_rows.len()),
    };
    for (i, row) in corr_rows.into_iter().enumerate() {
        let polyline = parse_polyline(&row.polyline).map_err(|reason| CaseError::Field {
            path: corridors.display().to_string(),
            record: i + 1,
            field: "polyline",
            reason,
        })?;
        let length_km = polyline.length_km();
        let gamma = row.gamma.unwrap_or_else(|| 20.0f64.ln() / row.vd_tower);
        case.corridors.push(Corridor {
            id: row.id,
            from_bus: row.from,
            to_bus: row.to,
            reactance_pu: row.x_pu,
            limit_mw: row.limit_mw,
            vd_line_ms: row.vd_line,
            vd_tower_ms: row.vd_tower,
            gamma,
            op_years: row.op_years,
            polyline,
            length_km,
        });
    }
    case.validate()?;
    Ok(case)
}

impl NetworkCase {
    pub fn validate(&self) -> Result<(), CaseError> {
        let mut bus_ids = HashSet::new();
        for bus in &self.buses {
            if !bus_ids.insert(bus.id) {
                return Err(CaseError::DuplicateId {
                    kind: "bus",
                    id: bus.id,
                });
            }
        }
        let mut corridor_ids = HashSet::new();
        for c in &self.corridors {
            if !corridor_ids.insert(c.id) {
                return Err(CaseError::DuplicateId {
                    kind: "corridor",
                    id: c.id,
                });
            }
            for bus in [c.from_bus, c.to_bus] {
                if !bus_ids.contains(&bus) {
                    return Err(CaseError::MissingBus {
                        corridor: c.id,
                        bus,
                    });
                }
            }
            if !(c.reactance_pu > 0.0) {
                return Err(CaseError::NonPositiveReactance {
                    corridor: c.id,
                    value: c.reactance_pu,
                });
            }
            if !(c.limit_mw > 0.0) {
                return Err(CaseError::NonPositiveLimit {
                    corridor: c.id,
                    value: c.limit_mw,
                });
            }
            if !(c.length_km > 0.0) {
                return Err(CaseError::ZeroLengthCorridor { corridor: c.id });
            }
        }
        for (i, g) in self.generators.iter().enumerate() {
            if !bus_ids.contains(&g.bus) {
                return Err(CaseError::GeneratorMissingBus {
                    index: i,
                    bus: g.bus,
                });
            }
        }

        // connectivity of the intact graph
        if let Some(root) = self.buses.first().map(|b| b.id) {
            let mut adjacency: HashMap<BusId, Vec<BusId>> = HashMap::new();
            for c in &self.corridors {
                adjacency.entry(c.from_bus).or_default().push(c.to_bus);
                adjacency.entry(c.to_bus).or_default().push(c.from_bus);
            }
            let mut seen = HashSet::from([root]);
            let mut stack = vec![root];
            while let Some(b) = stack.pop() {
                for &next in adjacency.get(&b).into_iter().flatten() {
                    if seen.insert(next) {
                        stack.push(next);
                    }
                }
            }
            if let Some(bus) = self
                .buses
                .iter()
                .map(|b| b.id)
                .find(|id| !seen.contains(id))
            {
                return Err(CaseError::DisconnectedBaseGraph { bus, root });
            }
        }

        let pmax: f64 = self.generators.iter().map(|g| g.pmax_mw).sum();
        let load: f64 = self.buses.iter().map(|b| b.load_mw).sum();
        if pmax < load {
            return Err(CaseError::InsufficientGeneration {
                pmax_mw: pmax,
                load_mw: load,
            });
        }
        Ok(())
    }

    pub fn corridor(&self, id: CorridorId) -> Option<&Corridor> {
        self.corridors.iter().find(|c| c.id == id)
    }

    pub fn total_load_mw(&self) -> f64 {
        self.buses.iter().map(|b| b.load_mw).sum()
    }

    /// SHA-256 over a canonical text serialization; byte-identical inputs
    /// produce identical digests, which the run manifest records.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for b in &self.buses {
            h.update(format!("B{},{:x}\n", b.id, b.load_mw.to_bits()));
        }
        for g in &self.generators {
            h.update(format!(
                "G{},{:x},{:x}\n",
                g.bus,
                g.pmax_mw.to_bits(),
                g.pmin_mw.to_bits()
            ));
        }
        for c in &self.corridors {
            h.update(format!(
                "C{},{},{},{:x},{:x},{:x},{:x},{:x},{:x}",
                c.id,
                c.from_bus,
                c.to_bus,
                c.reactance_pu.to_bits(),
                c.limit_mw.to_bits(),
                c.vd_line_ms.to_bits(),
                c.vd_tower_ms.to_bits(),
                c.gamma.to_bits(),
                c.op_years.to_bits()
            ));
            for p in &c.polyline.points {
                h.update(format!(
                    ",{:x},{:x}",
                    p.lat_deg.to_bits(),
                    p.lon_deg.to_bits()
                ));
            }
            h.update("\n");
        }
        hex_string(&h.finalize())
    }
}

pub(crate) fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Split a corridor into ceil(length/spacing) tower-line units by walking
/// the polyline at arc-length steps. Tower `i` sits at `i * spacing`; its
/// span covers the interval to the next tower, so the last span may be
/// shorter than the spacing.
pub fn discretize_corridor(
    corridor: &Corridor,
    spacing_m: f64,
) -> Result<Vec<TowerLineUnit>, CaseError> {
    assert!(spacing_m > 0.0, "tower spacing must be positive");
    let length_km = corridor.length_km;
    if !(length_km > 0.0) {
        return Err(CaseError::ZeroLengthCorridor {
            corridor: corridor.id,
        });
    }
    let spacing_km = spacing_m / 1000.0;
    // snap tolerance so lengths that are float-noise above a multiple of the
    // spacing do not spawn a vanishing extra span
    let count = (length_km / spacing_km - 1e-9).ceil().max(1.0) as usize;
    let mut units = Vec::with_capacity(count);
    for i in 0..count {
        let start = i as f64 * spacing_km;
        let end = ((i + 1) as f64 * spacing_km).min(length_km);
        let (tower, span_bearing_deg) = corridor.polyline.point_at_km(start);
        units.push(TowerLineUnit {
            corridor: corridor.id,
            index: i,
            tower,
            span_bearing_deg,
            span_km: end - start,
        });
    }
    Ok(units)
}
