//! Time-stepped failure model for tower-line units and corridors.
//!
//! Line sections carry an exponential wind hazard per hour per km; towers
//! carry a three-branch per-step collapse probability that is zero below
//! the design speed and saturates at twice the design speed. Hazards are
//! integrated over the storm transit with left-endpoint Riemann sums at the
//! simulation step, folded per unit, optionally rescaled by the data-driven
//! correction coefficient, and combined in series per corridor.

use crate::case::{Corridor, CorridorId, NetworkCase, TowerLineUnit};
use crate::features::{
    self, composite_score, normalize_vector, rain_10min, Feature, FeatureRanges, FeatureVector,
    WeightVector,
};
use crate::geo;
use crate::terrain::TerrainGrid;
use crate::typhoon::{self, BoundingBox, TyphoonParameters};

/// Hazard rate of one line section (per hour): exp(11 v / vd - 18) * dl.
pub fn line_section_rate(v_ms: f64, vd_line_ms: f64, dl_km: f64) -> f64 {
    debug_assert!(vd_line_ms > 0.0 && dl_km > 0.0 && v_ms >= 0.0);
    (11.0 * v_ms / vd_line_ms - 18.0).exp() * dl_km
}

/// Per-step tower collapse probability. The exponential branch equals one at
/// v = 2 vd, continuous with the saturation branch; the jump at v = vd from
/// zero to exp(-gamma vd) is part of the published form.
pub fn tower_rate(v_ms: f64, vd_tower_ms: f64, gamma: f64) -> f64 {
    debug_assert!(vd_tower_ms > 0.0 && gamma > 0.0);
    if v_ms < vd_tower_ms {
        0.0
    } else if v_ms < 2.0 * vd_tower_ms {
        (gamma * (v_ms - 2.0 * vd_tower_ms)).exp().clamp(0.0, 1.0)
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    Line,
    Tower,
}

/// Running hazard integral of one tower-line unit.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitHazard {
    line_integral: f64,
    tower_integral: f64,
    tower_certain: bool,
}

const TOWER_RATE_CAP: f64 = 1.0 - 1e-9;

impl UnitHazard {
    pub fn step(&mut self, line_rate: f64, tower_rate: f64, dt_hours: f64) {
        self.line_integral += line_rate * dt_hours;
        if tower_rate >= 1.0 {
            self.tower_certain = true;
        } else {
            let r = tower_rate.min(TOWER_RATE_CAP);
            self.tower_integral += r / (1.0 - r) * dt_hours;
        }
    }

    pub fn line_probability(&self) -> f64 {
        1.0 - (-self.line_integral).exp()
    }

    pub fn tower_probability(&self) -> f64 {
        if self.tower_certain {
            1.0
        } else {
            1.0 - (-self.tower_integral).exp()
        }
    }

    /// Failure probability of the whole unit: its tower and its span in
    /// series.
    pub fn unit_probability(&self) -> f64 {
        1.0 - (1.0 - self.line_probability()) * (1.0 - self.tower_probability())
    }
}

/// Cumulative failure probability from a hazard time series sampled at a
/// fixed step.
pub fn cumulative_unit_probability(rates: &[f64], kind: RateKind, dt_hours: f64) -> f64 {
    debug_assert!(dt_hours > 0.0);
    let mut acc = UnitHazard::default();
    for &r in rates {
        match kind {
            RateKind::Line => acc.step(r, 0.0, dt_hours),
            RateKind::Tower => acc.step(0.0, r, dt_hours),
        }
    }
    match kind {
        RateKind::Line => acc.line_probability(),
        RateKind::Tower => acc.tower_probability(),
    }
}

/// Series combination: the corridor fails when any unit fails.
pub fn corridor_probability(unit_probabilities: &[f64]) -> f64 {
    debug_assert!(unit_probabilities.iter().all(|p| (0.0..=1.0).contains(p)));
    1.0 - unit_probabilities.iter().map(|p| 1.0 - p).product::<f64>()
}

/// Source of the per-unit correction coefficients.
#[derive(Debug, Clone)]
pub enum CorrectionModel {
    /// k = 1 everywhere: the pure model-driven mode.
    Unit,
    /// Data-driven coefficients from the selected feature weights.
    Weighted {
        weights: WeightVector,
        ranges: FeatureRanges,
    },
}

impl CorrectionModel {
    /// (composite score, correction coefficient); the score is absent in
    /// the unit model where no weighting exists.
    fn correction(&self, features: &FeatureVector) -> (Option<f64>, f64) {
        match self {
            CorrectionModel::Unit => (None, 1.0),
            CorrectionModel::Weighted { weights, ranges } => {
                let bounds = features::score_bounds(weights, ranges)
                    .expect("ranges validated at construction");
                let normalized = normalize_vector(features, ranges);
                let score = composite_score(weights, &normalized);
                (Some(score), features::correction_coefficient(score, bounds))
            }
        }
    }
}

/// Outcome for one tower-line unit under one scenario.
#[derive(Debug, Clone)]
pub struct UnitOutcome {
    pub corridor: CorridorId,
    pub index: usize,
    pub features: FeatureVector,
    /// Model-driven cumulative failure probability of the unit.
    pub p_model: f64,
    /// Composite hazard score behind the correction (hybrid mode only).
    pub score: Option<f64>,
    /// Correction coefficient applied to it.
    pub correction: f64,
    /// min(1, k * p): the comprehensive unit probability.
    pub p_corrected: f64,
}

/// Per-corridor aggregation under one scenario.
#[derive(Debug, Clone)]
pub struct CorridorOutcome {
    pub id: CorridorId,
    pub p_model: f64,
    pub p_comprehensive: f64,
    pub units: Vec<UnitOutcome>,
}

/// Failure probabilities of every corridor for one storm scenario.
#[derive(Debug, Clone)]
pub struct FailureProfile {
    pub corridors: Vec<CorridorOutcome>,
}

impl FailureProfile {
    /// Comprehensive corridor probabilities in case order.
    pub fn comprehensive(&self) -> Vec<f64> {
        self.corridors.iter().map(|c| c.p_comprehensive).collect()
    }
}

/// One row of the cumulative failure-rate time series.
#[derive(Debug, Clone, Copy)]
pub struct SeriesRow {
    pub t_hours: f64,
    pub corridor: CorridorId,
    pub p_model: f64,
    pub p_comprehensive: f64,
}

struct UnitTracker {
    hazard: UnitHazard,
    max_wind_ms: f64,
    dir_at_max_deg: f64,
}

/// Walk the storm across the network once, integrating per-unit hazards and
/// recording each unit's peak wind and its direction.
fn integrate_storm(
    params: &TyphoonParameters,
    bbox: BoundingBox,
    units: &[(&Corridor, &TowerLineUnit)],
    mut per_step: impl FnMut(f64, &[UnitTracker]),
) -> Vec<UnitTracker> {
    let mut trackers: Vec<UnitTracker> = units
        .iter()
        .map(|_| UnitTracker {
            hazard: UnitHazard::default(),
            max_wind_ms: 0.0,
            dir_at_max_deg: 0.0,
        })
        .collect();
    let dt = params.dt_hours();
    for state in typhoon::TrackStepper::new(params, bbox) {
        for ((corridor, unit), tracker) in units.iter().zip(trackers.iter_mut()) {
            let wind = typhoon::wind_at(&state, unit.tower);
            if wind.speed_ms > tracker.max_wind_ms {
                tracker.max_wind_ms = wind.speed_ms;
                tracker.dir_at_max_deg = wind.direction_deg;
            }
            let line = line_section_rate(wind.speed_ms, corridor.vd_line_ms, unit.span_km);
            let tower = tower_rate(wind.speed_ms, corridor.vd_tower_ms, corridor.gamma);
            tracker.hazard.step(line, tower, dt);
        }
        per_step(state.t_hours, &trackers);
    }
    trackers
}

fn unit_features(
    corridor: &Corridor,
    unit: &TowerLineUnit,
    terrain: &TerrainGrid,
    max_wind_ms: f64,
    dir_at_max_deg: f64,
) -> FeatureVector {
    let cell = terrain.lookup(unit.tower);
    let mut values = [0.0; features::FEATURE_COUNT];
    values[Feature::MaxWind.index()] = max_wind_ms;
    values[Feature::RainIntensity.index()] = rain_10min(cell.rain24h_mm);
    values[Feature::Altitude.index()] = cell.altitude_m;
    values[Feature::Slope.index()] = cell.slope_deg;
    values[Feature::WindAngle.index()] =
        geo::angle_between_deg(dir_at_max_deg, unit.span_bearing_deg);
    values[Feature::DesignWind.index()] = corridor.vd_line_ms;
    values[Feature::OpTime.index()] = corridor.op_years;
    FeatureVector { values }
}

/// Network bounding box from corridor geometry, used as the storm stop rule.
pub fn network_bbox(case: &NetworkCase) -> BoundingBox {
    BoundingBox::around(
        case.corridors
            .iter()
            .flat_map(|c| c.polyline.points.iter().copied()),
    )
    .expect("case has at least one corridor vertex")
}

/// Evaluate one scenario: step the storm, fold unit probabilities, apply the
/// correction model and combine per corridor. `units_by_corridor` must be in
/// case corridor order.
pub fn scenario_failure_profile(
    case: &NetworkCase,
    units_by_corridor: &[Vec<TowerLineUnit>],
    params: &TyphoonParameters,
    terrain: &TerrainGrid,
    correction: &CorrectionModel,
) -> FailureProfile {
    let flat: Vec<(&Corridor, &TowerLineUnit)> = case
        .corridors
        .iter()
        .zip(units_by_corridor)
        .flat_map(|(c, units)| units.iter().map(move |u| (c, u)))
        .collect();
    let trackers = integrate_storm(params, network_bbox(case), &flat, |_, _| {});
    build_profile(case, &flat, &trackers, terrain, correction)
}

fn build_profile(
    case: &NetworkCase,
    flat: &[(&Corridor, &TowerLineUnit)],
    trackers: &[UnitTracker],
    terrain: &TerrainGrid,
    correction: &CorrectionModel,
) -> FailureProfile {
    let mut corridors: Vec<CorridorOutcome> = case
        .corridors
        .iter()
        .map(|c| CorridorOutcome {
            id: c.id,
            p_model: 0.0,
            p_comprehensive: 0.0,
            units: Vec::new(),
        })
        .collect();
    let index_of: std::collections::HashMap<CorridorId, usize> = case
        .corridors
        .iter()
        .enumerate()
        .map(|(i, c)| (c.id, i))
        .collect();

    for ((corridor, unit), tracker) in flat.iter().zip(trackers) {
        let fv = unit_features(
            corridor,
            unit,
            terrain,
            tracker.max_wind_ms,
            tracker.dir_at_max_deg,
        );
        let p_model = tracker.hazard.unit_probability();
        let (score, k) = correction.correction(&fv);
        let outcome = UnitOutcome {
            corridor: corridor.id,
            index: unit.index,
            features: fv,
            p_model,
            score,
            correction: k,
            p_corrected: (k * p_model).min(1.0),
        };
        corridors[index_of[&corridor.id]].units.push(outcome);
    }
    for c in &mut corridors {
        c.p_model = corridor_probability(&c.units.iter().map(|u| u.p_model).collect::<Vec<_>>());
        c.p_comprehensive =
            corridor_probability(&c.units.iter().map(|u| u.p_corrected).collect::<Vec<_>>());
    }
    FailureProfile { corridors }
}

/// Cumulative failure-rate time series per corridor under one scenario, for
/// plotting. The correction coefficients of the completed transit are
/// applied across the whole curve so both series are non-decreasing.
pub fn corridor_failure_series(
    case: &NetworkCase,
    units_by_corridor: &[Vec<TowerLineUnit>],
    params: &TyphoonParameters,
    terrain: &TerrainGrid,
    correction: &CorrectionModel,
) -> (FailureProfile, Vec<SeriesRow>) {
    let flat: Vec<(&Corridor, &TowerLineUnit)> = case
        .corridors
        .iter()
        .zip(units_by_corridor)
        .flat_map(|(c, units)| units.iter().map(move |u| (c, u)))
        .collect();
    let bbox = network_bbox(case);

    // first transit fixes peak winds, hence the correction coefficients
    let trackers = integrate_storm(params, bbox, &flat, |_, _| {});
    let profile = build_profile(case, &flat, &trackers, terrain, correction);
    let corrections: Vec<f64> = profile
        .corridors
        .iter()
        .flat_map(|c| c.units.iter().map(|u| u.correction))
        .collect();
    // map flat order -> correction order (profile groups by corridor in case
    // order, matching the flat layout)
    debug_assert_eq!(corrections.len(), flat.len());

    let mut rows = Vec::new();
    integrate_storm(params, bbox, &flat, |t_hours, trackers| {
        let mut offset = 0;
        for (corridor, units) in case.corridors.iter().zip(units_by_corridor) {
            let n = units.len();
            let slice = &trackers[offset..offset + n];
            let ks = &corrections[offset..offset + n];
            let p_model = 1.0
                - slice
                    .iter()
                    .map(|tr| 1.0 - tr.hazard.unit_probability())
                    .product::<f64>();
            let p_comp = 1.0
                - slice
                    .iter()
                    .zip(ks)
                    .map(|(tr, k)| 1.0 - (k * tr.hazard.unit_probability()).min(1.0))
                    .product::<f64>();
            rows.push(SeriesRow {
                t_hours,
                corridor: corridor.id,
                p_model,
                p_comprehensive: p_comp,
            });
            offset += n;
        }
    });
    (profile, rows)
}
