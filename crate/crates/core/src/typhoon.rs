//! Batts-style parametric typhoon wind field.
//!
//! The storm is described by its initial central pressure difference, a
//! straight-line track from the landfall point, and a translation speed.
//! Central pressure decays linearly with an azimuth-dependent coefficient;
//! peak gradient wind and the radius of maximum wind follow the classical
//! empirical fits. Around the centre the wind profile rises linearly inside
//! the eye wall and decays as `(rmax/d)^0.6` outside it.

use serde::Deserialize;

use crate::geo::{self, GeoPoint};

/// Converts the storm translation speed from km/h to the m/s term of the
/// peak-wind formula.
const KMH_TO_MS: f64 = 1.0 / 3.6;

/// Parametric storm description. `k_coeff` is the Batts wind-speed
/// coefficient converting sqrt(hPa) to m/s; 6.93 is the classical
/// calibration and the default when a configuration omits it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TyphoonParameters {
    /// Initial central pressure difference, hPa. Must be positive.
    pub delta_p0_hpa: f64,
    /// Angle between the movement direction and north, degrees in [0, 360).
    pub heading_deg: f64,
    /// Translation speed, km/h.
    pub vt_kmh: f64,
    /// Landfall point; the track starts here at t = 0.
    pub landfall: GeoPoint,
    /// Batts coefficient, sqrt(hPa) -> m/s.
    pub k_coeff: f64,
    /// Simulation step, minutes.
    pub dt_min: f64,
}

pub const DEFAULT_K_COEFF: f64 = 6.93;

#[derive(Debug, thiserror::Error)]
pub enum TyphoonError {
    #[error("invalid typhoon parameter {name}: {value} ({reason})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("failed to parse typhoon configuration: {0}")]
    Parse(#[from] toml::de::Error),
}

impl TyphoonParameters {
    pub fn validate(&self) -> Result<(), TyphoonError> {
        let checks: [(&'static str, f64, bool, &'static str); 5] = [
            (
                "deltaP0_hPa",
                self.delta_p0_hpa,
                self.delta_p0_hpa > 0.0,
                "must be > 0",
            ),
            ("vT_kmh", self.vt_kmh, self.vt_kmh >= 0.0, "must be >= 0"),
            (
                "heading_deg",
                self.heading_deg,
                (0.0..360.0).contains(&self.heading_deg),
                "must lie in [0, 360)",
            ),
            ("dt_min", self.dt_min, self.dt_min > 0.0, "must be > 0"),
            ("K", self.k_coeff, self.k_coeff > 0.0, "must be > 0"),
        ];
        for (name, value, ok, reason) in checks {
            if !ok || !value.is_finite() {
                return Err(TyphoonError::InvalidParameter {
                    name,
                    value,
                    reason,
                });
            }
        }
        Ok(())
    }

    pub fn dt_hours(&self) -> f64 {
        self.dt_min / 60.0
    }
}

/// On-disk typhoon configuration (TOML).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TyphoonConfigFile {
    #[serde(rename = "deltaP0_hPa")]
    delta_p0_hpa: f64,
    heading_deg: f64,
    #[serde(rename = "vT_kmh")]
    vt_kmh: f64,
    landfall_lat: f64,
    landfall_lon: f64,
    #[serde(rename = "K", default = "default_k")]
    k_coeff: f64,
    dt_min: f64,
}

fn default_k() -> f64 {
    DEFAULT_K_COEFF
}

impl TyphoonParameters {
    pub fn from_toml_str(text: &str) -> Result<Self, TyphoonError> {
        let f: TyphoonConfigFile = toml::from_str(text)?;
        let params = TyphoonParameters {
            delta_p0_hpa: f.delta_p0_hpa,
            heading_deg: f.heading_deg,
            vt_kmh: f.vt_kmh,
            landfall: GeoPoint::new(f.landfall_lat, f.landfall_lon),
            k_coeff: f.k_coeff,
            dt_min: f.dt_min,
        };
        params.validate()?;
        Ok(params)
    }
}

/// Storm snapshot at elapsed time `t_hours`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TyphoonState {
    pub t_hours: f64,
    pub center: GeoPoint,
    /// Central pressure difference P(t), hPa; 0 means the storm dissipated.
    pub pressure_hpa: f64,
    /// Peak gradient wind at the radius of maximum wind, m/s.
    pub vmax_ms: f64,
    /// Radius of maximum wind, km.
    pub rmax_km: f64,
}

/// Central pressure difference after `t_hours`, clamped at zero. The decay
/// coefficient depends on the heading; decay time is measured in hours.
pub fn central_pressure(params: &TyphoonParameters, t_hours: f64) -> f64 {
    debug_assert!(t_hours >= 0.0);
    let decay = 0.02 + 0.02 * params.heading_deg.to_radians().sin();
    (params.delta_p0_hpa - decay * t_hours).max(0.0)
}

/// Full storm state at `t_hours`: centre advanced along the straight-line
/// track, peak wind from the decayed pressure, and the radius of maximum
/// wind from pressure and centre latitude.
pub fn storm_state(params: &TyphoonParameters, t_hours: f64) -> TyphoonState {
    debug_assert!(t_hours >= 0.0);
    let pressure = central_pressure(params, t_hours);
    let dist_km = params.vt_kmh * t_hours;
    let heading = params.heading_deg.to_radians();
    let center = geo::offset_km(
        params.landfall,
        dist_km * heading.sin(),
        dist_km * heading.cos(),
    );
    let vmax = 0.865 * params.k_coeff * pressure.sqrt() + 0.5 * params.vt_kmh * KMH_TO_MS;
    let rmax = (2.63 - 5.086e-5 * pressure * pressure + 0.0395 * center.lat_deg).exp();
    TyphoonState {
        t_hours,
        center,
        pressure_hpa: pressure,
        vmax_ms: vmax,
        rmax_km: rmax,
    }
}

/// Wind sample at a fixed geographic point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindSample {
    /// Wind speed, m/s.
    pub speed_ms: f64,
    /// Bearing the air moves toward, degrees clockwise from north. The flow
    /// is tangential and cyclonic (counterclockwise in the northern
    /// hemisphere), i.e. perpendicular to the radius vector.
    pub direction_deg: f64,
}

/// Radial wind-speed profile: linear in distance inside the radius of
/// maximum wind, decaying as `(rmax/d)^0.6` outside it; continuous at the
/// eye wall.
pub fn radial_wind_speed(vmax_ms: f64, rmax_km: f64, d_km: f64) -> f64 {
    debug_assert!(rmax_km > 0.0 && d_km >= 0.0);
    if d_km <= rmax_km {
        vmax_ms * d_km / rmax_km
    } else {
        vmax_ms * (rmax_km / d_km).powf(0.6)
    }
}

/// Wind speed and direction at `point` for the given storm state.
pub fn wind_at(state: &TyphoonState, point: GeoPoint) -> WindSample {
    let d = geo::haversine_km(state.center, point);
    if d == 0.0 {
        return WindSample {
            speed_ms: 0.0,
            direction_deg: 0.0,
        };
    }
    let speed = radial_wind_speed(state.vmax_ms, state.rmax_km, d);
    let radial = geo::bearing_deg(state.center, point);
    WindSample {
        speed_ms: speed,
        direction_deg: geo::normalize_deg(radial - 90.0),
    }
}

/// Iterator over storm states at the configured step until the stop rule
/// fires: the pressure reaches zero, or the centre is outside `bbox`
/// inflated by `3 * rmax` and already past its closest approach. A hard cap
/// bounds pathological configurations.
pub struct TrackStepper<'a> {
    params: &'a TyphoonParameters,
    bbox: BoundingBox,
    step: usize,
    done: bool,
}

pub const MAX_TRACK_HOURS: f64 = 240.0;

#[derive(Debug, Clone, Copy)]
pub struct BoundingBox {
    pub min: GeoPoint,
    pub max: GeoPoint,
}

impl BoundingBox {
    pub fn around(points: impl IntoIterator<Item = GeoPoint>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut bb = BoundingBox {
            min: first,
            max: first,
        };
        for p in it {
            bb.min.lat_deg = bb.min.lat_deg.min(p.lat_deg);
            bb.min.lon_deg = bb.min.lon_deg.min(p.lon_deg);
            bb.max.lat_deg = bb.max.lat_deg.max(p.lat_deg);
            bb.max.lon_deg = bb.max.lon_deg.max(p.lon_deg);
        }
        Some(bb)
    }

    pub fn center(&self) -> GeoPoint {
        GeoPoint::new(
            (self.min.lat_deg + self.max.lat_deg) / 2.0,
            (self.min.lon_deg + self.max.lon_deg) / 2.0,
        )
    }

    /// Margin (km) by which the point clears the box, negative when inside.
    fn clearance_km(&self, p: GeoPoint) -> f64 {
        let dlat = (self.min.lat_deg - p.lat_deg)
            .max(p.lat_deg - self.max.lat_deg)
            .max(0.0);
        let dlon = (self.min.lon_deg - p.lon_deg)
            .max(p.lon_deg - self.max.lon_deg)
            .max(0.0);
        let km_lon = geo::KM_PER_DEG_LAT * self.center().lat_deg.to_radians().cos();
        let (e, n) = (dlon * km_lon, dlat * geo::KM_PER_DEG_LAT);
        let out = (e * e + n * n).sqrt();
        if out > 0.0 {
            out
        } else {
            -1.0
        }
    }
}

impl<'a> TrackStepper<'a> {
    pub fn new(params: &'a TyphoonParameters, network_bbox: BoundingBox) -> Self {
        Self {
            params,
            bbox: network_bbox,
            step: 0,
            done: false,
        }
    }

    /// Time at which the straight track passes closest to the box centre.
    fn closest_approach_hours(&self) -> f64 {
        if self.params.vt_kmh <= 0.0 {
            return 0.0;
        }
        let plane = geo::LocalPlane::new(self.params.landfall);
        let (cx, cy) = plane.to_km(self.bbox.center());
        let h = self.params.heading_deg.to_radians();
        let along = cx * h.sin() + cy * h.cos();
        (along / self.params.vt_kmh).max(0.0)
    }
}

impl Iterator for TrackStepper<'_> {
    type Item = TyphoonState;

    fn next(&mut self) -> Option<TyphoonState> {
        if self.done {
            return None;
        }
        let t = self.step as f64 * self.params.dt_hours();
        if t > MAX_TRACK_HOURS {
            self.done = true;
            return None;
        }
        let state = storm_state(self.params, t);
        if state.pressure_hpa <= 0.0 {
            self.done = true;
            return None;
        }
        if t > self.closest_approach_hours()
            && self.bbox.clearance_km(state.center) > 3.0 * state.rmax_km
        {
            self.done = true;
            return None;
        }
        self.step += 1;
        Some(state)
    }
}
