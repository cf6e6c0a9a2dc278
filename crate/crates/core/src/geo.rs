//! Geographic primitives: WGS-84 points, haversine distances, bearings and
//! arc-length walks along corridor polylines.
//!
//! Distances are short (storm-scale, well under 1000 km), so track advection
//! and raster indexing use an equirectangular local tangent plane anchored at
//! a fixed origin; point-to-point distances use the haversine formula.

use serde::{Deserialize, Serialize};

pub const EARTH_RADIUS_KM: f64 = 6371.0;
pub const KM_PER_DEG_LAT: f64 = std::f64::consts::PI * EARTH_RADIUS_KM / 180.0;

/// A WGS-84 latitude/longitude pair in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat_deg: f64,
    pub lon_deg: f64,
}

impl GeoPoint {
    pub fn new(lat_deg: f64, lon_deg: f64) -> Self {
        Self { lat_deg, lon_deg }
    }
}

/// Great-circle distance in kilometres.
pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let (la, lb) = (a.lat_deg.to_radians(), b.lat_deg.to_radians());
    let dlat = lb - la;
    let dlon = (b.lon_deg - a.lon_deg).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + la.cos() * lb.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().asin()
}

/// Initial bearing from `a` to `b`, degrees clockwise from north in [0, 360).
pub fn bearing_deg(a: GeoPoint, b: GeoPoint) -> f64 {
    let (la, lb) = (a.lat_deg.to_radians(), b.lat_deg.to_radians());
    let dlon = (b.lon_deg - a.lon_deg).to_radians();
    let y = dlon.sin() * lb.cos();
    let x = la.cos() * lb.sin() - la.sin() * lb.cos() * dlon.cos();
    normalize_deg(y.atan2(x).to_degrees())
}

/// Fold an angle into [0, 360).
pub fn normalize_deg(deg: f64) -> f64 {
    let d = deg % 360.0;
    if d < 0.0 {
        d + 360.0
    } else {
        d
    }
}

/// Absolute angular difference folded into [0, 180].
pub fn angle_between_deg(a_deg: f64, b_deg: f64) -> f64 {
    let d = (normalize_deg(a_deg) - normalize_deg(b_deg)).abs();
    if d > 180.0 {
        360.0 - d
    } else {
        d
    }
}

/// Flat-plane displacement from `origin` by `east_km`/`north_km`, with the
/// longitude scale frozen at the origin latitude.
pub fn offset_km(origin: GeoPoint, east_km: f64, north_km: f64) -> GeoPoint {
    let km_per_deg_lon = KM_PER_DEG_LAT * origin.lat_deg.to_radians().cos();
    GeoPoint {
        lat_deg: origin.lat_deg + north_km / KM_PER_DEG_LAT,
        lon_deg: origin.lon_deg + east_km / km_per_deg_lon,
    }
}

/// Equirectangular projection anchored at a fixed origin; used for raster
/// cell indexing so that files and lookups agree bit-for-bit.
#[derive(Debug, Clone, Copy)]
pub struct LocalPlane {
    pub origin: GeoPoint,
    km_per_deg_lon: f64,
}

impl LocalPlane {
    pub fn new(origin: GeoPoint) -> Self {
        Self {
            origin,
            km_per_deg_lon: KM_PER_DEG_LAT * origin.lat_deg.to_radians().cos(),
        }
    }

    /// (east_km, north_km) of `p` relative to the origin.
    pub fn to_km(&self, p: GeoPoint) -> (f64, f64) {
        (
            (p.lon_deg - self.origin.lon_deg) * self.km_per_deg_lon,
            (p.lat_deg - self.origin.lat_deg) * KM_PER_DEG_LAT,
        )
    }
}

/// A corridor's geographic centreline, ordered from the `from` bus end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<GeoPoint>,
}

impl Polyline {
    pub fn new(points: Vec<GeoPoint>) -> Self {
        Self { points }
    }

    /// Geodesic length in kilometres (sum of haversine segment lengths).
    pub fn length_km(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| haversine_km(w[0], w[1]))
            .sum()
    }

    /// Point at arc length `s_km` from the start, together with the bearing
    /// of the segment it falls on. `s_km` beyond either end clamps.
    pub fn point_at_km(&self, s_km: f64) -> (GeoPoint, f64) {
        let first = self.points[0];
        if self.points.len() == 1 {
            return (first, 0.0);
        }
        let mut remaining = s_km.max(0.0);
        for w in self.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            let seg = haversine_km(a, b);
            let brg = bearing_deg(a, b);
            if remaining <= seg || seg == 0.0 {
                if seg == 0.0 {
                    continue;
                }
                let f = remaining / seg;
                let p = GeoPoint {
                    lat_deg: a.lat_deg + f * (b.lat_deg - a.lat_deg),
                    lon_deg: a.lon_deg + f * (b.lon_deg - a.lon_deg),
                };
                return (p, brg);
            }
            remaining -= seg;
        }
        let n = self.points.len();
        let last = self.points[n - 1];
        (last, bearing_deg(self.points[n - 2], last))
    }

    /// Midpoint of the polyline by arc length.
    pub fn midpoint(&self) -> GeoPoint {
        self.point_at_km(self.length_km() / 2.0).0
    }
}
