//! Per-unit hazard feature vector and the data-driven correction
//! coefficient that rescales model-driven failure probabilities into the
//! [0.9, 1.4] band.
//!
//! Features are normalized direction-aware: a '+' feature maps its range
//! onto [0, 1] so that larger hazard gives a larger normalized value, a '-'
//! feature onto the complement. Raw values outside the configured ranges are
//! clamped, never rejected; real terrain exceeds textbook bounds.

use serde::{Deserialize, Serialize};

pub const FEATURE_COUNT: usize = 7;

/// Canonical feature ordering used by every weight vector, dataset column
/// layout and matrix file in the toolkit. Files may list features in any
/// order; parsers join on these names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Feature {
    MaxWind,
    RainIntensity,
    Altitude,
    Slope,
    WindAngle,
    DesignWind,
    OpTime,
}

pub const FEATURES: [Feature; FEATURE_COUNT] = [
    Feature::MaxWind,
    Feature::RainIntensity,
    Feature::Altitude,
    Feature::Slope,
    Feature::WindAngle,
    Feature::DesignWind,
    Feature::OpTime,
];

impl Feature {
    pub fn name(self) -> &'static str {
        match self {
            Feature::MaxWind => "max_wind",
            Feature::RainIntensity => "rain_intensity",
            Feature::Altitude => "altitude",
            Feature::Slope => "slope",
            Feature::WindAngle => "wind_angle",
            Feature::DesignWind => "design_wind",
            Feature::OpTime => "op_time",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        FEATURES.iter().copied().find(|f| f.name() == name)
    }

    pub fn index(self) -> usize {
        FEATURES
            .iter()
            .position(|&f| f == self)
            .expect("feature in canonical list")
    }
}

/// Correlation direction of a feature with failure hazard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
}

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("feature {feature}: range must satisfy min < max, got [{min}, {max}]")]
    NondegenerateRangeRequired {
        feature: &'static str,
        min: f64,
        max: f64,
    },
    #[error("weight vector has {got} entries, expected {expected}")]
    WeightLength { got: usize, expected: usize },
    #[error("weights must be non-negative with a positive sum")]
    BadWeights,
}

/// Value range and hazard direction per feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRanges {
    ranges: [FeatureRange; FEATURE_COUNT],
}

impl FeatureRanges {
    /// Published reference ranges. Operation time carries a '-' sign here,
    /// following the explicit direction statement the defaults are drawn
    /// from; pass `op_time_positive = true` to flip it where local records
    /// show older corridors failing more often.
    pub fn standard(op_time_positive: bool) -> Self {
        let op_sign = if op_time_positive {
            Sign::Positive
        } else {
            Sign::Negative
        };
        let r = |min, max, sign| FeatureRange { min, max, sign };
        Self {
            ranges: [
                r(0.0, 60.0, Sign::Positive),    // max_wind, m/s
                r(0.0, 60.0, Sign::Positive),    // rain_intensity, mm/h
                r(-20.0, 150.0, Sign::Positive), // altitude, m
                r(0.0, 180.0, Sign::Positive),   // slope, deg
                r(0.0, 180.0, Sign::Positive),   // wind_angle, deg
                r(20.0, 50.0, Sign::Negative),   // design_wind, m/s
                r(0.0, 40.0, op_sign),           // op_time, years
            ],
        }
    }

    pub fn get(&self, feature: Feature) -> FeatureRange {
        self.ranges[feature.index()]
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        for (f, r) in FEATURES.iter().zip(&self.ranges) {
            if !(r.min < r.max) {
                return Err(FeatureError::NondegenerateRangeRequired {
                    feature: f.name(),
                    min: r.min,
                    max: r.max,
                });
            }
        }
        Ok(())
    }

    pub fn signs(&self) -> [Sign; FEATURE_COUNT] {
        let mut out = [Sign::Positive; FEATURE_COUNT];
        for (o, r) in out.iter_mut().zip(&self.ranges) {
            *o = r.sign;
        }
        out
    }
}

/// Raw (unnormalized) feature values of one tower-line unit, in canonical
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: [f64; FEATURE_COUNT],
}

impl FeatureVector {
    pub fn get(&self, feature: Feature) -> f64 {
        self.values[feature.index()]
    }
}

/// Normalized feature importance weights, in canonical order, summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub weights: [f64; FEATURE_COUNT],
}

impl WeightVector {
    pub fn new(raw: &[f64]) -> Result<Self, FeatureError> {
        if raw.len() != FEATURE_COUNT {
            return Err(FeatureError::WeightLength {
                got: raw.len(),
                expected: FEATURE_COUNT,
            });
        }
        let sum: f64 = raw.iter().sum();
        if raw.iter().any(|w| *w < 0.0 || !w.is_finite()) || sum <= 0.0 {
            return Err(FeatureError::BadWeights);
        }
        let mut weights = [0.0; FEATURE_COUNT];
        for (w, r) in weights.iter_mut().zip(raw) {
            *w = r / sum;
        }
        Ok(Self { weights })
    }

    pub fn uniform() -> Self {
        Self {
            weights: [1.0 / FEATURE_COUNT as f64; FEATURE_COUNT],
        }
    }
}

/// 10-minute rainfall intensity (mm/h) from a 24-hour rainfall total (mm).
pub fn rain_10min(r24h_mm: f64) -> f64 {
    debug_assert!(r24h_mm >= 0.0);
    if r24h_mm == 0.0 {
        return 0.0;
    }
    27.08 * r24h_mm.powf(0.6021)
}

/// Direction-aware range normalization onto [0, 1]; the input is clamped
/// into the range first. '+' features grow with hazard, '-' features use
/// the complement so that larger hazard still yields a larger value.
pub fn normalize(x: f64, range: FeatureRange) -> f64 {
    debug_assert!(range.min < range.max);
    let clamped = x.clamp(range.min, range.max);
    match range.sign {
        Sign::Positive => (clamped - range.min) / (range.max - range.min),
        Sign::Negative => (range.max - clamped) / (range.max - range.min),
    }
}

/// Normalize a whole vector against its ranges.
pub fn normalize_vector(v: &FeatureVector, ranges: &FeatureRanges) -> [f64; FEATURE_COUNT] {
    let mut out = [0.0; FEATURE_COUNT];
    for (i, f) in FEATURES.iter().enumerate() {
        out[i] = normalize(v.get(*f), ranges.get(*f));
    }
    out
}

/// Composite hazard score: weighted sum of normalized features.
pub fn composite_score(weights: &WeightVector, normalized: &[f64; FEATURE_COUNT]) -> f64 {
    weights
        .weights
        .iter()
        .zip(normalized)
        .map(|(w, x)| w * x)
        .sum()
}

/// Score range attainable over the feature cube: the weighted sum evaluated
/// at both boundary assignments. With the normalization above this is
/// (0, 1); kept as an operation so alternative normalizations stay usable.
pub fn score_bounds(
    weights: &WeightVector,
    ranges: &FeatureRanges,
) -> Result<(f64, f64), FeatureError> {
    ranges.validate()?;
    let at = |value: f64| {
        let v = [value; FEATURE_COUNT];
        composite_score(weights, &v)
    };
    let (a, b) = (at(0.0), at(1.0));
    Ok((a.min(b), a.max(b)))
}

pub const CORRECTION_MIN: f64 = 0.9;
pub const CORRECTION_MAX: f64 = 1.4;

/// Map a composite score onto the correction band [0.9, 1.4]. Scores outside
/// the bounds (possible only with unclamped inputs) are clamped with a
/// warning.
pub fn correction_coefficient(score: f64, bounds: (f64, f64)) -> f64 {
    let (lo, hi) = bounds;
    debug_assert!(lo < hi);
    if score < lo - 1e-12 || score > hi + 1e-12 {
        log::warn!("composite score {score} outside bounds [{lo}, {hi}]; clamping");
    }
    let w = score.clamp(lo, hi);
    let k = 0.5 * (w - lo) / (hi - lo) + CORRECTION_MIN;
    k.clamp(CORRECTION_MIN, CORRECTION_MAX)
}
