//! AHP-weighted arithmetic averaging over candidate weight schemes.
//!
//! An expert pairwise comparison matrix on the Saaty 1-9 scale yields a
//! feature priority vector (row geometric means by default, classic
//! column-normalization row averages behind a flag) plus a consistency
//! ratio. Each scheme's decision score is its weight row dotted with the
//! priority vector; the highest score wins.

use std::path::Path;

use crate::features::{Feature, WeightVector, FEATURES, FEATURE_COUNT};
use crate::importance::WeightScheme;

#[derive(Debug, thiserror::Error)]
pub enum AhpError {
    #[error("pairwise matrix is not reciprocal at ({i}, {j}): {a} vs {b}")]
    NonReciprocalMatrix { i: usize, j: usize, a: f64, b: f64 },
    #[error("pairwise matrix entry ({i}, {j}) = {value} outside the Saaty band [1/9, 9]")]
    OutOfScale { i: usize, j: usize, value: f64 },
    #[error("decision matrix has {got} columns, priority vector has {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: String, reason: String },
}

/// Reciprocal pairwise comparison matrix in canonical feature order.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix {
    entries: [[f64; FEATURE_COUNT]; FEATURE_COUNT],
}

const RECIPROCAL_TOL: f64 = 1e-9;

impl PairwiseMatrix {
    pub fn new(entries: [[f64; FEATURE_COUNT]; FEATURE_COUNT]) -> Result<Self, AhpError> {
        for (i, row) in entries.iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                if !(1.0 / 9.0 - 1e-12..=9.0 + 1e-12).contains(&a) {
                    return Err(AhpError::OutOfScale { i, j, value: a });
                }
                let b = entries[j][i];
                if (a * b - 1.0).abs() > RECIPROCAL_TOL * a.max(b).max(1.0) {
                    return Err(AhpError::NonReciprocalMatrix { i, j, a, b });
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    /// Parse a w x w grid with a feature-name header row and column.
    /// Fractions like "1/7" are accepted; rows and columns may come in any
    /// feature order and are permuted into the canonical one, so files
    /// written against a different ordering cannot silently misalign.
    pub fn from_csv(path: &Path) -> Result<Self, AhpError> {
        let display = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| AhpError::Io {
            path: display.clone(),
            source,
        })?;
        let bad = |reason: String| AhpError::Format {
            path: display.clone(),
            reason,
        };

        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
        let columns: Vec<&str> = header.split(',').skip(1).map(str::trim).collect();
        let col_map = feature_permutation(&columns).map_err(|reason| bad(reason))?;

        let mut entries = [[0.0; FEATURE_COUNT]; FEATURE_COUNT];
        let mut seen_rows = [false; FEATURE_COUNT];
        for line in lines {
            let mut parts = line.split(',').map(str::trim);
            let name = parts.next().unwrap_or_default();
            let row_feature = Feature::from_name(name)
                .ok_or_else(|| bad(format!("unknown feature {name:?} in row header")))?;
            let ri = row_feature.index();
            if seen_rows[ri] {
                return Err(bad(format!("duplicate row for {name}")));
            }
            seen_rows[ri] = true;
            let values: Vec<&str> = parts.collect();
            if values.len() != FEATURE_COUNT {
                return Err(bad(format!(
                    "row {name} has {} entries, expected {FEATURE_COUNT}",
                    values.len()
                )));
            }
            for (k, raw) in values.iter().enumerate() {
                entries[ri][col_map[k]] = parse_ratio(raw).map_err(|reason| bad(reason))?;
            }
        }
        if let Some(missing) = seen_rows.iter().position(|s| !s) {
            return Err(bad(format!("missing row for {}", FEATURES[missing].name())));
        }
        Self::new(entries)
    }
}

/// Map file column order onto canonical feature indices, requiring each
/// canonical feature exactly once.
pub(crate) fn feature_permutation(names: &[&str]) -> Result<Vec<usize>, String> {
    if names.len() != FEATURE_COUNT {
        return Err(format!(
            "expected {FEATURE_COUNT} feature columns, got {}",
            names.len()
        ));
    }
    let mut map = Vec::with_capacity(FEATURE_COUNT);
    let mut used = [false; FEATURE_COUNT];
    for name in names {
        let f =
            Feature::from_name(name).ok_or_else(|| format!("unknown feature column {name:?}"))?;
        if used[f.index()] {
            return Err(format!("duplicate feature column {name:?}"));
        }
        used[f.index()] = true;
        map.push(f.index());
    }
    Ok(map)
}

fn parse_ratio(raw: &str) -> Result<f64, String> {
    if let Some((num, den)) = raw.split_once('/') {
        let n: f64 = num
            .trim()
            .parse()
            .map_err(|_| format!("bad fraction {raw:?}"))?;
        let d: f64 = den
            .trim()
            .parse()
            .map_err(|_| format!("bad fraction {raw:?}"))?;
        if d == 0.0 {
            return Err(format!("zero denominator in {raw:?}"));
        }
        Ok(n / d)
    } else {
        raw.trim()
            .parse()
            .map_err(|_| format!("bad number {raw:?}"))
    }
}

/// How the priority vector is extracted from the pairwise matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AhpVariant {
    /// Row geometric means, normalized.
    #[default]
    GeometricMean,
    /// Normalize each column to unit sum, then average the rows.
    ColumnNormalization,
}

#[derive(Debug, Clone)]
pub struct Priority {
    pub weights: WeightVector,
    pub lambda_max: f64,
    pub consistency_ratio: f64,
}

/// Saaty random consistency indices for matrix sizes 1..=10.
const RANDOM_INDEX: [f64; 10] = [0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49];

/// Priority vector and consistency ratio of a reciprocal matrix. A ratio
/// above 0.10 signals an inconsistent expert matrix and is logged, not
/// rejected.
pub fn ahp_priority(matrix: &PairwiseMatrix, variant: AhpVariant) -> Priority {
    let w = FEATURE_COUNT;
    let mut q = [0.0; FEATURE_COUNT];
    match variant {
        AhpVariant::GeometricMean => {
            for i in 0..w {
                let log_sum: f64 = (0..w).map(|j| matrix.get(i, j).ln()).sum();
                q[i] = (log_sum / w as f64).exp();
            }
        }
        AhpVariant::ColumnNormalization => {
            let mut col_sum = [0.0; FEATURE_COUNT];
            for j in 0..w {
                col_sum[j] = (0..w).map(|i| matrix.get(i, j)).sum();
            }
            for i in 0..w {
                q[i] = (0..w).map(|j| matrix.get(i, j) / col_sum[j]).sum::<f64>() / w as f64;
            }
        }
    }
    let weights = WeightVector::new(&q).expect("positive entries");

    // lambda_max from the Rayleigh-style estimate over A q
    let lambda_max = (0..w)
        .map(|i| {
            let aq: f64 = (0..w).map(|j| matrix.get(i, j) * weights.weights[j]).sum();
            aq / weights.weights[i]
        })
        .sum::<f64>()
        / w as f64;
    let consistency_ratio = (lambda_max - w as f64) / ((w as f64 - 1.0) * RANDOM_INDEX[w - 1]);
    if consistency_ratio > 0.10 {
        log::warn!(
            "AHP consistency ratio {consistency_ratio:.3} exceeds 0.10; review the expert matrix"
        );
    }
    Priority {
        weights,
        lambda_max,
        consistency_ratio,
    }
}

/// Weighted-arithmetic-average decision scores: one score per scheme, the
/// scheme's weight row dotted with the priority vector.
pub fn waa_scores(schemes: &[WeightScheme], priority: &WeightVector) -> Result<Vec<f64>, AhpError> {
    schemes
        .iter()
        .map(|s| {
            if s.weights.weights.len() != priority.weights.len() {
                return Err(AhpError::DimensionMismatch {
                    got: s.weights.weights.len(),
                    expected: priority.weights.len(),
                });
            }
            Ok(s.weights
                .weights
                .iter()
                .zip(&priority.weights)
                .map(|(y, q)| y * q)
                .sum())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub score: f64,
    pub tied: bool,
}

/// Argmax over decision scores; ties break toward the lowest index and are
/// flagged.
pub fn select_scheme(scores: &[f64]) -> Selection {
    assert!(!scores.is_empty(), "selection needs at least one scheme");
    let mut best = 0usize;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    let tied = scores
        .iter()
        .enumerate()
        .any(|(i, s)| i != best && *s == scores[best]);
    Selection {
        index: best,
        score: scores[best],
        tied,
    }
}
