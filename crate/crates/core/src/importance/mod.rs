//! Feature-importance weight schemes learned from a labelled fault /
//! no-fault corpus: random-forest Gini importance, out-of-bag permutation
//! importance and the entropy weight method, plus a seeded synthetic
//! dataset generator standing in for field records.

mod tree;

pub use tree::{gini, DecisionTree, TreeConfig};

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::features::{FeatureRanges, Sign, WeightVector, FEATURES, FEATURE_COUNT};

#[derive(Debug, thiserror::Error)]
pub enum ImportanceError {
    #[error("dataset needs at least two rows, got {0}")]
    TooSmall(usize),
    #[error("dataset contains a single class only; forest training needs both labels")]
    SingleClassDataset,
    #[error("tree {tree} has an empty out-of-bag set; use fewer trees or more rows")]
    EmptyOutOfBag { tree: usize },
    #[error("every indicator column is constant; entropy weights are undefined")]
    AllColumnsConstant,
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}: missing feature column {name:?}")]
    MissingColumn { path: String, name: &'static str },
    #[error("{path}: row {row}: label must be 0 or 1, got {value}")]
    BadLabel {
        path: String,
        row: usize,
        value: f64,
    },
    #[error("label balancing did not converge; seed {seed} size {size}")]
    BalanceFailed { seed: u64, size: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    File(String),
    Synthetic { seed: u64 },
}

/// Labelled feature rows in canonical column order.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn label_balance(&self) -> f64 {
        if self.labels.is_empty() {
            return 0.0;
        }
        self.labels.iter().map(|&l| l as usize).sum::<usize>() as f64 / self.labels.len() as f64
    }

    /// Load from a delimiter-separated file with the seven canonical
    /// feature columns (any order) and a 0/1 `label` column.
    pub fn from_csv(path: &Path) -> Result<Self, ImportanceError> {
        let display = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ImportanceError::Io {
            path: display.clone(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|source| ImportanceError::Csv {
                path: display.clone(),
                source,
            })?
            .clone();
        let mut order = Vec::with_capacity(FEATURE_COUNT);
        for f in FEATURES {
            let idx = headers.iter().position(|h| h == f.name()).ok_or(
                ImportanceError::MissingColumn {
                    path: display.clone(),
                    name: f.name(),
                },
            )?;
            order.push(idx);
        }
        let label_idx =
            headers
                .iter()
                .position(|h| h == "label")
                .ok_or(ImportanceError::MissingColumn {
                    path: display.clone(),
                    name: "label",
                })?;

        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (r, record) in reader.records().enumerate() {
            let record = record.map_err(|source| ImportanceError::Csv {
                path: display.clone(),
                source,
            })?;
            let parse = |i: usize| -> Result<f64, ImportanceError> {
                record[i].parse::<f64>().map_err(|_| ImportanceError::Csv {
                    path: display.clone(),
                    source: csv::Error::from(std::io::Error::new(
                        std::io::ErrorKind::InvalidData,
                        format!("row {}: bad number {:?}", r + 1, &record[i]),
                    )),
                })
            };
            rows.push(
                order
                    .iter()
                    .map(|&i| parse(i))
                    .collect::<Result<Vec<f64>, _>>()?,
            );
            let label = parse(label_idx)?;
            if label != 0.0 && label != 1.0 {
                return Err(ImportanceError::BadLabel {
                    path: display,
                    row: r + 1,
                    value: label,
                });
            }
            labels.push(label as u8);
        }
        if rows.len() < 2 {
            return Err(ImportanceError::TooSmall(rows.len()));
        }
        Ok(Dataset {
            rows,
            labels,
            provenance: Provenance::File(display),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Gini,
    Oob,
    Entropy,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Gini => "gini",
            SchemeKind::Oob => "oob",
            SchemeKind::Entropy => "entropy",
        }
    }
}

#[derive(Debug, Clone)]
pub struct WeightScheme {
    pub kind: SchemeKind,
    pub weights: WeightVector,
}

/// How the out-of-bag "noise" is injected per feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OobMode {
    /// Permute the column within the out-of-bag rows (default).
    Permute,
    /// Add seeded Gaussian noise scaled to the column's deviation.
    Gaussian,
}

#[derive(Debug, Clone, Copy)]
pub struct ForestConfig {
    pub trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub seed: u64,
    pub oob_mode: OobMode,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            trees: 50,
            max_depth: None,
            min_leaf: 1,
            seed: 0,
            oob_mode: OobMode::Permute,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedTree {
    pub tree: DecisionTree,
    pub bootstrap: Vec<usize>,
    pub oob: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub trees: Vec<TrainedTree>,
    seed: u64,
}

fn tree_seed(seed: u64, index: u64, stream: u64) -> u64 {
    // splitmix-style decorrelation of per-tree and per-feature streams
    let mut z = seed ^ (index.wrapping_mul(0x9E3779B97F4A7C15)) ^ (stream << 32);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Train `config.trees` CART trees on bootstrap samples with sqrt(m)
/// feature subsampling per split; fully deterministic given the seed.
pub fn train_forest(data: &Dataset, config: &ForestConfig) -> Result<Forest, ImportanceError> {
    if data.len() < 2 {
        return Err(ImportanceError::TooSmall(data.len()));
    }
    let has = |l: u8| data.labels.iter().any(|&x| x == l);
    if !has(0) || !has(1) {
        return Err(ImportanceError::SingleClassDataset);
    }
    let n = data.len();
    let m = data.rows[0].len();
    let mtry = (m as f64).sqrt().floor().max(1.0) as usize;
    let tree_config = TreeConfig {
        max_depth: config.max_depth,
        min_leaf: config.min_leaf,
        mtry,
    };

    let trees: Vec<TrainedTree> = (0..config.trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(tree_seed(config.seed, t as u64, 0));
            let mut drawn = vec![false; n];
            let bootstrap: Vec<usize> = (0..n)
                .map(|_| {
                    let i = rng.gen_range(0..n);
                    drawn[i] = true;
                    i
                })
                .collect();
            let oob: Vec<usize> = (0..n).filter(|&i| !drawn[i]).collect();
            let tree =
                DecisionTree::fit(&data.rows, &data.labels, &bootstrap, tree_config, &mut rng);
            TrainedTree {
                tree,
                bootstrap,
                oob,
            }
        })
        .collect();

    if let Some(t) = trees.iter().position(|t| t.oob.is_empty()) {
        return Err(ImportanceError::EmptyOutOfBag { tree: t });
    }
    Ok(Forest {
        trees,
        seed: config.seed,
    })
}

fn normalize_or_uniform(raw: Vec<f64>, kind: SchemeKind) -> WeightScheme {
    let floored: Vec<f64> = raw.into_iter().map(|w| w.max(0.0)).collect();
    let sum: f64 = floored.iter().sum();
    let weights = if sum > 0.0 {
        WeightVector::new(&floored).expect("non-negative with positive sum")
    } else {
        log::warn!(
            "{} importances vanished; falling back to uniform weights",
            kind.name()
        );
        WeightVector::uniform()
    };
    WeightScheme { kind, weights }
}

/// Mean decrease in node impurity: per-tree sums of node-fraction-weighted
/// Gini decreases, averaged over trees and normalized to sum to one.
pub fn gini_importance(forest: &Forest) -> WeightScheme {
    let m = forest.trees[0].tree.n_features;
    let mut acc = vec![0.0; m];
    for t in &forest.trees {
        for (a, v) in acc.iter_mut().zip(t.tree.feature_importances()) {
            *a += v;
        }
    }
    for a in &mut acc {
        *a /= forest.trees.len() as f64;
    }
    normalize_or_uniform(acc, SchemeKind::Gini)
}

fn tree_error(tree: &DecisionTree, data: &Dataset, rows: &[usize]) -> f64 {
    let wrong = rows
        .iter()
        .filter(|&&i| tree.predict(&data.rows[i]) != data.labels[i])
        .count();
    wrong as f64 / rows.len() as f64
}

/// Out-of-bag error of one tree with column `feature` rewired through
/// `mapping` (OOB position -> OOB position used for that column).
fn permuted_error(
    tree: &DecisionTree,
    data: &Dataset,
    oob: &[usize],
    feature: usize,
    mapping: &[usize],
) -> f64 {
    let mut wrong = 0usize;
    let mut row = Vec::new();
    for (pos, &i) in oob.iter().enumerate() {
        row.clear();
        row.extend_from_slice(&data.rows[i]);
        row[feature] = data.rows[oob[mapping[pos]]][feature];
        if tree.predict(&row) != data.labels[i] {
            wrong += 1;
        }
    }
    wrong as f64 / oob.len() as f64
}

fn noised_error(
    tree: &DecisionTree,
    data: &Dataset,
    oob: &[usize],
    feature: usize,
    rng: &mut impl Rng,
) -> f64 {
    let mean = oob.iter().map(|&i| data.rows[i][feature]).sum::<f64>() / oob.len() as f64;
    let var = oob
        .iter()
        .map(|&i| (data.rows[i][feature] - mean).powi(2))
        .sum::<f64>()
        / oob.len() as f64;
    let std = var.sqrt();
    let mut wrong = 0usize;
    let mut row = Vec::new();
    for &i in oob {
        row.clear();
        row.extend_from_slice(&data.rows[i]);
        // Box-Muller keeps the dependency surface small
        let (u1, u2): (f64, f64) = (rng.gen_range(1e-12..1.0), rng.gen());
        let gauss = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        row[feature] += std * gauss;
        if tree.predict(&row) != data.labels[i] {
            wrong += 1;
        }
    }
    wrong as f64 / oob.len() as f64
}

/// Permutation importance: mean over trees of the out-of-bag error increase
/// after rewiring each feature, floored at zero and normalized.
pub fn oob_importance(
    forest: &Forest,
    data: &Dataset,
    mode: OobMode,
) -> Result<WeightScheme, ImportanceError> {
    let m = forest.trees[0].tree.n_features;
    let raw: Vec<Vec<f64>> = forest
        .trees
        .par_iter()
        .enumerate()
        .map(|(t, trained)| {
            let baseline = tree_error(&trained.tree, data, &trained.oob);
            (0..m)
                .map(|f| {
                    let mut rng =
                        ChaCha8Rng::seed_from_u64(tree_seed(forest.seed, t as u64, 1 + f as u64));
                    let e2 = match mode {
                        OobMode::Permute => {
                            let mut mapping: Vec<usize> = (0..trained.oob.len()).collect();
                            mapping.shuffle(&mut rng);
                            permuted_error(&trained.tree, data, &trained.oob, f, &mapping)
                        }
                        OobMode::Gaussian => {
                            noised_error(&trained.tree, data, &trained.oob, f, &mut rng)
                        }
                    };
                    e2 - baseline
                })
                .collect()
        })
        .collect();

    let mut acc = vec![0.0; m];
    for per_tree in &raw {
        for (a, v) in acc.iter_mut().zip(per_tree) {
            *a += v;
        }
    }
    for a in &mut acc {
        *a /= forest.trees.len() as f64;
    }
    Ok(normalize_or_uniform(acc, SchemeKind::Oob))
}

/// Entropy weight method over an n x m indicator matrix. Columns are
/// normalized direction-aware against their own data range; constant
/// columns carry maximum entropy (weight zero); zero shares contribute
/// nothing to the entropy sum.
pub fn entropy_weights_matrix(
    matrix: &[Vec<f64>],
    signs: &[Sign],
) -> Result<Vec<f64>, ImportanceError> {
    let n = matrix.len();
    if n < 2 {
        return Err(ImportanceError::TooSmall(n));
    }
    let m = signs.len();
    let k = 1.0 / (n as f64).ln();
    let mut entropy = vec![1.0; m];
    for j in 0..m {
        let column: Vec<f64> = matrix.iter().map(|r| r[j]).collect();
        let (min, max) = column
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        if min == max {
            continue; // constant indicator: maximum entropy, weight zero
        }
        let normalized: Vec<f64> = column
            .iter()
            .map(|&x| match signs[j] {
                Sign::Positive => (x - min) / (max - min),
                Sign::Negative => (max - x) / (max - min),
            })
            .collect();
        let total: f64 = normalized.iter().sum();
        let mut e = 0.0;
        for &v in &normalized {
            if v > 0.0 {
                let share = v / total;
                e -= share * share.ln();
            }
        }
        entropy[j] = k * e;
    }
    let denom: f64 = entropy.iter().map(|e| 1.0 - e).sum();
    if denom <= 1e-15 {
        return Err(ImportanceError::AllColumnsConstant);
    }
    Ok(entropy.iter().map(|e| (1.0 - e) / denom).collect())
}

/// Entropy weights of a dataset's feature columns as a scheme.
pub fn entropy_weights(
    data: &Dataset,
    ranges: &FeatureRanges,
) -> Result<WeightScheme, ImportanceError> {
    let weights = entropy_weights_matrix(&data.rows, &ranges.signs())?;
    Ok(WeightScheme {
        kind: SchemeKind::Entropy,
        weights: WeightVector::new(&weights).expect("normalized by construction"),
    })
}

/// Logistic-link label sharpness for the synthetic generator.
const SYNTH_SHARPNESS: f64 = 10.0;
const BALANCE_BAND: (f64, f64) = (0.45, 0.55);

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Seeded stand-in for a field corpus: features uniform over the reference
/// ranges, labels Bernoulli through a logistic link on the planted
/// composite score. The intercept is tuned by bisection for a balanced
/// corpus and draws are repeated deterministically until the empirical
/// balance lands inside the band.
pub fn synthesize_dataset(
    seed: u64,
    size: usize,
    planted: &WeightVector,
    ranges: &FeatureRanges,
) -> Result<Dataset, ImportanceError> {
    assert!(size >= 10, "synthetic datasets start at 10 rows");
    let mut rng = ChaCha8Rng::seed_from_u64(tree_seed(seed, 0, 2));
    let mut rows = Vec::with_capacity(size);
    let mut scores = Vec::with_capacity(size);
    for _ in 0..size {
        let mut row = Vec::with_capacity(FEATURE_COUNT);
        for f in FEATURES {
            let r = ranges.get(f);
            row.push(rng.gen_range(r.min..r.max));
        }
        let normalized = crate::features::normalize_vector(
            &crate::features::FeatureVector {
                values: row.clone().try_into().expect("seven features"),
            },
            ranges,
        );
        scores.push(crate::features::composite_score(planted, &normalized));
        rows.push(row);
    }

    // intercept calibration: mean predicted probability = 1/2
    let mean_prob = |b: f64| {
        scores
            .iter()
            .map(|w| sigmoid(SYNTH_SHARPNESS * w + b))
            .sum::<f64>()
            / size as f64
    };
    let (mut lo, mut hi) = (-40.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_prob(mid) < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let intercept = 0.5 * (lo + hi);

    for attempt in 0..100u64 {
        let mut label_rng = ChaCha8Rng::seed_from_u64(tree_seed(seed, attempt, 3));
        let labels: Vec<u8> = scores
            .iter()
            .map(|w| (label_rng.gen::<f64>() < sigmoid(SYNTH_SHARPNESS * w + intercept)) as u8)
            .collect();
        let balance = labels.iter().map(|&l| l as usize).sum::<usize>() as f64 / size as f64;
        if (BALANCE_BAND.0..=BALANCE_BAND.1).contains(&balance) {
            return Ok(Dataset {
                rows,
                labels,
                provenance: Provenance::Synthetic { seed },
            });
        }
    }
    Err(ImportanceError::BalanceFailed { seed, size })
}

/// Three-scheme bundle in the fixed (gini, oob, entropy) order.
pub fn all_schemes(
    data: &Dataset,
    config: &ForestConfig,
    ranges: &FeatureRanges,
) -> Result<Vec<WeightScheme>, ImportanceError> {
    let forest = train_forest(data, config)?;
    Ok(vec![
        gini_importance(&forest),
        oob_importance(&forest, data, config.oob_mode)?,
        entropy_weights(data, ranges)?,
    ])
}
