//! Hardening strategy evaluation and ranking.
//!
//! A strategy names the corridors to reinforce. Its resilience improvement
//! RE is the drop in the system index when those corridors are hardened;
//! cost is geographic length times a per-km rate. Strategies rank by
//! ascending cost per percentage point of improvement, with the target
//! check R_sys - RE <= R_set flagged per row.

use std::path::Path;

use crate::case::{CorridorId, NetworkCase};
use crate::resilience::{ScenarioProbabilities, StateSpace};

#[derive(Debug, thiserror::Error)]
pub enum StrategyError {
    #[error("strategy {name}: unknown corridor {corridor}")]
    UnknownCorridor { name: String, corridor: CorridorId },
    #[error("strategy {name} lists no corridors")]
    EmptyStrategy { name: String },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {source}")]
    Csv { path: String, source: csv::Error },
}

/// How hardening acts on a corridor's failure probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HardeningMode {
    /// Reinforced corridors cannot fail (p = 0); reproduces the identity
    /// RE(single corridor) = that corridor's index.
    #[default]
    Immunize,
    /// A backup corridor in parallel: both circuits must fail (p -> p^2).
    ParallelRedundancy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    pub name: String,
    pub corridors: Vec<CorridorId>,
}

#[derive(Debug, Clone)]
pub struct StrategyResult {
    pub name: String,
    pub corridors: Vec<CorridorId>,
    /// Reinforcement cost, $.
    pub cost: f64,
    /// Resilience improvement, MW.
    pub re_mw: f64,
    /// Improvement as a percentage of the baseline index.
    pub delta_re_pct: f64,
    /// Cost per percentage point, $.
    pub cost_per_pct: f64,
    /// Index after hardening, MW.
    pub post_index_mw: f64,
    pub meets_target: bool,
}

/// Parse a strategies file: (name, comma-separated corridor ids).
pub fn load_strategies(path: &Path) -> Result<Vec<Strategy>, StrategyError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| StrategyError::Io {
        path: display.clone(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut strategies = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|source| StrategyError::Csv {
            path: display.clone(),
            source,
        })?;
        let name = record.get(0).unwrap_or_default().to_string();
        let ids: Vec<CorridorId> = record
            .get(1)
            .unwrap_or_default()
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim().parse().map_err(|_| StrategyError::Csv {
                    path: display.clone(),
                    source: csv::Error::from(std::io::Error::new(
                        std::io::ErrorKind::InvalidData,
                        format!("strategy {name}: bad corridor id {s:?}"),
                    )),
                })
            })
            .collect::<Result<_, _>>()?;
        if ids.is_empty() {
            return Err(StrategyError::EmptyStrategy { name });
        }
        strategies.push(Strategy {
            name,
            corridors: ids,
        });
    }
    Ok(strategies)
}

/// Scenario probabilities with `p -> p^2` applied to the strategy set.
fn redundancy_scenarios(
    scenarios: &[ScenarioProbabilities],
    bits: &[usize],
) -> Vec<ScenarioProbabilities> {
    scenarios
        .iter()
        .map(|s| {
            let mut p = s.corridor_p.clone();
            for &b in bits {
                p[b] *= p[b];
            }
            ScenarioProbabilities {
                probability: s.probability,
                corridor_p: p,
            }
        })
        .collect()
}

/// Evaluate one strategy against the baseline index, sharing the impact
/// cache (hardening changes probabilities, never impacts).
pub fn evaluate_strategy(
    strategy: &Strategy,
    case: &NetworkCase,
    space: &StateSpace,
    scenarios: &[ScenarioProbabilities],
    baseline_r_sys: f64,
    cost_rate_per_km: f64,
    r_set_mw: f64,
    mode: HardeningMode,
) -> Result<StrategyResult, StrategyError> {
    if strategy.corridors.is_empty() {
        return Err(StrategyError::EmptyStrategy {
            name: strategy.name.clone(),
        });
    }
    let mut mask = 0u64;
    let mut bits = Vec::with_capacity(strategy.corridors.len());
    let mut cost = 0.0;
    for &id in &strategy.corridors {
        let corridor = case.corridor(id).ok_or(StrategyError::UnknownCorridor {
            name: strategy.name.clone(),
            corridor: id,
        })?;
        let bit = space.bit_of(id).ok_or(StrategyError::UnknownCorridor {
            name: strategy.name.clone(),
            corridor: id,
        })?;
        mask |= 1 << bit;
        bits.push(bit);
        cost += corridor.length_km * cost_rate_per_km;
    }

    let hardened_index = match mode {
        HardeningMode::Immunize => space.r_sys_hardened(scenarios, mask),
        HardeningMode::ParallelRedundancy => space.r_sys(&redundancy_scenarios(scenarios, &bits)),
    };
    let re_mw = baseline_r_sys - hardened_index;
    let delta_re_pct = if baseline_r_sys != 0.0 {
        100.0 * re_mw / baseline_r_sys
    } else {
        0.0
    };
    let cost_per_pct = if delta_re_pct != 0.0 {
        cost / delta_re_pct
    } else {
        f64::INFINITY
    };
    Ok(StrategyResult {
        name: strategy.name.clone(),
        corridors: strategy.corridors.clone(),
        cost,
        re_mw,
        delta_re_pct,
        cost_per_pct,
        post_index_mw: hardened_index,
        meets_target: hardened_index <= r_set_mw,
    })
}

/// Order by ascending cost-effectiveness ratio, ties by lower cost then
/// name; entries missing the target stay in the ranking, flagged.
pub fn rank_strategies(mut results: Vec<StrategyResult>) -> Vec<StrategyResult> {
    results.sort_by(|a, b| {
        a.cost_per_pct
            .partial_cmp(&b.cost_per_pct)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                a.cost
                    .partial_cmp(&b.cost)
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
            .then(a.name.cmp(&b.name))
    });
    results
}

/// Per-metric normalization against the column maximum (cost, RE, delta RE,
/// cost-effectiveness), for the comparison bar chart export.
pub fn normalized_metrics(results: &[StrategyResult]) -> Vec<[f64; 4]> {
    let max =
        |f: fn(&StrategyResult) -> f64| results.iter().map(f).fold(0.0f64, |a, b| a.max(b.abs()));
    let maxes = [
        max(|r| r.cost),
        max(|r| r.re_mw),
        max(|r| r.delta_re_pct),
        max(|r| {
            if r.cost_per_pct.is_finite() {
                r.cost_per_pct
            } else {
                0.0
            }
        }),
    ];
    results
        .iter()
        .map(|r| {
            let vals = [r.cost, r.re_mw, r.delta_re_pct, r.cost_per_pct];
            let mut out = [0.0; 4];
            for (o, (v, m)) in out.iter_mut().zip(vals.iter().zip(&maxes)) {
                *o = if *m > 0.0 && v.is_finite() {
                    v / m
                } else {
                    0.0
                };
            }
            out
        })
        .collect()
}
