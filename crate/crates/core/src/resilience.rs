//! Impact-increment state enumeration (IISE) over corridor fault states.
//!
//! Expected load-shed impact is rewritten as a sum of probability-weighted
//! impact increments over low-order states, avoiding survival-probability
//! products: states of order 1..=J are enumerated, each one is priced by
//! the DC load-shedding program, and the increment of a state subtracts the
//! increments of all its proper non-empty subsets. At full order the sum
//! reproduces the exact expectation for any impact table, which is the
//! guard that recursion and weighting stay mutually consistent.
//!
//! Impacts depend only on the failed set, never on the scenario, so one
//! impact cache serves every scenario, every corridor hardening difference
//! and every strategy evaluation.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::case::{CorridorId, NetworkCase};
use crate::shed::{self, ShedError, ShedStatus};

/// Fault states are bitmasks over corridor positions in case order.
pub type StateMask = u64;

pub const MAX_CORRIDORS: usize = 64;

/// Per-scenario inputs to the resilience index: the scenario occurrence
/// probability and comprehensive corridor failure probabilities in case
/// order.
#[derive(Debug, Clone)]
pub struct ScenarioProbabilities {
    pub probability: f64,
    pub corridor_p: Vec<f64>,
}

/// Enumerated fault states with cached impacts and increments.
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub corridor_ids: Vec<CorridorId>,
    pub j_max: usize,
    /// Masks of every enumerated state, ordered by fault order then mask
    /// value; this order fixes all summations and keeps runs deterministic.
    pub masks: Vec<StateMask>,
    /// I(s) = shed(s) - shed(empty), MW; same indexing as `masks`.
    pub impacts: Vec<f64>,
    /// Impact increments per state; same indexing as `masks`.
    pub increments: Vec<f64>,
    pub base_shed_mw: f64,
    /// True when some state hit irreducible dispatch conflicts and was
    /// priced by full island shedding.
    pub degenerate_states: usize,
}

/// All corridor-subset masks with 1..=j_max bits, ordered by bit count then
/// numeric value.
pub fn enumerate_states(n_corridors: usize, j_max: usize) -> Vec<StateMask> {
    assert!(
        n_corridors <= MAX_CORRIDORS,
        "at most {MAX_CORRIDORS} corridors supported"
    );
    let j_max = j_max.min(n_corridors);
    let mut masks = Vec::new();
    for order in 1..=j_max {
        let mut combo: Vec<usize> = (0..order).collect();
        'combos: loop {
            masks.push(combo.iter().fold(0u64, |m, &b| m | (1 << b)));
            // advance to the next k-combination in lexicographic order
            let mut i = order;
            loop {
                if i == 0 {
                    break 'combos;
                }
                i -= 1;
                if combo[i] != n_corridors - order + i {
                    combo[i] += 1;
                    for j in i + 1..order {
                        combo[j] = combo[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
    masks.sort_unstable_by_key(|m| (m.count_ones(), *m));
    masks
}

fn mask_to_failed_set(
    mask: StateMask,
    ids: &[CorridorId],
) -> std::collections::BTreeSet<CorridorId> {
    ids.iter()
        .enumerate()
        .filter(|(bit, _)| mask & (1 << bit) != 0)
        .map(|(_, id)| *id)
        .collect()
}

/// Increment of `mask` given the increments of all lower-order states:
/// delta(s) = I(s) - sum over proper non-empty subsets of delta.
fn increment_of(mask: StateMask, impact: f64, known: &HashMap<StateMask, f64>) -> f64 {
    let mut delta = impact;
    // iterate proper non-empty subsets of mask
    let mut sub = (mask - 1) & mask;
    while sub != 0 {
        delta -= known
            .get(&sub)
            .copied()
            .expect("lower orders computed first");
        sub = (sub - 1) & mask;
    }
    delta
}

/// Enumerate states up to `j_max`, price every state with the load-shedding
/// program (in parallel, merged in deterministic order) and fold impacts
/// into increments order by order.
pub fn build_state_space(case: &NetworkCase, j_max: usize) -> Result<StateSpace, ShedError> {
    assert!(j_max >= 1, "enumeration order must be at least 1");
    let corridor_ids: Vec<CorridorId> = case.corridors.iter().map(|c| c.id).collect();
    let base = shed::min_load_shed(case, &std::collections::BTreeSet::new())?;
    let base_shed_mw = base.total_shed_mw;

    let masks = enumerate_states(corridor_ids.len(), j_max);
    let priced: Vec<Result<(f64, bool), ShedError>> = masks
        .par_iter()
        .map(|&mask| {
            let failed = mask_to_failed_set(mask, &corridor_ids);
            let sol = shed::min_load_shed(case, &failed)?;
            Ok((
                (sol.total_shed_mw - base_shed_mw).max(0.0),
                sol.status == ShedStatus::InfeasibleDegenerate,
            ))
        })
        .collect();

    let mut impacts = Vec::with_capacity(masks.len());
    let mut degenerate_states = 0usize;
    for r in priced {
        let (impact, degenerate) = r?;
        impacts.push(impact);
        degenerate_states += degenerate as usize;
    }

    // DC shedding can in rare meshed cases be non-monotone; such states are
    // reported, never silently dropped
    let impact_of: HashMap<StateMask, f64> =
        masks.iter().copied().zip(impacts.iter().copied()).collect();
    for (&mask, &impact) in masks.iter().zip(&impacts) {
        if mask.count_ones() != 2 {
            continue;
        }
        let (a, b) = (mask & mask.wrapping_neg(), mask & (mask - 1));
        let floor = impact_of[&a].max(impact_of[&b]);
        if impact < floor - 1e-6 {
            log::warn!(
                "non-monotone impact at state {mask:#b}: {impact:.3} MW below a subset's {floor:.3} MW"
            );
        }
    }

    let mut increments = Vec::with_capacity(masks.len());
    let mut known: HashMap<StateMask, f64> = HashMap::with_capacity(masks.len());
    for (&mask, &impact) in masks.iter().zip(&impacts) {
        let delta = increment_of(mask, impact, &known);
        known.insert(mask, delta);
        increments.push(delta);
    }

    Ok(StateSpace {
        corridor_ids,
        j_max: j_max.min(case.corridors.len()),
        masks,
        impacts,
        increments,
        base_shed_mw,
        degenerate_states,
    })
}

/// Build a state space from an external impact oracle instead of the LP;
/// used by tests and by synthetic-impact studies.
pub fn state_space_from_impacts(
    corridor_ids: Vec<CorridorId>,
    j_max: usize,
    mut impact: impl FnMut(StateMask) -> f64,
) -> StateSpace {
    let masks = enumerate_states(corridor_ids.len(), j_max);
    let impacts: Vec<f64> = masks.iter().map(|&m| impact(m)).collect();
    let mut increments = Vec::with_capacity(masks.len());
    let mut known = HashMap::with_capacity(masks.len());
    for (&mask, &i) in masks.iter().zip(&impacts) {
        let delta = increment_of(mask, i, &known);
        known.insert(mask, delta);
        increments.push(delta);
    }
    StateSpace {
        j_max: j_max.min(corridor_ids.len()),
        corridor_ids,
        masks,
        impacts,
        increments,
        base_shed_mw: 0.0,
        degenerate_states: 0,
    }
}

impl StateSpace {
    pub fn bit_of(&self, id: CorridorId) -> Option<usize> {
        self.corridor_ids.iter().position(|&c| c == id)
    }

    /// Probability-weighted contribution of one state across all scenarios.
    fn contribution(&self, idx: usize, scenarios: &[ScenarioProbabilities]) -> f64 {
        let mask = self.masks[idx];
        let delta = self.increments[idx];
        if delta == 0.0 {
            return 0.0;
        }
        let mut total = 0.0;
        for s in scenarios {
            let mut prod = s.probability;
            let mut bits = mask;
            while bits != 0 {
                let bit = bits.trailing_zeros() as usize;
                prod *= s.corridor_p[bit];
                bits &= bits - 1;
            }
            total += prod;
        }
        total * delta
    }

    /// System resilience index: scenario-expected impact over enumerated
    /// states, MW.
    pub fn r_sys(&self, scenarios: &[ScenarioProbabilities]) -> f64 {
        (0..self.masks.len())
            .map(|i| self.contribution(i, scenarios))
            .sum()
    }

    /// Index with every corridor of `hardened` made unfailable (p = 0):
    /// exactly the states disjoint from the hardened set survive the
    /// product weighting.
    pub fn r_sys_hardened(&self, scenarios: &[ScenarioProbabilities], hardened: StateMask) -> f64 {
        (0..self.masks.len())
            .filter(|&i| self.masks[i] & hardened == 0)
            .map(|i| self.contribution(i, scenarios))
            .sum()
    }

    /// Corridor index R_m = R_sys - R_sys(m hardened); summed directly over
    /// the states containing `bit` so no cancellation enters.
    pub fn r_corridor(&self, scenarios: &[ScenarioProbabilities], bit: usize) -> f64 {
        let m = 1u64 << bit;
        (0..self.masks.len())
            .filter(|&i| self.masks[i] & m != 0)
            .map(|i| self.contribution(i, scenarios))
            .sum()
    }

    /// Per-order totals (index j-1 = order j), the truncation diagnostic of
    /// a run: the highest order's share bounds what refinement would add.
    pub fn order_contributions(&self, scenarios: &[ScenarioProbabilities]) -> Vec<f64> {
        let mut orders = vec![0.0; self.j_max];
        for i in 0..self.masks.len() {
            let order = self.masks[i].count_ones() as usize;
            orders[order - 1] += self.contribution(i, scenarios);
        }
        orders
    }

    /// Contribution of each scenario to R_sys (same order as `scenarios`).
    pub fn per_scenario(&self, scenarios: &[ScenarioProbabilities]) -> Vec<f64> {
        scenarios
            .iter()
            .map(|s| {
                (0..self.masks.len())
                    .map(|i| self.contribution(i, std::slice::from_ref(s)))
                    .sum()
            })
            .collect()
    }
}

/// Exact expected impact by full enumeration of all 2^n states with
/// survival factors; the independent oracle for the IISE identity.
pub fn brute_force_expected_impact(
    probabilities: &[f64],
    mut impact: impl FnMut(StateMask) -> f64,
) -> f64 {
    let n = probabilities.len();
    assert!(n <= 24, "oracle is exponential; keep it small");
    let mut total = 0.0;
    for mask in 0u64..(1 << n) {
        let mut weight = 1.0;
        for (bit, p) in probabilities.iter().enumerate() {
            weight *= if mask & (1 << bit) != 0 { *p } else { 1.0 - p };
        }
        if weight > 0.0 {
            total += weight * impact(mask);
        }
    }
    total
}

#[derive(Debug, Clone)]
pub struct ResilienceReport {
    pub r_sys_mw: f64,
    /// (corridor, R_m) sorted descending by index, ties by id.
    pub corridor_indices: Vec<(CorridorId, f64)>,
    pub per_scenario_mw: Vec<f64>,
    pub order_contributions_mw: Vec<f64>,
    pub j_max: usize,
    pub scenario_count: usize,
    pub degenerate_states: usize,
}

/// Full corridor-level analysis: R_sys plus every R_m, sharing one state
/// space (hardening changes probabilities, not impacts, so the corridor
/// loop re-prices nothing).
pub fn assess(space: &StateSpace, scenarios: &[ScenarioProbabilities]) -> ResilienceReport {
    let r_sys = space.r_sys(scenarios);
    let mut corridor_indices: Vec<(CorridorId, f64)> = space
        .corridor_ids
        .iter()
        .enumerate()
        .map(|(bit, &id)| (id, space.r_corridor(scenarios, bit)))
        .collect();
    for (id, r_m) in &corridor_indices {
        if *r_m < -1e-9 {
            log::warn!("corridor {id} has a negative index {r_m:.3e} (non-monotone impacts)");
        }
    }
    corridor_indices.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    ResilienceReport {
        r_sys_mw: r_sys,
        corridor_indices,
        per_scenario_mw: space.per_scenario(scenarios),
        order_contributions_mw: space.order_contributions(scenarios),
        j_max: space.j_max,
        scenario_count: scenarios.len(),
        degenerate_states: space.degenerate_states,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn state_enumeration_counts() {
        let masks = enumerate_states(5, 2);
        assert_eq!(masks.len(), 5 + 10);
        assert!(masks.windows(2).all(|w| {
            let (a, b) = (w[0], w[1]);
            a.count_ones() < b.count_ones() || (a.count_ones() == b.count_ones() && a < b)
        }));
        // RTS-79 shape at J = 2
        assert_eq!(enumerate_states(38, 2).len(), 38 + 703);
        assert_eq!(enumerate_states(3, 5).len(), 7);
    }

    #[test]
    fn increment_examples() {
        // singleton base case and a two-element interaction
        let table: HashMap<StateMask, f64> = [(0b01, 10.0), (0b10, 20.0), (0b11, 50.0)]
            .into_iter()
            .collect();
        let space = state_space_from_impacts(vec![1, 2], 2, |m| table[&m]);
        assert_relative_eq!(space.increments[0], 10.0);
        assert_relative_eq!(space.increments[1], 20.0);
        assert_relative_eq!(space.increments[2], 20.0); // 50 - 10 - 20
    }

    #[test]
    fn additive_impacts_have_zero_higher_increments() {
        let costs = [3.0, 7.0, 11.0, 2.0];
        let space = state_space_from_impacts(vec![1, 2, 3, 4], 4, |m| {
            costs
                .iter()
                .enumerate()
                .filter(|(b, _)| m & (1 << b) != 0)
                .map(|(_, c)| c)
                .sum()
        });
        for (mask, delta) in space.masks.iter().zip(&space.increments) {
            if mask.count_ones() >= 2 {
                assert!(delta.abs() < 1e-12, "mask {mask:b} delta {delta}");
            }
        }
    }

    #[test]
    fn full_order_matches_brute_force() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(1..=5);
            let table: HashMap<StateMask, f64> = (0u64..(1 << n))
                .map(|m| {
                    (
                        m,
                        if m == 0 {
                            0.0
                        } else {
                            rng.gen_range(0.0..100.0)
                        },
                    )
                })
                .collect();
            let ps: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let space = state_space_from_impacts((1..=n as u32).collect(), n, |m| table[&m]);
            let scenarios = [ScenarioProbabilities {
                probability: 1.0,
                corridor_p: ps.clone(),
            }];
            let exact = brute_force_expected_impact(&ps, |m| table[&m]);
            assert_relative_eq!(space.r_sys(&scenarios), exact, epsilon = 1e-9);
        }
    }

    #[test]
    fn zero_probabilities_zero_index() {
        let space = state_space_from_impacts(vec![1, 2, 3], 3, |m| m.count_ones() as f64 * 5.0);
        let scenarios = [ScenarioProbabilities {
            probability: 1.0,
            corridor_p: vec![0.0, 0.0, 0.0],
        }];
        assert_eq!(space.r_sys(&scenarios), 0.0);
    }

    #[test]
    fn first_order_additivity_is_exact() {
        let space = state_space_from_impacts(vec![10, 20, 30, 40], 1, |m| {
            (m.count_ones() as f64) * 12.5 + (m as f64) * 0.25
        });
        let scenarios = [
            ScenarioProbabilities {
                probability: 0.6,
                corridor_p: vec![0.1, 0.2, 0.3, 0.4],
            },
            ScenarioProbabilities {
                probability: 0.4,
                corridor_p: vec![0.9, 0.01, 0.5, 0.7],
            },
        ];
        let r = space.r_sys(&scenarios);
        let sum: f64 = (0..4).map(|bit| space.r_corridor(&scenarios, bit)).sum();
        assert_eq!(r.to_bits(), sum.to_bits(), "bitwise additivity at J = 1");
    }

    #[test]
    fn hardening_difference_equals_direct_sum() {
        let mut rng = StdRng::seed_from_u64(11);
        let table: HashMap<StateMask, f64> = (0u64..32)
            .map(|m| {
                (
                    m,
                    if m == 0 {
                        0.0
                    } else {
                        rng.gen_range(0.0..50.0)
                    },
                )
            })
            .collect();
        let space = state_space_from_impacts(vec![1, 2, 3, 4, 5], 3, |m| table[&m]);
        let scenarios = [ScenarioProbabilities {
            probability: 1.0,
            corridor_p: (0..5).map(|_| rng.gen_range(0.0..0.5)).collect(),
        }];
        for bit in 0..5 {
            let direct = space.r_corridor(&scenarios, bit);
            let diff = space.r_sys(&scenarios) - space.r_sys_hardened(&scenarios, 1 << bit);
            // R_m can be negative on a non-monotone random table; only the
            // two computation routes must agree
            assert_relative_eq!(direct, diff, epsilon = 1e-12);
        }
    }

    #[test]
    fn lp_backed_space_on_triangle() {
        let data = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/toys");
        let case = crate::case::load_case(
            &data.join("triangle_buses.csv"),
            &data.join("triangle_generators.csv"),
            &data.join("triangle_corridors.csv"),
        )
        .unwrap();
        let space = build_state_space(&case, 3).unwrap();
        assert_eq!(space.base_shed_mw, 0.0);
        // single failure of the direct feed corridor sheds 40 MW
        let idx = space.masks.iter().position(|&m| m == 0b100).unwrap();
        assert_relative_eq!(space.impacts[idx], 40.0, epsilon = 1e-9);
        // full order matches brute force on LP impacts
        let ps = [0.2, 0.05, 0.3];
        let scenarios = [ScenarioProbabilities {
            probability: 1.0,
            corridor_p: ps.to_vec(),
        }];
        let impact_table: HashMap<StateMask, f64> = space
            .masks
            .iter()
            .zip(&space.impacts)
            .map(|(&m, &i)| (m, i))
            .chain(std::iter::once((0u64, 0.0)))
            .collect();
        let exact = brute_force_expected_impact(&ps, |m| impact_table[&m]);
        assert_relative_eq!(space.r_sys(&scenarios), exact, epsilon = 1e-9);
    }

    #[test]
    fn truncation_small_on_low_probability_toys() {
        let data = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/toys");
        for name in ["triangle", "diamond"] {
            let case = crate::case::load_case(
                &data.join(format!("{name}_buses.csv")),
                &data.join(format!("{name}_generators.csv")),
                &data.join(format!("{name}_corridors.csv")),
            )
            .unwrap();
            let n = case.corridors.len();
            let full = build_state_space(&case, n).unwrap();
            let truncated = build_state_space(&case, 2).unwrap();
            let ps: Vec<f64> = (0..n)
                .map(|i| 0.02 + 0.08 * (i as f64 / n as f64))
                .collect();
            assert!(ps.iter().all(|p| *p <= 0.1));
            let scenarios = [ScenarioProbabilities {
                probability: 1.0,
                corridor_p: ps.clone(),
            }];
            let exact = full.r_sys(&scenarios);
            let approx_r = truncated.r_sys(&scenarios);
            assert!(
                (approx_r - exact).abs() <= 0.05 * exact.abs().max(1e-12),
                "{name}: J=2 {approx_r} vs exact {exact}"
            );
        }
    }
}
