//! Minimum load shedding under DC power flow: the impact function behind
//! every resilience index.
//!
//! A contingency removes whole corridors. The surviving graph splits into
//! islands; each island solves a linear program minimizing total shed
//! subject to nodal balance, angle-driven corridor flows within limits and
//! generator dispatch bounds, with one reference angle per island. Islands
//! without generation shed everything.

use std::collections::{BTreeSet, HashMap};

use crate::case::{BusId, CorridorId, NetworkCase};
use crate::lp::{ConstraintOp, LinearProgram, LpError};

/// System base power used to turn per-unit reactances into MW-per-radian
/// susceptances.
pub const BASE_MVA: f64 = 100.0;

/// Tolerance for the post-solve feasibility audit, MW.
pub const FEASIBILITY_TOL_MW: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShedStatus {
    Optimal,
    /// At least one island had irreducibly conflicting dispatch bounds
    /// (possible only with non-zero minimum generation); its entire load is
    /// counted as shed.
    InfeasibleDegenerate,
}

#[derive(Debug, Clone)]
pub struct SheddingSolution {
    pub total_shed_mw: f64,
    /// Shed per load bus, case bus order (zero-load buses omitted).
    pub shed_by_bus: Vec<(BusId, f64)>,
    /// Dispatch per generator, case generator order.
    pub dispatch_mw: Vec<f64>,
    /// Flow per surviving corridor, case corridor order, from->to positive.
    pub flows_mw: Vec<(CorridorId, f64)>,
    pub islands: Vec<Vec<BusId>>,
    pub status: ShedStatus,
}

#[derive(Debug, thiserror::Error)]
pub enum ShedError {
    #[error("load shedding failed for state {{{state}}}: {source}")]
    Numeric { state: String, source: LpError },
    #[error("unknown corridor id {0} in contingency state")]
    UnknownCorridor(CorridorId),
}

fn state_label(failed: &BTreeSet<CorridorId>) -> String {
    failed
        .iter()
        .map(|id| id.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Connected components of the surviving corridor graph, each sorted by bus
/// id, components ordered by their smallest bus.
pub fn islands(case: &NetworkCase, failed: &BTreeSet<CorridorId>) -> Vec<Vec<BusId>> {
    let mut adjacency: HashMap<BusId, Vec<BusId>> = HashMap::new();
    for c in &case.corridors {
        if failed.contains(&c.id) {
            continue;
        }
        adjacency.entry(c.from_bus).or_default().push(c.to_bus);
        adjacency.entry(c.to_bus).or_default().push(c.from_bus);
    }
    let mut seen: BTreeSet<BusId> = BTreeSet::new();
    let mut components = Vec::new();
    for bus in case.buses.iter().map(|b| b.id) {
        if seen.contains(&bus) {
            continue;
        }
        let mut component = vec![bus];
        seen.insert(bus);
        let mut stack = vec![bus];
        while let Some(b) = stack.pop() {
            for &next in adjacency.get(&b).into_iter().flatten() {
                if seen.insert(next) {
                    component.push(next);
                    stack.push(next);
                }
            }
        }
        component.sort_unstable();
        components.push(component);
    }
    components.sort_by_key(|c| c[0]);
    components
}

/// Minimum total load shed for the contingency `failed`. Solves one LP per
/// island; a numeric failure is retried once with a different reference bus
/// and then reported with the state id rather than skipped.
pub fn min_load_shed(
    case: &NetworkCase,
    failed: &BTreeSet<CorridorId>,
) -> Result<SheddingSolution, ShedError> {
    for id in failed {
        if case.corridor(*id).is_none() {
            return Err(ShedError::UnknownCorridor(*id));
        }
    }
    let islands = islands(case, failed);
    let mut solution = SheddingSolution {
        total_shed_mw: 0.0,
        shed_by_bus: case
            .buses
            .iter()
            .filter(|b| b.load_mw > 0.0)
            .map(|b| (b.id, 0.0))
            .collect(),
        dispatch_mw: vec![0.0; case.generators.len()],
        flows_mw: case
            .corridors
            .iter()
            .filter(|c| !failed.contains(&c.id))
            .map(|c| (c.id, 0.0))
            .collect(),
        islands: islands.clone(),
        status: ShedStatus::Optimal,
    };

    for island in &islands {
        solve_island(case, failed, island, &mut solution)?;
    }
    solution.total_shed_mw = solution.shed_by_bus.iter().map(|(_, s)| s).sum();
    if log::log_enabled!(log::Level::Debug) {
        log::debug!("{}", solution.debug_dump(case, failed));
    }
    Ok(solution)
}

fn solve_island(
    case: &NetworkCase,
    failed: &BTreeSet<CorridorId>,
    island: &[BusId],
    out: &mut SheddingSolution,
) -> Result<(), ShedError> {
    let in_island = |b: BusId| island.binary_search(&b).is_ok();
    let gens: Vec<usize> = case
        .generators
        .iter()
        .enumerate()
        .filter(|(_, g)| in_island(g.bus))
        .map(|(i, _)| i)
        .collect();
    let loads: Vec<usize> = case
        .buses
        .iter()
        .enumerate()
        .filter(|(_, b)| in_island(b.id) && b.load_mw > 0.0)
        .map(|(i, _)| i)
        .collect();
    let corridors: Vec<usize> = case
        .corridors
        .iter()
        .enumerate()
        .filter(|(_, c)| !failed.contains(&c.id) && in_island(c.from_bus))
        .map(|(i, _)| i)
        .collect();

    let island_load: f64 = loads.iter().map(|&i| case.buses[i].load_mw).sum();
    let capacity: f64 = gens.iter().map(|&i| case.generators[i].pmax_mw).sum();
    if gens.is_empty() || capacity <= 0.0 {
        // unsupplied island: everything is shed
        shed_everything(case, &loads, out);
        return Ok(());
    }
    if island_load == 0.0 && gens.iter().all(|&i| case.generators[i].pmin_mw <= 0.0) {
        return Ok(()); // nothing to balance
    }

    match island_lp(case, island, &gens, &loads, &corridors, false) {
        Ok(sol) => apply_island_solution(case, &gens, &loads, &corridors, &sol, out),
        Err(LpError::Infeasible) => {
            // irreducible minimum-generation conflict
            out.status = ShedStatus::InfeasibleDegenerate;
            shed_everything(case, &loads, out);
        }
        Err(first) => {
            // retry with a perturbed (different) reference bus
            match island_lp(case, island, &gens, &loads, &corridors, true) {
                Ok(sol) => apply_island_solution(case, &gens, &loads, &corridors, &sol, out),
                Err(_) => {
                    return Err(ShedError::Numeric {
                        state: state_label(failed),
                        source: first,
                    })
                }
            }
        }
    }
    Ok(())
}

fn shed_everything(case: &NetworkCase, loads: &[usize], out: &mut SheddingSolution) {
    for &i in loads {
        let bus = &case.buses[i];
        if let Some(entry) = out.shed_by_bus.iter_mut().find(|(id, _)| *id == bus.id) {
            entry.1 = bus.load_mw;
        }
    }
}

struct IslandSolution {
    shed: Vec<f64>,
    dispatch: Vec<f64>,
    theta: HashMap<BusId, f64>,
}

/// Column layout: theta+ / theta- per island bus, then dispatch per
/// generator, then shed per load bus.
fn island_lp(
    case: &NetworkCase,
    island: &[BusId],
    gens: &[usize],
    loads: &[usize],
    corridors: &[usize],
    alternate_reference: bool,
) -> Result<IslandSolution, LpError> {
    let nb = island.len();
    let bus_col: HashMap<BusId, usize> = island.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let gen_base = 2 * nb;
    let shed_base = gen_base + gens.len();
    let num_vars = shed_base + loads.len();
    let mut lp = LinearProgram::new(num_vars);
    for (k, _) in loads.iter().enumerate() {
        lp.set_objective(shed_base + k, 1.0);
    }

    // reference angle
    let ref_bus = if alternate_reference {
        island[island.len() - 1]
    } else {
        island[0]
    };
    let r = bus_col[&ref_bus];
    lp.add_row(&[(2 * r, 1.0), (2 * r + 1, -1.0)], ConstraintOp::Eq, 0.0);

    // nodal balance: gen + shed - sum(outflow) = load
    let mut balance: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nb];
    for &ci in corridors {
        let c = &case.corridors[ci];
        let b = BASE_MVA / c.reactance_pu;
        let (i, j) = (bus_col[&c.from_bus], bus_col[&c.to_bus]);
        // outflow from `i`: +b * (theta_i - theta_j); subtract on the LHS
        balance[i].extend([(2 * i, -b), (2 * i + 1, b), (2 * j, b), (2 * j + 1, -b)]);
        balance[j].extend([(2 * j, -b), (2 * j + 1, b), (2 * i, b), (2 * i + 1, -b)]);
    }
    for (k, &gi) in gens.iter().enumerate() {
        let col = bus_col[&case.generators[gi].bus];
        balance[col].push((gen_base + k, 1.0));
    }
    for (k, &bi) in loads.iter().enumerate() {
        let col = bus_col[&case.buses[bi].id];
        balance[col].push((shed_base + k, 1.0));
    }
    for (i, &bus_id) in island.iter().enumerate() {
        let load = case
            .buses
            .iter()
            .find(|b| b.id == bus_id)
            .map_or(0.0, |b| b.load_mw);
        lp.add_row(&balance[i], ConstraintOp::Eq, load);
    }

    // corridor flow limits
    for &ci in corridors {
        let c = &case.corridors[ci];
        let b = BASE_MVA / c.reactance_pu;
        let (i, j) = (bus_col[&c.from_bus], bus_col[&c.to_bus]);
        let flow = [(2 * i, b), (2 * i + 1, -b), (2 * j, -b), (2 * j + 1, b)];
        lp.add_row(&flow, ConstraintOp::Le, c.limit_mw);
        lp.add_row(&flow, ConstraintOp::Ge, -c.limit_mw);
    }

    // dispatch and shed bounds
    for (k, &gi) in gens.iter().enumerate() {
        let g = &case.generators[gi];
        lp.add_row(&[(gen_base + k, 1.0)], ConstraintOp::Le, g.pmax_mw);
        if g.pmin_mw > 0.0 {
            lp.add_row(&[(gen_base + k, 1.0)], ConstraintOp::Ge, g.pmin_mw);
        }
    }
    for (k, &bi) in loads.iter().enumerate() {
        lp.add_row(
            &[(shed_base + k, 1.0)],
            ConstraintOp::Le,
            case.buses[bi].load_mw,
        );
    }

    let sol = lp.solve()?;
    Ok(IslandSolution {
        shed: (0..loads.len()).map(|k| sol.x[shed_base + k]).collect(),
        dispatch: (0..gens.len()).map(|k| sol.x[gen_base + k]).collect(),
        theta: island
            .iter()
            .enumerate()
            .map(|(i, &b)| (b, sol.x[2 * i] - sol.x[2 * i + 1]))
            .collect(),
    })
}

fn apply_island_solution(
    case: &NetworkCase,
    gens: &[usize],
    loads: &[usize],
    corridors: &[usize],
    sol: &IslandSolution,
    out: &mut SheddingSolution,
) {
    for (k, &bi) in loads.iter().enumerate() {
        let bus = &case.buses[bi];
        let shed = sol.shed[k].clamp(0.0, bus.load_mw);
        if let Some(entry) = out.shed_by_bus.iter_mut().find(|(id, _)| *id == bus.id) {
            entry.1 = shed;
        }
    }
    for (k, &gi) in gens.iter().enumerate() {
        out.dispatch_mw[gi] = sol.dispatch[k];
    }
    for &ci in corridors {
        let c = &case.corridors[ci];
        let flow = BASE_MVA / c.reactance_pu * (sol.theta[&c.from_bus] - sol.theta[&c.to_bus]);
        if let Some(entry) = out.flows_mw.iter_mut().find(|(id, _)| *id == c.id) {
            entry.1 = flow;
        }
    }
}

impl SheddingSolution {
    /// Residual audit of every constraint; the largest violation in MW.
    /// Optimal solutions stay within [`FEASIBILITY_TOL_MW`].
    pub fn max_violation_mw(&self, case: &NetworkCase, failed: &BTreeSet<CorridorId>) -> f64 {
        let mut worst: f64 = 0.0;
        let shed: HashMap<BusId, f64> = self.shed_by_bus.iter().copied().collect();
        let flow: HashMap<CorridorId, f64> = self.flows_mw.iter().copied().collect();
        for (g, p) in case.generators.iter().zip(&self.dispatch_mw) {
            worst = worst
                .max(g.pmin_mw.min(0.0).max(0.0) - p)
                .max(p - g.pmax_mw);
            worst = worst.max(-p); // dispatch must be non-negative
        }
        for c in &case.corridors {
            if let Some(f) = flow.get(&c.id) {
                worst = worst.max(f.abs() - c.limit_mw);
            }
        }
        for bus in &case.buses {
            let s = shed.get(&bus.id).copied().unwrap_or(0.0);
            worst = worst.max(-s).max(s - bus.load_mw);
            let gen: f64 = case
                .generators
                .iter()
                .zip(&self.dispatch_mw)
                .filter(|(g, _)| g.bus == bus.id)
                .map(|(_, p)| p)
                .sum();
            let outflow: f64 = case
                .corridors
                .iter()
                .filter_map(|c| {
                    let f = flow.get(&c.id)?;
                    if c.from_bus == bus.id {
                        Some(*f)
                    } else if c.to_bus == bus.id {
                        Some(-*f)
                    } else {
                        None
                    }
                })
                .sum();
            worst = worst.max((gen + s - bus.load_mw - outflow).abs());
        }
        let _ = failed;
        worst
    }

    /// Structured debug dump: state id, islands, objective and binding
    /// constraints.
    pub fn debug_dump(&self, case: &NetworkCase, failed: &BTreeSet<CorridorId>) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "state {{{}}}", state_label(failed));
        let _ = writeln!(
            s,
            "islands {}",
            self.islands
                .iter()
                .map(|i| format!(
                    "[{}]",
                    i.iter()
                        .map(|b| b.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                ))
                .collect::<Vec<_>>()
                .join(" ")
        );
        let _ = writeln!(s, "objective_mw {:.6}", self.total_shed_mw);
        for (id, f) in &self.flows_mw {
            let limit = case.corridor(*id).map_or(0.0, |c| c.limit_mw);
            if (f.abs() - limit).abs() <= FEASIBILITY_TOL_MW {
                let _ = writeln!(s, "binding flow corridor {id} at {f:.3} MW");
            }
        }
        for ((bus, shed), b) in self
            .shed_by_bus
            .iter()
            .zip(case.buses.iter().filter(|b| b.load_mw > 0.0))
        {
            if (shed - b.load_mw).abs() <= FEASIBILITY_TOL_MW && *shed > 0.0 {
                let _ = writeln!(s, "binding shed bus {bus} fully curtailed");
            }
        }
        for (g, p) in case.generators.iter().zip(&self.dispatch_mw) {
            if (p - g.pmax_mw).abs() <= FEASIBILITY_TOL_MW {
                let _ = writeln!(
                    s,
                    "binding dispatch bus {} at pmax {:.3} MW",
                    g.bus, g.pmax_mw
                );
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::path::Path;

    fn load_toy(name: &str) -> NetworkCase {
        let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/toys");
        crate::case::load_case(
            &data.join(format!("{name}_buses.csv")),
            &data.join(format!("{name}_generators.csv")),
            &data.join(format!("{name}_corridors.csv")),
        )
        .unwrap()
    }

    fn load_rts() -> NetworkCase {
        let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/rts79");
        crate::case::load_case(
            &data.join("buses.csv"),
            &data.join("generators.csv"),
            &data.join("corridors.csv"),
        )
        .unwrap()
    }

    fn set(ids: &[CorridorId]) -> BTreeSet<CorridorId> {
        ids.iter().copied().collect()
    }

    #[test]
    fn intact_system_sheds_nothing() {
        for case in [load_toy("triangle"), load_toy("diamond"), load_rts()] {
            let sol = min_load_shed(&case, &BTreeSet::new()).unwrap();
            assert!(sol.total_shed_mw < 1e-7, "shed {}", sol.total_shed_mw);
            assert_eq!(sol.islands.len(), 1);
            assert_eq!(sol.status, ShedStatus::Optimal);
            assert!(sol.max_violation_mw(&case, &BTreeSet::new()) < FEASIBILITY_TOL_MW);
        }
    }

    #[test]
    fn island_partitions() {
        let case = load_toy("triangle");
        assert_eq!(islands(&case, &BTreeSet::new()), vec![vec![1, 2, 3]]);
        let all = set(&[1, 2, 3]);
        assert_eq!(islands(&case, &all), vec![vec![1], vec![2], vec![3]]);
        // RTS-79: bus 7 hangs on corridor 11 alone
        let rts = load_rts();
        let parts = islands(&rts, &set(&[11]));
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[1], vec![7]);
        assert_eq!(parts[0].len(), 23);
    }

    #[test]
    fn unsupplied_island_sheds_all() {
        let case = load_toy("triangle");
        let sol = min_load_shed(&case, &set(&[1, 2, 3])).unwrap();
        assert_relative_eq!(sol.total_shed_mw, 100.0, epsilon = 1e-9);
    }

    #[test]
    fn bottleneck_sheds_exactly_forty() {
        let case = load_toy("triangle");
        // corridor 3 is the direct 1-3 path; survivor path 1-2-3 is capped
        // by corridor 1 at 60 MW
        let sol = min_load_shed(&case, &set(&[3])).unwrap();
        assert!(
            (sol.total_shed_mw - 40.0).abs() < 1e-9,
            "shed {}",
            sol.total_shed_mw
        );
        assert!(sol.max_violation_mw(&case, &set(&[3])) < FEASIBILITY_TOL_MW);
        let dump = sol.debug_dump(&case, &set(&[3]));
        assert!(dump.contains("binding flow corridor 1"), "{dump}");
    }

    #[test]
    fn rts_bus7_islanding_sheds_its_load() {
        let case = load_rts();
        let sol = min_load_shed(&case, &set(&[11])).unwrap();
        // bus 7 (125 MW load, 300 MW generation) separates: the island keeps
        // itself alive, the rest of the system re-balances, nothing is shed
        assert!(sol.total_shed_mw < 1e-7, "shed {}", sol.total_shed_mw);
    }

    #[test]
    fn monotone_up_to_order_two_on_toys() {
        for case in [load_toy("triangle"), load_toy("diamond")] {
            let ids: Vec<CorridorId> = case.corridors.iter().map(|c| c.id).collect();
            let impact = |s: &BTreeSet<CorridorId>| min_load_shed(&case, s).unwrap().total_shed_mw;
            for &a in &ids {
                let single = impact(&set(&[a]));
                assert!(single + 1e-9 >= impact(&BTreeSet::new()));
                for &b in &ids {
                    if a < b {
                        let double = impact(&set(&[a, b]));
                        assert!(
                            double + 1e-7 >= single,
                            "I({{{a},{b}}}) = {double} < I({{{a}}}) = {single}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn deterministic_objective() {
        let case = load_rts();
        let s = set(&[11, 18, 27]);
        let a = min_load_shed(&case, &s).unwrap();
        let b = min_load_shed(&case, &s).unwrap();
        assert_eq!(a.total_shed_mw.to_bits(), b.total_shed_mw.to_bits());
    }

    #[test]
    fn unknown_corridor_rejected() {
        let case = load_toy("triangle");
        assert!(matches!(
            min_load_shed(&case, &set(&[99])),
            Err(ShedError::UnknownCorridor(99))
        ));
    }

    #[test]
    fn pmin_conflict_degenerates() {
        let mut case = load_toy("triangle");
        // force 150 MW of must-run generation against 100 MW of load
        case.generators[0].pmin_mw = 150.0;
        let sol = min_load_shed(&case, &BTreeSet::new()).unwrap();
        assert_eq!(sol.status, ShedStatus::InfeasibleDegenerate);
        assert_relative_eq!(sol.total_shed_mw, 100.0, epsilon = 1e-9);
    }
}
