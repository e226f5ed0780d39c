//! Exhaustive solvers for tiny instances. Slow and obviously correct; used
//! only as ground truth.

use std::collections::BTreeSet;

use crate::cfl::{eval_open_set, CflSolution};
use crate::error::{Error, Result};
use crate::flow::{assign_with_lower_bounds, solve_transport, TransportProblem};
use crate::instance::{LbflInstance, LbflSolution};
use crate::reductions::{CflInstance, StageI3, TcsdInstance};
use crate::ufl::UflAugmented;
use crate::Cost;

pub const LBFL_FACILITY_GUARD: usize = 12;
pub const CFL_SUPPLIER_GUARD: usize = 16;
pub const UFL_FACILITY_GUARD: usize = 16;
pub const TCSD_CHOICE_GUARD: u64 = 1 << 20;
pub const LBFLP_CLIENT_GUARD: usize = 8;

fn subsets(items: &[usize]) -> impl Iterator<Item = BTreeSet<usize>> + '_ {
    (0u64..1 << items.len()).map(move |mask| {
        items
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, &i)| i)
            .collect()
    })
}

fn guard(what: &str, size: usize, limit: usize) -> Result<()> {
    if size > limit {
        return Err(Error::SizeGuard(format!("{size} {what} (limit {limit})")));
    }
    Ok(())
}

/// Optimal LBFL solution by enumerating every open set whose lower bounds
/// fit within the client count.
pub fn brute_lbfl(inst: &LbflInstance) -> Result<(LbflSolution, Cost)> {
    brute_lbfl_guarded(inst, LBFL_FACILITY_GUARD)
}

pub fn brute_lbfl_guarded(inst: &LbflInstance, limit: usize) -> Result<(LbflSolution, Cost)> {
    let nf = inst.num_facilities();
    guard("facilities", nf, limit)?;
    let nc = inst.num_clients() as u64;
    if nc == 0 {
        return Ok((LbflSolution::empty(), 0));
    }
    let all: Vec<usize> = (0..nf).collect();
    let mut best: Option<(LbflSolution, Cost)> = None;
    for open in subsets(&all) {
        let need: u64 = open.iter().map(|&i| inst.facilities[i].lower_bound).sum();
        if open.is_empty() || need > nc {
            continue;
        }
        let (assign, connection) = assign_with_lower_bounds(inst, &open)?;
        let cost = inst.facility_cost(&open) + connection;
        if best.as_ref().is_none_or(|(_, c)| cost < *c) {
            best = Some((LbflSolution { open, assign }, cost));
        }
    }
    best.ok_or_else(|| Error::infeasible("every facility's lower bound exceeds the client count"))
}

/// Optimal open set of the auxiliary UFL instance.
pub fn brute_ufl(aug: &UflAugmented) -> Result<(BTreeSet<usize>, Cost)> {
    let pool: Vec<usize> = aug.eligible().collect();
    guard("eligible facilities", pool.len(), UFL_FACILITY_GUARD)?;
    let mut best: Option<(BTreeSet<usize>, Cost)> = None;
    for s in subsets(&pool) {
        if let Some(c) = aug.cost(&s) {
            if best.as_ref().is_none_or(|(_, b)| c < *b) {
                best = Some((s, c));
            }
        }
    }
    best.ok_or_else(|| Error::infeasible("no eligible facility"))
}

pub fn brute_cfl(inst: &CflInstance) -> Result<CflSolution> {
    let k = inst.suppliers.len();
    guard("suppliers", k, CFL_SUPPLIER_GUARD)?;
    let all: Vec<usize> = (0..k).collect();
    let mut best: Option<CflSolution> = None;
    for open in subsets(&all) {
        if let Ok(sol) = eval_open_set(inst, &open) {
            if best.as_ref().is_none_or(|b| sol.cost < b.cost) {
                best = Some(sol);
            }
        }
    }
    best.ok_or_else(|| Error::infeasible("total capacity is below demand"))
}

/// Cheapest feasible choice vector, by full product enumeration.
pub fn brute_tcsd(t: &TcsdInstance) -> Result<(Vec<usize>, Cost)> {
    let sizes: Vec<usize> = t.options.iter().map(Vec::len).collect();
    let product = sizes
        .iter()
        .try_fold(1u64, |acc, &s| acc.checked_mul(s as u64));
    if product.is_none_or(|p| p > TCSD_CHOICE_GUARD) {
        return Err(Error::SizeGuard(format!(
            "TCSD choice space {sizes:?} (limit {TCSD_CHOICE_GUARD})"
        )));
    }
    if sizes.contains(&0) {
        return Err(Error::infeasible("a location has no options"));
    }
    let mut choice = vec![0; sizes.len()];
    let mut best: Option<(Vec<usize>, Cost)> = None;
    loop {
        let net: Vec<i64> = choice
            .iter()
            .enumerate()
            .map(|(v, &k)| t.options[v][k].z)
            .collect();
        if net.iter().sum::<i64>() >= 0 {
            let g: Cost = choice
                .iter()
                .enumerate()
                .map(|(v, &k)| t.options[v][k].g)
                .sum();
            let plan = solve_transport(&TransportProblem::new(net, t.dist.clone()))?;
            let cost = g + plan.cost;
            if best.as_ref().is_none_or(|(_, b)| cost < *b) {
                best = Some((choice.clone(), cost));
            }
        }
        // odometer
        let mut v = 0;
        loop {
            if v == choice.len() {
                return best
                    .ok_or_else(|| Error::infeasible("every choice has negative total supply"));
            }
            choice[v] += 1;
            if choice[v] < sizes[v] {
                break;
            }
            choice[v] = 0;
            v += 1;
        }
    }
}

/// Optimal `I³` cost by direct enumeration of open sets (at most one per
/// location) and every assignment of clients to an open facility or to
/// nothing. Shares no code with the flow solver.
pub fn brute_lbflp(i3: &StageI3) -> Result<Cost> {
    let nc = i3.client_loc.len();
    guard("clients", nc, LBFLP_CLIENT_GUARD)?;
    let k = i3.num_locations();
    // per location: no facility, or one of N_v
    let per_loc: Vec<Vec<Option<usize>>> = (0..k)
        .map(|v| {
            std::iter::once(None)
                .chain(i3.members(v).map(|f| Some(f.facility)))
                .collect()
        })
        .collect();
    let mut pick = vec![0; k];
    let mut best: Option<Cost> = None;
    loop {
        let open: Vec<(usize, usize)> = (0..k)
            .filter_map(|v| per_loc[v][pick[v]].map(|i| (i, v)))
            .collect();
        let base: Cost = (0..k)
            .map(|v| match per_loc[v][pick[v]] {
                None => i3.penalty[v],
                Some(i) => i3.facilities.iter().find(|f| f.facility == i).unwrap().cost,
            })
            .sum();
        // each client: 0 = unconnected, m+1 = open[m]
        let options = open.len() + 1;
        let mut a = vec![0usize; nc];
        loop {
            let mut load = vec![0u64; open.len()];
            let mut conn = 0;
            for j in 0..nc {
                if a[j] > 0 {
                    let (_, v) = open[a[j] - 1];
                    load[a[j] - 1] += 1;
                    conn += i3.dist[i3.client_loc[j]][v];
                }
            }
            let ok = open.iter().zip(&load).all(|(&(i, _), &l)| {
                l >= i3
                    .facilities
                    .iter()
                    .find(|f| f.facility == i)
                    .unwrap()
                    .lower_bound
            });
            if ok && best.is_none_or(|b| base + conn < b) {
                best = Some(base + conn);
            }
            let mut j = 0;
            while j < nc {
                a[j] += 1;
                if a[j] < options {
                    break;
                }
                a[j] = 0;
                j += 1;
            }
            if j == nc {
                break;
            }
        }
        let mut v = 0;
        while v < k {
            pick[v] += 1;
            if pick[v] < per_loc[v].len() {
                break;
            }
            pick[v] = 0;
            v += 1;
        }
        if v == k {
            break;
        }
    }
    best.ok_or_else(|| Error::infeasible("no partial solution satisfies the lower bounds"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{e1, line};
    use crate::reductions::Supplier;

    #[test]
    fn e1_optimum_matches_hand_enumeration() {
        // {a}: 1 + 10, {b}: 1 + 20, {a, b}: 2 + 10
        let (sol, cost) = brute_lbfl(&e1()).unwrap();
        assert_eq!(cost, 11);
        assert_eq!(sol.open, [0].into());
    }

    #[test]
    fn single_facility_takes_everything() {
        let inst = line(&[(5, 3, 2)], &[0, 10]);
        let (sol, cost) = brute_lbfl(&inst).unwrap();
        assert_eq!(sol.assign, vec![0, 0]);
        assert_eq!(cost, 13);
    }

    #[test]
    fn oversized_lower_bounds_are_infeasible() {
        let inst = line(&[(5, 3, 3), (0, 1, 4)], &[0, 10]);
        assert!(matches!(brute_lbfl(&inst), Err(Error::Infeasible(_))));
    }

    #[test]
    fn guard_refuses_large_instances() {
        let fac: Vec<(i64, i64, u64)> = (0..13).map(|k| (k, 1, 0)).collect();
        let inst = line(&fac, &[0]);
        assert!(matches!(brute_lbfl(&inst), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn cfl_empty_demand() {
        let inst = CflInstance {
            scale: 1,
            dist: vec![vec![0]],
            demand: vec![0],
            suppliers: vec![Supplier {
                loc: 0,
                level: 1,
                cost: 3,
                capacity: 1,
            }],
        };
        let sol = brute_cfl(&inst).unwrap();
        assert_eq!(sol.cost, 0);
        assert!(sol.open.is_empty());
    }
}
