//! Local search for capacitated facility location over add, drop and
//! swap moves, each evaluated by an exact transportation solve.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{solve_transport, TransportPlan, TransportProblem};
use crate::reductions::CflInstance;
use crate::{Cost, Rational};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CflSolution {
    pub open: BTreeSet<usize>,
    /// Shipments between locations; supplier capacity is pooled per location.
    pub flow: TransportPlan,
    pub opening: Cost,
    pub cost: Cost,
}

/// Optimal flow for a fixed open set.
pub fn eval_open_set(inst: &CflInstance, open: &BTreeSet<usize>) -> Result<CflSolution> {
    if let Some(&s) = open.iter().find(|&&s| s >= inst.suppliers.len()) {
        return Err(Error::InvalidSolution(format!("unknown supplier {s}")));
    }
    let capacity = inst.capacity_of(open);
    let demand = inst.total_demand();
    if capacity < demand {
        return Err(Error::infeasible(format!(
            "open capacity {capacity} is below demand {demand}"
        )));
    }
    let flow = solve_transport(&TransportProblem::new(inst.nets(open), inst.dist.clone()))?;
    let opening: Cost = open.iter().map(|&s| inst.suppliers[s].cost).sum();
    Ok(CflSolution {
        open: open.clone(),
        cost: opening + flow.cost,
        opening,
        flow,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalSearchConfig {
    pub eps: Rational,
    pub max_iters: usize,
}

impl Default for LocalSearchConfig {
    fn default() -> Self {
        LocalSearchConfig {
            eps: Rational::new(1, 100),
            max_iters: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Move {
    Add(usize),
    Drop(usize),
    Swap { close: usize, open: usize },
}

impl Move {
    pub fn apply(self, open: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut s = open.clone();
        match self {
            Move::Add(k) => {
                s.insert(k);
            }
            Move::Drop(k) => {
                s.remove(&k);
            }
            Move::Swap { close, open } => {
                s.remove(&close);
                s.insert(open);
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalSearchOutcome {
    pub solution: CflSolution,
    pub moves: usize,
    /// Set when `max_iters` stopped the search before a local optimum.
    pub hit_iteration_cap: bool,
}

/// Every add, drop and swap from `open`, in supplier order.
pub fn neighbourhood(inst: &CflInstance, open: &BTreeSet<usize>) -> Vec<Move> {
    let all = 0..inst.suppliers.len();
    let closed: Vec<usize> = all.clone().filter(|s| !open.contains(s)).collect();
    let mut moves: Vec<Move> = closed.iter().map(|&k| Move::Add(k)).collect();
    moves.extend(open.iter().map(|&k| Move::Drop(k)));
    for &c in open {
        moves.extend(closed.iter().map(|&o| Move::Swap { close: c, open: o }));
    }
    moves
}

/// `improvement · |K| > eps · cost`, exactly.
pub fn is_significant(improvement: Cost, cost: Cost, suppliers: usize, eps: Rational) -> bool {
    improvement > 0
        && improvement as i128 * suppliers as i128 * *eps.denom() as i128
            > *eps.numer() as i128 * cost as i128
}

/// Best significant move from `current`, ties broken by move order.
pub fn best_move(
    inst: &CflInstance,
    current: &CflSolution,
    eps: Rational,
) -> Option<(Move, CflSolution)> {
    let mut best: Option<(Move, CflSolution)> = None;
    for m in neighbourhood(inst, &current.open) {
        let Ok(cand) = eval_open_set(inst, &m.apply(&current.open)) else {
            continue;
        };
        if best.as_ref().is_none_or(|(_, b)| cand.cost < b.cost) {
            best = Some((m, cand));
        }
    }
    best.filter(|(_, b)| {
        is_significant(
            current.cost - b.cost,
            current.cost,
            inst.suppliers.len(),
            eps,
        )
    })
}

/// Starts with every supplier open and applies the best significant move
/// until none remains.
pub fn local_search(inst: &CflInstance, config: LocalSearchConfig) -> Result<LocalSearchOutcome> {
    if config.eps < Rational::from_integer(0) {
        return Err(Error::malformed("local search eps must be nonnegative"));
    }
    let all: BTreeSet<usize> = (0..inst.suppliers.len()).collect();
    let mut current = eval_open_set(inst, &all)?;
    let mut moves = 0;
    while let Some((_, next)) = best_move(inst, &current, config.eps) {
        if moves == config.max_iters {
            return Ok(LocalSearchOutcome {
                solution: current,
                moves,
                hit_iteration_cap: true,
            });
        }
        current = next;
        moves += 1;
    }
    Ok(LocalSearchOutcome {
        solution: current,
        moves,
        hit_iteration_cap: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reductions::Supplier;

    fn supplier(loc: usize, cost: Cost, capacity: i64) -> Supplier {
        Supplier {
            loc,
            level: 1,
            cost,
            capacity,
        }
    }

    #[test]
    fn empty_demand_costs_nothing() {
        let inst = CflInstance {
            scale: 1,
            dist: vec![vec![0]],
            demand: vec![0],
            suppliers: vec![],
        };
        let sol = eval_open_set(&inst, &BTreeSet::new()).unwrap();
        assert_eq!(sol.cost, 0);
    }

    #[test]
    fn forced_single_supplier() {
        let inst = CflInstance {
            scale: 1,
            dist: vec![vec![0, 5], vec![5, 0]],
            demand: vec![2, 0],
            suppliers: vec![supplier(1, 4, 2)],
        };
        assert_eq!(eval_open_set(&inst, &[0].into()).unwrap().cost, 14);
        assert!(matches!(
            eval_open_set(&inst, &BTreeSet::new()),
            Err(Error::Infeasible(_))
        ));
        let out = local_search(&inst, LocalSearchConfig::default()).unwrap();
        assert_eq!(out.solution.cost, 14);
    }

    #[test]
    fn free_local_supply_reaches_zero() {
        let inst = CflInstance {
            scale: 1,
            dist: vec![vec![0, 5], vec![5, 0]],
            demand: vec![3, 0],
            suppliers: vec![supplier(0, 0, 3), supplier(1, 2, 4), supplier(0, 8, 1)],
        };
        let out = local_search(&inst, LocalSearchConfig::default()).unwrap();
        assert_eq!(out.solution.cost, 0);
        assert_eq!(out.solution.open, [0].into());
        assert!(!out.hit_iteration_cap);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let inst = CflInstance {
            scale: 1,
            dist: vec![vec![0, 5], vec![5, 0]],
            demand: vec![3, 0],
            suppliers: vec![supplier(0, 0, 3), supplier(1, 2, 4), supplier(0, 8, 1)],
        };
        let out = local_search(
            &inst,
            LocalSearchConfig {
                eps: Rational::from_integer(0),
                max_iters: 0,
            },
        )
        .unwrap();
        assert!(out.hit_iteration_cap);
        assert_eq!(out.solution.open.len(), 3);
    }

    #[test]
    fn threshold_is_exact() {
        let eps = Rational::new(1, 100);
        // 1 · 10 · 100 = 1000 vs 1 · 1000
        assert!(!is_significant(1, 1000, 10, eps));
        assert!(is_significant(1, 999, 10, eps));
        assert!(!is_significant(0, 0, 10, Rational::from_integer(0)));
    }
}
