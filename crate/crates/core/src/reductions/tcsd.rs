//! `I⁴`: transportation with configurable supplies and demands. Each
//! location picks one `(g, z)` pair; the cost is `Σ g` plus the optimal
//! transportation cost of the chosen nets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{solve_transport, TransportPlan, TransportProblem};
use crate::instance::CostBreakdown;
use crate::reductions::penalty::{PartialSolution, StageI3};
use crate::Cost;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptionSource {
    /// Keep every local client unconnected and pay the penalty.
    Penalty,
    /// Open this facility of `N_v`.
    Facility(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TcsdOption {
    pub g: Cost,
    pub z: i64,
    pub source: OptionSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TcsdInstance {
    pub scale: i64,
    pub dist: Vec<Vec<Cost>>,
    /// `R_v`: the penalty pair first, then one pair per facility of `N_v`
    /// in ascending facility order.
    pub options: Vec<Vec<TcsdOption>>,
}

impl TcsdInstance {
    pub fn num_locations(&self) -> usize {
        self.options.len()
    }

    pub fn nets(&self, choice: &[usize]) -> Result<Vec<i64>> {
        self.check_choice(choice)?;
        Ok(choice
            .iter()
            .enumerate()
            .map(|(v, &k)| self.options[v][k].z)
            .collect())
    }

    fn check_choice(&self, choice: &[usize]) -> Result<()> {
        if choice.len() != self.num_locations() {
            return Err(Error::InvalidSolution(format!(
                "choice has {} entries for {} locations",
                choice.len(),
                self.num_locations()
            )));
        }
        if let Some(v) = (0..choice.len()).find(|&v| choice[v] >= self.options[v].len()) {
            return Err(Error::InvalidSolution(format!(
                "location {v} has no option {}",
                choice[v]
            )));
        }
        Ok(())
    }
}

pub fn build_tcsd(i3: &StageI3) -> TcsdInstance {
    let options = (0..i3.num_locations())
        .map(|v| {
            let n = i3.n[v] as i64;
            std::iter::once(TcsdOption {
                g: i3.penalty[v],
                z: n,
                source: OptionSource::Penalty,
            })
            .chain(i3.members(v).map(|f| TcsdOption {
                g: f.cost,
                z: n - f.lower_bound as i64,
                source: OptionSource::Facility(f.facility),
            }))
            .collect()
        })
        .collect();
    TcsdInstance {
        scale: i3.scale,
        dist: i3.dist.clone(),
        options,
    }
}

/// `g(S°) + TC`, split into facility and penalty parts, with the optimal
/// plan. Infeasible iff `Σ z < 0`.
pub fn tcsd_cost(t: &TcsdInstance, choice: &[usize]) -> Result<(CostBreakdown, TransportPlan)> {
    let net = t.nets(choice)?;
    let plan = solve_transport(&TransportProblem::new(net, t.dist.clone()))?;
    let (mut facility, mut penalty) = (0, 0);
    for (v, &k) in choice.iter().enumerate() {
        let o = t.options[v][k];
        match o.source {
            OptionSource::Penalty => penalty += o.g,
            OptionSource::Facility(_) => facility += o.g,
        }
    }
    Ok((CostBreakdown::new(facility, plan.cost, penalty), plan))
}

/// Realizes a TCSD choice and its transport plan as an `I³` partial
/// solution, treating each shipped unit as one client. Shipped units are
/// drawn from the unconnected clients at the source in ascending order.
/// The `I³` cost equals the TCSD cost component by component.
pub fn lift_tcsd_to_lbflp(
    t: &TcsdInstance,
    i3: &StageI3,
    choice: &[usize],
    plan: &TransportPlan,
) -> Result<PartialSolution> {
    let net = t.nets(choice)?;
    let k = t.num_locations();
    if k != i3.num_locations() {
        return Err(Error::Internal(
            "TCSD and I3 disagree on the location count".into(),
        ));
    }
    if !plan.is_feasible_for(&net) {
        return Err(Error::Internal(
            "transport plan does not satisfy the chosen nets".into(),
        ));
    }
    let mut open = std::collections::BTreeSet::new();
    let mut assign = vec![None; i3.client_loc.len()];
    let mut facility_at = vec![None; k];
    // unconnected local clients, ascending
    let mut free: Vec<std::collections::VecDeque<usize>> =
        (0..k).map(|v| i3.clients_at(v).collect()).collect();
    for v in 0..k {
        if let OptionSource::Facility(i) = t.options[v][choice[v]].source {
            let f = i3.locate(i).filter(|f| f.loc == v).ok_or_else(|| {
                Error::Internal(format!("option at {v} names facility {i} outside N_v"))
            })?;
            open.insert(i);
            facility_at[v] = Some(i);
            let local = (i3.n[v].min(f.lower_bound)) as usize;
            for _ in 0..local {
                let j = free[v].pop_front().expect("n_v clients at v");
                assign[j] = Some(i);
            }
        }
    }
    for (&(u, v), &x) in &plan.flow {
        let i = facility_at[v].ok_or_else(|| {
            Error::Internal(format!(
                "plan ships into location {v} without an open facility"
            ))
        })?;
        for _ in 0..x {
            let j = free[u].pop_front().ok_or_else(|| {
                Error::Internal(format!("location {u} ships more clients than it has"))
            })?;
            assign[j] = Some(i);
        }
    }
    Ok(PartialSolution { open, assign })
}
