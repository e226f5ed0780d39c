//! Exact integral min-cost flow.
//!
//! One kernel, successive shortest augmenting paths with Johnson
//! potentials, backs both the transportation problem and the lower-bounded
//! client assignment. Arc lower bounds are removed with the usual excess
//! transformation onto a super source and sink.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt::Debug;

use num_traits::{PrimInt, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::LbflInstance;
use crate::Cost;

/// Integer type usable for flow amounts and arc costs.
pub trait FlowNum: PrimInt + Signed + Debug + std::iter::Sum {}

impl<T: PrimInt + Signed + Debug + std::iter::Sum> FlowNum for T {}

#[derive(Debug, Clone)]
struct Arc<T> {
    to: usize,
    rev: usize,
    cap: T,
    cost: T,
}

/// Residual network for min-cost flow.
#[derive(Debug, Clone)]
pub struct MinCostFlow<T> {
    adj: Vec<Vec<Arc<T>>>,
    /// `(node, position)` of each forward arc, with its original capacity.
    handles: Vec<(usize, usize, T)>,
}

impl<T: FlowNum> MinCostFlow<T> {
    pub fn new(n: usize) -> Self {
        MinCostFlow {
            adj: vec![Vec::new(); n],
            handles: Vec::new(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.adj.len()
    }

    /// Adds arc `u -> v` and returns its handle.
    pub fn add_arc(&mut self, u: usize, v: usize, cap: T, cost: T) -> usize {
        let pu = self.adj[u].len();
        let pv = self.adj[v].len() + usize::from(u == v);
        self.adj[u].push(Arc {
            to: v,
            rev: pv,
            cap,
            cost,
        });
        self.adj[v].push(Arc {
            to: u,
            rev: pu,
            cap: T::zero(),
            cost: -cost,
        });
        self.handles.push((u, pu, cap));
        self.handles.len() - 1
    }

    /// Flow currently on the arc with handle `id`.
    pub fn flow_on(&self, id: usize) -> T {
        let (u, p, cap) = self.handles[id];
        cap - self.adj[u][p].cap
    }

    /// Sends up to `limit` units from `s` to `t` at minimum cost.
    /// Returns `(units sent, cost)`. Assumes no negative-cost cycles.
    pub fn run(&mut self, s: usize, t: usize, limit: T) -> (T, T) {
        let n = self.adj.len();
        let mut potential = self.initial_potentials(s);
        let mut sent = T::zero();
        let mut total = T::zero();
        let inf = T::max_value() / (T::one() + T::one() + T::one() + T::one());
        while sent < limit {
            let mut dist = vec![inf; n];
            let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
            let mut heap = BinaryHeap::new();
            dist[s] = T::zero();
            heap.push(Reverse((T::zero(), s)));
            while let Some(Reverse((du, u))) = heap.pop() {
                if du > dist[u] {
                    continue;
                }
                for (k, a) in self.adj[u].iter().enumerate() {
                    if a.cap <= T::zero() || potential[a.to] >= inf {
                        continue;
                    }
                    let nd = du + a.cost + potential[u] - potential[a.to];
                    if nd < dist[a.to] {
                        dist[a.to] = nd;
                        prev[a.to] = Some((u, k));
                        heap.push(Reverse((nd, a.to)));
                    }
                }
            }
            if dist[t] >= inf {
                break;
            }
            for v in 0..n {
                if dist[v] < inf {
                    potential[v] = potential[v] + dist[v];
                }
            }
            let mut push = limit - sent;
            let mut v = t;
            while let Some((u, k)) = prev[v] {
                push = push.min(self.adj[u][k].cap);
                v = u;
            }
            let mut v = t;
            while let Some((u, k)) = prev[v] {
                let rev = self.adj[u][k].rev;
                self.adj[u][k].cap = self.adj[u][k].cap - push;
                self.adj[v][rev].cap = self.adj[v][rev].cap + push;
                total = total + push * self.adj[u][k].cost;
                v = u;
            }
            sent = sent + push;
        }
        (sent, total)
    }

    /// Bellman-Ford distances from `s`; unreachable nodes get `inf`, which
    /// Dijkstra treats as permanently unreachable. Reachability only grows
    /// through reverse arcs of augmented paths, which stay inside the
    /// reachable set, so this is sound.
    fn initial_potentials(&self, s: usize) -> Vec<T> {
        let n = self.adj.len();
        let inf = T::max_value() / (T::one() + T::one() + T::one() + T::one());
        let mut d = vec![inf; n];
        d[s] = T::zero();
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                if d[u] >= inf {
                    continue;
                }
                for a in &self.adj[u] {
                    if a.cap > T::zero() && d[u] + a.cost < d[a.to] {
                        d[a.to] = d[u] + a.cost;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        d
    }
}

#[derive(Debug, Clone)]
struct BoundedArc<T> {
    from: usize,
    to: usize,
    lower: T,
    upper: T,
    cost: T,
}

/// Flow network whose arcs carry lower and upper bounds. Solved as a
/// minimum-cost feasible circulation.
#[derive(Debug, Clone)]
pub struct BoundedNetwork<T> {
    n: usize,
    arcs: Vec<BoundedArc<T>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circulation<T> {
    pub cost: T,
    pub flows: Vec<T>,
}

impl<T: FlowNum> BoundedNetwork<T> {
    pub fn new(n: usize) -> Self {
        BoundedNetwork {
            n,
            arcs: Vec::new(),
        }
    }

    pub fn add_arc(&mut self, from: usize, to: usize, lower: T, upper: T, cost: T) -> usize {
        assert!(lower <= upper, "arc lower bound exceeds upper bound");
        self.arcs.push(BoundedArc {
            from,
            to,
            lower,
            upper,
            cost,
        });
        self.arcs.len() - 1
    }

    /// Minimum-cost circulation respecting all bounds, or `None` if none exists.
    pub fn solve(&self) -> Option<Circulation<T>> {
        let (src, sink) = (self.n, self.n + 1);
        let mut net = MinCostFlow::new(self.n + 2);
        let mut excess = vec![T::zero(); self.n];
        let mut fixed_cost = T::zero();
        let handles: Vec<usize> = self
            .arcs
            .iter()
            .map(|a| {
                excess[a.to] = excess[a.to] + a.lower;
                excess[a.from] = excess[a.from] - a.lower;
                fixed_cost = fixed_cost + a.lower * a.cost;
                net.add_arc(a.from, a.to, a.upper - a.lower, a.cost)
            })
            .collect();
        let mut required = T::zero();
        for (v, &e) in excess.iter().enumerate() {
            if e > T::zero() {
                net.add_arc(src, v, e, T::zero());
                required = required + e;
            } else if e < T::zero() {
                net.add_arc(v, sink, -e, T::zero());
            }
        }
        let (sent, cost) = net.run(src, sink, required);
        if sent < required {
            return None;
        }
        let flows = self
            .arcs
            .iter()
            .zip(&handles)
            .map(|(a, &h)| a.lower + net.flow_on(h))
            .collect();
        Some(Circulation {
            cost: fixed_cost + cost,
            flows,
        })
    }
}

/// Transportation problem over a set of locations. Positive `net` is
/// supply, negative is demand; surplus supply may stay unshipped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportProblem {
    pub nodes: Vec<usize>,
    pub net: Vec<i64>,
    /// Cost matrix indexed by node position; expected to be a (pseudo)metric.
    pub cost: Vec<Vec<Cost>>,
}

/// Integral shipment plan `ψ`, keyed by node positions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub flow: BTreeMap<(usize, usize), i64>,
    pub cost: Cost,
}

impl TransportPlan {
    pub fn inflow(&self, v: usize) -> i64 {
        self.flow
            .iter()
            .filter(|((_, b), _)| *b == v)
            .map(|(_, &x)| x)
            .sum()
    }

    pub fn outflow(&self, v: usize) -> i64 {
        self.flow
            .iter()
            .filter(|((a, _), _)| *a == v)
            .map(|(_, &x)| x)
            .sum()
    }

    pub fn shipped(&self) -> i64 {
        self.flow.values().sum()
    }

    /// `net(v) + inflow(v) - outflow(v) >= 0` for every node.
    pub fn is_feasible_for(&self, net: &[i64]) -> bool {
        (0..net.len()).all(|v| net[v] + self.inflow(v) - self.outflow(v) >= 0)
    }

    /// `Σ ψ(u, v) · d(u, v)` recomputed from the flow.
    pub fn recompute_cost(&self, cost: &[Vec<Cost>]) -> Cost {
        self.flow.iter().map(|(&(a, b), &x)| x * cost[a][b]).sum()
    }
}

impl TransportProblem {
    pub fn new(net: Vec<i64>, cost: Vec<Vec<Cost>>) -> Self {
        TransportProblem {
            nodes: (0..net.len()).collect(),
            net,
            cost,
        }
    }

    pub fn total_net(&self) -> i64 {
        self.net.iter().sum()
    }

    pub fn total_demand(&self) -> i64 {
        self.net.iter().filter(|&&x| x < 0).map(|x| -x).sum()
    }
}

/// Minimum-cost integral plan meeting every demand. Ships directly from
/// supply nodes to demand nodes, which is optimal on a metric.
pub fn solve_transport(p: &TransportProblem) -> Result<TransportPlan> {
    let total = p.total_net();
    if total < 0 {
        return Err(Error::infeasible(format!(
            "transport: demand exceeds supply by {}",
            -total
        )));
    }
    let n = p.net.len();
    if p.cost.len() != n || p.cost.iter().any(|r| r.len() != n) {
        return Err(Error::malformed(
            "transport: cost matrix does not match node count",
        ));
    }
    let demand = p.total_demand();
    if demand == 0 {
        return Ok(TransportPlan::default());
    }
    let (src, sink) = (n, n + 1);
    let mut net = MinCostFlow::<i64>::new(n + 2);
    let mut lanes = Vec::new();
    for u in 0..n {
        if p.net[u] > 0 {
            net.add_arc(src, u, p.net[u], 0);
            for v in 0..n {
                if p.net[v] < 0 {
                    lanes.push((
                        u,
                        v,
                        net.add_arc(u, v, p.net[u].min(-p.net[v]), p.cost[u][v]),
                    ));
                }
            }
        } else if p.net[u] < 0 {
            net.add_arc(u, sink, -p.net[u], 0);
        }
    }
    let (sent, cost) = net.run(src, sink, demand);
    if sent != demand {
        return Err(Error::Internal(format!(
            "transport: shipped {sent} of {demand} demand units despite sufficient supply"
        )));
    }
    let flow = lanes
        .into_iter()
        .filter_map(|(u, v, h)| {
            let x = net.flow_on(h);
            (x > 0).then_some(((u, v), x))
        })
        .collect();
    Ok(TransportPlan { flow, cost })
}

/// Minimum-connection-cost assignment of every client to a facility in
/// `open` such that each open facility receives at least its lower bound.
pub fn assign_with_lower_bounds(
    inst: &LbflInstance,
    open: &BTreeSet<usize>,
) -> Result<(Vec<usize>, Cost)> {
    let nc = inst.num_clients();
    let nf = inst.num_facilities();
    if let Some(&bad) = open.iter().find(|&&i| i >= nf) {
        return Err(Error::malformed(format!("unknown facility index {bad}")));
    }
    if nc == 0 {
        if open.iter().any(|&i| inst.facilities[i].lower_bound > 0) {
            return Err(Error::infeasible(
                "open facility with positive lower bound but no clients",
            ));
        }
        return Ok((Vec::new(), 0));
    }
    if open.is_empty() {
        return Err(Error::infeasible("no open facility"));
    }
    let need: u64 = open.iter().map(|&i| inst.facilities[i].lower_bound).sum();
    if need > nc as u64 {
        return Err(Error::infeasible(format!(
            "open lower bounds sum to {need}, only {nc} clients"
        )));
    }
    // nodes: s, t, clients, open facilities
    let open: Vec<usize> = open.iter().copied().collect();
    let (s, t) = (0, 1);
    let client_node = |j: usize| 2 + j;
    let fac_node = |k: usize| 2 + nc + k;
    let mut net = BoundedNetwork::<i64>::new(2 + nc + open.len());
    let n = nc as i64;
    net.add_arc(t, s, n, n, 0);
    for j in 0..nc {
        net.add_arc(s, client_node(j), 1, 1, 0);
    }
    let mut links = Vec::with_capacity(nc * open.len());
    for j in 0..nc {
        for (k, &i) in open.iter().enumerate() {
            links.push((
                j,
                i,
                net.add_arc(client_node(j), fac_node(k), 0, 1, inst.fc(i, j)),
            ));
        }
    }
    for (k, &i) in open.iter().enumerate() {
        net.add_arc(fac_node(k), t, inst.facilities[i].lower_bound as i64, n, 0);
    }
    let circ = net
        .solve()
        .ok_or_else(|| Error::Internal("assignment flow infeasible despite counts".into()))?;
    let mut assign = vec![usize::MAX; nc];
    for (j, i, h) in links {
        if circ.flows[h] == 1 {
            assign[j] = i;
        }
    }
    if assign.contains(&usize::MAX) {
        return Err(Error::Internal(
            "assignment flow left a client unassigned".into(),
        ));
    }
    Ok((assign, circ.cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::e1;
    use proptest::prelude::*;

    /// Brute force: route each demand unit to some supply node with spare units.
    fn brute_transport(net: &[i64], cost: &[Vec<Cost>]) -> Cost {
        fn go(k: usize, demands: &[usize], supply: &mut [i64], cost: &[Vec<Cost>]) -> Cost {
            if k == demands.len() {
                return 0;
            }
            let v = demands[k];
            let mut best = Cost::MAX;
            for u in 0..supply.len() {
                if supply[u] > 0 {
                    supply[u] -= 1;
                    let rest = go(k + 1, demands, supply, cost);
                    supply[u] += 1;
                    if rest != Cost::MAX {
                        best = best.min(cost[u][v] + rest);
                    }
                }
            }
            best
        }
        let demands: Vec<usize> = net
            .iter()
            .enumerate()
            .flat_map(|(v, &x)| std::iter::repeat_n(v, (-x).max(0) as usize))
            .collect();
        let mut supply: Vec<i64> = net.iter().map(|&x| x.max(0)).collect();
        go(0, &demands, &mut supply, cost)
    }

    fn line_metric(xs: &[i64]) -> Vec<Vec<Cost>> {
        xs.iter()
            .map(|a| xs.iter().map(|b| (a - b).abs()).collect())
            .collect()
    }

    #[test]
    fn single_forced_shipment() {
        let p = TransportProblem::new(vec![2, -1], vec![vec![0, 3], vec![3, 0]]);
        let plan = solve_transport(&p).unwrap();
        assert_eq!(plan.cost, 3);
        assert_eq!(plan.flow, BTreeMap::from([((0, 1), 1)]));
    }

    #[test]
    fn zero_nets_ship_nothing() {
        let p = TransportProblem::new(vec![0, 0, 0], line_metric(&[0, 4, 9]));
        let plan = solve_transport(&p).unwrap();
        assert_eq!(plan.cost, 0);
        assert!(plan.flow.is_empty());
    }

    #[test]
    fn deficit_is_infeasible() {
        let p = TransportProblem::new(vec![1, -3], line_metric(&[0, 1]));
        assert!(matches!(solve_transport(&p), Err(Error::Infeasible(m)) if m.contains("by 2")));
    }

    #[test]
    fn four_node_case_matches_enumeration() {
        let net = vec![3, -2, 2, -1];
        let cost = line_metric(&[0, 7, 12, 30]);
        let plan = solve_transport(&TransportProblem::new(net.clone(), cost.clone())).unwrap();
        assert_eq!(plan.cost, brute_transport(&net, &cost));
        assert_eq!(plan.cost, 5 + 7 + 18);
    }

    #[test]
    fn assignment_on_e1() {
        let inst = e1();
        let (a, c) = assign_with_lower_bounds(&inst, &[0].into()).unwrap();
        assert_eq!((a, c), (vec![0, 0, 0], 10));
        let (a, c) = assign_with_lower_bounds(&inst, &[1].into()).unwrap();
        assert_eq!((a, c), (vec![1, 1, 1], 20));
        let (a, c) = assign_with_lower_bounds(&inst, &[0, 1].into()).unwrap();
        assert_eq!(c, 10);
        assert_eq!(a.iter().filter(|&&i| i == 1).count(), 2);
        assert_eq!(a[2], 1);
    }

    #[test]
    fn assignment_infeasible_when_bounds_exceed_clients() {
        let inst = crate::fixtures::line(&[(0, 0, 2), (5, 0, 2)], &[0, 1, 5]);
        assert!(matches!(
            assign_with_lower_bounds(&inst, &[0, 1].into()),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            assign_with_lower_bounds(&inst, &BTreeSet::new()),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn bounded_network_respects_lower_bounds() {
        // s=0 -> a=1 -> t=2 forced to carry 2 units; cheap bypass s->t cannot be used
        let mut net = BoundedNetwork::<i64>::new(3);
        net.add_arc(2, 0, 3, 3, 0);
        let forced = net.add_arc(0, 1, 2, 3, 5);
        net.add_arc(1, 2, 0, 3, 0);
        let bypass = net.add_arc(0, 2, 0, 3, 1);
        let c = net.solve().unwrap();
        assert_eq!(c.flows[forced], 2);
        assert_eq!(c.flows[bypass], 1);
        assert_eq!(c.cost, 11);
    }

    #[test]
    fn bounded_network_detects_infeasibility() {
        let mut net = BoundedNetwork::<i32>::new(2);
        net.add_arc(0, 1, 2, 2, 0);
        net.add_arc(1, 0, 0, 1, 0);
        assert!(net.solve().is_none());
    }

    fn small_problem() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
        (2usize..=5).prop_flat_map(|n| {
            (
                prop::collection::vec(-3i64..=3, n),
                prop::collection::vec(0i64..40, n),
            )
        })
    }

    proptest! {
        #[test]
        fn transport_matches_enumeration((mut net, xs) in small_problem()) {
            // repair to a nonnegative total by trimming demands
            while net.iter().sum::<i64>() < 0 {
                let k = net.iter().position(|&x| x < 0).unwrap();
                net[k] += 1;
            }
            let cost = line_metric(&xs);
            let plan = solve_transport(&TransportProblem::new(net.clone(), cost.clone())).unwrap();
            prop_assert_eq!(plan.cost, brute_transport(&net, &cost));
            prop_assert!(plan.is_feasible_for(&net));
            prop_assert_eq!(plan.recompute_cost(&cost), plan.cost);
            let demand: i64 = net.iter().filter(|&&x| x < 0).map(|x| -x).sum();
            prop_assert_eq!(plan.shipped(), demand);
        }
    }
}
