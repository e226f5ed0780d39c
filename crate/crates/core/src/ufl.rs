//! Bi-criteria stage: an auxiliary uncapacitated instance whose opening
//! costs absorb the lower bounds, solved greedily and pruned by closing
//! facilities, yields a `β`-covered solution.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::LbflInstance;
use crate::{Cost, Rational};

/// Auxiliary UFL instance `I′`.
///
/// Opening costs are `f′_i = f_i + (2β/(1−β)) · Σ_{j∈J_i} d(i,j)`, with
/// `J_i` the `B_i` clients nearest to `i`. All `I′` costs are stored
/// multiplied by `unit`, the denominator of `2β/(1−β)`, so they stay
/// integral; distances are multiplied by the same unit when costing.
#[derive(Debug, Clone)]
pub struct UflAugmented<'a> {
    pub base: &'a LbflInstance,
    pub beta: Rational,
    pub unit: i64,
    /// `None` for facilities with `B_i > |C|`, which cannot be opened.
    pub f_prime: Vec<Option<Cost>>,
    /// `J_i`, sorted by `(distance, client index)`.
    pub nearest: Vec<Vec<usize>>,
}

pub fn check_beta(beta: Rational) -> Result<()> {
    if beta <= Rational::new(1, 2) || beta >= Rational::from_integer(1) {
        return Err(Error::malformed(format!(
            "beta must lie in (1/2, 1), got {beta}"
        )));
    }
    Ok(())
}

/// `2β / (1 − β)`.
pub fn surcharge_coefficient(beta: Rational) -> Rational {
    Rational::from_integer(2) * beta / (Rational::from_integer(1) - beta)
}

pub fn build_ufl_instance(inst: &LbflInstance, beta: Rational) -> Result<UflAugmented<'_>> {
    check_beta(beta)?;
    let coef = surcharge_coefficient(beta);
    let unit = *coef.denom();
    let nc = inst.num_clients();
    let mut f_prime = Vec::with_capacity(inst.num_facilities());
    let mut nearest = Vec::with_capacity(inst.num_facilities());
    for (i, fac) in inst.facilities.iter().enumerate() {
        let b = fac.lower_bound as usize;
        if nc == 0 {
            f_prime.push(Some(fac.cost * unit));
            nearest.push(Vec::new());
            continue;
        }
        if b > nc {
            f_prime.push(None);
            nearest.push(Vec::new());
            continue;
        }
        let mut order: Vec<usize> = (0..nc).collect();
        order.sort_by_key(|&j| (inst.fc(i, j), j));
        order.truncate(b);
        let sum: Cost = order.iter().map(|&j| inst.fc(i, j)).sum();
        f_prime.push(Some(fac.cost * unit + *coef.numer() * sum));
        nearest.push(order);
    }
    Ok(UflAugmented {
        base: inst,
        beta,
        unit,
        f_prime,
        nearest,
    })
}

impl UflAugmented<'_> {
    pub fn eligible(&self) -> impl Iterator<Item = usize> + '_ {
        self.f_prime
            .iter()
            .enumerate()
            .filter_map(|(i, f)| f.map(|_| i))
    }

    /// `f′(S)` in `unit`s. Panics on ineligible facilities.
    pub fn opening_cost(&self, set: &BTreeSet<usize>) -> Cost {
        set.iter()
            .map(|&i| self.f_prime[i].expect("facility is eligible"))
            .sum()
    }

    /// `Σ_j d(j, S)` in `unit`s, or `None` for an empty set with clients.
    pub fn connection_cost(&self, set: &BTreeSet<usize>) -> Option<Cost> {
        let inst = self.base;
        let mut total = 0;
        for j in 0..inst.num_clients() {
            total += inst.dist_to_set(j, set)?;
        }
        Some(total * self.unit)
    }

    /// `cost_{I′}(S)` in `unit`s.
    pub fn cost(&self, set: &BTreeSet<usize>) -> Option<Cost> {
        Some(self.opening_cost(set) + self.connection_cost(set)?)
    }
}

/// Dual-fitting greedy for UFL.
///
/// Unconnected clients raise their budgets uniformly. A facility opens once
/// the offers it receives pay for `f′`: unconnected clients offer
/// `max(0, t − d(i,j))`, connected clients offer the saving
/// `max(0, d(j,σ_j) − d(i,j))` they would get by switching. On opening,
/// offering clients connect or switch to it. An unconnected client whose
/// budget reaches an open facility connects to it.
///
/// Contract: the returned `S′` satisfies
/// `cost_{I′}(S′) ≤ f′(T) + 2·Σ_j d(j,T)` for every facility set `T`. Any
/// solver honouring that contract can replace this one.
pub fn jms_solve(aug: &UflAugmented) -> Result<BTreeSet<usize>> {
    let inst = aug.base;
    let nc = inst.num_clients();
    let mut open = BTreeSet::new();
    if nc == 0 {
        return Ok(open);
    }
    let candidates: Vec<usize> = aug.eligible().collect();
    if candidates.is_empty() {
        return Err(Error::infeasible(
            "no facility has lower bound within the client count",
        ));
    }
    let d = |i: usize, j: usize| inst.fc(i, j) * aug.unit;
    let mut conn: Vec<Option<(usize, Cost)>> = vec![None; nc];
    let mut is_open = vec![false; inst.num_facilities()];
    let mut remaining = nc;

    while remaining > 0 {
        // next event as the ratio num/den, with the facility it concerns
        let mut best: Option<(i128, i128, usize)> = None;
        for &i in &candidates {
            let mut pending: Vec<Cost> = (0..nc)
                .filter(|&j| conn[j].is_none())
                .map(|j| d(i, j))
                .collect();
            pending.sort_unstable();
            let (num, den) = if is_open[i] {
                (pending[0] as i128, 1)
            } else {
                let savings: Cost = conn
                    .iter()
                    .enumerate()
                    .filter_map(|(j, c)| c.map(|(_, cd)| (cd - d(i, j)).max(0)))
                    .sum();
                let base = (aug.f_prime[i].expect("eligible") - savings) as i128;
                let mut prefix = 0i128;
                let mut star: Option<(i128, i128)> = None;
                for (k, &dj) in pending.iter().enumerate() {
                    prefix += dj as i128;
                    let cand = (base + prefix, k as i128 + 1);
                    if star.is_none_or(|s| cand.0 * s.1 <= s.0 * cand.1) {
                        star = Some(cand);
                    }
                }
                star.expect("at least one unconnected client")
            };
            if best.is_none_or(|(bn, bd, _)| num * bd < bn * den) {
                best = Some((num, den, i));
            }
        }
        let (num, den, i) = best.expect("candidate facilities exist");
        if !is_open[i] {
            is_open[i] = true;
            open.insert(i);
            for (j, c) in conn.iter_mut().enumerate() {
                if let Some((_, cd)) = *c {
                    if d(i, j) < cd {
                        *c = Some((i, d(i, j)));
                    }
                }
            }
        }
        for (j, c) in conn.iter_mut().enumerate() {
            if c.is_none() && (d(i, j) as i128) * den <= num {
                *c = Some((i, d(i, j)));
                remaining -= 1;
            }
        }
    }
    Ok(open)
}

/// Closes facilities while doing so does not increase `cost_{I′}`
/// (non-strict), scanning in ascending index until a full pass removes
/// nothing. Never empties the set while clients exist.
pub fn prune_by_closing(aug: &UflAugmented, set: &BTreeSet<usize>) -> BTreeSet<usize> {
    let has_clients = aug.base.num_clients() > 0;
    let mut s = set.clone();
    let mut current = aug.cost(&s);
    loop {
        let mut removed = false;
        for i in s.clone() {
            if has_clients && s.len() == 1 {
                break;
            }
            s.remove(&i);
            let trial = aug.cost(&s);
            match (trial, current) {
                (Some(t), Some(c)) if t <= c => {
                    current = Some(t);
                    removed = true;
                }
                (Some(t), None) => {
                    current = Some(t);
                    removed = true;
                }
                _ => {
                    s.insert(i);
                }
            }
        }
        if !removed {
            return s;
        }
    }
}

/// `(S°, σ°)` with every `i ∈ S°` serving at least `β·B_i` clients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaCoveredSolution {
    /// Open facilities, ascending, pairwise at positive distance.
    pub s_circ: Vec<usize>,
    /// Facility index per client, a nearest member of `S°`.
    pub sigma_circ: Vec<usize>,
    /// Client count per position of `s_circ`.
    pub n: Vec<u64>,
    pub beta: Rational,
    /// `cost_{I′}(S′)` of the greedy output, in `ufl_unit`s.
    pub ufl_cost: Cost,
    pub ufl_unit: i64,
}

impl BetaCoveredSolution {
    /// Position of facility `i` in `s_circ`.
    pub fn position(&self, i: usize) -> Option<usize> {
        self.s_circ.binary_search(&i).ok()
    }

    /// Location (position in `s_circ`) of each client.
    pub fn client_locations(&self) -> Vec<usize> {
        self.sigma_circ
            .iter()
            .map(|&i| self.position(i).expect("assigned to S°"))
            .collect()
    }

    pub fn is_covered(&self, inst: &LbflInstance) -> bool {
        self.s_circ
            .iter()
            .zip(&self.n)
            .all(|(&i, &n)| covers(self.beta, n, inst.facilities[i].lower_bound))
    }
}

/// `n ≥ β·B`, exactly.
pub fn covers(beta: Rational, n: u64, lower_bound: u64) -> bool {
    n as i128 * *beta.denom() as i128 >= *beta.numer() as i128 * lower_bound as i128
}

pub fn beta_covered(inst: &LbflInstance, beta: Rational) -> Result<BetaCoveredSolution> {
    let aug = build_ufl_instance(inst, beta)?;
    let nc = inst.num_clients();
    if nc == 0 {
        return Ok(BetaCoveredSolution {
            s_circ: Vec::new(),
            sigma_circ: Vec::new(),
            n: Vec::new(),
            beta,
            ufl_cost: 0,
            ufl_unit: aug.unit,
        });
    }
    let greedy = jms_solve(&aug)?;
    let ufl_cost = aug.cost(&greedy).expect("greedy opens a facility");
    let pruned = prune_by_closing(&aug, &greedy);

    // merge collocated members, keeping the lowest index
    let mut kept: Vec<usize> = Vec::new();
    for &i in &pruned {
        if kept.iter().all(|&k| inst.ff(k, i) > 0) {
            kept.push(i);
        }
    }
    let sigma_circ: Vec<usize> = (0..nc)
        .map(|j| inst.nearest_in(j, &kept).expect("S° nonempty"))
        .collect();
    let mut n = vec![0u64; kept.len()];
    for &i in &sigma_circ {
        n[kept.binary_search(&i).expect("kept is sorted")] += 1;
    }
    let out = BetaCoveredSolution {
        s_circ: kept,
        sigma_circ,
        n,
        beta,
        ufl_cost,
        ufl_unit: aug.unit,
    };
    if let Some((&i, &n)) = out
        .s_circ
        .iter()
        .zip(&out.n)
        .find(|(&i, &n)| !covers(beta, n, inst.facilities[i].lower_bound))
    {
        return Err(Error::certificate(
            "beta-covered solution",
            format!(
                "facility {} serves {n} < {beta}·{}",
                inst.facilities[i].id, inst.facilities[i].lower_bound
            ),
        ));
    }
    Ok(out)
}
