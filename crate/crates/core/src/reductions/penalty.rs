//! `I³`: lower-bounded facility location where clients may stay
//! unconnected, paying a penalty at every location without an open
//! facility. Also the reconnection procedure lifting `I³` solutions to `I²`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::certificate::Check;
use crate::error::{Error, Result};
use crate::instance::{cost_of, CostBreakdown, LbflSolution};
use crate::reductions::aggregate::StageI2;
use crate::reductions::{penalty_coefficient, reconnection_factor};
use crate::scaled::Scaled;
use crate::{Cost, Rational};

/// A facility of `⋃ N_v`, placed at its location.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocatedFacility {
    pub facility: usize,
    pub loc: usize,
    /// `f²`.
    pub cost: Cost,
    pub lower_bound: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageI3 {
    pub scale: i64,
    /// `d²` restricted to `S°`, indexed by location.
    pub dist: Vec<Vec<Cost>>,
    pub n: Vec<u64>,
    pub ell: Vec<Cost>,
    pub client_loc: Vec<usize>,
    /// Facilities of `⋃ N_v`, ascending by facility index.
    pub facilities: Vec<LocatedFacility>,
    /// The `S°` member (a free facility) at each location.
    pub home: Vec<usize>,
    pub penalty_coeff: Rational,
    /// `penalty_coeff · n_v · ℓ_v` per location.
    pub penalty: Vec<Cost>,
}

impl StageI3 {
    /// Assembles an instance, computing the penalties. Fails if a penalty
    /// is not integral at this scale.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        scale: i64,
        dist: Vec<Vec<Cost>>,
        n: Vec<u64>,
        ell: Vec<Cost>,
        client_loc: Vec<usize>,
        mut facilities: Vec<LocatedFacility>,
        home: Vec<usize>,
        beta: Rational,
    ) -> Result<Self> {
        let coeff = penalty_coefficient(beta);
        let penalty = n
            .iter()
            .zip(&ell)
            .map(|(&nv, &l)| {
                let raw = *coeff.numer() as i128 * nv as i128 * l as i128;
                let den = *coeff.denom() as i128;
                if raw % den != 0 {
                    return Err(Error::Internal(format!(
                        "penalty {coeff}·{nv}·{l} is not integral at this scale"
                    )));
                }
                Ok((raw / den) as Cost)
            })
            .collect::<Result<_>>()?;
        facilities.sort_by_key(|f| f.facility);
        Ok(StageI3 {
            scale,
            dist,
            n,
            ell,
            client_loc,
            facilities,
            home,
            penalty_coeff: coeff,
            penalty,
        })
    }

    pub fn num_locations(&self) -> usize {
        self.n.len()
    }

    pub fn locate(&self, facility: usize) -> Option<&LocatedFacility> {
        self.facilities
            .binary_search_by_key(&facility, |f| f.facility)
            .ok()
            .map(|k| &self.facilities[k])
    }

    /// `N_v` for location `v`.
    pub fn members(&self, loc: usize) -> impl Iterator<Item = &LocatedFacility> {
        self.facilities.iter().filter(move |f| f.loc == loc)
    }

    pub fn clients_at(&self, loc: usize) -> impl Iterator<Item = usize> + '_ {
        self.client_loc
            .iter()
            .enumerate()
            .filter(move |(_, &l)| l == loc)
            .map(|(j, _)| j)
    }

    fn home_lower_bound(&self, loc: usize) -> u64 {
        self.locate(self.home[loc])
            .expect("home facility is in its own ball")
            .lower_bound
    }
}

/// Drops facilities outside every `N_v`; they never need to open.
pub fn build_penalty_instance(i2: &StageI2, beta: Rational) -> Result<StageI3> {
    let inst = &i2.instance;
    let k = i2.s_circ.len();
    let dist = (0..k)
        .map(|p| {
            (0..k)
                .map(|q| inst.ff(i2.s_circ[p], i2.s_circ[q]))
                .collect()
        })
        .collect();
    let facilities = (0..inst.num_facilities())
        .filter_map(|i| {
            i2.phi[i].map(|loc| LocatedFacility {
                facility: i,
                loc,
                cost: inst.facilities[i].cost,
                lower_bound: inst.facilities[i].lower_bound,
            })
        })
        .collect();
    StageI3::new(
        inst.scale,
        dist,
        i2.n.clone(),
        i2.ell.clone(),
        i2.client_loc.clone(),
        facilities,
        i2.s_circ.clone(),
        beta,
    )
}

/// `(S, σ)` with `σ_j = None` for unconnected clients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialSolution {
    pub open: BTreeSet<usize>,
    pub assign: Vec<Option<usize>>,
}

impl PartialSolution {
    /// Open facility per location, if any.
    fn open_by_location(&self, i3: &StageI3) -> Result<Vec<Option<usize>>> {
        let mut at = vec![None; i3.num_locations()];
        for &i in &self.open {
            let f = i3.locate(i).ok_or_else(|| {
                Error::InvalidSolution(format!("facility {i} is outside every N_v"))
            })?;
            if let Some(other) = at[f.loc].replace(i) {
                return Err(Error::InvalidSolution(format!(
                    "facilities {other} and {i} both open at location {}",
                    f.loc
                )));
            }
        }
        Ok(at)
    }
}

/// `f²(S) + ccost + pcost`; lower-bound violations are errors.
pub fn cost_lbflp(i3: &StageI3, ps: &PartialSolution) -> Result<CostBreakdown> {
    let at = ps.open_by_location(i3)?;
    if ps.assign.len() != i3.client_loc.len() {
        return Err(Error::InvalidSolution(
            "assignment length differs from client count".into(),
        ));
    }
    let mut load: BTreeMap<usize, u64> = BTreeMap::new();
    let mut connection = 0;
    for (j, a) in ps.assign.iter().enumerate() {
        if let Some(i) = *a {
            if !ps.open.contains(&i) {
                return Err(Error::InvalidSolution(format!(
                    "client {j} assigned to closed facility {i}"
                )));
            }
            *load.entry(i).or_default() += 1;
            connection += i3.dist[i3.client_loc[j]][i3.locate(i).expect("open").loc];
        }
    }
    let mut facility = 0;
    for &i in &ps.open {
        let f = i3.locate(i).expect("checked above");
        let served = load.get(&i).copied().unwrap_or(0);
        if served < f.lower_bound {
            return Err(Error::InvalidSolution(format!(
                "facility {i} serves {served} < lower bound {}",
                f.lower_bound
            )));
        }
        facility += f.cost;
    }
    let penalty = (0..i3.num_locations())
        .filter(|&v| at[v].is_none())
        .map(|v| i3.penalty[v])
        .sum();
    Ok(CostBreakdown::new(facility, connection, penalty))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComponentKind {
    /// In-tree whose root has an open facility.
    Tree { root: usize },
    /// In-tree whose root is the 2-cycle `{r, r′}`, with `B_r ≤ B_r′`.
    TwoCycle { r: usize, r_prime: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub vertices: Vec<usize>,
    pub kind: ComponentKind,
}

/// Nearest-neighbour graph on closed locations: each closed `v` points at
/// `π_v`, its nearest other location by `(distance, index)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovingForest {
    pub open: Vec<bool>,
    pub pi: Vec<Option<usize>>,
    pub components: Vec<Component>,
}

impl MovingForest {
    pub fn build(i3: &StageI3, open: Vec<bool>) -> Result<Self> {
        let k = i3.num_locations();
        let pi: Vec<Option<usize>> = (0..k)
            .map(|v| {
                if open[v] {
                    None
                } else {
                    (0..k)
                        .filter(|&u| u != v)
                        .min_by_key(|&u| (i3.dist[v][u], u))
                }
            })
            .collect();
        // weakly connected components
        let mut comp = vec![usize::MAX; k];
        let mut undirected = vec![Vec::new(); k];
        for v in 0..k {
            if let Some(u) = pi[v] {
                undirected[v].push(u);
                undirected[u].push(v);
            }
        }
        let mut components = Vec::new();
        for start in 0..k {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut vertices = Vec::new();
            let mut queue = VecDeque::from([start]);
            comp[start] = id;
            while let Some(v) = queue.pop_front() {
                vertices.push(v);
                for &u in &undirected[v] {
                    if comp[u] == usize::MAX {
                        comp[u] = id;
                        queue.push_back(u);
                    }
                }
            }
            vertices.sort_unstable();
            let kind = Self::classify(i3, &open, &pi, vertices[0])?;
            components.push(Component { vertices, kind });
        }
        let forest = MovingForest {
            open,
            pi,
            components,
        };
        forest.check_shape()?;
        Ok(forest)
    }

    fn classify(
        i3: &StageI3,
        open: &[bool],
        pi: &[Option<usize>],
        from: usize,
    ) -> Result<ComponentKind> {
        let mut seen = vec![false; open.len()];
        let mut v = from;
        loop {
            match pi[v] {
                None => return Ok(ComponentKind::Tree { root: v }),
                Some(u) => {
                    if seen[v] {
                        // v is on the cycle; measure it
                        let mut len = 1;
                        let mut w = u;
                        while w != v {
                            w = pi[w].expect("cycle vertices are closed");
                            len += 1;
                        }
                        if len != 2 {
                            return Err(Error::Internal(format!(
                                "nearest-neighbour cycle of length {len} through location {v}"
                            )));
                        }
                        let (a, b) = (v.min(u), v.max(u));
                        let (r, r_prime) = if i3.home_lower_bound(b) < i3.home_lower_bound(a) {
                            (b, a)
                        } else {
                            (a, b)
                        };
                        return Ok(ComponentKind::TwoCycle { r, r_prime });
                    }
                    seen[v] = true;
                    v = u;
                }
            }
        }
    }

    /// Tree roots are open and everything else closed; cycle components
    /// are entirely closed.
    fn check_shape(&self) -> Result<()> {
        for c in &self.components {
            let ok = match c.kind {
                ComponentKind::Tree { root } => {
                    c.vertices.iter().all(|&v| self.open[v] == (v == root))
                }
                ComponentKind::TwoCycle { .. } => c.vertices.iter().all(|&v| !self.open[v]),
            };
            if !ok {
                return Err(Error::Internal(format!(
                    "component {:?} violates the forest shape",
                    c.vertices
                )));
            }
        }
        Ok(())
    }

    /// Parent in the moving tree; the edge `r → r′` is dropped.
    fn parent(&self, v: usize, kind: ComponentKind) -> Option<usize> {
        match kind {
            ComponentKind::TwoCycle { r, .. } if v == r => None,
            _ => self.pi[v],
        }
    }

    /// Non-root vertices of a component, deepest first.
    fn bottom_up(&self, c: &Component) -> Vec<usize> {
        let depth = |mut v: usize| {
            let mut d = 0;
            while let Some(u) = self.parent(v, c.kind) {
                v = u;
                d += 1;
            }
            d
        };
        let mut order: Vec<(usize, usize)> = c
            .vertices
            .iter()
            .map(|&v| (depth(v), v))
            .filter(|&(d, _)| d > 0)
            .collect();
        order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        order.into_iter().map(|(_, v)| v).collect()
    }
}

/// Connects every client left unconnected by an `I³` solution, producing a
/// feasible `I²` solution over the same facilities.
///
/// Stray clients at locations with an open facility join it. The rest
/// move bottom-up along the nearest-neighbour forest; a closed location
/// opens its free facility once it has accumulated its lower bound. A
/// 2-cycle root that cannot open sends its clients to `r′` if that opened,
/// and otherwise to the open location nearest to `{r, r′}`.
///
/// Returns the solution with the check
/// `cost_{I²}(out) ≤ (2β/(2β−1)) · cost_{I³}(ps)`.
pub fn lift_lbflp_to_i2(
    i3: &StageI3,
    i2: &StageI2,
    ps: &PartialSolution,
    beta: Rational,
) -> Result<(LbflSolution, Check)> {
    let cost3 = cost_lbflp(i3, ps)?;
    let k = i3.num_locations();
    let at = ps.open_by_location(i3)?;
    let mut assign = ps.assign.clone();
    let mut pending: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (j, a) in assign.iter().enumerate() {
        if a.is_none() {
            pending[i3.client_loc[j]].push(j);
        }
    }
    for v in 0..k {
        if let Some(i) = at[v] {
            for j in pending[v].drain(..) {
                assign[j] = Some(i);
            }
        }
    }

    let forest = MovingForest::build(i3, at.iter().map(Option::is_some).collect())?;
    let mut opened: Vec<Option<usize>> = at.clone();
    let mut open_now =
        |v: usize, pending: &mut Vec<Vec<usize>>, opened: &mut Vec<Option<usize>>| {
            let i = *opened[v].get_or_insert(i3.home[v]);
            for j in pending[v].drain(..) {
                assign[j] = Some(i);
            }
        };
    let open_locations: Vec<usize> = (0..k).filter(|&v| at[v].is_some()).collect();
    for c in &forest.components {
        for v in forest.bottom_up(c) {
            let b = i3.home_lower_bound(v) as usize;
            if !pending[v].is_empty() && pending[v].len() >= b {
                open_now(v, &mut pending, &mut opened);
            } else {
                let u = forest.parent(v, c.kind).expect("non-root has a parent");
                let moved = std::mem::take(&mut pending[v]);
                pending[u].extend(moved);
            }
        }
        match c.kind {
            ComponentKind::Tree { root } => open_now(root, &mut pending, &mut opened),
            ComponentKind::TwoCycle { r, r_prime } => {
                if pending[r].is_empty() {
                    continue;
                }
                let target = if pending[r].len() >= i3.home_lower_bound(r) as usize {
                    r
                } else if opened[r_prime].is_some() {
                    r_prime
                } else {
                    *open_locations
                        .iter()
                        .min_by_key(|&&u| (i3.dist[u][r].min(i3.dist[u][r_prime]), u))
                        .ok_or_else(|| {
                            Error::infeasible("no open location to absorb unconnected clients")
                        })?
                };
                if target != r {
                    let moved = std::mem::take(&mut pending[r]);
                    pending[target].extend(moved);
                }
                open_now(target, &mut pending, &mut opened);
            }
        }
    }

    let sol = LbflSolution {
        open: opened.iter().flatten().copied().collect(),
        assign: assign
            .into_iter()
            .map(|a| a.ok_or_else(|| Error::Internal("client left unconnected".into())))
            .collect::<Result<_>>()?,
    };
    let report = cost_of(&i2.instance, &sol)?;
    if let Some(v) = report.violations.first() {
        return Err(Error::Internal(format!(
            "reconnected solution violates lower bound of facility {} ({} < {})",
            v.facility, v.served, v.required
        )));
    }
    let check = Check::leq(
        "cost_I2(lifted) <= 2b/(2b-1) * cost_I3",
        "I3-to-I2",
        Scaled::new(report.cost.total, i2.instance.scale),
        reconnection_factor(beta),
        Scaled::new(cost3.total, i3.scale),
    )
    .require()?;
    Ok((sol, check))
}
