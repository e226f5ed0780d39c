//! Client aggregation onto `S°` and facility aggregation onto nearby
//! `S°` locations.

use crate::error::{Error, Result};
use crate::instance::{Facility, LbflInstance};
use crate::reductions::penalty_coefficient;
use crate::ufl::BetaCoveredSolution;
use crate::{Cost, Rational};

/// `I¹`: every client moved onto its bi-criteria facility, which becomes free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageI1 {
    /// Same facilities, clients and scale as the input; `d¹` and `f¹`.
    pub instance: LbflInstance,
    pub s_circ: Vec<usize>,
    pub sigma_circ: Vec<usize>,
    /// Location (position in `s_circ`) of each client.
    pub client_loc: Vec<usize>,
    pub n: Vec<u64>,
}

pub fn aggregate_clients(inst: &LbflInstance, bc: &BetaCoveredSolution) -> StageI1 {
    let nf = inst.num_facilities();
    let nc = inst.num_clients();
    let sigma = &bc.sigma_circ;
    let mut dist = vec![vec![0; nf + nc]; nf + nc];
    for a in 0..nf {
        for b in 0..nf {
            dist[a][b] = inst.ff(a, b);
        }
        for j in 0..nc {
            let d = inst.ff(a, sigma[j]);
            dist[a][nf + j] = d;
            dist[nf + j][a] = d;
        }
    }
    for j in 0..nc {
        for k in 0..nc {
            dist[nf + j][nf + k] = inst.ff(sigma[j], sigma[k]);
        }
    }
    let facilities = inst
        .facilities
        .iter()
        .enumerate()
        .map(|(i, f)| Facility {
            cost: if bc.position(i).is_some() { 0 } else { f.cost },
            ..f.clone()
        })
        .collect();
    StageI1 {
        instance: LbflInstance::from_parts(inst.scale, facilities, inst.clients.clone(), dist),
        s_circ: bc.s_circ.clone(),
        sigma_circ: bc.sigma_circ.clone(),
        client_loc: bc.client_locations(),
        n: bc.n.clone(),
    }
}

impl StageI1 {
    /// `|ccost_{I¹}(σ) − ccost_I(σ)| ≤ ccost_I(σ°)` for an assignment `σ`.
    pub fn perturbation_holds(&self, inst: &LbflInstance, assign: &[usize]) -> bool {
        let moved: Cost = assign
            .iter()
            .enumerate()
            .map(|(j, &i)| self.instance.fc(i, j))
            .sum();
        let orig: Cost = assign.iter().enumerate().map(|(j, &i)| inst.fc(i, j)).sum();
        let budget: Cost = self
            .sigma_circ
            .iter()
            .enumerate()
            .map(|(j, &i)| inst.fc(i, j))
            .sum();
        (moved - orig).abs() <= budget
    }
}

/// `I²`: facilities in the open ball `N_v` of radius `ℓ_v / 2` moved onto
/// `v`, with opening cost raised by `(2/3)·n_v·d¹(v, i)`.
///
/// Costs are stored multiplied by `unit` (recorded in `instance.scale`)
/// so that this surcharge and the later penalties are integral.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageI2 {
    /// `d²` and `f²`, at scale `input scale · unit`.
    pub instance: LbflInstance,
    pub unit: i64,
    pub s_circ: Vec<usize>,
    pub client_loc: Vec<usize>,
    pub n: Vec<u64>,
    /// `ℓ_v`, in `I²` units.
    pub ell: Vec<Cost>,
    /// `N_v`, ascending facility indices.
    pub members: Vec<Vec<usize>>,
    /// `φ`: the location a facility was moved to, if any.
    pub phi: Vec<Option<usize>>,
}

/// Surcharge coefficient on moved facilities; fixed, independent of `β`.
pub fn facility_surcharge() -> Rational {
    Rational::new(2, 3)
}

/// Multiplier making `I²`–`I⁵` costs integral for this `β`.
pub fn stage_unit(beta: Rational) -> i64 {
    num_integer::lcm(
        *facility_surcharge().denom(),
        *penalty_coefficient(beta).denom(),
    )
}

pub fn aggregate_facilities(i1: &StageI1, beta: Rational) -> Result<StageI2> {
    let k = i1.s_circ.len();
    if k < 2 {
        return Err(Error::Degenerate(k));
    }
    let unit = stage_unit(beta);
    let base = &i1.instance;
    let nf = base.num_facilities();
    let nc = base.num_clients();

    let ell1: Vec<Cost> = i1
        .s_circ
        .iter()
        .map(|&v| {
            i1.s_circ
                .iter()
                .filter(|&&u| u != v)
                .map(|&u| base.ff(v, u))
                .min()
                .expect("at least two locations")
        })
        .collect();
    if let Some(p) = ell1.iter().position(|&l| l == 0) {
        return Err(Error::Internal(format!(
            "location {} is collocated with another S° member",
            base.facilities[i1.s_circ[p]].id
        )));
    }

    let mut phi = vec![None; nf];
    let mut members = vec![Vec::new(); k];
    for i in 0..nf {
        for (p, &v) in i1.s_circ.iter().enumerate() {
            if 2 * base.ff(v, i) < ell1[p] {
                if let Some(q) = phi[i] {
                    return Err(Error::Internal(format!(
                        "facility {} lies in two open balls ({q} and {p})",
                        base.facilities[i].id
                    )));
                }
                phi[i] = Some(p);
                members[p].push(i);
            }
        }
    }

    let surcharge = facility_surcharge();
    let facilities: Vec<Facility> = base
        .facilities
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let extra = match phi[i] {
                Some(p) => {
                    let v = i1.s_circ[p];
                    // (2/3)·n_v·d¹(v,i)·unit; unit is a multiple of 3
                    *surcharge.numer()
                        * i1.n[p] as Cost
                        * base.ff(v, i)
                        * (unit / *surcharge.denom())
                }
                None => 0,
            };
            Facility {
                cost: f.cost * unit + extra,
                ..f.clone()
            }
        })
        .collect();

    // moved position of each facility as a point index in d¹
    let anchor: Vec<usize> = (0..nf)
        .map(|i| phi[i].map_or(i, |p| i1.s_circ[p]))
        .collect();
    let mut dist = vec![vec![0; nf + nc]; nf + nc];
    for a in 0..nf {
        for b in 0..nf {
            dist[a][b] = base.ff(anchor[a], anchor[b]) * unit;
        }
        for j in 0..nc {
            let d = base.fc(anchor[a], j) * unit;
            dist[a][nf + j] = d;
            dist[nf + j][a] = d;
        }
    }
    for j in 0..nc {
        for l in 0..nc {
            dist[nf + j][nf + l] = base.cc(j, l) * unit;
        }
    }
    Ok(StageI2 {
        instance: LbflInstance::from_parts(
            base.scale * unit,
            facilities,
            base.clients.clone(),
            dist,
        ),
        unit,
        s_circ: i1.s_circ.clone(),
        client_loc: i1.client_loc.clone(),
        n: i1.n.clone(),
        ell: ell1.iter().map(|l| l * unit).collect(),
        members,
        phi,
    })
}

impl StageI2 {
    /// Facility–client pairs with `d²(i,j) > 2·d¹(i,j)`; always empty.
    pub fn metric_bound_violations(&self, i1: &StageI1) -> Vec<(usize, usize)> {
        let d1 = &i1.instance;
        let mut out = Vec::new();
        for i in 0..d1.num_facilities() {
            for j in 0..d1.num_clients() {
                if self.instance.fc(i, j) > 2 * self.unit * d1.fc(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Facilities outside every ball closer than `ℓ_v / 2` to some `v`.
    pub fn far_facility_violations(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in (0..self.instance.num_facilities()).filter(|&i| self.phi[i].is_none()) {
            for (p, &v) in self.s_circ.iter().enumerate() {
                if 2 * self.instance.ff(i, v) < self.ell[p] {
                    out.push((i, p));
                }
            }
        }
        out
    }

    pub fn members_disjoint(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        self.members.iter().flatten().all(|&i| seen.insert(i))
    }
}
