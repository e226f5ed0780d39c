//! Seeded random instance generation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Client, Facility, LbflInstance};
use crate::Cost;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Points on a line.
    Line,
    /// Points in the plane, Euclidean distance rounded up.
    Plane,
    /// Shortest-path completion of a random connected weighted graph.
    Graph,
    /// One of the above, chosen by the seed.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Profile {
    pub family: Family,
    /// Inclusive `[min, max]` facility count.
    pub facilities: [usize; 2],
    /// Inclusive `[min, max]` client count.
    pub clients: [usize; 2],
    /// Coordinates in `[0, coord_max]`; edge weights in `[1, coord_max]`.
    pub coord_max: i64,
    pub cost_max: i64,
    pub lower_bound_max: u64,
    /// Clamp every lower bound to the client count, so every facility is
    /// individually openable.
    pub clamp_lower_bounds: bool,
    pub scale: i64,
    /// Points gather around this many random centres; 0 or 1 is uniform.
    #[serde(default)]
    pub clusters: usize,
}

impl Profile {
    pub fn fixed(family: Family, facilities: usize, clients: usize) -> Self {
        Profile {
            family,
            facilities: [facilities, facilities],
            clients: [clients, clients],
            coord_max: 100,
            cost_max: 100,
            lower_bound_max: clients as u64,
            clamp_lower_bounds: true,
            scale: 1,
            clusters: 0,
        }
    }

    /// Oracle-solvable sizes: at most 7 facilities and 10 clients.
    pub fn tiny() -> Self {
        Profile {
            family: Family::Mixed,
            facilities: [2, 7],
            clients: [3, 10],
            coord_max: 100,
            cost_max: 120,
            lower_bound_max: 6,
            clamp_lower_bounds: true,
            scale: 1,
            clusters: 0,
        }
    }

    /// At most 8 clients in up to three tight groups, for exhaustive
    /// enumeration of the derived instances.
    pub fn micro() -> Self {
        Profile {
            family: Family::Mixed,
            facilities: [2, 6],
            clients: [3, 8],
            coord_max: 60,
            cost_max: 20,
            lower_bound_max: 4,
            clamp_lower_bounds: true,
            scale: 1,
            clusters: 3,
        }
    }

    /// Tiny sizes with points in three tight groups and cheap facilities,
    /// so the bi-criteria stage usually keeps several locations.
    pub fn clustered() -> Self {
        Profile {
            family: Family::Mixed,
            facilities: [3, 7],
            clients: [4, 10],
            coord_max: 100,
            cost_max: 30,
            lower_bound_max: 4,
            clamp_lower_bounds: true,
            scale: 1,
            clusters: 3,
        }
    }

    pub fn small() -> Self {
        Profile {
            family: Family::Mixed,
            facilities: [5, 15],
            clients: [10, 40],
            coord_max: 1000,
            cost_max: 2000,
            lower_bound_max: 12,
            clamp_lower_bounds: true,
            scale: 1,
            clusters: 0,
        }
    }

    /// Resolves a preset name.
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "tiny" => Some(Self::tiny()),
            "micro" => Some(Self::micro()),
            "clustered" => Some(Self::clustered()),
            "small" => Some(Self::small()),
            _ => None,
        }
    }

    fn check(&self) -> Result<()> {
        if self.facilities[0] > self.facilities[1] || self.clients[0] > self.clients[1] {
            return Err(Error::malformed("profile: count range has min > max"));
        }
        if self.coord_max < 1 || self.cost_max < 0 || self.scale < 1 {
            return Err(Error::malformed(
                "profile: need coord_max >= 1, cost_max >= 0, scale >= 1",
            ));
        }
        Ok(())
    }
}

/// Deterministic for a fixed `(seed, profile)`.
pub fn generate_instance(seed: u64, profile: &Profile) -> Result<LbflInstance> {
    profile.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nf = rng.gen_range(profile.facilities[0]..=profile.facilities[1]);
    let nc = rng.gen_range(profile.clients[0]..=profile.clients[1]);
    let lb_max = if profile.clamp_lower_bounds {
        profile.lower_bound_max.min(nc as u64)
    } else {
        profile.lower_bound_max
    };
    let facilities = (0..nf)
        .map(|k| Facility {
            id: format!("f{k}"),
            cost: rng.gen_range(0..=profile.cost_max),
            lower_bound: rng.gen_range(0..=lb_max),
        })
        .collect();
    let clients = (0..nc)
        .map(|k| Client {
            id: format!("c{k}"),
        })
        .collect();
    let n = nf + nc;
    let family = match profile.family {
        Family::Mixed => [Family::Line, Family::Plane, Family::Graph][(seed % 3) as usize],
        f => f,
    };
    let cmax = profile.coord_max;
    let groups = profile.clusters.max(1);
    let spread = if groups > 1 {
        (cmax / (10 * groups as i64)).max(1)
    } else {
        cmax
    };
    let group: Vec<usize> = (0..n).map(|_| rng.gen_range(0..groups)).collect();
    let dims = match family {
        Family::Line => 1,
        Family::Plane => 2,
        _ => 0,
    };
    if dims > 0 {
        let centres: Vec<Vec<i64>> = (0..groups)
            .map(|_| (0..dims).map(|_| rng.gen_range(0..=cmax)).collect())
            .collect();
        let points = group
            .iter()
            .map(|&g| {
                if groups > 1 {
                    centres[g]
                        .iter()
                        .map(|c| c + rng.gen_range(-spread..=spread))
                        .collect()
                } else {
                    (0..dims).map(|_| rng.gen_range(0..=cmax)).collect()
                }
            })
            .collect();
        LbflInstance::from_points(profile.scale, facilities, clients, points)
    } else {
        let weight = |rng: &mut ChaCha8Rng, a: usize, b: usize| {
            if groups > 1 && group[a] != group[b] {
                rng.gen_range((cmax / 2).max(1)..=cmax)
            } else {
                rng.gen_range(1..=spread)
            }
        };
        let dist = random_graph_metric(&mut rng, n, weight);
        Ok(LbflInstance::from_parts(
            profile.scale,
            facilities,
            clients,
            dist,
        ))
    }
}

fn random_graph_metric(
    rng: &mut ChaCha8Rng,
    n: usize,
    weight: impl Fn(&mut ChaCha8Rng, usize, usize) -> Cost,
) -> Vec<Vec<Cost>> {
    const INF: Cost = Cost::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for (k, row) in d.iter_mut().enumerate() {
        row[k] = 0;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let add = |d: &mut Vec<Vec<Cost>>, a: usize, b: usize, w: Cost| {
        if w < d[a][b] {
            d[a][b] = w;
            d[b][a] = w;
        }
    };
    // random spanning tree, then about n extra edges
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        let w = weight(rng, order[k], parent);
        add(&mut d, order[k], parent, w);
    }
    if n >= 2 {
        for _ in 0..n {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            let w = weight(rng, a, b);
            if a != b {
                add(&mut d, a, b, w);
            }
        }
    }
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                let via = d[a][k] + d[k][b];
                if via < d[a][b] {
                    d[a][b] = via;
                }
            }
        }
    }
    d
}
