//! `I⁵`: capacitated facility location built from power-of-two rounded,
//! dominance-pruned option lists.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cfl::CflSolution;
use crate::error::{Error, Result};
use crate::reductions::tcsd::{TcsdInstance, TcsdOption};
use crate::Cost;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalPair {
    pub h: Cost,
    pub y: i64,
    /// Index of the raw option this pair was rounded from.
    pub origin: usize,
}

/// Pairs with `h` and `y` both strictly increasing; `h_1 = 0` and every
/// other `h` is a power of two.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalRv {
    pub pairs: Vec<CanonicalPair>,
}

impl CanonicalRv {
    pub fn is_valid(&self) -> bool {
        let p = &self.pairs;
        !p.is_empty()
            && p[0].h == 0
            && p.iter()
                .skip(1)
                .all(|q| q.h > 0 && (q.h as u64).is_power_of_two())
            && p.windows(2).all(|w| w[0].h < w[1].h && w[0].y < w[1].y)
    }
}

/// Smallest power of two `≥ g`; zero stays zero.
pub fn round_up_pow2(g: Cost) -> Cost {
    if g <= 0 {
        0
    } else {
        (g as u64).next_power_of_two() as Cost
    }
}

/// Rounds every `g` up to a power of two and drops dominated pairs.
pub fn canonicalize_rv(t: &TcsdInstance) -> Result<Vec<CanonicalRv>> {
    t.options
        .iter()
        .enumerate()
        .map(|(v, opts)| {
            let mut rounded: Vec<CanonicalPair> = opts
                .iter()
                .enumerate()
                .map(|(k, o)| CanonicalPair {
                    h: round_up_pow2(o.g),
                    y: o.z,
                    origin: k,
                })
                .collect();
            rounded.sort_by(|a, b| {
                a.h.cmp(&b.h)
                    .then(b.y.cmp(&a.y))
                    .then(a.origin.cmp(&b.origin))
            });
            let mut pairs: Vec<CanonicalPair> = Vec::new();
            for p in rounded {
                if pairs.last().is_none_or(|q| p.y > q.y) {
                    pairs.push(p);
                }
            }
            let rv = CanonicalRv { pairs };
            if !rv.is_valid() {
                return Err(Error::Internal(format!(
                    "location {v} has no zero-cost option"
                )));
            }
            Ok(rv)
        })
        .collect()
}

/// The TCSD instance whose options are exactly the canonical pairs.
pub fn canonical_tcsd(t: &TcsdInstance, canon: &[CanonicalRv]) -> TcsdInstance {
    let options = canon
        .iter()
        .enumerate()
        .map(|(v, rv)| {
            rv.pairs
                .iter()
                .map(|p| TcsdOption {
                    g: p.h,
                    z: p.y,
                    source: t.options[v][p.origin].source,
                })
                .collect()
        })
        .collect();
    TcsdInstance {
        scale: t.scale,
        dist: t.dist.clone(),
        options,
    }
}

/// Maps canonical levels (0-based) to indices of the raw options.
pub fn raw_choice(canon: &[CanonicalRv], levels: &[usize]) -> Vec<usize> {
    levels
        .iter()
        .zip(canon)
        .map(|(&l, rv)| rv.pairs[l].origin)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Supplier {
    pub loc: usize,
    /// 0-based index into the location's canonical list; level 0 is free.
    pub level: usize,
    pub cost: Cost,
    pub capacity: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CflInstance {
    pub scale: i64,
    pub dist: Vec<Vec<Cost>>,
    pub demand: Vec<i64>,
    pub suppliers: Vec<Supplier>,
}

impl CflInstance {
    pub fn num_locations(&self) -> usize {
        self.demand.len()
    }

    pub fn total_demand(&self) -> i64 {
        self.demand.iter().sum()
    }

    pub fn capacity_of(&self, open: &BTreeSet<usize>) -> i64 {
        open.iter().map(|&s| self.suppliers[s].capacity).sum()
    }

    /// Per-location open capacity minus demand.
    pub fn nets(&self, open: &BTreeSet<usize>) -> Vec<i64> {
        let mut net: Vec<i64> = self.demand.iter().map(|d| -d).collect();
        for &s in open {
            net[self.suppliers[s].loc] += self.suppliers[s].capacity;
        }
        net
    }
}

/// Demand `−y_1` where `y_1 ≤ 0`, otherwise a free supplier of capacity
/// `y_1`; then one supplier per further level with the marginal capacity.
pub fn build_cfl(canon: &[CanonicalRv], dist: &[Vec<Cost>], scale: i64) -> CflInstance {
    let mut demand = vec![0; canon.len()];
    let mut suppliers = Vec::new();
    for (v, rv) in canon.iter().enumerate() {
        let first = rv.pairs[0];
        if first.y <= 0 {
            demand[v] = -first.y;
        } else {
            suppliers.push(Supplier {
                loc: v,
                level: 0,
                cost: 0,
                capacity: first.y,
            });
        }
        for (l, w) in rv.pairs.windows(2).enumerate() {
            suppliers.push(Supplier {
                loc: v,
                level: l + 1,
                cost: w[1].h,
                capacity: w[1].y - w[0].y,
            });
        }
    }
    CflInstance {
        scale,
        dist: dist.to_vec(),
        demand,
        suppliers,
    }
}

/// Per location, the highest open level (0 if none).
pub fn lift_cfl_to_tcsd(
    canon: &[CanonicalRv],
    cfl: &CflInstance,
    sol: &CflSolution,
) -> Result<Vec<usize>> {
    if canon.len() != cfl.num_locations() {
        return Err(Error::Internal(
            "canonical lists and CFL instance disagree on locations".into(),
        ));
    }
    if cfl.capacity_of(&sol.open) < cfl.total_demand() {
        return Err(Error::InvalidSolution(
            "open suppliers cannot cover the demand".into(),
        ));
    }
    let mut levels = vec![0; canon.len()];
    for &s in &sol.open {
        let sup = cfl
            .suppliers
            .get(s)
            .ok_or_else(|| Error::InvalidSolution(format!("unknown supplier {s}")))?;
        levels[sup.loc] = levels[sup.loc].max(sup.level);
    }
    Ok(levels)
}

/// Suppliers opened to realize a canonical choice: every level up to the
/// chosen one at each location.
pub fn realize_prefix(cfl: &CflInstance, levels: &[usize]) -> BTreeSet<usize> {
    cfl.suppliers
        .iter()
        .enumerate()
        .filter(|(_, s)| s.level <= levels[s.loc])
        .map(|(k, _)| k)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reductions::tcsd::OptionSource;

    fn tcsd(lists: Vec<Vec<(Cost, i64)>>) -> TcsdInstance {
        let k = lists.len();
        TcsdInstance {
            scale: 1,
            dist: vec![vec![0; k]; k],
            options: lists
                .into_iter()
                .map(|l| {
                    l.into_iter()
                        .map(|(g, z)| TcsdOption {
                            g,
                            z,
                            source: OptionSource::Penalty,
                        })
                        .collect()
                })
                .collect(),
        }
    }

    fn hy(rv: &CanonicalRv) -> Vec<(Cost, i64)> {
        rv.pairs.iter().map(|p| (p.h, p.y)).collect()
    }

    fn canon(pairs: &[(Cost, i64)]) -> CanonicalRv {
        CanonicalRv {
            pairs: pairs
                .iter()
                .enumerate()
                .map(|(k, &(h, y))| CanonicalPair { h, y, origin: k })
                .collect(),
        }
    }

    #[test]
    fn dominated_pair_is_dropped() {
        let c = canonicalize_rv(&tcsd(vec![vec![(0, 5), (2, 3)]])).unwrap();
        assert_eq!(hy(&c[0]), vec![(0, 5)]);
    }

    #[test]
    fn costs_round_up() {
        let c = canonicalize_rv(&tcsd(vec![vec![(7, 3), (0, -2), (3, 1)]])).unwrap();
        assert_eq!(hy(&c[0]), vec![(0, -2), (4, 1), (8, 3)]);
        assert_eq!(
            c[0].pairs.iter().map(|p| p.origin).collect::<Vec<_>>(),
            vec![1, 2, 0]
        );
    }

    #[test]
    fn equal_rounded_costs_keep_the_larger_supply() {
        let c = canonicalize_rv(&tcsd(vec![vec![(0, 0), (5, 1), (7, 4), (8, 2)]])).unwrap();
        assert_eq!(hy(&c[0]), vec![(0, 0), (8, 4)]);
    }

    #[test]
    fn rounding_stays_below_double() {
        for g in 1..2000 {
            let r = round_up_pow2(g);
            assert!(g <= r && r < 2 * g, "{g} -> {r}");
        }
        assert_eq!(round_up_pow2(0), 0);
    }

    #[test]
    fn missing_free_option_is_reported() {
        assert!(canonicalize_rv(&tcsd(vec![vec![(3, 1)]])).is_err());
    }

    #[test]
    fn suppliers_from_three_levels() {
        let cfl = build_cfl(&[canon(&[(0, -2), (4, 1), (8, 3)])], &[vec![0]], 1);
        assert_eq!(cfl.demand, vec![2]);
        assert_eq!(
            cfl.suppliers,
            vec![
                Supplier {
                    loc: 0,
                    level: 1,
                    cost: 4,
                    capacity: 3
                },
                Supplier {
                    loc: 0,
                    level: 2,
                    cost: 8,
                    capacity: 2
                },
            ]
        );
    }

    #[test]
    fn single_positive_pair_is_a_free_supplier() {
        let cfl = build_cfl(&[canon(&[(0, 5)])], &[vec![0]], 1);
        assert_eq!(cfl.demand, vec![0]);
        assert_eq!(
            cfl.suppliers,
            vec![Supplier {
                loc: 0,
                level: 0,
                cost: 0,
                capacity: 5
            }]
        );
    }

    #[test]
    fn zero_capacity_free_supplier_is_omitted() {
        let cfl = build_cfl(&[canon(&[(0, 0), (2, 4)])], &[vec![0]], 1);
        assert_eq!(cfl.demand, vec![0]);
        assert_eq!(
            cfl.suppliers,
            vec![Supplier {
                loc: 0,
                level: 1,
                cost: 2,
                capacity: 4
            }]
        );
    }

    #[test]
    fn capacity_telescopes() {
        let rv = canon(&[(0, -3), (1, 0), (4, 2), (16, 7)]);
        let cfl = build_cfl(std::slice::from_ref(&rv), &[vec![0]], 1);
        let total: i64 = cfl.suppliers.iter().map(|s| s.capacity).sum();
        assert_eq!(total, 7 - (-3));
    }

    #[test]
    fn lift_takes_highest_open_level() {
        let c = [canon(&[(0, -2), (4, 1), (8, 3)]), canon(&[(0, 5)])];
        let cfl = build_cfl(&c, &[vec![0, 1], vec![1, 0]], 1);
        let sol = |open: BTreeSet<usize>| CflSolution {
            open,
            ..CflSolution::default()
        };
        // suppliers: 0 = (loc 0, level 1), 1 = (loc 0, level 2), 2 = (loc 1, level 0)
        assert_eq!(
            lift_cfl_to_tcsd(&c, &cfl, &sol([1].into())).unwrap(),
            vec![2, 0]
        );
        assert_eq!(
            lift_cfl_to_tcsd(&c, &cfl, &sol([2].into())).unwrap(),
            vec![0, 0]
        );
        assert!(lift_cfl_to_tcsd(&c, &cfl, &sol(BTreeSet::new())).is_err());
        assert_eq!(realize_prefix(&cfl, &[2, 0]), [0, 1, 2].into());
        assert_eq!(realize_prefix(&cfl, &[0, 0]), [2].into());
    }
}
