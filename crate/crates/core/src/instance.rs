//! Instance model for lower-bounded facility location.
//!
//! Facilities and clients share one point index space: facility `i` is
//! point `i`, client `j` is point `num_facilities() + j`. All costs and
//! distances are nonnegative integers in units of `1 / scale`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Cost;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Facility {
    pub id: String,
    pub cost: Cost,
    pub lower_bound: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Client {
    pub id: String,
}

/// A point of `F ∪ C`, tagged by kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    Facility(usize),
    Client(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LbflInstance {
    /// Precision factor: a stored value `x` means `x / scale`.
    pub scale: i64,
    pub facilities: Vec<Facility>,
    pub clients: Vec<Client>,
    /// Symmetric matrix over facilities followed by clients.
    pub dist: Vec<Vec<Cost>>,
    /// Integer coordinates the metric was induced from, if any.
    pub points: Option<Vec<Vec<i64>>>,
}

impl LbflInstance {
    /// Builds an instance without validating the metric.
    pub fn from_parts(
        scale: i64,
        facilities: Vec<Facility>,
        clients: Vec<Client>,
        dist: Vec<Vec<Cost>>,
    ) -> Self {
        LbflInstance {
            scale,
            facilities,
            clients,
            dist,
            points: None,
        }
    }

    /// Builds an instance whose metric is induced by integer coordinates
    /// (Euclidean distance rounded up).
    pub fn from_points(
        scale: i64,
        facilities: Vec<Facility>,
        clients: Vec<Client>,
        points: Vec<Vec<i64>>,
    ) -> Result<Self> {
        if points.len() != facilities.len() + clients.len() {
            return Err(Error::malformed(format!(
                "points: expected {} coordinate rows (facilities then clients), found {}",
                facilities.len() + clients.len(),
                points.len()
            )));
        }
        let dist = induced_metric(&points)?;
        Ok(LbflInstance {
            scale,
            facilities,
            clients,
            dist,
            points: Some(points),
        })
    }

    pub fn empty(scale: i64) -> Self {
        Self::from_parts(scale, Vec::new(), Vec::new(), Vec::new())
    }

    #[inline]
    pub fn num_facilities(&self) -> usize {
        self.facilities.len()
    }

    #[inline]
    pub fn num_clients(&self) -> usize {
        self.clients.len()
    }

    #[inline]
    pub fn num_points(&self) -> usize {
        self.facilities.len() + self.clients.len()
    }

    #[inline]
    pub fn index(&self, p: Point) -> usize {
        match p {
            Point::Facility(i) => i,
            Point::Client(j) => self.facilities.len() + j,
        }
    }

    #[inline]
    pub fn d(&self, a: Point, b: Point) -> Cost {
        self.dist[self.index(a)][self.index(b)]
    }

    /// Facility-to-client distance.
    #[inline]
    pub fn fc(&self, i: usize, j: usize) -> Cost {
        self.dist[i][self.facilities.len() + j]
    }

    /// Facility-to-facility distance.
    #[inline]
    pub fn ff(&self, i: usize, k: usize) -> Cost {
        self.dist[i][k]
    }

    /// Client-to-client distance.
    #[inline]
    pub fn cc(&self, j: usize, k: usize) -> Cost {
        let nf = self.facilities.len();
        self.dist[nf + j][nf + k]
    }

    /// `d(j, S)`: distance from client `j` to its nearest facility in `set`.
    pub fn dist_to_set<'a, I>(&self, j: usize, set: I) -> Option<Cost>
    where
        I: IntoIterator<Item = &'a usize>,
    {
        set.into_iter().map(|&i| self.fc(i, j)).min()
    }

    /// Nearest facility of `j` in `set`, ties broken by facility index.
    pub fn nearest_in<'a, I>(&self, j: usize, set: I) -> Option<usize>
    where
        I: IntoIterator<Item = &'a usize>,
    {
        set.into_iter()
            .map(|&i| (self.fc(i, j), i))
            .min()
            .map(|(_, i)| i)
    }

    pub fn facility_cost<'a, I>(&self, set: I) -> Cost
    where
        I: IntoIterator<Item = &'a usize>,
    {
        set.into_iter().map(|&i| self.facilities[i].cost).sum()
    }

    /// Unscaled human-readable value of a stored quantity.
    pub fn unscaled(&self, x: Cost) -> f64 {
        x as f64 / self.scale as f64
    }
}

/// `(S, σ)`: open facilities and a facility index per client.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LbflSolution {
    pub open: BTreeSet<usize>,
    pub assign: Vec<usize>,
}

impl LbflSolution {
    pub fn empty() -> Self {
        LbflSolution {
            open: BTreeSet::new(),
            assign: Vec::new(),
        }
    }

    /// Number of clients assigned to each facility.
    pub fn loads(&self, num_facilities: usize) -> Vec<u64> {
        let mut load = vec![0u64; num_facilities];
        for &i in &self.assign {
            if i < num_facilities {
                load[i] += 1;
            }
        }
        load
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub facility: Cost,
    pub connection: Cost,
    pub penalty: Cost,
    pub total: Cost,
}

impl CostBreakdown {
    pub fn new(facility: Cost, connection: Cost, penalty: Cost) -> Self {
        CostBreakdown {
            facility,
            connection,
            penalty,
            total: facility + connection + penalty,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerBoundViolation {
    pub facility: usize,
    pub required: u64,
    pub served: u64,
}

impl LowerBoundViolation {
    pub fn deficit(&self) -> u64 {
        self.required - self.served
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostReport {
    pub cost: CostBreakdown,
    /// Open facilities serving fewer clients than their lower bound.
    pub violations: Vec<LowerBoundViolation>,
}

impl CostReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exact cost of `sol`. Lower-bound shortfalls are reported, not rejected.
pub fn cost_of(inst: &LbflInstance, sol: &LbflSolution) -> Result<CostReport> {
    let nf = inst.num_facilities();
    if sol.assign.len() != inst.num_clients() {
        return Err(Error::malformed(format!(
            "solution assigns {} clients, instance has {}",
            sol.assign.len(),
            inst.num_clients()
        )));
    }
    if let Some(&bad) = sol.open.iter().find(|&&i| i >= nf) {
        return Err(Error::malformed(format!("unknown facility index {bad}")));
    }
    let mut connection = 0;
    for (j, &i) in sol.assign.iter().enumerate() {
        if i >= nf {
            return Err(Error::malformed(format!(
                "client {} assigned to unknown facility index {i}",
                inst.clients[j].id
            )));
        }
        if !sol.open.contains(&i) {
            return Err(Error::InvalidSolution(format!(
                "client {} assigned to closed facility {}",
                inst.clients[j].id, inst.facilities[i].id
            )));
        }
        connection += inst.fc(i, j);
    }
    let loads = sol.loads(nf);
    let violations = sol
        .open
        .iter()
        .filter(|&&i| loads[i] < inst.facilities[i].lower_bound)
        .map(|&i| LowerBoundViolation {
            facility: i,
            required: inst.facilities[i].lower_bound,
            served: loads[i],
        })
        .collect();
    Ok(CostReport {
        cost: CostBreakdown::new(inst.facility_cost(&sol.open), connection, 0),
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricViolation {
    NonzeroDiagonal {
        point: usize,
        value: Cost,
    },
    Asymmetric {
        a: usize,
        b: usize,
    },
    /// `d(a, c) > d(a, b) + d(b, c)`.
    Triangle {
        a: usize,
        b: usize,
        c: usize,
    },
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricViolation::NonzeroDiagonal { point, value } => {
                write!(f, "d({point},{point}) = {value} != 0")
            }
            MetricViolation::Asymmetric { a, b } => write!(f, "d({a},{b}) != d({b},{a})"),
            MetricViolation::Triangle { a, b, c } => {
                write!(f, "d({a},{c}) > d({a},{b}) + d({b},{c})")
            }
        }
    }
}

/// Lists every way `dist` fails to be a (pseudo)metric. Triangle checks
/// report each triple once, with `a < c`.
pub fn validate_metric(dist: &[Vec<Cost>]) -> Result<Vec<MetricViolation>> {
    let n = dist.len();
    for (a, row) in dist.iter().enumerate() {
        if row.len() != n {
            return Err(Error::malformed(format!(
                "dist: row {a} has {} entries, expected {n}",
                row.len()
            )));
        }
        if let Some(b) = row.iter().position(|&x| x < 0) {
            return Err(Error::malformed(format!(
                "dist: negative entry at ({a},{b})"
            )));
        }
    }
    let mut out = Vec::new();
    for (a, row) in dist.iter().enumerate() {
        if row[a] != 0 {
            out.push(MetricViolation::NonzeroDiagonal {
                point: a,
                value: row[a],
            });
        }
        for b in a + 1..n {
            if row[b] != dist[b][a] {
                out.push(MetricViolation::Asymmetric { a, b });
            }
        }
    }
    for a in 0..n {
        for c in a + 1..n {
            for b in 0..n {
                if b != a && b != c && dist[a][c] > dist[a][b] + dist[b][c] {
                    out.push(MetricViolation::Triangle { a, b, c });
                }
            }
        }
    }
    Ok(out)
}

/// Euclidean distance between integer coordinates, rounded up. Rounding up
/// is subadditive, so the result is a metric.
pub fn induced_metric(points: &[Vec<i64>]) -> Result<Vec<Vec<Cost>>> {
    let dim = points.first().map_or(0, Vec::len);
    if let Some(k) = points.iter().position(|p| p.len() != dim) {
        return Err(Error::malformed(format!(
            "points[{k}]: expected {dim} coordinates, found {}",
            points[k].len()
        )));
    }
    let n = points.len();
    let mut dist = vec![vec![0; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let sq: u128 = points[a]
                .iter()
                .zip(&points[b])
                .map(|(x, y)| {
                    let d = (x - y).unsigned_abs() as u128;
                    d * d
                })
                .sum();
            let d = ceil_sqrt(sq) as Cost;
            dist[a][b] = d;
            dist[b][a] = d;
        }
    }
    Ok(dist)
}

fn ceil_sqrt(x: u128) -> u128 {
    let mut r = (x as f64).sqrt() as u128;
    while r * r > x {
        r -= 1;
    }
    while r * r < x {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::e1;

    #[test]
    fn single_point_is_metric() {
        assert!(validate_metric(&[vec![0]]).unwrap().is_empty());
    }

    #[test]
    fn triangle_violation_is_reported_once() {
        let d = vec![vec![0, 1, 5], vec![1, 0, 1], vec![5, 1, 0]];
        assert_eq!(
            validate_metric(&d).unwrap(),
            vec![MetricViolation::Triangle { a: 0, b: 1, c: 2 }]
        );
    }

    #[test]
    fn line_metric_is_metric() {
        let xs = [0i64, 10, 25];
        let d: Vec<Vec<Cost>> = xs
            .iter()
            .map(|x| xs.iter().map(|y| (x - y).abs()).collect())
            .collect();
        assert!(validate_metric(&d).unwrap().is_empty());
    }

    #[test]
    fn malformed_matrices_are_errors() {
        assert!(validate_metric(&[vec![0, 1]]).is_err());
        assert!(validate_metric(&[vec![0, -1], vec![-1, 0]]).is_err());
    }

    #[test]
    fn asymmetry_and_diagonal_are_reported() {
        let d = vec![vec![1, 2], vec![3, 0]];
        let v = validate_metric(&d).unwrap();
        assert!(v.contains(&MetricViolation::NonzeroDiagonal { point: 0, value: 1 }));
        assert!(v.contains(&MetricViolation::Asymmetric { a: 0, b: 1 }));
    }

    #[test]
    fn cost_with_zero_connections() {
        let facilities = vec![Facility {
            id: "a".into(),
            cost: 7,
            lower_bound: 0,
        }];
        let clients = ["x", "y", "z"].map(|id| Client { id: id.into() }).to_vec();
        let inst = LbflInstance::from_points(1, facilities, clients, vec![vec![0]; 4]).unwrap();
        let sol = LbflSolution {
            open: [0].into(),
            assign: vec![0, 0, 0],
        };
        assert_eq!(cost_of(&inst, &sol).unwrap().cost.total, 7);
    }

    #[test]
    fn cost_of_empty() {
        let inst = LbflInstance::empty(1);
        let r = cost_of(&inst, &LbflSolution::empty()).unwrap();
        assert_eq!(r.cost, CostBreakdown::default());
        assert!(r.is_feasible());
    }

    #[test]
    fn cost_of_e1() {
        let inst = e1();
        let sol = LbflSolution {
            open: [0, 1].into(),
            assign: vec![0, 1, 1],
        };
        let r = cost_of(&inst, &sol).unwrap();
        assert_eq!(r.cost, CostBreakdown::new(2, 10, 0));
        assert_eq!(r.cost.total, 12);
        assert!(r.is_feasible());
    }

    #[test]
    fn cost_flags_lower_bound_shortfall() {
        let inst = e1();
        let sol = LbflSolution {
            open: [0, 1].into(),
            assign: vec![0, 0, 1],
        };
        let r = cost_of(&inst, &sol).unwrap();
        assert_eq!(
            r.violations,
            vec![LowerBoundViolation {
                facility: 1,
                required: 2,
                served: 1
            }]
        );
        assert_eq!(r.cost.total, 2);
    }

    #[test]
    fn cost_rejects_unknown_ids() {
        let inst = e1();
        let sol = LbflSolution {
            open: [0, 5].into(),
            assign: vec![0, 0, 0],
        };
        assert!(matches!(cost_of(&inst, &sol), Err(Error::Malformed(_))));
        let sol = LbflSolution {
            open: [0].into(),
            assign: vec![0, 0],
        };
        assert!(matches!(cost_of(&inst, &sol), Err(Error::Malformed(_))));
    }

    #[test]
    fn ceil_sqrt_rounds_up() {
        assert_eq!(ceil_sqrt(0), 0);
        assert_eq!(ceil_sqrt(16), 4);
        assert_eq!(ceil_sqrt(17), 5);
        assert_eq!(ceil_sqrt(2), 2);
    }
}
