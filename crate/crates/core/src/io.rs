//! JSON instance and solution files.
//!
//! Instance: `{"scale", "facilities": [{id, cost, lower_bound}], "clients": [{id}],
//! "points" | "dist"}`. `points` and `dist` are indexed over facilities
//! followed by clients. Solution: `{"open": [ids], "assign": {client: facility}}`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{validate_metric, Client, Facility, LbflInstance, LbflSolution};
use crate::Cost;

#[derive(Debug, Serialize, Deserialize)]
struct FacilityRecord {
    id: String,
    cost: i64,
    lower_bound: i64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ClientRecord {
    id: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    scale: i64,
    facilities: Vec<FacilityRecord>,
    clients: Vec<ClientRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dist: Option<Vec<Vec<Cost>>>,
}

/// Solution file as written on disk, keyed by ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub open: Vec<String>,
    pub assign: BTreeMap<String, String>,
}

pub fn instance_to_json(inst: &LbflInstance) -> String {
    serde_json::to_string_pretty(&instance_file(inst)).expect("instance serializes")
}

/// The instance in file form, as a JSON value.
pub fn instance_to_value(inst: &LbflInstance) -> serde_json::Value {
    serde_json::to_value(instance_file(inst)).expect("instance serializes")
}

fn instance_file(inst: &LbflInstance) -> InstanceFile {
    InstanceFile {
        scale: inst.scale,
        facilities: inst
            .facilities
            .iter()
            .map(|f| FacilityRecord {
                id: f.id.clone(),
                cost: f.cost,
                lower_bound: f.lower_bound as i64,
            })
            .collect(),
        clients: inst
            .clients
            .iter()
            .map(|c| ClientRecord { id: c.id.clone() })
            .collect(),
        dist: inst.points.is_none().then(|| inst.dist.clone()),
        points: inst.points.clone(),
    }
}

/// Parses and validates an instance, including the metric.
pub fn instance_from_json(text: &str) -> Result<LbflInstance> {
    let file: InstanceFile = serde_json::from_str(text)?;
    if file.scale < 1 {
        return Err(Error::malformed(format!(
            "scale: must be >= 1, found {}",
            file.scale
        )));
    }
    let mut facilities = Vec::with_capacity(file.facilities.len());
    for (k, f) in file.facilities.into_iter().enumerate() {
        if f.cost < 0 {
            return Err(Error::malformed(format!(
                "facilities[{k}].cost: negative opening cost {} for facility {}",
                f.cost, f.id
            )));
        }
        if f.lower_bound < 0 {
            return Err(Error::malformed(format!(
                "facilities[{k}].lower_bound: negative lower bound {} for facility {}",
                f.lower_bound, f.id
            )));
        }
        facilities.push(Facility {
            id: f.id,
            cost: f.cost,
            lower_bound: f.lower_bound as u64,
        });
    }
    let clients: Vec<Client> = file
        .clients
        .into_iter()
        .map(|c| Client { id: c.id })
        .collect();
    check_unique("facilities", facilities.iter().map(|f| f.id.as_str()))?;
    check_unique("clients", clients.iter().map(|c| c.id.as_str()))?;

    let n = facilities.len() + clients.len();
    let inst = match (file.points, file.dist) {
        (Some(points), None) => LbflInstance::from_points(file.scale, facilities, clients, points)?,
        (None, Some(dist)) => {
            if dist.len() != n {
                return Err(Error::malformed(format!(
                    "dist: expected {n} rows (facilities then clients), found {}",
                    dist.len()
                )));
            }
            LbflInstance::from_parts(file.scale, facilities, clients, dist)
        }
        (None, None) => {
            if n > 0 {
                return Err(Error::malformed("one of `points` or `dist` is required"));
            }
            LbflInstance::from_parts(file.scale, facilities, clients, Vec::new())
        }
        (Some(_), Some(_)) => {
            return Err(Error::malformed(
                "`points` and `dist` are mutually exclusive",
            ))
        }
    };
    let violations = validate_metric(&inst.dist)?;
    if let Some(first) = violations.first() {
        return Err(Error::Metric {
            first: first.clone(),
            count: violations.len(),
        });
    }
    Ok(inst)
}

fn check_unique<'a>(what: &str, ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::malformed(format!("{what}: duplicate id {id:?}")));
        }
    }
    Ok(())
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<LbflInstance> {
    instance_from_json(&read(path.as_ref())?)
}

pub fn save_instance(inst: &LbflInstance, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &instance_to_json(inst))
}

impl SolutionFile {
    pub fn from_solution(inst: &LbflInstance, sol: &LbflSolution) -> Self {
        SolutionFile {
            open: sol
                .open
                .iter()
                .map(|&i| inst.facilities[i].id.clone())
                .collect(),
            assign: sol
                .assign
                .iter()
                .enumerate()
                .map(|(j, &i)| (inst.clients[j].id.clone(), inst.facilities[i].id.clone()))
                .collect(),
        }
    }

    /// Resolves ids against `inst`. Unassigned clients are `None`; unknown
    /// ids are malformed input.
    pub fn resolve(&self, inst: &LbflInstance) -> Result<(BTreeSet<usize>, Vec<Option<usize>>)> {
        let fidx: HashMap<&str, usize> = inst
            .facilities
            .iter()
            .enumerate()
            .map(|(k, f)| (f.id.as_str(), k))
            .collect();
        let cidx: HashMap<&str, usize> = inst
            .clients
            .iter()
            .enumerate()
            .map(|(k, c)| (c.id.as_str(), k))
            .collect();
        let lookup = |id: &str| {
            fidx.get(id)
                .copied()
                .ok_or_else(|| Error::malformed(format!("unknown facility id {id:?}")))
        };
        let open = self
            .open
            .iter()
            .map(|id| lookup(id))
            .collect::<Result<_>>()?;
        let mut assign = vec![None; inst.num_clients()];
        for (c, f) in &self.assign {
            let j = *cidx
                .get(c.as_str())
                .ok_or_else(|| Error::malformed(format!("unknown client id {c:?}")))?;
            assign[j] = Some(lookup(f)?);
        }
        Ok((open, assign))
    }
}

pub fn solution_to_json(inst: &LbflInstance, sol: &LbflSolution) -> String {
    serde_json::to_string_pretty(&SolutionFile::from_solution(inst, sol)).expect("serializes")
}

pub fn load_solution(path: impl AsRef<Path>) -> Result<SolutionFile> {
    Ok(serde_json::from_str(&read(path.as_ref())?)?)
}

pub(crate) fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
