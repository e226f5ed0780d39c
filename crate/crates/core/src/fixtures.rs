//! Small hand-made instances shared by tests, examples and docs.

use crate::instance::{Client, Facility, LbflInstance};

/// Line instance: facility `a` at 0 (f=1, B=1), facility `b` at 10
/// (f=1, B=2); clients `c1`, `c2` at 0 and `c3` at 10.
pub fn e1() -> LbflInstance {
    let facilities = vec![
        Facility {
            id: "a".into(),
            cost: 1,
            lower_bound: 1,
        },
        Facility {
            id: "b".into(),
            cost: 1,
            lower_bound: 2,
        },
    ];
    let clients = ["c1", "c2", "c3"]
        .map(|id| Client { id: id.into() })
        .to_vec();
    let points = [0, 10, 0, 0, 10].iter().map(|&x| vec![x]).collect();
    LbflInstance::from_points(1, facilities, clients, points).expect("valid fixture")
}

/// Instance on a line from `(position, cost, lower_bound)` facilities and
/// client positions.
pub fn line(facilities: &[(i64, i64, u64)], clients: &[i64]) -> LbflInstance {
    let fs = facilities
        .iter()
        .enumerate()
        .map(|(k, &(_, cost, lower_bound))| Facility {
            id: format!("f{k}"),
            cost,
            lower_bound,
        })
        .collect();
    let cs = (0..clients.len())
        .map(|k| Client {
            id: format!("c{k}"),
        })
        .collect();
    let points = facilities
        .iter()
        .map(|f| vec![f.0])
        .chain(clients.iter().map(|&x| vec![x]))
        .collect();
    LbflInstance::from_points(1, fs, cs, points).expect("valid fixture")
}
