//! Re-evaluating an `I²` solution under `d¹` and the original metric.

use serde::{Deserialize, Serialize};

use crate::certificate::Check;
use crate::error::{Error, Result};
use crate::instance::{cost_of, CostBreakdown, LbflInstance, LbflSolution};
use crate::reductions::aggregate::{StageI1, StageI2};
use crate::scaled::Scaled;
use crate::{Cost, Rational};

/// One solution costed in `I²`, `I¹` and `I`, each at its own scale.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recost {
    pub i2: CostBreakdown,
    pub i1: CostBreakdown,
    pub i: CostBreakdown,
    pub checks: Vec<Check>,
}

fn feasible_cost(inst: &LbflInstance, sol: &LbflSolution, stage: &str) -> Result<CostBreakdown> {
    let report = cost_of(inst, sol)?;
    match report.violations.first() {
        Some(v) => Err(Error::InvalidSolution(format!(
            "{stage}: facility {} serves {} < lower bound {}",
            inst.facilities[v.facility].id, v.served, v.required
        ))),
        None => Ok(report.cost),
    }
}

/// Costs `sol` at every level and certifies
/// `cost_{I¹} ≤ (3/2)·cost_{I²}` and
/// `cost_I ≤ cost_{I¹} + f(S°) + ccost_I(σ°)`.
pub fn recost_down(
    inst: &LbflInstance,
    i1: &StageI1,
    i2: &StageI2,
    sol: &LbflSolution,
) -> Result<Recost> {
    let c2 = feasible_cost(&i2.instance, sol, "I2")?;
    let c1 = feasible_cost(&i1.instance, sol, "I1")?;
    let c0 = feasible_cost(inst, sol, "I")?;
    let scale = inst.scale;
    let budget: Cost = inst.facility_cost(&i1.s_circ)
        + i1.sigma_circ
            .iter()
            .enumerate()
            .map(|(j, &i)| inst.fc(i, j))
            .sum::<Cost>();
    let checks = vec![
        Check::leq(
            "cost_I1 <= 3/2 * cost_I2",
            "I2-to-I1",
            Scaled::new(c1.total, i1.instance.scale),
            Rational::new(3, 2),
            Scaled::new(c2.total, i2.instance.scale),
        )
        .require()?,
        Check::leq(
            "cost_I <= cost_I1 + f(S°) + ccost_I(σ°)",
            "I-and-I1",
            Scaled::new(c0.total, scale),
            Rational::from_integer(1),
            Scaled::new(c1.total + budget, scale),
        )
        .require()?,
    ];
    Ok(Recost {
        i2: c2,
        i1: c1,
        i: c0,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::line;
    use crate::reductions::{aggregate_clients, aggregate_facilities};
    use crate::ufl::beta_covered;

    #[test]
    fn open_locations_cost_the_same_under_both_metrics() {
        // two clusters far apart, each with a free facility
        let inst = line(
            &[(0, 0, 2), (100, 0, 2), (3, 7, 0)],
            &[0, 1, 2, 100, 101, 99],
        );
        let beta = Rational::new(2, 3);
        let bc = beta_covered(&inst, beta).unwrap();
        assert_eq!(bc.s_circ, vec![0, 1]);
        let i1 = aggregate_clients(&inst, &bc);
        let i2 = aggregate_facilities(&i1, beta).unwrap();
        let sol = LbflSolution {
            open: [0, 1].into(),
            assign: bc.sigma_circ.clone(),
        };
        let r = recost_down(&inst, &i1, &i2, &sol).unwrap();
        assert_eq!(r.i2.connection, r.i1.connection * i2.unit);
        assert!(r.checks.iter().all(|c| c.passed));
    }

    #[test]
    fn moved_facility_is_covered_by_its_surcharge() {
        let inst = line(
            &[(0, 0, 2), (100, 0, 2), (3, 7, 0)],
            &[0, 1, 2, 100, 101, 99],
        );
        let beta = Rational::new(2, 3);
        let bc = beta_covered(&inst, beta).unwrap();
        let i1 = aggregate_clients(&inst, &bc);
        let i2 = aggregate_facilities(&i1, beta).unwrap();
        assert_eq!(i2.phi[2], Some(0));
        // facility 2 serves the clients at location 0
        let sol = LbflSolution {
            open: [1, 2].into(),
            assign: vec![2, 2, 2, 1, 1, 1],
        };
        let r = recost_down(&inst, &i1, &i2, &sol).unwrap();
        assert_eq!(r.i2.connection, 0);
        assert_eq!(r.i1.connection, 3 * 3);
        assert!(r.checks.iter().all(|c| c.passed));
    }

    #[test]
    fn infeasible_solution_is_rejected() {
        let inst = line(&[(0, 0, 2), (100, 0, 2)], &[0, 1, 2, 100, 101, 99]);
        let beta = Rational::new(2, 3);
        let bc = beta_covered(&inst, beta).unwrap();
        let i1 = aggregate_clients(&inst, &bc);
        let i2 = aggregate_facilities(&i1, beta).unwrap();
        let sol = LbflSolution {
            open: [0, 1].into(),
            assign: vec![0, 0, 0, 0, 0, 1],
        };
        assert!(matches!(
            recost_down(&inst, &i1, &i2, &sol),
            Err(Error::InvalidSolution(_))
        ));
    }
}
