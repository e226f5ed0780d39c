//! End-to-end driver: bi-criteria stage, the reduction chain down to
//! capacitated facility location, local search, and the lifts back, with
//! every lift certified.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::certificate::{Check, FactorLedger};
use crate::cfl::{eval_open_set, local_search, CflSolution, LocalSearchConfig};
use crate::error::{Error, Result};
use crate::flow::{assign_with_lower_bounds, TransportPlan};
use crate::instance::{cost_of, CostBreakdown, LbflInstance, LbflSolution};
use crate::io::{instance_to_value, SolutionFile};
use crate::reductions::{
    aggregate_clients, aggregate_facilities, build_cfl, build_penalty_instance, build_tcsd,
    canonical_tcsd, canonicalize_rv, cost_lbflp, lift_cfl_to_tcsd, lift_lbflp_to_i2,
    lift_tcsd_to_lbflp, raw_choice, realize_prefix, recost_down, tcsd_cost, CanonicalRv,
    CflInstance, PartialSolution, StageI1, StageI2, StageI3, TcsdInstance,
};
use crate::scaled::Scaled;
use crate::ufl::{beta_covered, check_beta, BetaCoveredSolution};
use crate::{Cost, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub beta: Rational,
    pub cfl: LocalSearchConfig,
    /// Approximation ratio claimed for the capacitated solver.
    pub alpha_cfl: Rational,
    /// Keep every derived instance in the output.
    pub emit_stages: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            beta: crate::default_beta(),
            cfl: LocalSearchConfig::default(),
            alpha_cfl: Rational::from_integer(9),
            emit_stages: false,
        }
    }
}

/// Cost of each stage's solution, each at its own scale.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCosts {
    /// `(S°, σ°)` in the input instance.
    pub bicriteria: Option<Scaled>,
    pub i5: Option<Scaled>,
    /// The lifted choice on the rounded option lists.
    pub i4_canonical: Option<Scaled>,
    pub i4: Option<Scaled>,
    pub i3: Option<Scaled>,
    pub i2: Option<Scaled>,
    pub i1: Option<Scaled>,
    /// The lifted solution in the input instance.
    pub lifted: Option<Scaled>,
    /// After re-optimizing the assignment for the same open set.
    pub output: Scaled,
}

impl StageCosts {
    fn new(scale: i64) -> Self {
        StageCosts {
            bicriteria: None,
            i5: None,
            i4_canonical: None,
            i4: None,
            i3: None,
            i2: None,
            i1: None,
            lifted: None,
            output: Scaled::new(0, scale),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub beta: Rational,
    pub ledger: FactorLedger,
    pub locations: usize,
    /// Fewer than two locations: the reduction chain was bypassed.
    pub degenerate: bool,
    pub costs: StageCosts,
    pub checks: Vec<Check>,
    pub cfl_moves: usize,
    pub warnings: Vec<String>,
}

impl CertificateReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, step: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.step == step)
    }
}

/// Every derived instance and intermediate solution, for inspection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageBundle {
    pub beta_covered: BetaCoveredSolution,
    pub i1: serde_json::Value,
    pub i2: Option<serde_json::Value>,
    pub i3: Option<StageI3>,
    pub i4: Option<TcsdInstance>,
    pub canonical: Option<Vec<CanonicalRv>>,
    pub i5: Option<CflInstance>,
    pub cfl_solution: Option<CflSolution>,
    pub levels: Option<Vec<usize>>,
    pub choice: Option<Vec<usize>>,
    pub plan: Option<TransportPlan>,
    pub partial: Option<PartialSolution>,
    pub lifted: Option<LbflSolution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutput {
    pub solution: LbflSolution,
    pub cost: CostBreakdown,
    pub report: CertificateReport,
    pub stages: Option<StageBundle>,
}

fn stage1_dump(i1: &StageI1, bc: &BetaCoveredSolution) -> StageBundle {
    StageBundle {
        beta_covered: bc.clone(),
        i1: instance_to_value(&i1.instance),
        i2: None,
        i3: None,
        i4: None,
        canonical: None,
        i5: None,
        cfl_solution: None,
        levels: None,
        choice: None,
        plan: None,
        partial: None,
        lifted: None,
    }
}

fn i2_dump(i2: &StageI2) -> serde_json::Value {
    serde_json::json!({
        "instance": instance_to_value(&i2.instance),
        "unit": i2.unit,
        "s_circ": i2.s_circ,
        "n": i2.n,
        "ell": i2.ell,
        "members": i2.members,
        "phi": i2.phi,
    })
}

/// Feasible cost, or an internal error naming the stage.
fn feasible(inst: &LbflInstance, sol: &LbflSolution, stage: &str) -> Result<CostBreakdown> {
    let r = cost_of(inst, sol)?;
    match r.violations.first() {
        None => Ok(r.cost),
        Some(v) => Err(Error::Internal(format!(
            "{stage}: facility {} serves {} < lower bound {}",
            inst.facilities[v.facility].id, v.served, v.required
        ))),
    }
}

/// Same open set, optimal lower-bounded assignment.
fn reassign(inst: &LbflInstance, sol: &LbflSolution) -> Result<LbflSolution> {
    if inst.num_clients() == 0 {
        return Ok(LbflSolution::empty());
    }
    let (assign, _) = assign_with_lower_bounds(inst, &sol.open)?;
    Ok(LbflSolution {
        open: sol.open.clone(),
        assign,
    })
}

/// Solves `inst` through the full reduction chain. Every certified
/// inequality is checked; a failure aborts with an error naming it.
pub fn pipeline_solve(inst: &LbflInstance, config: &PipelineConfig) -> Result<PipelineOutput> {
    let beta = config.beta;
    check_beta(beta)?;
    let scale = inst.scale;
    let mut checks = Vec::new();
    let mut costs = StageCosts::new(scale);
    let mut warnings = Vec::new();

    let bc = beta_covered(inst, beta)?;
    let bc_sol = LbflSolution {
        open: bc.s_circ.iter().copied().collect(),
        assign: bc.sigma_circ.clone(),
    };
    costs.bicriteria = Some(Scaled::new(cost_of(inst, &bc_sol)?.cost.total, scale));
    let i1 = aggregate_clients(inst, &bc);
    let mut bundle = config.emit_stages.then(|| stage1_dump(&i1, &bc));

    let i2 = match aggregate_facilities(&i1, beta) {
        Ok(i2) => i2,
        Err(Error::Degenerate(k)) => {
            let solution = degenerate_solution(inst, &i1)?;
            let cost = feasible(inst, &solution, "degenerate fallback")?;
            costs.output = Scaled::new(cost.total, scale);
            if let Some(b) = bundle.as_mut() {
                b.lifted = Some(solution.clone());
            }
            return Ok(PipelineOutput {
                solution,
                cost,
                report: CertificateReport {
                    beta,
                    ledger: FactorLedger::new(beta, config.alpha_cfl),
                    locations: k,
                    degenerate: true,
                    costs,
                    checks,
                    cfl_moves: 0,
                    warnings,
                },
                stages: bundle,
            });
        }
        Err(e) => return Err(e),
    };
    let claim = i2.metric_bound_violations(&i1);
    if let Some(&(i, j)) = claim.first() {
        return Err(Error::certificate(
            "d1-to-d2",
            format!(
                "d2 > 2 d1 for facility {i} and client {j} ({} pairs)",
                claim.len()
            ),
        ));
    }
    if !i2.members_disjoint() {
        return Err(Error::certificate(
            "open-ball disjointness",
            "two balls N_v share a facility",
        ));
    }

    let i3 = build_penalty_instance(&i2, beta)?;
    let t = build_tcsd(&i3);
    let canon = canonicalize_rv(&t)?;
    let ct = canonical_tcsd(&t, &canon);
    let cfl = build_cfl(&canon, &t.dist, t.scale);
    let sscale = t.scale;

    let ls = local_search(&cfl, config.cfl)?;
    if ls.hit_iteration_cap {
        warnings.push(format!(
            "capacitated local search stopped at the iteration cap ({}) before reaching a local optimum",
            config.cfl.max_iters
        ));
    }
    let cfl_sol = ls.solution;
    costs.i5 = Some(Scaled::new(cfl_sol.cost, sscale));

    let levels = lift_cfl_to_tcsd(&canon, &cfl, &cfl_sol)?;
    let (c_can, _) = tcsd_cost(&ct, &levels)?;
    costs.i4_canonical = Some(Scaled::new(c_can.total, sscale));
    checks.push(
        Check::leq(
            "cost_I4(lifted) <= cost_I5",
            "I5-to-I4",
            Scaled::new(c_can.total, sscale),
            Rational::from_integer(1),
            Scaled::new(cfl_sol.cost, sscale),
        )
        .require()?,
    );
    let realized = eval_open_set(&cfl, &realize_prefix(&cfl, &levels))?;
    checks.push(
        Check::leq(
            "cost_I5(prefix) <= 2 * cost_I4",
            "I4-to-I5",
            Scaled::new(realized.cost, sscale),
            Rational::from_integer(2),
            Scaled::new(c_can.total, sscale),
        )
        .require()?,
    );

    let choice = raw_choice(&canon, &levels);
    let (c4, plan) = tcsd_cost(&t, &choice)?;
    costs.i4 = Some(Scaled::new(c4.total, sscale));
    checks.push(
        Check::leq(
            "cost_I4(raw) <= cost_I4(rounded)",
            "power-of-two rounding",
            Scaled::new(c4.total, sscale),
            Rational::from_integer(1),
            Scaled::new(c_can.total, sscale),
        )
        .require()?,
    );

    let ps = lift_tcsd_to_lbflp(&t, &i3, &choice, &plan)?;
    let c3 = cost_lbflp(&i3, &ps)?;
    costs.i3 = Some(Scaled::new(c3.total, sscale));
    if c3 != c4 {
        return Err(Error::certificate(
            "I4-to-I3",
            format!("reconstructed cost {c3:?} differs from TCSD cost {c4:?}"),
        ));
    }
    checks.push(Check::eq(
        "cost_I3 = cost_I4",
        "I4-to-I3",
        Scaled::new(c3.total, sscale),
        Scaled::new(c4.total, sscale),
    ));

    let (lifted, reconnect) = lift_lbflp_to_i2(&i3, &i2, &ps, beta)?;
    checks.push(reconnect);
    let recost = recost_down(inst, &i1, &i2, &lifted)?;
    costs.i2 = Some(Scaled::new(recost.i2.total, i2.instance.scale));
    costs.i1 = Some(Scaled::new(recost.i1.total, i1.instance.scale));
    costs.lifted = Some(Scaled::new(recost.i.total, scale));
    checks.extend(recost.checks);

    let solution = reassign(inst, &lifted)?;
    let cost = feasible(inst, &solution, "output")?;
    costs.output = Scaled::new(cost.total, scale);
    checks.push(
        Check::leq(
            "cost_I(output) <= cost_I(lifted)",
            "reassignment",
            costs.output,
            Rational::from_integer(1),
            Scaled::new(recost.i.total, scale),
        )
        .require()?,
    );

    if let Some(b) = bundle.as_mut() {
        b.i2 = Some(i2_dump(&i2));
        b.i3 = Some(i3);
        b.i4 = Some(t);
        b.canonical = Some(canon);
        b.i5 = Some(cfl);
        b.cfl_solution = Some(cfl_sol);
        b.levels = Some(levels);
        b.choice = Some(choice);
        b.plan = Some(plan);
        b.partial = Some(ps);
        b.lifted = Some(lifted);
    }
    Ok(PipelineOutput {
        solution,
        cost,
        report: CertificateReport {
            beta,
            ledger: FactorLedger::new(beta, config.alpha_cfl),
            locations: bc.s_circ.len(),
            degenerate: false,
            costs,
            checks,
            cfl_moves: ls.moves,
            warnings,
        },
        stages: bundle,
    })
}

/// At most one location, so every client sits on it in `I¹`. Opens the
/// free facility there if its lower bound fits, otherwise the single
/// facility minimizing `f¹_i + |C|·d¹(v,i)` among those that fit.
pub fn degenerate_solution(inst: &LbflInstance, i1: &StageI1) -> Result<LbflSolution> {
    let nc = inst.num_clients();
    let Some(&v) = i1.s_circ.first() else {
        return Ok(LbflSolution::empty());
    };
    let fits = |i: usize| inst.facilities[i].lower_bound as usize <= nc;
    let pick = if fits(v) {
        v
    } else {
        let base = &i1.instance;
        (0..inst.num_facilities())
            .filter(|&i| fits(i))
            .min_by_key(|&i| (base.facilities[i].cost + nc as Cost * base.ff(v, i), i))
            .ok_or_else(|| {
                Error::infeasible("every facility's lower bound exceeds the client count")
            })?
    };
    Ok(LbflSolution {
        open: BTreeSet::from([pick]),
        assign: vec![pick; nc],
    })
}

/// Verdict on an externally produced solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub feasible: bool,
    /// Cost of the assigned part; `None` when a client is unassigned.
    pub cost: Option<CostBreakdown>,
    pub problems: Vec<String>,
}

pub fn check_solution(inst: &LbflInstance, file: &SolutionFile) -> Result<Verdict> {
    let (open, assign) = file.resolve(inst)?;
    let mut problems = Vec::new();
    for (j, a) in assign.iter().enumerate() {
        match a {
            None => problems.push(format!("client {} is not assigned", inst.clients[j].id)),
            Some(i) if !open.contains(i) => problems.push(format!(
                "client {} is assigned to closed facility {}",
                inst.clients[j].id, inst.facilities[*i].id
            )),
            Some(_) => {}
        }
    }
    if !problems.is_empty() {
        return Ok(Verdict {
            feasible: false,
            cost: None,
            problems,
        });
    }
    let sol = LbflSolution {
        open,
        assign: assign.into_iter().flatten().collect(),
    };
    let report = cost_of(inst, &sol)?;
    for v in &report.violations {
        problems.push(format!(
            "facility {} serves {} clients, below its lower bound {} (deficit {})",
            inst.facilities[v.facility].id,
            v.served,
            v.required,
            v.deficit()
        ));
    }
    if inst.num_clients() > 0 && sol.open.is_empty() {
        problems.push("no facility is open".into());
    }
    Ok(Verdict {
        feasible: problems.is_empty(),
        cost: Some(report.cost),
        problems,
    })
}
