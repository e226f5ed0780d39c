//! Batch runs over seeded instances, compared against the exact optimum
//! where it is affordable.

use std::fmt::Write as _;
use std::ops::Range;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generate::{generate_instance, Profile};
use crate::oracle::{brute_lbfl, LBFL_FACILITY_GUARD};
use crate::pipeline::{pipeline_solve, PipelineConfig};
use crate::scaled::{ratio_to_f64, Scaled};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchOptions {
    /// Solve each instance exactly when it is small enough.
    pub oracle: bool,
    /// Record wall-clock timings. Off by default so reports are reproducible.
    pub timings: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            oracle: true,
            timings: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Solved,
    Infeasible,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub seed: u64,
    pub facilities: usize,
    pub clients: usize,
    pub status: RowStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub locations: Option<usize>,
    pub degenerate: Option<bool>,
    pub cost: Option<Scaled>,
    pub optimum: Option<Scaled>,
    /// Exact `cost / optimum`; absent when the optimum is zero or unknown.
    pub ratio: Option<Rational>,
    pub ratio_f64: Option<f64>,
    pub checks_passed: Option<bool>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pipeline_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub instances: usize,
    pub solved: usize,
    pub infeasible: usize,
    pub failed: usize,
    pub with_ratio: usize,
    pub max_ratio: Option<f64>,
    pub mean_ratio: Option<f64>,
    /// Solved with cost 0 and optimum 0.
    pub zero_optimum: usize,
    pub all_checks_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub profile: Profile,
    pub config: PipelineConfig,
    pub seeds: [u64; 2],
    pub rows: Vec<BenchRow>,
    pub summary: BenchSummary,
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn run_row(
    seed: u64,
    profile: &Profile,
    config: &PipelineConfig,
    options: BenchOptions,
) -> Result<BenchRow> {
    let inst = generate_instance(seed, profile)?;
    let mut row = BenchRow {
        seed,
        facilities: inst.num_facilities(),
        clients: inst.num_clients(),
        status: RowStatus::Solved,
        error: None,
        locations: None,
        degenerate: None,
        cost: None,
        optimum: None,
        ratio: None,
        ratio_f64: None,
        checks_passed: None,
        warnings: Vec::new(),
        pipeline_ms: None,
        oracle_ms: None,
    };
    let start = Instant::now();
    let out = pipeline_solve(&inst, config);
    if options.timings {
        row.pipeline_ms = Some(ms(start));
    }
    match out {
        Ok(out) => {
            row.locations = Some(out.report.locations);
            row.degenerate = Some(out.report.degenerate);
            row.cost = Some(out.report.costs.output);
            row.checks_passed = Some(out.report.all_passed());
            row.warnings = out.report.warnings;
        }
        Err(Error::Infeasible(m)) => {
            row.status = RowStatus::Infeasible;
            row.error = Some(m);
        }
        Err(e) => {
            row.status = RowStatus::Failed;
            row.error = Some(e.to_string());
        }
    }
    if options.oracle && inst.num_facilities() <= LBFL_FACILITY_GUARD {
        let start = Instant::now();
        let opt = brute_lbfl(&inst);
        if options.timings {
            row.oracle_ms = Some(ms(start));
        }
        match opt {
            Ok((_, c)) => row.optimum = Some(Scaled::new(c, inst.scale)),
            Err(Error::Infeasible(_)) if row.status == RowStatus::Solved => {
                row.status = RowStatus::Failed;
                row.error = Some("pipeline solved an instance the oracle finds infeasible".into());
            }
            Err(Error::Infeasible(_)) => {}
            Err(e) => return Err(e),
        }
    }
    if let (Some(c), Some(o)) = (row.cost, row.optimum) {
        row.ratio = c.ratio_to(o);
        row.ratio_f64 = row.ratio.map(ratio_to_f64);
    }
    Ok(row)
}

pub fn summarize(rows: &[BenchRow]) -> BenchSummary {
    let count = |s: RowStatus| rows.iter().filter(|r| r.status == s).count();
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio_f64).collect();
    BenchSummary {
        instances: rows.len(),
        solved: count(RowStatus::Solved),
        infeasible: count(RowStatus::Infeasible),
        failed: count(RowStatus::Failed),
        with_ratio: ratios.len(),
        max_ratio: ratios.iter().copied().reduce(f64::max),
        mean_ratio: (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
        zero_optimum: rows
            .iter()
            .filter(|r| {
                r.optimum.is_some_and(|o| o.value == 0) && r.cost.is_some_and(|c| c.value == 0)
            })
            .count(),
        all_checks_passed: rows.iter().all(|r| r.checks_passed != Some(false)),
    }
}

/// Runs the pipeline on every seed in `seeds`.
pub fn bench(
    seeds: Range<u64>,
    profile: &Profile,
    config: &PipelineConfig,
    options: BenchOptions,
) -> Result<BenchReport> {
    let rows = seeds
        .clone()
        .map(|s| run_row(s, profile, config, options))
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchReport {
        profile: profile.clone(),
        config: *config,
        seeds: [seeds.start, seeds.end],
        summary: summarize(&rows),
        rows,
    })
}

fn opt_cell<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(|| "-".into(), |v| v.to_string())
}

/// Aligned plain-text table of the rows and summary.
pub fn render_table(report: &BenchReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>6} {:>4} {:>4} {:>4} {:>11} {:>12} {:>12} {:>8} {:>6}",
        "seed", "|F|", "|C|", "|S°|", "status", "cost", "optimum", "ratio", "certs"
    );
    for r in &report.rows {
        let status = match r.status {
            RowStatus::Solved => "solved",
            RowStatus::Infeasible => "infeasible",
            RowStatus::Failed => "FAILED",
        };
        let _ = writeln!(
            out,
            "{:>6} {:>4} {:>4} {:>4} {:>11} {:>12} {:>12} {:>8} {:>6}",
            r.seed,
            r.facilities,
            r.clients,
            opt_cell(r.locations),
            status,
            opt_cell(r.cost.map(|c| format!("{:.3}", c.unscaled()))),
            opt_cell(r.optimum.map(|c| format!("{:.3}", c.unscaled()))),
            opt_cell(r.ratio_f64.map(|x| format!("{x:.4}"))),
            match r.checks_passed {
                Some(true) => "ok",
                Some(false) => "FAIL",
                None => "-",
            },
        );
    }
    let s = &report.summary;
    let _ = writeln!(
        out,
        "instances {}  solved {}  infeasible {}  failed {}  max ratio {}  mean ratio {}  certificates {}",
        s.instances,
        s.solved,
        s.infeasible,
        s.failed,
        opt_cell(s.max_ratio.map(|x| format!("{x:.4}"))),
        opt_cell(s.mean_ratio.map(|x| format!("{x:.4}"))),
        if s.all_checks_passed { "ok" } else { "FAIL" }
    );
    out
}
