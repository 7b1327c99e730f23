use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, NamedLearner, Scenario, Tolerances};
use crate::error::{Error, Result};
use crate::learners::run_learner;
use crate::metrics::{fill_minimizers, lemma_check, theorem_bound, trace_metrics, TheoremId};
use crate::streams::{make_stream, ScheduleKind};

/// One `(scenario, learner, T)` result. Field names are the CSV/JSON columns.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub learner: String,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub seed: u64,
    pub regret: Option<f64>,
    #[serde(rename = "V_T")]
    pub v_t: Option<f64>,
    #[serde(rename = "D_T")]
    pub d_t: Option<f64>,
    #[serde(rename = "P_T_star")]
    pub p_t_star: Option<f64>,
    #[serde(rename = "S_T_star")]
    pub s_t_star: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    #[serde(rename = "G")]
    pub g: Option<f64>,
    pub bound_thm1: Option<f64>,
    pub bound_thm2: Option<f64>,
    pub bound_thm3: Option<f64>,
    pub bound_thm4: Option<f64>,
    pub bound_thm5: Option<f64>,
    pub bound_thm8: Option<f64>,
    pub lemma_failures: Option<usize>,
    pub wall_ms: Option<f64>,
    /// Runtime error that aborted this row.
    #[serde(skip)]
    pub failure: Option<String>,
    /// One message per violated certificate or lemma.
    #[serde(skip)]
    pub violations: Vec<String>,
}

impl ResultRow {
    pub fn bound(&self, theorem: TheoremId) -> Option<f64> {
        match theorem {
            TheoremId::Thm1 => self.bound_thm1,
            TheoremId::Thm2 => self.bound_thm2,
            TheoremId::Thm3 => self.bound_thm3,
            TheoremId::Thm4 => self.bound_thm4,
            TheoremId::Thm5 => self.bound_thm5,
            TheoremId::Thm8 => self.bound_thm8,
        }
    }

    fn bound_mut(&mut self, theorem: TheoremId) -> &mut Option<f64> {
        match theorem {
            TheoremId::Thm1 => &mut self.bound_thm1,
            TheoremId::Thm2 => &mut self.bound_thm2,
            TheoremId::Thm3 => &mut self.bound_thm3,
            TheoremId::Thm4 => &mut self.bound_thm4,
            TheoremId::Thm5 => &mut self.bound_thm5,
            TheoremId::Thm8 => &mut self.bound_thm8,
        }
    }

    pub fn is_failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// Seed a scenario's schedule actually consumes; static and sinusoid
/// schedules ignore it.
fn effective_seed(scenario: &Scenario) -> u64 {
    match scenario.schedule.kind {
        ScheduleKind::RandomWalk | ScheduleKind::PiecewiseConstant => scenario.schedule.seed,
        ScheduleKind::Static | ScheduleKind::Sinusoid => 0,
    }
}

/// Builds the stream, plays the learner and evaluates every selected
/// certificate that applies to it.
pub fn run_scenario(
    scenario: &Scenario,
    learner: &NamedLearner,
    horizon: usize,
    tolerances: &Tolerances,
    timing: bool,
) -> ResultRow {
    let start = Instant::now();
    let mut row = ResultRow {
        scenario: scenario.id.clone(),
        learner: learner.id.clone(),
        horizon,
        seed: effective_seed(scenario),
        ..Default::default()
    };
    if let Err(e) = fill_row(&mut row, scenario, learner, horizon, tolerances) {
        let keep = (row.scenario.clone(), row.learner.clone(), row.horizon, row.seed);
        row = ResultRow {
            scenario: keep.0,
            learner: keep.1,
            horizon: keep.2,
            seed: keep.3,
            failure: Some(e.to_string()),
            ..Default::default()
        };
    }
    if timing {
        row.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    row
}

fn fill_row(
    row: &mut ResultRow,
    scenario: &Scenario,
    learner: &NamedLearner,
    horizon: usize,
    tol: &Tolerances,
) -> Result<()> {
    let set = &scenario.set;
    let stream = make_stream(&scenario.loss, &scenario.schedule, set, horizon)?;
    let mut trace = run_learner(&learner.config, &stream, set, horizon)?;
    fill_minimizers(&mut trace, &stream, set, tol.minimizer)?;
    let report = trace_metrics(&trace, &stream, set)?;
    row.regret = Some(report.regret);
    row.v_t = Some(report.v_t);
    row.d_t = Some(report.d_t);
    row.p_t_star = Some(report.p_t_star);
    row.s_t_star = Some(report.s_t_star);
    row.m = Some(report.bound_m);
    row.g = Some(report.grad_bound_g);

    let kind = learner.config.kind;
    for &theorem in scenario.theorems.iter().filter(|t| t.learner() == kind) {
        if theorem == TheoremId::Thm5 {
            let auto = trace
                .learner
                .schedule
                .ok_or_else(|| Error::Precondition("thm5 needs the automatic K schedule".into()))?;
            let k = trace.learner.k_inner.unwrap_or(0);
            if k < auto.k {
                return Err(Error::Precondition(format!(
                    "thm5 needs K >= {} but the learner runs K = {k}",
                    auto.k
                )));
            }
        }
        let bound = theorem_bound(theorem, &report.bound_inputs(trace.learner.sigma))?;
        *row.bound_mut(theorem) = Some(bound);
        if report.regret > bound + tol.certificate {
            row.violations
                .push(format!("{theorem}: regret {} exceeds bound {bound}", report.regret));
        }
    }
    let mut failures = 0;
    for &lemma in scenario.lemmas.iter().filter(|l| l.learner() == kind) {
        let verdict = lemma_check(lemma, &trace, &stream, set, tol.lemma)?;
        if !verdict.passed {
            failures += 1;
            row.violations.push(format!(
                "{lemma}: slack {:e} at round {}",
                verdict.worst_slack, verdict.worst_round
            ));
        }
    }
    row.lemma_failures = Some(failures);
    Ok(())
}

/// Runs every `(scenario, learner, T)` job and returns rows sorted by
/// `(scenario, learner, T)`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let jobs: Vec<(&Scenario, &NamedLearner, usize)> = config
        .scenarios
        .iter()
        .flat_map(|s| {
            s.learners
                .iter()
                .flat_map(move |l| config.horizons.iter().map(move |&t| (s, l, t)))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    let timing = config.output.timing;
    let mut rows: Vec<ResultRow> = pool.install(|| {
        jobs.par_iter()
            .map(|(s, l, t)| run_scenario(s, l, *t, &config.tolerances, timing))
            .collect()
    });
    rows.sort_by(|a, b| {
        (&a.scenario, &a.learner, a.horizon).cmp(&(&b.scenario, &b.learner, b.horizon))
    });
    for row in rows.iter().filter(|r| r.is_failed()) {
        log::warn!(
            "{}/{} T={} failed: {}",
            row.scenario,
            row.learner,
            row.horizon,
            row.failure.as_deref().unwrap_or_default()
        );
    }
    Ok(rows)
}
