//! Closed-loop controller: holds the current telemetry and policy, applies
//! telemetry events, re-solves, and reports what changed.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{self, WeightedView};
use crate::par::Execution;
use crate::qlearning::{self, Hyperparams, QTable};
use crate::route::{diff_tables, RouteTable};
use crate::telemetry::{apply_event, build_reward_matrix, RewardModel, TelemetrySnapshot};
use crate::topology::Topology;

pub use crate::route::{DiffEntry, PolicyDiff};
pub use crate::telemetry::{EventField, TelemetryEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    #[default]
    #[serde(rename = "q")]
    QLearning,
    Oracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub solver: Solver,
    pub hyperparams: Hyperparams,
    pub model: RewardModel,
    /// Seed each re-solve with the previous Q-tables instead of zeros.
    pub warm_start: bool,
    pub execution: Execution,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            solver: Solver::QLearning,
            hyperparams: Hyperparams::default(),
            model: RewardModel::default(),
            warm_start: false,
            execution: Execution::default(),
        }
    }
}

impl EngineConfig {
    pub fn with_solver(solver: Solver) -> Self {
        EngineConfig {
            solver,
            ..Default::default()
        }
    }
}

/// Solves one snapshot with the configured solver.
pub fn solve(
    topo: &Topology,
    snap: &TelemetrySnapshot,
    config: &EngineConfig,
    warm: Option<&[QTable]>,
) -> Result<(RouteTable, Option<Vec<QTable>>)> {
    let rewards = build_reward_matrix(topo, snap, &config.model)?;
    match config.solver {
        Solver::Oracle => {
            let view = WeightedView::from_rewards(&rewards);
            Ok((oracle::solve_all_with(&view, config.execution), None))
        }
        Solver::QLearning => {
            let warm = if config.warm_start { warm } else { None };
            let sol = qlearning::solve_all_with(&rewards, &config.hyperparams, warm, config.execution)?;
            Ok((sol.table, Some(sol.qtables)))
        }
    }
}

#[derive(Debug, Clone)]
pub struct EngineState {
    topology: Arc<Topology>,
    snapshot: TelemetrySnapshot,
    config: EngineConfig,
    table: Arc<RouteTable>,
    /// Timestamp of the snapshot `table` was computed from.
    table_time: f64,
    qtables: Option<Vec<QTable>>,
    log: Vec<TelemetryEvent>,
}

/// One re-solve during replay.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayStep {
    /// Time of the last event in the batch.
    pub time: f64,
    pub events: usize,
    pub diff: PolicyDiff,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutcome {
    pub steps: Vec<ReplayStep>,
    /// Index of the first rejected event and why. Steps before it stand.
    pub aborted: Option<(usize, Error)>,
}

impl EngineState {
    pub fn new(topology: Arc<Topology>, snapshot: TelemetrySnapshot, config: EngineConfig) -> Result<Self> {
        let (table, qtables) = solve(&topology, &snapshot, &config, None)?;
        Ok(EngineState {
            table_time: snapshot.timestamp,
            topology,
            snapshot,
            config,
            table: Arc::new(table),
            qtables,
            log: Vec::new(),
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn snapshot(&self) -> &TelemetrySnapshot {
        &self.snapshot
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// The published policy. The handle stays valid across later steps.
    pub fn table(&self) -> Arc<RouteTable> {
        Arc::clone(&self.table)
    }

    pub fn table_time(&self) -> f64 {
        self.table_time
    }

    pub fn event_log(&self) -> &[TelemetryEvent] {
        &self.log
    }

    /// Applies one event and re-solves. On error the state is unchanged.
    pub fn step(&mut self, ev: &TelemetryEvent) -> Result<PolicyDiff> {
        self.apply_batch(std::slice::from_ref(ev))
    }

    /// Applies several events, then re-solves once. All-or-nothing.
    pub fn apply_batch(&mut self, events: &[TelemetryEvent]) -> Result<PolicyDiff> {
        let mut snap = self.snapshot.clone();
        for ev in events {
            snap = apply_event(&snap, ev)?;
        }
        let (table, qtables) = solve(&self.topology, &snap, &self.config, self.qtables.as_deref())?;
        let diff = diff_tables(&self.table, &table)?;
        self.table_time = snap.timestamp;
        self.snapshot = snap;
        self.table = Arc::new(table);
        if qtables.is_some() {
            self.qtables = qtables;
        }
        self.log.extend_from_slice(events);
        Ok(diff)
    }

    /// Folds the event stream through the engine. With `batch_window > 0`,
    /// events within `batch_window` seconds of the first event of a batch
    /// are coalesced into one re-solve.
    pub fn replay(&mut self, events: &[TelemetryEvent], batch_window: f64) -> ReplayOutcome {
        let mut steps = Vec::new();
        let mut i = 0;
        while i < events.len() {
            let start = events[i].time;
            let mut end = i + 1;
            if batch_window > 0.0 {
                while end < events.len() && events[end].time - start <= batch_window {
                    end += 1;
                }
            }
            let batch = &events[i..end];
            match self.apply_batch(batch) {
                Ok(diff) => steps.push(ReplayStep {
                    time: batch.last().map_or(start, |e| e.time),
                    events: batch.len(),
                    diff,
                }),
                Err(e) => {
                    // Locate the offending event within the batch.
                    let mut snap = self.snapshot.clone();
                    let mut bad = i;
                    for (k, ev) in batch.iter().enumerate() {
                        match apply_event(&snap, ev) {
                            Ok(s) => snap = s,
                            Err(_) => {
                                bad = i + k;
                                break;
                            }
                        }
                    }
                    return ReplayOutcome {
                        steps,
                        aborted: Some((bad, e)),
                    };
                }
            }
            i = end;
        }
        ReplayOutcome { steps, aborted: None }
    }
}

/// True when the policy after an event and its inverse equals the policy
/// before the event.
pub fn revert_check(before: &EngineState, after: &EngineState) -> bool {
    before.table.same_routes(&after.table)
}
