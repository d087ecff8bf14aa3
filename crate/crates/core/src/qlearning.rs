//! Tabular Q-learning over the routing MDP.
//!
//! States are nodes, the actions at a node are its neighbors, and taking an
//! action moves deterministically to that neighbor while collecting the
//! link's (negative) reward. One table is learned per destination, which is
//! absorbing with value zero. The greedy policy of the table for `dst` gives
//! the next hop towards `dst` from every node.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{map_range, Execution};
use crate::route::{Route, RouteFailure, RouteTable};
use crate::telemetry::RewardMatrix;
use crate::topology::{NodeId, Topology};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Multiplicative per-episode decay of the exploration rate.
    pub epsilon_decay: f64,
    /// Episodes per destination.
    pub episodes: usize,
    /// `None` means four times the node count.
    pub max_steps_per_episode: Option<usize>,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            alpha: 0.1,
            gamma: 1.0,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay: 0.999,
            episodes: 10_000,
            max_steps_per_episode: None,
            seed: 1,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Hyperparams(m.to_string()));
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must be in (0, 1]");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must be in (0, 1]");
        }
        if !unit(self.epsilon_start) || !unit(self.epsilon_end) {
            return bad("epsilon bounds must be in [0, 1]");
        }
        if self.epsilon_end > self.epsilon_start {
            return bad("epsilon_end must not exceed epsilon_start");
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return bad("epsilon_decay must be in (0, 1]");
        }
        if self.episodes == 0 {
            return bad("episodes must be positive");
        }
        if self.max_steps_per_episode == Some(0) {
            return bad("max_steps_per_episode must be positive");
        }
        Ok(())
    }

    pub fn max_steps(&self, topo: &Topology) -> usize {
        self.max_steps_per_episode.unwrap_or(4 * topo.node_count()).max(1)
    }

    /// Exploration rate used in episode `k` (zero-based).
    pub fn epsilon_at(&self, k: usize) -> f64 {
        let decayed = self.epsilon_start * self.epsilon_decay.powi(k.min(i32::MAX as usize) as i32);
        decayed.max(self.epsilon_end)
    }

    /// RNG seed of the table for `dst`.
    pub fn seed_for(&self, dst: NodeId) -> u64 {
        self.seed ^ u64::from(dst.0)
    }
}

/// Q-values towards one destination, one slot per directed adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    pub destination: NodeId,
    dest: usize,
    values: Vec<f64>,
    visits: Vec<u32>,
}

impl QTable {
    /// All-zero table.
    pub fn new(topo: &Topology, destination: NodeId) -> Result<Self> {
        let dest = topo.index_of(destination)?;
        Ok(QTable {
            destination,
            dest,
            values: vec![0.0; topo.hop_count()],
            visits: vec![0; topo.hop_count()],
        })
    }

    pub fn value(&self, topo: &Topology, s: NodeId, a: NodeId) -> Option<f64> {
        let h = topo.hop_index(topo.index_of(s).ok()?, topo.index_of(a).ok()?)?;
        Some(self.values[h])
    }

    pub fn set_value(&mut self, topo: &Topology, s: NodeId, a: NodeId, v: f64) -> Result<()> {
        let h = self.hop(topo, s, a)?;
        self.values[h] = v;
        Ok(())
    }

    pub fn visits(&self, topo: &Topology, s: NodeId, a: NodeId) -> Option<u32> {
        let h = topo.hop_index(topo.index_of(s).ok()?, topo.index_of(a).ok()?)?;
        Some(self.visits[h])
    }

    /// `(s, a, Q(s,a), visits)` in adjacency order.
    pub fn entries(&self, topo: &Topology) -> Vec<(NodeId, NodeId, f64, u32)> {
        let mut out = Vec::with_capacity(self.values.len());
        for i in 0..topo.node_count() {
            let base = topo.hop_offset(i);
            for (k, h) in topo.hops_of(i).iter().enumerate() {
                out.push((
                    topo.node_at(i),
                    topo.node_at(h.to),
                    self.values[base + k],
                    self.visits[base + k],
                ));
            }
        }
        out
    }

    fn hop(&self, topo: &Topology, s: NodeId, a: NodeId) -> Result<usize> {
        let (i, j) = (topo.index_of(s)?, topo.index_of(a)?);
        topo.hop_index(i, j).ok_or(Error::InvalidAction(s, a))
    }

    /// `max_a Q(s, a)`; zero at the destination.
    fn best_value(&self, topo: &Topology, s: usize) -> f64 {
        if s == self.dest {
            return 0.0;
        }
        let base = topo.hop_offset(s);
        let len = topo.hops_of(s).len();
        self.values[base..base + len]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy hop index at `s`; ties go to the lowest neighbor id.
    fn greedy_hop(&self, topo: &Topology, s: usize) -> Option<usize> {
        let base = topo.hop_offset(s);
        let len = topo.hops_of(s).len();
        let mut best: Option<usize> = None;
        for h in base..base + len {
            if best.is_none_or(|b| self.values[h] > self.values[b]) {
                best = Some(h);
            }
        }
        best
    }

    fn update_hop(&mut self, topo: &Topology, hop: usize, next: usize, r: f64, alpha: f64, gamma: f64) {
        let target = r + gamma * self.best_value(topo, next);
        let q = &mut self.values[hop];
        *q += alpha * (target - *q);
        self.visits[hop] = self.visits[hop].saturating_add(1);
    }
}

/// One temporal-difference update of `Q(s, a)` for the transition `s -> a`
/// with reward `r`.
pub fn q_update(q: &mut QTable, topo: &Topology, s: NodeId, a: NodeId, r: f64, alpha: f64, gamma: f64) -> Result<()> {
    let h = q.hop(topo, s, a)?;
    if s == q.destination {
        return Err(Error::InvalidAction(s, a));
    }
    let next = topo.index_of(a)?;
    q.update_hop(topo, h, next, r, alpha, gamma);
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    /// Transitions taken, with the reward collected on each.
    pub steps: Vec<(NodeId, NodeId, f64)>,
    pub reached_destination: bool,
}

struct EpisodeCtx<'a, 't> {
    rewards: &'a RewardMatrix<'t>,
    epsilon: f64,
    alpha: f64,
    gamma: f64,
    max_steps: usize,
}

fn episode<R: Rng>(
    ctx: &EpisodeCtx,
    q: &mut QTable,
    start: usize,
    rng: &mut R,
    mut on_step: impl FnMut(usize, usize, f64),
) -> bool {
    let topo = ctx.rewards.topology();
    let rewards = ctx.rewards.hop_rewards();
    let mut at = start;
    for _ in 0..ctx.max_steps {
        let base = topo.hop_offset(at);
        let hops = topo.hops_of(at);
        let hop = if ctx.epsilon > 0.0 && rng.random::<f64>() < ctx.epsilon {
            base + rng.random_range(0..hops.len())
        } else {
            q.greedy_hop(topo, at).expect("non-isolated state")
        };
        let next = hops[hop - base].to;
        let r = rewards[hop];
        q.update_hop(topo, hop, next, r, ctx.alpha, ctx.gamma);
        on_step(at, next, r);
        if next == q.dest {
            return true;
        }
        at = next;
    }
    false
}

/// Runs one epsilon-greedy episode from `start`, updating `q` along the way.
pub fn run_episode<R: Rng>(
    rewards: &RewardMatrix,
    q: &mut QTable,
    start: NodeId,
    epsilon: f64,
    hp: &Hyperparams,
    rng: &mut R,
) -> Result<EpisodeTrace> {
    let topo = rewards.topology();
    let s = topo.index_of(start)?;
    if s == q.dest {
        return Err(Error::InvalidAction(start, start));
    }
    if topo.hops_of(s).is_empty() {
        return Err(Error::NoNeighbors(start));
    }
    let ctx = EpisodeCtx {
        rewards,
        epsilon,
        alpha: hp.alpha,
        gamma: hp.gamma,
        max_steps: hp.max_steps(topo),
    };
    let mut steps = Vec::new();
    let reached = episode(&ctx, q, s, rng, |from, to, r| {
        steps.push((topo.node_at(from), topo.node_at(to), r))
    });
    Ok(EpisodeTrace {
        steps,
        reached_destination: reached,
    })
}

/// Learns the table for `dst` from scratch.
pub fn train(rewards: &RewardMatrix, dst: NodeId, hp: &Hyperparams) -> Result<QTable> {
    let q = QTable::new(rewards.topology(), dst)?;
    train_from(rewards, q, hp)
}

/// Continues training from an existing table (warm start).
pub fn train_from(rewards: &RewardMatrix, mut q: QTable, hp: &Hyperparams) -> Result<QTable> {
    hp.validate()?;
    let topo = rewards.topology();
    if q.values.len() != topo.hop_count() || topo.index_of(q.destination)? != q.dest {
        return Err(Error::Hyperparams("Q-table does not match topology".into()));
    }
    let starts: Vec<usize> = (0..topo.node_count())
        .filter(|&i| i != q.dest && !topo.hops_of(i).is_empty())
        .collect();
    if starts.is_empty() {
        return Ok(q);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed_for(q.destination));
    let max_steps = hp.max_steps(topo);
    for k in 0..hp.episodes {
        let ctx = EpisodeCtx {
            rewards,
            epsilon: hp.epsilon_at(k),
            alpha: hp.alpha,
            gamma: hp.gamma,
            max_steps,
        };
        episode(&ctx, &mut q, starts[k % starts.len()], &mut rng, |_, _, _| {});
    }
    Ok(q)
}

/// Follows the greedy policy of `q` from `src`. Returns the route, or why no
/// loop-free route within `max_hops` exists.
pub fn extract_route(
    q: &QTable,
    rewards: &RewardMatrix,
    src: NodeId,
    max_hops: usize,
) -> Result<std::result::Result<Route, RouteFailure>> {
    let topo = rewards.topology();
    let s = topo.index_of(src)?;
    if s == q.dest {
        return Ok(Ok(Route::trivial(src)));
    }
    if !topo.same_component(s, q.dest) {
        return Ok(Err(RouteFailure::Unreachable));
    }
    let hop_rewards = rewards.hop_rewards();
    let mut seen = vec![false; topo.node_count()];
    let mut path = vec![src];
    let mut total = 0.0;
    let mut at = s;
    seen[s] = true;
    while at != q.dest {
        if path.len() > max_hops {
            return Ok(Err(RouteFailure::TooLong { path }));
        }
        let hop = q.greedy_hop(topo, at).expect("connected node has neighbors");
        let next = topo.hops_of(at)[hop - topo.hop_offset(at)].to;
        total += hop_rewards[hop];
        path.push(topo.node_at(next));
        if seen[next] {
            return Ok(Err(RouteFailure::Loop { path }));
        }
        seen[next] = true;
        at = next;
    }
    Ok(Ok(Route {
        path,
        total_reward: total,
    }))
}

/// Result of learning every destination.
#[derive(Debug, Clone)]
pub struct Solution {
    pub table: RouteTable,
    /// One table per destination, in ascending node order.
    pub qtables: Vec<QTable>,
}

/// Learns one table per destination and extracts routes for all ordered
/// pairs. Pairs whose greedy walk loops are kept in the table as failures.
pub fn solve_all(rewards: &RewardMatrix, hp: &Hyperparams) -> Result<RouteTable> {
    Ok(solve_all_with(rewards, hp, None, Execution::default())?.table)
}

/// Full form of [`solve_all`]: optional warm-start tables and explicit
/// scheduling.
pub fn solve_all_with(
    rewards: &RewardMatrix,
    hp: &Hyperparams,
    warm: Option<&[QTable]>,
    exec: Execution,
) -> Result<Solution> {
    hp.validate()?;
    let topo = rewards.topology();
    let n = topo.node_count();
    if let Some(w) = warm {
        if w.len() != n {
            return Err(Error::Hyperparams(
                "warm-start table count does not match topology".into(),
            ));
        }
    }
    let per_dest = map_range(n, exec, |d| -> Result<(QTable, Vec<_>)> {
        let dst = topo.node_at(d);
        let q = match warm {
            Some(w) => train_from(rewards, w[d].clone(), hp)?,
            None => train(rewards, dst, hp)?,
        };
        let routes = (0..n)
            .filter(|&s| s != d)
            .map(|s| {
                let src = topo.node_at(s);
                extract_route(&q, rewards, src, n).map(|r| (src, dst, r))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((q, routes))
    });
    let mut table = RouteTable::new(topo);
    let mut qtables = Vec::with_capacity(n);
    for item in per_dest {
        let (q, routes) = item?;
        for (src, dst, r) in routes {
            table.insert(src, dst, r.into());
        }
        qtables.push(q);
    }
    Ok(Solution { table, qtables })
}
