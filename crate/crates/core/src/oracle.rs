//! Exact minimum-penalty routing with Dijkstra, used to check learned
//! policies and as a fast solver in its own right.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{map_range, Execution};
use crate::route::{Route, RouteEntry, RouteTable};
use crate::telemetry::{penalty_of_link, RewardMatrix, RewardModel, TelemetrySnapshot};
use crate::topology::{NodeId, Topology};

/// Positive per-link weights over a topology.
#[derive(Debug, Clone)]
pub struct WeightedView<'t> {
    topo: &'t Topology,
    weights: Vec<f64>,
}

impl<'t> WeightedView<'t> {
    pub fn new(topo: &'t Topology, snap: &TelemetrySnapshot, model: &RewardModel) -> Result<Self> {
        model.validate()?;
        snap.check_covers(topo)?;
        let weights = topo
            .links()
            .iter()
            .map(|l| {
                let tel = snap
                    .get(l.endpoint_a, l.endpoint_b)
                    .ok_or(Error::MissingTelemetry(l.endpoint_a, l.endpoint_b))?;
                penalty_of_link(model, l, tel)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_link_weights(topo, weights)
    }

    pub fn from_rewards(r: &RewardMatrix<'t>) -> Self {
        WeightedView {
            topo: r.topology(),
            weights: r.link_penalties().to_vec(),
        }
    }

    /// Weights in canonical link order; each must be finite and positive.
    pub fn from_link_weights(topo: &'t Topology, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != topo.link_count() {
            return Err(Error::Parse(format!(
                "expected {} link weights, got {}",
                topo.link_count(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Parse(format!("link weight {w} is not positive")));
        }
        Ok(WeightedView { topo, weights })
    }

    pub fn topology(&self) -> &'t Topology {
        self.topo
    }

    pub fn link_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn scaled(&self, c: f64) -> Self {
        WeightedView {
            topo: self.topo,
            weights: self.weights.iter().map(|w| w * c).collect(),
        }
    }

    pub fn weight(&self, s: NodeId, a: NodeId) -> Option<f64> {
        self.topo.link_index(s, a).map(|l| self.weights[l])
    }

    /// Reward of walking `path` (negated weight sum in path order), or `None`
    /// if some consecutive pair is not adjacent.
    pub fn path_reward(&self, path: &[NodeId]) -> Option<f64> {
        path.windows(2)
            .try_fold(0.0, |acc, w| self.weight(w[0], w[1]).map(|c| acc + -c))
    }

    /// Single-destination distances: `dist[i]` is the minimum penalty from
    /// node index `i` to `dst`, infinite when unreachable.
    fn distances_to(&self, dst: usize) -> Vec<f64> {
        let n = self.topo.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        dist[dst] = 0.0;
        heap.push(Frontier { cost: 0.0, node: dst });
        while let Some(Frontier { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            for h in self.topo.hops_of(node) {
                let next = cost + self.weights[h.link];
                if next < dist[h.to] {
                    dist[h.to] = next;
                    heap.push(Frontier { cost: next, node: h.to });
                }
            }
        }
        dist
    }

    /// Lexicographically smallest optimal path from `src` given the
    /// distances towards its destination.
    fn walk(&self, dist: &[f64], src: usize) -> Option<Route> {
        if !dist[src].is_finite() {
            return None;
        }
        let mut path = vec![self.topo.node_at(src)];
        let mut reward = 0.0;
        let mut at = src;
        while dist[at] > 0.0 {
            // Equality up to summation-order noise; weights are far larger.
            let tol = 1e-9 * dist[at].max(1.0);
            let hop = self
                .topo
                .hops_of(at)
                .iter()
                .find(|h| (dist[at] - (self.weights[h.link] + dist[h.to])).abs() <= tol)
                .expect("a tight edge exists on every shortest-path tree");
            reward += -self.weights[hop.link];
            at = hop.to;
            path.push(self.topo.node_at(at));
        }
        Some(Route {
            path,
            total_reward: reward,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Frontier {
    cost: f64,
    node: usize,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frontier {}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frontier {
    // Min-heap on cost.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Minimum-penalty path from `src` to `dst`; `None` when unreachable.
/// Ties go to the lexicographically smallest node sequence.
pub fn shortest_path(view: &WeightedView, src: NodeId, dst: NodeId) -> Result<Option<Route>> {
    let s = view.topo.index_of(src)?;
    let d = view.topo.index_of(dst)?;
    if s == d {
        return Ok(Some(Route::trivial(src)));
    }
    Ok(view.walk(&view.distances_to(d), s))
}

/// Optimal routes for all ordered pairs of distinct nodes.
pub fn solve_all(view: &WeightedView) -> RouteTable {
    solve_all_with(view, Execution::default())
}

pub fn solve_all_with(view: &WeightedView, exec: Execution) -> RouteTable {
    let topo = view.topo;
    let n = topo.node_count();
    let columns = map_range(n, exec, |d| {
        let dist = view.distances_to(d);
        (0..n)
            .filter(|&s| s != d)
            .map(|s| {
                let entry = match view.walk(&dist, s) {
                    Some(r) => RouteEntry::Path(r),
                    None => RouteEntry::Unreachable,
                };
                (topo.node_at(s), topo.node_at(d), entry)
            })
            .collect::<Vec<_>>()
    });
    let mut table = RouteTable::new(topo);
    for (s, d, e) in columns.into_iter().flatten() {
        table.insert(s, d, e);
    }
    table
}

/// One compared pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCheck {
    pub src: NodeId,
    pub dst: NodeId,
    pub learned: String,
    pub learned_reward: Option<f64>,
    pub optimal: String,
    pub optimal_reward: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checked: usize,
    /// Learned route is costlier than optimal, malformed, or missing.
    pub failures: Vec<PairCheck>,
    /// Different path at equal cost.
    pub ties: Vec<PairCheck>,
}

impl VerificationReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Compares every entry of `table` with the optimum over `view`.
pub fn verify_policy(table: &RouteTable, view: &WeightedView) -> VerificationReport {
    let topo = view.topo;
    let mut report = VerificationReport::default();
    let mut dist_cache: Vec<Option<Vec<f64>>> = vec![None; topo.node_count()];
    for ((src, dst), entry) in table.iter() {
        report.checked += 1;
        let (Ok(s), Ok(d)) = (topo.index_of(src), topo.index_of(dst)) else {
            report.failures.push(PairCheck {
                src,
                dst,
                learned: entry.label(),
                learned_reward: entry.route().map(|r| r.total_reward),
                optimal: "unknown node".into(),
                optimal_reward: None,
            });
            continue;
        };
        let dist = dist_cache[d].get_or_insert_with(|| view.distances_to(d));
        let optimal = if s == d {
            Some(Route::trivial(src))
        } else {
            view.walk(dist, s)
        };
        let learned_reward = entry.route().and_then(|r| {
            let well_formed = r.path.first() == Some(&src) && r.path.last() == Some(&dst);
            well_formed.then(|| view.path_reward(&r.path)).flatten()
        });
        let check = PairCheck {
            src,
            dst,
            learned: entry.label(),
            learned_reward,
            optimal: optimal.as_ref().map_or("unreachable".into(), Route::display_path),
            optimal_reward: optimal.as_ref().map(|r| r.total_reward),
        };
        match (&optimal, entry) {
            (None, RouteEntry::Unreachable) => {}
            (None, _) | (Some(_), RouteEntry::Unreachable | RouteEntry::NotConverged(_)) => report.failures.push(check),
            (Some(opt), RouteEntry::Path(r)) => match learned_reward {
                None => report.failures.push(check),
                Some(lr) => {
                    let tol = 1e-9 * opt.total_reward.abs().max(1.0);
                    if lr < opt.total_reward - tol {
                        report.failures.push(check);
                    } else if r.path != opt.path {
                        report.ties.push(check);
                    }
                }
            },
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Link;

    fn ids(v: &[u32]) -> Vec<NodeId> {
        v.iter().copied().map(NodeId).collect()
    }

    /// Square 1-2-3-4-1 plus diagonal 1-3.
    fn square() -> Topology {
        Topology::new(
            ids(&[1, 2, 3, 4]),
            vec![
                Link::new(1, 2, 0.0),
                Link::new(1, 3, 0.0),
                Link::new(1, 4, 0.0),
                Link::new(2, 3, 0.0),
                Link::new(3, 4, 0.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn hand_computed_square() {
        let t = square();
        // links sorted: 1-2, 1-3, 1-4, 2-3, 3-4
        let v = WeightedView::from_link_weights(&t, vec![1.0, 5.0, 2.0, 1.0, 4.0]).unwrap();
        let r = shortest_path(&v, NodeId(1), NodeId(3)).unwrap().unwrap();
        assert_eq!(r.path, ids(&[1, 2, 3]));
        assert_eq!(r.total_reward, -2.0);
        let r = shortest_path(&v, NodeId(4), NodeId(2)).unwrap().unwrap();
        assert_eq!(r.path, ids(&[4, 1, 2]));
        assert_eq!(r.total_reward, -3.0);
        let r = shortest_path(&v, NodeId(2), NodeId(2)).unwrap().unwrap();
        assert_eq!(r, Route::trivial(NodeId(2)));
    }

    #[test]
    fn ties_take_smallest_sequence() {
        let t = square();
        // 1->3: 1-2-3 = 2, 1-3 = 2, 1-4-3 = 2
        let v = WeightedView::from_link_weights(&t, vec![1.0, 2.0, 1.0, 1.0, 1.0]).unwrap();
        let r = shortest_path(&v, NodeId(1), NodeId(3)).unwrap().unwrap();
        assert_eq!(r.path, ids(&[1, 2, 3]));
        // 3->1: 3-1, 3-2-1, 3-4-1 all 2; smallest sequence is 3-1
        let r = shortest_path(&v, NodeId(3), NodeId(1)).unwrap().unwrap();
        assert_eq!(r.path, ids(&[3, 1]));
    }

    #[test]
    fn unreachable_pairs() {
        let t = Topology::new(ids(&[1, 2]), vec![]).unwrap();
        let v = WeightedView::from_link_weights(&t, vec![]).unwrap();
        assert_eq!(shortest_path(&v, NodeId(1), NodeId(2)).unwrap(), None);
        assert!(shortest_path(&v, NodeId(1), NodeId(3)).is_err());
        let table = solve_all(&v);
        assert_eq!(table.get(NodeId(1), NodeId(2)), Some(&RouteEntry::Unreachable));
        assert!(verify_policy(&table, &v).is_ok());
    }

    #[test]
    fn rejects_non_positive_weights() {
        let t = Topology::new(ids(&[1, 2]), vec![Link::new(1, 2, 0.0)]).unwrap();
        assert!(WeightedView::from_link_weights(&t, vec![0.0]).is_err());
        assert!(WeightedView::from_link_weights(&t, vec![]).is_err());
    }

    #[test]
    fn verify_flags_suboptimal_and_ties() {
        let t = square();
        let v = WeightedView::from_link_weights(&t, vec![1.0, 2.0, 1.0, 1.0, 1.0]).unwrap();
        let mut table = solve_all(&v);
        assert!(verify_policy(&table, &v).is_ok());
        assert!(verify_policy(&table, &v).ties.is_empty());

        table.insert(
            NodeId(1),
            NodeId(3),
            RouteEntry::Path(Route {
                path: ids(&[1, 4, 3]),
                total_reward: -2.0,
            }),
        );
        table.insert(
            NodeId(2),
            NodeId(4),
            RouteEntry::Path(Route {
                path: ids(&[2, 3, 1, 4]),
                total_reward: -4.0,
            }),
        );
        table.insert(
            NodeId(4),
            NodeId(2),
            RouteEntry::Path(Route {
                path: ids(&[4, 2]),
                total_reward: -1.0,
            }),
        );
        let rep = verify_policy(&table, &v);
        assert_eq!(rep.ties.len(), 1);
        assert_eq!(rep.failures.len(), 2);
        assert_eq!(rep.failures[0].learned, "2-3-1-4");
        assert_eq!(rep.failures[1].learned_reward, None);
    }

    #[test]
    fn empty_table_on_single_node() {
        let t = Topology::new(ids(&[1]), vec![]).unwrap();
        let v = WeightedView::from_link_weights(&t, vec![]).unwrap();
        let table = solve_all(&v);
        assert!(table.is_empty());
        let rep = verify_policy(&table, &v);
        assert_eq!(rep.checked, 0);
        assert!(rep.is_ok());
    }
}
