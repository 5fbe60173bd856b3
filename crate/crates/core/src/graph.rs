//! Exact small-population analysis: enumeration of all configurations
//! reachable under parallel steps, output-stability of configurations, and
//! the exact symmetry of a protocol on an initial configuration.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::model::{
    named_step, Configuration, ExecutionTrace, NamedApplication, ParallelStep, Protocol, StateId,
};

type OrderedRule = ((StateId, StateId), (StateId, StateId));

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("analysis limit: reachable configurations exceed the node budget of {limit}")]
    BudgetExceeded { limit: usize },
    #[error("no output-stable configuration is reachable; the protocol fails to compute here")]
    NoStableReachable,
    #[error("no output-stable configuration with output `{expected}` is reachable")]
    NoCorrectStableReachable { expected: String },
    #[error("protocol has no output symbol `{0}`")]
    UnknownOutput(String),
}

/// Node budget for exact searches. Exceeding it is an error, never a
/// truncated answer.
#[derive(Debug, Clone, Copy)]
pub struct GraphLimits {
    pub max_nodes: usize,
}

impl Default for GraphLimits {
    fn default() -> Self {
        GraphLimits {
            max_nodes: 2_000_000,
        }
    }
}

/// Enumerates every valid parallel step from `c` as an application-count map
/// over the effective ordered rules, visiting `(applications, resulting
/// counts)`. Ineffective applications change nothing and are not enumerated.
/// The visitor returns `false` to stop early.
fn enumerate_steps(
    p: &Protocol,
    c: &Configuration,
    visit: &mut impl FnMut(&[((StateId, StateId), u32)], &[u32], &[u32]) -> bool,
) {
    let rules: Vec<OrderedRule> = p.effective_rules().collect();
    let mut rem = c.counts().to_vec();
    let mut produced = vec![0u32; p.num_states()];
    let mut chosen: Vec<((StateId, StateId), u32)> = Vec::new();

    fn rec(
        rules: &[OrderedRule],
        i: usize,
        rem: &mut [u32],
        produced: &mut [u32],
        chosen: &mut Vec<((StateId, StateId), u32)>,
        visit: &mut impl FnMut(&[((StateId, StateId), u32)], &[u32], &[u32]) -> bool,
    ) -> bool {
        if i == rules.len() {
            if chosen.is_empty() {
                return true;
            }
            return visit(chosen, rem, produced);
        }
        if !rec(rules, i + 1, rem, produced, chosen, visit) {
            return false;
        }
        let ((a, b), (a2, b2)) = rules[i];
        let mut fired = 0u32;
        let mut keep_going = true;
        while keep_going {
            let can = if a == b {
                rem[a.index()] >= 2
            } else {
                rem[a.index()] >= 1 && rem[b.index()] >= 1
            };
            if !can {
                break;
            }
            rem[a.index()] -= 1;
            rem[b.index()] -= 1;
            produced[a2.index()] += 1;
            produced[b2.index()] += 1;
            fired += 1;
            chosen.push(((a, b), fired));
            keep_going = rec(rules, i + 1, rem, produced, chosen, visit);
            chosen.pop();
        }
        for _ in 0..fired {
            rem[a.index()] += 1;
            rem[b.index()] += 1;
            produced[a2.index()] -= 1;
            produced[b2.index()] -= 1;
        }
        keep_going
    }

    rec(&rules, 0, &mut rem, &mut produced, &mut chosen, visit);
}

fn combine(rem: &[u32], produced: &[u32]) -> Vec<u32> {
    rem.iter().zip(produced).map(|(r, p)| r + p).collect()
}

/// All distinct configurations obtainable from `c` by one valid parallel
/// step, in deterministic order.
pub fn successors(p: &Protocol, c: &Configuration) -> Vec<Configuration> {
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    enumerate_steps(p, c, &mut |_, rem, produced| {
        seen.insert(combine(rem, produced));
        true
    });
    let mut out: Vec<Configuration> = seen
        .into_iter()
        .map(|counts| Configuration::new(counts).expect("population preserved"))
        .collect();
    out.sort();
    out
}

/// Successors under single-application steps: classical sequential
/// population-protocol semantics, computed through the same step machinery.
pub fn single_application_successors(p: &Protocol, c: &Configuration) -> Vec<Configuration> {
    let mut seen = HashSet::new();
    for (a, b) in crate::model::enabled_effective_pairs(p, c) {
        let next = crate::model::apply_step(p, c, &ParallelStep::single(a, b))
            .expect("enabled pair is applicable");
        seen.insert(next);
    }
    let mut out: Vec<Configuration> = seen.into_iter().collect();
    out.sort();
    out
}

/// Finds one parallel step taking `from` to `to`, for witness reconstruction.
fn find_step(p: &Protocol, from: &Configuration, to: &Configuration) -> Option<ParallelStep> {
    let mut found = None;
    enumerate_steps(p, from, &mut |chosen, rem, produced| {
        if combine(rem, produced) == to.counts() {
            found = Some(ParallelStep::new(chosen.to_vec()).expect("non-empty"));
            false
        } else {
            true
        }
    });
    found
}

/// The reachable configuration graph from an initial configuration, with
/// memoized symmetry and output-stability verdicts per node.
#[derive(Debug)]
pub struct ConfigGraph {
    configs: Vec<Configuration>,
    succs: Vec<Vec<u32>>,
    symmetry: Vec<u32>,
    /// Output index when all present states agree.
    uniform: Vec<Option<usize>>,
    /// Output-stable: every reachable configuration agrees on this node's
    /// uniform output.
    stable: Vec<bool>,
    edge_count: usize,
}

impl ConfigGraph {
    pub fn build(
        p: &Protocol,
        c0: &Configuration,
        limits: GraphLimits,
    ) -> Result<Self, GraphError> {
        let mut configs: Vec<Configuration> = vec![c0.clone()];
        let mut index: HashMap<Configuration, u32> = HashMap::new();
        index.insert(c0.clone(), 0);
        let mut succs: Vec<Vec<u32>> = Vec::new();
        let mut head = 0usize;
        while head < configs.len() {
            let next = successors(p, &configs[head]);
            let mut row = Vec::with_capacity(next.len());
            for s in next {
                let id = match index.get(&s) {
                    Some(&id) => id,
                    None => {
                        let id = configs.len() as u32;
                        if configs.len() + 1 > limits.max_nodes {
                            return Err(GraphError::BudgetExceeded {
                                limit: limits.max_nodes,
                            });
                        }
                        index.insert(s.clone(), id);
                        configs.push(s);
                        id
                    }
                };
                row.push(id);
            }
            succs.push(row);
            head += 1;
        }

        let symmetry: Vec<u32> = configs.iter().map(|c| c.symmetry()).collect();
        let uniform: Vec<Option<usize>> = configs
            .iter()
            .map(|c| {
                let mut it = c.present();
                let first = p.output_of(it.next().expect("non-empty"));
                it.all(|q| p.output_of(q) == first).then_some(first)
            })
            .collect();

        // A node is output-stable iff every node in its forward closure is
        // uniform with the same output. Propagate "not stable" backwards from
        // non-uniform nodes and from output-mismatch edges.
        let mut preds: Vec<Vec<u32>> = vec![Vec::new(); configs.len()];
        for (u, row) in succs.iter().enumerate() {
            for &v in row {
                preds[v as usize].push(u as u32);
            }
        }
        let mut bad: Vec<bool> = uniform.iter().map(|u| u.is_none()).collect();
        let mut queue: VecDeque<u32> = bad
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i as u32)
            .collect();
        for (u, row) in succs.iter().enumerate() {
            if bad[u] {
                continue;
            }
            for &v in row {
                if let (Some(yu), Some(yv)) = (uniform[u], uniform[v as usize]) {
                    if yu != yv {
                        bad[u] = true;
                        queue.push_back(u as u32);
                        break;
                    }
                }
            }
        }
        while let Some(v) = queue.pop_front() {
            for &u in &preds[v as usize] {
                if !bad[u as usize] {
                    bad[u as usize] = true;
                    queue.push_back(u);
                }
            }
        }

        let edge_count = succs.iter().map(Vec::len).sum();
        Ok(ConfigGraph {
            configs,
            succs,
            symmetry,
            uniform,
            stable: bad.into_iter().map(|b| !b).collect(),
            edge_count,
        })
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn config(&self, i: usize) -> &Configuration {
        &self.configs[i]
    }

    pub fn successors_of(&self, i: usize) -> &[u32] {
        &self.succs[i]
    }

    pub fn symmetry_of(&self, i: usize) -> u32 {
        self.symmetry[i]
    }

    /// Output index of node `i` when it is output-stable.
    pub fn stable_output(&self, i: usize) -> Option<usize> {
        self.stable[i].then(|| self.uniform[i].expect("stable nodes are uniform"))
    }
}

/// Decides whether every configuration reachable from `c` keeps all nodes on
/// one common output; returns that output symbol when so.
pub fn is_output_stable_config(
    p: &Protocol,
    c: &Configuration,
    limits: GraphLimits,
) -> Result<Option<String>, GraphError> {
    let g = ConfigGraph::build(p, c, limits)?;
    Ok(g.stable_output(0).map(|y| p.outputs()[y].clone()))
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchStats {
    pub nodes: usize,
    pub edges: usize,
    pub thresholds_tried: u32,
}

/// Result of the exact symmetry search on one initial configuration.
#[derive(Debug)]
pub struct ExactSymmetry {
    /// s(A, c0): the largest k such that some correct output-stable
    /// configuration is reachable from c0 through configurations of symmetry
    /// at least k.
    pub value: u32,
    /// b(A, c0) = s(c0) - s(A, c0).
    pub breaking: u32,
    /// A witnessing execution achieving the exact symmetry and ending
    /// output-stable.
    pub witness: ExecutionTrace,
    pub stats: SearchStats,
}

/// Computes the exact symmetry of `p` on `c0` by downward threshold sweep.
///
/// Stability of a configuration is judged in the unrestricted graph (a
/// protocol may break symmetry arbitrarily after stability); the threshold
/// only constrains the path from `c0` to a stable configuration whose output
/// is `expected`. Path existence suffices because every finite prefix
/// extends to a fair execution.
pub fn exact_symmetry(
    p: &Protocol,
    c0: &Configuration,
    expected: &str,
    limits: GraphLimits,
) -> Result<ExactSymmetry, GraphError> {
    let y_expected = p
        .outputs()
        .iter()
        .position(|y| y == expected)
        .ok_or_else(|| GraphError::UnknownOutput(expected.to_string()))?;
    let g = ConfigGraph::build(p, c0, limits)?;
    let targets: Vec<bool> = (0..g.len())
        .map(|i| g.stable_output(i) == Some(y_expected))
        .collect();
    if !g.stable.iter().any(|&s| s) {
        return Err(GraphError::NoStableReachable);
    }
    if !targets.iter().any(|&t| t) {
        return Err(GraphError::NoCorrectStableReachable {
            expected: expected.to_string(),
        });
    }

    let s0 = g.symmetry[0];
    for k in (1..=s0).rev() {
        let thresholds_tried = s0 - k + 1;
        // BFS restricted to nodes with symmetry >= k.
        let mut parent: Vec<Option<u32>> = vec![None; g.len()];
        let mut seen = vec![false; g.len()];
        let mut queue = VecDeque::new();
        seen[0] = true;
        queue.push_back(0u32);
        let mut found: Option<u32> = None;
        'bfs: while let Some(u) = queue.pop_front() {
            if targets[u as usize] {
                found = Some(u);
                break 'bfs;
            }
            for &v in &g.succs[u as usize] {
                let vi = v as usize;
                if !seen[vi] && g.symmetry[vi] >= k {
                    seen[vi] = true;
                    parent[vi] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        if let Some(t) = found {
            let mut path = vec![t];
            while let Some(prev) = parent[*path.last().unwrap() as usize] {
                path.push(prev);
            }
            path.reverse();
            let mut steps = Vec::with_capacity(path.len().saturating_sub(1));
            for w in path.windows(2) {
                let step = find_step(p, g.config(w[0] as usize), g.config(w[1] as usize))
                    .expect("edge has a generating step");
                steps.push(step);
            }
            let witness =
                ExecutionTrace::replay(p, c0.clone(), steps).expect("reconstructed path replays");
            // A path with minimum above k would have been found at a higher
            // threshold, so the witness attains k exactly.
            debug_assert_eq!(witness.min_symmetry(), k);
            return Ok(ExactSymmetry {
                value: k,
                breaking: s0 - k,
                witness,
                stats: SearchStats {
                    nodes: g.len(),
                    edges: g.edge_count(),
                    thresholds_tried,
                },
            });
        }
    }
    unreachable!("threshold 1 imposes no restriction and a target is reachable")
}

/// JSON-facing form of an exact symmetry result.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub protocol: String,
    pub initial: BTreeMap<String, u32>,
    pub initial_symmetry: u32,
    pub exact_symmetry: u32,
    pub exact_breaking: u32,
    pub witness_steps: Vec<Vec<NamedApplication>>,
    pub witness_symmetries: Vec<u32>,
    pub stats: SearchStats,
}

impl ExactSymmetry {
    pub fn to_report(&self, p: &Protocol) -> SymmetryReport {
        SymmetryReport {
            protocol: p.name().to_string(),
            initial: p.named_counts(self.witness.initial()),
            initial_symmetry: self.witness.initial().symmetry(),
            exact_symmetry: self.value,
            exact_breaking: self.breaking,
            witness_steps: self
                .witness
                .steps()
                .iter()
                .map(|s| named_step(p, s))
                .collect(),
            witness_symmetries: self
                .witness
                .configurations()
                .iter()
                .map(|c| c.symmetry())
                .collect(),
            stats: self.stats.clone(),
        }
    }
}

/// Per-population exact symmetry of the parity protocol against the
/// protocol-size bound 2^(|Q|-1).
#[derive(Debug, Clone, Serialize)]
pub struct ParityBoundReport {
    pub bound: u64,
    /// (n, exact symmetry) pairs.
    pub values: Vec<(u32, u32)>,
    pub all_below_bound: bool,
}

/// Runs the exact search on the all-`L1` configuration for every population
/// size in `sizes` and checks each value against 2^(|Q|-1).
pub fn verify_parity_bound(
    p: &Protocol,
    sizes: &[u32],
    limits: GraphLimits,
) -> Result<ParityBoundReport, GraphError> {
    let bound = 1u64 << (p.num_states() - 1);
    let l1 = p
        .input_state("1")
        .expect("parity protocol has input symbol 1");
    let mut values = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let mut counts = vec![0u32; p.num_states()];
        counts[l1.index()] = n;
        let c0 = Configuration::new(counts).expect("n >= 1");
        let expected = if n % 2 == 1 { "1" } else { "0" };
        let exact = exact_symmetry(p, &c0, expected, limits)?;
        values.push((n, exact.value));
    }
    let all_below = values.iter().all(|&(_, s)| u64::from(s) < bound);
    Ok(ParityBoundReport {
        bound,
        values,
        all_below_bound: all_below,
    })
}
