//! Static, protocol-level analysis: reachable states, production trees,
//! output-stable and disseminating state detection, and the transform that
//! merges output-stable states into a single disseminating state.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::model::{Protocol, StateId};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("protocol has no reachable output-stable state; the disseminating transform requires one")]
    NoReachableOutputStable,
}

/// Reachability closure with one backpointer and round index per state.
///
/// Round 0 holds the initial states; a state enters round t+1 when some
/// effective rule produces it from two states of rounds <= t (in either
/// product position). Rounds bound production-tree depth.
struct Closure {
    round: Vec<Option<usize>>,
    parent: Vec<Option<(StateId, StateId)>>,
}

fn closure(p: &Protocol) -> Closure {
    let mut round = vec![None; p.num_states()];
    let mut parent = vec![None; p.num_states()];
    for q in p.initial_states() {
        round[q.index()] = Some(0);
    }
    let mut current = 0;
    loop {
        let mut added = false;
        let mut next: Vec<(StateId, (StateId, StateId))> = Vec::new();
        for ((a, b), (c, d)) in p.effective_rules() {
            let ok = |q: StateId| round[q.index()].is_some_and(|r| r <= current);
            if ok(a) && ok(b) {
                for prod in [c, d] {
                    if round[prod.index()].is_none() {
                        next.push((prod, (a, b)));
                    }
                }
            }
        }
        for (q, lhs) in next {
            if round[q.index()].is_none() {
                round[q.index()] = Some(current + 1);
                parent[q.index()] = Some(lhs);
                added = true;
            }
        }
        if !added {
            break;
        }
        current += 1;
    }
    Closure { round, parent }
}

/// States producible from some initial configuration: the least fixpoint
/// that starts from Q0 and adds every product of a rule whose two reactants
/// are already reachable.
pub fn reachable_states(p: &Protocol) -> BTreeSet<StateId> {
    closure(p)
        .round
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_some())
        .map(|(i, _)| StateId(i))
        .collect()
}

/// A binary in-tree witnessing how a state is produced from initial states.
#[derive(Debug, Clone)]
pub struct ProductionTree {
    pub state: StateId,
    pub children: Option<Box<(ProductionTree, ProductionTree)>>,
}

impl ProductionTree {
    /// Edge depth; a single initial-state leaf has depth 0.
    pub fn depth(&self) -> usize {
        match &self.children {
            None => 0,
            Some(c) => 1 + c.0.depth().max(c.1.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match &self.children {
            None => 1,
            Some(c) => c.0.leaf_count() + c.1.leaf_count(),
        }
    }
}

/// A production tree for `q`, or `None` when `q` is unreachable.
///
/// Built from closure backpointers: each node's children come from strictly
/// earlier closure rounds, so no root-to-leaf path repeats a state and the
/// depth is at most |Q| with at most 2^(|Q|-1) leaves.
pub fn production_tree(p: &Protocol, q: StateId) -> Option<ProductionTree> {
    let cl = closure(p);
    cl.round[q.index()]?;
    fn build(cl: &Closure, q: StateId) -> ProductionTree {
        match cl.parent[q.index()] {
            None => ProductionTree {
                state: q,
                children: None,
            },
            Some((a, b)) => ProductionTree {
                state: q,
                children: Some(Box::new((build(cl, a), build(cl, b)))),
            },
        }
    }
    Some(build(&cl, q))
}

/// Sound under-approximation of the output-stable states, restricted to
/// reachable states.
///
/// Per output value y, the greatest fixpoint of: start from all states with
/// output y, and remove q while some rule with q on the left (either
/// position, any partner) produces no state that is still in the set. A
/// surviving state's presence is preserved by every parallel step, because
/// each application touching it yields at least one product in the set and
/// applications are node-disjoint.
pub fn output_stable_states(p: &Protocol) -> BTreeSet<StateId> {
    let reach = reachable_states(p);
    let mut result = BTreeSet::new();
    for y in 0..p.outputs().len() {
        let mut set: BTreeSet<StateId> = (0..p.num_states())
            .map(StateId)
            .filter(|&q| p.output_of(q) == y)
            .collect();
        loop {
            let mut removed = false;
            for q in set.clone() {
                'check: for x in (0..p.num_states()).map(StateId) {
                    for (a, b) in [(q, x), (x, q)] {
                        let (c, d) = p.delta(a, b);
                        if !set.contains(&c) && !set.contains(&d) {
                            set.remove(&q);
                            removed = true;
                            break 'check;
                        }
                    }
                }
            }
            if !removed {
                break;
            }
        }
        result.extend(set);
    }
    result.intersection(&reach).copied().collect()
}

/// States q satisfying the syntactic dissemination condition: every
/// interaction involving q, in either orientation, produces (q, q).
pub fn disseminating_states(p: &Protocol) -> BTreeSet<StateId> {
    (0..p.num_states())
        .map(StateId)
        .filter(|&q| {
            (0..p.num_states()).map(StateId).all(|x| {
                p.delta(x, q) == (q, q) && p.delta(q, x) == (q, q)
            })
        })
        .collect()
}

/// Merges the detected reachable output-stable states into one disseminating
/// representative.
///
/// The representative is the lowest-indexed detected state; the other
/// detected states are removed, every occurrence of a removed state in the
/// transition function is replaced by the representative, and every rule
/// touching the representative (on either side, after substitution) is
/// rewritten to produce it twice.
pub fn disseminating_transform(p: &Protocol) -> Result<Protocol, AnalysisError> {
    let stable = output_stable_states(p);
    let rep = *stable
        .iter()
        .next()
        .ok_or(AnalysisError::NoReachableOutputStable)?;
    let removed: BTreeSet<StateId> = stable.iter().copied().filter(|&q| q != rep).collect();
    let subst = |q: StateId| if stable.contains(&q) { rep } else { q };

    let keep: Vec<StateId> = (0..p.num_states())
        .map(StateId)
        .filter(|q| !removed.contains(q))
        .collect();
    let name_of = |q: StateId| p.state_name(q).to_string();
    let states: Vec<String> = keep.iter().map(|&q| name_of(q)).collect();
    let output_map: Vec<(String, String)> = keep
        .iter()
        .map(|&q| (name_of(q), p.output_symbol(q).to_string()))
        .collect();
    let input_map: Vec<(String, String)> = p
        .inputs()
        .iter()
        .map(|sym| {
            (
                sym.clone(),
                name_of(subst(p.input_state(sym).unwrap())),
            )
        })
        .collect();

    let mut rules = Vec::new();
    for &u in &keep {
        for &v in &keep {
            let (c, d) = p.delta(u, v);
            let (c, d) = (subst(c), subst(d));
            let rhs = if u == rep || v == rep || c == rep || d == rep {
                (rep, rep)
            } else {
                (c, d)
            };
            if rhs != (u, v) {
                rules.push(((name_of(u), name_of(v)), (name_of(rhs.0), name_of(rhs.1))));
            }
        }
    }
    Ok(Protocol::new(
        format!("{}_disseminating", p.name()),
        p.inputs().to_vec(),
        p.outputs().to_vec(),
        states,
        input_map,
        output_map,
        rules,
    )
    .expect("transform preserves well-formedness"))
}

/// Lint verdict relating a declared linear predicate to the output-stable
/// detector: a predicate with coefficients of both signs admits no protocol
/// with a reachable output-stable state, so detecting one is inconsistent.
#[derive(Debug, Clone, Serialize)]
pub struct MixedSignVerdict {
    pub coefficients: Vec<i64>,
    pub mixed_signs: bool,
    pub output_stable_found: Vec<String>,
    pub consistent: bool,
}

pub fn mixed_sign_stability_check(p: &Protocol, coefficients: &[i64]) -> MixedSignVerdict {
    let mixed = coefficients.iter().any(|&a| a > 0) && coefficients.iter().any(|&a| a < 0);
    let found: Vec<String> = output_stable_states(p)
        .iter()
        .map(|&q| p.state_name(q).to_string())
        .collect();
    MixedSignVerdict {
        coefficients: coefficients.to_vec(),
        mixed_signs: mixed,
        consistent: !mixed || found.is_empty(),
        output_stable_found: found,
    }
}

/// Full static report for one protocol, as emitted by the `analyze` command.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub protocol: String,
    pub states: Vec<String>,
    pub reachable: Vec<String>,
    pub production_tree_depth: BTreeMap<String, usize>,
    pub output_stable: Vec<String>,
    pub disseminating: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lint: Option<MixedSignVerdict>,
}

pub fn analyze(p: &Protocol, predicate_coefficients: Option<&[i64]>) -> AnalysisReport {
    let reach = reachable_states(p);
    let names = |set: &BTreeSet<StateId>| -> Vec<String> {
        set.iter().map(|&q| p.state_name(q).to_string()).collect()
    };
    let mut depths = BTreeMap::new();
    for &q in &reach {
        let tree = production_tree(p, q).expect("reachable state has a tree");
        depths.insert(p.state_name(q).to_string(), tree.depth());
    }
    let dis: BTreeSet<StateId> = disseminating_states(p)
        .intersection(&reach)
        .copied()
        .collect();
    AnalysisReport {
        protocol: p.name().to_string(),
        states: p.states().to_vec(),
        reachable: names(&reach),
        production_tree_depth: depths,
        output_stable: names(&output_stable_states(p)),
        disseminating: names(&dis),
        lint: predicate_coefficients.map(|c| mixed_sign_stability_check(p, c)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::*;

    fn names(p: &Protocol, set: &BTreeSet<StateId>) -> Vec<String> {
        set.iter().map(|&q| p.state_name(q).to_string()).collect()
    }

    #[test]
    fn reachable_count_to_3() {
        let p = gen_count_to_x(3).unwrap();
        let r = reachable_states(&p);
        assert_eq!(names(&p, &r), ["q0", "q1", "q2", "q3"]);
    }

    #[test]
    fn reachable_no_effective_rules_is_q0() {
        let p = crate::dsl::parse_protocol(
            "protocol quiet\ninputs: a -> s\noutputs: s -> 0, t -> 1\nrules:\n",
        )
        .unwrap();
        let r = reachable_states(&p);
        assert_eq!(names(&p, &r), ["s"]);
    }

    #[test]
    fn reachable_majority_all_states() {
        let p = gen_majority();
        assert_eq!(reachable_states(&p).len(), 4);
    }

    #[test]
    fn production_tree_count_to_3_alarm() {
        let p = gen_count_to_x(3).unwrap();
        let q3 = p.state_id("q3").unwrap();
        let tree = production_tree(&p, q3).unwrap();
        assert!(tree.depth() <= p.num_states());
        assert!(tree.leaf_count() <= 1 << (p.num_states() - 1));
        // All leaves are initial states.
        fn leaves(t: &ProductionTree, out: &mut Vec<StateId>) {
            match &t.children {
                None => out.push(t.state),
                Some(c) => {
                    leaves(&c.0, out);
                    leaves(&c.1, out);
                }
            }
        }
        let mut ls = Vec::new();
        leaves(&tree, &mut ls);
        let q0 = p.initial_states();
        assert!(ls.iter().all(|q| q0.contains(q)));
    }

    #[test]
    fn production_tree_initial_state_is_leaf() {
        let p = gen_count_to_x(3).unwrap();
        let q1 = p.state_id("q1").unwrap();
        let tree = production_tree(&p, q1).unwrap();
        assert_eq!(tree.depth(), 0);
        assert_eq!(tree.leaf_count(), 1);
    }

    #[test]
    fn production_tree_internal_nodes_respect_rules() {
        // Every internal node must be producible from its children's labels
        // in some orientation.
        for p in [
            gen_count_to_x(5).unwrap(),
            gen_majority(),
            gen_k_majority(2).unwrap(),
            gen_parity_leader(),
        ] {
            fn check(p: &Protocol, t: &ProductionTree) {
                if let Some(c) = &t.children {
                    let (b0, b1) = (c.0.state, c.1.state);
                    let d1 = p.delta(b0, b1);
                    let d2 = p.delta(b1, b0);
                    assert!(
                        d1.0 == t.state || d1.1 == t.state || d2.0 == t.state || d2.1 == t.state,
                        "no rule produces {} from ({}, {})",
                        p.state_name(t.state),
                        p.state_name(b0),
                        p.state_name(b1)
                    );
                    check(p, &c.0);
                    check(p, &c.1);
                }
            }
            for q in reachable_states(&p) {
                check(&p, &production_tree(&p, q).unwrap());
            }
        }
    }

    #[test]
    fn unreachable_state_has_no_tree() {
        let p = gen_k_majority(2).unwrap();
        // (l, 0) is never produced.
        let l0 = p.state_id("l_0").unwrap();
        assert!(production_tree(&p, l0).is_none());
        assert!(!reachable_states(&p).contains(&l0));
    }

    #[test]
    fn output_stable_threshold_protocols() {
        let p = gen_positive_linear_combination(&[1], 3).unwrap();
        assert_eq!(names(&p, &output_stable_states(&p)), ["q3"]);
        let p = gen_count_to_x(5).unwrap();
        assert_eq!(names(&p, &output_stable_states(&p)), ["q5"]);
    }

    #[test]
    fn output_stable_empty_for_mixed_sign_and_parity() {
        assert!(output_stable_states(&gen_majority()).is_empty());
        assert!(output_stable_states(&gen_k_majority(2).unwrap()).is_empty());
        assert!(output_stable_states(&gen_parity_leader()).is_empty());
    }

    #[test]
    fn disseminating_detection() {
        let p = gen_count_to_x(4).unwrap();
        assert_eq!(names(&p, &disseminating_states(&p)), ["q4"]);
        let p = gen_positive_linear_combination(&[1, 2], 3).unwrap();
        assert_eq!(names(&p, &disseminating_states(&p)), ["q3"]);
        assert!(disseminating_states(&gen_majority()).is_empty());
    }

    #[test]
    fn disseminating_subset_of_output_stable() {
        for p in [
            gen_count_to_x(3).unwrap(),
            gen_positive_linear_combination(&[1, 2], 4).unwrap(),
            gen_majority(),
            gen_k_majority(2).unwrap(),
            gen_parity_leader(),
        ] {
            let reach = reachable_states(&p);
            let dis: BTreeSet<StateId> = disseminating_states(&p)
                .intersection(&reach)
                .copied()
                .collect();
            let stable = output_stable_states(&p);
            assert!(dis.is_subset(&stable), "protocol {}", p.name());
        }
    }

    #[test]
    fn transform_threshold_protocols_unchanged() {
        for p in [
            gen_count_to_x(4).unwrap(),
            gen_positive_linear_combination(&[1, 2], 4).unwrap(),
        ] {
            let t = disseminating_transform(&p).unwrap();
            assert_eq!(p.states(), t.states());
            let rp: Vec<_> = p.effective_rules().collect();
            let rt: Vec<_> = t.effective_rules().collect();
            assert_eq!(rp, rt, "protocol {}", p.name());
        }
    }

    #[test]
    fn transform_requires_output_stable_state() {
        assert!(matches!(
            disseminating_transform(&gen_majority()),
            Err(AnalysisError::NoReachableOutputStable)
        ));
    }

    #[test]
    fn transform_merges_two_stable_states() {
        // Two inert output-1 states produced together; the transform must
        // merge them into one disseminating state.
        let text = "protocol twostable\n\
                    inputs: a -> s\n\
                    outputs: s -> 0, t1 -> 1, t2 -> 1\n\
                    rules:\n\
                    \x20 s s -> t1 t2\n\
                    \x20 sym: s t1 -> t1 t1\n\
                    \x20 sym: s t2 -> t2 t2\n";
        let p = crate::dsl::parse_protocol(text).unwrap();
        assert_eq!(
            names(&p, &output_stable_states(&p)),
            ["t1", "t2"]
        );
        let t = disseminating_transform(&p).unwrap();
        assert_eq!(t.states(), ["s", "t1"]);
        let rep = t.state_id("t1").unwrap();
        assert!(disseminating_states(&t).contains(&rep));
        assert!(reachable_states(&t).contains(&rep));
    }

    #[test]
    fn mixed_sign_lint() {
        let v = mixed_sign_stability_check(&gen_majority(), &[1, -1]);
        assert!(v.mixed_signs && v.consistent);
        let v = mixed_sign_stability_check(&gen_positive_linear_combination(&[1], 3).unwrap(), &[1]);
        assert!(!v.mixed_signs && v.consistent);
        let v = mixed_sign_stability_check(&gen_k_majority(2).unwrap(), &[1, -1]);
        assert!(v.consistent && v.output_stable_found.is_empty());
    }

    #[test]
    fn analyze_report_shape() {
        let p = gen_count_to_x(5).unwrap();
        let r = analyze(&p, Some(&[1]));
        assert_eq!(r.disseminating, ["q5"]);
        assert_eq!(r.output_stable, ["q5"]);
        assert!(r.production_tree_depth.values().all(|&d| d <= 6));
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"disseminating\""));
    }
}
