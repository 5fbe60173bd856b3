//! Parameterized generators for the builtin protocols, plus the analytic
//! predicate and stability knowledge the simulators and experiments need.
//!
//! Tuple states such as `(l, -1)` are rendered as bare identifiers with an
//! `m` marking the minus sign: `l_m1`. The parity protocol uses `L0`, `L1`,
//! `F0`, `F1`.

use thiserror::Error;

use crate::model::{Configuration, Protocol};

#[derive(Debug, Error)]
pub enum BuiltinError {
    #[error("count-to-x requires x >= 1 (got {0})")]
    InvalidThresholdX(u32),
    #[error("positive linear combination requires at least one coefficient")]
    NoCoefficients,
    #[error("coefficient {index} must be >= 1")]
    ZeroCoefficient { index: usize },
    #[error("k-majority requires k >= 1 (got {0})")]
    InvalidK(u32),
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
}

fn signed_name(role: &str, j: i64) -> String {
    if j < 0 {
        format!("{role}_m{}", -j)
    } else {
        format!("{role}_{j}")
    }
}

/// Count-to-x: all-`1` inputs must number at least `x`.
///
/// States `q0..qx`, `I(0)=q0`, `I(1)=q1`, `O(qx)=1` and `0` elsewhere;
/// `(q_i, q_j) -> (q_{i+j}, q0)` when `i+j < x`, else `(q_x, q_x)`.
pub fn gen_count_to_x(x: u32) -> Result<Protocol, BuiltinError> {
    if x < 1 {
        return Err(BuiltinError::InvalidThresholdX(x));
    }
    gen_threshold(&format!("count_to_{x}"), x, &[("0", 0), ("1", 1)])
}

/// Positive-Linear-Combination: `sum a_i * N_i >= c` with all `a_i >= 1`.
///
/// Inputs `s1..sk` map to `q_{a_i}` (clamped to `q_c` when `a_i > c`, since
/// the state space ends at the threshold and the predicate value is
/// unaffected).
pub fn gen_positive_linear_combination(
    coeffs: &[u32],
    threshold: u32,
) -> Result<Protocol, BuiltinError> {
    if coeffs.is_empty() {
        return Err(BuiltinError::NoCoefficients);
    }
    for (i, &a) in coeffs.iter().enumerate() {
        if a == 0 {
            return Err(BuiltinError::ZeroCoefficient { index: i });
        }
    }
    let name = format!(
        "plc_{}_c{}",
        coeffs
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join("_"),
        threshold
    );
    let inputs: Vec<(String, u32)> = coeffs
        .iter()
        .enumerate()
        .map(|(i, &a)| (format!("s{}", i + 1), a.min(threshold)))
        .collect();
    let input_refs: Vec<(&str, u32)> = inputs.iter().map(|(s, a)| (s.as_str(), *a)).collect();
    gen_threshold(&name, threshold, &input_refs)
}

/// Shared body of the two threshold protocols: states `q0..qc` and the
/// gather/alarm transition table.
fn gen_threshold(
    name: &str,
    threshold: u32,
    inputs: &[(&str, u32)],
) -> Result<Protocol, BuiltinError> {
    let c = threshold as usize;
    let states: Vec<String> = (0..=c).map(|i| format!("q{i}")).collect();
    let input_syms: Vec<String> = inputs.iter().map(|(s, _)| s.to_string()).collect();
    let input_map: Vec<(String, String)> = inputs
        .iter()
        .map(|(s, a)| (s.to_string(), format!("q{a}")))
        .collect();
    let output_map: Vec<(String, String)> = (0..=c)
        .map(|i| {
            let y = if i == c { "1" } else { "0" };
            (format!("q{i}"), y.to_string())
        })
        .collect();
    let mut rules = Vec::new();
    for i in 0..=c {
        for j in 0..=c {
            let rhs = if i + j < c {
                (format!("q{}", i + j), "q0".to_string())
            } else {
                (format!("q{c}"), format!("q{c}"))
            };
            rules.push(((format!("q{i}"), format!("q{j}")), rhs));
        }
    }
    Ok(Protocol::new(
        name,
        input_syms,
        vec!["0".into(), "1".into()],
        states,
        input_map,
        output_map,
        rules,
    )
    .expect("generated protocol is well-formed"))
}

/// The four-state majority protocol: leaders carrying a data bit annihilate
/// in opposite-bit pairs; followers copy the surviving bit, with `-1`
/// dominating follower disagreements.
pub fn gen_majority() -> Protocol {
    let l = |j: i64| signed_name("l", j);
    let f = |j: i64| signed_name("f", j);
    let states = vec![l(1), l(-1), f(1), f(-1)];
    let mut rules = Vec::new();
    rules.push(((l(1), l(-1)), (f(-1), f(-1))));
    rules.push(((l(-1), l(1)), (f(-1), f(-1))));
    for i in [1i64, -1] {
        for j in [1i64, -1] {
            if i != j {
                rules.push(((l(i), f(j)), (l(i), f(i))));
                rules.push(((f(j), l(i)), (f(i), l(i))));
            }
        }
    }
    rules.push(((f(-1), f(1)), (f(-1), f(-1))));
    rules.push(((f(1), f(-1)), (f(-1), f(-1))));
    Protocol::new(
        "majority",
        vec!["a".into(), "b".into()],
        vec!["0".into(), "1".into()],
        states,
        vec![("a".into(), l(1)), ("b".into(), l(-1))],
        vec![
            (l(1), "1".into()),
            (l(-1), "0".into()),
            (f(1), "1".into()),
            (f(-1), "0".into()),
        ],
        rules,
    )
    .expect("generated protocol is well-formed")
}

/// The k-Symmetry-Majority protocol: inputs carry weight `+-k`; leader counts
/// merge on opposite signs and unfold one unit at a time onto followers, so
/// a strict majority ends with `k` same-bit leaders.
pub fn gen_k_majority(k: u32) -> Result<Protocol, BuiltinError> {
    if k < 1 {
        return Err(BuiltinError::InvalidK(k));
    }
    let k = k as i64;
    let l = |j: i64| signed_name("l", j);
    let f = |j: i64| signed_name("f", j);
    let mut states = Vec::new();
    for j in (-k..=k).rev() {
        states.push(l(j));
    }
    for j in (-k..=k).rev() {
        states.push(f(j));
    }
    let mut rules = Vec::new();
    // Leader-leader: merge opposite-signed counts.
    for i in -k..=k {
        for j in -k..=k {
            if i + j == 0 {
                rules.push(((l(i), l(j)), (f(0), f(0))));
            } else if i * j < 0 {
                let spawned = if i + j > 0 { f(1) } else { f(0) };
                rules.push(((l(i), l(j)), (l(i + j), spawned)));
            }
        }
    }
    for j in -k..=k {
        // Leader-follower: unfold counts of magnitude >= 2 ...
        for i in 2..=k {
            rules.push(((l(i), f(j)), (l(i - 1), l(1))));
            rules.push(((f(j), l(i)), (l(1), l(i - 1))));
            rules.push(((l(-i), f(j)), (l(-i + 1), l(-1))));
            rules.push(((f(j), l(-i)), (l(-1), l(-i + 1))));
        }
        // ... and copy bits of magnitude <= 1.
        for i in -1..=1 {
            if i != j {
                rules.push(((l(i), f(j)), (l(i), f(i))));
                rules.push(((f(j), l(i)), (f(i), l(i))));
            }
        }
    }
    rules.push(((f(0), f(1)), (f(0), f(0))));
    rules.push(((f(1), f(0)), (f(0), f(0))));
    let mut output_map = Vec::new();
    for role in ["l", "f"] {
        for j in (-k..=k).rev() {
            let y = if j > 0 { "1" } else { "0" };
            output_map.push((signed_name(role, j), y.to_string()));
        }
    }
    Ok(Protocol::new(
        format!("k_majority_{k}"),
        vec!["a".into(), "b".into()],
        vec!["0".into(), "1".into()],
        states,
        vec![("a".into(), l(k)), ("b".into(), l(-k))],
        output_map,
        rules,
    )
    .expect("generated protocol is well-formed"))
}

/// The standard four-state leader-merge parity protocol.
///
/// Leaders merge, xor-ing their bits and demoting one participant to a
/// follower; leaders overwrite follower bits; followers do not interact.
pub fn gen_parity_leader() -> Protocol {
    let ls = |i: usize| format!("L{i}");
    let fs = |i: usize| format!("F{i}");
    let mut rules = Vec::new();
    for i in 0..2usize {
        for j in 0..2usize {
            let s = (i + j) % 2;
            rules.push(((ls(i), ls(j)), (ls(s), fs(s))));
            if i != j {
                rules.push(((ls(i), fs(j)), (ls(i), fs(i))));
                rules.push(((fs(j), ls(i)), (fs(i), ls(i))));
            }
        }
    }
    Protocol::new(
        "parity_leader",
        vec!["1".into()],
        vec!["0".into(), "1".into()],
        vec![ls(0), ls(1), fs(0), fs(1)],
        vec![("1".into(), ls(1))],
        vec![
            (ls(0), "0".into()),
            (ls(1), "1".into()),
            (fs(0), "0".into()),
            (fs(1), "1".into()),
        ],
        rules,
    )
    .expect("generated protocol is well-formed")
}

/// A builtin protocol family instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Builtin {
    CountToX { x: u32 },
    PositiveLc { coeffs: Vec<u32>, threshold: u32 },
    Majority,
    KMajority { k: u32 },
    ParityLeader,
}

impl Builtin {
    /// Checks the family's parameter constraints.
    pub fn validate(&self) -> Result<(), BuiltinError> {
        match self {
            Builtin::CountToX { x } if *x < 1 => Err(BuiltinError::InvalidThresholdX(*x)),
            Builtin::PositiveLc { coeffs, .. } => {
                if coeffs.is_empty() {
                    return Err(BuiltinError::NoCoefficients);
                }
                if let Some(i) = coeffs.iter().position(|&a| a == 0) {
                    return Err(BuiltinError::ZeroCoefficient { index: i });
                }
                Ok(())
            }
            Builtin::KMajority { k } if *k < 1 => Err(BuiltinError::InvalidK(*k)),
            _ => Ok(()),
        }
    }

    /// Generates the protocol. Parameters must satisfy [`Self::validate`].
    pub fn protocol(&self) -> Protocol {
        match self {
            Builtin::CountToX { x } => gen_count_to_x(*x).expect("validated parameters"),
            Builtin::PositiveLc { coeffs, threshold } => {
                gen_positive_linear_combination(coeffs, *threshold).expect("validated parameters")
            }
            Builtin::Majority => gen_majority(),
            Builtin::KMajority { k } => gen_k_majority(*k).expect("validated parameters"),
            Builtin::ParityLeader => gen_parity_leader(),
        }
    }

    /// The alarm (all-ones-output, disseminating) state for threshold
    /// protocols; `None` for the others.
    pub fn alarm_state(&self) -> Option<String> {
        match self {
            Builtin::CountToX { x } => Some(format!("q{x}")),
            Builtin::PositiveLc { threshold, .. } => Some(format!("q{threshold}")),
            _ => None,
        }
    }

    /// The input symbol used when a sweep assigns every node the same input.
    pub fn default_sweep_input(&self) -> &'static str {
        match self {
            Builtin::CountToX { .. } | Builtin::ParityLeader => "1",
            Builtin::PositiveLc { .. } => "s1",
            Builtin::Majority | Builtin::KMajority { .. } => "a",
        }
    }

    /// Analytic truth value of the builtin's predicate on an initial
    /// configuration, as an output symbol.
    pub fn expected_output(&self, p: &Protocol, c0: &Configuration) -> String {
        let truth = match self {
            Builtin::CountToX { x } => weighted_sum(c0) >= u64::from(*x),
            Builtin::PositiveLc { threshold, .. } => weighted_sum(c0) >= u64::from(*threshold),
            Builtin::Majority => {
                let a = c0.count(p.state_id("l_1").unwrap());
                let b = c0.count(p.state_id("l_m1").unwrap());
                a > b
            }
            Builtin::KMajority { k } => {
                let a = c0.count(p.state_id(&signed_name("l", *k as i64)).unwrap());
                let b = c0.count(p.state_id(&signed_name("l", -(*k as i64))).unwrap());
                a > b
            }
            Builtin::ParityLeader => c0.population() % 2 == 1,
        };
        if truth { "1".into() } else { "0".into() }
    }

    /// Analytic output-stability of a configuration: `Some(output)` when
    /// every configuration reachable from `c` keeps all nodes on `output`.
    ///
    /// This is the stability cutoff used at experiment scale, where exact
    /// configuration-graph search is infeasible; it is cross-validated
    /// against the exact search at small populations in the test suite.
    pub fn is_stable(&self, p: &Protocol, c: &Configuration) -> Option<String> {
        match self {
            Builtin::CountToX { x } => threshold_stable(p, c, *x),
            Builtin::PositiveLc { threshold, .. } => threshold_stable(p, c, *threshold),
            Builtin::Majority => {
                let get = |s: &str| c.count(p.state_id(s).unwrap());
                let (lp, ln) = (get("l_1"), get("l_m1"));
                let (fp, fn_) = (get("f_1"), get("f_m1"));
                if lp > 0 && ln > 0 {
                    None
                } else if lp > 0 {
                    (fn_ == 0).then(|| "1".into())
                } else if ln > 0 {
                    (fp == 0).then(|| "0".into())
                } else if fp == 0 {
                    Some("0".into())
                } else if fn_ == 0 {
                    Some("1".into())
                } else {
                    None
                }
            }
            Builtin::KMajority { k } => {
                let k = *k as i64;
                let mut max_bit = i64::MIN;
                let mut min_bit = i64::MAX;
                for role in ["l", "f"] {
                    for j in -k..=k {
                        if c.count(p.state_id(&signed_name(role, j)).unwrap()) > 0 {
                            max_bit = max_bit.max(j);
                            min_bit = min_bit.min(j);
                        }
                    }
                }
                if max_bit <= 0 {
                    Some("0".into())
                } else if min_bit >= 1 {
                    Some("1".into())
                } else {
                    None
                }
            }
            Builtin::ParityLeader => {
                let get = |s: &str| c.count(p.state_id(s).unwrap());
                let leaders = [get("L0"), get("L1")];
                let followers = [get("F0"), get("F1")];
                match leaders[0] + leaders[1] {
                    0 => match (followers[0] > 0, followers[1] > 0) {
                        (true, false) => Some("0".into()),
                        (false, true) => Some("1".into()),
                        _ => None,
                    },
                    1 => {
                        let bit = usize::from(leaders[1] == 1);
                        (followers[1 - bit] == 0).then(|| if bit == 1 { "1".into() } else { "0".into() })
                    }
                    _ => None,
                }
            }
        }
    }
}

/// Weighted sum of a threshold-protocol configuration: `sum i * c[q_i]`.
///
/// Invariant under gathering rules; only the alarm rule changes it.
pub fn weighted_sum(c: &Configuration) -> u64 {
    c.counts()
        .iter()
        .enumerate()
        .map(|(i, &k)| i as u64 * u64::from(k))
        .sum()
}

fn threshold_stable(p: &Protocol, c: &Configuration, threshold: u32) -> Option<String> {
    let alarm = p.state_id(&format!("q{threshold}")).unwrap();
    let n_alarm = c.count(alarm);
    if n_alarm == c.population() {
        Some("1".into())
    } else if n_alarm == 0 && weighted_sum(c) < u64::from(threshold) {
        Some("0".into())
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{apply_step, ParallelStep};

    /// Independent enumeration of the count-to-x transition table; used as
    /// the oracle for the generator tests.
    fn count_to_x_oracle(x: usize) -> Vec<((usize, usize), (usize, usize))> {
        let mut effective = Vec::new();
        for i in 0..=x {
            for j in 0..=x {
                let rhs = if i + j < x { (i + j, 0) } else { (x, x) };
                if rhs != (i, j) {
                    effective.push(((i, j), rhs));
                }
            }
        }
        effective
    }

    #[test]
    fn count_to_5_matches_oracle() {
        let p = gen_count_to_x(5).unwrap();
        assert_eq!(p.num_states(), 6);
        let oracle = count_to_x_oracle(5);
        assert_eq!(p.num_effective_rules(), oracle.len());
        assert_eq!(oracle.len(), 30);
        for ((i, j), (a, b)) in oracle {
            let lhs = (
                p.state_id(&format!("q{i}")).unwrap(),
                p.state_id(&format!("q{j}")).unwrap(),
            );
            let rhs = (
                p.state_id(&format!("q{a}")).unwrap(),
                p.state_id(&format!("q{b}")).unwrap(),
            );
            assert_eq!(p.delta(lhs.0, lhs.1), rhs);
        }
    }

    #[test]
    fn count_to_1_alarm_boundary() {
        let p = gen_count_to_x(1).unwrap();
        let q0 = p.state_id("q0").unwrap();
        let q1 = p.state_id("q1").unwrap();
        // Every pair containing a q1 yields (q1, q1); the self-pair is the
        // (ineffective) alarm.
        assert_eq!(p.delta(q0, q1), (q1, q1));
        assert_eq!(p.delta(q1, q0), (q1, q1));
        assert_eq!(p.delta(q1, q1), (q1, q1));
        assert!(!p.is_effective(q1, q1));
        assert_eq!(p.num_effective_rules(), 2);
    }

    #[test]
    fn count_to_x_rejects_zero() {
        assert!(gen_count_to_x(0).is_err());
    }

    #[test]
    fn count_to_2_alarm_apply() {
        let p = gen_count_to_x(2).unwrap();
        let q1 = p.state_id("q1").unwrap();
        let c = p.configuration_from_states(&[("q1".into(), 2)]).unwrap();
        let next = apply_step(&p, &c, &ParallelStep::single(q1, q1)).unwrap();
        assert_eq!(p.named_counts(&next), [("q2".to_string(), 2)].into());
    }

    #[test]
    fn positive_lc_single_coefficient_equals_count_to_x() {
        for x in [1, 2, 5] {
            let a = gen_count_to_x(x).unwrap();
            let b = gen_positive_linear_combination(&[1], x).unwrap();
            assert_eq!(a.states(), b.states());
            let rules_a: Vec<_> = a.effective_rules().collect();
            let rules_b: Vec<_> = b.effective_rules().collect();
            assert_eq!(rules_a, rules_b);
        }
    }

    #[test]
    fn positive_lc_input_mapping() {
        let p = gen_positive_linear_combination(&[1, 2], 4).unwrap();
        assert_eq!(p.state_name(p.input_state("s1").unwrap()), "q1");
        assert_eq!(p.state_name(p.input_state("s2").unwrap()), "q2");
        // Coefficients above the threshold clamp to the alarm state.
        let p = gen_positive_linear_combination(&[7], 4).unwrap();
        assert_eq!(p.state_name(p.input_state("s1").unwrap()), "q4");
    }

    #[test]
    fn positive_lc_zero_threshold_constant_true() {
        let p = gen_positive_linear_combination(&[1, 2], 0).unwrap();
        assert_eq!(p.num_states(), 1);
        assert_eq!(p.num_effective_rules(), 0);
        let q0 = p.state_id("q0").unwrap();
        assert_eq!(p.output_symbol(q0), "1");
    }

    #[test]
    fn positive_lc_rejects_zero_coefficient() {
        assert!(gen_positive_linear_combination(&[1, 0], 3).is_err());
        assert!(gen_positive_linear_combination(&[], 3).is_err());
    }

    #[test]
    fn majority_rules() {
        let p = gen_majority();
        let id = |s: &str| p.state_id(s).unwrap();
        assert_eq!(
            p.delta(id("l_1"), id("l_m1")),
            (id("f_m1"), id("f_m1"))
        );
        assert_eq!(p.delta(id("f_1"), id("f_m1")), (id("f_m1"), id("f_m1")));
        // Same-sign leaders do not react.
        assert!(!p.is_effective(id("l_1"), id("l_1")));
        assert_eq!(p.num_effective_rules(), 8);
    }

    #[test]
    fn k_majority_rules() {
        let p = gen_k_majority(2).unwrap();
        let id = |s: &str| p.state_id(s).unwrap();
        assert_eq!(p.delta(id("l_2"), id("f_0")), (id("l_1"), id("l_1")));
        assert_eq!(p.delta(id("l_1"), id("l_m2")), (id("l_m1"), id("f_0")));
        assert_eq!(p.delta(id("l_2"), id("l_m2")), (id("f_0"), id("f_0")));
        assert_eq!(p.num_states(), 10);

        // k = 1 has no unfold rules: no leader magnitude ever exceeds 1.
        let p1 = gen_k_majority(1).unwrap();
        for ((a, b), _) in p1.effective_rules() {
            let rhs = p1.delta(a, b);
            for q in [rhs.0, rhs.1] {
                let name = p1.state_name(q);
                assert!(!name.contains('2'), "unexpected state {name}");
            }
        }
        assert!(gen_k_majority(0).is_err());
    }

    #[test]
    fn parity_rules() {
        let p = gen_parity_leader();
        let id = |s: &str| p.state_id(s).unwrap();
        assert_eq!(p.delta(id("L1"), id("L1")), (id("L0"), id("F0")));
        assert_eq!(p.delta(id("L1"), id("F0")), (id("L1"), id("F1")));
        assert!(!p.is_effective(id("F0"), id("F1")));
        assert_eq!(p.state_name(p.input_state("1").unwrap()), "L1");
    }

    #[test]
    fn expected_outputs() {
        let b = Builtin::CountToX { x: 5 };
        let p = b.protocol();
        let c = p.configuration_from_states(&[("q1".into(), 4)]).unwrap();
        assert_eq!(b.expected_output(&p, &c), "0");
        let c = p.configuration_from_states(&[("q1".into(), 5)]).unwrap();
        assert_eq!(b.expected_output(&p, &c), "1");

        let b = Builtin::ParityLeader;
        let p = b.protocol();
        let c = p.configuration_from_states(&[("L1".into(), 4)]).unwrap();
        assert_eq!(b.expected_output(&p, &c), "0");
        let c = p.configuration_from_states(&[("L1".into(), 5)]).unwrap();
        assert_eq!(b.expected_output(&p, &c), "1");
    }

    #[test]
    fn analytic_stability_threshold() {
        let b = Builtin::CountToX { x: 5 };
        let p = b.protocol();
        let stable0 = p.configuration_from_states(&[("q1".into(), 4)]).unwrap();
        assert_eq!(b.is_stable(&p, &stable0), Some("0".into()));
        let stable1 = p.configuration_from_states(&[("q5".into(), 3)]).unwrap();
        assert_eq!(b.is_stable(&p, &stable1), Some("1".into()));
        let mixed = p
            .configuration_from_states(&[("q5".into(), 3), ("q0".into(), 1)])
            .unwrap();
        assert_eq!(b.is_stable(&p, &mixed), None);
        let unstable = p.configuration_from_states(&[("q1".into(), 5)]).unwrap();
        assert_eq!(b.is_stable(&p, &unstable), None);
    }

    #[test]
    fn analytic_stability_majority_and_parity() {
        let b = Builtin::Majority;
        let p = b.protocol();
        let c = p
            .configuration_from_states(&[("l_1".into(), 2), ("f_1".into(), 4)])
            .unwrap();
        assert_eq!(b.is_stable(&p, &c), Some("1".into()));
        let c = p
            .configuration_from_states(&[("l_1".into(), 2), ("f_m1".into(), 4)])
            .unwrap();
        assert_eq!(b.is_stable(&p, &c), None);
        let c = p.configuration_from_states(&[("f_m1".into(), 4)]).unwrap();
        assert_eq!(b.is_stable(&p, &c), Some("0".into()));

        let b = Builtin::ParityLeader;
        let p = b.protocol();
        let c = p
            .configuration_from_states(&[("L1".into(), 1), ("F1".into(), 2)])
            .unwrap();
        assert_eq!(b.is_stable(&p, &c), Some("1".into()));
        let c = p
            .configuration_from_states(&[("L1".into(), 1), ("F0".into(), 2)])
            .unwrap();
        assert_eq!(b.is_stable(&p, &c), None);
        let c = p.configuration_from_states(&[("L1".into(), 1)]).unwrap();
        assert_eq!(b.is_stable(&p, &c), Some("1".into()));
    }
}
