//! Property tests over randomly generated protocols and configurations.

use proptest::prelude::*;

use popsym_core::dsl::{parse_protocol, serialize_protocol};
use popsym_core::model::{apply_step, Configuration, ExecutionTrace, Protocol};
use popsym_core::scheduler::{RandomScheduler, SchedulerKind};

fn state_name(i: usize) -> String {
    format!("s{i}")
}

/// Random small protocols: 2..=5 states, 1..=2 inputs, an arbitrary partial
/// rule table (absent entries stay implicitly ineffective).
fn arb_protocol() -> impl Strategy<Value = Protocol> {
    (2usize..=5).prop_flat_map(|k| {
        let rules = proptest::collection::vec(proptest::option::of((0..k, 0..k)), k * k);
        let outputs = proptest::collection::vec(0usize..2, k);
        (Just(k), rules, outputs, 1usize..=2).prop_map(|(k, rules, outs, n_inputs)| {
            let states: Vec<String> = (0..k).map(state_name).collect();
            let input_syms: Vec<String> = (0..n_inputs).map(|i| format!("i{i}")).collect();
            let input_map: Vec<(String, String)> = (0..n_inputs)
                .map(|i| (format!("i{i}"), state_name(i % k)))
                .collect();
            let output_map: Vec<(String, String)> = (0..k)
                .map(|i| (state_name(i), outs[i].to_string()))
                .collect();
            let mut rule_list = Vec::new();
            for a in 0..k {
                for b in 0..k {
                    if let Some((c, d)) = rules[a * k + b] {
                        rule_list.push(((state_name(a), state_name(b)), (state_name(c), state_name(d))));
                    }
                }
            }
            Protocol::new(
                "rand",
                input_syms,
                vec!["0".into(), "1".into()],
                states,
                input_map,
                output_map,
                rule_list,
            )
            .expect("generated parts are well-formed")
        })
    })
}

fn arb_counts(k: usize) -> impl Strategy<Value = Vec<u32>> {
    proptest::collection::vec(0u32..6, k)
        .prop_filter("population >= 2", |v| v.iter().sum::<u32>() >= 2)
}

proptest! {
    #[test]
    fn serializer_parser_round_trip(p in arb_protocol()) {
        let text = serialize_protocol(&p);
        let q = parse_protocol(&text).unwrap();
        prop_assert_eq!(p.states(), q.states());
        prop_assert_eq!(p.inputs(), q.inputs());
        for sym in p.inputs() {
            prop_assert_eq!(
                p.state_name(p.input_state(sym).unwrap()),
                q.state_name(q.input_state(sym).unwrap())
            );
        }
        for i in 0..p.num_states() {
            let id = popsym_core::StateId(i);
            prop_assert_eq!(p.output_symbol(id), q.output_symbol(id));
        }
        let rp: Vec<_> = p.effective_rules().collect();
        let rq: Vec<_> = q.effective_rules().collect();
        prop_assert_eq!(rp, rq);
    }

    #[test]
    fn matching_steps_conserve_population(
        (p, counts, seed) in arb_protocol().prop_flat_map(|p| {
            let k = p.num_states();
            (Just(p), arb_counts(k), any::<u64>())
        })
    ) {
        let c0 = Configuration::new(counts).unwrap();
        let n = c0.population();
        let scheduler = RandomScheduler::new(SchedulerKind::RandomMaximumMatching, seed);
        let mut c = c0.clone();
        let mut steps = Vec::new();
        for i in 0..5u64 {
            let step = scheduler.step(&c, i).unwrap();
            // A maximum matching pairs floor(n/2) disjoint node pairs.
            prop_assert_eq!(step.num_applications(), n / 2);
            let demand = step.demand(p.num_states());
            for (need, have) in demand.iter().zip(c.counts()) {
                prop_assert!(need <= have);
            }
            c = apply_step(&p, &c, &step).unwrap();
            prop_assert_eq!(c.population(), n);
            steps.push(step);
        }
        // Trace identities: min symmetry within [1, s(c0)] and breaking is
        // exactly the drop from the initial symmetry.
        let trace = ExecutionTrace::replay(&p, c0.clone(), steps).unwrap();
        let min = trace.min_symmetry();
        prop_assert!(min >= 1 && min <= c0.symmetry());
        prop_assert_eq!(trace.symmetry_breaking(), c0.symmetry() - min);
    }

    #[test]
    fn sequential_steps_are_single_applications(
        (p, counts, seed) in arb_protocol().prop_flat_map(|p| {
            let k = p.num_states();
            (Just(p), arb_counts(k), any::<u64>())
        })
    ) {
        let c = Configuration::new(counts).unwrap();
        let scheduler = RandomScheduler::new(SchedulerKind::SequentialRandom, seed);
        for i in 0..5u64 {
            let step = scheduler.step(&c, i).unwrap();
            prop_assert_eq!(step.num_applications(), 1);
            let next = apply_step(&p, &c, &step).unwrap();
            prop_assert_eq!(next.population(), c.population());
        }
    }
}
