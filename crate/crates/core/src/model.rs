//! Protocol and configuration data model, parallel-step semantics, and the
//! per-configuration symmetry metric.
//!
//! Configurations use counting semantics (one count per state) rather than
//! per-node identities: on a complete graph with anonymous nodes, a set of
//! pairwise interactions is realizable as a node-disjoint matching exactly
//! when, for every state, the number of participations demanded does not
//! exceed the state's count.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Index of a state in a [`Protocol`]'s state table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

impl StateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("configuration is empty (population size must be at least 1)")]
    EmptyConfiguration,
    #[error("configuration has {got} state slots, protocol has {expected} states")]
    StateCountMismatch { expected: usize, got: usize },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown input symbol `{0}`")]
    UnknownInput(String),
    #[error("unknown output symbol `{0}`")]
    UnknownOutput(String),
    #[error("duplicate state name `{0}`")]
    DuplicateState(String),
    #[error("duplicate input symbol `{0}`")]
    DuplicateInput(String),
    #[error("duplicate output symbol `{0}`")]
    DuplicateOutput(String),
    #[error("duplicate rule for left-hand side ({0}, {1})")]
    DuplicateRule(String, String),
    #[error("input symbol `{0}` has no state mapping")]
    MissingInputMapping(String),
    #[error("state `{0}` has no output mapping")]
    MissingOutputMapping(String),
    #[error("parallel step contains no applications")]
    EmptyStep,
    #[error("step demands {need} node(s) in state `{state}` but only {have} present")]
    InsufficientCount { state: String, need: u32, have: u32 },
}

/// A finite population protocol `(X, Y, Q, I, O, delta)`.
///
/// Only effective transitions are stored; every pair absent from the rule
/// table is implicitly ineffective, `(a, b) -> (a, b)`.
#[derive(Debug, Clone)]
pub struct Protocol {
    name: String,
    inputs: Vec<String>,
    outputs: Vec<String>,
    states: Vec<String>,
    input_map: Vec<StateId>,
    output_map: Vec<usize>,
    rules: BTreeMap<(StateId, StateId), (StateId, StateId)>,
}

impl Protocol {
    /// Builds and validates a protocol from name-based parts.
    ///
    /// `rules` may list ineffective entries; they are dropped. Duplicate rule
    /// left-hand sides are rejected even when one of them is ineffective.
    pub fn new(
        name: impl Into<String>,
        inputs: Vec<String>,
        outputs: Vec<String>,
        states: Vec<String>,
        input_map: Vec<(String, String)>,
        output_map: Vec<(String, String)>,
        rules: Vec<((String, String), (String, String))>,
    ) -> Result<Self, ModelError> {
        let mut state_idx = BTreeMap::new();
        for (i, s) in states.iter().enumerate() {
            if state_idx.insert(s.clone(), StateId(i)).is_some() {
                return Err(ModelError::DuplicateState(s.clone()));
            }
        }
        let mut output_idx = BTreeMap::new();
        for (i, y) in outputs.iter().enumerate() {
            if output_idx.insert(y.clone(), i).is_some() {
                return Err(ModelError::DuplicateOutput(y.clone()));
            }
        }
        let lookup_state = |s: &String| {
            state_idx
                .get(s)
                .copied()
                .ok_or_else(|| ModelError::UnknownState(s.clone()))
        };

        let mut seen_inputs = BTreeMap::new();
        for (sym, _) in &input_map {
            if seen_inputs.insert(sym.clone(), ()).is_some() {
                return Err(ModelError::DuplicateInput(sym.clone()));
            }
        }
        let mut imap = Vec::with_capacity(inputs.len());
        for sym in &inputs {
            let target = input_map
                .iter()
                .find(|(s, _)| s == sym)
                .ok_or_else(|| ModelError::MissingInputMapping(sym.clone()))?;
            imap.push(lookup_state(&target.1)?);
        }
        for (sym, _) in &input_map {
            if !inputs.contains(sym) {
                return Err(ModelError::UnknownInput(sym.clone()));
            }
        }

        let mut omap = vec![usize::MAX; states.len()];
        for (state, y) in &output_map {
            let sid = lookup_state(state)?;
            let yid = *output_idx
                .get(y)
                .ok_or_else(|| ModelError::UnknownOutput(y.clone()))?;
            omap[sid.index()] = yid;
        }
        for (i, &y) in omap.iter().enumerate() {
            if y == usize::MAX {
                return Err(ModelError::MissingOutputMapping(states[i].clone()));
            }
        }

        let mut table = BTreeMap::new();
        for ((a, b), (a2, b2)) in &rules {
            let lhs = (lookup_state(a)?, lookup_state(b)?);
            let rhs = (lookup_state(a2)?, lookup_state(b2)?);
            if table.insert(lhs, rhs).is_some() {
                return Err(ModelError::DuplicateRule(a.clone(), b.clone()));
            }
        }
        // Drop stored ineffective entries; they are the implicit default.
        table.retain(|lhs, rhs| lhs != rhs);

        Ok(Protocol {
            name: name.into(),
            inputs,
            outputs,
            states,
            input_map: imap,
            output_map: omap,
            rules: table,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Input alphabet X, in declaration order.
    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    /// Output alphabet Y, in declaration order.
    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    /// State names Q, in declaration order.
    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, id: StateId) -> &str {
        &self.states[id.index()]
    }

    pub fn state_id(&self, name: &str) -> Result<StateId, ModelError> {
        self.states
            .iter()
            .position(|s| s == name)
            .map(StateId)
            .ok_or_else(|| ModelError::UnknownState(name.to_string()))
    }

    /// The input function I as state ids, indexed like [`Self::inputs`].
    pub fn input_state(&self, symbol: &str) -> Result<StateId, ModelError> {
        self.inputs
            .iter()
            .position(|s| s == symbol)
            .map(|i| self.input_map[i])
            .ok_or_else(|| ModelError::UnknownInput(symbol.to_string()))
    }

    /// The set of initial states Q0 (image of I), in first-appearance order.
    pub fn initial_states(&self) -> Vec<StateId> {
        let mut seen = Vec::new();
        for &q in &self.input_map {
            if !seen.contains(&q) {
                seen.push(q);
            }
        }
        seen
    }

    /// Output symbol index assigned to a state.
    pub fn output_of(&self, q: StateId) -> usize {
        self.output_map[q.index()]
    }

    pub fn output_symbol(&self, q: StateId) -> &str {
        &self.outputs[self.output_map[q.index()]]
    }

    /// The transition function, total on ordered pairs.
    pub fn delta(&self, a: StateId, b: StateId) -> (StateId, StateId) {
        self.rules.get(&(a, b)).copied().unwrap_or((a, b))
    }

    /// True iff `(a, b)` changes at least one participant.
    pub fn is_effective(&self, a: StateId, b: StateId) -> bool {
        self.rules.contains_key(&(a, b))
    }

    /// All effective ordered rules `(lhs, rhs)` in deterministic order.
    pub fn effective_rules(&self) -> impl Iterator<Item = ((StateId, StateId), (StateId, StateId))> + '_ {
        self.rules.iter().map(|(&l, &r)| (l, r))
    }

    pub fn num_effective_rules(&self) -> usize {
        self.rules.len()
    }

    /// Builds the configuration induced by per-input-symbol counts.
    pub fn configuration_from_inputs(
        &self,
        counts: &[(String, u32)],
    ) -> Result<Configuration, ModelError> {
        let mut c = vec![0u32; self.num_states()];
        for (sym, k) in counts {
            let q = self.input_state(sym)?;
            c[q.index()] += k;
        }
        Configuration::new(c)
    }

    /// Builds a configuration from per-state counts given by name.
    pub fn configuration_from_states(
        &self,
        counts: &[(String, u32)],
    ) -> Result<Configuration, ModelError> {
        let mut c = vec![0u32; self.num_states()];
        for (name, k) in counts {
            let q = self.state_id(name)?;
            c[q.index()] += k;
        }
        Configuration::new(c)
    }

    /// Renders a configuration as a name -> count map (present states only).
    pub fn named_counts(&self, c: &Configuration) -> BTreeMap<String, u32> {
        self.states
            .iter()
            .zip(c.counts())
            .filter(|(_, &k)| k > 0)
            .map(|(s, &k)| (s.clone(), k))
            .collect()
    }
}

/// A population snapshot: count per state, summing to the population size.
///
/// The population is never empty; constructors reject all-zero counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    counts: Vec<u32>,
}

impl Configuration {
    pub fn new(counts: Vec<u32>) -> Result<Self, ModelError> {
        if counts.iter().all(|&k| k == 0) {
            return Err(ModelError::EmptyConfiguration);
        }
        Ok(Configuration { counts })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    #[inline]
    pub fn count(&self, q: StateId) -> u32 {
        self.counts[q.index()]
    }

    /// Population size n.
    pub fn population(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// The symmetry s(c): minimum multiplicity of a state present in `c`.
    pub fn symmetry(&self) -> u32 {
        self.counts
            .iter()
            .copied()
            .filter(|&k| k > 0)
            .min()
            .expect("configuration is never empty")
    }

    /// States present in `c`.
    pub fn present(&self) -> impl Iterator<Item = StateId> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, _)| StateId(i))
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// One parallel step: a multiset of simultaneous ordered rule applications,
/// one matching's worth of interactions.
///
/// Stored as `((initiator, responder), multiplicity)` entries sorted by pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParallelStep {
    applications: Vec<((StateId, StateId), u32)>,
}

impl ParallelStep {
    /// Builds a step from `(pair, multiplicity)` entries; merges duplicates,
    /// drops zero multiplicities, and rejects an empty result.
    pub fn new(entries: Vec<((StateId, StateId), u32)>) -> Result<Self, ModelError> {
        let mut merged: BTreeMap<(StateId, StateId), u32> = BTreeMap::new();
        for (pair, m) in entries {
            if m > 0 {
                *merged.entry(pair).or_insert(0) += m;
            }
        }
        if merged.is_empty() {
            return Err(ModelError::EmptyStep);
        }
        Ok(ParallelStep {
            applications: merged.into_iter().collect(),
        })
    }

    /// A step consisting of a single application of `(a, b)`.
    pub fn single(a: StateId, b: StateId) -> Self {
        ParallelStep {
            applications: vec![((a, b), 1)],
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (StateId, StateId)>) -> Result<Self, ModelError> {
        Self::new(pairs.into_iter().map(|p| (p, 1)).collect())
    }

    pub fn applications(&self) -> &[((StateId, StateId), u32)] {
        &self.applications
    }

    /// Total number of pairwise interactions in this step.
    pub fn num_applications(&self) -> u32 {
        self.applications.iter().map(|(_, m)| m).sum()
    }

    /// Number of participations demanded from each state.
    pub fn demand(&self, num_states: usize) -> Vec<u32> {
        let mut d = vec![0u32; num_states];
        for &((a, b), m) in &self.applications {
            d[a.index()] += m;
            d[b.index()] += m;
        }
        d
    }
}

/// Applies a parallel step to `c`.
///
/// All applications consume their reactants against the pre-step
/// configuration simultaneously; the demand on every state must not exceed
/// its count (this is exactly realizability as a node-disjoint matching).
/// Population size is preserved.
pub fn apply_step(
    p: &Protocol,
    c: &Configuration,
    step: &ParallelStep,
) -> Result<Configuration, ModelError> {
    if c.counts().len() != p.num_states() {
        return Err(ModelError::StateCountMismatch {
            expected: p.num_states(),
            got: c.counts().len(),
        });
    }
    let demand = step.demand(p.num_states());
    for (i, (&need, &have)) in demand.iter().zip(c.counts()).enumerate() {
        if need > have {
            return Err(ModelError::InsufficientCount {
                state: p.states()[i].clone(),
                need,
                have,
            });
        }
    }
    let mut next = c.counts().to_vec();
    for &((a, b), m) in step.applications() {
        let (a2, b2) = p.delta(a, b);
        next[a.index()] -= m;
        next[b.index()] -= m;
        next[a2.index()] += m;
        next[b2.index()] += m;
    }
    Configuration::new(next)
}

/// All ordered pairs `(a, b)` with an effective rule that `c` can fire once:
/// `c[a] >= 1`, `c[b] >= 1`, and `c[a] >= 2` when `a == b`.
pub fn enabled_effective_pairs(p: &Protocol, c: &Configuration) -> Vec<(StateId, StateId)> {
    p.effective_rules()
        .map(|(lhs, _)| lhs)
        .filter(|&(a, b)| {
            if a == b {
                c.count(a) >= 2
            } else {
                c.count(a) >= 1 && c.count(b) >= 1
            }
        })
        .collect()
}

/// Counts per output symbol, via the protocol's output function.
pub fn output_of_config(p: &Protocol, c: &Configuration) -> BTreeMap<String, u32> {
    let mut out = BTreeMap::new();
    for q in c.present() {
        *out.entry(p.output_symbol(q).to_string()).or_insert(0) += c.count(q);
    }
    out
}

/// True iff all present states map to one output symbol; returns it.
pub fn uniform_output<'p>(p: &'p Protocol, c: &Configuration) -> Option<&'p str> {
    let mut it = c.present();
    let first = p.output_of(it.next().expect("non-empty"));
    for q in it {
        if p.output_of(q) != first {
            return None;
        }
    }
    Some(&p.outputs()[first])
}

/// An initial configuration plus a sequence of parallel steps, with every
/// intermediate configuration materialized.
#[derive(Debug, Clone)]
pub struct ExecutionTrace {
    initial: Configuration,
    steps: Vec<ParallelStep>,
    configs: Vec<Configuration>,
}

impl ExecutionTrace {
    /// Replays `steps` from `c0`, validating every step.
    pub fn replay(
        p: &Protocol,
        c0: Configuration,
        steps: Vec<ParallelStep>,
    ) -> Result<Self, ModelError> {
        let mut configs = Vec::with_capacity(steps.len() + 1);
        configs.push(c0.clone());
        for step in &steps {
            let next = apply_step(p, configs.last().unwrap(), step)?;
            configs.push(next);
        }
        Ok(ExecutionTrace {
            initial: c0,
            steps,
            configs,
        })
    }

    pub fn initial(&self) -> &Configuration {
        &self.initial
    }

    pub fn steps(&self) -> &[ParallelStep] {
        &self.steps
    }

    /// Every configuration of the trace, the initial one included.
    pub fn configurations(&self) -> &[Configuration] {
        &self.configs
    }

    pub fn final_config(&self) -> &Configuration {
        self.configs.last().unwrap()
    }

    /// Minimum of s(c) over all configurations of the trace.
    pub fn min_symmetry(&self) -> u32 {
        self.configs.iter().map(|c| c.symmetry()).min().unwrap()
    }

    /// Drop from the initial symmetry: s(c0) - min symmetry.
    pub fn symmetry_breaking(&self) -> u32 {
        self.initial.symmetry() - self.min_symmetry()
    }
}

/// A step rendered with state names, for reports.
#[derive(Debug, Clone, Serialize)]
pub struct NamedApplication {
    pub initiator: String,
    pub responder: String,
    pub count: u32,
}

pub fn named_step(p: &Protocol, step: &ParallelStep) -> Vec<NamedApplication> {
    step.applications()
        .iter()
        .map(|&((a, b), m)| NamedApplication {
            initiator: p.state_name(a).to_string(),
            responder: p.state_name(b).to_string(),
            count: m,
        })
        .collect()
}
