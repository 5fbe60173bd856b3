//! Step generators: seeded random schedulers (fair with probability 1) and
//! deterministic scripted schedules that realize the symmetry-maximizing
//! executions for the builtin protocols.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::builtins::Builtin;
use crate::model::{
    apply_step, named_step, Configuration, ModelError, NamedApplication, ParallelStep, Protocol,
    StateId,
};

#[derive(Debug, Error)]
pub enum SchedulerError {
    #[error("population of size {0} has no interacting pair")]
    PopulationTooSmall(u32),
    #[error("initial configuration contains unsupported state `{0}` for this schedule")]
    UnsupportedState(String),
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The scheduler families selectable for a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulerKind {
    /// One uniformly random ordered node pair per step.
    SequentialRandom,
    /// A maximum-cardinality matching, uniform over all maximum matchings of
    /// the complete interaction graph.
    RandomMaximumMatching,
    /// A maximal matching. On complete graphs every maximal matching is
    /// maximum, so this coincides with [`Self::RandomMaximumMatching`]; the
    /// kind is kept as a named option for non-complete-graph extensions.
    RandomMaximalMatching,
}

impl SchedulerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchedulerKind::SequentialRandom => "seq",
            SchedulerKind::RandomMaximumMatching => "maxmatch",
            SchedulerKind::RandomMaximalMatching => "maximal",
        }
    }
}

/// A seeded random scheduler.
///
/// Each emitted step is a pure function of `(configuration, seed, step
/// index)`: the generator is re-derived per step from the seed and the step
/// index, so runs replay exactly and steps can be recomputed independently.
#[derive(Debug, Clone)]
pub struct RandomScheduler {
    kind: SchedulerKind,
    seed: u64,
}

impl RandomScheduler {
    pub fn new(kind: SchedulerKind, seed: u64) -> Self {
        RandomScheduler { kind, seed }
    }

    pub fn kind(&self) -> SchedulerKind {
        self.kind
    }

    pub fn step(
        &self,
        c: &Configuration,
        step_index: u64,
    ) -> Result<ParallelStep, SchedulerError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(step_index);
        match self.kind {
            SchedulerKind::SequentialRandom => next_step_sequential(c, &mut rng),
            SchedulerKind::RandomMaximumMatching | SchedulerKind::RandomMaximalMatching => {
                next_step_random_maximum_matching(c, &mut rng)
            }
        }
    }
}

/// Maps a node slot index to its state under the configuration's canonical
/// ordering (all nodes of state 0 first, then state 1, ...).
fn slot_state(c: &Configuration, slot: u32) -> StateId {
    let mut acc = 0;
    for (i, &k) in c.counts().iter().enumerate() {
        acc += k;
        if slot < acc {
            return StateId(i);
        }
    }
    unreachable!("slot within population")
}

/// One ordered node pair, uniform over all n(n-1) ordered pairs; the induced
/// state pair (a, b) has probability proportional to c[a]*c[b] for a != b and
/// c[a]*(c[a]-1) for a == b.
pub fn next_step_sequential(
    c: &Configuration,
    rng: &mut impl Rng,
) -> Result<ParallelStep, SchedulerError> {
    let n = c.population();
    if n < 2 {
        return Err(SchedulerError::PopulationTooSmall(n));
    }
    let u = rng.random_range(0..n);
    let mut v = rng.random_range(0..n - 1);
    if v >= u {
        v += 1;
    }
    Ok(ParallelStep::single(slot_state(c, u), slot_state(c, v)))
}

/// A maximum matching sampled uniformly: the n anonymous node slots are
/// uniformly permuted and consecutive slots paired, dropping the leftover
/// slot when n is odd. Pair orientation is uniform.
pub fn next_step_random_maximum_matching(
    c: &Configuration,
    rng: &mut impl Rng,
) -> Result<ParallelStep, SchedulerError> {
    let n = c.population();
    if n < 2 {
        return Err(SchedulerError::PopulationTooSmall(n));
    }
    let mut slots: Vec<StateId> = Vec::with_capacity(n as usize);
    for (i, &k) in c.counts().iter().enumerate() {
        slots.extend(std::iter::repeat_n(StateId(i), k as usize));
    }
    slots.shuffle(rng);
    let pairs = (0..n as usize / 2).map(|i| (slots[2 * i], slots[2 * i + 1]));
    Ok(ParallelStep::from_pairs(pairs).expect("n >= 2 yields at least one pair"))
}

/// A maximal matching. Identical to the maximum-matching sampler on complete
/// interaction graphs.
pub fn next_step_random_maximal_matching(
    c: &Configuration,
    rng: &mut impl Rng,
) -> Result<ParallelStep, SchedulerError> {
    next_step_random_maximum_matching(c, rng)
}

/// A precomputed scripted execution from an initial configuration to an
/// output-stable configuration, with the symmetry it achieves.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub script: String,
    /// Which case of the script was taken (for reports and tests).
    pub variant: String,
    /// Set when the grouped construction degenerates to a fallback that is
    /// valid but carries no symmetry guarantee.
    pub degenerate: bool,
    pub initial: Configuration,
    pub steps: Vec<ParallelStep>,
    pub final_config: Configuration,
    pub achieved_min_symmetry: u32,
}

/// Builds a schedule step by step, replaying each step as it is added so
/// every emitted step is validated and the minimum symmetry is exact.
struct ScheduleBuilder<'p> {
    p: &'p Protocol,
    initial: Configuration,
    current: Configuration,
    steps: Vec<ParallelStep>,
    min_symmetry: u32,
}

impl<'p> ScheduleBuilder<'p> {
    fn new(p: &'p Protocol, c0: Configuration) -> Self {
        let min = c0.symmetry();
        ScheduleBuilder {
            p,
            current: c0.clone(),
            initial: c0,
            steps: Vec::new(),
            min_symmetry: min,
        }
    }

    fn count(&self, q: StateId) -> u32 {
        self.current.count(q)
    }

    fn push(&mut self, entries: Vec<((StateId, StateId), u32)>) -> Result<(), SchedulerError> {
        let step = ParallelStep::new(entries)?;
        self.current = apply_step(self.p, &self.current, &step)?;
        self.min_symmetry = self.min_symmetry.min(self.current.symmetry());
        self.steps.push(step);
        Ok(())
    }

    /// Converts all `target` nodes to `alarm` the way the dissemination
    /// phases do: one infection per step until the alarm count catches up,
    /// then a single step that wipes out the remainder.
    fn disseminate(&mut self, alarm: StateId, target: StateId) -> Result<(), SchedulerError> {
        loop {
            let nt = self.count(target);
            if nt == 0 {
                return Ok(());
            }
            let na = self.count(alarm);
            if na >= nt {
                return self.push(vec![((alarm, target), nt)]);
            }
            self.push(vec![((alarm, target), 1)])?;
        }
    }

    fn finish(self, script: &str, variant: &str, degenerate: bool) -> Schedule {
        Schedule {
            script: script.into(),
            variant: variant.into(),
            degenerate,
            initial: self.initial,
            final_config: self.current,
            steps: self.steps,
            achieved_min_symmetry: self.min_symmetry,
        }
    }
}

fn require_support(
    p: &Protocol,
    c0: &Configuration,
    allowed: &[StateId],
) -> Result<(), SchedulerError> {
    for q in c0.present() {
        if !allowed.contains(&q) {
            return Err(SchedulerError::UnsupportedState(
                p.state_name(q).to_string(),
            ));
        }
    }
    Ok(())
}

fn div_ceil_u32(a: u32, b: u32) -> u32 {
    a.div_ceil(b)
}

/// The Count-to-x symmetry-maximizing schedule.
///
/// For a true instance the q1s are split into `G = floor(N1/x)` groups that
/// gather in lockstep (so every transient state has multiplicity G), `y`
/// (q1, q_{x-1}) pairs fire the alarm in one step, and the remaining q1s,
/// q_{x-1}s and q0s are disseminated over. The ignition size follows the
/// one-third split: `y` is chosen near `G/3` to maximize
/// `min(G - y, 2y)`, which keeps the minimum over the whole execution at or
/// above `(2/3) * floor(N1/x) - (x-1)/3`. A false instance is already
/// output-stable, so its schedule is empty.
pub fn script_count_to_x(
    p: &Protocol,
    x: u32,
    c0: &Configuration,
) -> Result<Schedule, SchedulerError> {
    const SCRIPT: &str = "count_to_x";
    let q = |i: u32| p.state_id(&format!("q{i}")).map_err(SchedulerError::Model);
    let q0 = q(0)?;
    let q1 = q(1)?;
    let alarm = q(x)?;
    require_support(p, c0, &[q0, q1])?;

    let n1 = c0.count(q1);
    if n1 < x {
        // The alarm state is unreachable; every reachable configuration keeps
        // all outputs at 0.
        let b = ScheduleBuilder::new(p, c0.clone());
        return Ok(b.finish(SCRIPT, "predicate_false", false));
    }
    if x == 1 {
        // Initial q1s are already alarms; cascade over the q0s.
        let mut b = ScheduleBuilder::new(p, c0.clone());
        b.disseminate(alarm, q0)?;
        return Ok(b.finish(SCRIPT, "alarm_cascade", false));
    }

    let groups = n1 / x;
    // One ignition consumes one q1 and one q_{x-1} for x >= 3, two q1s for
    // x = 2; the one-third split maximizes the post-ignition minimum.
    let split = if x == 2 { n1 / 4 } else { groups / 3 };
    let mut candidates = vec![split.clamp(1, groups)];
    if split < groups {
        candidates.push((split + 1).max(1));
    }
    candidates.dedup();

    let mut best: Option<Schedule> = None;
    for y in candidates {
        let mut b = ScheduleBuilder::new(p, c0.clone());
        if x >= 3 {
            // Lockstep gathering: each group's accumulator absorbs one q1
            // per round, moving through q1, q2, ..., q_{x-1}.
            for k in 1..=(x - 2) {
                b.push(vec![((q(k)?, q1), groups)])?;
            }
            b.push(vec![((q1, q(x - 1)?), y)])?;
        } else {
            b.push(vec![((q1, q1), y)])?;
        }
        b.disseminate(alarm, q1)?;
        if x >= 3 {
            b.disseminate(alarm, q(x - 1)?)?;
        }
        b.disseminate(alarm, q0)?;
        let s = b.finish(SCRIPT, "grouped", false);
        if best
            .as_ref()
            .is_none_or(|cur| s.achieved_min_symmetry > cur.achieved_min_symmetry)
        {
            best = Some(s);
        }
    }
    Ok(best.expect("at least one ignition candidate"))
}

/// The Positive-Linear-Combination two-phase schedule: lockstep group
/// gathering until the alarm state first appears, then per-state
/// dissemination in ascending state order.
///
/// Groups contain `x = ceil(c / sum_S)` copies of each distinct initial state
/// present (`sum_S` the sum of their values), and `y = ceil((N_min +
/// r_min)/(x+1)) - 1` groups are kept. When the construction yields no
/// group (`y = 0`), a single sequential gathering is used instead and the
/// schedule is flagged degenerate.
pub fn script_positive_lc(
    p: &Protocol,
    threshold: u32,
    c0: &Configuration,
) -> Result<Schedule, SchedulerError> {
    const SCRIPT: &str = "positive_lc";
    let q = |i: u32| p.state_id(&format!("q{i}")).map_err(SchedulerError::Model);
    let alarm = q(threshold)?;
    let initial = p.initial_states();
    require_support(p, c0, &initial)?;

    let mut b = ScheduleBuilder::new(p, c0.clone());
    let sum: u64 = crate::builtins::weighted_sum(c0);
    if c0.count(alarm) == 0 && sum < u64::from(threshold) {
        return Ok(b.finish(SCRIPT, "predicate_false", false));
    }
    if c0.count(alarm) == c0.population() {
        return Ok(b.finish(SCRIPT, "already_stable", false));
    }

    let disseminate_rest = |b: &mut ScheduleBuilder| -> Result<(), SchedulerError> {
        for i in 0..threshold {
            let qi = p.state_id(&format!("q{i}")).unwrap();
            if b.count(qi) > 0 {
                b.disseminate(alarm, qi)?;
            }
        }
        Ok(())
    };

    if c0.count(alarm) > 0 {
        disseminate_rest(&mut b)?;
        return Ok(b.finish(SCRIPT, "initial_alarm", false));
    }

    // Distinct initial states present, ascending by value.
    let present: Vec<u32> = (1..=threshold)
        .filter(|&v| c0.count(p.state_id(&format!("q{v}")).unwrap()) > 0)
        .collect();
    let sum_present: u32 = present.iter().sum();
    let x = div_ceil_u32(threshold, sum_present);
    let n_min = present
        .iter()
        .map(|&v| c0.count(p.state_id(&format!("q{v}")).unwrap()))
        .min()
        .unwrap();
    let groups_total = n_min / x;
    let r_min = n_min % x;
    let y = (div_ceil_u32(n_min + r_min, x + 1)).saturating_sub(1);

    if y == 0 || groups_total == 0 {
        // Single sequential gathering: one accumulator absorbs nodes in
        // ascending state order until the alarm fires.
        let mut acc_val = present[0];
        let mut left: Vec<(u32, u32)> = present
            .iter()
            .map(|&v| (v, c0.count(p.state_id(&format!("q{v}")).unwrap())))
            .collect();
        left[0].1 -= 1;
        'outer: for &mut (v, ref mut cnt) in left.iter_mut() {
            while *cnt > 0 {
                b.push(vec![((q(acc_val)?, q(v)?), 1)])?;
                *cnt -= 1;
                if acc_val + v >= threshold {
                    break 'outer;
                }
                acc_val += v;
            }
        }
        disseminate_rest(&mut b)?;
        return Ok(b.finish(SCRIPT, "degenerate_single_group", true));
    }

    // Lockstep gathering over y identical groups of x copies of each present
    // state; the accumulator absorbs the rest of its group in ascending
    // order. The group sum is at least the threshold, so the alarm fires
    // before the group is exhausted.
    let mut member_seq: Vec<u32> = Vec::new();
    for &v in &present {
        member_seq.extend(std::iter::repeat_n(v, x as usize));
    }
    let mut acc_val = member_seq[0];
    let mut fired = false;
    for &v in &member_seq[1..] {
        b.push(vec![((q(acc_val)?, q(v)?), y)])?;
        if acc_val + v >= threshold {
            fired = true;
            break;
        }
        acc_val += v;
    }
    debug_assert!(fired, "group sum reaches the threshold");
    disseminate_rest(&mut b)?;
    Ok(b.finish(SCRIPT, "grouped", false))
}

/// The majority schedule: all opposite-bit leader pairs annihilate in the
/// first step; the surviving leaders then convert the followers, sequentially
/// when the winning gap is below the initial minimum so that no follower
/// count drops under the gap.
pub fn script_majority(p: &Protocol, c0: &Configuration) -> Result<Schedule, SchedulerError> {
    const SCRIPT: &str = "majority";
    let id = |s: &str| p.state_id(s).map_err(SchedulerError::Model);
    let lp = id("l_1")?;
    let ln = id("l_m1")?;
    let fn_ = id("f_m1")?;
    require_support(p, c0, &[lp, ln])?;

    let na = c0.count(lp);
    let nb = c0.count(ln);
    let n_min = na.min(nb);
    let gap = na.abs_diff(nb);
    let mut b = ScheduleBuilder::new(p, c0.clone());
    if n_min == 0 {
        // Same-sign leaders do not react; c0 is already stable.
        return Ok(b.finish(SCRIPT, "already_stable", false));
    }
    b.push(vec![((lp, ln), n_min)])?;
    if gap == 0 {
        return Ok(b.finish(SCRIPT, "tie", false));
    }
    if nb > na {
        // Leaders and followers already agree on output 0.
        return Ok(b.finish(SCRIPT, "minority_sign", false));
    }
    if gap >= n_min {
        b.push(vec![((lp, fn_), n_min)])?;
        b.push(vec![((lp, fn_), n_min)])?;
        return Ok(b.finish(SCRIPT, "gap_dominates", false));
    }
    b.push(vec![((lp, fn_), gap)])?;
    for _ in 0..(2 * n_min - 2 * gap) {
        b.push(vec![((lp, fn_), 1)])?;
    }
    b.push(vec![((lp, fn_), gap)])?;
    Ok(b.finish(SCRIPT, "gap_below_min", false))
}

/// The k-Symmetry-Majority schedule for the shapes the construction covers:
/// a tie, or a one-node majority with population at least `2k(k+1)`.
///
/// For `Na = Nb + 1`: `ceil(k/2)` leader pairs annihilate to seed the
/// `(f, 0)` pool, all but `k+1` positive and `k` negative leaders annihilate
/// in one step, the isolated leaders unfold their counts onto followers in
/// lockstep (yielding `k(k+1)` copies of `(l, 1)` and `k^2` of `(l, -1)`),
/// the `(l, -1)`s annihilate in one step leaving exactly `k` leaders, and the
/// leaders disseminate output 1 ending with a k-vs-k matching.
pub fn script_k_majority(
    p: &Protocol,
    k: u32,
    c0: &Configuration,
) -> Result<Schedule, SchedulerError> {
    const SCRIPT: &str = "k_majority";
    let ki = k as i64;
    let name = |role: &str, j: i64| {
        if j < 0 {
            format!("{role}_m{}", -j)
        } else {
            format!("{role}_{j}")
        }
    };
    let id = |s: String| p.state_id(&s).map_err(SchedulerError::Model);
    let l = |j: i64| id(name("l", j));
    let f0 = id(name("f", 0))?;
    let top = l(ki)?;
    let bot = l(-ki)?;
    require_support(p, c0, &[top, bot])?;

    let na = c0.count(top);
    let nb = c0.count(bot);
    let mut b = ScheduleBuilder::new(p, c0.clone());
    if na == nb {
        b.push(vec![((top, bot), na)])?;
        return Ok(b.finish(SCRIPT, "tie", false));
    }
    let n = c0.population();
    if na.abs_diff(nb) != 1 {
        return Err(SchedulerError::UnsupportedShape(format!(
            "scripted cases are Na=Nb or |Na-Nb|=1; got Na={na}, Nb={nb}"
        )));
    }
    if u64::from(n) < 2 * u64::from(k) * (u64::from(k) + 1) {
        return Err(SchedulerError::UnsupportedShape(format!(
            "|Na-Nb|=1 requires n >= 2k(k+1) = {}; got n={n}",
            2 * k * (k + 1)
        )));
    }

    // The construction mirrors by sign when the negative side wins.
    let positive_wins = na > nb;
    let minority = na.min(nb);
    let half = k.div_ceil(2);
    b.push(vec![((top, bot), half)])?;
    let isolate_rest = minority - half - k;
    if isolate_rest > 0 {
        b.push(vec![((top, bot), isolate_rest)])?;
    }
    // Unfold the k+1 majority leaders, then the k minority leaders, one count
    // unit per round; transient leader states keep multiplicity k+1 (resp. k).
    for i in (2..=ki).rev() {
        let state = if positive_wins { l(i)? } else { l(-i)? };
        b.push(vec![((state, f0), k + 1)])?;
    }
    for i in (2..=ki).rev() {
        let state = if positive_wins { l(-i)? } else { l(i)? };
        b.push(vec![((state, f0), k)])?;
    }
    let one = if positive_wins { l(1)? } else { l(-1)? };
    let neg_one = if positive_wins { l(-1)? } else { l(1)? };
    b.push(vec![((one, neg_one), k * k)])?;
    if positive_wins {
        // Output 1 must be disseminated onto the (f, 0)s; k of them are
        // converted in one step, the rest sequentially down to k, and the
        // final k by a k-vs-k matching.
        b.push(vec![((one, f0), k)])?;
        while b.count(f0) > k {
            b.push(vec![((one, f0), 1)])?;
        }
        b.push(vec![((one, f0), k)])?;
    }
    // When the negative side wins, followers already output 0 and the k
    // remaining (l, -1) leaders cannot produce a positive state.
    Ok(b.finish(
        SCRIPT,
        if positive_wins { "plus_one" } else { "minus_one" },
        false,
    ))
}

/// Builds the scripted schedule matching a builtin's protocol family.
pub fn script_for_builtin(
    b: &Builtin,
    p: &Protocol,
    c0: &Configuration,
) -> Result<Schedule, SchedulerError> {
    match b {
        Builtin::CountToX { x } => script_count_to_x(p, *x, c0),
        Builtin::PositiveLc { threshold, .. } => script_positive_lc(p, *threshold, c0),
        Builtin::Majority => script_majority(p, c0),
        Builtin::KMajority { k } => script_k_majority(p, *k, c0),
        Builtin::ParityLeader => Err(SchedulerError::UnsupportedShape(
            "the parity protocol has no scripted symmetry-maximizing schedule".into(),
        )),
    }
}

/// JSON-facing form of a schedule, with steps rendered by state name.
#[derive(Debug, Clone, Serialize)]
pub struct ScheduleReport {
    pub script: String,
    pub variant: String,
    pub degenerate: bool,
    pub initial: BTreeMap<String, u32>,
    pub initial_symmetry: u32,
    pub achieved_min_symmetry: u32,
    pub symmetry_breaking: u32,
    pub num_steps: usize,
    pub steps: Vec<Vec<NamedApplication>>,
    #[serde(rename = "final")]
    pub final_counts: BTreeMap<String, u32>,
}

impl Schedule {
    pub fn to_report(&self, p: &Protocol) -> ScheduleReport {
        ScheduleReport {
            script: self.script.clone(),
            variant: self.variant.clone(),
            degenerate: self.degenerate,
            initial: p.named_counts(&self.initial),
            initial_symmetry: self.initial.symmetry(),
            achieved_min_symmetry: self.achieved_min_symmetry,
            symmetry_breaking: self.initial.symmetry() - self.achieved_min_symmetry,
            num_steps: self.steps.len(),
            steps: self.steps.iter().map(|s| named_step(p, s)).collect(),
            final_counts: p.named_counts(&self.final_config),
        }
    }
}
