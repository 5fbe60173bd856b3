//! Simulation and analysis toolkit for population protocols under parallel
//! (matching-based) schedulers.
//!
//! A population of `n` anonymous agents on a complete interaction graph is
//! tracked as a count-per-state configuration. A scheduler fires a node-disjoint
//! set of pairwise interactions (up to a maximum matching) per step. The crate
//! provides:
//!
//! - [`model`]: protocols, configurations, parallel steps, execution traces and
//!   the per-configuration symmetry metric (minimum multiplicity of a present
//!   state);
//! - [`dsl`]: a line-oriented protocol text format (parser + serializer);
//! - [`builtins`]: generators for the threshold, majority and parity protocols
//!   studied here, plus their analytic predicates and stability detectors;
//! - [`scheduler`]: seeded random schedulers (sequential, uniform random
//!   maximum matching) and deterministic scripted schedules that realize the
//!   symmetry-maximizing executions for the builtin protocols;
//! - [`analysis`]: static protocol analysis (reachability, production trees,
//!   output-stable and disseminating states, the disseminating transform);
//! - [`graph`]: exact small-population analysis by configuration-graph search,
//!   including the exact symmetry of a protocol on an initial configuration;
//! - [`experiment`]: reproducible seeded sweeps measuring observed symmetry
//!   under random schedulers, with CSV output and growth fitting.

pub mod analysis;
pub mod builtins;
pub mod dsl;
pub mod experiment;
pub mod graph;
pub mod model;
pub mod scheduler;

pub use builtins::Builtin;
pub use model::{Configuration, ExecutionTrace, ParallelStep, Protocol, StateId};
