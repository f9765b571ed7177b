//! Deterministic, probabilistic and quantum Turing machines under one
//! weighted-transition formalism.
//!
//! A machine is a finite table of quintuples `(q, s) -> (q', s', d)` with a
//! weight: an implicit 1 for deterministic machines, a probability for
//! probabilistic ones and a complex amplitude for quantum ones. Evaluation
//! follows the computation tree: a branch's weight is the product of the
//! weights along it, and the weight of a configuration is the sum over the
//! branches reaching it. For amplitudes that sum can cancel.
//!
//! Two independent routes compute the same distribution:
//! [`evolve`] aggregates level by level, while [`enumerate_paths`] lists
//! every branch and [`aggregate_paths`] sums them afterwards.
//!
//! The [`gatekit`] module holds the finite-dimensional side: gates over a
//! handful of path labels, the square root of NOT, phase oracles and
//! Deutsch's one-query decision procedure.

pub mod corpus;
mod error;
pub mod evolution;
pub mod gatekit;
pub mod machine;
pub mod paths;
pub mod sampling;
pub mod textfmt;
pub mod validate;

pub use error::{BuildError, EvalError, GateError};
pub use evolution::{
    evolve, evolve_unchecked, output_probability, run_deterministic, RunOutcome, RunStatus, WeightKind,
    WeightedState,
};
pub use gatekit::{
    bridge_gate_to_machine, deutsch_decide, phase_oracle, sqrt_not, BooleanFunctionTable, DeutschReport,
    Gate, PathState, Verdict,
};
pub use machine::{
    build_machine, ConfigStatus, Configuration, Direction, MachineDescription, MachineKind, MachineSpec,
    RuleSpec, StateId, SymbolId, TransitionRule, Weight, EPS_NORM, PRUNE_THRESHOLD,
};
pub use paths::{aggregate_paths, enumerate_paths, PathRecord, PathStep, DEFAULT_MAX_PATHS};
pub use sampling::{sample_run, sample_run_with, SampledRun};
pub use textfmt::{format_real, parse_machine, serialize_machine, Severity, SourceDiagnostic};
pub use validate::{
    validate_norm_preserving, validate_stochastic, NormReport, NormViolation, OutgoingSum, StochasticReport,
};
