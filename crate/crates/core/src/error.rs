use thiserror::Error;

use crate::machine::MachineKind;
use crate::paths::PathRecord;

/// Problems found while assembling a machine from its components.
/// Rule-level variants carry the rule's position in the input list.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("invalid name `{0}`")]
    InvalidName(String),
    #[error("symbol `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("state `{0}` declared twice")]
    DuplicateState(String),
    #[error("too many symbols or states")]
    TooManyNames,
    #[error("unknown state `{name}`")]
    UnknownState { rule: Option<usize>, name: String },
    #[error("unknown symbol `{name}`")]
    UnknownSymbol { rule: Option<usize>, name: String },
    #[error("duplicate quintuple")]
    DuplicateQuintuple { rule: usize },
    #[error("halt state has an outgoing rule")]
    HaltHasOutgoingRule { rule: usize },
    #[error("second rule for the same (state, symbol) in a deterministic machine")]
    DeterministicConflict { rule: usize },
    #[error("weight does not match machine kind `{kind}`")]
    WeightKindMismatch { rule: usize, kind: MachineKind },
    #[error("weight out of range [0,1]: {value}")]
    ProbabilityOutOfRange { rule: usize, value: f64 },
    #[error("weight is not finite")]
    NonFiniteWeight { rule: usize },
}

impl BuildError {
    pub(crate) fn unknown_state(rule: Option<usize>, name: String) -> Self {
        BuildError::UnknownState { rule, name }
    }

    pub(crate) fn unknown_symbol(rule: Option<usize>, name: String) -> Self {
        BuildError::UnknownSymbol { rule, name }
    }

    /// Position of the offending rule, for rule-level errors.
    pub fn rule(&self) -> Option<usize> {
        match self {
            BuildError::UnknownState { rule, .. } | BuildError::UnknownSymbol { rule, .. } => *rule,
            BuildError::DuplicateQuintuple { rule }
            | BuildError::HaltHasOutgoingRule { rule }
            | BuildError::DeterministicConflict { rule }
            | BuildError::WeightKindMismatch { rule, .. }
            | BuildError::ProbabilityOutOfRange { rule, .. }
            | BuildError::NonFiniteWeight { rule } => Some(*rule),
            _ => None,
        }
    }
}

/// Failures of validation and evaluation operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("operation needs a {expected} machine, got {found}")]
    WrongKind { expected: &'static str, found: MachineKind },
    #[error("input symbol `{0}` is not in the alphabet")]
    UnknownInputSymbol(String),
    #[error("validation depth must be positive")]
    DepthZero,
    #[error("machine failed validation: {0}")]
    ValidationFailed(String),
    #[error("path budget of {limit} exceeded; {} paths kept", partial.len())]
    PathBudgetExceeded { limit: usize, partial: Vec<PathRecord> },
    #[error("paths do not share a common root")]
    MixedRoots,
    #[error("paths have different lengths")]
    RaggedPaths,
    #[error("no paths to aggregate")]
    NoPaths,
    #[error("region spans {region} cells but pattern has {pattern} symbols")]
    RegionMismatch { region: usize, pattern: usize },
}

/// Failures of the finite-dimensional gate toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GateError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("gate dimension must be at least 1")]
    EmptyGate,
    #[error("expected {expected} entries, got {found}")]
    WrongEntryCount { expected: usize, found: usize },
    #[error("matrix is not unitary (deviation {deviation:e})")]
    NonUnitary { deviation: f64 },
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("function table needs 2^{inputs} entries, got {found}")]
    TableLength { inputs: u32, found: usize },
    #[error("table value {value} does not fit in {outputs} output bits")]
    TableValue { value: u64, outputs: u32 },
    #[error("Deutsch's problem needs a 1-bit to 1-bit function, got {inputs} -> {outputs}")]
    WrongArity { inputs: u32, outputs: u32 },
    #[error("bridge supports gate dimensions 1 to 10, got {0}")]
    UnsupportedDimension(usize),
}
