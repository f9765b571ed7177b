//! Level-wise evaluation: deterministic runs and fixed-step evolution of
//! probability distributions and amplitude vectors.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_complex::Complex64;

use crate::error::EvalError;
use crate::machine::{ConfigStatus, Configuration, MachineDescription, MachineKind, PRUNE_THRESHOLD};
use crate::validate::{ensure_stochastic, validate_norm_preserving};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Halted,
    Stuck,
    StepLimit,
}

impl RunStatus {
    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Halted => "halted",
            RunStatus::Stuck => "stuck",
            RunStatus::StepLimit => "step-limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub config: Configuration,
    pub steps: usize,
}

/// Runs a deterministic machine until it halts, gets stuck or uses up
/// `max_steps`.
pub fn run_deterministic(
    m: &MachineDescription,
    input: &str,
    max_steps: usize,
) -> Result<RunOutcome, EvalError> {
    if m.kind() != MachineKind::Deterministic {
        return Err(EvalError::WrongKind { expected: "deterministic", found: m.kind() });
    }
    let mut config = m.initial_configuration(input)?;
    let mut steps = 0;
    loop {
        let status = match m.status(&config) {
            ConfigStatus::Halted => RunStatus::Halted,
            ConfigStatus::Stuck => RunStatus::Stuck,
            ConfigStatus::Active if steps == max_steps => RunStatus::StepLimit,
            ConfigStatus::Active => {
                let rule = &m.rules_for(config.state(), config.scanned(m.blank()))[0];
                config = config.apply(rule, m.blank());
                steps += 1;
                continue;
            }
        };
        return Ok(RunOutcome { status, config, steps });
    }
}

/// How the weights of a [`WeightedState`] are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightKind {
    /// Real probabilities, stored with a zero imaginary part.
    Probability,
    /// Complex probability amplitudes.
    Amplitude,
}

impl WeightKind {
    pub fn of(kind: MachineKind) -> WeightKind {
        match kind {
            MachineKind::Quantum => WeightKind::Amplitude,
            _ => WeightKind::Probability,
        }
    }
}

/// Finite map from configurations to weights, with entries below
/// [`PRUNE_THRESHOLD`] removed. Iteration follows canonical configuration
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedState {
    kind: WeightKind,
    entries: BTreeMap<Configuration, Complex64>,
}

impl WeightedState {
    pub(crate) fn from_entries(kind: WeightKind, mut entries: BTreeMap<Configuration, Complex64>) -> Self {
        entries.retain(|_, w| w.norm() >= PRUNE_THRESHOLD);
        WeightedState { kind, entries }
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Configuration, Complex64)> {
        self.entries.iter().map(|(c, w)| (c, *w))
    }

    /// Raw weight: a probability in the real part, or an amplitude.
    pub fn weight(&self, c: &Configuration) -> Complex64 {
        self.entries.get(c).copied().unwrap_or_default()
    }

    /// Probability of observing `c`: the weight itself, or the squared
    /// modulus of the amplitude.
    pub fn probability(&self, c: &Configuration) -> f64 {
        self.prob_of(self.weight(c))
    }

    fn prob_of(&self, w: Complex64) -> f64 {
        match self.kind {
            WeightKind::Probability => w.re,
            WeightKind::Amplitude => w.norm_sqr(),
        }
    }

    pub fn total_probability(&self) -> f64 {
        self.entries.values().map(|w| self.prob_of(*w)).sum()
    }
}

/// Weight distribution over configurations after exactly `steps` steps.
///
/// The machine must pass its kind's validation: the outgoing probabilities
/// of a probabilistic machine must sum to 1, and a quantum machine must be
/// norm preserving on the configurations reachable from `input` within
/// `steps` steps.
pub fn evolve(m: &MachineDescription, input: &str, steps: usize) -> Result<WeightedState, EvalError> {
    match m.kind() {
        MachineKind::Deterministic => {
            return Err(EvalError::WrongKind { expected: "probabilistic or quantum", found: m.kind() })
        }
        MachineKind::Probabilistic => ensure_stochastic(m)?,
        MachineKind::Quantum if steps > 0 => {
            let report = validate_norm_preserving(m, &[input], steps)?;
            if !report.passed() {
                return Err(EvalError::ValidationFailed(format!(
                    "{} unitarity violations on the reachable subspace",
                    report.violations.len()
                )));
            }
        }
        MachineKind::Quantum => {}
    }
    evolve_unchecked(m, input, steps)
}

/// [`evolve`] without the validation gate, for any machine kind.
/// Deterministic machines evolve as probabilistic ones with weight 1.
pub fn evolve_unchecked(
    m: &MachineDescription,
    input: &str,
    steps: usize,
) -> Result<WeightedState, EvalError> {
    let root = m.initial_configuration(input)?;
    let mut level: BTreeMap<Configuration, Complex64> = BTreeMap::from([(root, Complex64::new(1.0, 0.0))]);
    for _ in 0..steps {
        let mut next: BTreeMap<Configuration, Complex64> = BTreeMap::new();
        for (c, w) in level {
            let rules = m.rules_for(c.state(), c.scanned(m.blank()));
            if c.state() == m.halt() || rules.is_empty() {
                *next.entry(c).or_default() += w;
                continue;
            }
            for r in rules {
                *next.entry(c.apply(r, m.blank())).or_default() += w * r.weight.as_complex();
            }
        }
        next.retain(|_, w| w.norm() >= PRUNE_THRESHOLD);
        level = next;
    }
    Ok(WeightedState::from_entries(WeightKind::of(m.kind()), level))
}

/// Probability that the tape reads `pattern` on the cells of `region`.
/// Amplitudes are squared per configuration after aggregation.
pub fn output_probability(
    ws: &WeightedState,
    m: &MachineDescription,
    region: RangeInclusive<i64>,
    pattern: &str,
) -> Result<f64, EvalError> {
    let symbols = m.parse_tape(pattern)?;
    let cells: Vec<i64> = region.collect();
    if cells.len() != symbols.len() {
        return Err(EvalError::RegionMismatch { region: cells.len(), pattern: symbols.len() });
    }
    Ok(ws
        .iter()
        .filter(|(c, _)| cells.iter().zip(&symbols).all(|(&i, &s)| c.read(i, m.blank()) == s))
        .map(|(_, w)| ws.prob_of(w))
        .sum())
}
