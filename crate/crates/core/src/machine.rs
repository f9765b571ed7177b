//! Machine descriptions: alphabets, states, weighted quintuples and the
//! configurations they act on.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{BuildError, EvalError};

/// Tolerance for every normalization and unitarity check.
pub const EPS_NORM: f64 = 1e-9;

/// Weights whose magnitude falls below this are dropped after aggregation.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// The three machine models sharing the weighted-quintuple formalism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MachineKind {
    Deterministic,
    Probabilistic,
    Quantum,
}

impl MachineKind {
    pub fn name(self) -> &'static str {
        match self {
            MachineKind::Deterministic => "deterministic",
            MachineKind::Probabilistic => "probabilistic",
            MachineKind::Quantum => "quantum",
        }
    }
}

impl fmt::Display for MachineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MachineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "deterministic" => Ok(MachineKind::Deterministic),
            "probabilistic" => Ok(MachineKind::Probabilistic),
            "quantum" => Ok(MachineKind::Quantum),
            other => Err(format!("unknown machine kind `{other}`")),
        }
    }
}

/// Head movement after writing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Left,
    Right,
    Nothing,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::Left, Direction::Right, Direction::Nothing];

    pub fn offset(self) -> i64 {
        match self {
            Direction::Left => -1,
            Direction::Right => 1,
            Direction::Nothing => 0,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Direction::Left => 'L',
            Direction::Right => 'R',
            Direction::Nothing => 'N',
        }
    }

    pub fn from_letter(s: &str) -> Option<Direction> {
        match s {
            "L" => Some(Direction::Left),
            "R" => Some(Direction::Right),
            "N" => Some(Direction::Nothing),
            _ => None,
        }
    }
}

/// Weight attached to a transition rule. The variant must match the
/// machine kind: deterministic rules carry an implicit 1, probabilistic
/// rules a probability in `[0, 1]`, quantum rules a complex amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    Unit,
    Probability(f64),
    Amplitude(Complex64),
}

impl Weight {
    pub fn as_complex(self) -> Complex64 {
        match self {
            Weight::Unit => Complex64::new(1.0, 0.0),
            Weight::Probability(p) => Complex64::new(p, 0.0),
            Weight::Amplitude(c) => c,
        }
    }

    pub fn kind(self) -> MachineKind {
        match self {
            Weight::Unit => MachineKind::Deterministic,
            Weight::Probability(_) => MachineKind::Probabilistic,
            Weight::Amplitude(_) => MachineKind::Quantum,
        }
    }

    fn is_finite(self) -> bool {
        match self {
            Weight::Unit => true,
            Weight::Probability(p) => p.is_finite(),
            Weight::Amplitude(c) => c.re.is_finite() && c.im.is_finite(),
        }
    }
}

/// Index of a symbol in its machine's alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub(crate) u16);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index of a control state in its machine's state set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub(crate) u16);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One rule in name form, as written by a user or a file.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSpec {
    pub from: String,
    pub read: String,
    pub to: String,
    pub write: String,
    pub direction: Direction,
    pub weight: Weight,
}

impl RuleSpec {
    pub fn new(
        from: impl Into<String>,
        read: impl Into<String>,
        to: impl Into<String>,
        write: impl Into<String>,
        direction: Direction,
        weight: Weight,
    ) -> Self {
        RuleSpec {
            from: from.into(),
            read: read.into(),
            to: to.into(),
            write: write.into(),
            direction,
            weight,
        }
    }
}

/// The unvalidated components of a machine. [`MachineSpec::build`] turns
/// them into a [`MachineDescription`].
#[derive(Debug, Clone, PartialEq)]
pub struct MachineSpec {
    pub kind: MachineKind,
    pub alphabet: Vec<String>,
    pub blank: String,
    pub states: Vec<String>,
    pub start: String,
    pub halt: String,
    pub rules: Vec<RuleSpec>,
}

/// A resolved rule: `(from, read) -> (to, write, direction)` with its weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionRule {
    pub from: StateId,
    pub read: SymbolId,
    pub to: StateId,
    pub write: SymbolId,
    pub direction: Direction,
    pub weight: Weight,
}

impl TransitionRule {
    pub fn quintuple(&self) -> (StateId, SymbolId, StateId, SymbolId, Direction) {
        (self.from, self.read, self.to, self.write, self.direction)
    }
}

/// A validated machine. Rules are kept sorted by quintuple, and the rules
/// sharing a `(state, symbol)` pair form one contiguous run.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineDescription {
    kind: MachineKind,
    alphabet: Vec<String>,
    blank: SymbolId,
    states: Vec<String>,
    start: StateId,
    halt: StateId,
    rules: Vec<TransitionRule>,
    index: HashMap<(StateId, SymbolId), Range<usize>>,
}

/// Whether a configuration can still move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConfigStatus {
    Active,
    Halted,
    Stuck,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name != "->"
        && name.chars().all(|c| c.is_ascii_graphic() && c != '#' && c != ',' && c != '(' && c != ')')
}

/// Builds a machine from its components, reporting the first problem found.
pub fn build_machine(spec: &MachineSpec) -> Result<MachineDescription, BuildError> {
    spec.build()
}

impl MachineSpec {
    pub fn build(&self) -> Result<MachineDescription, BuildError> {
        match self.resolve() {
            Ok(m) => Ok(m),
            Err(mut errors) => Err(errors.remove(0)),
        }
    }

    /// Every problem with this spec, in declaration order. Rule-level
    /// problems carry the rule's position in `rules`.
    pub fn diagnose(&self) -> Vec<BuildError> {
        self.resolve().err().unwrap_or_default()
    }

    fn resolve(&self) -> Result<MachineDescription, Vec<BuildError>> {
        let mut errors = Vec::new();
        let symbols = name_table(&self.alphabet, &mut errors, BuildError::DuplicateSymbol);
        let states = name_table(&self.states, &mut errors, BuildError::DuplicateState);
        if self.alphabet.len() > u16::MAX as usize || self.states.len() > u16::MAX as usize {
            errors.push(BuildError::TooManyNames);
        }

        let blank = lookup(&symbols, &self.blank, None, &mut errors, BuildError::unknown_symbol);
        let start = lookup(&states, &self.start, None, &mut errors, BuildError::unknown_state);
        let halt = lookup(&states, &self.halt, None, &mut errors, BuildError::unknown_state);

        let mut rules = Vec::with_capacity(self.rules.len());
        let mut seen = HashSet::new();
        let mut deterministic_keys = HashSet::new();
        for (i, r) in self.rules.iter().enumerate() {
            let before = errors.len();
            let from = lookup(&states, &r.from, Some(i), &mut errors, BuildError::unknown_state);
            let read = lookup(&symbols, &r.read, Some(i), &mut errors, BuildError::unknown_symbol);
            let to = lookup(&states, &r.to, Some(i), &mut errors, BuildError::unknown_state);
            let write = lookup(&symbols, &r.write, Some(i), &mut errors, BuildError::unknown_symbol);
            if errors.len() > before {
                continue;
            }
            let (from, read, to, write) = (from.unwrap(), read.unwrap(), to.unwrap(), write.unwrap());

            if r.weight.kind() != self.kind {
                errors.push(BuildError::WeightKindMismatch { rule: i, kind: self.kind });
                continue;
            }
            if !r.weight.is_finite() {
                errors.push(BuildError::NonFiniteWeight { rule: i });
                continue;
            }
            if let Weight::Probability(p) = r.weight {
                if !(0.0..=1.0).contains(&p) {
                    errors.push(BuildError::ProbabilityOutOfRange { rule: i, value: p });
                    continue;
                }
            }
            if Some(from) == halt {
                errors.push(BuildError::HaltHasOutgoingRule { rule: i });
                continue;
            }
            if !seen.insert((from, read, to, write, r.direction)) {
                errors.push(BuildError::DuplicateQuintuple { rule: i });
                continue;
            }
            if self.kind == MachineKind::Deterministic && !deterministic_keys.insert((from, read)) {
                errors.push(BuildError::DeterministicConflict { rule: i });
                continue;
            }
            rules.push(TransitionRule { from, read, to, write, direction: r.direction, weight: r.weight });
        }

        if !errors.is_empty() {
            return Err(errors);
        }

        rules.sort_by_key(|r| r.quintuple());
        let mut index: HashMap<(StateId, SymbolId), Range<usize>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            index.entry((r.from, r.read)).and_modify(|range| range.end = i + 1).or_insert(i..i + 1);
        }

        Ok(MachineDescription {
            kind: self.kind,
            alphabet: self.alphabet.clone(),
            blank: blank.unwrap(),
            states: self.states.clone(),
            start: start.unwrap(),
            halt: halt.unwrap(),
            rules,
            index,
        })
    }
}

fn name_table(
    names: &[String],
    errors: &mut Vec<BuildError>,
    duplicate: fn(String) -> BuildError,
) -> HashMap<String, u16> {
    let mut table = HashMap::new();
    for (i, name) in names.iter().enumerate() {
        if !valid_name(name) {
            errors.push(BuildError::InvalidName(name.clone()));
        } else if table.insert(name.clone(), i as u16).is_some() {
            errors.push(duplicate(name.clone()));
        }
    }
    table
}

fn lookup<T: From<u16>>(
    table: &HashMap<String, u16>,
    name: &str,
    rule: Option<usize>,
    errors: &mut Vec<BuildError>,
    unknown: fn(Option<usize>, String) -> BuildError,
) -> Option<T> {
    match table.get(name) {
        Some(&i) => Some(T::from(i)),
        None => {
            errors.push(unknown(rule, name.to_string()));
            None
        }
    }
}

impl From<u16> for SymbolId {
    fn from(i: u16) -> Self {
        SymbolId(i)
    }
}

impl From<u16> for StateId {
    fn from(i: u16) -> Self {
        StateId(i)
    }
}

impl MachineDescription {
    pub fn kind(&self) -> MachineKind {
        self.kind
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn blank(&self) -> SymbolId {
        self.blank
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn halt(&self) -> StateId {
        self.halt
    }

    /// Rules in canonical quintuple order.
    pub fn rules(&self) -> &[TransitionRule] {
        &self.rules
    }

    pub fn symbol_name(&self, s: SymbolId) -> &str {
        &self.alphabet[s.index()]
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q.index()]
    }

    pub fn symbol(&self, name: &str) -> Option<SymbolId> {
        self.alphabet.iter().position(|s| s == name).map(|i| SymbolId(i as u16))
    }

    pub fn state(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name).map(|i| StateId(i as u16))
    }

    /// Canonical indices of the rules applicable in `state` scanning `symbol`.
    pub fn rule_range(&self, state: StateId, symbol: SymbolId) -> Range<usize> {
        self.index.get(&(state, symbol)).cloned().unwrap_or(0..0)
    }

    pub fn rules_for(&self, state: StateId, symbol: SymbolId) -> &[TransitionRule] {
        &self.rules[self.rule_range(state, symbol)]
    }

    pub fn status(&self, c: &Configuration) -> ConfigStatus {
        if c.state == self.halt {
            ConfigStatus::Halted
        } else if self.rule_range(c.state, c.scanned(self.blank)).is_empty() {
            ConfigStatus::Stuck
        } else {
            ConfigStatus::Active
        }
    }

    /// The components this machine was built from, with rules in canonical
    /// order. Building them again yields an identical machine.
    pub fn to_spec(&self) -> MachineSpec {
        MachineSpec {
            kind: self.kind,
            alphabet: self.alphabet.clone(),
            blank: self.symbol_name(self.blank).to_string(),
            states: self.states.clone(),
            start: self.state_name(self.start).to_string(),
            halt: self.state_name(self.halt).to_string(),
            rules: self
                .rules
                .iter()
                .map(|r| RuleSpec {
                    from: self.state_name(r.from).to_string(),
                    read: self.symbol_name(r.read).to_string(),
                    to: self.state_name(r.to).to_string(),
                    write: self.symbol_name(r.write).to_string(),
                    direction: r.direction,
                    weight: r.weight,
                })
                .collect(),
        }
    }

    /// Re-tags a deterministic machine as probabilistic (weights 1) or
    /// quantum (amplitudes 1).
    pub fn retagged(&self, kind: MachineKind) -> Option<MachineDescription> {
        if self.kind != MachineKind::Deterministic {
            return None;
        }
        let weight = match kind {
            MachineKind::Deterministic => Weight::Unit,
            MachineKind::Probabilistic => Weight::Probability(1.0),
            MachineKind::Quantum => Weight::Amplitude(Complex64::new(1.0, 0.0)),
        };
        let mut m = self.clone();
        m.kind = kind;
        for r in &mut m.rules {
            r.weight = weight;
        }
        Some(m)
    }

    /// Splits an input string into symbols. Whitespace-separated tokens are
    /// used when the input contains whitespace, single characters otherwise.
    pub fn parse_tape(&self, input: &str) -> Result<Vec<SymbolId>, EvalError> {
        let resolve =
            |tok: &str| self.symbol(tok).ok_or_else(|| EvalError::UnknownInputSymbol(tok.to_string()));
        if input.chars().any(char::is_whitespace) {
            input.split_whitespace().map(resolve).collect()
        } else {
            let mut buf = [0u8; 4];
            input.chars().map(|c| resolve(c.encode_utf8(&mut buf))).collect()
        }
    }

    /// Input written from cell 0, head on cell 0, control in the start state.
    pub fn initial_configuration(&self, input: &str) -> Result<Configuration, EvalError> {
        let symbols = self.parse_tape(input)?;
        Ok(Configuration::new(
            self.start,
            0,
            symbols.into_iter().enumerate().map(|(i, s)| (i as i64, s)),
            self.blank,
        ))
    }

    /// Tape symbols from cell `min(0, lowest non-blank)` to the highest
    /// non-blank cell. A negative origin is written as a `<cell>:` prefix.
    pub fn tape_string(&self, c: &Configuration) -> String {
        let Some((lo, hi)) = c.nonblank_span() else {
            return String::new();
        };
        let lo = lo.min(0);
        let body = self.cells(c, lo, hi);
        if lo < 0 {
            format!("{lo}:{body}")
        } else {
            body
        }
    }

    /// Tape window from the lowest to the highest non-blank cell padded by
    /// one blank on each side, with the cell index of its first character.
    pub fn tape_window(&self, c: &Configuration) -> (i64, String) {
        match c.nonblank_span() {
            Some((lo, hi)) => (lo - 1, self.cells(c, lo - 1, hi + 1)),
            None => (0, self.symbol_name(self.blank).to_string()),
        }
    }

    fn cells(&self, c: &Configuration, lo: i64, hi: i64) -> String {
        let names: Vec<&str> = (lo..=hi).map(|i| self.symbol_name(c.read(i, self.blank))).collect();
        if names.iter().all(|n| n.len() == 1) {
            names.concat()
        } else {
            names.join(" ")
        }
    }

    /// Short human-readable form, e.g. `q1 @0 [_1_]`.
    pub fn describe(&self, c: &Configuration) -> String {
        let (_, window) = self.tape_window(c);
        format!("{} @{} [{}]", self.state_name(c.state), c.head, window)
    }
}

/// Complete snapshot of a machine: tape, head position and control state.
///
/// The tape never stores blank cells explicitly, so structural equality is
/// equality of machine snapshots. The derived ordering is the canonical
/// configuration order used for reproducible summation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    state: StateId,
    head: i64,
    tape: BTreeMap<i64, SymbolId>,
}

impl Configuration {
    /// Canonicalizing constructor: explicit blanks are dropped. Later
    /// entries for the same cell win.
    pub fn new(
        state: StateId,
        head: i64,
        cells: impl IntoIterator<Item = (i64, SymbolId)>,
        blank: SymbolId,
    ) -> Self {
        let mut tape = BTreeMap::new();
        for (i, s) in cells {
            if s == blank {
                tape.remove(&i);
            } else {
                tape.insert(i, s);
            }
        }
        Configuration { state, head, tape }
    }

    pub fn state(&self) -> StateId {
        self.state
    }

    pub fn head(&self) -> i64 {
        self.head
    }

    /// Non-blank cells.
    pub fn tape(&self) -> &BTreeMap<i64, SymbolId> {
        &self.tape
    }

    pub fn read(&self, cell: i64, blank: SymbolId) -> SymbolId {
        self.tape.get(&cell).copied().unwrap_or(blank)
    }

    pub fn scanned(&self, blank: SymbolId) -> SymbolId {
        self.read(self.head, blank)
    }

    pub fn nonblank_span(&self) -> Option<(i64, i64)> {
        let lo = *self.tape.keys().next()?;
        let hi = *self.tape.keys().next_back()?;
        Some((lo, hi))
    }

    /// The configuration reached by applying `rule`; the caller guarantees
    /// the rule matches this configuration's state and scanned symbol.
    pub fn apply(&self, rule: &TransitionRule, blank: SymbolId) -> Configuration {
        debug_assert_eq!(rule.from, self.state);
        debug_assert_eq!(rule.read, self.scanned(blank));
        let mut tape = self.tape.clone();
        if rule.write == blank {
            tape.remove(&self.head);
        } else {
            tape.insert(self.head, rule.write);
        }
        Configuration { state: rule.to, head: self.head + rule.direction.offset(), tape }
    }
}
