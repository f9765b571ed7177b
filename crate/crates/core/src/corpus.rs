//! Seeded generators of small random machines for property tests and
//! benchmarks.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::gatekit::Gate;
use crate::machine::{Direction, MachineDescription, MachineKind, MachineSpec, RuleSpec, Weight};

/// Size limits for generated machines. State and symbol counts include the
/// halt state and the blank.
#[derive(Debug, Clone, Copy)]
pub struct CorpusParams {
    pub max_states: usize,
    pub max_symbols: usize,
    pub max_branching: usize,
    /// Chance that a non-halt `(state, symbol)` pair has rules at all.
    pub defined: f64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams { max_states: 4, max_symbols: 3, max_branching: 3, defined: 0.85 }
    }
}

fn skeleton<R: Rng + ?Sized>(rng: &mut R, p: &CorpusParams) -> (Vec<String>, Vec<String>) {
    let n_states = rng.gen_range(2..=p.max_states.max(2));
    let n_symbols = rng.gen_range(2..=p.max_symbols.max(2));
    let mut states: Vec<String> = (0..n_states - 1).map(|i| format!("q{i}")).collect();
    states.push("qh".into());
    let mut alphabet: Vec<String> = (0..n_symbols - 1).map(|i| i.to_string()).collect();
    alphabet.push("_".into());
    (states, alphabet)
}

fn spec(kind: MachineKind, states: Vec<String>, alphabet: Vec<String>, rules: Vec<RuleSpec>) -> MachineSpec {
    MachineSpec {
        kind,
        alphabet,
        blank: "_".into(),
        start: states[0].clone(),
        halt: states.last().cloned().unwrap_or_default(),
        states,
        rules,
    }
}

/// Random rule table; `weights` maps the branch count to the weights of
/// one `(state, symbol)` group.
fn random_machine<R: Rng + ?Sized>(
    rng: &mut R,
    p: &CorpusParams,
    kind: MachineKind,
    mut weights: impl FnMut(&mut R, usize) -> Vec<Weight>,
) -> MachineDescription {
    let (states, alphabet) = skeleton(rng, p);
    let mut rules = Vec::new();
    for q in &states[..states.len() - 1] {
        for s in &alphabet {
            if !rng.gen_bool(p.defined) {
                continue;
            }
            let mut targets: Vec<(usize, usize, Direction)> = (0..states.len())
                .flat_map(|t| (0..alphabet.len()).flat_map(move |w| Direction::ALL.map(|d| (t, w, d))))
                .collect();
            targets.shuffle(rng);
            let k = rng.gen_range(1..=p.max_branching.max(1));
            for ((t, w, d), weight) in targets.into_iter().take(k).zip(weights(rng, k)) {
                rules.push(RuleSpec::new(
                    q.clone(),
                    s.clone(),
                    states[t].clone(),
                    alphabet[w].clone(),
                    d,
                    weight,
                ));
            }
        }
    }
    spec(kind, states, alphabet, rules).build().expect("generated machine is well-formed")
}

pub fn random_deterministic<R: Rng + ?Sized>(rng: &mut R, p: &CorpusParams) -> MachineDescription {
    let p = CorpusParams { max_branching: 1, ..*p };
    random_machine(rng, &p, MachineKind::Deterministic, |_, k| vec![Weight::Unit; k])
}

/// Random machine whose outgoing probabilities sum to 1 for every defined
/// `(state, symbol)` pair.
pub fn random_probabilistic<R: Rng + ?Sized>(rng: &mut R, p: &CorpusParams) -> MachineDescription {
    random_machine(rng, p, MachineKind::Probabilistic, |rng, k| {
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| Weight::Probability((x / total).min(1.0))).collect()
    })
}

/// Random quantum machine with unit-norm outgoing amplitude groups. These
/// are generally not norm preserving.
pub fn random_quantum<R: Rng + ?Sized>(rng: &mut R, p: &CorpusParams) -> MachineDescription {
    random_machine(rng, p, MachineKind::Quantum, |rng, k| {
        let raw: Vec<Complex64> =
            (0..k).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        raw.into_iter().map(|c| Weight::Amplitude(c / norm)).collect()
    })
}

/// Layered quantum machine that is norm preserving by construction: state
/// `q_i` rewrites the scanned cell by a random unitary over the whole
/// alphabet, moves in a direction fixed per layer and enters `q_{i+1}`; the
/// last layer enters `qh`.
pub fn random_layered_unitary<R: Rng + ?Sized>(rng: &mut R, p: &CorpusParams) -> MachineDescription {
    let (states, alphabet) = skeleton(rng, p);
    let d = alphabet.len();
    let mut rules = Vec::new();
    for layer in 0..states.len() - 1 {
        let g = Gate::random_unitary(d, rng);
        let dir = *Direction::ALL.choose(rng).expect("three directions");
        for a in 0..d {
            for b in 0..d {
                rules.push(RuleSpec::new(
                    states[layer].clone(),
                    alphabet[a].clone(),
                    states[layer + 1].clone(),
                    alphabet[b].clone(),
                    dir,
                    Weight::Amplitude(g.entry(a, b)),
                ));
            }
        }
    }
    spec(MachineKind::Quantum, states, alphabet, rules).build().expect("generated machine is well-formed")
}

/// Random input over the non-blank symbols of `m`, at most `max_len` long.
pub fn random_input<R: Rng + ?Sized>(rng: &mut R, m: &MachineDescription, max_len: usize) -> String {
    let symbols: Vec<&String> =
        m.alphabet().iter().enumerate().filter(|(i, _)| *i != m.blank().index()).map(|(_, s)| s).collect();
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| symbols.choose(rng).map_or("", |s| s.as_str())).collect()
}
