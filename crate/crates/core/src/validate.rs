//! Well-formedness checks for probabilistic and quantum machines.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::error::EvalError;
use crate::machine::{
    ConfigStatus, Configuration, MachineDescription, MachineKind, StateId, SymbolId, EPS_NORM,
};

/// Outgoing probability mass of one `(state, symbol)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct OutgoingSum {
    pub state: StateId,
    pub symbol: SymbolId,
    pub sum: f64,
}

impl OutgoingSum {
    pub fn ok(&self) -> bool {
        (self.sum - 1.0).abs() <= EPS_NORM
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StochasticReport {
    pub sums: Vec<OutgoingSum>,
}

impl StochasticReport {
    pub fn passed(&self) -> bool {
        self.sums.iter().all(OutgoingSum::ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &OutgoingSum> {
        self.sums.iter().filter(|s| !s.ok())
    }
}

/// Checks that the rules leaving every defined non-halt `(state, symbol)`
/// pair carry probabilities summing to 1.
pub fn validate_stochastic(m: &MachineDescription) -> Result<StochasticReport, EvalError> {
    if m.kind() != MachineKind::Probabilistic {
        return Err(EvalError::WrongKind { expected: "probabilistic", found: m.kind() });
    }
    let mut sums: Vec<OutgoingSum> = Vec::new();
    for r in m.rules() {
        let p = r.weight.as_complex().re;
        match sums.last_mut() {
            Some(last) if last.state == r.from && last.symbol == r.read => last.sum += p,
            _ => sums.push(OutgoingSum { state: r.from, symbol: r.read, sum: p }),
        }
    }
    Ok(StochasticReport { sums })
}

/// [`validate_stochastic`] as a gate: `ValidationFailed` names the first
/// pair whose outgoing probabilities do not sum to 1.
pub(crate) fn ensure_stochastic(m: &MachineDescription) -> Result<(), EvalError> {
    let report = validate_stochastic(m)?;
    let failure = report.failures().next().map(|bad| {
        EvalError::ValidationFailed(format!(
            "outgoing probabilities of ({}, {}) sum to {}",
            m.state_name(bad.state),
            m.symbol_name(bad.symbol),
            bad.sum
        ))
    });
    failure.map_or(Ok(()), Err)
}

/// A failed unitarity condition on the reachable subspace.
#[derive(Debug, Clone, PartialEq)]
pub enum NormViolation {
    /// The image of an active configuration does not have unit norm.
    ColumnNorm { config: Configuration, norm_sq: f64 },
    /// Images of two distinct active configurations are not orthogonal.
    ColumnOverlap { first: Configuration, second: Configuration, overlap: f64 },
    /// An active configuration feeds a halted or stuck configuration that is
    /// reachable at the same depth, where it keeps its own amplitude.
    AbsorbedOverlap { active: Configuration, absorbed: Configuration, overlap: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    /// Distinct configurations reachable from the probes within the depth.
    pub reachable: usize,
    /// Number of active configurations whose images were checked.
    pub columns: usize,
    pub violations: Vec<NormViolation>,
}

impl NormReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Numerically checks that one step of a quantum machine preserves the
/// 2-norm on the configurations reachable from `probes` within `depth` steps.
///
/// Images of reachable active configurations must be orthonormal. Halted and
/// stuck configurations are absorbing: they map to themselves with amplitude
/// 1, so an active configuration may not feed an absorbing configuration
/// that is reachable at the same depth from the same probe.
pub fn validate_norm_preserving<S: AsRef<str>>(
    m: &MachineDescription,
    probes: &[S],
    depth: usize,
) -> Result<NormReport, EvalError> {
    if m.kind() != MachineKind::Quantum {
        return Err(EvalError::WrongKind { expected: "quantum", found: m.kind() });
    }
    if depth == 0 {
        return Err(EvalError::DepthZero);
    }

    let mut reachable: BTreeSet<Configuration> = BTreeSet::new();
    let mut images: BTreeMap<Configuration, BTreeMap<Configuration, Complex64>> = BTreeMap::new();
    let mut absorbed_hits: BTreeSet<(Configuration, Configuration)> = BTreeSet::new();

    for probe in probes {
        let mut level: BTreeSet<Configuration> = BTreeSet::from([m.initial_configuration(probe.as_ref())?]);
        for k in 0..=depth {
            for c in &level {
                reachable.insert(c.clone());
                if m.status(c) == ConfigStatus::Active && !images.contains_key(c) {
                    images.insert(c.clone(), image(m, c));
                }
            }
            for c in level.iter().filter(|c| m.status(c) == ConfigStatus::Active) {
                for target in images[c].keys() {
                    if m.status(target) != ConfigStatus::Active && level.contains(target) {
                        absorbed_hits.insert((c.clone(), target.clone()));
                    }
                }
            }
            if k == depth {
                break;
            }
            level = level
                .iter()
                .flat_map(|c| match m.status(c) {
                    ConfigStatus::Active => images[c].keys().cloned().collect::<Vec<_>>(),
                    _ => vec![c.clone()],
                })
                .collect();
        }
    }

    let mut violations = Vec::new();
    let columns: Vec<&Configuration> = images.keys().collect();
    for c in &columns {
        let norm_sq: f64 = images[*c].values().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > EPS_NORM {
            violations.push(NormViolation::ColumnNorm { config: (*c).clone(), norm_sq });
        }
    }

    // Off-diagonal Gram entries only arise between columns sharing a row.
    let mut rows: BTreeMap<&Configuration, Vec<(usize, Complex64)>> = BTreeMap::new();
    for (j, c) in columns.iter().enumerate() {
        for (target, amp) in &images[*c] {
            rows.entry(target).or_default().push((j, *amp));
        }
    }
    let mut gram: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
    for entries in rows.values() {
        for (x, &(i, a)) in entries.iter().enumerate() {
            for &(j, b) in &entries[x + 1..] {
                *gram.entry((i, j)).or_default() += a.conj() * b;
            }
        }
    }
    for ((i, j), g) in gram {
        if g.norm() >= EPS_NORM {
            violations.push(NormViolation::ColumnOverlap {
                first: columns[i].clone(),
                second: columns[j].clone(),
                overlap: g.norm(),
            });
        }
    }

    for (active, absorbed) in absorbed_hits {
        let overlap = images[&active][&absorbed].norm();
        if overlap >= EPS_NORM {
            violations.push(NormViolation::AbsorbedOverlap { active, absorbed, overlap });
        }
    }

    Ok(NormReport { reachable: reachable.len(), columns: columns.len(), violations })
}

fn image(m: &MachineDescription, c: &Configuration) -> BTreeMap<Configuration, Complex64> {
    let mut out: BTreeMap<Configuration, Complex64> = BTreeMap::new();
    for r in m.rules_for(c.state(), c.scanned(m.blank())) {
        *out.entry(c.apply(r, m.blank())).or_default() += r.weight.as_complex();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{Direction, MachineSpec, RuleSpec, Weight};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn amp(re: f64, im: f64) -> Weight {
        Weight::Amplitude(Complex64::new(re, im))
    }

    fn quantum(states: &[&str], halt: &str, rules: Vec<RuleSpec>) -> MachineDescription {
        MachineSpec {
            kind: MachineKind::Quantum,
            alphabet: vec!["0".into(), "1".into(), "_".into()],
            blank: "_".into(),
            states: states.iter().map(|s| s.to_string()).collect(),
            start: "q0".into(),
            halt: halt.into(),
            rules,
        }
        .build()
        .unwrap()
    }

    fn sqrt_not_rules(from: &str, to: &str) -> Vec<RuleSpec> {
        let h = FRAC_1_SQRT_2;
        vec![
            RuleSpec::new(from, "0", to, "0", Direction::Nothing, amp(0.0, h)),
            RuleSpec::new(from, "0", to, "1", Direction::Nothing, amp(h, 0.0)),
            RuleSpec::new(from, "1", to, "0", Direction::Nothing, amp(h, 0.0)),
            RuleSpec::new(from, "1", to, "1", Direction::Nothing, amp(0.0, h)),
        ]
    }

    fn coin(weights: &[f64]) -> MachineDescription {
        MachineSpec {
            kind: MachineKind::Probabilistic,
            alphabet: vec!["0".into(), "1".into(), "_".into()],
            blank: "_".into(),
            states: vec!["q0".into(), "qh".into()],
            start: "q0".into(),
            halt: "qh".into(),
            rules: weights
                .iter()
                .zip(["0", "1"])
                .map(|(&w, s)| RuleSpec::new("q0", "_", "qh", s, Direction::Nothing, Weight::Probability(w)))
                .collect(),
        }
        .build()
        .unwrap()
    }

    #[test]
    fn fair_coin_is_stochastic() {
        let report = validate_stochastic(&coin(&[0.5, 0.5])).unwrap();
        assert!(report.passed());
        assert_eq!(report.sums.len(), 1);
        assert!(validate_stochastic(&coin(&[1.0])).unwrap().passed());
    }

    #[test]
    fn overweight_coin_fails_with_its_sum() {
        let report = validate_stochastic(&coin(&[0.5, 0.6])).unwrap();
        assert!(!report.passed());
        let bad: Vec<_> = report.failures().collect();
        assert_eq!(bad.len(), 1);
        assert!((bad[0].sum - 1.1).abs() < 1e-12);
    }

    #[test]
    fn stochastic_check_rejects_quantum_machine() {
        let m = quantum(&["q0", "qh"], "qh", sqrt_not_rules("q0", "qh"));
        assert!(matches!(validate_stochastic(&m), Err(EvalError::WrongKind { .. })));
    }

    #[test]
    fn sqrt_not_is_norm_preserving() {
        let m = quantum(&["q0", "qh"], "qh", sqrt_not_rules("q0", "qh"));
        let report = validate_norm_preserving(&m, &["0", "1"], 2).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.columns, 2);

        let mut rules = sqrt_not_rules("q0", "q1");
        rules.extend(sqrt_not_rules("q1", "qh"));
        let twice = quantum(&["q0", "q1", "qh"], "qh", rules);
        let report = validate_norm_preserving(&twice, &["0", "1", ""], 4).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.columns, 4);
    }

    #[test]
    fn collapsing_machine_is_rejected() {
        let h = FRAC_1_SQRT_2;
        let rules = vec![
            RuleSpec::new("q0", "0", "q1", "0", Direction::Nothing, amp(h, 0.0)),
            RuleSpec::new("q0", "0", "q1", "1", Direction::Nothing, amp(h, 0.0)),
            RuleSpec::new("q0", "1", "q1", "0", Direction::Nothing, amp(h, 0.0)),
            RuleSpec::new("q0", "1", "q1", "1", Direction::Nothing, amp(h, 0.0)),
        ];
        let m = quantum(&["q0", "q1"], "q1", rules);
        let report = validate_norm_preserving(&m, &["0", "1"], 2).unwrap();
        assert_eq!(report.violations.len(), 1);
        match &report.violations[0] {
            NormViolation::ColumnOverlap { first, second, overlap } => {
                assert!((overlap - 1.0).abs() < 1e-12);
                assert_eq!(m.tape_string(first), "0");
                assert_eq!(m.tape_string(second), "1");
            }
            other => panic!("unexpected violation {other:?}"),
        }
    }

    #[test]
    fn identity_column_passes() {
        let rules = vec![RuleSpec::new("q0", "0", "qh", "0", Direction::Nothing, amp(1.0, 0.0))];
        let m = quantum(&["q0", "qh"], "qh", rules);
        assert!(validate_norm_preserving(&m, &["0"], 1).unwrap().passed());
    }

    #[test]
    fn short_column_is_rejected() {
        let rules = vec![RuleSpec::new("q0", "0", "qh", "0", Direction::Nothing, amp(0.5, 0.0))];
        let m = quantum(&["q0", "qh"], "qh", rules);
        let report = validate_norm_preserving(&m, &["0"], 1).unwrap();
        assert!(matches!(
            report.violations.as_slice(),
            [NormViolation::ColumnNorm { norm_sq, .. }] if (norm_sq - 0.25).abs() < 1e-15
        ));
    }

    #[test]
    fn feeding_a_coexisting_halted_branch_is_rejected() {
        // From input "0", the first step splits into a halted branch on tape
        // "1" and an active branch in q1 that then also writes "1" and halts.
        let h = FRAC_1_SQRT_2;
        let rules = vec![
            RuleSpec::new("q0", "0", "qh", "1", Direction::Nothing, amp(h, 0.0)),
            RuleSpec::new("q0", "0", "q1", "0", Direction::Nothing, amp(h, 0.0)),
            RuleSpec::new("q1", "0", "qh", "1", Direction::Nothing, amp(1.0, 0.0)),
        ];
        let m = quantum(&["q0", "q1", "qh"], "qh", rules);
        let report = validate_norm_preserving(&m, &["0"], 2).unwrap();
        assert!(report.violations.iter().any(|v| matches!(v, NormViolation::AbsorbedOverlap { .. })));
    }

    #[test]
    fn depth_and_kind_errors() {
        let m = quantum(&["q0", "qh"], "qh", sqrt_not_rules("q0", "qh"));
        assert_eq!(validate_norm_preserving(&m, &["0"], 0), Err(EvalError::DepthZero));
        assert!(matches!(
            validate_norm_preserving(&coin(&[1.0]), &["0"], 1),
            Err(EvalError::WrongKind { .. })
        ));
    }
}
