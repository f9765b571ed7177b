//! Single-branch Monte Carlo runs of probabilistic machines.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::EvalError;
use crate::evolution::{RunOutcome, RunStatus};
use crate::machine::{ConfigStatus, MachineDescription, MachineKind};
use crate::paths::PathStep;
use crate::validate::ensure_stochastic;

/// A sampled run together with the branch it followed.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledRun {
    pub outcome: RunOutcome,
    pub trajectory: Vec<PathStep>,
}

/// Follows one randomly chosen branch, seeding a ChaCha8 generator with
/// `seed`. Equal seeds give equal trajectories on every platform.
pub fn sample_run(
    m: &MachineDescription,
    input: &str,
    max_steps: usize,
    seed: u64,
) -> Result<SampledRun, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_run_with(m, input, max_steps, &mut rng)
}

/// Like [`sample_run`], drawing from a caller-supplied generator so that
/// repeated trials can share one stream.
///
/// Each step draws `u` uniformly from `[0, 1)` and takes the first rule, in
/// canonical order, whose cumulative probability exceeds `u`.
pub fn sample_run_with<R: Rng + ?Sized>(
    m: &MachineDescription,
    input: &str,
    max_steps: usize,
    rng: &mut R,
) -> Result<SampledRun, EvalError> {
    if m.kind() != MachineKind::Probabilistic {
        return Err(EvalError::WrongKind { expected: "probabilistic", found: m.kind() });
    }
    ensure_stochastic(m)?;

    let mut config = m.initial_configuration(input)?;
    let mut trajectory = Vec::new();
    let status = loop {
        match m.status(&config) {
            ConfigStatus::Halted => break RunStatus::Halted,
            ConfigStatus::Stuck => break RunStatus::Stuck,
            ConfigStatus::Active if trajectory.len() == max_steps => break RunStatus::StepLimit,
            ConfigStatus::Active => {}
        }
        let range = m.rule_range(config.state(), config.scanned(m.blank()));
        let u: f64 = rng.gen();
        let mut cumulative = 0.0;
        let mut chosen = range.end - 1;
        for i in range {
            cumulative += m.rules()[i].weight.as_complex().re;
            if u < cumulative {
                chosen = i;
                break;
            }
        }
        config = config.apply(&m.rules()[chosen], m.blank());
        trajectory.push(PathStep { rule: Some(chosen), config: config.clone() });
    };
    let steps = trajectory.len();
    Ok(SampledRun { outcome: RunOutcome { status, config, steps }, trajectory })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::run_deterministic;
    use crate::machine::{Direction, MachineSpec, RuleSpec, Weight};

    fn coin() -> MachineDescription {
        let p = Weight::Probability(0.5);
        MachineSpec {
            kind: MachineKind::Probabilistic,
            alphabet: vec!["0".into(), "1".into(), "_".into()],
            blank: "_".into(),
            states: vec!["q0".into(), "qh".into()],
            start: "q0".into(),
            halt: "qh".into(),
            rules: vec![
                RuleSpec::new("q0", "_", "qh", "0", Direction::Nothing, p),
                RuleSpec::new("q0", "_", "qh", "1", Direction::Nothing, p),
            ],
        }
        .build()
        .unwrap()
    }

    #[test]
    fn same_seed_same_trajectory() {
        let m = coin();
        let a = sample_run(&m, "", 10, 42).unwrap();
        let b = sample_run(&m, "", 10, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.outcome.status, RunStatus::Halted);
        assert_eq!(a.trajectory.len(), 1);
    }

    #[test]
    fn single_branch_matches_deterministic_run() {
        let det = MachineSpec {
            kind: MachineKind::Deterministic,
            alphabet: vec!["0".into(), "1".into(), "_".into()],
            blank: "_".into(),
            states: vec!["q0".into(), "qh".into()],
            start: "q0".into(),
            halt: "qh".into(),
            rules: vec![
                RuleSpec::new("q0", "1", "q0", "0", Direction::Right, Weight::Unit),
                RuleSpec::new("q0", "0", "qh", "1", Direction::Nothing, Weight::Unit),
                RuleSpec::new("q0", "_", "qh", "1", Direction::Nothing, Weight::Unit),
            ],
        }
        .build()
        .unwrap();
        let ptm = det.retagged(MachineKind::Probabilistic).unwrap();
        for seed in 0..5 {
            let sampled = sample_run(&ptm, "1101", 50, seed).unwrap();
            assert_eq!(sampled.outcome, run_deterministic(&det, "1101", 50).unwrap());
        }
        let capped = sample_run(&ptm, "111", 2, 0).unwrap();
        assert_eq!(capped.outcome.status, RunStatus::StepLimit);
        assert_eq!(capped.outcome.steps, 2);
    }

    #[test]
    fn coin_frequency_over_seeds() {
        let m = coin();
        let zero = m.symbol("0").unwrap();
        let n = 10_000;
        let zeros = (0..n)
            .filter(|&seed| {
                let run = sample_run(&m, "", 5, seed).unwrap();
                run.outcome.config.read(0, m.blank()) == zero
            })
            .count();
        let freq = zeros as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 0.02, "frequency {freq}");
    }

    #[test]
    fn rejects_non_probabilistic() {
        let q = MachineSpec {
            kind: MachineKind::Deterministic,
            alphabet: vec!["_".into()],
            blank: "_".into(),
            states: vec!["q0".into()],
            start: "q0".into(),
            halt: "q0".into(),
            rules: vec![],
        }
        .build()
        .unwrap();
        assert!(matches!(sample_run(&q, "", 1, 0), Err(EvalError::WrongKind { .. })));
    }
}
