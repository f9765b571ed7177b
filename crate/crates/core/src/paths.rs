//! Explicit enumeration of computation-tree branches and their aggregation.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::EvalError;
use crate::evolution::{WeightKind, WeightedState};
use crate::machine::{Configuration, MachineDescription};

/// Default branch budget for [`enumerate_paths`].
pub const DEFAULT_MAX_PATHS: usize = 1_000_000;

/// One step of a branch. `rule` is the canonical index of the applied rule,
/// or `None` when a halted or stuck configuration is carried forward.
#[derive(Debug, Clone, PartialEq)]
pub struct PathStep {
    pub rule: Option<usize>,
    pub config: Configuration,
}

/// A root-to-leaf branch of the computation tree and the product of the
/// weights along it.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub kind: WeightKind,
    pub root: Configuration,
    pub steps: Vec<PathStep>,
    pub weight: Complex64,
}

impl PathRecord {
    pub fn final_config(&self) -> &Configuration {
        self.steps.last().map_or(&self.root, |s| &s.config)
    }

    /// Rule indices along the branch.
    pub fn rule_indices(&self) -> impl Iterator<Item = Option<usize>> + '_ {
        self.steps.iter().map(|s| s.rule)
    }

    /// Recomputes the cumulative weight from the rules.
    pub fn product(&self, m: &MachineDescription) -> Complex64 {
        self.rule_indices().flatten().map(|i| m.rules()[i].weight.as_complex()).product()
    }
}

/// Every branch of depth `steps`, in lexicographic order of rule indices.
/// Halted and stuck branches are padded with self-loops of weight 1.
///
/// If more than `max_paths` branches exist the first `max_paths` are
/// returned inside [`EvalError::PathBudgetExceeded`].
pub fn enumerate_paths(
    m: &MachineDescription,
    input: &str,
    steps: usize,
    max_paths: usize,
) -> Result<Vec<PathRecord>, EvalError> {
    let root = m.initial_configuration(input)?;
    let mut walker = Walker {
        m,
        kind: WeightKind::of(m.kind()),
        root: root.clone(),
        depth: steps,
        max_paths,
        trail: Vec::with_capacity(steps),
        out: Vec::new(),
        overflow: false,
    };
    walker.descend(&root, Complex64::new(1.0, 0.0));
    if walker.overflow {
        Err(EvalError::PathBudgetExceeded { limit: max_paths, partial: walker.out })
    } else {
        Ok(walker.out)
    }
}

struct Walker<'a> {
    m: &'a MachineDescription,
    kind: WeightKind,
    root: Configuration,
    depth: usize,
    max_paths: usize,
    trail: Vec<PathStep>,
    out: Vec<PathRecord>,
    overflow: bool,
}

impl Walker<'_> {
    fn descend(&mut self, at: &Configuration, weight: Complex64) {
        if self.overflow {
            return;
        }
        if self.trail.len() == self.depth {
            if self.out.len() == self.max_paths {
                self.overflow = true;
                return;
            }
            self.out.push(PathRecord {
                kind: self.kind,
                root: self.root.clone(),
                steps: self.trail.clone(),
                weight,
            });
            return;
        }
        let m = self.m;
        let range = m.rule_range(at.state(), at.scanned(m.blank()));
        if at.state() == m.halt() || range.is_empty() {
            self.trail.push(PathStep { rule: None, config: at.clone() });
            self.descend(at, weight);
            self.trail.pop();
            return;
        }
        for i in range {
            let rule = &m.rules()[i];
            let next = at.apply(rule, m.blank());
            self.trail.push(PathStep { rule: Some(i), config: next.clone() });
            self.descend(&next, weight * rule.weight.as_complex());
            self.trail.pop();
        }
    }
}

/// Groups branches by final configuration and sums their weights in the
/// order given. Entries that cancel below the pruning threshold vanish.
pub fn aggregate_paths(paths: &[PathRecord]) -> Result<WeightedState, EvalError> {
    let first = paths.first().ok_or(EvalError::NoPaths)?;
    let mut sums: BTreeMap<Configuration, Complex64> = BTreeMap::new();
    for p in paths {
        if p.root != first.root || p.kind != first.kind {
            return Err(EvalError::MixedRoots);
        }
        if p.steps.len() != first.steps.len() {
            return Err(EvalError::RaggedPaths);
        }
        *sums.entry(p.final_config().clone()).or_default() += p.weight;
    }
    Ok(WeightedState::from_entries(first.kind, sums))
}
