//! Command-line front end: validate machine files, run and evolve them,
//! list computation paths, sample runs and play Deutsch's problem.
//!
//! Exit codes are part of the interface:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success (`run`: halted) |
//! | 1 | machine failed validation |
//! | 2 | unreadable or malformed file, bad arguments or input |
//! | 3 | `run`: machine got stuck |
//! | 4 | `run`: step limit reached |
//! | 5 | machine kind does not fit the subcommand |
//! | 6 | `paths`: path budget exceeded (partial output printed) |

pub mod render;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use qtm_core::{
    aggregate_paths, deutsch_decide, enumerate_paths, evolve, parse_machine, run_deterministic, sample_run,
    sample_run_with, validate_norm_preserving, validate_stochastic, BooleanFunctionTable, EvalError,
    MachineDescription, MachineKind, NormViolation, PathRecord, RunStatus, WeightKind, DEFAULT_MAX_PATHS,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qtm_core::format_real;

use crate::render::{format_weight, records_text, state_table, TABLE_DIGITS};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_STUCK: u8 = 3;
pub const EXIT_STEP_LIMIT: u8 = 4;
pub const EXIT_WRONG_KIND: u8 = 5;
pub const EXIT_PATH_BUDGET: u8 = 6;

#[derive(Debug, Parser)]
#[command(name = "qtm", version, about = "Deterministic, probabilistic and quantum Turing machine simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Records,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a machine file and check it is well-formed for its kind.
    Validate {
        file: PathBuf,
        /// Probe input for the unitarity check (repeatable).
        #[arg(long = "probe")]
        probes: Vec<String>,
        /// Steps explored from each probe.
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Run a deterministic machine.
    Run {
        file: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
    },
    /// Probability distribution of a probabilistic machine after n steps.
    Dist {
        file: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Amplitudes of a quantum machine after n steps.
    Amps {
        file: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Every branch of the computation tree and the per-configuration sums.
    Paths {
        file: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_PATHS)]
        max_paths: usize,
    },
    /// Decide whether f: {0,1} -> {0,1} is constant or balanced with one query.
    Deutsch {
        /// The table f(0),f(1), e.g. `0,1`.
        #[arg(long = "f")]
        table: String,
    },
    /// Follow randomly chosen branches of a probabilistic machine.
    Sample {
        file: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: usize,
    },
}

/// Captured result of one command.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn fail(code: u8, message: impl Into<String>) -> Output {
        let mut stderr = message.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        Output { code, stdout: String::new(), stderr }
    }
}

pub fn execute(cli: &Cli) -> Output {
    match &cli.command {
        Command::Validate { file, probes, depth } => validate(file, probes, *depth),
        Command::Run { file, input, max_steps } => run(file, input, *max_steps),
        Command::Dist { file, input, steps, format } => {
            weighted(file, input, *steps, *format, MachineKind::Probabilistic)
        }
        Command::Amps { file, input, steps, format } => {
            weighted(file, input, *steps, *format, MachineKind::Quantum)
        }
        Command::Paths { file, input, steps, max_paths } => paths(file, input, *steps, *max_paths),
        Command::Deutsch { table } => deutsch(table),
        Command::Sample { file, input, max_steps, seed, trials } => {
            sample(file, input, *max_steps, *seed, *trials)
        }
    }
}

fn load(file: &Path) -> Result<MachineDescription, Output> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| Output::fail(EXIT_PARSE, format!("{}: {e}", file.display())))?;
    parse_machine(&text).map_err(|diags| {
        let mut msg = String::new();
        for d in diags {
            let _ = writeln!(msg, "{}:{d}", file.display());
        }
        Output::fail(EXIT_PARSE, msg)
    })
}

fn eval_failure(e: EvalError) -> Output {
    let code = match e {
        EvalError::WrongKind { .. } => EXIT_WRONG_KIND,
        EvalError::ValidationFailed(_) => EXIT_INVALID,
        _ => EXIT_PARSE,
    };
    Output::fail(code, format!("error: {e}"))
}

fn wrong_kind(m: &MachineDescription, wanted: &str, hint: &str) -> Output {
    Output::fail(EXIT_WRONG_KIND, format!("error: this is a {} machine; {wanted}. {hint}", m.kind()))
}

fn hint_for(kind: MachineKind) -> &'static str {
    match kind {
        MachineKind::Deterministic => "use `run`",
        MachineKind::Probabilistic => "use `dist` or `sample`",
        MachineKind::Quantum => "use `amps`",
    }
}

const DEFAULT_PROBES: [&str; 3] = ["0", "1", ""];

fn validate(file: &Path, probes: &[String], depth: usize) -> Output {
    let m = match load(file) {
        Ok(m) => m,
        Err(out) => return out,
    };
    let mut out = String::new();
    let _ = writeln!(out, "{}: {} machine, {} rules", file.display(), m.kind(), m.rules().len());
    let passed = match m.kind() {
        MachineKind::Deterministic => true,
        MachineKind::Probabilistic => {
            let report = validate_stochastic(&m).expect("kind checked");
            for s in &report.sums {
                let _ = writeln!(
                    out,
                    "  ({}, {}) outgoing sum {}{}",
                    m.state_name(s.state),
                    m.symbol_name(s.symbol),
                    format_real(s.sum, TABLE_DIGITS),
                    if s.ok() { "" } else { "  FAIL" }
                );
            }
            report.passed()
        }
        MachineKind::Quantum => {
            let probes: Vec<String> = if probes.is_empty() {
                DEFAULT_PROBES.iter().filter(|p| m.parse_tape(p).is_ok()).map(|p| p.to_string()).collect()
            } else {
                probes.to_vec()
            };
            let report = match validate_norm_preserving(&m, &probes, depth) {
                Ok(r) => r,
                Err(e) => return eval_failure(e),
            };
            let shown: Vec<String> = probes.iter().map(|p| format!("{p:?}")).collect();
            let _ = writeln!(
                out,
                "  probes {} depth {}: {} reachable configurations, {} columns checked",
                shown.join(" "),
                depth,
                report.reachable,
                report.columns
            );
            for v in &report.violations {
                let _ = match v {
                    NormViolation::ColumnNorm { config, norm_sq } => writeln!(
                        out,
                        "  column {}: squared norm {}",
                        m.describe(config),
                        format_real(*norm_sq, TABLE_DIGITS)
                    ),
                    NormViolation::ColumnOverlap { first, second, overlap } => writeln!(
                        out,
                        "  columns {} and {}: |<a|b>| = {}",
                        m.describe(first),
                        m.describe(second),
                        format_real(*overlap, TABLE_DIGITS)
                    ),
                    NormViolation::AbsorbedOverlap { active, absorbed, overlap } => writeln!(
                        out,
                        "  column {} feeds absorbed {} at the same depth: |amplitude| = {}",
                        m.describe(active),
                        m.describe(absorbed),
                        format_real(*overlap, TABLE_DIGITS)
                    ),
                };
            }
            report.passed()
        }
    };
    out.push_str(if passed { "ok\n" } else { "FAILED\n" });
    Output { code: if passed { EXIT_OK } else { EXIT_INVALID }, stdout: out, stderr: String::new() }
}

fn plural(n: usize) -> &'static str {
    if n == 1 {
        ""
    } else {
        "s"
    }
}

fn run(file: &Path, input: &str, max_steps: usize) -> Output {
    let m = match load(file) {
        Ok(m) => m,
        Err(out) => return out,
    };
    if m.kind() != MachineKind::Deterministic {
        return wrong_kind(&m, "`run` needs a deterministic machine", hint_for(m.kind()));
    }
    let outcome = match run_deterministic(&m, input, max_steps) {
        Ok(o) => o,
        Err(e) => return eval_failure(e),
    };
    let mut out = String::new();
    let _ = writeln!(out, "{} after {} step{}", outcome.status.name(), outcome.steps, plural(outcome.steps));
    let _ = writeln!(out, "state: {}", m.state_name(outcome.config.state()));
    let _ = writeln!(out, "head: {}", outcome.config.head());
    let _ = writeln!(out, "tape: {}", m.tape_string(&outcome.config));
    let code = match outcome.status {
        RunStatus::Halted => EXIT_OK,
        RunStatus::Stuck => EXIT_STUCK,
        RunStatus::StepLimit => EXIT_STEP_LIMIT,
    };
    Output { code, stdout: out, stderr: String::new() }
}

fn weighted(file: &Path, input: &str, steps: usize, format: Format, kind: MachineKind) -> Output {
    let m = match load(file) {
        Ok(m) => m,
        Err(out) => return out,
    };
    if m.kind() != kind {
        let cmd = if kind == MachineKind::Quantum { "amps" } else { "dist" };
        return wrong_kind(&m, &format!("`{cmd}` needs a {kind} machine"), hint_for(m.kind()));
    }
    let ws = match evolve(&m, input, steps) {
        Ok(ws) => ws,
        Err(e) => return eval_failure(e),
    };
    let stdout = match format {
        Format::Records => records_text(&m, &ws),
        Format::Table => {
            let mut s = state_table(&m, &ws);
            let _ = writeln!(s, "total probability {}", format_real(ws.total_probability(), TABLE_DIGITS));
            s
        }
    };
    Output { code: EXIT_OK, stdout, stderr: String::new() }
}

fn paths(file: &Path, input: &str, steps: usize, max_paths: usize) -> Output {
    let m = match load(file) {
        Ok(m) => m,
        Err(out) => return out,
    };
    let (list, truncated) = match enumerate_paths(&m, input, steps, max_paths) {
        Ok(list) => (list, false),
        Err(EvalError::PathBudgetExceeded { partial, .. }) => (partial, true),
        Err(e) => return eval_failure(e),
    };
    let kind = WeightKind::of(m.kind());
    let mut out = String::new();
    out.push_str("rules:\n");
    let used: std::collections::BTreeSet<usize> =
        list.iter().flat_map(|p| p.rule_indices().flatten()).collect();
    for i in used {
        let r = &m.rules()[i];
        let _ = writeln!(
            out,
            "  #{i}: {} {} -> {} {} {}  {}",
            m.state_name(r.from),
            m.symbol_name(r.read),
            m.state_name(r.to),
            m.symbol_name(r.write),
            r.direction.letter(),
            format_weight(kind, r.weight.as_complex(), TABLE_DIGITS)
        );
    }
    let rows: Vec<Vec<String>> = list.iter().enumerate().map(|(i, p)| path_row(&m, kind, i, p)).collect();
    let _ = writeln!(out, "paths: {}{}", list.len(), if truncated { " (truncated)" } else { "" });
    out.push_str(&render::table(&["path", "rules", "weight", "final"], &rows));

    if truncated {
        return Output {
            code: EXIT_PATH_BUDGET,
            stdout: out,
            stderr: format!("error: more than {max_paths} paths; output truncated\n"),
        };
    }
    if let Ok(ws) = aggregate_paths(&list) {
        out.push_str("aggregate:\n");
        // Entries that cancelled are shown explicitly with weight 0.
        let mut finals: BTreeMap<&qtm_core::Configuration, usize> = BTreeMap::new();
        for p in &list {
            *finals.entry(p.final_config()).or_default() += 1;
        }
        let rows: Vec<Vec<String>> = finals
            .iter()
            .map(|(c, n)| {
                let w = ws.weight(c);
                vec![
                    m.describe(c),
                    n.to_string(),
                    format_weight(kind, w, TABLE_DIGITS),
                    format_real(ws.probability(c), TABLE_DIGITS),
                ]
            })
            .collect();
        out.push_str(&render::table(&["final", "paths", "sum", "prob"], &rows));
    }
    Output { code: EXIT_OK, stdout: out, stderr: String::new() }
}

fn path_row(m: &MachineDescription, kind: WeightKind, i: usize, p: &PathRecord) -> Vec<String> {
    let rules: Vec<String> =
        p.rule_indices().map(|r| r.map_or_else(|| "-".to_string(), |i| format!("#{i}"))).collect();
    vec![
        (i + 1).to_string(),
        rules.join(" "),
        format_weight(kind, p.weight, TABLE_DIGITS),
        m.describe(p.final_config()),
    ]
}

fn deutsch(table: &str) -> Output {
    let values: Result<Vec<u64>, _> = table
        .split(',')
        .map(|v| match v.trim() {
            "0" => Ok(0),
            "1" => Ok(1),
            other => Err(format!("table entries must be 0 or 1, found `{other}`")),
        })
        .collect();
    let values = match values {
        Ok(v) if v.len() == 2 => v,
        Ok(v) => {
            return Output::fail(
                EXIT_PARSE,
                format!("error: need exactly two values f(0),f(1), got {}", v.len()),
            )
        }
        Err(e) => return Output::fail(EXIT_PARSE, format!("error: {e}")),
    };
    let f = BooleanFunctionTable::new(1, 1, values.clone()).expect("validated table");
    let report = deutsch_decide(&f).expect("1-bit table");
    let mut out = String::new();
    let _ = writeln!(out, "f(0)={} f(1)={}", values[0], values[1]);
    let _ = writeln!(out, "P(output 0) = {}", format_real(report.p_zero, TABLE_DIGITS));
    let _ = writeln!(out, "P(output 1) = {}", format_real(report.p_one, TABLE_DIGITS));
    let _ = writeln!(out, "verdict: {}", report.verdict.name());
    let _ = writeln!(out, "oracle calls: {}", report.oracle_calls);
    Output { code: EXIT_OK, stdout: out, stderr: String::new() }
}

fn sample(file: &Path, input: &str, max_steps: usize, seed: u64, trials: usize) -> Output {
    let m = match load(file) {
        Ok(m) => m,
        Err(out) => return out,
    };
    if m.kind() != MachineKind::Probabilistic {
        return wrong_kind(&m, "`sample` needs a probabilistic machine", hint_for(m.kind()));
    }
    let mut out = String::new();
    if trials <= 1 {
        let run = match sample_run(&m, input, max_steps, seed) {
            Ok(r) => r,
            Err(e) => return eval_failure(e),
        };
        let root = m.initial_configuration(input).expect("input checked by sample_run");
        let _ = writeln!(out, "step 0: {}", m.describe(&root));
        for (i, step) in run.trajectory.iter().enumerate() {
            let rule = step.rule.map_or_else(|| "-".to_string(), |r| format!("#{r}"));
            let _ = writeln!(out, "step {}: {} {}", i + 1, rule, m.describe(&step.config));
        }
        let o = &run.outcome;
        let _ = writeln!(out, "{} after {} step{}", o.status.name(), o.steps, plural(o.steps));
        let _ = writeln!(out, "tape: {}", m.tape_string(&o.config));
        return Output { code: EXIT_OK, stdout: out, stderr: String::new() };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<(&'static str, String, String), usize> = BTreeMap::new();
    for _ in 0..trials {
        let run = match sample_run_with(&m, input, max_steps, &mut rng) {
            Ok(r) => r,
            Err(e) => return eval_failure(e),
        };
        let o = run.outcome;
        let key = (o.status.name(), m.state_name(o.config.state()).to_string(), m.tape_string(&o.config));
        *counts.entry(key).or_default() += 1;
    }
    let mut rows: Vec<_> = counts.into_iter().collect();
    rows.sort_by_key(|r| std::cmp::Reverse(r.1));
    let rows: Vec<Vec<String>> = rows
        .into_iter()
        .map(|((status, state, tape), n)| {
            vec![
                status.to_string(),
                state,
                tape,
                n.to_string(),
                format_real(n as f64 / trials as f64, TABLE_DIGITS),
            ]
        })
        .collect();
    let _ = writeln!(out, "trials: {trials} seed: {seed}");
    out.push_str(&render::table(&["status", "state", "tape", "count", "freq"], &rows));
    Output { code: EXIT_OK, stdout: out, stderr: String::new() }
}
