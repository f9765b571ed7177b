//! The `.qtm` machine-definition format.
//!
//! ```text
//! # fair coin
//! kind: probabilistic
//! alphabet: 0 1 _
//! blank: _
//! states: q0 qh
//! start: q0
//! halt: qh
//! rule: q0 _ -> qh 0 N 0.5
//! rule: q0 _ -> qh 1 N 0.5
//! ```
//!
//! Headers come first, each exactly once; `format: 1` is optional. Rule
//! weights are omitted for deterministic machines, a real for probabilistic
//! ones and `(re, im)` for quantum ones. Reals may also be written as
//! `1/sqrt(2)` or `-1/sqrt(2)`.

use std::fmt;

use num_complex::Complex64;

use crate::error::BuildError;
use crate::machine::{Direction, MachineDescription, MachineKind, MachineSpec, RuleSpec, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A located message about the source text. Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub severity: Severity,
}

impl SourceDiagnostic {
    fn error(line: usize, column: usize, message: impl Into<String>) -> Self {
        SourceDiagnostic { line, column, message: message.into(), severity: Severity::Error }
    }

    fn warning(line: usize, column: usize, message: impl Into<String>) -> Self {
        SourceDiagnostic { line, column, message: message.into(), severity: Severity::Warning }
    }
}

impl fmt::Display for SourceDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {}: {}", self.line, self.column, level, self.message)
    }
}

const HEADERS: [&str; 7] = ["format", "kind", "alphabet", "blank", "states", "start", "halt"];

#[derive(Default)]
struct Headers<'a> {
    values: [Option<(usize, usize, &'a str)>; 7],
}

struct RawRule<'a> {
    line: usize,
    tokens: Vec<(usize, &'a str)>,
    weight: Option<(usize, &'a str)>,
}

/// Parses a machine file. On failure every problem is reported, one
/// diagnostic per offending line, and warnings are dropped.
pub fn parse_machine(text: &str) -> Result<MachineDescription, Vec<SourceDiagnostic>> {
    let mut diags = Vec::new();
    let mut headers = Headers::default();
    let mut raw_rules: Vec<RawRule> = Vec::new();
    // Headers present but already diagnosed; not reported again as missing.
    let mut broken = [false; 7];

    for (i, raw_line) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if let Some(pos) = line.find(|c: char| !c.is_ascii()) {
            let col = line[..pos].chars().count() + 1;
            diags.push(SourceDiagnostic::error(line_no, col, "non-ASCII character"));
            if let Some(slot) =
                line.split_once(':').and_then(|(k, _)| HEADERS.iter().position(|h| *h == k.trim()))
            {
                broken[slot] = true;
            }
            continue;
        }
        let content = match line.find('#') {
            Some(p) => &line[..p],
            None => line,
        };
        if content.trim().is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let Some(colon) = content.find(':') else {
            diags.push(SourceDiagnostic::error(line_no, indent + 1, "expected `key: value`"));
            continue;
        };
        let key = content[..colon].trim();
        let value_start = colon + 1 + (content[colon + 1..].len() - content[colon + 1..].trim_start().len());
        let value = content[colon + 1..].trim();

        if key == "rule" {
            raw_rules.push(split_rule(line_no, content, value_start));
            continue;
        }
        let Some(slot) = HEADERS.iter().position(|h| *h == key) else {
            diags.push(SourceDiagnostic::error(line_no, indent + 1, format!("unknown key `{key}`")));
            continue;
        };
        if !raw_rules.is_empty() {
            diags.push(SourceDiagnostic::error(line_no, indent + 1, format!("header `{key}` after rules")));
            continue;
        }
        if let Some((prev, _, _)) = headers.values[slot] {
            diags.push(SourceDiagnostic::error(
                line_no,
                indent + 1,
                format!("duplicate header `{key}` (first on line {prev})"),
            ));
            continue;
        }
        if value.is_empty() {
            diags.push(SourceDiagnostic::error(line_no, colon + 2, format!("header `{key}` needs a value")));
            broken[slot] = true;
            continue;
        }
        headers.values[slot] = Some((line_no, value_start + 1, value));
    }

    let header = |name: &str| headers.values[HEADERS.iter().position(|h| *h == name).unwrap()];
    if let Some((line, col, v)) = header("format") {
        if v != "1" {
            diags.push(SourceDiagnostic::error(line, col, format!("unsupported format `{v}`")));
        }
    }
    let kind = match header("kind") {
        Some((line, col, v)) => match v.parse::<MachineKind>() {
            Ok(k) => Some(k),
            Err(e) => {
                diags.push(SourceDiagnostic::error(line, col, e));
                None
            }
        },
        None => None,
    };
    let single = |name: &str, diags: &mut Vec<SourceDiagnostic>| -> Option<(usize, usize, String)> {
        let (line, col, v) = header(name)?;
        if v.split_whitespace().count() != 1 {
            diags.push(SourceDiagnostic::error(line, col, format!("`{name}` takes a single name")));
            return None;
        }
        Some((line, col, v.to_string()))
    };
    let blank = single("blank", &mut diags);
    let start = single("start", &mut diags);
    let halt = single("halt", &mut diags);
    let list = |name: &str| {
        header(name).map(|(l, c, v)| (l, c, v.split_whitespace().map(str::to_string).collect::<Vec<_>>()))
    };
    let alphabet = list("alphabet");
    let states = list("states");

    let missing: Vec<&str> = ["kind", "alphabet", "blank", "states", "start", "halt"]
        .into_iter()
        .filter(|h| header(h).is_none() && !broken[HEADERS.iter().position(|x| x == h).unwrap()])
        .collect();
    if !missing.is_empty() {
        diags.push(SourceDiagnostic::error(1, 1, format!("missing header(s): {}", missing.join(", "))));
    }

    // Syntax of rule lines can be checked even when headers are broken, as
    // long as the kind is known.
    let mut rules = Vec::new();
    let mut rule_lines = Vec::new();
    for raw in &raw_rules {
        match parse_rule(raw, kind) {
            Ok(Some(rule)) => {
                rules.push(rule);
                rule_lines.push(raw.line);
            }
            Ok(None) => {}
            Err(d) => diags.push(d),
        }
    }

    let (Some(kind), Some(alphabet), Some(states), Some(blank), Some(start), Some(halt)) =
        (kind, alphabet, states, blank, start, halt)
    else {
        return Err(sorted_errors(diags));
    };

    let spec = MachineSpec {
        kind,
        alphabet: alphabet.2.clone(),
        blank: blank.2.clone(),
        states: states.2.clone(),
        start: start.2.clone(),
        halt: halt.2.clone(),
        rules,
    };
    let mut flagged_lines = std::collections::BTreeSet::new();
    for err in spec.diagnose() {
        let (line, col) = match err.rule() {
            Some(i) => (rule_lines[i], 1),
            None => match &err {
                BuildError::DuplicateSymbol(_) | BuildError::InvalidName(_)
                    if alphabet.2.iter().any(|s| err_names(&err, s)) =>
                {
                    (alphabet.0, alphabet.1)
                }
                BuildError::DuplicateState(_) | BuildError::InvalidName(_) => (states.0, states.1),
                BuildError::UnknownSymbol { .. } => (blank.0, blank.1),
                BuildError::UnknownState { name, .. } if *name == start.2 => (start.0, start.1),
                BuildError::UnknownState { .. } => (halt.0, halt.1),
                _ => (1, 1),
            },
        };
        // One diagnostic per offending line.
        if err.rule().is_none() || flagged_lines.insert(line) {
            diags.push(SourceDiagnostic::error(line, col, err.to_string()));
        }
    }
    let errors = sorted_errors(diags);
    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(spec.build().expect("diagnosed spec builds"))
}

fn err_names(err: &BuildError, s: &str) -> bool {
    matches!(err, BuildError::DuplicateSymbol(n) | BuildError::InvalidName(n) if n == s)
}

fn sorted_errors(mut diags: Vec<SourceDiagnostic>) -> Vec<SourceDiagnostic> {
    diags.retain(|d| d.severity == Severity::Error);
    diags.sort_by_key(|d| (d.line, d.column));
    diags
}

/// Splits `q s -> q' s' d [weight]` into positioned tokens. The weight is
/// everything after the sixth token.
fn split_rule<'a>(line: usize, content: &'a str, value_start: usize) -> RawRule<'a> {
    let mut tokens = Vec::new();
    let mut pos = value_start;
    let bytes = content.as_bytes();
    while tokens.len() < 6 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos >= bytes.len() {
            break;
        }
        let begin = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        tokens.push((begin + 1, &content[begin..pos]));
    }
    let rest = &content[pos.min(content.len())..];
    let trimmed = rest.trim();
    let weight = (!trimmed.is_empty()).then(|| {
        let offset = pos + (rest.len() - rest.trim_start().len());
        (offset + 1, trimmed)
    });
    RawRule { line, tokens, weight }
}

fn parse_rule(raw: &RawRule, kind: Option<MachineKind>) -> Result<Option<RuleSpec>, SourceDiagnostic> {
    let err = |col: usize, msg: String| SourceDiagnostic::error(raw.line, col, msg);
    if raw.tokens.len() < 6 {
        let col = raw.tokens.last().map_or(1, |(c, t)| c + t.len());
        return Err(err(col, "rule needs `<q> <s> -> <q'> <s'> <L|R|N> [<weight>]`".into()));
    }
    let t = &raw.tokens;
    if t[2].1 != "->" {
        return Err(err(t[2].0, format!("expected `->`, found `{}`", t[2].1)));
    }
    let Some(direction) = Direction::from_letter(t[5].1) else {
        return Err(err(t[5].0, format!("direction must be L, R or N, found `{}`", t[5].1)));
    };
    let Some(kind) = kind else {
        return Ok(None);
    };
    let weight = match (kind, raw.weight) {
        (MachineKind::Deterministic, None) => Weight::Unit,
        (MachineKind::Deterministic, Some((col, _))) => {
            return Err(err(col, "deterministic rules take no weight".into()))
        }
        (_, None) => {
            let col = t[5].0 + 1;
            return Err(err(col, format!("{kind} rules need a weight")));
        }
        (MachineKind::Probabilistic, Some((col, w))) => {
            if w.starts_with('(') {
                return Err(err(col, "probabilistic weight must be a real number".into()));
            }
            let p = parse_real(w).ok_or_else(|| err(col, format!("invalid real `{w}`")))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(err(col, "weight out of range [0,1]".into()));
            }
            Weight::Probability(p)
        }
        (MachineKind::Quantum, Some((col, w))) => {
            let c = parse_complex(w)
                .ok_or_else(|| err(col, format!("invalid amplitude `{w}`, expected `(re, im)`")))?;
            Weight::Amplitude(c)
        }
    };
    Ok(Some(RuleSpec::new(t[0].1, t[1].1, t[3].1, t[4].1, direction, weight)))
}

/// A finite decimal real, or `±1/sqrt(2)`.
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    match compact.as_str() {
        "1/sqrt(2)" | "+1/sqrt(2)" => return Some(1.0 / 2f64.sqrt()),
        "-1/sqrt(2)" => return Some(-1.0 / 2f64.sqrt()),
        _ => {}
    }
    if s.is_empty() || !s.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')) {
        return None;
    }
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_complex(s: &str) -> Option<Complex64> {
    let inner = s.strip_prefix('(')?.strip_suffix(')')?;
    let (re, im) = inner.split_once(',')?;
    Some(Complex64::new(parse_real(re)?, parse_real(im)?))
}

/// Formats `x` with `digits` significant digits in the style of C's `%g`:
/// trailing zeros are dropped and very large or small magnitudes use an
/// exponent.
pub fn format_real(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 && x.is_sign_negative() {
            "-0".into()
        } else if x == 0.0 {
            "0".into()
        } else {
            x.to_string()
        };
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        format!("{mantissa}e{exp}")
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Canonical text: headers in fixed order, rules in canonical order and
/// reals with 17 significant digits, which round-trips every `f64`.
pub fn serialize_machine(m: &MachineDescription) -> String {
    let mut out = String::new();
    out.push_str("format: 1\n");
    out.push_str(&format!("kind: {}\n", m.kind()));
    out.push_str(&format!("alphabet: {}\n", m.alphabet().join(" ")));
    out.push_str(&format!("blank: {}\n", m.symbol_name(m.blank())));
    out.push_str(&format!("states: {}\n", m.states().join(" ")));
    out.push_str(&format!("start: {}\n", m.state_name(m.start())));
    out.push_str(&format!("halt: {}\n", m.state_name(m.halt())));
    for r in m.rules() {
        out.push_str(&format!(
            "rule: {} {} -> {} {} {}",
            m.state_name(r.from),
            m.symbol_name(r.read),
            m.state_name(r.to),
            m.symbol_name(r.write),
            r.direction.letter()
        ));
        match r.weight {
            Weight::Unit => {}
            Weight::Probability(p) => out.push_str(&format!(" {}", format_real(p, 17))),
            Weight::Amplitude(c) => {
                out.push_str(&format!(" ({}, {})", format_real(c.re, 17), format_real(c.im, 17)))
            }
        }
        out.push('\n');
    }
    out
}

/// Non-fatal remarks about a machine file that parsed successfully.
pub fn lint_machine(text: &str) -> Vec<SourceDiagnostic> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.ends_with(' ') || line.ends_with('\t') {
            out.push(SourceDiagnostic::warning(i + 1, line.trim_end().len() + 1, "trailing whitespace"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const WRITE1: &str = "kind: deterministic\nalphabet: 0 1 _\nblank: _\nstates: q0 qh\nstart: q0\nhalt: qh\nrule: q0 _ -> qh 1 N\n";

    const SQRT_NOT: &str = "\
# square root of NOT
kind: quantum
alphabet: 0 1 _
blank: _
states: q0 qh
start: q0
halt: qh
rule: q0 0 -> qh 0 N (0, 1/sqrt(2))
rule: q0 0 -> qh 1 N (1/sqrt(2), 0)
rule: q0 1 -> qh 0 N (1/sqrt(2), 0)
rule: q0 1 -> qh 1 N (0, 1/sqrt(2))
";

    #[test]
    fn smallest_file() {
        let m = parse_machine(WRITE1).unwrap();
        assert_eq!(m.rules().len(), 1);
        assert_eq!(m.kind(), MachineKind::Deterministic);
    }

    #[test]
    fn sqrt_not_file() {
        let m = parse_machine(SQRT_NOT).unwrap();
        assert_eq!(m.rules().len(), 4);
        let h = 1.0 / 2f64.sqrt();
        assert_eq!(m.rules()[0].weight, Weight::Amplitude(Complex64::new(0.0, h)));
        assert_eq!(m.rules()[1].weight, Weight::Amplitude(Complex64::new(h, 0.0)));
        let ws = crate::evolution::evolve(&m, "0", 1).unwrap();
        let probs: Vec<f64> = ws.iter().map(|(_, w)| w.norm_sqr()).collect();
        assert_eq!(probs.len(), 2);
        assert!(probs.iter().all(|p| (p - 0.5).abs() < 1e-9));
    }

    #[test]
    fn probability_out_of_range() {
        let text = "kind: probabilistic\nalphabet: 0 1 _\nblank: _\nstates: q0 q1\nstart: q0\nhalt: q1\nrule: q0 0 -> q1 0 R 1.5\n";
        let diags = parse_machine(text).unwrap_err();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].line, 7);
        assert_eq!(diags[0].column, 22);
        assert!(diags[0].message.contains("weight out of range [0,1]"), "{}", diags[0]);
    }

    #[test]
    fn every_bad_rule_line_is_reported() {
        let text = "\
kind: probabilistic
alphabet: 0 1 _
blank: _
states: q0 q1
start: q0
halt: q1
rule: q0 0 -> q1 0 R 0.5
rule: q0 0 q1 1 R 0.5
rule: q0 1 -> q1 0 X 1
rule: q0 1 -> q9 0 R 1

rule: q0 _ -> q1 _ R (1, 0)
rule: q0 0 -> q1 1 R 0.5
";
        let diags = parse_machine(text).unwrap_err();
        let lines: Vec<usize> = diags.iter().map(|d| d.line).collect();
        assert_eq!(lines, vec![8, 9, 10, 12]);
        assert_eq!(diags[1].column, 20);
    }

    #[test]
    fn header_problems() {
        let dup = format!("kind: deterministic\n{WRITE1}");
        let diags = parse_machine(&dup).unwrap_err();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].line, 2);
        assert!(diags[0].message.contains("duplicate header"));

        let missing = "kind: deterministic\nalphabet: 0 _\nblank: _\nstates: a\nstart: a\n";
        let diags = parse_machine(missing).unwrap_err();
        assert!(diags.iter().any(|d| d.message.contains("missing header(s): halt")));

        let late = format!("{WRITE1}start: q0\n");
        assert_eq!(parse_machine(&late).unwrap_err()[0].line, 8);

        let bad_kind = WRITE1.replace("deterministic", "classical");
        let d = &parse_machine(&bad_kind).unwrap_err()[0];
        assert_eq!((d.line, d.column), (1, 7));

        let unknown_blank = WRITE1.replace("blank: _", "blank: B");
        assert_eq!(parse_machine(&unknown_blank).unwrap_err()[0].line, 3);
    }

    #[test]
    fn weight_kind_mismatches() {
        let det_weight = WRITE1.replace("N\n", "N 1\n");
        assert!(parse_machine(&det_weight).unwrap_err()[0].message.contains("no weight"));
        let quantum_real = SQRT_NOT.replace("(0, 1/sqrt(2))", "0.5");
        let diags = parse_machine(&quantum_real).unwrap_err();
        assert_eq!(diags.iter().map(|d| d.line).collect::<Vec<_>>(), vec![8, 11]);
    }

    #[test]
    fn non_ascii_is_diagnosed() {
        let text = WRITE1.replace("states: q0 qh", "states: q0 qé");
        let d = &parse_machine(&text).unwrap_err()[0];
        assert_eq!((d.line, d.column), (4, 13));
    }

    #[test]
    fn semantic_errors_point_at_rules() {
        let text = format!("{WRITE1}rule: q0 _ -> qh 0 R\nrule: qh 0 -> qh 0 N\n");
        let diags = parse_machine(&text).unwrap_err();
        assert_eq!(diags.iter().map(|d| d.line).collect::<Vec<_>>(), vec![8, 9]);
    }

    #[test]
    fn reals() {
        assert_eq!(parse_real("0.25"), Some(0.25));
        assert_eq!(parse_real("-1/sqrt(2)"), Some(-1.0 / 2f64.sqrt()));
        assert_eq!(parse_real("1 / sqrt(2)"), Some(1.0 / 2f64.sqrt()));
        assert_eq!(parse_real("inf"), None);
        assert_eq!(parse_real("2/3"), None);
        assert_eq!(parse_complex("(1e-3, -0)"), Some(Complex64::new(1e-3, -0.0)));
    }

    #[test]
    fn real_formatting() {
        assert_eq!(format_real(0.5, 17), "0.5");
        assert_eq!(format_real(1.0 / 2f64.sqrt(), 17), "0.70710678118654746");
        assert_eq!(format_real(1.0 / 2f64.sqrt(), 12), "0.707106781187");
        assert_eq!(format_real(-0.5, 12), "-0.5");
        assert_eq!(format_real(1e-7, 17), "9.9999999999999995e-8");
        assert_eq!(format_real(123456.0, 3), "1.23e5");
        assert_eq!(format_real(0.0, 17), "0");
        assert_eq!(format_real(-0.0, 17), "-0");
        assert_eq!(format_real(0.9999999999999998, 12), "1");
    }

    #[test]
    fn serialization_is_canonical() {
        let m = parse_machine(SQRT_NOT).unwrap();
        let text = serialize_machine(&m);
        assert_eq!(serialize_machine(&m), text);
        assert!(text.starts_with("format: 1\nkind: quantum\n"));
        assert!(text.contains("rule: q0 0 -> qh 0 N (0, 0.70710678118654746)\n"));
        assert_eq!(parse_machine(&text).unwrap(), m);
    }

    #[test]
    fn lint_flags_trailing_space() {
        let text = "kind: deterministic \n";
        let w = lint_machine(text);
        assert_eq!(w.len(), 1);
        assert_eq!((w[0].line, w[0].column, w[0].severity), (1, 20, Severity::Warning));
    }
}
