//! Finite-dimensional amplitude calculus over a handful of path labels:
//! gates, the square root of NOT, phase oracles and Deutsch's one-query
//! decision between constant and balanced functions.
//!
//! Entry `(a, b)` of a gate is the amplitude for input label `a` to leave
//! as output label `b`, so rows index inputs. `compose(g1, g2)` runs `g1`
//! first.

use std::cell::Cell;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::GateError;
use crate::machine::{Direction, MachineDescription, MachineKind, MachineSpec, RuleSpec, Weight, EPS_NORM};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    dim: usize,
    entries: Vec<Complex64>,
}

impl Gate {
    /// Builds a gate from row-major entries, checking unitarity.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Gate, GateError> {
        if dim == 0 {
            return Err(GateError::EmptyGate);
        }
        if entries.len() != dim * dim {
            return Err(GateError::WrongEntryCount { expected: dim * dim, found: entries.len() });
        }
        let gate = Gate { dim, entries };
        let deviation = gate.unitarity_deviation();
        if deviation.is_nan() || deviation > EPS_NORM {
            return Err(GateError::NonUnitary { deviation });
        }
        Ok(gate)
    }

    pub fn identity(dim: usize) -> Gate {
        let mut entries = vec![ZERO; dim * dim];
        for a in 0..dim {
            entries[a * dim + a] = ONE;
        }
        Gate { dim, entries }
    }

    /// The bit flip.
    pub fn not() -> Gate {
        Gate { dim: 2, entries: vec![ZERO, ONE, ONE, ZERO] }
    }

    /// Haar-distributed random unitary: Gram-Schmidt on a matrix of complex
    /// Gaussians.
    pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Gate {
        loop {
            let mut rows: Vec<Vec<Complex64>> = (0..dim)
                .map(|_| {
                    (0..dim)
                        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                        .collect()
                })
                .collect();
            let mut degenerate = false;
            for i in 0..dim {
                for j in 0..i {
                    let proj: Complex64 = rows[j].iter().zip(&rows[i]).map(|(u, v)| u.conj() * v).sum();
                    let basis = rows[j].clone();
                    for (v, u) in rows[i].iter_mut().zip(&basis) {
                        *v -= proj * u;
                    }
                }
                let norm = rows[i].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                if norm < 1e-6 {
                    degenerate = true;
                    break;
                }
                rows[i].iter_mut().for_each(|v| *v /= norm);
            }
            if !degenerate {
                return Gate { dim, entries: rows.concat() };
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, input: usize, output: usize) -> Complex64 {
        self.entries[input * self.dim + output]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Largest entry of `|G G† - I|` and `|G† G - I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let delta = if i == j { ONE } else { ZERO };
                let rows: Complex64 = (0..d).map(|k| self.entry(i, k) * self.entry(j, k).conj()).sum();
                let cols: Complex64 = (0..d).map(|k| self.entry(k, i).conj() * self.entry(k, j)).sum();
                worst = worst.max((rows - delta).norm()).max((cols - delta).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_deviation() <= EPS_NORM
    }
}

/// The square root of NOT: keeps the bit with amplitude `i/√2` and flips it
/// with amplitude `1/√2`.
pub fn sqrt_not() -> Gate {
    let keep = Complex64::new(0.0, FRAC_1_SQRT_2);
    let flip = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Gate { dim: 2, entries: vec![keep, flip, flip, keep] }
}

/// `first` followed by `second`: entry `(a, b)` sums `first[a][k] * second[k][b]`
/// over the intermediate labels `k`.
pub fn compose(first: &Gate, second: &Gate) -> Result<Gate, GateError> {
    if first.dim != second.dim {
        return Err(GateError::DimensionMismatch(first.dim, second.dim));
    }
    let d = first.dim;
    let mut entries = vec![ZERO; d * d];
    for a in 0..d {
        for b in 0..d {
            entries[a * d + b] = (0..d).map(|k| first.entry(a, k) * second.entry(k, b)).sum();
        }
    }
    Ok(Gate { dim: d, entries })
}

/// Normalized amplitudes over path labels `0..d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathState {
    amplitudes: Vec<Complex64>,
}

impl PathState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<PathState, GateError> {
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if amplitudes.is_empty() || (norm_sq - 1.0).abs() > EPS_NORM {
            return Err(GateError::NotNormalized(norm_sq));
        }
        Ok(PathState { amplitudes })
    }

    pub fn basis(dim: usize, label: usize) -> PathState {
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[label] = ONE;
        PathState { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// `out[b] = Σ_a s[a] · g[a][b]`.
pub fn apply(g: &Gate, s: &PathState) -> Result<PathState, GateError> {
    if g.dim != s.dim() {
        return Err(GateError::DimensionMismatch(g.dim, s.dim()));
    }
    let amplitudes =
        (0..g.dim).map(|b| s.amplitudes.iter().enumerate().map(|(a, x)| x * g.entry(a, b)).sum()).collect();
    Ok(PathState { amplitudes })
}

/// A function `{0,1}^n -> {0,1}^m` given by its value table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanFunctionTable {
    inputs: u32,
    outputs: u32,
    values: Vec<u64>,
}

impl BooleanFunctionTable {
    pub fn new(inputs: u32, outputs: u32, values: Vec<u64>) -> Result<Self, GateError> {
        if inputs >= usize::BITS || values.len() != 1usize << inputs {
            return Err(GateError::TableLength { inputs, found: values.len() });
        }
        if let Some(&value) = values.iter().find(|&&v| outputs < 64 && v >> outputs != 0) {
            return Err(GateError::TableValue { value, outputs });
        }
        Ok(BooleanFunctionTable { inputs, outputs, values })
    }

    pub fn inputs(&self) -> u32 {
        self.inputs
    }

    pub fn outputs(&self) -> u32 {
        self.outputs
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }
}

/// Diagonal gate multiplying the amplitude on path `x` by
/// `exp(2πi f(x) / 2^m)`.
pub fn phase_oracle(f: &BooleanFunctionTable) -> Gate {
    let d = f.values.len();
    let scale = TAU / 2f64.powi(f.outputs as i32);
    let mut entries = vec![ZERO; d * d];
    for (x, &v) in f.values.iter().enumerate() {
        entries[x * d + x] = phase(v as f64 * scale);
    }
    Gate { dim: d, entries }
}

// Exact at multiples of a quarter turn so that (-1)^f and i^f come out clean.
fn phase(angle: f64) -> Complex64 {
    let quarters = angle / (TAU / 4.0);
    if quarters.fract() == 0.0 {
        return match (quarters as i64).rem_euclid(4) {
            0 => ONE,
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, angle)
}

/// Wraps a function table and counts how often its oracle gate is used.
#[derive(Debug)]
pub struct CountingOracle {
    table: BooleanFunctionTable,
    calls: Cell<usize>,
}

impl CountingOracle {
    pub fn new(table: BooleanFunctionTable) -> Self {
        CountingOracle { table, calls: Cell::new(0) }
    }

    pub fn gate(&self) -> Gate {
        self.calls.set(self.calls.get() + 1);
        phase_oracle(&self.table)
    }

    pub fn calls(&self) -> usize {
        self.calls.get()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Constant,
    Balanced,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Constant => "constant",
            Verdict::Balanced => "balanced",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeutschReport {
    /// Amplitude of output 0 after √NOT, oracle, √NOT on input 0.
    pub amplitude_zero: Complex64,
    pub p_zero: f64,
    pub p_one: f64,
    pub verdict: Verdict,
    pub oracle_calls: usize,
}

/// Decides whether `f: {0,1} -> {0,1}` is constant or balanced with one use
/// of its phase oracle sandwiched between two √NOT gates.
pub fn deutsch_decide(f: &BooleanFunctionTable) -> Result<DeutschReport, GateError> {
    if f.inputs != 1 || f.outputs != 1 {
        return Err(GateError::WrongArity { inputs: f.inputs, outputs: f.outputs });
    }
    let oracle = CountingOracle::new(f.clone());
    let circuit = compose(&compose(&sqrt_not(), &oracle.gate())?, &sqrt_not())?;
    let out = apply(&circuit, &PathState::basis(2, 0))?;
    let p = out.probabilities();
    Ok(DeutschReport {
        amplitude_zero: out.amplitudes[0],
        p_zero: p[0],
        p_one: p[1],
        verdict: if p[0] < 0.5 { Verdict::Constant } else { Verdict::Balanced },
        oracle_calls: oracle.calls(),
    })
}

/// A one-step quantum machine that rewrites the scanned cell by `g`:
/// alphabet `0..d` plus blank `_`, states `q0` and `qh`, and a rule
/// `(q0, a) -> (qh, b, N)` with amplitude `g[a][b]` for every nonzero entry.
pub fn bridge_gate_to_machine(g: &Gate) -> Result<MachineDescription, GateError> {
    if !(1..=10).contains(&g.dim) {
        return Err(GateError::UnsupportedDimension(g.dim));
    }
    let deviation = g.unitarity_deviation();
    if deviation > EPS_NORM {
        return Err(GateError::NonUnitary { deviation });
    }
    let mut alphabet: Vec<String> = (0..g.dim).map(|a| a.to_string()).collect();
    alphabet.push("_".into());
    let mut rules = Vec::new();
    for a in 0..g.dim {
        for b in 0..g.dim {
            let c = g.entry(a, b);
            if c != ZERO {
                rules.push(RuleSpec::new(
                    "q0",
                    a.to_string(),
                    "qh",
                    b.to_string(),
                    Direction::Nothing,
                    Weight::Amplitude(c),
                ));
            }
        }
    }
    let spec = MachineSpec {
        kind: MachineKind::Quantum,
        alphabet,
        blank: "_".into(),
        states: vec!["q0".into(), "qh".into()],
        start: "q0".into(),
        halt: "qh".into(),
        rules,
    };
    Ok(spec.build().expect("bridge machine is well-formed"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const H: f64 = FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn sqrt_not_entries() {
        let g = sqrt_not();
        assert!(g.is_unitary());
        assert_eq!(g.entry(0, 0), c(0.0, H));
        assert_eq!(g.entry(1, 1), c(0.0, H));
        assert_eq!(g.entry(0, 1), c(H, 0.0));
        assert_eq!(g.entry(1, 0), c(H, 0.0));
        for a in 0..2 {
            for b in 0..2 {
                assert!((g.entry(a, b).norm_sqr() - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sqrt_not_on_basis_states() {
        let g = sqrt_not();
        let zero = apply(&g, &PathState::basis(2, 0)).unwrap();
        assert_eq!(zero.amplitudes(), &[c(0.0, H), c(H, 0.0)]);
        for p in zero.probabilities() {
            assert!((p - 0.5).abs() < 1e-15);
        }
        let one = apply(&g, &PathState::basis(2, 1)).unwrap();
        assert_eq!(one.amplitudes(), &[c(H, 0.0), c(0.0, H)]);

        let twice = apply(&g, &zero).unwrap();
        assert!(close(twice.amplitudes()[0], c(0.0, 0.0), 1e-15));
        assert!(close(twice.amplitudes()[1], c(0.0, 1.0), 1e-15));
    }

    #[test]
    fn composition() {
        let g = sqrt_not();
        let gg = compose(&g, &g).unwrap();
        assert!(close(gg.entry(0, 0), c(0.0, 0.0), 1e-15));
        assert!(close(gg.entry(0, 1), c(0.0, 1.0), 1e-15));
        assert!((gg.entry(0, 1).norm_sqr() - 1.0).abs() < 1e-9);
        assert!(gg.is_unitary());

        // Equal to NOT up to the global phase e^{iπ/2}.
        let phase = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2);
        let not = Gate::not();
        for (x, y) in gg.entries().iter().zip(not.entries()) {
            assert!(close(*x, phase * y, EPS_NORM));
        }

        assert_eq!(compose(&g, &Gate::identity(2)).unwrap(), g);
        assert_eq!(compose(&g, &Gate::identity(3)), Err(GateError::DimensionMismatch(2, 3)));
        assert_eq!(
            apply(&Gate::identity(3), &PathState::basis(2, 0)),
            Err(GateError::DimensionMismatch(3, 2))
        );
    }

    #[test]
    fn identity_leaves_state_alone() {
        let s = PathState::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        assert_eq!(apply(&Gate::identity(2), &s).unwrap(), s);
    }

    #[test]
    fn gate_constructor_checks() {
        assert_eq!(Gate::new(0, vec![]), Err(GateError::EmptyGate));
        assert!(matches!(Gate::new(2, vec![ONE; 3]), Err(GateError::WrongEntryCount { .. })));
        assert!(matches!(Gate::new(2, vec![ONE; 4]), Err(GateError::NonUnitary { .. })));
        assert!(Gate::new(2, sqrt_not().entries().to_vec()).is_ok());
        assert!(PathState::new(vec![ONE, ONE]).is_err());
    }

    #[test]
    fn phase_oracles() {
        let f = BooleanFunctionTable::new(1, 1, vec![0, 1]).unwrap();
        let g = phase_oracle(&f);
        assert_eq!(g.entries(), &[ONE, ZERO, ZERO, c(-1.0, 0.0)]);

        let zero = BooleanFunctionTable::new(2, 3, vec![0; 4]).unwrap();
        assert_eq!(phase_oracle(&zero), Gate::identity(4));

        let quarter = BooleanFunctionTable::new(1, 2, vec![0, 1]).unwrap();
        assert_eq!(phase_oracle(&quarter).entries(), &[ONE, ZERO, ZERO, c(0.0, 1.0)]);

        let eighth = BooleanFunctionTable::new(1, 3, vec![1, 7]).unwrap();
        let g = phase_oracle(&eighth);
        assert!(close(g.entry(0, 0), c(H, H), 1e-15));
        assert!(close(g.entry(1, 1), c(H, -H), 1e-15));
        assert!(g.is_unitary());
    }

    #[test]
    fn table_checks() {
        assert!(matches!(BooleanFunctionTable::new(1, 1, vec![0]), Err(GateError::TableLength { .. })));
        assert!(matches!(
            BooleanFunctionTable::new(1, 1, vec![0, 2]),
            Err(GateError::TableValue { value: 2, .. })
        ));
    }

    #[test]
    fn deutsch_on_all_tables() {
        // Amplitude of output 0 is ((-1)^f(1) - (-1)^f(0)) / 2.
        let cases = [
            ([0, 0], 0.0, Verdict::Constant),
            ([0, 1], -1.0, Verdict::Balanced),
            ([1, 0], 1.0, Verdict::Balanced),
            ([1, 1], 0.0, Verdict::Constant),
        ];
        for (values, amp, verdict) in cases {
            let f = BooleanFunctionTable::new(1, 1, values.to_vec()).unwrap();
            let report = deutsch_decide(&f).unwrap();
            assert_eq!(report.verdict, verdict, "{values:?}");
            assert_eq!(report.oracle_calls, 1);
            assert!(
                close(report.amplitude_zero, c(amp, 0.0), 1e-12),
                "{values:?}: {}",
                report.amplitude_zero
            );
            assert!((report.p_zero - amp * amp).abs() < 1e-9);
            assert!((report.p_zero + report.p_one - 1.0).abs() < 1e-9);
        }
        let wide = BooleanFunctionTable::new(2, 1, vec![0, 1, 1, 0]).unwrap();
        assert_eq!(deutsch_decide(&wide), Err(GateError::WrongArity { inputs: 2, outputs: 1 }));
    }

    #[test]
    fn bridge_reproduces_gate() {
        let m = bridge_gate_to_machine(&sqrt_not()).unwrap();
        assert_eq!(m.rules().len(), 4);
        let ws = crate::evolution::evolve(&m, "0", 1).unwrap();
        let halted_zero =
            crate::machine::Configuration::new(m.halt(), 0, [(0, m.symbol("0").unwrap())], m.blank());
        assert_eq!(ws.weight(&halted_zero), c(0.0, H));
        assert!(crate::validate::validate_norm_preserving(&m, &["0", "1"], 2).unwrap().passed());

        let id = bridge_gate_to_machine(&Gate::identity(2)).unwrap();
        let ws = crate::evolution::evolve(&id, "1", 1).unwrap();
        assert_eq!(ws.len(), 1);
        let (config, w) = ws.iter().next().unwrap();
        assert_eq!(id.tape_string(config), "1");
        assert_eq!(w, ONE);

        assert_eq!(bridge_gate_to_machine(&Gate::identity(11)), Err(GateError::UnsupportedDimension(11)));
    }

    #[test]
    fn random_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..=8 {
            let g = Gate::random_unitary(d, &mut rng);
            assert!(g.unitarity_deviation() < 1e-12, "d={d}");
        }
    }
}
