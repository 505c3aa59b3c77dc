//! Teleportation of one qubit over an EPR pair, built from reversible gates.
//!
//! Register layout: qubit 1 carries the payload, qubit 2 is the sender's
//! half of the pair and qubit 3 the receiver's half. The Toffoli form adds a
//! fourth qubit held at `|1>` so that each Toffoli acts as a controlled-NOT
//! on the protocol wires; that ancilla stays disentangled throughout.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;

use crate::gates::{
    cascade_metrics, feynman, middle_target_toffoli, standard_gate, CascadeMetrics, Gate,
};
use crate::qstate::{new_qubit, Amplitude, PureState, StateError, INTERNAL_TOL};

/// Qubits the sender measures.
pub const MEASURED: [usize; 2] = [1, 2];
/// Qubit the receiver holds.
pub const RECEIVER: usize = 3;
const ANCILLA: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolVariant {
    Feynman,
    Toffoli,
}

impl ProtocolVariant {
    pub const ALL: [ProtocolVariant; 2] = [ProtocolVariant::Feynman, ProtocolVariant::Toffoli];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolVariant::Feynman => "feynman",
            ProtocolVariant::Toffoli => "toffoli",
        }
    }

    /// Total register width including any ancilla.
    pub fn register_size(self) -> usize {
        match self {
            ProtocolVariant::Feynman => 3,
            ProtocolVariant::Toffoli => 4,
        }
    }

    /// Constant initial state of the qubits appended after the protocol wires.
    fn ancilla(self) -> Option<PureState> {
        match self {
            ProtocolVariant::Feynman => None,
            ProtocolVariant::Toffoli => Some(PureState::basis(1, 1).expect("one qubit")),
        }
    }

    fn ancilla_bits(self) -> &'static [u8] {
        match self {
            ProtocolVariant::Feynman => &[],
            ProtocolVariant::Toffoli => &[1],
        }
    }

    /// The four gate applications that take `|payload>|00>` to the pre-measurement state.
    ///
    /// The first two prepare the pair on qubits 2 and 3; the last two rotate
    /// the sender's qubits into the Bell basis.
    pub fn steps(self) -> Vec<Step> {
        let h = standard_gate("H").expect("H is a standard gate");
        match self {
            ProtocolVariant::Feynman => vec![
                Step::new(h.clone(), vec![2], "H on qubit 2"),
                Step::new(feynman(), vec![2, 3], "FG from qubit 2 to qubit 3"),
                Step::new(feynman(), vec![1, 2], "FG from qubit 1 to qubit 2"),
                Step::new(h, vec![1], "H on qubit 1"),
            ],
            ProtocolVariant::Toffoli => vec![
                Step::new(h.clone(), vec![2], "H on qubit 2"),
                Step::new(
                    middle_target_toffoli(),
                    vec![2, 3, ANCILLA],
                    "TG controls 2,4 target 3",
                ),
                Step::new(
                    middle_target_toffoli(),
                    vec![1, 2, ANCILLA],
                    "TG controls 1,4 target 2",
                ),
                Step::new(h, vec![1], "H on qubit 1"),
            ],
        }
    }

    /// Gate count, constant inputs and garbage outputs of the circuit.
    ///
    /// The pair qubits are the protocol's resource and are not counted as
    /// constants; the Toffoli ancilla is one constant input and one garbage output.
    pub fn metrics(self) -> CascadeMetrics {
        let cascade: Vec<(Gate, Vec<usize>)> = self
            .steps()
            .into_iter()
            .map(|s| (s.gate, s.wires))
            .collect();
        let extra = self.register_size() - 3;
        cascade_metrics(&cascade, extra, extra)
    }
}

impl fmt::Display for ProtocolVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "feynman" | "fg" => Ok(ProtocolVariant::Feynman),
            "toffoli" | "tg" => Ok(ProtocolVariant::Toffoli),
            other => Err(format!(
                "unknown variant `{other}` (expected feynman or toffoli)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub gate: Gate,
    pub wires: Vec<usize>,
    pub description: &'static str,
}

impl Step {
    fn new(gate: Gate, wires: Vec<usize>, description: &'static str) -> Self {
        Self {
            gate,
            wires,
            description,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    /// `phi_0` .. `phi_4`.
    pub label: String,
    /// The step that produced this stage; `None` for the initial state.
    pub produced_by: Option<&'static str>,
    /// Full register, ancilla included.
    pub state: PureState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageTrace {
    pub variant: ProtocolVariant,
    pub stages: Vec<Stage>,
}

impl StageTrace {
    /// Stage `k` restricted to the three protocol qubits.
    pub fn protocol_state(&self, k: usize) -> Result<PureState, StateError> {
        let state = &self.stages[k].state;
        match self.variant {
            ProtocolVariant::Feynman => Ok(state.clone()),
            ProtocolVariant::Toffoli => state.restrict(&[1, 2, 3], self.variant.ancilla_bits()),
        }
    }

    /// The pre-measurement state on the protocol qubits.
    pub fn final_state(&self) -> Result<PureState, StateError> {
        self.protocol_state(self.stages.len() - 1)
    }
}

/// Sender's measurement bits for qubits 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassicalMessage {
    pub m1: u8,
    pub m2: u8,
}

impl ClassicalMessage {
    pub const ALL: [ClassicalMessage; 4] = [
        ClassicalMessage { m1: 0, m2: 0 },
        ClassicalMessage { m1: 0, m2: 1 },
        ClassicalMessage { m1: 1, m2: 0 },
        ClassicalMessage { m1: 1, m2: 1 },
    ];

    pub fn new(m1: u8, m2: u8) -> Result<Self, StateError> {
        for b in [m1, m2] {
            if b > 1 {
                return Err(StateError::BadBit(b));
            }
        }
        Ok(Self { m1, m2 })
    }

    /// `2*m1 + m2`.
    pub fn index(self) -> usize {
        (self.m1 as usize) << 1 | self.m2 as usize
    }

    pub fn bits(self) -> [u8; 2] {
        [self.m1, self.m2]
    }
}

impl fmt::Display for ClassicalMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.m1, self.m2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeleportResult {
    pub message: ClassicalMessage,
    /// Gate names applied by the receiver, in order.
    pub correction: Vec<&'static str>,
    pub receiver_state: PureState,
    pub input_fidelity: f64,
    /// Probability of the observed outcome.
    pub probability: f64,
}

/// `(|00> + |11>)/sqrt(2)`, built by H then Feynman on `|00>`.
pub fn make_epr_pair() -> PureState {
    let h = standard_gate("H").expect("H is a standard gate");
    PureState::zeros(2)
        .and_then(|s| s.apply(&h, &[1]))
        .and_then(|s| s.apply(&feynman(), &[1, 2]))
        .expect("fixed two-qubit circuit")
}

fn initial_register(payload: &PureState, variant: ProtocolVariant) -> PureState {
    let base = payload.tensor(&PureState::zeros(2).expect("two qubits"));
    match variant.ancilla() {
        Some(anc) => base.tensor(&anc),
        None => base,
    }
}

/// Runs the four gate steps and keeps every intermediate state.
pub fn run_stages(
    alpha: Amplitude,
    beta: Amplitude,
    variant: ProtocolVariant,
) -> Result<StageTrace, StateError> {
    let payload = new_qubit(alpha, beta)?;
    let mut state = initial_register(&payload, variant);
    let mut stages = vec![Stage {
        label: "phi_0".to_string(),
        produced_by: None,
        state: state.clone(),
    }];
    for (k, step) in variant.steps().into_iter().enumerate() {
        state = state.apply(&step.gate, &step.wires)?;
        stages.push(Stage {
            label: format!("phi_{}", k + 1),
            produced_by: Some(step.description),
            state: state.clone(),
        });
    }
    Ok(StageTrace { variant, stages })
}

/// Receiver's fix-up for each outcome: `00 -> []`, `01 -> [X]`, `10 -> [Z]`, `11 -> [X, Z]`.
pub fn correction_for(message: ClassicalMessage) -> Vec<&'static str> {
    let mut gates = Vec::new();
    if message.m2 == 1 {
        gates.push("X");
    }
    if message.m1 == 1 {
        gates.push("Z");
    }
    gates
}

/// Applies `correction_for(message)` to a single-qubit state.
pub fn apply_correction(
    state: &PureState,
    message: ClassicalMessage,
) -> Result<PureState, StateError> {
    correction_for(message)
        .into_iter()
        .try_fold(state.clone(), |s, name| {
            let gate = standard_gate(name).expect("correction gates are standard");
            s.apply(&gate, &[1])
        })
}

/// Branch masses of the four outcomes at the pre-measurement stage, indexed by `2*m1 + m2`.
pub fn outcome_masses(
    alpha: Amplitude,
    beta: Amplitude,
    variant: ProtocolVariant,
) -> Result<[f64; 4], StateError> {
    let trace = run_stages(alpha, beta, variant)?;
    let masses = trace.stages[4].state.outcome_probabilities(&MEASURED)?;
    Ok([masses[0], masses[1], masses[2], masses[3]])
}

fn finish(
    collapsed: &PureState,
    message: ClassicalMessage,
    probability: f64,
    variant: ProtocolVariant,
    payload: &PureState,
) -> Result<TeleportResult, StateError> {
    let mut rest = message.bits().to_vec();
    rest.extend_from_slice(variant.ancilla_bits());
    let received = collapsed.restrict(&[RECEIVER], &rest)?;
    let receiver_state = apply_correction(&received, message)?;
    let input_fidelity = receiver_state.fidelity(payload)?;
    Ok(TeleportResult {
        message,
        correction: correction_for(message),
        receiver_state,
        input_fidelity,
        probability,
    })
}

fn message_from(bits: &[u8]) -> ClassicalMessage {
    ClassicalMessage {
        m1: bits[0],
        m2: bits[1],
    }
}

/// Full protocol: prepare, measure qubits 1 and 2 with `rng`, correct qubit 3.
pub fn teleport<R: Rng + ?Sized>(
    alpha: Amplitude,
    beta: Amplitude,
    variant: ProtocolVariant,
    rng: &mut R,
) -> Result<TeleportResult, StateError> {
    let payload = new_qubit(alpha, beta)?;
    let trace = run_stages(alpha, beta, variant)?;
    let (record, collapsed) = trace.stages[4].state.measure(&MEASURED, rng)?;
    let message = message_from(&record.outcome_bits);
    finish(&collapsed, message, record.probability, variant, &payload)
}

/// Same as [`teleport`] but selects the measurement branch instead of sampling it.
pub fn teleport_forced(
    alpha: Amplitude,
    beta: Amplitude,
    variant: ProtocolVariant,
    message: ClassicalMessage,
) -> Result<TeleportResult, StateError> {
    let payload = new_qubit(alpha, beta)?;
    let trace = run_stages(alpha, beta, variant)?;
    let (record, collapsed) = trace.stages[4]
        .state
        .force_outcome(&MEASURED, &message.bits())?;
    finish(&collapsed, message, record.probability, variant, &payload)
}

/// Teleports `payload` over an already-distributed two-qubit `pair`.
///
/// Only the sender's Bell-basis rotation (the last two steps) runs here; the
/// pair itself replaces the in-circuit preparation.
pub fn teleport_with_pair<R: Rng + ?Sized>(
    payload: &PureState,
    pair: &PureState,
    variant: ProtocolVariant,
    rng: &mut R,
) -> Result<TeleportResult, StateError> {
    if payload.n_qubits() != 1 {
        return Err(StateError::DimensionMismatch(1, payload.n_qubits()));
    }
    if pair.n_qubits() != 2 {
        return Err(StateError::DimensionMismatch(2, pair.n_qubits()));
    }
    let mut state = payload.tensor(pair);
    if let Some(anc) = variant.ancilla() {
        state = state.tensor(&anc);
    }
    for step in variant.steps().into_iter().skip(2) {
        state = state.apply(&step.gate, &step.wires)?;
    }
    let (record, collapsed) = state.measure(&MEASURED, rng)?;
    let message = message_from(&record.outcome_bits);
    finish(&collapsed, message, record.probability, variant, payload)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Coeff {
    Alpha,
    Beta,
}

/// A printed stage expression: display text and `(weight, symbol, basis index)` terms.
struct PrintedStage {
    text: &'static str,
    terms: &'static [(f64, Coeff, usize)],
}

const R2: f64 = std::f64::consts::FRAC_1_SQRT_2;
use Coeff::{Alpha as A, Beta as B};

const STAGE_INITIAL: PrintedStage = PrintedStage {
    text: "alpha|000> + beta|100>",
    terms: &[(1.0, A, 0b000), (1.0, B, 0b100)],
};
const STAGE_AFTER_H2: PrintedStage = PrintedStage {
    text: "alpha/sqrt2 (|000> + |010>) + beta/sqrt2 (|101> + |110>)",
    terms: &[
        (R2, A, 0b000),
        (R2, A, 0b010),
        (R2, B, 0b101),
        (R2, B, 0b110),
    ],
};
const STAGE_FG_23: PrintedStage = PrintedStage {
    text: "alpha/sqrt2 (|000> + |011>) + beta/sqrt2 (|101> + |111>)",
    terms: &[
        (R2, A, 0b000),
        (R2, A, 0b011),
        (R2, B, 0b101),
        (R2, B, 0b111),
    ],
};
const STAGE_FG_12: PrintedStage = PrintedStage {
    text: "alpha/sqrt2 (|000> + |011>) + beta/sqrt2 (|111> + |101>)",
    terms: &[
        (R2, A, 0b000),
        (R2, A, 0b011),
        (R2, B, 0b111),
        (R2, B, 0b101),
    ],
};
const STAGE_FINAL: PrintedStage = PrintedStage {
    text: "1/2 |00>(alpha|0> + beta|1>) + 1/2 |01>(alpha|1> + beta|0>) + 1/2 |10>(alpha|0> - beta|1>) + 1/2 |11>(alpha|1> - beta|0>)",
    terms: &[
        (0.5, A, 0b000),
        (0.5, B, 0b001),
        (0.5, A, 0b011),
        (0.5, B, 0b010),
        (0.5, A, 0b100),
        (-0.5, B, 0b101),
        (0.5, A, 0b111),
        (-0.5, B, 0b110),
    ],
};
const STAGE_TG_23: PrintedStage = PrintedStage {
    text: "alpha/sqrt2 (|001> + |010>) + beta/sqrt2 (|101> + |110>)",
    terms: &[
        (R2, A, 0b001),
        (R2, A, 0b010),
        (R2, B, 0b101),
        (R2, B, 0b110),
    ],
};
const STAGE_TG_12: PrintedStage = PrintedStage {
    text: "alpha/sqrt2 (|000> + |010>) + beta/sqrt2 (|101> + |110>)",
    terms: &[
        (R2, A, 0b000),
        (R2, A, 0b010),
        (R2, B, 0b101),
        (R2, B, 0b110),
    ],
};

fn printed_stages(variant: ProtocolVariant) -> [PrintedStage; 5] {
    match variant {
        ProtocolVariant::Feynman => [
            STAGE_INITIAL,
            STAGE_AFTER_H2,
            STAGE_FG_23,
            STAGE_FG_12,
            STAGE_FINAL,
        ],
        ProtocolVariant::Toffoli => [
            STAGE_INITIAL,
            STAGE_AFTER_H2,
            STAGE_TG_23,
            STAGE_TG_12,
            STAGE_FINAL,
        ],
    }
}

impl PrintedStage {
    fn evaluate(&self, alpha: Amplitude, beta: Amplitude) -> Vec<Amplitude> {
        let mut v = vec![Amplitude::new(0.0, 0.0); 8];
        for &(w, sym, idx) in self.terms {
            v[idx] += match sym {
                Coeff::Alpha => alpha,
                Coeff::Beta => beta,
            } * w;
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Match,
    Mismatch,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Match => "MATCH",
            Verdict::Mismatch => "MISMATCH",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceBlock {
    pub stage: String,
    /// Computed state on the three protocol qubits.
    pub computed: PureState,
    pub printed: &'static str,
    /// Largest amplitude difference between computed and printed vectors.
    pub deviation: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceReport {
    pub variant: ProtocolVariant,
    pub blocks: Vec<TraceBlock>,
}

impl TraceReport {
    pub fn mismatched_stages(&self) -> Vec<&str> {
        self.blocks
            .iter()
            .filter(|b| b.verdict == Verdict::Mismatch)
            .map(|b| b.stage.as_str())
            .collect()
    }

    pub fn verdict(&self, stage: usize) -> Verdict {
        self.blocks[stage].verdict
    }

    /// Plain-text report, one block per stage separated by blank lines.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, block) in self.blocks.iter().enumerate() {
            if k > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "stage={} variant={}", block.stage, self.variant);
            out.push_str(&block.computed.to_trace_string());
            let _ = writeln!(out, "printed: {}", block.printed);
            let _ = writeln!(out, "verdict: {}", block.verdict);
        }
        out
    }
}

/// Compares every computed stage against the printed expression for it.
/// The computed state is authoritative; the verdict only flags disagreement.
pub fn trace_report(
    alpha: Amplitude,
    beta: Amplitude,
    variant: ProtocolVariant,
) -> Result<TraceReport, StateError> {
    let trace = run_stages(alpha, beta, variant)?;
    let printed = printed_stages(variant);
    let mut blocks = Vec::with_capacity(5);
    for (k, expr) in printed.iter().enumerate() {
        let computed = trace.protocol_state(k)?;
        let expected = expr.evaluate(alpha, beta);
        let deviation = computed
            .amplitudes()
            .iter()
            .zip(&expected)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let verdict = if deviation <= INTERNAL_TOL {
            Verdict::Match
        } else {
            Verdict::Mismatch
        };
        blocks.push(TraceBlock {
            stage: trace.stages[k].label.clone(),
            computed,
            printed: expr.text,
            deviation,
            verdict,
        });
    }
    Ok(TraceReport { variant, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Amplitude {
        Amplitude::new(re, im)
    }

    #[test]
    fn epr_pair_amplitudes() {
        let pair = make_epr_pair();
        let s = FRAC_1_SQRT_2;
        assert!((pair.amplitude(0) - c(s, 0.0)).norm() < 1e-12);
        assert!((pair.amplitude(3) - c(s, 0.0)).norm() < 1e-12);
        assert_eq!(pair.amplitude(1).norm(), 0.0);
        assert_eq!(pair.amplitude(2).norm(), 0.0);
        for q in [1, 2] {
            let p = pair.outcome_probabilities(&[q]).unwrap();
            assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn initial_stage_for_basis_input() {
        let trace = run_stages(c(1.0, 0.0), c(0.0, 0.0), ProtocolVariant::Feynman).unwrap();
        assert_eq!(trace.stages[0].state.amplitude(0), c(1.0, 0.0));
        assert_eq!(trace.stages.len(), 5);
    }

    #[test]
    fn final_stage_for_basis_input() {
        let trace = run_stages(c(1.0, 0.0), c(0.0, 0.0), ProtocolVariant::Feynman).unwrap();
        let phi4 = trace.final_state().unwrap();
        for i in 0..8 {
            let want = if [0b000, 0b011, 0b100, 0b111].contains(&i) {
                0.5
            } else {
                0.0
            };
            assert!(
                (phi4.amplitude(i) - c(want, 0.0)).norm() < 1e-12,
                "index {i}"
            );
        }
    }

    #[test]
    fn run_stages_rejects_unnormalized() {
        assert!(matches!(
            run_stages(c(1.0, 0.0), c(1.0, 0.0), ProtocolVariant::Toffoli),
            Err(StateError::NotNormalized(_))
        ));
    }

    #[test]
    fn corrections() {
        assert!(correction_for(ClassicalMessage::new(0, 0).unwrap()).is_empty());
        assert_eq!(
            correction_for(ClassicalMessage::new(0, 1).unwrap()),
            vec!["X"]
        );
        assert_eq!(
            correction_for(ClassicalMessage::new(1, 0).unwrap()),
            vec!["Z"]
        );
        assert_eq!(
            correction_for(ClassicalMessage::new(1, 1).unwrap()),
            vec!["X", "Z"]
        );
        assert_eq!(ClassicalMessage::new(2, 0), Err(StateError::BadBit(2)));
    }

    #[test]
    fn basis_state_teleports_on_every_branch() {
        for variant in ProtocolVariant::ALL {
            for msg in ClassicalMessage::ALL {
                let r = teleport_forced(c(1.0, 0.0), c(0.0, 0.0), variant, msg).unwrap();
                assert_eq!(r.message, msg);
                assert!((r.input_fidelity - 1.0).abs() < 1e-12);
                assert!((r.probability - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn complex_phase_branch_10() {
        let s = FRAC_1_SQRT_2;
        let msg = ClassicalMessage::new(1, 0).unwrap();
        let trace = run_stages(c(s, 0.0), c(0.0, s), ProtocolVariant::Feynman).unwrap();
        let (_, collapsed) = trace.stages[4]
            .state
            .force_outcome(&MEASURED, &msg.bits())
            .unwrap();
        let before = collapsed.restrict(&[3], &[1, 0]).unwrap();
        assert!((before.amplitude(0) - c(s, 0.0)).norm() < 1e-12);
        assert!((before.amplitude(1) - c(0.0, -s)).norm() < 1e-12);

        let r = teleport_forced(c(s, 0.0), c(0.0, s), ProtocolVariant::Feynman, msg).unwrap();
        assert!((r.receiver_state.amplitude(0) - c(s, 0.0)).norm() < 1e-12);
        assert!((r.receiver_state.amplitude(1) - c(0.0, s)).norm() < 1e-12);
    }

    #[test]
    fn sampled_teleport_is_faithful_and_deterministic() {
        for variant in ProtocolVariant::ALL {
            let mut r1 = ChaCha8Rng::seed_from_u64(42);
            let mut r2 = ChaCha8Rng::seed_from_u64(42);
            for _ in 0..50 {
                let a = teleport(c(0.6, 0.0), c(0.8, 0.0), variant, &mut r1).unwrap();
                let b = teleport(c(0.6, 0.0), c(0.8, 0.0), variant, &mut r2).unwrap();
                assert_eq!(a, b);
                assert!((a.input_fidelity - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn teleport_over_stored_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let payload = new_qubit(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        for variant in ProtocolVariant::ALL {
            for _ in 0..20 {
                let r = teleport_with_pair(&payload, &make_epr_pair(), variant, &mut rng).unwrap();
                assert!((r.input_fidelity - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn circuit_metrics() {
        let f = ProtocolVariant::Feynman.metrics();
        assert_eq!(
            (f.gate_count, f.constant_inputs, f.garbage_outputs),
            (4, 0, 0)
        );
        let t = ProtocolVariant::Toffoli.metrics();
        assert_eq!(
            (t.gate_count, t.constant_inputs, t.garbage_outputs),
            (4, 1, 1)
        );
    }

    #[test]
    fn trace_verdicts_for_real_input() {
        let report = trace_report(c(0.6, 0.0), c(0.8, 0.0), ProtocolVariant::Feynman).unwrap();
        assert_eq!(report.verdict(0), Verdict::Match);
        assert_eq!(report.verdict(1), Verdict::Mismatch);
        assert_eq!(report.verdict(4), Verdict::Match);
        assert_eq!(report.mismatched_stages(), vec!["phi_1", "phi_2", "phi_3"]);
    }

    #[test]
    fn variant_parsing() {
        assert_eq!(
            "Feynman".parse::<ProtocolVariant>(),
            Ok(ProtocolVariant::Feynman)
        );
        assert_eq!(
            "tg".parse::<ProtocolVariant>(),
            Ok(ProtocolVariant::Toffoli)
        );
        assert!("cnot".parse::<ProtocolVariant>().is_err());
    }
}
