//! Reversible gate library: Pauli/Hadamard, Feynman (CNOT), Toffoli with
//! selectable wiring, Fredkin, plus the classical truth-table view and
//! cascade bookkeeping.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::qstate::INTERNAL_TOL;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GateError {
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("bad Toffoli wiring: {0}")]
    BadWiring(String),
    #[error("gate {0} is not a classical permutation gate")]
    NotClassical(String),
}

/// A named unitary acting on `arity` qubits. The matrix is row-major and
/// uses the same most-significant-first wire order as [`crate::qstate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    name: String,
    arity: usize,
    matrix: Vec<Complex64>,
}

/// Permutation of basis states realized by a classical reversible gate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    pub arity: usize,
    pub mapping: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CascadeMetrics {
    pub gate_count: usize,
    pub constant_inputs: usize,
    pub garbage_outputs: usize,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl Gate {
    fn new(name: impl Into<String>, arity: usize, matrix: Vec<Complex64>) -> Self {
        debug_assert_eq!(matrix.len(), 1 << (2 * arity));
        Self {
            name: name.into(),
            arity,
            matrix,
        }
    }

    /// Gate sending basis state `i` to `perm[i]`.
    pub fn from_permutation(name: impl Into<String>, arity: usize, perm: &[usize]) -> Self {
        let dim = 1 << arity;
        assert_eq!(perm.len(), dim, "permutation length must be 2^arity");
        let mut matrix = vec![c(0.0, 0.0); dim * dim];
        for (col, &row) in perm.iter().enumerate() {
            matrix[row * dim + col] = c(1.0, 0.0);
        }
        Self::new(name, arity, matrix)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim() + col]
    }

    /// Largest entry of `|U†U - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let dot: Complex64 = (0..dim)
                    .map(|k| self.entry(k, i).conj() * self.entry(k, j))
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_error() <= INTERNAL_TOL
    }

    /// Accepts the names used on the command line and in scenario files:
    /// `I, X, Y, Z, H, FG, TG, FRG`, case-insensitive. `TG` takes an optional
    /// wiring suffix such as `TG(c=1,2;t=3)`; bare `TG` is the middle-target
    /// form with controls on wires 1 and 3.
    pub fn parse(text: &str) -> Result<Gate, GateError> {
        let trimmed = text.trim();
        let upper = trimmed.to_ascii_uppercase();
        match upper.as_str() {
            "FG" | "FEYNMAN" | "CNOT" => return Ok(feynman()),
            "FRG" | "FREDKIN" => return Ok(fredkin()),
            "TG" | "TOFFOLI" => return Ok(middle_target_toffoli()),
            _ => {}
        }
        if let Some(rest) = upper.strip_prefix("TG(") {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| GateError::UnknownGate(trimmed.to_string()))?;
            let (controls, target) = parse_wiring(inner)
                .ok_or_else(|| GateError::BadWiring(format!("cannot parse `{inner}`")))?;
            return toffoli(controls, target);
        }
        standard_gate(trimmed)
    }
}

fn parse_wiring(inner: &str) -> Option<([usize; 2], usize)> {
    let (cpart, tpart) = inner.split_once(';')?;
    let cs = cpart.trim().strip_prefix("C=")?;
    let t = tpart.trim().strip_prefix("T=")?.trim().parse().ok()?;
    let mut it = cs.split(',').map(|s| s.trim().parse::<usize>());
    let c1 = it.next()?.ok()?;
    let c2 = it.next()?.ok()?;
    if it.next().is_some() {
        return None;
    }
    Some(([c1, c2], t))
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// One of `I, X, Y, Z, H` (case-insensitive).
pub fn standard_gate(name: &str) -> Result<Gate, GateError> {
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    let s = FRAC_1_SQRT_2;
    let (label, m) = match name.trim().to_ascii_uppercase().as_str() {
        "I" => ("I", vec![l, o, o, l]),
        "X" => ("X", vec![o, l, l, o]),
        "Y" => ("Y", vec![o, c(0.0, -1.0), c(0.0, 1.0), o]),
        "Z" => ("Z", vec![l, o, o, -l]),
        "H" => ("H", vec![c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]),
        _ => return Err(GateError::UnknownGate(name.to_string())),
    };
    Ok(Gate::new(label, 1, m))
}

/// Feynman gate `(A, B) -> (A, A xor B)`; wire 1 is the control.
pub fn feynman() -> Gate {
    Gate::from_permutation("FG", 2, &[0, 1, 3, 2])
}

/// Doubly-controlled NOT with explicit wiring inside the gate's own three wires.
pub fn toffoli(controls: [usize; 2], target: usize) -> Result<Gate, GateError> {
    let wires = [controls[0], controls[1], target];
    let valid = wires.iter().all(|w| (1..=3).contains(w))
        && wires[0] != wires[1]
        && wires[0] != wires[2]
        && wires[1] != wires[2];
    if !valid {
        return Err(GateError::BadWiring(format!(
            "controls {:?} and target {} must be a permutation of 1, 2, 3",
            controls, target
        )));
    }
    let mut sorted = controls;
    sorted.sort_unstable();
    let bit = |pos: usize| 1usize << (3 - pos);
    let perm: Vec<usize> = (0..8)
        .map(|i| {
            if i & bit(sorted[0]) != 0 && i & bit(sorted[1]) != 0 {
                i ^ bit(target)
            } else {
                i
            }
        })
        .collect();
    let name = format!("TG(c={},{};t={})", sorted[0], sorted[1], target);
    Ok(Gate::from_permutation(name, 3, &perm))
}

/// Toffoli with controls on wires 1 and 3 and the target in the middle,
/// giving the `B xor (A.C)` output on wire 2.
pub fn middle_target_toffoli() -> Gate {
    toffoli([1, 3], 2).expect("fixed wiring is valid")
}

/// Controlled swap: wire 1 controls, wires 2 and 3 are exchanged.
pub fn fredkin() -> Gate {
    let perm: Vec<usize> = (0..8)
        .map(|i| {
            if i & 0b100 != 0 {
                0b100 | ((i & 1) << 1) | ((i >> 1) & 1)
            } else {
                i
            }
        })
        .collect();
    Gate::from_permutation("FRG", 3, &perm)
}

/// The seven gates of the library, in a fixed order.
pub fn library() -> Vec<Gate> {
    let mut gates: Vec<Gate> = ["I", "X", "Y", "Z", "H"]
        .iter()
        .map(|n| standard_gate(n).expect("known name"))
        .collect();
    gates.push(feynman());
    gates.push(middle_target_toffoli());
    gates.push(fredkin());
    gates
}

/// Classical view of a permutation gate.
pub fn truth_table(gate: &Gate) -> Result<TruthTable, GateError> {
    let dim = gate.dim();
    let not_classical = || GateError::NotClassical(gate.name().to_string());
    let mut mapping = Vec::with_capacity(dim);
    for col in 0..dim {
        let mut hit = None;
        for row in 0..dim {
            let e = gate.entry(row, col);
            if (e - c(1.0, 0.0)).norm() <= INTERNAL_TOL {
                if hit.is_some() {
                    return Err(not_classical());
                }
                hit = Some(row);
            } else if e.norm() > INTERNAL_TOL {
                return Err(not_classical());
            }
        }
        mapping.push(hit.ok_or_else(not_classical)?);
    }
    let table = TruthTable {
        arity: gate.arity(),
        mapping,
    };
    if table.is_bijection() {
        Ok(table)
    } else {
        Err(not_classical())
    }
}

impl TruthTable {
    pub fn apply(&self, input: usize) -> usize {
        self.mapping[input]
    }

    /// Bits of `apply(input)` in wire order.
    pub fn apply_bits(&self, bits: &[u8]) -> Vec<u8> {
        let input = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        let out = self.apply(input);
        (0..self.arity)
            .map(|j| ((out >> (self.arity - 1 - j)) & 1) as u8)
            .collect()
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.mapping.len()];
        for &m in &self.mapping {
            if m >= seen.len() || seen[m] {
                return false;
            }
            seen[m] = true;
        }
        true
    }
}

/// Counts for a described cascade. Constant inputs and garbage outputs are
/// declared by the caller; only the gate count is derived.
pub fn cascade_metrics<W>(
    cascade: &[(Gate, W)],
    declared_constant_inputs: usize,
    declared_garbage_outputs: usize,
) -> CascadeMetrics {
    CascadeMetrics {
        gate_count: cascade.len(),
        constant_inputs: declared_constant_inputs,
        garbage_outputs: declared_garbage_outputs,
    }
}
