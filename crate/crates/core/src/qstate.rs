//! Dense complex statevectors over a handful of qubits.
//!
//! Qubit positions are 1-based and qubit 1 is the most significant bit of
//! the amplitude index, so `|100>` lives at index 4.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::gates::Gate;

pub type Amplitude = Complex64;

/// Accepted deviation of the squared norm when building a state from user input.
pub const CONSTRUCT_TOL: f64 = 1e-9;
/// Internal numerical tolerance for invariants.
pub const INTERNAL_TOL: f64 = 1e-12;
/// Branch masses below this are treated as impossible.
pub const ZERO_BRANCH: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("state is not normalized: squared norm {0}")]
    NotNormalized(f64),
    #[error("amplitude is not finite")]
    NonFinite,
    #[error("amplitude count {len} is not 2^{n_qubits}")]
    BadLength { n_qubits: usize, len: usize },
    #[error("a state needs at least one qubit")]
    NoQubits,
    #[error("qubit {wire} out of range for a {n_qubits}-qubit register")]
    WireOutOfRange { wire: usize, n_qubits: usize },
    #[error("qubit {0} listed more than once")]
    DuplicateWire(usize),
    #[error("gate {gate} acts on {arity} qubits but {wires} wires were given")]
    ArityMismatch {
        gate: String,
        arity: usize,
        wires: usize,
    },
    #[error("outcome has zero probability (mass {0:e})")]
    ZeroProbabilityBranch(f64),
    #[error("dimension mismatch: {0} vs {1} qubits")]
    DimensionMismatch(usize, usize),
    #[error("{indices} measured qubits but {bits} outcome bits")]
    OutcomeLength { indices: usize, bits: usize },
    #[error("outcome bit {0} is not 0 or 1")]
    BadBit(u8),
    #[error("no qubits selected")]
    EmptySelection,
}

/// A normalized pure state of `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<Amplitude>,
}

/// Result of a projective measurement in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    /// 1-based qubit positions, in the order they were requested.
    pub measured_indices: Vec<usize>,
    pub outcome_bits: Vec<u8>,
    /// Mass of the observed branch before collapse.
    pub probability: f64,
}

/// Density matrix of a (sub)system, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    entries: Vec<Amplitude>,
}

fn check_finite(a: &Amplitude) -> Result<(), StateError> {
    if a.re.is_finite() && a.im.is_finite() {
        Ok(())
    } else {
        Err(StateError::NonFinite)
    }
}

fn check_wires(wires: &[usize], n_qubits: usize) -> Result<(), StateError> {
    for (k, &w) in wires.iter().enumerate() {
        if w == 0 || w > n_qubits {
            return Err(StateError::WireOutOfRange { wire: w, n_qubits });
        }
        if wires[..k].contains(&w) {
            return Err(StateError::DuplicateWire(w));
        }
    }
    Ok(())
}

/// Single-qubit state `alpha|0> + beta|1>`.
pub fn new_qubit(alpha: Amplitude, beta: Amplitude) -> Result<PureState, StateError> {
    PureState::from_amplitudes(1, vec![alpha, beta])
}

impl PureState {
    /// Builds a state, rejecting anything whose squared norm is off by more than [`CONSTRUCT_TOL`].
    pub fn from_amplitudes(
        n_qubits: usize,
        amplitudes: Vec<Amplitude>,
    ) -> Result<Self, StateError> {
        if n_qubits == 0 {
            return Err(StateError::NoQubits);
        }
        if amplitudes.len() != 1 << n_qubits {
            return Err(StateError::BadLength {
                n_qubits,
                len: amplitudes.len(),
            });
        }
        amplitudes.iter().try_for_each(check_finite)?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > CONSTRUCT_TOL {
            return Err(StateError::NotNormalized(norm));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self, StateError> {
        if n_qubits == 0 {
            return Err(StateError::NoQubits);
        }
        let dim = 1 << n_qubits;
        if index >= dim {
            return Err(StateError::BadLength {
                n_qubits,
                len: index + 1,
            });
        }
        let mut amplitudes = vec![Amplitude::new(0.0, 0.0); dim];
        amplitudes[index] = Amplitude::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// `|0...0>`.
    pub fn zeros(n_qubits: usize) -> Result<Self, StateError> {
        Self::basis(n_qubits, 0)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Amplitude {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability of reading `index` when measuring every qubit.
    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    /// Bit shift of 1-based qubit `pos` within an index.
    fn shift(&self, pos: usize) -> usize {
        self.n_qubits - pos
    }

    /// `self ⊗ other`; `self` occupies the leading (more significant) qubits.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amplitudes = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        PureState {
            n_qubits: self.n_qubits + other.n_qubits,
            amplitudes,
        }
    }

    /// Applies `gate` with its k-th wire mapped to register qubit `wires[k]`.
    pub fn apply(&self, gate: &Gate, wires: &[usize]) -> Result<PureState, StateError> {
        if gate.arity() != wires.len() {
            return Err(StateError::ArityMismatch {
                gate: gate.name().to_string(),
                arity: gate.arity(),
                wires: wires.len(),
            });
        }
        check_wires(wires, self.n_qubits)?;

        let k = wires.len();
        let local_dim = 1 << k;
        // offsets[l] = register bits set by local basis index l
        let offsets: Vec<usize> = (0..local_dim)
            .map(|l| {
                (0..k)
                    .filter(|&j| (l >> (k - 1 - j)) & 1 == 1)
                    .map(|j| 1 << self.shift(wires[j]))
                    .sum()
            })
            .collect();
        let wire_mask: usize = offsets[local_dim - 1];
        let matrix = gate.matrix();

        let mut out = vec![Amplitude::new(0.0, 0.0); self.amplitudes.len()];
        let mut gathered = vec![Amplitude::new(0.0, 0.0); local_dim];
        for base in (0..self.amplitudes.len()).filter(|i| i & wire_mask == 0) {
            for (l, off) in offsets.iter().enumerate() {
                gathered[l] = self.amplitudes[base | off];
            }
            for (row, off) in offsets.iter().enumerate() {
                out[base | off] = matrix[row * local_dim..(row + 1) * local_dim]
                    .iter()
                    .zip(&gathered)
                    .map(|(m, a)| m * a)
                    .sum();
            }
        }
        Ok(PureState {
            n_qubits: self.n_qubits,
            amplitudes: out,
        })
    }

    /// Mass of every outcome pattern of `indices`; pattern bits are MSB-first in `indices` order.
    pub fn outcome_probabilities(&self, indices: &[usize]) -> Result<Vec<f64>, StateError> {
        if indices.is_empty() {
            return Err(StateError::EmptySelection);
        }
        check_wires(indices, self.n_qubits)?;
        let mut masses = vec![0.0; 1 << indices.len()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            masses[self.pattern_of(i, indices)] += a.norm_sqr();
        }
        Ok(masses)
    }

    fn pattern_of(&self, index: usize, indices: &[usize]) -> usize {
        indices
            .iter()
            .fold(0, |acc, &q| (acc << 1) | ((index >> self.shift(q)) & 1))
    }

    /// Samples a computational-basis measurement of `indices` using Born probabilities.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        indices: &[usize],
        rng: &mut R,
    ) -> Result<(MeasurementRecord, PureState), StateError> {
        let masses = self.outcome_probabilities(indices)?;
        let total: f64 = masses.iter().sum();
        let draw = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (pattern, &m) in masses.iter().enumerate() {
            if m < ZERO_BRANCH {
                continue;
            }
            acc += m;
            chosen = Some(pattern);
            if draw < acc {
                break;
            }
        }
        // at least one branch carries mass since the state is normalized
        let pattern = chosen.expect("normalized state has a nonzero branch");
        let bits = pattern_bits(pattern, indices.len());
        self.collapse(indices, &bits, masses[pattern])
    }

    /// Collapses onto the branch where `indices` read `bits`.
    pub fn force_outcome(
        &self,
        indices: &[usize],
        bits: &[u8],
    ) -> Result<(MeasurementRecord, PureState), StateError> {
        if bits.len() != indices.len() {
            return Err(StateError::OutcomeLength {
                indices: indices.len(),
                bits: bits.len(),
            });
        }
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(StateError::BadBit(b));
        }
        let masses = self.outcome_probabilities(indices)?;
        let pattern = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        self.collapse(indices, bits, masses[pattern])
    }

    fn collapse(
        &self,
        indices: &[usize],
        bits: &[u8],
        mass: f64,
    ) -> Result<(MeasurementRecord, PureState), StateError> {
        if mass < ZERO_BRANCH {
            return Err(StateError::ZeroProbabilityBranch(mass));
        }
        let pattern = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        let scale = 1.0 / mass.sqrt();
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if self.pattern_of(i, indices) == pattern {
                    a * scale
                } else {
                    Amplitude::new(0.0, 0.0)
                }
            })
            .collect();
        Ok((
            MeasurementRecord {
                measured_indices: indices.to_vec(),
                outcome_bits: bits.to_vec(),
                probability: mass,
            },
            PureState {
                n_qubits: self.n_qubits,
                amplitudes,
            },
        ))
    }

    /// Restricts a state known to be a product over `keep` and the rest to the `keep` qubits.
    ///
    /// The remaining qubits must be in the computational basis state given by
    /// `rest_bits` (in ascending position order); otherwise the projection
    /// would discard mass and `NotNormalized` is returned.
    pub fn restrict(&self, keep: &[usize], rest_bits: &[u8]) -> Result<PureState, StateError> {
        if keep.is_empty() {
            return Err(StateError::EmptySelection);
        }
        check_wires(keep, self.n_qubits)?;
        let rest: Vec<usize> = (1..=self.n_qubits).filter(|q| !keep.contains(q)).collect();
        if rest.len() != rest_bits.len() {
            return Err(StateError::OutcomeLength {
                indices: rest.len(),
                bits: rest_bits.len(),
            });
        }
        let rest_pattern = rest_bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | b as usize);
        let mut amplitudes = vec![Amplitude::new(0.0, 0.0); 1 << keep.len()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            if rest.is_empty() || self.pattern_of(i, &rest) == rest_pattern {
                amplitudes[self.pattern_of(i, keep)] += a;
            }
        }
        PureState::from_amplitudes(keep.len(), amplitudes)
    }

    /// Squared overlap `|<self|other>|^2`.
    pub fn fidelity(&self, other: &PureState) -> Result<f64, StateError> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<Amplitude, StateError> {
        if self.n_qubits != other.n_qubits {
            return Err(StateError::DimensionMismatch(self.n_qubits, other.n_qubits));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Partial trace over every qubit not in `keep`; the result orders qubits as in `keep`.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityMatrix, StateError> {
        if keep.is_empty() {
            return Err(StateError::EmptySelection);
        }
        check_wires(keep, self.n_qubits)?;
        let rest: Vec<usize> = (1..=self.n_qubits).filter(|q| !keep.contains(q)).collect();
        let dim = 1 << keep.len();
        let mut entries = vec![Amplitude::new(0.0, 0.0); dim * dim];
        // group amplitudes by the traced-out pattern
        let mut by_rest: Vec<Vec<(usize, Amplitude)>> = vec![Vec::new(); 1 << rest.len()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let r = if rest.is_empty() {
                0
            } else {
                self.pattern_of(i, &rest)
            };
            by_rest[r].push((self.pattern_of(i, keep), *a));
        }
        for group in &by_rest {
            for &(row, a) in group {
                for &(col, b) in group {
                    entries[row * dim + col] += a * b.conj();
                }
            }
        }
        Ok(DensityMatrix {
            n_qubits: keep.len(),
            entries,
        })
    }

    /// One line per amplitude with magnitude at least 1e-12: `|b1..bn> re<sign>im i`.
    pub fn trace_lines(&self) -> Vec<String> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() >= INTERNAL_TOL)
            .map(|(i, a)| {
                format!(
                    "|{:0width$b}> {}",
                    i,
                    format_amplitude(*a),
                    width = self.n_qubits
                )
            })
            .collect()
    }

    pub fn to_trace_string(&self) -> String {
        let mut out = String::new();
        for line in self.trace_lines() {
            let _ = writeln!(out, "{line}");
        }
        out
    }
}

fn pattern_bits(pattern: usize, len: usize) -> Vec<u8> {
    (0..len)
        .map(|j| ((pattern >> (len - 1 - j)) & 1) as u8)
        .collect()
}

impl DensityMatrix {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> Amplitude {
        self.entries[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[Amplitude] {
        &self.entries
    }

    pub fn trace(&self) -> Amplitude {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> DensityMatrix {
        let dim = 1 << n_qubits;
        let mut entries = vec![Amplitude::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Amplitude::new(1.0 / dim as f64, 0.0);
        }
        DensityMatrix { n_qubits, entries }
    }

    /// `|psi><psi|`.
    pub fn projector(state: &PureState) -> DensityMatrix {
        let amps = state.amplitudes();
        let dim = amps.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for a in amps {
            for b in amps {
                entries.push(a * b.conj());
            }
        }
        DensityMatrix {
            n_qubits: state.n_qubits(),
            entries,
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let dim = self.dim();
        (0..dim).all(|r| (0..dim).all(|c| (self.get(r, c) - self.get(c, r).conj()).norm() <= tol))
    }

    /// Positive semidefiniteness via symmetric Gaussian elimination; pivots may dip to `-tol`.
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        let dim = self.dim();
        let mut m: Vec<Amplitude> = self.entries.clone();
        for k in 0..dim {
            let pivot = m[k * dim + k].re;
            if pivot < -tol {
                return false;
            }
            if pivot.abs() <= tol {
                // a zero pivot needs the rest of its row to vanish as well
                if (k + 1..dim).any(|j| m[k * dim + j].norm() > tol.sqrt()) {
                    return false;
                }
                continue;
            }
            for i in k + 1..dim {
                let factor = m[i * dim + k] / pivot;
                for j in k..dim {
                    let delta = factor * m[k * dim + j];
                    m[i * dim + j] -= delta;
                }
            }
        }
        true
    }
}

/// `%.12g`-style rendering: 12 significant digits, trailing zeros stripped.
pub fn format_sig12(x: f64) -> String {
    let x = if x.abs() < INTERNAL_TOL { 0.0 } else { x };
    if x == 0.0 {
        return "0".to_string();
    }
    const PRECISION: i32 = 12;
    let sci = format!("{:.*e}", (PRECISION - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..PRECISION).contains(&exp) {
        let fixed = format!("{:.*}", (PRECISION - 1 - exp) as usize, x);
        strip_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip_zeros(mantissa), sign, exp.abs())
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `re<sign>im i`, e.g. `0.6+0i` or `0-0.4i`.
pub fn format_amplitude(a: Amplitude) -> String {
    let im = if a.im.abs() < INTERNAL_TOL { 0.0 } else { a.im };
    let sign = if im < 0.0 { '-' } else { '+' };
    format!("{}{}{}i", format_sig12(a.re), sign, format_sig12(im.abs()))
}
