//! Quantum teleportation over reversible gates and an EPR-pair key
//! predistribution simulator for wireless sensor networks.
//!
//! - [`qstate`]: dense statevectors, measurement, partial trace
//! - [`gates`]: H/X/Y/Z, Feynman, Toffoli, Fredkin and their truth tables
//! - [`teleport`]: the Feynman and Toffoli teleportation circuits
//! - [`wsn`]: pair allocation, key transfer, compromise and channel audit
//! - [`scenario`]: config-driven runs producing a text report
//! - [`cli`]: the `qwsn` command line

pub mod cli;
pub mod gates;
pub mod qstate;
pub mod scenario;
pub mod teleport;
pub mod wsn;

pub use gates::{Gate, GateError, TruthTable};
pub use qstate::{Amplitude, DensityMatrix, PureState, StateError};
pub use teleport::{ClassicalMessage, ProtocolVariant, TeleportResult};
pub use wsn::{Deployment, NodeId, WsnError};
