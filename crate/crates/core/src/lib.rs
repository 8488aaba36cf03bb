//! Quantum precoded polar codes.
//!
//! CSS codes built from rate-1 precoded polar codes: construction and
//! validation of information sets and precoders, a joint quaternary
//! successive-cancellation list syndrome decoder, Monte Carlo logical error
//! rate estimation, a genetic search over `(info set, precoder)` pairs and
//! Clifford gate accounting.
//!
//! Conventions used throughout the crate:
//!
//! * vectors are row vectors, `G = G₂^⊗n` with `G₂ = [[1,0],[1,1]]`;
//! * indices are 0-based and decoded in increasing order;
//! * a Pauli at one qubit is the bit pair `(x, z)`: `I=(0,0)`, `X=(1,0)`,
//!   `Z=(0,1)`, `Y=(1,1)`.

pub mod bitmatrix;
pub mod channel;
pub mod cli;
pub mod code;
pub mod decoder;
pub mod error;
pub mod ga;
pub mod gates;
pub mod montecarlo;
pub mod oracle;

pub use bitmatrix::{BitMatrix, BitVec};
pub use channel::{ChannelParam, Pauli, PauliVec};
pub use code::{CodeFile, CodeSpec, Precoder, QuantumCode, ValidityReport, Violation};
pub use decoder::{Quad, QuantumDecoder, QuantumDecoding, SyndromePair};
pub use error::{Error, Result};
